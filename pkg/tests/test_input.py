import textwrap
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import block, build, mesh_block, variables_block
from minimoose.driver.cli import example_input
from minimoose.errors import BuildError, InputSyntaxError, MaterialError, MooseError, ValidationError
from minimoose.input.builder import build_simulation, load_input, validate_spec
from minimoose.input.params import Params, coerce
from minimoose.input.parser import SpecBlock, SpecTree, parse_input, render
from minimoose.input.registry import Registry, default_registry

KERNEL_TEXT = "[Kernels]\n  [diff]\n    type = Diffusion\n    variable = u\n  []\n[]"


def test_parse_nested_block():
    tree = parse_input(KERNEL_TEXT)
    assert [c.name for c in tree.root.children] == ["Kernels"]
    diff = tree["Kernels"].child("diff")
    assert diff.params == {"type": "Diffusion", "variable": "u"}


def test_parse_empty_text():
    tree = parse_input("")
    assert tree.root.children == [] and tree.root.params == {}


def test_duplicate_key_reports_line():
    with pytest.raises(InputSyntaxError, match="duplicate key x at line 3"):
        parse_input("[A]\nx = 1\nx = 2\n[]")


@pytest.mark.parametrize(
    "text,line",
    [
        ("[A]\n  x = 1\n", 1),  # unterminated block
        ("[A]\n  x = 'a b\n[]", 2),  # unterminated quote
        ("[A]\n  x =\n[]", 2),  # missing value
        ("[]\n", 1),  # close without open
        ("[A]\n[]\n[A]\n[]", 3),  # duplicate sibling
        ("[A]\n  x = a=b\n[]", 2),  # bad literal
    ],
)
def test_syntax_errors_carry_location(text, line):
    with pytest.raises(InputSyntaxError) as info:
        parse_input(text)
    assert info.value.line == line


def test_values_and_comments():
    tree = parse_input(
        textwrap.dedent(
            """
            # leading comment
            [B]
              a = 1.5e3   # trailing
              b = true
              c = word
              d = '1 2 3'
              e = 'left right'
              f = "0.5"
            []
            """
        )
    )
    p = tree["B"].params
    assert p == {"a": 1500.0, "b": True, "c": "word", "d": [1.0, 2.0, 3.0], "e": ["left", "right"], "f": [0.5]}
    assert list(p) == ["a", "b", "c", "d", "e", "f"]


def test_legacy_subblock_syntax():
    tree = parse_input("[K]\n  [./a]\n    type = X\n  [../]\n[]")
    assert tree["K"].child("a").params == {"type": "X"}


_word = st.from_regex(r"[A-Za-z_][A-Za-z0-9_.:/-]{0,8}", fullmatch=True).filter(
    lambda w: w not in ("true", "false")
)
_name = st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,6}", fullmatch=True)
_value = st.one_of(
    st.floats(allow_nan=False, allow_infinity=False),
    st.booleans(),
    _word,
    st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=4),
    st.lists(_word, min_size=1, max_size=4),
)


def _blocks(depth):
    children = st.just([]) if depth == 0 else st.lists(_blocks(depth - 1), max_size=3, unique_by=lambda b: b.name)
    return st.builds(
        lambda name, params, kids: SpecBlock(name, params, kids),
        _name,
        st.dictionaries(_name, _value, max_size=4),
        children,
    )


@settings(max_examples=100, deadline=None)
@given(st.lists(_blocks(2), max_size=4, unique_by=lambda b: b.name))
def test_render_parse_round_trip(blocks):
    tree = SpecTree(SpecBlock("", {}, blocks))
    assert parse_input(render(tree)) == tree


def test_params_coercion():
    p = Params().add("n", "int").add("x", "real").add("names", "string_list")
    assert coerce(p["n"], 3.0) == 3
    assert coerce(p["x"], [2.0]) == 2.0
    assert coerce(p["names"], "left") == ["left"]
    with pytest.raises(ValueError):
        coerce(p["n"], 2.5)
    with pytest.raises(ValueError):
        coerce(p["x"], "abc")


def test_registry_rejects_duplicates():
    reg = Registry()
    reg.register(object, "Kernel", "Thing")
    with pytest.raises(MooseError):
        reg.register(object, "Kernel", "Thing")


MINIMAL = mesh_block(1, 4) + variables_block("u")


def _diags(text):
    return [str(d) for d in validate_spec(parse_input(text))]


def test_validate_valid_input():
    assert _diags(MINIMAL + KERNEL_TEXT) == []


def test_validate_unknown_type():
    assert _diags(MINIMAL + KERNEL_TEXT.replace("Diffusion", "Difusion")) == ["unknown type Difusion at Kernels/diff"]


def test_validate_missing_param():
    (msg,) = _diags(MINIMAL + "[Kernels]\n  [diff]\n    type = Diffusion\n  []\n[]")
    assert "variable" in msg and "missing" in msg


def test_validate_other_problems():
    text = MINIMAL + block("Kernels", diff={"type": "Diffusion", "variable": "u", "speed": 3}) + block(
        "BCs", bad={"type": "Diffusion", "variable": "u"}
    ) + "[Bogus]\n[]\n"
    msgs = _diags(text)
    assert "unknown parameter 'speed' at Kernels/diff" in msgs
    assert any("not allowed in [BCs]" in m for m in msgs)
    assert "unknown block [Bogus] at Bogus" in msgs


def test_validate_requires_mesh_and_variables():
    msgs = _diags(KERNEL_TEXT)
    assert "missing [Mesh] block at Mesh" in msgs and "missing [Variables] block at Variables" in msgs


def test_minimal_input_solves_trivially():
    app = build(MINIMAL)
    report = app.run()
    assert report.converged and report.solve.initial_norm == 0.0


def test_undeclared_variable():
    with pytest.raises(BuildError, match="unknown variable v"):
        build(MINIMAL + KERNEL_TEXT.replace("variable = u", "variable = v"))


def test_missing_property_producer():
    with pytest.raises(MaterialError, match="consumes property 'k'"):
        build(MINIMAL + block("Kernels", diff={"type": "Diffusion", "variable": "u", "diffusivity": "k"}))


def test_declaration_order_does_not_matter():
    objs = block("BCs", left={"type": "FunctionDirichletBC", "variable": "u", "boundary": "left", "function": "f"})
    fns = block("Functions", f={"type": "ConstantFunction", "value": 2})
    a = build(objs + fns + MINIMAL + KERNEL_TEXT)
    b = build(MINIMAL + KERNEL_TEXT + fns + objs)
    a.run()
    b.run()
    assert (a.problem.u == b.problem.u).all()


def _graph(app):
    p = app.problem
    return (
        [type(k).__name__ + k.name for k in p.kernels],
        [b.name for b in p.nodal_bcs + p.integrated_bcs],
        [m.name for m in p.material_order],
        list(p.postprocessors),
        list(p.functions),
        [c.path for c in app.walk()],
        [(t.name, t.multiapp.name) for t in app.transfers],
    )


def test_build_is_deterministic_and_builds_six_children():
    a, b = load_input(example_input()), load_input(example_input())
    assert _graph(a) == _graph(b)
    assert len(list(a.children())) == 6
    assert [c.path for c in a.children()] == [f"main-micro{i}" for i in range(6)]


def test_built_inputs_validate_cleanly():
    tree = parse_input(Path(example_input()).read_text())
    build_simulation(tree, base_dir=example_input().parent)
    assert validate_spec(tree) == []


def test_invalid_input_fails_build_with_diagnostics():
    with pytest.raises(ValidationError) as info:
        build(MINIMAL + KERNEL_TEXT.replace("Diffusion", "Difusion"))
    assert "unknown type Difusion at Kernels/diff" in str(info.value)


def test_cyclic_multiapp_input(tmp_path):
    text = MINIMAL + "[Executioner]\n  type = Transient\n  num_steps = 1\n[]\n" + block(
        "MultiApps", sub={"type": "TransientMultiApp", "input_files": "self.i", "positions": [0.5, 0, 0]}
    )
    (tmp_path / "self.i").write_text(text)
    with pytest.raises(BuildError, match="cyclic"):
        load_input(tmp_path / "self.i")


def test_default_registry_covers_system_kinds():
    reg = default_registry()
    for kind in ("Kernel", "BC", "Material", "AuxKernel", "Postprocessor", "Function", "Transfer", "MultiApp"):
        assert reg.names(kind), kind
