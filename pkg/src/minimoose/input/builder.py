"""Validation and two-phase construction of an app tree from a parsed input."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from ..errors import BuildError, MaterialError, MooseError, SolveError, ValidationError
from .params import Params, coerce
from .parser import SpecTree, parse_input
from .registry import BLOCK_KINDS, Registry, default_registry


@dataclass(frozen=True)
class Diagnostic:
    path: str
    message: str

    def __str__(self):
        return f"{self.message} at {self.path}"


def _mesh_params():
    return (
        Params()
        .add("type", "string", "GeneratedMesh")
        .add("dim", "int")
        .add("nx", "int", 1)
        .add("ny", "int", 1)
        .add("xmin", "real", 0.0)
        .add("xmax", "real", 1.0)
        .add("ymin", "real", 0.0)
        .add("ymax", "real", 1.0)
    )


def _variable_params():
    return (
        Params()
        .add("order", "string", "FIRST")
        .add("family", "string", "LAGRANGE")
        .add("initial_condition", "real", 0.0)
        .add("initial_function", "string", "")
    )


def _aux_variable_params():
    return Params().add("order", "string", "FIRST", "FIRST (nodal) or CONSTANT (elemental)").add(
        "initial_condition", "real", 0.0
    )


def _executioner_params():
    return (
        Params()
        .add("type", "string", "Steady")
        .add("solve_type", "string", "NEWTON")
        .add("dt", "real", 1.0)
        .add("start_time", "real", 0.0)
        .add("end_time", "real", math.nan)
        .add("num_steps", "int", -1)
        .add("steady_state_detection", "bool", False)
        .add("steady_state_tol", "real", 1e-6)
        .add("steady_state_start_time", "real", -math.inf)
        .add("abs_tol", "real", 1e-8)
        .add("rel_tol", "real", 1e-8)
        .add("max_nonlinear_its", "int", 25)
        .add("gmres_rtol", "real", 1e-6)
        .add("gmres_max_its", "int", 300)
        .add("gmres_restart", "int", 30)
        .add("line_search", "string", "none")
        .add("preconditioner", "string", "default")
        .add("jfnk_epsilon", "real", 0.0, "0 selects the sqrt(eps) rule")
        .add("fixed_point", "bool", False)
        .add("fixed_point_max_its", "int", 10)
        .add("fixed_point_tol", "real", 1e-6)
    )


def _output_params():
    return (
        Params()
        .add("file_base", "string", "")
        .add("csv", "bool", True)
        .add("vtk", "bool", False)
        .add("vtk_interval", "int", 1)
        .add("checkpoint_interval", "int", 0)
    )


def _problem_params():
    return Params().add("derivative_capacity", "int", 32).add("quadrature_order", "int", 2)


# blocks whose parameters sit directly on the block
SYNTAX_BLOCKS = {
    "Mesh": _mesh_params,
    "Executioner": _executioner_params,
    "Outputs": _output_params,
    "Problem": _problem_params,
}
# blocks whose children are declarations with a fixed schema
DECLARATION_BLOCKS = {"Variables": _variable_params, "AuxVariables": _aux_variable_params}
REQUIRED_BLOCKS = ("Mesh", "Variables")


def _check_params(path: str, schema: Params, raw: dict, diags: list) -> dict:
    out = {}
    for desc in schema:
        if desc.name in raw:
            try:
                out[desc.name] = coerce(desc, raw[desc.name])
            except ValueError as exc:
                diags.append(Diagnostic(path, f"bad value: {exc}"))
        elif desc.required:
            diags.append(Diagnostic(path, f"missing required parameter '{desc.name}'"))
        else:
            out[desc.name] = desc.default
    for key in raw:
        if key not in schema:
            diags.append(Diagnostic(path, f"unknown parameter '{key}'"))
    return out


def _check_syntax_values(name: str, vals: dict, diags: list):
    checks = {
        ("Mesh", "type"): ("GeneratedMesh",),
        ("Mesh", "dim"): (1, 2),
        ("Executioner", "type"): ("Steady", "Transient"),
        ("Executioner", "solve_type"): ("NEWTON", "JFNK", "PJFNK"),
        ("Executioner", "line_search"): ("none", "backtracking"),
        ("Executioner", "preconditioner"): ("default", "lu", "jacobi", "none"),
    }
    for (block, key), allowed in checks.items():
        if block == name and key in vals and vals[key] not in allowed:
            diags.append(Diagnostic(name, f"{key} must be one of {list(allowed)}, got {vals[key]!r}"))
    if name == "Mesh":
        for key in ("nx", "ny"):
            if vals.get(key, 1) < 1:
                diags.append(Diagnostic(name, f"{key} must be at least 1"))


def validate_spec(tree: SpecTree, reg: Registry | None = None) -> list[Diagnostic]:
    """Structural checks: known types in the right blocks, required and unknown parameters."""
    reg = reg or default_registry()
    diags: list[Diagnostic] = []
    top = tree.root
    for name in REQUIRED_BLOCKS:
        if top.child(name) is None:
            diags.append(Diagnostic(name, f"missing [{name}] block"))
    if top.params:
        diags.append(Diagnostic("/", f"parameters outside any block: {list(top.params)}"))
    for block in top.children:
        name = block.name
        if name in SYNTAX_BLOCKS:
            vals = _check_params(name, SYNTAX_BLOCKS[name](), block.params, diags)
            _check_syntax_values(name, vals, diags)
            for c in block.children:
                diags.append(Diagnostic(f"{name}/{c.name}", "unexpected sub-block"))
        elif name in DECLARATION_BLOCKS:
            if block.params:
                diags.append(Diagnostic(name, f"unexpected parameters {list(block.params)}"))
            for c in block.children:
                path = f"{name}/{c.name}"
                vals = _check_params(path, DECLARATION_BLOCKS[name](), c.params, diags)
                order = vals.get("order")
                allowed = ("FIRST",) if name == "Variables" else ("FIRST", "CONSTANT")
                if order is not None and order not in allowed:
                    diags.append(Diagnostic(path, f"order must be one of {list(allowed)}"))
            if name == "Variables" and not block.children:
                diags.append(Diagnostic(name, "at least one variable is required"))
        elif name in BLOCK_KINDS:
            kind = BLOCK_KINDS[name]
            if block.params:
                diags.append(Diagnostic(name, f"unexpected parameters {list(block.params)}"))
            for c in block.children:
                path = f"{name}/{c.name}"
                if c.children:
                    diags.append(Diagnostic(path, "object blocks cannot nest"))
                type_name = c.params.get("type")
                if type_name is None:
                    diags.append(Diagnostic(path, "missing required parameter 'type'"))
                    continue
                entry = reg.get(type_name) if isinstance(type_name, str) else None
                if entry is None:
                    diags.append(Diagnostic(path, f"unknown type {type_name}"))
                    continue
                if entry.kind != kind:
                    diags.append(Diagnostic(path, f"type {type_name} is a {entry.kind}, not allowed in [{name}]"))
                    continue
                vector = getattr(entry.cls, "vector", False)
                if name == "VectorPostprocessors" and not vector or name == "Postprocessors" and vector:
                    diags.append(Diagnostic(path, f"type {type_name} does not belong in [{name}]"))
                _check_params(path, entry.params, c.params, diags)
        else:
            diags.append(Diagnostic(name, f"unknown block [{name}]"))
    return diags


# construction ----------------------------------------------------------------------------


def _syntax(tree: SpecTree, name: str) -> dict:
    block = tree.get(name)
    raw = block.params if block is not None else {}
    return {d.name: (coerce(d, raw[d.name]) if d.name in raw else d.default) for d in SYNTAX_BLOCKS[name]()}


def _declarations(tree: SpecTree, name: str):
    block = tree.get(name)
    schema = DECLARATION_BLOCKS[name]()
    for c in block.children if block is not None else []:
        yield c.name, {d.name: (coerce(d, c.params[d.name]) if d.name in c.params else d.default) for d in schema}


def _objects(tree: SpecTree, block_name: str, reg: Registry):
    block = tree.get(block_name)
    for c in block.children if block is not None else []:
        entry = reg[c.params["type"]]
        yield entry.cls(c.name, dict(c.params))


def _solver_options(cls, e):
    return cls(
        mode="JFNK" if e["solve_type"] in ("JFNK", "PJFNK") else "NEWTON",
        abs_tol=e["abs_tol"],
        rel_tol=e["rel_tol"],
        max_nonlinear_its=e["max_nonlinear_its"],
        gmres_restart=e["gmres_restart"],
        gmres_rtol=e["gmres_rtol"],
        gmres_max_its=e["gmres_max_its"],
        line_search=e["line_search"],
        preconditioner=e["preconditioner"],
        jfnk_epsilon=e["jfnk_epsilon"] or None,
    )


def _executioner(tree: SpecTree, is_root: bool = True):
    from ..multiapp.app import ExecutionerConfig
    from ..solver import SolverOptions

    e = _syntax(tree, "Executioner")
    try:
        solver = _solver_options(SolverOptions, e)
    except SolveError as exc:
        raise BuildError(f"Executioner: {exc}") from None
    cfg = ExecutionerConfig(
        kind=e["type"],
        solver=solver,
        dt=e["dt"],
        start_time=e["start_time"],
        end_time=None if math.isnan(e["end_time"]) else e["end_time"],
        num_steps=None if e["num_steps"] < 0 else e["num_steps"],
        steady_state_detection=e["steady_state_detection"],
        steady_state_tol=e["steady_state_tol"],
        steady_state_start_time=e["steady_state_start_time"],
        fixed_point=e["fixed_point"],
        fixed_point_max_its=e["fixed_point_max_its"],
        fixed_point_tol=e["fixed_point_tol"],
    )
    open_ended = cfg.num_steps is None and cfg.end_time is None and not cfg.steady_state_detection
    if is_root and cfg.kind == "Transient" and open_ended:
        raise BuildError("Transient executioner needs num_steps, end_time or steady_state_detection")
    if cfg.end_time is not None and cfg.end_time <= cfg.start_time:
        raise BuildError("end_time must exceed start_time")
    return cfg


def _check_consumers(problem, objects):
    produced = {p for m in problem.materials for p in m.provides()}
    for obj in objects:
        consumed = getattr(obj, "consumed_properties", None)
        for prop in consumed() if consumed else []:
            if prop not in produced:
                raise MaterialError(f"{obj.name} consumes property '{prop}' which no material produces")


def mesh_from_spec(tree: SpecTree):
    from ..mesh import build_structured_mesh

    m = _syntax(tree, "Mesh")
    if m["dim"] == 1:
        return build_structured_mesh(1, (m["nx"],), [(m["xmin"], m["xmax"])])
    return build_structured_mesh(2, (m["nx"], m["ny"]), [(m["xmin"], m["xmax"]), (m["ymin"], m["ymax"])])


def build_simulation(tree: SpecTree, reg: Registry | None = None, base_dir=".", name: str = "main",
                     path: str | None = None, file_base: str | None = None, _stack=(), default_base=None):
    """Construct the :class:`AppNode` described by ``tree`` (children included).

    Objects are created first and cross-referenced afterwards, so block
    order in the file does not matter.
    """
    from ..fem.problem import FEProblem
    from ..multiapp.app import AppNode, OutputConfig
    from ..systems.materials import resolve_material_order

    reg = reg or default_registry()
    diags = validate_spec(tree, reg)
    if diags:
        raise ValidationError(diags)
    path = path or name

    mesh = mesh_from_spec(tree)
    pr = _syntax(tree, "Problem")
    variables = list(_declarations(tree, "Variables"))
    problem = FEProblem(mesh, [v for v, _ in variables], pr["derivative_capacity"], pr["quadrature_order"])
    for var, p in variables:
        problem.initial_conditions[var] = p["initial_function"] or p["initial_condition"]
    for aux, p in _declarations(tree, "AuxVariables"):
        if aux in problem.variables or aux in problem.aux:
            raise BuildError(f"auxiliary variable {aux} duplicates another variable")
        problem.add_aux(aux, elemental=p["order"] == "CONSTANT")
        problem.aux[aux].values[:] = p["initial_condition"]

    # phase 1: construct
    problem.functions = {f.name: f for f in _objects(tree, "Functions", reg)}
    for block in ("Postprocessors", "VectorPostprocessors"):
        for pp in _objects(tree, block, reg):
            if pp.name in problem.postprocessors or pp.name in problem.vector_postprocessors:
                raise BuildError(f"duplicate postprocessor name {pp.name}")
            (problem.vector_postprocessors if pp.vector else problem.postprocessors)[pp.name] = pp
    problem.materials = list(_objects(tree, "Materials", reg))
    from ..systems.base import IntegratedBC

    problem.kernels = list(_objects(tree, "Kernels", reg))
    bcs = list(_objects(tree, "BCs", reg))
    problem.integrated_bcs = [b for b in bcs if isinstance(b, IntegratedBC)]
    problem.nodal_bcs = [b for b in bcs if not isinstance(b, IntegratedBC)]
    problem.aux_kernels = list(_objects(tree, "AuxKernels", reg))
    multiapps = list(_objects(tree, "MultiApps", reg))
    transfers = list(_objects(tree, "Transfers", reg))

    # phase 2: resolve references
    for var, p in variables:
        fn = p["initial_function"]
        if fn and fn not in problem.functions:
            raise BuildError(f"variable {var}: unknown function '{fn}'")
    ordered = [
        *problem.functions.values(),
        *problem.postprocessors.values(),
        *problem.vector_postprocessors.values(),
        *problem.materials,
        *problem.kernels,
        *bcs,
        *problem.aux_kernels,
    ]
    for obj in ordered:
        obj.attach(problem)
    problem.material_order = resolve_material_order(problem.materials)
    _check_consumers(problem, ordered)

    ex = _executioner(tree, is_root=path == name)
    o = _syntax(tree, "Outputs")
    outputs = OutputConfig(
        file_base=file_base or o["file_base"] or default_base or name,
        csv=o["csv"],
        vtk=o["vtk"],
        vtk_interval=o["vtk_interval"],
        checkpoint_interval=o["checkpoint_interval"],
    )
    app = AppNode(name, problem, ex, outputs, path=path, multiapps=multiapps, transfers=transfers)

    base_dir = Path(base_dir)
    for ma in multiapps:
        ma.attach(problem)
        for i, pos in enumerate(ma.positions):
            file = (base_dir / ma.input_file(i)).resolve()
            if file in _stack:
                raise BuildError(f"cyclic MultiApp input: {file.name} includes itself")
            try:
                text = file.read_text()
            except OSError as exc:
                raise BuildError(f"{ma.name}: cannot read input file {file}: {exc}") from None
            child_tree = parse_input(text)
            child_name = f"{ma.name}{i}"
            try:
                child = build_simulation(
                    child_tree, reg, file.parent, child_name, f"{path}-{child_name}",
                    f"{outputs.file_base}_{child_name}", (*_stack, file),
                )
            except ValidationError as exc:
                raise ValidationError(
                    [Diagnostic(f"{file.name}:{d.path}", d.message) for d in exc.diagnostics]
                ) from None
            ma.add_child(child, pos)
    for tr in transfers:
        tr.attach(problem)
        target = tr.params["multi_app"]
        if not target:
            if len(multiapps) != 1:
                raise BuildError(f"{tr.name}: multi_app must name one of {[m.name for m in multiapps]}")
            tr.bind(app, multiapps[0])
        else:
            match = [m for m in multiapps if m.name == target]
            if not match:
                raise BuildError(f"{tr.name}: unknown MultiApp '{target}'")
            tr.bind(app, match[0])
    app.share_events(app.events)
    return app


def load_input(file, reg: Registry | None = None):
    """Parse, validate and build the app tree for an input file."""
    file = Path(file)
    try:
        text = file.read_text()
    except OSError as exc:
        raise MooseError(f"cannot read input file {file}: {exc}") from None
    tree = parse_input(text)
    return build_simulation(tree, reg, file.parent, "main", "main", None, (file.resolve(),), file.stem)


def check_input(file, reg: Registry | None = None) -> list[Diagnostic]:
    tree = parse_input(Path(file).read_text())
    return validate_spec(tree, reg)
