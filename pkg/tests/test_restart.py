import hashlib
import re

import numpy as np
import pytest

from conftest import block, build, coupled_recovery, example_copy, mesh_block
from minimoose.driver.output import read_csv
from minimoose.errors import CheckpointError
from minimoose.input.builder import load_input
from minimoose.restart import (
    FORMAT_VERSION,
    RestartableStore,
    checkpoint_path,
    read_checkpoint,
    read_checkpoint_file,
    register_restartable,
    write_checkpoint,
    write_checkpoint_file,
)

SECTIONS = {"time": np.array([0.75, 0.25, 3.0]), "solution": np.array([1.0, -2.5])}

# bump together with FORMAT_VERSION whenever the byte layout changes
LAYOUT_SHA256 = {1: "85eb205822d8a039c1448391670c4114a8006d268e544d40551f0ddfd11388c9"}


def test_layout_tied_to_version(tmp_path):
    path = write_checkpoint_file(tmp_path / "x.mmcp", "demo", 3, 0.75, SECTIONS)
    assert hashlib.sha256(path.read_bytes()).hexdigest() == LAYOUT_SHA256[FORMAT_VERSION]


def test_file_round_trip_bit_exact(tmp_path, rng):
    data = {"a": rng.normal(size=50), "b": np.array([np.nan, -0.0, 1e-310, np.inf]), "empty": np.zeros(0)}
    path = write_checkpoint_file(tmp_path / "r.mmcp", "app", 7, 1.0 / 3.0, data)
    header, sections = read_checkpoint_file(path)
    assert header["app"] == "app" and header["step"] == 7 and header["time"] == 1.0 / 3.0
    for k, v in data.items():
        assert sections[k].tobytes() == v.astype("<f8").tobytes()


def test_little_endian_payload(tmp_path):
    path = write_checkpoint_file(tmp_path / "e.mmcp", "app", 0, 0.0, {"x": np.array([1.0])})
    assert b"\x00\x00\x00\x00\x00\x00\xf0?" in path.read_bytes()


def test_bad_magic(tmp_path):
    path = write_checkpoint_file(tmp_path / "m.mmcp", "app", 0, 0.0, SECTIONS)
    path.write_bytes(b"XXXX" + path.read_bytes()[4:])
    with pytest.raises(CheckpointError, match="not a checkpoint"):
        read_checkpoint_file(path)


def test_version_mismatch(tmp_path):
    path = write_checkpoint_file(tmp_path / "v.mmcp", "app", 0, 0.0, SECTIONS)
    path.write_bytes(path.read_bytes().replace(b"version 1", b"version 9"))
    with pytest.raises(CheckpointError, match="version 9"):
        read_checkpoint_file(path)


def test_tampered_count_is_truncation(tmp_path):
    path = write_checkpoint_file(tmp_path / "t.mmcp", "app", 0, 0.0, SECTIONS)
    path.write_bytes(path.read_bytes().replace(b"section time 3", b"section time 4"))
    with pytest.raises(CheckpointError, match="truncated section 'time'"):
        read_checkpoint_file(path)


def test_cut_file(tmp_path):
    path = write_checkpoint_file(tmp_path / "c.mmcp", "app", 0, 0.0, SECTIONS)
    path.write_bytes(path.read_bytes()[:-20])
    with pytest.raises(CheckpointError, match="truncated|end marker"):
        read_checkpoint_file(path)


def test_missing_file(tmp_path):
    with pytest.raises(CheckpointError, match="does not exist"):
        read_checkpoint_file(tmp_path / "nope.mmcp")


def test_store_duplicate_and_counter_round_trip():
    store = RestartableStore()
    counter = {"n": 5}
    register_restartable(store, "counter", lambda: np.array([counter["n"]], float), lambda a: counter.update(n=int(a[0])))
    with pytest.raises(CheckpointError, match="counter"):
        register_restartable(store, "counter", lambda: np.zeros(1), lambda a: None)
    snap = store.snapshot()
    counter["n"] = 99
    store.restore(snap)
    assert counter["n"] == 5


def test_store_extra_and_missing_datum():
    store = RestartableStore()
    store.register("a", lambda: np.zeros(1), lambda a: None)
    with pytest.raises(CheckpointError, match="'b' has no registered datum"):
        store.restore({"a": np.zeros(1), "b": np.zeros(1)})
    with pytest.raises(CheckpointError, match="missing section 'a'"):
        store.restore({})


DECAY = (
    mesh_block(1, 3)
    + "[Variables]\n  [u]\n    initial_condition = 1\n  []\n[]\n"
    + block(
        "Materials",
        d={"type": "AccumulatedDamageMaterial", "variable": "u", "rate": 0.5},
    )
    + block("Kernels", dt={"type": "TimeDerivative", "variable": "u"}, r={"type": "Reaction", "variable": "u"})
    + block("Postprocessors", avg={"type": "ElementAverage", "variable": "u"}, dmg={"type": "ElementAverageMaterialProperty", "property": "damage"})
    + "[Executioner]\n  type = Transient\n  dt = 0.1\n  num_steps = 20\n[]\n"
)


def test_user_datum_in_app_checkpoint(tmp_path):
    app = build(DECAY)
    app.initialize(0.0)
    counter = {"n": 3}
    app.store.register("user/counter", lambda: np.array([counter["n"]], float), lambda a: counter.update(n=int(a[0])))
    write_checkpoint(app, tmp_path, 0)
    _, sections = read_checkpoint_file(checkpoint_path(tmp_path, app.path, 0))
    assert "user/counter" in sections
    assert not any(k.startswith("user/other") for k in sections)
    counter["n"] = 0
    read_checkpoint(tmp_path, 0, app)
    assert counter["n"] == 3


def test_restore_into_app_with_extra_datum(tmp_path):
    app = build(DECAY)
    app.initialize(0.0)
    write_checkpoint(app, tmp_path, 0)
    other = build(DECAY)
    other.initialize(0.0)
    other.store.register("user/extra", lambda: np.zeros(1), lambda a: None)
    with pytest.raises(CheckpointError, match="user/extra"):
        read_checkpoint(tmp_path, 0, other)


def test_state_round_trip_field_by_field(tmp_path):
    app = build(DECAY)
    app.initialize(0.0)
    for _ in range(3):
        app.step(0.1)
    before = app.store.snapshot()
    write_checkpoint(app, tmp_path, 3)
    fresh = build(DECAY)
    fresh.initialize(0.0)
    read_checkpoint(tmp_path, 3, fresh)
    after = fresh.store.snapshot()
    assert before.keys() == after.keys()
    for k in before:
        assert before[k].tobytes() == after[k].tobytes(), k
    assert fresh.problem.time.step == 3 and fresh.history == app.history


def test_two_checkpoints_coexist(tmp_path):
    app = build(DECAY)
    app.initialize(0.0)
    app.step(0.1)
    write_checkpoint(app, tmp_path, 1)
    app.step(0.1)
    write_checkpoint(app, tmp_path, 2)
    assert read_checkpoint_file(checkpoint_path(tmp_path, "main", 1))[0]["step"] == 1
    assert read_checkpoint_file(checkpoint_path(tmp_path, "main", 2))[0]["step"] == 2


def test_decay_recover_matches_uninterrupted(tmp_path):
    text = DECAY.replace("num_steps = 20\n", "num_steps = 20\n[]\n[Outputs]\n  checkpoint_interval = 10\n")
    full = build(text)
    full.run(output_dir=tmp_path / "full")
    part = build(text)
    part.run(output_dir=tmp_path / "part", halt_after_step=10)
    resumed = build(text)
    resumed.run(output_dir=tmp_path / "part", recover_step=10)
    assert np.abs(resumed.problem.u - full.problem.u).max() <= 1e-12
    assert resumed.problem.time.step == 20


def test_checkpoint_names_encode_path_and_step(tmp_path):
    example = example_copy(tmp_path / "in", num_steps=2, checkpoint_interval=1)
    app = load_input(example)
    app.run(output_dir=tmp_path / "out")
    names = sorted(p.name for p in (tmp_path / "out").glob("*.mmcp"))
    assert names == sorted(f"{node}_step{k}.mmcp" for k in (1, 2) for node in ["main"] + [f"main-micro{i}" for i in range(6)])
    assert all(re.fullmatch(r"main(-micro\d)?_step\d\.mmcp", n) for n in names)


@pytest.mark.slow
def test_coupled_recover_equivalence(tmp_path):
    full, resumed = coupled_recovery(tmp_path)
    assert np.abs(resumed.problem.u - full.problem.u).max() <= 1e-12
    for a, b in zip(full.walk(), resumed.walk()):
        name = a.outputs.file_base + "_out.csv"
        ca, ra = read_csv(tmp_path / "full" / name)
        cb, rb = read_csv(tmp_path / "part" / name)
        assert ca == cb and ra.shape == rb.shape
        after = ra[:, 0] > 2.5  # rows committed after the kill at parent step 10
        assert after.sum() >= 30
        assert np.abs(ra[after] - rb[after]).max() <= 1e-12
