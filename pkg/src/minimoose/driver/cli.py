"""``minimoose`` command line.

Exit codes: 0 success, 1 usage, 2 parse/validation/build, 3 solve failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from ..errors import CheckpointError, InputSyntaxError, MooseError, SolveError, ValidationError

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_SOLVE = 0, 1, 2, 3

log = logging.getLogger("minimoose")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def example_input() -> Path:
    return Path(__file__).resolve().parent.parent / "data" / "porous_flow" / "parent.i"


def _parser():
    p = _Parser(prog="minimoose", description="Run multiphysics finite-element simulations from input files.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(sp):
        sp.add_argument("-o", "--output-dir", default=".", help="directory for CSV, VTK and checkpoint files")
        sp.add_argument("--workers", type=int, default=1, help="assembly threads")
        sp.add_argument("-v", "--verbose", action="store_true", help="per-iteration solver output")
        sp.add_argument("--halt-after-step", type=int, default=None, help="stop after this step (testing restarts)")
        sp.add_argument("--recover", type=int, default=None, metavar="STEP", help="resume from a checkpoint")

    run = sub.add_parser("run", help="run a simulation")
    run.add_argument("-i", "--input", required=True)
    common(run)
    ex = sub.add_parser("example", help="run the packaged porous-flow example")
    common(ex)
    ps = sub.add_parser("presplit", help="partition the mesh into per-part files")
    ps.add_argument("-i", "--input", required=True)
    ps.add_argument("--parts", type=int, required=True)
    ps.add_argument("--layers", type=int, default=1, help="ghost layers")
    ps.add_argument("-o", "--output-dir", required=True)
    ck = sub.add_parser("check", help="validate an input file without running it")
    ck.add_argument("-i", "--input", required=True)
    return p


def _setup_logging(verbose: bool):
    handler = logging.StreamHandler(sys.stdout)
    handler.setFormatter(logging.Formatter("%(message)s"))
    root = logging.getLogger("minimoose")
    root.handlers[:] = [handler]
    root.setLevel(logging.DEBUG if verbose else logging.INFO)
    root.propagate = False


def _run(input_file, args) -> int:
    from ..input.builder import load_input

    if args.workers < 1:
        print("error: --workers must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    app = load_input(input_file)
    app.set_workers(args.workers)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if args.recover is not None:
        from ..restart import checkpoint_path

        if not checkpoint_path(out, app.path, args.recover).exists():
            print(f"error: no checkpoint for step {args.recover} in {out}", file=sys.stderr)
            return EXIT_USAGE
    start = time.perf_counter()
    app.run(out, halt_after_step=args.halt_after_step, recover_step=args.recover)
    state = "halted" if app.halted else "steady state" if app.steady_state_reached else "done"
    log.info("%s: %s at t=%g after %d steps (%.2f s)", app.path, state, app.problem.time.t,
             app.problem.time.step, time.perf_counter() - start)
    return EXIT_OK


def _presplit(args) -> int:
    from ..input.builder import mesh_from_spec, validate_spec
    from ..input.parser import parse_input
    from ..mesh import compute_ghosts, partition_mesh, write_presplit

    tree = parse_input(Path(args.input).read_text())
    diags = [d for d in validate_spec(tree) if d.path.split("/")[0] == "Mesh"]
    if tree.get("Mesh") is None or diags:
        raise ValidationError(diags or ["missing [Mesh] block"])
    mesh = mesh_from_spec(tree)
    if not 1 <= args.parts <= mesh.n_elements:
        print(f"error: --parts must lie in [1, {mesh.n_elements}]", file=sys.stderr)
        return EXIT_USAGE
    part = partition_mesh(mesh, args.parts)
    ghosts = compute_ghosts(mesh, part, args.layers)
    write_presplit(mesh, part, ghosts, args.output_dir)
    for p in range(args.parts):
        print(f"part {p}: owned {len(part.owned(p))} ghost {len(ghosts.ghost_elements[p])}")
    return EXIT_OK


def _check(args) -> int:
    from ..input.builder import check_input

    diags = check_input(args.input)
    for d in diags:
        print(d)
    if diags:
        return EXIT_INPUT
    print(f"{args.input}: ok")
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    _setup_logging(getattr(args, "verbose", False))
    try:
        if args.command == "run":
            return _run(args.input, args)
        if args.command == "example":
            return _run(example_input(), args)
        if args.command == "presplit":
            return _presplit(args)
        return _check(args)
    except SolveError as exc:
        print(f"solve failed: {exc}", file=sys.stderr)
        return EXIT_SOLVE
    except (InputSyntaxError, ValidationError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CheckpointError as exc:
        print(f"checkpoint error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (MooseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
