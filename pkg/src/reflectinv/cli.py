"""Batch front end.

    reflectinv fundamental   --system sys.json [--t-grid=-1:1:0.1] [--out table.csv]
    reflectinv invariant     --matrices mats.json --index 1,1 [--out value.json]
    reflectinv closure       --n 3 [--max-depth 6] [--out report.json]
    reflectinv complex-solve --system csys.json [--t-grid 0:1:0.1] [--h 1e-3] [--out table.csv]
    reflectinv verify        --suite all [--seed 42] [--trials 20] [--mode section45] [--tol T]

Exit status: 0 when every check passes, 1 when a residual exceeds its
tolerance, 2 for unusable input.
"""

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import closure, conjalg, invariants, reflection, verify
from .errors import ReflectInvError, SingularCoefficient

EXIT_OK, EXIT_FAILED, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Unusable input; the message names the file and the offending field."""


@dataclass
class TimeGrid:
    start: float
    stop: float
    step: float

    @classmethod
    def parse(cls, text):
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError:
            raise argparse.ArgumentTypeError(f"non-numeric grid {text!r}") from None
        if not step > 0:
            raise argparse.ArgumentTypeError("grid step must be positive")
        if stop < start:
            raise argparse.ArgumentTypeError("grid stop must not precede start")
        return cls(start, stop, step)

    def points(self):
        count = int(np.floor((self.stop - self.start) / self.step + 1e-9))
        return np.round(self.start + self.step * np.arange(count + 1), 12)


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _index(text):
    try:
        return tuple(int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


# input files


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InputError(f"{path}: file not found") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc.strerror})") from None


def _entry(value, where):
    if isinstance(value, bool):
        raise InputError(f"{where}: expected a number")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        return complex(value[0], value[1])
    raise InputError(f"{where}: expected a number or [re, im]")


def parse_matrix(obj, where):
    """Matrix from {"rows", "cols", "data"}; complex entries as [re, im]."""
    if not isinstance(obj, dict):
        raise InputError(f"{where}: expected an object with rows, cols, data")
    for key in ("rows", "cols", "data"):
        if key not in obj:
            raise InputError(f"{where}: field '{key}' missing")
    rows, cols, data = obj["rows"], obj["cols"], obj["data"]
    for key, v in (("rows", rows), ("cols", cols)):
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise InputError(f"{where}.{key}: expected a positive integer")
    if not isinstance(data, list) or len(data) != rows:
        raise InputError(f"{where}.data: expected {rows} rows")
    out = np.empty((rows, cols), dtype=complex)
    for i, row in enumerate(data):
        if not isinstance(row, list) or len(row) != cols:
            raise InputError(f"{where}.data[{i}]: expected {cols} entries")
        for j, v in enumerate(row):
            out[i, j] = _entry(v, f"{where}.data[{i}][{j}]")
    if not np.all(np.isfinite(out)):
        raise InputError(f"{where}.data: entries must be finite")
    return out


def _matrices_from(obj, path, names):
    if not isinstance(obj, dict):
        raise InputError(f"{path}: expected an object with fields {', '.join(names)}")
    mats = []
    for k in names:
        if k not in obj:
            raise InputError(f"{path}: field '{k}' missing")
        mats.append(parse_matrix(obj[k], f"{path}: {k}"))
    shape = mats[0].shape
    for k, m in zip(names, mats):
        if m.shape[0] != m.shape[1]:
            raise InputError(f"{path}: {k} must be square, got {m.shape}")
        if m.shape != shape:
            raise InputError(f"{path}: {k} has shape {m.shape}, expected {shape}")
    return mats


def load_reflection_system(path):
    mats = _matrices_from(_load_json(path), path, "FGAB")
    for k, m in zip("FGAB", mats):
        if np.any(m.imag != 0):
            raise InputError(f"{path}: {k} must be real")
    sys_ = reflection.ReflectionSystem(*(m.real for m in mats))
    try:
        sys_.operators
    except SingularCoefficient as exc:
        raise InputError(f"{path}: {exc.which} is singular") from None
    return sys_


def load_complex_system(path):
    a, b = _matrices_from(_load_json(path), path, "AB")
    return conjalg.ComplexSystem(a, b)


def load_matrix_list(path):
    obj = _load_json(path)
    if isinstance(obj, dict) and "matrices" in obj:
        obj = obj["matrices"]
        prefix = f"{path}: matrices"
    else:
        prefix = f"{path}: "
    if not isinstance(obj, list) or not obj:
        raise InputError(f"{path}: expected a non-empty array of matrices")
    mats = [parse_matrix(m, f"{prefix}[{i}]") for i, m in enumerate(obj)]
    n = mats[0].shape[0]
    for i, m in enumerate(mats):
        if m.shape != (n, n):
            raise InputError(f"{prefix}[{i}]: shape {m.shape}, expected {(n, n)}")
    if all(np.all(m.imag == 0) for m in mats):
        mats = [m.real for m in mats]
    return mats


# output


def _number(x):
    x = complex(x)
    return x.real if x.imag == 0 else [x.real, x.imag]


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError(f"{out}: cannot write ({exc.strerror})") from None


def _table(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def _entry_names(prefix, n):
    return [f"{prefix}_{i}_{j}" for i in range(n) for j in range(n)]


# commands


def cmd_fundamental(args):
    sys_ = load_reflection_system(args.system)
    n = sys_.n
    rows = []
    for t in args.t_grid.points():
        x, xp = reflection.fundamental_pair(sys_, t)
        rows.append([t, *x.ravel(), *xp.ravel()])
    _emit(_table(["t"] + _entry_names("X", n) + _entry_names("dX", n), rows), args.out)
    return EXIT_OK


def cmd_invariant(args):
    mats = load_matrix_list(args.matrices)
    if len(args.index) != len(mats):
        raise InputError(f"{args.matrices}: {len(mats)} matrices for an index of length {len(args.index)}")
    value = invariants.z_value(args.index, mats)
    report = {"index": list(args.index), "n": int(mats[0].shape[0]), "value": _number(value)}
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_closure(args):
    report = closure.explore(args.n, args.max_depth)
    _emit(report.to_json() + "\n", args.out)
    return EXIT_OK


def cmd_complex_solve(args):
    sys_ = load_complex_system(args.system)
    times = args.t_grid.points()
    if times[0] < 0:
        raise InputError("--t-grid: complex-solve integrates forward from t = 0; start must be >= 0")
    pair = conjalg.fundamental_pair_at(sys_, times, args.h)
    n = sys_.n
    header = ["t"]
    for name in ("X0", "X1"):
        for part in ("re", "im"):
            header += [f"{e}.{part}" for e in _entry_names(name, n)]
    rows = []
    for t, x0, x1 in zip(times, pair.x0, pair.x1):
        rows.append([t, *x0.real.ravel(), *x0.imag.ravel(), *x1.real.ravel(), *x1.imag.ravel()])
    _emit(_table(header, rows), args.out)
    return EXIT_OK


def cmd_verify(args):
    names = verify.SUITES if args.suite == "all" else (args.suite,)
    checks = verify.run_suites(names, seed=args.seed, trials=args.trials, mode=args.mode, tolerance=args.tol)
    failed = [c for c in checks if c.counts_as_failure()]
    report = {
        "suite": args.suite,
        "seed": args.seed,
        "trials": args.trials,
        "mode": args.mode,
        "rng": "numpy PCG64, stream (seed, suite position)",
        "checks": [c.to_dict() for c in checks],
        "worst_residual": {c.name: float(c.residual) for c in checks},
        "failed": [c.name for c in failed],
        "pass": not failed,
    }
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    if args.out is not None:
        for c in checks:
            status = "pass" if c.passed else ("known" if c.expected_failure else "FAIL")
            print(f"{status:5} {c.name}  {c.residual:.3e} <= {c.tolerance:.1e}", file=sys.stderr)
    return EXIT_FAILED if failed else EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="reflectinv", description="Reflection systems and crossed determinant invariants.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--out", metavar="PATH", help="output file (default: standard output)")
        p.set_defaults(func=func)
        return p

    p = add("fundamental", cmd_fundamental, "tabulate X(t) and X'(t) of a reflection system")
    p.add_argument("--system", required=True, metavar="PATH", help="JSON object with matrices F, G, A, B")
    p.add_argument("--t-grid", type=TimeGrid.parse, default=TimeGrid(-1.0, 1.0, 0.1), metavar="START:STOP:STEP")

    p = add("invariant", cmd_invariant, "crossed invariant Z_index of a list of matrices")
    p.add_argument("--matrices", required=True, metavar="PATH", help="JSON array of matrices")
    p.add_argument("--index", required=True, type=_index, metavar="a,b,c")

    p = add("closure", cmd_closure, "explore second derivatives of det X")
    p.add_argument("--n", required=True, type=_positive_int)
    p.add_argument("--max-depth", type=_positive_int, default=6)

    p = add("complex-solve", cmd_complex_solve, "fundamental pair of z' + A z + B conj(z) = 0")
    p.add_argument("--system", required=True, metavar="PATH", help="JSON object with complex matrices A, B")
    p.add_argument("--t-grid", type=TimeGrid.parse, default=TimeGrid(0.0, 1.0, 0.1), metavar="START:STOP:STEP")
    p.add_argument("--h", type=_positive_float, default=1e-3, help="RK4 step")

    p = add("verify", cmd_verify, "run seeded property suites")
    p.add_argument("--suite", required=True, choices=verify.SUITES + ("all",))
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--trials", type=_positive_int, default=20)
    p.add_argument("--mode", choices=reflection.AJL_MODES, default="section45")
    p.add_argument("--tol", type=_positive_float, default=None, help="override every tolerance")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"reflectinv: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ReflectInvError, ValueError) as exc:
        print(f"reflectinv: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
