"""Batch command-line interface.

Four subcommands: ``gen`` (seeded tower generation), ``check`` (named
verification suites), ``flow`` (conservation tables along exact flows)
and ``orbit`` (abelian-action orbit reports).  Reports are deterministic
given (seed, flags) and embed the tool version, seed, RNG algorithm and
tolerances.  Exit codes are a stable contract:

0 pass, 1 fail, 2 generation failure, 3 indeterminate/not-applicable,
64 usage error, 65 malformed input data.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import __version__
from .action import (
    a_act,
    a_act_stepwise,
    flow,
    params_from_json,
    random_params,
)
from .gz import GZIndex, gz_eval, gz_fn, gz_indices, poisson_bracket
from .matcore import Tolerance, rank_eps
from .regularity import joint_commutant_kernel, sreg_report
from .symplectic import (
    anchor,
    hamiltonian_orbit_tangent,
    lagrangian_check,
    match_residual,
    omega_inf,
)
from .tower import (
    RNG_ALGORITHM,
    GenerationError,
    Tower,
    random_entries,
    random_theta_tower,
    tower_from_json,
    tower_to_json,
)

TOOL_NAME = "gztower"

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_GENERATION = 2
EXIT_INDETERMINATE = 3
EXIT_USAGE = 64
EXIT_DATA = 65

DEFAULT_T_GRID = (-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0)
# Residual tolerances for identity-style checks (drift, commutativity,
# bracket/form consistency) and for the exact gluing identity.
DRIFT_RTOL = 1e-8
MATCH_RTOL = 1e-12
CORNER_RTOL = 1e-12


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D102 - argparse hook
        raise _UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration shared by the subcommands.

    Suite names are validated against the check registry when the config
    is built, so unknown names are rejected before any work starts.
    """

    seed: int
    tolerance: Tolerance
    suite: tuple[str, ...]
    out: Optional[str] = None
    format: str = "json"
    depth: Optional[int] = None

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        return cls(
            seed=_resolve_seed(args.seed),
            tolerance=Tolerance(rel=args.tol_rel, abs=args.tol_abs),
            suite=tuple(_parse_suite(getattr(args, "suite", None))),
            out=getattr(args, "out", None),
            format=getattr(args, "format", "json"),
            depth=getattr(args, "depth", None),
        )


@dataclass
class CheckResult:
    name: str
    property: str
    passed: str  # "true" | "false" | "indeterminate"
    details: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "property": self.property,
            "passed": self.passed,
            "details": self.details,
        }


def _tri(ok: bool) -> str:
    return "true" if ok else "false"


def _norm2(M: np.ndarray) -> float:
    return float(np.linalg.norm(M, 2))


def _check_commute(T: Tower, tol: Tolerance, seed: int) -> CheckResult:
    idxs = gz_indices(T.depth)
    fns = {idx: gz_fn(idx) for idx in idxs}
    worst = 0.0
    worst_pair = None
    for a in range(len(idxs)):
        for b in range(a + 1, len(idxs)):
            i1, i2 = idxs[a], idxs[b]
            n = max(i1.i, i2.i)
            bound = 1.0 + _norm2(T.level(n)) ** (i1.i + i2.i)
            ratio = abs(poisson_bracket(fns[i1], fns[i2], T)) / bound
            if ratio > worst:
                worst, worst_pair = ratio, (f"f[{i1.i},{i1.j}]", f"f[{i2.i},{i2.j}]")
    return CheckResult(
        name="commute",
        property="observable-family-poisson-commutativity",
        passed=_tri(worst <= DRIFT_RTOL),
        details={
            "max_bracket_ratio": worst,
            "worst_pair": list(worst_pair) if worst_pair else None,
            "pairs": len(idxs) * (len(idxs) - 1) // 2,
            "rtol": DRIFT_RTOL,
        },
    )


def _check_conserve(T: Tower, tol: Tolerance, seed: int) -> CheckResult:
    N = T.depth
    if N < 2:
        return CheckResult(
            name="conserve",
            property="flow-conservation",
            passed="true",
            details={"note": "no flow directions at depth 1"},
        )
    base = {idx: gz_eval(T, idx) for idx in gz_indices(N)}
    worst_drift = 0.0
    worst_corner = 0.0
    # Conjugator condition bound: kappa(exp(tP)) <= exp(2|t| ||P||), so the
    # best drift double precision can certify is about eps * kappa.
    worst_kappa_log = 0.0
    flow_failed = False
    for idx in gz_indices(N, max_i=N - 1):
        corner_scale = 1.0 + float(np.abs(T.level(idx.i)).max())
        P = idx.j * np.linalg.matrix_power(T.level(idx.i), idx.j - 1)
        pnorm = float(np.linalg.norm(P, 2))
        for t in DEFAULT_T_GRID:
            worst_kappa_log = max(worst_kappa_log, 2.0 * abs(t) * pnorm)
            try:
                flowed = flow(T, idx, t)
            except (OverflowError, np.linalg.LinAlgError):
                flow_failed = True
                continue
            for k, v in base.items():
                drift = abs(gz_eval(flowed, k) - v) / (1.0 + abs(v))
                worst_drift = max(worst_drift, drift)
            corner_res = float(
                np.abs(flowed.level(idx.i) - T.level(idx.i)).max()
            ) / corner_scale
            worst_corner = max(worst_corner, corner_res)
    ok = not flow_failed and worst_drift <= DRIFT_RTOL and worst_corner <= CORNER_RTOL
    achievable = np.finfo(float).eps * float(np.exp(min(worst_kappa_log, 700.0)))
    details = {
        "max_relative_drift": worst_drift,
        "max_corner_residual": worst_corner,
        "t_grid": list(DEFAULT_T_GRID),
        "drift_rtol": DRIFT_RTOL,
        "corner_rtol": CORNER_RTOL,
        "conditioning_floor": achievable,
    }
    if ok:
        passed = "true"
    elif achievable > DRIFT_RTOL or flow_failed:
        # The identity cannot be certified at this tolerance in double
        # precision for a tower of this scale; that is a conditioning
        # statement, not a conservation failure.
        passed = "indeterminate"
        details["note"] = (
            "flow conjugators too ill-conditioned for the drift tolerance; "
            "regenerate the tower at a smaller scale"
        )
    else:
        passed = "false"
    return CheckResult(
        name="conserve",
        property="flow-conservation",
        passed=passed,
        details=details,
    )


def _check_sreg(T: Tower, tol: Tolerance, seed: int) -> CheckResult:
    report = sreg_report(T, tol)
    passed = report.verdict if report.verdict in ("true", "false") else "indeterminate"
    return CheckResult(
        name="sreg",
        property="strong-regularity-criteria",
        passed=passed,
        details=report.to_json_dict(),
    )


def _check_lagrangian(T: Tower, tol: Tolerance, seed: int) -> CheckResult:
    report = lagrangian_check(T, tol)
    if report.verdict == "true":
        passed = "true"
    elif report.verdict == "false":
        passed = "false"
    else:
        passed = "indeterminate"
    return CheckResult(
        name="lagrangian",
        property="abelian-orbit-lagrangian-structure",
        passed=passed,
        details=report.to_json_dict(),
    )


def _check_match(T: Tower, tol: Tolerance, seed: int, draws: int = 200) -> CheckResult:
    N = T.depth
    if N < 2:
        return CheckResult(
            name="match",
            property="level-gluing-consistency",
            passed="true",
            details={"note": "gluing needs two levels"},
        )
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(1,))))
    worst = 0.0
    for _ in range(draws):
        n = int(rng.integers(1, N))
        Z1 = random_entries(rng, (n, n), 1.0)
        Z2 = random_entries(rng, (n, n), 1.0)
        scale = 1.0 + _norm2(T.level(n + 1)) * _norm2(Z1) * _norm2(Z2)
        worst = max(worst, match_residual(T, Z1, Z2, n) / scale)
    return CheckResult(
        name="match",
        property="level-gluing-consistency",
        passed=_tri(worst <= MATCH_RTOL),
        details={"draws": draws, "max_residual_ratio": worst, "rtol": MATCH_RTOL},
    )


def _check_consistent(T: Tower, tol: Tolerance, seed: int) -> CheckResult:
    idxs = gz_indices(T.depth)
    fns = {idx: gz_fn(idx) for idx in idxs}
    worst = 0.0
    for a in range(len(idxs)):
        for b in range(a, len(idxs)):
            i1, i2 = idxs[a], idxs[b]
            n = max(i1.i, i2.i)
            bound = 1.0 + _norm2(T.level(n)) ** (i1.i + i2.i)
            bracket = poisson_bracket(fns[i1], fns[i2], T)
            form = omega_inf(
                T,
                hamiltonian_orbit_tangent(T, i1),
                hamiltonian_orbit_tangent(T, i2),
            )
            worst = max(worst, abs(bracket - form) / bound)
    return CheckResult(
        name="consistent",
        property="bracket-form-consistency",
        passed=_tri(worst <= DRIFT_RTOL),
        details={"max_mismatch_ratio": worst, "rtol": DRIFT_RTOL},
    )


def _check_anchor(T: Tower, tol: Tolerance, seed: int) -> CheckResult:
    N = T.depth
    g_values = []
    anchor_values = []
    unit_template = np.zeros((N, N), dtype=np.complex128)
    for k in range(N):
        for l in range(N):
            unit = unit_template.copy()
            unit[k, l] = 1.0
            g_values.append(-(unit @ T.top - T.top @ unit))
            anchor_values.append(anchor(T, unit).value(T, N))
    path_gap = max(
        float(np.abs(a - b).max()) for a, b in zip(anchor_values, g_values)
    )
    rank_g = rank_eps(g_values, tol)
    rank_anchor = rank_eps(anchor_values, tol)
    inclusion_ok = True
    for n in range(1, N):
        sub = []
        for k in range(n):
            for l in range(n):
                u = np.zeros((n, n), dtype=np.complex128)
                u[k, l] = 1.0
                sub.append(anchor(T, u).value(T, N))
        if rank_eps(sub + g_values, tol) != rank_g:
            inclusion_ok = False
            break
    details = {
        "rank_anchor_family": rank_anchor,
        "rank_orbit_family": rank_g,
        "max_pathwise_gap": path_gap,
        "shallow_families_included": inclusion_ok,
    }
    sreg = sreg_report(T, tol)
    if sreg.verdict == "true" and N >= 2:
        kernels_trivial = all(
            len(joint_commutant_kernel(T, n, tol)) == 0 for n in range(1, N)
        )
        details["joint_kernels_trivial"] = kernels_trivial
    else:
        kernels_trivial = True
        details["joint_kernels_trivial"] = None
    ok = (
        rank_anchor == rank_g
        and path_gap == 0.0
        and inclusion_ok
        and kernels_trivial
    )
    return CheckResult(
        name="anchor",
        property="anchor-image-matches-orbit-tangents",
        passed=_tri(ok),
        details=details,
    )


CHECKS: dict[str, Callable[[Tower, Tolerance, int], CheckResult]] = {
    "commute": _check_commute,
    "conserve": _check_conserve,
    "sreg": _check_sreg,
    "lagrangian": _check_lagrangian,
    "match": _check_match,
    "consistent": _check_consistent,
    "anchor": _check_anchor,
}


def _report_envelope(command: str, seed: int, tol: Tolerance, source: str) -> dict:
    return {
        "tool": TOOL_NAME,
        "version": __version__,
        "command": command,
        "seed": seed,
        "rng": {"algorithm": RNG_ALGORITHM},
        "tolerance": {"rel": tol.rel, "abs": tol.abs},
        "input": source,
    }


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".gz-tmp-")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump_json(data: dict) -> str:
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def _format_complex(z: complex) -> str:
    return f"{z.real:.17g}{z.imag:+.17g}i"


def _resolve_seed(flag_value: Optional[int]) -> int:
    # Documented precedence: flag > GZ_SEED environment variable > 0.
    if flag_value is not None:
        return flag_value
    env = os.environ.get("GZ_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise _UsageError(f"GZ_SEED must be an integer, got {env!r}") from exc
    return 0


def _load_tower(path: str) -> Tower:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return tower_from_json(handle.read())
    except OSError as exc:
        raise _DataError(f"cannot read tower file {path}: {exc}") from exc
    except ValueError as exc:
        raise _DataError(f"malformed tower file {path}: {exc}") from exc


class _DataError(Exception):
    pass


def _parse_suite(raw: Optional[list[str]]) -> list[str]:
    if not raw:
        return list(CHECKS)
    names: list[str] = []
    for chunk in raw:
        names.extend(s.strip() for s in chunk.split(",") if s.strip())
    for name in names:
        if name not in CHECKS:
            raise _UsageError(
                f"unknown check {name!r}; available: {', '.join(CHECKS)}"
            )
    return names


def cmd_gen(args: argparse.Namespace) -> int:
    config = RunConfig.from_args(args)
    try:
        T = random_theta_tower(config.depth, config.seed, args.scale, config.tolerance)
    except GenerationError as exc:
        print(f"generation failed: {exc}", file=sys.stderr)
        return EXIT_GENERATION
    _write_atomic(config.out, tower_to_json(T) + "\n")
    report = sreg_report(T, config.tolerance)
    print(
        f"depth={T.depth} seed={config.seed} scale={args.scale} "
        f"sreg={report.verdict} theta={'true' if report.theta else 'false'} -> {config.out}"
    )
    return EXIT_PASS


def cmd_check(args: argparse.Namespace) -> int:
    config = RunConfig.from_args(args)
    suite = list(config.suite)
    T = _load_tower(args.tower)

    # Checks are independent; run them concurrently and join in suite order.
    with ThreadPoolExecutor(max_workers=min(len(suite), 4)) as pool:
        futures = {
            name: pool.submit(CHECKS[name], T, config.tolerance, config.seed)
            for name in suite
        }
        results = [futures[name].result() for name in suite]

    report = _report_envelope("check", config.seed, config.tolerance, args.tower)
    report["suite"] = suite
    report["checks"] = [r.to_json_dict() for r in results]
    text = _dump_json(report)
    if config.out:
        _write_atomic(config.out, text)
    else:
        sys.stdout.write(text)
    for r in results:
        print(f"[{r.passed}] {r.name}")
    if any(r.passed == "false" for r in results):
        return EXIT_FAIL
    if any(r.passed == "indeterminate" for r in results):
        return EXIT_INDETERMINATE
    return EXIT_PASS


def _flow_table(T: Tower, idx: GZIndex, grid: list[float]) -> tuple[list, dict]:
    idxs = gz_indices(T.depth)
    base = {k: gz_eval(T, k) for k in idxs}
    rows = []
    drift = {k: 0.0 for k in idxs}
    for t in grid:
        flowed = flow(T, idx, t)
        values = {k: gz_eval(flowed, k) for k in idxs}
        rows.append((t, values))
        for k in idxs:
            rel = abs(values[k] - base[k]) / (1.0 + abs(base[k]))
            drift[k] = max(drift[k], rel)
    return rows, drift


def cmd_flow(args: argparse.Namespace) -> int:
    config = RunConfig.from_args(args)
    seed, tol = config.seed, config.tolerance
    T = _load_tower(args.tower)
    try:
        idx = GZIndex(args.i, args.j)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    if idx.i > T.depth:
        raise _UsageError(f"index level {idx.i} exceeds tower depth {T.depth}")
    grid = args.t_grid
    try:
        rows, drift = _flow_table(T, idx, grid)
    except (OverflowError, np.linalg.LinAlgError) as exc:
        print(f"flow not computable in double precision: {exc}", file=sys.stderr)
        return EXIT_INDETERMINATE
    idxs = gz_indices(T.depth)
    names = [f"f[{k.i},{k.j}]" for k in idxs]
    max_drift = max(drift.values())
    passed = max_drift <= args.drift_tol

    if config.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
        writer.writerow(["t"] + names)
        for t, values in rows:
            writer.writerow([f"{t:.17g}"] + [_format_complex(values[k]) for k in idxs])
        writer.writerow([])
        writer.writerow(["max_relative_drift"] + [f"{drift[k]:.17g}" for k in idxs])
        text = buf.getvalue()
    else:
        report = _report_envelope("flow", seed, tol, args.tower)
        report.update(
            {
                "i": idx.i,
                "j": idx.j,
                "t_grid": grid,
                "functions": names,
                "values": [
                    {
                        "t": t,
                        "f": [[values[k].real, values[k].imag] for k in idxs],
                    }
                    for t, values in rows
                ],
                "max_relative_drift": {n: drift[k] for n, k in zip(names, idxs)},
                "drift_tol": args.drift_tol,
                "passed": passed,
            }
        )
        text = _dump_json(report)
    if config.out:
        _write_atomic(config.out, text)
    else:
        sys.stdout.write(text)

    if args.emit_plot_data:
        buf = io.StringIO()
        writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
        writer.writerow(["t"] + [f"abs({n})" for n in names])
        for t, values in rows:
            writer.writerow([f"{t:.17g}"] + [f"{abs(values[k]):.17g}" for k in idxs])
        _write_atomic(args.emit_plot_data, buf.getvalue())

    print(f"max relative drift {max_drift:.3e} over t grid {grid}")
    return EXIT_PASS if passed else EXIT_FAIL


def cmd_orbit(args: argparse.Namespace) -> int:
    config = RunConfig.from_args(args)
    seed, tol = config.seed, config.tolerance
    T = _load_tower(args.tower)

    if args.params:
        try:
            with open(args.params, "r", encoding="utf-8") as handle:
                samples = [params_from_json(handle.read())]
        except OSError as exc:
            raise _DataError(f"cannot read params file {args.params}: {exc}") from exc
        except ValueError as exc:
            raise _DataError(f"malformed params file {args.params}: {exc}") from exc
        for a in samples:
            if a.n > T.depth + 1:
                raise _DataError(
                    f"params level {a.n} too deep for tower depth {T.depth}"
                )
    else:
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(2,)))
        )
        samples = [
            random_params(rng, T.depth, args.param_scale) for _ in range(args.samples)
        ]

    idxs = gz_indices(T.depth)
    worst_drift = 0.0
    worst_perm = 0.0
    try:
        acted_samples = [(a, a_act(a, T)) for a in samples]
    except (OverflowError, np.linalg.LinAlgError) as exc:
        print(f"action not computable in double precision: {exc}", file=sys.stderr)
        return EXIT_INDETERMINATE
    for a, acted in acted_samples:
        for k in idxs:
            bound = 1.0 + _norm2(T.level(k.i)) ** k.i
            worst_drift = max(
                worst_drift, abs(gz_eval(acted, k) - gz_eval(T, k)) / bound
            )
        if args.permute_factors and a.n >= 3:
            rng_perm = np.random.Generator(
                np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(3,)))
            )
            order = gz_indices(a.n - 1)
            perm = [order[int(i)] for i in rng_perm.permutation(len(order))]
            permuted = a_act_stepwise(a, T, perm)
            scale = 1.0 + float(np.abs(acted.top).max())
            worst_perm = max(
                worst_perm, float(np.abs(permuted.top - acted.top).max()) / scale
            )

    lag = lagrangian_check(T, tol)
    invariance_ok = worst_drift <= DRIFT_RTOL
    permute_ok = (not args.permute_factors) or worst_perm <= DRIFT_RTOL

    report = _report_envelope("orbit", seed, tol, args.tower)
    report.update(
        {
            "samples": len(samples),
            "max_observable_drift": worst_drift,
            "observable_invariance_ok": invariance_ok,
            "permuted_application_gap": worst_perm if args.permute_factors else None,
            "lagrangian": lag.to_json_dict(),
        }
    )
    text = _dump_json(report)
    if config.out:
        _write_atomic(config.out, text)
    else:
        sys.stdout.write(text)
    print(
        f"observable drift {worst_drift:.3e}; lagrangian verdict: {lag.verdict}"
    )
    if not invariance_ok or lag.verdict == "false" or not permute_ok:
        return EXIT_FAIL
    if lag.verdict == "not applicable":
        return EXIT_INDETERMINATE
    return EXIT_PASS


def _build_parser() -> _Parser:
    parser = _Parser(prog="gz", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: _Parser) -> None:
        p.add_argument("--seed", type=int, default=None, help="RNG seed (default: GZ_SEED or 0)")
        p.add_argument("--tol-rel", type=float, default=1e-9, help="relative rank tolerance")
        p.add_argument("--tol-abs", type=float, default=1e-12, help="absolute rank tolerance")

    g = sub.add_parser("gen", help="generate a spectrum-disjoint random tower")
    common(g)
    g.add_argument("--depth", type=int, required=True)
    g.add_argument(
        "--scale",
        type=float,
        default=0.5,
        help="entry magnitude bound; <= 0.5 keeps depth-6 flows well-conditioned, "
        "use ~0.3 beyond depth 6",
    )
    g.add_argument("--out", "-o", required=True)
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("check", help="run verification suites on a tower file")
    common(c)
    c.add_argument("tower")
    c.add_argument(
        "--suite",
        action="append",
        help=f"comma-separated check names (default: all of {', '.join(CHECKS)})",
    )
    c.add_argument("--out", "-o", default=None)
    c.set_defaults(func=cmd_check)

    f = sub.add_parser("flow", help="conservation table along one exact flow")
    common(f)
    f.add_argument("tower")
    f.add_argument("--i", type=int, required=True)
    f.add_argument("--j", type=int, required=True)
    f.add_argument(
        "--t-grid",
        type=lambda s: [float(x) for x in s.split(",")],
        default=list(DEFAULT_T_GRID),
    )
    f.add_argument("--drift-tol", type=float, default=DRIFT_RTOL)
    f.add_argument("--format", choices=("json", "csv"), default="json")
    f.add_argument("--out", "-o", default=None)
    f.add_argument("--emit-plot-data", default=None, help="write |f| series CSV here")
    f.set_defaults(func=cmd_flow)

    o = sub.add_parser("orbit", help="abelian-action orbit report")
    common(o)
    o.add_argument("tower")
    o.add_argument("--params", default=None, help="JSON parameter file (default: random)")
    o.add_argument("--samples", type=int, default=3)
    o.add_argument("--param-scale", type=float, default=0.3)
    o.add_argument(
        "--permute-factors",
        action="store_true",
        help="also apply parameters one at a time in a shuffled order and report the gap",
    )
    o.add_argument("--out", "-o", default=None)
    o.set_defaults(func=cmd_orbit)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


def entry() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    entry()
