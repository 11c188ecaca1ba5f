"""Command-line surface: solve problems, dump kernel data, run the
verification suite.

Exit codes: 0 success, 1 malformed input, 2 certificate failure without
--uncertified, 3 non-convergence, 4 verification-suite failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .exprparse import ParseError, parse
from .fcontraction import CATALOG_IDS, control_catalog, verify_control_class, verify_wardowski
from .kernel import (
    GreenParams,
    green_eval,
    green_weight_integral,
    green_weight_integral_max,
    origin_continuity_bound,
)
from .quadrature import integrate_green, jacobi_rule
from .solver import (
    G_CATALOG_IDS,
    NonConvergenceError,
    ProblemSpec,
    certify_contraction,
    check_positivity,
    grunwald_letnikov_residual,
    solve,
)
from .specfun import beta

EXIT_OK = 0
EXIT_BAD_INPUT = 1
EXIT_CERTIFICATE = 2
EXIT_NO_CONVERGENCE = 3
EXIT_VERIFY_FAILED = 4

SWEEP_ALPHAS = (3.01, 3.5, 4.0)
SWEEP_SIGMAS = (0.1, 0.5, 0.9)

_PROBLEM_KEYS = {
    "alpha",
    "sigma",
    "g",
    "lambda",
    "tau",
    "grid_points",
    "quad_points",
    "tol",
    "max_iters",
    # optional extensions
    "enforce_cone",
    "u_max",
}


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _write_csv(path: Path, header: str, rows) -> None:
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_problem_file(path: str) -> dict:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("problem file must contain a JSON object")
    unknown = set(data) - _PROBLEM_KEYS
    if unknown:
        raise ValueError(f"unknown problem keys: {sorted(unknown)}")
    return data


def _build_spec(args) -> ProblemSpec:
    data: dict = {}
    if args.problem:
        data = _load_problem_file(args.problem)
    overrides = {
        "alpha": args.alpha,
        "sigma": args.sigma,
        "g": args.g,
        "lambda": getattr(args, "lam"),
        "tau": args.tau,
        "tol": args.tol,
        "grid_points": args.grid,
        "quad_points": args.quad,
        "max_iters": args.max_iters,
        "u_max": args.umax,
    }
    for key, val in overrides.items():
        if val is not None:
            data[key] = val
    if args.allow_signed_g:
        data["enforce_cone"] = False
    missing = [k for k in ("alpha", "sigma", "g", "lambda", "tau") if k not in data]
    if missing:
        raise ValueError(f"missing problem fields: {missing} (supply a file or flags)")
    g_text = data["g"]
    if isinstance(g_text, str) and g_text not in G_CATALOG_IDS:
        parse(g_text)  # surface syntax errors with their offset before any work
    return ProblemSpec(
        params=GreenParams(float(data["alpha"]), float(data["sigma"])),
        g=g_text,
        lambda_claim=float(data["lambda"]),
        tau=float(data["tau"]),
        quad_points=int(data.get("quad_points", 48)),
        grid_points=int(data.get("grid_points", 33)),
        tol=float(data.get("tol", 1e-10)),
        max_iters=int(data.get("max_iters", 200)),
        u_max=float(data.get("u_max", 10.0)),
        enforce_cone=bool(data.get("enforce_cone", True)),
    )


def cmd_solve(args) -> int:
    try:
        spec = _build_spec(args)
    except ParseError as exc:
        print(f"error: invalid expression: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (OSError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    certificate = certify_contraction(spec, seed=args.seed)
    _write_json(out / "certificate.json", certificate.to_dict())
    if not certificate.passed and not args.uncertified:
        print(
            f"certificate failed (lambda_observed={certificate.lambda_observed:.6g}, "
            f"lambda_claim*N={certificate.lambda_claim * certificate.N:.6g}); "
            "rerun with --uncertified to iterate anyway",
            file=sys.stderr,
        )
        return EXIT_CERTIFICATE

    try:
        result = solve(spec, uncertified=True)
    except NonConvergenceError as exc:
        _write_csv(
            out / "trace.csv", "iter,delta", [(i + 1, d) for i, d in enumerate(exc.trace)]
        )
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE

    u = result.u
    _write_csv(out / "solution.csv", "t,u", zip(u.nodes, u.values))
    _write_csv(out / "trace.csv", "iter,delta", [(i + 1, d) for i, d in enumerate(result.trace)])
    report = check_positivity(spec, u, seed=args.seed)
    _write_json(out / "positivity.json", report.to_dict())
    profile = grunwald_letnikov_residual(spec, u, args.h)
    _write_csv(out / "residual.csv", "t,residual", zip(profile.checkpoints, profile.residuals))
    if args.format == "json":
        _write_json(out / "solution.json", {"t": list(u.nodes), "u": list(u.values)})
        _write_json(out / "trace.json", {"delta": list(result.trace)})
        _write_json(
            out / "residual.json",
            {"t": list(profile.checkpoints), "residual": list(profile.residuals)},
        )
    print(
        f"converged in {result.iterations} sweeps; "
        f"certificate {certificate.verdict}; positivity: {report.verdict}"
    )
    return EXIT_OK


def cmd_kernel(args) -> int:
    try:
        params = GreenParams(args.alpha, args.sigma)
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    m = args.grid
    if m < 2:
        print("error: --grid must be at least 2", file=sys.stderr)
        return EXIT_BAD_INPUT
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ts = np.linspace(0.0, 1.0, m)
    rows = []
    for t in ts:
        gv = green_eval(params, np.full(m, t), ts)
        rows.extend((t, s, g) for s, g in zip(ts, gv))
    _write_csv(out / "green.csv", "t,s,G", rows)
    one = lambda s: np.ones_like(np.asarray(s, dtype=float))
    _write_csv(
        out / "L.csv",
        "t,L_closed,L_quad",
        (
            (t, green_weight_integral(params, float(t)), integrate_green(params, float(t), one, args.quad))
            for t in ts
        ),
    )
    n_value, t_star = green_weight_integral_max(params)
    print(f"N = {_fmt(n_value)} at t_star = {_fmt(t_star)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verification suite


class _Check:
    def __init__(self, name: str, metric: float, tolerance: float, passed: bool | None = None):
        self.name = name
        self.metric = float(metric)
        self.tolerance = float(tolerance)
        self.passed = bool(metric <= tolerance) if passed is None else passed

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "metric": self.metric,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def _perturbed_green(params: GreenParams, perturb: float):
    """Pointwise kernel evaluations used by the sampled kernel checks;
    the fault-injection hook adds a sign-varying perturbation."""

    def geval(t, s):
        g = green_eval(params, t, s)
        if perturb:
            g = g + perturb * np.sin(73.0 * np.asarray(t) * np.asarray(s) + 1.0)
        return g

    return geval


def _kernel_checks(alpha: float, seed: int, perturb: float) -> list[_Check]:
    params = GreenParams(alpha, 0.5)  # G does not depend on sigma
    geval = _perturbed_green(params, perturb)
    rng = np.random.default_rng([seed, int(alpha * 100)])
    t = rng.uniform(0.0, 1.0, size=100_000)
    s = rng.uniform(0.0, 1.0, size=100_000)
    interior = (t > 0) & (t < 1) & (s > 0) & (s < 1)
    gmin = float(np.min(geval(t[interior], s[interior])))
    checks = [
        _Check(f"kernel_positivity_alpha_{alpha:g}", -gmin, 0.0, passed=gmin > 0.0)
    ]
    ss = np.linspace(0.0, 1.0, 257)
    edge = max(
        float(np.max(np.abs(geval(np.zeros_like(ss), ss)))),
        float(np.max(np.abs(geval(np.ones_like(ss), ss)))),
    )
    checks.append(_Check(f"kernel_boundary_zero_alpha_{alpha:g}", edge, 0.0, passed=edge == 0.0))
    tk = rng.uniform(0.05, 0.95, size=64)
    eps = 1e-6
    jump = float(np.max(np.abs(geval(tk, tk - eps) - geval(tk, tk + eps))))
    checks.append(_Check(f"kernel_kink_continuity_alpha_{alpha:g}", jump, 1e-4))
    return checks


def _combo_checks(alpha: float, sigma: float, n: int = 48) -> list[_Check]:
    params = GreenParams(alpha, sigma)
    tag = f"alpha_{alpha:g}_sigma_{sigma:g}"
    one = lambda s: np.ones_like(np.asarray(s, dtype=float))
    ts = np.linspace(0.0, 1.0, 34)[1:-1]  # 32 interior points
    consist = max(
        abs(integrate_green(params, float(t), one, n) - green_weight_integral(params, float(t)))
        for t in ts
    )
    checks = [_Check(f"weight_integral_consistency_{tag}", consist, 1e-8)]
    ends = max(abs(green_weight_integral(params, 0.0)), abs(green_weight_integral(params, 1.0)))
    checks.append(_Check(f"weight_integral_boundary_{tag}", ends, 1e-12))
    fcos = lambda s: np.cos(np.asarray(s, dtype=float))
    split = max(
        abs(integrate_green(params, float(t), fcos, n) - integrate_green(params, float(t), fcos, 2 * n))
        for t in ts
    )
    checks.append(_Check(f"split_consistency_{tag}", split, 1e-9))
    # |H(t) - H(0)| dominated by the closed bound, for sampled bounded forcings
    worst = -math.inf
    for f_reg in (one, fcos, lambda s: 0.25 + np.asarray(s)):
        m_bound = float(np.max(np.abs(f_reg(np.linspace(0.0, 1.0, 2001)))))
        for t in ts[::4]:
            h_t = abs(integrate_green(params, float(t), f_reg, n))
            worst = max(worst, h_t - origin_continuity_bound(params, float(t), m_bound))
    checks.append(_Check(f"origin_bound_domination_{tag}", worst, 1e-12))
    return checks


def _beta_identity_checks(seed: int) -> list[_Check]:
    rng = np.random.default_rng([seed, 7])
    # sigma capped at 0.99: the identity residual scales like
    # Gamma(1-sigma) * eps, so closer to 1 an absolute 1e-12 stops being
    # representable in doubles
    sg = rng.uniform(0.01, 0.99, size=1000)
    al = rng.uniform(3.0, 4.0, size=1000)
    e1 = e2 = 0.0
    for s, a in zip(sg, al):
        b_base = beta(1.0 - s, a - 1.0)
        e1 = max(e1, abs(beta(1.0 - s, a) - (a - 1.0) / (a - s) * b_base))
        e2 = max(e2, abs(beta(2.0 - s, a - 1.0) - (1.0 - s) / (a - s) * b_base))
    checks = [
        _Check("beta_identity_order_raise", e1, 1e-12),
        _Check("beta_identity_first_arg_shift", e2, 1e-12),
    ]
    x = rng.uniform(0.05, 20.0, size=500)
    y = rng.uniform(0.05, 20.0, size=500)
    sym = max(abs(beta(a, b) - beta(b, a)) / beta(a, b) for a, b in zip(x, y))
    checks.append(_Check("beta_symmetry", sym, 1e-13))
    return checks


def _quadrature_checks() -> list[_Check]:
    checks = []
    for sigma in SWEEP_SIGMAS:
        worst = 0.0
        for n in (1, 4, 8, 48):
            rule = jacobi_rule(n, sigma)
            ks = np.arange(0, 2 * n)
            moments = np.array([float(np.dot(rule.weights, rule.nodes**k)) for k in ks])
            worst = max(worst, float(np.max(np.abs(moments - 1.0 / (ks + 1 - sigma)))))
        checks.append(_Check(f"jacobi_moments_sigma_{sigma:g}", worst, 1e-12))
    return checks


def _contraction_checks() -> list[_Check]:
    checks = []
    ok = all(verify_control_class(control_catalog(cid)).passed for cid in CATALOG_IDS)
    checks.append(_Check("control_catalog_membership", 0.0 if ok else 1.0, 0.0, passed=ok))
    identity_rep = verify_wardowski(
        [0.0, 1.0], lambda x: x, lambda x, y: abs(x - y), tau=0.5, phi=control_catalog("neg_inv_sqrt")
    )
    flagged = not identity_rep.passed
    checks.append(
        _Check("wardowski_flags_identity_map", 0.0 if flagged else 1.0, 0.0, passed=flagged)
    )
    return checks


def run_verify_suite(seed: int = 0, perturb_kernel: float = 0.0, threads: int | None = None) -> dict:
    """Run every invariant check across the built-in parameter sweep."""
    if threads is None:
        threads = int(os.environ.get("FRAK_SOLVE_THREADS", "1") or "1")
    threads = max(1, threads)
    checks: list[_Check] = []
    for alpha in SWEEP_ALPHAS:
        checks.extend(_kernel_checks(alpha, seed, perturb_kernel))
    combos = [(a, s) for a in SWEEP_ALPHAS for s in SWEEP_SIGMAS]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for result in pool.map(lambda c: _combo_checks(*c), combos):
                checks.extend(result)
    else:
        for combo in combos:
            checks.extend(_combo_checks(*combo))
    checks.extend(_beta_identity_checks(seed))
    checks.extend(_quadrature_checks())
    checks.extend(_contraction_checks())
    return {
        "seed": seed,
        "perturb_kernel": perturb_kernel,
        "checks": [c.to_dict() for c in checks],
        "passed": all(c.passed for c in checks),
    }


def cmd_verify(args) -> int:
    report = run_verify_suite(seed=args.seed, perturb_kernel=args.perturb_kernel)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "verify.json", report)
    n_fail = sum(not c["passed"] for c in report["checks"])
    print(f"{len(report['checks'])} checks, {n_fail} failed -> {out / 'verify.json'}")
    return EXIT_OK if report["passed"] else EXIT_VERIFY_FAILED


def _add_solve_parser(sub) -> None:
    sp = sub.add_parser("solve", help="solve a problem and write solution artifacts")
    sp.add_argument("problem", nargs="?", help="JSON problem file; flags override its values")
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--sigma", type=float)
    sp.add_argument("--g", help="regularized nonlinearity g(t,u), an expression in t and u")
    sp.add_argument("--lambda", dest="lam", type=float, help="claimed contraction constant")
    sp.add_argument("--tau", type=float)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--grid", type=int, help="collocation grid size")
    sp.add_argument("--quad", type=int, help="quadrature points per panel")
    sp.add_argument("--max-iters", type=int)
    sp.add_argument("--umax", type=float, help="certificate sampling range for u")
    sp.add_argument("--uncertified", action="store_true", help="iterate even if the certificate fails")
    sp.add_argument(
        "--allow-signed-g",
        action="store_true",
        help="permit sign-changing forcings (manufactured verification runs)",
    )
    sp.add_argument("--h", type=float, default=1e-3, help="residual oracle step")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=".", help="output directory")
    sp.add_argument("--format", choices=("csv", "json"), default="csv",
                    help="csv writes the contract files only; json adds JSON copies")
    sp.set_defaults(fn=cmd_solve)


def _add_kernel_parser(sub) -> None:
    kp = sub.add_parser("kernel", help="dump kernel values and the weighted-integral constant")
    kp.add_argument("--alpha", type=float, required=True)
    kp.add_argument("--sigma", type=float, required=True)
    kp.add_argument("--grid", type=int, default=33, help="grid resolution m (m x m kernel dump)")
    kp.add_argument("--quad", type=int, default=48)
    kp.add_argument("--out", default=".", help="output directory")
    kp.set_defaults(fn=cmd_kernel)


def _add_verify_parser(sub) -> None:
    vp = sub.add_parser("verify", help="run the full invariant suite")
    vp.add_argument("--seed", type=int, default=0)
    vp.add_argument(
        "--perturb-kernel",
        type=float,
        default=0.0,
        help="fault-injection test hook: add a sign-varying perturbation to sampled kernel values",
    )
    vp.add_argument("--out", default=".", help="output directory")
    vp.set_defaults(fn=cmd_verify)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="fraksolve",
        description="Solver and verification toolkit for the singular fractional "
        "clamped boundary value problem",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    _add_solve_parser(sub)
    _add_kernel_parser(sub)
    _add_verify_parser(sub)
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
