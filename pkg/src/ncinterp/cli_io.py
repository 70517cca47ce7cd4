"""Command line front end, tuple files, and verification suites.

Tuples travel as JSON with explicit real/imaginary pairs so files diff
cleanly and round-trip losslessly (Python float repr is shortest
round-trip).  Reports are plain dataclasses serialized the same way;
the exponent p = infinity is spelled "inf" in JSON to stay inside the
standard grammar.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import INF, MatrixTuple, check_exponent
from .errors import InputError, NCInterpError, UsageError
from .interp_oracle import optimize_candidate, oracle_lower, sandwich
from .pisier_op import corollary_check
from .szego import (
    BoundaryFunction,
    build_certificate,
    candidate_boundary_max,
    det_winding,
    wilson_factorize,
)
from .tuple_norms import column_norm, row_norm
from .variational import SolverConfig, alpha, derive_exponents, dual_norm_estimate

COMPUTE_METHODS = ("alpha", "oracle", "pisier", "certificate", "sandwich")
VERIFY_SUITES = ("duality", "sandwich", "corollary", "szego", "endpoints")
GEN_FAMILIES = ("gaussian", "psd", "unitary")


# ---------------------------------------------------------------------------
# tuple files


def tuple_to_payload(x: MatrixTuple) -> dict:
    entries = [
        [[[float(z.real), float(z.imag)] for z in row] for row in mat]
        for mat in x.mats
    ]
    return {"d": x.d, "n": x.n, "entries": entries}


def tuple_from_payload(obj: dict) -> MatrixTuple:
    if not isinstance(obj, dict):
        raise InputError("tuple payload must be a JSON object")
    for key in ("d", "n", "entries"):
        if key not in obj:
            raise InputError(f"tuple payload is missing the {key!r} field")
    d, n = int(obj["d"]), int(obj["n"])
    entries = obj["entries"]
    if len(entries) != n:
        raise InputError(f"expected {n} entries, found {len(entries)}")
    mats = np.zeros((n, d, d), dtype=complex)
    for k, mat in enumerate(entries):
        try:
            arr = np.asarray(mat, dtype=float)
        except (TypeError, ValueError) as exc:
            raise InputError(f"entry {k} is not a rectangular number grid: {exc}") from exc
        if arr.shape != (d, d, 2):
            raise InputError(
                f"entry {k} must be a {d}x{d} grid of [re, im] pairs, "
                f"got shape {arr.shape}"
            )
        mats[k] = arr[..., 0] + 1j * arr[..., 1]
    return MatrixTuple(mats)


def save_tuple(path: str, x: MatrixTuple) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(tuple_to_payload(x), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_tuple(path: str) -> MatrixTuple:
    try:
        with open(path, encoding="utf-8") as fh:
            return tuple_from_payload(json.load(fh))
    except OSError as exc:
        raise InputError(f"cannot read tuple file {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"tuple file {path!r} is not valid JSON: {exc}") from exc


def random_tuple(family: str, d: int, n: int, seed) -> MatrixTuple:
    """Seeded instance generator for the three test families."""
    rng = np.random.default_rng(seed)
    if d < 1 or d > 16 or n < 1:
        raise UsageError(f"need 1 <= d <= 16 and n >= 1, got d={d}, n={n}")
    z = (rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d)))
    z /= math.sqrt(2.0)
    if family == "gaussian":
        return MatrixTuple(z)
    if family == "psd":
        mats = np.matmul(z, np.conj(np.swapaxes(z, 1, 2))) / math.sqrt(d)
        return MatrixTuple(mats)
    if family == "unitary":
        qs = np.empty_like(z)
        for k in range(n):
            q, r = np.linalg.qr(z[k])
            ph = np.diagonal(r).copy()
            ph = np.where(np.abs(ph) > 0, ph / np.abs(ph), 1.0)
            qs[k] = q * ph[None, :]
        return MatrixTuple(qs)
    raise UsageError(f"unknown family {family!r}; pick one of {GEN_FAMILIES}")


# ---------------------------------------------------------------------------
# reports


def encode_exponent(p: float):
    return "inf" if p == INF else float(p)


def parse_exponent(text: str) -> float:
    t = str(text).strip().lower()
    try:
        if t in ("inf", "infinity"):
            value = INF
        elif "/" in t:
            num, den = t.split("/", 1)
            value = float(int(num)) / float(int(den))
        else:
            value = float(t)
        return check_exponent(value)
    except (ValueError, ZeroDivisionError, InputError) as exc:
        raise UsageError(f"cannot read exponent {text!r}: {exc}") from exc


def estimate_payload(est) -> dict:
    return {
        "value": float(est.value),
        "kind": est.kind,
        "iterations": int(est.iterations),
        "converged": bool(est.converged),
    }


@dataclass
class Report:
    """JSON-friendly record of one CLI run.

    Timings are wall-clock and vary run to run; everything else is a
    pure function of the inputs and the seed.
    """

    command: str
    method: str
    instance: dict
    params: dict
    results: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True)


def _emit(report: Report, out_path: str | None) -> None:
    text = report.to_json()
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


# ---------------------------------------------------------------------------
# compute


def run_compute(x: MatrixTuple, method: str, p: float, theta: float,
                cfg: SolverConfig) -> Report:
    if method not in COMPUTE_METHODS:
        raise UsageError(f"unknown method {method!r}; pick one of {COMPUTE_METHODS}")
    ex = derive_exponents(p, theta)
    params = {
        "p": encode_exponent(p),
        "p_conj": encode_exponent(ex.p_conj),
        "theta": theta,
        "r": encode_exponent(ex.r),
        "r0": encode_exponent(ex.r0),
        "r1": encode_exponent(ex.r1),
        "cfg": cfg.to_dict(),
    }
    instance = {"d": x.d, "n": x.n, "l2": x.l2()}
    report = Report("compute", method, instance, params)
    t0 = time.perf_counter()

    if method == "alpha":
        est = alpha(x, p, theta, cfg)
        report.results = {
            "alpha": estimate_payload(est),
            "column_norm": column_norm(x, p),
            "row_norm": row_norm(x, p),
        }
        report.flags = {"converged": est.converged}
    elif method == "oracle":
        cand, upper = optimize_candidate(x, p, theta, cfg)
        lower = oracle_lower(x, p, theta, cfg)
        gap = (upper.value - lower.value) / max(lower.value, 1e-300)
        report.results = {
            "upper": estimate_payload(upper),
            "lower": estimate_payload(lower),
            "relative_gap": gap,
            "candidate_degree": cand.degree,
        }
        report.flags = {"gap_within_tol": gap <= cfg.gap_tol}
    elif method == "pisier":
        if p != INF:
            raise UsageError("the superoperator route is for p = inf; pass --p inf")
        rep = corollary_check(x, theta, cfg)
        report.results = {
            "theta": rep.theta,
            "operator_exponent": encode_exponent(rep.p_op),
            "alpha_value": rep.alpha_value,
            "alpha_squared": rep.alpha_squared,
            "superop_value": rep.superop_value,
            "relative_deviation": rep.relative_deviation,
            "alpha_kind": rep.alpha_kind,
            "superop_kind": rep.superop_kind,
        }
        report.flags = {"within_tol": rep.relative_deviation <= cfg.gap_tol}
    elif method == "certificate":
        if p > 2.0:
            raise UsageError("certificates require p <= 2")
        cand, upper = optimize_candidate(x, p, theta, cfg)
        fact = build_certificate(
            x, p, theta, cand, eps=cfg.eps_rel, n_samples=cfg.samples, cfg=cfg
        )
        est = alpha(x, p, theta, cfg)
        bmax = candidate_boundary_max(cand, p, theta, cfg.samples)
        report.results = {
            "objective": fact.objective,
            "alpha": estimate_payload(est),
            "candidate_boundary_max": bmax,
            "excess_over_candidate": fact.objective / max(bmax, 1e-300) - 1.0,
            "reconstruction_defect": fact.max_defect(x),
        }
        report.flags = {
            "within_tol": fact.objective <= est.value * (1.0 + cfg.gap_tol)
        }
    else:  # sandwich
        rep = sandwich(x, p, theta, cfg)
        report.results = {
            "lower": estimate_payload(rep.lower),
            "alpha": estimate_payload(rep.alpha),
            "upper": estimate_payload(rep.upper),
            "relative_gap": rep.relative_gap,
        }
        report.flags = {
            "alpha_within": rep.alpha_within,
            "gap_within_tol": rep.relative_gap <= cfg.gap_tol,
        }

    report.timings = {"total_s": time.perf_counter() - t0}
    return report


# ---------------------------------------------------------------------------
# verify


def _thread_count() -> int:
    raw = os.environ.get("NCINTERP_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _trial_duality(x: MatrixTuple, rng: np.random.Generator, cfg: SolverConfig) -> dict:
    p = rng.choice([1.0, 4.0 / 3.0, 2.0, 3.0, INF])
    theta = float(rng.uniform(0.15, 0.85))
    primal = alpha(x, p, theta, cfg)
    lower = dual_norm_estimate(x, p, theta, cfg)
    rel = abs(primal.value - lower.value) / max(primal.value, 1e-300)
    crossed = p <= 2.0 and lower.value > primal.value * (1.0 + 1e-6)
    return {
        "p": encode_exponent(float(p)),
        "theta": theta,
        "alpha": primal.value,
        "dual_lower": lower.value,
        "relative_mismatch": rel,
        "ok": bool(rel <= cfg.gap_tol and not crossed),
    }


def _trial_sandwich(x: MatrixTuple, rng: np.random.Generator, cfg: SolverConfig) -> dict:
    p = rng.choice([4.0, INF])
    theta = float(rng.choice([0.25, 0.5, 0.75]))
    rep = sandwich(x, float(p), theta, cfg)
    return {
        "p": encode_exponent(float(p)),
        "theta": theta,
        "lower": rep.lower.value,
        "alpha": rep.alpha.value,
        "upper": rep.upper.value,
        "relative_gap": rep.relative_gap,
        "ok": bool(rep.relative_gap <= cfg.gap_tol and rep.alpha_within),
    }


def _trial_corollary(x: MatrixTuple, rng: np.random.Generator, cfg: SolverConfig) -> dict:
    theta = float(rng.choice([0.25, 0.5, 0.75]))
    rep = corollary_check(x, theta, cfg)
    return {
        "theta": theta,
        "alpha_squared": rep.alpha_squared,
        "superop_value": rep.superop_value,
        "relative_deviation": rep.relative_deviation,
        "ok": bool(rep.relative_deviation <= cfg.gap_tol),
    }


def _trial_szego(d: int, rng: np.random.Generator, cfg: SolverConfig) -> dict:
    n_grid = 128
    angles = 2.0 * math.pi * np.arange(n_grid) / n_grid
    deg = 3
    coeffs = (
        rng.standard_normal((deg + 1, d, d)) + 1j * rng.standard_normal((deg + 1, d, d))
    ) / math.sqrt(2.0)
    ws = np.exp(1j * angles)
    powers = ws[:, None] ** np.arange(deg + 1)[None, :]
    q = np.einsum("jm,mab->jab", powers, coeffs)
    vals = q @ np.conj(np.swapaxes(q, 1, 2)) + 0.05 * np.eye(d)
    outer = wilson_factorize(BoundaryFunction(angles, vals), cfg=cfg)
    winding = det_winding(outer)
    return {
        "residual": outer.residual,
        "winding": winding,
        "converged": outer.converged,
        "ok": bool(outer.converged and outer.residual <= 1e-6 and winding == 0),
    }


def _trial_endpoints(x: MatrixTuple, rng: np.random.Generator, cfg: SolverConfig) -> dict:
    p = float(rng.choice([1.0, 4.0 / 3.0, 3.0, INF]))
    theta = float(rng.choice([0.0, 1.0]))
    ref = row_norm(x, p) if theta == 1.0 else column_norm(x, p)
    est = alpha(x, p, theta, cfg)
    rel = abs(est.value - ref) / max(ref, 1e-300)
    # scaling equivariance is exact because solvers normalize internally
    est_scaled = alpha(x.scaled(2.5), p, theta, cfg)
    scale_err = abs(est_scaled.value - 2.5 * est.value) / max(est.value, 1e-300)
    one_sided = est.value >= ref * (1.0 - 1e-9) if p <= 2.0 else est.value <= ref * (1.0 + 1e-9)
    return {
        "p": encode_exponent(p),
        "theta": theta,
        "reference": ref,
        "alpha": est.value,
        "relative_mismatch": rel,
        "scale_equivariance_error": scale_err,
        "ok": bool(rel <= cfg.gap_tol and scale_err <= 1e-9 and one_sided),
    }


def run_verify(suite: str, d: int, n: int, trials: int, seed: int,
               cfg: SolverConfig) -> Report:
    if suite not in VERIFY_SUITES:
        raise UsageError(f"unknown suite {suite!r}; pick one of {VERIFY_SUITES}")
    children = np.random.SeedSequence(seed).spawn(trials)

    def one(idx: int) -> dict:
        rng = np.random.default_rng(children[idx])
        trial_cfg = cfg.replace(seed=int(children[idx].generate_state(1)[0] % 2**31))
        if suite == "szego":
            out = _trial_szego(d, rng, trial_cfg)
        else:
            x = random_tuple("gaussian", d, n, children[idx])
            fn = {
                "duality": _trial_duality,
                "sandwich": _trial_sandwich,
                "corollary": _trial_corollary,
                "endpoints": _trial_endpoints,
            }[suite]
            out = fn(x, rng, trial_cfg)
        out["trial"] = idx
        return out

    t0 = time.perf_counter()
    workers = _thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, range(trials)))
    else:
        rows = [one(i) for i in range(trials)]
    rows.sort(key=lambda r: r["trial"])
    passed = sum(1 for r in rows if r["ok"])

    report = Report(
        command="verify",
        method=suite,
        instance={"d": d, "n": n, "trials": trials, "seed": seed},
        params={"cfg": cfg.to_dict(), "threads": workers},
        results={"trials": rows},
        flags={"ok": passed == trials, "passed": passed, "failed": trials - passed},
        timings={"total_s": time.perf_counter() - t0},
    )
    return report


# ---------------------------------------------------------------------------
# argument handling


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ncinterp",
        description="Numerical laboratory for interpolated column/row Schatten norms",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def add_solver_args(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--tol", type=float, default=None)
        sp.add_argument("--restarts", type=int, default=None)
        sp.add_argument("--max-iters", type=int, default=None)
        sp.add_argument("--degree", type=int, default=None)
        sp.add_argument("--samples", type=int, default=None)
        sp.add_argument("--out", default=None, help="write the JSON report here")

    cp = sub.add_parser("compute", help="run one method on one tuple")
    cp.add_argument("--in", "--input", dest="in_path", help="tuple file produced by gen")
    cp.add_argument("--gen", choices=GEN_FAMILIES, help="generate the input instead")
    cp.add_argument("--d", type=int, default=2)
    cp.add_argument("--n", type=int, default=2)
    cp.add_argument("--method", required=True, choices=COMPUTE_METHODS)
    cp.add_argument("--p", default="inf", help='exponent: number, fraction like "4/3", or "inf"')
    cp.add_argument("--theta", type=float, default=0.5)
    add_solver_args(cp)

    vp = sub.add_parser("verify", help="run a randomized verification suite")
    vp.add_argument("--suite", required=True, choices=VERIFY_SUITES)
    vp.add_argument("--d", type=int, default=2)
    vp.add_argument("--n", type=int, default=2)
    vp.add_argument("--trials", type=int, default=8)
    add_solver_args(vp)

    gp = sub.add_parser("gen", help="write a random tuple file")
    gp.add_argument("--family", required=True, choices=GEN_FAMILIES)
    gp.add_argument("--d", type=int, default=2)
    gp.add_argument("--n", type=int, default=2)
    gp.add_argument("--seed", type=int, default=0)
    gp.add_argument("--out", required=True)
    return ap


def _config_from_args(args) -> SolverConfig:
    cfg = SolverConfig(seed=args.seed)
    updates = {}
    for name, attr in (
        ("tol", "tol"),
        ("restarts", "restarts"),
        ("max_iters", "max_iters"),
        ("degree", "degree"),
        ("samples", "samples"),
    ):
        value = getattr(args, name, None)
        if value is not None:
            updates[attr] = value
    return cfg.replace(**updates) if updates else cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            x = random_tuple(args.family, args.d, args.n, args.seed)
            save_tuple(args.out, x)
            return 0
        if args.command == "compute":
            if bool(args.in_path) == bool(args.gen):
                raise UsageError("pass exactly one of --in or --gen")
            if args.in_path:
                x = load_tuple(args.in_path)
                instance_src = {"source": args.in_path}
            else:
                x = random_tuple(args.gen, args.d, args.n, args.seed)
                instance_src = {"source": f"gen:{args.gen}", "seed": args.seed}
            p = parse_exponent(args.p)
            cfg = _config_from_args(args)
            report = run_compute(x, args.method, p, args.theta, cfg)
            report.instance.update(instance_src)
            _emit(report, args.out)
            return 0
        # verify
        cfg = _config_from_args(args)
        report = run_verify(args.suite, args.d, args.n, args.trials, args.seed, cfg)
        _emit(report, args.out)
        return 0 if report.flags["ok"] else 1
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except NCInterpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
