"""Command-line front end: one certification suite per subcommand.

Commands: spectrum | verify-identities | riesz | observe | visco | control.
Every command writes its machine-readable artifacts before deciding the
exit code, so a failing run still leaves a full summary on disk.

Exit codes: 0 all asserted checks passed, 2 a check failed, 64 bad
configuration or missing prerequisite, 70 numerical breakdown.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .cache import ModeCache, cached_modes, resolve_cache_path
from .config import (CheckFailure, ConfigurationError, NumericalError,
                     RunConfig, TOLERANCES, default_config, load_config)
from .control import control_pipeline, problem_from_dict, random_problem
from .geometry import boundary_quadrature, domain_from_config, interior_quadrature
from .gram import riesz_bounds_report
from .operators import antisymmetry_suite, quasi_orthogonality_check, rellich_suite
from .reports import write_csv, write_json
from .visco import (MemoryKernel, exponential_kernel, memory_riesz_certificate,
                    polynomial_kernel, zero_kernel)
from .wave import observability_experiment

LOCK_NAME = ".observalab.lock"


# ----------------------------------------------------------------------
# shared setup


def _apply_tolerance_overrides(config: RunConfig) -> None:
    # modules read the shared table at call time; a CLI process runs one
    # command, so installing the overrides globally is safe and makes them
    # effective everywhere (not just in CLI-level assertions)
    for name, value in config.tolerances.items():
        TOLERANCES[name] = float(value)


def _build_tables(config: RunConfig, need_interior: bool = False):
    domain = domain_from_config(config.domain)
    cache = ModeCache.load(resolve_cache_path(config.cache_path))
    table = cached_modes(domain, config.N, cache)
    cache.save()
    lam_max = float(np.max(table.lambdas))
    brule = boundary_quadrature(domain, q=config.quadrature_q, lam_max=lam_max)
    irule = None
    if need_interior:
        irule = interior_quadrature(domain, q=config.quadrature_q, lam_max=lam_max)
    return domain, table, brule, irule


def _kernel_from_spec(spec: dict) -> MemoryKernel:
    family = spec.get("family")
    if family == "zero":
        return zero_kernel()
    if family == "exponential":
        return exponential_kernel(spec.get("M0", 0.2), spec.get("delta", 1.0))
    if family == "polynomial":
        return polynomial_kernel(spec.get("M0", 0.2), spec.get("p", 2.0))
    raise ConfigurationError(f"unknown kernel family: {family!r}")


def _in_hypothesis_horizons(config: RunConfig, domain) -> list[float]:
    return [T for T in config.horizons(2.0 * domain.R) if T > 2.0 * domain.R]


# ----------------------------------------------------------------------
# subcommands


def cmd_spectrum(config: RunConfig, out: Path, args) -> None:
    domain, table, _, _ = _build_tables(config)
    rows = [
        {"n": m.index,
         "multi_index": "|".join(str(part) for part in m.multi_index),
         "lambda": m.lam}
        for m in table.modes
    ]
    path = write_csv(out / "spectrum.csv", ["n", "multi_index", "lambda"], rows)
    print(f"spectrum: {len(rows)} modes on {domain.kind} -> {path}")


def cmd_verify_identities(config: RunConfig, out: Path, args) -> None:
    domain, table, brule, irule = _build_tables(config, need_interior=True)
    tol_name = "rellich_disk" if domain.kind == "disk" else "rellich"
    reports = rellich_suite(table, irule, brule,
                            max_index=min(table.N, 20),
                            tol=config.tol(tol_name))
    reports += antisymmetry_suite(table, irule,
                                  max_index=min(table.N, 15),
                                  tol=config.tol("antisymmetry"))
    rng = np.random.default_rng(config.seed)
    slack = config.tol("quasi_orthogonality")
    for i in range(config.draws):
        u = rng.normal(size=2 * table.N) + 1j * rng.normal(size=2 * table.N)
        reports.append(quasi_orthogonality_check(
            table, irule, u, slack=slack, label=f"quasi_orth_{i}"))
    header = ["label", "lhs", "rhs", "abs_error", "rel_error", "tolerance", "pass"]
    path = write_csv(out / "identities.csv", header, [r.row() for r in reports])
    failed = [r.label for r in reports if not r.passed]
    print(f"verify-identities: {len(reports)} checks, {len(failed)} failed -> {path}")
    if failed:
        raise CheckFailure(
            f"{len(failed)} identity checks failed (first: {failed[0]}); see {path}"
        )


def cmd_riesz(config: RunConfig, out: Path, args) -> None:
    domain, table, brule, _ = _build_tables(config)
    margin_tol = config.tol("riesz_margin")
    reports = [riesz_bounds_report(table, brule, T, margin_tol=margin_tol)
               for T in config.horizons(2.0 * domain.R)]
    rows = [r.row() for r in reports]
    header = ["domain", "N", "T", "lambda_min", "lambda_max",
              "c_lower", "margin", "in_hypothesis", "pass"]
    csv_path = write_csv(out / "riesz.csv", header, rows)
    outside = [r.T for r in reports if not r.in_hypothesis]
    failed = [r.T for r in reports if r.passed is False]
    summary = {
        "domain": {"kind": domain.kind, "params": list(domain.params)},
        "N": table.N,
        "rows": rows,
        "outside_hypothesis": outside,
        "failed_horizons": failed,
        "passed": not failed,
    }
    json_path = write_json(out / "riesz_summary.json", summary)
    print(f"riesz: {len(rows)} horizons, {len(outside)} outside hypothesis, "
          f"{len(failed)} failed -> {json_path}")
    if failed:
        raise CheckFailure(
            f"lower Riesz bound violated at T={failed[0]:g}; see {csv_path}"
        )
    if outside and args.strict:
        raise CheckFailure(
            f"--strict: horizon T={outside[0]:g} is outside the hypothesis T > 2R"
        )


def cmd_observe(config: RunConfig, out: Path, args) -> None:
    domain, table, brule, _ = _build_tables(config)
    horizons = _in_hypothesis_horizons(config, domain)
    if not horizons:
        raise ConfigurationError(
            "observability needs at least one horizon above the escape time 2R"
        )
    rng = np.random.default_rng(config.seed)
    rows, summaries = [], []
    for T in horizons:
        exp = observability_experiment(table, brule, T, config.draws, rng,
                                       margin_tol=config.tol("riesz_margin"))
        rows += [{"T": T, "draw": i, "ratio": r}
                 for i, r in enumerate(exp["ratios"])]
        summaries.append({k: exp[k] for k in
                          ("T", "draws", "c_lower", "lambda_min", "lambda_max",
                           "min_ratio", "median_ratio", "adversarial_ratio",
                           "passed")})
    csv_path = write_csv(out / "observe.csv", ["T", "draw", "ratio"], rows)
    write_json(out / "observe_summary.json",
               {"domain": {"kind": domain.kind, "params": list(domain.params)},
                "N": table.N, "experiments": summaries,
                "passed": all(s["passed"] for s in summaries)})
    bad = [s for s in summaries if not s["passed"]]
    print(f"observe: {len(rows)} draws over {len(horizons)} horizons, "
          f"{len(bad)} failing -> {csv_path}")
    if bad:
        raise CheckFailure(
            f"observability ratio fell below the certified constant at "
            f"T={bad[0]['T']:g}; see {csv_path}"
        )


def _closeness_payload(report) -> dict:
    return {
        "slope": report.slope,
        "intercept_c1": report.intercept_c1,
        "r_squared": report.r_squared,
        "slope_upper": report.slope_upper,
        "c1_max": report.c1_max,
        "degenerate": report.degenerate,
        "passed": report.passed,
        "modes": report.rows(),
    }


def cmd_visco(config: RunConfig, out: Path, args) -> None:
    domain, table, brule, _ = _build_tables(config)
    horizons = _in_hypothesis_horizons(config, domain)
    if not horizons:
        raise ConfigurationError(
            "the memory certificate needs a horizon above the escape time 2R"
        )
    T = max(horizons)
    certificates, errors = [], []
    for spec in config.kernels:
        kernel = _kernel_from_spec(spec)
        try:
            cert = memory_riesz_certificate(table, brule, kernel, T)
            cert["closeness"] = _closeness_payload(cert["closeness"])
        except (ConfigurationError, NumericalError) as err:
            # keep what already certified; the summary records the breakage
            errors.append((kernel.describe(), err))
            cert = {"kernel": kernel.describe(), "error": str(err),
                    "passed": False}
        certificates.append(cert)
    payload = {
        "domain": {"kind": domain.kind, "params": list(domain.params)},
        "N": table.N,
        "T": T,
        "certificates": certificates,
        "passed": all(c["passed"] for c in certificates),
    }
    path = write_json(out / "visco_certificate.json", payload)
    bad = [c["kernel"] for c in certificates if not c["passed"]]
    print(f"visco: {len(certificates)} kernels at T={T:g}, "
          f"{len(bad)} failing -> {path}")
    if errors:
        name, err = errors[0]
        raise type(err)(f"kernel {name}: {err} (summary written to {path})")
    if bad:
        raise CheckFailure(f"memory certificate failed for kernel {bad[0]}")


def _require_riesz_artifact(out: Path, domain, N: int, T: float) -> None:
    """cmd_control refuses to run without a passing lower-bound certificate."""
    summary_path = out / "riesz_summary.json"
    if not summary_path.exists():
        raise ConfigurationError(
            f"control requires a riesz certificate in {out}; "
            f"run the 'riesz' command first"
        )
    try:
        summary = json.loads(summary_path.read_text())
        rows = summary["rows"]
        dom = summary["domain"]
        match_domain = (dom["kind"] == domain.kind
                        and np.allclose(dom["params"], domain.params,
                                        rtol=1e-12, atol=0.0))
        match_n = int(summary["N"]) == N
    except (KeyError, TypeError, ValueError) as err:
        raise ConfigurationError(
            f"unreadable riesz summary {summary_path}: {err}") from err
    if not (match_domain and match_n):
        raise ConfigurationError(
            f"riesz certificate in {out} covers a different (domain, N); "
            f"re-run 'riesz' for this configuration"
        )
    for row in rows:
        if abs(float(row["T"]) - T) <= 1e-9 * max(1.0, T) and row["pass"] is True:
            return
    raise ConfigurationError(
        f"no passing riesz row for T={T:g} in {summary_path}; "
        f"run 'riesz' with this horizon first"
    )


def cmd_control(config: RunConfig, out: Path, args) -> None:
    domain, table, brule, _ = _build_tables(config)
    if args.problem is not None:
        try:
            raw = json.loads(Path(args.problem).read_text())
        except (OSError, ValueError) as err:
            raise ConfigurationError(
                f"cannot read problem file {args.problem}: {err}") from err
        if "domain" in raw and raw["domain"].get("kind") != domain.kind:
            raise ConfigurationError(
                f"problem file targets domain {raw['domain'].get('kind')!r}, "
                f"config says {domain.kind!r}"
            )
        if "N" in raw and int(raw["N"]) != table.N:
            raise ConfigurationError(
                f"problem file truncation N={raw['N']} differs from config "
                f"N={table.N}"
            )
        problem = problem_from_dict(raw)
        if problem.N != table.N:
            raise ConfigurationError(
                f"problem vectors have length {problem.N}, expected {table.N}"
            )
    else:
        horizons = _in_hypothesis_horizons(config, domain)
        if not horizons:
            raise ConfigurationError(
                "control needs a horizon above the escape time 2R"
            )
        problem = random_problem(table.N, max(horizons),
                                 np.random.default_rng(config.seed))
    _require_riesz_artifact(out, domain, table.N, problem.T)
    rep = control_pipeline(table, brule, problem,
                           rtol=config.tol("pcg_rel_residual"))
    result = {
        "domain": {"kind": domain.kind, "params": list(domain.params)},
        "N": table.N,
        "T": problem.T,
        "control_coeffs": rep["control"].coefficients,
        "control_norm_sq": rep["control"].norm_sq,
        "steering_rel_error": rep["simulation"]["rel_error"],
        "condition_estimate": rep["condition"],
        "c_lower": rep["c_lower"],
        "rhs_norm_sq": rep["rhs_norm_sq"],
        "norm_bound": rep["norm_bound"],
        "bound_ok": rep["bound_ok"],
        "realness_defect": rep["control"].realness_defect,
        "pcg": rep["control"].solve_info,
        "passed": rep["passed"],
    }
    path = write_json(out / "control_result.json", result)
    print(f"control: steering error {result['steering_rel_error']:.3e}, "
          f"norm^2 {result['control_norm_sq']:.6g} -> {path}")
    if not rep["passed"]:
        raise CheckFailure(
            f"control run failed (steering {result['steering_rel_error']:.3e}, "
            f"bound_ok={result['bound_ok']}); see {path}"
        )


# ----------------------------------------------------------------------
# argument parsing and dispatch


COMMANDS = {
    "spectrum": cmd_spectrum,
    "verify-identities": cmd_verify_identities,
    "riesz": cmd_riesz,
    "observe": cmd_observe,
    "visco": cmd_visco,
    "control": cmd_control,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="observalab",
        description="boundary observability certification suites",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--out", help="output directory (default from config)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--strict", action="store_true",
                       help="outside-hypothesis results become failures")
        p.add_argument("--jobs", type=int, default=1,
                       help="worker hint (computations are vectorized in-process)")
        if name == "control":
            p.add_argument("--problem", help="JSON steering problem file")
    return parser


def _resolve_config(args) -> RunConfig:
    config = load_config(args.config) if args.config else default_config()
    if args.seed is not None:
        config.seed = int(args.seed)
    if args.out:
        config.out_dir = args.out
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.jobs < 1:
            raise ConfigurationError("--jobs must be at least 1")
        config = _resolve_config(args)
        _apply_tolerance_overrides(config)
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        lock_path = out / LOCK_NAME
        acquired = False
        try:
            try:
                fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
            except FileExistsError:
                raise ConfigurationError(
                    f"output directory {out} is locked by another run "
                    f"({lock_path}); remove a stale lock to proceed"
                ) from None
            with os.fdopen(fd, "w") as fh:
                fh.write(str(os.getpid()))
            acquired = True
            COMMANDS[args.command](config, out, args)
        finally:
            if acquired:
                lock_path.unlink(missing_ok=True)
    except CheckFailure as err:
        print(f"check failed: {err}", file=sys.stderr)
        return 2
    except ConfigurationError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 64
    except NumericalError as err:
        print(f"numerical error: {err}", file=sys.stderr)
        return 70
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
