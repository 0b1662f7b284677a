#!/usr/bin/env python3
"""
Free Gibbs Transport - Main Entry Point

Command-line driver. Each subcommand resolves its configuration (JSON
file, environment, flags), runs one experiment, and writes config.json,
CSV tables, JSON summaries and SVG plots to a run directory.

Exit codes: 0 all checks passed, 1 a check failed or the run aborted,
2 usage or configuration error.
"""

import argparse
import logging
import os
import sys
from dataclasses import fields
from pathlib import Path
from typing import List, Optional

import numpy as np
from numpy.polynomial import polynomial as npoly

# Add src to path
sys.path.insert(0, str(Path(__file__).parent))

from core.config import CONFIG_KINDS, ChainConfig, RuntimeConfig, load_config
from core.errors import ArtifactError, ConfigError, FreeGibbsError
from core.rng import stream
from freesde import (
    coupled_contraction,
    martingale_check,
    ou_second_moment,
    resolve_family,
    sde_path,
    semigroup_eval,
)
from matrep import (
    Ensemble,
    HessianKernel,
    certify_convexity,
    hessian_min_eig,
    monomial_battery,
    op_norm,
    random_tuple,
    run_identity_suite,
    sd_residual,
    tau_hat,
)
from ncalg import NCPoly, TracePoly, codec, combine, resolve_potential
from onevar import (
    GibbsDensity,
    classical_transport_1d,
    equilibrium_measure,
    log_partition_derivative,
    oracle_error,
    principal_value_residual,
    quantile_transport,
    spectral_ks,
    uniform_grid,
)
from renderer.report import (
    render_density_overlay,
    render_plot,
    render_report,
    run_section,
    table_section,
)
from sampler import sample_ensemble
from state import RunRecord, RunStore, load_ensemble
from transport import (
    flow_transport,
    pushforward_check,
    quadratic_scale,
    relative_map_error,
)

logger = logging.getLogger("free-gibbs-transport")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

# Key of the stream that draws random starting tuples
START_KEY = 1 << 41
# Numeric Hessian floor accepted for uncertified potentials
HESSIAN_FLOOR = -1e-6
# Classical map vs quantile oracle
MAP_TOL = 1e-3
# Closed-form OU and transport comparisons
OU_RELATIVE_TOL = 0.02
TRANSPORT_RELATIVE_TOL = 1e-2


def observable(value, n: int):
    """Preset name (x, x2, x4, x2tr) or codec dict."""
    if isinstance(value, dict):
        return codec.from_dict(value)
    presets = {
        "x": NCPoly.var(1, n),
        "x2": NCPoly.monomial((1, 1), n),
        "x4": NCPoly.monomial((1, 1, 1, 1), n),
        "x2tr": TracePoly.term((1, 1), [(1, 1)], n),
    }
    if value not in presets:
        raise ConfigError(f"unknown observable {value!r}; presets are {sorted(presets)}")
    return presets[value]


def start_tuple(value, n: int, N: int, seed: int, scale: float = 1.0, offset: int = 0):
    """Starting point: "zero", "random", or the first sample of an HMT1 file."""
    if value == "zero":
        return np.zeros((n, N, N), dtype=np.complex128)
    if value == "random":
        return random_tuple(stream(seed, START_KEY + offset), n, N, scale).mats
    ens = load_ensemble(value)
    ens.require_samples()
    if (ens.n, ens.N) != (n, N):
        raise ConfigError(f"{value}: ensemble has (n, N) = ({ens.n}, {ens.N}), need ({n}, {N})")
    return ens.samples[0]


def quadratic_constant(V: NCPoly) -> Optional[float]:
    """c when V = (c/2)ΣXᵢ², else None."""
    expected = {(i, i) for i in range(1, V.n + 1)}
    if set(V.terms) != expected:
        return None
    coeffs = {complex(c) for c in V.terms.values()}
    if len(coeffs) != 1:
        return None
    value = coeffs.pop()
    return 2.0 * value.real if value.imag == 0 else None


def _univariate(fam, alpha: float) -> List[float]:
    return combine(fam.V, fam.W, alpha).univariate_coeffs()


def _spectrum_plot(ens: Ensemble, mu, title: str) -> str:
    xs = np.linspace(mu.a, mu.b, 200)
    return render_density_overlay(ens.eigenvalues(1), (xs, mu.density(xs)), title=title)


# Subcommands


def cmd_check_identities(cfg, store: RunStore, runtime: RuntimeConfig) -> bool:
    results = run_identity_suite(
        cfg.n, cfg.degree, cfg.trials, cfg.seed, cfg.names or None, cfg.numeric_every
    )
    store.write_csv("identities.csv", [r.to_dict() for r in results])
    passed = all(r.passed for r in results)
    store.write_json("summary.json", {
        "passed": passed,
        "identities": {r.name: r.passed for r in results},
        "max_numeric_error": max((r.max_numeric_error for r in results), default=0.0),
    })
    for r in results:
        if not r.passed:
            logger.error(f"Identity {r.name} failed: {r.first_failure}")
    return passed


def cmd_certify(cfg, store: RunStore, runtime: RuntimeConfig) -> bool:
    spec = resolve_potential(cfg.potential)
    cert = certify_convexity(spec)
    V = spec.expand()
    kernel = HessianKernel(V)
    mins = [
        hessian_min_eig(V, random_tuple(stream(cfg.seed, k), spec.n, cfg.N, cfg.radius),
                        kernel=kernel)
        for k in range(cfg.points)
    ]
    numeric_min = min(mins) if mins else None
    if cert.certified:
        floor = cert.c + HESSIAN_FLOOR
        passed = numeric_min is None or numeric_min >= floor
        if not passed:
            logger.error(f"Hessian eigenvalue {numeric_min:.6g} below certified c = {cert.c}")
        logger.info(f"Certified c = {cert.c}")
    elif spec.kind == "generic":
        passed = numeric_min is not None and numeric_min >= HESSIAN_FLOOR
        logger.warning(f"No symbolic certificate; numeric Hessian minimum {numeric_min}")
    else:
        passed = False
        logger.error(f"Certificate rejected: {cert.reason}")
    store.write_csv("hessian.csv", [{"point": k, "min_eig": m} for k, m in enumerate(mins)])
    store.write_json("summary.json", {
        "passed": passed,
        "certificate": cert.to_dict(),
        "numeric_min_eig": numeric_min,
        "points": cfg.points,
    })
    return passed


def cmd_sample(cfg, store: RunStore, runtime: RuntimeConfig) -> bool:
    ens = sample_ensemble(cfg, runtime.threads or None)
    store.write_ensemble("ensemble.hmt1", ens)
    spec = resolve_potential(cfg.potential)
    residuals = sd_residual(ens, spec.expand(), monomial_battery(spec.n, 4),
                            threads=runtime.threads or None)
    store.write_csv("sd_residuals.csv", [r.to_dict() for r in residuals])
    m2, m4 = ens.moments(2), ens.moments(4)
    summary = {
        "count": ens.count,
        "acceptance": ens.meta.get("acceptance"),
        "iact": ens.meta.get("iact"),
        "certified_c": ens.meta.get("certified_c"),
        "m2": float(m2.mean()),
        "m4": float(m4.mean()),
        "sd_max": max(abs(r.mean) for r in residuals),
    }
    if spec.n == 1:
        try:
            mu = equilibrium_measure(spec.univariate_coeffs())
            summary["ks"] = spectral_ks(ens, mu)
            store.write_svg("spectrum.svg", _spectrum_plot(ens, mu, "sampled spectrum"))
        except FreeGibbsError as e:
            logger.warning(f"No equilibrium measure for comparison: {e}")
    store.write_json("summary.json", summary)
    return True


def cmd_sde(cfg, store: RunStore, runtime: RuntimeConfig) -> bool:
    fam = resolve_family(cfg.family)
    X0 = start_tuple(cfg.x0, fam.n, cfg.N, cfg.seed, cfg.x0_scale)
    if cfg.coupled:
        Y0 = start_tuple("random", fam.n, cfg.N, cfg.seed, cfg.y0_scale, offset=1)
        res = coupled_contraction(X0, Y0, fam, cfg.alpha, cfg.T, cfg.dt, seed=cfg.seed)
        store.write_csv("contraction.csv", [
            {"t": float(t), "op_norm": float(a), "real_norm": float(b)}
            for t, a, b in zip(res.times, res.op_norms, res.real_norms)
        ])
        store.write_json("summary.json", res.to_dict())
        series = {"log op norm": (res.times, np.log(np.maximum(res.op_norms, 1e-300)))}
        if res.bound is not None:
            series["bound"] = (res.times, np.log(res.op_norms[0]) + res.bound * res.times)
        store.write_svg("contraction.svg", render_plot(series, title="coupled paths",
                                                       xlabel="t"))
        return res.passed is not False

    path = sde_path(
        X0, fam, cfg.alpha, cfg.T, cfg.dt, rng=cfg.seed, paths=cfg.paths,
        store_every=cfg.store_every, noise=cfg.noise, blowup_radius=cfg.blowup_radius,
    )
    X1 = path.states[:, :, 0]
    m2 = np.real(tau_hat(X1 @ X1)).mean(axis=1)
    norms = op_norm(path.states).max(axis=(1, 2))
    store.write_csv("path.csv", [
        {"t": float(t), "m2": float(a), "max_norm": float(b)}
        for t, a, b in zip(path.times, m2, norms)
    ])
    store.write_ensemble("endpoint.hmt1", Ensemble(path.endpoint, {"seed": cfg.seed}))
    store.write_svg("path.svg", render_plot({"τ̂(X₁²)": (path.times, m2)}, title="sde",
                                            xlabel="t"))
    store.write_json("summary.json", {"paths": path.paths, "final_m2": float(m2[-1]),
                                      "max_norm": float(norms.max())})
    return True


def cmd_semigroup(cfg, store: RunStore, runtime: RuntimeConfig) -> bool:
    if cfg.antithetic and cfg.paths % 2:
        raise ConfigError(f"antithetic semigroup runs need even paths, got {cfg.paths}")
    fam = resolve_family(cfg.family)
    P = observable(cfg.observable, fam.n)
    X0 = start_tuple(cfg.x0, fam.n, cfg.N, cfg.seed, cfg.x0_scale)
    threads = runtime.threads or cfg.threads or None
    est = semigroup_eval(P, X0, fam, cfg.alpha, cfg.t_grid, cfg.paths, cfg.dt, seed=cfg.seed,
                         threads=threads, antithetic=cfg.antithetic)
    store.write_csv("semigroup.csv", est.rows())
    summary = est.to_dict()
    passed = True

    c = quadratic_constant(fam.potential(cfg.alpha))
    if c is not None and fam.n == 1 and cfg.observable == "x2":
        expected = np.stack([ou_second_moment(X0[0], t, c) for t in est.times])
        within = est.within(expected)
        relative = est.relative_error(expected)
        summary["closed_form"] = {"c": c, "within": within, "relative_error": relative}
        passed = within and relative <= OU_RELATIVE_TOL
        store.write_svg("semigroup.svg", render_plot({
            "estimate": (est.times, np.real(tau_hat(est.mean))),
            "closed form": (est.times, np.real(tau_hat(expected))),
        }, title="τ̂ φ_t(X²)", xlabel="t"))

    if cfg.martingale:
        report = martingale_check(P, X0, fam, cfg.alpha, cfg.t_grid, cfg.paths, cfg.dt,
                                  seed=cfg.seed, threads=threads)
        summary["martingale"] = report.to_dict()
        passed = passed and report.passed
    summary["passed"] = passed
    store.write_json("summary.json", summary)
    return passed


def _source_ensemble(cfg, fam, threads) -> Ensemble:
    if cfg.ensemble:
        return load_ensemble(cfg.ensemble)
    known = {f.name for f in fields(ChainConfig)}
    unknown = sorted(k for k in cfg.chain if k not in known)
    if unknown:
        raise ConfigError(f"unknown chain keys: {unknown}")
    params = {"N": cfg.N, "count": cfg.count, "seed": cfg.seed, **cfg.chain}
    return sample_ensemble(ChainConfig(**{**params, "potential": fam.V, "n": fam.n}), threads)


def cmd_transport(cfg, store: RunStore, runtime: RuntimeConfig) -> bool:
    fam = resolve_family(cfg.family)
    threads = runtime.threads or cfg.threads or None
    ens = _source_ensemble(cfg, fam, threads)
    c_source = quadratic_constant(fam.potential(0.0))
    c_target = quadratic_constant(fam.potential(1.0))
    closed_form = c_source == 1.0 and c_target is not None

    result = flow_transport(ens, cfg, fam, keep_history=closed_form, threads=threads)
    flowed = result.ensemble
    store.write_ensemble("flowed.hmt1", flowed)
    rows = result.rows()
    store.write_csv("diagnostics.csv", rows)
    if rows:
        alphas = [r["alpha"] for r in rows]
        store.write_svg("moments.svg", render_plot({
            "m2": (alphas, [r["m2"] for r in rows]),
            "m4": (alphas, [r["m4"] for r in rows]),
        }, title="flowed moments", xlabel="α"))
    summary = {"alphas": result.alphas, "final": rows[-1] if rows else None}

    if closed_form:
        checks = []
        for alpha in (0.5 * cfg.alpha_max, cfg.alpha_max):
            scale = quadratic_scale(c_target, alpha)
            errors = relative_map_error(ens.samples, result.at(alpha), scale)
            m2 = Ensemble(result.at(alpha)).moments(2)
            m2_stderr = m2.std(ddof=1) / np.sqrt(len(m2)) if len(m2) > 1 else 0.0
            target = 1.0 / (1.0 + alpha * (c_target - 1.0))
            ok = float(errors.max()) <= TRANSPORT_RELATIVE_TOL and (
                abs(float(m2.mean()) - target) <= 3.0 * m2_stderr + 1e-12
            )
            checks.append({"alpha": alpha, "max_relative_error": float(errors.max()),
                           "m2": float(m2.mean()), "m2_target": target, "passed": ok})
        summary["closed_form"] = checks
        passed = all(c["passed"] for c in checks)
    else:
        target_V = fam.potential(cfg.alpha_max)
        report = pushforward_check(flowed, target_V, degree=4 if fam.n == 1 else 2,
                                   threads=threads)
        summary["pushforward"] = report.to_dict()
        passed = report.passed

    if fam.n == 1:
        try:
            mu = equilibrium_measure(_univariate(fam, cfg.alpha_max))
            summary["ks"] = spectral_ks(flowed, mu)
            store.write_svg("spectrum.svg", _spectrum_plot(flowed, mu, "flowed spectrum"))
        except FreeGibbsError as e:
            logger.warning(f"No equilibrium measure for comparison: {e}")
    summary["passed"] = passed
    store.write_json("summary.json", summary)
    return passed


def cmd_onevar(cfg, store: RunStore, runtime: RuntimeConfig) -> bool:
    V = np.asarray(cfg.V, dtype=float)
    W = np.asarray(cfg.W, dtype=float)
    VW = npoly.polyadd(V, W)
    lo, hi = cfg.grid_lo, cfg.grid_hi
    grid = uniform_grid(lo, hi, cfg.points)
    mu, nu = GibbsDensity(V, lo, hi), GibbsDensity(VW, lo, hi)
    res = classical_transport_1d(V, W, grid, cfg.alpha_steps, cfg.s_horizon, cfg.ds)
    error = oracle_error(res.F, mu, nu)
    oracle = quantile_transport(mu, nu, grid)
    store.write_csv("map.csv", [
        {"x": float(x), "classical": float(a), "quantile": float(b)}
        for x, a, b in zip(grid, res.F.values, oracle.values)
    ])
    store.write_svg("map.svg", render_plot({
        "classical": (grid, res.F.values),
        "quantile": (grid, oracle.values),
    }, title="transport map", xlabel="x"))
    summary = {
        "sup_error": error,
        "monotone": res.F.is_monotone(),
        "tail": res.tail,
        "dlogZ": {
            "alpha0": log_partition_derivative(V, W, 0.0, lo, hi),
            "alpha1": log_partition_derivative(V, W, 1.0, lo, hi),
        },
    }
    passed = error <= MAP_TOL and res.F.is_monotone()

    measures = {}
    for name, coeffs in (("V", V), ("V+W", VW)):
        try:
            eq = equilibrium_measure(coeffs)
        except FreeGibbsError as e:
            logger.warning(f"No equilibrium measure for {name}: {e}")
            continue
        measures[name] = eq
        summary[f"equilibrium {name}"] = {
            **eq.to_dict(),
            "sd_residual": max(abs(r) for r in eq.sd_residuals()),
            "pv_residual": principal_value_residual(eq),
        }
    if measures:
        a = min(m.a for m in measures.values())
        b = max(m.b for m in measures.values())
        xs = np.linspace(a, b, 400)
        store.write_csv("density.csv", [
            {"x": float(x), **{name: float(m.density(x)) for name, m in measures.items()}}
            for x in xs
        ])
        store.write_svg("density.svg", render_plot(
            {name: (xs, m.density(xs)) for name, m in measures.items()},
            title="equilibrium densities", xlabel="x",
        ))
    if cfg.ensemble and "V" in measures:
        ens = load_ensemble(cfg.ensemble)
        summary["ks"] = spectral_ks(ens, measures["V"])
        store.write_svg("spectrum.svg", _spectrum_plot(ens, measures["V"], "ensemble spectrum"))
    summary["passed"] = passed
    store.write_json("summary.json", summary)
    return passed


def cmd_report(cfg, store: RunStore, runtime: RuntimeConfig) -> bool:
    sections = []
    complete = True
    for run_dir in cfg.runs:
        rel = os.path.relpath(run_dir, store.root)
        try:
            record = RunRecord(run_dir)
        except ArtifactError as e:
            logger.error(str(e))
            sections.append(run_section(Path(run_dir).name, "unknown", "missing", rel,
                                        missing=["manifest.json"]))
            complete = False
            continue
        missing = record.missing()
        complete = complete and not missing
        tables = [table_section(name, record.read_csv(name)) for name in record.names("csv")]
        sections.append(run_section(
            Path(run_dir).name,
            record.command,
            record.status,
            rel,
            summary=record.read_json("summary.json") if "summary.json" not in missing else None,
            tables=tables,
            plots=[name for name in record.names("svg") if name not in missing],
            missing=missing,
        ))
    store.write_text("report.md", render_report(sections), "markdown")
    logger.info(f"Report over {len(cfg.runs)} run(s) written to {store.root / 'report.md'}")
    return complete


COMMANDS = {
    "check-identities": ("identities", cmd_check_identities),
    "certify-convexity": ("certify", cmd_certify),
    "sample": ("sample", cmd_sample),
    "sde": ("sde", cmd_sde),
    "semigroup": ("semigroup", cmd_semigroup),
    "transport": ("transport", cmd_transport),
    "onevar": ("onevar", cmd_onevar),
    "report": ("report", cmd_report),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="free-gibbs-transport", description=__doc__.strip())
    parser.add_argument("--config", help="JSON config file (default: $FGT_CONFIG)")
    parser.add_argument("--output", help="Run directory (default: runs/<command>)")
    parser.add_argument("--threads", type=int, help="Worker threads (default: $FGT_THREADS)")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="Debug logging")
    verbosity.add_argument("--quiet", action="store_true", help="Warnings and errors only")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-identities", help="Symbolic and numeric identity suite")
    p.add_argument("--n", type=int)
    p.add_argument("--deg", dest="degree", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--names", nargs="+")
    p.add_argument("--numeric-every", dest="numeric_every", type=int)

    p = sub.add_parser("certify-convexity", help="Convexity certificate of a potential")
    p.add_argument("potential", nargs="?", help="Potential JSON file")
    p.add_argument("--points", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--radius", type=float)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("sample", help="Langevin/MALA samples of μ_{V,N}")
    p.add_argument("--potential")
    p.add_argument("--n", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--count", type=int)
    p.add_argument("--burnin", type=int)
    p.add_argument("--thin", type=int)
    p.add_argument("--step", type=float)
    p.add_argument("--chains", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--mala", action=argparse.BooleanOptionalAction, default=None)

    p = sub.add_parser("sde", help="Euler–Maruyama paths of the free SDE")
    p.add_argument("--fam", "--family", dest="family")
    p.add_argument("--alpha", type=float)
    p.add_argument("--N", type=int)
    p.add_argument("--T", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--paths", type=int)
    p.add_argument("--store-every", dest="store_every", type=int)
    p.add_argument("--x0")
    p.add_argument("--seed", type=int)
    p.add_argument("--noise", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--coupled", action=argparse.BooleanOptionalAction, default=None)

    p = sub.add_parser("semigroup", help="Monte Carlo semigroup φ_t(P)(X₀)")
    p.add_argument("--fam", "--family", dest="family")
    p.add_argument("--alpha", type=float)
    p.add_argument("--observable")
    p.add_argument("--N", type=int)
    p.add_argument("--t-grid", dest="t_grid", type=float, nargs="+")
    p.add_argument("--paths", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--x0")
    p.add_argument("--seed", type=int)
    p.add_argument("--antithetic", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--martingale", action=argparse.BooleanOptionalAction, default=None)

    p = sub.add_parser("transport", help="α-flow of an ensemble from V to V+W")
    p.add_argument("--fam", "--family", dest="family")
    p.add_argument("--N", type=int)
    p.add_argument("--count", type=int)
    p.add_argument("--T", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--paths", type=int)
    p.add_argument("--dalpha", type=float)
    p.add_argument("--gradient", choices=["adjoint", "fd"])
    p.add_argument("--ensemble", help="Source HMT1 ensemble (sampled when omitted)")
    p.add_argument("--seed", type=int)
    p.add_argument("--antithetic", action=argparse.BooleanOptionalAction, default=None)

    p = sub.add_parser("onevar", help="Equilibrium measures and the classical 1-d map")
    p.add_argument("--V", type=float, nargs="+", help="Ascending coefficients")
    p.add_argument("--W", type=float, nargs="+", help="Ascending coefficients")
    p.add_argument("--grid-lo", dest="grid_lo", type=float)
    p.add_argument("--grid-hi", dest="grid_hi", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--alpha-steps", dest="alpha_steps", type=int)
    p.add_argument("--s-horizon", dest="s_horizon", type=float)
    p.add_argument("--ds", type=float)
    p.add_argument("--ensemble")

    p = sub.add_parser("report", help="Markdown report over finished runs")
    p.add_argument("runs", nargs="*")
    return parser


def configure_logging(args) -> None:
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(
        level=level,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )


def run(args) -> int:
    """Execute one subcommand and return its exit code."""
    kind, handler = COMMANDS[args.command]
    known = {f.name for f in fields(CONFIG_KINDS[kind])}
    overrides = {k: v for k, v in vars(args).items() if k in known and k != "threads"}
    if kind == "report":
        overrides["runs"] = args.runs or None
        if args.output:
            overrides["output"] = args.output
    cfg = load_config(kind, args.config, overrides)
    output = cfg.output if kind == "report" else args.output or f"runs/{args.command}"
    runtime = RuntimeConfig(
        threads=args.threads or 0,
        output_dir=output,
        log_level=logging.getLevelName(logging.getLogger().level),
    )
    store = RunStore(runtime.output_dir, args.command)
    store.write_config(cfg)
    passed = handler(cfg, store, runtime)
    store.finish(passed)
    logger.info(f"{args.command}: {'passed' if passed else 'FAILED'} ({store.root})")
    return EXIT_OK if passed else EXIT_FAILED


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    configure_logging(args)
    try:
        return run(args)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_USAGE
    except FreeGibbsError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
