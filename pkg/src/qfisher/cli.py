"""Command-line front end.

Subcommands: info, diffuse, crbound, qcr, stam, minimize, reproduce.
Configuration comes from a flat key = value file (--config) overridden by
command-line flags; every report embeds the fully resolved configuration.
Reports are deterministic byte-for-byte for identical config + seed: JSON is
emitted with sorted keys and shortest round-trip floats, CSV with 17
significant digits and '.' decimal.

Exit codes: 0 all verdicts pass, 1 verdict failure, 2 usage error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .acceptance import AcceptanceSuite, render_summary
from .core import Axis, Tolerances, density_from_callable
from .diffusion import DiffusionState, StabilityError, debruijn_check, evolve, phi_monotonicity_check, trajectory_csv_rows
from .estimation import (
    EstimatorSpec,
    MODEL_REGISTRY,
    crm_bound_scalar,
    mc_error_moment,
    qcr_product,
    sample_mean_estimator,
)
from .inequalities import min_fisher_fixed_entropy, min_fisher_fixed_moment, stam_ratio
from .info_measures import entropy_power, m_q, phi_fisher_refined, renyi_entropy, tsallis_entropy
from .perturb import amplitude_ladder, fourier_bump, perturbed_density
from .qgaussian import QGaussianParams, grid_density, moment_alpha

EXIT_PASS = 0
EXIT_VERDICT = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

STOCHASTIC_COMMANDS = {"crbound", "stam", "minimize"}


class UsageError(ValueError):
    pass


def _fmt17(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:.17g}"


def _parse_scalar(text: str):
    t = text.strip()
    for cast in (int, float):
        try:
            return cast(t)
        except ValueError:
            continue
    return t


def read_config_file(path: str) -> dict:
    """Flat `key = value` lines; '#' starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, val = line.split("=", 1)
            out[key.strip().replace("-", "_")] = _parse_scalar(val)
    return out


def resolve_config(args: argparse.Namespace, defaults: dict) -> dict:
    """defaults < config file < explicit flags; the Hoelder pair (alpha, beta)
    is cross-validated when both are given explicitly and derived from the
    other when only one is."""
    cfg = dict(defaults)
    explicit = set()
    if getattr(args, "config", None):
        file_cfg = read_config_file(args.config)
        unknown = set(file_cfg) - set(defaults) - {"seed"}
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(file_cfg)
        explicit |= set(file_cfg)
    for key in defaults:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
            explicit.add(key)
    if getattr(args, "seed", None) is not None:
        cfg["seed"] = args.seed
    if "alpha" in defaults and "beta" in defaults:
        for key in ("alpha", "beta"):
            if key in explicit and cfg[key] <= 1:
                raise UsageError(f"{key} must exceed 1, got {cfg[key]}")
        if "alpha" in explicit and "beta" in explicit:
            if abs(1.0 / cfg["alpha"] + 1.0 / cfg["beta"] - 1.0) > 1e-12:
                raise UsageError(
                    f"alpha = {cfg['alpha']} and beta = {cfg['beta']} are not Hoelder conjugate")
        elif "alpha" in explicit:
            cfg["beta"] = cfg["alpha"] / (cfg["alpha"] - 1.0)
        elif "beta" in explicit:
            cfg["alpha"] = cfg["beta"] / (cfg["beta"] - 1.0)
    raw_threads = os.environ.get("QFISHER_THREADS", "1")
    try:
        cfg["threads"] = max(1, int(raw_threads))
    except ValueError:
        raise UsageError(f"QFISHER_THREADS must be an integer, got {raw_threads!r}") from None
    return cfg


def _emit(text: str, output_path):
    if output_path:
        with open(output_path, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _canonical(v):
    if isinstance(v, float) and v == 0.0:
        return 0.0  # fold -0.0 for byte-stable reports
    if isinstance(v, dict):
        return {k: _canonical(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_canonical(x) for x in v]
    return v


def _json_report(payload: dict, cfg: dict) -> str:
    payload = dict(payload)
    payload["config"] = {k: cfg[k] for k in sorted(cfg)}
    return json.dumps(_canonical(payload), sort_keys=True, allow_nan=True) + "\n"


def _tolerances(cfg: dict) -> Tolerances:
    return Tolerances(
        quadrature_rel=cfg.get("quadrature_rel", 1e-8),
        identity_rel=cfg.get("identity_rel", 1e-6),
        inequality_slack=cfg.get("inequality_slack", 1e-9),
    )


# ---------------------------------------------------------------------------
# subcommand handlers (return process exit code)
# ---------------------------------------------------------------------------

INFO_DEFAULTS = {
    "family": "qgaussian", "q": 1.0, "alpha": 2.0, "beta": 2.0, "gamma": 0.5,
    "n": 1, "lo": 0.0, "hi": 1.0, "sigma": 1.0, "grid_count": 4001,
}


def cmd_info(args) -> int:
    cfg = resolve_config(args, INFO_DEFAULTS)
    fam = cfg["family"]
    if fam == "qgaussian":
        f = grid_density(QGaussianParams(cfg["q"], cfg["alpha"], cfg["gamma"], cfg["n"]),
                         cfg["grid_count"])
    elif fam == "gaussian":
        s = cfg["sigma"]
        ax = Axis(-10.0 * s, 10.0 * s, cfg["grid_count"])
        f = density_from_callable(
            ax, lambda x: np.exp(-x * x / (2 * s * s)) / np.sqrt(2 * np.pi * s * s))
    elif fam == "uniform":
        ax = Axis(cfg["lo"], cfg["hi"], cfg["grid_count"])
        f = density_from_callable(ax, lambda x: np.ones_like(x) / (cfg["hi"] - cfg["lo"]))
    else:
        raise UsageError(f"unknown family {fam!r} (uniform, gaussian, qgaussian)")
    q, beta = cfg["q"], cfg["beta"]
    diag = phi_fisher_refined(f, q, beta)
    payload = {
        "M_q": m_q(f, q),
        "S_q": tsallis_entropy(f, q),
        "H_q": renyi_entropy(f, q),
        "N_q": entropy_power(f, q),
        "phi": diag.value,
        "I": diag.value / m_q(f, q) ** beta,
        "divergence_flag": diag.diverged,
    }
    _emit(_json_report(payload, cfg), args.output)
    return EXIT_PASS


DIFFUSE_DEFAULTS = {
    "m": 2.0, "beta": 2.0, "alpha": 2.0, "n": 1, "init": "barenblatt",
    "t0": 1.0, "t_end": 2.0, "sigma0": 1.0,
    "grid_lo": -3.5, "grid_hi": 3.5, "grid_count": 1001, "n_logs": 201,
    "identity_rel": 1e-2, "inequality_slack": 1e-9, "quadrature_rel": 1e-8,
}


def cmd_diffuse(args) -> int:
    from .qgaussian import DiffusionParams, barenblatt_density

    cfg = resolve_config(args, DIFFUSE_DEFAULTS)
    if not args.output:
        raise UsageError("diffuse requires --output for the trajectory CSV")
    dp = DiffusionParams(cfg["m"], cfg["beta"], cfg["n"])
    ax = Axis(cfg["grid_lo"], cfg["grid_hi"], cfg["grid_count"])
    if cfg["init"] == "barenblatt":
        if cfg["t0"] <= 0:
            raise UsageError("barenblatt initial data needs t0 > 0")
        f0 = barenblatt_density(dp, cfg["t0"], ax)
    elif cfg["init"] == "gaussian":
        s0 = cfg["sigma0"]
        f0 = density_from_callable(
            ax, lambda x: np.exp(-x * x / (2 * s0 * s0)) / np.sqrt(2 * np.pi * s0 * s0))
    else:
        raise UsageError(f"unknown init {cfg['init']!r} (barenblatt, gaussian)")
    state, log = evolve(DiffusionState(dp, cfg["t0"], f0), cfg["t_end"], cfg["n_logs"])
    tol = Tolerances(identity_rel=cfg["identity_rel"],
                     inequality_slack=cfg["inequality_slack"],
                     quadrature_rel=cfg["quadrature_rel"])
    reports = debruijn_check(log, dp, tol)
    verdicts = [r.passed for r in reports]
    summary = {
        "debruijn_max_rel_err": max(r.gap for r in reports),
        "debruijn_ok": all(verdicts),
        "rows": len(log.times),
        "steps": state.step_count,
    }
    if dp.beta == 2.0:
        mono = phi_monotonicity_check(log, cfg["inequality_slack"])
        summary["monotonicity_ok"] = mono.passed
        verdicts.append(mono.passed)
    header = "t,mass,M_q,S_q,phi,dSdt_fd,rhs_identity,rel_err"
    lines = [header]
    for row in trajectory_csv_rows(log, dp):
        lines.append(",".join(_fmt17(x) for x in row))
    _emit("\n".join(lines) + "\n", args.output)
    sys.stdout.write(_json_report(summary, cfg))
    return EXIT_PASS if all(verdicts) else EXIT_VERDICT


CRBOUND_DEFAULTS = {
    "model": "gaussian-location", "n": 1, "sigma": 1.0,
    "q": 2.0, "alpha": 2.0, "beta": 2.0, "gamma": 1.0,
    "theta": 0.0, "trials": 0, "grid_count": 4001,
    "inequality_slack": 1e-9, "identity_rel": 1e-6, "quadrature_rel": 1e-8,
}


def cmd_crbound(args) -> int:
    cfg = resolve_config(args, CRBOUND_DEFAULTS)
    name = cfg["model"]
    if name not in MODEL_REGISTRY:
        raise UsageError(f"unknown model {name!r}; registry: {sorted(MODEL_REGISTRY)}")
    if name == "gaussian-location":
        model = MODEL_REGISTRY[name](n=cfg["n"], sigma=cfg["sigma"], count=cfg["grid_count"])
        est = sample_mean_estimator(n=cfg["n"])
        est = EstimatorSpec(est.T, est.h, cfg["alpha"])
    else:
        model = MODEL_REGISTRY[name](q=cfg["q"], alpha=cfg["alpha"], gamma=cfg["gamma"],
                                     count=cfg["grid_count"])
        est = EstimatorSpec(T=lambda coords: coords[0], h=lambda th: float(th[0]),
                            alpha=cfg["alpha"])
    theta = [cfg["theta"]]
    rep = crm_bound_scalar(model, est, theta, _tolerances(cfg))
    payload = {
        "lhs": rep.lhs,
        "rhs": rep.rhs,
        "gap": rep.gap,
        "equality_residual": rep.extras["equality_residual"],
        "c_opt": rep.extras["c_opt"],
        "passed": rep.passed,
        "mc": None,
        "mc_se": None,
    }
    if cfg["trials"]:
        if "seed" not in cfg:
            raise UsageError("--seed is mandatory when trials > 0")
        mc, se = mc_error_moment(model, est, theta, int(cfg["trials"]), int(cfg["seed"]))
        payload["mc"], payload["mc_se"] = mc, se
        payload["mc_consistent"] = bool(mc > rep.rhs - 3.0 * se)
    _emit(_json_report(payload, cfg), args.output)
    return EXIT_PASS if rep.passed else EXIT_VERDICT


QCR_DEFAULTS = {
    "q": 2.0, "alpha": 2.0, "beta": 2.0, "gamma": 1.0, "n": 1, "grid_count": 8001,
    "inequality_slack": 1e-6, "identity_rel": 1e-6, "quadrature_rel": 1e-8,
}


def cmd_qcr(args) -> int:
    cfg = resolve_config(args, QCR_DEFAULTS)
    g = grid_density(QGaussianParams(cfg["q"], cfg["alpha"], cfg["gamma"], cfg["n"]),
                     cfg["grid_count"])
    rep = qcr_product(g, cfg["q"], cfg["alpha"], _tolerances(cfg))
    payload = {"product": rep.lhs, "dim": rep.rhs, "gap": rep.gap, "passed": rep.passed}
    payload.update(rep.extras)
    _emit(_json_report(payload, cfg), args.output)
    return EXIT_PASS if rep.passed else EXIT_VERDICT


STAM_DEFAULTS = {
    "q": 1.0, "alpha": 2.0, "beta": 2.0, "gamma": 0.5, "n": 1,
    "grid_count": 8001, "perturbations": 0,
    "inequality_slack": 1e-4, "identity_rel": 1e-6, "quadrature_rel": 1e-8,
}


def cmd_stam(args) -> int:
    cfg = resolve_config(args, STAM_DEFAULTS)
    p = QGaussianParams(cfg["q"], cfg["alpha"], cfg["gamma"], cfg["n"])
    f = grid_density(p, cfg["grid_count"])
    tol = _tolerances(cfg)
    rep = stam_ratio(f, cfg["q"], cfg["beta"], tol)
    min_perturbed = None
    verdict = rep.passed
    if cfg["perturbations"]:
        if "seed" not in cfg:
            raise UsageError("--seed is mandatory when perturbations > 0")
        rng = np.random.default_rng(int(cfg["seed"]))
        target = moment_alpha(p)
        ratios = []
        amps = amplitude_ladder(5)
        made = 0
        while made < int(cfg["perturbations"]):
            bump = fourier_bump(rng)
            for a in amps:
                if made >= int(cfg["perturbations"]):
                    break
                fp = perturbed_density(p, bump, float(a), "moment", target,
                                       min(cfg["grid_count"], 4001))
                ratios.append(stam_ratio(fp, cfg["q"], cfg["beta"], tol).lhs)
                made += 1
        min_perturbed = min(ratios)
        verdict = verdict and min_perturbed > 1.0
    payload = {
        "value_G": rep.extras["product_ref"],
        "product_f": rep.extras["product_f"],
        "ratio": rep.lhs,
        "min_perturbed": min_perturbed,
        "worst_gap": None if min_perturbed is None else min_perturbed - 1.0,
        "verdict": bool(verdict),
    }
    _emit(_json_report(payload, cfg), args.output)
    return EXIT_PASS if verdict else EXIT_VERDICT


MINIMIZE_DEFAULTS = {
    "constraint": "moment", "q": 2.0, "alpha": 2.0, "beta": 2.0, "target": 0.2,
    "n": 1, "perturbations": 50, "grid_count": 4001,
    "inequality_slack": 1e-6, "identity_rel": 1e-6, "quadrature_rel": 1e-8,
}


def cmd_minimize(args) -> int:
    cfg = resolve_config(args, MINIMIZE_DEFAULTS)
    if "seed" not in cfg:
        raise UsageError("--seed is mandatory for minimize")
    tol = _tolerances(cfg)
    if cfg["constraint"] == "moment":
        rep = min_fisher_fixed_moment(cfg["q"], cfg["alpha"], cfg["target"], cfg["n"],
                                      int(cfg["perturbations"]), int(cfg["seed"]),
                                      cfg["grid_count"], tol)
    elif cfg["constraint"] in ("entropy-power", "entropy_power"):
        rep = min_fisher_fixed_entropy(cfg["q"], cfg["beta"], cfg["target"], cfg["n"],
                                       int(cfg["perturbations"]), int(cfg["seed"]),
                                       cfg["grid_count"], tol)
    else:
        raise UsageError(f"unknown constraint {cfg['constraint']!r} (moment, entropy-power)")
    payload = {
        "value_G": rep.extras["value_G"],
        "min_perturbed": rep.extras["min_perturbed"],
        "worst_gap": rep.extras["worst_gap"],
        "verdict": rep.passed,
        "gap_amplitude_exponent": rep.extras["gap_amplitude_exponent"],
    }
    _emit(_json_report(payload, cfg), args.output)
    return EXIT_PASS if rep.passed else EXIT_VERDICT


REPRODUCE_DEFAULTS = {}


def cmd_reproduce(args) -> int:
    cfg = resolve_config(args, REPRODUCE_DEFAULTS)
    suite = AcceptanceSuite()
    results = suite.run_all()
    header = f"# config: seed={suite.seed} threads={cfg['threads']}\n"
    _emit(header + render_summary(results), args.output)
    return EXIT_PASS if all(r.passed for r in results) else EXIT_VERDICT


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qfisher",
        description="q-entropies, generalized Fisher information, q-Gaussians, "
                    "nonlinear diffusion, and their identity/inequality checks.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p):
        p.add_argument("--config", help="flat key = value configuration file")
        p.add_argument("--output", "-o", help="report path (default stdout)")
        p.add_argument("--seed", type=int, help="RNG seed (mandatory for stochastic runs)")
        p.add_argument("--identity-rel", dest="identity_rel", type=float)
        p.add_argument("--inequality-slack", dest="inequality_slack", type=float)
        p.add_argument("--quadrature-rel", dest="quadrature_rel", type=float)

    p = sub.add_parser("info", help="scalar information functionals of a density")
    add_common(p)
    p.add_argument("--family", choices=["uniform", "gaussian", "qgaussian"])
    for flag, typ in (("--q", float), ("--alpha", float), ("--beta", float),
                      ("--gamma", float), ("--sigma", float), ("--lo", float),
                      ("--hi", float)):
        p.add_argument(flag, type=typ)
    p.add_argument("--n", type=int)
    p.add_argument("--grid-count", dest="grid_count", type=int)
    p.set_defaults(handler=cmd_info)

    p = sub.add_parser("diffuse", help="doubly nonlinear diffusion run + de Bruijn check")
    add_common(p)
    for flag, typ in (("--m", float), ("--beta", float), ("--alpha", float),
                      ("--t0", float), ("--t-end", float), ("--sigma0", float),
                      ("--grid-lo", float), ("--grid-hi", float)):
        p.add_argument(flag, dest=flag.strip("-").replace("-", "_"), type=typ)
    p.add_argument("--n", type=int)
    p.add_argument("--init", choices=["barenblatt", "gaussian"])
    p.add_argument("--grid-count", dest="grid_count", type=int)
    p.add_argument("--n-logs", dest="n_logs", type=int)
    p.set_defaults(handler=cmd_diffuse)

    p = sub.add_parser("crbound", help="generalized Cramer-Rao bound report")
    add_common(p)
    p.add_argument("--model", choices=sorted(MODEL_REGISTRY))
    for flag, typ in (("--sigma", float), ("--q", float), ("--alpha", float),
                      ("--beta", float), ("--gamma", float), ("--theta", float)):
        p.add_argument(flag, type=typ)
    p.add_argument("--n", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--grid-count", dest="grid_count", type=int)
    p.set_defaults(handler=cmd_crbound)

    p = sub.add_parser("qcr", help="q-Cramer-Rao product report")
    add_common(p)
    for flag, typ in (("--q", float), ("--alpha", float), ("--beta", float),
                      ("--gamma", float)):
        p.add_argument(flag, type=typ)
    p.add_argument("--n", type=int)
    p.add_argument("--grid-count", dest="grid_count", type=int)
    p.set_defaults(handler=cmd_qcr)

    p = sub.add_parser("stam", help="generalized Stam inequality report")
    add_common(p)
    for flag, typ in (("--q", float), ("--alpha", float), ("--beta", float),
                      ("--gamma", float)):
        p.add_argument(flag, type=typ)
    p.add_argument("--n", type=int)
    p.add_argument("--grid-count", dest="grid_count", type=int)
    p.add_argument("--perturbations", type=int)
    p.set_defaults(handler=cmd_stam)

    p = sub.add_parser("minimize", help="minimum-Fisher variational certification")
    add_common(p)
    p.add_argument("--constraint", choices=["moment", "entropy-power"])
    for flag, typ in (("--q", float), ("--alpha", float), ("--beta", float),
                      ("--target", float)):
        p.add_argument(flag, type=typ)
    p.add_argument("--n", type=int)
    p.add_argument("--perturbations", type=int)
    p.add_argument("--grid-count", dest="grid_count", type=int)
    p.set_defaults(handler=cmd_minimize)

    p = sub.add_parser("reproduce", help="run the full acceptance suite")
    add_common(p)
    p.set_defaults(handler=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.handler(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, StabilityError, ValueError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
