"""Batch command-line front end.

Exit codes: 0 success, 1 usage/config error, 2 numerical failure,
3 a certificate or verified property does not hold.
"""
import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, certificates, initial, operators
from .config import EXPERIMENTS, PRESETS, ConfigError, load_config
from .field import SpectralField, lp_norm
from .solver import GalerkinSystem, NumericalInstabilityError, evolve, write_csv

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_FAILS = 0, 1, 2, 3


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(path, data):
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True, default=_json_default,
                                     allow_nan=True) + "\n")


def build_initial(cfg, which="initial", seed=None):
    choice = getattr(cfg, which)
    if choice is None:
        choice = cfg.initial
    seed = cfg.seed if seed is None else seed
    domain = cfg.domain
    if choice == "random":
        u = initial.random_field(domain, cfg.cutoff, seed, amplitude=cfg.amplitude)
    elif choice == "taylor_green":
        u = initial.taylor_green(domain, cfg.cutoff, cfg.amplitude)
    elif choice == "single_mode":
        mode = cfg.mode
        if mode is None:
            mode = [0] * (cfg.dim - 1) + [1]
            if cfg.flavor == "freeslip":
                mode = [0] * (cfg.dim - 2) + [1, 1]
        u = initial.single_mode(domain, cfg.cutoff, mode, cfg.amplitude)
    else:
        path = Path(choice)
        if not path.is_absolute() and cfg.source:
            path = Path(cfg.source).parent / path
        if not path.exists():
            raise ConfigError(f"{cfg.source}: {which}: not a preset {PRESETS} "
                              f"and no such file: {choice}")
        u = SpectralField.load(path)
        if u.domain != domain:
            raise ConfigError(f"{cfg.source}: {which}: field file domain does not match config")
        u = u.with_cutoff(cfg.cutoff, solenoidal=True)
    if cfg.target_vnorm is not None:
        vn = u.v_norm()
        if vn > 0:
            u = u * (cfg.target_vnorm / vn)
    return u


def _rates(system):
    mu = min(system.chi, system.lambda_min)
    return {
        "chi": system.chi,
        "lambda_min": system.lambda_min,
        "l2": 2.0 * system.nu * mu,
        "v": system.nu * mu,
        "l2_chi": 2.0 * system.nu * system.chi,
        "v_chi": system.nu * system.chi,
    }


def _header(cfg, system=None):
    head = {"experiment": cfg.experiment, "config_hash": cfg.digest(), "config": cfg.to_dict()}
    if system is not None:
        head["guaranteed_rates"] = _rates(system)
    return head


def _run_trajectory(cfg, system, u0, out):
    rec, final = evolve(system, u0, cfg.T, cfg.dt, cfg.scheme, cfg.sample_every)
    rec.to_csv(out / "trajectory.csv")
    rate = _rates(system)["l2"]
    bound = rec.l2_sq[0] * np.exp(-rate * rec.times)
    write_csv(out / "plot.csv", ("t", "bound", "value"), zip(rec.times, bound, rec.l2_sq))
    return rec, final


def cmd_simulate(cfg, out):
    system = GalerkinSystem(cfg.domain, cfg.cutoff, cfg.nu)
    u0 = build_initial(cfg)
    rec, final = _run_trajectory(cfg, system, u0, out)
    report = _header(cfg, system)
    report.update({
        "samples": len(rec),
        "dt": rec.dt,
        "final": {"t": rec.times[-1], "l2_sq": rec.l2_sq[-1], "v_sq": rec.v_sq[-1],
                  "a_sq": rec.a_sq[-1], "ut_sq": rec.ut_sq[-1]},
        "initial": {"l2_sq": rec.l2_sq[0], "v_sq": rec.v_sq[0]},
        "max_abs_energy_residual": float(np.max(np.abs(rec.step_residuals))),
    })
    write_json(out / "report.json", report)
    return EXIT_OK


def cmd_verify_decay(cfg, out):
    system = GalerkinSystem(cfg.domain, cfg.cutoff, cfg.nu)
    u0 = build_initial(cfg)
    rec, _ = _run_trajectory(cfg, system, u0, out)
    decay = analysis.verify_decay(rec, system, cfg.envelope_tol)
    cert = certificates.check_existence_condition(cfg.nu, u0, cfg.c1)
    report = _header(cfg, system)
    report["decay"] = decay.to_dict()
    report["certificate"] = cert.to_dict()
    write_json(out / "report.json", report)
    return EXIT_OK if decay.envelope_ok and decay.v_envelope_ok else EXIT_FAILS


def cmd_perturbation(cfg, out):
    system = GalerkinSystem(cfg.domain, cfg.cutoff, cfg.nu)
    u1 = build_initial(cfg)
    seed2 = cfg.seed2 if cfg.seed2 is not None else cfg.seed + 1
    u2 = build_initial(cfg, "initial2", seed2)
    rep = analysis.perturbation_experiment(system, u1, u2, cfg.T, cfg.dt, cfg.scheme,
                                           cfg.sample_every, cfg.contraction_tol)
    w = rep.difference_sq
    write_csv(out / "trajectory.csv", ("t", "difference_sq"), zip(rep.times, w))
    write_csv(out / "plot.csv", ("t", "bound", "value"),
              zip(rep.times, np.full_like(w, w[0]), w))
    report = _header(cfg, system)
    report["contraction"] = rep.to_dict()
    report["certificates"] = [
        certificates.check_existence_condition(cfg.nu, u1, cfg.c1).to_dict(),
        certificates.check_existence_condition(cfg.nu, u2, cfg.c1).to_dict(),
    ]
    write_json(out / "report.json", report)
    return EXIT_OK if rep.nonincreasing else EXIT_FAILS


def cmd_certify(cfg, out):
    u0 = build_initial(cfg)
    existence = certificates.check_existence_condition(cfg.nu, u0, cfg.c1)
    regularity = certificates.check_regularity_condition(cfg.nu, u0)
    chosen = existence if cfg.certificate == "existence" else regularity
    report = _header(cfg)
    report["guaranteed_rates"] = existence.guaranteed_rates
    report["existence"] = existence.to_dict()
    report["regularity"] = regularity.to_dict()
    report["holds"] = chosen.holds
    write_json(out / "report.json", report)
    return EXIT_OK if chosen.holds else EXIT_FAILS


def cmd_estimate_c1(cfg, out):
    res = certificates.search_C1(cfg.domain, cfg.cutoff, cfg.iterations, cfg.restarts,
                                 cfg.seed, cfg.c1_solenoidal)
    report = _header(cfg)
    report.update(res.to_dict())
    report["note"] = "value is a lower bound on the embedding constant, not its true value"
    write_json(out / "report.json", report)
    write_csv(out / "plot.csv", ("cutoff", "value"),
              ((p["cutoff"], p["value"]) for p in res.per_cutoff))
    return EXIT_OK


def check_inequalities(domain, cutoff, nu, samples, seed, c1=3.0):
    """Randomized checks of the static inequalities on one truncation."""
    rng = np.random.default_rng(seed)
    lam = GalerkinSystem(domain, cutoff, nu).lambda_min
    out = {}

    ratios = []
    for L in domain.sides:
        for _ in range(samples):
            prof = rng.standard_normal(4 * cutoff)
            ratios.append(analysis.steklov_check(prof, L) / (np.pi / L) ** 2)
    out["steklov"] = {"min_ratio_over_bound": min(ratios), "holds": min(ratios) >= 1 - 1e-12}

    chain_ok = True
    l4_ratio = 0.0
    tri_ratio = 0.0
    skew = 0.0
    dual = 0.0
    shift_ok = True
    for _ in range(samples):
        seeds = rng.integers(0, 2**63, size=3)
        u, v, w = (initial.random_field(domain, cutoff, int(s)) for s in seeds)
        chain_ok &= lam * u.l2_sq() <= u.v_sq() * (1 + 1e-12)
        chain_ok &= lam * u.l2_norm() <= u.a_norm() * (1 + 1e-12)
        l4_ratio = max(l4_ratio, lp_norm(u, 4) / u.v_norm())
        rep = operators.trilinear_bound_check(u, v, w)
        tri_ratio = max(tri_ratio, rep["ratio"])
        scale = u.v_norm() * v.v_norm() ** 2
        skew = max(skew, abs(operators.b_form(u, v, v)) / scale)
        bc = operators.b_form(u, v, w)
        bq = operators.b_form(u, v, w, "quadrature")
        dual = max(dual, abs(bc - bq) / max(1.0, abs(bc)))
        for m in (0, 1):
            shift_ok &= operators.stokes_regularity_check(u, nu, m)["holds"]
    out["norm_chain"] = {"lambda_min": lam, "holds": bool(chain_ok)}
    out["l4_embedding"] = {"max_ratio": l4_ratio, "constant": c1, "holds": l4_ratio <= c1}
    out["trilinear"] = {"max_ratio": tri_ratio, "holds": tri_ratio <= 1.0,
                        "constant_applies": domain.dim == 4}
    out["skew_symmetry"] = {"max_relative": skew, "holds": skew <= 1e-12}
    out["dual_path"] = {"max_relative": dual, "holds": dual <= 1e-10}
    out["stokes_shift"] = {"holds": bool(shift_ok)}
    out["all_hold"] = all(bool(v["holds"]) for v in out.values() if isinstance(v, dict))
    return out


def cmd_check_inequalities(cfg, out):
    system = GalerkinSystem(cfg.domain, cfg.cutoff, cfg.nu)
    report = _header(cfg, system)
    report["checks"] = check_inequalities(cfg.domain, cfg.cutoff, cfg.nu, cfg.samples,
                                          cfg.seed, cfg.c1)
    write_json(out / "report.json", report)
    return EXIT_OK if report["checks"]["all_hold"] else EXIT_FAILS


COMMANDS = {
    "simulate": cmd_simulate,
    "verify-decay": cmd_verify_decay,
    "perturbation": cmd_perturbation,
    "certify": cmd_certify,
    "estimate-c1": cmd_estimate_c1,
    "check-inequalities": cmd_check_inequalities,
}
assert tuple(COMMANDS) == EXPERIMENTS


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nsgalerkin",
        description="Spectral Galerkin Navier-Stokes experiments and estimate checks.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = load_config(args.config, args.command, args.seed)
        out = Path(args.out or cfg.out or ".")
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalInstabilityError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
