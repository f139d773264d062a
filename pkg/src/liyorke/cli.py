"""Batch experiment runner.

Every subcommand writes one CSV table (to ``--output`` or stdout) and one
summary line (stdout, or stderr when the CSV goes to stdout).  Parameters come
from defaults, then an optional ``--config`` file of ``key=value`` lines, then
command-line flags.

Exit codes: 0 success, 1 invalid configuration, 2 precision exhausted,
3 numerical range error.  ``LIYORKE_PRECISION`` sets the default working
precision in decimal digits.
"""

import argparse
import csv
from dataclasses import dataclass
import math
import os
import sys

import numpy as np
from scipy.special import log_expit

from liyorke import diophantine, dynamics, operator, plane, scrambled
from liyorke.errors import ConfigError, DomainError, NumericalRangeError, PrecisionExhausted

PRECISION_ENV = "LIYORKE_PRECISION"
DEFAULT_PRECISION = 32


def _int_list(text):
    return tuple(int(t) for t in str(text).split(",") if t.strip())


def _float_list(text):
    return tuple(float(t) for t in str(text).split(",") if t.strip())


def _grid(text):
    parts = str(text).lower().split("x")
    if len(parts) != 2:
        raise ValueError("grid must look like RADIALxANGULAR, e.g. 100x100")
    return int(parts[0]), int(parts[1])


def _optional_float(text):
    return None if text in (None, "", "none") else float(text)


SYSTEMS = {k.value: k for k in dynamics.SystemKind if k not in
           (dynamics.SystemKind.OPERATOR, dynamics.SystemKind.OPERATOR_INVERSE)}

# name -> (parser, default, help)
COMMANDS = {
    "orbit": {
        "system": (str, "disk-f", "disk-f, disk-f-inv, plane-g or plane-g-inv"),
        "modulus": (float, 0.5, "initial modulus"),
        "angle": (float, 0.0, "initial angle in turns"),
        "horizon": (int, 20, "last iterate"),
        "stride": (int, 1, "sampling stride"),
    },
    "pair": {
        "system": (str, "disk-f", "disk-f, disk-f-inv, plane-g or plane-g-inv"),
        "family": (str, "certified", "certified or random"),
        "offsets": (_int_list, (0, 1), "two lattice offsets (certified) or member indices (random)"),
        "base": (str, "sqrt2", "lattice step: sqrt2, sqrt3, sqrt5, golden or e"),
        "center": (float, 0.0, "log-odds of offset 0"),
        "seed": (int, 0, "seed of the random family"),
        "horizon": (int, 10_000, "uniform sampling horizon"),
        "stride": (int, 1, "sampling stride"),
        "search_bound": (int, diophantine.DEFAULT_SEARCH_BOUND, "largest witness index"),
        "delta_low": (float, dynamics.DELTA_LOW, "liminf threshold"),
        "delta_high": (float, dynamics.DELTA_HIGH, "limsup threshold"),
    },
    "scrambled": {
        "family": (str, "certified", "certified or random"),
        "count": (int, 5, "family size"),
        "base": (str, "sqrt2", "lattice step"),
        "center": (float, 0.0, "log-odds of the first point"),
        "seed": (int, 0, "seed of the random family"),
        "horizon": (int, 10_000, "uniform sampling horizon"),
        "search_bound": (int, diophantine.DEFAULT_SEARCH_BOUND, "largest witness index"),
        "delta_low": (float, dynamics.DELTA_LOW, "liminf threshold"),
        "delta_high": (float, dynamics.DELTA_HIGH, "limsup threshold"),
    },
    "conjugacy": {
        "grid": (_grid, (100, 100), "radial x angular grid size"),
        "rmax": (float, 0.99, "largest grid modulus"),
        "transport_points": (int, 100, "random points for the orbit transport check"),
        "transport_n": (int, 30, "largest iterate in the transport check"),
        "seed": (int, 0, "seed for the transport points"),
    },
    "operator": {
        "eps": (float, 0.1, "base epsilon"),
        "C": (_float_list, (2.0, 4.0, 8.0, 16.0), "increasing constants C_i"),
        "blocks": (int, 4, "number of blocks K"),
        "probe": (str, "uniform", "first, last or uniform"),
        "n_max": (int, 2000, "length of the transient-growth profile"),
        "inverse_n": (int, 2000, "power of T^{-1} applied to e_1"),
    },
    "cf": {
        "theta": (str, "sqrt2", "named constant, p/q, or decimal"),
        "error": (_optional_float, None, "absolute error of a decimal theta"),
        "depth": (int, 6, "number of convergents"),
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    parameters: dict
    output_path: str
    precision_digits: int


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"cli: {message}")


def build_parser():
    parser = _Parser(prog="liyorke", description="Li-Yorke chaos experiments")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, params in COMMANDS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", help="file of key=value lines")
        p.add_argument("-o", "--output", default=None, help="CSV path, '-' for stdout")
        p.add_argument("--precision", default=None,
                       help=f"working precision in digits (default ${PRECISION_ENV} or {DEFAULT_PRECISION})")
        for key, (_, default, text) in params.items():
            p.add_argument("--" + key.replace("_", "-"), dest=key, default=None,
                           help=f"{text} (default: {default})")
    return parser


def read_config_file(path):
    """Parse ``key=value`` lines; blank lines and ``#`` comments are skipped."""
    values = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cli: cannot read config file {path!r}: {exc}") from None
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"cli: {path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _convert(command, key, raw):
    conv = COMMANDS[command][key][0]
    if isinstance(raw, str) or conv is _optional_float:
        try:
            return conv(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"cli: parameter {key!r} of {command!r}: {exc}") from None
    return raw


def resolve_config(args):
    command = args.command
    params = {k: v[1] for k, v in COMMANDS[command].items()}
    output = "-"
    precision = os.environ.get(PRECISION_ENV, DEFAULT_PRECISION)
    if args.config:
        for key, value in read_config_file(args.config).items():
            if key == "command":
                if value != command:
                    raise ConfigError(f"cli: config is for {value!r}, not {command!r}")
            elif key == "output":
                output = value
            elif key == "precision":
                precision = value
            elif key in params:
                params[key] = _convert(command, key, value)
            else:
                raise ConfigError(f"cli: unknown parameter {key!r} for {command!r}")
    for key in params:
        value = getattr(args, key)
        if value is not None:
            params[key] = _convert(command, key, value)
    if args.output is not None:
        output = args.output
    if args.precision is not None:
        precision = args.precision
    try:
        precision = int(precision)
    except ValueError:
        raise ConfigError(f"cli: parameter 'precision': {precision!r} is not an integer") from None
    if precision < 1:
        raise ConfigError("cli: parameter 'precision' must be positive")
    return ExperimentConfig(command, params, output, precision)


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _system(name, precision):
    try:
        kind = SYSTEMS[name]
    except KeyError:
        raise ConfigError(f"cli: parameter 'system': unknown system {name!r}; "
                          f"choose from {sorted(SYSTEMS)}") from None
    return dynamics.SystemHandle(kind, precision_digits=precision)


def _family(p, size):
    if p["family"] == "certified":
        offsets = p.get("offsets") or tuple(range(size))
        return scrambled.certified_family(len(offsets), p["base"], p["center"], offsets)
    if p["family"] == "random":
        return scrambled.random_family(size, p["seed"])
    raise ConfigError(f"cli: parameter 'family': expected certified or random, got {p['family']!r}")


def run_orbit(cfg):
    p = cfg.parameters
    system = _system(p["system"], cfg.precision_digits)
    z = plane.PlanePoint.from_polar(p["modulus"], p["angle"], system.space)
    ns = dynamics.sample_indices(p["horizon"], p["stride"])
    radial, angle = plane.orbit_coordinates(z, ns, system.sign, cfg.precision_digits)
    try:
        c = plane.coordinates_to_complex(radial, angle, system.space)
    except NumericalRangeError as exc:
        raise NumericalRangeError(
            f"parameter 'horizon': {p['system']} state overflows at n = {int(ns[exc.index])}",
            index=int(ns[exc.index])) from None
    if system.space is plane.Space.DISK:
        log_mod = np.where(np.isneginf(radial), -np.inf, log_expit(radial))
    else:
        log_mod = radial
    rows = list(zip(ns.tolist(), np.abs(c), log_mod, angle, c.real, c.imag))
    last = rows[-1]
    return (("n", "modulus", "log_modulus", "angle_turns", "x", "y"), rows,
            f"system={p['system']} n={last[0]} modulus={float(last[1])!r} "
            f"angle_turns={float(last[3])!r}")


def run_pair(cfg):
    p = cfg.parameters
    if len(p["offsets"]) != 2:
        raise ConfigError("cli: parameter 'offsets' needs exactly two integers")
    system = _system(p["system"], cfg.precision_digits)
    if p["family"] == "certified":
        fam, (j, k) = _family(p, 2), (0, 1)
    else:
        fam, (j, k) = _family(p, max(p["offsets"]) + 1), p["offsets"]
    theta = scrambled.pairwise_theta(fam, j, k)
    near_zero, near_half = diophantine.witness_indices(theta, p["search_bound"],
                                                       dps=max(diophantine.DEFAULT_DPS, cfg.precision_digits))
    hints = sorted(set(near_zero.indices) | set(near_half.indices))
    x, y = fam.disk_point(j), fam.disk_point(k)
    if system.space is plane.Space.PLANE:
        x, y = plane.h_apply(x), plane.h_apply(y)
    v = dynamics.liyorke_verdict(system, x, y, p["horizon"], hints, p["delta_low"],
                                 p["delta_high"], p["stride"])
    rows = []
    if v.series is not None:
        zero, half = set(near_zero.indices), set(near_half.indices)
        for row, (n, d) in enumerate(zip(v.series.indices, v.series.values)):
            n = int(n)
            kind = "+".join(name for name, s in (("near_zero", zero), ("near_half", half)) if n in s)
            rows.append((row, n, float(d), bool(kind), kind))
    summary = (f"verdict={v.verdict.value} liminf_estimate={v.liminf_estimate!r} "
               f"limsup_estimate={v.limsup_estimate!r} theta={theta.label} reason={v.reason}")
    return ("index", "n", "distance", "is_witness", "witness_kind"), rows, summary


def run_scrambled(cfg):
    p = dict(cfg.parameters, offsets=None)
    fam = _family(p, p["count"])
    rows, tally = [], {v: 0 for v in dynamics.Verdict}
    for j, k in fam.pairs():
        rep = scrambled.pair_verdict(fam, j, k, p["horizon"], p["search_bound"],
                                     delta_low=p["delta_low"], delta_high=p["delta_high"])
        v = rep.verdict
        tally[v.verdict] += 1
        rows.append((j, k, fam.phi_values[j], fam.phi_values[k], float(rep.theta.value),
                     len(rep.near_zero), len(rep.near_half), v.liminf_estimate,
                     v.limsup_estimate, v.verdict.value))
    summary = f"pairs={len(rows)} " + " ".join(f"{v.value}={c}" for v, c in tally.items())
    return (("j", "k", "phi_j", "phi_k", "theta", "near_zero_count", "near_half_count",
             "liminf_estimate", "limsup_estimate", "verdict"), rows, summary)


def run_conjugacy(cfg):
    p = cfg.parameters
    nr, na = p["grid"]
    z, res = plane.conjugacy_residuals(nr, na, p["rmax"])
    rows = [(float(abs(zz)), float(np.angle(zz) / (2 * math.pi) % 1.0), float(r))
            for zz, r in zip(z.ravel(), res.ravel())]
    rng = np.random.default_rng(p["seed"])
    pts = [plane.PlanePoint.from_polar(r, a, plane.Space.DISK)
           for r, a in zip(rng.uniform(0.0, p["rmax"], p["transport_points"]),
                           rng.uniform(0.0, 1.0, p["transport_points"]))]
    transport = plane.orbit_transport_residual(pts, p["transport_n"], cfg.precision_digits)
    summary = f"max_residual={float(res.max())!r} transport_residual={transport!r}"
    return ("modulus", "angle_turns", "residual"), rows, summary


def run_operator(cfg):
    p = cfg.parameters
    sched = operator.build_schedule(p["eps"], p["C"], p["blocks"])
    rows = []
    for b, prm in zip(sched.block_matrices(), sched.blocks):
        prof = operator.transient_growth_profile(b, p["probe"], p["n_max"])
        e1 = np.zeros(b.dim)
        e1[0] = 1.0
        inv = operator.block_power_apply(b, e1, -p["inverse_n"])
        rows.append((prm.i, prm.eps_i, prm.L_i, prm.m_i, prm.n_i, prof.argmax,
                     math.exp(prof.log_max), operator.forward_decay_horizon(b),
                     inv.log_norm()))
    summary = "blocks={} ".format(len(rows)) + " ".join(f"L_{r[0]}={r[2]}" for r in rows)
    return (("block", "eps_i", "L_i", "m_i", "n_i", "peak_n", "peak_norm", "decay_n",
             "inverse_log_norm_e1"), rows, summary)


def run_cf(cfg):
    p = cfg.parameters
    dps = max(diophantine.DEFAULT_DPS, cfg.precision_digits)
    try:
        theta = diophantine.RealWithError.parse(p["theta"], p["error"], dps)
    except (ValueError, ArithmeticError) as exc:
        raise ConfigError(f"cli: parameter 'theta': {exc}") from None
    if p["depth"] < 1:
        raise ConfigError("cli: parameter 'depth' must be at least 1")
    cf = diophantine.continued_fraction(theta, p["depth"] - 1, dps)
    convs = diophantine.convergents(cf, dps)
    terms = cf.terms()
    rows = [(c.k, terms[c.k], c.p, c.q, float(c.signed_err)) for c in convs]
    summary = f"theta={theta.label} convergents={len(rows)} certified_depth={cf.certified_depth}"
    return ("k", "a_k", "p", "q", "signed_err"), rows, summary


RUNNERS = {
    "orbit": run_orbit,
    "pair": run_pair,
    "scrambled": run_scrambled,
    "conjugacy": run_conjugacy,
    "operator": run_operator,
    "cf": run_cf,
}


def write_csv(fh, header, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) for x in row])


def _origin(exc):
    tb = exc.__traceback__
    name = "liyorke"
    while tb is not None:
        mod = tb.tb_frame.f_globals.get("__name__", "")
        if mod.startswith("liyorke"):
            name = mod
        tb = tb.tb_next
    return name


def run(argv=None):
    """Run one experiment; returns the process exit code."""
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        header, rows, summary = RUNNERS[cfg.command](cfg)
        if cfg.output_path == "-":
            write_csv(sys.stdout, header, rows)
            print(summary, file=sys.stderr)
        else:
            with open(cfg.output_path, "w", newline="") as fh:
                write_csv(fh, header, rows)
            print(summary)
        return 0
    except (ConfigError, DomainError) as exc:
        print(f"error [{_origin(exc)}]: {exc}", file=sys.stderr)
        return 1
    except PrecisionExhausted as exc:
        print(f"precision exhausted [{_origin(exc)}]: {exc}", file=sys.stderr)
        return 2
    except NumericalRangeError as exc:
        print(f"numerical range error [{_origin(exc)}]: {exc}", file=sys.stderr)
        return 3


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
