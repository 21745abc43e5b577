"""Command-line front end: synth, detect, compare, roc, surface, verify.

One binary with subcommands sharing config parsing and file formats. Flags
override an optional key=value config file (--config); every run echoes its
fully-resolved configuration to stderr. stdout carries only data.

Exit codes: 0 ok, 1 file/format error, 2 invalid configuration (also used
by argparse), 3 singular statistics, 4 degenerate target, 5 gradient ascent
did not converge, 6 degenerate mask, 7 dimension mismatch, 8 verify found a
violated tolerance.
"""

import argparse
import os
import sys

import numpy as np

from . import io as tio
from ._kernels import BACKEND, uniform_stream
from .detectors import cem, ce_detector, g_gradient, g_value, mf, verify_equivalence
from .errors import (ConfigInvalid, DegenerateMask, DegenerateTarget,
                     DimensionMismatch, Singular, TdtkError)
from .evaluate import detect, r_squared, roc
from .solver import (basic_equation_residual, g_surface_grid, gradient_ascent,
                     hyperplane_line, plateau_value, solve_basic_equation)
from .stats import compute_stats
from .synth import DEFAULT_SEED, SynthConfig, generate

_FMT = "%.17g"


class AscentFailed(TdtkError):
    pass


class VerifyFailed(TdtkError):
    pass


_EXIT_CODES = (
    (ConfigInvalid, 2),
    (Singular, 3),
    (DegenerateTarget, 4),
    (AscentFailed, 5),
    (DegenerateMask, 6),
    (DimensionMismatch, 7),
    (VerifyFailed, 8),
)


def _parse_vector(text, what):
    try:
        return np.array([float(t) for t in text.split(",")])
    except ValueError as exc:
        raise ConfigInvalid(f"{what}: cannot parse vector {text!r}") from exc


def _parse_matrix(text, what):
    try:
        return np.array([[float(t) for t in row.split(",")]
                         for row in text.split(";")])
    except ValueError as exc:
        raise ConfigInvalid(f"{what}: cannot parse matrix {text!r}") from exc


def _parse_range(text, what):
    parts = text.split(":")
    if len(parts) != 2:
        raise ConfigInvalid(f"{what}: expected lo:hi, got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise ConfigInvalid(f"{what}: cannot parse {text!r}") from exc
    if not lo < hi:
        raise ConfigInvalid(f"{what}: need lo < hi, got {text!r}")
    return lo, hi


def _read_config_file(path):
    values = {}
    try:
        with open(path, "r", encoding="ascii") as f:
            lines = f.read().splitlines()
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigInvalid(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = body.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def _resolve(args, keys):
    """Merge flag values over config-file values for the given keys."""
    file_values = _read_config_file(args.config) if args.config else {}
    unknown = set(file_values) - set(keys)
    if unknown:
        print(f"config: ignoring keys not used by this command: "
              f"{', '.join(sorted(unknown))}", file=sys.stderr)
    resolved = {}
    for key in keys:
        flag = getattr(args, key, None)
        resolved[key] = file_values.get(key) if flag is None else flag
    return resolved


def _echo(command, resolved):
    pairs = " ".join(f"{k}={resolved[k]}" for k in sorted(resolved)
                     if resolved[k] is not None)
    print(f"config {command}: {pairs} [backend={BACKEND}]", file=sys.stderr)


def _require(resolved, key):
    if resolved.get(key) is None:
        raise ConfigInvalid(f"missing required option --{key.replace('_', '-')}")
    return resolved[key]


def _as_int(value, what):
    try:
        return int(value)
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(f"{what}: expected integer, got {value!r}") from exc


def _as_float(value, what):
    try:
        return float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(f"{what}: expected number, got {value!r}") from exc


def _load_inputs(resolved, ridge):
    scene = tio.read_scene(_require(resolved, "scene"))
    d = tio.read_spectrum(_require(resolved, "target"))
    stats = compute_stats(scene, ridge=ridge)
    return scene, d, stats


# ---------------------------------------------------------------- synth

_SYNTH_KEYS = ("seed", "out", "mask", "target", "bands", "bg_width",
               "bg_height", "bg_mean", "bg_cov", "tgt_width", "tgt_height",
               "tgt_mean", "tgt_cov", "tgt_position", "config")


def _synth_config(resolved):
    bands = _as_int(resolved.get("bands") or 3, "bands")
    if bands < 1:
        raise ConfigInvalid("bands must be positive")

    def vec(key, default):
        raw = resolved.get(key)
        return default if raw is None else _parse_vector(raw, key)

    def mat(key, default):
        raw = resolved.get(key)
        return default if raw is None else _parse_matrix(raw, key)

    bg_cov_default = (np.diag([1.0, 1.0, 0.05]) if bands == 3 else np.eye(bands))
    tgt_mean_default = np.zeros(bands)
    tgt_mean_default[-1] = 1.0
    position = resolved.get("tgt_position") or "centered"
    if position != "centered":
        parts = position.split(",")
        if len(parts) != 2:
            raise ConfigInvalid(f"tgt_position must be 'centered' or x,y, got {position!r}")
        position = (_as_int(parts[0], "tgt_position"), _as_int(parts[1], "tgt_position"))
    return SynthConfig(
        seed=_as_int(resolved.get("seed") or DEFAULT_SEED, "seed"),
        bg_size=(_as_int(resolved.get("bg_width") or 50, "bg_width"),
                 _as_int(resolved.get("bg_height") or 50, "bg_height")),
        bands=bands,
        bg_mean=vec("bg_mean", np.zeros(bands)),
        bg_cov=mat("bg_cov", bg_cov_default),
        tgt_size=(_as_int(resolved.get("tgt_width") or 5, "tgt_width"),
                  _as_int(resolved.get("tgt_height") or 5, "tgt_height")),
        tgt_mean=vec("tgt_mean", tgt_mean_default),
        tgt_cov=mat("tgt_cov", 0.01 * np.eye(bands)),
        tgt_position=position,
    )


def cmd_synth(args):
    resolved = _resolve(args, _SYNTH_KEYS)
    _echo("synth", resolved)
    config = _synth_config(resolved)
    scene, mask, d = generate(config)
    tio.write_scene(scene, _require(resolved, "out"))
    if resolved.get("mask"):
        tio.write_mask(mask, resolved["mask"])
    if resolved.get("target"):
        tio.write_spectrum(d, resolved["target"])
    return 0


# --------------------------------------------------------------- detect

_DETECT_KEYS = ("scene", "target", "method", "ridge", "out", "config")
_METHODS = ("cem", "mf", "ce-closed", "ce-ascent")


def _build_detector(stats, d, method):
    if method == "cem":
        return cem(stats, d)
    if method == "mf":
        return mf(stats, d)
    if method == "ce-closed":
        mu = solve_basic_equation(stats, d, "minimal_shift").mu_star
        return ce_detector(stats, d, mu)
    if method == "ce-ascent":
        trace = gradient_ascent(stats, d, np.zeros(stats.bands))
        if not trace.converged:
            raise AscentFailed(
                f"gradient ascent did not converge in {trace.config.max_iters} iterations")
        residual = basic_equation_residual(stats, d, trace.mu)
        if abs(residual) > 1e-6:
            raise AscentFailed(f"converged origin misses the hyperplane "
                               f"(residual {residual:.3e})")
        return ce_detector(stats, d, trace.mu)
    raise ConfigInvalid(f"method must be one of {', '.join(_METHODS)}; got {method!r}")


def cmd_detect(args):
    resolved = _resolve(args, _DETECT_KEYS)
    _echo("detect", resolved)
    ridge = _as_float(resolved.get("ridge") or 0.0, "ridge")
    scene, d, stats = _load_inputs(resolved, ridge)
    method = _require(resolved, "method")
    detector = _build_detector(stats, d, method)
    dmap = detect(scene, detector)
    tio.write_detection_map(dmap, _require(resolved, "out"))
    print(f"{method},{_FMT % detector.energy}")
    return 0


# -------------------------------------------------------------- compare

_COMPARE_KEYS = ("scene", "target", "ridge", "out", "config")


def cmd_compare(args):
    resolved = _resolve(args, _COMPARE_KEYS)
    _echo("compare", resolved)
    ridge = _as_float(resolved.get("ridge") or 0.0, "ridge")
    scene, d, stats = _load_inputs(resolved, ridge)
    outdir = _require(resolved, "out")
    os.makedirs(outdir, exist_ok=True)

    detectors = {m: _build_detector(stats, d, m) for m in ("cem", "mf", "ce-closed")}
    maps = {m: detect(scene, det) for m, det in detectors.items()}

    tio.write_table(os.path.join(outdir, "energies.csv"), ("method", "energy"),
                    ((m, det.energy) for m, det in detectors.items()))
    pairs = (("mf", "ce-closed"), ("cem", "ce-closed"), ("cem", "mf"))
    tio.write_table(os.path.join(outdir, "r_squared.csv"),
                    ("method_a", "method_b", "r_squared"),
                    ((a, b, r_squared(maps[a], maps[b])) for a, b in pairs))
    for a, b, name in (("mf", "ce-closed", "scatter_mf_ce.csv"),
                       ("cem", "ce-closed", "scatter_cem_ce.csv")):
        tio.write_table(os.path.join(outdir, name), (a, b),
                        zip(maps[a].scores, maps[b].scores))
    return 0


# ------------------------------------------------------------------ roc

_ROC_KEYS = ("map", "mask", "out", "config")


def cmd_roc(args):
    resolved = _resolve(args, _ROC_KEYS)
    _echo("roc", resolved)
    dmap = tio.read_detection_map(_require(resolved, "map"))
    mask = tio.read_mask(_require(resolved, "mask"))
    curve = roc(dmap, mask)
    if resolved.get("out"):
        tio.write_roc(curve, resolved["out"])
    print(_FMT % curve.auc)
    return 0


# -------------------------------------------------------------- surface

_SURFACE_KEYS = ("scene", "target", "ridge", "out", "line_out",
                 "mu1_range", "mu2_range", "resolution", "config")


def cmd_surface(args):
    resolved = _resolve(args, _SURFACE_KEYS)
    _echo("surface", resolved)
    ridge = _as_float(resolved.get("ridge") or 0.0, "ridge")
    scene, d, stats = _load_inputs(resolved, ridge)
    if scene.bands != 2:
        raise DimensionMismatch(
            f"surface grids need a 2-band scene, got {scene.bands} bands")

    if resolved.get("resolution"):
        parts = resolved["resolution"].lower().split("x")
        if len(parts) != 2:
            raise ConfigInvalid(f"resolution must be N1xN2, got {resolved['resolution']!r}")
        resolution = (_as_int(parts[0], "resolution"), _as_int(parts[1], "resolution"))
    else:
        resolution = (41, 41)

    ranges = []
    for axis, key in enumerate(("mu1_range", "mu2_range")):
        if resolved.get(key):
            ranges.append(_parse_range(resolved[key], key))
        else:
            lo = min(scene.values[:, axis].min(), d[axis])
            hi = max(scene.values[:, axis].max(), d[axis])
            pad = 0.3 * (hi - lo) if hi > lo else 1.0
            ranges.append((lo - pad, hi + pad))

    grid = g_surface_grid(stats, d, ranges[0], ranges[1], resolution)
    tio.write_table(_require(resolved, "out"), ("mu1", "mu2", "g"), grid)

    point, direction = hyperplane_line(stats, d)
    line_out = resolved.get("line_out") or (_require(resolved, "out") + ".line.csv")
    tio.write_table(line_out, ("x0", "y0", "dx", "dy"),
                    [(point[0], point[1], direction[0], direction[1])])
    return 0


# --------------------------------------------------------------- verify

_VERIFY_KEYS = ("scene", "target", "ridge", "seed", "inject_mu", "config")


def _fd_gradient(stats, d, mu):
    h = 1e-5 * (1.0 + float(np.linalg.norm(mu)))
    grad = np.empty_like(mu)
    for i in range(mu.shape[0]):
        e = np.zeros_like(mu)
        e[i] = h
        grad[i] = (g_value(stats, d, mu + e) - g_value(stats, d, mu - e)) / (2 * h)
    return grad


def cmd_verify(args):
    resolved = _resolve(args, _VERIFY_KEYS)
    _echo("verify", resolved)
    ridge = _as_float(resolved.get("ridge") or 0.0, "ridge")
    seed = _as_int(resolved.get("seed") or 0, "seed")
    scene, d, stats = _load_inputs(resolved, ridge)
    nb = stats.bands
    checks = []  # (name, value, tolerance, ok)

    if ridge > 0:
        print(f"ridge,{_FMT % ridge},0,info")

    # basic-equation residuals of the closed-form solution family
    solutions = [solve_basic_equation(stats, d, "minimal_shift"),
                 solve_basic_equation(stats, d, "along_target_line")]
    for j in range(nb - 1):
        solutions.append(solve_basic_equation(stats, d, "sampled",
                                              tangent=_unit(nb - 1, j)))
    for i, sol in enumerate(solutions):
        name = sol.kind if i < 2 else f"{sol.kind}_{i - 2}"
        checks.append((f"residual_{name}", sol.residual, 1e-12,
                       sol.residual <= 1e-12))

    # analytic gradient vs central finite differences; under a repair ridge
    # the fixed-step difference loses accuracy along the stiffened
    # directions, so the line is informational there (identities above
    # stay enforced)
    probes = [np.zeros(nb), stats.m.copy()]
    raw = uniform_stream(seed, 2, 0, 3 * nb).reshape(3, nb)
    scale = 1.0 + float(np.linalg.norm(d - stats.m))
    probes.extend(stats.m + (2.0 * row - 1.0) * scale for row in raw)
    worst = 0.0
    for mu in probes:
        analytic = g_gradient(stats, d, mu)
        fd = _fd_gradient(stats, d, mu)
        err = float(np.linalg.norm(analytic - fd) /
                    max(np.linalg.norm(fd), 1e-12))
        worst = max(worst, err)
    if ridge > 0:
        print(f"gradient_fd_max_rel_error,{_FMT % worst},{_FMT % 1e-6},info")
    else:
        checks.append(("gradient_fd_max_rel_error", worst, 1e-6, worst < 1e-6))

    # equivalence with the matched filter on two distinct solutions
    for sol in solutions[:2]:
        report = verify_equivalence(stats, d, sol.mu_star)
        checks.append((f"equivalence_cosine_{sol.kind}", report.cosine, 1e-10,
                       report.cosine >= 1.0 - 1e-10))
        checks.append((f"equivalence_c_{sol.kind}", report.c, 1e-8,
                       abs(report.c - 1.0) <= 1e-8))

    # plateau identity across the solution family
    plateau = plateau_value(stats, d)
    dev = max(abs(g_value(stats, d, sol.mu_star) - plateau) / plateau
              for sol in solutions)
    checks.append(("plateau_max_rel_deviation", dev, 1e-9, dev <= 1e-9))

    if resolved.get("inject_mu"):
        mu = _parse_vector(resolved["inject_mu"], "inject_mu")
        if mu.shape[0] != nb:
            raise DimensionMismatch(f"inject_mu needs {nb} entries")
        residual = abs(basic_equation_residual(stats, d, mu))
        checks.append(("injected_mu_residual", residual, 1e-8, residual <= 1e-8))

    failed = []
    for name, value, tol, ok in checks:
        print(f"{name},{_FMT % value},{_FMT % tol},{'pass' if ok else 'fail'}")
        if not ok:
            failed.append(name)
    if failed:
        raise VerifyFailed("violated tolerances: " + ", ".join(failed))
    return 0


def _unit(n, j):
    e = np.zeros(n)
    e[j] = 1.0
    return e


# ----------------------------------------------------------------- main

def _add_common(parser, *names):
    flags = {
        "scene": dict(help="input scene file (TDRS1 format)"),
        "target": dict(help="target spectrum CSV (band,value)"),
        "mask": dict(help="ground-truth mask CSV (x,y,label)"),
        "method": dict(help="detector: cem, mf, ce-closed or ce-ascent"),
        "ridge": dict(help="diagonal loading added before factorization"),
        "seed": dict(help="64-bit seed"),
        "out": dict(help="output path (directory for compare)"),
        "map": dict(help="detection-map CSV (x,y,score)"),
        "config": dict(help="key=value config file; flags override it"),
    }
    for name in names:
        parser.add_argument(f"--{name}", **flags[name])


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tdtk",
        description="Target detection toolkit: detectors, optimal origins, "
                    "and the evaluation pipeline over multiband raster scenes.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic scene + truth + spectrum")
    _add_common(p, "seed", "out", "mask", "target", "config")
    for name in ("bands", "bg-width", "bg-height", "tgt-width", "tgt-height"):
        p.add_argument(f"--{name}", dest=name.replace("-", "_"))
    p.add_argument("--bg-mean", dest="bg_mean", help="comma-separated vector")
    p.add_argument("--bg-cov", dest="bg_cov", help="rows joined by ';', entries by ','")
    p.add_argument("--tgt-mean", dest="tgt_mean")
    p.add_argument("--tgt-cov", dest="tgt_cov")
    p.add_argument("--tgt-position", dest="tgt_position", help="'centered' or x,y")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("detect", help="run one detector, write its map")
    _add_common(p, "scene", "target", "method", "ridge", "out", "config")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("compare", help="all detectors: energies, R², scatters")
    _add_common(p, "scene", "target", "ridge", "out", "config")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("roc", help="ROC curve and AUC of a map against truth")
    _add_common(p, "map", "mask", "out", "config")
    p.set_defaults(func=cmd_roc)

    p = sub.add_parser("surface", help="objective surface grid for 2-band scenes")
    _add_common(p, "scene", "target", "ridge", "out", "config")
    p.add_argument("--line-out", dest="line_out",
                   help="hyperplane line CSV (default: <out>.line.csv)")
    p.add_argument("--mu1-range", dest="mu1_range", help="lo:hi")
    p.add_argument("--mu2-range", dest="mu2_range", help="lo:hi")
    p.add_argument("--resolution", help="N1xN2 grid size (default 41x41)")
    p.set_defaults(func=cmd_surface)

    p = sub.add_parser("verify", help="machine-checkable identity report")
    _add_common(p, "scene", "target", "ridge", "seed", "config")
    p.add_argument("--inject-mu", dest="inject_mu",
                   help="claimed solution origin to check (comma-separated)")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TdtkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for exc_type, code in _EXIT_CODES:
            if isinstance(exc, exc_type):
                return code
        return 1


if __name__ == "__main__":
    sys.exit(main())
