r"""Command-line front end.

Every command reads one JSON config (``--config``, a path or inline JSON)
and writes either JSON (report-style commands) or CSV (sweeps) to
``--output`` or stdout. Complex numbers in JSON are ``[re, im]`` pairs.

Exit codes: 0 success, 2 invalid input, 3 numerical failure. On failure a
JSON object ``{"error", "message", "exit_code"}`` goes to stderr.
"""

import argparse
import hashlib
import json
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from canonfock import __version__, decoherence, fockoracle, fockrep, linops, qbm, serialize, symplectic
from canonfock.errors import CanonFockError, NearResonance, NumericalError, ValidationError

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3
DEFAULT_ORACLE_TOL = 1e-6
COMMANDS = ("canon-check", "squeeze", "overlap", "oracle-compare", "vanhove", "qbm-coeffs", "qbm-evolve")


class OracleMismatch(NumericalError):
    """At least one oracle case exceeded the overlap tolerance."""


# --- config and output helpers ----------------------------------------------


def load_config(source):
    """Parse ``source`` as inline JSON (leading ``{``) or a path to a JSON file."""
    if source is None:
        return {}
    text = source if source.lstrip().startswith("{") else None
    if text is None:
        try:
            with open(source, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ValidationError(f"cannot read config: {exc}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ValidationError("config must be a JSON object")
    return cfg


def config_hash(command, cfg, args):
    canon = json.dumps(
        {"command": command, "config": cfg, "seed": args.seed, "tol": args.tol, "cutoff": args.cutoff},
        sort_keys=True, separators=(",", ":"),
    )
    return hashlib.sha256(canon.encode()).hexdigest()


def _fmt(x):
    # + 0.0 folds -0.0 into 0.0
    return format(float(x) + 0.0, ".17g")


def render_csv(columns, rows, meta):
    """CSV text with a ``#`` comment header; numbers use 17 significant digits."""
    lines = [f"# {k}: {v}" for k, v in meta.items()]
    lines.append(",".join(columns))
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def render_json(payload, meta):
    return json.dumps({"meta": meta, **payload}, sort_keys=True, indent=2) + "\n"


def write_output(text, path):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _require(cfg, key):
    try:
        return cfg[key]
    except KeyError:
        raise ValidationError(f"config is missing {key!r}") from None


def _time_grid(grid_cfg):
    """``{"min", "max", "n", "spacing": "linear" | "log"}`` or an explicit list."""
    if isinstance(grid_cfg, list):
        return np.asarray(grid_cfg, dtype=float)
    lo, hi, n = float(_require(grid_cfg, "min")), float(_require(grid_cfg, "max")), int(_require(grid_cfg, "n"))
    if n < 1 or hi < lo:
        raise ValidationError("time grid needs n >= 1 and max >= min")
    spacing = grid_cfg.get("spacing", "linear")
    if spacing == "linear":
        return np.linspace(lo, hi, n)
    if spacing == "log":
        if lo <= 0:
            raise ValidationError("log spacing needs min > 0")
        return np.geomspace(lo, hi, n)
    raise ValidationError(f"unknown spacing {spacing!r}")


def _workers(cfg):
    w = int(cfg.get("workers", 1))
    if w < 1:
        raise ValidationError("workers must be >= 1")
    return w


# --- commands ---------------------------------------------------------------


def cmd_canon_check(cfg, args):
    pair = serialize.pair_from_dict(cfg.get("pair", cfg))
    tol = args.tol if args.tol is not None else symplectic.CANONICAL_TOL * pair.n
    res = symplectic.canonical_residuals(pair)
    return "json", {
        "canonical": symplectic.is_canonical(pair, tol),
        "n": pair.n,
        "tol": tol,
        "residuals": res,
    }


def cmd_squeeze(cfg, args):
    gen = serialize.squeeze_from_dict(cfg.get("squeeze", cfg))
    Phi, d = symplectic.reduce_to_single_modes(gen)
    pair = symplectic.from_squeeze(gen)
    reduced = symplectic.conjugate_squeeze(Phi, gen).Xi
    fac = linops.takagi(gen.Xi)
    return "json", {
        "takagi_values": [float(x) for x in d],
        "Phi": serialize.encode_complex(Phi.Psi),
        "pair": serialize.to_dict(pair),
        "squeezed_vacuum": serialize.to_dict(fockrep.squeeze_vacuum(gen)),
        "takagi_residual": float(np.max(np.abs(fac.reconstruct() - gen.Xi))),
        "reduction_residual": float(np.max(np.abs(reduced - np.diag(d)))),
        "canonical": symplectic.is_canonical(pair),
    }


def cmd_overlap(cfg, args):
    u1 = serialize.ultracoherent_from_dict(_require(cfg, "u1"))
    u2 = serialize.ultracoherent_from_dict(_require(cfg, "u2"))
    out = {
        "inner": serialize.encode_complex(fockrep.inner(u1, u2)),
        "norm_u1": fockrep.norm(u1),
        "norm_u2": fockrep.norm(u2),
    }
    if args.cutoff is not None:
        report = fockoracle.oracle_compare(fockoracle.OracleCase("overlap", u1, other=u2), args.cutoff)
        out["oracle"] = report.to_dict()
    return "json", out


def cmd_oracle_compare(cfg, args):
    n_cases = int(cfg.get("n_cases", 20))
    kinds = cfg.get("kinds", list(fockoracle.CASE_KINDS))
    modes = cfg.get("modes", [1, 2])
    cutoff = args.cutoff if args.cutoff is not None else int(cfg.get("cutoff", 40))
    tol = args.tol if args.tol is not None else float(cfg.get("tol", DEFAULT_ORACLE_TOL))
    if n_cases < 1 or not kinds or not modes:
        raise ValidationError("need n_cases >= 1 and non-empty kinds and modes")
    rng = np.random.default_rng(args.seed)
    # cases are drawn sequentially so the set depends only on the seed
    cases = []
    for i in range(n_cases):
        kind = kinds[i % len(kinds)]
        n = modes[(i // len(kinds)) % len(modes)]
        cases.append(fockoracle.random_case(rng, kind, int(n), name=f"{i:03d}-{kind}-{n}mode"))
    with ThreadPoolExecutor(max_workers=_workers(cfg)) as pool:
        reports = list(pool.map(lambda c: fockoracle.oracle_compare(c, cutoff), cases))
    worst = max(r.overlap_error for r in reports)
    summary = {
        "n_cases": n_cases,
        "cutoff": cutoff,
        "tol": tol,
        "max_overlap_error": worst,
        "max_norm_error": max(r.norm_error for r in reports),
        "passed": bool(worst <= tol),
    }
    return "json", {"reports": [r.to_dict() for r in reports], "summary": summary}


def _bath_xi(cfg, grid):
    xi_cfg = cfg.get("Xi")
    if xi_cfg is None:
        return None
    if xi_cfg.get("type", "diagonal") != "diagonal":
        raise ValidationError("only diagonal squeezing is supported for vanhove")
    w = grid.omegas
    if "r_slope" in xi_cfg:
        r = float(xi_cfg["r_slope"]) * w
    else:
        r = np.full(w.shape, float(_require(xi_cfg, "r")))
    theta = float(xi_cfg.get("theta", 0.0)) + float(xi_cfg.get("theta_slope", 0.0)) * w
    if np.any(r < 0):
        raise ValidationError("squeeze amplitude r must be non-negative")
    return r * np.exp(1j * theta)


def cmd_vanhove(cfg, args):
    fam_cfg = dict(_require(cfg, "family"))
    family = decoherence.CouplingFamily(
        s=float(_require(fam_cfg, "s")),
        omega_min=float(fam_cfg.get("omega_min", 1e-4)),
        omega_max=float(fam_cfg.get("omega_max", 1e3)),
        n_points=int(fam_cfg.get("n_points", 2000)),
        normalization=float(fam_cfg.get("normalization", 1.0)),
    )
    grid = family.grid(float(cfg.get("beta", 0.0)))
    grid.check_semibounded()
    reference = cfg.get("reference", "vacuum")
    Xi = _bath_xi(cfg, grid)
    ts = _time_grid(_require(cfg, "t"))
    rows = decoherence.sweep(grid, ts, float(cfg.get("dalpha", 1.0)), reference, Xi, workers=_workers(cfg))
    return "csv", (
        ("t", "norm_kt_sq", "squeezed_norm_sq", "chi"),
        [(r.t, r.norm_kt_sq, r.squeezed_norm_sq, r.chi) for r in rows],
        "dimensionless (frequencies in units of omega, times in units of 1/omega)",
    )


_PARAM_FIELDS = ("M", "Omega", "gamma0", "T", "r", "a", "hbar", "kB")


def _qbm_params(cfg):
    src = cfg.get("params", cfg)
    return qbm.QbmParams(**{k: float(src[k]) for k in _PARAM_FIELDS if k in src})


def _qbm_units(params):
    return f"hbar={params.hbar:g}, kB={params.kB:g}"


def cmd_qbm_coeffs(cfg, args):
    params = _qbm_params(cfg)
    ts = _time_grid(_require(cfg, "t"))
    skip = bool(cfg.get("skip_singular", False))

    def row(t):
        try:
            c = qbm.coeffs(params, t)
        except NearResonance:
            if skip:
                return None
            raise
        return (t, c.omega_ren_sq, c.gamma, c.dxx, c.dxp, c.dpp)

    with ThreadPoolExecutor(max_workers=_workers(cfg)) as pool:
        rows = [r for r in pool.map(row, ts) if r is not None]
    return "csv", (("t", "omega_ren_sq", "gamma", "dxx", "dxp", "dpp"), rows, _qbm_units(params))


def cmd_qbm_evolve(cfg, args):
    params = _qbm_params(cfg)
    init = _require(cfg, "initial")
    try:
        state = qbm.GaussianState(**{k: float(init[k]) for k in ("mean_x", "mean_p", "cov_xx", "cov_xp", "cov_pp")})
    except KeyError as exc:
        raise ValidationError(f"initial state is missing {exc.args[0]!r}") from None
    times, states = qbm.propagate_gaussian(
        params, state, float(_require(cfg, "t0")), float(_require(cfg, "t1")), int(_require(cfg, "steps"))
    )
    every = int(cfg.get("output_every", 1))
    if every < 1:
        raise ValidationError("output_every must be >= 1")
    rows = [(t, *s.as_array()) for t, s in list(zip(times, states))[::every]]
    return "csv", (("t", "mean_x", "mean_p", "cov_xx", "cov_xp", "cov_pp"), rows, _qbm_units(params))


HANDLERS = {
    "canon-check": cmd_canon_check,
    "squeeze": cmd_squeeze,
    "overlap": cmd_overlap,
    "oracle-compare": cmd_oracle_compare,
    "vanhove": cmd_vanhove,
    "qbm-coeffs": cmd_qbm_coeffs,
    "qbm-evolve": cmd_qbm_evolve,
}


# --- entry point ------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="canonfock",
        description="Canonical transformations, Fock-space oracle, van Hove decoherence and QBM coefficients.",
    )
    parser.add_argument("--version", action="version", version=f"canonfock {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name in COMMANDS:
        p = sub.add_parser(name, help=(HANDLERS[name].__doc__ or name.replace("-", " ")))
        p.add_argument("--config", help="JSON config: a file path or an inline JSON object")
        p.add_argument("--output", help="output file (default: stdout)")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized cases (default 0)")
        p.add_argument("--tol", type=float, help="tolerance override")
        p.add_argument("--cutoff", type=int, help="per-mode Fock cutoff for oracle comparisons")
    return parser


def _normalize_argv(argv):
    # `canonfock qbm coeffs ...` is an alias of `canonfock qbm-coeffs ...`
    if len(argv) >= 2 and argv[0] == "qbm" and argv[1] in ("coeffs", "evolve"):
        return [f"qbm-{argv[1]}", *argv[2:]]
    return argv


def _error(exc, code):
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    return code


def run(command, cfg, args):
    """Execute one command; returns the rendered output text."""
    if args.seed < 0:
        raise ValidationError("seed must be non-negative")
    kind, payload = HANDLERS[command](cfg, args)
    meta = {
        "canonfock_version": __version__,
        "command": command,
        "config_sha256": config_hash(command, cfg, args),
        "seed": args.seed,
    }
    if kind == "csv":
        columns, rows, units = payload
        meta["units"] = units
        return render_csv(columns, rows, meta)
    return render_json(payload, meta)


def main(argv=None):
    argv = _normalize_argv(list(sys.argv[1:] if argv is None else argv))
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        text = run(args.command, cfg, args)
        write_output(text, args.output)
    except ValidationError as exc:
        return _error(exc, EXIT_VALIDATION)
    except NumericalError as exc:
        return _error(exc, EXIT_NUMERICAL)
    except CanonFockError as exc:
        return _error(exc, EXIT_NUMERICAL)
    except (KeyError, TypeError, ValueError) as exc:
        # malformed config values that slipped past the typed decoders
        return _error(exc, EXIT_VALIDATION)
    if args.command == "oracle-compare" and not json.loads(text)["summary"]["passed"]:
        return _error(OracleMismatch("oracle overlap error above tolerance"), EXIT_NUMERICAL)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
