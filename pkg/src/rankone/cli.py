"""Command-line front end.

Every subcommand resolves its settings from built-in defaults, then an
optional JSON config file (``--config``), then explicit flags. Outputs are
deterministic for a given configuration and seed; CSV files start with a
comment line recording the package version, a hash of the resolved
configuration and the quadrature order.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .amp import amp_run, state_evolution_run
from .bounds import ModelPoint, evaluate_point
from .channel import GaussianChannel, channel_from_config
from .errors import CapacityError, RankOneError
from .oracle import (
    bethe_minimum,
    generate_instance,
    mi_monte_carlo,
    nishimori_check,
    universality_gap,
)
from .phase import DEFAULT_RHO_GRID, figure_curve, phase_diagram
from .prior import make_sparse_rademacher
from .scalar import DEFAULT_ORDER

SWEEP_GRID = "0.01:2.0:100"

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_NUMERICAL = 0, 2, 3, 4

DEFAULTS = {
    "rho": 1.0,
    "delta": 1.0,
    "n": 10,
    "samples": 1000,
    "seed": None,
    "threads": 1,
    "out": None,
    "quad_order": DEFAULT_ORDER,
    "delta_grid": None,
    "rho_grid": None,
    "tol": 1e-3,
    "max_iter": 200,
    "damping": 0.0,
    "init": "random",
    "eps": 0.01,
    "f_choice": "per-site",
    "channel": {"kind": "bernoulli_linear", "base": 0.5, "slope": 1.0},
}

# settings that never change the numbers written
_NOT_HASHED = ("out", "threads", "config")


class ValidationError(ValueError):
    pass


def _parse_grid(text) -> list[float]:
    """``"a:b:k"`` is k points from a to b inclusive; otherwise a comma list."""
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    text = str(text)
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValidationError(f"grid {text!r} must read start:stop:count")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise ValidationError("grid count must be positive")
        return [float(v) for v in np.linspace(start, stop, count)]
    return [float(v) for v in text.split(",") if v.strip()]


def _common(parser: argparse.ArgumentParser, *names: str) -> None:
    flags = {
        "rho": dict(type=float, help="sparse Rademacher density in (0, 1]"),
        "delta": dict(type=float, help="Gaussian noise variance"),
        "n": dict(type=int, help="instance size"),
        "samples": dict(type=int, help="number of Monte Carlo draws of Y"),
        "seed": dict(type=int, help="random seed (auto-generated and recorded if omitted)"),
    }
    for name in names:
        parser.add_argument(f"--{name}", default=None, **flags[name])
    parser.add_argument("--threads", type=int, default=None, help="worker processes")
    parser.add_argument("--out", default=None, help="output path")
    parser.add_argument("--quad-order", dest="quad_order", type=int, default=None)
    parser.add_argument("--config", default=None, help="JSON config file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rankone", description="Bounds, thresholds and oracles for rank-one matrix estimation."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("point", help="evaluate both bounds at one (rho, delta)")
    _common(p, "rho", "delta")

    p = sub.add_parser("sweep", help="bound curves versus delta")
    _common(p, "rho")
    p.add_argument("--delta-grid", dest="delta_grid", default=None, help="start:stop:count or a,b,c")

    p = sub.add_parser("phase", help="thresholds over a rho grid")
    _common(p)
    p.add_argument("--rho-grid", dest="rho_grid", default=None, help="start:stop:count or a,b,c")
    p.add_argument("--delta-grid", dest="delta_grid", default=None, help="cells for regime labels")
    p.add_argument("--tol", type=float, default=None)

    p = sub.add_parser("oracle", help="finite-n mutual information by enumeration")
    _common(p, "rho", "delta", "n", "samples", "seed")

    p = sub.add_parser("amp", help="run AMP and compare with state evolution")
    _common(p, "rho", "delta", "n", "seed")
    p.add_argument("--max-iter", dest="max_iter", type=int, default=None)
    p.add_argument("--damping", type=float, default=None)
    p.add_argument("--init", choices=["random", "spectral"], default=None)
    p.add_argument("--eps", type=float, default=None)

    p = sub.add_parser("universality", help="channel versus Gaussian-equivalent mutual information")
    _common(p, "rho", "n", "samples", "seed")
    p.add_argument("--base", type=float, default=None, help="bernoulli_linear base probability")
    p.add_argument("--slope", type=float, default=None, help="bernoulli_linear slope")

    p = sub.add_parser("nishimori", help="check a Nishimori identity by enumeration")
    _common(p, "rho", "delta", "n", "samples", "seed")
    p.add_argument(
        "--f-choice",
        dest="f_choice",
        choices=["per-site", "magnetization", "overlap", "constant"],
        default=None,
    )
    return parser


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, config file and explicit flags (in increasing priority)."""
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    cfg = dict(DEFAULTS)
    cfg.update(_load_config(args.config))
    base, slope = flags.pop("base", None), flags.pop("slope", None)
    if base is not None or slope is not None:
        channel = dict(cfg["channel"])
        channel["kind"] = "bernoulli_linear"
        if base is not None:
            channel["base"] = base
        if slope is not None:
            channel["slope"] = slope
        cfg["channel"] = channel
    cfg.update({k: v for k, v in flags.items() if v is not None})
    cfg["command"] = args.command
    unknown = set(cfg) - set(DEFAULTS) - {"command"}
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    return cfg


def _validate(cfg: dict) -> None:
    rho = cfg["rho"]
    if not (isinstance(rho, (int, float)) and 0 < rho <= 1):
        raise ValidationError(f"--rho must lie in (0, 1], got {rho}")
    if not (isinstance(cfg["delta"], (int, float)) and cfg["delta"] > 0 and math.isfinite(cfg["delta"])):
        raise ValidationError(f"--delta must be positive, got {cfg['delta']}")
    if int(cfg["n"]) < 1:
        raise ValidationError("--n must be positive")
    if int(cfg["samples"]) < 2:
        raise ValidationError("--samples must be at least 2")
    if int(cfg["threads"]) < 1:
        raise ValidationError("--threads must be positive")
    if int(cfg["quad_order"]) < 5:
        raise ValidationError("--quad-order must be at least 5")
    if not (0 < cfg["tol"] <= 1):
        raise ValidationError("--tol must lie in (0, 1]")


def config_hash(cfg: dict) -> str:
    hashed = {k: v for k, v in cfg.items() if k not in _NOT_HASHED}
    text = json.dumps(hashed, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _header(cfg: dict) -> str:
    return (
        f"rankone {__version__} command={cfg['command']} "
        f"config_hash={config_hash(cfg)} quad_order={cfg['quad_order']}"
    )


def _ensure_seed(cfg: dict) -> int:
    if cfg["seed"] is None:
        cfg["seed"] = int(np.random.SeedSequence().entropy % (2**63))
    return int(cfg["seed"])


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _csv_text(cfg: dict, columns: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(f"# {_header(cfg)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _json_text(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, default=_fmt) + "\n"


def _write(path: str | Path, text: str) -> None:
    Path(path).write_text(text)


def _emit(cfg: dict, text: str) -> None:
    if cfg["out"] is None:
        sys.stdout.write(text)
    else:
        _write(cfg["out"], text)


def _sibling(path: str, suffix: str) -> Path:
    return Path(path).with_suffix(suffix)


def _gnuplot_data(cfg: dict, columns: list[str], rows) -> str:
    lines = [f"# {_header(cfg)}", "# " + " ".join(columns)]
    for row in rows:
        lines.append(" ".join(_fmt(int(v) if isinstance(v, (bool, np.bool_)) else v) for v in row))
    return "\n".join(lines) + "\n"


def cmd_point(cfg: dict) -> dict:
    mp = ModelPoint(make_sparse_rademacher(cfg["rho"]), float(cfg["delta"]), int(cfg["quad_order"]))
    result = evaluate_point(mp).to_dict()
    result.pop("candidates")
    result["rho"] = float(cfg["rho"])
    result["config_hash"] = config_hash(cfg)
    _emit(cfg, _json_text(result))
    return result


SWEEP_COLUMNS = ["rho", "delta", "m_hat", "i_b_min", "m_tilde", "i_l_min", "bounds_match"]


def cmd_sweep(cfg: dict) -> dict:
    grid = _parse_grid(cfg["delta_grid"] or SWEEP_GRID)
    if not grid or min(grid) <= 0:
        raise ValidationError("delta grid must hold positive values")
    curve = figure_curve(cfg["rho"], grid, int(cfg["quad_order"]), int(cfg["threads"]))
    rows = [
        [cfg["rho"]] + [curve[c][k] for c in SWEEP_COLUMNS[1:]]
        for k in range(len(grid))
    ]
    _emit(cfg, _csv_text(cfg, SWEEP_COLUMNS, rows))
    if cfg["out"] is not None:
        dat = _sibling(cfg["out"], ".dat")
        _write(dat, _gnuplot_data(cfg, SWEEP_COLUMNS, rows))
        _write(
            _sibling(cfg["out"], ".gp"),
            "\n".join(
                [
                    f"# {_header(cfg)}",
                    "set xlabel 'Delta'",
                    "set ylabel 'I/n'",
                    f"set title 'rho = {_fmt(float(cfg['rho']))}'",
                    f"plot '{dat.name}' using 2:4 with lines title 'upper (Bethe)', \\",
                    f"     '{dat.name}' using 2:6 with lines dashtype 2 title 'lower'",
                    "",
                ]
            ),
        )
    return curve


PHASE_COLUMNS = ["rho", "delta_algo", "delta_detect", "delta_match", "bracket_width", "match_everywhere"]


def cmd_phase(cfg: dict) -> dict:
    rho_grid = DEFAULT_RHO_GRID if cfg["rho_grid"] is None else _parse_grid(cfg["rho_grid"])
    if any(not (0 < r <= 1) for r in rho_grid):
        raise ValidationError("rho grid values must lie in (0, 1]")
    delta_cells = None if cfg["delta_grid"] is None else _parse_grid(cfg["delta_grid"])
    diagram = phase_diagram(
        rho_grid,
        tol=float(cfg["tol"]),
        order=int(cfg["quad_order"]),
        delta_grid=delta_cells,
        threads=int(cfg["threads"]),
    )
    rows = [[getattr(r, c) for c in PHASE_COLUMNS] for r in diagram.rows]
    summary = {
        "rho_star": diagram.rho_star,
        "rows": [r.to_dict() for r in diagram.rows],
        "invariant_violations": diagram.check_invariants(),
        "delta_grid": diagram.delta_grid,
        "labels": diagram.labels,
        "version": __version__,
        "config_hash": config_hash(cfg),
        "quad_order": int(cfg["quad_order"]),
    }
    if cfg["out"] is None:
        sys.stdout.write(_json_text(summary))
        return summary
    _write(cfg["out"], _csv_text(cfg, PHASE_COLUMNS, rows))
    _write(_sibling(cfg["out"], ".json"), _json_text(summary))
    dat = _sibling(cfg["out"], ".dat")
    _write(dat, _gnuplot_data(cfg, PHASE_COLUMNS, rows))
    _write(
        _sibling(cfg["out"], ".gp"),
        "\n".join(
            [
                f"# {_header(cfg)}",
                "set xlabel 'rho'",
                "set ylabel 'Delta'",
                "set logscale y",
                f"plot '{dat.name}' using 1:2 with lines title 'Delta_algo', \\",
                f"     '{dat.name}' using 1:3 with lines title 'Delta_detect', \\",
                f"     '{dat.name}' using 1:4 with lines title 'Delta_match'",
                "",
            ]
        ),
    )
    return summary


def cmd_oracle(cfg: dict) -> dict:
    seed = _ensure_seed(cfg)
    prior = make_sparse_rademacher(cfg["rho"])
    est = mi_monte_carlo(prior, float(cfg["delta"]), int(cfg["n"]), int(cfg["samples"]), seed)
    bethe = bethe_minimum(prior, float(cfg["delta"]))
    report = {
        "rho": float(cfg["rho"]),
        "delta": float(cfg["delta"]),
        "n": int(cfg["n"]),
        "samples": int(cfg["samples"]),
        "mi": est.mi_per_var,
        "stderr": est.stderr,
        "bethe_min": bethe,
        "ub_satisfied": bool(est.mi_per_var <= bethe + 3 * est.stderr),
        "seed": seed,
        "config_hash": config_hash(cfg),
    }
    _emit(cfg, _json_text(report))
    return report


def cmd_amp(cfg: dict) -> dict:
    seed = _ensure_seed(cfg)
    prior = make_sparse_rademacher(cfg["rho"])
    delta = float(cfg["delta"])
    if not (0 <= cfg["damping"] < 1):
        raise ValidationError("--damping must lie in [0, 1)")
    inst_seed, init_seed = np.random.SeedSequence(seed).spawn(2)
    inst = generate_instance(prior, GaussianChannel(delta), int(cfg["n"]), inst_seed)
    state = amp_run(
        prior,
        inst,
        max_iter=int(cfg["max_iter"]),
        damping=float(cfg["damping"]),
        init=cfg["init"],
        eps=float(cfg["eps"]),
        seed=init_seed,
    )
    mp = ModelPoint(prior, delta, int(cfg["quad_order"]))
    se = state_evolution_run(mp, min(float(cfg["eps"]), prior.second_moment))
    rows = [
        [t, ov, state.distance_history[t - 1] if t > 0 else float("nan")]
        for t, ov in enumerate(state.overlap_history)
    ]
    _emit(cfg, _csv_text(cfg, ["iteration", "overlap", "iterate_distance"], rows))
    summary = {
        "final_overlap": state.overlap,
        "iterations": state.iteration,
        "converged": state.converged,
        "se_fixed_point": se.fixed_point,
        "seed": seed,
    }
    if cfg["out"] is not None:
        _write(_sibling(cfg["out"], ".json"), _json_text(summary))
    return summary


def cmd_universality(cfg: dict) -> dict:
    seed = _ensure_seed(cfg)
    n = int(cfg["n"])
    if n > 12:
        raise ValidationError("--n must be at most 12 for the universality comparison")
    channel = channel_from_config(cfg["channel"])
    prior = make_sparse_rademacher(cfg["rho"])
    res = universality_gap(prior, channel, n, int(cfg["samples"]), seed)
    report = {
        "rho": float(cfg["rho"]),
        "n": n,
        "samples": int(cfg["samples"]),
        "channel": channel.to_config(),
        "effective_delta": res.effective_delta,
        "mi_channel": res.mi_channel,
        "mi_gaussian": res.mi_gaussian,
        "gap": res.gap,
        "stderr_channel": res.stderr_channel,
        "stderr_gaussian": res.stderr_gaussian,
        "combined_stderr": res.combined_stderr,
        "seed": seed,
        "config_hash": config_hash(cfg),
    }
    _emit(cfg, _json_text(report))
    return report


def cmd_nishimori(cfg: dict) -> dict:
    seed = _ensure_seed(cfg)
    n = int(cfg["n"])
    if n > 8:
        raise ValidationError("--n must be at most 8 for the Nishimori check")
    prior = make_sparse_rademacher(cfg["rho"])
    res = nishimori_check(prior, float(cfg["delta"]), n, cfg["f_choice"], int(cfg["samples"]), seed)
    report = {
        "rho": float(cfg["rho"]),
        "delta": float(cfg["delta"]),
        "n": n,
        "samples": int(cfg["samples"]),
        "f_choice": cfg["f_choice"],
        "lhs": res.lhs,
        "rhs": res.rhs,
        "max_abs_gap": res.max_abs_gap,
        "stderr": res.stderr,
        "seed": seed,
        "config_hash": config_hash(cfg),
    }
    _emit(cfg, _json_text(report))
    return report


COMMANDS = {
    "point": cmd_point,
    "sweep": cmd_sweep,
    "phase": cmd_phase,
    "oracle": cmd_oracle,
    "amp": cmd_amp,
    "universality": cmd_universality,
    "nishimori": cmd_nishimori,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        _validate(cfg)
        COMMANDS[cfg["command"]](cfg)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValidationError, CapacityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ArithmeticError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, TypeError, KeyError, RankOneError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
