"""Command-line interface.

Subcommands
-----------
witness      exact witness value (or a Monte-Carlo estimate with --simulate)
measures     negativity / effective mode number / width ratio vs mean photons
truncation   truncation-error budgets and retained-subspace economics
crosswitness all four witnesses against all four Bell states
fedorov      width-ratio estimate from a simulated photocounting run
sweep-eta    witness vs detection efficiency, with the certification threshold

Every command writes a CSV (numbers at 17 significant digits) plus a JSON
run manifest (resolved configuration, seed, package version, outputs,
duration) next to it, so any result can be reproduced bit-for-bit with
``run_from_manifest``.  A ``--config`` INI file supplies defaults per
command section; explicit flags win.

Exit codes: 0 success, 2 usage error, 3 numeric/truncation failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .states import BellLabel, NumericError, TruncationMassError

_STATES = [l.value for l in BellLabel]
_CONVENTIONS = ["stddev", "sqrt2-stddev"]


class UsageError(ValueError):
    """Bad flag combination or malformed grid (exit code 2)."""


def _witness_kinds() -> list[str]:
    from .witnesses import WitnessKind

    return [k.value for k in WitnessKind]


#: builtin defaults, also the flag inventory used for config-file merging
_DEFAULTS: dict[str, dict] = {
    "witness": {
        "state": "psi-minus", "gamma": 0.5, "cutoff": None, "witness": None,
        "simulate": False, "eta": 1.0, "pulses": None, "seed": 0,
        "bin_width": 200, "workers": 1, "pulse_log": None, "out": "witness.csv",
    },
    "measures": {
        "n0_grid": "1,2,5,10,20,50,100", "convention": "sqrt2-stddev",
        "out": "measures.csv",
    },
    "truncation": {
        "n0_grid": "10", "epsilon": None,
        "epsilon_grid": "0.9,0.5,0.2,0.1,0.05,0.02,0.01",
        "out": "truncation.csv",
    },
    "crosswitness": {
        "gamma": 0.5, "cutoff": None, "out": "crosswitness.csv",
    },
    "fedorov": {
        "state": "psi-minus", "gamma": 1.5, "eta": 1.0, "pulses": 1_000_000,
        "seed": 0, "bin_width": 1, "workers": 1, "convention": "sqrt2-stddev",
        "out": "fedorov.csv",
    },
    "sweep-eta": {
        "state": "psi-minus", "gamma": 0.8, "eta_grid": "", "eta_min": 0.15,
        "eta_max": 0.95, "eta_points": 9, "pulses": 100_000, "seed": 0,
        "bin_width": 200, "workers": 1, "witness": None, "out": "sweep_eta.csv",
    },
}

_FLOAT_KEYS = {"gamma", "eta", "epsilon", "eta_min", "eta_max"}
_INT_KEYS = {"cutoff", "pulses", "seed", "bin_width", "workers", "eta_points"}
_BOOL_KEYS = {"simulate"}


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="macrobell",
        description="four-mode bright squeezed-vacuum Bell states: "
                    "witnesses, measures, truncation budgets, virtual runs",
    )
    top.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = top.add_subparsers(dest="command", required=True)
    kinds = _witness_kinds()

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="INI file; section [%s] supplies defaults" % name)
        p.add_argument("--out", help="output CSV path")
        return p

    p = add("witness", "exact or sampled entanglement witness")
    p.add_argument("--state", choices=_STATES + ["vacuum"])
    p.add_argument("--gamma", type=float)
    p.add_argument("--cutoff", type=int, help="per-mode Fock cutoff (default: auto)")
    p.add_argument("--witness", choices=kinds, help="default: the matched witness")
    p.add_argument("--simulate", action="store_const", const=True,
                   help="Monte-Carlo estimation instead of exact evaluation")
    p.add_argument("--eta", type=float, help="detection efficiency (simulation only)")
    p.add_argument("--pulses", type=int, help="pulse count (implies --simulate)")
    p.add_argument("--seed", type=int)
    p.add_argument("--bin-width", type=int, dest="bin_width")
    p.add_argument("--workers", type=int)
    p.add_argument("--pulse-log", dest="pulse_log", help="NDJSON per-pulse record path")

    p = add("measures", "entanglement measures across mean photon number")
    p.add_argument("--n0-grid", dest="n0_grid", help="comma-separated N0 values")
    p.add_argument("--convention", choices=_CONVENTIONS)

    p = add("truncation", "error budget and subspace size for photon-number cutoffs")
    p.add_argument("--n0-grid", dest="n0_grid", help="comma-separated N0 values")
    p.add_argument("--epsilon", type=float, help="single target (otherwise a grid scan)")
    p.add_argument("--epsilon-grid", dest="epsilon_grid")

    p = add("crosswitness", "4x4 witness-by-state table")
    p.add_argument("--gamma", type=float)
    p.add_argument("--cutoff", type=int)

    p = add("fedorov", "simulated photon-number width ratio")
    p.add_argument("--state", choices=_STATES)
    p.add_argument("--gamma", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--pulses", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--bin-width", type=int, dest="bin_width",
                   help="partner-count bin width for conditional histograms")
    p.add_argument("--workers", type=int)
    p.add_argument("--convention", choices=_CONVENTIONS)

    p = add("sweep-eta", "witness vs detection efficiency")
    p.add_argument("--state", choices=_STATES)
    p.add_argument("--gamma", type=float)
    p.add_argument("--eta-grid", dest="eta_grid", help="comma-separated efficiencies")
    p.add_argument("--eta-min", dest="eta_min", type=float)
    p.add_argument("--eta-max", dest="eta_max", type=float)
    p.add_argument("--eta-points", dest="eta_points", type=int)
    p.add_argument("--pulses", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--bin-width", dest="bin_width", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--witness", choices=kinds)
    return top


def _resolve_config(args: argparse.Namespace) -> dict:
    """CLI flag > config-file entry > builtin default."""
    command = args.command
    defaults = dict(_DEFAULTS[command])
    file_vals: dict = {}
    if getattr(args, "config", None):
        ini = configparser.ConfigParser()
        with open(args.config) as fh:
            ini.read_file(fh)
        if ini.has_section(command):
            for key, raw in ini.items(command):
                key = key.replace("-", "_")
                if key not in defaults:
                    raise UsageError(f"unknown config key {key!r} for command {command!r}")
                file_vals[key] = _convert(key, raw)
    resolved = {}
    for key, builtin in defaults.items():
        cli_val = getattr(args, key, None)
        if cli_val is not None:
            resolved[key] = cli_val
        elif key in file_vals:
            resolved[key] = file_vals[key]
        else:
            resolved[key] = builtin
    return resolved


def _convert(key: str, raw: str):
    raw = raw.strip()
    if raw.lower() in ("none", ""):
        return None
    if key in _FLOAT_KEYS:
        return float(raw)
    if key in _INT_KEYS:
        return int(raw)
    if key in _BOOL_KEYS:
        if raw.lower() in ("true", "1", "yes", "on"):
            return True
        if raw.lower() in ("false", "0", "no", "off"):
            return False
        raise UsageError(f"boolean config key {key!r} got {raw!r}")
    return raw


def _parse_grid(text: str, what: str) -> list[float]:
    values = [float(tok) for tok in text.split(",") if tok.strip()]
    if not values:
        raise UsageError(f"empty {what} grid")
    return values


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    if value is None:
        return ""
    return str(value)


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_json(path: str, doc: dict) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(command: str, cfg: dict, outputs: list[str], t0: float,
                    extra: dict | None = None) -> str:
    path = (cfg.get("out") or "run") + ".manifest.json"
    doc = {
        "command": command,
        "config": {k: v for k, v in sorted(cfg.items())},
        "seed": cfg.get("seed"),
        "package_version": __version__,
        "outputs": outputs,
        "duration_s": round(time.time() - t0, 3),
    }
    if extra:
        doc.update(extra)
    _write_json(path, doc)
    return path


# -- command bodies -------------------------------------------------------------


def _cmd_witness(cfg: dict) -> list[str]:
    from .basis import FourModeBasis
    from .states import build_bell_state
    from .witnesses import WitnessKind, cutoff_for_edge_mass, evaluate_witness
    from .simulate import SimConfig, estimate_witness, matched_witness

    if cfg["state"] == "vacuum":
        label = BellLabel.PSI_MINUS  # sign is irrelevant at zero gain
        gamma = 0.0
        shown = "vacuum"
    else:
        label = BellLabel(cfg["state"])
        gamma = cfg["gamma"]
        shown = label.value
    kind = WitnessKind(cfg["witness"]) if cfg["witness"] else matched_witness(label)
    simulate = bool(cfg["simulate"]) or cfg["pulses"] is not None
    header = ["mode", "witness", "state", "gamma", "cutoff", "eta", "pulses", "seed",
              "value", "value_error", "var_1", "var_2", "var_3",
              "var_err_1", "var_err_2", "var_err_3", "mean_s0"]
    if simulate:
        pulses = cfg["pulses"] if cfg["pulses"] is not None else 100_000
        sim = SimConfig(label=label, gamma=gamma, eta=cfg["eta"],
                        pulses=pulses, seed=cfg["seed"],
                        bin_width=cfg["bin_width"], workers=cfg["workers"])
        rep = estimate_witness(sim, kind=kind, pulse_log=cfg["pulse_log"])
        row = ["simulated", kind.value, shown, gamma, None, cfg["eta"],
               pulses, cfg["seed"], rep.value, rep.value_error,
               *rep.variance_terms, *rep.variance_errors, rep.mean_s0]
    else:
        if cfg["eta"] != 1.0:
            raise UsageError("exact evaluation assumes unit efficiency; "
                             "pass --simulate to model eta < 1")
        n_max = cfg["cutoff"] or (4 if gamma == 0.0 else cutoff_for_edge_mass(gamma))
        state = build_bell_state(label, gamma, n_max)
        rep = evaluate_witness(kind, state, basis=FourModeBasis(n_max))
        row = ["exact", kind.value, shown, gamma, n_max, 1.0,
               None, None, rep.value, None, *rep.variance_terms,
               None, None, None, rep.mean_s0]
    _write_csv(cfg["out"], header, [row])
    print(f"{kind.value} on {shown} at gamma={gamma}: value = {rep.value:.9g}"
          + (f" +- {rep.value_error:.3g}" if rep.value_error is not None else ""))
    print(f"wrote {cfg['out']}")
    files = [cfg["out"]]
    if cfg.get("pulse_log"):
        files.append(cfg["pulse_log"])
    return files


def _cmd_measures(cfg: dict) -> list[str]:
    from .measures import WidthConvention, gain_scan

    grid = _parse_grid(cfg["n0_grid"], "N0")
    rows = gain_scan(grid, convention=WidthConvention(cfg["convention"]))
    header = ["N0", "negativity", "kbar", "fedorov"]
    _write_csv(cfg["out"], header,
               [[r["n0"], r["negativity"], r["kbar"], r["fedorov"]] for r in rows])
    descriptor = cfg["out"] + ".plot.json"
    _write_json(descriptor, {
        "data": cfg["out"],
        "columns": header,
        "x": {"column": "N0", "label": "mean photons per mode N0", "scale": "log"},
        "y": {"columns": ["negativity", "kbar", "fedorov"],
              "label": "measure value", "scale": "log"},
        "width_convention": cfg["convention"],
        "asymptotes": {"negativity": "16*N0^2", "kbar": "4*N0^2", "fedorov": "2*N0^2"},
        "points": [{k: r[k] for k in ("n0", "gamma", "cutoff", "negativity_norm",
                                      "kbar_norm", "fedorov_norm")} for r in rows],
    })
    print(f"scanned {len(rows)} gains; wrote {cfg['out']}")
    return [cfg["out"], descriptor]


def _cmd_truncation(cfg: dict) -> list[str]:
    from .truncation import dimension_scan

    n0_list = _parse_grid(cfg["n0_grid"], "N0")
    targets = [cfg["epsilon"]] if cfg["epsilon"] else _parse_grid(
        cfg["epsilon_grid"], "epsilon")
    points = dimension_scan(n0_list, targets)
    header = ["epsilon", "n0", "ratio"]
    rows = [[p.epsilon_target, p.n0, p.occupancy] for p in points]
    _write_csv(cfg["out"], header, rows)
    meta_path = cfg["out"] + ".meta.json"
    _write_json(meta_path, {
        "data": cfg["out"],
        "columns": header,
        "n0_grid": n0_list,
        "epsilon_grid": targets,
        "ratio": "truncated effective mode number over retained dimension",
        "points": [{
            "n0": p.n0, "gamma": p.gamma, "epsilon_target": p.epsilon_target,
            "achieved_epsilon": p.achieved_epsilon, "alpha": p.alpha,
            "n_total": p.n_total, "dimension": p.dimension,
            "kbar_truncated": p.kbar_truncated, "ratio": p.occupancy,
        } for p in points],
    })
    p = points[-1]
    print(f"N0={p.n0:g}: eps<={p.epsilon_target:g} needs total cutoff "
          f"{p.n_total} (dim {p.dimension}, K^T/dim = {p.occupancy:.4f})")
    print(f"wrote {cfg['out']}")
    return [cfg["out"], meta_path]


def _cmd_crosswitness(cfg: dict) -> list[str]:
    from .witnesses import cross_witness_matrix

    mat, kinds, labels = cross_witness_matrix(cfg["gamma"], n_max=cfg["cutoff"])
    header = ["witness"] + [l.value for l in labels]
    rows = [[k.value, *mat[i]] for i, k in enumerate(kinds)]
    _write_csv(cfg["out"], header, rows)
    diag_ok = all(mat[i, i] < 0 for i in range(4))
    off_ok = all(mat[i, j] > 0 for i in range(4) for j in range(4) if i != j)
    print(f"gamma={cfg['gamma']}: diagonal negative: {diag_ok}; "
          f"off-diagonal positive: {off_ok}")
    print(f"wrote {cfg['out']}")
    return [cfg["out"]]


def _cmd_fedorov(cfg: dict) -> list[str]:
    from .measures import WidthConvention, fedorov_ratio
    from .simulate import SimConfig, estimate_fedorov

    sim = SimConfig(label=BellLabel(cfg["state"]), gamma=cfg["gamma"],
                    eta=cfg["eta"], pulses=cfg["pulses"], seed=cfg["seed"],
                    bin_width=cfg["bin_width"], workers=cfg["workers"])
    est = estimate_fedorov(sim, convention=cfg["convention"])
    exact = fedorov_ratio(cfg["gamma"], convention=WidthConvention(cfg["convention"]))
    header = ["state", "gamma", "eta", "pulses", "seed", "bin_width", "convention",
              "ratio", "ratio_h", "ratio_v",
              "marginal_width_h", "conditional_width_h",
              "marginal_width_v", "conditional_width_v",
              "exact_ratio", "rel_deviation"]
    row = [cfg["state"], cfg["gamma"], cfg["eta"], cfg["pulses"], cfg["seed"],
           cfg["bin_width"], cfg["convention"], est.ratio, est.ratio_h, est.ratio_v,
           est.marginal_width_h, est.conditional_width_h,
           est.marginal_width_v, est.conditional_width_v,
           exact, abs(est.ratio - exact) / exact if exact else math.nan]
    _write_csv(cfg["out"], header, [row])
    print(f"width ratio = {est.ratio:.6g} (exact {exact:.6g}, "
          f"deviation {abs(est.ratio - exact) / exact:.3%})")
    print(f"wrote {cfg['out']}")
    return [cfg["out"]]


def _cmd_sweep_eta(cfg: dict) -> tuple[list[str], dict]:
    from .witnesses import WitnessKind
    from .simulate import SimConfig, efficiency_sweep

    if cfg["eta_grid"]:
        grid = _parse_grid(cfg["eta_grid"], "eta")
    else:
        grid = list(np.linspace(cfg["eta_min"], cfg["eta_max"], cfg["eta_points"]))
    sim = SimConfig(label=BellLabel(cfg["state"]), gamma=cfg["gamma"],
                    pulses=cfg["pulses"], seed=cfg["seed"],
                    bin_width=cfg["bin_width"], workers=cfg["workers"])
    kind = WitnessKind(cfg["witness"]) if cfg["witness"] else None
    result = efficiency_sweep(sim, grid, kind=kind)
    header = ["eta", "value", "sigma", "certifies", "exact"]
    rows = [[p.eta, p.value, p.sigma, int(p.certifies), p.exact]
            for p in result.points]
    _write_csv(cfg["out"], header, rows)
    if result.certification_threshold is None:
        print("no grid point certifies entanglement at 3 sigma")
    else:
        print(f"certified down to eta = {result.certification_threshold:.4f} "
              "(3 sigma below zero)")
    if result.zero_crossing is None:
        print("no zero crossing bracketed by the grid")
    else:
        print(f"witness crosses zero near eta = {result.zero_crossing:.4f} (ideal 1/3)")
    print(f"wrote {cfg['out']}")
    return [cfg["out"]], {
        "certification_threshold_eta": result.certification_threshold,
        "zero_crossing_eta": result.zero_crossing,
    }


_COMMANDS = {
    "witness": _cmd_witness,
    "measures": _cmd_measures,
    "truncation": _cmd_truncation,
    "crosswitness": _cmd_crosswitness,
    "fedorov": _cmd_fedorov,
    "sweep-eta": _cmd_sweep_eta,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    t0 = time.time()
    try:
        cfg = _resolve_config(args)
        result = _COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (TruncationMassError, NumericError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    if isinstance(result, tuple):
        outputs, extra = result
    else:
        outputs, extra = result, None
    manifest = _write_manifest(args.command, cfg, outputs, t0, extra)
    print(f"wrote {manifest}")
    return 0


def run_from_manifest(path: str) -> int:
    """Re-execute the run a manifest describes (same outputs, same bytes)."""
    with open(path) as fh:
        doc = json.load(fh)
    argv = [doc["command"]]
    for key, value in sorted(doc["config"].items()):
        if value is None or value is False:
            continue
        flag = f"--{key.replace('_', '-')}"
        if value is True:
            argv.append(flag)
        else:
            argv.extend([flag, str(value)])
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
