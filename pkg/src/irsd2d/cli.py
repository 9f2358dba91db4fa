"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .baselines import ALL_SCHEMES, SchemeId
from .channel import ChannelModel, save_channel_sample
from .harness import (SWEEP_AXES, convergence_curve, csi_overhead, run_trial, run_trials,
                      summarize_sweep, sweep)
from .matching import solve_assignment
from .report import (OVERHEAD_COLUMNS, SWEEP_COLUMNS, SWEEP_SUMMARY_COLUMNS, write_convergence,
                     write_csv, write_manifest, write_slots, write_summaries)
from .rng import substream
from .scenario import ConfigError, ScenarioConfig, config_from_dict, materialize, pad_blank_users

USAGE_ERROR, RUNTIME_ERROR = 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


@dataclass
class Command:
    name: str
    config: Optional[Path] = None
    outdir: Path = Path("out")
    seed: Optional[int] = None
    schemes: list = field(default_factory=list)
    axis: Optional[str] = None
    values: list = field(default_factory=list)
    trials: Optional[int] = None
    overrides: list = field(default_factory=list)
    plot: bool = True
    jobs: int = 1
    cost: Optional[Path] = None
    dump_channels: bool = False


def _csv_list(text: str) -> list:
    return [v.strip() for v in text.split(",") if v.strip()]


def _scheme_list(text: str) -> list:
    out = []
    for s in _csv_list(text):
        try:
            out.append(SchemeId(s).value)
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"unknown scheme {s!r}; choose from {', '.join(x.value for x in SchemeId)}")
    return out


def _number_list(text: str) -> list:
    try:
        return [float(v) for v in _csv_list(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="irsd2d", description="IRS-assisted D2D offloading simulator.",
                epilog="exit codes: 0 success, 1 usage error, 2 runtime error")
    sub = p.add_subparsers(dest="name", required=True, parser_class=_Parser)

    def common(sp, config_required=True):
        sp.add_argument("--config", type=Path, required=config_required,
                        help="YAML scenario file (nested sections allowed)")
        sp.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override one config field; repeatable")
        sp.add_argument("--out", dest="outdir", type=Path, default=Path("out"),
                        help="output directory (default: out)")
        sp.add_argument("--seed", type=int, help="master seed (default: config rng_seed)")
        sp.add_argument("--no-plot", dest="plot", action="store_false",
                        help="skip rendering PNG figures")

    def runs(sp, default_schemes):
        sp.add_argument("--trials", type=int, help="Monte Carlo trials (default: config trials)")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes (default: 1)")
        sp.add_argument("--schemes", type=_scheme_list, default=default_schemes,
                        help="comma-separated scheme ids")

    r = sub.add_parser("run", help="simulate one scheme; per-slot CSV output")
    common(r)
    r.add_argument("--scheme", type=lambda s: _scheme_list(s)[0], default="proposed-tts",
                   help="scheme id (default: proposed-tts)")
    r.add_argument("--trials", type=int, help="Monte Carlo trials (default: config trials)")
    r.add_argument("--dump-channels", action="store_true",
                   help="also save the first slot's channels of each trial (.npz)")

    s = sub.add_parser("sweep", help="mean delay versus one parameter")
    common(s)
    s.add_argument("--axis", choices=sorted(SWEEP_AXES), required=True)
    s.add_argument("--values", type=_number_list, required=True,
                   help="comma-separated axis values")
    runs(s, [x.value for x in ALL_SCHEMES])

    c = sub.add_parser("convergence", help="per-frame mean delay over trials")
    common(c)
    runs(c, ["proposed-tts"])

    o = sub.add_parser("overhead", help="CSI overhead per frame, TTS vs STS")
    common(o, config_required=False)
    o.add_argument("--values", type=_number_list,
                   help="comma-separated M values (default: config M)")

    m = sub.add_parser("match-debug", help="solve an assignment from a CSV cost matrix")
    m.add_argument("--cost", type=Path, required=True, help="CSV file, one row per task user")
    return p


def parse_cli(argv=None) -> Command:
    ns = build_parser().parse_args(argv)
    d = vars(ns)
    cmd = Command(name=d.pop("name"))
    if "scheme" in d:
        cmd.schemes = [d.pop("scheme")]
    for k, v in d.items():
        setattr(cmd, k, v)
    if cmd.trials is not None and cmd.trials < 1:
        raise UsageError("--trials must be ≥ 1")
    if cmd.jobs < 1:
        raise UsageError("--jobs must be ≥ 1")
    return cmd


def resolve_config(cmd: Command) -> ScenarioConfig:
    raw = {}
    if cmd.config is not None:
        if not cmd.config.exists():
            raise UsageError(f"config file not found: {cmd.config}")
        raw = yaml.safe_load(cmd.config.read_text()) or {}
    base = config_from_dict(raw)
    if not cmd.overrides:
        return base
    changes = {}
    for item in cmd.overrides:
        if "=" not in item:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        changes[key.strip()] = yaml.safe_load(value)
    return config_from_dict(changes, base=base)


def _prepare(outdir: Path) -> Path:
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {outdir}: {exc.strerror}") from exc
    return outdir


def cmd_run(cmd: Command, config: ScenarioConfig) -> list:
    out = _prepare(cmd.outdir)
    seed = config.rng_seed if cmd.seed is None else cmd.seed
    scheme = cmd.schemes[0]
    trials = config.trials if cmd.trials is None else cmd.trials
    files, results = [], []
    for tr in range(trials):
        res = run_trial(config, scheme, seed, tr)
        results.append(res)
        files.append(write_slots(out / f"slots_{scheme}_trial{tr}.csv", res.slots))
        if cmd.dump_channels:
            users, helpers = materialize(config, seed, tr)
            model = ChannelModel(users, pad_blank_users(helpers, config.n_users), config)
            path = out / f"channels_trial{tr}_frame0_slot0.npz"
            save_channel_sample(path, model.draw(substream(seed, tr, 0, 0)))
    summaries = [r.summary for r in results]
    files.append(write_summaries(out / f"summary_{scheme}.csv", summaries))
    curves = convergence_curve(results)
    files.append(write_convergence(out / f"convergence_{scheme}.csv", curves))
    if cmd.plot:
        from .plotting import plot_convergence
        plot_convergence(curves, out / f"convergence_{scheme}.png")
    write_manifest(out, "run", config, seed, files,
                   {"scheme": scheme, "trials": trials,
                    "wall_clock_s": [round(s.wall_clock, 3) for s in summaries]})
    print(f"{scheme}: mean delay {np.mean([s.mean_delay for s in summaries]):.6g} s "
          f"over {trials} trial(s) -> {out}")
    return files


def cmd_convergence(cmd: Command, config: ScenarioConfig) -> list:
    out = _prepare(cmd.outdir)
    seed = config.rng_seed if cmd.seed is None else cmd.seed
    results = run_trials(config, cmd.schemes, cmd.trials, seed, cmd.jobs)
    curves = convergence_curve(results)
    files = [write_convergence(out / "convergence.csv", curves)]
    if cmd.plot:
        from .plotting import plot_convergence
        plot_convergence(curves, out / "convergence.png")
    write_manifest(out, "convergence", config, seed, files,
                   {"schemes": cmd.schemes, "trials": cmd.trials or config.trials})
    for s, y in curves.items():
        print(f"{s}: frame 1 {y[0]:.6g} s, final {y[-1]:.6g} s")
    return files


def cmd_sweep(cmd: Command, config: ScenarioConfig) -> list:
    out = _prepare(cmd.outdir)
    seed = config.rng_seed if cmd.seed is None else cmd.seed
    rows = sweep(config, cmd.axis, cmd.values, cmd.schemes, cmd.trials, seed, cmd.jobs)
    table = summarize_sweep(rows)
    files = [write_csv(out / f"sweep_{cmd.axis}.csv", SWEEP_COLUMNS, rows),
             write_csv(out / f"sweep_{cmd.axis}_summary.csv", SWEEP_SUMMARY_COLUMNS, table)]
    if cmd.plot:
        from .plotting import plot_sweep
        plot_sweep(table, out / f"sweep_{cmd.axis}.png")
    write_manifest(out, "sweep", config, seed, files,
                   {"axis": cmd.axis, "values": cmd.values, "schemes": cmd.schemes,
                    "trials": cmd.trials or config.trials})
    for r in table:
        print(f"{r['axis']}={r['value']:g} {r['scheme']}: {r['mean']:.6g} ± {r['ci95']:.2g} s")
    return files


def overhead_rows(config: ScenarioConfig, m_values=None) -> list:
    rows = []
    for m in (m_values or [config.n_elements]):
        for scheme in ("proposed-tts", "sts"):
            oh = csi_overhead(scheme, config.n_users, config.n_helpers, int(m),
                              config.slots_per_frame, config.bits_per_coefficient)
            rows.append({"scheme": "tts" if scheme == "proposed-tts" else "sts",
                         "I": config.n_users, "J": config.n_helpers, "M": int(m),
                         "T_s": config.slots_per_frame,
                         "bits_per_coefficient": config.bits_per_coefficient,
                         "coefficients": oh["coefficients"], "bits": oh["bits"]})
    return rows


def cmd_overhead(cmd: Command, config: ScenarioConfig) -> list:
    out = _prepare(cmd.outdir)
    rows = overhead_rows(config, cmd.values)
    files = [write_csv(out / "overhead.csv", OVERHEAD_COLUMNS, rows)]
    if cmd.plot and len({r["M"] for r in rows}) > 1:
        from .plotting import plot_overhead
        plot_overhead(rows, out / "overhead.png")
    write_manifest(out, "overhead", config, config.rng_seed, files)
    for r in rows:
        print(f"M={r['M']} {r['scheme']}: {r['coefficients']} coefficients, {r['bits']} bits")
    return files


def read_cost_csv(path: Path) -> np.ndarray:
    if not path.exists():
        raise UsageError(f"cost file not found: {path}")
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    try:
        return np.array([[float(v) for v in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None


def cmd_match_debug(cmd: Command) -> dict:
    cost = read_cost_csv(cmd.cost)
    outcome = solve_assignment(cost)
    result = {"assignment": [int(j) for j in outcome.assignment], "total": outcome.total}
    print(json.dumps(result))
    return result


def main(argv=None) -> int:
    try:
        cmd = parse_cli(argv)
        if cmd.name == "match-debug":
            cmd_match_debug(cmd)
            return 0
        config = resolve_config(cmd)
        {"run": cmd_run, "sweep": cmd_sweep, "convergence": cmd_convergence,
         "overhead": cmd_overhead}[cmd.name](cmd, config)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (UsageError, ConfigError) as exc:
        print(f"irsd2d: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (OSError, ValueError, FloatingPointError) as exc:
        print(f"irsd2d: runtime error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR
    return 0


if __name__ == "__main__":
    sys.exit(main())
