"""Command-line driver for the canned experiments.

Subcommands sweep one axis each and write the sweep CSV plus a JSON
summary; `lookup` runs the strategy grid and `dist-check` validates the
metric distributions. Flags override config-file values; the seed falls
back to the MSOND_SEED environment variable and then to 0. Exit codes:
0 success, 2 configuration error, 1 runtime error.
"""

import argparse
import json
import os
import sys
from pathlib import Path

from .channel import NetworkConfig
from .errors import ConfigurationError, MsondError
from .experiments import (
    MODE_CODES,
    ExperimentSpec,
    build_lookup_table,
    run_dist_check,
    run_experiment,
    write_lookup_outputs,
)

DEFAULTS = {
    "k": 2,
    "n": [200],
    "m": 4,
    "s": [1],
    "snr_db": [15.0],
    "rsinr_db": [10.0],
    "l_slots": 1001,
    "trials": 10_000,
    "seed": None,
    "mode": None,
    "out": None,
    "workers": 1,
    "samples": 100_000,
}

DEFAULT_SWEEPS = {
    "til-decay": ("n", [25, 50, 100, 200, 400, 800]),
    "rate-vs-snr": ("snr_db", [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0]),
    "rate-vs-n": ("n", [50, 100, 200, 500]),
    "rate-vs-rsinr": ("rsinr_db", [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]),
}

DEFAULT_MODES = {
    "til-decay": ["ar"],
    "rate-vs-snr": ["ar", "nar"],
    "rate-vs-n": ["ar", "nar"],
    "rate-vs-rsinr": ["fd", "ar"],
    "lookup": ["ar", "nar"],
    "dist-check": ["ar"],
}

_INT_LIST = ("n",)
_FLOAT_LIST = ("snr_db", "rsinr_db")
_INT = ("k", "m", "l_slots", "trials", "seed", "workers", "samples")


def _parse_list(raw, conv, key):
    if isinstance(raw, (list, tuple)):
        return [conv(v) for v in raw]
    try:
        return [conv(v) for v in str(raw).split(",") if v != ""]
    except ValueError as exc:
        raise ConfigurationError(f"malformed value for {key!r}: {raw!r}") from exc


def _coerce(key, raw):
    try:
        if key in _INT_LIST or key == "s":
            return _parse_list(raw, int, key)
        if key in _FLOAT_LIST:
            return _parse_list(raw, float, key)
        if key in _INT:
            return int(raw)
        if key == "mode":
            return [m.strip() for m in (raw if isinstance(raw, list) else str(raw).split(","))]
        return str(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"malformed value for {key!r}: {raw!r}") from exc


def _load_config_file(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigurationError(f"config file not found: {path}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigurationError("config file must hold a JSON object")
    for key in data:
        if key not in DEFAULTS:
            raise ConfigurationError(f"unknown config key {key!r}")
    return data


def parse_config(kind: str, flag_values: dict, config_file: str | None) -> dict:
    """Resolve file values and flags into one normalized option dict.

    Flags override file values, which override built-in defaults; unknown
    file keys are rejected and every value is type-checked here so later
    stages only see clean settings.
    """
    resolved = dict(DEFAULTS)
    if config_file:
        for key, raw in _load_config_file(config_file).items():
            resolved[key] = _coerce(key, raw)
    for key, raw in flag_values.items():
        if raw is not None:
            if key not in DEFAULTS:
                raise ConfigurationError(f"unknown option {key!r}")
            resolved[key] = _coerce(key, raw)
    if resolved["seed"] is None:
        env = os.environ.get("MSOND_SEED")
        resolved["seed"] = int(env) if env else 0
    if resolved["mode"] is None:
        resolved["mode"] = list(DEFAULT_MODES[kind])
    for code in resolved["mode"]:
        if code not in MODE_CODES:
            raise ConfigurationError(
                f"unknown mode {code!r} for key 'mode', expected ar/nar/fd"
            )
    for s in resolved["s"]:
        if s > resolved["m"]:
            raise ConfigurationError(f"key 's': stream count {s} exceeds m={resolved['m']}")
    if resolved["out"] is None:
        resolved["out"] = f"msond-{kind}.csv"
    resolved["kind"] = kind
    return resolved


def _scalar(opts, key):
    value = opts[key]
    if isinstance(value, list):
        if len(value) != 1:
            raise ConfigurationError(
                f"key {key!r} must be a single value here, got {value}"
            )
        return value[0]
    return value


def build_spec(opts) -> ExperimentSpec:
    kind = opts["kind"]
    sweep_key, _ = DEFAULT_SWEEPS[kind]
    sweep = opts[sweep_key]
    if not isinstance(sweep, list):
        sweep = [sweep]
    modes = tuple(MODE_CODES[c] for c in opts["mode"])
    n = max(sweep) if sweep_key == "n" else _scalar(opts, "n")
    snr_db = 15.0 if sweep_key == "snr_db" else float(_scalar(opts, "snr_db"))
    base = NetworkConfig(
        K=opts["k"],
        N=int(n),
        M=opts["m"],
        S=int(_scalar(opts, "s")),
        snr=10.0 ** (snr_db / 10.0),
        L=opts["l_slots"],
    )
    return ExperimentSpec(
        kind=kind,
        base=base,
        sweep=tuple(sweep),
        modes=modes,
        trials=opts["trials"],
        seed=opts["seed"],
        out=Path(opts["out"]),
        workers=opts["workers"],
        rsinr_db=float(_scalar(opts, "rsinr_db")),
    )


def _add_common_flags(sub):
    sub.add_argument("--k", help="number of source-destination pairs")
    sub.add_argument("--n", help="relay candidates (comma list on N sweeps)")
    sub.add_argument("--m", help="antennas per source/destination")
    sub.add_argument("--s", help="streams per pair (comma list for lookup)")
    sub.add_argument("--snr-db", dest="snr_db", help="snr in dB (comma list on snr sweeps)")
    sub.add_argument(
        "--rsinr-db",
        dest="rsinr_db",
        help="residual self-interference-to-noise ratio in dB (comma list on rsinr sweeps)",
    )
    sub.add_argument("--l-slots", dest="l_slots", help="data slots per block (odd)")
    sub.add_argument("--trials", help="Monte Carlo trials per sweep point")
    sub.add_argument("--seed", help="master seed (fallback: MSOND_SEED, then 0)")
    sub.add_argument("--mode", help="comma subset of ar,nar,fd")
    sub.add_argument("--out", help="output CSV path (JSON summary written next to it)")
    sub.add_argument("--workers", help="parallel worker processes")
    sub.add_argument("--config", help="JSON config file; flags override it")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="msond",
        description="Monte Carlo experiments for opportunistic two-hop relay selection",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    descriptions = {
        "til-decay": "mean largest selected TIL versus N (log-log decay)",
        "rate-vs-snr": "mean sum-rate versus snr for the chosen modes",
        "rate-vs-n": "mean sum-rate versus the number of relay candidates",
        "rate-vs-rsinr": "full-duplex benchmark versus residual self-interference",
        "lookup": "best (mode, S) strategy per (N, snr) cell",
        "dist-check": "KS distance of the metric samples against their Gamma laws",
    }
    for kind, desc in descriptions.items():
        s = sub.add_parser(kind, help=desc)
        _add_common_flags(s)
        if kind == "dist-check":
            s.add_argument("--samples", help="metric samples to draw")
    return parser


FLAG_KEYS = (
    "k",
    "n",
    "m",
    "s",
    "snr_db",
    "rsinr_db",
    "l_slots",
    "trials",
    "seed",
    "mode",
    "out",
    "workers",
    "samples",
)


def _run(kind: str, opts: dict) -> int:
    if kind in DEFAULT_SWEEPS:
        spec = build_spec(opts)
        print(json.dumps({"resolved": {k: v for k, v in opts.items() if not k.startswith("_")}}, default=str))
        result = run_experiment(spec)
        for p in result.points:
            print(
                f"{p.sweep_param}={p.value:g} mode={p.mode} S={p.S} "
                f"rate={p.mean_sum_rate:.4f} +/- {p.stderr:.4f} "
                f"til_last={p.mean_til_last:.4g} discarded={p.discarded}"
            )
        print(f"wrote {spec.out} and {Path(spec.out).with_suffix('.json')}")
        return 0
    if kind == "lookup":
        print(json.dumps({"resolved": {k: v for k, v in opts.items() if not k.startswith('_')}}, default=str))
        base = NetworkConfig(
            K=opts["k"],
            N=int(max(opts["n"])),
            M=opts["m"],
            S=1,
            snr=1.0,
            L=opts["l_slots"],
        )
        table = build_lookup_table(
            base=base,
            n_values=opts["n"],
            snr_db_values=opts["snr_db"],
            s_candidates=opts["s"],
            modes=[MODE_CODES[c] for c in opts["mode"]],
            trials=opts["trials"],
            seed=opts["seed"],
            workers=opts["workers"],
        )
        written = write_lookup_outputs(table, Path(opts["out"]))
        for c in table.cells:
            print(
                f"N={c.n} snr={c.snr_db:g}dB best={c.best_mode},S={c.best_s} "
                f"T_max={c.t_max:.4f}"
            )
        print("wrote " + ", ".join(str(w) for w in written))
        return 0
    # dist-check
    print(json.dumps({"resolved": {k: v for k, v in opts.items() if not k.startswith('_')}}, default=str))
    report = run_dist_check(
        K=opts["k"],
        S=int(_scalar(opts, "s")),
        M=opts["m"],
        samples=opts["samples"],
        seed=opts["seed"],
    )
    out = Path(opts["out"]).with_suffix(".json")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(report, indent=2) + "\n")
    print(
        f"stage1 KS={report['ks_stage1']:.5f} (shape {report['shape_stage1']}), "
        f"TIL KS={report['ks_til']:.5f} (shape {report['shape_til']})"
    )
    print(f"wrote {out}")
    return 0


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    kind = args.command
    try:
        flag_values = {key: getattr(args, key, None) for key in FLAG_KEYS}
        opts = parse_config(kind, flag_values, getattr(args, "config", None))
        if kind in DEFAULT_SWEEPS:
            sweep_key, default_sweep = DEFAULT_SWEEPS[kind]
            axis_given = flag_values.get(sweep_key) is not None or (
                getattr(args, "config", None)
                and sweep_key in _load_config_file(args.config)
            )
            if not axis_given:
                opts[sweep_key] = list(default_sweep)
        return _run(kind, opts)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except MsondError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
