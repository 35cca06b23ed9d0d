"""``wavedg <converge|spectrum|ltsaudit|evolve> --config FILE [--key value ...]``

Config files hold one ``key = value`` per line; ``#`` starts a comment.
Dotted keys (``flux.beta``, ``bc.left``) map onto the config dataclasses in
:mod:`wavedg.runs`.  Lists are comma separated.  Command-line ``--key value``
pairs override the file.  Exit codes: 0 success, 1 configuration error,
2 numerical failure.  ``WAVEDG_THREADS`` caps BLAS/OpenMP threads.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import math
import os
import sys
import types
import typing
from contextlib import nullcontext
from pathlib import Path

import numpy as np

from .runs import (
    ConfigError,
    ConvergeConfig,
    EvolveConfig,
    LtsAuditConfig,
    NumericalFailure,
    SpectrumConfig,
    run_convergence,
    run_evolve,
    run_ltsaudit,
    run_spectrum,
)

COMMANDS = {
    "converge": ConvergeConfig,
    "spectrum": SpectrumConfig,
    "ltsaudit": LtsAuditConfig,
    "evolve": EvolveConfig,
}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def read_config_file(path: str | Path) -> dict[str, str]:
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        out[key] = value
    return out


def _field_name(key: str) -> str:
    return key.replace(".", "_").replace("-", "_")


def _convert(value: str, tp, key: str):
    origin = typing.get_origin(tp)
    args = typing.get_args(tp)
    if origin in (typing.Union, types.UnionType):
        if value.strip().lower() in ("", "none", "auto"):
            if type(None) in args:
                return None
        inner = [a for a in args if a is not type(None)]
        return _convert(value, inner[0], key)
    if origin is tuple:
        items = [s for s in (p.strip() for p in value.split(",")) if s]
        if not items:
            raise ConfigError(f"{key}: empty list")
        return tuple(_convert(s, args[0], key) for s in items)
    try:
        if tp is bool:
            low = value.strip().lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError
        if tp is int:
            f = float(value)
            if not f.is_integer():
                raise ValueError
            return int(f)
        if tp is float:
            f = float(value)
            if not math.isfinite(f):
                raise ValueError
            return f
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {value!r} as {tp.__name__}") from None
    return value.strip()


def build_config(command: str, values: dict[str, str]):
    cls = COMMANDS[command]
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in values.items():
        name = _field_name(key)
        if name not in names:
            raise ConfigError(f"unknown key {key!r} for {command}")
        kwargs[name] = _convert(value, hints[name], key)
    cfg = cls(**kwargs)
    cfg.validate()
    return cfg


def _overrides(extra: list[str]) -> dict[str, str]:
    out = {}
    i = 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--") or len(tok) == 2:
            raise ConfigError(f"unexpected argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, value = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(extra):
                raise ConfigError(f"missing value for {tok}")
            value = extra[i + 1]
            i += 2
        out[key] = value
    return out


def _thread_limit():
    raw = os.environ.get("WAVEDG_THREADS")
    if not raw:
        return nullcontext()
    try:
        n = int(raw)
        if n < 1:
            raise ValueError
    except ValueError:
        raise ConfigError("WAVEDG_THREADS must be a positive integer") from None
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else str(x)
    return str(x)


def _writer(path: str | None):
    if path in (None, "", "-"):
        return nullcontext(sys.stdout)
    return open(path, "w", newline="")


def cmd_converge(cfg: ConvergeConfig, out) -> int:
    res = run_convergence(cfg, progress=lambda msg: print(msg, file=sys.stderr))
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["n", "h", "err_u", "err_v"])
    for row in res.rows:
        w.writerow([_fmt(x) for x in row])
    w.writerow(["rate", "", _fmt(res.rate_u), _fmt(res.rate_v)])
    return 0


def cmd_spectrum(cfg: SpectrumConfig, out) -> int:
    rows = run_spectrum(cfg)
    w = csv.writer(out, lineterminator="\n")
    header = ["qu", "h", "rho", "rho*h/qu"]
    if cfg.limits:
        header.append("limit/(rho*h)")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return 0


def cmd_ltsaudit(cfg: LtsAuditConfig, out) -> int:
    rep = run_ltsaudit(cfg)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["index", "1-|lambda|"])
    for i, _, margin in rep.rows():
        w.writerow([i, _fmt(margin)])
    w.writerow(["min", _fmt(rep.min_margin)])
    return 0


def cmd_evolve(cfg: EvolveConfig, out, snapshot_dir: str | None) -> int:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["t", "E^h", "err_u"])
    snap = Path(snapshot_dir) if snapshot_dir else None
    if snap is not None:
        snap.mkdir(parents=True, exist_ok=True)
    run_evolve(cfg, snap, on_row=lambda row: w.writerow([_fmt(x) for x in row]))
    return 0


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wavedg", description="Energy-based staggered DG for the wave equation.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="flat key = value file")
    ap.add_argument("--output", default="-", help="CSV destination (default stdout)")
    ap.add_argument("--snapshot-dir", default=None, help="evolve: directory for binary snapshots")
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = make_parser()
    try:
        args, extra = ap.parse_known_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        values = read_config_file(args.config)
        values.update(_overrides(extra))
        cfg = build_config(args.command, values)
        with _thread_limit(), _writer(args.output) as out:
            if args.command == "converge":
                return cmd_converge(cfg, out)
            if args.command == "spectrum":
                return cmd_spectrum(cfg, out)
            if args.command == "ltsaudit":
                return cmd_ltsaudit(cfg, out)
            return cmd_evolve(cfg, out, args.snapshot_dir)
    except NumericalFailure as exc:
        print(f"wavedg: numerical failure: {exc} (last good t={exc.last_good_time})", file=sys.stderr)
        return 2
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"wavedg: numerical failure: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:  # ConfigError and library argument checks such as the dense size guard
        print(f"wavedg: config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
