#!/usr/bin/env python3
"""Run every experiment config and collect the CSV output.

    python scripts/run_experiments.py                 # all configs except the expensive ones
    python scripts/run_experiments.py table1 fig6     # configs whose name contains a pattern
    python scripts/run_experiments.py --all           # include the 22k-unknown 2D q=7 audit

The command is taken from the file name prefix: fig2/table1 -> converge,
fig3 -> spectrum, fig4/fig5/fig6 -> ltsaudit, evolve -> evolve.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from wavedg.cli import main as wavedg_main

ROOT = Path(__file__).resolve().parent.parent
COMMAND_BY_PREFIX = {
    "fig2": "converge",
    "table1": "converge",
    "fig3": "spectrum",
    "fig4": "ltsaudit",
    "fig5": "ltsaudit",
    "fig6": "ltsaudit",
    "evolve": "evolve",
}
EXPENSIVE = {"fig6_lts_audit_2d_q7"}


def command_for(path: Path) -> str:
    prefix = path.stem.split("_", 1)[0]
    try:
        return COMMAND_BY_PREFIX[prefix]
    except KeyError:
        raise SystemExit(f"no command known for {path.name}") from None


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("patterns", nargs="*", help="substrings selecting config names")
    ap.add_argument("--configs", type=Path, default=ROOT / "experiments")
    ap.add_argument("--out", type=Path, default=ROOT / "results")
    ap.add_argument("--all", action="store_true", help="also run configs marked expensive")
    args = ap.parse_args(argv)

    configs = sorted(args.configs.glob("*.cfg"))
    if args.patterns:
        configs = [p for p in configs if any(s in p.stem for s in args.patterns)]
    if not args.all:
        configs = [p for p in configs if p.stem not in EXPENSIVE]
    args.out.mkdir(parents=True, exist_ok=True)
    failures = 0
    for cfg in configs:
        cmd = command_for(cfg)
        out = args.out / f"{cfg.stem}.csv"
        extra = ["--snapshot-dir", str(args.out / cfg.stem)] if cmd == "evolve" else []
        t0 = time.perf_counter()
        code = wavedg_main([cmd, "--config", str(cfg), "--output", str(out), *extra])
        dt = time.perf_counter() - t0
        last = out.read_text().strip().splitlines()[-1] if out.exists() and out.stat().st_size else ""
        print(f"{cfg.stem:32s} {cmd:9s} exit={code} {dt:7.1f}s  {last}", flush=True)
        failures += code != 0
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
