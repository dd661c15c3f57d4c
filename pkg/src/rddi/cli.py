"""
Command-line front end.

    rddi run SCENARIO.yaml [--out-dir D] [--tolerance-profile fast|paper]
    rddi sweep SCENARIO.yaml --param atoms.layout.separation --values 0.01,0.02
    rddi sweep SCENARIO.yaml --param ... --values range:0.01:0.1:10
    rddi preset NAME [--out-dir D]      (``rddi preset --list`` to list)
    rddi self-test [--fault NAME]

Exit codes: 0 success, 1 self-test failures, 2 configuration error,
3 physics-regime error, 4 convergence failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .coupling import RegimeError
from .dynamics import StepSizeError
from .green import GeometryError, MieConvergenceError, ResonanceSearchError, SingularityError
from .material import MaterialDomainError
from .scenario import (
    PROFILES,
    ConfigError,
    load_scenario,
    preset_names,
    preset_path,
    run_scenario,
    sweep,
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_REGIME, EXIT_CONVERGENCE = 0, 1, 2, 3, 4


def _parse_values(text: str):
    """'a,b,c' or 'range:start:stop:n' (inclusive, linear) or 'logrange:start:stop:n'.

    An empty string gives an empty list (the sweep then writes an empty table).
    """
    try:
        if text.startswith(("range:", "logrange:")):
            kind, a, b, n = text.split(":")
            n = int(n)
            if n < 1:
                raise ValueError
            if kind == "range":
                return np.linspace(float(a), float(b), n).tolist()
            return np.geomspace(float(a), float(b), n).tolist()
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse --values '{text}'") from None
    return vals


def _parser():
    p = argparse.ArgumentParser(prog="rddi", description="Resonant dipole-dipole energy exchange")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out-dir", default=".", help="output directory (default: .)")
        sp.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
        sp.add_argument("--tolerance-profile", choices=sorted(PROFILES), default="paper")

    r = sub.add_parser("run", help="run a scenario file")
    r.add_argument("scenario")
    common(r)
    s = sub.add_parser("sweep", help="sweep one scalar parameter of a scenario")
    s.add_argument("scenario")
    s.add_argument("--param", required=True, help="dotted path, e.g. atoms.layout.separation")
    s.add_argument("--values", required=True, help="a,b,c | range:a:b:n | logrange:a:b:n")
    common(s)
    pr = sub.add_parser("preset", help="run a shipped preset")
    pr.add_argument("name", nargs="?")
    pr.add_argument("--list", action="store_true", help="list presets and exit")
    pr.add_argument("--show", action="store_true", help="print the preset YAML and exit")
    common(pr)
    st = sub.add_parser("self-test", help="run the acceptance criteria")
    st.add_argument("--fault", default=None, help="inject a named fault (testing the tester)")
    st.add_argument("--only", default=None, help="comma-separated criterion ids")
    st.add_argument("--tolerance-profile", choices=sorted(PROFILES), default="fast")
    st.add_argument("--threads", type=int, default=1)
    return p


def _summary_line(res):
    s = res.summary
    parts = [f"regime={s.get('regime')}"]
    for k in ("delta_AB", "K_AB"):
        v = s.get(k)
        if isinstance(v, dict):
            parts.append(f"{k}={v['re']:.6g}{v['im']:+.6g}i")
    for f in res.files:
        parts.append(os.fspath(f))
    return " ".join(parts)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _dispatch(args)
    except RegimeError as exc:
        print(f"rddi: regime error: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except (MieConvergenceError, ResonanceSearchError, StepSizeError) as exc:
        print(f"rddi: convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (ConfigError, GeometryError, SingularityError, MaterialDomainError, ValueError) as exc:
        print(f"rddi: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def _dispatch(args) -> int:
    if args.command == "run":
        res = run_scenario(load_scenario(args.scenario), args.out_dir, args.tolerance_profile)
        print(_summary_line(res))
    elif args.command == "sweep":
        path, rows = sweep(load_scenario(args.scenario), args.param, _parse_values(args.values),
                           args.out_dir, args.tolerance_profile, args.threads)
        print(f"{len(rows)} rows -> {path}")
    elif args.command == "preset":
        if args.list or not args.name:
            print("\n".join(preset_names()))
            return EXIT_OK
        p = preset_path(args.name)
        if args.show:
            print(p.read_text(), end="")
            return EXIT_OK
        res = run_scenario(load_scenario(p), args.out_dir, args.tolerance_profile)
        print(_summary_line(res))
    elif args.command == "self-test":
        from .acceptance import run_all

        only = args.only.split(",") if args.only else None
        report = run_all(profile=args.tolerance_profile, fault=args.fault, only=only)
        for r in report:
            print(json.dumps(r.as_dict(), sort_keys=True))
        return EXIT_OK if all(r.status != "fail" for r in report) else EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
