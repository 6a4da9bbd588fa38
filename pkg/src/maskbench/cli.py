"""
Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 domain error. Errors are written to
stderr as a JSON object ``{"error": ..., "message": ...}``. Angles are given in
degrees.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import experiments, maskers, photonics, secretshare
from .errors import MaskingError, TamperDetected
from .qcore import BlochVector
from .serialize import dumps, load_state, pure_from_json, save_state

DEFAULT_SEED = 0


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage().strip()}\n{self.prog}: error: {message}")


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _vector3(text):
    vals = _floats(text)
    if len(vals) != 3:
        raise argparse.ArgumentTypeError(f"expected x,y,z, got {text!r}")
    return vals


def _complex(text):
    vals = _floats(text)
    if len(vals) not in (1, 2):
        raise argparse.ArgumentTypeError(f"expected RE or RE,IM, got {text!r}")
    return complex(vals[0], vals[1] if len(vals) == 2 else 0.0)


def _seed(args):
    if args.seed is not None:
        return args.seed
    return int(os.environ.get("MASKBENCH_SEED", DEFAULT_SEED))


def _write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _emit(obj):
    sys.stdout.write(dumps(obj))


def _masker_from_args(args):
    if args.masker:
        with open(args.masker) as fh:
            return maskers.Masker.from_json(json.load(fh))
    return maskers.qubit_masker(math.radians(args.alpha), math.radians(args.theta))


def cmd_mask(args):
    m = _masker_from_args(args)
    rho_ab = maskers.mask(m, load_state(args.state))
    if args.out:
        save_state(rho_ab, args.out)
    ra, rb = maskers.marginals(rho_ab, *m.dims)
    _emit({"masker": m.label, "marginal_A": ra.to_json(), "marginal_B": rb.to_json(),
           "state": rho_ab.to_json()})


def cmd_unmask(args):
    m = _masker_from_args(args)
    rho = maskers.unmask(m, load_state(args.state))
    if args.out:
        save_state(rho, args.out)
    _emit({"masker": m.label, "state": rho.to_json()})


def cmd_disk(args):
    disk = maskers.disk_through(math.radians(args.alpha), math.radians(args.theta), BlochVector(*args.ref))
    tests = [{"point": p, "contains": maskers.disk_contains(disk, p, args.tol)} for p in args.test or []]
    _emit({"disk": disk.to_json(), "normal": list(disk.normal), "tests": tests})


def cmd_fusion(args):
    if args.photons is not None:
        with open(args.state) as fh:
            psi = pure_from_json(json.load(fh))
        out = photonics.fuse_qudit(psi, args.photons)
    elif args.source_p is not None:
        with open(args.state) as fh:
            psi = pure_from_json(json.load(fh))
        out = photonics.fuse_coherent(psi, args.source_p, args.amp)
    else:
        out = photonics.fuse_qubit(load_state(args.state))
    if args.out:
        save_state(out.state, args.out)
    _emit(out.to_json())


def cmd_sweep(args):
    phis = np.radians(args.phi)
    shifts = np.radians(experiments.shift_grid(args.shift_max, args.step))
    directions = (
        list(experiments.Direction) if args.direction == "both" else [experiments.Direction(args.direction)]
    )
    seed = _seed(args)
    records = []
    for k, direction in enumerate(directions):
        cfg = experiments.SweepConfig(phis, shifts, direction, args.shots)
        records += experiments.run_sweep_fig3(cfg, seed + k)
    meta = (
        f"grid: phi={','.join(f'{p:g}' for p in args.phi)} deg, shifts -{args.shift_max:g}..{args.shift_max:g} "
        f"step {args.step:g} deg (grid is a choice, not taken from the source data); "
        f"shots={args.shots if args.shots else 'exact'}; seed={seed}"
    )
    text = experiments.sweep_csv(records, meta)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    if args.report:
        max_dev = {}
        for d in directions:
            sel = [r for r in records if r.direction is d]
            ref = [experiments.meridian_trace_distance(r.phi, r.shift) if d is experiments.Direction.MERIDIAN else 0.0
                   for r in sel]
            max_dev[d.value] = max(abs(r.trace_distance - t) for r, t in zip(sel, ref))
        _write(args.report, dumps({"rows": len(records), "metadata": meta, "max_abs_deviation": max_dev}))
    if args.figure:
        from .plotting import plot_sweep

        plot_sweep(records, args.figure)


def cmd_demo(args):
    report = experiments.run_demo_fig2()
    text = dumps(report)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    if args.figure:
        from .plotting import plot_demo

        plot_demo(report, args.figure)


def cmd_channel(args):
    rho = load_state(args.state)
    report = experiments.run_channel_protection(rho, args.t)
    _emit(report)
    if args.figure:
        from .plotting import plot_channel

        ts = np.linspace(0, args.t_max, args.t_steps)
        plot_channel(experiments.channel_curve(rho, ts), args.figure)


def share_paths(prefix):
    return [f"{prefix}share{i}.bin" for i in (1, 2, 3)]


def cmd_share(args):
    pixels = secretshare.read_ppm(args.input)
    shares = secretshare.share_image(pixels)
    paths = share_paths(args.out_prefix)
    for share, path in zip(shares, paths):
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        secretshare.write_share(path, share)
    _emit({"shares": [{"path": p, "masker_id": s.masker_id} for p, s in zip(paths, shares)],
           "width": shares[0].width, "height": shares[0].height})


def cmd_reconstruct(args):
    shares = [secretshare.read_share(p) for p in args.shares]
    original = secretshare.read_ppm(args.compare) if args.compare else None
    result = secretshare.reconstruct_image(shares, original)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        secretshare.write_ppm(args.out, result.pixels)
    report = result.report()
    if args.report:
        _write(args.report, dumps(report))
    if args.figure:
        from .plotting import plot_images

        plot_images(original, result.pixels, args.figure)
    if result.tampered:
        raise TamperDetected(
            f"{len(result.tampered)} pixel(s) reconstruct outside the Bloch ball", result.tampered
        )
    _emit(report)


def build_parser():
    p = _Parser(prog="maskbench", description="Quantum information masking simulator.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def masker_flags(sp):
        sp.add_argument("--alpha", type=float, default=0.0, help="masker polar angle (deg)")
        sp.add_argument("--theta", type=float, default=0.0, help="masker azimuth (deg)")
        sp.add_argument("--masker", help="masker JSON file (overrides --alpha/--theta)")

    sp = sub.add_parser("mask", help="mask a state")
    sp.add_argument("--state", required=True)
    sp.add_argument("--out")
    masker_flags(sp)
    sp.set_defaults(func=cmd_mask)

    sp = sub.add_parser("unmask", help="apply the inverse isometry")
    sp.add_argument("--state", required=True)
    sp.add_argument("--out")
    masker_flags(sp)
    sp.set_defaults(func=cmd_unmask)

    sp = sub.add_parser("disk", help="maskable disk through a reference point")
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--theta", type=float, required=True)
    sp.add_argument("--ref", type=_vector3, required=True, help="x,y,z")
    sp.add_argument("--test", type=_vector3, action="append", help="x,y,z (repeatable)")
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.set_defaults(func=cmd_disk)

    sp = sub.add_parser("fusion", help="simulate the PBS fusion gate")
    sp.add_argument("--state", required=True)
    sp.add_argument("--photons", type=int, help="digit-wise qudit fusion on this many photon pairs")
    sp.add_argument("--source-p", type=float, help="single-photon source efficiency (coherent ancilla)")
    sp.add_argument("--amp", type=_complex, default=0.1, help="coherent amplitude RE[,IM]")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_fusion)

    sp = sub.add_parser("sweep", help="zero-measure sweep of Bob's marginal")
    sp.add_argument("--phi", type=_floats, default=[0.0, 30.0, 60.0])
    sp.add_argument("--shift-max", type=float, default=40.0)
    sp.add_argument("--step", type=float, default=2.0)
    sp.add_argument("--direction", choices=["meridian", "parallel", "both"], default="meridian")
    sp.add_argument("--shots", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", help="CSV path (stdout if omitted)")
    sp.add_argument("--report", help="JSON summary path")
    sp.add_argument("--figure", help="PNG path")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("demo", help="mask the five reference states of the x+y+z=1 disk")
    sp.add_argument("--out")
    sp.add_argument("--figure")
    sp.set_defaults(func=cmd_demo)

    sp = sub.add_parser("channel", help="phase-noise protection by masking")
    sp.add_argument("--state", required=True)
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--figure")
    sp.add_argument("--t-max", type=float, default=math.pi)
    sp.add_argument("--t-steps", type=int, default=101)
    sp.set_defaults(func=cmd_channel)

    sp = sub.add_parser("share", help="split a PPM image into three shares")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--out-prefix", required=True)
    sp.set_defaults(func=cmd_share)

    sp = sub.add_parser("reconstruct", help="recombine three shares")
    sp.add_argument("--shares", nargs=3, required=True)
    sp.add_argument("--out")
    sp.add_argument("--compare")
    sp.add_argument("--report")
    sp.add_argument("--figure")
    sp.set_defaults(func=cmd_reconstruct)
    return p


def _fail(kind, message, code, **extra):
    sys.stderr.write(json.dumps({"error": kind, "message": message, **extra}, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            raise UsageError(parser.format_help())
    except UsageError as exc:
        return _fail("usage", str(exc), 1)
    try:
        args.func(args)
    except TamperDetected as exc:
        return _fail("TamperDetected", str(exc), 2, pixels=[list(p) for p in exc.pixels])
    except (MaskingError, ValueError) as exc:
        return _fail(type(exc).__name__, str(exc), 2)
    except OSError as exc:
        return _fail("OSError", str(exc), 2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
