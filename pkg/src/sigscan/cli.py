"""Command-line surface: detect, crack, eval, synth.

Exit codes: 0 on success, 1 on argument errors (including unknown
subcommands and invalid flag combinations), 2 on unreadable or malformed
input files. All diagnostics go to stderr; result files are written only
on success paths.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict

import numpy as np
from scipy.ndimage import binary_erosion

from sigscan import evaluate, pnm, synth
from sigscan.crack import detect_cracks
from sigscan.detect import detect_all
from sigscan.families import ImageGeometry, make_family

FAMILY_TOKENS = {
    "tile": "tiles",
    "strip": "strips",
    "ring": "rings",
    "bstrip": "bounded-strips",
}


class _Parser(argparse.ArgumentParser):
    """argparse with exit status 1 on argument errors instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _size(text: str):
    try:
        w, h = text.lower().split("x")
        w, h = int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from None
    if w < 1 or h < 1:
        raise argparse.ArgumentTypeError(f"size must be positive, got {text!r}")
    return w, h


def _radii(text: str):
    try:
        values = [int(tok) for tok in text.split(",") if tok != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected r1,r2,..., got {text!r}") from None
    if not values or min(values) < 0:
        raise argparse.ArgumentTypeError(f"radii must be nonnegative, got {text!r}")
    return values


def _plant(text: str):
    parts = text.split(":")
    if len(parts) != 3 or parts[0] not in FAMILY_TOKENS:
        raise argparse.ArgumentTypeError(
            f"expected family:c1,c2,..:density with family in "
            f"{sorted(FAMILY_TOKENS)}, got {text!r}"
        )
    try:
        cells = tuple(int(tok) for tok in parts[1].split(","))
        density = float(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad plant spec {text!r}") from None
    if not 0.0 <= density <= 1.0:
        raise argparse.ArgumentTypeError(f"plant density must be in [0, 1], got {text!r}")
    return FAMILY_TOKENS[parts[0]], cells, density


def _positive(kind):
    def parse(text: str):
        try:
            value = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
        if value <= 0:
            raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
        return value

    return parse


def _default_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    raw = os.environ.get("SIGSCAN_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(_fail(1, f"SIGSCAN_SEED must be an integer, got {raw!r}"))


def _fail(code: int, message: str) -> int:
    print(f"sigscan: {message}", file=sys.stderr)
    return code


def _round_floats(obj):
    """Limit every float to 9 significant digits, recursively."""
    if isinstance(obj, float):
        return float(format(obj, ".9g"))
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def _write_json(path, payload):
    with open(path, "w", encoding="ascii") as f:
        json.dump(_round_floats(payload), f, indent=1)
        f.write("\n")


def _detection_payload(family_token, image_name, result):
    return {
        "family": family_token,
        "image": str(image_name),
        "p": result.p,
        "ln_eta2": result.ln_candidates,
        "detections": [
            {
                "params": asdict(det.params),
                "kappa": det.kappa,
                "nu": det.nu,
                "significance": det.s,
                "iteration": det.iteration,
            }
            for det in result.detections
        ],
    }


def _write_curve(path, curves):
    lines = ["iteration,nu,kappa,significance"]
    for iteration, (nus, kaps, sig) in enumerate(curves):
        for n, k, s in zip(nus, kaps, sig):
            lines.append(f"{iteration},{int(n)},{int(k)},{format(float(s), '.9g')}")
    with open(path, "w", encoding="ascii") as f:
        f.write("\n".join(lines) + "\n")


def _boundaries(family, detections, shape):
    edge = np.zeros(shape, bool)
    for det in detections:
        mask = family.pattern_pixels(det.cells)
        edge |= mask & ~binary_erosion(mask)
    return edge


def _load_input(args):
    """Read the input image, policing the threshold flag before parsing.

    Flag misuse (gray file without --threshold, bitmap with one) is an
    argument error; actual file damage surfaces later as PnmError.
    """
    magic = pnm.read_magic(args.infile)
    if magic in pnm.MAGIC_GRAY and args.threshold is None:
        raise SystemExit(_fail(1, f"{magic} input requires --threshold"))
    if magic in pnm.MAGIC_BITMAP and args.threshold is not None:
        raise SystemExit(_fail(1, "--threshold given for an already binary input"))
    return pnm.read_binary(args.infile, threshold=args.threshold)


def _cmd_detect(args) -> int:
    image = _load_input(args)
    config = {}
    name = FAMILY_TOKENS[args.family]
    if args.rho_step is not None:
        config["d_rho"] = args.rho_step
    if args.theta_step is not None:
        if name in ("strips", "bounded-strips"):
            config["d_theta"] = args.theta_step
        else:
            return _fail(1, f"--theta-step does not apply to {args.family}")
    if args.phi_step is not None:
        if name != "bounded-strips":
            return _fail(1, "--phi-step only applies to bstrip")
        config["d_phi"] = args.phi_step
    if args.stride is not None:
        if name != "rings":
            return _fail(1, "--stride only applies to ring")
        config["stride"] = args.stride
    if args.max_width is not None:
        if name != "bounded-strips":
            return _fail(1, "--max-width only applies to bstrip")
        config["max_width"] = args.max_width
    family = make_family(name, ImageGeometry.of(image), **config)
    ln_eta2 = math.log(args.eta2) if args.eta2 is not None else None
    result = detect_all(
        image, family, seed=_default_seed(args), threads=args.threads, ln_eta2=ln_eta2
    )
    _write_json(args.out, _detection_payload(args.family, args.infile, result))
    if args.curve is not None:
        _write_curve(args.curve, result.curves)
    if args.overlay is not None:
        edge = _boundaries(family, result.detections, image.shape)
        pnm.write_pixmap(args.overlay, pnm.compose_overlay(image, edge))
    return 0


def _cmd_crack(args) -> int:
    image = _load_input(args)
    window_w, window_h = args.window
    result = detect_cracks(
        image,
        window_w=window_w,
        window_h=window_h,
        seed=_default_seed(args),
        threads=args.threads,
    )
    pnm.write_bitmap(args.out_mask, result.mask)
    _write_json(
        args.out,
        _detection_payload("bstrip-chain", args.infile, result.chained),
    )
    return 0


def _cmd_eval(args) -> int:
    rows = evaluate.score_paths(args.det, args.gt, args.radius)
    agg = evaluate.aggregate(rows)
    lines = ["name,radius,precision,recall,tp,fp,fn"]
    for name, radius, score in rows:
        lines.append(
            f"{name},{radius},{format(score.precision, '.9g')},"
            f"{format(score.recall, '.9g')},{score.tp},{score.fp},{score.fn}"
        )
    for radius in sorted(agg):
        for stat in ("mean", "median", "p25", "p75"):
            pr = agg[radius]["precision"][stat]
            rc = agg[radius]["recall"][stat]
            lines.append(
                f"{stat},{radius},{format(pr, '.9g')},{format(rc, '.9g')},,,"
            )
    with open(args.out, "w", encoding="ascii") as f:
        f.write("\n".join(lines) + "\n")
    return 0


def _cmd_synth(args) -> int:
    n_cols, n_rows = args.size
    synth.write_scene_fixture(
        args.out,
        n_cols,
        n_rows,
        args.p,
        args.plant or [],
        seed=_default_seed(args),
    )
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="sigscan", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    detect = sub.add_parser("detect", help="scan one image with one pattern family")
    detect.add_argument("--family", required=True, choices=sorted(FAMILY_TOKENS))
    detect.add_argument("--in", dest="infile", required=True, metavar="PNM")
    detect.add_argument("--out", required=True, metavar="JSON")
    detect.add_argument("--curve", metavar="CSV")
    detect.add_argument("--overlay", metavar="PPM")
    detect.add_argument("--threshold", type=int, metavar="T",
                        help="binarize gray inputs at value >= T")
    detect.add_argument("--theta-step", type=_positive(float), metavar="RAD")
    detect.add_argument("--rho-step", type=_positive(float), metavar="PX")
    detect.add_argument("--phi-step", type=_positive(float), metavar="RAD")
    detect.add_argument("--stride", type=_positive(int), metavar="PX")
    detect.add_argument("--max-width", type=_positive(int), metavar="CELLS")
    detect.add_argument("--eta2", type=_positive(float), metavar="N",
                        help="override the number-of-tests correction")
    detect.add_argument("--seed", type=int)
    detect.add_argument("--threads", type=_positive(int), default=1)
    detect.set_defaults(func=_cmd_detect)

    crack = sub.add_parser("crack", help="two-scale crack pipeline")
    crack.add_argument("--in", dest="infile", required=True, metavar="PNM")
    crack.add_argument("--window", type=_size, default=(64, 64), metavar="WxH")
    crack.add_argument("--out-mask", required=True, metavar="PBM")
    crack.add_argument("--out", required=True, metavar="JSON")
    crack.add_argument("--threshold", type=int, metavar="T")
    crack.add_argument("--seed", type=int)
    crack.add_argument("--threads", type=_positive(int), default=1)
    crack.set_defaults(func=_cmd_crack)

    evalp = sub.add_parser("eval", help="precision/recall with dilation tolerance")
    evalp.add_argument("--det", required=True, metavar="PBM|DIR")
    evalp.add_argument("--gt", required=True, metavar="PBM|DIR")
    evalp.add_argument("--radius", type=_radii, required=True, metavar="R1,R2,...")
    evalp.add_argument("--out", required=True, metavar="CSV")
    evalp.set_defaults(func=_cmd_eval)

    synthp = sub.add_parser("synth", help="emit a seeded synthetic fixture")
    synthp.add_argument("--out", required=True, metavar="PBM")
    synthp.add_argument("--size", type=_size, required=True, metavar="WxH")
    synthp.add_argument("--p", type=float, required=True,
                        help="background Bernoulli density")
    synthp.add_argument("--plant", type=_plant, action="append",
                        metavar="FAMILY:C1,C2,..:DENSITY")
    synthp.add_argument("--seed", type=int)
    synthp.set_defaults(func=_cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except pnm.PnmError as e:
        return _fail(2, f"malformed input: {e}")
    except OSError as e:
        return _fail(2, f"cannot read or write: {e}")
    except SystemExit as e:
        return int(e.code or 0)
    except ValueError as e:
        return _fail(1, str(e))


if __name__ == "__main__":
    sys.exit(main())
