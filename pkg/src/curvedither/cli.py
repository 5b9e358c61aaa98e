"""Command-line pipeline: offline bank generation, online injection, tools.

Exit codes: 0 success, 2 usage error, 3 I/O error, 4 validation error.
Every subcommand is deterministic given its flags; all randomness is
seed-controlled and outputs are written via temp-file-and-rename.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from . import baselines, blut as blut_mod, image, inject, metrics, patterns
from .rng import derive_seed

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_VALIDATION = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="curvedither",
        description="Adaptive debanding via curved Markov-Gaussian noise injection.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("genbank", help="generate and store a noise pattern bank (offline stage)")
    p.add_argument("--out", required=True, help="output bank file (CMGN binary)")
    p.add_argument("--block-side", type=int, default=200)
    p.add_argument("--sites", type=int, default=300)
    p.add_argument("--variants", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mu0", type=float, default=2.0)
    p.add_argument("--sigma0", type=float, default=1.0)
    p.add_argument("--mu1", type=float, default=-2.0)
    p.add_argument("--sigma1", type=float, default=1.0)
    p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("quantize", help="simulate transmission quantization (adds banding)")
    p.add_argument("--in", dest="input", required=True, help="input image stem")
    p.add_argument("--out", required=True, help="output image stem")
    p.add_argument("--drop-bits", type=int, default=2)

    p = sub.add_parser("inject", help="dither a quantized image (online stage)")
    p.add_argument("--in", dest="input", required=True, help="input image stem")
    p.add_argument("--out", required=True, help="output image stem")
    p.add_argument("--bank", help="pattern bank file (curved method)")
    p.add_argument("--blut", help="BLUT JSON file (curved method)")
    p.add_argument("--gain", type=float, default=1.0)
    p.add_argument("--frame", type=int, default=0)
    p.add_argument("--method", choices=("curved", "gaussian", "lpf-gaussian"), default="curved")
    p.add_argument("--chroma", choices=("off", "fixed"), default="fixed")
    p.add_argument("--chroma-k", type=int, default=4)
    p.add_argument("--chroma-gain", type=float, default=None,
                   help="default: half of --gain")
    p.add_argument("--sigma", type=float, default=2.0, help="baseline noise std")
    p.add_argument("--kernel-radius", type=int, default=4, help="lpf-gaussian box radius")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--emit-hdr", help="also apply the BLUT to luma and write this HDR stem")
    p.add_argument("--threads", type=int, default=1,
                   help="parallelism cap; injection is a vectorized single pass, "
                        "so output is identical for any value")

    p = sub.add_parser("blut-inspect", help="print table regions, slopes and bin usage")
    p.add_argument("--blut", required=True)

    p = sub.add_parser("measure", help="banding diagnostics for an image")
    p.add_argument("--in", dest="input", required=True, help="image stem")
    p.add_argument("--ref", help="reference stem for matched-threshold comparison")
    p.add_argument("--csv", help="also write a CSV report")

    p = sub.add_parser("demo", help="end-to-end synthetic demo (ramp, bank, all methods)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)

    return parser


def _cmd_genbank(args) -> int:
    params = tuple(
        patterns.MarkovParams(p=p, mu0=args.mu0, sigma0=args.sigma0,
                              mu1=args.mu1, sigma1=args.sigma1)
        for p in patterns.TRANSITION_PROBABILITIES
    )
    bank = patterns.build_bank(
        block_side=args.block_side,
        site_count=args.sites,
        variants=args.variants,
        master_seed=args.seed,
        params_per_k=params,
        threads=args.threads,
    )
    patterns.save_bank(bank, args.out)
    print(f"wrote {args.out}: {bank.variants * 10} blocks of {bank.block_side}x{bank.block_side}")
    return EXIT_OK


def _cmd_quantize(args) -> int:
    img = image.load_image(args.input)
    image.save_image(image.quantize_codewords(img, args.drop_bits), args.out)
    print(f"wrote {args.out} (drop_bits={args.drop_bits})")
    return EXIT_OK


def _inject_curved(args, img) -> image.PlanarImage:
    bank = patterns.load_bank(args.bank)
    table = blut_mod.load_blut(args.blut)
    chroma_gain = args.chroma_gain if args.chroma_gain is not None else 0.5 * args.gain
    policy = (inject.ChromaPolicy.off() if args.chroma == "off"
              else inject.ChromaPolicy.fixed(args.chroma_k, chroma_gain))
    cfg = inject.InjectionConfig(
        gain_base=args.gain,
        chroma_policy=policy,
        frame_index=args.frame,
        tile_offset_seed=args.seed,
    )
    return inject.inject_frame(img, table, bank, cfg)


def _inject_baseline(args, img) -> image.PlanarImage:
    dither = (baselines.gaussian_dither if args.method == "gaussian"
              else baselines.lpf_gaussian_dither)
    planes = []
    for idx, plane in enumerate(img.planes):
        cfg = baselines.BaselineConfig(
            sigma=args.sigma,
            kernel_radius=args.kernel_radius,
            seed=derive_seed(args.seed, args.frame, idx),
        )
        planes.append(dither(plane, cfg, img.bit_depth))
    return image.PlanarImage(img.width, img.height, img.bit_depth, tuple(planes))


def _cmd_inject(args, parser) -> int:
    if args.method == "curved" and (not args.bank or not args.blut):
        parser.error("--method curved requires --bank and --blut")
    if args.emit_hdr and not args.blut:
        parser.error("--emit-hdr requires --blut")

    img = image.load_image(args.input)
    out = _inject_curved(args, img) if args.method == "curved" else _inject_baseline(args, img)
    image.save_image(out, args.out)
    print(f"wrote {args.out} (method={args.method}, frame={args.frame})")

    if args.emit_hdr:
        table = blut_mod.load_blut(args.blut)
        if (1 << out.bit_depth) != table.entries.size:
            raise ValueError(
                f"bit depth {out.bit_depth} does not match the "
                f"{table.entries.size}-entry table"
            )
        scale = float(1 << out.bit_depth)
        hdr = image.HdrImage(
            out.width,
            out.height,
            (
                blut_mod.apply_blut(table, out.y),
                out.cb.astype(np.float64) / scale,
                out.cr.astype(np.float64) / scale,
            ),
        )
        image.save_hdr_image(hdr, args.emit_hdr)
        print(f"wrote {args.emit_hdr} (inverse tone-mapped luma, 16-bit)")
    return EXIT_OK


def _cmd_blut_inspect(args) -> int:
    table = blut_mod.load_blut(args.blut)
    part = blut_mod.partition(table)
    prof = blut_mod.slopes(table, part)
    print(f"table: {args.blut}")
    print(f"highlight_threshold: {table.highlight_threshold}")
    print(f"Y0={part.y0} Yh={part.yh} Y1={part.y1}")
    spans = {
        blut_mod.Region.DOWN: (0, part.y0),
        blut_mod.Region.MID: (part.y0, part.yh),
        blut_mod.Region.HIGH: (part.yh, part.y1),
        blut_mod.Region.UP: (part.y1, 1024),
    }
    for region in blut_mod.Region:
        lo, hi = spans[region]
        count = int(np.sum(part.codes == region))
        span = f"[{lo}, {hi})" if hi > lo else "(empty)"
        print(f"region {region.name:<4} span {span:<14} codewords: {count}")
    print(f"max_slope (Mid+High): {prof.max_slope:.8g}")
    if prof.max_slope > 0.0:
        counts = [0] * 10
        for t in range(part.y0, part.y1):
            counts[blut_mod.probability_index(float(prof.slope[t]), prof.max_slope)] += 1
        for k, count in enumerate(counts):
            p = patterns.TRANSITION_PROBABILITIES[k]
            print(f"bin k={k} (p={p:.3f}): {count} codewords")
    else:
        print("flat table: injection disabled")
    return EXIT_OK


_PLANE_NAMES = ("y", "cb", "cr")


def _measure_rows(stem: str, label: str, threshold=None, flat_tol=None):
    img = image.load_image(stem)
    rows = []
    for name, plane in zip(_PLANE_NAMES, img.planes):
        report = metrics.banding_index(plane, threshold=threshold, flat_tol=flat_tol)
        rows.append((label, name, report))
    return rows


def _cmd_measure(args) -> int:
    ref_rows = []
    threshold = flat_tol = None
    if args.ref:
        ref_rows = _measure_rows(args.ref, "ref")
        threshold = ref_rows[0][2].threshold
        flat_tol = ref_rows[0][2].flat_tol
    rows = ref_rows + _measure_rows(args.input, "in", threshold, flat_tol)

    for label, name, r in rows:
        print(
            f"{label} plane={name} distinct={r.distinct_codewords} "
            f"steps={r.step_count} energy={r.step_energy:.2f} "
            f"noise_power={r.noise_power:.4f} threshold={r.threshold:g}"
        )
    if args.csv:
        _write_csv(args.csv, rows)
        print(f"wrote {args.csv}")
    return EXIT_OK


def _write_csv(path: str, rows) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["image", "plane", "distinct_codewords", "step_count",
             "step_energy", "noise_power", "threshold"]
        )
        for label, name, r in rows:
            writer.writerow(
                [label, name, r.distinct_codewords, r.step_count,
                 f"{r.step_energy:.6g}", f"{r.noise_power:.6g}", f"{r.threshold:g}"]
            )
    os.replace(tmp, path)


def _cmd_demo(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    join = lambda name: os.path.join(args.out, name)

    ramp = image.ramp_image(height=64)
    image.save_image(ramp, join("ramp"))
    banded = image.quantize_codewords(ramp, 2)
    image.save_image(banded, join("ramp_q"))

    table = blut_mod.linear_blut()
    blut_mod.save_blut(table, join("blut.json"))

    print("generating pattern bank (offline stage)...")
    bank = patterns.build_bank(variants=2, master_seed=args.seed)
    patterns.save_bank(bank, join("demo.bank"))

    cfg = inject.InjectionConfig(frame_index=0, tile_offset_seed=args.seed)
    curved = inject.inject_frame(banded, table, bank, cfg)
    image.save_image(curved, join("dither_curved"))
    hdr = image.HdrImage(
        curved.width, curved.height,
        (
            blut_mod.apply_blut(table, curved.y),
            curved.cb.astype(np.float64) / 1024.0,
            curved.cr.astype(np.float64) / 1024.0,
        ),
    )
    image.save_hdr_image(hdr, join("dither_curved_hdr"))

    outputs = {"dither_curved": curved}
    for method, dither in (("gaussian", baselines.gaussian_dither),
                           ("lpf_gaussian", baselines.lpf_gaussian_dither)):
        planes = tuple(
            dither(plane, baselines.BaselineConfig(sigma=2.0, kernel_radius=4,
                                                   seed=derive_seed(args.seed, idx)),
                   banded.bit_depth)
            for idx, plane in enumerate(banded.planes)
        )
        out = image.PlanarImage(banded.width, banded.height, banded.bit_depth, planes)
        image.save_image(out, join(f"dither_{method}"))
        outputs[f"dither_{method}"] = out

    base = metrics.banding_index(banded.y)
    rows = [("ramp_q", "y", base)]
    for name, img in outputs.items():
        rows.append(
            (name, "y",
             metrics.banding_index(img.y, threshold=base.threshold, flat_tol=base.flat_tol))
        )
    _write_csv(join("metrics.csv"), rows)
    for label, name, r in rows:
        print(
            f"{label:<22} distinct={r.distinct_codewords:<5} steps={r.step_count:<6} "
            f"noise_power={r.noise_power:.3f}"
        )
    print(f"demo outputs in {args.out}")
    return EXIT_OK


def run(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "genbank":
        return _cmd_genbank(args)
    if args.command == "quantize":
        return _cmd_quantize(args)
    if args.command == "inject":
        return _cmd_inject(args, parser)
    if args.command == "blut-inspect":
        return _cmd_blut_inspect(args)
    if args.command == "measure":
        return _cmd_measure(args)
    if args.command == "demo":
        return _cmd_demo(args)
    parser.error(f"unknown command {args.command!r}")
    return EXIT_USAGE


def main(argv=None) -> int:
    try:
        return run(argv)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
