"""Command line entry point: ``protinfer {infer,compare,digest,bench}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

from . import bench, ingest, pipeline
from .errors import ProtInferError

IO_ERROR_EXIT = 3

# config field -> (flag, type, help)
_OVERRIDES = {
    "psm_path": ("--psms", str, "PSM table (spectrum, peptide, probability)"),
    "membership_path": ("--memberships", str, "peptide-protein table"),
    "fasta_path": ("--fasta", str, "protein FASTA to digest instead of a membership table"),
    "missed_cleavages": ("--missed-cleavages", int, "digestion: allowed missed cleavages"),
    "min_length": ("--min-length", int, "digestion: minimum peptide length"),
    "max_length": ("--max-length", int, "digestion: maximum peptide length"),
    "method": ("--method", str, "mp, ed or lp"),
    "weighting": ("--weighting", str, "probability or unit"),
    "calibration": ("--calibration", str, "em or normalize"),
    "reference_mode": ("--reference-mode", str, "list or decoy"),
    "reference": ("--reference", str, "reference list path, or decoy prefix"),
    "output_dir": ("--output-dir", str, "where to write artifacts"),
    "psm_probability_floor": ("--psm-floor", float, "drop PSMs below this probability"),
    "lp_iteration_cap": ("--lp-iteration-cap", int, "simplex pivot limit"),
    "em_iteration_cap": ("--em-iteration-cap", int, "EM iteration limit"),
    "workers": ("--workers", int, "processes for per-component LP solving"),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="protinfer",
                                     description="Protein inference from spectral counts.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    infer = sub.add_parser("infer", help="run the inference pipeline")
    infer.add_argument("--config", help="JSON run configuration")
    for name, (flag, typ, help_) in _OVERRIDES.items():
        infer.add_argument(flag, dest=name, type=typ, help=help_, default=None)
    infer.add_argument("--dump-lp", dest="dump_lp", action="store_true", default=None,
                       help="also write the LP in CPLEX LP format")

    compare = sub.add_parser("compare", help="TP counts at fixed q-values for two runs")
    compare.add_argument("run_a")
    compare.add_argument("run_b")
    compare.add_argument("-o", "--output")

    digest = sub.add_parser("digest", help="tryptic digest of a FASTA file")
    digest.add_argument("fasta")
    digest.add_argument("--missed-cleavages", type=int, default=0)
    digest.add_argument("--min-length", type=int, default=6)
    digest.add_argument("--max-length", type=int, default=50)
    digest.add_argument("-o", "--output")

    bench_p = sub.add_parser("bench", help="synthetic benchmark data")
    bench_sub = bench_p.add_subparsers(dest="bench_command", required=True)
    gen = bench_sub.add_parser("generate", help="write psms.tsv, memberships.tsv, reference.txt")
    gen.add_argument("--spec", help="JSON SynthSpec; defaults are used for missing fields")
    gen.add_argument("--out", default=".", help="output directory")
    return parser


def _cmd_infer(args) -> int:
    if args.config:
        config = pipeline.load_config(args.config)
    else:
        config = pipeline.RunConfig()
    for f in fields(pipeline.RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            setattr(config, f.name, v)
    result = pipeline.run_pipeline(config)
    s = result.summary
    print(f"{s['spectra']} spectra, {s['peptides']} peptides, {s['proteins']} proteins "
          f"in {s['components']} components; TP at q=0.01: {s['tp_at_q']['0.01']}; "
          f"artifacts in {result.output_dir}")
    return 0


def _write_or_print(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_compare(args) -> int:
    rows = pipeline.compare_runs(args.run_a, args.run_b)
    text = pipeline.format_comparison(rows, Path(args.run_a).name, Path(args.run_b).name)
    _write_or_print(text, args.output)
    return 0


def _cmd_digest(args) -> int:
    try:
        with open(args.fasta, encoding="utf-8") as fh:
            pairs = ingest.digest_fasta(fh, args.missed_cleavages, args.min_length,
                                        args.max_length)
    except ValueError as exc:
        if isinstance(exc, ProtInferError):
            raise
        print(f"protinfer: {exc}", file=sys.stderr)
        return 2
    lines = ["peptide\tprotein"] + [f"{p}\t{a}" for p, a in pairs]
    _write_or_print("\n".join(lines) + "\n", args.output)
    return 0


def _cmd_bench(args) -> int:
    spec = bench.load_spec(args.spec) if args.spec else bench.SynthSpec()
    paths = bench.generate(spec).write(args.out)
    print(json.dumps({k: str(v) for k, v in paths.items()}, sort_keys=True))
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"infer": _cmd_infer, "compare": _cmd_compare, "digest": _cmd_digest,
                "bench": _cmd_bench}
    try:
        return handlers[args.command](args)
    except ProtInferError as exc:
        print(f"protinfer: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        where = f"{exc.filename}: " if getattr(exc, "filename", None) else ""
        print(f"protinfer: I/O error: {where}{exc.strerror or exc}", file=sys.stderr)
        return IO_ERROR_EXIT


if __name__ == "__main__":
    sys.exit(main())
