"""Command-line entry point: ``rpys run-script``, ``rpys rpys-co`` and ``rpys compare``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import warnings
from pathlib import Path

from . import __version__
from .cluster import ClusterConfig
from .co import MarkerQuery, NoMatchesWarning, run_rpys_co, suggest_markers
from .export import cr_csv_text, graph_csv_text, read_graph_csv, render_svg
from .model import RPYSError, YearRange
from .script import ScriptError, ScriptIOError, execute, parse_script
from .wos import ImportConfig, read_corpus

EXIT_OK = 0
EXIT_SCRIPT = 1
EXIT_IO = 2

log = logging.getLogger("rpys")


def _year_span(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(part) for part in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None
    if lo > hi:
        raise argparse.ArgumentTypeError(f"empty year range {text!r}")
    return lo, hi


def _marker(text: str) -> MarkerQuery:
    try:
        return MarkerQuery.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _doi_marker(text: str) -> MarkerQuery:
    return MarkerQuery.from_doi(text)


def _threshold(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError("threshold must lie in [0, 1]")
    return value


def _odd_window(text: str) -> int:
    value = int(text)
    if value < 3 or value % 2 == 0:
        raise argparse.ArgumentTypeError("window must be an odd integer >= 3")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rpys", description="Reference publication year spectroscopy (RPYS and RPYS-CO).")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run-script", help="execute a CRExplorer-style script")
    run.add_argument("script", type=Path)
    run.add_argument("--data-dir", type=Path, default=None, help="base for importFile paths (default: script directory)")
    run.add_argument("--out-dir", type=Path, default=None, help="base for exportFile paths (default: script directory)")

    co = sub.add_parser("rpys-co", help="RPYS over the records citing one or more marker papers")
    co.add_argument("--input", type=Path, required=True)
    co.add_argument("--format", choices=("wos", "csv"), default="wos")
    co.add_argument("--rpy", type=_year_span, default=(1950, 1990), metavar="LO:HI")
    co.add_argument("--py", type=_year_span, default=(1988, 2017), metavar="LO:HI")
    co.add_argument("--max-cr", type=int, default=0, help="per-record CR cap, 0 = unlimited")
    co.add_argument("--marker", type=_marker, action="append", default=[], help='e.g. "Becke AD,1988,V38,P3098"')
    co.add_argument("--marker-doi", type=_doi_marker, action="append", default=[])
    co.add_argument("--cluster-threshold", type=_threshold, default=0.75)
    co.add_argument("--match-volume", action=argparse.BooleanOptionalAction, default=True)
    co.add_argument("--match-page", action=argparse.BooleanOptionalAction, default=True)
    co.add_argument("--match-doi", action=argparse.BooleanOptionalAction, default=False)
    co.add_argument("--cross-rpy", action="store_true", help="also link variants with different years")
    co.add_argument("--remove-below", type=int, default=100, help="drop CRs cited fewer times (0 keeps all)")
    co.add_argument("--window", type=_odd_window, default=5)
    co.add_argument("--peak-papers", type=int, default=3, help="CRs listed per peak year")
    co.add_argument("--suggest-markers", type=int, default=0, metavar="N")
    co.add_argument("--suggest-tolerance", type=float, default=0.25)
    co.add_argument("--normalize-plot", action="store_true")
    co.add_argument("--out", type=Path, required=True)

    cmp_ = sub.add_parser("compare", help="overlay NCR curves from several graph CSV files")
    cmp_.add_argument("graphs", type=Path, nargs="+")
    cmp_.add_argument("--label", action="append", default=None)
    cmp_.add_argument("--normalize-plot", action="store_true")
    cmp_.add_argument("--title", default=None)
    cmp_.add_argument("--out", type=Path, required=True)
    return parser


def cmd_run_script(args) -> int:
    try:
        text = args.script.read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read script {args.script}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    base = args.script.parent
    try:
        session = execute(parse_script(text), data_dir=args.data_dir or base, out_dir=args.out_dir or base)
    except ScriptIOError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ScriptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCRIPT
    for path in session.outputs:
        print(f"wrote {path}")
    return EXIT_OK


def _write_text(path: Path, text: str):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _suggestions_csv(suggestions) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("rank", "rpy", "cr", "ncr", "ratio", "comparable_to_marker", "is_marker"))
    for s in suggestions:
        writer.writerow(
            (
                s.rank,
                "" if s.rpy is None else s.rpy,
                s.cr,
                s.ncr,
                f"{s.ratio:.6f}",
                "true" if s.comparable_to_marker else "false",
                "true" if s.is_marker else "false",
            )
        )
    return buf.getvalue()


def cmd_rpys_co(args) -> int:
    markers = args.marker + args.marker_doi
    if not markers:
        print("error: give at least one --marker or --marker-doi", file=sys.stderr)
        return EXIT_SCRIPT
    config = ImportConfig(
        rpy_range=YearRange(*args.rpy),
        py_range=YearRange(*args.py),
        max_cr_per_record=args.max_cr,
    )
    try:
        corpus = read_corpus(args.input, args.format.upper(), config)
    except OSError as exc:
        print(f"error: cannot read {args.input}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    except RPYSError as exc:
        print(f"error: {args.input}: {exc}", file=sys.stderr)
        return EXIT_SCRIPT

    cluster_config = ClusterConfig(
        threshold=args.cluster_threshold,
        require_volume_match=args.match_volume,
        require_page_match=args.match_page,
        require_doi_match=args.match_doi,
        cross_rpy=args.cross_rpy,
    )
    remove_range = (0, args.remove_below - 1) if args.remove_below > 0 else None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NoMatchesWarning)
        result = run_rpys_co(
            corpus,
            markers,
            rpy_range=config.rpy_range,
            cluster_config=cluster_config,
            remove_range=remove_range,
            window=args.window,
            peak_papers=args.peak_papers,
        )
    for w in caught:
        if issubclass(w.category, NoMatchesWarning):
            print(f"warning: {w.message}", file=sys.stderr)

    outputs = {
        "cr_csv": args.out / "rpys_co_CR.csv",
        "graph_csv": args.out / "rpys_co_GRAPH.csv",
        "svg": args.out / "rpys_co.svg",
    }
    suggestions = suggest_markers(result, args.suggest_markers, args.suggest_tolerance) if args.suggest_markers else []
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        _write_text(outputs["cr_csv"], cr_csv_text(result.aggregates))
        _write_text(outputs["graph_csv"], graph_csv_text(result.spectrogram))
        _write_text(outputs["svg"], render_svg(result.spectrogram, normalize=args.normalize_plot))
        if args.suggest_markers:
            outputs["suggestions_csv"] = args.out / "suggested_markers.csv"
            _write_text(outputs["suggestions_csv"], _suggestions_csv(suggestions))
        manifest = _manifest(args, config, cluster_config, remove_range, result, corpus, outputs)
        _write_text(args.out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        print(f"error: cannot write to {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO

    print(f"n_citing: {result.n_citing}")
    print("peaks: " + " ".join(str(y) for y in result.spectrogram.peaks))
    if args.suggest_markers:
        print(f"suggested markers (top {args.suggest_markers} by NCR):")
        for s in suggestions:
            flags = ", ".join(f for f, on in (("comparable", s.comparable_to_marker), ("marker", s.is_marker)) if on)
            print(f"  {s.rank:>3}  {s.rpy if s.rpy is not None else '':>4}  {s.ncr:>7}  {s.ratio:7.3f}  {s.cr}" + (f"  [{flags}]" if flags else ""))
    return EXIT_OK


def _manifest(args, config, cluster_config, remove_range, result, corpus, outputs) -> dict:
    return {
        "tool": f"rpys {__version__}",
        "input": str(args.input),
        "format": args.format,
        "import": {
            "rpy": [config.rpy_range.lo, config.rpy_range.hi, config.rpy_range.include_missing],
            "py": [config.py_range.lo, config.py_range.hi, config.py_range.include_missing],
            "max_cr": config.max_cr_per_record,
        },
        "markers": [
            {
                "first_author": m.first_author,
                "rpy": m.rpy,
                "volume": m.volume,
                "page": m.page,
                "doi": m.doi,
                "match_mode": m.match_mode,
            }
            for m in result.markers
        ],
        "cluster": {
            "threshold": cluster_config.threshold,
            "volume": cluster_config.require_volume_match,
            "page": cluster_config.require_page_match,
            "doi": cluster_config.require_doi_match,
            "cross_rpy": cluster_config.cross_rpy,
        },
        "remove_range": list(remove_range) if remove_range else None,
        "window": args.window,
        "peak_papers": args.peak_papers,
        "suggest_markers": args.suggest_markers,
        "suggest_tolerance": args.suggest_tolerance,
        "normalize_plot": args.normalize_plot,
        "n_records": len(corpus),
        "n_citing": result.n_citing,
        "n_aggregates": len(result.aggregates),
        "peaks": list(result.spectrogram.peaks),
        "outputs": {k: str(v) for k, v in outputs.items()},
    }


def cmd_compare(args) -> int:
    labels = args.label or [p.stem for p in args.graphs]
    if len(labels) != len(args.graphs):
        print("error: give one --label per graph file", file=sys.stderr)
        return EXIT_SCRIPT
    try:
        series = [(label, read_graph_csv(path)) for label, path in zip(labels, args.graphs)]
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        svg = render_svg(series, normalize=args.normalize_plot, title=args.title)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCRIPT
    try:
        _write_text(args.out, svg)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    handlers = {"run-script": cmd_run_script, "rpys-co": cmd_rpys_co, "compare": cmd_compare}
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
