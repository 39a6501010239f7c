"""Reference publication year spectroscopy (RPYS) and its co-citation variant.

The functional API lives in the submodules; the most used names are
re-exported here, together with the estimator classes :class:`RPYS`,
:class:`RPYSCO` and :class:`CRClusterer`.
"""

__version__ = "0.1.0"

from .cluster import ClusterConfig, CRClusterer, cluster, cr_similarity, merge, remove_cr
from .co import (
    RPYS,
    RPYSCO,
    MarkerQuery,
    NoMatchesWarning,
    RpysCoResult,
    match_marker,
    run_rpys,
    run_rpys_co,
    select_citing,
    suggest_markers,
)
from .export import export_cr_csv, export_graph_csv, read_graph_csv, render_svg
from .model import AggregatedCR, CitedRef, Corpus, Record, RPYSError, YearRange, corpus_stats
from .script import AnalysisSession, execute, parse_script, run_script
from .spectroscopy import Spectrogram, compute_spectrogram, detect_peaks, median_deviation, top_crs
from .wos import ImportConfig, MalformedFile, normalize_cr, parse_corpus, parse_cr_line, read_corpus

__all__ = [
    "RPYS",
    "RPYSCO",
    "AggregatedCR",
    "AnalysisSession",
    "CRClusterer",
    "CitedRef",
    "ClusterConfig",
    "Corpus",
    "ImportConfig",
    "MalformedFile",
    "MarkerQuery",
    "NoMatchesWarning",
    "RPYSError",
    "Record",
    "RpysCoResult",
    "Spectrogram",
    "YearRange",
    "cluster",
    "compute_spectrogram",
    "corpus_stats",
    "cr_similarity",
    "detect_peaks",
    "execute",
    "export_cr_csv",
    "export_graph_csv",
    "match_marker",
    "median_deviation",
    "merge",
    "normalize_cr",
    "parse_corpus",
    "parse_cr_line",
    "parse_script",
    "read_corpus",
    "read_graph_csv",
    "remove_cr",
    "render_svg",
    "run_rpys",
    "run_rpys_co",
    "run_script",
    "select_citing",
    "suggest_markers",
    "top_crs",
]
