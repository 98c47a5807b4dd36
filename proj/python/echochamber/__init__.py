"""Echo-chamber analysis of polarized retweet networks."""

from ._echochamber import (
    Error,
    Graph,
    InvalidArgument,
    UsageError,
    __version__,
    config_defaults,
    detect_communities,
    echo_chamber_correlation,
    ensemble_leaning,
    generate_sbm,
    giant_component,
    local_clustering,
    read_edge_list,
    reciprocity,
    run_subcommand,
    rwc_exact,
    rwc_montecarlo,
    subcommands,
    threshold_edges,
    tune_balance,
    write_edge_list,
)

__all__ = [
    "Error",
    "Graph",
    "InvalidArgument",
    "UsageError",
    "__version__",
    "config_defaults",
    "detect_communities",
    "echo_chamber_correlation",
    "ensemble_leaning",
    "generate_sbm",
    "giant_component",
    "local_clustering",
    "read_edge_list",
    "reciprocity",
    "run_subcommand",
    "rwc_exact",
    "rwc_montecarlo",
    "subcommands",
    "threshold_edges",
    "tune_balance",
    "write_edge_list",
]
