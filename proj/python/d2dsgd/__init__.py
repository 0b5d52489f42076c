"""Decentralized SGD over a simulated device-to-device wireless network.

The heavy lifting lives in the compiled extension; this package re-exports it
and adds a small CSV helper matching the command line tool's output format.
"""

from ._core import (
    ChannelParams,
    analog_schedule,
    bottleneck_snr_db,
    compress_top_l,
    default_sparsity,
    digital_schedule,
    max_sparsity_level,
    mixing_matrix,
    project_sparse,
    run,
    run_config,
    sparse_recover,
    star_extended_graph,
)

__all__ = [
    "ChannelParams",
    "analog_schedule",
    "bottleneck_snr_db",
    "compress_top_l",
    "default_sparsity",
    "digital_schedule",
    "max_sparsity_level",
    "mixing_matrix",
    "project_sparse",
    "run",
    "run_config",
    "rows_to_csv",
    "sparse_recover",
    "star_extended_graph",
]


def rows_to_csv(rows):
    """Render result rows in the same CSV schema the command line tool writes."""
    lines = ["episode_seed,block_index,iteration,mode,avg_test_accuracy"]
    for r in rows:
        lines.append(
            f"{r['episode_seed']},{r['block_index']},{r['iteration']},"
            f"{r['mode']},{r['avg_test_accuracy']:.6f}"
        )
    return "\n".join(lines) + "\n"
