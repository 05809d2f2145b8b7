"""
Static SVG plots of metric series and ROC points
"""
from pathlib import Path
from typing import List, Optional
import logging

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

logger = logging.getLogger(__name__)

METRIC_TITLES = {
    "pu_coll_frac": "Fraction of PU collision",
    "su_coll_frac": "Fraction of SU collision",
    "missed_frac": "Fraction of missed slots",
    "avg_sensing": "Number of sensing per SU",
    "alive_frac": "Fraction of alive SUs",
}


def plot_metrics(frame: pd.DataFrame, out_dir, prefix: str = "metrics") -> List[Path]:
    """One SVG per metric column; an `algorithm` column gives one line per algorithm.

    Plotting problems are logged and skipped, never raised.
    """
    written = []
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        logger.warning(f"Cannot create plot directory {out_dir}: {e}")
        return written

    groups = frame.groupby("algorithm", sort=False) if "algorithm" in frame.columns else [(prefix, frame)]
    for column, title in METRIC_TITLES.items():
        if column not in frame.columns:
            continue
        path = out_dir / f"{prefix}_{column}.svg"
        fig = None
        try:
            fig, ax = plt.subplots(figsize=(7, 4.5))
            for label, group in groups:
                ax.plot(group["step"], group[column], label=str(label))
            ax.set_xlabel("Time step")
            ax.set_ylabel(title)
            ax.grid(True, alpha=0.3)
            ax.legend()
            fig.savefig(path, format="svg", bbox_inches="tight")
            written.append(path)
        except Exception as e:
            logger.warning(f"Failed to plot {column} to {path}: {e}")
        finally:
            if fig is not None:
                plt.close(fig)
    return written


def plot_roc(frame: pd.DataFrame, path, label: Optional[str] = None) -> Optional[Path]:
    """Empirical ROC points (pfa, pd) as one SVG."""
    path = Path(path)
    fig = None
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fig, ax = plt.subplots(figsize=(5, 5))
        ordered = frame.sort_values("pfa")
        ax.plot(ordered["pfa"], ordered["pd"], marker="o", label=label)
        ax.plot([0, 1], [0, 1], linestyle=":", color="grey")
        ax.set_xlabel("Empirical $P_{fa}$")
        ax.set_ylabel("Empirical $P_d$")
        ax.set_xlim(0, 1)
        ax.set_ylim(0, 1)
        if label:
            ax.legend()
        fig.savefig(path, format="svg", bbox_inches="tight")
        return path
    except Exception as e:
        logger.warning(f"Failed to plot ROC to {path}: {e}")
        return None
    finally:
        if fig is not None:
            plt.close(fig)
