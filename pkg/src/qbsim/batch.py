"""Batch driver: many runs of one scenario, commutative aggregation.

Per-run seeds derive from the master seed and the run index, so the
run set is fixed before any work starts and the aggregate cannot
depend on worker count or completion order; merging is plain counter
addition. Chi-square statistics are computed once from the final
counts.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

from scipy.stats import chisquare

from .auction import run_auction
from .errors import QbsimError
from .lottery import run_lottery
from .rng import derive_seed
from .scenario import ScenarioConfig


def _run_summary(config_dict: dict, run_index: int) -> dict:
    config = ScenarioConfig.from_dict(config_dict)
    config.seed = derive_seed(config.seed, "batch", run_index)
    config.detail_log = False
    if config.protocol == "lottery":
        result = run_lottery(config.lottery_params())
        out = result.outcome
        consistent, _ = result.honest_ledgers_consistent
        return {
            "protocol": "lottery",
            "aborted": out.aborted,
            "winning_bits": list(out.winning) if out.winning is not None else None,
            "cheaters": len(result.cheaters),
            "consistent": consistent,
        }
    if config.protocol == "auction":
        result = run_auction(config.auction_params())
        out = result.outcome
        consistent, _ = result.honest_ledgers_consistent
        return {
            "protocol": "auction",
            "valid": out.valid,
            "winner": out.winner.index if out.valid else None,
            "winning_bid": out.winning_bid,
            "cheaters": len(result.cheaters),
            "consistent": consistent,
            "degenerate": result.degenerate_policy,
        }
    raise QbsimError(f"batch runs need lottery or auction, got {config.protocol}")


def _merge_lottery(agg: dict, summary: dict):
    agg["runs"] += 1
    agg["aborted"] += summary["aborted"]
    agg["runs_with_cheaters"] += summary["cheaters"] > 0
    agg["consistency_violations"] += not summary["consistent"]
    bits = summary["winning_bits"]
    if bits is not None:
        if not agg["bit_one_counts"]:
            agg["bit_one_counts"] = [0] * len(bits)
        for i, b in enumerate(bits):
            agg["bit_one_counts"][i] += b
        agg["decided_runs"] += 1


def _merge_auction(agg: dict, summary: dict):
    agg["runs"] += 1
    agg["bot_runs"] += not summary["valid"]
    agg["runs_with_cheaters"] += summary["cheaters"] > 0
    agg["consistency_violations"] += not summary["consistent"]
    agg["degenerate_runs"] += summary["degenerate"]
    if summary["valid"]:
        key = str(summary["winner"])
        agg["winner_counts"][key] = agg["winner_counts"].get(key, 0) + 1


def run_batch(config: ScenarioConfig, runs: int, workers: int = 1) -> dict:
    """Aggregate statistics over `runs` derived-seed scenario runs."""
    if runs < 1:
        raise QbsimError("a batch needs at least one run")
    config = config.validated()
    config_dict = config.to_dict()

    if config.protocol == "lottery":
        agg = {"protocol": "lottery", "master_seed": config.seed, "runs": 0,
               "decided_runs": 0, "aborted": 0, "runs_with_cheaters": 0,
               "consistency_violations": 0, "bit_one_counts": []}
        merge = _merge_lottery
    else:
        agg = {"protocol": "auction", "master_seed": config.seed, "runs": 0,
               "bot_runs": 0, "runs_with_cheaters": 0, "consistency_violations": 0,
               "degenerate_runs": 0, "winner_counts": {}}
        merge = _merge_auction

    if workers <= 1:
        for i in range(runs):
            merge(agg, _run_summary(config_dict, i))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, runs // (workers * 8))
            for summary in pool.map(_run_summary, [config_dict] * runs,
                                    range(runs), chunksize=chunk):
                merge(agg, summary)

    if config.protocol == "lottery" and agg["decided_runs"]:
        n = agg["decided_runs"]
        agg["bit_one_frequencies"] = [c / n for c in agg["bit_one_counts"]]
        agg["bit_chi2_p_values"] = [
            float(chisquare([c, n - c]).pvalue) for c in agg["bit_one_counts"]
        ]
    return agg
