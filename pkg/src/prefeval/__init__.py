"""Preference-based top-k assessment campaigns and rank-compatibility evaluation.

The package has two halves:

* measurement: rank-biased overlap against ideal rankings built from graded
  or preference judgments (``metrics``, ``ideal``), plus the significance
  machinery used to compare evaluation measures (``stats``);
* assessment: the campaign protocol that finds the top-k documents of a
  topic with pairwise preference judgments (``campaign``), served to
  assessors over HTTP (``service``) or exported as HIT batches.
"""

from __future__ import annotations

from prefeval.ideal import (
    EffectivenessLevels,
    TopKResult,
    best_ideal,
    count_ideal_rankings,
    levels_combined,
    levels_from_grades,
    levels_from_preferences,
    levels_from_topk,
)
from prefeval.metrics import (
    MeasureReport,
    MeasureSpec,
    RboParams,
    compatibility,
    evaluate_run,
    ndcg_at_k,
    nrbo,
    parse_measure_spec,
    rbo,
    rbo_self,
)
from prefeval.trec_io import (
    GradedQrels,
    PreferenceJudgment,
    PreferenceQrels,
    RunFile,
    append_ledger,
    emit_graded_qrels,
    emit_preference_qrels,
    emit_run,
    parse_graded_qrels,
    parse_preference_qrels,
    parse_run,
    read_ledger,
)

__version__ = "0.1.0"

__all__ = [
    "EffectivenessLevels",
    "GradedQrels",
    "MeasureReport",
    "MeasureSpec",
    "PreferenceJudgment",
    "PreferenceQrels",
    "RboParams",
    "RunFile",
    "TopKResult",
    "append_ledger",
    "best_ideal",
    "compatibility",
    "count_ideal_rankings",
    "emit_graded_qrels",
    "emit_preference_qrels",
    "emit_run",
    "evaluate_run",
    "levels_combined",
    "levels_from_grades",
    "levels_from_preferences",
    "levels_from_topk",
    "ndcg_at_k",
    "nrbo",
    "parse_graded_qrels",
    "parse_measure_spec",
    "parse_preference_qrels",
    "parse_run",
    "rbo",
    "rbo_self",
    "read_ledger",
]
