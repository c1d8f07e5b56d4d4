"""Command line interface.

Subcommands:

* ``eval``: score one run under one or more measures, trec_eval style
  3-column output (measure, topic, score; ``all`` row for the mean).
* ``compare``: evaluate a directory of runs under two measures and report
  run orderings, pairwise significance, sensitivity and ordering agreement.
* ``campaign init|thin|plan|export|import|status|finalize|simulate``: drive
  an assessment campaign stored in a directory.
* ``serve``: run the judging HTTP service for a campaign directory.

Output is deterministic given the same inputs and seed.  Errors print a
diagnostic to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import shutil
import sys
from datetime import datetime, timezone
from pathlib import Path

from prefeval.campaign.config import CampaignConfig
from prefeval.campaign.simulate import simulate_campaign
from prefeval.campaign.state import Campaign, CampaignError
from prefeval.metrics import (
    DEFAULT_DEPTH,
    DEFAULT_PERSISTENCE,
    MeasureSpec,
    evaluate_run,
    parse_measure_spec,
)
from prefeval.stats import ScoreMatrix, kendall_tau, mean_ci, pairwise_tests, sensitivity
from prefeval.trec_io import (
    GradedQrels,
    PreferenceJudgment,
    PreferenceQrels,
    append_ledger,
    emit_preference_qrels,
    parse_graded_qrels,
    parse_preference_qrels,
    parse_run,
    read_ledger,
)

CONFIG_FILE = "config.json"
QRELS_FILE = "qrels.txt"
DOCSTORE_FILE = "docstore.tsv"
QUESTIONS_FILE = "questions.tsv"
LEDGER_FILE = "ledger.jsonl"


def _read(path: str) -> str:
    return Path(path).read_text()


def _load_judgments(args) -> tuple[GradedQrels | None, PreferenceQrels | None]:
    graded = parse_graded_qrels(_read(args.qrels), args.qrels) if args.qrels else None
    prefs = parse_preference_qrels(_read(args.prefs), args.prefs) if args.prefs else None
    return graded, prefs


def _default_measure(args) -> MeasureSpec:
    return MeasureSpec(
        kind="compat",
        p=args.p,
        depth=args.depth,
        normalized=args.normalize,
        source=args.source,
    )


# ---------------------------------------------------------------------------
# eval / compare


def cmd_eval(args) -> int:
    run = parse_run(_read(args.run), args.run)
    graded, prefs = _load_judgments(args)
    specs = [parse_measure_spec(m) for m in args.measure] or [_default_measure(args)]
    for spec in specs:
        report = evaluate_run(run, spec, graded, prefs)
        for topic_id in sorted(report.per_topic):
            print(f"{report.measure}\t{topic_id}\t{report.per_topic[topic_id]:.6f}")
        print(f"{report.measure}\tall\t{report.mean:.6f}")
        if report.empty_ideal_topics:
            flagged = " ".join(sorted(report.empty_ideal_topics))
            print(
                f"note: no effective documents for topic(s) {flagged}; scored 0",
                file=sys.stderr,
            )
    return 0


def cmd_compare(args) -> int:
    run_dir = Path(args.runs)
    run_paths = sorted(p for p in run_dir.iterdir() if p.is_file())
    if len(run_paths) < 2:
        raise ValueError(f"need at least 2 run files in {run_dir}, found {len(run_paths)}")
    runs = [parse_run(p.read_text(), str(p)) for p in run_paths]
    tags = [r.run_tag for r in runs]
    if len(set(tags)) != len(tags):
        raise ValueError("run tags are not unique across the run directory")
    graded, prefs = _load_judgments(args)
    if len(args.measure) != 2:
        raise ValueError(f"compare needs exactly two --measure specs, got {len(args.measure)}")
    specs = [parse_measure_spec(m) for m in args.measure]

    mean_vectors: list[list[float]] = []
    for spec in specs:
        reports = [evaluate_run(run, spec, graded, prefs) for run in runs]
        matrix = ScoreMatrix.from_reports(reports)
        print(f"== measure {spec} ==")
        order = sorted(range(len(runs)), key=lambda i: (-reports[i].mean, tags[i]))
        for rank, i in enumerate(order, 1):
            ci = mean_ci(list(matrix.scores[i]), args.ci_level)
            print(
                f"{rank}\t{tags[i]}\t{reports[i].mean:.6f}"
                f"\t[{ci.lower:.6f}, {ci.upper:.6f}]"
            )
        print("pairwise (run_a, run_b, t, p, distinguished):")
        for test in pairwise_tests(matrix, args.alpha):
            print(
                f"{test.run_a}\t{test.run_b}\t{test.statistic:.4f}"
                f"\t{test.p_value:.6f}\t{'yes' if test.distinguished else 'no'}"
            )
        report = sensitivity(matrix, args.alpha, str(spec))
        print(
            f"sensitivity\t{report.distinguished}/{report.total_pairs}"
            f"\t{report.sensitivity:.4f}\talpha={report.alpha:g}"
        )
        mean_vectors.append([reports[i].mean for i in range(len(runs))])
    print("== ordering agreement ==")
    try:
        tau = kendall_tau(mean_vectors[0], mean_vectors[1])
        print(f"kendall_tau\t{tau:.4f}")
    except ValueError:
        print("kendall_tau\tundefined (a measure ranked all runs equal)")
    return 0


# ---------------------------------------------------------------------------
# campaign


def _campaign_paths(directory: str) -> dict[str, Path]:
    root = Path(directory)
    return {
        "root": root,
        "config": root / CONFIG_FILE,
        "qrels": root / QRELS_FILE,
        "docstore": root / DOCSTORE_FILE,
        "questions": root / QUESTIONS_FILE,
        "ledger": root / LEDGER_FILE,
    }


def _load_campaign(directory: str) -> tuple[Campaign, dict[str, Path]]:
    paths = _campaign_paths(directory)
    if not paths["config"].is_file():
        raise ValueError(f"{paths['config']} not found; run campaign init first")
    config = CampaignConfig.from_json(paths["config"].read_text())
    graded = parse_graded_qrels(paths["qrels"].read_text(), str(paths["qrels"]))
    campaign = Campaign(config, graded)
    if paths["ledger"].is_file():
        campaign.replay(read_ledger(paths["ledger"]))
    return campaign, paths


def cmd_campaign_init(args) -> int:
    paths = _campaign_paths(args.dir)
    if paths["config"].exists():
        raise ValueError(f"{paths['config']} already exists")
    config = CampaignConfig(
        top_k=args.k,
        round_robin_threshold=args.rr_threshold,
        pairings_per_round=args.pairings,
        hit_size=args.hit_size,
        challenges_per_hit=args.challenges,
        mode=args.mode,
        seed=args.seed,
        lease_seconds=args.lease_seconds,
    )
    graded = parse_graded_qrels(_read(args.qrels), args.qrels)
    paths["root"].mkdir(parents=True, exist_ok=True)
    shutil.copyfile(args.qrels, paths["qrels"])
    if args.docstore:
        shutil.copyfile(args.docstore, paths["docstore"])
    if args.questions:
        shutil.copyfile(args.questions, paths["questions"])
    paths["config"].write_text(config.to_json())
    campaign = Campaign(config, graded)  # validates thinning and first plans
    print(f"initialized campaign in {paths['root']} with {len(campaign.topics)} topics")
    return 0


def cmd_campaign_thin(args) -> int:
    campaign, _ = _load_campaign(args.dir)
    from prefeval.campaign.pool import thin_herd

    for topic_id in campaign.topics:
        pool = thin_herd(campaign.graded, topic_id, campaign.config.top_k)
        docs = " ".join(sorted(pool.candidates))
        print(f"{topic_id}\t{len(pool.candidates)}\t{docs}")
    return 0


def cmd_campaign_plan(args) -> int:
    campaign, _ = _load_campaign(args.dir)
    for topic_id in campaign.topics:
        state = campaign.states[topic_id]
        pending = len(campaign.pending_pairs(topic_id))
        if state.plan is None:
            print(f"{topic_id}\tstage={state.pool.stage}\tpairs=0\tpending={pending}")
        else:
            print(
                f"{topic_id}\tstage={state.stage_tag()}"
                f"\tpairs={len(state.plan.pairs)}\tpending={pending}"
            )
    return 0


def cmd_campaign_export(args) -> int:
    campaign, paths = _load_campaign(args.dir)
    docstore: dict[str, str] = {}
    if paths["docstore"].is_file():
        from prefeval.service import load_docstore

        docstore = load_docstore(paths["docstore"])
    questions: dict[str, str] = {}
    if paths["questions"].is_file():
        from prefeval.service import load_docstore

        questions = load_docstore(paths["questions"])
    lines = []
    for batch in campaign.pending_batches():
        for pair in batch.pairs:
            lines.append(
                json.dumps(
                    {
                        "batch": batch.batch_id,
                        "pair": pair.pair_id,
                        "topic": pair.topic_id,
                        "question": questions.get(pair.topic_id, pair.topic_id),
                        "doc_a": pair.doc_a,
                        "doc_b": pair.doc_b,
                        "passage_a": docstore.get(pair.doc_a, pair.doc_a),
                        "passage_b": docstore.get(pair.doc_b, pair.doc_b),
                    }
                )
            )
    text = "".join(line + "\n" for line in lines)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
        print(f"exported {len(lines)} pairs to {args.out}")
    return 0


def cmd_campaign_import(args) -> int:
    campaign, paths = _load_campaign(args.dir)
    rows: list[dict[str, str]] = []
    for lineno, line in enumerate(_read(args.file).splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            rows.append(
                {
                    "pair": obj["pair"],
                    "winner": obj["winner"],
                    "assessor": obj["assessor"],
                    "ts": obj.get("ts", ""),
                }
            )
        except (json.JSONDecodeError, KeyError) as exc:
            raise ValueError(f"{args.file}:{lineno}: bad import record: {exc}") from None

    # Group into batch attempts and refuse incomplete ones up front.
    batches = {b.batch_id: b for b in campaign.pending_batches()}
    attempts: dict[tuple[str, str], dict[str, dict[str, str]]] = {}
    for row in rows:
        batch_id = row["pair"].rsplit(":", 1)[0]
        if batch_id not in batches:
            raise CampaignError(f"pair {row['pair']!r} does not belong to a pending batch")
        attempts.setdefault((batch_id, row["assessor"]), {})[row["pair"]] = row
    for (batch_id, assessor), group in sorted(attempts.items()):
        expected = {p.pair_id for p in batches[batch_id].pairs}
        missing = sorted(expected - set(group))
        if missing:
            raise CampaignError(
                f"incomplete batch {batch_id} from assessor {assessor}: missing {missing}"
            )

    applied = 0
    now = datetime.now(timezone.utc).isoformat(timespec="seconds")
    for (batch_id, assessor), group in sorted(attempts.items()):
        batch = batches[batch_id]
        state = campaign.states[batch.topic_id]
        stage = state.stage_tag()
        for pair in batch.pairs:  # batch order keeps attempts contiguous
            row = group[pair.pair_id]
            record = PreferenceJudgment(
                topic_id=batch.topic_id,
                doc_a=pair.doc_a,
                doc_b=pair.doc_b,
                winner=row["winner"],
                assessor_id=assessor,
                stage=stage,
                batch_id=batch_id,
                is_challenge=pair.is_challenge,
                timestamp=row["ts"] or now,
            )
            campaign.apply(record)
            append_ledger(paths["ledger"], record)
            applied += 1
        if assessor in campaign.excluded_assessors:
            print(f"rejected batch {batch_id} from {assessor}: challenge failed; pairs requeued")
        else:
            print(f"accepted batch {batch_id} from {assessor}")
    print(f"imported {applied} judgments")
    return 0


def cmd_campaign_status(args) -> int:
    campaign, _ = _load_campaign(args.dir)
    for topic_id, entry in campaign.status().items():
        parts = [f"{topic_id}"] + [f"{key}={value}" for key, value in entry.items()]
        print("\t".join(parts))
    finalized = sum(1 for s in campaign.states.values() if s.pool.stage == "finalized")
    print(f"total\ttopics={len(campaign.topics)}\tfinalized={finalized}"
          f"\texcluded_assessors={len(campaign.excluded_assessors)}")
    return 0


def cmd_campaign_finalize(args) -> int:
    campaign, _ = _load_campaign(args.dir)
    unfinished = [t for t, s in campaign.states.items() if s.pool.stage != "finalized"]
    if unfinished:
        raise CampaignError(
            f"cannot finalize: {len(unfinished)} topic(s) still need judgments "
            f"({', '.join(unfinished[:5])}{'...' if len(unfinished) > 5 else ''})"
        )
    text = emit_preference_qrels(campaign.to_preference_qrels())
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
        print(f"wrote preference qrels to {args.out}")
    return 0


def cmd_campaign_simulate(args) -> int:
    import random

    config = CampaignConfig(
        top_k=args.k,
        round_robin_threshold=args.rr_threshold,
        pairings_per_round=args.pairings,
        mode=args.mode,
        seed=args.seed,
    )
    rng = random.Random(args.seed)
    true_orders = {}
    for i in range(args.topics):
        n = rng.randint(args.pool_min, args.pool_max)
        true_orders[f"topic{i:04d}"] = [f"doc{j:04d}" for j in range(n)]
    report = simulate_campaign(
        true_orders, config, trials=args.trials, error_rate=args.error_rate, seed=args.seed
    )
    print(f"mode\t{report.mode}")
    print(f"trials\t{report.trials}\ttopics\t{report.topics}")
    print(f"error_rate\t{report.error_rate:g}")
    print(f"mean_judgments\t{report.mean_judgments:.2f}")
    print(f"recovery_rate\t{report.recovery_rate:.4f}")
    for i, (size, frac) in enumerate(
        zip(report.mean_pool_by_round, report.survivor_fraction_by_round), 1
    ):
        print(f"round{i}\tmean_pool={size:.2f}\tsurvivor_fraction={frac:.4f}")
    if report.knockout_rate is not None:
        print(
            f"knockout_rate\t{report.knockout_rate:.4f}"
            f"\tse={report.knockout_se:.4f}\tsamples={report.knockout_samples}"
        )
    return 0


def cmd_serve(args) -> int:
    from prefeval.service import JudgingService, create_server, load_docstore

    campaign, paths = _load_campaign(args.dir)
    docstore = load_docstore(paths["docstore"]) if paths["docstore"].is_file() else {}
    questions = load_docstore(paths["questions"]) if paths["questions"].is_file() else {}
    service = JudgingService(campaign, paths["ledger"], docstore, questions)
    server = create_server(service, args.host, args.port, args.ui)
    host, port = server.server_address[:2]
    print(f"serving campaign {paths['root']} on http://{host}:{port}/")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


# ---------------------------------------------------------------------------
# argument wiring


def _add_eval_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--qrels", help="graded qrels file")
    parser.add_argument("--prefs", help="preference qrels file")
    parser.add_argument("--measure", action="append", default=[],
                        help="measure spec such as ndcg:k=3 or compat:p=0.8,src=combined; repeatable")
    parser.add_argument("--p", type=float, default=DEFAULT_PERSISTENCE,
                        help="persistence for the default measure")
    parser.add_argument("--depth", type=int, default=DEFAULT_DEPTH,
                        help="evaluation depth for the default measure")
    parser.add_argument("--normalize", action=argparse.BooleanOptionalAction, default=True,
                        help="normalize by the ideal's self-similarity")
    parser.add_argument("--source", default="grades",
                        choices=["grades", "topk", "combined", "best-only"],
                        help="judgment source for the default measure")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prefeval",
        description="Preference-based top-k assessment and rank-compatibility evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="score one run")
    p_eval.add_argument("--run", required=True, help="run file (6-column format)")
    _add_eval_flags(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    p_cmp = sub.add_parser("compare", help="compare runs under two measures")
    p_cmp.add_argument("--runs", required=True, help="directory of run files")
    _add_eval_flags(p_cmp)
    p_cmp.add_argument("--alpha", type=float, default=0.05, help="significance level")
    p_cmp.add_argument("--ci-level", type=float, default=0.95, help="confidence level")
    p_cmp.set_defaults(func=cmd_compare)

    p_camp = sub.add_parser("campaign", help="drive an assessment campaign")
    camp_sub = p_camp.add_subparsers(dest="subcommand", required=True)

    p_init = camp_sub.add_parser("init", help="create a campaign directory")
    p_init.add_argument("--dir", required=True)
    p_init.add_argument("--qrels", required=True, help="graded qrels to thin from")
    p_init.add_argument("--docstore", help="id<TAB>text passages")
    p_init.add_argument("--questions", help="topic<TAB>question text")
    p_init.add_argument("--mode", default="crowdsourced",
                        choices=["crowdsourced", "tournament"])
    p_init.add_argument("--k", type=int, default=5, help="top-k target size")
    p_init.add_argument("--rr-threshold", type=int, default=9,
                        help="pool size at or below which a round robin runs")
    p_init.add_argument("--pairings", type=int, default=7,
                        help="pairings per candidate in a reduction round")
    p_init.add_argument("--hit-size", type=int, default=10, help="real pairs per batch")
    p_init.add_argument("--challenges", type=int, default=3, help="challenge pairs per batch")
    p_init.add_argument("--seed", type=int, default=0)
    p_init.add_argument("--lease-seconds", type=float, default=600.0)
    p_init.set_defaults(func=cmd_campaign_init)

    for name, func, extra in [
        ("thin", cmd_campaign_thin, None),
        ("plan", cmd_campaign_plan, None),
        ("status", cmd_campaign_status, None),
    ]:
        p = camp_sub.add_parser(name)
        p.add_argument("--dir", required=True)
        p.set_defaults(func=func)

    p_export = camp_sub.add_parser("export", help="write pending batches as JSON lines")
    p_export.add_argument("--dir", required=True)
    p_export.add_argument("--out", default="-", help="output file, - for stdout")
    p_export.set_defaults(func=cmd_campaign_export)

    p_import = camp_sub.add_parser("import", help="ingest judged batches")
    p_import.add_argument("--dir", required=True)
    p_import.add_argument("--file", required=True, help="JSON lines: pair, winner, assessor")
    p_import.set_defaults(func=cmd_campaign_import)

    p_final = camp_sub.add_parser("finalize", help="write the top-k preference qrels")
    p_final.add_argument("--dir", required=True)
    p_final.add_argument("--out", default="-", help="output file, - for stdout")
    p_final.set_defaults(func=cmd_campaign_finalize)

    p_sim = camp_sub.add_parser("simulate", help="Monte-Carlo protocol simulation")
    p_sim.add_argument("--topics", type=int, default=10)
    p_sim.add_argument("--trials", type=int, default=100)
    p_sim.add_argument("--pool-min", type=int, default=6)
    p_sim.add_argument("--pool-max", type=int, default=40)
    p_sim.add_argument("--error-rate", type=float, default=0.0)
    p_sim.add_argument("--k", type=int, default=5)
    p_sim.add_argument("--rr-threshold", type=int, default=9)
    p_sim.add_argument("--pairings", type=int, default=7)
    p_sim.add_argument("--mode", default="crowdsourced",
                       choices=["crowdsourced", "tournament"])
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.set_defaults(func=cmd_campaign_simulate)

    p_serve = sub.add_parser("serve", help="run the judging HTTP service")
    p_serve.add_argument("--dir", required=True)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8765)
    p_serve.add_argument("--ui", help="directory of built UI files to serve at /")
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, CampaignError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
