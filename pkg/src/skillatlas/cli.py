"""Batch pipeline driver.

Subcommands cover the full flow: synth/ingest -> similarity -> cluster ->
train -> map -> recommend-* -> indicator -> validate -> serve. Every
subcommand writes its artifacts plus a manifest with content hashes, and
all randomness flows from --seed, so identical invocations produce
byte-identical outputs. Relative paths resolve against SKILLSPACE_DATA_DIR
when that variable is set.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import artifacts, gbt, stats
from .clustering import k_medoids, mds_layout
from .corpus import (
    CorpusError,
    filter_rare_skills,
    load_corpus,
    load_employment_csv,
    load_transitions_csv,
)
from .features import (
    FEATURE_NAMES,
    YearSimilarityIndex,
    build_training_set,
    demand_supply_features,
    to_matrix,
    training_set_rows,
)
from .indicator import SeedConfig, adoption_series, DEFAULT_SEEDS
from .similarity import compute_rca, compute_theta, occupation_skillsets
from .synth import AdoptionPlant, SynthConfig, generate_synthetic
from .transitions import (
    RecommendationFilters,
    build_map,
    parse_period,
    recommend_occupations,
    recommend_skills,
)


def _root() -> Path:
    return Path(os.environ.get("SKILLSPACE_DATA_DIR", "."))


def _resolve(path: str | None) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    return p if p.is_absolute() else _root() / p


def _out(path: str | None) -> Path | None:
    p = _resolve(path)
    if p is not None:
        p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _load_corpus_any(path: Path):
    """Accept either an ingested corpus artifact or a raw ads file."""
    if path.suffix == ".json":
        try:
            payload = json.loads(path.read_text())
            if isinstance(payload, dict) and payload.get("format") == artifacts.CORPUS_FORMAT:
                return artifacts.load_corpus_artifact(path)
        except (OSError, json.JSONDecodeError):
            pass
    return load_corpus(path)


def _dump_json(payload, out: Path | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out is None:
        print(text)
    else:
        out.write_text(text + "\n")


def _manifest(args, subcommand: str, inputs: dict, params: dict, outputs: list[Path]) -> None:
    first = Path(str(outputs[0]))
    path = first.with_name(first.name + ".manifest.json")
    artifacts.write_manifest(
        path, subcommand, inputs, params, {"seed": getattr(args, "seed", 0)}, outputs
    )


def _years_arg(text: str) -> list[int]:
    if ":" in text:
        a, b = text.split(":", 1)
        return list(range(int(a), int(b) + 1))
    return [int(y) for y in text.split(",") if y]


# -- subcommand handlers -------------------------------------------------------


def cmd_ingest(args) -> int:
    corpus = load_corpus(
        _resolve(args.input),
        format=args.input_format,
        occupation_meta_path=_resolve(args.occupation_meta),
        industry_meta_path=_resolve(args.industry_meta),
    )
    out = _out(args.out)
    artifacts.save_corpus(corpus, out)
    report = corpus.load_report
    print(f"loaded {report.loaded}/{report.total} ads "
          f"({report.rejected_count} rejected), {corpus.n_skills()} skills")
    _manifest(args, "ingest", {"input": args.input},
              {"input_format": args.input_format or "auto"}, [out])
    return 0


def cmd_similarity(args) -> int:
    corpus = _load_corpus_any(_resolve(args.corpus))
    retained = filter_rare_skills(corpus, args.year, args.min_count)
    if not retained:
        raise CorpusError(f"no skills meet min_count={args.min_count} in {args.year}")
    rca = compute_rca(corpus, args.year, retained)
    theta = compute_theta(rca)
    out = _out(args.out)
    outputs = [out]
    artifacts.save_theta(theta, out)
    rca_path = out.with_suffix(".rca.bin")
    artifacts.save_rca(rca, rca_path)
    outputs.append(rca_path)
    if args.format == "csv":
        csv_path = out.with_suffix(".csv")
        artifacts.theta_to_csv(theta, corpus, csv_path)
        outputs.append(csv_path)
    print(f"year {args.year}: {len(retained)} retained skills, "
          f"{len(rca.ad_indices)} ads, {len(rca.dropped_ads)} dropped")
    _manifest(args, "similarity", {"corpus": args.corpus},
              {"year": args.year, "min_count": args.min_count, "format": args.format}, outputs)
    return 0


def cmd_cluster(args) -> int:
    corpus = _load_corpus_any(_resolve(args.corpus))
    retained = filter_rare_skills(corpus, args.year, args.min_count)
    rca = compute_rca(corpus, args.year, retained)
    theta = compute_theta(rca)
    if args.kind == "skills":
        counts = theta.effective_counts
        order = np.argsort(-counts, kind="stable")[: args.top]
        cols = np.sort(order)
        ids = [int(theta.skill_ids[c]) for c in cols]
        distances = 1.0 - theta.submatrix(cols, cols)
        names = {i: corpus.skill_name(i) for i in ids}
    else:
        sets = occupation_skillsets(corpus, rca, args.year)
        codes = sorted(sets)
        from .transitions import pairwise_skillset_similarity
        sims = pairwise_skillset_similarity(sets, theta, codes)
        distances = 1.0 - np.clip(sims, 0.0, 1.0)
        ids = codes
        names = {c: corpus.occupation_title(c) for c in codes}
    np.fill_diagonal(distances, 0.0)
    distances = (distances + distances.T) / 2.0

    assignment = k_medoids(distances, min(args.k, len(ids)), seed=args.seed,
                           n_restarts=args.restarts, entity_ids=ids)
    layout = mds_layout(distances, seed=args.seed, entity_ids=ids)
    out = _out(args.out)
    artifacts.layout_to_csv(layout.coordinates, assignment.labels, names, out)
    print(f"{args.kind}: {len(ids)} entities, k={assignment.k}, cost={assignment.total_cost:.4f}")
    _manifest(args, "cluster", {"corpus": args.corpus},
              {"year": args.year, "kind": args.kind, "k": args.k,
               "min_count": args.min_count, "top": args.top}, [out])
    return 0


def cmd_train(args) -> int:
    corpus = _load_corpus_any(_resolve(args.corpus))
    employment = load_employment_csv(_resolve(args.employment))
    transitions = load_transitions_csv(_resolve(args.transitions))
    sim = YearSimilarityIndex(corpus, min_count=args.min_count)
    vectors, report = build_training_set(transitions, corpus, employment,
                                         seed=args.seed, sim=sim)
    feature_set = {
        "all": FEATURE_NAMES,
        "theta": ("theta",),
        "demand-supply": demand_supply_features(),
    }[args.features]
    x, y, names = to_matrix(vectors, features=feature_set)

    space = gbt.DESK_SPACE if args.space == "desk" else gbt.DEFAULT_SPACE
    best_hp, rows = gbt.random_search_cv(
        (x, y), n_configs=args.n_configs, k_folds=args.folds,
        seed=args.seed, space=space, n_threads=args.threads,
    )
    model = gbt.train((x, y), best_hp, seed=args.seed, feature_names=names)

    out = _out(args.out)
    gbt.save_model(model, out)
    outputs = [out]
    cv_path = out.with_suffix(".cv.csv")
    with open(cv_path, "w", encoding="utf-8") as fh:
        fh.write("index,mean_accuracy,n_trees,learning_rate,max_depth,min_samples_leaf,"
                 "row_subsample,feature_subsample,l2_leaf_penalty\n")
        for row in rows:
            hp = row.hp
            fh.write(f"{row.index},{row.mean_accuracy!r},{hp.n_trees},{hp.learning_rate!r},"
                     f"{hp.max_depth},{hp.min_samples_leaf},{hp.row_subsample!r},"
                     f"{hp.feature_subsample!r},{hp.l2_leaf_penalty!r}\n")
    outputs.append(cv_path)
    ts_path = out.with_suffix(".trainingset.csv")
    artifacts.training_set_to_csv(training_set_rows(vectors), ts_path)
    outputs.append(ts_path)

    best_cv = max(r.mean_accuracy for r in rows)
    print(f"training rows: {len(vectors)} ({report.positives} positives, "
          f"{report.skipped} skipped); best cv accuracy {best_cv:.4f}")
    _manifest(args, "train",
              {"corpus": args.corpus, "employment": args.employment,
               "transitions": args.transitions},
              {"features": args.features, "n_configs": args.n_configs,
               "folds": args.folds, "min_count": args.min_count,
               "space": args.space, "best_hp": asdict(best_hp)}, outputs)
    return 0


def cmd_map(args) -> int:
    corpus = _load_corpus_any(_resolve(args.corpus))
    employment = load_employment_csv(_resolve(args.employment))
    model = gbt.load_model(_resolve(args.model))
    tmap = build_map(model, corpus, employment, args.year, min_count=args.min_count)
    out = _out(args.out)
    outputs = [out]
    artifacts.save_map(tmap, out)
    if args.format == "csv":
        csv_path = out.with_suffix(".csv")
        artifacts.map_to_csv(tmap, csv_path)
        outputs.append(csv_path)
    print(f"map {args.year}: {len(tmap.occupations)} occupations, "
          f"{len(tmap.excluded)} excluded")
    _manifest(args, "map",
              {"corpus": args.corpus, "employment": args.employment, "model": args.model},
              {"year": args.year, "min_count": args.min_count, "format": args.format}, outputs)
    return 0


def cmd_recommend_occupations(args) -> int:
    corpus = _load_corpus_any(_resolve(args.corpus))
    tmap = artifacts.load_map(_resolve(args.map))
    filters = None
    if args.min_percent_change is not None or args.required_tag or args.min_postings is not None:
        filters = RecommendationFilters(
            min_percent_change=args.min_percent_change,
            required_tag=args.required_tag,
            min_postings=args.min_postings,
        )
    recs = recommend_occupations(
        tmap, args.source, corpus,
        parse_period(args.period_a), parse_period(args.period_b),
        n=args.n, filters=filters, include_self=args.include_self,
    )
    payload = {
        "source": args.source,
        "source_title": corpus.occupation_title(args.source),
        "year": tmap.year,
        "period_a": args.period_a,
        "period_b": args.period_b,
        "recommendations": [asdict(r) for r in recs],
    }
    out = _out(args.out)
    _dump_json(payload, out)
    if out is not None:
        _manifest(args, "recommend-occupations",
                  {"map": args.map, "corpus": args.corpus},
                  {"source": args.source, "n": args.n,
                   "period_a": args.period_a, "period_b": args.period_b}, [out])
    return 0


def cmd_recommend_skills(args) -> int:
    corpus = _load_corpus_any(_resolve(args.corpus))
    if args.rca and args.theta:
        rca = artifacts.load_rca(_resolve(args.rca))
        theta = artifacts.load_theta(_resolve(args.theta))
    else:
        retained = filter_rare_skills(corpus, args.year, args.min_count)
        rca = compute_rca(corpus, args.year, retained)
        theta = compute_theta(rca)
    recs = recommend_skills(args.source, args.target, args.year, corpus, rca, theta)
    payload = {
        "source": args.source,
        "target": args.target,
        "year": args.year,
        "skills": [asdict(r) for r in recs],
    }
    out = _out(args.out)
    _dump_json(payload, out)
    if out is not None:
        _manifest(args, "recommend-skills", {"corpus": args.corpus},
                  {"source": args.source, "target": args.target,
                   "year": args.year, "min_count": args.min_count}, [out])
    return 0


def cmd_indicator(args) -> int:
    corpus = _load_corpus_any(_resolve(args.corpus))
    years = _years_arg(args.years) if args.years else corpus.years
    rca_by_year, theta_by_year = {}, {}
    for year in years:
        retained = filter_rare_skills(corpus, year, args.min_count)
        rca_by_year[year] = compute_rca(corpus, year, retained)
        theta_by_year[year] = compute_theta(rca_by_year[year])
    config = SeedConfig(
        seed_names=tuple(s.strip() for s in args.seeds.split(",") if s.strip()),
        top_n=args.top_n,
        years=tuple(years),
    )
    industries = [s.strip() for s in args.industries.split(",") if s.strip()] if args.industries else None
    series = adoption_series(corpus, rca_by_year, theta_by_year, config,
                             industries=industries, years=years)
    out = _out(args.out)
    artifacts.indicator_to_csv(series, years, out)
    outputs = [out]
    json_path = out.with_suffix(".json")
    json_path.write_text(json.dumps(artifacts.indicator_to_json(series, years),
                                    sort_keys=True, indent=2) + "\n")
    outputs.append(json_path)
    print(f"indicator: {len(series)} industries over {years[0]}-{years[-1]}")
    _manifest(args, "indicator", {"corpus": args.corpus},
              {"years": years, "top_n": args.top_n, "seeds": config.seed_names,
               "min_count": args.min_count}, outputs)
    return 0


def cmd_validate(args) -> int:
    corpus = _load_corpus_any(_resolve(args.corpus))
    transitions = load_transitions_csv(_resolve(args.transitions))
    sim = YearSimilarityIndex(corpus, min_count=args.min_count)
    report = stats.resampled_significance(
        transitions, sim, n_runs=args.n_runs, seed=args.seed,
        exclude_same=args.exclude_same, log_transform=args.log,
    )
    payload = {
        "n_pairs": report.n_pairs,
        "n_runs": report.n_runs,
        "skipped": report.skipped,
        "alpha": report.alpha,
        "significant_fraction": report.significant_fraction,
        "p_values": list(report.p_values),
    }
    out = _out(args.out)
    _dump_json(payload, out)
    if out is not None:
        pv_path = out.with_suffix(".pvalues.csv")
        with open(pv_path, "w", encoding="utf-8") as fh:
            fh.write("run,p_value\n")
            for i, p in enumerate(report.p_values):
                fh.write(f"{i},{p!r}\n")
        _manifest(args, "validate",
                  {"corpus": args.corpus, "transitions": args.transitions},
                  {"n_runs": args.n_runs, "exclude_same": args.exclude_same,
                   "log": args.log, "min_count": args.min_count}, [out, pv_path])
    print(f"significant runs: {report.significant_fraction:.2f} "
          f"({int(report.significant_fraction * report.n_runs)}/{report.n_runs})")
    return 0


def cmd_synth(args) -> int:
    if args.preset == "adoption":
        plant = AdoptionPlant(
            seed_names=tuple(DEFAULT_SEEDS),
            adopting_industry="A",
            cluster_size=12,
            start_rate=0.0,
            end_rate=0.6,
        )
        config = SynthConfig(
            n_occupations=args.n_occupations, n_ads=args.n_ads,
            years=tuple(_years_arg(args.years)), n_transitions=args.n_transitions,
            transition_noise=args.noise, n_industries=max(2, args.n_industries),
            overlap="disjoint", background_rate=0.0, n_background_skills=0,
            skills_per_ad=8, n_skills_per_occupation=10,
            replicate_years=True, ai_plant=plant,
        )
    else:
        config = SynthConfig(
            n_occupations=args.n_occupations, n_ads=args.n_ads,
            years=tuple(_years_arg(args.years)), n_transitions=args.n_transitions,
            transition_noise=args.noise, n_industries=args.n_industries,
        )
    result = generate_synthetic(config, args.seed)
    out_dir = _resolve(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ads = out_dir / "ads.jsonl"
    emp = out_dir / "employment.csv"
    trs = out_dir / "transitions.csv"
    occ_meta = out_dir / "occupations.csv"
    ind_meta = out_dir / "industries.csv"
    artifacts.save_ads_jsonl(result.corpus, ads)
    artifacts.save_employment_csv(result.employment, emp)
    artifacts.save_transitions_csv(result.transitions, trs)
    artifacts.save_occupation_meta_csv(result.corpus, occ_meta)
    artifacts.save_industry_meta_csv(result.corpus, ind_meta)
    print(f"synth[{args.preset}]: {len(result.corpus.ads)} ads, "
          f"{len(result.transitions)} transitions -> {out_dir}")
    artifacts.write_manifest(out_dir / "manifest.json", "synth", {},
                             {"preset": args.preset, "n_ads": args.n_ads,
                              "n_occupations": args.n_occupations, "years": args.years,
                              "n_transitions": args.n_transitions, "noise": args.noise},
                             {"seed": args.seed}, [ads, emp, trs, occ_meta, ind_meta])
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(_resolve(args.data_dir), reload_secret=args.reload_secret,
                     static_dir=_resolve(args.static_dir))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skillatlas",
        description="Skills analytics: similarity, transition prediction, "
                    "recommendations, and adoption indicators from job-ad corpora.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, *, seed=True, threads=False, min_count=False, fmt=False):
        if seed:
            p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
        if threads:
            p.add_argument("--threads", type=int, default=1,
                           help="worker threads for search/CV (default 1)")
        if min_count:
            p.add_argument("--min-count", type=int, default=5,
                           help="rare-skill threshold per year (default 5)")
        if fmt:
            p.add_argument("--format", choices=["bin", "csv"], default="bin",
                           help="artifact format; csv adds a mirror (default bin)")

    p = sub.add_parser("ingest", help="load and validate an ads file into a corpus artifact")
    p.add_argument("--input", required=True, help="ads file (JSONL or CSV)")
    p.add_argument("--input-format", choices=["jsonl", "csv"], default=None,
                   help="override format sniffing")
    p.add_argument("--occupation-meta", default=None, help="occupation metadata CSV (code,title,...)")
    p.add_argument("--industry-meta", default=None, help="industry metadata CSV (code,title)")
    p.add_argument("--out", required=True, help="corpus artifact path (.json)")
    common(p, seed=False)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("similarity", help="compute per-year RCA and pairwise skill similarity")
    p.add_argument("--corpus", required=True, help="corpus artifact or raw ads file")
    p.add_argument("--year", type=int, required=True)
    p.add_argument("--out", required=True, help="theta artifact path (.bin)")
    common(p, seed=False, min_count=True, fmt=True)
    p.set_defaults(func=cmd_similarity)

    p = sub.add_parser("cluster", help="k-medoids clusters and 2-D layout")
    p.add_argument("--corpus", required=True)
    p.add_argument("--year", type=int, required=True)
    p.add_argument("--kind", choices=["skills", "occupations"], default="skills")
    p.add_argument("--k", type=int, default=13, help="cluster count (default 13)")
    p.add_argument("--top", type=int, default=500,
                   help="keep the top-N skills by effective use (default 500)")
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--out", required=True, help="layout CSV path")
    common(p, min_count=True)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("train", help="build the training set and fit the transition classifier")
    p.add_argument("--corpus", required=True)
    p.add_argument("--employment", required=True)
    p.add_argument("--transitions", required=True)
    p.add_argument("--features", choices=["all", "theta", "demand-supply"], default="all")
    p.add_argument("--n-configs", type=int, default=50,
                   help="randomized-search draws (default 50; full-scale 2500)")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--space", choices=["desk", "default"], default="desk",
                   help="hyperparameter space preset")
    p.add_argument("--out", required=True, help="model path (.json)")
    common(p, threads=True, min_count=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("map", help="predict every directed occupation pair for a year")
    p.add_argument("--corpus", required=True)
    p.add_argument("--employment", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--year", type=int, required=True)
    p.add_argument("--out", required=True, help="map artifact path (.bin)")
    common(p, seed=False, min_count=True, fmt=True)
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("recommend-occupations", help="rank transition targets for a source")
    p.add_argument("--map", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--source", required=True)
    p.add_argument("--period-a", required=True, help="reference period, e.g. 2019-03:2019-04")
    p.add_argument("--period-b", required=True, help="current period, e.g. 2020-03:2020-04")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--min-percent-change", type=float, default=None)
    p.add_argument("--required-tag", default=None)
    p.add_argument("--min-postings", type=int, default=None)
    p.add_argument("--include-self", action="store_true")
    p.add_argument("--out", default=None, help="JSON output path (default stdout)")
    common(p, seed=False)
    p.set_defaults(func=cmd_recommend_occupations)

    p = sub.add_parser("recommend-skills", help="prioritized skills for a source->target move")
    p.add_argument("--corpus", required=True)
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--year", type=int, required=True)
    p.add_argument("--rca", default=None, help="precomputed rca artifact")
    p.add_argument("--theta", default=None, help="precomputed theta artifact")
    p.add_argument("--out", default=None, help="JSON output path (default stdout)")
    common(p, seed=False, min_count=True)
    p.set_defaults(func=cmd_recommend_skills)

    p = sub.add_parser("indicator", help="technology-adoption indicator per industry")
    p.add_argument("--corpus", required=True)
    p.add_argument("--years", default=None, help="e.g. 2013:2019 or 2013,2016,2019")
    p.add_argument("--industries", default=None, help="comma-separated codes (default all)")
    p.add_argument("--seeds", default=",".join(DEFAULT_SEEDS),
                   help="comma-separated seed skill names")
    p.add_argument("--top-n", type=int, default=100)
    p.add_argument("--out", required=True, help="indicator CSV path")
    common(p, seed=False, min_count=True)
    p.set_defaults(func=cmd_indicator)

    p = sub.add_parser("validate", help="resampled significance of similarity vs transitions")
    p.add_argument("--corpus", required=True)
    p.add_argument("--transitions", required=True)
    p.add_argument("--n-runs", type=int, default=100)
    p.add_argument("--exclude-same", action="store_true",
                   help="drop same-occupation transitions before testing")
    p.add_argument("--log", action="store_true", help="test log-transformed similarities")
    p.add_argument("--out", default=None, help="JSON report path (default stdout)")
    common(p, min_count=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("synth", help="generate a synthetic corpus with planted structure")
    p.add_argument("--preset", choices=["basic", "adoption"], default="basic")
    p.add_argument("--n-occupations", type=int, default=10)
    p.add_argument("--n-ads", type=int, default=2000)
    p.add_argument("--n-transitions", type=int, default=600)
    p.add_argument("--n-industries", type=int, default=2)
    p.add_argument("--years", default="2016:2018")
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--out-dir", required=True)
    common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("serve", help="read-only HTTP API over a snapshot directory")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--reload-secret", default=None)
    p.add_argument("--static-dir", default=None, help="optional built UI assets")
    common(p, seed=False)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:   # argparse: usage errors exit 2, --help exits 0
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
