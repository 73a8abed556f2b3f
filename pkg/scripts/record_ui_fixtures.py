#!/usr/bin/env python3
"""Build a small snapshot and record API responses as frontend test fixtures.

The explorer's vitest suite replays these JSON files headlessly, so it needs
no live service. Rerunning this script regenerates frontend/tests/fixtures/.
"""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from skillatlas import artifacts, gbt
from skillatlas.clustering import k_medoids, mds_layout
from skillatlas.features import YearSimilarityIndex, build_training_set, to_matrix
from skillatlas.indicator import SeedConfig, adoption_series
from skillatlas.service import create_app
from skillatlas.synth import SynthConfig, generate_synthetic
from skillatlas.transitions import build_map, pairwise_skillset_similarity

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "frontend" / "tests" / "fixtures"
SNAPSHOT = ROOT / "frontend" / "tests" / "snapshot"


def build_snapshot() -> None:
    SNAPSHOT.mkdir(parents=True, exist_ok=True)
    result = generate_synthetic(
        SynthConfig(n_occupations=10, n_ads=1500, n_transitions=220,
                    years=(2018,), n_industries=3, essential_occupations=(6,)),
        seed=99,
    )
    corpus = result.corpus
    sim = YearSimilarityIndex(corpus, min_count=5)
    vectors, _ = build_training_set(result.transitions, corpus, result.employment,
                                    seed=1, sim=sim)
    x, y, names = to_matrix(vectors)
    model = gbt.train((x, y), gbt.GbtHyperparams(n_trees=60, max_depth=3), seed=2,
                      feature_names=names)
    tmap = build_map(model, corpus, result.employment, 2018, sim=sim)
    rca, theta, sets = sim.year_artifacts(2018)

    artifacts.save_corpus(corpus, SNAPSHOT / "corpus.json")
    artifacts.save_theta(theta, SNAPSHOT / "theta_2018.bin")
    artifacts.save_rca(rca, SNAPSHOT / "theta_2018.rca.bin")
    artifacts.save_map(tmap, SNAPSHOT / "map_2018.bin")
    gbt.save_model(model, SNAPSHOT / "model.json")

    codes = sorted(sets)
    distances = 1.0 - np.clip(pairwise_skillset_similarity(sets, theta, codes), 0.0, 1.0)
    np.fill_diagonal(distances, 0.0)
    distances = (distances + distances.T) / 2.0
    assignment = k_medoids(distances, 4, seed=3, entity_ids=codes)
    layout = mds_layout(distances, entity_ids=codes)
    artifacts.layout_to_csv(layout.coordinates, assignment.labels,
                            {c: corpus.occupation_title(c) for c in codes},
                            SNAPSHOT / "layout_occupations_2018.csv")

    series = adoption_series(
        corpus, {2018: rca}, {2018: theta},
        SeedConfig(seed_names=("occ000_skill00", "occ000_skill01"), top_n=10),
        years=[2018],
    )
    (SNAPSHOT / "indicator.json").write_text(
        json.dumps(artifacts.indicator_to_json(series, [2018]), sort_keys=True))


def record() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    client = TestClient(create_app(SNAPSHOT))
    source, target = "1000", "1001"
    calls = {
        "health.json": "/api/health",
        "occupations.json": "/api/occupations?year=2018",
        "recommendations.json":
            f"/api/recommendations?source={source}&year=2018&n=8&period_a=2018&period_b=2018",
        "skill_gap.json": f"/api/skill-gap?source={source}&target={target}&year=2018",
        "layout.json": "/api/layout?year=2018&kind=occupations",
        "indicator.json": "/api/indicator",
        "map.json": "/api/map?year=2018",
    }
    for name, url in calls.items():
        resp = client.get(url)
        resp.raise_for_status()
        (FIXTURES / name).write_text(json.dumps(resp.json(), indent=2, sort_keys=True) + "\n")
        print(f"recorded {name} <- {url}")


if __name__ == "__main__":
    build_snapshot()
    record()
