"""Read-only HTTP API over precomputed pipeline artifacts.

A snapshot directory holds the corpus artifact plus per-year similarity
matrices, transition maps, layouts, and the indicator series. Requests are
pure functions of (snapshot, query); the snapshot is swapped atomically by
/admin/reload so concurrent readers always see one consistent bundle.

Layout expected in the data directory:
    corpus.json
    theta_<year>.bin, theta_<year>.rca.bin
    map_<year>.bin
    layout_<kind>_<year>.csv          (optional)
    indicator.json                    (optional)
    model.json                        (optional metadata)
"""

from __future__ import annotations

import csv
import hashlib
import json
import re
from dataclasses import asdict
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse

from . import artifacts
from .corpus import Corpus
from .features import occupation_stats
from .similarity import RcaMatrix, ThetaMatrix
from .transitions import (
    RecommendationFilters,
    TransitionsError,
    TransitionsMap,
    parse_period,
    recommend_occupations,
    recommend_skills,
)


class Snapshot:
    """Immutable view over one artifact directory."""

    def __init__(self, data_dir: Path):
        self.data_dir = Path(data_dir)
        corpus_path = self.data_dir / "corpus.json"
        if not corpus_path.exists():
            raise FileNotFoundError(f"snapshot corpus missing: {corpus_path}")
        self.corpus: Corpus = artifacts.load_corpus_artifact(corpus_path)
        self.thetas: dict[int, ThetaMatrix] = {}
        self.rcas: dict[int, RcaMatrix] = {}
        self.maps: dict[int, TransitionsMap] = {}
        self.layouts: dict[tuple[str, int], list[dict]] = {}
        self.indicator: dict | None = None
        self.model_meta: dict | None = None

        files = sorted(p for p in self.data_dir.iterdir() if p.is_file())
        for path in files:
            name = path.name
            if m := re.fullmatch(r"theta_(\d+)\.bin", name):
                self.thetas[int(m.group(1))] = artifacts.load_theta(path)
            elif m := re.fullmatch(r"theta_(\d+)\.rca\.bin", name):
                self.rcas[int(m.group(1))] = artifacts.load_rca(path)
            elif m := re.fullmatch(r"map_(\d+)\.bin", name):
                self.maps[int(m.group(1))] = artifacts.load_map(path)
            elif m := re.fullmatch(r"layout_(\w+)_(\d+)\.csv", name):
                with open(path, newline="", encoding="utf-8") as fh:
                    self.layouts[(m.group(1), int(m.group(2)))] = list(csv.DictReader(fh))
            elif name == "indicator.json":
                self.indicator = json.loads(path.read_text())
            elif name == "model.json":
                payload = json.loads(path.read_text())
                self.model_meta = {
                    "format": payload.get("format"),
                    "n_features": payload.get("n_features"),
                    "feature_names": payload.get("feature_names"),
                    "hyperparams": payload.get("hyperparams"),
                }

        digest = hashlib.sha256()
        for path in files:
            digest.update(path.name.encode())
            digest.update(bytes.fromhex(artifacts.sha256_file(path)))
        self.snapshot_id = digest.hexdigest()

        self._stats_cache: dict[int, dict] = {}

    def stats(self, year: int) -> dict:
        if year not in self._stats_cache:
            self._stats_cache[year] = occupation_stats(self.corpus, [], year)
        return self._stats_cache[year]


def _bad_request(message: str) -> HTTPException:
    return HTTPException(status_code=400, detail=message)


def _parse_int(raw: str | None, name: str) -> int:
    if raw is None:
        raise _bad_request(f"missing query parameter: {name}")
    try:
        return int(raw)
    except ValueError:
        raise _bad_request(f"malformed {name}: {raw!r}") from None


def create_app(data_dir, reload_secret: str | None = None, static_dir=None) -> FastAPI:
    app = FastAPI(title="skillatlas", docs_url=None, redoc_url=None)
    app.state.snapshot = None
    app.state.data_dir = Path(data_dir)
    app.state.reload_secret = reload_secret

    def load_snapshot() -> None:
        app.state.snapshot = Snapshot(app.state.data_dir)

    try:
        load_snapshot()
    except (FileNotFoundError, artifacts.ArtifactError):
        app.state.snapshot = None

    def snap() -> Snapshot:
        snapshot = app.state.snapshot
        if snapshot is None:
            raise HTTPException(status_code=503, detail="no snapshot loaded")
        return snapshot

    @app.get("/api/health")
    def health():
        snapshot = app.state.snapshot
        if snapshot is None:
            return JSONResponse({"status": "empty", "snapshot": None}, status_code=503)
        return {"status": "ok", "snapshot": snapshot.snapshot_id,
                "years": sorted(snapshot.corpus.year_index)}

    @app.get("/api/occupations")
    def occupations(year: str | None = None):
        s = snap()
        y = _parse_int(year, "year")
        if y not in s.corpus.year_index:
            raise HTTPException(status_code=404, detail=f"year {y} not in snapshot")
        stats = s.stats(y)
        return {
            "snapshot": s.snapshot_id,
            "year": y,
            "occupations": [
                {
                    "code": code,
                    "title": s.corpus.occupation_title(code),
                    "posting_frequency": st.posting_frequency,
                    "median_salary": st.median_salary,
                }
                for code, st in sorted(stats.items())
            ],
        }

    @app.get("/api/map")
    def transition_map(year: str | None = None):
        s = snap()
        y = _parse_int(year, "year")
        if y not in s.maps:
            raise HTTPException(status_code=404, detail=f"no transitions map for {y}")
        tmap = s.maps[y]
        return {
            "snapshot": s.snapshot_id,
            "year": y,
            "occupations": list(tmap.occupations),
            "titles": [s.corpus.occupation_title(c) for c in tmap.occupations],
            "matrix": [[float(v) for v in row] for row in tmap.matrix],
        }

    @app.get("/api/recommendations")
    def recommendations(
        source: str | None = None,
        year: str | None = None,
        n: str | None = "10",
        period_a: str | None = None,
        period_b: str | None = None,
        min_percent_change: str | None = None,
        required_tag: str | None = None,
        min_postings: str | None = None,
        include_self: str | None = None,
    ):
        s = snap()
        y = _parse_int(year, "year")
        if source is None:
            raise _bad_request("missing query parameter: source")
        if y not in s.maps:
            raise HTTPException(status_code=404, detail=f"no transitions map for {y}")
        tmap = s.maps[y]
        if source not in tmap.occupations:
            raise HTTPException(status_code=404, detail=f"unknown occupation: {source}")
        try:
            pa = parse_period(period_a) if period_a else ((y, None),)
            pb = parse_period(period_b) if period_b else ((y, None),)
        except TransitionsError as exc:
            raise _bad_request(str(exc)) from None
        filters = None
        if min_percent_change is not None or required_tag is not None or min_postings is not None:
            try:
                filters = RecommendationFilters(
                    min_percent_change=float(min_percent_change) if min_percent_change else None,
                    required_tag=required_tag,
                    min_postings=int(min_postings) if min_postings else None,
                )
            except ValueError:
                raise _bad_request("malformed filter value") from None
        recs = recommend_occupations(
            tmap, source, s.corpus, pa, pb,
            n=_parse_int(n, "n"), filters=filters,
            include_self=include_self in ("1", "true", "yes"),
        )
        return {
            "snapshot": s.snapshot_id,
            "source": source,
            "source_title": s.corpus.occupation_title(source),
            "year": y,
            "recommendations": [asdict(r) for r in recs],
        }

    @app.get("/api/skill-gap")
    def skill_gap(source: str | None = None, target: str | None = None, year: str | None = None):
        s = snap()
        y = _parse_int(year, "year")
        if source is None or target is None:
            raise _bad_request("skill-gap needs source and target")
        if y not in s.thetas or y not in s.rcas:
            raise HTTPException(status_code=404, detail=f"no similarity artifacts for {y}")
        for code in (source, target):
            if code not in s.corpus.occupations_in_year(y):
                raise HTTPException(status_code=404, detail=f"unknown occupation: {code}")
        recs = recommend_skills(source, target, y, s.corpus, s.rcas[y], s.thetas[y])
        return {
            "snapshot": s.snapshot_id,
            "source": source,
            "target": target,
            "year": y,
            "skills": [asdict(r) for r in recs],
        }

    @app.get("/api/indicator")
    def indicator(industry: str | None = None):
        s = snap()
        if s.indicator is None:
            raise HTTPException(status_code=404, detail="no indicator series in snapshot")
        payload = dict(s.indicator)
        if industry is not None:
            rows = [r for r in payload["industries"] if r["code"] == industry]
            if not rows:
                raise HTTPException(status_code=404, detail=f"unknown industry: {industry}")
            payload["industries"] = rows
        payload["snapshot"] = s.snapshot_id
        return payload

    @app.get("/api/layout")
    def layout(year: str | None = None, kind: str | None = "skills"):
        s = snap()
        y = _parse_int(year, "year")
        if kind not in ("skills", "occupations"):
            raise _bad_request(f"unknown layout kind: {kind}")
        rows = s.layouts.get((kind, y))
        if rows is None:
            raise HTTPException(status_code=404, detail=f"no {kind} layout for {y}")
        if kind == "occupations":
            rows = [
                {**r, "automation_risk": s.corpus.occupation_meta.get(r["entity"], {}).get("automation_risk")}
                for r in rows
            ]
        return {"snapshot": s.snapshot_id, "year": y, "kind": kind, "points": rows}

    @app.post("/admin/reload")
    def reload_snapshot(request: Request):
        if app.state.reload_secret is None:
            raise HTTPException(status_code=403, detail="reload disabled")
        if request.headers.get("x-reload-secret") != app.state.reload_secret:
            raise HTTPException(status_code=403, detail="bad reload secret")
        try:
            load_snapshot()
        except (FileNotFoundError, artifacts.ArtifactError) as exc:
            raise HTTPException(status_code=503, detail=str(exc)) from None
        return {"status": "reloaded", "snapshot": app.state.snapshot.snapshot_id}

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
