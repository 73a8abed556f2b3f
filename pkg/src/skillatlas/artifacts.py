"""Versioned on-disk artifacts: a columnar binary format plus CSV/JSON mirrors.

Binary layout: magic "SKAT", u16 format version, u32 header length, then a
canonical JSON header naming the artifact kind, metadata, and each column's
name/dtype/length, followed by the raw little-endian column bytes in header
order. Writes are byte-deterministic for identical inputs.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import struct
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import Corpus, JobAd, LoadReport
from .similarity import RcaMatrix, ThetaMatrix
from .transitions import TransitionsMap

MAGIC = b"SKAT"
FORMAT_VERSION = 1


class ArtifactError(ValueError):
    pass


def _canonical_json(payload) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def write_columns(path, kind: str, meta: Mapping, columns: dict[str, np.ndarray]) -> None:
    header = {
        "kind": kind,
        "meta": dict(meta),
        "columns": [
            {"name": name, "dtype": str(arr.dtype), "length": int(arr.shape[0])}
            for name, arr in columns.items()
        ],
    }
    blob = _canonical_json(header)
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<HI", FORMAT_VERSION, len(blob)))
    buf.write(blob)
    for arr in columns.values():
        if arr.dtype.byteorder == ">":
            arr = arr.astype(arr.dtype.newbyteorder("<"))
        buf.write(np.ascontiguousarray(arr).tobytes())
    Path(path).write_bytes(buf.getvalue())


def read_columns(path) -> tuple[str, dict, dict[str, np.ndarray]]:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise ArtifactError(f"{path}: not a columnar artifact")
    version, header_len = struct.unpack("<HI", raw[4:10])
    if version != FORMAT_VERSION:
        raise ArtifactError(f"{path}: unsupported format version {version}")
    header = json.loads(raw[10 : 10 + header_len])
    offset = 10 + header_len
    columns = {}
    for spec in header["columns"]:
        dtype = np.dtype(spec["dtype"])
        nbytes = dtype.itemsize * spec["length"]
        columns[spec["name"]] = np.frombuffer(raw[offset : offset + nbytes], dtype=dtype).copy()
        offset += nbytes
    return header["kind"], header["meta"], columns


# -- similarity artifacts ------------------------------------------------------


def save_theta(theta: ThetaMatrix, path) -> None:
    n = len(theta.skill_ids)
    if theta.is_dense:
        columns = {
            "skill_ids": theta.skill_ids.astype(np.int64),
            "effective_counts": theta.effective_counts.astype(np.int64),
            "values": theta.matrix.astype(np.float64).ravel(),
        }
        meta = {"year": theta.year, "n_skills": n, "storage": "dense"}
    else:
        coo = theta.matrix.tocoo()
        columns = {
            "skill_ids": theta.skill_ids.astype(np.int64),
            "effective_counts": theta.effective_counts.astype(np.int64),
            "row": coo.row.astype(np.int64),
            "col": coo.col.astype(np.int64),
            "values": coo.data.astype(np.float64),
        }
        meta = {"year": theta.year, "n_skills": n, "storage": "sparse"}
    write_columns(path, "theta", meta, columns)


def load_theta(path) -> ThetaMatrix:
    kind, meta, columns = read_columns(path)
    if kind != "theta":
        raise ArtifactError(f"{path}: expected a theta artifact, found {kind}")
    n = meta["n_skills"]
    if meta["storage"] == "dense":
        matrix = columns["values"].reshape(n, n)
    else:
        matrix = sp.csr_matrix(
            (columns["values"], (columns["row"], columns["col"])), shape=(n, n)
        )
    return ThetaMatrix(
        year=meta["year"],
        skill_ids=columns["skill_ids"],
        effective_counts=columns["effective_counts"],
        matrix=matrix,
    )


def save_rca(rca: RcaMatrix, path) -> None:
    m = rca.values.tocoo()
    write_columns(
        path,
        "rca",
        {"year": rca.year, "n_ads": int(rca.values.shape[0]), "n_skills": int(rca.values.shape[1])},
        {
            "skill_ids": rca.skill_ids.astype(np.int64),
            "ad_indices": rca.ad_indices.astype(np.int64),
            "dropped_ads": np.asarray(rca.dropped_ads, dtype=np.int64),
            "row": m.row.astype(np.int64),
            "col": m.col.astype(np.int64),
            "values": m.data.astype(np.float64),
        },
    )


def load_rca(path) -> RcaMatrix:
    kind, meta, columns = read_columns(path)
    if kind != "rca":
        raise ArtifactError(f"{path}: expected an rca artifact, found {kind}")
    values = sp.csr_matrix(
        (columns["values"], (columns["row"], columns["col"])),
        shape=(meta["n_ads"], meta["n_skills"]),
    )
    return RcaMatrix(
        year=meta["year"],
        skill_ids=columns["skill_ids"],
        ad_indices=columns["ad_indices"],
        values=values,
        dropped_ads=tuple(int(x) for x in columns["dropped_ads"]),
    )


def save_map(tmap: TransitionsMap, path) -> None:
    write_columns(
        path,
        "transitions-map",
        {
            "year": tmap.year,
            "occupations": list(tmap.occupations),
            "excluded": list(tmap.excluded),
        },
        {"matrix": tmap.matrix.astype(np.float64).ravel()},
    )


def load_map(path) -> TransitionsMap:
    kind, meta, columns = read_columns(path)
    if kind != "transitions-map":
        raise ArtifactError(f"{path}: expected a transitions-map artifact, found {kind}")
    codes = tuple(meta["occupations"])
    return TransitionsMap(
        year=meta["year"],
        occupations=codes,
        matrix=columns["matrix"].reshape(len(codes), len(codes)),
        excluded=tuple(meta["excluded"]),
    )


# -- corpus serialization -------------------------------------------------------

CORPUS_FORMAT = "corpus"
CORPUS_VERSION = 1


def corpus_to_json_bytes(corpus: Corpus) -> bytes:
    ads = []
    for ad in corpus.ads:
        ads.append(
            {
                "id": ad.id,
                "year": ad.year,
                "occupation": ad.occupation,
                "occupation6": ad.occupation6,
                "industry": ad.industry,
                "skills": sorted(ad.skills),
                "salary": ad.salary,
                "education_years": ad.education_years,
                "experience_years": ad.experience_years,
                "month": ad.month,
                "tags": sorted(ad.tags),
            }
        )
    payload = {
        "format": CORPUS_FORMAT,
        "version": CORPUS_VERSION,
        "skill_names": list(corpus.skill_names),
        "occupation_table": corpus.occupation_table,
        "industry_table": corpus.industry_table,
        "occupation_meta": corpus.occupation_meta,
        "load_report": {
            "total": corpus.load_report.total,
            "loaded": corpus.load_report.loaded,
            "rejected_count": corpus.load_report.rejected_count,
            "reasons": dict(corpus.load_report.reasons),
        },
        "ads": ads,
    }
    return _canonical_json(payload)


def save_corpus(corpus: Corpus, path) -> None:
    Path(path).write_bytes(corpus_to_json_bytes(corpus))


def load_corpus_artifact(path) -> Corpus:
    payload = json.loads(Path(path).read_text())
    if payload.get("format") != CORPUS_FORMAT:
        raise ArtifactError(f"{path}: not a corpus artifact")
    if payload.get("version") != CORPUS_VERSION:
        raise ArtifactError(f"{path}: unsupported corpus version")
    ads = [
        JobAd(
            id=rec["id"],
            year=rec["year"],
            occupation=rec["occupation"],
            skills=frozenset(rec["skills"]),
            industry=rec["industry"],
            occupation6=rec["occupation6"],
            salary=rec["salary"],
            education_years=rec["education_years"],
            experience_years=rec["experience_years"],
            month=rec["month"],
            tags=frozenset(rec["tags"]),
        )
        for rec in payload["ads"]
    ]
    report = LoadReport(**payload["load_report"])
    return Corpus(
        ads,
        payload["skill_names"],
        payload["occupation_table"],
        payload["industry_table"],
        report,
        payload.get("occupation_meta"),
    )


# -- CSV mirrors -----------------------------------------------------------------


def _write_csv(path, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)


def theta_to_csv(theta: ThetaMatrix, corpus: Corpus, path) -> None:
    """Upper-triangle nonzero theta values: skill ids, names, value."""
    rows = [["skill_id_1", "skill_id_2", "skill_1", "skill_2", "theta"]]
    dense = theta.toarray()
    ids = theta.skill_ids
    for i in range(len(ids)):
        for j in range(i, len(ids)):
            if dense[i, j] != 0.0:
                rows.append([
                    int(ids[i]), int(ids[j]),
                    corpus.skill_name(int(ids[i])), corpus.skill_name(int(ids[j])),
                    repr(float(dense[i, j])),
                ])
    _write_csv(path, rows)


def map_to_csv(tmap: TransitionsMap, path) -> None:
    rows = [["source", "target", "probability"]]
    for si, source in enumerate(tmap.occupations):
        for ti, target in enumerate(tmap.occupations):
            rows.append([source, target, repr(float(tmap.matrix[ti, si]))])
    _write_csv(path, rows)


def layout_to_csv(coordinates: Mapping, labels: Mapping, names: Mapping, path) -> None:
    rows = [["entity", "name", "x", "y", "cluster"]]
    for entity in sorted(coordinates, key=str):
        x, y = coordinates[entity]
        rows.append([entity, names.get(entity, entity), repr(x), repr(y), labels.get(entity, "")])
    _write_csv(path, rows)


def indicator_to_csv(series: Sequence, years: Sequence[int], path) -> None:
    """S3-style table: industry, one column per year, percent change over span."""
    rows = [["industry", "title", *[str(y) for y in years], "percent_change"]]
    for s in series:
        vals = ["" if v is None else repr(v) for v in s.value_list(years)]
        pc = "" if s.percent_change is None else repr(s.percent_change)
        rows.append([s.industry, s.title, *vals, pc])
    _write_csv(path, rows)


def indicator_to_json(series: Sequence, years: Sequence[int]) -> dict:
    return {
        "years": list(years),
        "industries": [
            {
                "code": s.industry,
                "title": s.title,
                "values": s.value_list(years),
                "percent_change": s.percent_change,
            }
            for s in series
        ],
    }


def training_set_to_csv(rows, path) -> None:
    _write_csv(path, rows)


def save_ads_jsonl(corpus: Corpus, path) -> None:
    """Corpus ads re-emitted in the loadable JSONL input schema."""
    with open(path, "w", encoding="utf-8") as fh:
        for ad in corpus.ads:
            rec = {
                "id": ad.id,
                "year": ad.year,
                "month": ad.month,
                "occupation": ad.occupation,
                "occupation6": ad.occupation6,
                "industry": ad.industry,
                "skills": sorted(corpus.skill_name(s) for s in ad.skills),
                "salary": ad.salary,
                "education_years": ad.education_years,
                "experience_years": ad.experience_years,
                "tags": sorted(ad.tags),
            }
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def save_employment_csv(records, path) -> None:
    rows = [["occupation", "year", "total_employed_thousands", "total_hours_worked_thousands"]]
    for r in records:
        rows.append([r.occupation, r.year, repr(float(r.total_employed_thousands)),
                     repr(float(r.total_hours_worked_thousands))])
    _write_csv(path, rows)


def save_transitions_csv(records, path) -> None:
    rows = [["year", "source", "target"]]
    for r in records:
        rows.append([r.year, r.source, r.target])
    _write_csv(path, rows)


def save_occupation_meta_csv(corpus: Corpus, path) -> None:
    rows = [["code", "title", "automation_risk", "essential"]]
    for code in sorted(corpus.occupation_table):
        meta = corpus.occupation_meta.get(code, {})
        rows.append([code, corpus.occupation_table[code],
                     meta.get("automation_risk", ""), meta.get("essential", "")])
    _write_csv(path, rows)


def save_industry_meta_csv(corpus: Corpus, path) -> None:
    rows = [["code", "title"]]
    for code in sorted(corpus.industry_table):
        rows.append([code, corpus.industry_table[code]])
    _write_csv(path, rows)


# -- manifests ---------------------------------------------------------------------


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(path, subcommand: str, inputs: Mapping, params: Mapping,
                   seeds: Mapping, outputs: Sequence[str | Path]) -> dict:
    manifest = {
        "subcommand": subcommand,
        "inputs": {k: str(v) for k, v in inputs.items()},
        "params": {k: _plain(v) for k, v in params.items()},
        "seeds": {k: int(v) for k, v in seeds.items()},
        "outputs": {str(p): sha256_file(p) for p in sorted(map(str, outputs))},
    }
    Path(path).write_bytes(_canonical_json(manifest))
    return manifest


def _plain(value):
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return str(value)
