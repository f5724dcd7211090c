"""Artifact file formats.

Every CSV starts with a "# manifest: <hash>" comment line and every JSON
document carries a "manifest" key, so outputs can be traced to the run
configuration that produced them. Edge weights and other floats are
written with 17 significant digits for bit-stable round trips.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .community import GammaSelection, Partition
from .corpus import TopicVocabulary, format_month, parse_month
from .errors import CorpusError, DataError
from .graphbuild import TopicNetwork
from .trajectories import MeasureTrajectory

MANIFEST_PREFIX = "# manifest: "


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as handle:
        for block in iter(lambda: handle.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


def write_json(path: Path, payload: dict, manifest: str) -> None:
    document = {"manifest": manifest}
    document.update(payload)
    Path(path).write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_json(path: Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def open_csv_writer(path: Path, manifest: str):
    handle = Path(path).open("w", newline="", encoding="utf-8")
    handle.write(MANIFEST_PREFIX + manifest + "\n")
    return handle, csv.writer(handle)


def read_csv_rows(path: Path) -> tuple[str | None, list[list[str]]]:
    """Returns (manifest hash or None, rows including the header row)."""
    manifest = None
    rows = []
    with Path(path).open("r", newline="", encoding="utf-8") as handle:
        for line in handle:
            if line.startswith("#"):
                if line.startswith(MANIFEST_PREFIX):
                    manifest = line[len(MANIFEST_PREFIX):].strip()
                continue
            rows.extend(csv.reader([line]))
    return manifest, rows


def artifact_manifest(path: Path) -> str | None:
    """The manifest hash recorded in a CSV or JSON artifact, if any."""
    path = Path(path)
    if not path.exists():
        return None
    if path.suffix == ".json":
        try:
            return read_json(path).get("manifest")
        except json.JSONDecodeError:
            return None
    manifest, _ = read_csv_rows(path)
    return manifest


def save_network(net: TopicNetwork, edges_path: Path, nodes_path: Path, manifest: str) -> None:
    handle, writer = open_csv_writer(edges_path, manifest)
    with handle:
        writer.writerow(["topic_a", "topic_b", "weight"])
        iu, ju = np.nonzero(np.triu(net.weights, k=1) != 0)
        for i, j in zip(iu, ju):
            writer.writerow([net.vocab.phrases[i], net.vocab.phrases[j], fmt(net.weights[i, j])])
    nodes = [
        {
            "phrase": phrase,
            "prevalence": prevalence,
            "classification": classification,
        }
        for phrase, prevalence, classification in zip(
            net.vocab.phrases, net.vocab.prevalence, net.vocab.classifications
        )
    ]
    payload = {
        "nodes": nodes,
        "window": None if net.window is None else {
            "center": format_month(net.window[0]),
            "half_width": net.window[1],
        },
        "provenance": net.provenance,
        "signed": net.signed,
    }
    write_json(nodes_path, payload, manifest)


def load_network(edges_path: Path, nodes_path: Path) -> TopicNetwork:
    payload = read_json(nodes_path)
    nodes = payload["nodes"]
    phrases = tuple(node["phrase"] for node in nodes)
    vocab = TopicVocabulary(
        phrases=phrases,
        prevalence=tuple(float(node["prevalence"]) for node in nodes),
        classifications=tuple(node.get("classification") for node in nodes),
    )
    index = {p: i for i, p in enumerate(phrases)}
    weights = np.zeros((len(phrases), len(phrases)))
    _, rows = read_csv_rows(edges_path)
    if not rows or rows[0] != ["topic_a", "topic_b", "weight"]:
        raise CorpusError(f"{edges_path}: expected edge-list header topic_a,topic_b,weight")
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 3:
            raise CorpusError(f"{edges_path}: line {lineno}: expected 3 columns")
        a, b, w = row
        if a not in index or b not in index:
            raise CorpusError(f"{edges_path}: line {lineno}: unknown topic")
        weights[index[a], index[b]] = weights[index[b], index[a]] = float(w)
    window = payload.get("window")
    return TopicNetwork(
        vocab=vocab,
        weights=weights,
        window=None if window is None else (parse_month(window["center"]), window["half_width"]),
        provenance=payload.get("provenance", ""),
        signed=bool(payload.get("signed", False)),
    )


def save_metrics(path: Path, net: TopicNetwork, node_metrics, graph_metrics, manifest: str) -> None:
    payload = {
        "nodes": [
            {
                "phrase": net.vocab.phrases[i],
                "degree": int(node_metrics.degree[i]),
                "strength": node_metrics.strength[i],
                "betweenness": node_metrics.betweenness[i],
                "clustering": node_metrics.clustering[i],
            }
            for i in range(net.n_nodes)
        ],
        "graph": {
            "efficiency": graph_metrics.efficiency,
            "path_length": graph_metrics.path_length,
            "mean_clustering": graph_metrics.mean_clustering,
            "swp": graph_metrics.swp,
            "delta_c": graph_metrics.delta_c,
            "delta_l": graph_metrics.delta_l,
            "disconnected_flag": graph_metrics.disconnected,
        },
    }
    write_json(path, payload, manifest)


def save_partitions(path: Path, vocab: TopicVocabulary, partitions: list[Partition], manifest: str) -> None:
    """CSV of (topic, community, origin, gamma), one row per topic per partition."""
    handle, writer = open_csv_writer(path, manifest)
    with handle:
        writer.writerow(["topic", "community", "origin", "gamma"])
        for part in partitions:
            gamma = "" if part.gamma is None else fmt(part.gamma)
            for i, phrase in enumerate(vocab.phrases):
                writer.writerow([phrase, int(part.labels[i]), part.origin, gamma])


def save_gamma_curve(path: Path, selection: GammaSelection, manifest: str) -> None:
    handle, writer = open_csv_writer(path, manifest)
    with handle:
        writer.writerow(["gamma", "mean_jaccard", "sd_jaccard"])
        for gamma, mean, sd in selection.curve:
            writer.writerow([fmt(gamma), fmt(mean), fmt(sd)])


def save_trajectories(
    path: Path,
    observed: dict[str, MeasureTrajectory],
    standardized: dict[str, MeasureTrajectory],
    manifest: str,
) -> None:
    measures = ["swp", "deviance", "xi", "strength"]
    centers = observed[measures[0]].centers
    handle, writer = open_csv_writer(path, manifest)
    with handle:
        writer.writerow(["window_center"] + measures + [f"z_{m}" for m in measures])
        for t, center in enumerate(centers):
            row = [format_month(center)]
            row += [fmt(observed[m].values[t]) for m in measures]
            row += [fmt(standardized[m].values[t]) for m in measures]
            writer.writerow(row)


def load_trajectories(path: Path) -> tuple[dict[str, MeasureTrajectory], dict[str, MeasureTrajectory]]:
    _, rows = read_csv_rows(path)
    header, data = rows[0], rows[1:]
    measures = [h for h in header[1:] if not h.startswith("z_")]
    centers = tuple(parse_month(row[0]) for row in data)
    observed = {}
    standardized = {}
    for col, name in enumerate(header[1:], start=1):
        values = np.array([float(row[col]) for row in data])
        if name.startswith("z_"):
            standardized[name[2:]] = MeasureTrajectory(
                centers=centers, values=values, label=name[2:], standardized=True
            )
        else:
            observed[name] = MeasureTrajectory(centers=centers, values=values, label=name)
    if set(observed) != set(measures):
        raise DataError(f"{path}: malformed trajectory header")
    return observed, standardized


def save_null_trajectories(path: Path, bundles, manifest: str) -> None:
    """Long-format CSV of every null member's raw measure trajectories."""
    handle, writer = open_csv_writer(path, manifest)
    with handle:
        writer.writerow(["member", "measure", "window_center", "value"])
        for k, bundle in enumerate(bundles, start=1):
            for measure, traj in sorted(bundle.trajectories.items()):
                for center, value in zip(traj.centers, traj.values):
                    writer.writerow([k, measure, format_month(center), fmt(value)])


def load_null_trajectories(path: Path) -> dict[str, list[MeasureTrajectory]]:
    """Measure -> list of per-member trajectories, in member order."""
    _, rows = read_csv_rows(path)
    records: dict[tuple[int, str], list[tuple[int, float]]] = {}
    for member, measure, center, value in rows[1:]:
        records.setdefault((int(member), measure), []).append(
            (parse_month(center), float(value))
        )
    out: dict[str, list[MeasureTrajectory]] = {}
    for (member, measure), points in sorted(records.items()):
        out.setdefault(measure, []).append(
            MeasureTrajectory(
                centers=tuple(c for c, _ in points),
                values=np.array([v for _, v in points]),
                label=measure,
            )
        )
    return out


def save_windows_meta(path: Path, windows, manifest: str) -> None:
    handle, writer = open_csv_writer(path, manifest)
    with handle:
        writer.writerow(["window_center", "n_docs", "n_edges"])
        for record in windows:
            writer.writerow([format_month(record.center), record.n_docs, record.n_edges])


def load_windows_meta(path: Path) -> list[tuple[int, int, int]]:
    _, rows = read_csv_rows(path)
    return [(parse_month(r[0]), int(r[1]), int(r[2])) for r in rows[1:]]


def load_impact_csv(path: Path) -> dict[int, float]:
    """Yearly engagement series: CSV of (year, impact_factor), header optional."""
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"impact file not found: {path}")
    series: dict[int, float] = {}
    with path.open("r", newline="", encoding="utf-8") as handle:
        for lineno, row in enumerate(csv.reader(handle), start=1):
            if not row or row[0].startswith("#"):
                continue
            if lineno == 1 and not row[0].strip().isdigit():
                continue  # header
            try:
                year, value = int(row[0]), float(row[1])
            except (ValueError, IndexError):
                raise CorpusError(f"{path}: line {lineno}: expected year,impact_factor") from None
            if year in series:
                raise CorpusError(f"{path}: duplicate year {year}")
            series[year] = value
    if not series:
        raise CorpusError(f"{path}: no usable rows")
    return series
