"""On-disk formats: matrices as headerless CSV, graphs and configs as JSON.

Matrix CSV uses %.17g so float64 values round-trip exactly.  Graph JSON is
1-based with sorted edge lists and a schema_version field; deterministic
serialization (sorted keys, fixed indentation) keeps replicated runs
byte-identical.
"""

from __future__ import annotations

import json

import numpy as np

from .model import ChainGraph

SCHEMA_VERSION = 1


def write_matrix_csv(path, m):
    m = np.atleast_2d(np.asarray(m, dtype=float))
    np.savetxt(path, m, fmt="%.17g", delimiter=",")


def read_matrix_csv(path):
    return np.loadtxt(path, delimiter=",", ndmin=2)


def graph_payload(graph):
    """JSON-ready dict for a graph; node ids are 1-based in files."""
    return {
        "schema_version": SCHEMA_VERSION,
        "p": graph.p,
        "undirected": sorted([i + 1, j + 1] for i, j in graph.undirected),
        "directed": sorted([pa + 1, ch + 1] for pa, ch in graph.directed),
    }


def write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def write_graph_json(path, graph):
    write_json(path, graph_payload(graph))


def graph_from_payload(payload):
    try:
        version = payload["schema_version"]
        p = payload["p"]
        und = payload["undirected"]
        dire = payload["directed"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"graph JSON is missing field {exc}") from exc
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {version}")
    if not isinstance(p, int) or p < 1:
        raise ValueError("p must be a positive integer")

    def convert(edges, name):
        out = []
        for e in edges:
            if len(e) != 2:
                raise ValueError(f"{name} edge {e} must have two nodes")
            a, b = int(e[0]), int(e[1])
            if not (1 <= a <= p and 1 <= b <= p):
                raise ValueError(f"{name} edge {e} outside 1..{p}")
            out.append((a - 1, b - 1))
        return out

    return ChainGraph.from_edges(p, convert(und, "undirected"),
                                 convert(dire, "directed"))


def read_graph_json(path):
    return graph_from_payload(read_json(path))
