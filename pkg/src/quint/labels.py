"""Per-node class labels (single- or multi-label) and their text format."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional, Sequence, TextIO

import numpy as np

from .graph import Graph, GraphFormatError


@dataclass
class LabelSet:
    """``labels[u]`` is a tuple of class ids for node ``u`` (empty if unlabeled)."""

    labels: list
    num_classes: int
    multi_label: bool = False
    class_names: Optional[list] = field(default=None, repr=False)

    def __post_init__(self):
        self.labels = [tuple(sorted(set(int(c) for c in ls))) for ls in self.labels]
        for u, ls in enumerate(self.labels):
            if any(not 0 <= c < self.num_classes for c in ls):
                raise ValueError(f"node {u}: class id outside [0, {self.num_classes})")
            if not self.multi_label and len(ls) > 1:
                raise ValueError(f"node {u}: {len(ls)} labels in single-label mode")

    @classmethod
    def from_array(cls, y, num_classes: Optional[int] = None) -> "LabelSet":
        """Single-label set from one class id per node."""
        y = np.asarray(y, dtype=np.int64)
        k = int(y.max()) + 1 if num_classes is None else num_classes
        return cls([(int(c),) for c in y], k, multi_label=False)

    @classmethod
    def from_indicator(cls, ind, multi_label: bool = True) -> "LabelSet":
        ind = np.asarray(ind, dtype=bool)
        return cls([tuple(np.flatnonzero(r).tolist()) for r in ind], ind.shape[1], multi_label)

    @property
    def n(self) -> int:
        return len(self.labels)

    def labeled_nodes(self) -> np.ndarray:
        return np.array([u for u, ls in enumerate(self.labels) if ls], dtype=np.int64)

    def indicator(self, nodes: Optional[Sequence[int]] = None) -> np.ndarray:
        """Boolean ``(len(nodes), num_classes)`` membership matrix."""
        nodes = range(self.n) if nodes is None else nodes
        out = np.zeros((len(nodes), self.num_classes), dtype=bool)
        for r, u in enumerate(nodes):
            out[r, list(self.labels[u])] = True
        return out

    def as_array(self) -> np.ndarray:
        """One class id per node; -1 for unlabeled. Single-label mode only."""
        if self.multi_label:
            raise ValueError("as_array needs single-label data")
        return np.array([ls[0] if ls else -1 for ls in self.labels], dtype=np.int64)


def _class_sort_key(tok: str):
    try:
        return (0, int(tok), "")
    except ValueError:
        return (1, 0, tok)


def load_labels(source: TextIO | str | os.PathLike, graph: Optional[Graph] = None) -> LabelSet:
    """Read ``node_id<TAB>label[,label...]`` lines.

    With ``graph``, node ids are external ids resolved through its id map and
    ids missing from the graph are ignored. Multi-label mode is switched on if
    any node carries more than one label.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            return load_labels(fh, graph)
    raw: dict[int, set] = {}
    for lineno, line in enumerate(source, start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        parts = s.split(None, 1)
        if len(parts) != 2:
            raise GraphFormatError(f"line {lineno}: expected node_id<TAB>labels")
        try:
            node = int(parts[0])
        except ValueError:
            raise GraphFormatError(f"line {lineno}: non-integer node id {parts[0]!r}") from None
        toks = [t.strip() for t in parts[1].split(",") if t.strip()]
        if not toks:
            raise GraphFormatError(f"line {lineno}: no labels")
        raw.setdefault(node, set()).update(toks)
    if not raw:
        raise GraphFormatError("labels file is empty")

    names = sorted({t for ts in raw.values() for t in ts}, key=_class_sort_key)
    cid = {t: k for k, t in enumerate(names)}
    if graph is None:
        n = max(raw) + 1
        index = {u: u for u in raw}
    else:
        n = graph.n
        ext = {int(e): k for k, e in enumerate(graph.id_map.tolist())}
        index = {u: ext[u] for u in raw if u in ext}
    labels = [()] * n
    for u, k in index.items():
        labels[k] = tuple(sorted(cid[t] for t in raw[u]))
    multi = any(len(ts) > 1 for ts in raw.values())
    return LabelSet(labels, len(names), multi_label=multi, class_names=names)


def save_labels(ls: LabelSet, sink: TextIO | str | os.PathLike, graph: Optional[Graph] = None) -> None:
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="utf-8") as fh:
            return save_labels(ls, fh, graph)
    names = ls.class_names or [str(k) for k in range(ls.num_classes)]
    for u, cs in enumerate(ls.labels):
        if cs:
            node = int(graph.id_map[u]) if graph is not None else u
            sink.write(f"{node}\t{','.join(str(names[c]) for c in cs)}\n")
