"""Tabular export of generated trees with their derived quantities."""

from __future__ import annotations

import csv
import io

from .coherence import Coherence, alpha, jet_text
from .rulegen import Classification, TreeSet, classify
from .trees import homogeneity, in_grammar, leaves, missing_count, symmetry_factor, to_text

__all__ = ["tree_records", "records_csv", "FIELDS"]

FIELDS = ["tree", "homogeneity", "value", "class", "m", "leaves", "symmetry_factor", "alpha", "upsilon"]


def tree_records(ts: TreeSet, classes: Classification | None = None, coherence: Coherence | None = None) -> list[dict]:
    classes = classes or classify(ts)
    coh = coherence or Coherence(d=ts.d)
    rows = []
    for t in sorted(ts, key=lambda t: (homogeneity(t).key(ts.s), t.key)):
        h = homogeneity(t)
        row = {
            "tree": to_text(t),
            "homogeneity": str(h),
            "value": str(h.value(ts.s)),
            "class": classes.class_of(t),
            "m": missing_count(t) if in_grammar(t) else "",
            "leaves": leaves(t),
            "symmetry_factor": symmetry_factor(t),
            "alpha": "",
            "upsilon": "",
        }
        if not t.is_monomial:
            row["alpha"] = str(alpha(t, ts.s))
            row["upsilon"] = jet_text(coh(t))
        rows.append(row)
    return rows


def records_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()
