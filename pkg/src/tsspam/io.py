"""CSV/JSON serialization, log returns and graph export."""

from __future__ import annotations

import csv
import io as _io
import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import InputError, ParseError
from .model import CausalGraph, TsSpamFit, top_k_parents
from .objective import Coefficients
from .pista import PathEntry, SolutionPath
from .spline_basis import BSplineBasis, CenteredBasis, GroupedDesign, KnotVector

__all__ = [
    "SeriesFile",
    "read_csv",
    "write_csv",
    "format_float",
    "log_return",
    "atomic_write",
    "export_graph",
    "fit_to_dict",
    "fit_from_dict",
    "save_fits",
    "load_fits",
]


@dataclass(frozen=True)
class SeriesFile:
    labels: tuple
    data: np.ndarray

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def p(self) -> int:
        return self.data.shape[1]


def format_float(x: float) -> str:
    """17 significant digits: enough for an exact double round trip."""
    return format(float(x), ".17g")


def atomic_write(path, text: str) -> None:
    """Write ``text`` to a temporary sibling file, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_csv(path) -> SeriesFile:
    """Read a header-plus-rows numeric CSV.

    Raises
    ------
    ParseError
        For ragged rows or cells that are not finite decimal numbers; the
        error carries the 1-based file line and column.
    InputError
        For empty files or duplicate column labels.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: empty file") from None
        labels = tuple(h.strip() for h in header)
        if len(set(labels)) != len(labels):
            dupes = sorted({x for x in labels if labels.count(x) > 1})
            raise InputError(f"{path}: duplicate column labels {dupes}")
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(labels):
                raise ParseError(
                    f"{path}: line {line_no} has {len(row)} fields, expected {len(labels)}",
                    row=line_no,
                )
            vals = []
            for col, cell in enumerate(row, start=1):
                try:
                    v = float(cell)
                except ValueError:
                    v = math.nan
                if not math.isfinite(v):
                    raise ParseError(
                        f"{path}: line {line_no}, column {col} ({labels[col - 1]!r}): "
                        f"cannot parse {cell!r} as a finite number",
                        row=line_no, col=col,
                    )
                vals.append(v)
            rows.append(vals)
    data = np.array(rows, dtype=float).reshape(len(rows), len(labels))
    return SeriesFile(labels, data)


def write_csv(path, labels, data) -> None:
    data = np.asarray(data, dtype=float)
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(labels)
    for row in data:
        w.writerow([format_float(v) for v in row])
    atomic_write(path, buf.getvalue())


def log_return(prices) -> np.ndarray:
    """``log(1 + (X[t] - X[t-1]) / X[t-1])`` column-wise; one row shorter."""
    X = np.asarray(prices, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    bad = np.argwhere(~(X > 0))
    if bad.size:
        r, c = bad[0]
        raise InputError(f"nonpositive price {X[r, c]!r} at row {r + 1}, column {c + 1}")
    return np.log1p((X[1:] - X[:-1]) / X[:-1])


def _graph_rows(graph: CausalGraph, top_k: int | None):
    rows = []
    for i in range(graph.p):
        edges = top_k_parents(graph, i, top_k) if top_k is not None else sorted(
            graph.parents(i), key=lambda e: (-e.weight, e.source)
        )
        rows.extend(edges)
    return rows


def _dot_id(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_graph(graph: CausalGraph, fmt: str = "dot", top_k: int | None = None) -> str:
    """Serialize edges as a DOT digraph or JSON.

    Edges are ordered by target, then weight (descending), then source.
    """
    rows = _graph_rows(graph, top_k)
    fmt = fmt.lower()
    if fmt == "json":
        payload = {
            "p": graph.p,
            "labels": list(graph.labels) if graph.labels else None,
            "edges": [
                {"from": e.source, "to": e.target, "weight": e.weight,
                 "from_label": graph.label(e.source), "to_label": graph.label(e.target)}
                for e in rows
            ],
        }
        return json.dumps(payload, indent=2) + "\n"
    if fmt != "dot":
        raise InputError(f"unknown graph format {fmt!r}")
    lines = ["digraph causal {"]
    for j in range(graph.p):
        lines.append(f"  {_dot_id(graph.label(j))};")
    for e in rows:
        lines.append(
            f"  {_dot_id(graph.label(e.source))} -> {_dot_id(graph.label(e.target))} "
            f"[weight={format_float(e.weight)}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def _basis_to_dict(cb: CenteredBasis | None):
    if cb is None:
        return None
    kv = cb.base.knots
    return {
        "a": kv.a,
        "b": kv.b,
        "interior": kv.interior.tolist(),
        "order": kv.order,
        "offsets": np.asarray(cb.offsets).tolist(),
        "drop_last": cb.drop_last,
    }


def _basis_from_dict(d):
    if d is None:
        return None
    kv = KnotVector(d["a"], d["b"], np.array(d["interior"], dtype=float), int(d["order"]))
    return CenteredBasis(BSplineBasis(kv), np.array(d["offsets"], dtype=float), bool(d["drop_last"]))


def fit_to_dict(fit: TsSpamFit) -> dict:
    d = fit.design
    return {
        "target": fit.target,
        "selected_lambda": fit.selected_lambda,
        "selection": fit.selection,
        "p": d.p,
        "q": d.q,
        "response_mean": d.response_mean,
        "degenerate": list(d.degenerate),
        "scales": None if d.scales is None else np.asarray(d.scales).tolist(),
        "bases": [_basis_to_dict(b) for b in d.bases],
        "path": {
            "lambda0": fit.path.lambda0,
            "epsilon": fit.path.epsilon,
            "rho_minus": fit.path.rho_minus,
            "rho_plus": fit.path.rho_plus,
            "entries": [
                {
                    "lambda": e.lam,
                    "beta": e.beta.beta.tolist(),
                    "support": list(e.support),
                    "inner_iters": e.inner_iters,
                    "final_kkt": e.final_kkt,
                    "objective": e.objective,
                    "converged": e.converged,
                    "descent_violations": e.descent_violations,
                    "eta": e.eta,
                }
                for e in fit.path
            ],
        },
    }


def fit_from_dict(obj: dict) -> TsSpamFit:
    p, q = int(obj["p"]), int(obj["q"])
    design = GroupedDesign(
        Z=np.zeros((0, p * q)),
        p=p,
        q=q,
        bases=tuple(_basis_from_dict(b) for b in obj["bases"]),
        degenerate=tuple(obj.get("degenerate", ())),
        response_mean=float(obj["response_mean"]),
        scales=None if obj.get("scales") is None else np.array(obj["scales"], dtype=float),
    )
    po = obj["path"]
    path = SolutionPath(
        lambda0=po["lambda0"], epsilon=po["epsilon"],
        rho_minus=po.get("rho_minus"), rho_plus=po.get("rho_plus"),
    )
    for e in po["entries"]:
        path.entries.append(PathEntry(
            lam=e["lambda"],
            beta=Coefficients(np.array(e["beta"], dtype=float), p, q),
            inner_iters=e["inner_iters"],
            final_kkt=e["final_kkt"],
            objective=e["objective"],
            converged=e["converged"],
            descent_violations=e.get("descent_violations", 0),
            eta=e.get("eta", 1.0),
        ))
    entry = path.entry_at(obj["selected_lambda"])
    return TsSpamFit(int(obj["target"]), path, entry.lam, entry.beta, design, obj.get("selection", "fixed"))


def save_fits(path, fits, labels=None) -> None:
    payload = {"labels": list(labels) if labels is not None else None,
               "fits": [fit_to_dict(f) for f in fits]}
    atomic_write(path, json.dumps(payload) + "\n")


def load_fits(path):
    """Returns ``(fits, labels)``."""
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    return [fit_from_dict(f) for f in payload["fits"]], payload.get("labels")
