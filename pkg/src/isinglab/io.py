"""File formats: graphs, observations, coefficient files, user-item
data, and result records.

Loaders validate and reject; they never repair.  Parse errors carry the
file path and line number.  Writers use ``repr`` for floats so a report
written twice from the same seed is byte-identical and survives a
round-trip parse exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .model import IsingModel
from .stats import MultilinearFn, distance_pairs

__all__ = [
    "load_graph",
    "save_graph",
    "load_observation",
    "save_configs",
    "load_coefficients",
    "BipartiteDataset",
    "ItemIndicator",
    "load_bipartite",
    "item_vector",
    "write_report",
    "parse_report",
    "write_csv",
    "LISTEN_CAP",
]

LISTEN_CAP = 50


class ParseError(ValueError):
    """Malformed input file; message carries path and line number."""


def _fail(path: Path, lineno: int, msg: str) -> None:
    raise ParseError(f"{path}:{lineno}: {msg}")


def _content_lines(path: str | Path) -> list[tuple[int, str]]:
    path = Path(path)
    out = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((lineno, line))
    return out


# ---------------------------------------------------------------------------
# Graph files

def load_graph(path: str | Path) -> IsingModel:
    """Read a model from the edge-list or grid text format.

    Edge-list format: a header ``n <node_count>``, then lines
    ``u v theta`` (0-indexed) and optional ``field v h`` lines.  Grid
    shorthand: a single line ``grid <width> <height> <theta> [h]`` for
    the 4-neighbour lattice.  ``#`` starts a comment.
    """
    path = Path(path)
    lines = _content_lines(path)
    if not lines:
        raise ParseError(f"{path}: empty model file")

    first_no, first = lines[0]
    head = first.split()
    if head[0] == "grid":
        if len(lines) > 1:
            _fail(path, lines[1][0], "grid shorthand must be the only line")
        if len(head) not in (4, 5):
            _fail(path, first_no, "expected: grid <width> <height> <theta> [h]")
        try:
            w, h = int(head[1]), int(head[2])
            theta = float(head[3])
            field = float(head[4]) if len(head) == 5 else 0.0
        except ValueError:
            _fail(path, first_no, f"cannot parse grid line {first!r}")
        return IsingModel.grid(w, h, theta, field)

    if head[0] != "n" or len(head) != 2:
        _fail(path, first_no, "model file must start with 'n <node_count>' or 'grid ...'")
    try:
        n = int(head[1])
    except ValueError:
        _fail(path, first_no, f"node count {head[1]!r} is not an integer")

    edges: list[tuple[int, int, float]] = []
    edge_lines: dict[tuple[int, int], int] = {}
    field = np.zeros(n, dtype=np.float64)
    field_lines: dict[int, int] = {}
    for lineno, line in lines[1:]:
        parts = line.split()
        if parts[0] == "field":
            if len(parts) != 3:
                _fail(path, lineno, "expected: field <node> <h>")
            try:
                v, hval = int(parts[1]), float(parts[2])
            except ValueError:
                _fail(path, lineno, f"cannot parse field line {line!r}")
            if not (0 <= v < n):
                _fail(path, lineno, f"field node {v} outside 0..{n - 1}")
            if v in field_lines:
                _fail(
                    path,
                    lineno,
                    f"field for node {v} already given on line {field_lines[v]}",
                )
            field_lines[v] = lineno
            field[v] = hval
            continue
        if len(parts) != 3:
            _fail(path, lineno, "expected: <u> <v> <theta>")
        try:
            u, v, theta = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            _fail(path, lineno, f"cannot parse edge line {line!r}")
        if u == v:
            _fail(path, lineno, f"self-loop on node {u}")
        if not (0 <= u < n and 0 <= v < n):
            _fail(path, lineno, f"edge ({u},{v}) outside 0..{n - 1}")
        key = (min(u, v), max(u, v))
        if key in edge_lines:
            _fail(
                path,
                lineno,
                f"edge {key} already given on line {edge_lines[key]}",
            )
        edge_lines[key] = lineno
        edges.append((u, v, theta))
    return IsingModel(n, edges, field)


def save_graph(model: IsingModel, path: str | Path) -> None:
    """Write a model in the edge-list format; loading it back gives an
    equal model."""
    out = [f"n {model.n}"]
    for u, v, w in zip(model.edge_u, model.edge_v, model.edge_weight):
        out.append(f"{int(u)} {int(v)} {float(w)!r}")
    for v in np.nonzero(model.field)[0]:
        out.append(f"field {int(v)} {float(model.field[v])!r}")
    Path(path).write_text("\n".join(out) + "\n")


# ---------------------------------------------------------------------------
# Observations

def _parse_config_token_line(path: Path, lineno: int, line: str) -> np.ndarray:
    parts = line.split()
    if len(parts) > 1 or parts[0].lstrip("+-").isdigit():
        vals = []
        for tok in parts:
            if tok in ("+1", "1", "+"):
                vals.append(1)
            elif tok in ("-1", "-"):
                vals.append(-1)
            else:
                _fail(path, lineno, f"spin token {tok!r} is not +1 or -1")
        return np.array(vals, dtype=np.int8)
    vals = []
    for ch in parts[0]:
        if ch == "+":
            vals.append(1)
        elif ch == "-":
            vals.append(-1)
        else:
            _fail(path, lineno, f"spin character {ch!r} is not '+' or '-'")
    return np.array(vals, dtype=np.int8)


def load_observation(path: str | Path, n: int | None = None) -> np.ndarray:
    """Read one configuration: either a compact ``+-...`` string or
    whitespace-separated ±1 integers, on the first content line."""
    path = Path(path)
    lines = _content_lines(path)
    if not lines:
        raise ParseError(f"{path}: empty observation file")
    lineno, line = lines[0]
    x = _parse_config_token_line(path, lineno, line)
    if n is not None and x.shape != (n,):
        _fail(path, lineno, f"expected {n} spins, found {x.shape[0]}")
    return x


def save_configs(configs: np.ndarray, path: str | Path) -> None:
    """Write configurations one per line as compact ``+-`` strings."""
    X = np.atleast_2d(np.asarray(configs))
    rows = ["".join("+" if s > 0 else "-" for s in row) for row in X]
    Path(path).write_text("\n".join(rows) + "\n")


# ---------------------------------------------------------------------------
# Coefficient files

def load_coefficients(path: str | Path, model: IsingModel) -> MultilinearFn:
    """Read a multilinear statistic definition.

    Lines: ``S: u_1 u_2 ... u_k = a`` for a single term on distinct
    nodes; ``all-pairs <value>`` for that coefficient on every unordered
    node pair; ``distance <k> <value>`` for every unordered pair within
    graph distance k of the model's graph.
    """
    path = Path(path)
    coeffs: dict[tuple[int, ...], float] = {}

    def put(lineno: int, key: tuple[int, ...], a: float) -> None:
        if key in coeffs:
            _fail(path, lineno, f"coefficient for subset {key} already given")
        coeffs[key] = a

    lines = _content_lines(path)
    if not lines:
        raise ParseError(f"{path}: empty coefficient file")
    for lineno, line in lines:
        parts = line.split()
        if parts[0] == "all-pairs":
            if len(parts) != 2:
                _fail(path, lineno, "expected: all-pairs <value>")
            value = _parse_float(path, lineno, parts[1])
            for u in range(model.n):
                for v in range(u + 1, model.n):
                    put(lineno, (u, v), value)
        elif parts[0] == "distance":
            if len(parts) != 3:
                _fail(path, lineno, "expected: distance <k> <value>")
            try:
                k = int(parts[1])
            except ValueError:
                _fail(path, lineno, f"distance cutoff {parts[1]!r} is not an integer")
            value = _parse_float(path, lineno, parts[2])
            for u, v in distance_pairs(model, k):
                put(lineno, (int(u), int(v)), value)
        elif parts[0] == "S:":
            if "=" not in parts:
                _fail(path, lineno, "expected: S: u_1 ... u_k = a")
            eq = parts.index("=")
            if eq == 1 or eq != len(parts) - 2:
                _fail(path, lineno, "expected: S: u_1 ... u_k = a")
            try:
                subset = tuple(int(t) for t in parts[1:eq])
            except ValueError:
                _fail(path, lineno, f"subset indices must be integers: {line!r}")
            if list(subset) != sorted(set(subset)):
                _fail(path, lineno, "subset indices must be distinct and sorted")
            value = _parse_float(path, lineno, parts[eq + 1])
            put(lineno, subset, value)
        else:
            _fail(path, lineno, f"unrecognised coefficient line {line!r}")
    try:
        return MultilinearFn(model.n, coeffs)
    except (ValueError, IndexError) as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _parse_float(path: Path, lineno: int, tok: str) -> float:
    try:
        return float(tok)
    except ValueError:
        _fail(path, lineno, f"{tok!r} is not a number")


# ---------------------------------------------------------------------------
# User-item data

@dataclass(frozen=True)
class BipartiteDataset:
    """A social graph plus per-user item lists.

    ``listens[u]`` holds at most ``LISTEN_CAP`` item ids (the top rows
    by weight, ties broken by item id).  ``item_index`` maps item names
    to ids when a names file was supplied.  ``truncated_users`` counts
    users whose lists were cut at the cap.
    """

    user_count: int
    user_edges: np.ndarray
    listens: tuple[tuple[int, ...], ...]
    item_index: Mapping[str, int]
    truncated_users: int

    @property
    def average_degree(self) -> float:
        return 2.0 * self.user_edges.shape[0] / self.user_count


@dataclass(frozen=True)
class ItemIndicator:
    """±1 vector over users: +1 where the item is in the user's list."""

    item: int
    vector: np.ndarray

    @property
    def favorite_count(self) -> int:
        return int(np.count_nonzero(self.vector == 1))


def _split_row(line: str) -> list[str]:
    return line.replace(",", "\t").split()


def load_bipartite(
    social_path: str | Path,
    listens_path: str | Path,
    names_path: str | Path | None = None,
) -> BipartiteDataset:
    """Load a user-user edge file and a user-item-weight file.

    Expected layouts (tab or comma separated, one optional header row):
    the social file has two user-id columns, the listens file has user
    id, item id, weight.  User ids are re-indexed densely in ascending
    original order; edges are deduplicated; per-user lists keep the
    top-``LISTEN_CAP`` items by weight.  ``names_path``, if given, maps
    item ids to names (id and name in the first two columns).
    """
    social_path, listens_path = Path(social_path), Path(listens_path)
    raw_edges: set[tuple[int, int]] = set()
    users: set[int] = set()
    for lineno, line in _data_rows(social_path):
        parts = _split_row(line)
        if len(parts) < 2:
            _fail(social_path, lineno, f"expected two user ids, got {line!r}")
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            _fail(social_path, lineno, f"non-integer user id in {line!r}")
        if a == b:
            _fail(social_path, lineno, f"self-friendship for user {a}")
        users.update((a, b))
        raw_edges.add((min(a, b), max(a, b)))

    per_user: dict[int, dict[int, float]] = {}
    for lineno, line in _data_rows(listens_path):
        parts = _split_row(line)
        if len(parts) < 3:
            _fail(listens_path, lineno, f"expected user, item, weight, got {line!r}")
        try:
            u, item, weight = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            _fail(listens_path, lineno, f"cannot parse row {line!r}")
        users.add(u)
        best = per_user.setdefault(u, {})
        # repeated (user, item) rows keep the heaviest weight
        if item not in best or weight > best[item]:
            best[item] = weight

    index = {orig: new for new, orig in enumerate(sorted(users))}
    edges = np.array(
        sorted((index[a], index[b]) for a, b in raw_edges), dtype=np.int64
    ).reshape(len(raw_edges), 2)

    listens: list[tuple[int, ...]] = []
    truncated = 0
    for orig in sorted(users):
        best = per_user.get(orig, {})
        ranked = sorted(best.items(), key=lambda kv: (-kv[1], kv[0]))
        if len(ranked) > LISTEN_CAP:
            truncated += 1
            ranked = ranked[:LISTEN_CAP]
        listens.append(tuple(sorted(item for item, _ in ranked)))

    item_index: dict[str, int] = {}
    if names_path is not None:
        names_path = Path(names_path)
        for lineno, line in _data_rows(names_path):
            parts = line.split("\t") if "\t" in line else line.split(",")
            if len(parts) < 2:
                _fail(names_path, lineno, f"expected id and name, got {line!r}")
            try:
                item = int(parts[0])
            except ValueError:
                _fail(names_path, lineno, f"non-integer item id in {line!r}")
            item_index[parts[1].strip()] = item

    edges.flags.writeable = False
    return BipartiteDataset(
        user_count=len(users),
        user_edges=edges,
        listens=tuple(listens),
        item_index=item_index,
        truncated_users=truncated,
    )


def _data_rows(path: Path) -> list[tuple[int, str]]:
    """Non-empty rows with the header skipped when its first field is
    not numeric."""
    rows = []
    for lineno, raw in enumerate(
        path.read_text(encoding="utf-8", errors="replace").splitlines(), start=1
    ):
        line = raw.strip()
        if not line:
            continue
        if lineno == 1:
            first = _split_row(line)[0] if _split_row(line) else ""
            try:
                int(first)
            except ValueError:
                continue
        rows.append((lineno, line))
    return rows


def item_vector(ds: BipartiteDataset, item: int | str) -> ItemIndicator:
    """±1 indicator over users for one item (by id, or by name when the
    dataset carries a name index)."""
    if isinstance(item, str):
        if item not in ds.item_index:
            raise KeyError(f"unknown item name {item!r}")
        item = ds.item_index[item]
    vec = np.full(ds.user_count, -1, dtype=np.int8)
    for u, items in enumerate(ds.listens):
        if item in items:
            vec[u] = 1
    vec.flags.writeable = False
    return ItemIndicator(item=int(item), vector=vec)


# ---------------------------------------------------------------------------
# Result records

def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return ""
    if isinstance(value, (list, tuple, np.ndarray)):
        return ",".join(_format_value(v) for v in np.asarray(value).tolist())
    return str(value)


def write_report(records: Sequence[Mapping[str, object]], path: str | Path) -> None:
    """Write records as blocks of ``key=value`` lines separated by
    blank lines.  Field order follows each record's insertion order."""
    blocks = []
    for rec in records:
        blocks.append("\n".join(f"{k}={_format_value(v)}" for k, v in rec.items()))
    Path(path).write_text("\n\n".join(blocks) + "\n")


def parse_report(path: str | Path) -> list[dict[str, str]]:
    """Inverse of write_report at the text level: records of raw string
    values."""
    text = Path(path).read_text()
    records = []
    for block in text.split("\n\n"):
        rec: dict[str, str] = {}
        for line in block.splitlines():
            if not line.strip():
                continue
            if "=" not in line:
                raise ParseError(f"{path}: malformed record line {line!r}")
            key, value = line.split("=", 1)
            rec[key] = value
        if rec:
            records.append(rec)
    return records


def write_csv(
    path: str | Path, header: Sequence[str], rows: Iterable[Sequence[object]]
) -> None:
    """CSV with a fixed header; floats via repr for reproducibility."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_value(v) for v in row])
