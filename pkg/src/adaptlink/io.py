"""Table ingestion, trace serialization, and dendrogram export.

File formats (all UTF-8, byte-deterministic for a given input):

* table: comma-separated, mandatory header, first column = label, remaining
  columns = finite reals;
* trace document: canonical JSON (sorted keys, two-space indent, trailing
  newline) holding run metadata plus one entry per depth — cut-off at full
  precision alongside its two-decimal display, groups as sorted label arrays;
* DOT: one node per leaf (its label), one node per merge ("depth:cutoff"),
  edges parent -> child, deterministic ordering;
* tree-text: indented outline of the same tree.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

from .adaptive import DepthRecord, TreeNode, format_cutoff
from .core import ClusteringError, Dataset

FIXTURES = ("para", "meta")


class ParseError(ClusteringError):
    """A table cell or row could not be parsed."""

    def __init__(self, row: int, column: int | None, reason: str):
        self.row = row
        self.column = column
        at = f"row {row}" + (f", column {column}" if column is not None else "")
        super().__init__(f"{at}: {reason}")


class SchemaError(ClusteringError):
    """A trace document does not match the expected schema."""


def parse_table(text: str) -> Dataset:
    """Parse a delimited table (header; label column + numeric descriptors)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError(0, None, "empty input")
    header = [c.strip() for c in lines[0].split(",")]
    if len(header) < 2:
        raise ParseError(1, None, "header needs a label column and at least one descriptor")
    width = len(header)
    labels: list[str] = []
    rows: list[list[float]] = []
    seen: dict[str, int] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != width:
            raise ParseError(lineno, None, f"expected {width} cells, got {len(cells)}")
        label = cells[0]
        if not label:
            raise ParseError(lineno, 1, "empty label")
        if label in seen:
            raise ParseError(lineno, 1, f"duplicate label {label!r} (first at row {seen[label]})")
        seen[label] = lineno
        values = []
        for col, cell in enumerate(cells[1:], start=2):
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(lineno, col, f"not a number: {cell!r}") from None
            if not math.isfinite(v):
                raise ParseError(lineno, col, f"non-finite value: {cell!r}")
            values.append(v)
        labels.append(label)
        rows.append(values)
    if not rows:
        raise ParseError(1, None, "no data rows")
    return Dataset(labels=tuple(labels), values=rows, column_names=tuple(header[1:]))


def format_table(data: Dataset, label_column: str = "label") -> str:
    """Canonical serialization; parse_table(format_table(d)) preserves labels/values."""
    lines = [",".join((label_column, *data.column_names))]
    for i, lab in enumerate(data.labels):
        lines.append(",".join((lab, *(repr(float(v)) for v in data.values[i]))))
    return "\n".join(lines) + "\n"


def load_fixture(name: str) -> Dataset:
    """Bundled 25-substituent descriptor table ('para' or 'meta')."""
    if name not in FIXTURES:
        raise ValueError(f"unknown fixture {name!r}; expected one of {FIXTURES}")
    text = (
        resources.files("adaptlink")
        .joinpath("data", f"substituents_{name}.csv")
        .read_text(encoding="utf-8")
    )
    return parse_table(text)


@dataclass(frozen=True)
class TraceDocument:
    """Parsed trace file: run metadata plus the per-depth records."""

    metadata: dict
    records: tuple[DepthRecord, ...]


def _records_payload(records) -> list[dict]:
    return [
        {
            "depth": rec.depth,
            "cutoff": rec.cutoff,
            "cutoff_display": rec.display,
            "groups": [sorted(g) for g in rec.groups],
        }
        for rec in records
    ]


def serialize_trace(doc: TraceDocument) -> str:
    payload = {
        "format": "adaptlink-trace",
        "version": 1,
        "metadata": doc.metadata,
        "trace": _records_payload(doc.records),
    }
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_trace(d) -> str:
    """Serialize a dendrogram's trace (adaptive or stepwise) to document text."""
    return serialize_trace(TraceDocument(metadata=dict(d.meta), records=tuple(d.trace)))


def read_trace(text: str) -> TraceDocument:
    """Parse a trace document; raises SchemaError on anything malformed."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"not valid JSON: {e}") from None
    if not isinstance(payload, dict) or payload.get("format") != "adaptlink-trace":
        raise SchemaError("missing adaptlink-trace format marker")
    if payload.get("version") != 1:
        raise SchemaError(f"unsupported version {payload.get('version')!r}")
    meta = payload.get("metadata")
    entries = payload.get("trace")
    if not isinstance(meta, dict) or not isinstance(entries, list):
        raise SchemaError("metadata/trace sections missing or mistyped")
    records = []
    for k, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise SchemaError(f"trace entry {k} is not an object")
        try:
            depth = entry["depth"]
            cutoff = entry["cutoff"]
            display = entry["cutoff_display"]
            groups = entry["groups"]
        except KeyError as e:
            raise SchemaError(f"trace entry {k} lacks key {e}") from None
        if (
            not isinstance(depth, int)
            or not isinstance(cutoff, (int, float))
            or not isinstance(display, str)
            or not isinstance(groups, list)
            or not all(
                isinstance(g, list) and g and all(isinstance(x, str) for x in g)
                for g in groups
            )
        ):
            raise SchemaError(f"trace entry {k} is mistyped")
        records.append(
            DepthRecord(
                depth=depth,
                cutoff=float(cutoff),
                display=display,
                groups=tuple(frozenset(g) for g in groups),
            )
        )
    return TraceDocument(metadata=meta, records=tuple(records))


def _roots(d) -> tuple[TreeNode, ...]:
    roots = getattr(d, "roots", None)
    return roots if roots is not None else (d.root,)


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def write_dot(d) -> str:
    """DOT digraph of the dendrogram (or forest), parent -> child edges."""
    lines = ["digraph dendrogram {", "  node [shape=box];"]
    edges: list[str] = []
    counter = 0

    def visit(node: TreeNode) -> str:
        nonlocal counter
        name = f"n{counter}"
        counter += 1
        if node.is_leaf:
            lines.append(f'  {name} [label="{_dot_escape(node.label)}"];')
        else:
            lines.append(f'  {name} [label="{node.depth}:{format_cutoff(node.cutoff)}"];')
        child_names = [visit(child) for child in node.children]
        for child_name in child_names:
            edges.append(f"  {name} -> {child_name};")
        return name

    for root in _roots(d):
        visit(root)
    lines.extend(edges)
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_tree_text(d) -> str:
    """Indented text outline of the dendrogram (or forest)."""
    lines: list[str] = []

    def visit(node: TreeNode, indent: int):
        pad = "  " * indent
        if node.is_leaf:
            lines.append(f"{pad}{node.label}")
        else:
            lines.append(
                f"{pad}[depth {node.depth}, cutoff {format_cutoff(node.cutoff)}]"
            )
            for child in node.children:
                visit(child, indent + 1)

    for root in _roots(d):
        visit(root, 0)
    return "\n".join(lines) + "\n"
