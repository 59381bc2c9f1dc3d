"""Labeling, plain-text decoding, and file import/export of designs.

A coded design matrix is hard to read; this module attaches attribute and
level names, decodes rows back into human-readable choice sets, and
round-trips designs through CSV (matrix only) and JSON (full artifact
with labels and metadata).
"""

from __future__ import annotations

import dataclasses
import io
import json
from dataclasses import dataclass

import numpy as np

from .core import CodedDesign
from .errors import CorruptDesignError, InvalidInputError, SchemaError

SCHEMA_VERSION = 1
DEFAULT_OPT_OUT_LABEL = "Opt-out"


@dataclass
class LabeledDesign:
    coded: CodedDesign
    attribute_names: list[str]
    level_names: list[list[str]]  # per attribute, base level first

    @property
    def n_attributes(self) -> int:
        return len(self.attribute_names)


@dataclass
class DecodedChoiceSet:
    set_index: int
    # (alternative label, [(attribute name, level name), ...]); the opt-out
    # entry carries an empty attribute list
    alternatives: list[tuple[str, list[tuple[str, str]]]]


def label_design(coded: CodedDesign, attribute_names: list[str],
                 level_names: list[list[str]]) -> LabeledDesign:
    """Attach names to a coded design; the coded content is unchanged.

    ``level_names[a]`` must list all levels of attribute ``a`` including
    the base level first.
    """
    counts = coded.levels_per_attribute
    if len(attribute_names) != len(counts):
        raise InvalidInputError(
            f"{len(attribute_names)} attribute names given but the design "
            f"has {len(counts)} attributes"
        )
    if len(level_names) != len(counts):
        raise InvalidInputError(
            f"{len(level_names)} level-name lists given but the design "
            f"has {len(counts)} attributes"
        )
    for a, (name, names, count) in enumerate(zip(attribute_names, level_names, counts)):
        if not name:
            raise InvalidInputError(f"attribute {a + 1} has an empty name")
        if len(names) != count:
            raise InvalidInputError(
                f"attribute '{name}' has {count} levels but {len(names)} "
                f"level names were given"
            )
        if any(not n for n in names):
            raise InvalidInputError(f"attribute '{name}' has an empty level name")
    columns = [
        f"{attribute_names[a]}.{level}"
        for a in range(len(counts))
        for level in level_names[a][1:]
    ]
    coded = dataclasses.replace(coded, column_names=columns)
    return LabeledDesign(
        coded=coded,
        attribute_names=list(attribute_names),
        level_names=[list(n) for n in level_names],
    )


def label_from_settings(coded: CodedDesign, settings) -> LabeledDesign:
    """Label a design with the names already carried by its settings."""
    return label_design(
        coded,
        [a.name for a in settings.attributes],
        [list(a.levels) for a in settings.attributes],
    )


def decode_design(labeled: LabeledDesign, alternative_labels: list[str] | None = None,
                  opt_out_label: str = DEFAULT_OPT_OUT_LABEL) -> list[DecodedChoiceSet]:
    """Map every coded row back to attribute/level names, set by set.

    All-zero attribute blocks decode to the base level; opt-out rows
    decode to the opt-out label with no attribute list.

    Raises:
        CorruptDesignError: a row is not a valid dummy coding.
    """
    coded = labeled.coded
    slices = coded.attribute_column_slices()
    if alternative_labels is None:
        alternative_labels = [f"Option {j}" for j in range(1, coded.n_coded_alts + 1)]
        if coded.opt_out:
            alternative_labels.append(opt_out_label)
    if len(alternative_labels) != coded.alts_per_set:
        raise InvalidInputError(
            f"{len(alternative_labels)} alternative labels for "
            f"{coded.alts_per_set} alternatives per set"
        )
    out = []
    for s in range(1, coded.n_sets + 1):
        rows = coded.rows_for_set(s)
        alternatives = []
        for j, row in enumerate(rows, start=1):
            if coded.opt_out and j == coded.alts_per_set:
                if np.any(row != 0):
                    raise CorruptDesignError(
                        f"set {s}: opt-out row has non-zero coded values"
                    )
                alternatives.append((alternative_labels[j - 1], []))
                continue
            pairs = []
            for a, sl in enumerate(slices):
                block = row[sl]
                if not np.all(np.isin(block, (0.0, 1.0))):
                    raise CorruptDesignError(
                        f"set {s}, alternative {j}: non-binary coding for "
                        f"attribute '{labeled.attribute_names[a]}'"
                    )
                ones = np.flatnonzero(block == 1.0)
                if len(ones) > 1:
                    raise CorruptDesignError(
                        f"set {s}, alternative {j}: multiple levels coded for "
                        f"attribute '{labeled.attribute_names[a]}'"
                    )
                level_idx = int(ones[0]) + 1 if len(ones) == 1 else 0
                pairs.append(
                    (labeled.attribute_names[a], labeled.level_names[a][level_idx])
                )
            alternatives.append((alternative_labels[j - 1], pairs))
        out.append(DecodedChoiceSet(set_index=s, alternatives=alternatives))
    return out


def decoded_to_text(sets: list[DecodedChoiceSet]) -> str:
    """Plain-text rendering of decoded choice sets, one block per set."""
    lines = []
    for cs in sets:
        lines.append(f"Choice set {cs.set_index}")
        for label, pairs in cs.alternatives:
            if pairs:
                body = "; ".join(f"{attr}: {level}" for attr, level in pairs)
                lines.append(f"  {label}: {body}")
            else:
                lines.append(f"  {label}")
        lines.append("")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Export / import
# ---------------------------------------------------------------------------

def _format_value(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def export_design(labeled: LabeledDesign, format: str,
                  metadata: dict | None = None) -> bytes:
    """Serialize a labeled design.

    CSV carries the matrix only (header ``set,alt,<coded columns>``); JSON
    carries the full artifact: labels, structure, rows, and optional
    optimizer metadata, under ``schema_version`` 1.
    """
    coded = labeled.coded
    if format == "csv":
        buf = io.StringIO()
        buf.write(",".join(["set", "alt"] + list(coded.column_names)) + "\n")
        for i in range(len(coded.matrix)):
            cells = [str(int(coded.set_index[i])), str(int(coded.alt_index[i]))]
            cells += [_format_value(v) for v in coded.matrix[i]]
            buf.write(",".join(cells) + "\n")
        return buf.getvalue().encode("utf-8")
    if format == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "attribute_names": labeled.attribute_names,
            "level_names": labeled.level_names,
            "design": {
                "n_sets": coded.n_sets,
                "alts_per_set": coded.alts_per_set,
                "opt_out": coded.opt_out,
                "levels_per_attribute": list(coded.levels_per_attribute),
                "column_names": list(coded.column_names),
                "rows": [
                    {
                        "set": int(coded.set_index[i]),
                        "alt": int(coded.alt_index[i]),
                        "x": [float(v) for v in coded.matrix[i]],
                    }
                    for i in range(len(coded.matrix))
                ],
            },
        }
        if metadata:
            doc["metadata"] = metadata
        return json.dumps(doc, indent=2).encode("utf-8")
    raise InvalidInputError(f"unknown export format '{format}' (use csv or json)")


def import_design(data: bytes | str, format: str,
                  opt_out: bool | None = None) -> LabeledDesign:
    """Parse an exported design, validating all coded-design invariants.

    CSV files carry no base-level names, so imported base levels are named
    ``"base"``; JSON restores the design exactly. For CSV, ``opt_out``
    may be forced; when omitted it is inferred (opt-out present iff the
    last alternative of every set is all-zero).
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    if format == "csv":
        return _import_csv(data, opt_out)
    if format == "json":
        return _import_json(data)
    raise InvalidInputError(f"unknown import format '{format}' (use csv or json)")


def _check_or_raise(coded: CodedDesign) -> None:
    problems = coded.check()
    if problems:
        raise InvalidInputError("imported design is invalid: " + "; ".join(problems))


def _import_json(text: str) -> LabeledDesign:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "schema_version" not in doc:
        raise SchemaError("missing schema_version field")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise SchemaError(
            f"unsupported schema_version {doc['schema_version']!r} "
            f"(this build reads version {SCHEMA_VERSION})"
        )
    try:
        d = doc["design"]
        rows = d["rows"]
        coded = CodedDesign(
            column_names=list(d["column_names"]),
            levels_per_attribute=[int(v) for v in d["levels_per_attribute"]],
            matrix=np.array([r["x"] for r in rows], dtype=float),
            set_index=np.array([r["set"] for r in rows], dtype=int),
            alt_index=np.array([r["alt"] for r in rows], dtype=int),
            n_sets=int(d["n_sets"]),
            alts_per_set=int(d["alts_per_set"]),
            opt_out=bool(d["opt_out"]),
        )
        attribute_names = list(doc["attribute_names"])
        level_names = [list(n) for n in doc["level_names"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed design document: {exc}") from exc
    _check_or_raise(coded)
    return LabeledDesign(coded=coded, attribute_names=attribute_names,
                         level_names=level_names)


def _parse_columns(names: list[str]) -> tuple[list[str], list[list[str]]]:
    """Group ``attr.level`` column names into attributes with level lists."""
    attribute_names: list[str] = []
    level_names: list[list[str]] = []
    for name in names:
        if "." not in name:
            raise SchemaError(
                f"column '{name}' is not of the form attribute.level"
            )
        attr, level = name.split(".", 1)
        if not attribute_names or attribute_names[-1] != attr:
            if attr in attribute_names:
                raise SchemaError(
                    f"columns of attribute '{attr}' are not contiguous"
                )
            attribute_names.append(attr)
            level_names.append(["base"])
        level_names[-1].append(level)
    return attribute_names, level_names


def _import_csv(text: str, opt_out: bool | None) -> LabeledDesign:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise SchemaError("empty CSV file")
    header = lines[0].split(",")
    if header[:2] != ["set", "alt"] or len(header) < 3:
        raise SchemaError("CSV header must start with set,alt followed by coded columns")
    column_names = header[2:]
    attribute_names, level_names = _parse_columns(column_names)
    set_idx, alt_idx, rows = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != len(header):
            raise SchemaError(
                f"line {lineno}: expected {len(header)} fields, got {len(cells)}"
            )
        try:
            set_idx.append(int(cells[0]))
            alt_idx.append(int(cells[1]))
            rows.append([float(c) for c in cells[2:]])
        except ValueError as exc:
            raise SchemaError(f"line {lineno}: {exc}") from exc
    if not rows:
        raise SchemaError("CSV contains no data rows")
    set_arr = np.array(set_idx)
    alt_arr = np.array(alt_idx)
    matrix = np.array(rows)
    seen = set()
    for lineno, pair in enumerate(zip(set_idx, alt_idx), start=2):
        if pair in seen:
            raise InvalidInputError(
                f"line {lineno}: duplicate (set, alt) pair {pair}"
            )
        seen.add(pair)
    n_sets = int(set_arr.max())
    alts_per_set = int(alt_arr.max())
    if opt_out is None:
        last_rows = matrix[alt_arr == alts_per_set]
        opt_out = len(last_rows) == n_sets and bool(np.all(last_rows == 0))
    coded = CodedDesign(
        column_names=column_names,
        levels_per_attribute=[len(n) for n in level_names],
        matrix=matrix,
        set_index=set_arr,
        alt_index=alt_arr,
        n_sets=n_sets,
        alts_per_set=alts_per_set,
        opt_out=opt_out,
    )
    _check_or_raise(coded)
    return LabeledDesign(coded=coded, attribute_names=attribute_names,
                         level_names=level_names)
