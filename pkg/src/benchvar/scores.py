"""Benchmark score bookkeeping.

A score is one number produced by one training run, annotated with the
seeds that pinned each source of variation for that run.  Keeping the
seeds next to the value is what later makes exact pairing and
per-source variance attribution possible; everything downstream
consumes these types.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .rng import RngStream

__all__ = [
    "VarianceSource",
    "ScoreRecord",
    "ScoreSet",
    "PairedScores",
    "ScoreParseError",
    "PairingError",
    "load_scores",
    "dump_scores",
    "scores_from_records",
    "pair_scores",
    "validate",
]

_MAX_SEED = (1 << 64) - 1


class VarianceSource(enum.Enum):
    """Controllable sources of variation in a training pipeline."""

    DATA_SPLIT = "data_split"
    DATA_ORDER = "data_order"
    DATA_AUGMENT = "data_augment"
    WEIGHTS_INIT = "weights_init"
    DROPOUT = "dropout"
    HOPT = "hopt"
    NUMERICAL = "numerical"

    @classmethod
    def parse(cls, name: str) -> "VarianceSource":
        key = name.strip().lower()
        aliases = {
            "data": cls.DATA_SPLIT,
            "split": cls.DATA_SPLIT,
            "order": cls.DATA_ORDER,
            "augment": cls.DATA_AUGMENT,
            "init": cls.WEIGHTS_INIT,
            "weights": cls.WEIGHTS_INIT,
        }
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            allowed = ", ".join(s.value for s in cls)
            raise ValueError(f"unknown variance source {name!r}; expected one of: {allowed}") from None


class ScoreParseError(ValueError):
    """A score file failed validation; the message names the row."""


class PairingError(ValueError):
    """Two score groups could not be joined into pairs."""


@dataclass(frozen=True)
class ScoreRecord:
    task: str
    algorithm: str
    replicate_id: int
    seeds: Mapping[VarianceSource, int]
    metric_name: str
    value: float

    def __post_init__(self) -> None:
        if self.replicate_id < 1:
            raise ValueError(f"replicate_id must be >= 1, got {self.replicate_id}")
        if not isinstance(self.value, float):
            object.__setattr__(self, "value", float(self.value))
        if not math.isfinite(self.value):
            raise ValueError(f"score value must be finite, got {self.value!r}")
        seeds = dict(self.seeds)
        for source, seed in seeds.items():
            if not isinstance(source, VarianceSource):
                raise TypeError(f"seed keys must be VarianceSource, got {source!r}")
            if not 0 <= int(seed) <= _MAX_SEED:
                raise ValueError(f"seed for {source.value} out of 64-bit range: {seed}")
        object.__setattr__(self, "seeds", seeds)


@dataclass(frozen=True)
class ScoreSet:
    """An immutable collection of score records sharing one metric.

    ``declared_sources`` lists the variation sources this experiment
    claims to control; records may then be audited against it with
    :func:`validate`.  ``higher_is_better`` fixes the metric polarity
    for every comparison built from this set.
    """

    records: Tuple[ScoreRecord, ...]
    declared_sources: frozenset
    higher_is_better: bool = True

    def __post_init__(self) -> None:
        records = tuple(self.records)
        object.__setattr__(self, "records", records)
        object.__setattr__(self, "declared_sources", frozenset(self.declared_sources))
        if not records:
            raise ValueError("a ScoreSet needs at least one record")
        metric = records[0].metric_name
        seen: Dict[Tuple[str, str], set] = {}
        for rec in records:
            if rec.metric_name != metric:
                raise ValueError(
                    f"mixed metrics in one ScoreSet: {metric!r} and {rec.metric_name!r}"
                )
            ids = seen.setdefault((rec.task, rec.algorithm), set())
            if rec.replicate_id in ids:
                raise ValueError(
                    f"duplicate replicate_id {rec.replicate_id} for "
                    f"task={rec.task!r} algorithm={rec.algorithm!r}"
                )
            ids.add(rec.replicate_id)

    @property
    def metric_name(self) -> str:
        return self.records[0].metric_name

    def groups(self) -> Dict[Tuple[str, str], Tuple[ScoreRecord, ...]]:
        out: Dict[Tuple[str, str], List[ScoreRecord]] = {}
        for rec in self.records:
            out.setdefault((rec.task, rec.algorithm), []).append(rec)
        return {k: tuple(v) for k, v in out.items()}

    def select(self, task: Optional[str] = None, algorithm: Optional[str] = None) -> List[ScoreRecord]:
        return [
            r
            for r in self.records
            if (task is None or r.task == task) and (algorithm is None or r.algorithm == algorithm)
        ]

    def tasks(self) -> List[str]:
        seen = dict.fromkeys(r.task for r in self.records)
        return list(seen)

    def to_records(self) -> dict:
        return {
            "metric": self.metric_name,
            "higher_is_better": self.higher_is_better,
            "declared_sources": sorted(s.value for s in self.declared_sources),
            "records": [
                {
                    "task": r.task,
                    "algorithm": r.algorithm,
                    "replicate": r.replicate_id,
                    "value": r.value,
                    "seeds": {s.value: int(v) for s, v in sorted(r.seeds.items(), key=lambda kv: kv[0].value)},
                }
                for r in self.records
            ],
        }


@dataclass(frozen=True)
class PairedScores:
    """Replicate-level pairs of scores for two algorithms on one task.

    ``keys`` records what joined each pair: the shared seed tuple when
    pairing was done on seeds, otherwise the replicate id.
    """

    pairs: Tuple[Tuple[float, float], ...]
    keys: Tuple[Tuple, ...]
    pair_on: Tuple[VarianceSource, ...]
    metric_name: str
    higher_is_better: bool = True

    def __post_init__(self) -> None:
        if len(self.pairs) != len(self.keys):
            raise ValueError("pairs and keys must align")

    def __len__(self) -> int:
        return len(self.pairs)


_FIXED_COLUMNS = ("task", "algorithm", "replicate", "metric", "value")
_SEED_PREFIX = "seed_"


def _parse_row(
    row: Dict[str, str],
    rownum: int,
    seed_columns: Sequence[Tuple[str, VarianceSource]],
    default_metric: str,
) -> ScoreRecord:
    def fail(msg: str) -> ScoreParseError:
        return ScoreParseError(f"row {rownum}: {msg}")

    for col in ("task", "algorithm", "replicate", "value"):
        if row.get(col) is None or row[col] == "":
            raise fail(f"missing {col!r}")
    try:
        replicate = int(row["replicate"])
    except ValueError:
        raise fail(f"replicate {row['replicate']!r} is not an integer") from None
    try:
        value = float(row["value"])
    except ValueError:
        raise fail(f"value {row['value']!r} is not a number") from None
    if not math.isfinite(value):
        raise fail(f"value {row['value']!r} is not finite")

    # Looked up by the literal header name, so aliased columns such as
    # seed_data still deliver their cells to the canonical source.
    seeds: Dict[VarianceSource, int] = {}
    for column, source in seed_columns:
        cell = row.get(column, "")
        if cell is None or cell.strip() == "":
            continue
        try:
            seeds[source] = int(cell)
        except ValueError:
            raise fail(f"{column} {cell!r} is not an integer") from None

    metric = row.get("metric") or default_metric
    try:
        return ScoreRecord(
            task=row["task"],
            algorithm=row["algorithm"],
            replicate_id=replicate,
            seeds=seeds,
            metric_name=metric,
            value=value,
        )
    except ValueError as exc:
        raise fail(str(exc)) from None


def load_scores(source, higher_is_better: bool = True, default_metric: str = "score") -> ScoreSet:
    """Read a ScoreSet from CSV (path, or any text file object).

    Expected header: ``task, algorithm, replicate, value`` plus optional
    ``metric`` and any ``seed_<source>`` columns; the seed columns
    present define the set's declared sources.  Errors name the
    offending row (header is row 1).
    """
    if hasattr(source, "read"):
        return _load_from_file(source, higher_is_better, default_metric)
    with open(source, "r", encoding="utf-8", newline="") as fh:
        return _load_from_file(fh, higher_is_better, default_metric)


def _load_from_file(fh, higher_is_better: bool, default_metric: str) -> ScoreSet:
    reader = csv.DictReader(fh)
    header = reader.fieldnames
    if header is None:
        raise ScoreParseError("empty input: no header row")
    if len(set(header)) != len(header):
        raise ScoreParseError("duplicate column names in header")

    seed_columns: List[Tuple[str, VarianceSource]] = []
    for col in header:
        if col in _FIXED_COLUMNS:
            continue
        if col.startswith(_SEED_PREFIX):
            try:
                source = VarianceSource.parse(col[len(_SEED_PREFIX):])
            except ValueError as exc:
                raise ScoreParseError(f"bad seed column {col!r}: {exc}") from None
            if any(s is source for _, s in seed_columns):
                raise ScoreParseError(
                    f"column {col!r} repeats source {source.value} already in the header"
                )
            seed_columns.append((col, source))
        else:
            raise ScoreParseError(f"unknown column {col!r}")
    missing = [c for c in ("task", "algorithm", "replicate", "value") if c not in header]
    if missing:
        raise ScoreParseError(f"missing required columns: {', '.join(missing)}")

    records = []
    for rownum, row in enumerate(reader, start=2):
        if None in row:
            raise ScoreParseError(f"row {rownum}: more cells than header columns")
        records.append(_parse_row(row, rownum, seed_columns, default_metric))
    if not records:
        raise ScoreParseError("no score rows in input")
    return ScoreSet(
        records=tuple(records),
        declared_sources=frozenset(s for _, s in seed_columns),
        higher_is_better=higher_is_better,
    )


def dump_scores(scores: ScoreSet, destination=None) -> Optional[str]:
    """Write a ScoreSet as CSV; returns the text when no destination is
    given.  Column order is canonical so dump/load round-trips exactly."""
    sources = [s for s in VarianceSource if s in scores.declared_sources]
    header = list(_FIXED_COLUMNS) + [_SEED_PREFIX + s.value for s in sources]

    def write(fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in scores.records:
            row = [r.task, r.algorithm, r.replicate_id, r.metric_name, repr(r.value)]
            row += [r.seeds.get(s, "") for s in sources]
            w.writerow(row)

    if destination is None:
        buf = io.StringIO()
        write(buf)
        return buf.getvalue()
    if hasattr(destination, "write"):
        write(destination)
        return None
    with open(destination, "w", encoding="utf-8", newline="") as fh:
        write(fh)
    return None


def scores_from_records(doc: dict) -> ScoreSet:
    """Inverse of :meth:`ScoreSet.to_records`."""
    records = tuple(
        ScoreRecord(
            task=r["task"],
            algorithm=r["algorithm"],
            replicate_id=int(r["replicate"]),
            seeds={VarianceSource.parse(k): int(v) for k, v in r.get("seeds", {}).items()},
            metric_name=doc["metric"],
            value=float(r["value"]),
        )
        for r in doc["records"]
    )
    return ScoreSet(
        records=records,
        declared_sources=frozenset(VarianceSource.parse(s) for s in doc.get("declared_sources", [])),
        higher_is_better=bool(doc.get("higher_is_better", True)),
    )


def pair_scores(
    scores: ScoreSet,
    algo_a: str,
    algo_b: str,
    pair_on: Iterable[VarianceSource] = (),
    task: Optional[str] = None,
    shuffle: Optional[RngStream] = None,
) -> PairedScores:
    """Join two algorithms' replicates into value pairs.

    With ``pair_on`` sources, records are matched on their shared seed
    tuples, which must form a bijection: a seed tuple appearing twice on
    one side is ambiguous, and one with no partner is an orphan; both
    raise :class:`PairingError`.  Without ``pair_on``, replicates are
    zipped in replicate-id order (optionally shuffled under ``shuffle``
    to break any accidental alignment).
    """
    if task is None:
        tasks = scores.tasks()
        if len(tasks) != 1:
            raise PairingError(f"score set spans tasks {tasks}; pass task= explicitly")
        task = tasks[0]
    group_a = sorted(scores.select(task, algo_a), key=lambda r: r.replicate_id)
    group_b = sorted(scores.select(task, algo_b), key=lambda r: r.replicate_id)
    if not group_a or not group_b:
        raise PairingError(f"no records for algorithm {algo_a if not group_a else algo_b!r} on task {task!r}")
    if len(group_a) != len(group_b):
        raise PairingError(
            f"cannot pair unequal groups: {algo_a} has {len(group_a)} replicates, "
            f"{algo_b} has {len(group_b)}"
        )

    keys_on = tuple(sorted(set(pair_on), key=lambda s: s.value))
    if not keys_on:
        order = list(range(len(group_b)))
        if shuffle is not None:
            order = list(shuffle.generator().permutation(len(group_b)))
        pairs = tuple((a.value, group_b[j].value) for a, j in zip(group_a, order))
        keys = tuple((a.replicate_id, group_b[j].replicate_id) for a, j in zip(group_a, order))
        return PairedScores(pairs, keys, (), scores.metric_name, scores.higher_is_better)

    def keyed(group: List[ScoreRecord], name: str) -> Dict[Tuple, ScoreRecord]:
        out: Dict[Tuple, ScoreRecord] = {}
        for rec in group:
            missing = [s.value for s in keys_on if s not in rec.seeds]
            if missing:
                raise PairingError(
                    f"replicate {rec.replicate_id} of {name} lacks seeds for: {', '.join(missing)}"
                )
            key = tuple(rec.seeds[s] for s in keys_on)
            if key in out:
                raise PairingError(f"ambiguous pairing: {name} repeats seed tuple {key}")
            out[key] = rec
        return out

    by_a = keyed(group_a, algo_a)
    by_b = keyed(group_b, algo_b)
    orphans = set(by_a) ^ set(by_b)
    if orphans:
        shown = sorted(orphans)[:5]
        raise PairingError(f"unmatched seed tuples between {algo_a} and {algo_b}: {shown}")
    keys = tuple(sorted(by_a))
    pairs = tuple((by_a[k].value, by_b[k].value) for k in keys)
    return PairedScores(pairs, keys, keys_on, scores.metric_name, scores.higher_is_better)


def validate(scores: ScoreSet) -> List[str]:
    """Non-fatal audit of a ScoreSet; returns human-readable findings."""
    findings: List[str] = []
    for source in sorted(scores.declared_sources, key=lambda s: s.value):
        missing = sum(1 for r in scores.records if source not in r.seeds)
        if missing:
            findings.append(f"{missing} records missing a seed for declared source {source.value}")
    groups = scores.groups()
    sizes = {key: len(recs) for key, recs in groups.items()}
    if len(set(sizes.values())) > 1:
        detail = ", ".join(f"{t}/{a}={n}" for (t, a), n in sorted(sizes.items()))
        findings.append(f"unequal replicate counts across groups: {detail}")
    for (task, algo), recs in sorted(groups.items()):
        values = {r.value for r in recs}
        if len(recs) > 1 and len(values) == 1:
            findings.append(f"group {task}/{algo} has zero variance (all values identical)")
    return findings
