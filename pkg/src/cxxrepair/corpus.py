"""Load, validate, sample, and split line-delimited repair-task datasets.

Storage is one JSON object per line, UTF-8, with the fields
id, error_type, error_number, error_detail, buggy_source, compiler_message,
difficulty, provenance, verified.  Records are immutable after load and
iteration order is file order.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterator

from cxxrepair.errors import CorpusError


class DifficultyLevel(str, Enum):
    EASY = "easy"
    MEDIUM_EASY = "medium_easy"
    MEDIUM = "medium"
    MEDIUM_HARD = "medium_hard"
    HARD = "hard"


class Provenance(str, Enum):
    SEED = "seed"
    SYNTHETIC = "synthetic"


# Serialization order for record files.
RECORD_FIELDS = (
    "id",
    "error_type",
    "error_number",
    "error_detail",
    "buggy_source",
    "compiler_message",
    "difficulty",
    "provenance",
    "verified",
)

_REQUIRED_FIELDS = ("id", "error_type", "error_number", "error_detail", "buggy_source")


@dataclass(frozen=True)
class DatasetRecord:
    """One buggy-code exemplar with its error metadata and verification state."""

    id: str
    error_type: str
    error_number: str
    error_detail: str
    buggy_source: str
    compiler_message: str = ""
    difficulty: DifficultyLevel = DifficultyLevel.MEDIUM
    provenance: Provenance = Provenance.SEED
    verified: bool = False

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "error_type": self.error_type,
            "error_number": self.error_number,
            "error_detail": self.error_detail,
            "buggy_source": self.buggy_source,
            "compiler_message": self.compiler_message,
            "difficulty": self.difficulty.value,
            "provenance": self.provenance.value,
            "verified": self.verified,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "DatasetRecord":
        missing = [name for name in _REQUIRED_FIELDS if name not in raw]
        if missing:
            raise CorpusError(f"missing required fields: {', '.join(missing)}")
        return cls(
            id=str(raw["id"]),
            error_type=str(raw["error_type"]),
            error_number=str(raw["error_number"]),
            error_detail=str(raw["error_detail"]),
            buggy_source=str(raw["buggy_source"]),
            compiler_message=str(raw.get("compiler_message", "")),
            difficulty=DifficultyLevel(raw.get("difficulty", "medium")),
            provenance=Provenance(raw.get("provenance", "seed")),
            verified=bool(raw.get("verified", False)),
        )


def validate_record(record: DatasetRecord) -> list[str]:
    """Return invariant violations as strings; an empty list means the record is valid."""
    violations = []
    if not record.id:
        violations.append("id is empty")
    if not record.buggy_source:
        violations.append("buggy_source is empty")
    if record.verified and not record.compiler_message:
        violations.append("verified record has empty compiler_message")
    return violations


@dataclass
class Dataset:
    """An ordered, duplicate-free collection of DatasetRecords."""

    records: list[DatasetRecord] = field(default_factory=list)
    source_path: str | None = None

    def __post_init__(self):
        seen: set[str] = set()
        for record in self.records:
            if record.id in seen:
                raise CorpusError(f"duplicate record id: {record.id!r}")
            seen.add(record.id)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[DatasetRecord]:
        return iter(self.records)

    def __getitem__(self, index: int) -> DatasetRecord:
        return self.records[index]

    def ids(self) -> list[str]:
        return [record.id for record in self.records]

    def difficulty_counts(self) -> dict[DifficultyLevel, int]:
        counts = {level: 0 for level in DifficultyLevel}
        for record in self.records:
            counts[record.difficulty] += 1
        return counts


def load_dataset(path: str | Path) -> Dataset:
    """Parse a record file, enforcing per-record invariants and id uniqueness.

    Raises FileNotFoundError for a missing file and CorpusError (with the
    offending line number) for malformed or invalid records.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset file not found: {path}")
    records: list[DatasetRecord] = []
    seen: dict[str, int] = {}
    with path.open(encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{line_no}: malformed record: {exc.msg}") from exc
            try:
                record = DatasetRecord.from_dict(raw)
            except (CorpusError, ValueError) as exc:
                raise CorpusError(f"{path}:{line_no}: {exc}") from exc
            violations = validate_record(record)
            if violations:
                raise CorpusError(f"{path}:{line_no}: {'; '.join(violations)}")
            if record.id in seen:
                raise CorpusError(
                    f"{path}:{line_no}: duplicate id {record.id!r} (first seen on line {seen[record.id]})"
                )
            seen[record.id] = line_no
            records.append(record)
    return Dataset(records=records, source_path=str(path))


def write_dataset(dataset: Dataset, path: str | Path) -> Path:
    """Write one JSON object per line; load_dataset(write_dataset(d)) round-trips field-for-field."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for record in dataset:
            handle.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")
    return path


def largest_remainder_allocation(counts: dict, n: int) -> dict:
    """Allocate n slots proportionally to counts so the allocation sums exactly to n.

    Each key gets floor(n * count / total); leftover slots go to the largest
    fractional remainders, ties broken by key order in `counts`.  Integer
    arithmetic throughout, so the result is platform-independent.
    """
    total = sum(counts.values())
    if n < 0:
        raise ValueError("n must be non-negative")
    if total == 0:
        if n > 0:
            raise ValueError("cannot allocate a positive n across empty counts")
        return {key: 0 for key in counts}
    allocation = {}
    remainders = []
    for order, (key, count) in enumerate(counts.items()):
        quota_floor = (n * count) // total
        allocation[key] = quota_floor
        remainders.append((n * count - quota_floor * total, -order, key))
    leftover = n - sum(allocation.values())
    for _, _, key in sorted(remainders, reverse=True)[:leftover]:
        allocation[key] += 1
    return allocation


def stratified_sample(dataset: Dataset, n: int, seed: int) -> Dataset:
    """Sample n records following the dataset's difficulty proportions.

    Stratum sizes come from largest-remainder allocation, so they always sum
    to n.  Sampling within a stratum is uniform and deterministic per seed;
    the returned records keep dataset order.
    """
    if n < 0:
        raise CorpusError("sample size must be non-negative")
    if n == 0:
        return Dataset(records=[])
    if n > len(dataset):
        raise CorpusError(f"sample size {n} exceeds dataset size {len(dataset)}")
    groups: dict[DifficultyLevel, list[int]] = {level: [] for level in DifficultyLevel}
    for index, record in enumerate(dataset):
        groups[record.difficulty].append(index)
    counts = {level: len(indices) for level, indices in groups.items()}
    allocation = largest_remainder_allocation(counts, n)
    rng = random.Random(seed)
    chosen: list[int] = []
    for level in DifficultyLevel:
        take = allocation[level]
        available = groups[level]
        if take > len(available):
            raise CorpusError(
                f"stratum {level.value!r} has {len(available)} records but the allocation needs {take}"
            )
        if take:
            chosen.extend(rng.sample(available, take))
    return Dataset(records=[dataset[index] for index in sorted(chosen)])


def split(dataset: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Randomly partition the dataset into (train, test); deterministic per seed."""
    if not 0.0 < train_fraction < 1.0:
        raise CorpusError(f"train_fraction must be in (0, 1), got {train_fraction}")
    if len(dataset) < 2:
        raise CorpusError("split requires at least 2 records")
    indices = list(range(len(dataset)))
    random.Random(seed).shuffle(indices)
    n_train = round(train_fraction * len(dataset))
    train_indices = sorted(indices[:n_train])
    test_indices = sorted(indices[n_train:])
    return (
        Dataset(records=[dataset[i] for i in train_indices]),
        Dataset(records=[dataset[i] for i in test_indices]),
    )
