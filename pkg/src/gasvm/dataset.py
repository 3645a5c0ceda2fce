"""Survey-data ingestion: parsing, usage binarization, design matrices, stratified folds.

The input is the UCI drug-consumption file: plain comma-separated text,
32 columns per line (integer id, 12 pre-quantified psycho-social reals,
19 drug-usage class labels CL0..CL6), no header.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

# Column layout of the raw file, in file order.
PSYCHOSOCIAL_FILE_ORDER = (
    "Age", "Gender", "Education", "Country", "Ethnicity",
    "Neuroticism", "Extraversion", "Openness", "Agreeableness",
    "Conscientiousness", "Impulsivity", "SensationSeeking",
)
DRUG_FILE_ORDER = (
    "Alcohol", "Amphetamines", "AmylNitrite", "Benzodiazepines", "Caffeine",
    "Cannabis", "Chocolate", "Cocaine", "Crack", "Ecstasy", "Heroin",
    "Ketamine", "LegalHighs", "LSD", "Methadone", "Mushrooms", "Nicotine",
    "Semer", "VSA",
)

# Reporting order for the per-drug user-count table (Semer, the fictitious
# control drug, is not part of the published distribution table).
DRUG_REPORT_ORDER = (
    "Alcohol", "Amphetamines", "AmylNitrite", "Benzodiazepines", "Cannabis",
    "Chocolate", "Cocaine", "Caffeine", "Crack", "Ecstasy", "Heroin",
    "Ketamine", "LegalHighs", "LSD", "Methadone", "Mushrooms", "Nicotine",
    "VSA",
)

# Canonical predictor order: drug block (report order, Semer last), then the
# psycho-social block.  The target drug is dropped from the drug block.
PSYCHOSOCIAL_PREDICTOR_ORDER = (
    "Age", "Gender", "Education", "Country", "Ethnicity",
    "Agreeableness", "Neuroticism", "Extraversion", "Openness",
    "Conscientiousness", "Impulsivity", "SensationSeeking",
)

# Published user counts (decade-based rule) for the official file, used by
# `ingest --expect-table1`: drug -> (user count, percent of 1885).
REPORTED_USER_COUNTS = {
    "Alcohol": (1817, 96.39),
    "Amphetamines": (679, 36.02),
    "AmylNitrite": (370, 19.63),
    "Benzodiazepines": (769, 40.80),
    "Cannabis": (1265, 67.11),
    "Chocolate": (1850, 98.14),
    "Cocaine": (687, 36.45),
    "Caffeine": (1848, 98.04),
    "Crack": (191, 10.13),
    "Ecstasy": (751, 39.84),
    "Heroin": (212, 11.25),
    "Ketamine": (350, 18.57),
    "LegalHighs": (762, 40.42),
    "LSD": (557, 29.55),
    "Methadone": (417, 22.12),
    "Mushrooms": (694, 36.82),
    "Nicotine": (1264, 67.06),
    "VSA": (230, 12.20),
}

N_COLUMNS = 1 + len(PSYCHOSOCIAL_FILE_ORDER) + len(DRUG_FILE_ORDER)
USAGE_CLASSES = tuple(f"CL{i}" for i in range(7))

USER = 1
NON_USER = 0


class ParseError(ValueError):
    """Raised for a malformed input line; carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


@dataclass(frozen=True)
class Record:
    """One survey respondent: 12 psycho-social reals and 19 usage levels (file order)."""

    id: int
    psychosocial: np.ndarray   # shape (12,), float
    drugs: np.ndarray          # shape (19,), int levels 0..6

    def usage_level(self, drug: str) -> int:
        return int(self.drugs[DRUG_FILE_ORDER.index(drug)])


@dataclass(frozen=True)
class Dataset:
    """Design matrix for one target drug, columns in canonical predictor order."""

    feature_names: tuple[str, ...]
    X: np.ndarray              # shape (n, n_features)
    y: np.ndarray              # shape (n,), 1 = User of the target drug
    target_name: str

    def __post_init__(self):
        if self.X.shape[0] != self.y.shape[0]:
            raise ValueError("X and y row counts differ")
        if self.X.shape[1] != len(self.feature_names):
            raise ValueError("column count does not match feature_names")
        if len(set(self.feature_names)) != len(self.feature_names):
            raise ValueError("duplicate feature names")
        if self.target_name in self.feature_names:
            raise ValueError("target must not appear among predictors")

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    def to_csv(self, path) -> None:
        """Persist the matrix with a header row; target label in the last column."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(list(self.feature_names) + [self.target_name])
            for row, label in zip(self.X, self.y):
                writer.writerow([repr(float(v)) for v in row] + [int(label)])


@dataclass(frozen=True)
class FoldSplit:
    """Stratified fold assignment: assignments[i] is the fold of record i."""

    k: int
    assignments: np.ndarray
    seed: int

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)


def binarize_usage(level: int) -> int:
    """Decade-based rule: levels 0-1 (never / more than a decade ago) are non-users."""
    if not 0 <= level <= 6:
        raise ValueError(f"usage level {level} outside 0..6")
    return USER if level >= 2 else NON_USER


def parse_records(stream) -> list[Record]:
    """Parse the raw survey file from a text stream or iterable of lines.

    Raises ParseError naming the offending 1-based line on the first
    malformed line (wrong column count, unparseable real, unknown class
    label, duplicate id).
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    records: list[Record] = []
    seen_ids: set[int] = set()
    for line_number, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != N_COLUMNS:
            raise ParseError(line_number, f"expected {N_COLUMNS} columns, got {len(parts)}")
        try:
            rec_id = int(parts[0])
        except ValueError:
            raise ParseError(line_number, f"bad id {parts[0]!r}") from None
        if rec_id in seen_ids:
            raise ParseError(line_number, f"duplicate id {rec_id}")
        seen_ids.add(rec_id)
        try:
            psycho = np.array([float(p) for p in parts[1:13]], dtype=float)
        except ValueError:
            raise ParseError(line_number, "unparseable real value in columns 2-13") from None
        levels = np.empty(len(DRUG_FILE_ORDER), dtype=np.int64)
        for j, token in enumerate(parts[13:]):
            if token not in USAGE_CLASSES:
                raise ParseError(line_number, f"unknown usage class {token!r}")
            levels[j] = int(token[2:])
        records.append(Record(rec_id, psycho, levels))
    return records


def load_records(path) -> list[Record]:
    with open(path, "r") as fh:
        return parse_records(fh)


def user_counts(records: list[Record]) -> dict[str, tuple[int, float]]:
    """Per-drug (user count, percent) under the decade rule, in report order."""
    n = len(records)
    counts: dict[str, tuple[int, float]] = {}
    for drug in DRUG_REPORT_ORDER:
        idx = DRUG_FILE_ORDER.index(drug)
        c = sum(binarize_usage(int(r.drugs[idx])) for r in records)
        pct = round(100.0 * c / n, 2) if n else 0.0
        counts[drug] = (c, pct)
    return counts


def check_reported_counts(counts: dict[str, tuple[int, float]]) -> list[str]:
    """Compare computed counts against the published table; return mismatch lines."""
    problems = []
    for drug, (exp_count, exp_pct) in REPORTED_USER_COUNTS.items():
        got = counts.get(drug)
        if got is None:
            problems.append(f"{drug}: missing from computed counts")
        elif got != (exp_count, exp_pct):
            problems.append(
                f"{drug}: expected {exp_count} ({exp_pct}%), got {got[0]} ({got[1]}%)"
            )
    return problems


def predictor_names(target: str) -> tuple[str, ...]:
    """Canonical predictor order for a target drug: 18 drugs then 12 psycho-social."""
    if target not in DRUG_FILE_ORDER:
        raise ValueError(f"unknown target drug {target!r}")
    drugs = [d for d in DRUG_REPORT_ORDER if d != target]
    if target != "Semer":
        drugs.append("Semer")
    return tuple(drugs) + PSYCHOSOCIAL_PREDICTOR_ORDER


def build_matrix(records: list[Record], target: str = "Heroin",
                 drug_encoding: str = "binary") -> Dataset:
    """Assemble predictors for `target`: non-target drugs plus psycho-social columns.

    drug_encoding "binary" uses the decade rule on predictor drugs;
    "ordinal" keeps the raw 0..6 levels.
    """
    if drug_encoding not in ("binary", "ordinal"):
        raise ValueError(f"unknown drug_encoding {drug_encoding!r}")
    names = predictor_names(target)
    n = len(records)
    X = np.empty((n, len(names)), dtype=float)
    psycho_idx = {name: i for i, name in enumerate(PSYCHOSOCIAL_FILE_ORDER)}
    drug_idx = {name: i for i, name in enumerate(DRUG_FILE_ORDER)}
    for col, name in enumerate(names):
        if name in drug_idx:
            levels = np.array([r.drugs[drug_idx[name]] for r in records], dtype=float)
            if drug_encoding == "binary":
                X[:, col] = (levels >= 2).astype(float)
            else:
                X[:, col] = levels
        else:
            X[:, col] = [r.psychosocial[psycho_idx[name]] for r in records]
    target_levels = np.array([r.drugs[drug_idx[target]] for r in records])
    y = (target_levels >= 2).astype(np.int64)
    return Dataset(feature_names=names, X=X, y=y, target_name=target)


def stratified_folds(data, k: int, seed: int) -> FoldSplit:
    """Deterministic stratified k-fold assignment for a Dataset or label array.

    Each class is shuffled independently with the seeded generator and dealt
    round-robin; the dealing cursor continues across classes so total fold
    sizes also stay within one of each other.
    """
    y = np.asarray(data.y if isinstance(data, Dataset) else data)
    if k < 2:
        raise ValueError("k must be at least 2")
    classes, class_counts = np.unique(y, return_counts=True)
    if class_counts.min() < k:
        raise ValueError(f"smallest class has {class_counts.min()} members, fewer than k={k}")
    rng = np.random.default_rng(seed)
    assignments = np.empty(len(y), dtype=np.int64)
    cursor = 0
    for cls in classes:
        members = np.flatnonzero(y == cls)
        rng.shuffle(members)
        for idx in members:
            assignments[idx] = cursor % k
            cursor += 1
    return FoldSplit(k=k, assignments=assignments, seed=seed)
