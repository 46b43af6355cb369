"""Criterion scores for one respondent's ratings of one translation candidate.

All ratings are normalized to [0, 1] before they reach this module.  The
score functions accept scalars or numpy arrays; scalars come back as floats.
"""
from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass, fields
from typing import Iterable, Mapping, Sequence

import numpy as np

from .circumplex import Axis, PaqAttribute, axis_of
from .errors import EmptyPopulationError, IncompleteRecordError, RatingRangeError


class Criterion(str, enum.Enum):
    APPR = "APPR"
    UNDR = "UNDR"
    CLAR = "CLAR"
    ANTO = "ANTO"
    ORTH = "ORTH"
    NCON = "NCON"
    CONN = "CONN"
    IBAL = "IBAL"

    @property
    def field(self) -> str:
        return self.value.lower()


# Row order of the report tables.
TABLE_CRITERIA = {
    Axis.MAIN: (Criterion.APPR, Criterion.UNDR, Criterion.CLAR, Criterion.ORTH,
                Criterion.ANTO, Criterion.NCON, Criterion.IBAL),
    Axis.DERIVED: (Criterion.APPR, Criterion.UNDR, Criterion.CLAR, Criterion.CONN, Criterion.IBAL),
}
# Spoke order of the radar figure.
RADAR_CRITERIA = {
    Axis.MAIN: (Criterion.APPR, Criterion.UNDR, Criterion.CLAR, Criterion.ANTO,
                Criterion.ORTH, Criterion.NCON, Criterion.IBAL),
    Axis.DERIVED: (Criterion.APPR, Criterion.UNDR, Criterion.CLAR, Criterion.IBAL, Criterion.CONN),
}


def criteria_for(axis: Axis) -> tuple[Criterion, ...]:
    return TABLE_CRITERIA[axis]


# Prompt names as they appear in the long-format response file.
PROMPTS = ("appr", "undr", "asso_cw", "asso_ccw", "impl_cw", "impl_ccw", "anto", "bias")
MAIN_ONLY_PROMPTS = frozenset({"anto", "bias"})


def required_prompts(axis: Axis) -> tuple[str, ...]:
    if axis is Axis.MAIN:
        return PROMPTS
    return tuple(p for p in PROMPTS if p not in MAIN_ONLY_PROMPTS)


def _check_unit(name: str, r):
    if type(r) is float or type(r) is int:
        if not 0.0 <= r <= 1.0:
            raise RatingRangeError(name, r)
        return np.float64(r)
    a = np.asarray(r, dtype=np.float64)
    bad = ~((a >= 0.0) & (a <= 1.0))  # also catches NaN
    if np.any(bad):
        value = a if a.ndim == 0 else a[bad][0]
        raise RatingRangeError(name, float(value))
    return a


def _out(a: np.ndarray):
    return float(a) if a.ndim == 0 else a


def score_direct(r):
    """Direct-rating criteria (APPR, UNDR, ANTO): the rating itself."""
    return _out(_check_unit("r", r))


def score_clarity(r_asso_cw, r_asso_ccw):
    a = _check_unit("r_asso_cw", r_asso_cw)
    b = _check_unit("r_asso_ccw", r_asso_ccw)
    return _out(1.0 - 0.5 * (a + b))


def score_orthogonality(r_bias):
    """Tent function peaking at a neutral bias rating of 0.5."""
    a = _check_unit("r_bias", r_bias)
    return _out(1.0 - 2.0 * np.abs(a - 0.5))


def score_nonconnotativeness(r_impl_cw, r_impl_ccw):
    a = _check_unit("r_impl_cw", r_impl_cw)
    b = _check_unit("r_impl_ccw", r_impl_ccw)
    return _out(1.0 - 0.5 * (a + b))


def score_connotativeness(r_impl_cw, r_impl_ccw):
    a = _check_unit("r_impl_cw", r_impl_cw)
    b = _check_unit("r_impl_ccw", r_impl_ccw)
    return _out(0.5 * (a + b))


def score_implicative_balance(r_impl_cw, r_impl_ccw):
    a = _check_unit("r_impl_cw", r_impl_cw)
    b = _check_unit("r_impl_ccw", r_impl_ccw)
    return _out(1.0 - np.abs(a - b))


@dataclass(frozen=True)
class RatingRecord:
    """Normalized prompt ratings from one respondent for one candidate.

    ``r_anto`` and ``r_bias`` exist only for main-axis attributes.  Any
    prompt may be ``None`` while a record is being assembled; :func:`score_record`
    rejects records missing a prompt their axis requires.
    """

    respondent_id: str
    candidate_id: str
    attribute: PaqAttribute
    ccr: str
    r_appr: float | None = None
    r_undr: float | None = None
    r_asso_cw: float | None = None
    r_asso_ccw: float | None = None
    r_impl_cw: float | None = None
    r_impl_ccw: float | None = None
    r_anto: float | None = None
    r_bias: float | None = None

    @property
    def axis(self) -> Axis:
        return axis_of(self.attribute)

    def rating(self, prompt: str) -> float | None:
        return getattr(self, "r_" + prompt)

    def missing_prompts(self) -> list[str]:
        return [p for p in required_prompts(self.axis) if self.rating(p) is None]


@dataclass(frozen=True)
class CriterionScores:
    appr: float
    undr: float
    clar: float
    ibal: float
    anto: float | None = None
    orth: float | None = None
    ncon: float | None = None
    conn: float | None = None

    @property
    def axis(self) -> Axis:
        return Axis.DERIVED if self.conn is not None else Axis.MAIN

    def get(self, criterion: Criterion) -> float | None:
        return getattr(self, criterion.field)

    def as_dict(self) -> dict[Criterion, float]:
        return {c: self.get(c) for c in criteria_for(self.axis)}


def score_record(record: RatingRecord) -> CriterionScores:
    missing = record.missing_prompts()
    if missing:
        raise IncompleteRecordError(missing[0], record.respondent_id, record.candidate_id)
    common = dict(
        appr=score_direct(record.r_appr),
        undr=score_direct(record.r_undr),
        clar=score_clarity(record.r_asso_cw, record.r_asso_ccw),
        ibal=score_implicative_balance(record.r_impl_cw, record.r_impl_ccw),
    )
    if record.axis is Axis.MAIN:
        return CriterionScores(
            **common,
            anto=score_direct(record.r_anto),
            orth=score_orthogonality(record.r_bias),
            ncon=score_nonconnotativeness(record.r_impl_cw, record.r_impl_ccw),
        )
    return CriterionScores(**common, conn=score_connotativeness(record.r_impl_cw, record.r_impl_ccw))


@dataclass(frozen=True)
class ScoredRecord:
    respondent_id: str
    candidate_id: str
    attribute: PaqAttribute
    ccr: str
    scores: CriterionScores


def score_records(records: Iterable[RatingRecord]) -> list[ScoredRecord]:
    ordered = sorted(records, key=lambda r: (r.respondent_id, r.attribute.angle_deg, r.candidate_id))
    return [
        ScoredRecord(r.respondent_id, r.candidate_id, r.attribute, r.ccr, score_record(r))
        for r in ordered
    ]


COMBINED = "Combined"


def _mean_of(scores: Sequence[CriterionScores]) -> CriterionScores:
    if len({s.axis for s in scores}) != 1:
        raise ValueError("cannot average scores from both axes")
    out = {}
    for f in fields(CriterionScores):
        vals = [getattr(s, f.name) for s in scores]
        out[f.name] = None if vals[0] is None else math.fsum(vals) / len(vals)
    return CriterionScores(**out)


def mean_scores(
    records: Iterable[ScoredRecord],
    grouping: str = "Combined",
    groups: Sequence[str] | None = None,
) -> dict[str, CriterionScores]:
    """Arithmetic mean of each criterion, either pooled or per country.

    ``grouping`` is ``"Combined"`` or ``"ByCountry"``.  When ``groups`` is
    given, each listed group must be nonempty.
    """
    if grouping not in (COMBINED, "ByCountry"):
        raise ValueError(f"unknown grouping {grouping!r}")
    buckets: Mapping[str, list[CriterionScores]] = defaultdict(list)
    ordered = sorted(records, key=lambda r: (r.respondent_id, r.candidate_id))
    for rec in ordered:
        key = COMBINED if grouping == COMBINED else rec.ccr
        buckets[key].append(rec.scores)
    wanted = list(groups) if groups is not None else (
        [COMBINED] if grouping == COMBINED else sorted(buckets)
    )
    if not wanted:
        raise EmptyPopulationError(COMBINED)
    result = {}
    for g in wanted:
        if not buckets.get(g):
            raise EmptyPopulationError(g)
        result[g] = _mean_of(buckets[g])
    return result
