"""Per-attribute analysis routing.

For each attribute and criterion:

* cross-national omnibus: Prentice (blocks = candidates, groups = countries)
  when the attribute has several candidates, otherwise Kruskal-Wallis across
  countries;
* if that omnibus is significant, Mann-Whitney-Wilcoxon between countries
  for every candidate, Bonferroni over the candidates;
* for multi-candidate attributes, Kruskal-Wallis across candidates inside
  each country, followed by Conover-Iman when significant and there are
  more than two candidates.
"""
from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .circumplex import ANALYSIS_ORDER, Axis, PaqAttribute, axis_of
from .errors import RankTestError, SchemaError
from .ingest import ExclusionReport, Respondent, StudyConfig, filter_ccr
from .ranktests import (
    Method,
    PairwiseResult,
    TestResult,
    bonferroni,
    conover_iman,
    kruskal_wallis,
    mann_whitney,
    prentice,
)
from .scoring import (
    COMBINED,
    Criterion,
    CriterionScores,
    RatingRecord,
    ScoredRecord,
    criteria_for,
    mean_scores,
    score_records,
)

DEFAULT_ALPHA = 0.05


@dataclass(frozen=True)
class OmnibusResult:
    criterion: Criterion
    omnibus: TestResult
    posthoc: tuple[PairwiseResult, ...] | None = None
    country: str | None = None


@dataclass(frozen=True)
class AttributeAnalysis:
    attribute: PaqAttribute
    candidates: tuple[str, ...]
    countries: tuple[str, ...]
    alpha: float
    mean_table: Mapping[str, Mapping[str, CriterionScores]]
    cross_national: Mapping[Criterion, OmnibusResult]
    intra_country: Mapping[str, Mapping[Criterion, OmnibusResult]]
    combined: Mapping[Criterion, OmnibusResult] | None = None
    cross_national_skipped: str | None = None

    @property
    def axis(self) -> Axis:
        return axis_of(self.attribute)

    @property
    def criteria(self) -> tuple[Criterion, ...]:
        return criteria_for(self.axis)


@dataclass(frozen=True)
class StudyResult:
    exclusion: ExclusionReport
    analyses: tuple[AttributeAnalysis, ...]
    alpha: float
    countries: tuple[str, ...] = field(default=())

    def analysis(self, attribute: PaqAttribute | str) -> AttributeAnalysis:
        attr = PaqAttribute.parse(attribute) if isinstance(attribute, str) else attribute
        for a in self.analyses:
            if a.attribute is attr:
                return a
        raise KeyError(attr.value)


def _guarded(method: Method, run: Callable[[], TestResult]) -> TestResult:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            result = run()
        except RankTestError as exc:
            return TestResult(method, 0.0, None, 1.0, degenerate=True, flags=(f"not computable: {exc}",))
    if caught:
        extra = tuple(str(w.message) for w in caught if str(w.message) not in result.flags)
        if extra:
            result = TestResult(result.method, result.statistic, result.df, result.p_value,
                                result.effect_size, result.degenerate, result.flags + extra)
    return result


def _posthoc_mww(
    values: Mapping[tuple[str, str], np.ndarray],
    candidates: Sequence[str],
    countries: Sequence[str],
) -> tuple[PairwiseResult, ...]:
    country_pairs = list(combinations(countries, 2))
    family = len(candidates) * len(country_pairs)
    rows = []
    for cand in candidates:
        for a, b in country_pairs:
            x, y = values.get((cand, a)), values.get((cand, b))
            res = _guarded(Method.MANN_WHITNEY, lambda: mann_whitney(x, y))
            rows.append((cand, (a, b), res))
    adjusted = bonferroni([r.p_value for _, _, r in rows], family)
    return tuple(
        PairwiseResult(pair, res.statistic, res.p_value, adj, block=cand, degenerate=res.degenerate)
        for (cand, pair, res), adj in zip(rows, adjusted)
    )


def _across_candidates(
    samples: Mapping[str, np.ndarray], criterion: Criterion, alpha: float, country: str | None
) -> OmnibusResult:
    present = {c: v for c, v in samples.items() if v.size}
    omnibus = _guarded(Method.KRUSKAL_WALLIS, lambda: kruskal_wallis(present))
    posthoc = None
    if omnibus.significant(alpha) and len(present) > 2:
        try:
            posthoc = tuple(conover_iman(present))
        except RankTestError:
            posthoc = ()
    return OmnibusResult(criterion, omnibus, posthoc, country)


def analyze_attribute(
    attribute: PaqAttribute,
    records: Iterable[ScoredRecord],
    alpha: float = DEFAULT_ALPHA,
    countries: Sequence[str] | None = None,
    candidates: Sequence[str] | None = None,
    combined: bool = False,
) -> AttributeAnalysis:
    """Run every omnibus and gated posthoc test for one attribute."""
    recs = [r for r in records if r.attribute is attribute]
    recs.sort(key=lambda r: (r.respondent_id, r.candidate_id))
    axis = axis_of(attribute)
    crits = criteria_for(axis)
    for r in recs:
        if r.scores.axis is not axis:
            raise SchemaError(f"{attribute.value}: record for {r.respondent_id}/{r.candidate_id} "
                              f"carries {r.scores.axis.value}-axis criteria")
    if not recs:
        raise SchemaError(f"{attribute.value}: no scored records")
    present_cands = sorted({r.candidate_id for r in recs})
    cands = tuple(c for c in candidates if c in present_cands) if candidates else tuple(present_cands)
    present_countries = sorted({r.ccr for r in recs})
    ctry = tuple(c for c in sorted(countries) if c in present_countries) if countries else tuple(present_countries)

    mean_table = {}
    for cand in cands:
        rows = [r for r in recs if r.candidate_id == cand]
        means = dict(mean_scores(rows, COMBINED))
        means.update(mean_scores([r for r in rows if r.ccr in ctry], "ByCountry",
                                 [c for c in ctry if any(r.ccr == c for r in rows)]))
        mean_table[cand] = means

    def column(crit, cand=None, country=None):
        return np.array([r.scores.get(crit) for r in recs
                         if (cand is None or r.candidate_id == cand)
                         and (country is None or r.ccr == country)], dtype=np.float64)

    cross: dict[Criterion, OmnibusResult] = {}
    skipped = None
    if len(ctry) < 2:
        skipped = f"only {len(ctry)} country present"
    else:
        scoped = [r for r in recs if r.ccr in ctry and r.candidate_id in cands]
        for crit in crits:
            if len(cands) > 1:
                vals = [r.scores.get(crit) for r in scoped]
                omnibus = _guarded(Method.PRENTICE, lambda: prentice(
                    vals, [r.ccr for r in scoped], [r.candidate_id for r in scoped]))
            else:
                omnibus = _guarded(Method.KRUSKAL_WALLIS, lambda: kruskal_wallis(
                    {c: column(crit, cands[0], c) for c in ctry}))
            posthoc = None
            if omnibus.significant(alpha):
                cells = {(cand, c): column(crit, cand, c) for cand in cands for c in ctry}
                posthoc = _posthoc_mww(cells, cands, ctry)
            cross[crit] = OmnibusResult(crit, omnibus, posthoc)

    intra: dict[str, dict[Criterion, OmnibusResult]] = {}
    pooled = None
    if len(cands) > 1:
        for c in ctry:
            intra[c] = {crit: _across_candidates({cand: column(crit, cand, c) for cand in cands},
                                                 crit, alpha, c) for crit in crits}
        if combined:
            pooled = {crit: _across_candidates({cand: column(crit, cand) for cand in cands},
                                               crit, alpha, COMBINED) for crit in crits}

    return AttributeAnalysis(attribute, cands, ctry, alpha, mean_table, cross, intra, pooled, skipped)


def _thread_count() -> int:
    text = os.environ.get("CIRCUMPLEX_EVAL_THREADS", "")
    try:
        return max(1, int(text))
    except ValueError:
        return 1


def run_study(
    records: Iterable[RatingRecord],
    respondents: Iterable[Respondent],
    config: StudyConfig,
    combined: bool = False,
    alpha: float | None = None,
) -> StudyResult:
    """Filter by country of residence, score, and analyze every attribute present."""
    alpha = config.alpha if alpha is None else alpha
    kept, report = filter_ccr(records, respondents, config)
    scored = score_records(kept)
    present = {r.attribute for r in scored}
    attrs = [a for a in ANALYSIS_ORDER if a in present]
    countries = tuple(sorted(set(config.country_whitelist)))

    def one(attr: PaqAttribute) -> AttributeAnalysis:
        return analyze_attribute(attr, scored, alpha, countries, config.attributes.get(attr), combined)

    threads = min(_thread_count(), len(attrs) or 1)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            analyses = tuple(pool.map(one, attrs))
    else:
        analyses = tuple(one(a) for a in attrs)
    return StudyResult(report, analyses, alpha, countries)
