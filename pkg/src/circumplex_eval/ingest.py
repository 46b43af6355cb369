"""Survey file ingestion, normalization and the country-of-residence filter.

Input files
-----------
``responses.csv`` (long format, UTF-8, header required)::

    respondent_id,ccr,attribute,candidate,prompt,raw_rating

``prompt`` is one of ``appr, undr, asso_cw, asso_ccw, impl_cw, impl_ccw,
anto, bias``; ``anto`` and ``bias`` are only valid for main-axis attributes.

``respondents.csv`` (optional)::

    respondent_id,ccr,stay_outside_band,ilr_zsm,ilr_eng,discipline

Study configuration is a JSON object; see :func:`load_config`.
"""
from __future__ import annotations

import csv
import enum
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .circumplex import ANALYSIS_ORDER, Axis, PaqAttribute, axis_of
from .errors import ConfigError, EmptyPopulationError, IngestError
from .scoring import MAIN_ONLY_PROMPTS, PROMPTS, RatingRecord, required_prompts

RESPONSE_COLUMNS = ("respondent_id", "ccr", "attribute", "candidate", "prompt", "raw_rating")
RESPONDENT_COLUMNS = ("respondent_id", "ccr", "stay_outside_band", "ilr_zsm", "ilr_eng", "discipline")


class StayBand(str, enum.Enum):
    Y0_1 = "0-1"
    Y1_5 = "1-5"
    Y6_10 = "6-10"
    Y10PLUS = "10+"

    @classmethod
    def parse(cls, text: str) -> "StayBand":
        key = text.strip()
        for member in cls:
            if key in (member.value, member.name):
                return member
        raise ValueError(f"unknown stay band {text!r}")


class Discipline(str, enum.Enum):
    AUDIO_RELATED = "AudioRelated"
    NON_AUDIO_HASS = "NonAudioHASS"
    NON_AUDIO_ENGR = "NonAudioEngr"
    NON_AUDIO_SCIENCES = "NonAudioSciences"
    OTHERS = "Others"


STAY_LABELS = {
    StayBand.Y0_1: "0-1 years",
    StayBand.Y1_5: "1-5 years",
    StayBand.Y6_10: "6-10 years",
    StayBand.Y10PLUS: "more than 10 years",
}
ILR_LABELS = {
    5: "Native (5)",
    4: "Full Prof. (4)",
    3: "Prof. Working (3)",
    2: "Lim. Working (2)",
    1: "Elementary (1)",
    0: "None (0)",
}
DISCIPLINE_LABELS = {
    Discipline.AUDIO_RELATED: "Audio-related",
    Discipline.NON_AUDIO_HASS: "Non-audio HASS",
    Discipline.NON_AUDIO_ENGR: "Non-audio Engr.",
    Discipline.NON_AUDIO_SCIENCES: "Non-audio Sciences",
    Discipline.OTHERS: "Others",
}


@dataclass(frozen=True)
class StudyConfig:
    scale_min: float = 0.0
    scale_max: float = 100.0
    attributes: Mapping[PaqAttribute, tuple[str, ...]] = field(default_factory=dict)
    country_whitelist: tuple[str, ...] = ("SG", "MY")
    alpha: float = 0.05

    def __post_init__(self):
        if not self.scale_max > self.scale_min:
            raise ConfigError(f"scale_max ({self.scale_max}) must exceed scale_min ({self.scale_min})")
        if not 0.0 < self.alpha <= 0.5:
            raise ConfigError(f"alpha must lie in (0, 0.5], got {self.alpha}")
        if not self.country_whitelist:
            raise ConfigError("country_whitelist must not be empty")
        for attr, cands in self.attributes.items():
            if len(set(cands)) != len(cands):
                raise ConfigError(f"duplicate candidate for {attr.value}")
            if not cands:
                raise ConfigError(f"no candidates registered for {attr.value}")

    def normalize(self, raw: float) -> float:
        return (raw - self.scale_min) / (self.scale_max - self.scale_min)

    def denormalize(self, r: float) -> float:
        return self.scale_min + r * (self.scale_max - self.scale_min)

    def with_alpha(self, alpha: float) -> "StudyConfig":
        return StudyConfig(self.scale_min, self.scale_max, self.attributes, self.country_whitelist, alpha)

    def to_dict(self) -> dict:
        return {
            "scale_min": self.scale_min,
            "scale_max": self.scale_max,
            "country_whitelist": list(self.country_whitelist),
            "alpha": self.alpha,
            "attributes": {a.value: list(c) for a, c in self.attributes.items()},
        }


def config_from_dict(data: Mapping) -> StudyConfig:
    """Build a config from a JSON-style mapping.

    Keys: ``scale_min``, ``scale_max`` (default 0 and 100), ``alpha``
    (0.05), ``country_whitelist`` (["SG", "MY"]), and ``attributes``: an
    object mapping attribute name to its list of candidate labels.
    """
    known = {"scale_min", "scale_max", "alpha", "country_whitelist", "attributes"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    attrs: dict[PaqAttribute, tuple[str, ...]] = {}
    raw_attrs = data.get("attributes", {})
    if not isinstance(raw_attrs, Mapping):
        raise ConfigError("'attributes' must map attribute names to candidate lists")
    for name, cands in raw_attrs.items():
        try:
            attr = PaqAttribute.parse(name)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if attr in attrs:
            raise ConfigError(f"attribute {attr.value} listed twice")
        if isinstance(cands, str) or not isinstance(cands, Sequence):
            raise ConfigError(f"candidates for {name} must be a list")
        attrs[attr] = tuple(str(c) for c in cands)
    try:
        return StudyConfig(
            scale_min=float(data.get("scale_min", 0.0)),
            scale_max=float(data.get("scale_max", 100.0)),
            attributes=attrs,
            country_whitelist=tuple(data.get("country_whitelist", ("SG", "MY"))),
            alpha=float(data.get("alpha", 0.05)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path: str | Path) -> StudyConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not isinstance(data, Mapping):
        raise ConfigError(f"{path}: config must be a JSON object")
    return config_from_dict(data)


@dataclass(frozen=True)
class Respondent:
    respondent_id: str
    ccr: str
    stay_outside_band: StayBand | None = None
    ilr_zsm: int | None = None
    ilr_eng: int | None = None
    discipline: Discipline | None = None

    @property
    def has_demographics(self) -> bool:
        return None not in (self.stay_outside_band, self.ilr_zsm, self.ilr_eng, self.discipline)


@dataclass(frozen=True)
class ExclusionReport:
    total: int
    retained: int
    excluded: int
    excluded_ids: tuple[str, ...]

    @property
    def excluded_pct(self) -> float:
        return 100.0 * self.excluded / self.total if self.total else 0.0

    def summary(self) -> str:
        return f"retained {self.retained}, excluded {self.excluded} ({self.excluded_pct:.2f}%)"


def _read_csv(path: Path, columns: Sequence[str]) -> list[tuple[int, dict[str, str]]]:
    try:
        fh = open(path, newline="", encoding="utf-8-sig")
    except OSError as exc:
        raise IngestError(str(exc), path=str(path)) from None
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise IngestError("missing header row", row=1, path=str(path))
        header = [h.strip() for h in reader.fieldnames]
        missing = [c for c in columns if c not in header]
        if missing:
            raise IngestError(f"missing columns {missing}", row=1, path=str(path))
        reader.fieldnames = header
        rows = []
        for i, row in enumerate(reader, start=2):
            if None in row:
                raise IngestError("too many fields", row=i, path=str(path))
            rows.append((i, {k: (v or "").strip() for k, v in row.items()}))
        return rows


def _parse_respondent(line: int, row: Mapping[str, str], path: str) -> Respondent:
    def ilr(key):
        text = row[key]
        try:
            value = int(text)
        except ValueError:
            raise IngestError(f"{key} must be an integer 0-5, got {text!r}", line, path) from None
        if not 0 <= value <= 5:
            raise IngestError(f"{key} must lie in 0-5, got {value}", line, path)
        return value

    if not row["respondent_id"]:
        raise IngestError("empty respondent_id", line, path)
    try:
        stay = StayBand.parse(row["stay_outside_band"])
        disc = Discipline(row["discipline"])
    except ValueError as exc:
        raise IngestError(str(exc), line, path) from None
    return Respondent(row["respondent_id"], row["ccr"], stay, ilr("ilr_zsm"), ilr("ilr_eng"), disc)


def load_respondents(path: str | Path) -> list[Respondent]:
    path = Path(path)
    seen: set[str] = set()
    out = []
    for line, row in _read_csv(path, RESPONDENT_COLUMNS):
        resp = _parse_respondent(line, row, str(path))
        if resp.respondent_id in seen:
            raise IngestError(f"duplicate respondent {resp.respondent_id!r}", line, str(path))
        seen.add(resp.respondent_id)
        out.append(resp)
    return sorted(out, key=lambda r: r.respondent_id)


def load_responses(
    path: str | Path,
    config: StudyConfig,
    respondents_path: str | Path | None = None,
) -> tuple[list[RatingRecord], list[Respondent]]:
    """Parse and validate a long-format response file.

    Raw ratings are mapped affinely onto [0, 1] using the configured scale.
    Returns records sorted by (respondent, attribute, candidate) and the
    respondents, taken from ``respondents_path`` when given and otherwise
    reconstructed (without demographics) from the response rows.
    """
    path = Path(path)
    where = str(path)
    cand_attr: dict[str, PaqAttribute] = {}
    for attr, cands in config.attributes.items():
        for c in cands:
            if c in cand_attr:
                raise ConfigError(f"candidate {c!r} registered under two attributes")
            cand_attr[c] = attr

    cells: dict[tuple[str, str], dict[str, float]] = {}
    first_line: dict[tuple[str, str], int] = {}
    ccr_of: dict[str, str] = {}
    attr_of: dict[tuple[str, str], PaqAttribute] = {}
    for line, row in _read_csv(path, RESPONSE_COLUMNS):
        rid, ccr = row["respondent_id"], row["ccr"]
        if not rid:
            raise IngestError("empty respondent_id", line, where)
        if not ccr:
            raise IngestError("empty ccr", line, where)
        try:
            attr = PaqAttribute.parse(row["attribute"])
        except ValueError as exc:
            raise IngestError(str(exc), line, where) from None
        cand = row["candidate"]
        if config.attributes:
            if attr not in config.attributes:
                raise IngestError(f"attribute {attr.value!r} not in the config registry", line, where)
            if cand_attr.get(cand) is not attr:
                raise IngestError(f"unknown candidate {cand!r} for attribute {attr.value!r}", line, where)
        elif not cand:
            raise IngestError("empty candidate", line, where)
        prompt = row["prompt"].lower()
        if prompt not in PROMPTS:
            raise IngestError(f"unknown prompt {row['prompt']!r}", line, where)
        if prompt in MAIN_ONLY_PROMPTS and axis_of(attr) is Axis.DERIVED:
            raise IngestError(f"prompt {prompt!r} is not defined for derived-axis attribute {attr.value!r}",
                              line, where)
        try:
            raw = float(row["raw_rating"])
        except ValueError:
            raise IngestError(f"raw_rating {row['raw_rating']!r} is not a number", line, where) from None
        if not config.scale_min <= raw <= config.scale_max:
            raise IngestError(
                f"raw_rating {raw:g} outside scale [{config.scale_min:g}, {config.scale_max:g}]", line, where)
        if ccr_of.setdefault(rid, ccr) != ccr:
            raise IngestError(f"respondent {rid!r} reported with two countries", line, where)
        key = (rid, cand)
        if attr_of.setdefault(key, attr) is not attr:
            raise IngestError(f"candidate {cand!r} used under two attributes", line, where)
        cell = cells.setdefault(key, {})
        first_line.setdefault(key, line)
        if prompt in cell:
            raise IngestError(f"duplicate rating for ({rid}, {cand}, {prompt})", line, where)
        cell[prompt] = config.normalize(raw)

    records = []
    for key in sorted(cells):
        rid, cand = key
        attr = attr_of[key]
        cell = cells[key]
        missing = [p for p in required_prompts(axis_of(attr)) if p not in cell]
        if missing:
            raise IngestError(f"missing prompt {missing[0]!r} for ({rid}, {cand})", first_line[key], where)
        records.append(RatingRecord(rid, cand, attr, ccr_of[rid], **{"r_" + p: v for p, v in cell.items()}))
    records.sort(key=lambda r: (r.respondent_id, ANALYSIS_ORDER.index(r.attribute), r.candidate_id))

    if respondents_path is not None:
        respondents = load_respondents(respondents_path)
        known = {r.respondent_id: r for r in respondents}
        for rid, ccr in sorted(ccr_of.items()):
            if rid not in known:
                raise IngestError(f"respondent {rid!r} missing from {respondents_path}", path=where)
            if known[rid].ccr != ccr:
                raise IngestError(f"respondent {rid!r}: ccr {ccr!r} disagrees with respondents file",
                                  path=where)
    else:
        respondents = [Respondent(rid, ccr) for rid, ccr in sorted(ccr_of.items())]
    return records, respondents


def filter_ccr(
    records: Iterable[RatingRecord],
    respondents: Iterable[Respondent],
    config: StudyConfig,
) -> tuple[list[RatingRecord], ExclusionReport]:
    """Keep only respondents whose country of residence is whitelisted."""
    people = list(respondents)
    allowed = set(config.country_whitelist)
    excluded = sorted(r.respondent_id for r in people if r.ccr not in allowed)
    retained_ids = {r.respondent_id for r in people if r.ccr in allowed}
    if not retained_ids:
        raise EmptyPopulationError("+".join(config.country_whitelist))
    kept = [rec for rec in records if rec.respondent_id in retained_ids]
    report = ExclusionReport(len(people), len(retained_ids), len(excluded), tuple(excluded))
    return kept, report


@dataclass(frozen=True)
class DemographicsTable:
    """Counts and within-country percentages.

    ``rows`` holds ``(section, label, {column: count})``; the column key is
    the country code, or ``(country, language)`` in the ILR section.
    """

    countries: tuple[str, ...]
    totals: Mapping[str, int]
    rows: tuple[tuple[str, str, Mapping], ...]

    def count(self, section: str, label: str, column) -> int:
        for sec, lab, counts in self.rows:
            if sec == section and lab == label:
                return counts.get(column, 0)
        raise KeyError((section, label))

    def percent(self, section: str, label: str, column) -> float:
        country = column[0] if isinstance(column, tuple) else column
        return 100.0 * self.count(section, label, column) / self.totals[country]

    def render(self) -> str:
        grand = sum(self.totals.values())
        lines = ["Current country of residence"]
        lines.append("  " + "  ".join(
            f"{c}: {self.totals[c]} ({100.0 * self.totals[c] / grand:.1f}%)" for c in self.countries))
        section = None
        for sec, label, counts in self.rows:
            if sec != section:
                lines.append(sec)
                section = sec
            cells = []
            for key in sorted(counts, key=self._column_order):
                n = counts[key]
                pct = self.percent(sec, label, key)
                name = key if isinstance(key, str) else f"{key[0]}/{key[1]}"
                cells.append(f"{name}: {n} ({pct:.1f}%)")
            lines.append(f"  {label:<20} " + "  ".join(cells))
        return "\n".join(lines)

    def _column_order(self, key):
        if isinstance(key, tuple):
            return (self.countries.index(key[0]), key[1] != "zsm")
        return (self.countries.index(key), False)


def demographics_summary(respondents: Iterable[Respondent], countries: Sequence[str] | None = None) -> DemographicsTable:
    """Counts by country of residence over stay band, ILR level per language and discipline."""
    people = sorted(respondents, key=lambda r: r.respondent_id)
    if not people:
        raise EmptyPopulationError("respondents")
    lacking = [r.respondent_id for r in people if not r.has_demographics]
    if lacking:
        raise IngestError(f"no demographics for respondents {lacking[:5]}")
    present = Counter(r.ccr for r in people)
    if countries is None:
        countries = sorted(present)
    cols = tuple(c for c in countries if c in present) + tuple(sorted(set(present) - set(countries)))
    rows = []
    for band, label in STAY_LABELS.items():
        rows.append(("Length of stay outside MY/SG", label,
                     {c: sum(1 for r in people if r.ccr == c and r.stay_outside_band is band) for c in cols}))
    for level, label in ILR_LABELS.items():
        counts = {}
        for c in cols:
            counts[(c, "zsm")] = sum(1 for r in people if r.ccr == c and r.ilr_zsm == level)
            counts[(c, "eng")] = sum(1 for r in people if r.ccr == c and r.ilr_eng == level)
        rows.append(("Language Proficiency (ILR)", label, counts))
    for disc, label in DISCIPLINE_LABELS.items():
        rows.append(("Discipline", label,
                     {c: sum(1 for r in people if r.ccr == c and r.discipline is disc) for c in cols}))
    return DemographicsTable(cols, {c: present[c] for c in cols}, tuple(rows))
