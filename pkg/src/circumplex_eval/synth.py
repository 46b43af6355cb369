"""Seeded synthetic survey generator.

Random stream
-------------
SplitMix64 over unsigned 64-bit integers (all arithmetic mod 2**64)::

    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)

A uniform double is ``(next() >> 11) * 2**-53``.  Draws happen in this
order: for each country (sorted), for each respondent ``1..n``, for each
attribute (table order) and registered candidate, for each prompt the axis
requires (``appr, undr, asso_cw, asso_ccw, impl_cw, impl_ccw[, anto, bias]``),
one draw; then, once every rating is drawn, the demographics of each
respondent in the same order (stay band, ILR zsm, ILR eng, discipline).

Rating distributions
--------------------
``{"kind": "point_mass", "value": v}``, ``{"kind": "uniform_grid", "lo": a,
"hi": b, "step": s}`` (uniform over ``a, a+s, ..., <= b``), and
``{"kind": "two_point", "a": x, "b": y, "weight": w}`` (``x`` with
probability ``w``).  Each draw consumes exactly one uniform.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .circumplex import ANALYSIS_ORDER, PaqAttribute, axis_of
from .errors import ConfigError
from .ingest import (
    RESPONDENT_COLUMNS,
    RESPONSE_COLUMNS,
    Discipline,
    StayBand,
    StudyConfig,
    config_from_dict,
)
from .scoring import required_prompts

MASK64 = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def choice_index(self, n: int) -> int:
        return min(int(self.uniform() * n), n - 1)


@dataclass(frozen=True)
class PointMass:
    value: float

    def sample(self, rng: SplitMix64) -> float:
        rng.uniform()
        return self.value

    def bounds(self):
        return self.value, self.value


@dataclass(frozen=True)
class UniformGrid:
    lo: float
    hi: float
    step: float

    def __post_init__(self):
        if self.step <= 0 or self.hi < self.lo:
            raise ConfigError(f"invalid uniform grid {self}")

    @property
    def size(self) -> int:
        return int(math.floor((self.hi - self.lo) / self.step + 1e-9)) + 1

    def sample(self, rng: SplitMix64) -> float:
        return self.lo + rng.choice_index(self.size) * self.step

    def bounds(self):
        return self.lo, self.lo + (self.size - 1) * self.step


@dataclass(frozen=True)
class TwoPoint:
    a: float
    b: float
    weight: float

    def __post_init__(self):
        if not 0.0 <= self.weight <= 1.0:
            raise ConfigError(f"two_point weight must lie in [0, 1], got {self.weight}")

    def sample(self, rng: SplitMix64) -> float:
        return self.a if rng.uniform() < self.weight else self.b

    def bounds(self):
        return min(self.a, self.b), max(self.a, self.b)


def distribution_from_dict(d: Mapping):
    kind = d.get("kind")
    try:
        if kind == "point_mass":
            return PointMass(float(d["value"]))
        if kind == "uniform_grid":
            return UniformGrid(float(d["lo"]), float(d["hi"]), float(d["step"]))
        if kind == "two_point":
            return TwoPoint(float(d["a"]), float(d["b"]), float(d["weight"]))
    except KeyError as exc:
        raise ConfigError(f"distribution {dict(d)} lacks {exc}") from None
    raise ConfigError(f"unknown distribution kind {kind!r}")


@dataclass(frozen=True)
class Override:
    dist: object
    country: str | None = None
    attribute: PaqAttribute | None = None
    candidate: str | None = None
    prompt: str | None = None

    def matches(self, country, attribute, candidate, prompt) -> bool:
        return ((self.country is None or self.country == country)
                and (self.attribute is None or self.attribute is attribute)
                and (self.candidate is None or self.candidate == candidate)
                and (self.prompt is None or self.prompt == prompt))


@dataclass(frozen=True)
class GeneratorSpec:
    seed: int
    respondents_per_country: Mapping[str, int]
    config: StudyConfig
    default: object = field(default_factory=lambda: UniformGrid(0.0, 100.0, 1.0))
    overrides: tuple[Override, ...] = ()

    def __post_init__(self):
        if not self.config.attributes:
            raise ConfigError("generator spec needs a candidate registry")
        for dist in [self.default] + [o.dist for o in self.overrides]:
            lo, hi = dist.bounds()
            if lo < self.config.scale_min or hi > self.config.scale_max:
                raise ConfigError(f"{dist} leaves the raw scale "
                                  f"[{self.config.scale_min:g}, {self.config.scale_max:g}]")
        for c, n in self.respondents_per_country.items():
            if n < 0:
                raise ConfigError(f"negative respondent count for {c}")

    def distribution(self, country, attribute, candidate, prompt):
        chosen = self.default
        for o in self.overrides:
            if o.matches(country, attribute, candidate, prompt):
                chosen = o.dist
        return chosen

    def with_seed(self, seed: int) -> "GeneratorSpec":
        return GeneratorSpec(seed, self.respondents_per_country, self.config, self.default, self.overrides)


def spec_from_dict(data: Mapping) -> GeneratorSpec:
    """Keys: ``seed``, ``respondents_per_country``, ``default``, ``overrides``
    plus the study-config keys (``scale_min``, ``scale_max``, ``attributes``,
    ``country_whitelist``, ``alpha``)."""
    cfg_keys = {"scale_min", "scale_max", "alpha", "country_whitelist", "attributes"}
    own = {"seed", "respondents_per_country", "default", "overrides"}
    unknown = set(data) - cfg_keys - own
    if unknown:
        raise ConfigError(f"unknown generator spec keys: {sorted(unknown)}")
    config = config_from_dict({k: v for k, v in data.items() if k in cfg_keys})
    overrides = []
    for o in data.get("overrides", ()):
        attr = o.get("attribute")
        overrides.append(Override(
            distribution_from_dict(o["dist"]),
            country=o.get("country"),
            attribute=PaqAttribute.parse(attr) if attr else None,
            candidate=o.get("candidate"),
            prompt=o.get("prompt"),
        ))
    default = distribution_from_dict(data["default"]) if "default" in data else UniformGrid(
        config.scale_min, config.scale_max, (config.scale_max - config.scale_min) / 100.0)
    return GeneratorSpec(
        seed=int(data.get("seed", 0)),
        respondents_per_country=dict(data.get("respondents_per_country", {"MY": 30, "SG": 33})),
        config=config,
        default=default,
        overrides=tuple(overrides),
    )


def load_spec(path: str | Path) -> GeneratorSpec:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return spec_from_dict(data)


def _fmt(v: float) -> str:
    return f"{v:.10g}"


STAY_CHOICES = tuple(StayBand)
DISCIPLINE_CHOICES = tuple(Discipline)
ILR_CHOICES = (2, 3, 4, 5)


def generate(spec: GeneratorSpec) -> tuple[str, str]:
    """Return the text of ``responses.csv`` and ``respondents.csv``."""
    rng = SplitMix64(spec.seed)
    people = []
    for country in sorted(spec.respondents_per_country):
        n = spec.respondents_per_country[country]
        width = max(3, len(str(n)))
        people += [(f"{country}{i:0{width}d}", country) for i in range(1, n + 1)]

    registry = [(a, spec.config.attributes[a]) for a in ANALYSIS_ORDER if a in spec.config.attributes]
    resp_buf = io.StringIO()
    w = csv.writer(resp_buf, lineterminator="\n")
    w.writerow(RESPONSE_COLUMNS)
    for rid, country in people:
        for attr, cands in registry:
            for cand in cands:
                for prompt in required_prompts(axis_of(attr)):
                    v = spec.distribution(country, attr, cand, prompt).sample(rng)
                    w.writerow([rid, country, attr.value, cand, prompt, _fmt(v)])

    demo_buf = io.StringIO()
    w = csv.writer(demo_buf, lineterminator="\n")
    w.writerow(RESPONDENT_COLUMNS)
    for rid, country in people:
        stay = STAY_CHOICES[rng.choice_index(len(STAY_CHOICES))]
        zsm = ILR_CHOICES[rng.choice_index(len(ILR_CHOICES))]
        eng = ILR_CHOICES[rng.choice_index(len(ILR_CHOICES))]
        disc = DISCIPLINE_CHOICES[rng.choice_index(len(DISCIPLINE_CHOICES))]
        w.writerow([rid, country, stay.value, zsm, eng, disc.value])
    return resp_buf.getvalue(), demo_buf.getvalue()


def write_dataset(spec: GeneratorSpec, out_dir: str | Path) -> dict[str, Path]:
    """Write responses.csv, respondents.csv and config.json into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    responses, respondents = generate(spec)
    paths = {
        "responses": out / "responses.csv",
        "respondents": out / "respondents.csv",
        "config": out / "config.json",
    }
    paths["responses"].write_text(responses, encoding="utf-8")
    paths["respondents"].write_text(respondents, encoding="utf-8")
    paths["config"].write_text(json.dumps(spec.config.to_dict(), indent=2) + "\n", encoding="utf-8")
    return paths
