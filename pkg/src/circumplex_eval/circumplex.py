"""The octant circumplex of perceived affective quality attributes.

Angles follow the ISO layout: pleasant at 0 degrees, then every 45 degrees
through vibrant, eventful, chaotic, annoying, monotonous, uneventful and calm.
The clockwise-labelled neighbour sits at ``angle + 45`` and the
counter-clockwise-labelled neighbour at ``angle - 45``.  Only report captions
depend on that labelling; every score is symmetric in the two neighbours.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass


class Axis(str, enum.Enum):
    MAIN = "Main"
    DERIVED = "Derived"


class PaqAttribute(str, enum.Enum):
    PLEASANT = "pleasant"
    VIBRANT = "vibrant"
    EVENTFUL = "eventful"
    CHAOTIC = "chaotic"
    ANNOYING = "annoying"
    MONOTONOUS = "monotonous"
    UNEVENTFUL = "uneventful"
    CALM = "calm"

    @property
    def angle_deg(self) -> int:
        return _ANGLES[self]

    @property
    def axis(self) -> Axis:
        return axis_of(self)

    @classmethod
    def parse(cls, name: str) -> "PaqAttribute":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ValueError(f"unknown PAQ attribute {name!r}") from None


_ANGLES = {attr: 45 * i for i, attr in enumerate(PaqAttribute)}
_BY_ANGLE = {angle: attr for attr, angle in _ANGLES.items()}

MAIN_ATTRIBUTES = frozenset(
    {PaqAttribute.PLEASANT, PaqAttribute.EVENTFUL, PaqAttribute.ANNOYING, PaqAttribute.UNEVENTFUL}
)
DERIVED_ATTRIBUTES = frozenset(PaqAttribute) - MAIN_ATTRIBUTES

# Fixed reporting order for attributes.
ANALYSIS_ORDER = (
    PaqAttribute.PLEASANT,
    PaqAttribute.ANNOYING,
    PaqAttribute.EVENTFUL,
    PaqAttribute.UNEVENTFUL,
    PaqAttribute.CALM,
    PaqAttribute.CHAOTIC,
    PaqAttribute.MONOTONOUS,
    PaqAttribute.VIBRANT,
)


@dataclass(frozen=True)
class Neighborhood:
    attribute: PaqAttribute
    neighbor_cw: PaqAttribute
    neighbor_ccw: PaqAttribute
    antipode: PaqAttribute


def attribute_at(angle_deg: int) -> PaqAttribute:
    return _BY_ANGLE[angle_deg % 360]


def axis_of(attribute: PaqAttribute) -> Axis:
    return Axis.MAIN if attribute in MAIN_ATTRIBUTES else Axis.DERIVED


def antipode(attribute: PaqAttribute) -> PaqAttribute:
    return attribute_at(attribute.angle_deg + 180)


def neighbors(attribute: PaqAttribute) -> Neighborhood:
    angle = attribute.angle_deg
    return Neighborhood(
        attribute=attribute,
        neighbor_cw=attribute_at(angle + 45),
        neighbor_ccw=attribute_at(angle - 45),
        antipode=attribute_at(angle + 180),
    )
