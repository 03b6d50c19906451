from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Mapping, Optional, Sequence, Tuple, Union

# local
from .errors import DomainMismatchError, StructuralError


@dataclass(frozen=True)
class Point(object):
    """A point of the unit interval, stored as an exact rational."""

    value: Fraction

    def __post_init__(self):
        value = Fraction(self.value)
        if value < 0 or value > 1:
            raise DomainMismatchError(
                "Point value {} lies outside the unit interval".format(value)
            )

        object.__setattr__(self, "value", value)

    def __repr__(self) -> str:
        return "Point({})".format(self.value)


@dataclass(frozen=True)
class Star(object):
    """The distinguished element that every threshold labels 0."""

    def __repr__(self) -> str:
        return "Star"


@dataclass(frozen=True)
class Atom(object):
    id: int

    def __post_init__(self):
        if isinstance(self.id, bool) or int(self.id) != self.id or self.id < 0:
            raise DomainMismatchError(
                "Atom id must be a non-negative integer, got {}".format(self.id)
            )

        object.__setattr__(self, "id", int(self.id))

    def __repr__(self) -> str:
        return "Atom({})".format(self.id)


Example = Union[Point, Star, Atom]

STAR = Star()


def is_example(value: Any) -> bool:
    return isinstance(value, (Point, Star, Atom))


# Total order used wherever examples of mixed kinds have to be sorted:
# points by value, then the star, then atoms by id.
def example_sort_key(x: Example) -> Tuple[int, Fraction]:
    if isinstance(x, Point):
        return (0, x.value)

    if isinstance(x, Star):
        return (1, Fraction(0))

    return (2, Fraction(x.id))


def example_to_json(x: Example) -> Mapping[str, Any]:
    if isinstance(x, Point):
        return {"point": "{}/{}".format(x.value.numerator, x.value.denominator)}

    if isinstance(x, Star):
        return {"star": True}

    if isinstance(x, Atom):
        return {"atom": x.id}

    raise StructuralError("Cannot serialize {!r} as an example".format(x))


def example_from_json(data: Mapping[str, Any]) -> Example:
    if "point" in data:
        return Point(Fraction(str(data["point"])))

    if "star" in data:
        if data["star"] is not True:
            raise StructuralError("The star marker must be 'true'")
        return STAR

    if "atom" in data:
        return Atom(data["atom"])

    raise StructuralError("Unknown example encoding {}".format(dict(data)))


def example_to_text(x: Example) -> str:
    if isinstance(x, Point):
        return str(x.value)

    if isinstance(x, Star):
        return "star"

    return "atom:{}".format(x.id)


def parse_example(value: Any) -> Example:
    """Reads an example from a configuration value.

    Accepts an already constructed example, the JSON form, the text form used in
    the CSV output ("1/4", "star", "atom:3") or a plain number.
    """
    if is_example(value):
        return value

    if isinstance(value, Mapping):
        return example_from_json(value)

    if isinstance(value, bool):
        raise StructuralError("Cannot read an example from {!r}".format(value))

    if isinstance(value, (int, Fraction)):
        return Point(Fraction(value))

    if isinstance(value, float):
        return Point(Fraction(value))

    if isinstance(value, str):
        text = value.strip()
        if text == "star":
            return STAR

        if text.startswith("atom:"):
            return Atom(int(text[len("atom:"):]))

        try:
            return Point(Fraction(text))
        except ValueError as e:
            raise StructuralError("Cannot read an example from '{}'".format(text)) from e

    raise StructuralError("Cannot read an example from {!r}".format(value))


def decoy_for(x: Example, domain: Optional[Sequence[Example]] = None) -> Example:
    """Returns an example that is guaranteed to differ from x.

    Without a domain the decoy is the star (or the point 1 when x is the star
    itself). With a finite domain the decoy is the last domain element that
    differs from x, so that the decoy can still be evaluated by table classes.
    """
    if domain is None:
        return STAR if x != STAR else Point(Fraction(1))

    for candidate in reversed(domain):
        if candidate != x:
            return candidate

    raise DomainMismatchError(
        "The domain {} has no element different from {!r}".format(list(domain), x)
    )
