import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from typing import Any, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

# local
from .errors import CapabilityError, DomainMismatchError, StructuralError
from .instance_space import (
    Example,
    Point,
    Star,
    example_from_json,
    example_to_json,
)

VC_DOMAIN_LIMIT = 20
LITTLESTONE_HYPOTHESIS_LIMIT = 64
LITTLESTONE_DOMAIN_LIMIT = 16
NATARAJAN_DOMAIN_LIMIT = 12


class HypothesisClass(ABC):

    @property
    @abstractmethod
    def label_count(self) -> int:
        pass

    # The label that hypothesis h assigns to x.
    @abstractmethod
    def evaluate(self, h: Any, x: Example) -> int:
        pass


class ThresholdClass(HypothesisClass):
    """h_a(x) = 1 if x is a point with x <= a, and 0 otherwise."""

    @property
    def label_count(self) -> int:
        return 2

    def evaluate(self, h: Fraction, x: Example) -> int:
        if isinstance(x, Star):
            return 0

        if not isinstance(x, Point):
            raise DomainMismatchError("Thresholds cannot label {!r}".format(x))

        return 1 if x.value <= h else 0

    def __repr__(self) -> str:
        return "ThresholdClass()"


class FiniteTable(HypothesisClass):
    """A finite class given by its behaviour table.

    Rows are hypotheses and columns are domain elements. A table that came out of
    a projection remembers the class it was projected from together with one
    representative hypothesis per row, so that rows can still be evaluated on
    examples outside the projected domain.
    """

    def __init__(
        self,
        domain: Sequence[Example],
        table: Union[np.ndarray, Sequence[Sequence[int]]],
        label_count: Optional[int] = None,
        source: Optional[HypothesisClass] = None,
        representatives: Optional[Sequence[Any]] = None,
    ):
        self.domain: Tuple[Example, ...] = tuple(domain)
        if len(self.domain) == 0:
            raise StructuralError("A finite class needs a non-empty domain")

        self.table = np.array(table, dtype=np.int64).reshape(-1, len(self.domain))
        if self.table.shape[0] == 0:
            raise StructuralError("A finite class needs at least one hypothesis")

        if np.any(self.table < 0):
            raise StructuralError("Labels must be non-negative")

        if np.unique(self.table, axis=0).shape[0] != self.table.shape[0]:
            raise StructuralError("Rows of a behaviour table must be pairwise distinct")

        largest = int(self.table.max()) if self.table.size > 0 else 0
        self._label_count = max(label_count or 2, largest + 1)

        self.source = source
        self.representatives = (
            tuple(representatives) if representatives is not None else None
        )
        if self.representatives is not None and len(self.representatives) != self.size:
            raise StructuralError("Need exactly one representative per row")

        self._columns = {}
        for index, x in enumerate(self.domain):
            self._columns.setdefault(x, index)

    @property
    def label_count(self) -> int:
        return self._label_count

    @property
    def size(self) -> int:
        return self.table.shape[0]

    def index_of(self, x: Example) -> int:
        if x not in self._columns:
            raise DomainMismatchError("{!r} is not part of the domain".format(x))

        return self._columns[x]

    def contains(self, x: Example) -> bool:
        return x in self._columns

    def evaluate(self, h: int, x: Example) -> int:
        if h < 0 or h >= self.size:
            raise StructuralError("Hypothesis index {} out of range".format(h))

        if x not in self._columns and self.source is not None:
            return self.source.evaluate(self.representatives[h], x)

        return int(self.table[h, self.index_of(x)])

    def restrict_rows(self, mask: np.ndarray) -> "FiniteTable":
        rows = np.flatnonzero(mask)
        return FiniteTable(
            self.domain,
            self.table[rows],
            self.label_count,
            self.source,
            [self.representatives[r] for r in rows]
            if self.representatives is not None
            else None,
        )

    def to_json(self) -> Mapping[str, Any]:
        return {
            "domain": [example_to_json(x) for x in self.domain],
            "table": self.table.tolist(),
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "FiniteTable":
        return cls([example_from_json(x) for x in data["domain"]], data["table"])

    def __repr__(self) -> str:
        return "FiniteTable({} hypotheses x {} examples)".format(
            self.size, len(self.domain)
        )


def evaluate(H: HypothesisClass, h: Any, x: Example) -> int:
    return H.evaluate(h, x)


def _project_thresholds(xs: Sequence[Example]) -> FiniteTable:
    for x in xs:
        if not isinstance(x, (Point, Star)):
            raise DomainMismatchError("Thresholds cannot label {!r}".format(x))

    values = sorted({x.value for x in xs if isinstance(x, Point)})
    rank = {v: index for index, v in enumerate(values)}

    # Stars get a rank beyond every row so that they are labelled 0 everywhere.
    ranks = np.array(
        [rank[x.value] if isinstance(x, Point) else len(values) + 1 for x in xs],
        dtype=np.int64,
    )
    rows = np.arange(len(values) + 1, dtype=np.int64)
    table = (ranks[np.newaxis, :] < rows[:, np.newaxis]).astype(np.int64)

    # One parameter per gap, from below every point to above every point.
    if len(values) == 0:
        representatives = [Fraction(-1)]
    else:
        representatives = [values[0] - 1]
        for lower, upper in zip(values, values[1:]):
            representatives.append((lower + upper) / 2)
        representatives.append(values[-1] + 1)

    return FiniteTable(xs, table, 2, ThresholdClass(), representatives)


def project(H: HypothesisClass, xs: Sequence[Example]) -> FiniteTable:
    xs = tuple(xs)
    if len(xs) == 0:
        raise StructuralError("Cannot project onto an empty sequence")

    if isinstance(H, ThresholdClass):
        return _project_thresholds(xs)

    if not isinstance(H, FiniteTable):
        raise DomainMismatchError("Cannot project {!r}".format(H))

    columns = [H.index_of(x) for x in xs]
    restricted = H.table[:, columns]

    # Keep the first row of every behaviour, in the original row order.
    _, first = np.unique(restricted, axis=0, return_index=True)
    kept = np.sort(first)

    if H.representatives is not None:
        source = H.source
        representatives = [H.representatives[r] for r in kept]
    else:
        source = H
        representatives = [int(r) for r in kept]

    return FiniteTable(xs, restricted[kept], H.label_count, source, representatives)


def _distinct_columns(table: np.ndarray) -> np.ndarray:
    if table.shape[1] == 0:
        return table

    _, first = np.unique(table, axis=1, return_index=True)
    return table[:, np.sort(first)]


def vc_dimension(H: FiniteTable) -> int:
    if len(H.domain) > VC_DOMAIN_LIMIT:
        raise CapabilityError(
            "VC dimension brute force supports at most {} domain points, got {}".format(
                VC_DOMAIN_LIMIT, len(H.domain)
            )
        )

    table = _distinct_columns(H.table)
    dimension = 0
    for size in range(1, table.shape[1] + 1):
        if 2**size > H.size:
            break

        shattered = False
        for subset in combinations(range(table.shape[1]), size):
            restricted = table[:, list(subset)]
            binary = restricted[np.all(restricted <= 1, axis=1)]
            if binary.shape[0] >= 2**size and np.unique(binary, axis=0).shape[0] == 2**size:
                shattered = True
                break

        # Shattering is hereditary, so no larger set can be shattered either.
        if not shattered:
            break

        dimension = size

    return dimension


class LittlestoneOracle(object):
    """Memoized Littlestone dimension of sub-classes of a finite table.

    Sub-classes are bit masks over the rows of the table. The empty class has
    dimension -1.
    """

    def __init__(self, H: FiniteTable):
        if H.size > LITTLESTONE_HYPOTHESIS_LIMIT or len(H.domain) > LITTLESTONE_DOMAIN_LIMIT:
            raise CapabilityError(
                "Littlestone brute force supports at most {} hypotheses and {} domain "
                "points, got {} and {}".format(
                    LITTLESTONE_HYPOTHESIS_LIMIT,
                    LITTLESTONE_DOMAIN_LIMIT,
                    H.size,
                    len(H.domain),
                )
            )

        self.table = H
        self.full_mask = (1 << H.size) - 1
        self.column_masks: List[Mapping[int, int]] = []
        for column in range(len(H.domain)):
            masks = {}
            for row in range(H.size):
                label = int(H.table[row, column])
                masks[label] = masks.get(label, 0) | (1 << row)
            self.column_masks.append(masks)

        self._dimension = lru_cache(maxsize=None)(self._compute)

    def restrict(self, mask: int, column: int, label: int) -> int:
        return mask & self.column_masks[column].get(label, 0)

    def dimension(self, mask: Optional[int] = None) -> int:
        return self._dimension(self.full_mask if mask is None else mask)

    def _compute(self, mask: int) -> int:
        count = bin(mask).count("1")
        if count == 0:
            return -1

        if count == 1:
            return 0

        ceiling = int(math.floor(math.log2(count)))
        best = 0
        for masks in self.column_masks:
            parts = [mask & m for m in masks.values() if mask & m]
            if len(parts) < 2:
                continue

            for first, second in combinations(parts, 2):
                value = 1 + min(self._dimension(first), self._dimension(second))
                if value > best:
                    best = value
                    if best >= ceiling:
                        return best

        return best


def littlestone_dimension(H: FiniteTable) -> int:
    return LittlestoneOracle(H).dimension()


def natarajan_dimension(H: FiniteTable) -> int:
    if len(H.domain) > NATARAJAN_DOMAIN_LIMIT:
        raise CapabilityError(
            "Natarajan brute force supports at most {} domain points, got {}".format(
                NATARAJAN_DOMAIN_LIMIT, len(H.domain)
            )
        )

    table = _distinct_columns(H.table)
    dimension = 0
    for size in range(1, table.shape[1] + 1):
        if 2**size > H.size:
            break

        shattered = False
        for subset in combinations(range(table.shape[1]), size):
            patterns = {tuple(int(v) for v in row) for row in table[:, list(subset)]}

            # Witness labels at each point come from the labels realized there;
            # swapping the pair at a point yields the same condition.
            pairs_per_point = [
                list(combinations(sorted({p[i] for p in patterns}), 2))
                for i in range(size)
            ]
            for witness in product(*pairs_per_point):
                if all(
                    tuple(witness[i][choice[i]] for i in range(size)) in patterns
                    for choice in product((0, 1), repeat=size)
                ):
                    shattered = True
                    break

            if shattered:
                break

        if not shattered:
            break

        dimension = size

    return dimension


@dataclass(frozen=True)
class ThresholdInterval(object):
    """Thresholds h_a with lo <= a < hi.

    lo is the largest point labelled 1 so far (or -inf) and hi the smallest
    point labelled 0 (or +inf). A star labelled 1 empties the space for good.
    """

    lo: Union[Fraction, float] = -math.inf
    hi: Union[Fraction, float] = math.inf
    star_violated: bool = False

    def is_empty(self) -> bool:
        return self.star_violated or not (self.lo < self.hi)

    def contains(self, a: Fraction) -> bool:
        return not self.is_empty() and self.lo <= a < self.hi


@dataclass(frozen=True)
class FiniteSubset(object):
    table: FiniteTable
    mask: Tuple[bool, ...]

    @classmethod
    def full(cls, table: FiniteTable) -> "FiniteSubset":
        return cls(table, tuple(True for _ in range(table.size)))

    def is_empty(self) -> bool:
        return not any(self.mask)

    def rows(self) -> np.ndarray:
        return np.flatnonzero(np.array(self.mask, dtype=bool))


VersionSpace = Union[ThresholdInterval, FiniteSubset]


def vs_restrict(V: VersionSpace, x: Example, y: int) -> VersionSpace:
    if isinstance(V, ThresholdInterval):
        if isinstance(x, Star):
            return V if y == 0 else ThresholdInterval(V.lo, V.hi, True)

        if not isinstance(x, Point):
            raise DomainMismatchError("Thresholds cannot label {!r}".format(x))

        if y == 1:
            return ThresholdInterval(max(V.lo, x.value), V.hi, V.star_violated)

        if y == 0:
            return ThresholdInterval(V.lo, min(V.hi, x.value), V.star_violated)

        # Thresholds never output labels other than 0 and 1.
        return ThresholdInterval(V.lo, V.hi, True)

    column = V.table.table[:, V.table.index_of(x)]
    mask = np.array(V.mask, dtype=bool) & (column == y)
    return FiniteSubset(V.table, tuple(bool(m) for m in mask))


def vs_exists(V: VersionSpace, x: Example, y: int) -> bool:
    return not vs_restrict(V, x, y).is_empty()


def threshold_shatter_check(V: VersionSpace, xs: Sequence[Example]) -> bool:
    xs = tuple(xs)
    for x in xs:
        if not isinstance(x, Point):
            raise StructuralError("Threshold shattering is checked on points only")

    for left, right in zip(xs, xs[1:]):
        if not left.value < right.value:
            raise StructuralError("Points must be strictly increasing")

    if V.is_empty():
        return False

    if isinstance(V, ThresholdInterval):
        # h_i needs x_i <= a < x_{i+1}; the last one only needs a >= x_k.
        uppers = [x.value for x in xs[1:]] + [math.inf]
        for x, upper in zip(xs, uppers):
            if not max(V.lo, x.value) < min(V.hi, upper):
                return False
        return True

    columns = [V.table.index_of(x) for x in xs]
    alive = V.table.table[V.rows()][:, columns]
    patterns = {tuple(int(v) for v in row) for row in alive}
    k = len(xs)
    return all(
        tuple(1 if j <= i else 0 for j in range(1, k + 1)) in patterns
        for i in range(1, k + 1)
    )
