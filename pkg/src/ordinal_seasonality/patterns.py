"""Ordinal-pattern encoding and counting for daily return series.

A window of D consecutive returns is summarized by the permutation listing
the day offsets from the worst return of the window up to the best: with
D=5, a week in which Monday is the lowest return, then Friday, Tuesday,
Thursday, and Wednesday the highest encodes as (0, 4, 1, 3, 2).  Pattern
ids are the 1-based lexicographic rank of the digit string, so 01234 is
pattern 1 and 43210 is pattern D!.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from itertools import permutations
from typing import Iterator

import numpy as np

from .errors import InvalidInputError

MAX_ORDER = 10

DEFAULT_TIE_WARN_FRACTION = 0.01


class TieRule(Enum):
    """How equal values inside a window are ranked."""

    EARLIER_LOW = "earlier-low"  # earlier day takes the lower position (stable)
    LATER_LOW = "later-low"


class TieRateWarning(UserWarning):
    """Raised when the share of tied windows makes pattern counts unreliable."""


class LowExpectedFrequencyWarning(UserWarning):
    """Chi-squared asymptotics are shaky below ~5 expected counts per cell."""


def _factorial(n: int) -> int:
    return math.factorial(n)


@dataclass(frozen=True)
class OrdinalPattern:
    """Permutation of day offsets ordered from worst to best return."""

    digits: tuple[int, ...]

    def __post_init__(self) -> None:
        d = len(self.digits)
        if d < 2:
            raise InvalidInputError(f"pattern needs at least 2 digits, got {d}")
        if d > MAX_ORDER:
            raise InvalidInputError(f"pattern order {d} exceeds supported maximum {MAX_ORDER}")
        if sorted(self.digits) != list(range(d)):
            raise InvalidInputError(f"digits {self.digits} are not a permutation of 0..{d - 1}")
        object.__setattr__(self, "digits", tuple(int(x) for x in self.digits))

    @property
    def order(self) -> int:
        return len(self.digits)

    def __str__(self) -> str:
        if self.order <= 10:
            return "".join(str(d) for d in self.digits)
        return ",".join(str(d) for d in self.digits)


def _validate_order(order: int) -> int:
    order = int(order)
    if order < 2 or order > MAX_ORDER:
        raise InvalidInputError(f"order must be in 2..{MAX_ORDER}, got {order}")
    return order


def _as_window(window) -> np.ndarray:
    w = np.asarray(window, dtype=float)
    if w.ndim != 1 or w.size < 2:
        raise InvalidInputError("window must be a 1-d sequence of at least 2 values")
    if w.size > MAX_ORDER:
        raise InvalidInputError(f"window length {w.size} exceeds supported maximum {MAX_ORDER}")
    if not np.all(np.isfinite(w)):
        raise InvalidInputError("window contains non-finite values")
    return w


def _digits_for_rows(rows: np.ndarray, tie_rule: TieRule) -> np.ndarray:
    """Digit matrix for a (n, D) block of windows, one pattern per row."""
    if tie_rule is TieRule.EARLIER_LOW:
        return np.argsort(rows, axis=1, kind="stable")
    # later index wins ties: sort the reversed row stably, then map back
    d = rows.shape[1]
    return d - 1 - np.argsort(rows[:, ::-1], axis=1, kind="stable")


def encode_window(window, tie_rule: TieRule = TieRule.EARLIER_LOW) -> OrdinalPattern:
    """Encode one window of returns into its ordinal pattern.

    ``digits[j]`` is the index (day offset) of the j-th smallest value.
    Equal values are ranked by ``tie_rule``; use :func:`window_has_ties`
    to detect whether the rule was actually exercised.
    """
    w = _as_window(window)
    digits = _digits_for_rows(w[None, :], tie_rule)[0]
    return OrdinalPattern(tuple(int(x) for x in digits))


def window_has_ties(window) -> bool:
    """True when at least two values in the window are exactly equal."""
    w = _as_window(window)
    return bool(np.unique(w).size < w.size)


def rank_pattern(pattern: OrdinalPattern) -> int:
    """1-based lexicographic rank of the pattern's digit string."""
    digits = pattern.digits
    d = len(digits)
    code = 0
    for j in range(d - 1):
        smaller_after = sum(1 for x in digits[j + 1 :] if x < digits[j])
        code += smaller_after * _factorial(d - 1 - j)
    return code + 1


def unrank_pattern(pattern_id: int, order: int) -> OrdinalPattern:
    """Inverse of :func:`rank_pattern` for the given order."""
    order = _validate_order(order)
    pattern_id = int(pattern_id)
    if not 1 <= pattern_id <= _factorial(order):
        raise InvalidInputError(f"pattern id {pattern_id} out of range 1..{order}!")
    rem = pattern_id - 1
    available = list(range(order))
    digits = []
    for j in range(order):
        f = _factorial(order - 1 - j)
        q, rem = divmod(rem, f)
        digits.append(available.pop(q))
    return OrdinalPattern(tuple(digits))


def all_patterns(order: int) -> Iterator[OrdinalPattern]:
    """All D! patterns in id order (itertools emits permutations lexicographically)."""
    order = _validate_order(order)
    for perm in permutations(range(order)):
        yield OrdinalPattern(perm)


def _ranks_for_digit_rows(digit_rows: np.ndarray) -> np.ndarray:
    """Vectorized Lehmer rank (1-based) for a (n, D) matrix of digit rows."""
    n, d = digit_rows.shape
    code = np.zeros(n, dtype=np.int64)
    for j in range(d - 1):
        smaller_after = (digit_rows[:, j + 1 :] < digit_rows[:, j : j + 1]).sum(axis=1)
        code += smaller_after.astype(np.int64) * _factorial(d - 1 - j)
    return code + 1


class PatternFamily(Enum):
    """Named pattern subsets expressing one seasonal feature."""

    MONDAY_LARGEST = "monday-largest"
    MONDAY_WORST_FRIDAY_BEST = "monday-worst-friday-best"


def pattern_family(kind: PatternFamily, order: int = 5) -> frozenset[int]:
    """Pattern ids in the family, for windows starting on Monday (day 0).

    ``MONDAY_LARGEST`` selects patterns whose last digit is 0 (Monday holds
    the best return of the week), (D-1)! ids.  ``MONDAY_WORST_FRIDAY_BEST``
    selects first digit 0 and last digit D-1, (D-2)! ids.
    """
    order = _validate_order(order)
    if order < 3:
        raise InvalidInputError("pattern families need order >= 3")
    ids = []
    for i, perm in enumerate(permutations(range(order)), start=1):
        if kind is PatternFamily.MONDAY_LARGEST:
            if perm[-1] == 0:
                ids.append(i)
        elif kind is PatternFamily.MONDAY_WORST_FRIDAY_BEST:
            if perm[0] == 0 and perm[-1] == order - 1:
                ids.append(i)
        else:  # pragma: no cover - enum is closed
            raise InvalidInputError(f"unknown family {kind!r}")
    return frozenset(ids)


@dataclass
class PatternDistribution:
    """Absolute frequency of every pattern of a given order.

    ``counts[k]`` is the number of windows encoding to pattern id ``k + 1``.
    """

    order: int
    counts: np.ndarray
    windows: int
    ties_observed: int = 0
    dropped_points: int = 0
    label: str = ""

    def __post_init__(self) -> None:
        self.order = _validate_order(self.order)
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (_factorial(self.order),):
            raise InvalidInputError(
                f"counts must have length {self.order}! = {_factorial(self.order)}"
            )
        if (counts < 0).any():
            raise InvalidInputError("counts must be non-negative")
        if int(counts.sum()) != int(self.windows):
            raise InvalidInputError("counts must sum to the window count")
        if self.ties_observed < 0:
            raise InvalidInputError("ties_observed must be non-negative")
        self.counts = counts
        self.windows = int(self.windows)

    def relative(self) -> np.ndarray:
        """Relative frequency per pattern id."""
        if self.windows == 0:
            return np.zeros_like(self.counts, dtype=float)
        return self.counts / float(self.windows)

    def family_count(self, ids) -> int:
        idx = np.asarray(sorted(ids), dtype=np.int64) - 1
        return int(self.counts[idx].sum())

    def family_frequency(self, ids) -> float:
        if self.windows == 0:
            raise InvalidInputError("distribution has no windows")
        return self.family_count(ids) / float(self.windows)


def count_windows(
    windows: np.ndarray,
    tie_rule: TieRule = TieRule.EARLIER_LOW,
    tie_warn_fraction: float = DEFAULT_TIE_WARN_FRACTION,
    label: str = "",
    dropped_points: int = 0,
) -> PatternDistribution:
    """Count patterns over an explicit (n, D) block of windows."""
    rows = np.asarray(windows, dtype=float)
    if rows.ndim != 2 or rows.shape[0] < 1:
        raise InvalidInputError("windows must be a non-empty (n, D) array")
    order = _validate_order(rows.shape[1])
    if not np.all(np.isfinite(rows)):
        raise InvalidInputError("windows contain non-finite values")

    digit_rows = _digits_for_rows(rows, tie_rule)
    ids = _ranks_for_digit_rows(digit_rows)
    counts = np.bincount(ids - 1, minlength=_factorial(order)).astype(np.int64)

    sorted_rows = np.sort(rows, axis=1)
    ties = int((np.diff(sorted_rows, axis=1) == 0).any(axis=1).sum())

    n = rows.shape[0]
    if ties and tie_warn_fraction is not None and ties > tie_warn_fraction * n:
        warnings.warn(
            f"{ties} of {n} windows contain tied values; "
            "ordinal statistics assume continuously distributed returns",
            TieRateWarning,
            stacklevel=2,
        )
    return PatternDistribution(
        order=order,
        counts=counts,
        windows=n,
        ties_observed=ties,
        dropped_points=dropped_points,
        label=label,
    )


def count_patterns(
    series,
    order: int = 5,
    stride: int | None = None,
    tie_rule: TieRule = TieRule.EARLIER_LOW,
    tie_warn_fraction: float = DEFAULT_TIE_WARN_FRACTION,
) -> PatternDistribution:
    """Count ordinal patterns over non-overlapping (or strided) windows.

    ``series`` may be a plain array or anything with a ``values`` attribute.
    The default stride equals the order, the week-partition convention; any
    trailing values too short for a full window are dropped and reported in
    ``dropped_points``.
    """
    values = np.asarray(getattr(series, "values", series), dtype=float)
    label = str(getattr(series, "label", ""))
    order = _validate_order(order)
    if values.ndim != 1:
        raise InvalidInputError("series must be one-dimensional")
    if values.size < order:
        raise InvalidInputError(f"series of length {values.size} is shorter than order {order}")
    if not np.all(np.isfinite(values)):
        raise InvalidInputError("series contains non-finite values")
    stride = order if stride is None else int(stride)
    if stride < 1:
        raise InvalidInputError("stride must be >= 1")

    n_windows = (values.size - order) // stride + 1
    starts = np.arange(n_windows) * stride
    rows = values[starts[:, None] + np.arange(order)[None, :]]
    dropped = values.size - (starts[-1] + order) if n_windows else values.size
    return count_windows(
        rows,
        tie_rule=tie_rule,
        tie_warn_fraction=tie_warn_fraction,
        label=label,
        dropped_points=int(dropped),
    )
