# =================================================================
#
# Authors: Bernhard Mallinger <bernhard.mallinger@eox.at>
#
# Copyright (C) 2020 EOX IT Services GmbH <https://eox.at>
#
# Permission is hereby granted, free of charge, to any person
# obtaining a copy of this software and associated documentation
# files (the "Software"), to deal in the Software without
# restriction, including without limitation the rights to use,
# copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the
# Software is furnished to do so, subject to the following
# conditions:
#
# The above copyright notice and this permission notice shall be
# included in all copies or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND,
# EXPRESS OR IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES
# OF MERCHANTABILITY, FITNESS FOR A PARTICULAR PURPOSE AND
# NONINFRINGEMENT. IN NO EVENT SHALL THE AUTHORS OR COPYRIGHT
# HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER LIABILITY,
# WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING
# FROM, OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR
# OTHER DEALINGS IN THE SOFTWARE.
#
# =================================================================

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import logging
import threading
from typing import Optional, Sequence, Union

import galois

from .algebra import PolyMatrix
from .common import (
    BudgetExceededError,
    DimensionMismatchError,
    Exponent,
    PreconditionError,
    variable_name,
)
from .nisan import (
    SpanningProfile,
    build_profile,
    dependency_combination,
    profile_matrices,
    zero_test,
)
from .roabp_core import (
    DensePoly,
    Roabp,
    coeff,
    coeff_operator,
    expand_dense,
    negate,
)


LOGGER = logging.getLogger(__name__)


DEFAULT_WIDTH_CAP = 10**4


@dataclass(frozen=True, eq=False)
class SumInstance:
    summands: tuple[Roabp, ...]

    def __post_init__(self):
        object.__setattr__(self, "summands", tuple(self.summands))
        if not self.summands:
            raise PreconditionError(user_msg="a sum needs at least one summand")
        first = self.summands[0]
        for summand in self.summands:
            if (summand.n, summand.d) != (first.n, first.d):
                raise DimensionMismatchError(
                    user_msg=f"summand with (n, d) = {(summand.n, summand.d)}, "
                    f"expected {(first.n, first.d)}"
                )
            summand.require_scalar("a sum of ROABPs")

    @property
    def c(self) -> int:
        return len(self.summands)

    @property
    def n(self) -> int:
        return self.summands[0].n

    @property
    def d(self) -> int:
        return self.summands[0].d

    @property
    def width(self) -> int:
        return max(summand.width for summand in self.summands)

    def expand_dense(self) -> DensePoly:
        dense = [expand_dense(summand) for summand in self.summands]
        total = dense[0]
        for p in dense[1:]:
            total = total + p
        return total


@dataclass
class PitStats:
    """Dependency verifications per recursion level (keyed by summand count c)."""

    dependencies: dict[int, int] = field(default_factory=dict)
    zero_tests: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def record_dependency(self, level: int) -> None:
        with self._lock:
            self.dependencies[level] = self.dependencies.get(level, 0) + 1

    def record_zero_test(self) -> None:
        with self._lock:
            self.zero_tests += 1


@dataclass(frozen=True)
class EquivalenceReport:
    equivalent: bool
    failing_layer: Optional[int] = None
    failing_dependency: Optional[Exponent] = None
    final_scalars: Optional[tuple[int, int]] = None


def _check_width(r: Roabp, width_cap: int) -> None:
    largest = max(layer.rows * layer.cols for layer in r.layers)
    if largest > width_cap:
        raise BudgetExceededError(
            user_msg=f"recursion needs a layer matrix with {largest} entries, "
            f"width cap is {width_cap}"
        )


class SumOracle:
    """Dependency queries about a sum of ROABPs, answered by recursing on c - 1."""

    def __init__(
        self,
        summands: Sequence[Roabp],
        order: Sequence[int],
        width_cap: int,
        stats: PitStats,
    ) -> None:
        self.summands = tuple(summands)
        self.order = tuple(order)
        self.width_cap = width_cap
        self.stats = stats

    def dependency_holds(
        self, k: int, b: Exponent, span: Sequence[Exponent], gamma: galois.FieldArray
    ) -> bool:
        combinations = []
        for summand in self.summands:
            combination = dependency_combination(summand, self.order[:k], b, span, gamma)
            _check_width(combination, self.width_cap)
            combinations.append(combination)
        return sum_zero_test(
            SumInstance(summands=tuple(combinations)),
            width_cap=self.width_cap,
            stats=self.stats,
        )

    def full_exponent(self, prefix: Exponent) -> Exponent:
        a = [0] * self.summands[0].n
        for var, e in zip(self.order, prefix):
            a[var] = e
        return tuple(a)

    def final_scalar(self, prefix: Exponent) -> galois.FieldArray:
        a = self.full_exponent(prefix)
        total = coeff(self.summands[0], a)
        for summand in self.summands[1:]:
            total = total + coeff(summand, a)
        return total


def _first_failure(
    profile: SpanningProfile, oracle: SumOracle, level: int, jobs: int
) -> Optional[tuple[int, Exponent]]:
    """First (k, b) in increasing k and lexicographic b whose dependency fails."""
    for k in range(1, profile.n + 1):
        span = profile.spans[k]
        pending = [b for b in profile.deps[k] if b not in span]

        def holds(b: Exponent) -> bool:
            oracle.stats.record_dependency(level)
            return oracle.dependency_holds(k, b, span, profile.gammas[k, b])

        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as executor:
                results = list(executor.map(holds, pending))
            for b, result in zip(pending, results):
                if not result:
                    return k, b
        else:
            for b in pending:
                if not holds(b):
                    return k, b
    return None


def _compare(
    a: Roabp,
    others: Sequence[Roabp],
    width_cap: int,
    stats: PitStats,
    jobs: int,
) -> EquivalenceReport:
    """Is A equal to the sum of ``others``?"""
    profile = build_profile(a)
    oracle = SumOracle(others, profile.order, width_cap, stats)
    if failure := _first_failure(profile, oracle, level=len(others) + 1, jobs=jobs):
        k, b = failure
        LOGGER.debug("Dependency %s fails at cut %s", b, k)
        return EquivalenceReport(
            equivalent=False,
            failing_layer=k,
            failing_dependency=profile.full_exponent(b),
        )

    ours = profile.final_scalar
    theirs = oracle.final_scalar(profile.final_prefix)
    return EquivalenceReport(
        equivalent=bool(ours == theirs),
        final_scalars=(int(ours), int(theirs)),
    )


def check_equivalence(
    a: Roabp,
    b: Roabp,
    width_cap: int = DEFAULT_WIDTH_CAP,
    stats: Optional[PitStats] = None,
    jobs: int = 1,
) -> EquivalenceReport:
    if (a.n, a.d) != (b.n, b.d):
        raise DimensionMismatchError(
            user_msg=f"(n, d) = {(a.n, a.d)} and {(b.n, b.d)} differ"
        )
    b.require_scalar("equivalence_test")
    return _compare(a, [b], width_cap, stats or PitStats(), jobs)


def equivalence_test(a: Roabp, b: Roabp, **kwargs) -> bool:
    return check_equivalence(a, b, **kwargs).equivalent


def sum_zero_test(
    s: Union[SumInstance, Sequence[Roabp]],
    width_cap: int = DEFAULT_WIDTH_CAP,
    stats: Optional[PitStats] = None,
    jobs: int = 1,
) -> bool:
    """Is A_1 + ... + A_c identically zero? Recurses on c - 1 summands of width w(w+1)."""
    if not isinstance(s, SumInstance):
        s = SumInstance(summands=tuple(s))
    stats = stats or PitStats()
    if s.c == 1:
        stats.record_zero_test()
        return zero_test(s.summands[0])
    LOGGER.debug("Testing a sum of %s ROABPs of width %s", s.c, s.width)
    report = _compare(negate(s.summands[0]), s.summands[1:], width_cap, stats, jobs)
    return report.equivalent


@dataclass(frozen=True, eq=False)
class Representable:
    """B follows every dependency of A, so it has an ROABP of A's width and order."""

    final_scalars_equal: bool


def e_matrix(gf: type[galois.FieldArray], var: str, w: int, d: int) -> PolyMatrix:
    """I_w tensor [var**0 ... var**d]."""
    matrices = [gf.Zeros((w, w * (d + 1))) for _ in range(d + 1)]
    for i in range(w):
        for j in range(d + 1):
            matrices[j][i, i * (d + 1) + j] = 1
    return PolyMatrix.from_matrices(var, matrices)


@dataclass(frozen=True, eq=False)
class Decomposition:
    """A = R P and B = R Q with Gamma P = 0 and Gamma Q != 0, cut after layer k.

    ``dependency`` is the failing prefix in A's order; ``r`` is row-output with the
    layers after k constant identities.
    """

    k: int
    dependency: Exponent
    r: Roabp
    p: tuple[DensePoly, ...]
    q: tuple[DensePoly, ...]
    gamma: galois.FieldArray
    e_k: PolyMatrix

    @property
    def width(self) -> int:
        return self.gamma.size

    def combine(self, column: Sequence[DensePoly]) -> DensePoly:
        """R times a column of polynomials in the remaining variables."""
        row = expand_dense(self.r)
        total = DensePoly.zero(row.field, row.n, row.d)
        for i, entry in enumerate(column):
            total = total + row.component(i).multiply(entry)
        return total

    def apply_gamma(self, column: Sequence[DensePoly]) -> DensePoly:
        total = DensePoly.zero(column[0].field, column[0].n, column[0].d)
        for g, entry in zip(self.gamma, column):
            total = total + entry.scale(g)
        return total


def _common_prefix(profile: SpanningProfile, k: int, e_k: PolyMatrix) -> Roabp:
    gf = profile.field
    width = e_k.cols
    layers = [
        PolyMatrix.from_matrices(variable_name(var), profile_matrices(profile, i + 1))
        for i, var in enumerate(profile.order[: k - 1])
    ]
    layers.append(e_k)
    layers.extend(
        PolyMatrix.constant(variable_name(var), gf.Identity(width))
        for var in profile.order[k:]
    )
    return Roabp(n=profile.n, d=profile.d, order=profile.order, layers=tuple(layers))


def decompose(
    a: Roabp,
    b_summands: Sequence[Roabp],
    width_cap: int = DEFAULT_WIDTH_CAP,
    jobs: int = 1,
) -> Union[Decomposition, Representable]:
    instance = SumInstance(summands=(a,) + tuple(b_summands))
    profile = build_profile(a)
    oracle = SumOracle(instance.summands[1:], profile.order, width_cap, PitStats())
    failure = _first_failure(profile, oracle, level=instance.c, jobs=jobs)
    if failure is None:
        theirs = oracle.final_scalar(profile.final_prefix)
        return Representable(final_scalars_equal=bool(profile.final_scalar == theirs))

    k, b = failure
    gf = a.field
    columns = [prefix + (j,) for prefix in profile.spans[k - 1] for j in range(a.d + 1)]
    variables = profile.variables(k)

    gamma = gf.Zeros(len(columns))
    gamma[columns.index(b)] = 1
    for member, g in zip(profile.spans[k], profile.gammas[k, b]):
        gamma[columns.index(member)] -= g

    p = tuple(expand_dense(coeff_operator(a, variables, c)) for c in columns)
    q = []
    for c in columns:
        parts = [expand_dense(coeff_operator(s, variables, c)) for s in b_summands]
        total = parts[0]
        for part in parts[1:]:
            total = total + part
        q.append(total)

    var = variable_name(profile.order[k - 1])
    e_k = e_matrix(gf, var, len(profile.spans[k - 1]), a.d)
    LOGGER.info("Decomposed at cut %s with common width %s", k, len(columns))
    return Decomposition(
        k=k,
        dependency=b,
        r=_common_prefix(profile, k, e_k),
        p=p,
        q=tuple(q),
        gamma=gamma,
        e_k=e_k,
    )