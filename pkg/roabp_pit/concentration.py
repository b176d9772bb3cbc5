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

"""Low-support rank concentration and the blackbox tests built on it."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import itertools
import logging
import math
from types import MappingProxyType
from typing import Callable, Iterator, Mapping, Optional, Sequence, Union

import galois
import numpy as np

from .algebra import (
    FieldScalar,
    field,
    poly,
    polymatrix_rank,
    rank,
    require_field_size,
    solve_in_span,
    to_field,
)
from .common import (
    DEFAULT_MODULUS,
    DimensionMismatchError,
    Exponent,
    PreconditionError,
    binomial_product,
    ceil_log2,
    check_budget,
    exponents,
    monomial_weight,
    support,
)
from .roabp_core import DEFAULT_DENSE_BUDGET, DensePoly, ShiftTuple, shift_dense


LOGGER = logging.getLogger(__name__)


DEFAULT_GRID_BUDGET = 10**6
DEFAULT_WEIGHT_RETRIES = 256


@dataclass(frozen=True)
class WeightAssignment:
    weights: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(int(w) for w in self.weights))
        if any(w < 0 for w in self.weights):
            raise PreconditionError(user_msg=f"negative weight in {self.weights}")

    def __len__(self) -> int:
        return len(self.weights)

    def weight(self, a: Sequence[int]) -> int:
        return monomial_weight(self.weights, a)


@dataclass(frozen=True, eq=False)
class IsolationCertificate:
    """S with pairwise distinct weights; ``expressions[a]`` is the part used for a."""

    basis: tuple[Exponent, ...]
    basis_weights: tuple[int, ...]
    expressions: Mapping[Exponent, tuple[Exponent, ...]]


@dataclass(frozen=True)
class IsolationFailure:
    reason: str
    weight: int
    collisions: tuple[Exponent, ...]


def _tier_rank(p: DensePoly, rows: Sequence[Exponent]) -> int:
    if not rows:
        return 0
    if p.t_degree:
        return polymatrix_rank(p.coefficient_polys(rows))
    return rank(p.coefficient_matrix(rows))


def concentration_level(p: DensePoly) -> int:
    """Smallest l such that coefficients of support < l span all coefficients.

    Ranks are over F(t) for polynomials depending on t. The zero polynomial is
    1-concentrated.
    """
    if p.is_zero:
        return 1
    monomials = p.support_set
    total = _tier_rank(p, monomials)
    for level in range(1, p.n + 1):
        low = [a for a in monomials if support(a) < level]
        if len(low) >= total and _tier_rank(p, low) == total:
            return level
    return p.n + 1


def verify_isolating(
    w: WeightAssignment, p: DensePoly
) -> Union[IsolationCertificate, IsolationFailure]:
    if len(w) != p.n:
        raise DimensionMismatchError(user_msg=f"{len(w)} weights for {p.n} variables")
    if p.t_degree:
        raise PreconditionError(user_msg="isolation is checked for polynomials over F")

    basis: list[Exponent] = []
    vectors: list[galois.FieldArray] = []
    expressions: dict[Exponent, tuple[Exponent, ...]] = {}
    by_weight = sorted(p.support_set, key=w.weight)
    for weight, group in itertools.groupby(by_weight, key=w.weight):
        outside = []
        for a in group:
            gamma = solve_in_span(p.vector(a), vectors)
            if gamma is None:
                outside.append(a)
            else:
                expressions[a] = tuple(s for s, g in zip(basis, gamma) if g != 0)
        if len(outside) > 1:
            return IsolationFailure(
                reason="two candidates at equal weight",
                weight=weight,
                collisions=tuple(outside),
            )
        if outside:
            basis.append(outside[0])
            vectors.append(p.vector(outside[0]))

    return IsolationCertificate(
        basis=tuple(basis),
        basis_weights=tuple(w.weight(a) for a in basis),
        expressions=MappingProxyType(expressions),
    )


def isolation_candidates(
    n: int, d: int, bound: int, seed: int = 0, retries: int = DEFAULT_WEIGHT_RETRIES
) -> Iterator[tuple[int, ...]]:
    """Kronecker weights, then r**i mod q for primes q <= bound + 1, then random draws."""
    seen = set()

    def structured() -> Iterator[tuple[int, ...]]:
        yield tuple((d + 1) ** i for i in range(n))
        for q in galois.primes(bound + 1):
            for r in range(2, q):
                yield tuple(pow(r, i, q) for i in range(n))

    for candidate in structured():
        if max(candidate, default=0) <= bound and candidate not in seen:
            seen.add(candidate)
            yield candidate

    rng = np.random.default_rng(seed)
    for _ in range(retries):
        yield tuple(int(v) for v in rng.integers(1, bound + 1, size=n))


def find_isolating(
    p: DensePoly,
    bound: int,
    seed: int = 0,
    retries: int = DEFAULT_WEIGHT_RETRIES,
    jobs: int = 1,
) -> Optional[WeightAssignment]:
    """First verified isolating assignment in [1, bound]^n, or None."""
    if bound < 1:
        raise PreconditionError(user_msg=f"weight bound {bound} < 1")
    if p.is_zero:
        return WeightAssignment(weights=(0,) * p.n)

    def isolates(candidate: tuple[int, ...]) -> bool:
        verdict = verify_isolating(WeightAssignment(weights=candidate), p)
        return isinstance(verdict, IsolationCertificate)

    candidates = isolation_candidates(p.n, p.d, bound, seed=seed, retries=retries)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            while batch := list(itertools.islice(candidates, 4 * jobs)):
                for candidate, ok in zip(batch, executor.map(isolates, batch)):
                    if ok:
                        return WeightAssignment(weights=candidate)
    else:
        for index, candidate in enumerate(candidates):
            if isolates(candidate):
                LOGGER.debug("Candidate %s isolates: %s", index, candidate)
                return WeightAssignment(weights=candidate)

    LOGGER.info("No isolating weights in [1, %s]^%s", bound, p.n)
    return None


def shift_by_weights(p: DensePoly, w: WeightAssignment) -> DensePoly:
    """A(x + t^w) by the coefficient transfer formula.

    coeff(x^a) = sum over b >= a of binom(b, a) * t^(w(b) - w(a)) * coeff(x^b).
    """
    if len(w) != p.n:
        raise DimensionMismatchError(user_msg=f"{len(w)} weights for {p.n} variables")
    if p.t_degree:
        raise PreconditionError(user_msg="shift_by_weights needs a polynomial over F")

    gf = p.field
    t_length = p.d * sum(w.weights) + 1
    coeffs: dict[Exponent, galois.FieldArray] = {}
    for b, value in p.coeffs.items():
        for a in itertools.product(*(range(e + 1) for e in b)):
            entry = coeffs.get(a)
            if entry is None:
                entry = coeffs[a] = gf.Zeros((t_length, p.k))
            entry[w.weight(b) - w.weight(a)] += value[0] * to_field(
                gf, binomial_product(b, a)
            )
    return DensePoly(field=gf, n=p.n, d=p.d, coeffs=coeffs, output_shape=p.output_shape)


def rank_preserved(p: DensePoly, w: WeightAssignment) -> bool:
    """rank(C') == rank(C), the former over F(t)."""
    shifted = shift_by_weights(p, w)
    before = _tier_rank(p, p.support_set)
    after = _tier_rank(shifted, shifted.support_set)
    return before == after


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    matrix: galois.FieldArray
    rows: tuple[Exponent, ...]
    columns: tuple[Exponent, ...]


def transfer_matrix(
    n: int,
    d: int,
    level: int,
    gf: Optional[type[galois.FieldArray]] = None,
    budget: int = DEFAULT_DENSE_BUDGET,
    columns: Optional[Sequence[Exponent]] = None,
) -> TransferMatrix:
    """T[a, b] = binom(b, a) for rows supp(a) < level.

    Columns are every b in {0..d}^n unless ``columns`` restricts them, typically to
    the support of the polynomial being shifted.
    """
    gf = gf or field(DEFAULT_MODULUS)
    check_budget((d + 1) ** n, budget, "transfer matrix columns")
    every = tuple(exponents(n, d))
    rows = tuple(a for a in every if support(a) < level)
    if columns is None:
        columns = every
    else:
        columns = tuple(tuple(int(e) for e in b) for b in columns)
        if any(len(b) != n or not all(0 <= e <= d for e in b) for b in columns):
            raise DimensionMismatchError(user_msg=f"columns outside {{0..{d}}}^{n}")
    check_budget(len(rows) * len(columns), budget, "transfer matrix")

    matrix = gf.Zeros((len(rows), len(columns)))
    for i, a in enumerate(rows):
        for j, b in enumerate(columns):
            if all(x <= y for x, y in zip(a, b)):
                matrix[i, j] = to_field(gf, binomial_product(b, a))
    return TransferMatrix(matrix=matrix, rows=rows, columns=columns)


def sparse_shift_check(p: DensePoly, level: int) -> bool:
    """Does p(x + 1) have a nonzero coefficient of support < level?"""
    if p.is_zero or p.k != 1 or p.t_degree:
        raise PreconditionError(
            user_msg="sparse_shift_check needs a nonzero scalar polynomial over F"
        )
    if len(p.support_set) > 2**level - 1:
        raise PreconditionError(
            user_msg=f"sparsity {len(p.support_set)} exceeds {2**level - 1}"
        )
    shifted = shift_dense(p, [1] * p.n)
    return any(support(a) < level for a in shifted.support_set)


@dataclass(frozen=True, eq=False)
class LagrangeShift:
    """L_j(y, t) = sum_m y^m * interpolants[j][m](t), and its collapse y = t^E."""

    alphas: tuple[int, ...]
    interpolants: tuple[tuple[galois.Poly, ...], ...]
    collapse_exponent: int
    shift: ShiftTuple

    def at(self, alpha: FieldScalar) -> ShiftTuple:
        """L evaluated at y = alpha."""
        gf = self.shift.field
        y = to_field(gf, alpha)
        entries = []
        for coefficients in self.interpolants:
            total = galois.Poly.Zero(gf)
            for m, c in enumerate(coefficients):
                total = total + c * galois.Poly([int(y**m)], field=gf)
            entries.append(total)
        return ShiftTuple(entries=tuple(entries))


def lagrange_combine(
    family: Sequence[ShiftTuple],
    alphas: Sequence[FieldScalar],
    d: int,
    rank_bound: int = 1,
) -> LagrangeShift:
    """One shift interpolating every family member, collapsed to a polynomial in t.

    The collapse exponent is rank_bound * n * d * max_degree + 1, which exceeds the
    t-degree of any rank_bound-minor of the shifted coefficients.
    """
    if not family:
        raise PreconditionError(user_msg="empty shift family")
    if len(alphas) != len(family):
        raise DimensionMismatchError(
            user_msg=f"{len(alphas)} interpolation points for {len(family)} shifts"
        )
    gf = family[0].field
    n = len(family[0])
    if any(len(f) != n for f in family):
        raise DimensionMismatchError(user_msg="shifts of different lengths")
    points = [int(to_field(gf, alpha)) for alpha in alphas]
    if len(set(points)) != len(points):
        raise PreconditionError(user_msg=f"interpolation points {points} not distinct")
    require_field_size(gf, len(points), "Lagrange interpolation points")

    degree = max(f.degree for f in family)
    exponent = rank_bound * n * d * degree + 1
    require_field_size(
        gf, (len(family) - 1) * exponent + degree + 1, "collapsed shift evaluation"
    )

    if len(family) == 1:
        interpolants = tuple((entry,) for entry in family[0].entries)
    else:
        x = gf(points)
        basis = []
        for i in range(len(family)):
            unit = gf.Zeros(len(family))
            unit[i] = 1
            basis.append(galois.lagrange_poly(x, unit))
        interpolants = tuple(
            tuple(
                _sum_polys(
                    gf,
                    (
                        f.entries[j] * galois.Poly([_coefficient(basis_i, m)], field=gf)
                        for basis_i, f in zip(basis, family)
                    ),
                )
                for m in range(len(family))
            )
            for j in range(n)
        )

    collapsed = tuple(
        _sum_polys(
            gf,
            (
                c * poly(gf, [0] * (m * exponent) + [1])
                for m, c in enumerate(coefficients)
            ),
        )
        for coefficients in interpolants
    )
    LOGGER.debug(
        "Combined %s shifts, collapse exponent %s, degree %s",
        len(family),
        exponent,
        max(entry.degree for entry in collapsed),
    )
    return LagrangeShift(
        alphas=tuple(points),
        interpolants=interpolants,
        collapse_exponent=exponent,
        shift=ShiftTuple(entries=collapsed),
    )


def _coefficient(p: galois.Poly, m: int) -> int:
    ascending = p.coeffs[::-1]
    return int(ascending[m]) if m < ascending.size else 0


def _sum_polys(gf: type[galois.FieldArray], polys) -> galois.Poly:
    total = galois.Poly.Zero(gf)
    for p in polys:
        total = total + p
    return total


def hitting_set_size(n: int, d: int, level: int, t_count: int = 1) -> int:
    return t_count * sum(math.comb(n, j) * d**j for j in range(min(level, n + 1)))


def hitting_set(
    n: int,
    d: int,
    level: int,
    f: ShiftTuple,
    t_values: Sequence[FieldScalar],
) -> galois.FieldArray:
    """Points h + f(t), h over {0, 1, .., d}^n with supp(h) < level; one row per point.

    Rows run t outer and h inner in lexicographic order.
    """
    gf = f.field
    if len(f) != n:
        raise DimensionMismatchError(
            user_msg=f"shift of length {len(f)} for {n} variables"
        )
    require_field_size(gf, d, "hitting set coordinates", nonzero=True)
    require_field_size(gf, len(t_values), "hitting set t values")
    ts = [int(to_field(gf, t)) for t in t_values]
    if len(set(ts)) != len(ts):
        raise PreconditionError(user_msg=f"t values {ts} not distinct")

    base = [h for h in exponents(n, d) if support(h) < level]
    grid = gf(np.array(base, dtype=np.int64).reshape(len(base), n))
    points = gf.Zeros((len(ts) * len(base), n))
    for i, t in enumerate(ts):
        offset = gf([int(v) for v in f.at(t)])
        points[i * len(base) : (i + 1) * len(base)] = grid + offset  # noqa
    return points


def sum_width_bound(w: int, d: int, c: int) -> int:
    """W_{w,c} = (d+1) * (2w)^(2^(c-1))."""
    return (d + 1) * (2 * w) ** (2 ** (c - 1))


def concentration_bound(w: int, d: int, c: int) -> int:
    """l_{w,c} = ceil(log2(W_{w,c}^2 + 1))."""
    width = sum_width_bound(w, d, c)
    return ceil_log2(width * width + 1)


def certified_shift(
    p: DensePoly,
    support_bound: int,
    weight_bound: int,
    seed: int = 0,
    retries: int = DEFAULT_WEIGHT_RETRIES,
    jobs: int = 1,
) -> Optional[ShiftTuple]:
    """t^w for isolating w, kept only if A(x + t^w) is support_bound-concentrated."""
    w = find_isolating(p, weight_bound, seed=seed, retries=retries, jobs=jobs)
    if w is None:
        return None
    level = concentration_level(shift_by_weights(p, w))
    if level > support_bound:
        LOGGER.warning(
            "Weights %s give concentration %s above %s", w.weights, level, support_bound
        )
        return None
    return ShiftTuple.monomials(p.field, w.weights)


def isolation_to_concentration_check(p: DensePoly, w: WeightAssignment) -> bool:
    """A(x + t^w) is ceil(log2(k + 1))-concentrated for isolating w."""
    verdict = verify_isolating(w, p)
    if isinstance(verdict, IsolationFailure):
        raise PreconditionError(
            user_msg=f"weights {w.weights} are not isolating: {verdict.reason}"
        )
    return concentration_level(shift_by_weights(p, w)) <= ceil_log2(p.k + 1)


@dataclass(frozen=True, eq=False)
class BlackboxVerdict:
    nonzero: bool
    evaluations: int
    grid_size: int
    support_bound: int
    width_bound: int
    concentration: int
    shift: ShiftTuple
    witness: Optional[galois.FieldArray] = None


def blackbox_sum_pit(
    evaluate: Callable[[galois.FieldArray], galois.FieldArray],
    n: int,
    d: int,
    w: int,
    c: int,
    gf: Optional[type[galois.FieldArray]] = None,
    shifts: Sequence[ShiftTuple] = (),
    training: Sequence[DensePoly] = (),
    t_values: Optional[Sequence[FieldScalar]] = None,
    support_bound: Optional[int] = None,
    budget: int = DEFAULT_GRID_BUDGET,
    weight_bound: int = 64,
    seed: int = 0,
    jobs: int = 1,
) -> BlackboxVerdict:
    """Zero test of a sum of c width-w ROABPs from point evaluations only.

    The grid is every point of support < c * l_{w,c} over {0..d}, translated by the
    combined shift at each t value. ``training`` polynomials contribute shifts t^w
    certified to concentrate them.
    """
    gf = gf or field(DEFAULT_MODULUS)
    width_bound = sum_width_bound(w, d, c)
    level = concentration_bound(w, d, c)
    bound = min(support_bound if support_bound is not None else c * level, n + 1)

    family = list(shifts)
    for p in training:
        certified = certified_shift(p, bound, weight_bound, seed=seed, jobs=jobs)
        if certified is None:
            LOGGER.warning("No certified shift for a training polynomial")
        else:
            family.append(certified)
    if not family:
        f = ShiftTuple.zero(gf, n)
    elif len(family) == 1:
        f = family[0]
    else:
        f = lagrange_combine(family, range(1, len(family) + 1), d).shift

    if t_values is None:
        t_values = range(n * d * f.degree + 1)
    require_field_size(f.field, len(t_values), "hitting set t values")
    size = hitting_set_size(n, d, bound, len(t_values))
    check_budget(size, budget, "hitting set")
    points = hitting_set(n, d, bound, f, t_values)
    LOGGER.info("Evaluating on %s points (support < %s)", size, bound)

    def nonzero(point: galois.FieldArray) -> bool:
        return bool(np.any(evaluate(point) != 0))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            results = list(executor.map(nonzero, points))
        hits = [i for i, hit in enumerate(results) if hit]
        witness = points[hits[0]] if hits else None
        evaluations = len(results)
    else:
        witness = None
        evaluations = 0
        for point in points:
            evaluations += 1
            if nonzero(point):
                witness = point
                break

    return BlackboxVerdict(
        nonzero=witness is not None,
        evaluations=evaluations,
        grid_size=size,
        support_bound=bound,
        width_bound=width_bound,
        concentration=level,
        shift=f,
        witness=witness,
    )
