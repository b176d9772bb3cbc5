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

from dataclasses import dataclass
import logging
from types import MappingProxyType
from typing import Callable, Mapping, Optional, Protocol, Sequence

import galois
import numpy as np

from .algebra import PolyMatrix, greedy_column_basis, to_field
from .common import (
    DimensionMismatchError,
    Exponent,
    NotRepresentableError,
    PreconditionError,
)
from .roabp_core import DensePoly, Roabp, coeff, coeff_operator, linear_combination


LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SpanningProfile:
    """Spanning and dependency sets per cut of a variable order.

    Prefixes are exponent tuples over the first k variables of ``order``. ``spans[0]``
    is the empty prefix and ``deps[0]`` is empty. ``vectors[b]`` is the row vector
    C_b (shape (1, m)) and ``gammas[k, b]`` expresses C_b over ``spans[k]``.
    """

    field: type[galois.FieldArray]
    n: int
    d: int
    order: tuple[int, ...]
    spans: tuple[tuple[Exponent, ...], ...]
    deps: tuple[tuple[Exponent, ...], ...]
    vectors: Mapping[Exponent, galois.FieldArray]
    gammas: Mapping[tuple[int, Exponent], galois.FieldArray]

    @property
    def width(self) -> int:
        return max(len(span) for span in self.spans)

    @property
    def final_prefix(self) -> Exponent:
        return self.spans[self.n][0]

    @property
    def final_scalar(self) -> galois.FieldArray:
        return self.vectors[self.final_prefix].reshape(-1)[0]

    def variables(self, k: int) -> tuple[int, ...]:
        return self.order[:k]

    def full_exponent(self, prefix: Sequence[int]) -> Exponent:
        a = [0] * self.n
        for var, e in zip(self.order, prefix):
            a[var] = e
        return tuple(a)


def _greedy_profile(
    gf: type[galois.FieldArray],
    n: int,
    d: int,
    order: Sequence[int],
    vector_of: Callable[[Exponent, dict[Exponent, galois.FieldArray]], galois.FieldArray],
) -> SpanningProfile:
    vectors: dict[Exponent, galois.FieldArray] = {(): vector_of((), {})}
    spans: list[tuple[Exponent, ...]] = [((),)]
    deps: list[tuple[Exponent, ...]] = [()]
    gammas: dict[tuple[int, Exponent], galois.FieldArray] = {}

    for k in range(1, n + 1):
        candidates = sorted(prefix + (j,) for prefix in spans[-1] for j in range(d + 1))
        for b in candidates:
            vectors[b] = vector_of(b, vectors)

        columns = gf.Zeros((vectors[candidates[0]].size, len(candidates)))
        for j, b in enumerate(candidates):
            columns[:, j] = vectors[b].reshape(-1)
        pivots, coordinates = greedy_column_basis(columns)
        if not pivots:
            # every extension vanishes; keep one so later cuts stay defined
            pivots = [0]
            coordinates = gf.Zeros((1, len(candidates)))
            coordinates[0, 0] = 1

        chosen = [candidates[j] for j in pivots]
        for j, b in enumerate(candidates):
            gammas[k, b] = coordinates[:, j].copy()

        LOGGER.debug("Cut %s: |dep| = %s, |span| = %s", k, len(candidates), len(chosen))
        spans.append(tuple(chosen))
        deps.append(tuple(candidates))

    return SpanningProfile(
        field=gf,
        n=n,
        d=d,
        order=tuple(order),
        spans=tuple(spans),
        deps=tuple(deps),
        vectors=MappingProxyType(vectors),
        gammas=MappingProxyType(gammas),
    )


def build_profile(r: Roabp) -> SpanningProfile:
    """Profile in r's own order, C_b being the product of layer coefficient matrices."""
    r.require_scalar("build_profile")
    if r.t_degree:
        raise PreconditionError(
            user_msg="build_profile needs an ROABP over the base field"
        )
    gf = r.field

    def vector_of(b: Exponent, known: dict[Exponent, galois.FieldArray]):
        if not b:
            return gf.Ones((1, 1))
        return known[b[:-1]] @ r.layers[len(b) - 1].matrix(b[-1])

    return _greedy_profile(gf, r.n, r.d, r.order, vector_of)


def dense_profile(p: DensePoly, order: Sequence[int]) -> SpanningProfile:
    """Profile of an arbitrary scalar polynomial in ``order``.

    C_b is the coefficient operator A_{(y_k, b)} flattened over the monomials of the
    remaining variables, so the span sizes are the evaluation dimensions of p.
    """
    if p.k != 1 or p.t_degree:
        raise PreconditionError(user_msg="dense_profile needs a scalar polynomial over F")
    if sorted(order) != list(range(p.n)):
        raise PreconditionError(user_msg=f"order {list(order)} is not a permutation")
    gf = p.field
    radix = p.d + 1

    def vector_of(b: Exponent, known: dict[Exponent, galois.FieldArray]):
        k = len(b)
        rest = order[k:]
        vector = gf.Zeros((1, radix ** len(rest)))
        for a, value in p.coeffs.items():
            if all(a[var] == e for var, e in zip(order, b)):
                index = 0
                for var in rest:
                    index = index * radix + a[var]
                vector[0, index] = value[0, 0]
        return vector

    return _greedy_profile(gf, p.n, p.d, order, vector_of)


def zero_witness(r: Roabp) -> Optional[Exponent]:
    """A full exponent with nonzero coefficient, or None if r computes zero."""
    profile = build_profile(r)
    for b in profile.deps[r.n]:
        if np.any(profile.vectors[b]):
            return profile.full_exponent(b)
    return None


def zero_test(r: Roabp) -> bool:
    return zero_witness(r) is None


def dependency_combination(
    r: Roabp,
    variables: Sequence[int],
    b: Exponent,
    span: Sequence[Exponent],
    gamma: galois.FieldArray,
) -> Roabp:
    """ROABP for r_{(y,b)} - sum(gamma_a * r_{(y,a)}) over a in span.

    If y is a prefix of r's own order the fixed layers fold into a single row vector
    and the width stays that of r. Otherwise the coefficient operators are stacked.
    """
    if len(span) != gamma.size:
        raise DimensionMismatchError(
            user_msg=f"{gamma.size} coefficients for a span of {len(span)}"
        )
    terms = [(tuple(b), to_field(r.field, 1))]
    terms += [(tuple(a), -g) for a, g in zip(span, gamma) if g != 0]

    k = len(variables)
    if k and not r.t_degree and set(r.order[:k]) == set(variables):
        return _folded_combination(r, variables, terms)
    parts = [coeff_operator(r, variables, a) for a, _ in terms]
    return linear_combination(parts, [g for _, g in terms])


def _folded_combination(
    r: Roabp,
    variables: Sequence[int],
    terms: Sequence[tuple[Exponent, galois.FieldArray]],
) -> Roabp:
    gf = r.field
    k = len(variables)
    row = None
    for a, factor in terms:
        assignment = dict(zip(variables, a))
        product = r.layers[0].matrix(assignment[r.order[0]])
        for layer, var in zip(r.layers[1:k], r.order[1:k]):
            product = product @ layer.matrix(assignment[var])
        row = product * factor if row is None else row + product * factor

    layers = [
        PolyMatrix.constant(layer.var, gf.Ones((1, 1))) for layer in r.layers[: k - 1]
    ]
    layers.append(PolyMatrix.constant(r.layers[k - 1].var, row))
    layers.extend(r.layers[k:])
    return Roabp(n=r.n, d=r.d, order=r.order, layers=tuple(layers))


class DependencyOracle(Protocol):
    def dependency_holds(
        self, k: int, b: Exponent, span: Sequence[Exponent], gamma: galois.FieldArray
    ) -> bool: ...

    def final_scalar(self, prefix: Exponent) -> galois.FieldArray: ...


class RoabpOracle:
    """Answers dependency queries about an ROABP in the prefix order ``order``."""

    def __init__(self, r: Roabp, order: Sequence[int]) -> None:
        r.require_scalar("RoabpOracle")
        self.r = r
        self.order = tuple(order)

    def _full_exponent(self, prefix: Exponent) -> Exponent:
        a = [0] * self.r.n
        for var, e in zip(self.order, prefix):
            a[var] = e
        return tuple(a)

    def dependency_holds(
        self, k: int, b: Exponent, span: Sequence[Exponent], gamma: galois.FieldArray
    ) -> bool:
        combination = dependency_combination(self.r, self.order[:k], b, span, gamma)
        return zero_test(combination)

    def final_scalar(self, prefix: Exponent) -> galois.FieldArray:
        return coeff(self.r, self._full_exponent(prefix))


def reconstruct(
    profile: SpanningProfile, target: Optional[DependencyOracle] = None
) -> Roabp:
    """ROABP of width max |span_k| in the profile's order.

    Without ``target`` the profile's own dependencies and final scalar are used.
    With ``target`` every dependency is checked against it first and the final
    scalar is taken from it; a failing dependency raises NotRepresentableError.
    """
    if target is None:
        final = profile.final_scalar
    else:
        for k in range(1, profile.n + 1):
            for b in profile.deps[k]:
                gamma = profile.gammas[k, b]
                if not target.dependency_holds(k, b, profile.spans[k], gamma):
                    LOGGER.info("Dependency %s fails at cut %s", b, k)
                    raise NotRepresentableError(layer=k, dependency=b)
        final = target.final_scalar(profile.final_prefix)

    layers = []
    for k in range(1, profile.n + 1):
        matrices = profile_matrices(profile, k)
        if k == profile.n:
            matrices = [matrix * final for matrix in matrices]
        layers.append(matrices)
    return Roabp.from_coefficients(profile.order, profile.d, layers)


def profile_matrices(profile: SpanningProfile, k: int) -> list[galois.FieldArray]:
    """Coefficient matrices of the k-th reconstructed layer.

    Entry (i, h) of the x**j matrix is gamma_h of the extension (span_{k-1}[i], j).
    """
    previous, current = profile.spans[k - 1], profile.spans[k]
    matrices = [
        profile.field.Zeros((len(previous), len(current))) for _ in range(profile.d + 1)
    ]
    for i, a in enumerate(previous):
        for j in range(profile.d + 1):
            matrices[j][i] = profile.gammas[k, a + (j,)]
    return matrices
