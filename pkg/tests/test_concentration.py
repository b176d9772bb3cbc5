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

from itertools import combinations

import galois
import numpy as np
import pytest

from roabp_pit.algebra import poly, polymatrix_rank, rank
from roabp_pit.common import (
    DimensionMismatchError,
    FieldTooSmallError,
    PreconditionError,
    exponents,
    support,
)
from roabp_pit.concentration import (
    IsolationCertificate,
    IsolationFailure,
    WeightAssignment,
    blackbox_sum_pit,
    certified_shift,
    concentration_bound,
    concentration_level,
    find_isolating,
    hitting_set,
    hitting_set_size,
    isolation_candidates,
    isolation_to_concentration_check,
    lagrange_combine,
    rank_preserved,
    shift_by_weights,
    sparse_shift_check,
    sum_width_bound,
    transfer_matrix,
    verify_isolating,
)
from roabp_pit.nisan import dense_profile, reconstruct
from roabp_pit.roabp_core import (
    DensePoly,
    ShiftTuple,
    dot_product,
    evaluate,
    expand_dense,
    linear_combination,
    shift_dense,
)


def monomial_product(gf, n):
    return DensePoly.from_scalars(gf, n, 1, {(1,) * n: 1})


def test_concentration_level_examples(gf, create_product):
    assert concentration_level(monomial_product(gf, 5)) == 6
    assert concentration_level(expand_dense(create_product(gf, [[1, 1]] * 5))) == 1
    assert concentration_level(DensePoly.zero(gf, 3, 1)) == 1
    p = DensePoly.from_scalars(gf, 2, 1, {(1, 0): 1, (0, 1): 1})
    assert concentration_level(p) == 2


def test_verify_isolating_single_monomial(gf):
    p = monomial_product(gf, 3)
    verdict = verify_isolating(WeightAssignment(weights=(0, 0, 0)), p)
    assert isinstance(verdict, IsolationCertificate)
    assert verdict.basis == ((1, 1, 1),)


def test_verify_isolating_scalar_sum(gf):
    p = DensePoly.from_scalars(gf, 2, 1, {(1, 0): 1, (0, 1): 1})
    verdict = verify_isolating(WeightAssignment(weights=(1, 2)), p)
    assert isinstance(verdict, IsolationCertificate)
    assert verdict.basis == ((1, 0),)
    assert verdict.expressions[(0, 1)] == ((1, 0),)


def test_verify_isolating_reports_collision(gf):
    p = DensePoly(
        field=gf,
        n=2,
        d=1,
        coeffs={(1, 0): gf([[1, 0]]), (0, 1): gf([[0, 1]])},
        output_shape=(1, 2),
    )
    verdict = verify_isolating(WeightAssignment(weights=(1, 1)), p)
    assert isinstance(verdict, IsolationFailure)
    assert verdict.weight == 1
    assert set(verdict.collisions) == {(1, 0), (0, 1)}
    verdict = verify_isolating(WeightAssignment(weights=(1, 2)), p)
    assert isinstance(verdict, IsolationCertificate)


def test_weight_assignment_rejects_negative_weights():
    with pytest.raises(PreconditionError):
        WeightAssignment(weights=(1, -1))


def test_isolation_candidates_start_with_kronecker():
    candidates = list(isolation_candidates(3, 2, 64, retries=0))
    assert candidates[0] == (1, 3, 9)
    assert len(candidates) == len(set(candidates))
    assert all(max(c) <= 64 for c in candidates)


def test_find_isolating_uses_kronecker_weights(gf, rng, create_dense):
    p = create_dense(gf, 3, 2, 27, rng)
    w = find_isolating(p, 64)
    assert w is not None
    assert w.weights == (1, 3, 9)


def test_find_isolating_zero_polynomial(gf):
    w = find_isolating(DensePoly.zero(gf, 3, 1), 8)
    assert w is not None and w.weights == (0, 0, 0)


def test_find_isolating_for_roabps(gf, rng, create_roabp):
    for _ in range(5):
        p = expand_dense(create_roabp(gf, 4, 2, 2, rng))
        w = find_isolating(p, 64, seed=3)
        assert w is not None
        assert isinstance(verify_isolating(w, p), IsolationCertificate)


def test_find_isolating_threaded_agrees(gf, rng, create_roabp):
    p = expand_dense(create_roabp(gf, 3, 1, 2, rng))
    sequential = find_isolating(p, 16, jobs=1)
    threaded = find_isolating(p, 16, jobs=3)
    assert sequential is not None and threaded is not None
    assert isinstance(verify_isolating(threaded, p), IsolationCertificate)


def test_shift_by_zero_weights(gf):
    shifted = shift_by_weights(
        DensePoly.from_scalars(gf, 2, 1, {(1, 1): 1}), WeightAssignment(weights=(0, 0))
    )
    expected = DensePoly.from_scalars(
        gf, 2, 1, {(0, 0): 1, (0, 1): 1, (1, 0): 1, (1, 1): 1}
    )
    assert shifted == expected


def test_shift_by_weights_of_square(gf):
    # (x + t^3)^2 = x^2 + 2 t^3 x + t^6
    shifted = shift_by_weights(
        DensePoly.from_scalars(gf, 1, 2, {(2,): 1}), WeightAssignment(weights=(3,))
    )
    assert shifted.t_length == 7
    assert shifted.get((2,))[:, 0].tolist() == [1, 0, 0, 0, 0, 0, 0]
    assert shifted.get((1,))[:, 0].tolist() == [0, 0, 0, 2, 0, 0, 0]
    assert shifted.get((0,))[:, 0].tolist() == [0, 0, 0, 0, 0, 0, 1]


def test_shift_by_weights_matches_substitution(gf, rng, create_dense):
    for _ in range(10):
        p = create_dense(gf, 3, 2, 6, rng, output_shape=(1, 2))
        weights = tuple(int(v) for v in rng.integers(0, 4, size=3))
        assert shift_by_weights(p, WeightAssignment(weights=weights)) == shift_dense(
            p, ShiftTuple.monomials(gf, weights)
        )


SHIFT_GRID = [
    (n, d) for n in range(1, 14) for d in range(1, 10) if (d + 1) ** n <= 10**4
]


def _check_shift_identities(gf, rng, create_dense, n, d, count, terms):
    for _ in range(count):
        p = create_dense(gf, n, d, terms, rng, output_shape=(1, 2))
        w = WeightAssignment(weights=tuple(int(v) for v in rng.integers(0, 4, size=n)))
        shifted = shift_by_weights(p, w)
        assert shifted == shift_dense(p, ShiftTuple.monomials(gf, w.weights))

        # D C' = T D C with D = diag(t^w(a)), every row of {0..d}^n
        transfer = transfer_matrix(n, d, n + 1, gf=gf, columns=p.support_set)
        length = shifted.t_length + d * sum(w.weights)
        index = {a: i for i, a in enumerate(transfer.rows)}
        lhs = gf.Zeros((len(transfer.rows), length, p.k))
        for a in shifted.support_set:
            lhs[index[a], w.weight(a) : w.weight(a) + shifted.t_length] = shifted.get(a)  # noqa
        rhs = gf.Zeros((len(transfer.rows), length, p.k))
        for j, b in enumerate(transfer.columns):
            rhs[:, w.weight(b)] += transfer.matrix[:, j : j + 1] * p.vector(b)  # noqa
        assert np.array_equal(lhs, rhs)

        assert rank(p.coefficient_matrix()) == polymatrix_rank(
            shifted.coefficient_polys(shifted.support_set)
        )


@pytest.mark.parametrize("n, d", [(2, 2), (3, 2), (4, 1)])
def test_shift_identities(big_gf, rng, create_dense, n, d):
    _check_shift_identities(big_gf, rng, create_dense, n, d, count=3, terms=8)


@pytest.mark.acceptance
@pytest.mark.parametrize("n, d", SHIFT_GRID)
def test_shift_identities_at_scale(big_gf, rng, create_dense, n, d):
    _check_shift_identities(big_gf, rng, create_dense, n, d, count=3, terms=4)


def test_transfer_matrix_restricted_columns(big_gf):
    full = transfer_matrix(2, 2, 3, gf=big_gf)
    restricted = transfer_matrix(2, 2, 3, gf=big_gf, columns=[(2, 1), (0, 2)])
    assert restricted.rows == full.rows
    for j, b in enumerate(restricted.columns):
        column = full.columns.index(b)
        assert np.array_equal(restricted.matrix[:, j], full.matrix[:, column])
    with pytest.raises(DimensionMismatchError):
        transfer_matrix(2, 2, 3, gf=big_gf, columns=[(3, 0)])


def test_rank_preserved(gf, rng, create_dense):
    for _ in range(5):
        p = create_dense(gf, 3, 1, 5, rng, output_shape=(2, 2))
        weights = tuple(int(v) for v in rng.integers(0, 5, size=3))
        assert rank_preserved(p, WeightAssignment(weights=weights))


def test_transfer_matrix_single_variable(big_gf):
    assert transfer_matrix(1, 1, 1, gf=big_gf).matrix.tolist() == [[1, 1]]


@pytest.mark.parametrize("n, d, level", [(2, 1, 2), (3, 1, 2), (2, 2, 2)])
def test_transfer_matrix_columns_independent(big_gf, n, d, level):
    transfer = transfer_matrix(n, d, level, gf=big_gf)
    size = 2**level - 1
    for columns in combinations(range(len(transfer.columns)), size):
        assert rank(transfer.matrix[:, list(columns)]) == size


def _check_sampled_columns(big_gf, rng, n, d, level, count):
    transfer = transfer_matrix(n, d, level, gf=big_gf)
    size = 2**level - 1
    for _ in range(count):
        columns = rng.choice(len(transfer.columns), size=size, replace=False)
        assert rank(transfer.matrix[:, sorted(int(c) for c in columns)]) == size


def test_transfer_matrix_sampled_columns(big_gf, rng):
    _check_sampled_columns(big_gf, rng, 3, 2, 2, 100)
    _check_sampled_columns(big_gf, rng, 4, 2, 3, 100)


@pytest.mark.acceptance
def test_transfer_matrix_sampled_columns_at_scale(big_gf, rng):
    _check_sampled_columns(big_gf, rng, 3, 2, 2, 500)
    _check_sampled_columns(big_gf, rng, 4, 2, 3, 500)


def test_sparse_shift_check_examples(gf):
    p = DensePoly.from_scalars(gf, 2, 1, {(1, 0): 1, (0, 1): -1})
    assert sparse_shift_check(p, 2)
    assert sparse_shift_check(monomial_product(gf, 4), 1)


def test_sparse_shift_check_rejects_dense_polynomial(gf):
    p = DensePoly.from_scalars(gf, 2, 1, {(1, 0): 1, (0, 1): 1, (1, 1): 1, (0, 0): 1})
    with pytest.raises(PreconditionError, match="sparsity"):
        sparse_shift_check(p, 2)


def _check_sparse_shifts(gf, rng, count):
    for _ in range(count):
        n = int(rng.integers(1, 7))
        d = int(rng.integers(1, 4))
        level = int(rng.integers(1, 4))
        terms = int(rng.integers(1, 2**level))
        monomials = list(exponents(n, d))
        chosen = rng.choice(
            len(monomials), size=min(terms, len(monomials)), replace=False
        )
        p = DensePoly.from_scalars(
            gf, n, d, {monomials[int(i)]: int(rng.integers(1, gf.order)) for i in chosen}
        )
        assert sparse_shift_check(p, level)


def test_sparse_shift_check_random(big_gf, rng):
    _check_sparse_shifts(big_gf, rng, 200)


@pytest.mark.acceptance
def test_sparse_shift_check_random_at_scale(big_gf, rng):
    _check_sparse_shifts(big_gf, rng, 10_000)


def test_lagrange_combine_single_shift(gf):
    f = ShiftTuple.constants(gf, [3, 4])
    combined = lagrange_combine([f], [1], d=1)
    assert combined.shift.entries == f.entries


def test_lagrange_combine_interpolates_family(gf):
    family = [ShiftTuple.constants(gf, [1, 2]), ShiftTuple.constants(gf, [5, 7])]
    combined = lagrange_combine(family, [1, 2], d=1)
    for alpha, f in zip([1, 2], family):
        assert combined.at(alpha).entries == f.entries


def test_lagrange_combine_rejects_repeated_points(gf):
    family = [ShiftTuple.zero(gf, 2), ShiftTuple.constants(gf, [1, 1])]
    with pytest.raises(PreconditionError):
        lagrange_combine(family, [3, 3], d=1)


def test_lagrange_combine_needs_large_field():
    gf = galois.GF(3)
    family = [ShiftTuple(entries=(poly(gf, [0, i]),)) for i in range(3)]
    with pytest.raises(FieldTooSmallError):
        lagrange_combine(family, [0, 1, 2], d=2)


def test_lagrange_combine_rescues_adversarial_polynomial(gf):
    p = monomial_product(gf, 3)
    family = [ShiftTuple.zero(gf, 3), ShiftTuple.constants(gf, [1, 1, 1])]
    assert concentration_level(shift_dense(p, family[0])) == 4
    combined = lagrange_combine(family, [1, 2], d=1)
    assert combined.collapse_exponent == 1
    assert concentration_level(shift_dense(p, combined.shift)) == 1


def test_hitting_set_layout(gf):
    points = hitting_set(3, 2, 2, ShiftTuple.zero(gf, 3), [0])
    assert points.shape == (7, 3)
    assert points[0].tolist() == [0, 0, 0]
    assert all(support(row.tolist()) < 2 for row in points)
    assert hitting_set_size(3, 2, 2) == 7
    assert hitting_set_size(3, 2, 4, t_count=2) == 54


def test_hitting_set_translates_by_shift(gf):
    f = ShiftTuple.monomials(gf, [1, 2])
    points = hitting_set(2, 1, 1, f, [0, 3])
    assert points.tolist() == [[0, 0], [3, 9]]


def test_hitting_set_needs_enough_t_values(gf):
    with pytest.raises(FieldTooSmallError, match="t values"):
        hitting_set(2, 1, 1, ShiftTuple.zero(gf, 2), range(gf.order + 1))
    with pytest.raises(PreconditionError, match="not distinct"):
        hitting_set(2, 1, 1, ShiftTuple.zero(gf, 2), [1, gf.order + 1])


def test_blackbox_default_t_values_must_fit_field(gf):
    def value(point):
        return gf([0])

    # default t range is n * d * 64 + 1 = 513 values
    f = ShiftTuple.monomials(gf, [1, 4, 16, 64])
    with pytest.raises(FieldTooSmallError, match="t values"):
        blackbox_sum_pit(value, 4, 2, 1, 1, gf=gf, support_bound=1, shifts=[f])

    verdict = blackbox_sum_pit(
        value, 4, 2, 1, 1, gf=gf, support_bound=1, shifts=[f], t_values=range(10)
    )
    assert not verdict.nonzero


def test_hitting_set_hits_concentrated_polynomials(gf, rng):
    n, d, level = 3, 2, 2
    points = hitting_set(n, d, level, ShiftTuple.zero(gf, n), [0])
    monomials = list(exponents(n, d))
    low = [a for a in monomials if support(a) < level]
    for _ in range(100):
        terms = {low[int(rng.integers(len(low)))]: int(rng.integers(1, gf.order))}
        for index in rng.choice(len(monomials), size=4, replace=False):
            terms.setdefault(monomials[int(index)], int(rng.integers(0, gf.order)))
        p = DensePoly.from_scalars(gf, n, d, terms)
        assert any(p.evaluate(point.tolist()) != 0 for point in points)


def test_bounds():
    assert sum_width_bound(2, 2, 2) == 48
    assert concentration_bound(2, 2, 2) == 12
    assert sum_width_bound(3, 1, 1) == 12


def test_certified_shift_concentrates(gf):
    p = monomial_product(gf, 4)
    f = certified_shift(p, support_bound=1, weight_bound=64)
    assert f is not None
    assert concentration_level(shift_dense(p, f)) == 1


def _check_isolation_concentration(gf, rng, create_roabp, create_dense, count):
    instances = []
    for _ in range(count):
        instances.append(create_dense(gf, 3, 2, 8, rng))
        for width in (2, 3):
            r = create_roabp(gf, 3, 1, width, rng, shape="matrix")
            instances.append(expand_dense(r))
    for p in instances:
        w = find_isolating(p, 64)
        assert w is not None
        assert isolation_to_concentration_check(p, w)


def test_isolation_implies_concentration(gf, rng, create_roabp, create_dense):
    _check_isolation_concentration(gf, rng, create_roabp, create_dense, 3)


@pytest.mark.acceptance
def test_isolation_implies_concentration_at_scale(gf, rng, create_roabp, create_dense):
    _check_isolation_concentration(gf, rng, create_roabp, create_dense, 70)


def test_isolation_check_rejects_non_isolating_weights(gf):
    p = DensePoly(
        field=gf,
        n=2,
        d=1,
        coeffs={(1, 0): gf([[1, 0]]), (0, 1): gf([[0, 1]])},
        output_shape=(1, 2),
    )
    with pytest.raises(PreconditionError, match="not isolating"):
        isolation_to_concentration_check(p, WeightAssignment(weights=(1, 1)))


def test_dot_product_keeps_concentration(gf, rng, create_roabp):
    r = create_roabp(gf, 3, 1, 2, rng, shape="matrix")
    p = expand_dense(r)
    w = find_isolating(p, 64)
    shifted = shift_by_weights(p, w)
    level = concentration_level(shifted)
    for _ in range(10):
        alpha = gf.Random(r.output_shape, seed=rng)
        reduced = shift_by_weights(p.dot(alpha), w)
        assert reduced == shifted.dot(alpha)
        assert concentration_level(reduced) <= level
        assert expand_dense(dot_product(r, alpha)) == p.dot(alpha)


def test_blackbox_zero_sum_evaluates_whole_grid(gf, rng, create_roabp):
    a = create_roabp(gf, 3, 1, 2, rng)
    zero = linear_combination([a, a], [1, -1])
    verdict = blackbox_sum_pit(
        lambda point: evaluate(zero, point.tolist()), 3, 1, 2, 2, gf=gf
    )
    assert not verdict.nonzero
    assert verdict.evaluations == verdict.grid_size
    assert verdict.support_bound == 4


def _check_blackbox_sums(gf, rng, create_roabp, count):
    n = 4
    for index in range(count):
        a = create_roabp(gf, n, 1, 2, rng, order=[0, 1, 2, 3])
        if index % 4 == 0:
            b = reconstruct(dense_profile(-expand_dense(a), [3, 2, 1, 0]))
        else:
            b = create_roabp(gf, n, 1, 2, rng, order=[3, 2, 1, 0])
        dense = expand_dense(a) + expand_dense(b)

        def total(point):
            values = point.tolist()
            return evaluate(a, values) + evaluate(b, values)

        verdict = blackbox_sum_pit(total, n, 1, 2, 2, gf=gf, training=[dense])
        assert verdict.nonzero == (not dense.is_zero)
        assert verdict.grid_size == hitting_set_size(
            n, 1, verdict.support_bound, n * verdict.shift.degree + 1
        )


def test_blackbox_sum_in_opposite_orders(gf, rng, create_roabp):
    _check_blackbox_sums(gf, rng, create_roabp, 4)


@pytest.mark.acceptance
def test_blackbox_sum_in_opposite_orders_at_scale(gf, rng, create_roabp):
    _check_blackbox_sums(gf, rng, create_roabp, 200)


def test_blackbox_needs_shift_for_adversarial_monomial(gf):
    p = monomial_product(gf, 4)

    def value(point):
        return p.evaluate(point.tolist())

    unshifted = blackbox_sum_pit(value, 4, 1, 1, 1, gf=gf, support_bound=1)
    assert not unshifted.nonzero

    shifted = blackbox_sum_pit(value, 4, 1, 1, 1, gf=gf, support_bound=1, training=[p])
    assert shifted.nonzero
    assert shifted.witness is not None


def test_blackbox_threaded_evaluates_everything(gf, create_product):
    r = create_product(gf, [[1, 1]] * 3)
    verdict = blackbox_sum_pit(
        lambda point: evaluate(r, point.tolist()), 3, 1, 1, 1, gf=gf, jobs=2
    )
    assert verdict.nonzero
    assert verdict.evaluations == verdict.grid_size
