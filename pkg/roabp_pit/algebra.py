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

"""Exact arithmetic over prime fields.

Scalars and matrices are ``galois.FieldArray`` values, univariate polynomials are
``galois.Poly``. Polynomials whose coefficients are themselves polynomials in a
second indeterminate ``t`` are stored as coefficient tensors with a leading t axis
(lowest degree first).
"""

from dataclasses import dataclass
import functools
import logging
from typing import Optional, Sequence, Union

import galois
import numpy as np

from .common import (
    DimensionMismatchError,
    FieldTooSmallError,
    PreconditionError,
    RankCrossCheckError,
)


LOGGER = logging.getLogger(__name__)


FieldScalar = Union[int, galois.FieldArray]


@functools.lru_cache(maxsize=None)
def field(modulus: int) -> type[galois.FieldArray]:
    if not galois.is_prime(modulus):
        raise PreconditionError(user_msg=f"Modulus {modulus} is not prime")
    return galois.GF(modulus)


def to_field(gf: type[galois.FieldArray], value: FieldScalar) -> galois.FieldArray:
    """Reduce an integer (possibly negative) into the field."""
    return gf(int(value) % gf.order)


def require_field_size(
    gf: type[galois.FieldArray], count: int, what: str, nonzero: bool = False
) -> None:
    available = gf.order - 1 if nonzero else gf.order
    if count > available:
        raise FieldTooSmallError(
            user_msg=f"{what} needs {count} distinct "
            f"{'nonzero ' if nonzero else ''}field elements, "
            f"GF({gf.order}) has {available}"
        )


def rank(m: galois.FieldArray) -> int:
    if m.ndim != 2:
        raise DimensionMismatchError(user_msg=f"rank of a {m.ndim}-d array")
    if m.size == 0:
        return 0
    reduced = m.row_reduce()
    return int(np.count_nonzero(np.any(reduced != 0, axis=1)))


def solve_in_span(
    target: galois.FieldArray, basis: Sequence[galois.FieldArray]
) -> Optional[galois.FieldArray]:
    """Coefficients ``gamma`` with ``target = sum(gamma[i] * basis[i])``.

    Returns None if target is not in the span. Free variables are set to zero, so
    the result is the echelon solution of the reduced system.
    """
    gf = type(target)
    target = target.reshape(-1)
    length = target.shape[0]
    for row in basis:
        if row.size != length:
            raise DimensionMismatchError(
                user_msg=f"basis row of length {row.size}, target of length {length}"
            )

    if not np.any(target):
        return gf.Zeros(len(basis))
    if not basis:
        return None

    augmented = gf.Zeros((length, len(basis) + 1))
    for i, row in enumerate(basis):
        augmented[:, i] = row.reshape(-1)
    augmented[:, len(basis)] = target

    gamma = gf.Zeros(len(basis))
    for row in augmented.row_reduce():
        if not np.any(row):
            continue
        pivot = int(np.argmax(row != 0))
        if pivot == len(basis):
            return None
        gamma[pivot] = row[len(basis)]
    return gamma


def greedy_column_basis(m: galois.FieldArray) -> tuple[list[int], galois.FieldArray]:
    """First independent columns of ``m`` in column order, with coordinates.

    Returns ``(pivots, coordinates)`` where ``m == m[:, pivots] @ coordinates``.
    """
    if m.ndim != 2:
        raise DimensionMismatchError(user_msg=f"column basis of a {m.ndim}-d array")
    reduced = m.row_reduce()
    pivots = []
    for row in reduced:
        nonzero = np.flatnonzero(row)
        if nonzero.size == 0:
            break
        pivots.append(int(nonzero[0]))
    return pivots, reduced[: len(pivots)]


def poly(gf: type[galois.FieldArray], coefficients: Sequence[FieldScalar]) -> galois.Poly:
    """Polynomial from coefficients given lowest degree first."""
    if len(coefficients) == 0:
        return galois.Poly.Zero(gf)
    values = [int(c) % gf.order for c in coefficients]
    return galois.Poly(gf(values), order="asc")


def poly_coefficients(p: galois.Poly, length: Optional[int] = None) -> galois.FieldArray:
    """Coefficients lowest degree first, zero-padded or truncated to ``length``."""
    ascending = p.coeffs[::-1]
    if length is None:
        return ascending.copy()
    result = p.field.Zeros(length)
    count = min(length, ascending.size)
    result[:count] = ascending[:count]
    return result


def is_zero_poly(p: galois.Poly) -> bool:
    return not np.any(p.coeffs)


def polymatrix_rank(
    entries: Sequence[Sequence[galois.Poly]], cross_check: bool = True
) -> int:
    """Rank over the rational function field F(t).

    Fraction-free elimination is authoritative. The evaluation cross-check finds a
    point among ``rank * degree + 1`` where the scalar rank reaches it and never
    sees a point exceeding it.
    """
    rows = [list(row) for row in entries]
    if not rows or not rows[0]:
        return 0
    if len({len(row) for row in rows}) != 1:
        raise DimensionMismatchError(user_msg="polynomial matrix rows differ in length")
    if len(rows) > len(rows[0]):
        rows = [list(column) for column in zip(*rows)]

    result = _bareiss_rank(rows)
    if cross_check:
        _evaluation_cross_check(rows, result)
    return result


def _bareiss_rank(rows: list[list[galois.Poly]]) -> int:
    matrix = [row[:] for row in rows]
    n_rows, n_cols = len(matrix), len(matrix[0])
    previous = galois.Poly.One(matrix[0][0].field)
    found = 0
    for col in range(n_cols):
        pivot_row = next(
            (i for i in range(found, n_rows) if not is_zero_poly(matrix[i][col])),
            None,
        )
        if pivot_row is None:
            continue
        matrix[found], matrix[pivot_row] = matrix[pivot_row], matrix[found]
        pivot = matrix[found][col]
        for i in range(found + 1, n_rows):
            factor = matrix[i][col]
            for j in range(col + 1, n_cols):
                # exact by Sylvester's identity
                matrix[i][j] = (
                    pivot * matrix[i][j] - factor * matrix[found][j]
                ) // previous
            matrix[i][col] = galois.Poly.Zero(pivot.field)
        previous = pivot
        found += 1
        if found == n_rows:
            break
    return found


def _evaluation_cross_check(rows: list[list[galois.Poly]], expected: int) -> None:
    gf = rows[0][0].field
    degree = max(entry.degree for row in rows for entry in row)
    points = expected * degree + 1
    require_field_size(gf, points, "rank cross-check")

    for value in range(points):
        x = gf(value)
        scalar = gf([[int(entry(x)) for entry in row] for row in rows])
        at_point = rank(scalar)
        if at_point > expected:
            raise RankCrossCheckError(
                user_msg=f"rank {at_point} at t={value} exceeds "
                f"eliminated rank {expected}"
            )
        if at_point == expected:
            return
    raise RankCrossCheckError(
        user_msg=f"no evaluation point among {points} reaches rank {expected}"
    )


def t_matmul(a: galois.FieldArray, b: galois.FieldArray) -> galois.FieldArray:
    """Product of matrices with coefficients in F[t], shapes (T, r, m) @ (S, m, c)."""
    if a.shape[2] != b.shape[1]:
        raise DimensionMismatchError(
            user_msg=f"cannot multiply {a.shape[1]}x{a.shape[2]} "
            f"by {b.shape[1]}x{b.shape[2]}"
        )
    gf = type(a)
    result = gf.Zeros((a.shape[0] + b.shape[0] - 1, a.shape[1], b.shape[2]))
    for u in range(a.shape[0]):
        if not np.any(a[u]):
            continue
        for v in range(b.shape[0]):
            result[u + v] += a[u] @ b[v]
    return result


def t_scale(tensor: galois.FieldArray, t_poly: galois.FieldArray) -> galois.FieldArray:
    """Tensor with leading t axis times a t-polynomial given lowest degree first."""
    gf = type(tensor)
    result = gf.Zeros((tensor.shape[0] + t_poly.shape[0] - 1,) + tensor.shape[1:])
    for v, c in enumerate(t_poly):
        if c != 0:
            result[v : v + tensor.shape[0]] += tensor * c  # noqa
    return result


def t_pad(tensor: galois.FieldArray, length: int) -> galois.FieldArray:
    if tensor.shape[0] >= length:
        return tensor
    padded = type(tensor).Zeros((length,) + tensor.shape[1:])
    padded[: tensor.shape[0]] = tensor
    return padded


def t_trim(tensor: galois.FieldArray) -> galois.FieldArray:
    """Drop trailing zero t-slices, keeping at least one."""
    nonzero = [s for s in range(tensor.shape[0]) if np.any(tensor[s])]
    return tensor[: (nonzero[-1] + 1 if nonzero else 1)]


def t_evaluate(tensor: galois.FieldArray, value: FieldScalar) -> galois.FieldArray:
    gf = type(tensor)
    x = to_field(gf, value)
    result = tensor[-1].copy()
    for s in range(tensor.shape[0] - 2, -1, -1):
        result = result * x + tensor[s]
    return result


@dataclass(frozen=True, eq=False)
class PolyMatrix:
    """Matrix of univariate polynomials in ``var``.

    ``coeffs[j, s]`` is the matrix coefficient of ``var**j * t**s``, so the shape is
    (x-degree + 1, t-degree + 1, rows, cols). Matrices without ``t`` have a t axis of
    length one.
    """

    var: str
    coeffs: galois.FieldArray

    def __post_init__(self):
        if self.coeffs.ndim != 4 or 0 in self.coeffs.shape[:2]:
            raise DimensionMismatchError(
                user_msg=f"layer coefficients of shape {self.coeffs.shape}"
            )
        object.__setattr__(self, "coeffs", self.coeffs.copy())

    @classmethod
    def from_matrices(
        cls, var: str, matrices: Sequence[galois.FieldArray]
    ) -> "PolyMatrix":
        """From t-free coefficient matrices, lowest x-degree first."""
        gf = type(matrices[0])
        rows, cols = matrices[0].shape
        coeffs = gf.Zeros((len(matrices), 1, rows, cols))
        for j, matrix in enumerate(matrices):
            if matrix.shape != (rows, cols):
                raise DimensionMismatchError(
                    user_msg=f"coefficient {j} has shape {matrix.shape}, "
                    f"expected {(rows, cols)}"
                )
            coeffs[j, 0] = matrix
        return cls(var=var, coeffs=coeffs)

    @classmethod
    def from_tensors(
        cls, var: str, tensors: Sequence[galois.FieldArray]
    ) -> "PolyMatrix":
        """From coefficient tensors of shape (T, rows, cols) with varying T."""
        gf = type(tensors[0])
        length = max(tensor.shape[0] for tensor in tensors)
        coeffs = gf.Zeros((len(tensors), length) + tensors[0].shape[1:])
        for j, tensor in enumerate(tensors):
            coeffs[j, : tensor.shape[0]] = tensor
        return cls(var=var, coeffs=coeffs)

    @classmethod
    def constant(cls, var: str, matrix: galois.FieldArray) -> "PolyMatrix":
        if matrix.ndim == 2:
            matrix = matrix.reshape((1,) + matrix.shape)
        return cls.from_tensors(var, [matrix])

    @classmethod
    def from_entries(
        cls, var: str, entries: Sequence[Sequence[galois.Poly]]
    ) -> "PolyMatrix":
        gf = entries[0][0].field
        degree = max(entry.degree for row in entries for entry in row)
        coeffs = gf.Zeros((degree + 1, 1, len(entries), len(entries[0])))
        for i, row in enumerate(entries):
            for h, entry in enumerate(row):
                coeffs[:, 0, i, h] = poly_coefficients(entry, degree + 1)
        return cls(var=var, coeffs=coeffs)

    @property
    def field(self) -> type[galois.FieldArray]:
        return type(self.coeffs)

    @property
    def rows(self) -> int:
        return self.coeffs.shape[2]

    @property
    def cols(self) -> int:
        return self.coeffs.shape[3]

    @property
    def degree(self) -> int:
        nonzero = [j for j in range(self.coeffs.shape[0]) if np.any(self.coeffs[j])]
        return nonzero[-1] if nonzero else 0

    @property
    def t_degree(self) -> int:
        nonzero = [s for s in range(self.coeffs.shape[1]) if np.any(self.coeffs[:, s])]
        return nonzero[-1] if nonzero else 0

    def coefficient(self, j: int) -> galois.FieldArray:
        """Tensor (T, rows, cols) of the ``var**j`` coefficient."""
        if j >= self.coeffs.shape[0]:
            return self.field.Zeros(self.coeffs.shape[1:])
        return self.coeffs[j]

    def matrix(self, j: int) -> galois.FieldArray:
        """The ``var**j`` coefficient of a t-free matrix."""
        return self.coefficient(j)[0]

    def evaluate(self, value: FieldScalar) -> galois.FieldArray:
        """Tensor (T, rows, cols) at ``var = value``."""
        x = to_field(self.field, value)
        result = self.coeffs[-1].copy()
        for j in range(self.coeffs.shape[0] - 2, -1, -1):
            result = result * x + self.coeffs[j]
        return result

    def entry(self, i: int, h: int) -> galois.Poly:
        return galois.Poly(self.coeffs[:, 0, i, h], order="asc")
