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
from enum import Enum
import logging
import math
from types import MappingProxyType
from typing import Mapping, Optional, Sequence, Union

import galois
import numpy as np

from .algebra import (
    FieldScalar,
    PolyMatrix,
    poly,
    poly_coefficients,
    t_evaluate,
    t_matmul,
    t_pad,
    t_scale,
    t_trim,
    to_field,
)
from .common import (
    DimensionMismatchError,
    Exponent,
    OrderMismatchError,
    PreconditionError,
    check_budget,
    variable_name,
)


LOGGER = logging.getLogger(__name__)


DEFAULT_DENSE_BUDGET = 10**6


class Shape(str, Enum):
    SCALAR = "scalar"
    ROW = "row"
    MATRIX = "matrix"


def t_add(a: Optional[galois.FieldArray], b: galois.FieldArray) -> galois.FieldArray:
    if a is None:
        return b
    length = max(a.shape[0], b.shape[0])
    return t_pad(a, length) + t_pad(b, length)


@dataclass(frozen=True, eq=False)
class ShiftTuple:
    """Per-variable shift polynomials f_i(t); constants are degree-0 polynomials."""

    entries: tuple[galois.Poly, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        if len({entry.field for entry in self.entries}) > 1:
            raise PreconditionError(user_msg="shift entries over different fields")

    @classmethod
    def constants(
        cls, gf: type[galois.FieldArray], values: Sequence[FieldScalar]
    ) -> "ShiftTuple":
        return cls(entries=tuple(poly(gf, [int(value)]) for value in values))

    @classmethod
    def zero(cls, gf: type[galois.FieldArray], n: int) -> "ShiftTuple":
        return cls.constants(gf, [0] * n)

    @classmethod
    def monomials(
        cls, gf: type[galois.FieldArray], weights: Sequence[int]
    ) -> "ShiftTuple":
        """The shift by t**w(i)."""
        return cls(entries=tuple(poly(gf, [0] * weight + [1]) for weight in weights))

    @classmethod
    def coerce(
        cls, gf: type[galois.FieldArray], f: Union["ShiftTuple", Sequence[FieldScalar]]
    ) -> "ShiftTuple":
        return f if isinstance(f, ShiftTuple) else cls.constants(gf, f)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def field(self) -> type[galois.FieldArray]:
        return self.entries[0].field

    @property
    def degree(self) -> int:
        return max((entry.degree for entry in self.entries), default=0)

    @property
    def is_constant(self) -> bool:
        return self.degree == 0

    def at(self, value: FieldScalar) -> tuple[galois.FieldArray, ...]:
        t = to_field(self.field, value)
        return tuple(entry(t) for entry in self.entries)

    def __neg__(self) -> "ShiftTuple":
        return ShiftTuple(entries=tuple(-entry for entry in self.entries))


@dataclass(frozen=True, eq=False)
class DensePoly:
    """Exact coefficient map of a polynomial in x_1..x_n with individual degree <= d.

    Coefficients lie in a k-dimensional space, k = rows * cols of ``output_shape``,
    and are stored flattened row-major. Each value has shape (T, k): the leading axis
    holds coefficients of t**0..t**(T-1) and has length one for polynomials over F.
    Zero coefficients are never stored; keys iterate in lexicographic order.
    """

    field: type[galois.FieldArray]
    n: int
    d: int
    coeffs: Mapping[Exponent, galois.FieldArray]
    output_shape: tuple[int, int] = (1, 1)

    def __post_init__(self):
        k = self.output_shape[0] * self.output_shape[1]
        length = 1
        for a, value in self.coeffs.items():
            if len(a) != self.n or any(e < 0 or e > self.d for e in a):
                raise DimensionMismatchError(
                    user_msg=f"exponent {a} outside {{0..{self.d}}}^{self.n}"
                )
            if value.ndim != 2 or value.shape[1] != k:
                raise DimensionMismatchError(
                    user_msg=f"coefficient of shape {value.shape}, expected (T, {k})"
                )
            length = max(length, t_trim(value).shape[0])

        normalized = {
            tuple(int(e) for e in a): t_pad(t_trim(value), length)[:length]
            for a, value in sorted(self.coeffs.items())
            if np.any(value)
        }
        object.__setattr__(self, "coeffs", MappingProxyType(normalized))
        object.__setattr__(self, "output_shape", tuple(self.output_shape))

    @classmethod
    def zero(
        cls,
        gf: type[galois.FieldArray],
        n: int,
        d: int,
        output_shape: tuple[int, int] = (1, 1),
    ) -> "DensePoly":
        return cls(field=gf, n=n, d=d, coeffs={}, output_shape=output_shape)

    @classmethod
    def from_scalars(
        cls, gf: type[galois.FieldArray], n: int, d: int, terms: Mapping[Exponent, int]
    ) -> "DensePoly":
        return cls(
            field=gf,
            n=n,
            d=d,
            coeffs={
                tuple(a): to_field(gf, value).reshape(1, 1) for a, value in terms.items()
            },
        )

    @property
    def k(self) -> int:
        return self.output_shape[0] * self.output_shape[1]

    @property
    def t_length(self) -> int:
        return next(iter(self.coeffs.values())).shape[0] if self.coeffs else 1

    @property
    def t_degree(self) -> int:
        return self.t_length - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def support_set(self) -> tuple[Exponent, ...]:
        return tuple(self.coeffs)

    def get(self, a: Sequence[int]) -> galois.FieldArray:
        value = self.coeffs.get(tuple(a))
        if value is None:
            return self.field.Zeros((self.t_length, self.k))
        return value

    def vector(self, a: Sequence[int]) -> galois.FieldArray:
        if self.t_degree:
            raise PreconditionError(user_msg="coefficient depends on t")
        return self.get(a)[0]

    def scalar(self, a: Sequence[int]) -> galois.FieldArray:
        return self.vector(a)[0]

    def _like(self, coeffs: Mapping[Exponent, galois.FieldArray]) -> "DensePoly":
        return DensePoly(
            field=self.field,
            n=self.n,
            d=self.d,
            coeffs=coeffs,
            output_shape=self.output_shape,
        )

    def _check_compatible(self, other: "DensePoly") -> None:
        if (self.n, self.d, self.output_shape) != (other.n, other.d, other.output_shape):
            raise DimensionMismatchError(
                user_msg=f"cannot combine polynomials with (n, d, shape) "
                f"{(self.n, self.d, self.output_shape)} and "
                f"{(other.n, other.d, other.output_shape)}"
            )

    def __add__(self, other: "DensePoly") -> "DensePoly":
        self._check_compatible(other)
        coeffs = dict(self.coeffs)
        for a, value in other.coeffs.items():
            coeffs[a] = t_add(coeffs.get(a), value)
        return self._like(coeffs)

    def __neg__(self) -> "DensePoly":
        return self._like({a: -value for a, value in self.coeffs.items()})

    def __sub__(self, other: "DensePoly") -> "DensePoly":
        return self + (-other)

    def scale(self, c: FieldScalar) -> "DensePoly":
        factor = to_field(self.field, c)
        return self._like({a: value * factor for a, value in self.coeffs.items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DensePoly):
            return NotImplemented
        if (self.n, self.d, self.output_shape) != (other.n, other.d, other.output_shape):
            return False
        if self.coeffs.keys() != other.coeffs.keys():
            return False
        length = max(self.t_length, other.t_length)
        return all(
            np.array_equal(t_pad(value, length), t_pad(other.coeffs[a], length))
            for a, value in self.coeffs.items()
        )

    __hash__ = None  # type: ignore

    def evaluate(
        self, point: Sequence[FieldScalar], t: Optional[FieldScalar] = None
    ) -> galois.FieldArray:
        """Value at ``point`` as an output-shaped matrix, or a scalar for 1x1 outputs."""
        if len(point) != self.n:
            raise DimensionMismatchError(
                user_msg=f"point of length {len(point)} for {self.n} variables"
            )
        values = [to_field(self.field, value) for value in point]
        total = self.field.Zeros((self.t_length, self.k))
        for a, value in self.coeffs.items():
            monomial = self.field(1)
            for x, e in zip(values, a):
                monomial = monomial * x**e
            total += value * monomial
        return _output(_collapse_t(total, t).reshape(self.output_shape))

    def slice(self, variables: Sequence[int], a: Sequence[int]) -> "DensePoly":
        """The coefficient of y^a where y = ``variables``, as a polynomial in the rest."""
        assignment = dict(zip(variables, a))
        coeffs = {}
        for b, value in self.coeffs.items():
            if all(b[var] == e for var, e in assignment.items()):
                key = tuple(0 if i in assignment else e for i, e in enumerate(b))
                coeffs[key] = value
        return self._like(coeffs)

    def component(self, index: int) -> "DensePoly":
        """Scalar polynomial of one flattened coefficient coordinate."""
        return DensePoly(
            field=self.field,
            n=self.n,
            d=self.d,
            coeffs={a: value[:, index : index + 1] for a, value in self.coeffs.items()},  # noqa
        )

    def multiply(self, other: "DensePoly") -> "DensePoly":
        """Product with a scalar polynomial; exponents must stay within d."""
        if other.k != 1 or (self.n, self.d) != (other.n, other.d):
            raise DimensionMismatchError(
                user_msg="multiply needs a scalar polynomial over the same variables"
            )
        coeffs: dict[Exponent, galois.FieldArray] = {}
        for a, value in self.coeffs.items():
            for b, other_value in other.coeffs.items():
                c = tuple(x + y for x, y in zip(a, b))
                if max(c, default=0) > self.d:
                    raise PreconditionError(
                        user_msg=f"product exponent {c} exceeds degree bound {self.d}"
                    )
                coeffs[c] = t_add(coeffs.get(c), t_scale(value, other_value[:, 0]))
        return self._like(coeffs)

    def dot(self, alpha: galois.FieldArray) -> "DensePoly":
        """The scalar polynomial <alpha, A> for alpha of the output shape."""
        flat = alpha.reshape(-1)
        if flat.size != self.k:
            raise DimensionMismatchError(
                user_msg=f"alpha of size {flat.size} for coefficients of size {self.k}"
            )
        return DensePoly(
            field=self.field,
            n=self.n,
            d=self.d,
            coeffs={a: (value @ flat).reshape(-1, 1) for a, value in self.coeffs.items()},
        )

    def coefficient_matrix(
        self, exponents: Optional[Sequence[Exponent]] = None
    ) -> galois.FieldArray:
        """Rows are the flattened coefficients of ``exponents`` (default: the support)."""
        if self.t_degree:
            raise PreconditionError(user_msg="coefficients depend on t")
        rows = self.support_set if exponents is None else exponents
        matrix = self.field.Zeros((len(rows), self.k))
        for i, a in enumerate(rows):
            matrix[i] = self.vector(a)
        return matrix

    def coefficient_polys(self, exponents: Sequence[Exponent]) -> list[list[galois.Poly]]:
        """Rows of t-polynomial entries for rank computations over F(t)."""
        rows = []
        for a in exponents:
            value = self.get(a)
            rows.append(
                [galois.Poly(value[:, j], order="asc") for j in range(self.k)]
            )
        return rows


def _collapse_t(tensor: galois.FieldArray, t: Optional[FieldScalar]) -> galois.FieldArray:
    if t is not None:
        return t_evaluate(tensor, t)
    if np.any(tensor[1:]):
        raise PreconditionError(user_msg="value depends on t, pass a value for t")
    return tensor[0]


def _output(matrix: galois.FieldArray) -> galois.FieldArray:
    if matrix.shape == (1, 1):
        return matrix[0, 0]
    return matrix


@dataclass(frozen=True, eq=False)
class Roabp:
    """A(x) = D_1(x_{order[0]}) ... D_n(x_{order[n-1]}), variables 0-indexed.

    Layer matrices may be rectangular; the width is the largest dimension.
    """

    n: int
    d: int
    order: tuple[int, ...]
    layers: tuple[PolyMatrix, ...]

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(int(var) for var in self.order))
        object.__setattr__(self, "layers", tuple(self.layers))

        if self.n < 1:
            raise PreconditionError(user_msg="an ROABP needs at least one variable")
        if sorted(self.order) != list(range(self.n)):
            raise PreconditionError(
                user_msg=f"order {list(self.order)} is not a permutation "
                f"of 0..{self.n - 1}"
            )
        if len(self.layers) != self.n:
            raise DimensionMismatchError(
                user_msg=f"{len(self.layers)} layers for {self.n} variables"
            )
        for i, (layer, var) in enumerate(zip(self.layers, self.order)):
            if layer.var != variable_name(var):
                raise DimensionMismatchError(
                    user_msg=f"layer {i} is over {layer.var}, "
                    f"expected {variable_name(var)}"
                )
            if layer.degree > self.d:
                raise DimensionMismatchError(
                    user_msg=f"layer {i} has degree {layer.degree} > {self.d}"
                )
            if layer.field is not self.layers[0].field:
                raise DimensionMismatchError(user_msg=f"layer {i} is over another field")
        for i in range(self.n - 1):
            if self.layers[i].cols != self.layers[i + 1].rows:
                raise DimensionMismatchError(
                    user_msg=f"layer {i} has {self.layers[i].cols} columns but layer "
                    f"{i + 1} has {self.layers[i + 1].rows} rows"
                )

    @classmethod
    def from_coefficients(
        cls,
        order: Sequence[int],
        d: int,
        layers: Sequence[Sequence[galois.FieldArray]],
    ) -> "Roabp":
        """Layer i given as its coefficient matrices for x**0, x**1, ..."""
        return cls(
            n=len(order),
            d=d,
            order=tuple(order),
            layers=tuple(
                PolyMatrix.from_matrices(variable_name(var), matrices)
                for var, matrices in zip(order, layers)
            ),
        )

    @property
    def field(self) -> type[galois.FieldArray]:
        return self.layers[0].field

    @property
    def output_shape(self) -> tuple[int, int]:
        return (self.layers[0].rows, self.layers[-1].cols)

    @property
    def shape(self) -> Shape:
        rows, cols = self.output_shape
        if rows == 1 and cols == 1:
            return Shape.SCALAR
        if rows == 1:
            return Shape.ROW
        return Shape.MATRIX

    @property
    def width(self) -> int:
        return max(max(layer.rows, layer.cols) for layer in self.layers)

    @property
    def t_degree(self) -> int:
        return sum(layer.t_degree for layer in self.layers)

    def require_scalar(self, what: str) -> None:
        if self.shape != Shape.SCALAR:
            raise PreconditionError(
                user_msg=f"{what} needs a scalar-output ROABP, got {self.shape.value}"
            )


def _check_exponent(r: Roabp, a: Sequence[int]) -> None:
    if len(a) != r.n:
        raise DimensionMismatchError(
            user_msg=f"exponent of length {len(a)} for {r.n} variables"
        )
    if any(e < 0 or e > r.d for e in a):
        raise PreconditionError(user_msg=f"exponent {tuple(a)} outside [0, {r.d}]")


def evaluate(
    r: Roabp, point: Sequence[FieldScalar], t: Optional[FieldScalar] = None
) -> galois.FieldArray:
    """D_1(p) ... D_n(p); ``t`` must be given if the layers depend on t."""
    if len(point) != r.n:
        raise DimensionMismatchError(
            user_msg=f"point of length {len(point)} for {r.n} variables"
        )
    product = r.layers[0].evaluate(point[r.order[0]])
    for layer, var in zip(r.layers[1:], r.order[1:]):
        product = t_matmul(product, layer.evaluate(point[var]))
    return _output(_collapse_t(product, t))


def _coefficient_tensor(r: Roabp, a: Sequence[int]) -> galois.FieldArray:
    _check_exponent(r, a)
    product = r.layers[0].coefficient(a[r.order[0]])
    for layer, var in zip(r.layers[1:], r.order[1:]):
        product = t_matmul(product, layer.coefficient(a[var]))
    return t_trim(product)


def coeff(r: Roabp, a: Sequence[int]) -> galois.FieldArray:
    """coeff_A(x^a) as the product of per-layer coefficient matrices.

    For ROABPs over F this is the output matrix (a scalar for scalar outputs). For
    layers depending on t it is the tensor of shape (T, rows, cols).
    """
    product = _coefficient_tensor(r, a)
    if r.t_degree:
        return product
    return _output(product[0])


def expand_dense(r: Roabp, budget: int = DEFAULT_DENSE_BUDGET) -> DensePoly:
    check_budget((r.d + 1) ** r.n, budget, "dense expansion")

    gf = r.field
    rows = r.layers[0].rows
    partial: dict[Exponent, galois.FieldArray] = {
        (): gf.Identity(rows).reshape(1, rows, rows)
    }
    for layer in r.layers:
        extended = {}
        for prefix, value in partial.items():
            for j in range(layer.degree + 1):
                factor = layer.coefficient(j)
                if not np.any(factor):
                    continue
                product = t_matmul(value, factor)
                if np.any(product):
                    extended[prefix + (j,)] = product
        partial = extended

    coeffs = {}
    for prefix, value in partial.items():
        a = [0] * r.n
        for var, e in zip(r.order, prefix):
            a[var] = e
        coeffs[tuple(a)] = value.reshape(value.shape[0], -1)
    LOGGER.debug("Expanded ROABP into %s nonzero coefficients", len(coeffs))
    return DensePoly(field=gf, n=r.n, d=r.d, coeffs=coeffs, output_shape=r.output_shape)


def coeff_operator(r: Roabp, y_vars: Sequence[int], a: Sequence[int]) -> Roabp:
    """ROABP for A_{(y,a)}: each layer of ``y_vars`` fixed to its a-coefficient."""
    if len(y_vars) != len(a):
        raise DimensionMismatchError(
            user_msg=f"{len(a)} exponents for {len(y_vars)} variables"
        )
    assignment = dict(zip(y_vars, a))
    if any(var < 0 or var >= r.n for var in assignment):
        raise DimensionMismatchError(
            user_msg=f"variables {list(y_vars)} outside 0..{r.n - 1}"
        )
    if any(e < 0 or e > r.d for e in a):
        raise PreconditionError(user_msg=f"exponent {tuple(a)} outside [0, {r.d}]")

    layers = tuple(
        PolyMatrix.constant(layer.var, layer.coefficient(assignment[var]))
        if var in assignment
        else layer
        for layer, var in zip(r.layers, r.order)
    )
    return Roabp(n=r.n, d=r.d, order=r.order, layers=layers)


def _shift_layer(layer: PolyMatrix, by: galois.Poly) -> PolyMatrix:
    gf = layer.field
    powers = [poly_coefficients(by**e) for e in range(layer.degree + 1)]
    tensors: list[Optional[galois.FieldArray]] = [None] * (layer.degree + 1)
    for j in range(layer.degree + 1):
        c = layer.coefficient(j)
        if not np.any(c):
            continue
        for m in range(j + 1):
            term = t_scale(c, powers[j - m]) * to_field(gf, math.comb(j, m))
            tensors[m] = t_add(tensors[m], term)
    zero = gf.Zeros((1, layer.rows, layer.cols))
    return PolyMatrix.from_tensors(
        layer.var, [zero if tensor is None else tensor for tensor in tensors]
    )


def shift(r: Roabp, f: Union[ShiftTuple, Sequence[FieldScalar]]) -> Roabp:
    """The ROABP of A(x + f); layers stay univariate in their variable."""
    f = ShiftTuple.coerce(r.field, f)
    if len(f) != r.n:
        raise DimensionMismatchError(
            user_msg=f"shift of length {len(f)} for {r.n} variables"
        )
    return Roabp(
        n=r.n,
        d=r.d,
        order=r.order,
        layers=tuple(
            _shift_layer(layer, f.entries[var]) for layer, var in zip(r.layers, r.order)
        ),
    )


def shift_dense(p: DensePoly, f: Union[ShiftTuple, Sequence[FieldScalar]]) -> DensePoly:
    """A(x + f) by substituting one variable at a time."""
    f = ShiftTuple.coerce(p.field, f)
    if len(f) != p.n:
        raise DimensionMismatchError(
            user_msg=f"shift of length {len(f)} for {p.n} variables"
        )

    current: dict[Exponent, galois.FieldArray] = dict(p.coeffs)
    for var, by in enumerate(f.entries):
        powers = [poly_coefficients(by**e) for e in range(p.d + 1)]
        substituted: dict[Exponent, galois.FieldArray] = {}
        for a, value in current.items():
            e = a[var]
            for m in range(e + 1):
                key = a[:var] + (m,) + a[var + 1 :]  # noqa
                term = t_scale(value, powers[e - m]) * to_field(p.field, math.comb(e, m))
                substituted[key] = t_add(substituted.get(key), term)
        current = substituted
    return DensePoly(
        field=p.field, n=p.n, d=p.d, coeffs=current, output_shape=p.output_shape
    )


def scale(r: Roabp, c: FieldScalar) -> Roabp:
    first = r.layers[0]
    scaled = PolyMatrix(var=first.var, coeffs=first.coeffs * to_field(r.field, c))
    return Roabp(n=r.n, d=r.d, order=r.order, layers=(scaled,) + r.layers[1:])


def negate(r: Roabp) -> Roabp:
    return scale(r, -1)


def linear_combination(rs: Sequence[Roabp], gammas: Sequence[FieldScalar]) -> Roabp:
    """Width sum(widths) ROABP for sum(gamma_i * A_i), layers stacked block-diagonally."""
    if not rs:
        raise PreconditionError(user_msg="linear combination of no ROABPs")
    if len(rs) != len(gammas):
        raise DimensionMismatchError(
            user_msg=f"{len(gammas)} coefficients for {len(rs)} ROABPs"
        )
    first = rs[0]
    for r in rs:
        if (r.n, r.d) != (first.n, first.d):
            raise DimensionMismatchError(
                user_msg=f"(n, d) = {(r.n, r.d)} differs from {(first.n, first.d)}"
            )
        if r.order != first.order:
            raise OrderMismatchError(
                user_msg=f"order {list(r.order)} differs from {list(first.order)}"
            )
        r.require_scalar("linear_combination")

    gf = first.field
    factors = [to_field(gf, gamma) for gamma in gammas]
    n = first.n
    layers = []
    for i in range(n):
        blocks = [r.layers[i] for r in rs]
        degree = max(block.coeffs.shape[0] for block in blocks)
        t_length = max(block.coeffs.shape[1] for block in blocks)
        rows = 1 if i == 0 else sum(block.rows for block in blocks)
        cols = 1 if i == n - 1 else sum(block.cols for block in blocks)
        coeffs = gf.Zeros((degree, t_length, rows, cols))

        row_offset = col_offset = 0
        for block, factor in zip(blocks, factors):
            values = block.coeffs * factor if i == 0 else block.coeffs
            row_end = 1 if i == 0 else row_offset + block.rows
            col_end = 1 if i == n - 1 else col_offset + block.cols
            coeffs[
                : values.shape[0],
                : values.shape[1],
                row_end - block.rows : row_end,
                col_end - block.cols : col_end,
            ] += values
            row_offset, col_offset = row_end, col_end
        layers.append(PolyMatrix(var=blocks[0].var, coeffs=coeffs))
    return Roabp(n=n, d=first.d, order=first.order, layers=tuple(layers))


def dot_product(r: Roabp, alpha: galois.FieldArray) -> Roabp:
    """Scalar ROABP for <alpha, A> with one copy of the program per output row.

    A new start node is joined to the h-th start node of copy h; end node j of copy
    h is joined to the new end node with weight alpha[h, j].
    """
    if alpha.shape != r.output_shape:
        raise DimensionMismatchError(
            user_msg=f"alpha of shape {alpha.shape} for output shape {r.output_shape}"
        )
    gf = r.field
    copies, cols = r.output_shape
    if r.n == 1:
        source = r.layers[0].coeffs
        coeffs = gf.Zeros(source.shape[:2] + (1, 1))
        for j in range(source.shape[0]):
            for s in range(source.shape[1]):
                coeffs[j, s, 0, 0] = source[j, s].reshape(-1) @ alpha.reshape(-1)
        return Roabp(
            n=1, d=r.d, order=r.order, layers=(PolyMatrix(r.layers[0].var, coeffs),)
        )

    layers = []
    for i, layer in enumerate(r.layers):
        source = layer.coeffs
        block_rows, block_cols = layer.rows, layer.cols
        if i == 0:
            coeffs = gf.Zeros(source.shape[:2] + (1, copies * block_cols))
            for h in range(copies):
                coeffs[:, :, 0, h * block_cols : (h + 1) * block_cols] = source[:, :, h, :]  # noqa
        elif i == r.n - 1:
            coeffs = gf.Zeros(source.shape[:2] + (copies * block_rows, 1))
            for h in range(copies):
                weights = alpha[h].reshape(cols, 1)
                for j in range(source.shape[0]):
                    for s in range(source.shape[1]):
                        coeffs[j, s, h * block_rows : (h + 1) * block_rows] = (  # noqa
                            source[j, s] @ weights
                        )
        else:
            coeffs = gf.Zeros(
                source.shape[:2] + (copies * block_rows, copies * block_cols)
            )
            for h in range(copies):
                coeffs[
                    :,
                    :,
                    h * block_rows : (h + 1) * block_rows,  # noqa
                    h * block_cols : (h + 1) * block_cols,  # noqa
                ] = source
        layers.append(PolyMatrix(var=layer.var, coeffs=coeffs))
    return Roabp(n=r.n, d=r.d, order=r.order, layers=tuple(layers))
