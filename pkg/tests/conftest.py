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

from pathlib import Path
from typing import Callable, Optional, Sequence

import galois
import numpy as np
import pytest

from roabp_pit.common import exponents
from roabp_pit.roabp_core import DensePoly, Roabp

DATA_DIR = Path(__file__).parent / "data"
GOLDEN_DIR = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def gf() -> type[galois.FieldArray]:
    return galois.GF(101)


@pytest.fixture(scope="session")
def big_gf() -> type[galois.FieldArray]:
    return galois.GF(2**31 - 1)


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture()
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture()
def golden_dir() -> Path:
    return GOLDEN_DIR


@pytest.fixture()
def create_roabp() -> Callable[..., Roabp]:
    def create(
        gf: type[galois.FieldArray],
        n: int,
        d: int,
        w: int,
        rng: np.random.Generator,
        order: Optional[Sequence[int]] = None,
        shape: str = "scalar",
        exact_width: bool = False,
        density: float = 1.0,
    ) -> Roabp:
        if order is None:
            order = [int(var) for var in rng.permutation(n)]
        # node counts between layers; first and last depend on the output shape
        inner = [w if exact_width else int(rng.integers(1, w + 1)) for _ in range(n - 1)]
        dims = [1 if shape in ("scalar", "row") else w] + inner
        dims.append(1 if shape == "scalar" else w)

        layers = []
        for i in range(n):
            matrices = []
            for _ in range(d + 1):
                values = gf.Random((dims[i], dims[i + 1]), seed=rng)
                mask = gf((rng.random((dims[i], dims[i + 1])) < density).astype(int))
                matrices.append(values * mask)
            layers.append(matrices)
        return Roabp.from_coefficients(order, d, layers)

    return create


@pytest.fixture()
def create_product() -> Callable[..., Roabp]:
    """Width-1 ROABP of prod(sum_j factors[var][j] * x_var^j) in the given order."""

    def create(
        gf: type[galois.FieldArray],
        factors: Sequence[Sequence[int]],
        order: Optional[Sequence[int]] = None,
    ) -> Roabp:
        n = len(factors)
        d = max(len(factor) for factor in factors) - 1
        order = list(range(n)) if order is None else list(order)
        layers = [
            [
                gf([[factors[var][j] % gf.order if j < len(factors[var]) else 0]])
                for j in range(d + 1)
            ]
            for var in order
        ]
        return Roabp.from_coefficients(order, d, layers)

    return create


@pytest.fixture()
def create_dense() -> Callable[..., DensePoly]:
    def create(
        gf: type[galois.FieldArray],
        n: int,
        d: int,
        terms: int,
        rng: np.random.Generator,
        output_shape: tuple[int, int] = (1, 1),
    ) -> DensePoly:
        monomials = list(exponents(n, d))
        chosen = rng.choice(
            len(monomials), size=min(terms, len(monomials)), replace=False
        )
        k = output_shape[0] * output_shape[1]
        coeffs = {}
        for index in chosen:
            value = gf.Random((1, k), low=1, seed=rng)
            coeffs[monomials[int(index)]] = value
        return DensePoly(field=gf, n=n, d=d, coeffs=coeffs, output_shape=output_shape)

    return create
