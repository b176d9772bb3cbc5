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
import itertools
import logging
import math
import os
from pathlib import Path
from typing import Any, Iterator, Optional, Sequence

import galois
from typed_json_dataclass import TypedJsonMixin
import yaml


LOGGER = logging.getLogger(__name__)


DEFAULT_MODULUS = 2**31 - 1
MODULUS_ENV_VAR = "ROABP_PIT_MODULUS"

Exponent = tuple[int, ...]


class RoabpError(Exception):
    """Base of all errors surfaced to users.

    ``user_msg`` is what the command line prints, ``exit_code`` what it exits with.
    """

    exit_code = 2

    def __init__(self, user_msg: str) -> None:
        super().__init__(user_msg)
        self.user_msg = user_msg


class FieldTooSmallError(RoabpError):
    pass


class BudgetExceededError(RoabpError):
    pass


class DimensionMismatchError(RoabpError):
    pass


class OrderMismatchError(RoabpError):
    pass


class PreconditionError(RoabpError):
    pass


class RankCrossCheckError(RoabpError):
    pass


class RoabpFormatError(RoabpError):
    def __init__(self, user_msg: str, position: Optional[str] = None) -> None:
        super().__init__(f"{position}: {user_msg}" if position else user_msg)
        self.position = position


class NotRepresentableError(RoabpError):
    def __init__(self, layer: int, dependency: Exponent) -> None:
        super().__init__(
            f"not representable at this width in this order: dependency {dependency} "
            f"fails at layer {layer}"
        )
        self.layer = layer
        self.dependency = dependency


@dataclass(frozen=True)
class Settings(TypedJsonMixin):
    modulus: int = DEFAULT_MODULUS
    dense_budget: int = 10**6
    width_cap: int = 10**4
    grid_budget: int = 10**6
    seed: int = 0
    jobs: int = 1
    weight_retries: int = 256
    weight_bound: int = 64

    @classmethod
    def from_dict(cls, data: dict) -> "Settings":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise PreconditionError(
                user_msg=f"Unknown configuration keys: {', '.join(sorted(unknown))}"
            )
        try:
            # don't use TypedJsonMixin.from_dict, return type is wrong
            settings = cls(**data)
        except TypeError as e:
            raise PreconditionError(user_msg=f"Invalid configuration: {e}") from e

        if not galois.is_prime(settings.modulus):
            raise PreconditionError(user_msg=f"Modulus {settings.modulus} is not prime")
        if settings.jobs < 1:
            raise PreconditionError(user_msg="jobs must be at least 1")
        return settings


def load_settings(config_path: Optional[Path] = None) -> Settings:
    data: dict[str, Any] = {}
    if config_path is not None:
        with open(config_path, encoding="utf-8") as config_file:
            data = yaml.safe_load(config_file) or {}
        if not isinstance(data, dict):
            raise PreconditionError(user_msg=f"{config_path}: expected a mapping")

    if modulus := os.environ.get(MODULUS_ENV_VAR):
        try:
            data["modulus"] = int(modulus)
        except ValueError as e:
            raise PreconditionError(
                user_msg=f"{MODULUS_ENV_VAR} is not an integer: {modulus}"
            ) from e

    settings = Settings.from_dict(data)
    LOGGER.debug("Loaded settings %s", settings)
    return settings


def exponents(n: int, d: int) -> Iterator[Exponent]:
    """All of {0..d}^n in lexicographic order."""
    return itertools.product(range(d + 1), repeat=n)


def support(a: Sequence[int]) -> int:
    return sum(1 for entry in a if entry)


def monomial_weight(weights: Sequence[int], a: Sequence[int]) -> int:
    return sum(w * e for w, e in zip(weights, a))


def ceil_log2(value: int) -> int:
    """Smallest l with 2**l >= value, for value >= 1."""
    if value < 1:
        raise ValueError(f"ceil_log2 of non-positive value {value}")
    return (value - 1).bit_length()


def binomial_product(b: Sequence[int], a: Sequence[int]) -> int:
    return math.prod(math.comb(b_i, a_i) for b_i, a_i in zip(b, a))


def variable_name(index: int) -> str:
    return f"x{index + 1}"


def check_budget(count: int, budget: int, what: str) -> None:
    if count > budget:
        raise BudgetExceededError(
            user_msg=f"{what} needs {count} entries, budget is {budget}"
        )
