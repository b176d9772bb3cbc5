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

"""JSON file formats for ROABPs and shift tuples.

An ROABP file holds the header fields ``modulus``, ``n``, ``d``, ``w``, ``order``
(0-based variable indices, layer i reads x_{order[i]+1}) and ``shape``, and
``layers[i][row][col]``, the coefficient list [c_0, .., c_d] of one entry.
"""

import dataclasses
from dataclasses import dataclass
import json
import logging
from typing import Any, List

import galois
import numpy as np
from typed_json_dataclass import TypedJsonMixin

from .algebra import field, poly
from .common import PreconditionError, RoabpError, RoabpFormatError
from .roabp_core import Roabp, ShiftTuple


LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class RoabpFile(TypedJsonMixin):
    modulus: int
    n: int
    d: int
    w: int
    order: List[int]
    shape: str
    layers: List[List[List[List[int]]]]

    @classmethod
    def from_dict(cls, data: Any) -> "RoabpFile":
        if not isinstance(data, dict):
            raise RoabpFormatError("expected a JSON object", position="top level")
        fields = set(cls.__dataclass_fields__)
        if missing := fields - set(data):
            raise RoabpFormatError(
                f"missing keys {', '.join(sorted(missing))}", position="header"
            )
        if unknown := set(data) - fields:
            raise RoabpFormatError(
                f"unknown keys {', '.join(sorted(unknown))}", position="header"
            )
        _check_nesting(data["layers"], depth=4, position="layers")
        try:
            # don't use TypedJsonMixin.from_dict, return type is wrong
            return cls(**data)
        except TypeError as e:
            raise RoabpFormatError(f"invalid header: {e}", position="header") from e

    @classmethod
    def from_roabp(cls, r: Roabp) -> "RoabpFile":
        if r.t_degree:
            raise PreconditionError(user_msg="cannot serialize an ROABP depending on t")
        layers = []
        for layer in r.layers:
            layers.append(
                [
                    [
                        [int(layer.coefficient(j)[0, row, col]) for j in range(r.d + 1)]
                        for col in range(layer.cols)
                    ]
                    for row in range(layer.rows)
                ]
            )
        try:
            return cls(
                modulus=int(r.field.order),
                n=int(r.n),
                d=int(r.d),
                w=int(r.width),
                order=[int(var) for var in r.order],
                shape=r.shape.value,
                layers=layers,
            )
        except TypeError as e:
            raise PreconditionError(user_msg=f"cannot serialize ROABP: {e}") from e

    def _layer_matrices(
        self, gf: type[galois.FieldArray], i: int, layer: Any
    ) -> list[galois.FieldArray]:
        position = f"layers[{i}]"
        if not isinstance(layer, list) or not layer:
            raise RoabpFormatError("expected a non-empty list of rows", position=position)
        cols = len(layer[0]) if isinstance(layer[0], list) else 0
        values = np.zeros((self.d + 1, len(layer), max(cols, 1)), dtype=np.int64)
        for row_index, row in enumerate(layer):
            row_position = f"{position}[{row_index}]"
            if not isinstance(row, list) or not row or len(row) != cols:
                raise RoabpFormatError(
                    f"expected a list of {max(cols, 1)} entries", position=row_position
                )
            for col_index, entry in enumerate(row):
                entry_position = f"{row_position}[{col_index}]"
                if not isinstance(entry, list) or len(entry) != self.d + 1:
                    raise RoabpFormatError(
                        f"expected {self.d + 1} coefficients", position=entry_position
                    )
                for j, value in enumerate(entry):
                    if type(value) is not int or not 0 <= value < self.modulus:
                        raise RoabpFormatError(
                            f"coefficient {value!r} is not an integer in "
                            f"[0, {self.modulus})",
                            position=f"{entry_position}[{j}]",
                        )
                    values[j, row_index, col_index] = value
        return [gf(values[j]) for j in range(self.d + 1)]

    def to_roabp(self) -> Roabp:
        try:
            gf = field(self.modulus)
        except PreconditionError as e:
            raise RoabpFormatError(e.user_msg, position="modulus") from e
        if self.n < 1 or self.d < 0:
            raise RoabpFormatError(f"invalid n={self.n}, d={self.d}", position="header")
        if sorted(self.order) != list(range(self.n)):
            raise RoabpFormatError(
                f"{self.order} is not a permutation of 0..{self.n - 1}", position="order"
            )
        if len(self.layers) != self.n:
            raise RoabpFormatError(
                f"{len(self.layers)} layers for n={self.n}", position="layers"
            )

        matrices = [
            self._layer_matrices(gf, i, layer) for i, layer in enumerate(self.layers)
        ]
        try:
            r = Roabp.from_coefficients(self.order, self.d, matrices)
        except RoabpError as e:
            raise RoabpFormatError(e.user_msg, position="layers") from e

        if r.width != self.w:
            raise RoabpFormatError(
                f"declared {self.w}, layers give {r.width}", position="w"
            )
        if r.shape.value != self.shape:
            raise RoabpFormatError(
                f"declared {self.shape}, layers give {r.shape.value}", position="shape"
            )
        return r

    def dump(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True) + "\n"


def _check_nesting(value: Any, depth: int, position: str) -> None:
    # depth 0 is a coefficient, bool is rejected although it is an int subclass
    if depth == 0:
        if type(value) is not int:
            raise RoabpFormatError(
                f"coefficient {value!r} is not an integer", position=position
            )
        return
    if not isinstance(value, list):
        raise RoabpFormatError(f"expected a list, got {value!r}", position=position)
    for index, item in enumerate(value):
        _check_nesting(item, depth - 1, f"{position}[{index}]")


def _load_json(text: str, source: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise RoabpFormatError(e.msg, position=f"{source}:{e.lineno}:{e.colno}") from e


def parse_roabp(text: str, source: str = "<input>") -> Roabp:
    r = RoabpFile.from_dict(_load_json(text, source)).to_roabp()
    LOGGER.debug("Parsed %s: n=%s d=%s width=%s", source, r.n, r.d, r.width)
    return r


def dump_roabp(r: Roabp) -> str:
    return RoabpFile.from_roabp(r).dump()


def parse_shift(
    text: str, gf: type[galois.FieldArray], n: int, source: str = "<input>"
) -> ShiftTuple:
    """``{"shift": [[c_0, c_1, ..], ..]}``, one t-polynomial per variable."""
    data = _load_json(text, source)
    if not isinstance(data, dict) or not isinstance(data.get("shift"), list):
        raise RoabpFormatError('expected {"shift": [...]}', position=source)
    entries = data["shift"]
    if len(entries) != n:
        raise RoabpFormatError(f"{len(entries)} entries for n={n}", position="shift")
    polys = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, list) or any(type(c) is not int for c in entry):
            raise RoabpFormatError("expected a list of integers", position=f"shift[{i}]")
        polys.append(poly(gf, entry))
    return ShiftTuple(entries=tuple(polys))
