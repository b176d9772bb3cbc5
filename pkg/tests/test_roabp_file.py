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

import json

import pytest

from roabp_pit.common import RoabpFormatError
from roabp_pit.roabp_core import ShiftTuple, expand_dense
from roabp_pit.roabp_file import RoabpFile, dump_roabp, parse_roabp, parse_shift


def test_parse_example(data_dir, gf):
    r = parse_roabp((data_dir / "coefficient_example.json").read_text())
    assert (r.n, r.d, r.width, r.order) == (2, 2, 2, (0, 1))
    assert r.field.order == 101
    dense = expand_dense(r)
    assert dense.support_set == ((1, 0), (1, 1), (2, 0))


def test_dump_is_canonical(data_dir):
    r = parse_roabp((data_dir / "unipotent_matrix.json").read_text())
    text = dump_roabp(r)
    assert dump_roabp(parse_roabp(text)) == text
    assert text.endswith("\n")
    assert json.loads(text)["shape"] == "matrix"


def test_dump_round_trip_of_random_roabp(gf, rng, create_roabp):
    r = create_roabp(gf, 4, 2, 3, rng)
    parsed = parse_roabp(dump_roabp(r))
    assert parsed.order == r.order
    assert expand_dense(parsed) == expand_dense(r)


def test_syntax_error_has_line_and_column(data_dir):
    path = data_dir / "broken_syntax.json"
    with pytest.raises(RoabpFormatError) as excinfo:
        parse_roabp(path.read_text(), source="broken.json")
    assert excinfo.value.position == "broken.json:3:9"


def test_coefficient_out_of_range_has_position(data_dir):
    with pytest.raises(RoabpFormatError) as excinfo:
        parse_roabp((data_dir / "bad_coefficient.json").read_text())
    assert excinfo.value.position == "layers[0][0][0][1]"


@pytest.mark.parametrize(
    "change, position",
    [
        ({"w": 2}, "w"),
        ({"shape": "row"}, "shape"),
        ({"order": [0, 0]}, "order"),
        ({"modulus": 100}, "modulus"),
        ({"extra": 1}, "header"),
        ({"layers": [[[[1, 1]]]]}, "layers"),
        ({"layers": [[[[1, 1]]], [[[1]]]]}, "layers[1][0][0]"),
    ],
)
def test_header_errors(data_dir, change, position):
    data = json.loads((data_dir / "ones_product.json").read_text())
    data.update(change)
    with pytest.raises(RoabpFormatError) as excinfo:
        parse_roabp(json.dumps(data))
    assert excinfo.value.position == position


def test_missing_keys_are_reported():
    with pytest.raises(RoabpFormatError, match="missing keys layers"):
        RoabpFile.from_dict(
            {"modulus": 101, "n": 1, "d": 1, "w": 1, "order": [0], "shape": "scalar"}
        )


def test_non_object_is_rejected():
    with pytest.raises(RoabpFormatError) as excinfo:
        parse_roabp("[1, 2]")
    assert excinfo.value.position == "top level"


def test_parse_shift(data_dir, gf):
    f = parse_shift((data_dir / "shift_ones.json").read_text(), gf, 3)
    assert isinstance(f, ShiftTuple)
    assert [int(v) for v in f.at(5)] == [1, 1, 1]


def test_parse_shift_rejects_wrong_length(gf):
    with pytest.raises(RoabpFormatError) as excinfo:
        parse_shift('{"shift": [[1], [2]]}', gf, 3)
    assert excinfo.value.position == "shift"


def test_file_record_keeps_typed_fields(data_dir, gf, rng, create_roabp):
    record = RoabpFile.from_dict(json.loads((data_dir / "ones_product.json").read_text()))
    assert isinstance(record, RoabpFile)
    assert record.order == [0, 1]

    r = create_roabp(gf, 3, 2, 2, rng, order=(2, 0, 1))
    dumped = RoabpFile.from_roabp(r)
    assert dumped.order == [2, 0, 1]
    assert all(type(value) is int for value in (dumped.modulus, dumped.n, dumped.w))
    assert expand_dense(dumped.to_roabp()) == expand_dense(r)


@pytest.mark.parametrize(
    "value, position",
    [
        ("1", "layers[0][0][0][1]"),
        (True, "layers[0][0][0][1]"),
        (1.5, "layers[0][0][0][1]"),
        ([1], "layers[0][0][0][1]"),
    ],
)
def test_non_integer_coefficient_has_position(data_dir, value, position):
    data = json.loads((data_dir / "ones_product.json").read_text())
    data["layers"][0][0][0][1] = value
    with pytest.raises(RoabpFormatError) as excinfo:
        parse_roabp(json.dumps(data))
    assert excinfo.value.position == position


def test_row_that_is_not_a_list_has_position(data_dir):
    data = json.loads((data_dir / "ones_product.json").read_text())
    data["layers"][1] = [7]
    with pytest.raises(RoabpFormatError) as excinfo:
        parse_roabp(json.dumps(data))
    assert excinfo.value.position == "layers[1][0]"
