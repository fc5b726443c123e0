import json
from dataclasses import dataclass

import numpy as np

from wirtinger.output import csv_text, dumps, format_float


def test_float_format_round_trips():
    for x in (0.1, 1 / 3, np.pi, 1e-300, -2.5e17, 3.0):
        assert float(format_float(x)) == x
    assert format_float(0.1) == "0.10000000000000001"


def test_special_values():
    assert format_float(float("nan")) == "NaN"
    assert format_float(float("-inf")) == "-Infinity"


@dataclass
class _Row:
    a: float
    b: np.ndarray


def test_dumps_is_valid_json_and_ordered():
    obj = {"z": 1, "a": [1.5, np.float64(2.0)], "row": _Row(0.25, np.array([1.0, 2.0])), "ok": np.bool_(True), "none": None}
    text = dumps(obj)
    data = json.loads(text)
    assert list(data) == ["z", "a", "row", "ok", "none"]
    assert data["row"] == {"a": 0.25, "b": [1.0, 2.0]}
    assert data["ok"] is True
    assert dumps(obj) == text


def test_compact_mode_is_one_line():
    assert "\n" not in dumps({"a": [{"b": 1.0}]}, indent=0)


def test_csv_text():
    text = csv_text(("x", "y", "tag"), [(0.1, 2, "s")], comments=["done"])
    assert text == "x,y,tag\n0.10000000000000001,2,s\n# done\n"
