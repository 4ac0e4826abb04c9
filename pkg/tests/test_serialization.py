import json

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from mpod_holonomy import serialization
from mpod_holonomy.errors import InvalidSpec

finite = st.complex_numbers(allow_nan=False, allow_infinity=False, max_magnitude=1e300)


@given(arrays(np.complex128, st.tuples(st.integers(1, 5), st.integers(1, 5)), elements=finite))
def test_matrix_round_trip_is_exact(m):
    d = json.loads(serialization.dumps(serialization.matrix_to_dict(m)))
    assert d["rows"], d["cols"] == m.shape
    assert np.array_equal(serialization.matrix_from_dict(d), m)


def test_row_major_layout():
    d = serialization.matrix_to_dict(np.array([[1, 2j], [3, 4]]))
    assert d == {"rows": 2, "cols": 2, "data": [[1.0, 0.0], [0.0, 2.0], [3.0, 0.0], [4.0, 0.0]]}


def test_malformed_matrices():
    with pytest.raises(InvalidSpec):
        serialization.matrix_from_dict({"rows": 2, "cols": 2, "data": [[0, 0]]})
    with pytest.raises(InvalidSpec):
        serialization.matrix_from_dict({"data": []})


def test_dumps_is_deterministic_and_nan_safe():
    text = serialization.dumps({"b": float("nan"), "a": [1.5, float("inf")]})
    assert text == '{\n  "a": [\n    1.5,\n    null\n  ],\n  "b": null\n}\n'
