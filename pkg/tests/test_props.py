from __future__ import annotations

import pytest

from metriclag.props import PROPERTIES, run_props


@pytest.mark.parametrize("name", sorted(PROPERTIES))
def test_property_holds(name):
    (res,) = run_props(seed=3, names=[name])
    assert res.passed, res.line()
