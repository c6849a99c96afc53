"""Tests for the convergence tables."""

import os
import sys

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "../src")))
from duality_lab.dynamics.propagators import PropagationMethod
from duality_lab.numerics.grid import Boundary, DerivativeScheme
from duality_lab.physics.convergence import _table, spatial_convergence, temporal_convergence


def test_table_orders():
    """Halving the step with a quartered error is order 2."""
    table = _table("synthetic", "dt", [0.4, 0.2, 0.1], [1.6, 0.4, 0.1])
    assert table.rows[0].order is None
    assert table.orders == pytest.approx([2.0, 2.0])
    assert table.finest_order == pytest.approx(2.0)
    assert table.to_dict()["rows"][1]["error"] == 0.4


def test_table_skips_zero_errors():
    table = _table("exact", "dx", [0.2, 0.1], [0.0, 0.0])
    assert table.orders == []
    assert table.finest_order is None


@pytest.mark.slow
@pytest.mark.parametrize("method", list(PropagationMethod))
def test_propagators_are_second_order_in_time(method):
    table = temporal_convergence([4e-3, 2e-3, 1e-3], method=method)
    assert table.variable == "dt"
    assert abs(table.finest_order - 2.0) < 0.25


def test_fd4_is_fourth_order_in_space():
    table = spatial_convergence([128, 256], scheme=DerivativeScheme.CENTRAL_FD4)
    assert abs(table.finest_order - 4.0) < 0.5
    assert table.name.startswith("central_fd4")


def test_spectral_defect_reaches_roundoff():
    table = spatial_convergence([48, 64], boundary=Boundary.PERIODIC, scheme=DerivativeScheme.SPECTRAL)
    assert table.rows[-1].error < 1e-10
