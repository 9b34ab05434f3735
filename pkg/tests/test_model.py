import math

import numpy as np
import pytest

from lpimd.model import Model, smoothing_schedule
from lpimd.verify import monotonicity_sweep


def test_p_one_methods_coincide(small_tri_beam):
    vp = small_tri_beam.solve("vp", 1.0, 50.0)
    sp = small_tri_beam.solve("sp", 1.0, 50.0)
    assert vp.compliance == sp.compliance
    assert np.array_equal(vp.alpha, sp.alpha)


def test_stress_is_admissible(small_beam):
    res = small_beam.solve("sp", 2.0, 1.0)
    sys = small_beam.system
    assert np.linalg.norm(sys.B @ res.T - sys.Q) <= 1e-10 * np.linalg.norm(sys.Q)


def test_null_space_is_shared_between_solves(small_beam):
    rep = small_beam.rep
    small_beam.solve("vp", 2.0, 1.0)
    small_beam.solve("sp", 3.0, 1.0)
    assert small_beam.rep is rep


def test_small_sweep_orders(small_beam):
    table = monotonicity_sweep(small_beam, [1.0, 2.0, 4.0, math.inf], 10.0)
    assert table.sp_monotone and table.vp_scaled_monotone and table.p1_coincide
    # the vp bound weakens with p while its normalised form grows
    assert table.vp[-1] < table.vp[0]


def test_energy_is_unsmoothed(small_beam):
    res = small_beam.solve("sp", 1.0, 1.0)
    assert res.smoothing > 0
    assert res.energy == pytest.approx(small_beam.energy("sp", 1.0, res.alpha), rel=1e-15)


def test_explicit_smoothing_without_continuation(small_beam):
    a = small_beam.solve("sp", 2.0, 1.0)
    b = small_beam.solve("sp", 2.0, 1.0, smoothing=1e-6, continuation=False)
    assert b.compliance == pytest.approx(a.compliance, rel=1e-3)


def test_smoothing_schedule():
    assert smoothing_schedule(0.0, 5.0, True) == [0.0]
    s = smoothing_schedule(1e-6, 100.0, True)
    assert s[0] == pytest.approx(10.0) and s[-1] == 1e-6
    assert all(a > b for a, b in zip(s, s[1:]))
    assert smoothing_schedule(1e-6, 100.0, False) == [1e-6]


def test_nodal_average_of_constant(small_tri_beam):
    vals = np.full(small_tri_beam.quad.num_points, 3.5)
    assert np.allclose(small_tri_beam.nodal_average(vals), 3.5)


def test_zero_load_model(small_beam, caplog):
    m = Model(small_beam.mesh, tractions={"right": (0.0, 0.0)})
    res = m.solve("vp", 2.0, 1.0)
    assert res.compliance == 0.0 and res.report.reason == "zero_load"
    assert np.all(res.moduli.void)
    assert "loads vanish" in caplog.text


def test_compliance_scales_with_load_squared(small_beam):
    a = small_beam.solve("vp", 3.0, 1.0)
    twice = Model(small_beam.mesh, tractions={"right": (0.0, -10.0)}).solve("vp", 3.0, 1.0)
    assert twice.compliance == pytest.approx(4.0 * a.compliance, rel=1e-6)
    assert np.allclose(twice.moduli.nu, a.moduli.nu, atol=1e-4)
