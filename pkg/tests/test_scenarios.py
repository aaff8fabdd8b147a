import math

import numpy as np
import pytest

from movingcavity.core import DomainError, Segment, Trajectory
from movingcavity.scenarios import (
    RegimeError,
    block_kernel,
    predicted_resonances,
    resonance_scan,
    run_scenario_A,
    run_scenario_B,
)

H = 0.01


def test_scenario_A_boson_reports(scalar_cfg):
    r = run_scenario_A(scalar_cfg, Trajectory.blocks(H, 0.9, 1), H, (1, 2))
    b = abs(r.kernels["beta1_kkp"])
    w = r.witnesses["A1"]
    assert w.violated and w.leading_order == 1
    assert w.value.c1.real == pytest.approx(b, rel=1e-12)
    assert r.negativities["kk'"]["series"].c1 == pytest.approx(b / 2, rel=1e-9)
    assert r.negativities["AC"]["series"].c1 == 0
    assert r.negativities["Ak"]["series"].c0 == pytest.approx(0.5)
    assert r.reduced["rho_AkkC"].trace().is_close(1.0, 1e-12)


def test_scenario_A_sign_choice(scalar_cfg):
    t = Trajectory.blocks(H, 0.9, 1)
    p = run_scenario_A(scalar_cfg, t, H, (1, 2), sign=1)
    m = run_scenario_A(scalar_cfg, t, H, (1, 2), sign=-1)
    assert p.witnesses["A1"].value.is_close(m.witnesses["A1"].value, 1e-14)
    with pytest.raises(DomainError):
        run_scenario_A(scalar_cfg, t, H, (1, 2), sign=2)


def test_scenario_A_fermion_reports(dirac_cfg):
    r = run_scenario_A(dirac_cfg, Trajectory.blocks(H, 0.9, 1), H, (1, -2))
    a = abs(r.kernels["A1_kkp"])
    assert r.witnesses["A2_simplified"].value.c1.real == pytest.approx(a / 2, rel=1e-12)
    # the complete form keeps a root term at first order
    assert r.witnesses["A2"].value.c1.real == pytest.approx((2 - math.sqrt(2)) / 4 * a, rel=1e-9)
    d = r.fidelities["dicke"]
    assert d.c0 == pytest.approx(1.0) and abs(d.c1) < 1e-14 and d.c2.real < 0


def test_scenario_A_mode_checks(scalar_cfg, dirac_cfg):
    t = Trajectory.blocks(H, 0.9, 1)
    with pytest.raises(DomainError):
        run_scenario_A(scalar_cfg, t, H, (2, 2))
    with pytest.raises(DomainError):
        run_scenario_A(dirac_cfg, t, H, (1, 2))
    with pytest.raises(DomainError):
        run_scenario_A(scalar_cfg, t, H, (1, 11))
    with pytest.raises(DomainError):
        run_scenario_A(scalar_cfg, Trajectory(), H, (1, 2))


def test_regime_guard(scalar_cfg):
    t = Trajectory.blocks(0.05, 0.9, 3)
    with pytest.raises(RegimeError):
        run_scenario_A(scalar_cfg, t, 0.05, (1, 2))
    r = run_scenario_A(scalar_cfg, t, 0.05, (1, 2), allow_large_Nh=True)
    assert r.warnings and "perturbative" in r.warnings[0]


def test_zero_h_gives_zero_witness(scalar_cfg):
    r = run_scenario_A(scalar_cfg, Trajectory([Segment.inertial(1.0)]), 0.0, (1, 2))
    assert r.witnesses["A1"].value(0.0) == 0


def test_scenario_B_boson(scalar_cfg):
    r = run_scenario_B(scalar_cfg, Trajectory.blocks(H, 2.0, 1), H, (1, 2, 3))
    w = r.witnesses["A3"]
    want = 2 * math.sqrt(2) * abs(r.kernels["beta1_kkp"]) * abs(r.kernels["beta1_kpkpp"])
    assert w.leading_order == 2 and w.value.c2.real == pytest.approx(want, rel=1e-12)
    # beta_13 vanishes by parity, so |1 0 0> collects every partner except k'
    assert r.mixedness["pop_k"] == pytest.approx(2 * r.mixedness["f_k_not_kp"], rel=1e-9)


def test_scenario_B_parity_checks(scalar_cfg, dirac_cfg):
    t = Trajectory.blocks(H, 2.0, 1)
    with pytest.raises(DomainError):
        run_scenario_B(scalar_cfg, t, H, (1, 3, 2))
    with pytest.raises(DomainError):
        run_scenario_B(dirac_cfg, t, H, (1, 2, -2))
    with pytest.raises(DomainError):
        run_scenario_B(dirac_cfg, t, H, (1, 3, 2))


def test_scenario_B_fermion(dirac_cfg):
    r = run_scenario_B(dirac_cfg, Trajectory.blocks(H, 2.0, 1), H, (1, 3, -2))
    a, b = abs(r.kernels["A1_k_kpp"]), abs(r.kernels["A1_kp_kpp"])
    assert r.witnesses["A4"].value.c1.real == pytest.approx(a + b - math.hypot(a, b), rel=1e-12)
    assert r.fidelities["w"].c0 == pytest.approx(1.0)


def test_predicted_resonances():
    assert predicted_resonances(1, 2, 1.2) == pytest.approx([1 / 3, 2 / 3, 1.0])
    assert predicted_resonances(2, 3, 1.0) == pytest.approx([0.2, 0.4, 0.6, 0.8, 1.0])


def test_scan_shapes_and_peaks(scalar_cfg):
    s = resonance_scan(scalar_cfg, 0.005, 4, [(1, 2)], u_range=(0.0, 1.2), u_steps=120)
    assert s.u.shape == (120,) and s.values[(1, 2)].shape == (120,)
    pk = s.peaks((1, 2))
    assert np.min(np.abs(pk - 1 / 3)) <= 0.01 + 1e-12


def test_scan_guard_and_single_point(scalar_cfg):
    with pytest.raises(RegimeError):
        resonance_scan(scalar_cfg, 0.05, 15, [(1, 2)])
    one = resonance_scan(scalar_cfg, 0.005, 2, [(1, 2)], u_steps=1)
    assert one.u.tolist() == [1.2]
    with pytest.raises(DomainError):
        resonance_scan(scalar_cfg, 0.005, 0, [(1, 2)])


def test_block_kernel_linear_at_resonance(scalar_cfg):
    one = block_kernel(scalar_cfg, 1e-3, 2.0, 1, 1, 2)
    assert abs(block_kernel(scalar_cfg, 1e-3, 2.0, 4, 1, 2)) == pytest.approx(4 * abs(one), rel=1e-8)
