import math

import numpy as np
import pytest

from movingcavity import bogoliubov as bg
from movingcavity.core import DomainError, OrderSeries, Trajectory
from movingcavity.entanglement import (
    WITNESSES,
    WitnessReport,
    canonical_state,
    negativity,
    negativity_array,
    negativity_series,
    partial_transpose,
    random_biseparable,
    witness_A1,
    witness_A2,
    witness_A2_simplified,
    witness_A3,
    witness_A4,
)
from movingcavity.fock import reduce_pure, transform_boson_state


def ket(dims, *occ_amp):
    v = np.zeros(int(np.prod(dims)), complex)
    for occ, a in occ_amp:
        v[np.ravel_multi_index(occ, dims)] = a
    v /= np.linalg.norm(v)
    return np.outer(v, v.conj())


def test_bell_and_product_negativity():
    bell = ket((2, 2), ((0, 0), 1), ((1, 1), 1))
    assert negativity_array(bell, (2, 2), [1]) == pytest.approx(0.5)
    prod = ket((2, 2), ((0, 0), 1), ((0, 1), 1), ((1, 0), 1), ((1, 1), 1))
    assert negativity_array(prod, (2, 2), [0]) == pytest.approx(0.0, abs=1e-15)


def test_partial_transpose_is_involution():
    rng = np.random.default_rng(1)
    m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    pt = partial_transpose(m, (2, 3), [1])
    assert np.allclose(partial_transpose(pt, (2, 3), [1]), m)
    assert np.allclose(partial_transpose(m, (2, 3), [0, 1]), m.T)


def test_non_hermitian_rejected():
    with pytest.raises(DomainError):
        negativity_array(np.array([[1, 1], [0, 0]]), (2,), [0])


def test_report_status_rules():
    assert WitnessReport.from_value(OrderSeries(0, 1e-3, 0), {}).violated
    assert WitnessReport.from_value(OrderSeries(0, -1e-3, 5), {}).status == "not_violated"
    assert WitnessReport.from_value(OrderSeries(0, 0, 0), {}).status == "inconclusive"
    r = WitnessReport.from_value(OrderSeries(0, 0, 2), {})
    assert r.violated and r.leading_order == 2


def test_A1_on_genuinely_entangled_and_product_states():
    dims = (2, 3, 3, 2)
    ghz = ket(dims, ((0, 0, 0, 0), 1), ((1, 2, 2, 1), 1))
    # 2 |<0000|rho|1221>| with no diagonal penalties
    assert witness_A1(ghz).value.c0.real == pytest.approx(1.0)
    prod = ket(dims, ((0, 0, 0, 0), 1))
    assert witness_A1(prod).value.c0.real <= 1e-12


def test_A2_complete_form_is_not_a_valid_witness():
    # a bi-separable (A k' | k C) product of two Bell pairs makes the printed form positive
    dims = (2, 2, 2, 2)
    a = np.zeros((2, 2))
    a[0, 1] = a[1, 0] = 2**-0.5  # (A, k') in |01> + |10>
    b = np.zeros((2, 2))
    b[1, 0] = b[0, 1] = 2**-0.5  # (k, C) in |10> + |01>
    psi = np.einsum("ad,bc->abdc", a, b).reshape(-1)
    rho = np.outer(psi, psi)
    assert witness_A2(rho).value.c0.real == pytest.approx((2 - math.sqrt(2)) / 4)
    assert negativity_array(rho, dims, [0, 2]) == pytest.approx(0.0, abs=1e-12)


def test_A3_A4_on_product_states():
    rng = np.random.default_rng(5)
    for name in ("A3", "A4"):
        fn, dims = WITNESSES[name]
        vecs = [rng.normal(size=d) for d in dims]
        psi = vecs[0]
        for v in vecs[1:]:
            psi = np.kron(psi, v)
        psi /= np.linalg.norm(psi)
        assert fn(np.outer(psi, psi)).value.c0.real <= 1e-12


def test_A4_detects_w_state():
    w = ket((2, 2, 2), ((0, 0, 0), 1), ((1, 0, 1), 1), ((0, 1, 1), 1))
    # c_1 + c_2 - sqrt(D000 (D101 + D011)) = 2/3 - sqrt(2)/3
    assert witness_A4(w).value.c0.real == pytest.approx((2 - math.sqrt(2)) / 3)


def test_witness_dimension_checks():
    with pytest.raises(DomainError):
        witness_A1(np.eye(4))


@pytest.mark.parametrize("name", sorted(WITNESSES))
def test_small_sampler_run(name):
    fn, dims = WITNESSES[name]
    rng = np.random.default_rng(11)
    vals = [fn(random_biseparable(dims, rng)).value.c0.real for _ in range(40)]
    assert np.all(np.isfinite(vals))
    if name != "A2":
        assert max(vals) <= 1e-12


def test_negativity_series_matches_numeric(scalar_cfg):
    h = 1e-3
    m = bg.compile_trajectory(scalar_cfg, Trajectory.blocks(h, 0.9, 1), h)
    st = transform_boson_state(m, "pair_kkp", 1, 2, order=1)
    st = st.truncate(2)
    st = st.scale(st.norm2().sqrt().reciprocal())
    rho = reduce_pure(st, (1, 2), max_order=2)
    ser = negativity_series(rho, (2,))
    # series is exact to first order; compare against the numeric negativity at two h
    num = [negativity(rho, (2,), hh) for hh in (h, h / 2)]
    assert ser(h) == pytest.approx(num[0], abs=5e-5)
    assert abs(ser(h / 2) - num[1]) < abs(ser(h) - num[0]) / 3 + 1e-12


def test_dicke_state_amplitude_magnitudes(dirac_cfg):
    f = bg.compile_trajectory(dirac_cfg, Trajectory.blocks(0.01, 0.7, 1), 0.01)
    cs = canonical_state("dicke4", f, (1, -2), normalize=False)
    amps = cs.amplitudes()
    zeroth = [a for a in amps.values() if abs(a.c0) > 0]
    first = [a for a in amps.values() if a.c0 == 0]
    assert len(zeroth) == 4 and all(abs(abs(a.c0) - 0.5) < 1e-15 for a in zeroth)
    a1 = abs(f.entry("A1", 1, -2))
    assert len(first) == 2 and all(abs(abs(a.c1) - 0.5 * a1) < 1e-15 for a in first)


def test_w_state_amplitudes(dirac_cfg):
    f = bg.compile_trajectory(dirac_cfg, Trajectory.blocks(0.01, 0.7, 1), 0.01)
    cs = canonical_state("w3", f, (1, 3, -2), normalize=False)
    amps = cs.amplitudes()
    assert amps[(0, 0, 0)] == OrderSeries(1.0)
    assert amps[(0, 1, 1)].c1 == pytest.approx(f.g(-2) * f.entry("A1", 3, -2).conjugate())
    with pytest.raises(DomainError):
        canonical_state("ghz", f, (1, 3, -2))


def test_trivial_states_do_not_violate():
    rho = np.zeros((16, 16))
    rho[0, 0] = 1
    assert witness_A2_simplified(rho).value.c0 == 0
    assert witness_A3(np.eye(27) / 27).value.c0.real <= 0
