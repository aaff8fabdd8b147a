import numpy as np
import pytest
from scipy.linalg import expm

from movingcavity import bogoliubov as bg
from movingcavity.core import DIRAC, CavityConfig, DomainError, OrderSeries, Trajectory
from movingcavity.fock import (
    CANONICAL,
    REVERSED,
    FockStateP,
    density_from_pure,
    f_beta,
    numeric_vacuum_kernel,
    partial_trace,
    reduce_pure,
    transform_boson_state,
    transform_fermion_state,
    transformed_vacuum,
    vacuum_kernel,
)

H = 0.01


def ladder(d):
    return np.diag(np.sqrt(np.arange(1, d)), 1)


def two_mode_squeezer(r, d=6):
    # oracle: dense exp(r (a1 a2 - a1^+ a2^+)) on a truncated two-mode Fock space
    a = ladder(d)
    a1, a2 = np.kron(a, np.eye(d)), np.kron(np.eye(d), a)
    return expm(r * (a1 @ a2 - a1.conj().T @ a2.conj().T)), d


def toy_boson_map(b):
    # only beta_12 = beta_21 = b per unit h, no phases
    cfg = CavityConfig(n_max=4)
    labels = cfg.basis().indices
    z = np.zeros((4, 4), complex)
    beta = z.copy()
    beta[0, 1] = beta[1, 0] = b
    return bg.PerturbBogoMap(np.ones(4, complex), z, beta, labels)


@pytest.mark.parametrize("which,col", [("vac", (0, 0)), ("pair_kkp", (1, 1)), ("one_k", (1, 0))])
def test_boson_transform_matches_two_mode_squeezer(which, col):
    b = 0.37
    m = toy_boson_map(b)
    st = transform_boson_state(m, which, 1, 2)
    r = b * 1e-5
    S, d = two_mode_squeezer(r)
    ket = S[:, col[0] * d + col[1]]
    for n1 in range(4):
        for n2 in range(4):
            want = ket[n1 * d + n2]
            amp = st.amplitude({1: n1, 2: n2})(1e-5)
            assert abs(amp - want) < 1e-9


def test_pair_to_doubly_excited_is_twice_vacuum_amplitude():
    # the a^+ a^+ |1 1> normalisation behind the factor-2 witness coefficient
    S, d = two_mode_squeezer(1e-4)
    amp22 = S[2 * d + 2, 1 * d + 1]
    amp00 = S[0, 1 * d + 1]
    assert abs(amp22 / amp00) == pytest.approx(2.0, rel=1e-6)
    st = transform_boson_state(toy_boson_map(0.5), "pair_kkp", 1, 2)
    assert abs(st.amplitude({1: 2, 2: 2}).c1 / st.amplitude({}).c1) == pytest.approx(2.0)


def toy_fermion_map(a):
    cfg = CavityConfig(field_kind=DIRAC, n_max=4)
    labels = cfg.basis().indices
    n = len(labels)
    A = np.zeros((n, n), complex)
    i, j = labels.index(1), labels.index(-2)
    A[i, j] = a
    A[j, i] = -np.conj(a)
    return bg.FermiBogoMap(np.ones(n, complex), A, labels)


def jw_unitary(x, h):
    # oracle: two fermionic modes b (first) and c (second) by Jordan-Wigner
    sm = np.array([[0, 1], [0, 0]], complex)  # |1> -> |0>
    Z = np.diag([1.0, -1.0])
    b = np.kron(sm, np.eye(2))
    c = np.kron(Z, sm)
    K = x * b.conj().T @ c.conj().T - np.conj(x) * c @ b
    return expm(h * K)


@pytest.mark.parametrize("which,col", [("vac", 0b00), ("pair", 0b11), ("particle", 0b10), ("antiparticle", 0b01)])
def test_fermion_transform_matches_jordan_wigner(which, col):
    a = 0.3 - 0.2j
    fmap = toy_fermion_map(a)
    h = 1e-5
    # the in-creator b^+ = b~^+ + conj(A_{-2,1}) h c~ fixes x = -A_{-2,1}
    x = -fmap.entry("A1", -2, 1)
    U = jw_unitary(x, h)
    st = transform_fermion_state(fmap, which, 1, -2)
    # basis index = 2*n_b + n_c, occupation |1> at qubit value 1
    for nb in (0, 1):
        for nc in (0, 1):
            want = U[2 * nb + nc, col]
            amp = st.amplitude({1: nb, -2: nc})(h)
            assert abs(amp - want) < 1e-9


def test_vacuum_kernel_against_numeric_inverse(scalar_cfg):
    traj = Trajectory.blocks(H, 0.8, 2)
    first = vacuum_kernel(bg.compile_trajectory(scalar_cfg, traj, H))
    num = bg.compile_numeric(scalar_cfg, traj, source="oracle")
    V = numeric_vacuum_kernel(num.alpha, num.beta) / H
    inner = slice(0, 8)
    assert np.allclose(first.V[inner, inner], V[inner, inner], atol=5e-3)
    assert np.allclose(first.V, first.V.T)


def test_vacuum_kernel_trivial(scalar_cfg, dirac_cfg):
    k = vacuum_kernel(bg.identity_map(scalar_cfg))
    assert np.all(k.V == 0) and k.M == OrderSeries(1.0)
    kf = vacuum_kernel(bg.switch_map(dirac_cfg, H))
    lab = np.array(kf.labels)
    support = np.abs(kf.V) > 0
    assert np.all(lab[np.nonzero(support)[0]] >= 0) and np.all(lab[np.nonzero(support)[1]] < 0)


def test_singular_alpha_reported():
    with pytest.raises(bg.SingularAlphaError):
        numeric_vacuum_kernel(np.zeros((3, 3)), np.eye(3))


def test_vacuum_normalisation_to_second_order(scalar_cfg, dirac_cfg):
    for cfg in (scalar_cfg, dirac_cfg):
        vac = transformed_vacuum(bg.compile_trajectory(cfg, Trajectory.blocks(H, 0.6, 1), H), order=2)
        n = vac.norm2()
        assert n.c0 == pytest.approx(1) and abs(n.c1) < 1e-14
        # pair amplitudes squared cancel against the M correction at h^2
        assert abs(n.c2) < 1e-12


def test_one_particle_norm(scalar_cfg):
    m = bg.compile_trajectory(scalar_cfg, Trajectory.blocks(H, 0.6, 1), H)
    n = transform_boson_state(m, "one_k", 1, 2).norm2()
    assert n.c0 == pytest.approx(1) and abs(n.c1) < 1e-14
    # first-order truncation only adds probability
    assert n.c2.real >= 0


def test_h_zero_transforms_are_phases(scalar_cfg, dirac_cfg):
    m = bg.compile_trajectory(scalar_cfg, Trajectory.blocks(H, 0.6, 1), H)
    m0 = bg.PerturbBogoMap(m.G, 0 * m.alpha1, 0 * m.beta1, m.labels)
    st = transform_boson_state(m0, "one_k", 1, 2)
    assert st.terms == {((1, 1),): OrderSeries(m.g(1).conjugate())}
    f = bg.compile_trajectory(dirac_cfg, Trajectory.blocks(H, 0.6, 1), H)
    f0 = bg.FermiBogoMap(f.G, 0 * f.A1, f.labels)
    st = transform_fermion_state(f0, "particle", 1, -2)
    assert st.terms == {((1, 1),): OrderSeries(f.g(1).conjugate())}


def test_transform_errors(scalar_cfg, dirac_cfg):
    m = bg.switch_map(scalar_cfg, H)
    with pytest.raises(DomainError):
        transform_boson_state(m, "pair_kkp", 1, 1)
    with pytest.raises(DomainError):
        transform_boson_state(m, "one_k", 1, 12)
    f = bg.switch_map(dirac_cfg, H)
    with pytest.raises(DomainError):
        transform_fermion_state(f, "particle", -1, -2)
    with pytest.raises(DomainError):
        transform_fermion_state(f, "nonsense", 1, -2)


def test_fermion_charge_superselection(dirac_cfg):
    f = bg.compile_trajectory(dirac_cfg, Trajectory.blocks(H, 0.9, 3), H)
    for which, q in (("vac", 0), ("particle", 1), ("antiparticle", -1), ("pair", 0)):
        st = transform_fermion_state(f, which, 1, -2)
        for lab in st.terms:
            assert sum(n if m >= 0 else -n for m, n in lab) == q


def test_fermionic_creation_signs():
    v = FockStateP.vacuum(fermionic=True)
    ab = v.create(-1).create(2)
    ba = v.create(2).create(-1)
    lab = ab.label({2: 1, -1: 1})
    assert ab.amplitude(lab) == -ba.amplitude(lab)
    assert v.create(2).create(2).terms == {}


def test_reversed_ordering_flips_relative_signs_consistently():
    v = FockStateP.vacuum(fermionic=True, ordering=REVERSED)
    st = v.create(-1).create(2)
    w = FockStateP.vacuum(fermionic=True, ordering=CANONICAL).create(-1).create(2)
    assert st.amplitude({2: 1, -1: 1}) == -w.amplitude({2: 1, -1: 1})
    assert st.with_ordering(CANONICAL).amplitude({2: 1, -1: 1}) == w.amplitude({2: 1, -1: 1})


def test_partial_trace_fermionic_sign():
    # (|0> + b2^+ c1^+ |0>) traced over nothing keeps the coherence sign
    v = FockStateP.vacuum(fermionic=True)
    psi = (v + v.create(-1).create(2)).scale(2**-0.5)
    rho = density_from_pure(psi, (2, -1))
    assert rho.element((0, 0), (1, 1)).c0 == pytest.approx(0.5)
    assert rho.trace().c0 == pytest.approx(1.0)
    # tracing out the middle mode of b1^+ b2^+ b3^+|0> + |0>: the coherence vanishes, diagonal survives
    psi3 = (v + v.create(3).create(2).create(1)).scale(2**-0.5)
    r = partial_trace(density_from_pure(psi3, (1, 2, 3)), (1, 3))
    assert r.diag((1, 1)).c0 == pytest.approx(0.5)
    assert abs(r.element((0, 0), (1, 1)).c0) < 1e-15


def test_trace_from_the_inside_sign():
    # (b1^+ b2^+ + b2^+ b3^+)|0>: tracing mode 2 leaves a coherence whose sign
    # comes from moving b2 past the kept modes after it
    v = FockStateP.vacuum(fermionic=True)
    psi = (v.create(2).create(1) + v.create(3).create(2)).scale(2**-0.5)
    r = partial_trace(density_from_pure(psi, (1, 2, 3)), (1, 3))
    assert r.element((1, 0), (0, 1)).c0 == pytest.approx(-0.5)


def test_reduce_pure_matches_partial_trace(scalar_cfg):
    m = bg.compile_trajectory(scalar_cfg, Trajectory.blocks(H, 0.6, 1), H)
    vac = transformed_vacuum(m, order=2)
    full = reduce_pure(vac, (1, 2, 3, 4), max_order=2)
    direct = reduce_pure(vac, (1, 2), max_order=2)
    via = partial_trace(full, (1, 2))
    for key, val in direct.entries.items():
        assert via.entries[key].is_close(val, 1e-13)
    assert direct.hermiticity_defect() < 1e-15


def test_second_order_populations_are_twice_f_beta(scalar_cfg):
    m = bg.compile_trajectory(scalar_cfg, Trajectory.blocks(H, 2.0, 1), H)
    vac = transformed_vacuum(m, order=2)
    rho = reduce_pure(vac, (1,), max_order=2)
    # single-particle population = sum over partners of |V|^2 = 2 f
    assert rho.diag((1,)).c2.real == pytest.approx(2 * f_beta(m, 1, ()), rel=1e-9)
