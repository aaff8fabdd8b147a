"""Negativity, genuine-multipartite-entanglement witnesses, canonical Dicke/W states.

Every witness is written once against a small accessor interface so that it can
be evaluated either on perturbative density matrices (OrderSeries entries) or
on plain numeric arrays, e.g. for random bi-separable test states.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import DomainError, OrderSeries
from .fock import CANONICAL, DensityMatrixP, FockStateP, ModeOrder

TIE_TOL = 1e-12

A1_DIMS = (2, 3, 3, 2)
A2_DIMS = (2, 2, 2, 2)
A3_DIMS = (3, 3, 3)
A4_DIMS = (2, 2, 2)


@dataclass
class WitnessReport:
    value: OrderSeries
    leading_order: int | None
    status: str  # "violated", "not_violated" or "inconclusive"
    elements: dict = field(default_factory=dict)

    @property
    def violated(self) -> bool:
        return self.status == "violated"

    @classmethod
    def from_value(cls, value: OrderSeries, elements: dict, tie: float = TIE_TOL):
        lo = None
        for i, c in enumerate(value.coeffs):
            if math.isnan(c.real) or abs(c) > tie:
                lo = i
                break
        if lo is None:
            status = "inconclusive"
        else:
            lead = value.coeffs[lo].real
            if math.isnan(lead):
                status = "inconclusive"
            else:
                status = "violated" if lead > tie else "not_violated"
        return cls(value, lo, status, elements)


# -- accessors ---------------------------------------------------------------------


class _SeriesView:
    def __init__(self, rho: DensityMatrixP, order: int):
        self.rho = rho
        self.order = order

    def el(self, x, y):
        return self.rho.element(x, y)

    def D(self, x):
        d = self.rho.diag(x)
        return OrderSeries(d.c0.real, d.c1.real, d.c2.real)

    @staticmethod
    def mod(v):
        return abs(v)

    @staticmethod
    def root(v):
        return v.sqrt()

    def finish(self, v: OrderSeries) -> OrderSeries:
        return v.truncate(self.order)


class _ArrayView:
    def __init__(self, mat: np.ndarray, dims: Sequence[int]):
        self.mat = mat
        self.dims = tuple(dims)

    def el(self, x, y):
        return self.mat[np.ravel_multi_index(x, self.dims), np.ravel_multi_index(y, self.dims)]

    def D(self, x):
        return float(self.el(x, x).real)

    @staticmethod
    def mod(v):
        return float(abs(v))

    @staticmethod
    def root(v):
        return math.sqrt(max(float(v), 0.0))

    @staticmethod
    def finish(v):
        return OrderSeries.const(v)


def _view(rho, dims, order):
    if isinstance(rho, DensityMatrixP):
        have = rho.dims()
        if len(have) != len(dims) or any(a > b for a, b in zip(have, dims)):
            raise DomainError(f"state has local dimensions {have}, witness expects {dims}")
        return _SeriesView(rho, order)
    mat = np.asarray(rho)
    n = int(np.prod(dims))
    if mat.shape != (n, n):
        raise DomainError(f"matrix shape {mat.shape} does not match local dimensions {dims}")
    return _ArrayView(mat, dims)


def _report(view, terms: dict, combine: Callable[[dict], object]) -> WitnessReport:
    value = view.finish(combine(terms))
    elems = {k: (v if isinstance(v, OrderSeries) else OrderSeries.const(v)) for k, v in terms.items()}
    return WitnessReport.from_value(value, elems)


def _rt(view, a, b):
    return view.root(view.D(a) * view.D(b))


# -- complete witnesses ---------------------------------------------------------------


def witness_A1(rho, order: int = 1) -> WitnessReport:
    """Two qubits (A, C) and two qutrits (k, k'), parties ordered (A, k, k', C)."""
    v = _view(rho, A1_DIMS, order)
    t = {
        "coherence": v.mod(v.el((1, 2, 2, 1), (0, 0, 0, 0))),
        "r_C": _rt(v, (0, 0, 0, 1), (1, 2, 2, 0)),
        "r_A": _rt(v, (1, 0, 0, 0), (0, 2, 2, 1)),
        "r_kp": _rt(v, (0, 0, 2, 0), (1, 2, 0, 1)),
        "r_k": _rt(v, (0, 2, 0, 0), (1, 0, 2, 1)),
        "r_kpC": _rt(v, (0, 0, 2, 1), (1, 2, 0, 0)),
        "r_kC": _rt(v, (0, 2, 0, 1), (1, 0, 2, 0)),
        "r_AC": _rt(v, (1, 0, 0, 1), (0, 2, 2, 0)),
    }
    return _report(v, t, lambda t: 2 * (t["coherence"] - sum(val for k, val in t.items() if k != "coherence")))


def witness_A2(rho, order: int = 1) -> WitnessReport:
    """Four fermionic qubits, parties ordered (A, kappa, kappa', C); complete form."""
    v = _view(rho, A2_DIMS, order)
    t = {
        "c_kk": v.mod(v.el((0, 1, 1, 0), (0, 0, 1, 1))),
        "r_1": _rt(v, (0, 0, 0, 1), (1, 0, 1, 1)),
        "c_AC": v.mod(v.el((1, 0, 0, 1), (0, 0, 1, 1))),
        "r_2": _rt(v, (0, 0, 1, 0), (0, 1, 1, 1)),
        "r_3": v.root(v.D((0, 0, 1, 1)) * (v.D((0, 1, 1, 0)) + v.D((1, 0, 0, 1)))),
    }
    return _report(v, t, lambda t: t["c_kk"] - t["r_1"] + t["c_AC"] - t["r_2"] - t["r_3"])


def witness_A2_simplified(rho, order: int = 1) -> WitnessReport:
    """The two coherence terms of the four-qubit witness (first-order reading)."""
    v = _view(rho, A2_DIMS, order)
    t = {
        "c_kk": v.mod(v.el((0, 1, 1, 0), (0, 0, 1, 1))),
        "c_AC": v.mod(v.el((1, 0, 0, 1), (0, 0, 1, 1))),
    }
    return _report(v, t, lambda t: t["c_kk"] + t["c_AC"])


def _mode_parties(rho):
    if isinstance(rho, DensityMatrixP) and all(isinstance(p, int) for p in rho.parties):
        return rho.parties
    return None


def witness_A3(rho, order: int = 2) -> WitnessReport:
    """Three bosonic qutrits (k, k', k'') with (k - k') and (k' - k'') odd."""
    modes = _mode_parties(rho)
    if modes is not None:
        k, kp, kpp = modes
        if (k - kp) % 2 == 0 or (kp - kpp) % 2 == 0:
            raise DomainError("witness needs (k - k') and (k' - k'') odd")
    v = _view(rho, A3_DIMS, order)
    t = {
        "coherence": v.mod(v.el((0, 0, 0), (1, 2, 1))),
        "r_k": _rt(v, (1, 0, 0), (0, 2, 1)),
        "r_kpp": _rt(v, (0, 0, 1), (1, 2, 0)),
        "r_kp": _rt(v, (0, 2, 0), (1, 0, 1)),
    }
    return _report(v, t, lambda t: 2 * (t["coherence"] - t["r_k"] - t["r_kpp"] - t["r_kp"]))


def witness_A4(rho, order: int = 1) -> WitnessReport:
    """Three fermionic modes (kappa, kappa' >= 0, kappa'' < 0)."""
    modes = _mode_parties(rho)
    if modes is not None:
        a, b, c = modes
        if a < 0 or b < 0 or c >= 0:
            raise DomainError("need kappa, kappa' >= 0 and kappa'' < 0")
        if (a + b) % 2 or (a + c) % 2 == 0 or (b + c) % 2 == 0:
            raise DomainError("need (kappa + kappa') even and both sums with kappa'' odd")
    v = _view(rho, A4_DIMS, order)
    t = {
        "c_1": v.mod(v.el((0, 0, 0), (1, 0, 1))),
        "c_2": v.mod(v.el((0, 0, 0), (0, 1, 1))),
        "r_0": v.root(v.D((0, 0, 0)) * (v.D((1, 0, 1)) + v.D((0, 1, 1)))),
        "r_1": _rt(v, (0, 0, 1), (0, 1, 0)),
        "r_2": _rt(v, (0, 0, 1), (1, 0, 0)),
    }
    return _report(v, t, lambda t: t["c_1"] + t["c_2"] - t["r_0"] - t["r_1"] - t["r_2"])


WITNESSES = {"A1": (witness_A1, A1_DIMS), "A2": (witness_A2, A2_DIMS),
             "A3": (witness_A3, A3_DIMS), "A4": (witness_A4, A4_DIMS)}


# -- negativity ---------------------------------------------------------------------------


def partial_transpose(mat: np.ndarray, dims: Sequence[int], transpose: Sequence[int]) -> np.ndarray:
    dims = list(dims)
    n = len(dims)
    t = np.asarray(mat).reshape(dims + dims)
    axes = list(range(2 * n))
    for i in transpose:
        axes[i], axes[n + i] = axes[n + i], axes[i]
    return t.transpose(axes).reshape(mat.shape)


def negativity_array(mat: np.ndarray, dims: Sequence[int], transpose: Sequence[int]) -> float:
    mat = np.asarray(mat)
    if np.max(np.abs(mat - mat.conj().T)) > 1e-10 * max(1.0, np.max(np.abs(mat))):
        raise DomainError("density matrix is not Hermitian")
    ev = np.linalg.eigvalsh(partial_transpose(mat, dims, transpose))
    return float(np.sum(np.abs(ev) - ev) / 2.0)


def _side(rho: DensityMatrixP, bipartition) -> list[int]:
    return [rho.parties.index(p) for p in bipartition]


def negativity(rho: DensityMatrixP, bipartition: Sequence, h: float, dims=None) -> float:
    """Numeric negativity at ``h``, transposing the parties listed in ``bipartition``."""
    dims = tuple(dims) if dims is not None else rho.dims()
    if rho.hermiticity_defect() > 1e-12:
        raise DomainError("density matrix is not Hermitian")
    return negativity_array(rho.to_array(h, dims), dims, _side(rho, bipartition))


def negativity_series(rho: DensityMatrixP, bipartition: Sequence, dims=None, tol: float = 1e-9) -> OrderSeries:
    """Negativity to first order by degenerate perturbation theory of the partial transpose."""
    dims = tuple(dims) if dims is not None else rho.dims()
    side = _side(rho, bipartition)
    r0 = partial_transpose(rho.coefficient_array(0, dims), dims, side)
    r1 = partial_transpose(rho.coefficient_array(1, dims), dims, side)
    lam, vec = np.linalg.eigh(r0)
    c0 = c1 = 0.0
    i = 0
    while i < len(lam):
        j = i
        while j + 1 < len(lam) and abs(lam[j + 1] - lam[i]) <= tol:
            j += 1
        u = vec[:, i:j + 1]
        mu = np.linalg.eigvalsh(u.conj().T @ r1 @ u)
        l0 = float(np.mean(lam[i:j + 1]))
        if l0 < -tol:
            c0 += -l0 * (j - i + 1)
            c1 += -float(np.sum(mu))
        elif abs(l0) <= tol:
            c1 += float(np.sum(np.clip(-mu, 0.0, None)))
        i = j + 1
    return OrderSeries(c0, c1, 0.0)


# -- canonical states ------------------------------------------------------------------------


@dataclass
class CanonicalState:
    kind: str
    state: FockStateP
    parties: tuple

    def amplitudes(self) -> dict:
        out = {}
        for lab, amp in self.state.terms.items():
            occ = dict(lab)
            out[tuple(occ.get(p, 0) for p in self.parties)] = amp
        return out


def _normalized(st: FockStateP) -> FockStateP:
    return st.scale(st.norm2().sqrt().reciprocal())


def canonical_state(kind: str, fmap, modes: Sequence[int], sign: int = +1,
                    ordering: ModeOrder = CANONICAL, normalize: bool = True) -> CanonicalState:
    """Dicke-type four-qubit state (kind="dicke4", modes=(kappa, kappa')) or
    W-type three-mode state (kind="w3", modes=(kappa, kappa', kappa''))."""
    if kind == "dicke4":
        k, kp = modes
        Gk, Gkp = fmap.g(k), fmap.g(kp)
        a = fmap.entry("A1", k, kp)
        vac = FockStateP.vacuum(True, ordering, 2)

        def ket(*ms):
            st = vac
            for m in reversed(ms):
                st = st.create(m)
            return st

        terms = [
            (0.5, ket()),
            (0.5 * sign * Gk.conjugate(), ket("A", k)),
            (0.5 * sign * Gkp, ket(kp, "C")),
            (OrderSeries(0, 0.5 * Gkp * a.conjugate()), ket(k, kp)),
            (OrderSeries(0, -0.5 * Gk.conjugate() * a), ket("A", "C")),
            (0.5 * Gk.conjugate() * Gkp, ket("A", k, kp, "C")),
        ]
        parties = ("A", k, kp, "C")
    elif kind == "w3":
        k, kp, kpp = modes
        g = fmap.g(kpp)
        vac = FockStateP.vacuum(True, ordering, 2)
        terms = [
            (1.0, vac),
            (OrderSeries(0, g * fmap.entry("A1", kp, kpp).conjugate()), vac.create(kpp).create(kp)),
            (OrderSeries(0, g * fmap.entry("A1", k, kpp).conjugate()), vac.create(kpp).create(k)),
        ]
        parties = (k, kp, kpp)
    else:
        raise DomainError(f"unknown canonical state {kind!r}")
    st = FockStateP({}, True, ordering, 2)
    for c, s in terms:
        st = st + s.scale(c)
    if normalize:
        st = _normalized(st)
    return CanonicalState(kind, st, parties)


def fidelity(rho: DensityMatrixP, psi: CanonicalState) -> OrderSeries:
    if tuple(rho.parties) != tuple(psi.parties):
        raise DomainError("state and density matrix live on different parties")
    amps = psi.amplitudes()
    tot = OrderSeries()
    for x, ax in amps.items():
        for y, ay in amps.items():
            e = rho.element(x, y)
            if e.leading_order() is not None:
                tot = tot + ax.conj() * e * ay
    return tot.truncate(2)


# -- bi-separable sampler ----------------------------------------------------------------------


def random_biseparable_pure(dims: Sequence[int], rng: np.random.Generator) -> np.ndarray:
    n = len(dims)
    while True:
        side = [i for i in range(n) if rng.random() < 0.5]
        if 0 < len(side) < n:
            break
    rest = [i for i in range(n) if i not in side]
    da = int(np.prod([dims[i] for i in side]))
    db = int(np.prod([dims[i] for i in rest]))
    a = rng.normal(size=da) + 1j * rng.normal(size=da)
    b = rng.normal(size=db) + 1j * rng.normal(size=db)
    # sparsify now and then so that boundary cases with vanishing populations appear
    if rng.random() < 0.3:
        a = a * (rng.random(da) < 0.5)
    if rng.random() < 0.3:
        b = b * (rng.random(db) < 0.5)
    if not a.any():
        a[rng.integers(da)] = 1.0
    if not b.any():
        b[rng.integers(db)] = 1.0
    psi = np.kron(a, b).reshape([dims[i] for i in side] + [dims[i] for i in rest])
    psi = np.transpose(psi, np.argsort(side + rest)).reshape(-1)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def random_biseparable(dims: Sequence[int], rng: np.random.Generator, max_mix: int = 8) -> np.ndarray:
    k = int(rng.integers(1, max_mix + 1))
    w = rng.random(k)
    w = w / w.sum()
    return sum(wi * random_biseparable_pure(dims, rng) for wi in w)


def sampler_max(name: str, n_samples: int = 1000, seed: int = 0) -> float:
    """Largest witness value over seeded random bi-separable states."""
    fn, dims = WITNESSES[name]
    rng = np.random.default_rng(seed)
    worst = -math.inf
    for _ in range(n_samples):
        worst = max(worst, fn(random_biseparable(dims, rng)).value.c0.real)
    return worst
