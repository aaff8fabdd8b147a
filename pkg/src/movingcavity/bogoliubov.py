"""Bogoliubov maps for rigid cavities: single switches, free phases, composition.

Two representations are used side by side:

* first-order maps (``PerturbBogoMap`` / ``FermiBogoMap``) holding unit phases ``G``
  and the coefficient matrices of ``h`` (``alpha1``, ``beta1`` or ``A1``);
* numeric maps (``NumericBogoMap`` / ``NumericFermiMap``) holding full matrices at
  a fixed ``h``.

Conventions: an out-mode is ``phi~_m = sum_n (alpha_mn phi_n + beta_mn phi_n^*)``;
free evolution over proper time ``s`` multiplies mode ``n`` by ``G_n = exp(+i w_n s)``.
For the Dirac field the signed label carries the sign of the frequency, so
``G_{-n} = conj(G_n)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .core import (
    ACCELERATED,
    DIRAC,
    INERTIAL,
    CavityConfig,
    DomainError,
    Segment,
    Trajectory,
    accelerated_frequency_factor,
    check_h,
)

_PI2 = math.pi**2


class OracleConvergenceError(RuntimeError):
    def __init__(self, msg: str, achieved: float):
        super().__init__(f"{msg} (achieved tolerance {achieved:.3e})")
        self.achieved = achieved


class ClosedFormMismatch(RuntimeError):
    pass


class BasisMismatch(ValueError):
    pass


class SingularAlphaError(np.linalg.LinAlgError):
    pass


# -- map containers -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PerturbBogoMap:
    """Bosonic map ``alpha = diag(G) + alpha1*h``, ``beta = beta1*h`` (first order)."""

    G: np.ndarray
    alpha1: np.ndarray
    beta1: np.ndarray
    labels: tuple[int, ...]
    h_ref: float | None = None

    fermionic = False

    def __post_init__(self):
        n = len(self.labels)
        for name in ("alpha1", "beta1"):
            if getattr(self, name).shape != (n, n):
                raise BasisMismatch(f"{name} has shape {getattr(self, name).shape}, expected {(n, n)}")
        if self.G.shape != (n,):
            raise BasisMismatch("phase vector does not match the basis")

    def index(self, label: int) -> int:
        return self.labels.index(label)

    def entry(self, name: str, m: int, n: int) -> complex:
        return complex(getattr(self, name)[self.index(m), self.index(n)])

    def g(self, m: int) -> complex:
        return complex(self.G[self.index(m)])

    def scaled(self, factor: float) -> "PerturbBogoMap":
        return replace(self, alpha1=self.alpha1 * factor, beta1=self.beta1 * factor)


@dataclass(frozen=True, eq=False)
class FermiBogoMap:
    """Dirac map ``A = diag(G) + A1*h`` over signed labels (first order)."""

    G: np.ndarray
    A1: np.ndarray
    labels: tuple[int, ...]
    h_ref: float | None = None

    fermionic = True

    def __post_init__(self):
        n = len(self.labels)
        if self.A1.shape != (n, n) or self.G.shape != (n,):
            raise BasisMismatch("kernel does not match the basis")

    def index(self, label: int) -> int:
        return self.labels.index(label)

    def entry(self, name: str, m: int, n: int) -> complex:
        return complex(getattr(self, name)[self.index(m), self.index(n)])

    def g(self, m: int) -> complex:
        return complex(self.G[self.index(m)])

    def scaled(self, factor: float) -> "FermiBogoMap":
        return replace(self, A1=self.A1 * factor)


@dataclass(frozen=True, eq=False)
class NumericBogoMap:
    alpha: np.ndarray
    beta: np.ndarray
    labels: tuple[int, ...]

    fermionic = False

    def identity_residual(self) -> float:
        n = len(self.labels)
        r = self.alpha @ self.alpha.conj().T - self.beta @ self.beta.conj().T - np.eye(n)
        return float(np.max(np.abs(r)))


@dataclass(frozen=True, eq=False)
class NumericFermiMap:
    A: np.ndarray
    labels: tuple[int, ...]

    fermionic = True

    def identity_residual(self) -> float:
        n = len(self.labels)
        return float(np.max(np.abs(self.A @ self.A.conj().T - np.eye(n))))


def identity_map(cfg: CavityConfig):
    labels = cfg.basis().indices
    n = len(labels)
    G = np.ones(n, dtype=complex)
    z = np.zeros((n, n), dtype=complex)
    if cfg.is_fermionic:
        return FermiBogoMap(G, z, labels)
    return PerturbBogoMap(G, z, z.copy(), labels)


def to_numeric(m, h: float):
    """Evaluate a first-order map at ``h`` (kernels are coefficients of ``h_ref``-scaled h)."""
    if m.fermionic:
        return NumericFermiMap(np.diag(m.G) + m.A1 * h, m.labels)
    return NumericBogoMap(np.diag(m.G) + m.alpha1 * h, m.beta1 * h, m.labels)


# -- closed-form single-switch kernels -------------------------------------------


def scalar_switch_kernels(labels: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """First-order (alpha1, beta1) for an inertial -> accelerated switch, massless scalar."""
    m = np.asarray(labels, dtype=float)[:, None]
    n = np.asarray(labels, dtype=float)[None, :]
    odd = ((m + n) % 2 == 1).astype(float)
    root = np.sqrt(m * n)
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = np.where(m != n, -2.0 * odd * root / (_PI2 * (m - n) ** 3), 0.0)
    beta = 2.0 * odd * root / (_PI2 * (m + n) ** 3)
    return alpha.astype(complex), beta.astype(complex)


def dirac_switch_kernel(labels: Sequence[int]) -> np.ndarray:
    """First-order A1 for an inertial -> accelerated switch, massless Dirac, signed labels."""
    m = np.asarray(labels, dtype=float)[:, None]
    n = np.asarray(labels, dtype=float)[None, :]
    odd = (np.abs(m + n) % 2 == 1).astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(m != n, -odd * (m + n) / (_PI2 * (m - n) ** 3), 0.0)
    return a.astype(complex)


def switch_map(cfg: CavityConfig, h: float | None = None):
    """Inertial -> accelerated switch. Kernels are per unit h; ``h`` is recorded as h_ref."""
    if h is not None:
        check_h(h)
    _ensure_verified(cfg.field_kind)
    labels = cfg.basis().indices
    G = np.ones(len(labels), dtype=complex)
    if cfg.is_fermionic:
        return FermiBogoMap(G, dirac_switch_kernel(labels), labels, h)
    a1, b1 = scalar_switch_kernels(labels)
    return PerturbBogoMap(G, a1, b1, labels, h)


# -- phases and composition --------------------------------------------------------


def phase_angles(cfg: CavityConfig, segment: Segment) -> np.ndarray:
    labels = np.asarray(cfg.basis().indices, dtype=float)
    theta = labels * math.pi * segment.duration / cfg.delta
    if segment.kind == ACCELERATED:
        theta = theta * accelerated_frequency_factor(segment.h)
    return theta


def phase_map(cfg: CavityConfig, segment: Segment, conjugate: bool = False) -> np.ndarray:
    """Diagonal phase vector ``exp(+i theta_n)`` for one segment."""
    ph = np.exp(1j * phase_angles(cfg, segment))
    return ph.conj() if conjugate else ph


def _phase_only(m, G: np.ndarray):
    n = len(G)
    z = np.zeros((n, n), dtype=complex)
    if m.fermionic:
        return FermiBogoMap(G, z, m.labels, m.h_ref)
    return PerturbBogoMap(G, z, z.copy(), m.labels, m.h_ref)


def _check_basis(a, b):
    if tuple(a.labels) != tuple(b.labels) or a.fermionic != b.fermionic:
        raise BasisMismatch("maps are defined on different mode bases")


def compose(outer, inner):
    """Map for ``inner`` followed by ``outer``."""
    _check_basis(outer, inner)
    if isinstance(outer, NumericBogoMap) or isinstance(inner, NumericBogoMap):
        a2, b2, a1, b1 = outer.alpha, outer.beta, inner.alpha, inner.beta
        return NumericBogoMap(a2 @ a1 + b2 @ b1.conj(), a2 @ b1 + b2 @ a1.conj(), outer.labels)
    if isinstance(outer, NumericFermiMap) or isinstance(inner, NumericFermiMap):
        return NumericFermiMap(outer.A @ inner.A, outer.labels)
    G2, G1 = outer.G, inner.G
    h_ref = outer.h_ref if outer.h_ref is not None else inner.h_ref
    if outer.fermionic:
        A = G2[:, None] * inner.A1 + outer.A1 * G1[None, :]
        return FermiBogoMap(G2 * G1, A, outer.labels, h_ref)
    alpha = G2[:, None] * inner.alpha1 + outer.alpha1 * G1[None, :]
    beta = G2[:, None] * inner.beta1 + outer.beta1 * G1.conj()[None, :]
    return PerturbBogoMap(G2 * G1, alpha, beta, outer.labels, h_ref)


def inverse(m):
    """Exact inverse (first order for perturbative maps)."""
    if isinstance(m, NumericBogoMap):
        return NumericBogoMap(m.alpha.conj().T, -m.beta.T, m.labels)
    if isinstance(m, NumericFermiMap):
        return NumericFermiMap(m.A.conj().T, m.labels)
    Gc = m.G.conj()
    if m.fermionic:
        return FermiBogoMap(Gc, -Gc[:, None] * m.A1 * Gc[None, :], m.labels, m.h_ref)
    alpha = -Gc[:, None] * m.alpha1 * Gc[None, :]
    beta = -Gc[:, None] * m.beta1 * m.G[None, :]
    return PerturbBogoMap(Gc, alpha, beta, m.labels, m.h_ref)


def _frame_changes(traj: Trajectory):
    """Yield ('switch', h_from, h_to) and ('phase', segment) steps in time order."""
    current: float | None = None  # None means the inertial frame
    for seg in traj.merged():
        target = seg.h if seg.kind == ACCELERATED else None
        if target != current:
            yield ("switch", current, target)
            current = target
        yield ("phase", seg)
    if current is not None:
        yield ("switch", current, None)


def compile_trajectory(cfg: CavityConfig, traj: Trajectory, h: float | None = None,
                       conjugate_phases: bool = False):
    """First-order map of a whole trajectory, in and out regions inertial.

    Kernels are expressed per unit ``h`` (default: the largest h on the
    trajectory); a segment with acceleration h_i contributes switch kernels
    scaled by h_i/h.
    """
    m = identity_map(cfg)
    if len(traj) == 0:
        return m
    h_ref = h if h is not None else traj.max_h
    m = replace(m, h_ref=h_ref)
    if traj.max_h == 0:
        # no acceleration anywhere: free evolution only
        for seg in traj.merged():
            m = compose(_phase_only(m, phase_map(cfg, seg, conjugate_phases)), m)
        return m
    check_h(h_ref)
    base = switch_map(cfg, h_ref)

    def sw(hh):
        return base.scaled(hh / h_ref)

    for step in _frame_changes(traj):
        if step[0] == "phase":
            m = compose(_phase_only(m, phase_map(cfg, step[1], conjugate_phases)), m)
            continue
        _, h_from, h_to = step
        if h_from is not None:
            m = compose(inverse(sw(h_from)), m)
        if h_to is not None:
            m = compose(sw(h_to), m)
    return m


def compile_numeric(cfg: CavityConfig, traj: Trajectory, source: str = "oracle",
                    conjugate_phases: bool = False):
    """Full (non-truncated in h) composition using numeric switch matrices.

    ``source="oracle"`` uses quadrature switch matrices at each segment's h;
    ``source="first_order"`` uses ``1 + kernel*h``.
    """
    labels = cfg.basis().indices
    n = len(labels)
    if cfg.is_fermionic:
        m = NumericFermiMap(np.eye(n, dtype=complex), labels)
    else:
        m = NumericBogoMap(np.eye(n, dtype=complex), np.zeros((n, n), complex), labels)

    @lru_cache(maxsize=None)
    def sw(hh):
        if source == "oracle":
            return oracle_switch_matrices(cfg, hh)
        if source == "first_order":
            return to_numeric(switch_map(cfg, hh), hh)
        raise ValueError(f"unknown switch source {source!r}")

    for step in _frame_changes(traj):
        if step[0] == "phase":
            ph = phase_map(cfg, step[1], conjugate_phases)
            if cfg.is_fermionic:
                p = NumericFermiMap(np.diag(ph), labels)
            else:
                p = NumericBogoMap(np.diag(ph), np.zeros((n, n), complex), labels)
            m = compose(p, m)
            continue
        _, h_from, h_to = step
        if h_from is not None:
            m = compose(inverse(sw(h_from)), m)
        if h_to is not None:
            m = compose(sw(h_to), m)
    return m


# -- resonances ---------------------------------------------------------------------


class ResonanceTimes(NamedTuple):
    taus: list[float]
    mode_independent: list[bool]


def resonance_times(k: int, kp: int, delta: float, n_list: Sequence[int]) -> ResonanceTimes:
    """Block durations ``2 n delta / (k + k')`` at which a two-mode coefficient grows linearly."""
    if k == kp or k < 1 or kp < 1:
        raise DomainError("need two distinct positive mode labels")
    taus, flags = [], []
    for n in n_list:
        if int(n) != n or n <= 0:
            continue
        taus.append(2.0 * n * delta / (k + kp))
        flags.append(n % (k + kp) == 0)
    return ResonanceTimes(taus, flags)


# -- quadrature oracle ------------------------------------------------------------------

_ORACLE_NODES = 256
_ORACLE_HS = (0.02, 0.01, 0.005, 0.0025)


@lru_cache(maxsize=8)
def _gauss(npts: int):
    x, w = np.polynomial.legendre.leggauss(npts)
    return (x + 1.0) / 2.0, w / 2.0


def _scalar_overlaps(h: float, ms: np.ndarray, ns: np.ndarray, npts: int):
    # cavity of unit width in Rindler position x in [a, a+1], t = 0 slice
    s, w = _gauss(npts)
    a = 1.0 / h - 0.5
    L = 2.0 * math.atanh(h / 2.0)
    x = a + s
    om_r = ms * math.pi / L
    phi = np.sin(np.outer(ns * math.pi, s)) / np.sqrt(ns * math.pi)[:, None]
    psi = np.sin(np.outer(om_r, np.log(x / a))) / np.sqrt(ms * math.pi)[:, None]
    i_over_x = (psi * (w / x)) @ phi.T
    i_plain = (psi * w) @ phi.T
    alpha = om_r[:, None] * i_over_x + i_plain * (ns * math.pi)[None, :]
    beta = -(om_r[:, None] * i_over_x - i_plain * (ns * math.pi)[None, :])
    return alpha, beta


def _dirac_overlaps(h: float, ms: np.ndarray, ns: np.ndarray, npts: int):
    s, w = _gauss(npts)
    a = 1.0 / h - 0.5
    L = 2.0 * math.atanh(h / 2.0)
    x = a + s
    om_r = ms * math.pi / L
    arg = np.outer(om_r, np.log(x / a))[:, None, :] - np.outer(ns * math.pi, s)[None, :, :]
    return (np.cos(arg) * (w / np.sqrt(x))).sum(axis=-1) / math.sqrt(L)


def _overlaps(field_kind, h, ms, ns, npts):
    if field_kind == DIRAC:
        return _dirac_overlaps(h, ms, ns, npts), None
    return _scalar_overlaps(h, ms, ns, npts)


def _converged(field_kind, h, ms, ns, tol=1e-12):
    lo = _overlaps(field_kind, h, ms, ns, _ORACLE_NODES)
    hi = _overlaps(field_kind, h, ms, ns, 2 * _ORACLE_NODES)
    err = max(float(np.max(np.abs(p - q))) for p, q in zip(lo, hi) if p is not None)
    if err > tol:
        raise OracleConvergenceError(f"quadrature not converged at h={h}", err)
    return hi


def oracle_coefficients(cfg: CavityConfig, h: float, m: int, n: int):
    """Single-switch overlaps (alpha_mn, beta_mn) by quadrature; Dirac returns (A_mn, None)."""
    check_h(h)
    if h > 0.5:
        raise DomainError("oracle quadrature is only set up for h <= 0.5")
    ms, ns = np.array([m], float), np.array([n], float)
    a, b = _converged(cfg.field_kind, h, ms, ns)
    return complex(a[0, 0]), (None if b is None else complex(b[0, 0]))


def oracle_switch_matrices(cfg: CavityConfig, h: float):
    """Numeric single-switch map at ``h`` over the full basis."""
    check_h(h)
    labels = cfg.basis().indices
    arr = np.asarray(labels, dtype=float)
    a, b = _converged(cfg.field_kind, h, arr, arr)
    if cfg.is_fermionic:
        return NumericFermiMap(a.astype(complex), labels)
    return NumericBogoMap(a.astype(complex), b.astype(complex), labels)


def oracle_first_order(field_kind: str, labels: Sequence[int], hs: Sequence[float] = _ORACLE_HS):
    """Extrapolate ``(X(h) - X(0)) / h`` to h = 0 with a polynomial through the sample points.

    Returns (alpha1, beta1) for the scalar field and (A1, None) for Dirac.
    """
    arr = np.asarray(labels, dtype=float)
    eye = np.eye(len(arr))
    first = [], []
    for h in hs:
        a, b = _converged(field_kind, h, arr, arr)
        first[0].append((a - eye) / h)
        if b is not None:
            first[1].append(b / h)
    hs = np.asarray(hs, float)
    deg = len(hs) - 1

    def extrap(stack):
        data = np.stack(stack).reshape(len(hs), -1)
        coef = np.polyfit(hs, data, deg)
        return coef[-1].reshape(len(arr), len(arr))

    a1 = extrap(first[0])
    b1 = extrap(first[1]) if first[1] else None
    return a1, b1


def verify_closed_forms(field_kind: str, max_label: int = 5, tol: float = 1e-8) -> float:
    """Compare closed-form switch kernels with the extrapolated oracle; returns max deviation."""
    if field_kind == DIRAC:
        labels = list(range(-max_label, max_label + 1))
        a1, _ = oracle_first_order(field_kind, labels)
        dev = float(np.max(np.abs(a1 - dirac_switch_kernel(labels))))
    else:
        labels = list(range(1, max_label + 1))
        a1, b1 = oracle_first_order(field_kind, labels)
        ca, cb = scalar_switch_kernels(labels)
        dev = float(max(np.max(np.abs(a1 - ca)), np.max(np.abs(b1 - cb))))
    if not dev <= tol:
        raise ClosedFormMismatch(f"{field_kind}: closed form deviates from oracle by {dev:.3e}")
    return dev


@lru_cache(maxsize=None)
def _ensure_verified(field_kind: str) -> float:
    return verify_closed_forms(field_kind)
