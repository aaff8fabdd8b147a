"""Perturbative Fock states, vacuum kernels, density matrices and partial traces.

Modes are identified by integer labels for the moving cavity (signed for the
Dirac field: n >= 0 particles, n < 0 antiparticles) and by strings for modes of
other, inertial cavities ("A", "C").

Fermionic basis vectors are creation-operator strings applied to the vacuum in a
canonical order: "A", then particles by ascending label, then antiparticles by
ascending signed label, then any other external mode. ``ModeOrder(reversed=True)``
uses the opposite order; physical results must not depend on the choice.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .bogoliubov import FermiBogoMap, PerturbBogoMap, SingularAlphaError
from .core import OrderSeries, DomainError

ZERO = OrderSeries()
ONE = OrderSeries(1.0)

Mode = int | str
Label = tuple  # tuple of (mode, occupation) pairs in canonical order


@dataclass(frozen=True)
class ModeOrder:
    reversed: bool = False

    def key(self, mode: Mode):
        if isinstance(mode, str):
            k = (0, 0, "") if mode == "A" else (3, 0, mode)
        elif mode >= 0:
            k = (1, mode, "")
        else:
            k = (2, mode, "")
        if self.reversed:
            return (-k[0], -k[1], _neg_str(k[2]))
        return k


def _neg_str(s: str):
    return tuple(-ord(ch) for ch in s)


CANONICAL = ModeOrder()
REVERSED = ModeOrder(reversed=True)


def _order_of(s: OrderSeries) -> int:
    for i, c in enumerate(s.coeffs):
        if c != 0:
            return i
    return 3


class FockStateP:
    """Superposition of occupation-number basis vectors with OrderSeries amplitudes."""

    __slots__ = ("terms", "fermionic", "ordering", "max_order")

    def __init__(self, terms=None, fermionic=False, ordering: ModeOrder = CANONICAL, max_order=2):
        self.fermionic = bool(fermionic)
        self.ordering = ordering
        self.max_order = max_order
        self.terms: dict[Label, OrderSeries] = {}
        for lab, amp in (terms or {}).items():
            amp = OrderSeries.coerce(amp).truncate(max_order)
            if _order_of(amp) <= max_order:
                self.terms[lab] = amp

    # -- construction -----------------------------------------------------------
    @classmethod
    def vacuum(cls, fermionic=False, ordering=CANONICAL, max_order=2):
        return cls({(): ONE}, fermionic, ordering, max_order)

    def _like(self, terms):
        return FockStateP(terms, self.fermionic, self.ordering, self.max_order)

    def label(self, occupations: dict) -> Label:
        return tuple(sorted(((m, n) for m, n in occupations.items() if n), key=lambda t: self.ordering.key(t[0])))

    def amplitude(self, occupations: dict | Label) -> OrderSeries:
        lab = self.label(occupations) if isinstance(occupations, dict) else occupations
        return self.terms.get(lab, ZERO)

    # -- ladder operators ---------------------------------------------------------
    def _ladder(self, lab: Label, mode: Mode, create: bool):
        key = self.ordering.key
        kmode = key(mode)
        out = []
        before = 0
        factor = 1.0
        found = False
        for m, n in lab:
            if m == mode:
                found = True
                if create:
                    if self.fermionic:
                        return None, 0.0
                    factor = math.sqrt(n + 1)
                    out.append((m, n + 1))
                else:
                    factor = math.sqrt(n)
                    if n > 1:
                        out.append((m, n - 1))
                continue
            if key(m) < kmode:
                before += n
            out.append((m, n))
        if not found:
            if not create:
                return None, 0.0
            out.append((mode, 1))
            out.sort(key=lambda t: key(t[0]))
        if self.fermionic and before % 2:
            factor = -factor
        return tuple(out), factor

    def apply(self, ops: Iterable[tuple]) -> "FockStateP":
        """Apply a linear combination of single ladder operators.

        ``ops`` holds (coefficient, "c" | "a", mode) triples.
        """
        ops = [(OrderSeries.coerce(c), kind, mode) for c, kind, mode in ops]
        ops = [(c, _order_of(c), kind, mode) for c, kind, mode in ops if _order_of(c) <= self.max_order]
        acc: dict[Label, OrderSeries] = defaultdict(OrderSeries)
        for lab, amp in self.terms.items():
            oa = _order_of(amp)
            for c, oc, kind, mode in ops:
                if oa + oc > self.max_order:
                    continue
                new, f = self._ladder(lab, mode, kind == "c")
                if new is None:
                    continue
                acc[new] = acc[new] + amp * c * f
        return self._like(acc)

    def create(self, mode: Mode, coef=1.0) -> "FockStateP":
        return self.apply([(coef, "c", mode)])

    def annihilate(self, mode: Mode, coef=1.0) -> "FockStateP":
        return self.apply([(coef, "a", mode)])

    # -- linear structure ---------------------------------------------------------
    def __add__(self, other: "FockStateP") -> "FockStateP":
        acc = defaultdict(OrderSeries, self.terms)
        for lab, amp in other.terms.items():
            acc[lab] = acc[lab] + amp
        return self._like(acc)

    def scale(self, c) -> "FockStateP":
        c = OrderSeries.coerce(c)
        return self._like({lab: amp * c for lab, amp in self.terms.items()})

    def truncate(self, order: int) -> "FockStateP":
        return FockStateP(self.terms, self.fermionic, self.ordering, order)

    def inner(self, other: "FockStateP") -> OrderSeries:
        """<self|other>."""
        tot = ZERO
        for lab, amp in self.terms.items():
            o = other.terms.get(lab)
            if o is not None:
                tot = tot + amp.conj() * o
        return tot

    def norm2(self) -> OrderSeries:
        return self.inner(self)

    def modes(self) -> list:
        seen = {m for lab in self.terms for m, _ in lab}
        return sorted(seen, key=self.ordering.key)

    def with_ordering(self, ordering: ModeOrder) -> "FockStateP":
        """Same physical state expressed in another canonical ordering."""
        out = {}
        for lab, amp in self.terms.items():
            modes = [m for m, _ in lab]
            new = sorted(modes, key=ordering.key)
            s = _perm_sign([new.index(m) for m in modes]) if self.fermionic else 1
            out[tuple(sorted(lab, key=lambda t: ordering.key(t[0])))] = amp * s
        return FockStateP(out, self.fermionic, ordering, self.max_order)

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        kind = "fermionic" if self.fermionic else "bosonic"
        return f"FockStateP({kind}, {len(self.terms)} terms, order<={self.max_order})"


def _perm_sign(perm: Sequence[int]) -> int:
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


# -- in-region operators in terms of out-region operators -----------------------------


def _ser(c0, c1) -> OrderSeries:
    return OrderSeries(complex(c0), complex(c1), 0j)


def check_interior(bmap, *modes):
    labels = bmap.labels
    n_max = max(abs(l) for l in labels)
    for m in modes:
        if m not in labels:
            raise DomainError(f"mode {m} outside the truncated basis")
        if abs(m) > n_max - 2:
            raise DomainError(f"mode {m} too close to the truncation edge n_max={n_max}")


def boson_creator(bmap: PerturbBogoMap, k: int) -> list:
    """a_k^dagger (in) = sum_m conj(alpha_mk) a~_m^dagger + beta_mk a~_m."""
    j = bmap.index(k)
    ops = []
    for i, m in enumerate(bmap.labels):
        g = bmap.G[j].conjugate() if m == k else 0.0
        a = bmap.alpha1[i, j].conjugate()
        if g != 0 or a != 0:
            ops.append((_ser(g, a), "c", m))
        b = bmap.beta1[i, j]
        if b != 0:
            ops.append((_ser(0, b), "a", m))
    return ops


def fermion_creator(fmap: FermiBogoMap, k: int) -> list:
    """b_k^dagger (k >= 0) or c_k^dagger (k < 0) expressed in out-region ladder operators."""
    j = fmap.index(k)
    ops = []
    for i, m in enumerate(fmap.labels):
        g = fmap.G[j] if m == k else 0.0
        a = fmap.A1[i, j]
        if k >= 0:
            g, a = np.conj(g), np.conj(a)
        if g == 0 and a == 0:
            continue
        same_charge = (m >= 0) == (k >= 0)
        ops.append((_ser(g, a), "c" if same_charge else "a", m))
    return ops


# -- vacuum kernels -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class VacuumKernel:
    """First-order pair kernel (coefficient of h) and normalization series.

    Bosonic: W = 1/2 sum V_ij a~_i^+ a~_j^+. Fermionic: W = sum_{p>=0,q<0} V_pq b~_p^+ c~_q^+.
    """

    V: np.ndarray
    M: OrderSeries
    labels: tuple
    fermionic: bool

    def pairs(self):
        for i, p in enumerate(self.labels):
            for j, q in enumerate(self.labels):
                if self.V[i, j] == 0:
                    continue
                if self.fermionic and not (p >= 0 > q):
                    continue
                yield p, q, complex(self.V[i, j])


def vacuum_kernel(bmap) -> VacuumKernel:
    if bmap.fermionic:
        # V_pq = G_q conj(A1_pq) on (particle, antiparticle) pairs
        V = bmap.G[None, :] * bmap.A1.conj()
        lab = np.asarray(bmap.labels)
        V = np.where((lab[:, None] >= 0) & (lab[None, :] < 0), V, 0.0)
        M = OrderSeries(1.0, 0.0, -0.5 * float(np.sum(np.abs(V) ** 2)))
    else:
        V = -bmap.beta1.conj() * bmap.G.conj()[None, :]
        M = OrderSeries(1.0, 0.0, -0.25 * float(np.sum(np.abs(V) ** 2)))
    return VacuumKernel(V, M, tuple(bmap.labels), bmap.fermionic)


def numeric_vacuum_kernel(alpha: np.ndarray, beta: np.ndarray, cond_limit: float = 1e12) -> np.ndarray:
    """V = -conj(beta) alpha^{-1} for a numeric bosonic map; singular alpha is reported."""
    c = np.linalg.cond(alpha)
    if not np.isfinite(c) or c > cond_limit:
        raise SingularAlphaError(f"alpha is singular on the truncated block (condition number {c:.3e})")
    return -beta.conj() @ np.linalg.inv(alpha)


def _pair_ops(kernel: VacuumKernel):
    """W as a list of two-operator products (coef, mode_left, mode_right)."""
    out = []
    for p, q, v in kernel.pairs():
        c = _ser(0, v * (0.5 if not kernel.fermionic else 1.0))
        out.append((c, p, q))
    return out


def _apply_pairs(state: FockStateP, pairs) -> FockStateP:
    acc: dict = defaultdict(OrderSeries)
    for lab, amp in state.terms.items():
        if _order_of(amp) + 1 > state.max_order:
            continue
        for c, p, q in pairs:
            l1, f1 = state._ladder(lab, q, True)
            if l1 is None:
                continue
            l2, f2 = state._ladder(l1, p, True)
            if l2 is None:
                continue
            acc[l2] = acc[l2] + amp * c * (f1 * f2)
    return state._like(acc)


def transformed_vacuum(bmap, order: int = 2, ordering: ModeOrder = CANONICAL) -> FockStateP:
    """In-region vacuum expanded in out-region states: M (1 + W + W^2/2) |0~> to ``order``."""
    ker = vacuum_kernel(bmap)
    pairs = _pair_ops(ker)
    vac = FockStateP.vacuum(bmap.fermionic, ordering, order)
    w1 = _apply_pairs(vac, pairs)
    state = vac + w1
    if order >= 2:
        w2 = _apply_pairs(w1, pairs).scale(0.5)
        state = (state + w2).scale(ker.M)
    return state


def apply_in_creator(bmap, k: int, state: FockStateP) -> FockStateP:
    ops = fermion_creator(bmap, k) if bmap.fermionic else boson_creator(bmap, k)
    return state.apply(ops)


BOSON_INPUTS = ("vac", "one_k", "one_kp", "pair_kkp")
FERMION_INPUTS = ("vac", "particle", "antiparticle", "pair")


def transform_boson_state(bmap: PerturbBogoMap, which: str, k: int, kp: int,
                          order: int = 1) -> FockStateP:
    """In-region |0>, |1_k>, |1_k'> or |1_k 1_k'> in the out-region basis, first order."""
    if bmap.fermionic:
        raise DomainError("bosonic transform needs a bosonic map")
    if k == kp:
        raise DomainError("modes k and k' must differ")
    check_interior(bmap, k, kp)
    if which not in BOSON_INPUTS:
        raise DomainError(f"unknown input state {which!r}")
    st = transformed_vacuum(bmap, order=order)
    if which in ("one_kp", "pair_kkp"):
        st = apply_in_creator(bmap, kp, st)
    if which in ("one_k", "pair_kkp"):
        st = apply_in_creator(bmap, k, st)
    return st


def transform_fermion_state(fmap: FermiBogoMap, which: str, kappa: int, kappap: int,
                            order: int = 1, ordering: ModeOrder = CANONICAL) -> FockStateP:
    """In-region |0>>, |1_k>>+, |1_k'>>-, b_k^+ c_k'^+ |0>> in the out-region basis."""
    if not fmap.fermionic:
        raise DomainError("fermionic transform needs a Dirac map")
    if kappa < 0:
        raise DomainError("particle label must be >= 0")
    if kappap >= 0:
        raise DomainError("antiparticle label must be < 0")
    check_interior(fmap, kappa, kappap)
    if which not in FERMION_INPUTS:
        raise DomainError(f"unknown input state {which!r}")
    st = transformed_vacuum(fmap, order=order, ordering=ordering)
    if which in ("antiparticle", "pair"):
        st = apply_in_creator(fmap, kappap, st)
    if which in ("particle", "pair"):
        st = apply_in_creator(fmap, kappa, st)
    return st


# -- density matrices ---------------------------------------------------------------------


class DensityMatrixP:
    """Density operator over a list of parties with OrderSeries entries.

    Keys are pairs of occupation tuples (one entry per party, in ``parties`` order).
    """

    def __init__(self, entries: dict, parties: Sequence[Mode], fermionic: bool,
                 ordering: ModeOrder = CANONICAL, max_order: int = 2):
        self.parties = tuple(parties)
        self.fermionic = fermionic
        self.ordering = ordering
        self.max_order = max_order
        self.entries = {k: v.truncate(max_order) for k, v in entries.items() if _order_of(v) <= max_order}

    def element(self, x: Sequence[int], y: Sequence[int]) -> OrderSeries:
        return self.entries.get((tuple(x), tuple(y)), ZERO)

    def diag(self, x: Sequence[int]) -> OrderSeries:
        return self.element(x, x)

    def trace(self) -> OrderSeries:
        tot = ZERO
        for (x, y), v in self.entries.items():
            if x == y:
                tot = tot + v
        return tot

    def dims(self) -> tuple[int, ...]:
        d = [2 if self.fermionic else 1] * len(self.parties)
        for x, y in self.entries:
            for i, (a, b) in enumerate(zip(x, y)):
                d[i] = max(d[i], a + 1, b + 1)
        return tuple(d)

    def hermiticity_defect(self) -> float:
        worst = 0.0
        for (x, y), v in self.entries.items():
            w = self.element(y, x).conj()
            worst = max(worst, max(abs(a - b) for a, b in zip(v.coeffs, w.coeffs)))
        return worst

    def to_array(self, h: float, dims: Sequence[int] | None = None, order: int | None = None) -> np.ndarray:
        """Numeric matrix at ``h``; occupations beyond ``dims`` are dropped."""
        dims = tuple(dims) if dims is not None else self.dims()
        n = int(np.prod(dims))
        out = np.zeros((n, n), dtype=complex)
        for (x, y), v in self.entries.items():
            if any(a >= d for a, d in zip(x, dims)) or any(b >= d for b, d in zip(y, dims)):
                continue
            if order is not None:
                v = v.truncate(order)
            out[np.ravel_multi_index(x, dims), np.ravel_multi_index(y, dims)] += v(h)
        return out

    def coefficient_array(self, power: int, dims: Sequence[int] | None = None) -> np.ndarray:
        dims = tuple(dims) if dims is not None else self.dims()
        n = int(np.prod(dims))
        out = np.zeros((n, n), dtype=complex)
        for (x, y), v in self.entries.items():
            if any(a >= d for a, d in zip(x, dims)) or any(b >= d for b, d in zip(y, dims)):
                continue
            out[np.ravel_multi_index(x, dims), np.ravel_multi_index(y, dims)] += v.coeffs[power]
        return out

    def reordered(self, parties: Sequence[Mode]) -> "DensityMatrixP":
        """Relabel the tensor factors (no fermionic signs: pure bookkeeping)."""
        idx = [self.parties.index(p) for p in parties]
        ent = {(tuple(x[i] for i in idx), tuple(y[i] for i in idx)): v for (x, y), v in self.entries.items()}
        return DensityMatrixP(ent, parties, self.fermionic, self.ordering, self.max_order)

    def __repr__(self):
        return f"DensityMatrixP(parties={self.parties}, {len(self.entries)} entries)"


def _trace_sign(lab: Label, keep: set, key) -> int:
    """Sign from moving each traced occupied mode inside all kept modes that follow it."""
    s = 0
    kept_after = 0
    for m, n in reversed(lab):
        if m in keep:
            kept_after += n
        else:
            s += n * kept_after
    return -1 if s % 2 else 1


def density_from_pure(psi: FockStateP, parties: Sequence[Mode] | None = None) -> DensityMatrixP:
    parties = tuple(parties) if parties is not None else tuple(psi.modes())
    items = []
    for lab, amp in psi.terms.items():
        occ = dict(lab)
        if set(occ) - set(parties):
            raise DomainError("state populates modes outside the requested parties")
        items.append((tuple(occ.get(p, 0) for p in parties), amp))
    ent: dict = defaultdict(OrderSeries)
    mo = psi.max_order
    for x, ax in items:
        ox = _order_of(ax)
        for y, ay in items:
            if ox + _order_of(ay) <= mo:
                ent[(x, y)] = ent[(x, y)] + ax * ay.conj()
    return DensityMatrixP(ent, parties, psi.fermionic, psi.ordering, mo)


def reduce_pure(psi: FockStateP, keep: Sequence[Mode], max_order: int | None = None) -> DensityMatrixP:
    """Reduced density matrix of a pure state on ``keep`` (traced "from the inside")."""
    keep = tuple(keep)
    kset = set(keep)
    mo = psi.max_order if max_order is None else max_order
    groups: dict = defaultdict(list)
    for lab, amp in psi.terms.items():
        occ = dict(lab)
        env = tuple((m, n) for m, n in lab if m not in kset)
        sign = _trace_sign(lab, kset, psi.ordering.key) if psi.fermionic else 1
        groups[env].append((tuple(occ.get(p, 0) for p in keep), amp * sign, _order_of(amp)))
    ent: dict = defaultdict(OrderSeries)
    for members in groups.values():
        for x, ax, ox in members:
            for y, ay, oy in members:
                if ox + oy <= mo:
                    ent[(x, y)] = ent[(x, y)] + ax * ay.conj()
    return DensityMatrixP(ent, keep, psi.fermionic, psi.ordering, mo)


def partial_trace(rho: DensityMatrixP, keep: Sequence[Mode]) -> DensityMatrixP:
    keep = tuple(keep)
    if not keep or any(k not in rho.parties for k in keep):
        raise DomainError("keep must be a non-empty subset of the parties")
    kidx = [rho.parties.index(k) for k in keep]
    tidx = [i for i in range(len(rho.parties)) if i not in kidx]
    kset = set(keep)
    key = rho.ordering.key

    def lab(occ):
        return tuple(sorted(((p, n) for p, n in zip(rho.parties, occ) if n), key=lambda t: key(t[0])))

    ent: dict = defaultdict(OrderSeries)
    for (x, y), v in rho.entries.items():
        if any(x[i] != y[i] for i in tidx):
            continue
        s = 1
        if rho.fermionic:
            s = _trace_sign(lab(x), kset, key) * _trace_sign(lab(y), kset, key)
        ent[(tuple(x[i] for i in kidx), tuple(y[i] for i in kidx))] += v * s
    return DensityMatrixP(ent, keep, rho.fermionic, rho.ordering, rho.max_order)


# -- mixedness -----------------------------------------------------------------------------


def f_beta(bmap: PerturbBogoMap, m: int, excluded: Iterable[int]) -> float:
    """1/2 sum_{n not in excluded} |beta1_mn|^2 (coefficient of h^2)."""
    ex = set(excluded)
    i = bmap.index(m)
    return 0.5 * float(sum(abs(bmap.beta1[i, j]) ** 2 for j, n in enumerate(bmap.labels) if n not in ex))
