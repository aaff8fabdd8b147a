"""End-to-end pipelines: three-cavity entangled inputs, single-cavity vacuum, resonance scans."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.signal import find_peaks

from .bogoliubov import compile_trajectory
from .core import CavityConfig, DomainError, Trajectory, block_u, check_h, tau_from_u
from .entanglement import (
    canonical_state,
    fidelity,
    negativity,
    negativity_series,
    witness_A1,
    witness_A2,
    witness_A2_simplified,
    witness_A3,
    witness_A4,
)
from .fock import (
    CANONICAL,
    REVERSED,
    check_interior,
    apply_in_creator,
    f_beta,
    partial_trace,
    reduce_pure,
    transformed_vacuum,
)

REGIME_LIMIT = 0.1


class RegimeError(DomainError):
    """N*h exceeds the perturbative-regime limit and no override was given."""


@dataclass
class ScenarioResult:
    scenario: str
    statistics: str
    modes: tuple
    h: float
    n_accelerated: int
    witnesses: dict = field(default_factory=dict)
    negativities: dict = field(default_factory=dict)
    fidelities: dict = field(default_factory=dict)
    mixedness: dict = field(default_factory=dict)
    kernels: dict = field(default_factory=dict)
    reduced: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)


def _regime(traj: Trajectory, h: float, allow_large_Nh: bool) -> list[str]:
    n = max(traj.n_accelerated, 1)
    if n * h <= REGIME_LIMIT + 1e-15:
        return []
    msg = f"N*h = {n * h:.4g} exceeds {REGIME_LIMIT}: outside the perturbative regime"
    if not allow_large_Nh:
        raise RegimeError(msg)
    return [msg]


def _compile(cfg, traj, h, conjugate_phases):
    if h != 0 or traj.max_h != 0:
        check_h(h)
    if len(traj) == 0:
        raise DomainError("trajectory is empty")
    return compile_trajectory(cfg, traj, h, conjugate_phases=conjugate_phases)


def _negs(rho4, pairs: dict, h: float) -> dict:
    out = {}
    for name, (keep, side) in pairs.items():
        r = partial_trace(rho4, keep)
        out[name] = {"numeric": negativity(r, side, h), "series": negativity_series(r, side)}
    return out


def run_scenario_A(cfg: CavityConfig, traj: Trajectory, h: float, modes: Sequence[int], sign: int = +1,
                   allow_large_Nh: bool = False, conjugate_phases: bool = False,
                   reversed_ordering: bool = False) -> ScenarioResult:
    """Rob's cavity moves; Alice (A) and Charlie (C) stay inertial.

    Input: (|0> + s|1_A>|1_k>)(|0> + s|1_k'>|1_C>)/2, with k a particle and k' an
    antiparticle mode for the Dirac field.
    """
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    k, kp = modes
    if k == kp:
        raise DomainError("modes must be distinct")
    if cfg.is_fermionic and not (k >= 0 > kp):
        raise DomainError("Dirac scenario needs kappa >= 0 and kappa' < 0")
    warnings = _regime(traj, h, allow_large_Nh)
    bmap = _compile(cfg, traj, h, conjugate_phases)
    check_interior(bmap, k, kp)
    ordering = REVERSED if reversed_ordering else CANONICAL

    vac = transformed_vacuum(bmap, order=1, ordering=ordering)
    t_ak = apply_in_creator(bmap, k, vac).create("A")
    t_kc = apply_in_creator(bmap, kp, vac.create("C"))
    t_all = apply_in_creator(bmap, k, apply_in_creator(bmap, kp, vac.create("C"))).create("A")
    psi = (vac + t_ak.scale(sign) + t_kc.scale(sign) + t_all).scale(0.5)
    # the first-order state has norm 1 + O(h^2); normalise so that traces and fidelities stay <= 1
    psi = psi.truncate(2)
    psi = psi.scale(psi.norm2().sqrt().reciprocal())

    parties = ("A", k, kp, "C")
    rho4 = reduce_pure(psi, parties, max_order=2)
    res = ScenarioResult("A", "fermion" if cfg.is_fermionic else "boson", (k, kp), h,
                         traj.n_accelerated, warnings=warnings)
    res.reduced["rho_AkkC"] = rho4
    res.kernels["G_k"] = bmap.g(k)
    res.kernels["G_kp"] = bmap.g(kp)
    if cfg.is_fermionic:
        a = bmap.entry("A1", k, kp)
        res.kernels["A1_kkp"] = a
        res.witnesses["A2"] = witness_A2(rho4)
        res.witnesses["A2_simplified"] = witness_A2_simplified(rho4)
        res.negativities = _negs(rho4, {
            "kk'": ((k, kp), (kp,)),
            "Ak": (("A", k), (k,)),
            "AC": (("A", "C"), ("C",)),
        }, h)
        dicke = canonical_state("dicke4", bmap, (k, kp), sign, ordering)
        res.fidelities["dicke"] = fidelity(rho4, dicke)
    else:
        res.kernels["beta1_kkp"] = bmap.entry("beta1", k, kp)
        res.witnesses["A1"] = witness_A1(rho4)
        res.negativities = _negs(rho4, {
            "kk'": ((k, kp), (kp,)),
            "Ak": (("A", k), (k,)),
            "AC": (("A", "C"), ("C",)),
        }, h)
    return res


def run_scenario_B(cfg: CavityConfig, traj: Trajectory, h: float, modes: Sequence[int],
                   allow_large_Nh: bool = False, conjugate_phases: bool = False,
                   reversed_ordering: bool = False) -> ScenarioResult:
    """Single cavity starting in the vacuum; three modes kept after the motion."""
    k, kp, kpp = modes
    if len({k, kp, kpp}) != 3:
        raise DomainError("modes must be distinct")
    if cfg.is_fermionic:
        if not (k >= 0 and kp >= 0 and kpp < 0):
            raise DomainError("Dirac scenario needs kappa, kappa' >= 0 and kappa'' < 0")
        if (k + kp) % 2 or (k + kpp) % 2 == 0 or (kp + kpp) % 2 == 0:
            raise DomainError("need (kappa + kappa') even, (kappa + kappa'') and (kappa' + kappa'') odd")
    elif (k - kp) % 2 == 0 or (kp - kpp) % 2 == 0:
        raise DomainError("need (k - k') and (k' - k'') odd")
    warnings = _regime(traj, h, allow_large_Nh)
    bmap = _compile(cfg, traj, h, conjugate_phases)
    check_interior(bmap, k, kp, kpp)
    ordering = REVERSED if reversed_ordering else CANONICAL

    vac = transformed_vacuum(bmap, order=2, ordering=ordering)
    rho3 = reduce_pure(vac, (k, kp, kpp), max_order=2)
    res = ScenarioResult("B", "fermion" if cfg.is_fermionic else "boson", (k, kp, kpp), h,
                         traj.n_accelerated, warnings=warnings)
    res.reduced["rho_kkk"] = rho3
    if cfg.is_fermionic:
        res.kernels["A1_k_kpp"] = bmap.entry("A1", k, kpp)
        res.kernels["A1_kp_kpp"] = bmap.entry("A1", kp, kpp)
        res.witnesses["A4"] = witness_A4(rho3, order=1)
        res.fidelities["w"] = fidelity(rho3, canonical_state("w3", bmap, (k, kp, kpp), ordering=ordering))
    else:
        res.kernels["beta1_kkp"] = bmap.entry("beta1", k, kp)
        res.kernels["beta1_kpkpp"] = bmap.entry("beta1", kp, kpp)
        res.kernels["beta1_kkpp"] = bmap.entry("beta1", k, kpp)
        res.witnesses["A3"] = witness_A3(rho3, order=2)
        res.mixedness["f_k_not_kp"] = f_beta(bmap, k, (kp,))
        res.mixedness["f_kp_not_k_kpp"] = f_beta(bmap, kp, (k, kpp))
        res.mixedness["f_kpp_not_kp"] = f_beta(bmap, kpp, (kp,))
        res.mixedness["pop_k"] = rho3.diag((1, 0, 0)).c2.real
        res.mixedness["pop_kp"] = rho3.diag((0, 1, 0)).c2.real
        res.mixedness["pop_kpp"] = rho3.diag((0, 0, 1)).c2.real
    return res


# -- resonance scan ---------------------------------------------------------------------


@dataclass
class ScanResult:
    u: np.ndarray
    values: dict
    predicted: dict
    N: int
    h: float

    def peaks(self, pair, rel_height: float = 0.5) -> np.ndarray:
        """Abscissae of local maxima higher than ``rel_height`` times the curve maximum."""
        y = self.values[pair]
        # pad so that a maximum on the last grid point is still found
        idx, _ = find_peaks(np.concatenate([[0.0], y, [0.0]]), height=rel_height * float(np.max(y)))
        return self.u[idx - 1]


def predicted_resonances(m: int, n: int, u_max: float) -> list[float]:
    s = abs(m) + abs(n)
    return [j / s for j in range(1, int(math.floor(u_max * s + 1e-12)) + 1)]


def _kernel_name(cfg):
    return "A1" if cfg.is_fermionic else "beta1"


def resonance_scan(cfg: CavityConfig, h: float, N: int, pairs: Sequence[tuple[int, int]],
                   u_range: tuple[float, float] = (0.0, 1.2), u_steps: int = 600,
                   allow_large_Nh: bool = False, workers: int | None = None) -> ScanResult:
    """|first-order kernel| per unit h after N blocks, on a grid in the rescaled time u.

    Grid points are u_lo + (u_hi - u_lo) * i / u_steps for i = 1..u_steps.
    """
    if N < 1 or u_steps < 1:
        raise DomainError("need N >= 1 and at least one grid point")
    lo, hi = u_range
    if not (0 <= lo < hi):
        raise DomainError("u_range must satisfy 0 <= lo < hi")
    check_h(h)
    if N * h > REGIME_LIMIT + 1e-15 and not allow_large_Nh:
        raise RegimeError(f"N*h = {N * h:.4g} exceeds {REGIME_LIMIT}")
    grid = lo + (hi - lo) * np.arange(1, u_steps + 1) / u_steps
    name = _kernel_name(cfg)

    def point(u):
        tau = tau_from_u(h, float(u), cfg.delta)
        bmap = compile_trajectory(cfg, Trajectory.blocks(h, tau, N), h)
        return [abs(bmap.entry(name, m, n)) for m, n in pairs]

    with ThreadPoolExecutor(max_workers=workers) as ex:
        rows = list(ex.map(point, grid))
    arr = np.array(rows, dtype=float).reshape(len(grid), len(pairs))
    values = {tuple(p): arr[:, i] for i, p in enumerate(pairs)}
    predicted = {tuple(p): predicted_resonances(p[0], p[1], hi) for p in pairs}
    return ScanResult(grid, values, predicted, N, h)


def block_kernel(cfg: CavityConfig, h: float, tau: float, N: int, m: int, n: int) -> complex:
    """First-order kernel entry (m, n) after N blocks of duration tau."""
    bmap = compile_trajectory(cfg, Trajectory.blocks(h, tau, N), h)
    return bmap.entry(_kernel_name(cfg), m, n)


__all__ = [
    "RegimeError", "ScenarioResult", "ScanResult", "run_scenario_A", "run_scenario_B",
    "resonance_scan", "predicted_resonances", "block_kernel", "block_u",
]
