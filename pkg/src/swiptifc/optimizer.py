"""Two-level optimization of one rate-energy boundary point.

Outer level: steepest-descent power control of the rank-one energy
transmitters (powers only shrink from the full budget, so they converge
monotonically). Inner level: covariance optimization of the information
transmitters under a delivered-energy floor, solved in the dual via priced
waterfilling. The default dual solver finds the scalar energy price by
bisection with exact per-transmitter power prices; a plain projected
subgradient loop is available behind ``dual_method="subgradient"``.

Two inner variants exist: ``"UP"`` ignores interference between information
transmitters (their problem decouples and the solve is exact), ``"P1"``
keeps it and iterates Gauss-Seidel waterfilling to a fixed point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .beams import BeamPlan, BeamStatistics, beam_statistics, directions_for_scheme
from .channel import ChannelSet, EffectiveChannels, achievable_rate, harvested_energy
from .config import SystemConfig
from .linalg import hermitian_part, inv_sqrt_psd


class InfeasibleTargetError(ValueError):
    """Required energy exceeds what the current scheme can deliver."""


@dataclass(frozen=True)
class Strategy:
    """Complete transmit state: energy beams plus decoder covariances."""

    beams: BeamPlan
    info_covariances: dict

    def covariances(self) -> dict:
        out = self.beams.covariances()
        out.update(self.info_covariances)
        return out


@dataclass
class DualState:
    energy_price: float       # multiplier of the delivered-energy floor
    power_prices: dict        # per information transmitter


@dataclass
class InnerResult:
    covariances: dict
    duals: DualState
    info_delivered: float     # physical energy the decoders hand the harvesters
    e_req: float              # physical requirement the solve enforced
    e_sup: float              # largest physically deliverable info-side energy
    objective: float          # variant objective in nats
    converged: bool
    iterations: int
    at_capacity: bool = False

    def kkt_residuals(self, p_max: float) -> dict:
        scale = max(self.e_sup, self.e_req, 1e-30)
        power_feas = 0.0
        power_slack = 0.0
        for j, q in self.covariances.items():
            tr = float(np.trace(q).real)
            power_feas = max(power_feas, (tr - p_max) / p_max)
            power_slack = max(power_slack,
                              abs(self.duals.power_prices.get(j, 0.0) * (p_max - tr)))
        energy_feas = max(self.e_req - self.info_delivered, 0.0) / scale
        if self.at_capacity or self.duals.energy_price == 0.0:
            energy_slack = 0.0
        else:
            energy_slack = abs(self.duals.energy_price
                               * (self.info_delivered - self.e_req))
        return {
            "power_feasibility": max(power_feas, 0.0),
            "energy_feasibility": energy_feas,
            "power_slack": power_slack,
            "energy_slack": energy_slack,
        }


@dataclass
class REPoint:
    """One boundary sample of the rate-energy frontier."""

    e_bar: float              # required delivered energy (watts)
    rate: float               # achieved sum rate, nats per channel use
    energy: float             # delivered energy at the solution (watts)
    powers: np.ndarray        # per energy transmitter, ascending index
    outer_iterations: int
    converged: bool
    power_history: np.ndarray = field(default=None, repr=False)


# -- waterfilling primitives ---------------------------------------------------


def waterfill_budget(gains, budget: float):
    """Classic waterfilling: allocate ``budget`` over parallel channels.

    Returns ``(alloc, level)`` with ``alloc[j] = max(level - 1/gains[j], 0)``
    summing to the budget. Zero-gain channels get nothing.
    """
    g = np.asarray(gains, dtype=float)
    alloc = np.zeros_like(g)
    pos = g > 0
    if budget <= 0 or not pos.any():
        return alloc, 0.0
    inv = 1.0 / g[pos]
    inv_sorted = np.sort(inv)
    csum = np.cumsum(inv_sorted)
    counts = np.arange(1, inv_sorted.size + 1)
    levels = (budget + csum) / counts
    usable = np.nonzero(levels > inv_sorted)[0]
    n_star = int(usable.max()) + 1
    level = float(levels[n_star - 1])
    alloc[pos] = np.maximum(level - inv, 0.0)
    return alloc, level


def _priced_solution(hii, r_inv_sqrt, b_evals, b_evecs, lam, mu):
    """Covariance maximizing rate minus the priced power/energy penalty.

    The penalty matrix is ``mu*I - lam*B`` (B = energy-coupling Gram matrix);
    its inverse square root whitens the direct link, waterfilling against a
    unit floor gives the allocation, and the covariance is mapped back.
    """
    d = mu - lam * b_evals
    d = np.maximum(d, 1e-300)
    a_inv_sqrt = (b_evecs * (d**-0.5)) @ b_evecs.conj().T
    g = r_inv_sqrt @ hii @ a_inv_sqrt
    _, s, vh = np.linalg.svd(g)
    p = np.where(s > 1.0, 1.0 - 1.0 / np.maximum(s, 1e-150) ** 2, 0.0)
    w = a_inv_sqrt @ vh.conj().T
    q = hermitian_part((w * p) @ w.conj().T)
    objective = float(2.0 * np.sum(np.log(s[s > 1.0])))
    return q, objective


def _solve_id_given_price(hii, r_inv_sqrt, b_evals, b_evecs, lam, p_max, pd_floor,
                          hint=None):
    """Optimal single-decoder covariance for a fixed energy price ``lam``.

    The power price is found exactly: closed-form waterfilling when the
    energy price is zero, monotone root-finding on the transmit power
    otherwise (bracketed near ``hint`` when one is supplied). Returns
    ``(q, mu, rate_nats)``.
    """
    if lam == 0.0:
        g0 = r_inv_sqrt @ hii
        _, s, vh = np.linalg.svd(g0)
        gains = s**2
        alloc, level = waterfill_budget(gains, p_max)
        v = vh.conj().T
        q = hermitian_part((v * alloc) @ v.conj().T)
        mu = 1.0 / level if level > 0 else 0.0
        rate = float(np.sum(np.log1p(gains * alloc)))
        return q, mu, rate

    b_max = float(b_evals[-1])
    floor = max(pd_floor, 64.0 * np.finfo(float).eps * lam * b_max)
    mu_lo = lam * b_max + floor

    def excess(mu):
        q, _ = _priced_solution(hii, r_inv_sqrt, b_evals, b_evecs, lam, mu)
        return float(np.trace(q).real) - p_max

    if excess(mu_lo) <= 0.0:
        mu = mu_lo  # power constraint slack; price pinned at the definiteness floor
    else:
        lo, hi = mu_lo, None
        if hint is not None and hint > mu_lo:
            if excess(hint) > 0.0:
                lo = hint
            else:
                hi = hint
        if hi is None:
            hi = max(2.0 * lo, lam * b_max + 1.0, 1.0)
            for _ in range(300):
                if excess(hi) <= 0.0:
                    break
                lo = hi
                hi *= 4.0
        mu = brentq(excess, lo, hi, xtol=1e-15 * max(1.0, hi),
                    rtol=1e-15, maxiter=256)
    q, objective = _priced_solution(hii, r_inv_sqrt, b_evals, b_evecs, lam, mu)
    return q, mu, objective


# -- inner solve ----------------------------------------------------------------


def _energy_floor_requirement(stats: BeamStatistics, powers, e_bar: float,
                              zeta: float) -> float:
    beam_energy = sum(stats.energy_gains[k] * powers[k] for k in stats.energy_gains)
    return max(e_bar / zeta - beam_energy, 0.0)


def inner_solve(channels: ChannelSet, effective: EffectiveChannels,
                stats: BeamStatistics, powers, e_bar: float, variant: str,
                cfg: SystemConfig, warm=None, price_zero_only: bool = False,
                price_hint: float | None = None) -> InnerResult:
    """Optimize the information-transmitter covariances at fixed beam powers.

    Enforces ``delivered info-side energy >= max(e_bar/zeta - beam energy, 0)``
    together with per-transmitter power budgets. ``variant="UP"`` drops
    decoder-to-decoder interference (exact convex solve); ``variant="P1"``
    keeps it and Gauss-Seidel-iterates per-decoder waterfilling to a fixed
    point at each price.

    ``price_zero_only`` evaluates just the unconstrained (zero energy price)
    solution; the result is the true optimum iff it already meets the floor,
    which the ``converged`` flag then reports.
    """
    ids = effective.id_set
    eh = effective.eh_set
    m = channels.m
    noise = cfg.noise_power
    p_max = cfg.p_max
    e_req = _energy_floor_requirement(stats, powers, e_bar, cfg.zeta)

    bmats = {}
    b_eigs = {}
    e_sup = 0.0
    for j in ids:
        hb = effective.h12_blocks[j]
        bm = hermitian_part(hb.conj().T @ hb)
        w, u = np.linalg.eigh(bm)
        w = np.maximum(w, 0.0)
        bmats[j] = bm
        b_eigs[j] = (w, u)
        e_sup += p_max * float(w[-1])

    eye = np.eye(m, dtype=np.complex128)
    base_r = {}
    for i in ids:
        r = noise * eye.copy()
        for k in eh:
            r = r + powers[k] * stats.leak_shapes[(i, k)]
        base_r[i] = hermitian_part(r)

    def delivered_of(covs) -> float:
        return float(sum(np.einsum("ij,ji->", bmats[j], covs[j]).real for j in ids))

    def objective_of(covs) -> float:
        total = 0.0
        for i in ids:
            r = base_r[i]
            if variant == "P1":
                for j in ids:
                    if j != i:
                        hij = channels.h[i, j]
                        r = r + hij @ covs[j] @ hij.conj().T
            hii = channels.h[i, i]
            inner = eye + hii.conj().T @ np.linalg.solve(hermitian_part(r), hii) @ covs[i]
            total += float(np.linalg.slogdet(inner)[1])
        return total

    # required energy at (or beyond) the deliverable supremum: the maximizer
    # is the full-power beam on each cross link's dominant direction
    if e_req >= e_sup * (1.0 - 1e-10):
        slack = cfg.feas_tol_rel * max(e_sup, e_bar, 1e-30)
        if e_req > e_sup + slack:
            raise InfeasibleTargetError(
                f"required info-side energy {e_req:.6e} exceeds deliverable {e_sup:.6e}"
            )
        covs = {}
        for j in ids:
            _, u = b_eigs[j]
            top = u[:, -1]
            covs[j] = p_max * np.outer(top, top.conj())
        duals = DualState(energy_price=math.inf, power_prices={j: 0.0 for j in ids})
        return InnerResult(covariances=covs, duals=duals,
                           info_delivered=delivered_of(covs), e_req=e_req,
                           e_sup=e_sup, objective=objective_of(covs),
                           converged=True, iterations=0, at_capacity=True)

    r_inv_sqrt_up = {i: inv_sqrt_psd(base_r[i]) for i in ids} if variant == "UP" else None

    gs_converged = True
    mu_hints = {i: None for i in ids}

    def eval_price(lam, q_warm):
        nonlocal gs_converged
        covs = {}
        mus = {}
        if variant == "UP":
            for i in ids:
                q, mu, _ = _solve_id_given_price(
                    channels.h[i, i], r_inv_sqrt_up[i], *b_eigs[i], lam, p_max,
                    cfg.pd_floor, mu_hints[i] if lam > 0 else None)
                covs[i] = q
                mus[i] = mu
                mu_hints[i] = mu
        else:
            covs = {i: (q_warm[i].copy() if q_warm else np.zeros((m, m), complex))
                    for i in ids}
            mus = {i: 0.0 for i in ids}
            for _ in range(cfg.gs_sweep_max):
                shift = 0.0
                for i in ids:
                    r = base_r[i]
                    for j in ids:
                        if j != i:
                            hij = channels.h[i, j]
                            r = r + hij @ covs[j] @ hij.conj().T
                    ris = inv_sqrt_psd(hermitian_part(r))
                    q, mu, _ = _solve_id_given_price(
                        channels.h[i, i], ris, *b_eigs[i], lam, p_max,
                        cfg.pd_floor, mu_hints[i] if lam > 0 else None)
                    shift = max(shift, float(np.linalg.norm(q - covs[i])))
                    covs[i] = q
                    mus[i] = mu
                    mu_hints[i] = mu
                if shift <= cfg.gs_tol * p_max:
                    break
            else:
                gs_converged = False
        return covs, mus, delivered_of(covs)

    tol_e = cfg.energy_tol_rel * max(e_sup, e_req, 1e-30)

    if cfg.dual_method == "subgradient":
        return _subgradient_solve(channels, ids, b_eigs, bmats, base_r, e_req,
                                  e_sup, variant, cfg, objective_of, delivered_of,
                                  warm)

    iterations = 1
    covs, mus, delivered = eval_price(0.0, warm)
    if delivered >= e_req or price_zero_only:
        duals = DualState(0.0, mus)
        return InnerResult(covs, duals, delivered, e_req, e_sup,
                           objective_of(covs),
                           gs_converged and delivered >= e_req, iterations)

    # delivered energy grows with the price: find the smallest price meeting
    # the floor, always returning a solution from the feasible side
    sol_feas = None      # (covs, mus, delivered, lam): feasible, least delivery
    lam_infeas = 0.0     # largest price seen short of the floor
    last = (covs, mus, delivered, 0.0)

    def floor_gap(lam):
        nonlocal iterations, sol_feas, lam_infeas, last
        iterations += 1
        c, mu, d = eval_price(lam, last[0])
        last = (c, mu, d, lam)
        if d >= e_req:
            if sol_feas is None or d < sol_feas[2]:
                sol_feas = last
        else:
            lam_infeas = max(lam_infeas, lam)
        return d - e_req

    lo = 0.0
    hi = price_hint if (price_hint is not None and math.isfinite(price_hint)
                        and price_hint > 0.0) else 1.0
    gap_hi = floor_gap(hi)
    expansions = 0
    while gap_hi < 0.0 and expansions < 240 and iterations < cfg.dual_iter_max:
        lo = hi
        hi *= 4.0
        gap_hi = floor_gap(hi)
        expansions += 1
    if sol_feas is None:
        c, mu, d, lam = last
        return InnerResult(c, DualState(lam, mu), d, e_req, e_sup,
                           objective_of(c), False, iterations)
    if gap_hi != 0.0 and iterations < cfg.dual_iter_max:
        try:
            brentq(floor_gap, lo, hi, xtol=1e-30, rtol=1e-12,
                   maxiter=max(cfg.dual_iter_max - iterations, 2))
        except ValueError:
            # fixed-point warm starts make the delivered energy only
            # approximately monotone in the price for the Gauss-Seidel
            # variant; fall through to the bisection polish below
            pass
    # tighten the feasible-side solution down to the energy tolerance
    while (sol_feas[2] - e_req > tol_e
           and sol_feas[3] - lam_infeas > 1e-14 * sol_feas[3]
           and iterations < cfg.dual_iter_max):
        floor_gap(0.5 * (lam_infeas + sol_feas[3]))
    covs, mus, delivered, lam = sol_feas
    duals = DualState(lam, mus)
    return InnerResult(covs, duals, delivered, e_req, e_sup, objective_of(covs),
                       gs_converged, iterations)


def _subgradient_solve(channels, ids, b_eigs, bmats, base_r, e_req, e_sup,
                       variant, cfg, objective_of, delivered_of, warm):
    """Projected subgradient on the dual prices with a 1/sqrt(t) schedule.

    Prices are normalized (energy price by the deliverable scale, power
    prices by the budget) so a unit step coefficient is meaningful across
    scenarios. Returns the best feasible iterate when the cap is reached.
    """
    p_max = cfg.p_max
    m = channels.m
    e_scale = max(e_sup, e_req, 1e-30)
    r_is = {i: inv_sqrt_psd(base_r[i]) for i in ids}

    def primal(lam, mus):
        covs = {}
        if variant == "P1":
            covs_cur = {i: np.zeros((m, m), complex) for i in ids}
            for _ in range(cfg.gs_sweep_max):
                shift = 0.0
                for i in ids:
                    r = base_r[i]
                    for j in ids:
                        if j != i:
                            hij = channels.h[i, j]
                            r = r + hij @ covs_cur[j] @ hij.conj().T
                    ris = inv_sqrt_psd(hermitian_part(r))
                    q, _ = _priced_solution(channels.h[i, i], ris, *b_eigs[i],
                                            lam, mus[i])
                    shift = max(shift, float(np.linalg.norm(q - covs_cur[i])))
                    covs_cur[i] = q
                if shift <= cfg.gs_tol * p_max:
                    break
            covs = covs_cur
        else:
            for i in ids:
                covs[i], _ = _priced_solution(channels.h[i, i], r_is[i],
                                              *b_eigs[i], lam, mus[i])
        return covs

    lam_hat = 0.0
    mus_hat = {}
    for i in ids:
        q0, mu0, _ = _solve_id_given_price(channels.h[i, i], r_is[i], *b_eigs[i],
                                           0.0, p_max, cfg.pd_floor)
        mus_hat[i] = mu0 * p_max
    best = None
    fallback = None
    for t in range(1, cfg.dual_iter_max + 1):
        lam = lam_hat / e_scale
        mus = {}
        for i in ids:
            b_max = float(b_eigs[i][0][-1])
            floor = lam * b_max + cfg.pd_floor
            mus[i] = max(mus_hat[i] / p_max, floor)
        covs = primal(lam, mus)
        delivered = delivered_of(covs)
        traces = {i: float(np.trace(covs[i]).real) for i in ids}
        r_lam = (delivered - e_req) / e_scale
        r_mu = {i: (p_max - traces[i]) / p_max for i in ids}
        feas_viol = max(max(-r_lam, 0.0), max(max(-r_mu[i], 0.0) for i in ids))
        slack = max(abs(lam_hat * r_lam),
                    max(abs(mus[i] * p_max * r_mu[i]) for i in ids))
        if fallback is None or feas_viol < fallback[4]:
            fallback = (covs, DualState(lam, mus), delivered, t, feas_viol)
        if feas_viol <= cfg.kkt_tol:
            obj = objective_of(covs)
            if best is None or obj > best[4]:
                best = (covs, DualState(lam, mus), delivered, t, obj)
            if slack <= cfg.kkt_tol:
                return InnerResult(covs, DualState(lam, mus), delivered, e_req,
                                   e_sup, obj, True, t)
        step = 1.0 / math.sqrt(t)
        lam_hat = max(lam_hat - step * r_lam, 0.0)
        for i in ids:
            mus_hat[i] = max(mus_hat[i] - step * r_mu[i], 0.0)
    if best is not None:
        covs, duals, delivered, t, obj = best
        return InnerResult(covs, duals, delivered, e_req, e_sup, obj, False, t)
    covs, duals, delivered, t, _ = fallback
    return InnerResult(covs, duals, delivered, e_req, e_sup, objective_of(covs),
                       False, t)


# -- outer machinery -------------------------------------------------------------


def variant_interference(channels: ChannelSet, strategy: Strategy, receiver: int,
                         variant: str, noise_power: float) -> np.ndarray:
    """Interference covariance the chosen variant optimizes against."""
    r = noise_power * np.eye(channels.m, dtype=np.complex128)
    for k, v in strategy.beams.directions.items():
        hv = channels.h[receiver, k] @ v
        r = r + strategy.beams.powers[k] * np.outer(hv, hv.conj())
    if variant == "P1":
        for j, q in strategy.info_covariances.items():
            if j != receiver:
                hij = channels.h[receiver, j]
                r = r + hij @ q @ hij.conj().T
    return hermitian_part(r)


def rate_objective(channels: ChannelSet, strategy: Strategy, variant: str,
                   noise_power: float) -> float:
    """Sum decode rate (nats) against the variant's interference model."""
    total = 0.0
    eye = np.eye(channels.m, dtype=np.complex128)
    for i, q in strategy.info_covariances.items():
        r = variant_interference(channels, strategy, i, variant, noise_power)
        hii = channels.h[i, i]
        inner = eye + hii.conj().T @ np.linalg.solve(r, hii) @ q
        total += float(np.linalg.slogdet(inner)[1])
    return total


def power_gradient(channels: ChannelSet, strategy: Strategy, variant: str,
                   noise_power: float) -> np.ndarray:
    """Gradient of the sum rate with respect to the energy-beam powers.

    Component ``k`` sums, over decoders, the trace of the difference between
    the full and interference-only precision matrices against transmitter
    ``k``'s unit-power interference shape. Every component is non-positive;
    tiny positive round-off is clipped to zero.
    """
    eh = sorted(strategy.beams.directions)
    grad = np.zeros(len(eh))
    eye = np.eye(channels.m, dtype=np.complex128)
    for i, q in strategy.info_covariances.items():
        r = variant_interference(channels, strategy, i, variant, noise_power)
        hii = channels.h[i, i]
        full = hermitian_part(hii @ q @ hii.conj().T + r)
        inv_full = np.linalg.solve(full, eye)
        inv_r = np.linalg.solve(r, eye)
        diff = inv_full - inv_r
        for idx, k in enumerate(eh):
            hv = channels.h[i, k] @ strategy.beams.directions[k]
            grad[idx] += float((hv.conj() @ diff @ hv).real)
    tol = 1e-9 * max(1.0, float(np.abs(grad).max()))
    assert (grad <= tol).all(), f"rate gradient has a positive component: {grad}"
    return np.minimum(grad, 0.0)


def max_step(stats: BeamStatistics, effective: EffectiveChannels,
             strategy: Strategy, e_bar: float, gradient: np.ndarray,
             zeta: float = 1.0) -> float:
    """Largest power-descent step that keeps the energy floor satisfied.

    Stepping exactly this far makes the beams' delivered energy close the gap
    left by the decoders (when no power clamps at zero). Returns 0 when no
    descent is possible.
    """
    eh = sorted(strategy.beams.directions)
    omega = np.array([stats.energy_gains[k] for k in eh])
    p_vec = np.array([strategy.beams.powers[k] for k in eh])
    info_del = 0.0
    for j, q in strategy.info_covariances.items():
        hb = effective.h12_blocks[j]
        info_del += float(np.trace(hb @ q @ hb.conj().T).real)
    denom = float(omega @ gradient)
    if denom >= 0.0:
        return 0.0
    num = e_bar / zeta - info_del - float(omega @ p_vec)
    return max(num / denom, 0.0)


def e_max(stats: BeamStatistics, effective: EffectiveChannels, p_max: float,
          zeta: float = 1.0) -> float:
    """Largest deliverable energy: full-power beams plus cross-link steering."""
    total = sum(stats.energy_gains.values())
    for j in effective.id_set:
        total += float(np.linalg.norm(effective.h12_blocks[j], 2)) ** 2
    return zeta * p_max * total


def scheme_energy_capacity(channels: ChannelSet, effective: EffectiveChannels,
                           scheme: str, cfg: SystemConfig) -> float:
    """Deliverable-energy ceiling of a scheme at its baseline directions.

    Fixed-direction schemes evaluate directly. The ratio-maximizing scheme's
    directions depend on the target itself; its sweep is anchored at the
    shortfall-free (zero-target) directions. Larger targets remain feasible
    up to this ceiling because the shortfall regularizer only rotates beams
    toward higher delivery.
    """
    dirs = directions_for_scheme(scheme, effective, 0.0, cfg.p_max,
                                 cfg.tilt_decay, 0)
    stats = beam_statistics(effective, channels, dirs)
    return e_max(stats, effective, cfg.p_max, cfg.zeta)


def max_energy_strategy(effective: EffectiveChannels, directions: dict,
                        p_max: float) -> Strategy:
    """Full-power strategy steering every decoder onto its cross link."""
    covs = {}
    for j in effective.id_set:
        hb = effective.h12_blocks[j]
        _, _, vh = np.linalg.svd(hb)
        top = vh.conj().T[:, 0]
        covs[j] = p_max * np.outer(top, top.conj())
    beams = BeamPlan(directions=dict(directions),
                     powers={k: p_max for k in directions}, scheme="max-energy")
    return Strategy(beams=beams, info_covariances=covs)


def boundary_point(channels: ChannelSet, effective: EffectiveChannels,
                   scheme: str, e_bar: float, variant: str,
                   cfg: SystemConfig) -> REPoint:
    """Compute one boundary point of the achievable rate-energy region.

    Power descent from the full budget: solve the inner problem, and while
    the delivered energy exceeds the target, step the beam powers along the
    (non-positive) rate gradient by at most the step that restores equality,
    clamping at zero. If the decoders alone already satisfy the target at
    their unconstrained optimum, the energy transmitters stay silent.
    """
    p_max = cfg.p_max
    zeta = cfg.zeta
    eh = effective.eh_set
    e_phys = e_bar / zeta

    tilt_exponent = 0
    ref_energy = e_phys
    directions = directions_for_scheme(scheme, effective, ref_energy, p_max,
                                       cfg.tilt_decay, tilt_exponent)
    stats = beam_statistics(effective, channels, directions)
    cap = e_max(stats, effective, p_max, zeta)
    if e_bar > cap * (1.0 + cfg.feas_tol_rel) + 1e-30:
        # target-tuned directions can be locally unable to deliver the target
        # even though the scheme's self-consistent capacity covers it; fall
        # back to the capacity point's directions in that case
        scheme_cap = scheme_energy_capacity(channels, effective, scheme, cfg)
        if e_bar > scheme_cap * (1.0 + cfg.feas_tol_rel) + 1e-30:
            raise InfeasibleTargetError(
                f"target {e_bar:.6e} W exceeds the scheme capacity "
                f"{scheme_cap:.6e} W"
            )
        ref_energy = scheme_cap / zeta
        directions = directions_for_scheme(scheme, effective, ref_energy, p_max,
                                           cfg.tilt_decay, tilt_exponent)
        stats = beam_statistics(effective, channels, directions)

    def finish(powers, inner, iterations, converged, history):
        beams = BeamPlan(directions=directions, powers=dict(powers), scheme=scheme)
        strategy = Strategy(beams=beams, info_covariances=inner.covariances)
        noise_term = cfg.noise_power if cfg.include_noise_energy else None
        rate = sum(achievable_rate(channels, strategy, i, cfg.noise_power)
                   for i in effective.id_set)
        energy = sum(harvested_energy(channels, strategy, i, zeta, noise_term)
                     for i in eh)
        return REPoint(e_bar=e_bar, rate=rate, energy=energy,
                       powers=np.array([powers[k] for k in eh]),
                       outer_iterations=iterations,
                       converged=converged and inner.converged,
                       power_history=np.array(history))

    # silent-beam case: decoders alone meet the target at their unconstrained
    # optimum, so any beam power would only add interference
    info_sup = zeta * p_max * sum(
        float(np.linalg.norm(effective.h12_blocks[j], 2)) ** 2
        for j in effective.id_set)
    if e_bar < info_sup * (1.0 - 1e-10):
        zero_powers = {k: 0.0 for k in eh}
        inner0 = inner_solve(channels, effective, stats, zero_powers, e_bar,
                             variant, cfg, price_zero_only=True)
        if inner0.converged:
            return finish(zero_powers, inner0, 0, True, [np.zeros(len(eh))])

    powers = {k: p_max for k in eh}
    history = [np.array([powers[k] for k in eh])]
    surplus_tol = 1e-12 * max(e_bar, cap)
    tilt_active = scheme == "SLER_TILT"
    converged = False
    iterations = 0
    warm = None
    inner = None
    solved_powers = None
    price_hint = None
    for n in range(cfg.outer_iter_max):
        iterations = n + 1
        inner = inner_solve(channels, effective, stats, powers, e_bar, variant,
                            cfg, warm, price_hint=price_hint)
        warm = inner.covariances
        if math.isfinite(inner.duals.energy_price) and inner.duals.energy_price > 0:
            price_hint = inner.duals.energy_price
        solved_powers = dict(powers)
        beam_energy = sum(stats.energy_gains[k] * powers[k] for k in eh)
        delivered = zeta * (beam_energy + inner.info_delivered)
        if delivered - e_bar <= surplus_tol:
            converged = True
            break

        if tilt_active:
            cand_dirs = directions_for_scheme(scheme, effective, ref_energy, p_max,
                                              cfg.tilt_decay, tilt_exponent + 1)
            cand_stats = beam_statistics(effective, channels, cand_dirs)
            cand_beam_energy = sum(cand_stats.energy_gains[k] * powers[k]
                                   for k in eh)
            if zeta * (cand_beam_energy + inner.info_delivered) >= e_bar:
                tilt_exponent += 1
                directions = cand_dirs
                stats = cand_stats
                solved_powers = None  # beam statistics changed; re-solve
            else:
                tilt_active = False

        beams = BeamPlan(directions=directions, powers=dict(powers), scheme=scheme)
        strategy = Strategy(beams=beams, info_covariances=inner.covariances)
        grad = power_gradient(channels, strategy, variant, cfg.noise_power)
        delta = cfg.step_fraction * max_step(stats, effective, strategy, e_bar,
                                             grad, zeta)
        if delta == 0.0:
            converged = True
            break
        new_powers = {k: max(powers[k] + delta * grad[idx], 0.0)
                      for idx, k in enumerate(sorted(eh))}
        for k in eh:
            assert new_powers[k] <= powers[k], "beam power increased"
        change = max(abs(new_powers[k] - powers[k]) for k in eh)
        powers = new_powers
        history.append(np.array([powers[k] for k in eh]))
        if change <= cfg.outer_tol * p_max:
            converged = True
            break

    if solved_powers != powers or inner is None:
        inner = inner_solve(channels, effective, stats, powers, e_bar, variant,
                            cfg, warm, price_hint=price_hint)
    return finish(powers, inner, iterations, converged, history)


# -- time sharing -----------------------------------------------------------------


@dataclass
class TimeSharingCurve:
    """Convex combination of the decode-only and full-energy operating points."""

    tau: np.ndarray
    rate: np.ndarray          # nats
    energy: np.ndarray        # watts
    rate_wf: float
    rate_eh: float
    energy_wf: float
    energy_eh: float


def waterfill_covariance(h: np.ndarray, noise_power: float, budget: float) -> np.ndarray:
    """Single-link capacity-achieving covariance against white noise."""
    _, s, vh = np.linalg.svd(h)
    gains = s**2 / noise_power
    alloc, _ = waterfill_budget(gains, budget)
    v = vh.conj().T
    return hermitian_part((v * alloc) @ v.conj().T)


def time_sharing_curve(channels: ChannelSet, effective: EffectiveChannels,
                       scheme: str, tau_grid, cfg: SystemConfig) -> TimeSharingCurve:
    """Baseline frontier that alternates two slots in time.

    Decode slot: energy transmitters silent, each decoder waterfills its own
    direct link. Energy slot: full-power rank-one beams plus decoders beaming
    their full budget onto the dominant direction of their cross link. Rates
    in each slot are evaluated against that slot's actual interference.
    """
    tau = np.asarray(tau_grid, dtype=float)
    p_max = cfg.p_max
    zeta = cfg.zeta
    noise_term = cfg.noise_power if cfg.include_noise_energy else None
    cap = scheme_energy_capacity(channels, effective, scheme, cfg)
    directions = directions_for_scheme(scheme, effective, cap / zeta, p_max,
                                       cfg.tilt_decay, 0)

    wf_beams = BeamPlan(directions=directions,
                        powers={k: 0.0 for k in effective.eh_set}, scheme=scheme)
    wf_covs = {i: waterfill_covariance(channels.h[i, i], cfg.noise_power, p_max)
               for i in effective.id_set}
    wf = Strategy(beams=wf_beams, info_covariances=wf_covs)
    rate_wf = sum(achievable_rate(channels, wf, i, cfg.noise_power)
                  for i in effective.id_set)
    energy_wf = sum(harvested_energy(channels, wf, i, zeta, noise_term)
                    for i in effective.eh_set)

    eh_full = max_energy_strategy(effective, directions, p_max)
    eh_full = Strategy(beams=BeamPlan(directions=directions,
                                      powers={k: p_max for k in effective.eh_set},
                                      scheme=scheme),
                       info_covariances=eh_full.info_covariances)
    if cfg.count_eh_phase_rate:
        rate_eh = sum(achievable_rate(channels, eh_full, i, cfg.noise_power)
                      for i in effective.id_set)
    else:
        rate_eh = 0.0
    energy_eh = sum(harvested_energy(channels, eh_full, i, zeta, noise_term)
                    for i in effective.eh_set)

    return TimeSharingCurve(
        tau=tau,
        rate=(1.0 - tau) * rate_wf + tau * rate_eh,
        energy=(1.0 - tau) * energy_wf + tau * energy_eh,
        rate_wf=rate_wf, rate_eh=rate_eh,
        energy_wf=energy_wf, energy_eh=energy_eh,
    )
