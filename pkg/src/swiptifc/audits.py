"""Numerical audits of the analytic claims behind the optimizer.

Each audit re-derives a claim by an independent route (brute-force search,
finite differences, projected-gradient ascent) and reports the worst
violation observed. Audits report failures; they never raise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beams import beam_statistics, directions_for_scheme
from .channel import assemble_effective, generate_channels
from .config import SystemConfig
from .linalg import hermitian_part
from .optimizer import (Strategy, BeamPlan, inner_solve, power_gradient,
                        rate_objective, waterfill_covariance)


@dataclass
class AuditReport:
    name: str
    instances: int
    max_violation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tolerance

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.name}: {self.instances} instances, "
                f"max violation {self.max_violation:.3e} "
                f"(tolerance {self.tolerance:.3e})")


def _rand_psd(rng, m, scale=1.0):
    g = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2)
    return scale * hermitian_part(g @ g.conj().T) / m


# -- determinant / log-det ordering ------------------------------------------------


def lemma_ordering_audit(n_draws: int = 1000, m: int = 4, seed: int = 7) -> AuditReport:
    """Anti-monotonicity of f(X) = logdet(I + S(I+X)^{-1}) against det(I+X).

    Growing X by a rank-one PSD increment must grow det(I+X) and shrink f.
    A violation is any draw where either ordering fails (beyond round-off).
    """
    rng = np.random.default_rng(seed)
    eye = np.eye(m)
    violations = 0
    worst = 0.0
    for _ in range(n_draws):
        s = _rand_psd(rng, m) + 0.1 * eye
        x1 = _rand_psd(rng, m)
        v = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        rho = float(rng.uniform(0.05, 2.0))
        x2 = x1 + rho * np.outer(v, v.conj()) / (v.conj() @ v).real

        def f(x):
            inner = eye + s @ np.linalg.inv(eye + x)
            return float(np.linalg.slogdet(inner)[1])

        det1 = float(np.linalg.slogdet(eye + x1)[1])
        det2 = float(np.linalg.slogdet(eye + x2)[1])
        f1, f2 = f(x1), f(x2)
        det_up = det2 - det1    # must be > 0
        f_down = f1 - f2        # must be > 0
        if det_up <= 1e-12 or f_down <= -1e-12:
            violations += 1
            worst = max(worst, -min(det_up, f_down))
    return AuditReport("logdet-ordering", n_draws, float(violations), 0.0)


# -- gradient correctness ------------------------------------------------------------


def _random_instance(rng, cfg: SystemConfig):
    trial = int(rng.integers(0, 2**31 - 1))
    channels = generate_channels(cfg, trial)
    eh = tuple(range(cfg.k1))
    ids = tuple(range(cfg.k1, cfg.k))
    effective = assemble_effective(channels, eh, ids)
    dirs = directions_for_scheme(cfg.scheme, effective, 0.0, cfg.p_max)
    powers = {k: float(rng.uniform(0.2, 1.0)) * cfg.p_max for k in eh}
    covs = {}
    for i in ids:
        q = _rand_psd(rng, cfg.m)
        covs[i] = q * (cfg.p_max * float(rng.uniform(0.3, 1.0)) / np.trace(q).real)
    beams = BeamPlan(directions=dirs, powers=powers, scheme=cfg.scheme)
    return channels, effective, Strategy(beams=beams, info_covariances=covs)


def gradient_audit(n_instances: int = 100, seed: int = 11,
                   cfg: SystemConfig | None = None) -> AuditReport:
    """Analytic power gradient against central finite differences."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    shapes = [(2, 1), (3, 2), (4, 2)]
    for t in range(n_instances):
        k, k1 = shapes[t % len(shapes)]
        base = cfg if cfg is not None else SystemConfig()
        c = base.replace(k=k, k1=k1, seed=1000 + t)
        variant = "UP" if t % 2 == 0 else "P1"
        channels, effective, strategy = _random_instance(rng, c)
        grad = power_gradient(channels, strategy, variant, c.noise_power)
        h = 1e-6 * c.p_max
        eh = sorted(strategy.beams.powers)
        for idx, kk in enumerate(eh):
            def j_at(p):
                powers = dict(strategy.beams.powers)
                powers[kk] = p
                pert = Strategy(
                    beams=BeamPlan(directions=strategy.beams.directions,
                                   powers=powers, scheme=strategy.beams.scheme),
                    info_covariances=strategy.info_covariances)
                return rate_objective(channels, pert, variant, c.noise_power)

            p0 = strategy.beams.powers[kk]
            fd = (j_at(p0 + h) - j_at(p0 - h)) / (2 * h)
            denom = max(abs(fd), abs(grad[idx]), 1e-12)
            worst = max(worst, abs(grad[idx] - fd) / denom)
    return AuditReport("power-gradient-vs-fd", n_instances, worst, 1e-5)


# -- waterfilling vs projected-gradient oracle ---------------------------------------


def projected_gradient_oracle(h_bar: np.ndarray, b: np.ndarray, p_max: float,
                              e_req: float, iters: int = 20000,
                              tol: float = 1e-13):
    """Maximize logdet(I + Hbar Q Hbar^H) over the feasible covariance set.

    Independent of the priced-waterfilling path: plain gradient ascent with
    backtracking, projecting onto {PSD} intersect {tr Q <= P} intersect
    {tr(B Q) >= E} by Dykstra's alternating projections (PSD cone, then the
    exact projection onto the intersection of the two half-spaces).
    Returns (Q, objective).
    """
    m = h_bar.shape[1]
    eye = np.eye(m, dtype=np.complex128)
    b = hermitian_part(b)
    # half-space normals in the Frobenius inner product: <n1, Q> <= p_max
    # with n1 = I, and <n2, Q> <= -e_req with n2 = -B
    g11 = float(m)
    g12 = -float(np.trace(b).real)
    g22 = float(np.sum(np.abs(b) ** 2))

    def proj_halfspaces(q):
        v1 = float(np.trace(q).real) - p_max
        v2 = e_req - float(np.einsum("ij,ji->", b, q).real)
        if v1 <= 0.0 and v2 <= 0.0:
            return q
        if v2 <= 0.0 or g22 == 0.0:
            return q - (max(v1, 0.0) / g11) * eye
        if v1 <= 0.0:
            cand = q + (v2 / g22) * b
            if float(np.trace(cand).real) <= p_max + 1e-18:
                return cand
        # both constraints active: solve the 2x2 normal equations
        det = g11 * g22 - g12 * g12
        alpha = (g22 * v1 - g12 * v2) / det
        beta = (g11 * v2 - g12 * v1) / det
        return q - alpha * eye + beta * b

    def proj_feasible(q, cycles=200):
        q = hermitian_part(q)
        p1 = np.zeros_like(q)
        p2 = np.zeros_like(q)
        for cyc in range(cycles):
            y = q + p1
            w, v = np.linalg.eigh(hermitian_part(y))
            psd = (v * np.maximum(w, 0.0)) @ v.conj().T
            p1 = y - psd
            y = psd + p2
            q_next = proj_halfspaces(y)
            p2 = y - q_next
            if cyc > 2 and np.linalg.norm(q_next - q) <= 1e-14 * max(p_max, 1e-30):
                q = q_next
                break
            q = q_next
        return hermitian_part(q)

    def objective(q):
        inner = eye + h_bar @ q @ h_bar.conj().T
        return float(np.linalg.slogdet(hermitian_part(inner))[1])

    def gradient(q):
        inner = hermitian_part(eye + h_bar @ q @ h_bar.conj().T)
        return hermitian_part(h_bar.conj().T @ np.linalg.solve(inner, h_bar))

    q = proj_feasible((p_max / m) * eye)
    obj = objective(q)
    step = p_max
    for _ in range(iters):
        g = gradient(q)
        improved = False
        while step > 1e-18 * p_max:
            cand = proj_feasible(q + step * g)
            cand_obj = objective(cand)
            if cand_obj > obj + 1e-18:
                improved = True
                break
            step *= 0.5
        if not improved:
            break
        gain = cand_obj - obj
        q, obj = cand, cand_obj
        step *= 1.3
        if gain <= tol * max(1.0, abs(obj)):
            break
    q = proj_feasible(q, cycles=500)
    return q, objective(q)


def interior_point_oracle(h_bar: np.ndarray, b: np.ndarray, p_max: float,
                          e_req: float) -> float:
    """Optimal value of the single-decoder problem via a generic conic solver.

    The projected-gradient oracle certifies only a lower bound on hard
    instances: with the energy floor and a rank-deficient optimum the
    conditioning grows with the energy price and first-order progress stalls.
    This oracle solves the same convex program (rescaled to unit budget)
    through cvxpy's interior-point path and is accurate to ~1e-8.
    """
    import cvxpy as cp

    m = h_bar.shape[1]
    b = hermitian_part(b)
    b_top = float(np.linalg.norm(b, 2))
    h_s = h_bar * np.sqrt(p_max)
    q_t = cp.Variable((m, m), hermitian=True)
    objective = cp.log_det(np.eye(m) + h_s @ q_t @ h_s.conj().T)
    constraints = [q_t >> 0, cp.real(cp.trace(q_t)) <= 1.0]
    if b_top > 0 and e_req > 0:
        constraints.append(
            cp.real(cp.trace((b / b_top) @ q_t)) >= e_req / (p_max * b_top))
    problem = cp.Problem(cp.Maximize(objective), constraints)
    problem.solve(solver=cp.CLARABEL)
    if problem.status not in ("optimal", "optimal_inaccurate"):
        raise RuntimeError(f"oracle solve failed with status {problem.status}")
    return float(problem.value)


def waterfilling_audit(n_instances: int = 100, seed: int = 13) -> AuditReport:
    """Single-decoder inner solve against independent convex oracles.

    Checks three things per instance: KKT residuals of the priced solve, the
    priced solve never losing to the projected-gradient oracle, and a
    two-sided objective match against the interior-point oracle.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for t in range(n_instances):
        cfg = SystemConfig(k=2, k1=1, seed=2000 + t)
        channels = generate_channels(cfg, 0)
        effective = assemble_effective(channels, (0,), (1,))
        dirs = directions_for_scheme("MEB", effective, 0.0, cfg.p_max)
        stats = beam_statistics(effective, channels, dirs)
        powers = {0: float(rng.uniform(0.0, 1.0)) * cfg.p_max}
        hb = effective.h12_blocks[1]
        b = hermitian_part(hb.conj().T @ hb)
        e_sup = cfg.p_max * float(np.linalg.eigvalsh(b)[-1])
        frac = float(rng.uniform(0.05, 0.95))
        beam_energy = stats.energy_gains[0] * powers[0]
        e_bar = cfg.zeta * (beam_energy + frac * e_sup)

        res = inner_solve(channels, effective, stats, powers, e_bar, "UP", cfg)
        kkt = res.kkt_residuals(cfg.p_max)
        worst = max(worst, max(kkt.values()))

        noise_eye = cfg.noise_power * np.eye(cfg.m)
        r_bar = hermitian_part(noise_eye + powers[0] * stats.leak_shapes[(1, 0)])
        w, v = np.linalg.eigh(r_bar)
        r_is = (v * w**-0.5) @ v.conj().T
        h_bar = r_is @ channels.h[1, 1]
        _, pg_obj = projected_gradient_oracle(h_bar, b, cfg.p_max, res.e_req)
        worst = max(worst, pg_obj - res.objective)
        ip_obj = interior_point_oracle(h_bar, b, cfg.p_max, res.e_req)
        worst = max(worst, abs(ip_obj - res.objective))
    return AuditReport("waterfilling-vs-convex-oracles", n_instances, worst, 1e-6)


# -- rank-one sufficiency -------------------------------------------------------------


def rank_one_audit(n_draws: int = 50, n_rank2: int = 10000, seed: int = 17,
                   m: int = 2) -> AuditReport:
    """Search for a rank-two beam covariance beating the best rank-one.

    Two-pair network, one harvester and one decoder, decoder covariance
    fixed at its direct-link waterfilling. All candidates are constrained to
    deliver the same beam-side energy; the report's violation is the largest
    relative rate advantage any rank-two candidate achieves.
    """
    rng = np.random.default_rng(seed)
    worst = -np.inf
    cfg = SystemConfig(k=2, k1=1, m=m)
    eye = np.eye(m)
    for draw in range(n_draws):
        channels = generate_channels(cfg.replace(seed=3000 + draw), 0)
        h11 = channels.h[0, 0]
        h12 = channels.h[0, 1]
        h21 = channels.h[1, 0]
        h22 = channels.h[1, 1]
        q2 = waterfill_covariance(h22, cfg.noise_power, cfg.p_max)

        sig1_sq = float(np.linalg.norm(h11, 2)) ** 2
        e_target = 0.7 * cfg.p_max * sig1_sq

        def rate_for(q1_batch):
            # q1_batch: (n, m, m); returns decode rates (nats)
            r = (cfg.noise_power * eye + np.einsum(
                "ab,nbc,dc->nad", h21, q1_batch, h21.conj()))
            r_inv = np.linalg.inv(r)
            inner = eye + np.einsum(
                "ba,nbc,cd,de->nae", h22.conj(), r_inv, h22, q2)
            return np.linalg.slogdet(inner)[1].real

        def beam_energy(q1_batch):
            return np.einsum("ab,nbc,ac->n", h11, q1_batch,
                             h11.conj()).real

        # rank-one candidates: dense direction grid, power matched to e_target
        theta = rng.uniform(0, np.pi / 2, size=4000)
        phi = rng.uniform(0, 2 * np.pi, size=4000)
        vs = np.stack([np.cos(theta), np.sin(theta) * np.exp(1j * phi)], axis=1)
        outer1 = np.einsum("na,nb->nab", vs, vs.conj())
        gains = beam_energy(outer1)
        ok = gains > e_target / cfg.p_max  # power e_target/gain must be <= P
        p_match = e_target / gains[ok]
        cand1 = p_match[:, None, None] * outer1[ok]
        best1 = float(rate_for(cand1).max())

        # rank-two candidates: random orthobases and power splits
        g = (rng.standard_normal((n_rank2, m, m))
             + 1j * rng.standard_normal((n_rank2, m, m)))
        u_all, _ = np.linalg.qr(g)
        t = rng.uniform(0.0, 1.0, size=n_rank2)
        v1 = u_all[:, :, 0]
        v2 = u_all[:, :, 1]
        base = (t[:, None, None] * np.einsum("na,nb->nab", v1, v1.conj())
                + (1 - t)[:, None, None] * np.einsum("na,nb->nab", v2, v2.conj()))
        gains2 = beam_energy(base)
        scale = np.where(gains2 > 0, e_target / np.maximum(gains2, 1e-300), np.inf)
        ok2 = scale <= cfg.p_max
        cand2 = scale[ok2][:, None, None] * base[ok2]
        if cand2.shape[0] == 0:
            continue
        rates2 = rate_for(cand2)
        best2_idx = int(np.argmax(rates2))
        best2 = float(rates2[best2_idx])

        # give the rank-one family the best rank-two's own eigendirections
        w_top, v_top = np.linalg.eigh(cand2[best2_idx])
        extra = np.einsum("an,bn->nab", v_top, v_top.conj())
        gains_e = beam_energy(extra)
        ok_e = gains_e > e_target / cfg.p_max
        if ok_e.any():
            pe = e_target / gains_e[ok_e]
            best1 = max(best1, float(rate_for(pe[:, None, None] * extra[ok_e]).max()))

        worst = max(worst, (best2 - best1) / max(best1, 1e-12))
    return AuditReport("rank-one-sufficiency", n_draws, float(worst), 0.01)


# -- monotone power descent ------------------------------------------------------------


def monotone_power_audit(trials: int = 100, cfg: SystemConfig | None = None) -> AuditReport:
    """Count any power increase across descent iterates over full sweeps."""
    from .sweep import sweep_trials

    base = cfg if cfg is not None else SystemConfig(
        k=2, k1=1, trials=trials, ebar_grid_size=8, scheme="MEB")
    results = sweep_trials(base.replace(trials=trials))
    violations = sum(t.monotonicity_violations for t in results)
    return AuditReport("monotone-power-descent", trials, float(violations), 0.0)


def run_audits(config: SystemConfig | None = None) -> list:
    """Run the full audit battery at spec-scale instance counts."""
    cfg = config if config is not None else SystemConfig()
    reports = [
        lemma_ordering_audit(1000, m=min(cfg.m, 4), seed=cfg.seed + 1),
        gradient_audit(100, seed=cfg.seed + 2),
        waterfilling_audit(100, seed=cfg.seed + 3),
        rank_one_audit(50, 10000, seed=cfg.seed + 4),
        monotone_power_audit(100),
    ]
    return reports
