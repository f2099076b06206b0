import numpy as np
import pytest

from swiptifc.beams import (BeamPlan, UndefinedDirectionError, beam_statistics,
                            directions_for_scheme, meb_direction, mlb_direction,
                            sler_direction, whitened_mlb_direction)
from swiptifc.channel import assemble_effective, generate_channels
from swiptifc.config import SystemConfig
from swiptifc.linalg import svd

from conftest import complex_gaussian, random_psd


def angle_between(u, v):
    c = min(abs(np.vdot(u, v)), 1.0)
    return np.arccos(c)


@pytest.fixture
def effective():
    cfg = SystemConfig(k=3, k1=2, m=4)
    ch = generate_channels(cfg, 0)
    return cfg, ch, assemble_effective(ch, (0, 1), (2,))


class TestMebDirection:
    def test_diagonal_dominant_axis(self):
        v = meb_direction(np.diag([3.0, 1.0]))
        assert abs(v[0]) == pytest.approx(1.0, abs=1e-12)

    def test_delivery_equals_top_singular_value_squared(self, effective):
        cfg, ch, eff = effective
        h11 = eff.h11[0]
        v = meb_direction(h11)
        p = cfg.p_max
        sig1 = np.linalg.svd(h11, compute_uv=False)[0]
        assert p * np.linalg.norm(h11 @ v) ** 2 == pytest.approx(p * sig1**2, rel=1e-12)

    def test_sampling_maximality(self, rng, effective):
        _, _, eff = effective
        h11 = eff.h11[0]
        v = meb_direction(h11)
        best = np.linalg.norm(h11 @ v) ** 2
        vs = complex_gaussian(rng, 100_000, 4)
        vs /= np.linalg.norm(vs, axis=1, keepdims=True)
        gains = np.linalg.norm(vs @ h11.T, axis=1) ** 2
        assert best >= gains.max()

    def test_zero_matrix_rejected(self):
        with pytest.raises(UndefinedDirectionError):
            meb_direction(np.zeros((4, 4)))


class TestMlbDirection:
    def test_weakest_diagonal_axis(self):
        v = mlb_direction(np.diag([3.0, 1.0]))
        assert abs(v[1]) == pytest.approx(1.0, abs=1e-12)

    def test_near_null_direction(self):
        h = np.diag([5.0, 1e-6])
        v = mlb_direction(h)
        assert np.linalg.norm(h @ v) ** 2 == pytest.approx(1e-12, rel=1e-9)

    def test_sampling_minimality(self, rng, effective):
        _, _, eff = effective
        h21 = eff.h21[0]
        v = mlb_direction(h21)
        best = np.linalg.norm(h21 @ v) ** 2
        vs = complex_gaussian(rng, 100_000, 4)
        vs /= np.linalg.norm(vs, axis=1, keepdims=True)
        leaks = np.linalg.norm(vs @ h21.T, axis=1) ** 2
        assert leaks.min() >= best

    def test_zero_matrix_rejected(self):
        with pytest.raises(UndefinedDirectionError):
            mlb_direction(np.zeros((4, 2)))


class TestSlerDirection:
    def test_small_target_matches_unregularized_pair(self, effective):
        cfg, _, eff = effective
        h11, h21 = eff.h11[0], eff.h21[0]
        # the shortfall term vanishes for small required energy
        v_small = sler_direction(h11, h21, 1e-9, cfg.p_max, 2)
        from swiptifc.linalg import generalized_eigmax
        pair = generalized_eigmax(h11.conj().T @ h11, h21.conj().T @ h21)
        assert angle_between(v_small, pair.vector) < 1e-10

    def test_large_target_approaches_max_energy_direction(self, effective):
        cfg, _, eff = effective
        h11, h21 = eff.h11[0], eff.h21[0]
        v = sler_direction(h11, h21, 1e9, cfg.p_max, 2)
        assert angle_between(v, meb_direction(h11)) < 1e-3

    def test_ratio_sampling_maximality(self, rng, effective):
        cfg, _, eff = effective
        h11, h21 = eff.h11[0], eff.h21[0]
        e_bar = 1.5 * cfg.p_max * np.linalg.norm(h11, 2) ** 2 * 2
        v = sler_direction(h11, h21, e_bar, cfg.p_max, 2)
        reg = max(e_bar / (2 * cfg.p_max) - np.linalg.norm(h11, 2) ** 2, 0.0)
        assert reg > 0

        def ratio(vecs):
            num = np.linalg.norm(vecs @ h11.T, axis=1) ** 2
            den = np.linalg.norm(vecs @ h21.T, axis=1) ** 2 + reg
            return num / den

        vs = complex_gaussian(rng, 100_000, 4)
        vs /= np.linalg.norm(vs, axis=1, keepdims=True)
        assert ratio(v[None, :])[0] >= ratio(vs).max() * (1 - 1e-12)

    def test_tilt_decays_to_unregularized_direction(self, effective):
        cfg, _, eff = effective
        h11, h21 = eff.h11[0], eff.h21[0]
        e_bar = 3.0 * cfg.p_max * np.linalg.norm(h11, 2) ** 2 * 2
        target = sler_direction(h11, h21, 1e-12, cfg.p_max, 2)
        angles = []
        for n in (0, 5, 20, 100):
            v = sler_direction(h11, h21, e_bar, cfg.p_max, 2, tilt_exponent=n)
            angles.append(angle_between(v, target))
        assert (np.diff(angles) <= 1e-12).all()
        assert angles[-1] < 1e-3
        assert angles[-1] < 1e-2 * angles[0]

    def test_channel_scale_invariance(self, effective):
        cfg, _, eff = effective
        h11, h21 = eff.h11[0], eff.h21[0]
        c = 7.3
        # unregularized case: invariant under pure common channel scaling
        va = sler_direction(h11, h21, 1e-12, cfg.p_max, 2)
        vb = sler_direction(c * h11, c * h21, 1e-12, cfg.p_max, 2)
        assert abs(np.vdot(va, vb)) == pytest.approx(1.0, abs=1e-12)
        # regularized case: invariant when the target rescales with the gain
        v1 = sler_direction(h11, h21, 4e-4, cfg.p_max, 2)
        v2 = sler_direction(c * h11, c * h21, c**2 * 4e-4, cfg.p_max, 2)
        assert abs(np.vdot(v1, v2)) == pytest.approx(1.0, abs=1e-12)

    def test_both_zero_rejected(self):
        with pytest.raises(UndefinedDirectionError):
            sler_direction(np.zeros((4, 2)), np.zeros((4, 2)), 1.0, 1.0, 1)


class TestWhitenedMlb:
    def test_zero_interference_reduces_to_mlb(self, rng, effective):
        _, _, eff = effective
        h21 = eff.h21[0]
        v = whitened_mlb_direction(h21, np.zeros((4, 4)))
        assert abs(np.vdot(v, mlb_direction(h21))) == pytest.approx(1.0, abs=1e-10)

    def test_isotropic_interference_reduces_to_mlb(self, effective):
        _, _, eff = effective
        h21 = eff.h21[0]
        v = whitened_mlb_direction(h21, 2.5 * np.eye(4))
        assert abs(np.vdot(v, mlb_direction(h21))) == pytest.approx(1.0, abs=1e-10)

    def test_sampling_minimality_of_whitened_form(self, rng, effective):
        _, _, eff = effective
        h21 = eff.h21[0]
        c = random_psd(rng, 4, 1e-3)
        v = whitened_mlb_direction(h21, c)
        w, u = np.linalg.eigh(c)
        gram = h21.conj().T @ u @ np.diag(1 / (1 + w)) @ u.conj().T @ h21
        val = float((v.conj() @ gram @ v).real)
        vs = complex_gaussian(rng, 100_000, 4)
        vs /= np.linalg.norm(vs, axis=1, keepdims=True)
        vals = np.einsum("ni,ij,nj->n", vs.conj(), gram, vs).real
        assert vals.min() >= val * (1 - 1e-12)


class TestBeamStatistics:
    def test_meb_energy_gain_is_sigma1_squared(self, effective):
        cfg, ch, eff = effective
        dirs = directions_for_scheme("MEB", eff, 0.0, cfg.p_max)
        stats = beam_statistics(eff, ch, dirs)
        for k in eff.eh_set:
            sig1 = np.linalg.svd(eff.h11[k], compute_uv=False)[0]
            assert stats.energy_gains[k] == pytest.approx(sig1**2, rel=1e-12)

    def test_mlb_energy_gain_formula(self, effective):
        cfg, ch, eff = effective
        dirs = directions_for_scheme("MLB", eff, 0.0, cfg.p_max)
        stats = beam_statistics(eff, ch, dirs)
        for k in eff.eh_set:
            v_min = svd(eff.h21[k]).right_vectors[:, -1]
            want = np.linalg.norm(eff.h11[k] @ v_min) ** 2
            assert stats.energy_gains[k] == pytest.approx(want, rel=1e-12)

    def test_shape_trace_is_received_power(self, effective):
        cfg, ch, eff = effective
        dirs = directions_for_scheme("SLER", eff, 1e-4, cfg.p_max)
        stats = beam_statistics(eff, ch, dirs)
        for (i, j), shape in stats.leak_shapes.items():
            want = np.linalg.norm(ch.h[i, j] @ dirs[j]) ** 2
            assert np.trace(shape).real == pytest.approx(want, rel=1e-12)
            # rank one and PSD
            w = np.linalg.eigvalsh(shape)
            assert w[-1] == pytest.approx(want, rel=1e-12)
            assert abs(w[:-1]).max() <= 1e-15 * max(want, 1e-30)

    def test_beam_plan_covariance_invariants(self, effective):
        cfg, ch, eff = effective
        dirs = directions_for_scheme("MEB", eff, 0.0, cfg.p_max)
        plan = BeamPlan(directions=dirs, powers={k: 0.7 * cfg.p_max for k in dirs},
                        scheme="MEB")
        for k in dirs:
            q = plan.covariance(k)
            w = np.linalg.eigvalsh(q)
            assert np.trace(q).real == pytest.approx(0.7 * cfg.p_max, rel=1e-12)
            assert w[-1] == pytest.approx(0.7 * cfg.p_max, rel=1e-12)
            assert (w[:-1] <= 1e-15).all() and w[0] >= -1e-15
            assert np.linalg.norm(dirs[k]) == pytest.approx(1.0, abs=1e-12)
