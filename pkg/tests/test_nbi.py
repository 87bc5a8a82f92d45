import cvxpy as cp
import numpy as np
import pytest

from conftest import crandn
from csradar.channel import add_awgn
from csradar.errors import DimensionError, InvalidInputError, InvalidPowerError, InvalidTonesError
from csradar.nbi import (
    cached_operator,
    cancel_nbi,
    joint_recover,
    nbi_power,
    nbi_residual_energy,
    random_tones,
    refine_nbi_estimate,
    synthesize_nbi,
    synthesize_offgrid_nbi,
    two_stage_recover,
)
from csradar.signal import SamplingPattern, WaveformFrame, partial_fourier_adjoint, unitary_idft
from csradar.solver import BpdnProblem, epsilon_from_noise, solve_bpdn

N, M, CP = 128, 43, 32


def setup(n=N, m=M, seed=0, frames=2):
    fr = tuple(WaveformFrame.rademacher(n, n // 4, 10 * seed + i) for i in range(frames))
    return fr, SamplingPattern.uniform_random(n, m, seed + 1)


def scenario(rng, frames, pattern, targets=1, tones=1, snr_db=20.0, sir_db=0.0):
    """One antenna: channels for every frame, interference and noise."""
    n = pattern.n
    op = cached_operator(frames, False, pattern)
    h = np.zeros(op.in_dim, complex)
    supports = []
    for i in range(len(frames)):
        taps = rng.choice(n // 4, targets, replace=False)
        h[i * n + taps] = np.exp(2j * np.pi * rng.random(targets))
        supports.append(set(int(t) for t in taps))
    clean = op.full_rate(h)
    power = float(np.mean(np.abs(clean) ** 2))
    jf = np.zeros(n, complex)
    bins = []
    if tones:
        sig, _ = synthesize_nbi(random_tones(rng, n, tones), n, power, sir_db)
        jf = sig.freq_coeffs
        bins = list(sig.tone_bins)
    y = clean + unitary_idft(jf)
    sigma_sq = 0.0
    if np.isfinite(snr_db):
        y = add_awgn(y, snr_db, power, rng)
        sigma_sq = power / 10 ** (snr_db / 10)
    return y[pattern.omega], h, supports, jf, bins, epsilon_from_noise(sigma_sq, pattern.m)


class TestSynthesize:
    def test_single_tone_sir_zero(self):
        sig, x = synthesize_nbi([(45, None, 0.3)], N, 2.5, 0.0)
        assert sig.power == pytest.approx(2.5)
        assert np.mean(np.abs(x) ** 2) == pytest.approx(2.5)
        assert np.flatnonzero(sig.freq_coeffs).tolist() == [45]
        assert sig.tone_bins == (45,)

    def test_time_domain_is_unitary_inverse(self):
        sig, x = synthesize_nbi([(3, None, 0.0), (40, None, 1.0)], 64, 1.0, 10.0)
        np.testing.assert_allclose(x, unitary_idft(sig.freq_coeffs), atol=1e-15)
        assert sig.power == pytest.approx(0.1)

    def test_equal_split(self):
        sig, _ = synthesize_nbi([(1, None, 0), (2, None, 0)], 16, 1.0, 0.0)
        np.testing.assert_allclose(np.abs(sig.freq_coeffs[[1, 2]]) ** 2, 8.0)

    def test_relative_amplitudes(self):
        sig, _ = synthesize_nbi([(1, 1.0, 0), (2, 2.0, 0)], 16, 1.0, 0.0)
        p = np.abs(sig.freq_coeffs[[1, 2]]) ** 2
        assert p[1] / p[0] == pytest.approx(4.0)
        assert sig.power == pytest.approx(1.0)

    def test_zero_tones(self):
        sig, x = synthesize_nbi([], 16, 1.0, 0.0)
        np.testing.assert_array_equal(x, 0)
        assert sig.power == 0

    def test_infinite_sir(self):
        sig, x = synthesize_nbi([(5, None, 0)], 16, 1.0, float("inf"))
        np.testing.assert_array_equal(x, 0)
        assert nbi_power(1.0, float("inf")) == 0.0

    @pytest.mark.parametrize(
        "tones", [[(3, None, 0), (3, None, 1)], [(16, None, 0)], [(-1, None, 0)], [(1, 1.0, 0), (2, None, 0)]]
    )
    def test_invalid_tones(self, tones):
        with pytest.raises(InvalidTonesError):
            synthesize_nbi(tones, 16, 1.0, 0.0)

    def test_invalid_power(self):
        with pytest.raises(InvalidPowerError):
            synthesize_nbi([(1, None, 0)], 16, 0.0, 0.0)

    def test_random_tones_distinct(self, rng):
        tones = random_tones(rng, 16, 5)
        assert len({b for b, _, _ in tones}) == 5

    def test_offgrid_power_and_leakage(self):
        sig, x = synthesize_offgrid_nbi([10.5], 64, 1.0, 0.0)
        assert np.mean(np.abs(x) ** 2) == pytest.approx(1.0)
        assert np.count_nonzero(np.abs(sig.freq_coeffs) > 1e-9) > 10
        on, _ = synthesize_offgrid_nbi([7.0], 64, 1.0, 0.0)
        assert np.count_nonzero(np.abs(on.freq_coeffs) > 1e-9) == 1


class TestJointRecover:
    def test_no_nbi_reduces_to_channel_program(self, rng):
        frames, pattern = setup()
        y, h, supports, _, _, _ = scenario(rng, frames, pattern, tones=0, snr_db=np.inf)
        sol = joint_recover(y, frames, pattern, 0.0)
        assert np.max(np.abs(sol.coefficients[2 * N:])) <= 1e-6
        for i in range(2):
            block = sol.coefficients[i * N:(i + 1) * N]
            assert set(np.flatnonzero(np.abs(block) > 1e-6)) == supports[i]

    def test_single_target_single_tone(self):
        frames, pattern = setup()
        ok = 0
        for trial in range(100):
            rng = np.random.default_rng(500 + trial)
            y, h, supports, jf, bins, eps = scenario(rng, frames, pattern)
            s = joint_recover(y, frames, pattern, eps).coefficients
            taps = [int(np.argmax(np.abs(s[i * N:(i + 1) * N]))) for i in range(2)]
            good = all(taps[i] in supports[i] for i in range(2))
            ok += good and int(np.argmax(np.abs(s[2 * N:]))) == bins[0]
        assert ok >= 90

    def test_matches_dense_cvxpy_small(self):
        frames, pattern = setup(n=32, m=16, seed=3)
        rng = np.random.default_rng(9)
        y, *_, eps = scenario(rng, frames, pattern, snr_db=20.0)
        sol = joint_recover(y, frames, pattern, eps)
        a = cached_operator(frames, True, pattern).matrix
        x = cp.Variable(a.shape[1], complex=True)
        prob = cp.Problem(cp.Minimize(cp.norm1(x)), [cp.norm(a @ x - y, 2) <= eps])
        prob.solve(solver=cp.CLARABEL)
        assert sol.l1_norm == pytest.approx(prob.value, rel=1e-3)

    def test_zero_observation(self):
        frames, pattern = setup()
        sol = joint_recover(np.zeros(M), frames, pattern, 0.0)
        np.testing.assert_array_equal(sol.coefficients, 0)
        assert sol.coefficients.shape == (3 * N,)

    def test_block_bookkeeping(self, rng):
        frames, pattern = setup()
        y, *_, eps = scenario(rng, frames, pattern)
        sol = joint_recover(y, frames, pattern, eps)
        op = cached_operator(frames, True, pattern)
        channels, nbi = op.split(sol.coefficients)
        fitted = sum(
            cached_operator((f,), False, pattern).forward(c) for f, c in zip(frames, channels)
        ) + partial_fourier_adjoint(nbi, pattern)
        assert np.linalg.norm(fitted - y) == pytest.approx(sol.residual_norm, rel=1e-9)


class TestCancel:
    def test_perfect_estimate(self, rng):
        frames, pattern = setup()
        y, h, _, jf, _, _ = scenario(rng, frames, pattern, snr_db=np.inf)
        cleaned = cancel_nbi(y, jf, pattern)
        clean_only = cached_operator(frames, False, pattern).forward(h)
        np.testing.assert_allclose(cleaned, clean_only, atol=1e-12)
        assert nbi_residual_energy(jf, jf, pattern) <= 1e-24

    def test_zero_estimate(self, rng):
        y = crandn(rng, M)
        np.testing.assert_array_equal(cancel_nbi(y, np.zeros(N), SamplingPattern.uniform_random(N, M, 0)), y)

    def test_linearity(self, rng):
        pattern = SamplingPattern.uniform_random(N, M, 4)
        y, j1, j2 = crandn(rng, M), crandn(rng, N), crandn(rng, N)
        a, b = 0.3 - 2j, 1.7
        lhs = cancel_nbi(y, a * j1 + b * j2, pattern)
        rhs = y - a * partial_fourier_adjoint(j1, pattern) - b * partial_fourier_adjoint(j2, pattern)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_mismatch(self):
        with pytest.raises(DimensionError):
            cancel_nbi(np.zeros(M + 1), np.zeros(N), SamplingPattern.uniform_random(N, M, 0))

    def test_energy_reduction(self):
        frames, pattern = setup()
        ratios = []
        for trial in range(100):
            rng = np.random.default_rng(7000 + trial)
            y, h, _, jf, _, eps = scenario(rng, frames, pattern)
            s = joint_recover(y, frames, pattern, eps).coefficients
            before = nbi_residual_energy(jf, np.zeros(N), pattern)
            after = nbi_residual_energy(jf, s[2 * N:], pattern)
            ratios.append(10 * np.log10(before / max(after, 1e-300)))
        assert np.median(ratios) >= 10.0


class TestRefine:
    def test_zero_tones(self, rng):
        frames, pattern = setup()
        y, *_, eps = scenario(rng, frames, pattern)
        op = cached_operator(frames, True, pattern)
        stage1 = solve_bpdn(BpdnProblem(op, y, eps))
        np.testing.assert_array_equal(refine_nbi_estimate(y, stage1, op, 0), 0)
        with pytest.raises(InvalidInputError):
            refine_nbi_estimate(y, stage1, op, -1)

    def test_removes_shrinkage(self):
        frames, pattern = setup()
        rng = np.random.default_rng(31)
        y, h, _, jf, bins, eps = scenario(rng, frames, pattern, snr_db=40.0)
        op = cached_operator(frames, True, pattern)
        stage1 = solve_bpdn(BpdnProblem(op, y, eps))
        refined = refine_nbi_estimate(y, stage1, op, 1)
        raw = stage1.coefficients[2 * N:]
        assert np.flatnonzero(refined).tolist() == bins
        assert abs(refined[bins[0]] - jf[bins[0]]) < abs(raw[bins[0]] - jf[bins[0]])


class TestTwoStage:
    def test_noiseless_no_nbi_same_support(self, rng):
        frames, pattern = setup()
        y, *_ = scenario(rng, frames, pattern, targets=2, tones=0, snr_db=np.inf)
        res = two_stage_recover(y, frames, pattern, 0.0)
        for a, b in zip(res.stage1_channels, res.channels):
            assert set(np.flatnonzero(np.abs(a) > 1e-6)) == set(np.flatnonzero(np.abs(b) > 1e-6))

    def test_cleaned_uses_raw_block(self, rng):
        frames, pattern = setup()
        y, *_, eps = scenario(rng, frames, pattern)
        res = two_stage_recover(y, frames, pattern, eps)
        np.testing.assert_array_equal(res.nbi_estimate, res.stage1_nbi)
        np.testing.assert_allclose(
            res.cleaned, y - partial_fourier_adjoint(res.stage1_nbi, pattern), atol=1e-15
        )
        assert res.residual_nbi_energy >= 0
        assert res.residual_nbi_energy == pytest.approx(res.stage2.residual_norm**2)

    def test_refit_estimate(self, rng):
        frames, pattern = setup()
        y, *_, bins, eps = scenario(rng, frames, pattern, tones=2)
        res = two_stage_recover(y, frames, pattern, eps, nbi_tones=2)
        assert np.count_nonzero(res.nbi_estimate) <= 2
        np.testing.assert_allclose(res.cleaned, cancel_nbi(y, res.nbi_estimate, pattern), atol=1e-15)

    def test_small_stage_two_bound_is_not_fatal(self, rng):
        frames, pattern = setup()
        y, *_, eps = scenario(rng, frames, pattern)
        res = two_stage_recover(y, frames, pattern, eps, 1e-9, max_iterations=3)
        assert not res.stage2.converged
        assert np.all(np.isfinite(res.stage2.coefficients))

    def test_oracle_estimate_idempotence(self):
        frames, pattern = setup()
        channel_op = cached_operator(frames, False, pattern)
        for trial in range(10):
            rng = np.random.default_rng(trial)
            y, h, _, jf, _, _ = scenario(rng, frames, pattern, targets=2, snr_db=np.inf)
            via_cancel = solve_bpdn(BpdnProblem(channel_op, cancel_nbi(y, jf, pattern), 0.0))
            direct = solve_bpdn(BpdnProblem(channel_op, channel_op.forward(h), 0.0))
            sa = set(np.flatnonzero(np.abs(via_cancel.coefficients) > 1e-6))
            sb = set(np.flatnonzero(np.abs(direct.coefficients) > 1e-6))
            assert sa == sb

    def test_stage_two_not_worse(self):
        # SNR 20 dB, SIR 0 dB, one tone, one target; 10^4 seeded trials.
        frames, pattern = setup()
        stage1 = stage2 = 0
        trials = 10_000
        for trial in range(trials):
            rng = np.random.default_rng(10**6 + trial)
            y, h, supports, _, _, eps = scenario(rng, frames, pattern)
            res = two_stage_recover(y, frames, pattern, eps, nbi_tones=1)
            hit = lambda chans: all(int(np.argmax(np.abs(c))) in supports[i] for i, c in enumerate(chans))
            stage1 += hit(res.stage1_channels)
            stage2 += hit(res.channels)
        assert stage2 >= stage1

    def test_dual_tone_not_better(self):
        frames, pattern = setup()
        pd = {}
        for tones in (1, 2):
            hits = 0
            for trial in range(300):
                rng = np.random.default_rng(3 * 10**5 + trial)
                y, h, supports, _, _, eps = scenario(rng, frames, pattern, targets=3, tones=tones, snr_db=10.0)
                res = two_stage_recover(y, frames, pattern, eps, nbi_tones=tones)
                picks = [set(np.argsort(-np.abs(c), kind="stable")[:3].tolist()) for c in res.channels]
                hits += all(p == s for p, s in zip(picks, supports))
            pd[tones] = hits / 300
        assert pd[2] <= pd[1]

    def test_nbi_sparser_than_channel(self):
        # One tone against three targets: the interference peak is easier to find.
        frames, pattern = setup()
        tone_ok = tap_ok = 0
        for trial in range(10_000):
            rng = np.random.default_rng(2 * 10**6 + trial)
            y, h, supports, _, bins, eps = scenario(rng, frames, pattern, targets=3)
            s = joint_recover(y, frames, pattern, eps).coefficients
            tone_ok += int(np.argmax(np.abs(s[2 * N:]))) == bins[0]
            tap_ok += int(np.argmax(np.abs(s[:N]))) in supports[0]
        assert tone_ok >= tap_ok
