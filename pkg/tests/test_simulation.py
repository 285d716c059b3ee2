import itertools
import json
import math

import numpy as np
import pytest
from scipy import stats

from cowzero.analytics import BlockDistribution, gain_zero
from cowzero.simulation import (
    INCONCLUSIVE,
    SignalKind,
    best_subblock,
    bob_count,
    eve_transform,
    generate_stream,
    measure_stream,
    pulse_train,
    run_simulation,
)
from cowzero.usd import ProtocolParams, Regime, UsdSolution, optimal_usd
from oracles import eve_reference, longest_valid_range, valid_range

B0, B1, D, V = SignalKind.BIT0, SignalKind.BIT1, SignalKind.DECOY, SignalKind.VACUUM


def test_pulse_convention():
    assert B0.pulse_pair == (True, False)
    assert B1.pulse_pair == (False, True)
    assert D.pulse_pair == (True, True)
    assert V.pulse_pair == (False, False)
    np.testing.assert_array_equal(pulse_train([B1, B0]), [0, 1, 1, 0])


class TestStream:
    def test_deterministic(self):
        p = ProtocolParams(0.1)
        np.testing.assert_array_equal(generate_stream(p, 1000, 7), generate_stream(p, 1000, 7))
        assert not np.array_equal(generate_stream(p, 1000, 7), generate_stream(p, 1000, 8))

    def test_decoy_dominance(self):
        s = generate_stream(ProtocolParams(0.1, 0.999), 10_000, 1)
        assert np.mean(s == D) >= 0.99

    def test_priors(self):
        n, f = 10**6, 0.155
        s = generate_stream(ProtocolParams(0.1, f), n, 2024)
        sigma = math.sqrt(f * (1 - f) / n)
        assert abs(np.mean(s == D) - f) < 5 * sigma
        assert abs(np.mean(s == B0) - np.mean(s == B1)) < 5 * math.sqrt(1 / n)
        assert set(np.unique(s)) <= {0, 1, 2}

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            generate_stream(ProtocolParams(0.1), 0, 1)


class TestMeasure:
    def test_regime1_never_identifies_decoys(self):
        usd = optimal_usd(ProtocolParams(0.06, 0.155))
        out = measure_stream(np.full(10_000, D, dtype=np.int8), usd, 3)
        assert np.all(out == INCONCLUSIVE)

    def test_perfect_measurement(self):
        usd = UsdSolution(Regime.R2, 1.0, 1.0, 1.0, (1 / 3, 1 / 3, 1 / 3))
        s = generate_stream(ProtocolParams(0.1, 0.3), 5000, 4)
        np.testing.assert_array_equal(measure_stream(s, usd, 5), s)

    def test_conclusive_results_are_correct(self):
        p = ProtocolParams(1.0, 0.5)
        s = generate_stream(p, 50_000, 6)
        out = measure_stream(s, optimal_usd(p), 7)
        hit = out != INCONCLUSIVE
        np.testing.assert_array_equal(out[hit], s[hit])

    def test_conclusive_rate(self):
        p = ProtocolParams(0.06, 0.155)
        usd = optimal_usd(p)
        n = 10**6
        out = measure_stream(generate_stream(p, n, 8), usd, 9)
        sigma = math.sqrt(usd.p_c * (1 - usd.p_c) / n)
        assert abs(np.mean(out != INCONCLUSIVE) - 0.0492090) < 5 * sigma


class TestBestSubblock:
    @pytest.mark.parametrize(
        "block,expected",
        [
            ([B1, B0], (1, 2)),
            ([B0, B1], None),
            ([B1, D, D, D, B0], (1, 5)),
            ([B1, B0, D, B1, B1, B0], (1, 6)),
            ([D, B1, B1], (2, 2)),
            ([B1, D], None),
            ([B1, B1], (1, 1)),
            ([B0, B0], (2, 2)),
            ([D, D, D], None),
        ],
    )
    def test_examples(self, block, expected):
        assert best_subblock(block) == expected

    @pytest.mark.parametrize("k", range(1, 7))
    def test_exhaustive_maximality(self, k):
        for block in itertools.product(range(3), repeat=k):
            got = best_subblock(block)
            assert got == longest_valid_range(block)
            if got is not None:
                assert valid_range(block, *got)

    def test_interior_filling(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            k = int(rng.integers(2, 12))
            block = [B1, *rng.integers(0, 3, k - 2), B0]
            assert best_subblock(block) == (1, k)


class TestEveTransform:
    def test_all_inconclusive(self):
        out = eve_transform(np.full(20, INCONCLUSIVE), 10)
        assert np.all(out.transmitted == V)

    def test_resend_pair(self):
        out = eve_transform([B1, B0, INCONCLUSIVE], 10)
        np.testing.assert_array_equal(out.transmitted, [B1, B0, V])
        # the end of the stream closes a trailing empty block
        assert out.block_k.tolist() == [2, 0]

    def test_drop_pair(self):
        out = eve_transform([B0, B1, INCONCLUSIVE], 10)
        np.testing.assert_array_equal(out.transmitted, [V, V, V])

    def test_single_conclusive_is_dropped(self):
        out = eve_transform([INCONCLUSIVE, B1, INCONCLUSIVE, B0], 10)
        assert np.all(out.transmitted == V)

    def test_truncation_forces_vacuum(self):
        # with m_max = 2 the third conclusive result is overwritten
        out = eve_transform([B1, B0, B1, B1, B0, INCONCLUSIVE], 2)
        np.testing.assert_array_equal(out.transmitted, [B1, B0, V, B1, B0, V])
        assert out.block_k.tolist() == [2, 2, 0]

    @pytest.mark.parametrize("m_max", [2, 3, 5, 10])
    @pytest.mark.parametrize("p_c", [0.2, 0.6, 0.95])
    def test_matches_signal_by_signal_reference(self, m_max, p_c):
        rng = np.random.default_rng(int(1000 * p_c) + m_max)
        n = 3000
        sig = rng.integers(0, 3, n)
        outcomes = np.where(rng.random(n) < p_c, sig, INCONCLUSIVE)
        got = eve_transform(outcomes, m_max)
        assert got.transmitted.tolist() == eve_reference(outcomes.tolist(), m_max)
        assert int(got.block_len.sum()) == n + 1

    def test_preservation(self):
        p = ProtocolParams(0.8, 0.4, 6)
        alice = generate_stream(p, 50_000, 11)
        eve = eve_transform(measure_stream(alice, optimal_usd(p), 12), p.m_max)
        assert eve.transmitted.size == alice.size
        sent = eve.transmitted != V
        np.testing.assert_array_equal(eve.transmitted[sent], alice[sent])


class TestBob:
    def test_vacuum(self):
        t = bob_count(np.full(10, V), np.full(10, B0))
        assert (t.clicks, t.qber_violations, t.monitored_pair_violations) == (0, 0, 0)

    def test_resent_pair(self):
        t = bob_count([B1, B0], [B1, B0])
        assert t.clicks == 2 and t.qber_violations == 0
        assert t.bits.tolist() == [1, 0]

    def test_decoy_counts_once(self):
        t = bob_count([D], [D])
        assert t.clicks == 1 and t.qber_violations == 0

    def test_wrong_bit_is_an_error(self):
        assert bob_count([B1, V], [B0, V]).qber_violations == 1
        assert bob_count([D], [B0]).qber_violations == 1

    def test_broken_monitored_pair(self):
        t = bob_count([V, D], [D, D])
        assert t.monitored_pair_violations >= 1

    def test_cut_at_vacuum_pulse_is_safe(self):
        # Alice: B0 B1 = (1,0)(0,1); dropping either signal leaves no broken pair
        assert bob_count([B0, V], [B0, B1]).monitored_pair_violations == 0
        # Alice: B1 B1 = (0,1)(0,1); no two adjacent pulses are both occupied
        assert bob_count([B1, V], [B1, B1]).monitored_pair_violations == 0
        # Alice: B1 D = (0,1)(1,1); keeping only B1 breaks the (1,1) pair across signals
        assert bob_count([B1, V], [B1, D]).monitored_pair_violations == 1

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            bob_count([V, V], [V])


class TestRunSimulation:
    def test_reproducible(self):
        p = ProtocolParams(0.3, 0.155, 10)
        a = run_simulation(p, 50_000, 99)
        b = run_simulation(p, 50_000, 99)
        assert a.to_json() == b.to_json()
        assert run_simulation(p, 50_000, 100).to_json() != a.to_json()

    def test_parallel_merge_is_deterministic(self):
        p = ProtocolParams(0.3, 0.155, 10)
        serial = run_simulation(p, 40_000, 5, segments=4)
        pooled = run_simulation(p, 40_000, 5, segments=4, workers=2)
        assert serial.to_json() == pooled.to_json()
        assert serial.n_signals == 40_000

    def test_zero_intensity(self):
        r = run_simulation(ProtocolParams(0.0), 10_000, 1)
        assert r.clicks == 0 and r.gain_estimate == 0.0

    def test_rejects(self):
        with pytest.raises(ValueError):
            run_simulation(ProtocolParams(0.1), 9_999, 1)
        with pytest.raises(ValueError):
            run_simulation(ProtocolParams(0.1), 10_000, -1)
        with pytest.raises(ValueError):
            run_simulation(ProtocolParams(0.1), 10_000, 2**64)

    def test_json_schema(self):
        r = run_simulation(ProtocolParams(0.2, 0.155, 4), 10_000, 3)
        d = json.loads(r.to_json())
        assert set(d) == {
            "n_signals", "clicks", "gain_estimate", "gain_std_error",
            "qber_violations", "monitored_pair_violations", "seed", "histogram",
        }
        assert d["gain_estimate"] == d["clicks"] / d["n_signals"]
        assert len(d["histogram"]) == 5

    @pytest.mark.parametrize("mu,f,m_max", [(0.06, 0.155, 10), (0.5, 0.155, 10), (1.0, 0.5, 4)])
    def test_histogram_matches_block_distribution(self, mu, f, m_max):
        p = ProtocolParams(mu, f, m_max)
        r = run_simulation(p, 10**6, 31)
        probs = np.array(BlockDistribution.from_pc(optimal_usd(p).p_c, m_max).as_list())
        obs = np.array(r.block_length_histogram, dtype=float)
        exp = probs * obs.sum()
        # pool the sparse tail so every expected count is at least 5
        cut = int(np.flatnonzero(exp >= 5)[-1])
        obs = np.append(obs[:cut], obs[cut:].sum())
        exp = np.append(exp[:cut], exp[cut:].sum())
        chi2 = float(((obs - exp) ** 2 / exp).sum())
        assert chi2 < stats.chi2.ppf(0.999, obs.size - 1)

    @pytest.mark.parametrize("mu,f,m_max", [(0.3, 0.155, 3), (1.0, 0.5, 10), (2.0, 0.6, 6)])
    def test_gain_agrees_with_analytics(self, mu, f, m_max):
        p = ProtocolParams(mu, f, m_max)
        r = run_simulation(p, 10**6, 17)
        assert abs(r.gain_estimate - gain_zero(p)) < 5 * r.gain_std_error
        assert r.qber_violations == 0 and r.monitored_pair_violations == 0
