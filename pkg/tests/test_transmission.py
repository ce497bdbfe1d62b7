import dataclasses

import numpy as np
import pytest

from msond import (
    ChannelRealization,
    InvalidArgumentError,
    MODE_ALTERNATE,
    MODE_FULL_DUPLEX,
    MODE_NON_ALTERNATE,
    NetworkConfig,
    RelayAssignment,
    SingularMatrixError,
    draw_block,
    make_beam_configs,
    select_both_sets,
    simulate_slot,
    sinr_hop1,
    sinr_hop2,
    sum_rate,
    zf_equalizer,
)
from msond.transmission import effective_columns, hop1_interference, hop_sinrs


def make_instance(K=2, S=2, N=10, M=4, snr=10.0, seed=0, L=1001):
    cfg = NetworkConfig(K=K, N=N, M=M, S=S, snr=snr, L=L)
    rng = np.random.default_rng(seed)
    chan = draw_block(cfg, rng)
    beams = make_beam_configs(cfg, rng)
    assignment = select_both_sets(chan, beams, cfg)
    return cfg, chan, beams, assignment


def single_set(assignment):
    return RelayAssignment(pi1=assignment.pi1, pi2=None, idle=assignment.idle)


class TestSinrHop1:
    def test_interference_free_reduction(self):
        cfg, chan, beams, a = make_instance(K=1, S=1, N=4, seed=1)
        quiet = ChannelRealization(
            hop1=chan.hop1, hop2=chan.hop2, relay=np.zeros_like(chan.relay)
        )
        got = sinr_hop1(quiet, beams, a, 1, 0, 0, cfg.snr)
        r = int(a.pi1[0, 0])
        want = cfg.snr * abs(beams[0].V[:, 0] @ chan.hop1[r, 0]) ** 2
        assert got == pytest.approx(want, rel=1e-12)

    def test_vanishes_with_snr(self):
        cfg, chan, beams, a = make_instance(seed=2)
        assert sinr_hop1(chan, beams, a, 1, 0, 0, 1e-12) < 1e-9

    def test_mode_assignment_mismatch(self):
        cfg, chan, beams, a = make_instance(seed=3)
        with pytest.raises(InvalidArgumentError):
            sinr_hop1(chan, beams, single_set(a), 1, 0, 0, cfg.snr, MODE_ALTERNATE)
        with pytest.raises(InvalidArgumentError):
            sinr_hop1(chan, beams, a, 1, 0, 0, cfg.snr, MODE_NON_ALTERNATE)
        with pytest.raises(InvalidArgumentError):
            sinr_hop1(chan, beams, single_set(a), 2, 0, 0, cfg.snr, MODE_NON_ALTERNATE)

    def test_full_duplex_rsinr_in_denominator(self):
        cfg, chan, beams, a = make_instance(seed=4)
        solo = single_set(a)
        lo = sinr_hop1(chan, beams, solo, 1, 0, 0, cfg.snr, MODE_FULL_DUPLEX, rsinr=0.0)
        hi = sinr_hop1(chan, beams, solo, 1, 0, 0, cfg.snr, MODE_FULL_DUPLEX, rsinr=100.0)
        assert hi < lo


class TestZfEqualizer:
    def test_scalar_case(self):
        cfg, chan, beams, a = make_instance(K=1, S=1, N=4, seed=5)
        f = zf_equalizer(beams[0].U, chan, a, 1, 0)
        g = effective_columns(beams[0].U, chan.hop2[0], a.pi1[0])
        assert (f.conj().T @ g)[0, 0] == pytest.approx(1.0, abs=1e-9)

    def test_identity_property(self):
        cfg, chan, beams, a = make_instance(seed=6)
        for b in (1, 2):
            for k in range(cfg.K):
                f = zf_equalizer(beams[k].U, chan, a, b, k)
                pi = a.pi1 if b == 1 else a.pi2
                g = effective_columns(beams[k].U, chan.hop2[k], pi[k])
                assert np.max(np.abs(f.conj().T @ g - np.eye(cfg.S))) < 1e-9

    def test_duplicate_relay_vectors_singular(self):
        cfg, chan, beams, a = make_instance(seed=7)
        hop2 = chan.hop2.copy()
        r0, r1 = int(a.pi1[0, 0]), int(a.pi1[0, 1])
        hop2[0, r1] = hop2[0, r0]
        bad = ChannelRealization(hop1=chan.hop1, hop2=hop2, relay=chan.relay)
        with pytest.raises(SingularMatrixError):
            zf_equalizer(beams[0].U, bad, a, 1, 0)


class TestSinrHop2:
    def test_single_pair_reduction(self):
        cfg, chan, beams, a = make_instance(K=1, S=2, N=6, seed=8)
        f = zf_equalizer(beams[0].U, chan, a, 1, 0)
        got = sinr_hop2(beams[0].U, f, chan, a, 1, 0, 0, cfg.snr)
        want = cfg.snr / np.sum(np.abs(f[:, 0]) ** 2)
        assert got == pytest.approx(want, rel=1e-12)

    def test_zeroed_cross_pair_matches_single_pair(self):
        cfg, chan, beams, a = make_instance(seed=9)
        hop2 = chan.hop2.copy()
        hop2[0, a.pi1[1].ravel()] = 0.0
        quiet = ChannelRealization(hop1=chan.hop1, hop2=hop2, relay=chan.relay)
        f = zf_equalizer(beams[0].U, quiet, a, 1, 0)
        got = sinr_hop2(beams[0].U, f, quiet, a, 1, 0, 0, cfg.snr)
        want = cfg.snr / np.sum(np.abs(f[:, 0]) ** 2)
        assert got == pytest.approx(want, rel=1e-12)


class TestSimulateSlot:
    def test_clean_single_link(self):
        cfg, chan, beams, a = make_instance(K=1, S=1, N=4, seed=10)
        quiet = ChannelRealization(
            hop1=chan.hop1, hop2=chan.hop2, relay=np.zeros_like(chan.relay)
        )
        x = np.array([[0.6 + 0.8j]])
        obs = simulate_slot(quiet, beams, a, x, np.zeros((1, 1)), slot=1)
        r = int(a.pi1[0, 0])
        want = (beams[0].V[:, 0] @ chan.hop1[r, 0]) * x[0, 0]
        assert obs.relay_rx[(0, 0)].total == pytest.approx(want, abs=1e-12)

    def test_zero_forcing_identity(self):
        cfg, chan, beams, a = make_instance(seed=11)
        for k in range(cfg.K):
            for s in range(cfg.S):
                relay_symbols = np.zeros((cfg.K, cfg.S), dtype=complex)
                relay_symbols[k, s] = 1.0
                hop2 = chan.hop2.copy()
                for j in range(cfg.K):
                    if j != k:
                        hop2[k, a.pi2[j].ravel()] = 0.0  # mute cross-pair paths
                quiet = ChannelRealization(hop1=chan.hop1, hop2=hop2, relay=chan.relay)
                obs = simulate_slot(
                    quiet, beams, a, np.zeros((cfg.K, cfg.S)), relay_symbols, slot=1
                )
                assert obs.dest_rx[(k, s)].total == pytest.approx(1.0, abs=1e-9)

    def test_exact_power_decomposition(self):
        # one-hot symbols extract each coefficient; the squared sums must
        # reproduce the closed-form interference groups exactly
        cfg, chan, beams, a = make_instance(seed=12)
        K, S = cfg.K, cfg.S
        for k in range(K):
            for s in range(S):
                own = others = 0.0
                for j in range(K):
                    for t in range(S):
                        src = np.zeros((K, S), dtype=complex)
                        src[j, t] = 1.0
                        obs = simulate_slot(chan, beams, a, src, np.zeros((K, S)), slot=1)
                        terms = obs.relay_rx[(k, s)]
                        own += abs(terms.own_beams) ** 2
                        others += abs(terms.other_sources) ** 2
                inter = 0.0
                for j in range(K):
                    for t in range(S):
                        rel = np.zeros((K, S), dtype=complex)
                        rel[j, t] = 1.0
                        obs = simulate_slot(chan, beams, a, np.zeros((K, S)), rel, slot=1)
                        inter += abs(obs.relay_rx[(k, s)].inter_relay) ** 2
                ib, is_, ir = hop1_interference(chan, beams, a, 1, k, s)
                assert own == pytest.approx(ib, abs=1e-10)
                assert others == pytest.approx(is_, abs=1e-10)
                assert inter == pytest.approx(ir, abs=1e-10)

    def test_monte_carlo_power_accounting(self):
        cfg, chan, beams, a = make_instance(seed=13)
        rng = np.random.default_rng(99)
        k, s = 0, 1
        powers = {"own_beams": [], "other_sources": [], "inter_relay": []}
        for _ in range(10_000):
            src = np.exp(2j * np.pi * rng.random((cfg.K, cfg.S)))
            rel = np.exp(2j * np.pi * rng.random((cfg.K, cfg.S)))
            obs = simulate_slot(chan, beams, a, src, rel, slot=1)
            terms = obs.relay_rx[(k, s)]
            powers["own_beams"].append(abs(terms.own_beams) ** 2)
            powers["other_sources"].append(abs(terms.other_sources) ** 2)
            powers["inter_relay"].append(abs(terms.inter_relay) ** 2)
        ib, is_, ir = hop1_interference(chan, beams, a, 1, k, s)
        assert np.mean(powers["own_beams"]) == pytest.approx(ib, rel=0.02)
        assert np.mean(powers["other_sources"]) == pytest.approx(is_, rel=0.02)
        assert np.mean(powers["inter_relay"]) == pytest.approx(ir, rel=0.02)

    def test_even_slot_swaps_roles(self):
        cfg, chan, beams, a = make_instance(seed=14)
        src = np.ones((cfg.K, cfg.S), dtype=complex)
        rel = np.ones((cfg.K, cfg.S), dtype=complex)
        odd = simulate_slot(chan, beams, a, src, rel, slot=1)
        even = simulate_slot(chan, beams, a, src, rel, slot=2)
        assert odd.relay_rx.keys() == even.relay_rx.keys()
        assert odd.relay_rx[(0, 0)].total != even.relay_rx[(0, 0)].total

    def test_non_alternate_slots(self):
        cfg, chan, beams, a = make_instance(seed=15)
        solo = single_set(a)
        src = np.ones((cfg.K, cfg.S), dtype=complex)
        rel = np.ones((cfg.K, cfg.S), dtype=complex)
        odd = simulate_slot(chan, beams, solo, src, rel, slot=1, mode=MODE_NON_ALTERNATE)
        assert odd.relay_rx and not odd.dest_rx
        even = simulate_slot(chan, beams, solo, src, rel, slot=2, mode=MODE_NON_ALTERNATE)
        assert even.dest_rx and not even.relay_rx
        # sources and relays never transmit together: no inter-relay term
        assert all(t.inter_relay == 0 for t in odd.relay_rx.values())


class TestSumRate:
    def test_vanishes_with_snr(self):
        cfg, chan, beams, a = make_instance(seed=16)
        tiny = dataclasses.replace(cfg, snr=1e-12)
        report = sum_rate(chan, beams, a, tiny, MODE_ALTERNATE)
        assert report.sum_rate < 1e-9

    def test_per_stream_sums_to_total(self):
        cfg, chan, beams, a = make_instance(seed=17)
        report = sum_rate(chan, beams, a, cfg, MODE_ALTERNATE)
        assert report.sum_rate == pytest.approx(float(report.per_stream.sum()))
        assert np.all(report.per_stream >= 0)

    def test_large_l_prelog_limit(self):
        cfg, chan, beams, a = make_instance(seed=18, L=3)
        wide = dataclasses.replace(cfg, L=100_001)
        r3 = sum_rate(chan, beams, a, cfg, MODE_ALTERNATE)
        rw = sum_rate(chan, beams, a, wide, MODE_ALTERNATE)
        # same channels: totals differ only by the (L-1)/L pre-log
        assert rw.sum_rate / r3.sum_rate == pytest.approx((100_000 / 100_001) / (2 / 3))
        per_slot_pair = rw.sum_rate / (100_000 / 100_001)
        assert per_slot_pair == pytest.approx(r3.sum_rate * 3 / 2)

    def test_monotone_in_snr(self):
        cfg, chan, beams, a = make_instance(seed=19)
        rates = []
        for db in range(0, 41, 5):
            point = dataclasses.replace(cfg, snr=10 ** (db / 10))
            rates.append(sum_rate(chan, beams, a, point, MODE_ALTERNATE).sum_rate)
        assert all(b >= a_ - 1e-12 for a_, b in zip(rates, rates[1:]))

    def test_full_duplex_monotone_in_rsinr(self):
        cfg, chan, beams, a = make_instance(seed=20)
        solo = single_set(a)
        rates = [
            sum_rate(chan, beams, solo, cfg, MODE_FULL_DUPLEX, rsinr=10 ** (db / 10)).sum_rate
            for db in range(0, 31, 5)
        ]
        assert all(b <= a_ + 1e-12 for a_, b in zip(rates, rates[1:]))

    def test_full_duplex_needs_rsinr(self):
        cfg, chan, beams, a = make_instance(seed=21)
        with pytest.raises(InvalidArgumentError):
            sum_rate(chan, beams, single_set(a), cfg, MODE_FULL_DUPLEX)

    def test_rate_below_interference_free_bound(self):
        cfg, chan, beams, a = make_instance(seed=22)
        for b in (1, 2):
            s1, s2 = hop_sinrs(chan, beams, a, cfg, b, MODE_ALTERNATE)
            pi = a.pi1 if b == 1 else a.pi2
            for k in range(cfg.K):
                for s in range(cfg.S):
                    gain = abs(beams[k].V[:, s] @ chan.hop1[int(pi[k, s]), k]) ** 2
                    bound = 0.5 * np.log2(1 + cfg.snr * gain)
                    rate = 0.5 * np.log2(1 + min(s1[k, s], s2[k, s]))
                    assert rate <= bound + 1e-12

    def test_non_alternate_uses_half_prelog(self):
        cfg, chan, beams, a = make_instance(seed=23)
        solo = single_set(a)
        report = sum_rate(chan, beams, solo, cfg, MODE_NON_ALTERNATE)
        s1, s2 = hop_sinrs(chan, beams, solo, cfg, 1, MODE_NON_ALTERNATE)
        want = 0.5 * np.log2(1 + np.minimum(s1, s2)).sum()
        assert report.sum_rate == pytest.approx(float(want))
