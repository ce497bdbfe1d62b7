"""Beam configuration, scheduling metrics, and relay-set selection.

Each pair announces a random beamforming matrix V for the first hop and an
interference/signal space split (Q, U) for the second hop. Relay candidates
score themselves per (pair, stream) slot: stage 1 sums the interference a
relay would receive from all active beams plus the leakage it would generate
into other destinations; stage 2 (the total interference level, TIL) adds the
interference arriving from the already-selected first relay set. The
distributed timer protocol is emulated as a deterministic greedy: the
globally smallest pending metric wins each round, the winner withdraws from
all other slots and the slot closes for everyone else.
"""

from dataclasses import dataclass
from math import ceil, log2

import numpy as np

from .channel import ChannelRealization, NetworkConfig, check_mode_feasible
from .errors import InfeasibleSelectionError, InvalidArgumentError
from .linalg import complex_gaussian, random_unitary, split_spaces


@dataclass(frozen=True)
class BeamConfig:
    """Per-pair beamforming data: V (M x M unitary), Q (M x M-S), U (M x S)."""

    V: np.ndarray
    Q: np.ndarray
    U: np.ndarray


@dataclass(frozen=True)
class RelayAssignment:
    """Selected relay sets as (pair, stream) -> relay-index maps.

    pi1/pi2 are integer arrays of shape (K, S); pi2 is None in the single-set
    modes. idle holds the relays left out of both sets.
    """

    pi1: np.ndarray
    pi2: np.ndarray | None
    idle: frozenset


def make_beam_configs(cfg: NetworkConfig, rng: np.random.Generator) -> list[BeamConfig]:
    """Draw the K independent per-pair beam configurations for one block."""
    configs = []
    for _ in range(cfg.K):
        v = random_unitary(cfg.M, rng)
        q, u = split_spaces(cfg.M, cfg.S, rng)
        configs.append(BeamConfig(V=v, Q=q, U=u))
    return configs


def _check_indices(cfg_shape, n, k, s):
    nn, kk, ss = cfg_shape
    if not (0 <= n < nn and 0 <= k < kk and 0 <= s < ss):
        raise InvalidArgumentError(
            f"index (n={n}, k={k}, s={s}) out of range for (N={nn}, K={kk}, S={ss})"
        )


def metric_stage1(
    chan: ChannelRealization, beams: list[BeamConfig], n: int, k: int, s: int
) -> float:
    """Stage-1 scheduling metric of relay n for stream s of pair k.

    Sum of 2*S*K - S - 1 squared channel gains: other beams of source k,
    every beam of every other source, and the leakage into every other
    destination's signal space. Reference implementation; the sweep code
    uses the vectorized :func:`stage1_metric_table`.
    """
    nn, kk, _ = chan.hop1.shape
    ss = beams[0].U.shape[1]
    _check_indices((nn, kk, ss), n, k, s)
    own = 0.0
    for t in range(ss):
        if t != s:
            own += abs(beams[k].V[:, t] @ chan.hop1[n, k]) ** 2
    others = 0.0
    for j in range(kk):
        if j == k:
            continue
        for t in range(ss):
            others += abs(beams[j].V[:, t] @ chan.hop1[n, j]) ** 2
    leakage = 0.0
    for j in range(kk):
        if j != k:
            leakage += np.sum(np.abs(beams[j].U.conj().T @ chan.hop2[j, n]) ** 2)
    return float(own + others + leakage)


def metric_stage2(
    chan: ChannelRealization,
    beams: list[BeamConfig],
    pi1: np.ndarray,
    n: int,
    k: int,
    s: int,
) -> float:
    """Total interference level (TIL) of candidate n for slot (k, s).

    Stage-1 metric plus the S*K inter-relay gains from the first selected
    set; only relays outside that set may evaluate it.
    """
    members = np.asarray(pi1).ravel()
    if n in members:
        raise InvalidArgumentError(f"relay {n} already belongs to the first set")
    base = metric_stage1(chan, beams, n, k, s)
    inter = float(np.sum(np.abs(chan.relay[n, members]) ** 2))
    return base + inter


def _stage1_table_arrays(
    hop1: np.ndarray, hop2: np.ndarray, v_stack: np.ndarray, u_stack: np.ndarray
) -> np.ndarray:
    """Vectorized stage-1 metrics for every (relay, pair, stream).

    hop1: (N, K, M); hop2: (K, N, M); v_stack: (K, M, S) used beam columns;
    u_stack: (K, M, S) signal spaces. Returns (N, K, S).
    """
    beam_pow = np.abs(np.einsum("jmt,njm->njt", v_stack, hop1)) ** 2
    leak = np.sum(np.abs(np.einsum("jms,jnm->jns", u_stack.conj(), hop2)) ** 2, axis=2)
    total_beam = beam_pow.sum(axis=(1, 2))
    total_leak = leak.sum(axis=0)
    # total over all beams minus the desired one; total leakage minus own pair
    table = (
        total_beam[:, None, None]
        - beam_pow
        + total_leak[:, None, None]
        - leak.T[:, :, None]
    )
    return table


def stage1_metric_table(chan: ChannelRealization, beams: list[BeamConfig]) -> np.ndarray:
    """Stage-1 metric values for all relays and slots, shape (N, K, S)."""
    s = beams[0].U.shape[1]
    v_stack = np.stack([b.V[:, :s] for b in beams])
    u_stack = np.stack([b.U for b in beams])
    return _stage1_table_arrays(chan.hop1, chan.hop2, v_stack, u_stack)


def inter_relay_sums(relay_cols: np.ndarray) -> np.ndarray:
    """Per-relay sum of squared inter-relay gains toward the first set.

    relay_cols holds the coefficients between every relay and the S*K
    members of the first set, shape (N, S*K).
    """
    return np.sum(np.abs(relay_cols) ** 2, axis=1)


def stage2_metric_table(
    stage1_table: np.ndarray, chan: ChannelRealization, pi1: np.ndarray
) -> np.ndarray:
    """TIL values for all relays and slots given the first set, shape (N, K, S).

    Rows belonging to the first set are meaningless and must be excluded by
    the caller when selecting.
    """
    members = np.asarray(pi1).ravel()
    sums = inter_relay_sums(chan.relay[:, members])
    return stage1_table + sums[:, None, None]


def select_set(metrics: np.ndarray, excluded, K: int, S: int) -> np.ndarray:
    """Emulate the distributed timer selection over one metric table.

    Repeats S*K times: the globally smallest metric among still-candidate
    relays and still-open slots wins; the winning relay leaves all other
    slots and the slot closes. Exact ties resolve by lowest (relay, pair,
    stream), the order np.argmin scans.

    Returns a (K, S) array mapping each slot to its relay index.
    """
    metrics = np.asarray(metrics, dtype=float)
    n = metrics.shape[0]
    if metrics.shape[1] != K or metrics.shape[2] != S:
        raise InvalidArgumentError(
            f"metric table shape {metrics.shape} does not match (N, {K}, {S})"
        )
    excluded = frozenset(int(e) for e in excluded)
    if any(e < 0 or e >= n for e in excluded):
        raise InvalidArgumentError("excluded relay index out of range")
    if n - len(excluded) < S * K:
        raise InfeasibleSelectionError(
            f"{n - len(excluded)} candidates cannot fill {S * K} slots"
        )
    work = metrics.copy()
    if excluded:
        work[sorted(excluded), :, :] = np.inf
    out = np.full((K, S), -1, dtype=int)
    for _ in range(S * K):
        flat = int(np.argmin(work))
        rn, rk, rs = np.unravel_index(flat, work.shape)
        if not np.isfinite(work[rn, rk, rs]):
            raise InfeasibleSelectionError("ran out of finite metric values")
        out[rk, rs] = rn
        work[rn, :, :] = np.inf
        work[:, rk, rs] = np.inf
    return out


def select_both_sets(
    chan: ChannelRealization, beams: list[BeamConfig], cfg: NetworkConfig
) -> RelayAssignment:
    """Select the two alternating relay sets for one block.

    The first set minimizes the stage-1 metrics over all N candidates; the
    second minimizes the TIL over the remaining N - S*K.
    """
    check_mode_feasible(cfg, "alternate")
    table1 = stage1_metric_table(chan, beams)
    pi1 = select_set(table1, frozenset(), cfg.K, cfg.S)
    table2 = stage2_metric_table(table1, chan, pi1)
    pi2 = select_set(table2, frozenset(int(x) for x in pi1.ravel()), cfg.K, cfg.S)
    used = set(pi1.ravel().tolist()) | set(pi2.ravel().tolist())
    idle = frozenset(range(cfg.N)) - frozenset(used)
    return RelayAssignment(pi1=pi1, pi2=pi2, idle=idle)


def signaling_overhead_bits(K: int, S: int) -> int:
    """Bits exchanged by the timer protocol to announce both relay sets."""
    if K < 1 or S < 1:
        raise InvalidArgumentError(f"K and S must be >= 1, got K={K}, S={S}")
    slots = S * K
    return 2 * slots * ceil(log2(slots)) if slots > 1 else 0


def sample_stage1_metrics(
    K: int, S: int, M: int, count: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw `count` i.i.d. stage-1 metric samples for an unselected relay.

    Batches the relays of a single oversized block: conditional on any fixed
    beam matrices the per-relay metrics are exactly Gamma(2SK-S-1, 1) and
    independent across relays, so sharing one beam draw is statistically
    exact.
    """
    beams = make_beam_configs(NetworkConfig(K=K, N=S * K, M=M, S=S, snr=1.0), rng)
    v_stack = np.stack([b.V[:, :S] for b in beams])
    u_stack = np.stack([b.U for b in beams])
    hop1 = complex_gaussian(rng, (count, K, M))
    hop2 = complex_gaussian(rng, (K, count, M))
    return _stage1_table_arrays(hop1, hop2, v_stack, u_stack)[:, 0, 0]


def sample_til_metrics(
    K: int, S: int, M: int, count: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw `count` i.i.d. TIL samples for a relay outside the first set."""
    stage1 = sample_stage1_metrics(K, S, M, count, rng)
    inter = np.sum(np.abs(complex_gaussian(rng, (count, S * K))) ** 2, axis=1)
    return stage1 + inter
