"""Hop SINRs, zero-forcing detection, per-stream rates, and a slot simulator.

Noise power is normalized to 1 and transmit power to snr, so every SINR is
built from plain squared channel gains. Decode-and-forward is modeled by the
minimum of the two hop SINRs; the slot simulator reproduces the received
scalars term by term and serves as the power-accounting oracle for the
closed-form SINR expressions.
"""

from dataclasses import dataclass, field

import numpy as np

from .channel import (
    ChannelRealization,
    NetworkConfig,
    MODE_ALTERNATE,
    MODE_FULL_DUPLEX,
    MODE_NON_ALTERNATE,
    MODES,
)
from .errors import InvalidArgumentError, SingularMatrixError
from .linalg import invert_small
from .selection import BeamConfig, RelayAssignment


def _set_map(assignment: RelayAssignment, b: int) -> np.ndarray:
    if b == 1:
        return assignment.pi1
    if b == 2:
        if assignment.pi2 is None:
            raise InvalidArgumentError("assignment has no second relay set")
        return assignment.pi2
    raise InvalidArgumentError(f"relay set index must be 1 or 2, got {b}")


def _check_mode_assignment(assignment: RelayAssignment, mode: str, b: int) -> None:
    if mode not in MODES:
        raise InvalidArgumentError(f"unknown mode {mode!r}")
    if mode == MODE_ALTERNATE and assignment.pi2 is None:
        raise InvalidArgumentError("alternate mode needs both relay sets")
    if mode != MODE_ALTERNATE:
        if assignment.pi2 is not None:
            raise InvalidArgumentError(f"{mode} mode uses a single relay set")
        if b != 1:
            raise InvalidArgumentError(f"{mode} mode only has relay set 1")


def hop1_interference(
    chan: ChannelRealization,
    beams: list[BeamConfig],
    assignment: RelayAssignment,
    b: int,
    k: int,
    s: int,
    mode: str = MODE_ALTERNATE,
) -> tuple[float, float, float]:
    """Unit-power interference sums at the receiving relay of slot (b, k, s).

    Returns (own-beam, other-source, inter-relay) squared-gain sums. The
    inter-relay part is taken over the other set in alternate mode and is
    zero otherwise: without alternate relaying sources and relays never
    transmit together, and in the full-duplex benchmark all relay-side
    interference that survives cancellation is modeled by the constant
    rsinr the SINR adds, not by per-pair draws.
    """
    _check_mode_assignment(assignment, mode, b)
    pi = _set_map(assignment, b)
    kk, ss = pi.shape
    r = int(pi[k, s])
    beam_gains = np.abs(beams[k].V[:, :ss].T @ chan.hop1[r, k]) ** 2
    ib = float(beam_gains.sum() - beam_gains[s])
    is_ = 0.0
    for j in range(kk):
        if j != k:
            is_ += float(np.sum(np.abs(beams[j].V[:, :ss].T @ chan.hop1[r, j]) ** 2))
    if mode == MODE_ALTERNATE:
        other = _set_map(assignment, 2 if b == 1 else 1).ravel()
        ir = float(np.sum(np.abs(chan.relay[r, other]) ** 2))
    else:
        ir = 0.0
    return ib, is_, ir


def sinr_hop1(
    chan: ChannelRealization,
    beams: list[BeamConfig],
    assignment: RelayAssignment,
    b: int,
    k: int,
    s: int,
    snr: float,
    mode: str = MODE_ALTERNATE,
    rsinr: float = 0.0,
) -> float:
    """Received SINR at the relay serving stream s of pair k in set b.

    rsinr is the residual self-interference-to-noise ratio (linear) and only
    enters in full-duplex mode.
    """
    pi = _set_map(assignment, b)
    r = int(pi[k, s])
    desired = snr * abs(beams[k].V[:, s] @ chan.hop1[r, k]) ** 2
    ib, is_, ir = hop1_interference(chan, beams, assignment, b, k, s, mode)
    denom = 1.0 + snr * (ib + is_ + ir)
    if mode == MODE_FULL_DUPLEX:
        denom += rsinr
    return float(desired / denom)


def effective_columns(u: np.ndarray, hop2_k: np.ndarray, relays: np.ndarray) -> np.ndarray:
    """Signal-space images U^H h of the given relays' hop-2 vectors.

    hop2_k is the (N, M) slice for one destination; returns (S, len(relays)).
    """
    return u.conj().T @ hop2_k[np.asarray(relays, dtype=int)].T


def zf_from_effective(g: np.ndarray) -> np.ndarray:
    """ZF equalizer for an S x S effective matrix: F = (G^-1)^H, so F^H G = I."""
    return invert_small(g).conj().T


def zf_equalizer(
    u: np.ndarray,
    chan: ChannelRealization,
    assignment: RelayAssignment,
    b: int,
    k: int,
) -> np.ndarray:
    """ZF equalizer F_k for destination k detecting relay set b.

    Column f_s extracts stream s: F^H applied to the signal-space image of
    the serving relays reproduces identity columns.
    """
    pi = _set_map(assignment, b)
    g = effective_columns(u, chan.hop2[k], pi[k])
    try:
        return zf_from_effective(g)
    except SingularMatrixError as exc:
        raise SingularMatrixError(f"effective matrix of pair {k} is singular: {exc}") from exc


def sinr_hop2(
    u: np.ndarray,
    f: np.ndarray,
    chan: ChannelRealization,
    assignment: RelayAssignment,
    b: int,
    k: int,
    s: int,
    snr: float,
) -> float:
    """Effective SINR of stream s at destination k after ZF detection."""
    pi = _set_map(assignment, b)
    fs = f[:, s]
    leak = 0.0
    for j in range(pi.shape[0]):
        if j == k:
            continue
        cols = effective_columns(u, chan.hop2[k], pi[j])
        leak += float(np.sum(np.abs(fs.conj() @ cols) ** 2))
    return float(snr / (float(np.sum(np.abs(fs) ** 2)) + snr * leak))


@dataclass(frozen=True)
class RelayTerms:
    """Received-scalar decomposition at a listening relay."""

    desired: complex
    own_beams: complex
    other_sources: complex
    inter_relay: complex
    noise: complex = 0.0

    @property
    def total(self) -> complex:
        return self.desired + self.own_beams + self.other_sources + self.inter_relay + self.noise


@dataclass(frozen=True)
class StreamTerms:
    """Post-detection decomposition of one destination stream."""

    desired: complex
    cross_pair: complex
    noise: complex = 0.0

    @property
    def total(self) -> complex:
        return self.desired + self.cross_pair + self.noise


@dataclass(frozen=True)
class SlotObservation:
    """Per-slot received values, keyed by (pair, stream)."""

    relay_rx: dict = field(default_factory=dict)
    dest_rx: dict = field(default_factory=dict)


def simulate_slot(
    chan: ChannelRealization,
    beams: list[BeamConfig],
    assignment: RelayAssignment,
    source_symbols: np.ndarray,
    relay_symbols: np.ndarray,
    slot: int,
    mode: str = MODE_ALTERNATE,
    noise_relay: np.ndarray | None = None,
    noise_dest: np.ndarray | None = None,
) -> SlotObservation:
    """Build the received scalars of one data slot term by term.

    source_symbols[(k, s)] ride beam s of source k toward the receiving set;
    relay_symbols[(k, s)] are forwarded by the transmitting set's slot
    (k, s) relay. Odd slots (1-based): set 1 receives and set 2 transmits;
    even slots swap. Single-set modes keep set 1 in the active role and the
    other direction silent; full-duplex does both every slot (its residual
    self-interference is a power constant, not a simulated term). Noise
    arrays are optional so the output can serve as an exact power oracle.
    """
    _check_mode_assignment(assignment, mode, 1)
    kk, ss = assignment.pi1.shape
    odd = slot % 2 == 1
    if mode == MODE_ALTERNATE:
        rx_map = assignment.pi1 if odd else assignment.pi2
        tx_map = assignment.pi2 if odd else assignment.pi1
    elif mode == MODE_NON_ALTERNATE:
        rx_map = assignment.pi1 if odd else None
        tx_map = None if odd else assignment.pi1
    else:
        rx_map = assignment.pi1
        tx_map = assignment.pi1
    source_symbols = np.asarray(source_symbols)
    relay_symbols = np.asarray(relay_symbols)

    relay_rx = {}
    if rx_map is not None:
        for k in range(kk):
            for s in range(ss):
                r = int(rx_map[k, s])
                gains_own = beams[k].V[:, :ss].T @ chan.hop1[r, k]
                desired = gains_own[s] * source_symbols[k, s]
                own = sum(
                    gains_own[t] * source_symbols[k, t] for t in range(ss) if t != s
                )
                others = 0.0 + 0.0j
                for j in range(kk):
                    if j == k:
                        continue
                    gains = beams[j].V[:, :ss].T @ chan.hop1[r, j]
                    others += gains @ source_symbols[j]
                inter = 0.0 + 0.0j
                if tx_map is not None and mode == MODE_ALTERNATE:
                    for j in range(kk):
                        for t in range(ss):
                            inter += chan.relay[r, int(tx_map[j, t])] * relay_symbols[j, t]
                z = noise_relay[k, s] if noise_relay is not None else 0.0
                relay_rx[(k, s)] = RelayTerms(
                    desired=complex(desired),
                    own_beams=complex(own),
                    other_sources=complex(others),
                    inter_relay=complex(inter),
                    noise=complex(z),
                )

    dest_rx = {}
    if tx_map is not None:
        b_tx = 1 if tx_map is assignment.pi1 else 2
        for k in range(kk):
            f = zf_equalizer(beams[k].U, chan, assignment, b_tx, k)
            own_cols = effective_columns(beams[k].U, chan.hop2[k], tx_map[k])
            zvec = (
                beams[k].U.conj().T @ noise_dest[k]
                if noise_dest is not None
                else np.zeros(ss, dtype=complex)
            )
            for s in range(ss):
                fs = f[:, s]
                desired = fs.conj() @ own_cols @ relay_symbols[k]
                cross = 0.0 + 0.0j
                for j in range(kk):
                    if j == k:
                        continue
                    cols = effective_columns(beams[k].U, chan.hop2[k], tx_map[j])
                    cross += fs.conj() @ cols @ relay_symbols[j]
                dest_rx[(k, s)] = StreamTerms(
                    desired=complex(desired),
                    cross_pair=complex(cross),
                    noise=complex(fs.conj() @ zvec),
                )
    return SlotObservation(relay_rx=relay_rx, dest_rx=dest_rx)


@dataclass(frozen=True)
class RateReport:
    """Per-stream and total achievable rates for one block."""

    mode: str
    per_stream: np.ndarray
    sum_rate: float
    snr: float
    L: int


def hop_sinrs(
    chan: ChannelRealization,
    beams: list[BeamConfig],
    assignment: RelayAssignment,
    cfg: NetworkConfig,
    b: int,
    mode: str = MODE_ALTERNATE,
    rsinr: float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Both hops' SINRs for every (pair, stream) slot of relay set b."""
    kk, ss = assignment.pi1.shape
    s1 = np.empty((kk, ss))
    s2 = np.empty((kk, ss))
    for k in range(kk):
        f = zf_equalizer(beams[k].U, chan, assignment, b, k)
        for s in range(ss):
            s1[k, s] = sinr_hop1(chan, beams, assignment, b, k, s, cfg.snr, mode, rsinr)
            s2[k, s] = sinr_hop2(beams[k].U, f, chan, assignment, b, k, s, cfg.snr)
    return s1, s2


def sum_rate(
    chan: ChannelRealization,
    beams: list[BeamConfig],
    assignment: RelayAssignment,
    cfg: NetworkConfig,
    mode: str = MODE_ALTERNATE,
    rsinr: float | None = None,
) -> RateReport:
    """Achievable per-stream rates for one block under the given mode.

    Alternate: both sets deliver, half-rate each, (L-1)/L edge loss.
    Non-alternate: one set, hops alternate slots, pre-log 1/2.
    Full-duplex benchmark: one set, pre-log 1, hop-1 degraded by rsinr.
    """
    _check_mode_assignment(assignment, mode, 1)
    if mode == MODE_FULL_DUPLEX:
        if rsinr is None:
            raise InvalidArgumentError("full-duplex mode needs an rsinr value")
    else:
        rsinr = 0.0
    kk, ss = assignment.pi1.shape
    rates = np.zeros((kk, ss))
    if mode == MODE_ALTERNATE:
        for b in (1, 2):
            s1, s2 = hop_sinrs(chan, beams, assignment, cfg, b, mode)
            rates += 0.5 * np.log2(1.0 + np.minimum(s1, s2))
        rates *= (cfg.L - 1) / cfg.L
    elif mode == MODE_NON_ALTERNATE:
        s1, s2 = hop_sinrs(chan, beams, assignment, cfg, 1, mode)
        rates = 0.5 * np.log2(1.0 + np.minimum(s1, s2))
    else:
        s1, s2 = hop_sinrs(chan, beams, assignment, cfg, 1, mode, rsinr)
        rates = np.log2(1.0 + np.minimum(s1, s2))
    return RateReport(
        mode=mode,
        per_stream=rates,
        sum_rate=float(rates.sum()),
        snr=cfg.snr,
        L=cfg.L,
    )
