"""Block-fading channel model for the K x N x K two-hop relay topology.

One block draw produces every first-hop vector (source -> relay), every
second-hop vector (relay -> destination), and the symmetric inter-relay
coefficient matrix. All coefficients are i.i.d. CN(0, 1): Rayleigh
magnitudes, unit average power.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .linalg import complex_gaussian

MODE_ALTERNATE = "alternate"
MODE_NON_ALTERNATE = "non-alternate"
MODE_FULL_DUPLEX = "full-duplex"
MODES = (MODE_ALTERNATE, MODE_NON_ALTERNATE, MODE_FULL_DUPLEX)


@dataclass(frozen=True)
class NetworkConfig:
    """Static network parameters.

    Attributes:
        K: number of source-destination pairs.
        N: number of relay candidates.
        M: antennas per source/destination node.
        S: data streams per pair (1 <= S <= M).
        snr: transmit power over noise power, linear.
        L: data slots per block (odd, >= 3).
    """

    K: int
    N: int
    M: int
    S: int
    snr: float
    L: int = 1001

    def __post_init__(self):
        if self.K < 1:
            raise ConfigurationError(f"K must be >= 1, got {self.K}")
        if not 1 <= self.S <= self.M:
            raise ConfigurationError(f"need 1 <= S <= M, got S={self.S}, M={self.M}")
        if self.N < self.S * self.K:
            raise ConfigurationError(
                f"N={self.N} cannot host S*K={self.S * self.K} relay slots"
            )
        if self.L < 3 or self.L % 2 == 0:
            raise ConfigurationError(f"L must be odd and >= 3, got {self.L}")
        if not self.snr > 0:
            raise ConfigurationError(f"snr must be positive, got {self.snr}")

    @property
    def slots(self) -> int:
        """Relay slots per selection stage (S*K)."""
        return self.S * self.K


def check_mode_feasible(cfg: NetworkConfig, mode: str) -> None:
    """Raise if cfg cannot support the given relaying mode.

    Alternate relaying selects two disjoint relay sets and therefore needs
    N >= 2*S*K; the single-set modes need only N >= S*K (already enforced
    by the config itself).
    """
    if mode not in MODES:
        raise ConfigurationError(f"unknown mode {mode!r}, expected one of {MODES}")
    if mode == MODE_ALTERNATE and cfg.N < 2 * cfg.slots:
        raise ConfigurationError(
            f"alternate mode needs N >= 2*S*K = {2 * cfg.slots}, got N={cfg.N}"
        )


@dataclass(frozen=True)
class ChannelRealization:
    """One block-fading draw.

    Attributes:
        hop1: (N, K, M) array, hop1[n, k] = channel vector source k -> relay n.
        hop2: (K, N, M) array, hop2[k, n] = channel vector relay n -> destination k.
        relay: (N, N) symmetric complex matrix of inter-relay coefficients,
            zero diagonal (self-interference is modeled separately).
    """

    hop1: np.ndarray
    hop2: np.ndarray
    relay: np.ndarray


def draw_block(cfg: NetworkConfig, rng: np.random.Generator) -> ChannelRealization:
    """Draw one independent block-fading realization for cfg."""
    if not isinstance(cfg, NetworkConfig):
        raise ConfigurationError("cfg must be a NetworkConfig")
    n, k, m = cfg.N, cfg.K, cfg.M
    hop1 = complex_gaussian(rng, (n, k, m))
    hop2 = complex_gaussian(rng, (k, n, m))
    relay = draw_relay_matrix(n, rng)
    return ChannelRealization(hop1=hop1, hop2=hop2, relay=relay)


def draw_relay_matrix(n: int, rng: np.random.Generator) -> np.ndarray:
    """Symmetric (n, n) inter-relay coefficient matrix with zero diagonal.

    Channel reciprocity (TDD) makes the coefficient between two relays the
    same in both directions, so only the upper triangle is drawn.
    """
    relay = np.zeros((n, n), dtype=complex)
    iu = np.triu_indices(n, k=1)
    relay[iu] = complex_gaussian(rng, iu[0].shape[0])
    relay = relay + relay.T
    return relay
