"""Spin-configuration encoding and ring geometry.

Configurations are L-bit integers: bit i set means spin-up (z_i = +1) at site
i, sites 0..L-1 on a periodic ring. Site arithmetic is modulo L.
"""

import numpy as np

from .errors import ResourceLimitError

L_MIN = 3
L_MAX = 28


def check_site_count(L):
    """Validate a ring size, raising for L below 3 or above the 2^L cap."""
    if not isinstance(L, (int, np.integer)):
        raise TypeError(f"L must be an integer, got {type(L).__name__}")
    if L < L_MIN:
        raise ValueError(f"ring size must be >= {L_MIN}, got {L}")
    if L > L_MAX:
        raise ResourceLimitError(
            f"L={L} exceeds the cap of {L_MAX} (state vectors hold 2^L amplitudes)"
        )
    return int(L)


def check_config(config, L):
    """Validate a configuration: integral, non-negative, no bits above L-1."""
    config = int(config)
    if config < 0 or config >> L:
        raise ValueError(f"invalid configuration {config:#x} for L={L}")
    return config


def all_up(L):
    """The all-spins-up configuration."""
    return (1 << L) - 1


def translate(config, shift, L):
    """Cyclically shift a configuration: site i -> site i + shift (mod L)."""
    config = check_config(config, L)
    shift %= L
    if shift == 0:
        return config
    mask = (1 << L) - 1
    return ((config << shift) | (config >> (L - shift))) & mask


def minimal_distance(i, j, L):
    """Minimal-image distance between sites on the ring, in [0, L//2]."""
    if not (0 <= i < L and 0 <= j < L):
        raise ValueError(f"sites must lie in [0, {L}), got ({i}, {j})")
    d = abs(i - j)
    return min(d, L - d)


def basis_magnetization(config, L):
    """Mean <Z> of a basis configuration: (popcount*2 - L)/L, in [-1, 1]."""
    config = check_config(config, L)
    return (2 * bin(config).count("1") - L) / L


def translate_state(psi, shift, L):
    """Apply the site-translation operator to an amplitude vector."""
    n = 1 << L
    if psi.shape[0] != n:
        raise ValueError(f"state has dimension {psi.shape[0]}, expected {n}")
    shift %= L
    if shift == 0:
        return psi.copy()
    idx = np.arange(n, dtype=np.uint64)
    mask = np.uint64(n - 1)
    moved = ((idx << np.uint64(shift)) | (idx >> np.uint64(L - shift))) & mask
    out = np.empty_like(psi)
    out[moved] = psi
    return out


def global_flip_state(psi, L):
    """Apply the global spin-flip X^{(x)L} operator (bitwise complement)."""
    n = 1 << L
    if psi.shape[0] != n:
        raise ValueError(f"state has dimension {psi.shape[0]}, expected {n}")
    idx = np.arange(n)
    return psi[idx ^ (n - 1)]
