"""Exact combinatorial predictions for the symmetric size-n bubble state:
opposite-spin pair counts, magnetization, and Z-Z correlators.

Everything here is integer/rational arithmetic; callers convert to float at
the output boundary. These identities double as test oracles for the
numerically constructed states.
"""

from fractions import Fraction


def _check(L, n, r=None):
    if not 1 <= n < L:
        raise ValueError(f"bubble size must satisfy 1 <= n < L, got n={n}, L={L}")
    if r is not None and not 1 <= r <= L // 2:
        raise ValueError(f"distance must satisfy 1 <= r <= L//2, got r={r}")


def opposite_pair_count(L, n, r):
    """Number of site pairs at ring distance r with opposite spins when a
    single length-n bubble is flipped: 2r below k = min(n, L-n), else 2k."""
    _check(L, n, r)
    k = min(n, L - n)
    return 2 * r if r < k else 2 * k


def predicted_correlator(L, n, r):
    """<Z_0 Z_r> on the size-n bubble state: (L - 2 N(L,n,r)) / L, exact."""
    return Fraction(L - 2 * opposite_pair_count(L, n, r), L)


def predicted_magnetization(L, n):
    """Mean magnetization of the size-n bubble state: (L - 2n) / L, exact."""
    _check(L, n)
    return Fraction(L - 2 * n, L)
