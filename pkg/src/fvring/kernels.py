"""Hot numeric kernels: Hamiltonian matvec and diagonal builders.

Two interchangeable backends. The default uses numba @njit kernels; setting
the environment variable ``FVRING_BACKEND=numpy`` (or a failed numba import)
selects a pure-numpy path producing the same results. ``benchmarks/`` compares
the two.

All kernels operate on length-2^L arrays indexed by spin configuration:
bit i of the index is 1 for spin-up at site i, and z_i = +/-1 accordingly.
"""

import os

import numpy as np

BACKEND = os.environ.get("FVRING_BACKEND", "numba").lower()
if BACKEND not in ("numba", "numpy"):
    raise ValueError(f"FVRING_BACKEND must be 'numba' or 'numpy', got {BACKEND!r}")

if BACKEND == "numba":
    try:
        import numba
        from numba import njit, prange
    except ImportError:  # pragma: no cover - exercised only without numba
        BACKEND = "numpy"

# serial kernels win below this dimension; parallel above
_PARALLEL_DIM = 1 << 15


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------

if BACKEND == "numba":

    @njit(cache=True)
    def _matvec_serial(diag, g, L, psi, out):
        n = psi.shape[0]
        for a in range(n):
            acc = diag[a] * psi[a]
            for i in range(L):
                acc -= g * psi[a ^ (1 << i)]
            out[a] = acc

    @njit(cache=True, parallel=True)
    def _matvec_parallel(diag, g, L, psi, out):
        n = psi.shape[0]
        for a in prange(n):
            acc = diag[a] * psi[a]
            for i in range(L):
                acc -= g * psi[a ^ (1 << i)]
            out[a] = acc

    @njit(cache=True)
    def _popcount(x):
        c = 0
        while x:
            x &= x - 1
            c += 1
        return c

    @njit(cache=True)
    def _bond_diagonal(L, couplings, h):
        n = 1 << L
        out = np.empty(n, dtype=np.float64)
        for a in range(n):
            e = 0.0
            for i in range(L):
                zi = 1.0 if (a >> i) & 1 else -1.0
                zj = 1.0 if (a >> ((i + 1) % L)) & 1 else -1.0
                e += h * zi - couplings[i] * zi * zj
            out[a] = e
        return out

    @njit(cache=True)
    def _distance_diagonal(L, weights, h, squeeze_coeff):
        # weights[d-1] multiplies sum_i z_i z_{i+d}; the d = L/2 class on an
        # even ring double-counts each pair, so its contribution is halved.
        n = 1 << L
        mask = n - 1
        ndist = weights.shape[0]
        out = np.empty(n, dtype=np.float64)
        for a in range(n):
            mag = 2 * _popcount(a) - L
            e = h * mag - squeeze_coeff * mag * mag
            for d in range(1, ndist + 1):
                w = weights[d - 1]
                if w == 0.0:
                    continue
                rot = ((a >> d) | (a << (L - d))) & mask
                corr = L - 2 * _popcount(a ^ rot)
                if 2 * d == L:
                    corr //= 2
                e -= w * corr
            out[a] = e
        return out

    @njit(cache=True)
    def _site_z(w, L):
        n = w.shape[0]
        out = np.zeros(L, dtype=np.float64)
        for a in range(n):
            wa = w[a]
            for i in range(L):
                if (a >> i) & 1:
                    out[i] += wa
                else:
                    out[i] -= wa
        return out

    @njit(cache=True)
    def _zz_from_site0(w, L):
        n = w.shape[0]
        nr = L // 2
        out = np.zeros(nr, dtype=np.float64)
        for a in range(n):
            wa = w[a]
            z0 = 1 if a & 1 else -1
            for r in range(1, nr + 1):
                zr = 1 if (a >> r) & 1 else -1
                out[r - 1] += wa * z0 * zr
        return out

    def matvec(diag, g, L, psi, out=None):
        if out is None:
            out = np.empty_like(psi)
        if psi.shape[0] >= _PARALLEL_DIM:
            _matvec_parallel(diag, g, L, psi, out)
        else:
            _matvec_serial(diag, g, L, psi, out)
        return out

    @njit(cache=True)
    def _lanczos_extend_serial(diag, g, L, V, alphas, betas, lo, hi, w, btol):
        n = V.shape[1]
        for j in range(lo, hi):
            if j > 0:
                beta = 0.0
                for a in range(n):
                    beta += w[a].real * w[a].real + w[a].imag * w[a].imag
                beta = np.sqrt(beta)
                betas[j - 1] = beta
                if beta <= btol:
                    return j
                inv = 1.0 / beta
                for a in range(n):
                    V[j, a] = w[a] * inv
            row = V[j]
            if j > 0:
                bj = betas[j - 1]
                prev = V[j - 1]
                for a in range(n):
                    acc = diag[a] * row[a]
                    for i in range(L):
                        acc -= g * row[a ^ (1 << i)]
                    w[a] = acc - bj * prev[a]
            else:
                for a in range(n):
                    acc = diag[a] * row[a]
                    for i in range(L):
                        acc -= g * row[a ^ (1 << i)]
                    w[a] = acc
            alpha = 0.0
            for a in range(n):
                alpha += row[a].real * w[a].real + row[a].imag * w[a].imag
            alphas[j] = alpha
            for a in range(n):
                w[a] -= alpha * row[a]
        return hi

    @njit(cache=True, parallel=True)
    def _lanczos_extend_parallel(diag, g, L, V, alphas, betas, lo, hi, w, btol):
        n = V.shape[1]
        for j in range(lo, hi):
            if j > 0:
                beta = 0.0
                for a in prange(n):
                    beta += w[a].real * w[a].real + w[a].imag * w[a].imag
                beta = np.sqrt(beta)
                betas[j - 1] = beta
                if beta <= btol:
                    return j
                inv = 1.0 / beta
                for a in prange(n):
                    V[j, a] = w[a] * inv
            row = V[j]
            if j > 0:
                bj = betas[j - 1]
                prev = V[j - 1]
                for a in prange(n):
                    acc = diag[a] * row[a]
                    for i in range(L):
                        acc -= g * row[a ^ (1 << i)]
                    w[a] = acc - bj * prev[a]
            else:
                for a in prange(n):
                    acc = diag[a] * row[a]
                    for i in range(L):
                        acc -= g * row[a ^ (1 << i)]
                    w[a] = acc
            alpha = 0.0
            for a in prange(n):
                alpha += row[a].real * w[a].real + row[a].imag * w[a].imag
            alphas[j] = alpha
            for a in prange(n):
                w[a] -= alpha * row[a]
        return hi

    def lanczos_extend(diag, g, L, V, alphas, betas, lo, hi, w, btol):
        """Grow a Lanczos basis in place from index lo to hi (three-term
        recurrence, no reorthogonalization); returns the size reached, which
        is below hi on breakdown. ``w`` carries the residual between calls."""
        if V.shape[1] >= _PARALLEL_DIM:
            return _lanczos_extend_parallel(
                diag, g, L, V, alphas, betas, lo, hi, w, btol
            )
        return _lanczos_extend_serial(diag, g, L, V, alphas, betas, lo, hi, w, btol)

    @njit(cache=True)
    def _cheb_moments_serial(dscale, gscale, L, psi, mu):
        # T_k recurrence on the rescaled operator; doubling identities give
        # two moments per matvec
        n = psi.shape[0]
        n_mu = mu.shape[0]
        w0 = psi.copy()
        w1 = np.empty(n)
        scratch = np.empty(n)
        for a in range(n):
            acc = 0.5 * dscale[a] * w0[a]
            for i in range(L):
                acc -= 0.5 * gscale * w0[a ^ (1 << i)]
            w1[a] = acc
        mu0 = 1.0
        mu1 = 0.0
        for a in range(n):
            mu1 += psi[a] * w1[a]
        mu[0] = mu0
        if n_mu > 1:
            mu[1] = mu1
        k = 1
        while 2 * k + 1 < n_mu:
            d00 = 0.0
            d10 = 0.0
            for a in range(n):
                acc = dscale[a] * w1[a]
                for i in range(L):
                    acc -= gscale * w1[a ^ (1 << i)]
                nxt = acc - w0[a]
                scratch[a] = nxt
                d00 += w1[a] * w1[a]
                d10 += nxt * w1[a]
            tmp = w0
            w0 = w1
            w1 = scratch
            scratch = tmp
            mu[2 * k] = 2.0 * d00 - mu0
            mu[2 * k + 1] = 2.0 * d10 - mu1
            k += 1
        return mu

    @njit(cache=True, parallel=True)
    def _cheb_moments_parallel(dscale, gscale, L, psi, mu):
        n = psi.shape[0]
        n_mu = mu.shape[0]
        w0 = psi.copy()
        w1 = np.empty(n)
        scratch = np.empty(n)
        for a in prange(n):
            acc = 0.5 * dscale[a] * w0[a]
            for i in range(L):
                acc -= 0.5 * gscale * w0[a ^ (1 << i)]
            w1[a] = acc
        mu0 = 1.0
        mu1 = 0.0
        for a in prange(n):
            mu1 += psi[a] * w1[a]
        mu[0] = mu0
        if n_mu > 1:
            mu[1] = mu1
        k = 1
        while 2 * k + 1 < n_mu:
            d00 = 0.0
            d10 = 0.0
            for a in prange(n):
                acc = dscale[a] * w1[a]
                for i in range(L):
                    acc -= gscale * w1[a ^ (1 << i)]
                nxt = acc - w0[a]
                scratch[a] = nxt
                d00 += w1[a] * w1[a]
                d10 += nxt * w1[a]
            tmp = w0
            w0 = w1
            w1 = scratch
            scratch = tmp
            mu[2 * k] = 2.0 * d00 - mu0
            mu[2 * k + 1] = 2.0 * d10 - mu1
            k += 1
        return mu

    def chebyshev_moments(diag, g, L, psi, center, halfwidth, n_moments):
        """Moments <psi|T_k((H - center)/halfwidth)|psi> for real normalized
        psi; halfwidth must strictly bound the spectrum around center."""
        dscale = np.ascontiguousarray(2.0 * (diag - center) / halfwidth)
        gscale = 2.0 * g / halfwidth
        psi = np.ascontiguousarray(psi, dtype=np.float64)
        mu = np.zeros(n_moments)
        if psi.shape[0] >= _PARALLEL_DIM:
            return _cheb_moments_parallel(dscale, gscale, L, psi, mu)
        return _cheb_moments_serial(dscale, gscale, L, psi, mu)

    @njit(cache=True, parallel=True)
    def bessel_time_synthesis(mu, ys, out_re, out_im):
        """G(y) = sum_k (2 - delta_k0) (-i)^k J_k(y) mu_k via Miller's
        downward recurrence for the Bessel values at each y."""
        n_mu = mu.shape[0]
        for j in prange(ys.shape[0]):
            y = ys[j]
            if y < 1e-12:
                out_re[j] = mu[0]
                out_im[j] = 0.0
                continue
            k_hi = int(y + 14.0 * y ** (1.0 / 3.0) + 40.0)
            jp = 0.0  # J_{k+1}
            jc = 1e-300  # J_k at k_hi (arbitrary scale, fixed by sum rule)
            norm = 0.0
            s_re = 0.0
            s_im = 0.0
            for k in range(k_hi, -1, -1):
                if k < n_mu:
                    term = jc * mu[k]
                    q = k & 3
                    if q == 0:
                        s_re += term if k == 0 else 2.0 * term
                    elif q == 1:
                        s_im -= 2.0 * term
                    elif q == 2:
                        s_re -= 2.0 * term
                    else:
                        s_im += 2.0 * term
                if k % 2 == 0:
                    norm += jc if k == 0 else 2.0 * jc
                if k > 0:
                    jm = (2.0 * k / y) * jc - jp
                    jp = jc
                    jc = jm
                    if abs(jc) > 1e250:
                        jc *= 1e-250
                        jp *= 1e-250
                        norm *= 1e-250
                        s_re *= 1e-250
                        s_im *= 1e-250
            out_re[j] = s_re / norm
            out_im[j] = s_im / norm

    def bond_diagonal(L, couplings, h):
        return _bond_diagonal(L, np.asarray(couplings, dtype=np.float64), h)

    def distance_diagonal(L, weights, h, squeeze_coeff=0.0):
        return _distance_diagonal(
            L, np.asarray(weights, dtype=np.float64), h, squeeze_coeff
        )

    def site_z_expectations(w, L):
        return _site_z(w, L)

    def zz_correlators(w, L):
        return _zz_from_site0(w, L)


# ---------------------------------------------------------------------------
# numpy fallback
# ---------------------------------------------------------------------------

else:

    def matvec(diag, g, L, psi, out=None):
        if out is None:
            out = np.empty_like(psi)
        np.multiply(diag, psi, out=out)
        if g != 0.0:
            for i in range(L):
                # reversing the middle axis flips bit i of the index
                out -= g * psi.reshape(-1, 2, 1 << i)[:, ::-1, :].reshape(-1)
        return out

    def _z_column(L, i):
        idx = np.arange(1 << L, dtype=np.uint64)
        return ((idx >> np.uint64(i)) & np.uint64(1)).astype(np.int64) * 2 - 1

    def bond_diagonal(L, couplings, h):
        couplings = np.asarray(couplings, dtype=np.float64)
        out = np.zeros(1 << L, dtype=np.float64)
        z = [_z_column(L, i) for i in range(L)]
        for i in range(L):
            out += h * z[i] - couplings[i] * (z[i] * z[(i + 1) % L])
        return out

    def distance_diagonal(L, weights, h, squeeze_coeff=0.0):
        weights = np.asarray(weights, dtype=np.float64)
        idx = np.arange(1 << L, dtype=np.uint64)
        mask = np.uint64((1 << L) - 1)
        mag = 2 * np.bitwise_count(idx).astype(np.int64) - L
        out = h * mag - squeeze_coeff * mag.astype(np.float64) ** 2
        for d in range(1, weights.shape[0] + 1):
            w = weights[d - 1]
            if w == 0.0:
                continue
            rot = ((idx >> np.uint64(d)) | (idx << np.uint64(L - d))) & mask
            corr = L - 2 * np.bitwise_count(idx ^ rot).astype(np.int64)
            if 2 * d == L:
                corr //= 2
            out -= w * corr
        return out

    def lanczos_extend(diag, g, L, V, alphas, betas, lo, hi, w, btol):
        """Grow a Lanczos basis in place from index lo to hi (three-term
        recurrence, no reorthogonalization); returns the size reached, which
        is below hi on breakdown. ``w`` carries the residual between calls."""
        for j in range(lo, hi):
            if j > 0:
                beta = np.linalg.norm(w)
                betas[j - 1] = beta
                if beta <= btol:
                    return j
                np.multiply(w, 1.0 / beta, out=V[j])
            matvec(diag, g, L, V[j], out=w)
            if j > 0:
                w -= betas[j - 1] * V[j - 1]
            alphas[j] = np.real(np.vdot(V[j], w))
            w -= alphas[j] * V[j]
        return hi

    def chebyshev_moments(diag, g, L, psi, center, halfwidth, n_moments):
        """Moments <psi|T_k((H - center)/halfwidth)|psi> for real normalized
        psi; halfwidth must strictly bound the spectrum around center."""
        psi = np.ascontiguousarray(psi, dtype=np.float64)
        shifted = np.ascontiguousarray((diag - center) / halfwidth)
        gs = g / halfwidth
        mu = np.zeros(n_moments)
        w0 = psi.copy()
        w1 = matvec(shifted, gs, L, w0)
        mu[0] = 1.0
        mu1 = float(psi @ w1)
        if n_moments > 1:
            mu[1] = mu1
        k = 1
        scratch = np.empty_like(w0)
        while 2 * k + 1 < n_moments:
            matvec(shifted, gs, L, w1, out=scratch)
            nxt = 2.0 * scratch - w0
            mu[2 * k] = 2.0 * float(w1 @ w1) - 1.0
            mu[2 * k + 1] = 2.0 * float(nxt @ w1) - mu1
            w0, w1 = w1, nxt
            k += 1
        return mu

    def bessel_time_synthesis(mu, ys, out_re, out_im):
        """G(y) = sum_k (2 - delta_k0) (-i)^k J_k(y) mu_k, all lanes at once
        via a vectorized downward Bessel recurrence."""
        n_mu = mu.shape[0]
        y = np.where(ys < 1e-12, 1.0, ys)
        k_hi = int(np.max(y + 14.0 * y ** (1.0 / 3.0) + 40.0))
        alive = ys >= 1e-12
        jp = np.zeros_like(y)
        jc = np.where(alive, 1e-300, 0.0)
        norm = np.zeros_like(y)
        s_re = np.zeros_like(y)
        s_im = np.zeros_like(y)
        for k in range(k_hi, -1, -1):
            if k < n_mu:
                term = jc * mu[k]
                q = k & 3
                factor = 1.0 if k == 0 else 2.0
                if q == 0:
                    s_re += factor * term
                elif q == 1:
                    s_im -= 2.0 * term
                elif q == 2:
                    s_re -= 2.0 * term
                else:
                    s_im += 2.0 * term
            if k % 2 == 0:
                norm += jc if k == 0 else 2.0 * jc
            if k > 0:
                jm = (2.0 * k / y) * jc - jp
                jp = jc
                jc = jm
                big = np.abs(jc) > 1e250
                if big.any():
                    for arr in (jc, jp, norm, s_re, s_im):
                        arr[big] *= 1e-250
        safe = np.where(alive & (norm != 0.0), norm, 1.0)
        out_re[:] = np.where(alive, s_re / safe, mu[0])
        out_im[:] = np.where(alive, s_im / safe, 0.0)

    def site_z_expectations(w, L):
        return np.array([np.dot(w, _z_column(L, i)) for i in range(L)])

    def zz_correlators(w, L):
        idx = np.arange(1 << L, dtype=np.uint64)
        z0 = ((idx & np.uint64(1)).astype(np.int64) * 2 - 1).astype(np.float64)
        out = np.empty(L // 2, dtype=np.float64)
        for r in range(1, L // 2 + 1):
            zr = (((idx >> np.uint64(r)) & np.uint64(1)).astype(np.int64) * 2 - 1)
            out[r - 1] = np.dot(w, z0 * zr)
        return out


def popcounts(L):
    """Population count of every configuration index below 2^L."""
    return np.bitwise_count(np.arange(1 << L, dtype=np.uint64)).astype(np.int64)
