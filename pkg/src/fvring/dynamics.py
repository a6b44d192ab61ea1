"""Krylov time evolution and quench-observable time series.

The propagator advances in adaptive Lanczos macro-steps. Within one step the
evolved state is V y(s) with y(s) available in the small Krylov basis for any
intermediate time s, so return-amplitude samples cost one projection of the
reference state per step instead of one short evolution per sample.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import kernels
from .errors import PropagationError

DEFAULT_TOL = 1e-8
DEFAULT_SCAN_DT = 0.25
_M_MAX = 48
_CHECKPOINTS = (12, 20, 28, 36, 42, _M_MAX)
_SUB_LAG = 4  # error gauged against the basis four vectors smaller
_GROW_BELOW = 28  # accepted basis this small => try a longer next step


@dataclass(frozen=True)
class TimeGrid:
    """Uniform sample times k*dt for k = 0..floor(t_max/dt)."""

    t_max: float
    dt: float

    def __post_init__(self):
        if self.dt <= 0 or self.t_max < self.dt:
            raise ValueError("require dt > 0 and t_max >= dt")

    def times(self):
        n = int(np.floor(self.t_max / self.dt + 1e-9))
        return np.arange(n + 1) * self.dt


@dataclass
class TimeSeries:
    """Sampled observables keyed by label, on a shared time axis."""

    times: np.ndarray
    values: dict


class _StepBasis:
    """Eigen-decomposed Krylov step: coefficients of psi(t0+s) for any s."""

    def __init__(self, V, lam, Q, beta0, k):
        self.V = V
        self.lam = lam
        self.Q = Q
        self.c0 = beta0 * Q[0, :]
        self.k = k

    def coeffs(self, s):
        return self.Q @ (np.exp(-1j * self.lam * s) * self.c0)

    def coeffs_batch(self, s_values):
        phases = np.exp(-1j * np.outer(self.lam, s_values))
        return self.Q @ (phases * self.c0[:, None])

    def state(self, s):
        return self.coeffs(s) @ self.V[: self.k]


class _Propagator:
    def __init__(self, H, tol, t_total):
        self.H = H
        self.tol = tol
        self.t_total = max(abs(t_total), 1e-300)
        self.hw = max(H.halfwidth_bound(), 1e-12)
        # rows of V are Krylov vectors (contiguous for BLAS-friendly products)
        self.V = np.empty((_M_MAX + 1, H.dim), dtype=np.complex128)
        self.alphas = np.empty(_M_MAX + 1)
        self.betas = np.empty(_M_MAX + 1)
        self.w = np.empty(H.dim, dtype=np.complex128)
        self.tau_next = 10.0 / self.hw
        self.first_checkpoint = 0

    def _coeff_error(self, k, tau, beta0):
        """Difference between the step coefficients from bases k and k-4."""
        lam, Q = scipy.linalg.eigh_tridiagonal(
            self.alphas[:k], self.betas[: k - 1], check_finite=False
        )
        y = Q @ (np.exp(-1j * lam * tau) * (beta0 * Q[0, :]))
        ks = k - _SUB_LAG
        lam_s, Q_s = scipy.linalg.eigh_tridiagonal(
            self.alphas[:ks], self.betas[: ks - 1], check_finite=False
        )
        y_s = Q_s @ (np.exp(-1j * lam_s * tau) * (beta0 * Q_s[0, :]))
        err = float(np.linalg.norm(y - np.concatenate([y_s, np.zeros(_SUB_LAG)])))
        return err, lam, Q

    def _step_tol(self, tau, beta0):
        return max(self.tol * abs(tau) / self.t_total, 2e-14) * beta0

    def step(self, v, tau_request):
        """Advance v by up to tau_request; returns (tau_taken, _StepBasis)."""
        beta0 = np.linalg.norm(v)
        if beta0 == 0.0:
            raise PropagationError("cannot propagate the zero vector")
        btol = 1e-13 * beta0 * max(1.0, self.hw)
        np.multiply(v, 1.0 / beta0, out=self.V[0])
        k = 0
        sign = 1.0 if tau_request >= 0 else -1.0
        tau = sign * min(abs(tau_request), self.tau_next)
        for ci in range(len(_CHECKPOINTS)):
            target = _CHECKPOINTS[ci]
            k_new = kernels.lanczos_extend(
                self.H.diag, self.H.g, self.H.L,
                self.V, self.alphas, self.betas, k, target, self.w, btol,
            )
            if k_new < target:
                # invariant subspace: the Krylov result is exact for any tau
                k = max(k_new, 1)
                lam, Q = scipy.linalg.eigh_tridiagonal(
                    self.alphas[:k], self.betas[: k - 1], check_finite=False
                )
                return tau_request, _StepBasis(self.V, lam, Q, beta0, k)
            k = k_new
            if ci < self.first_checkpoint or k <= _SUB_LAG + 1:
                continue
            err, lam, Q = self._coeff_error(k, tau, beta0)
            if err <= self._step_tol(tau, beta0):
                if k <= _GROW_BELOW:
                    self.tau_next *= 1.3
                # next step: resume the ladder one checkpoint lower
                self.first_checkpoint = max(ci - 1, 0)
                return tau, _StepBasis(self.V, lam, Q, beta0, k)
        # full basis built: shrink tau until the coefficient error passes
        for _ in range(80):
            tau *= 0.5
            if abs(tau) < 1e-12 * max(1.0, self.t_total):
                break
            err, lam, Q = self._coeff_error(k, tau, beta0)
            if err <= self._step_tol(tau, beta0):
                self.tau_next = abs(tau)
                self.first_checkpoint = len(_CHECKPOINTS) - 2
                return tau, _StepBasis(self.V, lam, Q, beta0, k)
        raise PropagationError(
            f"Krylov step did not converge (dim {self.H.dim}, tau {tau:.3e})"
        )


def _propagate(H, psi0, out_times, tol, on_samples):
    """Drive psi0 through the sorted output times, invoking
    ``on_samples(i0, i1, basis, s_locals)`` for each step's batch of output
    times; returns the final state. All output times must share one sign."""
    out_times = np.asarray(out_times, dtype=np.float64)
    v = np.ascontiguousarray(psi0, dtype=np.complex128).copy()
    idx = 0
    if out_times.size and out_times[0] == 0.0:
        on_samples(0, 1, None, np.zeros(1))
        idx = 1
    if idx == out_times.size:
        return v
    t_end = out_times[-1]
    prop = _Propagator(H, tol, t_end)
    t_cur = 0.0
    sign = 1.0 if t_end > 0 else -1.0
    guard = 0
    while sign * (t_end - t_cur) > 1e-12 * max(1.0, abs(t_end)):
        guard += 1
        if guard > 10_000_000:
            raise PropagationError("step-count limit exceeded")
        tau, basis = prop.step(v, t_end - t_cur)
        t_next = t_cur + tau
        i0 = idx
        while idx < out_times.size and sign * (out_times[idx] - t_next) <= 1e-9:
            idx += 1
        if idx > i0:
            on_samples(i0, idx, basis, out_times[i0:idx] - t_cur)
        v = basis.state(tau)
        t_cur = t_next
    norm0 = np.linalg.norm(psi0)
    drift = abs(np.linalg.norm(v) / norm0 - 1.0)
    if drift > 10 * tol + 1e-10:
        raise PropagationError(f"norm drifted by {drift:.3e} (tol {tol:.1e})")
    return v


def evolve(H, psi0, t, tol=DEFAULT_TOL):
    """exp(-iHt) |psi0> to accuracy ~tol in state norm."""
    if not 0 < tol <= 1e-4:
        raise ValueError("tol must lie in (0, 1e-4]")
    if psi0.shape != (H.dim,):
        raise ValueError(f"state has dimension {psi0.shape}, expected ({H.dim},)")
    if t == 0.0:
        return np.ascontiguousarray(psi0, dtype=np.complex128).copy()
    return _propagate(H, psi0, [t], tol, lambda i0, i1, b, s: None)


def _observable_row(psi, L, want, out, index):
    w = np.abs(psi) ** 2
    if "m" in want or "z" in want:
        z = kernels.site_z_expectations(w, L)
        if "z" in want:
            out["z"][index] = z
        if "m" in want:
            out["m"][index] = z.mean()
    if "zz" in want:
        out["zz"][index] = kernels.zz_correlators(w, L)


_STATE_BATCH = 16


def quench_series(H, psi0, grid, tol=DEFAULT_TOL, observables=(), amplitude=True):
    """One propagation pass collecting the return amplitude G(t) = <psi0|psi(t)>
    and/or diagonal observables ('m', 'z', 'zz') on the grid."""
    if not 0 < tol <= 1e-4:
        raise ValueError("tol must lie in (0, 1e-4]")
    want = set(observables)
    unknown = want - {"m", "z", "zz"}
    if unknown:
        raise ValueError(f"unknown observables: {sorted(unknown)}")
    times = grid.times()
    n = times.size
    L = H.L
    psi0 = np.ascontiguousarray(psi0, dtype=np.complex128)
    psi0_conj = psi0.conj()
    out = {}
    if amplitude:
        out["g"] = np.empty(n, dtype=np.complex128)
    if "m" in want:
        out["m"] = np.empty(n)
    if "z" in want:
        out["z"] = np.empty((n, L))
    if "zz" in want:
        out["zz"] = np.empty((n, L // 2))

    def on_samples(i0, i1, basis, s_locals):
        if basis is None:
            if amplitude:
                out["g"][i0] = np.vdot(psi0, psi0)
            if want:
                _observable_row(psi0, L, want, out, i0)
            return
        coeffs = basis.coeffs_batch(s_locals)  # (k, n_s)
        if amplitude:
            # q_j = conj(<V_j|psi0>), so G = q . y
            q = basis.V[: basis.k] @ psi0_conj
            out["g"][i0:i1] = q @ coeffs
        if want:
            for lo in range(0, i1 - i0, _STATE_BATCH):
                hi = min(lo + _STATE_BATCH, i1 - i0)
                block = coeffs[:, lo:hi].T @ basis.V[: basis.k]  # (n_s, dim)
                for row in range(hi - lo):
                    _observable_row(block[row], L, want, out, i0 + lo + row)

    _propagate(H, psi0, times, tol, on_samples)
    values = {}
    if amplitude:
        values["g"] = out["g"]
        values["p_ret"] = np.abs(out["g"]) ** 2
    for key in ("m", "z", "zz"):
        if key in want:
            values[key] = out[key]
    return TimeSeries(times=times, values=values)


def loschmidt_series(H, psi0, grid, tol=DEFAULT_TOL):
    """Return amplitude G(t) and return probability P_ret(t) = |G|^2."""
    return quench_series(H, psi0, grid, tol=tol, observables=(), amplitude=True)


def observable_series(H, psi0, grid, observables=("m", "zz"), tol=DEFAULT_TOL):
    """Diagonal observables along the quench: mean magnetization 'm',
    per-site 'z', and reference-site correlators 'zz' (<Z_0 Z_r>, r=1..L/2)."""
    return quench_series(H, psi0, grid, tol=tol, observables=observables, amplitude=False)


def min_return(H, psi0, window=400.0, dt=DEFAULT_SCAN_DT, tol=DEFAULT_TOL):
    """Minimum of the sampled return probability over [0, window]."""
    series = loschmidt_series(H, psi0, TimeGrid(window, dt), tol=tol)
    return float(series.values["p_ret"].min())
