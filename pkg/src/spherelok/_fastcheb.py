"""FFT-backed kernels behind the fast coefficient transform.

Three pieces live here, all internal to :mod:`spherelok.transform`:

* batched conversion between Chebyshev coefficients and values at
  Chebyshev roots (DCT-II / DCT-III pairs),
* a divide-and-conquer cascade that rewrites an expansion over the
  recurrence family into Chebyshev coefficients in O(N log^2 N),
* a windowed nonequispaced cosine evaluation (oversampling 2, Gaussian
  window of half-width 12) plus its direct Clenshaw counterpart.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .ultraspherical import UltrasphericalFamily

__all__ = [
    "cheb_values",
    "cheb_coeffs",
    "CascadePlan",
    "build_cascade",
    "apply_cascade",
    "NdctPlan",
    "build_ndct",
    "apply_ndct",
    "ndct_direct",
]


def cheb_values(coeffs: np.ndarray, n: int) -> np.ndarray:
    """Values of the Chebyshev series at the n roots of T_n (batched last axis)."""
    shape = coeffs.shape[:-1] + (n,)
    w = np.zeros(shape, dtype=coeffs.dtype)
    w[..., : coeffs.shape[-1]] = coeffs
    w[..., 1:] *= 0.5
    return sfft.dct(w, type=3, axis=-1)


def cheb_coeffs(values: np.ndarray) -> np.ndarray:
    """Chebyshev coefficients from values at the roots of T_n (batched last axis)."""
    n = values.shape[-1]
    out = sfft.dct(values, type=2, axis=-1) / (2.0 * n)
    out[..., 1:] *= 2.0
    return out


# ---------------------------------------------------------------------------
# divide-and-conquer change of basis into Chebyshev coefficients


@dataclass(frozen=True)
class _Level:
    grid: int  # working length 2^(r+2) after this combine
    ta: np.ndarray  # each (n_pairs, grid): transfer values on the grid
    ta2: np.ndarray
    tb: np.ndarray
    tb2: np.ndarray


@dataclass(frozen=True)
class CascadePlan:
    alpha: int
    n_coeffs: int
    padded: int
    inv_b0: float
    inv_b0b1: float
    levels: tuple[_Level, ...]


def _assoc_values_batch(
    b: np.ndarray, shifts: np.ndarray, degrees: tuple[int, int], xg: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Values of the shifted-recurrence polynomials at the grid points.

    Returns the two requested consecutive degrees for every shift at once.
    """
    d1, d2 = degrees
    npairs = len(shifts)
    prev = np.zeros((npairs, len(xg)))
    cur = np.repeat((1.0 / b[shifts])[:, None], len(xg), axis=1)
    out1 = cur.copy() if d1 == 0 else None
    for i in range(d2):
        cur, prev = (xg[None, :] * cur - b[shifts + i][:, None] * prev) / b[
            shifts + i + 1
        ][:, None], cur
        if i + 1 == d1:
            out1 = cur.copy()
    return out1, cur


def build_cascade(alpha: int, n_coeffs: int) -> CascadePlan:
    """Precompute the transfer tables for one recurrence family and length."""
    if n_coeffs < 2:
        raise ValueError("cascade needs at least two coefficients")
    q = int(np.ceil(np.log2(n_coeffs)))
    padded = 1 << q
    fam = UltrasphericalFamily.build(alpha, padded + 2)
    b = fam.b
    levels = []
    for r in range(q - 1):
        m_len = 1 << (r + 1)
        grid = 2 * m_len
        n_pairs = padded // (2 * m_len)
        anchors = (2 * np.arange(n_pairs)) * m_len
        xg = np.cos(np.pi * (2.0 * np.arange(grid) + 1.0) / (2.0 * grid))
        scale = b[anchors + 1][:, None]
        a1, a2 = _assoc_values_batch(b, anchors + 2, (m_len - 2, m_len - 1), xg)
        b1, b2 = _assoc_values_batch(b, anchors + 1, (m_len - 1, m_len), xg)
        levels.append(
            _Level(
                grid=grid,
                ta=-scale * a1,
                ta2=-scale * a2,
                tb=scale * b1,
                tb2=scale * b2,
            )
        )
    return CascadePlan(
        alpha=alpha,
        n_coeffs=n_coeffs,
        padded=padded,
        inv_b0=1.0 / b[0],
        inv_b0b1=1.0 / (b[0] * b[1]),
        levels=tuple(levels),
    )


def apply_cascade(plan: CascadePlan, c: np.ndarray) -> np.ndarray:
    """Chebyshev coefficients of sum_l c[l] * p_l for the planned family."""
    if c.shape != (plan.n_coeffs,):
        raise ValueError("coefficient length does not match the plan")
    buf = np.zeros(plan.padded, dtype=complex)
    buf[: plan.n_coeffs] = c
    gam = buf[0::2][:, None].copy()
    del_ = buf[1::2][:, None].copy()
    for lv in plan.levels:
        g_even, g_odd = gam[0::2], gam[1::2]
        d_even, d_odd = del_[0::2], del_[1::2]
        vg = cheb_values(g_odd, lv.grid)
        vd = cheb_values(d_odd, lv.grid)
        new_g = cheb_coeffs(lv.ta * vg + lv.ta2 * vd)
        new_d = cheb_coeffs(lv.tb * vg + lv.tb2 * vd)
        new_g[:, : g_even.shape[1]] += g_even
        new_d[:, : d_even.shape[1]] += d_even
        gam, del_ = new_g, new_d
    g, d = gam[0], del_[0]
    out = np.zeros(plan.padded + 1, dtype=complex)
    out[: len(g)] = plan.inv_b0 * g
    # delta multiplies p_1 = x / (b0 b1); fold the x factor in Chebyshev form
    out[1] += plan.inv_b0b1 * d[0]
    out[: len(d) - 1] += 0.5 * plan.inv_b0b1 * d[1:]
    out[2 : len(d) + 1] += 0.5 * plan.inv_b0b1 * d[1:]
    return out[: plan.n_coeffs]


# ---------------------------------------------------------------------------
# nonequispaced cosine evaluation


@dataclass(frozen=True)
class NdctPlan:
    n_coeffs: int
    n_over: int
    tau: float
    deconv: np.ndarray  # (n_coeffs,)
    tidx: np.ndarray  # (n_nodes, 2w+1)
    weights: np.ndarray  # (n_nodes, 2w+1)


_WINDOW_HALF_WIDTH = 12
_OVERSAMPLING = 2


def build_ndct(theta: np.ndarray, n_coeffs: int) -> NdctPlan:
    """Precompute spreading tables for evaluation at the given angles."""
    if n_coeffs < 2:
        raise ValueError("need at least two coefficients")
    k_max = n_coeffs - 1
    n_over = sfft.next_fast_len(max(2 * _OVERSAMPLING * k_max, 16))
    w = _WINDOW_HALF_WIDTH
    # balance window truncation against spectral aliasing
    tau = (np.pi * w / n_over) / np.sqrt((n_over - k_max) ** 2 - k_max**2)
    freqs = np.arange(n_coeffs, dtype=float)
    deconv = np.exp(freqs**2 * tau) * np.sqrt(np.pi / tau) / n_over
    delta = 2.0 * np.pi / n_over
    t0 = np.rint(theta / delta).astype(np.int64)
    offs = np.arange(-w, w + 1, dtype=np.int64)
    tidx = (t0[:, None] + offs[None, :]) % n_over
    dist = theta[:, None] - delta * (t0[:, None] + offs[None, :])
    weights = np.exp(-(dist**2) / (4.0 * tau))
    return NdctPlan(
        n_coeffs=n_coeffs,
        n_over=n_over,
        tau=tau,
        deconv=deconv,
        tidx=tidx,
        weights=weights,
    )


def apply_ndct(plan: NdctPlan, ghat: np.ndarray) -> np.ndarray:
    """Evaluate sum_t ghat[t] * cos(t * theta) at the planned angles."""
    if ghat.shape != (plan.n_coeffs,):
        raise ValueError("coefficient length does not match the plan")
    spec = np.zeros(plan.n_over, dtype=complex)
    half = 0.5 * ghat * plan.deconv
    spec[: plan.n_coeffs] = half
    spec[0] = ghat[0] * plan.deconv[0]
    spec[-(plan.n_coeffs - 1) :] += half[1:][::-1]
    u = np.fft.ifft(spec) * plan.n_over
    return np.sum(plan.weights * u[plan.tidx], axis=1)


def ndct_direct(theta: np.ndarray, ghat: np.ndarray) -> np.ndarray:
    """Clenshaw evaluation of the cosine series (quadratic-cost reference)."""
    x = np.cos(theta)
    b1 = np.zeros(len(theta), dtype=ghat.dtype)
    b2 = np.zeros_like(b1)
    for t in range(len(ghat) - 1, 0, -1):
        b1, b2 = ghat[t] + 2.0 * x * b1 - b2, b1
    return ghat[0] + x * b1 - b2
