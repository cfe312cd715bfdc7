"""Tridiagonal Jacobi blocks of the band-limited localization operator.

For a band pair (n, m) the operator decomposes into 2n+1 independent
symmetric tridiagonal blocks, one per azimuthal order k, with zero diagonal
and recurrence coefficients on the off-diagonals.  Orders with |k| <= m get a
truncated (index-shifted) block, larger orders the untruncated one.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import NumericError
from .ultraspherical import UltrasphericalFamily

__all__ = [
    "JacobiBlock",
    "EigenBlock",
    "build_block",
    "eigendecompose",
    "band_eigenblocks",
    "band_spectra",
    "thread_count",
]

_MIN_EIGENVALUE_GAP = 1e-13


def thread_count() -> int:
    """Worker cap for block-parallel work, overridable via SPHERELOK_THREADS."""
    env = os.environ.get("SPHERELOK_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, min(8, os.cpu_count() or 1))


@dataclass(frozen=True)
class JacobiBlock:
    """One symmetric tridiagonal block: zero diagonal, positive off-diagonal.

    ``offdiag`` holds b_{m'+1} .. b_{m'+size-1} of the alpha-family, where
    m' = ``truncation_offset``.
    """

    alpha: int
    size: int
    offdiag: np.ndarray
    truncation_offset: int

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("block size must be positive")
        if len(self.offdiag) != self.size - 1:
            raise ValueError("offdiag length must be size - 1")
        if self.size > 1 and not np.all(self.offdiag > 0):
            raise ValueError("off-diagonal entries must be strictly positive")

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = np.zeros_like(v)
        if self.size > 1:
            out[:-1] += self.offdiag * v[1:]
            out[1:] += self.offdiag * v[:-1]
        return out


@dataclass(frozen=True)
class EigenBlock:
    """Sorted spectrum and orthonormal eigenvectors of one Jacobi block.

    Eigenvalues are strictly decreasing; column i of ``vectors`` is the unit
    eigenvector for ``eigenvalues[i]`` with positive first component.
    """

    k: int
    eigenvalues: np.ndarray
    vectors: np.ndarray

    @property
    def size(self) -> int:
        return len(self.eigenvalues)

    def with_order(self, k: int) -> "EigenBlock":
        """Same eigendata relabelled for another order (shares the arrays)."""
        return EigenBlock(k=k, eigenvalues=self.eigenvalues, vectors=self.vectors)


def build_block(n: int, m: int, k: int) -> JacobiBlock:
    """Jacobi block for order k of the band pair (n, m)."""
    if not 0 <= m <= n:
        raise ValueError("need 0 <= m <= n")
    if abs(k) > n:
        raise ValueError(f"order {k} outside band limit {n}")
    alpha = abs(k)
    if alpha <= m:
        offset = m - alpha
        size = n - m + 1
    else:
        offset = 0
        size = n - alpha + 1
    family = UltrasphericalFamily.build(alpha, offset + size)
    offdiag = family.b[offset + 1 : offset + size].copy()
    offdiag.setflags(write=False)
    return JacobiBlock(alpha=alpha, size=size, offdiag=offdiag, truncation_offset=offset)


def _eigh_block(block: JacobiBlock, vectors: bool):
    if block.size == 1:
        vals = np.zeros(1)
        vecs = np.ones((1, 1)) if vectors else None
        return vals, vecs
    diag = np.zeros(block.size)
    if vectors:
        vals, vecs = eigh_tridiagonal(diag, np.asarray(block.offdiag))
        return vals, vecs
    vals = eigh_tridiagonal(diag, np.asarray(block.offdiag), eigvals_only=True)
    return vals, None


def eigendecompose(block: JacobiBlock, k: int | None = None) -> EigenBlock:
    """Full spectrum and orthonormal eigenvectors, sorted by decreasing eigenvalue."""
    vals, vecs = _eigh_block(block, vectors=True)
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = vecs[:, order]
    if block.size > 1:
        gaps = vals[:-1] - vals[1:]
        if gaps.min() <= _MIN_EIGENVALUE_GAP:
            raise NumericError(
                f"eigenvalue gap {gaps.min():.3e} below {_MIN_EIGENVALUE_GAP}; "
                "tridiagonal solver failure"
            )
        if np.abs(vals).max() >= 1.0:
            raise NumericError("eigenvalues escaped the open interval (-1, 1)")
        # residual check ||J v - x v||_inf, tridiagonal matvec per column
        jv = np.zeros_like(vecs)
        jv[:-1] += block.offdiag[:, None] * vecs[1:]
        jv[1:] += block.offdiag[:, None] * vecs[:-1]
        resid = np.abs(jv - vecs * vals[None, :]).max()
        if resid > 1e-12 * block.size:
            raise NumericError(f"eigenpair residual {resid:.3e} too large")
    # sign convention: first component positive (it cannot vanish for an
    # irreducible tridiagonal matrix; the fallback is purely defensive)
    lead = vecs[0].copy()
    weak = np.abs(lead) < 1e-14
    if np.any(weak):
        for j in np.nonzero(weak)[0]:
            idx = np.argmax(np.abs(vecs[:, j]) > 1e-14)
            lead[j] = vecs[idx, j]
    vecs = vecs * np.where(lead < 0, -1.0, 1.0)[None, :]
    vals.setflags(write=False)
    vecs.setflags(write=False)
    return EigenBlock(k=0 if k is None else k, eigenvalues=vals, vectors=vecs)


def spectrum(block: JacobiBlock) -> np.ndarray:
    """Eigenvalues only, sorted decreasing."""
    vals, _ = _eigh_block(block, vectors=False)
    return vals[::-1].copy()


def band_eigenblocks(n: int, m: int) -> dict[int, EigenBlock]:
    """Eigendecompositions for every order -n <= k <= n.

    Blocks for k and -k are identical, so each |k| is solved once and the
    result shared.  Large bands are solved on a small thread pool (LAPACK
    releases the GIL).
    """
    orders = list(range(n + 1))
    blocks = [build_block(n, m, k) for k in orders]
    work = sum(b.size**2 for b in blocks)
    workers = thread_count()
    if workers > 1 and work > 500_000 and len(orders) > 2:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            solved = list(pool.map(eigendecompose, blocks, orders))
    else:
        solved = [eigendecompose(b, k) for b, k in zip(blocks, orders)]
    out: dict[int, EigenBlock] = {}
    for k, eb in zip(orders, solved):
        out[k] = eb
        if k > 0:
            out[-k] = eb.with_order(-k)
    return out


def band_spectra(n: int, m: int) -> dict[int, np.ndarray]:
    """Eigenvalues for every distinct |k| (no eigenvectors)."""
    return {k: spectrum(build_block(n, m, k)) for k in range(n + 1)}
