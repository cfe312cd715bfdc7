"""Transforms between harmonic and localized coefficients.

The dense path multiplies each block by its orthogonal eigenvector matrix.
The fast path factors that product into a Chebyshev change of basis (applied
by a divide-and-conquer cascade), a nonequispaced cosine evaluation at the
eigenvalue angles, and a diagonal scaling.  Blocks that are truncated, small,
or whose polynomial values grow beyond a stability cap fall back to the dense
multiply inside the fast path.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _fastcheb as fc
from .errors import FormatError, NumericError
from .jacobi_blocks import EigenBlock, band_eigenblocks
from .sphere_basis import BandParams, HarmonicCoeffs, LocalizedCoeffs
from .ultraspherical import UltrasphericalFamily, chebyshev_connection

__all__ = [
    "TransformPlan",
    "OpCounter",
    "analyze",
    "synthesize",
    "analyze_fast",
    "dense_op_count",
    "save_plan",
    "load_plan",
]

FAST_MIN_BLOCK = 64  # below this a dense multiply beats the cascade
GROWTH_CAP = 1e7  # max polynomial value at x=1 tolerated by the cascade
NDCT_DIRECT_MAX = 128  # "auto" switches to the windowed evaluation above this

_PLAN_MAGIC = b"SPHERELOK-PLAN v1\n"


@dataclass
class OpCounter:
    """Accumulates the arithmetic operations of dense block multiplies."""

    ops: int = 0

    def add_matvec(self, size: int) -> None:
        self.ops += (2 * size - 1) * size


def dense_op_count(n: int, m: int) -> int:
    """Closed form of the dense transform operation count, sum_k (2 N_k - 1) N_k."""
    total = (n - m + 1) * (4 * n * n + n * (4 * m + 5) + 3 + m - 8 * m * m)
    if total % 3:
        raise AssertionError("operation-count formula must be divisible by 3")
    return total // 3


def _growth_at_one(alpha: int, degree: int) -> float:
    """Largest value of the family on [-1, 1] up to the given degree."""
    fam = UltrasphericalFamily.build(alpha, degree + 1)
    b = fam.b
    prev, cur = 0.0, 1.0 / b[0]
    top = cur
    for i in range(degree):
        cur, prev = (cur - b[i] * prev) / b[i + 1], cur
        top = max(top, cur)
    return top


@dataclass(frozen=True)
class _FastBlock:
    eligible: bool
    theta: np.ndarray | None = None
    kappa: np.ndarray | None = None
    cascade: fc.CascadePlan | None = None
    ndct: fc.NdctPlan | None = None


class TransformPlan:
    """Reusable per-band eigendata plus optional fast-path tables.

    Immutable once built; safe to share across concurrent transforms.
    """

    def __init__(
        self,
        params: BandParams,
        blocks: dict[int, EigenBlock],
        mode: str = "dense",
        ndct: str = "auto",
        validate: bool = True,
    ):
        if mode not in ("dense", "fast"):
            raise ValueError(f"unknown mode {mode!r}")
        if ndct not in ("auto", "direct", "windowed"):
            raise ValueError(f"unknown ndct mode {ndct!r}")
        self.params = params
        self.blocks = blocks
        self.mode = mode
        self.ndct = ndct
        self._fast: dict[int, _FastBlock] = {}
        self._conn: dict[int, np.ndarray] = {}
        self._eigs: np.ndarray | None = None
        if validate:
            self._check_orthogonality(1e-12)

    def _check_orthogonality(self, tol: float) -> None:
        for k in range(self.params.n + 1):
            v = self.blocks[k].vectors
            resid = np.abs(v.T @ v - np.eye(v.shape[0])).max()
            if resid > tol:
                raise NumericError(
                    f"eigenvector block k={k} orthogonality residual {resid:.3e}"
                )

    @classmethod
    def build(
        cls,
        n: int,
        m: int,
        mode: str = "dense",
        ndct: str = "auto",
        validate: bool = True,
    ) -> "TransformPlan":
        params = BandParams(n=n, m=m)
        blocks = band_eigenblocks(n, m)
        return cls(params, blocks, mode=mode, ndct=ndct, validate=validate)

    def eigenblock(self, k: int) -> EigenBlock:
        return self.blocks[k]

    def eigenvalue_vector(self) -> np.ndarray:
        """All eigenvalues in the canonical localized-coefficient order."""
        if self._eigs is None:
            parts = [self.blocks[k].eigenvalues for k in self.params.orders()]
            eigs = np.concatenate(parts)
            eigs.setflags(write=False)
            self._eigs = eigs
        return self._eigs

    # -- fast-path plumbing ------------------------------------------------

    def fast_eligible(self, k: int) -> bool:
        """Whether the factored pipeline is used for block k in fast mode."""
        alpha = abs(k)
        size = self.params.block_size(k)
        if alpha <= self.params.m or size < FAST_MIN_BLOCK:
            return False
        return _growth_at_one(alpha, size - 1) <= GROWTH_CAP

    def _fast_block(self, k: int) -> _FastBlock:
        alpha = abs(k)
        fb = self._fast.get(alpha)
        if fb is None:
            if not self.fast_eligible(k):
                fb = _FastBlock(eligible=False)
            else:
                eb = self.blocks[alpha]
                theta = np.arccos(eb.eigenvalues)
                b0 = UltrasphericalFamily.build(alpha, 1).b[0]
                kappa = b0 * eb.vectors[0, :]
                size = eb.size
                fb = _FastBlock(
                    eligible=True,
                    theta=theta,
                    kappa=kappa,
                    cascade=fc.build_cascade(alpha, size),
                    ndct=fc.build_ndct(theta, size),
                )
            self._fast[alpha] = fb
        return fb

    def _connection(self, alpha: int, size: int) -> np.ndarray:
        conn = self._conn.get(alpha)
        if conn is None:
            fam = UltrasphericalFamily.build(alpha, size + 1)
            conn = chebyshev_connection(fam, size)
            self._conn[alpha] = conn
        return conn


def _check_match(plan: TransformPlan, coeffs) -> None:
    if coeffs.params != plan.params:
        raise ValueError(
            f"coefficients for band {coeffs.params} do not match plan {plan.params}"
        )


def analyze(
    plan: TransformPlan, coeffs: HarmonicCoeffs, counter: OpCounter | None = None
) -> LocalizedCoeffs:
    """Change of basis into localized coefficients, block-orthogonal multiply."""
    _check_match(plan, coeffs)
    out = np.empty(plan.params.dimension, dtype=complex)
    for k in plan.params.orders():
        v = plan.blocks[k].vectors
        out[plan.params.block_slice(k)] = v.T @ coeffs.block(k)
        if counter is not None:
            counter.add_matvec(v.shape[0])
    return LocalizedCoeffs(plan.params, out)


def synthesize(plan: TransformPlan, coeffs: LocalizedCoeffs) -> HarmonicCoeffs:
    """Inverse of :func:`analyze` (exact orthogonal inverse per block)."""
    _check_match(plan, coeffs)
    out = np.empty(plan.params.dimension, dtype=complex)
    for k in plan.params.orders():
        v = plan.blocks[k].vectors
        out[plan.params.block_slice(k)] = v @ coeffs.block(k)
    return HarmonicCoeffs(plan.params, out)


def _fast_block_apply(plan: TransformPlan, k: int, c_k: np.ndarray) -> np.ndarray:
    fb = plan._fast_block(k)
    if not fb.eligible:
        return plan.blocks[k].vectors.T @ c_k
    size = len(c_k)
    if plan.ndct == "direct":
        cheb = plan._connection(abs(k), size) @ c_k
        vals = fc.ndct_direct(fb.theta, cheb)
    else:
        cheb = fc.apply_cascade(fb.cascade, c_k)
        if plan.ndct == "windowed" or size > NDCT_DIRECT_MAX:
            vals = fc.apply_ndct(fb.ndct, cheb)
        else:
            vals = fc.ndct_direct(fb.theta, cheb)
    return fb.kappa * vals


def analyze_fast(plan: TransformPlan, coeffs: HarmonicCoeffs) -> LocalizedCoeffs:
    """Fast-path analysis; agrees with :func:`analyze` to 1e-8.

    Requires a plan built with ``mode="fast"``.  Truncated orders (|k| <= m)
    and blocks outside the pipeline's stability range use the dense multiply.
    """
    if plan.mode != "fast":
        raise ValueError("analyze_fast requires a plan built with mode='fast'")
    _check_match(plan, coeffs)
    out = np.empty(plan.params.dimension, dtype=complex)
    for k in plan.params.orders():
        out[plan.params.block_slice(k)] = _fast_block_apply(plan, k, coeffs.block(k))
    return LocalizedCoeffs(plan.params, out)


# ---------------------------------------------------------------------------
# binary plan cache


def save_plan(path, plan: TransformPlan) -> None:
    """Serialize eigendata (little-endian, per-block records) to a cache file."""
    with open(path, "wb") as fh:
        fh.write(_PLAN_MAGIC)
        np.array([plan.params.n, plan.params.m], dtype="<i8").tofile(fh)
        for k in plan.params.orders():
            eb = plan.blocks[k]
            np.array([k, eb.size], dtype="<i8").tofile(fh)
            eb.eigenvalues.astype("<f8").tofile(fh)
            eb.vectors.astype("<f8").tofile(fh)


def load_plan(path, mode: str = "dense", ndct: str = "auto") -> TransformPlan:
    """Load a plan cache, verifying layout and per-block orthogonality."""
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(len(_PLAN_MAGIC))
        if magic != _PLAN_MAGIC:
            raise FormatError(f"{path}: not a plan cache (bad magic)")
        header = np.fromfile(fh, dtype="<i8", count=2)
        if len(header) != 2:
            raise FormatError(f"{path}: truncated header")
        n, m = int(header[0]), int(header[1])
        if not 0 <= m <= n:
            raise FormatError(f"{path}: invalid band parameters n={n} m={m}")
        params = BandParams(n=n, m=m)
        blocks: dict[int, EigenBlock] = {}
        for k in params.orders():
            rec = np.fromfile(fh, dtype="<i8", count=2)
            if len(rec) != 2:
                raise FormatError(f"{path}: truncated at block k={k}")
            k_read, size = int(rec[0]), int(rec[1])
            if k_read != k or size != params.block_size(k):
                raise FormatError(
                    f"{path}: block record ({k_read}, {size}) out of order; "
                    f"expected ({k}, {params.block_size(k)})"
                )
            vals = np.fromfile(fh, dtype="<f8", count=size)
            vecs = np.fromfile(fh, dtype="<f8", count=size * size)
            if len(vals) != size or len(vecs) != size * size:
                raise FormatError(f"{path}: truncated eigendata at block k={k}")
            vals = vals.astype(float)
            vecs = vecs.astype(float).reshape(size, size)
            resid = np.abs(vecs.T @ vecs - np.eye(size)).max()
            if resid > 1e-10:
                raise NumericError(
                    f"{path}: block k={k} orthogonality residual {resid:.3e} "
                    "exceeds 1e-10"
                )
            vals.setflags(write=False)
            vecs.setflags(write=False)
            blocks[k] = EigenBlock(k=k, eigenvalues=vals, vectors=vecs)
        if fh.read(1):
            raise FormatError(f"{path}: trailing bytes after last block")
    return TransformPlan(params, blocks, mode=mode, ndct=ndct, validate=False)
