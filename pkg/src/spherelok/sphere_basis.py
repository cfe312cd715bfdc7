"""Band-limited spherical expansions and the localized eigenbasis.

Coefficient vectors follow one canonical layout: blocks ordered by azimuthal
order k from +n down to -n, entries inside a block ordered by ascending
degree l (harmonic side) or ascending eigenvalue index i (localized side).
That layout is also the contract for the text file format written here.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import FormatError
from .jacobi_blocks import EigenBlock, build_block
from .ultraspherical import UltrasphericalFamily

__all__ = [
    "BandParams",
    "HarmonicCoeffs",
    "LocalizedCoeffs",
    "SphereGrid",
    "eval_harmonic",
    "eval_basis_function",
    "radial_table",
    "mean_value",
    "mean_value_quadrature",
    "embed_block",
    "evaluate_on_grid",
    "evaluate_basis_on_grid",
    "save_coeffs",
    "load_coeffs",
]


@dataclass(frozen=True)
class BandParams:
    """Band-limit pair: degrees m <= l <= n are retained."""

    n: int
    m: int

    def __post_init__(self):
        if not 0 <= self.m <= self.n:
            raise ValueError("need 0 <= m <= n")

    @property
    def dimension(self) -> int:
        return (self.n + 1) ** 2 - self.m**2

    def orders(self) -> range:
        """Block order: k = n, n-1, ..., -n."""
        return range(self.n, -self.n - 1, -1)

    def block_size(self, k: int) -> int:
        if abs(k) > self.n:
            raise ValueError(f"order {k} outside band limit {self.n}")
        return self.n - max(abs(k), self.m) + 1

    def min_degree(self, k: int) -> int:
        """Smallest degree l present in block k."""
        return max(abs(k), self.m)

    def block_slice(self, k: int) -> slice:
        start = _layout(self.n, self.m)[k]
        return slice(start, start + self.block_size(k))


@lru_cache(maxsize=256)
def _layout(n: int, m: int) -> dict[int, int]:
    starts = {}
    pos = 0
    for k in range(n, -n - 1, -1):
        starts[k] = pos
        pos += n - max(abs(k), m) + 1
    return starts


class _Coeffs:
    kind = ""

    def __init__(self, params: BandParams, values: np.ndarray | None = None):
        self.params = params
        if values is None:
            values = np.zeros(params.dimension, dtype=complex)
        else:
            values = np.asarray(values, dtype=complex)
            if values.shape != (params.dimension,):
                raise ValueError(
                    f"expected {params.dimension} coefficients, got {values.shape}"
                )
            values = values.copy()
        values.setflags(write=False)
        self.values = values

    def block(self, k: int) -> np.ndarray:
        return self.values[self.params.block_slice(k)]

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def __eq__(self, other):
        return (
            type(self) is type(other)
            and self.params == other.params
            and np.array_equal(self.values, other.values)
        )


class HarmonicCoeffs(_Coeffs):
    """Spherical-harmonic coefficients c_{l,k} in the canonical block layout."""

    kind = "harmonic"

    def index_of(self, l: int, k: int) -> int:
        lo = self.params.min_degree(k)
        if not lo <= l <= self.params.n:
            raise ValueError(f"degree {l} outside block for order {k}")
        return self.params.block_slice(k).start + (l - lo)

    @classmethod
    def from_blocks(cls, params: BandParams, blocks: dict[int, np.ndarray]):
        vals = np.zeros(params.dimension, dtype=complex)
        for k, v in blocks.items():
            vals[params.block_slice(k)] = v
        return cls(params, vals)

    @classmethod
    def random_unit(cls, params: BandParams, rng: np.random.Generator):
        v = rng.standard_normal(params.dimension) + 1j * rng.standard_normal(
            params.dimension
        )
        return cls(params, v / np.linalg.norm(v))


class LocalizedCoeffs(_Coeffs):
    """Coefficients d_{k,i} in the localized eigenbasis (i counts from 1)."""

    kind = "localized"

    def index_of(self, k: int, i: int) -> int:
        if not 1 <= i <= self.params.block_size(k):
            raise ValueError(f"index {i} outside block for order {k}")
        return self.params.block_slice(k).start + (i - 1)


@dataclass(frozen=True)
class SphereGrid:
    """Gauss-Legendre x equispaced-azimuth product grid.

    The discrete inner product is exact for harmonic products of combined
    polynomial degree <= 2D when built with ``for_degree(D)``.
    """

    theta: np.ndarray
    x: np.ndarray
    theta_weights: np.ndarray
    phi: np.ndarray

    @classmethod
    def for_degree(
        cls, degree: int, theta_res: int | None = None, phi_res: int | None = None
    ) -> "SphereGrid":
        p = theta_res if theta_res is not None else degree + 1
        q = phi_res if phi_res is not None else 2 * degree + 2
        if p < 1 or q < 1:
            raise ValueError("grid resolutions must be positive")
        x, w = np.polynomial.legendre.leggauss(p)
        x, w = x[::-1].copy(), w[::-1].copy()  # theta ascending from the pole
        theta = np.arccos(x)
        phi = np.arange(q) * (2.0 * np.pi / q)
        for a in (theta, x, w, phi):
            a.setflags(write=False)
        return cls(theta=theta, x=x, theta_weights=w, phi=phi)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.theta), len(self.phi)

    def inner(self, f: np.ndarray, g: np.ndarray) -> complex:
        """Discrete surface inner product of two (P, Q) sample arrays."""
        q = len(self.phi)
        return complex(np.sum(self.theta_weights @ (f * np.conj(g))) / (2.0 * q))

    def integrate(self, f: np.ndarray) -> complex:
        q = len(self.phi)
        return complex(np.sum(self.theta_weights @ f) / (2.0 * q))


def _scaled_start(alpha: int, sin_theta: np.ndarray) -> np.ndarray:
    """sin^alpha(theta) / b_0 with the power folded in one factor at a time.

    Keeps intermediate magnitudes representable for large alpha; a result
    that underflows to zero is zero to working precision.
    """
    s = np.ones_like(sin_theta)
    for j in range(1, alpha + 1):
        s *= sin_theta * np.sqrt((j + 0.5) / j)
    return s


def _radial_recurrence(alpha: int, max_deg: int, x: np.ndarray, sin_theta: np.ndarray):
    """Yield sin^alpha * p_deg(x) for deg = 0 .. max_deg."""
    fam = UltrasphericalFamily.build(alpha, max(max_deg, 0) + 1)
    b = fam.b
    prev = np.zeros_like(x)
    cur = _scaled_start(alpha, sin_theta)
    yield cur
    for i in range(max_deg):
        cur, prev = (x * cur - b[i] * prev) / b[i + 1], cur
        yield cur


def radial_table(params: BandParams, k: int, theta: np.ndarray) -> np.ndarray:
    """Matrix S with S[p, j] = sin^|k|(theta_p) * p_{l_j - |k|}(cos theta_p).

    Columns run over the degrees l_j present in block k, so a block
    coefficient vector c_k yields latitude profiles as S @ c_k.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    alpha = abs(k)
    x = np.cos(theta)
    s = np.sin(theta)
    lo = params.min_degree(k) - alpha
    hi = params.n - alpha
    cols = []
    for deg, row in enumerate(_radial_recurrence(alpha, hi, x, s)):
        if deg >= lo:
            cols.append(row)
    return np.stack(cols, axis=1)


def eval_harmonic(l: int, k: int, theta, phi):
    """Spherical harmonic sin^|k|(theta) * p_{l-|k|}(cos theta) * e^{i k phi}."""
    if abs(k) > l:
        raise ValueError(f"|k| = {abs(k)} exceeds degree {l}")
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    scalar = theta.ndim == 0 and phi.ndim == 0
    t = np.atleast_1d(theta).astype(float)
    x, s = np.cos(t), np.sin(t)
    for row in _radial_recurrence(abs(k), l - abs(k), x, s):
        radial = row
    out = radial * np.exp(1j * k * np.atleast_1d(phi))
    return complex(out[0]) if scalar else out.reshape(np.broadcast(theta, phi).shape)


def eval_basis_function(
    params: BandParams,
    blocks: dict[int, EigenBlock],
    k: int,
    i: int,
    theta,
    phi,
):
    """Localized basis function for order k and eigenvalue index i (1-based)."""
    eb = blocks[k]
    if not 1 <= i <= eb.size:
        raise IndexError(f"index {i} outside 1..{eb.size}")
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    scalar = theta.ndim == 0 and phi.ndim == 0
    table = radial_table(params, k, np.atleast_1d(theta))
    radial = table @ eb.vectors[:, i - 1]
    out = radial * np.exp(1j * k * np.atleast_1d(phi))
    return complex(out[0]) if scalar else out.reshape(np.broadcast(theta, phi).shape)


def mean_value(coeffs: HarmonicCoeffs) -> float:
    """Localization score in (-1, 1): +1 means north-pole concentration.

    Computed block-wise as the tridiagonal quadratic form, O(dimension) total.
    """
    p = coeffs.params
    total = 0.0
    for k in range(p.n + 1):
        off = build_block(p.n, p.m, k).offdiag
        for kk in ((k, -k) if k else (0,)):
            c = coeffs.block(kk)
            if len(c) > 1:
                total += 2.0 * float(np.real(np.sum(np.conj(c[:-1]) * off * c[1:])))
    return total


def mean_value_quadrature(coeffs: HarmonicCoeffs, grid: SphereGrid | None = None) -> float:
    """Same score via surface quadrature of cos(theta) |f|^2 (test oracle)."""
    if grid is None:
        grid = SphereGrid.for_degree(coeffs.params.n + 1)
    field = evaluate_on_grid(coeffs, grid)
    q = len(grid.phi)
    w = grid.theta_weights * grid.x
    return float(np.real(np.sum(w @ (field * np.conj(field)))) / (2.0 * q))


def embed_block(params: BandParams, k: int, vec: np.ndarray) -> HarmonicCoeffs:
    """Embed a length-N_k vector as block k of an otherwise zero coefficient set."""
    vec = np.asarray(vec, dtype=complex)
    if vec.shape != (params.block_size(k),):
        raise ValueError(
            f"expected {params.block_size(k)} entries for order {k}, got {vec.shape}"
        )
    return HarmonicCoeffs.from_blocks(params, {k: vec})


def evaluate_on_grid(coeffs: HarmonicCoeffs, grid: SphereGrid) -> np.ndarray:
    """Sample the expansion on the grid; returns a (P, Q) complex array."""
    p = coeffs.params
    field = np.zeros(grid.shape, dtype=complex)
    for k in p.orders():
        c = coeffs.block(k)
        if not np.any(c):
            continue
        profile = radial_table(p, k, grid.theta) @ c
        field += np.outer(profile, np.exp(1j * k * grid.phi))
    return field


def evaluate_basis_on_grid(
    params: BandParams, blocks: dict[int, EigenBlock], k: int, i: int, grid: SphereGrid
) -> np.ndarray:
    profile = radial_table(params, k, grid.theta) @ blocks[k].vectors[:, i - 1]
    return np.outer(profile, np.exp(1j * k * grid.phi))


# ---------------------------------------------------------------------------
# text serialization

_HEADER_RE = re.compile(
    r"^SPHERELOK-COEFF v1 kind=(harmonic|localized) n=(\d+) m=(\d+)$"
)


def _entry_labels(params: BandParams, kind: str):
    for k in params.orders():
        lo = params.min_degree(k)
        for j in range(params.block_size(k)):
            yield (k, lo + j) if kind == "harmonic" else (k, j + 1)


def save_coeffs(path, coeffs: _Coeffs) -> None:
    params = coeffs.params
    lines = [f"SPHERELOK-COEFF v1 kind={coeffs.kind} n={params.n} m={params.m}"]
    for (k, idx), v in zip(_entry_labels(params, coeffs.kind), coeffs.values):
        lines.append(f"{k} {idx} {v.real:.17g} {v.imag:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_coeffs(path) -> HarmonicCoeffs | LocalizedCoeffs:
    """Parse a coefficient file, rejecting out-of-order or missing entries."""
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines:
        raise FormatError(f"{path}: empty file")
    match = _HEADER_RE.match(lines[0].strip())
    if not match:
        raise FormatError(f"{path}: line 1: bad header {lines[0]!r}")
    kind, n, m = match.group(1), int(match.group(2)), int(match.group(3))
    if m > n:
        raise FormatError(f"{path}: line 1: need m <= n")
    params = BandParams(n=n, m=m)
    expected = list(_entry_labels(params, kind))
    values = np.zeros(params.dimension, dtype=complex)
    pos = 0
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        if pos >= len(expected):
            raise FormatError(f"{path}: line {lineno}: extra entry beyond dimension")
        parts = line.split()
        if len(parts) != 4:
            raise FormatError(f"{path}: line {lineno}: expected 'k idx re im'")
        try:
            k, idx = int(parts[0]), int(parts[1])
            re_v, im_v = float(parts[2]), float(parts[3])
        except ValueError as exc:
            raise FormatError(f"{path}: line {lineno}: {exc}") from None
        if (k, idx) != expected[pos]:
            raise FormatError(
                f"{path}: line {lineno}: entry ({k}, {idx}) out of order; "
                f"expected {expected[pos]}"
            )
        values[pos] = complex(re_v, im_v)
        pos += 1
    if pos != len(expected):
        raise FormatError(f"{path}: missing entries; got {pos} of {len(expected)}")
    cls = HarmonicCoeffs if kind == "harmonic" else LocalizedCoeffs
    return cls(params, values)
