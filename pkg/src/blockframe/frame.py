"""Block frames and their coherence measures.

A block frame is an n x (m*r) matrix viewed as m concatenated n x r blocks,
each block an orthonormal set spanning an r-dimensional subspace.  The two
quantities everything else revolves around:

  worst-case block coherence   max over i != j of the spectral norm of
                               A_i* A_j
  average block coherence      1/(m-1) * max over i of the spectral norm
                               of sum over j != i of A_i* A_j

and, for a plain matrix with unit-norm columns p_i, the column analogue of
the average: 1/(m-1) * max_i | sum_{j != i} <p_i, p_j> |.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import FrameError
from .matrixcore import (
    as_matrix,
    batch_singular_values,
    batch_spectral_norms,
    frobenius_norm,
)

_UNIT_TOL = 1e-8
_ORTHO_TOL = 1e-8
_TIGHT_TOL = 1e-8
_ISOCLINIC_TOL = 1e-6


@dataclass(frozen=True)
class BlockFrame:
    """m blocks of r orthonormal columns each, stacked side by side.

    data is always complex128; field_tag records whether the frame is to be
    read as real (imaginary parts exactly zero) or genuinely complex.
    """

    n: int
    r: int
    m: int
    data: np.ndarray
    field_tag: str = "complex"

    def __post_init__(self):
        data = as_matrix(self.data)
        object.__setattr__(self, "data", data)
        if self.field_tag not in ("real", "complex"):
            raise FrameError(f"field_tag must be real or complex, got {self.field_tag!r}")
        if self.n <= 0 or self.r <= 0 or self.m <= 0:
            raise FrameError("n, r, m must all be positive")
        if data.shape != (self.n, self.m * self.r):
            raise FrameError(
                f"data shape {data.shape} does not match n={self.n}, m={self.m}, r={self.r}"
            )
        if not self.r < self.n:
            raise FrameError(f"need r < n, got r={self.r}, n={self.n}")
        if not self.n <= self.m * self.r:
            raise FrameError(f"need n <= m*r, got n={self.n}, m*r={self.m * self.r}")
        if self.field_tag == "real" and np.any(data.imag != 0.0):
            raise FrameError("field_tag is real but imaginary parts are nonzero")

    def block(self, i):
        """The i-th n x r block (a view, not a copy)."""
        if not 0 <= i < self.m:
            raise FrameError(f"block index {i} out of range for m={self.m}")
        return self.data[:, i * self.r : (i + 1) * self.r]

    def blocks3d(self):
        """All blocks as an (m, n, r) stack (a view when possible)."""
        return self.data.reshape(self.n, self.m, self.r).transpose(1, 0, 2)

    @classmethod
    def from_blocks(cls, blocks, field_tag="complex"):
        blocks = [as_matrix(b) for b in blocks]
        n, r = blocks[0].shape
        for b in blocks:
            if b.shape != (n, r):
                raise FrameError("blocks must share a common shape")
        data = np.concatenate(blocks, axis=1)
        return cls(n=n, r=r, m=len(blocks), data=data, field_tag=field_tag)


def _cross_stack(frame, i, j_from):
    """Stack of cross-Grams A_i* A_j for j = j_from .. m-1."""
    r, m = frame.r, frame.m
    rest = frame.data[:, j_from * r :]
    c = frame.block(i).conj().T @ rest
    return c.reshape(r, m - j_from, r).swapaxes(0, 1)


def gram_map(frame):
    """m x m matrix of cross-block spectral norms.

    Entry (i, j) is the largest singular value of A_i* A_j; the map is
    symmetric because A_j* A_i is the adjoint.  The diagonal is exactly 1
    (each block has orthonormal columns) and is set rather than computed.
    """
    m = frame.m
    g = np.eye(m)
    for i in range(m - 1):
        s = batch_spectral_norms(_cross_stack(frame, i, i + 1))
        g[i, i + 1 :] = s
        g[i + 1 :, i] = s
    return g


def worst_case_coherence(frame):
    """Largest cross-block spectral norm over all unordered block pairs."""
    if frame.m < 2:
        raise FrameError("worst-case coherence needs at least two blocks")
    best = 0.0
    for i in range(frame.m - 1):
        s = batch_spectral_norms(_cross_stack(frame, i, i + 1))
        best = max(best, float(s.max()))
    return best


def average_coherence(frame):
    """Largest per-block norm of the summed cross-Grams, over m - 1.

    The inner sum over j != i is computed as A_i* T - A_i* A_i with
    T = sum of all blocks, which numpy evaluates in a fixed deterministic
    order; the flipping module recomputes through this same path so that
    before/after comparisons are bit-stable.
    """
    if frame.m < 2:
        raise FrameError("average coherence needs at least two blocks")
    blocks = frame.blocks3d()
    total = blocks.sum(axis=0)
    bh_t = np.einsum("ink,nl->ikl", blocks.conj(), total)
    bh_b = np.einsum("ink,inl->ikl", blocks.conj(), blocks)
    s = batch_spectral_norms(bh_t - bh_b)
    return float(s.max()) / (frame.m - 1)


def average_column_coherence(p):
    """Column-level average coherence of a unit-norm-column matrix."""
    p = as_matrix(p)
    m = p.shape[1]
    if m < 2:
        raise FrameError("average column coherence needs at least two columns")
    total = p.sum(axis=1)
    cross = p.conj().T @ total - np.einsum("ij,ij->j", p.conj(), p)
    return float(np.abs(cross).max()) / (m - 1)


def _pair_gram(frame, i, j):
    if i == j:
        raise FrameError("distances are defined for distinct blocks")
    return frame.block(i).conj().T @ frame.block(j)


def chordal_distance(frame, i, j):
    """sqrt(r - ||A_i* A_j||_F^2), the chordal metric between the spans."""
    g = _pair_gram(frame, i, j)
    return float(np.sqrt(max(0.0, frame.r - frobenius_norm(g) ** 2)))


def spectral_distance(frame, i, j):
    """sqrt(1 - ||A_i* A_j||_2^2), driven by the largest principal angle."""
    g = _pair_gram(frame, i, j)
    s = batch_spectral_norms(g[None])[0]
    return float(np.sqrt(max(0.0, 1.0 - s**2)))


@dataclass(frozen=True)
class ValidationRecord:
    """Structural facts about a frame, with the deviations behind them."""

    unit_columns: bool
    block_orthonormal: bool
    tight: bool
    union_of_orthobases: bool
    equi_isoclinic: bool
    max_column_norm_dev: float
    max_block_gram_dev: float
    tight_residual: float
    cross_singular_spread: float


def validate(frame):
    """Report structural properties; never raises on a well-shaped frame."""
    n, r, m = frame.n, frame.r, frame.m
    data = frame.data

    col_norms = np.linalg.norm(data, axis=0)
    col_dev = float(np.abs(col_norms - 1.0).max())

    blocks = frame.blocks3d()
    gram_self = np.einsum("ink,inl->ikl", blocks.conj(), blocks)
    eye = np.eye(r)
    block_dev = float(np.abs(gram_self - eye[None]).max())

    tight_ratio = m * r / n
    residual = frobenius_norm(data @ data.conj().T - tight_ratio * np.eye(n))

    union = n % r == 0 and (m * r) % n == 0 and m % (n // r) == 0
    if union:
        for b in range(m * r // n):
            u = data[:, b * n : (b + 1) * n]
            if np.abs(u.conj().T @ u - np.eye(n)).max() > _ORTHO_TOL:
                union = False
                break

    smin, smax = np.inf, 0.0
    for i in range(m - 1):
        sv = batch_singular_values(_cross_stack(frame, i, i + 1))
        smin = min(smin, float(sv.min()))
        smax = max(smax, float(sv.max()))
    spread = float(smax - smin) if m > 1 else 0.0

    return ValidationRecord(
        unit_columns=col_dev < _UNIT_TOL,
        block_orthonormal=block_dev < _ORTHO_TOL,
        tight=residual < _TIGHT_TOL * max(1.0, tight_ratio),
        union_of_orthobases=union,
        equi_isoclinic=spread < _ISOCLINIC_TOL,
        max_column_norm_dev=col_dev,
        max_block_gram_dev=block_dev,
        tight_residual=float(residual),
        cross_singular_spread=spread,
    )


@dataclass(frozen=True)
class CoherenceReport:
    """Everything the analyze command reports about one frame."""

    n: int
    r: int
    m: int
    field_tag: str
    worst_case: float
    average: float
    welch_lower: float
    orthobases_lower: float | None
    union_of_orthobases: bool
    equi_isoclinic: bool
    gram: np.ndarray = field(repr=False)

    def to_jsonable(self):
        """Scalar fields only; the gram map travels separately as CSV."""
        return {
            "n": self.n,
            "r": self.r,
            "m": self.m,
            "field": self.field_tag,
            "worst_case_coherence": self.worst_case,
            "average_coherence": self.average,
            "welch_lower_bound": self.welch_lower,
            "orthobases_lower_bound": self.orthobases_lower,
            "union_of_orthobases": self.union_of_orthobases,
            "equi_isoclinic": self.equi_isoclinic,
        }


def coherence_report(frame):
    from .bounds import orthobases_coherence_lower, welch_coherence_lower

    g = gram_map(frame)
    off = g[~np.eye(frame.m, dtype=bool)]
    mu = float(off.max()) if off.size else 0.0
    rec = validate(frame)
    ortho_lower = None
    if rec.union_of_orthobases:
        ortho_lower = orthobases_coherence_lower(frame.n, frame.r)
    return CoherenceReport(
        n=frame.n,
        r=frame.r,
        m=frame.m,
        field_tag=frame.field_tag,
        worst_case=mu,
        average=average_coherence(frame),
        welch_lower=welch_coherence_lower(frame.n, frame.r, frame.m),
        orthobases_lower=ortho_lower,
        union_of_orthobases=rec.union_of_orthobases,
        equi_isoclinic=rec.equi_isoclinic,
        gram=g,
    )
