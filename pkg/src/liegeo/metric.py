"""Inner products on the reference basis and orthogonal conjugation to zero diagonal."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lie_core import TAU_ALG, TAU_RANK, PreconditionError, Subspace, null_space


class InnerProduct:
    """Symmetric positive-definite Gram matrix on the reference basis.

    Construction runs a Cholesky factorization by hand so that a failure can
    name the first non-positive pivot.
    """

    def __init__(self, gram, tag: str | None = None):
        g = np.array(gram, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError(f"Gram matrix must be square, got shape {g.shape}")
        if not np.all(np.isfinite(g)):
            raise ValueError("Gram matrix must be finite")
        scale = max(1.0, float(np.max(np.abs(g), initial=0.0)))
        if np.max(np.abs(g - g.T), initial=0.0) > TAU_ALG * scale:
            raise ValueError("Gram matrix is not symmetric")
        g = 0.5 * (g + g.T)
        self._chol = _cholesky(g)
        g.setflags(write=False)
        self._gram = g
        self.tag = tag

    @classmethod
    def identity(cls, n: int) -> "InnerProduct":
        return cls(np.eye(n), tag="identity")

    @property
    def gram(self) -> np.ndarray:
        return self._gram

    @property
    def cholesky(self) -> np.ndarray:
        """Lower-triangular ``L`` with ``gram = L @ L.T``."""
        return self._chol

    @property
    def n(self) -> int:
        return self._gram.shape[0]

    def ip(self, u, v) -> float:
        return float(np.asarray(u) @ self._gram @ np.asarray(v))

    def norm(self, u) -> float:
        return math.sqrt(max(self.ip(u, u), 0.0))

    def __repr__(self):
        return f"InnerProduct(n={self.n}, tag={self.tag!r})"


def _cholesky(g: np.ndarray) -> np.ndarray:
    n = g.shape[0]
    low = np.zeros_like(g)
    for j in range(n):
        d = g[j, j] - low[j, :j] @ low[j, :j]
        if not d > 0.0:
            raise ValueError(f"Gram matrix is not positive definite (pivot {j + 1} is {d:.3g})")
        low[j, j] = math.sqrt(d)
        for i in range(j + 1, n):
            low[i, j] = (g[i, j] - low[i, :j] @ low[j, :j]) / low[j, j]
    return low


def random_inner_product(n: int, rng: np.random.Generator, log_spread: float = 1.5) -> InnerProduct:
    """Random SPD metric with eigenvalues in ``[exp(-log_spread), exp(log_spread)]``."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    eig = np.exp(rng.uniform(-log_spread, log_spread, size=n))
    return InnerProduct((q * eig) @ q.T, tag="random")


def ip(metric: InnerProduct, u, v) -> float:
    return metric.ip(u, v)


def gram_schmidt(metric: InnerProduct, vectors) -> list[np.ndarray]:
    """Orthonormalize under ``metric`` (modified Gram-Schmidt, two passes).

    Raises ValueError if the input is linearly dependent.
    """
    g = metric.gram
    out: list[np.ndarray] = []
    for idx, v in enumerate(vectors):
        w = np.array(v, dtype=float)
        n0 = math.sqrt(max(w @ g @ w, 0.0))
        if n0 == 0.0:
            raise ValueError(f"vector {idx} is zero")
        for _ in range(2):
            for q in out:
                w = w - (q @ g @ w) * q
        nw = math.sqrt(max(w @ g @ w, 0.0))
        if nw <= TAU_RANK * n0:
            raise ValueError(f"vector {idx} depends on the preceding ones")
        out.append(w / nw)
    return out


def orthonormal_basis(metric: InnerProduct, sub: Subspace) -> Subspace:
    """The same subspace with columns orthonormal under ``metric``."""
    cols = gram_schmidt(metric, sub.basis.T)
    b = np.column_stack(cols) if cols else np.zeros((sub.n, 0))
    return Subspace(b, metric_tag=metric.tag)


def orthogonal_complement(metric: InnerProduct, sub: Subspace) -> Subspace:
    """Orthonormal basis of ``{v : <v, s> = 0 for all s in sub}``."""
    n = metric.n
    if sub.dim == 0:
        return orthonormal_basis(metric, Subspace.full(n))
    k = null_space(sub.basis.T @ metric.gram)
    return orthonormal_basis(metric, Subspace(k))


def unit_normal(metric: InnerProduct, hyperplane: Subspace) -> np.ndarray:
    comp = orthogonal_complement(metric, hyperplane)
    if comp.dim != 1:
        raise PreconditionError(f"expected a hyperplane, complement has dimension {comp.dim}")
    return np.array(comp.basis[:, 0])


# ---------------------------------------------------------------------------
# zero-diagonal orthogonal conjugation
# ---------------------------------------------------------------------------

@dataclass
class OrthogonalConjugation:
    """``q`` is orthogonal and ``q @ a @ q.T`` has zero diagonal.

    ``rotation_log`` records each plane rotation as ``((i, j), angle)``.
    """

    q: np.ndarray
    rotation_log: list[tuple[tuple[int, int], float]] = field(default_factory=list)

    def apply(self, a: np.ndarray) -> np.ndarray:
        return self.q @ a @ self.q.T


def _small_tangent_root(a_ii: float, s: float, a_jj: float) -> float:
    # a_jj t^2 + s t + a_ii = 0 with a_ii * a_jj < 0; the roots have opposite signs
    disc = math.sqrt(s * s - 4.0 * a_ii * a_jj)
    q = -0.5 * (s + math.copysign(disc, s))
    r1, r2 = q / a_jj, a_ii / q
    return r1 if abs(r1) <= abs(r2) else r2


def zero_diagonal_conjugation(a, tol: float = TAU_ALG) -> OrthogonalConjugation:
    """Orthogonal ``Q`` with ``Q A Q^T`` zero on the diagonal, for traceless ``A``.

    Each step takes the largest positive and the most negative remaining
    diagonal entries ``i`` and ``j`` and rotates in the ``(i, j)`` plane by the
    smaller root ``t = tan(theta)`` of ``a_ii + (a_ij + a_ji) t + a_jj t^2 = 0``,
    which zeroes ``(i, i)``.  Index ``i`` is then frozen; the remaining
    block is still traceless.  At most ``n - 1`` rotations are needed.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    n = a.shape[0]
    scale = max(1.0, float(np.max(np.abs(a), initial=0.0)))
    if abs(np.trace(a)) > tol * scale:
        raise PreconditionError(f"matrix trace {np.trace(a):.3g} is not zero")
    b = a.copy()
    q = np.eye(n)
    log: list[tuple[tuple[int, int], float]] = []
    active = list(range(n))
    eps = 1e-15 * scale
    while len(active) > 1:
        d = np.array([b[k, k] for k in active])
        if np.max(np.abs(d)) <= eps:
            break
        # lowest index wins ties: argmax/argmin return the first occurrence
        i = active[int(np.argmax(d))]
        j = active[int(np.argmin(d))]
        if not (b[i, i] > 0.0 > b[j, j]):
            break
        t = _small_tangent_root(b[i, i], b[i, j] + b[j, i], b[j, j])
        theta = math.atan(t)
        cs, sn = math.cos(theta), math.sin(theta)
        rot = np.eye(n)
        rot[i, i], rot[i, j] = cs, sn
        rot[j, i], rot[j, j] = -sn, cs
        b = rot @ b @ rot.T
        q = rot @ q
        log.append(((i, j), theta))
        active.remove(i)
    assert len(log) <= max(n - 1, 0)
    final = q @ a @ q.T
    assert np.max(np.abs(np.diag(final)), initial=0.0) <= tol * scale, np.diag(final)
    return OrthogonalConjugation(q, log)
