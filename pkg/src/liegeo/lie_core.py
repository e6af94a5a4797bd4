"""Real Lie algebras given by structure constants over a fixed reference basis.

``c[i, j, k]`` is the coefficient of ``e_k`` in ``[e_i, e_j]``.  Vectors are
plain 1-D numpy arrays of coordinates in the reference basis; subspaces are
column matrices wrapped in :class:`Subspace`.

Rank and kernel decisions use Gauss-Jordan elimination with partial pivoting
and a pivot threshold relative to the largest column norm of the input.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np

TAU_ALG = 1e-9
TAU_RANK = 1e-9


class PreconditionError(ValueError):
    """An operation was called on input outside its domain."""


# ---------------------------------------------------------------------------
# elimination helpers
# ---------------------------------------------------------------------------

def _rref(m: np.ndarray, tol: float = TAU_RANK,
          floor: float = 0.0) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of ``m`` and its pivot columns.

    A column is a pivot column only if its best remaining entry exceeds
    ``tol`` times the largest column norm of ``m``, and also ``floor``.
    """
    a = np.array(m, dtype=float, copy=True)
    if a.ndim != 2:
        raise ValueError("expected a 2-D array")
    rows, cols = a.shape
    if a.size == 0:
        return a[:0], []
    scale = float(np.max(np.linalg.norm(a, axis=0)))
    if scale == 0.0 or scale <= floor:
        return a[:0], []
    thr = max(tol * scale, floor)
    pivots: list[int] = []
    r = 0
    for col in range(cols):
        if r == rows:
            break
        p = r + int(np.argmax(np.abs(a[r:, col])))
        if abs(a[p, col]) <= thr:
            a[r:, col] = 0.0
            continue
        if p != r:
            a[[r, p]] = a[[p, r]]
        a[r] /= a[r, col]
        a[r, col] = 1.0
        for i in range(rows):
            if i != r and a[i, col] != 0.0:
                a[i] -= a[i, col] * a[r]
                a[i, col] = 0.0
        pivots.append(col)
        r += 1
    return a[:r], pivots


def rank(m: np.ndarray, tol: float = TAU_RANK) -> int:
    return len(_rref(m, tol)[1])


def span_basis(columns: np.ndarray, tol: float = TAU_RANK, floor: float = 0.0) -> np.ndarray:
    """Basis (as columns) of the column space of ``columns``."""
    columns = np.asarray(columns, dtype=float)
    n = columns.shape[0]
    if columns.ndim != 2 or columns.shape[1] == 0:
        return np.zeros((n, 0))
    r, _ = _rref(columns.T, tol, floor)
    return r.T.copy()


def null_space(m: np.ndarray, tol: float = TAU_RANK, floor: float = 0.0) -> np.ndarray:
    """Basis (as columns) of ``{x : m @ x = 0}``."""
    m = np.asarray(m, dtype=float)
    n = m.shape[1]
    r, pivots = _rref(m, tol, floor)
    free = [j for j in range(n) if j not in pivots]
    out = np.zeros((n, len(free)))
    for col, f in enumerate(free):
        out[f, col] = 1.0
        for row, p in enumerate(pivots):
            out[p, col] = -r[row, f]
    return out


# ---------------------------------------------------------------------------
# types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Subspace:
    """Span of the columns of ``basis`` (shape ``n x k``, full column rank).

    ``metric_tag`` names the inner product under which the columns are
    orthonormal, if they are.
    """

    basis: np.ndarray
    metric_tag: str | None = None

    def __post_init__(self):
        b = np.array(self.basis, dtype=float)
        if b.ndim == 1:
            b = b[:, None]
        if b.shape[1] and rank(b) != b.shape[1]:
            raise ValueError("subspace columns are linearly dependent")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @classmethod
    def spanned_by(cls, columns, tol: float = TAU_RANK) -> "Subspace":
        return cls(span_basis(np.asarray(columns, dtype=float), tol))

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(np.zeros((n, 0)))

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(np.eye(n))

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def contains(self, v: np.ndarray, tol: float = TAU_RANK) -> bool:
        v = np.asarray(v, dtype=float)
        if not np.any(v):
            return True
        return rank(np.column_stack([self.basis, v]), tol) == self.dim

    def __eq__(self, other):  # span equality, not basis equality
        if not isinstance(other, Subspace):
            return NotImplemented
        if other.n != self.n or other.dim != self.dim:
            return False
        return rank(np.column_stack([self.basis, other.basis])) == self.dim

    __hash__ = None


class LieAlgebra:
    """Structure constants of a real Lie algebra over a fixed reference basis.

    The input tensor may specify each bracket in one orientation only; the
    other is filled in by antisymmetry.  Input giving both orientations
    inconsistently is rejected.  The Jacobi identity is *not* enforced here,
    see :func:`jacobi_residual`.
    """

    def __init__(self, c, name: str | None = None):
        c = np.array(c, dtype=float)
        if c.ndim != 3 or c.shape[0] != c.shape[1] or c.shape[1] != c.shape[2]:
            raise ValueError(f"structure constants must have shape (n, n, n), got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("structure constants must be finite")
        n = c.shape[0]
        for i in range(n):
            if np.max(np.abs(c[i, i]), initial=0.0) > TAU_ALG:
                raise ValueError(f"[e_{i + 1}, e_{i + 1}] must vanish")
            c[i, i] = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                up, lo = c[i, j], c[j, i]
                if not np.any(lo):
                    c[j, i] = -up
                elif not np.any(up):
                    c[i, j] = -lo
                elif np.max(np.abs(up + lo)) > TAU_ALG:
                    raise ValueError(
                        f"inconsistent brackets for the pair ({i + 1}, {j + 1})")
                else:
                    c[j, i] = -up
        c += 0.0  # no negative zeros, so equal algebras have equal bytes
        c.setflags(write=False)
        self._c = c
        self.name = name

    @classmethod
    def from_brackets(cls, n: int, brackets: Mapping[tuple[int, int], Mapping[int, float]],
                      name: str | None = None) -> "LieAlgebra":
        """Build from sparse relations ``{(i, j): {k: coeff}}``, zero-based."""
        c = np.zeros((n, n, n))
        for (i, j), coeffs in brackets.items():
            for k, v in coeffs.items():
                c[i, j, k] = v
        return cls(c, name=name)

    @classmethod
    def abelian(cls, n: int, name: str | None = None) -> "LieAlgebra":
        return cls(np.zeros((n, n, n)), name=name)

    @property
    def c(self) -> np.ndarray:
        return self._c

    @property
    def n(self) -> int:
        return self._c.shape[0]

    def brackets(self) -> dict[tuple[int, int], dict[int, float]]:
        """Nonzero relations ``[e_i, e_j]`` with ``i < j``, zero-based."""
        out = {}
        for i in range(self.n):
            for j in range(i + 1, self.n):
                nz = {k: float(self._c[i, j, k]) for k in range(self.n) if self._c[i, j, k] != 0.0}
                if nz:
                    out[(i, j)] = nz
        return out

    def in_basis(self, b: np.ndarray, coords) -> "LieAlgebra":
        """Algebra rewritten in the basis given by the columns of ``b``.

        ``coords(v)`` must return the coordinates of an element of the
        spanned subalgebra in that basis.  Used for restrictions to
        subalgebras and for changes of reference basis.
        """
        k = b.shape[1]
        c = np.zeros((k, k, k))
        for a in range(k):
            for bb in range(a + 1, k):
                c[a, bb] = coords(bracket(self, b[:, a], b[:, bb]))
        # rounding noise relative to the parent algebra would otherwise look
        # like rank to the relative pivot test, e.g. in abelian quotients
        size = float(np.max(np.linalg.norm(b, axis=0), initial=1.0))
        floor = 1e-13 * max(1.0, float(np.max(np.abs(self._c), initial=0.0))) * size ** 3
        c[np.abs(c) <= floor] = 0.0
        return LieAlgebra(c, name=self.name)

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"<LieAlgebra{label} dim={self.n}>"


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def _check_vec(alg: LieAlgebra, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (alg.n,):
        raise ValueError(f"expected a vector of length {alg.n}, got shape {v.shape}")
    return v


def bracket(alg: LieAlgebra, u, v) -> np.ndarray:
    u = _check_vec(alg, u)
    v = _check_vec(alg, v)
    # summing u_i v_j - u_j v_i over i < j makes [u, v] = -[v, u] exactly in floating point
    w = np.triu(np.outer(u, v) - np.outer(v, u), 1)
    return np.einsum("ij,ijk->k", w, alg.c)


def jacobi_residual(alg: LieAlgebra) -> float:
    """Largest Euclidean norm of the Jacobi sum over basis triples."""
    if alg.n == 0:
        return 0.0
    c = alg.c
    # [e_i,[e_j,e_k]] + [e_j,[e_k,e_i]] + [e_k,[e_i,e_j]]
    s = (np.einsum("jkm,imp->ijkp", c, c)
         + np.einsum("kim,jmp->ijkp", c, c)
         + np.einsum("ijm,kmp->ijkp", c, c))
    return float(np.max(np.linalg.norm(s, axis=-1)))


def adjoint_matrix(alg: LieAlgebra, y) -> np.ndarray:
    """Matrix of ``ad(y)``: column ``j`` is ``[y, e_j]``."""
    y = _check_vec(alg, y)
    return np.einsum("i,ijk->kj", y, alg.c)


def is_unimodular(alg: LieAlgebra, tol: float = TAU_ALG) -> bool:
    # tr ad(e_i) = sum_j c[i, j, j]
    traces = np.einsum("ijj->i", alg.c)
    return bool(np.all(np.abs(traces) <= tol))


def _brackets_of(alg: LieAlgebra, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """All brackets of columns of ``left`` with columns of ``right``, as columns."""
    if left.shape[1] == 0 or right.shape[1] == 0:
        return np.zeros((alg.n, 0))
    out = np.einsum("ia,jb,ijk->kab", left, right, alg.c)
    return out.reshape(alg.n, -1)


def _noise_floor(alg: LieAlgebra, *bases: np.ndarray) -> float:
    # brackets far below the algebra's own scale are rounding, not rank
    f = TAU_RANK * float(np.max(np.abs(alg.c), initial=0.0))
    for b in bases:
        f *= float(np.max(np.linalg.norm(b, axis=0), initial=0.0))
    return f


def bracket_span(alg: LieAlgebra, left: Subspace, right: Subspace) -> Subspace:
    """``[left, right]`` as a subspace."""
    floor = _noise_floor(alg, left.basis, right.basis)
    return Subspace(span_basis(_brackets_of(alg, left.basis, right.basis), floor=floor))


def derived_algebra(alg: LieAlgebra) -> Subspace:
    full = Subspace.full(alg.n)
    return bracket_span(alg, full, full)


def center(alg: LieAlgebra) -> Subspace:
    n = alg.n
    if n == 0:
        return Subspace.zero(0)
    # row block i is ad(e_i); z central iff [e_i, z] = 0 for all i
    stacked = np.concatenate([adjoint_matrix(alg, e) for e in np.eye(n)], axis=0)
    return Subspace(null_space(stacked, floor=_noise_floor(alg)))


def derived_series(alg: LieAlgebra) -> list[Subspace]:
    """``g ⊇ g' ⊇ g'' ⊇ ...``, stopping at zero or when it stabilizes."""
    series = [Subspace.full(alg.n)]
    while series[-1].dim > 0:
        nxt = bracket_span(alg, series[-1], series[-1])
        if nxt.dim == series[-1].dim:
            break
        series.append(nxt)
    return series


def lower_central_series(alg: LieAlgebra) -> list[Subspace]:
    """``g ⊇ [g,g] ⊇ [g,[g,g]] ⊇ ...``, stopping at zero or when it stabilizes."""
    full = Subspace.full(alg.n)
    series = [full]
    while series[-1].dim > 0:
        nxt = bracket_span(alg, full, series[-1])
        if nxt.dim == series[-1].dim:
            break
        series.append(nxt)
    return series


def is_solvable(alg: LieAlgebra) -> bool:
    return derived_series(alg)[-1].dim == 0


def is_nilpotent(alg: LieAlgebra) -> bool:
    return lower_central_series(alg)[-1].dim == 0


def is_abelian_subspace(alg: LieAlgebra, sub: Subspace, tol: float = TAU_ALG) -> bool:
    br = _brackets_of(alg, sub.basis, sub.basis)
    scale = max(1.0, float(np.max(np.abs(alg.c), initial=0.0)))
    return bool(np.max(np.abs(br), initial=0.0) <= tol * scale)


class CentralQuotient(NamedTuple):
    """Quotient ``g / Span(z)`` realized on an orthonormal basis of ``z^⊥``.

    ``lift`` (``n x (n-1)``) maps quotient coordinates into ``z^⊥``;
    ``projection`` (``(n-1) x n``) maps ``g`` onto quotient coordinates.
    """

    algebra: LieAlgebra
    metric: "InnerProduct"
    lift: np.ndarray
    projection: np.ndarray


def quotient_by_central_line(alg: LieAlgebra, metric, z) -> CentralQuotient:
    """Quotient by a central unit vector, with the inner product that makes
    the projection restricted to ``z^⊥`` an isometry."""
    from .metric import InnerProduct, ip, orthogonal_complement

    z = _check_vec(alg, z)
    if abs(ip(metric, z, z) - 1.0) > TAU_ALG:
        raise PreconditionError("z must have unit length")
    scale = max(1.0, float(np.max(np.abs(alg.c), initial=0.0)))
    if np.max(np.abs(adjoint_matrix(alg, z)), initial=0.0) > TAU_ALG * scale:
        raise PreconditionError("z is not central")
    p = orthogonal_complement(metric, Subspace(z)).basis
    proj = p.T @ metric.gram
    quot = alg.in_basis(p, lambda v: proj @ v)
    quot.name = None if alg.name is None else f"{alg.name}/z"
    return CentralQuotient(quot, InnerProduct(np.eye(alg.n - 1)), p, proj)
