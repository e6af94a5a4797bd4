"""Orthonormal geodesic bases built by construction.

* nilpotent algebras, any dimension: induction on central quotients;
* unimodular algebras with a codimension-one abelian ideal: conjugate the
  action of the normal vector to zero diagonal;
* unimodular algebras of dimension 3: eigenbasis of the symmetric map
  ``L(u x v) = [u, v]``;
* unimodular algebras of dimension 4: a case split on the derived algebra
  that reduces to the three constructions above.

Every entry point returns a :class:`~liegeo.geodesic.BasisReport` (or a
:class:`MilnorForm`) whose vectors were re-verified from scratch.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .geodesic import BasisReport, verify_basis
from .lie_core import (TAU_ALG, LieAlgebra, PreconditionError, Subspace, bracket, center,
                       derived_algebra, is_abelian_subspace, is_nilpotent, is_solvable,
                       is_unimodular, jacobi_residual, null_space, quotient_by_central_line,
                       span_basis)
from .metric import (InnerProduct, gram_schmidt, orthogonal_complement, orthonormal_basis,
                     unit_normal, zero_diagonal_conjugation)

INTERNAL_TOL = 1e-9


def _scale(alg: LieAlgebra) -> float:
    return max(1.0, float(np.max(np.abs(alg.c), initial=0.0)))


def _restrict(alg: LieAlgebra, metric: InnerProduct, sub: Subspace) -> tuple[LieAlgebra, np.ndarray]:
    """Subalgebra ``sub`` written in a metric-orthonormal basis of itself."""
    b = orthonormal_basis(metric, sub).basis
    proj = b.T @ metric.gram
    return alg.in_basis(b, lambda v: proj @ v), b


def _matrix_on(metric: InnerProduct, alg: LieAlgebra, x: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix ``A[r, s] = <b_r, [x, b_s]>`` of ``ad(x)`` on orthonormal columns ``b``."""
    imgs = np.column_stack([bracket(alg, x, b[:, s]) for s in range(b.shape[1])])
    return b.T @ metric.gram @ imgs


# ---------------------------------------------------------------------------
# nilpotent algebras
# ---------------------------------------------------------------------------

def _nilpotent_vectors(alg: LieAlgebra, metric: InnerProduct) -> list[np.ndarray]:
    n = alg.n
    if n == 0:
        return []
    if n == 1:
        e = np.ones(1)
        return [e / metric.norm(e)]
    z = center(alg).basis[:, 0]
    z = z / metric.norm(z)
    quot = quotient_by_central_line(alg, metric, z)
    lifted = [quot.lift @ x for x in _nilpotent_vectors(quot.algebra, quot.metric)]
    return lifted + [z]


def nilpotent_geodesic_basis(alg: LieAlgebra, metric: InnerProduct) -> BasisReport:
    """Orthonormal geodesic basis of a nilpotent metric Lie algebra.

    Picks a unit central vector ``z``, recurses on ``g / Span(z)`` with the
    metric pushed forward from ``z^⊥``, and lifts the result back into ``z^⊥``.
    Brackets of lifted vectors differ from the quotient brackets only by a
    multiple of ``z``, which is orthogonal to them, so they stay geodesic.
    """
    if not is_nilpotent(alg):
        raise PreconditionError("algebra is not nilpotent")
    return verify_basis(alg, metric, _nilpotent_vectors(alg, metric), path="nilpotent")


# ---------------------------------------------------------------------------
# codimension-one abelian ideal
# ---------------------------------------------------------------------------

def _check_abelian_ideal(alg: LieAlgebra, metric: InnerProduct, ideal: Subspace) -> np.ndarray:
    n = alg.n
    if ideal.n != n or ideal.dim != n - 1:
        raise PreconditionError(f"ideal must have dimension {n - 1}, got {ideal.dim}")
    if not is_abelian_subspace(alg, ideal):
        raise PreconditionError("subspace is not abelian")
    x = unit_normal(metric, ideal)
    lin = x @ metric.gram
    leak = max((abs(lin @ bracket(alg, e, ideal.basis[:, s]))
                for e in np.eye(n) for s in range(ideal.dim)), default=0.0)
    if leak > TAU_ALG * _scale(alg):
        raise PreconditionError("subspace is not an ideal")
    return x


def codim1_abelian_geodesic_basis(alg: LieAlgebra, metric: InnerProduct,
                                  ideal: Subspace) -> BasisReport:
    """Orthonormal geodesic basis of a unimodular algebra with a codimension-one abelian ideal.

    The unit normal ``x`` of the ideal is geodesic because the ideal contains
    every bracket.  ``ad(x)`` restricted to the ideal is traceless; rotating
    the ideal's orthonormal basis so that this map has zero diagonal makes
    each rotated vector geodesic as well.
    """
    if not is_unimodular(alg):
        raise PreconditionError("algebra is not unimodular")
    x = _check_abelian_ideal(alg, metric, ideal)
    b = orthonormal_basis(metric, ideal).basis
    a = _matrix_on(metric, alg, x, b)
    conj = zero_diagonal_conjugation(a)
    ys = b @ conj.q.T
    vectors = [x] + [ys[:, r] for r in range(ys.shape[1])]
    diag = {"rotations": [[list(p), float(t)] for p, t in conj.rotation_log]}
    return verify_basis(alg, metric, vectors, path="codim1_abelian", diagnostics=diag)


def _intersect(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] == 0 or b.shape[1] == 0:
        return np.zeros((a.shape[0], 0))
    k = null_space(np.column_stack([a, -b]))
    return span_basis(a @ k[: a.shape[1]])


def find_codim1_abelian_ideal(alg: LieAlgebra) -> Subspace | None:
    """An abelian hyperplane containing ``g'`` (hence an ideal), if one exists.

    Writing the hyperplane as ``g' + U`` with ``U`` a hyperplane of a
    complement ``C``: ``U`` must commute with ``g'``, and each component of the
    bracket restricted to ``C`` must vanish on ``U``.  A 2-form vanishes on
    ``ker(phi)`` only if it has rank at most two and ``phi`` lies in its row
    space, which pins down the candidates exactly.
    """
    n = alg.n
    if n == 0:
        return None
    d = derived_algebra(alg)
    k = d.dim
    if k == n or not is_abelian_subspace(alg, d):
        return None
    if k == n - 1:
        return d
    comp = null_space(d.basis.T) if k else np.eye(n)
    m = comp.shape[1]
    scale = _scale(alg)
    # directions of C commuting with g'
    if k:
        rows = np.concatenate(
            [np.column_stack([bracket(alg, comp[:, a], d.basis[:, b]) for a in range(m)])
             for b in range(k)], axis=0)
        kern = null_space(rows)
    else:
        kern = np.eye(m)
    if kern.shape[1] == m - 1:
        u = comp @ kern
    elif kern.shape[1] == m:
        forms = np.einsum("ia,jb,ijk->kab", comp, comp, alg.c)
        forms = forms.reshape(n, m, m)
        allowed = np.eye(m)
        for om in forms:
            if np.max(np.abs(om)) <= TAU_ALG * scale:
                continue
            rows_om = span_basis(om.T)
            if rows_om.shape[1] > 2:
                return None
            allowed = _intersect(allowed, rows_om)
            if allowed.shape[1] == 0:
                return None
        phi = allowed[:, -1]
        u = comp @ null_space(phi[None, :])
    else:
        return None
    cand = Subspace.spanned_by(np.column_stack([d.basis, u]))
    if cand.dim == n - 1 and is_abelian_subspace(alg, cand):
        return cand
    return None


# ---------------------------------------------------------------------------
# dimension 3
# ---------------------------------------------------------------------------

def jacobi_eigh(a, tol: float = 1e-12, max_sweeps: int = 30) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Returns ``(w, v)`` with ``a @ v[:, k] = w[k] * v[:, k]``, unsorted.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n) or np.max(np.abs(a - a.T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(a), initial=0.0)):
        raise ValueError("jacobi_eigh expects a symmetric matrix")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    thresh = tol * max(1.0, float(np.linalg.norm(a)))
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(a - np.diag(np.diag(a))))
        if off <= thresh:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q], rot[q, p] = s, -s
                a = rot.T @ a @ rot
                a[p, q] = a[q, p] = 0.0
                v = v @ rot
    else:
        raise RuntimeError("Jacobi eigenvalue iteration did not converge")
    return np.diag(a).copy(), v


@dataclass
class MilnorForm:
    """Orthonormal ``Y_1, Y_2, Y_3`` with ``[Y_2,Y_3] = l1 Y_1``, ``[Y_3,Y_1] = l2 Y_2``,
    ``[Y_1,Y_2] = l3 Y_3``."""

    basis: list[np.ndarray]
    lambdas: tuple[float, float, float]

    def relation_residual(self, alg: LieAlgebra) -> float:
        y1, y2, y3 = self.basis
        l1, l2, l3 = self.lambdas
        return float(max(np.max(np.abs(bracket(alg, y2, y3) - l1 * y1)),
                         np.max(np.abs(bracket(alg, y3, y1) - l2 * y2)),
                         np.max(np.abs(bracket(alg, y1, y2) - l3 * y3))))


def _sign_fix(v: np.ndarray) -> np.ndarray:
    for x in v:
        if abs(x) > 1e-12:
            return v if x > 0 else -v
    return v


def milnor_basis_dim3(alg: LieAlgebra, metric: InnerProduct) -> MilnorForm:
    if alg.n != 3:
        raise PreconditionError(f"expected a 3-dimensional algebra, got dimension {alg.n}")
    if not is_unimodular(alg):
        raise PreconditionError("algebra is not unimodular")
    x = np.column_stack(gram_schmidt(metric, np.eye(3)))
    if np.linalg.det(x) < 0:
        x[:, 2] = -x[:, 2]
    x1, x2, x3 = x.T
    # with X_1 x X_2 = X_3 cyclically: L(X_1) = [X_2,X_3], L(X_2) = [X_3,X_1], L(X_3) = [X_1,X_2]
    images = np.column_stack([bracket(alg, x2, x3), bracket(alg, x3, x1), bracket(alg, x1, x2)])
    lmat = x.T @ metric.gram @ images
    if np.max(np.abs(lmat - lmat.T)) > 1e-8 * _scale(alg):
        raise PreconditionError("L is not symmetric; the algebra is not unimodular")
    w, v = jacobi_eigh(0.5 * (lmat + lmat.T))
    order = np.argsort(w, kind="stable")
    w, v = w[order], v[:, order]
    v[:, 0] = _sign_fix(v[:, 0])
    v[:, 1] = _sign_fix(v[:, 1])
    v[:, 2] = np.cross(v[:, 0], v[:, 1])
    y = x @ v
    return MilnorForm([y[:, k] for k in range(3)], (float(w[0]), float(w[1]), float(w[2])))


def milnor_geodesic_basis(alg: LieAlgebra, metric: InnerProduct) -> BasisReport:
    form = milnor_basis_dim3(alg, metric)
    return verify_basis(alg, metric, form.basis, path="dim3/milnor",
                        diagnostics={"lambdas": list(form.lambdas)})


# ---------------------------------------------------------------------------
# dimension 4
# ---------------------------------------------------------------------------

class Dim4CaseTag(str, Enum):
    not_solvable = "not_solvable"
    derived_dim0 = "derived_dim0"
    derived_dim1_nilpotent = "derived_dim1_nilpotent"
    derived_dim2 = "derived_dim2"
    derived_dim3_abelian = "derived_dim3_abelian"
    derived_dim3_heisenberg = "derived_dim3_heisenberg"


def _check_dim4(alg: LieAlgebra) -> None:
    if alg.n != 4:
        raise PreconditionError(f"expected a 4-dimensional algebra, got dimension {alg.n}")
    if not is_unimodular(alg):
        raise PreconditionError("algebra is not unimodular")


def classify_dim4(alg: LieAlgebra) -> Dim4CaseTag:
    _check_dim4(alg)
    if not is_solvable(alg):
        return Dim4CaseTag.not_solvable
    d = derived_algebra(alg)
    if d.dim == 0:
        return Dim4CaseTag.derived_dim0
    if d.dim == 1:
        return Dim4CaseTag.derived_dim1_nilpotent
    if d.dim == 2:
        return Dim4CaseTag.derived_dim2
    if d.dim == 3:
        if is_abelian_subspace(alg, d):
            return Dim4CaseTag.derived_dim3_abelian
        return Dim4CaseTag.derived_dim3_heisenberg
    raise AssertionError("a solvable algebra has a proper derived algebra")


def _not_solvable(alg: LieAlgebra, metric: InnerProduct) -> BasisReport:
    h = derived_algebra(alg)
    assert h.dim == 3, f"derived algebra of dimension {h.dim} in the non-solvable case"
    sub, b = _restrict(alg, metric, h)
    form = milnor_basis_dim3(sub, InnerProduct.identity(3))
    w = unit_normal(metric, h)
    ys = [b @ y for y in form.basis]
    return verify_basis(alg, metric, ys + [w], path="dim4/not_solvable",
                        diagnostics={"lambdas": list(form.lambdas)})


def _derived_dim2(alg: LieAlgebra, metric: InnerProduct) -> BasisReport:
    d = derived_algebra(alg)
    db = orthonormal_basis(metric, d).basis
    x, y = orthogonal_complement(metric, d).basis.T
    mx = _matrix_on(metric, alg, x, db)
    my = _matrix_on(metric, alg, y, db)
    nx, ny = np.linalg.norm(mx), np.linalg.norm(my)
    scale = max(nx, ny, 1e-300)
    # commuting traceless 2x2 maps are linearly dependent; find alpha*mx + beta*my = 0
    if ny <= 1e-12 * scale:
        alpha, beta = 0.0, 1.0
    elif nx <= 1e-12 * scale:
        alpha, beta = 1.0, 0.0
    else:
        kappa = float(np.sum(mx * my) / (ny * ny))
        dep = float(np.max(np.abs(mx - kappa * my)))
        assert dep <= INTERNAL_TOL * scale, f"restrictions are not dependent ({dep:.3g})"
        alpha, beta = 1.0 / math.hypot(1.0, kappa), -kappa / math.hypot(1.0, kappa)
    y_new = alpha * x + beta * y
    m_new = _matrix_on(metric, alg, y_new, db)
    resid = float(np.max(np.abs(m_new)))
    assert resid <= INTERNAL_TOL * _scale(alg), f"rotated restriction is {resid:.3g}"
    ideal = Subspace(np.column_stack([y_new, db]))
    rep = codim1_abelian_geodesic_basis(alg, metric, ideal)
    rep.path = "dim4/derived_dim2"
    rep.diagnostics.update({"plane_angle": math.atan2(beta, alpha), "ad_restricted_max": resid})
    return rep


def _derived_dim3_heisenberg(alg: LieAlgebra, metric: InnerProduct) -> BasisReport:
    d = derived_algebra(alg)
    sub, db = _restrict(alg, metric, d)
    zc = center(sub)
    assert zc.dim == 1, f"center of the derived algebra has dimension {zc.dim}"
    ident = InnerProduct.identity(3)
    zloc = zc.basis[:, 0] / np.linalg.norm(zc.basis[:, 0])
    xloc, yloc = orthogonal_complement(ident, Subspace(zloc)).basis.T
    x, y, z = db @ xloc, db @ yloc, db @ zloc
    lam = metric.ip(bracket(alg, x, y), z)
    assert abs(lam) > TAU_ALG * _scale(alg), "derived algebra is abelian"
    w = unit_normal(metric, d)
    a_mat = _matrix_on(metric, alg, w, np.column_stack([x, y, z]))
    a, b, c, dd = a_mat[0, 0], a_mat[0, 1], a_mat[1, 0], a_mat[1, 1]
    e, f, g = a_mat[2, 0], a_mat[2, 1], a_mat[2, 2]
    tol = INTERNAL_TOL * max(1.0, float(np.max(np.abs(a_mat))))
    assert max(abs(a_mat[0, 2]), abs(a_mat[1, 2])) <= tol, "ad(W) does not preserve the center"
    assert abs(a + dd) <= tol and abs(g) <= tol, f"a+d = {a + dd:.3g}, g = {g:.3g}"
    conj = zero_diagonal_conjugation(np.array([[a, b], [c, dd]]))
    q = conj.q
    x_new, y_new = q[0, 0] * x + q[0, 1] * y, q[1, 0] * x + q[1, 1] * y
    diag = {"lambda": float(lam), "A": a_mat.tolist(), "a_plus_d": float(a + dd), "g": float(g),
            "e": float(e), "f": float(f)}
    return verify_basis(alg, metric, [w, x_new, y_new, z], path="dim4/derived_dim3_heisenberg",
                        diagnostics=diag)


def dim4_geodesic_basis(alg: LieAlgebra, metric: InnerProduct) -> BasisReport:
    """Orthonormal geodesic basis of a 4-dimensional unimodular metric Lie algebra.

    Dispatches on :func:`classify_dim4`; assertion failures inside a branch
    mean a bug or non-Lie input, never a genuine obstruction.
    """
    _check_dim4(alg)
    jr = jacobi_residual(alg)
    if jr > TAU_ALG * _scale(alg) ** 2:
        raise PreconditionError(f"Jacobi identity fails (residual {jr:.3g})")
    tag = classify_dim4(alg)
    if tag is Dim4CaseTag.not_solvable:
        rep = _not_solvable(alg, metric)
    elif tag in (Dim4CaseTag.derived_dim0, Dim4CaseTag.derived_dim1_nilpotent):
        rep = nilpotent_geodesic_basis(alg, metric)
        rep.path = f"dim4/{tag.value}"
    elif tag is Dim4CaseTag.derived_dim2:
        rep = _derived_dim2(alg, metric)
    elif tag is Dim4CaseTag.derived_dim3_abelian:
        rep = codim1_abelian_geodesic_basis(alg, metric, derived_algebra(alg))
        rep.path = "dim4/derived_dim3_abelian"
    else:
        rep = _derived_dim3_heisenberg(alg, metric)
    rep.diagnostics["case"] = tag.value
    return rep
