"""Built-in algebras, with the 5-dimensional solvable unimodular counterexample.

Reference basis of :func:`example5` is ``X_1, ..., X_5`` (indices 0..4) with

    [X_1,X_2] = 3X_2    [X_2,X_3] = X_4
    [X_1,X_3] = -4X_3   [X_2,X_4] = X_5
    [X_1,X_4] = -X_4
    [X_1,X_5] = 2X_5

It is unimodular, yet no inner product gives it an orthonormal basis of
geodesic vectors.  :func:`certify_no_orthonormal_geodesic_basis` checks the
ingredients of that impossibility numerically for a given inner product.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geodesic import (GeodesicSearchConfig, geodesic_residual, is_geodesic_via_image,
                       search_geodesics)
from .lie_core import (TAU_ALG, LieAlgebra, Subspace, adjoint_matrix, derived_algebra,
                       span_basis)
from .metric import InnerProduct, gram_schmidt, orthogonal_complement, unit_normal

CERT_TOL = 1e-8


def example5() -> LieAlgebra:
    return LieAlgebra.from_brackets(5, {
        (0, 1): {1: 3.0},
        (0, 2): {2: -4.0},
        (0, 3): {3: -1.0},
        (0, 4): {4: 2.0},
        (1, 2): {3: 1.0},
        (1, 3): {4: 1.0},
    }, name="example5")


def flag_subspaces() -> list[Subspace]:
    """``V_1 ⊃ ... ⊃ V_5`` with ``V_i = Span(X_i, ..., X_5)``."""
    e = np.eye(5)
    return [Subspace(e[:, i:]) for i in range(5)]


def classify_case(y, tol: float = TAU_ALG) -> int:
    """Case number ``i`` in 1..5 with ``y`` in ``V_{6-i}`` but not ``V_{7-i}``.

    Case 5 means ``a_1 != 0``; case 1 means ``y`` is a multiple of ``X_5``.
    Coordinates are compared against ``tol`` after scaling ``y`` to unit
    max-norm.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (5,):
        raise ValueError("expected a vector of length 5")
    m = np.max(np.abs(y))
    if m == 0.0:
        raise ValueError("the zero vector has no case")
    lead = int(np.flatnonzero(np.abs(y / m) > tol)[0])
    return 5 - lead


# ---------------------------------------------------------------------------
# the special inner products
# ---------------------------------------------------------------------------

def _check_eps(epsilon: float) -> float:
    epsilon = float(epsilon)
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    return epsilon


def remark_metric(epsilon: float) -> InnerProduct:
    """All ``X_i`` unit and mutually orthogonal except ``<X_4, X_5> = epsilon``."""
    epsilon = _check_eps(epsilon)
    g = np.eye(5)
    g[3, 4] = g[4, 3] = epsilon
    return InnerProduct(g, tag=f"remark(eps={epsilon!r})")


@dataclass
class QuarticReport:
    epsilon: float
    coefficients: tuple[float, float, float, float, float]  # t^4 down to t^0
    roots: list[float]
    t_plus: float
    t_minus: float

    def value(self, t: float) -> float:
        return _horner(self.coefficients, t)

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "coefficients": list(self.coefficients),
            "roots": [{"t": r, "sign": "positive" if r > 0 else "negative" if r < 0 else "zero"}
                      for r in self.roots],
            "t_plus": self.t_plus,
            "t_minus": self.t_minus,
        }


def quartic_coefficients(epsilon: float) -> tuple[float, float, float, float, float]:
    e = epsilon
    return (-2.0 * e * e, -(4.0 * e + e ** 3), 2.0 - e * e, 9.0 * e, 1.0 + 4.0 * e * e)


def _horner(coeffs, t: float) -> float:
    acc = 0.0
    for c in coeffs:
        acc = acc * t + c
    return acc


def _derivative(coeffs):
    deg = len(coeffs) - 1
    return tuple(c * (deg - i) for i, c in enumerate(coeffs[:-1]))


def _bisect_root(coeffs, lo: float, hi: float, tol: float = 1e-13) -> float:
    flo = _horner(coeffs, lo)
    for _ in range(200):
        if hi - lo <= tol * max(1.0, abs(lo), abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        fm = _horner(coeffs, mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    # Newton polish, kept inside the bracket
    d = _derivative(coeffs)
    for _ in range(3):
        dv = _horner(d, t)
        if dv == 0.0:
            break
        nt = t - _horner(coeffs, t) / dv
        if not lo - 1e-12 <= nt <= hi + 1e-12:
            break
        t = nt
    return t


def real_roots(coeffs) -> list[float]:
    """All real roots of a polynomial, highest degree first.

    Roots of the derivative split the line into monotone pieces; each piece
    with a sign change holds exactly one root, found by bisection and a
    Newton polish.  Even-multiplicity roots are caught at critical points.
    """
    coeffs = tuple(float(c) for c in coeffs)
    while len(coeffs) > 1 and coeffs[0] == 0.0:
        coeffs = coeffs[1:]
    deg = len(coeffs) - 1
    if deg < 1:
        return []
    if deg == 1:
        return [-coeffs[1] / coeffs[0]]
    bound = 1.0 + max(abs(c / coeffs[0]) for c in coeffs[1:])
    crit = [c for c in real_roots(_derivative(coeffs)) if -bound < c < bound]
    points = [-bound] + sorted(crit) + [bound]
    scale = max(abs(c) for c in coeffs)
    roots: list[float] = []
    for lo, hi in zip(points[:-1], points[1:]):
        flo, fhi = _horner(coeffs, lo), _horner(coeffs, hi)
        if flo == 0.0:
            r = lo
        elif fhi == 0.0 or (flo < 0) == (fhi < 0):
            continue
        else:
            r = _bisect_root(coeffs, lo, hi)
        if not roots or abs(r - roots[-1]) > 1e-12 * max(1.0, abs(r)):
            roots.append(r)
    for c in crit:
        if abs(_horner(coeffs, c)) <= 1e-14 * scale and all(abs(c - r) > 1e-9 for r in roots):
            roots.append(c)
    if abs(_horner(coeffs, bound)) == 0.0:
        roots.append(bound)
    return sorted(roots)


def remark_quartic(epsilon: float) -> QuarticReport:
    """The quartic in ``t = a_5 / a_4`` whose roots give the geodesics in ``V_3``."""
    epsilon = _check_eps(epsilon)
    coeffs = quartic_coefficients(epsilon)
    roots = real_roots(coeffs)
    pos = [r for r in roots if r > 0]
    neg = [r for r in roots if r < 0]
    # p(0) = 1 + 4 eps^2 > 0 and the leading coefficient is negative
    assert pos and neg, f"expected roots of both signs, got {roots}"
    return QuarticReport(epsilon, coeffs, roots, min(pos), max(neg))


@dataclass
class SpanningGeodesics:
    epsilon: float
    vectors: list[np.ndarray]  # Y_1, Y_2, Y_3, Y_+, Y_-
    residuals: list[float]
    span_rank: int
    quartic: QuarticReport

    def eq1_residual(self, y) -> float:
        _, _, a3, a4, a5 = y
        return abs(4 * a3 * a3 + a4 * a4 - 2 * a5 * a5 - self.epsilon * a4 * a5)

    def eq2_residual(self, y) -> float:
        _, _, a3, a4, a5 = y
        return abs(a3 * (a4 + self.epsilon * a5) + a4 * (self.epsilon * a4 + a5))

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "labels": ["Y_1", "Y_2", "Y_3", "Y_+", "Y_-"],
            "vectors": [[float(x) for x in v] for v in self.vectors],
            "residuals": [float(r) for r in self.residuals],
            "span_rank": self.span_rank,
        }


def remark_spanning_geodesics(epsilon: float) -> SpanningGeodesics:
    """Five geodesic vectors spanning :func:`example5` under :func:`remark_metric`."""
    from .lie_core import rank

    epsilon = _check_eps(epsilon)
    alg, metric = example5(), remark_metric(epsilon)
    y1 = unit_normal(metric, derived_algebra(alg))
    s3 = math.sqrt(3.0)
    # sqrt(3) a_2 = 2 a_3 and sqrt(3) a_2 = -2 a_3
    y2 = np.array([0.0, 2.0, s3, 0.0, 0.0])
    y3 = np.array([0.0, 2.0, -s3, 0.0, 0.0])
    quartic = remark_quartic(epsilon)
    vs = [y1, y2, y3]
    for t in (quartic.t_plus, quartic.t_minus):
        a3 = -(epsilon + t) / (1.0 + epsilon * t)
        vs.append(np.array([0.0, 0.0, a3, 1.0, t]))
    residuals = [geodesic_residual(alg, metric, v) for v in vs]
    return SpanningGeodesics(epsilon, vs, residuals, rank(np.column_stack(vs)), quartic)


# ---------------------------------------------------------------------------
# certificate
# ---------------------------------------------------------------------------

@dataclass
class NoBasisCertificate:
    metric: InnerProduct
    fact_small_flags: dict
    fact_outside_v2: dict
    fact_case4_orthogonality: dict
    fact_image_formulas: dict
    fact_trace: float
    sampled_geodesics: list[np.ndarray] = field(repr=False, default_factory=list)
    conclusion: bool = False

    def to_dict(self) -> dict:
        return {
            "gram": self.metric.gram.tolist(),
            "fact_small_flags": self.fact_small_flags,
            "fact_outside_v2": self.fact_outside_v2,
            "fact_case4_orthogonality": self.fact_case4_orthogonality,
            "fact_image_formulas": self.fact_image_formulas,
            "fact_trace": self.fact_trace,
            "n_sampled_geodesics": len(self.sampled_geodesics),
            "conclusion": self.conclusion,
        }


def trace_on_v3(metric: InnerProduct) -> float:
    """Trace of ``ad(X_1)`` restricted to the invariant subspace ``V_3``.

    Computed as the trace of ``<b_r, [X_1, b_s]>`` for a metric-orthonormal
    basis ``b`` of ``V_3``, the matrix whose diagonal an orthonormal geodesic
    triple in ``V_3`` would force to vanish.
    """
    if metric.n != 5:
        raise ValueError("expected an inner product on the 5-dimensional reference basis")
    e = np.eye(5)
    b3 = np.column_stack(gram_schmidt(metric, [e[2], e[3], e[4]]))
    ad1 = adjoint_matrix(example5(), e[0])
    leak = orthogonal_complement(metric, Subspace(b3)).basis.T @ metric.gram @ ad1 @ b3
    assert float(np.max(np.abs(leak))) <= 1e-12, "V_3 is not ad(X_1)-invariant"
    return float(np.trace(b3.T @ metric.gram @ ad1 @ b3))


def _min_residual_on_circle(alg, metric, u, v, samples=240) -> float:
    return min(geodesic_residual(alg, metric, math.cos(t) * u + math.sin(t) * v)
               for t in np.linspace(0.0, math.pi, samples, endpoint=False))


def _same_span(a: np.ndarray, b: np.ndarray) -> bool:
    from .lie_core import rank

    ra, rb = rank(a), rank(b)
    return ra == rb == rank(np.column_stack([a, b]))


def certify_no_orthonormal_geodesic_basis(metric: InnerProduct,
                                          cfg: GeodesicSearchConfig | None = None,
                                          rng: np.random.Generator | None = None
                                          ) -> NoBasisCertificate:
    """Check, for this inner product, each step of the impossibility argument.

    (a) no geodesic lies in ``V_4`` (so none in ``V_5``);
    (b) the only geodesic direction outside ``V_2`` is the normal of ``V_2``;
    (c) geodesics in ``V_2 \\ V_3`` are orthogonal to ``V_4``;
    (d) ``ad(X_1)`` restricted to ``V_3`` has trace ``-3``.

    By (a)-(c) an orthonormal geodesic basis would need three orthonormal
    geodesics in ``V_3``; ``ad(X_1)`` would then have zero diagonal on them,
    which (d) rules out.  Facts (b) and (c) are sampled with a multistart
    search (``cfg``), so they are numerical witnesses, not proofs.
    """
    if metric.n != 5:
        raise ValueError("expected an inner product on the 5-dimensional reference basis")
    alg = example5()
    cfg = cfg or GeodesicSearchConfig()
    rng = rng or np.random.default_rng(0)
    e = np.eye(5)
    v2 = derived_algebra(alg)

    # (a): V_5 and V_4 contain no geodesic vector
    u4, w4 = gram_schmidt(metric, [e[3], e[4]])
    min_v4 = _min_residual_on_circle(alg, metric, u4, w4)
    res_x5 = geodesic_residual(alg, metric, e[4])
    small = {
        "x5_residual": res_x5,
        "x5_via_image": is_geodesic_via_image(alg, metric, e[4]),
        "v4_min_residual": min_v4,
    }
    small["ok"] = bool(res_x5 > 1e-6 and min_v4 > 1e-6 and not small["x5_via_image"])

    search = search_geodesics(alg, metric, cfg)
    found = search.vectors
    cases = [classify_case(y) for y in found]

    # (b): Img ad(Y) = V_2 whenever a_1 != 0, so such a geodesic is normal to V_2
    normal = unit_normal(metric, v2)
    image_is_v2 = True
    for _ in range(8):
        y = e[0] * rng.uniform(0.5, 2.0) * rng.choice([-1, 1]) + v2.basis @ rng.standard_normal(4)
        image_is_v2 &= _same_span(span_basis(adjoint_matrix(alg, y)), v2.basis)
    outside = [y for y, c in zip(found, cases) if c == 5]
    parallel = [min(metric.norm(y - normal), metric.norm(y + normal)) for y in outside]
    fact_b = {
        "normal": normal.tolist(),
        "normal_residual": geodesic_residual(alg, metric, normal),
        "image_is_v2": bool(image_is_v2),
        "n_found": len(outside),
        "max_distance_to_normal": max(parallel, default=0.0),
    }
    fact_b["ok"] = bool(fact_b["normal_residual"] <= CERT_TOL and image_is_v2
                        and fact_b["max_distance_to_normal"] <= 1e-6)

    # (c): case-4 geodesics are orthogonal to V_4
    case4 = [y for y, c in zip(found, cases) if c == 4]
    dev = [max(abs(metric.ip(y, u4)), abs(metric.ip(y, w4))) for y in case4]
    fact_c = {"n_found": len(case4), "max_ip_with_v4": max(dev, default=0.0)}
    fact_c["ok"] = bool(fact_c["max_ip_with_v4"] <= CERT_TOL)

    # image formulas for sampled case-3 and case-4 vectors
    img_ok = True
    for _ in range(8):
        a = rng.standard_normal(5)
        a[0] = 0.0
        want4 = np.column_stack([[0, 1, -4 * a[2] / (3 * a[1]), 0, 0], e[3], e[4]])
        img_ok &= _same_span(span_basis(adjoint_matrix(alg, a)), want4)
        a[1] = 0.0
        want3 = np.column_stack([[0, 0, 1, a[3] / (4 * a[2]), -2 * a[4] / (4 * a[2])],
                                 [0, 0, 0, 1, a[3] / a[2]]])
        img_ok &= _same_span(span_basis(adjoint_matrix(alg, a)), want3)
    formulas = {"ok": bool(img_ok), "case_counts": {str(k): cases.count(k) for k in range(1, 6)}}

    trace = trace_on_v3(metric)
    trace_ok = abs(trace + 3.0) <= 1e-12

    conclusion = bool(small["ok"] and fact_b["ok"] and fact_c["ok"] and img_ok and trace_ok)
    return NoBasisCertificate(metric, small, fact_b, fact_c, formulas, trace, found, conclusion)


# ---------------------------------------------------------------------------
# standard algebras
# ---------------------------------------------------------------------------

def milnor_algebra(lambdas, name: str | None = None) -> LieAlgebra:
    """``[e_2,e_3] = l1 e_1``, ``[e_3,e_1] = l2 e_2``, ``[e_1,e_2] = l3 e_3``."""
    l1, l2, l3 = (float(x) for x in lambdas)
    return LieAlgebra.from_brackets(3, {(1, 2): {0: l1}, (2, 0): {1: l2}, (0, 1): {2: l3}},
                                    name=name)


def _direct_sum_line(alg: LieAlgebra, name: str) -> LieAlgebra:
    """``alg ⊕ R`` with the new central vector last."""
    n = alg.n
    c = np.zeros((n + 1, n + 1, n + 1))
    c[:n, :n, :n] = alg.c
    return LieAlgebra(c, name=name)


MILNOR_TRIPLES = {
    "milnor_so3": (1.0, 1.0, 1.0),
    "milnor_sl2": (1.0, 1.0, -1.0),
    "milnor_e2": (1.0, 1.0, 0.0),
    "milnor_e11": (1.0, -1.0, 0.0),
    "milnor_heisenberg": (1.0, 0.0, 0.0),
}


def standard_algebras() -> dict[str, LieAlgebra]:
    """Named catalog; every entry is a unimodular Lie algebra."""
    cat: dict[str, LieAlgebra] = {}
    for n in range(1, 6):
        cat[f"abelian_{n}"] = LieAlgebra.abelian(n, name=f"abelian_{n}")
    cat["heisenberg_3"] = LieAlgebra.from_brackets(3, {(0, 1): {2: 1.0}}, name="heisenberg_3")
    cat["heisenberg_5"] = LieAlgebra.from_brackets(
        5, {(0, 1): {4: 1.0}, (2, 3): {4: 1.0}}, name="heisenberg_5")
    cat["filiform_4"] = LieAlgebra.from_brackets(
        4, {(0, 1): {2: 1.0}, (0, 2): {3: 1.0}}, name="filiform_4")
    # free 2-step nilpotent on three generators
    cat["free_nilpotent_6"] = LieAlgebra.from_brackets(
        6, {(0, 1): {3: 1.0}, (0, 2): {4: 1.0}, (1, 2): {5: 1.0}}, name="free_nilpotent_6")
    for name, lam in MILNOR_TRIPLES.items():
        cat[name] = milnor_algebra(lam, name=name)
    cat["r_x_heisenberg"] = _direct_sum_line(cat["heisenberg_3"], "r_x_heisenberg")
    cat["r_x_so3"] = _direct_sum_line(cat["milnor_so3"], "r_x_so3")
    cat["r_x_sl2"] = _direct_sum_line(cat["milnor_sl2"], "r_x_sl2")
    # basis W, X, Y, Z
    cat["heisenberg_derived"] = LieAlgebra.from_brackets(
        4, {(0, 1): {1: 1.0}, (0, 2): {2: -1.0}, (1, 2): {3: 1.0}}, name="heisenberg_derived")
    # basis W, A, B, C with C central
    cat["derived_dim2"] = LieAlgebra.from_brackets(
        4, {(0, 1): {1: 1.0}, (0, 2): {2: -1.0}}, name="derived_dim2")
    # basis W, C, A, B: both W and C act on the abelian ideal Span(A, B), and [W, C] lies in it
    cat["derived_dim2_twisted"] = LieAlgebra.from_brackets(
        4, {(0, 2): {2: 1.0}, (0, 3): {3: -1.0}, (1, 2): {2: 2.0}, (1, 3): {3: -2.0},
            (0, 1): {2: 1.0, 3: 1.0}}, name="derived_dim2_twisted")
    # basis W, A, B, C acting diagonally with weights 1, 1, -2
    cat["r_ltimes_r3"] = LieAlgebra.from_brackets(
        4, {(0, 1): {1: 1.0}, (0, 2): {2: 1.0}, (0, 3): {3: -2.0}}, name="r_ltimes_r3")
    cat["example5"] = example5()
    return cat


DIM4_NAMES = ("abelian_4", "filiform_4", "r_x_heisenberg", "r_x_so3", "r_x_sl2",
              "heisenberg_derived", "derived_dim2", "derived_dim2_twisted", "r_ltimes_r3")
NILPOTENT_NAMES = ("abelian_1", "abelian_2", "abelian_3", "abelian_4", "abelian_5",
                   "heisenberg_3", "heisenberg_5", "filiform_4")


def semidirect_line(action, name: str | None = None) -> LieAlgebra:
    """``R ⋉ R^m`` with ``[e_0, e_j] = sum_i action[i, j] e_i`` on the abelian ideal."""
    action = np.asarray(action, dtype=float)
    m = action.shape[0]
    c = np.zeros((m + 1, m + 1, m + 1))
    c[0, 1:, 1:] = action.T
    return LieAlgebra(c, name=name)
