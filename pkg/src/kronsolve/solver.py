"""Solver core over a fixed field.

Pipeline: random change of variables and lifting point, first fiber from a
univariate slice, then for each level s the fiber is lifted to a curve by
Newton-Hensel iteration, the next equation is intersected with the curve by
resultant projections, and a two-variable shape-lemma step (dynamic
evaluation) recovers the next fiber's parametrization.

Internally everything runs in the transformed coordinates Y = lambda . X.
A level-s fiber fixes Y_1..Y_{n-s} to the lifting-point prefix, has
primitive element Y_{n-s+1} with minimal polynomial m, and parametrizes
Y_{n-s+2}..Y_n.  The level-s curve leaves Y_{n-s} free (the X variable of
the bivariate representation M(X, T)).

Randomized steps draw from the initial-segment sampling set {0..N-1}; when
the base field is too small for the required N, the inner randomized steps
run over an extension field and their outputs are coerced back (failures to
coerce count as unlucky runs).
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass

from . import dyneval, linalg, rings, slp as slp_mod, upoly
from .errors import (
    CoercionFailed,
    DegenerateFiber,
    DegreeCollapse,
    EmptyVariety,
    FieldTooSmall,
    JacobianNonInvertible,
    KronError,
    NotCoprime,
    RetriesExhausted,
    ShapeViolation,
    SingularMatrix,
    UnluckyEvaluationPoint,
    UnluckyRun,
    ZeroConstantTerm,
)
from .upoly import QuotientRing, SeriesRing, poly_from_series


class _DeltaBoundExceeded(KronError):
    def __init__(self, observed):
        super().__init__(f"intermediate degree {observed} exceeds the bound")
        self.observed = observed


class _DegenerateShear(UnluckyRun):
    """Sheared curve polynomial lost its top T-coefficient."""


@dataclass(frozen=True)
class LinearChange:
    lam: tuple  # rows of the change Y = lam . X
    lam_inv: tuple
    sample_size: int


@dataclass(frozen=True)
class LiftingPoint:
    values: tuple  # length n - 1; the level-s prefix is values[: n - s]


@dataclass
class Fiber:
    """Kronecker representation of the level-s lifting fiber.

    m is the minimal polynomial of Y_{n-s+1}; v[i] parametrizes
    Y_{n-s+2+i}; w[i] = m' v[i] mod m.  Level r with s = r is the final
    output (then v has r - 1 entries).
    """

    level: int
    m: list
    v: list
    w: list
    change: LinearChange
    point: LiftingPoint

    @property
    def delta(self) -> int:
        return len(self.m) - 1


@dataclass
class CurveRep:
    """Kronecker representation of the level-s lifting curve: M monic in T
    (T-major list of X-polynomials) and numerators W[i] for Y_{n-s+2+i}.
    `prefix` keeps the fixed coordinates p^{s+1} of the source fiber."""

    level: int
    M: list
    W: list
    base_point: object
    prefix: tuple = ()

    @property
    def delta(self) -> int:
        return len(self.M) - 1


@dataclass
class SolveConfig:
    field: str = "Fp:10007"
    epsilon: float = 0.01
    seed: int = 20070919
    delta_bound: int | None = None
    max_retries: int = 5

    def validate(self, r: int):
        if not 0 < self.epsilon < 1 / (16 * r):
            raise ValueError(
                f"epsilon must lie in (0, 1/{16 * r}) for r={r}, got {self.epsilon}"
            )


# ---------------------------------------------------------------------------
# sampling


def preprocessing_sample_size(spec, epsilon: float, delta: int) -> int:
    n, r, d = spec.n, spec.r, spec.dmax
    return math.ceil((1 / epsilon) * 2 * n * n * r * d * delta**3)


def projection_sample_size(epsilon: float, d: int, delta_s: int) -> int:
    ds = d * delta_s
    return math.ceil((1 / epsilon) * (ds + 1) * (delta_s**2 + ds))


def shape_sample_size(epsilon: float, delta: int) -> int:
    return math.ceil(2 * (1 / epsilon) * delta**4)


def sample_preprocessing(spec, cfg: SolveConfig, ring, rng, delta: int,
                         n_samples: int | None = None):
    """Draw the linear change and lifting point from the initial segment
    {0..N-1}; resamples singular matrices against a bounded budget."""
    n = spec.n
    needed = preprocessing_sample_size(spec, cfg.epsilon, delta)
    if n_samples is None:
        if ring.card is not None and needed > ring.card:
            raise FieldTooSmall(needed, ring.card)
        n_samples = needed
    attempts = 0
    while True:
        lam = [[ring.sample(n_samples, rng) for _ in range(n)] for _ in range(n)]
        try:
            lam_inv = linalg.mat_inv(ring, lam)
            break
        except SingularMatrix:
            attempts += 1
            if attempts > 4 * max(cfg.max_retries, 5):
                raise RetriesExhausted("could not draw an invertible change",
                                       cause=SingularMatrix("singular"))
    point = tuple(ring.sample(n_samples, rng) for _ in range(n - 1))
    change = LinearChange(
        lam=tuple(tuple(row) for row in lam),
        lam_inv=tuple(tuple(row) for row in lam_inv),
        sample_size=n_samples,
    )
    return change, LiftingPoint(values=point)


# ---------------------------------------------------------------------------
# level 1


def initial_fiber(spec, composed, change, point, ring) -> Fiber:
    """First fiber: m_1 = squarefree(F_1^Y(p^1, T) / gcd(F_1^Y, G^Y)(p^1, T))."""
    n, r, d = spec.n, spec.r, spec.dmax
    sring = SeriesRing(ring, d + 1)
    values = [sring.coerce(c) for c in point.values[: n - 1]]
    values.append(sring.truncate((ring.zero, ring.one)))  # the free variable as Z
    outs = slp_mod.evaluate(composed, values, sring)
    f1 = upoly.trim(ring, list(outs[0]))
    g = upoly.trim(ring, list(outs[r]))
    if not f1:
        raise DegenerateFiber("F_1 vanishes identically on the slice")
    common = upoly.poly_gcd(ring, f1, g)
    m1 = upoly.exact_div(ring, upoly.make_monic(ring, f1), common)
    if upoly.deg(m1) < 1:
        raise DegenerateFiber("m_1 has degree zero", degree_zero=True)
    m1 = upoly.squarefree_part(ring, upoly.make_monic(ring, m1))
    if upoly.deg(m1) < 1:
        raise DegenerateFiber("m_1 collapsed to a constant", degree_zero=True)
    return Fiber(level=1, m=m1, v=[], w=[], change=change, point=point)


# ---------------------------------------------------------------------------
# Newton-Hensel lifting of a fiber to a curve


def _series_quotient(ring, prec, base_point, m_coeffs):
    sring = SeriesRing(ring, prec, base_point)
    mod = [sring.coerce(c) for c in m_coeffs]
    return sring, QuotientRing(sring, mod)


def _retruncate(sring, coeffs):
    return [sring.truncate(c) for c in coeffs]


def _poly_deriv_t(q, elem):
    """d/dT of a quotient element, as a quotient element (degree drops)."""
    coeffs = list(elem)
    out = []
    for i in range(1, len(coeffs)):
        out.append(q.base.mul(q.base.from_int(i), coeffs[i]))
    return q.from_poly(out)


def _invert_mod_series(ring, sring, mod_coeffs, u, witness_tag):
    """Inverse of u modulo the monic T-polynomial with series coefficients,
    by lifting the residue-field inverse Z-adically (Newton doubling)."""
    m0 = upoly.trim(ring, [c[0] if c else ring.zero for c in mod_coeffs])
    u0 = upoly.trim(ring, [c[0] if c else ring.zero for c in u])
    try:
        inv0 = upoly.modinv(ring, u0, m0)
    except NotCoprime as exc:
        raise JacobianNonInvertible(
            f"{witness_tag} not invertible modulo the fiber", witness=exc.witness
        ) from exc
    t = 1
    b = tuple((c,) for c in inv0)
    while t < sring.prec:
        t = min(2 * t, sring.prec)
        st = sring.with_prec(t)
        qt = QuotientRing(st, _retruncate(st, mod_coeffs))
        ut = qt.from_poly([st.truncate(c) for c in u])
        bt = qt.from_poly([st.truncate(c) for c in b])
        two = qt.from_int(2)
        b = qt.mul(bt, qt.sub(two, qt.mul(ut, bt)))
    return b


def newton_lift(fiber: Fiber, spec, composed, ring) -> CurveRep:
    """Lift the level-s fiber to the Kronecker representation of the
    lifting curve, doubling the series precision each round."""
    n, s = spec.n, fiber.level
    prefix = list(fiber.point.values[: n - s - 1])
    base_point = fiber.point.values[n - s - 1]
    specd = slp_mod.specialize(composed, prefix, ring)
    grads = [slp_mod.gradient(specd, i) for i in range(s)]
    delta_s = fiber.delta

    m_coeffs = [(c,) if not ring.is_zero(c) else () for c in fiber.m]
    vs = [[(ring.zero,), (ring.one,)]]  # V for Y_{n-s+1} is T
    for vp in fiber.v:
        vs.append([(c,) if not ring.is_zero(c) else () for c in vp])
    vs = [v for v in vs]

    j = 0
    while 2**j < delta_s + 1:
        prec = 2 ** (j + 1)
        sring, q = _series_quotient(ring, prec, base_point, _retruncate(
            SeriesRing(ring, prec, base_point), m_coeffs))
        mod = q.modulus
        x_val = q.from_poly([sring.truncate((base_point, ring.one))])
        assignment = [x_val] + [
            q.from_poly([sring.truncate(c) for c in v]) for v in vs
        ]
        f_vals = slp_mod.evaluate(specd, assignment, q)[:s]
        jac = []
        for i in range(s):
            partials = slp_mod.evaluate(grads[i], assignment, q)
            jac.append(partials[1 : s + 1])
        det, adj = linalg.berkowitz(q, jac)
        det_inv = _invert_mod_series(ring, sring, mod, det, "Jacobian determinant")
        # Newton-Hensel update: v_new = V - det^{-1} Adj(J) F
        v_new = []
        for i in range(s):
            corr = q.zero
            for t in range(s):
                corr = q.add(corr, q.mul(adj[i][t], f_vals[t]))
            v_new.append(q.sub(assignment[i + 1], q.mul(det_inv, corr)))
        # correction transporting the parametrization back to V_1 = T
        t_elem = q.from_poly([sring.zero, sring.one])
        delta_corr = q.sub(v_new[0], t_elem)
        vs_next = []
        for i in range(s):
            di = q.mul(delta_corr, _poly_deriv_t(q, v_new[i]))
            vs_next.append(list(q.sub(v_new[i], di)))
        dm = _poly_deriv_t(q, tuple(mod))
        delta_m = q.mul(delta_corr, dm)
        # M_new = M - delta_m: subtract on the polynomial representatives
        m_next = upoly.poly_sub(q.base, list(mod), list(delta_m))
        m_next = m_next + [sring.zero] * (delta_s + 1 - len(m_next))
        m_coeffs = m_next
        vs = vs_next
        j += 1

    prec = delta_s + 1
    sring, q = _series_quotient(ring, prec, base_point, _retruncate(
        SeriesRing(ring, prec, base_point), m_coeffs))
    mod = q.modulus
    dm = _poly_deriv_t(q, tuple(mod))
    w_list = []
    for i in range(1, s):
        vq = q.from_poly([sring.truncate(c) for c in vs[i]])
        w_list.append(q.mul(dm, vq))
    # re-expand from the local variable Z to X by a Taylor shift
    final_s = SeriesRing(ring, prec, base_point)

    def to_x(series_coeffs):
        out = [poly_from_series(final_s, c) for c in series_coeffs]
        while out and not out[-1]:
            out.pop()
        return out

    m_x = to_x(mod)
    w_x = [to_x(list(w)) for w in w_list]
    return CurveRep(
        level=s, M=m_x, W=w_x, base_point=base_point,
        prefix=tuple(prefix),
    )


def check_curve(curve: CurveRep, spec, composed, fiber: Fiber, ring):
    """Independent re-check of the lifting contract: M(p, T) = m and the
    specialized system vanishes modulo M at precision delta+1."""
    n, s = spec.n, curve.level
    at_p = [upoly.evaluate(ring, c, curve.base_point) for c in curve.M]
    if upoly.trim(ring, at_p) != fiber.m:
        return False
    prec = curve.delta + 1
    sring = SeriesRing(ring, prec, curve.base_point)
    mod = [upoly.series_from_poly(sring, c) for c in curve.M]
    q = QuotientRing(sring, mod)
    dm = _poly_deriv_t(q, tuple(q.modulus))
    dm_inv = _invert_mod_series(ring, sring, q.modulus, dm, "curve denominator")
    x_val = q.from_poly([sring.truncate((curve.base_point, ring.one))])
    t_elem = q.from_poly([sring.zero, sring.one])
    assignment = [x_val, t_elem]
    for w in curve.W:
        wq = q.from_poly([upoly.series_from_poly(sring, c) for c in w])
        assignment.append(q.mul(dm_inv, wq))
    prefix = list(fiber.point.values[: n - s - 1])
    specd = slp_mod.specialize(composed, prefix, ring)
    outs = slp_mod.evaluate(specd, assignment, q)
    return all(q.is_zero(outs[i]) for i in range(s))


# ---------------------------------------------------------------------------
# projections along the curve


def _embed_scalar(field, c):
    if field.contains(c):
        return c
    if hasattr(field, "embed") and field.base.contains(c):
        return field.embed(c)
    return field.coerce(c)


def _coerce_down(K, k, value):
    """Map an element of the working field K back into the base field k."""
    if K is k or K == k:
        return value
    out = value
    while isinstance(out, tuple) and hasattr(K, "to_base"):
        nxt = K.to_base(out)
        if nxt is None:
            raise CoercionFailed("value does not lie in the base field")
        return nxt if K.base == k else _coerce_down(K.base, k, nxt)
    raise CoercionFailed("cannot interpret value in the base field")


def _coerce_poly_down(K, k, f):
    if K is k or K == k:
        return list(f)
    return upoly.trim(k, [_coerce_down(K, k, c) for c in f])


def _embed_poly(K, k, f):
    if K is k or K == k:
        return list(f)
    return [_embed_scalar(K, c) for c in f]


class _CurveView:
    """The curve in possibly sheared coordinates L = X + lam*T, presented
    through the data needed by the projection: the monic bivariate
    M~(L, T) and per-node parametrizations."""

    def __init__(self, curve: CurveRep, lam, K, k, nodes=None):
        self.curve = curve
        self.K = K
        self.k = k
        self.lam = lam
        delta = curve.delta
        self.dM = _deriv_t_biv(k, curve.M)
        if lam is None:
            self.M = [_embed_poly(K, k, c) for c in curve.M]
        else:
            if nodes is None:
                raise ValueError("shear needs evaluation nodes")
            self.M = _shear_bivariate(K, k, curve.M, lam, delta, nodes)
            lead = self.M[delta] if len(self.M) > delta else []
            if upoly.deg(lead) != 0 or not K.is_unit(lead[0]):
                raise _DegenerateShear("sheared curve polynomial is not monic in T")
            c = K.inv(lead[0])
            self.M = [upoly.poly_scale(K, c, xc) for xc in self.M]

    def m_at(self, alpha):
        K = self.K
        m = [upoly.evaluate(K, c, alpha) for c in self.M]
        return upoly.trim(K, m)

    def context_at(self, alpha):
        """Quotient ring mod M~(alpha, T) plus the slp assignment values
        [Y_{n-s}, Y_{n-s+1}, Y_{n-s+2..n}] expressed in it.

        Raises NotCoprime on unlucky nodes (the parametrization denominator
        is not invertible there)."""
        K, k = self.K, self.k
        m_alpha = self.m_at(alpha)
        if upoly.deg(m_alpha) != self.curve.delta:
            raise NotCoprime("curve polynomial degenerates at the node", witness=m_alpha)
        q = QuotientRing(K, m_alpha)
        if self.lam is None:
            x_elem = q.from_poly([alpha])
        else:
            # X = L - lam * T at L = alpha
            x_elem = q.from_poly([alpha, K.neg(self.lam)])
        h = _biv_eval_mixed(q, self.dM, x_elem, K, k)
        h_inv = q.inv(h)  # NotCoprime -> unlucky node
        t_elem = q.from_poly([K.zero, K.one])
        assignment = [x_elem, t_elem]
        for w in self.curve.W:
            wv = _biv_eval_mixed(q, w, x_elem, K, k)
            assignment.append(q.mul(h_inv, wv))
        return q, assignment


def _deriv_t_biv(ring, biv):
    out = []
    for b in range(1, len(biv)):
        out.append(upoly.poly_scale(ring, ring.from_int(b), biv[b]))
    while out and not out[-1]:
        out.pop()
    return out


def _biv_eval_mixed(q, biv, x_elem, K, k):
    """Horner in T of a bivariate with k-coefficients, X substituted by a
    quotient element over K."""
    t_elem = q.from_poly([K.zero, K.one])
    acc = q.zero
    for c in reversed(biv):
        cx = _eval_xpoly_mixed(q, c, x_elem, K, k)
        acc = q.add(q.mul(acc, t_elem), cx)
    return acc


def _eval_xpoly_mixed(q, xpoly, x_elem, K, k):
    acc = q.zero
    for c in reversed(xpoly):
        acc = q.add(q.mul(acc, x_elem), q.from_poly([_embed_scalar(K, c)]))
    return acc


def _shear_bivariate(K, k, biv, lam, delta, nodes):
    """Dense representation of M(L - lam*T, T) via the Kronecker
    substitution T -> x^(delta+1), evaluated at delta*(delta+1)+1 nodes and
    interpolated, then unpacked by digit positions."""
    count = delta * (delta + 1) + 1
    pairs = []
    for x in nodes[:count]:
        y = K.pow_(x, delta + 1)
        xval = K.sub(x, K.mul(lam, y))
        acc = K.zero
        for c in reversed(biv):
            cx = _eval_scalar_xpoly(K, k, c, xval)
            acc = K.add(K.mul(acc, y), cx)
        pairs.append((x, acc))
    u = upoly.interpolate(K, pairs)
    out = []
    for b in range(delta + 1):
        row = []
        for a in range(delta + 1):
            idx = a + b * (delta + 1)
            row.append(u[idx] if idx < len(u) else K.zero)
        out.append(upoly.trim(K, row))
    while out and not out[-1]:
        out.pop()
    return out


def _eval_scalar_xpoly(K, k, xpoly, xval):
    acc = K.zero
    for c in reversed(xpoly):
        acc = K.add(K.mul(acc, xval), _embed_scalar(K, c))
    return acc


def _draw_distinct(K, size, rng, used):
    attempts = 0
    while True:
        x = K.sample(size, rng)
        if x not in used:
            used.add(x)
            return x
        attempts += 1
        if attempts > 64 + 4 * size:
            raise UnluckyEvaluationPoint("cannot draw fresh evaluation nodes")


def project_through(view: _CurveView, specd, out_index, d_s, sample_size, rng):
    """Interpolated projection of one output polynomial along the curve
    view: the square-free part of the constant term of the homothety's
    characteristic polynomial.

    Draws d_s + 1 distinct nodes (resampling unlucky ones against a bounded
    budget) and returns a monic square-free polynomial over the view's
    working field."""
    K = view.K
    used: set = set()
    pairs = []
    failures = 0
    budget = 8 + 4 * (d_s + 1)
    while len(pairs) < d_s + 1:
        alpha = _draw_distinct(K, sample_size, rng, used)
        try:
            q, assignment = view.context_at(alpha)
        except NotCoprime:
            failures += 1
            if failures > budget:
                raise UnluckyEvaluationPoint(
                    "node resampling budget exhausted (discriminant locus)"
                )
            continue
        f_star = slp_mod.evaluate(specd, assignment, q)[out_index]
        value = upoly.resultant(K, view.m_at(alpha), list(f_star))
        pairs.append((alpha, value))
    a_tilde = upoly.interpolate(K, pairs)
    if not a_tilde:
        raise ZeroConstantTerm("projected polynomial vanishes on the curve")
    if upoly.deg(a_tilde) == 0:
        return [K.one]
    return upoly.squarefree_part(K, upoly.make_monic(K, a_tilde))


def project_aF(curve: CurveRep, spec, composed, out_index, cfg, ring, K, rng):
    """Projection of one output polynomial along the level-s curve: the
    square-free part of the constant term of the homothety's characteristic
    polynomial, interpolated from resultants at random nodes."""
    specd = slp_mod.specialize(composed, list(curve.prefix), ring)
    d_s = spec.dmax * curve.delta
    size = projection_sample_size(cfg.epsilon, spec.dmax, curve.delta)
    if K.card is not None:
        size = min(size, K.card)
    view = _CurveView(curve, None, K, ring)
    return project_through(view, specd, out_index, d_s, size, rng)


# ---------------------------------------------------------------------------
# next minimal polynomial and the primitive-element parametrization


def _strip_excluded(ring, a_f, a_g, m_biv, dm_biv):
    """m_next = a_F / gcd(a_F, a_G * (disc_T M mod a_F))."""
    rho = dyneval.resultant_mod(ring, m_biv, dm_biv, a_f)
    ag_mod = upoly.divrem_monic(ring, list(a_g), a_f)[1]
    prod = upoly.divrem_monic(ring, upoly.poly_mul(ring, ag_mod, rho), a_f)[1]
    g = upoly.poly_gcd(ring, a_f, prod)
    return upoly.exact_div(ring, a_f, g)


def _dense_linear_substitution(K, m_poly, lam, nodes):
    """m(X + lam*Y) densely, via the Kronecker substitution Y -> x^(d+1)."""
    d = upoly.deg(m_poly)
    count = d * (d + 1) + 1
    pairs = []
    for x in nodes[:count]:
        y = K.pow_(x, d + 1)
        val = K.add(x, K.mul(lam, y))
        pairs.append((x, upoly.evaluate(K, m_poly, val)))
    u = upoly.interpolate(K, pairs)
    out = []
    for b in range(d + 1):
        row = []
        for a in range(d + 1):
            idx = a + b * (d + 1)
            row.append(u[idx] if idx < len(u) else K.zero)
        out.append(upoly.trim(K, row))
    while out and not out[-1]:
        out.pop()
    return out


def next_minpoly(curve: CurveRep, spec, composed, cfg, ring, K, rng,
                 delta_bound, stats=None):
    """Compute (m_{s+1}, v_primitive) from the level-s curve.

    Projects F_{s+1} and G, strips the discriminant locus and the excluded
    hypersurface, then recovers the parametrization of Y_{n-s+1} by two
    sheared minimal polynomials and the bidimensional shape lemma over the
    working field K."""
    n, r, s = spec.n, spec.r, curve.level
    prefix = list(curve.prefix)
    specd = slp_mod.specialize(composed, prefix, ring)
    d_s = spec.dmax * curve.delta
    proj_size = projection_sample_size(cfg.epsilon, spec.dmax, curve.delta)
    shear_size = shape_sample_size(cfg.epsilon, delta_bound)
    if K.card is not None:
        proj_size = min(proj_size, K.card)
        shear_size = min(shear_size, K.card)
    g_is_unit = spec.degrees[r] == 0

    t0 = time.perf_counter()
    view0 = _CurveView(curve, None, K, ring)
    a_f_K = project_through(view0, specd, s, d_s, proj_size, rng)
    a_f = _coerce_poly_down(K, ring, a_f_K)
    if g_is_unit:
        a_g = [ring.one]
    else:
        a_g = _coerce_poly_down(
            K, ring, project_through(view0, specd, r, d_s, proj_size, rng)
        )
    if stats is not None:
        stats["project"] = stats.get("project", 0.0) + time.perf_counter() - t0
    if upoly.deg(a_f) < 1:
        raise DegreeCollapse("no intersection points on this slice")
    dm_biv = _deriv_t_biv(ring, curve.M)
    m_next = _strip_excluded(ring, a_f, a_g, curve.M, dm_biv)
    if upoly.deg(m_next) < 1:
        raise DegreeCollapse("next minimal polynomial is constant")
    if upoly.deg(m_next) > delta_bound:
        raise _DeltaBoundExceeded(upoly.deg(m_next))

    t0 = time.perf_counter()
    delta_next = upoly.deg(m_next)
    lams = []
    m_shears = []
    shear_attempts = 0
    used_lams: set = set()
    while len(lams) < 2:
        lam = _draw_distinct(K, shear_size, rng, used_lams)
        if K.is_zero(lam):
            continue
        shear_used: set = set()
        count = curve.delta * (curve.delta + 1) + 1
        nodes = [_draw_distinct(K, shear_size, rng, shear_used) for _ in range(count)]
        try:
            view = _CurveView(curve, lam, K, ring, nodes=nodes)
            a_f_l = project_through(view, specd, s, d_s, proj_size, rng)
            if g_is_unit:
                a_g_l = [K.one]
            else:
                a_g_l = project_through(view, specd, r, d_s, proj_size, rng)
            if upoly.deg(a_f_l) < 1:
                raise _DegenerateShear("sheared projection collapsed")
            dm_l = _deriv_t_biv(K, view.M)
            m_l = _strip_excluded(K, a_f_l, a_g_l, view.M, dm_l)
        except (_DegenerateShear, NotCoprime, UnluckyEvaluationPoint):
            shear_attempts += 1
            if shear_attempts > 6:
                raise UnluckyEvaluationPoint("shear resampling budget exhausted")
            continue
        if upoly.deg(m_l) != delta_next:
            shear_attempts += 1
            if shear_attempts > 6:
                raise ShapeViolation("sheared minimal polynomial degree mismatch")
            continue
        lams.append(lam)
        m_shears.append(m_l)

    # bidimensional shape lemma over K via dynamic evaluation
    m_K = upoly.trim(K, _embed_poly(K, ring, m_next))
    shape_attempts = 0
    while True:
        nodes_needed = delta_next * (delta_next + 1) + 1
        sub_used: set = set()
        sub_nodes = [
            _draw_distinct(K, shear_size, rng, sub_used) for _ in range(nodes_needed)
        ]
        f1 = _dense_linear_substitution(K, m_shears[0], lams[0], sub_nodes)
        f2 = _dense_linear_substitution(K, m_shears[1], lams[1], sub_nodes)
        try:
            ctx = dyneval.biv_gcd(K, f1, f2, m_K)
            v_K = dyneval.crt_combine(K, ctx)
            break
        except ShapeViolation:
            shape_attempts += 1
            if shape_attempts > 6:
                raise
            # resample the second separating form and its minimal polynomial
            lam2 = _draw_distinct(K, shear_size, rng, used_lams)
            if K.is_zero(lam2):
                continue
            shear_used = set()
            count = curve.delta * (curve.delta + 1) + 1
            nodes = [_draw_distinct(K, shear_size, rng, shear_used) for _ in range(count)]
            try:
                view = _CurveView(curve, lam2, K, ring, nodes=nodes)
                a_f_l = project_through(view, specd, s, d_s, proj_size, rng)
                a_g_l = [K.one] if g_is_unit else project_through(
                    view, specd, r, d_s, proj_size, rng)
                dm_l = _deriv_t_biv(K, view.M)
                m_l = _strip_excluded(K, a_f_l, a_g_l, view.M, dm_l)
            except (_DegenerateShear, NotCoprime, UnluckyEvaluationPoint):
                continue
            if upoly.deg(m_l) != delta_next:
                continue
            lams[1] = lam2
            m_shears[1] = m_l
    v_prim = _coerce_poly_down(K, ring, v_K)
    if stats is not None:
        stats["shape"] = stats.get("shape", 0.0) + time.perf_counter() - t0
    return m_next, v_prim


# ---------------------------------------------------------------------------
# conclusion of the recursive step


def conclude_fiber(curve: CurveRep, m_next, v_prim, ring, change, point) -> Fiber:
    """Push the curve numerators through the new parametrization:
    h = dM/dT(X, v(X)), g = h^{-1} mod m_{s+1}, v_i = g * W_i(X, v(X))."""
    q = QuotientRing(ring, m_next)
    v_elem = q.from_poly(list(v_prim))
    dm_biv = _deriv_t_biv(ring, curve.M)
    h = _horner_poly_arg(q, dm_biv, v_elem)
    g = q.inv(h)  # NotCoprime here signals an unlucky run
    v_list = [list(v_prim)]
    for w in curve.W:
        w_v = _horner_poly_arg(q, w, v_elem)
        v_list.append(list(q.mul(g, w_v)))
    m_prime = upoly.derivative(ring, m_next)
    w_list = [
        upoly.divrem_monic(ring, upoly.poly_mul(ring, m_prime, v), m_next)[1]
        for v in v_list
    ]
    return Fiber(
        level=curve.level + 1,
        m=list(m_next),
        v=v_list,
        w=w_list,
        change=change,
        point=point,
    )


def _horner_poly_arg(q, biv, v_elem):
    """Evaluate a T-major bivariate at T = v(X) inside k[X]/(m)."""
    acc = q.zero
    for c in reversed(biv):
        acc = q.add(q.mul(acc, v_elem), q.from_poly(list(c)))
    return acc


# ---------------------------------------------------------------------------
# verification


def fiber_residues(fiber: Fiber, spec, composed, ring):
    """Evaluate all outputs through the fiber's parametrization modulo m."""
    n, s = spec.n, fiber.level
    q = QuotientRing(ring, fiber.m)
    assignment = [q.from_poly([c]) for c in fiber.point.values[: n - s]]
    assignment.append(q.from_poly([ring.zero, ring.one]))
    for v in fiber.v:
        assignment.append(q.from_poly(list(v)))
    outs = slp_mod.evaluate(composed, assignment, q)
    return q, outs


def verify(fiber: Fiber, spec, ring, composed=None):
    """Check the Kronecker-representation contract; returns (passed, report).

    (a) m square-free; (b) the first `level` equations vanish through the
    parametrization; (c) G stays invertible on the fiber; (d) w = m' v.
    """
    if composed is None:
        composed = slp_mod.compose_linear(spec.slp, [list(r) for r in fiber.change.lam], ring)
    report = []
    m = fiber.m
    disc = upoly.discriminant(ring, m) if upoly.deg(m) >= 1 else ring.zero
    ok_a = upoly.deg(m) >= 1 and not ring.is_zero(disc)
    report.append({"check": "squarefree", "pass": ok_a,
                   "detail": "disc(m) != 0" if ok_a else "m has a repeated root"})
    q, outs = fiber_residues(fiber, spec, composed, ring)
    bad = [j + 1 for j in range(fiber.level) if not q.is_zero(outs[j])]
    report.append({
        "check": "system-vanishes",
        "pass": not bad,
        "detail": "all equations vanish mod m" if not bad
        else f"equations {bad} do not vanish modulo m",
    })
    g_star = list(outs[spec.r])
    res_g = upoly.resultant(ring, m, upoly.trim(ring, g_star)) if g_star else ring.zero
    ok_c = not ring.is_zero(res_g)
    report.append({"check": "inequality", "pass": ok_c,
                   "detail": "res(m, G*) != 0" if ok_c else "G vanishes on the fiber"})
    m_prime = upoly.derivative(ring, m)
    ok_d = True
    for v, w in zip(fiber.v, fiber.w):
        expect = upoly.divrem_monic(ring, upoly.poly_mul(ring, m_prime, v), m)[1]
        if upoly.trim(ring, list(w)) != expect:
            ok_d = False
    report.append({"check": "numerators", "pass": ok_d,
                   "detail": "w = m' v mod m" if ok_d else "w inconsistent with v"})
    return all(item["pass"] for item in report), report


# ---------------------------------------------------------------------------
# the solve loop


def make_working_field(ring, e: int, rng):
    """An extension of the base field of degree e (1 returns the field)."""
    if e <= 1:
        return ring
    modulus = rings.random_irreducible(ring, e, rng)
    return rings.ExtensionField(ring, modulus, check_irreducible=False)


def required_inner_degree(spec, cfg, ring, delta: int) -> int:
    """Extension degree for the randomized inner steps over a small field."""
    q = ring.card
    target = 12 * spec.r * (1 / cfg.epsilon) * delta**4
    e = max(1, math.ceil(math.log(target, q)))
    needed = max(
        projection_sample_size(cfg.epsilon, spec.dmax, delta),
        shape_sample_size(cfg.epsilon, delta),
    )
    while q**e < needed:
        e += 1
    return e


def solve(spec, cfg: SolveConfig, rng=None, stats=None, force=None) -> Fiber:
    """Run the full pipeline; returns a verified level-r fiber.

    `force` optionally injects (lam, point) for reproducibility across
    sessions (used by the rational pipeline and the tests); entries must be
    base-ring elements.
    """
    cfg.validate(spec.r)
    ring = rings.from_descriptor(cfg.field)
    if rng is None:
        rng = random.Random(cfg.seed)
    delta_bound = cfg.delta_bound or spec.bezout
    last_cause = None
    collapse_seen = False
    doublings = 0
    attempts = 0
    while attempts <= cfg.max_retries:
        try:
            fiber = _attempt(spec, cfg, ring, rng, delta_bound, stats, force)
            if stats is not None:
                stats["retries"] = attempts
                stats["delta_bound"] = delta_bound
            return fiber
        except _DeltaBoundExceeded as exc:
            doublings += 1
            if doublings > 16:
                raise RetriesExhausted("degree bound kept growing", cause=exc)
            delta_bound = max(2 * delta_bound, exc.observed)
            continue
        except (DegreeCollapse, DegenerateFiber) as exc:
            empties = isinstance(exc, DegreeCollapse) or getattr(exc, "degree_zero", False)
            if empties and collapse_seen:
                raise EmptyVariety("empty slice confirmed by a fresh randomization")
            if empties:
                collapse_seen = True
            last_cause = exc
            attempts += 1
            continue
        except UnluckyRun as exc:
            last_cause = exc
            attempts += 1
            continue
    raise RetriesExhausted("retry budget exhausted", cause=last_cause)


def small_field_threshold(spec, cfg, delta: int) -> int:
    """Base-field cardinality below which the randomized inner steps move to
    an extension: q must exceed 4 eps^-1 n^2 r d delta^3."""
    n, r, d = spec.n, spec.r, spec.dmax
    return math.ceil(4 * (1 / cfg.epsilon) * n * n * r * d * delta**3)


def _attempt(spec, cfg, ring, rng, delta_bound, stats, force):
    n, r = spec.n, spec.r
    timer = time.perf_counter
    finite = ring.card is not None
    needed = preprocessing_sample_size(spec, cfg.epsilon, delta_bound)
    if finite and ring.card <= small_field_threshold(spec, cfg, delta_bound):
        e = required_inner_degree(spec, cfg, ring, delta_bound)
        K = make_working_field(ring, e, rng)
        n_samples = min(needed, ring.card)
    else:
        K = ring
        n_samples = needed

    if force is not None:
        lam, point_values = force
        lam = [[ring.coerce(c) for c in row] for row in lam]
        change = LinearChange(
            lam=tuple(tuple(row) for row in lam),
            lam_inv=tuple(tuple(row) for row in linalg.mat_inv(ring, lam)),
            sample_size=0,
        )
        point = LiftingPoint(values=tuple(ring.coerce(c) for c in point_values))
    else:
        change, point = sample_preprocessing(
            spec, cfg, ring, rng, delta_bound, n_samples=n_samples
        )
    composed = slp_mod.compose_linear(
        spec.slp, [list(row) for row in change.lam], ring
    )
    t0 = timer()
    fiber = initial_fiber(spec, composed, change, point, ring)
    if stats is not None:
        stats["initial"] = stats.get("initial", 0.0) + timer() - t0
    if fiber.delta > delta_bound:
        raise _DeltaBoundExceeded(fiber.delta)
    for s in range(1, r):
        t0 = timer()
        curve = newton_lift(fiber, spec, composed, ring)
        if stats is not None:
            stats["lift"] = stats.get("lift", 0.0) + timer() - t0
        m_next, v_prim = next_minpoly(
            curve, spec, composed, cfg, ring, K, rng, delta_bound, stats=stats
        )
        t0 = timer()
        fiber = conclude_fiber(curve, m_next, v_prim, ring, change, point)
        if stats is not None:
            stats["conclude"] = stats.get("conclude", 0.0) + timer() - t0
        if fiber.delta > delta_bound:
            raise _DeltaBoundExceeded(fiber.delta)
        ok, _report = verify(fiber, spec, ring, composed=composed)
        if not ok:
            raise UnluckyRun(f"level-{s + 1} fiber failed verification")
    ok, report = verify(fiber, spec, ring, composed=composed)
    if not ok:
        raise UnluckyRun(f"final fiber failed verification: {report}")
    return fiber
