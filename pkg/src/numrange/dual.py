"""Dual hypersurfaces: exact quadric duality and numerical dual fitting.

A hyperplane tangent to the zero set of f at a regular point x is the
functional grad f(x) up to scale.  Sampling many such functionals and
solving for a homogeneous form vanishing on all of them recovers the
dual hypersurface by interpolation; no elimination theory is involved.
The centrality probe classifies singular dual points by proximity to a
traced boundary cloud.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from numrange.linalg import EXACT, FLOAT, MatrixPencil, as_rng
from numrange.poly import (
    MultiPoly,
    _homogeneous_exponents,
    evaluate,
    gradient,
    restrict_to_line,
    roots_univariate,
)
from numrange.ranges import BoundaryCloud

SYMMETRY_TOL = 1e-12
DET_FLOOR = 1e-10
SAMPLE_RESIDUAL_TOL = 1e-10
# Newton polishing stalls at ~sqrt(machine eps) distance on a multiple
# root, leaving gradients of ~1e-8 * scale there; the floor must sit
# clearly above that stall level or non-reduced inputs leak through.
GRADIENT_FLOOR = 1e-6
NULLSPACE_RATIO = 1e-8
FIT_RESIDUAL_TOL = 1e-6
TRIAL_FACTOR = 100


class DualError(Exception):
    pass


class SingularForm(DualError):
    """Quadric duality asked of a non-invertible form."""


class InsufficientSamples(DualError):
    """Line sampling failed to find enough regular variety points."""


class NoFormFound(DualError):
    """No degree up to the cap produced an acceptable dual form."""


@dataclass(frozen=True)
class SymmetricForm:
    """Real symmetric matrix viewed as a quadratic form."""

    dim: int
    entries: tuple
    domain: str = FLOAT

    @staticmethod
    def from_rows(rows, domain: str = FLOAT) -> "SymmetricForm":
        if domain == EXACT:
            m = tuple(tuple(Fraction(v) for v in row) for row in rows)
            dim = len(m)
            for row in m:
                if len(row) != dim:
                    raise DualError("form matrix must be square")
            for i in range(dim):
                for j in range(i):
                    if m[i][j] != m[j][i]:
                        raise DualError(f"entries ({i},{j}) and ({j},{i}) differ")
            return SymmetricForm(dim, m, EXACT)
        arr = np.asarray(rows, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DualError("form matrix must be square")
        scale = max(float(np.max(np.abs(arr))), 1.0)
        if float(np.max(np.abs(arr - arr.T))) > SYMMETRY_TOL * scale:
            raise DualError("form matrix is not symmetric")
        sym = 0.5 * (arr + arr.T)
        return SymmetricForm(arr.shape[0], tuple(tuple(float(v) for v in row) for row in sym), FLOAT)

    def as_array(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.entries])


def _fraction_inverse(m: tuple, dim: int) -> list:
    # Gauss-Jordan over the rationals; raises on exact singularity
    a = [[Fraction(m[i][j]) for j in range(dim)] + [Fraction(int(i == j)) for j in range(dim)] for i in range(dim)]
    for col in range(dim):
        pivot = next((r for r in range(col, dim) if a[r][col] != 0), None)
        if pivot is None:
            raise SingularForm("exact form is singular")
        a[col], a[pivot] = a[pivot], a[col]
        pv = a[col][col]
        a[col] = [v / pv for v in a[col]]
        for r in range(dim):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [v - f * w for v, w in zip(a[r], a[col])]
    return [row[dim:] for row in a]


def _integerize(rows: list) -> list:
    denom = 1
    for row in rows:
        for v in row:
            denom = denom * v.denominator // math.gcd(denom, v.denominator)
    scaled = [[v * denom for v in row] for row in rows]
    g = 0
    for row in scaled:
        for v in row:
            g = math.gcd(g, abs(v.numerator))
    if g > 1:
        scaled = [[v / g for v in row] for row in scaled]
    return scaled


def quadric_dual(form: SymmetricForm, integerize: bool = True) -> SymmetricForm:
    """Dual of the quadric {x : x M x = 0}: the form of M^-1.

    Exact forms are inverted over the rationals (rescaled to coprime
    integers when integerize is set, since the dual is projective).
    Float forms are inverted only while |det M| stays above 1e-10 at the
    entry scale; beyond that the quadric counts as singular and has no
    quadric dual.
    """
    if form.domain == EXACT:
        inv = _fraction_inverse(form.entries, form.dim)
        if integerize:
            inv = _integerize(inv)
        return SymmetricForm(form.dim, tuple(tuple(v for v in row) for row in inv), EXACT)
    arr = form.as_array()
    scale = max(float(np.max(np.abs(arr))), 1e-300)
    det = float(np.linalg.det(arr))
    if abs(det) <= DET_FLOOR * scale**form.dim:
        raise SingularForm(f"|det| = {abs(det):.3e} at entry scale {scale:.3e}")
    inv = np.linalg.inv(arr)
    inv = 0.5 * (inv + inv.T)
    return SymmetricForm.from_rows(inv, FLOAT)


def form_to_poly(form: SymmetricForm) -> MultiPoly:
    """The quadratic form as a homogeneous degree-2 polynomial."""
    terms = {}
    m = form.entries
    exact = form.domain == EXACT
    for i in range(form.dim):
        for j in range(i, form.dim):
            c = m[i][j] if i == j else (m[i][j] + m[j][i])
            if not exact:
                c = float(c)
            if c == 0:
                continue
            exp = [0] * form.dim
            exp[i] += 1
            exp[j] += 1
            terms[tuple(exp)] = c
    return MultiPoly(form.dim, 2, terms, EXACT if exact else FLOAT)


def _poly_scales(f: MultiPoly):
    fl = f.to_float()
    return fl, fl.coeff_scale()


def _polish_on_line(coeffs, t, steps: int = 12):
    # damped Newton on the univariate restriction
    deriv = [k * coeffs[k] for k in range(1, len(coeffs))]

    def ev(cs, z):
        acc = 0.0 + 0.0j
        for c in reversed(cs):
            acc = acc * z + c
        return acc

    val = ev(coeffs, t)
    for _ in range(steps):
        dv = ev(deriv, t)
        if abs(dv) == 0.0:
            break
        step = val / dv
        for _ in range(20):
            cand = t - step
            cval = ev(coeffs, cand)
            if abs(cval) <= abs(val):
                t, val = cand, cval
                break
            step *= 0.5
        else:
            break
    return t


def sample_variety_points(f: MultiPoly, count: int, rng=None, force_complex: bool = False) -> list:
    """Regular points of the zero set of f, found by random line cuts.

    Each trial intersects the variety with a random line (real lines
    first, complex lines once the real budget is half spent), polishes
    the roots by damped Newton along the line, and keeps points where
    |f| <= 1e-10 and the gradient is bounded away from zero at the
    local coefficient scale.  Points are returned unit-normalized;
    raises InsufficientSamples after 100*count fruitless lines.
    """
    if not f.terms or f.degree < 1:
        raise DualError("cannot sample a constant polynomial")
    fl, cscale = _poly_scales(f)
    nv = fl.nvars
    gen = as_rng(rng)
    out = []
    budget = TRIAL_FACTOR * count
    for trial in range(budget):
        use_complex = force_complex or trial >= budget // 2
        if use_complex:
            base = gen.standard_normal(nv) + 1j * gen.standard_normal(nv)
            direc = gen.standard_normal(nv) + 1j * gen.standard_normal(nv)
        else:
            base = gen.standard_normal(nv)
            direc = gen.standard_normal(nv)
        coeffs = restrict_to_line(fl, base, direc)
        cs = [complex(c) for c in coeffs]
        top = max(abs(c) for c in cs)
        if top == 0.0:
            continue
        dcs = [k * cs[k] for k in range(1, len(cs))]
        for t in roots_univariate(cs):
            t = _polish_on_line(cs, complex(t))
            # multiple root on the line: the restriction's derivative
            # vanishes too, and the point cannot be certified regular
            dv = sum(c * t**k for k, c in enumerate(dcs))
            if abs(dv) <= 1e-6 * top * (1.0 + abs(t)) ** max(fl.degree - 1, 0):
                continue
            x = base + t * direc
            if not use_complex:
                if abs(t.imag) > 1e-9 * (1.0 + abs(t)):
                    continue
                x = x.real
            nrm = float(np.linalg.norm(x))
            if nrm < 1e-12:
                continue
            x = x / nrm
            local = cscale * (1.0 + float(np.max(np.abs(x)))) ** fl.degree
            if abs(evaluate(fl, list(x))) > SAMPLE_RESIDUAL_TOL * local:
                continue
            g = np.array(gradient(fl, list(x)))
            gscale = cscale * (1.0 + float(np.max(np.abs(x)))) ** max(fl.degree - 1, 0)
            if float(np.linalg.norm(g)) <= GRADIENT_FLOOR * gscale:
                continue
            out.append(x)
            if len(out) >= count:
                return out
    raise InsufficientSamples(
        f"found {len(out)} of {count} regular points in {budget} line trials"
    )


def tangent_functionals(f: MultiPoly, points) -> list:
    """Unit-normalized gradients of f at the given variety points."""
    fl = f.to_float()
    out = []
    for x in points:
        g = np.array(gradient(fl, list(x)))
        nrm = float(np.linalg.norm(g))
        if nrm < 1e-300:
            continue
        out.append(g / nrm)
    return out


@dataclass(frozen=True)
class DualFitResult:
    degree: int
    form: MultiPoly
    residual_rms: float
    singular_gap: float
    samples_used: int
    search_trace: tuple = ()

    def to_json_dict(self) -> dict:
        terms = []
        for exp in sorted(self.form.terms, reverse=True):
            terms.append({"exp": list(exp), "coeff": float(self.form.terms[exp])})
        return {
            "degree": self.degree,
            "terms": terms,
            "residual_rms": self.residual_rms,
            "singular_gap": self.singular_gap,
            "samples_used": self.samples_used,
            "normalization": "coefficient vector has unit 2-norm; largest entry positive",
        }


def _monomial_rows(functionals, exponents) -> np.ndarray:
    rows = []
    for ell in functionals:
        vals = []
        for exp in exponents:
            v = 1.0 + 0.0j
            for base, e in zip(ell, exp):
                if e:
                    v *= complex(base) ** e
            vals.append(v)
        vals = np.array(vals)
        if np.max(np.abs(vals.imag)) > 1e-14:
            rows.append(vals.real)
            rows.append(vals.imag)
        else:
            rows.append(vals.real)
    return np.array(rows)


def dual_fit(f: MultiPoly, max_degree: int, rng=None, samples: int | None = None) -> DualFitResult:
    """Recover the dual hypersurface's defining form by interpolation.

    Tangent functionals are collected at sampled regular points, and for
    each degree from 1 up the nullspace of the monomial-evaluation
    matrix is examined.  The first degree whose smallest singular value
    drops below 1e-8 of the largest, and whose form also vanishes on a
    held-out batch of functionals to RMS 1e-6, wins.  Ascending order
    protects against picking up a multiple of the true form at a higher
    degree.
    """
    if max_degree < 1:
        raise DualError("max_degree must be at least 1")
    gen = as_rng(rng)
    nv = f.nvars
    largest = len(list(_homogeneous_exponents(nv, max_degree)))
    if samples is None:
        samples = max(3 * largest, 120)
    pts = sample_variety_points(f, samples, gen)
    pts += sample_variety_points(f, max(samples // 3, 20), gen, force_complex=True)
    held = sample_variety_points(f, max(samples // 3, 30), gen)
    train = tangent_functionals(f, pts)
    test = tangent_functionals(f, held)
    trace = []
    for degree in range(1, max_degree + 1):
        exponents = list(_homogeneous_exponents(nv, degree))
        A = _monomial_rows(train, exponents)
        if A.shape[0] < len(exponents):
            trace.append((degree, math.inf, math.inf))
            continue
        _, svals, Vt = np.linalg.svd(A, full_matrices=False)
        gap = float(svals[-1] / svals[0]) if svals[0] > 0 else 0.0
        coeffs = Vt[-1]
        k = int(np.argmax(np.abs(coeffs)))
        if coeffs[k] < 0:
            coeffs = -coeffs
        form = MultiPoly(nv, degree, dict(zip(exponents, map(float, coeffs))), FLOAT)
        resid = [abs(evaluate(form, list(ell))) for ell in test]
        rms = math.sqrt(sum(r * r for r in resid) / len(resid)) if resid else math.inf
        trace.append((degree, gap, rms))
        if gap < NULLSPACE_RATIO and rms <= FIT_RESIDUAL_TOL:
            return DualFitResult(
                degree=degree,
                form=form,
                residual_rms=rms,
                singular_gap=gap,
                samples_used=len(train),
                search_trace=tuple(trace),
            )
    raise NoFormFound(
        "no degree up to "
        + str(max_degree)
        + " passed; search trace (degree, singular gap, held-out rms): "
        + ", ".join(f"({d}, {g:.2e}, {r:.2e})" for d, g, r in trace)
    )


@dataclass(frozen=True)
class DualFormReport:
    rms: float
    max_abs: float
    samples_used: int


def verify_dual_form(f: MultiPoly, q: MultiPoly, samples: int = 200, rng=None) -> DualFormReport:
    """Residuals of q on fresh tangent functionals of the zero set of f.

    Both q's coefficient vector and each functional are unit-normalized,
    so the numbers are scale-free.
    """
    gen = as_rng(rng)
    pts = sample_variety_points(f, samples, gen)
    funcs = tangent_functionals(f, pts)
    qf = q.to_float()
    nrm = math.sqrt(sum(float(c) * float(c) for c in qf.terms.values()))
    if nrm == 0:
        raise DualError("candidate form is zero")
    qn = qf.scale(1.0 / nrm)
    resid = [abs(evaluate(qn, list(ell))) for ell in funcs]
    rms = math.sqrt(sum(r * r for r in resid) / len(resid))
    return DualFormReport(rms=rms, max_abs=max(resid), samples_used=len(funcs))


@dataclass(frozen=True)
class ProbeResult:
    verdict: str
    distance: float
    radius: float
    nearest: tuple

    def central(self) -> bool:
        return self.verdict == "central"


def _cloud_mesh(points: np.ndarray) -> float:
    # median nearest-neighbour spacing on a thinned subsample
    sub = points[:: max(1, len(points) // 1200)]
    if len(sub) < 2:
        return 1.0
    d2 = np.sum((sub[:, None, :] - sub[None, :, :]) ** 2, axis=2)
    np.fill_diagonal(d2, np.inf)
    return float(np.median(np.sqrt(np.min(d2, axis=1))))


def central_point_probe(
    pencil: MatrixPencil,
    candidate,
    cloud: BoundaryCloud,
    radius: float | None = None,
) -> ProbeResult:
    """Is the candidate approached by the traced regular dual points?

    Verdict is central when some cloud point lies within `radius` of the
    candidate (affine chart coordinates).  The answer is only as good as
    the cloud: near eigenvalue crossings the regular points limiting
    onto a singular dual point are invisible to plain per-branch
    tracing, so augment the cloud with degenerate_patches() before
    probing candidates on a singular locus.
    """
    q = np.asarray(candidate, dtype=float)
    if q.shape != (pencil.n,):
        raise DualError(f"candidate must have {pencil.n} coordinates")
    pts = cloud.points()
    if radius is None:
        radius = 10.0 * _cloud_mesh(pts)
    dists = np.linalg.norm(pts - q, axis=1)
    k = int(np.argmin(dists))
    dist = float(dists[k])
    return ProbeResult(
        verdict="central" if dist <= radius else "not_central",
        distance=dist,
        radius=float(radius),
        nearest=tuple(float(v) for v in pts[k]),
    )


# --- the printed ellipse of the 3x3 example's singular slice ---------------

def _ellipse_data():
    from numrange.examples import (
        CN_ELLIPSE_CONST,
        CN_ELLIPSE_LIN,
        CN_ELLIPSE_QUAD,
        CN_ELLIPSE_APEX,
    )

    Q = [[Fraction(v) for v in row] for row in CN_ELLIPSE_QUAD]
    L = [Fraction(v) for v in CN_ELLIPSE_LIN]
    c = Fraction(CN_ELLIPSE_CONST)
    P = tuple(Fraction(v) for v in CN_ELLIPSE_APEX)
    return Q, L, c, P


def _conic_value(Q, L, c, y1, y3) -> Fraction:
    return (
        Q[0][0] * y1 * y1
        + (Q[0][1] + Q[1][0]) * y1 * y3
        + Q[1][1] * y3 * y3
        + L[0] * y1
        + L[1] * y3
        + c
    )


def chien_nakazato_ellipse_test(y1, y3) -> bool:
    """Membership in the convex hull of the printed ellipse plus (1, 0).

    The hull is the union of segments from the apex to the ellipse disk,
    so a point is inside iff it satisfies the conic inequality or the
    ray from the apex through it still meets the disk at or beyond the
    point.  Exact rational arithmetic throughout; the quadratic part of
    the conic is positive definite, which makes the ray test a root
    location question for one quadratic.
    """
    Q, L, c, P = _ellipse_data()
    y1 = Fraction(y1)
    y3 = Fraction(y3)
    if _conic_value(Q, L, c, y1, y3) <= 0:
        return True
    v1, v3 = y1 - P[0], y3 - P[1]
    if v1 == 0 and v3 == 0:
        return True
    # g(t) = conic(P + t v): g(0) > 0 (apex outside), leading term > 0
    a = Q[0][0] * v1 * v1 + (Q[0][1] + Q[1][0]) * v1 * v3 + Q[1][1] * v3 * v3
    g0 = _conic_value(Q, L, c, P[0], P[1])
    g1 = _conic_value(Q, L, c, y1, y3)
    # quadratic through g(0), g(1) with leading coefficient a
    b = g1 - g0 - a
    disc = b * b - 4 * a * g0
    if disc < 0:
        return False
    # both roots share the sign of -b/(2a); need the near root >= 1
    return -b >= 2 * a
