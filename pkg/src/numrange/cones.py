"""Hyperbolicity cones, their duals, and normal rays at the boundary.

The cone of a certified hyperbolic polynomial consists of the points
whose line toward the distinguished direction meets the zero set only
at nonnegative parameters.  For determinantal polynomials this is the
positive-semidefiniteness region of the pencil and root finding turns
into an eigenvalue computation.  Dual-cone questions are answered by
evaluating functionals on the cone's boundary samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

from numrange.linalg import MatrixPencil, as_rng, jacobi_eigh
from numrange.poly import (
    HyperbolicityCertificate,
    MultiPoly,
    charpoly,
    evaluate,
    gradient,
    hyperbolicity_check,
    restrict_to_line,
    roots_univariate,
)
from numrange.ranges import BoundaryCloud, EmptyCloud, _combined_rows, _pencil_rows

MEMBERSHIP_TOL = 1e-8
PAIRING_TOL = 1e-8
GRADIENT_FLOOR = 1e-8
SLICE_FLOOR = 1e-10
GENERATION_TOL = 1e-4
MAX_GENERATORS = 500
PENCIL_MATCH_TOL = 1e-9


class ConeError(Exception):
    pass


class NotCertifiedHyperbolic(ConeError):
    """Cone construction needs a hyperbolic certificate."""


class SingularBoundaryPoint(ConeError):
    """Gradient vanishes: the normal cone is not a single ray there."""


@dataclass(frozen=True)
class ConeSpec:
    """A certified hyperbolicity cone, optionally spectrahedral."""

    f: MultiPoly
    e: tuple
    certified: HyperbolicityCertificate
    pencil: MatrixPencil | None = None


def make_cone_spec(
    f: MultiPoly,
    e,
    pencil: MatrixPencil | None = None,
    trials: int = 200,
    rng=None,
) -> ConeSpec:
    """Certify hyperbolicity along e and bundle the result.

    When the pencil is supplied, f must be its characteristic polynomial
    (checked exactly in the rational domain, else at 20 fixed sample
    points within 1e-9 relative) and e the distinguished first axis.
    """
    e = tuple(float(v) for v in e)
    cert = hyperbolicity_check(f, e, trials=trials, rng=rng)
    if cert.verdict != "hyperbolic":
        raise NotCertifiedHyperbolic(
            f"verdict {cert.verdict!r} along {e}"
            + (f", witness {cert.witness}" if cert.witness is not None else "")
        )
    if pencil is not None:
        if len(e) != pencil.n + 1 or any(
            v != (1.0 if k == 0 else 0.0) for k, v in enumerate(e)
        ):
            raise ConeError("spectrahedral cones use e = (1, 0, ..., 0)")
        _check_pencil_match(f, pencil)
    return ConeSpec(f=f, e=e, certified=cert, pencil=pencil)


def _check_pencil_match(f: MultiPoly, pencil: MatrixPencil):
    p = charpoly(pencil)
    if f.domain == p.domain == "exact":
        if f != p:
            raise ConeError("polynomial is not the pencil's characteristic polynomial")
        return
    ff, pf = f.to_float(), p.to_float()
    gen = np.random.default_rng(1234)
    scale = max(ff.coeff_scale(), pf.coeff_scale(), 1e-300)
    for _ in range(20):
        x = list(gen.uniform(-1.0, 1.0, ff.nvars))
        a, b = evaluate(ff, x), evaluate(pf, x)
        if abs(a - b) > PENCIL_MATCH_TOL * scale * (1.0 + max(abs(v) for v in x)) ** ff.degree:
            raise ConeError(
                f"polynomial disagrees with the pencil's charpoly at {x}: {a} vs {b}"
            )


@dataclass(frozen=True)
class FunctionalPoint:
    """A dual-space vector, with its affine chart image when ell_0 != 0."""

    ell: tuple
    chart_point: tuple | None

    def __len__(self) -> int:
        return len(self.ell)

    def pair(self, x) -> float:
        return float(np.dot(self.ell, x))


def functional_point(ell) -> FunctionalPoint:
    ell = tuple(float(v) for v in ell)
    chart = tuple(v / ell[0] for v in ell[1:]) if ell[0] != 0.0 else None
    return FunctionalPoint(ell=ell, chart_point=chart)


@dataclass(frozen=True)
class ConeMembership:
    classification: str  # inside | boundary | outside
    margin: float
    method: str  # roots | eigen
    roots: tuple

    def to_json_dict(self) -> dict:
        return {
            "membership": self.classification,
            "margin": self.margin,
            "method": self.method,
        }


def cone_membership(spec: ConeSpec, a) -> ConeMembership:
    """Classify a against the cone by the smallest root toward e.

    All roots of the restriction t -> f(t e - a) are real for certified
    input; the point is inside when they are all positive, with margin
    the smallest root and tolerance band 1e-8 (1 + |a|) around zero.
    Spectrahedral cones take the eigenvalue route: those roots are
    exactly the eigenvalues of the pencil evaluated at a.
    """
    a = np.asarray(a, dtype=float)
    tau = MEMBERSHIP_TOL * (1.0 + float(np.linalg.norm(a)))
    if spec.pencil is not None:
        pencil = spec.pencil
        mats = _pencil_rows(pencil)
        coeffs = [float(a[k + 1]) for k in range(pencil.n)]
        rows = _combined_rows(mats, coeffs, pencil.d, pencil.n)
        for i in range(pencil.d):
            rows[i][i] += a[0]
        values, _, _ = jacobi_eigh(rows, pencil.d)
        roots = tuple(sorted(values))
        method = "eigen"
    else:
        cs = restrict_to_line(spec.f.to_float(), list(-a), list(spec.e))
        roots = tuple(sorted(float(r.real) for r in roots_univariate(cs)))
        method = "roots"
    margin = roots[0] if roots else math.inf
    if margin > tau:
        cls = "inside"
    elif margin < -tau:
        cls = "outside"
    else:
        cls = "boundary"
    return ConeMembership(classification=cls, margin=margin, method=method, roots=roots)


def _pencil_boundary_points(pencil: MatrixPencil, directions) -> list:
    """Boundary points (h(u), -u) of the pencil's cone: the homogenized
    support contacts, where h is the top eigenvalue along u."""
    mats = _pencil_rows(pencil)
    d, n = pencil.d, pencil.n
    out = []
    for u in directions:
        uu = [float(x) for x in u]
        values, _, _ = jacobi_eigh(_combined_rows(mats, uu, d, n), d)
        h = max(values)
        out.append(np.array([h] + [-x for x in uu]))
    return out


def sample_cone_boundary(spec: ConeSpec, count: int, rng=None) -> list:
    """Boundary points by bisection along random rays out of e.

    The cone is convex, so the membership margin changes sign exactly
    once along each ray out of e; bisecting on the margin cannot land
    on a deeper sheet of the variety the way a sign test on f itself
    can when the bracket expansion steps across two roots at once.
    Rays that never leave the cone are skipped.
    """
    gen = as_rng(rng)
    fl = spec.f.to_float()
    e = np.asarray(spec.e, dtype=float)
    nv = fl.nvars
    if spec.pencil is not None:
        pencil = spec.pencil
        mats = _pencil_rows(pencil)
        d, n = pencil.d, pencil.n

        def margin_at(x) -> float:
            coeffs = [float(x[k + 1]) for k in range(n)]
            rows = _combined_rows(mats, coeffs, d, n)
            for i in range(d):
                rows[i][i] += x[0]
            values, _, _ = jacobi_eigh(rows, d)
            return min(values)

    else:
        ee = list(spec.e)

        def margin_at(x) -> float:
            cs = restrict_to_line(fl, list(-x), ee)
            rs = [float(r.real) for r in roots_univariate(cs)]
            # far out on a recession ray the trimmed restriction can
            # lose all its roots; that reads as never-leaving, not as a
            # crossing
            return min(rs) if rs else math.inf

    out = []
    attempts = 0
    while len(out) < count and attempts < 60 * count:
        attempts += 1
        a = gen.standard_normal(nv)
        ray = a - e
        nrm = float(np.linalg.norm(ray))
        if nrm < 1e-12:
            continue
        ray /= nrm

        def g(t: float) -> float:
            return margin_at(e + t * ray)

        t_hi = 1.0
        t_lo = 0.0
        found = False
        for _ in range(60):
            if g(t_hi) <= 0.0:
                found = True
                break
            t_lo = t_hi
            t_hi *= 1.9
        if not found:
            continue
        for _ in range(90):
            mid = 0.5 * (t_lo + t_hi)
            if g(mid) <= 0.0:
                t_hi = mid
            else:
                t_lo = mid
        out.append(e + 0.5 * (t_lo + t_hi) * ray)
    return out


@dataclass(frozen=True)
class DualConeReport:
    classification: str  # inside | outside
    margin: float
    witness: tuple | None
    checked: int

    def inside(self) -> bool:
        return self.classification == "inside"

    def to_json_dict(self) -> dict:
        return {
            "membership": self.classification,
            "margin": self.margin,
            "witnesses": [list(self.witness)] if self.witness is not None else [],
        }


def dual_evaluation_points(
    spec: ConeSpec,
    cloud: BoundaryCloud | None = None,
    states: int = 200,
    rng=None,
) -> np.ndarray:
    """Evaluation set for dual membership: e plus boundary samples.

    Spectrahedral cones contribute their homogenized support contacts
    (h(u), -u) over the cloud's directions plus `states` extra random
    directions; general cones contribute ray bisection samples.
    Precompute once per cone when testing many functionals.
    """
    gen = as_rng(rng)
    points = [np.asarray(spec.e, dtype=float)]
    if spec.pencil is not None:
        if cloud is None or not cloud.records:
            raise EmptyCloud("spectrahedral dual membership needs a traced cloud")
        dirs = {r.direction for r in cloud.records}
        points += _pencil_boundary_points(spec.pencil, sorted(dirs))
        if states > 0:
            extra = gen.standard_normal((states, spec.pencil.n))
            norms = np.linalg.norm(extra, axis=1)
            keep = norms > 1e-12
            points += _pencil_boundary_points(spec.pencil, extra[keep] / norms[keep, None])
    else:
        points += sample_cone_boundary(spec, states, gen)
    return np.array(points, dtype=float)


def dual_cone_membership(
    spec: ConeSpec,
    ell,
    cloud: BoundaryCloud | None = None,
    states: int = 200,
    rng=None,
    points: np.ndarray | None = None,
) -> DualConeReport:
    """Is the functional nonnegative on the cone?

    Evaluates ell over dual_evaluation_points (pass `points` to reuse a
    precomputed set).  Any evaluation below -1e-8 at the combined scale
    is a witness for outside; the margin is the least evaluation.
    """
    if isinstance(ell, FunctionalPoint):
        lvec = np.asarray(ell.ell, dtype=float)
    else:
        lvec = np.asarray(ell, dtype=float)
    if points is None:
        points = dual_evaluation_points(spec, cloud, states, rng)
    scale = float(np.linalg.norm(lvec)) * (
        1.0 + float(np.max(np.linalg.norm(points, axis=1)))
    )
    values = points @ lvec
    k = int(np.argmin(values))
    margin = float(values[k])
    if margin < -PAIRING_TOL * scale:
        return DualConeReport(
            classification="outside",
            margin=margin,
            witness=tuple(float(x) for x in points[k]),
            checked=len(points),
        )
    return DualConeReport(
        classification="inside", margin=margin, witness=None, checked=len(points)
    )


def normal_ray(spec: ConeSpec, x) -> FunctionalPoint:
    """The outward-facing normal functional at a regular boundary point.

    The normal cone at such a point is a single ray through the
    gradient; the sign is fixed by positivity against e.  Points where
    the gradient sinks below 1e-8 of the local coefficient scale are
    singular and rejected.
    """
    x = np.asarray(x, dtype=float)
    member = cone_membership(spec, x)
    if member.classification != "boundary":
        raise ConeError(f"normal_ray needs a boundary point, got {member.classification}")
    fl = spec.f.to_float()
    g = np.array([float(v) for v in gradient(fl, list(x))])
    gscale = fl.coeff_scale() * (1.0 + float(np.max(np.abs(x)))) ** max(fl.degree - 1, 0)
    if float(np.linalg.norm(g)) <= GRADIENT_FLOOR * gscale:
        raise SingularBoundaryPoint(
            f"gradient norm {float(np.linalg.norm(g)):.3e} at scale {gscale:.3e}"
        )
    le = float(g @ np.asarray(spec.e))
    if abs(le) <= GRADIENT_FLOOR * gscale:
        raise SingularBoundaryPoint("normal pairs to zero against e")
    if le < 0:
        g = -g
    return functional_point(g)


def halfspace_filter(points, e) -> list:
    """Keep the functionals nonnegative against e (closed half-space)."""
    e = np.asarray(e, dtype=float)
    out = []
    for p in points:
        vec = np.asarray(p.ell if isinstance(p, FunctionalPoint) else p, dtype=float)
        if float(vec @ e) >= 0.0:
            out.append(p)
    return out


@dataclass(frozen=True)
class BaseSliceResult:
    points: tuple
    dropped: int


def base_slice(cone_points, ell) -> BaseSliceResult:
    """Scale each cone point onto the affine slice {ell = 1}.

    Points pairing below 1e-10 at scale sit near the slice's horizon
    and are dropped (counted): their rays never meet the hyperplane.
    """
    lvec = np.asarray(ell.ell if isinstance(ell, FunctionalPoint) else ell, dtype=float)
    lnorm = float(np.linalg.norm(lvec))
    if lnorm == 0.0:
        raise ConeError("slice functional must be nonzero")
    kept = []
    dropped = 0
    for x in cone_points:
        x = np.asarray(x, dtype=float)
        v = float(lvec @ x)
        if v > SLICE_FLOOR * lnorm * (1.0 + float(np.linalg.norm(x))):
            kept.append(tuple(float(c) for c in x / v))
        else:
            dropped += 1
    return BaseSliceResult(points=tuple(kept), dropped=dropped)


@dataclass(frozen=True)
class GenerationReport:
    residual: float
    scale: float
    generators_used: int
    active: int

    def passed(self) -> bool:
        return self.residual <= GENERATION_TOL * self.scale


def chart_generators(cloud: BoundaryCloud) -> np.ndarray:
    """Homogenized chart contacts (1, y) of a cloud.

    These span the dual cone: each is the expectation functional of an
    eigenstate, nonnegative on the whole spectrahedral cone.
    """
    pts = cloud.points()
    return np.hstack([np.ones((len(pts), 1)), pts])


def nonnegative_generation(
    ell, generators: np.ndarray, limit: int = MAX_GENERATORS
) -> GenerationReport:
    """Reproduce a functional as a nonnegative combination of generators.

    Nonnegative least squares over at most `limit` generators, chosen
    by alignment with the functional so a dense cloud still yields a
    bounded problem.  The residual is compared to 1e-4 of the
    functional's norm.  The support is trimmed toward the conic
    Caratheodory bound (ambient dimension many generators) whenever the
    trim does not hurt the residual.
    """
    lvec = np.asarray(ell.ell if isinstance(ell, FunctionalPoint) else ell, dtype=float)
    G = np.asarray(generators, dtype=float)
    lnorm = float(np.linalg.norm(lvec))
    if len(G) > limit:
        # Near-boundary functionals need generators close to their own
        # supporting face, interior ones a spread covering all of the
        # cone: half the budget goes to each.
        gn = np.linalg.norm(G, axis=1)
        gn[gn == 0.0] = 1.0
        scores = (G @ lvec) / (gn * max(lnorm, 1e-300))
        local = np.argsort(scores)[-(limit // 2):]
        stride = max(1, -(-len(G) // (limit - limit // 2)))
        spread = np.arange(0, len(G), stride)
        keep = np.unique(np.concatenate([local, spread]))[:limit]
        G = G[keep]
    A = G.T
    coeffs, resid = nnls(A, lvec)
    active = np.flatnonzero(coeffs > 1e-12)
    dim = len(lvec)
    if len(active) > dim:
        top = active[np.argsort(coeffs[active])[-dim:]]
        c2, r2 = nnls(A[:, top], lvec)
        if r2 <= max(resid, 1e-12 * lnorm):
            resid = r2
            active = top[c2 > 1e-12]
    return GenerationReport(
        residual=float(resid),
        scale=lnorm,
        generators_used=A.shape[1],
        active=int(len(active)),
    )


def cone_support_agreement(gen_a: np.ndarray, gen_b: np.ndarray, probes: int = 400, rng=None) -> float:
    """Largest support-value disagreement of two generator cones.

    Generators are ray representatives; both sets are unit-normalized
    and probed with random unit directions, so the number is scale-free.
    Used for the three-variable strengthening check: admitting
    near-singular contacts must not enlarge the generated cone.
    """
    gen = as_rng(rng)
    a = np.asarray(gen_a, dtype=float)
    b = np.asarray(gen_b, dtype=float)
    a = a / np.linalg.norm(a, axis=1)[:, None]
    b = b / np.linalg.norm(b, axis=1)[:, None]
    dim = a.shape[1]
    worst = 0.0
    for _ in range(probes):
        v = gen.standard_normal(dim)
        v /= float(np.linalg.norm(v))
        ha = float(np.max(a @ v))
        hb = float(np.max(b @ v))
        worst = max(worst, abs(ha - hb))
    return worst
