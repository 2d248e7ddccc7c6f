"""Boundary tracing and hull verification for joint expectation ranges.

For a tuple of hermitian matrices, each direction u on the sphere gives
the family combination M(u); every simple eigenvalue branch contributes
a tangency point built from expectation values of its eigenvector.  The
cloud of these points, swept over a direction grid, outlines the range;
its convex hull is then compared against the support function
u -> lambda_max(M(u)) on an independent test grid.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from numrange.hulls import ConvexHull, convex_hull_2d, convex_hull_3d, support_of_points
from numrange.linalg import (
    MULTIPLICITY_TOL,
    MatrixPencil,
    as_rng,
    jacobi_eigh,
    sample_mixed_state,
    sample_pure_state,
)

TANGENCY_TOL = 1e-9
STATE_INCLUSION_TOL = 1e-6
UNIT_NORM_TOL = 1e-12
GAP_LOWER_SLACK = 1e-9


class RangeError(Exception):
    pass


class EmptyCloud(RangeError):
    """Tracing produced no usable boundary points."""


class UnsupportedDimension(RangeError):
    """Hull verification asked for in a dimension it cannot certify."""


@dataclass(frozen=True)
class DirectionGrid:
    """Unit directions in R^n with a record of how they were generated."""

    kind: str
    n: int
    directions: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.directions, dtype=float)
        norms = np.linalg.norm(d, axis=1)
        if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOL):
            raise RangeError("grid directions must be unit vectors")
        object.__setattr__(self, "directions", d)

    def __len__(self) -> int:
        return len(self.directions)

    def mesh_estimate(self) -> float:
        """Rough covering radius of the grid on the unit sphere."""
        count = max(len(self.directions), 2)
        if self.n == 2:
            return math.pi / count
        if self.n == 3:
            # area argument: count caps of this radius tile the sphere
            return math.sqrt(4.0 / count)
        return math.pi * count ** (-1.0 / (self.n - 1))


def uniform_angle_grid(count: int) -> DirectionGrid:
    """count equispaced directions on the unit circle, starting at angle 0."""
    if count < 1:
        raise RangeError("need at least one direction")
    theta = np.arange(count) * (2.0 * math.pi / count)
    dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    return DirectionGrid("uniform_angle", 2, dirs)


def fibonacci_sphere_grid(count: int) -> DirectionGrid:
    """Deterministic low-discrepancy directions on the 2-sphere."""
    if count < 1:
        raise RangeError("need at least one direction")
    k = np.arange(count)
    z = 1.0 - (2.0 * k + 1.0) / count
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    golden = (1.0 + math.sqrt(5.0)) / 2.0
    phi = 2.0 * math.pi * (k / golden % 1.0)
    dirs = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    return DirectionGrid("fibonacci_sphere", 3, dirs)


def random_sphere_grid(count: int, n: int, rng=None) -> DirectionGrid:
    """count directions drawn uniformly on the sphere in R^n."""
    if count < 1:
        raise RangeError("need at least one direction")
    if n < 1:
        raise RangeError("need ambient dimension >= 1")
    gen = as_rng(rng)
    raw = gen.standard_normal((count, n))
    norms = np.linalg.norm(raw, axis=1)
    while np.any(norms < 1e-12):
        bad = norms < 1e-12
        raw[bad] = gen.standard_normal((int(np.sum(bad)), n))
        norms = np.linalg.norm(raw, axis=1)
    return DirectionGrid("random_sphere", n, raw / norms[:, None])


def direction_grid(n: int, count: int, rng=None) -> DirectionGrid:
    """Default grid family for each ambient dimension."""
    if n == 2:
        return uniform_angle_grid(count)
    if n == 3:
        return fibonacci_sphere_grid(count)
    return random_sphere_grid(count, n, rng)


@dataclass(frozen=True)
class CloudRecord:
    """One tangency contact: where, from which direction, which branch."""

    point: tuple
    direction: tuple
    branch: int
    eigenvalue: float
    simple: bool


@dataclass(frozen=True)
class BoundaryCloud:
    """All contacts produced by sweeping a grid, plus the skip count."""

    n: int
    records: tuple
    grid: DirectionGrid
    skipped: int

    def __len__(self) -> int:
        return len(self.records)

    def points(self) -> np.ndarray:
        if not self.records:
            raise EmptyCloud("no boundary contacts recorded")
        cached = getattr(self, "_points_cache", None)
        if cached is None:
            cached = np.array([r.point for r in self.records], dtype=float)
            object.__setattr__(self, "_points_cache", cached)
        return cached


def _pencil_rows(pencil: MatrixPencil) -> list:
    mats = []
    for k in range(pencil.n):
        a = pencil.matrices[k].as_array()
        mats.append([[complex(a[i, j]) for j in range(pencil.d)] for i in range(pencil.d)])
    return mats


def _combined_rows(mats, u, d: int, n: int) -> list:
    rows = []
    for i in range(d):
        row = []
        for j in range(d):
            acc = 0.0 + 0.0j
            for k in range(n):
                acc += u[k] * mats[k][i][j]
            row.append(acc)
        rows.append(row)
    return rows


def _sorted_eigh(rows, d: int):
    """jacobi_eigh plus an ascending sort of values and vector columns."""
    values, vectors, _ = jacobi_eigh(rows, d)
    order = sorted(range(d), key=lambda k: values[k])
    vals = [values[k] for k in order]
    vecs = [[vectors[i][k] for k in order] for i in range(d)]
    return vals, vecs


def _eigen_groups(values, tol: float) -> list:
    groups = []
    start = 0
    for i in range(1, len(values)):
        if values[i] - values[i - 1] > tol:
            groups.append((start, i))
            start = i
    groups.append((start, len(values)))
    return groups


def trace_boundary_cloud(
    pencil: MatrixPencil,
    grid: DirectionGrid,
    include_degenerate: bool = False,
) -> BoundaryCloud:
    """Contact points of the range boundary, one per simple branch.

    Repeated eigenvalues do not determine an eigenvector, so their
    branches are skipped (and counted); pass include_degenerate=True to
    record an arbitrary vector of the eigenspace anyway, flagged
    simple=False.
    """
    if grid.n != pencil.n:
        raise RangeError(f"grid lives in R^{grid.n}, family in R^{pencil.n}")
    d, n = pencil.d, pencil.n
    mats = _pencil_rows(pencil)
    fro = pencil.norm()
    group_tol = MULTIPLICITY_TOL * (1.0 + fro)
    records = []
    skipped = 0
    for u in grid.directions:
        uu = [float(x) for x in u]
        rows = _combined_rows(mats, uu, d, n)
        values, vectors = _sorted_eigh(rows, d)
        for branch, (lo, hi) in enumerate(_eigen_groups(values, group_tol)):
            simple = hi - lo == 1
            if not simple and not include_degenerate:
                skipped += hi - lo
                continue
            psi = [vectors[i][lo] for i in range(d)]
            psi_c = [z.conjugate() for z in psi]
            point = []
            for k in range(n):
                ak = mats[k]
                acc = 0.0
                for i in range(d):
                    row = ak[i]
                    s = 0.0 + 0.0j
                    for j in range(d):
                        s += row[j] * psi[j]
                    acc += (psi_c[i] * s).real
                point.append(acc)
            records.append(
                CloudRecord(
                    point=tuple(point),
                    direction=tuple(uu),
                    branch=branch,
                    eigenvalue=values[lo],
                    simple=simple,
                )
            )
    return BoundaryCloud(n=n, records=tuple(records), grid=grid, skipped=skipped)


def merge_boundary_clouds(a: BoundaryCloud, b: BoundaryCloud) -> BoundaryCloud:
    if a.n != b.n:
        raise RangeError("clouds live in different dimensions")
    return BoundaryCloud(
        n=a.n, records=a.records + b.records, grid=a.grid, skipped=a.skipped + b.skipped
    )


def _sorted_values(mats, u, d: int, n: int) -> list:
    values, _, _ = jacobi_eigh(_combined_rows(mats, u, d, n), d)
    values.sort()
    return values


def _min_adjacent_gap(values) -> tuple:
    k = min(range(len(values) - 1), key=lambda i: values[i + 1] - values[i])
    return values[k + 1] - values[k], k


def _tangent_basis(u: np.ndarray) -> np.ndarray:
    n = len(u)
    # Householder frame: reflect e_1 onto u, remaining columns span u's
    # orthogonal complement
    v = u.copy()
    v[0] += math.copysign(1.0, u[0] if u[0] != 0 else 1.0) * np.linalg.norm(u)
    v /= np.linalg.norm(v)
    H = np.eye(n) - 2.0 * np.outer(v, v)
    return H[:, 1:].T


def _refine_crossing(mats, d: int, n: int, u0, certify: float):
    """Descend to a local minimum of the smallest adjacent eigengap.

    A short ring descent positions the start, then Nelder-Mead in
    tangent-plane coordinates finishes; plain coordinate descent stalls
    in the curved valleys these gap landscapes have around a crossing.
    """
    from scipy.optimize import minimize

    u = np.asarray(u0, dtype=float)
    u = u / np.linalg.norm(u)

    def gap_at(vec) -> float:
        vec = vec / np.linalg.norm(vec)
        return _min_adjacent_gap(_sorted_values(mats, [float(x) for x in vec], d, n))[0]

    val = gap_at(u)
    r = 0.04
    for _ in range(60):
        if r < 1e-6 or val <= 0.01 * certify:
            break
        basis = _tangent_basis(u)
        moved = False
        for step in _ring_steps(len(basis)):
            cand = u + r * (step @ basis)
            cand = cand / np.linalg.norm(cand)
            v = gap_at(cand)
            if v < val:
                u, val = cand, v
                moved = True
                break
        if not moved:
            r *= 0.55
    basis = _tangent_basis(u)
    center = u

    def objective(ab) -> float:
        return gap_at(center + ab @ basis)

    res = minimize(
        objective,
        np.zeros(len(basis)),
        method="Nelder-Mead",
        options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 600, "maxfev": 900},
    )
    if res.fun < val:
        u = center + res.x @ basis
        u = u / np.linalg.norm(u)
        val = float(res.fun)
    return u, val


def _ring_steps(m: int) -> list:
    if m == 1:
        return [np.array([1.0]), np.array([-1.0])]
    if m == 2:
        out = []
        for k in range(12):
            a = 2.0 * math.pi * k / 12.0
            out.append(np.array([math.cos(a), math.sin(a)]))
        return out
    steps = []
    for i in range(m):
        for s in (1.0, -1.0):
            e = np.zeros(m)
            e[i] = s
            steps.append(e)
    diag = np.ones(m) / math.sqrt(m)
    steps += [diag, -diag]
    return steps


def degenerate_patches(
    pencil: MatrixPencil,
    cloud: BoundaryCloud,
    gap_tol: float | None = None,
    certify_tol: float | None = None,
    max_patches: int = 24,
    theta_samples: int = 1200,
    phi_samples: int = 8,
) -> BoundaryCloud:
    """Expectation patches at eigenvalue crossings near the traced grid.

    Per-branch tracing cannot see the dual points that regular branches
    limit onto at a crossing; the eigenvectors there are only determined
    up to mixing, and the mixtures' expectation values fill a patch
    (for the 3x3 example's zero crossing, exactly the singular segment).
    This scans the cloud's grid for directions where adjacent branches
    nearly touch, descends to each crossing, and when the gap closes to
    roundoff emits the mixed-eigenvector sweep as simple=False records.
    """
    d, n = pencil.d, pencil.n
    mats = _pencil_rows(pencil)
    scale = 1.0 + pencil.norm()
    if gap_tol is None:
        gap_tol = 0.05 * scale
    if certify_tol is None:
        certify_tol = 1e-8 * scale
    seeds = []
    for u in cloud.grid.directions:
        gap, _ = _min_adjacent_gap(_sorted_values(mats, [float(x) for x in u], d, n))
        if gap <= gap_tol:
            seeds.append((gap, u))
    seeds.sort(key=lambda t: t[0])
    picked = []
    for gap, u in seeds:
        if all(np.linalg.norm(u - v) > 0.05 for _, v in picked):
            picked.append((gap, u))
        if len(picked) >= max_patches:
            break
    centers = []
    for _, u in picked:
        uc, val = _refine_crossing(mats, d, n, u, certify_tol)
        if val > certify_tol:
            continue
        if all(np.linalg.norm(uc - w) > 0.01 for w in centers):
            centers.append(uc)
    records = []
    for uc in centers:
        rows = _combined_rows(mats, [float(x) for x in uc], d, n)
        values, vectors = _sorted_eigh(rows, d)
        _, lo = _min_adjacent_gap(values)
        psi1 = np.array([vectors[i][lo] for i in range(d)])
        psi2 = np.array([vectors[i][lo + 1] for i in range(d)])
        amats = [np.array(m) for m in mats]
        a = np.array([np.vdot(psi1, m @ psi1).real for m in amats])
        b = np.array([np.vdot(psi2, m @ psi2).real for m in amats])
        c = np.array([np.vdot(psi1, m @ psi2) for m in amats])
        theta = np.linspace(0.0, 0.5 * math.pi, theta_samples)
        phi = np.linspace(0.0, 2.0 * math.pi, phi_samples, endpoint=False)
        ct2 = np.cos(theta) ** 2
        st2 = np.sin(theta) ** 2
        cs = np.cos(theta) * np.sin(theta)
        lam = 0.5 * (values[lo] + values[lo + 1])
        direction = tuple(float(x) for x in uc)
        for ti in range(theta_samples):
            base_pt = ct2[ti] * a + st2[ti] * b
            for ph in phi:
                mix = 2.0 * cs[ti] * (c.real * math.cos(ph) - c.imag * math.sin(ph))
                y = base_pt + mix
                records.append(
                    CloudRecord(
                        point=tuple(float(v) for v in y),
                        direction=direction,
                        branch=lo,
                        eigenvalue=lam,
                        simple=False,
                    )
                )
    return BoundaryCloud(n=n, records=tuple(records), grid=cloud.grid, skipped=0)
    """lambda_max of the direction combination M(u)."""
    d = pencil.d
    mats = _pencil_rows(pencil)
    rows = _combined_rows(mats, [float(x) for x in u], d, pencil.n)
    values, _, _ = jacobi_eigh(rows, d)
    return max(values)


@dataclass(frozen=True)
class SupportTable:
    """Support values of the range sampled over a grid of directions."""

    grid: DirectionGrid
    values: np.ndarray


def support_function(pencil: MatrixPencil, u) -> float:
    """Support value of the range at one direction: the top eigenvalue
    of the family combined along u."""
    uu = [float(x) for x in u]
    if len(uu) != pencil.n:
        raise RangeError(f"direction arity {len(uu)} vs family n = {pencil.n}")
    rows = _combined_rows(_pencil_rows(pencil), uu, pencil.d, pencil.n)
    values, _, _ = jacobi_eigh(rows, pencil.d)
    return max(values)


def support_table(pencil: MatrixPencil, grid: DirectionGrid) -> SupportTable:
    if grid.n != pencil.n:
        raise RangeError(f"grid lives in R^{grid.n}, family in R^{pencil.n}")
    d, n = pencil.d, pencil.n
    mats = _pencil_rows(pencil)
    vals = np.empty(len(grid.directions))
    for idx, u in enumerate(grid.directions):
        rows = _combined_rows(mats, [float(x) for x in u], d, n)
        values, _, _ = jacobi_eigh(rows, d)
        vals[idx] = max(values)
    return SupportTable(grid=grid, values=vals)


def tangency_residual(record: CloudRecord) -> float:
    """|lambda - <u, y>| for one contact; zero in exact arithmetic."""
    u = np.asarray(record.direction)
    y = np.asarray(record.point)
    return abs(record.eigenvalue - float(u @ y))


@dataclass(frozen=True)
class VerifyReport:
    """Outcome of the hull-versus-support comparison."""

    n: int
    max_gap: float
    min_gap: float
    argmax_direction: tuple
    grid_sizes: dict
    tol: float
    verdict: str
    skipped: int
    advisory: bool = False

    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "max_gap": self.max_gap,
            "min_gap": self.min_gap,
            "argmax_direction": list(self.argmax_direction),
            "grid_sizes": dict(self.grid_sizes),
            "tol": self.tol,
            "verdict": self.verdict,
            "skipped": self.skipped,
            "advisory": self.advisory,
        }


def cloud_hull(cloud: BoundaryCloud) -> ConvexHull:
    pts = cloud.points()
    if cloud.n == 2:
        return convex_hull_2d(pts)
    if cloud.n == 3:
        return convex_hull_3d(pts)
    raise UnsupportedDimension(
        f"certified hulls cover n in {{2, 3}}, got n={cloud.n}"
    )


def verify_main_theorem(
    pencil: MatrixPencil,
    trace_grid: DirectionGrid,
    test_grid: DirectionGrid,
    tol: float | None = None,
    advisory: bool = False,
) -> VerifyReport:
    """Compare hull support of the traced cloud with the true support.

    The gap lambda_max(M(u)) - hull_support(u) must be nonnegative up to
    1e-9 roundoff (the cloud never sticks out) and at most tol (the
    cloud fills the range).  Default tol scales with the mesh of the
    trace grid and the family norm.  Above n=3 there is no hull support;
    pass advisory=True to fall back to the raw cloud maximum, reported
    as advisory rather than certified.
    """
    n = pencil.n
    if n < 2:
        raise UnsupportedDimension("need at least two matrices to verify a range")
    if n > 3 and not advisory:
        raise UnsupportedDimension(
            f"no certified hull in n={n}; rerun with advisory=True for a cloud-based gap"
        )
    cloud = trace_boundary_cloud(pencil, trace_grid)
    pts = cloud.points()
    use_hull = n <= 3
    hull = cloud_hull(cloud) if use_hull else None
    if tol is None:
        tol = 10.0 * trace_grid.mesh_estimate() * pencil.norm()
    table = support_table(pencil, test_grid)
    max_gap = -math.inf
    min_gap = math.inf
    argmax = test_grid.directions[0]
    for u, sval in zip(test_grid.directions, table.values):
        inner = hull.support(u) if use_hull else support_of_points(pts, u)
        gap = sval - inner
        if gap > max_gap:
            max_gap = gap
            argmax = u
        if gap < min_gap:
            min_gap = gap
    ok = min_gap >= -GAP_LOWER_SLACK and max_gap <= tol
    return VerifyReport(
        n=n,
        max_gap=float(max_gap),
        min_gap=float(min_gap),
        argmax_direction=tuple(float(x) for x in argmax),
        grid_sizes={"trace": len(trace_grid), "test": len(test_grid)},
        tol=float(tol),
        verdict="pass" if ok else "fail",
        skipped=cloud.skipped,
        advisory=not use_hull,
    )


@dataclass(frozen=True)
class InclusionReport:
    checked: int
    violations: int
    worst_excess: float

    def passed(self) -> bool:
        return self.violations == 0


def verify_state_inclusion(
    pencil: MatrixPencil,
    hull: ConvexHull,
    count: int = 200,
    rng=None,
    mixed_fraction: float = 0.5,
) -> InclusionReport:
    """Expectation tuples of random states must land inside the hull."""
    gen = as_rng(rng)
    scale = 1.0 + float(np.max(np.abs(hull.vertices)))
    slack = STATE_INCLUSION_TOL * scale
    violations = 0
    worst = 0.0
    for i in range(count):
        if gen.uniform() < mixed_fraction:
            rho = sample_mixed_state(pencil.d, gen)
        else:
            rho = sample_pure_state(pencil.d, gen)
        y = np.array(rho.expectations(pencil))
        if not hull.contains(y, slack):
            violations += 1
            if hull.normals is not None:
                excess = float(np.max(hull.normals @ y - hull.offsets))
                worst = max(worst, excess)
    return InclusionReport(checked=count, violations=violations, worst_excess=worst)


def cloud_to_csv(cloud: BoundaryCloud, metadata: dict | None = None) -> str:
    """CSV dump: direction columns, branch, point columns, simple flag.

    Metadata rides along in '#'-prefixed header lines so the file stays
    loadable by ordinary CSV readers that skip comments.
    """
    buf = io.StringIO()
    if metadata:
        for key in sorted(metadata):
            buf.write(f"# {key}: {metadata[key]}\n")
    writer = csv.writer(buf, lineterminator="\n")
    n = cloud.n
    header = [f"u{k + 1}" for k in range(n)] + ["branch"] + [f"y{k + 1}" for k in range(n)] + ["simple"]
    writer.writerow(header)
    for r in cloud.records:
        row = [f"{x:.17g}" for x in r.direction]
        row.append(str(r.branch))
        row += [f"{x:.17g}" for x in r.point]
        row.append("1" if r.simple else "0")
        writer.writerow(row)
    return buf.getvalue()
