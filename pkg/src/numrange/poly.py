"""Homogeneous multivariate polynomials over exact rationals or floats.

Supplies the characteristic form of a Hermitian pencil, evaluation and
differentiation, restriction to lines, a Monte-Carlo hyperbolicity
check, and Taylor multiplicity at a point of the zero set.  Exact
arithmetic uses Fraction coefficients built through Gaussian-rational
intermediates; everything else is complex floats.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from numrange.linalg import (
    EXACT,
    FLOAT,
    GaussianRational,
    MatrixPencil,
    NonHermitianInput,
    as_rng,
    parse_rational,
    rational_str,
)

# Leibniz expansion bound for the exact characteristic form.
EXACT_CHARPOLY_MAX_DIM = 6
# |Im root| <= REAL_ROOT_TOL * (1 + max|root|) counts as real.
REAL_ROOT_TOL = 1e-7
# Witness threshold for a not_hyperbolic verdict; the band between the
# two tolerances is reported as inconclusive.
WITNESS_IMAG_TOL = 1e-6
ZERO_AT_DIRECTION_TOL = 1e-12
# Relative floor under which a float Taylor coefficient counts as zero.
TAYLOR_ZERO_TOL = 1e-8


class PolyError(Exception):
    """Base class for errors raised by this module."""


class ArityMismatch(PolyError):
    """Point length does not match the number of variables."""


class DimensionTooLarge(PolyError):
    """Exact expansion requested beyond the d <= 6 bound."""


class ZeroAtDirection(PolyError):
    """Polynomial vanishes at the proposed hyperbolicity direction."""


class NotOnVariety(PolyError):
    """Multiplicity requested at a point where f does not vanish."""


class MultiPoly:
    """Sparse homogeneous polynomial: exponent tuple -> coefficient.

    Coefficients are Fraction in the exact domain, float otherwise.
    Instances are immutable; arithmetic returns new objects.  The zero
    polynomial keeps its nominal degree with an empty term map.
    """

    __slots__ = ("nvars", "degree", "terms", "domain")

    def __init__(self, nvars: int, degree: int, terms: dict, domain: str):
        clean = {}
        for exp, c in terms.items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != nvars:
                raise ArityMismatch(f"exponent {exp} has arity {len(exp)}, not {nvars}")
            if sum(exp) != degree:
                raise ValueError(f"exponent {exp} breaks homogeneity of degree {degree}")
            if domain == EXACT:
                c = Fraction(c)
                if c == 0:
                    continue
            else:
                c = float(c)
                if c == 0.0:
                    continue
            clean[exp] = c
        object.__setattr__(self, "nvars", int(nvars))
        object.__setattr__(self, "degree", int(degree))
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "domain", domain)

    def __setattr__(self, name, value):
        raise AttributeError("MultiPoly is immutable")

    # -- ring structure ----------------------------------------------------

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        self._check_compatible(other)
        terms = dict(self.terms)
        for exp, c in other.terms.items():
            terms[exp] = terms.get(exp, 0) + c
        return MultiPoly(self.nvars, self.degree, terms, self.domain)

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + (-other)

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(
            self.nvars, self.degree, {e: -c for e, c in self.terms.items()}, self.domain
        )

    def __mul__(self, other):
        if isinstance(other, MultiPoly):
            if other.nvars != self.nvars or other.domain != self.domain:
                raise ArityMismatch("operands differ in arity or domain")
            terms = {}
            for e1, c1 in self.terms.items():
                for e2, c2 in other.terms.items():
                    exp = tuple(a + b for a, b in zip(e1, e2))
                    terms[exp] = terms.get(exp, 0) + c1 * c2
            return MultiPoly(
                self.nvars, self.degree + other.degree, terms, self.domain
            )
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, c) -> "MultiPoly":
        return MultiPoly(
            self.nvars,
            self.degree,
            {e: v * c for e, v in self.terms.items()},
            self.domain,
        )

    def __pow__(self, k: int) -> "MultiPoly":
        if k < 0:
            raise ValueError("negative power")
        out = MultiPoly(self.nvars, 0, {(0,) * self.nvars: 1}, self.domain)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return (
            self.nvars == other.nvars
            and self.degree == other.degree
            and self.domain == other.domain
            and self.terms == other.terms
        )

    def _check_compatible(self, other: "MultiPoly"):
        if not isinstance(other, MultiPoly):
            raise TypeError("expected MultiPoly")
        if (
            other.nvars != self.nvars
            or other.degree != self.degree
            or other.domain != self.domain
        ):
            raise ArityMismatch("operands differ in arity, degree, or domain")

    # -- conversions -------------------------------------------------------

    def to_float(self) -> "MultiPoly":
        if self.domain == FLOAT:
            return self
        return MultiPoly(
            self.nvars,
            self.degree,
            {e: float(c) for e, c in self.terms.items()},
            FLOAT,
        )

    def coeff_scale(self) -> float:
        if not self.terms:
            return 0.0
        return max(abs(float(c)) for c in self.terms.values())

    def __call__(self, x):
        return evaluate(self, x)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for exp in sorted(self.terms, reverse=True):
            c = self.terms[exp]
            mono = "*".join(
                f"x{j}" if e == 1 else f"x{j}^{e}"
                for j, e in enumerate(exp)
                if e > 0
            )
            if self.domain == EXACT:
                cs = rational_str(c)
            else:
                cs = repr(c)
            if mono:
                if c == 1:
                    parts.append(mono)
                elif c == -1:
                    parts.append(f"-{mono}")
                else:
                    parts.append(f"{cs}*{mono}")
            else:
                parts.append(cs)
        out = " + ".join(parts)
        return out.replace("+ -", "- ")

    def __repr__(self):
        return (
            f"MultiPoly(nvars={self.nvars}, degree={self.degree}, "
            f"terms={len(self.terms)}, domain={self.domain!r})"
        )


def monomial(nvars: int, exp, coeff=1, domain: str = EXACT) -> MultiPoly:
    exp = tuple(exp)
    return MultiPoly(nvars, sum(exp), {exp: coeff}, domain)


def evaluate(f: MultiPoly, x):
    """Value of f at a point; exact for Fraction input in the exact domain.

    Accepts real or complex coordinates in the float domain.
    """
    x = list(x)
    if len(x) != f.nvars:
        raise ArityMismatch(f"point arity {len(x)} vs nvars {f.nvars}")
    # cache powers per variable up to the largest exponent used
    maxe = [0] * f.nvars
    for exp in f.terms:
        for j, e in enumerate(exp):
            if e > maxe[j]:
                maxe[j] = e
    pows = []
    for j in range(f.nvars):
        col = [1]
        for _ in range(maxe[j]):
            col.append(col[-1] * x[j])
        pows.append(col)
    total = 0
    for exp, c in f.terms.items():
        v = c
        for j, e in enumerate(exp):
            if e:
                v = v * pows[j][e]
        total = total + v
    return total


def partial_derivative(f: MultiPoly, j: int) -> MultiPoly:
    terms = {}
    for exp, c in f.terms.items():
        if exp[j] == 0:
            continue
        newexp = exp[:j] + (exp[j] - 1,) + exp[j + 1 :]
        terms[newexp] = terms.get(newexp, 0) + c * exp[j]
    return MultiPoly(f.nvars, max(f.degree - 1, 0), terms, f.domain)


def gradient(f: MultiPoly, x):
    """All first partial derivatives of f evaluated at x."""
    x = list(x)
    if len(x) != f.nvars:
        raise ArityMismatch(f"point arity {len(x)} vs nvars {f.nvars}")
    return [evaluate(partial_derivative(f, j), x) for j in range(f.nvars)]


def restrict_to_line(f: MultiPoly, base, dir):
    """Coefficients [c_0, ..., c_deg] of t -> f(base + t*dir).

    Exact when f and the points are rational; otherwise float/complex.
    """
    base = list(base)
    dir = list(dir)
    if len(base) != f.nvars or len(dir) != f.nvars:
        raise ArityMismatch("base/dir arity mismatch")
    if all(v == 0 for v in dir):
        raise ValueError("direction must be nonzero")
    deg = f.degree
    out = [0] * (deg + 1)
    # per-variable binomial expansions of (base_j + t*dir_j)^e, cached
    cache = {}

    def var_power(j, e):
        key = (j, e)
        got = cache.get(key)
        if got is None:
            b, d = base[j], dir[j]
            got = [
                math.comb(e, k) * b ** (e - k) * d**k for k in range(e + 1)
            ]
            cache[key] = got
        return got

    for exp, c in f.terms.items():
        u = [c]
        for j, e in enumerate(exp):
            if e == 0:
                continue
            vp = var_power(j, e)
            u = [
                sum(u[i] * vp[k - i] for i in range(max(0, k - e), min(len(u), k + 1)))
                for k in range(len(u) + e)
            ]
        for k, v in enumerate(u):
            out[k] = out[k] + v
    return out


def roots_univariate(coeffs) -> np.ndarray:
    """All complex roots of c_0 + c_1 t + ... via the companion matrix.

    Leading coefficients tiny relative to the largest are trimmed first;
    numpy balances the companion matrix before its eigenvalue run.
    """
    c = [complex(v) for v in coeffs]
    scale = max((abs(v) for v in c), default=0.0)
    if scale == 0.0:
        return np.array([], dtype=complex)
    while c and abs(c[-1]) <= 1e-13 * scale:
        c.pop()
    if len(c) <= 1:
        return np.array([], dtype=complex)
    arr = np.array(c[::-1], dtype=complex)
    if np.allclose(arr.imag, 0.0):
        arr = arr.real
    return np.atleast_1d(np.roots(arr))


# ---------------------------------------------------------------------------
# characteristic polynomial of a pencil


def _linear_entry_forms(pencil: MatrixPencil):
    """entry (j,k) of x_0 I + sum x_i A_i as {var index: coefficient}."""
    d, n = pencil.d, pencil.n
    exact = pencil.domain == EXACT
    forms = [[{} for _ in range(d)] for _ in range(d)]
    for j in range(d):
        for k in range(d):
            form = forms[j][k]
            if j == k:
                form[0] = GaussianRational(1) if exact else (1.0 + 0j)
            for i, m in enumerate(pencil.matrices):
                v = m.data[j][k] if exact else complex(m.data[j, k])
                if (exact and v) or (not exact and v != 0):
                    form[i + 1] = v
    return forms


def _det_by_column_subsets(forms, d: int, nvars: int, exact: bool):
    """Determinant of a matrix of linear forms, expanding along rows
    with shared minors over column subsets (the full Leibniz sum)."""
    one = GaussianRational(1) if exact else (1.0 + 0j)
    full = (1 << d) - 1
    minors = {0: {(0,) * nvars: one}}
    for mask in sorted(range(1, full + 1), key=lambda m: m.bit_count()):
        r = mask.bit_count() - 1
        acc = {}
        sign = -1 if r & 1 else 1
        for j in range(d):
            bit = 1 << j
            if not mask & bit:
                continue
            sub = minors[mask ^ bit]
            form = forms[r][j]
            if form:
                for exp, c in sub.items():
                    for var, a in form.items():
                        newexp = exp[:var] + (exp[var] + 1,) + exp[var + 1 :]
                        inc = c * a if sign > 0 else -(c * a)
                        prev = acc.get(newexp)
                        acc[newexp] = inc if prev is None else prev + inc
            sign = -sign
        minors[mask] = acc
    return minors[full]


def charpoly(pencil: MatrixPencil) -> MultiPoly:
    """det(x_0 I + x_1 A_1 + ... + x_n A_n) as a homogeneous MultiPoly.

    Exact pencils (d <= 6) expand in the Gaussian-rational ring and must
    come out with identically real coefficients.  Float pencils expand
    the same way up to d = 6 and fall back to interpolation on an
    integer grid beyond that.
    """
    d, n = pencil.d, pencil.n
    nvars = n + 1
    if pencil.domain == EXACT:
        if d > EXACT_CHARPOLY_MAX_DIM:
            raise DimensionTooLarge(f"exact expansion capped at d = {EXACT_CHARPOLY_MAX_DIM}, got {d}")
        forms = _linear_entry_forms(pencil)
        raw = _det_by_column_subsets(forms, d, nvars, exact=True)
        terms = {}
        for exp, c in raw.items():
            if not c.is_real():
                raise NonHermitianInput(
                    f"coefficient of {exp} has imaginary part {c.im}"
                )
            if c.re != 0:
                terms[exp] = c.re
        return MultiPoly(nvars, d, terms, EXACT)
    if d <= EXACT_CHARPOLY_MAX_DIM:
        forms = _linear_entry_forms(pencil)
        raw = _det_by_column_subsets(forms, d, nvars, exact=False)
        scale = max((abs(c) for c in raw.values()), default=0.0)
        terms = {}
        for exp, c in raw.items():
            if abs(c.imag) > 1e-10 * max(scale, 1e-300):
                raise NonHermitianInput(
                    f"coefficient of {exp} has imaginary part {c.imag:.3e}"
                )
            if abs(c) > 1e-12 * scale:
                terms[exp] = c.real
        return MultiPoly(nvars, d, terms, FLOAT)
    return _charpoly_interpolated(pencil)


def _charpoly_interpolated(pencil: MatrixPencil) -> MultiPoly:
    """Fit the degree-d coefficients from determinant values on an
    integer grid; float pencils with d > 6 only."""
    d, n = pencil.d, pencil.n
    nvars = n + 1
    exps = sorted(_homogeneous_exponents(nvars, d), reverse=True)
    rng = np.random.default_rng(20240 + 16 * d + n)
    rows = 3 * len(exps)
    pts = rng.integers(-3, 4, size=(rows, nvars)).astype(float)
    pts[np.all(pts == 0, axis=1)] = 1.0
    stack = pencil.stack()
    A = np.empty((rows, len(exps)))
    b = np.empty(rows)
    eye = np.eye(d)
    for s in range(rows):
        x = pts[s]
        for c, exp in enumerate(exps):
            A[s, c] = np.prod([x[j] ** e for j, e in enumerate(exp)])
        M = x[0] * eye + np.tensordot(x[1:], stack, axes=1)
        b[s] = float(np.real(np.linalg.det(M)))
    coeffs, *_ = np.linalg.lstsq(A, b, rcond=None)
    scale = max(1.0, float(np.max(np.abs(coeffs))))
    terms = {
        exp: float(c)
        for exp, c in zip(exps, coeffs)
        if abs(c) > 1e-9 * scale
    }
    return MultiPoly(nvars, d, terms, FLOAT)


def _homogeneous_exponents(nvars: int, degree: int):
    if nvars == 1:
        yield (degree,)
        return
    for first in range(degree, -1, -1):
        for rest in _homogeneous_exponents(nvars - 1, degree - first):
            yield (first,) + rest


# ---------------------------------------------------------------------------
# hyperbolicity


@dataclass(frozen=True)
class HyperbolicityCertificate:
    direction: tuple
    verdict: str  # hyperbolic | not_hyperbolic | inconclusive
    witness: tuple | None
    samples_checked: int


def hyperbolicity_check(
    f: MultiPoly, e, trials: int = 200, rng=None
) -> HyperbolicityCertificate:
    """Monte-Carlo reality test of t -> f(te - a) along random points a.

    A hyperbolic verdict means no counterexample was found in `trials`
    samples with f(e) > 0.  A clear complex root (imaginary part beyond
    1e-6 of the root scale) yields not_hyperbolic with the witness; the
    gray band between the real-root tolerance and the witness threshold,
    or a negative sign at e, yields inconclusive.
    """
    e = [float(v) for v in e]
    if len(e) != f.nvars:
        raise ArityMismatch(f"direction arity {len(e)} vs nvars {f.nvars}")
    ff = f.to_float()
    scale = ff.coeff_scale()
    pe = evaluate(ff, e)
    if abs(pe) <= ZERO_AT_DIRECTION_TOL * max(scale, 1e-300):
        raise ZeroAtDirection(f"f(e) = {pe:.3e} below tolerance")
    if pe < 0:
        # sign convention not met; the caller should flip f
        return HyperbolicityCertificate(tuple(e), "inconclusive", None, 0)
    g = as_rng(rng)
    gray = False
    for k in range(trials):
        a = g.standard_normal(f.nvars)
        coeffs = restrict_to_line(ff, list(-a), e)
        roots = roots_univariate(coeffs)
        if len(roots) == 0:
            continue
        rscale = 1.0 + float(np.max(np.abs(roots)))
        worst = float(np.max(np.abs(roots.imag)))
        if worst > WITNESS_IMAG_TOL * rscale:
            return HyperbolicityCertificate(
                tuple(e), "not_hyperbolic", tuple(float(v) for v in a), k + 1
            )
        if worst > REAL_ROOT_TOL * rscale:
            gray = True
    if gray:
        return HyperbolicityCertificate(tuple(e), "inconclusive", None, trials)
    return HyperbolicityCertificate(tuple(e), "hyperbolic", None, trials)


# ---------------------------------------------------------------------------
# multiplicity


def _taylor_shift(f: MultiPoly, x):
    """Terms of y -> f(x + y) grouped as {exponent: coefficient}."""
    shifted = {}
    for exp, c in f.terms.items():
        # expand prod_j (x_j + y_j)^(e_j)
        factors = []
        for j, e in enumerate(exp):
            if e == 0:
                factors.append([(0, 1)])
                continue
            col = []
            for k in range(e + 1):
                col.append((k, math.comb(e, k) * x[j] ** (e - k)))
            factors.append(col)
        for combo in itertools.product(*factors):
            yexp = tuple(k for k, _ in combo)
            v = c
            for _, w in combo:
                v = v * w
            shifted[yexp] = shifted.get(yexp, 0) + v
    return shifted


def multiplicity_at(f: MultiPoly, x) -> int:
    """Order of vanishing of f at x: the least total degree carrying a
    nonzero Taylor coefficient after recentering at x."""
    x = list(x)
    if len(x) != f.nvars:
        raise ArityMismatch(f"point arity {len(x)} vs nvars {f.nvars}")
    shifted = _taylor_shift(f, x)
    if f.domain == EXACT:
        orders = sorted(sum(e) for e, c in shifted.items() if c != 0)
        if not orders:
            raise NotOnVariety("f is the zero polynomial")
        if orders[0] == 0:
            raise NotOnVariety(f"f(x) = {shifted[(0,) * f.nvars]} is not 0")
        return orders[0]
    scale = max((abs(float(c)) for c in shifted.values()), default=0.0)
    tol = TAYLOR_ZERO_TOL * max(scale, 1e-300)
    orders = sorted(
        sum(e) for e, c in shifted.items() if abs(float(c)) > tol
    )
    if not orders:
        raise NotOnVariety("all Taylor coefficients below tolerance")
    if orders[0] == 0:
        raise NotOnVariety(
            f"f(x) = {float(shifted[(0,) * f.nvars]):.3e} exceeds tolerance"
        )
    return orders[0]


def _root_multiplicity_at_zero(coeffs, domain: str) -> int:
    if domain == EXACT:
        m = 0
        for c in coeffs:
            if c == 0:
                m += 1
            else:
                break
        return m
    vals = [abs(complex(c)) for c in coeffs]
    scale = max(vals, default=0.0)
    tol = TAYLOR_ZERO_TOL * max(scale, 1e-300)
    m = 0
    for v in vals:
        if v <= tol:
            m += 1
        else:
            break
    return m


@dataclass(frozen=True)
class MultiplicityReport:
    point_multiplicity: int
    along_direction: int
    along_direction_minus_point: int
    agree: bool


def check_multiplicity_lemma(f: MultiPoly, e, x) -> MultiplicityReport:
    """Compare the Taylor order at x with the t=0 root multiplicities of
    f(x + t e) and f(x + t (e - x)); they must coincide for hyperbolic f."""
    e = list(e)
    x = list(x)
    m = multiplicity_at(f, x)
    r1 = restrict_to_line(f, x, e)
    m1 = _root_multiplicity_at_zero(r1, f.domain)
    emx = [a - b for a, b in zip(e, x)]
    r2 = restrict_to_line(f, x, emx)
    m2 = _root_multiplicity_at_zero(r2, f.domain)
    return MultiplicityReport(m, m1, m2, m == m1 == m2)


# ---------------------------------------------------------------------------
# serialization


def poly_pretty(f: MultiPoly) -> str:
    """Human-readable one-liner, terms in descending exponent order.

    "x0^3 + x0^2*x3 - 2*x0*x1^2"; unit coefficients are suppressed in
    front of variables, rationals print as p/q, floats at 12 digits.
    """
    pieces = []
    for exp in sorted(f.terms, reverse=True):
        c = f.terms[exp]
        if f.domain == EXACT:
            re = getattr(c, "re", c)
            im = getattr(c, "im", Fraction(0))
            if re == 0 and im == 0:
                continue
            if im == 0:
                neg = re < 0
                mag = rational_str(abs(re))
            else:
                neg = False
                mag = f"({rational_str(re)}{'+' if im >= 0 else '-'}{rational_str(abs(im))}i)"
        else:
            cv = complex(c)
            if abs(cv) == 0.0:
                continue
            if cv.imag == 0.0:
                neg = cv.real < 0
                mag = f"{abs(cv.real):.12g}"
            else:
                neg = False
                mag = f"({cv.real:.12g}{cv.imag:+.12g}i)"
        vars_part = "*".join(
            f"x{j}" if p == 1 else f"x{j}^{p}"
            for j, p in enumerate(exp)
            if p > 0
        )
        if not vars_part:
            body = mag
        elif mag == "1":
            body = vars_part
        else:
            body = f"{mag}*{vars_part}"
        if not pieces:
            pieces.append(("-" if neg else "") + body)
        else:
            pieces.append(("- " if neg else "+ ") + body)
    return " ".join(pieces) if pieces else "0"


def poly_to_json(f: MultiPoly) -> str:
    terms = []
    for exp in sorted(f.terms, reverse=True):
        c = f.terms[exp]
        coeff = rational_str(c) if f.domain == EXACT else float(c)
        terms.append({"exp": list(exp), "coeff": coeff})
    doc = {
        "vars": [f"x{j}" for j in range(f.nvars)],
        "degree": f.degree,
        "terms": terms,
    }
    return json.dumps(doc, sort_keys=True)


def poly_from_json(text) -> MultiPoly:
    doc = json.loads(text) if isinstance(text, str) else text
    try:
        nvars = len(doc["vars"])
        degree = int(doc["degree"])
        raw = doc["terms"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed polynomial document: {exc}") from exc
    exact = all(
        isinstance(t.get("coeff"), str)
        or isinstance(t.get("coeff"), int)
        for t in raw
    )
    terms = {}
    for t in raw:
        exp = tuple(int(v) for v in t["exp"])
        c = parse_rational(t["coeff"]) if exact else float(t["coeff"])
        terms[exp] = terms.get(exp, 0) + c
    return MultiPoly(nvars, degree, terms, EXACT if exact else FLOAT)
