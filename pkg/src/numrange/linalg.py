"""Hermitian matrix types, a complex Jacobi eigensolver, and state sampling.

Two scalar domains run through the package: exact Gaussian rationals for
small pencils whose determinants must come out with integer coefficients,
and complex floats for everything numerical.  Conversion between the two
is always explicit, never silent.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

EXACT = "exact"
FLOAT = "float"

# Relative asymmetry allowed by the HermitianMatrix constructor.
HERMITIAN_CONSTRUCT_TOL = 1e-12
# Looser gate applied by the eigensolver to raw arrays.
HERMITIAN_EIG_TOL = 1e-8
# Off-diagonal Frobenius threshold for Jacobi convergence.
JACOBI_OFF_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100
# Eigenvalues closer than this (relative) are grouped as one multiplicity.
MULTIPLICITY_TOL = 1e-8


class LinalgError(Exception):
    """Base class for errors raised by this module."""


class NonHermitianInput(LinalgError):
    """Input matrix is not conjugate symmetric within tolerance."""


class ConvergenceFailure(LinalgError):
    """Jacobi sweeps exhausted before the off-diagonal mass vanished."""


class DimensionMismatch(LinalgError):
    """Operands have incompatible shapes."""


class GaussianRational:
    """Complex number with Fraction real and imaginary parts.

    Immutable.  Arithmetic stays exact; `to_complex` is the only exit
    into floats.
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def is_real(self) -> bool:
        return self.im == 0

    def to_complex(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({self.re!r}, {self.im!r})"


def _coerce(x):
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, (int, Fraction)):
        return GaussianRational(x)
    return NotImplemented


def rational_str(x: Fraction) -> str:
    """Reduced fraction as a string, '3' or '-2/7'."""
    return str(Fraction(x))


def parse_rational(s) -> Fraction:
    """Accept 'p/q' strings, plain integers, or integer-valued floats."""
    if isinstance(s, str):
        return Fraction(s)
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, float) and s == int(s):
        return Fraction(int(s))
    raise ValueError(f"not an exact rational: {s!r}")


class HermitianMatrix:
    """Square conjugate-symmetric matrix in either scalar domain.

    Float data lives in a read-only complex ndarray; exact data is a
    tuple of tuples of GaussianRational.  The constructor rejects input
    whose asymmetry exceeds 1e-12 relative to the Frobenius norm.
    """

    __slots__ = ("data", "dim", "domain")

    def __init__(self, data, domain: str = FLOAT):
        if domain == FLOAT:
            a = np.asarray(data, dtype=complex)
            if a.ndim != 2 or a.shape[0] != a.shape[1]:
                raise DimensionMismatch(f"expected square matrix, got shape {a.shape}")
            fro = float(np.linalg.norm(a))
            asym = float(np.linalg.norm(a - a.conj().T))
            if asym > HERMITIAN_CONSTRUCT_TOL * max(fro, 1e-300):
                raise NonHermitianInput(
                    f"asymmetry {asym:.3e} exceeds {HERMITIAN_CONSTRUCT_TOL:g} * |A|"
                )
            a = a.copy()
            a.flags.writeable = False
            object.__setattr__(self, "data", a)
            object.__setattr__(self, "dim", a.shape[0])
        elif domain == EXACT:
            rows = tuple(tuple(_as_gaussian(v) for v in row) for row in data)
            d = len(rows)
            if any(len(r) != d for r in rows):
                raise DimensionMismatch("ragged exact matrix")
            for j in range(d):
                for k in range(j, d):
                    if rows[j][k] != rows[k][j].conjugate():
                        raise NonHermitianInput(
                            f"exact entries ({j},{k}) and ({k},{j}) are not conjugate"
                        )
            object.__setattr__(self, "data", rows)
            object.__setattr__(self, "dim", d)
        else:
            raise ValueError(f"unknown domain {domain!r}")
        object.__setattr__(self, "domain", domain)

    def __setattr__(self, name, value):
        raise AttributeError("HermitianMatrix is immutable")

    def to_float(self) -> "HermitianMatrix":
        if self.domain == FLOAT:
            return self
        arr = np.array(
            [[v.to_complex() for v in row] for row in self.data], dtype=complex
        )
        return HermitianMatrix(arr, FLOAT)

    def as_array(self) -> np.ndarray:
        return self.to_float().data

    def frobenius(self) -> float:
        return float(np.linalg.norm(self.as_array()))

    def __eq__(self, other):
        if not isinstance(other, HermitianMatrix):
            return NotImplemented
        if self.domain != other.domain or self.dim != other.dim:
            return False
        if self.domain == EXACT:
            return self.data == other.data
        return bool(np.array_equal(self.data, other.data))

    def __repr__(self):
        return f"HermitianMatrix(dim={self.dim}, domain={self.domain!r})"


def _as_gaussian(v) -> GaussianRational:
    if isinstance(v, GaussianRational):
        return v
    if isinstance(v, (int, Fraction)):
        return GaussianRational(v)
    if isinstance(v, complex):
        re, im = v.real, v.imag
        if re != int(re) or im != int(im):
            raise ValueError(f"non-integral complex {v} cannot enter the exact domain")
        return GaussianRational(int(re), int(im))
    raise ValueError(f"cannot treat {v!r} as a Gaussian rational")


class MatrixPencil:
    """Tuple (A_1, ..., A_n) of d x d Hermitian matrices, one domain.

    The induced degree-d form is det(x_0 I + x_1 A_1 + ... + x_n A_n);
    everything downstream (tracing, cones, duals) consumes this object.
    """

    __slots__ = ("matrices", "d", "n", "domain", "_stack")

    def __init__(self, matrices):
        mats = tuple(matrices)
        if not mats:
            raise DimensionMismatch("pencil needs at least one matrix")
        if not all(isinstance(m, HermitianMatrix) for m in mats):
            raise TypeError("pencil entries must be HermitianMatrix")
        d = mats[0].dim
        domain = mats[0].domain
        if any(m.dim != d for m in mats):
            raise DimensionMismatch("pencil matrices differ in dimension")
        if any(m.domain != domain for m in mats):
            raise ValueError("pencil matrices mix scalar domains")
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "n", len(mats))
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "_stack", None)

    def __setattr__(self, name, value):
        raise AttributeError("MatrixPencil is immutable")

    def to_float(self) -> "MatrixPencil":
        if self.domain == FLOAT:
            return self
        return MatrixPencil([m.to_float() for m in self.matrices])

    def stack(self) -> np.ndarray:
        """(n, d, d) complex array of the coefficient matrices."""
        if self._stack is None:
            arr = np.stack([m.as_array() for m in self.matrices])
            arr.flags.writeable = False
            object.__setattr__(self, "_stack", arr)
        return self._stack

    def combine(self, u) -> np.ndarray:
        """Real combination u_1 A_1 + ... + u_n A_n as a complex array."""
        u = np.asarray(u, dtype=float)
        if u.shape != (self.n,):
            raise DimensionMismatch(f"direction length {u.shape} vs n={self.n}")
        return np.tensordot(u, self.stack(), axes=1)

    def norm(self) -> float:
        """Root of the summed squared Frobenius norms."""
        return float(math.sqrt(sum(m.frobenius() ** 2 for m in self.matrices)))

    def __repr__(self):
        return f"MatrixPencil(d={self.d}, n={self.n}, domain={self.domain!r})"


@dataclass(frozen=True)
class EigenSystem:
    """Ascending eigenvalues with matching orthonormal eigenvector columns.

    `groups` partitions the index range into runs of eigenvalues equal
    within 1e-8 * (1 + |A|_F); an index is simple when its group is a
    singleton.
    """

    values: np.ndarray
    vectors: np.ndarray
    groups: tuple = field(default_factory=tuple)
    sweeps: int = 0

    def simple(self, k: int) -> bool:
        for g in self.groups:
            if k in g:
                return len(g) == 1
        raise IndexError(k)

    @property
    def dim(self) -> int:
        return len(self.values)


def _group_close(values, tol: float):
    groups = []
    current = [0]
    for k in range(1, len(values)):
        if values[k] - values[k - 1] <= tol:
            current.append(k)
        else:
            groups.append(tuple(current))
            current = [k]
    groups.append(tuple(current))
    return tuple(groups)


def jacobi_eigh(a_rows: list, d: int):
    """Cyclic complex Jacobi iteration on a list-of-lists Hermitian matrix.

    Returns (values list, vector columns list-of-lists, sweeps used).
    Raises ConvergenceFailure after 100 full sweeps.  The input list is
    consumed destructively.
    """
    if d == 1:
        return [a_rows[0][0].real], [[1.0 + 0j]], 0
    a = a_rows
    fro2 = 0.0
    for j in range(d):
        row = a[j]
        for k in range(d):
            v = row[k]
            fro2 += v.real * v.real + v.imag * v.imag
    threshold = JACOBI_OFF_TOL * math.sqrt(fro2)
    v = [[1.0 + 0j if i == j else 0.0 + 0j for j in range(d)] for i in range(d)]
    sweeps = 0
    for sweep in range(JACOBI_MAX_SWEEPS):
        off2 = 0.0
        for p in range(d - 1):
            row = a[p]
            for q in range(p + 1, d):
                x = row[q]
                off2 += x.real * x.real + x.imag * x.imag
        if math.sqrt(2.0 * off2) <= threshold:
            sweeps = sweep
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p][q]
                m = abs(apq)
                if m <= 1e-300:
                    continue
                w = apq / m
                wc = w.conjugate()
                tau = (a[q][q].real - a[p][p].real) / (2.0 * m)
                # small-magnitude root of t^2 - 2 tau t - 1 = 0, formed
                # without cancellation for large |tau|
                if abs(tau) > 1e150:
                    t = -0.5 / tau
                else:
                    t = -math.copysign(1.0, tau) / (
                        abs(tau) + math.sqrt(1.0 + tau * tau)
                    )
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                swc = s * wc
                sw = s * w
                for i in range(d):
                    rowi = a[i]
                    aip = rowi[p]
                    aiq = rowi[q]
                    rowi[p] = c * aip + swc * aiq
                    rowi[q] = c * aiq - sw * aip
                rp = a[p]
                rq = a[q]
                for j in range(d):
                    apj = rp[j]
                    aqj = rq[j]
                    rp[j] = c * apj + sw * aqj
                    rq[j] = c * aqj - swc * apj
                # clamp roundoff drift on the zeroed pair
                rp[q] = 0.0 + 0j
                rq[p] = 0.0 + 0j
                rp[p] = complex(rp[p].real, 0.0)
                rq[q] = complex(rq[q].real, 0.0)
                for i in range(d):
                    rowi = v[i]
                    vip = rowi[p]
                    viq = rowi[q]
                    rowi[p] = c * vip + swc * viq
                    rowi[q] = c * viq - sw * vip
        else:
            continue
        break
    else:
        raise ConvergenceFailure(
            f"off-diagonal mass above threshold after {JACOBI_MAX_SWEEPS} sweeps"
        )
    values = [a[j][j].real for j in range(d)]
    return values, v, sweeps


def eig_hermitian(matrix) -> EigenSystem:
    """Full eigensystem of a Hermitian matrix via cyclic Jacobi rotations.

    Accepts a HermitianMatrix or a raw complex array.  Raw input may be
    asymmetric up to 1e-8 relative; it is symmetrized before iterating.
    """
    if isinstance(matrix, HermitianMatrix):
        arr = matrix.as_array()
    else:
        arr = np.asarray(matrix, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionMismatch(f"expected square matrix, got shape {arr.shape}")
        fro = float(np.linalg.norm(arr))
        asym = float(np.linalg.norm(arr - arr.conj().T))
        if asym > HERMITIAN_EIG_TOL * max(fro, 1e-300):
            raise NonHermitianInput(
                f"asymmetry {asym:.3e} exceeds {HERMITIAN_EIG_TOL:g} * |A|"
            )
        arr = 0.5 * (arr + arr.conj().T)
    d = arr.shape[0]
    rows = [[complex(arr[j, k]) for k in range(d)] for j in range(d)]
    values, vectors, sweeps = jacobi_eigh(rows, d)
    order = sorted(range(d), key=lambda k: values[k])
    vals = np.array([values[k] for k in order], dtype=float)
    vecs = np.array(
        [[vectors[i][k] for k in order] for i in range(d)], dtype=complex
    )
    fro = float(np.linalg.norm(arr))
    groups = _group_close(vals, MULTIPLICITY_TOL * (1.0 + fro))
    return EigenSystem(values=vals, vectors=vecs, groups=groups, sweeps=sweeps)


def pairing(a, b):
    """Hilbert-Schmidt pairing tr(A B) of two Hermitian matrices.

    Real for Hermitian operands; returned as a float in the float
    domain and as a Fraction in the exact domain.
    """
    if isinstance(a, HermitianMatrix) and isinstance(b, HermitianMatrix):
        if a.dim != b.dim:
            raise DimensionMismatch(f"dims {a.dim} vs {b.dim}")
        if a.domain == EXACT and b.domain == EXACT:
            total = GaussianRational(0)
            for j in range(a.dim):
                for k in range(a.dim):
                    total = total + a.data[j][k] * b.data[k][j]
            if not total.is_real():
                raise NonHermitianInput("exact pairing came out complex")
            return total.re
        am, bm = a.as_array(), b.as_array()
    else:
        am = a.as_array() if isinstance(a, HermitianMatrix) else np.asarray(a, dtype=complex)
        bm = b.as_array() if isinstance(b, HermitianMatrix) else np.asarray(b, dtype=complex)
        if am.shape != bm.shape:
            raise DimensionMismatch(f"shapes {am.shape} vs {bm.shape}")
    return float(np.real(np.sum(am * bm.T)))


class DensityMatrix(HermitianMatrix):
    """Positive semidefinite Hermitian matrix of unit trace (float domain)."""

    __slots__ = ()

    def __init__(self, data):
        super().__init__(data, FLOAT)
        tr = float(np.real(np.trace(self.data)))
        if abs(tr - 1.0) > 1e-10:
            raise ValueError(f"trace {tr} is not 1 within 1e-10")
        eig = eig_hermitian(self)
        if eig.values[0] < -1e-10:
            raise ValueError(f"negative eigenvalue {eig.values[0]:.3e}")

    def expectations(self, pencil: MatrixPencil) -> np.ndarray:
        """The point (<rho, A_1>, ..., <rho, A_n>) of the joint range."""
        return np.array(
            [pairing(self, m) for m in pencil.to_float().matrices], dtype=float
        )


def as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def sample_pure_state(d: int, rng=None) -> DensityMatrix:
    """Rank-one projector psi psi* with psi complex Gaussian, normalized."""
    g = as_rng(rng)
    psi = g.standard_normal(d) + 1j * g.standard_normal(d)
    psi = psi / np.linalg.norm(psi)
    return DensityMatrix(np.outer(psi, psi.conj()))


def sample_mixed_state(d: int, rng=None) -> DensityMatrix:
    """G G* / tr(G G*) for a complex Gaussian square G (full rank a.s.)."""
    g = as_rng(rng)
    G = g.standard_normal((d, d)) + 1j * g.standard_normal((d, d))
    P = G @ G.conj().T
    return DensityMatrix(P / np.real(np.trace(P)))


# ---------------------------------------------------------------------------
# pencil serialization


def _entry_to_json(v, domain: str):
    if domain == EXACT:
        return [rational_str(v.re), rational_str(v.im)]
    return [float(v.real), float(v.imag)]


def pencil_to_json(pencil: MatrixPencil) -> str:
    """Serialize a pencil: {"d":., "n":., "matrices":[ d x d x [re, im] ]}."""
    mats = []
    for m in pencil.matrices:
        if pencil.domain == EXACT:
            rows = [
                [_entry_to_json(v, EXACT) for v in row] for row in m.data
            ]
        else:
            rows = [
                [_entry_to_json(m.data[j, k], FLOAT) for k in range(pencil.d)]
                for j in range(pencil.d)
            ]
        mats.append(rows)
    doc = {"d": pencil.d, "n": pencil.n, "matrices": mats}
    return json.dumps(doc, sort_keys=True)


def pencil_from_json(text) -> MatrixPencil:
    """Parse the pencil schema; picks the exact domain when every entry
    is a rational string or an integer, floats otherwise."""
    doc = json.loads(text) if isinstance(text, str) else text
    try:
        d = int(doc["d"])
        n = int(doc["n"])
        mats = doc["matrices"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed pencil document: {exc}") from exc
    if len(mats) != n:
        raise ValueError(f"expected {n} matrices, found {len(mats)}")
    exact = True
    for m in mats:
        if len(m) != d or any(len(row) != d for row in m):
            raise ValueError("matrix block is not d x d")
        for row in m:
            for entry in row:
                if not (isinstance(entry, (list, tuple)) and len(entry) == 2):
                    raise ValueError(f"entry {entry!r} is not an [re, im] pair")
                for part in entry:
                    if isinstance(part, str):
                        continue
                    if isinstance(part, int) or (
                        isinstance(part, float) and part == int(part)
                    ):
                        continue
                    exact = False
    out = []
    for m in mats:
        if exact:
            rows = [
                [
                    GaussianRational(parse_rational(e[0]), parse_rational(e[1]))
                    for e in row
                ]
                for row in m
            ]
            out.append(HermitianMatrix(rows, EXACT))
        else:
            arr = np.array(
                [[complex(float(e[0]), float(e[1])) for e in row] for row in m]
            )
            out.append(HermitianMatrix(arr, FLOAT))
    return MatrixPencil(out)
