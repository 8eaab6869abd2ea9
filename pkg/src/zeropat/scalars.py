"""Uniform scalar arithmetic over the rationals, reals, complexes and quaternions.

All matrices in this package carry entries from one of four scalar systems.
Rational scalars are exact (``fractions.Fraction``); the three floating systems
are represented by float components.  Quaternions are stored as four reals
(a, b, c, d) meaning a + bi + cj + dk; there is no polar form, phases are
handled by explicit unit-quaternion multiplication.
"""

from __future__ import annotations

import enum
import math
from fractions import Fraction

import numpy as np

# Tolerance for "is real" / "is zero" checks in pure-arithmetic identities.
ARITH_TOL = 1e-12
# Looser tolerance for solver-facing checks, where optimization residual dominates.
SOLVER_TOL = 1e-9


class Field(enum.Enum):
    """The four scalar systems, ordered by inclusion."""

    RATIONAL = "RAT"
    REAL = "REAL"
    COMPLEX = "COMPLEX"
    QUATERNION = "QUAT"

    @property
    def order(self) -> int:
        return _FIELD_ORDER[self]

    @property
    def ncomp(self) -> int:
        """Number of real components of one scalar (floating fields only)."""
        if self is Field.RATIONAL:
            raise ValueError("rational scalars have no float component layout")
        return {Field.REAL: 1, Field.COMPLEX: 2, Field.QUATERNION: 4}[self]

    def __lt__(self, other):
        if not isinstance(other, Field):
            return NotImplemented
        return self.order < other.order

    def __le__(self, other):
        if not isinstance(other, Field):
            return NotImplemented
        return self.order <= other.order


_FIELD_ORDER = {
    Field.RATIONAL: 0,
    Field.REAL: 1,
    Field.COMPLEX: 2,
    Field.QUATERNION: 3,
}


def field_from_tag(tag: str) -> Field:
    for f in Field:
        if f.value == tag:
            return f
    raise ValueError(f"unknown field tag {tag!r}")


def _qmul(p, q):
    """Hamilton product of two (a, b, c, d) tuples."""
    a0, b0, c0, d0 = p
    a1, b1, c1, d1 = q
    return (
        a0 * a1 - b0 * b1 - c0 * c1 - d0 * d1,
        a0 * b1 + b0 * a1 + c0 * d1 - d0 * c1,
        a0 * c1 - b0 * d1 + c0 * a1 + d0 * b1,
        a0 * d1 + b0 * c1 - c0 * b1 + d0 * a1,
    )


class Scalar:
    """A tagged scalar value.

    ``value`` is a Fraction (RATIONAL), float (REAL), complex (COMPLEX) or a
    4-tuple of floats (QUATERNION).  Scalars are immutable; all operations
    return new values and require matching tags.
    """

    __slots__ = ("tag", "value")

    def __init__(self, tag: Field, value):
        if tag is Field.RATIONAL:
            value = Fraction(value)
        elif tag is Field.REAL:
            value = float(value)
        elif tag is Field.COMPLEX:
            value = complex(value)
        elif tag is Field.QUATERNION:
            a, b, c, d = value
            value = (float(a), float(b), float(c), float(d))
        object.__setattr__(self, "tag", tag)
        object.__setattr__(self, "value", value)

    def __setattr__(self, name, value):
        raise AttributeError("Scalar is immutable")

    def __reduce__(self):
        return (Scalar, (self.tag, self.value))

    # ---- constructors ----

    @staticmethod
    def rational(p, q=1) -> "Scalar":
        return Scalar(Field.RATIONAL, Fraction(p, q))

    @staticmethod
    def real(x) -> "Scalar":
        return Scalar(Field.REAL, x)

    @staticmethod
    def cplx(re, im=0.0) -> "Scalar":
        return Scalar(Field.COMPLEX, complex(re, im))

    @staticmethod
    def quat(a, b=0.0, c=0.0, d=0.0) -> "Scalar":
        return Scalar(Field.QUATERNION, (a, b, c, d))

    @staticmethod
    def zero(tag: Field) -> "Scalar":
        return Scalar.one(tag) - Scalar.one(tag)

    @staticmethod
    def one(tag: Field) -> "Scalar":
        if tag is Field.RATIONAL:
            return Scalar.rational(1)
        if tag is Field.REAL:
            return Scalar.real(1.0)
        if tag is Field.COMPLEX:
            return Scalar.cplx(1.0)
        return Scalar.quat(1.0)

    # ---- arithmetic ----

    def _check(self, other: "Scalar"):
        if not isinstance(other, Scalar):
            raise TypeError(f"expected Scalar, got {type(other).__name__}")
        if other.tag is not self.tag:
            raise ValueError(f"scalar tag mismatch: {self.tag.value} vs {other.tag.value}")

    def __add__(self, other):
        self._check(other)
        if self.tag is Field.QUATERNION:
            return Scalar(self.tag, tuple(x + y for x, y in zip(self.value, other.value)))
        return Scalar(self.tag, self.value + other.value)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        if self.tag is Field.QUATERNION:
            return Scalar(self.tag, tuple(-x for x in self.value))
        return Scalar(self.tag, -self.value)

    def __mul__(self, other):
        self._check(other)
        if self.tag is Field.QUATERNION:
            return Scalar(self.tag, _qmul(self.value, other.value))
        return Scalar(self.tag, self.value * other.value)

    def conjugate(self) -> "Scalar":
        if self.tag in (Field.RATIONAL, Field.REAL):
            return self
        if self.tag is Field.COMPLEX:
            return Scalar(self.tag, self.value.conjugate())
        a, b, c, d = self.value
        return Scalar(self.tag, (a, -b, -c, -d))

    def inverse(self) -> "Scalar":
        m2 = self.magnitude_squared()
        if (m2 == 0) if self.tag is Field.RATIONAL else (m2 == 0.0):
            raise ZeroDivisionError("inverse of zero scalar")
        if self.tag is Field.RATIONAL:
            return Scalar(self.tag, 1 / self.value)
        if self.tag is Field.REAL:
            return Scalar(self.tag, 1.0 / self.value)
        if self.tag is Field.COMPLEX:
            return Scalar(self.tag, 1.0 / self.value)
        a, b, c, d = self.value
        return Scalar(self.tag, (a / m2, -b / m2, -c / m2, -d / m2))

    def magnitude_squared(self):
        if self.tag is Field.RATIONAL:
            return self.value * self.value
        if self.tag is Field.REAL:
            return self.value * self.value
        if self.tag is Field.COMPLEX:
            return self.value.real**2 + self.value.imag**2
        return sum(x * x for x in self.value)

    def magnitude(self):
        """Magnitude; exact Fraction for RATIONAL, float otherwise."""
        if self.tag is Field.RATIONAL:
            return abs(self.value)
        return math.sqrt(self.magnitude_squared())

    def real_part(self) -> float:
        if self.tag is Field.RATIONAL:
            return self.value
        if self.tag is Field.REAL:
            return self.value
        if self.tag is Field.COMPLEX:
            return self.value.real
        return self.value[0]

    def is_zero(self, tol=ARITH_TOL) -> bool:
        if self.tag is Field.RATIONAL:
            return self.value == 0
        return self.magnitude() <= tol

    def is_real(self, tol=ARITH_TOL) -> bool:
        if self.tag in (Field.RATIONAL, Field.REAL):
            return True
        if self.tag is Field.COMPLEX:
            return abs(self.value.imag) <= tol
        return all(abs(x) <= tol for x in self.value[1:])

    def to_real(self) -> "Scalar":
        """Explicit lossy cast of a RATIONAL scalar to REAL.

        Rounds to the nearest double (ties to even, IEEE-754 default).
        """
        if self.tag is not Field.RATIONAL:
            raise ValueError("to_real applies to RATIONAL scalars only")
        return Scalar.real(float(self.value))

    # ---- JSON encoding ----

    def to_json(self):
        if self.tag is Field.RATIONAL:
            return {"q": str(self.value)}
        if self.tag is Field.REAL:
            return self.value
        if self.tag is Field.COMPLEX:
            return [self.value.real, self.value.imag]
        return list(self.value)

    @staticmethod
    def from_json(tag: Field, obj) -> "Scalar":
        if tag is Field.RATIONAL:
            if not isinstance(obj, dict) or "q" not in obj:
                raise ValueError("RAT scalar must be encoded as {'q': 'p/q'}")
            return Scalar.rational(Fraction(obj["q"]))
        if tag is Field.REAL:
            return Scalar.real(obj)
        if tag is Field.COMPLEX:
            re, im = obj
            return Scalar.cplx(re, im)
        a, b, c, d = obj
        return Scalar.quat(a, b, c, d)

    # ---- comparison / repr ----

    def __eq__(self, other):
        return isinstance(other, Scalar) and self.tag is other.tag and self.value == other.value

    def __hash__(self):
        return hash((self.tag, self.value))

    def __repr__(self):
        return f"Scalar({self.tag.value}, {self.value!r})"


def inner_product(u, v) -> Scalar:
    """Inner product sum_i conjugate(u_i) * v_i, conjugation on the left.

    The factor order is preserved, which matters over the quaternions.
    """
    u = list(u)
    v = list(v)
    if len(u) != len(v):
        raise ValueError(f"length mismatch: {len(u)} vs {len(v)}")
    if not u:
        raise ValueError("empty vectors")
    tag = u[0].tag
    for s in u + v:
        if s.tag is not tag:
            raise ValueError("mixed scalar tags in inner product")
    acc = Scalar.zero(tag)
    for a, b in zip(u, v):
        acc = acc + a.conjugate() * b
    return acc


# ---------------------------------------------------------------------------
# Component-array helpers.  Floating-field matrices can be viewed as float64
# arrays of shape (..., ncomp); these routines implement the algebra on that
# layout and back the numerical solver.
# ---------------------------------------------------------------------------


def _build_mult_table(ncomp: int) -> np.ndarray:
    """Structure constants Q[a, b, g]: e_a * e_b = sum_g Q[a, b, g] e_g."""
    q = np.zeros((ncomp, ncomp, ncomp))
    if ncomp == 1:
        q[0, 0, 0] = 1.0
        return q
    if ncomp == 2:
        q[0, 0, 0] = 1.0
        q[0, 1, 1] = 1.0
        q[1, 0, 1] = 1.0
        q[1, 1, 0] = -1.0
        return q
    basis = np.eye(4)
    for a in range(4):
        for b in range(4):
            q[a, b, :] = _qmul(tuple(basis[a]), tuple(basis[b]))
    return q


MULT_TABLE = {n: _build_mult_table(n) for n in (1, 2, 4)}


def comp_conj(arr: np.ndarray) -> np.ndarray:
    out = arr.copy()
    out[..., 1:] = -out[..., 1:]
    return out


def comp_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise product of component arrays (broadcasting)."""
    q = MULT_TABLE[a.shape[-1]]
    return np.einsum("...a,...b,abg->...g", a, b, q, optimize=True)


def comp_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product of (r, k, n) and (k, c, n) component arrays."""
    q = MULT_TABLE[a.shape[-1]]
    return np.einsum("ija,jkb,abg->ikg", a, b, q, optimize=True)


def comp_gram(a: np.ndarray) -> np.ndarray:
    """Gram matrix conj(A)^T A of a (r, c, n) component array, shape (c, c, n)."""
    q = MULT_TABLE[a.shape[-1]]
    return np.einsum("ija,ikb,abg->jkg", comp_conj(a), a, q, optimize=True)


def comp_abs(arr: np.ndarray) -> np.ndarray:
    """Entrywise magnitudes of a component array, dropping the last axis."""
    return np.sqrt(np.sum(arr * arr, axis=-1))


def _left_mult_tensor() -> np.ndarray:
    """L[g] = real 4x4 matrix of left multiplication by basis quaternion e_g."""
    out = np.zeros((4, 4, 4))
    basis = np.eye(4)
    for g in range(4):
        for b in range(4):
            out[g, :, b] = _qmul(tuple(basis[g]), tuple(basis[b]))
    return out


_LEFT_MULT = _left_mult_tensor()


def realify(arr: np.ndarray) -> np.ndarray:
    """Expand a quaternion (r, c, 4) array into its real (4r, 4c) block matrix.

    The map is an algebra homomorphism with realify(A)^T = realify(conj(A)^T),
    so real BLAS matmuls implement quaternionic products.
    """
    r, c, _ = arr.shape
    return np.einsum("mjg,gab->majb", arr, _LEFT_MULT, optimize=True).reshape(4 * r, 4 * c)


def unrealify(block: np.ndarray) -> np.ndarray:
    """Inverse of realify on images of quaternion matrices (reads block column 0)."""
    r4, c4 = block.shape
    r, c = r4 // 4, c4 // 4
    return np.ascontiguousarray(block.reshape(r, 4, c, 4)[:, :, :, 0].transpose(0, 2, 1))


def fast_gram(A: np.ndarray) -> np.ndarray:
    """comp_gram via BLAS: (r, c, n) -> (c, c, n)."""
    n = A.shape[-1]
    if n == 1:
        g = A[:, :, 0].T @ A[:, :, 0]
        return g[:, :, None].copy()
    if n == 2:
        ac = A[..., 0] + 1j * A[..., 1]
        g = ac.conj().T @ ac
        return np.stack([g.real, g.imag], axis=-1)
    R = realify(A)
    return unrealify(R.T @ R)


def fast_matmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """comp_matmul via BLAS: (r, k, n) @ (k, c, n) -> (r, c, n)."""
    n = A.shape[-1]
    if n == 1:
        return (A[:, :, 0] @ B[:, :, 0])[:, :, None].copy()
    if n == 2:
        ac = A[..., 0] + 1j * A[..., 1]
        bc = B[..., 0] + 1j * B[..., 1]
        g = ac @ bc
        return np.stack([g.real, g.imag], axis=-1)
    return unrealify(realify(A) @ realify(B))


# ---------------------------------------------------------------------------
# Matrices
# ---------------------------------------------------------------------------


class RepMatrix:
    """A rectangular matrix over one of the four scalar systems.

    Internal storage: Fraction object array (RATIONAL), float64 (REAL),
    complex128 (COMPLEX), or float64 with trailing component axis
    (QUATERNION).  Treat instances as immutable values.
    """

    def __init__(self, tag: Field, data: np.ndarray):
        self.tag = tag
        if tag is Field.RATIONAL:
            data = np.asarray(data, dtype=object)
            if data.ndim != 2:
                raise ValueError("rational matrix data must be 2-d")
        elif tag is Field.REAL:
            data = np.asarray(data, dtype=float)
            if data.ndim != 2:
                raise ValueError("real matrix data must be 2-d")
        elif tag is Field.COMPLEX:
            data = np.asarray(data, dtype=complex)
            if data.ndim != 2:
                raise ValueError("complex matrix data must be 2-d")
        else:
            data = np.asarray(data, dtype=float)
            if data.ndim != 3 or data.shape[-1] != 4:
                raise ValueError("quaternion matrix data must have shape (r, c, 4)")
        self.data = data

    # ---- shape ----

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    # ---- constructors ----

    @staticmethod
    def zeros(tag: Field, rows: int, cols: int) -> "RepMatrix":
        if tag is Field.RATIONAL:
            data = np.full((rows, cols), Fraction(0), dtype=object)
        elif tag is Field.REAL:
            data = np.zeros((rows, cols))
        elif tag is Field.COMPLEX:
            data = np.zeros((rows, cols), dtype=complex)
        else:
            data = np.zeros((rows, cols, 4))
        return RepMatrix(tag, data)

    @staticmethod
    def identity(tag: Field, n: int) -> "RepMatrix":
        m = RepMatrix.zeros(tag, n, n)
        one = Scalar.one(tag)
        for i in range(n):
            m = m.with_entry(i, i, one)
        return m

    @staticmethod
    def from_scalars(rows_of_scalars) -> "RepMatrix":
        rows = [list(r) for r in rows_of_scalars]
        if not rows or not rows[0]:
            raise ValueError("matrix must have at least one row and one column")
        tag = rows[0][0].tag
        m = RepMatrix.zeros(tag, len(rows), len(rows[0]))
        for i, r in enumerate(rows):
            if len(r) != len(rows[0]):
                raise ValueError("ragged rows")
            for j, s in enumerate(r):
                if s.tag is not tag:
                    raise ValueError("mixed scalar tags in matrix")
                m = m.with_entry(i, j, s)
        return m

    def copy(self) -> "RepMatrix":
        return RepMatrix(self.tag, self.data.copy())

    # ---- entry access ----

    def entry(self, i: int, j: int) -> Scalar:
        if self.tag is Field.QUATERNION:
            return Scalar(self.tag, tuple(self.data[i, j]))
        return Scalar(self.tag, self.data[i, j])

    def with_entry(self, i: int, j: int, s: Scalar) -> "RepMatrix":
        if s.tag is not self.tag:
            raise ValueError("scalar tag mismatch")
        data = self.data.copy()
        if self.tag is Field.QUATERNION:
            data[i, j, :] = s.value
        else:
            data[i, j] = s.value
        return RepMatrix(self.tag, data)

    def column(self, j: int):
        return [self.entry(i, j) for i in range(self.rows)]

    # ---- algebra ----

    def conj_transpose(self) -> "RepMatrix":
        if self.tag in (Field.RATIONAL, Field.REAL):
            return RepMatrix(self.tag, self.data.T.copy())
        if self.tag is Field.COMPLEX:
            return RepMatrix(self.tag, self.data.conj().T.copy())
        return RepMatrix(self.tag, comp_conj(self.data).transpose(1, 0, 2).copy())

    def matmul(self, other: "RepMatrix") -> "RepMatrix":
        if other.tag is not self.tag:
            raise ValueError("matrix tag mismatch")
        if self.cols != other.rows:
            raise ValueError("inner dimension mismatch")
        if self.tag is Field.QUATERNION:
            return RepMatrix(self.tag, comp_matmul(self.data, other.data))
        return RepMatrix(self.tag, self.data @ other.data)

    def gram(self) -> "RepMatrix":
        """conj(A)^T A; columns are orthogonal iff this is diagonal."""
        return self.conj_transpose().matmul(self)

    def scaled(self, s: Scalar) -> "RepMatrix":
        """Left scalar multiple s * A."""
        if s.tag is not self.tag:
            raise ValueError("scalar tag mismatch")
        if self.tag is Field.QUATERNION:
            sv = np.asarray(s.value)
            return RepMatrix(self.tag, comp_mul(np.broadcast_to(sv, self.data.shape), self.data))
        return RepMatrix(self.tag, s.value * self.data)

    def magnitudes(self) -> np.ndarray:
        """(rows, cols) array of entry magnitudes (Fractions for RATIONAL)."""
        if self.tag is Field.RATIONAL:
            return np.vectorize(abs, otypes=[object])(self.data)
        if self.tag is Field.QUATERNION:
            return comp_abs(self.data)
        return np.abs(self.data)

    def max_abs_diff(self, other: "RepMatrix") -> float:
        if other.tag is not self.tag or self.data.shape != other.data.shape:
            raise ValueError("shape or tag mismatch")
        if self.tag is Field.RATIONAL:
            return float(max(abs(x - y) for x, y in zip(self.data.ravel(), other.data.ravel())))
        if self.tag is Field.QUATERNION:
            return float(comp_abs(self.data - other.data).max())
        return float(np.abs(self.data - other.data).max())

    def is_identity(self, tol: float) -> bool:
        if self.rows != self.cols:
            return False
        eye = RepMatrix.identity(self.tag, self.rows)
        if self.tag is Field.RATIONAL:
            return bool(np.all(self.data == eye.data))
        return self.max_abs_diff(eye) <= tol

    # ---- conversions ----

    def cast(self, tag: Field) -> "RepMatrix":
        """Cast between scalar systems along the inclusion chain.

        The RATIONAL -> floating direction rounds each fraction to the
        nearest double; it is the only lossy case and must be requested
        explicitly.
        """
        if tag is self.tag:
            return self
        if self.tag is Field.RATIONAL:
            real = np.array([[float(x) for x in row] for row in self.data], dtype=float)
            return RepMatrix(Field.REAL, real).cast(tag)
        if self.tag is Field.REAL:
            if tag is Field.COMPLEX:
                return RepMatrix(tag, self.data.astype(complex))
            if tag is Field.QUATERNION:
                comp = np.zeros(self.data.shape + (4,))
                comp[..., 0] = self.data
                return RepMatrix(tag, comp)
        if self.tag is Field.COMPLEX and tag is Field.QUATERNION:
            comp = np.zeros(self.data.shape + (4,))
            comp[..., 0] = self.data.real
            comp[..., 1] = self.data.imag
            return RepMatrix(tag, comp)
        raise ValueError(f"unsupported cast {self.tag.value} -> {tag.value}")

    def to_components(self) -> np.ndarray:
        """Float component view (rows, cols, ncomp); floating fields only."""
        if self.tag is Field.REAL:
            return self.data[..., None].copy()
        if self.tag is Field.COMPLEX:
            out = np.empty(self.data.shape + (2,))
            out[..., 0] = self.data.real
            out[..., 1] = self.data.imag
            return out
        if self.tag is Field.QUATERNION:
            return self.data.copy()
        raise ValueError("rational matrices have no component layout")

    @staticmethod
    def from_components(tag: Field, comp: np.ndarray) -> "RepMatrix":
        if tag is Field.REAL:
            return RepMatrix(tag, comp[..., 0])
        if tag is Field.COMPLEX:
            return RepMatrix(tag, comp[..., 0] + 1j * comp[..., 1])
        if tag is Field.QUATERNION:
            return RepMatrix(tag, comp)
        raise ValueError("rational matrices have no component layout")

    # ---- JSON ----

    def to_json(self) -> dict:
        data = [self.entry(i, j).to_json() for i in range(self.rows) for j in range(self.cols)]
        return {"tag": self.tag.value, "rows": self.rows, "cols": self.cols, "data": data}

    @staticmethod
    def from_json(obj: dict) -> "RepMatrix":
        tag = field_from_tag(obj["tag"])
        rows, cols = int(obj["rows"]), int(obj["cols"])
        data = obj["data"]
        if len(data) != rows * cols:
            raise ValueError("matrix data length does not match rows*cols")
        scalars = [Scalar.from_json(tag, x) for x in data]
        grid = [scalars[i * cols : (i + 1) * cols] for i in range(rows)]
        return RepMatrix.from_scalars(grid)

    def __repr__(self):
        return f"RepMatrix({self.tag.value}, {self.rows}x{self.cols})"
