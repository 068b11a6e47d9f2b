"""Exact exterior algebra over R^m (3 <= m <= 6).

Basis blades are encoded as bitmasks: bit i set means the unit vector
e_{i+1} participates, and a blade's factors are always ordered by
increasing index.  The orientation is fixed once and for all by
declaring e_1 ^ ... ^ e_m = +1; every sign in the library derives from
permutation parity against that ordering.

Operations provided, with the conventions used throughout the package:

* ``wedge``      -- exterior product, graded-anticommutative.
* ``inner``      -- blade-orthonormal inner product (Gram/determinant
                    extension of the Euclidean dot product).
* ``hodge``      -- Hodge star, ``star(blade) = sign * complementary blade``.
* ``interior``   -- interior multiplication, the adjoint of wedge:
                    ``<g interior b, a> = <g, b ^ a>`` for all a.
* ``bullet``     -- first-order contraction, defined inductively:
                    ``a . b = a interior b`` for 1-vector b, and
                    ``a . (b ^ c) = (a . b) ^ c + (-1)^{pq} (a . c) ^ b``.

Everything is immutable and pure; per-dimension multiplication tables
are cached and shared.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

__all__ = [
    "DimensionMismatchError",
    "GradeError",
    "MultiVector",
    "basis_vector",
    "blade",
    "from_vector",
    "field_wedge",
    "field_interior",
    "field_bullet",
    "field_hodge",
    "field_inner",
    "vector_field_to_mv",
    "mv_field_vector_part",
]

MAX_DIM = 6


class DimensionMismatchError(ValueError):
    """Operands live in exterior algebras of different ambient dimension."""


class GradeError(ValueError):
    """Requested contraction with a higher-grade second argument."""


def _popcount(mask: int) -> int:
    return bin(mask).count("1")


def _merge_sign(a: int, b: int) -> int:
    """Parity sign of sorting e_a ^ e_b into the ascending blade e_{a|b}.

    Assumes a and b are disjoint masks.  Each bit of b must hop over the
    bits of a that lie above it.
    """
    sign = 1
    bits = b
    while bits:
        j = (bits & -bits).bit_length() - 1
        swaps = _popcount(a >> (j + 1))
        if swaps & 1:
            sign = -sign
        bits &= bits - 1
    return sign


@lru_cache(maxsize=None)
def _wedge_entries(m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    ia, ib, iout, sg = [], [], [], []
    for a in range(1 << m):
        for b in range(1 << m):
            if a & b:
                continue
            ia.append(a)
            ib.append(b)
            iout.append(a | b)
            sg.append(_merge_sign(a, b))
    return (np.array(ia), np.array(ib), np.array(iout), np.array(sg, dtype=float))


@lru_cache(maxsize=None)
def _interior_entries(m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    # blade_g interior blade_b = merge_sign(b, g^b) * blade_{g^b} for b subset g
    ia, ib, iout, sg = [], [], [], []
    for g in range(1 << m):
        for b in range(1 << m):
            if b & ~g:
                continue
            ia.append(g)
            ib.append(b)
            iout.append(g ^ b)
            sg.append(_merge_sign(b, g ^ b))
    return (np.array(ia), np.array(ib), np.array(iout), np.array(sg, dtype=float))


def _bullet_blades(m: int, a: int, b: int, memo: dict) -> dict[int, float]:
    """Signed blade expansion of blade_a . blade_b."""
    key = (a, b)
    if key in memo:
        return memo[key]
    out: dict[int, float] = {}
    if _popcount(b) <= 1:
        # grade-0 or grade-1 second argument: plain interior multiplication
        if b == 0:
            out[a] = 1.0
        elif b & ~a:
            pass  # contraction annihilates
        else:
            out[a ^ b] = float(_merge_sign(b, a ^ b))
    else:
        lo = b & -b          # lowest factor e_i, so blade_b = e_i ^ rest
        rest = b ^ lo
        q = _popcount(rest)
        # a . (e_i ^ rest) = (a . e_i) ^ rest + (-1)^q (a . rest) ^ e_i
        for mask, coeff in _bullet_blades(m, a, lo, memo).items():
            if mask & rest:
                continue
            out[mask | rest] = out.get(mask | rest, 0.0) + coeff * _merge_sign(mask, rest)
        sign = -1.0 if q & 1 else 1.0
        for mask, coeff in _bullet_blades(m, a, rest, memo).items():
            if mask & lo:
                continue
            out[mask | lo] = out.get(mask | lo, 0.0) + sign * coeff * _merge_sign(mask, lo)
    out = {k: v for k, v in out.items() if v != 0.0}
    memo[key] = out
    return out


@lru_cache(maxsize=None)
def _bullet_entries(m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    memo: dict = {}
    ia, ib, iout, sg = [], [], [], []
    for a in range(1 << m):
        for b in range(1 << m):
            for mask, coeff in _bullet_blades(m, a, b, memo).items():
                ia.append(a)
                ib.append(b)
                iout.append(mask)
                sg.append(coeff)
    return (np.array(ia), np.array(ib), np.array(iout), np.array(sg, dtype=float))


@lru_cache(maxsize=None)
def _hodge_entries(m: int) -> tuple[np.ndarray, np.ndarray]:
    full = (1 << m) - 1
    iout = np.empty(1 << m, dtype=int)
    sg = np.empty(1 << m)
    for a in range(1 << m):
        comp = full ^ a
        iout[a] = comp
        sg[a] = _merge_sign(a, comp)
    return iout, sg


def _check_dim(m: int) -> None:
    if not 1 <= m <= MAX_DIM:
        raise DimensionMismatchError(f"ambient dimension {m} outside 1..{MAX_DIM}")


# ---------------------------------------------------------------------------
# Field-level operations: arrays of blade coefficients with shape (..., 2**m).
# Geometry modules use these; the MultiVector class below wraps single points.
# ---------------------------------------------------------------------------

def _apply_bilinear(entries, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ia, ib, iout, sg = entries
    dtype = np.result_type(a.dtype, b.dtype)
    out = np.zeros(np.broadcast_shapes(a.shape[:-1], b.shape[:-1]) + (a.shape[-1],), dtype=dtype)
    lead_a = tuple(range(a.ndim - 1))
    lead_b = tuple(range(b.ndim - 1))
    live_a = np.any(a != 0, axis=lead_a) if a.ndim > 1 else (a != 0)
    live_b = np.any(b != 0, axis=lead_b) if b.ndim > 1 else (b != 0)
    keep = live_a[ia] & live_b[ib]
    for t in np.flatnonzero(keep):
        out[..., iout[t]] += sg[t] * a[..., ia[t]] * b[..., ib[t]]
    return out


def field_wedge(m: int, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pointwise wedge of two blade-coefficient fields."""
    _check_dim(m)
    return _apply_bilinear(_wedge_entries(m), a, b)


def field_interior(m: int, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pointwise interior multiplication a interior b."""
    _check_dim(m)
    return _apply_bilinear(_interior_entries(m), a, b)


def field_bullet(m: int, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pointwise first-order contraction a . b."""
    _check_dim(m)
    return _apply_bilinear(_bullet_entries(m), a, b)


def field_hodge(m: int, a: np.ndarray) -> np.ndarray:
    """Pointwise Hodge star of a blade-coefficient field."""
    _check_dim(m)
    iout, sg = _hodge_entries(m)
    out = np.zeros_like(a)
    out[..., iout] = sg * a
    return out


def field_inner(m: int, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pointwise blade-orthonormal inner product <a, b>."""
    _check_dim(m)
    return np.sum(a * b, axis=-1)


def vector_field_to_mv(v: np.ndarray) -> np.ndarray:
    """Embed an R^m-valued field (..., m) as grade-1 coefficients (..., 2**m)."""
    m = v.shape[-1]
    _check_dim(m)
    out = np.zeros(v.shape[:-1] + (1 << m,), dtype=v.dtype)
    for k in range(m):
        out[..., 1 << k] = v[..., k]
    return out


def mv_field_vector_part(a: np.ndarray) -> np.ndarray:
    """Extract the grade-1 part of a coefficient field as an (..., m) array."""
    m = (a.shape[-1]).bit_length() - 1
    return np.stack([a[..., 1 << k] for k in range(m)], axis=-1)


@lru_cache(maxsize=None)
def grade_masks(m: int, k: int) -> np.ndarray:
    """Blade masks of grade k, in increasing mask order."""
    return np.array([mask for mask in range(1 << m) if _popcount(mask) == k])


# ---------------------------------------------------------------------------
# Point-value wrapper
# ---------------------------------------------------------------------------

class MultiVector:
    """Immutable multivector over an orthonormal basis of R^m.

    Coefficients are stored densely, one slot per blade mask, so the
    grade-k component occupies C(m, k) of the 2**m slots.
    """

    __slots__ = ("m", "coeffs")

    def __init__(self, m: int, coeffs: np.ndarray | None = None):
        _check_dim(m)
        if coeffs is None:
            coeffs = np.zeros(1 << m)
        coeffs = np.array(coeffs, dtype=float)
        if coeffs.shape != (1 << m,):
            raise ValueError(f"expected {1 << m} blade coefficients, got {coeffs.shape}")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("multivector coefficients must be finite")
        coeffs.setflags(write=False)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, name, value):
        raise AttributeError("MultiVector is immutable")

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero(m: int) -> "MultiVector":
        return MultiVector(m)

    @staticmethod
    def scalar(m: int, value: float) -> "MultiVector":
        c = np.zeros(1 << m)
        c[0] = value
        return MultiVector(m, c)

    # -- structure ----------------------------------------------------------

    def grades(self) -> list[int]:
        return sorted({_popcount(i) for i in np.nonzero(self.coeffs)[0]})

    def grade(self, k: int) -> "MultiVector":
        c = np.zeros_like(self.coeffs)
        masks = grade_masks(self.m, k)
        c[masks] = self.coeffs[masks]
        return MultiVector(self.m, c)

    def vector_part(self) -> np.ndarray:
        return np.array([self.coeffs[1 << k] for k in range(self.m)])

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.coeffs**2)))

    # -- algebra -------------------------------------------------------------

    def _binary(self, other: "MultiVector", entries) -> "MultiVector":
        if not isinstance(other, MultiVector):
            raise TypeError("expected a MultiVector")
        if other.m != self.m:
            raise DimensionMismatchError(f"ambient dimensions differ: {self.m} vs {other.m}")
        return MultiVector(self.m, _apply_bilinear(entries, self.coeffs, other.coeffs))

    def wedge(self, other: "MultiVector") -> "MultiVector":
        return self._binary(other, _wedge_entries(self.m))

    def interior(self, other: "MultiVector") -> "MultiVector":
        """Interior multiplication self interior other (grades q, p -> q - p).

        Contracting a homogeneous q-vector by a strictly higher-grade
        p-vector is a grade error; mixed-grade arguments extend
        bilinearly (blades that cannot absorb the contraction give 0).
        """
        if isinstance(other, MultiVector) and other.m == self.m:
            gq = self.grades()
            gp = other.grades()
            if len(gq) == 1 and len(gp) == 1 and gp[0] > gq[0]:
                raise GradeError(f"cannot contract grade {gq[0]} by grade {gp[0]}")
        return self._binary(other, _interior_entries(self.m))

    def bullet(self, other: "MultiVector") -> "MultiVector":
        return self._binary(other, _bullet_entries(self.m))

    def hodge(self) -> "MultiVector":
        iout, sg = _hodge_entries(self.m)
        c = np.zeros_like(self.coeffs)
        c[iout] = sg * self.coeffs
        return MultiVector(self.m, c)

    def inner(self, other: "MultiVector") -> float:
        if other.m != self.m:
            raise DimensionMismatchError(f"ambient dimensions differ: {self.m} vs {other.m}")
        return float(np.dot(self.coeffs, other.coeffs))

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other: "MultiVector") -> "MultiVector":
        if other.m != self.m:
            raise DimensionMismatchError("ambient dimensions differ")
        return MultiVector(self.m, self.coeffs + other.coeffs)

    def __sub__(self, other: "MultiVector") -> "MultiVector":
        if other.m != self.m:
            raise DimensionMismatchError("ambient dimensions differ")
        return MultiVector(self.m, self.coeffs - other.coeffs)

    def __mul__(self, c: float) -> "MultiVector":
        return MultiVector(self.m, self.coeffs * float(c))

    __rmul__ = __mul__

    def __neg__(self) -> "MultiVector":
        return MultiVector(self.m, -self.coeffs)

    def allclose(self, other: "MultiVector", tol: float = 1e-12) -> bool:
        return self.m == other.m and bool(np.allclose(self.coeffs, other.coeffs, atol=tol, rtol=0.0))

    def __repr__(self) -> str:
        terms = []
        for mask in np.nonzero(self.coeffs)[0]:
            name = "1" if mask == 0 else "e" + "".join(str(i + 1) for i in range(self.m) if mask >> i & 1)
            terms.append(f"{self.coeffs[mask]:+g}*{name}")
        return f"MultiVector(m={self.m}, {' '.join(terms) or '0'})"


def basis_vector(m: int, index: int) -> MultiVector:
    """Unit 1-vector e_{index} with 1-based index."""
    if not 1 <= index <= m:
        raise ValueError(f"basis index {index} outside 1..{m}")
    c = np.zeros(1 << m)
    c[1 << (index - 1)] = 1.0
    return MultiVector(m, c)


def blade(m: int, indices: tuple[int, ...], coeff: float = 1.0) -> MultiVector:
    """Blade e_{i1} ^ ... ^ e_{ik} from strictly increasing 1-based indices."""
    if list(indices) != sorted(set(indices)):
        raise ValueError("blade indices must be strictly increasing")
    mask = 0
    for i in indices:
        if not 1 <= i <= m:
            raise ValueError(f"blade index {i} outside 1..{m}")
        mask |= 1 << (i - 1)
    c = np.zeros(1 << m)
    c[mask] = coeff
    return MultiVector(m, c)


def from_vector(v) -> MultiVector:
    """1-vector with the given Euclidean components."""
    v = np.asarray(v, dtype=float)
    return MultiVector(v.size, vector_field_to_mv(v))
