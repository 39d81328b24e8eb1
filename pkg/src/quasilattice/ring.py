"""
Exact arithmetic in rings of algebraic integers.

This module provides tools for:
- Building the ring R = Z[z] of a cyclotomic field or R = Z[b] of a complex Pisot unit
- Exact addition, multiplication and unit inversion on integer coordinate vectors
- Galois automorphisms z -> z^l of cyclotomic rings
- Floating-point embeddings of R into physical space and the internal planes

Ring elements are stored in the power basis 1, z, ..., z^(d-1), fully reduced
modulo the defining polynomial, so equal coordinates mean equal elements.
Lattice enumeration uses a separate Z-basis (``FieldSpec.lattice_basis``):
the totative basis z^(m_k) whenever it is a Z-basis, as for prime n.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
import sympy

from .errors import (
    FieldMismatch,
    InvalidAutomorphism,
    NotAUnit,
    NotPisot,
    UnsupportedField,
)

logger = logging.getLogger(__name__)

CYCLOTOMIC = "cyclotomic"
COMPLEX_PISOT = "complex_pisot"

_ROOT_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class EmbeddingSet:
    """
    Numerical realisation of the cut-and-project scheme.

    ``physical`` and every entry of ``internal`` are 2 x d real matrices whose
    columns are the images of the power basis; ``embed`` is a matrix product.
    """

    physical: np.ndarray
    internal: Tuple[np.ndarray, ...]
    automorphism_exponents: Tuple[int, ...]
    roots: Tuple[complex, ...]

    @property
    def plane_count(self) -> int:
        return len(self.internal)

    def values(self, plane: Optional[int] = None) -> np.ndarray:
        """Complex images of the power basis in one plane (length d)."""
        matrix = self.physical if plane is None else self.internal[plane]
        return matrix[0] + 1j * matrix[1]


@dataclass(frozen=True)
class FieldSpec:
    """
    The ambient ring: cyclotomic index n or a complex Pisot minimal polynomial.

    Use :func:`make_field` to construct validated instances.

    Attributes:
        mode: ``"cyclotomic"`` or ``"complex_pisot"``
        n: Cyclotomic index (None in complex mode)
        modulus: Monic defining polynomial, constant term first
    """

    mode: str
    n: Optional[int]
    modulus: Tuple[int, ...]

    @property
    def degree(self) -> int:
        return len(self.modulus) - 1

    @property
    def symbol(self) -> str:
        return "z" if self.mode == CYCLOTOMIC else "b"

    def __str__(self) -> str:
        if self.mode == CYCLOTOMIC:
            return f"cyclotomic({self.n})"
        return "complex_pisot(" + ",".join(str(a) for a in self.modulus) + ")"

    @cached_property
    def power_table(self) -> Tuple[Tuple[int, ...], ...]:
        """Reduced coordinates of x^k for every power k the arithmetic needs."""
        d = self.degree
        top = 2 * d - 2
        if self.mode == CYCLOTOMIC:
            top = max(top, self.n - 1)
        rows = []
        current = [0] * d
        current[0] = 1
        for _ in range(top + 1):
            rows.append(tuple(current))
            # multiply by x: shift up, fold the x^d term back with the modulus
            carry = current[-1]
            current = [0] + current[:-1]
            if carry:
                for i in range(d):
                    current[i] -= carry * self.modulus[i]
        return tuple(rows)

    @cached_property
    def embeddings(self) -> EmbeddingSet:
        d = self.degree
        if self.mode == CYCLOTOMIC:
            exponents = _internal_exponents(self.n)
            roots = tuple(
                complex(np.exp(2j * np.pi * ell / self.n)) for ell in (1,) + exponents
            )
            matrices = []
            for ell in (1,) + exponents:
                angles = 2 * np.pi * ell * np.arange(d) / self.n
                matrices.append(np.vstack([np.cos(angles), np.sin(angles)]))
        else:
            exponents = ()
            physical_root, internal_roots = _classify_roots(self.modulus)
            roots = (physical_root,) + internal_roots
            matrices = []
            for root in roots:
                powers = np.array([root**i for i in range(d)], dtype=complex)
                matrices.append(np.vstack([powers.real, powers.imag]))
        return EmbeddingSet(
            physical=matrices[0],
            internal=tuple(matrices[1:]),
            automorphism_exponents=exponents,
            roots=roots,
        )

    @cached_property
    def lattice_basis(self) -> np.ndarray:
        """
        Z-basis used for the candidate lattice Z^d_N (columns in power coordinates).

        For cyclotomic fields this is z^(m_k) over the totatives m_k of n when
        those powers form a Z-basis (prime n); otherwise the power basis.
        """
        d = self.degree
        if self.mode == CYCLOTOMIC:
            totatives = [m for m in range(1, self.n) if math.gcd(m, self.n) == 1]
            columns = [self.power_table[m] for m in totatives]
            matrix = sympy.Matrix(columns).T
            if abs(matrix.det()) == 1:
                return np.array(matrix.tolist(), dtype=np.int64)
            logger.debug("Totative basis of %s is not a Z-basis; using the power basis", self)
        return np.eye(d, dtype=np.int64)

    @cached_property
    def lattice_basis_inverse(self) -> np.ndarray:
        inverse = sympy.Matrix(self.lattice_basis.tolist()).inv()
        return np.array(inverse.tolist(), dtype=np.int64)

    # Convenience constructors

    def element(self, coords: Iterable[int]) -> RingElement:
        return RingElement(tuple(int(c) for c in coords), self)

    def from_int(self, value: int) -> RingElement:
        coords = [0] * self.degree
        coords[0] = int(value)
        return RingElement(tuple(coords), self)

    @property
    def zero(self) -> RingElement:
        return self.from_int(0)

    @property
    def one(self) -> RingElement:
        return self.from_int(1)

    @property
    def generator(self) -> RingElement:
        """The element z (cyclotomic) or b (complex mode)."""
        return self.power(1)

    def power(self, k: int) -> RingElement:
        """z^k for any integer k (negative powers use the inverse unit)."""
        if k < 0:
            return self.power(-k) ** -1 if self.mode == COMPLEX_PISOT else self.power(k % self.n)
        if self.mode == CYCLOTOMIC:
            k %= self.n
        if k < len(self.power_table):
            return RingElement(self.power_table[k], self)
        return self.generator**k


@dataclass(frozen=True)
class RingElement:
    """
    Exact algebraic integer as an integer coordinate vector in the power basis.

    Supports ``+``, ``-``, ``*`` and ``**`` with other elements of the same
    field and with Python integers.
    """

    coords: Tuple[int, ...]
    field: FieldSpec

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))
        if len(self.coords) != self.field.degree:
            raise ValueError(
                f"Expected {self.field.degree} coordinates for {self.field}, got {len(self.coords)}"
            )

    def __str__(self) -> str:
        symbol = self.field.symbol
        terms = []
        for power, coefficient in enumerate(self.coords):
            if coefficient == 0:
                continue
            if power == 0:
                body = str(abs(coefficient))
            elif abs(coefficient) == 1:
                body = f"{symbol}^{power}"
            else:
                body = f"{abs(coefficient)}*{symbol}^{power}"
            sign = "-" if coefficient < 0 else "+"
            terms.append((sign, body))
        if not terms:
            return "0"
        text = "".join(sign + body for sign, body in terms)
        return text[1:] if text.startswith("+") else text

    def __repr__(self) -> str:
        return f"RingElement({self}, {self.field})"

    def _coerce(self, other) -> Optional[RingElement]:
        if isinstance(other, RingElement):
            return other
        if isinstance(other, (int, np.integer)):
            return self.field.from_int(int(other))
        return None

    def __add__(self, other):
        other = self._coerce(other)
        return NotImplemented if other is None else add(self, other)

    __radd__ = __add__

    def __neg__(self) -> RingElement:
        return RingElement(tuple(-c for c in self.coords), self.field)

    def __sub__(self, other):
        other = self._coerce(other)
        return NotImplemented if other is None else add(self, -other)

    def __rsub__(self, other):
        other = self._coerce(other)
        return NotImplemented if other is None else add(other, -self)

    def __mul__(self, other):
        other = self._coerce(other)
        return NotImplemented if other is None else mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> RingElement:
        if exponent < 0:
            return unit_inverse(self) ** (-exponent)
        result = self.field.one
        base = self
        while exponent:
            if exponent & 1:
                result = mul(result, base)
            base = mul(base, base)
            exponent >>= 1
        return result

    @property
    def is_zero(self) -> bool:
        return not any(self.coords)

    def to_array(self) -> np.ndarray:
        return np.array(self.coords, dtype=np.int64)


def _internal_exponents(n: int) -> Tuple[int, ...]:
    # one exponent per class {l, n-l}, skipping the identity/conjugation class
    return tuple(ell for ell in range(2, (n + 1) // 2) if math.gcd(ell, n) == 1)


def _classify_roots(modulus: Sequence[int]) -> Tuple[complex, Tuple[complex, ...]]:
    roots = np.roots(list(reversed(modulus)))
    moduli = np.abs(roots)
    if np.any(np.abs(moduli - 1.0) <= _ROOT_TOLERANCE):
        raise NotPisot(f"Polynomial {list(modulus)} has a root on the unit circle")
    large = roots[moduli > 1.0]
    if len(large) == 1 and abs(large[0].imag) <= _ROOT_TOLERANCE:
        raise NotPisot(
            f"Polynomial {list(modulus)} has a single real root of modulus > 1; "
            "real Pisot units live in the cyclotomic mode "
            "(for the golden ratio use cyclotomic(5) with beta=1+z^1+z^4)"
        )
    if len(large) != 2 or abs(large[0].imag) <= _ROOT_TOLERANCE:
        raise NotPisot(
            f"Polynomial {list(modulus)} must have exactly one complex root pair of modulus > 1, "
            f"found {len(large)} large roots"
        )
    physical = complex(large[0] if large[0].imag > 0 else large[1])
    internal = []
    for root in roots[moduli < 1.0]:
        if abs(root.imag) <= _ROOT_TOLERANCE:
            internal.append(complex(root.real, 0.0))
        elif root.imag > 0:
            internal.append(complex(root))
    internal.sort(key=lambda r: (round(r.real, 12), round(r.imag, 12)))
    return physical, tuple(internal)


def make_field(mode: str, value: Union[int, Sequence[int]]) -> FieldSpec:
    """
    Build and validate the ambient ring.

    Args:
        mode: ``"cyclotomic"`` or ``"complex_pisot"``
        value: Cyclotomic index n, or the minimal polynomial coefficients
            (constant term first, monic)

    Returns:
        Validated FieldSpec with embeddings and reduction tables prepared

    Raises:
        UnsupportedField: If n < 3, the field has no internal plane, or the
            polynomial is not monic, irreducible and of degree >= 2
        NotAUnit: If the constant term is not +1 or -1
        NotPisot: If the root moduli do not follow the complex Pisot pattern

    Example:
        >>> make_field("cyclotomic", 5).degree
        4
    """
    if mode == CYCLOTOMIC:
        n = int(value)
        if n < 3:
            raise UnsupportedField(f"Cyclotomic index must be at least 3, got {n}")
        if not _internal_exponents(n):
            raise UnsupportedField(
                f"cyclotomic({n}) has degree {int(sympy.totient(n))} and no internal plane"
            )
        x = sympy.Symbol("x")
        coefficients = sympy.Poly(sympy.cyclotomic_poly(n, x), x).all_coeffs()
        spec = FieldSpec(CYCLOTOMIC, n, tuple(int(a) for a in reversed(coefficients)))
    elif mode == COMPLEX_PISOT:
        coefficients = tuple(int(a) for a in value)
        if len(coefficients) < 3:
            raise UnsupportedField(f"Minimal polynomial must have degree >= 2, got {list(coefficients)}")
        if coefficients[-1] != 1:
            raise UnsupportedField(f"Minimal polynomial must be monic, got {list(coefficients)}")
        if coefficients[0] not in (1, -1):
            raise NotAUnit(
                f"Constant term of {list(coefficients)} is {coefficients[0]}; a unit needs +1 or -1"
            )
        x = sympy.Symbol("x")
        poly = sympy.Poly(list(reversed(coefficients)), x)
        if not poly.is_irreducible:
            raise UnsupportedField(f"Polynomial {list(coefficients)} is reducible over Q")
        spec = FieldSpec(COMPLEX_PISOT, None, coefficients)
        _classify_roots(coefficients)
    else:
        raise UnsupportedField(f"Unknown field mode {mode!r}")

    logger.debug("Prepared %s of degree %d with %d internal planes",
                 spec, spec.degree, spec.embeddings.plane_count)
    return spec


def cyclotomic_field(n: int) -> FieldSpec:
    return make_field(CYCLOTOMIC, n)


def complex_pisot_field(coefficients: Sequence[int]) -> FieldSpec:
    return make_field(COMPLEX_PISOT, coefficients)


def _check_same_field(a: RingElement, b: RingElement) -> None:
    if a.field != b.field:
        raise FieldMismatch(f"Cannot combine elements of {a.field} and {b.field}")


def add(a: RingElement, b: RingElement) -> RingElement:
    """
    Exact sum of two ring elements.

    Raises:
        FieldMismatch: If the operands belong to different fields
    """
    _check_same_field(a, b)
    return RingElement(tuple(x + y for x, y in zip(a.coords, b.coords)), a.field)


def mul(a: RingElement, b: RingElement) -> RingElement:
    """
    Exact product, reduced modulo the cyclotomic or minimal polynomial.

    Raises:
        FieldMismatch: If the operands belong to different fields

    Example:
        >>> F = cyclotomic_field(5)
        >>> tau = F.one + F.power(1) + F.power(4)
        >>> mul(tau, tau) == tau + 1
        True
    """
    _check_same_field(a, b)
    d = a.field.degree
    product = [0] * (2 * d - 1)
    for i, x in enumerate(a.coords):
        if x:
            for j, y in enumerate(b.coords):
                product[i + j] += x * y
    result = product[:d]
    table = a.field.power_table
    for k in range(d, 2 * d - 1):
        if product[k]:
            row = table[k]
            for i in range(d):
                result[i] += product[k] * row[i]
    return RingElement(tuple(result), a.field)


def multiplication_matrix(a: RingElement) -> np.ndarray:
    """Integer matrix M with coords(a*x) = M @ coords(x)."""
    field = a.field
    columns = [mul(a, RingElement(field.power_table[i], field)).coords for i in range(field.degree)]
    return np.array(columns, dtype=np.int64).T


def norm(a: RingElement) -> int:
    """Field norm of ``a``: the determinant of its multiplication matrix."""
    return int(sympy.Matrix(multiplication_matrix(a).tolist()).det())


def unit_inverse(u: RingElement) -> RingElement:
    """
    Inverse of a unit, by exact integer linear algebra.

    Solves M_u v = 1 where M_u is the multiplication-by-u matrix. A determinant
    of +1 or -1 guarantees an integer solution.

    Raises:
        NotAUnit: If det(M_u) is not +1 or -1

    Example:
        >>> F = cyclotomic_field(5)
        >>> unit_inverse(F.power(1)) == F.power(4)
        True
    """
    matrix = sympy.Matrix(multiplication_matrix(u).tolist())
    determinant = matrix.det()
    if determinant not in (1, -1):
        raise NotAUnit(f"{u} has norm {determinant} and is not a unit of {u.field}")
    column = matrix.inv().col(0)
    return RingElement(tuple(int(v) for v in column), u.field)


def resolve_exponent(field: FieldSpec, plane: Optional[int] = 0, exponent: Optional[int] = None) -> int:
    """Exponent l of the automorphism attached to an internal plane (cyclotomic mode)."""
    if field.mode != CYCLOTOMIC:
        raise InvalidAutomorphism(f"{field} has no automorphisms of the form z -> z^l")
    if exponent is None:
        exponents = field.embeddings.automorphism_exponents
        if plane is None or not 0 <= plane < len(exponents):
            raise InvalidAutomorphism(f"Internal plane {plane} out of range for {field}")
        return exponents[plane]
    if math.gcd(exponent, field.n) != 1:
        raise InvalidAutomorphism(f"Exponent {exponent} is not coprime to {field.n}")
    return exponent % field.n


def apply_automorphism(x: RingElement, plane: Optional[int] = 0, *, exponent: Optional[int] = None) -> RingElement:
    """
    Exact image of ``x`` under a Galois automorphism.

    In cyclotomic mode the automorphism is z -> z^l, chosen by internal-plane
    index (0-based) or directly by ``exponent``. In complex mode every conjugate
    root shares the ring Z[x]/(p), so the image keeps its coordinates and only
    the embedding changes.

    Raises:
        InvalidAutomorphism: If the plane index is out of range or l is not
            coprime to n

    Example:
        >>> F = cyclotomic_field(5)
        >>> str(apply_automorphism(F.power(1), exponent=2))
        'z^2'
    """
    field = x.field
    if field.mode == COMPLEX_PISOT:
        if exponent is not None:
            raise InvalidAutomorphism(f"{field} automorphisms are selected by plane, not exponent")
        if plane is None or not 0 <= plane < field.embeddings.plane_count:
            raise InvalidAutomorphism(f"Internal plane {plane} out of range for {field}")
        return x
    ell = resolve_exponent(field, plane, exponent)
    d = field.degree
    table = field.power_table
    result = [0] * d
    for i, coefficient in enumerate(x.coords):
        if coefficient:
            row = table[(i * ell) % field.n]
            for k in range(d):
                result[k] += coefficient * row[k]
    return RingElement(tuple(result), field)


def embed(x: RingElement, plane: Optional[int] = None) -> complex:
    """
    Floating-point position of ``x`` in physical space or an internal plane.

    Args:
        x: Ring element
        plane: None for physical space, otherwise the 0-based internal plane

    Returns:
        The point as a complex number x1 + i*x2

    Example:
        >>> F = cyclotomic_field(5)
        >>> round(embed(F.one + F.power(1) + F.power(4)).real, 10)
        1.6180339887
    """
    values = x.field.embeddings.values(plane)
    coords = np.array(x.coords, dtype=float)
    return complex(np.dot(coords, values.real), np.dot(coords, values.imag))


def embed_many(coords: np.ndarray, field: FieldSpec, plane: Optional[int] = None) -> np.ndarray:
    """Vectorised :func:`embed` over the rows of an integer coordinate array."""
    values = field.embeddings.values(plane)
    return np.asarray(coords, dtype=float) @ values


def to_lattice_coords(x: RingElement) -> Tuple[int, ...]:
    """Coordinates of ``x`` in the lattice basis (z, z^2, z^3, z^4 for n = 5)."""
    return tuple(int(v) for v in x.field.lattice_basis_inverse @ x.to_array())


def from_lattice_coords(field: FieldSpec, coords: Sequence[int]) -> RingElement:
    """Inverse of :func:`to_lattice_coords`."""
    return field.element(field.lattice_basis @ np.asarray(coords, dtype=np.int64))


def check_pisot_unit(beta: RingElement) -> None:
    """
    Validate an expanding factor.

    Requires |beta| > 1 in physical space, |sigma_j(beta)| < 1 in every
    internal plane, and norm +1 or -1.

    Raises:
        NotPisot: If a modulus condition fails
        NotAUnit: If beta is not a unit
    """
    modulus = abs(embed(beta))
    if modulus <= 1.0 + _ROOT_TOLERANCE:
        raise NotPisot(f"Expanding factor {beta} has modulus {modulus:.6g}; it must exceed 1")
    for plane in range(beta.field.embeddings.plane_count):
        conjugate = abs(embed(beta, plane))
        if conjugate >= 1.0 - _ROOT_TOLERANCE:
            raise NotPisot(
                f"Conjugate of {beta} in internal plane {plane} has modulus {conjugate:.6g}; "
                "only the identity and complex conjugation may fix the expanding factor, "
                "all other conjugates need modulus < 1"
            )
    if norm(beta) not in (1, -1):
        raise NotAUnit(f"Expanding factor {beta} is not a unit")


def cyclotomic_pisot(field: FieldSpec) -> RingElement:
    """The real factor 1 + z + conj(z), a Pisot number for n = 5, 7, 8, 12."""
    return field.one + field.power(1) + field.power(field.n - 1)


__all__ = [
    "CYCLOTOMIC",
    "COMPLEX_PISOT",
    "EmbeddingSet",
    "FieldSpec",
    "RingElement",
    "make_field",
    "cyclotomic_field",
    "complex_pisot_field",
    "add",
    "mul",
    "multiplication_matrix",
    "norm",
    "unit_inverse",
    "resolve_exponent",
    "apply_automorphism",
    "embed",
    "embed_many",
    "to_lattice_coords",
    "from_lattice_coords",
    "check_pisot_unit",
    "cyclotomic_pisot",
]
