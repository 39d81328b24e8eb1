"""
Expanding iterated function systems g_k(x) = beta*x + z_k on a ring of integers.

This module provides tools for:
- Validating an expanding IFS with a Pisot unit factor
- Deriving the contracting conjugate system in each internal plane
- The radius bounds c (cycles) and c_j (attractor balls)
- Exact forward and inverse map application, scalar and vectorised
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy

from .errors import FieldMismatch, ValidationError
from .ring import (
    COMPLEX_PISOT,
    FieldSpec,
    RingElement,
    apply_automorphism,
    check_pisot_unit,
    embed,
    embed_many,
    multiplication_matrix,
    resolve_exponent,
    unit_inverse,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IfsSpec:
    """
    Expanding IFS g_k(x) = beta*x + z_k, k = 0..m-1.

    Build instances with :func:`make_ifs`, which validates the factor and
    caches its inverse.
    """

    field: FieldSpec
    beta: RingElement
    translations: Tuple[RingElement, ...]
    beta_inverse: RingElement

    @property
    def m(self) -> int:
        return len(self.translations)

    @cached_property
    def beta_matrix(self) -> np.ndarray:
        return multiplication_matrix(self.beta)

    @cached_property
    def beta_inverse_matrix(self) -> np.ndarray:
        return multiplication_matrix(self.beta_inverse)

    @cached_property
    def translation_array(self) -> np.ndarray:
        return np.array([z.coords for z in self.translations], dtype=np.int64)

    @cached_property
    def max_translation(self) -> float:
        return max(abs(embed(z)) for z in self.translations)

    @cached_property
    def expansion(self) -> float:
        """|beta| in physical space."""
        return abs(embed(self.beta))


@dataclass(frozen=True)
class ConjugateIfs:
    """
    Contracting system g'_k(x) = beta_j*x + z_k^j in one internal plane.

    ``beta`` and ``translations`` are the exact images under the automorphism;
    ``beta_value`` and ``translation_values`` are their positions in the plane.
    """

    plane: Optional[int]
    beta: RingElement
    translations: Tuple[RingElement, ...]
    beta_value: complex
    translation_values: Tuple[complex, ...]

    @property
    def m(self) -> int:
        return len(self.translations)

    def apply(self, k: int, x: RingElement) -> RingElement:
        """Exact g'_k(x) on an automorphism image."""
        return self.beta * x + self.translations[k]

    def apply_value(self, k: int, value: complex) -> complex:
        return self.beta_value * value + self.translation_values[k]

    def fixed_point_values(self) -> List[complex]:
        """Positions of the fixed points z_k^j / (1 - beta_j), which lie in the attractor."""
        return [z / (1 - self.beta_value) for z in self.translation_values]


@dataclass(frozen=True)
class Bounds:
    """
    Radius bounds of an IFS.

    Attributes:
        c: All cycles lie in the closed physical ball B_c(0)
        c_planes: The attractor of plane j lies in B_{c_j}(0)
    """

    c: float
    c_planes: Tuple[float, ...]


def make_ifs(field: FieldSpec, beta: RingElement, translations: Sequence[RingElement]) -> IfsSpec:
    """
    Build and validate an expanding IFS.

    Args:
        field: Ambient ring
        beta: Expanding factor, a Pisot unit of the ring
        translations: The z_k, pairwise distinct, at least one

    Returns:
        IfsSpec with cached beta inverse

    Raises:
        NotPisot: If |beta| <= 1 or some conjugate has modulus >= 1
        NotAUnit: If beta is not a unit
        FieldMismatch: If an element belongs to another field
        ValidationError: If translations are empty or repeated

    Example:
        >>> F = cyclotomic_field(5)
        >>> tau = F.one + F.power(1) + F.power(4)
        >>> make_ifs(F, tau, [F.power(k) for k in range(1, 6)]).m
        5
    """
    translations = tuple(translations)
    if not translations:
        raise ValidationError("An IFS needs at least one map")
    for element in (beta,) + translations:
        if element.field != field:
            raise FieldMismatch(f"{element} does not belong to {field}")
    if len(set(translations)) != len(translations):
        raise ValidationError("Translations must be pairwise distinct")

    check_pisot_unit(beta)
    spec = IfsSpec(field, beta, translations, unit_inverse(beta))
    logger.debug("IFS with factor %s and %d maps on %s", beta, spec.m, field)
    return spec


def with_extra_map(ifs: IfsSpec, translation: RingElement) -> IfsSpec:
    """The IFS extended by one map x -> beta*x + translation (e.g. g_0(x) = beta*x)."""
    return make_ifs(ifs.field, ifs.beta, ifs.translations + (translation,))


def apply_map(ifs: IfsSpec, k: int, x: RingElement) -> RingElement:
    """Exact g_k(x) = beta*x + z_k."""
    return ifs.beta * x + ifs.translations[k]


def apply_inverse(ifs: IfsSpec, k: int, y: RingElement) -> RingElement:
    """Exact g_k^-1(y) = (y - z_k) * beta^-1."""
    return (y - ifs.translations[k]) * ifs.beta_inverse


def images(ifs: IfsSpec, coords: np.ndarray) -> np.ndarray:
    """
    All forward images of a batch of points.

    Args:
        ifs: The IFS
        coords: Integer array of shape (n_points, d)

    Returns:
        Integer array of shape (n_points, m, d); entry [i, k] is g_k(x_i)
    """
    scaled = np.asarray(coords, dtype=np.int64) @ ifs.beta_matrix.T
    return scaled[:, np.newaxis, :] + ifs.translation_array[np.newaxis, :, :]


def preimages(ifs: IfsSpec, coords: np.ndarray) -> np.ndarray:
    """All inverse images; entry [i, k] is g_k^-1(y_i), shape (n_points, m, d)."""
    shifted = np.asarray(coords, dtype=np.int64)[:, np.newaxis, :] - ifs.translation_array[np.newaxis, :, :]
    return shifted @ ifs.beta_inverse_matrix.T


def successor_graph(
    elements: Sequence[RingElement], ifs: IfsSpec, radius: Optional[float] = None
) -> Dict[Tuple[int, ...], Tuple[Tuple[int, ...], ...]]:
    """
    Successor relation x -> g_k(x) restricted to a finite point set.

    Args:
        elements: The vertex set
        ifs: The IFS
        radius: If given, images with physical modulus above ``radius`` are dropped

    Returns:
        Mapping from coordinate key to the keys of its successors, in map order
    """
    keys = [x.coords for x in elements]
    members = set(keys)
    d = ifs.field.degree
    coords = np.array(keys, dtype=np.int64).reshape(-1, d)
    targets = images(ifs, coords)
    if radius is not None:
        moduli = np.abs(embed_many(targets.reshape(-1, d), ifs.field)).reshape(len(keys), ifs.m)
        inside = moduli <= radius
    else:
        inside = np.ones((len(keys), ifs.m), dtype=bool)

    graph = {}
    for i, key in enumerate(keys):
        successors = []
        for k in range(ifs.m):
            if not inside[i, k]:
                continue
            target = tuple(targets[i, k].tolist())
            if target in members:
                successors.append(target)
        graph[key] = tuple(successors)
    return graph


def conjugate_ifs(ifs: IfsSpec, plane: Optional[int] = 0, *, exponent: Optional[int] = None) -> ConjugateIfs:
    """
    Conjugate system obtained by applying a Galois automorphism to beta and every z_k.

    Args:
        ifs: The expanding IFS
        plane: 0-based internal plane
        exponent: Cyclotomic exponent l instead of a plane; l = 1 gives the IFS itself

    Raises:
        InvalidAutomorphism: If the plane or exponent is invalid

    Example:
        >>> conj = conjugate_ifs(pentagonal_ifs)  # doctest: +SKIP
        >>> round(conj.beta_value.real, 6)        # doctest: +SKIP
        -0.618034
    """
    if exponent is not None:
        resolve_exponent(ifs.field, None, exponent)
        beta = apply_automorphism(ifs.beta, exponent=exponent)
        translations = tuple(apply_automorphism(z, exponent=exponent) for z in ifs.translations)
        return ConjugateIfs(
            plane=None,
            beta=beta,
            translations=translations,
            beta_value=embed(beta),
            translation_values=tuple(embed(z) for z in translations),
        )

    beta = apply_automorphism(ifs.beta, plane)
    translations = tuple(apply_automorphism(z, plane) for z in ifs.translations)
    return ConjugateIfs(
        plane=plane,
        beta=beta,
        translations=translations,
        beta_value=embed(ifs.beta, plane),
        translation_values=tuple(embed(z, plane) for z in ifs.translations),
    )


def compute_bounds(ifs: IfsSpec) -> Bounds:
    """
    Radius bounds c = max|z_k| / (|beta| - 1) and c_j = max|z_k^j| / (1 - |beta_j|).

    Example:
        >>> compute_bounds(pentagonal_ifs).c  # doctest: +SKIP
        1.618033988749895
    """
    c = ifs.max_translation / (ifs.expansion - 1.0)
    c_planes = []
    for plane in range(ifs.field.embeddings.plane_count):
        contraction = abs(embed(ifs.beta, plane))
        largest = max(abs(embed(z, plane)) for z in ifs.translations)
        c_planes.append(largest / (1.0 - contraction))
    return Bounds(c=c, c_planes=tuple(c_planes))


def fixed_point(ifs: IfsSpec, k: int) -> Optional[RingElement]:
    """
    The fixed point of g_k in the ring, or None if it is not an algebraic integer.

    Solves (beta - 1) x = -z_k exactly; when beta - 1 is a unit this is
    x = -z_k * (beta - 1)^-1.
    """
    matrix = sympy.Matrix(multiplication_matrix(ifs.beta - 1).tolist())
    rhs = sympy.Matrix([-c for c in ifs.translations[k].coords])
    solution = matrix.LUsolve(rhs)
    if any(not value.is_integer for value in solution):
        return None
    return ifs.field.element(int(value) for value in solution)


def roots_of_unity(field: FieldSpec, r: int) -> List[RingElement]:
    """
    The r-th roots of unity exp(2*pi*i*j/r), j = 1..r, as ring elements.

    Raises:
        ValidationError: If the ring does not contain the r-th roots of unity
    """
    if r < 1:
        raise ValidationError(f"Root of unity order must be positive, got {r}")
    if field.mode == COMPLEX_PISOT:
        if r > 2:
            raise ValidationError(f"{field} only contains the roots of unity +1 and -1")
        return [field.from_int(-1), field.one] if r == 2 else [field.one]

    n = field.n
    order = n if n % 2 == 0 else 2 * n
    if order % r:
        raise ValidationError(f"{field} does not contain the primitive {r}-th roots of unity")
    roots = []
    for j in range(1, r + 1):
        a = (j * order // r) % order
        if order == n:
            roots.append(field.power(a))
        elif a % 2 == 0:
            roots.append(field.power(a // 2))
        else:
            # exp(pi*i*a/n) = -z^((a+n)/2)
            roots.append(-field.power((a + n) // 2))
    return roots


__all__ = [
    "IfsSpec",
    "ConjugateIfs",
    "Bounds",
    "make_ifs",
    "with_extra_map",
    "apply_map",
    "apply_inverse",
    "images",
    "preimages",
    "successor_graph",
    "conjugate_ifs",
    "compute_bounds",
    "fixed_point",
    "roots_of_unity",
]
