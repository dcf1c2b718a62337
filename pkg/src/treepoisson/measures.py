"""Complex measures on the boundary of T_q.

Two concrete classes, freely combined in one :class:`BoundaryMeasure`:

* an atomic part, a finite sum of weighted point masses at rays;
* a cylinder part, a value for every sector ``S_u`` with ``|u| = depth``,
  spread inside each sector proportionally to the uniform measure
  ``nu_o``. Refining to a deeper partition splits a sector value equally
  among its sub-sectors.

Both admit an exact total variation norm and exact integration of any
function of the horospherical index ``hor(x, .)``: once a sector is at
least as deep as ``x`` the index is constant on it.

Scaling by integers or :class:`fractions.Fraction` is kept symbolic until
the weights are read, so ``sigma.scaled(Fraction(1, 3)).scaled(3)``
reproduces ``sigma`` bit for bit.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .errors import ParseError
from .kernels import kernel_derivatives_from_hor
from .spectral import EigenParam, complex_to_json, parse_complex_literal
from .tree import BoundaryRay, HomogeneousTree, Vertex, hor

Scalar = Union[complex, float, int, Fraction]


def _ray_key(ray: BoundaryRay):
    return (tuple(ray.prefix), ray.repeat)


@dataclass(frozen=True, eq=False)
class BoundaryMeasure:
    """Atomic plus cylinder complex measure on the boundary of T_q.

    Use the constructors :meth:`point_mass`, :meth:`atomic`,
    :meth:`cylinder`, :meth:`zero` and :func:`nu_o` rather than the raw
    fields. ``values`` is ordered like ``HomogeneousTree.sphere(depth)``;
    ``depth == 0`` means there is no cylinder part.
    """

    q: int
    atoms: tuple = ()
    depth: int = 0
    values: Optional[np.ndarray] = None
    factor: Fraction = field(default=Fraction(1))

    def __post_init__(self):
        tree = HomogeneousTree(self.q)
        merged: dict = {}
        for ray, w in self.atoms:
            tree.check_ray(ray)
            key = _ray_key(ray)
            prev = merged.get(key, (ray, 0j))[1]
            merged[key] = (ray, prev + complex(w))
        atoms = tuple(merged[k] for k in sorted(merged) if merged[k][1] != 0)
        object.__setattr__(self, "atoms", atoms)
        if self.values is None:
            if self.depth != 0:
                raise ValueError("cylinder depth given without values")
        else:
            if self.depth < 1:
                raise ValueError("cylinder depth must be >= 1")
            vals = np.array(self.values, dtype=complex).reshape(-1)
            if vals.size != tree.sphere_size(self.depth):
                raise ValueError(
                    f"cylinder at depth {self.depth} needs {tree.sphere_size(self.depth)} "
                    f"values, got {vals.size}"
                )
            vals.setflags(write=False)
            object.__setattr__(self, "values", vals)
        object.__setattr__(self, "factor", Fraction(self.factor))

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, q: int) -> "BoundaryMeasure":
        return cls(q)

    @classmethod
    def point_mass(cls, ray: BoundaryRay, q: int, weight: Scalar = 1.0) -> "BoundaryMeasure":
        return cls(q, ((ray, complex(weight)),))

    @classmethod
    def atomic(cls, q: int, atoms: Iterable) -> "BoundaryMeasure":
        """From ``(ray, weight)`` pairs; repeated rays are merged."""
        return cls(q, tuple(atoms))

    @classmethod
    def cylinder(cls, q: int, depth: int, values) -> "BoundaryMeasure":
        """Cylinder measure from an array in sphere order or a ``{Vertex: value}`` map.

        Missing map keys read as zero.
        """
        tree = HomogeneousTree(q)
        if isinstance(values, Mapping):
            arr = np.zeros(tree.sphere_size(depth), dtype=complex)
            for u, v in values.items():
                u = tree.check_vertex(u)
                if len(u) != depth:
                    raise ValueError(f"sector {u} is not at depth {depth}")
                arr[tree.sphere_index(u)] = v
            values = arr
        return cls(q, (), depth, values)

    # -- materialized data ---------------------------------------------

    @cached_property
    def atom_weights(self) -> tuple:
        """``(ray, weight)`` pairs with the pending scale factor applied."""
        if self.factor == 1:
            return self.atoms
        num, den = self.factor.numerator, self.factor.denominator
        return tuple((ray, w * num / den) for ray, w in self.atoms)

    @cached_property
    def cylinder_values(self) -> Optional[np.ndarray]:
        if self.values is None:
            return None
        if self.factor == 1:
            return self.values
        num, den = self.factor.numerator, self.factor.denominator
        out = self.values * num / den
        out.setflags(write=False)
        return out

    def canonical(self) -> tuple:
        """Hashable exact representation of the materialized measure."""
        atoms = tuple((_ray_key(r), w) for r, w in self.atom_weights if w != 0)
        vals = None if self.values is None else tuple(self.cylinder_values.tolist())
        return (self.q, atoms, self.depth, vals)

    def __eq__(self, other):
        if not isinstance(other, BoundaryMeasure):
            return NotImplemented
        return self.canonical() == other.canonical()

    __hash__ = None

    def __repr__(self):
        parts = [f"q={self.q}"]
        if self.atoms:
            parts.append("atoms=[" + ", ".join(f"{r}: {w:.6g}" for r, w in self.atom_weights) + "]")
        if self.values is not None:
            parts.append(f"cylinder(depth={self.depth})")
        return "BoundaryMeasure(" + ", ".join(parts) + ")"

    # -- measure-theoretic quantities --------------------------------------

    def tv_norm(self) -> float:
        total = sum(abs(w) for _, w in self.atom_weights)
        if self.values is not None:
            total += float(np.abs(self.cylinder_values).sum())
        return float(total)

    def total_mass(self) -> complex:
        total = sum((w for _, w in self.atom_weights), 0j)
        if self.values is not None:
            total += complex(self.cylinder_values.sum())
        return total

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.tv_norm() <= tol

    def cylinder_sector_mass(self, u: Sequence[int]) -> complex:
        """Mass the cylinder part gives the sector ``S_u``."""
        if self.values is None:
            return 0j
        vals, d, q = self.cylinder_values, self.depth, self.q
        tree = HomogeneousTree(q)
        n = len(u)
        if n == 0:
            return complex(vals.sum())
        if n <= d:
            width = q ** (d - n)
            start = tree.sphere_index(u) * width
            return complex(vals[start : start + width].sum())
        return complex(vals[tree.sphere_index(u[:d])]) / q ** (n - d)

    def sector_mass(self, u: Sequence[int]) -> complex:
        u = Vertex(u)
        atoms = sum((w for r, w in self.atom_weights if r.truncate(len(u)) == u), 0j)
        return atoms + self.cylinder_sector_mass(u)

    def hor_profile(self, x: Vertex) -> dict:
        """Push-forward of the measure under ``xi -> hor(x, xi)``, as ``{h: mass}``."""
        out: dict = {}
        n = len(x)
        for ray, w in self.atom_weights:
            h = hor(x, ray)
            out[h] = out.get(h, 0j) + w
        if self.values is not None:
            inside = [self.cylinder_sector_mass(x[:c]) for c in range(n + 1)]
            for c in range(n + 1):
                m = inside[c] - inside[c + 1] if c < n else inside[n]
                if m != 0:
                    h = 2 * c - n
                    out[h] = out.get(h, 0j) + m
        return out

    def integrate(self, x: Vertex, fn: Callable[[int], complex]) -> complex:
        """Integral of ``xi -> fn(hor(x, xi))``."""
        return sum((m * fn(h) for h, m in self.hor_profile(x).items()), 0j)

    # -- algebra ------------------------------------------------------------

    def scaled(self, c: Scalar) -> "BoundaryMeasure":
        if isinstance(c, Rational):
            return BoundaryMeasure(self.q, self.atoms, self.depth, self.values, self.factor * Fraction(c))
        c = complex(c)
        vals = None if self.values is None else self.cylinder_values * c
        return BoundaryMeasure(self.q, tuple((r, w * c) for r, w in self.atom_weights), self.depth, vals)

    def __mul__(self, c):
        return self.scaled(c)

    __rmul__ = __mul__

    def __neg__(self):
        return self.scaled(-1)

    def __add__(self, other):
        return linear_combination([(1, self), (1, other)])

    def __sub__(self, other):
        return linear_combination([(1, self), (-1, other)])

    def refine(self, d_new: int) -> "BoundaryMeasure":
        """Re-express the cylinder part on the depth-``d_new`` sector partition."""
        if self.values is None:
            return self
        if d_new < self.depth:
            raise ValueError(f"cannot refine depth {self.depth} down to {d_new}")
        if d_new == self.depth:
            return self
        split = self.q ** (d_new - self.depth)
        vals = np.repeat(self.cylinder_values, split) / split
        return BoundaryMeasure(self.q, self.atom_weights, d_new, vals)

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        obj: dict = {
            "atoms": [{"ray": r.to_json(), "w": complex_to_json(w)} for r, w in self.atom_weights]
        }
        if self.values is not None:
            tree = HomogeneousTree(self.q)
            obj["cylinder"] = {
                "depth": self.depth,
                "values": {
                    str(u): complex_to_json(v)
                    for u, v in zip(tree.iter_sphere(self.depth), self.cylinder_values)
                },
            }
        return obj

    @classmethod
    def from_json(cls, obj, q: int, path: str = "measure") -> "BoundaryMeasure":
        if not isinstance(obj, Mapping):
            raise ParseError(f"{path}: expected an object, got {type(obj).__name__}")
        unknown = set(obj) - {"atoms", "cylinder"}
        if unknown:
            raise ParseError(f"{path}: unknown field(s) {sorted(unknown)}")
        tree = HomogeneousTree(q)
        atoms = []
        for i, item in enumerate(obj.get("atoms", [])):
            where = f"{path}.atoms[{i}]"
            try:
                ray = tree.check_ray(BoundaryRay.from_json(item["ray"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"{where}.ray: {exc}") from None
            atoms.append((ray, parse_complex(item.get("w", 1.0), f"{where}.w")))
        depth, values = 0, None
        cyl = obj.get("cylinder")
        if cyl is not None:
            where = f"{path}.cylinder"
            try:
                depth = int(cyl["depth"])
            except (KeyError, TypeError, ValueError):
                raise ParseError(f"{where}.depth: missing or not an integer") from None
            if depth < 1:
                raise ParseError(f"{where}.depth: must be >= 1")
            if depth > tree.radius_cap:
                raise ParseError(f"{where}.depth: exceeds the radius cap {tree.radius_cap}")
            values = np.zeros(tree.sphere_size(depth), dtype=complex)
            raw = cyl.get("values", {})
            if not isinstance(raw, Mapping):
                raise ParseError(f"{where}.values: expected an object keyed by sector")
            for key, v in raw.items():
                try:
                    u = tree.check_vertex(Vertex.parse(key))
                except ValueError as exc:
                    raise ParseError(f"{where}.values[{key!r}]: {exc}") from None
                if len(u) != depth:
                    raise ParseError(f"{where}.values[{key!r}]: sector not at depth {depth}")
                values[tree.sphere_index(u)] = parse_complex(v, f"{where}.values[{key!r}]")
        return cls(q, tuple(atoms), depth, values)


def parse_complex(obj, path: str = "value") -> complex:
    """Accept ``{"re": .., "im": ..}``, a bare number or an ``a+bi`` string."""
    if isinstance(obj, Mapping):
        extra = set(obj) - {"re", "im"}
        if extra or "re" not in obj and "im" not in obj:
            raise ParseError(f"{path}: expected {{'re': .., 'im': ..}}")
        try:
            return complex(float(obj.get("re", 0.0)), float(obj.get("im", 0.0)))
        except (TypeError, ValueError):
            raise ParseError(f"{path}: 're'/'im' must be numbers") from None
    if isinstance(obj, bool):
        raise ParseError(f"{path}: expected a number")
    if isinstance(obj, (int, float)):
        return complex(obj)
    if isinstance(obj, str):
        try:
            return parse_complex_literal(obj)
        except ValueError as exc:
            raise ParseError(f"{path}: {exc}") from None
    raise ParseError(f"{path}: expected a complex number")


def linear_combination(terms: Iterable) -> BoundaryMeasure:
    """``sum_i c_i * sigma_i`` for ``(c_i, sigma_i)`` pairs over a common tree."""
    terms = [(c, s) for c, s in terms if c != 0]
    if not terms:
        raise ValueError("linear_combination needs at least one term with a nonzero coefficient")
    q = terms[0][1].q
    if any(s.q != q for _, s in terms):
        raise ValueError("cannot combine measures on trees of different degree")
    if len(terms) == 1:
        c, s = terms[0]
        return s if (isinstance(c, Rational) and c == 1) else s.scaled(c)
    depth = max(s.depth for _, s in terms)
    atoms = []
    vals = np.zeros(HomogeneousTree(q).sphere_size(depth), dtype=complex) if depth else None
    for c, s in terms:
        c = complex(c) if not isinstance(c, Rational) else complex(c.numerator) / c.denominator
        atoms.extend((r, c * w) for r, w in s.atom_weights)
        if s.values is not None:
            vals = vals + c * s.refine(depth).cylinder_values
    return BoundaryMeasure(q, tuple(atoms), depth, vals)


def nu_o(d: int, q: int) -> BoundaryMeasure:
    """The uniform probability measure, as a cylinder measure at depth ``d``."""
    if d < 1:
        raise ValueError("nu_o needs depth >= 1")
    n = HomogeneousTree(q).sphere_size(d)
    return BoundaryMeasure.cylinder(q, d, np.full(n, 1.0 / n))


def tv_norm(sigma: BoundaryMeasure) -> float:
    return sigma.tv_norm()


def refine(sigma: BoundaryMeasure, d_new: int) -> BoundaryMeasure:
    return sigma.refine(d_new)


def integrate_kernel(sigma: BoundaryMeasure, x: Vertex, param: EigenParam, r: int) -> complex:
    """``int K^(r)(x, xi | lam) dsigma(xi)``, exact for both measure classes."""
    if sigma.q != param.q:
        raise ValueError(f"measure on T_{sigma.q} integrated against a kernel on T_{param.q}")
    return sigma.integrate(x, lambda h: kernel_derivatives_from_hor(h, param, r)[r])
