"""lam-polyharmonic functions in Poisson coordinates.

A function of order n is stored as boundary measures ``sigma_0 .. sigma_{n-1}``
with ``f(x) = sum_r int K^(r)(x, xi | lam) dsigma_r(xi)``. In these
coordinates the shifted Laplacian ``P - lam I`` is a weighted shift
(``sigma_j <- s_{j+1} sigma_{j+1}``), hence nilpotent on each order
stratum, and the heat operator ``exp(t (P - lam I))`` is a finite sum.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .errors import ParseError, RadiusExhaustedError
from .kernels import coeff_matrix, kernel_derivatives_from_hor, kernel_from_hor, ladder_factor
from .measures import BoundaryMeasure, linear_combination, parse_complex
from .spectral import EigenParam
from .tree import HomogeneousTree, Vertex

#: coordinates with total variation at or below this are treated as zero
TOP_ZERO_TOL = 1e-14


class OrderDemotionWarning(UserWarning):
    """Top coordinate numerically zero; the order was lowered."""


@dataclass(frozen=True, eq=False)
class PolyFunction:
    """A lam-polyharmonic function on T_q given by its boundary measures.

    Trailing coordinates with total variation ``<= TOP_ZERO_TOL`` are
    dropped with an :class:`OrderDemotionWarning`, so ``order`` is always
    the true order. The zero function has no coordinates and order 0.
    """

    param: EigenParam
    sigmas: tuple

    def __post_init__(self):
        self.param.require_off_spectrum()
        sigmas = tuple(self.sigmas)
        for j, s in enumerate(sigmas):
            if not isinstance(s, BoundaryMeasure):
                raise TypeError(f"sigma_{j} is not a BoundaryMeasure")
            if s.q != self.param.q:
                raise ValueError(f"sigma_{j} lives on T_{s.q}, the eigenvalue on T_{self.param.q}")
        n = len(sigmas)
        while n and sigmas[n - 1].tv_norm() <= TOP_ZERO_TOL:
            n -= 1
        if n < len(sigmas):
            warnings.warn(
                f"top coordinate(s) numerically zero; order demoted from {len(sigmas)} to {n}",
                OrderDemotionWarning,
                stacklevel=3,
            )
        object.__setattr__(self, "sigmas", sigmas[:n])

    @classmethod
    def zero(cls, param: EigenParam) -> "PolyFunction":
        return cls(param, ())

    @property
    def q(self) -> int:
        return self.param.q

    @property
    def order(self) -> int:
        return len(self.sigmas)

    def is_zero(self) -> bool:
        return not self.sigmas

    def canonical(self) -> tuple:
        return (self.param, tuple(s.canonical() for s in self.sigmas))

    def __eq__(self, other):
        if not isinstance(other, PolyFunction):
            return NotImplemented
        return self.canonical() == other.canonical()

    __hash__ = None

    def __repr__(self):
        return f"PolyFunction(q={self.q}, lam={self.param.lam:.6g}, order={self.order})"

    def scaled(self, c) -> "PolyFunction":
        return PolyFunction(self.param, tuple(s.scaled(c) for s in self.sigmas))

    def __call__(self, x) -> complex:
        return evaluate(self, Vertex(x))

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "q": self.q,
            "z": {"re": self.param.z.real, "im": self.param.z.imag},
            "lambda": {"re": self.param.lam.real, "im": self.param.lam.imag},
            "sigmas": [s.to_json() for s in self.sigmas],
        }

    @classmethod
    def from_json(cls, obj) -> "PolyFunction":
        if not isinstance(obj, Mapping):
            raise ParseError("top level: expected an object")
        try:
            q = int(obj["q"])
        except (KeyError, TypeError, ValueError):
            raise ParseError("q: missing or not an integer") from None
        if q < 2:
            raise ParseError("q: tree degree must be >= 2")
        if "z" in obj:
            z = parse_complex(obj["z"], "z")
            try:
                param = EigenParam.from_z(z, q)
            except ValueError as exc:
                raise ParseError(f"z: {exc}") from None
            if "lambda" in obj:
                lam = parse_complex(obj["lambda"], "lambda")
                if abs(lam - param.lam) > 1e-9 * max(1.0, abs(lam)):
                    raise ParseError(f"lambda: {lam} disagrees with gamma(z) = {param.lam}")
        elif "lambda" in obj:
            try:
                param = EigenParam.from_lambda(parse_complex(obj["lambda"], "lambda"), q)
            except ValueError as exc:
                raise ParseError(f"lambda: {exc}") from None
        else:
            raise ParseError("one of 'z' or 'lambda' is required")
        if param.in_spectrum:
            raise ParseError(f"lambda={param.lam} lies in the l2 spectrum of P")
        raw = obj.get("sigmas")
        if not isinstance(raw, list) or not raw:
            raise ParseError("sigmas: expected a non-empty list of measures")
        sigmas = tuple(BoundaryMeasure.from_json(m, q, f"sigmas[{j}]") for j, m in enumerate(raw))
        return cls(param, sigmas)


# -- evaluation ---------------------------------------------------------------


def evaluate(f: PolyFunction, x: Vertex) -> complex:
    """``sum_r int K^(r)(x, .) dsigma_r``."""
    if f.is_zero():
        return 0j
    top = f.order - 1
    total = 0j
    for r, sigma in enumerate(f.sigmas):
        for h, mass in sigma.hor_profile(x).items():
            total += mass * kernel_derivatives_from_hor(h, f.param, top)[r]
    return total


@dataclass(frozen=True, eq=False)
class BallValues:
    """Values of a function on ``ball(radius)``, in (length, word) order."""

    q: int
    radius: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex).reshape(-1)
        n = HomogeneousTree(self.q).ball_size(self.radius)
        if vals.size != n:
            raise ValueError(f"ball({self.radius}) of T_{self.q} has {n} vertices, got {vals.size} values")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def tree(self) -> HomogeneousTree:
        return HomogeneousTree(self.q)

    @property
    def vertices(self) -> list:
        return self.tree.ball(self.radius)

    def __getitem__(self, x) -> complex:
        x = Vertex(x)
        if len(x) > self.radius:
            raise KeyError(f"{x} is outside ball({self.radius})")
        return complex(self.values[self.tree.ball_index(x)])

    def as_dict(self) -> dict:
        return dict(zip(self.vertices, self.values.tolist()))

    def restrict(self, radius: int) -> "BallValues":
        if radius > self.radius:
            raise ValueError(f"cannot restrict ball({self.radius}) to a larger radius {radius}")
        return BallValues(self.q, radius, self.values[: self.tree.ball_size(radius)])

    def scaled(self, c) -> "BallValues":
        return BallValues(self.q, self.radius, self.values * c)

    def max_abs(self) -> float:
        return float(np.abs(self.values).max())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["vertex", "re", "im"])
        for x, v in zip(self.vertices, self.values):
            w.writerow([str(x), format(v.real, ".17g"), format(v.imag, ".17g")])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, q: int) -> "BallValues":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["vertex", "re", "im"]:
            raise ParseError("line 1: expected header 'vertex,re,im'")
        tree = HomogeneousTree(q)
        body = rows[1:]
        radius = max((len(Vertex.parse(r[0])) for r in body), default=0)
        vals = np.full(tree.ball_size(radius), np.nan, dtype=complex)
        for lineno, row in enumerate(body, start=2):
            try:
                x = tree.check_vertex(Vertex.parse(row[0]))
                vals[tree.ball_index(x)] = complex(float(row[1]), float(row[2]))
            except (IndexError, ValueError) as exc:
                raise ParseError(f"line {lineno}: {exc}") from None
        if np.isnan(vals.real).any():
            raise ParseError(f"values do not cover ball({radius})")
        return cls(q, radius, vals)


def evaluate_ball(f: PolyFunction, radius: int) -> BallValues:
    tree = HomogeneousTree(f.q)
    return BallValues(f.q, radius, [evaluate(f, x) for x in tree.ball(radius)])


# -- the shifted Laplacian as a stencil ---------------------------------------


@lru_cache(maxsize=64)
def _stencil_indices(q: int, radius: int):
    """Per sphere n < radius: (children block, parent indices) into ball(radius)."""
    tree = HomogeneousTree(q)
    layout = []
    for n in range(radius):
        s = np.arange(tree.sphere_size(n))
        base_next = tree.ball_size(n)  # offset of sphere n+1
        if n == 0:
            children = base_next + np.arange(q + 1)[None, :]
            par = None
        else:
            children = base_next + s[:, None] * q + np.arange(q)[None, :]
            par = np.zeros_like(s) if n == 1 else tree.ball_size(n - 2) + s // q
        layout.append((children, par))
    return layout


def apply_stencil(v: BallValues, param: EigenParam) -> BallValues:
    """``(P - lam I) v`` by nearest-neighbour averaging; the radius drops by one."""
    if v.radius < 1:
        raise RadiusExhaustedError("the stencil needs values on a ball of radius >= 1")
    q, vals = v.q, v.values
    out = []
    offset = 0
    for n, (children, par) in enumerate(_stencil_indices(q, v.radius)):
        size = children.shape[0]
        here = vals[offset : offset + size]
        acc = vals[children].sum(axis=1)
        if par is not None:
            acc = acc + vals[par]
        out.append(acc / (q + 1) - param.lam * here)
        offset += size
    return BallValues(q, v.radius - 1, np.concatenate(out))


# -- operators in coordinates -------------------------------------------------


def norm(f: PolyFunction) -> float:
    """``sum_j j! ||sigma_j||``."""
    return float(sum(math.factorial(j) * s.tv_norm() for j, s in enumerate(f.sigmas)))


def coordinate_norms(f: PolyFunction) -> list:
    return [s.tv_norm() for s in f.sigmas]


def apply_shifted_laplacian(f: PolyFunction) -> PolyFunction:
    """``(P - lam I) f``: coordinates shift down, ``sigma_j <- s_{j+1} sigma_{j+1}``."""
    sigmas = tuple(s.scaled(ladder_factor(j)) for j, s in enumerate(f.sigmas) if j >= 1)
    return PolyFunction(f.param, sigmas)


def shifted_laplacian_power(f: PolyFunction, k: int) -> PolyFunction:
    for _ in range(k):
        if f.is_zero():
            break
        f = apply_shifted_laplacian(f)
    return f


def right_inverse(h: PolyFunction) -> PolyFunction:
    """Norm-preserving solution of ``(P - lam I) f = h`` with zeroth coordinate 0.

    Coordinates shift up, ``sigma'_{j+1} = sigma_j / s_{j+1}``; the
    division is kept as an exact rational factor, so applying the shifted
    Laplacian afterwards returns ``h`` coordinate for coordinate.
    """
    if h.is_zero():
        return h
    shifted = [s.scaled(Fraction(1, ladder_factor(j + 1))) for j, s in enumerate(h.sigmas)]
    return PolyFunction(h.param, (BoundaryMeasure.zero(h.q),) + tuple(shifted))


def to_hor_representation(f: PolyFunction) -> list:
    """Measures ``bar_sigma_k`` with ``f(x) = sum_k int K(x, xi) hor(x, xi)**k dbar_sigma_k``.

    ``bar_sigma_0 = sigma_0`` and ``bar_sigma_k = sum_{r >= k} a[k, r] sigma_r``.
    """
    if f.is_zero():
        return []
    n = f.order
    if n == 1:
        return [f.sigmas[0]]
    a = coeff_matrix(f.param, n)
    out = [f.sigmas[0]]
    for k in range(1, n):
        out.append(linear_combination((a.entry(k, r), f.sigmas[r]) for r in range(k, n)))
    return out


def evaluate_hor_representation(bars: Sequence[BoundaryMeasure], param: EigenParam, x: Vertex) -> complex:
    total = 0j
    for k, sigma in enumerate(bars):
        for h, mass in sigma.hor_profile(x).items():
            total += mass * kernel_from_hor(h, param) * float(h) ** k
    return total


def heat_apply(f: PolyFunction, t: float) -> PolyFunction:
    """``exp(t (P - lam I)) f = sum_{k < n} t**k / k! (P - lam I)**k f``, exactly.

    New ``sigma_j = sum_k t**k/k! * (s_{j+1} ... s_{j+k}) * sigma_{j+k}``.
    """
    if f.is_zero():
        return f
    n = f.order
    sigmas = []
    for j in range(n):
        terms = []
        weight = 1
        for k in range(n - j):
            if k:
                weight *= ladder_factor(j + k)
            coef = weight if k == 0 else weight * t ** k / math.factorial(k)
            terms.append((coef, f.sigmas[j + k]))
        sigmas.append(linear_combination(terms))
    return PolyFunction(f.param, tuple(sigmas))


@dataclass(frozen=True)
class OrbitStep:
    step: int
    total_norm: float
    sigma_norms: tuple
    contrast_norm: float


def orbit(f: PolyFunction, t: float, steps: int, operator: str = "heat") -> list:
    """Finite orbit segment ``T**m f`` for ``m = 0..steps``.

    ``operator="heat"`` iterates ``T = exp(t (P - lam I))`` and checks each
    iterate against ``heat_apply(f, m t)``; ``operator="shifted-laplacian"``
    iterates ``P - lam I`` (``t`` unused). Every step also records the
    contrast ``|||(P - lam I)**m f|||``, exactly 0 once ``m >= order``.
    """
    if steps < 1:
        raise ValueError("orbit needs steps >= 1")
    if operator == "heat":
        if t == 0:
            raise ValueError("the heat orbit needs t != 0")
    elif operator != "shifted-laplacian":
        raise ValueError(f"unknown operator {operator!r} (expected 'heat' or 'shifted-laplacian')")
    out = []
    g, contrast = f, f
    for m in range(steps + 1):
        if m:
            contrast = apply_shifted_laplacian(contrast) if not contrast.is_zero() else contrast
            if operator == "heat":
                g = heat_apply(g, t)
                direct = heat_apply(f, m * t)
                if not np.isclose(norm(g), norm(direct), rtol=1e-9, atol=1e-12):
                    raise ArithmeticError(f"heat orbit step {m} disagrees with heat_apply(f, {m}*t)")
            else:
                g = contrast
        out.append(OrbitStep(m, norm(g), tuple(coordinate_norms(g)), norm(contrast)))
    return out


def orbit_to_csv(steps: Sequence[OrbitStep]) -> str:
    width = max((len(s.sigma_norms) for s in steps), default=0)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["step", "total_norm"] + [f"norm_sigma_{j}" for j in range(width)])
    for s in steps:
        padded = list(s.sigma_norms) + [0.0] * (width - len(s.sigma_norms))
        w.writerow([s.step, format(s.total_norm, ".17g")] + [format(v, ".17g") for v in padded])
    return buf.getvalue()
