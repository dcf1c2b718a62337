"""Poisson kernels ``K(x, xi | lam) = q**(z * hor(x, xi))`` and their lam-derivatives.

Since ``K`` depends on ``(x, xi)`` only through the integer ``hor(x, xi)``,
all derivative values are cached per (eigenvalue, horospherical index).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .spectral import EigenParam, Jet, z_jet
from .tree import BoundaryRay, Vertex, hor

#: Convention for the derivative ladder ``(P - lam I) K^(r) = s_r K^(r-1)``:
#: ``"plus"`` means ``s_r = r``, ``"alternating"`` means ``s_r = (-1)**r * r``.
#: Fixed to the one confirmed numerically by ``verify.resolve_sign_constant``
#: (differentiating ``(P - lam I) K = 0`` r times in lam gives ``+r``).
LADDER_CONVENTION = "plus"


def ladder_factor(r: int, convention: str = LADDER_CONVENTION) -> int:
    """The integer ``s_r`` with ``(P - lam I) K^(r) = s_r K^(r-1)``."""
    if convention == "plus":
        return r
    if convention == "alternating":
        return (-1) ** r * r
    raise ValueError(f"unknown ladder convention {convention!r}")


def kernel_from_hor(h: int, param: EigenParam) -> complex:
    return cmath.exp(param.z * h * param.log_q)


def poisson_kernel(x: Vertex, xi: BoundaryRay, param: EigenParam) -> complex:
    return kernel_from_hor(hor(x, xi), param)


@lru_cache(maxsize=4096)
def _log_increment(param: EigenParam, order: int) -> Jet:
    # u(delta) = ln q * (z(lam + delta) - z(lam)), zero constant term
    zj = z_jet(param, order)
    return (zj - param.z) * param.log_q


@lru_cache(maxsize=65536)
def _derivatives_at_hor(param: EigenParam, h: int, order: int) -> np.ndarray:
    k0 = kernel_from_hor(h, param)
    if order == 0 or h == 0:
        out = np.zeros(order + 1, dtype=complex)
        out[0] = k0
    else:
        param.require_off_spectrum()
        out = (_log_increment(param, order) * h).exp().derivatives() * k0
    out.setflags(write=False)
    return out


def kernel_derivatives_from_hor(h: int, param: EigenParam, order: int) -> np.ndarray:
    """``[K^(0), ..., K^(order)]`` at horospherical index ``h`` (read-only array)."""
    return _derivatives_at_hor(param, int(h), int(order))


def kernel_derivative(x: Vertex, xi: BoundaryRay, param: EigenParam, r: int) -> complex:
    """The ``r``-th lam-derivative of the Poisson kernel.

    Computed as ``K * r! * [delta**r] exp(hor * u(delta))`` with ``u`` the
    jet of ``ln q * (z(lam + delta) - z(lam))``; exact up to rounding.
    """
    if r < 0:
        raise ValueError("derivative order must be >= 0")
    return complex(kernel_derivatives_from_hor(hor(x, xi), param, r)[r])


@dataclass(frozen=True)
class CoeffMatrix:
    """Upper-triangular ``a[k, r]``, ``1 <= k <= r <= n-1``, with
    ``K^(r) = K * sum_k hor**k * a[k, r]``.

    ``entries[k-1, r-1]`` holds ``a[k, r]``; the strict lower triangle is zero.
    """

    q: int
    lam: complex
    n: int
    entries: np.ndarray
    frobenius: float

    def entry(self, k: int, r: int) -> complex:
        if not 1 <= k <= r <= self.n - 1:
            raise IndexError(f"a[{k},{r}] is outside 1 <= k <= r <= {self.n - 1}")
        return complex(self.entries[k - 1, r - 1])

    def to_json(self) -> dict:
        entries = [
            {"k": k, "r": r, "re": self.entries[k - 1, r - 1].real, "im": self.entries[k - 1, r - 1].imag}
            for r in range(1, self.n)
            for k in range(1, r + 1)
        ]
        return {
            "n": self.n,
            "q": self.q,
            "lambda": {"re": self.lam.real, "im": self.lam.imag},
            "entries": entries,
            "frobenius": self.frobenius,
        }


@lru_cache(maxsize=256)
def coeff_matrix(param: EigenParam, n: int) -> CoeffMatrix:
    """Coefficients linking kernel derivatives to powers of the horospherical index.

    From ``K(lam + delta) = K(lam) * exp(hor * u(delta))`` the coefficient
    of ``hor**k`` in ``K^(r) / K`` is ``r! * [delta**r] u**k / k!``.
    """
    if n < 2:
        raise ValueError("coefficient matrix needs n >= 2")
    param.require_off_spectrum()
    m = n - 1
    u = _log_increment(param, m)
    a = np.zeros((m, m), dtype=complex)
    power = Jet.constant(1.0, m)
    for k in range(1, m + 1):
        power = power * u
        for r in range(k, m + 1):
            a[k - 1, r - 1] = math.factorial(r) * power[r] / math.factorial(k)
    a.setflags(write=False)
    return CoeffMatrix(param.q, param.lam, n, a, float(np.linalg.norm(a)))


def kernel_bound(x: Vertex, param: EigenParam, r: int) -> float:
    """``q**(|x| Re z) * A * (sum_{k=1}^r |x|**(2k))**0.5`` with A from ``coeff_matrix(param, r+1)``.

    Majorizes ``|K^(r)(x, xi)|`` over all boundary points for ``r >= 1``.
    """
    if r < 1:
        raise ValueError("kernel_bound needs r >= 1")
    n = len(x)
    a = coeff_matrix(param, r + 1).frobenius
    return param.q ** (n * param.z.real) * a * math.sqrt(sum(n ** (2 * k) for k in range(1, r + 1)))


def bound_constant(x: Vertex, param: EigenParam, m: int) -> float:
    """``C_m(x, lam) = A * q**(|x| Re z) * sqrt(m) * |x|**m``, A from ``coeff_matrix(param, m+1)``.

    The constant carries no term for the zeroth coordinate, whose kernel
    ``K`` is only bounded by ``q**(|x| Re z)``. So it fails at the root
    (``C_m(o) = 0`` while ``f(o)`` is the mass of ``sigma_0``) and wherever
    ``A * sqrt(m) * |x|**m < 1``. :func:`majorant_constant` covers both.
    """
    if m < 1:
        raise ValueError("bound_constant needs m >= 1")
    n = len(x)
    a = coeff_matrix(param, m + 1).frobenius
    return a * param.q ** (n * param.z.real) * math.sqrt(m) * n ** m


def majorant_constant(x: Vertex, param: EigenParam, m: int) -> float:
    """``max(q**(|x| Re z), C_m(x, lam))``.

    Bounds ``max_xi |K^(j)(x, xi)|`` for every ``0 <= j <= m``, hence
    ``|f(x)| <= majorant_constant * sum_j ||sigma_j||`` for any f built
    from derivatives up to order m.
    """
    return max(param.q ** (len(x) * param.z.real), bound_constant(x, param, m))
