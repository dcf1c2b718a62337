"""Eigenvalue map of the isotropic transition operator and truncated series.

Eigenvalues of ``P`` are parametrised by ``lambda = gamma(z) =
(q**z + q**(1-z)) / (q+1)``. The map is two-to-one (``gamma(z) ==
gamma(1-z)``); the principal branch used throughout has ``Re z >= 1/2``.
Kernel derivatives in ``lambda`` need the Taylor coefficients of the
inverse branch ``z(lambda)``, which :func:`z_jet` obtains by Newton
iteration on truncated power series (:class:`Jet`).
"""
from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BranchPointError, InSpectrumError

SPECTRUM_IMAG_TOL = 1e-14
BRANCH_POINT_TOL = 1e-12
MAX_JET_ORDER = 16


def spectral_radius(q: int) -> float:
    return 2.0 * math.sqrt(q) / (q + 1)


def in_l2_spectrum(lam: complex, q: int) -> bool:
    lam = complex(lam)
    return abs(lam.imag) <= SPECTRUM_IMAG_TOL and abs(lam.real) <= spectral_radius(q)


def gamma(z: complex, q: int) -> complex:
    """The eigenvalue map ``(q**z + q**(1-z)) / (q+1)``."""
    z = complex(z)
    return (q ** z + q ** (1 - z)) / (q + 1)


def z_from_lambda(lam: complex, q: int) -> complex:
    """Principal preimage of ``lam`` under :func:`gamma`.

    Solves ``w**2 - (q+1)*lam*w + q = 0`` for ``w = q**z`` and keeps the
    root of modulus larger than ``sqrt(q)``. The imaginary part of the
    result lies in ``(-pi/ln q, pi/ln q]``.

    Raises
    ------
    InSpectrumError
        If ``lam`` is in ``[-rho, rho]``, where both roots have modulus
        ``sqrt(q)``.
    """
    lam = complex(lam)
    if in_l2_spectrum(lam, q):
        raise InSpectrumError(
            f"lambda={lam} lies in the l2 spectrum [-{spectral_radius(q):.6g}, "
            f"{spectral_radius(q):.6g}]"
        )
    b = (q + 1) * lam
    disc = cmath.sqrt(b * b - 4 * q)
    w1, w2 = (b + disc) / 2, (b - disc) / 2
    w = w1 if abs(w1) >= abs(w2) else w2
    if abs(w) <= math.sqrt(q) * (1 + 1e-15):
        raise InSpectrumError(f"lambda={lam} is on the boundary of the spectrum")
    return cmath.log(w) / math.log(q)


@dataclass(frozen=True)
class EigenParam:
    """An eigenvalue ``lam`` of P on T_q together with its principal ``z``."""

    q: int
    z: complex
    lam: complex

    def __post_init__(self):
        if int(self.q) != self.q or self.q < 2:
            raise ValueError(f"tree degree must be an integer >= 2, got {self.q!r}")
        if complex(self.z).real < 0.5 - 1e-15:
            raise ValueError(f"principal branch requires Re z >= 1/2, got z={self.z}")
        object.__setattr__(self, "q", int(self.q))
        object.__setattr__(self, "z", complex(self.z))
        object.__setattr__(self, "lam", complex(self.lam))

    @classmethod
    def from_z(cls, z: complex, q: int) -> "EigenParam":
        return cls(q, complex(z), gamma(z, q))

    @classmethod
    def from_lambda(cls, lam: complex, q: int) -> "EigenParam":
        return cls(q, z_from_lambda(lam, q), complex(lam))

    @property
    def log_q(self) -> float:
        return math.log(self.q)

    @property
    def rho(self) -> float:
        return spectral_radius(self.q)

    @property
    def in_spectrum(self) -> bool:
        return in_l2_spectrum(self.lam, self.q)

    def require_off_spectrum(self) -> None:
        if self.in_spectrum:
            raise InSpectrumError(f"lambda={self.lam} lies in [-rho, rho] for q={self.q}")

    def to_json(self) -> dict:
        return {"q": self.q, "z": complex_to_json(self.z), "lambda": complex_to_json(self.lam)}


def complex_to_json(c: complex) -> dict:
    c = complex(c)
    return {"re": c.real, "im": c.imag}


_UNSIGNED = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX_RE = re.compile(
    rf"(?P<re>[+-]?{_UNSIGNED})(?P<im>[+-](?:{_UNSIGNED})?)?i"
    rf"|(?P<real>[+-]?{_UNSIGNED})"
    rf"|(?P<pure>[+-]?(?:{_UNSIGNED})?)i"
)


def parse_complex_literal(text: str) -> complex:
    """Parse ``a``, ``a+bi``, ``a-bi``, ``bi`` or ``i`` strictly (no spaces, no ``j``)."""
    m = _COMPLEX_RE.fullmatch(text.strip())
    if m is None:
        raise ValueError(f"malformed complex literal {text!r} (expected e.g. 1.5+0.3i)")

    def coef(s):
        return float(s + "1") if s in ("", "+", "-") else float(s)

    if m["real"] is not None:
        return complex(float(m["real"]), 0.0)
    if m["pure"] is not None:
        return complex(0.0, coef(m["pure"]))
    if m["im"] is None:
        # "2.5i": the leading number is the imaginary part
        return complex(0.0, float(m["re"]))
    return complex(float(m["re"]), coef(m["im"]))


class Jet:
    """Truncated Taylor series ``sum_k c_k * delta**k`` around ``base``.

    All arithmetic keeps the order of the least precise operand; the
    coefficients beyond it are unknown, not zero.
    """

    __slots__ = ("coeffs", "base")

    def __init__(self, coeffs, base: complex = 0.0):
        self.coeffs = np.array(coeffs, dtype=complex).reshape(-1)
        if self.coeffs.size == 0:
            raise ValueError("a jet needs at least one coefficient")
        self.base = complex(base)

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    def __repr__(self):
        return f"Jet({self.coeffs.tolist()}, base={self.base})"

    def __getitem__(self, k):
        return self.coeffs[k]

    @classmethod
    def constant(cls, c: complex, order: int, base: complex = 0.0) -> "Jet":
        coeffs = np.zeros(order + 1, dtype=complex)
        coeffs[0] = c
        return cls(coeffs, base)

    @classmethod
    def variable(cls, c: complex, order: int, base: complex = 0.0) -> "Jet":
        """The jet of ``c + delta``."""
        coeffs = np.zeros(order + 1, dtype=complex)
        coeffs[0] = c
        if order >= 1:
            coeffs[1] = 1.0
        return cls(coeffs, base)

    def truncate(self, order: int) -> "Jet":
        return Jet(self.coeffs[: order + 1], self.base)

    def _coerce(self, other):
        if isinstance(other, Jet):
            n = min(self.order, other.order)
            return self.coeffs[: n + 1], other.coeffs[: n + 1]
        c = np.zeros_like(self.coeffs)
        c[0] = other
        return self.coeffs, c

    def __add__(self, other):
        a, b = self._coerce(other)
        return Jet(a + b, self.base)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._coerce(other)
        return Jet(a - b, self.base)

    def __rsub__(self, other):
        a, b = self._coerce(other)
        return Jet(b - a, self.base)

    def __neg__(self):
        return Jet(-self.coeffs, self.base)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.coeffs * complex(other), self.base)
        a, b = self._coerce(other)
        n = a.size
        return Jet(np.convolve(a, b)[:n], self.base)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        a = self.coeffs
        if a[0] == 0:
            raise ZeroDivisionError("jet with zero constant term has no reciprocal")
        out = np.zeros_like(a)
        out[0] = 1.0 / a[0]
        for k in range(1, a.size):
            out[k] = -np.dot(a[1 : k + 1], out[k - 1 :: -1][:k]) / a[0]
        return Jet(out, self.base)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.coeffs / complex(other), self.base)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, k: int):
        if int(k) != k or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = Jet.constant(1.0, self.order, self.base)
        base = self
        k = int(k)
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def exp(self) -> "Jet":
        # h = exp(a)  =>  k h_k = sum_{j=1}^k j a_j h_{k-j}
        a = self.coeffs
        out = np.zeros_like(a)
        out[0] = cmath.exp(a[0])
        j = np.arange(1, a.size)
        for k in range(1, a.size):
            out[k] = np.dot(j[:k] * a[1 : k + 1], out[k - 1 :: -1][:k]) / k
        return Jet(out, self.base)

    def compose(self, inner: "Jet") -> "Jet":
        """``self(inner)``, expanding ``self`` about ``inner[0]``.

        ``self`` is read as a series in the displacement from its base
        point, so ``inner[0]`` must sit at that base point.
        """
        n = min(self.order, inner.order)
        shift = inner.truncate(n) - inner.coeffs[0]
        out = Jet.constant(self.coeffs[n], n, inner.base)
        for k in range(n - 1, -1, -1):
            out = out * shift + self.coeffs[k]
        return out

    def derivatives(self) -> np.ndarray:
        """``k! * c_k``: the derivatives at the base point."""
        fact = np.array([math.factorial(k) for k in range(self.coeffs.size)], dtype=float)
        return self.coeffs * fact

    def allclose(self, other: "Jet", rtol=1e-12, atol=1e-12) -> bool:
        a, b = self._coerce(other)
        return bool(np.allclose(a, b, rtol=rtol, atol=atol))


def gamma_jet(z0: complex, q: int, order: int) -> Jet:
    """Taylor series of :func:`gamma` about ``z0`` in the displacement of ``z``."""
    lq = math.log(q)
    k = np.arange(order + 1)
    fact = np.array([math.factorial(i) for i in k], dtype=float)
    a, b = q ** complex(z0), q ** (1 - complex(z0))
    coeffs = lq ** k * (a + (-1.0) ** k * b) / ((q + 1) * fact)
    return Jet(coeffs, base=z0)


def _gamma_of_jet(zeta: Jet, q: int) -> tuple[Jet, Jet]:
    lq = math.log(q)
    up = (zeta * lq).exp()
    down = (zeta * (-lq)).exp() * q
    return (up + down) / (q + 1), (up - down) * (lq / (q + 1))


def z_jet(param: EigenParam, order: int) -> Jet:
    """Taylor coefficients of the principal branch ``z(lam + delta)``.

    Newton iteration ``Z <- Z - (gamma(Z) - lam - delta) / gamma'(Z)``
    on truncated series doubles the number of correct coefficients per
    step.

    Raises
    ------
    BranchPointError
        If ``|q**z - q**(1-z)| < 1e-12``, i.e. ``lam`` is at ``+-rho``.
    """
    return Jet(_z_jet_coeffs(param, int(order)).copy(), base=param.lam)


@lru_cache(maxsize=256)
def _z_jet_coeffs(param: EigenParam, order: int) -> np.ndarray:
    if order < 0:
        raise ValueError("jet order must be >= 0")
    if order > MAX_JET_ORDER:
        raise ValueError(f"jet order {order} exceeds the supported maximum {MAX_JET_ORDER}")
    q, z0 = param.q, param.z
    slope = q ** z0 - q ** (1 - z0)
    if abs(slope) < BRANCH_POINT_TOL:
        raise BranchPointError(f"z(lambda) is singular at lambda={param.lam} (q={q})")
    zeta = Jet.constant(z0, order, param.lam)
    target = Jet.variable(param.lam, order, param.lam)
    steps = 1
    while (1 << steps) <= order:
        steps += 1
    for _ in range(steps + 1):
        g, dg = _gamma_of_jet(zeta, q)
        zeta = zeta - (g - target) / dg
    coeffs = zeta.coeffs
    coeffs[0] = z0
    coeffs.setflags(write=False)
    return coeffs
