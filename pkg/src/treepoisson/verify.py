"""Independent oracles and the cross-validation suites.

The oracles deliberately avoid the primary code paths they check:
finite differences go through :func:`z_from_lambda` only (never jets),
and stencil operators work on sampled values only (never on measure
coordinates).
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import kernels
from .errors import AmbiguousSignError, RadiusExhaustedError, UnknownSuiteError
from .kernels import (
    bound_constant,
    coeff_matrix,
    kernel_bound,
    kernel_derivative,
    kernel_derivatives_from_hor,
    ladder_factor,
    majorant_constant,
    poisson_kernel,
)
from .measures import BoundaryMeasure, linear_combination, nu_o
from .polyharmonic import (
    BallValues,
    PolyFunction,
    apply_shifted_laplacian,
    apply_stencil,
    evaluate,
    evaluate_ball,
    evaluate_hor_representation,
    heat_apply,
    norm,
    orbit,
    right_inverse,
    shifted_laplacian_power,
    to_hor_representation,
)
from .spectral import EigenParam, z_from_lambda, z_jet
from .tree import BoundaryRay, HomogeneousTree, Vertex, hor

DEFAULT_Z = (0.6, 1.0, 1.5 + 0.3j)
DEFAULT_FD_STEPS = {1: 1e-5, 2: 1e-3, 3: 4e-3, 4: 9e-3, 5: 9e-3}
FD_ROUNDING_WARN = 1e-6
_EPS = float(np.finfo(float).eps)


# -- finite-difference oracles ------------------------------------------------


def spectrum_distance(lam: complex, q: int) -> float:
    """Distance from ``lam`` to the segment ``[-rho, rho]``."""
    rho = 2 * math.sqrt(q) / (q + 1)
    lam = complex(lam)
    return abs(complex(lam.real - min(max(lam.real, -rho), rho), lam.imag))


def default_fd_step(lam: complex, q: int, r: int) -> float:
    """Table step for order ``r``, shrunk so every stencil point stays off the spectrum."""
    return min(DEFAULT_FD_STEPS[r], spectrum_distance(lam, q) / (4 * r))


def _central_difference(func: Callable[[complex], complex], lam: complex, r: int, step: float):
    # r-th central difference on the points lam + (r/2 - k) step
    samples = [func(lam + (r / 2 - k) * step) for k in range(r + 1)]
    if all(s == samples[0] for s in samples):
        return 0.0, 0.0, 0.0  # constant: exact, nothing cancelled
    terms = [(-1) ** k * math.comb(r, k) * s for k, s in enumerate(samples)]
    value = sum(terms) / step ** r
    size = sum(abs(t) for t in terms)
    return value, size, abs(sum(terms))


def fd_derivative(func: Callable[[complex], complex], lam: complex, r: int, step: float) -> complex:
    """``r``-th derivative of an analytic ``func`` at ``lam`` by central differences.

    One Richardson level: ``(4 D(step/2) - D(step)) / 3``. Warns when the
    estimated rounding error (cancellation factor times machine epsilon)
    exceeds ``FD_ROUNDING_WARN`` relative.
    """
    if r == 0:
        return complex(func(lam))
    coarse, _, _ = _central_difference(func, lam, r, step)
    fine, size, net = _central_difference(func, lam, r, step / 2)
    if size and (not net or size / net * _EPS > FD_ROUNDING_WARN):
        estimate = size / net * _EPS if net else math.inf
        warnings.warn(f"finite difference of order {r} with step {step:g}: rounding error "
                      f"~{estimate:.1e} relative after cancellation", RuntimeWarning, stacklevel=2)
    return complex((4 * fine - coarse) / 3)


def fd_kernel_derivative(x: Vertex, xi: BoundaryRay, param: EigenParam, r: int,
                         step: Optional[float] = None) -> complex:
    """Finite-difference oracle for ``kernel_derivative`` (r <= 4)."""
    if r == 0:
        return poisson_kernel(x, xi, param)
    if r > 4:
        raise ValueError("fd_kernel_derivative supports r <= 4")
    step = default_fd_step(param.lam, param.q, r) if step is None else step
    if not 1e-7 < step < 1e-2:
        raise ValueError("finite-difference step must lie in (1e-7, 1e-2)")
    h = hor(x, xi)
    log_q = math.log(param.q)
    return fd_derivative(lambda lam: np.exp(z_from_lambda(lam, param.q) * h * log_q), param.lam, r, step)


# -- stencil oracles ------------------------------------------------------------


def stencil_power(v: BallValues, param: EigenParam, k: int) -> BallValues:
    if k > v.radius:
        raise RadiusExhaustedError(f"cannot apply the stencil {k} times to ball({v.radius})")
    for _ in range(k):
        v = apply_stencil(v, param)
    return v


def stencil_exponential(v: BallValues, param: EigenParam, t: float, terms: int) -> BallValues:
    """``sum_{k < terms} t**k / k! (P - lam I)**k v`` on ``ball(radius - terms)``."""
    if terms > v.radius:
        raise RadiusExhaustedError(f"{terms} terms need a ball of radius >= {terms}, got {v.radius}")
    out_radius = v.radius - terms
    acc = np.zeros(HomogeneousTree(v.q).ball_size(out_radius), dtype=complex)
    cur = v
    for k in range(terms):
        acc = acc + (t ** k / math.factorial(k)) * cur.restrict(out_radius).values
        if k + 1 < terms:
            cur = apply_stencil(cur, param)
    return BallValues(v.q, out_radius, acc)


def kernel_ball(xi: BoundaryRay, param: EigenParam, r: int, radius: int) -> BallValues:
    """``x -> K^(r)(x, xi | lam)`` sampled on ``ball(radius)``."""
    tree = HomogeneousTree(param.q)
    vals = [kernel_derivatives_from_hor(hor(x, xi), param, r)[r] for x in tree.ball(radius)]
    return BallValues(param.q, radius, vals)


def ball_rel_err(a: BallValues, b: BallValues, param: EigenParam,
                 reference: Optional[BallValues] = None) -> tuple:
    """Max abs error and growth-normalized relative error between two samples.

    Values at ``x`` are weighted by ``q**(-|x| Re z)`` before taking the
    max-norm ratio, which offsets the exponential growth of kernels. When
    ``b`` vanishes identically the ratio is taken against ``reference``.
    """
    if a.radius != b.radius:
        raise ValueError("samples on different balls")
    lengths = np.concatenate([np.full(HomogeneousTree(a.q).sphere_size(n), n) for n in range(a.radius + 1)])
    w = float(param.q) ** (-lengths * param.z.real)
    diff = np.abs(a.values - b.values)
    denom = float(np.max(w * np.abs(b.values)))
    if denom == 0 and reference is not None:
        denom = float(np.max(w * np.abs(reference.restrict(a.radius).values)))
    rel = float(np.max(w * diff)) / denom if denom > 0 else (0.0 if diff.max() == 0 else math.inf)
    return float(diff.max()), rel


# -- sampling -------------------------------------------------------------------


def random_ray(q: int, rng: np.random.Generator, max_prefix: int = 6) -> BoundaryRay:
    n = int(rng.integers(0, max_prefix + 1))
    word = [int(rng.integers(0, q + 1))] + [int(rng.integers(0, q)) for _ in range(n - 1)] if n else []
    return BoundaryRay(Vertex(word), int(rng.integers(0, q)))


def ray_through(x: Vertex, q: int, rng: np.random.Generator, extra: int = 3) -> BoundaryRay:
    """A random ray whose geodesic passes through ``x``."""
    word = list(x) + [int(rng.integers(0, q + 1 if not x and i == 0 else q)) for i in range(extra)]
    return BoundaryRay(Vertex(word), int(rng.integers(0, q)))


def random_complex(rng: np.random.Generator, size=None):
    return rng.normal(size=size) + 1j * rng.normal(size=size)


Z_SAMPLE_REAL = (0.55, 1.8)
Z_SAMPLE_IMAG = (-1.0, 1.0)
Z_EXCLUSION = 1e-3


def random_z(rng: np.random.Generator, size: int = 1) -> np.ndarray:
    """Spectral parameters uniform on the sampling box, kept away from z = 1/2."""
    out = []
    while len(out) < size:
        z = complex(rng.uniform(*Z_SAMPLE_REAL), rng.uniform(*Z_SAMPLE_IMAG))
        if abs(z - 0.5) > Z_EXCLUSION:
            out.append(z)
    return np.array(out)


def random_measure(q: int, rng: np.random.Generator, max_atoms: int = 3, max_depth: int = 3) -> BoundaryMeasure:
    """Random atomic-plus-cylinder measure with nonzero total variation."""
    while True:
        atoms = [(random_ray(q, rng), complex(random_complex(rng))) for _ in range(int(rng.integers(0, max_atoms + 1)))]
        sigma = BoundaryMeasure.atomic(q, atoms)
        if rng.random() < 0.5:
            d = int(rng.integers(1, max_depth + 1))
            vals = random_complex(rng, HomogeneousTree(q).sphere_size(d)) / 4
            sigma = sigma + BoundaryMeasure.cylinder(q, d, vals)
        if sigma.tv_norm() > 1e-3:
            return sigma


def random_polyfunction(param: EigenParam, order: int, rng: np.random.Generator) -> PolyFunction:
    return PolyFunction(param, tuple(random_measure(param.q, rng) for _ in range(order)))


# -- sign convention ---------------------------------------------------------------


@dataclass
class SignResolution:
    convention: str
    residual_plus: dict
    residual_alternating: dict

    def to_json(self) -> dict:
        return {
            "convention": self.convention,
            "residual_plus": {str(r): v for r, v in self.residual_plus.items()},
            "residual_alternating": {str(r): v for r, v in self.residual_alternating.items()},
        }


def resolve_sign_constant(param: EigenParam, trials: int = 10, seed: int = 0,
                          radius: int = 4, tol: float = 1e-8) -> SignResolution:
    """Decide the sign in ``(P - lam I) K^(r) = s_r K^(r-1)`` from stencil residuals.

    For r = 1, 2, 3 and ``trials`` random rays the stencil of ``K^(r)`` is
    compared with ``+r K^(r-1)`` and with ``(-1)**r r K^(r-1)``; the worst
    growth-normalized residual of each candidate is reported.
    """
    if trials < 10:
        raise ValueError("resolve_sign_constant needs trials >= 10")
    rng = np.random.default_rng(seed)
    res = {"plus": {}, "alternating": {}}
    rays = [random_ray(param.q, rng) for _ in range(trials)]
    for r in (1, 2, 3):
        worst = {"plus": 0.0, "alternating": 0.0}
        for xi in rays:
            lhs = apply_stencil(kernel_ball(xi, param, r, radius), param)
            prev = kernel_ball(xi, param, r - 1, radius - 1)
            for conv in worst:
                _, rel = ball_rel_err(lhs, prev.scaled(ladder_factor(r, conv)), param)
                worst[conv] = max(worst[conv], rel)
        for conv in worst:
            res[conv][r] = worst[conv]
    fits = [c for c in res if max(res[c].values()) < tol]
    if len(fits) != 1:
        raise AmbiguousSignError(f"no unique ladder convention fits: residuals {res}")
    return SignResolution(fits[0], res["plus"], res["alternating"])


# -- suites ----------------------------------------------------------------------------


@dataclass(frozen=True)
class Tolerances:
    exact: float = 1e-12
    eigen: float = 1e-10
    ladder: float = 1e-8
    stencil: float = 1e-9
    semigroup: float = 1e-11
    fd: float = 1e-5


@dataclass(frozen=True)
class SuiteConfig:
    qs: tuple = (2, 3)
    zs: tuple = DEFAULT_Z
    radius: int = 6
    seed: int = 0
    rays: int = 20
    n_functions: int = 50
    n_contraction: int = 200
    n_bound_functions: int = 100
    n_semigroup: int = 12
    max_order: int = 5
    semigroup_radius: int = 8
    n_random_z: int = 0
    tol: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError("suite radius must be >= 1 (the stencil needs a neighbourhood)")

    def params(self) -> list:
        """Configured parameters, plus ``n_random_z`` sampled ones per degree."""
        zs = list(self.zs)
        if self.n_random_z:
            zs += list(random_z(np.random.default_rng([self.seed, 1]), self.n_random_z))
        return [EigenParam.from_z(z, q) for q in self.qs for z in zs]


@dataclass
class CaseResult:
    id: str
    max_abs_err: float
    max_rel_err: float
    tolerance: float
    passed: bool
    note: str = ""


@dataclass
class SuiteReport:
    suite: str
    cases: list
    sign: Optional[dict] = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    def to_json(self) -> str:
        obj = {"suite": self.suite, "passed": self.passed,
               "cases": [asdict(c) for c in self.cases], "resolved_sign_constant": self.sign}
        return json.dumps(obj, sort_keys=True, indent=2)

    def to_table(self) -> str:
        lines = [f"suite {self.suite}: {'PASS' if self.passed else 'FAIL'}"]
        width = max((len(c.id) for c in self.cases), default=4)
        lines.append(f"  {'case':<{width}}  {'max_abs':>10}  {'max_rel':>10}  {'tol':>8}  result")
        for c in self.cases:
            lines.append(
                f"  {c.id:<{width}}  {c.max_abs_err:10.3e}  {c.max_rel_err:10.3e}  {c.tolerance:8.1e}  "
                f"{'pass' if c.passed else 'FAIL'}{'  ' + c.note if c.note else ''}"
            )
        if self.sign:
            lines.append(f"  ladder convention: {self.sign['convention']}")
        return "\n".join(lines)


def _tag(param: EigenParam) -> str:
    z = param.z
    zs = f"{z.real:g}" if z.imag == 0 else f"{z.real:g}{z.imag:+g}i"
    return f"q={param.q},z={zs}"


def _case(cid, abs_err, rel_err, tol, note="") -> CaseResult:
    return CaseResult(cid, float(abs_err), float(rel_err), tol, bool(rel_err <= tol), note)


def _bound_case(cid, ratios, lhs_minus_rhs, note="") -> CaseResult:
    # inequality lhs <= rhs: rel error is the worst lhs/rhs - 1 (<= 0 means it holds)
    worst = max(ratios) - 1.0 if ratios else -1.0
    over = max(lhs_minus_rhs) if lhs_minus_rhs else 0.0
    return CaseResult(cid, float(over), float(worst), 0.0, bool(over <= 0.0 or worst <= 1e-12), note)


def _functions(cfg: SuiteConfig, rng, count: int, max_order: int) -> list:
    params = cfg.params()
    out = []
    for i in range(count):
        p = params[i % len(params)]
        out.append(random_polyfunction(p, int(rng.integers(1, max_order + 1)), rng))
    return out


def _coord_distance(f: PolyFunction, g: PolyFunction) -> float:
    if f.order != g.order:
        return math.inf
    return max((linear_combination([(1, a), (-1, b)]).tv_norm() if not a == b else 0.0
                for a, b in zip(f.sigmas, g.sigmas)), default=0.0)


def suite_identities(cfg: SuiteConfig, rng) -> SuiteReport:
    tol = cfg.tol
    cases = []
    sign = None
    for p in cfg.params():
        tree = HomogeneousTree(p.q)
        tag = _tag(p)
        # P K = lam K, pointwise metric |PK - lam K| / (|lam K| + 1)
        worst_abs = worst_rel = 0.0
        for _ in range(cfg.rays):
            xi = random_ray(p.q, rng)
            kb = kernel_ball(xi, p, 0, cfg.radius + 1)
            resid = apply_stencil(kb, p).values
            here = kb.restrict(cfg.radius).values
            worst_abs = max(worst_abs, float(np.abs(resid).max()))
            worst_rel = max(worst_rel, float((np.abs(resid) / (np.abs(p.lam * here) + 1)).max()))
        cases.append(_case(f"eigenfunction[{tag}]", worst_abs, worst_rel, tol.eigen))

        res = resolve_sign_constant(p, trials=10, seed=int(rng.integers(2**31)), radius=min(cfg.radius, 5))
        if sign is None:
            sign = res.to_json()
        odd_loser = min(res.residual_alternating[r] if res.convention == "plus" else res.residual_plus[r]
                        for r in (1, 3))
        ok = res.convention == kernels.LADDER_CONVENTION and odd_loser > 1e-1
        cases.append(CaseResult(f"sign-resolution[{tag}]", 0.0,
                                max(getattr(res, f"residual_{res.convention}").values()), tol.ladder, ok,
                                f"convention={res.convention}, losing odd residual={odd_loser:.3g}"))

        ladder_radius = max(cfg.radius - 1, 1)
        worst_abs = worst_rel = 0.0
        for _ in range(max(cfg.rays // 4, 1)):
            xi = random_ray(p.q, rng)
            for r in range(1, 6):
                lhs = apply_stencil(kernel_ball(xi, p, r, ladder_radius + 1), p)
                rhs = kernel_ball(xi, p, r - 1, ladder_radius).scaled(ladder_factor(r))
                a, rel = ball_rel_err(lhs, rhs, p)
                worst_abs, worst_rel = max(worst_abs, a), max(worst_rel, rel)
        cases.append(_case(f"ladder[{tag}]", worst_abs, worst_rel, tol.ladder))

        # spherical function: the Poisson transform of nu_o
        sph = evaluate_ball(PolyFunction(p, (nu_o(1, p.q),)), ladder_radius + 1)
        spread = 0.0
        for n in range(ladder_radius + 1):
            vals = np.array([sph[x] for x in tree.sphere(n)])
            spread = max(spread, float(np.ptp(vals.real) + np.ptp(vals.imag)) / max(1.0, float(np.abs(vals).max())))
        cases.append(_case(f"spherical-radial[{tag}]", spread, spread, tol.exact))
        resid = apply_stencil(sph, p).values
        rel = float((np.abs(resid) / np.abs(p.lam * sph.restrict(ladder_radius).values)).max())
        cases.append(_case(f"spherical-eigen[{tag}]", float(np.abs(resid).max()), rel, tol.eigen))

        # jets against finite differences
        worst_abs = worst = 0.0
        for _ in range(5):
            x = tree.ball(4)[int(rng.integers(1, tree.ball_size(4)))]
            xi = ray_through(x, p.q, rng)
            jet = kernel_derivative(x, xi, p, 1)
            fd = fd_kernel_derivative(x, xi, p, 1, 1e-5)
            worst_abs, worst = max(worst_abs, abs(jet - fd)), max(worst, abs(jet - fd) / abs(jet))
        cases.append(_case(f"fd-kernel-r1[{tag}]", worst_abs, worst, 1e-6))
        zj = z_jet(p, 5).derivatives()
        worst = 0.0
        for r in range(1, 6):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                fd = fd_derivative(lambda lam: z_from_lambda(lam, p.q), p.lam, r, default_fd_step(p.lam, p.q, r))
            worst = max(worst, abs(fd - zj[r]) / abs(zj[r]))
        cases.append(_case(f"fd-z-jet[{tag}]", 0.0, worst, 1e-4))
    return SuiteReport("identities", cases, sign)


def suite_representations(cfg: SuiteConfig, rng) -> SuiteReport:
    tol = cfg.tol
    funcs = _functions(cfg, rng, cfg.n_functions, cfg.max_order)
    r5 = max(cfg.radius - 1, 0)
    worst_abs = worst_rel = 0.0
    cor_ratios, cor_over = [], []
    for f in funcs:
        bars = to_hor_representation(f)
        tree = HomogeneousTree(f.q)
        a = BallValues(f.q, r5, [evaluate_hor_representation(bars, f.param, x) for x in tree.ball(r5)])
        b = evaluate_ball(f, r5)
        ab, rel = ball_rel_err(a, b, f.param)
        worst_abs, worst_rel = max(worst_abs, ab), max(worst_rel, rel)
        if f.order >= 2:
            big_a = coeff_matrix(f.param, f.order).frobenius
            norms = [s.tv_norm() for s in f.sigmas]
            for k in range(1, f.order):
                rhs = big_a * math.sqrt(sum(v * v for v in norms[k:]))
                lhs = bars[k].tv_norm()
                cor_ratios.append(lhs / rhs)
                cor_over.append(lhs - rhs * (1 + 1e-12))
    cases = [_case("hor-representation", worst_abs, worst_rel, tol.stencil),
             _bound_case("coefficient-norm-inequality", cor_ratios, cor_over)]

    worst_abs = worst_rel = 0.0
    for f in funcs:
        v = evaluate_ball(f, cfg.radius)
        lhs = apply_stencil(v, f.param)
        rhs = evaluate_ball(apply_shifted_laplacian(f), cfg.radius - 1)
        ab, rel = ball_rel_err(lhs, rhs, f.param, reference=v)
        worst_abs, worst_rel = max(worst_abs, ab), max(worst_rel, rel)
    cases.append(_case("coordinate-stencil-commutation", worst_abs, worst_rel, tol.stencil))
    return SuiteReport("representations", cases)


def suite_norms(cfg: SuiteConfig, rng) -> SuiteReport:
    tol = cfg.tol
    cases = []
    over = []
    for f in _functions(cfg, rng, cfg.n_contraction, cfg.max_order):
        over.append(norm(apply_shifted_laplacian(f)) - norm(f))
    cases.append(CaseResult("contraction", max(over), max(over), 0.0, max(over) <= 0.0))

    funcs = _functions(cfg, rng, cfg.n_functions // 2 or 1, cfg.max_order - 1 or 1)
    exact_ok = True
    iso = 0.0
    worst_abs = worst_rel = 0.0
    r5 = max(cfg.radius - 1, 1)
    for h in funcs:
        fh = right_inverse(h)
        exact_ok &= apply_shifted_laplacian(fh) == h and fh.order == h.order + 1
        iso = max(iso, abs(norm(fh) - norm(h)) / norm(h))
        lhs = apply_stencil(evaluate_ball(fh, r5 + 1), h.param)
        ab, rel = ball_rel_err(lhs, evaluate_ball(h, r5), h.param)
        worst_abs, worst_rel = max(worst_abs, ab), max(worst_rel, rel)
    cases.append(CaseResult("right-inverse-coordinates", 0.0, 0.0 if exact_ok else math.inf, 0.0, exact_ok))
    cases.append(_case("right-inverse-isometry", iso, iso, tol.exact))
    cases.append(_case("right-inverse-stencil", worst_abs, worst_rel, tol.stencil))

    coord_ok = orbit_ok = True
    stencil_ratio = 0.0
    lower_min = math.inf
    for f in funcs + _functions(cfg, rng, 10, cfg.max_order):
        n = f.order
        coord_ok &= shifted_laplacian_power(f, n).is_zero() and not shifted_laplacian_power(f, n - 1).is_zero()
        steps = orbit(f, 0.0, n + 1, operator="shifted-laplacian")
        orbit_ok &= all(s.total_norm == 0.0 for s in steps[n:]) and all(s.total_norm > 0 for s in steps[:n])
        orbit_ok &= all(b.total_norm <= a.total_norm for a, b in zip(steps, steps[1:]))
        radius = max(cfg.radius, n)
        v = evaluate_ball(f, radius)
        stencil_ratio = max(stencil_ratio, stencil_power(v, f.param, n).max_abs() / v.max_abs())
        lower_min = min(lower_min, stencil_power(v, f.param, n - 1).max_abs())
    cases.append(CaseResult("nilpotency-coordinates", 0.0, 0.0 if coord_ok else math.inf, 0.0, coord_ok))
    cases.append(_case("nilpotency-stencil", stencil_ratio, stencil_ratio, tol.stencil))
    cases.append(CaseResult("order-detection-stencil", lower_min, lower_min, 1e-6, lower_min > 1e-6,
                            "min over functions of max|(P-lam)^(n-1) f|"))
    cases.append(CaseResult("shifted-laplacian-orbit", 0.0, 0.0 if orbit_ok else math.inf, 0.0, orbit_ok))
    return SuiteReport("norms", cases)


def suite_semigroup(cfg: SuiteConfig, rng) -> SuiteReport:
    tol = cfg.tol
    cases = []
    funcs = _functions(cfg, rng, cfg.n_semigroup, min(4, cfg.max_order))
    R = cfg.semigroup_radius
    worst_abs = worst_rel = 0.0
    for f in funcs:
        if f.order > R:
            continue
        t = float(rng.choice([-1.0, -0.5, 0.5, 1.0, 2.0]))
        lhs = stencil_exponential(evaluate_ball(f, R), f.param, t, f.order)
        rhs = evaluate_ball(heat_apply(f, t), R - f.order)
        ab, rel = ball_rel_err(lhs, rhs, f.param)
        worst_abs, worst_rel = max(worst_abs, ab), max(worst_rel, rel)
    cases.append(_case("heat-vs-stencil-exponential", worst_abs, worst_rel, tol.stencil))

    worst = 0.0
    for f in funcs:
        for s in (-0.5, 0.5, 1.0):
            for t in (-0.5, 0.5, 1.0):
                d = _coord_distance(heat_apply(heat_apply(f, s), t), heat_apply(f, s + t))
                worst = max(worst, d / norm(f))
    cases.append(_case("semigroup-law", worst, worst, tol.semigroup))

    fixed = all(heat_apply(g, t) == g for g in _functions(cfg, rng, 10, 1) for t in (-1.0, 0.3, 2.0))
    ident = all(heat_apply(f, 0.0) == f for f in funcs)
    cases.append(CaseResult("order-1-fixed-points", 0.0, 0.0 if fixed else math.inf, 0.0, fixed))
    cases.append(CaseResult("t-zero-identity", 0.0, 0.0 if ident else math.inf, 0.0, ident))
    return SuiteReport("semigroup", cases)


def suite_bounds(cfg: SuiteConfig, rng) -> SuiteReport:
    cases = []
    r5 = max(cfg.radius - 1, 0)
    ratios, over = [], []
    for p in cfg.params():
        tree = HomogeneousTree(p.q)
        rays = [random_ray(p.q, rng) for _ in range(cfg.rays)]
        for x in tree.ball(r5):
            rays_x = rays + [ray_through(x, p.q, rng)]
            for r in range(1, 6):
                lhs = max(abs(kernel_derivative(x, xi, p, r)) for xi in rays_x)
                rhs = kernel_bound(x, p, r)
                if rhs > 0:
                    ratios.append(lhs / rhs)
                over.append(lhs - rhs * (1 + 1e-12))
    cases.append(_bound_case("kernel-derivative-bound", ratios, over))

    literal_ratios, literal_over = [], []
    maj_ratios, maj_over = [], []
    root_violations = off_root_violations = off_root_points = 0
    for f in _functions(cfg, rng, cfg.n_bound_functions, cfg.max_order):
        m = f.order
        total = sum(s.tv_norm() for s in f.sigmas)
        for x in HomogeneousTree(f.q).ball(r5):
            val = abs(evaluate(f, x))
            c = bound_constant(x, f.param, m) * total
            if c > 0:
                literal_ratios.append(val / c)
            elif val > 0:
                literal_ratios.append(math.inf)
                root_violations += not x
            literal_over.append(val - c * (1 + 1e-12))
            if x:
                off_root_points += 1
                off_root_violations += literal_over[-1] > 0
            c2 = majorant_constant(x, f.param, m) * total
            maj_ratios.append(val / c2)
            maj_over.append(val - c2 * (1 + 1e-12))
    cases.append(_bound_case("pointwise-bound-C_m", literal_ratios, literal_over,
                             f"violations at the root, where C_m = 0 but f(o) = sigma_0 mass: {root_violations}; "
                             f"off the root: {off_root_violations} of {off_root_points}"))
    cases.append(_bound_case("pointwise-majorant", maj_ratios, maj_over))

    # truncations f_N of a fixed coordinate list converge pointwise as the tail norm shrinks
    p = max(cfg.params(), key=lambda e: spectrum_distance(e.lam, e.q))
    K = 8
    sigmas = []
    for k in range(K):
        s = random_measure(p.q, rng)
        sigmas.append(s.scaled(0.1 ** k / (math.factorial(k) * s.tv_norm())))
    full = PolyFunction(p, tuple(sigmas))
    ball = HomogeneousTree(p.q).ball(min(4, r5))
    fvals = np.array([evaluate(full, x) for x in ball])
    errs, tails = [], []
    for N in range(1, K + 1):
        fN = PolyFunction(p, tuple(sigmas[:N]))
        errs.append(float(np.abs(np.array([evaluate(fN, x) for x in ball]) - fvals).max()))
        # sup over the ball of sum_{k >= N} max_xi |K^(k)(x, xi)| * ||sigma_k||
        tails.append(max(sum(kernel_bound(x, p, k) * sigmas[k].tv_norm() for k in range(N, K)) for x in ball))
    dominated = all(e <= t * (1 + 1e-9) for e, t in zip(errs, tails))
    shrinking = all(b <= a for a, b in zip(tails, tails[1:])) and errs[-1] == 0.0
    ratio = max((e / t for e, t in zip(errs, tails) if t > 0), default=0.0)
    cases.append(CaseResult("cauchy-truncation", errs[0], ratio, 1.0, dominated and shrinking,
                            "max_x |f_N - f| <= decreasing tail bound; errors "
                            + ", ".join(f"{e:.2e}" for e in errs)))
    return SuiteReport("bounds", cases)


SUITES = {
    "identities": suite_identities,
    "representations": suite_representations,
    "norms": suite_norms,
    "semigroup": suite_semigroup,
    "bounds": suite_bounds,
}


def run_suite(name: str, config: Optional[SuiteConfig] = None) -> SuiteReport:
    """Run one invariant battery; deterministic for a fixed ``config.seed``."""
    if name not in SUITES:
        raise UnknownSuiteError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    config = SuiteConfig() if config is None else config
    rng = np.random.default_rng(config.seed)
    return SUITES[name](config, rng)
