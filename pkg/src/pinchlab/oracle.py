"""Independent numeric oracles.

Everything here is floating point and deliberately separate from the exact
pipeline: contour integrals for the residue kernel, radial quadrature for the
Morse integral, Feynman-parameter and residue-reduced quadrature for the
one-loop bubble, and a seeded Monte Carlo for the reduced two-loop QED
integral.  Power laws are read off with log-log least squares.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate

from .errors import (
    ContourAmbiguous,
    DegenerateSamples,
    InsufficientSamples,
    NonConvergent,
    NotPositiveDefinite,
    PoleAtPoint,
)

#: r^2 a power law must reach before it counts as a fit (also the bar for slopes)
POWER_LAW_R2 = 0.999
#: r^2 required of the a + b log(eps) fit in logarithmic cases
LOG_FIT_R2 = 0.99


@dataclass
class OracleConfig:
    """Numeric knobs; the CLI and TOML config map onto these fields."""

    seed: int = 0
    samples: int = 1_000_000
    block_size: int = 100_000
    theta: float = math.pi / 2
    eps_min: float = 1e-4
    eps_max: float = 1e-1
    n_eps: int = 9
    cutoff: float = 1.0
    n_points: int = 512
    tolerance: float = 0.05

    def eps_grid(self) -> list[float]:
        return list(np.geomspace(self.eps_max, self.eps_min, self.n_eps))

    def to_dict(self) -> dict:
        return asdict(self)


# -- fits ---------------------------------------------------------------------

@dataclass
class SlopeFit:
    samples: list
    slope: float
    intercept: float
    r_squared: float

    def to_dict(self) -> dict:
        return {
            "kind": "power",
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "samples": [[e, _jsonable(v)] for e, v in self.samples],
        }


@dataclass
class LogFit:
    """value ~ a + b log(eps), complex least squares."""

    samples: list
    a: complex
    b: complex
    r_squared: float

    def accepted(self, threshold: float = LOG_FIT_R2) -> bool:
        return abs(self.b) > 0 and self.r_squared >= threshold

    def to_dict(self) -> dict:
        return {
            "kind": "log",
            "a": _jsonable(self.a),
            "b": _jsonable(self.b),
            "r_squared": self.r_squared,
            "samples": [[e, _jsonable(v)] for e, v in self.samples],
        }


def _jsonable(v):
    v = complex(v)
    return v.real if v.imag == 0 else [v.real, v.imag]


def _check_samples(samples) -> tuple[np.ndarray, np.ndarray]:
    if len(samples) < 5:
        raise DegenerateSamples(f"need at least 5 samples, got {len(samples)}")
    eps = np.array([float(e) for e, _ in samples])
    vals = np.array([complex(v) for _, v in samples])
    if np.any(eps <= 0) or np.any(~np.isfinite(eps)):
        raise DegenerateSamples("eps values must be positive and finite")
    if np.any(np.diff(eps) >= 0):
        raise DegenerateSamples("eps values must be strictly decreasing")
    if eps[0] / eps[-1] < 100 * (1 - 1e-12):
        raise DegenerateSamples("eps values must span at least two decades")
    if np.any(vals == 0) or np.any(~np.isfinite(vals)):
        raise DegenerateSamples("values must be finite and nonzero")
    return eps, vals


def _r_squared(y, fitted) -> float:
    ss_res = float(np.sum(np.abs(y - fitted) ** 2))
    ss_tot = float(np.sum(np.abs(y - np.mean(y)) ** 2))
    if ss_tot == 0:
        return 1.0 if ss_res == 0 else 0.0
    return min(1.0, max(0.0, 1.0 - ss_res / ss_tot))


def fit_slope(samples) -> SlopeFit:
    """Least-squares line through (log eps, log|value|)."""
    eps, vals = _check_samples(samples)
    x, y = np.log(eps), np.log(np.abs(vals))
    slope, intercept = np.polyfit(x, y, 1)
    return SlopeFit(list(samples), float(slope), float(intercept), _r_squared(y, slope * x + intercept))


def fit_log(samples) -> LogFit:
    eps, vals = _check_samples(samples)
    x = np.log(eps)
    A = np.stack([np.ones_like(x), x], axis=1).astype(complex)
    (a, b), *_ = np.linalg.lstsq(A, vals, rcond=None)
    return LogFit(list(samples), complex(a), complex(b), _r_squared(vals, a + b * x))


# -- residue kernel ----------------------------------------------------------

def residue_kernel(xi: complex, eta: complex, contour_radius: float | None = None, n_points: int = 512) -> complex:
    """Trapezoidal contour integral of 1/((z+xi)(z+eta)) around -xi.

    The circle is traversed clockwise, which is the orientation that returns
    +2 pi i / (xi - eta).  Default radius is half the pole separation.
    """
    xi, eta = complex(xi), complex(eta)
    sep = abs(xi - eta)
    if sep < 1e-12 * (abs(xi) + abs(eta)) or sep == 0:
        raise ContourAmbiguous("coincident poles: the contour cannot separate -xi from -eta")
    r = sep / 2 if contour_radius is None else float(contour_radius)
    if not 0 < r < sep:
        raise ContourAmbiguous(f"radius {r} does not enclose -xi while excluding -eta (separation {sep})")
    if n_points < 3:
        raise ValueError("n_points must be at least 3")
    phi = 2 * np.pi * np.arange(n_points) / n_points
    w = r * np.exp(-1j * phi)  # z + xi, clockwise
    z = w - xi
    dz = -1j * w * (2 * np.pi / n_points)
    return complex(np.sum(dz / (w * (z + eta))))


def residue_kernel_exact(xi: complex, eta: complex) -> complex:
    return 2j * math.pi / (complex(xi) - complex(eta))


# -- Morse integral ----------------------------------------------------------

def sphere_area(n: int) -> float:
    """Volume of the unit (n-1)-sphere in R^n (2 for n = 1)."""
    return 2 * math.pi ** (n / 2) / math.gamma(n / 2)


def _whiten(Q) -> tuple[int, float]:
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    n = Q.shape[0]
    if Q.shape != (n, n) or not np.allclose(Q, Q.T, rtol=1e-12, atol=1e-14):
        raise NotPositiveDefinite("Q must be a symmetric square matrix")
    if not 1 <= n <= 5:
        raise ValueError(f"Morse integral implemented for 1 <= n <= 5, got n = {n}")
    ev = np.linalg.eigvalsh(Q)
    if ev.min() <= 1e-12 * max(1.0, abs(ev.max())):
        raise NotPositiveDefinite(f"smallest eigenvalue {ev.min():.3e} is not positive")
    return n, float(np.prod(ev))


def _radial(n: int, eps: float, R: float) -> float:
    f = lambda r: r ** (n - 1) / (eps + r * r)
    cut = min(math.sqrt(eps), R)
    a, _ = integrate.quad(f, 0.0, cut, epsabs=0.0, epsrel=1e-13, limit=200)
    b, _ = integrate.quad(f, cut, R, epsabs=0.0, epsrel=1e-13, limit=200) if cut < R else (0.0, 0.0)
    return a + b


def morse_integral(Q, eps: float, cutoff: float = 1.0) -> float:
    """Integral of 1/(eps + y^T Q y) over the ellipsoid y^T Q y <= cutoff^2.

    Diagonalizing Q and rescaling to the unit ball turns this into
    S_{n-1} / sqrt(det Q) times a one-dimensional radial integral.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    n, detq = _whiten(Q)
    return sphere_area(n) / math.sqrt(detq) * _radial(n, float(eps), float(cutoff))


def morse_regular_part(Q, eps: float, cutoff: float = 1.0) -> float:
    """The part of morse_integral that is a power series in eps.

    Expanding r^{n-1}/(eps + r^2) in eps / r^2 and integrating termwise gives
    sum_j (-eps)^j R^{n-2-2j} / (n-2-2j); the term with n-2-2j = 0 (even n)
    is (-eps)^j log R.  Whatever the series misses is the singular part.
    """
    n, detq = _whiten(Q)
    R = float(cutoff)
    if eps >= R * R / 4:
        raise NonConvergent("eps must stay below cutoff^2 / 4 for the regular series")
    total, j = 0.0, 0
    while True:
        p = n - 2 - 2 * j
        term = (-eps) ** j * (math.log(R) if p == 0 else R ** p / p)
        total += term
        if j > 2 and abs(term) <= 1e-17 * max(1.0, abs(total)):
            break
        j += 1
        if j > 400:
            raise NonConvergent("regular series did not converge")
    return sphere_area(n) / math.sqrt(detq) * total


def morse_singular_part(Q, eps: float, cutoff: float = 1.0) -> float:
    return morse_integral(Q, eps, cutoff) - morse_regular_part(Q, eps, cutoff)


def lemma2_coefficient(Q) -> float:
    """Stated Morse coefficient V_{n-1}(1) / sqrt(det Q)."""
    n, detq = _whiten(Q)
    return sphere_area(n) / math.sqrt(detq)


def morse_exact_coefficient(Q) -> float:
    """Coefficient of eps^{n/2-1} (odd n) or eps^{n/2-1} log eps (even n) in the singular part."""
    n, detq = _whiten(Q)
    if n % 2:
        return math.pi ** (n / 2) * math.gamma(1 - n / 2) / math.sqrt(detq)
    j0 = (n - 2) // 2
    return (-1) ** (j0 + 1) * sphere_area(n) / (2 * math.sqrt(detq))


@dataclass
class MorseScan:
    n: int
    exponent: float
    fit: SlopeFit | LogFit
    power_fit: SlopeFit | None
    coefficient: float
    stated_coefficient: float
    exact_coefficient: float
    log_divided: bool = False

    @property
    def slope_error(self) -> float | None:
        return abs(self.fit.slope - self.exponent) if isinstance(self.fit, SlopeFit) else None

    @property
    def coefficient_ratio(self) -> float:
        return self.coefficient / self.stated_coefficient

    def to_dict(self) -> dict:
        d = {
            "n": self.n,
            "predicted_exponent": self.exponent,
            "fit": self.fit.to_dict(),
            "coefficient": self.coefficient,
            "stated_coefficient": self.stated_coefficient,
            "exact_coefficient": self.exact_coefficient,
            "log_divided": self.log_divided,
        }
        if self.power_fit is not None:
            d["power_fit_r_squared"] = self.power_fit.r_squared
        return d


def morse_scan(Q, eps_values=None, cutoff: float = 1.0) -> MorseScan:
    """Fit the singular part of the Morse integral against eps.

    Odd n: plain power law.  n = 4: the singular part is c * eps * log(eps),
    so the slope is read from (singular / log eps).  n = 2: the exponent is
    zero and K itself is fitted to a + b log eps; the pure power-law fit is
    kept for comparison.
    """
    n, _ = _whiten(Q)
    eps_values = list(np.geomspace(1e-1, 1e-4, 10)) if eps_values is None else list(eps_values)
    nu = n / 2 - 1
    stated = lemma2_coefficient(Q)
    exact = morse_exact_coefficient(Q)
    if n == 2:
        vals = [(e, morse_integral(Q, e, cutoff)) for e in eps_values]
        lf = fit_log(vals)
        # b multiplies log eps; the singular part is b log eps
        return MorseScan(n, nu, lf, fit_slope(vals), float(lf.b.real), stated, exact, log_divided=True)
    sing = [(e, morse_singular_part(Q, e, cutoff)) for e in eps_values]
    if n % 2 == 0:
        scaled = [(e, v / math.log(e)) for e, v in sing]
        sf = fit_slope(scaled)
        coef = float(np.median([v / e ** nu for e, v in scaled]))
        return MorseScan(n, nu, sf, None, coef, stated, exact, log_divided=True)
    sf = fit_slope(sing)
    coef = float(np.median([v / e ** nu for e, v in sing]))
    return MorseScan(n, nu, sf, None, coef, stated, exact)


# -- one-loop bubble ---------------------------------------------------------

def _cquad(f, a: float, b: float, points=None) -> complex:
    val, _ = integrate.quad(f, a, b, complex_func=True, points=points, epsabs=0.0, epsrel=1e-11, limit=400)
    return complex(val)


def _bubble_pre(s, m0_sq, m1_sq, d):
    if d not in (3, 5):
        raise NonConvergent(f"bubble oracle supports odd d in {{3, 5}}, got d = {d}")
    s = complex(s)
    if s == 0:
        raise PoleAtPoint("pinch point alpha = -(s + m0^2 - m1^2)/(2s) has a pole at s = 0")
    if m0_sq <= 0 or m1_sq <= 0:
        raise ValueError("bubble oracle needs positive masses")
    return s


def _delta(x, s, m0_sq, m1_sq):
    return x * (1 - x) * s + x * m1_sq + (1 - x) * m0_sq


def bubble_direct(s: complex, m0_sq: float, m1_sq: float, d: int) -> complex:
    """Feynman-parameter form pi^{d/2} Gamma(2-d/2) int_0^1 Delta^{d/2-2} dx.

    For d = 5 this is the analytic continuation in d; the momentum-space
    integral itself is UV divergent there.
    """
    s = _bubble_pre(s, m0_sq, m1_sq, d)
    k = d / 2 - 2
    # the near-zero of Delta sits at the vertex of the parabola
    xv = 0.5 + (m1_sq - m0_sq) / (2 * s) if s != 0 else 0.5
    xv = xv.real if isinstance(xv, complex) else xv
    pts = [xv] if 0 < xv < 1 else None
    val = _cquad(lambda x: _delta(x, s, m0_sq, m1_sq) ** k, 0.0, 1.0, pts)
    return math.pi ** (d / 2) * math.gamma(2 - d / 2) * val


def bubble_reduced(s: complex, m0_sq: float, m1_sq: float, d: int) -> complex:
    """Residue route: close the parallel contour, then integrate q_perp radially.

    The sum of the two upper-half-plane residues is analytic in P = sqrt(s),
    which continues the formula off the real s axis.
    """
    s = _bubble_pre(s, m0_sq, m1_sq, d)
    if d >= 4:
        raise NonConvergent(f"two propagators do not make the d = {d} momentum integral converge")
    P = cmath.sqrt(s)

    def R(rho):
        a = math.sqrt(rho * rho + m0_sq)
        b = math.sqrt(rho * rho + m1_sq)
        r1 = 1 / (2j * a * ((1j * a + P) ** 2 + b * b))
        r2 = 1 / (2j * b * ((-P + 1j * b) ** 2 + a * a))
        return 2j * math.pi * (r1 + r2)

    n = d - 1
    f = lambda rho: rho ** (n - 1) * R(rho)
    val = _cquad(f, 0.0, 1.0) + _cquad(lambda u: f(1 / u) / (u * u), 0.0, 1.0)
    return sphere_area(n) * val


def bubble_numeric(s: complex, m0_sq: float, m1_sq: float, d: int, path: str = "direct") -> complex:
    if path == "direct":
        return bubble_direct(s, m0_sq, m1_sq, d)
    if path == "reduced":
        return bubble_reduced(s, m0_sq, m1_sq, d)
    raise ValueError(f"unknown path {path!r}")


def bubble_threshold(m0_sq: float, m1_sq: float) -> float:
    """Euclidean normal threshold s* = -(m0 + m1)^2."""
    return -(math.sqrt(m0_sq) + math.sqrt(m1_sq)) ** 2


def bubble_variation(s: complex, m0_sq: float, m1_sq: float, d: int) -> complex:
    """Integral over the vanishing cycle: the jump of the Feynman-parameter form
    when s circles the threshold once.

    The two zeros of Delta(x) pinch as s -> s*; the variation is twice the
    integral between them, computed as a quadrature on x = c + w cos(phi).
    It carries the whole non-analytic part, without the log factor that
    integer exponents produce.
    """
    s = _bubble_pre(s, m0_sq, m1_sq, d)
    k = d / 2 - 2
    # Delta(x) = -s x^2 + (s + m1^2 - m0^2) x + m0^2
    c = (s + m1_sq - m0_sq) / (2 * s)
    w = cmath.sqrt(c * c + m0_sq / s)
    sw2 = s * w * w
    root = sw2 ** k
    val = _cquad(lambda phi: root * math.sin(phi) ** (2 * k) * w * math.sin(phi), 0.0, math.pi)
    return 2 * math.pi ** (d / 2) * math.gamma(2 - d / 2) * val


@dataclass
class BubbleScan:
    d: int
    predicted_exponent: float
    s_star: float
    theta: float
    values: list
    fit: SlopeFit | LogFit
    logarithmic: bool
    variation_fit: SlopeFit | None = None

    def passed(self, tol: float = 0.05) -> bool:
        if self.logarithmic:
            return isinstance(self.fit, LogFit) and self.fit.accepted()
        return abs(self.fit.slope - self.predicted_exponent) <= tol and self.fit.r_squared >= POWER_LAW_R2

    def to_dict(self) -> dict:
        d = {
            "d": self.d,
            "predicted_exponent": self.predicted_exponent,
            "s_star": self.s_star,
            "theta": self.theta,
            "logarithmic": self.logarithmic,
            "fit": self.fit.to_dict(),
        }
        if self.variation_fit is not None:
            d["variation_fit"] = self.variation_fit.to_dict()
        return d


def bubble_scan(m0_sq: float, m1_sq: float, d: int, eps_values=None, theta: float = math.pi / 2) -> BubbleScan:
    """Approach s* along s = s* + eps e^{i theta}.

    nu = (d-1)/2 - 1.  For nu = 0 the values themselves are fitted to
    a + b log eps.  Otherwise the slope comes from the vanishing-cycle
    variation, which isolates the non-analytic part.
    """
    s_star = bubble_threshold(m0_sq, m1_sq)
    eps_values = list(np.geomspace(1e-1, 1e-4, 9)) if eps_values is None else list(eps_values)
    nu = (d - 1) / 2 - 1
    pts = [s_star + e * cmath.exp(1j * theta) for e in eps_values]
    values = [(e, bubble_direct(s, m0_sq, m1_sq, d)) for e, s in zip(eps_values, pts)]
    var = [(e, bubble_variation(s, m0_sq, m1_sq, d)) for e, s in zip(eps_values, pts)]
    if nu == 0:
        return BubbleScan(d, nu, s_star, theta, values, fit_log(values), True, fit_slope(var))
    return BubbleScan(d, nu, s_star, theta, var, fit_slope(var), False)


# -- reduced two-loop QED integral -------------------------------------------

@dataclass
class MCResult:
    value: float
    stderr: float
    samples: int
    seed: int
    e_l: float

    def to_dict(self) -> dict:
        return asdict(self)


def _qed_block(rng: np.random.Generator, m: int) -> np.ndarray:
    """Antithetic pairs of weights for unit e_l; returns pair means."""
    u = rng.random((m, 2))
    ang = rng.random((m, 2)) * 2 * np.pi
    out = np.empty((2, m))
    for k, (uu, aa) in enumerate(((u, ang), (1.0 - u, ang + np.pi))):
        uu = np.clip(uu, 1e-300, 1.0 - 1e-16)
        t2 = uu / (1.0 - uu)  # |t|^2 under density (1/pi)/(1+t^2)^2
        t = np.sqrt(t2)
        x, y = t * np.cos(aa), t * np.sin(aa)
        sep2 = (x[:, 0] - x[:, 1]) ** 2 + (y[:, 0] - y[:, 1]) ** 2
        out[k] = np.pi ** 2 * (1 + t2[:, 0]) * (1 + t2[:, 1]) / sep2
    return 0.5 * (out[0] + out[1])


def qed_reduced_numeric(e_l: float, d: int = 3, samples: int = 1_000_000, seed: int = 0,
                        block_size: int = 100_000, check: bool = True) -> MCResult:
    """Monte Carlo for int d^2s1 d^2s2 / |s1-s2|^2 / ((e_l+s1^2)(e_l+s2^2)).

    Constant prefactors (photon and external propagators) are dropped.  Each
    s_i is drawn from the density (e_l/pi)/(e_l+s^2)^2 via s = sqrt(e_l) t,
    so every e_l shares the same random numbers.  Samples are processed in
    seed-indexed blocks and reduced in a fixed order.
    """
    if d != 3:
        raise ValueError("qed_reduced_numeric is defined for d = 3 only")
    if not e_l > 0:
        raise ValueError("e_l must be positive")
    if samples < 4 or samples > 10_000_000:
        raise ValueError("samples must lie in [4, 1e7]")
    pairs = samples // 2
    nblocks = -(-pairs // block_size)
    children = np.random.SeedSequence(seed).spawn(nblocks)
    s1 = s2 = 0.0
    done = 0
    for child in children:
        m = min(block_size, pairs - done)
        w = _qed_block(np.random.Generator(np.random.PCG64(child)), m)
        s1 += float(np.sum(w))
        s2 += float(np.sum(w * w))
        done += m
    mean = s1 / pairs
    var = max(s2 / pairs - mean * mean, 0.0)
    se = math.sqrt(var / pairs)
    res = MCResult(mean / e_l, se / e_l, 2 * pairs, seed, e_l)
    if check and se > 0.1 * abs(mean):
        raise InsufficientSamples(f"standard error {se / e_l:.3e} exceeds 10% of the estimate {mean / e_l:.3e}")
    return res


@dataclass
class QedScan:
    results: list
    fit: SlopeFit
    predicted: float = -1.0

    def to_dict(self) -> dict:
        return {"predicted_exponent": self.predicted, "fit": self.fit.to_dict(),
                "results": [r.to_dict() for r in self.results]}


def qed_scan(e_values=None, samples: int = 1_000_000, seed: int = 0) -> QedScan:
    e_values = list(np.geomspace(1e-1, 1e-3, 7)) if e_values is None else list(e_values)
    res = [qed_reduced_numeric(e, 3, samples, seed) for e in e_values]
    return QedScan(res, fit_slope([(r.e_l, r.value) for r in res]))


# -- self tests (the `oracle` command) ----------------------------------------

@dataclass
class SelfTest:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, **self.detail}


def residue_selftest(n_pairs: int = 100, seed: int = 0, n_points: int = 512) -> SelfTest:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_pairs):
        xi = complex(*rng.uniform(-5, 5, 2))
        while True:
            eta = complex(*rng.uniform(-5, 5, 2))
            if abs(xi - eta) > 1.0:
                break
        got = residue_kernel(xi, eta, n_points=n_points)
        want = residue_kernel_exact(xi, eta)
        worst = max(worst, abs(got - want) / abs(want))
    return SelfTest("residue_kernel", worst < 1e-8, {"pairs": n_pairs, "max_rel_error": worst})


def random_spd(n: int, rng: np.random.Generator) -> np.ndarray:
    A = rng.normal(size=(n, n))
    return A @ A.T + n * np.eye(n)


def morse_selftest(seed: int = 0, tol: float = 0.02, dims=(1, 3, 4, 5)) -> list[SelfTest]:
    rng = np.random.default_rng(seed)
    out = []
    for n in dims:
        for label, Q in [("identity", np.eye(n)), ("spd1", random_spd(n, rng)), ("spd2", random_spd(n, rng))]:
            sc = morse_scan(Q)
            ok = sc.slope_error is not None and sc.slope_error <= tol
            out.append(SelfTest(f"morse n={n} {label}", ok, {
                "slope": sc.fit.slope, "predicted": sc.exponent,
                "coefficient_ratio_to_stated": sc.coefficient_ratio,
                "coefficient_ratio_to_exact": sc.coefficient / sc.exact_coefficient,
            }))
    return out
