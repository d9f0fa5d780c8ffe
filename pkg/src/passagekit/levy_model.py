"""Parametric subordinators and their exponent-level functionals.

A subordinator is described by a drift ``b >= 0`` and a Levy measure on
``(0, inf)``. Three measure families are supported, each with closed forms for
the Laplace exponent, its derivatives, the tail and the truncated moments:

* ``Stable(alpha, s)``: ``psi_*(lam) = s * lam**alpha``
* ``Gamma(a, theta)``: ``psi_*(lam) = a * log(1 + lam/theta)``
* ``CompoundPoissonExp(rate, eta)``: ``psi_*(lam) = rate * lam / (lam + eta)``

``psi = b*lam + psi_*`` throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import BranchError, DomainError
from .quadrature import half_line, tanh_sinh

__all__ = [
    "Subordinator",
    "SubordinatorSpec",
    "Stable",
    "Gamma",
    "CompoundPoissonExp",
    "stable_half",
    "ExponentValues",
    "TailRatios",
    "tail",
    "truncated_moment",
    "psi_suite",
    "ratio_suite",
    "q_from_tail_integral",
    "psi_complex",
    "psi_star_from_tail",
    "InequalityReport",
    "exponent_inequalities",
]


@dataclass(frozen=True)
class Subordinator:
    """Common interface; concrete models override the ``_``-free hooks."""

    drift_b: float = field(default=0.0, kw_only=True)

    kind = "abstract"
    non_lattice = True

    def __post_init__(self):
        if not (self.drift_b >= 0.0 and math.isfinite(self.drift_b)):
            raise DomainError(f"drift must be finite and >= 0, got {self.drift_b}")

    # --- hooks -----------------------------------------------------------
    def psi_star(self, u):
        raise NotImplementedError

    def psi_star_prime(self, u):
        raise NotImplementedError

    def sigma2(self, u):
        """``int y^2 e^{-uy} Pi(dy)``, equal to ``-psi''(u)``."""
        raise NotImplementedError

    def third_moment(self, u):
        """``int y^3 e^{-uy} Pi(dy)``, equal to ``psi'''(u)``."""
        raise NotImplementedError

    def H(self, u):
        """``psi(u) - u psi'(u)``; the drift cancels."""
        raise NotImplementedError

    def tail(self, x):
        raise NotImplementedError

    def truncated_moment(self, k, x):
        raise NotImplementedError

    def levy_density(self, y):
        raise NotImplementedError

    def psi_star_complex(self, w):
        raise NotImplementedError

    @property
    def jump_mean(self):
        raise NotImplementedError

    # --- derived ---------------------------------------------------------
    @property
    def mean_mu(self):
        return self.drift_b + self.jump_mean

    def psi(self, u):
        return self.drift_b * u + self.psi_star(u)

    def psi_prime(self, u):
        return self.drift_b + self.psi_star_prime(u)

    def render(self):
        body = ",".join(f"{k}={v!r}" for k, v in self._params().items())
        return f"{self.kind}:{body},b={self.drift_b!r}"

    def _params(self):
        raise NotImplementedError


SubordinatorSpec = Subordinator


@dataclass(frozen=True)
class Stable(Subordinator):
    alpha: float
    s: float = 1.0

    kind = "stable"

    def __post_init__(self):
        super().__post_init__()
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0,1), got {self.alpha}")
        if not self.s > 0.0:
            raise DomainError(f"scale s must be > 0, got {self.s}")

    @property
    def _c(self):
        # Levy density is _c * y**(-1-alpha)
        return self.s * self.alpha / math.gamma(1.0 - self.alpha)

    def _params(self):
        return {"alpha": self.alpha, "s": self.s}

    def psi_star(self, u):
        return self.s * np.power(u, self.alpha)

    def psi_star_prime(self, u):
        return self.s * self.alpha * np.power(u, self.alpha - 1.0)

    def sigma2(self, u):
        a = self.alpha
        return self.s * a * (1.0 - a) * np.power(u, a - 2.0)

    def third_moment(self, u):
        a = self.alpha
        return self.s * a * (1.0 - a) * (2.0 - a) * np.power(u, a - 3.0)

    def H(self, u):
        return self.s * (1.0 - self.alpha) * np.power(u, self.alpha)

    def tail(self, x):
        return self.s * np.power(x, -self.alpha) / math.gamma(1.0 - self.alpha)

    def truncated_moment(self, k, x):
        return self._c * np.power(x, k - self.alpha) / (k - self.alpha)

    def levy_density(self, y):
        return self._c * np.power(y, -1.0 - self.alpha)

    def psi_star_complex(self, w):
        return self.s * np.power(np.asarray(w, dtype=complex), self.alpha)

    @property
    def jump_mean(self):
        return math.inf


@dataclass(frozen=True)
class Gamma(Subordinator):
    a: float
    theta: float = 1.0

    kind = "gamma"

    def __post_init__(self):
        super().__post_init__()
        if not (self.a > 0.0 and self.theta > 0.0):
            raise DomainError(f"gamma parameters must be > 0, got a={self.a}, theta={self.theta}")

    def _params(self):
        return {"a": self.a, "theta": self.theta}

    def psi_star(self, u):
        return self.a * np.log1p(np.asarray(u) / self.theta)

    def psi_star_prime(self, u):
        return self.a / (self.theta + np.asarray(u))

    def sigma2(self, u):
        return self.a / (self.theta + np.asarray(u)) ** 2

    def third_moment(self, u):
        return 2.0 * self.a / (self.theta + np.asarray(u)) ** 3

    def H(self, u):
        v = np.asarray(u, dtype=float) / self.theta
        direct = np.log1p(v) - v / (1.0 + v)
        # log1p(v) - v/(1+v) = sum_{k>=2} (-1)^k (k-1)/k v^k
        series = v * v * (0.5 - v * (2.0 / 3.0 - v * (0.75 - v * 0.8)))
        return self.a * np.where(v < 1e-3, series, direct)

    def tail(self, x):
        return self.a * special.exp1(self.theta * np.asarray(x))

    def truncated_moment(self, k, x):
        return self.a * math.gamma(k) * special.gammainc(k, self.theta * np.asarray(x)) / self.theta**k

    def levy_density(self, y):
        y = np.asarray(y)
        return self.a * np.exp(-self.theta * y) / y

    def psi_star_complex(self, w):
        return self.a * np.log1p(np.asarray(w, dtype=complex) / self.theta)

    @property
    def jump_mean(self):
        return self.a / self.theta


@dataclass(frozen=True)
class CompoundPoissonExp(Subordinator):
    rate: float
    eta: float = 1.0

    kind = "cpexp"

    def __post_init__(self):
        super().__post_init__()
        if not (self.rate > 0.0 and self.eta > 0.0):
            raise DomainError(f"cpexp parameters must be > 0, got rate={self.rate}, eta={self.eta}")

    def _params(self):
        return {"rate": self.rate, "eta": self.eta}

    def psi_star(self, u):
        u = np.asarray(u)
        return self.rate * u / (u + self.eta)

    def psi_star_prime(self, u):
        return self.rate * self.eta / (np.asarray(u) + self.eta) ** 2

    def sigma2(self, u):
        return 2.0 * self.rate * self.eta / (np.asarray(u) + self.eta) ** 3

    def third_moment(self, u):
        return 6.0 * self.rate * self.eta / (np.asarray(u) + self.eta) ** 4

    def H(self, u):
        u = np.asarray(u)
        return self.rate * (u / (u + self.eta)) ** 2

    def tail(self, x):
        return self.rate * np.exp(-self.eta * np.asarray(x))

    def truncated_moment(self, k, x):
        return self.rate * math.gamma(k + 1) * special.gammainc(k + 1, self.eta * np.asarray(x)) / self.eta**k

    def levy_density(self, y):
        return self.rate * self.eta * np.exp(-self.eta * np.asarray(y))

    def psi_star_complex(self, w):
        w = np.asarray(w, dtype=complex)
        return self.rate * w / (w + self.eta)

    @property
    def jump_mean(self):
        return self.rate / self.eta


def stable_half(drift_b=0.0):
    """Stable(1/2) normalised so that ``f_t(x) = t (2 pi x^3)^{-1/2} exp(-t^2/2x)``."""
    return Stable(alpha=0.5, s=math.sqrt(2.0), drift_b=drift_b)


# ---------------------------------------------------------------------------
# value bundles


@dataclass(frozen=True)
class ExponentValues:
    u: float
    psi: float
    psi_star: float
    psi_prime: float
    sigma2: float
    H: float


@dataclass(frozen=True)
class TailRatios:
    x: float
    tail: float
    K: float
    Q: float
    Q_identity: float


def _check_positive(name, value):
    if not (value > 0.0):
        raise DomainError(f"{name} must be > 0, got {value}")


def tail(spec, x):
    """Levy tail ``Pi(x, inf)``."""
    _check_positive("x", x)
    return float(spec.tail(x))


def truncated_moment(spec, k, x, method="closed"):
    """``int_0^x y^k Pi(dy)`` for ``k`` in 1, 2, 3; ``x`` may be ``inf`` when finite.

    ``method="quad"`` integrates the Levy density with tanh-sinh instead of
    using the closed form; it exists as an independent cross-check.
    """
    if k not in (1, 2, 3):
        raise DomainError(f"k must be 1, 2 or 3, got {k}")
    _check_positive("x", x)
    if method == "closed":
        if math.isinf(x):
            return _full_moment(spec, k)
        return float(spec.truncated_moment(k, x))
    if method == "quad":
        integrand = lambda y: np.power(y, k) * spec.levy_density(y)  # noqa: E731
        if math.isinf(x):
            return float(half_line(integrand, 0.0, scale=1.0, rtol=1e-12))
        return float(tanh_sinh(integrand, 0.0, x, rtol=1e-12))
    raise DomainError(f"unknown method {method!r}")


def _full_moment(spec, k):
    if isinstance(spec, Gamma):
        return spec.a * math.gamma(k) / spec.theta**k
    if isinstance(spec, CompoundPoissonExp):
        return spec.rate * math.gamma(k + 1) / spec.eta**k
    return math.inf


def psi_suite(spec, u):
    """Exponent, driftless exponent, derivative, ``sigma^2`` and ``H`` at ``u``."""
    _check_positive("u", u)
    u = float(u)
    ps = float(spec.psi_star(u))
    return ExponentValues(
        u=u,
        psi=spec.drift_b * u + ps,
        psi_star=ps,
        psi_prime=float(spec.psi_prime(u)),
        sigma2=float(spec.sigma2(u)),
        H=float(spec.H(u)),
    )


def q_from_tail_integral(spec, x):
    """``Q(x) = 2 x^-2 int_0^x y Pi(y, inf) dy`` by quadrature."""
    _check_positive("x", x)
    integral = tanh_sinh(lambda y: y * spec.tail(y), 0.0, x, rtol=1e-13)
    return 2.0 * float(integral) / (x * x)


def ratio_suite(spec, x):
    """Tail, ``K(x) = x^-2 int_0^x y^2 Pi(dy)`` and ``Q = tail + K``.

    ``Q_identity`` is the same quantity computed from the tail integral, so
    ``Q`` and ``Q_identity`` are two independent routes to one number.
    """
    _check_positive("x", x)
    t = float(spec.tail(x))
    k = float(spec.truncated_moment(2, x)) / (x * x)
    return TailRatios(x=float(x), tail=t, K=k, Q=t + k, Q_identity=q_from_tail_integral(spec, x))


def psi_complex(spec, lam, z):
    """``psi(lam - i z)`` on the principal branch (``Re >= 0``)."""
    if lam < 0.0:
        raise BranchError(f"lam must be >= 0, got {lam}")
    if lam == 0.0 and isinstance(spec, Gamma):
        raise BranchError("gamma exponent is not evaluated on the imaginary axis; use lam > 0")
    w = complex(lam, -z)
    return complex(spec.drift_b * w + spec.psi_star_complex(w))


def psi_star_from_tail(spec, lam):
    """``lam * int_0^inf e^{-lam y} Pi(y, inf) dy``, an independent route to ``psi_*(lam)``."""
    _check_positive("lam", lam)
    f = lambda y: np.exp(-lam * y) * spec.tail(y)  # noqa: E731
    head = tanh_sinh(f, 0.0, 1.0 / lam, rtol=1e-13)
    rest = half_line(f, 1.0 / lam, scale=1.0 / lam, rtol=1e-13)
    return lam * (float(head) + float(rest))


@dataclass(frozen=True)
class InequalityReport:
    grid: np.ndarray
    upper_ok: np.ndarray  # H(u) <= Q(1/u)
    lower_ok: np.ndarray  # Q(1/u) / (2e) <= H(u)
    curvature_ok: np.ndarray  # u^2 sigma^2 <= 2 H
    ratio_ok: np.ndarray  # u^2 sigma^2 / H >= e^-1 / (1 + tail/K)

    @property
    def violations(self):
        return int(sum(int(np.count_nonzero(~a)) for a in (self.upper_ok, self.lower_ok, self.curvature_ok, self.ratio_ok)))


def exponent_inequalities(spec, lo=1e-3, hi=1e3, points=60, rtol=1e-12):
    """Check the comparison of ``H`` with ``Q(1/u)`` and the two curvature bounds on a log grid.

    A relative slack ``rtol`` absorbs rounding when an inequality is tight.
    """
    u = np.logspace(math.log10(lo), math.log10(hi), points)
    H = np.array([float(spec.H(v)) for v in u])
    s2 = np.array([float(spec.sigma2(v)) for v in u])
    y = 1.0 / u
    tl = np.array([float(spec.tail(v)) for v in y])
    K = np.array([float(spec.truncated_moment(2, v)) for v in y]) * u * u
    Q = tl + K
    curv = u * u * s2
    slack = 1.0 + rtol
    return InequalityReport(
        grid=u,
        upper_ok=H <= Q * slack,
        lower_ok=Q / (2.0 * math.e) <= H * slack,
        curvature_ok=curv <= 2.0 * H * slack,
        ratio_ok=curv * slack >= H * math.exp(-1.0) / (1.0 + tl / K),
    )
