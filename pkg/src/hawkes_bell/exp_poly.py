"""Exponential polynomials on [0, t] and the exponential-kernel resolvent.

Functions are written in the age variable ``u = t - z``, where ``z`` is the
birth time of a point and ``t`` the observation horizon. An :class:`ExpPoly`
is a finite sum ``sum c * u**p * exp((i*a + j*b) * u)``; exponents are stored
as integer pairs ``(i, j)`` so that products, the resolvent and resonance
checks all stay exact on the lattice ``i*a + j*b``.

Coefficients are exact rationals. ``a`` and ``b`` are binary floats, so every
coefficient the algebra produces is a rational number. Near criticality
(``a`` close to ``b``) the coefficients grow like ``(b - a)^-k`` and cancel
almost completely on evaluation; :func:`evaluate` and :func:`integrate`
measure that cancellation and switch to extended precision when floats
would lose more than a few digits.

For the kernel ``gamma(dx) = a exp(-b x) dx`` the operator
``Gamma f(z) = int f(z + y) gamma(dy)`` becomes, in ``u``, convolution with
``a exp(-b s)``. Its Neumann sum ``sum_{m>=1} Gamma^m`` collapses to a single
convolution with ``a exp((a - b) s)`` because
``sum_m a^m s^(m-1) exp(-b s) / (m-1)! = a exp((a - b) s)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from numbers import Rational, Real
from types import MappingProxyType
from typing import Mapping

import mpmath
import numpy as np
from scipy import signal, special

from .errors import ParameterCoincidenceError

MAX_DEGREE = 16
MAX_EXPONENT = 16
_DROP = 1e-300
_COINCIDENCE = 1e-12
# float sums are accepted while cancellation costs fewer than 3 digits
_COND_LIMIT = 1e3
_MAX_DPS = 2000

Key = tuple[int, int, int]

RESONANT = (1, -1)  # a - b
KERNEL = (0, -1)  # -b


@dataclass(frozen=True)
class KernelParams:
    """Exponential-kernel Hawkes parameters.

    ``a`` is the kernel amplitude, ``b`` its decay rate, ``t`` the horizon and
    ``nu`` the constant immigrant intensity. Analytic results need ``a < b``;
    ``a = 0`` (Poisson) and ``nu = 0`` are accepted as degenerate cases.
    """

    a: float
    b: float
    t: float
    nu: float = 1.0

    def __post_init__(self):
        for name in ("a", "b", "t", "nu"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name}={v} is not finite")
        if self.b <= 0:
            raise ValueError(f"decay rate b={self.b} must be positive")
        if not 0 <= self.a < self.b:
            raise ValueError(f"stability violated: need 0 <= a < b, got a={self.a}, b={self.b}")
        if self.t < 0:
            raise ValueError(f"horizon t={self.t} must be nonnegative")
        if self.nu < 0:
            raise ValueError(f"immigrant intensity nu={self.nu} must be nonnegative")

    @property
    def branching_ratio(self) -> float:
        return self.a / self.b

    def exponent(self, i: int, j: int) -> float:
        return i * self.a + j * self.b

    @cached_property
    def _exact_ab(self) -> tuple[Fraction, Fraction]:
        return Fraction(self.a), Fraction(self.b)

    def exact_exponent(self, i: int, j: int) -> Fraction:
        """``i a + j b`` without rounding."""
        a, b = self._exact_ab
        return i * a + j * b

    def with_horizon(self, t: float) -> "KernelParams":
        return KernelParams(self.a, self.b, t, self.nu)


def _exact(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, Rational):
        return Fraction(c)
    c = float(c)
    if not math.isfinite(c):
        raise ValueError(f"coefficient {c} is not finite")
    return Fraction(c)


class ExpPoly:
    """Immutable finite sum ``sum coeff * u**p * exp((i a + j b) u)`` on ``[0, t]``.

    Coefficients are stored as exact :class:`fractions.Fraction` values.
    """

    __slots__ = ("params", "_terms")

    def __init__(self, params: KernelParams, terms: Mapping[Key, float] | None = None):
        merged: dict[Key, Fraction] = {}
        for key, c in (terms or {}).items():
            p, i, j = key
            if p < 0 or p > MAX_DEGREE or abs(i) > MAX_EXPONENT or abs(j) > MAX_EXPONENT:
                raise ValueError(f"term {key} outside the degree guard")
            merged[key] = merged.get(key, 0) + _exact(c)
        self.params = params
        self._terms = MappingProxyType({k: c for k, c in merged.items() if abs(c) >= _DROP})

    @property
    def terms(self) -> Mapping[Key, Fraction]:
        return self._terms

    def __repr__(self):
        body = " + ".join(f"{float(c):.6g}*u^{p}*e^({i}a{j:+d}b)u" for (p, i, j), c in sorted(self._terms.items()))
        return f"ExpPoly({body or '0'})"

    def __len__(self):
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def _coerce(self, other) -> "ExpPoly":
        if isinstance(other, ExpPoly):
            if other.params != self.params:
                raise ValueError("ExpPoly operands have different kernel parameters")
            return other
        if isinstance(other, Real):
            return constant(self.params, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return scale(self, -1)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return add(self, scale(other, -1))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, ExpPoly):
            return mul(self, other)
        if isinstance(other, Real):
            return scale(self, other)
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = constant(self.params, 1)
        for _ in range(k):
            out = mul(out, self)
        return out

    def __call__(self, u):
        return evaluate(self, u)


def constant(params: KernelParams, c: float) -> ExpPoly:
    return ExpPoly(params, {(0, 0, 0): c})


def zero(params: KernelParams) -> ExpPoly:
    return ExpPoly(params)


def from_indicator(params: KernelParams) -> ExpPoly:
    """The indicator of ``[0, t]``: the constant 1 in ``u``."""
    return constant(params, 1)


def from_intensity_kernel(params: KernelParams) -> ExpPoly:
    """``z -> exp(b z)`` on ``[0, t]``, i.e. ``exp(b t) * exp(-b u)``."""
    return ExpPoly(params, {(0, 0, -1): math.exp(params.b * params.t)})


def monomial(params: KernelParams, p: int, i: int, j: int, c: float = 1) -> ExpPoly:
    return ExpPoly(params, {(p, i, j): c})


def add(f: ExpPoly, g: ExpPoly) -> ExpPoly:
    if f.params != g.params:
        raise ValueError("ExpPoly operands have different kernel parameters")
    terms = dict(f.terms)
    for k, c in g.terms.items():
        terms[k] = terms.get(k, 0) + c
    return ExpPoly(f.params, terms)


def scale(f: ExpPoly, c: float) -> ExpPoly:
    c = _exact(c)
    return ExpPoly(f.params, {k: c * v for k, v in f.terms.items()})


def mul(f: ExpPoly, g: ExpPoly) -> ExpPoly:
    if f.params != g.params:
        raise ValueError("ExpPoly operands have different kernel parameters")
    terms: dict[Key, Fraction] = {}
    for (p, i, j), c in f.terms.items():
        for (q, k, l), d in g.terms.items():
            key = (p + q, i + k, j + l)
            terms[key] = terms.get(key, 0) + c * d
    return ExpPoly(f.params, terms)


def _convolve_exponential(f: ExpPoly, beta: tuple[int, int], amplitude: float) -> ExpPoly:
    """``u -> amplitude * int_0^u f(u - s) exp(beta s) ds`` in closed form.

    With ``w = u - s`` a term ``u^p e^{alpha u}`` maps to
    ``e^{beta u} int_0^u w^p e^{delta w} dw`` where ``delta = alpha - beta``.
    """
    params = f.params
    bi, bj = beta
    amplitude = _exact(amplitude)
    out: dict[Key, Fraction] = {}

    def put(key, c):
        out[key] = out.get(key, 0) + c

    for (p, i, j), c in f.terms.items():
        c = c * amplitude
        di, dj = i - bi, j - bj
        if (di, dj) == (0, 0):
            put((p + 1, bi, bj), c / (p + 1))
            continue
        delta = params.exact_exponent(di, dj)
        if abs(delta) < _COINCIDENCE * params.b:
            raise ParameterCoincidenceError(
                f"exponent {i}a{j:+d}b coincides numerically with {bi}a{bj:+d}b "
                f"at a={params.a}, b={params.b}; perturb (a, b)"
            )
        fact = math.factorial(p)
        for r in range(p + 1):
            put((r, i, j), c * (-1) ** (p - r) * fact / (math.factorial(r) * delta ** (p - r + 1)))
        put((0, bi, bj), -c * (-1) ** p * fact / delta ** (p + 1))
    return ExpPoly(params, out)


def resolvent(f: ExpPoly) -> ExpPoly:
    """Apply ``(I - Gamma)^{-1} Gamma``: convolution with ``a exp((a - b) s)``."""
    return _convolve_exponential(f, RESONANT, f.params.a)


def gamma_apply(f: ExpPoly) -> ExpPoly:
    """Apply ``Gamma`` once: convolution with ``a exp(-b s)``."""
    return _convolve_exponential(f, KERNEL, f.params.a)


def _integral_term(p: int, alpha: float, t: float) -> float:
    # int_0^t u^p e^{alpha u} du
    if t == 0.0:
        return 0.0
    if alpha == 0.0:
        return t ** (p + 1) / (p + 1)
    if alpha < 0.0:
        x = -alpha * t
        return math.gamma(p + 1) * special.gammainc(p + 1, x) / (-alpha) ** (p + 1)
    # positive exponent: all-positive series, no cancellation
    x = alpha * t
    term = t ** (p + 1)
    total = term / (p + 1)
    m = 0
    while True:
        m += 1
        term *= x / m
        piece = term / (p + m + 1)
        total += piece
        if piece < 1e-17 * total and m > x:
            return total


def _integral_term_mp(p: int, alpha, t):
    # same integral in the current mpmath precision
    if t == 0:
        return mpmath.mpf(0)
    if alpha == 0:
        return t ** (p + 1) / (p + 1)
    x = alpha * t
    if x < -1:
        return mpmath.gammainc(p + 1, 0, -x) / (-alpha) ** (p + 1)
    term = t ** (p + 1)
    total = term / (p + 1)
    eps = mpmath.mpf(10) ** (-mpmath.mp.dps - 5)
    m = 0
    while True:
        m += 1
        term *= x / m
        piece = term / (p + m + 1)
        total += piece
        if abs(piece) < eps * abs(total) and m > abs(x):
            return total


def _mpf(q: Fraction):
    return mpmath.mpf(q.numerator) / q.denominator


def _checked_sum(parts_float, parts_mp) -> float:
    """Sum terms in floats if that is well conditioned, otherwise in mpmath.

    ``parts_float()`` returns float terms; ``parts_mp()`` returns mpmath terms
    at the current working precision.
    """
    try:
        parts = parts_float()
        total = math.fsum(parts)
        mag = math.fsum(abs(x) for x in parts)
        if math.isfinite(mag) and (mag == 0.0 or mag <= _COND_LIMIT * abs(total)):
            return total
        digits = math.log10(mag / abs(total)) if total != 0.0 and math.isfinite(mag) else 30
    except OverflowError:
        digits = 30
    dps = max(30, int(digits) + 25)
    while True:
        with mpmath.workdps(dps):
            parts = parts_mp()
            total = mpmath.fsum(parts)
            mag = mpmath.fsum(abs(x) for x in parts)
            # each term carries ~10^-dps relative rounding
            err = mag * mpmath.mpf(10) ** (5 - dps)
            if err <= mpmath.mpf("1e-17") * abs(total) or dps >= _MAX_DPS:
                return float(total)
        dps *= 2


def integrate(f: ExpPoly) -> float:
    """Exact ``int_0^t f(u) du``, rounded once to float."""
    params = f.params
    t = params.t

    def parts_float():
        return [float(c) * _integral_term(p, params.exponent(i, j) if (i, j) != (0, 0) else 0.0, t)
                for (p, i, j), c in f.terms.items()]

    def parts_mp():
        tm = mpmath.mpf(t)
        return [_mpf(c) * _integral_term_mp(p, _mpf(params.exact_exponent(i, j)), tm)
                for (p, i, j), c in f.terms.items()]

    return _checked_sum(parts_float, parts_mp)


def _evaluate_scalar(f: ExpPoly, x: float) -> float:
    params = f.params

    def parts_float():
        return [float(c) * x**p * math.exp(params.exponent(i, j) * x) for (p, i, j), c in f.terms.items()]

    def parts_mp():
        xm = mpmath.mpf(x)
        return [_mpf(c) * xm**p * mpmath.exp(_mpf(params.exact_exponent(i, j)) * xm)
                for (p, i, j), c in f.terms.items()]

    return _checked_sum(parts_float, parts_mp)


def evaluate(f: ExpPoly, u):
    """Evaluate ``f`` at ``u`` in ``[0, t]`` (scalar or array)."""
    t = f.params.t
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > t * (1 + 1e-14)):
        raise ValueError(f"u outside [0, {t}]")
    if arr.ndim == 0:
        return _evaluate_scalar(f, float(arr))
    out = np.zeros_like(arr)
    mag = np.zeros_like(arr)
    with np.errstate(over="ignore", invalid="ignore"):
        for (p, i, j), c in f.terms.items():
            term = float(c) * arr**p * np.exp(f.params.exponent(i, j) * arr)
            out += term
            mag += np.abs(term)
        bad = ~(np.isfinite(mag) & (mag <= _COND_LIMIT * np.abs(out)))
    bad &= mag != 0.0
    for idx in zip(*np.nonzero(bad)):
        out[idx] = _evaluate_scalar(f, float(arr[idx]))
    return out


def _trapezoid_convolution(g: np.ndarray, kernel: np.ndarray, h: float) -> np.ndarray:
    if g.size > 20000:
        full = signal.fftconvolve(g, kernel)[: g.size]
    else:
        full = np.convolve(g, kernel)[: g.size]
    return h * (full - 0.5 * g * kernel[0] - 0.5 * g[0] * kernel)


def neumann_oracle(f: ExpPoly, u: float, m_max: int = 30, steps: int = 4000) -> float:
    """Truncated Neumann series ``sum_{m=1}^{m_max} Gamma^m f`` at ``u``, numerically.

    Each power of ``Gamma`` is an independent trapezoidal convolution against
    ``a exp(-b s)`` on a uniform grid over ``[0, u]``, refined once by
    Richardson extrapolation. Test oracle for :func:`resolvent` only; its
    accuracy is not guaranteed.
    """
    if not 0 <= m_max <= 40:
        raise ValueError("m_max must be in [0, 40]")
    if not 2 <= steps <= 10**6:
        raise ValueError("steps must be in [2, 1e6]")
    if m_max == 0 or u == 0.0:
        return 0.0

    def series(n):
        grid = np.linspace(0.0, u, n + 1)
        h = u / n
        kernel = f.params.a * np.exp(-f.params.b * grid)
        g = np.asarray(evaluate(f, grid), dtype=float)
        total = 0.0
        for _ in range(m_max):
            g = _trapezoid_convolution(g, kernel, h)
            total += g[-1]
        return total

    coarse = series(steps // 2)
    fine = series(steps // 2 * 2)
    return (4.0 * fine - coarse) / 3.0
