"""Cumulants of the exponential-kernel Hawkes process by Bell recursion.

Conditional cumulants (cluster started from one point) are built order by
order as :class:`ExpPoly` functions of the age ``u = t - z``:

    kappa_z^(1) = f + R f
    kappa_z^(n) = sum_{k=2}^n R B_{n,k}(kappa_z^(1), ..., kappa_z^(n-k+1))

with ``R = (I - Gamma)^{-1} Gamma``. Unconditional cumulants integrate the
complete Bell polynomial of the conditional ones against ``nu du``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import mpmath

from .bell_poly import complete_bell, partial_bell, partitions_of_set
from .exp_poly import (
    ExpPoly,
    KernelParams,
    from_indicator,
    from_intensity_kernel,
    integrate,
    resolvent,
)

MAX_RECURSION_ORDER = 6
MAX_JOINT_ORDER = 4


@dataclass(frozen=True)
class CumulantVector:
    order: int
    values: tuple[float, ...]
    skewness: float | None = None
    excess_kurtosis: float | None = None

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "CumulantVector":
        values = tuple(float(v) for v in values)
        skew = kurt = None
        if len(values) >= 3:
            skew = values[2] / values[1] ** 1.5 if values[1] > 0 else math.nan
        if len(values) >= 4:
            kurt = values[3] / values[1] ** 2 if values[1] > 0 else math.nan
        return cls(len(values), values, skew, kurt)

    def __getitem__(self, n: int) -> float:
        """1-based access: ``cv[2]`` is the variance."""
        return self.values[n - 1]

    def to_record(self, params: KernelParams) -> dict:
        return {
            "params": {"nu": params.nu, "a": params.a, "b": params.b, "t": params.t},
            "order": self.order,
            "kappa": list(self.values),
            "skewness": self.skewness,
            "kurtosis": self.excess_kurtosis,
        }


@dataclass(frozen=True)
class ConditionalCumulants:
    order: int
    funcs: tuple[ExpPoly, ...] = field(repr=False)

    def __getitem__(self, n: int) -> ExpPoly:
        return self.funcs[n - 1]


def _check_order(order: int, hi: int) -> None:
    if not 1 <= order <= hi:
        raise ValueError(f"order {order} outside [1, {hi}]")


def conditional_cumulants(f: ExpPoly, order: int) -> ConditionalCumulants:
    """Conditional cumulants ``kappa_z^(1..order)(f)`` as functions of ``u``.

    The ``k = 1`` term of the complete Bell polynomial cancels against the
    left side, so each order only needs lower ones.
    """
    _check_order(order, MAX_RECURSION_ORDER)
    funcs = [f + resolvent(f)]
    for n in range(2, order + 1):
        acc = None
        for k in range(2, n + 1):
            term = partial_bell(n, k, funcs[: n - k + 1])
            acc = term if acc is None else acc + term
        # R is linear, so one application after summing is enough
        funcs.append(resolvent(acc))
    return ConditionalCumulants(order, tuple(funcs))


def cumulants(order: int, params: KernelParams) -> CumulantVector:
    """Cumulants ``kappa^(1..order)`` of ``N_t`` for constant immigrant rate ``nu``."""
    _check_order(order, MAX_RECURSION_ORDER)
    if params.t == 0.0:
        return CumulantVector.from_values([0.0] * order)
    cond = conditional_cumulants(from_indicator(params), order)
    values = [params.nu * integrate(complete_bell(n, cond.funcs[:n])) for n in range(1, order + 1)]
    return CumulantVector.from_values(values)


def closed_form_reference(order: int, params: KernelParams) -> float:
    """Explicit closed forms of ``E[N_t]``, ``Var[N_t]``, ``kappa^(3)``, ``kappa^(4)``.

    Independent of the recursion; kept term for term as transcribed so any
    disagreement can be localised. The expressions cancel badly in floats
    near ``a = b`` or small ``t``, so they are evaluated in mpmath at a
    precision raised until two successive results agree.
    """
    if not 1 <= order <= 4:
        raise ValueError(f"closed forms exist for orders 1..4, got {order}")
    dps, prev = 40, None
    while True:
        with mpmath.workdps(dps):
            args = [mpmath.mpf(x) for x in (params.nu, params.a, params.b, params.t)]
            value = _closed_form(order, *args)
        if prev is not None and (value == prev or abs(value - prev) <= 1e-17 * abs(value)):
            return float(value)
        if dps > 1000:
            raise ArithmeticError("closed form did not converge in extended precision")
        dps, prev = 2 * dps, value


def _closed_form(order, nu, a, b, t):
    e1 = mpmath.exp((a - b) * t)
    e2, e3, e4 = e1 * e1, e1 * e1 * e1, e1 * e1 * e1 * e1
    if order == 1:
        return nu / (b - a) ** 2 * (-a + b * (b - a) * t + a * e1)
    if order == 2:
        return -nu / (2 * (a - b) ** 4) * (
            6 * a * b**2 - a**2 * b + 2 * b**3 * (a - b) * t
            + 2 * a * (a**2 - 3 * b**2 + 2 * a * b * (a - b) * t) * e1
            + a**2 * (b - 2 * a) * e2
        )
    if order == 3:
        return -nu / (6 * (a - b) ** 6) * (
            42 * a * b**4 + 30 * a**2 * b**3 - 7 * a**3 * b**2 + a**4 * b
            + 6 * b**4 * (2 * a**2 - a * b - b**2) * t
            + 3 * (
                18 * a**3 * b**2 - 16 * a**2 * b**3 - a**4 * b - 14 * a * b**4 - 2 * a**5
                + 6 * a**2 * b * (4 * a * b**2 - 4 * b**3 + a**2 * b - a**3) * t
                - 6 * a**3 * b**2 * (a - b) ** 2 * t**2
            ) * e1
            + 9 * (
                2 * a**2 * b**3 - 5 * a**3 * b**2 - a**4 * b + 2 * a**5
                + 2 * a**3 * b * (b**2 - 3 * a * b + 2 * a**2) * t
            ) * e2
            - a**3 * (2 * b**2 - 11 * a * b + 12 * a**2) * e3
        )
    if order == 4:
        return -nu / (12 * (a - b) ** 8) * (
            180 * a * b**6 + 570 * a**2 * b**5 + 100 * a**3 * b**4 - 15 * a**4 * b**3 + 2 * a**5 * b**2
            + 12 * b**5 * (6 * a**3 + 2 * a**2 * b - b**3 - 7 * a * b**2) * t
            + 4 * (
                5 * a**6 * b - 45 * a * b**6 + 3 * a**7 - 59 * a**5 * b**2
                - 180 * a**2 * b**5 + 75 * a**3 * b**4 + 75 * a**4 * b**3
                + 6 * a**2 * b * (5 * a * b**4 - 25 * b**5 + 41 * a**2 * b**3 - 22 * a**3 * b**2 - a**4 * b + 2 * a**5) * t
                + 18 * a**3 * b**2 * (10 * a * b**3 - 5 * b**4 - 4 * a**2 * b**2 - 2 * a**3 * b + a**4) * t**2
                + 12 * a**4 * b**3 * (a - b) ** 3 * t**3
            ) * e1
            + (
                150 * a**2 * b**5 - 360 * a**3 * b**4 - 564 * a**4 * b**3 + 588 * a**5 * b**2
                + 18 * a**6 * b - 84 * a**7
                + 4 * a**3 * b * (90 * b**4 - 306 * a * b**3 + 180 * a**2 * b**2 + 108 * a**3 * b - 72 * a**4) * t
                + 144 * a**4 * b**2 * (-4 * a * b**2 + b**3 + 5 * a**2 * b - 2 * a**3) * t**2
            ) * e2
            + (
                276 * a**4 * b**3 - 40 * a**3 * b**4 - 132 * a**6 * b - 320 * a**5 * b**2 + 144 * a**7
                + 24 * a**4 * b * (13 * a * b**2 - 23 * a**2 * b - 2 * b**3 + 12 * a**3) * t
            ) * e3
            + a**4 * (3 * b**3 - 34 * a * b**2 + 94 * a**2 * b - 72 * a**3) * e4
        )
    raise ValueError(f"closed forms exist for orders 1..4, got {order}")


def _joint_table(fs: Sequence[ExpPoly]) -> dict[tuple[int, ...], ExpPoly]:
    # conditional joint cumulant of every index subset, memoised on the subset
    n = len(fs)
    _check_order(n, MAX_JOINT_ORDER)
    memo: dict[tuple[int, ...], ExpPoly] = {}

    def kappa(subset: tuple[int, ...]) -> ExpPoly:
        if subset in memo:
            return memo[subset]
        if len(subset) == 1:
            f = fs[subset[0]]
            out = f + resolvent(f)
        else:
            acc = None
            for blocks in partitions_of_set(subset):
                if len(blocks) < 2:
                    continue
                term = _block_product(kappa, blocks)
                acc = term if acc is None else acc + term
            out = resolvent(acc)
        memo[subset] = out
        return out

    kappa(tuple(range(n)))
    return memo


def _block_product(kappa, blocks):
    prod = kappa(blocks[0])
    for blk in blocks[1:]:
        prod = prod * kappa(blk)
    return prod


def joint_conditional_cumulant(fs: Sequence[ExpPoly]) -> ExpPoly:
    """Joint conditional cumulant ``kappa_z^(n)(f_1, ..., f_n)`` as an ExpPoly in ``u``.

    Recurses over set partitions with at least two blocks.
    """
    return _joint_table(fs)[tuple(range(len(fs)))]


def joint_cumulant(fs: Sequence[ExpPoly]) -> float:
    """Joint cumulant ``kappa^(n)(f_1, ..., f_n)`` of ``sum f_i`` over the process.

    ``nu * int_0^t sum_{all partitions} prod_blocks kappa_z^(|block|) du``.
    """
    table = _joint_table(fs)
    acc = None
    for blocks in partitions_of_set(range(len(fs))):
        term = _block_product(table.__getitem__, blocks)
        acc = term if acc is None else acc + term
    return fs[0].params.nu * integrate(acc)


def mean_intensity_closed_form(params: KernelParams) -> float:
    nu, a, b, t = params.nu, params.a, params.b, params.t
    return nu * a / (b - a) * -math.expm1((a - b) * t)


def mean_intensity(params: KernelParams) -> float:
    """``E[lambda_t] = a exp(-b t) kappa^(1)(e_{0,b})`` via the recursion.

    Raises ``ArithmeticError`` if the recursion drifts from the closed form.
    """
    if params.t == 0.0:
        return 0.0
    kernel = from_intensity_kernel(params)
    k1 = params.nu * integrate(conditional_cumulants(kernel, 1)[1])
    value = params.a * math.exp(-params.b * params.t) * k1
    ref = mean_intensity_closed_form(params)
    if not math.isclose(value, ref, rel_tol=1e-9, abs_tol=1e-12):
        raise ArithmeticError(f"E[lambda_t] recursion {value!r} disagrees with closed form {ref!r}")
    return value


def intensity_count_moment(params: KernelParams) -> float:
    """``E[lambda_t N_t] = a e^{-bt} (kappa^(2)(e_{0,0}, e_{0,b}) + kappa^(1)(e_{0,b}) kappa^(1)(e_{0,0}))``."""
    if params.t == 0.0:
        return 0.0
    ind = from_indicator(params)
    kernel = from_intensity_kernel(params)
    cross = joint_cumulant([ind, kernel])
    k1_kernel = params.nu * integrate(conditional_cumulants(kernel, 1)[1])
    k1_count = params.nu * integrate(conditional_cumulants(ind, 1)[1])
    return params.a * math.exp(-params.b * params.t) * (cross + k1_kernel * k1_count)


def intensity_count_moment_closed_form(params: KernelParams) -> float:
    """Reference closed form of ``E[lambda_t N_t]``, kept as transcribed."""
    nu, a, b, t = params.nu, params.a, params.b, params.t
    e1 = math.exp((a - b) * t)
    return -nu * a / (a - b) ** 3 * (
        b**2 - nu * a - a * b + nu * b * (b - a) * t
        + a * (a - nu + a * (b - a) * t) * e1 * e1
        + (2 * nu * a - a**2 + a * b - b**2 + (nu * a * b - nu * b**2 - a * (a - b) ** 2) * t
           + a * b * (a - b) ** 2 * t**2 / 2) * e1
    )


@lru_cache(maxsize=None)
def _expanded_terms(n: int) -> int:
    # terms of kappa_z^(n) once every lower-order factor is itself expanded
    if n == 1:
        return 1
    total = 0
    for blocks in partitions_of_set(range(n)):
        if len(blocks) < 2:
            continue
        count = 1
        for blk in blocks:
            count *= _expanded_terms(len(blk))
        total += count
    return total


def partition_term_count(n: int) -> int:
    """Number of expanded terms in the order-``n`` recursion (``n`` in {3, 4}).

    Each partition of ``{1..n}`` into at least two blocks contributes the
    product of the expanded term counts of its blocks.
    """
    if n not in (3, 4):
        raise ValueError(f"term count defined for n in {{3, 4}}, got {n}")
    return _expanded_terms(n)
