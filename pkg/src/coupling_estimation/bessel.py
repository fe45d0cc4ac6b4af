r"""Bessel functions of the first kind of real, non-negative order.

Two evaluation routes:

* ascending series with a log-Gamma prefactor, used while the series has no
  serious cancellation (``x <= 10`` or ``x**2 < 4 (nu + 1)``);
* Miller's backward recurrence otherwise, normalized with the Neumann sum

  .. math::
      (x/2)^\alpha = \sum_{k\ge 0} (\alpha + 2k)\,
      \frac{\Gamma(\alpha + k)}{k!}\, J_{\alpha + 2k}(x),
      \qquad 0 \le \alpha < 1.

Validated for ``0 <= nu <= 1e4`` and ``0 <= x <= 1e3``.  Values below the
double-precision range underflow to zero.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

__all__ = ["bessel_j", "bessel_j_orders", "NU_MAX", "X_MAX"]

NU_MAX = 1e4
X_MAX = 1e3

_RESCALE = 1e250


def _check_domain(nu: float, x: float) -> None:
    if not (math.isfinite(nu) and math.isfinite(x)):
        raise DomainError("order and argument must be finite")
    if nu < 0 or nu > NU_MAX:
        raise DomainError(f"order {nu} outside [0, {NU_MAX:g}]")
    if x < 0 or x > X_MAX:
        raise DomainError(f"argument {x} outside [0, {X_MAX:g}]")


def _use_series(nu: float, x: float) -> bool:
    return x <= 10.0 or x * x < 4.0 * (nu + 1.0)


def _series(nu: float, x: float) -> float:
    log_lead = nu * math.log(x / 2.0) - math.lgamma(nu + 1.0)
    if log_lead < -745.0:
        return 0.0
    lead = math.exp(log_lead)
    q = -(x * x) / 4.0
    term, total, k = 1.0, 1.0, 0
    while True:
        k += 1
        term *= q / (k * (k + nu))
        total += term
        if abs(term) <= 1e-17 * abs(total) and k > -q / (nu + 1.0):
            break
        if k > 10_000:
            break
    return lead * total


def _neumann_coefficients(alpha: float, count: int) -> np.ndarray:
    k = np.arange(count, dtype=float)
    coef = np.empty(count)
    coef[0] = math.gamma(alpha + 1.0)
    if count > 1:
        kk = k[1:]
        log_ratio = np.array([math.lgamma(alpha + j) - math.lgamma(j + 1.0) for j in kk])
        coef[1:] = (alpha + 2.0 * kk) * np.exp(log_ratio)
    return coef


def _miller(alpha: float, top: int, x: float) -> np.ndarray:
    """``J_{alpha + j}(x)`` for ``j = 0..top`` by backward recurrence."""
    reach = max(float(top), x)
    start = int(math.ceil(reach + 20.0 + 15.0 * x ** (1.0 / 3.0)))
    start += start % 2  # even, so the Neumann sum pairs with alpha + 2k
    vals = np.zeros(top + 1)
    coef = _neumann_coefficients(alpha, start // 2 + 1)
    f_next, f = 0.0, 1e-300
    norm_sum = 0.0
    for j in range(start, -1, -1):
        if j % 2 == 0:
            norm_sum += coef[j // 2] * f
        if j <= top:
            vals[j] = f
        if j == 0:
            break
        f_prev = 2.0 * (alpha + j) / x * f - f_next
        f_next, f = f, f_prev
        if abs(f) > _RESCALE:
            f /= _RESCALE
            f_next /= _RESCALE
            norm_sum /= _RESCALE
            vals /= _RESCALE
    return vals * ((x / 2.0) ** alpha / norm_sum)


def bessel_j(nu: float, x: float) -> float:
    """Bessel function of the first kind :math:`J_\\nu(x)`.

    Raises
    ------
    DomainError
        Outside ``0 <= nu <= 1e4``, ``0 <= x <= 1e3``.
    """
    nu, x = float(nu), float(x)
    _check_domain(nu, x)
    if x == 0.0:
        return 1.0 if nu == 0.0 else 0.0
    if _use_series(nu, x):
        return _series(nu, x)
    n = int(math.floor(nu))
    return float(_miller(nu - n, n, x)[n])


def bessel_j_orders(nu0: float, count: int, x: float) -> np.ndarray:
    """``J_{nu0 + j}(x)`` for ``j = 0 .. count-1``."""
    if count < 1:
        raise ValueError("count must be positive")
    _check_domain(nu0, x)
    _check_domain(nu0 + count - 1, x)
    if x == 0.0:
        out = np.zeros(count)
        if nu0 == 0.0:
            out[0] = 1.0
        return out
    n0 = int(math.floor(nu0))
    alpha = nu0 - n0
    out = np.empty(count)
    if any(not _use_series(nu0 + j, x) for j in range(count)):
        out[:] = _miller(alpha, n0 + count - 1, x)[n0:]
    else:
        for j in range(count):
            out[j] = _series(nu0 + j, x)
    return out
