"""Scalar numerics shared by every module.

Entropy primitives (natural log throughout), log-domain combinatorics,
overflow-safe Hermite polynomial evaluation, bracketed root finding and
adaptive quadrature on [0, inf).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln

from .errors import (
    BracketError,
    ConvergenceError,
    DomainError,
    SupportMismatchError,
)

# Euler-Mascheroni constant, used by the Poisson-channel capacity bound.
EULER_GAMMA = 0.5772156649015329

# Tolerance window for probability-domain checks: wide enough for accumulated
# round-off, narrow enough not to mask real normalization bugs.
PROB_SLACK = 1e-12

# Hermite recurrence values are rescaled whenever they exceed e^RESCALE_EXP.
_RESCALE_EXP = 200.0
_RESCALE_UP = math.exp(_RESCALE_EXP)
_RESCALE_DOWN = math.exp(-_RESCALE_EXP)


@dataclass(frozen=True)
class TruncationPolicy:
    """Controls where infinite photon-number series are cut off.

    tail_eps is the probability mass allowed beyond the cutoff, n_floor the
    smallest cutoff ever used, n_cap a hard ceiling that turns runaway series
    into errors instead of memory exhaustion.
    """

    tail_eps: float = 1e-12
    n_floor: int = 32
    n_cap: int = 100_000

    def __post_init__(self):
        if not (0.0 < self.tail_eps < 1e-3):
            raise DomainError(f"tail_eps must lie in (0, 1e-3), got {self.tail_eps}")
        if self.n_floor > self.n_cap:
            raise DomainError(f"n_floor {self.n_floor} exceeds n_cap {self.n_cap}")


DEFAULT_POLICY = TruncationPolicy()


class SignedLogValue(NamedTuple):
    """A real number stored as (log|value|, sign); sign 0 encodes exact zero."""

    log_magnitude: float
    sign: int


def xlogx(x: float) -> float:
    """h(x) = -x ln x with the continuous extension h(0) = 0."""
    if x < -PROB_SLACK or x > 1.0 + PROB_SLACK:
        raise DomainError(f"xlogx argument {x} outside [0, 1]")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 0.0
    return -x * math.log(x)


def _xlogx_array(p: np.ndarray) -> np.ndarray:
    """Vectorized -p ln p, zero where p <= 0 (callers validate signs)."""
    out = np.zeros_like(p)
    mask = p > 0.0
    out[mask] = -p[mask] * np.log(p[mask])
    return out


def thermal_entropy_g(E: float) -> float:
    """Entropy (nats) of a single-mode thermal state of mean photon number E."""
    if E < 0.0:
        raise DomainError(f"mean photon number must be >= 0, got {E}")
    if E == 0.0:
        return 0.0
    return (E + 1.0) * math.log1p(E) - E * math.log(E)


def shannon_entropy(p, atol: float = 1e-8) -> float:
    """Shannon entropy (nats) of a finite probability vector.

    Accepts a raw vector or any object with a .probs attribute.  Does not
    renormalize; the sum may fall short of 1 by accumulated truncation tails.
    """
    vec = np.asarray(getattr(p, "probs", p), dtype=float)
    if vec.size and vec.min() < -PROB_SLACK:
        raise DomainError(f"negative probability {vec.min()} in entropy argument")
    total = float(vec.sum())
    if abs(total - 1.0) > atol:
        raise DomainError(f"probability vector sums to {total}, expected 1")
    return float(_xlogx_array(np.clip(vec, 0.0, None)).sum())


def kl_divergence(p, q) -> float:
    """Kullback-Leibler divergence sum p ln(p/q) in nats.

    Requires equal support lengths and q(i) > 0 wherever p(i) > 0.
    """
    pv = np.asarray(getattr(p, "probs", p), dtype=float)
    qv = np.asarray(getattr(q, "probs", q), dtype=float)
    if pv.shape != qv.shape:
        raise SupportMismatchError(f"support lengths differ: {pv.shape} vs {qv.shape}")
    mask = pv > 0.0
    if np.any(qv[mask] <= 0.0):
        raise SupportMismatchError("p has mass where q vanishes")
    return float(np.sum(pv[mask] * (np.log(pv[mask]) - np.log(qv[mask]))))


def log_block_dimension(n: int, m: int) -> float:
    """ln of the dimension binom(n+m-1, m-1) of the total-photon-number
    block n on m modes, via log-gamma (no overflow up to n_cap)."""
    if n < 0 or m < 1:
        raise DomainError(f"need n >= 0 and m >= 1, got n={n}, m={m}")
    return float(gammaln(n + m) - gammaln(n + 1) - gammaln(m))


def log_block_dimensions(n_max: int, m: int) -> np.ndarray:
    """log_block_dimension for all n = 0..n_max at once."""
    if n_max < 0 or m < 1:
        raise DomainError(f"need n_max >= 0 and m >= 1, got n_max={n_max}, m={m}")
    n = np.arange(n_max + 1)
    return gammaln(n + m) - gammaln(n + 1) - gammaln(m)


def _hermite_signed_log_arrays(n_max: int, x: float):
    """log|H_n(x)| and sign(H_n(x)) for n = 0..n_max as numpy arrays.

    Three-term recurrence H_{n+1} = 2x H_n - 2n H_{n-1} carried in scaled
    linear form; both running values are divided by e^200 whenever either
    magnitude exceeds it, with the log offset accumulated separately.
    """
    if n_max < 0:
        raise DomainError(f"n_max must be >= 0, got {n_max}")
    if not math.isfinite(x):
        raise DomainError(f"Hermite argument must be finite, got {x}")
    logmag = np.full(n_max + 1, -math.inf)
    sign = np.zeros(n_max + 1, dtype=np.int8)

    def record(idx, value, offset):
        if value != 0.0:
            logmag[idx] = math.log(abs(value)) + offset
            sign[idx] = 1 if value > 0.0 else -1

    h_prev = 1.0  # H_0
    record(0, h_prev, 0.0)
    if n_max == 0:
        return logmag, sign
    h_cur = 2.0 * x  # H_1
    offset = 0.0
    record(1, h_cur, offset)
    for n in range(1, n_max):
        h_next = 2.0 * x * h_cur - 2.0 * n * h_prev
        h_prev, h_cur = h_cur, h_next
        biggest = max(abs(h_prev), abs(h_cur))
        if biggest > _RESCALE_UP:
            h_prev *= _RESCALE_DOWN
            h_cur *= _RESCALE_DOWN
            offset += _RESCALE_EXP
        elif 0.0 < biggest < _RESCALE_DOWN:
            h_prev *= _RESCALE_UP
            h_cur *= _RESCALE_UP
            offset -= _RESCALE_EXP
        record(n + 1, h_cur, offset)
    return logmag, sign


def hermite_signed_log(n_max: int, x: float) -> list[SignedLogValue]:
    """Hermite polynomials H_0..H_{n_max} at x in sign/log-magnitude form."""
    logmag, sign = _hermite_signed_log_arrays(n_max, x)
    return [SignedLogValue(float(l), int(s)) for l, s in zip(logmag, sign)]


def brent_root(f: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    """Root of a bracketed monotone scalar function via Brent's method."""
    if tol <= 0.0:
        raise DomainError(f"tol must be positive, got {tol}")
    flo = f(lo)
    if flo == 0.0:
        return lo
    fhi = f(hi)
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise BracketError(f"f({lo})={flo} and f({hi})={fhi} do not bracket a root")
    root, info = brentq(f, lo, hi, xtol=tol, rtol=8.9e-16, maxiter=200,
                        full_output=True, disp=False)
    if not info.converged:
        raise ConvergenceError("Brent iteration cap (200) reached without convergence")
    return float(root)


def quadrature_semiinfinite(f: Callable[[float], float], weight_scale: float,
                            rel_tol: float = 1e-9,
                            max_evals: int = 1_000_000) -> float:
    """Integral of f over s in [0, inf) for integrands with an exponential
    tail of scale weight_scale.

    Substitutes s = weight_scale * v/(1-v) and integrates over v in [0, 1)
    with adaptive Simpson panels targeting relative error rel_tol.
    """
    if weight_scale <= 0.0:
        raise DomainError(f"weight_scale must be positive, got {weight_scale}")
    if rel_tol <= 0.0:
        raise DomainError(f"rel_tol must be positive, got {rel_tol}")

    evals = [0]

    def g(v: float) -> float:
        evals[0] += 1
        if evals[0] > max_evals:
            raise ConvergenceError(
                f"quadrature exhausted its {max_evals}-evaluation budget")
        one_minus = 1.0 - v
        s = weight_scale * v / one_minus
        val = f(s)
        if val == 0.0:
            return 0.0
        return val * weight_scale / (one_minus * one_minus)

    v_hi = 1.0 - 1e-9

    # Coarse composite pass fixes the scale for the relative-error target and
    # seeds the panel stack; 64 panels resolve any feature the rational map
    # leaves wider than ~1% of the unit interval.
    n0 = 64
    nodes = np.linspace(0.0, v_hi, 2 * n0 + 1)
    vals = [g(v) for v in nodes]
    coarse = 0.0
    panels = []
    for i in range(n0):
        a, mid, b = nodes[2 * i], nodes[2 * i + 1], nodes[2 * i + 2]
        fa, fm, fb = vals[2 * i], vals[2 * i + 1], vals[2 * i + 2]
        s_est = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
        coarse += s_est
        panels.append((a, b, fa, fm, fb, s_est))

    tol_abs = rel_tol * max(abs(coarse), 1e-300)
    total = 0.0
    # Depth-first refinement; each panel gets tolerance proportional to width.
    stack = [(a, b, fa, fm, fb, s_est, tol_abs * (b - a) / v_hi)
             for (a, b, fa, fm, fb, s_est) in panels]
    while stack:
        a, b, fa, fm, fb, s_whole, tol = stack.pop()
        m1 = 0.5 * (a + 0.5 * (a + b))
        m2 = 0.5 * (0.5 * (a + b) + b)
        mid = 0.5 * (a + b)
        f1 = g(m1)
        f2 = g(m2)
        s_left = (mid - a) / 6.0 * (fa + 4.0 * f1 + fm)
        s_right = (b - mid) / 6.0 * (fm + 4.0 * f2 + fb)
        s_split = s_left + s_right
        err = s_split - s_whole
        if abs(err) <= 15.0 * tol or (b - a) < 1e-14:
            total += s_split + err / 15.0
        else:
            stack.append((a, mid, fa, f1, fm, s_left, 0.5 * tol))
            stack.append((mid, b, fm, f2, fb, s_right, 0.5 * tol))
    return total
