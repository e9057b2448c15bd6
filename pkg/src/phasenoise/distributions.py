"""Total-photon-number laws for every signal family, and their behaviour
under pure loss.

The universal currency is PhotonDist: a finite probability vector over the
total photon number with a certified tail bound.  Constructors cover Poisson
(coherent states), negative-binomial (thermal states on m modes), truncated
thermal, squeezed-coherent, general single-mode Gaussian and Fock signals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Sequence, Union

import numpy as np
from scipy.special import gammaln

from .errors import (
    DomainError,
    PhysicalityError,
    TruncationError,
    UnsupportedSignalError,
)
from .numerics import DEFAULT_POLICY, TruncationPolicy, brent_root

# Maximum tolerated drift of a computed probability sum above 1 before the
# construction is treated as a numerical failure rather than renormalized.
_DRIFT_TOL = 1e-9


@dataclass(frozen=True)
class PhotonDist:
    """Probabilities over total photon number n = 0..N plus certified tail.

    probs is read-only; sum(probs) + tail_mass = 1 to within 1e-10 and the
    cached mean equals sum(n * probs) exactly as computed.
    """

    probs: np.ndarray
    tail_mass: float
    mean: float

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.probs, dtype=float))
        if arr.ndim != 1 or arr.size == 0:
            raise DomainError("probs must be a nonempty 1-D vector")
        if arr.min() < 0.0:
            raise DomainError(f"negative probability {arr.min()}")
        if self.tail_mass < 0.0:
            raise DomainError(f"negative tail mass {self.tail_mass}")
        total = float(arr.sum()) + self.tail_mass
        if abs(total - 1.0) > 1e-10:
            raise DomainError(f"probs + tail sum to {total}, expected 1")
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @property
    def n_max(self) -> int:
        return self.probs.size - 1

    @property
    def p0(self) -> float:
        return float(self.probs[0])

    def padded(self, size: int) -> np.ndarray:
        """probs zero-padded on the right to the given length."""
        if size < self.probs.size:
            raise DomainError("padded size smaller than support")
        return np.pad(self.probs, (0, size - self.probs.size))


def _finalize(raw: np.ndarray, context: str) -> PhotonDist:
    """Clip round-off negatives, account the tail and cache the mean."""
    raw = np.asarray(raw, dtype=float)
    if raw.min() < -1e-10:
        raise DomainError(f"{context}: negative probability {raw.min()}")
    raw = np.clip(raw, 0.0, None)
    total = float(raw.sum())
    if total > 1.0 + _DRIFT_TOL:
        raise DomainError(f"{context}: probability sum drifted to {total}")
    if total > 1.0:
        raw = raw / total
        tail = 0.0
    else:
        tail = 1.0 - total
    mean = float(np.arange(raw.size) @ raw)
    return PhotonDist(raw, tail, mean)


def delta_dist(n: int) -> PhotonDist:
    """Point mass at photon number n."""
    if n < 0:
        raise DomainError(f"photon number must be >= 0, got {n}")
    probs = np.zeros(n + 1)
    probs[n] = 1.0
    return PhotonDist(probs, 0.0, float(n))


def _initial_cutoff(mean: float, var: float, policy: TruncationPolicy) -> int:
    n = int(math.ceil(mean + 10.0 * math.sqrt(max(var, 0.0)) + 20.0))
    return max(policy.n_floor, n)


def _truncated_from_logpmf(logpmf, mean, var, policy, context) -> PhotonDist:
    """Evaluate a log-pmf on 0..N, growing N until the tail target is met."""
    n = min(_initial_cutoff(mean, var, policy), policy.n_cap)
    while True:
        probs = np.exp(logpmf(np.arange(n + 1)))
        missing = 1.0 - float(probs.sum())
        if missing <= policy.tail_eps:
            return _finalize(probs, context)
        if n >= policy.n_cap:
            raise TruncationError(
                f"{context}: tail {missing:.3e} above {policy.tail_eps:.1e} "
                f"at n_cap={policy.n_cap}")
        n = min(policy.n_cap, int(math.ceil(1.5 * n)) + 16)


def poisson(s: float, policy: TruncationPolicy = DEFAULT_POLICY) -> PhotonDist:
    """Photon-number law of a coherent state of total energy s."""
    if s < 0.0:
        raise DomainError(f"energy must be >= 0, got {s}")
    if s == 0.0:
        return delta_dist(0)
    log_s = math.log(s)

    def logpmf(n):
        return -s + n * log_s - gammaln(n + 1)

    return _truncated_from_logpmf(logpmf, s, s, policy, f"poisson({s})")


def thermal_total(m: int, E: float,
                  policy: TruncationPolicy = DEFAULT_POLICY) -> PhotonDist:
    """Total-photon-number law of the m-mode thermal state of total energy E
    (negative binomial)."""
    if m < 1:
        raise DomainError(f"mode count must be >= 1, got {m}")
    if E < 0.0:
        raise DomainError(f"energy must be >= 0, got {E}")
    if E == 0.0:
        return delta_dist(0)
    log_ratio = math.log(E) - math.log(E + m)
    log_norm = m * (math.log(m) - math.log(E + m))

    def logpmf(n):
        return (gammaln(n + m) - gammaln(n + 1) - gammaln(m)
                + n * log_ratio + log_norm)

    var = E * (1.0 + E / m)
    return _truncated_from_logpmf(logpmf, E, var, policy,
                                  f"thermal_total(m={m}, E={E})")


def truncated_thermal(s: float, t: int) -> PhotonDist:
    """Thermal law on the truncated space n = 0..t with mean photon number s.

    The inverse temperature is solved so the mean matches s; it is negative
    for s > t/2, zero at s = t/2 (uniform) and positive below.
    """
    if t < 0:
        raise DomainError(f"cutoff must be >= 0, got {t}")
    if not (0.0 <= s <= t):
        raise DomainError(f"mean {s} outside [0, {t}]")
    if s == 0.0:
        return delta_dist(0)
    if s == float(t):
        return delta_dist(t)
    n = np.arange(t + 1)

    def mean_at(beta):
        w = np.exp(-beta * n - np.max(-beta * n))
        return float((n @ w) / w.sum())

    lo, hi = -1.0, 1.0
    for _ in range(200):
        if mean_at(lo) > s:
            break
        lo *= 2.0
    for _ in range(200):
        if mean_at(hi) < s:
            break
        hi *= 2.0
    beta = brent_root(lambda b: mean_at(b) - s, lo, hi, tol=1e-15)
    logw = -beta * n
    logw -= logw.max()
    probs = np.exp(logw)
    probs /= probs.sum()
    return PhotonDist(probs, 0.0, float(n @ probs))


# ---------------------------------------------------------------------------
# Signals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FockSignal:
    """Tensor-product Fock state with the given per-mode occupations."""

    occupations: tuple[int, ...]

    def __post_init__(self):
        occ = tuple(int(k) for k in self.occupations)
        if not occ or any(k < 0 for k in occ):
            raise DomainError(f"occupations must be nonnegative, got {occ}")
        object.__setattr__(self, "occupations", occ)

    @property
    def total(self) -> int:
        return sum(self.occupations)


@dataclass(frozen=True)
class CoherentSignal:
    """Single-mode coherent state of real amplitude alpha (energy alpha^2)."""

    alpha: float


@dataclass(frozen=True)
class SqueezedCoherentSignal:
    """Single-mode squeezed-coherent state: squeeze r applied after a real
    displacement alpha; energy sinh^2 r + exp(-2r) alpha^2."""

    r: float
    alpha: float

    @property
    def energy(self) -> float:
        return math.sinh(self.r) ** 2 + math.exp(-2.0 * self.r) * self.alpha ** 2


@dataclass(frozen=True)
class GaussianSignal:
    """Single-mode Gaussian state: mean quadrature vector (x, p) and 2x2
    covariance with vacuum normalized to the identity."""

    mean: tuple[float, float]
    cov: tuple[tuple[float, float], tuple[float, float]]

    def __post_init__(self):
        mu = (float(self.mean[0]), float(self.mean[1]))
        cv = tuple(tuple(float(x) for x in row) for row in self.cov)
        object.__setattr__(self, "mean", mu)
        object.__setattr__(self, "cov", cv)

    def cov_matrix(self) -> np.ndarray:
        return np.array(self.cov, dtype=float)

    def mean_vector(self) -> np.ndarray:
        return np.array(self.mean, dtype=float)


@dataclass(frozen=True)
class NumberDiagonalSignal:
    """Mixed state diagonal in the photon-number basis (e.g. a lossy Fock
    state); modes > 1 marks a multi-mode mixture, which no covariant rate
    formula in this package accepts."""

    weights: tuple[float, ...]
    modes: int = 1

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        if not w or min(w) < -1e-12:
            raise DomainError("weights must be nonnegative")
        if abs(sum(w) - 1.0) > 1e-9:
            raise DomainError(f"weights sum to {sum(w)}, expected 1")
        object.__setattr__(self, "weights", w)


Signal = Union[FockSignal, CoherentSignal, SqueezedCoherentSignal,
               GaussianSignal, NumberDiagonalSignal]

VACUUM = FockSignal((0,))


def to_gaussian(signal: Signal) -> GaussianSignal:
    """First/second-moment description of a coherent or squeezed-coherent
    signal (real displacement conventions)."""
    if isinstance(signal, GaussianSignal):
        return signal
    if isinstance(signal, CoherentSignal):
        return GaussianSignal((math.sqrt(2.0) * signal.alpha, 0.0),
                              ((1.0, 0.0), (0.0, 1.0)))
    if isinstance(signal, SqueezedCoherentSignal):
        r, alpha = signal.r, signal.alpha
        return GaussianSignal((math.sqrt(2.0) * alpha * math.exp(-r), 0.0),
                              ((math.exp(-2.0 * r), 0.0),
                               (0.0, math.exp(2.0 * r))))
    raise UnsupportedSignalError(f"no Gaussian form for {type(signal).__name__}")


def signal_energy(signal: Signal) -> float:
    """Mean photon number of a signal."""
    if isinstance(signal, FockSignal):
        return float(signal.total)
    if isinstance(signal, CoherentSignal):
        return signal.alpha ** 2
    if isinstance(signal, SqueezedCoherentSignal):
        return signal.energy
    if isinstance(signal, GaussianSignal):
        v = signal.cov_matrix()
        mu = signal.mean_vector()
        return float((np.trace(v) - 2.0) / 4.0 + (mu @ mu) / 2.0)
    if isinstance(signal, NumberDiagonalSignal):
        w = np.asarray(signal.weights)
        return float(np.arange(w.size) @ w)
    raise UnsupportedSignalError(f"unknown signal kind {type(signal).__name__}")


def _gaussian_photon_variance(signal: GaussianSignal) -> float:
    v = signal.cov_matrix()
    mu = signal.mean_vector()
    return float((np.trace(v @ v) - 2.0) / 8.0 + (mu @ v @ mu) / 2.0)


def squeezed_coherent(signal: SqueezedCoherentSignal,
                      policy: TruncationPolicy = DEFAULT_POLICY) -> PhotonDist:
    """Photon-number law of a squeezed-coherent state.

    For r > 0 the amplitude formula is assembled in sign/log-magnitude form
    from the Hermite recurrence; |r| < 1e-8 falls back to the Poisson limit,
    and r < 0 routes through the general Gaussian law (same state, and the
    Hermite argument would be imaginary).
    """
    from .numerics import _hermite_signed_log_arrays

    r, alpha = signal.r, signal.alpha
    if abs(r) < 1e-8:
        return poisson(alpha ** 2, policy)
    if r < 0.0:
        return gaussian_single_mode(to_gaussian(signal), policy)

    tanh_r = math.tanh(r)
    gamma = alpha / math.sqrt(math.sinh(2.0 * r))
    log_half_tanh = math.log(tanh_r / 2.0)
    log_cosh = math.log(math.cosh(r))
    const = -alpha ** 2 * (1.0 + tanh_r) - log_cosh
    mean = signal.energy
    var = _gaussian_photon_variance(to_gaussian(signal))

    n = min(_initial_cutoff(mean, var, policy), policy.n_cap)
    while True:
        logmag, sign = _hermite_signed_log_arrays(n, gamma)
        k = np.arange(n + 1)
        logp = 2.0 * logmag + k * log_half_tanh - gammaln(k + 1) + const
        probs = np.where(sign == 0, 0.0, np.exp(logp))
        missing = 1.0 - float(probs.sum())
        if missing <= policy.tail_eps:
            return _finalize(probs, f"squeezed_coherent(r={r}, alpha={alpha})")
        if n >= policy.n_cap:
            raise TruncationError(
                f"squeezed_coherent(r={r}, alpha={alpha}): tail {missing:.3e} "
                f"at n_cap={policy.n_cap}")
        n = min(policy.n_cap, int(math.ceil(1.5 * n)) + 16)


def _check_physical(signal: GaussianSignal):
    v = signal.cov_matrix()
    if abs(v[0, 1] - v[1, 0]) > 1e-9 * (1.0 + abs(v).max()):
        raise PhysicalityError(f"covariance not symmetric: {v}")
    det = float(np.linalg.det(v))
    if v[0, 0] <= 0.0 or v[1, 1] <= 0.0 or det < 1.0 - 1e-9:
        raise PhysicalityError(
            f"covariance violates det V >= 1 (det={det}): {v}")


def _series_coefficients(lam: float, c: float, size: int) -> np.ndarray:
    """Taylor coefficients of (1-lam t)^{-1/2} exp(-c (1-t)/(1-lam t)).

    Satisfies the exact recurrence
      (n+1) f_{n+1} = (lam (2n + 1/2) + c (1-lam)) f_n - lam^2 (n - 1/2) f_{n-1}
    with f_0 = e^{-c}.  Together with the factor 2/sqrt((v1+1)(v2+1)) these
    generate the photon-number law of any single-mode Gaussian state.
    """
    f = np.empty(size)
    f[0] = math.exp(-c)
    if size == 1:
        return f
    drive = c * (1.0 - lam)
    f[1] = f[0] * (0.5 * lam + drive)
    for k in range(1, size - 1):
        f[k + 1] = ((lam * (2.0 * k + 0.5) + drive) * f[k]
                    - lam * lam * (k - 0.5) * f[k - 1]) / (k + 1.0)
    return f


def gaussian_single_mode(signal: GaussianSignal,
                         policy: TruncationPolicy = DEFAULT_POLICY) -> PhotonDist:
    """Photon-number law of an arbitrary physical single-mode Gaussian state.

    The covariance is rotated to diagonal form (photon statistics are
    phase-rotation invariant) and the law is built from the exact generating
    function of the rotated state; see _series_coefficients.
    """
    _check_physical(signal)
    v = signal.cov_matrix()
    mu = signal.mean_vector()
    eigvals, eigvecs = np.linalg.eigh(v)
    v1, v2 = float(eigvals[0]), float(eigvals[1])
    mu_rot = eigvecs.T @ mu
    c1 = mu_rot[0] ** 2 / (v1 + 1.0)
    c2 = mu_rot[1] ** 2 / (v2 + 1.0)
    if c1 + c2 > 700.0:
        raise TruncationError(
            "gaussian_single_mode: displacement too large for direct series")
    lam1 = (v1 - 1.0) / (v1 + 1.0)
    lam2 = (v2 - 1.0) / (v2 + 1.0)
    prefactor = 2.0 / math.sqrt((v1 + 1.0) * (v2 + 1.0))

    mean = signal_energy(signal)
    var = _gaussian_photon_variance(signal)
    n = min(_initial_cutoff(mean, var, policy), policy.n_cap)
    while True:
        f1 = _series_coefficients(lam1, c1, n + 1)
        f2 = _series_coefficients(lam2, c2, n + 1)
        probs = prefactor * np.convolve(f1, f2)[: n + 1]
        # mild sign cancellation is expected for squeezed states
        if probs.min() < -1e-10:
            raise DomainError(
                f"gaussian_single_mode: cancellation produced {probs.min()}")
        probs = np.clip(probs, 0.0, None)
        missing = 1.0 - float(probs.sum())
        if missing <= policy.tail_eps:
            return _finalize(probs, "gaussian_single_mode")
        if n >= policy.n_cap:
            raise TruncationError(
                f"gaussian_single_mode: tail {missing:.3e} at n_cap={policy.n_cap}")
        n = min(policy.n_cap, int(math.ceil(1.5 * n)) + 16)


def convolve(dists: Sequence[PhotonDist],
             policy: TruncationPolicy = DEFAULT_POLICY) -> PhotonDist:
    """Exact discrete convolution (law of a sum of independent photon counts);
    tails accumulate additively."""
    if not dists:
        raise DomainError("convolve needs at least one distribution")
    probs = reduce(np.convolve, (d.probs for d in dists))
    return _finalize(probs, "convolve")


def signal_dist(signal: Signal,
                policy: TruncationPolicy = DEFAULT_POLICY) -> PhotonDist:
    """Total-photon-number law of any signal kind."""
    if isinstance(signal, FockSignal):
        return delta_dist(signal.total)
    if isinstance(signal, NumberDiagonalSignal):
        return _finalize(np.asarray(signal.weights, dtype=float),
                         "number_diagonal")
    if isinstance(signal, CoherentSignal):
        return poisson(signal.alpha ** 2, policy)
    if isinstance(signal, SqueezedCoherentSignal):
        return squeezed_coherent(signal, policy)
    if isinstance(signal, GaussianSignal):
        return gaussian_single_mode(signal, policy)
    raise UnsupportedSignalError(f"unknown signal kind {type(signal).__name__}")


def binomial_loss_weights(weights: np.ndarray, eta: float) -> np.ndarray:
    """Push a photon-number-diagonal law through a transmissivity-eta loss:
    |n> -> sum_i binom(n,i) eta^i (1-eta)^{n-i} |i>."""
    weights = np.asarray(weights, dtype=float)
    n_max = weights.size - 1
    out = np.zeros_like(weights)
    for n in range(n_max + 1):
        if weights[n] == 0.0:
            continue
        i = np.arange(n + 1)
        log_binom = gammaln(n + 1) - gammaln(i + 1) - gammaln(n - i + 1)
        if eta == 0.0:
            kernel = np.zeros(n + 1)
            kernel[0] = 1.0
        elif eta == 1.0:
            kernel = np.zeros(n + 1)
            kernel[n] = 1.0
        else:
            kernel = np.exp(log_binom + i * math.log(eta)
                            + (n - i) * math.log1p(-eta))
        out[: n + 1] += weights[n] * kernel
    return out


def apply_loss(signal: Signal, eta: float, n_th: float = 0.0) -> Signal:
    """Transmit a signal through the loss channel of transmissivity eta and
    environment occupation n_th (applied before the phase noise; the two
    commute at the photon-distribution level)."""
    if not (0.0 <= eta <= 1.0):
        raise DomainError(f"transmissivity must lie in [0, 1], got {eta}")
    if n_th < 0.0:
        raise DomainError(f"environment occupation must be >= 0, got {n_th}")
    if eta == 1.0 and n_th == 0.0:
        return signal

    if isinstance(signal, CoherentSignal):
        if n_th == 0.0:
            return CoherentSignal(math.sqrt(eta) * signal.alpha)
        return apply_loss(to_gaussian(signal), eta, n_th)
    if isinstance(signal, SqueezedCoherentSignal):
        return apply_loss(to_gaussian(signal), eta, n_th)
    if isinstance(signal, GaussianSignal):
        v = eta * signal.cov_matrix() + (1.0 - eta) * (2.0 * n_th + 1.0) * np.eye(2)
        mu = math.sqrt(eta) * signal.mean_vector()
        return GaussianSignal((mu[0], mu[1]),
                              ((v[0, 0], v[0, 1]), (v[1, 0], v[1, 1])))
    if isinstance(signal, FockSignal):
        if n_th > 0.0:
            raise UnsupportedSignalError(
                "thermal-environment loss on Fock signals is not modeled")
        occupied = [k for k in signal.occupations if k > 0]
        if len(occupied) > 1:
            raise UnsupportedSignalError(
                "loss on multi-mode Fock signals breaks the rank-one block "
                "structure; occupy a single mode instead")
        n = signal.total
        if n == 0:
            return signal
        weights = np.zeros(n + 1)
        weights[n] = 1.0
        return NumberDiagonalSignal(tuple(binomial_loss_weights(weights, eta)))
    if isinstance(signal, NumberDiagonalSignal):
        if n_th > 0.0:
            raise UnsupportedSignalError(
                "thermal-environment loss on number-diagonal signals is not modeled")
        damped = binomial_loss_weights(np.asarray(signal.weights), eta)
        return NumberDiagonalSignal(tuple(damped), modes=signal.modes)
    raise UnsupportedSignalError(f"unknown signal kind {type(signal).__name__}")
