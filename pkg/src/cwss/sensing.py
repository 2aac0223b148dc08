"""Sub-Nyquist sensing: the shared measurement matrix and noisy projections."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def make_sensing_matrix(m: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. Gaussian (m, n) matrix with unit-norm columns.

    Gaussian ensembles satisfy the usual incoherence requirements with high
    probability; column normalization keeps correlation magnitudes and
    least-squares coefficients on a common scale.
    """
    if m < 1 or m > n:
        raise ValueError(f"need 0 < m <= n, got m={m}, n={n}")
    theta = rng.standard_normal((m, n))
    theta /= np.linalg.norm(theta, axis=0, keepdims=True)
    return theta


@dataclass(frozen=True)
class Measurements:
    """Per-user measurement columns produced with one shared matrix.

    ``noise_std[j]`` is the complex noise standard deviation per measurement
    element for user j (0 for the noiseless case); downstream stopping
    tolerances and decision thresholds derive from it.
    """

    y: np.ndarray  # (m, j_users) complex128
    theta: np.ndarray  # (m, n) matrix every column was produced with
    snr_db: float
    noise_std: np.ndarray  # (j_users,)

    @property
    def m(self) -> int:
        return self.y.shape[0]

    @property
    def j_users(self) -> int:
        return self.y.shape[1]


def measure(
    theta: np.ndarray,
    spectra: np.ndarray,
    snr_db: float,
    rng: np.random.Generator | None = None,
) -> Measurements:
    """Project spectra through ``theta`` and add complex white Gaussian noise.

    The per-user noise variance is set so that the measurement-domain ratio
    10*log10(||theta @ s_j||^2 / E||n_j||^2) equals ``snr_db``.  ``snr_db``
    of +inf (or a zero-power column) yields exact noiseless measurements.
    """
    theta = np.asarray(theta)
    spectra = np.asarray(spectra, dtype=np.complex128)
    if spectra.ndim == 1:
        spectra = spectra[:, None]
    if spectra.shape[0] != theta.shape[1]:
        raise ValueError(
            f"spectrum length {spectra.shape[0]} does not match matrix width {theta.shape[1]}"
        )
    m = theta.shape[0]
    clean = theta @ spectra
    if math.isinf(snr_db):
        return Measurements(
            y=clean,
            theta=theta,
            snr_db=math.inf,
            noise_std=np.zeros(spectra.shape[1]),
        )
    if rng is None:
        raise ValueError("a seeded Generator is required for noisy measurements")
    signal_power = np.sum(np.abs(clean) ** 2, axis=0)  # (j,)
    sigma2 = signal_power * 10.0 ** (-snr_db / 10.0) / m
    sigma = np.sqrt(sigma2)
    noise = (
        rng.standard_normal(clean.shape) + 1j * rng.standard_normal(clean.shape)
    ) / np.sqrt(2.0)
    return Measurements(
        y=clean + noise * sigma[None, :],
        theta=theta,
        snr_db=float(snr_db),
        noise_std=sigma,
    )
