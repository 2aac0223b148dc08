"""Greedy sparse recovery: OMP and SOMP, plus band-prior modified variants.

All four solvers share one joint pursuit core.  The modified variants use a
band plan as prior knowledge with three rules: the always-occupied C1 bins
seed the support before any selection; a selection landing in a C2 band pulls
in the whole band (fully-used bands are all-or-nothing); a selection in a C3
band adds only the selected bin.  With no prior the core degrades to plain
OMP/SOMP, and a single measurement column makes the joint solvers coincide
with their single-user counterparts.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from cwss.bands import BandPlan, Category

#: Multiplier (1 + delta) on the expected noise norm used for the default
#: residual stopping tolerance.
DEFAULT_ETA_SLACK = 1.1

#: Relative tolerance for the default noiseless stopping rule.
NOISELESS_ETA_SCALE = 1e-8

#: Selection stalls when the best remaining correlation falls below this
#: fraction of the initial residual norm (all signal explained, e.g. when a
#: minimum iteration count keeps the loop alive on a noiseless input).
STALL_SCALE = 1e-9


def default_max_iterations(m: int) -> int:
    """Default selection-round cap: half the measurement count."""
    return max(1, m // 2)


def default_eta(m: int, noise_std, y) -> float:
    """Residual tolerance from the injected noise level.

    With per-element complex noise variance sigma_j^2 the expected squared
    residual noise norm is sum_j m*sigma_j^2; the tolerance is its square
    root with a small safety slack.  With zero noise it falls back to a
    relative tolerance on the measurement norm.
    """
    noise_std = np.atleast_1d(np.asarray(noise_std, dtype=np.float64))
    total = float(np.sum(noise_std**2))
    if total == 0.0:
        return NOISELESS_ETA_SCALE * float(np.linalg.norm(y))
    return DEFAULT_ETA_SLACK * np.sqrt(m * total)


@dataclass
class RecoveryConfig:
    """Knobs of the pursuit loop.

    ``eta`` is the residual stopping tolerance (None: noiseless default
    relative to ||y||).  ``max_iterations`` caps selection rounds (None:
    m // 2).  ``min_iterations`` keeps selecting until that many rounds even
    once the residual tolerance is met; stalled selections (no correlation
    left) still stop early.  Ties in the selection rule break to the lowest
    index, the one deterministic rule implemented.
    """

    eta: float | None = None
    max_iterations: int | None = None
    min_iterations: int = 0
    tie_break: str = "lowest-index"


@dataclass
class RecoveryResult:
    """Outcome of one pursuit run.

    ``estimate`` is (n,) for single-user calls and (n, j) for joint calls,
    zero outside ``support`` (insertion order).  ``residual_trace`` records
    the residual norm before any selection and after every least-squares
    re-solve; it is non-increasing.  ``stop_reason`` is one of ``residual``,
    ``max-iterations``, ``support-cap`` or ``stalled``.
    """

    estimate: np.ndarray
    support: list[int]
    iterations: int
    final_residual_norm: float
    residual_trace: list[float] = field(default_factory=list)
    stop_reason: str = "residual"
    degenerate: bool = False


def _solve_on_support(theta: np.ndarray, support: list[int], y: np.ndarray):
    """Least squares of complex columns on a real sub-matrix.

    Stacks real and imaginary parts so one real factorization serves all
    right-hand sides; returns (coefficients, residual, residual_norm, rank).
    """
    a = theta[:, support]
    j = y.shape[1]
    b = np.concatenate([y.real, y.imag], axis=1)
    sol, _, rank, _ = np.linalg.lstsq(a, b, rcond=None)
    z = sol[:, :j] + 1j * sol[:, j:]
    residual = y - a @ z
    return z, residual, float(np.linalg.norm(residual)), int(rank)


def least_squares_on_support(theta, support, y) -> np.ndarray:
    """Coefficients minimizing ||theta[:, support] @ z - y||_2.

    Rank-deficient sub-matrices are solved in the minimum-norm sense and
    flagged with a RuntimeWarning.
    """
    theta = np.asarray(theta, dtype=np.float64)
    support = [int(i) for i in support]
    if not support:
        raise ValueError("support must be non-empty")
    if len(set(support)) != len(support):
        raise ValueError("support indices must be unique")
    if len(support) > theta.shape[0]:
        raise ValueError(
            f"support size {len(support)} exceeds measurement count {theta.shape[0]}"
        )
    y = np.asarray(y, dtype=np.complex128)
    single = y.ndim == 1
    if single:
        y = y[:, None]
    if y.shape[0] != theta.shape[0]:
        raise ValueError("measurement length does not match the matrix")
    z, _, _, rank = _solve_on_support(theta, support, y)
    if rank < len(support):
        warnings.warn(
            "rank-deficient sub-matrix in least squares; minimum-norm solution",
            RuntimeWarning,
            stacklevel=2,
        )
    return z[:, 0] if single else z


def _joint_pursuit(
    y: np.ndarray, theta: np.ndarray, prior: BandPlan | None, cfg: RecoveryConfig
) -> RecoveryResult:
    m, n = theta.shape
    j = y.shape[1]
    if y.shape[0] != m:
        raise ValueError(f"measurements have length {y.shape[0]}, matrix has {m} rows")
    if prior is not None and prior.n != n:
        raise ValueError(f"prior plan length {prior.n} does not match matrix width {n}")
    if cfg.tie_break != "lowest-index":
        raise ValueError(f"unknown tie_break rule {cfg.tie_break!r}")
    max_iter = cfg.max_iterations
    if max_iter is None:
        max_iter = default_max_iterations(m)
    if not 1 <= max_iter <= m:
        raise ValueError(f"max_iterations must be in [1, {m}], got {max_iter}")
    if not 0 <= cfg.min_iterations <= max_iter:
        raise ValueError("min_iterations must be in [0, max_iterations]")

    y0_norm = float(np.linalg.norm(y))
    eta = cfg.eta if cfg.eta is not None else NOISELESS_ETA_SCALE * y0_norm
    stall_tol = STALL_SCALE * y0_norm

    in_support = np.zeros(n, dtype=bool)
    support: list[int] = []
    degenerate = False

    residual = y
    residual_norm = y0_norm
    trace = [residual_norm]

    if prior is not None:
        warm = prior.category_members(Category.C1)
        if warm.size:
            if warm.size > m:
                raise ValueError(
                    f"always-occupied prior has {warm.size} bins, more than m={m}"
                )
            support.extend(int(i) for i in warm)
            in_support[warm] = True
            z, residual, residual_norm, rank = _solve_on_support(theta, support, y)
            degenerate |= rank < len(support)
            trace.append(residual_norm)

    t = 0
    stop_reason = "residual"
    while True:
        if residual_norm <= eta and t >= cfg.min_iterations:
            stop_reason = "residual"
            break
        if t >= max_iter:
            stop_reason = "max-iterations"
            break
        correlation = np.abs(theta.T @ residual).sum(axis=1)
        correlation[in_support] = -1.0
        pick = int(np.argmax(correlation))  # argmax takes the lowest tied index
        if correlation[pick] <= stall_tol:
            stop_reason = "stalled"
            break
        t += 1
        if prior is None:
            new = [pick]
        else:
            band = prior.band_of(pick)
            if prior.categories[band] is Category.C2:
                new = [int(i) for i in prior.indices(band) if not in_support[i]]
            else:
                # C3 bands add the single bin; C1 cannot be selected once
                # warm-started (its correlations are masked).
                new = [pick]
        if len(support) + len(new) > m:
            stop_reason = "support-cap"
            break
        support.extend(new)
        in_support[new] = True
        z, residual, residual_norm, rank = _solve_on_support(theta, support, y)
        degenerate |= rank < len(support)
        trace.append(residual_norm)

    estimate = np.zeros((n, j), dtype=np.complex128)
    if support:
        estimate[support, :] = z
    if degenerate:
        warnings.warn(
            "rank-deficient sub-matrix during pursuit; minimum-norm solve used",
            RuntimeWarning,
            stacklevel=3,
        )
    return RecoveryResult(
        estimate=estimate,
        support=support,
        iterations=t,
        final_residual_norm=residual_norm,
        residual_trace=trace,
        stop_reason=stop_reason,
        degenerate=degenerate,
    )


def mod_somp(
    y: np.ndarray,
    theta: np.ndarray,
    prior: BandPlan | None,
    cfg: RecoveryConfig | None = None,
) -> RecoveryResult:
    """Joint pursuit over the (m, j) measurement matrix with band priors.

    Selection maximizes the correlation magnitude summed over users; the
    support is shared, coefficients solve per-user least squares on it.
    """
    y = np.asarray(y, dtype=np.complex128)
    if y.ndim == 1:
        y = y[:, None]
    return _joint_pursuit(y, np.asarray(theta, dtype=np.float64), prior, cfg or RecoveryConfig())


def somp(y, theta, cfg: RecoveryConfig | None = None) -> RecoveryResult:
    """Joint pursuit without prior knowledge (plain SOMP)."""
    return mod_somp(y, theta, None, cfg)


def mod_omp(
    y: np.ndarray,
    theta: np.ndarray,
    prior: BandPlan | None,
    cfg: RecoveryConfig | None = None,
) -> RecoveryResult:
    """Single-user pursuit with band priors (Mod-OMP)."""
    y = np.asarray(y, dtype=np.complex128)
    if y.ndim != 1:
        raise ValueError(f"expected a single measurement vector, got shape {y.shape}")
    result = mod_somp(y[:, None], theta, prior, cfg)
    return replace(result, estimate=result.estimate[:, 0])


def omp(y, theta, cfg: RecoveryConfig | None = None) -> RecoveryResult:
    """Single-user pursuit without prior knowledge (plain OMP)."""
    return mod_omp(y, theta, None, cfg)
