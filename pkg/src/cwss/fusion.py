"""Per-band occupancy decisions and fusion-center combining.

Decision fusion (DeF): every user recovers its own spectrum, thresholds it
into a local band decision, and the fusion center takes an L-out-of-J vote.
Data fusion (DaF): the fusion center jointly recovers all users' spectra,
sums the bin magnitudes across users, and thresholds the aggregate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from cwss.bands import BandPlan, Category
from cwss.recovery import RecoveryConfig, default_eta, mod_omp, mod_somp
from cwss.sensing import Measurements

#: Canonical pipeline names: recovery algorithm x fusion scheme.
VARIANTS = ("OMP-DeF", "ModOMP-DeF", "SOMP-DaF", "ModSOMP-DaF")

_VARIANT_LOOKUP = {name.lower(): name for name in VARIANTS}


def canonical_variant(name: str) -> str:
    try:
        return _VARIANT_LOOKUP[str(name).lower()]
    except KeyError:
        raise ValueError(f"unknown variant {name!r}, expected one of {VARIANTS}") from None


@dataclass
class FusionConfig:
    """Decision thresholds and the vote rule.

    ``t_f`` is the amplitude threshold for local decisions (None: derived
    from the noise level as ``noise_multiple`` times the per-element noise
    standard deviation, floored for noiseless runs).  ``t_f_fused`` applies
    to the data-fusion aggregate (None: same as ``t_f``).  ``l_vote`` is the
    L of the L-out-of-J rule (None: ceil(J/2)).  ``force_c1`` overrides the
    fused output to occupied on always-occupied bands; off by default so
    reported statistics reflect raw algorithm behavior.
    """

    t_f: float | None = None
    l_vote: int | None = None
    t_f_fused: float | None = None
    noise_multiple: float = 3.0
    threshold_floor: float = 1e-6
    force_c1: bool = False


def default_threshold(
    noise_std, multiple: float = 3.0, floor: float = 1e-6
) -> float:
    """Amplitude threshold: a z-score rule on the propagated noise level.

    Unit-norm matrix columns keep the least-squares coefficient noise close
    to the per-element measurement noise, so the threshold is ``multiple``
    times the mean per-user noise standard deviation, floored for noiseless
    runs.
    """
    noise_std = np.atleast_1d(np.asarray(noise_std, dtype=np.float64))
    return max(multiple * float(noise_std.mean()), floor)


def _band_maxima(values: np.ndarray, plan: BandPlan) -> np.ndarray:
    if values.shape != (plan.n,):
        raise ValueError(f"estimate must have shape ({plan.n},), got {values.shape}")
    return np.maximum.reduceat(np.abs(values), plan.starts)


def decide_local(estimate: np.ndarray, plan: BandPlan, t_f: float) -> np.ndarray:
    """Flag band k occupied iff the peak magnitude inside it exceeds t_f."""
    return (_band_maxima(np.asarray(estimate), plan) > t_f).astype(np.uint8)


def fuse_decisions(local_decisions, l_vote: int) -> np.ndarray:
    """L-out-of-J vote: a band is occupied iff at least ``l_vote`` users say so."""
    votes = [np.asarray(d) for d in local_decisions]
    if not votes:
        raise ValueError("need at least one local decision")
    k = votes[0].shape
    if any(v.shape != k for v in votes):
        raise ValueError("local decisions have mismatched lengths")
    if not 1 <= l_vote <= len(votes):
        raise ValueError(f"l_vote must be in [1, {len(votes)}], got {l_vote}")
    return (np.sum(votes, axis=0) >= l_vote).astype(np.uint8)


def aggregate_estimates(joint_estimate: np.ndarray) -> np.ndarray:
    """Sum the magnitudes of the (n, j) joint estimate across users."""
    joint_estimate = np.asarray(joint_estimate)
    if joint_estimate.ndim != 2:
        raise ValueError(f"expected an (n, j) matrix, got shape {joint_estimate.shape}")
    return np.abs(joint_estimate).sum(axis=1)


def decide_fused_data(aggregate: np.ndarray, plan: BandPlan, t_f: float) -> np.ndarray:
    """Threshold the across-user aggregate exactly like a local decision."""
    return decide_local(aggregate, plan, t_f)


def run_pipeline(
    variant: str,
    measurements: Measurements,
    plan: BandPlan,
    prior: BandPlan | None = None,
    recovery_cfg: RecoveryConfig | None = None,
    fusion_cfg: FusionConfig | None = None,
) -> np.ndarray:
    """Produce the fused occupancy estimate for one pipeline variant.

    ``prior`` is consumed only by the modified variants (they require it);
    the plain variants always recover without prior knowledge.  When the
    recovery tolerance or thresholds are unset they are derived from the
    measurement noise level, per user for decision fusion and jointly for
    data fusion.
    """
    variant = canonical_variant(variant)
    recovery_cfg = recovery_cfg or RecoveryConfig()
    fusion_cfg = fusion_cfg or FusionConfig()
    theta = measurements.theta
    m, j = measurements.m, measurements.j_users
    modified = variant.startswith("Mod")
    if modified and prior is None:
        raise ValueError(f"variant {variant} requires prior knowledge")
    used_prior = prior if modified else None

    t_f = fusion_cfg.t_f
    if t_f is None:
        t_f = default_threshold(
            measurements.noise_std, fusion_cfg.noise_multiple, fusion_cfg.threshold_floor
        )

    if variant.endswith("DeF"):
        l_vote = fusion_cfg.l_vote if fusion_cfg.l_vote is not None else math.ceil(j / 2)
        locals_ = []
        for user in range(j):
            y_j = measurements.y[:, user]
            cfg_j = recovery_cfg
            if cfg_j.eta is None:
                cfg_j = replace(cfg_j, eta=default_eta(m, measurements.noise_std[user], y_j))
            result = mod_omp(y_j, theta, used_prior, cfg_j)
            locals_.append(decide_local(result.estimate, plan, t_f))
        fused = fuse_decisions(locals_, l_vote)
    else:
        cfg_joint = recovery_cfg
        if cfg_joint.eta is None:
            cfg_joint = replace(
                cfg_joint, eta=default_eta(m, measurements.noise_std, measurements.y)
            )
        result = mod_somp(measurements.y, theta, used_prior, cfg_joint)
        aggregate = aggregate_estimates(result.estimate)
        t_f_fused = fusion_cfg.t_f_fused if fusion_cfg.t_f_fused is not None else t_f
        fused = decide_fused_data(aggregate, plan, t_f_fused)

    if fusion_cfg.force_c1:
        c1_bands = list(plan.bands_in(Category.C1))
        fused[c1_bands] = 1
    return fused
