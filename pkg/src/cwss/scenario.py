"""Ground-truth synthesis: band occupancy and jointly sparse multi-user spectra."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from cwss.bands import BandPlan, Category

FADING_MODELS = ("rayleigh", "none")

#: Occupied-band counts of the reference scenario: both C1 bands, 2 of the
#: 33 C2 bands and all 6 C3 bands, 10 occupied bands in total.
DEFAULT_OCCUPIED_COUNTS = {"C1": 2, "C2": 2, "C3": 6}

SCENARIO_FORMAT = "cwss-scenario-v1"


def _normalize_counts(counts) -> dict[str, int]:
    out = {"C1": 0, "C2": 0, "C3": 0}
    for key, value in dict(counts).items():
        name = Category(key).value
        out[name] = int(value)
        if out[name] < 0:
            raise ValueError(f"occupied count for {name} must be >= 0")
    return out


def generate_occupancy(plan: BandPlan, counts, rng: np.random.Generator) -> np.ndarray:
    """Draw a length-k binary occupancy vector with fixed per-category counts.

    All C1 bands are always occupied, so ``counts['C1']`` must equal the
    number of C1 bands.  Within C2 and C3 the occupied bands are chosen
    uniformly without replacement (C2 drawn first, then C3).
    """
    counts = _normalize_counts(counts)
    flags = np.zeros(plan.k, dtype=np.uint8)
    for cat in Category:
        bands = plan.bands_in(cat)
        want = counts[cat.value]
        if want > len(bands):
            raise ValueError(
                f"cannot occupy {want} {cat.value} bands, plan only has {len(bands)}"
            )
        if cat is Category.C1:
            if want != len(bands):
                raise ValueError(
                    f"C1 bands are always occupied: count must be {len(bands)}, got {want}"
                )
            flags[list(bands)] = 1
        elif want:
            chosen = rng.choice(len(bands), size=want, replace=False)
            flags[np.asarray(bands, dtype=np.intp)[chosen]] = 1
    return flags


def synthesize_spectra(
    plan: BandPlan,
    occupancy: np.ndarray,
    j_users: int,
    fading: str = "rayleigh",
    rng: np.random.Generator | None = None,
    c3_occupied_per_band: int = 1,
) -> np.ndarray:
    """Generate the (n, j_users) complex spectrum matrix for one scenario.

    Every occupied C1/C2 band is non-zero on all of its bins; every occupied
    C3 band is non-zero on ``c3_occupied_per_band`` bins chosen at random but
    shared by all users, so the support is identical across users while the
    values differ.  Each non-zero bin carries unit base amplitude times one
    complex fading coefficient per (user, occupied band): circularly
    symmetric Gaussian with unit mean square, i.e. Rayleigh magnitude.

    Draw order, for reproducibility: partially used bins of occupied C3
    bands in ascending band order, then the fading coefficient matrix.
    """
    if j_users < 1:
        raise ValueError(f"j_users must be >= 1, got {j_users}")
    if fading not in FADING_MODELS:
        raise ValueError(f"unknown fading model {fading!r}, expected {FADING_MODELS}")
    occupancy = np.asarray(occupancy)
    if occupancy.shape != (plan.k,):
        raise ValueError(f"occupancy must have shape ({plan.k},), got {occupancy.shape}")
    if not np.isin(occupancy, (0, 1)).all():
        raise ValueError("occupancy must be binary")
    if rng is None:
        raise ValueError("an explicit seeded Generator is required")

    occupied = [k for k in range(plan.k) if occupancy[k]]
    band_bins = []
    for k in occupied:
        idx = plan.indices(k)
        if plan.categories[k] is Category.C3 and idx.size > 1:
            take = int(c3_occupied_per_band)
            if not 1 <= take <= idx.size - 1:
                raise ValueError(
                    f"c3_occupied_per_band must be in [1, {idx.size - 1}] "
                    f"for band {k} of size {idx.size}, got {take}"
                )
            sub = rng.choice(idx.size, size=take, replace=False)
            idx = idx[np.sort(sub)]
        band_bins.append(idx)

    if fading == "rayleigh":
        coeff = (
            rng.standard_normal((len(occupied), j_users))
            + 1j * rng.standard_normal((len(occupied), j_users))
        ) / np.sqrt(2.0)
    else:
        coeff = np.ones((len(occupied), j_users), dtype=np.complex128)

    spectra = np.zeros((plan.n, j_users), dtype=np.complex128)
    for row, idx in enumerate(band_bins):
        spectra[idx, :] = coeff[row, :]
    return spectra


@dataclass(frozen=True)
class ScenarioTruth:
    """One fully drawn ground truth: plan, band occupancy and user spectra."""

    plan: BandPlan
    occupancy: np.ndarray  # (k,) uint8
    spectra: np.ndarray  # (n, j_users) complex128
    occupied_counts: dict

    @property
    def j_users(self) -> int:
        return self.spectra.shape[1]

    def support(self) -> np.ndarray:
        """Common non-zero index set of the user spectra."""
        return np.flatnonzero(np.abs(self.spectra).max(axis=1) > 0)


def draw_scenario(
    plan: BandPlan,
    counts,
    j_users: int,
    fading: str = "rayleigh",
    rng: np.random.Generator | None = None,
    c3_occupied_per_band: int = 1,
) -> ScenarioTruth:
    """Draw occupancy then spectra from one RNG stream."""
    occupancy = generate_occupancy(plan, counts, rng)
    spectra = synthesize_spectra(
        plan, occupancy, j_users, fading, rng, c3_occupied_per_band
    )
    return ScenarioTruth(
        plan=plan,
        occupancy=occupancy,
        spectra=spectra,
        occupied_counts=_normalize_counts(counts),
    )


def _complex_to_pairs(arr: np.ndarray) -> list:
    return np.stack([arr.real, arr.imag], axis=-1).tolist()


def _pairs_to_complex(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=np.float64)
    return arr[..., 0] + 1j * arr[..., 1]


def scenario_to_dict(truth: ScenarioTruth, theta=None, measurements=None) -> dict:
    """Serialize a scenario (optionally with the sensing matrix and samples)."""
    doc = {
        "format": SCENARIO_FORMAT,
        "n": truth.plan.n,
        "boundaries": list(truth.plan.boundaries()),
        "categories": [c.value for c in truth.plan.categories],
        "occupancy": truth.occupancy.astype(int).tolist(),
        "occupied_counts": dict(truth.occupied_counts),
        "spectra": [_complex_to_pairs(truth.spectra[:, j]) for j in range(truth.j_users)],
    }
    if theta is not None:
        doc["theta"] = np.asarray(theta, dtype=np.float64).tolist()
    if measurements is not None:
        doc["measurements"] = {
            "snr_db": "inf" if np.isinf(measurements.snr_db) else float(measurements.snr_db),
            "noise_std": measurements.noise_std.tolist(),
            "y": [_complex_to_pairs(measurements.y[:, j]) for j in range(measurements.y.shape[1])],
        }
    return doc


def scenario_from_dict(doc: dict) -> ScenarioTruth:
    """Rebuild a ScenarioTruth from its serialized form, re-validating."""
    if doc.get("format") != SCENARIO_FORMAT:
        raise ValueError(f"unsupported scenario format {doc.get('format')!r}")
    plan = BandPlan.from_boundaries(doc["n"], doc["boundaries"], doc["categories"])
    occupancy = np.asarray(doc["occupancy"], dtype=np.uint8)
    if occupancy.shape != (plan.k,):
        raise ValueError("occupancy length does not match the band plan")
    spectra = np.stack([_pairs_to_complex(col) for col in doc["spectra"]], axis=1)
    if spectra.shape[0] != plan.n:
        raise ValueError("spectrum length does not match the band plan")
    return ScenarioTruth(
        plan=plan,
        occupancy=occupancy,
        spectra=spectra,
        occupied_counts={str(k): int(v) for k, v in doc.get("occupied_counts", {}).items()},
    )


def scenario_dumps(truth: ScenarioTruth, theta=None, measurements=None) -> str:
    """Canonical JSON text (sorted keys, indent 2); byte-stable for a fixed seed."""
    doc = scenario_to_dict(truth, theta=theta, measurements=measurements)
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def scenario_loads(text: str) -> ScenarioTruth:
    return scenario_from_dict(json.loads(text))
