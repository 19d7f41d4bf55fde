"""Typed study scenarios: JSON loading, full validation, canonical hashing.

One scenario file per study. Field names carry units. Validation collects
every violation instead of stopping at the first.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import ValidationError

DENSELY_SPACED = "densely-spaced"
NEAR_FIELD = "near-field"
TRI_POL = "tri-pol"
EM_CORE_VALIDATION = "em-core-validation"
STUDIES = (DENSELY_SPACED, NEAR_FIELD, TRI_POL, EM_CORE_VALIDATION)

_BORESIGHTS = ("+x", "-x", "+y", "-y", "+z", "-z")


@dataclass(frozen=True)
class DenselySpacedScenario:
    """Capacity versus receive-element spacing for four array models."""

    name: str = DENSELY_SPACED
    master_seed: int = 0
    frequency_hz: float = 4.7e9
    tx_side_wavelengths: float = 4.0
    rx_side_wavelengths: float = 1.0
    tx_spacing_wavelengths: float = 0.5
    rx_spacing_wavelengths: tuple = (0.5, 0.25, 0.125)
    realizations: int = 1000
    snr_db: float = 0.0
    xpr_mu_db: float = 8.0
    xpr_sigma_db: float = 3.0
    element_efficiency: float = 0.8
    schemes: tuple = ("ideal", "ni", "ni-pd", "proposed")
    tx_boresight: str = "+x"
    rx_boresight: str = "-x"
    cluster_table: str | None = None
    cluster_weights: tuple | None = None
    quadrature_order: int = 16

    study = DENSELY_SPACED


@dataclass(frozen=True)
class NearFieldScenario:
    """Planar-versus-spherical wavefront correlation over user distances."""

    name: str = NEAR_FIELD
    master_seed: int = 0
    frequency_hz: float = 6.7e9
    aperture_m: float = 1.53
    bs_elements: int = 128
    ue_elements: int = 4
    ue_spacing_wavelengths: float = 0.5
    drop_distances_m: tuple = (20.0, 35.0, 60.0, 100.0, 180.0, 300.0, 500.0)
    include_far_field_check: bool = True
    time_s: float = 0.0
    velocity_mps: tuple = (0.0, 0.0, 0.0)
    profile_elements: int = 64
    profile_aperture_m: float = 1.4
    profile_distance_m: float = 20.0
    visibility_amplitude: float = 0.6
    visibility_decay: float = 10.0
    visibility_floor: float = 0.4
    visibility_jitter_std: float = 0.05
    visibility_rolloff: float = 10.0

    study = NEAR_FIELD


@dataclass(frozen=True)
class TriPolScenario:
    """Grouped uplink/downlink estimation versus the uplink-only benchmark."""

    name: str = TRI_POL
    master_seed: int = 0
    frequency_hz: float = 6.7e9
    cells: int = 3
    ues_per_cell: int = 50
    bs_ports: int = 256
    bs_panel_width_m: float = 0.33
    bs_panel_height_m: float = 1.5
    bs_height_m: float = 25.0
    bs_power_dbm: float = 39.64
    indoor_fraction: float = 0.8
    ue_ports: int = 8
    ue_spacing_wavelengths: float = 0.5
    z_gain_db: float = -10.0
    xpr_db: float = 8.0
    pilot_snr_db: float = 10.0
    percentiles: tuple = tuple(float(p) for p in range(5, 100, 5))

    study = TRI_POL

    def rx_split(self) -> tuple[int, int, int]:
        return {8: (2, 4, 2), 12: (2, 6, 3)}[self.ue_ports]

    def trials(self, scale: float = 1.0) -> int:
        return max(1, int(round(self.cells * self.ues_per_cell * scale)))


@dataclass(frozen=True)
class EmCoreValidationScenario:
    """Green-function decomposition residuals and field-region boundaries."""

    name: str = EM_CORE_VALIDATION
    master_seed: int = 0
    frequency_hz: float = 4.7e9
    samples: int = 1000
    k0r_min: float = 0.1
    k0r_max: float = 1.0e4
    region_cases: tuple = ((6.7e9, 1.53), (15.0e9, 1.4))

    study = EM_CORE_VALIDATION


_SCENARIO_TYPES = {
    DENSELY_SPACED: DenselySpacedScenario,
    NEAR_FIELD: NearFieldScenario,
    TRI_POL: TriPolScenario,
    EM_CORE_VALIDATION: EmCoreValidationScenario,
}


def _tupled(value):
    if isinstance(value, list):
        return tuple(_tupled(v) for v in value)
    return value


def _coerce(field: dataclasses.Field, value, errors: list) -> object:
    name = field.name
    default = field.default
    value = _tupled(value)
    if isinstance(default, bool):
        if not isinstance(value, bool):
            errors.append(f"{name}: expected true/false, got {value!r}")
        return value
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, int):
            errors.append(f"{name}: expected an integer, got {value!r}")
            return default
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            errors.append(f"{name}: expected a number, got {value!r}")
            return default
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            errors.append(f"{name}: expected a string, got {value!r}")
            return default
        return value
    if isinstance(default, tuple):
        if not isinstance(value, tuple):
            errors.append(f"{name}: expected a list, got {value!r}")
            return default
        return value
    # remaining defaults are None (optional str/tuple)
    return value


def _positive(scn, names, errors, strict=True):
    for n in names:
        v = getattr(scn, n)
        if v is None:
            continue
        if strict and not v > 0:
            errors.append(f"{n}: must be positive, got {v!r}")
        if not strict and v < 0:
            errors.append(f"{n}: must be nonnegative, got {v!r}")


def _counts(scn, names, errors):
    for n in names:
        if getattr(scn, n) < 1:
            errors.append(f"{n}: count must be >= 1, got {getattr(scn, n)!r}")


def validate_scenario(scn) -> list[str]:
    """Every violated invariant as one message; empty list when valid."""
    errors: list[str] = []
    if scn.study in (DENSELY_SPACED, NEAR_FIELD, TRI_POL, EM_CORE_VALIDATION):
        _positive(scn, ["frequency_hz"], errors)
    if isinstance(scn, DenselySpacedScenario):
        _counts(scn, ["realizations", "quadrature_order"], errors)
        _positive(scn, ["tx_side_wavelengths", "rx_side_wavelengths",
                        "tx_spacing_wavelengths"], errors)
        _positive(scn, ["xpr_sigma_db"], errors, strict=False)
        if not scn.rx_spacing_wavelengths:
            errors.append("rx_spacing_wavelengths: need at least one spacing")
        for s in scn.rx_spacing_wavelengths:
            if not (isinstance(s, (int, float)) and s > 0):
                errors.append(f"rx_spacing_wavelengths: spacing must be positive, got {s!r}")
        if not 0.0 < scn.element_efficiency <= 1.0:
            errors.append(f"element_efficiency: must lie in (0, 1], got {scn.element_efficiency!r}")
        known = ("ideal", "ni", "ni-pd", "proposed")
        for s in scn.schemes:
            if s not in known:
                errors.append(f"schemes: unknown scheme {s!r} (known: {', '.join(known)})")
        if not scn.schemes:
            errors.append("schemes: need at least one scheme")
        if scn.tx_boresight not in _BORESIGHTS:
            errors.append(f"tx_boresight: unknown boresight {scn.tx_boresight!r}")
        if scn.rx_boresight not in _BORESIGHTS:
            errors.append(f"rx_boresight: unknown boresight {scn.rx_boresight!r}")
        if scn.cluster_table is not None and not Path(scn.cluster_table).is_file():
            errors.append(f"cluster_table: file not found: {scn.cluster_table!r}")
        if scn.cluster_weights is not None:
            ws = scn.cluster_weights
            if any(not isinstance(w, (int, float)) or w < 0 for w in ws):
                errors.append("cluster_weights: weights must be nonnegative numbers")
            else:
                total = float(sum(ws))
                if abs(total - 1.0) > 1e-6:
                    errors.append(f"cluster_weights: weights must sum to 1, got {total!r}")
    elif isinstance(scn, NearFieldScenario):
        _counts(scn, ["bs_elements", "ue_elements", "profile_elements"], errors)
        _positive(scn, ["aperture_m", "ue_spacing_wavelengths", "profile_aperture_m",
                        "profile_distance_m", "visibility_decay", "visibility_rolloff"], errors)
        _positive(scn, ["visibility_amplitude", "visibility_jitter_std", "time_s"],
                  errors, strict=False)
        if not 0.0 <= scn.visibility_floor <= 1.0:
            errors.append(f"visibility_floor: must lie in [0, 1], got {scn.visibility_floor!r}")
        if not scn.drop_distances_m:
            errors.append("drop_distances_m: need at least one distance")
        for d in scn.drop_distances_m:
            if not (isinstance(d, (int, float)) and d > 0):
                errors.append(f"drop_distances_m: distance must be positive, got {d!r}")
        if len(scn.velocity_mps) != 3 or any(
            not isinstance(v, (int, float)) or not math.isfinite(v) for v in scn.velocity_mps
        ):
            errors.append("velocity_mps: expected three finite components")
    elif isinstance(scn, TriPolScenario):
        _counts(scn, ["cells", "ues_per_cell", "bs_ports"], errors)
        _positive(scn, ["bs_panel_width_m", "bs_panel_height_m", "bs_height_m",
                        "ue_spacing_wavelengths"], errors)
        if scn.ue_ports not in (8, 12):
            errors.append(f"ue_ports: must be 8 or 12, got {scn.ue_ports!r}")
        if not 0.0 <= scn.indoor_fraction <= 1.0:
            errors.append(f"indoor_fraction: must lie in [0, 1], got {scn.indoor_fraction!r}")
        if not scn.percentiles:
            errors.append("percentiles: need at least one percentile")
        for p in scn.percentiles:
            if not (isinstance(p, (int, float)) and 0.0 < p < 100.0):
                errors.append(f"percentiles: must lie in (0, 100), got {p!r}")
    elif isinstance(scn, EmCoreValidationScenario):
        _counts(scn, ["samples"], errors)
        _positive(scn, ["k0r_min"], errors)
        if not scn.k0r_max > scn.k0r_min:
            errors.append(f"k0r_max: must exceed k0r_min, got {scn.k0r_max!r}")
        for case in scn.region_cases:
            if (not isinstance(case, tuple) or len(case) != 2
                    or any(not isinstance(v, (int, float)) or v <= 0 for v in case)):
                errors.append(f"region_cases: expected [frequency_hz, aperture_m] pairs, got {case!r}")
    if scn.master_seed < 0:
        errors.append(f"master_seed: must be nonnegative, got {scn.master_seed!r}")
    if not scn.name:
        errors.append("name: must be nonempty")
    return errors


def scenario_from_dict(payload: dict) -> object:
    """Build and fully validate a scenario from parsed JSON."""
    errors: list[str] = []
    if not isinstance(payload, dict):
        raise ValidationError(["scenario must be a JSON object"])
    study = payload.get("study")
    if study not in _SCENARIO_TYPES:
        raise ValidationError(
            [f"study: expected one of {', '.join(STUDIES)}, got {study!r}"]
        )
    cls = _SCENARIO_TYPES[study]
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in payload.items():
        if key == "study":
            continue
        if key not in fields:
            errors.append(f"{key}: unknown field for study {study!r}")
            continue
        kwargs[key] = _coerce(fields[key], value, errors)
    scn = cls(**kwargs)
    errors.extend(validate_scenario(scn))
    if errors:
        raise ValidationError(errors)
    return scn


def load_scenario(path) -> object:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError([f"cannot read scenario file: {exc}"]) from exc
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(
            [f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"]
        ) from exc
    return scenario_from_dict(payload)


def serialize_scenario(scn) -> dict:
    """JSON-ready dict with every field explicit; loads back to an equal scenario."""

    def plain(v):
        if isinstance(v, tuple):
            return [plain(x) for x in v]
        return v

    payload = {"study": scn.study}
    for f in dataclasses.fields(scn):
        payload[f.name] = plain(getattr(scn, f.name))
    return payload


def save_scenario(scn, path) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        json.dump(serialize_scenario(scn), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def scenario_hash(scn) -> str:
    canon = json.dumps(serialize_scenario(scn), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]
