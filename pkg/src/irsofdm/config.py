"""Experiment configuration: profiles, JSON config files and validation.

A config file is a JSON object with the sections ``grid``, ``channel``,
``response_model``, ``design`` and ``sweep``; any key left out keeps the
value of the selected profile. Example::

    {
      "profile": "desk",
      "grid": {"n_subcarriers": 16, "bandwidth_hz": 2e8, "carrier_hz": 2.4e9, "cp_length": 16},
      "channel": {"tap_count": 8, "sigma2_dbm": -80, "dist_ap_irs_m": 50},
      "response_model": {"name": "default-2g4", "alpha": [0, 0.05, 0.5, 0.2228, 0.2, 3.4, -1.5708],
                         "mode": "practical"},
      "design": {"m_elements": 8, "bits": 1, "s_max": 2},
      "sweep": {"power_dbm": [20, 30, 40, 50], "trials": 500, "seed": 7}
    }
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field

from .channel import PROFILES, LinkGeometry
from .design import DesignConfig
from .exceptions import ConfigError, ModelValidityError
from .reflection import DEFAULT_PARAMS, MODES, CircuitParams, OfdmGrid, validate_params

DEFAULT_SWEEP_DBM = [20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0]

_PAPER = {
    "grid": {"n_subcarriers": 64, "bandwidth_hz": 0.2e9, "carrier_hz": 2.4e9, "cp_length": 16},
    "channel": {
        "tap_count": 8,
        "sigma2_dbm": -80.0,
        "dist_ap_irs_m": 50.0,
        "dist_irs_user_m": 2.0,
        "dist_ap_user_m": 50.0,
        "ple_ap_irs": 2.2,
        "ple_irs_user": 2.4,
        "ple_ap_user": 3.5,
        "ref_gain_db": -30.0,
        "profile": "uniform",
        "decay": 1.0,
    },
    "response_model": {**DEFAULT_PARAMS.to_dict(), "mode": "practical"},
    "design": {"m_elements": 36, "bits": 1, "s_max": 2, "cond_threshold": 1e8, "max_exhaustive_bits": 3,
               "incremental": True},
    "sweep": {"power_dbm": DEFAULT_SWEEP_DBM, "trials": 1000, "seed": 2024,
              "denominator": "empirical", "energy_draws": 10000},
}

_DESK = copy.deepcopy(_PAPER)
_DESK["grid"]["n_subcarriers"] = 16
_DESK["design"]["m_elements"] = 8
_DESK["sweep"]["trials"] = 500

PROFILE_DEFAULTS = {"paper": _PAPER, "desk": _DESK}


@dataclass
class ExperimentConfig:
    grid: OfdmGrid
    geometry: LinkGeometry
    params: CircuitParams
    design: DesignConfig
    m_elements: int
    sigma2_dbm: float = -80.0
    response_mode: str = "practical"
    power_dbm: list = field(default_factory=lambda: list(DEFAULT_SWEEP_DBM))
    trials: int = 500
    seed: int = 2024
    pdp: str = "uniform"
    pdp_decay: float = 1.0
    denominator: str = "empirical"
    energy_draws: int = 10000
    profile: str = "custom"

    def __post_init__(self):
        if self.m_elements < 1:
            raise ConfigError("m_elements must be positive")
        if self.response_mode not in MODES:
            raise ConfigError(f"response_model.mode must be one of {MODES}")
        if self.trials < 1:
            raise ConfigError("trials must be positive")
        if self.denominator not in ("empirical", "analytic"):
            raise ConfigError("sweep.denominator must be 'empirical' or 'analytic'")
        if self.pdp not in PROFILES:
            raise ConfigError(f"channel.profile must be one of {PROFILES}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        try:
            validate_params(self.params, self.grid)
        except ModelValidityError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self):
        return {
            "profile": self.profile,
            "grid": {k: v for k, v in self.grid.to_dict().items() if k != "tap_count"},
            "channel": {
                "tap_count": self.grid.tap_count,
                "sigma2_dbm": self.sigma2_dbm,
                **self.geometry.to_dict(),
                "profile": self.pdp,
                "decay": self.pdp_decay,
            },
            "response_model": {**self.params.to_dict(), "mode": self.response_mode},
            "design": {"m_elements": self.m_elements, **self.design.to_dict()},
            "sweep": {
                "power_dbm": list(self.power_dbm),
                "trials": self.trials,
                "seed": self.seed,
                "denominator": self.denominator,
                "energy_draws": self.energy_draws,
            },
        }

    @classmethod
    def from_dict(cls, d):
        try:
            g, c, r, de, s = (d[k] for k in ("grid", "channel", "response_model", "design", "sweep"))
            grid = OfdmGrid(
                n_subcarriers=int(g["n_subcarriers"]),
                bandwidth_hz=float(g["bandwidth_hz"]),
                carrier_hz=float(g["carrier_hz"]),
                tap_count=int(c["tap_count"]),
                cp_length=int(g["cp_length"]),
            )
            geo_keys = LinkGeometry.__dataclass_fields__
            geometry = LinkGeometry(**{k: float(v) for k, v in c.items() if k in geo_keys})
            params = CircuitParams(alpha=tuple(r["alpha"]), name=r.get("name", "custom"))
            design = DesignConfig(**{k: v for k, v in de.items() if k != "m_elements"})
            return cls(
                grid=grid,
                geometry=geometry,
                params=params,
                design=design,
                m_elements=int(de["m_elements"]),
                sigma2_dbm=float(c["sigma2_dbm"]),
                response_mode=r.get("mode", "practical"),
                power_dbm=[float(p) for p in s["power_dbm"]],
                trials=int(s["trials"]),
                seed=int(s["seed"]),
                pdp=c.get("profile", "uniform"),
                pdp_decay=float(c.get("decay", 1.0)),
                denominator=s.get("denominator", "empirical"),
                energy_draws=int(s.get("energy_draws", 10000)),
                profile=d.get("profile", "custom"),
            )
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid config: {exc}") from exc

    def config_hash(self):
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def replace(self, **sections):
        """Copy with some sections' keys overridden, e.g. ``replace(design={"bits": 3})``."""
        return ExperimentConfig.from_dict(_merge(self.to_dict(), sections))


def _merge(base, override):
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def profile_config(profile="desk", **sections):
    if profile not in PROFILE_DEFAULTS:
        raise ConfigError(f"unknown profile {profile!r}, expected one of {sorted(PROFILE_DEFAULTS)}")
    d = _merge(PROFILE_DEFAULTS[profile], sections)
    d["profile"] = profile
    return ExperimentConfig.from_dict(d)


def load_config(path=None, profile=None):
    """Read a JSON config file on top of a profile's defaults.

    The profile is ``profile`` if given, else the file's ``"profile"`` key,
    else ``"desk"``.
    """
    data = {}
    if path is not None:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
        unknown = set(data) - {"profile", "grid", "channel", "response_model", "design", "sweep"}
        if unknown:
            raise ConfigError(f"{path}: unknown sections {sorted(unknown)}")
    name = profile or data.get("profile", "desk")
    sections = {k: v for k, v in data.items() if k != "profile"}
    return profile_config(name, **sections)
