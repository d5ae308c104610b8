"""Scenario configuration: JSON schema, semantic checks and unit conversion.

Two unit systems are accepted. ``natural`` means MeV for masses, energies and
momenta and MeV^-1 for lengths. ``nm-keV`` means keV and nm; the values are
converted to natural units on load. Polynomial phase coefficients and
tabulated t values follow the same energy unit (keV^2 for t in nm-keV).
"""
from __future__ import annotations

import hashlib
import json
import math
from typing import Any

from jsonschema import Draft202012Validator

from . import units

SCHEMA_VERSION = 1

_pos = {"type": "number", "exclusiveMinimum": 0}
_vec = {"type": "array", "items": {"type": "number"}, "minItems": 1, "maxItems": 2}
_width = {"type": ["number", "array"], "exclusiveMinimum": 0,
          "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1, "maxItems": 2}

_packet = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind", "dim"],
    "properties": {
        "kind": {"enum": ["gaussian", "vortex", "airy", "cat"]},
        "dim": {"enum": [1, 2]},
        "sigma": _width,
        "sigma_x": _width,
        "mean_p": _vec,
        "shift_b": _vec,
        "ell": {"type": "integer"},
        "kappa": {"type": "number", "minimum": 0},
        "xi": {"type": ["number", "array"], "items": {"type": "number"},
               "minItems": 1, "maxItems": 2},
        "separation": {"type": "number", "minimum": 0},
        "weights": {"type": "array", "minItems": 2, "maxItems": 2,
                    "items": {"type": ["number", "array"], "items": {"type": "number"},
                              "minItems": 2, "maxItems": 2}},
        "axis": {"enum": [0, 1]},
    },
}

_grid = {
    "type": "object",
    "additionalProperties": False,
    "required": ["name", "packet", "r_range", "p_range", "n_r", "n_p"],
    "properties": {
        "name": {"type": "string", "pattern": "^[A-Za-z0-9_-]+$"},
        "packet": {"enum": ["packet1", "packet2"]},
        "r_range": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        "p_range": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        "n_r": {"type": "integer", "minimum": 16},
        "n_p": {"type": "integer", "minimum": 16},
    },
}

SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["schema_version", "units", "seed", "particles", "collision", "amplitude",
                 "observables"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "units": {"enum": ["natural", "nm-keV"]},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
        "label": {"type": "string"},
        "particles": {
            "type": "object",
            "additionalProperties": False,
            "required": ["m1", "m2", "packet1", "packet2"],
            "properties": {"m1": _pos, "m2": _pos, "packet1": _packet, "packet2": _packet},
        },
        "collision": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "sqrt_s": _pos,
                "beam_momentum": _pos,
                "impact": _vec,
                "axis": {"const": "z"},
            },
        },
        "amplitude": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["constant_phase", "log_phase", "polynomial_phase",
                                  "size_phase", "tabulated"]},
                "A": _pos,
                "power": {"type": "number", "minimum": 0},
                "zeta0": {"type": "number"},
                "eta": {"type": "number"},
                "lambda2": _pos,
                "coeffs": {"type": "array", "items": {"type": "array",
                                                      "items": {"type": "number"}}},
                "size": {"type": "number", "minimum": 0},
                "table_t": {"type": "array", "items": {"type": "number"}, "minItems": 4},
                "table_phase": {"type": "array", "items": {"type": "number"}, "minItems": 4},
                "table_modulus": {"type": "array", "items": _pos, "minItems": 4},
            },
        },
        "observables": {
            "type": "object",
            "additionalProperties": False,
            "required": ["thetas"],
            "properties": {
                "thetas": {"type": "array", "minItems": 1,
                           "items": {"type": "number", "exclusiveMinimum": 0,
                                     "exclusiveMaximum": math.pi}},
                "n_phi": {"type": "integer", "minimum": 8},
                "phi_offset": {"type": "number"},
                "wigner": {"type": "array", "items": _grid},
                "negativity_scan": {
                    "type": "object", "additionalProperties": False,
                    "required": ["separations"],
                    "properties": {"separations": {"type": "array", "minItems": 1,
                                                   "items": {"type": "number", "minimum": 0}}},
                },
                "sigma_p_sweep": {
                    "type": "object", "additionalProperties": False,
                    "required": ["values"],
                    "properties": {"values": {"type": "array", "minItems": 4, "items": _pos},
                                   "theta": {"type": "number", "exclusiveMinimum": 0,
                                             "exclusiveMaximum": math.pi},
                                   "phi": {"type": "number"}},
                },
                "atom_size": _pos,
                "oracle": {
                    "type": "object", "additionalProperties": False,
                    "required": ["method"],
                    "properties": {
                        "method": {"enum": ["tensor_quadrature", "monte_carlo"]},
                        "nodes": {"type": "integer", "minimum": 32, "multipleOf": 16},
                        "samples": {"type": "integer", "minimum": 10000},
                        "target": _pos,
                        "max_nodes": {"type": "integer", "minimum": 32},
                    },
                },
            },
        },
    },
}

_VALIDATOR = Draft202012Validator(SCHEMA)


def _path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


def _semantic(cfg: dict) -> list[str]:
    errs = []
    parts = cfg.get("particles", {})
    dims = {}
    for name in ("packet1", "packet2"):
        p = parts.get(name)
        if not isinstance(p, dict):
            continue
        where = f"particles.{name}"
        dim = p.get("dim")
        dims[name] = dim
        kind = p.get("kind")
        if kind == "vortex" and dim != 2:
            errs.append(f"{where}.dim: vortex requires dim=2")
        if ("sigma" in p) == ("sigma_x" in p):
            errs.append(f"{where}: give exactly one of sigma (momentum) or sigma_x (length)")
        for key in ("sigma", "sigma_x", "mean_p", "shift_b", "xi"):
            v = p.get(key)
            if isinstance(v, list) and dim in (1, 2) and len(v) not in (1, dim):
                errs.append(f"{where}.{key}: expected {dim} components, got {len(v)}")
        if kind == "cat" and "separation" not in p:
            errs.append(f"{where}.separation: cat packets need a separation")
        if kind != "cat":
            for key in ("separation", "weights", "axis"):
                if key in p:
                    errs.append(f"{where}.{key}: only valid for cat packets")
        if kind != "vortex":
            for key in ("ell", "kappa"):
                if key in p:
                    errs.append(f"{where}.{key}: only valid for vortex packets")
        if kind != "airy" and "xi" in p:
            errs.append(f"{where}.xi: only valid for airy packets")
        if kind == "cat" and p.get("axis", 0) >= (dim or 1):
            errs.append(f"{where}.axis: axis outside the packet dimension")
    if len(dims) == 2 and None not in dims.values() and dims["packet1"] != dims["packet2"]:
        errs.append("particles.packet2.dim: both packets must share the transverse dimension")
    coll = cfg.get("collision", {})
    if isinstance(coll, dict):
        if ("sqrt_s" in coll) == ("beam_momentum" in coll):
            errs.append("collision: give exactly one of sqrt_s or beam_momentum")
        m1, m2 = parts.get("m1"), parts.get("m2")
        if ("sqrt_s" in coll and isinstance(m1, (int, float)) and isinstance(m2, (int, float))
                and coll["sqrt_s"] <= m1 + m2):
            errs.append("collision.sqrt_s: must exceed m1 + m2")
        dim = dims.get("packet1")
        if "impact" in coll and dim in (1, 2) and len(coll["impact"]) != dim:
            errs.append(f"collision.impact: expected {dim} components")
    amp = cfg.get("amplitude", {})
    if isinstance(amp, dict) and amp.get("kind") == "tabulated":
        if "table_t" not in amp or "table_phase" not in amp:
            errs.append("amplitude: tabulated kind needs table_t and table_phase")
    obs = cfg.get("observables", {})
    if isinstance(obs, dict):
        for i, g in enumerate(obs.get("wigner", []) or []):
            if not isinstance(g, dict):
                continue
            for key in ("n_r", "n_p"):
                n = g.get(key)
                if isinstance(n, int) and n & (n - 1):
                    errs.append(f"observables.wigner[{i}].{key}: must be a power of two")
            for key in ("r_range", "p_range"):
                rng = g.get(key)
                if isinstance(rng, list) and len(rng) == 2 and not rng[0] < rng[1]:
                    errs.append(f"observables.wigner[{i}].{key}: min must be below max")
        names = [g.get("name") for g in obs.get("wigner", []) or [] if isinstance(g, dict)]
        if len(names) != len(set(names)):
            errs.append("observables.wigner: grid names must be unique")
        if "sigma_p_sweep" in obs and "oracle" not in obs:
            errs.append("observables.sigma_p_sweep: requires an oracle block")
        sweep = obs.get("sigma_p_sweep", {})
        vals = sweep.get("values") if isinstance(sweep, dict) else None
        if isinstance(vals, list) and len(vals) >= 4 and all(
                isinstance(v, (int, float)) and v > 0 for v in vals):
            if max(vals) < 10 * min(vals):
                errs.append("observables.sigma_p_sweep.values: must span at least a decade")
        if "negativity_scan" in obs and parts.get("packet1", {}).get("kind") != "cat":
            errs.append("observables.negativity_scan: requires a cat packet1")
    return errs


def validate(cfg: Any) -> list[str]:
    """Every schema and semantic violation, as 'path: message' strings."""
    errs = [f"{_path(e.absolute_path)}: {e.message}"
            for e in sorted(_VALIDATOR.iter_errors(cfg), key=lambda e: list(map(str, e.path)))]
    if isinstance(cfg, dict):
        errs.extend(_semantic(cfg))
    return errs


def config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    return hashlib.sha256(canon.encode("ascii")).hexdigest()


class Units:
    """Converters from config units to natural units (and back)."""

    def __init__(self, system: str):
        self.system = system
        nat = system == "natural"
        self.energy = 1.0 if nat else 1e-3           # -> MeV
        self.length = 1.0 if nat else 1.0 / units.HBARC_MEV_NM  # -> MeV^-1

    def e(self, value):
        return _scale(value, self.energy)

    def x(self, value):
        return _scale(value, self.length)

    def e_back(self, value):
        return _scale(value, 1.0 / self.energy)

    def x_back(self, value):
        return _scale(value, 1.0 / self.length)


def _scale(value, factor):
    if value is None:
        return None
    if isinstance(value, (list, tuple)):
        return [v * factor for v in value]
    return value * factor
