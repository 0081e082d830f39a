"""JSON schemas for every report the command line emits."""

from __future__ import annotations

import jsonschema

NUMBER = {"type": "number"}
NULLABLE_NUMBER = {"type": ["number", "null"]}

SUBEXTREMAL = {
    "type": "object",
    "required": ["is_subextremal", "roots", "r_e", "r_c_horizon", "degenerate", "spin_below_mass"],
    "properties": {
        "is_subextremal": {"type": "boolean"},
        "roots": {"type": "array", "items": NUMBER},
        "r_e": NULLABLE_NUMBER,
        "r_c_horizon": NULLABLE_NUMBER,
        "degenerate": {"type": "boolean"},
        "spin_below_mass": {"type": "boolean"},
    },
}

_DATUM = {
    "type": "object",
    "required": ["xi_t", "xi_phi", "r_crit", "theta", "xi_theta"],
    "properties": {k: NUMBER for k in ("xi_t", "xi_phi", "r_crit", "theta", "xi_theta")},
}

TRAPPED_ROW = {
    "type": "object",
    "required": ["xi_t", "xi_phi", "r_crit", "theta", "xi_theta", "w_u", "w_s"],
    "properties": {k: NUMBER for k in ("xi_t", "xi_phi", "r_crit", "theta", "xi_theta", "w_u", "w_s")},
}

TRAPPED_SET = {
    "type": "object",
    "required": ["rows", "skipped"],
    "properties": {"rows": {"type": "array", "items": TRAPPED_ROW}, "skipped": {"type": "integer", "minimum": 0}},
}

RATE_BOUNDS = {
    "type": "object",
    "required": ["nu_min", "nu_max", "argmin", "argmax", "grid_spec"],
    "properties": {
        "nu_min": {"type": "number", "exclusiveMinimum": 0},
        "nu_max": {"type": "number", "exclusiveMinimum": 0},
        "argmin": _DATUM,
        "argmax": _DATUM,
        "grid_spec": {"type": "object"},
    },
}

BRACKET_RESIDUAL = {
    "type": "object",
    "required": ["point", "residual_matrix", "max_residual", "mode"],
    "properties": {
        "point": {
            "type": "object",
            "required": ["t", "r", "theta", "phi", "xi_t", "xi_r", "xi_theta", "xi_phi"],
            "additionalProperties": NUMBER,
        },
        "residual_matrix": {
            "type": "array",
            "minItems": 8,
            "maxItems": 8,
            "items": {"type": "array", "minItems": 8, "maxItems": 8, "items": NUMBER},
        },
        "max_residual": {"type": "number", "minimum": 0},
        "mode": {"enum": ["dual-number", "finite-difference"]},
    },
}

NORMAL_FORM = {
    "type": "object",
    "required": ["reports", "max_residual", "mode", "passed"],
    "properties": {
        "reports": {"type": "array", "items": BRACKET_RESIDUAL},
        "max_residual": {"type": "number", "minimum": 0},
        "mode": {"enum": ["dual-number", "finite-difference"]},
        "passed": {"type": "boolean"},
    },
}

ORDER_ESTIMATE = {
    "type": "object",
    "required": ["m_est", "m_tilde_est", "fit_residual", "grid_spec"],
    "properties": {
        "m_est": NUMBER,
        "m_tilde_est": NUMBER,
        "kappa": NUMBER,
        "fit_residual": {"type": "number", "minimum": 0},
        "grid_spec": {"type": "object"},
        "symbol": {"type": "string"},
    },
}

TRAJECTORY_ROW = {
    "type": "object",
    "required": ["s", "t", "r", "theta", "phi", "xi_t", "xi_r", "xi_theta", "xi_phi", "p_residual"],
    "additionalProperties": NUMBER,
}

FLOW = {
    "type": "object",
    "required": ["samples", "integrator", "diagnostics", "exit_reason"],
    "properties": {
        "samples": {"type": "array", "items": TRAJECTORY_ROW},
        "integrator": {"type": "object"},
        "diagnostics": {"type": "object"},
        "exit_reason": {"type": ["string", "null"]},
    },
}


def validate(doc, schema) -> None:
    jsonschema.validate(doc, schema)
