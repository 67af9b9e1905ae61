"""JSON schemas for triple documents and CLI reports."""

TRIPLE_SCHEMA_ID = "nctwist-triple/v1"
REPORT_SCHEMA_ID = "nctwist-report/v1"

_COMPLEX = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_MATRIX = {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": _COMPLEX}}

TRIPLE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema", "algebra", "D", "J", "twists"],
    "properties": {
        "schema": {"const": TRIPLE_SCHEMA_ID},
        "algebra": {
            "type": "object",
            "required": ["summands", "rep_basis"],
            "properties": {
                "summands": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["label", "kind", "size"],
                        "properties": {
                            "label": {"type": "string"},
                            "kind": {"enum": ["R", "C", "H", "M"]},
                            "size": {"type": "integer", "minimum": 1},
                        },
                    },
                },
                "rep_basis": {"type": "array", "minItems": 1, "items": _MATRIX},
            },
        },
        "D": _MATRIX,
        "J": {
            "type": "object",
            "required": ["matrix", "parity"],
            "properties": {"matrix": _MATRIX, "parity": {"const": "antilinear"}},
        },
        "gamma": {"anyOf": [{"type": "null"}, _MATRIX]},
        "twists": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["D_l", "nu_l"],
                "properties": {"D_l": _MATRIX, "nu_l": _MATRIX},
            },
        },
        "metadata": {"type": "object"},
    },
}

_CONDITION = {
    "type": "object",
    "required": ["name", "pass", "residual"],
    "properties": {
        "name": {"type": "string"},
        "component": {"type": ["integer", "null"]},
        "pass": {"type": "boolean"},
        "residual": {"type": ["number", "string"]},
        "sign": {"type": ["integer", "null"]},
        "required": {"type": "boolean"},
        "note": {"type": "string"},
    },
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema", "command", "seed", "tolerance", "status", "result"],
    "properties": {
        "schema": {"const": REPORT_SCHEMA_ID},
        "command": {"enum": ["check", "fluctuate", "gauge", "break", "search"]},
        "input": {"type": ["string", "null"]},
        "seed": {"type": "integer"},
        "tolerance": {
            "type": "object",
            "required": ["atol", "rtol"],
            "properties": {"atol": {"type": "number"}, "rtol": {"type": "number"}},
        },
        "status": {"enum": ["pass", "violations"]},
        "conditions": {"type": "array", "items": _CONDITION},
        "result": {"type": "object"},
    },
}
