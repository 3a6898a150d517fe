"""JSON Schemas of everything the command line writes."""

_number_or_null = {"type": ["number", "null"]}

ESTIMATE = {
    "type": "object",
    "required": ["value", "count", "std_error"],
    "properties": {
        "value": {"type": "number", "minimum": -1, "maximum": 1},
        "count": {"type": "integer", "minimum": 1},
        "std_error": {"type": "number", "minimum": 0},
    },
}

STATISTIC = {
    "type": ["object", "null"],
    "required": ["value", "std_error", "bound_satisfied"],
    "properties": {
        "value": {"type": "number"},
        "std_error": {"type": "number", "minimum": 0},
        "bound_satisfied": {"type": "boolean"},
    },
}

MARGINALS = {
    "type": "object",
    "required": ["left", "right"],
    "additionalProperties": False,
    "properties": {
        side: {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["count", "plus", "minus"],
                "properties": {
                    "count": {"type": "integer", "minimum": 1},
                    "plus": {"type": "number", "minimum": 0, "maximum": 1},
                    "minus": {"type": "number", "minimum": 0, "maximum": 1},
                },
            },
        }
        for side in ("left", "right")
    },
}

_STATISTICS = {
    "M": {"type": "integer", "minimum": 0},
    "pair_counts": {"type": "object", "additionalProperties": {"type": "integer", "minimum": 0}},
    "correlations": {"type": "object", "additionalProperties": {"oneOf": [ESTIMATE, {"type": "null"}]}},
    "B": STATISTIC,
    "S": STATISTIC,
    "marginals": MARGINALS,
    "no_signaling_gap": {"type": "number", "minimum": 0, "maximum": 1},
}

ANALYSIS_REPORT = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "analysis report",
    "type": "object",
    "required": ["model_id", "seed", "protocol", "retained_fraction", "eq3", "filtered", *_STATISTICS],
    "properties": {
        "model_id": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "protocol": {"enum": ["three_setting", "four_setting"]},
        "retained_fraction": {"type": "number", "minimum": 0, "maximum": 1},
        **_STATISTICS,
        "eq3": {
            "type": ["object", "null"],
            "required": ["triples", "max", "histogram"],
            "properties": {
                "triples": {"type": "integer", "minimum": 0},
                "max": {"type": ["integer", "null"], "maximum": 3},
                "histogram": {
                    "type": "object",
                    "propertyNames": {"enum": ["-3", "-1", "1", "3"]},
                    "additionalProperties": {"type": "integer", "minimum": 0},
                },
            },
        },
        "filtered": {
            "type": ["object", "null"],
            "required": ["window", "retained_fraction", *_STATISTICS],
            "properties": {
                "window": _number_or_null,
                "retained_fraction": {"type": "number", "minimum": 0, "maximum": 1},
                **_STATISTICS,
            },
        },
    },
}

BOUND_REPORT = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "bound oracle report",
    "type": "object",
    "required": ["oracle", "max", "min", "variables", "attaining", "minimizing", "evaluated"],
    "properties": {
        "oracle": {"enum": ["bell-bound", "eq3-bound"]},
        "max": {"type": "integer"},
        "min": {"type": "integer"},
        "variables": {"type": "array", "items": {"type": "string"}},
        "attaining": {"type": "array", "items": {"type": "array", "items": {"enum": [-1, 1]}}},
        "minimizing": {"type": "array", "items": {"type": "array", "items": {"enum": [-1, 1]}}},
        "evaluated": {"type": "integer", "minimum": 1},
    },
}

COUNT_REPORT = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "counting oracle report",
    "type": "object",
    "required": ["oracle", "model", "exact_count", "formula_value"],
    "properties": {
        "oracle": {"const": "count"},
        "model": {"enum": ["independent_pairs", "counterfactual_triples", "counterfactual_quadruples"]},
        "exact_count": {"type": "integer", "minimum": 1},
        "formula_value": {"type": ["integer", "null"]},
        "independent_count": {"type": ["integer", "null"]},
        "strict_subset": {"type": ["boolean", "null"]},
        "bounds_satisfied": {"type": ["boolean", "null"]},
        "reachable": {"type": ["array", "null"], "items": {"type": "array", "items": {"type": "integer"}}},
    },
}

FRACTION = {"type": "string", "pattern": r"^-?\d+(/\d+)?$"}

FEASIBILITY_REPORT = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "feasibility oracle report",
    "type": "object",
    "required": ["oracle", "correlations", "feasible", "closed_form_feasible", "conditions", "witness"],
    "properties": {
        "oracle": {"const": "feasibility"},
        "correlations": {"type": "array", "items": FRACTION, "minItems": 3, "maxItems": 3},
        "feasible": {"type": "boolean"},
        "closed_form_feasible": {"type": "boolean"},
        "conditions": {"type": "array", "items": FRACTION, "minItems": 4, "maxItems": 4},
        "witness": {
            "type": ["object", "null"],
            "propertyNames": {"pattern": r"^[+-]1,[+-]1,[+-]1$"},
            "additionalProperties": FRACTION,
        },
    },
}

PROB_SPACE_REPORT = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "product-space oracle report",
    "type": "object",
    "required": ["oracle", "M", "impossible_mass"],
    "properties": {
        "oracle": {"const": "prob-space"},
        "M": {"type": "integer", "minimum": 1},
        "impossible_mass": {
            "type": "object",
            "required": ["left", "right"],
            "additionalProperties": {
                "type": "object",
                "required": ["fraction", "value"],
                "properties": {"fraction": FRACTION, "value": {"type": "number", "minimum": 0, "maximum": 1}},
            },
        },
    },
}

SIDECAR = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "log metadata sidecar",
    "type": "object",
    "required": ["model_id", "seed", "protocol", "settings"],
    "properties": {
        "model_id": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "protocol": {"enum": ["3-setting", "4-setting"]},
        "settings": {
            "type": "object",
            "required": ["left", "right"],
            "additionalProperties": {
                "type": "object",
                "propertyNames": {"enum": ["a", "b", "c", "d"]},
                "additionalProperties": {"type": "number", "minimum": 0, "exclusiveMaximum": 6.283185307179587},
            },
        },
        "retained_fraction": {"type": "number", "minimum": 0, "maximum": 1},
    },
}

MANIFEST = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "run manifest",
    "type": "object",
    "required": ["config_digest", "tool_version", "seed", "workers", "resolved_config", "outputs"],
    "properties": {
        "config_digest": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
        "tool_version": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "workers": {"type": "integer", "minimum": 1},
        "resolved_config": {"type": "object"},
        "outputs": {
            "type": "object",
            "required": ["log", "sidecar", "manifest"],
            "additionalProperties": {"type": "string"},
        },
    },
}
