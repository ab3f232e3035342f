"""Python bindings for the toolforge core library."""

import json

from . import _core
from ._core import CallSyntaxError, SchemaError, ToolforgeError, loss_from_logprobs, normalize_calls, rule_ids

__all__ = [
    "CallSyntaxError",
    "SchemaError",
    "ToolforgeError",
    "check_record",
    "loss_from_logprobs",
    "normalize_calls",
    "parse_calls",
    "rule_ids",
    "validate_api",
]


def parse_calls(text):
    """Parse a call-string like ``[f(a=1), g(b="x")]`` into a list of dicts."""
    return json.loads(_core.parse_calls(text))


def validate_api(definition):
    """Validate an API definition (dict or JSON text) and return it in canonical form."""
    if not isinstance(definition, str):
        definition = json.dumps(definition)
    return json.loads(_core.validate_api(definition))


def check_record(record):
    """Rule-layer violations for one sample record (dict or JSON text)."""
    if not isinstance(record, str):
        record = json.dumps(record)
    return json.loads(_core.check_record(record))
