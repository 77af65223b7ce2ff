"""Loading frames and algebras from JSON files or inline JSON text."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Mapping

from .algebra import FiniteModalAlgebra
from .errors import InputError
from .frame import FiniteFrame, dual_algebra


def read_json(source: str) -> Mapping:
    """``source`` is a file path, or inline JSON when it starts with ``{``."""
    text = source if source.lstrip().startswith("{") else None
    if text is None:
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise InputError(f"cannot read {source!r}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{source!r} is not valid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})") from exc
    if not isinstance(data, dict):
        raise InputError(f"{source!r}: expected a JSON object")
    return data


def structure_from_json(data: Mapping) -> FiniteModalAlgebra:
    """Frame JSON (``points``/``edges``) or algebra JSON (``atoms``/``diamond``), as an algebra."""
    try:
        if "points" in data:
            points = data["points"]
            if len(set(points)) != len(points):
                raise InputError("duplicate point labels")
            return dual_algebra(FiniteFrame.from_json(data))
        if "atoms" in data:
            atoms = data["atoms"]
            if len(set(atoms)) != len(atoms):
                raise InputError("duplicate atom labels")
            extra = set(data.get("diamond", {})) - set(atoms)
            if extra:
                raise InputError(f"diamond mentions unknown atoms {sorted(extra)}")
            return FiniteModalAlgebra.from_json(data)
    except InputError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed structure: {exc}") from exc
    raise InputError("expected frame JSON with 'points' or algebra JSON with 'atoms'")


def load_algebra(source: str) -> FiniteModalAlgebra:
    return structure_from_json(read_json(source))
