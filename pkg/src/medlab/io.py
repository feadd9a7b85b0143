"""File formats: algebras, measures, groups; all JSON, all round-trip stable."""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from pathlib import Path
from typing import Optional, Union

from .algebra import MedianAlgebra
from .errors import InputFormatError, MedlabError, NotMedianClosed
from .groups import Automorphism, FiniteGroup, group_closure, validate_automorphism
from .measures import Measure

PathLike = Union[str, Path]


def file_digest(path: PathLike) -> str:
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _load_json(path: PathLike):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputFormatError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"{path} is not valid JSON: {exc}") from exc


def dump_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


# -- algebras -------------------------------------------------------------------


def payload_to_algebra(payload, origin: str = "<payload>") -> MedianAlgebra:
    """Strict reader for the algebra object format; re-validates closure."""
    if not isinstance(payload, dict):
        raise InputFormatError(f"{origin}: algebra payload must be an object")
    if "ambient_dim" not in payload or "points" not in payload:
        raise InputFormatError(f"{origin}: algebra needs 'ambient_dim' and 'points'")
    dim = payload["ambient_dim"]
    points = payload["points"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 0:
        raise InputFormatError(f"{origin}: ambient_dim must be a non-negative integer")
    if not isinstance(points, list) or not all(isinstance(p, str) for p in points):
        raise InputFormatError(f"{origin}: points must be a list of bit-strings")
    if sorted(points) != points:
        raise InputFormatError(f"{origin}: points must be lexicographically sorted")
    if len(set(points)) != len(points):
        raise InputFormatError(f"{origin}: duplicate points")
    name = payload.get("name")
    if name is not None and not isinstance(name, str):
        raise InputFormatError(f"{origin}: name must be a string")
    try:
        return MedianAlgebra(dim, points, name=name)
    except NotMedianClosed as exc:
        raise InputFormatError(f"{origin}: {exc}") from exc


def algebra_payload(algebra: MedianAlgebra, meta: Optional[dict] = None) -> dict:
    payload = {"ambient_dim": algebra.ambient_dim, "points": list(algebra.points)}
    if algebra.name:
        payload["name"] = algebra.name
    if meta:
        payload["meta"] = meta
    return payload


def load_algebra(path: PathLike) -> MedianAlgebra:
    return payload_to_algebra(_load_json(path), origin=str(path))


def save_algebra(algebra: MedianAlgebra, path: PathLike, meta: Optional[dict] = None) -> None:
    Path(path).write_text(dump_json(algebra_payload(algebra, meta)), encoding="utf-8")


def _resolve_algebra_ref(ref, base: Optional[Path], origin: str) -> MedianAlgebra:
    if isinstance(ref, dict):
        return payload_to_algebra(ref, origin=f"{origin}:algebra")
    if isinstance(ref, str):
        target = Path(ref)
        if not target.is_absolute() and base is not None:
            target = base / target
        return load_algebra(target)
    raise InputFormatError(f"{origin}: 'algebra' must be a path or an inline object")


# -- measures -------------------------------------------------------------------


def _parse_rational(text, origin: str) -> Fraction:
    if not isinstance(text, str):
        raise InputFormatError(f"{origin}: weights must be 'p/q' strings")
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputFormatError(f"{origin}: bad rational {text!r}") from exc
    if value < 0:
        raise InputFormatError(f"{origin}: negative weight {text!r}")
    return value


def load_measure(path: PathLike) -> Measure:
    origin = str(path)
    payload = _load_json(path)
    if not isinstance(payload, dict) or "algebra" not in payload or "weights" not in payload:
        raise InputFormatError(f"{origin}: measure needs 'algebra' and 'weights'")
    algebra = _resolve_algebra_ref(payload["algebra"], Path(path).parent, origin)
    raw = payload["weights"]
    if not isinstance(raw, dict):
        raise InputFormatError(f"{origin}: weights must map bit-strings to rationals")
    weights = [Fraction(0)] * len(algebra)
    for bits, text in raw.items():
        try:
            rank = algebra.rank_of_string(bits)
        except (KeyError, InputFormatError) as exc:
            raise InputFormatError(f"{origin}: unknown point {bits!r}") from exc
        weights[rank] = _parse_rational(text, origin)
    total = sum(weights)
    if total != 1:
        raise InputFormatError(f"{origin}: weights sum to {total}, not 1")
    return Measure(algebra, weights)


def measure_payload(measure: Measure, algebra_ref=None) -> dict:
    ref = algebra_ref if algebra_ref is not None else algebra_payload(measure.algebra)
    weights = {
        measure.algebra.point_string(i): str(w)
        for i, w in enumerate(measure.weights)
        if w
    }
    return {"algebra": ref, "weights": weights}


def save_measure(measure: Measure, path: PathLike, algebra_ref=None) -> None:
    Path(path).write_text(dump_json(measure_payload(measure, algebra_ref)), encoding="utf-8")


# -- groups ---------------------------------------------------------------------


def load_group(path: PathLike, algebra: Optional[MedianAlgebra] = None) -> FiniteGroup:
    """Read generators, validate them as automorphisms, and close the group.

    When ``algebra`` is given, an inline or referenced algebra in the file
    must equal it.
    """
    origin = str(path)
    payload = _load_json(path)
    if not isinstance(payload, dict) or "generators" not in payload:
        raise InputFormatError(f"{origin}: group needs 'generators'")
    file_algebra = None
    if "algebra" in payload:
        file_algebra = _resolve_algebra_ref(payload["algebra"], Path(path).parent, origin)
    if algebra is None:
        algebra = file_algebra
    elif file_algebra is not None and file_algebra != algebra:
        raise InputFormatError(f"{origin}: group file algebra differs from the given one")
    if algebra is None:
        raise InputFormatError(f"{origin}: no algebra given for the group")
    raw = payload["generators"]
    if not isinstance(raw, list) or not all(isinstance(g, list) for g in raw):
        raise InputFormatError(f"{origin}: generators must be lists of point ids")
    generators = []
    for g in raw:
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in g):
            raise InputFormatError(f"{origin}: generator entries must be integers")
        generators.append(validate_automorphism(algebra, g))
    if not generators:
        generators = [Automorphism(algebra, range(len(algebra)), _validated=True)]
    return group_closure(generators)


def group_payload(group: FiniteGroup, algebra_ref=None) -> dict:
    ref = algebra_ref if algebra_ref is not None else algebra_payload(group.algebra)
    return {"algebra": ref, "generators": [list(g.perm) for g in group.generators]}


def save_group(group: FiniteGroup, path: PathLike, algebra_ref=None) -> None:
    Path(path).write_text(dump_json(group_payload(group, algebra_ref)), encoding="utf-8")
