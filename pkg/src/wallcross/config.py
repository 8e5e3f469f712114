"""Run configuration: INI files with exact-rational fields.

Vectors are space-separated on one line; matrices and class lists are
multi-line blocks (one row per line).  Rationals are written ``a/b``.  The
intersection matrix is optional and defaults to diag(1, -1, ..., -1).

Example::

    [manifold]
    b_minus = 2

    [bundle]
    p1 = -8
    c = 0 0 0

    [period_points]
    omega_minus = 1 -3/10 1/10
    omega_plus = 1 3/10 1/10

    [evaluation]
    l = 0
    classes =
        0 1 0
        0 0 1

    [options]
    convention = permutation_sum
    epsilon_rule = half
    r_max = 2
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, replace
from fractions import Fraction

from .closed_forms import SOURCE_DERIVED, SOURCE_PAPER
from .geometry import CONVENTIONS, PERMUTATION_SUM, ManifoldModel
from .instanton_link import (
    CAP_RELATION_ALT,
    CAP_RELATION_DEFAULT,
    KR_SIGN_MINUS,
    KR_SIGN_PLUS,
    EquivariantOptions,
)
from .walls import EPSILON_HALF, EPSILON_QUARTER, CrossingProblem

ENV_PREFIX = "WALLCROSS_"


class ConfigError(Exception):
    """Malformed configuration, with the offending section and key."""


@dataclass(frozen=True)
class RunOptions:
    convention: str = PERMUTATION_SUM
    epsilon_rule: str = EPSILON_HALF
    r_max: int = 2
    emit_trace: bool = False
    kr_sign: str = KR_SIGN_PLUS
    cap_relation: str = CAP_RELATION_DEFAULT
    source: str = SOURCE_DERIVED

    def equivariant(self) -> EquivariantOptions:
        return EquivariantOptions(kr_sign=self.kr_sign, cap_relation=self.cap_relation)


@dataclass(frozen=True)
class RunConfig:
    problem: CrossingProblem
    options: RunOptions


def _fail(section: str, key: str, message: str):
    raise ConfigError(f"[{section}] {key}: {message}")


def _get(parser, section, key, default=None, required=False):
    if not parser.has_section(section):
        if required:
            raise ConfigError(f"[{section}]: missing section")
        return default
    value = parser.get(section, key, fallback=None)
    if value is None:
        if required:
            _fail(section, key, "missing key")
        return default
    return value


def _parse_int(section, key, text):
    try:
        return int(text.strip())
    except ValueError:
        _fail(section, key, f"not an integer: {text!r}")


def _parse_frac_vec(section, key, text):
    try:
        return tuple(Fraction(tok) for tok in text.split())
    except (ValueError, ZeroDivisionError):
        _fail(section, key, f"not a rational vector: {text!r}")


def _parse_int_vec(section, key, text):
    try:
        return tuple(int(tok) for tok in text.split())
    except ValueError:
        _fail(section, key, f"not an integer vector: {text!r}")


def _parse_int_rows(section, key, text):
    rows = [line for line in (ln.strip() for ln in text.splitlines()) if line]
    return tuple(_parse_int_vec(section, key, row) for row in rows)


def _parse_bool(section, key, text):
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    _fail(section, key, f"not a boolean: {text!r}")


def _parse_choice(section, key, text, choices):
    value = text.strip()
    if value not in choices:
        _fail(section, key, f"must be one of {sorted(choices)}, got {value!r}")
    return value


def load_config(path: str) -> RunConfig:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path!r}")

    b_minus = _parse_int("manifold", "b_minus", _get(parser, "manifold", "b_minus", required=True))
    matrix_text = _get(parser, "manifold", "intersection_matrix")
    matrix = _parse_int_rows("manifold", "intersection_matrix", matrix_text) if matrix_text else None
    try:
        model = ManifoldModel.build(b_minus, matrix)
    except Exception as exc:
        raise ConfigError(f"[manifold]: {exc}") from exc

    p1 = _parse_int("bundle", "p1", _get(parser, "bundle", "p1", required=True))
    c = _parse_int_vec("bundle", "c", _get(parser, "bundle", "c", required=True))

    omega_minus = _parse_frac_vec(
        "period_points", "omega_minus", _get(parser, "period_points", "omega_minus", required=True)
    )
    omega_plus = _parse_frac_vec(
        "period_points", "omega_plus", _get(parser, "period_points", "omega_plus", required=True)
    )

    l = _parse_int("evaluation", "l", _get(parser, "evaluation", "l", "0"))
    classes_text = _get(parser, "evaluation", "classes", "")
    xs = _parse_int_rows("evaluation", "classes", classes_text) if classes_text else ()

    options = RunOptions(
        convention=_parse_choice(
            "options", "convention", _get(parser, "options", "convention", PERMUTATION_SUM), CONVENTIONS
        ),
        epsilon_rule=_parse_choice(
            "options", "epsilon_rule", _get(parser, "options", "epsilon_rule", EPSILON_HALF),
            (EPSILON_HALF, EPSILON_QUARTER),
        ),
        r_max=_parse_int("options", "r_max", _get(parser, "options", "r_max", "2")),
        emit_trace=_parse_bool(
            "options", "emit_trace", _get(parser, "options", "emit_trace", "false")
        ),
        kr_sign=_parse_choice(
            "options", "kr_sign", _get(parser, "options", "kr_sign", KR_SIGN_PLUS),
            (KR_SIGN_PLUS, KR_SIGN_MINUS),
        ),
        cap_relation=_parse_choice(
            "options", "cap_relation", _get(parser, "options", "cap_relation", CAP_RELATION_DEFAULT),
            (CAP_RELATION_DEFAULT, CAP_RELATION_ALT),
        ),
        source=_parse_choice(
            "options", "source", _get(parser, "options", "source", SOURCE_DERIVED),
            (SOURCE_DERIVED, SOURCE_PAPER),
        ),
    )

    try:
        problem = CrossingProblem(model, p1, c, omega_minus, omega_plus, l, xs)
    except Exception as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(problem, options)


def apply_env_overrides(options: RunOptions, env=os.environ) -> RunOptions:
    """Environment overrides for kr_sign, cap_relation and epsilon_rule."""
    updates = {}
    spec = {
        "KR_SIGN": ("kr_sign", (KR_SIGN_PLUS, KR_SIGN_MINUS)),
        "CAP_RELATION": ("cap_relation", (CAP_RELATION_DEFAULT, CAP_RELATION_ALT)),
        "EPSILON_RULE": ("epsilon_rule", (EPSILON_HALF, EPSILON_QUARTER)),
    }
    for suffix, (attr, choices) in spec.items():
        value = env.get(ENV_PREFIX + suffix)
        if value is None:
            continue
        if value not in choices:
            raise ConfigError(
                f"{ENV_PREFIX}{suffix}: must be one of {sorted(choices)}, got {value!r}"
            )
        updates[attr] = value
    return replace(options, **updates) if updates else options
