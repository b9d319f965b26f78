"""Deterministic Verblunsky coefficient families."""
from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .opuc import VerblunskySeq, validate_verblunsky

__all__ = ["FAMILIES", "generate_family", "family_label"]


def _n(d, key="N_trunc", default=None):
    n = d.get(key, d.get("N", default))
    if n is None or int(n) != n or n < 0:
        raise ConfigError(f"family {d.get('kind')!r} needs a nonnegative integer {key}")
    return int(n)


def _zeros(d):
    return np.zeros(_n(d, default=0))


def _single(d):
    index = int(d.get("index", 0))
    if index < 0:
        raise ConfigError("single: index must be >= 0")
    g = np.zeros(index + 1)
    g[index] = float(d["value"])
    return g


def _power_law(d):
    c, a = float(d["c"]), float(d["alpha"])
    return c * (np.arange(_n(d)) + 1.0) ** -a


def _log_tempered(d):
    c, a = float(d["c"]), float(d["alpha"])
    s = np.arange(_n(d)) + 1.0
    return c * s ** -a / np.log(s + 1.0)


def _chebyshev_u_pattern(d):
    """Even entries 0, ``gamma_{2k+1} = -1/(k+2)``; the Geronimus image is b = 1/2, v = 0."""
    g = np.zeros(_n(d))
    k = np.arange(g.size // 2)
    g[1::2] = -1.0 / (k + 2.0)
    return g


def _explicit(d):
    return np.asarray(d["values"], dtype=float)


def _random(d):
    bound = float(d.get("bound", 0.3))
    if not 0.0 <= bound < 1.0:
        raise ConfigError("random: bound must lie in [0, 1)")
    rng = np.random.default_rng(int(d.get("seed", 0)))
    return rng.uniform(-bound, bound, _n(d))


FAMILIES = {
    "zeros": _zeros,
    "single": _single,
    "power_law": _power_law,
    "log_tempered": _log_tempered,
    "chebyshev_u_pattern": _chebyshev_u_pattern,
    "explicit": _explicit,
    "random": _random,
}


def family_label(d):
    params = ",".join(f"{k}={d[k]}" for k in sorted(d) if k not in ("kind", "values"))
    return f"{d['kind']}({params})" if params else d["kind"]


def generate_family(descriptor, strict=False):
    """Build a :class:`VerblunskySeq` from a family descriptor.

    Examples
    --------
    >>> generate_family({"kind": "power_law", "c": 0.3, "alpha": 0.7, "N_trunc": 2}).gamma
    array([0.3       , 0.18466805])
    """
    if not isinstance(descriptor, dict) or "kind" not in descriptor:
        raise ConfigError("family descriptor must be a mapping with a 'kind'")
    kind = descriptor["kind"]
    if kind not in FAMILIES:
        raise ConfigError(f"unknown family {kind!r}; choose from {sorted(FAMILIES)}")
    try:
        raw = FAMILIES[kind](descriptor)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad parameters for family {kind!r}: {exc}") from exc
    return validate_verblunsky(raw, strict=strict, label=family_label(descriptor))
