"""Default size budgets, overridable through ``CHARSUM_BUDGET``.

The environment variable holds comma-separated ``name=value`` pairs, e.g.
``CHARSUM_BUDGET="ext_field=65536,g_brute_c=150"``.
"""

from __future__ import annotations

import os

DEFAULT_BUDGETS: dict[str, int] = {
    # largest p**m accepted by build_ext_field
    "ext_field": 2**15,
    # largest q**2 for the brute O(q^2) double sums (H, g)
    "double_sum": 4_000_000,
    # largest modulus c for G_brute (O(c^3) memory, O(c^4) grid time)
    "g_brute_c": 120,
    # largest modulus for a memoized Kloosterman table
    "kloosterman_c": 5000,
    # largest p in the real-character and Jacobi-sum suites
    "real_char_p": 101,
    # largest q in cubic_moment_rhs
    "moment_q": 7,
    # largest q for diagonal_D
    "diagonal_q": 1000,
}


class SizeLimitError(ValueError):
    """A requested computation exceeds its configured size budget."""


def _env_overrides() -> dict[str, int]:
    raw = os.environ.get("CHARSUM_BUDGET", "").strip()
    out: dict[str, int] = {}
    if not raw:
        return out
    for item in raw.split(","):
        if not item.strip():
            continue
        name, _, value = item.partition("=")
        name = name.strip()
        if name not in DEFAULT_BUDGETS:
            raise ValueError(f"unknown budget {name!r} in CHARSUM_BUDGET")
        out[name] = int(value)
    return out


_overrides: dict[str, int] = {}


def set_budget(name: str, value: int) -> None:
    if name not in DEFAULT_BUDGETS:
        raise ValueError(f"unknown budget {name!r}")
    _overrides[name] = int(value)


def reset_budgets() -> None:
    _overrides.clear()


def budget(name: str) -> int:
    if name in _overrides:
        return _overrides[name]
    env = _env_overrides()
    if name in env:
        return env[name]
    return DEFAULT_BUDGETS[name]


def all_budgets() -> dict[str, int]:
    return {name: budget(name) for name in DEFAULT_BUDGETS}


def check_budget(name: str, size: int, what: str = "") -> None:
    limit = budget(name)
    if size > limit:
        label = what or name
        raise SizeLimitError(f"{label}: size {size} exceeds budget {name}={limit}")
