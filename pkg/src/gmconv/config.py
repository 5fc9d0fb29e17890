"""Numeric settings shared by every gmconv module."""

import os
from dataclasses import dataclass, replace
from functools import cache

from gmconv.exceptions import ConfigError


@dataclass(frozen=True)
class Settings:
    """
    Tolerances and capacity limits.

    Attributes:
        max_group_order: Largest group order any constructor may produce.
        atol: Absolute tolerance for floating-point comparisons.
        rank_rtol: Relative threshold for numerical rank decisions.
        exhaustive_axiom_order: Orders up to this are axiom-checked on every triple.
        max_condition: Condition number above which group matrices are not inverted.
    """

    max_group_order: int = 2**20
    atol: float = 1e-10
    rank_rtol: float = 1e-9
    exhaustive_axiom_order: int = 64
    max_condition: float = 1e12

    def __post_init__(self) -> None:
        if self.max_group_order < 1:
            raise ConfigError(f"max_group_order must be positive, got {self.max_group_order}")
        if self.atol < 0 or self.rank_rtol < 0:
            raise ConfigError("tolerances must be non-negative")
        if self.max_condition <= 1:
            raise ConfigError(f"max_condition must exceed 1, got {self.max_condition}")

    @classmethod
    def from_env(cls) -> "Settings":
        """
        Build settings from GMCONV_* environment variables.

        Raises:
            ConfigError: If a variable is set but cannot be parsed.
        """
        overrides: dict[str, int | float] = {}
        for env_name, field, kind in (
            ("GMCONV_MAX_ORDER", "max_group_order", int),
            ("GMCONV_ATOL", "atol", float),
            ("GMCONV_RANK_RTOL", "rank_rtol", float),
        ):
            raw = os.getenv(env_name)
            if raw is None or raw == "":
                continue
            try:
                overrides[field] = kind(raw)
            except ValueError as exc:
                raise ConfigError(f"{env_name}={raw!r} is not a valid {kind.__name__}") from exc
        return replace(cls(), **overrides)


@cache
def get_settings() -> Settings:
    """Process-wide settings, read once from the environment."""
    return Settings.from_env()
