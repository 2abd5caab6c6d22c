# BSD 3-Clause License
#
# Copyright (c) 2025, Infrastructure Architects, LLC
# All rights reserved.

"""
Header normalization and canonical column ordering.
Shared by ingestion (mapping source headers) and preprocessing (feature order).
"""

import re

_NON_WORD = re.compile(r"[^0-9a-zA-Z]+")

# Order in which known features appear in feature tables and artifacts
CANONICAL_FEATURE_ORDER = (
    "count",
    "temperature",
    "max_temperature",
    "min_temperature",
    "precipitation",
    "wind_speed",
    "cloud_cover",
    "relative_humidity",
)


def snake_case(header: str) -> str:
    """Normalize a source header: "Wind Gust" -> "wind_gust", "Cloud Cover (%)" -> "cloud_cover"."""
    return _NON_WORD.sub("_", header.strip()).strip("_").lower()


def canonical_headers(headers: list[str], aliases: dict[str, str]) -> dict[str, str]:
    """Map each source header to its canonical column name.

    Explicit aliases (canonical -> source) win over snake_case normalization.
    Raises ValueError when two source headers land on the same canonical name.
    """
    reverse = {source: canonical for canonical, source in aliases.items()}
    mapping: dict[str, str] = {}
    seen: dict[str, str] = {}
    for header in headers:
        name = reverse.get(header, snake_case(header))
        if name in seen:
            raise ValueError(f"headers '{seen[name]}' and '{header}' both map to column '{name}'")
        seen[name] = header
        mapping[header] = name
    return mapping


def canonical_order(features: list[str] | set[str]) -> list[str]:
    """Known features in canonical order, then the rest alphabetically"""
    known = [f for f in CANONICAL_FEATURE_ORDER if f in features]
    return known + sorted(f for f in features if f not in CANONICAL_FEATURE_ORDER)
