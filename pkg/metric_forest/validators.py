"""
Argument validation utilities.

Every validator returns the cleaned value or raises InvalidArgumentError /
MissingArgumentError naming the offending field.
"""

import math
from typing import Iterable, List, Optional

from metric_forest.exceptions import InvalidArgumentError, MissingArgumentError

MAX_SIZE_LIST = 64


def validate_integer(
    value: Optional[int],
    field_name: str,
    min_value: Optional[int] = None,
    max_value: Optional[int] = None,
    required: bool = True,
) -> Optional[int]:
    """Validate integer value with optional bounds"""
    if value is None:
        if required:
            raise MissingArgumentError(field_name)
        return None

    # bool is an int subclass; numpy integers are accepted
    if isinstance(value, bool) or not hasattr(value, "__index__"):
        raise InvalidArgumentError(
            f"Field '{field_name}' must be an integer",
            field=field_name,
            value=value,
        )
    value = int(value)

    if min_value is not None and value < min_value:
        raise InvalidArgumentError(
            f"Field '{field_name}' must be at least {min_value}",
            field=field_name,
            value=value,
        )

    if max_value is not None and value > max_value:
        raise InvalidArgumentError(
            f"Field '{field_name}' must not exceed {max_value}",
            field=field_name,
            value=value,
        )

    return value


def validate_float(
    value: Optional[float],
    field_name: str,
    min_value: Optional[float] = None,
    max_value: Optional[float] = None,
    exclusive_min: bool = False,
    allow_inf: bool = False,
    required: bool = True,
) -> Optional[float]:
    """Validate float value with optional bounds"""
    if value is None:
        if required:
            raise MissingArgumentError(field_name)
        return None

    try:
        value = float(value)
    except (TypeError, ValueError):
        raise InvalidArgumentError(
            f"Field '{field_name}' must be a number",
            field=field_name,
            value=value,
        )

    if math.isnan(value) or (math.isinf(value) and not allow_inf):
        raise InvalidArgumentError(
            f"Field '{field_name}' must be finite",
            field=field_name,
            value=value,
        )

    if min_value is not None:
        too_small = value <= min_value if exclusive_min else value < min_value
        if too_small:
            bound = "greater than" if exclusive_min else "at least"
            raise InvalidArgumentError(
                f"Field '{field_name}' must be {bound} {min_value}",
                field=field_name,
                value=value,
            )

    if max_value is not None and value > max_value:
        raise InvalidArgumentError(
            f"Field '{field_name}' must not exceed {max_value}",
            field=field_name,
            value=value,
        )

    return value


def validate_positive_float(value: Optional[float], field_name: str, allow_inf: bool = False) -> float:
    """Validate a strictly positive float"""
    return validate_float(
        value, field_name, min_value=0.0, exclusive_min=True, allow_inf=allow_inf
    )


def validate_probability(value: Optional[float], field_name: str) -> float:
    """Validate a value in [0, 1]"""
    return validate_float(value, field_name, min_value=0.0, max_value=1.0)


def validate_point_id(value: Optional[int], n: int, field_name: str = "point_id") -> int:
    """Validate a point id against a space of n points"""
    return validate_integer(value, field_name, min_value=0, max_value=n - 1)


def validate_id_set(
    ids: Optional[Iterable[int]], n: int, field_name: str = "ids", allow_empty: bool = False
) -> List[int]:
    """Validate a collection of point ids; duplicates are dropped, order kept"""
    if ids is None:
        raise MissingArgumentError(field_name)

    cleaned: List[int] = []
    seen = set()
    for value in ids:
        value = validate_point_id(value, n, field_name)
        if value not in seen:
            seen.add(value)
            cleaned.append(value)

    if not cleaned and not allow_empty:
        raise InvalidArgumentError(
            f"Field '{field_name}' must not be empty", field=field_name
        )
    return cleaned


def validate_size_list(value: Optional[str], field_name: str = "sizes") -> List[int]:
    """Validate a comma-separated list of positive sizes such as '100,1000'"""
    if value is None or not str(value).strip():
        raise MissingArgumentError(field_name)

    parts = [part.strip() for part in str(value).split(",") if part.strip()]
    if len(parts) > MAX_SIZE_LIST:
        raise InvalidArgumentError(
            f"Field '{field_name}' has more than {MAX_SIZE_LIST} entries",
            field=field_name,
        )

    sizes = []
    for part in parts:
        try:
            size = int(part)
        except ValueError:
            raise InvalidArgumentError(
                f"Field '{field_name}' must list integers", field=field_name, value=part
            )
        sizes.append(validate_integer(size, field_name, min_value=1))
    return sizes
