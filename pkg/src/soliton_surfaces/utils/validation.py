import math
import re
from typing import Any

_IMAG_SUFFIX = re.compile(r"(?<![a-zA-Z])i\b")


def is_number(val: Any) -> bool:
    try:
        float(val)
        return True
    except (ValueError, TypeError):
        return False


def is_finite_number(val: Any) -> bool:
    """Vérifie que la valeur est un réel fini (ni NaN ni infini)."""
    if isinstance(val, bool):
        return False
    try:
        return math.isfinite(float(val))
    except (ValueError, TypeError):
        return False


def is_integer(val: Any) -> bool:
    """
    Vérifie si la valeur peut être convertie en entier.
    Note: Returns False for boolean values to avoid treating True/False as 1/0.
    """
    if isinstance(val, bool):
        return False
    if isinstance(val, int):
        return True
    if isinstance(val, str):
        try:
            int(val)
            return True
        except ValueError:
            return False
    return False


def parse_complex(text: str) -> complex:
    """
    Parse a complex literal written with ``i`` or ``j`` ("1+1i", "-2.5i", "3").

    Raises:
        ValueError: the text is not a finite complex number
    """
    if not isinstance(text, str) or not text.strip():
        raise ValueError(f"not a complex number: {text!r}")
    cleaned = text.strip().replace(" ", "").replace("I", "i")
    cleaned = _IMAG_SUFFIX.sub("j", cleaned)
    if cleaned.endswith(("+j", "-j")) or cleaned == "j":
        cleaned = cleaned[:-1] + "1j"
    try:
        value = complex(cleaned)
    except ValueError as exc:
        raise ValueError(f"not a complex number: {text!r}") from exc
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise ValueError(f"not a finite complex number: {text!r}")
    return value


def parse_coefficients(text: str) -> list:
    """Parse comma separated complex coefficients, e.g. ``"0,1.5,2i"``."""
    parts = [p for p in text.split(",")]
    if not parts or any(not p.strip() for p in parts):
        raise ValueError(f"empty coefficient in {text!r}")
    return [parse_complex(p) for p in parts]
