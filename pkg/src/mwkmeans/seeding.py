"""Stable seed derivation for order-independent parallel runs.

Python's builtin ``hash`` is salted per process, so derived seeds use a
SHA-256 digest of a canonical text form instead; the same parts always
yield the same 63-bit seed, across processes, platforms and runs.
"""

from __future__ import annotations

import hashlib

__all__ = ["stable_seed"]


def stable_seed(*parts) -> int:
    """Deterministic 63-bit seed from an arbitrary tuple of primitives."""
    text = "\x1f".join(_canonical(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def _canonical(part) -> str:
    if isinstance(part, float):
        return repr(part)
    if isinstance(part, (int, str, bool)) or part is None:
        return str(part)
    raise TypeError(f"cannot derive a seed from {type(part).__name__}")
