"""Tree addresses: finite tuples of positive integers with prefix order.

The root is the empty tuple.  An antichain is a set of addresses none of
which is a proper or improper prefix of another.
"""

from __future__ import annotations

from typing import Iterable

Address = tuple[int, ...]

ROOT: Address = ()


def concat(first: Address, second: Address) -> Address:
    return first + second


def prefix(address: Address, k: int) -> Address:
    """First k digits; defined only for 0 <= k <= len(address)."""
    if not 0 <= k <= len(address):
        raise ValueError(f"prefix length {k} out of range for {address}")
    return address[:k]


def is_prefix(shorter: Address, longer: Address) -> bool:
    """Strict prefix order: shorter comes strictly before longer."""
    return len(shorter) < len(longer) and longer[:len(shorter)] == shorter


def is_antichain(addresses: Iterable[Address]) -> bool:
    """True iff no element is a prefix of another (vacuously true when empty).

    Sorting lexicographically places any prefix immediately before its
    extensions, so one adjacent scan suffices.
    """
    ordered = sorted(set(addresses))
    for a, b in zip(ordered, ordered[1:]):
        if b[:len(a)] == a:
            return False
    return True
