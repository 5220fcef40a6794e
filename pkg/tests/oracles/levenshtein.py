"""Edit distance straight from the recursive definition (memoized)."""

from functools import lru_cache


@lru_cache(maxsize=None)
def lev(a: str, b: str) -> int:
    if not a:
        return len(b)
    if not b:
        return len(a)
    return min(lev(a[1:], b) + 1, lev(a, b[1:]) + 1, lev(a[1:], b[1:]) + (a[0] != b[0]))
