"""Fixed-point virtual time.

All simulation timestamps are integer milliseconds so that event ordering
never depends on floating point rounding.
"""

import math

MS_PER_S = 1000


def to_ms(seconds: float) -> int:
    return int(round(seconds * MS_PER_S))


def ceil_ms(seconds: float) -> int:
    # round up so a job never finishes before its work is done
    return int(math.ceil(seconds * MS_PER_S - 1e-9))


def to_s(ms: int) -> float:
    return ms / MS_PER_S
