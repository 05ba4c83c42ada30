import re

_DIGITS = re.compile(r"(\d+)")


def natural_key(label):
    """Sort key that orders ``"v2"`` before ``"v10"`` and ``"9"`` before ``"10"``."""
    parts = _DIGITS.split(str(label))
    return tuple((0, int(p), "") if p.isdigit() else (1, 0, p) for p in parts)


def snapshot_count(t_start, t_end, interval):
    import math

    # rounding guards against 0.7 / 0.1 == 6.999999999999999
    return max(1, math.ceil(round((t_end - t_start) / interval, 9)))
