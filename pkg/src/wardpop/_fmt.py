import math


def fmt_num(x) -> str:
    """Shortest text that parses back to the same float; integers without '.0'."""
    x = float(x)
    if math.isfinite(x) and x == int(x) and abs(x) < 2.0**53:
        if x == 0.0 and math.copysign(1.0, x) < 0:
            return "-0"
        return str(int(x))
    return repr(x)
