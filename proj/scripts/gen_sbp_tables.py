#!/usr/bin/env python3
"""Regenerate data/sbp/d2_order{2,4,6}.txt from the D-form closure tables.

The files store the decomposition D = H^-1 (-M + B S) in exact rational form:
H diagonal weights (in units of h), closure rows of M (units of 1/h), the
first boundary-derivative row S (units of 1/h) and the interior stencil.
"""
import sys
import zlib
from fractions import Fraction as F
from pathlib import Path

TABLES = {
    2: dict(
        h=[F(1, 2)],
        d=[[1, -2, 1]],
        s=[F(-3, 2), 2, F(-1, 2)],
        interior=[1, -2, 1],
    ),
    4: dict(
        h=[F(17, 48), F(59, 48), F(43, 48), F(49, 48)],
        d=[[2, -5, 4, -1, 0, 0],
           [1, -2, 1, 0, 0, 0],
           [F(-4, 43), F(59, 43), F(-110, 43), F(59, 43), F(-4, 43), 0],
           [F(-1, 49), 0, F(59, 49), F(-118, 49), F(64, 49), F(-4, 49)]],
        s=[F(-11, 6), 3, F(-3, 2), F(1, 3)],
        interior=[F(-1, 12), F(4, 3), F(-5, 2), F(4, 3), F(-1, 12)],
    ),
    6: dict(
        h=[F(13649, 43200), F(12013, 8640), F(2711, 4320), F(5359, 4320), F(7877, 8640), F(43801, 43200)],
        d=[[F(114170, 40947), F(-438107, 54596), F(336409, 40947), F(-276997, 81894), F(3747, 13649), F(21035, 163788), 0, 0, 0],
           [F(6173, 5860), F(-2066, 879), F(3283, 1758), F(-303, 293), F(2111, 3516), F(-601, 4395), 0, 0, 0],
           [F(-52391, 81330), F(134603, 32532), F(-21982, 2711), F(112915, 16266), F(-46969, 16266), F(30409, 54220), 0, 0, 0],
           [F(68603, 321540), F(-12423, 10718), F(112915, 32154), F(-75934, 16077), F(53369, 21436), F(-54899, 160770), F(48, 5359), 0, 0],
           [F(-7053, 39385), F(86551, 94524), F(-46969, 23631), F(53369, 15754), F(-87904, 23631), F(820271, 472620), F(-1296, 7877), F(96, 7877), 0],
           [F(21035, 525612), F(-24641, 131403), F(30409, 87602), F(-54899, 131403), F(820271, 525612), F(-117600, 43801), F(64800, 43801), F(-6480, 43801), F(480, 43801)]],
        s=[F(-25, 12), 4, -3, F(4, 3), F(-1, 4)],
        interior=[F(1, 90), F(-3, 20), F(3, 2), F(-49, 18), F(3, 2), F(-3, 20), F(1, 90)],
    ),
}


def fmt(v):
    v = F(v)
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def render(order, t):
    rows, cols = len(t["d"]), len(t["d"][0])
    m_rows = []
    for i in range(rows):
        row = []
        for j in range(cols):
            bs = -F(t["s"][j]) if (i == 0 and j < len(t["s"])) else F(0)
            row.append(-t["h"][i] * F(t["d"][i][j]) + bs)
        m_rows.append(row)
    lines = [
        "# Diagonal-norm SBP second-derivative operator: D = H^-1 (-M + B S)",
        "# h_diag in units of h; m_row and s_row in units of 1/h; interior in units of 1/h^2",
        "format wavelab-sbp-d2 1",
        f"order {order}",
        f"closure_rows {rows}",
        f"closure_cols {cols}",
        "h_diag " + " ".join(fmt(v) for v in t["h"]),
    ]
    lines += ["m_row " + " ".join(fmt(v) for v in r) for r in m_rows]
    lines.append("s_row " + " ".join(fmt(v) for v in t["s"]))
    lines.append("interior " + " ".join(fmt(v) for v in t["interior"]))
    body = "\n".join(lines) + "\n"
    return body + f"crc32 {zlib.crc32(body.encode()):08x}\n"


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data" / "sbp"
    out.mkdir(parents=True, exist_ok=True)
    for order, t in TABLES.items():
        (out / f"d2_order{order}.txt").write_text(render(order, t))


if __name__ == "__main__":
    main()
