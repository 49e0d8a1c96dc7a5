#!/usr/bin/env python3
"""Rasterizes the letter phantoms into 64x64 monochrome bitmaps.

Writes assets/<name>.pbm (plain P1) and include/carleman_rte/glyphs.hpp with
the same bitmaps embedded as string rows ('#' = inside). Row 0 is the top.
"""
import math
import pathlib

SIZE = 64
ROOT = pathlib.Path(__file__).resolve().parent.parent


def seg_dist(px, py, ax, ay, bx, by):
    vx, vy = bx - ax, by - ay
    t = ((px - ax) * vx + (py - ay) * vy) / (vx * vx + vy * vy)
    t = max(0.0, min(1.0, t))
    return math.hypot(px - ax - t * vx, py - ay - t * vy)


def arc(cx, cy, r, a0, a1, n=48):
    pts = []
    for k in range(n + 1):
        t = math.radians(a0 + (a1 - a0) * k / n)
        pts.append((cx + r * math.cos(t), cy + r * math.sin(t)))
    return pts


def polyline(points):
    return [(points[k], points[k + 1]) for k in range(len(points) - 1)]


GLYPHS = {
    "A": (0.13, polyline([(0.15, 0.10), (0.5, 0.88), (0.85, 0.10)]) + [((0.30, 0.40), (0.70, 0.40))]),
    "Omega": (0.12, polyline([(0.12, 0.12), (0.34, 0.12)]
                             + arc(0.5, 0.55, 0.30, 238, -58)
                             + [(0.66, 0.12), (0.88, 0.12)])),
    "S": (0.12, polyline(arc(0.5, 0.69, 0.19, 20, 270) + arc(0.5, 0.31, 0.19, 90, -160))),
    "Z": (0.12, [((0.15, 0.86), (0.85, 0.86)), ((0.85, 0.86), (0.15, 0.12)), ((0.15, 0.12), (0.85, 0.12))]),
}


def raster(width, segments):
    rows = []
    for r in range(SIZE):
        y = 1.0 - (r + 0.5) / SIZE
        row = ""
        for c in range(SIZE):
            x = (c + 0.5) / SIZE
            inside = any(seg_dist(x, y, *a, *b) <= width / 2 for a, b in segments)
            row += "#" if inside else "."
        rows.append(row)
    return rows


def main():
    out = ["#pragma once", "", "// Generated by tools/make_glyphs.py; do not edit.", "",
           "#include <array>", "#include <string_view>", "", "namespace crte::glyphs {", "",
           "inline constexpr int size = %d;" % SIZE, ""]
    for name, (width, segs) in GLYPHS.items():
        rows = raster(width, segs)
        pbm = ["P1", "# %s phantom glyph" % name, "%d %d" % (SIZE, SIZE)]
        pbm += [" ".join("1" if ch == "#" else "0" for ch in row) for row in rows]
        (ROOT / "assets" / ("%s.pbm" % name)).write_text("\n".join(pbm) + "\n")
        out.append("inline constexpr std::array<std::string_view, size> %s = {" % name)
        out += ['    "%s",' % row for row in rows]
        out += ["};", ""]
    out.append("} // namespace crte::glyphs")
    (ROOT / "include" / "carleman_rte" / "glyphs.hpp").write_text("\n".join(out) + "\n")


if __name__ == "__main__":
    main()
