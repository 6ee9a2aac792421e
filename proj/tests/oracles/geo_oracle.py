#!/usr/bin/env python3
"""Independent reference values for the geodesy tests and the Kamo track fixture.

Uses only the Python standard library. Distances use the unit-vector/atan2
great-circle formula (not haversine) so the C++ haversine is checked against
a different algebraic route. Writes tests/data/geo_oracle.json and tests/data/geo_pairs.csv.
"""
import json
import math
import random
import sys
from pathlib import Path

R = 6371000.0


def unit(lat, lon):
    p, l = math.radians(lat), math.radians(lon)
    return (math.cos(p) * math.cos(l), math.cos(p) * math.sin(l), math.sin(p))


def gc_distance(a, b):
    u, v = unit(*a), unit(*b)
    cx = u[1] * v[2] - u[2] * v[1]
    cy = u[2] * v[0] - u[0] * v[2]
    cz = u[0] * v[1] - u[1] * v[0]
    dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
    return R * math.atan2(math.sqrt(cx * cx + cy * cy + cz * cz), dot)


def track_length(pts):
    return sum(gc_distance(pts[i], pts[i + 1]) for i in range(len(pts) - 1))


def point_at(pts, d):
    acc = 0.0
    for i in range(len(pts) - 1):
        seg = gc_distance(pts[i], pts[i + 1])
        if acc + seg >= d:
            t = 0.0 if seg == 0 else (d - acc) / seg
            a, b = pts[i], pts[i + 1]
            return (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))
        acc += seg
    return pts[-1]


# South (Shijo) to north along the Kamo, then up the west branch.
KAMO = [
    (35.00370, 135.77160),
    (35.00870, 135.77150),
    (35.01480, 135.77130),
    (35.02230, 135.77170),
    (35.02950, 135.77220),
    (35.03450, 135.76950),
]


def build_track(target=4000.0):
    pts = list(KAMO)
    # extend along the heading of the last segment until the length hits target
    a, b = pts[-2], pts[-1]
    remaining = target - track_length(pts)
    t = remaining / gc_distance(a, b)
    end = (b[0] + t * (b[0] - a[0]), b[1] + t * (b[1] - a[1]))
    pts.append((round(end[0], 6), round(end[1], 6)))
    return pts


def random_pairs(n, seed=20090601):
    """Half global pairs, half local pairs within a few km (the game regime)."""
    rng = random.Random(seed)
    rows = []
    for i in range(n):
        lat1 = math.degrees(math.asin(rng.uniform(-1.0, 1.0)))
        lon1 = rng.uniform(-180.0, 180.0)
        if i % 2 == 0:
            lat2 = math.degrees(math.asin(rng.uniform(-1.0, 1.0)))
            lon2 = rng.uniform(-180.0, 180.0)
        else:
            span = 10 ** rng.uniform(-4.0, -1.0)
            lat2 = max(-90.0, min(90.0, lat1 + rng.uniform(-span, span)))
            lon2 = lon1 + rng.uniform(-span, span)
            lon2 = (lon2 + 180.0) % 360.0 - 180.0
        rows.append((lat1, lon1, lat2, lon2, gc_distance((lat1, lon1), (lat2, lon2))))
    return rows


def main():
    outdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "data"
    with open(outdir / "geo_pairs.csv", "w") as f:
        f.write("lat1,lon1,lat2,lon2,distance_m\n")
        for row in random_pairs(10000):
            f.write(",".join(repr(v) for v in row) + "\n")
    out = {}
    out["equator_one_degree_m"] = gc_distance((0.0, 0.0), (1.0, 0.0))
    out["kyoto_pair_m"] = gc_distance((35.0301, 135.7717), (35.0050, 135.7690))
    out["analytic_one_degree_m"] = R * math.pi / 180.0
    track = build_track()
    out["kamo_track"] = [list(p) for p in track]
    out["kamo_track_length_m"] = track_length(track)
    flowers = [200.0 + 400.0 * k for k in range(10)]
    out["flowers"] = [
        {"at_m": d, "lat": round(point_at(track, d)[0], 7), "lon": round(point_at(track, d)[1], 7)}
        for d in flowers
    ]
    with open(outdir / "geo_oracle.json", "w") as f:
        json.dump(out, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
