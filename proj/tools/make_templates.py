#!/usr/bin/env python3
"""Regenerates data/mudra_templates.csv from per-finger turn angles.

Each finger is a chain wrist -> base -> mid -> distal -> tip. A turn of t
degrees at a joint leaves an interior angle of 180 - |t| there. Output
coordinates are in normalized image space (y grows downward), right hand.
"""
import math
import sys

# direction of wrist->base (degrees from "up", positive toward the pinky
# side) and segment lengths relative to wrist->middle-base.
FINGERS = {
    "thumb": (-42.0, [0.30, 0.30, 0.26, 0.22]),
    "index": (-14.0, [0.95, 0.42, 0.26, 0.22]),
    "middle": (0.0, [1.00, 0.46, 0.29, 0.24]),
    "ring": (12.0, [0.95, 0.42, 0.27, 0.23]),
    "pinky": (24.0, [0.86, 0.33, 0.21, 0.20]),
}
ORDER = ["thumb", "index", "middle", "ring", "pinky"]

# turns at (base, mid, distal); positive turns toward the thumb side.
MUDRAS = {
    "Pataaka": {
        "thumb": (25, 35, 20), "index": (5, 0, 0), "middle": (0, 0, 0),
        "ring": (-5, 0, 0), "pinky": (-10, 0, 0),
    },
    "Mudrakhya": {
        "thumb": (30, 25, 15), "index": (10, 85, 45), "middle": (0, 0, 0),
        "ring": (-5, 0, 0), "pinky": (-10, 0, 0),
    },
    "Prana": {
        "thumb": (30, 20, 10), "index": (5, 0, 0), "middle": (0, 0, 0),
        "ring": (10, 80, 40), "pinky": (20, 75, 40),
    },
    "Pallava": {
        "thumb": (-10, -5, 0), "index": (-30, 0, 0), "middle": (0, 0, 0),
        "ring": (20, 0, 0), "pinky": (35, 0, 0),
    },
    "Tripataka": {
        "thumb": (25, 35, 20), "index": (5, 0, 0), "middle": (0, 0, 0),
        "ring": (-5, 90, 40), "pinky": (-10, 0, 0),
    },
}

WRIST = (0.5, 0.8)
SCALE = 0.3


def chain(direction_deg, lengths, turns):
    pts = []
    x, y = 0.0, 0.0
    heading = direction_deg
    for i, seg in enumerate(lengths):
        if i > 0:
            # turning "toward the thumb" means decreasing heading
            heading -= turns[i - 1]
        rad = math.radians(heading)
        x += seg * math.sin(rad)
        y -= seg * math.cos(rad)
        pts.append((x, y))
    return pts


def main(out):
    rows = ["mudra,index,x,y"]
    for name, turns in MUDRAS.items():
        pts = [(0.0, 0.0)]
        for finger in ORDER:
            direction, lengths = FINGERS[finger]
            pts.extend(chain(direction, lengths, turns[finger]))
        for i, (x, y) in enumerate(pts):
            rows.append(f"{name},{i},{WRIST[0] + SCALE * x:.6f},{WRIST[1] + SCALE * y:.6f}")
    with open(out, "w", newline="\n") as f:
        f.write("\n".join(rows) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/mudra_templates.csv")
