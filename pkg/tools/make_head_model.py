"""Regenerate the canonical 68-landmark head geometry data file.

Landmark indexing follows the common 68-point layout (jaw 0-16, brows
17-26, nose 27-35, eyes 36-47, mouth 48-67). Coordinates are metres in
the head frame: +X subject's right, +Y down, +Z out of the face. The
table is centered on the landmark centroid and scaled so the pupil
anchors (midpoints of the eye-corner pairs 36/39 and 42/45) sit exactly
0.06 m apart. Depth relief ear-to-nose is kept realistic (~0.10 m) so
pose recovery from the landmarks is well conditioned.

Run from the repository root:  python tools/make_head_model.py
"""

import pathlib

import numpy as np

OUT = pathlib.Path(__file__).resolve().parents[1] / "src" / "icugaze" / "data" / "canonical_head_68.txt"
CANONICAL_IPD = 0.06


def build_raw():
    pts = np.zeros((68, 3))

    # jaw 0-16: right ear-top around the chin to left ear-top
    theta = np.pi * np.arange(17) / 16.0
    pts[0:17, 0] = 0.068 * np.cos(theta)
    pts[0:17, 1] = -0.010 + 0.085 * np.sin(theta) ** 1.3
    pts[0:17, 2] = -0.055 + 0.070 * np.sin(theta) ** 1.2

    # eyebrows 17-21 (subject right, outer->inner) and 22-26 (mirror)
    bx = np.array([0.052, 0.042, 0.032, 0.022, 0.012])
    by = np.array([-0.038, -0.042, -0.043, -0.042, -0.038])
    bz = np.array([0.005, 0.012, 0.017, 0.020, 0.022])
    pts[17:22] = np.column_stack([bx, by, bz])
    pts[22:27] = np.column_stack([-bx[::-1], by[::-1], bz[::-1]])

    # nose bridge 27-30 and base 31-35
    pts[27:31] = [[0.0, -0.028, 0.028],
                  [0.0, -0.012, 0.036],
                  [0.0, 0.004, 0.044],
                  [0.0, 0.018, 0.052]]
    pts[31:36] = [[0.016, 0.030, 0.030],
                  [0.008, 0.032, 0.036],
                  [0.000, 0.033, 0.040],
                  [-0.008, 0.032, 0.036],
                  [-0.016, 0.030, 0.030]]

    # eyes: 36-41 subject right (36 outer corner, 39 inner),
    # 42-47 subject left (42 inner corner, 45 outer)
    right_eye = np.array([
        [0.046, -0.028, 0.004],
        [0.037, -0.033, 0.012],
        [0.025, -0.033, 0.014],
        [0.016, -0.027, 0.012],
        [0.025, -0.022, 0.013],
        [0.037, -0.022, 0.010],
    ])
    pts[36:42] = right_eye
    left_eye = right_eye[[3, 2, 1, 0, 5, 4]].copy()
    left_eye[:, 0] *= -1.0
    pts[42:48] = left_eye

    # mouth: outer ring 48-59, inner ring 60-67
    pts[48:60] = [[0.026, 0.048, 0.018],
                  [0.017, 0.041, 0.024],
                  [0.008, 0.038, 0.027],
                  [0.000, 0.037, 0.028],
                  [-0.008, 0.038, 0.027],
                  [-0.017, 0.041, 0.024],
                  [-0.026, 0.048, 0.018],
                  [-0.017, 0.056, 0.024],
                  [-0.008, 0.059, 0.026],
                  [0.000, 0.060, 0.027],
                  [0.008, 0.059, 0.026],
                  [0.017, 0.056, 0.024]]
    pts[60:68] = [[0.020, 0.048, 0.020],
                  [0.008, 0.044, 0.025],
                  [0.000, 0.043, 0.026],
                  [-0.008, 0.044, 0.025],
                  [-0.020, 0.048, 0.020],
                  [-0.008, 0.052, 0.025],
                  [0.000, 0.053, 0.026],
                  [0.008, 0.052, 0.025]]
    return pts


def main():
    pts = build_raw()
    pts -= pts.mean(axis=0)
    right_anchor = 0.5 * (pts[36] + pts[39])
    left_anchor = 0.5 * (pts[42] + pts[45])
    pts *= CANONICAL_IPD / np.linalg.norm(right_anchor - left_anchor)
    pts -= pts.mean(axis=0)  # rescale keeps centroid at 0; re-center against roundoff

    lines = ["# canonical 68-landmark head geometry, version 1",
             "# columns: index x y z (metres, head frame: +X subject right, +Y down, +Z out of face)",
             "# pupil anchors: midpoint(36, 39) and midpoint(42, 45); anchor distance = 0.06 m"]
    for i, (x, y, z) in enumerate(pts):
        lines.append(f"{i} {x:.17g} {y:.17g} {z:.17g}")
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text("\n".join(lines) + "\n")
    print(f"wrote {OUT} ({len(pts)} landmarks)")


if __name__ == "__main__":
    main()
