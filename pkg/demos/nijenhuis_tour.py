"""Where the induced complex structure on the knot space is integrable.

Evaluates the Nijenhuis tensor of ``J`` for loops and tori in the four
parallel settings, then for a loop in a twisted G2 ambient. Prints a table of
``max |N_J|`` against the grid size.

    python3 demos/nijenhuis_tour.py
"""

import numpy as np

from vcpknot import ambient, immersion as im, knot as kn, vcp
from vcpknot.verification import trial_fields

H = 1e-4

SETUPS = [
    ("R3 loop (codim 2)", ambient.euclidean(vcp.volume_form(3)), im.circle),
    ("R4 torus (codim 2)", ambient.euclidean(vcp.volume_form(4)), im.clifford_torus),
    ("G2 loop (codim 6)", ambient.euclidean(vcp.g2()), im.circle),
    ("Spin7 torus (codim 6)", ambient.euclidean(vcp.spin7()), im.clifford_torus),
    ("twisted G2 loop, rate 0.5", ambient.twisted(vcp.g2(), 0.5), im.circle),
]


def nijenhuis_norm(space, make, N):
    imm = make(space, N)
    u, v, _ = trial_fields(imm, 0, 0, 2)
    return kn.nijenhuis(u, v, H, richardson=True).max_norm()


def main():
    sizes = [32, 64, 128]
    print(f"{'setup':28s}" + "".join(f"{'N=' + str(N):>12s}" for N in sizes))
    for name, space, make in SETUPS:
        row = [nijenhuis_norm(space, make, N) for N in sizes]
        print(f"{name:28s}" + "".join(f"{x:12.3e}" for x in row))

    # the value at the base does not depend on how the fields are extended
    space = ambient.euclidean(vcp.g2())
    imm = im.perturb(im.circle(space, 64), 0.2, 2, 1)
    u, v, _ = trial_fields(imm, 0, 0, 2)
    rng = np.random.default_rng(0)
    A = kn.KnotVectorFieldScheme.extend(u, "affine", matrix=rng.normal(size=(7, 7)))
    B = kn.KnotVectorFieldScheme.extend(v, "affine", matrix=rng.normal(size=(7, 7)))
    plain = kn.nijenhuis(u, v, H, richardson=True)
    affine = kn.nijenhuis(A, B, H, richardson=True)
    print(f"\nperturbed G2 loop: |N_J| = {plain.max_norm():.4f}, "
          f"constant vs affine extension differ by {(plain - affine).max_norm():.1e}")


if __name__ == "__main__":
    main()
