"""Tour of the single-photon optical elements.

Run with ``python3 demos/01_wave_plates.py``.  Everything here acts on
one photon in a small mode space; the point is to see the element
conventions (phases included) with your own eyes.
"""

import math
from fractions import Fraction

from bellsim import (
    ModeSpace,
    apply_element,
    apply_elements,
    basis_state,
    bs,
    circular_state,
    dp,
    hwp,
    qp,
    qwp,
    spp,
)

SPACE = ModeSpace(lmax=2, paths=("x", "y"))


def show(title, state):
    print(f"  {title}")
    for mode, amp in state.items_sorted():
        print(f"    {mode}  {amp:+.4f}")
    print()


def main():
    h = basis_state(SPACE, "H", 0, "x")
    v = basis_state(SPACE, "V", 0, "x")

    print("== quarter-wave plate at -45 degrees ==")
    print("Linear polarizations become circular ones:")
    show("qwp |H>  (this is |L>)", apply_element(h, qwp("x")))
    show("qwp |V>  (this is i|R>)", apply_element(v, qwp("x")))

    left = circular_state(SPACE, "L", 0, "x")
    print("...and the circular ones come back to linear:")
    show("qwp |L>", apply_element(left, qwp("x")))

    print("== half-wave plate ==")
    print("At 22.5 degrees it acts as a polarization Hadamard:")
    show("hwp(pi/8) |H>", apply_element(h, hwp(math.pi / 8, "x")))
    show("hwp(pi/8) |V>", apply_element(v, hwp(math.pi / 8, "x")))
    print("At 45 degrees it swaps H and V outright:")
    show("hwp(pi/4) |H>", apply_element(h, hwp(math.pi / 4, "x")))

    print("== q-plate, charge 1/2 ==")
    print("On circular light it trades spin for orbital angular momentum:")
    show("qp(1/2) |L,0>", apply_element(left, qp(Fraction(1, 2), "x")))
    print("On linear (H) light it splits four ways:")
    show("qp(1/2) |H,0>", apply_element(h, qp(Fraction(1, 2), "x")))

    print("== spiral phase plate ==")
    print("Adds its charge to the OAM, nothing else:")
    show("spp(+1) |H,0>", apply_element(h, spp(1, "x")))
    show("spp(+1) spp(+1) |H,0>", apply_elements(h, [spp(1, "x"), spp(1, "x")]))

    print("== parity prism ==")
    print("Reflects the OAM ladder with an l-dependent phase:")
    plus = basis_state(SPACE, "H", 1, "x")
    show("dp(pi/4) |H,+1>", apply_element(plus, dp(math.pi / 4, "x")))
    print("Two passes give back the input with an overall minus sign:")
    show("dp dp |H,+1>", apply_elements(plus, [dp(math.pi / 4, "x")] * 2))

    print("== beam splitter ==")
    print("One pass balances two paths; two passes cross over with phase i:")
    show("bs |x>", apply_element(h, bs("x", "y")))
    show("bs bs |x>", apply_elements(h, [bs("x", "y"), bs("x", "y")]))


if __name__ == "__main__":
    main()
