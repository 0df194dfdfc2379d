"""Ground state of the Scarf well sampled across the origin.

The left and right series are stitched at ``x = 0``; the printout shows a
smooth profile that falls off like ``exp(-kappa |x|)`` on both sides.

Run with ``python3 demos/wavefunction.py``.
"""
import math

import numpy as np

from hyperbound import PotentialSpec, assemble_wavefunction, find_spectrum


def main() -> None:
    spec = PotentialSpec.from_couplings(g={2: 1.0})
    (state,) = find_spectrum(spec)
    print(f"kappa = {state.kappa:.10f}, E = {state.energy:.10f}")
    for x, psi, dpsi in assemble_wavefunction(state, spec, 0.0, np.linspace(-12, 12, 13)):
        print(f"  x={x:6.1f}  psi={psi:+.6e}  psi'={dpsi:+.6e}  psi*exp(kappa|x|)={psi * math.exp(state.kappa * abs(x)):+.4f}")


if __name__ == "__main__":
    main()
