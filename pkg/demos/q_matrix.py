"""The lower-triangular operator ``H + kappa^2`` in the asymmetric basis.

Prints the leading corner of the matrix for ``V = g sinh x / cosh^3 x``
in both parity sectors, then the first coefficient blocks of the series
solution that grows from the seed ket.

Run with ``python3 demos/q_matrix.py``.
"""
import numpy as np

from hyperbound import BasisParams, CoefficientStream, PotentialSpec, build_q
from hyperbound.qbuilder import SEEDS


def main() -> None:
    spec = PotentialSpec.from_couplings(g={2: 1.0})
    params = BasisParams(0.0, 1.0)
    np.set_printoptions(precision=3, suppress=True, linewidth=120)
    for p in (0, 1):
        q = build_q(spec, params, SEEDS[p])
        print(f"p={p}: block size D={q.D}, first block d0={q.d0}")
        print(q.dense(7))
        stream = CoefficientStream(q)
        print("first blocks:", [stream.block(j).round(5).tolist() for j in range(4)])
        print()


if __name__ == "__main__":
    main()
