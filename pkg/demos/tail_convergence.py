"""How fast the series coefficients settle.

Far into the recurrence consecutive blocks shrink by a ratio that tends to
one.  The script prints ``h_j / h_{j-1}`` for each slot next to the
closed-form law ``1 - (1 + 2q) / (2j)`` and the scaled deviation
``j^2 |ratio - law|``, which stays bounded.

Run with ``python3 demos/tail_convergence.py``.
"""
from hyperbound import BasisParams, CoefficientStream, PotentialSpec, build_q, tail_ratio
from hyperbound.qbuilder import SEEDS


def main() -> None:
    spec = PotentialSpec.from_couplings(g={2: 1.0})
    stream = CoefficientStream(build_q(spec, BasisParams(0.0, 1.0), SEEDS[0]))
    print(" j    q  ratio          law            j^2|dev|")
    for j in (10, 50, 100, 200):
        for q in (0, 1):
            ratio = tail_ratio(stream, j, q)
            law = 1 - (1 + 2 * q) / (2 * j)
            print(f"{j:4d}  {q}  {ratio:.10f}  {law:.10f}  {j * j * abs(ratio - law):8.3f}")


if __name__ == "__main__":
    main()
