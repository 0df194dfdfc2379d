"""Poschl-Teller wells: matched series against the closed-form levels.

For ``V = -lambda (lambda - 1) / cosh^2 x`` the bound states sit at
``kappa = lambda - 1 - n``.  The script solves three wells and prints the
matched ``kappa`` next to the exact value.

Run with ``python3 demos/poschl_teller.py``.
"""
from hyperbound import PotentialSpec, find_spectrum


def main() -> None:
    for lam in (2.0, 3.0, 4.5):
        spec = PotentialSpec.from_couplings(f={2: -lam * (lam - 1)})
        print(f"lambda = {lam}")
        for n, r in enumerate(find_spectrum(spec)):
            exact = lam - 1 - n
            print(f"  n={n}  kappa={r.kappa:.12f}  exact={exact:.12f}  diff={r.kappa - exact:+.1e}")


if __name__ == "__main__":
    main()
