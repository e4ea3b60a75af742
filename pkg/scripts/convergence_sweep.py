"""Convergence study: finite-difference order in h and spectral decay in M.

Prints two tables.  The first holds universal Schlesinger residuals of the
N = 2 test family at ``gamma = 0.05 sin`` for a few ``(m, n)`` against ``h``,
with the least-squares slope of ``log r`` against ``log h``.  The second
holds the jump residual and ``|B_1 - alpha|`` of the scalar family against
the cutoff ``M``.
"""

from __future__ import annotations

import argparse

import numpy as np

from unischlesinger.birkhoff import factorize
from unischlesinger.circle_diffeo import make_diffeo
from unischlesinger.families import build_family, scalar_exponential
from unischlesinger.isomonodromy import DeformationContext, deformation_jet, schlesinger_residual
from unischlesinger.jump_residue import compute_jump_density, fourier_coefficients_B

PAIRS = ((-2, 1), (0, -1), (1, 2), (3, -3))


def h_table(hs, M=64) -> None:
    ctx = DeformationContext(build_family("matrix-exponential", {}, 2, M), M=M, N_B=16)
    gamma = make_diffeo(sin={1: 0.05})
    ms = sorted({m for m, _ in PAIRS})
    jets = {h: deformation_jet(ctx, gamma, h, m_values=ms) for h in hs}
    print("(m, n)    " + "".join(f"h={h:<10.0e}" for h in hs) + "order")
    for m, n in PAIRS:
        r = np.array([schlesinger_residual(ctx, m=m, n=n, jet=jets[h]) for h in hs])
        slope = np.polyfit(np.log(hs), np.log(r), 1)[0]
        print(f"({m:2d},{n:2d})   " + "".join(f"{x:<12.3e}" for x in r) + f"{slope:.3f}")


def M_table(Ms, alpha=0.2, beta=0.3) -> None:
    print("\nM     jump residual   |B_1 - alpha|")
    for M in Ms:
        # sample finely so the only error is the truncation at M; report rather than reject
        g = scalar_exponential(alpha, beta, M, K=256)
        pair = factorize(g, M, tol=np.inf)
        B = fourier_coefficients_B(compute_jump_density(pair.Yminus, g, M), min(3, M - 1))
        print(f"{M:<5d} {pair.jump_residual:<15.3e} {abs(B[1][0, 0] - alpha):.3e}")


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--h", type=float, nargs="+", default=[3e-2, 1e-2, 3e-3, 1e-3, 3e-4])
    parser.add_argument("--M", type=int, nargs="+", default=[2, 4, 6, 8, 12, 16])
    args = parser.parse_args(argv)
    h_table(np.array(args.h))
    M_table(args.M)


if __name__ == "__main__":
    main()
