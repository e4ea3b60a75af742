"""Independent high-precision oracle for frozen test values.

Recomputes the normalized factorization of the N = 2 test loop
``G0 = expm(0.3 xi sigma + 0.2 xi^-1 sigma^T)`` in 40-digit arithmetic with
mpmath: Fourier coefficients by direct trapezoid sums, the block Toeplitz
system by mpmath's LU solver, and ``B_n`` by direct sums of the jump density.
No FFT and no numpy linear algebra are involved.

Run ``python scripts/oracle_values.py`` to print the values frozen in
``tests/test_jump_residue.py``.
"""

from __future__ import annotations

import mpmath as mp

mp.mp.dps = 40

A_COEF = mp.mpf("0.3")
B_COEF = mp.mpf("0.2")
NODES = 96
MODES = 24


def G(xi):
    Q = mp.matrix([[0, A_COEF * xi], [B_COEF / xi, 0]])
    return mp.expm(Q)


def dG(xi, eps=mp.mpf("1e-15")):
    # complex-step free: analytic central difference at 40 digits
    return (G(xi + eps) - G(xi - eps)) / (2 * eps)


def main() -> None:
    xs = [mp.expjpi(2 * mp.mpf(j) / NODES) for j in range(NODES)]
    Gs = [G(x) for x in xs]

    def coeff(k):
        s = mp.matrix(2, 2)
        for x, g in zip(xs, Gs):
            s += g * x ** (-k)
        return s / NODES

    Gh = {k: coeff(k) for k in range(-MODES, MODES + 1)}
    n = 2 * MODES
    T = mp.matrix(n, n)
    R = mp.matrix(2, n)
    for k in range(1, MODES + 1):
        for j in range(1, MODES + 1):
            blk = Gh.get(k - j, mp.matrix(2, 2))
            for a in range(2):
                for b in range(2):
                    T[2 * (k - 1) + a, 2 * (j - 1) + b] = blk[a, b]
        for a in range(2):
            for b in range(2):
                R[a, 2 * (k - 1) + b] = -Gh[-k][a, b]
    # X T = R, solved row by row through T^T
    X = mp.matrix(2, n)
    for a in range(2):
        sol = mp.lu_solve(T.T, R[a, :].T)
        for c in range(n):
            X[a, c] = sol[c]
    C = {k: mp.matrix([[X[a, 2 * (k - 1) + b] for b in range(2)] for a in range(2)])
         for k in range(1, MODES + 1)}

    def Yminus(xi):
        s = mp.eye(2)
        for k, c in C.items():
            s += c * xi ** (-k)
        return s

    As = []
    for x, g in zip(xs, Gs):
        ym = Yminus(x)
        As.append(ym * dG(x) * g ** -1 * ym ** -1)

    def B(m):
        # B_m = -A_{-m-1}
        s = mp.matrix(2, 2)
        for x, a in zip(xs, As):
            s += a * x ** (m + 1)
        return -s / NODES

    for m in (-3, -2, -1, 0, 1, 2, 3):
        b = B(m)
        entries = [[complex(b[i, j]) for j in range(2)] for i in range(2)]
        print(f"B[{m:+d}] =", entries)
    print("C_1 =", [[complex(C[1][i, j]) for j in range(2)] for i in range(2)])


if __name__ == "__main__":
    main()
