#!/usr/bin/env python3
"""Computes the stored known solutions of the built-in problem suite.

Each problem is restated here symbolically (independently of the C++
definitions). A scipy SLSQP run from the problem's initial point gives a
starting estimate, which is then polished by Newton's method on the
first-order conditions in 50-digit arithmetic. The printed values are the
ones frozen into include/stosqp/suite.hpp.

    python3 tools/reference_solutions.py
"""

import mpmath as mp
import numpy as np
import sympy as sp
from scipy.optimize import minimize

mp.mp.dps = 50


def problems():
    out = []

    x = sp.symbols("x1:3")
    out.append(("lin-quad", x, sp.Rational(1, 2) * (x[0] ** 2 + x[1] ** 2),
                [x[0] + x[1] - 2], [0, 0]))

    out.append(("circle-rosen", x, 100 * (x[1] - x[0] ** 2) ** 2 + (1 - x[0]) ** 2,
                [x[0] ** 2 + x[1] ** 2 - 1], [1, 1]))

    out.append(("hs006", x, (1 - x[0]) ** 2, [10 * (x[1] - x[0] ** 2)],
                [-1.2, 1]))

    out.append(("hs007", x, sp.log(1 + x[0] ** 2) - x[1],
                [(1 + x[0] ** 2) ** 2 + x[1] ** 2 - 4], [2, 2]))

    x = sp.symbols("x1:4")
    out.append(("hs028", x, (x[0] + x[1]) ** 2 + (x[1] + x[2]) ** 2,
                [x[0] + 2 * x[1] + 3 * x[2] - 1], [-4, 1, 1]))

    x = sp.symbols("x1:5")
    out.append(("hs039", x, -x[0],
                [x[1] - x[0] ** 3 - x[2] ** 2, x[0] ** 2 - x[1] - x[3] ** 2],
                [2, 2, 2, 2]))

    out.append(("hs040", x, -x[0] * x[1] * x[2] * x[3],
                [x[0] ** 3 + x[1] ** 2 - 1, x[0] ** 2 * x[3] - x[2], x[3] ** 2 - x[1]],
                [0.8, 0.8, 0.8, 0.8]))

    x = sp.symbols("x1:6")
    out.append(("hs048", x, (x[0] - 1) ** 2 + (x[1] - x[2]) ** 2 + (x[3] - x[4]) ** 2,
                [sum(x) - 5, x[2] - 2 * (x[3] + x[4]) + 3], [3, 5, -3, 2, -2]))

    x = sp.symbols("x1:6")
    out.append(("hs078", x, x[0] * x[1] * x[2] * x[3] * x[4],
                [sum(xi ** 2 for xi in x) - 10, x[1] * x[2] - 5 * x[3] * x[4],
                 x[0] ** 3 + x[1] ** 3 + 1], [-2, 1.5, 2, -1, -1]))

    x = sp.symbols("x1:11")
    f = sum((x[i + 1] - x[i] ** 2) ** 2 for i in range(9)) \
        + sp.Rational(1, 10) * sum((xi - 1) ** 2 for xi in x)
    out.append(("chain10", x, f, [sum(xi ** 2 for xi in x) - 8, x[0] - x[9]],
                [0.5] * 10))
    return out


def solve(name, x, f, cons, x0):
    n, m = len(x), len(cons)
    y = sp.symbols(f"y1:{m + 1}")
    lag = f + sum(yi * ci for yi, ci in zip(y, cons))
    residual = [sp.diff(lag, xi) for xi in x] + list(cons)
    unknowns = list(x) + list(y)
    jac = sp.Matrix(residual).jacobian(unknowns)

    f_np = sp.lambdify([x], f, "numpy")
    g_np = sp.lambdify([x], [sp.diff(f, xi) for xi in x], "numpy")
    c_np = [sp.lambdify([x], ci, "numpy") for ci in cons]
    cj_np = [sp.lambdify([x], [sp.diff(ci, xi) for xi in x], "numpy") for ci in cons]
    res = minimize(lambda v: f_np(v), np.array(x0, dtype=float),
                   jac=lambda v: np.array(g_np(v), dtype=float), method="SLSQP",
                   constraints=[{"type": "eq", "fun": cf, "jac": cj}
                                for cf, cj in zip(c_np, cj_np)],
                   options={"ftol": 1e-14, "maxiter": 2000})
    xs = res.x

    # least-squares multiplier at the SLSQP point
    g = np.array(g_np(xs), dtype=float)
    J = np.array([cj(xs) for cj in cj_np], dtype=float)
    ys = np.linalg.lstsq(J.T, -g, rcond=None)[0]

    res_mp = sp.lambdify([unknowns], residual, "mpmath")
    jac_mp = sp.lambdify([unknowns], jac, "mpmath")
    z = mp.matrix([mp.mpf(v) for v in list(xs) + list(ys)])
    for _ in range(100):
        r = mp.matrix(res_mp(list(z)))
        if mp.norm(r) < mp.mpf(10) ** -45:
            break
        z = z - mp.lu_solve(mp.matrix(jac_mp(list(z))), r)
    r = mp.matrix(res_mp(list(z)))
    return [z[i] for i in range(n)], [z[n + i] for i in range(m)], mp.norm(r)


def main():
    for name, x, f, cons, x0 in problems():
        xs, ys, r = solve(name, x, f, cons, x0)
        print(f"{name}: |KKT residual| = {mp.nstr(r, 3)}")
        print("  x* = {" + ", ".join(mp.nstr(v, 17) for v in xs) + "}")
        print("  y* = {" + ", ".join(mp.nstr(v, 17) for v in ys) + "}")


if __name__ == "__main__":
    main()
