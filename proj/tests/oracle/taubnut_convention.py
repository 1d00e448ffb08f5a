"""Covariant-constancy residual of the Taub-NUT two-forms under both metric normalizations.

ds^2 = V (dr^2 + r^2 dth^2 + r^2 sin^2 th dph^2) + c V^-1 (dps + cos th dph)^2, V = 1 + 2m/r,
f_i = 4m s ^ dx_i - eps_ijk V dx_j ^ dx_k with s = dps + cos th dph and a ^ b = a(x)b - b(x)a.
Exits nonzero unless c = 4m^2 gives a vanishing residual and c = 16m^2 does not.
"""
import sys

import sympy as sp

r, th, ph, ps = sp.symbols("r theta phi psi", positive=True)
X = [r, th, ph, ps]
m = sp.Integer(1)
V = 1 + 2 * m / r
cart = [r * sp.sin(th) * sp.cos(ph), r * sp.sin(th) * sp.sin(ph), r * sp.cos(th)]
dx = [[sp.diff(c, v) for v in X] for c in cart]
sig = [0, 0, sp.cos(th), 1]
point = {r: 1.3, th: 0.7, ph: 0.4, ps: 0.2}


def residual(c):
    g = sp.diag(V, V * r**2, V * r**2 * sp.sin(th)**2, 0)
    for a in range(4):
        for b in range(4):
            g[a, b] += c / V * sig[a] * sig[b]
    gi = g.inv()
    gam = [[[float((sum(gi[l, s] * (sp.diff(g[s, a], X[b]) + sp.diff(g[s, b], X[a]) - sp.diff(g[a, b], X[s]))
                        for s in range(4)) / 2).subs(point))
             for b in range(4)] for a in range(4)] for l in range(4)]
    worst = 0.0
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        F = sp.zeros(4)
        for a in range(4):
            for b in range(4):
                wedge_s = sig[a] * dx[i][b] - sig[b] * dx[i][a]
                wedge_jk = dx[j][a] * dx[k][b] - dx[k][a] * dx[j][b]
                F[a, b] = 4 * m * wedge_s - 2 * V * wedge_jk
        Fn = [[float(F[a, b].subs(point)) for b in range(4)] for a in range(4)]
        for l in range(4):
            for a in range(4):
                for b in range(4):
                    d = float(sp.diff(F[a, b], X[l]).subs(point))
                    d -= sum(gam[s][l][a] * Fn[s][b] + gam[s][l][b] * Fn[a][s] for s in range(4))
                    worst = max(worst, abs(d))
    return worst


four = residual(4 * m**2)
sixteen = residual(16 * m**2)
print("4m^2 residual:", four)
print("16m^2 residual:", sixteen)
sys.exit(0 if four < 1e-9 and sixteen > 1e-3 else 1)
