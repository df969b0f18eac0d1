"""High-precision reference values frozen into the C++ tests.

Student-t tail probabilities come from direct quadrature of the density;
the KDE entropy is a 50-digit evaluation of the resubstitution estimate.
Run with mpmath installed; paste the printed values into the tests.
"""
import mpmath as mp

mp.mp.dps = 50


def t_sf(t, df):
    nu = mp.mpf(df)
    c = mp.gamma((nu + 1) / 2) / (mp.sqrt(nu * mp.pi) * mp.gamma(nu / 2))
    dens = lambda u: c * (1 + u * u / nu) ** (-(nu + 1) / 2)
    if t >= 0:
        return mp.mpf(1) / 2 - mp.quad(dens, [0, t])
    return mp.mpf(1) / 2 + mp.quad(dens, [t, 0])


print("// t survival function: {t, df, sf}")
for df in (1, 7, 30, 100):
    for t in ("-1.2", "0.5", "1", "2.3646", "3.5", "6"):
        print("{%s, %d, %s}," % (t, df, mp.nstr(t_sf(mp.mpf(t), df), 25)))

# 10 points in 4 dimensions on a 1/64 grid, exactly representable in float.
pts = [[((i * 7 + j * 13) % 23 - 11) / 64 for j in range(4)] for i in range(10)]
pts = [[mp.mpf(v) + mp.mpf(i * j) / 64 for j, v in enumerate(row)] for i, row in enumerate(pts)]


def kde_entropy(points, h):
    m = len(points)
    d = len(h)
    norm = mp.mpf(1)
    for hj in h:
        norm *= mp.sqrt(2 * mp.pi) * hj
    total = mp.mpf(0)
    for xi in points:
        p = mp.mpf(0)
        for xq in points:
            s = sum(((xi[j] - xq[j]) / h[j]) ** 2 for j in range(d))
            p += mp.e ** (-s / 2)
        total += mp.log(p / (m * norm))
    return -total / m


print("// KDE points (x64)")
for row in pts:
    print("{" + ", ".join(mp.nstr(v * 64, 10) for v in row) + "},")
print("// fixed h = 0.5:", mp.nstr(kde_entropy(pts, [mp.mpf("0.5")] * 4), 25))

m = len(pts)
factor = mp.mpf(m) ** (mp.mpf(-1) / (4 + 4))
h = []
for j in range(4):
    col = [p[j] for p in pts]
    mean = sum(col) / m
    var = sum((v - mean) ** 2 for v in col) / (m - 1)
    h.append(factor * mp.sqrt(var))
print("// scott:", mp.nstr(kde_entropy(pts, h), 25))
