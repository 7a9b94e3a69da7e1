"""Independent oracle computations for frozen test values.

Run with `python3 oracles/frozen_values.py`; each printed value is pasted into
the Rust tests that cite this script.
"""
from fractions import Fraction
from itertools import combinations, permutations
import math
import mpmath as mp

mp.mp.dps = 40


def lam_eum(lo, hi):
    p = mp.sqrt(mp.mpf(lo) * mp.mpf(hi))
    return (1 - p) / p


def w(p, d, g):
    p = mp.mpf(p)
    return d * p**g / (d * p**g + (1 - p) ** g)


print("# ladder lambdas")
for lo, hi in [("0.2", "0.5"), ("0.1", "0.2"), ("0.01", "0.1"), ("0.001", "0.01"), ("0.5", "1")]:
    print(lo, hi, mp.nstr(lam_eum(lo, hi), 17))

print("# weighting")
print(mp.nstr(w("1e-6", mp.mpf("0.77"), mp.mpf("0.44")), 17))
print(mp.nstr(w("1e-6", mp.mpf("1.19"), mp.mpf("0.27")), 17))
p = mp.sqrt(mp.mpf("0.001"))
print("cpt lambda at sqrt(1e-3)", mp.nstr(w(1 - p, mp.mpf("0.77"), mp.mpf("0.44")) / w(p, mp.mpf("0.77"), mp.mpf("0.44")), 17))

print("# chained solve, all p* = 0.3162 (exact rational arithmetic)")
q = Fraction(3162, 10000)
u = [Fraction(0), Fraction(1)]
for _ in range(4):
    ub, ul = u[-1], u[-2]
    u.append((ub - q * ul) / (1 - q))
print([float(x) for x in u])

print("# rls sqrt example")
e = (math.sqrt(4) + math.sqrt(9)) / 2
print("E[f]", e, "c", e * e)

print("# mann-whitney brute force")


def u_stat(a, b):
    return sum((x > y) + 0.5 * (x == y) for x in a for y in b)


def exact_p(a, b):
    pooled = list(a) + list(b)
    n1 = len(a)
    mean = len(a) * len(b) / 2
    obs = abs(u_stat(a, b) - mean)
    hits = total = 0
    for idx in combinations(range(len(pooled)), n1):
        s = set(idx)
        aa = [pooled[i] for i in idx]
        bb = [pooled[i] for i in range(len(pooled)) if i not in s]
        total += 1
        if abs(u_stat(aa, bb) - mean) >= obs - 1e-9:
            hits += 1
    return Fraction(hits, total)


fixtures = [
    ([1.2, 3.4, 2.2, 5.0, 0.7], [2.9, 4.1, 6.3, 3.3]),
    ([1, 2, 2, 3, 5, 5], [2, 4, 5, 6, 6, 7, 8]),
    ([1, 3], [2, 4]),
]
for a, b in fixtures:
    pe = exact_p(a, b)
    print(a, b, "U", u_stat(a, b), "p", repr(float(pe)))

print("# pearson fixture (direct formula)")
xs = [0.5, 1.7, 2.2, 3.9, 4.1, 5.5, 6.0, 7.3, 8.8, 9.1, 10.4, 11.0, 12.6, 13.3, 14.8, 15.2, 16.9, 17.5, 18.1, 19.7]
ys = [2.1, 1.9, 3.5, 3.0, 5.2, 4.4, 6.8, 6.1, 7.7, 9.4, 8.9, 10.2, 12.5, 11.1, 13.8, 14.9, 13.7, 16.2, 17.0, 18.3]
n = len(xs)
mx = mp.fsum(map(mp.mpf, xs)) / n
my = mp.fsum(map(mp.mpf, ys)) / n
sxy = mp.fsum((mp.mpf(x) - mx) * (mp.mpf(y) - my) for x, y in zip(xs, ys))
sxx = mp.fsum((mp.mpf(x) - mx) ** 2 for x in xs)
syy = mp.fsum((mp.mpf(y) - my) ** 2 for y in ys)
r = sxy / mp.sqrt(sxx * syy)
print("r", mp.nstr(r, 17))
# small-r fixture for a non-trivial p value
ys2 = [3.1, 0.4, 2.2, 4.8, 1.0, 3.3, 2.9, 0.1, 4.4, 1.7, 2.5, 3.8, 0.9, 4.1, 2.0, 1.2, 3.6, 0.6, 2.7, 4.9]
my2 = mp.fsum(map(mp.mpf, ys2)) / n
sxy2 = mp.fsum((mp.mpf(x) - mx) * (mp.mpf(y) - my2) for x, y in zip(xs, ys2))
syy2 = mp.fsum((mp.mpf(y) - my2) ** 2 for y in ys2)
r2 = sxy2 / mp.sqrt(sxx * syy2)
t = r2 * mp.sqrt((n - 2) / (1 - r2**2))
df = n - 2
# two-sided p via the regularized incomplete beta: p = I_{df/(df+t^2)}(df/2, 1/2)
pval = mp.betainc(mp.mpf(df) / 2, mp.mpf(1) / 2, 0, df / (df + t**2), regularized=True)
print("r2", mp.nstr(r2, 17), "p2", mp.nstr(pval, 17))

print("# cronbach 4x3 fixture")
m = [[2, 3, 3], [4, 4, 5], [1, 2, 2], [3, 5, 4]]
k = 3


def var(v):
    v = [Fraction(x) for x in v]
    mu = sum(v) / len(v)
    return sum((x - mu) ** 2 for x in v) / (len(v) - 1)


items = sum(var([row[j] for row in m]) for j in range(k))
tot = var([sum(row) for row in m])
alpha = Fraction(k, k - 1) * (1 - items / tot)
print("alpha", alpha, float(alpha))
