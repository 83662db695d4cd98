"""Independent brute-force oracles shared by the test modules.

Everything here uses exact rational arithmetic (fractions.Fraction) and
plain enumeration, deliberately avoiding the library's integer-numerator
formulation so the two routes stay independent.
"""

from fractions import Fraction
from itertools import combinations


def ks_d(a, b):
    points = sorted(set(a) | set(b))
    best = Fraction(0)
    for x in points:
        fa = Fraction(sum(1 for v in a if v <= x), len(a))
        fb = Fraction(sum(1 for v in b if v <= x), len(b))
        best = max(best, abs(fa - fb))
    return best


def ks_exact_p(a, b):
    pooled = list(a) + list(b)
    n1 = len(a)
    d_obs = ks_d(a, b)
    hits = total = 0
    for chosen in combinations(range(len(pooled)), n1):
        sample_a = [pooled[i] for i in chosen]
        rest = [pooled[i] for i in range(len(pooled)) if i not in chosen]
        total += 1
        if ks_d(sample_a, rest) >= d_obs:
            hits += 1
    return Fraction(hits, total)


def midranks(pooled):
    order = sorted(range(len(pooled)), key=lambda i: pooled[i])
    ranks = [Fraction(0)] * len(pooled)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and pooled[order[j + 1]] == pooled[order[i]]:
            j += 1
        mid = Fraction(i + 1 + j + 1, 2)
        for k in range(i, j + 1):
            ranks[order[k]] = mid
        i = j + 1
    return ranks


def mwu_u(a, b):
    ranks = midranks(list(a) + list(b))
    r1 = sum(ranks[:len(a)])
    return r1 - Fraction(len(a) * (len(a) + 1), 2)


def mwu_exact_p(a, b):
    pooled = list(a) + list(b)
    n1, n2 = len(a), len(b)
    ranks = midranks(pooled)
    mu = Fraction(n1 * n2, 2)
    obs = abs(mwu_u(a, b) - mu)
    hits = total = 0
    for chosen in combinations(range(len(pooled)), n1):
        u_star = sum(ranks[i] for i in chosen) - Fraction(n1 * (n1 + 1), 2)
        total += 1
        if abs(u_star - mu) >= obs:
            hits += 1
    return Fraction(hits, total)
