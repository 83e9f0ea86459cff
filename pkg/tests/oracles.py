"""Slow, obviously-correct reference implementations used only by the tests."""
from fractions import Fraction
from itertools import permutations


def set_partitions(items):
    items = list(items)
    if not items:
        yield []
        return
    head, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[head]] + part
        for i in range(len(part)):
            yield part[:i] + [[head] + part[i]] + part[i + 1:]


def crosses(blocks):
    for a in blocks:
        for b in blocks:
            if a is b:
                continue
            for p in a:
                for r in a:
                    for q in b:
                        for s in b:
                            if p < q < r < s:
                                return True
    return False


def brute_nc(k):
    return [sorted(sorted(b) for b in p) for p in set_partitions(range(1, k + 1)) if not crosses(p)]


def refines(nu, rho):
    return all(any(set(a) <= set(b) for b in rho) for a in nu)


def brute_kreweras(blocks, k):
    """Coarsest partition of the barred points 1..k whose union with ``blocks`` stays non-crossing.

    Point i sits at position 2i-1, barred point i at 2i.
    """
    plain = [[2 * x - 1 for x in b] for b in blocks]
    best = None
    for cand in set_partitions(range(1, k + 1)):
        barred = [[2 * x for x in b] for b in cand]
        if crosses(plain + barred):
            continue
        if best is None or len(cand) < len(best):
            best = cand
    return sorted(sorted(b) for b in best)


def brute_mobius(k, leq_fn, elements):
    """Moebius function of a finite poset by the defining recursion."""
    mu = {}

    def m(x, y):
        key = (x, y)
        if key in mu:
            return mu[key]
        if x == y:
            val = 1
        else:
            val = -sum(m(x, z) for z in elements if leq_fn(x, z) and leq_fn(z, y) and z != y)
        mu[key] = val
        return val
    return m


def brute_length(images):
    """Minimal transposition count via breadth-first search (tiny k only)."""
    k = len(images)
    start = tuple(range(1, k + 1))
    target = tuple(images)
    frontier, seen, d = {start}, {start}, 0
    while target not in frontier:
        nxt = set()
        for p in frontier:
            for i in range(k):
                for j in range(i + 1, k):
                    q = list(p)
                    q[i], q[j] = q[j], q[i]
                    q = tuple(q)
                    if q not in seen:
                        seen.add(q)
                        nxt.add(q)
        frontier, d = nxt, d + 1
    return d


def nc_sum_moments(fc, k):
    """``sum over NC(k) of prod fc[|B|]`` straight from brute-force enumeration."""
    total = Fraction(0)
    for p in brute_nc(k):
        v = Fraction(1)
        for b in p:
            v *= fc[len(b) - 1]
        total += v
    return total


def brute_perm_cycles(images):
    seen, n = set(), 0
    for i in range(1, len(images) + 1):
        if i in seen:
            continue
        n += 1
        j = i
        while j not in seen:
            seen.add(j)
            j = images[j - 1]
    return n


def all_perms(k):
    return list(permutations(range(1, k + 1)))
