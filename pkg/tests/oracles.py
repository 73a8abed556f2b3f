"""Independent brute-force evaluators used to check the engine.

Everything here is written straight from the defining formulas with exact
Fraction arithmetic and no shared code with the package. Deliberately slow.
"""

from __future__ import annotations

from fractions import Fraction


def brute_rca(ads: list[set[str]], retained: set[str]) -> list[dict[str, Fraction]]:
    """Per-ad skill RCA over retained skills; ads with no retained skill get {}."""
    rows = [a & retained for a in ads]
    total = sum(len(r) for r in rows)
    col = {s: sum(1 for r in rows if s in r) for s in retained}
    out = []
    for r in rows:
        if not r:
            out.append({})
            continue
        out.append({s: Fraction(1, len(r)) / Fraction(col[s], total) for s in r})
    return out


def brute_effective(ads: list[set[str]], retained: set[str]) -> list[set[str]]:
    rca = brute_rca(ads, retained)
    return [{s for s, v in row.items() if v >= 1} for row in rca]


def brute_theta(ads: list[set[str]], retained: set[str], s1: str, s2: str) -> Fraction:
    eff = brute_effective(ads, retained)
    co = sum(1 for row in eff if s1 in row and s2 in row)
    c1 = sum(1 for row in eff if s1 in row)
    c2 = sum(1 for row in eff if s2 in row)
    denom = max(c1, c2)
    return Fraction(co, denom) if denom else Fraction(0)


def brute_importance(ads: list[set[str]], retained: set[str], members: list[int], skill: str) -> Fraction:
    """Mean RCA of skill over the ads at positions ``members``."""
    rca = brute_rca(ads, retained)
    return sum((rca[i].get(skill, Fraction(0)) for i in members), Fraction(0)) / len(members)


def brute_set_similarity(
    ads: list[set[str]], retained: set[str], members1: list[int], members2: list[int]
) -> Fraction | None:
    """Weighted skill-set similarity between two ad groups; None if degenerate."""
    s1 = sorted(set().union(*(ads[i] for i in members1)) & retained)
    s2 = sorted(set().union(*(ads[i] for i in members2)) & retained)
    if not s1 or not s2:
        return None
    w1 = {s: brute_importance(ads, retained, members1, s) for s in s1}
    w2 = {s: brute_importance(ads, retained, members2, s) for s in s2}
    c = sum(w1.values(), Fraction(0)) * sum(w2.values(), Fraction(0))
    if c == 0:
        return None
    num = sum(
        (w1[a] * w2[b] * brute_theta(ads, retained, a, b) for a in s1 for b in s2),
        Fraction(0),
    )
    return num / c


def brute_best_stump(X, g, h, lam: float, min_leaf: int = 1):
    """Exhaustive best depth-1 split by second-order gain over all (feature, threshold)."""
    n, d = X.shape
    G, H = float(g.sum()), float(h.sum())
    parent = G * G / (H + lam)
    best = (0.0, None, None)  # gain, feature, threshold
    for f in range(d):
        vals = sorted(set(float(v) for v in X[:, f]))
        for lo, hi in zip(vals, vals[1:]):
            thr = (lo + hi) / 2.0
            left = X[:, f] <= thr
            nl = int(left.sum())
            if nl < min_leaf or n - nl < min_leaf:
                continue
            gl, hl = float(g[left].sum()), float(h[left].sum())
            gr, hr = G - gl, H - hl
            gain = 0.5 * (gl * gl / (hl + lam) + gr * gr / (hr + lam) - parent)
            if gain > best[0] + 1e-12:
                best = (gain, f, thr)
    return best
