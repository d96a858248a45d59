"""Shared test-side instance generators and independent oracles.

Everything here is deliberately naive: closure systems for random lattices,
union-find congruence closure for random epimorphisms, brute-force order
oracles.  Test code cross-checks the package against these, so they must
not share implementation shortcuts with it.
"""

from __future__ import annotations

import random
from itertools import combinations

from latkit.order import FiniteLattice, FinitePoset, build_lattice
from latkit.homs import Hom
from latkit.terms import Join, Meet, Term, gen, join_of, meet_of, sort_key


def covers_from_leq(elements, leq) -> list[tuple[str, str]]:
    out = []
    for a in elements:
        for b in elements:
            if a != b and leq(a, b):
                if not any(
                    c != a and c != b and leq(a, c) and leq(c, b) for c in elements
                ):
                    out.append((a, b))
    return out


def lattice_from_closed_sets(sets) -> FiniteLattice:
    """Finite lattice of an intersection-closed family ordered by inclusion."""
    family = sorted({frozenset(s) for s in sets}, key=lambda s: (len(s), sorted(s)))
    names = {s: f"e{idx:02d}" for idx, s in enumerate(family)}
    by_name = {v: k for k, v in names.items()}
    els = sorted(names.values())
    leq = lambda a, b: by_name[a] <= by_name[b]
    return build_lattice(FinitePoset(els, covers_from_leq(els, leq)))


def random_lattice(rng: random.Random, ground: int = 5, min_size: int = 3,
                   max_size: int = 12) -> FiniteLattice:
    """Random closure system on a small ground set, retried until the size
    lands in range."""
    universe = frozenset(range(ground))
    while True:
        n_seeds = rng.randint(2, ground + 2)
        family = {universe}
        for _ in range(n_seeds):
            family.add(frozenset(i for i in universe if rng.random() < 0.45))
        # close under intersection
        changed = True
        while changed:
            changed = False
            for a, b in list(combinations(sorted(family, key=sorted), 2)):
                c = a & b
                if c not in family:
                    family.add(c)
                    changed = True
        if min_size <= len(family) <= max_size:
            return lattice_from_closed_sets(family)


def congruence_quotient(rng: random.Random, L: FiniteLattice,
                        max_blocks: int = 8) -> tuple[FiniteLattice, Hom] | None:
    """Collapse random pairs, close to a congruence, and return the quotient
    with the canonical projection.  None when the quotient stays too big or
    degenerates to a single block."""
    parent = {e: e for e in L.elements}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)
            return True
        return False

    for _ in range(rng.randint(1, 3)):
        union(rng.choice(L.elements), rng.choice(L.elements))
    changed = True
    while changed:
        changed = False
        els = L.elements
        for a in els:
            for b in els:
                if find(a) == find(b) and a < b:
                    for c in els:
                        if union(L.meet(a, c), L.meet(b, c)):
                            changed = True
                        if union(L.join(a, c), L.join(b, c)):
                            changed = True
    blocks: dict[str, list[str]] = {}
    for e in L.elements:
        blocks.setdefault(find(e), []).append(e)
    if not 2 <= len(blocks) <= max_blocks:
        return None
    name_of = {}
    for idx, root in enumerate(sorted(blocks)):
        for e in blocks[root]:
            name_of[e] = f"q{idx}"
    quots = sorted(set(name_of.values()))

    def qleq(x, y):
        # [a] <= [b] iff the meet of representatives collapses onto [a]
        a = next(e for e in L.elements if name_of[e] == x)
        b = next(e for e in L.elements if name_of[e] == y)
        return name_of[L.meet(a, b)] == x

    D = build_lattice(FinitePoset(quots, covers_from_leq(quots, qleq)))
    g = Hom(L, D, {e: name_of[e] for e in L.generators})
    return D, g


def random_onto_hom(rng: random.Random, D: FiniteLattice, extra_ground: int = 2,
                    max_size: int = 10) -> Hom | None:
    """Random subdirect-style source: a sublattice of D x K projecting onto
    D, with the projection as the hom."""
    K = random_lattice(rng, ground=extra_ground, min_size=2, max_size=4)
    seed = {(d, rng.choice(K.elements)) for d in D.elements}
    seed.add((D.elements[0], K.elements[0]))
    pairs = sorted(seed)
    seen = set(pairs)
    i = 0
    while i < len(pairs):
        a1, b1 = pairs[i]
        for j in range(i + 1):
            a2, b2 = pairs[j]
            for c in ((D.meet(a1, a2), K.meet(b1, b2)), (D.join(a1, a2), K.join(b1, b2))):
                if c not in seen:
                    seen.add(c)
                    pairs.append(c)
        i += 1
    if len(pairs) > max_size:
        return None
    name_of = {p: f"p{idx:02d}" for idx, p in enumerate(sorted(pairs))}
    by_name = {v: k for k, v in name_of.items()}
    els = sorted(name_of.values())
    leq = lambda x, y: D.leq(by_name[x][0], by_name[y][0]) and K.leq(
        by_name[x][1], by_name[y][1]
    )
    B = build_lattice(FinitePoset(els, covers_from_leq(els, leq)))
    return Hom(B, D, {e: by_name[e][0] for e in B.generators})


def random_term(rng: random.Random, names, max_depth: int) -> Term:
    if max_depth == 0 or rng.random() < 0.3:
        return gen(rng.choice(names))
    width = rng.randint(2, 3)
    kids = [random_term(rng, names, max_depth - 1) for _ in range(width)]
    return meet_of(kids) if rng.random() < 0.5 else join_of(kids)


def brute_glb(L: FiniteLattice, a: str, b: str) -> str | None:
    lows = [c for c in L.elements if L.leq(c, a) and L.leq(c, b)]
    best = [c for c in lows if all(L.leq(d, c) for d in lows)]
    return best[0] if best else None


def all_terms_up_to(names, depth: int, width: int | None = None,
                    pool_cap: int | None = None) -> list[Term]:
    """Deterministic enumeration of shape-canonical terms of bounded depth.
    ``width`` bounds the child count of new nodes (None = unbounded),
    ``pool_cap`` keeps the per-level pool to the structurally smallest."""
    level: list[Term] = [gen(n) for n in sorted(names)]
    seen: set[Term] = set(level)
    for _ in range(depth):
        meet_pool = [t for t in level if not isinstance(t, Meet)]
        join_pool = [t for t in level if not isinstance(t, Join)]
        new: list[Term] = []
        for pool, combine in ((meet_pool, meet_of), (join_pool, join_of)):
            sizes = range(2, (width or len(pool)) + 1)
            for k in sizes:
                for subset in combinations(pool, k):
                    t = combine(subset)
                    if t not in seen:
                        seen.add(t)
                        new.append(t)
        level = level + new
        if pool_cap is not None and len(level) > pool_cap:
            level = sorted(level, key=lambda t: (term_size_of(t), sort_key(t)))[:pool_cap]
    return sorted(seen, key=lambda t: (term_size_of(t), sort_key(t)))


def term_size_of(t: Term) -> int:
    from latkit.terms import term_size

    return term_size(t)
