"""Finite posets and lattices.

Elements are opaque string ids, ordered lexicographically for every
deterministic output.  Internally each element carries bitmask up-sets and
down-sets indexed by a fixed linear extension, which makes order tests O(1)
and lets meets and joins be read off as extreme bits of mask intersections.

The module also hosts the finite decision procedures: join irreducibles,
minimal nontrivial join covers, the join-cover dependency digraph with its
cycle test, and the interpolation-style antichain conditions used as
hypotheses elsewhere in the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import (
    CapExceeded,
    InvalidPoset,
    NotALattice,
    NotGenerating,
    UnassignedGenerator,
    UnknownElement,
)
from .terms import Gen, Meet, Term

__all__ = [
    "FinitePoset",
    "FiniteLattice",
    "JoinCover",
    "LowerBoundedReport",
    "BoundedReport",
    "ConditionReport",
    "build_lattice",
    "join_irreducibles",
    "meet_irreducibles",
    "is_join_prime",
    "is_meet_prime",
    "minimal_join_covers",
    "d_relation",
    "is_lower_bounded_finite",
    "is_upper_bounded_finite",
    "is_bounded_finite",
    "check_whitman",
    "check_dean",
    "evaluate_term",
    "generated_sublattice",
    "minimal_generating_set",
    "chain",
]

DEFAULT_ENUM_CAP = 20


class FinitePoset:
    """Finite poset given by elements and its cover (Hasse) relation.

    Rejects cover lists that contain a cycle or a transitively implied pair.
    """

    __slots__ = ("elements", "covers", "_index", "_order", "_pos", "_up", "_down")

    def __init__(self, elements: Iterable[str], covers: Iterable[Sequence[str]]):
        self.elements = tuple(sorted(elements))
        if not self.elements:
            raise InvalidPoset("a poset needs at least one element")
        if len(set(self.elements)) != len(self.elements):
            raise InvalidPoset("duplicate element ids")
        self._index = {e: i for i, e in enumerate(self.elements)}
        cov = []
        for pair in covers:
            lo, hi = pair
            if lo not in self._index or hi not in self._index:
                raise InvalidPoset(f"cover ({lo!r}, {hi!r}) uses unknown elements")
            if lo == hi:
                raise InvalidPoset(f"reflexive cover ({lo!r}, {hi!r})")
            cov.append((lo, hi))
        self.covers = tuple(sorted(set(cov)))

        n = len(self.elements)
        succ = [[] for _ in range(n)]
        pred_count = [0] * n
        for lo, hi in self.covers:
            succ[self._index[lo]].append(self._index[hi])
            pred_count[self._index[hi]] += 1
        # Kahn with lexicographic tie-break gives a deterministic linear
        # extension; leftovers mean a cycle, i.e. antisymmetry fails.
        import heapq

        ready = [i for i in range(n) if pred_count[i] == 0]
        heapq.heapify(ready)
        order: list[int] = []
        counts = pred_count[:]
        while ready:
            i = heapq.heappop(ready)
            order.append(i)
            for j in succ[i]:
                counts[j] -= 1
                if counts[j] == 0:
                    heapq.heappush(ready, j)
        if len(order) != n:
            raise InvalidPoset("cover relation contains a cycle")
        self._order = order
        self._pos = pos = [0] * n
        for p, i in enumerate(order):
            pos[i] = p

        # down[i]: bitmask over *positions* of elements <= element i
        down = [0] * n
        pred = [[] for _ in range(n)]
        for lo, hi in self.covers:
            pred[self._index[hi]].append(self._index[lo])
        for i in order:
            m = 1 << pos[i]
            for j in pred[i]:
                m |= down[j]
            down[i] = m
        up = [0] * n
        for i in reversed(order):
            m = 1 << pos[i]
            for j in succ[i]:
                m |= up[j]
            up[i] = m
        self._down = down
        self._up = up

        for lo, hi in self.covers:
            i, j = self._index[lo], self._index[hi]
            between = up[i] & down[j] & ~(1 << pos[i]) & ~(1 << pos[j])
            if between:
                raise InvalidPoset(f"cover ({lo!r}, {hi!r}) is transitively implied")

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, e: str) -> bool:
        return e in self._index

    def index(self, e: str) -> int:
        try:
            return self._index[e]
        except KeyError:
            raise UnknownElement(f"unknown element {e!r}") from None

    def leq(self, a: str, b: str) -> bool:
        return bool(self._down[self.index(b)] >> self._pos[self.index(a)] & 1)

    def lower_covers(self, e: str) -> tuple[str, ...]:
        return tuple(lo for lo, hi in self.covers if hi == e)

    def upper_covers(self, e: str) -> tuple[str, ...]:
        return tuple(hi for lo, hi in self.covers if lo == e)

    def dual(self) -> "FinitePoset":
        return FinitePoset(self.elements, [(hi, lo) for lo, hi in self.covers])

    def heights(self) -> dict[str, int]:
        """Length of the longest chain below each element."""
        h = {e: 0 for e in self.elements}
        for i in self._order:
            e = self.elements[i]
            for c in self.lower_covers(e):
                h[e] = max(h[e], h[c] + 1)
        return h

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, FinitePoset)
            and self.elements == other.elements
            and self.covers == other.covers
        )

    def __hash__(self):
        return hash((self.elements, self.covers))

    def __repr__(self) -> str:
        return f"FinitePoset({len(self.elements)} elements, {len(self.covers)} covers)"

    # --- mask helpers used by the lattice layer and the enumerators ---

    def _mask_of(self, ids: Iterable[str]) -> int:
        m = 0
        for e in ids:
            m |= 1 << self._pos[self.index(e)]
        return m

    def _ids_of(self, mask: int) -> list[str]:
        out = []
        p = 0
        while mask:
            if mask & 1:
                out.append(self.elements[self._order[p]])
            mask >>= 1
            p += 1
        return sorted(out)


class FiniteLattice:
    """Finite lattice with explicit meet/join tables and a designated
    generating set (all elements by default)."""

    __slots__ = ("poset", "bottom", "top", "generators", "_meet", "_join")

    def __init__(self, poset: FinitePoset, generators: Iterable[str] | None = None):
        self.poset = poset
        n = len(poset.elements)
        order, pos = poset._order, poset._pos
        down, up = poset._down, poset._up
        meet = [[0] * n for _ in range(n)]
        join = [[0] * n for _ in range(n)]
        for i in range(n):
            meet[i][i] = i
            join[i][i] = i
            for j in range(i + 1, n):
                common = down[i] & down[j]
                if not common:
                    raise NotALattice(poset.elements[i], poset.elements[j], "meet")
                m = order[common.bit_length() - 1]
                if down[m] != common:
                    raise NotALattice(poset.elements[i], poset.elements[j], "meet")
                meet[i][j] = meet[j][i] = m
                commonu = up[i] & up[j]
                if not commonu:
                    raise NotALattice(poset.elements[i], poset.elements[j], "join")
                lowest = commonu & -commonu
                mu = order[lowest.bit_length() - 1]
                if up[mu] != commonu:
                    raise NotALattice(poset.elements[i], poset.elements[j], "join")
                join[i][j] = join[j][i] = mu
        self._meet = meet
        self._join = join
        bitems = [e for e in poset.elements if down[poset._index[e]].bit_count() == 1]
        titems = [e for e in poset.elements if up[poset._index[e]].bit_count() == 1]
        assert len(bitems) == 1 and len(titems) == 1
        self.bottom = bitems[0]
        self.top = titems[0]
        if generators is None:
            self.generators = poset.elements
        else:
            gens = tuple(sorted(set(generators)))
            for g in gens:
                poset.index(g)
            if generated_sublattice(self, gens) != set(poset.elements):
                raise NotGenerating(f"{gens} does not generate the lattice")
            self.generators = gens

    # --- basic structure ---

    @property
    def elements(self) -> tuple[str, ...]:
        return self.poset.elements

    def __len__(self) -> int:
        return len(self.poset.elements)

    def __contains__(self, e: str) -> bool:
        return e in self.poset

    def leq(self, a: str, b: str) -> bool:
        return self.poset.leq(a, b)

    def meet(self, a: str, b: str) -> str:
        p = self.poset
        return p.elements[self._meet[p.index(a)][p.index(b)]]

    def join(self, a: str, b: str) -> str:
        p = self.poset
        return p.elements[self._join[p.index(a)][p.index(b)]]

    def meet_set(self, items: Iterable[str]) -> str:
        """Meet of a finite set; the empty meet is the top element."""
        it = list(items)
        if not it:
            return self.top
        p = self.poset
        acc = p.index(it[0])
        for e in it[1:]:
            acc = self._meet[acc][p.index(e)]
        return p.elements[acc]

    def join_set(self, items: Iterable[str]) -> str:
        """Join of a finite set; the empty join is the bottom element."""
        it = list(items)
        if not it:
            return self.bottom
        p = self.poset
        acc = p.index(it[0])
        for e in it[1:]:
            acc = self._join[acc][p.index(e)]
        return p.elements[acc]

    def with_generators(self, generators: Iterable[str]) -> "FiniteLattice":
        return FiniteLattice(self.poset, generators)

    def dual(self) -> "FiniteLattice":
        return FiniteLattice(self.poset.dual(), self.generators)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, FiniteLattice)
            and self.poset == other.poset
            and self.generators == other.generators
        )

    def __hash__(self):
        return hash((self.poset, self.generators))

    def __repr__(self) -> str:
        return f"FiniteLattice({len(self)} elements)"

    # --- serialisation ---

    def to_dict(self) -> dict:
        d = {
            "elements": list(self.elements),
            "covers": [list(c) for c in self.poset.covers],
        }
        if self.generators != self.elements:
            d["generators"] = list(self.generators)
        return d

    @classmethod
    def from_dict(cls, data: Mapping) -> "FiniteLattice":
        try:
            elements = data["elements"]
            covers = data["covers"]
        except (KeyError, TypeError) as exc:
            raise InvalidPoset(f"missing field in lattice data: {exc}") from None
        return cls(FinitePoset(elements, covers), data.get("generators"))

    def to_dot(self) -> str:
        heights = self.poset.heights()
        by_h: dict[int, list[str]] = {}
        for e, h in heights.items():
            by_h.setdefault(h, []).append(e)
        lines = ["digraph lattice {", "  rankdir=BT;", '  node [shape=ellipse];']
        for e in self.elements:
            lines.append(f'  "{e}";')
        for lo, hi in self.poset.covers:
            lines.append(f'  "{lo}" -> "{hi}";')
        for h in sorted(by_h):
            row = "; ".join(f'"{e}"' for e in sorted(by_h[h]))
            lines.append(f"  {{ rank=same; {row}; }}")
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_lattice(
    poset: FinitePoset, generators: Iterable[str] | None = None
) -> FiniteLattice:
    """Compute meet/join tables for ``poset``.  Raises :class:`NotALattice`
    naming a witness pair when some pair has no least upper or greatest
    lower bound."""
    return FiniteLattice(poset, generators)


def chain(n: int) -> FiniteLattice:
    """The n-element chain c0 < c1 < ... (handy fixture)."""
    els = [f"c{i}" for i in range(n)]
    return FiniteLattice(FinitePoset(els, [(f"c{i}", f"c{i+1}") for i in range(n - 1)]))


def generated_sublattice(L: FiniteLattice, seed: Iterable[str]) -> set[str]:
    """Closure of ``seed`` under binary meet and join."""
    out = sorted(set(seed))
    for e in out:
        L.poset.index(e)
    seen = set(out)
    i = 0
    while i < len(out):
        a = out[i]
        for j in range(i + 1):
            b = out[j]
            for c in (L.meet(a, b), L.join(a, b)):
                if c not in seen:
                    seen.add(c)
                    out.append(c)
        i += 1
    return seen


def minimal_generating_set(L: FiniteLattice) -> tuple[str, ...]:
    """Greedily shrink the element set to an inclusion-minimal generating
    set, dropping candidates in lexicographic order."""
    gens = list(L.elements)
    for e in list(L.elements):
        trial = [g for g in gens if g != e]
        if trial and generated_sublattice(L, trial) == set(L.elements):
            gens = trial
    return tuple(gens)


def evaluate_term(L: FiniteLattice, assignment: Mapping[str, str], t: Term) -> str:
    """Homomorphic evaluation of ``t`` in ``L``.  Empty meets and joins, had
    they a term form, would land on top and bottom via ``meet_set`` and
    ``join_set``."""
    if isinstance(t, Gen):
        try:
            v = assignment[t.name]
        except KeyError:
            raise UnassignedGenerator(f"no value for generator {t.name!r}") from None
        L.poset.index(v)
        return v
    vals = [evaluate_term(L, assignment, c) for c in t.children]
    return L.meet_set(vals) if isinstance(t, Meet) else L.join_set(vals)


# --- irreducibles, covers and the dependency digraph ---


def join_irreducibles(L: FiniteLattice) -> tuple[str, ...]:
    """Elements other than bottom with a unique lower cover."""
    return tuple(
        e
        for e in L.elements
        if e != L.bottom and len(L.poset.lower_covers(e)) == 1
    )


def meet_irreducibles(L: FiniteLattice) -> tuple[str, ...]:
    return tuple(
        e for e in L.elements if e != L.top and len(L.poset.upper_covers(e)) == 1
    )


def _check_enum_cap(L: FiniteLattice, max_size: int) -> None:
    if len(L) > max_size:
        raise CapExceeded(max_size, f"subset enumeration over {len(L)} elements")


def _antichains(
    L: FiniteLattice, universe: Sequence[str] | None = None
) -> Iterator[tuple[str, ...]]:
    """All antichains (including the empty one) from ``universe`` in
    lexicographic order."""
    els = sorted(universe) if universe is not None else list(L.elements)
    n = len(els)

    def rec(i: int, chosen: tuple[str, ...]) -> Iterator[tuple[str, ...]]:
        yield chosen
        for j in range(i, n):
            c = els[j]
            if all(not L.leq(c, x) and not L.leq(x, c) for x in chosen):
                yield from rec(j + 1, chosen + (c,))

    yield from rec(0, ())


def is_join_prime(L: FiniteLattice, p: str, max_size: int = DEFAULT_ENUM_CAP) -> bool:
    """``p <= join(A)`` forces ``p <= a`` for some ``a`` in ``A``, for every
    antichain ``A`` (the empty antichain rules out the bottom element)."""
    L.poset.index(p)
    _check_enum_cap(L, max_size)
    for A in _antichains(L):
        if L.leq(p, L.join_set(A)) and not any(L.leq(p, a) for a in A):
            return False
    return True


def is_meet_prime(L: FiniteLattice, p: str, max_size: int = DEFAULT_ENUM_CAP) -> bool:
    return is_join_prime(L.dual(), p, max_size)


@dataclass(frozen=True)
class JoinCover:
    """An antichain ``cover`` with ``base <= join(cover)``."""

    base: str
    cover: tuple[str, ...]

    def nontrivial_in(self, L: FiniteLattice) -> bool:
        return all(not L.leq(self.base, a) for a in self.cover)


def minimal_join_covers(
    L: FiniteLattice, p: str, max_size: int = DEFAULT_ENUM_CAP
) -> tuple[JoinCover, ...]:
    """All minimal nontrivial join covers of ``p`` consisting of join
    irreducibles: antichain covers such that every cover of ``p`` refining
    them contains them.  Enumeration-based; meant for small lattices and as
    the oracle for :func:`d_relation`."""
    if p not in set(join_irreducibles(L)):
        raise ValueError(f"{p!r} is not join irreducible")
    _check_enum_cap(L, max_size)
    ji = join_irreducibles(L)
    cands = [
        A
        for A in _antichains(L, ji)
        if A and L.leq(p, L.join_set(A)) and all(not L.leq(p, a) for a in A)
    ]

    def refines(C, A):
        return all(any(L.leq(c, a) for a in A) for c in C)

    out = []
    for A in cands:
        if all(not (refines(C, A) and C != A) for C in cands):
            out.append(JoinCover(p, A))
    return tuple(out)


def d_relation(L: FiniteLattice) -> dict[str, tuple[str, ...]]:
    """Dependency digraph on join irreducibles: an edge ``p -> q`` whenever
    ``q`` lies in some minimal nontrivial join cover of ``p``."""
    edges, _ = _d_relation_with_witnesses(L)
    return edges


def _d_relation_with_witnesses(L: FiniteLattice):
    """Edge ``p -> q`` holds iff some ``x`` satisfies ``p <= x v q`` but
    ``p !<= x v q*`` (``q*`` the lower cover of ``q``) and ``p !<= q``; the
    witness ``x`` is recorded for certificate checking."""
    p_ = L.poset
    ji = join_irreducibles(L)
    ji_idx = [p_.index(q) for q in ji]
    ji_mask = 0
    for i in ji_idx:
        ji_mask |= 1 << p_._pos[i]
    down, pos, order = p_._down, p_._pos, p_._order
    edges: dict[str, set[str]] = {q: set() for q in ji}
    witness: dict[tuple[str, str], str] = {}
    for q in ji:
        qi = p_.index(q)
        qstar = p_.index(L.poset.lower_covers(q)[0])
        targets = ji_mask & ~down[qi]
        if not targets:
            continue
        for x in L.elements:
            xi = p_.index(x)
            u = L._join[xi][qi]
            ustar = L._join[xi][qstar]
            wm = down[u] & ~down[ustar] & targets
            while wm:
                low = wm & -wm
                pel = p_.elements[order[low.bit_length() - 1]]
                edges[pel].add(q)
                witness.setdefault((pel, q), x)
                wm &= wm - 1
    return {q: tuple(sorted(v)) for q, v in edges.items()}, witness


@dataclass(frozen=True)
class LowerBoundedReport:
    """Outcome of the dependency-cycle test with its certificate: a rank
    function strictly decreasing along edges, or an explicit cycle (with the
    per-edge witnesses that prove each edge)."""

    ok: bool
    rank: dict[str, int] | None
    cycle: tuple[str, ...] | None
    cycle_witnesses: tuple[str, ...] | None

    def __bool__(self) -> bool:
        return self.ok


def is_lower_bounded_finite(L: FiniteLattice) -> LowerBoundedReport:
    edges, witness = _d_relation_with_witnesses(L)
    nodes = sorted(edges)
    # rank 0 for sinks; each edge p -> q must have rank(p) > rank(q)
    remaining = {p: set(qs) for p, qs in edges.items()}
    incoming: dict[str, set[str]] = {p: set() for p in nodes}
    for p, qs in edges.items():
        for q in qs:
            incoming[q].add(p)
    rank: dict[str, int] = {}
    ready = sorted(p for p in nodes if not remaining[p])
    while ready:
        nxt: list[str] = []
        for q in ready:
            rank[q] = max((rank[t] + 1 for t in edges[q]), default=0)
            for p in sorted(incoming[q]):
                remaining[p].discard(q)
                if not remaining[p] and p not in rank and p not in nxt:
                    nxt.append(p)
        ready = sorted(nxt)
    if len(rank) == len(nodes):
        return LowerBoundedReport(True, rank, None, None)
    # find a cycle inside the unranked subgraph
    stuck = sorted(p for p in nodes if p not in rank)
    start = stuck[0]
    seen: dict[str, int] = {}
    path: list[str] = []
    cur = start
    while cur not in seen:
        seen[cur] = len(path)
        path.append(cur)
        cur = min(q for q in edges[cur] if q not in rank)
    cycle = tuple(path[seen[cur] :])
    wits = tuple(
        witness[(cycle[i], cycle[(i + 1) % len(cycle)])] for i in range(len(cycle))
    )
    return LowerBoundedReport(False, None, cycle, wits)


def is_upper_bounded_finite(L: FiniteLattice) -> LowerBoundedReport:
    return is_lower_bounded_finite(L.dual())


@dataclass(frozen=True)
class BoundedReport:
    lower: LowerBoundedReport
    upper: LowerBoundedReport

    @property
    def ok(self) -> bool:
        return self.lower.ok and self.upper.ok

    def __bool__(self) -> bool:
        return self.ok


def is_bounded_finite(L: FiniteLattice) -> BoundedReport:
    return BoundedReport(is_lower_bounded_finite(L), is_upper_bounded_finite(L))


# --- antichain conditions ---


@dataclass(frozen=True)
class ConditionReport:
    """Result of an antichain condition check, with the failing pair of
    antichains when the condition does not hold."""

    ok: bool
    witness: tuple[tuple[str, ...], tuple[str, ...]] | None = None

    def __bool__(self) -> bool:
        return self.ok


def check_whitman(L: FiniteLattice, max_size: int = DEFAULT_ENUM_CAP) -> ConditionReport:
    """Whenever a meet lies below a join, some meetand already lies below the
    join or the meet lies below some joinand.  Checked over pairs of nonempty
    antichains; antichains of size one satisfy the condition trivially."""
    _check_enum_cap(L, max_size)
    p_ = L.poset
    down, up = p_._down, p_._up
    s_items = [
        (S, p_._mask_of(S), p_.index(L.meet_set(S)))
        for S in _antichains(L)
        if len(S) >= 2
    ]
    t_items = [
        (T, p_._mask_of(T), p_.index(L.join_set(T)))
        for T in _antichains(L)
        if len(T) >= 2
    ]
    for S, s_mask, m_idx in s_items:
        for T, t_mask, j_idx in t_items:
            if not (down[j_idx] >> p_._pos[m_idx]) & 1:
                continue  # meet not below join
            if s_mask & down[j_idx]:
                continue  # some s below the join
            if t_mask & up[m_idx]:
                continue  # meet below some t
            return ConditionReport(False, (S, T))
    return ConditionReport(True)


def check_dean(
    L: FiniteLattice,
    P: Iterable[str] | None = None,
    max_size: int = DEFAULT_ENUM_CAP,
) -> ConditionReport:
    """Like :func:`check_whitman` with a third escape: some designated
    generator interpolates between the meet and the join.  ``P`` defaults to
    the lattice's generating set and must generate."""
    _check_enum_cap(L, max_size)
    gens = tuple(sorted(set(P))) if P is not None else L.generators
    for g in gens:
        L.poset.index(g)
    if generated_sublattice(L, gens) != set(L.elements):
        raise NotGenerating(f"{gens} does not generate the lattice")
    p_ = L.poset
    down, up = p_._down, p_._up
    p_mask = p_._mask_of(gens)
    s_items = [
        (S, p_._mask_of(S), p_.index(L.meet_set(S)))
        for S in _antichains(L)
        if len(S) >= 2
    ]
    t_items = [
        (T, p_._mask_of(T), p_.index(L.join_set(T)))
        for T in _antichains(L)
        if len(T) >= 2
    ]
    for S, s_mask, m_idx in s_items:
        for T, t_mask, j_idx in t_items:
            if not (down[j_idx] >> p_._pos[m_idx]) & 1:
                continue
            if s_mask & down[j_idx]:
                continue
            if t_mask & up[m_idx]:
                continue
            if up[m_idx] & down[j_idx] & p_mask:
                continue  # interpolating generator
            return ConditionReport(False, (S, T))
    return ConditionReport(True)
