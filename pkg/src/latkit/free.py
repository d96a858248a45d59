"""Word problem and canonical forms in the free lattice on a finite set.

``leq_free`` decides order between terms by the classic recursion: joins on
the left and meets on the right decompose conjunctively, a meet against a
join splits disjunctively, and generators are join and meet prime.  The
recursion is memoised globally; order between two terms does not depend on
the ambient generating set, so the cache is shared by every context.

``canonical_form`` computes the shortest equivalent term.  For a join the
normal form has flattened, sorted, pairwise incomparable children, and no
compound meetand of a child lies below the whole join (dually for meets).
Under those conditions any further redundancy of a child against the join
of the others is impossible, the form is unique per lattice element, and
structural equality of canonical forms coincides with ``eq_free``.  Stage
enumeration exploits that for hash-based deduplication.

All values are immutable; the module-level memo tables only ever gain
entries whose values never change, so concurrent readers are safe under the
interpreter lock.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import CapExceeded, UnknownGenerator
from .terms import (
    Gen,
    Join,
    Meet,
    Term,
    gen,
    generators,
    join_of,
    meet_of,
    sort_key,
    term_size,
)

__all__ = [
    "FreeLattice",
    "StageIndex",
    "leq_free",
    "eq_free",
    "canonical_form",
    "alternation_rank",
    "stage_elements",
    "in_stage",
]


class FreeLattice:
    """Context object naming the generators of a free lattice."""

    __slots__ = ("names", "_name_set")

    def __init__(self, names: Iterable[str]):
        items = tuple(sorted(names))
        if not items:
            raise ValueError("a free lattice needs at least one generator")
        if len(set(items)) != len(items):
            raise ValueError("generator names must be distinct")
        for n in items:
            gen(n)  # validates the name
        self.names = items
        self._name_set = frozenset(items)

    @property
    def generator_terms(self) -> tuple[Gen, ...]:
        return tuple(gen(n) for n in self.names)

    @property
    def top_term(self) -> Term:
        """The join of all generators (the empty meet by convention)."""
        return join_of(self.generator_terms)

    @property
    def bottom_term(self) -> Term:
        """The meet of all generators (the empty join by convention)."""
        return meet_of(self.generator_terms)

    def check_term(self, t: Term) -> None:
        extra = generators(t) - self._name_set
        if extra:
            raise UnknownGenerator(f"unknown generators: {sorted(extra)}")

    def __repr__(self) -> str:
        return f"FreeLattice({', '.join(self.names)})"


_LEQ: dict[tuple[Term, Term], bool] = {}


def _leq(s: Term, t: Term) -> bool:
    key = (s, t)
    hit = _LEQ.get(key)
    if hit is not None:
        return hit
    if isinstance(s, Join):
        r = all(_leq(c, t) for c in s.children)
    elif isinstance(t, Meet):
        r = all(_leq(s, c) for c in t.children)
    elif isinstance(s, Gen):
        if isinstance(t, Gen):
            r = s is t or s.name == t.name
        else:  # t is a join; generators are join prime
            r = any(_leq(s, c) for c in t.children)
    elif isinstance(t, Gen):  # s is a meet; generators are meet prime
        r = any(_leq(c, t) for c in s.children)
    else:  # meet against join: the (W) split
        r = any(_leq(c, t) for c in s.children) or any(_leq(s, c) for c in t.children)
    _LEQ[key] = r
    return r


def leq_free(ctx: FreeLattice, s: Term, t: Term) -> bool:
    """Decide ``s <= t`` in the free lattice on ``ctx``."""
    ctx.check_term(s)
    ctx.check_term(t)
    return _leq(s, t)


def eq_free(ctx: FreeLattice, s: Term, t: Term) -> bool:
    """Two-sided :func:`leq_free`."""
    ctx.check_term(s)
    ctx.check_term(t)
    return _leq(s, t) and _leq(t, s)


_CANON: dict[Term, Term] = {}


def _canon(t: Term) -> Term:
    hit = _CANON.get(t)
    if hit is not None:
        return hit
    if isinstance(t, Gen):
        res = t
    else:
        kids = [_canon(c) for c in t.children]
        if isinstance(t, Meet):
            res = _canon_node(kids, meet_of, Meet, Join)
        else:
            res = _canon_node(kids, join_of, Join, Meet)
    _CANON[t] = res
    _CANON[res] = res
    return res


def _canon_node(kids: list[Term], combine, own: type, other: type) -> Term:
    # For a join node (own=Join): replace a compound meetand child by one of
    # its arguments whenever that argument is below the whole join, then drop
    # children below the join of the rest.  Dual for meets.
    below = _leq if own is Join else (lambda a, b: _leq(b, a))
    while True:
        t = combine(kids)
        if not isinstance(t, own):
            return t  # collapsed to a single child, already canonical
        kids = list(t.children)
        changed = False
        for i, k in enumerate(kids):
            if isinstance(k, other):
                for u in k.children:
                    if below(u, t):
                        kids[i] = u
                        changed = True
                        break
            if changed:
                break
        if changed:
            continue
        for i, k in enumerate(kids):
            rest = kids[:i] + kids[i + 1 :]
            bound = rest[0] if len(rest) == 1 else combine(rest)
            if below(k, bound):
                kids = rest
                changed = True
                break
        if not changed:
            return t


def canonical_form(ctx: FreeLattice, t: Term) -> Term:
    """The canonical (shortest) form of ``t``; unique per lattice element."""
    ctx.check_term(t)
    return _canon(t)


@dataclass(frozen=True, order=False)
class StageIndex:
    """Position in the alternation chain of stage sets: generators sit at
    ``(0, G)``, their meet closure at ``(0, H)``, the following join closure
    at ``(1, G)``, and so on."""

    k: int
    kind: str  # "G" or "H"

    def __post_init__(self):
        if self.kind not in ("G", "H"):
            raise ValueError("kind must be 'G' or 'H'")
        if self.k < 0:
            raise ValueError("stage number must be non-negative")

    @property
    def position(self) -> int:
        return 2 * self.k + (1 if self.kind == "H" else 0)

    def __le__(self, other: "StageIndex") -> bool:
        return self.position <= other.position

    def __repr__(self) -> str:
        return f"StageIndex({self.k}, {self.kind})"


def alternation_rank(ctx: FreeLattice, t: Term) -> StageIndex:
    """Least stage containing ``t``, computed structurally on the canonical
    form: generators are at ``(0, G)``, a meet of stage-``G_k`` terms is at
    ``(k, H)`` and a join of stage-``H_k`` terms is at ``(k+1, G)``."""
    ctx.check_term(t)
    return _rank(_canon(t))


def _rank(t: Term) -> StageIndex:
    if isinstance(t, Gen):
        return StageIndex(0, "G")
    if isinstance(t, Meet):
        # each child is a generator or a join; child of kind (j, G) is in G_j,
        # child of kind (j, H) only enters G at j+1
        k = 0
        for c in t.children:
            r = _rank(c)
            k = max(k, r.k if r.kind == "G" else r.k + 1)
        return StageIndex(k, "H")
    k = 0
    for c in t.children:
        r = _rank(c)  # any (j, *) term is in H_j
        k = max(k, r.k)
    return StageIndex(k + 1, "G")


def in_stage(ctx: FreeLattice, t: Term, idx: StageIndex) -> bool:
    """Membership of ``t`` in the stage *set*, honouring the empty-meet and
    empty-join conventions: the join of all generators belongs to every meet
    closure and the meet of all generators to every join closure."""
    t = canonical_form(ctx, t)
    if _rank(t) <= idx:
        return True
    if idx.kind == "H":
        return t is _canon(ctx.top_term)
    return idx.k >= 1 and t is _canon(ctx.bottom_term)


def stage_elements(
    ctx: FreeLattice, idx: StageIndex, cap: int = 20000
) -> tuple[Term, ...]:
    """All elements of the requested stage set, as canonical terms sorted by
    size then structural order.  Raises :class:`CapExceeded` when the closure
    grows past ``cap`` elements."""
    reps: list[Term] = [_canon(g) for g in ctx.generator_terms]
    pos = 0
    while pos < idx.position:
        if pos % 2 == 0:  # G_k -> H_k, adjoin the empty meet
            reps = _close(reps, meet_of, _canon(ctx.top_term), cap)
        else:  # H_k -> G_{k+1}, adjoin the empty join
            reps = _close(reps, join_of, _canon(ctx.bottom_term), cap)
        pos += 1
    return tuple(sorted(reps, key=lambda t: (term_size(t), sort_key(t))))


def _close(reps: list[Term], combine, extra: Term, cap: int) -> list[Term]:
    out: list[Term] = []
    seen: set[Term] = set()
    for t in list(reps) + [extra]:
        if t not in seen:
            seen.add(t)
            out.append(t)
    if len(out) > cap:
        raise CapExceeded(cap, "stage enumeration")
    i = 0
    while i < len(out):
        for j in range(i + 1):
            t = _canon(combine([out[i], out[j]]))
            if t not in seen:
                if len(out) + 1 > cap:
                    raise CapExceeded(cap, "stage enumeration")
                seen.add(t)
                out.append(t)
        i += 1
    return out
