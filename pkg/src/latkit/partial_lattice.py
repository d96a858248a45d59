"""Finite partial lattices and the word problem for the lattice they
freely generate.

A partial lattice is a finite poset plus partial join/meet tables whose
defined values are genuine suprema/infima in the poset.  ``leq_fp`` decides
order between terms over the partial lattice as the least fixpoint of the
derivation rules below; the computation is a worklist iteration over the
subterm pairs of the query, and settled pairs are cached on the partial
lattice for reuse (truth of a pair never depends on which query introduced
it).

Rules, for terms ``s`` and ``t``:

* joins on the left and meets on the right decompose conjunctively;
* generator against generator is the poset order;
* a generator ``p`` lies below a compound join when it lies below some
  joinand, or some defined join dominating ``p`` has all its arguments
  below the join (dually for meets above a generator);
* a compound meet lies below a compound join when some meetand does, or
  the meet lies below some joinand, or some generator interpolates.

The module also hosts the alternating closure stages of the generated
lattice, the standard homomorphism onto a stage, and the boundedness
decision procedures built on them.

Partial lattices are immutable apart from the append-only answer cache, so
concurrent queries are safe under the interpreter lock; the worklist and
index structures of a single query are call-local.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import (
    CapExceeded,
    InvalidPartialLattice,
    UnknownGenerator,
    UnverifiedPreconditionWarning,
)
from .free import _canon
from .order import (
    ConditionReport,
    FiniteLattice,
    FinitePoset,
    LowerBoundedReport,
    build_lattice,
    generated_sublattice,
    is_lower_bounded_finite,
)
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
    subterms,
    term_size,
    term_to_text,
)

__all__ = [
    "PartialLattice",
    "ClosureStage",
    "FpBoundednessReport",
    "antichain",
    "from_finite_lattice",
    "leq_fp",
    "eq_fp",
    "partial_whitman_check",
    "closure_stage",
    "semilattice_to_lattice",
    "standard_hom_image",
    "is_lower_bounded_fp",
    "is_bounded_fp",
    "is_lower_bounded_sublattice",
]


class PartialLattice:
    """Finite poset with partial join/meet tables.

    ``joins`` and ``meets`` map sorted id tuples (size two or more) to the
    id of their supremum/infimum.  Singletons are implicitly defined and
    equal to themselves; storing them is allowed but they are normalised
    away after validation.
    """

    __slots__ = ("poset", "joins", "meets", "_cache", "_gen_terms", "_joins_by_member",
                 "_meets_by_member")

    def __init__(
        self,
        poset: FinitePoset,
        joins: Mapping[Sequence[str], str] | Iterable[tuple[Sequence[str], str]] = (),
        meets: Mapping[Sequence[str], str] | Iterable[tuple[Sequence[str], str]] = (),
    ):
        self.poset = poset
        self.joins = self._normalise(poset, joins, upper=True)
        self.meets = self._normalise(poset, meets, upper=False)
        self._cache: dict[tuple[Term, Term], bool] = {}
        self._gen_terms = tuple(gen(e) for e in poset.elements)
        jbm: dict[str, list[tuple[tuple[str, ...], str]]] = {}
        for U, w in self.joins.items():
            for q in U:
                jbm.setdefault(q, []).append((U, w))
        mbm: dict[str, list[tuple[tuple[str, ...], str]]] = {}
        for U, w in self.meets.items():
            for q in U:
                mbm.setdefault(q, []).append((U, w))
        self._joins_by_member = jbm
        self._meets_by_member = mbm

    @staticmethod
    def _normalise(poset: FinitePoset, table, upper: bool):
        items = table.items() if isinstance(table, Mapping) else table
        out: dict[tuple[str, ...], str] = {}
        for subset, value in items:
            key = tuple(sorted(set(subset)))
            if not key:
                raise InvalidPartialLattice("empty argument set")
            for e in key + (value,):
                poset.index(e)
            bound = (lambda a, b: poset.leq(a, b)) if upper else (
                lambda a, b: poset.leq(b, a)
            )
            word = "supremum" if upper else "infimum"
            if not all(bound(e, value) for e in key):
                raise InvalidPartialLattice(
                    f"{value!r} is not an upper/lower bound of {key}"
                )
            for other in poset.elements:
                if all(bound(e, other) for e in key) and not bound(value, other):
                    raise InvalidPartialLattice(
                        f"{value!r} is not the {word} of {key} ({other!r} is tighter)"
                    )
            if len(key) == 1:
                continue  # singleton entries carry no information
            if key in out and out[key] != value:
                raise InvalidPartialLattice(f"conflicting values for {key}")
            out[key] = value
        return dict(sorted(out.items()))

    @property
    def elements(self) -> tuple[str, ...]:
        return self.poset.elements

    def check_term(self, t: Term) -> None:
        extra = generators(t) - set(self.poset.elements)
        if extra:
            raise UnknownGenerator(f"unknown generators: {sorted(extra)}")

    def dual(self) -> "PartialLattice":
        return PartialLattice(self.poset.dual(), self.meets, self.joins)

    @property
    def bottom_term(self) -> Term:
        """Least element of the generated lattice: the meet of everything."""
        return meet_of(self._gen_terms)

    @property
    def top_term(self) -> Term:
        return join_of(self._gen_terms)

    def to_dict(self) -> dict:
        return {
            "elements": list(self.elements),
            "covers": [list(c) for c in self.poset.covers],
            "joins": [[list(k), v] for k, v in self.joins.items()],
            "meets": [[list(k), v] for k, v in self.meets.items()],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "PartialLattice":
        poset = FinitePoset(data["elements"], data["covers"])
        joins = [(tuple(k), v) for k, v in data.get("joins", [])]
        meets = [(tuple(k), v) for k, v in data.get("meets", [])]
        return cls(poset, joins, meets)

    def __repr__(self) -> str:
        return (
            f"PartialLattice({len(self.elements)} elements, "
            f"{len(self.joins)} joins, {len(self.meets)} meets)"
        )

    # --- the word problem engine ---

    def _leq(self, s: Term, t: Term) -> bool:
        key = (s, t)
        hit = self._cache.get(key)
        if hit is None:
            self._solve(s, t)
            hit = self._cache[key]
        return hit

    def _solve(self, s: Term, t: Term) -> None:
        cache = self._cache
        universe = sorted(
            subterms(s) | subterms(t) | set(self._gen_terms), key=sort_key
        )
        uset = set(universe)
        parents: dict[Term, list[Term]] = {u: [] for u in universe}
        for u in universe:
            if not isinstance(u, Gen):
                for c in u.children:
                    parents[c].append(u)
        gens = [u for u in universe if isinstance(u, Gen)]
        joins = [u for u in universe if isinstance(u, Join)]
        meets = [u for u in universe if isinstance(u, Meet)]
        poset = self.poset
        up = {g.name: poset._up[poset.index(g.name)] for g in gens}
        down = {g.name: poset._down[poset.index(g.name)] for g in gens}
        bit = {g.name: 1 << poset._pos[poset.index(g.name)] for g in gens}

        true: set[tuple[Term, Term]] = set()

        def holds(a: Term, b: Term) -> bool:
            k = (a, b)
            if k in true:
                return True
            v = cache.get(k)
            return bool(v)

        # gens_below[v]: mask of generators known below join-term v
        # dom_vals[v]: mask of defined-join values whose arguments all sit in
        # gens_below[v]; symmetric tables for meet-terms on the left.
        gens_below: dict[Term, int] = {v: 0 for v in joins}
        dom_vals: dict[Term, int] = {v: 0 for v in joins}
        need_j: dict[Term, dict[tuple[str, ...], int]] = {v: {} for v in joins}
        gens_above: dict[Term, int] = {u: 0 for u in meets}
        dom_vals_m: dict[Term, int] = {u: 0 for u in meets}
        need_m: dict[Term, dict[tuple[str, ...], int]] = {u: {} for u in meets}

        from collections import deque

        queue: deque[tuple[Term, Term]] = deque()
        queued: set[tuple[Term, Term]] = set()

        def schedule(a: Term, b: Term) -> None:
            k = (a, b)
            if k not in queued and k not in true and k not in cache:
                queued.add(k)
                queue.append(k)

        def note_gen_below(q: str, v: Term) -> None:
            if gens_below[v] & bit[q]:
                return
            gens_below[v] |= bit[q]
            tab = need_j[v]
            for U, w in self._joins_by_member.get(q, ()):
                left = tab.get(U)
                if left is None:
                    left = sum(1 for e in U if not gens_below[v] & bit[e]) + 1
                left -= 1
                tab[U] = left
                if left == 0:
                    dom_vals[v] |= bit[w]
            for g in gens:
                schedule(g, v)
            for m in meets:
                schedule(m, v)

        def note_gen_above(q: str, u: Term) -> None:
            if gens_above[u] & bit[q]:
                return
            gens_above[u] |= bit[q]
            tab = need_m[u]
            for U, w in self._meets_by_member.get(q, ()):
                left = tab.get(U)
                if left is None:
                    left = sum(1 for e in U if not gens_above[u] & bit[e]) + 1
                left -= 1
                tab[U] = left
                if left == 0:
                    dom_vals_m[u] |= bit[w]
            for g in gens:
                schedule(u, g)
            for v in joins:
                schedule(u, v)

        def mark(a: Term, b: Term) -> None:
            k = (a, b)
            if k in true:
                return
            true.add(k)
            for pa in parents[a]:
                schedule(pa, b)
            for pb in parents[b]:
                schedule(a, pb)
            if isinstance(a, Gen) and isinstance(b, Join):
                note_gen_below(a.name, b)
            elif isinstance(a, Meet) and isinstance(b, Gen):
                note_gen_above(b.name, a)

        def body(a: Term, b: Term) -> bool:
            if isinstance(a, Join):
                return all(holds(c, b) for c in a.children)
            if isinstance(b, Meet):
                return all(holds(a, c) for c in b.children)
            if isinstance(a, Gen):
                if isinstance(b, Gen):
                    return bool(down[b.name] & bit[a.name])
                # generator below compound join
                if any(holds(a, c) for c in b.children):
                    return True
                return bool(dom_vals[b] & up[a.name])
            if isinstance(b, Gen):
                if any(holds(c, b) for c in a.children):
                    return True
                return bool(dom_vals_m[a] & down[b.name])
            # compound meet below compound join
            if any(holds(c, b) for c in a.children):
                return True
            if any(holds(a, c) for c in b.children):
                return True
            return bool(gens_above[a] & gens_below[b])

        # seed the incremental tables from cached facts, then run to fixpoint
        for v in joins:
            for g in gens:
                if cache.get((g, v)):
                    note_gen_below(g.name, v)
        for u in meets:
            for g in gens:
                if cache.get((u, g)):
                    note_gen_above(g.name, u)
        for a in universe:
            for b in universe:
                schedule(a, b)
        while queue:
            k = queue.popleft()
            queued.discard(k)
            if k in true or k in cache:
                continue
            if body(*k):
                mark(*k)
        for a in universe:
            for b in universe:
                k = (a, b)
                if k not in cache:
                    cache[k] = k in true


def antichain(names: Iterable[str]) -> PartialLattice:
    """Partial lattice with incomparable elements and no defined operations;
    it freely generates the free lattice on ``names``."""
    return PartialLattice(FinitePoset(names, []))


def from_finite_lattice(L: FiniteLattice) -> PartialLattice:
    """Total partial lattice carrying all binary joins and meets of ``L``
    (iterated binary operations reach every finite one)."""
    els = L.elements
    joins = {}
    meets = {}
    for i, a in enumerate(els):
        for b in els[i + 1 :]:
            joins[(a, b)] = L.join(a, b)
            meets[(a, b)] = L.meet(a, b)
    return PartialLattice(L.poset, joins, meets)


def leq_fp(P: PartialLattice, s: Term, t: Term) -> bool:
    """Decide ``s <= t`` in the lattice freely generated by ``P``."""
    P.check_term(s)
    P.check_term(t)
    return P._leq(s, t)


def eq_fp(P: PartialLattice, s: Term, t: Term) -> bool:
    P.check_term(s)
    P.check_term(t)
    return P._leq(s, t) and P._leq(t, s)


def partial_whitman_check(P: PartialLattice) -> ConditionReport:
    """Look for a failure of the meet-below-join condition among the defined
    operations: a defined meet below a defined join with no meetand below the
    join and no joinand above the meet.  No failure here means the generated
    lattice satisfies the condition."""
    poset = P.poset
    for S, m in P.meets.items():
        for T, w in P.joins.items():
            if not poset.leq(m, w):
                continue
            if any(poset.leq(s, w) for s in S):
                continue
            if any(poset.leq(m, t) for t in T):
                continue
            return ConditionReport(False, (S, T))
    return ConditionReport(True)


@dataclass(frozen=True)
class ClosureStage:
    """Representatives of an alternating closure stage of the generated
    lattice, ending with a join closure, together with the precomputed order
    matrix between representatives."""

    partial: PartialLattice
    n: int
    reps: tuple[Term, ...]
    order: tuple[tuple[bool, ...], ...]
    least_index: int

    def leq(self, i: int, j: int) -> bool:
        return self.order[i][j]

    def index_of_equivalent(self, t: Term) -> int | None:
        for i, r in enumerate(self.reps):
            if eq_fp(self.partial, r, t):
                return i
        return None


def closure_stage(P: PartialLattice, n: int, cap: int = 4000) -> ClosureStage:
    """Alternate join and meet closures ``n`` times starting from the
    generators, then close under joins once more.  Every join closure adjoins
    the empty join (the least element); every meet closure adjoins the empty
    meet.  Representatives are deduplicated up to ``eq_fp`` keeping the
    structurally smallest discovered term."""
    if n < 0:
        raise ValueError("stage number must be non-negative")
    reps = [_canon(g) for g in P._gen_terms]
    ops = []
    for _ in range(n):
        ops.extend(("join", "meet"))
    ops.append("join")
    for op in ops:
        extra = P.bottom_term if op == "join" else P.top_term
        combine = join_of if op == "join" else meet_of
        reps = _fp_close(P, reps, combine, _canon(extra), cap)
    reps_sorted = tuple(sorted(reps, key=lambda t: (term_size(t), sort_key(t))))
    order = tuple(
        tuple(leq_fp(P, a, b) for b in reps_sorted) for a in reps_sorted
    )
    least = next(i for i in range(len(reps_sorted)) if all(order[i]))
    return ClosureStage(P, n, reps_sorted, order, least)


def _fp_close(P: PartialLattice, reps: list[Term], combine, extra: Term, cap: int):
    out: list[Term] = []

    def add(t: Term) -> None:
        t = _canon(t)
        for i, r in enumerate(out):
            if eq_fp(P, r, t):
                if (term_size(t), sort_key(t)) < (term_size(r), sort_key(r)):
                    out[i] = t
                return
        if len(out) + 1 > cap:
            raise CapExceeded(cap, "closure stage")
        out.append(t)

    for r in reps:
        add(r)
    add(extra)
    i = 0
    while i < len(out):
        for j in range(i + 1):
            add(combine([out[i], out[j]]))
        i += 1
    return out


def semilattice_to_lattice(stage: ClosureStage) -> FiniteLattice:
    """Equip a join-closed stage with binary infima (the join of all common
    lower bounds within the stage) and return it as a finite lattice whose
    element ids are the printed representatives."""
    ids = [term_to_text(r) for r in stage.reps]
    n = len(ids)
    covers = []
    for i in range(n):
        for j in range(n):
            if i != j and stage.order[i][j] and not stage.order[j][i]:
                if not any(
                    k != i and k != j and stage.order[i][k] and stage.order[k][j]
                    and not stage.order[k][i] and not stage.order[j][k]
                    for k in range(n)
                ):
                    covers.append((ids[i], ids[j]))
    return build_lattice(FinitePoset(ids, covers))


def standard_hom_image(P: PartialLattice, stage: ClosureStage, t: Term) -> Term:
    """Image of ``t`` under the standard homomorphism onto the stage: the
    join, inside the stage, of all representatives below ``t``."""
    P.check_term(t)
    below = [r for r in stage.reps if leq_fp(P, r, t)]
    if not below:
        return stage.reps[stage.least_index]
    joined = join_of(below) if len(below) > 1 else below[0]
    idx = stage.index_of_equivalent(joined)
    if idx is None:
        raise AssertionError("stage is not join closed; closure bug")
    return stage.reps[idx]


@dataclass(frozen=True)
class FpBoundednessReport:
    """Boundedness verdict for a finitely presented lattice, carrying the
    finite stage lattice on which the cycle test ran and that test's
    certificate."""

    ok: bool
    stage_lattice: FiniteLattice
    inner: LowerBoundedReport

    def __bool__(self) -> bool:
        return self.ok


def is_lower_bounded_fp(P: PartialLattice, cap: int = 4000) -> FpBoundednessReport:
    """The generated lattice is lower bounded iff its join-closure stage is a
    lower bounded finite lattice."""
    stage = closure_stage(P, 0, cap)
    lat = semilattice_to_lattice(stage)
    rep = is_lower_bounded_finite(lat)
    return FpBoundednessReport(rep.ok, lat, rep)


def is_bounded_fp(
    P: PartialLattice, cap: int = 4000
) -> tuple[FpBoundednessReport, FpBoundednessReport]:
    """Lower report on ``P`` and lower report on the dual (= upper on ``P``)."""
    return is_lower_bounded_fp(P, cap), is_lower_bounded_fp(P.dual(), cap)


def is_lower_bounded_sublattice(
    P: PartialLattice,
    terms: Sequence[Term],
    n_hint: int = 0,
    cap: int = 4000,
    max_stage: int = 8,
    assume_condition: bool = False,
) -> FpBoundednessReport:
    """Decide lower boundedness of the sublattice of the generated lattice
    spanned by ``terms``.

    Correct when that sublattice satisfies the interpolation condition for
    its generating set; this holds whenever :func:`partial_whitman_check`
    passes, and is otherwise the caller's responsibility (pass
    ``assume_condition=True`` to silence the warning)."""
    if not terms:
        raise ValueError("need at least one generating term")
    for t in terms:
        P.check_term(t)
    if not assume_condition and not partial_whitman_check(P).ok:
        warnings.warn(
            "no certificate that the sublattice satisfies the interpolation "
            "condition; the verdict relies on the caller's assertion",
            UnverifiedPreconditionWarning,
            stacklevel=2,
        )
    for n in range(max(0, n_hint), max_stage + 1):
        stage = closure_stage(P, n, cap)
        idxs = [stage.index_of_equivalent(t) for t in terms]
        if all(i is not None for i in idxs):
            lat = semilattice_to_lattice(stage)
            ids = [term_to_text(stage.reps[i]) for i in idxs]  # type: ignore[index]
            sub = sorted(generated_sublattice(lat, ids))
            # covers rebuilt from scratch: ambient covers may skip through
            # elements outside the sublattice
            sub_covers = []
            for a in sub:
                for b in sub:
                    if a != b and lat.leq(a, b):
                        if not any(
                            c != a and c != b and lat.leq(a, c) and lat.leq(c, b)
                            for c in sub
                        ):
                            sub_covers.append((a, b))
            sublat = build_lattice(FinitePoset(sub, sub_covers))
            rep = is_lower_bounded_finite(sublat)
            return FpBoundednessReport(rep.ok, sublat, rep)
    raise CapExceeded(max_stage, "stage search for the generating terms")
