"""Lattice homomorphisms onto finite targets and the preimage calculus.

For an epimorphism ``g`` and a target element ``d``, ``beta_k(g, d, k)`` is
the least element of the k-th meet-closure stage of the source mapping above
``d`` (``alpha_k`` dually: the greatest stage element mapping below).  With
a finite source the stages are enumerated directly.  With a free source the
values are terms, computed by a target-side recursion: the level-k value is
the previous one met with, for every antichain of target elements that joins
above ``d`` without any member dominating ``d``, the join of the previous
level at those members.  The recursion at one level reads only the previous
level, so a simultaneous fixpoint over all target elements certifies
stabilisation.

On top of the calculus sit fiber products of two epimorphisms, the finite
generating set of a fiber product of bounded epimorphisms, the generation
check for the order variant ``{(a, b) : g(a) <= h(b)}``, and the
certificate construction showing a fiber product over a non-lower-bounded
target is not generated by a given finite pair set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import (
    CapExceeded,
    DeanConditionFails,
    NotAHomomorphism,
    NotLowerBounded,
    NotSurjective,
    SearchExhausted,
    TargetLowerBounded,
    TargetMismatch,
    UnknownElement,
    UnknownGenerator,
)
from .free import FreeLattice, StageIndex, _canon, _leq, in_stage, stage_elements
from .order import (
    FiniteLattice,
    check_dean,
    evaluate_term,
    generated_sublattice,
    is_lower_bounded_finite,
)
from .terms import Term, gen, join_of, meet_of, sort_key, term_size

__all__ = [
    "Hom",
    "PairSet",
    "NonGenerationCertificate",
    "HomBoundednessReport",
    "beta_k",
    "alpha_k",
    "beta_stable",
    "alpha_stable",
    "is_lower_bounded_hom",
    "fiber_product",
    "kernel",
    "sublattice_closure",
    "fiber_generating_set",
    "order_fiber",
    "check_order_fiber_generation",
    "uniform_beta_bound",
    "non_generation_witness",
    "verify_non_generation",
]


class Hom:
    """Homomorphism into a finite lattice, given by generator images.

    The source is either a :class:`FiniteLattice` (images on its designated
    generating set, extended over the whole lattice and checked to preserve
    both operations) or a :class:`FreeLattice` context (images extend
    freely).  ``surjective`` records whether the images generate the target.
    """

    __slots__ = (
        "source",
        "target",
        "images",
        "surjective",
        "_map",
        "_stages",
        "_beta_tables",
        "_alpha_tables",
    )

    def __init__(
        self,
        source: FiniteLattice | FreeLattice,
        target: FiniteLattice,
        images: Mapping[str, str],
    ):
        self.source = source
        self.target = target
        names = source.generators if isinstance(source, FiniteLattice) else source.names
        if set(images) != set(names):
            missing = set(names) - set(images)
            extra = set(images) - set(names)
            raise UnknownGenerator(
                f"images must cover the generators exactly "
                f"(missing {sorted(missing)}, extra {sorted(extra)})"
            )
        for v in images.values():
            target.poset.index(v)
        self.images = {k: images[k] for k in sorted(images)}
        self._stages: list[tuple[frozenset[str], frozenset[str]]] = []
        self._beta_tables: list[dict[str, Term]] = []
        self._alpha_tables: list[dict[str, Term]] = []
        if isinstance(source, FiniteLattice):
            self._map = self._extend_finite()
        else:
            self._map = None
        image_seed = sorted(set(self.images.values()))
        self.surjective = generated_sublattice(target, image_seed) == set(
            target.elements
        )

    def _extend_finite(self) -> dict[str, str]:
        src: FiniteLattice = self.source  # type: ignore[assignment]
        m: dict[str, str] = dict(self.images)
        frontier = sorted(m)
        while frontier:
            new: list[str] = []
            known = sorted(m)
            for a in frontier:
                for b in known:
                    for e, img in (
                        (src.meet(a, b), self.target.meet(m[a], m[b])),
                        (src.join(a, b), self.target.join(m[a], m[b])),
                    ):
                        prev = m.get(e)
                        if prev is None:
                            m[e] = img
                            new.append(e)
                        elif prev != img:
                            raise NotAHomomorphism(
                                f"conflicting images for {e!r}: {prev!r} vs {img!r}"
                            )
            frontier = new
        # generators generate the source, so the extension is total
        for a in src.elements:
            for b in src.elements:
                if m[src.meet(a, b)] != self.target.meet(m[a], m[b]):
                    raise NotAHomomorphism(f"meet not preserved at ({a!r}, {b!r})")
                if m[src.join(a, b)] != self.target.join(m[a], m[b]):
                    raise NotAHomomorphism(f"join not preserved at ({a!r}, {b!r})")
        return m

    @property
    def free_source(self) -> bool:
        return isinstance(self.source, FreeLattice)

    def apply(self, x: Term | str) -> str:
        """Image of a source element (finite source) or of a term."""
        if isinstance(x, Term):
            if self.free_source:
                self.source.check_term(x)  # type: ignore[union-attr]
            return evaluate_term(self.target, self.images, x)
        if self._map is None:
            raise UnknownElement("free source: apply expects a term")
        try:
            return self._map[x]
        except KeyError:
            raise UnknownElement(f"unknown source element {x!r}") from None

    def preimage(self, d: str) -> tuple[str, ...]:
        if self._map is None:
            raise UnknownElement("free source: preimages are not enumerable")
        self.target.poset.index(d)
        return tuple(e for e in self.source.elements if self._map[e] == d)  # type: ignore[union-attr]

    # --- finite-source stage sets over the designated generators ---

    def _stage(self, k: int) -> tuple[frozenset[str], frozenset[str]]:
        """(G_k, H_k) of the finite source; G_0 is the generating set, each
        H is the meet closure with the empty meet (top), each next G the join
        closure with the empty join (bottom)."""
        src: FiniteLattice = self.source  # type: ignore[assignment]
        while len(self._stages) <= k:
            if not self._stages:
                g = frozenset(src.generators)
            else:
                h_prev = self._stages[-1][1]
                g = _finite_closure(src, h_prev | {src.bottom}, src.join)
            h = _finite_closure(src, g | {src.top}, src.meet)
            self._stages.append((g, h))
        return self._stages[k]

    def __repr__(self) -> str:
        kind = "free" if self.free_source else "finite"
        return f"Hom({kind} source -> {len(self.target)}-element target)"


def _finite_closure(L: FiniteLattice, seed: Iterable[str], op) -> frozenset[str]:
    out = sorted(set(seed))
    seen = set(out)
    i = 0
    while i < len(out):
        for j in range(i + 1):
            c = op(out[i], out[j])
            if c not in seen:
                seen.add(c)
                out.append(c)
        i += 1
    return frozenset(seen)


def _require_same_target(g: Hom, h: Hom) -> None:
    if g.target != h.target:
        raise TargetMismatch("homomorphisms do not share a target")


def _require_finite(g: Hom) -> FiniteLattice:
    if g.free_source:
        raise UnknownElement("operation needs a finite source")
    return g.source  # type: ignore[return-value]


# --- the alpha/beta calculus ---


def beta_k(g: Hom, d: str, k: int) -> Term | str:
    """Least element of stage ``H_k`` of the source mapping >= ``d``."""
    g.target.poset.index(d)
    if k < 0:
        raise ValueError("stage must be non-negative")
    if not g.free_source:
        src: FiniteLattice = g.source  # type: ignore[assignment]
        _, h = g._stage(k)
        cands = [w for w in h if g.target.leq(d, g.apply(w))]
        return src.meet_set(cands)  # top is in every H_k, so never empty
    _free_tables(g, k)
    return g._beta_tables[k][d]


def alpha_k(g: Hom, d: str, k: int) -> Term | str:
    """Greatest element of stage ``G_k`` of the source mapping <= ``d``.
    At ``k = 0`` the join may fall outside the stage itself."""
    g.target.poset.index(d)
    if k < 0:
        raise ValueError("stage must be non-negative")
    if not g.free_source:
        src: FiniteLattice = g.source  # type: ignore[assignment]
        gk, _ = g._stage(k)
        cands = [w for w in gk if g.target.leq(g.apply(w), d)]
        return src.join_set(cands)
    _free_tables(g, k)
    return g._alpha_tables[k][d]


def _free_tables(g: Hom, k: int) -> None:
    """Fill the term-valued beta/alpha tables of a free-source hom up to
    level ``k``."""
    ctx: FreeLattice = g.source  # type: ignore[assignment]
    D = g.target
    while len(g._beta_tables) <= k:
        if not g._beta_tables:
            beta0: dict[str, Term] = {}
            alpha0: dict[str, Term] = {}
            for d in D.elements:
                over = [gen(x) for x in ctx.names if D.leq(d, g.images[x])]
                beta0[d] = _canon(meet_of(over) if over else ctx.top_term)
                under = [gen(x) for x in ctx.names if D.leq(g.images[x], d)]
                alpha0[d] = _canon(join_of(under) if under else ctx.bottom_term)
            g._beta_tables.append(beta0)
            g._alpha_tables.append(alpha0)
            continue
        prev_b = g._beta_tables[-1]
        prev_a = g._alpha_tables[-1]
        nxt_b: dict[str, Term] = {}
        nxt_a: dict[str, Term] = {}
        up_antichains = list(_target_antichains(D))
        for d in D.elements:
            meetands = [prev_b[d]]
            joinands = [prev_a[d]]
            for E in up_antichains:
                if D.leq(d, D.join_set(E)) and not any(D.leq(d, e) for e in E):
                    inner = [prev_b[e] for e in E]
                    meetands.append(
                        join_of(inner) if len(inner) > 1 else
                        (inner[0] if inner else ctx.bottom_term)
                    )
                if D.leq(D.meet_set(E), d) and not any(D.leq(e, d) for e in E):
                    inner = [prev_a[e] for e in E]
                    joinands.append(
                        meet_of(inner) if len(inner) > 1 else
                        (inner[0] if inner else ctx.top_term)
                    )
            nxt_b[d] = _canon(meet_of(meetands) if len(meetands) > 1 else meetands[0])
            nxt_a[d] = _canon(join_of(joinands) if len(joinands) > 1 else joinands[0])
        g._beta_tables.append(nxt_b)
        g._alpha_tables.append(nxt_a)


def _target_antichains(D: FiniteLattice) -> Iterable[tuple[str, ...]]:
    els = list(D.elements)
    n = len(els)

    def rec(i: int, chosen: tuple[str, ...]):
        yield chosen
        for j in range(i, n):
            c = els[j]
            if all(not D.leq(c, x) and not D.leq(x, c) for x in chosen):
                yield from rec(j + 1, chosen + (c,))

    yield from rec(0, ())


def _beta_fixpoint(g: Hom, k_cap: int, size_cap: int | None = None) -> int | None:
    """Iterate the free-source tables until two consecutive levels agree on
    every target element.  Returns the first stable level, or None when the
    cap (level or term size) is hit first."""
    for k in range(k_cap):
        _free_tables(g, k + 1)
        cur, nxt = g._beta_tables[k], g._beta_tables[k + 1]
        if all(cur[d] is nxt[d] for d in g.target.elements):
            return k
        if size_cap is not None and any(
            term_size(nxt[d]) > size_cap for d in g.target.elements
        ):
            return None
    return None


def beta_stable(g: Hom, d: str, k_cap: int = 64) -> tuple[Term | str, int]:
    """Stabilised least preimage of ``d`` with the witnessing level.

    Finite source: the minimum of the preimage, found by direct scan.  Free
    source: requires a surjective hom onto a target passing the finite
    lower-boundedness test, which guarantees the level iteration reaches a
    simultaneous fixpoint."""
    g.target.poset.index(d)
    if not g.surjective:
        raise NotSurjective("stabilised preimages need an epimorphism")
    if not g.free_source:
        pre = g.preimage(d)
        src: FiniteLattice = g.source  # type: ignore[assignment]
        value = src.meet_set(pre)
        for k in range(k_cap):
            if beta_k(g, d, k) == value:
                return value, k
        raise CapExceeded(k_cap, "finite beta stabilisation")
    if not is_lower_bounded_finite(g.target).ok:
        raise NotLowerBounded("target fails the lower-boundedness test")
    k = _beta_fixpoint(g, k_cap)
    if k is None:
        raise CapExceeded(k_cap, "beta stabilisation")
    return g._beta_tables[k][d], k


def alpha_stable(g: Hom, d: str, k_cap: int = 64) -> tuple[Term | str, int]:
    """Greatest preimage of ``d`` with the witnessing level (dual of
    :func:`beta_stable`)."""
    g.target.poset.index(d)
    if not g.surjective:
        raise NotSurjective("stabilised preimages need an epimorphism")
    if not g.free_source:
        pre = g.preimage(d)
        src: FiniteLattice = g.source  # type: ignore[assignment]
        value = src.join_set(pre)
        for k in range(k_cap):
            if alpha_k(g, d, k) == value:
                return value, k
        raise CapExceeded(k_cap, "finite alpha stabilisation")
    if not is_lower_bounded_finite(g.target.dual()).ok:
        raise NotLowerBounded("dual target fails the lower-boundedness test")
    k = _alpha_fixpoint(g, k_cap)
    if k is None:
        raise CapExceeded(k_cap, "alpha stabilisation")
    return g._alpha_tables[k][d], k


def _alpha_fixpoint(g: Hom, k_cap: int) -> int | None:
    for k in range(k_cap):
        _free_tables(g, k + 1)
        cur, nxt = g._alpha_tables[k], g._alpha_tables[k + 1]
        if all(cur[d] is nxt[d] for d in g.target.elements):
            return k
    return None


@dataclass(frozen=True)
class HomBoundednessReport:
    """Verdict on lower boundedness of a hom, with the two routes the
    equivalence offers: stabilisation over every target element, and
    existence of least preimages for the target's generators only."""

    lower_bounded: bool
    all_elements_check: bool
    generator_check: bool
    stable_level: int | None

    def __bool__(self) -> bool:
        return self.lower_bounded


def is_lower_bounded_hom(g: Hom, k_cap: int = 64) -> HomBoundednessReport:
    """Decide lower boundedness of ``g``.  Requires surjectivity and the
    interpolation condition on the target for its generating set (that
    hypothesis makes the generator-only route sound)."""
    if not g.surjective:
        raise NotSurjective("boundedness analysis needs an epimorphism")
    dean = check_dean(g.target, g.target.generators)
    if not dean.ok:
        raise DeanConditionFails(
            f"target fails the interpolation condition, witness {dean.witness}"
        )
    if not g.free_source:
        return HomBoundednessReport(True, True, True, 0)
    if is_lower_bounded_finite(g.target).ok:
        k = _beta_fixpoint(g, k_cap)
        if k is None:
            raise CapExceeded(k_cap, "beta stabilisation")
        for p in g.target.generators:
            assert g.apply(g._beta_tables[k][p]) == p
        return HomBoundednessReport(True, True, True, k)
    return HomBoundednessReport(False, False, False, None)


# --- pair sets and fiber products ---


@dataclass(frozen=True)
class PairSet:
    """Finite set of pairs, each taken from a product of two lattices (ids)
    or of two free lattices (terms)."""

    pairs: frozenset[tuple]

    def __iter__(self):
        return iter(sorted(self.pairs, key=_pair_key))

    def __len__(self) -> int:
        return len(self.pairs)

    def __contains__(self, p) -> bool:
        return tuple(p) in self.pairs

    def __or__(self, other: "PairSet") -> "PairSet":
        return PairSet(self.pairs | other.pairs)

    @classmethod
    def of(cls, items: Iterable[Sequence]) -> "PairSet":
        return cls(frozenset((a, b) for a, b in items))


def _pair_key(p):
    a, b = p
    ka = sort_key(a) if isinstance(a, Term) else a
    kb = sort_key(b) if isinstance(b, Term) else b
    return (ka, kb)


def fiber_product(g: Hom, h: Hom) -> PairSet:
    """All pairs ``(a, b)`` of source elements with ``g(a) = h(b)``.  Needs
    finite sources and a common target."""
    A = _require_finite(g)
    B = _require_finite(h)
    _require_same_target(g, h)
    return PairSet.of(
        (a, b) for a in A.elements for b in B.elements if g.apply(a) == h.apply(b)
    )


def kernel(g: Hom) -> PairSet:
    return fiber_product(g, g)


def order_fiber(g: Hom, h: Hom) -> PairSet:
    """All pairs with ``g(a) <= h(b)``."""
    A = _require_finite(g)
    B = _require_finite(h)
    _require_same_target(g, h)
    return PairSet.of(
        (a, b)
        for a in A.elements
        for b in B.elements
        if g.target.leq(g.apply(a), h.apply(b))
    )


def sublattice_closure(
    A: FiniteLattice, B: FiniteLattice, pairs: Iterable[Sequence[str]], cap: int = 100000
) -> PairSet:
    """Least subset of ``A x B`` containing ``pairs`` and closed under
    componentwise meet and join; worklist in lexicographic pair order."""
    out = sorted({(a, b) for a, b in pairs})
    for a, b in out:
        A.poset.index(a)
        B.poset.index(b)
    seen = set(out)
    i = 0
    while i < len(out):
        a1, b1 = out[i]
        for j in range(i + 1):
            a2, b2 = out[j]
            for c in (
                (A.meet(a1, a2), B.meet(b1, b2)),
                (A.join(a1, a2), B.join(b1, b2)),
            ):
                if c not in seen:
                    if len(out) + 1 > cap:
                        raise CapExceeded(cap, "pair closure")
                    seen.add(c)
                    out.append(c)
        i += 1
    return PairSet.of(out)


def fiber_generating_set(g: Hom, h: Hom) -> PairSet:
    """Finite generating set of the fiber product of two bounded
    epimorphisms with finite sources.

    Built from the stable preimage maps: pair each source generator with the
    greatest (resp. least) preimage of its image under the other hom, and
    pair greatest against least preimages over the images of both generator
    sets and the target's generators.  The source generating sets are first
    enlarged until they contain the projections of the produced set."""
    A = _require_finite(g)
    B = _require_finite(h)
    _require_same_target(g, h)
    if not (g.surjective and h.surjective):
        raise NotSurjective("fiber generating set needs epimorphisms")
    dean = check_dean(g.target, g.target.generators)
    if not dean.ok:
        raise DeanConditionFails(
            f"target fails the interpolation condition, witness {dean.witness}"
        )

    def beta(f: Hom, d: str) -> str:
        src: FiniteLattice = f.source  # type: ignore[assignment]
        return src.meet_set(f.preimage(d))

    def alpha(f: Hom, d: str) -> str:
        src: FiniteLattice = f.source  # type: ignore[assignment]
        return src.join_set(f.preimage(d))

    X = set(A.generators)
    Y = set(B.generators)
    while True:
        E = sorted(
            {g.apply(x) for x in X}
            | {h.apply(y) for y in Y}
            | set(g.target.generators)
        )
        pairs: set[tuple[str, str]] = set()
        for x in sorted(X):
            pairs.add((x, alpha(h, g.apply(x))))
        for y in sorted(Y):
            pairs.add((beta(g, h.apply(y)), y))
        for d in E:
            pairs.add((alpha(g, d), beta(h, d)))
            pairs.add((beta(g, d), alpha(h, d)))
        nx = X | {a for a, _ in pairs}
        ny = Y | {b for _, b in pairs}
        if nx == X and ny == Y:
            return PairSet.of(pairs)
        X, Y = nx, ny


def check_order_fiber_generation(g: Hom, h: Hom, cap: int = 100000) -> bool:
    """The order variant ``{(a, b) : g(a) <= h(b)}`` is generated by the
    fiber generating set plus the pair (source bottom, other source top)."""
    A = _require_finite(g)
    B = _require_finite(h)
    z = fiber_generating_set(g, h)
    seeded = z | PairSet.of([(A.bottom, B.top)])
    closed = sublattice_closure(A, B, seeded, cap)
    return closed.pairs == order_fiber(g, h).pairs


# --- non-generation certificates over free sources ---


def uniform_beta_bound(pairs: Iterable[Sequence[Term]], g: Hom, h: Hom, cap: int = 64) -> int:
    """Least level ``N`` such that every listed fiber pair ``(a, b)``
    satisfies ``b >= beta_{h,N}(g(a))``.  Existence is guaranteed for pairs
    of the fiber product; the cap only guards against misuse."""
    if not (g.free_source and h.free_source):
        raise UnknownElement("uniform bound needs free sources")
    _require_same_target(g, h)
    best = 0
    for a, b in pairs:
        d = g.apply(a)
        if h.apply(b) != d:
            raise ValueError(f"pair is not in the fiber product: {(a, b)}")
        for m in range(cap + 1):
            if _leq(_as_term(beta_k(h, d, m)), b):
                best = max(best, m)
                break
        else:
            raise CapExceeded(cap, "uniform beta bound")
    return best


def _as_term(x: Term | str) -> Term:
    assert isinstance(x, Term)
    return x


@dataclass(frozen=True)
class NonGenerationCertificate:
    """A fiber pair outside the sublattice generated by the examined pair
    set.  ``a`` sits in meet-stage ``k`` over the first source, ``d`` is the
    common image, and ``b`` is a preimage of ``d`` strictly below the level
    ``k + n_bound`` beta value (``bound_term``), which every generated pair
    above ``a`` must dominate."""

    a: Term
    b: Term
    d: str
    k: int
    n_bound: int
    bound_term: Term


def non_generation_witness(
    g: Hom,
    h: Hom,
    pairs: Iterable[Sequence[Term]] = (),
    depth_cap: int = 12,
    stage_cap: int = 20000,
) -> NonGenerationCertificate:
    """Produce a fiber pair provably outside the sublattice generated by
    ``pairs``, for free sources onto a common finite target that fails the
    lower-boundedness test.

    Candidate images ``d`` are tried in lexicographic order; for each, the
    smallest meet-stage of the first source containing a preimage of ``d``
    is located by staged enumeration, and the beta chain at ``d`` is walked
    until it drops strictly below its value at the certified level."""
    if not (g.free_source and h.free_source):
        raise UnknownElement("witness construction needs free sources")
    _require_same_target(g, h)
    if not (g.surjective and h.surjective):
        raise NotSurjective("witness construction needs epimorphisms")
    if is_lower_bounded_finite(g.target).ok:
        raise TargetLowerBounded("target passes the lower-boundedness test")
    zs = list(pairs)
    n_bound = uniform_beta_bound(zs, g, h) if zs else 0
    ctx_a: FreeLattice = g.source  # type: ignore[assignment]
    anchors: list[tuple[str, int, Term]] = []
    for d in g.target.elements:
        for k in range(depth_cap + 1):
            try:
                stage = stage_elements(ctx_a, StageIndex(k, "H"), stage_cap)
            except CapExceeded:
                break  # deeper stages are out of reach; try other images
            hit = next((w for w in stage if g.apply(w) == d), None)
            if hit is not None:
                anchors.append((d, k, hit))
                break
    # iterative deepening keeps the beta tables shallow when an early
    # candidate merely plateaus while another drops immediately
    windows = sorted({w for w in (2, 4, 8) if w < depth_cap} | {depth_cap})
    for window in windows:
        for d, k, a in anchors:
            base = _as_term(beta_k(h, d, k + n_bound))
            for m in range(k + n_bound + 1, k + n_bound + 1 + window):
                b = _as_term(beta_k(h, d, m))
                if term_size(b) > 50000:
                    break  # runaway growth without reaching a preimage of d
                if b is base or _leq(base, b):
                    continue  # no strict decrease yet
                if h.apply(b) != d:
                    continue
                return NonGenerationCertificate(a, b, d, k, n_bound, base)
    raise SearchExhausted("no strictly decreasing beta value within the depth cap")


def verify_non_generation(
    g: Hom, h: Hom, cert: NonGenerationCertificate, pairs: Iterable[Sequence[Term]] = ()
) -> bool:
    """Re-check a certificate from its definition: common image, stage
    membership, bound recomputation and the strict drop."""
    ctx_a: FreeLattice = g.source  # type: ignore[assignment]
    if g.apply(cert.a) != cert.d or h.apply(cert.b) != cert.d:
        return False
    if not in_stage(ctx_a, cert.a, StageIndex(cert.k, "H")):
        return False
    zs = list(pairs)
    if zs and cert.n_bound < uniform_beta_bound(zs, g, h):
        return False
    bound = _as_term(beta_k(h, cert.d, cert.k + cert.n_bound))
    if not (_leq(bound, _as_term(_canon(cert.bound_term))) and _leq(_as_term(_canon(cert.bound_term)), bound)):
        return False
    b = _canon(cert.b)
    return _leq(b, bound) and not _leq(bound, b)
