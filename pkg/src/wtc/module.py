"""Exact presentations of total Witt groups and the lax module structure.

The engine never computes Witt groups from geometry.  A presentation is
trusted input: graded pieces indexed by a degree mod 4 and a twist class,
one chosen representative bundle per class, action tables over the base
ring, automorphism data for 2-torsion square roots, and registered maps
(extension of support, restriction, connecting map, pullback, pushforward)
given as exact matrices.  Everything is validated against the stated
axioms at load time.

A class of a Witt group at an arbitrary twist L is represented by piece
coordinates at the representative together with a *transport*: an
alignment class from the representative to L.  Two representations denote
the same class iff the automorphism action of the transport discrepancy
matches the coordinates; that question is decidable because automorphism
alignments act through stored data (2-torsion tables and unit classes
routed through the base).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .abelian import (
    FgAbGroup,
    GroupHom,
    canonical_sqrt,
    mod2_reduction,
    solve_linear,
    two_torsion,
)
from . import f2
from .align import AlignmentClass, KAlignmentClass, compose, invert
from .errors import (
    DegreeMismatch,
    MissingAutAction,
    MissingMap,
    ScopeError,
    TypeMismatch,
    ValidationError,
)
from .schemes import LineBundle, structure_morphism


def _matrix_columns_apply(cols, el, target_piece):
    acc = [0] * target_piece.rank
    for c, col in zip(el.coords, cols):
        acc = [a + c * x for a, x in zip(acc, col)]
    return target_piece.element(acc)


# ---------------------------------------------------------------------------
# shared piece store


class PieceStore:
    """Common machinery of the base ring and of module presentations:
    graded pieces, representatives, class keys and automorphism actions."""

    def __init__(self, name, scheme, pieces, representatives):
        self.name = name
        self.scheme = scheme
        self.class_space, self._class_reduce = self._make_class_data()
        self.pieces = {}
        for (deg, key), grp in pieces.items():
            self.pieces[(deg % 4, tuple(key))] = grp
        self.representatives = {tuple(k): v for k, v in representatives.items()}
        self.scope = tuple(sorted(self.representatives))
        for key, rep in self.representatives.items():
            if self.class_of(rep) != key:
                raise ValidationError(
                    "representative_class",
                    f"{self.name}: representative of {key} lies in class "
                    f"{self.class_of(rep)}",
                    witness=(key, rep),
                )
        for (deg, key) in self.pieces:
            if key not in self.representatives:
                raise ValidationError(
                    "piece_scope",
                    f"{self.name}: piece ({deg},{key}) has no representative",
                    witness=key,
                )
        self._zero_group = FgAbGroup.trivial()

    def _make_class_data(self):
        raise NotImplementedError

    def class_of(self, el):
        return self._class_reduce(el)

    def in_scope(self, key):
        return tuple(key) in self.representatives

    def rep(self, key):
        try:
            return self.representatives[tuple(key)]
        except KeyError:
            raise ScopeError(
                f"{self.name}: class {key} outside the declared scope"
            ) from None

    def rep_bundle(self, key):
        return LineBundle(self.scheme, self.rep(key))

    def piece(self, deg, key):
        return self.pieces.get((deg % 4, tuple(key)), self._zero_group)

    def piece_keys(self):
        return sorted(self.pieces)

    # -- representation -----------------------------------------------------

    def canonical_transport(self, key, twist):
        """Alignment rep(key) ⇝ twist with the canonical square root, unit 1."""
        rep = self.rep(key)
        if self.class_of(twist) != tuple(key):
            raise ScopeError(
                f"{self.name}: twist lies in class {self.class_of(twist)}, not {key}"
            )
        m = canonical_sqrt(self.scheme.pic, twist - rep)
        if m is None:
            raise ScopeError(
                f"{self.name}: twist is not a square away from the representative "
                f"of {key}; the class is not representable in this presentation"
            )
        return AlignmentClass(
            LineBundle(self.scheme, rep),
            LineBundle(self.scheme, twist),
            m,
            self.scheme.units.zero(),
        )

    def element(self, degree, key, coords, twist=None, transport=None):
        key = tuple(key)
        piece = self.piece(degree, key)
        el = coords if hasattr(coords, "coords") else piece.element(coords)
        if el.group is not piece:
            raise TypeMismatch("coordinates not in the requested piece")
        if twist is None:
            twist = self.rep(key)
        if transport is None:
            transport = self.canonical_transport(key, twist)
        return RepresentedClass(self, degree, key, el, twist, transport)

    def zero_element(self, degree, key, twist=None):
        piece = self.piece(degree, key)
        return self.element(degree, key, piece.zero(), twist)

    # -- automorphism action -------------------------------------------------

    def _aut_torsion_data(self):
        raise NotImplementedError

    def _unit_route(self, u):
        """Ring element implementing the unit action, or raise."""
        raise NotImplementedError

    def apply_automorphism(self, align, el):
        """Apply the automorphism alignment ``align`` (rep ⇝ rep) to piece
        coordinates ``el`` in a given (degree, key) piece."""
        degree, key, coords = el
        piece = self.piece(degree, key)
        if coords.group is not piece:
            raise TypeMismatch("coordinates outside the piece")
        t = align.m
        if not (2 * t).is_zero():
            raise TypeMismatch("not an automorphism alignment: m is not 2-torsion")
        out = coords
        tor, tor_incl, tables = self._aut_torsion_data()
        if not t.is_zero():
            sol = solve_linear(
                GroupHom(
                    tor,
                    self.scheme.pic,
                    [tor_incl.apply(g).coords for g in tor.generators()],
                    check=False,
                ),
                t,
            )
            if sol is None:
                raise TypeMismatch("2-torsion class not in the torsion subgroup")
            for i, c in enumerate(sol[0].coords):
                if c % 2 == 0:
                    continue
                table = tables.get(i)
                if table is None:
                    raise MissingAutAction(
                        f"{self.name}: no automorphism data for 2-torsion generator {i}"
                    )
                cols = table.get((degree % 4, key))
                if cols is None:
                    raise MissingAutAction(
                        f"{self.name}: 2-torsion automorphism has no block at "
                        f"({degree % 4},{key})"
                    )
                out = _matrix_columns_apply(cols, out, piece)
        if any(align.u):
            rho = self._unit_route(align.u)
            out = self._ring_multiply_on(rho, (degree, key, out))
        return out

    def _ring_multiply_on(self, rho, el):
        raise NotImplementedError


@dataclass(frozen=True)
class RepresentedClass:
    parent: PieceStore
    degree: int
    key: tuple
    coords: object  # GroupElement of the piece
    twist: object  # GroupElement of the scheme's Picard group
    transport: AlignmentClass  # rep(key) ⇝ twist

    def __post_init__(self):
        if self.transport.source.cls != self.parent.rep(self.key):
            raise TypeMismatch("transport does not start at the representative")
        if self.transport.target.cls != self.twist:
            raise TypeMismatch("transport does not end at the actual twist")

    def piece_group(self):
        return self.parent.piece(self.degree, self.key)

    def is_zero(self):
        return self.coords.is_zero()

    def __repr__(self):
        return (
            f"[{self.parent.name}: deg {self.degree}, class {self.key}, "
            f"{self.coords!r} @ twist {tuple(self.twist.coords)}]"
        )


def transport(w, b):
    """Move a represented class along an alignment of its actual twist."""
    if b.scheme is not w.parent.scheme:
        raise TypeMismatch("alignment on the wrong scheme")
    if b.source.cls != w.twist:
        raise TypeMismatch("alignment does not start at the class's twist")
    return RepresentedClass(
        w.parent, w.degree, w.key, w.coords, b.target.cls, compose(b, w.transport)
    )


def compare_classes(w1, w2):
    """Decide equality of two represented classes with the same indices."""
    if w1.parent is not w2.parent:
        raise TypeMismatch("classes in different presentations")
    if w1.key != w2.key or (w1.degree - w2.degree) % 4 != 0:
        raise TypeMismatch("piece indices differ")
    if w1.twist != w2.twist:
        raise TypeMismatch("twists differ; transport before comparing")
    disc = compose(invert(w2.transport), w1.transport)
    moved = w1.parent.apply_automorphism(disc, (w1.degree, w1.key, w1.coords))
    return moved == w2.coords


def to_canonical(w):
    """Rewrite a represented class over the canonical transport."""
    s = w.parent.canonical_transport(w.key, w.twist)
    disc = compose(invert(s), w.transport)
    coords = w.parent.apply_automorphism(disc, (w.degree, w.key, w.coords))
    return RepresentedClass(w.parent, w.degree, w.key, coords, w.twist, s)


# ---------------------------------------------------------------------------
# the base ring


class BaseWittRing(PieceStore):
    """Graded pieces of the total Witt ring of the base, with product
    tables, the unit, unit classes of units modulo squares, and optional
    2-torsion automorphism data."""

    def __init__(
        self,
        name,
        scheme,
        pieces,
        representatives,
        unit_coords,
        products=None,
        unit_class=None,
        aut_torsion=None,
    ):
        super().__init__(name, scheme, pieces, representatives)
        zero_key = self.class_of(scheme.pic.zero())
        if zero_key not in self.representatives:
            raise ValidationError(
                "ring_unit_piece", f"{name}: no representative for the trivial class"
            )
        if not self.rep(zero_key).is_zero():
            raise ValidationError(
                "ring_unit_piece",
                f"{name}: the trivial class must be represented by the trivial bundle",
            )
        self.zero_key = zero_key
        self.unit = self.piece(0, zero_key).element(unit_coords)
        # products[((d1,k1),(d2,k2))] = (table, transport (m,u) on the base)
        self.products = {}
        for key, value in (products or {}).items():
            (d1, k1), (d2, k2) = key
            table, tr = value
            self.products[((d1 % 4, tuple(k1)), (d2 % 4, tuple(k2)))] = (
                table,
                self._product_transport(tuple(k1), tuple(k2), tr),
            )
        self.unit_class_map = {}
        for label, coords in (unit_class or {}).items():
            if label not in scheme.units.labels:
                raise ValidationError(
                    "unit_class", f"{name}: unknown unit label {label!r}"
                )
            self.unit_class_map[label] = self.piece(0, zero_key).element(coords)
        self.aut_tables = dict(aut_torsion or {})
        self._validate_ring()

    def _make_class_data(self):
        space, red = mod2_reduction(self.scheme.pic)
        return space, red

    def _product_transport(self, k1, k2, tr):
        src = self.rep(k1) + self.rep(k2)
        k12 = self.class_of(src)
        tgt = self.rep(k12)
        if tr is None:
            m = canonical_sqrt(self.scheme.pic, tgt - src)
            u = self.scheme.units.zero()
        else:
            m = self.scheme.pic.element(tr[0])
            u = tr[1]
        return AlignmentClass(
            LineBundle(self.scheme, src), LineBundle(self.scheme, tgt), m, u
        )

    # -- products -------------------------------------------------------------

    def product_table(self, d1, k1, d2, k2):
        entry = self.products.get(((d1 % 4, tuple(k1)), (d2 % 4, tuple(k2))))
        if entry is None:
            p1 = self.piece(d1, k1)
            p2 = self.piece(d2, k2)
            if p1.is_trivial() or p2.is_trivial():
                return None
            raise ValidationError(
                "product_table",
                f"{self.name}: missing product table for "
                f"(({d1},{k1}),({d2},{k2}))",
            )
        return entry

    def multiply_coords(self, d1, k1, x, d2, k2, y):
        """Coordinates of the product of piece coordinates; implicit zero."""
        k1, k2 = tuple(k1), tuple(k2)
        k12 = self.class_of(self.rep(k1) + self.rep(k2))
        target = self.piece(d1 + d2, k12)
        entry = self.product_table(d1, k1, d2, k2)
        if entry is None or target.is_trivial():
            return target.zero(), k12
        table, _tr = entry
        acc = [0] * target.rank
        for a, xa in enumerate(x.coords):
            if xa == 0:
                continue
            for b, yb in enumerate(y.coords):
                if yb == 0:
                    continue
                acc = [s + xa * yb * t for s, t in zip(acc, table[a][b])]
        return target.element(acc), k12

    def multiply(self, e1, e2):
        """Product of two ring classes as represented classes."""
        if e1.parent is not self or e2.parent is not self:
            raise TypeMismatch("ring multiply needs two classes of this ring")
        coords, k12 = self.multiply_coords(
            e1.degree, e1.key, e1.coords, e2.degree, e2.key, e2.coords
        )
        entry = self.product_table(e1.degree, e1.key, e2.degree, e2.key)
        tr = (
            entry[1]
            if entry is not None
            else self._product_transport(e1.key, e2.key, None)
        )
        # transports of the factors tensor onto the product transport
        twist = e1.twist + e2.twist
        m = e1.transport.m + e2.transport.m - tr.m
        u = f2.add(f2.add(e1.transport.u, e2.transport.u), tr.u)
        rep12 = self.rep(k12)
        tp = AlignmentClass(
            LineBundle(self.scheme, rep12),
            LineBundle(self.scheme, twist),
            m,
            u,
        )
        return RepresentedClass(
            self, e1.degree + e2.degree, k12, coords, twist, tp
        )

    def one(self):
        return self.element(0, self.zero_key, self.unit)

    def unit_class(self, u):
        """The invertible degree-0 class attached to a unit mod squares."""
        out = self.unit
        for label, bit in zip(self.scheme.units.labels, u):
            if bit % 2 == 0:
                continue
            if label not in self.unit_class_map:
                raise MissingAutAction(
                    f"{self.name}: no unit class for generator {label!r}"
                )
            out, _ = self.multiply_coords(
                0, self.zero_key, out, 0, self.zero_key, self.unit_class_map[label]
            )
        return out

    def _aut_torsion_data(self):
        tor, incl = two_torsion(self.scheme.pic)
        return tor, incl, self.aut_tables

    def _unit_route(self, u):
        # on the base the unit route is direct multiplication
        return self.unit_class(u)

    def _ring_multiply_on(self, rho, el):
        degree, key, coords = el
        out, k12 = self.multiply_coords(0, self.zero_key, rho, degree, key, coords)
        if k12 != tuple(key):
            raise TypeMismatch("unit multiplication changed the class")
        return out

    # -- validation -------------------------------------------------------------

    def _validate_ring(self):
        nonzero = [pk for pk in self.pieces if not self.pieces[pk].is_trivial()]
        # unit element is a two-sided identity on every stored piece
        for (d, k) in nonzero:
            grp = self.piece(d, k)
            for g in grp.generators():
                left, _ = self.multiply_coords(0, self.zero_key, self.unit, d, k, g)
                if left != g:
                    raise ValidationError(
                        "ring_unit",
                        f"{self.name}: unit does not act as identity on ({d},{k})",
                        witness=g,
                    )
        # graded commutativity with the sign (-1)^(d1 d2)
        for (d1, k1), (d2, k2) in itertools.product(nonzero, repeat=2):
            if self.products.get(((d1, k1), (d2, k2))) is None:
                continue
            g1s = self.piece(d1, k1).generators()
            g2s = self.piece(d2, k2).generators()
            sign = -1 if (d1 * d2) % 2 else 1
            for a, b in itertools.product(g1s, g2s):
                ab, _ = self.multiply_coords(d1, k1, a, d2, k2, b)
                ba, _ = self.multiply_coords(d2, k2, b, d1, k1, a)
                if ab != sign * ba:
                    raise ValidationError(
                        "ring_commutativity",
                        f"{self.name}: product not graded-commutative at "
                        f"({d1},{k1})x({d2},{k2})",
                        witness=(a, b),
                    )
        # associativity on stored triples
        for (d1, k1), (d2, k2), (d3, k3) in itertools.product(nonzero, repeat=3):
            for a in self.piece(d1, k1).generators():
                for b in self.piece(d2, k2).generators():
                    ab, k12 = self.multiply_coords(d1, k1, a, d2, k2, b)
                    for c in self.piece(d3, k3).generators():
                        bc, k23 = self.multiply_coords(d2, k2, b, d3, k3, c)
                        lhs, _ = self.multiply_coords(
                            d1 + d2, k12, ab, d3, k3, c
                        )
                        rhs, _ = self.multiply_coords(
                            d1, k1, a, d2 + d3, k23, bc
                        )
                        if lhs != rhs:
                            raise ValidationError(
                                "ring_associativity",
                                f"{self.name}: associativity fails on generators of "
                                f"({d1},{k1})x({d2},{k2})x({d3},{k3})",
                                witness=(a, b, c),
                            )
        # unit classes square to the unit
        for label, rho in self.unit_class_map.items():
            sq, _ = self.multiply_coords(
                0, self.zero_key, rho, 0, self.zero_key, rho
            )
            if sq != self.unit:
                raise ValidationError(
                    "unit_class_square",
                    f"{self.name}: unit class of {label!r} does not square to 1",
                    witness=rho,
                )


# ---------------------------------------------------------------------------
# module presentations


@dataclass
class ActionTable:
    table: list  # table[a][b] = coords in the target piece
    align: AlignmentClass  # pi^* rep(kappa) ⊗ rep(p) ⇝ rep(p)


@dataclass
class RegisteredMap:
    """An exact graded homomorphism between presentations.

    ``blocks[index_class]`` is a pair ``(transport, matrices)``:
    the per-class alignment fixing how the geometric map meets the chosen
    representatives, and matrices (lists of columns) per source degree.
    Indexing is by source class for pull/restrict/ext and by target class
    for push/bord, which are families parametrized by the downstairs twist.
    """

    name: str
    kind: str  # pull | restrict | push | ext | bord
    source: "WittModulePresentation"
    target: "WittModulePresentation"
    morphism: object = None
    triple: object = None
    blocks: dict = field(default_factory=dict)

    def degree_shift(self):
        if self.kind == "bord":
            return 1
        if self.kind == "push":
            return -self.morphism.dim
        return 0


class WittModulePresentation(PieceStore):
    """Witt groups of a scheme with one support label, as a graded module
    over the base ring."""

    def __init__(
        self,
        name,
        scheme,
        base_ring,
        support,
        pieces,
        representatives,
        action=None,
        aut_torsion=None,
        validate=True,
    ):
        self.base_ring = base_ring
        self.structure = structure_morphism(scheme)
        if self.structure.target is not base_ring.scheme:
            raise ValidationError(
                "presentation_base",
                f"{name}: structure morphism does not land on the ring's base",
            )
        if support not in scheme.supports:
            raise ValidationError(
                "presentation_support",
                f"{name}: {support!r} is not a declared support of {scheme.name}",
            )
        self.support = support
        super().__init__(name, scheme, pieces, representatives)
        self.action = {}
        for key, value in (action or {}).items():
            (i, kappa), (k, p) = key
            table, tr = value
            self.action[
                ((i % 4, tuple(kappa)), (k % 4, tuple(p)))
            ] = self._make_action(i % 4, tuple(kappa), tuple(p), table, tr)
        self.aut_tables = dict(aut_torsion or {})
        self.maps = {}
        if validate:
            self._validate_module()

    def _make_class_data(self):
        from .abelian import cokernel_of

        pi = structure_morphism(self.scheme)
        cok, proj = cokernel_of(pi.pic_pullback)
        space, red = mod2_reduction(cok)

        def class_reduce(el):
            return red(proj.apply(el))

        return space, class_reduce

    def _make_action(self, i, kappa, p, table, tr):
        pulled = self.structure.pic_pullback.apply(self.base_ring.rep(kappa))
        src = pulled + self.rep(p)
        tgt = self.rep(p)
        if tr is None:
            m = canonical_sqrt(self.scheme.pic, tgt - src)
            if m is None:
                raise ValidationError(
                    "action_alignment",
                    f"{self.name}: coefficient class {kappa} is not representable "
                    f"against class {p}: the pulled representative is not a square "
                    f"away from the target representative",
                )
            u = self.scheme.units.zero()
        else:
            m = self.scheme.pic.element(tr[0])
            u = tr[1]
        align = AlignmentClass(
            LineBundle(self.scheme, src), LineBundle(self.scheme, tgt), m, u
        )
        return ActionTable(table, align)

    # -- the action -------------------------------------------------------------

    def action_entry(self, i, kappa, k, p):
        return self.action.get(((i % 4, tuple(kappa)), (k % 4, tuple(p))))

    def act_coords(self, i, kappa, lam_coords, k, p, g_coords):
        """Raw table action on representative coordinates; implicit zero."""
        target = self.piece(i + k, p)
        entry = self.action_entry(i, kappa, k, p)
        if entry is None:
            ring_piece = self.base_ring.piece(i, kappa)
            mod_piece = self.piece(k, p)
            if ring_piece.is_trivial() or mod_piece.is_trivial() or target.is_trivial():
                return target.zero()
            raise ValidationError(
                "action_table",
                f"{self.name}: missing action table (({i},{kappa}), ({k},{p}))",
            )
        acc = [0] * target.rank
        for a, xa in enumerate(lam_coords.coords):
            if xa == 0:
                continue
            for b, yb in enumerate(g_coords.coords):
                if yb == 0:
                    continue
                acc = [s + xa * yb * t for s, t in zip(acc, entry.table[a][b])]
        return target.element(acc)

    def _aut_torsion_data(self):
        tor, incl = two_torsion(self.scheme.pic)
        return tor, incl, self.aut_tables

    def _unit_route(self, u):
        pi = self.structure
        x = pi.unit_pullback.solve(u)
        if x is None:
            raise MissingAutAction(
                f"{self.name}: unit class not pulled back from the base; direct "
                f"unit actions are rejected"
            )
        return self.base_ring.unit_class(x)

    def _ring_multiply_on(self, rho, el):
        degree, key, coords = el
        return self.act_coords(
            0, self.base_ring.zero_key, rho, degree, key, coords
        )

    # -- registered maps ----------------------------------------------------------

    def register_map(self, rmap):
        self.maps[rmap.name] = rmap

    def find_map(self, kind, morphism=None, triple=None, target_support=None):
        for rmap in self.maps.values():
            if rmap.kind != kind:
                continue
            if morphism is not None and rmap.morphism is not morphism:
                continue
            if triple is not None and rmap.triple is not triple:
                continue
            if (
                target_support is not None
                and rmap.target.support != target_support
            ):
                continue
            return rmap
        raise MissingMap(
            f"{self.name}: no registered {kind} map"
            + (f" along {morphism.name}" if morphism is not None else "")
        )

    # -- validation ----------------------------------------------------------------

    def _validate_module(self):
        ring = self.base_ring
        zero_kappa = ring.zero_key
        nonzero = [pk for pk in self.pieces if not self.pieces[pk].is_trivial()]
        # 2-torsion automorphism data must exist for every torsion generator
        tor, _ = two_torsion(self.scheme.pic)
        if nonzero:
            for i in range(tor.rank):
                if i not in self.aut_tables:
                    raise ValidationError(
                        "aut_action_required",
                        f"{self.name}: 2-torsion square root {i} has no automorphism "
                        f"data; there is no default",
                    )
        # automorphism blocks are commuting involutive automorphisms
        for i, table in self.aut_tables.items():
            for (d, k), cols in table.items():
                piece = self.piece(d, k)
                hom = GroupHom(piece, piece, cols)
                for g in piece.generators():
                    if hom.apply(hom.apply(g)) != g:
                        raise ValidationError(
                            "aut_involution",
                            f"{self.name}: torsion automorphism {i} does not square "
                            f"to the identity on ({d},{k})",
                            witness=g,
                        )
        for i, j in itertools.combinations(sorted(self.aut_tables), 2):
            for pk in self.aut_tables[i]:
                if pk not in self.aut_tables[j]:
                    continue
                piece = self.piece(*pk)
                hi = GroupHom(piece, piece, self.aut_tables[i][pk])
                hj = GroupHom(piece, piece, self.aut_tables[j][pk])
                for g in piece.generators():
                    if hi.apply(hj.apply(g)) != hj.apply(hi.apply(g)):
                        raise ValidationError(
                            "aut_commutation",
                            f"{self.name}: torsion automorphisms {i},{j} do not "
                            f"commute on {pk}",
                            witness=g,
                        )
        # unit action of the ring unit is the identity; trivial-coefficient
        # alignments must be identities
        for (k, p) in nonzero:
            entry = self.action_entry(0, zero_kappa, k, p)
            if entry is None:
                raise ValidationError(
                    "action_table",
                    f"{self.name}: no unit action table for piece ({k},{p})",
                )
            if not entry.align.is_identity():
                raise ValidationError(
                    "action_alignment",
                    f"{self.name}: unit-coefficient alignment for class {p} must "
                    f"be the identity",
                )
            piece = self.piece(k, p)
            for g in piece.generators():
                if self.act_coords(0, zero_kappa, ring.unit, k, p, g) != g:
                    raise ValidationError(
                        "action_unit",
                        f"{self.name}: ring unit does not act as identity on "
                        f"({k},{p})",
                        witness=g,
                    )
        # associativity of the action on stored generators
        ring_nonzero = [
            pk for pk in ring.pieces if not ring.pieces[pk].is_trivial()
        ]
        for (d1, k1), (d2, k2) in itertools.product(ring_nonzero, repeat=2):
            for (k, p) in nonzero:
                for a in ring.piece(d1, k1).generators():
                    for b in ring.piece(d2, k2).generators():
                        ab, k12 = ring.multiply_coords(d1, k1, a, d2, k2, b)
                        for g in self.piece(k, p).generators():
                            bg = self.act_coords(d2, k2, b, k, p, g)
                            lhs = self.act_coords(
                                d1, k1, a, d2 + k, p, bg
                            )
                            rhs = self.act_coords(d1 + d2, k12, ab, k, p, g)
                            if lhs != rhs:
                                raise ValidationError(
                                    "action_associativity",
                                    f"{self.name}: action associativity fails at "
                                    f"(({d1},{k1}),({d2},{k2}),({k},{p}))",
                                    witness=(a, b, g),
                                )
        # units killed by the pullback must act trivially
        pi = self.structure
        for idx in range(ring.scheme.units.dim):
            x = tuple(1 if t == idx else 0 for t in range(ring.scheme.units.dim))
            if any(pi.unit_pullback.apply(x)):
                continue
            rho = ring.unit_class(x)
            for (k, p) in nonzero:
                for g in self.piece(k, p).generators():
                    if self.act_coords(0, zero_kappa, rho, k, p, g) != g:
                        raise ValidationError(
                            "unit_kernel_action",
                            f"{self.name}: unit {idx} dies under pullback but its "
                            f"class acts nontrivially on ({k},{p})",
                            witness=g,
                        )


# ---------------------------------------------------------------------------
# the lax product


def lax_product(lam, ka: KAlignmentClass, w):
    """The product of a base class and a module class realigned under ``ka``.

    ``lam`` is a represented class of the base ring at the coefficient
    bundle of ``ka``; ``ka.inner`` runs from the pulled coefficient tensor
    the twist of ``w`` to the resulting twist.
    """
    pres = w.parent
    ring = pres.base_ring
    if lam.parent is not ring:
        raise TypeMismatch("coefficient is not a class of the base ring")
    if ka.scheme is not pres.scheme:
        raise TypeMismatch("relative alignment on the wrong scheme")
    if lam.twist != ka.k.cls:
        raise TypeMismatch(
            "coefficient class twist does not match the alignment's bundle"
        )
    pi = pres.structure
    expected_src = pi.pic_pullback.apply(ka.k.cls) + w.twist
    if ka.inner.source.cls != expected_src:
        raise TypeMismatch(
            "relative alignment does not start at pulled-K ⊗ twist",
            witness=(ka.inner.source.cls, expected_src),
        )
    target_twist = ka.inner.target.cls
    p_out = pres.class_of(target_twist)
    if not pres.in_scope(p_out):
        raise ScopeError(
            f"{pres.name}: lax product lands in class {p_out} outside the scope"
        )
    if p_out != w.key:
        raise ScopeError(
            f"{pres.name}: lax product changed the twist class, data corrupt"
        )
    entry = pres.action_entry(lam.degree, lam.key, w.degree, w.key)
    coords = pres.act_coords(
        lam.degree, lam.key, lam.coords, w.degree, w.key, w.coords
    )
    if entry is not None:
        a0 = entry.align
    else:
        # zero pieces: any valid alignment will do for the (zero) result
        pulled = pi.pic_pullback.apply(ring.rep(lam.key))
        m = canonical_sqrt(pres.scheme.pic, pres.rep(w.key) - pulled - pres.rep(w.key))
        if m is None:
            raise ScopeError(
                f"{pres.name}: coefficient class {lam.key} not representable "
                f"against {w.key}"
            )
        a0 = AlignmentClass(
            LineBundle(pres.scheme, pulled + pres.rep(w.key)),
            LineBundle(pres.scheme, pres.rep(w.key)),
            m,
            pres.scheme.units.zero(),
        )
    # composite transport: ka.inner ∘ (pi^* lam.transport ⊗ w.transport) ∘ a0^{-1}
    m_e = (
        ka.inner.m
        + pi.pic_pullback.apply(lam.transport.m)
        + w.transport.m
    )
    u_e = f2.add(
        ka.inner.u,
        f2.add(pi.unit_pullback.apply(lam.transport.u), w.transport.u),
    )
    tp = AlignmentClass(
        LineBundle(pres.scheme, pres.rep(w.key)),
        LineBundle(pres.scheme, target_twist),
        m_e - a0.m,
        f2.add(u_e, a0.u),
    )
    return RepresentedClass(
        pres, lam.degree + w.degree, w.key, coords, target_twist, tp
    )


def lax_combination(terms, degree, twist):
    """Sum of lax products landing in a common degree and twist."""
    if not terms:
        raise TypeMismatch("empty combination has no presentation to live in")
    pres = terms[0][2].parent
    key = pres.class_of(twist)
    if not pres.in_scope(key):
        raise ScopeError(f"{pres.name}: combination target outside the scope")
    s = pres.canonical_transport(key, twist)
    piece = pres.piece(degree, key)
    acc = piece.zero()
    for lam, ka, w in terms:
        if lam.degree + w.degree != degree:
            raise DegreeMismatch(
                f"term lands in degree {lam.degree + w.degree}, expected {degree}"
            )
        r = lax_product(lam, ka, w)
        if r.twist != twist:
            raise TypeMismatch("term does not land at the common twist")
        disc = compose(invert(s), r.transport)
        acc = acc + pres.apply_automorphism(disc, (degree, key, r.coords))
    return RepresentedClass(pres, degree, key, acc, twist, s)


# ---------------------------------------------------------------------------
# registered map application and expression evaluation


def apply_registered(rmap, w, target_twist=None):
    """Apply a registered map to a represented class of its source.

    For push/bord the downstairs twist must be supplied (those maps are
    families parametrized by it); for pull/restrict/ext it is derived.
    """
    src, tgt = rmap.source, rmap.target
    if w.parent is not src:
        raise TypeMismatch(f"{rmap.name}: class not in the source presentation")
    kind = rmap.kind

    if kind in ("pull", "restrict"):
        f = rmap.morphism
        block = rmap.blocks.get(w.key)
        p_out = tgt.class_of(f.pic_pullback.apply(src.rep(w.key)))
        out_piece = tgt.piece(w.degree, p_out)
        if block is None:
            if not src.piece(w.degree, w.key).is_trivial() and not out_piece.is_trivial():
                raise MissingMap(
                    f"{rmap.name}: no block for class {w.key}"
                )
            tr_align = _default_block_transport(rmap, w.key)
            coords = out_piece.zero()
        else:
            tr_align = block[0]
            cols = block[1].get(w.degree % 4)
            coords = (
                _matrix_columns_apply(cols, w.coords, out_piece)
                if cols is not None
                else out_piece.zero()
            )
        new_twist = f.pic_pullback.apply(w.twist)
        pulled_tp = AlignmentClass(
            LineBundle(tgt.scheme, f.pic_pullback.apply(w.transport.source.cls)),
            LineBundle(tgt.scheme, new_twist),
            f.pic_pullback.apply(w.transport.m),
            f.unit_pullback.apply(w.transport.u),
        )
        tp = compose(pulled_tp, invert(tr_align))
        return RepresentedClass(tgt, w.degree, p_out, coords, new_twist, tp)

    if kind == "ext":
        block = rmap.blocks.get(w.key)
        out_piece = tgt.piece(w.degree, w.key)
        if block is None:
            if not src.piece(w.degree, w.key).is_trivial() and not out_piece.is_trivial():
                raise MissingMap(f"{rmap.name}: no block for class {w.key}")
            tr_align = _default_block_transport(rmap, w.key)
            coords = out_piece.zero()
        else:
            tr_align = block[0]
            cols = block[1].get(w.degree % 4)
            coords = (
                _matrix_columns_apply(cols, w.coords, out_piece)
                if cols is not None
                else out_piece.zero()
            )
        tp = compose(w.transport, invert(tr_align))
        return RepresentedClass(tgt, w.degree, w.key, coords, w.twist, tp)

    if kind in ("push", "bord"):
        if target_twist is None:
            raise TypeMismatch(f"{rmap.name}: {kind} needs the downstairs twist")
        p_out = tgt.class_of(target_twist)
        if not tgt.in_scope(p_out):
            raise ScopeError(f"{rmap.name}: target class {p_out} outside the scope")
        block = rmap.blocks.get(p_out)
        if kind == "push":
            fmor = rmap.morphism
            expected = fmor.omega + fmor.pic_pullback.apply(target_twist)
            deg_out = w.degree - fmor.dim
        else:
            ups = rmap.triple.upsilon
            expected = ups.pic_pullback.apply(target_twist)
            deg_out = w.degree + 1
        if w.twist != expected:
            raise TypeMismatch(
                f"{rmap.name}: class twist does not match the downstairs twist",
                witness=(w.twist, expected),
            )
        s = tgt.canonical_transport(p_out, target_twist)
        if kind == "push":
            fmor = rmap.morphism
            lifted = AlignmentClass(
                LineBundle(
                    src.scheme,
                    fmor.omega + fmor.pic_pullback.apply(s.source.cls),
                ),
                LineBundle(src.scheme, expected),
                fmor.pic_pullback.apply(s.m),
                fmor.unit_pullback.apply(s.u),
            )
        else:
            ups = rmap.triple.upsilon
            lifted = AlignmentClass(
                LineBundle(src.scheme, ups.pic_pullback.apply(s.source.cls)),
                LineBundle(src.scheme, expected),
                ups.pic_pullback.apply(s.m),
                ups.unit_pullback.apply(s.u),
            )
        out_piece = tgt.piece(deg_out, p_out)
        if block is None:
            if not src.piece(w.degree, w.key).is_trivial() and not out_piece.is_trivial():
                raise MissingMap(f"{rmap.name}: no block for class {p_out}")
            coords = out_piece.zero()
        else:
            tr_align, matrices = block
            disc = compose(invert(compose(lifted, tr_align)), w.transport)
            moved = src.apply_automorphism(disc, (w.degree, w.key, w.coords))
            cols = matrices.get(w.degree % 4)
            coords = (
                _matrix_columns_apply(cols, moved, out_piece)
                if cols is not None
                else out_piece.zero()
            )
        return RepresentedClass(tgt, deg_out, p_out, coords, target_twist, s)

    raise TypeMismatch(f"unknown registered map kind {kind!r}")


def _default_block_transport(rmap, key):
    """Canonical per-class alignment when a block is absent (zero pieces)."""
    src, tgt = rmap.source, rmap.target
    if rmap.kind in ("pull", "restrict"):
        f = rmap.morphism
        pulled = f.pic_pullback.apply(src.rep(key))
        p_out = tgt.class_of(pulled)
        m = canonical_sqrt(tgt.scheme.pic, tgt.rep(p_out) - pulled)
        if m is None:
            raise ValidationError(
                "map_representatives",
                f"{rmap.name}: pulled representative of {key} is not a square away "
                f"from the target representative",
            )
        return AlignmentClass(
            LineBundle(tgt.scheme, pulled),
            LineBundle(tgt.scheme, tgt.rep(p_out)),
            m,
            tgt.scheme.units.zero(),
        )
    if rmap.kind == "ext":
        m = canonical_sqrt(tgt.scheme.pic, tgt.rep(key) - src.rep(key))
        if m is None:
            raise ValidationError(
                "map_representatives",
                f"{rmap.name}: source and target representatives of {key} differ "
                f"by a non-square",
            )
        return AlignmentClass(
            LineBundle(tgt.scheme, src.rep(key)),
            LineBundle(tgt.scheme, tgt.rep(key)),
            m,
            tgt.scheme.units.zero(),
        )
    raise TypeMismatch("no default transport for push/bord blocks")


def eval_expr(expr, w):
    """Evaluate a typed word on a represented class.

    The class must sit at the expression's domain: same scheme, support,
    degree and twist.  Scalars act through transports; pulls, pushes,
    extensions, restrictions and connecting maps act through registered
    matrices.  Evaluating a word and its normal form gives classes equal
    under compare_classes.
    """
    from .expr import Bord, Ext, Pull, Push, Restrict, Scalar

    pres = w.parent
    dom = expr.domain
    if (
        dom.scheme is not pres.scheme
        or dom.support != pres.support
        or dom.degree != w.degree
        or dom.twist != w.twist
    ):
        raise TypeMismatch("class does not sit at the expression's domain")
    current = w
    for gen in expr.word:
        pres = current.parent
        if isinstance(gen, Scalar):
            src_bundle = LineBundle(pres.scheme, current.twist)
            tgt_bundle = LineBundle(pres.scheme, current.twist + 2 * gen.m)
            current = transport(
                current, AlignmentClass(src_bundle, tgt_bundle, gen.m, gen.u)
            )
        elif isinstance(gen, (Pull, Restrict)):
            kind = "pull" if isinstance(gen, Pull) else "restrict"
            rmap = pres.find_map(kind, morphism=gen.morphism)
            current = apply_registered(rmap, current)
        elif isinstance(gen, Push):
            rmap = pres.find_map("push", morphism=gen.morphism)
            current = apply_registered(rmap, current, target_twist=gen.target_twist)
        elif isinstance(gen, Ext):
            rmap = pres.find_map("ext", target_support=gen.large)
            current = apply_registered(rmap, current)
        elif isinstance(gen, Bord):
            rmap = pres.find_map("bord", triple=gen.triple)
            current = apply_registered(rmap, current, target_twist=gen.target_twist)
        else:
            raise TypeMismatch(f"unknown generator {gen!r}")
    return current


# ---------------------------------------------------------------------------
# registered-map validation (linearity per the stated compatibilities)


def validate_registered_map(rmap):
    """Structural and linearity checks for a registered map.

    Extension of support, restriction and the connecting map must be
    linear over the base action; that is checked on all generators of all
    nonzero blocks.  Pushforward linearity is the projection-formula
    statement and is exercised by the coefficient-square tests instead.
    """
    src, tgt = rmap.source, rmap.target
    if rmap.kind in ("pull", "restrict"):
        f = rmap.morphism
        if f.target is not src.scheme or f.source is not tgt.scheme:
            raise ValidationError(
                "map_endpoints", f"{rmap.name}: morphism endpoints do not match"
            )
        if tgt.support != f.pull_support(src.support):
            raise ValidationError(
                "map_support", f"{rmap.name}: support labels do not match"
            )
    elif rmap.kind == "push":
        f = rmap.morphism
        if f.source is not src.scheme or f.target is not tgt.scheme:
            raise ValidationError(
                "map_endpoints", f"{rmap.name}: morphism endpoints do not match"
            )
        f.require_proper()
        if tgt.support != f.push_support(src.support):
            raise ValidationError(
                "map_support", f"{rmap.name}: support labels do not match"
            )
    elif rmap.kind == "ext":
        if src.scheme is not tgt.scheme:
            raise ValidationError(
                "map_endpoints", f"{rmap.name}: extension must stay on one scheme"
            )
        if not src.scheme.has_inclusion(src.support, tgt.support):
            raise ValidationError(
                "map_support",
                f"{rmap.name}: no declared inclusion "
                f"{src.support!r} <= {tgt.support!r}",
            )
    elif rmap.kind == "bord":
        tri = rmap.triple
        if src.scheme is not tri.open_scheme or tgt.scheme is not tri.scheme:
            raise ValidationError(
                "map_endpoints", f"{rmap.name}: connecting map endpoints do not match"
            )
        if tgt.support != tri.closed_label:
            raise ValidationError(
                "map_support",
                f"{rmap.name}: connecting map must land in the closed support",
            )
    else:
        raise ValidationError("map_kind", f"{rmap.name}: unknown kind {rmap.kind!r}")

    # block transports connect the right endpoints
    for key, (tr_align, matrices) in rmap.blocks.items():
        if rmap.kind in ("pull", "restrict"):
            f = rmap.morphism
            want_src = f.pic_pullback.apply(src.rep(key))
            want_tgt = tgt.rep(tgt.class_of(want_src))
        elif rmap.kind == "ext":
            want_src = src.rep(key)
            want_tgt = tgt.rep(key)
        elif rmap.kind == "push":
            f = rmap.morphism
            want_tgt_bundle = f.omega + f.pic_pullback.apply(tgt.rep(key))
            want_src = src.rep(src.class_of(want_tgt_bundle))
            want_tgt = want_tgt_bundle
        else:  # bord
            ups = rmap.triple.upsilon
            want_tgt_bundle = ups.pic_pullback.apply(tgt.rep(key))
            want_src = src.rep(src.class_of(want_tgt_bundle))
            want_tgt = want_tgt_bundle
        if tr_align.source.cls != want_src or tr_align.target.cls != want_tgt:
            raise ValidationError(
                "map_transport",
                f"{rmap.name}: block transport for {key} has wrong endpoints",
            )

    if rmap.kind in ("ext", "restrict", "bord"):
        _check_action_linear(rmap)


def _check_action_linear(rmap):
    from .align import k_alignment

    src, tgt = rmap.source, rmap.target
    ring = src.base_ring
    k_triv = LineBundle(ring.scheme, ring.scheme.pic.zero())
    for (i, kappa) in ring.pieces:
        if ring.piece(i, kappa).is_trivial() or kappa != ring.zero_key:
            continue
        for lam_gen in ring.piece(i, kappa).generators():
            lam = ring.element(i, kappa, lam_gen)
            for (k, p) in src.pieces:
                if src.piece(k, p).is_trivial():
                    continue
                if rmap.kind == "bord":
                    candidates = [
                        pk for pk in rmap.blocks
                        if src.class_of(
                            rmap.triple.upsilon.pic_pullback.apply(tgt.rep(pk))
                        ) == p
                    ]
                else:
                    candidates = [p]
                for g in src.piece(k, p).generators():
                    for p_out in candidates:
                        kwargs = {}
                        twist = None
                        if rmap.kind == "bord":
                            kwargs["target_twist"] = tgt.rep(p_out)
                            # connecting maps apply at the restricted twist
                            twist = rmap.triple.upsilon.pic_pullback.apply(
                                tgt.rep(p_out)
                            )
                        try:
                            w = src.element(k, p, g, twist=twist)
                        except ScopeError as exc:
                            raise ValidationError(
                                "map_representatives",
                                f"{rmap.name}: {exc}",
                            ) from exc
                        ka_src = k_alignment(
                            k_triv, LineBundle(src.scheme, w.twist),
                            src.scheme.pic.zero(), src.scheme.units.zero(),
                        )
                        lw = lax_product(lam, ka_src, w)
                        lhs = apply_registered(rmap, lw, **kwargs)
                        rw = apply_registered(rmap, w, **kwargs)
                        ka_tgt = k_alignment(
                            k_triv, LineBundle(tgt.scheme, rw.twist),
                            tgt.scheme.pic.zero(), tgt.scheme.units.zero(),
                        )
                        rhs = lax_product(lam, ka_tgt, rw)
                        if not compare_classes(lhs, rhs):
                            raise ValidationError(
                                "map_action_linearity",
                                f"{rmap.name}: not linear over the base action at "
                                f"ring ({i},{kappa}), piece ({k},{p})",
                                witness=(lam_gen, g),
                            )
