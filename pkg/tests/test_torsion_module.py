"""Module presentations over a scheme whose Picard group has 2-torsion.

The square-root automorphism data is mandatory input, drives comparisons
of represented classes, and has to cohere with the base ring's own
square-root action: the fiber torsion class pulls back from the base, so
realigning a module class by it must equal multiplying the coefficient by
the base's square-root class.  Incoherent data is not rejected at load
(the engine cannot know the user's intent) but surfaces as a
choice-dependent verdict in the all-choices basis check.
"""

import pytest

from wtc.abelian import FgAbGroup
from wtc.align import AlignmentClass
from wtc.basis import BasisCandidate, BasisMember, check_total_basis
from wtc.errors import ValidationError
from wtc.module import (
    BaseWittRing,
    WittModulePresentation,
    compare_classes,
    to_canonical,
    transport,
)

from .util import torsion_pair


SWAP = [[0, 1], [1, 0]]


def z2z2():
    return FgAbGroup.from_invariants([2, 2])


@pytest.fixture()
def setting():
    x, y, ybar, f = torsion_pair()
    # coefficients: the swap ring with one nontrivial square-root class rho
    # for the base torsion class; rho^2 = 1 and multiplication by rho swaps
    # the two generators
    ring = BaseWittRing(
        "W_X",
        x,
        pieces={(0, (0,)): z2z2()},
        representatives={(0,): x.pic.zero()},
        unit_coords=[1, 0],
        products={((0, (0,)), (0, (0,))): ([[[1, 0], [0, 1]], [[0, 1], [1, 0]]], None)},
        unit_class={"a": [1, 0]},
        aut_torsion={0: {(0, (0,)): SWAP}},
    )
    return x, y, ring


def presentation(y, ring, aut_blocks):
    action = {
        ((0, (0,)), (0, (0,))): (
            [[[1, 0], [0, 1]], [[0, 1], [1, 0]]],
            None,
        )
    }
    return WittModulePresentation(
        "M",
        y,
        ring,
        "total",
        pieces={(0, (0,)): z2z2()},
        representatives={(0,): y.pic.zero(), (1,): y.pic.element([0, 1])},
        action=action,
        aut_torsion=aut_blocks,
    )


def test_torsion_aut_data_is_mandatory(setting):
    x, y, ring = setting
    with pytest.raises(ValidationError) as err:
        presentation(y, ring, {})
    assert err.value.axiom == "aut_action_required"


def test_torsion_aut_must_be_involutive(setting):
    x, y, ring = setting
    # an order-3 automorphism of (Z/2)^2 cannot model a square root action
    bad = {0: {(0, (0,)): [[0, 1], [1, 1]]}}
    with pytest.raises(ValidationError) as err:
        presentation(y, ring, bad)
    assert err.value.axiom == "aut_involution"


def test_torsion_transport_comparison(setting):
    x, y, ring = setting
    pres = presentation(y, ring, {0: {(0, (0,)): SWAP}})
    t = y.pic.element([1, 0])  # the 2-torsion class
    w = pres.element(0, (0,), [1, 0])
    # transport along the square root of the trivial bundle given by the
    # torsion class: same twist, but the representation changes by the swap
    b = AlignmentClass(y.trivial_bundle(), y.trivial_bundle(), t, y.units.zero())
    moved = transport(w, b)
    assert moved.twist == w.twist
    assert not compare_classes(moved, w)  # the swap is not the identity here
    canon = to_canonical(moved)
    assert canon.coords == pres.piece(0, (0,)).element([0, 1])
    # transporting twice is the identity
    again = transport(moved, b)
    assert compare_classes(again, w)


def test_torsion_theta_stable_across_choices_when_coherent(setting):
    x, y, ring = setting
    pres = presentation(y, ring, {0: {(0, (0,)): SWAP}})
    # the piece is free of rank one over the swap ring: one member is a
    # basis and the verdict is stable across the torsion realignments
    w0 = pres.element(0, (0,), [1, 0])
    cand = BasisCandidate(pres, [BasisMember("w0", 0, w0)], [(0,)])
    fixed = check_total_basis(cand)
    assert fixed.passed
    every = check_total_basis(cand, mode="all-choices")
    assert every.passed
    assert every.choices_checked >= 16
    # two members are dependent (the second is the rho-multiple of the first)
    w1 = pres.element(0, (0,), [0, 1])
    bad = BasisCandidate(
        pres, [BasisMember("w0", 0, w0), BasisMember("w1", 0, w1)], [(0,)]
    )
    assert not check_total_basis(bad).passed
    assert not check_total_basis(bad, mode="all-choices").passed


def test_incoherent_torsion_data_surfaces_as_choice_dependence():
    # if the module's torsion automorphism does not match the base ring's
    # square-root class (here: trivial ring action, swapping module action),
    # a fixed choice can look like a basis while another choice refutes it;
    # the all-choices check reports exactly that
    x, y, ybar, f = torsion_pair()
    ring = BaseWittRing(
        "W_X2",
        x,
        pieces={(0, (0,)): FgAbGroup.from_invariants([2])},
        representatives={(0,): x.pic.zero()},
        unit_coords=[1],
        products={((0, (0,)), (0, (0,))): ([[[1]]], None)},
        unit_class={"a": [1]},
    )
    pres = WittModulePresentation(
        "M2",
        y,
        ring,
        "total",
        pieces={(0, (0,)): z2z2()},
        representatives={(0,): y.pic.zero(), (1,): y.pic.element([0, 1])},
        action={((0, (0,)), (0, (0,))): ([[[1, 0], [0, 1]]], None)},
        aut_torsion={0: {(0, (0,)): SWAP}},
    )
    w0 = pres.element(0, (0,), [1, 0])
    w1 = pres.element(0, (0,), [0, 1])
    cand = BasisCandidate(
        pres, [BasisMember("w0", 0, w0), BasisMember("w1", 0, w1)], [(0,)]
    )
    assert check_total_basis(cand).passed  # the fixed choice cannot see it
    every = check_total_basis(cand, mode="all-choices")
    assert not every.passed
    failing = every.failing_cells()
    assert any(c.witness_kind == "choice-dependent verdict" for c in failing)
