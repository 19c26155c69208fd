#!/usr/bin/env python3
"""Regenerate the workspace fixtures shipped with the package.

Run from the repository root:

    python3 scripts/make_fixtures.py

Each fixture is written as canonical JSON under src/wtc/fixtures/ and then
re-loaded through the workspace parser as a smoke check (negative fixtures
are expected to fail validation and are checked for that instead).
"""

import json
import pathlib
import sys

OUT = pathlib.Path(__file__).resolve().parent.parent / "src" / "wtc" / "fixtures"

EYE2 = [[1, 0], [0, 1]]
SWAP_TABLE = [[[1, 0], [0, 1]], [[0, 1], [1, 0]]]
Z2Z2 = {"generators": ["e", "ae"], "relations": [[2, 0], [0, 2]]}
Z2 = {"generators": ["e"], "relations": [[2]]}


def scheme(pic_gens, pic_rels, units, supports=("total",), inclusions=(), structure=None):
    return {
        "pic": {"generators": list(pic_gens), "relations": [list(r) for r in pic_rels]},
        "units": list(units),
        "supports": list(supports),
        "support_inclusions": [list(p) for p in inclusions],
        "structure": structure,
    }


def morphism(source, target, pic_map, unit_map, proper=None, annotations=(),
             support_map=None, push_support_map=None):
    return {
        "source": source,
        "target": target,
        "pic_map": [list(c) for c in pic_map],
        "unit_map": [list(c) for c in unit_map],
        "proper": proper,
        "annotations": sorted(annotations),
        "support_map": support_map or {},
        "push_support_map": push_support_map or {},
    }


def member(mid, degree, cls, coords, twist=None):
    return {
        "id": mid,
        "degree": degree,
        "class": list(cls),
        "coords": list(coords),
        "twist": twist,
        "transport": None,
    }


def swap_ring(scheme_name="X"):
    """The Witt ring of a field with exactly one nontrivial unit class:
    additively (Z/2)^2 on <1>, <a> with <a>^2 = <1>."""
    return {
        "name": "W_X",
        "scheme": scheme_name,
        "pieces": [{"degree": 0, "class": [], "group": Z2Z2}],
        "representatives": [{"class": [], "bundle": []}],
        "unit": [1, 0],
        "products": [
            {"left": [0, []], "right": [0, []], "table": SWAP_TABLE, "transport": None}
        ],
        "unit_classes": {"a": [0, 1]},
        "aut_torsion": [],
    }


def rich_presentation(scheme_name, support, cells, classes):
    """Presentation with (Z/2)^2 cells and the swap action of <a>."""
    return {
        "scheme": scheme_name,
        "support": support,
        "classes": [{"class": list(c), "rep": list(r)} for c, r in classes],
        "pieces": [
            {"degree": d, "class": list(c), "group": Z2Z2} for d, c in cells
        ],
        "action": [
            {
                "ring_degree": 0,
                "ring_class": [],
                "degree": d,
                "class": list(c),
                "table": SWAP_TABLE,
                "transport": None,
            }
            for d, c in cells
        ],
        "aut_torsion": [],
    }


def reg_map(kind, source, target, blocks, morphism=None, localization=None):
    return {
        "kind": kind,
        "source": source,
        "target": target,
        "morphism": morphism,
        "localization": localization,
        "blocks": blocks,
    }


def block(cls, matrices):
    return {
        "class": list(cls),
        "transport": None,
        "matrices": {str(k): [list(c) for c in m] for k, m in matrices.items()},
    }


# ---------------------------------------------------------------------------
# fixtures


def point():
    """One point scheme with the two-element Witt ring; the smallest
    loadable workspace."""
    return {
        "version": "1",
        "base": "X",
        "schemes": {"X": scheme([], [], [], structure=None)},
        "morphisms": {},
        "localizations": {},
        "base_ring": {
            "name": "W_X",
            "scheme": "X",
            "pieces": [{"degree": 0, "class": [], "group": Z2}],
            "representatives": [{"class": [], "bundle": []}],
            "unit": [1],
            "products": [
                {"left": [0, []], "right": [0, []], "table": [[[1]]], "transport": None}
            ],
            "unit_classes": {},
            "aut_torsion": [],
        },
        "presentations": {
            "W_Xm": {
                "scheme": "X",
                "support": "total",
                "classes": [{"class": [], "rep": []}],
                "pieces": [{"degree": 0, "class": [], "group": Z2}],
                "action": [
                    {
                        "ring_degree": 0,
                        "ring_class": [],
                        "degree": 0,
                        "class": [],
                        "table": [[[1]]],
                        "transport": None,
                    }
                ],
                "aut_torsion": [],
            }
        },
        "registered_maps": {},
        "basis_candidates": {
            "unit": {
                "presentation": "W_Xm",
                "scope": [[]],
                "members": [member("one", 0, [], [1])],
            }
        },
        "ledgers": {},
    }


def affine_line():
    """The affine line over a base whose units have one nontrivial class;
    pullback along the affine bundle is a trusted isomorphism."""
    return {
        "version": "1",
        "base": "X",
        "schemes": {
            "X": scheme([], [], ["a"]),
            "A1": scheme([], [], ["a"], structure="pi_A1"),
        },
        "morphisms": {
            "pi_A1": morphism(
                "A1", "X", [], [[1]],
                annotations=["affine_bundle", "witt_pullback_iso"],
            )
        },
        "localizations": {},
        "base_ring": swap_ring(),
        "presentations": {
            "W_Xm": rich_presentation("X", "total", [(0, [])], [([], [])]),
            "W_A1": rich_presentation("A1", "total", [(0, [])], [([], [])]),
        },
        "registered_maps": {
            "pull_piA1": reg_map(
                "pull", "W_Xm", "W_A1", [block([], {0: EYE2})], morphism="pi_A1"
            )
        },
        "basis_candidates": {
            "unit_X": {
                "presentation": "W_Xm",
                "scope": [[]],
                "members": [member("one", 0, [], [1, 0])],
            },
            "unit_A1": {
                "presentation": "W_A1",
                "scope": [[]],
                "members": [member("one", 0, [], [1, 0])],
            },
        },
        "ledgers": {},
    }


def projective_line():
    """The projective line over a point: closed point, affine complement,
    full localization data, and a second line mapping down for descent."""
    doc = {
        "version": "1",
        "base": "X",
        "schemes": {
            "X": scheme([], [], ["a"]),
            "P1": scheme(
                ["h"], [], ["a"],
                supports=["total", "z"],
                inclusions=[["z", "total"]],
                structure="pi_P1",
            ),
            "A1": scheme([], [], ["a"], structure="pi_A1"),
            "Zpt": scheme([], [], ["a"], structure="pi_Zpt"),
            "P1b": scheme(["hb"], [], ["a"], structure="pi_P1b"),
        },
        "morphisms": {
            "pi_P1": morphism(
                "P1", "X", [], [[1]],
                proper={"omega": [-2], "dim": 1},
                support_map={"total": "total"},
                push_support_map={"total": "total", "z": "total"},
            ),
            "pi_A1": morphism(
                "A1", "X", [], [[1]],
                annotations=["affine_bundle", "witt_pullback_iso"],
            ),
            "pi_Zpt": morphism(
                "Zpt", "X", [], [[1]],
                proper={"omega": [], "dim": 0},
                annotations=["affine_bundle", "witt_pullback_iso"],
            ),
            "pi_P1b": morphism(
                "P1b", "X", [], [[1]],
                proper={"omega": [-2], "dim": 1},
            ),
            "iota": morphism(
                "Zpt", "P1", [[]], [[1]],
                proper={"omega": [], "dim": -1},
                annotations=["witt_pushforward_iso"],
                push_support_map={"total": "z"},
            ),
            "upsilon": morphism(
                "A1", "P1", [[]], [[1]],
                support_map={"total": "total"},
            ),
            "f": morphism("P1b", "P1", [[1]], [[1]]),
        },
        "localizations": {
            "zloc": {
                "scheme": "P1",
                "closed": "z",
                "open_scheme": "A1",
                "open_immersion": "upsilon",
            }
        },
        "base_ring": swap_ring(),
        "presentations": {
            "W_Xm": rich_presentation("X", "total", [(0, [])], [([], [])]),
            "W_Zpt": rich_presentation("Zpt", "total", [(0, [])], [([], [])]),
            "W_A1": rich_presentation("A1", "total", [(0, [])], [([], [])]),
            "W_P1": rich_presentation(
                "P1", "total",
                [(0, [0]), (1, [0])],
                [([0], [0]), ([1], [1])],
            ),
            "W_zP1": rich_presentation(
                "P1", "z",
                [(1, [0]), (1, [1])],
                [([0], [0]), ([1], [1])],
            ),
        },
        "registered_maps": {
            "pull_piA1": reg_map(
                "pull", "W_Xm", "W_A1", [block([], {0: EYE2})], morphism="pi_A1"
            ),
            "pull_piZpt": reg_map(
                "pull", "W_Xm", "W_Zpt", [block([], {0: EYE2})], morphism="pi_Zpt"
            ),
            "push_iota": reg_map(
                "push", "W_Zpt", "W_zP1",
                [block([0], {0: EYE2}), block([1], {0: EYE2})],
                morphism="iota",
            ),
            "ext_z": reg_map(
                "ext", "W_zP1", "W_P1",
                [block([0], {1: EYE2}), block([1], {})],
            ),
            "res_ups": reg_map(
                "restrict", "W_P1", "W_A1",
                [block([0], {0: EYE2}), block([1], {})],
                localization="zloc",
            ),
            "bord_ups": reg_map(
                "bord", "W_A1", "W_zP1",
                [block([0], {}), block([1], {0: EYE2})],
                localization="zloc",
            ),
        },
        "basis_candidates": {
            "unit_X": {
                "presentation": "W_Xm",
                "scope": [[]],
                "members": [member("one", 0, [], [1, 0])],
            },
            "p1_basis": {
                "presentation": "W_P1",
                "scope": [[0], [1]],
                "members": [
                    member("one", 0, [0], [1, 0]),
                    member("sigma", 1, [0], [1, 0]),
                ],
            },
            "z_basis": {
                "presentation": "W_zP1",
                "scope": [[0], [1]],
                "members": [
                    member("v_even", 1, [0], [1, 0]),
                    member("v_odd", 1, [1], [1, 0], twist=[1]),
                ],
            },
            "u_basis": {
                "presentation": "W_A1",
                "scope": [[]],
                "members": [member("oneU", 0, [], [1, 0])],
            },
        },
        "ledgers": {
            "loc_even": {
                "localization": "zloc",
                "closed": "W_zP1",
                "total": "W_P1",
                "open": "W_A1",
                "ext_map": "ext_z",
                "restrict_map": "res_ups",
                "bord_map": "bord_ups",
                "scope": [[0]],
                "e_pairs": [
                    {
                        "left": member("v", 1, [0], [1, 0]),
                        "right": member("sigma", 1, [0], [1, 0]),
                    }
                ],
                "upsilon_pairs": [
                    {
                        "left": member("one", 0, [0], [1, 0]),
                        "right": member("oneU", 0, [], [1, 0]),
                    }
                ],
                "bord_pairs": [],
            },
            "loc_odd": {
                "localization": "zloc",
                "closed": "W_zP1",
                "total": "W_P1",
                "open": "W_A1",
                "ext_map": "ext_z",
                "restrict_map": "res_ups",
                "bord_map": "bord_ups",
                "scope": [[1]],
                "e_pairs": [],
                "upsilon_pairs": [],
                "bord_pairs": [
                    {
                        "left": member("oneU", 0, [], [1, 0]),
                        "right": member("v_odd", 1, [1], [1, 0], twist=[1]),
                    }
                ],
            },
        },
    }
    return doc


def torsion_pic():
    """Base with a 2-torsion Picard class pulling back onto the fiber
    torsion: the relative Picard group is free, descent must correct square
    roots by the torsion class."""
    return {
        "version": "1",
        "base": "X",
        "schemes": {
            "X": scheme(["s"], [[2]], ["a"]),
            "Y": scheme(["t", "h"], [[2, 0]], ["a"], structure="pi_Y"),
            "Ybar": scheme(["t", "h"], [[2, 0]], ["a"], structure="pi_Ybar"),
        },
        "morphisms": {
            "pi_Y": morphism("Y", "X", [[1, 0]], [[1]]),
            "pi_Ybar": morphism("Ybar", "X", [[1, 0]], [[1]]),
            "f": morphism("Ybar", "Y", [[1, 0], [0, 1]], [[1]]),
        },
        "localizations": {},
        "base_ring": None,
        "presentations": {},
        "registered_maps": {},
        "basis_candidates": {},
        "ledgers": {},
    }


def failing_smpic():
    """Three structure maps failing exactly one certification condition
    each: a killed Picard class, relative 2-torsion, and a unit class that
    does not come from the base."""
    return {
        "version": "1",
        "base": "X",
        "schemes": {
            "X": scheme(["s"], [[2]], ["a"]),
            "Ybad1": scheme([], [], ["a"], structure="pi_bad1"),
            "Ybad2": scheme(["t"], [[4]], ["a"], structure="pi_bad2"),
            "Ybad3": scheme(["t"], [[2]], ["a", "b"], structure="pi_bad3"),
        },
        "morphisms": {
            "pi_bad1": morphism("Ybad1", "X", [[]], [[1]]),
            "pi_bad2": morphism("Ybad2", "X", [[2]], [[1]]),
            "pi_bad3": morphism("Ybad3", "X", [[1]], [[1, 0]]),
        },
        "localizations": {},
        "base_ring": None,
        "presentations": {},
        "registered_maps": {},
        "basis_candidates": {},
        "ledgers": {},
    }


def broken_exactness():
    """The projective-line workspace with the connecting map of the odd
    class zeroed out: the registered sequence is no longer exact there."""
    doc = projective_line()
    doc["registered_maps"]["bord_ups"]["blocks"] = [
        block([0], {}),
        block([1], {}),
    ]
    return doc


def nonlinear_bord():
    """The projective-line workspace with a connecting map that is not
    linear over the base action: it kills the <a>-component."""
    doc = projective_line()
    doc["registered_maps"]["bord_ups"]["blocks"] = [
        block([0], {}),
        block([1], {0: [[1, 0], [0, 0]]}),
    ]
    return doc


def overlap_union():
    """Two candidates with overlapping scopes unioned under a required
    independence claim: loading must fail with the overlap witness."""
    doc = projective_line()
    doc["basis_candidates"]["first_half"] = {
        "presentation": "W_P1",
        "scope": [[0]],
        "members": [member("one", 0, [0], [1, 0])],
    }
    doc["basis_candidates"]["second_half"] = {
        "presentation": "W_P1",
        "scope": [[0], [1]],
        "members": [member("sigma", 1, [0], [1, 0])],
    }
    doc["basis_candidates"]["overlapping_union"] = {
        "union_of": ["first_half", "second_half"],
        "require_independent": True,
    }
    return doc


FIXTURES = {
    "point": point,
    "affine_line": affine_line,
    "projective_line": projective_line,
    "torsion_pic": torsion_pic,
    "failing_smpic": failing_smpic,
    "broken_exactness": broken_exactness,
    "nonlinear_bord": nonlinear_bord,
    "overlap_union": overlap_union,
}

EXPECT_LOAD_FAILURE = {"nonlinear_bord", "overlap_union"}


def main():
    sys.path.insert(0, str(OUT.parent.parent))
    from wtc.errors import WtcError
    from wtc.workspace import loads

    OUT.mkdir(parents=True, exist_ok=True)
    for name, build in FIXTURES.items():
        text = json.dumps(build(), indent=2, sort_keys=True) + "\n"
        path = OUT / f"{name}.json"
        path.write_text(text, encoding="utf-8")
        try:
            loads(text)
        except WtcError as exc:
            if name not in EXPECT_LOAD_FAILURE:
                raise SystemExit(f"{name}: unexpected load failure: {exc}")
            print(f"wrote {path.name} (load fails as designed: {exc})")
        else:
            if name in EXPECT_LOAD_FAILURE:
                raise SystemExit(f"{name}: expected a load failure")
            print(f"wrote {path.name}")


if __name__ == "__main__":
    main()
