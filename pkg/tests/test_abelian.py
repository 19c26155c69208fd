import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wtc.abelian import (
    FgAbGroup,
    GroupHom,
    canonical_sqrt,
    direct_sum,
    hom_analyze,
    integer_kernel,
    integer_solve,
    mat_mul,
    mat_vec,
    minors_gcd_invariants,
    mod2_reduction,
    smith_normal_form,
    solve_linear,
    sqrt_solutions,
    subgroup_from_elements,
    two_torsion,
    verify_short_exact,
)
from wtc.errors import IllFormedHom


def snf_check(mat):
    diag, u, uinv, v, vinv = smith_normal_form(mat)
    m, n = len(mat), len(mat[0]) if mat else 0
    # U
    prod = mat_mul(mat_mul(u, [list(r) for r in mat]), v)
    for i in range(m):
        for j in range(n):
            expect = diag[i] if i == j and i < len(diag) else 0
            assert prod[i][j] == expect
    # unimodularity via tracked inverses
    assert mat_mul(u, uinv) == [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    assert mat_mul(vinv, v) == [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    # divisibility chain, zeros last
    nz = [d for d in diag if d]
    for a, b in zip(nz, nz[1:]):
        assert b % a == 0
    assert diag == nz + [0] * (len(diag) - len(nz))
    return diag


def test_snf_examples():
    # oracle for the nontrivial case: gcds of k x k minors
    assert snf_check([[2, 4], [6, 8]]) == minors_gcd_invariants([[2, 4], [6, 8]]) == [2, 4]
    assert snf_check([[1]]) == [1]
    assert snf_check([[0]]) == [0]


@settings(max_examples=150, deadline=None)
@given(
    st.integers(1, 4),
    st.integers(1, 4),
    st.data(),
)
def test_snf_random_vs_minors_oracle(m, n, data):
    mat = [
        [data.draw(st.integers(-9, 9)) for _ in range(n)] for _ in range(m)
    ]
    diag = snf_check(mat)
    assert diag == minors_gcd_invariants(mat)


def test_snf_stress_pathological_shapes():
    rng = random.Random(424242)
    for _ in range(400):
        m, n = rng.randint(1, 5), rng.randint(1, 5)
        style = rng.random()
        if style < 0.25:
            mat = [[rng.choice([0, 0, 2, 4, -6, 8]) for _ in range(n)] for _ in range(m)]
        elif style < 0.5:
            mat = [[rng.randint(-30, 30) for _ in range(n)] for _ in range(m)]
        elif style < 0.6:
            row = [rng.randint(-9, 9) for _ in range(n)]
            mat = [list(row) for _ in range(m)]
        else:
            mat = [
                [rng.randint(-4, 4) * rng.randint(0, 1) for _ in range(n)]
                for _ in range(m)
            ]
        diag = snf_check(mat)
        small = max((abs(x) for r in mat for x in r), default=0) <= 12
        if m <= 4 and n <= 4 and small:
            assert diag == minors_gcd_invariants(mat)
        for col in integer_kernel(mat):
            assert all(v == 0 for v in mat_vec(mat, col))


def test_hnf_coset_reduction_is_canonical():
    from wtc.abelian import column_hnf, reduce_mod_lattice

    rng = random.Random(7171)
    for _ in range(300):
        n = rng.randint(1, 5)
        k = rng.randint(0, 4)
        cols = [[rng.randint(-6, 6) for _ in range(n)] for _ in range(k)]
        hnf = column_hnf(cols, n)
        x = [rng.randint(-20, 20) for _ in range(n)]
        shifted = list(x)
        for col in cols:
            c = rng.randint(-3, 3)
            shifted = [a + c * b for a, b in zip(shifted, col)]
        r1 = reduce_mod_lattice(hnf, x)
        r2 = reduce_mod_lattice(hnf, shifted)
        assert r1 == r2
        if cols:
            diff = [a - b for a, b in zip(x, r1)]
            matc = [[cols[j][i] for j in range(k)] for i in range(n)]
            assert integer_solve(matc, diff) is not None
        else:
            assert r1 == x


def test_snf_idempotent_on_diagonal():
    diag, *_ = smith_normal_form([[2, 0], [0, 4]])
    assert diag == [2, 4]
    diag2, *_ = smith_normal_form([[d if i == j else 0 for j in range(2)] for i, d in enumerate(diag)])
    assert diag2 == diag


def test_integer_solve_and_kernel():
    mat = [[2, 4], [6, 8]]
    x = integer_solve(mat, [2, 6])
    assert x is not None and mat[0][0] * x[0] + mat[0][1] * x[1] == 2
    assert integer_solve([[2]], [1]) is None
    ker = integer_kernel([[2, -4]])
    assert len(ker) == 1 and ker[0][0] * 2 - 4 * ker[0][1] == 0 and any(ker[0])


# ---------------------------------------------------------------------------
# groups


def test_group_presentations():
    z = FgAbGroup((), ngens=1)
    assert z.invariants == (0,)
    z2 = FgAbGroup([[2]])
    assert z2.invariants == (2,)
    # [[0]] presents Z
    assert FgAbGroup([[0]]).invariants == (0,)
    g = FgAbGroup([[2, 4], [6, 8]])
    assert g.invariants == (2, 4)
    assert g.order() == 8


def test_from_presentation_roundtrip():
    g = FgAbGroup([[2, 4], [6, 8]])
    for pres in itertools.product(range(-3, 4), repeat=2):
        el = g.from_presentation(list(pres))
        lift = g.lift_to_presentation(el)
        assert g.from_presentation(lift) == el


def test_element_arithmetic():
    g = FgAbGroup.from_invariants([4])
    a = g.element([3])
    assert (a + a).coords == (2,)
    assert (-a).coords == (1,)
    assert (2 * a).coords == (2,)


def test_hom_well_defined():
    z2 = FgAbGroup.from_invariants([2])
    z4 = FgAbGroup.from_invariants([4])
    GroupHom(z2, z4, [[2]])  # 2*2 = 4 = 0 mod 4: fine
    with pytest.raises(IllFormedHom):
        GroupHom(z2, z4, [[1]])  # 2*1 = 2 != 0 mod 4


def test_hom_analyze_doubling():
    z = FgAbGroup((), ngens=1)
    doubling = GroupHom(z, z, [[2]])
    ana = hom_analyze(doubling)
    assert ana.kernel.is_trivial()
    assert ana.cokernel.invariants == (2,)


def test_hom_analyze_zero_map_to_z2():
    z = FgAbGroup((), ngens=1)
    z2 = FgAbGroup.from_invariants([2])
    zero = GroupHom(z, z2, [[0]])
    ana = hom_analyze(zero)
    assert ana.cokernel.invariants == (2,)
    assert ana.image.is_trivial()


def test_hom_analyze_inclusion_into_sum():
    # e -> (e, 0) in Z + Z/2; cokernel computed from stacked relations.
    # canonical coordinates are (torsion, free), so the free column is [0, 1].
    tgt = FgAbGroup.from_invariants([0, 2])
    assert tgt.invariants == (2, 0)
    z = FgAbGroup((), ngens=1)
    incl = GroupHom(z, tgt, [[0, 1]])
    ana = hom_analyze(incl)
    assert ana.kernel.is_trivial()
    assert ana.cokernel.invariants == (2,)


def test_two_torsion():
    g = FgAbGroup.from_invariants([0, 4])
    assert g.invariants == (4, 0)
    tor, incl = two_torsion(g)
    assert tor.invariants == (2,)
    el = incl.apply(tor.generators()[0])
    assert el.coords == (2, 0)
    assert two_torsion(FgAbGroup.from_invariants([3]))[0].is_trivial()
    whole, _ = two_torsion(FgAbGroup.from_invariants([2, 2]))
    assert whole.order() == 4


def test_mod2_reduction():
    space, red = mod2_reduction(FgAbGroup((), ngens=1))
    assert space.dim == 1
    assert mod2_reduction(FgAbGroup.from_invariants([3]))[0].dim == 0
    g = FgAbGroup.from_invariants([4])
    space4, red4 = mod2_reduction(g)
    assert space4.dim == 1
    assert red4(g.element([3])) == (1,)


def test_solve_linear_z4():
    g = FgAbGroup.from_invariants([4])
    doubling = GroupHom(g, g, [[2]])
    res = solve_linear(doubling, g.element([2]))
    assert res is not None
    sol, ker, _ = res
    # solutions are {1, 3}: canonical is 1, via exhaustive check
    all_solutions = sorted(
        e.coords for e in g.elements() if doubling.apply(e) == g.element([2])
    )
    assert all_solutions == [(1,), (3,)]
    assert sol.coords == (1,)
    assert ker.order() == 2


def test_solve_linear_parity_and_free():
    z = FgAbGroup((), ngens=1)
    doubling = GroupHom(z, z, [[2]])
    assert solve_linear(doubling, z.element([1])) is None
    res = solve_linear(doubling, z.element([6]))
    assert res is not None and res[0].coords == (3,)


def test_sqrt_solutions():
    g = FgAbGroup.from_invariants([0, 2])  # canonical coords: (Z/2, Z)
    sols = sqrt_solutions(g, g.element([0, 4]))
    assert [s.coords for s in sols] == [(0, 2), (1, 2)]
    assert canonical_sqrt(g, g.element([0, 1])) is None


def test_verify_short_exact_identity():
    z2 = FgAbGroup.from_invariants([2])
    triv = FgAbGroup.trivial()
    f = GroupHom(triv, z2, [])
    g = GroupHom.identity(z2)
    rep = verify_short_exact(f, g)
    assert rep.exact


def test_verify_short_exact_inclusion_projection():
    a = FgAbGroup.from_invariants([2])
    b = FgAbGroup.from_invariants([2, 2])
    c = FgAbGroup.from_invariants([2])
    f = GroupHom(a, b, [[1, 0]])
    g = GroupHom(b, c, [[0], [1]])
    assert verify_short_exact(f, g).exact


def test_verify_short_exact_failure_witness():
    # composite g∘f is nonzero: report a witness element
    a = FgAbGroup.from_invariants([2])
    b = FgAbGroup.from_invariants([2])
    f = GroupHom.identity(a)
    g = GroupHom.identity(b)
    # same group objects so compose works: use b = a
    rep = verify_short_exact(GroupHom.identity(a), GroupHom.identity(a))
    assert not rep.composite_zero
    assert rep.composite_witness is not None


def test_direct_sum():
    g1 = FgAbGroup.from_invariants([2])
    g2 = FgAbGroup((), ngens=1)
    s, injs, projs = direct_sum([g1, g2])
    assert sorted(d for d in s.invariants) == [0, 2]
    el = injs[0].apply(g1.generators()[0])
    assert projs[0].apply(el) == g1.generators()[0]
    assert projs[1].apply(el).is_zero()


def test_subgroup_from_elements():
    g = FgAbGroup.from_invariants([8])
    sub, incl = subgroup_from_elements(g, [g.element([2])])
    assert sub.invariants == (4,)
    assert incl.apply(sub.generators()[0]) in (g.element([2]), g.element([6]))


# exhaustive consistency on small torsion groups: |ker| * |im| = |G|
@pytest.mark.parametrize(
    "invariants", [(2,), (3,), (4,), (2, 2), (2, 4), (8,), (6,), (2, 2, 2)]
)
def test_hom_analyze_counting_exhaustive(invariants):
    rng = random.Random(20240811)
    src = FgAbGroup.from_invariants(list(invariants))
    tgt = FgAbGroup.from_invariants([4, 2])
    for _ in range(10):
        cols = []
        ok = True
        for d in src.invariants:
            # a well-defined random column: each entry multiple of tgt_inv/gcd
            col = []
            for e in tgt.invariants:
                step = e // __import__("math").gcd(e, d) if e else 1
                col.append(step * rng.randrange(0, 4))
            cols.append(col)
        try:
            hom = GroupHom(src, tgt, cols)
        except IllFormedHom:
            ok = False
        if not ok:
            continue
        ana = hom_analyze(hom)
        image_elements = {hom.apply(e) for e in src.elements()}
        kernel_elements = [e for e in src.elements() if hom.apply(e).is_zero()]
        assert ana.image.order() == len(image_elements)
        assert ana.kernel.order() == len(kernel_elements)
        assert ana.kernel.order() * ana.image.order() == src.order()
        assert ana.cokernel.order() == tgt.order() // len(image_elements)


@settings(max_examples=80, deadline=None)
@given(st.data())
def test_solve_linear_vs_bruteforce(data):
    invs = data.draw(
        st.lists(st.sampled_from([2, 3, 4, 6]), min_size=1, max_size=2)
    )
    src = FgAbGroup.from_invariants(invs)
    tgt = FgAbGroup.from_invariants([4])
    cols = []
    for d in src.invariants:
        step = 4 // __import__("math").gcd(4, d)
        cols.append([step * data.draw(st.integers(0, 3))])
    hom = GroupHom(src, tgt, cols)
    target = tgt.element([data.draw(st.integers(0, 3))])
    brute = sorted(
        e.coords for e in src.elements() if hom.apply(e) == target
    )
    res = solve_linear(hom, target)
    if not brute:
        assert res is None
    else:
        assert res is not None
        assert res[0].coords in brute
        # canonical representative: smallest in the solution set
        assert res[0].coords == brute[0]


def test_basis_change_commutes_with_torsion_and_mod2():
    # the same group presented through a randomized unimodular change of
    # relations must give isomorphic two_torsion and mod2 data
    rng = random.Random(7)
    base_rel = [[2, 4], [6, 8]]
    g = FgAbGroup(base_rel)
    for _ in range(10):
        rel = [list(r) for r in base_rel]
        for _ in range(6):
            i, j = rng.randrange(2), rng.randrange(2)
            if i != j:
                c = rng.randint(-2, 2)
                rel[i] = [a + c * b for a, b in zip(rel[i], rel[j])]
        h = FgAbGroup(rel)
        assert h.invariants == g.invariants
        assert two_torsion(h)[0].invariants == two_torsion(g)[0].invariants
        assert mod2_reduction(h)[0].dim == mod2_reduction(g)[0].dim
