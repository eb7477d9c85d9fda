import numpy as np
import pytest

from polymod.coxeter import cartan_data, parse_symbol, reduce_generators, \
    reduce_matrix, reflection_generators
from polymod.errors import (
    Char2Unsupported,
    DiscriminantPrime,
    HypothesisNotMet,
    IsotropicRoot,
    NotApplicable,
    OddCharRequired,
    UnsupportedFormula,
)
from polymod.groupkit import closure, intersect, subgroup
from polymod.ortho import (
    DISC_353,
    EPSILON_MOD55,
    analyze_form,
    epsilon_353,
    epsilon_conjugate_product,
    identify_group,
    order_formula,
    predict_intersection,
    psl2_order,
    root_reflection,
    spinor_class,
)
from polymod.rings import (
    QuadInt,
    SQRT5,
    legendre,
    legendre_tau,
    prime_field,
    primes_below,
    tau_primes_over,
    tau_residue_ring,
)


def _b2(symbol, ring):
    return reduce_matrix(cartan_data(parse_symbol(symbol)).B2, ring)


class TestAnalyzeForm:
    def test_353_radical_at_delta(self):
        ring = tau_residue_ring(QuadInt(-2, -5))
        fa = analyze_form(_b2("[3,5,3]", ring), ring)
        assert fa.corank == 1 and fa.disc_class == "zero"
        # the radical is spanned by 7b0 + 3b1 + 2b2 + b3
        (v,) = fa.radical_basis
        lam = ring.mul(v[0], ring.inv(ring.from_int(7)))
        want = tuple(ring.mul(lam, ring.from_int(x)) for x in (7, 3, 2, 1))
        assert v == want

    def test_353_epsilons(self):
        ring5 = tau_residue_ring(SQRT5)
        fa = analyze_form(_b2("[3,5,3]", ring5), ring5)
        assert fa.epsilon == -1 and fa.witt_index == 1
        ring9 = tau_residue_ring(QuadInt(3))
        fa9 = analyze_form(_b2("[3,5,3]", ring9), ring9)
        assert fa9.epsilon == 1 and fa9.witt_index == 2
        ring11 = tau_residue_ring(QuadInt(-7, 5))
        fa11 = analyze_form(_b2("[3,5,3]", ring11), ring11)
        assert fa11.epsilon == -1 and fa11.witt_index == 1

    def test_3oo_disc_is_minus_one(self):
        ring = prime_field(7)
        fa = analyze_form(_b2("[3,oo]", ring), ring)
        minus_one_class = "square" if legendre(-1, 7) == 1 else "nonsquare"
        assert fa.disc_class == minus_one_class
        assert fa.epsilon == 0 and fa.rank == 3

    def test_char2_rejected(self):
        ring = tau_residue_ring(QuadInt(2))
        with pytest.raises(Char2Unsupported):
            analyze_form(_b2("[3,5,3]", ring), ring)

    def test_composite_rejected(self):
        from polymod.rings import integers_mod
        ring = integers_mod(15)
        with pytest.raises(NotApplicable):
            analyze_form(_b2("[3,3]", ring), ring)

    def test_basis_independence(self):
        ring = prime_field(11)
        B2 = _b2("[3,3,oo]", ring)
        fa = analyze_form(B2, ring)
        rng = np.random.default_rng(5)
        found = 0
        while found < 5:
            P = rng.integers(0, 11, size=(4, 4))
            if round(np.linalg.det(P)) % 11 == 0:
                continue
            found += 1
            Pm = [[int(x) for x in row] for row in P]
            B2p = [[sum(Pm[k][i] * B2[k][l] * Pm[l][j]
                        for k in range(4) for l in range(4)) % 11
                    for j in range(4)] for i in range(4)]
            fb = analyze_form(B2p, ring)
            assert (fb.rank, fb.disc_class, fb.epsilon, fb.witt_index) == \
                (fa.rank, fa.disc_class, fa.epsilon, fa.witt_index)

    def test_witt_index_vs_epsilon_rule(self):
        # independent paths: disc rule vs isotropic search
        cases = [(SQRT5,), (QuadInt(3),), (QuadInt(-7, 5),), (QuadInt(7),)]
        for (pi,) in cases:
            ring = tau_residue_ring(pi)
            fa = analyze_form(_b2("[3,5,3]", ring), ring)
            assert fa.epsilon in (1, -1)
            assert fa.witt_index == (2 if fa.epsilon == 1 else 1)


class TestOrderFormulas:
    def test_paper_orders(self):
        assert order_formula("O1", 4, 5, -1) == 15600
        assert order_formula("O1", 4, 11, -1) == 1771440
        assert order_formula("O1", 4, 9, 1) == 518400
        assert order_formula("OHat1", 4, 11) == 1756920
        assert order_formula("O", 4, 4, -1) == 8160

    def test_O_is_twice_O1(self):
        for n, q, e in [(3, 5, None), (3, 7, None), (4, 5, -1), (4, 9, 1),
                        (2, 5, 1)]:
            assert order_formula("O", n, q, e) == 2 * order_formula("O1", n, q, e)

    def test_unsupported(self):
        with pytest.raises(UnsupportedFormula):
            order_formula("O", 5, 5, 1)
        with pytest.raises(UnsupportedFormula):
            order_formula("O", 4, 5, None)

    @pytest.mark.parametrize("q", [3, 5, 7])
    def test_rank3_formula_matches_reflection_closure(self, q):
        # oracle: close the group generated by all reflections of a
        # nonsingular ternary form
        ring = prime_field(q)
        B2 = _b2("[3,3]", ring)
        refl, square_refl = [], []
        vecs = [(a, b, c) for a in range(q) for b in range(q) for c in range(q)
                if (a, b, c) != (0, 0, 0)]
        for v in vecs:
            w = tuple(ring.from_int(x) for x in v)
            try:
                R = root_reflection(B2, ring, w)
            except IsotropicRoot:
                continue
            refl.append(R)
            if spinor_class(w, B2, ring) == "square":
                square_refl.append(R)
        O = closure(refl, ring)
        O1 = closure(square_refl, ring)
        assert len(O) == order_formula("O", 3, q)
        assert len(O1) == order_formula("O1", 3, q)

    def test_rank4_formula_matches_known_closure(self, G353_sqrt5):
        assert len(G353_sqrt5) == order_formula("O1", 4, 5, -1)

    def test_psl2(self):
        assert psl2_order(11) == 660
        assert psl2_order(19) == 3420
        assert psl2_order(9) == 360
        assert psl2_order(17) == 2448


class TestSpinor:
    def test_353_labels_all_square(self):
        for pi in (SQRT5, QuadInt(3), QuadInt(-7, 5)):
            ring = tau_residue_ring(pi)
            B2 = _b2("[3,5,3]", ring)
            for i in range(4):
                e = tuple(ring.from_int(1 if j == i else 0) for j in range(4))
                assert spinor_class(e, B2, ring) == "square"

    def test_label4_square_mod7(self):
        ring = prime_field(7)
        B2 = _b2("[3,oo]", ring)
        e2 = tuple(ring.from_int(1 if j == 2 else 0) for j in range(3))
        assert spinor_class(e2, B2, ring) == "square"

    def test_isotropic_root_raises(self):
        ring = tau_residue_ring(QuadInt(-2, -5))
        B2 = _b2("[3,5,3]", ring)
        rad = tuple(ring.from_int(x) for x in (7, 3, 2, 1))
        with pytest.raises(IsotropicRoot):
            spinor_class(rad, B2, ring)

    def test_even_products_of_nonsquare_reflections_land_in_O1(self):
        ring = prime_field(5)
        B2 = _b2("[3,3]", ring)
        nonsq = []
        for v in [(a, b, c) for a in range(5) for b in range(5)
                  for c in range(5)][1:]:
            w = tuple(ring.from_int(x) for x in v)
            try:
                if spinor_class(w, B2, ring) == "nonsquare":
                    nonsq.append(root_reflection(B2, ring, w))
            except IsotropicRoot:
                continue
        sq = []
        for v in [(a, b, c) for a in range(5) for b in range(5)
                  for c in range(5)][1:]:
            w = tuple(ring.from_int(x) for x in v)
            try:
                if spinor_class(w, B2, ring) == "square":
                    sq.append(root_reflection(B2, ring, w))
            except IsotropicRoot:
                continue
        O1 = closure(sq, ring)
        from polymod.groupkit import mat_mul
        for i in range(0, min(len(nonsq), 6), 2):
            assert mat_mul(ring, nonsq[i], nonsq[i + 1]) in O1


class TestIdentify:
    def test_353_mod2_char2_path(self, G353_mod2, d353):
        lab = identify_group(G353_mod2, None, d353, periods=(3, 5, 3))
        assert lab.name == "O(4,4,-1)" and lab.kind == "O"
        assert lab.predicted_order == 8160

    def test_353_sqrt5(self, G353_sqrt5, d353, ring_sqrt5):
        fa = analyze_form(_b2("[3,5,3]", ring_sqrt5), ring_sqrt5)
        lab = identify_group(G353_sqrt5, fa, d353, periods=(3, 5, 3))
        assert lab.name == "O1(4,5,-1)"

    def test_33oo_mod3_is_s5(self):
        d = parse_symbol("[3,3,oo]")
        ring = prime_field(3)
        red, _ = reduce_generators(reflection_generators(d), ring)
        G = closure(red, ring)
        fa = analyze_form(_b2("[3,3,oo]", ring), ring)
        lab = identify_group(G, fa, d, periods=(3, 3, 3))
        assert len(G) == 120
        assert "S5" in lab.name and lab.kind == "spherical"

    def test_3oo_mod5_prefers_orthogonal_records_h3(self):
        d = parse_symbol("[3,oo]")
        ring = prime_field(5)
        red, _ = reduce_generators(reflection_generators(d), ring)
        G = closure(red, ring)
        fa = analyze_form(_b2("[3,oo]", ring), ring)
        lab = identify_group(G, fa, d, periods=(3, 5))
        assert lab.name == "O1(3,5,0)"
        assert "H3" in lab.candidates

    def test_dihedral_matches_rank2_orthogonal(self):
        ring = prime_field(7)
        red, _ = reduce_generators(reflection_generators(parse_symbol("[4]")),
                                   ring)
        G = closure(red, ring)  # dihedral of order 8 = O1(2,7,-1)
        lab = identify_group(G, None, None, periods=None)
        assert lab.name == "O1(2,7,-1)"

    def test_unidentified(self):
        ring = prime_field(7)
        red, _ = reduce_generators(reflection_generators(parse_symbol("[4]")),
                                   ring)
        G = closure(red[:1], ring)  # order 2, matches nothing without periods
        lab = identify_group(G, None, None, periods=None)
        assert lab.kind == "unidentified"
        assert lab.candidates == ()


class TestEpsilon353:
    def test_examples(self):
        assert epsilon_353(QuadInt(3)) == 1
        assert epsilon_353(SQRT5) == -1
        assert epsilon_353(QuadInt(-7, 5)) == -1

    def test_errors(self):
        with pytest.raises(DiscriminantPrime):
            epsilon_353(QuadInt(-2, -5))
        with pytest.raises(OddCharRequired):
            epsilon_353(QuadInt(2))

    def test_associate_invariance(self):
        from polymod.rings import TAU
        for pi in (QuadInt(3), QuadInt(-7, 5), QuadInt(4, 3)):
            base = epsilon_353(pi)
            for u in (-QuadInt(1), TAU ** 2, -(TAU ** 4), TAU ** -2):
                assert epsilon_353(u * pi) == base

    def test_mod55_table(self):
        for p in primes_below(200):
            if p % 5 in (2, 3) and p > 2:
                want = 1 if p % 55 in EPSILON_MOD55[1] else -1
                assert p % 55 in EPSILON_MOD55[1] + EPSILON_MOD55[-1]
                assert epsilon_353(QuadInt(p)) == want

    def test_euler_path_agrees(self):
        for p in primes_below(60):
            if p % 5 in (2, 3) and p > 2:
                assert epsilon_353(QuadInt(p)) == \
                    legendre_tau(DISC_353, QuadInt(p))
        for q in primes_below(60):
            if q % 5 in (1, 4) and q != 11:
                pi, pic = tau_primes_over(q)
                assert epsilon_353(pi) == legendre_tau(DISC_353, pi)
                assert epsilon_353(pic) == legendre_tau(DISC_353, pic)

    def test_form_analysis_agrees_small_fields(self):
        # residue order <= 121: congruence forms vs diagonalization
        from polymod.rings import tau_associates

        mods = [SQRT5, QuadInt(3), QuadInt(7), QuadInt(-7, 5)]
        for q in (11, 19, 29, 31, 41):
            pi, pic = tau_primes_over(q)
            mods += [p for p in (pi, pic) if not tau_associates(p, DISC_353)]
        for pi in mods:
            ring = tau_residue_ring(pi)
            if ring.order > 121:
                continue
            fa = analyze_form(_b2("[3,5,3]", ring), ring)
            assert fa.epsilon == epsilon_353(pi)

    def test_conjugate_product(self):
        assert epsilon_conjugate_product(19) == -1
        assert epsilon_conjugate_product(31) == 1
        pi, pic = tau_primes_over(29)
        assert epsilon_353(pi) * epsilon_353(pic) == epsilon_conjugate_product(29)
        with pytest.raises(NotApplicable):
            epsilon_conjugate_product(11)
        with pytest.raises(NotApplicable):
            epsilon_conjugate_product(7)


class TestPredictor:
    def test_table(self):
        assert predict_intersection(False, False, False, False, "O", "O") == "O"
        assert predict_intersection(False, False, False, False, "O1", "O") == "O1"
        assert predict_intersection(False, False, False, True, "O", "O") == "OHat"
        assert predict_intersection(False, False, False, True, "O", "O1") == "OHat1"
        assert predict_intersection(False, True, False, False, "O1", "O",
                                    middle_kind="O") == "G_middle"
        assert predict_intersection(False, True, False, False, "O1", "O",
                                    middle_kind="O1",
                                    full_kind="O1") == "G_middle"

    def test_hypothesis_not_met(self):
        with pytest.raises(HypothesisNotMet):
            predict_intersection(False, False, False, False, "spherical", "O")
        with pytest.raises(HypothesisNotMet):
            predict_intersection(False, True, False, False, "O", "O",
                                 middle_kind="O1", full_kind="O")
        with pytest.raises(HypothesisNotMet):
            predict_intersection(True, True, False, True, "O", "O")

    def _analysis(self, B2, idx, ring):
        sub = [[B2[i][j] for j in idx] for i in idx]
        return analyze_form(sub, ring)

    def test_case_a_instance(self):
        # [oo,3,oo] mod 5: all three subspaces nonsingular, ends are O1
        d = parse_symbol("[oo,3,oo]")
        ring = prime_field(5)
        B2 = _b2("[oo,3,oo]", ring)
        fa_v = analyze_form(B2, ring)
        fa0 = self._analysis(B2, [1, 2, 3], ring)
        fa3 = self._analysis(B2, [0, 1, 2], ring)
        fam = self._analysis(B2, [1, 2], ring)
        assert fa_v.corank == 0 and fa0.corank == 0 and fa3.corank == 0 \
            and fam.corank == 0
        red, _ = reduce_generators(reflection_generators(d), ring)
        G0 = closure(red[1:], ring)
        G3 = closure(red[:-1], ring)

        def end_kind(G, fa, idx):
            h1 = order_formula("O1", 3, 5)
            if len(G) == 2 * h1:
                return "O"
            assert len(G) == h1
            labs = [parse_symbol("[oo,3,oo]").labels[i] for i in idx]
            classes = {legendre(x, 5) for x in labs}
            return "O1" if classes == {1} else "O2"

        k0 = end_kind(G0, fa0, [1, 2, 3])
        k3 = end_kind(G3, fa3, [0, 1, 2])
        predicted = predict_intersection(False, False, False, False, k0, k3)
        assert predicted in ("O", "O1")
        # oracle: construct the predicted group from reflections with roots
        # in span(b1, b2) and compare with the brute-force intersection
        roots = []
        for a in range(5):
            for b in range(5):
                if (a, b) == (0, 0):
                    continue
                w = tuple(ring.from_int(x) for x in (0, a, b, 0))
                try:
                    cls = spinor_class(w, B2, ring)
                except IsotropicRoot:
                    continue
                if predicted == "O" or cls == "square":
                    roots.append(root_reflection(B2, ring, w))
        want = closure(roots, ring)
        got = intersect(G0, G3)
        assert got.same_elements(want)

    def test_case_c_instance(self):
        # [3,4,4] mod 5: V0 is the euclidean [4,4] part (singular), the rest
        # nonsingular; prediction is G_middle, verified brute force
        d = parse_symbol("[3,4,4]")
        ring = prime_field(5)
        B2 = _b2("[3,4,4]", ring)
        fa_v = analyze_form(B2, ring)
        fa0 = self._analysis(B2, [1, 2, 3], ring)
        fa3 = self._analysis(B2, [0, 1, 2], ring)
        fam = self._analysis(B2, [1, 2], ring)
        assert fa0.corank >= 1 and fa_v.corank == 0 and fam.corank == 0
        assert fa3.corank == 0
        red, _ = reduce_generators(reflection_generators(d), ring)
        Gm = closure(red[1:-1], ring)
        h1 = order_formula("O1", 2, 5, fam.epsilon)
        if len(Gm) == 2 * h1:
            mk = "O"
        elif len(Gm) == h1:
            mk = "O1"
        else:
            pytest.skip("middle subgroup not of orthogonal type")
        predicted = predict_intersection(False, True, False, False, "O", "O",
                                         middle_kind=mk, full_kind=None
                                         if mk == "O" else "O1")
        assert predicted == "G_middle"
        G0 = closure(red[1:], ring)
        G3 = closure(red[:-1], ring)
        assert intersect(G0, G3).same_elements(Gm)
