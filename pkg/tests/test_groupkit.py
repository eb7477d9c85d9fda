import numpy as np
import pytest

from polymod.coxeter import parse_symbol, reduce_generators, reduce_matrix, \
    cartan_data, reflection_generators
from polymod.errors import BudgetExceeded, NotCorankOne, NotInvariant
from polymod.groupkit import (
    MatrixGroup,
    batch_mul,
    canonical_mat,
    closure,
    decode,
    element_order,
    encode,
    extends_to_automorphism,
    from_array,
    intersect,
    mat_identity,
    mat_mul,
    mat_scalar,
    mat_to_bytes,
    orbit,
    projectivize,
    py_encode,
    quotient_by_radical_action,
    scalars_in_group,
    subgroup,
    to_array,
    vec_mat,
)
from polymod.rings import (
    IdealSpec,
    QuadInt,
    SQRT5,
    gauss_residue_ring,
    integers_mod,
    prime_field,
    quad_field,
    tau_residue_ring,
)


def _reduced(symbol, ring):
    gens, _ = reduce_generators(reflection_generators(parse_symbol(symbol)),
                                ring)
    return gens


class TestEncoding:
    @pytest.mark.parametrize("ring", [
        prime_field(7), integers_mod(6), quad_field(3),
        gauss_residue_ring(IdealSpec("full", m=3)), integers_mod(300),
    ])
    def test_py_encode_matches_numpy(self, ring):
        import random
        rng = random.Random(7)
        elems = list(ring.elements()) if ring.order <= 400 else \
            [ring.from_int(rng.randrange(10 ** 6)) for _ in range(50)]
        M = tuple(tuple(rng.choice(elems) for _ in range(3)) for _ in range(3))
        arr = to_array(ring, [M])
        assert py_encode(ring, M) == encode(ring, arr)[0].tobytes()
        back = from_array(ring, decode(ring, encode(ring, arr), 3)[0])
        assert back == M

    def test_batch_mul_matches_python(self):
        ring = quad_field(3)
        gens = _reduced("[3,5,3]", tau_residue_ring(QuadInt(2)))
        ring2 = tau_residue_ring(QuadInt(2))
        A, B = gens[0], gens[1]
        want = mat_mul(ring2, A, B)
        got = from_array(ring2, batch_mul(ring2, to_array(ring2, [A]),
                                          to_array(ring2, [B])[0])[0])
        assert got == want


class TestClosure:
    def test_small_orders(self):
        ring = prime_field(7)
        assert len(closure(_reduced("[3,3]", ring), ring)) == 24
        assert len(closure(_reduced("[4]", ring), ring)) == 8
        assert len(closure(_reduced("[3,3,3]", ring), ring)) == 120

    def test_spherical_composite_modulus(self):
        ring = integers_mod(6)
        assert len(closure(_reduced("[3,3]", ring), ring)) == 24

    def test_paper_orders(self, G353_sqrt5, G353_mod2):
        assert len(G353_sqrt5) == 15600
        assert len(G353_mod2) == 8160

    def test_rank3_subgroups_fixed(self, G353_sqrt5):
        assert len(subgroup(G353_sqrt5, [1, 2, 3])) == 120
        assert len(subgroup(G353_sqrt5, [0, 1, 2])) == 120
        assert len(subgroup(G353_sqrt5, [0, 1])) == 6
        assert len(subgroup(G353_sqrt5, [])) == 1

    def test_generator_permutation_determinism(self, ring_sqrt5):
        gens = _reduced("[3,5,3]", ring_sqrt5)
        a = closure(gens, ring_sqrt5)
        b = closure(list(reversed(gens)), ring_sqrt5)
        assert np.array_equal(a.enc, b.enc)

    def test_budget(self, ring_sqrt5):
        gens = _reduced("[3,5,3]", ring_sqrt5)
        with pytest.raises(BudgetExceeded) as ei:
            closure(gens, ring_sqrt5, cap=1000)
        assert 1000 < ei.value.partial_count <= 16000

    def test_lagrange(self, G353_sqrt5):
        for idx in ([0], [0, 1], [1, 2, 3], [0, 2], [0, 1, 2]):
            assert len(G353_sqrt5) % len(subgroup(G353_sqrt5, idx)) == 0

    def test_form_preserved_by_all_elements(self, G353_sqrt5, ring_sqrt5,
                                            d353):
        B2 = reduce_matrix(cartan_data(d353).B2, ring_sqrt5)
        B = np.array(B2, dtype=np.int64)
        arr = G353_sqrt5.decode_all()
        lhs = np.einsum("nji,jk,nkl->nil", arr, B, arr) % ring_sqrt5.d
        assert (lhs == B).all()

    def test_contains(self, G353_sqrt5, ring_sqrt5):
        gens = _reduced("[3,5,3]", ring_sqrt5)
        assert gens[0] in G353_sqrt5
        assert mat_mul(ring_sqrt5, gens[0], gens[1]) in G353_sqrt5
        bogus = tuple(tuple(ring_sqrt5.from_int(i + j) for j in range(4))
                      for i in range(4))
        assert bogus not in G353_sqrt5

    def test_summary_json(self, G353_sqrt5):
        js = G353_sqrt5.to_json()
        assert js["order"] == 15600 and js["dimension"] == 4
        assert len(js["generators"]) == 4

    def test_element_dump(self, G353_sqrt5, tmp_path):
        path = tmp_path / "elems.bin"
        small = subgroup(G353_sqrt5, [0, 1])
        small.dump_elements(path)
        assert path.stat().st_size == 6 * small.enc.shape[1]


class TestElementOrder:
    def test_identity(self, ring_sqrt5):
        assert element_order(mat_identity(ring_sqrt5, 4), ring_sqrt5) == 1

    def test_r0r1r2_period_10(self, ring_sqrt5):
        gens = _reduced("[3,5,3]", ring_sqrt5)
        w = mat_mul(ring_sqrt5, mat_mul(ring_sqrt5, gens[0], gens[1]), gens[2])
        assert element_order(w, ring_sqrt5) == 10


class TestIntersect:
    def test_self_intersection(self, G353_sqrt5):
        sub = subgroup(G353_sqrt5, [0, 1])
        assert intersect(sub, sub).same_elements(sub)

    def test_353_middle(self, G353_sqrt5):
        G0 = subgroup(G353_sqrt5, [1, 2, 3])
        G3 = subgroup(G353_sqrt5, [0, 1, 2])
        mid = subgroup(G353_sqrt5, [1, 2])
        inter = intersect(G0, G3)
        assert len(inter) == 10
        assert inter.same_elements(mid)
        # commutative and idempotent
        assert intersect(G3, G0).same_elements(inter)
        assert intersect(inter, inter).same_elements(inter)


class TestOrbit:
    def test_zero_vector(self, ring_sqrt5):
        gens = _reduced("[3,5,3]", ring_sqrt5)
        z = tuple(ring_sqrt5.zero() for _ in range(4))
        assert orbit(z, gens, ring_sqrt5) == [z]

    def test_mu0_orbit_12_char0_and_modular(self, gens353):
        # characteristic-0 oracle, exact Z[tau] arithmetic
        start = (QuadInt(1), QuadInt(0), QuadInt(0), QuadInt(0))
        seen = {start}
        frontier = [start]
        while frontier:
            nxt = []
            for v in frontier:
                for M in gens353[:3]:
                    u = tuple(sum((v[k] * M[k][j] for k in range(4)),
                                  QuadInt(0)) for j in range(4))
                    if u not in seen:
                        seen.add(u)
                        nxt.append(u)
            frontier = nxt
        assert len(seen) == 12
        for pi in (SQRT5, QuadInt(2), QuadInt(3), QuadInt(-2, -5)):
            ring = tau_residue_ring(pi)
            red, _ = reduce_generators(gens353, ring)
            v = tuple(ring.from_int(x) for x in (1, 0, 0, 0))
            assert len(orbit(v, red[:3], ring)) == 12

    def test_orbit_size_divides_group_order(self, G353_mod2, ring_mod2):
        gens = _reduced("[3,5,3]", ring_mod2)
        v = tuple(ring_mod2.from_int(x) for x in (1, 0, 0, 0))
        size = len(orbit(v, gens, ring_mod2))
        assert len(G353_mod2) % size == 0


class TestProjective:
    def test_scalar_group_alone(self):
        ring = prime_field(5)
        gens = [mat_scalar(ring, ring.from_int(2), mat_identity(ring, 2))]
        P = projectivize(gens, ring)
        assert len(P) == 1

    def test_scalars_in_group(self, G353_sqrt5, ring_sqrt5):
        # -I has nonsquare spinor norm in O1(4,5,-1), so only 1 remains
        assert scalars_in_group(G353_sqrt5) == [1]
        neg = mat_scalar(ring_sqrt5, ring_sqrt5.from_int(-1),
                         mat_identity(ring_sqrt5, 4))
        G = closure([neg], ring_sqrt5)
        assert sorted(scalars_in_group(G)) == [1, 4]

    def test_projective_order_scalar_invariance(self):
        ring = gauss_residue_ring(IdealSpec("principal", b=1, c=2))
        from polymod.mobius import mobius_spec
        gens = list(mobius_spec(IdealSpec("principal", b=1, c=2)).generators)
        P = projectivize(gens, ring)
        assert len(P) == 120
        assert P.linear_order == len(P) * len(P.scalars)


class TestRadicalQuotient:
    def test_nonsingular_gives_identity_quotient(self, G353_sqrt5):
        img, ker = quotient_by_radical_action(G353_sqrt5, [])
        assert img is G353_sqrt5 and ker == 1

    def test_11cell_numbers(self, gens353):
        ring = tau_residue_ring(QuadInt(-2, -5))
        red, _ = reduce_generators(gens353, ring)
        c = tuple(ring.from_int(x) for x in (7, 3, 2, 1))
        G = MatrixGroup.from_generators(red, ring)
        img, ker = quotient_by_radical_action(G, [c])
        assert len(img) == 660
        assert ker is None  # group was not enumerated
        assert sorted(img.scalars) == [1, 10]

    def test_not_invariant(self, G353_sqrt5, ring_sqrt5):
        v = tuple(ring_sqrt5.from_int(x) for x in (1, 0, 0, 0))
        with pytest.raises(NotInvariant):
            quotient_by_radical_action(G353_sqrt5, [v])

    def test_corank_two_rejected(self, G353_sqrt5, ring_sqrt5):
        v = tuple(ring_sqrt5.from_int(x) for x in (1, 0, 0, 0))
        w = tuple(ring_sqrt5.from_int(x) for x in (0, 1, 0, 0))
        with pytest.raises(NotCorankOne):
            quotient_by_radical_action(G353_sqrt5, [v, w])


class TestAutomorphismExtension:
    def test_identity_map(self):
        ring = prime_field(5)
        gens = _reduced("[3,3]", ring)
        G = closure(gens, ring)
        assert extends_to_automorphism(G, list(G.generators))

    def test_diagram_flip_of_a3(self):
        ring = prime_field(5)
        gens = _reduced("[3,3]", ring)
        G = closure(gens, ring)
        assert extends_to_automorphism(G, list(reversed(G.generators)))

    def test_bad_images_rejected(self):
        ring = prime_field(5)
        gens = _reduced("[3,3]", ring)
        G = closure(gens, ring)
        # r0 -> r0, r1 -> r0, r2 -> r2 breaks the braid relation
        assert not extends_to_automorphism(G, [gens[0], gens[0], gens[2]])

    def test_non_injective_rejected(self):
        # mapping both generators of a 2x2 dihedral onto one of them
        ring = prime_field(7)
        gens = _reduced("[4]", ring)
        G = closure(gens, ring)
        assert not extends_to_automorphism(G, [gens[0], gens[0]])

    def test_numpy_path_matches_python(self, G353_sqrt5):
        # force the block-diagonal path on a medium group
        import polymod.groupkit as gk
        images = list(reversed(G353_sqrt5.generators))
        want = extends_to_automorphism(G353_sqrt5, images)
        got = gk._extends_numpy(G353_sqrt5, images)
        assert want is True and got is True
        bad = [G353_sqrt5.generators[0]] * 3 + [G353_sqrt5.generators[3]]
        assert gk._extends_numpy(G353_sqrt5, bad) is False


def test_canonicalization_scalar_order_invariance(ring_sqrt5):
    # the canonical representative is a min over scalar multiples, so the
    # listing order of the scalars cannot matter
    import itertools
    from polymod.groupkit import canonicalize_batch
    gens = _reduced("[3,5,3]", ring_sqrt5)
    arr = to_array(ring_sqrt5, gens)
    scalars = [1, 2, 3, 4]
    _, base = canonicalize_batch(ring_sqrt5, arr, scalars)
    for perm in itertools.permutations(scalars):
        _, enc = canonicalize_batch(ring_sqrt5, arr, list(perm))
        assert np.array_equal(base, enc)
