"""The [4,4,3] Moebius construction over the Gaussian integers.

The three rotation generators are fixed 2x2 matrices over Z[i]; reduction
modulo an ideal (full:m or principal:b,c), projectivization by the scalars
actually present, and the chirality test give regular or chiral polytopes
with toroidal facets {4,4}_(b,c).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isqrt

from .cgroup import PolytopeReport, verify_rotation_group
from .errors import NotApplicable, RelationFailure
from .groupkit import (
    DEFAULT_BUDGET,
    MatrixGroup,
    element_order,
    mat_identity,
    mat_mul,
    mat_to_bytes,
    projectivize,
)
from .ortho import identify_group
from .rings import GaussInt, IdealSpec, RingSpec, gauss_ideal_self_conjugate, \
    gauss_residue_ring

TYPE_SYMBOL = "[4,4,3]"
PERIODS = (4, 4, 3)


def mobius_generators_443():
    """The matrices of the three rotations of [4,4,3]+ over Z[i]."""
    i = GaussInt(0, 1)
    one = GaussInt(1)
    zero = GaussInt(0)
    s1 = ((-i, zero), (zero, one))
    s2 = ((-i, i), (zero, one))
    s3 = ((one, -one), (one, zero))
    return [s1, s2, s3]


def toroidal_relation_matrix(b: int, c: int):
    """(s1^-1 s2)^b (s1 s2^-1)^c = [[1, -(b+ci)], [0, 1]]."""
    if (b, c) == (0, 0):
        raise NotApplicable("trivial toroidal relation")
    return ((GaussInt(1), GaussInt(-b, -c)), (GaussInt(0), GaussInt(1)))


def facet_parameters(J: IdealSpec) -> tuple[int, int]:
    """The nonnegative pair (b, c) of least norm with b+ci in J.

    Ties at equal norm go to the larger b, which picks (m, 0) for full
    ideals and the generator orientation for principal ones; the mirror
    pair (c, b) is the enantiomorphic form.
    """
    ring = gauss_residue_ring(J)
    best = None
    limit = ring.d * ring.d if ring.pair else ring.d
    for norm in range(1, limit + 1):
        hits = []
        for b in range(isqrt(norm) + 1):
            c2 = norm - b * b
            c = isqrt(c2)
            if c * c != c2:
                continue
            if ring.is_zero(ring.embed(GaussInt(b, c))):
                hits.append((b, c))
            if c != b and ring.is_zero(ring.embed(GaussInt(c, b))):
                hits.append((c, b))
        if hits:
            best = max(hits, key=lambda bc: bc[0])
            break
    assert best is not None
    return best


@dataclass(frozen=True)
class MobiusSpec:
    type_symbol: str
    ideal: IdealSpec
    ring: RingSpec
    generators: tuple


def _is_scalar(ring, M):
    n = len(M)
    lam = M[0][0]
    return M == tuple(tuple(lam if i == j else ring.zero() for j in range(n))
                      for i in range(n))


def mobius_spec(J: IdealSpec, budget: int = DEFAULT_BUDGET) -> MobiusSpec:
    """Reduced generators with the projective [4,4,3] relations verified.

    Each relation word of the rotation presentation must reduce to a scalar
    matrix (= the identity of the projective group).
    """
    ring = gauss_residue_ring(J)
    if ring.order < 3:
        raise NotApplicable("residue ring too small")
    gens = [tuple(tuple(ring.embed(x) for x in row) for row in M)
            for M in mobius_generators_443()]
    s1, s2, s3 = gens

    def power(M, k):
        out = mat_identity(ring, 2)
        for _ in range(k):
            out = mat_mul(ring, out, M)
        return out

    words = [power(s1, 4), power(s2, 4), power(s3, 3),
             power(mat_mul(ring, s1, s2), 2),
             power(mat_mul(ring, s2, s3), 2),
             power(mat_mul(ring, mat_mul(ring, s1, s2), s3), 2)]
    for k, w in enumerate(words):
        if not _is_scalar(ring, w):
            raise RelationFailure(f"projective relation {k} fails over "
                                  f"{ring.label}")
    return MobiusSpec(TYPE_SYMBOL, J, ring, tuple(gens))


def build_mobius_polytope(J: IdealSpec, budget: int = DEFAULT_BUDGET
                          ) -> PolytopeReport:
    """Reduce, projectivize, classify chiral vs directly regular."""
    spec = mobius_spec(J, budget)
    ring = spec.ring
    P = projectivize(list(spec.generators), ring, cap=budget)
    ok, kind, checks = verify_rotation_group(P.generators, PERIODS, ring,
                                             scalars=P.scalars, ambient=P,
                                             cap=budget)
    b, c = facet_parameters(J)

    rpt = PolytopeReport(group_symbol=TYPE_SYMBOL + "+", modulus=str(J),
                         ring_label=ring.label)
    rpt.budget = {"cap": budget, "exceeded": False, "partial": None}
    rpt.order = len(P)
    rpt.schlafli = PERIODS
    rpt.kind = kind
    rpt.facet = (b, c)
    rpt.facet_mirror = (c, b)
    rpt.is_cgroup = None  # rotation pipeline; reported via intersection checks
    rpt.label = identify_group(P, None, None, periods=None)
    rpt.notes["rotation_group_label"] = rpt.label.name
    rpt.notes["intersection_ok"] = ok
    rpt.notes["intersection_checks"] = checks
    rpt.notes["scalar_group_order"] = len(P.scalars) if P.scalars else 1
    rpt.notes["linear_order"] = getattr(P, "linear_order", None)
    rpt.notes["ideal_self_conjugate"] = gauss_ideal_self_conjugate(J)
    rpt.notes["facet_suffix"] = f"{{4,4}}_({b},{c})"
    return rpt


def ring_conjugation_is_rho(J: IdealSpec, budget: int = DEFAULT_BUDGET) -> bool:
    """For conjugation-stable ideals: does entrywise i -> -i realize the
    regularity automorphism (s1 -> s1^-1, s2 -> s1^2 s2, s3 -> s3)?"""
    if not gauss_ideal_self_conjugate(J):
        return False
    spec = mobius_spec(J, budget)
    ring = spec.ring
    if not ring.pair:
        return False
    gens = spec.generators
    P = projectivize(gens, ring, cap=budget)
    conj = [tuple(tuple((x[0], ring.d - x[1] if x[1] else 0) for x in row)
                  for row in g) for g in P.generators]
    s1, s2 = P.generators[0], P.generators[1]
    p1 = element_order(s1, ring, scalars=P.scalars)
    s1_inv = s1
    for _ in range(p1 - 2):
        s1_inv = mat_mul(ring, s1_inv, s1)
    targets = [s1_inv, mat_mul(ring, mat_mul(ring, s1, s1), s2)]
    targets += list(P.generators[2:])
    for got, want in zip(conj, targets):
        if (mat_to_bytes(ring, got, P.scalars)
                != mat_to_bytes(ring, want, P.scalars)):
            return False
    return True
