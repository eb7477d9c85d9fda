"""Bilinear-form analysis over finite fields and orthogonal-group bookkeeping.

Forms are handled through the integral matrix B2 = 2*(Gram matrix); all
square-class data is normalized back to the Gram convention, so the reported
discriminant class matches disc(V).  epsilon comes from the discriminant
rule, the Witt index from an explicit isotropic-vector search; the two are
independent paths and are cross-checked in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    Char2Unsupported,
    DiscriminantPrime,
    HypothesisNotMet,
    IsotropicRoot,
    NotApplicable,
    OddCharRequired,
    UnsupportedFormula,
)
from .rings import (
    QuadInt,
    RingSpec,
    legendre,
    legendre_tau,
    tau_associates,
    tau_classify_prime,
)

#: discriminant primes of the two golden-ratio symbols
DISC_353 = QuadInt(-2, -5)   # delta  = -(2+5*tau), norm -11
DISC_535 = QuadInt(-3, -7)   # lambda = -(3+7*tau), norm -19

#: Case 3 congruence classes mod 55 (paper's table)
EPSILON_MOD55 = {
    +1: (3, 12, 23, 27, 37, 38, 42, 47, 48, 53),
    -1: (2, 7, 8, 13, 17, 18, 28, 32, 43, 52),
}


# ---------------------------------------------------------------------------
# linear algebra over a finite field ring


def _require_field(ring: RingSpec):
    if ring.char == 2:
        raise Char2Unsupported("form analysis is disabled in characteristic 2")
    if not ring.is_field:
        raise NotApplicable("form analysis needs a finite field")


def nullspace(B, ring: RingSpec):
    """Kernel basis of the symmetric matrix B (RREF, free coords = 1)."""
    n = len(B)
    A = [list(row) for row in B]
    pivots = []
    r = 0
    for col in range(n):
        p = next((i for i in range(r, n) if not ring.is_zero(A[i][col])), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        inv = ring.inv(A[r][col])
        A[r] = [ring.mul(x, inv) for x in A[r]]
        for i in range(n):
            if i != r and not ring.is_zero(A[i][col]):
                f = A[i][col]
                A[i] = [ring.sub(x, ring.mul(f, y)) for x, y in zip(A[i], A[r])]
        pivots.append(col)
        r += 1
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        v = [ring.zero()] * n
        v[fc] = ring.one()
        for row_i, pc in enumerate(pivots):
            v[pc] = ring.neg(A[row_i][fc])
        basis.append(tuple(v))
    return basis, pivots


def ring_det(B, ring: RingSpec):
    n = len(B)
    A = [list(row) for row in B]
    det = ring.one()
    for col in range(n):
        p = next((i for i in range(col, n) if not ring.is_zero(A[i][col])), None)
        if p is None:
            return ring.zero()
        if p != col:
            A[col], A[p] = A[p], A[col]
            det = ring.neg(det)
        det = ring.mul(det, A[col][col])
        inv = ring.inv(A[col][col])
        for i in range(col + 1, n):
            f = ring.mul(A[i][col], inv)
            A[i] = [ring.sub(x, ring.mul(f, y)) for x, y in zip(A[i], A[col])]
    return det


def diagonalize(B, ring: RingSpec):
    """Diagonal entries of the form in some orthogonal basis (odd char)."""
    n = len(B)
    A = [list(row) for row in B]
    active = list(range(n))
    diag = []
    while active:
        k = next((i for i in active if not ring.is_zero(A[i][i])), None)
        if k is None:
            pair = next(((i, j) for i in active for j in active
                         if i != j and not ring.is_zero(A[i][j])), None)
            if pair is None:
                break  # remaining block is zero (radical)
            i, j = pair
            # e_i := e_i + e_j makes Q(e_i) = 2*B[i][j] != 0
            for c in range(n):
                A[i][c] = ring.add(A[i][c], A[j][c])
            for r in range(n):
                A[r][i] = ring.add(A[r][i], A[r][j])
            k = i
        d = A[k][k]
        diag.append(d)
        inv = ring.inv(d)
        active.remove(k)
        for i in active:
            f = ring.mul(A[i][k], inv)
            if ring.is_zero(f):
                continue
            for c in range(n):
                A[i][c] = ring.sub(A[i][c], ring.mul(f, A[k][c]))
            for r in range(n):
                A[r][i] = ring.sub(A[r][i], ring.mul(f, A[r][k]))
    return diag


# -- indexed field tables for the vectorized isotropic search --

_TABLE_CACHE: dict = {}


class _FieldTables:
    def __init__(self, ring: RingSpec):
        elems = list(ring.elements())
        self.elems = elems
        self.index = {e: i for i, e in enumerate(elems)}
        q = len(elems)
        mul = np.zeros((q, q), dtype=np.int32)
        add = np.zeros((q, q), dtype=np.int32)
        for i, x in enumerate(elems):
            for j, y in enumerate(elems):
                mul[i, j] = self.index[ring.mul(x, y)]
                add[i, j] = self.index[ring.add(x, y)]
        self.mul = mul
        self.add = add
        self.sq = mul[np.arange(q), np.arange(q)]
        self.zero = self.index[ring.zero()]
        self.one = self.index[ring.one()]


def _tables(ring: RingSpec) -> _FieldTables:
    if ring not in _TABLE_CACHE:
        _TABLE_CACHE[ring] = _FieldTables(ring)
    return _TABLE_CACHE[ring]


def _find_isotropic(diag, ring: RingSpec):
    """First nonzero v (lex order, leading coordinate 1) with sum d_i v_i^2 = 0."""
    r = len(diag)
    tab = _tables(ring)
    q = ring.order
    d_idx = [tab.index[d] for d in diag]
    for lead in range(r):
        nfree = r - lead - 1
        grids = np.meshgrid(*([np.arange(q)] * nfree), indexing="ij") if nfree \
            else []
        total = np.full(grids[0].shape if nfree else (), tab.mul[d_idx[lead],
                                                               tab.one],
                        dtype=np.int32)
        for t, g in enumerate(grids):
            term = tab.mul[d_idx[lead + 1 + t], tab.sq[g]]
            total = tab.add[total, term]
        hits = (total == tab.zero)
        if not nfree:
            if hits:
                v = [ring.zero()] * r
                v[lead] = ring.one()
                return tuple(v)
            continue
        flat = hits.reshape(-1)
        pos = int(np.argmax(flat)) if flat.any() else -1
        if pos >= 0:
            coords = np.unravel_index(pos, grids[0].shape)
            v = [ring.zero()] * r
            v[lead] = ring.one()
            for t in range(nfree):
                v[lead + 1 + t] = tab.elems[int(coords[t])]
            return tuple(v)
    return None


def witt_index_search(diag, ring: RingSpec) -> int:
    """Witt index of a nonsingular diagonal form by isotropic-vector search."""
    r = len(diag)
    if r <= 1:
        return 0
    if r == 2:
        return 1 if ring.chi(ring.neg(ring.mul(diag[0], diag[1]))) == 1 else 0
    v = _find_isotropic(diag, ring)
    if v is None:
        return 0
    # B(x, y) = sum d_i x_i y_i; pick u = e_j with v_j != 0
    j = next(i for i in range(r) if not ring.is_zero(v[i]))
    # complement: w with B(v, w) = 0 and B(e_j, w) = 0
    rows = [tuple(ring.mul(diag[i], v[i]) for i in range(r)),
            tuple(diag[j] if i == j else ring.zero() for i in range(r))]
    comp, _ = nullspace([list(rows[0]), list(rows[1])] + [[ring.zero()] * r
                        for _ in range(r - 2)], ring)
    M = [[_form_val(diag, ring, a, b) for b in comp] for a in comp]
    return 1 + witt_index_search(diagonalize(M, ring), ring)


def _form_val(diag, ring, a, b):
    acc = ring.zero()
    for i in range(len(diag)):
        acc = ring.add(acc, ring.mul(diag[i], ring.mul(a[i], b[i])))
    return acc


# ---------------------------------------------------------------------------
# form analysis


@dataclass(frozen=True)
class FormAnalysis:
    ring: RingSpec
    n: int
    rank: int
    radical_basis: tuple
    disc_class: str          # "square" | "nonsquare" | "zero"
    epsilon: int | None      # +1 / -1, 0 for odd rank, None when singular
    witt_index: int

    @property
    def corank(self) -> int:
        return self.n - self.rank

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "radical": [[self.ring.to_json(x) for x in v]
                        for v in self.radical_basis],
            "disc_class": self.disc_class,
            "epsilon": self.epsilon,
            "witt_index": self.witt_index,
        }


#: field-order bound for the explicit Witt search; beyond it the index is
#: derived from the discriminant rule
WITT_SEARCH_MAX_Q = 121


def analyze_form(B2, ring: RingSpec) -> FormAnalysis:
    """Radical, discriminant class, epsilon and Witt index of a reduced form."""
    _require_field(ring)
    n = len(B2)
    radical, pivots = nullspace(B2, ring)
    rank = len(pivots)
    sub = [[B2[i][j] for j in pivots] for i in pivots]

    half = ring.inv(ring.from_int(2))
    if rank == 0:
        return FormAnalysis(ring, n, 0, tuple(radical), "zero", None, 0)
    det_q = ring.mul(ring_det(sub, ring), ring.pow_(half, rank))
    chi_det = ring.chi(det_q)

    if radical:
        disc_class = "zero"
        epsilon = None
    else:
        disc_class = "square" if chi_det == 1 else "nonsquare"
        if rank % 2:
            epsilon = 0
        else:
            target = ring.chi(ring.from_int((-1) ** (rank // 2)))
            epsilon = 1 if chi_det == target else -1

    diag = diagonalize(sub, ring)
    if ring.order <= WITT_SEARCH_MAX_Q:
        witt = witt_index_search(diag, ring) + len(radical)
    else:
        witt = _witt_from_disc(rank, chi_det, ring) + len(radical)
    return FormAnalysis(ring, n, rank, tuple(radical), disc_class, epsilon, witt)


def _witt_from_disc(rank: int, chi_det: int, ring: RingSpec) -> int:
    if rank % 2:
        return (rank - 1) // 2
    target = ring.chi(ring.from_int((-1) ** (rank // 2)))
    return rank // 2 if chi_det == target else rank // 2 - 1


def spinor_class(b, B2, ring: RingSpec) -> str:
    """Square class of (b.b)/2, i.e. of the node label for a basis root."""
    _require_field(ring)
    n = len(B2)
    acc = ring.zero()
    for i in range(n):
        for j in range(n):
            acc = ring.add(acc, ring.mul(b[i], ring.mul(B2[i][j], b[j])))
    val = ring.mul(acc, ring.inv(ring.from_int(2)))
    if ring.is_zero(val):
        raise IsotropicRoot("root has isotropic norm")
    return "square" if ring.chi(val) == 1 else "nonsquare"


def root_reflection(B2, ring: RingSpec, w):
    """Matrix of the reflection with root w: x -> x - 2 B(x,w)/B(w,w) * w."""
    n = len(B2)
    Bw = [_dot(B2, ring, i, w) for i in range(n)]
    norm = ring.zero()
    for i in range(n):
        norm = ring.add(norm, ring.mul(w[i], Bw[i]))
    if ring.is_zero(norm):
        raise IsotropicRoot("isotropic root has no reflection")
    kappa = ring.mul(ring.from_int(2), ring.inv(norm))
    R = []
    for i in range(n):
        row = []
        for j in range(n):
            val = ring.one() if i == j else ring.zero()
            row.append(ring.sub(val, ring.mul(kappa, ring.mul(w[i], Bw[j]))))
        R.append(tuple(row))
    return tuple(R)


def _dot(B2, ring, i, w):
    acc = ring.zero()
    for j in range(len(w)):
        acc = ring.add(acc, ring.mul(B2[i][j], w[j]))
    return acc


# ---------------------------------------------------------------------------
# order formulas and identification


def order_formula(kind: str, n: int, q: int, epsilon: int | None = None) -> int:
    """Orders of the finite orthogonal groups used here (n = 2, 3, 4)."""
    if kind in ("O", "O1", "O2"):
        if n == 2:
            if epsilon not in (1, -1):
                raise UnsupportedFormula("rank-2 forms need epsilon")
            h = q - epsilon
        elif n == 3:
            h = q * (q * q - 1)
        elif n == 4:
            if epsilon not in (1, -1):
                raise UnsupportedFormula("rank-4 forms need epsilon")
            h = q * q * (q * q - epsilon) * (q * q - 1)
        else:
            raise UnsupportedFormula(f"no order formula for n = {n}")
        return 2 * h if kind == "O" else h
    if kind in ("OHat", "OHat1"):
        if n != 4:
            raise UnsupportedFormula("corank-1 formulas implemented for n = 4")
        h = q ** 3 * q * (q * q - 1)
        return 2 * h if kind == "OHat" else h
    raise UnsupportedFormula(f"unknown kind {kind!r}")


def psl2_order(q: int) -> int:
    return q * (q * q - 1) // (2 if q % 2 else 1)


def _spherical_candidates(rank: int, periods):
    """Names and orders of spherical string groups matching the periods."""
    out = []
    p = tuple(periods)
    rp = tuple(reversed(p))
    if all(x == 3 for x in p):
        out.append((f"A{rank}(S{rank + 1})", math.factorial(rank + 1)))
    for pat in (p, rp):
        if rank >= 2 and pat[0] == 4 and all(x == 3 for x in pat[1:]):
            out.append((f"B{rank}", 2 ** rank * math.factorial(rank)))
            break
    if p in ((3, 4, 3),):
        out.append(("F4", 1152))
    if p in ((3, 5), (5, 3)):
        out.append(("H3", 120))
    if p in ((3, 3, 5), (5, 3, 3)):
        out.append(("H4", 14400))
    if rank == 2:
        out.append((f"I2({p[0]})", 2 * p[0]))
    return out


#: every spherical type of Thm-3.1 scope by order alone (rank <= 8); used to
#: surface order coincidences such as |O1(4,5,1)| = |H4| = 14400
_ORDER_ONLY_TYPES = [
    ("A2(S3)", 6), ("A3(S4)", 24), ("A4(S5)", 120), ("A5(S6)", 720),
    ("A6(S7)", 5040), ("A7(S8)", 40320), ("A8(S9)", 362880),
    ("B2", 8), ("B3", 48), ("B4", 384), ("B5", 3840), ("B6", 46080),
    ("B7", 645120), ("B8", 10321920),
    ("D4", 192), ("D5", 1920), ("D6", 23040), ("D7", 322560), ("D8", 5160960),
    ("F4", 1152), ("H3", 120), ("H4", 14400),
    ("E6", 51840), ("E7", 2903040), ("E8", 696729600),
]


@dataclass(frozen=True)
class GroupLabel:
    kind: str              # O | O1 | O2 | OHat | OHat1 | spherical | psl2 | unidentified
    name: str
    n: int | None = None
    q: int | None = None
    epsilon: int | None = None
    predicted_order: int | None = None
    candidates: tuple = field(default_factory=tuple)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "name": self.name,
            "n": self.n,
            "q": self.q,
            "epsilon": self.epsilon,
            "predicted_order": self.predicted_order,
            "candidates": list(self.candidates),
        }


def identify_group(G, fa: FormAnalysis | None, diagram=None,
                   periods=None) -> GroupLabel:
    """Match an enumerated group against orthogonal, spherical and PSL2 orders.

    Diagram labels (when given) refine O1 vs O2 via spinor classes; returns
    an unidentified label rather than guessing when nothing matches.
    """
    order = len(G)
    ring = G.ring
    matches = []  # (priority, kind, name, n, q, eps, predicted)

    q = ring.order if ring.is_field else None
    if q is not None:
        spin = _generator_spinor_classes(fa, diagram, ring)
        eps_list: list[int | None]
        if fa is None:
            eps_list = [1, -1] if G.n in (2, 4) else [0]
            corank = 0
        else:
            corank = fa.corank
            eps_list = [fa.epsilon] if fa.epsilon in (1, -1) else [0]
        if corank == 0:
            for eps in eps_list:
                e_arg = eps if eps in (1, -1) else None
                if G.n in (2, 3, 4):
                    try:
                        h1 = order_formula("O1", G.n, q, e_arg)
                    except UnsupportedFormula:
                        continue
                    _add_orth_matches(matches, order, G.n, q, eps, h1, spin)
        elif corank == 1 and G.n == 4:
            h1 = order_formula("OHat1", 4, q)
            if order == h1:
                matches.append((0, "OHat1", f"OHat1(4,{q})", 4, q, None, h1))
            if order == 2 * h1:
                matches.append((0, "OHat", f"OHat(4,{q})", 4, q, None, 2 * h1))
        # linear fractional candidates
        for qq in {ring.char, ring.char ** 2, q}:
            if qq >= 4 and order == psl2_order(qq):
                matches.append((2, "psl2", f"PSL2({qq})", None, qq, None,
                                psl2_order(qq)))

    if periods is not None:
        for name, sorder in _spherical_candidates(len(periods) + 1, periods):
            if sorder == order:
                matches.append((1, "spherical", name, None, None, None, sorder))
    typed = {m[2] for m in matches}
    for name, sorder in _ORDER_ONLY_TYPES:
        if sorder == order and name not in typed:
            matches.append((3, "spherical", name, None, None, None, sorder))

    if not matches:
        return GroupLabel("unidentified", f"order {order}", candidates=())
    matches.sort(key=lambda m: m[0])
    names = tuple(m[2] for m in matches)
    top = matches[0]
    return GroupLabel(top[1], top[2], top[3], top[4], top[5], top[6],
                      candidates=names)


def _add_orth_matches(matches, order, n, q, eps, h1, spin):
    e = eps if eps in (1, -1) else None
    suffix = f"({n},{q},{0 if e is None else e})"
    if order == 2 * h1:
        matches.append((0, "O", "O" + suffix, n, q, e, 2 * h1))
    if order == h1:
        if spin == "nonsquare":
            matches.append((0, "O2", "O2" + suffix, n, q, e, h1))
        else:
            matches.append((0, "O1", "O1" + suffix, n, q, e, h1))


def _generator_spinor_classes(fa, diagram, ring):
    """ "square" / "nonsquare" / "mixed" / None from the diagram labels."""
    if diagram is None or ring.char == 2 or not ring.is_field:
        return None
    classes = set()
    for lab in diagram.labels:
        img = ring.embed(lab)
        if ring.is_zero(img):
            continue
        classes.add("square" if ring.chi(img) == 1 else "nonsquare")
    if len(classes) == 1:
        return classes.pop()
    return "mixed" if classes else None


# ---------------------------------------------------------------------------
# the epsilon of [3,5,3] and the Theorem-1 intersection predictor


def epsilon_353(pi: QuadInt) -> int:
    """Witt-type epsilon of [3,5,3] mod pi by the closed congruence forms.

    The uniform Euler-criterion path is legendre_tau(DISC_353, pi); this
    function is the independent cross-check from the mod-55 table (inert),
    Case 2 (ramified) and the split-prime Legendre product.
    """
    cls = tau_classify_prime(pi)
    if cls.residue_char == 2:
        raise OddCharRequired("epsilon undefined modulo associates of 2")
    if cls.kind == "ramified":
        return -1
    if cls.kind == "inert":
        return legendre(cls.residue_char, 11)
    if tau_associates(pi, DISC_353):
        raise DiscriminantPrime("pi is an associate of the discriminant")
    a, b, q = pi.a, pi.b, cls.residue_order
    return legendre(b * (5 * a - 2 * b), q)


def epsilon_conjugate_product(q: int) -> int:
    """(q/11) = epsilon_353(pi) * epsilon_353(pi') for the two primes over q.

    -1 means the two conjugate primes give opposite epsilons.
    """
    if q == 11:
        raise NotApplicable("q = 11 lies over the discriminant")
    if not (q % 5 in (1, 4)):
        raise NotApplicable(f"{q} does not split in Z[tau]")
    return legendre(q, 11)


def predict_intersection(v_singular: bool, v0_singular: bool,
                         vn1_singular: bool, middle_singular: bool,
                         g0_kind: str, gn1_kind: str, *,
                         middle_kind: str | None = None,
                         full_kind: str | None = None) -> str:
    """Predicted G_0 ^ G_{n-1} per the subspace criterion.

    Returns "O", "O1", "OHat", "OHat1" (orthogonal groups of V_{0,n-1}) or
    "G_middle"; raises HypothesisNotMet when no case applies.
    """
    orth = ("O", "O1")
    if not v0_singular and not vn1_singular and not middle_singular:
        if g0_kind not in orth or gn1_kind not in orth:
            raise HypothesisNotMet("end subgroups not of orthogonal type")
        if g0_kind == "O" and gn1_kind == "O":
            return "O"
        return "O1"
    if (not v_singular and not v0_singular and not vn1_singular
            and middle_singular):
        if g0_kind not in orth or gn1_kind not in orth:
            raise HypothesisNotMet("end subgroups not of orthogonal type")
        if g0_kind == "O" and gn1_kind == "O":
            return "OHat"
        return "OHat1"
    if not v_singular and not middle_singular and (v0_singular or vn1_singular):
        if middle_kind not in orth:
            raise HypothesisNotMet("middle subgroup not of orthogonal type")
        if middle_kind == "O1" and full_kind != "O1":
            raise HypothesisNotMet("proviso: G = O1(V) required")
        return "G_middle"
    raise HypothesisNotMet("subspace singularity pattern outside (a)-(c)")
