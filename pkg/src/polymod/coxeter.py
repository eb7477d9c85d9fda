"""String diagrams with basic systems, Cartan data, and reflection matrices.

A diagram carries node labels (the values 2*t_i**2 of a basic system) and
per-branch multiplicities; the coefficient domain is Z for crystallographic
periods {2,3,4,6,oo} and Z[tau] once a period-5 branch appears.  Generators
act on column vectors: r_i(b_j) = b_j + m_ij * b_i fixes the matrix of r_i
as the identity with row i replaced by the Cartan row.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, inf

from .errors import BadSymbol, LabelViolation, NotApplicable
from .rings import QuadInt, RingSpec, TAU, tau_classify_prime

OO = inf

_ALLOWED_PERIODS = {2, 3, 4, 5, 6, OO}


def quad_sign(z) -> int:
    """Sign of a + b*tau as a real number."""
    if isinstance(z, int):
        return (z > 0) - (z < 0)
    A, B = 2 * z.a + z.b, z.b  # 2z = A + B*sqrt5
    if A >= 0 and B >= 0:
        return 1 if (A or B) else 0
    if A <= 0 and B <= 0:
        return -1
    lhs, rhs = A * A, 5 * B * B
    if A > 0:  # B < 0
        return 1 if lhs > rhs else -1
    return 1 if rhs > lhs else -1


def _dom_div_exact(z, w):
    """z / w in the domain, or None if the division is not exact."""
    if isinstance(z, int) and isinstance(w, int):
        if w != 0 and z % w == 0:
            return z // w
        return None
    z = z if isinstance(z, QuadInt) else QuadInt(z)
    w = w if isinstance(w, QuadInt) else QuadInt(w)
    n = w.norm()
    if n == 0:
        return None
    q = z * w.conj()
    if q.a % n or q.b % n:
        return None
    return QuadInt(q.a // n, q.b // n)


def det_bareiss(M):
    """Exact determinant over Z or Z[tau] (fraction-free elimination)."""
    n = len(M)
    A = [list(row) for row in M]
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for r in range(k + 1, n):
                if A[r][k] != 0:
                    A[k], A[r] = A[r], A[k]
                    sign = -sign
                    break
            else:
                return 0 * A[0][0]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = A[i][j] * A[k][k] - A[i][k] * A[k][j]
                q = _dom_div_exact(num, prev)
                assert q is not None
                A[i][j] = q
        prev = A[k][k]
    return A[n - 1][n - 1] if sign == 1 else -A[n - 1][n - 1]


def _squarefree(n: int) -> int:
    out, d = 1, 2
    n = abs(n)
    while d * d <= n:
        e = 0
        while n % d == 0:
            n //= d
            e += 1
        if e % 2:
            out *= d
        d += 1
    return out * n


def strip_rational_squares(z):
    """Divide out the largest rational square factor."""
    if isinstance(z, int):
        return (1 if z > 0 else -1) * _squarefree(z) if z else 0
    g = gcd(z.a, z.b)
    if g == 0:
        return z
    s, d = 1, 2
    while d * d <= g:
        while g % (d * d) == 0:
            g //= d * d
            s *= d
        d += 1
    return QuadInt(z.a // (s * s), z.b // (s * s))


# ---------------------------------------------------------------------------
# labels: exact values q * tau**k with q rational, k >= 0 even for defaults


_RATIOS = {3: [(Fraction(1), 0)],
           4: [(Fraction(2), 0), (Fraction(1, 2), 0)],
           6: [(Fraction(3), 0), (Fraction(1, 3), 0)],
           5: [(Fraction(1), 2), (Fraction(1), -2)],
           2: [(Fraction(1), 0)]}


def _label_value(q: Fraction, k: int):
    """q * tau**k as a domain element (q must be integral after rescale)."""
    assert q.denominator == 1
    if k == 0:
        return int(q)
    return int(q) * TAU ** k


def _canonical_labels(raw: list[tuple[Fraction, int]]):
    kmin = min(k for _, k in raw)
    shifted = [(q, k - kmin) for q, k in raw]
    lcm = 1
    for q, _ in shifted:
        lcm = lcm * q.denominator // gcd(lcm, q.denominator)
    nums = [int(q * lcm) for q, _ in shifted]
    g = 0
    for m in nums:
        g = gcd(g, m)
    return [(Fraction(m // g), k) for m, (_, k) in zip(nums, shifted)]


def _label_key(labels: list[tuple[Fraction, int]]):
    """Exact lexicographic sort key via the real embedding."""
    def cmp_vals():
        out = []
        for q, k in labels:
            out.append((q, k))
        return out
    return _LabelSeq(cmp_vals())


class _LabelSeq:
    def __init__(self, vals):
        self.vals = vals

    def __lt__(self, other):
        for (q1, k1), (q2, k2) in zip(self.vals, other.vals):
            d = _cmp_label((q1, k1), (q2, k2))
            if d:
                return d < 0
        return False


def _cmp_label(x, y):
    (q1, k1), (q2, k2) = x, y
    # compare q1*tau^k1 vs q2*tau^k2 exactly
    n1 = q1.numerator * q2.denominator
    n2 = q2.numerator * q1.denominator
    z = n1 * TAU ** k1 - n2 * TAU ** k2
    return quad_sign(z)


# ---------------------------------------------------------------------------
# diagrams


@dataclass(frozen=True)
class Diagram:
    """String diagram: periods, branch multiplicities, exact node labels."""

    periods: tuple
    lambdas: tuple
    labels: tuple
    domain: str  # "Z" | "Ztau"
    symbol: str = ""

    @property
    def n(self) -> int:
        return len(self.labels)

    def to_json(self) -> dict:
        return {
            "rank": self.n,
            "labels": [str(x) for x in self.labels],
            "branches": [
                {"period": period_str(p), "lambda": lam}
                for p, lam in zip(self.periods, self.lambdas)
            ],
        }

    def __str__(self):
        return self.symbol or f"[{','.join(period_str(p) for p in self.periods)}]"


def period_str(p) -> str:
    return "oo" if p == OO else str(int(p))


def _parse_period(tok: str):
    tok = tok.strip()
    if tok in ("oo", "inf"):
        return OO
    try:
        p = int(tok)
    except ValueError:
        raise BadSymbol(f"bad period {tok!r}") from None
    if p not in _ALLOWED_PERIODS:
        raise BadSymbol(f"period {p} not in {{2,3,4,5,6,oo}}")
    return p


_LABEL_TOKEN = re.compile(r"^(\d+)?(?:t(\d+))?$")


def _parse_label_token(tok: str) -> tuple[Fraction, int]:
    m = _LABEL_TOKEN.match(tok.strip())
    if not m or (m.group(1) is None and m.group(2) is None):
        raise LabelViolation(f"bad label token {tok!r}")
    q = Fraction(int(m.group(1))) if m.group(1) else Fraction(1)
    k = int(m.group(2)) if m.group(2) else 0
    return q, k


def _branch_data(periods):
    """Allowed (ratio, tau-exp) choices per branch, single-branch forms only."""
    return [_RATIOS[5] if p == 5 else ([(Fraction(4), 0), (Fraction(1, 4), 0)]
            if p == OO else _RATIOS[p]) for p in periods]


def _labels_from_choices(periods, choices):
    labs = [(Fraction(1), 0)]
    for (q, k) in choices:
        prev = labs[-1]
        labs.append((prev[0] * q, prev[1] + k))
    return _canonical_labels(labs)


def _materialize(periods, lambdas, labels_qk, symbol=""):
    domain = "Ztau" if any(k for _, k in labels_qk) or 5 in periods else "Z"
    labels = tuple(_label_value(q, k) for q, k in labels_qk)
    return Diagram(tuple(periods), tuple(lambdas), labels, domain, symbol)


def parse_symbol(text: str) -> Diagram:
    """Parse "[p1,p2,...]" with "oo" for infinity and an optional
    "labels=..." clause; default labels are the lexicographically least
    basic system (single-branch forms only)."""
    s = text.strip()
    m = re.match(r"^\[([^\]]*)\]\s*(?:labels=(.*))?$", s)
    if not m:
        raise BadSymbol(f"bad symbol text {text!r}")
    periods = [_parse_period(t) for t in m.group(1).split(",") if t.strip() != ""]
    if not periods:
        raise BadSymbol("empty symbol")
    n = len(periods) + 1

    if m.group(2) is not None:
        toks = [t for t in m.group(2).split(",")]
        if len(toks) != n:
            raise LabelViolation(f"expected {n} labels, got {len(toks)}")
        labels_qk = _canonical_labels([_parse_label_token(t) for t in toks])
        lambdas = _validate_labels(periods, labels_qk)
        return _materialize(periods, lambdas, labels_qk, s)

    best = None
    for choices in _iter_choices(_branch_data(periods)):
        labs = _labels_from_choices(periods, choices)
        if best is None or _label_key(labs) < _label_key(best):
            best = labs
    lambdas = _validate_labels(periods, best)
    return _materialize(periods, lambdas, best, s)


def _iter_choices(per_branch):
    if not per_branch:
        yield []
        return
    for head in per_branch[0]:
        for tail in _iter_choices(per_branch[1:]):
            yield [head] + tail


def _validate_labels(periods, labels_qk):
    """Check Table-1 ratios; infer branch multiplicities."""
    lambdas = []
    for idx, p in enumerate(periods):
        (q1, k1), (q2, k2) = labels_qk[idx], labels_qk[idx + 1]
        ratio = (q2 / q1, k2 - k1)
        if p == 2:
            lambdas.append(0)
            continue
        if p == OO:
            if ratio in ((Fraction(4), 0), (Fraction(1, 4), 0)):
                lambdas.append(1)
            elif ratio == (Fraction(1), 0):
                lambdas.append(2)
            else:
                raise LabelViolation(
                    f"branch {idx}: oo needs ratio 4 or equal labels")
            continue
        if p == 5:
            if ratio not in ((Fraction(1), 2), (Fraction(1), -2)):
                raise LabelViolation(f"branch {idx}: period 5 needs ratio tau^2")
        else:
            want = _RATIOS[p][0][0]
            if ratio not in ((want, 0), (1 / want, 0)):
                raise LabelViolation(
                    f"branch {idx}: period {p} needs ratio {want} (either way)")
        lambdas.append(1)
    return lambdas


def basic_system_variants(d: Diagram) -> list[Diagram]:
    """All diagrams reachable by ratio inversion and oo-branch conversion."""
    per_branch = []
    for p in d.periods:
        if p == OO:
            per_branch.append([(Fraction(4), 0, 1), (Fraction(1, 4), 0, 1),
                               (Fraction(1), 0, 2)])
        elif p == 2:
            per_branch.append([(Fraction(1), 0, 0)])
        else:
            per_branch.append([(q, k, 1) for q, k in _RATIOS[p]])
    seen, out = set(), []
    for choices in _iter_choices(per_branch):
        labs = _labels_from_choices(d.periods, [(q, k) for q, k, _ in choices])
        lambdas = tuple(lam for _, _, lam in choices)
        key = (tuple(labs), lambdas)
        if key in seen:
            continue
        seen.add(key)
        out.append(_materialize(d.periods, lambdas, labs, d.symbol))
    return out


# ---------------------------------------------------------------------------
# Cartan data and reflection generators


@dataclass(frozen=True)
class CartanData:
    M: tuple   # Cartan integers, M[i][j] = m_ij, m_ii = -2
    B2: tuple  # twice the Gram matrix, integral over the domain


def cartan_data(d: Diagram) -> CartanData:
    n = d.n
    M = [[0] * n for _ in range(n)]
    B2 = [[0] * n for _ in range(n)]
    for i in range(n):
        M[i][i] = -2
        B2[i][i] = 2 * d.labels[i]
    for idx in range(n - 1):
        i, j = idx, idx + 1
        lam = d.lambdas[idx]
        if lam == 0:
            continue
        Li, Lj = d.labels[i], d.labels[j]
        bigger = Lj if quad_sign(Lj - Li) > 0 else Li
        B2[i][j] = B2[j][i] = -lam * bigger
        # m_ij = lambda * max(1, L_j / L_i)
        if quad_sign(Lj - Li) > 0:
            M[i][j] = lam * _dom_div_exact(Lj, Li)
            M[j][i] = lam
        elif quad_sign(Li - Lj) > 0:
            M[i][j] = lam
            M[j][i] = lam * _dom_div_exact(Li, Lj)
        else:
            M[i][j] = M[j][i] = lam
    return CartanData(tuple(tuple(r) for r in M), tuple(tuple(r) for r in B2))


def discriminant(d: Diagram):
    """det(2B)/2^n modulo rational squares; matches the paper's disc(V)."""
    det = det_bareiss(cartan_data(d).B2)
    if det == 0:
        return 0
    if d.n % 2:
        det = det * 2
    return strip_rational_squares(det)


def reflection_generators(d: Diagram) -> list:
    """Matrices of r_0..r_{n-1} on the root basis (columns convention)."""
    cd = cartan_data(d)
    n = d.n
    gens = []
    for i in range(n):
        R = [[1 if a == b else 0 for b in range(n)] for a in range(n)]
        for j in range(n):
            R[i][j] = -1 if j == i else cd.M[i][j]
        gens.append(tuple(tuple(r) for r in R))
    return gens


def mat_mul_dom(A, B):
    n = len(A)
    return tuple(tuple(sum(A[i][k] * B[k][j] for k in range(n))
                       for j in range(n)) for i in range(n))


def mat_identity_dom(n: int):
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def reduce_matrix(M, ring: RingSpec):
    return tuple(tuple(ring.embed(x) for x in row) for row in M)


def reduce_generators(gens, ring: RingSpec):
    """Entrywise image of the generators; also reports which collapse to 1."""
    reduced = [reduce_matrix(M, ring) for M in gens]
    n = len(gens[0])
    ident = tuple(tuple(ring.one() if i == j else ring.zero() for j in range(n))
                  for i in range(n))
    collapsed = [i for i, M in enumerate(reduced) if M == ident]
    return reduced, collapsed


def is_generic(d: Diagram, p: int) -> bool:
    """Genericity of a rational prime for a crystallographic diagram."""
    if d.domain != "Z":
        raise NotApplicable("genericity is defined for crystallographic "
                            "diagrams; use tau_special_flags")
    if p >= 5:
        return True
    if p == 3:
        return 6 not in d.periods
    return False


def tau_special_flags(d: Diagram, pi: QuadInt) -> dict:
    """Special-prime flags replacing genericity over Z[tau]."""
    from .rings import tau_residue_ring

    cls = tau_classify_prime(pi)
    flags = {"char2": cls.residue_char == 2, "divides_disc": False}
    if not flags["char2"]:
        ring = tau_residue_ring(pi)
        disc = discriminant(d)
        flags["divides_disc"] = ring.is_zero(ring.embed(disc))
    return flags


def duality_matrix(d: Diagram):
    """A matrix g with g r_i g^{-1} = r_{n-1-i}, or None.

    Solves for a scaled coordinate flip g(b_j) = T_j b_{n-1-j}; exists for
    palindromic symbols whose Cartan data admits consistent scalings (the
    [3,5,3] map with tau-power weights arises this way).
    """
    n = d.n
    if tuple(d.periods) != tuple(reversed(d.periods)):
        return None
    if tuple(d.lambdas) != tuple(reversed(d.lambdas)):
        return None
    cd = cartan_data(d)
    M = cd.M
    # t_i / t_{i+1} = m_{n-1-i, n-2-i} / m_{i, i+1}; track t_i = num/den
    num = [None] * n
    den = [None] * n
    num[0], den[0] = _one(d), _one(d)
    for i in range(n - 1):
        a = M[n - 1 - i][n - 2 - i]  # numerator of the ratio
        b = M[i][i + 1]
        if a == 0 or b == 0:
            return None
        # t_{i+1} = t_i * b / a
        num[i + 1] = num[i] * b
        den[i + 1] = den[i] * a
    # clear denominators: T_j = num_j * prod(den_k, k != j)
    T = []
    for j in range(n):
        t = num[j]
        for k in range(n):
            if k != j:
                t = t * den[k]
        T.append(t)
    g = [[0] * n for _ in range(n)]
    for j in range(n):
        g[n - 1 - j][j] = T[j]
    g = tuple(tuple(r) for r in g)
    # confirm g R_i = R_{n-1-i} g over the domain
    gens = reflection_generators(d)
    for i in range(n):
        if mat_mul_dom(g, gens[i]) != mat_mul_dom(gens[n - 1 - i], g):
            return None
    return g


def _one(d: Diagram):
    return 1 if d.domain == "Z" else QuadInt(1)
