"""Finitely generated matrix groups over finite rings.

The closure engine enumerates elements breadth-first with numpy batch
arithmetic.  Matrices are dedup'd by a canonical fixed-width byte encoding
(row-major canonical residues); that encoding is also the determinism
anchor: elements are stored in (generation depth, encoding) order, which is
independent of generator ordering.  Projective groups carry a list of
scalars; every product is canonicalized to the lexicographically least
scalar multiple of its encoding.
"""

from __future__ import annotations

import numpy as np

from .errors import BudgetExceeded, NotCorankOne, NotInvariant
from .rings import RingSpec

DEFAULT_BUDGET = 5_000_000


# ---------------------------------------------------------------------------
# pure-python matrix helpers over a RingSpec


def mat_identity(ring: RingSpec, n: int):
    return tuple(tuple(ring.one() if i == j else ring.zero() for j in range(n))
                 for i in range(n))


def mat_mul(ring: RingSpec, A, B):
    n = len(A)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = ring.zero()
            for k in range(n):
                acc = ring.add(acc, ring.mul(A[i][k], B[k][j]))
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def mat_scalar(ring: RingSpec, lam, A):
    return tuple(tuple(ring.mul(lam, x) for x in row) for row in A)


def vec_mat(ring: RingSpec, v, M):
    """Right action of M on a row vector."""
    n = len(v)
    return tuple(
        _sum(ring, (ring.mul(v[k], M[k][j]) for k in range(n)))
        for j in range(n))


def mat_vec(ring: RingSpec, M, v):
    n = len(v)
    return tuple(
        _sum(ring, (ring.mul(M[i][k], v[k]) for k in range(n)))
        for i in range(n))


def _sum(ring, xs):
    acc = ring.zero()
    for x in xs:
        acc = ring.add(acc, x)
    return acc


# ---------------------------------------------------------------------------
# numpy conversion, encoding, canonicalization


def _entry_width(ring) -> int:
    if ring.d <= 256:
        return 1
    if ring.d <= 65536:
        return 2
    return 4


def to_array(ring, mats) -> np.ndarray:
    """Stack python matrices into an int64 array (N,n,n) or (N,n,n,2)."""
    if ring.pair:
        return np.array([[[list(x) for x in row] for row in M] for M in mats],
                        dtype=np.int64)
    return np.array(mats, dtype=np.int64)


def from_array(ring, arr):
    """Inverse of to_array for a single matrix."""
    if ring.pair:
        return tuple(tuple((int(x[0]), int(x[1])) for x in row) for row in arr)
    return tuple(tuple(int(x) for x in row) for row in arr)


def identity_array(ring, n) -> np.ndarray:
    eye = np.eye(n, dtype=np.int64)
    if ring.pair:
        return np.stack([eye, np.zeros((n, n), dtype=np.int64)], axis=-1)[None]
    return eye[None]


def batch_mul(ring, A, B) -> np.ndarray:
    """Product of a batch A with B (single matrix or batch), reduced mod d."""
    d = ring.d
    if not ring.pair:
        return np.matmul(A, B) % d
    ax, ay = A[..., 0], A[..., 1]
    bx, by = B[..., 0], B[..., 1]
    xx = np.matmul(ax, bx)
    yy = np.matmul(ay, by)
    xy = np.matmul(ax, by)
    yx = np.matmul(ay, bx)
    real = (xx + ring.t * yy) % d
    imag = (xy + yx + ring.s * yy) % d
    return np.stack([real, imag], axis=-1)


def batch_scalar(ring, A, lam) -> np.ndarray:
    d = ring.d
    if not ring.pair:
        return A * lam % d
    l0, l1 = lam
    x, y = A[..., 0], A[..., 1]
    real = (x * l0 + ring.t * y * l1) % d
    imag = (x * l1 + y * l0 + ring.s * y * l1) % d
    return np.stack([real, imag], axis=-1)


def encode(ring, arr) -> np.ndarray:
    """(N, ...) matrix batch -> (N, K) uint8 row-major byte encodings."""
    N = arr.shape[0]
    flat = arr.reshape(N, -1)
    w = _entry_width(ring)
    if w == 1:
        return np.ascontiguousarray(flat.astype(np.uint8))
    dt = "<u2" if w == 2 else "<u4"
    return np.ascontiguousarray(flat.astype(dt)).view(np.uint8).reshape(N, -1)


def decode(ring, enc, n) -> np.ndarray:
    w = _entry_width(ring)
    if w == 1:
        flat = enc.astype(np.int64)
    else:
        dt = "<u2" if w == 2 else "<u4"
        flat = np.ascontiguousarray(enc).view(dt).astype(np.int64)
    shape = (len(enc), n, n, 2) if ring.pair else (len(enc), n, n)
    return flat.reshape(shape)


def _lex_less(A, B):
    """Rowwise lexicographic A < B for equal-shape (N,K) uint8 arrays."""
    neq = A != B
    any_diff = neq.any(axis=1)
    first = neq.argmax(axis=1)
    idx = np.arange(len(A))
    return any_diff & (A[idx, first] < B[idx, first])


def canonicalize_batch(ring, arr, scalars):
    """Lexicographically least scalar multiple of each matrix in the batch."""
    if not scalars:
        return arr, encode(ring, arr)
    best = None
    best_enc = None
    for lam in scalars:
        cand = batch_scalar(ring, arr, lam)
        enc = encode(ring, cand)
        if best is None:
            best, best_enc = cand, enc
            continue
        less = _lex_less(enc, best_enc)
        if less.any():
            sel = less.reshape((-1,) + (1,) * (arr.ndim - 1))
            best = np.where(sel, cand, best)
            best_enc = np.where(less[:, None], enc, best_enc)
    return best, best_enc


def py_encode(ring, M) -> bytes:
    """Pure-python encoding, byte-identical to encode() on a single matrix."""
    w = _entry_width(ring)
    out = bytearray()
    if ring.pair:
        for row in M:
            for (x, y) in row:
                out += x.to_bytes(w, "little")
                out += y.to_bytes(w, "little")
    else:
        for row in M:
            for x in row:
                out += x.to_bytes(w, "little")
    return bytes(out)


def canonical_mat(ring, M, scalars):
    """Python-side canonical representative of M modulo the scalar list."""
    if not scalars:
        return M
    best, best_key = None, None
    for lam in scalars:
        cand = mat_scalar(ring, lam, M)
        key = py_encode(ring, cand)
        if best_key is None or key < best_key:
            best, best_key = cand, key
    return best


def mat_to_bytes(ring, M, scalars=None) -> bytes:
    return py_encode(ring, canonical_mat(ring, M, scalars))


# ---------------------------------------------------------------------------
# the group object


class MatrixGroup:
    """Matrix group over a RingSpec, usually with an enumerated element set.

    ``enc`` holds one row per element in (depth, encoding) order; ``scalars``
    is None for linear groups and the list of identified scalars for
    projective ones (elements are canonical scalar-class representatives).
    """

    def __init__(self, ring, n, generators, enc=None, scalars=None,
                 budget=None):
        self.ring = ring
        self.n = n
        self.generators = list(generators)
        self.scalars = list(scalars) if scalars else None
        self.enc = enc
        self.budget = budget or {"cap": None, "exceeded": False}
        self._sorted = None
        self._blob = None
        self._width = None

    @classmethod
    def from_generators(cls, gens, ring, scalars=None):
        return cls(ring, len(gens[0]), gens, enc=None, scalars=scalars)

    @property
    def order(self):
        return None if self.enc is None else len(self.enc)

    def __len__(self):
        if self.enc is None:
            raise ValueError("group is not enumerated")
        return len(self.enc)

    def _ensure_index(self):
        if self._sorted is None:
            self._sorted = np.unique(self.enc, axis=0)
            self._blob = self._sorted.tobytes()
            self._width = self._sorted.shape[1]

    def contains_bytes(self, key: bytes) -> bool:
        self._ensure_index()
        w = self._width
        lo, hi = 0, len(self._sorted)
        blob = self._blob
        while lo < hi:
            mid = (lo + hi) // 2
            row = blob[mid * w:(mid + 1) * w]
            if row < key:
                lo = mid + 1
            elif row > key:
                hi = mid
            else:
                return True
        return False

    def __contains__(self, M) -> bool:
        return self.contains_bytes(mat_to_bytes(self.ring, M, self.scalars))

    def decode_all(self) -> np.ndarray:
        return decode(self.ring, self.enc, self.n)

    def elements(self):
        arr = self.decode_all()
        for i in range(len(arr)):
            yield from_array(self.ring, arr[i])

    def same_elements(self, other: "MatrixGroup") -> bool:
        self._ensure_index()
        other._ensure_index()
        return (self._sorted.shape == other._sorted.shape
                and bool(np.array_equal(self._sorted, other._sorted)))

    def is_subset_of(self, other: "MatrixGroup") -> bool:
        return all(other.contains_bytes(row.tobytes()) for row in self.enc)

    def to_json(self) -> dict:
        return {
            "ring": self.ring.label,
            "dimension": self.n,
            "order": self.order,
            "scalar_group_order": len(self.scalars) if self.scalars else 1,
            "generators": [_mat_json(self.ring, g) for g in self.generators],
            "budget": self.budget,
        }

    def dump_elements(self, path):
        with open(path, "wb") as fh:
            fh.write(self.enc.tobytes())


def _mat_json(ring, M):
    return [[ring.to_json(x) for x in row] for row in M]


# ---------------------------------------------------------------------------
# closure and derived operations


def closure(gens, ring, cap: int = DEFAULT_BUDGET, scalars=None,
            n: int | None = None) -> MatrixGroup:
    """Breadth-first enumeration of the group generated by ``gens``.

    Deterministic: levels are sorted by encoding, so the element order is
    (word length in the given generators, encoding) regardless of how the
    generators are listed.  Raises BudgetExceeded past ``cap`` elements.
    """
    if not gens:
        if n is None:
            raise ValueError("need dimension for the trivial group")
        ident = identity_array(ring, n)
        _, enc_i = canonicalize_batch(ring, ident, scalars or [])
        return MatrixGroup(ring, n, [], enc=enc_i, scalars=scalars)

    n = len(gens[0])
    garr = to_array(ring, gens)
    garr, _ = canonicalize_batch(ring, garr, scalars or [])
    gen_list = [garr[i] for i in range(len(garr))]

    ident = identity_array(ring, n)
    ident, enc_i = canonicalize_batch(ring, ident, scalars or [])
    seen = {enc_i[0].tobytes()}
    levels = [enc_i]
    total = 1

    genc = encode(ring, garr)
    uniq, idx = np.unique(genc, axis=0, return_index=True)
    fresh = np.fromiter((row.tobytes() not in seen for row in uniq),
                        dtype=bool, count=len(uniq))
    frontier = garr[idx[fresh]]
    frontier_enc = uniq[fresh]

    while len(frontier):
        total += len(frontier)
        if total > cap:
            raise BudgetExceeded(total, cap)
        for row in frontier_enc:
            seen.add(row.tobytes())
        levels.append(frontier_enc)

        cands = np.concatenate([batch_mul(ring, frontier, g) for g in gen_list])
        cands, cenc = canonicalize_batch(ring, cands, scalars or [])
        uniq, idx = np.unique(cenc, axis=0, return_index=True)
        fresh = np.fromiter((row.tobytes() not in seen for row in uniq),
                            dtype=bool, count=len(uniq))
        frontier = cands[idx[fresh]]
        frontier_enc = uniq[fresh]

    enc_all = np.concatenate(levels)
    canon_gens = [canonical_mat(ring, g, scalars) for g in gens] if scalars \
        else list(gens)
    return MatrixGroup(ring, n, canon_gens, enc=enc_all, scalars=scalars,
                       budget={"cap": cap, "exceeded": False})


def element_order(M, ring, scalars=None, cap: int = 10 ** 6) -> int:
    """Least k >= 1 with M**k the identity (scalar class when projective)."""
    n = len(M)
    target = mat_to_bytes(ring, mat_identity(ring, n), scalars)
    P = M
    for k in range(1, cap + 1):
        if mat_to_bytes(ring, P, scalars) == target:
            return k
        P = mat_mul(ring, P, M)
    raise ValueError("order exceeds cap")


def subgroup(G: MatrixGroup, indices, cap: int = DEFAULT_BUDGET) -> MatrixGroup:
    gens = [G.generators[i] for i in indices]
    return closure(gens, G.ring, cap=cap, scalars=G.scalars, n=G.n)


def intersect(A: MatrixGroup, B: MatrixGroup) -> MatrixGroup:
    """Set intersection of two enumerated groups over the same ring."""
    if A.ring != B.ring or A.n != B.n:
        raise ValueError("groups live in different rings/dimensions")
    small, large = (A, B) if len(A) <= len(B) else (B, A)
    rows = [row for row in small.enc if large.contains_bytes(row.tobytes())]
    enc = np.unique(np.array(rows, dtype=np.uint8), axis=0) if rows else \
        small.enc[:0]
    out = MatrixGroup(A.ring, A.n, [], enc=enc, scalars=A.scalars)
    _check_closed(out)
    return out


def _check_closed(G: MatrixGroup, probe: int = 1024):
    """Sanity check that the element set is product-closed (probe for big sets)."""
    N = len(G)
    if N == 0:
        raise ValueError("empty intersection cannot contain the identity")
    arr = G.decode_all()
    cols = arr if N <= probe else arr[:probe]
    for k in range(len(cols)):
        prods = batch_mul(G.ring, arr, cols[k])
        prods, penc = canonicalize_batch(G.ring, prods, G.scalars or [])
        for row in penc:
            if not G.contains_bytes(row.tobytes()):
                raise ValueError("intersection is not product-closed")


def orbit(v, gens, ring) -> list:
    """Orbit of a row vector under right multiplication; deterministic order."""
    start = tuple(v)
    seen = {start}
    frontier = [start]
    out = [start]
    while frontier:
        nxt = []
        for w in frontier:
            for M in gens:
                u = vec_mat(ring, w, M)
                if u not in seen:
                    seen.add(u)
                    nxt.append(u)
        nxt.sort()
        out.extend(nxt)
        frontier = nxt
    return out


def scalars_in_group(G: MatrixGroup) -> list:
    """All ring units lambda with lambda*I in G (G linear, enumerated)."""
    ring = G.ring
    ident = mat_identity(ring, G.n)
    out = []
    for lam in ring.units():
        if mat_scalar(ring, lam, ident) in G:
            out.append(lam)
    return out


def projectivize(gens, ring, cap: int = DEFAULT_BUDGET) -> MatrixGroup:
    """Quotient of <gens> by the scalar subgroup it actually contains."""
    lin = closure(gens, ring, cap=cap)
    scalars = scalars_in_group(lin)
    arr = lin.decode_all()
    _, enc = canonicalize_batch(ring, arr, scalars)
    enc = np.unique(enc, axis=0)
    canon_gens = [canonical_mat(ring, g, scalars) for g in gens]
    out = MatrixGroup(ring, lin.n, canon_gens, enc=enc, scalars=scalars)
    out.linear_order = len(lin)
    return out


def radical_pivot(ring, c):
    """Normalize a radical line vector so its pivot coordinate equals 1."""
    pivot = next((k for k, x in enumerate(c) if ring.is_unit(x)), None)
    if pivot is None:
        raise NotInvariant("radical vector has no invertible coordinate")
    inv = ring.inv(c[pivot])
    return tuple(ring.mul(x, inv) for x in c), pivot


def induce_matrix(ring, M, c, pivot):
    """Action of M on V / span(c); requires M to preserve the line span(c)."""
    n = len(M)
    w = mat_vec(ring, M, c)
    lam = w[pivot]
    if w != tuple(ring.mul(lam, x) for x in c):
        raise NotInvariant("matrix does not preserve the radical line")
    keep = [i for i in range(n) if i != pivot]
    return tuple(
        tuple(ring.sub(M[i][j], ring.mul(c[i], M[pivot][j])) for j in keep)
        for i in keep)


def quotient_by_radical_action(G: MatrixGroup, radical_basis,
                               cap: int = DEFAULT_BUDGET):
    """Induced action on V/rad, then modulo the scalars of the image.

    Returns (image, kernel_order); kernel_order is None when the order of G
    is unknown (not enumerated).  Corank-one radicals only.
    """
    ring = G.ring
    if len(radical_basis) == 0:
        if G.enc is None:
            G = closure(G.generators, ring, cap=cap)
        return G, 1
    if len(radical_basis) != 1:
        raise NotCorankOne(f"radical has dimension {len(radical_basis)}")
    c, pivot = radical_pivot(ring, list(radical_basis[0]))
    induced = [induce_matrix(ring, M, c, pivot) for M in G.generators]
    image = projectivize(induced, ring, cap=cap)
    kernel = None if G.order is None else G.order // len(image)
    return image, kernel


# ---------------------------------------------------------------------------
# homomorphism extension (graph closure)


def extends_to_automorphism(G: MatrixGroup, images,
                            cap: int | None = None) -> bool:
    """Does mapping G's generators to ``images`` extend to an automorphism?

    Decided exactly by closing the subgroup of G x G generated by the pairs
    (g_i, images_i): the map extends iff that subgroup is the graph of a
    function, and is then an automorphism iff its kernel is trivial.
    """
    if G.enc is None:
        raise ValueError("need an enumerated group")
    order = len(G)
    if cap is None:
        cap = order
    if G.scalars is None and order > 60000:
        return _extends_numpy(G, images)

    ring = G.ring
    scal = G.scalars
    key = lambda M: mat_to_bytes(ring, M, scal)
    ident_key = key(mat_identity(ring, G.n))
    gen_pairs = list(zip(G.generators, images))
    table = {ident_key: ident_key}
    frontier = [(mat_identity(ring, G.n), mat_identity(ring, G.n))]
    while frontier:
        nxt = []
        for g, h in frontier:
            for (gj, hj) in gen_pairs:
                g2 = canonical_mat(ring, mat_mul(ring, g, gj), scal)
                h2 = canonical_mat(ring, mat_mul(ring, h, hj), scal)
                k2 = key(g2)
                v2 = key(h2)
                known = table.get(k2)
                if known is None:
                    table[k2] = v2
                    nxt.append((g2, h2))
                elif known != v2:
                    return False
        frontier = nxt
    if len(table) != order:
        return False
    kernel = sum(1 for v in table.values() if v == ident_key)
    return kernel == 1


def _extends_numpy(G: MatrixGroup, images) -> bool:
    """Graph closure via block-diagonal matrices (linear groups only)."""
    ring, n, order = G.ring, G.n, len(G)
    zero = ring.zero()
    blocks = []
    for g, h in zip(G.generators, images):
        B = [[zero] * (2 * n) for _ in range(2 * n)]
        for i in range(n):
            for j in range(n):
                B[i][j] = g[i][j]
                B[n + i][n + j] = h[i][j]
        blocks.append(tuple(tuple(r) for r in B))
    try:
        pairs = closure(blocks, ring, cap=order)
    except BudgetExceeded:
        return False
    assert len(pairs) == order
    # kernel = pairs whose bottom block is the identity; decode in chunks
    ident = identity_array(ring, n)[0]
    kernel = 0
    chunk = 200_000
    for lo in range(0, order, chunk):
        arr = decode(ring, pairs.enc[lo:lo + chunk], 2 * n)
        bottom = arr[:, n:, n:]
        hit = (bottom == ident).all(axis=tuple(range(1, bottom.ndim)))
        kernel += int(hit.sum())
    return kernel == 1
