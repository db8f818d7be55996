"""Simple root systems, Weyl groups, gradings and admissible level data.

Everything here is exact: root coordinates are rationals in the standard
orthogonal realization of each type (E-types need half-integers), the
invariant form is the rescaled dot product with (theta|theta) = 2, and Weyl
group elements are stored as permutations of the root list with sign equal
to the parity of the word length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Optional, Sequence

Vector = tuple


class LieAlgebraError(Exception):
    pass


class UnsupportedTypeError(LieAlgebraError):
    pass


class WeylCapError(LieAlgebraError):
    pass


class PreconditionError(LieAlgebraError):
    """A named precondition of an operation is violated."""


# ---------------------------------------------------------------------------
# vector helpers (tuples of Fractions)

def vec(*xs) -> Vector:
    return tuple(Fraction(x) for x in xs)


def vadd(a: Vector, b: Vector) -> Vector:
    return tuple(x + y for x, y in zip(a, b))


def vsub(a: Vector, b: Vector) -> Vector:
    return tuple(x - y for x, y in zip(a, b))


def vscale(a: Vector, c) -> Vector:
    c = Fraction(c)
    return tuple(x * c for x in a)


def vdot(a: Vector, b: Vector) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def vzero(dim: int) -> Vector:
    return (Fraction(0),) * dim


def solve_linear(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> list:
    """Exact solve of a square nonsingular system by Gaussian elimination."""
    n = len(A)
    M = [list(row) + [bi] for row, bi in zip(A, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col]), None)
        if piv is None:
            raise LieAlgebraError("singular system")
        M[col], M[piv] = M[piv], M[col]
        inv = Fraction(1) / M[col][col]
        M[col] = [x * inv for x in M[col]]
        for r in range(n):
            if r != col and M[r][col]:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [M[r][n] for r in range(n)]


# ---------------------------------------------------------------------------
# simple-root tables

def _simple_roots(family: str, rank: int):
    F = Fraction
    if family == "A":
        if rank < 1:
            raise UnsupportedTypeError("A_n needs rank >= 1")
        dim = rank + 1
        return [_unit_diff(i, i + 1, dim) for i in range(rank)], dim
    if family == "B":
        if rank < 2:
            raise UnsupportedTypeError("B_n needs rank >= 2")
        roots = [_unit_diff(i, i + 1, rank) for i in range(rank - 1)]
        last = [F(0)] * rank
        last[rank - 1] = F(1)
        return roots + [tuple(last)], rank
    if family == "C":
        if rank < 2:
            raise UnsupportedTypeError("C_n needs rank >= 2")
        roots = [_unit_diff(i, i + 1, rank) for i in range(rank - 1)]
        last = [F(0)] * rank
        last[rank - 1] = F(2)
        return roots + [tuple(last)], rank
    if family == "D":
        if rank < 3:
            raise UnsupportedTypeError("D_n needs rank >= 3")
        roots = [_unit_diff(i, i + 1, rank) for i in range(rank - 1)]
        last = [F(0)] * rank
        last[rank - 2] = F(1)
        last[rank - 1] = F(1)
        return roots + [tuple(last)], rank
    if family == "E":
        if rank not in (6, 7, 8):
            raise UnsupportedTypeError("E_n needs rank in {6,7,8}")
        e8 = [
            tuple(F(1, 2) * s for s in (1, -1, -1, -1, -1, -1, -1, 1)),
            vec(1, 1, 0, 0, 0, 0, 0, 0),
            vec(-1, 1, 0, 0, 0, 0, 0, 0),
            vec(0, -1, 1, 0, 0, 0, 0, 0),
            vec(0, 0, -1, 1, 0, 0, 0, 0),
            vec(0, 0, 0, -1, 1, 0, 0, 0),
            vec(0, 0, 0, 0, -1, 1, 0, 0),
            vec(0, 0, 0, 0, 0, -1, 1, 0),
        ]
        return e8[:rank], 8
    if family == "F":
        if rank != 4:
            raise UnsupportedTypeError("F family has rank 4 only")
        return [
            vec(0, 1, -1, 0),
            vec(0, 0, 1, -1),
            vec(0, 0, 0, 1),
            tuple(Fraction(1, 2) * s for s in (1, -1, -1, -1)),
        ], 4
    if family == "G":
        if rank != 2:
            raise UnsupportedTypeError("G family has rank 2 only")
        return [vec(1, -1, 0), vec(-2, 1, 1)], 3
    raise UnsupportedTypeError(f"unknown family {family!r}")


def _unit_diff(i: int, j: int, dim: int) -> Vector:
    v = [Fraction(0)] * dim
    v[i] = Fraction(1)
    v[j] = Fraction(-1)
    return tuple(v)


_DEGREES = {
    "A": lambda n: list(range(2, n + 2)),
    "B": lambda n: list(range(2, 2 * n + 1, 2)),
    "C": lambda n: list(range(2, 2 * n + 1, 2)),
    "D": lambda n: list(range(2, 2 * n - 1, 2)) + [n],
    "E": lambda n: {6: [2, 5, 6, 8, 9, 12],
                    7: [2, 6, 8, 10, 12, 14, 18],
                    8: [2, 8, 12, 14, 18, 20, 24, 30]}[n],
    "F": lambda n: [2, 6, 8, 12],
    "G": lambda n: [2, 6],
}


def weyl_order(family: str, rank: int) -> int:
    out = 1
    for d in _DEGREES[family](rank):
        out *= d
    return out


# ---------------------------------------------------------------------------

class RootSystem:
    """Exact root data of a simple Lie algebra, (theta|theta) = 2."""

    def __init__(self, family: str, rank: int):
        family = family.upper()
        simples, ambient = _simple_roots(family, rank)
        self.family = family
        self.rank = rank
        self.ambient_dim = ambient
        roots = _reflection_closure(simples)
        # normalize the form so long roots have squared length 2
        max_n2 = max(vdot(r, r) for r in roots)
        self.form_scale = Fraction(2) / max_n2
        self.simple_roots = tuple(simples)
        self.roots = tuple(sorted(roots))
        self.root_index = {r: i for i, r in enumerate(self.roots)}
        self._gram = [[self.form(a, b) for b in simples] for a in simples]
        self.positive_roots = tuple(
            r for r in self.roots if _is_positive(self.decompose_simple(r)[0])
        )
        if 2 * len(self.positive_roots) != len(self.roots):
            raise LieAlgebraError("positive roots do not split the root set")
        self.highest_root = max(
            self.positive_roots, key=lambda r: sum(self.decompose_simple(r)[0])
        )
        if self.norm2(self.highest_root) != 2:
            raise LieAlgebraError("highest root is not long after normalization")
        self.rho = vscale(_vsum(self.positive_roots, ambient), Fraction(1, 2))
        self.rho_check = vscale(
            _vsum([self.coroot(r) for r in self.positive_roots], ambient),
            Fraction(1, 2),
        )
        self.coxeter_number = int(self.form(self.highest_root, self.rho_check)) + 1
        self.dual_coxeter_number = int(self.form(self.rho, self.highest_root)) + 1
        self.dim_g = len(self.roots) + rank
        self.lacety = int(Fraction(2) / min(self.norm2(r) for r in self.roots))
        # Cartan matrix A[i][j] = <alpha_j, alpha_i^vee>
        self.cartan = tuple(
            tuple(int(2 * self.form(sj, si) / self.norm2(si)) for sj in simples)
            for si in simples
        )
        self.coroot_basis = tuple(self.coroot(s) for s in simples)
        self.fundamental_weights = tuple(self._fundamental_weights())
        self.weight_index = _det_int(self.cartan)  # |P/Q^vee|
        self._check_invariants()

    # -- form and spans ------------------------------------------------------

    def form(self, a: Vector, b: Vector) -> Fraction:
        return self.form_scale * vdot(a, b)

    def norm2(self, a: Vector) -> Fraction:
        return self.form(a, a)

    def coroot(self, a: Vector) -> Vector:
        return vscale(a, Fraction(2) / self.norm2(a))

    def decompose_simple(self, v: Vector):
        """Write v = sum c_i alpha_i + perp; return (coeffs, perp)."""
        rhs = [self.form(s, v) for s in self.simple_roots]
        coeffs = solve_linear(self._gram, rhs)
        proj = _vsum(
            [vscale(s, c) for s, c in zip(self.simple_roots, coeffs)],
            self.ambient_dim,
        )
        return coeffs, vsub(v, proj)

    def in_root_span(self, v: Vector) -> bool:
        return not any(self.decompose_simple(v)[1])

    def root_height(self, r: Vector) -> Fraction:
        return sum(self.decompose_simple(r)[0])

    def is_root(self, v: Vector) -> bool:
        return v in self.root_index

    def _fundamental_weights(self):
        out = []
        n = self.rank
        for i in range(n):
            rhs = [Fraction(1) if j == i else Fraction(0) for j in range(n)]
            # (omega_i | alpha_j^vee) = delta_ij with omega_i in the root span
            A = [[self.form(s, cb) for s in self.simple_roots] for cb in self.coroot_basis]
            coeffs = solve_linear(A, rhs)
            out.append(
                _vsum([vscale(s, c) for s, c in zip(self.simple_roots, coeffs)],
                      self.ambient_dim)
            )
        return out

    def longest_leg(self) -> int:
        """The bound b: 2 for D_n, h^vee/6 + 1 for E types."""
        if self.family == "D" and self.rank >= 4:
            return 2
        if self.family == "E":
            return self.dual_coxeter_number // 6 + 1
        raise PreconditionError(
            "marked-root bound is defined for D_n (n>=4) and E types only"
        )

    def _check_invariants(self):
        if self.norm2(self.highest_root) != 2:
            raise LieAlgebraError("(theta|theta) != 2")
        for s in self.simple_roots:
            if self.form(self.rho, self.coroot(s)) != 1:
                raise LieAlgebraError("rho pairing violated")
        if len(self.roots) != self.dim_g - self.rank:
            raise LieAlgebraError("root count mismatch")

    def to_json_dict(self) -> dict:
        return {
            "type": f"{self.family}{self.rank}",
            "rank": self.rank,
            "dim": self.dim_g,
            "num_roots": len(self.roots),
            "coxeter": self.coxeter_number,
            "dual_coxeter": self.dual_coxeter_number,
            "lacety": self.lacety,
            "weight_index": self.weight_index,
            "highest_root": [str(x) for x in self.highest_root],
            "weyl_order": weyl_order(self.family, self.rank),
        }

    def __repr__(self):
        return f"RootSystem({self.family}{self.rank})"


def _vsum(vs, dim: int) -> Vector:
    out = list(vzero(dim))
    for v in vs:
        for i, x in enumerate(v):
            out[i] += x
    return tuple(out)


def _is_positive(coeffs) -> bool:
    has_pos = any(c > 0 for c in coeffs)
    has_neg = any(c < 0 for c in coeffs)
    if has_pos and has_neg:
        raise LieAlgebraError("mixed-sign root decomposition")
    return has_pos


def _reflection_closure(simples):
    dim = len(simples[0])
    roots = set(simples)
    frontier = set(simples)
    while frontier:
        new = set()
        for r in frontier:
            for s in simples:
                c = 2 * vdot(r, s) / vdot(s, s)
                img = vsub(r, vscale(s, c))
                if img not in roots:
                    new.add(img)
        roots |= new
        frontier = new
    return roots


def _det_int(M) -> int:
    n = len(M)
    A = [[Fraction(x) for x in row] for row in M]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col]), None)
        if piv is None:
            return 0
        if piv != col:
            A[col], A[piv] = A[piv], A[col]
            det = -det
        det *= A[col][col]
        inv = Fraction(1) / A[col][col]
        for r in range(col + 1, n):
            if A[r][col]:
                f = A[r][col] * inv
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    assert det.denominator == 1
    return abs(det.numerator)


@lru_cache(maxsize=None)
def build_root_system(family: str, rank: int) -> RootSystem:
    return RootSystem(family, rank)


def root_system_from_name(name: str) -> RootSystem:
    name = name.strip().upper()
    if len(name) < 2 or name[0] not in "ABCDEFG":
        raise UnsupportedTypeError(f"cannot parse algebra name {name!r}")
    return build_root_system(name[0], int(name[1:]))


# ---------------------------------------------------------------------------
# Weyl group

DEFAULT_WEYL_CAP = 10 ** 7


class WeylGroup:
    """Full enumeration as permutations of the root list.

    ``perms[i]`` maps root index j to the index of w(root_j); ``signs[i]``
    is det(w) = (-1)^{length}.  Element 0 is the identity.
    """

    def __init__(self, rs: RootSystem, cap: int = DEFAULT_WEYL_CAP):
        order = weyl_order(rs.family, rs.rank)
        if order > cap:
            raise WeylCapError(
                f"|W({rs.family}{rs.rank})| = {order} exceeds the cap {cap}"
            )
        self.rs = rs
        self.order = order
        n = len(rs.roots)
        wide = n > 255
        gens = []
        for s in rs.simple_roots:
            imgs = []
            for r in rs.roots:
                c = 2 * rs.form(r, s) / rs.norm2(s)
                imgs.append(rs.root_index[vsub(r, vscale(s, c))])
            gens.append(tuple(imgs) if wide else bytes(imgs))
        ident = tuple(range(n)) if wide else bytes(range(n))
        perms = [ident]
        signs = [1]
        seen = {ident: 0}
        frontier = [ident]
        sign = 1
        while frontier:
            sign = -sign
            new = []
            for p in frontier:
                for g in gens:
                    comp = tuple(p[g[j]] for j in range(n))
                    if not wide:
                        comp = bytes(comp)
                    if comp not in seen:
                        seen[comp] = len(perms)
                        perms.append(comp)
                        signs.append(sign)
                        new.append(comp)
            frontier = new
        if len(perms) != order:
            raise LieAlgebraError(
                f"enumerated {len(perms)} Weyl elements, expected {order}"
            )
        self.perms = perms
        self.signs = signs
        self._simple_idx = [rs.root_index[s] for s in rs.simple_roots]

    def __len__(self):
        return self.order

    def apply_to_root_index(self, i_elem: int, i_root: int) -> int:
        return self.perms[i_elem][i_root]

    def decompose(self, v: Vector):
        """Pre-split v for fast application: (simple coeffs, fixed part)."""
        coeffs, perp = self.rs.decompose_simple(v)
        return tuple(coeffs), perp

    def apply_decomposed(self, i_elem: int, coeffs, perp: Vector) -> Vector:
        p = self.perms[i_elem]
        roots = self.rs.roots
        out = list(perp)
        for c, si in zip(coeffs, self._simple_idx):
            if c:
                img = roots[p[si]]
                for k, x in enumerate(img):
                    out[k] += c * x
        return tuple(out)

    def apply(self, i_elem: int, v: Vector) -> Vector:
        coeffs, perp = self.decompose(v)
        return self.apply_decomposed(i_elem, coeffs, perp)

    def sign(self, i_elem: int) -> int:
        return self.signs[i_elem]

    def inverse(self, i_elem: int) -> int:
        p = self.perms[i_elem]
        n = len(p)
        inv = [0] * n
        for j in range(n):
            inv[p[j]] = j
        key = bytes(inv) if isinstance(p, bytes) else tuple(inv)
        return self._index_of(key)

    def compose(self, i: int, j: int) -> int:
        """Index of w_i * w_j."""
        p, q = self.perms[i], self.perms[j]
        comp = tuple(p[q[k]] for k in range(len(p)))
        if isinstance(p, bytes):
            comp = bytes(comp)
        return self._index_of(comp)

    def _index_of(self, perm) -> int:
        try:
            return self._lookup[perm]
        except AttributeError:
            self._lookup = {p: i for i, p in enumerate(self.perms)}
            return self._lookup[perm]

    def reflection_index(self, root: Vector) -> int:
        """Index of the reflection r_root."""
        rs = self.rs
        n = len(rs.roots)
        imgs = []
        for r in rs.roots:
            c = 2 * rs.form(r, root) / rs.norm2(root)
            imgs.append(rs.root_index[vsub(r, vscale(root, c))])
        key = bytes(imgs) if n <= 255 else tuple(imgs)
        return self._index_of(key)


@lru_cache(maxsize=8)
def weyl_group(rs: RootSystem, cap: int = DEFAULT_WEYL_CAP) -> WeylGroup:
    return WeylGroup(rs, cap)


# ---------------------------------------------------------------------------
# marked roots alpha^(j)

def alpha_j(rs: RootSystem, j: int) -> Vector:
    """theta minus a unique set of j-1 distinct simple roots, for D/E types."""
    b = rs.longest_leg()
    if not 1 <= j <= b:
        raise PreconditionError(f"marked-root index {j} outside 1..{b}")
    found = []
    for subset in combinations(range(rs.rank), j - 1):
        cand = rs.highest_root
        for i in subset:
            cand = vsub(cand, rs.simple_roots[i])
        if cand in rs.root_index:
            found.append(cand)
    if len(found) != 1:
        raise LieAlgebraError(
            f"expected a unique marked root at level {j}, found {len(found)}"
        )
    expected = rs.dual_coxeter_number - j
    if rs.form(rs.rho, found[0]) != expected:
        raise LieAlgebraError("marked root fails the rho-pairing check")
    return found[0]


# ---------------------------------------------------------------------------
# gradings attached to sl2-triples

class NilpotentSlice:
    """Grading data of an sl2-triple: x, graded root sets, h^f, beta.

    ``hf_basis`` is a tuple of integral vectors spanning the Cartan part of
    the centralizer, () when that space is zero, or None when it is not
    derivable from the construction (then all z-dependent work runs at z=0).
    """

    def __init__(self, rs: RootSystem, kind: str, x: Vector,
                 hf_basis, beta: Vector, labels=None):
        self.rs = rs
        self.kind = kind
        self.x = x
        self.labels = labels
        self.hf_basis = hf_basis
        self.beta = beta
        grading: dict = {}
        for r in rs.roots:
            jv = rs.form(r, x)
            if (2 * jv).denominator != 1:
                raise LieAlgebraError(f"grading value 2*{jv} is not integral")
            grading.setdefault(jv, []).append(r)
        self.grading = {j: tuple(sorted(v)) for j, v in grading.items()}
        self.dims = {j: len(v) for j, v in self.grading.items()}
        self.dims[Fraction(0)] = self.dims.get(Fraction(0), 0) + rs.rank
        self.dim_g_f = self.dims[Fraction(0)] + self.dims.get(Fraction(1, 2), 0)
        self.theta_x = rs.form(rs.highest_root, x)
        self._validate()

    def _validate(self):
        rs = self.rs
        total = sum(self.dims.values())
        if total != rs.dim_g:
            raise LieAlgebraError("graded dimensions do not sum to dim g")
        for j, d in self.dims.items():
            if j > 0 and self.dims.get(-j, 0) != d:
                raise LieAlgebraError("graded dimensions are not symmetric")
        bx = rs.form(self.beta, self.x)
        if bx.denominator != 1 or bx <= 0:
            raise LieAlgebraError("chosen beta must have a positive integer grade")
        if self.hf_basis:
            for h in self.hf_basis:
                if rs.form(self.beta, h):
                    raise LieAlgebraError("beta does not vanish on h^f")

    def dim_gj(self, j) -> int:
        return self.dims.get(Fraction(j), 0)

    def roots_at(self, j) -> tuple:
        return self.grading.get(Fraction(j), ())

    @property
    def delta_plus_0(self) -> tuple:
        """Positive roots with grade 0."""
        pos = set(self.rs.positive_roots)
        return tuple(r for r in self.roots_at(0) if r in pos)

    @property
    def delta_half(self) -> tuple:
        """Roots with grade +1/2."""
        return self.roots_at(Fraction(1, 2))

    def positive_grades(self):
        return sorted(j for j in self.dims if j > 0)

    def hf_available(self) -> bool:
        return self.hf_basis is not None

    def to_json_dict(self) -> dict:
        dims = {str(j): d for j, d in sorted(self.dims.items())}
        return {
            "type": f"{self.rs.family}{self.rs.rank}",
            "kind": self.kind,
            "labels": list(self.labels) if self.labels is not None else None,
            "x": [str(c) for c in self.x],
            "graded_dims": dims,
            "dim_centralizer": self.dim_g_f,
            "theta_x": str(self.theta_x),
            "beta": [str(c) for c in self.beta],
            "hf_dim": len(self.hf_basis) if self.hf_basis is not None else None,
        }

    def __repr__(self):
        return f"NilpotentSlice({self.rs.family}{self.rs.rank}, {self.kind})"


@lru_cache(maxsize=None)
def minimal_slice(rs: RootSystem) -> NilpotentSlice:
    """x = theta/2; the unique valid marking root is theta itself."""
    x = vscale(rs.highest_root, Fraction(1, 2))
    hf = _perp_lattice_basis(rs, [rs.highest_root])
    return NilpotentSlice(rs, "minimal", x, hf, rs.highest_root)


@lru_cache(maxsize=None)
def principal_slice(rs: RootSystem) -> NilpotentSlice:
    """x = rho^vee: every simple root has grade 1, h^f = 0."""
    return NilpotentSlice(rs, "principal", rs.rho_check, (), rs.highest_root)


def dynkin_slice(rs: RootSystem, labels) -> NilpotentSlice:
    """Grading from labels in {0,1,2}: alpha_i(x) = label_i / 2."""
    labels = tuple(int(v) for v in labels)
    if len(labels) != rs.rank or any(v not in (0, 1, 2) for v in labels):
        raise PreconditionError("labels must be one value in {0,1,2} per simple root")
    rhs = [Fraction(v, 2) for v in labels]
    A = [[rs.form(si, sj) for sj in rs.simple_roots] for si in rs.simple_roots]
    coeffs = solve_linear(A, rhs)
    x = _vsum([vscale(s, c) for s, c in zip(rs.simple_roots, coeffs)], rs.ambient_dim)
    if x == vscale(rs.highest_root, Fraction(1, 2)):
        return minimal_slice(rs)
    if x == rs.rho_check:
        return principal_slice(rs)
    beta = _minimal_integral_beta(rs, x)
    return NilpotentSlice(rs, "dynkin", x, None, beta, labels)


def _minimal_integral_beta(rs: RootSystem, x: Vector) -> Vector:
    cands = [
        r for r in rs.positive_roots
        if rs.form(r, x).denominator == 1 and rs.form(r, x) > 0
    ]
    if not cands:
        raise LieAlgebraError(
            "no positive root with positive integer grade exists for these labels"
        )
    return min(cands, key=lambda r: (rs.root_height(r), r))


def _perp_lattice_basis(rs: RootSystem, normals) -> tuple:
    """Integer basis of {gamma in Q^vee : (gamma|n) = 0 for all normals}."""
    rows = [[_as_int(rs.form(cb, n)) for cb in rs.coroot_basis] for n in normals]
    kernel = integer_kernel(rows)
    basis = []
    for kv in kernel:
        basis.append(_vsum(
            [vscale(cb, c) for cb, c in zip(rs.coroot_basis, kv)],
            rs.ambient_dim,
        ))
    return tuple(basis)


def _as_int(fr: Fraction) -> int:
    if fr.denominator != 1:
        raise LieAlgebraError(f"expected an integer, got {fr}")
    return fr.numerator


# ---------------------------------------------------------------------------
# Smith normal form over Z and coset machinery

def smith_normal_form(A):
    """Return (D, U, V) with U*A*V = D diagonal, U and V unimodular."""
    rows = len(A)
    cols = len(A[0]) if rows else 0
    D = [list(r) for r in A]
    U = [[int(i == j) for j in range(rows)] for i in range(rows)]
    V = [[int(i == j) for j in range(cols)] for i in range(cols)]

    def row_op(i, j, c):  # row_i -= c * row_j
        D[i] = [a - c * b for a, b in zip(D[i], D[j])]
        U[i] = [a - c * b for a, b in zip(U[i], U[j])]

    def col_op(i, j, c):  # col_i -= c * col_j
        for r in range(rows):
            D[r][i] -= c * D[r][j]
        for r in range(cols):
            V[r][i] -= c * V[r][j]

    def row_swap(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def col_swap(i, j):
        for r in range(rows):
            D[r][i], D[r][j] = D[r][j], D[r][i]
        for r in range(cols):
            V[r][i], V[r][j] = V[r][j], V[r][i]

    t = 0
    while t < min(rows, cols):
        piv = None
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                if D[i][j] and (best is None or abs(D[i][j]) < best):
                    best = abs(D[i][j])
                    piv = (i, j)
        if piv is None:
            break
        row_swap(t, piv[0])
        col_swap(t, piv[1])
        while True:
            done = True
            for i in range(t + 1, rows):
                if D[i][t]:
                    row_op(i, t, D[i][t] // D[t][t])
                    if D[i][t]:
                        row_swap(t, i)
                        done = False
            for j in range(t + 1, cols):
                if D[t][j]:
                    col_op(j, t, D[t][j] // D[t][t])
                    if D[t][j]:
                        col_swap(t, j)
                        done = False
            if done:
                break
        if D[t][t] < 0:
            D[t] = [-a for a in D[t]]
            U[t] = [-a for a in U[t]]
        t += 1
    # D is diagonal with U*A*V = D; the invariant-factor divisibility chain
    # is not needed by the coset/kernel consumers below.
    return D, U, V


def integer_kernel(A):
    """Basis of the integer kernel of the rows-by-cols matrix A."""
    rows = len(A)
    cols = len(A[0]) if rows else 0
    if rows == 0:
        return [[int(i == j) for j in range(cols)] for i in range(cols)]
    D, U, V = smith_normal_form(A)
    rank = sum(1 for i in range(min(rows, cols)) if D[i][i])
    return [[V[r][j] for r in range(cols)] for j in range(rank, cols)]


def _int_matrix_inverse(U):
    n = len(U)
    A = [[Fraction(x) for x in row] for row in U]
    cols = []
    for i in range(n):
        e = [Fraction(1) if j == i else Fraction(0) for j in range(n)]
        cols.append(solve_linear(A, e))
    return [[_as_int(cols[j][i]) for j in range(n)] for i in range(n)]


class WeightCosets:
    """Representatives of P / n Q^vee with a reduction map.

    Weights are handled by their integer coordinates in the fundamental
    weight basis.
    """

    def __init__(self, rs: RootSystem, n: int):
        self.rs = rs
        self.n = n
        l = rs.rank
        # columns: coordinates of n*alpha_j^vee in the weight basis
        X = [[_as_int(n * rs.form(rs.coroot_basis[j], rs.coroot_basis[i]))
              for j in range(l)] for i in range(l)]
        D, U, V = smith_normal_form(X)
        self.diag = [D[i][i] for i in range(l)]
        if any(d == 0 for d in self.diag):
            raise LieAlgebraError("degenerate coset lattice")
        self.U = U
        self.Uinv = _int_matrix_inverse(U)
        self.size = 1
        for d in self.diag:
            self.size *= d

    def reps(self):
        """Integer weight-basis coordinates of all coset representatives."""
        out = []
        idx = [0] * len(self.diag)
        while True:
            out.append(tuple(
                sum(self.Uinv[i][k] * idx[k] for k in range(len(idx)))
                for i in range(len(idx))
            ))
            for pos in range(len(idx) - 1, -1, -1):
                idx[pos] += 1
                if idx[pos] < self.diag[pos]:
                    break
                idx[pos] = 0
            else:
                break
        return out

    def reduce(self, weight_coords) -> int:
        """Mixed-radix index of the coset of the given weight coordinates."""
        r = [
            sum(self.U[i][k] * weight_coords[k] for k in range(len(weight_coords)))
            % self.diag[i]
            for i in range(len(self.diag))
        ]
        idx = 0
        for i, d in enumerate(self.diag):
            idx = idx * d + r[i]
        return idx

    def index_of_rep(self, rep) -> int:
        return self.reduce(rep)

    def vector(self, coords) -> Vector:
        return _vsum(
            [vscale(w, c) for w, c in zip(self.rs.fundamental_weights, coords)],
            self.rs.ambient_dim,
        )

    def weight_coords(self, v: Vector):
        """Integer coordinates of a weight-lattice vector in the omega basis."""
        out = []
        for cb in self.rs.coroot_basis:
            out.append(_as_int(self.rs.form(v, cb)))
        return tuple(out)


@lru_cache(maxsize=32)
def weight_cosets(rs: RootSystem, n: int) -> WeightCosets:
    return WeightCosets(rs, n)


# ---------------------------------------------------------------------------
# exact lattice-ball enumeration

class Lattice:
    """Sublattice with exact Gram data and ball enumeration."""

    def __init__(self, rs: RootSystem, basis):
        self.rs = rs
        self.basis = tuple(basis)
        r = len(self.basis)
        self.gram = [[rs.form(a, b) for b in self.basis] for a in self.basis]
        # LDL^T: Q(v) = sum_i d_i (v_i + sum_{j>i} L[j][i] v_j)^2
        L = [[Fraction(0)] * r for _ in range(r)]
        d = [Fraction(0)] * r
        for i in range(r):
            s = self.gram[i][i] - sum(L[i][k] * L[i][k] * d[k] for k in range(i))
            if s <= 0:
                raise LieAlgebraError("lattice Gram matrix is not positive definite")
            d[i] = s
            L[i][i] = Fraction(1)
            for j in range(i + 1, r):
                L[j][i] = (self.gram[j][i]
                           - sum(L[j][k] * L[i][k] * d[k] for k in range(i))) / d[i]
        self.L = L
        self.d = d

    def coords(self, v: Vector):
        """Exact coordinates of an ambient vector in the lattice basis."""
        rhs = [self.rs.form(b, v) for b in self.basis]
        return solve_linear(self.gram, rhs)

    def vector(self, coords) -> Vector:
        return _vsum(
            [vscale(b, c) for b, c in zip(self.basis, coords)],
            self.rs.ambient_dim,
        )

    def enumerate_ball(self, center_coords, r2: Fraction):
        """All integer coordinate tuples m with Q(m - c) <= r2 (exact)."""
        r = len(self.basis)
        c = [Fraction(x) for x in center_coords]
        out = []
        m = [0] * r

        def descend(i: int, rem: Fraction):
            if i < 0:
                out.append(tuple(m))
                return
            shift = c[i] - sum(self.L[j][i] * (m[j] - c[j]) for j in range(i + 1, r))
            di = self.d[i]
            base = math.floor(shift)
            k = base
            while di * (k - shift) ** 2 <= rem:
                m[i] = k
                descend(i - 1, rem - di * (k - shift) ** 2)
                k -= 1
            k = base + 1
            while di * (k - shift) ** 2 <= rem:
                m[i] = k
                descend(i - 1, rem - di * (k - shift) ** 2)
                k += 1

        descend(r - 1, Fraction(r2))
        return out


@lru_cache(maxsize=None)
def coroot_lattice(rs: RootSystem) -> Lattice:
    return Lattice(rs, rs.coroot_basis)


@lru_cache(maxsize=None)
def weight_lattice(rs: RootSystem) -> Lattice:
    return Lattice(rs, rs.fundamental_weights)


# ---------------------------------------------------------------------------
# affine weights and admissible level data

@dataclass(frozen=True)
class AffineWeight:
    """finite part + level * Lambda_0 + delta_coeff * delta."""

    finite: Vector
    level: Fraction
    delta_coeff: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "finite", tuple(Fraction(x) for x in self.finite))
        object.__setattr__(self, "level", Fraction(self.level))
        object.__setattr__(self, "delta_coeff", Fraction(self.delta_coeff))


def vacuum_weight(rs: RootSystem, level) -> AffineWeight:
    return AffineWeight(vzero(rs.ambient_dim), Fraction(level))


def rho_hat_shifted(rs: RootSystem, k) -> AffineWeight:
    """k*Lambda_0 + rho_hat: finite part rho, level k + h^vee."""
    return AffineWeight(rs.rho, Fraction(k) + rs.dual_coxeter_number)


@dataclass(frozen=True)
class AdmissibleLevel:
    p: int
    u: int
    k: Fraction
    vacuum: AffineWeight
    integrable_top: AffineWeight  # (p - h^vee) Lambda_0


def principal_admissible_vacuum(rs: RootSystem, p: int, u: int) -> AdmissibleLevel:
    """Level data for k + h^vee = p/u with the vacuum integrable top."""
    hv = rs.dual_coxeter_number
    if p < hv:
        raise PreconditionError(f"p = {p} violates p >= h_vee = {hv}")
    if math.gcd(p, u) != 1:
        raise PreconditionError(f"gcd(p, u) = {math.gcd(p, u)} != 1")
    if math.gcd(u, rs.lacety) != 1:
        raise PreconditionError(
            f"gcd(u, lacety) = {math.gcd(u, rs.lacety)} != 1"
        )
    k = Fraction(p, u) - hv
    return AdmissibleLevel(
        p=p, u=u, k=k,
        vacuum=vacuum_weight(rs, k),
        integrable_top=vacuum_weight(rs, p - hv),
    )


def boundary_level(rs: RootSystem, u: int) -> Fraction:
    """k_u = h^vee (1-u)/u (requires gcd(u, h^vee) = gcd(u, lacety) = 1)."""
    hv = rs.dual_coxeter_number
    if math.gcd(u, hv) != 1:
        raise PreconditionError(f"gcd(u, h_vee) = {math.gcd(u, hv)} != 1")
    if math.gcd(u, rs.lacety) != 1:
        raise PreconditionError(f"gcd(u, lacety) = {math.gcd(u, rs.lacety)} != 1")
    return Fraction(hv * (1 - u), u)


# ---------------------------------------------------------------------------
# deterministic generic directions in h^f

def generic_direction(slice_: NilpotentSlice, seed: int = 0) -> Vector:
    """Deterministic rational direction in h^f, generic for the grading.

    Generic means (alpha|z0) != 0 for every root not identically zero on
    h^f.  Raises when h^f is unavailable or zero.
    """
    rs = slice_.rs
    basis = slice_.hf_basis
    if basis is None:
        raise PreconditionError(
            "h^f is unavailable for this grading; z must be 0"
        )
    if not basis:
        raise PreconditionError("h^f is zero; z must be 0")
    relevant = [
        r for r in rs.positive_roots
        if any(rs.form(r, b) for b in basis)
    ]
    s = seed
    for _ in range(64):
        coeffs = [Fraction((s + 2) ** i) for i in range(len(basis))]
        z0 = _vsum([vscale(b, c) for b, c in zip(basis, coeffs)], rs.ambient_dim)
        if all(rs.form(r, z0) for r in relevant):
            return z0
        s += 1
    raise LieAlgebraError("failed to find a generic direction")


def direction_in_hf(slice_: NilpotentSlice, z0: Vector, allow_zero=True):
    """Validate that z0 lies in h^f (as far as the stored data can check)."""
    rs = slice_.rs
    if not any(z0):
        if allow_zero:
            return z0
        raise PreconditionError("direction must be nonzero")
    if slice_.hf_basis is None:
        raise PreconditionError("this grading only supports z = 0")
    if rs.form(slice_.beta, z0):
        raise PreconditionError("direction does not annihilate the marking root")
    if slice_.kind == "minimal" and rs.form(rs.highest_root, z0):
        raise PreconditionError("direction is not orthogonal to the highest root")
    # must be in the span of the stored basis
    coeffs = solve_linear(
        [[rs.form(a, b) for b in slice_.hf_basis] for a in slice_.hf_basis],
        [rs.form(z0, b) for b in slice_.hf_basis],
    )
    proj = _vsum(
        [vscale(b, c) for b, c in zip(slice_.hf_basis, coeffs)], rs.ambient_dim
    )
    if proj != tuple(z0):
        raise PreconditionError("direction is outside h^f")
    return tuple(Fraction(c) for c in z0)
