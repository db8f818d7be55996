"""Exact truncated series in q with jet coefficients along a direction parameter.

Elements are finite sums ``sum_e J_e(u) * q^e`` where the exponents e are
rationals on a common grid (1/M)Z bounded by an exactness window, and each
J_e is a polynomial in u truncated at a fixed jet order U, with
Gaussian-rational coefficients.  Restricting a function of (tau, z) to the
line z = (u / 2 pi i) * z0 turns every factor e^{2 pi i (mu|z)} into the jet
exp(u * (mu|z0)), so the whole object becomes such a series.

Every series tracks the exponent bound up to which its coefficients are
exact (``cutoff``); ring operations propagate the honest window, so a claim
"equal through q^N" is never silently optimistic.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional


class SeriesError(Exception):
    """Base error for the series ring."""


class IncompatibleSeriesError(SeriesError):
    """Operands disagree on jet order or direction."""


class TruncationError(SeriesError):
    """Requested operation needs terms beyond the exact window."""


class ExactPhaseError(SeriesError):
    """A phase outside {1, -1, i, -i} appeared in exact mode."""


class QQi:
    """Gaussian rational a + b*i with exact Fraction parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        other = as_qqi(other)
        if other is NotImplemented:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __add__(self, other):
        other = as_qqi(other)
        if other is NotImplemented:
            return NotImplemented
        return QQi(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = as_qqi(other)
        if other is NotImplemented:
            return NotImplemented
        return QQi(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return as_qqi(other).__sub__(self)

    def __neg__(self):
        return QQi(-self.re, -self.im)

    def __mul__(self, other):
        other = as_qqi(other)
        if other is NotImplemented:
            return NotImplemented
        if not other.im:
            return QQi(self.re * other.re, self.im * other.re)
        if not self.im:
            return QQi(self.re * other.re, self.re * other.im)
        return QQi(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_qqi(other)
        if other is NotImplemented:
            return NotImplemented
        if not other:
            raise ZeroDivisionError("division by zero Gaussian rational")
        if not other.im:
            return QQi(self.re / other.re, self.im / other.re)
        n = other.re * other.re + other.im * other.im
        return QQi(
            (self.re * other.re + self.im * other.im) / n,
            (self.im * other.re - self.re * other.im) / n,
        )

    def conjugate(self):
        return QQi(self.re, -self.im)

    def is_rational(self):
        return not self.im

    def to_complex(self) -> complex:
        return complex(self.re) + 1j * complex(self.im)

    def __repr__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


def as_qqi(value) -> QQi:
    if isinstance(value, QQi):
        return value
    if isinstance(value, (int, Fraction)):
        return QQi(value)
    return NotImplemented


QQI_ZERO = QQi(0)
QQI_ONE = QQi(1)
QQI_I = QQi(0, 1)

_UNIT_CYCLE = (QQI_ONE, QQI_I, QQi(-1), QQi(0, -1))


def phase_unit(c: Fraction) -> QQi:
    """e^{2 pi i c} as a Gaussian rational; requires 4c integral."""
    c = Fraction(c)
    q = 4 * c
    if q.denominator != 1:
        raise ExactPhaseError(
            f"phase exponent {c} is not a quarter integer; "
            "use the numerical evaluators for this input"
        )
    return _UNIT_CYCLE[q.numerator % 4]


# ---------------------------------------------------------------------------
# Jets: tuples of QQi of length U+1 representing sum_k a_k u^k mod u^{U+1}.

def jet_zero(U: int) -> tuple:
    return (QQI_ZERO,) * (U + 1)


def jet_scalar(c, U: int) -> tuple:
    return (as_qqi(c),) + (QQI_ZERO,) * U


def jet_add(a: tuple, b: tuple) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


def jet_neg(a: tuple) -> tuple:
    return tuple(-x for x in a)


def jet_scale(a: tuple, c) -> tuple:
    c = as_qqi(c)
    return tuple(x * c for x in a)


def jet_mul(a: tuple, b: tuple) -> tuple:
    U = len(a) - 1
    out = [QQI_ZERO] * (U + 1)
    for i, ai in enumerate(a):
        if not ai:
            continue
        for j in range(U + 1 - i):
            bj = b[j]
            if bj:
                out[i + j] = out[i + j] + ai * bj
    return tuple(out)


def jet_is_zero(a: tuple) -> bool:
    return not any(a)


def jet_uval(a: tuple) -> Optional[int]:
    for k, c in enumerate(a):
        if c:
            return k
    return None


def jet_inv(a: tuple) -> tuple:
    """Inverse of a jet with nonzero constant term."""
    if not a[0]:
        raise TruncationError("jet has zero constant term; factor u first")
    U = len(a) - 1
    inv0 = QQI_ONE / a[0]
    out = [inv0] + [QQI_ZERO] * U
    for k in range(1, U + 1):
        s = QQI_ZERO
        for j in range(1, k + 1):
            if a[j]:
                s = s + a[j] * out[k - j]
        out[k] = -inv0 * s
    return tuple(out)


def jet_sqrt(a: tuple) -> tuple:
    """Square root of a jet with constant term exactly 1."""
    if a[0] != QQI_ONE:
        raise TruncationError("jet square root requires constant term 1")
    U = len(a) - 1
    half = Fraction(1, 2)
    out = [QQI_ONE] + [QQI_ZERO] * U
    for k in range(1, U + 1):
        s = QQI_ZERO
        for j in range(1, k):
            s = s + out[j] * out[k - j]
        out[k] = (a[k] - s) * half
    return tuple(out)


def jet_exp_linear(c: Fraction, U: int) -> tuple:
    """exp(c*u) truncated at order U."""
    out = [QQI_ONE]
    term = Fraction(1)
    cf = Fraction(c)
    for k in range(1, U + 1):
        term = term * cf / k
        out.append(QQi(term))
    return tuple(out)


# ---------------------------------------------------------------------------

def _lcm(a: int, b: int) -> int:
    return a // math.gcd(a, b) * b


class QJetSeries:
    """Truncated bigraded series: q-exponents on a grid (1/M)Z, jet order U.

    ``terms`` maps integer keys e*M to jets; ``cutoff`` is the largest
    exponent (inclusive) through which the stored coefficients are exact,
    or None for an everywhere-exact (finitely supported) element.
    """

    __slots__ = ("M", "terms", "U", "cutoff", "z0", "dropped")

    def __init__(self, M: int, terms: dict, U: int, cutoff, z0=None, dropped: int = 0):
        self.M = M
        self.terms = terms
        self.U = U
        self.cutoff = None if cutoff is None else Fraction(cutoff)
        self.z0 = z0
        self.dropped = dropped

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero(U: int, cutoff=None, z0=None) -> "QJetSeries":
        return QJetSeries(1, {}, U, cutoff, z0)

    @staticmethod
    def one(U: int, cutoff=None, z0=None) -> "QJetSeries":
        return QJetSeries(1, {0: jet_scalar(1, U)}, U, cutoff, z0)

    @staticmethod
    def q_power(e, U: int, cutoff=None, z0=None) -> "QJetSeries":
        e = Fraction(e)
        return QJetSeries(e.denominator, {e.numerator: jet_scalar(1, U)}, U, cutoff, z0)

    @staticmethod
    def from_terms(mapping, U: int, cutoff, z0=None) -> "QJetSeries":
        """Build from {Fraction exponent: jet | scalar}; drops exact zeros."""
        M = 1
        items = []
        for e, jet in mapping.items():
            e = Fraction(e)
            if not isinstance(jet, tuple):
                jet = jet_scalar(jet, U)
            items.append((e, jet))
            M = _lcm(M, e.denominator)
        terms = {}
        dropped = 0
        co = None if cutoff is None else Fraction(cutoff)
        for e, jet in items:
            if co is not None and e > co:
                dropped += 1
                continue
            if jet_is_zero(jet):
                continue
            key = e.numerator * (M // e.denominator)
            if key in terms:
                jet = jet_add(terms[key], jet)
                if jet_is_zero(jet):
                    del terms[key]
                    continue
            terms[key] = jet
        return QJetSeries(M, terms, U, co, z0, dropped)

    @staticmethod
    def exp_linear(c, U: int, cutoff=None, z0=None) -> "QJetSeries":
        """The unit exp(c*u) = sum_{k<=U} c^k u^k / k!."""
        return QJetSeries(1, {0: jet_exp_linear(Fraction(c), U)}, U, cutoff, z0)

    # -- basic queries -------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def exponent(self, key: int) -> Fraction:
        return Fraction(key, self.M)

    def exponents(self) -> list:
        return sorted(Fraction(k, self.M) for k in self.terms)

    def min_exponent(self) -> Optional[Fraction]:
        if not self.terms:
            return None
        return Fraction(min(self.terms), self.M)

    def leading(self):
        """(exponent, jet) at the smallest stored exponent."""
        if not self.terms:
            raise SeriesError("zero series has no leading term")
        k = min(self.terms)
        return Fraction(k, self.M), self.terms[k]

    def coefficient(self, e, j: int = 0) -> QQi:
        e = Fraction(e)
        if self.M % e.denominator:
            return QQI_ZERO
        jet = self.terms.get(e.numerator * (self.M // e.denominator))
        return jet[j] if jet is not None else QQI_ZERO

    def jet_at(self, e) -> tuple:
        e = Fraction(e)
        if self.M % e.denominator:
            return jet_zero(self.U)
        return self.terms.get(e.numerator * (self.M // e.denominator), jet_zero(self.U))

    def u_valuation(self) -> Optional[int]:
        """Smallest u-power with a nonzero coefficient anywhere, or None."""
        best = None
        for jet in self.terms.values():
            v = jet_uval(jet)
            if v is not None and (best is None or v < best):
                best = v
                if best == 0:
                    return 0
        return best

    def terms_sorted(self):
        return [(Fraction(k, self.M), self.terms[k]) for k in sorted(self.terms)]

    # -- helpers -------------------------------------------------------------

    def _check_compat(self, other: "QJetSeries"):
        if self.U != other.U:
            raise IncompatibleSeriesError(
                f"jet orders differ: {self.U} vs {other.U}"
            )
        if self.z0 is not None and other.z0 is not None and self.z0 != other.z0:
            raise IncompatibleSeriesError("series built against different directions")

    def _merged_z0(self, other):
        return self.z0 if self.z0 is not None else other.z0

    def _rekey(self, M: int) -> dict:
        if M == self.M:
            return dict(self.terms)
        f = M // self.M
        return {k * f: jet for k, jet in self.terms.items()}

    def _support_floor(self) -> Optional[Fraction]:
        """Min stored exponent, falling back to the window top when empty."""
        if self.terms:
            return Fraction(min(self.terms), self.M)
        return self.cutoff

    # -- ring operations -----------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, Fraction, QQi)):
            other = QJetSeries(1, {0: jet_scalar(other, self.U)}, self.U, None)
        if not isinstance(other, QJetSeries):
            return NotImplemented
        self._check_compat(other)
        M = _lcm(self.M, other.M)
        terms = self._rekey(M)
        for k, jet in other._rekey(M).items():
            if k in terms:
                s = jet_add(terms[k], jet)
                if jet_is_zero(s):
                    del terms[k]
                else:
                    terms[k] = s
            else:
                terms[k] = jet
        cutoff = _min_cut(self.cutoff, other.cutoff)
        out = QJetSeries(M, terms, self.U, cutoff, self._merged_z0(other),
                         self.dropped + other.dropped)
        return out._trim()

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return QJetSeries(self.M, {k: jet_neg(j) for k, j in self.terms.items()},
                          self.U, self.cutoff, self.z0, self.dropped)

    def scale(self, c) -> "QJetSeries":
        c = as_qqi(c)
        if not c:
            return QJetSeries(1, {}, self.U, self.cutoff, self.z0, self.dropped)
        return QJetSeries(self.M, {k: jet_scale(j, c) for k, j in self.terms.items()},
                          self.U, self.cutoff, self.z0, self.dropped)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, QQi)):
            return self.scale(other)
        if not isinstance(other, QJetSeries):
            return NotImplemented
        self._check_compat(other)
        cutoff = _mul_cutoff(self, other)
        M = _lcm(self.M, other.M)
        a = self._rekey(M)
        b = other._rekey(M)
        key_cut = None if cutoff is None else _floor_key(cutoff, M)
        terms: dict = {}
        bitems = sorted(b.items())
        for ka, ja in sorted(a.items()):
            for kb, jb in bitems:
                k = ka + kb
                if key_cut is not None and k > key_cut:
                    break
                p = jet_mul(ja, jb)
                if jet_is_zero(p):
                    continue
                if k in terms:
                    s = jet_add(terms[k], p)
                    if jet_is_zero(s):
                        del terms[k]
                    else:
                        terms[k] = s
                else:
                    terms[k] = p
        return QJetSeries(M, terms, self.U, cutoff, self._merged_z0(other),
                          self.dropped + other.dropped)

    __rmul__ = __mul__

    def mul_q_power(self, e) -> "QJetSeries":
        e = Fraction(e)
        M = _lcm(self.M, e.denominator)
        shift = e.numerator * (M // e.denominator)
        terms = {k + shift: jet for k, jet in self._rekey(M).items()}
        cutoff = None if self.cutoff is None else self.cutoff + e
        return QJetSeries(M, terms, self.U, cutoff, self.z0, self.dropped)

    def parity_flip_u(self) -> "QJetSeries":
        """Substitute u -> -u."""
        terms = {
            k: tuple(c if i % 2 == 0 else -c for i, c in enumerate(jet))
            for k, jet in self.terms.items()
        }
        return QJetSeries(self.M, terms, self.U, self.cutoff, self.z0, self.dropped)

    # -- inversion, square root, substitutions --------------------------------

    def invert(self):
        """Factor self = q^e * u^m * (unit); return (unit^{-1}, e, m).

        Every stored term must be divisible by u^m, where m is the
        u-valuation of the leading jet; otherwise no inverse exists in the
        truncated ring.
        """
        if not self.terms:
            raise TruncationError("cannot invert the zero series")
        e, lead = self.leading()
        m = jet_uval(lead)
        if m is None:
            raise TruncationError("leading jet vanishes to full jet order")
        unit = self.reduce_u(m).mul_q_power(-e)
        rel_cut = unit.cutoff
        inv0 = jet_inv(unit.terms[0])
        U = unit.U
        tail = QJetSeries(unit.M, {k: j for k, j in unit.terms.items() if k != 0},
                          U, rel_cut, unit.z0)
        base = QJetSeries(unit.M, {0: inv0}, U, rel_cut, unit.z0)
        if tail.is_zero():
            return base, e, m
        if rel_cut is None:
            raise TruncationError("inversion of a non-monomial needs a finite window")
        # Neumann series: (lead + tail)^{-1} = base * sum_k (-tail*base)^k
        x = tail * base
        step = x.min_exponent()
        if step is None or step <= 0:
            raise SeriesError("inversion tail must have positive valuation")
        acc = QJetSeries.one(U, rel_cut, unit.z0)
        power = QJetSeries.one(U, rel_cut, unit.z0)
        sign = 1
        for _ in range(math.ceil(rel_cut / step) + 1):
            power = power * x
            sign = -sign
            if power.is_zero():
                break
            acc = acc + power.scale(sign)
        return acc * base, e, m

    def sqrt_unit(self) -> "QJetSeries":
        """Square root of a series with constant term exactly 1 at q^0 u^0."""
        if self.min_exponent() != 0 or self.terms[0][0] != QQI_ONE:
            raise TruncationError("sqrt_unit requires constant term exactly 1")
        U = self.U
        out = {0: jet_sqrt(self.terms[0])}
        inv_twice_x0 = jet_inv(jet_scale(out[0], QQi(2)))
        verify = self.cutoff is None
        key_cut = (max(self.terms) if verify
                   else _floor_key(self.cutoff, self.M))
        todo = [k for k in self.terms if k != 0]
        # x_k = (s_k - sum_{0<f<k} x_f x_{k-f}) / (2 x_0), over the additive
        # closure of the support (the only keys where x can be nonzero).
        for k in sorted(_reachable_keys(todo, key_cut)):
            s = self.terms.get(k, jet_zero(U))
            acc = jet_zero(U)
            for f, jf in out.items():
                if 0 < f < k:
                    jg = out.get(k - f)
                    if jg is not None:
                        acc = jet_add(acc, jet_mul(jf, jg))
            x = jet_mul(jet_add(s, jet_neg(acc)), inv_twice_x0)
            if not jet_is_zero(x):
                out[k] = x
        root = QJetSeries(self.M, out, U, self.cutoff, self.z0, self.dropped)
        if verify and compare_series(root * root, self) is not None:
            raise TruncationError("series with unbounded window is not a perfect square")
        return root

    def rescale_q(self, factor: int, new_cutoff=None) -> "QJetSeries":
        """Substitute q -> q^factor (tau -> factor*tau)."""
        if factor < 1 or int(factor) != factor:
            raise SeriesError("rescale factor must be a positive integer")
        factor = int(factor)
        cutoff = None if self.cutoff is None else self.cutoff * factor
        terms = {k * factor: jet for k, jet in self.terms.items()}
        out = QJetSeries(self.M, terms, self.U, cutoff, self.z0, self.dropped)
        if new_cutoff is not None:
            out = out.truncate(cutoff=new_cutoff)
        return out

    def reduce_u(self, m: int) -> "QJetSeries":
        """Divide by u^m; every term must be divisible by u^m."""
        if m == 0:
            return self
        if m > self.U:
            raise TruncationError("cannot reduce beyond the jet order")
        terms = {}
        for k, jet in self.terms.items():
            if any(jet[:m]):
                raise TruncationError(
                    f"term q^{Fraction(k, self.M)} not divisible by u^{m}"
                )
            rest = jet[m:]
            if any(rest):
                terms[k] = rest
        return QJetSeries(self.M, terms, self.U - m, self.cutoff, self.z0, self.dropped)

    def truncate(self, cutoff=None, U: int = None) -> "QJetSeries":
        """Restrict to a smaller window / jet order (canonical grid)."""
        new_cut = self.cutoff
        if cutoff is not None:
            cutoff = Fraction(cutoff)
            new_cut = cutoff if new_cut is None else min(new_cut, cutoff)
        new_U = self.U if U is None else U
        if new_U > self.U:
            raise TruncationError("cannot extend the jet order")
        dropped = self.dropped
        terms = {}
        for k, jet in self.terms.items():
            if new_cut is not None and Fraction(k, self.M) > new_cut:
                dropped += 1
                continue
            jet2 = jet[: new_U + 1]
            if not jet_is_zero(jet2):
                terms[k] = jet2
        out = QJetSeries(self.M, terms, new_U, new_cut, self.z0, dropped)
        return out._canonical()

    def _trim(self) -> "QJetSeries":
        terms = {k: j for k, j in self.terms.items() if not jet_is_zero(j)}
        if len(terms) != len(self.terms):
            return QJetSeries(self.M, terms, self.U, self.cutoff, self.z0, self.dropped)
        return self

    def _canonical(self) -> "QJetSeries":
        """Reduce the exponent grid to the lcm of actual denominators."""
        M = 1
        for k in self.terms:
            e = Fraction(k, self.M)
            M = _lcm(M, e.denominator)
        if M == self.M:
            return self
        terms = {
            Fraction(k, self.M).numerator * (M // Fraction(k, self.M).denominator): j
            for k, j in self.terms.items()
        }
        return QJetSeries(M, terms, self.U, self.cutoff, self.z0, self.dropped)

    # -- extraction ----------------------------------------------------------

    def jet_component(self, j: int) -> "QJetSeries":
        """The coefficient of u^j as a plain q-series (jet order 0)."""
        terms = {}
        for k, jet in self.terms.items():
            if j < len(jet) and jet[j]:
                terms[k] = (jet[j],)
        return QJetSeries(self.M, terms, 0, self.cutoff, None, self.dropped)

    def u0_part(self) -> "QJetSeries":
        return self.jet_component(0)

    # -- rendering -----------------------------------------------------------

    def text(self) -> str:
        """Canonical rendering: terms by q-exponent then u-power."""
        if not self.terms:
            return "0"
        chunks = []
        for e, jet in self.terms_sorted():
            for j, c in enumerate(jet):
                if not c:
                    continue
                part = f"({c})"
                if e:
                    part += f"*q^({e})"
                if j:
                    part += f"*u^{j}" if j > 1 else "*u"
                chunks.append(part)
        return " + ".join(chunks)

    def coefficient_table(self):
        """[(exponent, jet-as-QQi-tuple)] sorted, for serialization."""
        return self.terms_sorted()

    def __repr__(self):
        cut = "inf" if self.cutoff is None else str(self.cutoff)
        return (f"QJetSeries(terms={len(self.terms)}, U={self.U}, "
                f"window<= {cut}, M={self.M})")


def _min_cut(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _floor_key(cutoff: Fraction, M: int) -> int:
    return math.floor(cutoff * M)


def _mul_cutoff(a: QJetSeries, b: QJetSeries):
    a_zero = not a.terms and a.cutoff is None
    b_zero = not b.terms and b.cutoff is None
    if a_zero or b_zero:
        return None
    cands = []
    if a.cutoff is not None:
        cands.append(a.cutoff + b._support_floor())
    if b.cutoff is not None:
        cands.append(b.cutoff + a._support_floor())
    return min(cands) if cands else None


def _reachable_keys(todo, key_cut):
    """Keys reachable as sums of input keys (support of powers of the tail)."""
    reach = {0}
    frontier = {0}
    while frontier:
        nxt = set()
        for base in frontier:
            for k in todo:
                s = base + k
                if s <= key_cut and s not in reach:
                    reach.add(s)
                    nxt.add(s)
        frontier = nxt
    reach.discard(0)
    return reach


# ---------------------------------------------------------------------------

def series_equal(a: QJetSeries, b: QJetSeries, through=None) -> bool:
    """Exact equality of coefficients for exponents <= through.

    ``through`` defaults to the smaller exact window; raises if the windows
    do not cover the requested range.
    """
    return compare_series(a, b, through) is None


def compare_series(a: QJetSeries, b: QJetSeries, through=None):
    """First mismatch as (exponent, jet_a, jet_b), or None if equal."""
    if a.U != b.U:
        raise IncompatibleSeriesError("jet orders differ")
    window = _min_cut(a.cutoff, b.cutoff)
    if through is None:
        through = window
        if through is None:
            through = max([Fraction(0)] + a.exponents() + b.exponents())
    else:
        through = Fraction(through)
        if window is not None and window < through:
            raise TruncationError(
                f"exact windows reach {window}, cannot compare through {through}"
            )
    M = _lcm(a.M, b.M)
    ta = a._rekey(M)
    tb = b._rekey(M)
    for k in sorted(set(ta) | set(tb)):
        if Fraction(k, M) > through:
            break
        ja = ta.get(k, jet_zero(a.U))
        jb = tb.get(k, jet_zero(b.U))
        if ja != jb:
            return Fraction(k, M), ja, jb
    return None


def assert_series_equal(a: QJetSeries, b: QJetSeries, through=None, label=""):
    bad = compare_series(a, b, through)
    if bad is not None:
        e, ja, jb = bad
        raise AssertionError(
            f"series differ{' (' + label + ')' if label else ''} at q^{e}: "
            f"{ja} vs {jb}"
        )
