"""Theta-type building blocks as exact jet series.

Contains the Dedekind eta function, the four rank-1 Jacobi forms
theta_ab, lattice theta sums over the coroot lattice, the shifted theta
functions f attached to a Weyl element and a grading, and the normalized
reduction denominators (plain / minus / star variants).

All builders restrict z to the line z = (u / 2 pi i) z0 and return
QJetSeries; a factor e^{2 pi i c s} with c = (mu|z0) becomes exp(c*u).
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from .liealg import (
    AffineWeight,
    Lattice,
    NilpotentSlice,
    PreconditionError,
    RootSystem,
    WeylGroup,
    coroot_lattice,
    direction_in_hf,
    vadd,
    vscale,
    vsub,
    vzero,
)
from .series import (
    ExactPhaseError,
    QJetSeries,
    QQi,
    TruncationError,
    jet_add,
    jet_exp_linear,
    jet_scalar,
    phase_unit,
)

HALF = Fraction(1, 2)


# ---------------------------------------------------------------------------
# eta and the Jacobi forms

def dedekind_eta(N, U: int = 0, z0=None, scale=Fraction(1)) -> QJetSeries:
    """eta(scale * tau) = q^{scale/24} prod (1 - q^{scale*n}), exact through N."""
    N = Fraction(N)
    scale = Fraction(scale)
    out = QJetSeries.one(U, N, z0)
    n = 1
    while scale * n <= N:
        out = out * QJetSeries.from_terms(
            {Fraction(0): 1, scale * n: -1}, U, N, z0
        )
        n += 1
    return out.mul_q_power(scale / 24)


def series_int_power(s: QJetSeries, e: int) -> QJetSeries:
    """s**e for integer e (negative allowed when s is invertible)."""
    if e == 0:
        return QJetSeries.one(s.U, s.cutoff, s.z0)
    base = s
    if e < 0:
        inv, qe, m = s.invert()
        if m:
            raise TruncationError("negative power of a series with u-valuation")
        base = inv.mul_q_power(-qe)
        e = -e
    out = None
    acc = base
    while e:
        if e & 1:
            out = acc if out is None else out * acc
        e >>= 1
        if e:
            acc = acc * acc
    return out


def eta_quotient_power(u: int, power: int, N, U: int = 0, z0=None) -> QJetSeries:
    """(eta(u*tau)/eta(tau))**power, exact through N."""
    N = Fraction(N)
    margin = N + Fraction(abs(power) * (u - 1), 24) + 1
    top = dedekind_eta(margin, U, z0, scale=u)
    bot = dedekind_eta(margin, U, z0)
    inv, qe, _ = bot.invert()
    quot = top * inv.mul_q_power(-qe)
    return series_int_power(quot, power).truncate(cutoff=N)


def _one_minus(c_exp: Fraction, e: Fraction, sign: int, N, U, z0,
               phase: QQi = None) -> QJetSeries:
    """(1 + sign * phase * exp(c*u) * q^e) as a series."""
    jet = jet_exp_linear(c_exp, U)
    coef = QQi(sign) if phase is None else phase * QQi(sign)
    jet = tuple(coef * x for x in jet)
    return QJetSeries.from_terms({Fraction(0): jet_scalar(1, U), Fraction(e): jet},
                                 U, Fraction(N), z0)


def jacobi_theta(kind: str, zcoef, N, U: int = 0, z0=None) -> QJetSeries:
    """theta_ab(tau, z) along z = s*z0 with (argument|z0) = zcoef.

    Product forms:
      11: -i q^{1/12} e^{-pi i z} eta prod (1-e^{-2pi iz}q^n)(1-e^{2pi iz}q^{n-1})
      01: prod (1-q^n)(1-e^{2pi iz}q^{n-1/2})(1-e^{-2pi iz}q^{n-1/2})
      00: prod (1-q^n)(1+e^{2pi iz}q^{n-1/2})(1+e^{-2pi iz}q^{n-1/2})
      10: q^{1/8}(e^{pi iz}+e^{-pi iz}) prod (1-q^n)(1+e^{2pi iz}q^n)(1+e^{-2pi iz}q^n)
    """
    N = Fraction(N)
    c = Fraction(zcoef)
    if kind == "11":
        out = dedekind_eta(N, U, z0) * QJetSeries.exp_linear(-c * HALF, U, N, z0)
        out = out * _one_minus(c, Fraction(0), -1, N, U, z0)
        n = 1
        while n <= N:
            out = out * _one_minus(-c, Fraction(n), -1, N, U, z0)
            out = out * _one_minus(c, Fraction(n), -1, N, U, z0)
            n += 1
        return out.mul_q_power(Fraction(1, 12)).scale(QQi(0, -1))
    if kind in ("01", "00"):
        sign = -1 if kind == "01" else 1
        out = QJetSeries.one(U, N, z0)
        n = 1
        while n - HALF <= N:
            if n <= N:
                out = out * _one_minus(Fraction(0), Fraction(n), -1, N, U, z0)
            out = out * _one_minus(c, n - HALF, sign, N, U, z0)
            out = out * _one_minus(-c, n - HALF, sign, N, U, z0)
            n += 1
        return out
    if kind == "10":
        lead = QJetSeries.exp_linear(c * HALF, U, N, z0) \
            + QJetSeries.exp_linear(-c * HALF, U, N, z0)
        out = lead
        n = 1
        while n <= N:
            out = out * _one_minus(Fraction(0), Fraction(n), -1, N, U, z0)
            out = out * _one_minus(c, Fraction(n), 1, N, U, z0)
            out = out * _one_minus(-c, Fraction(n), 1, N, U, z0)
            n += 1
        return out.mul_q_power(Fraction(1, 8))
    raise PreconditionError(f"unknown Jacobi form kind {kind!r}")


def jacobi_theta_sum(kind: str, zcoef, N, U: int = 0, z0=None) -> QJetSeries:
    """Independent series form of theta_ab (sum over a shifted integer line)."""
    N = Fraction(N)
    c = Fraction(zcoef)
    terms = {}
    if kind in ("00", "01"):
        shift = Fraction(0)
    else:
        shift = HALF
    m = shift
    while True:
        done_pos = m * m / 2 > N
        done_neg = m != 0 and m * m / 2 > N
        if done_pos and done_neg:
            break
        for mm in ({m, -m} if m else {m}):
            e = mm * mm / 2
            if e > N:
                continue
            if kind == "00" or kind == "10":
                coef = QQi(1)
            elif kind == "01":
                coef = QQi((-1) ** int(mm))
            else:  # 11
                coef = QQi(0, -1) * QQi((-1) ** int(mm + HALF))
            jet = jet_exp_linear(mm * c, U)
            jet = tuple(coef * x for x in jet)
            if e in terms:
                terms[e] = jet_add(terms[e], jet)
            else:
                terms[e] = jet
        m += 1
    return QJetSeries.from_terms(terms, U, N, z0)


def jacobi_theta11_tau_arg(u: int, j, N) -> QJetSeries:
    """theta_11(u*tau, -j*tau) as a plain q-series (e^{2 pi i z} = q^{-j})."""
    N = Fraction(N)
    j = Fraction(j)
    # -i q^{u/12 + j/2} eta(u tau) prod_{n>=1} (1 - q^{un+j})(1 - q^{u(n-1)-j})
    slack = max(Fraction(0), j) + 1
    window = N + slack
    out = dedekind_eta(window, scale=u)
    n = 1
    while u * n + min(j, -j + u) <= window + u:
        for e in (u * n + j, u * (n - 1) - j):
            if e <= window:
                out = out * QJetSeries.from_terms(
                    {Fraction(0): 1, e: -1}, 0, window
                )
        n += 1
    out = out.mul_q_power(Fraction(u, 12) + j / 2).scale(QQi(0, -1))
    return out.truncate(cutoff=N)


# ---------------------------------------------------------------------------
# lattice theta functions

def lattice_points_with_bound(rs: RootSystem, lam_bar, n, center, bound):
    """All nu = lam_bar + n*gamma with |nu - n*center|^2 / 2n <= bound.

    Returns a list of (nu_vector, exponent) pairs, deterministically ordered.
    ``center`` is an ambient vector (often w(x)); gamma runs over the coroot
    lattice.
    """
    lat = coroot_lattice(rs)
    n = Fraction(n)
    bound = Fraction(bound)
    # |lam + n g - n center|^2 <= 2 n bound  <=>  Q(g - (center - lam/n)) <= 2 bound / n
    shift = vsub(center, vscale(lam_bar, 1 / n))
    coords = lat.coords(shift)
    r2 = 2 * bound / n
    pts = []
    for m in lat.enumerate_ball(coords, r2):
        gamma = lat.vector(m)
        nu = vadd(lam_bar, vscale(gamma, n))
        diff = vsub(nu, vscale(center, n))
        e = rs.norm2(diff) / (2 * n)
        pts.append((nu, e, gamma))
    pts.sort(key=lambda t: (t[1], t[0]))
    return pts


def theta_lambda(rs: RootSystem, lam: AffineWeight, z0, N, U: int = 0) -> QJetSeries:
    """Theta_lambda(tau, z) = sum_{gamma} e^{2 pi i(lam+n gamma|z)} q^{|lam+n gamma|^2/2n}."""
    n = lam.level
    if n <= 0 or n.denominator != 1:
        raise PreconditionError("lattice theta needs a positive integer level")
    z0 = tuple(Fraction(c) for c in (z0 if z0 is not None else vzero(rs.ambient_dim)))
    origin = vzero(rs.ambient_dim)
    terms = {}
    for nu, e, _ in lattice_points_with_bound(rs, lam.finite, n, origin, Fraction(N)):
        jet = jet_exp_linear(rs.form(nu, z0), U)
        if e in terms:
            terms[e] = jet_add(terms[e], jet)
        else:
            terms[e] = jet
    return QJetSeries.from_terms(terms, U, Fraction(N), z0 if any(z0) else None)


# ---------------------------------------------------------------------------
# f-functions: f_{lambda,w}(tau, z) = q^{n|x|^2/2} Theta_lambda(tau, w^{-1}(z - tau x))

def f_series(rs: RootSystem, W: WeylGroup, lam: AffineWeight, w_index: int,
             slice_: NilpotentSlice, z0, variant: str, N, U: int) -> QJetSeries:
    """One shifted theta function (variant in {plain, minus, star}).

    plain: exponents |lam + n(gamma - w^{-1}x)|^2/2n, no phase;
    minus: same exponents, phase e^{2 pi i(nu|w^{-1}x)};
    star : exponents |nu|^2/2n, phase e^{2 pi i(nu|w^{-1}x)}.
    """
    n = lam.level
    if n <= 0 or n.denominator != 1:
        raise PreconditionError("f-functions need a positive integer level")
    z0 = _direction_or_zero(rs, slice_, z0)
    winv = W.inverse(w_index)
    xw = W.apply(winv, slice_.x)
    zw = W.apply(winv, z0)
    center = xw if variant in ("plain", "minus") else vzero(rs.ambient_dim)
    terms = {}
    for nu, e, _ in lattice_points_with_bound(rs, lam.finite, n, center, Fraction(N)):
        jet = jet_exp_linear(rs.form(nu, zw), U)
        if variant != "plain":
            jet = tuple(phase_unit(rs.form(nu, xw)) * c for c in jet)
        if e in terms:
            terms[e] = jet_add(terms[e], jet)
        else:
            terms[e] = jet
    return QJetSeries.from_terms(terms, U, Fraction(N), z0 if any(z0) else None)


def _direction_or_zero(rs: RootSystem, slice_: NilpotentSlice, z0):
    if z0 is None:
        return vzero(rs.ambient_dim)
    z0 = tuple(Fraction(c) for c in z0)
    if any(z0):
        return direction_in_hf(slice_, z0)
    return z0


VARIANTS = ("plain", "minus", "star")

_HALF_THETA_KIND = {"plain": "01", "minus": "00", "star": "10"}


def w_denominator(slice_: NilpotentSlice, variant: str, z0, N, U: int):
    """Normalized reduction denominator; returns (series, u_order).

    eta^{l - |Delta_+^0| - dim g_{1/2}/2 + ... } bookkeeping is done through
    the explicit product
        eta^{(3/2)l - (1/2)dim g^f} * prod_{Delta_+^0} theta_11(alpha(z))
        * (prod_{Delta^{1/2}} theta_k(alpha(z)))^{1/2},
    with theta_k = theta_01 / theta_00 / theta_10 for plain / minus / star.
    """
    if variant not in VARIANTS:
        raise PreconditionError(f"unknown denominator variant {variant!r}")
    rs = slice_.rs
    z0 = _direction_or_zero(rs, slice_, z0)
    N = Fraction(N)
    eta_exp = Fraction(3 * rs.rank, 2) - Fraction(slice_.dim_g_f, 2)
    if eta_exp.denominator != 1:
        raise PreconditionError("half-integral eta exponent cannot occur")
    ztag = z0 if any(z0) else None
    margin = N + abs(eta_exp) * Fraction(1, 24) + 2
    out = series_int_power(dedekind_eta(margin, U, ztag), int(eta_exp))
    for alpha in slice_.delta_plus_0:
        out = out * jacobi_theta("11", rs.form(alpha, z0), margin, U, ztag)
    half = slice_.delta_half
    if half:
        kind = _HALF_THETA_KIND[variant]
        out = out * _half_product_sqrt(rs, half, kind, z0, margin, U, ztag)
    out = out.truncate(cutoff=N)
    m = out.u_valuation()
    if m is None:
        raise TruncationError("denominator vanished identically; z0 not generic?")
    return out, m


def _half_product_sqrt(rs, half_roots, kind, z0, N, U, ztag) -> QJetSeries:
    """(prod over Delta^{1/2} of theta_kind(alpha(z)))^{1/2}.

    The arguments come in pairs c, -c (theta_kind is even in z), so the root
    is the product over one representative per pair; falls back to a direct
    series square root when the pairing fails.
    """
    cvals = sorted(rs.form(a, z0) for a in half_roots)
    from collections import Counter
    bag = Counter(cvals)
    reps = []
    ok = True
    for c in sorted(bag):
        if c < 0:
            continue
        if c == 0:
            if bag[c] % 2:
                ok = False
                break
            reps.extend([c] * (bag[c] // 2))
        else:
            if bag[c] != bag.get(-c, 0):
                ok = False
                break
            reps.extend([c] * bag[c])
    if ok and 2 * len(reps) == len(half_roots):
        out = QJetSeries.one(U, Fraction(N), ztag)
        for c in reps:
            out = out * jacobi_theta(kind, c, N, U, ztag)
        return out
    prod = QJetSeries.one(U, Fraction(N), ztag)
    for a in half_roots:
        prod = prod * jacobi_theta(kind, rs.form(a, z0), N, U, ztag)
    e0, lead = prod.leading()
    kappa = lead[0]
    if not kappa.is_rational() or kappa.re <= 0:
        raise TruncationError("cannot normalize the half-root product")
    root_k = _fraction_sqrt(kappa.re)
    unit = prod.mul_q_power(-e0).scale(QQi(1) / QQi(root_k * root_k / root_k)) \
        if False else prod.mul_q_power(-e0).scale(QQi(Fraction(1) / root_k ** 2 * root_k))
    # normalize exactly: prod = q^{e0} * kappa * unit with unit(0) = 1
    unit = prod.mul_q_power(-e0).scale(QQi(Fraction(1, 1)) / QQi(kappa.re))
    return unit.sqrt_unit().scale(QQi(root_k)).mul_q_power(e0 / 2)


def _fraction_sqrt(fr: Fraction) -> Fraction:
    num = math.isqrt(fr.numerator)
    den = math.isqrt(fr.denominator)
    if num * num != fr.numerator or den * den != fr.denominator:
        raise TruncationError(f"{fr} is not a perfect rational square")
    return Fraction(num, den)
