"""Ensemble ratio checks, one function per family of inequalities.

Each check evaluates ``lhs / rhs`` on every ensemble member (or pair,
triple) on a base grid and on the twice-refined grid, and wraps the two
ratio lists in a :class:`VerificationReport`.  Parameter tuples are
validated against the hypotheses of the inequality first; negative probes
skip validation and are reported but never fail a suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..clifford import build_clifford
from ..grid import Space, SpinorField, as_dual_physical, fft, lebesgue_norm, reflect
from ..potentials import HartreeParams, beta_density, hartree_trilinear, riesz_potential
from ..propagator import PropagatorParams, apply_propagator
from ..timefreq import GaborMagnitude, Window, fourier_lebesgue_norm, gabor_magnitude, sobolev_norm
from .ensemble import Ensemble, build_descriptors, realize, scalar_version
from .report import DRIFT_BOUND, SPREAD_BOUND, VerificationReport

INF = math.inf
EPS = 1e-12


class HypothesisViolation(ValueError):
    """Parameter tuple outside the range where the inequality is asserted."""


def conj_exp(p: float) -> float:
    if p == 1:
        return INF
    if math.isinf(p):
        return 1.0
    return p / (p - 1)


def tau(p: float, q: float, d: int) -> float:
    return max(0.0, d * (1 / q - 1 / p), d * (1 / q + 1 / p - 1))


def sigma(p: float, q: float, d: int) -> float:
    return max(0.0, d * (1 / p - 1 / q), d * (1 - 1 / p - 1 / q))


def parse_exp(v) -> float:
    if isinstance(v, str):
        if v.lower() in ("inf", "infinity"):
            return INF
        if "/" in v:
            a, b = v.split("/")
            return float(a) / float(b)
    return float(v)


def _ratio(lhs, rhs) -> float:
    """``lhs / rhs`` with ``0 / 0 = 0`` (the bound holds trivially) and ``x / 0 = inf``."""
    lhs, rhs = float(lhs), float(rhs)
    if rhs == 0:
        return 0.0 if lhs == 0 else INF
    return lhs / rhs


def _require(cond: bool, lemma: str, what: str):
    if not cond:
        raise HypothesisViolation(f"{lemma}: violated hypothesis '{what}'")


# --- ensemble state on one grid ----------------------------------------------------


@dataclass(eq=False)
class Level:
    """Ensemble members realized on one grid, with cached Gabor magnitudes."""

    grid: object
    fields: list
    scalars: list
    x_stride: int
    xi_stride: int
    window: Window
    _mags: dict = field(default_factory=dict)

    @property
    def d(self) -> int:
        return self.grid.d

    def mag(self, f: SpinorField) -> GaborMagnitude:
        return gabor_magnitude(f, self.window, self.x_stride, self.xi_stride)

    def member_mag(self, i: int) -> GaborMagnitude:
        key = ("m", i)
        if key not in self._mags:
            self._mags[key] = self.mag(self.fields[i])
        return self._mags[key]

    def scalar_mag(self, i: int) -> GaborMagnitude:
        key = ("s", i)
        if key not in self._mags:
            self._mags[key] = self.mag(self.scalars[i])
        return self._mags[key]

    def cached(self, key, make):
        """Gabor magnitude of ``make()``, memoized under ``key`` across tuples."""
        if key not in self._mags:
            self._mags[key] = self.mag(make())
        return self._mags[key]

    def drop_derived(self) -> None:
        """Forget everything except the members' own magnitudes."""
        self._mags = {k: v for k, v in self._mags.items() if k[0] in ("m", "s")}

    def __len__(self):
        return len(self.fields)


def make_levels(grid, ensemble: Ensemble, x_stride: int, xi_stride: int = 1,
                window: Window | None = None, refine: bool = True, scale: float = 1.0) -> list[Level]:
    """Base level plus (optionally) the ``2N`` level on the same Gabor lattice."""
    window = window or Window()
    n = build_clifford(grid.d).n
    desc = build_descriptors(ensemble, grid, n)
    sdesc = [scalar_version(x) for x in desc]
    grids = [(grid, x_stride)] + ([(grid.refine(), 2 * x_stride)] if refine else [])
    return [
        Level(g, realize(desc, g, n, scale), realize(sdesc, g, 1, scale), xs, xi_stride, window)
        for g, xs in grids
    ]


def _report(lemma, direction, params, levels, ratio_fn, probe=False, lower_bounded=False,
            spread_bound=SPREAD_BOUND, drift_bound=DRIFT_BOUND) -> VerificationReport:
    ratios = [list(map(float, ratio_fn(lv))) for lv in levels]
    g = levels[0].grid
    return VerificationReport(
        lemma, direction, dict(params), ratios[0], ratios[1] if len(ratios) > 1 else [],
        probe=probe, lower_bounded=lower_bounded, spread_bound=spread_bound, drift_bound=drift_bound,
        grid={"d": g.d, "N": g.N, "L": g.L, "x_stride": levels[0].x_stride, "xi_stride": levels[0].xi_stride},
    )


def _pairs(m: int):
    """Neighbour pairs plus diagonal pairs.

    Cross pairs with unrelated modulations give products far below the
    bound and drag the median down; the diagonal pairs are the
    configurations met by the nonlinearity itself.
    """
    return [(i, (i + 1) % m) for i in range(m)] + [(i, i) for i in range(m)]


def _triples(m: int):
    """Triples whose density pair comes from one member: ``(i, i, i)`` and ``(i, i, i+1)``."""
    return [(i, i, i) for i in range(m)] + [(i, i, (i + 1) % m) for i in range(m)]


# --- embeddings ------------------------------------------------------------------


def validate_nesting(t, d):
    lemma = "modulation_nesting"
    _require(t["p1"] <= t["p2"], lemma, "p1 <= p2")
    _require(t["q1"] <= t["q2"], lemma, "q1 <= q2")
    _require(t["s1"] >= t["s2"], lemma, "s1 >= s2")


def validate_lp_sandwich(t, d):
    p = t["p"]
    pc = conj_exp(p)
    _require(t["q1"] <= min(p, pc) + EPS, "lp_sandwich", "q1 <= min(p, p')")
    _require(t["q2"] >= max(p, pc) - EPS, "lp_sandwich", "q2 >= max(p, p')")


def validate_emb_forward(t, d):
    p, q, s1, s2 = t["p"], t["q"], t["s1"], t["s2"]
    ta = tau(p, q, d)
    if q >= p > 1:
        _require(s1 >= s2 + ta - EPS, "sobolev_to_modulation", "q >= p > 1 and s1 >= s2 + tau(p,q)")
    elif p > q:
        _require(s1 > s2 + ta, "sobolev_to_modulation", "p > q and s1 > s2 + tau(p,q)")
    else:
        _require(False, "sobolev_to_modulation", "q >= p > 1 or p > q")


def validate_emb_backward(t, d):
    p, q, s1, s2 = t["p"], t["q"], t["s1"], t["s2"]
    sg = sigma(p, q, d)
    if q <= p < INF:
        _require(s1 >= s2 + sg - EPS, "modulation_to_sobolev", "q <= p < inf and s1 >= s2 + sigma(p,q)")
    elif p < q:
        _require(s1 > s2 + sg, "modulation_to_sobolev", "p < q and s1 > s2 + sigma(p,q)")
    else:
        _require(False, "modulation_to_sobolev", "q <= p < inf or p < q")


def validate_chain(t, d):
    _require(0 < t["gamma"] < d, "sobolev_modulation_chain", "0 < gamma < d")
    _require(t["s"] > t["gamma"] / 2, "sobolev_modulation_chain", "s > gamma/2")


def check_embedding_suite(levels, lemma: str, tuples, probe: bool = False) -> list[VerificationReport]:
    """Embedding families: ``modulation_nesting``, ``lp_sandwich``,
    ``fourier_lebesgue_sandwich``, ``sobolev_to_modulation``,
    ``modulation_to_sobolev``, ``sobolev_modulation_chain``."""
    d = levels[0].d
    out = []
    for t in tuples:
        if lemma == "modulation_nesting":
            if not probe:
                validate_nesting(t, d)
            out.append(_report(lemma, "embed", t, levels, lambda lv: [
                _ratio(lv.member_mag(i).norm(t["p2"], t["q2"], t["s2"]), lv.member_mag(i).norm(t["p1"], t["q1"], t["s1"]))
                for i in range(len(lv))], probe))
        elif lemma == "lp_sandwich":
            if not probe:
                validate_lp_sandwich(t, d)
            p = t["p"]
            out.append(_report(lemma, "M_into_L", t, levels, lambda lv: [
                _ratio(lebesgue_norm(lv.fields[i], p), lv.member_mag(i).norm(p, t["q1"])) for i in range(len(lv))], probe))
            out.append(_report(lemma, "L_into_M", t, levels, lambda lv: [
                _ratio(lv.member_mag(i).norm(p, t["q2"]), lebesgue_norm(lv.fields[i], p)) for i in range(len(lv))], probe))
        elif lemma == "fourier_lebesgue_sandwich":
            p = t["p"]
            lo_p, hi_p = min(conj_exp(p), 2.0), max(conj_exp(p), 2.0)
            out.append(_report(lemma, "M_into_FL", t, levels, lambda lv: [
                _ratio(fourier_lebesgue_norm(lv.fields[i], p), lv.member_mag(i).norm(lo_p, p)) for i in range(len(lv))], probe))
            out.append(_report(lemma, "FL_into_M", t, levels, lambda lv: [
                _ratio(lv.member_mag(i).norm(hi_p, p), fourier_lebesgue_norm(lv.fields[i], p)) for i in range(len(lv))], probe))
        elif lemma == "sobolev_to_modulation":
            if not probe:
                validate_emb_forward(t, d)
            out.append(_report(lemma, "W_into_M", t, levels, lambda lv: [
                _ratio(lv.member_mag(i).norm(t["p"], t["q"], t["s2"]), sobolev_norm(lv.fields[i], t["s1"], t["p"]))
                for i in range(len(lv))], probe))
        elif lemma == "modulation_to_sobolev":
            if not probe:
                validate_emb_backward(t, d)
            out.append(_report(lemma, "M_into_W", t, levels, lambda lv: [
                _ratio(sobolev_norm(lv.fields[i], t["s2"], t["p"]), lv.member_mag(i).norm(t["p"], t["q"], t["s1"]))
                for i in range(len(lv))], probe))
        elif lemma == "sobolev_modulation_chain":
            if not probe:
                validate_chain(t, d)
            qx = 2 * d / (d + t["gamma"])
            out.append(_report(lemma, "H_into_M", t, levels, lambda lv: [
                _ratio(lv.member_mag(i).norm(2, qx), sobolev_norm(lv.fields[i], t["s"], 2)) for i in range(len(lv))], probe))
            out.append(_report(lemma, "M_into_L2", t, levels, lambda lv: [
                _ratio(lebesgue_norm(lv.fields[i], 2), lv.member_mag(i).norm(2, qx)) for i in range(len(lv))], probe))
        else:
            raise KeyError(f"not an embedding lemma: {lemma}")
    return out


# --- bilinear products -----------------------------------------------------------


def validate_product(t, d):
    lemma = "bilinear_product"
    _require(abs(1 / t["p1"] + 1 / t["p2"] - 1 / t["p3"]) < EPS, lemma, "1/p1 + 1/p2 = 1/p3")
    _require(abs(1 / t["q1"] + 1 / t["q2"] - 1 - 1 / t["q3"]) < EPS, lemma, "1/q1 + 1/q2 = 1 + 1/q3")
    _require(t.get("s", 0.0) >= 0, lemma, "s >= 0")
    _require(t.get("instance", "inner") in ("inner", "scalar"), lemma, "instance is 'inner' or 'scalar'")


def product_field(lv: Level, i: int, j: int, instance: str) -> SpinorField:
    if instance == "inner":
        beta = build_clifford(lv.d).beta
        return SpinorField(lv.grid, beta_density(lv.fields[i], lv.fields[j], beta))
    return lv.fields[j].like(lv.scalars[i].data[..., :1] * lv.fields[j].data)


def check_product_estimate(levels, tuples, probe: bool = False) -> list[VerificationReport]:
    """``||psi1 . psi2||_{M_s^{p3,q3}} / (||psi1||_{M_s^{p1,q1}} ||psi2||_{M_s^{p2,q2}})``.

    ``instance='inner'`` pairs two spinors through ``<psi1, beta psi2>``;
    ``instance='scalar'`` multiplies a scalar member onto a spinor member.
    """
    out = []
    for t in tuples:
        if not probe:
            validate_product(t, levels[0].d)
        inst = t.get("instance", "inner")
        s = t.get("s", 0.0)

        def ratios(lv, t=t, inst=inst, s=s):
            res = []
            for i, j in _pairs(len(lv)):
                lhs = lv.cached(("prod", inst, i, j), lambda: product_field(lv, i, j, inst)).norm(t["p3"], t["q3"], s)
                a = (lv.member_mag(i) if inst == "inner" else lv.scalar_mag(i)).norm(t["p1"], t["q1"], s)
                b = lv.member_mag(j).norm(t["p2"], t["q2"], s)
                res.append(_ratio(lhs, a * b))
            return res

        out.append(_report("bilinear_product", inst, t, levels, ratios, probe))
    return out


# --- fractional integration ------------------------------------------------------


def validate_hls(t, d):
    g, p = t["gamma"], t["p"]
    _require(0 < g < d, "hls", "0 < gamma < d")
    inv_q = 1 / p + g / d - 1
    _require(inv_q > 0, "hls", "1/q = 1/p + gamma/d - 1 > 0")
    q = 1 / inv_q
    _require(1 < p < q < INF, "hls", "1 < p < q < inf")
    return q


def validate_mod_hls(t, d):
    g, p1 = t["gamma"], t["p1"]
    _require(0 < g < d, "modulation_hls", "0 < gamma < d")
    inv = 1 / p1 + g / d - 1
    _require(inv > 0, "modulation_hls", "1/p2 = 1/p1 + gamma/d - 1 > 0")
    p2 = 1 / inv
    _require(1 < p1 < p2 < INF, "modulation_hls", "1 < p1 < p2 < inf")
    _require(1 <= t["q"] <= INF, "modulation_hls", "1 <= q <= inf")
    _require(t.get("s", 0.0) >= 0, "modulation_hls", "s >= 0")
    return p2


def _riesz_field(f: SpinorField, gamma: float) -> SpinorField:
    return f.like(riesz_potential(f.data[..., 0], f.grid, gamma)[..., None])


def check_hls_suite(levels, lemma: str, tuples, probe: bool = False) -> list[VerificationReport]:
    """``hls``: ``||I_g f||_{L^q} / ||f||_{L^p}``; ``modulation_hls``:
    ``||I_g f||_{M_s^{p2,q}} / ||f||_{M_s^{p1,q}}`` on scalar members."""
    d = levels[0].d
    out = []
    for t in tuples:
        g = t["gamma"]
        if lemma == "hls":
            q = validate_hls(t, d) if not probe else 1 / (1 / t["p"] + g / d - 1)
            out.append(_report(lemma, "Lp_to_Lq", {**t, "q": q}, levels, lambda lv, q=q, t=t: [
                _ratio(lebesgue_norm(_riesz_field(lv.scalars[i], g), q), lebesgue_norm(lv.scalars[i], t["p"]))
                for i in range(len(lv))], probe))
        elif lemma == "modulation_hls":
            p2 = validate_mod_hls(t, d) if not probe else 1 / (1 / t["p1"] + g / d - 1)
            s = t.get("s", 0.0)
            out.append(_report(lemma, "M_to_M", {**t, "p2": p2}, levels, lambda lv, p2=p2, t=t, s=s: [
                _ratio(lv.cached(("riesz", g, i), lambda: _riesz_field(lv.scalars[i], g)).norm(p2, t["q"], s),
                       lv.scalar_mag(i).norm(t["p1"], t["q"], s))
                for i in range(len(lv))], probe))
        else:
            raise KeyError(f"not a fractional-integration lemma: {lemma}")
    return out


# --- fixed-time estimate ---------------------------------------------------------


def check_fixed_time(levels, tuples, times=(0, 1, 2, 4, 8), probe: bool = False) -> list[VerificationReport]:
    """``||U(t) psi||_{M_s^{p,q}} / ((1+|t|)^{d|1/2-1/p|} ||psi||_{M_s^{p,q}})`` over members x times.

    For ``p = 2`` the growth exponent vanishes and the ratio must also stay
    bounded away from zero.  Each propagated field is transformed once and
    evaluated for every tuple sharing its mass.
    """
    d = levels[0].d
    rep = build_clifford(d)
    specs = []
    for t in tuples:
        p = t["p"]
        specs.append((p, t["q"], t.get("s", 0.0), t.get("mass", 1.0), tuple(t.get("times", times)),
                      d * abs(0.5 - 1 / p)))

    def all_ratios(lv):
        res = [[] for _ in specs]
        for i in range(len(lv)):
            base = [lv.member_mag(i).norm(p, q, s) for p, q, s, *_ in specs]
            mags = {}
            for k, (p, q, s, mass, ts, expo) in enumerate(specs):
                for tt in ts:
                    if tt == 0:
                        gm = lv.member_mag(i)
                    else:
                        if (mass, tt) not in mags:
                            prop = PropagatorParams(mass, rep, lv.grid)
                            mags[mass, tt] = lv.mag(apply_propagator(lv.fields[i], tt, prop))
                        gm = mags[mass, tt]
                    res[k].append(_ratio(gm.norm(p, q, s), (1 + abs(tt)) ** expo * base[k]))
        return res

    per_level = [all_ratios(lv) for lv in levels]
    out = []
    for k, t in enumerate(tuples):
        p, q, s, mass, ts, expo = specs[k]
        out.append(_report("fixed_time", "U(t)", {**t, "times": list(ts), "exponent": expo}, levels,
                           lambda lv, k=k: per_level[levels.index(lv)][k], probe, lower_bounded=(p == 2)))
    return out


# --- trilinear estimate and its intermediate links -------------------------------


def validate_trilinear(t, d):
    g = t["gamma"]
    _require(0 < g < d, "trilinear", "0 < gamma < d")
    if t["branch"] == "modulation":
        _require(1 <= t["p"] <= 2, "trilinear", "1 <= p <= 2")
        _require(1 <= t["q"] <= 2 * d / (d + g) + EPS, "trilinear", "1 <= q <= 2d/(d+gamma)")
        _require(t.get("s", 0.0) == 0, "trilinear", "s = 0 on the unweighted branch")
    elif t["branch"] == "weighted":
        _require(1 < t["p"] < d / (d - g), "trilinear", "1 < p < d/(d-gamma)")
        _require(t.get("q", 1) == 1, "trilinear", "q = 1 on the weighted branch")
        _require(t.get("s", 0.0) >= 0, "trilinear", "s >= 0")
    else:
        _require(False, "trilinear", "branch is 'modulation' or 'weighted'")


def _hartree(d: int, gamma: float) -> HartreeParams:
    return HartreeParams(gamma, 1.0, build_clifford(d))


def check_trilinear(levels, tuples, probe: bool = False) -> list[VerificationReport]:
    """``||(|.|^-g * <psi1, beta psi2>) beta psi3||_X / prod_j ||psi_j||_X`` over member triples."""
    d = levels[0].d
    out = []
    for t in tuples:
        t = {"q": 1.0, "s": 0.0, **t}
        if not probe:
            validate_trilinear(t, d)
        p, q, s = t["p"], t["q"], t["s"]
        hp = _hartree(d, t["gamma"])

        def ratios(lv, p=p, q=q, s=s, hp=hp):
            res = []
            for i, j, k in _triples(len(lv)):
                lhs = lv.cached(("tri", hp.gamma, i, j, k),
                                lambda: hartree_trilinear(lv.fields[i], lv.fields[j], lv.fields[k], hp)).norm(p, q, s)
                rhs = np.prod([lv.member_mag(m).norm(p, q, s) for m in (i, j, k)])
                res.append(_ratio(lhs, rhs))
            return res

        out.append(_report("trilinear", t["branch"], t, levels, ratios, probe))
    return out


def _component_fl1(lv: Level, i: int, j: int, gamma: float) -> float:
    """``sum_k ||I_g(psi1_k conj((beta psi2)_k))||_{FL^1}``."""
    beta = build_clifford(lv.d).beta
    b2 = lv.fields[j].data @ beta.T
    total = 0.0
    for kk in range(lv.fields[i].n):
        rho = lv.fields[i].data[..., kk] * b2[..., kk].conj()
        V = SpinorField(lv.grid, riesz_potential(rho, lv.grid, gamma))
        total += fourier_lebesgue_norm(V, 1)
    return total


def check_trilinear_steps(levels, lemma: str, tuples, probe: bool = False) -> list[VerificationReport]:
    """Intermediate links of the trilinear bound on the unweighted branch.

    ``trilinear_algebra_step``: ``||T||_{M^{p,q}} / (||I_g <psi1, beta psi2>||_{M^{inf,1}} ||psi3||_{M^{p,q}})``
    ``trilinear_fourier_step``: ``||T||_{M^{p,q}} / (||psi3||_{M^{p,q}} sum_k ||I_g(psi1_k conj psi2_k)||_{FL^1})``
    """
    d = levels[0].d
    out = []
    for t in tuples:
        t = {"q": 1.0, **t}
        if not probe:
            validate_trilinear({**t, "branch": "modulation", "s": 0.0}, d)
        p, q, g = t["p"], t["q"], t["gamma"]
        hp = _hartree(d, g)

        def ratios(lv, p=p, q=q, g=g, hp=hp):
            res = []
            for i, j, k in _triples(len(lv)):
                lhs = lv.cached(("tri", hp.gamma, i, j, k),
                                lambda: hartree_trilinear(lv.fields[i], lv.fields[j], lv.fields[k], hp)).norm(p, q)
                n3 = lv.member_mag(k).norm(p, q)
                if lemma == "trilinear_algebra_step":
                    pot = SpinorField(lv.grid, riesz_potential(beta_density(lv.fields[i], lv.fields[j], hp.rep.beta), lv.grid, g))
                    res.append(_ratio(lhs, lv.mag(pot).norm(INF, 1) * n3))
                else:
                    res.append(_ratio(lhs, n3 * _component_fl1(lv, i, j, g)))
            return res

        out.append(_report(lemma, "link", t, levels, ratios, probe))
    return out


def inverse_transform_on_dual(f: SpinorField) -> SpinorField:
    """``f^vee(eta) = (2 pi)^-d fhat(-eta)`` as a physical field on the dual grid."""
    fh = fft(f)
    data = reflect(fh.data, f.grid.d) / (2 * np.pi) ** f.grid.d
    return as_dual_physical(fh.like(data, Space.FREQUENCY))


def check_riesz_chain(levels, tuples, probe: bool = False) -> list[VerificationReport]:
    """Fourier-side links used for the ``FL^1`` bound.

    ``dual_hls``: ``||I_{d-g}|f^vee|||_{L^{2d/(d-g)}} / ||f^vee||_{L^{2d/(d+g)}}`` on scalar members.
    ``fl1_bound``: ``||I_g(f1 conj f2)||_{FL^1} / (||f1^vee||_{L^{2d/(d+g)}} ||(conj f2)^||_{L^{2d/(d+g)}})``.
    """
    d = levels[0].d
    out = []
    for t in tuples:
        g = t["gamma"]
        if not probe:
            _require(0 < g < d, "riesz_chain", "0 < gamma < d")
        r_in, r_out = 2 * d / (d + g), 2 * d / (d - g)

        def dual_hls(lv, g=g):
            res = []
            for i in range(len(lv)):
                fv = inverse_transform_on_dual(lv.scalars[i])
                mod = fv.like(np.abs(fv.data))
                res.append(_ratio(lebesgue_norm(_riesz_field(mod, d - g), r_out), lebesgue_norm(fv, r_in)))
            return res

        def fl1(lv, g=g):
            res = []
            for i, j in _pairs(len(lv)):
                f1, f2 = lv.scalars[i], lv.scalars[j]
                rho = f1.data[..., 0] * f2.data[..., 0].conj()
                lhs = fourier_lebesgue_norm(SpinorField(lv.grid, riesz_potential(rho, lv.grid, g)), 1)
                a = lebesgue_norm(inverse_transform_on_dual(f1), r_in)
                b = lebesgue_norm(fft(f2.like(f2.data.conj())), r_in)
                res.append(_ratio(lhs, a * b))
            return res

        out.append(_report("riesz_chain", "dual_hls", t, levels, dual_hls, probe))
        out.append(_report("riesz_chain", "fl1_bound", t, levels, fl1, probe))
    return out
