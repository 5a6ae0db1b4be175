"""Named checks a config can request, each with parameter validation and an evaluator.

A check's ``evaluate`` returns a JSON-ready dict with at least ``passed`` and
``value``; any :class:`DomainError` raised inside is recorded as a failure.
"""
from __future__ import annotations

import math

import numpy as np

from .. import estimators as est
from .. import lyapunov as lyap
from .. import strip as strip_mod
from .. import tails
from ..walk import IncrementLaw, LowerEnvelope, UpperEnvelope, envelope_check, max_increment_envelope


def _num(params, key, problems, lo=-math.inf, hi=math.inf, required=True, strict_lo=False):
    if key not in params:
        if required:
            problems.append((key, "missing"))
        return
    v = params[key]
    if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
        problems.append((key, "must be a finite number"))
        return
    if v < lo or v > hi or (strict_lo and v == lo):
        problems.append((key, f"out of range [{lo}, {hi}]"))


def _interval(params, problems):
    before = len(problems)
    _num(params, "lo", problems)
    _num(params, "hi", problems)
    if len(problems) == before and params["lo"] > params["hi"]:
        problems.append(("lo", "must not exceed hi"))


def _needs_model(mtype, wanted, problems):
    if mtype not in wanted:
        problems.append(("<model>", f"check needs a model of type {' or '.join(wanted)}"))


def _summary(values):
    v = np.asarray(values, float)
    if v.size == 0:
        return {}
    q = np.percentile(v, [10, 50, 90])
    return {"q10": float(q[0]), "median": float(q[1]), "q90": float(q[2])}


class Check:
    needs: frozenset = frozenset()

    @staticmethod
    def validate(params, mtype, model, levels):
        return []


class LogLogSlope(Check):
    """Median over replicas of the least-squares growth exponent lies in ``[lo, hi]``."""

    needs = frozenset({"trajectory"})

    @staticmethod
    def validate(params, mtype, model, levels):
        p = []
        _needs_model(mtype, ("walk", "strip"), p)
        _interval(params, p)
        _num(params, "burn_in", p, lo=1, required=False)
        return p

    @staticmethod
    def evaluate(params, ctx):
        absolute = bool(params.get("absolute", False))
        s = [est.loglog_slope(r.trajectory, params.get("burn_in", 1), absolute).point
             for r in ctx.completed]
        med = float(np.median(s))
        return {"passed": params["lo"] <= med <= params["hi"], "value": med,
                "details": {"per_replica": _summary(s), "n": len(s)}}


class GrowthRatio(Check):
    """Median over replicas of ``log max(|X_T|, 1) / log T`` lies in ``[lo, hi]``."""

    needs = frozenset({"trajectory"})

    @staticmethod
    def validate(params, mtype, model, levels):
        p = []
        _needs_model(mtype, ("walk", "strip"), p)
        _interval(params, p)
        return p

    @staticmethod
    def evaluate(params, ctx):
        absolute = bool(params.get("absolute", False))
        s = [est.growth_ratio(r.trajectory, absolute) for r in ctx.completed]
        med = float(np.median(s))
        return {"passed": params["lo"] <= med <= params["hi"], "value": med,
                "details": {"per_replica": _summary(s), "n": len(s)}}


def _fraction_rule(params, p):
    _num(params, "min_pass_fraction", p, lo=0, hi=1, required=False)
    _num(params, "burn_in", p, lo=3)


class UpperEnvelopeCheck(Check):
    needs = frozenset({"trajectory"})

    @staticmethod
    def validate(params, mtype, model, levels):
        p = []
        _needs_model(mtype, ("walk", "strip"), p)
        _num(params, "theta", p, lo=0, hi=1, strict_lo=True)
        _num(params, "phi", p, lo=0, required=False)
        _num(params, "eps", p, lo=0, strict_lo=True)
        _fraction_rule(params, p)
        return p

    @staticmethod
    def evaluate(params, ctx):
        env = UpperEnvelope(params["theta"], params.get("phi", 0.0), params["eps"])
        viol = [envelope_check(r.trajectory, env, params["burn_in"]) for r in ctx.completed]
        clean = sum(v == 0 for v in viol)
        frac = clean / ctx.requested
        need = params.get("min_pass_fraction", 1.0)
        return {"passed": frac >= need, "value": clean,
                "details": {"replicas_clean": clean, "replicas": ctx.requested,
                            "violations_total": int(sum(viol)),
                            "replicas_violating": [r.index for r, v in zip(ctx.completed, viol) if v]}}


class LowerEnvelopeCheck(Check):
    """Lower envelope, optionally jointly with the max-increment bound, per replica."""

    needs = frozenset({"trajectory"})

    @staticmethod
    def validate(params, mtype, model, levels):
        p = []
        _needs_model(mtype, ("walk", "strip"), p)
        _num(params, "alpha", p, lo=0, hi=1, strict_lo=True)
        _num(params, "eps", p, lo=0, strict_lo=True)
        _fraction_rule(params, p)
        return p

    @staticmethod
    def evaluate(params, ctx):
        env = LowerEnvelope(params["alpha"], params["eps"])
        joint = bool(params.get("with_max_increment", True))
        low, inc = [], []
        for r in ctx.completed:
            low.append(envelope_check(r.trajectory, env, params["burn_in"]))
            inc.append(max_increment_envelope(r.trajectory, params["alpha"], params["eps"],
                                              params["burn_in"]) if joint else 0)
        clean = sum(a == 0 and b == 0 for a, b in zip(low, inc))
        need = params.get("min_pass_fraction", 1.0)
        return {"passed": clean / ctx.requested >= need, "value": clean,
                "details": {"replicas_clean": clean, "replicas": ctx.requested,
                            "lower_violating": sum(v > 0 for v in low),
                            "max_increment_violating": sum(v > 0 for v in inc)}}


class TerminalSign(Check):
    """Fraction of replicas with ``sign(X_T) == sign`` is at least ``min_fraction``."""

    needs = frozenset({"trajectory"})

    @staticmethod
    def validate(params, mtype, model, levels):
        p = []
        _needs_model(mtype, ("walk", "strip"), p)
        if params.get("sign") not in (-1, 1):
            p.append(("sign", "must be -1 or 1"))
        _num(params, "min_fraction", p, lo=0, hi=1)
        return p

    @staticmethod
    def evaluate(params, ctx):
        hits = sum(np.sign(r.trajectory.values[-1]) == params["sign"] for r in ctx.completed)
        frac = hits / ctx.requested
        return {"passed": frac >= params["min_fraction"], "value": frac,
                "details": {"count": int(hits), "replicas": ctx.requested}}


def _level_param(params, levels, p):
    _num(params, "level", p)
    if "level" in params and float(params.get("level", 0)) not in [float(x) for x in levels]:
        p.append(("level", "must be one of the config levels"))


def _moment_param(params, p):
    for key, want in params.get("moments", {}).items():
        try:
            float(key)
        except ValueError:
            p.append((f"moments.{key}", "moment order must be numeric"))
        if want not in ("converging", "diverging", "inconclusive"):
            p.append((f"moments.{key}", "expected verdict unknown"))


def _survival_eval(params, samples, censored):
    out = {"details": {"n": int(samples.size), "uncensored": int(np.count_nonzero(~censored))}}
    ok = True
    try:
        e = est.survival_slope(samples, censored)
        out["value"] = e.point
        out["details"]["estimate"] = e.to_dict()
        ok = params["lo"] <= e.point <= params["hi"]
    except tails.DomainError as exc:
        out["value"] = None
        out["details"]["slope_error"] = str(exc)
        ok = False
    moments = {}
    for key, want in params.get("moments", {}).items():
        got = est.moment_diagnostic(samples, float(key))
        moments[key] = {"expected": want, "got": got}
        ok = ok and got == want
    if moments:
        out["details"]["moments"] = moments
    out["passed"] = ok
    return out


class PassageSurvival(Check):
    """Survival slope of ``tau_level`` (censored at the horizon) and moment verdicts."""

    needs = frozenset({"tau"})

    @staticmethod
    def validate(params, mtype, model, levels):
        p = []
        _needs_model(mtype, ("walk",), p)
        _level_param(params, levels, p)
        _interval(params, p)
        _moment_param(params, p)
        return p

    @staticmethod
    def evaluate(params, ctx):
        i = ctx.level_index(params["level"])
        tau = np.array([r.stopping.tau_times[i] for r in ctx.completed], float)
        cens = np.array([r.stopping.tau_censored[i] for r in ctx.completed], bool)
        tau = np.where(cens, float(ctx.config.horizon), tau)
        return _survival_eval(params, tau, cens)


class LastExitSurvival(Check):
    """Survival slope of ``1 + lambda_level``; replicas still at or below the level are censored."""

    needs = frozenset({"lambda"})

    @staticmethod
    def validate(params, mtype, model, levels):
        p = []
        _needs_model(mtype, ("walk",), p)
        _level_param(params, levels, p)
        _interval(params, p)
        _moment_param(params, p)
        return p

    @staticmethod
    def evaluate(params, ctx):
        i = ctx.level_index(params["level"])
        lam = np.array([r.stopping.lam_times[i] for r in ctx.completed], float)
        cens = np.array([r.stopping.lam_unresolved[i] for r in ctx.completed], bool)
        # the shift keeps lambda = 0 (never back at or below the level) in the sample
        return _survival_eval(params, np.maximum(lam, 0.0) + 1.0, cens)


class ReturnTimeHill(Check):
    """Censored Hill exponent of Lamperti return times within ``tol`` of ``gamma``."""

    @staticmethod
    def validate(params, mtype, model, levels):
        p = []
        _num(params, "gamma", p, lo=0, hi=1, strict_lo=True)
        _num(params, "n", p, lo=11)
        _num(params, "cap", p, lo=2)
        _num(params, "tol", p, lo=0)
        return p

    @staticmethod
    def evaluate(params, ctx):
        spec = strip_mod.build_lamperti(params["gamma"], params.get("sigma2", 1.0))
        nu, cens = strip_mod.return_time_sample(spec, int(params["n"]), int(params["cap"]),
                                                ctx.config.master_seed)
        e = est.hill_estimate(nu, censored=cens)
        return {"passed": abs(e.point - params["gamma"]) <= params["tol"], "value": e.point,
                "details": {"estimate": e.to_dict(), "censored": int(cens.sum()),
                            "target": params["gamma"]}}


def _law(d):
    return IncrementLaw.from_dict(d)


class DriftRegion(Check):
    """Drift verdicts confirmed on every dyadic grid state from the detected ``A`` on."""

    @staticmethod
    def validate(params, mtype, model, levels):
        p = []
        try:
            _law(params["law"])
        except (KeyError, TypeError, ValueError) as exc:
            p.append(("law", str(exc) or "invalid"))
        try:
            lyap.LyapunovSpec.from_dict(params["spec"])
        except (KeyError, TypeError, ValueError) as exc:
            p.append(("spec", str(exc) or "invalid"))
        try:
            lyap.Direction.parse(params["direction"])
        except (KeyError, TypeError, ValueError) as exc:
            p.append(("direction", str(exc) or "invalid"))
        _num(params, "n", p, lo=1000)
        g = params.get("grid")
        if not isinstance(g, dict) or not {"origin", "jmin", "jmax", "sign"} <= set(g):
            p.append(("grid", "needs origin, jmin, jmax, sign"))
        return p

    @staticmethod
    def evaluate(params, ctx):
        g = params["grid"]
        grid = lyap.dyadic_grid(g["origin"], g["jmin"], g["jmax"], g["sign"])
        rep = lyap.verify_drift_region(_law(params["law"]), lyap.LyapunovSpec.from_dict(params["spec"]),
                                       grid, params["direction"], int(params["n"]),
                                       ctx.config.master_seed, region=params.get("region"))
        return {"passed": rep.region_confirmed, "value": rep.A, "details": rep.to_dict()}


class TruncatedMeanIdentity(Check):
    """Closed-form ``E[Z 1{Z<=z}]`` against ``int_0^z P[Z>y] dy - z P[Z>z]``."""

    @staticmethod
    def validate(params, mtype, model, levels):
        p = []
        try:
            tails.TailLaw.from_dict(params["law"])
        except (KeyError, TypeError, ValueError) as exc:
            p.append(("law", str(exc) or "invalid"))
        _num(params, "z", p, lo=0, strict_lo=True)
        _num(params, "rtol", p, lo=0, strict_lo=True)
        return p

    @staticmethod
    def evaluate(params, ctx):
        law = tails.TailLaw.from_dict(params["law"])
        lhs = tails.truncated_mean(law, params["z"])
        rhs = tails.integrated_tail(law, params["z"], rtol=params["rtol"] * 1e-2) \
            - params["z"] * tails.tail_prob(law, params["z"])
        rel = abs(lhs - rhs) / abs(lhs)
        return {"passed": rel <= params["rtol"], "value": rel,
                "details": {"closed_form": lhs, "quadrature": rhs}}


class KaramataRatio(Check):
    """``E[Z 1{Z<=z}]`` over its regular-variation asymptote is within ``tol`` of 1."""

    @staticmethod
    def validate(params, mtype, model, levels):
        return TruncatedMeanIdentity.validate({**params, "rtol": params.get("tol")}, mtype, model, levels)

    @staticmethod
    def evaluate(params, ctx):
        law = tails.TailLaw.from_dict(params["law"])
        ratio = tails.truncated_mean(law, params["z"]) / tails.karamata_asymptote(law, params["z"])
        return {"passed": abs(ratio - 1.0) <= params["tol"], "value": ratio, "details": {}}


class RegimeInvariance(Check):
    """``classify_regime`` is identical for every bulk ``drift_shift`` listed."""

    @staticmethod
    def validate(params, mtype, model, levels):
        p = []
        try:
            strip_mod.StripKernel.from_dict(params["kernel"])
        except (KeyError, TypeError, ValueError) as exc:
            p.append(("kernel", str(exc) or "invalid"))
        shifts = params.get("shifts")
        if not isinstance(shifts, list) or not shifts or not all(isinstance(s, int) for s in shifts):
            p.append(("shifts", "must be a nonempty list of integers"))
        return p

    @staticmethod
    def evaluate(params, ctx):
        base = strip_mod.StripKernel.from_dict(params["kernel"])
        ref = strip_mod.classify_regime(base)
        out, same = {}, True
        for s in params["shifts"]:
            bulk = IncrementLaw.from_dict({**base.bulk_jump.to_dict(), "drift_shift": float(s)})
            k = strip_mod.StripKernel(base.induced, base.boundary_jump, bulk)
            r = strip_mod.classify_regime(k)
            out[str(s)] = str(r)
            same = same and r == ref
        expected = params.get("expected")
        ok = same and (expected is None or str(ref) == expected)
        return {"passed": ok, "value": str(ref), "details": {"by_shift": out}}


CHECKS = {
    "loglog-slope": LogLogSlope,
    "growth-ratio": GrowthRatio,
    "upper-envelope": UpperEnvelopeCheck,
    "lower-envelope": LowerEnvelopeCheck,
    "terminal-sign": TerminalSign,
    "passage-survival": PassageSurvival,
    "last-exit-survival": LastExitSurvival,
    "return-time-hill": ReturnTimeHill,
    "drift-region": DriftRegion,
    "truncated-mean-identity": TruncatedMeanIdentity,
    "karamata-ratio": KaramataRatio,
    "regime-invariance": RegimeInvariance,
}
