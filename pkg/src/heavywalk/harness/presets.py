"""Named acceptance scenarios. Each preset is a complete config document."""
from __future__ import annotations

import copy

from ..lyapunov import LyapunovSpec
from ..strip import InducedChainSpec, StripKernel
from ..tails import TailLaw
from ..walk import IncrementLaw

SEED = 12345

_P = TailLaw.pareto
_U = TailLaw.uniform


def _law(pos, neg, p=0.5, shift=0.0):
    return IncrementLaw(pos, neg, p, shift).to_dict()


# pareto(1/2) up-jumps, down-steps bounded by 1
ESCAPE_LAW = _law(_P(0.5), _U(1.0))


def _strip(induced, boundary, bulk):
    return StripKernel(induced, boundary, bulk).to_dict()


_ERGODIC2 = InducedChainSpec("finite-ergodic", ((0.5, 0.5), (0.5, 0.5)))
_SRW = InducedChainSpec("reflected-srw")
_PUSH_UP = lambda a: IncrementLaw(_P(a), TailLaw.zero(), 1.0)  # noqa: E731
_UNIT = IncrementLaw(_U(1.0), _U(1.0), 0.5)

STRIP_A = _strip(_ERGODIC2, _PUSH_UP(0.5), IncrementLaw(_U(1.0), _P(2.0), 0.5))
STRIP_B = _strip(_SRW, _PUSH_UP(0.2), _UNIT)
STRIP_C = _strip(_SRW, _UNIT, IncrementLaw(_U(1.0), _P(0.4), 0.5))


def _walk(name, law, horizon, replicas, checks, levels=()):
    return {"name": name, "model": {"type": "walk", "law": law}, "horizon": horizon,
            "replicas": replicas, "master_seed": SEED, "levels": list(levels), "checks": checks}


def _strip_cfg(name, kernel, checks):
    return {"name": name, "model": {"type": "strip", "kernel": kernel}, "horizon": 10**6,
            "replicas": 50, "master_seed": SEED, "checks": checks}


def _static(name, checks):
    return {"name": name, "model": {"type": "none"}, "horizon": 2, "replicas": 1,
            "master_seed": SEED, "checks": checks}


def _growth(lo, hi, absolute=False):
    # gating: fitted log-log slope, as in the walk rate check; the terminal
    # ratio log|V_T|/log T is reported alongside
    return [
        {"check": "loglog-slope", "params": {"lo": lo, "hi": hi, "burn_in": 1000, "absolute": absolute}},
        {"check": "growth-ratio", "gating": False, "params": {"lo": lo, "hi": hi, "absolute": absolute}},
    ]


def _drift(label, law, spec, direction, sign):
    return {"check": "drift-region", "label": label,
            "params": {"law": law, "spec": spec.to_dict(), "direction": direction, "n": 10**5,
                       "grid": {"origin": 0.0, "jmin": 1, "jmax": 14, "sign": sign}}}


def _identity(label, law, z):
    return {"check": "truncated-mean-identity", "label": label,
            "params": {"law": law.to_dict(), "z": z, "rtol": 1e-9}}


PRESETS = {
    "cor2-rate": (
        "criterion 1: median log-log growth slope of the escape walk in [1.8, 2.2]",
        _walk("cor2-rate", ESCAPE_LAW, 10**6, 100, [
            {"check": "loglog-slope", "params": {"lo": 1.8, "hi": 2.2, "burn_in": 1000}}])),
    "upper-envelope": (
        "criterion 2: no upper-envelope violation for t >= 1000 in any of 100 replicas",
        _walk("upper-envelope", ESCAPE_LAW, 10**6, 100, [
            {"check": "upper-envelope",
             "params": {"theta": 0.5, "phi": 0.0, "eps": 0.5, "burn_in": 1000,
                        "min_pass_fraction": 1.0}}])),
    "lower-envelope": (
        "criterion 3: lower envelope and max-increment bound clean in >= 95 of 100 replicas",
        _walk("lower-envelope", ESCAPE_LAW, 10**6, 100, [
            {"check": "lower-envelope",
             "params": {"alpha": 0.5, "eps": 0.5, "burn_in": 1000, "with_max_increment": True,
                        "min_pass_fraction": 0.95}}])),
    "passage-moments": (
        "criterion 4: survival slope of tau_10 in [-0.65, -0.35] and moment verdicts",
        _walk("passage-moments", _law(TailLaw.constant(1.0), _P(0.5)), 10**6, 10**4, [
            {"check": "passage-survival",
             "params": {"level": 10.0, "lo": -0.65, "hi": -0.35,
                        "moments": {"0.25": "converging", "1": "diverging"}}}], levels=[10.0])),
    "last-exit-tail": (
        "criterion 5: survival slope of lambda_0 in [-2.6, -1.4]",
        _walk("last-exit-tail", _law(_P(0.5), _P(1.5)), 10**5, 10**4, [
            {"check": "last-exit-survival", "params": {"level": 0.0, "lo": -2.6, "hi": -1.4}}],
            levels=[0.0])),
    "lamperti-gamma": (
        "criterion 6: censored Hill exponent of Lamperti return times within 0.1 of gamma",
        _static("lamperti-gamma", [
            {"check": "return-time-hill", "label": f"gamma={g}",
             "params": {"gamma": g, "n": 10**4, "cap": 10**6, "tol": 0.1}}
            for g in (0.25, 0.5, 0.75)])),
    "strip-ergodic": (
        "criterion 7a: finite-ergodic strip, boundary alpha=0.5, growth exponent in [1.7, 2.3]",
        _strip_cfg("strip-ergodic", STRIP_A, _growth(1.7, 2.3))),
    "strip-boundary": (
        "criterion 7b: reflected-SRW strip, boundary alpha=0.2, growth exponent in [2.1, 2.9]",
        _strip_cfg("strip-boundary", STRIP_B, _growth(2.1, 2.9))),
    "strip-bulk": (
        "criterion 7c: reflected-SRW strip, bulk beta=0.4 down, V_T < 0 in >= 95% and |V| exponent in [2.1, 2.9]",
        _strip_cfg("strip-bulk", STRIP_C, [
            {"check": "terminal-sign", "params": {"sign": -1, "min_fraction": 0.95}},
            *_growth(2.1, 2.9, absolute=True)])),
    "drift-regions": (
        "criterion 8: supermartingale, submartingale and strong-drift regions confirmed",
        _static("drift-regions", [
            _drift("super", ESCAPE_LAW, LyapunovSpec.f_power_decay(0.0, 0.25), "supermartingale", 1),
            _drift("sub", _law(_U(1.0), _P(0.75)), LyapunovSpec.f_power_decay(0.0, 1.0),
                   "submartingale", 1),
            _drift("strong", ESCAPE_LAW, LyapunovSpec.w_power(0.0, 0.8),
                   {"kind": "strong-drift", "eta": 0.25, "eps": 0.1}, -1)])),
    "analytic-oracles": (
        "criterion 9: truncated-mean identity to 1e-9 and Karamata ratio within 0.1% at 1e8",
        _static("analytic-oracles", [
            _identity("pareto(0.5), z=100", _P(0.5), 100.0),
            _identity("pareto(0.5), z=1e8", _P(0.5), 1e8),
            _identity("pareto(1), z=1e4", _P(1.0), 1e4),
            _identity("pareto(0.75, x0=2), z=1e6", _P(0.75, 2.0), 1e6),
            {"check": "karamata-ratio", "label": "pareto(0.5), z=1e8",
             "params": {"law": _P(0.5).to_dict(), "z": 1e8, "tol": 1e-3}}])),
    "risk-invariance": (
        "criterion 10: strip regime unchanged under bulk drift shifts 1, 10, 100",
        _static("risk-invariance", [
            {"check": "regime-invariance",
             "params": {"kernel": STRIP_C, "shifts": [1, 10, 100],
                        "expected": "bulk-dominates(-inf, slope=2.5)"}}])),
}


def list_presets():
    """Preset names mapped to one-line descriptions."""
    return {name: desc for name, (desc, _) in PRESETS.items()}


def preset_config(name):
    from .config import ConfigError

    if name not in PRESETS:
        raise ConfigError([("preset", f"unknown preset {name!r}")])
    return copy.deepcopy(PRESETS[name][1])


def accept(name, output_dir=None):
    """Run a preset and return its :class:`RunReport`."""
    from .runner import run

    cfg = preset_config(name)
    cfg["output_dir"] = output_dir
    return run(cfg)
