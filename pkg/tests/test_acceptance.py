"""Acceptance criteria, one preset per criterion (7 has three cases).

Each test prints a single ``criterion ... PASS/FAIL`` line. Run with
``pytest -m acceptance -s`` to see the lines interleaved with progress.
"""
import pytest

from heavywalk.harness.presets import accept

CRITERIA = [
    ("1", "cor2-rate"),
    ("2", "upper-envelope"),
    ("3", "lower-envelope"),
    ("4", "passage-moments"),
    ("5", "last-exit-tail"),
    ("6", "lamperti-gamma"),
    ("7a", "strip-ergodic"),
    ("7b", "strip-boundary"),
    ("7c", "strip-bulk"),
    ("8", "drift-regions"),
    ("9", "analytic-oracles"),
    ("10", "risk-invariance"),
]


def _summary(payload):
    parts = []
    for c in payload["checks"]:
        if not c["gating"]:
            continue
        v = c.get("value")
        v = f"{v:.4g}" if isinstance(v, float) else v
        parts.append(f"{c['label']}={v}{'' if c['passed'] else ' (fail)'}")
    return "; ".join(parts)


@pytest.mark.acceptance
@pytest.mark.parametrize("criterion,preset", CRITERIA, ids=[f"criterion-{c}" for c, _ in CRITERIA])
def test_criterion(criterion, preset, capsys):
    report = accept(preset)
    p = report.payload
    line = (f"criterion {criterion:3s} {preset:18s} {'PASS' if p['passed'] else 'FAIL'}  "
            f"{_summary(p)}  [{report.wall_clock:.0f}s]")
    with capsys.disabled():
        print("\n" + line)
    failed = [(c["label"], c.get("value"), c.get("error") or c.get("details"))
              for c in p["checks"] if c["gating"] and not c["passed"]]
    assert p["passed"], f"gating checks failed: {failed}"
