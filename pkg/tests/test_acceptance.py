"""Acceptance suite: one PASS/FAIL line per criterion at the published tolerances.

Run with ``pytest -s tests/test_acceptance.py`` to see the verdict lines.
"""

import math
import time
from pathlib import Path

import pytest

from tfzak import cli
from tfzak.experiments import CHECKS, check_factorial_bound


def report(number: int, title: str, ok: bool, detail: str) -> None:
    print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number:>2} {title}: {detail}")


def timed(name: str, **kwargs):
    t0 = time.perf_counter()
    res = CHECKS[name](**kwargs)
    return res, time.perf_counter() - t0


def equivalence_entries(metrics: dict, skip=()):
    """Spread/drift entries of an equivalence check, skipping keys that contain any of ``skip``."""
    return {k: v for k, v in metrics.items()
            if isinstance(v, dict) and "spread" in v and not any(s in k for s in skip)}


def spread_verdict(entries: dict, spread_bound: float, drift_bound: float = 0.05):
    worst_spread = max(v["spread"] for v in entries.values())
    worst_drift = max(v["drift"] for v in entries.values())
    ok = worst_spread <= spread_bound and worst_drift <= drift_bound
    return ok, f"max spread {worst_spread:.4g} (<= {spread_bound}), max drift {worst_drift:.3g} (<= {drift_bound})"


def test_01_finite_zak_parseval():
    res, dt = timed("finite-zak-parseval", seed=0)
    sizes = sorted({row["L"] for row in res.rows})
    ok = res.metrics["max_rel_defect"] <= 1e-10 and sizes == [64, 1024, 4096] and dt < 5.0
    report(1, "finite Zak Parseval", ok,
           f"max relative defect {res.metrics['max_rel_defect']:.3g} over L={sizes}, "
           f"{len(res.rows)} factorizations, {dt:.2f}s (< 5s)")
    assert ok, res.failures


def test_02_zak_parseval_constant():
    res, dt = timed("zak-parseval", seed=0)
    m = res.metrics
    ok = m["rel_error"] <= 0.01 and m["drift"] <= 0.005 and dt < 10.0
    report(2, "continuous Zak Parseval constant", ok,
           f"constant {m['constant']:.8g} vs {math.sqrt(2 * math.pi):.8g} (rel {m['rel_error']:.3g} <= 1%), "
           f"drift {m['drift']:.3g} (<= 0.5%), {dt:.2f}s (< 10s)")
    assert ok, res.failures


def test_03_quasi_and_echo_periodicity():
    t0 = time.perf_counter()
    q = CHECKS["quasi-periodicity"](seed=0)
    e = CHECKS["echo-periodicity"](seed=0)
    q_bad = CHECKS["quasi-periodicity"](seed=0, plant_defect=0.01)
    e_bad = CHECKS["echo-periodicity"](seed=0, plant_defect=0.01)
    dt = time.perf_counter() - t0
    shape = tuple(e.metrics["shape"])
    ok = (q.metrics["defect"] <= 1e-9 and e.metrics["defect"] <= 1e-8
          and shape == (32, 32, 64, 64)
          and not q_bad.passed and not e_bad.passed and dt < 60.0)
    report(3, "quasi- and echo-periodicity", ok,
           f"quasi {q.metrics['defect']:.3g} (<= 1e-9), echo {e.metrics['defect']:.3g} (<= 1e-8) on {shape}, "
           f"planted 1% caught: quasi {q_bad.metrics['defect']:.3g}, echo {e_bad.metrics['defect']:.3g}, {dt:.2f}s (< 60s)")
    assert ok


def test_04_stft_closed_form():
    res, dt = timed("stft-closed-form", seed=0)
    ok = res.metrics["max_error"] <= 1e-6 and dt < 5.0
    report(4, "STFT closed form", ok, f"max error {res.metrics['max_error']:.3g} (<= 1e-6), {dt:.2f}s (< 5s)")
    assert ok, res.failures


def test_05_hard_inequalities():
    res, _ = timed("hard-inequalities", seed=0)
    m = res.metrics
    # forced constants, with one rounding unit of slack on the exact equality cases
    ok = (m["wiener_vs_lebesgue_max"] <= 1.0 + 1e-12 and m["cell_holder_max"] <= 1.0 + 1e-12
          and m["young_l1_max"] <= 1.0 + 1e-9 and res.passed)
    report(5, "hard inequalities", ok,
           f"Wiener/Lebesgue {m['wiener_vs_lebesgue_max']!r} (<= 1 up to rounding), per-cell Hoelder {m['cell_holder_max']:.6g} (<= 1), "
           f"Young L1 {m['young_l1_max']!r} (<= 1+1e-9)")
    assert ok, res.failures


def test_06_wiener_r_independence():
    res, _ = timed("wiener-r-independence", seed=0)
    entries = equivalence_entries(res.metrics)
    ok, detail = spread_verdict(entries, 4.0)
    report(6, "Wiener local-exponent independence", ok and res.passed, f"{len(entries)} (p, r) pairs, {detail}")
    assert ok and res.passed, res.failures


def test_07_periodic_characterization():
    res, _ = timed("periodic-modulation", seed=0)
    entries = equivalence_entries(res.metrics, skip=("sup",))
    ok, detail = spread_verdict(entries, 3.0)
    hom = res.metrics["homogeneity_defect"]
    ok = ok and hom <= 1e-12 and res.passed
    report(7, "periodic characterization", ok, f"{sorted(entries)}: {detail}, homogeneity {hom:.3g} (<= 1e-12)")
    assert ok, res.failures


def test_08_zak_modulation():
    res, _ = timed("zak-modulation", seed=0)
    entries = equivalence_entries(res.metrics)
    ok, detail = spread_verdict(entries, 4.0)
    per = res.metrics["h_periodicity_defect"]
    ok = ok and per <= 1e-8 and res.passed
    report(8, "Zak characterization of modulation spaces", ok, f"{detail}, H periodicity {per:.3g} (<= 1e-8)")
    assert ok, res.failures


def test_09_zak_lebesgue():
    res, _ = timed("zak-lebesgue", seed=0)
    entries = equivalence_entries(res.metrics)
    ok, detail = spread_verdict(entries, 4.0)
    report(9, "Zak characterization of Lebesgue spaces", ok and res.passed, f"{sorted(entries)}: {detail}")
    assert ok and res.passed, res.failures


def test_10_gelfand_shilov_decay_and_factorial_bound():
    res, _ = timed("gs-decay", seed=0)
    r_ok = res.metrics["rel_error"] <= 0.05
    parts = []
    h_ok = True
    for r, s in ((1.0, 1.0), (2.0, 1.0), (1.0, 0.5)):
        fb = check_factorial_bound(r, s)
        threshold = (r / (s * math.e)) ** (-s)
        h = fb.metrics["h"]
        h_ok = h_ok and fb.passed and h <= 1.1 * threshold
        parts.append(f"(r={r:g},s={s:g}) h={h:.4g} vs threshold {threshold:.4g}, "
                     f"two-sided gap {abs(h / threshold - 1):.1%}")
    ok = r_ok and h_ok
    report(10, "Gelfand-Shilov decay fit and factorial bound", ok,
           f"fitted rate {res.metrics['r']:.6g} (rel {res.metrics['rel_error']:.3g} <= 5%); " + "; ".join(parts))
    assert ok, res.failures


def test_11_determinism(tmp_path: Path, capsys: pytest.CaptureFixture):
    runs = []
    for name in ("first", "second"):
        out = tmp_path / name
        code = cli.main(["verify", "all", "--seed", "0", "--out", str(out)])
        runs.append((code, {p.name: p.read_bytes() for p in sorted(out.glob("*.csv"))}))
    capsys.readouterr()
    (c1, a), (c2, b) = runs
    differing = sorted(k for k in a.keys() | b.keys() if a.get(k) != b.get(k))
    ok = c1 == c2 == 0 and len(a) > 0 and not differing
    with capsys.disabled():
        report(11, "determinism", ok, f"{len(a)} CSVs compared, exit codes {c1}/{c2}, differing: {differing or 'none'}")
    assert ok
