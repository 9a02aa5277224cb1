"""Acceptance criteria, one test each.

Every test prints a single ``ACCEPTANCE <n> <name>: PASS|FAIL ...`` line.  Run
directly (``python tests/test_acceptance.py``) for the bare summary.
"""

import contextlib
import filecmp
import io
import sys
import time
from pathlib import Path


from rikit import cli
from rikit.verify import DEFAULT_SEED, run_case


def _report(capsys, n, name, ok, detail):
    line = f"ACCEPTANCE {n} {name}: {'PASS' if ok else 'FAIL'} ({detail})"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    return ok


def _timed(case_id, params=None):
    start = time.perf_counter()
    rep = run_case(case_id, params, seed=DEFAULT_SEED)
    return rep, time.perf_counter() - start


def check_duality(capsys=None):
    rep, dt = _timed("duality-identity")
    gap = rep.details["worst_relative_discrepancy"]
    ok = (rep.verdict == "pass" and rep.n_samples == 1000 and len(rep.details["triples"]) == 5
          and gap <= 1e-10 and dt < 2)
    return _report(capsys, 1, "duality-identity", ok,
                   f"200 pairs x 5 triples, worst relative discrepancy {gap:.2e} <= 1e-10, {dt:.2f}s < 2s")


def check_norm_duality(capsys=None):
    rep, dt = _timed("norm-duality")
    r, h = rep.details["R_norm_estimate"], rep.details["H_norm_estimate"]
    ok = (rep.verdict == "pass" and abs(r - h) <= 0.05 * max(r, h)
          and abs(r / 2 - 1) <= 0.05 and abs(h / 2 - 1) <= 0.05 and dt < 10)
    return _report(capsys, 2, "norm-duality", ok,
                   f"R: {r:.5f}, H: {h:.5f}, classical 2, all within 5%, {dt:.2f}s < 10s")


def check_honsimple(capsys=None):
    rep, dt = _timed("honsimple")
    d = rep.details
    ok = (rep.verdict == "pass" and rep.n_samples == 100 and not d["violations"]
          and d["min_ratio_over_lower"] >= 1 - 1e-9 and d["max_ratio_over_C"] <= 1 + 1e-9 and dt < 10)
    return _report(capsys, 3, "honsimple", ok,
                   f"100 simple functions ({rep.skipped} with both sides 0 or inf), ratio/C <= {d['max_ratio_over_C']:.6f}, "
                   f"ratio/lower >= {d['min_ratio_over_lower']:.4f}, 0 violations, {dt:.2f}s < 10s")


def check_sandwich(capsys=None):
    rep, dt = _timed("sandwich")
    samples = rep.details["samples"]
    noninc = [s for s in samples if s["kind"] == "nonincreasing"]
    nondec = [s for s in samples if s["kind"] == "nondecreasing"]
    eq_gap = max(s["relative_gap"] for s in noninc)
    order_ok = all(s["H_f_star"] <= s["bracket_lower"] <= s["rho_tilde"] * (1 + 1e-8) for s in nondec)
    ok = rep.verdict == "pass" and len(noninc) == 50 and eq_gap <= 1e-6 and order_ok and len(nondec) > 0
    return _report(capsys, 4, "sandwich", ok,
                   f"50 nonincreasing-phi instances, worst equality gap {eq_gap:.2e} <= 1e-6; "
                   f"{len(nondec)} nondecreasing-phi instances ordered: {order_ok}; {dt:.2f}s")


def check_iteration_R(capsys=None):
    rep, dt = _timed("iteration-R")
    d = rep.details
    c, c2 = d["c"], d["c_doubled_grid"]
    ok = (rep.verdict == "pass" and d["symbolic_checks"] == 20 and d["symbolic_all_exact"]
          and c <= 100 and abs(c2 / c - 1) <= 0.10 and dt < 30)
    return _report(capsys, 5, "iteration-R", ok,
                   f"20 exact exponent checks, c = {c:.4f} <= 100, doubled grid {c2:.4f} (within 10%), {dt:.2f}s < 30s")


def check_iteration_H(capsys=None):
    rep, dt = _timed("iteration-H")
    lo, hi = rep.band
    ratios = [s["ratio"] for s in rep.details["samples"]]
    ok = (rep.verdict == "pass" and not rep.details["failures"]
          and all(lo * (1 - 1e-9) <= r <= hi * (1 + 1e-9) for r in ratios) and dt < 10)
    return _report(capsys, 6, "iteration-H", ok,
                   f"{len(ratios)} ratios in [{lo}, {hi}], max {max(ratios):.6f}, 0 violations, {dt:.2f}s < 10s")


def check_classical(capsys=None):
    start = time.perf_counter()
    hlp = run_case("hlp", seed=DEFAULT_SEED)
    axioms = run_case("axioms", seed=DEFAULT_SEED)
    dt = time.perf_counter() - start
    counts = list(hlp.details["per_space"].values()) + list(axioms.details["per_check"].values())
    violations = sum(v for _, v in counts)
    ok = (hlp.verdict == axioms.verdict == "pass" and all(n >= 1000 for n, _ in counts) and violations == 0
          and max(hlp.details["worst_excess"], axioms.details["worst_excess"]) <= 1e-10 and dt < 20)
    return _report(capsys, 7, "classical-suites", ok,
                   f"{len(counts)} suites x >=1000 instances, {violations} violations beyond 1e-10, {dt:.2f}s < 20s")


def check_k_formula(capsys=None):
    rep, dt = _timed("k-formula")
    d = rep.details
    ok = (rep.verdict == "pass" and rep.n_samples == 50 and d["min_ratio"] >= 0.25 and d["max_ratio"] <= 4
          and dt < 5)
    return _report(capsys, 8, "k-formula", ok,
                   f"50 instances, ratios in [{d['min_ratio']:.6f}, {d['max_ratio']:.6f}] within the empirical band "
                   f"[1/4, 4], {dt:.2f}s < 5s")


def check_determinism(capsys=None, root: Path | None = None):
    import tempfile
    root = Path(root or tempfile.mkdtemp())
    times, codes = [], []
    for name in ("a", "b"):
        start = time.perf_counter()
        with contextlib.redirect_stdout(io.StringIO()):
            codes.append(cli.run(["verify", "all", "--seed", str(DEFAULT_SEED), "--jobs", "1",
                                  "--out", str(root / name)]))
        times.append(time.perf_counter() - start)
    files = sorted(p.name for p in (root / "a").iterdir())
    same = files == sorted(p.name for p in (root / "b").iterdir()) and all(
        filecmp.cmp(root / "a" / f, root / "b" / f, shallow=False) for f in files)
    ok = same and len(files) == 13 and codes == [0, 0] and max(times) < 60
    return _report(capsys, 9, "determinism", ok,
                   f"{len(files)} files byte-identical: {same}, exit codes {codes}, "
                   f"full suite {times[0]:.1f}s / {times[1]:.1f}s < 60s single-worker")


def test_1_duality_identity(capsys):
    assert check_duality(capsys)


def test_2_norm_duality(capsys):
    assert check_norm_duality(capsys)


def test_3_honsimple(capsys):
    assert check_honsimple(capsys)


def test_4_sandwich(capsys):
    assert check_sandwich(capsys)


def test_5_iteration_R(capsys):
    assert check_iteration_R(capsys)


def test_6_iteration_H(capsys):
    assert check_iteration_H(capsys)


def test_7_classical_suites(capsys):
    assert check_classical(capsys)


def test_8_k_formula(capsys):
    assert check_k_formula(capsys)


def test_9_determinism(capsys, tmp_path):
    assert check_determinism(capsys, tmp_path)


if __name__ == "__main__":
    checks = [check_duality, check_norm_duality, check_honsimple, check_sandwich, check_iteration_R,
              check_iteration_H, check_classical, check_k_formula, check_determinism]
    results = [chk() for chk in checks]
    sys.exit(0 if all(results) else 1)
