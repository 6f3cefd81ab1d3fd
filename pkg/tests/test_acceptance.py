"""Acceptance criteria 1-13. Each test prints one PASS/FAIL line; a summary is repeated at the end."""
import time
from functools import lru_cache

import pytest

from oscillab.explab import report
from oscillab.explab.config import default_config
from oscillab.explab.experiments import run

VERDICTS = {}


@lru_cache(maxsize=None)
def timed(name):
    t = time.perf_counter()
    rows = run(default_config(name))
    return {r.check: r for r in rows}, rows, time.perf_counter() - t


def judge(num, title, checks, elapsed, budget):
    """checks: list of (label, ok, detail)."""
    checks = list(checks) + [("runtime", elapsed < budget, f"{elapsed:.2f}s < {budget}s")]
    bad = [f"{lbl} ({det})" for lbl, ok, det in checks if not ok]
    good = all(ok for _, ok, _ in checks)
    line = f"{'PASS' if good else 'FAIL'} criterion {num}: {title}"
    line += "" if good else " -- failing: " + "; ".join(bad)
    VERDICTS[num] = line
    print(line)
    assert good, line


def row_check(rows, name, label=None):
    r = rows[name]
    return (label or name, r.passed is True,
            f"{r.measured:.4g} {r.comparison} {r.reference:.4g}")


def test_criterion_01_exponents():
    rows, _, dt = timed("exponents")
    judge(1, "exponent exactness",
          [row_check(rows, k) for k in ("p_critical_3_2", "p_critical_3_2_exact",
                                        "p_critical_monotone_violations",
                                        "bound_range_4_3_low", "bound_range_4_3_exact")],
          dt, 1.0)


def test_criterion_02_gauss_map():
    rows, _, dt = timed("phase")
    judge(2, "Gauss map identity", [row_check(rows, "gauss_map_angle_error")], dt, 5.0)


def test_criterion_03_mixed_hessian():
    rows, _, dt = timed("phase")
    judge(3, "mixed-Hessian determinant",
          [row_check(rows, "mixed_hessian_det_rel_error"),
           row_check(rows, "mixed_hessian_det_at_x_eq_tw")], dt, 5.0)


def test_criterion_04_wavepackets():
    rows, _, dt = timed("wavepackets")
    judge(4, "wave packet suite",
          [row_check(rows, k) for k in ("reconstruction_rel_error", "packet_energy_ratio_low",
                                        "packet_energy_ratio_high", "essential_support_ratio",
                                        "empty_packet_sup_over_norm")], dt, 60.0)


def test_criterion_05_two_scale():
    rows, _, dt = timed("wavepackets")
    judge(5, "two-scale comparison",
          [row_check(rows, k) for k in ("two_scale_capture", "two_scale_hausdorff",
                                        "two_scale_cap_distance")], dt, 60.0)


def test_criterion_06_phi_spectra():
    rows, _, dt = timed("phase")
    judge(6, "Phi-map Jacobian spectra",
          [row_check(rows, "phi_jacobian_asymmetry"),
           row_check(rows, "phi_jacobian_spectral_constant")], dt, 5.0)


def test_criterion_07_transverse():
    rows, _, dt = timed("transequi")
    judge(7, "transverse equidistribution trend", [row_check(rows, "fitted_exponent")],
          dt, 120.0)


def test_criterion_08_partitioning():
    rows, _, dt = timed("partition")
    judge(8, "polynomial partitioning",
          [row_check(rows, k) for k in ("nonempty_cells", "max_cell_weight_fraction",
                                        "line_crossing_violations")], dt, 30.0)


def test_criterion_09_rescale():
    rows, _, dt = timed("rescale")
    judge(9, "parabolic rescaling identity",
          [row_check(rows, "max_relative_deviation"),
           row_check(rows, "domain_inclusion_violations")], dt, 30.0)


def test_criterion_10_broad_norm():
    rows, _, dt = timed("broad")
    judge(10, "broad norm properties",
          [row_check(rows, k) for k in ("single_cap_vanishing_violations",
                                        "antitone_in_A_violations",
                                        "subadditivity_violations")], dt, 30.0)


def test_criterion_11_l2_proxy():
    rows, _, dt = timed("phase")
    judge(11, "L2 boundedness proxy", [row_check(rows, "l2_bound_max_ratio")], dt, 30.0)


def test_criterion_12_knapp():
    _, rows, dt = timed("knapp")
    verdicts = {r.check: r for r in rows if r.comparison != "info"}
    judge(12, "Knapp dichotomy",
          [row_check(verdicts, "increasing_below_critical"),
           row_check(verdicts, "nonincreasing_above_critical")], dt, 60.0)


SUITES = ("exponents", "phase", "wavepackets", "transequi", "partition", "rescale",
          "broad", "knapp", "decouple")


def test_criterion_13_determinism():
    checks = []
    t = time.perf_counter()
    for name in SUITES:
        first = timed(name)[1]
        again = run(default_config(name))
        same = (report.to_csv(first) == report.to_csv(again)
                and report.to_json(first) == report.to_json(again))
        checks.append((name, same, "reports differ"))
    judge(13, "determinism", checks, time.perf_counter() - t, float("inf"))


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
