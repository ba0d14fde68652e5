import numpy as np
import pytest

from idqa.errors import ValidationError
from idqa.schedule import (LINEAR_CURVES, AnnealPath, ScheduleCurves, eval_curves,
                           eval_path, linear_path, load_curve_file, make_pause_path)


class TestMakePausePath:
    def test_paper_example_hold_window(self):
        path = make_pause_path(5.0, 5.0, 0.46)
        assert path.total_time == 10.0
        times = [t for t, _ in path.breakpoints]
        fracs = [s for _, s in path.breakpoints]
        assert times == pytest.approx([0.0, 2.3, 7.3, 10.0], abs=1e-12)
        assert fracs == pytest.approx([0.0, 0.46, 0.46, 1.0], abs=1e-15)

    def test_zero_pause_equals_ramp(self):
        path = make_pause_path(7.0, 0.0, 0.3)
        ramp = linear_path(7.0)
        for t in np.linspace(0, 7, 29):
            assert eval_path(path, t) == pytest.approx(eval_path(ramp, t), abs=1e-14)

    def test_piecewise_arithmetic(self):
        path = make_pause_path(1.0, 1.0, 0.5)
        assert eval_path(path, 0.25) == pytest.approx(0.25)
        assert eval_path(path, 1.0) == pytest.approx(0.5)
        assert eval_path(path, 1.75) == pytest.approx(0.75)

    def test_invalid_ranges(self):
        with pytest.raises(ValidationError):
            make_pause_path(0.0, 1.0, 0.5)
        with pytest.raises(ValidationError):
            make_pause_path(1.0, -1.0, 0.5)
        with pytest.raises(ValidationError):
            make_pause_path(1.0, 1.0, 1.0)


class TestEvalPath:
    def test_standard_ramp(self):
        assert eval_path(linear_path(10.0), 5.0) == pytest.approx(0.5)

    def test_pause_plateau(self):
        path = make_pause_path(5.0, 5.0, 0.46)
        assert eval_path(path, 5.0) == pytest.approx(0.46)

    def test_endpoint(self):
        path = make_pause_path(5.0, 5.0, 0.46)
        assert eval_path(path, path.total_time) == 1.0

    def test_out_of_range(self):
        path = linear_path(1.0)
        with pytest.raises(ValidationError):
            eval_path(path, -0.1)
        with pytest.raises(ValidationError):
            eval_path(path, 1.1)

    def test_monotone_and_continuous(self):
        path = make_pause_path(3.0, 2.0, 0.4)
        t = np.linspace(0, path.total_time, 4001)
        s = eval_path(path, t)
        assert np.all(np.diff(s) >= -1e-15)
        assert np.max(np.abs(np.diff(s))) < 2e-3  # ~max slope * dt


class TestEvalCurves:
    def test_linear_endpoints(self):
        assert eval_curves(LINEAR_CURVES, 0.0) == (1.0, 0.0)
        assert eval_curves(LINEAR_CURVES, 1.0) == (0.0, 1.0)

    def test_linear_quarter(self):
        a, b = eval_curves(LINEAR_CURVES, 0.25)
        assert (a, b) == pytest.approx((0.75, 0.25))

    def test_user_table(self):
        curves = ScheduleCurves(samples=((0.0, 1.0, 0.0), (0.5, 0.3, 0.6),
                                         (1.0, 0.0, 1.0)))
        a, b = eval_curves(curves, 0.25)
        assert (a, b) == pytest.approx((0.65, 0.3))

    def test_out_of_range(self):
        with pytest.raises(ValidationError):
            eval_curves(LINEAR_CURVES, 1.5)

    def test_constant_hamiltonian_during_pause(self):
        path = make_pause_path(5.0, 5.0, 0.46)
        ts = np.linspace(2.3, 7.3, 50)
        ab = np.array([eval_curves(LINEAR_CURVES, eval_path(path, t)) for t in ts])
        assert np.ptp(ab[:, 0]) <= 1e-15
        assert np.ptp(ab[:, 1]) <= 1e-15


class TestValidation:
    def test_path_must_start_at_origin(self):
        with pytest.raises(ValidationError):
            AnnealPath(breakpoints=((0.0, 0.1), (1.0, 1.0)))

    def test_path_must_reach_one(self):
        with pytest.raises(ValidationError):
            AnnealPath(breakpoints=((0.0, 0.0), (1.0, 0.9)))

    def test_path_times_strictly_increasing(self):
        with pytest.raises(ValidationError):
            AnnealPath(breakpoints=((0.0, 0.0), (1.0, 0.5), (1.0, 0.6), (2.0, 1.0)))

    def test_path_s_non_decreasing(self):
        with pytest.raises(ValidationError):
            AnnealPath(breakpoints=((0.0, 0.0), (1.0, 0.7), (2.0, 0.5), (3.0, 1.0)))

    def test_curves_need_zero_driver_at_end(self):
        with pytest.raises(ValidationError):
            ScheduleCurves(samples=((0.0, 1.0, 0.0), (1.0, 0.1, 1.0)))

    def test_curves_monotonicity(self):
        with pytest.raises(ValidationError):
            ScheduleCurves(samples=((0.0, 1.0, 0.0), (0.5, 1.2, 0.5), (1.0, 0.0, 1.0)))


def test_load_curve_file(tmp_path):
    path = tmp_path / "curves.txt"
    path.write_text("s A B\n0.0 1.0 0.0\n0.5 0.3 0.6\n1.0 0.0 1.0\n")
    curves = load_curve_file(path)
    assert eval_curves(curves, 0.25) == pytest.approx((0.65, 0.3))


def test_load_curve_file_comments_and_errors(tmp_path):
    good = tmp_path / "good.txt"
    good.write_text("# table\n0 1 0\n1 0 1\n")
    assert load_curve_file(good).samples == ((0.0, 1.0, 0.0), (1.0, 0.0, 1.0))
    bad = tmp_path / "bad.txt"
    bad.write_text("0 1\n1 0\n")
    with pytest.raises(ValidationError):
        load_curve_file(bad)
