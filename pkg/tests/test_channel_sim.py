import csv
import math
import os

import numpy as np
import pytest

from core.analysis import error_floor_uncoded
from core.channel_sim import (
    SimPoint,
    StopRule,
    awgn,
    ebn0_grid,
    ebn0_to_n0,
    point_key,
    run_point,
    run_trials,
    sweep,
)
from core.mlc import preset_new
from core.utilities import SimulationError, trial_rng


def read_rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


class TestChannel:
    def test_noiseless_channel(self, rng):
        x = np.array([1 + 1j, -1 - 1j, 0.5j])
        assert np.array_equal(awgn(x, 0.0, rng), x)

    def test_noise_variance(self):
        y = awgn(np.zeros(200000, dtype=complex), 0.5, np.random.default_rng(3))
        assert np.var(y.real) == pytest.approx(0.25, rel=0.01)
        assert np.var(y.imag) == pytest.approx(0.25, rel=0.01)

    def test_same_seed_same_noise(self):
        x = np.ones(10, dtype=complex)
        assert np.array_equal(awgn(x, 0.1, 42), awgn(x, 0.1, 42))

    def test_negative_noise(self):
        with pytest.raises(SimulationError):
            awgn(np.ones(2), -1.0)

    def test_ebn0_conversion(self):
        assert ebn0_to_n0(0.0, 0.5, 2) == pytest.approx(1.0)
        assert ebn0_to_n0(10.0, 0.8, 6) == pytest.approx(1.0 / 48.0)
        assert ebn0_to_n0(15.42, 0.8, 8) == pytest.approx(1.0 / (6.4 * 10**1.542))
        with pytest.raises(SimulationError):
            ebn0_to_n0(3.0, 0.0, 6)


class TestGridAndStopRule:
    def test_inclusive_grid(self):
        assert ebn0_grid(0.0, 1.0, 0.25) == [0.0, 0.25, 0.5, 0.75, 1.0]
        assert ebn0_grid(0.0, 0.3, 0.1) == [0.0, 0.1, 0.2, 0.3]
        assert ebn0_grid(2.0, 2.0, 1.0) == [2.0]

    def test_empty_grid(self):
        assert ebn0_grid(9.0, 8.0, 1.0) == []

    def test_step_must_be_positive(self):
        with pytest.raises(SimulationError):
            ebn0_grid(0.0, 1.0, 0.0)

    def test_stop_rule_needs_a_bound(self):
        with pytest.raises(SimulationError):
            StopRule(min_block_errors=10, max_trials=None, max_seconds=None)
        with pytest.raises(SimulationError):
            StopRule(max_trials=0)

    def test_stop_rule(self):
        rule = StopRule(min_block_errors=5, max_trials=100)
        assert not rule.reached(50, 4, 0.0)
        assert rule.reached(50, 5, 0.0)
        assert rule.reached(100, 0, 0.0)
        assert StopRule(None, None, 1.0).reached(1, 0, 2.0)

    def test_point_keys(self):
        assert point_key(6.5) == 6500
        assert point_key(-0.25) == -250

    def test_trial_streams_are_independent_of_order(self):
        a = trial_rng(7, 6500, 3).integers(0, 1 << 30, size=4)
        trial_rng(7, 6500, 2).integers(0, 10)
        b = trial_rng(7, 6500, 3).integers(0, 1 << 30, size=4)
        c = trial_rng(7, -6500, 3).integers(0, 1 << 30, size=4)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)


class TestSimulation:
    def test_clean_channel_has_no_errors(self, mlc_scheme):
        point = run_point(mlc_scheme, 30.0, StopRule(min_block_errors=1, max_trials=16), 1, chunk=8)
        assert point.trials == 16
        assert point.block_errors == 0
        assert point.bler == 0.0
        assert point.ber == 0.0
        assert point.level_errors == [0, 0]
        assert 1.0 <= point.avg_iterations <= 2.0

    def test_stop_rule_is_checked_between_chunks(self, mlc_scheme):
        point = run_point(mlc_scheme, -5.0, StopRule(min_block_errors=5, max_trials=100), 1, chunk=4)
        assert point.trials == 8
        assert point.block_errors == 8
        assert point.bit_errors > 0
        assert point.ber < 1.0

    def test_trial_cap_cuts_the_last_chunk(self, mlc_scheme):
        point = run_point(mlc_scheme, 30.0, StopRule(min_block_errors=1, max_trials=10), 1, chunk=4)
        assert point.trials == 10

    def test_chunk_must_be_positive(self, mlc_scheme):
        with pytest.raises(SimulationError):
            run_point(mlc_scheme, 5.0, StopRule(), 1, chunk=0)

    def test_chunks_add_up(self, mlc_scheme):
        N0 = ebn0_to_n0(2.0, mlc_scheme.rate, mlc_scheme.bits_per_symbol)
        whole = run_trials(mlc_scheme, N0, 5, 2000, 0, 6)
        point = SimPoint("x", 2.0, 5, mlc_scheme.info_bits)
        point.add(run_trials(mlc_scheme, N0, 5, 2000, 0, 2))
        point.add(run_trials(mlc_scheme, N0, 5, 2000, 2, 6))
        assert point.trials == whole["trials"] == 6
        assert point.block_errors == whole["block_errors"]
        assert point.bit_errors == whole["bit_errors"]
        assert point.level_errors == whole["level_errors"]

    def test_all_zero_and_genie_options(self, mlc_scheme):
        stop = StopRule(min_block_errors=None, max_trials=4)
        point = run_point(mlc_scheme, 30.0, stop, 2, chunk=4, all_zero=True, genie=True)
        assert point.trials == 4
        assert point.block_errors == 0

    def test_stop_on_one_level(self, mlc_scheme):
        stop = StopRule(min_block_errors=3, max_trials=100, level=1)
        point = run_point(mlc_scheme, -5.0, stop, 1, chunk=1, genie=True)
        assert point.level_errors[1] == 3
        assert point.trials == 3

    def test_counted_level_must_exist(self, mlc_scheme):
        with pytest.raises(SimulationError):
            run_point(mlc_scheme, 5.0, StopRule(level=2), 1)
        with pytest.raises(SimulationError):
            StopRule(level=-1)


class TestSweep:
    def test_worker_count_does_not_change_results(self, mlc_scheme, tmp_path):
        stop = StopRule(min_block_errors=3, max_trials=12)
        grid = [2.0, 4.0]
        sweep(mlc_scheme, grid, stop, 11, tmp_path / "one.csv", workers=1, chunk=4)
        sweep(mlc_scheme, grid, stop, 11, tmp_path / "eight.csv", workers=8, chunk=4)
        assert (tmp_path / "one.csv").read_bytes() == (tmp_path / "eight.csv").read_bytes()

    def test_split_grids_concatenate(self, mlc_scheme, tmp_path):
        stop = StopRule(min_block_errors=2, max_trials=8)
        sweep(mlc_scheme, [1.0, 3.0], stop, 4, tmp_path / "full.csv", chunk=4)
        sweep(mlc_scheme, [1.0], stop, 4, tmp_path / "low.csv", chunk=4)
        sweep(mlc_scheme, [3.0], stop, 4, tmp_path / "high.csv", chunk=4)
        full = (tmp_path / "full.csv").read_text().splitlines()
        low = (tmp_path / "low.csv").read_text().splitlines()
        high = (tmp_path / "high.csv").read_text().splitlines()
        assert full == low + high[1:]

    def test_empty_grid_writes_only_the_header(self, mlc_scheme, tmp_path):
        path = tmp_path / "curves" / "empty.csv"
        assert sweep(mlc_scheme, [], StopRule(), 1, path) == []
        assert path.read_text() == (
            "scheme,ebn0_db,trials,block_errors,bler,ber,avg_iters,level_errors,seed\n"
        )

    def test_csv_columns(self, mlc_scheme, tmp_path):
        path = tmp_path / "curve.csv"
        sweep(mlc_scheme, [-5.0], StopRule(min_block_errors=2, max_trials=8), 9, path, chunk=2)
        (row,) = read_rows(path)
        assert row["scheme"] == "qam64-gf16-mlc"
        assert float(row["ebn0_db"]) == -5.0
        assert int(row["trials"]) == 2
        assert float(row["bler"]) == 1.0
        assert row["seed"] == "9"
        assert len(row["level_errors"].split(";")) == 2


@pytest.mark.slow
class TestAcceptance:
    def test_uncoded_level_matches_the_floor_estimate(self, mlc_scheme):
        ebn0 = 2.7
        stop = StopRule(min_block_errors=None, max_trials=400)
        point = run_point(mlc_scheme, ebn0, stop, 21, chunk=20, genie=True)
        measured = point.level_errors[1] / point.trials
        estimate = error_floor_uncoded(mlc_scheme, ebn0)
        assert 0.5 * estimate < measured < 2.0 * estimate

    def test_genie_never_does_worse_on_the_top_level(self, mlc_scheme):
        stop = StopRule(min_block_errors=None, max_trials=200)
        plain = run_point(mlc_scheme, 1.0, stop, 8, chunk=20)
        genie = run_point(mlc_scheme, 1.0, stop, 8, chunk=20, genie=True)
        assert genie.level_errors[1] <= plain.level_errors[1]
        assert plain.level_errors[0] == genie.level_errors[0]
        assert not math.isnan(plain.ber)

    def test_qam256_floor_with_correct_lower_levels(self):
        s = preset_new("qam256-gf16-mlc", n_symbols=150, seed=1)
        low, high = 5.0, 30.0
        for _ in range(40):
            middle = (low + high) / 2
            if error_floor_uncoded(s, middle) > 1e-3:
                low = middle
            else:
                high = middle
        ebn0 = round(high, 3)
        estimate = error_floor_uncoded(s, ebn0)
        stop = StopRule(min_block_errors=50, max_trials=400000, level=1)
        point = run_point(s, ebn0, stop, 31, workers=os.cpu_count() or 1, chunk=200, genie=True)
        measured = point.level_errors[1] / point.trials
        assert point.level_errors[1] >= 50
        assert 0.5 * estimate < measured < 2.0 * estimate


def ebn0_at_bler(s, target, start, stop, step=0.25):
    """Eb/N0 where the BLER curve crosses `target`, interpolated in log BLER between grid points."""
    rule = StopRule(min_block_errors=100, max_trials=50000)
    previous = None
    for ebn0 in ebn0_grid(start, stop, step):
        point = run_point(s, ebn0, rule, 2016, workers=os.cpu_count() or 1, chunk=32)
        if point.bler <= target:
            if previous is None:
                pytest.fail(f"{s.name} is already below {target} at {ebn0} dB.")
            (x0, b0), b1 = previous, max(point.bler, 1e-9)
            fraction = (math.log10(b0) - math.log10(target)) / (math.log10(b0) - math.log10(b1))
            return x0 + fraction * (ebn0 - x0)
        previous = (ebn0, point.bler)
    pytest.fail(f"{s.name} never reached BLER {target} below {stop} dB.")


@pytest.mark.slow
def test_reduced_scale_performance_ordering():
    names = ["qam64-binary", "qam64-gf64", "qam64-gf16-mlc", "qam64-gf8-mlc"]
    crossing = {
        name: ebn0_at_bler(preset_new(name, n_symbols=200, seed=1), 1e-2, 8.0, 16.0) for name in names
    }
    assert crossing["qam64-gf64"] + 0.2 <= crossing["qam64-binary"]
    assert abs(crossing["qam64-gf16-mlc"] - crossing["qam64-gf64"]) <= 0.25
    assert crossing["qam64-gf8-mlc"] > max(crossing["qam64-gf64"], crossing["qam64-gf16-mlc"])
