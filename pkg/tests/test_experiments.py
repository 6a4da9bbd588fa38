import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maskbench.experiments import (
    DEMO_STATES,
    Direction,
    SweepConfig,
    bob_marginal,
    channel_curve,
    fig3_config,
    meridian_trace_distance,
    reference_state,
    run_channel_protection,
    run_demo_fig2,
    run_sweep_fig3,
    sample_counts,
    shift_grid,
    shifted_state,
    sweep_csv,
)
from maskbench.qcore import DensityMatrix, random_density, trace_distance

from conftest import ket, proj


class TestDemo:
    def test_marginals_identical(self):
        report = run_demo_fig2()
        assert report["max_marginal_trace_distance"] <= 1e-12
        assert report["min_round_trip_fidelity"] >= 1 - 1e-12
        assert report["max_marginal_error"] <= 1e-12

    def test_expected_marginal(self):
        report = run_demo_fig2()
        assert report["expected_marginal_diag"][0] == pytest.approx((1 + 1 / math.sqrt(3)) / 2, abs=1e-15)

    def test_all_states_on_disk(self):
        report = run_demo_fig2()
        assert set(report["states"]) == set(DEMO_STATES)
        assert all(s["on_disk"] for s in report["states"].values())

    def test_bipartite_rho1(self):
        m = np.array(run_demo_fig2()["bipartite"]["rho1"]["re"])
        c2 = (1 + 1 / math.sqrt(3)) / 2
        # |0> -> cos|00> + sin|11>: support only on 00 and 11
        assert m[0, 0] == pytest.approx(c2, abs=1e-12)
        assert m[3, 3] == pytest.approx(1 - c2, abs=1e-12)
        assert m[1, 1] == pytest.approx(0, abs=1e-15)


class TestSweepClosedForm:
    def test_example_value(self):
        assert meridian_trace_distance(0.0, math.radians(30)) == pytest.approx(0.0669873, abs=1e-7)
        assert (1 - math.cos(math.radians(30))) / 2 == pytest.approx(0.0669873, abs=1e-7)

    def test_bob_marginal_is_diagonal_populations(self):
        phi = 0.9
        rb = bob_marginal(reference_state(phi))
        assert rb.allclose(np.diag([math.sin(phi / 2) ** 2, math.cos(phi / 2) ** 2]), atol=1e-15)

    def test_meridian_grid(self):
        for r in run_sweep_fig3(fig3_config(Direction.MERIDIAN)):
            assert r.trace_distance == pytest.approx(meridian_trace_distance(r.phi, r.shift), abs=1e-10)

    def test_parallel_grid(self):
        recs = run_sweep_fig3(fig3_config(Direction.PARALLEL))
        assert len(recs) == 3 * 41
        assert max(r.trace_distance for r in recs) <= 1e-12

    def test_parallel_state_changes(self):
        a = shifted_state(0.6, 0.5, "parallel")
        assert abs(np.vdot(a, reference_state(0.6))) < 1 - 1e-3

    @settings(max_examples=100, deadline=None)
    @given(st.floats(-math.pi, math.pi), st.floats(-3.0, 3.0))
    def test_meridian_property(self, phi, shift):
        rb = bob_marginal(shifted_state(phi, shift, "meridian"))
        ref = bob_marginal(reference_state(phi))
        assert trace_distance(rb, ref) == pytest.approx(meridian_trace_distance(phi, shift), abs=1e-10)

    def test_grid(self):
        g = shift_grid(40, 2)
        assert len(g) == 41 and g[0] == -40 and g[-1] == 40 and g[20] == 0

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SweepConfig([0.0], [math.pi], "meridian")
        with pytest.raises(ValueError):
            SweepConfig([0.0], [0.1], "meridian", shots=10)
        with pytest.raises(ValueError):
            SweepConfig([0.0], [0.1], "sideways")


class TestSampling:
    def test_counts_sum(self):
        plus, minus = sample_counts(DensityMatrix(np.diag([0.3, 0.7])), "z", 1000, 1)
        assert plus + minus == 1000

    def test_deterministic_outcomes(self):
        assert sample_counts(DensityMatrix(proj([1, 0])), "z", 500, 0) == (500, 0)
        assert sample_counts(DensityMatrix(proj(ket(1, 1))), "x", 500, 0) == (500, 0)
        assert sample_counts(DensityMatrix(proj(ket(1, -1j))), "y", 500, 0) == (0, 500)

    def test_mean(self):
        plus, _ = sample_counts(DensityMatrix(np.diag([0.3, 0.7])), "z", 100_000, 3)
        assert abs(plus / 1e5 - 0.3) < 5 * math.sqrt(0.21 / 1e5)

    def test_reproducible(self):
        rho = DensityMatrix(np.eye(2) / 2)
        assert sample_counts(rho, "x", 1000, 7) == sample_counts(rho, "x", 1000, 7)

    def test_sampled_sweep_within_three_sigma(self):
        cfg = fig3_config(Direction.MERIDIAN, shots=100_000)
        inside = [
            abs(r.trace_distance - meridian_trace_distance(r.phi, r.shift)) <= 3 * r.std_error + 1e-15
            for seed in range(10)
            for r in run_sweep_fig3(cfg, seed)
        ]
        assert np.mean(inside) >= 0.99

    def test_sampled_sweep_seeded(self):
        cfg = fig3_config(Direction.MERIDIAN, shots=1000)
        assert run_sweep_fig3(cfg, 4) == run_sweep_fig3(cfg, 4)
        assert run_sweep_fig3(cfg, 4) != run_sweep_fig3(cfg, 5)


class TestCSV:
    def test_layout(self):
        recs = run_sweep_fig3(SweepConfig([0.0], [-0.1, 0.0, 0.1]))
        text = sweep_csv(recs, "grid: test")
        lines = text.splitlines()
        assert lines[0].startswith("# phi_deg [deg]")
        assert lines[1] == "# grid: test"
        rows = list(csv.DictReader(io.StringIO("\n".join(lines[2:]))))
        assert len(rows) == 3
        assert rows[1]["shift_deg"] == "0.0" and rows[1]["std_error"] == ""
        assert float(rows[2]["trace_distance"]) == recs[2].trace_distance


class TestChannel:
    def test_diagonal_state_at_quarter_pi(self):
        out = run_channel_protection(DensityMatrix(proj(ket(1, 1))), math.pi / 4)
        assert out["unprotected_fidelity"] == pytest.approx(0.5, abs=1e-12)
        assert out["recovered_fidelity"] >= 1 - 1e-12

    def test_zero_time(self, rng):
        rho = random_density(2, rng)
        out = run_channel_protection(rho, 0.0)
        assert out["unprotected_fidelity"] == pytest.approx(1, abs=1e-12)

    def test_random_recovery(self, rng):
        for _ in range(100):
            rho = random_density(2, rng)
            out = run_channel_protection(rho, rng.uniform(0, 2 * math.pi))
            assert out["recovered_fidelity"] >= 1 - 1e-12
            assert DensityMatrix.from_json(out["recovered_state"]).allclose(rho.mat, atol=1e-12)

    def test_bare_channel_closed_form(self):
        # |D> picks up relative phase 2t: F = cos^2(t)
        rho = DensityMatrix(proj(ket(1, 1)))
        for t in np.linspace(0, math.pi, 7):
            assert run_channel_protection(rho, t)["unprotected_fidelity"] == pytest.approx(math.cos(t) ** 2, abs=1e-12)

    def test_curve(self):
        curve = channel_curve(DensityMatrix(proj([1, 0])), [0.0, 1.0])
        assert [c["t"] for c in curve] == [0.0, 1.0]
