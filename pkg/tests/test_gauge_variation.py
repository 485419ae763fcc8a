import numpy as np
import pytest

from bventropy.errors import DomainMismatch, NotConvex, NotPositive, NotVanishingAtZero
from bventropy.gauge_variation import (
    Gauge,
    StepFunction,
    gauge_check,
    l1_distance,
    read_step,
    right_continuous,
    sample_sequence_variation,
    tv,
    tv_psi,
    tv_psi_chain,
    write_step,
)
from bventropy.metric_core import line_points

from conftest import oracle_tv_psi, random_step_function


class TestGauge:
    def test_identity_admissible(self):
        assert gauge_check(Gauge.identity(), np.linspace(0, 2, 9)).ok

    def test_power_admissible(self):
        assert gauge_check(Gauge.power(2), np.linspace(0, 2, 9)).ok

    def test_tabulated_not_convex(self):
        g = Gauge.tabulated([0, 1, 2], [0, 1, 1.5])
        with pytest.raises(NotConvex):
            gauge_check(g, [0.0, 1.0, 2.0])

    def test_not_vanishing(self):
        g = Gauge.tabulated([0, 1, 2], [0.5, 1, 2])
        with pytest.raises(NotVanishingAtZero):
            gauge_check(g, [0.0, 1.0, 2.0])

    def test_not_positive(self):
        g = Gauge.tabulated([0, 1, 2], [0, 0, 1])
        with pytest.raises(NotPositive):
            gauge_check(g, [0.0, 1.0, 2.0])

    def test_inverse_round_trip(self):
        for g in (Gauge.identity(), Gauge.power(2), Gauge.power(3),
                  Gauge.tabulated([0, 0.5, 1, 2], [0, 0.2, 0.7, 2.2])):
            for v in (0.05, 0.3, 1.1):
                assert float(g(g.inv(v))) == pytest.approx(v, rel=1e-8)

    def test_tabulated_extrapolation_linear(self):
        g = Gauge.tabulated([0, 1, 2], [0, 1, 3])
        assert float(g(3.0)) == pytest.approx(5.0)

    def test_scaling_inequality(self):
        # psi(s) <= (s/t) psi(t) for s < t follows from convexity + psi(0)=0
        g = Gauge.power(2)
        for s, t in [(0.2, 0.9), (0.5, 2.0)]:
            assert float(g(s)) <= s / t * float(g(t)) + 1e-12

    def test_parse_tokens(self):
        assert Gauge.parse("id").kind == "identity"
        assert Gauge.parse("pow:2").gamma == 2.0
        with pytest.raises(ValueError):
            Gauge.parse("nope")


class TestStepFunction:
    def test_validation(self):
        with pytest.raises(ValueError):
            StepFunction(np.array([0.0, 0.5, 0.4, 1.0]), np.array([1.0, 2.0, 3.0]))
        with pytest.raises(ValueError):
            StepFunction(np.array([0.1, 1.0]), np.array([1.0]))

    def test_value_at_right_continuous(self):
        f = StepFunction(np.array([0, 0.5, 1.0]), np.array([1.0, 2.0]))
        assert f.value_at(0.5) == 2.0
        assert f.value_at(0.49) == 1.0
        assert f.value_at(1.0) == 2.0

    def test_file_round_trip(self, tmp_path):
        f = StepFunction(np.array([0, 0.25, 1.0]), np.array([0.5, -1.0]))
        path = tmp_path / "f.step"
        write_step(f, path)
        g = read_step(path)
        assert np.array_equal(f.breakpoints, g.breakpoints)
        assert np.array_equal(f.values, g.values)

    def test_restrict(self):
        f = StepFunction(np.array([0, 0.3, 0.6, 1.0]), np.array([1.0, 2.0, 3.0]))
        r = f.restrict(0.6)
        assert r.L == 0.6 and r.k == 2


class TestVariation:
    def test_tv_constant(self):
        assert tv(StepFunction.constant(1.0, 0.5)) == 0.0

    def test_tv_zigzag(self):
        f = StepFunction(np.array([0, 0.3, 0.6, 1.0]), np.array([0.0, 1.0, 0.0]))
        assert tv(f) == 2.0

    def test_tv_monotone(self):
        f = StepFunction(np.array([0, 0.3, 0.6, 1.0]), np.array([0.0, 1.0, 2.0]))
        assert tv(f) == 2.0

    def test_tv_psi_identity_reduces_to_tv(self, rng):
        for _ in range(30):
            f = random_step_function(rng)
            assert tv_psi(f, Gauge.identity()) == pytest.approx(tv(f), rel=1e-12)

    def test_tv_psi_square_chain_beats_steps(self):
        f = StepFunction(np.array([0, 0.3, 0.6, 1.0]), np.array([0.0, 1.0, 2.0]))
        assert tv_psi(f, Gauge.power(2)) == 4.0

    def test_tv_psi_square_zigzag(self):
        f = StepFunction(np.array([0, 0.3, 0.6, 1.0]), np.array([0.0, 1.0, 0.0]))
        assert tv_psi(f, Gauge.power(2)) == 2.0

    def test_oracle_equivalence(self, rng):
        gauges = [Gauge.identity(), Gauge.power(2),
                  Gauge.tabulated([0, 0.5, 1, 2], [0, 0.3, 1.0, 3.0])]
        for _ in range(25):
            space = line_points(int(rng.integers(3, 8)),
                                float(rng.uniform(0.5, 2.0)))
            f = random_step_function(rng, max_pieces=8, space=space)
            for g in gauges:
                assert tv_psi(f, g) == pytest.approx(oracle_tv_psi(f, g), rel=1e-12)

    def test_gauge_monotonicity(self, rng):
        # psi1 <= psi2 pointwise implies tv_psi1 <= tv_psi2
        g1, g2 = Gauge.power(2), Gauge.identity()   # s^2 <= s on [0,1]
        for _ in range(20):
            f = random_step_function(rng, lo=0.0, hi=1.0)
            assert tv_psi(f, g1) <= tv_psi(f, g2) + 1e-12

    def test_restriction_monotonicity(self, rng):
        g = Gauge.power(2)
        for _ in range(20):
            f = random_step_function(rng, max_pieces=8)
            if f.k < 2:
                continue
            b = float(f.breakpoints[f.k // 2 + 1])
            assert tv_psi(f.restrict(b), g) <= tv_psi(f, g) + 1e-12

    def test_chain_witness(self):
        f = StepFunction(np.array([0, 0.3, 0.6, 1.0]), np.array([0.0, 1.0, 2.0]))
        val, chain = tv_psi_chain(f, Gauge.power(2))
        assert val == 4.0 and chain == [0, 2]


class TestRightContinuous:
    def test_fixed_point(self):
        f = right_continuous([0, 0.5, 1.0], [1.0, 2.0])
        assert f.k == 2

    def test_merges_equal_values(self):
        f = right_continuous([0, 0.3, 0.6, 1.0], [1.0, 1.0, 2.0])
        assert f.k == 2 and f.breakpoints[1] == 0.6

    def test_discards_point_values(self):
        f = right_continuous([0, 0.5, 1.0], [1.0, 2.0], point_values={0.5: 9.0})
        assert 9.0 not in f.values

    def test_variation_not_increased(self):
        # a deviating sample point can only add variation; the representative
        # drops it
        g = Gauge.power(2)
        f = right_continuous([0, 0.5, 1.0], [1.0, 1.0], point_values={0.5: 3.0})
        seq = sample_sequence_variation([1.0, 3.0, 1.0], g)
        assert tv_psi(f, g) <= seq


class TestL1Distance:
    def test_zero(self):
        f = StepFunction(np.array([0, 1.0]), np.array([0.3]))
        assert l1_distance(f, f) == 0.0

    def test_constants(self):
        f = StepFunction.constant(2.0, 0.0)
        g = StepFunction.constant(2.0, 1.0)
        assert l1_distance(f, g) == 2.0

    def test_shifted_indicators(self):
        f = StepFunction(np.array([0, 0.5, 1.0]), np.array([1.0, 0.0]))
        g = StepFunction(np.array([0, 0.25, 0.75, 1.0]), np.array([0.0, 1.0, 0.0]))
        assert l1_distance(f, g) == pytest.approx(0.5)

    def test_domain_mismatch(self):
        f = StepFunction.constant(1.0, 0.0)
        g = StepFunction.constant(2.0, 0.0)
        with pytest.raises(DomainMismatch):
            l1_distance(f, g)
