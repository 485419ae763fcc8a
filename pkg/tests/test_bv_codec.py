import math

import numpy as np
import pytest

from bventropy.bv_codec import (
    BitReader,
    BitWriter,
    Codeword,
    Net,
    QuantizerGrid,
    RealInterval,
    adaptive_coarsen,
    bv_budget_bits,
    choose_params,
    decode,
    encode_bv,
    encode_bvpsi,
    euclidean_budget_bits,
    jump_profile,
    net_from_token,
    power_budget_bits,
    quantize,
    read_codeword,
    rho_sharp,
    upper_bound_bits,
    write_codeword,
)
from bventropy.errors import BudgetViolation, CorruptStream, EpsilonTooLarge, NetIncomplete
from bventropy.gauge_variation import Gauge, StepFunction, l1_distance, tv, tv_psi

from conftest import random_step_function

LOG2_5E = math.log2(5 * math.e)


class TestChooseParams:
    def test_example(self):
        assert choose_params(1.0, 1.0, 0.5) == (5, 0.25)

    def test_error_split(self):
        N1, h2 = choose_params(1.0, 1.0, 0.5)
        assert 1.0 / (2 * N1) + h2 == pytest.approx(0.35)
        assert 1.0 / (2 * N1) + h2 < 0.5

    def test_h2_floor(self):
        N1, h2 = choose_params(2.0, 1.0, 1.0)
        assert (N1, h2) == (5, 0.25)
        assert h2 >= 1.0 / (2 * 2.0)

    def test_epsilon_too_large(self):
        with pytest.raises(EpsilonTooLarge):
            choose_params(1.0, 1.0, 0.6)


class TestRhoSharp:
    def test_equal(self):
        assert rho_sharp(0.3, 0.3, 0.1) == 0

    def test_fractional(self):
        # distance ratio 2.5 lands in (2, 3]
        assert rho_sharp(0.0, 0.25, 0.1) == 3

    def test_boundary_inclusive(self):
        # ratio exactly 3 stays in (2, 3]
        assert rho_sharp(0.0, 0.3, 0.1) == 3

    def test_minimum_one(self):
        assert rho_sharp(0.0, 1e-12, 0.1) == 1


class TestNetAndQuantize:
    def test_uniform_net_covers(self):
        net = Net.uniform(RealInterval(0.0, 1.0), 0.1)
        xs = np.linspace(0, 1, 101)
        for x in xs:
            _, d = net.nearest(x)
            assert d <= 0.1 + 1e-12

    def test_constant_at_center_is_exact(self):
        net = Net.uniform(RealInterval(0.0, 1.0), 0.25)
        grid = QuantizerGrid(1.0, 4)
        f = StepFunction.constant(1.0, float(net.centers[0]))
        fs = quantize(f, grid, net)
        assert np.all(fs.values == net.centers[0])

    def test_tie_goes_to_lower_index(self):
        net = Net.uniform(RealInterval(0.0, 1.0), 0.25)
        # boundary between centers 0.25 and 0.75 is at 0.5: both at distance 0.25
        pos, d = net.nearest(0.5)
        assert pos == 0 and d == pytest.approx(0.25)

    def test_net_incomplete(self):
        net = Net.uniform(RealInterval(0.0, 1.0), 0.05)
        grid = QuantizerGrid(1.0, 4)
        f = StepFunction.constant(1.0, 5.0)   # far outside the interval
        with pytest.raises(NetIncomplete):
            quantize(f, grid, net)

    def test_jump_snaps_to_boundary(self):
        net = Net.uniform(RealInterval(0.0, 1.0), 0.05)
        grid = QuantizerGrid(1.0, 4)
        f = StepFunction(np.array([0.0, 0.6, 1.0]), np.array([0.05, 0.95]))
        fs = quantize(f, grid, net)
        # jump inside a cell moves to a cell edge; error bounded by h1 * jump
        assert l1_distance(fs, f) <= grid.h1 * 0.9 + f.L * net.h2 + 1e-12


class TestJumpProfile:
    def test_constant(self):
        fs = StepFunction(np.linspace(0, 1, 4), np.array([0.5, 0.5, 0.5]))
        assert list(jump_profile(fs, 0.1)) == [0, 0, 1]

    def test_single_unit_jump(self):
        fs = StepFunction(np.linspace(0, 1, 4), np.array([0.5, 0.6, 0.6]))
        assert list(jump_profile(fs, 0.1)) == [0, 1, 2]

    def test_single_piece(self):
        fs = StepFunction(np.array([0.0, 1.0]), np.array([0.5]))
        assert list(jump_profile(fs, 0.1)) == [0]


class TestBitstream:
    def test_writer_reader_round_trip(self):
        w = BitWriter()
        w.write(5, 4)
        w.write_gamma(1)
        w.write_gamma(7)
        w.write(0, 3)
        r = BitReader(w.to_bytes(), w.bit_length)
        assert r.read(4) == 5
        assert r.read_gamma() == 1
        assert r.read_gamma() == 7
        assert r.read(3) == 0
        assert r.exhausted

    def test_truncation_detected(self):
        w = BitWriter()
        w.write(3, 8)
        r = BitReader(w.to_bytes(), w.bit_length)
        r.read(4)
        with pytest.raises(CorruptStream):
            r.read(5)

    def test_gamma_rejects_zero(self):
        with pytest.raises(ValueError):
            BitWriter().write_gamma(0)


class TestEncodeBv:
    def test_constant_function(self):
        f = StepFunction.constant(1.0, 0.4)
        cw = encode_bv(f, 1.0, 0.2, value_space=RealInterval(0, 1))
        net = net_from_token(cw.net_token, cw.h2)
        dec = decode(cw, net)
        assert l1_distance(dec, f) <= 0.2

    def test_budget_violation(self):
        f = StepFunction(np.array([0, 0.5, 1.0]), np.array([0.0, 1.0]))
        with pytest.raises(BudgetViolation):
            encode_bv(f, 0.5, 0.1)

    def test_round_trip_ensemble(self, rng):
        interval = RealInterval(0.0, 1.0)
        for _ in range(40):
            f = random_step_function(rng)
            V = max(tv(f), 0.5)
            eps = 0.15
            cw = encode_bv(f, V, eps, value_space=interval)
            net = net_from_token(cw.net_token, cw.h2)
            dec = decode(cw, net)
            assert l1_distance(dec, f) <= eps
            # decoding is lossless on the snapped function
            grid = cw.grid()
            fs = quantize(f, grid, net)
            assert np.array_equal(dec.values, fs.values)

    def test_bits_within_budget(self, rng):
        interval = RealInterval(0.0, 1.0)
        for _ in range(25):
            f = random_step_function(rng)
            V = max(tv(f), 1.0)
            eps = 0.1
            cw = encode_bv(f, V, eps, value_space=interval)
            H = interval.entropy_bits(eps / 2.0)
            assert cw.bit_length <= bv_budget_bits(1.0, V, eps, 1, H)

    def test_file_round_trip(self, tmp_path):
        f = StepFunction(np.array([0, 0.4, 1.0]), np.array([0.2, 0.8]))
        cw = encode_bv(f, 1.0, 0.2, value_space=RealInterval(0, 1))
        path = tmp_path / "c.bvc"
        write_codeword(cw, path)
        back = read_codeword(path)
        assert back.bit_length == cw.bit_length
        assert back.payload[: (cw.bit_length + 7) // 8] == cw.payload
        net = net_from_token(back.net_token, back.h2)
        assert np.array_equal(decode(back, net).values,
                              decode(cw, net).values)

    def test_magic_check(self, tmp_path):
        path = tmp_path / "bad.bvc"
        path.write_bytes(b"NOPE" + b"\0" * 40)
        with pytest.raises(CorruptStream):
            read_codeword(path)

    def test_corrupt_rank(self):
        f = StepFunction(np.array([0, 0.5, 1.0]), np.array([0.2, 0.8]))
        cw = encode_bv(f, 1.0, 0.2, value_space=RealInterval(0, 1))
        net = net_from_token(cw.net_token, cw.h2)
        bad = Codeword(cw.L, cw.N1, cw.h2, cw.net_token, cw.gauge_token,
                       cw.payload, max(cw.bit_length - 3, 1))
        with pytest.raises(CorruptStream):
            decode(bad, net)


class TestAdaptiveCoarsen:
    def test_fixed_point(self):
        f = StepFunction(np.array([0, 0.5, 1.0]), np.array([0.0, 1.0]))
        fh, cert = adaptive_coarsen(f, 0.5, Gauge.identity(), tv(f))
        assert np.array_equal(fh.values, f.values)
        assert cert.l1_error == 0.0

    def test_flattens_below_tolerance(self):
        f = StepFunction(np.array([0, 0.5, 1.0]), np.array([0.0, 1.0]))
        fh, cert = adaptive_coarsen(f, 2.0, Gauge.identity(), 1.0)
        assert fh.k == 1 and fh.values[0] == 0.0
        assert cert.l1_error == pytest.approx(0.5)
        assert cert.l1_error <= f.L * 2.0

    def test_constant(self):
        f = StepFunction.constant(1.0, 0.7)
        fh, cert = adaptive_coarsen(f, 0.1, Gauge.power(2), 1.0)
        assert fh.k == 1 and cert.cells == 1

    def test_certificate_bounds(self, rng):
        g = Gauge.power(2)
        for _ in range(25):
            f = random_step_function(rng)
            V = max(tv_psi(f, g), 0.1)
            h = float(rng.uniform(0.05, 0.5))
            fh, cert = adaptive_coarsen(f, h, g, V)
            assert cert.cells - 1 <= V / float(g(h)) + 1e-9
            assert tv(fh) <= cert.V_h * (1 + 1e-9) + 1e-12
            assert l1_distance(fh, f) <= f.L * h * (1 + 1e-9)


class TestEncodeBvPsi:
    def test_admissible_range(self):
        # psi = s^2, L = V = 1: cap is 2 sqrt(1/4) = 1
        f = StepFunction.constant(1.0, 0.5)
        with pytest.raises(EpsilonTooLarge):
            encode_bvpsi(f, Gauge.power(2), 1.0, 1.5)

    def test_round_trip(self, rng):
        g = Gauge.power(2)
        interval = RealInterval(0.0, 1.0)
        for _ in range(25):
            f = random_step_function(rng)
            V = max(tv_psi(f, g), 0.25)
            eps = 0.25
            cw = encode_bvpsi(f, g, V, eps, value_space=interval)
            net = net_from_token(cw.net_token, cw.h2)
            assert l1_distance(decode(cw, net), f) <= eps

    def test_bits_within_m1(self, rng):
        g = Gauge.power(2)
        interval = RealInterval(0.0, 1.0)
        for _ in range(15):
            f = random_step_function(rng)
            if tv_psi(f, g) > 1.0:
                continue
            eps = 0.2
            cw = encode_bvpsi(f, g, 1.0, eps, value_space=interval)
            H = interval.entropy_bits(eps / 4.0)
            assert cw.bit_length <= upper_bound_bits(1.0, 1.0, eps, g, 1, H)


class TestBudgetEvaluators:
    def test_plain_bv_formula(self):
        # L = V = 1, eps = 0.5, d = 1, H = 1: [3d + log2(5e)] 2LV/eps + H
        v = bv_budget_bits(1.0, 1.0, 0.5, 1, 1.0)
        assert v == pytest.approx((3 + LOG2_5E) * 4 + 1)

    def test_m1_formula(self):
        # psi = id, L = V = 1, eps = 0.5, d = 1, H = 1
        v = upper_bound_bits(1.0, 1.0, 0.5, Gauge.identity(), 1, 1.0)
        assert v == pytest.approx((3 + LOG2_5E) * 2 / 0.25 + 1)

    def test_m2_formula(self):
        v = power_budget_bits(1.0, 1.0, 1.0, 0.5, 1, 1.0)
        assert v == pytest.approx(4 * (3 + LOG2_5E) * 2 + math.log2(17))

    def test_vanishing_variation_limit(self):
        small = upper_bound_bits(1.0, 1e-12, 0.5, Gauge.identity(), 1, 1.0)
        assert small == pytest.approx(1.0, abs=1e-9)

    def test_m3_formula(self):
        v = euclidean_budget_bits(1.0, 1.0, 1.0, 0.5, Gauge.identity(), 2)
        expect = (6 * math.log2(5) + LOG2_5E) * 2 / 0.25 + 2 * math.log2(17)
        assert v == pytest.approx(expect)
