#include <doctest.h>

#include <cmath>
#include <limits>

#include <jcpa/model.hpp>

#include "test_util.hpp"

using namespace jcpa;

namespace {

NetworkInstance single_pair(double gain, double noise, double p_max = 1.0) {
    NetworkInstance inst;
    inst.num_pairs = 1;
    inst.num_channels = 1;
    inst.gains = Ten3(1, 1, 1);
    inst.gains(0, 0, 0) = gain;
    inst.noise = {noise};
    inst.p_max = p_max;
    inst.weights = {1.0};
    inst.r_min_bits = {0.0};
    return inst;
}

}  // namespace

TEST_CASE("compute_sinr single-term arithmetic") {
    // |h|^2 = 4, p = 0.25, sigma^2 = 1 -> SINR = 1
    NetworkInstance inst = single_pair(2.0, 1.0);
    PowerAllocation p;
    p.p = Mat(1, 1);
    p.p(0, 0) = 0.25;
    CHECK(compute_sinr(inst, p)(0, 0) == doctest::Approx(1.0).epsilon(1e-12));

    p.p(0, 0) = 0.0;
    CHECK(compute_sinr(inst, p)(0, 0) == 0.0);
}

TEST_CASE("compute_sinr two-user interference") {
    NetworkInstance inst;
    inst.num_pairs = 2;
    inst.num_channels = 1;
    inst.gains = Ten3(2, 2, 1, 1.0);  // |h|^2 = 1 everywhere
    inst.noise = {1.0, 1.0};
    inst.p_max = 1.0;
    inst.weights = {1.0, 1.0};
    inst.r_min_bits = {0.0, 0.0};
    PowerAllocation p;
    p.p = Mat(2, 1, 1.0);
    CHECK(compute_sinr(inst, p)(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("compute_sinr rejects bad input") {
    NetworkInstance inst = single_pair(1.0, 1.0);
    PowerAllocation p;
    p.p = Mat(2, 1, 0.1);
    CHECK_THROWS_AS(compute_sinr(inst, p), Error);
    p.p = Mat(1, 1);
    p.p(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(compute_sinr(inst, p), Error);
}

TEST_CASE("compute_rates log2 values") {
    // SINR 1 -> 1 bit, SINR 3 -> 2 bits, p = 0 -> 0 bits.
    NetworkInstance inst = single_pair(1.0, 1.0);
    PowerAllocation p;
    p.p = Mat(1, 1);
    p.p(0, 0) = 1.0;
    CHECK(compute_rates(inst, p)(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    p.p(0, 0) = 3.0;
    inst.p_max = 4.0;
    CHECK(compute_rates(inst, p)(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
    p.p(0, 0) = 0.0;
    CHECK(compute_rates(inst, p)(0, 0) == 0.0);
}

TEST_CASE("sum_weighted_rate sums and weights") {
    NetworkInstance inst;
    inst.num_pairs = 1;
    inst.num_channels = 2;
    inst.gains = Ten3(1, 1, 2);
    inst.gains(0, 0, 0) = 1.0;  // p=1, sigma=1 -> SINR 1 -> 1 bit
    inst.gains(0, 0, 1) = std::sqrt(3.0);  // p=1 -> SINR 3 -> 2 bits
    inst.noise = {1.0};
    inst.p_max = 2.0;
    inst.weights = {1.0};
    inst.r_min_bits = {0.0};
    PowerAllocation p;
    p.p = Mat(1, 2, 1.0);
    CHECK(sum_weighted_rate(inst, p) == doctest::Approx(3.0).epsilon(1e-12));

    SUBCASE("zero power gives zero rate") {
        p.p = Mat(1, 2, 0.0);
        CHECK(sum_weighted_rate(inst, p) == 0.0);
    }
    SUBCASE("weights scale the sum") {
        inst.weights = {2.0};
        inst.gains(0, 0, 1) = 0.0;
        inst.gains(0, 0, 0) = std::sqrt(std::exp2(1.5) - 1.0);  // rate 1.5 bits at p=1
        p.p = Mat(1, 2, 0.0);
        p.p(0, 0) = 1.0;
        CHECK(sum_weighted_rate(inst, p) == doctest::Approx(3.0).epsilon(1e-12));
    }
}

TEST_CASE("assignment_from_power thresholding") {
    PowerAllocation p;
    p.p = Mat(1, 3);
    p.p(0, 0) = 0.0;
    p.p(0, 1) = 0.3;
    p.p(0, 2) = 1e-15;
    const ChannelAssignment a = assignment_from_power(p, 1e-12);
    CHECK(a.c(0, 0) == 0.0);
    CHECK(a.c(0, 1) == 1.0);
    CHECK(a.c(0, 2) == 0.0);
}

TEST_CASE("constraint_residuals slack bookkeeping") {
    NetworkInstance inst = single_pair(1.0, 1.0);
    PowerAllocation p;
    p.p = Mat(1, 1);
    p.p(0, 0) = 1.0;  // exactly P_max -> slack 0, rate = 1 bit
    inst.r_min_bits = {0.5};
    const ConstraintResidual res = constraint_residuals(inst, p);
    CHECK(res.power_slack[0] == doctest::Approx(0.0));
    CHECK(res.rate_slack_bits[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(res.worst_violation_bits == 0.0);
    CHECK(res.feasible(inst.p_max));

    inst.r_min_bits = {2.5};
    const ConstraintResidual bad = constraint_residuals(inst, p);
    CHECK(bad.worst_violation_bits == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(!bad.feasible(inst.p_max));
}

TEST_CASE("equivalence: derived assignment preserves constraints and rate") {
    // For feasible p, (assignment_from_power(p), p) satisfies the explicit
    // formulation's constraints and yields the identical weighted sum rate.
    Rng rng(20240817);
    for (int trial = 0; trial < 200; ++trial) {
        const int d = 1 + static_cast<int>(rng.below(4));
        const int mc = 1 + static_cast<int>(rng.below(3));
        NetworkInstance inst = test::random_instance(rng, d, mc);
        PowerAllocation p = test::random_feasible_power(rng, inst);
        // Make the QoS side feasible by construction.
        const Mat rates = compute_rates(inst, p);
        for (int i = 0; i < d; ++i) {
            double total = 0.0;
            for (int m = 0; m < mc; ++m) total += rates(i, m);
            inst.r_min_bits[i] = total * rng.uniform();
        }
        const ChannelAssignment c = assignment_from_power(p);
        for (auto v : c.c.raw()) CHECK((v == 0.0 || v == 1.0));
        // Power budget with the assignment in place: sum_m c p <= P_max.
        for (int i = 0; i < d; ++i) {
            double total = 0.0;
            for (int m = 0; m < mc; ++m) total += c.c(i, m) * p.p(i, m);
            CHECK(total <= inst.p_max * (1.0 + kPowerSlackRel));
        }
        const Mat with_c = compute_rates_with_assignment(inst, c, p);
        double sum_with = 0.0, sum_without = 0.0;
        for (int i = 0; i < d; ++i) {
            double user = 0.0;
            for (int m = 0; m < mc; ++m) {
                sum_with += inst.weights[i] * with_c(i, m);
                sum_without += inst.weights[i] * rates(i, m);
                user += with_c(i, m);
            }
            CHECK(user >= inst.r_min_bits[i] - kRateSlackBits);
        }
        CHECK(sum_with == doctest::Approx(sum_without).epsilon(1e-12));
    }
}

TEST_CASE("property: SINR monotone nonincreasing in interference gain") {
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        NetworkInstance inst = test::random_instance(rng, 3, 2);
        PowerAllocation p = test::random_feasible_power(rng, inst, 0.0);
        const Mat before = compute_sinr(inst, p);
        const int i = static_cast<int>(rng.below(3));
        int j = static_cast<int>(rng.below(3));
        if (j == i) j = (j + 1) % 3;
        const int m = static_cast<int>(rng.below(2));
        inst.gains(i, j, m) *= 1.0 + rng.uniform();
        const Mat after = compute_sinr(inst, p);
        CHECK(after(i, m) <= before(i, m) + 1e-15);
    }
}

TEST_CASE("property: SINR invariant under common power/noise scaling") {
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        NetworkInstance inst = test::random_instance(rng, 3, 2);
        PowerAllocation p = test::random_feasible_power(rng, inst, 0.0);
        const Mat before = compute_sinr(inst, p);
        const double t = rng.uniform(0.1, 10.0);
        for (auto& x : p.p.raw()) x *= t;
        for (auto& s : inst.noise) s *= t;
        inst.p_max *= t;
        const Mat after = compute_sinr(inst, p);
        for (int i = 0; i < 3; ++i)
            for (int m = 0; m < 2; ++m)
                CHECK(after(i, m) == doctest::Approx(before(i, m)).epsilon(1e-12));
    }
}

TEST_CASE("property: rates and SINRs finite and nonnegative") {
    Rng rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        NetworkInstance inst = test::random_instance(rng, 4, 3);
        PowerAllocation p = test::random_feasible_power(rng, inst);
        const Mat sinr = compute_sinr(inst, p);
        const Mat rates = compute_rates(inst, p);
        for (auto v : sinr.raw()) {
            CHECK(std::isfinite(v));
            CHECK(v >= 0.0);
        }
        for (auto v : rates.raw()) {
            CHECK(std::isfinite(v));
            CHECK(v >= 0.0);
        }
    }
}
