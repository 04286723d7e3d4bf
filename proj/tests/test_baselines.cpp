#include <doctest.h>

#include <jcpa/baselines.hpp>

#include "test_util.hpp"

using namespace jcpa;

TEST_CASE("heuristic_max_gain picks the strongest channel") {
    NetworkInstance inst;
    inst.num_pairs = 1;
    inst.num_channels = 2;
    inst.gains = Ten3(1, 1, 2);
    inst.gains(0, 0, 0) = 0.5;
    inst.gains(0, 0, 1) = 0.9;
    inst.noise = {1.0};
    inst.p_max = 2.0;
    inst.weights = {1.0};
    inst.r_min_bits = {0.0};
    const PowerAllocation p = heuristic_max_gain(inst);
    CHECK(p.p(0, 0) == 0.0);
    CHECK(p.p(0, 1) == 2.0);

    SUBCASE("ties go to the lowest channel index") {
        inst.gains(0, 0, 1) = 0.5;
        const PowerAllocation tied = heuristic_max_gain(inst);
        CHECK(tied.p(0, 0) == 2.0);
        CHECK(tied.p(0, 1) == 0.0);
    }
}

TEST_CASE("heuristic output always spends the exact budget") {
    Rng rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const NetworkInstance inst =
            test::random_instance(rng, 2 + static_cast<int>(rng.below(5)),
                                  1 + static_cast<int>(rng.below(4)), 1.0, 1.7);
        const PowerAllocation p = heuristic_max_gain(inst);
        for (int i = 0; i < inst.num_pairs; ++i) {
            double total = 0.0;
            int active = 0;
            for (int m = 0; m < inst.num_channels; ++m) {
                total += p.p(i, m);
                if (p.p(i, m) > 0.0) ++active;
            }
            CHECK(total == inst.p_max);
            CHECK(active == 1);
        }
        // Power constraints hold by construction; QoS violations only get
        // reported, never patched.
        const ConstraintResidual res = constraint_residuals(inst, p);
        for (double s : res.power_slack) CHECK(s >= -kPowerSlackRel * inst.p_max);
    }
}

TEST_CASE("icp model caps every entry per channel") {
    Rng rng(22);
    GnnModel icp = make_icp_gnn_model(GnnConfig{}, 1.0, FeatureStats{}, rng);
    CHECK(icp.cfg.norm == NormMode::PerChannelCap);
    for (int trial = 0; trial < 30; ++trial) {
        const int mc = 1 + static_cast<int>(rng.below(4));
        const NetworkInstance inst =
            test::random_instance(rng, 2 + static_cast<int>(rng.below(4)), mc);
        const PowerAllocation out = gnn_forward(icp, inst);
        const double cap = inst.p_max / mc;
        for (int i = 0; i < inst.num_pairs; ++i) {
            double total = 0.0;
            for (int m = 0; m < mc; ++m) {
                CHECK(out.p(i, m) <= cap + 1e-15);
                total += out.p(i, m);
            }
            CHECK(total <= inst.p_max + 1e-12);
        }
    }
}

TEST_CASE("icp and jcpgnn normalization coincide for a single channel") {
    Rng r1(23), r2(23);
    GnnModel icp = make_icp_gnn_model(GnnConfig{}, 1.0, FeatureStats{}, r1);
    GnnModel gnn = make_gnn_model(GnnConfig{}, 1.0, FeatureStats{}, r2);
    Rng irng(24);
    for (int trial = 0; trial < 20; ++trial) {
        const NetworkInstance inst = test::random_instance(irng, 3, 1);
        const PowerAllocation a = gnn_forward(icp, inst);
        const PowerAllocation b = gnn_forward(gnn, inst);
        for (int i = 0; i < 3; ++i) CHECK(a.p(i, 0) == doctest::Approx(b.p(i, 0)).epsilon(1e-14));
    }
}
