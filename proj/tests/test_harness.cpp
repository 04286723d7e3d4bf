#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include <jcpa/harness.hpp>

#include "test_util.hpp"

using namespace jcpa;

TEST_CASE("metric_qos_violation counting") {
    Rng rng(31);
    std::vector<NetworkInstance> instances;
    std::vector<PowerAllocation> allocs;
    for (int k = 0; k < 4; ++k) {
        NetworkInstance inst = test::random_instance(rng, 2, 2, 1.0, 1.0, 0.0);
        PowerAllocation p = test::random_feasible_power(rng, inst, 0.0);
        instances.push_back(inst);
        allocs.push_back(p);
    }
    SUBCASE("all satisfied: zero") {
        CHECK(metric_qos_violation(allocs, instances) == 0.0);
    }
    SUBCASE("all violated: one") {
        for (auto& inst : instances) inst.r_min_bits.assign(2, 100.0);
        CHECK(metric_qos_violation(allocs, instances) == 1.0);
    }
    SUBCASE("partial count over user-instances") {
        // 4 instances x 2 users = 8 user-instances; violate exactly 3.
        instances[0].r_min_bits[0] = 100.0;
        instances[2].r_min_bits[0] = 100.0;
        instances[2].r_min_bits[1] = 100.0;
        CHECK(metric_qos_violation(allocs, instances) == doctest::Approx(3.0 / 8.0));
    }
    SUBCASE("misalignment raises") {
        allocs.pop_back();
        CHECK_THROWS_AS(metric_qos_violation(allocs, instances), Error);
    }
}

TEST_CASE("metric_normalized") {
    CHECK(metric_normalized(3.0, 3.0) == doctest::Approx(1.0));
    CHECK(metric_normalized(1.5, 3.0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(metric_normalized(1.0, 0.0), Error);
}

TEST_CASE("brute_force_oracle monotone single-link cases") {
    SUBCASE("single pair, single channel: full power") {
        NetworkInstance inst;
        inst.num_pairs = 1;
        inst.num_channels = 1;
        inst.gains = Ten3(1, 1, 1, 1.0);
        inst.noise = {1.0};
        inst.p_max = 1.0;
        inst.weights = {1.0};
        inst.r_min_bits = {0.0};
        const OracleResult res = brute_force_oracle(inst, 20);
        CHECK(res.feasible);
        CHECK(res.best.p(0, 0) == doctest::Approx(1.0));
        CHECK(res.best_rate_bits == doctest::Approx(1.0));
    }
    SUBCASE("dead channel gets nothing") {
        NetworkInstance inst;
        inst.num_pairs = 1;
        inst.num_channels = 2;
        inst.gains = Ten3(1, 1, 2, 0.0);
        inst.gains(0, 0, 0) = 1.0;  // channel 1 is dead
        inst.noise = {1.0};
        inst.p_max = 1.0;
        inst.weights = {1.0};
        inst.r_min_bits = {0.0};
        const OracleResult res = brute_force_oracle(inst, 10);
        CHECK(res.best.p(0, 0) == doctest::Approx(1.0));
        CHECK(res.best.p(0, 1) == 0.0);
    }
    SUBCASE("size guard") {
        Rng rng(32);
        const NetworkInstance inst = test::random_instance(rng, 3, 3);
        CHECK_THROWS_AS(brute_force_oracle(inst, 4), Error);
    }
    SUBCASE("infeasible instance reports its minimum violation") {
        NetworkInstance inst;
        inst.num_pairs = 1;
        inst.num_channels = 1;
        inst.gains = Ten3(1, 1, 1, 1.0);
        inst.noise = {1.0};
        inst.p_max = 1.0;
        inst.weights = {1.0};
        inst.r_min_bits = {2.0};  // max achievable is 1 bit
        const OracleResult res = brute_force_oracle(inst, 20);
        CHECK(!res.feasible);
        CHECK(res.min_violation_bits == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(res.best.p(0, 0) == doctest::Approx(1.0));
    }
}

TEST_CASE("oracle dominance over the eWMMSE solution") {
    // Refining the grid once bounds the oracle's resolution error; no solver
    // may beat the refined optimum by more than that bound.
    TopologyConfig tc;
    tc.num_pairs = 2;
    tc.num_channels = 2;
    tc.noise_power = 1e-2;
    tc.seed = 404;
    EwmmseConfig cfg;
    for (int k = 0; k < 10; ++k) {
        const NetworkInstance inst = draw_indexed_instance(tc, "oracle-dom", k);
        const OracleResult coarse = brute_force_oracle(inst, 20);
        const OracleResult fine = brute_force_oracle(inst, 40);
        if (!coarse.feasible || !fine.feasible) continue;
        Rng rng(1000 + k);
        const WmmseResult res = ewmmse_solve(inst, cfg, rng);
        if (!res.feasible) continue;
        const double rate = sum_weighted_rate(inst, res.power);
        const double resolution = 2.0 * std::abs(fine.best_rate_bits - coarse.best_rate_bits);
        CHECK(rate <= fine.best_rate_bits + resolution + 0.05);
    }
}

TEST_CASE("plateau_epoch detection") {
    std::vector<double> rising;
    for (int k = 0; k < 30; ++k) rising.push_back(1.0 + 0.5 * k);
    CHECK(plateau_epoch(rising, 10, 0.01) == -1);

    std::vector<double> flat(rising);
    for (int k = 0; k < 40; ++k) flat.push_back(16.0 + 1e-4 * (k % 3));
    const int e = plateau_epoch(flat, 10, 0.01);
    CHECK(e >= 30);
    CHECK(e <= 45);
}

TEST_CASE("allocation CSV round trip") {
    Rng rng(33);
    std::vector<PowerAllocation> allocs;
    for (int k = 0; k < 3; ++k) {
        PowerAllocation p;
        p.p = Mat(2, 3);
        for (auto& v : p.p.raw()) v = rng.uniform();
        allocs.push_back(p);
    }
    const std::string path = "alloc_roundtrip.csv";
    save_allocations_csv(path, allocs);
    const auto back = load_allocations_csv(path, 2, 3);
    REQUIRE(back.size() == 3);
    for (size_t k = 0; k < 3; ++k)
        for (int i = 0; i < 2; ++i)
            for (int m = 0; m < 3; ++m)
                CHECK(back[k].p(i, m) == allocs[k].p(i, m));  // max-precision round trip
    std::remove(path.c_str());
}

TEST_CASE("experiment config load / validation") {
    const std::string path = "exp_cfg.json";
    {
        std::ofstream os(path);
        os << R"({
            "scenario": "smoke",
            "solver": "heuristic",
            "test_size": 4,
            "topology": {"num_pairs": 3, "num_channels": 2, "noise_power": 0.01, "seed": 9}
        })";
    }
    const ExperimentConfig cfg = load_experiment_config(path);
    CHECK(cfg.scenario == "smoke");
    CHECK(cfg.topology.num_pairs == 3);
    CHECK(cfg.topology.seed == 9);
    std::remove(path.c_str());

    SUBCASE("unknown solver rejected") {
        const std::string bad = "exp_bad.json";
        {
            std::ofstream os(bad);
            os << R"({"solver": "magic"})";
        }
        CHECK_THROWS_AS(load_experiment_config(bad), Error);
        std::remove(bad.c_str());
    }
}

TEST_CASE("run_experiment determinism and report emission") {
    ExperimentConfig cfg;
    cfg.scenario = "determinism";
    cfg.solver = "heuristic";
    cfg.test_size = 6;
    cfg.topology.num_pairs = 3;
    cfg.topology.num_channels = 2;
    cfg.topology.noise_power = 1e-2;
    cfg.topology.seed = 2025;

    const ExperimentReport a = run_experiment(cfg);
    const ExperimentReport b = run_experiment(cfg);
    REQUIRE(a.rows.size() == 1);
    CHECK(a.rows[0].avg_weighted_sum_rate_bits == b.rows[0].avg_weighted_sum_rate_bits);
    CHECK(a.rows[0].qos_violation_prob == b.rows[0].qos_violation_prob);
    CHECK(a.config_hash == b.config_hash);
    CHECK(a.rows[0].normalized == 1.0);

    SUBCASE("csv and json round trip the metric values") {
        emit_report(a, "both", "report_test");
        std::ifstream jf("report_test.json");
        REQUIRE(static_cast<bool>(jf));
        nlohmann::json j;
        jf >> j;
        CHECK(j.at("rows").size() == 1);
        CHECK(j.at("rows")[0].at("avg_weighted_sum_rate_bits").get<double>() ==
              a.rows[0].avg_weighted_sum_rate_bits);
        CHECK(j.at("config").at("topology").at("seed").get<uint64_t>() == 2025);

        std::ifstream cf("report_test.csv");
        REQUIRE(static_cast<bool>(cf));
        std::string header, columns, row;
        std::getline(cf, header);
        std::getline(cf, columns);
        std::getline(cf, row);
        const double csv_rate = std::stod(row.substr(row.find(',') + 1));
        CHECK(csv_rate == a.rows[0].avg_weighted_sum_rate_bits);
        std::remove("report_test.csv");
        std::remove("report_test.json");
    }
    SUBCASE("unknown format raises with the supported list") {
        try {
            emit_report(a, "xml", "nope");
            FAIL("expected Error");
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find("csv") != std::string::npos);
        }
    }
    SUBCASE("empty test set rejected") {
        ExperimentConfig bad = cfg;
        bad.test_size = 0;
        CHECK_THROWS_AS(run_experiment(bad), Error);
    }
}

TEST_CASE("external allocation evaluation") {
    ExperimentConfig cfg;
    cfg.solver = "heuristic";
    cfg.test_size = 4;
    cfg.topology.num_pairs = 2;
    cfg.topology.num_channels = 2;
    cfg.topology.noise_power = 1e-2;
    cfg.topology.seed = 31337;
    const ExperimentReport direct = run_experiment(cfg);

    // Export the heuristic allocations, re-evaluate through the exchange file.
    const Dataset test = gen_dataset(cfg.topology, cfg.test_size, "test");
    std::vector<PowerAllocation> allocs;
    for (const auto& inst : test.instances) allocs.push_back(heuristic_max_gain(inst));
    save_allocations_csv("external.csv", allocs);

    ExperimentConfig ext = cfg;
    ext.solver = "external-file";
    ext.external_allocations = "external.csv";
    const ExperimentReport via_file = run_experiment(ext);
    CHECK(via_file.rows[0].avg_weighted_sum_rate_bits ==
          doctest::Approx(direct.rows[0].avg_weighted_sum_rate_bits).epsilon(1e-12));
    std::remove("external.csv");
}
