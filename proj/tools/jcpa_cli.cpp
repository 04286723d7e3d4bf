// Command-line front end: dataset generation, solver runs, training,
// evaluation, timing benchmarks and the brute-force oracle.
//
// Subcommands: gen, solve, train, eval, bench, oracle.
// Errors exit nonzero with a single machine-readable JSON line on stderr.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <iostream>

#include <jcpa/baselines.hpp>
#include <jcpa/harness.hpp>

namespace {

using namespace jcpa;
using nlohmann::json;

TopologyConfig topology_from_cli(int pairs, int channels, double noise, double p_max,
                                 double r_min_low, double r_min_high, uint64_t seed) {
    TopologyConfig t;
    t.num_pairs = pairs;
    t.num_channels = channels;
    t.noise_power = noise;
    t.p_max = p_max;
    t.r_min_low = r_min_low;
    t.r_min_high = r_min_high;
    t.seed = seed;
    return t;
}

int cmd_gen(const std::string& config_path, const TopologyConfig& cli_topo, int count,
            const std::string& split, const std::string& out) {
    TopologyConfig topo = cli_topo;
    if (!config_path.empty()) topo = load_experiment_config(config_path).topology;
    const Dataset ds = gen_dataset(topo, count, split);
    store_dataset(ds, out);
    std::cout << "wrote " << ds.instances.size() << " instances (" << split << ") to " << out
              << "\n";
    return 0;
}

int cmd_solve(const std::string& dataset_path, const std::string& algorithm,
              const std::string& out, uint64_t seed) {
    const Dataset ds = load_dataset(dataset_path);
    std::vector<PowerAllocation> allocs;
    allocs.reserve(ds.instances.size());
    EwmmseConfig cfg;
    for (size_t k = 0; k < ds.instances.size(); ++k) {
        if (algorithm == "ewmmse") {
            Rng rng(Rng::mix(Rng::mix(seed, Rng::salt("ewmmse")), k));
            allocs.push_back(ewmmse_solve(ds.instances[k], cfg, rng).power);
        } else if (algorithm == "heuristic") {
            allocs.push_back(heuristic_max_gain(ds.instances[k]));
        } else {
            throw Error("solve: unknown algorithm '" + algorithm + "' (ewmmse|heuristic)");
        }
    }
    save_allocations_csv(out, allocs);
    double total = 0.0;
    for (size_t k = 0; k < allocs.size(); ++k)
        total += sum_weighted_rate(ds.instances[k], allocs[k]);
    std::cout << algorithm << ": avg weighted sum rate "
              << total / static_cast<double>(allocs.size()) << " bits/s/Hz, QoS violation "
              << metric_qos_violation(allocs, ds.instances) << ", allocations in " << out << "\n";
    return 0;
}

int cmd_train(const std::string& train_path, const std::string& solver, const TrainConfig& tc,
              const std::string& out) {
    const Dataset train = load_dataset(train_path);
    GnnConfig gc;
    Rng init_rng(Rng::mix(tc.seed, Rng::salt("init")));
    const FeatureStats stats = compute_feature_stats(train);
    GnnModel model = solver == "icp-gnn"
                         ? make_icp_gnn_model(gc, train.config.p_max, stats, init_rng)
                         : make_gnn_model(gc, train.config.p_max, stats, init_rng);
    const TrainTrace trace = gnn_train(model, train, tc);
    save_gnn_model(model, out);
    if (!trace.epochs.empty()) {
        const auto& last = trace.epochs.back();
        std::cout << solver << ": trained " << trace.epochs.size() << " epochs, final avg rate "
                  << last.avg_sum_rate_bits << " bits/s/Hz, violation " << last.violation_prob
                  << ", checkpoint " << out << "\n";
    }
    return 0;
}

int cmd_eval(const std::string& config_path, const std::string& format, const std::string& out) {
    const ExperimentConfig cfg = load_experiment_config(config_path);
    const ExperimentReport report = run_experiment(cfg);
    emit_report(report, format, out);
    for (const ReportRow& r : report.rows) {
        std::cout << r.label << ": rate " << r.avg_weighted_sum_rate_bits << " bits/s/Hz"
                  << ", violation " << r.qos_violation_prob << ", normalized " << r.normalized
                  << "\n";
    }
    return 0;
}

int cmd_bench(const std::string& dataset_path, const std::string& checkpoint, int reps,
              const std::string& format, const std::string& out) {
    const Dataset ds = load_dataset(dataset_path);
    GnnModel model = [&] {
        if (!checkpoint.empty()) return load_gnn_model(checkpoint);
        Rng rng(1);
        return make_gnn_model(GnnConfig{}, ds.config.p_max, compute_feature_stats(ds), rng);
    }();
    EwmmseConfig cfg;
    const std::vector<BenchRow> rows = bench_timing(ds, model, cfg, reps);
    ExperimentReport report;
    report.scenario = "bench-timing";
    report.config_json = "{}";
    report.topology_seed = ds.config.seed;
    for (const BenchRow& b : rows) {
        ReportRow r;
        r.label = b.algorithm;
        r.median_seconds = b.median_seconds;
        r.p95_seconds = b.p95_seconds;
        report.rows.push_back(r);
        std::cout << b.algorithm << ": median " << b.median_seconds * 1e6 << " us, p95 "
                  << b.p95_seconds * 1e6 << " us over " << b.samples << " runs\n";
    }
    if (!out.empty()) emit_report(report, format, out);
    return 0;
}

int cmd_oracle(const TopologyConfig& topo, int count, int levels) {
    for (int k = 0; k < count; ++k) {
        const NetworkInstance inst = draw_indexed_instance(topo, "oracle", k);
        const OracleResult res = brute_force_oracle(inst, levels);
        std::cout << "instance " << k << ": "
                  << (res.feasible ? "feasible" : "infeasible") << ", best rate "
                  << res.best_rate_bits << " bits/s/Hz";
        if (!res.feasible) std::cout << ", min violation " << res.min_violation_bits << " bits";
        std::cout << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Joint channel and power allocation toolkit"};
    app.require_subcommand(1);

    // Shared topology flags (gen, oracle).
    int pairs = 4, channels = 2;
    double noise = 1e-2, p_max = 1.0, r_min_low = 1.0, r_min_high = 2.0;
    uint64_t seed = 1;

    auto add_topology_flags = [&](CLI::App* cmd) {
        cmd->add_option("--pairs", pairs, "transceiver pairs D");
        cmd->add_option("--channels", channels, "channels M");
        cmd->add_option("--noise", noise, "receiver noise power");
        cmd->add_option("--p-max", p_max, "per-user power budget");
        cmd->add_option("--r-min-low", r_min_low, "QoS draw lower bound (bits/s/Hz)");
        cmd->add_option("--r-min-high", r_min_high, "QoS draw upper bound (bits/s/Hz)");
        cmd->add_option("--seed", seed, "topology seed");
    };

    // gen
    auto* gen = app.add_subcommand("gen", "generate a dataset");
    std::string gen_config, gen_split = "test", gen_out = "dataset.bin";
    int gen_count = 100;
    gen->add_option("--config", gen_config, "experiment config JSON (topology source)");
    add_topology_flags(gen);
    gen->add_option("--count", gen_count, "number of instances");
    gen->add_option("--split", gen_split, "split label (train|test)");
    gen->add_option("--out", gen_out, "output path");

    // solve
    auto* solve = app.add_subcommand("solve", "run eWMMSE or the heuristic on a dataset");
    std::string solve_data, solve_alg = "ewmmse", solve_out = "allocations.csv";
    uint64_t solve_seed = 1;
    solve->add_option("--dataset", solve_data, "dataset path")->required();
    solve->add_option("--algorithm", solve_alg, "ewmmse|heuristic");
    solve->add_option("--seed", solve_seed, "solver init seed");
    solve->add_option("--out", solve_out, "allocation CSV output");

    // train
    auto* train = app.add_subcommand("train", "train jcpgnn or icp-gnn");
    std::string train_data, train_solver = "jcpgnn", train_out = "model.ckpt";
    TrainConfig tc;
    train->add_option("--dataset", train_data, "training dataset path")->required();
    train->add_option("--solver", train_solver, "jcpgnn|icp-gnn");
    train->add_option("--epochs", tc.epochs, "training epochs");
    train->add_option("--lr", tc.lr, "weight learning rate");
    train->add_option("--lr-mu", tc.lr_mu, "QoS dual learning rate");
    train->add_option("--lr-lambda", tc.lr_lambda, "power dual learning rate");
    train->add_flag("--train-lambda", tc.train_lambda, "train the power dual (off: rely on normalization)");
    train->add_flag("--adam", tc.adam, "adaptive optimizer instead of plain SGD");
    train->add_option("--mask-fraction", tc.mask_fraction, "fraction of CSI hidden from inputs");
    train->add_option("--seed", tc.seed, "training seed");
    train->add_option("--out", train_out, "checkpoint output path");

    // eval
    auto* eval = app.add_subcommand("eval", "run an experiment config and emit a report");
    std::string eval_config, eval_format = "both", eval_out = "report";
    eval->add_option("--config", eval_config, "experiment config JSON")->required();
    eval->add_option("--format", eval_format, "csv|json|both");
    eval->add_option("--out", eval_out, "report path prefix");

    // bench
    auto* bench = app.add_subcommand("bench", "per-instance timing of all algorithms");
    std::string bench_data, bench_ckpt, bench_format = "csv", bench_out;
    int bench_reps = 20;
    bench->add_option("--dataset", bench_data, "dataset path")->required();
    bench->add_option("--checkpoint", bench_ckpt, "model checkpoint (fresh init if omitted)");
    bench->add_option("--reps", bench_reps, "repetitions per instance");
    bench->add_option("--format", bench_format, "csv|json|both");
    bench->add_option("--out", bench_out, "report path prefix (optional)");

    // oracle
    auto* oracle = app.add_subcommand("oracle", "brute-force grid optimum on tiny instances");
    int oracle_count = 5, oracle_levels = 20;
    add_topology_flags(oracle);
    oracle->add_option("--count", oracle_count, "instances to solve");
    oracle->add_option("--levels", oracle_levels, "grid levels per user");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed())
            return cmd_gen(gen_config,
                           topology_from_cli(pairs, channels, noise, p_max, r_min_low, r_min_high,
                                             seed),
                           gen_count, gen_split, gen_out);
        if (solve->parsed()) return cmd_solve(solve_data, solve_alg, solve_out, solve_seed);
        if (train->parsed()) return cmd_train(train_data, train_solver, tc, train_out);
        if (eval->parsed()) return cmd_eval(eval_config, eval_format, eval_out);
        if (bench->parsed())
            return cmd_bench(bench_data, bench_ckpt, bench_reps, bench_format, bench_out);
        if (oracle->parsed())
            return cmd_oracle(topology_from_cli(pairs, channels, noise, p_max, r_min_low,
                                                r_min_high, seed),
                              oracle_count, oracle_levels);
    } catch (const std::exception& e) {
        nlohmann::json err = {{"error", e.what()}};
        std::cerr << err.dump() << std::endl;
        return 1;
    }
    return 0;
}
