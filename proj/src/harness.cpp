#include "jcpa/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace jcpa {

namespace {

using nlohmann::json;

TopologyConfig topology_from_json(const json& j) {
    TopologyConfig t;
    t.num_pairs = j.value("num_pairs", t.num_pairs);
    t.num_channels = j.value("num_channels", t.num_channels);
    t.tx_spacing = j.value("tx_spacing", t.tx_spacing);
    t.rx_dist_min = j.value("rx_dist_min", t.rx_dist_min);
    t.rx_dist_max = j.value("rx_dist_max", t.rx_dist_max);
    t.path_loss_exponent = j.value("path_loss_exponent", t.path_loss_exponent);
    t.r_min_low = j.value("r_min_low", t.r_min_low);
    t.r_min_high = j.value("r_min_high", t.r_min_high);
    t.p_max = j.value("p_max", t.p_max);
    t.noise_power = j.value("noise_power", t.noise_power);
    t.seed = j.value("seed", t.seed);
    return t;
}

json topology_to_json(const TopologyConfig& t) {
    return {{"num_pairs", t.num_pairs},
            {"num_channels", t.num_channels},
            {"tx_spacing", t.tx_spacing},
            {"rx_dist_min", t.rx_dist_min},
            {"rx_dist_max", t.rx_dist_max},
            {"path_loss_exponent", t.path_loss_exponent},
            {"r_min_low", t.r_min_low},
            {"r_min_high", t.r_min_high},
            {"p_max", t.p_max},
            {"noise_power", t.noise_power},
            {"seed", t.seed}};
}

TrainConfig training_from_json(const json& j) {
    TrainConfig c;
    c.epochs = j.value("epochs", c.epochs);
    c.lr = j.value("lr", c.lr);
    c.lr_mu = j.value("lr_mu", c.lr_mu);
    c.lr_lambda = j.value("lr_lambda", c.lr_lambda);
    c.train_lambda = j.value("train_lambda", c.train_lambda);
    c.adam = j.value("adam", c.adam);
    c.mask_fraction = j.value("mask_fraction", c.mask_fraction);
    c.seed = j.value("seed", c.seed);
    return c;
}

json training_to_json(const TrainConfig& c) {
    return {{"epochs", c.epochs},       {"lr", c.lr},
            {"lr_mu", c.lr_mu},         {"lr_lambda", c.lr_lambda},
            {"train_lambda", c.train_lambda}, {"adam", c.adam},
            {"mask_fraction", c.mask_fraction}, {"seed", c.seed}};
}

EwmmseConfig ewmmse_from_json(const json& j) {
    EwmmseConfig c;
    c.max_iters = j.value("max_iters", c.max_iters);
    c.mu_step = j.value("mu_step", c.mu_step);
    c.mu_decay = j.value("mu_decay", c.mu_decay);
    c.bisect_tol = j.value("bisect_tol", c.bisect_tol);
    c.bisect_max = j.value("bisect_max", c.bisect_max);
    c.convergence_tol = j.value("convergence_tol", c.convergence_tol);
    return c;
}

json ewmmse_to_json(const EwmmseConfig& c) {
    return {{"max_iters", c.max_iters},   {"mu_step", c.mu_step},
            {"mu_decay", c.mu_decay},     {"bisect_tol", c.bisect_tol},
            {"bisect_max", c.bisect_max}, {"convergence_tol", c.convergence_tol}};
}

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["scenario"] = cfg.scenario;
    j["topology"] = topology_to_json(cfg.topology);
    j["solver"] = cfg.solver;
    j["train_size"] = cfg.train_size;
    j["test_size"] = cfg.test_size;
    j["training"] = training_to_json(cfg.training);
    j["ewmmse"] = ewmmse_to_json(cfg.ewmmse);
    j["mask_fractions"] = cfg.mask_fractions;
    j["external_allocations"] = cfg.external_allocations;
    j["checkpoint"] = cfg.checkpoint;
    return j;
}

double median_of(std::vector<double> xs) {
    require(!xs.empty(), "median of empty sample");
    std::sort(xs.begin(), xs.end());
    const size_t n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

double p95_of(std::vector<double> xs) {
    require(!xs.empty(), "p95 of empty sample");
    std::sort(xs.begin(), xs.end());
    const size_t idx = static_cast<size_t>(std::ceil(0.95 * xs.size())) - 1;
    return xs[std::min(idx, xs.size() - 1)];
}

double average_sum_rate(const std::vector<PowerAllocation>& allocs,
                        const std::vector<NetworkInstance>& instances) {
    require(allocs.size() == instances.size(), "allocation/instance list misalignment");
    require(!instances.empty(), "empty evaluation set");
    double total = 0.0;
    for (size_t k = 0; k < allocs.size(); ++k)
        total += sum_weighted_rate(instances[k], allocs[k]);
    return total / static_cast<double>(allocs.size());
}

// Trains a model for the given mask fraction and evaluates on the test set.
ReportRow run_gnn_row(const ExperimentConfig& cfg, const Dataset& train, const Dataset& test,
                      double mask_fraction, const std::string& label) {
    TrainConfig tc = cfg.training;
    tc.mask_fraction = mask_fraction;
    GnnConfig gc;
    Rng init_rng(Rng::mix(tc.seed, Rng::salt("init")));
    GnnModel model =
        cfg.solver == "icp-gnn"
            ? make_icp_gnn_model(gc, cfg.topology.p_max, compute_feature_stats(train), init_rng)
            : make_gnn_model(gc, cfg.topology.p_max, compute_feature_stats(train), init_rng);
    if (!cfg.checkpoint.empty()) {
        model = load_gnn_model(cfg.checkpoint);
    } else {
        gnn_train(model, train, tc);
    }
    const InferBatchResult inf = infer_batch(model, test);
    ReportRow row;
    row.label = label;
    row.avg_weighted_sum_rate_bits = average_sum_rate(inf.allocations, test.instances);
    row.qos_violation_prob = metric_qos_violation(inf.allocations, test.instances);
    row.median_seconds = median_of(inf.seconds);
    row.p95_seconds = p95_of(inf.seconds);
    return row;
}

}  // namespace

void ExperimentConfig::validate() const {
    topology.validate();
    ewmmse.validate();
    require(solver == "ewmmse" || solver == "jcpgnn" || solver == "icp-gnn" ||
                solver == "heuristic" || solver == "external-file",
            "ExperimentConfig: unknown solver '" + solver + "'");
    require(test_size >= 1, "ExperimentConfig: test_size must be >= 1");
    if (solver == "jcpgnn" || solver == "icp-gnn")
        require(train_size >= 1 || !checkpoint.empty(),
                "ExperimentConfig: training requires train_size >= 1 or a checkpoint");
    if (solver == "external-file")
        require(!external_allocations.empty(),
                "ExperimentConfig: external-file solver requires external_allocations");
    for (double f : mask_fractions)
        require(f >= 0.0 && f <= 0.5, "ExperimentConfig: mask fraction out of [0, 0.5]");
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream is(path);
    require(static_cast<bool>(is), "load_experiment_config: cannot open " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw Error(std::string("load_experiment_config: malformed JSON: ") + e.what());
    }
    ExperimentConfig cfg;
    cfg.scenario = j.value("scenario", cfg.scenario);
    if (j.contains("topology")) cfg.topology = topology_from_json(j["topology"]);
    cfg.solver = j.value("solver", cfg.solver);
    cfg.train_size = j.value("train_size", cfg.train_size);
    cfg.test_size = j.value("test_size", cfg.test_size);
    if (j.contains("training")) cfg.training = training_from_json(j["training"]);
    if (j.contains("ewmmse")) cfg.ewmmse = ewmmse_from_json(j["ewmmse"]);
    cfg.mask_fractions = j.value("mask_fractions", cfg.mask_fractions);
    cfg.external_allocations = j.value("external_allocations", cfg.external_allocations);
    cfg.checkpoint = j.value("checkpoint", cfg.checkpoint);
    cfg.validate();
    return cfg;
}

double metric_qos_violation(const std::vector<PowerAllocation>& allocations,
                            const std::vector<NetworkInstance>& instances) {
    require(allocations.size() == instances.size(),
            "metric_qos_violation: allocation/instance list misalignment");
    require(!instances.empty(), "metric_qos_violation: empty lists");
    int64_t violations = 0;
    int64_t total = 0;
    for (size_t k = 0; k < instances.size(); ++k) {
        const ConstraintResidual res = constraint_residuals(instances[k], allocations[k]);
        for (double slack : res.rate_slack_bits) {
            if (slack < -kRateSlackBits) ++violations;
            ++total;
        }
    }
    return static_cast<double>(violations) / static_cast<double>(total);
}

double metric_normalized(double run_avg_rate, double reference_avg_rate) {
    require(reference_avg_rate != 0.0, "metric_normalized: reference rate is zero");
    return run_avg_rate / reference_avg_rate;
}

OracleResult brute_force_oracle(const NetworkInstance& inst, int grid_levels) {
    inst.validate();
    require(grid_levels >= 1, "brute_force_oracle: grid_levels must be >= 1");
    const int d = inst.num_pairs;
    const int mc = inst.num_channels;
    require(d * mc <= 6, "brute_force_oracle: instance too large (D*M must be <= 6)");

    // Per-user candidates: compositions k_1..k_M with sum <= grid_levels,
    // p_m = k_m * (P_max / grid_levels). Same set for every user.
    std::vector<std::vector<double>> candidates;
    {
        const double step = inst.p_max / grid_levels;
        std::vector<int> k(mc, 0);
        while (true) {
            int total = 0;
            for (int m = 0; m < mc; ++m) total += k[m];
            if (total <= grid_levels) {
                std::vector<double> p(mc);
                for (int m = 0; m < mc; ++m) p[m] = k[m] * step;
                candidates.push_back(std::move(p));
            }
            int pos = 0;
            while (pos < mc) {
                if (++k[pos] <= grid_levels) break;
                k[pos] = 0;
                ++pos;
            }
            if (pos == mc) break;
        }
    }

    const size_t n_cand = candidates.size();
    PowerAllocation point;
    point.p = Mat(d, mc);
    OracleResult out;
    out.min_violation_bits = std::numeric_limits<double>::infinity();
    double best_feasible_rate = -std::numeric_limits<double>::infinity();
    double best_infeasible_rate = -std::numeric_limits<double>::infinity();
    Mat best_feasible_p, best_infeasible_p;

    std::vector<size_t> pick(d, 0);  // odometer over the candidate sets
    while (true) {
        for (int i = 0; i < d; ++i)
            for (int m = 0; m < mc; ++m) point.p(i, m) = candidates[pick[i]][m];
        const ConstraintResidual res = constraint_residuals(inst, point);
        const double rate = sum_weighted_rate(inst, point);
        if (res.worst_violation_bits <= kRateSlackBits) {
            if (rate > best_feasible_rate) {
                best_feasible_rate = rate;
                best_feasible_p = point.p;
            }
        } else if (res.worst_violation_bits < out.min_violation_bits ||
                   (res.worst_violation_bits == out.min_violation_bits &&
                    rate > best_infeasible_rate)) {
            out.min_violation_bits = res.worst_violation_bits;
            best_infeasible_rate = rate;
            best_infeasible_p = point.p;
        }
        int pos = 0;
        while (pos < d) {
            if (++pick[pos] < n_cand) break;
            pick[pos] = 0;
            ++pos;
        }
        if (pos == d) break;
    }

    out.feasible = best_feasible_p.size() > 0;
    if (out.feasible) {
        out.best.p = best_feasible_p;
        out.best_rate_bits = best_feasible_rate;
        out.min_violation_bits = 0.0;
    } else {
        out.best.p = best_infeasible_p;
        out.best_rate_bits = best_infeasible_rate;
    }
    return out;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentReport report;
    report.scenario = cfg.scenario;
    report.config_json = config_to_json(cfg).dump();
    report.config_hash = fnv1a_hash(report.config_json);
    report.topology_seed = cfg.topology.seed;

    const Dataset test = gen_dataset(cfg.topology, cfg.test_size, "test");
    require(!test.instances.empty(), "run_experiment: empty test set");

    if (cfg.solver == "heuristic") {
        std::vector<PowerAllocation> allocs;
        std::vector<double> times;
        allocs.reserve(test.instances.size());
        for (const NetworkInstance& inst : test.instances) {
            const auto t0 = std::chrono::steady_clock::now();
            allocs.push_back(heuristic_max_gain(inst));
            const auto t1 = std::chrono::steady_clock::now();
            times.push_back(std::chrono::duration<double>(t1 - t0).count());
        }
        ReportRow row;
        row.label = "heuristic";
        row.avg_weighted_sum_rate_bits = average_sum_rate(allocs, test.instances);
        row.qos_violation_prob = metric_qos_violation(allocs, test.instances);
        row.median_seconds = median_of(times);
        row.p95_seconds = p95_of(times);
        report.rows.push_back(row);
    } else if (cfg.solver == "ewmmse") {
        std::vector<PowerAllocation> allocs;
        std::vector<double> times;
        for (size_t k = 0; k < test.instances.size(); ++k) {
            Rng rng(Rng::mix(Rng::mix(cfg.topology.seed, Rng::salt("ewmmse")), k));
            const auto t0 = std::chrono::steady_clock::now();
            WmmseResult res = ewmmse_solve(test.instances[k], cfg.ewmmse, rng);
            const auto t1 = std::chrono::steady_clock::now();
            allocs.push_back(std::move(res.power));
            times.push_back(std::chrono::duration<double>(t1 - t0).count());
        }
        ReportRow row;
        row.label = "ewmmse";
        row.avg_weighted_sum_rate_bits = average_sum_rate(allocs, test.instances);
        row.qos_violation_prob = metric_qos_violation(allocs, test.instances);
        row.median_seconds = median_of(times);
        row.p95_seconds = p95_of(times);
        report.rows.push_back(row);
    } else if (cfg.solver == "external-file") {
        const std::vector<PowerAllocation> allocs = load_allocations_csv(
            cfg.external_allocations, cfg.topology.num_pairs, cfg.topology.num_channels);
        require(allocs.size() == test.instances.size(),
                "run_experiment: external allocation count does not match test set");
        ReportRow row;
        row.label = "external-file";
        row.avg_weighted_sum_rate_bits = average_sum_rate(allocs, test.instances);
        row.qos_violation_prob = metric_qos_violation(allocs, test.instances);
        report.rows.push_back(row);
    } else {
        const Dataset train = gen_dataset(cfg.topology, cfg.train_size, "train");
        if (cfg.mask_fractions.empty()) {
            report.rows.push_back(
                run_gnn_row(cfg, train, test, cfg.training.mask_fraction, cfg.solver));
        } else {
            std::vector<double> fractions = cfg.mask_fractions;
            if (fractions.front() != 0.0) fractions.insert(fractions.begin(), 0.0);
            for (double f : fractions) {
                std::ostringstream label;
                label << cfg.solver << " mask=" << f;
                report.rows.push_back(run_gnn_row(cfg, train, test, f, label.str()));
            }
        }
    }

    const double reference = report.rows.front().avg_weighted_sum_rate_bits;
    for (ReportRow& row : report.rows)
        row.normalized = metric_normalized(row.avg_weighted_sum_rate_bits, reference);
    return report;
}

std::vector<BenchRow> bench_timing(const Dataset& data, const GnnModel& model,
                                   const EwmmseConfig& cfg, int reps) {
    require(reps >= 1, "bench_timing: reps must be >= 1");
    require(!data.instances.empty(), "bench_timing: empty dataset");
    const int d = data.config.num_pairs;
    const int mc = data.config.num_channels;

    std::vector<double> t_heur, t_gnn, t_wmmse;
    // Warm-up pass keeps first-touch page faults and lazy allocs out of the
    // measured runs.
    (void)heuristic_max_gain(data.instances[0]);
    (void)gnn_forward(model, data.instances[0]);
    {
        Rng rng(Rng::mix(data.config.seed, Rng::salt("bench-warm")));
        (void)ewmmse_solve(data.instances[0], cfg, rng);
    }
    for (int r = 0; r < reps; ++r) {
        for (size_t k = 0; k < data.instances.size(); ++k) {
            const NetworkInstance& inst = data.instances[k];
            auto t0 = std::chrono::steady_clock::now();
            (void)heuristic_max_gain(inst);
            auto t1 = std::chrono::steady_clock::now();
            t_heur.push_back(std::chrono::duration<double>(t1 - t0).count());

            t0 = std::chrono::steady_clock::now();
            (void)gnn_forward(model, inst);
            t1 = std::chrono::steady_clock::now();
            t_gnn.push_back(std::chrono::duration<double>(t1 - t0).count());

            Rng rng(Rng::mix(Rng::mix(data.config.seed, Rng::salt("bench")), k));
            t0 = std::chrono::steady_clock::now();
            (void)ewmmse_solve(inst, cfg, rng);
            t1 = std::chrono::steady_clock::now();
            t_wmmse.push_back(std::chrono::duration<double>(t1 - t0).count());
        }
    }
    std::vector<BenchRow> rows;
    rows.push_back({"heuristic", d, mc, median_of(t_heur), p95_of(t_heur),
                    static_cast<int>(t_heur.size())});
    rows.push_back({"jcpgnn-inference", d, mc, median_of(t_gnn), p95_of(t_gnn),
                    static_cast<int>(t_gnn.size())});
    rows.push_back({"ewmmse-solve", d, mc, median_of(t_wmmse), p95_of(t_wmmse),
                    static_cast<int>(t_wmmse.size())});
    return rows;
}

void emit_report(const ExperimentReport& report, const std::string& format,
                 const std::string& out_prefix) {
    require(format == "csv" || format == "json" || format == "both",
            "emit_report: unknown format '" + format + "' (supported: csv, json, both)");
    if (format == "csv" || format == "both") {
        std::ofstream os(out_prefix + ".csv");
        require(static_cast<bool>(os), "emit_report: cannot open " + out_prefix + ".csv");
        os << "# scenario=" << report.scenario << " config_hash=" << report.config_hash
           << " topology_seed=" << report.topology_seed
           << " violation_denominator=user-instances\n";
        os << "label,avg_weighted_sum_rate_bits,qos_violation_prob,normalized,"
              "median_seconds,p95_seconds\n";
        os.precision(17);
        for (const ReportRow& r : report.rows) {
            os << r.label << ',' << r.avg_weighted_sum_rate_bits << ',' << r.qos_violation_prob
               << ',' << r.normalized << ',' << r.median_seconds << ',' << r.p95_seconds << '\n';
        }
        require(static_cast<bool>(os), "emit_report: CSV write failed");
    }
    if (format == "json" || format == "both") {
        json j;
        j["scenario"] = report.scenario;
        j["config"] = json::parse(report.config_json);
        j["config_hash"] = report.config_hash;
        j["topology_seed"] = report.topology_seed;
        j["violation_denominator"] = "user-instances";
        auto rows = json::array();
        for (const ReportRow& r : report.rows) {
            rows.push_back({{"label", r.label},
                            {"avg_weighted_sum_rate_bits", r.avg_weighted_sum_rate_bits},
                            {"qos_violation_prob", r.qos_violation_prob},
                            {"normalized", r.normalized},
                            {"median_seconds", r.median_seconds},
                            {"p95_seconds", r.p95_seconds}});
        }
        j["rows"] = rows;
        std::ofstream os(out_prefix + ".json");
        require(static_cast<bool>(os), "emit_report: cannot open " + out_prefix + ".json");
        os << j.dump(2) << '\n';
        require(static_cast<bool>(os), "emit_report: JSON write failed");
    }
}

int plateau_epoch(const std::vector<double>& values, int window, double rel_tol) {
    for (int e = window; e < static_cast<int>(values.size()); ++e) {
        const double ref = values[e];
        if (ref == 0.0) continue;
        bool flat = true;
        for (int k = e - window; k <= e && flat; ++k)
            flat = std::abs(values[k] - ref) / std::abs(ref) < rel_tol;
        if (flat) return e;
    }
    return -1;
}

void save_allocations_csv(const std::string& path, const std::vector<PowerAllocation>& allocs) {
    std::ofstream os(path);
    require(static_cast<bool>(os), "save_allocations_csv: cannot open " + path);
    os << "instance,user";
    if (!allocs.empty())
        for (int m = 0; m < allocs.front().num_channels(); ++m) os << ",p" << m;
    os << '\n';
    os.precision(17);
    for (size_t k = 0; k < allocs.size(); ++k) {
        const Mat& p = allocs[k].p;
        for (int i = 0; i < p.rows(); ++i) {
            os << k << ',' << i;
            for (int m = 0; m < p.cols(); ++m) os << ',' << p(i, m);
            os << '\n';
        }
    }
    require(static_cast<bool>(os), "save_allocations_csv: write failed");
}

std::vector<PowerAllocation> load_allocations_csv(const std::string& path, int num_pairs,
                                                  int num_channels) {
    std::ifstream is(path);
    require(static_cast<bool>(is), "load_allocations_csv: cannot open " + path);
    std::string line;
    require(static_cast<bool>(std::getline(is, line)), "load_allocations_csv: empty file");
    std::vector<PowerAllocation> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string field;
        require(static_cast<bool>(std::getline(ss, field, ',')), "load_allocations_csv: bad row");
        const size_t inst_idx = std::stoull(field);
        require(static_cast<bool>(std::getline(ss, field, ',')), "load_allocations_csv: bad row");
        const int user = std::stoi(field);
        if (inst_idx == out.size()) {
            out.emplace_back();
            out.back().p = Mat(num_pairs, num_channels);
        }
        require(inst_idx < out.size() && user >= 0 && user < num_pairs,
                "load_allocations_csv: row out of order or out of range");
        for (int m = 0; m < num_channels; ++m) {
            require(static_cast<bool>(std::getline(ss, field, ',')),
                    "load_allocations_csv: missing power column");
            out[inst_idx].p(user, m) = std::stod(field);
        }
    }
    return out;
}

uint64_t fnv1a_hash(const std::string& bytes) {
    uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace jcpa
