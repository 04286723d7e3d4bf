#pragma once

#include <optional>
#include <string>
#include <vector>

#include "jcpa/baselines.hpp"
#include "jcpa/chansim.hpp"
#include "jcpa/ewmmse.hpp"
#include "jcpa/gnn.hpp"

namespace jcpa {

/// One experiment: dataset parameters, solver selection, training parameters,
/// optional missing-CSI sweep. Loaded from JSON (see README for the schema).
struct ExperimentConfig {
    std::string scenario = "experiment";
    TopologyConfig topology;
    std::string solver = "ewmmse";  // ewmmse | jcpgnn | icp-gnn | heuristic | external-file
    int train_size = 500;
    int test_size = 100;
    TrainConfig training;
    EwmmseConfig ewmmse;
    std::vector<double> mask_fractions;  // nonempty: one row per fraction (0 is the reference)
    std::string external_allocations;    // CSV path for solver = external-file
    std::string checkpoint;              // pre-trained model path (skips training)

    void validate() const;
};

ExperimentConfig load_experiment_config(const std::string& path);

struct ReportRow {
    std::string label;
    double avg_weighted_sum_rate_bits = 0.0;
    double qos_violation_prob = 0.0;
    double normalized = 1.0;  // ratio to the reference row of this report
    double median_seconds = 0.0;
    double p95_seconds = 0.0;
};

struct ExperimentReport {
    std::string scenario;
    std::string config_json;  // embedded config for bit-identical regeneration
    uint64_t config_hash = 0;
    uint64_t topology_seed = 0;
    std::vector<ReportRow> rows;
};

ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Fraction of (instance, user) pairs whose total rate falls short of R_min by
/// more than the rate tolerance. Denominator: D * num_instances.
double metric_qos_violation(const std::vector<PowerAllocation>& allocations,
                            const std::vector<NetworkInstance>& instances);

/// Ratio of average weighted sum rates (run / reference).
double metric_normalized(double run_avg_rate, double reference_avg_rate);

struct OracleResult {
    PowerAllocation best;
    double best_rate_bits = 0.0;
    bool feasible = false;
    double min_violation_bits = 0.0;  // 0 when feasible
};

/// Exhaustive grid over the per-user power simplex {sum_m p <= P_max} with
/// `grid_levels` levels per user. Returns the QoS-feasible maximizer, or the
/// minimum-violation point (ties by rate) when nothing is feasible.
/// Guarded to D*M <= 6.
OracleResult brute_force_oracle(const NetworkInstance& inst, int grid_levels);

struct BenchRow {
    std::string algorithm;
    int num_pairs = 0;
    int num_channels = 0;
    double median_seconds = 0.0;
    double p95_seconds = 0.0;
    int samples = 0;
};

/// Median/p95 per-instance wall clock of heuristic, model inference and the
/// eWMMSE solve over >= `reps` repetitions of each instance. Dataset I/O and
/// model loading are outside the timed regions.
std::vector<BenchRow> bench_timing(const Dataset& data, const GnnModel& model,
                                   const EwmmseConfig& cfg, int reps);

/// Writes <prefix>.csv and/or <prefix>.json. Supported formats: "csv", "json",
/// "both".
void emit_report(const ExperimentReport& report, const std::string& format,
                 const std::string& out_prefix);

/// First epoch index (>= window) at which every trace value in the trailing
/// window is within rel_tol of the current value; -1 when no plateau occurs.
int plateau_epoch(const std::vector<double>& values, int window, double rel_tol);

/// Allocation exchange files: one CSV row per (instance, user), M power
/// columns. Round-trips through max-precision formatting.
void save_allocations_csv(const std::string& path, const std::vector<PowerAllocation>& allocs);
std::vector<PowerAllocation> load_allocations_csv(const std::string& path, int num_pairs,
                                                  int num_channels);

uint64_t fnv1a_hash(const std::string& bytes);

}  // namespace jcpa
