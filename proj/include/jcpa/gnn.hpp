#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "jcpa/autodiff.hpp"
#include "jcpa/chansim.hpp"
#include "jcpa/model.hpp"

namespace jcpa {

/// Standardization statistics for node/edge feature channels, stored in the
/// checkpoint so inference reproduces the training-time transform.
struct FeatureStats {
    std::array<double, 2> node_mean{0.0, 0.0};
    std::array<double, 2> node_std{1.0, 1.0};
    std::array<double, 2> edge_mean{0.0, 0.0};
    std::array<double, 2> edge_std{1.0, 1.0};
};

FeatureStats compute_feature_stats(const Dataset& data);

/// Per-instance input to the message-passing network: M complete directed
/// subgraphs on D vertices. Node features are [|h_ii^m|, R_i^min]; edge
/// features [|h_ij^m|, |h_ji^m|]; both standardized by `stats`.
struct GraphFeatures {
    int num_pairs = 0;
    int num_channels = 0;
    std::vector<double> node;  // ((i * M) + m) * 2 + f
    std::vector<double> edge;  // (((i * D) + j) * M + m) * 2 + f, i != j
    FeatureStats stats;

    const double* node_at(int i, int m) const {
        return node.data() + (static_cast<size_t>(i) * num_channels + m) * 2;
    }
    const double* edge_at(int i, int j, int m) const {
        return edge.data() +
               ((static_cast<size_t>(i) * num_pairs + j) * num_channels + m) * 2;
    }
};

GraphFeatures build_graph(const NetworkInstance& inst);  // identity stats
GraphFeatures build_graph(const NetworkInstance& inst, const FeatureStats& stats);

/// How the power head output is mapped into the per-user budget.
/// BudgetScale is the joint normalization p~ = p^ * P_max / max(sum_m p^, P_max);
/// PerChannelCap is the independent-channel baseline p~ = min(p^, P_max / M).
enum class NormMode { BudgetScale, PerChannelCap };

struct GnnConfig {
    int num_layers = 2;
    int msg_hidden = 16;
    int msg_dim = 32;
    int upd_hidden1 = 16;
    int upd_hidden2 = 8;
    NormMode norm = NormMode::BudgetScale;
    bool normalize_each_layer = true;
};

/// Message MLP phi1: [x, node(2), edge(2)] (5) -> hidden -> msg_dim, ReLU.
/// Update MLP alpha: [x, n] (1 + msg_dim) -> hiddens -> 1, sigmoid output,
/// scaled by p_max. Weights are untied across layers.
struct GnnModel {
    GnnConfig cfg;
    double p_max = 1.0;
    FeatureStats stats;
    ad::ParamSet params;

    struct LayerRefs {
        int mw0, mb0, mw1, mb1;            // phi1
        int aw0, ab0, aw1, ab1, aw2, ab2;  // alpha
    };
    std::vector<LayerRefs> layers;
};

GnnModel make_gnn_model(const GnnConfig& cfg, double p_max, const FeatureStats& stats, Rng& rng);

/// Aggregated messages n_i^m (msg_dim reals per vertex) for layer s, given the
/// previous carry x (D x M powers). Layout: ((i * M) + m) * msg_dim + k.
std::vector<double> message_layer(const GnnModel& model, const GraphFeatures& g, const Mat& x_prev,
                                  int s);

/// Power head: p^_i^m = p_max * sigmoid(alpha([x_i^m, n_i^m])).
Mat update_layer(const GnnModel& model, const Mat& x_prev, const std::vector<double>& n, int s);

/// Budget normalization. The result satisfies sum_m p~_i^m <= p_max even after
/// floating-point rounding (a corrective rescale runs when the first pass
/// lands above the budget).
PowerAllocation normalize_power(const Mat& p_hat, double p_max);

/// Per-channel cap used by the independent-channel baseline.
Mat cap_power_per_channel(const Mat& p_hat, double p_max);

/// Lagrangian value in nats: -sum alpha R + sum lam (sum_m p - P_max)
/// + sum mu (R_min - sum_m R), rates evaluated on `inst`.
double lagrangian_loss(const NetworkInstance& inst, const PowerAllocation& p,
                       const std::vector<double>& mu, const std::vector<double>& lam);

/// Deterministic full forward pass (S message/update rounds + normalization).
PowerAllocation gnn_forward(const GnnModel& model, const NetworkInstance& inst);
PowerAllocation gnn_forward(const GnnModel& model, const GraphFeatures& feat);

/// Builds the training loss on `tape`: forward from `feat`, rates on
/// `rate_inst` (the true gains; they differ from the feature instance when
/// CSI is masked). Returns the scalar root. When non-null, p_out/rates_out
/// receive the final powers and per-entry rates in nats.
int build_loss_tape(ad::Tape& tape, const GnnModel& model, const GraphFeatures& feat,
                    const NetworkInstance& rate_inst, const std::vector<double>& mu,
                    const std::vector<double>& lam, Mat* p_out = nullptr, Mat* rates_out = nullptr);

/// Per-training-sample dual variables (the constraint brackets are sample
/// dependent, so duals are maintained per sample and persist across epochs).
struct DualState {
    std::vector<std::vector<double>> mu;
    std::vector<std::vector<double>> lam;
};

struct TrainConfig {
    int epochs = 100;
    double lr = 1e-3;        // phi_omega
    double lr_mu = 1e-2;     // phi_mu
    double lr_lambda = 1e-3; // phi_lambda, used only when train_lambda
    bool train_lambda = false;
    bool adam = false;       // optional adaptive step; plain SGD by default
    double mask_fraction = 0.0;  // mask applied to input features only
    uint64_t seed = 1;
};

struct TrainEpochStats {
    double avg_sum_rate_bits = 0.0;
    double violation_prob = 0.0;
    double avg_loss_nats = 0.0;
};

struct TrainTrace {
    std::vector<TrainEpochStats> epochs;
};

/// Primal-dual training: per sample, forward + loss with that sample's duals,
/// reverse gradient, descent on the weights, clamped ascent on the duals.
TrainTrace gnn_train(GnnModel& model, const Dataset& data, const TrainConfig& cfg,
                     DualState* duals_out = nullptr);

struct InferBatchResult {
    std::vector<PowerAllocation> allocations;
    std::vector<double> seconds;  // per-instance wall clock, I/O excluded
};

InferBatchResult infer_batch(const GnnModel& model, const Dataset& data);

/// Checkpoint round-trip (parameters + arch + stats + p_max).
void save_gnn_model(const GnnModel& model, const std::string& path);
GnnModel load_gnn_model(const std::string& path);

}  // namespace jcpa
