#pragma once

#include "jcpa/gnn.hpp"
#include "jcpa/model.hpp"

namespace jcpa {

/// Full power on the single channel with the largest direct gain, zero
/// elsewhere; ties go to the lowest channel index. Feasible for the power
/// constraints by construction; QoS violations are reported, never patched.
PowerAllocation heuristic_max_gain(const NetworkInstance& inst);

/// Independent-channel baseline: the same message-passing architecture with
/// the joint budget normalization replaced by the per-channel cap
/// min(p^, P_max / M). One model is shared across subgraphs.
GnnModel make_icp_gnn_model(const GnnConfig& cfg, double p_max, const FeatureStats& stats,
                            Rng& rng);

}  // namespace jcpa
