#pragma once

#include <cstdint>
#include <vector>

#include "jcpa/tensor.hpp"

namespace jcpa {

/// One CSI snapshot of an interference-limited multi-channel network:
/// D transceiver pairs sharing M orthogonal channels.
///
/// gains(i, j, m) is the magnitude |h| of the channel from transmitter j to
/// receiver i on channel m (amplitude, not power). noise[i] is the receiver
/// noise power, constant across channels. r_min_bits[i] is the per-user
/// minimum total rate in bits/s/Hz.
struct NetworkInstance {
    int num_pairs = 0;
    int num_channels = 0;
    Ten3 gains;                    // D x D x M, |h_{i,j}^m| >= 0
    std::vector<double> noise;     // length D, sigma_i^2 > 0
    double p_max = 1.0;
    std::vector<double> weights;   // length D, alpha_i > 0
    std::vector<double> r_min_bits;  // length D, >= 0
    int64_t seed = 0;              // provenance: substream that generated this

    void validate() const;
};

/// D x M nonnegative power matrix p_i^m, the decision variable.
struct PowerAllocation {
    Mat p;  // D x M

    int num_pairs() const { return p.rows(); }
    int num_channels() const { return p.cols(); }
};

/// D x M binary channel-use indicator, derived from a PowerAllocation.
struct ChannelAssignment {
    Mat c;  // D x M, entries 0 or 1
};

/// Slack of the power and QoS constraints for one allocation.
struct ConstraintResidual {
    std::vector<double> power_slack;      // P_max - sum_m p_i^m
    std::vector<double> rate_slack_bits;  // sum_m R_i^m - R_i^min
    double worst_violation_bits = 0.0;    // max_i max(0, -rate_slack_bits[i])

    bool feasible(double p_max) const;
};

/// SINR_i^m = |h_ii|^2 p_i^m / (sum_{j!=i} |h_ij|^2 p_j^m + sigma_i^2).
/// Channel-use indicators are implicit: p = 0 gives SINR = 0.
Mat compute_sinr(const NetworkInstance& inst, const PowerAllocation& p);

/// Per-user per-channel rate log2(1 + SINR), bits/s/Hz.
Mat compute_rates(const NetworkInstance& inst, const PowerAllocation& p);

/// sum_m sum_i alpha_i R_i^m, bits/s/Hz.
double sum_weighted_rate(const NetworkInstance& inst, const PowerAllocation& p);

/// Weighted sum rate given a precomputed rate matrix.
double sum_weighted_rate(const NetworkInstance& inst, const Mat& rates);

/// c_i^m = 1 iff p_i^m > tol. Solvers emit tiny positive residues, hence the
/// tolerance; pass tol = 0 for the exact p > 0 rule.
ChannelAssignment assignment_from_power(const PowerAllocation& p, double tol);

/// Default tolerance: 1e-12 * p_max.
ChannelAssignment assignment_from_power(const PowerAllocation& p);

ConstraintResidual constraint_residuals(const NetworkInstance& inst, const PowerAllocation& p);

/// Rate matrix of the explicit-assignment formulation: SINR uses c in both the
/// desired and interference terms. Used by the equivalence property tests.
Mat compute_rates_with_assignment(const NetworkInstance& inst, const ChannelAssignment& c,
                                  const PowerAllocation& p);

}  // namespace jcpa
