#include "jcpa/model.hpp"

#include <algorithm>
#include <cmath>

namespace jcpa {

void NetworkInstance::validate() const {
    require(num_pairs > 0, "NetworkInstance: num_pairs must be positive");
    require(num_channels > 0, "NetworkInstance: num_channels must be positive");
    require(gains.dim0() == num_pairs && gains.dim1() == num_pairs &&
                gains.dim2() == num_channels,
            "NetworkInstance: gains tensor shape mismatch");
    require(static_cast<int>(noise.size()) == num_pairs, "NetworkInstance: noise length mismatch");
    require(static_cast<int>(weights.size()) == num_pairs,
            "NetworkInstance: weights length mismatch");
    require(static_cast<int>(r_min_bits.size()) == num_pairs,
            "NetworkInstance: r_min_bits length mismatch");
    require(p_max > 0.0, "NetworkInstance: p_max must be positive");
    require(all_finite(gains.data(), gains.size()), "NetworkInstance: non-finite gain");
    for (size_t k = 0; k < gains.size(); ++k)
        require(gains.data()[k] >= 0.0, "NetworkInstance: negative gain magnitude");
    for (int i = 0; i < num_pairs; ++i) {
        require(std::isfinite(noise[i]) && noise[i] > 0.0, "NetworkInstance: noise must be > 0");
        require(std::isfinite(weights[i]) && weights[i] > 0.0,
                "NetworkInstance: weights must be > 0");
        require(std::isfinite(r_min_bits[i]) && r_min_bits[i] >= 0.0,
                "NetworkInstance: r_min_bits must be >= 0");
        // Degenerate pairs (no usable direct channel on any m) are rejected.
        bool live = false;
        for (int m = 0; m < num_channels; ++m) live = live || gains(i, i, m) > 0.0;
        require(live, "NetworkInstance: pair with all-zero direct gains");
    }
}

bool ConstraintResidual::feasible(double p_max) const {
    for (double s : power_slack)
        if (s < -kPowerSlackRel * p_max) return false;
    for (double s : rate_slack_bits)
        if (s < -kRateSlackBits) return false;
    return true;
}

namespace {

void check_pair(const NetworkInstance& inst, const PowerAllocation& p) {
    require(p.p.rows() == inst.num_pairs && p.p.cols() == inst.num_channels,
            "power allocation dimensions do not match instance");
    require(all_finite(p.p.data(), p.p.size()), "power allocation contains NaN/Inf");
    require(all_finite(inst.gains.data(), inst.gains.size()), "instance gains contain NaN/Inf");
}

}  // namespace

Mat compute_sinr(const NetworkInstance& inst, const PowerAllocation& p) {
    check_pair(inst, p);
    const int d = inst.num_pairs;
    const int mc = inst.num_channels;
    Mat sinr(d, mc);
    for (int m = 0; m < mc; ++m) {
        for (int i = 0; i < d; ++i) {
            double interf = 0.0;
            for (int j = 0; j < d; ++j) {
                if (j == i) continue;
                const double g = inst.gains(i, j, m);
                interf += g * g * p.p(j, m);
            }
            const double g = inst.gains(i, i, m);
            sinr(i, m) = g * g * p.p(i, m) / (interf + inst.noise[i]);
        }
    }
    return sinr;
}

Mat compute_rates(const NetworkInstance& inst, const PowerAllocation& p) {
    Mat r = compute_sinr(inst, p);
    for (auto& v : r.raw()) v = std::log2(1.0 + v);
    return r;
}

double sum_weighted_rate(const NetworkInstance& inst, const Mat& rates) {
    double total = 0.0;
    for (int i = 0; i < rates.rows(); ++i) {
        double user = 0.0;
        for (int m = 0; m < rates.cols(); ++m) user += rates(i, m);
        total += inst.weights[i] * user;
    }
    return total;
}

double sum_weighted_rate(const NetworkInstance& inst, const PowerAllocation& p) {
    return sum_weighted_rate(inst, compute_rates(inst, p));
}

ChannelAssignment assignment_from_power(const PowerAllocation& p, double tol) {
    require(tol >= 0.0, "assignment_from_power: tol must be >= 0");
    ChannelAssignment a;
    a.c = Mat(p.p.rows(), p.p.cols());
    for (int i = 0; i < p.p.rows(); ++i)
        for (int m = 0; m < p.p.cols(); ++m) a.c(i, m) = p.p(i, m) > tol ? 1.0 : 0.0;
    return a;
}

ChannelAssignment assignment_from_power(const PowerAllocation& p) {
    return assignment_from_power(p, 1e-12);
}

ConstraintResidual constraint_residuals(const NetworkInstance& inst, const PowerAllocation& p) {
    check_pair(inst, p);
    ConstraintResidual res;
    res.power_slack.resize(inst.num_pairs);
    res.rate_slack_bits.resize(inst.num_pairs);
    const Mat rates = compute_rates(inst, p);
    double worst = 0.0;
    for (int i = 0; i < inst.num_pairs; ++i) {
        double ptot = 0.0;
        double rtot = 0.0;
        for (int m = 0; m < inst.num_channels; ++m) {
            ptot += p.p(i, m);
            rtot += rates(i, m);
        }
        res.power_slack[i] = inst.p_max - ptot;
        res.rate_slack_bits[i] = rtot - inst.r_min_bits[i];
        worst = std::max(worst, -res.rate_slack_bits[i]);
    }
    res.worst_violation_bits = std::max(0.0, worst);
    return res;
}

Mat compute_rates_with_assignment(const NetworkInstance& inst, const ChannelAssignment& c,
                                  const PowerAllocation& p) {
    check_pair(inst, p);
    require(c.c.same_shape(p.p), "assignment dimensions do not match power allocation");
    const int d = inst.num_pairs;
    const int mc = inst.num_channels;
    Mat rates(d, mc);
    for (int m = 0; m < mc; ++m) {
        for (int i = 0; i < d; ++i) {
            double interf = 0.0;
            for (int j = 0; j < d; ++j) {
                if (j == i) continue;
                const double g = inst.gains(i, j, m);
                interf += g * g * p.p(j, m) * c.c(j, m);
            }
            const double g = inst.gains(i, i, m);
            const double sinr = g * g * p.p(i, m) * c.c(i, m) / (interf + inst.noise[i]);
            rates(i, m) = std::log2(1.0 + sinr);
        }
    }
    return rates;
}

}  // namespace jcpa
