#pragma once

#include <vector>

#include "jcpa/model.hpp"
#include "jcpa/rng.hpp"

namespace jcpa {

/// Block-coordinate iterate of the QoS-constrained weighted-MMSE solver.
/// v holds square roots of the transmit powers; u the receiver scalars; e the
/// MSE values and w = 1/e their weights; mu and lam the QoS and power duals.
/// All logs in this module are natural; r_min is converted bits -> nats once
/// at entry.
struct WmmseState {
    Mat v, u, w, e;           // D x M each
    std::vector<double> mu;   // length D, >= 0
    std::vector<double> lam;  // length D, >= 0
    int iter = 0;
};

struct EwmmseConfig {
    int max_iters = 100;
    double mu_step = 0.05;        // rho, in nats
    double mu_decay = 0.99;       // geometric per-iteration decay of rho
    double bisect_tol = 1e-8;     // relative to p_max
    int bisect_max = 64;
    double convergence_tol = 0.0;  // objective-change early stop; 0 disables

    void validate() const;
};

struct WmmseTracePoint {
    double objective_nats = 0.0;
    double weighted_sum_rate_bits = 0.0;
    double worst_violation_bits = 0.0;
};

struct WmmseResult {
    PowerAllocation power;
    ConstraintResidual residual;
    std::vector<WmmseTracePoint> trace;
    int iters_run = 0;
    bool feasible = false;
};

/// Random v with each row scaled to the full power budget, u/e/w computed from
/// it, duals at zero.
WmmseState wmmse_init(const NetworkInstance& inst, Rng& rng);

/// u_i^m = |h_ii| v_i / (sum_j |h_ij v_j|^2 + sigma_i^2) for every (i, m).
void update_u(const NetworkInstance& inst, WmmseState& state);

/// e from the current (u, v), then w = 1/e. Throws if an MSE underflows.
void update_we(const NetworkInstance& inst, WmmseState& state);

/// Clamped dual ascent on the per-user QoS multiplier (bracket in nats).
void update_mu(const NetworkInstance& inst, WmmseState& state, double rho);

/// Closed-form v_i(lambda_i, mu_i) for all channels of user i.
std::vector<double> update_v_with_lambda(const NetworkInstance& inst, const WmmseState& state,
                                         int i, double lam_i);

/// Power dual: 0 when the unconstrained v already fits the budget, otherwise
/// the bisection root of sum_m v_i^m(lambda)^2 = p_max. The returned lambda is
/// taken from the feasible side of the bracket, so committed powers never
/// exceed the budget.
double solve_lambda(const NetworkInstance& inst, const WmmseState& state, int i,
                    const EwmmseConfig& cfg);

/// One outer iteration: per user, mu ascent, lambda solve, then per channel
/// v, u, (e, w) updates.
void wmmse_step(const NetworkInstance& inst, WmmseState& state, const EwmmseConfig& cfg);

/// sum_i sum_m alpha_i (w e - log w), nats.
double wmmse_objective(const NetworkInstance& inst, const WmmseState& state);

/// Max over (i, m) of |(log w - w e + 1) - ln(1 + SINR)| for a state whose u
/// is the MMSE receiver and whose w equals 1/e. Near zero by construction;
/// used as the numerical check of the rate identity behind the reformulation.
double verify_theorem1(const NetworkInstance& inst, const WmmseState& state);

WmmseResult ewmmse_solve(const NetworkInstance& inst, const EwmmseConfig& cfg, Rng& rng);

}  // namespace jcpa
