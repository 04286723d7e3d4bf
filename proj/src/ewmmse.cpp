#include "jcpa/ewmmse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace jcpa {

namespace {

// sum_j |h_ij v_j|^2 + sigma^2 on channel m at receiver i.
double received_power(const NetworkInstance& inst, const Mat& v, int i, int m) {
    double total = inst.noise[i];
    for (int j = 0; j < inst.num_pairs; ++j) {
        const double hv = inst.gains(i, j, m) * v(j, m);
        total += hv * hv;
    }
    return total;
}

double mse_value(const NetworkInstance& inst, const WmmseState& s, int i, int m) {
    const double direct = s.u(i, m) * inst.gains(i, i, m) * s.v(i, m) - 1.0;
    double e = direct * direct;
    for (int j = 0; j < inst.num_pairs; ++j) {
        if (j == i) continue;
        const double cross = s.u(i, m) * inst.gains(i, j, m) * s.v(j, m);
        e += cross * cross;
    }
    e += s.u(i, m) * s.u(i, m) * inst.noise[i];
    return e;
}

void update_we_entry(const NetworkInstance& inst, WmmseState& s, int i, int m) {
    const double e = mse_value(inst, s, i, m);
    require(e >= 1e-300, "update_we: MSE underflow at pair " + std::to_string(i) + " channel " +
                             std::to_string(m));
    s.e(i, m) = e;
    s.w(i, m) = 1.0 / e;
}

// Coefficients of v_i^m(lambda) = a / (b + lambda).
struct VCoeffs {
    std::vector<double> a, b;  // length M
};

VCoeffs v_coefficients(const NetworkInstance& inst, const WmmseState& s, int i) {
    const int mc = inst.num_channels;
    VCoeffs c;
    c.a.resize(mc);
    c.b.resize(mc);
    const double mu1 = 1.0 + s.mu[i];
    for (int m = 0; m < mc; ++m) {
        const double uh = s.u(i, m) * inst.gains(i, i, m);
        c.a[m] = mu1 * s.w(i, m) * uh;
        double b = mu1 * s.w(i, m) * uh * uh;
        for (int j = 0; j < inst.num_pairs; ++j) {
            if (j == i) continue;
            const double uhj = s.u(j, m) * inst.gains(j, i, m);
            b += s.w(j, m) * uhj * uhj;
        }
        c.b[m] = b;
    }
    return c;
}

double power_at_lambda(const VCoeffs& c, double lam) {
    double total = 0.0;
    for (size_t m = 0; m < c.a.size(); ++m) {
        const double den = c.b[m] + lam;
        if (den > 0.0) {
            const double v = c.a[m] / den;
            total += v * v;
        }
    }
    return total;
}

// Constraint bracket of the QoS dual, in nats:
// sum_m w e - sum_m log w - M + r_min.
double mu_bracket(const NetworkInstance& inst, const WmmseState& s, int i) {
    double bracket = bits_to_nats(inst.r_min_bits[i]) - inst.num_channels;
    for (int m = 0; m < inst.num_channels; ++m)
        bracket += s.w(i, m) * s.e(i, m) - std::log(s.w(i, m));
    return bracket;
}

}  // namespace

void EwmmseConfig::validate() const {
    require(max_iters > 0, "EwmmseConfig: max_iters must be > 0");
    require(mu_step > 0.0, "EwmmseConfig: mu_step must be > 0");
    require(mu_decay > 0.0 && mu_decay <= 1.0, "EwmmseConfig: mu_decay must be in (0, 1]");
    require(bisect_tol > 0.0, "EwmmseConfig: bisect_tol must be > 0");
    require(bisect_max > 0, "EwmmseConfig: bisect_max must be > 0");
    require(convergence_tol >= 0.0, "EwmmseConfig: convergence_tol must be >= 0");
}

WmmseState wmmse_init(const NetworkInstance& inst, Rng& rng) {
    inst.validate();
    const int d = inst.num_pairs;
    const int mc = inst.num_channels;
    WmmseState s;
    s.v = Mat(d, mc);
    s.u = Mat(d, mc);
    s.w = Mat(d, mc);
    s.e = Mat(d, mc);
    s.mu.assign(d, 0.0);
    s.lam.assign(d, 0.0);
    for (int i = 0; i < d; ++i) {
        double norm2 = 0.0;
        for (int m = 0; m < mc; ++m) {
            s.v(i, m) = rng.uniform();
            norm2 += s.v(i, m) * s.v(i, m);
        }
        const double scale = norm2 > 0.0 ? std::sqrt(inst.p_max / norm2) : 0.0;
        for (int m = 0; m < mc; ++m) s.v(i, m) *= scale;
    }
    update_u(inst, s);
    update_we(inst, s);
    return s;
}

void update_u(const NetworkInstance& inst, WmmseState& s) {
    for (int i = 0; i < inst.num_pairs; ++i)
        for (int m = 0; m < inst.num_channels; ++m)
            s.u(i, m) = inst.gains(i, i, m) * s.v(i, m) / received_power(inst, s.v, i, m);
}

void update_we(const NetworkInstance& inst, WmmseState& s) {
    for (int i = 0; i < inst.num_pairs; ++i)
        for (int m = 0; m < inst.num_channels; ++m) update_we_entry(inst, s, i, m);
}

void update_mu(const NetworkInstance& inst, WmmseState& s, double rho) {
    for (int i = 0; i < inst.num_pairs; ++i)
        s.mu[i] = std::max(0.0, s.mu[i] + rho * mu_bracket(inst, s, i));
}

std::vector<double> update_v_with_lambda(const NetworkInstance& inst, const WmmseState& s, int i,
                                         double lam_i) {
    const VCoeffs c = v_coefficients(inst, s, i);
    std::vector<double> v(inst.num_channels, 0.0);
    for (int m = 0; m < inst.num_channels; ++m) {
        const double den = c.b[m] + lam_i;
        v[m] = den > 0.0 ? std::max(0.0, c.a[m] / den) : 0.0;
    }
    return v;
}

double solve_lambda(const NetworkInstance& inst, const WmmseState& s, int i,
                    const EwmmseConfig& cfg) {
    const VCoeffs c = v_coefficients(inst, s, i);
    if (power_at_lambda(c, 0.0) <= inst.p_max) return 0.0;

    // Doubling bracket from [0, 1]; power is strictly decreasing in lambda.
    double hi = 1.0;
    int guard = 0;
    while (power_at_lambda(c, hi) > inst.p_max) {
        hi *= 2.0;
        require(++guard < 200, "solve_lambda: bracket expansion failed");
    }
    double lo = hi > 1.0 ? hi / 2.0 : 0.0;
    const double tol = cfg.bisect_tol * inst.p_max;
    double hi_power = power_at_lambda(c, hi);
    // Bisect until the bracket is exhausted at working precision (the root is
    // returned from the feasible side, so committed powers stay within the
    // budget). Running past bisect_tol keeps the v-block update an exact
    // constrained minimizer up to rounding, which the descent property needs.
    for (int it = 0; it < cfg.bisect_max && hi - lo > 1e-17 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double pm = power_at_lambda(c, mid);
        if (pm > inst.p_max) {
            lo = mid;
        } else {
            hi = mid;
            hi_power = pm;
        }
    }
    if (inst.p_max - hi_power <= tol) return hi;
    throw Error("solve_lambda: bisection budget exceeded, residual " +
                std::to_string(inst.p_max - hi_power));
}

void wmmse_step(const NetworkInstance& inst, WmmseState& s, const EwmmseConfig& cfg) {
    const double rho = cfg.mu_step * std::pow(cfg.mu_decay, s.iter);
    for (int i = 0; i < inst.num_pairs; ++i) {
        s.mu[i] = std::max(0.0, s.mu[i] + rho * mu_bracket(inst, s, i));
        s.lam[i] = solve_lambda(inst, s, i, cfg);
        const std::vector<double> vi = update_v_with_lambda(inst, s, i, s.lam[i]);
        for (int m = 0; m < inst.num_channels; ++m) {
            s.v(i, m) = vi[m];
            s.u(i, m) = inst.gains(i, i, m) * s.v(i, m) / received_power(inst, s.v, i, m);
            update_we_entry(inst, s, i, m);
        }
    }
    ++s.iter;
}

double wmmse_objective(const NetworkInstance& inst, const WmmseState& s) {
    // The MSE is a function of (u, v); it is recomputed here rather than read
    // from the per-user cache, which goes stale as soon as another user's v
    // changes. w is the optimization variable and enters as stored.
    double total = 0.0;
    for (int i = 0; i < inst.num_pairs; ++i)
        for (int m = 0; m < inst.num_channels; ++m)
            total += inst.weights[i] *
                     (s.w(i, m) * mse_value(inst, s, i, m) - std::log(s.w(i, m)));
    return total;
}

double verify_theorem1(const NetworkInstance& inst, const WmmseState& s) {
    PowerAllocation p;
    p.p = Mat(inst.num_pairs, inst.num_channels);
    for (int i = 0; i < inst.num_pairs; ++i)
        for (int m = 0; m < inst.num_channels; ++m) p.p(i, m) = s.v(i, m) * s.v(i, m);
    const Mat sinr = compute_sinr(inst, p);
    double worst = 0.0;
    for (int i = 0; i < inst.num_pairs; ++i) {
        for (int m = 0; m < inst.num_channels; ++m) {
            const double lhs =
                std::log(s.w(i, m)) - s.w(i, m) * s.e(i, m) + 1.0;
            const double rhs = std::log1p(sinr(i, m));
            worst = std::max(worst, std::abs(lhs - rhs));
        }
    }
    return worst;
}

WmmseResult ewmmse_solve(const NetworkInstance& inst, const EwmmseConfig& cfg, Rng& rng) {
    cfg.validate();
    WmmseState s = wmmse_init(inst, rng);
    WmmseResult out;
    out.trace.reserve(cfg.max_iters);

    Mat best_p;
    double best_violation = std::numeric_limits<double>::infinity();
    double best_rate = -std::numeric_limits<double>::infinity();
    double prev_objective = std::numeric_limits<double>::infinity();

    PowerAllocation p;
    p.p = Mat(inst.num_pairs, inst.num_channels);
    for (int t = 0; t < cfg.max_iters; ++t) {
        wmmse_step(inst, s, cfg);

        for (int i = 0; i < inst.num_pairs; ++i)
            for (int m = 0; m < inst.num_channels; ++m) p.p(i, m) = s.v(i, m) * s.v(i, m);
        const ConstraintResidual res = constraint_residuals(inst, p);
        const double rate = sum_weighted_rate(inst, p);
        const double obj = wmmse_objective(inst, s);
        out.trace.push_back({obj, rate, res.worst_violation_bits});

        if (res.worst_violation_bits < best_violation ||
            (res.worst_violation_bits == best_violation && rate > best_rate)) {
            best_violation = res.worst_violation_bits;
            best_rate = rate;
            best_p = p.p;
        }
        out.iters_run = t + 1;
        if (cfg.convergence_tol > 0.0 && std::abs(prev_objective - obj) < cfg.convergence_tol)
            break;
        prev_objective = obj;
    }

    // Final iterate when it meets the constraints (the literal output of the
    // iteration); otherwise the minimum-violation iterate seen.
    ConstraintResidual final_res = constraint_residuals(inst, p);
    if (!final_res.feasible(inst.p_max) && best_p.size() > 0) p.p = best_p;
    out.power = p;
    out.residual = constraint_residuals(inst, p);
    out.feasible = out.residual.feasible(inst.p_max);
    return out;
}

}  // namespace jcpa
