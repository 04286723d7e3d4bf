#pragma once

#include <jcpa/chansim.hpp>
#include <jcpa/model.hpp>
#include <jcpa/rng.hpp>

namespace jcpa::test {

/// Instance with i.i.d. U(0,1) gain magnitudes; handy where the geometric
/// channel model is irrelevant.
inline NetworkInstance random_instance(Rng& rng, int d, int mc, double noise = 1.0,
                                       double p_max = 1.0, double r_min = 0.0) {
    NetworkInstance inst;
    inst.num_pairs = d;
    inst.num_channels = mc;
    inst.gains = Ten3(d, d, mc);
    for (auto& g : inst.gains.raw()) g = rng.uniform(0.05, 1.0);
    inst.noise.assign(d, noise);
    inst.p_max = p_max;
    inst.weights.assign(d, 1.0);
    inst.r_min_bits.assign(d, r_min);
    inst.validate();
    return inst;
}

/// Random power matrix satisfying the per-user budget; entries are zero with
/// probability p_zero, otherwise bounded well away from the assignment
/// tolerance.
inline PowerAllocation random_feasible_power(Rng& rng, const NetworkInstance& inst,
                                             double p_zero = 0.3) {
    PowerAllocation p;
    p.p = Mat(inst.num_pairs, inst.num_channels);
    for (int i = 0; i < inst.num_pairs; ++i) {
        double total = 0.0;
        for (int m = 0; m < inst.num_channels; ++m) {
            const double v = rng.uniform() < p_zero ? 0.0 : rng.uniform(0.01, 1.0);
            p.p(i, m) = v;
            total += v;
        }
        if (total > inst.p_max) {
            const double scale = inst.p_max / total * rng.uniform(0.2, 1.0);
            for (int m = 0; m < inst.num_channels; ++m) p.p(i, m) *= scale;
        }
    }
    return p;
}

}  // namespace jcpa::test
