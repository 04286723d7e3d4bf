#include "jcpa/baselines.hpp"

namespace jcpa {

PowerAllocation heuristic_max_gain(const NetworkInstance& inst) {
    inst.validate();
    PowerAllocation out;
    out.p = Mat(inst.num_pairs, inst.num_channels, 0.0);
    for (int i = 0; i < inst.num_pairs; ++i) {
        int best = 0;
        for (int m = 1; m < inst.num_channels; ++m)
            if (inst.gains(i, i, m) > inst.gains(i, i, best)) best = m;
        out.p(i, best) = inst.p_max;
    }
    return out;
}

GnnModel make_icp_gnn_model(const GnnConfig& cfg, double p_max, const FeatureStats& stats,
                            Rng& rng) {
    GnnConfig icp = cfg;
    icp.norm = NormMode::PerChannelCap;
    return make_gnn_model(icp, p_max, stats, rng);
}

}  // namespace jcpa
