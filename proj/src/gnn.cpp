#include "jcpa/gnn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <json.hpp>

namespace jcpa {

namespace {

constexpr double kStdFloor = 1e-12;

double standardize(double x, double mean, double std) { return (x - mean) / std; }

struct Welford {
    double mean = 0.0, m2 = 0.0;
    int64_t n = 0;
    void push(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    double std() const {
        return n > 1 ? std::sqrt(m2 / static_cast<double>(n)) : 1.0;
    }
};

std::vector<int> mlp_dims_message(const GnnConfig& cfg) {
    return {5, cfg.msg_hidden, cfg.msg_dim};
}

std::vector<int> mlp_dims_update(const GnnConfig& cfg) {
    return {1 + cfg.msg_dim, cfg.upd_hidden1, cfg.upd_hidden2, 1};
}

// y = relu(W x + b), tape-free.
void affine_relu(const ad::ParamSet::Entry& w, const ad::ParamSet::Entry& b,
                 const double* x, double* y, bool apply_relu) {
    for (int r = 0; r < w.rows; ++r) {
        double acc = b.v[r];
        const double* wr = w.v.data() + static_cast<size_t>(r) * w.cols;
        for (int c = 0; c < w.cols; ++c) acc += wr[c] * x[c];
        y[r] = apply_relu && acc < 0.0 ? 0.0 : acc;
    }
}

}  // namespace

FeatureStats compute_feature_stats(const Dataset& data) {
    require(!data.instances.empty(), "compute_feature_stats: empty dataset");
    Welford direct, rmin, cross;
    for (const NetworkInstance& inst : data.instances) {
        const int d = inst.num_pairs;
        const int mc = inst.num_channels;
        for (int i = 0; i < d; ++i) {
            rmin.push(inst.r_min_bits[i]);
            for (int m = 0; m < mc; ++m) direct.push(inst.gains(i, i, m));
            for (int j = 0; j < d; ++j) {
                if (j == i) continue;
                for (int m = 0; m < mc; ++m) cross.push(inst.gains(i, j, m));
            }
        }
    }
    FeatureStats st;
    st.node_mean = {direct.mean, rmin.mean};
    st.node_std = {std::max(direct.std(), kStdFloor), std::max(rmin.std(), kStdFloor)};
    // Both edge components range over the same set of off-diagonal gains.
    st.edge_mean = {cross.mean, cross.mean};
    st.edge_std = {std::max(cross.std(), kStdFloor), std::max(cross.std(), kStdFloor)};
    return st;
}

GraphFeatures build_graph(const NetworkInstance& inst) {
    return build_graph(inst, FeatureStats{});
}

GraphFeatures build_graph(const NetworkInstance& inst, const FeatureStats& stats) {
    inst.validate();
    const int d = inst.num_pairs;
    const int mc = inst.num_channels;
    GraphFeatures g;
    g.num_pairs = d;
    g.num_channels = mc;
    g.stats = stats;
    g.node.resize(static_cast<size_t>(d) * mc * 2);
    g.edge.assign(static_cast<size_t>(d) * d * mc * 2, 0.0);
    for (int i = 0; i < d; ++i) {
        for (int m = 0; m < mc; ++m) {
            double* nf = g.node.data() + (static_cast<size_t>(i) * mc + m) * 2;
            nf[0] = standardize(inst.gains(i, i, m), stats.node_mean[0], stats.node_std[0]);
            nf[1] = standardize(inst.r_min_bits[i], stats.node_mean[1], stats.node_std[1]);
        }
        for (int j = 0; j < d; ++j) {
            if (j == i) continue;
            for (int m = 0; m < mc; ++m) {
                double* ef =
                    g.edge.data() + ((static_cast<size_t>(i) * d + j) * mc + m) * 2;
                ef[0] = standardize(inst.gains(i, j, m), stats.edge_mean[0], stats.edge_std[0]);
                ef[1] = standardize(inst.gains(j, i, m), stats.edge_mean[1], stats.edge_std[1]);
            }
        }
    }
    return g;
}

GnnModel make_gnn_model(const GnnConfig& cfg, double p_max, const FeatureStats& stats, Rng& rng) {
    require(cfg.num_layers >= 1, "make_gnn_model: need at least one layer");
    require(p_max > 0.0, "make_gnn_model: p_max must be > 0");
    GnnModel model;
    model.cfg = cfg;
    model.p_max = p_max;
    model.stats = stats;
    for (int s = 0; s < cfg.num_layers; ++s) {
        const std::string tag = std::to_string(s);
        ad::add_mlp_params(model.params, "phi1." + tag, mlp_dims_message(cfg), rng);
        ad::add_mlp_params(model.params, "alpha." + tag, mlp_dims_update(cfg), rng);
        GnnModel::LayerRefs r;
        r.mw0 = model.params.index_of("phi1." + tag + ".w0");
        r.mb0 = model.params.index_of("phi1." + tag + ".b0");
        r.mw1 = model.params.index_of("phi1." + tag + ".w1");
        r.mb1 = model.params.index_of("phi1." + tag + ".b1");
        r.aw0 = model.params.index_of("alpha." + tag + ".w0");
        r.ab0 = model.params.index_of("alpha." + tag + ".b0");
        r.aw1 = model.params.index_of("alpha." + tag + ".w1");
        r.ab1 = model.params.index_of("alpha." + tag + ".b1");
        r.aw2 = model.params.index_of("alpha." + tag + ".w2");
        r.ab2 = model.params.index_of("alpha." + tag + ".b2");
        model.layers.push_back(r);
    }
    return model;
}

std::vector<double> message_layer(const GnnModel& model, const GraphFeatures& g, const Mat& x_prev,
                                  int s) {
    require(s >= 0 && s < model.cfg.num_layers, "message_layer: bad layer index");
    require(x_prev.rows() == g.num_pairs && x_prev.cols() == g.num_channels,
            "message_layer: x dimensions mismatch");
    const int d = g.num_pairs;
    const int mc = g.num_channels;
    const int msg_dim = model.cfg.msg_dim;
    const auto& refs = model.layers[s];
    const auto& w0 = model.params.at(refs.mw0);
    const auto& b0 = model.params.at(refs.mb0);
    const auto& w1 = model.params.at(refs.mw1);
    const auto& b1 = model.params.at(refs.mb1);

    std::vector<double> out(static_cast<size_t>(d) * mc * msg_dim, 0.0);
    std::vector<double> in(5), hidden(model.cfg.msg_hidden), msg(msg_dim);
    for (int m = 0; m < mc; ++m) {
        for (int i = 0; i < d; ++i) {
            double* n_i = out.data() + (static_cast<size_t>(i) * mc + m) * msg_dim;
            const double* nf = g.node_at(i, m);
            for (int j = 0; j < d; ++j) {
                if (j == i) continue;
                const double* ef = g.edge_at(i, j, m);
                in[0] = x_prev(i, m);
                in[1] = nf[0];
                in[2] = nf[1];
                in[3] = ef[0];
                in[4] = ef[1];
                affine_relu(w0, b0, in.data(), hidden.data(), true);
                affine_relu(w1, b1, hidden.data(), msg.data(), true);
                for (int k = 0; k < msg_dim; ++k) n_i[k] += msg[k];
            }
        }
    }
    return out;
}

Mat update_layer(const GnnModel& model, const Mat& x_prev, const std::vector<double>& n, int s) {
    require(s >= 0 && s < model.cfg.num_layers, "update_layer: bad layer index");
    const int d = x_prev.rows();
    const int mc = x_prev.cols();
    const int msg_dim = model.cfg.msg_dim;
    require(n.size() == static_cast<size_t>(d) * mc * msg_dim,
            "update_layer: aggregated message size mismatch");
    const auto& refs = model.layers[s];
    const auto& w0 = model.params.at(refs.aw0);
    const auto& b0 = model.params.at(refs.ab0);
    const auto& w1 = model.params.at(refs.aw1);
    const auto& b1 = model.params.at(refs.ab1);
    const auto& w2 = model.params.at(refs.aw2);
    const auto& b2 = model.params.at(refs.ab2);

    Mat p_hat(d, mc);
    std::vector<double> in(1 + msg_dim), h1(model.cfg.upd_hidden1), h2(model.cfg.upd_hidden2);
    double z;
    for (int m = 0; m < mc; ++m) {
        for (int i = 0; i < d; ++i) {
            in[0] = x_prev(i, m);
            const double* n_i = n.data() + (static_cast<size_t>(i) * mc + m) * msg_dim;
            std::copy(n_i, n_i + msg_dim, in.begin() + 1);
            affine_relu(w0, b0, in.data(), h1.data(), true);
            affine_relu(w1, b1, h1.data(), h2.data(), true);
            affine_relu(w2, b2, h2.data(), &z, false);
            p_hat(i, m) = model.p_max / (1.0 + std::exp(-z));
        }
    }
    return p_hat;
}

PowerAllocation normalize_power(const Mat& p_hat, double p_max) {
    require(p_max > 0.0, "normalize_power: p_max must be > 0");
    PowerAllocation out;
    out.p = p_hat;
    for (int i = 0; i < out.p.rows(); ++i) {
        double total = 0.0;
        for (int m = 0; m < out.p.cols(); ++m) total += out.p(i, m);
        if (total <= p_max) continue;
        double scale = p_max / total;
        // Corrective rescale: rounding in the multiply/sum may land a hair
        // above the budget; shrink until the computed sum fits.
        for (int pass = 0; pass < 4; ++pass) {
            double acc = 0.0;
            for (int m = 0; m < out.p.cols(); ++m) acc += p_hat(i, m) * scale;
            if (acc <= p_max) break;
            scale *= p_max / acc;
        }
        for (int m = 0; m < out.p.cols(); ++m) out.p(i, m) = p_hat(i, m) * scale;
    }
    return out;
}

Mat cap_power_per_channel(const Mat& p_hat, double p_max) {
    require(p_max > 0.0, "cap_power_per_channel: p_max must be > 0");
    const double cap = p_max / p_hat.cols();
    Mat out = p_hat;
    for (auto& v : out.raw()) v = std::min(v, cap);
    return out;
}

double lagrangian_loss(const NetworkInstance& inst, const PowerAllocation& p,
                       const std::vector<double>& mu, const std::vector<double>& lam) {
    require(static_cast<int>(mu.size()) == inst.num_pairs &&
                static_cast<int>(lam.size()) == inst.num_pairs,
            "lagrangian_loss: dual length mismatch");
    const Mat rates_bits = compute_rates(inst, p);
    double loss = 0.0;
    for (int i = 0; i < inst.num_pairs; ++i) {
        double rate_nats = 0.0;
        double ptot = 0.0;
        for (int m = 0; m < inst.num_channels; ++m) {
            rate_nats += bits_to_nats(rates_bits(i, m));
            ptot += p.p(i, m);
        }
        loss -= inst.weights[i] * rate_nats;
        loss += lam[i] * (ptot - inst.p_max);
        loss += mu[i] * (bits_to_nats(inst.r_min_bits[i]) - rate_nats);
    }
    return loss;
}

PowerAllocation gnn_forward(const GnnModel& model, const NetworkInstance& inst) {
    return gnn_forward(model, build_graph(inst, model.stats));
}

PowerAllocation gnn_forward(const GnnModel& model, const GraphFeatures& feat) {
    const int d = feat.num_pairs;
    const int mc = feat.num_channels;
    Mat x(d, mc, 0.0);
    for (int s = 0; s < model.cfg.num_layers; ++s) {
        const std::vector<double> n = message_layer(model, feat, x, s);
        const Mat p_hat = update_layer(model, x, n, s);
        const bool last = s + 1 == model.cfg.num_layers;
        if (model.cfg.norm == NormMode::PerChannelCap) {
            x = cap_power_per_channel(p_hat, model.p_max);
        } else if (model.cfg.normalize_each_layer || last) {
            x = normalize_power(p_hat, model.p_max).p;
        } else {
            x = p_hat;
        }
    }
    PowerAllocation out;
    out.p = std::move(x);
    return out;
}

int build_loss_tape(ad::Tape& tape, const GnnModel& model, const GraphFeatures& feat,
                    const NetworkInstance& rate_inst, const std::vector<double>& mu,
                    const std::vector<double>& lam, Mat* p_out, Mat* rates_out) {
    const int d = feat.num_pairs;
    const int mc = feat.num_channels;
    require(rate_inst.num_pairs == d && rate_inst.num_channels == mc,
            "build_loss_tape: rate instance dimensions mismatch");
    require(static_cast<int>(mu.size()) == d && static_cast<int>(lam.size()) == d,
            "build_loss_tape: dual length mismatch");

    const int zero = tape.constant(0.0);
    const std::vector<double> zero_msg(model.cfg.msg_dim, 0.0);

    // Node/edge feature constants, shared across layers.
    std::vector<int> nf(static_cast<size_t>(d) * mc);
    std::vector<int> ef(static_cast<size_t>(d) * d * mc, -1);
    for (int i = 0; i < d; ++i) {
        for (int m = 0; m < mc; ++m) {
            nf[static_cast<size_t>(i) * mc + m] =
                tape.constant(std::span<const double>(feat.node_at(i, m), 2));
            for (int j = 0; j < d; ++j) {
                if (j == i) continue;
                ef[(static_cast<size_t>(i) * d + j) * mc + m] =
                    tape.constant(std::span<const double>(feat.edge_at(i, j, m), 2));
            }
        }
    }

    std::vector<int> x(static_cast<size_t>(d) * mc, zero);
    std::vector<int> msgs;
    msgs.reserve(d);
    for (int s = 0; s < model.cfg.num_layers; ++s) {
        const auto& refs = model.layers[s];
        std::vector<int> p_hat(static_cast<size_t>(d) * mc);
        for (int m = 0; m < mc; ++m) {
            for (int i = 0; i < d; ++i) {
                const int xi = x[static_cast<size_t>(i) * mc + m];
                msgs.clear();
                for (int j = 0; j < d; ++j) {
                    if (j == i) continue;
                    const int in = tape.concat(std::array<int, 3>{
                        xi, nf[static_cast<size_t>(i) * mc + m],
                        ef[(static_cast<size_t>(i) * d + j) * mc + m]});
                    const int h = tape.relu(tape.affine(refs.mw0, refs.mb0, in));
                    msgs.push_back(tape.relu(tape.affine(refs.mw1, refs.mb1, h)));
                }
                const int agg = msgs.empty() ? tape.constant(zero_msg) : tape.add_n(msgs);
                const int in = tape.concat(std::array<int, 2>{xi, agg});
                const int h1 = tape.relu(tape.affine(refs.aw0, refs.ab0, in));
                const int h2 = tape.relu(tape.affine(refs.aw1, refs.ab1, h1));
                const int z = tape.affine(refs.aw2, refs.ab2, h2);
                p_hat[static_cast<size_t>(i) * mc + m] =
                    tape.scale(tape.sigmoid(z), model.p_max);
            }
        }
        const bool last = s + 1 == model.cfg.num_layers;
        if (model.cfg.norm == NormMode::PerChannelCap) {
            for (auto& id : p_hat) id = tape.clamp_max(id, model.p_max / mc);
            x = p_hat;
        } else if (model.cfg.normalize_each_layer || last) {
            for (int i = 0; i < d; ++i) {
                const int tot = tape.sum(tape.concat(
                    std::span<const int>(p_hat.data() + static_cast<size_t>(i) * mc, mc)));
                const int factor =
                    tape.div(tape.constant(model.p_max), tape.clamp_min(tot, model.p_max));
                for (int m = 0; m < mc; ++m) {
                    auto& id = p_hat[static_cast<size_t>(i) * mc + m];
                    id = tape.mul(id, factor);
                }
            }
            x = p_hat;
        } else {
            x = p_hat;
        }
    }

    // Rates in nats on the true gains.
    std::vector<int> rate(static_cast<size_t>(d) * mc);
    std::vector<int> den_terms;
    for (int m = 0; m < mc; ++m) {
        for (int i = 0; i < d; ++i) {
            den_terms.clear();
            den_terms.push_back(tape.constant(rate_inst.noise[i]));
            for (int j = 0; j < d; ++j) {
                if (j == i) continue;
                const double g = rate_inst.gains(i, j, m);
                den_terms.push_back(tape.scale(x[static_cast<size_t>(j) * mc + m], g * g));
            }
            const double gd = rate_inst.gains(i, i, m);
            const int num = tape.scale(x[static_cast<size_t>(i) * mc + m], gd * gd);
            const int sinr = tape.div(num, tape.add_n(den_terms));
            rate[static_cast<size_t>(i) * mc + m] = tape.log(tape.add_const(sinr, 1.0));
        }
    }

    // Loss: -(alpha_i + mu_i) * sum_m R_i + lam_i * sum_m p_i, plus the
    // dual constants mu_i R_i^min - lam_i P_max.
    std::vector<int> terms;
    double const_part = 0.0;
    for (int i = 0; i < d; ++i) {
        const int user_rate = tape.add_n(
            std::span<const int>(rate.data() + static_cast<size_t>(i) * mc, mc));
        terms.push_back(tape.scale(user_rate, -(rate_inst.weights[i] + mu[i])));
        if (lam[i] != 0.0) {
            const int user_pow = tape.add_n(
                std::span<const int>(x.data() + static_cast<size_t>(i) * mc, mc));
            terms.push_back(tape.scale(user_pow, lam[i]));
        }
        const_part += mu[i] * bits_to_nats(rate_inst.r_min_bits[i]) - lam[i] * rate_inst.p_max;
    }
    const int root = tape.add_const(tape.add_n(terms), const_part);

    if (p_out) {
        *p_out = Mat(d, mc);
        for (int i = 0; i < d; ++i)
            for (int m = 0; m < mc; ++m)
                (*p_out)(i, m) = tape.scalar(x[static_cast<size_t>(i) * mc + m]);
    }
    if (rates_out) {
        *rates_out = Mat(d, mc);
        for (int i = 0; i < d; ++i)
            for (int m = 0; m < mc; ++m)
                (*rates_out)(i, m) = tape.scalar(rate[static_cast<size_t>(i) * mc + m]);
    }
    return root;
}

TrainTrace gnn_train(GnnModel& model, const Dataset& data, const TrainConfig& cfg,
                     DualState* duals_out) {
    require(!data.instances.empty(), "gnn_train: dataset must be nonempty");
    require(cfg.epochs >= 0, "gnn_train: epochs must be >= 0");
    const size_t n = data.instances.size();
    const int d = data.config.num_pairs;

    // Input features (masked when requested; the mask hides entries from the
    // GNN only, rates are always evaluated on the true gains).
    std::vector<GraphFeatures> feats;
    feats.reserve(n);
    for (size_t k = 0; k < n; ++k) {
        if (cfg.mask_fraction > 0.0) {
            Rng mask_rng(Rng::mix(Rng::mix(cfg.seed, Rng::salt("mask")), k));
            feats.push_back(build_graph(
                mask_csi(data.instances[k], cfg.mask_fraction, mask_rng), model.stats));
        } else {
            feats.push_back(build_graph(data.instances[k], model.stats));
        }
    }

    DualState duals;
    duals.mu.assign(n, std::vector<double>(d, 0.0));
    duals.lam.assign(n, std::vector<double>(d, 0.0));

    ad::GradBuffer grads(model.params);
    ad::AdamState adam(model.params);
    ad::Tape tape(model.params);
    TrainTrace trace;
    trace.epochs.reserve(cfg.epochs);

    Mat p_val, rates_nats;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double rate_sum = 0.0;
        double loss_sum = 0.0;
        int64_t violations = 0;
        for (size_t k = 0; k < n; ++k) {
            const NetworkInstance& inst = data.instances[k];
            tape.reset();
            int root;
            try {
                root = build_loss_tape(tape, model, feats[k], inst, duals.mu[k], duals.lam[k],
                                       &p_val, &rates_nats);
            } catch (const Error& e) {
                throw Error("gnn_train: non-finite loss at epoch " + std::to_string(epoch) +
                            " sample " + std::to_string(k) + ": " + e.what());
            }
            loss_sum += tape.scalar(root);
            grads.zero();
            tape.backward(root, grads);
            if (cfg.adam) {
                ad::apply_step_adam(model.params, grads, cfg.lr, adam);
            } else {
                ad::apply_step(model.params, grads, cfg.lr);
            }

            for (int i = 0; i < d; ++i) {
                double rate_nats = 0.0;
                double ptot = 0.0;
                for (int m = 0; m < inst.num_channels; ++m) {
                    rate_nats += rates_nats(i, m);
                    ptot += p_val(i, m);
                }
                rate_sum += inst.weights[i] * nats_to_bits(rate_nats);
                const double mu_bracket = bits_to_nats(inst.r_min_bits[i]) - rate_nats;
                duals.mu[k][i] = ad::dual_step(duals.mu[k][i], mu_bracket, cfg.lr_mu);
                if (cfg.train_lambda)
                    duals.lam[k][i] =
                        ad::dual_step(duals.lam[k][i], ptot - inst.p_max, cfg.lr_lambda);
                if (nats_to_bits(rate_nats) < inst.r_min_bits[i] - kRateSlackBits) ++violations;
            }
        }
        TrainEpochStats st;
        st.avg_sum_rate_bits = rate_sum / static_cast<double>(n);
        st.violation_prob =
            static_cast<double>(violations) / (static_cast<double>(n) * d);
        st.avg_loss_nats = loss_sum / static_cast<double>(n);
        trace.epochs.push_back(st);
    }
    if (duals_out) *duals_out = std::move(duals);
    return trace;
}

InferBatchResult infer_batch(const GnnModel& model, const Dataset& data) {
    InferBatchResult out;
    out.allocations.reserve(data.instances.size());
    out.seconds.reserve(data.instances.size());
    for (const NetworkInstance& inst : data.instances) {
        const auto t0 = std::chrono::steady_clock::now();
        PowerAllocation p = gnn_forward(model, inst);
        const auto t1 = std::chrono::steady_clock::now();
        out.allocations.push_back(std::move(p));
        out.seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    return out;
}

void save_gnn_model(const GnnModel& model, const std::string& path) {
    nlohmann::json meta;
    meta["kind"] = "jcpgnn-m";
    meta["num_layers"] = model.cfg.num_layers;
    meta["msg_hidden"] = model.cfg.msg_hidden;
    meta["msg_dim"] = model.cfg.msg_dim;
    meta["upd_hidden1"] = model.cfg.upd_hidden1;
    meta["upd_hidden2"] = model.cfg.upd_hidden2;
    meta["norm"] = model.cfg.norm == NormMode::BudgetScale ? "budget-scale" : "per-channel-cap";
    meta["normalize_each_layer"] = model.cfg.normalize_each_layer;
    meta["p_max"] = model.p_max;
    meta["stats"] = {{"node_mean", model.stats.node_mean},
                     {"node_std", model.stats.node_std},
                     {"edge_mean", model.stats.edge_mean},
                     {"edge_std", model.stats.edge_std}};
    ad::save_params(path, model.params, meta.dump());
}

GnnModel load_gnn_model(const std::string& path) {
    ad::ParamSet params;
    const std::string meta_json = ad::load_params(path, params);
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(meta_json);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("load_gnn_model: malformed metadata: ") + e.what());
    }
    require(meta.value("kind", "") == "jcpgnn-m", "load_gnn_model: not a jcpgnn-m checkpoint");
    GnnConfig cfg;
    cfg.num_layers = meta.at("num_layers").get<int>();
    cfg.msg_hidden = meta.at("msg_hidden").get<int>();
    cfg.msg_dim = meta.at("msg_dim").get<int>();
    cfg.upd_hidden1 = meta.at("upd_hidden1").get<int>();
    cfg.upd_hidden2 = meta.at("upd_hidden2").get<int>();
    cfg.norm = meta.at("norm").get<std::string>() == "per-channel-cap" ? NormMode::PerChannelCap
                                                                       : NormMode::BudgetScale;
    cfg.normalize_each_layer = meta.at("normalize_each_layer").get<bool>();

    FeatureStats stats;
    const auto& js = meta.at("stats");
    js.at("node_mean").get_to(stats.node_mean);
    js.at("node_std").get_to(stats.node_std);
    js.at("edge_mean").get_to(stats.edge_mean);
    js.at("edge_std").get_to(stats.edge_std);

    Rng rng(0);
    GnnModel model = make_gnn_model(cfg, meta.at("p_max").get<double>(), stats, rng);
    require(model.params.count() == params.count(), "load_gnn_model: tensor count mismatch");
    for (int t = 0; t < params.count(); ++t) {
        require(model.params.at(t).name == params.at(t).name &&
                    model.params.at(t).v.size() == params.at(t).v.size(),
                "load_gnn_model: tensor layout mismatch at " + params.at(t).name);
        model.params.at(t).v = params.at(t).v;
    }
    return model;
}

}  // namespace jcpa
