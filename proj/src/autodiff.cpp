#include "jcpa/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace jcpa::ad {

namespace {
constexpr double kLogClamp = 1e-30;
constexpr char kCkptMagic[8] = {'J', 'C', 'P', 'A', 'M', 'D', 'L', '1'};
}  // namespace

int ParamSet::add(const std::string& name, int rows, int cols) {
    require(rows > 0 && cols > 0, "ParamSet::add: dimensions must be positive");
    require(index_of(name) < 0, "ParamSet::add: duplicate name " + name);
    Entry e;
    e.name = name;
    e.rows = rows;
    e.cols = cols;
    e.v.assign(static_cast<size_t>(rows) * cols, 0.0);
    entries_.push_back(std::move(e));
    return static_cast<int>(entries_.size()) - 1;
}

int ParamSet::index_of(const std::string& name) const {
    for (size_t k = 0; k < entries_.size(); ++k)
        if (entries_[k].name == name) return static_cast<int>(k);
    return -1;
}

size_t ParamSet::total_size() const {
    size_t n = 0;
    for (const Entry& e : entries_) n += e.v.size();
    return n;
}

bool ParamSet::all_values_finite() const {
    for (const Entry& e : entries_)
        for (double x : e.v)
            if (!std::isfinite(x)) return false;
    return true;
}

GradBuffer::GradBuffer(const ParamSet& params) {
    grads_.resize(params.count());
    for (int k = 0; k < params.count(); ++k) grads_[k].assign(params.at(k).v.size(), 0.0);
}

void GradBuffer::zero() {
    for (auto& g : grads_) std::fill(g.begin(), g.end(), 0.0);
}

void add_mlp_params(ParamSet& params, const std::string& prefix, const std::vector<int>& dims,
                    Rng& rng, InitScheme scheme) {
    require(dims.size() >= 2, "add_mlp_params: need at least input and output dims");
    for (size_t k = 0; k + 1 < dims.size(); ++k) {
        const int fan_in = dims[k];
        const int fan_out = dims[k + 1];
        const int w = params.add(prefix + ".w" + std::to_string(k), fan_out, fan_in);
        params.add(prefix + ".b" + std::to_string(k), fan_out, 1);
        if (scheme == InitScheme::GlorotUniform) {
            const double bound = std::sqrt(6.0 / (fan_in + fan_out));
            for (double& x : params.at(w).v) x = rng.uniform(-bound, bound);
        }
    }
}

// ---------------------------------------------------------------------------
// Tape
// ---------------------------------------------------------------------------

void Tape::reset() {
    nodes_.clear();
    values_.clear();
    args_.clear();
}

int Tape::push(OpKind op, int len) {
    Node n;
    n.op = op;
    n.off = static_cast<int>(values_.size());
    n.len = len;
    values_.resize(values_.size() + len, 0.0);
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
}

void Tape::check_finite(int id, const char* what) const {
    const Node& n = nodes_[id];
    for (int k = 0; k < n.len; ++k) {
        if (!std::isfinite(values_[n.off + k]))
            throw Error(std::string("tape: non-finite value in ") + what + " node " +
                        std::to_string(id));
    }
}

int Tape::constant(std::span<const double> v) {
    const int id = push(OpKind::Const, static_cast<int>(v.size()));
    std::copy(v.begin(), v.end(), val(id));
    check_finite(id, "const");
    return id;
}

int Tape::constant(double v) { return constant(std::span<const double>(&v, 1)); }

int Tape::affine(int w_idx, int b_idx, int x) {
    const auto& w = params_->at(w_idx);
    const auto& b = params_->at(b_idx);
    const Node& xn = nodes_[x];
    require(w.cols == xn.len, "affine: weight cols != input length");
    require(b.rows == w.rows && b.cols == 1, "affine: bias shape mismatch");
    const int id = push(OpKind::Affine, w.rows);
    Node& n = nodes_[id];
    n.a = x;
    n.w = w_idx;
    n.bias = b_idx;
    const double* xv = val(x);
    double* yv = val(id);
    for (int r = 0; r < w.rows; ++r) {
        double acc = b.v[r];
        const double* wr = w.v.data() + static_cast<size_t>(r) * w.cols;
        for (int c = 0; c < w.cols; ++c) acc += wr[c] * xv[c];
        yv[r] = acc;
    }
    check_finite(id, "affine");
    return id;
}

int Tape::relu(int x) {
    const int id = push(OpKind::Relu, nodes_[x].len);
    nodes_[id].a = x;
    const double* xv = val(x);
    double* yv = val(id);
    for (int k = 0; k < nodes_[id].len; ++k) yv[k] = xv[k] > 0.0 ? xv[k] : 0.0;
    return id;
}

int Tape::sigmoid(int x) {
    const int id = push(OpKind::Sigmoid, nodes_[x].len);
    nodes_[id].a = x;
    const double* xv = val(x);
    double* yv = val(id);
    for (int k = 0; k < nodes_[id].len; ++k) yv[k] = 1.0 / (1.0 + std::exp(-xv[k]));
    return id;
}

#define JCPA_BINARY_OP(NAME, KIND, EXPR)                                             \
    int Tape::NAME(int a, int b) {                                                   \
        require(nodes_[a].len == nodes_[b].len, #NAME ": operand length mismatch");  \
        const int id = push(OpKind::KIND, nodes_[a].len);                            \
        nodes_[id].a = a;                                                            \
        nodes_[id].b = b;                                                            \
        const double* av = val(a);                                                   \
        const double* bv = val(b);                                                   \
        double* yv = val(id);                                                        \
        for (int k = 0; k < nodes_[id].len; ++k) yv[k] = EXPR;                       \
        check_finite(id, #NAME);                                                     \
        return id;                                                                   \
    }

JCPA_BINARY_OP(add, Add, av[k] + bv[k])
JCPA_BINARY_OP(sub, Sub, av[k] - bv[k])
JCPA_BINARY_OP(mul, Mul, av[k] * bv[k])
JCPA_BINARY_OP(div, Div, av[k] / bv[k])
#undef JCPA_BINARY_OP

int Tape::add_n(std::span<const int> xs) {
    require(!xs.empty(), "add_n: empty operand list");
    const int len = nodes_[xs[0]].len;
    for (int x : xs) require(nodes_[x].len == len, "add_n: operand length mismatch");
    const int id = push(OpKind::AddN, len);
    nodes_[id].args_off = static_cast<int>(args_.size());
    nodes_[id].args_n = static_cast<int>(xs.size());
    args_.insert(args_.end(), xs.begin(), xs.end());
    double* yv = val(id);
    for (int x : xs) {
        const double* xv = val(x);
        for (int k = 0; k < len; ++k) yv[k] += xv[k];
    }
    check_finite(id, "add_n");
    return id;
}

int Tape::concat(std::span<const int> xs) {
    require(!xs.empty(), "concat: empty operand list");
    int len = 0;
    for (int x : xs) len += nodes_[x].len;
    const int id = push(OpKind::Concat, len);
    nodes_[id].args_off = static_cast<int>(args_.size());
    nodes_[id].args_n = static_cast<int>(xs.size());
    args_.insert(args_.end(), xs.begin(), xs.end());
    double* yv = val(id);
    for (int x : xs) {
        const double* xv = val(x);
        yv = std::copy(xv, xv + nodes_[x].len, yv);
    }
    return id;
}

int Tape::sum(int x) {
    const int id = push(OpKind::Sum, 1);
    nodes_[id].a = x;
    double acc = 0.0;
    const double* xv = val(x);
    for (int k = 0; k < nodes_[x].len; ++k) acc += xv[k];
    *val(id) = acc;
    check_finite(id, "sum");
    return id;
}

int Tape::log(int x) {
    const int id = push(OpKind::Log, nodes_[x].len);
    nodes_[id].a = x;
    const double* xv = val(x);
    double* yv = val(id);
    for (int k = 0; k < nodes_[id].len; ++k) yv[k] = std::log(std::max(xv[k], kLogClamp));
    check_finite(id, "log");
    return id;
}

int Tape::clamp_min(int x, double c) {
    const int id = push(OpKind::ClampMin, nodes_[x].len);
    nodes_[id].a = x;
    nodes_[id].c = c;
    const double* xv = val(x);
    double* yv = val(id);
    for (int k = 0; k < nodes_[id].len; ++k) yv[k] = std::max(xv[k], c);
    return id;
}

int Tape::clamp_max(int x, double c) {
    const int id = push(OpKind::ClampMax, nodes_[x].len);
    nodes_[id].a = x;
    nodes_[id].c = c;
    const double* xv = val(x);
    double* yv = val(id);
    for (int k = 0; k < nodes_[id].len; ++k) yv[k] = std::min(xv[k], c);
    return id;
}

int Tape::scale(int x, double c) {
    const int id = push(OpKind::Scale, nodes_[x].len);
    nodes_[id].a = x;
    nodes_[id].c = c;
    const double* xv = val(x);
    double* yv = val(id);
    for (int k = 0; k < nodes_[id].len; ++k) yv[k] = c * xv[k];
    check_finite(id, "scale");
    return id;
}

int Tape::add_const(int x, double c) {
    const int id = push(OpKind::AddConst, nodes_[x].len);
    nodes_[id].a = x;
    nodes_[id].c = c;
    const double* xv = val(x);
    double* yv = val(id);
    for (int k = 0; k < nodes_[id].len; ++k) yv[k] = xv[k] + c;
    check_finite(id, "add_const");
    return id;
}

std::span<const double> Tape::value(int id) const {
    const Node& n = nodes_[id];
    return {values_.data() + n.off, static_cast<size_t>(n.len)};
}

double Tape::scalar(int id) const {
    require(nodes_[id].len == 1, "scalar: node is not scalar");
    return values_[nodes_[id].off];
}

void Tape::backward(int root, GradBuffer& grads) {
    require(root >= 0 && root < num_nodes(), "backward: bad root id");
    require(nodes_[root].len == 1, "backward: root is not scalar");
    adjoint_.assign(values_.size(), 0.0);
    adjoint_[nodes_[root].off] = 1.0;

    for (int id = root; id >= 0; --id) {
        const Node& n = nodes_[id];
        const double* dy = adjoint_.data() + n.off;
        switch (n.op) {
            case OpKind::Const:
                break;
            case OpKind::Affine: {
                const auto& w = params_->at(n.w);
                const double* xv = val(n.a);
                double* dx = adjoint_.data() + nodes_[n.a].off;
                double* dw = grads.at(n.w).data();
                double* db = grads.at(n.bias).data();
                for (int r = 0; r < w.rows; ++r) {
                    const double g = dy[r];
                    if (g == 0.0) continue;
                    const double* wr = w.v.data() + static_cast<size_t>(r) * w.cols;
                    double* dwr = dw + static_cast<size_t>(r) * w.cols;
                    for (int c = 0; c < w.cols; ++c) {
                        dx[c] += wr[c] * g;
                        dwr[c] += xv[c] * g;
                    }
                    db[r] += g;
                }
                break;
            }
            case OpKind::Relu: {
                const double* xv = val(n.a);
                double* dx = adjoint_.data() + nodes_[n.a].off;
                for (int k = 0; k < n.len; ++k)
                    if (xv[k] > 0.0) dx[k] += dy[k];
                break;
            }
            case OpKind::Sigmoid: {
                const double* yv = val(id);
                double* dx = adjoint_.data() + nodes_[n.a].off;
                for (int k = 0; k < n.len; ++k) dx[k] += dy[k] * yv[k] * (1.0 - yv[k]);
                break;
            }
            case OpKind::Add: {
                double* da = adjoint_.data() + nodes_[n.a].off;
                double* db = adjoint_.data() + nodes_[n.b].off;
                for (int k = 0; k < n.len; ++k) {
                    da[k] += dy[k];
                    db[k] += dy[k];
                }
                break;
            }
            case OpKind::Sub: {
                double* da = adjoint_.data() + nodes_[n.a].off;
                double* db = adjoint_.data() + nodes_[n.b].off;
                for (int k = 0; k < n.len; ++k) {
                    da[k] += dy[k];
                    db[k] -= dy[k];
                }
                break;
            }
            case OpKind::Mul: {
                const double* av = val(n.a);
                const double* bv = val(n.b);
                double* da = adjoint_.data() + nodes_[n.a].off;
                double* db = adjoint_.data() + nodes_[n.b].off;
                for (int k = 0; k < n.len; ++k) {
                    da[k] += dy[k] * bv[k];
                    db[k] += dy[k] * av[k];
                }
                break;
            }
            case OpKind::Div: {
                const double* av = val(n.a);
                const double* bv = val(n.b);
                double* da = adjoint_.data() + nodes_[n.a].off;
                double* db = adjoint_.data() + nodes_[n.b].off;
                for (int k = 0; k < n.len; ++k) {
                    da[k] += dy[k] / bv[k];
                    db[k] -= dy[k] * av[k] / (bv[k] * bv[k]);
                }
                break;
            }
            case OpKind::AddN: {
                for (int t = 0; t < n.args_n; ++t) {
                    const int x = args_[n.args_off + t];
                    double* dx = adjoint_.data() + nodes_[x].off;
                    for (int k = 0; k < n.len; ++k) dx[k] += dy[k];
                }
                break;
            }
            case OpKind::Concat: {
                int pos = 0;
                for (int t = 0; t < n.args_n; ++t) {
                    const int x = args_[n.args_off + t];
                    double* dx = adjoint_.data() + nodes_[x].off;
                    for (int k = 0; k < nodes_[x].len; ++k) dx[k] += dy[pos + k];
                    pos += nodes_[x].len;
                }
                break;
            }
            case OpKind::Sum: {
                double* dx = adjoint_.data() + nodes_[n.a].off;
                for (int k = 0; k < nodes_[n.a].len; ++k) dx[k] += dy[0];
                break;
            }
            case OpKind::Log: {
                const double* xv = val(n.a);
                double* dx = adjoint_.data() + nodes_[n.a].off;
                for (int k = 0; k < n.len; ++k)
                    if (xv[k] > kLogClamp) dx[k] += dy[k] / xv[k];
                break;
            }
            case OpKind::ClampMin: {
                const double* xv = val(n.a);
                double* dx = adjoint_.data() + nodes_[n.a].off;
                for (int k = 0; k < n.len; ++k)
                    if (xv[k] > n.c) dx[k] += dy[k];
                break;
            }
            case OpKind::ClampMax: {
                const double* xv = val(n.a);
                double* dx = adjoint_.data() + nodes_[n.a].off;
                for (int k = 0; k < n.len; ++k)
                    if (xv[k] < n.c) dx[k] += dy[k];
                break;
            }
            case OpKind::Scale: {
                double* dx = adjoint_.data() + nodes_[n.a].off;
                for (int k = 0; k < n.len; ++k) dx[k] += n.c * dy[k];
                break;
            }
            case OpKind::AddConst: {
                double* dx = adjoint_.data() + nodes_[n.a].off;
                for (int k = 0; k < n.len; ++k) dx[k] += dy[k];
                break;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Optimizer steps
// ---------------------------------------------------------------------------

void apply_step(ParamSet& params, const GradBuffer& grads, double lr) {
    require(lr >= 0.0, "apply_step: lr must be >= 0");
    for (int t = 0; t < params.count(); ++t) {
        auto& v = params.at(t).v;
        const auto& g = grads.at(t);
        for (size_t k = 0; k < v.size(); ++k) v[k] -= lr * g[k];
    }
}

double dual_step(double dual, double bracket, double lr) {
    return std::max(0.0, dual + lr * bracket);
}

void dual_step(std::vector<double>& duals, const std::vector<double>& brackets, double lr) {
    require(duals.size() == brackets.size(), "dual_step: length mismatch");
    for (size_t k = 0; k < duals.size(); ++k) duals[k] = dual_step(duals[k], brackets[k], lr);
}

AdamState::AdamState(const ParamSet& params) {
    m.resize(params.count());
    v.resize(params.count());
    for (int k = 0; k < params.count(); ++k) {
        m[k].assign(params.at(k).v.size(), 0.0);
        v[k].assign(params.at(k).v.size(), 0.0);
    }
}

void apply_step_adam(ParamSet& params, const GradBuffer& grads, double lr, AdamState& state,
                     double beta1, double beta2, double eps) {
    ++state.t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    for (int t = 0; t < params.count(); ++t) {
        auto& v = params.at(t).v;
        const auto& g = grads.at(t);
        auto& m1 = state.m[t];
        auto& m2 = state.v[t];
        for (size_t k = 0; k < v.size(); ++k) {
            m1[k] = beta1 * m1[k] + (1.0 - beta1) * g[k];
            m2[k] = beta2 * m2[k] + (1.0 - beta2) * g[k] * g[k];
            v[k] -= lr * (m1[k] / bc1) / (std::sqrt(m2[k] / bc2) + eps);
        }
    }
}

double fd_check(const ParamSet& params, const LossBuilder& build, int probes, Rng& rng, double h) {
    // Tape gradient once at the base point.
    Tape tape(params);
    const int root = build(tape);
    GradBuffer grads(params);
    tape.backward(root, grads);

    const size_t total = params.total_size();
    require(total > 0, "fd_check: empty parameter set");
    double worst = 0.0;
    ParamSet probe = params;
    for (int k = 0; k < probes; ++k) {
        size_t flat = static_cast<size_t>(rng.below(total));
        int tensor = 0;
        while (flat >= probe.at(tensor).v.size()) {
            flat -= probe.at(tensor).v.size();
            ++tensor;
        }
        double& coord = probe.at(tensor).v[flat];
        const double saved = coord;

        coord = saved + h;
        Tape tp(probe);
        const double fp = tp.scalar(build(tp));
        coord = saved - h;
        Tape tm(probe);
        const double fm = tm.scalar(build(tm));
        coord = saved;

        const double g_fd = (fp - fm) / (2.0 * h);
        const double g_ad = grads.at(tensor)[flat];
        // Floor the denominator: coordinates with near-zero gradients are
        // compared absolutely (the central-difference noise floor sits around
        // eps * |loss| / h, orders of magnitude below 1e-4 * 1e-4).
        const double denom = std::max({std::abs(g_fd), std::abs(g_ad), 1e-4});
        worst = std::max(worst, std::abs(g_fd - g_ad) / denom);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

void write_u64(std::ostream& os, uint64_t v) {
    unsigned char b[8];
    for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(v >> (8 * k));
    os.write(reinterpret_cast<const char*>(b), 8);
}

uint64_t read_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    require(static_cast<bool>(is), "checkpoint truncated");
    uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<uint64_t>(b[k]) << (8 * k);
    return v;
}

}  // namespace

void save_params(const std::string& path, const ParamSet& params, const std::string& meta_json) {
    std::ofstream os(path, std::ios::binary);
    require(static_cast<bool>(os), "save_params: cannot open " + path);
    nlohmann::json hdr;
    hdr["format_version"] = 1;
    try {
        hdr["meta"] = meta_json.empty() ? nlohmann::json::object() : nlohmann::json::parse(meta_json);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("save_params: meta is not valid JSON: ") + e.what());
    }
    auto tensors = nlohmann::json::array();
    for (int t = 0; t < params.count(); ++t) {
        const auto& e = params.at(t);
        tensors.push_back({{"name", e.name}, {"rows", e.rows}, {"cols", e.cols}});
    }
    hdr["tensors"] = tensors;
    const std::string hjson = hdr.dump();
    os.write(kCkptMagic, 8);
    write_u64(os, hjson.size());
    os.write(hjson.data(), static_cast<std::streamsize>(hjson.size()));
    for (int t = 0; t < params.count(); ++t) {
        for (double x : params.at(t).v) {
            uint64_t bits;
            std::memcpy(&bits, &x, 8);
            write_u64(os, bits);
        }
    }
    require(static_cast<bool>(os), "save_params: write failed for " + path);
}

std::string load_params(const std::string& path, ParamSet& params) {
    std::ifstream is(path, std::ios::binary);
    require(static_cast<bool>(is), "load_params: cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    require(static_cast<bool>(is) && std::memcmp(magic, kCkptMagic, 8) == 0,
            "load_params: bad magic / wrong-version header");
    const uint64_t hlen = read_u64(is);
    std::string hjson(hlen, '\0');
    is.read(hjson.data(), static_cast<std::streamsize>(hlen));
    require(static_cast<bool>(is), "load_params: truncated header");
    nlohmann::json hdr;
    try {
        hdr = nlohmann::json::parse(hjson);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("load_params: malformed header: ") + e.what());
    }
    require(hdr.value("format_version", -1) == 1, "load_params: unsupported format version");
    params = ParamSet();
    for (const auto& jt : hdr.at("tensors")) {
        params.add(jt.at("name").get<std::string>(), jt.at("rows").get<int>(),
                   jt.at("cols").get<int>());
    }
    for (int t = 0; t < params.count(); ++t) {
        for (double& x : params.at(t).v) {
            const uint64_t bits = read_u64(is);
            std::memcpy(&x, &bits, 8);
        }
    }
    return hdr.at("meta").dump();
}

}  // namespace jcpa::ad
