#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "jcpa/common.hpp"
#include "jcpa/rng.hpp"

namespace jcpa::ad {

/// Named collection of parameter tensors (matrices and vectors).
class ParamSet {
public:
    struct Entry {
        std::string name;
        int rows = 0;
        int cols = 0;  // 1 for vectors
        std::vector<double> v;
    };

    int add(const std::string& name, int rows, int cols);
    int index_of(const std::string& name) const;  // -1 when absent

    int count() const { return static_cast<int>(entries_.size()); }
    Entry& at(int idx) { return entries_[idx]; }
    const Entry& at(int idx) const { return entries_[idx]; }

    size_t total_size() const;
    bool all_values_finite() const;

private:
    std::vector<Entry> entries_;
};

/// Per-tensor gradient buffers aligned with a ParamSet.
class GradBuffer {
public:
    explicit GradBuffer(const ParamSet& params);
    void zero();
    std::vector<double>& at(int idx) { return grads_[idx]; }
    const std::vector<double>& at(int idx) const { return grads_[idx]; }
    int count() const { return static_cast<int>(grads_.size()); }

private:
    std::vector<std::vector<double>> grads_;
};

/// Weight init: uniform in +-sqrt(6 / (fan_in + fan_out)) for matrices
/// ("glorot"), zeros for biases.
enum class InitScheme { GlorotUniform, Zero };

/// Dense MLP parameters named "<prefix>.w<k>" / "<prefix>.b<k>" for the given
/// layer widths (dims = {in, hidden..., out}).
void add_mlp_params(ParamSet& params, const std::string& prefix, const std::vector<int>& dims,
                    Rng& rng, InitScheme scheme = InitScheme::GlorotUniform);

/// Recorded computation graph of one forward evaluation. Nodes are
/// vector-valued (scalars are length-1); values live in a reusable arena so a
/// tape can be reset and rebuilt per sample without reallocating.
class Tape {
public:
    explicit Tape(const ParamSet& params) : params_(&params) {}

    /// Drops all nodes, keeps arena capacity.
    void reset();

    int constant(std::span<const double> v);
    int constant(double v);
    /// y = W x + b with parameter tensors by ParamSet index.
    int affine(int w_idx, int b_idx, int x);
    int relu(int x);
    int sigmoid(int x);
    int add(int a, int b);
    int sub(int a, int b);
    int mul(int a, int b);
    int div(int a, int b);
    int add_n(std::span<const int> xs);
    int concat(std::span<const int> xs);
    int sum(int x);                      // scalar
    int log(int x);                      // elementwise ln, argument clamped at 1e-30
    int clamp_min(int x, double c);      // elementwise max(x, c)
    int clamp_max(int x, double c);      // elementwise min(x, c)
    int scale(int x, double c);          // c * x
    int add_const(int x, double c);      // x + c

    std::span<const double> value(int id) const;
    double scalar(int id) const;

    /// Reverse accumulation of d(root)/d(param) into `grads`. root must be a
    /// scalar node. Node gradients are recomputed from scratch each call.
    void backward(int root, GradBuffer& grads);

    int num_nodes() const { return static_cast<int>(nodes_.size()); }
    const ParamSet& params() const { return *params_; }

private:
    enum class OpKind : uint8_t {
        Const, Affine, Relu, Sigmoid, Add, Sub, Mul, Div,
        AddN, Concat, Sum, Log, ClampMin, ClampMax, Scale, AddConst,
    };

    struct Node {
        OpKind op;
        int a = -1, b = -1;
        int w = -1, bias = -1;
        double c = 0.0;
        int args_off = 0, args_n = 0;
        int off = 0, len = 0;
    };

    int push(OpKind op, int len);
    double* val(int id) { return values_.data() + nodes_[id].off; }
    const double* val(int id) const { return values_.data() + nodes_[id].off; }
    void check_finite(int id, const char* what) const;

    const ParamSet* params_;
    std::vector<Node> nodes_;
    std::vector<double> values_;
    std::vector<double> adjoint_;
    std::vector<int> args_;
};

/// Plain SGD descent step: w <- w - lr * g.
void apply_step(ParamSet& params, const GradBuffer& grads, double lr);

/// Clamped dual ascent: max(0, dual + lr * bracket).
double dual_step(double dual, double bracket, double lr);
void dual_step(std::vector<double>& duals, const std::vector<double>& brackets, double lr);

/// Optional adaptive step (config-gated by callers; plain SGD is the default).
struct AdamState {
    explicit AdamState(const ParamSet& params);
    std::vector<std::vector<double>> m, v;
    int64_t t = 0;
};
void apply_step_adam(ParamSet& params, const GradBuffer& grads, double lr, AdamState& state,
                     double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

/// Central-difference probe of `probes` uniformly chosen parameter
/// coordinates against the tape gradient of the same loss. Returns the max
/// relative error. `build` constructs the loss on the given tape and returns
/// the root node.
using LossBuilder = std::function<int(Tape&)>;
double fd_check(const ParamSet& params, const LossBuilder& build, int probes, Rng& rng,
                double h = 1e-5);

/// Format-versioned checkpoint: JSON metadata (arch and anything the caller
/// adds) + parameter tensors as little-endian 64-bit floats.
void save_params(const std::string& path, const ParamSet& params, const std::string& meta_json);
std::string load_params(const std::string& path, ParamSet& params);

}  // namespace jcpa::ad
