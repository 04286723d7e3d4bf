#include "jcpa/chansim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace jcpa {

namespace {

constexpr char kMagic[8] = {'J', 'C', 'P', 'A', 'D', 'S', '0', '1'};
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr int kDegenerateRetryLimit = 64;

void write_u64(std::ostream& os, uint64_t v) {
    unsigned char b[8];
    for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(v >> (8 * k));
    os.write(reinterpret_cast<const char*>(b), 8);
}

uint64_t read_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    require(static_cast<bool>(is), "dataset file truncated");
    uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<uint64_t>(b[k]) << (8 * k);
    return v;
}

void write_f64s(std::ostream& os, const double* p, size_t n) {
    for (size_t k = 0; k < n; ++k) {
        uint64_t bits;
        std::memcpy(&bits, &p[k], 8);
        write_u64(os, bits);
    }
}

void read_f64s(std::istream& is, double* p, size_t n) {
    for (size_t k = 0; k < n; ++k) {
        const uint64_t bits = read_u64(is);
        std::memcpy(&p[k], &bits, 8);
    }
}

}  // namespace

void TopologyConfig::validate() const {
    require(num_pairs >= 1, "TopologyConfig: num_pairs must be >= 1");
    require(num_channels >= 1, "TopologyConfig: num_channels must be >= 1");
    require(rx_dist_min > 0.0 && rx_dist_min <= rx_dist_max,
            "TopologyConfig: need 0 < rx_dist_min <= rx_dist_max");
    require(path_loss_exponent > 0.0, "TopologyConfig: path_loss_exponent must be > 0");
    require(r_min_low >= 0.0 && r_min_low <= r_min_high,
            "TopologyConfig: need 0 <= r_min_low <= r_min_high");
    require(p_max > 0.0 && noise_power > 0.0,
            "TopologyConfig: p_max and noise_power must be > 0");
}

Placement place_topology(const TopologyConfig& cfg, Rng& rng) {
    cfg.validate();
    const int d = cfg.num_pairs;
    Placement pl;
    pl.tx_x.resize(d);
    pl.tx_y.resize(d);
    pl.rx_x.resize(d);
    pl.rx_y.resize(d);
    const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));
    for (int i = 0; i < d; ++i) {
        pl.tx_x[i] = cfg.tx_spacing * (i % side);
        pl.tx_y[i] = cfg.tx_spacing * (i / side);
        const double ang = rng.uniform(0.0, kTwoPi);
        const double r = rng.uniform(cfg.rx_dist_min, cfg.rx_dist_max);
        pl.rx_x[i] = pl.tx_x[i] + r * std::cos(ang);
        pl.rx_y[i] = pl.tx_y[i] + r * std::sin(ang);
    }
    pl.dist = Mat(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            const double dx = pl.rx_x[i] - pl.tx_x[j];
            const double dy = pl.rx_y[i] - pl.tx_y[j];
            pl.dist(i, j) = std::hypot(dx, dy);
        }
    }
    return pl;
}

NetworkInstance draw_instance(const TopologyConfig& cfg, Rng& rng) {
    cfg.validate();
    const int d = cfg.num_pairs;
    const int mc = cfg.num_channels;
    for (int attempt = 0; attempt < kDegenerateRetryLimit; ++attempt) {
        const Placement pl = place_topology(cfg, rng);
        NetworkInstance inst;
        inst.num_pairs = d;
        inst.num_channels = mc;
        inst.gains = Ten3(d, d, mc);
        inst.noise.assign(d, cfg.noise_power);
        inst.p_max = cfg.p_max;
        inst.weights.assign(d, 1.0);
        inst.r_min_bits.resize(d);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                const double g_ls =
                    1.0 / (1.0 + std::pow(pl.dist(i, j), cfg.path_loss_exponent));
                const double amp = std::sqrt(g_ls);
                for (int m = 0; m < mc; ++m) {
                    // |CN(0,1)|: two N(0, 1/2) components.
                    const double re = rng.normal() * 0.7071067811865475244;
                    const double im = rng.normal() * 0.7071067811865475244;
                    inst.gains(i, j, m) = amp * std::hypot(re, im);
                }
            }
        }
        for (int i = 0; i < d; ++i) inst.r_min_bits[i] = rng.uniform(cfg.r_min_low, cfg.r_min_high);
        bool degenerate = false;
        for (int i = 0; i < d && !degenerate; ++i) {
            bool live = false;
            for (int m = 0; m < mc; ++m) live = live || inst.gains(i, i, m) > 0.0;
            degenerate = !live;
        }
        if (!degenerate) {
            inst.validate();
            return inst;
        }
    }
    throw Error("draw_instance: degenerate geometry retry limit exceeded");
}

NetworkInstance draw_indexed_instance(const TopologyConfig& cfg, const std::string& split,
                                      uint64_t index) {
    const uint64_t sub = Rng::mix(Rng::mix(cfg.seed, Rng::salt(split)), index);
    Rng rng(sub);
    NetworkInstance inst = draw_instance(cfg, rng);
    inst.seed = static_cast<int64_t>(sub);
    return inst;
}

Dataset gen_dataset(const TopologyConfig& cfg, int count, const std::string& split) {
    require(count >= 1, "gen_dataset: count must be >= 1");
    cfg.validate();
    Dataset ds;
    ds.config = cfg;
    ds.split = split;
    ds.instances.reserve(count);
    for (int k = 0; k < count; ++k)
        ds.instances.push_back(draw_indexed_instance(cfg, split, static_cast<uint64_t>(k)));
    return ds;
}

NetworkInstance mask_csi(const NetworkInstance& inst, double fraction, Rng& rng) {
    require(fraction >= 0.0 && fraction <= 0.5, "mask_csi: fraction must be in [0, 0.5]");
    NetworkInstance out = inst;
    const int d = inst.num_pairs;
    const int mc = inst.num_channels;
    std::vector<std::array<int, 3>> offdiag;
    offdiag.reserve(static_cast<size_t>(d) * (d - 1) * mc);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int m = 0; m < mc; ++m)
                if (i != j) offdiag.push_back({i, j, m});
    const size_t remove =
        static_cast<size_t>(std::llround(fraction * static_cast<double>(offdiag.size())));
    // Partial Fisher-Yates: the first `remove` entries are the masked set.
    for (size_t k = 0; k < remove; ++k) {
        const size_t pick = k + static_cast<size_t>(rng.below(offdiag.size() - k));
        std::swap(offdiag[k], offdiag[pick]);
        const auto [i, j, m] = offdiag[k];
        out.gains(i, j, m) = 0.0;
    }
    return out;
}

void store_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    require(static_cast<bool>(os), "store_dataset: cannot open " + path);
    const TopologyConfig& c = ds.config;
    nlohmann::json hdr = {
        {"format_version", 1},
        {"split", ds.split},
        {"count", ds.instances.size()},
        {"config",
         {{"num_pairs", c.num_pairs},
          {"num_channels", c.num_channels},
          {"tx_spacing", c.tx_spacing},
          {"rx_dist_min", c.rx_dist_min},
          {"rx_dist_max", c.rx_dist_max},
          {"path_loss_exponent", c.path_loss_exponent},
          {"r_min_low", c.r_min_low},
          {"r_min_high", c.r_min_high},
          {"p_max", c.p_max},
          {"noise_power", c.noise_power},
          {"seed", c.seed}}}};
    const std::string hjson = hdr.dump();
    os.write(kMagic, 8);
    write_u64(os, hjson.size());
    os.write(hjson.data(), static_cast<std::streamsize>(hjson.size()));
    for (const NetworkInstance& inst : ds.instances) {
        const size_t doubles = inst.gains.size() + inst.noise.size() + inst.weights.size() +
                               inst.r_min_bits.size();
        write_u64(os, 8 + doubles * 8);  // record payload bytes: seed + doubles
        write_u64(os, static_cast<uint64_t>(inst.seed));
        write_f64s(os, inst.gains.data(), inst.gains.size());
        write_f64s(os, inst.noise.data(), inst.noise.size());
        write_f64s(os, inst.weights.data(), inst.weights.size());
        write_f64s(os, inst.r_min_bits.data(), inst.r_min_bits.size());
    }
    require(static_cast<bool>(os), "store_dataset: write failed for " + path);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(static_cast<bool>(is), "load_dataset: cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    require(static_cast<bool>(is) && std::memcmp(magic, kMagic, 8) == 0,
            "load_dataset: bad magic / wrong-version header in " + path);
    const uint64_t hlen = read_u64(is);
    std::string hjson(hlen, '\0');
    is.read(hjson.data(), static_cast<std::streamsize>(hlen));
    require(static_cast<bool>(is), "load_dataset: truncated header in " + path);
    nlohmann::json hdr;
    try {
        hdr = nlohmann::json::parse(hjson);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("load_dataset: malformed header JSON: ") + e.what());
    }
    require(hdr.value("format_version", -1) == 1, "load_dataset: unsupported format version");

    Dataset ds;
    const auto& jc = hdr.at("config");
    ds.config.num_pairs = jc.at("num_pairs").get<int>();
    ds.config.num_channels = jc.at("num_channels").get<int>();
    ds.config.tx_spacing = jc.at("tx_spacing").get<double>();
    ds.config.rx_dist_min = jc.at("rx_dist_min").get<double>();
    ds.config.rx_dist_max = jc.at("rx_dist_max").get<double>();
    ds.config.path_loss_exponent = jc.at("path_loss_exponent").get<double>();
    ds.config.r_min_low = jc.at("r_min_low").get<double>();
    ds.config.r_min_high = jc.at("r_min_high").get<double>();
    ds.config.p_max = jc.at("p_max").get<double>();
    ds.config.noise_power = jc.at("noise_power").get<double>();
    ds.config.seed = jc.at("seed").get<uint64_t>();
    ds.split = hdr.at("split").get<std::string>();

    const uint64_t count = hdr.at("count").get<uint64_t>();
    const int d = ds.config.num_pairs;
    const int mc = ds.config.num_channels;
    const size_t doubles = static_cast<size_t>(d) * d * mc + 3 * static_cast<size_t>(d);
    ds.instances.reserve(count);
    for (uint64_t k = 0; k < count; ++k) {
        const uint64_t reclen = read_u64(is);
        require(reclen == 8 + doubles * 8, "load_dataset: record length mismatch");
        NetworkInstance inst;
        inst.num_pairs = d;
        inst.num_channels = mc;
        inst.seed = static_cast<int64_t>(read_u64(is));
        inst.gains = Ten3(d, d, mc);
        inst.noise.resize(d);
        inst.p_max = ds.config.p_max;
        inst.weights.resize(d);
        inst.r_min_bits.resize(d);
        read_f64s(is, inst.gains.data(), inst.gains.size());
        read_f64s(is, inst.noise.data(), inst.noise.size());
        read_f64s(is, inst.weights.data(), inst.weights.size());
        read_f64s(is, inst.r_min_bits.data(), inst.r_min_bits.size());
        ds.instances.push_back(std::move(inst));
    }
    return ds;
}

}  // namespace jcpa
