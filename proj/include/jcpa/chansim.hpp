#pragma once

#include <string>
#include <vector>

#include "jcpa/model.hpp"
#include "jcpa/rng.hpp"

namespace jcpa {

/// Geometry and draw parameters for generated networks. Transmitters sit on a
/// square grid with tx_spacing pitch; each receiver is dropped at a uniform
/// random angle and distance U(rx_dist_min, rx_dist_max) from its transmitter.
/// Large-scale gain is G = 1 / (1 + d^alpha); small-scale fading is the
/// magnitude of a complex standard normal, independent per channel.
struct TopologyConfig {
    int num_pairs = 4;
    int num_channels = 2;
    double tx_spacing = 50.0;
    double rx_dist_min = 2.0;
    double rx_dist_max = 10.0;
    double path_loss_exponent = 2.0;
    double r_min_low = 1.0;   // bits/s/Hz
    double r_min_high = 2.0;  // bits/s/Hz
    double p_max = 1.0;
    double noise_power = 1.0;
    uint64_t seed = 0;

    void validate() const;
};

struct Placement {
    std::vector<double> tx_x, tx_y;
    std::vector<double> rx_x, rx_y;
    Mat dist;  // dist(i, j) = distance from transmitter j to receiver i
};

struct Dataset {
    TopologyConfig config;
    std::vector<NetworkInstance> instances;
    std::string split;  // "train" or "test"
};

/// Drops transmitters/receivers and returns the directed tx_j -> rx_i distance
/// matrix.
Placement place_topology(const TopologyConfig& cfg, Rng& rng);

/// Draws one instance: geometry, large-scale fading shared across channels,
/// per-channel Rayleigh fading, per-user R_min ~ U(r_min_low, r_min_high).
NetworkInstance draw_instance(const TopologyConfig& cfg, Rng& rng);

/// Instance k of a dataset comes from the substream mix(cfg.seed, salt(split), k),
/// so regeneration from (config.seed, split, index) is byte-identical.
NetworkInstance draw_indexed_instance(const TopologyConfig& cfg, const std::string& split,
                                      uint64_t index);

Dataset gen_dataset(const TopologyConfig& cfg, int count, const std::string& split);

/// Zeroes a uniformly random subset of round(fraction * D*(D-1)*M) off-diagonal
/// gain entries. Direct gains are never removed. fraction must be in [0, 0.5].
NetworkInstance mask_csi(const NetworkInstance& inst, double fraction, Rng& rng);

/// Self-describing container: versioned header with the config as JSON, then
/// length-prefixed binary records of little-endian 64-bit floats.
void store_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace jcpa
