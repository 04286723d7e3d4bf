#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace jcpa {

/// Error type for all structured failures (bad dimensions, malformed files,
/// non-finite intermediates, exceeded iteration guards).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Relative slack tolerated on per-user power sums emitted by solvers.
inline constexpr double kPowerSlackRel = 1e-9;
// Absolute slack (bits/s/Hz) below which a QoS constraint counts as satisfied.
inline constexpr double kRateSlackBits = 1e-6;

inline constexpr double kLn2 = 0.6931471805599453094172321214581766;

inline double bits_to_nats(double bits) { return bits * kLn2; }
inline double nats_to_bits(double nats) { return nats / kLn2; }

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw Error(msg);
}

}  // namespace jcpa
