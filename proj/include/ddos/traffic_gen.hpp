#ifndef DDOS_TRAFFIC_GEN_HPP
#define DDOS_TRAFFIC_GEN_HPP

#include "ddos/calibration.hpp"
#include "ddos/flow_model.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace ddos {

/**
 * Seeded random source for trace generation. Wraps std::mt19937_64, whose
 * output sequence is fixed by the C++ standard, and maps it to ranges with
 * our own arithmetic (the std:: distributions differ between standard
 * libraries), so a seed yields the same trace on every platform.
 */
class TraceRng {
public:
    explicit TraceRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    // Uniform in [0, n); n > 0.
    std::uint64_t below(std::uint64_t n);
    // Uniform in [lo, hi].
    std::uint64_t between(std::uint64_t lo, std::uint64_t hi) { return lo + below(hi - lo + 1); }
    // Uniform in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

struct LegitParams {
    std::uint32_t n_sources = 200;
    std::uint32_t n_destinations = 20;
    double records_per_second = 200.0;
    double duration = 40.0;
    double source_skew = 0.0;  // Zipf exponent, 0 = uniform
    std::uint64_t seed = 1;

    void validate() const;
};

enum class SpoofMode { FixedSource, RandomSource };

SpoofMode parse_spoof_mode(std::string_view name);

struct AttackParams {
    std::uint32_t n_bots = 1;
    FlowKey victim{0xCB00710A, 80};  // 203.0.113.10:80
    double records_per_second = 1000.0;
    double start = 10.0;
    double duration = 10.0;
    SpoofMode spoof_mode = SpoofMode::FixedSource;
    std::uint64_t seed = 2;

    void validate() const;
};

// Address pools the generators draw from.
Ipv4 legit_source_addr(std::uint32_t i);
Ipv4 legit_destination_addr(std::uint32_t i);
Ipv4 bot_addr(std::uint32_t i);

inline constexpr std::uint16_t kServicePorts[] = {80, 443, 53, 22};

/// Constant-rate background traffic starting at t = 0, sorted by timestamp.
std::vector<FlowRecord> gen_legitimate(const LegitParams& params);

/// Flood records confined to [start, start + duration), all to the victim.
std::vector<FlowRecord> gen_ddos(const AttackParams& params);

struct TraceSegment {
    std::vector<FlowRecord> records;
    // Set for attack traffic; labels mark every window overlapping it.
    std::optional<std::pair<double, double>> attack_interval;  // [start, end)
};

struct MixedTrace {
    std::vector<FlowRecord> records;
    std::vector<LabeledWindow> labels;
};

/**
 * Merges sorted segments by timestamp (ties keep segment order) and labels
 * each window of `window_duration` seconds. Throws OrderingError when a
 * segment is unsorted.
 */
MixedTrace mix(std::span<const TraceSegment> segments, double window_duration);

} // namespace ddos

#endif // DDOS_TRAFFIC_GEN_HPP
