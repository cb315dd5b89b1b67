#include "ddos/traffic_gen.hpp"

#include "ddos/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ddos {

namespace {

std::size_t record_count(double rate, double duration) {
    return static_cast<std::size_t>(std::floor(rate * duration));
}

void fill_sizes(FlowRecord& r, TraceRng& rng) {
    r.packet_count = rng.between(1, 10);
    r.byte_count = r.packet_count * rng.between(40, 1500);
}

} // namespace

std::uint64_t TraceRng::below(std::uint64_t n) {
    // Lemire's multiply-shift with rejection; unbiased for any n.
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            m = static_cast<unsigned __int128>(next()) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

void LegitParams::validate() const {
    if (n_sources < 1 || n_sources > (1u << 24)) throw ConfigError("n_sources must be in [1, 2^24]");
    if (n_destinations < 1 || n_destinations > (1u << 16)) throw ConfigError("n_destinations must be in [1, 2^16]");
    if (!(records_per_second > 0.0) || !std::isfinite(records_per_second))
        throw ConfigError("legitimate records_per_second must be positive");
    if (!(duration > 0.0) || !std::isfinite(duration)) throw ConfigError("legitimate duration must be positive");
    if (!(source_skew >= 0.0) || !std::isfinite(source_skew)) throw ConfigError("source_skew must be >= 0");
}

void AttackParams::validate() const {
    if (n_bots < 1 || n_bots > (1u << 22)) throw ConfigError("n_bots must be in [1, 2^22]");
    if (!(records_per_second > 0.0) || !std::isfinite(records_per_second))
        throw ConfigError("attack records_per_second must be positive");
    if (!(start >= 0.0) || !std::isfinite(start)) throw ConfigError("attack start must be >= 0");
    if (!(duration > 0.0) || !std::isfinite(duration)) throw ConfigError("attack duration must be positive");
}

SpoofMode parse_spoof_mode(std::string_view name) {
    if (name == "fixed" || name == "fixed-source") return SpoofMode::FixedSource;
    if (name == "random" || name == "random-source") return SpoofMode::RandomSource;
    throw ConfigError("unknown spoof mode '" + std::string(name) + "' (expected fixed or random)");
}

Ipv4 legit_source_addr(std::uint32_t i) { return 0x0A000000u + i + 1; }       // 10.0.0.0/8
Ipv4 legit_destination_addr(std::uint32_t i) { return 0xAC100000u + i + 1; }  // 172.16.0.0/16
Ipv4 bot_addr(std::uint32_t i) { return 0x64400000u + i + 1; }                // 100.64.0.0/10

std::vector<FlowRecord> gen_legitimate(const LegitParams& p) {
    p.validate();
    TraceRng rng(p.seed);

    std::vector<double> cumulative;
    if (p.source_skew > 0.0) {
        cumulative.resize(p.n_sources);
        double acc = 0.0;
        for (std::uint32_t i = 0; i < p.n_sources; ++i) {
            acc += 1.0 / std::pow(static_cast<double>(i + 1), p.source_skew);
            cumulative[i] = acc;
        }
    }
    auto pick_source = [&]() -> std::uint32_t {
        if (cumulative.empty()) return static_cast<std::uint32_t>(rng.below(p.n_sources));
        const double u = rng.unit() * cumulative.back();
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        return static_cast<std::uint32_t>(std::min<std::size_t>(it - cumulative.begin(), p.n_sources - 1));
    };

    const std::size_t n = record_count(p.records_per_second, p.duration);
    std::vector<FlowRecord> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        FlowRecord r;
        r.timestamp = static_cast<double>(i) / p.records_per_second;
        r.src_addr = legit_source_addr(pick_source());
        r.dst_addr = legit_destination_addr(static_cast<std::uint32_t>(rng.below(p.n_destinations)));
        r.src_port = static_cast<std::uint16_t>(rng.between(1024, 65535));
        r.dst_port = kServicePorts[rng.below(std::size(kServicePorts))];
        r.protocol = r.dst_port == 53 ? 17 : 6;
        fill_sizes(r, rng);
        out.push_back(r);
    }
    return out;
}

std::vector<FlowRecord> gen_ddos(const AttackParams& p) {
    p.validate();
    TraceRng rng(p.seed);
    const std::size_t n = record_count(p.records_per_second, p.duration);
    std::vector<FlowRecord> out;
    out.reserve(n);
    const double end = p.start + p.duration;
    for (std::size_t i = 0; i < n; ++i) {
        FlowRecord r;
        r.timestamp = p.start + static_cast<double>(i) / p.records_per_second;
        if (r.timestamp >= end) break;
        r.src_addr = p.spoof_mode == SpoofMode::FixedSource
                         ? bot_addr(static_cast<std::uint32_t>(i % p.n_bots))
                         : static_cast<Ipv4>(rng.next() >> 32);
        r.dst_addr = p.victim.dst_addr;
        r.dst_port = p.victim.dst_port;
        r.src_port = static_cast<std::uint16_t>(rng.between(1024, 65535));
        r.protocol = 17;
        fill_sizes(r, rng);
        out.push_back(r);
    }
    return out;
}

MixedTrace mix(std::span<const TraceSegment> segments, double window_duration) {
    if (!(window_duration > 0.0)) throw ConfigError("window duration must be positive");
    MixedTrace out;
    std::size_t total = 0;
    for (const auto& seg : segments) {
        for (std::size_t i = 1; i < seg.records.size(); ++i)
            if (seg.records[i].timestamp < seg.records[i - 1].timestamp) throw OrderingError(i);
        total += seg.records.size();
    }
    out.records.reserve(total);
    for (const auto& seg : segments) out.records.insert(out.records.end(), seg.records.begin(), seg.records.end());
    std::stable_sort(out.records.begin(), out.records.end(),
                     [](const FlowRecord& a, const FlowRecord& b) { return a.timestamp < b.timestamp; });

    for (const auto& w : windowize(out.records, window_duration)) {
        const double lo = w.start_time;
        const double hi = w.start_time + w.duration;
        bool attack = false;
        for (const auto& seg : segments)
            if (seg.attack_interval && seg.attack_interval->first < hi && seg.attack_interval->second > lo)
                attack = true;
        out.labels.push_back({w.index, attack ? WindowLabel::Attack : WindowLabel::Clean});
    }
    return out;
}

} // namespace ddos
