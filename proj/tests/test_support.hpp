#ifndef DDOS_TEST_SUPPORT_HPP
#define DDOS_TEST_SUPPORT_HPP

#include "ddos/flow_model.hpp"

#include <random>
#include <vector>

namespace ddos::testing {

// Random window over small pools so values collide often.
inline TrafficWindow random_window(std::mt19937_64& rng, std::size_t n_records, std::uint32_t pool = 12) {
    std::uniform_int_distribution<std::uint32_t> addr(1, pool);
    std::uniform_int_distribution<std::uint32_t> port(1, 6);
    std::uniform_int_distribution<std::uint64_t> pkts(1, 20);
    TrafficWindow w;
    w.index = 0;
    w.start_time = 0.0;
    w.duration = 1.0;
    for (std::size_t i = 0; i < n_records; ++i) {
        FlowRecord r;
        r.timestamp = static_cast<double>(i) / static_cast<double>(n_records + 1);
        r.src_addr = 0x0A000000u + addr(rng);
        r.dst_addr = 0xC0A80000u + addr(rng) % 5;
        r.src_port = static_cast<std::uint16_t>(1000 + port(rng));
        r.dst_port = static_cast<std::uint16_t>(port(rng) % 3 == 0 ? 443 : 80);
        r.protocol = 6;
        r.packet_count = pkts(rng);
        r.byte_count = r.packet_count * 100;
        w.records.push_back(r);
    }
    return w;
}

inline FlowRecord rec(double t, Ipv4 src, Ipv4 dst, std::uint16_t dport = 80, std::uint64_t pkts = 1) {
    FlowRecord r;
    r.timestamp = t;
    r.src_addr = src;
    r.dst_addr = dst;
    r.src_port = 40000;
    r.dst_port = dport;
    r.protocol = 6;
    r.packet_count = pkts;
    r.byte_count = pkts * 60;
    return r;
}

inline TrafficWindow window_of(std::vector<FlowRecord> records, std::uint64_t index = 0) {
    TrafficWindow w;
    w.index = index;
    w.start_time = static_cast<double>(index);
    w.duration = 1.0;
    w.records = std::move(records);
    return w;
}

} // namespace ddos::testing

#endif // DDOS_TEST_SUPPORT_HPP
