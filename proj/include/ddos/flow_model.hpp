#ifndef DDOS_FLOW_MODEL_HPP
#define DDOS_FLOW_MODEL_HPP

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ddos {

using Ipv4 = std::uint32_t;

std::string format_ipv4(Ipv4 addr);
// Throws ConfigError on anything but a dotted quad.
Ipv4 parse_ipv4(std::string_view text);

/**
 * One aggregated traffic observation. Address/port features are weighted by
 * packet_count, so a record stands for packet_count packets sharing its header.
 */
struct FlowRecord {
    double timestamp = 0.0;  // seconds since trace epoch
    Ipv4 src_addr = 0;
    Ipv4 dst_addr = 0;
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    std::uint8_t protocol = 0;
    std::uint64_t packet_count = 1;
    std::uint64_t byte_count = 0;

    bool operator==(const FlowRecord&) const = default;
};

/// Flow identity: packets sharing a destination address and port.
struct FlowKey {
    Ipv4 dst_addr = 0;
    std::uint16_t dst_port = 0;

    auto operator<=>(const FlowKey&) const = default;

    static FlowKey of(const FlowRecord& r) { return {r.dst_addr, r.dst_port}; }
    std::string to_string() const;  // "a.b.c.d:port"
};

struct TrafficWindow {
    std::uint64_t index = 0;
    double start_time = 0.0;
    double duration = 0.0;
    std::vector<FlowRecord> records;

    bool empty() const { return records.empty(); }
    std::uint64_t packet_total() const;
};

enum class TraceFormat { Csv, Jsonl };

TraceFormat trace_format_from_string(std::string_view name);
// Guesses from the file extension; ".jsonl"/".json" is JSONL, anything else CSV.
TraceFormat trace_format_for_path(std::string_view path);

inline constexpr std::string_view kCsvHeader =
    "timestamp,src_addr,dst_addr,src_port,dst_port,protocol,packet_count,byte_count";

/**
 * Parses one trace line. `line_no` only feeds error messages.
 * Throws ParseError naming the line and the offending field.
 */
FlowRecord parse_flow_record(std::string_view line, TraceFormat format, std::size_t line_no = 1);

/// Inverse of parse_flow_record; timestamps use the shortest round-trip form.
std::string serialize_flow_record(const FlowRecord& record, TraceFormat format);

/// Reads a whole trace. Blank lines are skipped; a CSV header line is optional.
std::vector<FlowRecord> read_trace(std::istream& in, TraceFormat format);
std::vector<FlowRecord> read_trace_file(const std::string& path);
std::vector<FlowRecord> read_trace_file(const std::string& path, TraceFormat format);

void write_trace(std::ostream& out, std::span<const FlowRecord> records, TraceFormat format);
void write_trace_file(const std::string& path, std::span<const FlowRecord> records);

/**
 * Buckets sorted records into contiguous windows of `duration` seconds. The
 * epoch is the first record's timestamp. Windows with no traffic are still
 * emitted so indices stay contiguous.
 *
 * Throws ConfigError when duration <= 0 and OrderingError on unsorted input.
 */
std::vector<TrafficWindow> windowize(std::span<const FlowRecord> records, double duration);

std::map<FlowKey, std::vector<FlowRecord>> group_by_flow_key(const TrafficWindow& window);

} // namespace ddos

#endif // DDOS_FLOW_MODEL_HPP
