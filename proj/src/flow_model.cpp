#include "ddos/flow_model.hpp"

#include "ddos/errors.hpp"

#include <json.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace ddos {

namespace {

constexpr std::array<std::string_view, 8> kFieldNames = {
    "timestamp", "src_addr", "dst_addr", "src_port",
    "dst_port", "protocol", "packet_count", "byte_count"};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
        s.remove_suffix(1);
    return s;
}

bool try_parse_ipv4(std::string_view text, Ipv4& out) {
    Ipv4 value = 0;
    const char* p = text.data();
    const char* end = text.data() + text.size();
    for (int octet = 0; octet < 4; ++octet) {
        unsigned part = 0;
        auto [next, ec] = std::from_chars(p, end, part);
        if (ec != std::errc{} || next == p || part > 255) return false;
        value = (value << 8) | part;
        p = next;
        if (octet < 3) {
            if (p == end || *p != '.') return false;
            ++p;
        }
    }
    if (p != end) return false;
    out = value;
    return true;
}

template <typename T>
T parse_unsigned(std::string_view text, std::size_t line_no, std::string_view field, std::uint64_t max) {
    text = trim(text);
    std::uint64_t value = 0;
    auto [next, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec == std::errc::result_out_of_range)
        throw ParseError(line_no, std::string(field), "value out of range");
    if (ec != std::errc{} || next != text.data() + text.size() || text.empty())
        throw ParseError(line_no, std::string(field), "not a non-negative integer: '" + std::string(text) + "'");
    if (value > max)
        throw ParseError(line_no, std::string(field),
                         "value " + std::to_string(value) + " out of range (max " + std::to_string(max) + ")");
    return static_cast<T>(value);
}

double parse_timestamp(std::string_view text, std::size_t line_no) {
    text = trim(text);
    double value = 0.0;
    auto [next, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || next != text.data() + text.size() || text.empty())
        throw ParseError(line_no, "timestamp", "not a number: '" + std::string(text) + "'");
    return value;
}

Ipv4 parse_addr_field(std::string_view text, std::size_t line_no, std::string_view field) {
    Ipv4 addr = 0;
    if (!try_parse_ipv4(trim(text), addr))
        throw ParseError(line_no, std::string(field), "not an IPv4 address: '" + std::string(text) + "'");
    return addr;
}

void validate(const FlowRecord& r, std::size_t line_no) {
    if (!std::isfinite(r.timestamp) || r.timestamp < 0.0)
        throw ParseError(line_no, "timestamp", "must be finite and non-negative");
    if (r.packet_count < 1)
        throw ParseError(line_no, "packet_count", "must be at least 1");
}

std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), end);
}

FlowRecord parse_csv(std::string_view line, std::size_t line_no) {
    std::array<std::string_view, 8> fields;
    std::size_t n = 0;
    std::size_t pos = 0;
    while (true) {
        std::size_t comma = line.find(',', pos);
        if (n == fields.size())
            throw ParseError(line_no, "line", "expected 8 fields, got more");
        fields[n++] = line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    if (n != fields.size())
        throw ParseError(line_no, "line", "expected 8 fields, got " + std::to_string(n));

    FlowRecord r;
    r.timestamp = parse_timestamp(fields[0], line_no);
    r.src_addr = parse_addr_field(fields[1], line_no, kFieldNames[1]);
    r.dst_addr = parse_addr_field(fields[2], line_no, kFieldNames[2]);
    r.src_port = parse_unsigned<std::uint16_t>(fields[3], line_no, kFieldNames[3], 65535);
    r.dst_port = parse_unsigned<std::uint16_t>(fields[4], line_no, kFieldNames[4], 65535);
    r.protocol = parse_unsigned<std::uint8_t>(fields[5], line_no, kFieldNames[5], 255);
    r.packet_count = parse_unsigned<std::uint64_t>(fields[6], line_no, kFieldNames[6], UINT64_MAX);
    r.byte_count = parse_unsigned<std::uint64_t>(fields[7], line_no, kFieldNames[7], UINT64_MAX);
    validate(r, line_no);
    return r;
}

template <typename T>
T json_unsigned(const nlohmann::json& obj, std::string_view field, std::size_t line_no, std::uint64_t max) {
    auto it = obj.find(std::string(field));
    if (it == obj.end()) throw ParseError(line_no, std::string(field), "missing");
    if (it->is_number_unsigned()) {
        auto v = it->get<std::uint64_t>();
        if (v > max)
            throw ParseError(line_no, std::string(field),
                             "value " + std::to_string(v) + " out of range (max " + std::to_string(max) + ")");
        return static_cast<T>(v);
    }
    throw ParseError(line_no, std::string(field), "not a non-negative integer");
}

Ipv4 json_addr(const nlohmann::json& obj, std::string_view field, std::size_t line_no) {
    auto it = obj.find(std::string(field));
    if (it == obj.end()) throw ParseError(line_no, std::string(field), "missing");
    if (!it->is_string()) throw ParseError(line_no, std::string(field), "expected a dotted-quad string");
    return parse_addr_field(it->get_ref<const std::string&>(), line_no, field);
}

FlowRecord parse_jsonl(std::string_view line, std::size_t line_no) {
    nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object())
        throw ParseError(line_no, "line", "not a JSON object");
    if (obj.size() != kFieldNames.size())
        throw ParseError(line_no, "line", "expected 8 fields, got " + std::to_string(obj.size()));

    FlowRecord r;
    auto ts = obj.find("timestamp");
    if (ts == obj.end()) throw ParseError(line_no, "timestamp", "missing");
    if (!ts->is_number()) throw ParseError(line_no, "timestamp", "not a number");
    r.timestamp = ts->get<double>();
    r.src_addr = json_addr(obj, kFieldNames[1], line_no);
    r.dst_addr = json_addr(obj, kFieldNames[2], line_no);
    r.src_port = json_unsigned<std::uint16_t>(obj, kFieldNames[3], line_no, 65535);
    r.dst_port = json_unsigned<std::uint16_t>(obj, kFieldNames[4], line_no, 65535);
    r.protocol = json_unsigned<std::uint8_t>(obj, kFieldNames[5], line_no, 255);
    r.packet_count = json_unsigned<std::uint64_t>(obj, kFieldNames[6], line_no, UINT64_MAX);
    r.byte_count = json_unsigned<std::uint64_t>(obj, kFieldNames[7], line_no, UINT64_MAX);
    validate(r, line_no);
    return r;
}

} // namespace

std::string format_ipv4(Ipv4 addr) {
    return std::to_string((addr >> 24) & 0xff) + '.' + std::to_string((addr >> 16) & 0xff) + '.' +
           std::to_string((addr >> 8) & 0xff) + '.' + std::to_string(addr & 0xff);
}

Ipv4 parse_ipv4(std::string_view text) {
    Ipv4 addr = 0;
    if (!try_parse_ipv4(trim(text), addr))
        throw ConfigError("not an IPv4 address: '" + std::string(text) + "'");
    return addr;
}

std::string FlowKey::to_string() const {
    return format_ipv4(dst_addr) + ':' + std::to_string(dst_port);
}

std::uint64_t TrafficWindow::packet_total() const {
    std::uint64_t total = 0;
    for (const auto& r : records) total += r.packet_count;
    return total;
}

TraceFormat trace_format_from_string(std::string_view name) {
    if (name == "csv") return TraceFormat::Csv;
    if (name == "jsonl") return TraceFormat::Jsonl;
    throw ConfigError("unknown trace format '" + std::string(name) + "' (expected csv or jsonl)");
}

TraceFormat trace_format_for_path(std::string_view path) {
    auto ends_with = [&](std::string_view suffix) {
        return path.size() >= suffix.size() && path.substr(path.size() - suffix.size()) == suffix;
    };
    return (ends_with(".jsonl") || ends_with(".json")) ? TraceFormat::Jsonl : TraceFormat::Csv;
}

FlowRecord parse_flow_record(std::string_view line, TraceFormat format, std::size_t line_no) {
    line = trim(line);
    if (line.empty()) throw ParseError(line_no, "line", "empty line");
    return format == TraceFormat::Csv ? parse_csv(line, line_no) : parse_jsonl(line, line_no);
}

std::string serialize_flow_record(const FlowRecord& r, TraceFormat format) {
    if (format == TraceFormat::Csv) {
        std::string out = format_double(r.timestamp);
        out += ',';
        out += format_ipv4(r.src_addr);
        out += ',';
        out += format_ipv4(r.dst_addr);
        out += ',';
        out += std::to_string(r.src_port);
        out += ',';
        out += std::to_string(r.dst_port);
        out += ',';
        out += std::to_string(r.protocol);
        out += ',';
        out += std::to_string(r.packet_count);
        out += ',';
        out += std::to_string(r.byte_count);
        return out;
    }
    nlohmann::ordered_json obj;
    obj["timestamp"] = r.timestamp;
    obj["src_addr"] = format_ipv4(r.src_addr);
    obj["dst_addr"] = format_ipv4(r.dst_addr);
    obj["src_port"] = r.src_port;
    obj["dst_port"] = r.dst_port;
    obj["protocol"] = r.protocol;
    obj["packet_count"] = r.packet_count;
    obj["byte_count"] = r.byte_count;
    return obj.dump();
}

std::vector<FlowRecord> read_trace(std::istream& in, TraceFormat format) {
    std::vector<FlowRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = trim(line);
        if (view.empty()) continue;
        if (format == TraceFormat::Csv && records.empty() && view.starts_with("timestamp")) continue;
        records.push_back(parse_flow_record(view, format, line_no));
    }
    if (in.bad()) throw IoError("read failure after line " + std::to_string(line_no));
    return records;
}

std::vector<FlowRecord> read_trace_file(const std::string& path, TraceFormat format) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open trace '" + path + "'");
    return read_trace(in, format);
}

std::vector<FlowRecord> read_trace_file(const std::string& path) {
    return read_trace_file(path, trace_format_for_path(path));
}

void write_trace(std::ostream& out, std::span<const FlowRecord> records, TraceFormat format) {
    if (format == TraceFormat::Csv) out << kCsvHeader << '\n';
    for (const auto& r : records) out << serialize_flow_record(r, format) << '\n';
    if (!out) throw IoError("trace write failed");
}

void write_trace_file(const std::string& path, std::span<const FlowRecord> records) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_trace(out, records, trace_format_for_path(path));
    out.flush();
    if (!out) throw IoError("write to '" + path + "' failed");
}

std::vector<TrafficWindow> windowize(std::span<const FlowRecord> records, double duration) {
    if (!(duration > 0.0) || !std::isfinite(duration))
        throw ConfigError("window duration must be positive, got " + format_double(duration));
    for (std::size_t i = 1; i < records.size(); ++i)
        if (records[i].timestamp < records[i - 1].timestamp) throw OrderingError(i);

    std::vector<TrafficWindow> windows;
    if (records.empty()) return windows;

    const double epoch = records.front().timestamp;
    auto make_window = [&](std::uint64_t idx) {
        TrafficWindow w;
        w.index = idx;
        w.start_time = epoch + static_cast<double>(idx) * duration;
        w.duration = duration;
        return w;
    };

    for (const auto& r : records) {
        auto idx = static_cast<std::uint64_t>(std::floor((r.timestamp - epoch) / duration));
        // Guard the half-open bounds against rounding in the division.
        while (idx > 0 && r.timestamp < epoch + static_cast<double>(idx) * duration) --idx;
        while (r.timestamp >= epoch + static_cast<double>(idx + 1) * duration) ++idx;
        while (windows.size() <= idx) windows.push_back(make_window(windows.size()));
        windows[idx].records.push_back(r);
    }
    return windows;
}

std::map<FlowKey, std::vector<FlowRecord>> group_by_flow_key(const TrafficWindow& window) {
    std::map<FlowKey, std::vector<FlowRecord>> groups;
    for (const auto& r : window.records) groups[FlowKey::of(r)].push_back(r);
    return groups;
}

} // namespace ddos
