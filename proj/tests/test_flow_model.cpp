#include "ddos/errors.hpp"
#include "ddos/flow_model.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

using namespace ddos;
using ddos::testing::rec;
using ddos::testing::window_of;

TEST_CASE("parse_flow_record maps CSV fields in order") {
    auto r = parse_flow_record("0.5,10.0.0.1,10.0.0.2,1234,80,6,3,1800", TraceFormat::Csv);
    CHECK(r.timestamp == 0.5);
    CHECK(r.src_addr == parse_ipv4("10.0.0.1"));
    CHECK(r.dst_addr == parse_ipv4("10.0.0.2"));
    CHECK(r.src_port == 1234);
    CHECK(r.dst_port == 80);
    CHECK(r.protocol == 6);
    CHECK(r.packet_count == 3);
    CHECK(r.byte_count == 1800);
}

TEST_CASE("parse_flow_record rejects malformed lines with line and field") {
    auto expect_field = [](std::string_view line, std::string_view field) {
        try {
            parse_flow_record(line, TraceFormat::Csv, 7);
            FAIL("expected ParseError for " << line);
        } catch (const ParseError& e) {
            CHECK(e.line() == 7);
            CHECK(e.field() == field);
        }
    };
    expect_field("0.5,10.0.0.1,10.0.0.2,1234,99999,6,3,1800", "dst_port");
    expect_field("0.5,10.0.0.1,10.0.0.2,1234,80,6,0,1800", "packet_count");
    expect_field("0.5,10.0.0.1,10.0.0.2,1234,80,6,3", "line");
    expect_field("0.5,10.0.0.1,10.0.0.2,1234,80,6,3,1800,9", "line");
    expect_field("abc,10.0.0.1,10.0.0.2,1234,80,6,3,1800", "timestamp");
    expect_field("-1,10.0.0.1,10.0.0.2,1234,80,6,3,1800", "timestamp");
    expect_field("inf,10.0.0.1,10.0.0.2,1234,80,6,3,1800", "timestamp");
    expect_field("0.5,10.0.0.256,10.0.0.2,1234,80,6,3,1800", "src_addr");
    expect_field("0.5,10.0.0.1,10.0.0.2,1234,80,6,3,-5", "byte_count");
    expect_field("0.5,10.0.0.1,10.0.0.2,1234,80,300,3,1800", "protocol");
    CHECK_THROWS_AS(parse_flow_record("", TraceFormat::Csv), ParseError);
}

TEST_CASE("JSONL records carry the same eight fields") {
    auto r = parse_flow_record(
        R"({"timestamp":0.5,"src_addr":"10.0.0.1","dst_addr":"10.0.0.2","src_port":1234,"dst_port":80,"protocol":6,"packet_count":3,"byte_count":1800})",
        TraceFormat::Jsonl);
    CHECK(r == parse_flow_record("0.5,10.0.0.1,10.0.0.2,1234,80,6,3,1800", TraceFormat::Csv));
    CHECK_THROWS_AS(parse_flow_record(R"({"timestamp":0.5})", TraceFormat::Jsonl), ParseError);
    CHECK_THROWS_AS(
        parse_flow_record(
            R"({"timestamp":0.5,"src_addr":"10.0.0.1","dst_addr":"10.0.0.2","src_port":1234,"dst_port":70000,"protocol":6,"packet_count":3,"byte_count":1800})",
            TraceFormat::Jsonl),
        ParseError);
}

TEST_CASE("serialize(parse(line)) is the identity on 1000 random valid lines") {
    std::mt19937_64 rng(20261019);
    std::uniform_int_distribution<std::uint32_t> addr;
    std::uniform_int_distribution<int> port(0, 65535), proto(0, 255);
    std::uniform_int_distribution<std::uint64_t> pkts(1, 1'000'000), bytes(0, 1'000'000'000);
    std::uniform_real_distribution<double> ts(0.0, 1e6);
    for (auto format : {TraceFormat::Csv, TraceFormat::Jsonl}) {
        for (int i = 0; i < 1000; ++i) {
            FlowRecord r;
            r.timestamp = i % 10 == 0 ? std::floor(ts(rng)) : ts(rng);
            r.src_addr = addr(rng);
            r.dst_addr = addr(rng);
            r.src_port = static_cast<std::uint16_t>(port(rng));
            r.dst_port = static_cast<std::uint16_t>(port(rng));
            r.protocol = static_cast<std::uint8_t>(proto(rng));
            r.packet_count = pkts(rng);
            r.byte_count = bytes(rng);
            const std::string line = serialize_flow_record(r, format);
            const auto parsed = parse_flow_record(line, format);
            REQUIRE(parsed == r);
            REQUIRE(serialize_flow_record(parsed, format) == line);
        }
    }
}

TEST_CASE("read_trace accepts an optional header and skips blank lines") {
    std::istringstream with_header(std::string(kCsvHeader) + "\n0.1,1.1.1.1,2.2.2.2,1,2,6,1,0\n\n0.2,1.1.1.1,2.2.2.2,1,2,6,1,0\n");
    CHECK(read_trace(with_header, TraceFormat::Csv).size() == 2);
    std::istringstream bare("0.1,1.1.1.1,2.2.2.2,1,2,6,1,0\n");
    CHECK(read_trace(bare, TraceFormat::Csv).size() == 1);
    std::istringstream bad("0.1,1.1.1.1,2.2.2.2,1,2,6,1,0\n0.2,x,2.2.2.2,1,2,6,1,0\n");
    try {
        read_trace(bad, TraceFormat::Csv);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(e.field() == "src_addr");
    }
}

TEST_CASE("windowize buckets by floor((t - t0) / T)") {
    std::vector<FlowRecord> records = {rec(0.1, 1, 2), rec(0.9, 1, 2), rec(1.1, 1, 2)};
    // Epoch is the first record, so 1.1 - 0.1 = 1.0 lands in window 1.
    auto windows = windowize(records, 1.0);
    REQUIRE(windows.size() == 2);
    CHECK(windows[0].records.size() == 2);
    CHECK(windows[1].records.size() == 1);
    CHECK(windows[0].start_time == doctest::Approx(0.1));

    CHECK(windowize({}, 1.0).empty());
}

TEST_CASE("windowize emits empty windows across gaps") {
    std::vector<FlowRecord> records = {rec(0.0, 1, 2), rec(3.5, 1, 2)};
    auto windows = windowize(records, 1.0);
    REQUIRE(windows.size() == 4);
    CHECK(windows[1].empty());
    CHECK(windows[2].empty());
    for (std::size_t i = 0; i < windows.size(); ++i) CHECK(windows[i].index == i);
}

TEST_CASE("windowize rejects bad duration and unsorted input") {
    std::vector<FlowRecord> records = {rec(0.0, 1, 2), rec(2.0, 1, 2), rec(1.0, 1, 2)};
    CHECK_THROWS_AS(windowize(records, 0.0), ConfigError);
    CHECK_THROWS_AS(windowize(records, -1.0), ConfigError);
    try {
        windowize(records, 1.0);
        FAIL("expected OrderingError");
    } catch (const OrderingError& e) {
        CHECK(e.index() == 2);
    }
}

TEST_CASE("windowize partitions 10000 random timestamps like brute-force floor bucketing") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ts(5.0, 500.0);
    std::vector<double> times(10000);
    for (auto& t : times) t = ts(rng);
    std::sort(times.begin(), times.end());
    std::vector<FlowRecord> records;
    for (std::size_t i = 0; i < times.size(); ++i) {
        auto r = rec(times[i], static_cast<Ipv4>(i), 2);
        records.push_back(r);
    }
    const double T = 0.7;
    auto windows = windowize(records, T);

    std::size_t seen = 0;
    for (const auto& w : windows) {
        for (const auto& r : w.records) {
            const auto expected = static_cast<std::uint64_t>(std::floor((r.timestamp - times.front()) / T));
            REQUIRE(w.index == expected);
            REQUIRE(r.timestamp >= w.start_time);
            REQUIRE(r.timestamp < w.start_time + w.duration);
            ++seen;
        }
    }
    CHECK(seen == records.size());
    // No duplication: every src_addr (unique per record) appears once.
    std::vector<char> hit(records.size(), 0);
    for (const auto& w : windows)
        for (const auto& r : w.records) {
            REQUIRE(hit[r.src_addr] == 0);
            hit[r.src_addr] = 1;
        }
}

TEST_CASE("group_by_flow_key groups on destination address and port") {
    const Ipv4 A = 1, B = 2, V = 100, W = 200;
    auto w = window_of({rec(0.1, A, V, 80), rec(0.2, B, V, 80), rec(0.3, A, W, 443)});
    auto groups = group_by_flow_key(w);
    REQUIRE(groups.size() == 2);
    CHECK(groups.at(FlowKey{V, 80}).size() == 2);
    CHECK(groups.at(FlowKey{W, 443}).size() == 1);
    CHECK(group_by_flow_key(window_of({})).empty());
}

TEST_CASE("group_by_flow_key preserves packet totals and multiplicity") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        auto w = ddos::testing::random_window(rng, 1 + trial * 7);
        auto groups = group_by_flow_key(w);
        std::uint64_t pkts = 0;
        std::size_t count = 0;
        for (const auto& [key, records] : groups) {
            for (const auto& r : records) {
                CHECK(FlowKey::of(r) == key);
                pkts += r.packet_count;
            }
            count += records.size();
        }
        CHECK(count == w.records.size());
        CHECK(pkts == w.packet_total());
    }
}

TEST_CASE("ipv4 formatting round-trips") {
    CHECK(format_ipv4(parse_ipv4("203.0.113.10")) == "203.0.113.10");
    CHECK(FlowKey{parse_ipv4("10.0.0.1"), 80}.to_string() == "10.0.0.1:80");
    CHECK_THROWS_AS(parse_ipv4("1.2.3"), ConfigError);
    CHECK_THROWS_AS(parse_ipv4("1.2.3.4.5"), ConfigError);
}
