#include "ddos/detector.hpp"

#include "ddos/alerting.hpp"
#include "ddos/errors.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <istream>
#include <mutex>
#include <thread>

namespace ddos {

namespace {

std::string shortest(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

nlohmann::ordered_json flow_to_json(const FlowKey& key) {
    nlohmann::ordered_json j;
    j["dst_addr"] = format_ipv4(key.dst_addr);
    j["dst_port"] = key.dst_port;
    return j;
}

FlowKey flow_from_json(const nlohmann::json& j) {
    FlowKey key;
    key.dst_addr = parse_ipv4(j.at("dst_addr").get<std::string>());
    key.dst_port = j.at("dst_port").get<std::uint16_t>();
    return key;
}

VerdictState parse_state(std::string_view s) {
    if (s == "Normal") return VerdictState::Normal;
    if (s == "Suspected") return VerdictState::Suspected;
    if (s == "Attacked") return VerdictState::Attacked;
    throw ConfigError("unknown verdict state '" + std::string(s) + "'");
}

} // namespace

std::string_view combination_name(Combination c) {
    return c == Combination::Any ? "any" : "all";
}

Combination parse_combination(std::string_view name) {
    if (name == "any" || name == "ANY") return Combination::Any;
    if (name == "all" || name == "ALL") return Combination::All;
    throw ConfigError("unknown feature combination '" + std::string(name) + "' (expected any or all)");
}

void DetectorConfig::validate() {
    if (!(window_duration > 0.0) || !std::isfinite(window_duration))
        throw ConfigError("window duration must be positive");
    if (features.empty()) throw ConfigError("at least one feature is required");
    std::sort(features.begin(), features.end());
    features.erase(std::unique(features.begin(), features.end()), features.end());
    if (!(th1 >= 0.0 && th1 <= 1.0)) throw ConfigError("th1 must lie in [0, 1]");
    if (!(th2 >= 0.0) || !std::isfinite(th2)) throw ConfigError("th2 must be non-negative");
    if (!(log_base > 1.0) || !std::isfinite(log_base)) throw ConfigError("log base must be greater than 1");
    if (block_order < 1) throw ConfigError("block order must be at least 1");
    if (confirmation_history < 1) throw ConfigError("confirmation history must be at least 1 window");
}

std::string DetectorConfig::digest() const {
    std::string canon = "window=" + shortest(window_duration) + ";features=";
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (i) canon += ',';
        canon += feature_name(features[i]);
    }
    canon += ";base=" + shortest(log_base);
    canon += ";k=" + std::to_string(block_order);
    canon += ";history=" + std::to_string(confirmation_history);
    canon += ";combine=";
    canon += combination_name(combination);

    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(canon)));
    return hex;
}

nlohmann::ordered_json config_to_json(const DetectorConfig& c) {
    nlohmann::ordered_json j;
    j["window-seconds"] = c.window_duration;
    auto& feats = j["features"] = nlohmann::ordered_json::array();
    for (auto f : c.features) feats.push_back(std::string(feature_name(f)));
    j["th1"] = c.th1;
    j["th2"] = c.th2;
    j["log-base"] = c.log_base;
    j["block-order"] = c.block_order;
    j["history"] = c.confirmation_history;
    j["combine"] = std::string(combination_name(c.combination));
    return j;
}

std::string_view verdict_state_name(VerdictState s) {
    switch (s) {
        case VerdictState::Normal: return "Normal";
        case VerdictState::Suspected: return "Suspected";
        case VerdictState::Attacked: return "Attacked";
    }
    return "?";
}

std::string verdict_to_json_line(const WindowVerdict& v) {
    nlohmann::ordered_json j;
    j["window_index"] = v.window_index;
    j["state"] = std::string(verdict_state_name(v.state));
    auto& trig = j["triggering_features"] = nlohmann::ordered_json::array();
    for (auto f : v.triggering_features) trig.push_back(std::string(feature_name(f)));
    auto& ne = j["ne_values"] = nlohmann::ordered_json::object();
    for (const auto& [f, value] : v.ne_values) ne[std::string(feature_name(f))] = value;
    j["entropy_rate"] = v.entropy_rate ? nlohmann::ordered_json(*v.entropy_rate) : nlohmann::ordered_json();
    j["attack_flow"] = v.attack_flow ? flow_to_json(*v.attack_flow) : nlohmann::ordered_json();
    j["discarded_packets"] = v.discarded_packets;
    j["dominant_share"] = v.dominant_share ? nlohmann::ordered_json(*v.dominant_share) : nlohmann::ordered_json();
    if (v.note) j["note"] = *v.note;
    return j.dump();
}

WindowVerdict verdict_from_json(const nlohmann::json& j) {
    WindowVerdict v;
    v.window_index = j.at("window_index").get<std::uint64_t>();
    v.state = parse_state(j.at("state").get<std::string>());
    for (const auto& f : j.at("triggering_features")) v.triggering_features.push_back(parse_feature(f.get<std::string>()));
    for (const auto& [name, value] : j.at("ne_values").items()) v.ne_values[parse_feature(name)] = value.get<double>();
    if (auto it = j.find("entropy_rate"); it != j.end() && !it->is_null()) v.entropy_rate = it->get<double>();
    if (auto it = j.find("attack_flow"); it != j.end() && !it->is_null()) v.attack_flow = flow_from_json(*it);
    v.discarded_packets = j.at("discarded_packets").get<std::uint64_t>();
    if (auto it = j.find("dominant_share"); it != j.end() && !it->is_null()) v.dominant_share = it->get<double>();
    if (auto it = j.find("note"); it != j.end()) v.note = it->get<std::string>();
    return v;
}

std::vector<WindowVerdict> read_verdicts(std::istream& in) {
    std::vector<WindowVerdict> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw ParseError(line_no, "line", "not a JSON object");
        try {
            out.push_back(verdict_from_json(j));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(line_no, "verdict", e.what());
        }
    }
    return out;
}

Stage1Result stage1_detect(const TrafficWindow& window, const DetectorConfig& config) {
    Stage1Result result;
    if (window.empty()) return result;

    std::size_t below = 0;
    for (FeatureKind f : config.features) {
        auto report = entropy_report(window, f, config.log_base);
        if (report.normalized_entropy < config.th1) {
            result.triggering_features.push_back(f);
            ++below;
        }
        result.reports.push_back(report);
    }
    const bool suspected = config.combination == Combination::Any ? below > 0 : below == config.features.size();
    if (suspected)
        result.state = VerdictState::Suspected;
    else
        result.triggering_features.clear();
    return result;
}

DominantFlow identify_dominant_flow(const TrafficWindow& window) {
    if (window.empty())
        throw InsufficientDataError("window " + std::to_string(window.index) + " has no traffic, so no dominant flow");
    std::map<FlowKey, std::uint64_t> packets;
    std::uint64_t total = 0;
    for (const auto& r : window.records) {
        packets[FlowKey::of(r)] += r.packet_count;
        total += r.packet_count;
    }
    // std::map iterates keys ascending, so strict > keeps the smallest key on ties.
    DominantFlow best;
    for (const auto& [key, n] : packets) {
        if (n > best.packets) {
            best.key = key;
            best.packets = n;
        }
    }
    best.share = static_cast<double>(best.packets) / static_cast<double>(total);
    return best;
}

std::vector<std::uint64_t> confirmation_symbols(std::span<const TrafficWindow> history, const FlowKey& key) {
    std::vector<std::uint64_t> symbols;
    for (const auto& w : history)
        for (const auto& r : w.records)
            if (FlowKey::of(r) == key) symbols.insert(symbols.end(), r.packet_count, r.src_addr);
    return symbols;
}

std::span<const TrafficWindow> confirmation_history(std::span<const TrafficWindow> windows, std::size_t i,
                                                    std::size_t history_len) {
    const std::size_t first = i + 1 >= history_len ? i + 1 - history_len : 0;
    return windows.subspan(first, i + 1 - first);
}

Stage2Result stage2_confirm(std::uint64_t suspected_index, std::span<const TrafficWindow> history,
                            const DetectorConfig& config) {
    if (history.empty() || history.back().index != suspected_index)
        throw ConfigError("confirmation history must end with window " + std::to_string(suspected_index));
    if (history.size() > config.confirmation_history)
        history = history.last(config.confirmation_history);

    const TrafficWindow& suspect = history.back();
    Stage2Result result;
    result.dominant = identify_dominant_flow(suspect);

    const auto symbols = confirmation_symbols(history, result.dominant.key);
    if (symbols.size() < config.block_order) {
        result.note = "insufficient data: " + std::to_string(symbols.size()) + " symbols for block order " +
                      std::to_string(config.block_order);
        return result;
    }
    const double rate = entropy_rate(symbols, config.block_order, config.log_base);
    result.entropy_rate = rate;
    if (rate <= config.th2) {
        result.state = VerdictState::Attacked;
        result.attack_flow = result.dominant.key;
        result.discarded_packets = result.dominant.packets;
    }
    return result;
}

std::vector<Alert> alerts_for(const WindowVerdict& v, const TrafficWindow& window, const DetectorConfig& config) {
    std::vector<Alert> alerts;
    if (v.state == VerdictState::Normal) return alerts;

    // Report the most concentrated triggering feature.
    Alert a1;
    a1.window_index = v.window_index;
    a1.stage = 1;
    a1.timestamp = window.start_time;
    a1.threshold = config.th1;
    a1.observed = 2.0;
    for (auto f : v.triggering_features) {
        const double ne = v.ne_values.at(f);
        if (ne < a1.observed) {
            a1.observed = ne;
            a1.feature = f;
        }
    }
    a1.message = notify_client(a1);
    alerts.push_back(std::move(a1));

    if (v.state == VerdictState::Attacked) {
        Alert a2;
        a2.window_index = v.window_index;
        a2.stage = 2;
        a2.timestamp = window.start_time;
        a2.observed = v.entropy_rate.value();
        a2.threshold = config.th2;
        a2.flow = v.attack_flow;
        a2.message = notify_client(a2);
        alerts.push_back(std::move(a2));
    }
    return alerts;
}

PipelineResult run_pipeline(std::span<const FlowRecord> records, DetectorConfig config, AlertSink& sink,
                            unsigned threads) {
    config.validate();
    const auto windows = windowize(records, config.window_duration);
    return run_pipeline_windows(windows, std::move(config), sink, threads);
}

PipelineResult run_pipeline_windows(std::span<const TrafficWindow> windows, DetectorConfig config,
                                    AlertSink& sink, unsigned threads) {
    config.validate();
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, windows.size())));

    // Stage 1: independent per window, so any worker may take any window.
    std::vector<Stage1Result> stage1(windows.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        try {
            for (std::size_t i = next++; i < windows.size(); i = next++) stage1[i] = stage1_detect(windows[i], config);
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    PipelineResult result;
    result.summary.windows = windows.size();
    result.verdicts.reserve(windows.size());
    for (std::size_t i = 0; i < windows.size(); ++i) {
        WindowVerdict v;
        v.window_index = windows[i].index;
        v.state = stage1[i].state;
        v.triggering_features = stage1[i].triggering_features;
        for (const auto& r : stage1[i].reports) v.ne_values[r.feature] = r.normalized_entropy;

        if (v.state == VerdictState::Suspected) {
            ++result.summary.suspected;
            auto s2 = stage2_confirm(windows[i].index, confirmation_history(windows, i, config.confirmation_history),
                                     config);
            v.state = s2.state;
            v.entropy_rate = s2.entropy_rate;
            v.attack_flow = s2.attack_flow;
            v.discarded_packets = s2.discarded_packets;
            v.dominant_share = s2.dominant.share;
            v.note = s2.note;
            if (v.state == VerdictState::Attacked) {
                ++result.summary.attacked;
                result.summary.discarded_packets += v.discarded_packets;
            }
        }
        result.verdicts.push_back(std::move(v));
    }

    for (std::size_t i = 0; i < windows.size(); ++i)
        for (const auto& alert : alerts_for(result.verdicts[i], windows[i], config)) sink.emit(alert);

    return result;
}

} // namespace ddos
