#include "ddos/alerting.hpp"

#include "ddos/errors.hpp"

#include <json.hpp>

#include <cstdio>
#include <ostream>

namespace ddos {

void validate_alert(const Alert& a) {
    if (a.stage == 1) {
        if (!a.feature) throw InvalidAlertError("stage-1 alert without a feature");
        if (!(a.observed < a.threshold))
            throw InvalidAlertError("stage-1 alert requires observed < threshold");
    } else if (a.stage == 2) {
        if (!a.flow) throw InvalidAlertError("stage-2 alert without a flow");
        if (!(a.observed <= a.threshold))
            throw InvalidAlertError("stage-2 alert requires observed <= threshold");
    } else {
        throw InvalidAlertError("alert stage must be 1 or 2, got " + std::to_string(a.stage));
    }
}

std::string alert_to_json_line(const Alert& a) {
    nlohmann::ordered_json j;
    j["window_index"] = a.window_index;
    j["stage"] = a.stage;
    j["timestamp"] = a.timestamp;
    j["feature"] = a.feature ? nlohmann::ordered_json(std::string(feature_name(*a.feature))) : nlohmann::ordered_json();
    j["observed"] = a.observed;
    j["threshold"] = a.threshold;
    if (a.flow) {
        j["flow"] = {{"dst_addr", format_ipv4(a.flow->dst_addr)}, {"dst_port", a.flow->dst_port}};
    } else {
        j["flow"] = nullptr;
    }
    j["message"] = a.message;
    return j.dump();
}

std::string notify_client(const Alert& a) {
    char buf[256];
    if (a.stage == 2) {
        const std::string flow = a.flow ? a.flow->to_string() : "unknown";
        std::snprintf(buf, sizeof buf, "ATTACK CONFIRMED window %llu: flow %s, entropy rate %.2f ≤ th2 %.2f",
                      static_cast<unsigned long long>(a.window_index), flow.c_str(), a.observed, a.threshold);
    } else {
        const std::string feature = a.feature ? std::string(feature_name(*a.feature)) : "unknown";
        std::snprintf(buf, sizeof buf, "SUSPECTED window %llu: feature %s, normalized entropy %.2f < th1 %.2f",
                      static_cast<unsigned long long>(a.window_index), feature.c_str(), a.observed, a.threshold);
    }
    return buf;
}

void JsonlAlertLog::emit(const Alert& alert) {
    validate_alert(alert);
    std::lock_guard lock(mutex_);
    const std::pair<std::uint64_t, int> pos{alert.window_index, alert.stage};
    if (last_ && pos <= *last_)
        throw InvalidAlertError("alert for window " + std::to_string(alert.window_index) + " stage " +
                                std::to_string(alert.stage) + " is out of order");
    out_ << alert_to_json_line(alert) << '\n';
    out_.flush();
    if (!out_) throw IoError("alert log write failed");
    last_ = pos;
    ++written_;
}

std::size_t emit_alert(const Alert& alert, JsonlAlertLog& log) {
    log.emit(alert);
    return log.written();
}

void ClientNotifier::emit(const Alert& alert) {
    std::lock_guard lock(mutex_);
    out_ << notify_client(alert) << '\n';
    if (!out_) throw IoError("client notification write failed");
}

AdvisoryReport build_advisory_report(std::span<const WindowVerdict> verdicts, const DetectorConfig& config,
                                     std::string trace_identity) {
    AdvisoryReport report;
    report.trace = std::move(trace_identity);
    report.config_digest = config.digest();
    report.totals.windows = verdicts.size();

    std::optional<std::uint64_t> prev_attacked;
    for (const auto& v : verdicts) {
        if (v.state != VerdictState::Normal) ++report.totals.suspected;
        if (v.state != VerdictState::Attacked || !v.attack_flow) continue;
        ++report.totals.attacked;
        report.totals.discarded_packets += v.discarded_packets;

        const double share = v.dominant_share.value_or(0.0);
        auto& intervals = report.attack_intervals;
        const bool extends = !intervals.empty() && prev_attacked && *prev_attacked + 1 == v.window_index &&
                             intervals.back().victim == *v.attack_flow;
        if (extends) {
            intervals.back().end_window = v.window_index;
            intervals.back().peak_dominance = std::max(intervals.back().peak_dominance, share);
        } else {
            intervals.push_back({v.window_index, v.window_index, *v.attack_flow, share});
        }
        prev_attacked = v.window_index;
    }
    return report;
}

std::string advisory_report_to_json(const AdvisoryReport& r) {
    nlohmann::ordered_json j;
    j["trace"] = r.trace;
    j["config_digest"] = r.config_digest;
    auto& intervals = j["attack_intervals"] = nlohmann::ordered_json::array();
    for (const auto& iv : r.attack_intervals) {
        nlohmann::ordered_json e;
        e["start_window"] = iv.start_window;
        e["end_window"] = iv.end_window;
        e["victim"] = {{"dst_addr", format_ipv4(iv.victim.dst_addr)}, {"dst_port", iv.victim.dst_port}};
        e["peak_dominance"] = iv.peak_dominance;
        intervals.push_back(std::move(e));
    }
    j["totals"] = {{"windows", r.totals.windows},
                   {"suspected", r.totals.suspected},
                   {"attacked", r.totals.attacked},
                   {"discarded_packets", r.totals.discarded_packets}};
    return j.dump(2) + "\n";
}

} // namespace ddos
