#ifndef DDOS_ALERTING_HPP
#define DDOS_ALERTING_HPP

#include "ddos/alert.hpp"
#include "ddos/detector.hpp"

#include <iosfwd>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace ddos {

std::string alert_to_json_line(const Alert& alert);

/// One-line human-readable message for the client, e.g.
/// "ATTACK CONFIRMED window 12: flow 203.0.113.10:80, entropy rate 0.00 ≤ th2 0.20".
std::string notify_client(const Alert& alert);

/**
 * Append-only JSONL alert log. Serializes writers and enforces window order
 * (and stage 1 before stage 2 within a window). A failed write throws
 * IoError; an invalid or out-of-order alert throws InvalidAlertError and
 * nothing is written.
 */
class JsonlAlertLog final : public AlertSink {
public:
    explicit JsonlAlertLog(std::ostream& out) : out_(out) {}

    void emit(const Alert& alert) override;
    std::size_t written() const { return written_; }

private:
    std::ostream& out_;
    std::mutex mutex_;
    std::size_t written_ = 0;
    std::optional<std::pair<std::uint64_t, int>> last_;
};

/// Appends alert to the log; returns the number of lines written so far.
std::size_t emit_alert(const Alert& alert, JsonlAlertLog& log);

/// Writes notify_client() text, one line per alert.
class ClientNotifier final : public AlertSink {
public:
    explicit ClientNotifier(std::ostream& out) : out_(out) {}
    void emit(const Alert& alert) override;

private:
    std::ostream& out_;
    std::mutex mutex_;
};

class FanOutSink final : public AlertSink {
public:
    explicit FanOutSink(std::vector<AlertSink*> sinks) : sinks_(std::move(sinks)) {}
    void emit(const Alert& alert) override {
        for (auto* s : sinks_) s->emit(alert);
    }

private:
    std::vector<AlertSink*> sinks_;
};

/// Collects alerts in memory.
class VectorAlertSink final : public AlertSink {
public:
    void emit(const Alert& alert) override { alerts.push_back(alert); }
    std::vector<Alert> alerts;
};

struct AttackInterval {
    std::uint64_t start_window = 0;
    std::uint64_t end_window = 0;  // inclusive
    FlowKey victim;
    double peak_dominance = 0.0;

    bool operator==(const AttackInterval&) const = default;
};

struct AdvisoryReport {
    std::string trace;
    std::string config_digest;
    std::vector<AttackInterval> attack_intervals;
    PipelineSummary totals;
};

/// Consecutive Attacked windows on the same flow form one interval.
AdvisoryReport build_advisory_report(std::span<const WindowVerdict> verdicts, const DetectorConfig& config,
                                     std::string trace_identity);

/// Pretty-printed JSON document with a trailing newline.
std::string advisory_report_to_json(const AdvisoryReport& report);

} // namespace ddos

#endif // DDOS_ALERTING_HPP
