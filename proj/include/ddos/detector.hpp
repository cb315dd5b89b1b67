#ifndef DDOS_DETECTOR_HPP
#define DDOS_DETECTOR_HPP

#include "ddos/alert.hpp"
#include "ddos/entropy.hpp"
#include "ddos/flow_model.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ddos {

enum class Combination { Any, All };

std::string_view combination_name(Combination c);
Combination parse_combination(std::string_view name);

struct DetectorConfig {
    double window_duration = 1.0;
    std::vector<FeatureKind> features = {FeatureKind::SrcAddr, FeatureKind::DstAddr,
                                         FeatureKind::SrcPort, FeatureKind::DstPort};
    double th1 = 0.5;   // normalized entropy, base independent
    double th2 = 0.2;   // entropy rate, in units of log_base
    double log_base = 2.0;
    std::size_t block_order = 2;
    std::size_t confirmation_history = 5;
    Combination combination = Combination::Any;

    // Throws ConfigError on any out-of-range field. Sorts and dedups features.
    void validate();

    /**
     * Hex digest of the fields that shape measurements (window, features,
     * log base, block order, history, combination). Thresholds are excluded
     * so a calibrated profile can be matched to the detector that uses it.
     */
    std::string digest() const;
};

nlohmann::ordered_json config_to_json(const DetectorConfig& config);

enum class VerdictState { Normal, Suspected, Attacked };

std::string_view verdict_state_name(VerdictState s);

struct WindowVerdict {
    std::uint64_t window_index = 0;
    VerdictState state = VerdictState::Normal;
    std::vector<FeatureKind> triggering_features;
    std::map<FeatureKind, double> ne_values;
    std::optional<double> entropy_rate;
    std::optional<FlowKey> attack_flow;
    std::uint64_t discarded_packets = 0;
    // Packet share of the suspected window's dominant flow, set whenever
    // stage 2 ran. Feeds the advisory report's peak dominance.
    std::optional<double> dominant_share;
    std::optional<std::string> note;

    bool operator==(const WindowVerdict&) const = default;
};

std::string verdict_to_json_line(const WindowVerdict& verdict);
WindowVerdict verdict_from_json(const nlohmann::json& obj);
std::vector<WindowVerdict> read_verdicts(std::istream& in);

struct Stage1Result {
    VerdictState state = VerdictState::Normal;  // Normal or Suspected
    std::vector<FeatureKind> triggering_features;
    std::vector<EntropyReport> reports;
};

Stage1Result stage1_detect(const TrafficWindow& window, const DetectorConfig& config);

struct DominantFlow {
    FlowKey key;
    double share = 0.0;
    std::uint64_t packets = 0;
};

/// Largest packet share; ties go to the smaller (dst_addr, dst_port).
/// Throws InsufficientDataError on an empty window.
DominantFlow identify_dominant_flow(const TrafficWindow& window);

/**
 * Per-packet source addresses of `key`'s records across `history`, in record
 * order; each record contributes its src_addr packet_count times.
 */
std::vector<std::uint64_t> confirmation_symbols(std::span<const TrafficWindow> history, const FlowKey& key);

struct Stage2Result {
    VerdictState state = VerdictState::Suspected;  // Suspected or Attacked
    std::optional<double> entropy_rate;
    std::optional<FlowKey> attack_flow;
    DominantFlow dominant;
    std::uint64_t discarded_packets = 0;
    std::optional<std::string> note;
};

/**
 * Confirms a suspected window. `history` ends with the suspected window and
 * holds at most config.confirmation_history windows. Attacked iff the
 * dominant flow's source-sequence entropy rate is <= th2.
 */
Stage2Result stage2_confirm(std::uint64_t suspected_index, std::span<const TrafficWindow> history,
                            const DetectorConfig& config);

/// The window slice stage 2 looks at for windows[i].
std::span<const TrafficWindow> confirmation_history(std::span<const TrafficWindow> windows, std::size_t i,
                                                    std::size_t history_len);

struct PipelineSummary {
    std::uint64_t windows = 0;
    std::uint64_t suspected = 0;  // stage-1 trips, including later confirmed ones
    std::uint64_t attacked = 0;
    std::uint64_t discarded_packets = 0;

    bool operator==(const PipelineSummary&) const = default;
};

struct PipelineResult {
    PipelineSummary summary;
    std::vector<WindowVerdict> verdicts;
};

/// Alert text for a verdict's stage-1 and stage-2 events (see alerting.hpp).
std::vector<Alert> alerts_for(const WindowVerdict& verdict, const TrafficWindow& window,
                              const DetectorConfig& config);

/**
 * Windowizes `records`, runs stage 1 on every window (concurrently across
 * `threads` workers, 0 = hardware concurrency) and stage 2 on every suspected
 * window in index order, then emits alerts in window order. Output does not
 * depend on the thread count.
 */
PipelineResult run_pipeline(std::span<const FlowRecord> records, DetectorConfig config, AlertSink& sink,
                            unsigned threads = 1);

PipelineResult run_pipeline_windows(std::span<const TrafficWindow> windows, DetectorConfig config,
                                    AlertSink& sink, unsigned threads = 1);

} // namespace ddos

#endif // DDOS_DETECTOR_HPP
