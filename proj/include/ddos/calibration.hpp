#ifndef DDOS_CALIBRATION_HPP
#define DDOS_CALIBRATION_HPP

#include "ddos/detector.hpp"
#include "ddos/entropy.hpp"
#include "ddos/flow_model.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ddos {

/**
 * Nearest-rank lower quantile: the ceil(target_fpr * N)-th smallest sample
 * (1-based). Used as a "below is anomalous" threshold, at most
 * ceil(target_fpr * N) - 1 samples fall strictly beneath it.
 *
 * Throws CalibrationError on empty input and ConfigError unless
 * 0 < target_fpr < 1.
 */
double calibrate_threshold(std::span<const double> samples, double target_fpr);

struct BaselineProfile {
    FeatureKind feature = FeatureKind::SrcAddr;
    std::vector<double> ne_samples;    // one per non-empty baseline window
    std::vector<double> rate_samples;  // dominant-flow entropy rates
};

inline constexpr std::size_t kMinBaselineWindows = 10;

struct Baseline {
    std::string config_digest;
    std::vector<BaselineProfile> profiles;  // one per configured feature

    /**
     * Per-window stage-1 score under the config's combination rule: the
     * smallest NE across features for ANY, the largest for ALL. A window
     * trips stage 1 exactly when its score is below th1.
     */
    std::vector<double> window_scores(Combination combination) const;
};

/// Throws InsufficientDataError when the trace spans fewer than 10 windows.
Baseline build_baseline(std::span<const FlowRecord> clean_trace, DetectorConfig config);

struct CalibratedThresholds {
    double th1 = 0.0;
    double th2 = 0.0;
};

CalibratedThresholds calibrate_thresholds(const Baseline& baseline, double target_fpr, Combination combination);

nlohmann::ordered_json profile_document(const Baseline& baseline, const DetectorConfig& config, double target_fpr,
                                        const CalibratedThresholds& thresholds);

struct LoadedProfile {
    Baseline baseline;
    CalibratedThresholds thresholds;
    double target_fpr = 0.0;
};

/// Parses a profile document. Throws CalibrationError when its digest does
/// not match `config`.
LoadedProfile load_profile(const nlohmann::json& doc, const DetectorConfig& config);

enum class WindowLabel { Clean, Attack };

struct LabeledWindow {
    std::uint64_t window_index = 0;
    WindowLabel label = WindowLabel::Clean;

    bool operator==(const LabeledWindow&) const = default;
};

std::string label_to_json_line(const LabeledWindow& label);
std::vector<LabeledWindow> read_labels(std::istream& in);
void write_labels(std::ostream& out, std::span<const LabeledWindow> labels);

struct EvaluationMetrics {
    std::optional<double> detection_rate;       // attack windows marked Attacked
    std::optional<double> false_positive_rate;  // clean windows marked Suspected or Attacked
    std::optional<double> stage1_fpr;           // clean windows tripping stage 1
    std::optional<double> stage2_fpr;           // clean windows confirmed at stage 2
    std::uint64_t attack_windows = 0;           // denominator of detection_rate
    std::uint64_t clean_windows = 0;            // denominator of the FPRs
    std::uint64_t detected = 0;
    std::uint64_t clean_flagged = 0;
    std::uint64_t clean_confirmed = 0;
    std::uint64_t empty_windows = 0;            // excluded from both denominators
};

nlohmann::ordered_json metrics_to_json(const EvaluationMetrics& metrics);

/// Cross-tabulates verdicts with labels; windows without traffic are skipped.
EvaluationMetrics tabulate(std::span<const TrafficWindow> windows, std::span<const WindowVerdict> verdicts,
                           std::span<const LabeledWindow> labels);

struct Evaluation {
    EvaluationMetrics metrics;
    PipelineResult pipeline;
};

/// Throws EvaluationError when the label count differs from the window count.
Evaluation evaluate(std::span<const FlowRecord> records, std::span<const LabeledWindow> labels,
                    const DetectorConfig& config, unsigned threads = 1);

} // namespace ddos

#endif // DDOS_CALIBRATION_HPP
