#include "ddos/calibration.hpp"

#include "ddos/errors.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

namespace ddos {

double calibrate_threshold(std::span<const double> samples, double target_fpr) {
    if (!(target_fpr > 0.0 && target_fpr < 1.0))
        throw ConfigError("target false-positive rate must lie in (0, 1)");
    if (samples.empty()) throw CalibrationError("no samples to calibrate on");

    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());

    const double n = static_cast<double>(sorted.size());
    const double rank_real = target_fpr * n;
    double rank = std::ceil(rank_real);
    // 0.07 * 100 lands a hair above 7; treat that as the integer it represents.
    if (rank - rank_real > 1.0 - 1e-9) rank -= 1.0;
    const auto idx = static_cast<std::size_t>(std::clamp(rank, 1.0, n));
    return sorted[idx - 1];
}

std::vector<double> Baseline::window_scores(Combination combination) const {
    std::vector<double> scores;
    if (profiles.empty()) return scores;
    scores = profiles.front().ne_samples;
    for (const auto& p : profiles) {
        if (p.ne_samples.size() != scores.size())
            throw CalibrationError("baseline profiles disagree on window count");
        for (std::size_t i = 0; i < scores.size(); ++i)
            scores[i] = combination == Combination::Any ? std::min(scores[i], p.ne_samples[i])
                                                        : std::max(scores[i], p.ne_samples[i]);
    }
    return scores;
}

Baseline build_baseline(std::span<const FlowRecord> clean_trace, DetectorConfig config) {
    config.validate();
    const auto windows = windowize(clean_trace, config.window_duration);
    if (windows.size() < kMinBaselineWindows)
        throw InsufficientDataError("baseline spans " + std::to_string(windows.size()) + " windows, need at least " +
                                    std::to_string(kMinBaselineWindows));

    Baseline baseline;
    baseline.config_digest = config.digest();
    for (auto f : config.features) baseline.profiles.push_back({f, {}, {}});

    std::vector<double> rates;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const auto& w = windows[i];
        if (w.empty()) continue;
        for (auto& p : baseline.profiles)
            p.ne_samples.push_back(normalized_entropy(build_distribution(w, p.feature), config.log_base));

        const auto history = confirmation_history(windows, i, config.confirmation_history);
        const auto dominant = identify_dominant_flow(w);
        const auto symbols = confirmation_symbols(history, dominant.key);
        if (symbols.size() >= config.block_order)
            rates.push_back(entropy_rate(symbols, config.block_order, config.log_base));
    }
    for (auto& p : baseline.profiles) p.rate_samples = rates;
    return baseline;
}

CalibratedThresholds calibrate_thresholds(const Baseline& baseline, double target_fpr, Combination combination) {
    if (baseline.profiles.empty()) throw CalibrationError("baseline has no feature profiles");
    CalibratedThresholds t;
    const auto scores = baseline.window_scores(combination);
    t.th1 = calibrate_threshold(scores, target_fpr);
    const auto& rates = baseline.profiles.front().rate_samples;
    if (rates.empty()) throw CalibrationError("baseline has no dominant-flow entropy-rate samples");
    t.th2 = calibrate_threshold(rates, target_fpr);
    return t;
}

nlohmann::ordered_json profile_document(const Baseline& baseline, const DetectorConfig& config, double target_fpr,
                                        const CalibratedThresholds& thresholds) {
    nlohmann::ordered_json doc;
    doc["config_digest"] = baseline.config_digest;
    doc["config"] = config_to_json(config);
    doc["target_fpr"] = target_fpr;
    doc["th1"] = thresholds.th1;
    doc["th2"] = thresholds.th2;
    auto& profiles = doc["profiles"] = nlohmann::ordered_json::array();
    for (const auto& p : baseline.profiles) {
        nlohmann::ordered_json e;
        e["feature"] = std::string(feature_name(p.feature));
        e["ne_samples"] = p.ne_samples;
        e["rate_samples"] = p.rate_samples;
        e["config_digest"] = baseline.config_digest;
        profiles.push_back(std::move(e));
    }
    return doc;
}

LoadedProfile load_profile(const nlohmann::json& doc, const DetectorConfig& config) {
    LoadedProfile out;
    try {
        out.baseline.config_digest = doc.at("config_digest").get<std::string>();
        if (out.baseline.config_digest != config.digest())
            throw CalibrationError("profile was calibrated for config " + out.baseline.config_digest +
                                   " but the detector config digest is " + config.digest());
        out.target_fpr = doc.at("target_fpr").get<double>();
        out.thresholds.th1 = doc.at("th1").get<double>();
        out.thresholds.th2 = doc.at("th2").get<double>();
        for (const auto& e : doc.at("profiles")) {
            BaselineProfile p;
            p.feature = parse_feature(e.at("feature").get<std::string>());
            p.ne_samples = e.at("ne_samples").get<std::vector<double>>();
            p.rate_samples = e.at("rate_samples").get<std::vector<double>>();
            out.baseline.profiles.push_back(std::move(p));
        }
    } catch (const nlohmann::json::exception& e) {
        throw CalibrationError(std::string("malformed profile document: ") + e.what());
    }
    return out;
}

std::string label_to_json_line(const LabeledWindow& label) {
    nlohmann::ordered_json j;
    j["window_index"] = label.window_index;
    j["label"] = label.label == WindowLabel::Attack ? "attack" : "clean";
    return j.dump();
}

std::vector<LabeledWindow> read_labels(std::istream& in) {
    std::vector<LabeledWindow> labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw ParseError(line_no, "line", "not a JSON object");
        LabeledWindow l;
        try {
            l.window_index = j.at("window_index").get<std::uint64_t>();
            const auto text = j.at("label").get<std::string>();
            if (text == "attack")
                l.label = WindowLabel::Attack;
            else if (text == "clean")
                l.label = WindowLabel::Clean;
            else
                throw ParseError(line_no, "label", "expected \"clean\" or \"attack\", got \"" + text + "\"");
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(line_no, "label", e.what());
        }
        labels.push_back(l);
    }
    return labels;
}

void write_labels(std::ostream& out, std::span<const LabeledWindow> labels) {
    for (const auto& l : labels) out << label_to_json_line(l) << '\n';
    if (!out) throw IoError("label write failed");
}

nlohmann::ordered_json metrics_to_json(const EvaluationMetrics& m) {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };
    nlohmann::ordered_json j;
    j["detection_rate"] = opt(m.detection_rate);
    j["false_positive_rate"] = opt(m.false_positive_rate);
    j["stage1_fpr"] = opt(m.stage1_fpr);
    j["stage2_fpr"] = opt(m.stage2_fpr);
    j["attack_windows"] = m.attack_windows;
    j["clean_windows"] = m.clean_windows;
    j["detected"] = m.detected;
    j["clean_flagged"] = m.clean_flagged;
    j["clean_confirmed"] = m.clean_confirmed;
    j["empty_windows"] = m.empty_windows;
    return j;
}

EvaluationMetrics tabulate(std::span<const TrafficWindow> windows, std::span<const WindowVerdict> verdicts,
                           std::span<const LabeledWindow> labels) {
    if (labels.size() != windows.size() || verdicts.size() != windows.size())
        throw EvaluationError("label count " + std::to_string(labels.size()) + " does not match window count " +
                              std::to_string(windows.size()));
    EvaluationMetrics m;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        if (labels[i].window_index != windows[i].index)
            throw EvaluationError("label " + std::to_string(i) + " names window " +
                                  std::to_string(labels[i].window_index));
        if (windows[i].empty()) {
            ++m.empty_windows;
            continue;
        }
        const auto state = verdicts[i].state;
        if (labels[i].label == WindowLabel::Attack) {
            ++m.attack_windows;
            if (state == VerdictState::Attacked) ++m.detected;
        } else {
            ++m.clean_windows;
            if (state != VerdictState::Normal) ++m.clean_flagged;
            if (state == VerdictState::Attacked) ++m.clean_confirmed;
        }
    }
    auto ratio = [](std::uint64_t num, std::uint64_t den) -> std::optional<double> {
        if (den == 0) return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    };
    m.detection_rate = ratio(m.detected, m.attack_windows);
    m.false_positive_rate = ratio(m.clean_flagged, m.clean_windows);
    m.stage1_fpr = m.false_positive_rate;
    m.stage2_fpr = ratio(m.clean_confirmed, m.clean_windows);
    return m;
}

Evaluation evaluate(std::span<const FlowRecord> records, std::span<const LabeledWindow> labels,
                    const DetectorConfig& config, unsigned threads) {
    DetectorConfig cfg = config;
    cfg.validate();
    const auto windows = windowize(records, cfg.window_duration);
    if (labels.size() != windows.size())
        throw EvaluationError("label count " + std::to_string(labels.size()) + " does not match window count " +
                              std::to_string(windows.size()));
    NullAlertSink sink;
    Evaluation ev;
    ev.pipeline = run_pipeline_windows(windows, cfg, sink, threads);
    ev.metrics = tabulate(windows, ev.pipeline.verdicts, labels);
    return ev;
}

} // namespace ddos
