#ifndef DDOS_ENTROPY_HPP
#define DDOS_ENTROPY_HPP

#include "ddos/flow_model.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ddos {

/**
 * Traffic features a window can be profiled on.
 *
 * SrcAddr/DstAddr/SrcPort/DstPort count packets per value, FlowSize counts
 * flows per total packet size, InDegree counts destination hosts per number
 * of distinct sources contacting them.
 */
enum class FeatureKind : std::uint8_t { SrcAddr, DstAddr, SrcPort, DstPort, FlowSize, InDegree };

inline constexpr std::array<FeatureKind, 6> kAllFeatures = {
    FeatureKind::SrcAddr, FeatureKind::DstAddr, FeatureKind::SrcPort,
    FeatureKind::DstPort, FeatureKind::FlowSize, FeatureKind::InDegree};

std::string_view feature_name(FeatureKind kind);
// Accepts the canonical names above, case-insensitively. Throws ConfigError.
FeatureKind parse_feature(std::string_view name);

/**
 * Empirical counts of one feature within a window. Counts are held as a flat
 * map sorted by value, every count >= 1. Probabilities are derived on demand
 * as count/total.
 */
class FeatureDistribution {
public:
    using Bin = std::pair<std::uint64_t, std::uint64_t>;  // value, count

    FeatureDistribution() = default;
    explicit FeatureDistribution(FeatureKind feature) : feature_(feature) {}

    // Builds from an unsorted list of observations, merging duplicate values.
    // Zero-count observations are dropped.
    static FeatureDistribution from_observations(FeatureKind feature, std::vector<Bin> observations);

    FeatureKind feature() const { return feature_; }
    std::span<const Bin> bins() const { return bins_; }
    std::uint64_t total() const { return total_; }
    std::size_t distinct() const { return bins_.size(); }
    bool empty() const { return bins_.empty(); }
    std::uint64_t count_of(std::uint64_t value) const;
    double probability(std::uint64_t value) const;

private:
    FeatureKind feature_ = FeatureKind::SrcAddr;
    std::vector<Bin> bins_;
    std::uint64_t total_ = 0;
};

struct EntropyReport {
    std::uint64_t window_index = 0;
    FeatureKind feature = FeatureKind::SrcAddr;
    double entropy = 0.0;
    double normalized_entropy = 0.0;
    std::size_t distinct = 0;
    std::uint64_t total = 0;
};

FeatureDistribution build_distribution(const TrafficWindow& window, FeatureKind feature);
FeatureDistribution in_degree_distribution(const TrafficWindow& window);

/// H = -sum p log_base p. Zero for empty and single-valued distributions.
double shannon_entropy(const FeatureDistribution& dist, double base = 2.0);

/// H / log_base(n0), or 0 when fewer than two distinct values were seen.
double normalized_entropy(const FeatureDistribution& dist, double base = 2.0);

EntropyReport entropy_report(const TrafficWindow& window, FeatureKind feature, double base = 2.0);

/**
 * Plug-in entropy-rate estimate H_k / k over the overlapping length-k blocks
 * of `symbols`, read cyclically (a length-n sequence yields n blocks). With
 * k = 1 this is the sample entropy of the symbol counts.
 *
 * Throws ConfigError for k < 1 or base <= 1, InsufficientDataError when the
 * sequence is shorter than k.
 */
double entropy_rate(std::span<const std::uint64_t> symbols, std::size_t block_order, double base = 2.0);

/**
 * Incremental entropy over a growing multiset. Maintains sum(m_i ln m_i) so
 * each insertion is O(1); entropy() = ln m - S/m converted to `base`.
 */
class StreamingEntropy {
public:
    void add(std::uint64_t value, std::uint64_t count = 1);
    double entropy(double base = 2.0) const;
    std::uint64_t total() const { return total_; }
    std::size_t distinct() const { return counts_.size(); }

private:
    std::unordered_map<std::uint64_t, std::uint64_t> counts_;
    std::uint64_t total_ = 0;
    double sum_m_log_m_ = 0.0;
};

} // namespace ddos

#endif // DDOS_ENTROPY_HPP
