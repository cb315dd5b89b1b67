#include "ddos/entropy.hpp"

#include "ddos/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <string>

namespace ddos {

namespace {

void check_base(double base) {
    if (!(base > 1.0) || !std::isfinite(base))
        throw ConfigError("log base must be greater than 1, got " + std::to_string(base));
}

// -sum p ln p for counts summing to `total`, in nats.
template <typename Counts>
double entropy_nats(const Counts& counts, std::uint64_t total) {
    if (total == 0) return 0.0;
    const double m = static_cast<double>(total);
    double h = 0.0;
    for (std::uint64_t c : counts) {
        const double p = static_cast<double>(c) / m;
        h -= p * std::log(p);
    }
    return h;
}

double clamp_entropy(double h, std::size_t distinct) {
    if (distinct <= 1) return 0.0;
    return std::clamp(h, 0.0, std::log(static_cast<double>(distinct)));
}

struct CountView {
    std::span<const FeatureDistribution::Bin> bins;
    struct iterator {
        const FeatureDistribution::Bin* p;
        std::uint64_t operator*() const { return p->second; }
        iterator& operator++() { ++p; return *this; }
        bool operator!=(const iterator& o) const { return p != o.p; }
    };
    iterator begin() const { return {bins.data()}; }
    iterator end() const { return {bins.data() + bins.size()}; }
};

} // namespace

std::string_view feature_name(FeatureKind kind) {
    switch (kind) {
        case FeatureKind::SrcAddr: return "SrcAddr";
        case FeatureKind::DstAddr: return "DstAddr";
        case FeatureKind::SrcPort: return "SrcPort";
        case FeatureKind::DstPort: return "DstPort";
        case FeatureKind::FlowSize: return "FlowSize";
        case FeatureKind::InDegree: return "InDegree";
    }
    return "?";
}

FeatureKind parse_feature(std::string_view name) {
    auto lower = [](std::string_view s) {
        std::string out(s);
        for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return out;
    };
    const std::string wanted = lower(name);
    for (FeatureKind k : kAllFeatures)
        if (lower(feature_name(k)) == wanted) return k;
    throw ConfigError("unknown feature '" + std::string(name) +
                      "' (expected SrcAddr, DstAddr, SrcPort, DstPort, FlowSize or InDegree)");
}

FeatureDistribution FeatureDistribution::from_observations(FeatureKind feature, std::vector<Bin> obs) {
    FeatureDistribution dist(feature);
    std::sort(obs.begin(), obs.end(), [](const Bin& a, const Bin& b) { return a.first < b.first; });
    for (const auto& [value, count] : obs) {
        if (count == 0) continue;
        if (!dist.bins_.empty() && dist.bins_.back().first == value)
            dist.bins_.back().second += count;
        else
            dist.bins_.emplace_back(value, count);
        dist.total_ += count;
    }
    return dist;
}

std::uint64_t FeatureDistribution::count_of(std::uint64_t value) const {
    auto it = std::lower_bound(bins_.begin(), bins_.end(), value,
                               [](const Bin& b, std::uint64_t v) { return b.first < v; });
    return (it != bins_.end() && it->first == value) ? it->second : 0;
}

double FeatureDistribution::probability(std::uint64_t value) const {
    return total_ == 0 ? 0.0 : static_cast<double>(count_of(value)) / static_cast<double>(total_);
}

FeatureDistribution in_degree_distribution(const TrafficWindow& window) {
    std::vector<std::pair<Ipv4, Ipv4>> edges;
    edges.reserve(window.records.size());
    for (const auto& r : window.records) edges.emplace_back(r.dst_addr, r.src_addr);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    std::vector<FeatureDistribution::Bin> degrees;
    for (std::size_t i = 0; i < edges.size();) {
        std::size_t j = i;
        while (j < edges.size() && edges[j].first == edges[i].first) ++j;
        degrees.emplace_back(j - i, 1);
        i = j;
    }
    return FeatureDistribution::from_observations(FeatureKind::InDegree, std::move(degrees));
}

FeatureDistribution build_distribution(const TrafficWindow& window, FeatureKind feature) {
    if (feature == FeatureKind::InDegree) return in_degree_distribution(window);

    std::vector<FeatureDistribution::Bin> obs;
    obs.reserve(window.records.size());
    if (feature == FeatureKind::FlowSize) {
        for (const auto& [key, records] : group_by_flow_key(window)) {
            std::uint64_t size = 0;
            for (const auto& r : records) size += r.packet_count;
            obs.emplace_back(size, 1);
        }
        return FeatureDistribution::from_observations(feature, std::move(obs));
    }
    for (const auto& r : window.records) {
        std::uint64_t value = 0;
        switch (feature) {
            case FeatureKind::SrcAddr: value = r.src_addr; break;
            case FeatureKind::DstAddr: value = r.dst_addr; break;
            case FeatureKind::SrcPort: value = r.src_port; break;
            case FeatureKind::DstPort: value = r.dst_port; break;
            default: break;
        }
        obs.emplace_back(value, r.packet_count);
    }
    return FeatureDistribution::from_observations(feature, std::move(obs));
}

double shannon_entropy(const FeatureDistribution& dist, double base) {
    check_base(base);
    const double h = clamp_entropy(entropy_nats(CountView{dist.bins()}, dist.total()), dist.distinct());
    return h / std::log(base);
}

double normalized_entropy(const FeatureDistribution& dist, double base) {
    check_base(base);
    if (dist.distinct() <= 1) return 0.0;
    const double h = clamp_entropy(entropy_nats(CountView{dist.bins()}, dist.total()), dist.distinct());
    return std::clamp(h / std::log(static_cast<double>(dist.distinct())), 0.0, 1.0);
}

EntropyReport entropy_report(const TrafficWindow& window, FeatureKind feature, double base) {
    const auto dist = build_distribution(window, feature);
    EntropyReport report;
    report.window_index = window.index;
    report.feature = feature;
    report.entropy = shannon_entropy(dist, base);
    report.normalized_entropy = normalized_entropy(dist, base);
    report.distinct = dist.distinct();
    report.total = dist.total();
    return report;
}

double entropy_rate(std::span<const std::uint64_t> symbols, std::size_t k, double base) {
    check_base(base);
    if (k < 1) throw ConfigError("block order must be at least 1");
    if (symbols.size() < k)
        throw InsufficientDataError("sequence of length " + std::to_string(symbols.size()) +
                                    " is shorter than block order " + std::to_string(k));

    // Blocks wrap around the end of the sequence, so a length-n sequence has
    // exactly n blocks and periodic sequences get exact block frequencies.
    const std::size_t n_blocks = symbols.size();
    std::vector<std::uint64_t> counts;
    if (k == 1) {
        std::vector<std::uint64_t> sorted(symbols.begin(), symbols.end());
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < sorted.size();) {
            std::size_t j = i;
            while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
            counts.push_back(j - i);
            i = j;
        }
    } else {
        std::vector<std::uint64_t> wrapped(symbols.begin(), symbols.end());
        wrapped.insert(wrapped.end(), symbols.begin(), symbols.begin() + static_cast<std::ptrdiff_t>(k - 1));
        const std::span<const std::uint64_t> ext(wrapped);
        std::vector<std::size_t> starts(n_blocks);
        std::iota(starts.begin(), starts.end(), std::size_t{0});
        auto block = [&](std::size_t s) { return ext.subspan(s, k); };
        auto less = [&](std::size_t a, std::size_t b) {
            auto x = block(a), y = block(b);
            return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
        };
        auto equal = [&](std::size_t a, std::size_t b) {
            auto x = block(a), y = block(b);
            return std::equal(x.begin(), x.end(), y.begin());
        };
        std::sort(starts.begin(), starts.end(), less);
        for (std::size_t i = 0; i < starts.size();) {
            std::size_t j = i;
            while (j < starts.size() && equal(starts[j], starts[i])) ++j;
            counts.push_back(j - i);
            i = j;
        }
    }
    const double h = clamp_entropy(entropy_nats(counts, n_blocks), counts.size());
    return h / std::log(base) / static_cast<double>(k);
}

void StreamingEntropy::add(std::uint64_t value, std::uint64_t count) {
    if (count == 0) return;
    auto& m = counts_[value];
    auto m_log_m = [](std::uint64_t c) {
        return c == 0 ? 0.0 : static_cast<double>(c) * std::log(static_cast<double>(c));
    };
    sum_m_log_m_ -= m_log_m(m);
    m += count;
    sum_m_log_m_ += m_log_m(m);
    total_ += count;
}

double StreamingEntropy::entropy(double base) const {
    check_base(base);
    if (counts_.size() <= 1) return 0.0;
    const double m = static_cast<double>(total_);
    const double h = std::log(m) - sum_m_log_m_ / m;
    return clamp_entropy(h, counts_.size()) / std::log(base);
}

} // namespace ddos
