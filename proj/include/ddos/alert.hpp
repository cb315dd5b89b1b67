#ifndef DDOS_ALERT_HPP
#define DDOS_ALERT_HPP

#include "ddos/entropy.hpp"
#include "ddos/flow_model.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace ddos {

/**
 * A stage-1 (suspicion) or stage-2 (confirmation) event for one window.
 *
 * Stage 1 carries the feature whose normalized entropy fell below th1;
 * stage 2 carries the confirmed attack flow and its entropy rate.
 */
struct Alert {
    std::uint64_t window_index = 0;
    int stage = 1;
    double timestamp = 0.0;  // window start
    std::optional<FeatureKind> feature;
    double observed = 0.0;
    double threshold = 0.0;
    std::optional<FlowKey> flow;
    std::string message;
};

/// Throws InvalidAlertError unless the alert satisfies its stage's invariants.
void validate_alert(const Alert& alert);

class AlertSink {
public:
    virtual ~AlertSink() = default;
    virtual void emit(const Alert& alert) = 0;
};

/// Discards everything; for runs where only verdicts matter.
class NullAlertSink final : public AlertSink {
public:
    void emit(const Alert&) override {}
};

} // namespace ddos

#endif // DDOS_ALERT_HPP
