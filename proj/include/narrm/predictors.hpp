#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "narrm/narnn.hpp"

namespace narrm {

/// Oracle look-ahead; reads I(t). Only used as the ideal lower bound.
struct GenieSpec {};

/// s(t) = (1 - mu) s(t-1) + mu I(t-1), s(0) = 0.
struct IirSpec {
    double forgetting = 0.01;
};

/// Empirical confidence-quantile of the last `window` true samples
/// (statistics-based benchmark).
struct QuantileSpec {
    double confidence = 0.9;
    std::size_t window = 500;
};

/// Prediction stage (NARNN, open loop) followed by the resource-control
/// stage: I_hat = alpha * max(NARNN output, 0).
struct NarSpec {
    std::shared_ptr<const NarnnModel> model;
    double alpha = 1.45;
};

using PredictorKind = std::variant<GenieSpec, IirSpec, QuantileSpec, NarSpec>;

/// Throws std::invalid_argument when parameters are out of range
/// (alpha must lie in [1, 2]).
void validate(const PredictorKind& kind);

/// Short stable identifier used in CSV outputs, e.g. "nar(alpha=1.45)".
std::string predictor_id(const PredictorKind& kind);
/// Family name: genie, iir, quantile, nar.
std::string predictor_family(const PredictorKind& kind);

/// Number of leading samples for which the predictor cannot yet predict.
std::size_t warm_up(const PredictorKind& kind);

/// Sequential one-step-ahead predictor with its own state.
class Predictor {
public:
    explicit Predictor(PredictorKind kind);

    /// Predicts I(t) given history = I(0..t-1). `lookahead` is I(t) and is
    /// read only by the genie. Throws std::invalid_argument when the history
    /// is shorter than warm_up().
    double predict_next(std::span<const double> history, std::optional<double> lookahead = {});

    const PredictorKind& kind() const { return kind_; }

private:
    PredictorKind kind_;
    double iir_state_ = 0.0;
    std::size_t iir_consumed_ = 0;
    std::vector<double> scratch_;
};

/// Predictions aligned with the series: predicted[i] is the prediction for
/// step warm_up + i.
struct PredictionTrace {
    std::vector<double> predicted;
    std::size_t warm_up = 0;
    std::string predictor;
};

PredictionTrace trace_series(const PredictorKind& kind, std::span<const double> series);

/// `t,actual,predicted,predictor`
void write_trace_csv(std::ostream& out, std::span<const double> series, const PredictionTrace& trace);

}  // namespace narrm
