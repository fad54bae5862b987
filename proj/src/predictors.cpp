#include "narrm/predictors.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "narrm/csv.hpp"

namespace narrm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

std::size_t quantile_index(double confidence, std::size_t window) {
    // inverted empirical CDF: smallest order statistic with F >= confidence
    const auto k = static_cast<std::size_t>(std::ceil(confidence * static_cast<double>(window)));
    return std::clamp<std::size_t>(k, 1, window) - 1;
}

}  // namespace

void validate(const PredictorKind& kind) {
    std::visit(overloaded{
                   [](const GenieSpec&) {},
                   [](const IirSpec& s) {
                       require(s.forgetting > 0.0 && s.forgetting <= 1.0,
                               "iir predictor: forgetting factor must lie in (0, 1]");
                   },
                   [](const QuantileSpec& s) {
                       require(s.confidence > 0.0 && s.confidence < 1.0,
                               "quantile predictor: confidence must lie in (0, 1)");
                       require(s.window >= 2, "quantile predictor: window must be >= 2");
                   },
                   [](const NarSpec& s) {
                       require(s.model != nullptr, "nar predictor: no model");
                       require(s.alpha >= 1.0 && s.alpha <= 2.0, "nar predictor: alpha must lie in [1, 2]");
                       s.model->validate();
                   },
               },
               kind);
}

std::string predictor_family(const PredictorKind& kind) {
    return std::visit(overloaded{
                          [](const GenieSpec&) { return std::string("genie"); },
                          [](const IirSpec&) { return std::string("iir"); },
                          [](const QuantileSpec&) { return std::string("quantile"); },
                          [](const NarSpec&) { return std::string("nar"); },
                      },
                      kind);
}

std::string predictor_id(const PredictorKind& kind) {
    return std::visit(
        overloaded{
            [](const GenieSpec&) { return std::string("genie"); },
            [](const IirSpec& s) { return "iir(mu=" + csv::format(s.forgetting) + ")"; },
            [](const QuantileSpec& s) {
                return "quantile(eta=" + csv::format(s.confidence) + " W=" + std::to_string(s.window) + ")";
            },
            [](const NarSpec& s) { return "nar(alpha=" + csv::format(s.alpha) + ")"; },
        },
        kind);
}

std::size_t warm_up(const PredictorKind& kind) {
    return std::visit(overloaded{
                          [](const GenieSpec&) -> std::size_t { return 1; },
                          [](const IirSpec&) -> std::size_t { return 1; },
                          [](const QuantileSpec& s) { return s.window; },
                          [](const NarSpec& s) { return s.model->topology.n_delays; },
                      },
                      kind);
}

Predictor::Predictor(PredictorKind kind) : kind_(std::move(kind)) { validate(kind_); }

double Predictor::predict_next(std::span<const double> history, std::optional<double> lookahead) {
    require(history.size() >= warm_up(kind_), "predict_next: insufficient history for " + predictor_id(kind_));
    return std::visit(
        overloaded{
            [&](const GenieSpec&) {
                require(lookahead.has_value(), "genie predictor needs the look-ahead sample");
                return *lookahead;
            },
            [&](const IirSpec& s) {
                for (; iir_consumed_ < history.size(); ++iir_consumed_) {
                    iir_state_ = (1.0 - s.forgetting) * iir_state_ + s.forgetting * history[iir_consumed_];
                }
                return iir_state_;
            },
            [&](const QuantileSpec& s) {
                const auto recent = history.last(s.window);
                scratch_.assign(recent.begin(), recent.end());
                const std::size_t k = quantile_index(s.confidence, s.window);
                std::nth_element(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(k),
                                 scratch_.end());
                return scratch_[k];
            },
            [&](const NarSpec& s) {
                const NarnnModel& m = *s.model;
                const std::size_t n = m.topology.n_delays;
                scratch_.resize(n);
                for (std::size_t d = 0; d < n; ++d) {
                    scratch_[d] = history[history.size() - 1 - d];
                }
                m.normalizer.normalize_window(scratch_);
                const double raw = m.normalizer.denormalize_target(forward(m, scratch_));
                return s.alpha * std::max(raw, 0.0);
            },
        },
        kind_);
}

PredictionTrace trace_series(const PredictorKind& kind, std::span<const double> series) {
    validate(kind);
    const std::size_t w = warm_up(kind);
    require(series.size() > w, "trace_series: series is not longer than the warm-up of " + predictor_id(kind));
    PredictionTrace trace;
    trace.warm_up = w;
    trace.predictor = predictor_id(kind);
    trace.predicted.reserve(series.size() - w);

    if (const auto* nar = std::get_if<NarSpec>(&kind)) {
        for (double raw : predict_series(*nar->model, series)) {
            trace.predicted.push_back(nar->alpha * std::max(raw, 0.0));
        }
        return trace;
    }
    Predictor p(kind);
    for (std::size_t t = w; t < series.size(); ++t) {
        trace.predicted.push_back(p.predict_next(series.first(t), series[t]));
    }
    return trace;
}

void write_trace_csv(std::ostream& out, std::span<const double> series, const PredictionTrace& trace) {
    csv::write_header(out, {"t", "actual", "predicted", "predictor"});
    for (std::size_t i = 0; i < trace.predicted.size(); ++i) {
        const std::size_t t = trace.warm_up + i;
        (csv::Row() << t << series[t] << trace.predicted[i] << std::string_view(trace.predictor)).write(out);
    }
}

}  // namespace narrm
