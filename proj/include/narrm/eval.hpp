#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "narrm/channel.hpp"
#include "narrm/predictors.hpp"

namespace narrm {

struct RequestTemplate {
    int payload_bits = 256;
    double target_bler = 1e-5;
};

enum class RuRounding { real, ceil };

/// One transmission slot. A step is in outage when the predicted
/// interference under-estimated the actual one (or no allocation existed).
struct EvalRecord {
    std::size_t t = 0;
    double actual = 0.0;
    double predicted = 0.0;
    double predicted_sinr = 0.0;
    double channel_uses = 0.0;  // NaN when infeasible
    bool outage = false;
    bool infeasible = false;
};

/// Evaluates `kind` on a series from `first_step` (default: the predictor's
/// warm-up) to the end; returns size() - first_step records.
std::vector<EvalRecord> run_episode(const InterferenceSeries& series, const PredictorKind& kind,
                                    const RequestTemplate& request, std::size_t first_step = 0,
                                    RuRounding rounding = RuRounding::real);

void write_records_csv(std::ostream& out, const std::vector<EvalRecord>& records,
                       const std::string& predictor);

/// Sufficient statistics of a set of evaluated steps. Infeasible steps count
/// as outages and are excluded from the resource-usage mean.
struct EpisodeStats {
    std::size_t steps = 0;
    std::size_t outages = 0;
    std::size_t infeasible = 0;
    double ru_sum = 0.0;

    double mean_outage() const;
    double mean_ru() const;
    EpisodeStats& operator+=(const EpisodeStats& other);
};

EpisodeStats summarize(const std::vector<EvalRecord>& records);

struct SweepConfig {
    std::vector<double> eps_targets{1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
    std::size_t total_steps = 10'000'000;
    std::size_t chunk_steps = 100'000;
    unsigned threads = 1;
    std::uint64_t seed = 1;
    RuRounding rounding = RuRounding::real;
    /// Redraw the interferer mean gains for every chunk instead of keeping
    /// the scenario fixed.
    bool redraw_scenario = false;

    void validate() const;
    std::size_t chunk_count() const;
};

/// Common-random-number test bed: a fixed set of independent fading
/// realizations ("chunks", sub-seed chunk-i) on which every predictor is
/// evaluated from the same first step. Results are reduced in chunk order,
/// so they do not depend on the number of worker threads.
class EvaluationBed {
public:
    EvaluationBed(const Scenario& scenario, const SweepConfig& config, std::size_t first_step);

    std::size_t first_step() const { return first_step_; }
    std::size_t chunk_count() const { return chunks_.size(); }
    const InterferenceSeries& chunk(std::size_t i) const { return chunks_[i]; }
    const SweepConfig& config() const { return config_; }

    /// Per-chunk predictions for steps first_step .. chunk end.
    std::vector<std::vector<double>> predictions(const PredictorKind& kind) const;

    /// Statistics of given per-chunk predictions at one target BLER.
    EpisodeStats evaluate_predictions(const std::vector<std::vector<double>>& predictions,
                                      double eps_target) const;

    /// Statistics of `kind` at one target BLER.
    EpisodeStats evaluate(const PredictorKind& kind, double eps_target) const;

private:
    SweepConfig config_;
    std::size_t first_step_;
    std::vector<InterferenceSeries> chunks_;
};

/// Runs fn(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

struct ReportRow {
    std::string predictor;
    double eps_target = 0.0;
    double alpha = 0.0;  // NaN for predictors without alpha
    double mean_outage = 0.0;
    double mean_ru = 0.0;
    double mean_ru_normalized = 0.0;
    std::size_t steps = 0;
    bool flagged = false;  // fewer than 100/eps steps: outage not resolvable
};

struct EvalReport {
    std::vector<ReportRow> rows;
    std::uint64_t seed = 0;

    /// Row for (predictor label, eps); throws std::out_of_range when absent.
    const ReportRow& at(const std::string& predictor, double eps_target) const;
    std::vector<std::string> predictors() const;
};

/// Label used in report rows: like predictor_id, but without the quantile
/// confidence (tied to each target as 1 - eps).
std::string sweep_label(const PredictorKind& kind);

/// Every predictor at every target over shared realizations. The quantile
/// predictor's confidence is set to 1 - eps_target at each point.
EvalReport sweep_targets(const Scenario& scenario, const std::vector<PredictorKind>& predictors,
                         const SweepConfig& config);
EvalReport sweep_targets(const EvaluationBed& bed, const std::vector<PredictorKind>& predictors);

/// `predictor,eps_target,alpha,mean_outage,mean_ru,mean_ru_normalized,steps,flagged`
void write_report_csv(std::ostream& out, const EvalReport& report);

enum class PlotMetric { resource_usage, outage };
/// x = eps_target, one column per predictor.
void write_plot_data(std::ostream& out, const EvalReport& report, PlotMetric metric);

struct BisectionResult {
    double x = 0.0;
    double value = 0.0;
    bool converged = false;
    bool at_boundary = false;
};

/// Finds where a monotone f crosses `target` on [lo, hi], returning the
/// side where f(x) <= target: the largest such x for non-decreasing f, the
/// smallest for non-increasing f. Stops once |f(x) - target| <= rel_tol*|target|
/// or the bracket collapses. Reports the boundary when the crossing lies outside.
BisectionResult bisect_monotone(const std::function<double(double)>& f, double target, double lo,
                                double hi, bool increasing, double rel_tol = 5e-3,
                                std::size_t max_iter = 200);

enum class CalibrationMode { match_resource_usage, match_outage };
std::string to_string(CalibrationMode mode);
CalibrationMode parse_calibration_mode(const std::string& name);

struct CalibrationPoint {
    double eps_target = 0.0;
    double alpha = 0.0;
    double nar_ru = 0.0;
    double nar_outage = 0.0;
    double baseline_ru = 0.0;
    double baseline_outage = 0.0;
    std::size_t steps = 0;
    bool converged = false;
    bool at_boundary = false;
    std::string diagnostic;
};

/// Per target BLER, the alpha in [1, 2] at which the NAR predictor matches
/// the quantile baseline's mean resource usage (from below) or mean outage
/// (from below).
std::vector<CalibrationPoint> calibrate_alpha(const EvaluationBed& bed,
                                              std::shared_ptr<const NarnnModel> model,
                                              CalibrationMode mode, const QuantileSpec& baseline);

/// `eps_target,alpha,nar_ru,nar_outage,baseline_ru,baseline_outage,steps,converged,at_boundary`
void write_calibration_csv(std::ostream& out, const std::vector<CalibrationPoint>& points);

/// NAR mean RU / outage over an alpha grid on one bed, reusing the raw network trace.
struct AlphaPoint {
    double alpha = 0.0;
    EpisodeStats stats;
};
std::vector<AlphaPoint> alpha_grid(const EvaluationBed& bed, std::shared_ptr<const NarnnModel> model,
                                   const std::vector<double>& alphas, double eps_target);

}  // namespace narrm
