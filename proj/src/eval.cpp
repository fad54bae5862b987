#include "narrm/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "narrm/csv.hpp"
#include "narrm/fbl.hpp"

namespace narrm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct StepContext {
    int payload_bits;
    double quantile;
    double noise;
    RuRounding rounding;
};

EvalRecord evaluate_step(const StepContext& ctx, std::size_t t, double actual, double predicted,
                         double desired) {
    EvalRecord r;
    r.t = t;
    r.actual = actual;
    r.predicted = predicted;
    r.predicted_sinr = predicted_sinr(desired, predicted, ctx.noise);
    if (shannon_capacity(r.predicted_sinr) > 0.0) {
        r.channel_uses = channel_usage_with_quantile(ctx.payload_bits, ctx.quantile, r.predicted_sinr);
        if (ctx.rounding == RuRounding::ceil) {
            r.channel_uses = std::ceil(r.channel_uses);
        }
    } else {
        r.infeasible = true;
        r.channel_uses = kNaN;
    }
    r.outage = r.infeasible || predicted < actual;
    return r;
}

void accumulate(EpisodeStats& s, const EvalRecord& r) {
    ++s.steps;
    if (r.outage) {
        ++s.outages;
    }
    if (r.infeasible) {
        ++s.infeasible;
    } else {
        s.ru_sum += r.channel_uses;
    }
}

double alpha_of(const PredictorKind& kind) {
    if (const auto* nar = std::get_if<NarSpec>(&kind)) {
        return nar->alpha;
    }
    return kNaN;
}

}  // namespace

std::vector<EvalRecord> run_episode(const InterferenceSeries& series, const PredictorKind& kind,
                                    const RequestTemplate& request, std::size_t first_step,
                                    RuRounding rounding) {
    const std::size_t w = warm_up(kind);
    if (first_step == 0) {
        first_step = w;
    }
    require(first_step >= w, "run_episode: first_step precedes the predictor warm-up");
    require(series.size() > first_step, "run_episode: series is not longer than the warm-up");
    AllocationRequest check{request.payload_bits, request.target_bler, 1.0};
    check.validate();

    const PredictionTrace trace = trace_series(kind, series.samples);
    const StepContext ctx{request.payload_bits, q_inv(request.target_bler),
                          series.scenario.config.noise_power, rounding};
    std::vector<EvalRecord> records;
    records.reserve(series.size() - first_step);
    for (std::size_t t = first_step; t < series.size(); ++t) {
        records.push_back(evaluate_step(ctx, t, series.samples[t], trace.predicted[t - w],
                                        series.desired_gain[t]));
    }
    return records;
}

void write_records_csv(std::ostream& out, const std::vector<EvalRecord>& records,
                       const std::string& predictor) {
    csv::write_header(out, {"predictor", "t", "actual", "predicted", "predicted_sinr", "channel_uses",
                            "outage", "infeasible"});
    for (const auto& r : records) {
        (csv::Row() << std::string_view(predictor) << r.t << r.actual << r.predicted << r.predicted_sinr
                    << r.channel_uses << r.outage << r.infeasible)
            .write(out);
    }
}

double EpisodeStats::mean_outage() const {
    return steps == 0 ? kNaN : static_cast<double>(outages) / static_cast<double>(steps);
}

double EpisodeStats::mean_ru() const {
    const std::size_t feasible = steps - infeasible;
    return feasible == 0 ? kNaN : ru_sum / static_cast<double>(feasible);
}

EpisodeStats& EpisodeStats::operator+=(const EpisodeStats& other) {
    steps += other.steps;
    outages += other.outages;
    infeasible += other.infeasible;
    ru_sum += other.ru_sum;
    return *this;
}

EpisodeStats summarize(const std::vector<EvalRecord>& records) {
    EpisodeStats s;
    for (const auto& r : records) {
        accumulate(s, r);
    }
    return s;
}

void SweepConfig::validate() const {
    require(!eps_targets.empty(), "sweep.eps_targets must not be empty");
    for (double e : eps_targets) {
        require(e > 0.0 && e < 1.0, "sweep.eps_targets entries must lie in (0, 1)");
    }
    require(total_steps >= 1, "sweep.total_steps must be >= 1");
    require(chunk_steps >= 2, "sweep.chunk_steps must be >= 2");
}

std::size_t SweepConfig::chunk_count() const { return (total_steps + chunk_steps - 1) / chunk_steps; }

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1U, threads), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

EvaluationBed::EvaluationBed(const Scenario& scenario, const SweepConfig& config, std::size_t first_step)
    : config_(config), first_step_(first_step) {
    config_.validate();
    require(config_.chunk_steps > first_step_,
            "sweep.chunk_steps must exceed the largest predictor warm-up (" + std::to_string(first_step_) + ")");
    chunks_.resize(config_.chunk_count());
    parallel_for(chunks_.size(), config_.threads, [&](std::size_t i) {
        Scenario s = scenario;
        if (config_.redraw_scenario) {
            Rng srng = make_rng(config_.seed, "chunk-scenario", i);
            s = build_scenario(scenario.config, srng);
        }
        Rng rng = make_rng(config_.seed, "chunk", i);
        chunks_[i] = generate_series(s, config_.chunk_steps, rng);
    });
}

std::vector<std::vector<double>> EvaluationBed::predictions(const PredictorKind& kind) const {
    const std::size_t w = warm_up(kind);
    require(w <= first_step_, "evaluation bed: predictor warm-up exceeds the shared first step");
    std::vector<std::vector<double>> out(chunks_.size());
    parallel_for(chunks_.size(), config_.threads, [&](std::size_t i) {
        PredictionTrace tr = trace_series(kind, chunks_[i].samples);
        tr.predicted.erase(tr.predicted.begin(),
                           tr.predicted.begin() + static_cast<std::ptrdiff_t>(first_step_ - w));
        out[i] = std::move(tr.predicted);
    });
    return out;
}

EpisodeStats EvaluationBed::evaluate_predictions(const std::vector<std::vector<double>>& predictions,
                                                 double eps_target) const {
    require(predictions.size() == chunks_.size(), "evaluation bed: prediction set has wrong chunk count");
    const double q = q_inv(eps_target);
    std::vector<EpisodeStats> per_chunk(chunks_.size());
    parallel_for(chunks_.size(), config_.threads, [&](std::size_t i) {
        const InterferenceSeries& s = chunks_[i];
        const StepContext ctx{s.scenario.config.payload_bits, q, s.scenario.config.noise_power,
                              config_.rounding};
        const auto& pred = predictions[i];
        require(pred.size() == s.size() - first_step_, "evaluation bed: prediction length mismatch");
        EpisodeStats st;
        for (std::size_t k = 0; k < pred.size(); ++k) {
            const std::size_t t = first_step_ + k;
            accumulate(st, evaluate_step(ctx, t, s.samples[t], pred[k], s.desired_gain[t]));
        }
        per_chunk[i] = st;
    });
    EpisodeStats total;
    for (const auto& st : per_chunk) {
        total += st;
    }
    return total;
}

EpisodeStats EvaluationBed::evaluate(const PredictorKind& kind, double eps_target) const {
    return evaluate_predictions(predictions(kind), eps_target);
}

const ReportRow& EvalReport::at(const std::string& predictor, double eps_target) const {
    for (const auto& r : rows) {
        if (r.predictor == predictor && r.eps_target == eps_target) {
            return r;
        }
    }
    throw std::out_of_range("report: no row for " + predictor + " at eps " + csv::format(eps_target));
}

std::vector<std::string> EvalReport::predictors() const {
    std::vector<std::string> out;
    for (const auto& r : rows) {
        if (std::find(out.begin(), out.end(), r.predictor) == out.end()) {
            out.push_back(r.predictor);
        }
    }
    return out;
}

std::string sweep_label(const PredictorKind& kind) {
    if (const auto* q = std::get_if<QuantileSpec>(&kind)) {
        return "quantile(W=" + std::to_string(q->window) + ")";
    }
    return predictor_id(kind);
}

EvalReport sweep_targets(const EvaluationBed& bed, const std::vector<PredictorKind>& predictors) {
    const auto& eps_list = bed.config().eps_targets;
    const auto genie_pred = bed.predictions(GenieSpec{});
    std::vector<EpisodeStats> genie;
    for (double eps : eps_list) {
        genie.push_back(bed.evaluate_predictions(genie_pred, eps));
    }

    EvalReport report;
    report.seed = bed.config().seed;
    for (const auto& kind : predictors) {
        validate(kind);
        const std::string label = sweep_label(kind);
        const bool tied = std::holds_alternative<QuantileSpec>(kind);
        std::vector<std::vector<double>> shared;
        if (!tied) {
            shared = bed.predictions(kind);
        }
        for (std::size_t e = 0; e < eps_list.size(); ++e) {
            const double eps = eps_list[e];
            EpisodeStats st;
            if (tied) {
                QuantileSpec q = std::get<QuantileSpec>(kind);
                q.confidence = 1.0 - eps;
                st = bed.evaluate(q, eps);
            } else {
                st = bed.evaluate_predictions(shared, eps);
            }
            ReportRow row;
            row.predictor = label;
            row.eps_target = eps;
            row.alpha = alpha_of(kind);
            row.mean_outage = st.mean_outage();
            row.mean_ru = st.mean_ru();
            row.mean_ru_normalized = row.mean_ru / genie[e].mean_ru();
            row.steps = st.steps;
            row.flagged = static_cast<double>(st.steps) < 100.0 / eps;
            report.rows.push_back(row);
        }
    }
    return report;
}

EvalReport sweep_targets(const Scenario& scenario, const std::vector<PredictorKind>& predictors,
                         const SweepConfig& config) {
    std::size_t first_step = 1;
    for (const auto& kind : predictors) {
        validate(kind);
        first_step = std::max(first_step, warm_up(kind));
    }
    const EvaluationBed bed(scenario, config, first_step);
    return sweep_targets(bed, predictors);
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
    csv::write_header(out, {"predictor", "eps_target", "alpha", "mean_outage", "mean_ru",
                            "mean_ru_normalized", "steps", "flagged"});
    for (const auto& r : report.rows) {
        csv::Row row;
        row << std::string_view(r.predictor) << r.eps_target;
        if (std::isnan(r.alpha)) {
            row << std::string_view("");
        } else {
            row << r.alpha;
        }
        row << r.mean_outage << r.mean_ru << r.mean_ru_normalized << r.steps << r.flagged;
        row.write(out);
    }
}

void write_plot_data(std::ostream& out, const EvalReport& report, PlotMetric metric) {
    const auto names = report.predictors();
    std::vector<double> eps_list;
    for (const auto& r : report.rows) {
        if (std::find(eps_list.begin(), eps_list.end(), r.eps_target) == eps_list.end()) {
            eps_list.push_back(r.eps_target);
        }
    }
    std::vector<std::string> header{"eps_target"};
    header.insert(header.end(), names.begin(), names.end());
    csv::write_header(out, header);
    for (double eps : eps_list) {
        csv::Row row;
        row << eps;
        for (const auto& name : names) {
            const ReportRow& r = report.at(name, eps);
            row << (metric == PlotMetric::resource_usage ? r.mean_ru : r.mean_outage);
        }
        row.write(out);
    }
}

BisectionResult bisect_monotone(const std::function<double(double)>& f, double target, double lo,
                                double hi, bool increasing, double rel_tol, std::size_t max_iter) {
    require(lo < hi, "bisect_monotone: empty bracket");
    const double tol = rel_tol * std::abs(target);
    auto feasible = [&](double value) { return value <= target; };
    auto close = [&](double value) { return std::abs(value - target) <= tol; };

    const double f_lo = f(lo);
    const double f_hi = f(hi);
    if (increasing) {
        if (!feasible(f_lo)) {
            return {lo, f_lo, false, true};
        }
        if (feasible(f_hi)) {
            return {hi, f_hi, close(f_hi), true};
        }
        if (close(f_lo)) {
            return {lo, f_lo, true, false};
        }
    } else {
        if (!feasible(f_hi)) {
            return {hi, f_hi, false, true};
        }
        if (feasible(f_lo)) {
            return {lo, f_lo, close(f_lo), true};
        }
        if (close(f_hi)) {
            return {hi, f_hi, true, false};
        }
    }

    // invariant: the feasible end is `good`, the other `bad`
    double good = increasing ? lo : hi;
    double bad = increasing ? hi : lo;
    double f_good = increasing ? f_lo : f_hi;
    for (std::size_t it = 0; it < max_iter; ++it) {
        if (std::abs(bad - good) <= 1e-12 * std::max(1.0, std::abs(good))) {
            break;
        }
        const double mid = 0.5 * (good + bad);
        const double f_mid = f(mid);
        if (feasible(f_mid)) {
            good = mid;
            f_good = f_mid;
            if (close(f_mid)) {
                return {good, f_good, true, false};
            }
        } else {
            bad = mid;
        }
    }
    return {good, f_good, close(f_good), false};
}

std::string to_string(CalibrationMode mode) {
    return mode == CalibrationMode::match_resource_usage ? "match-resource-usage" : "match-outage";
}

CalibrationMode parse_calibration_mode(const std::string& name) {
    if (name == "match-resource-usage" || name == "match_resource_usage" || name == "match-ru") {
        return CalibrationMode::match_resource_usage;
    }
    if (name == "match-outage" || name == "match_outage") {
        return CalibrationMode::match_outage;
    }
    throw std::invalid_argument("unknown calibration mode '" + name + "'");
}

namespace {

std::vector<std::vector<double>> scaled(const std::vector<std::vector<double>>& raw, double alpha) {
    std::vector<std::vector<double>> out = raw;
    for (auto& chunk : out) {
        for (double& v : chunk) {
            v *= alpha;
        }
    }
    return out;
}

}  // namespace

std::vector<CalibrationPoint> calibrate_alpha(const EvaluationBed& bed,
                                              std::shared_ptr<const NarnnModel> model,
                                              CalibrationMode mode, const QuantileSpec& baseline) {
    // alpha = 1 trace is the clamped raw network output
    const auto raw = bed.predictions(NarSpec{model, 1.0});
    std::vector<CalibrationPoint> points;
    for (double eps : bed.config().eps_targets) {
        const EpisodeStats base = bed.evaluate(QuantileSpec{1.0 - eps, baseline.window}, eps);
        const bool match_ru = mode == CalibrationMode::match_resource_usage;
        auto metric = [&](double alpha) {
            const EpisodeStats st = bed.evaluate_predictions(scaled(raw, alpha), eps);
            return match_ru ? st.mean_ru() : st.mean_outage();
        };
        const double target = match_ru ? base.mean_ru() : base.mean_outage();
        const BisectionResult b = bisect_monotone(metric, target, 1.0, 2.0, match_ru);
        const EpisodeStats at = bed.evaluate_predictions(scaled(raw, b.x), eps);

        CalibrationPoint p;
        p.eps_target = eps;
        p.alpha = b.x;
        p.nar_ru = at.mean_ru();
        p.nar_outage = at.mean_outage();
        p.baseline_ru = base.mean_ru();
        p.baseline_outage = base.mean_outage();
        p.steps = at.steps;
        p.converged = b.converged;
        p.at_boundary = b.at_boundary;
        if (b.at_boundary) {
            p.diagnostic = "target " + std::string(match_ru ? "resource usage " : "outage ") +
                           csv::format(target) + " not reachable for alpha in [1, 2]; reporting alpha=" +
                           csv::format(b.x);
        } else if (!b.converged) {
            p.diagnostic = "no alpha matches within 0.5%; closest value on the feasible side reported";
        }
        points.push_back(std::move(p));
    }
    return points;
}

void write_calibration_csv(std::ostream& out, const std::vector<CalibrationPoint>& points) {
    csv::write_header(out, {"eps_target", "alpha", "nar_ru", "nar_outage", "baseline_ru", "baseline_outage",
                            "steps", "converged", "at_boundary"});
    for (const auto& p : points) {
        (csv::Row() << p.eps_target << p.alpha << p.nar_ru << p.nar_outage << p.baseline_ru
                    << p.baseline_outage << p.steps << p.converged << p.at_boundary)
            .write(out);
    }
}

std::vector<AlphaPoint> alpha_grid(const EvaluationBed& bed, std::shared_ptr<const NarnnModel> model,
                                   const std::vector<double>& alphas, double eps_target) {
    const auto raw = bed.predictions(NarSpec{model, 1.0});
    std::vector<AlphaPoint> out;
    for (double a : alphas) {
        require(a >= 1.0 && a <= 2.0, "alpha_grid: alpha must lie in [1, 2]");
        out.push_back({a, bed.evaluate_predictions(scaled(raw, a), eps_target)});
    }
    return out;
}

}  // namespace narrm
