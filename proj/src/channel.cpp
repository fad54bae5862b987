#include "narrm/channel.hpp"

#include <cmath>
#include <ostream>

#include "narrm/csv.hpp"

namespace narrm {

void ScenarioConfig::validate() const {
    require(n_transmitters >= 1, "scenario.n_transmitters must be >= 1");
    require(inr_min_db <= inr_max_db, "scenario.inr_min_db must be <= scenario.inr_max_db");
    require(fading_correlation >= 0.0 && fading_correlation <= 1.0,
            "scenario.fading_correlation must lie in [0, 1]");
    require(noise_power > 0.0, "scenario.noise_power must be > 0");
    require(tx_power > 0.0, "scenario.tx_power must be > 0");
    require(payload_bits >= 1, "scenario.payload_bits must be >= 1");
    require(target_bler > 0.0 && target_bler < 1.0, "scenario.target_bler must lie in (0, 1)");
    require(horizon >= 1, "scenario.horizon must be >= 1");
}

Scenario build_scenario(const ScenarioConfig& config, Rng& rng) {
    config.validate();
    Scenario s;
    s.config = config;
    s.desired_gain_mean = db_to_linear(config.mean_snr_db) * config.noise_power / config.tx_power;

    std::uniform_real_distribution<double> inr_db(config.inr_min_db, config.inr_max_db);
    const auto n_interferers = static_cast<std::size_t>(config.n_transmitters - 1);
    s.interferer_gain_mean.reserve(n_interferers);
    for (std::size_t k = 0; k < n_interferers; ++k) {
        const double db = inr_db(rng);
        s.interferer_gain_mean.push_back(db_to_linear(db) * config.noise_power / config.tx_power);
    }
    return s;
}

Scenario build_scenario(const ScenarioConfig& config) {
    Rng rng = make_rng(config.seed, "scenario");
    return build_scenario(config, rng);
}

namespace {

std::complex<double> draw_cn(double variance, Rng& rng) {
    std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
    const double re = normal(rng);
    const double im = normal(rng);
    return {re, im};
}

}  // namespace

std::complex<double> step_fading(std::complex<double> state, double correlation, double variance,
                                 Rng& rng) {
    const std::complex<double> w = draw_cn(variance, rng);
    return correlation * state + std::sqrt(1.0 - correlation * correlation) * w;
}

InterferenceSeries generate_series(const Scenario& scenario, std::size_t horizon, Rng& rng) {
    const auto& cfg = scenario.config;
    const double rho = cfg.fading_correlation;
    const std::size_t k_count = scenario.interferer_count();

    std::complex<double> desired = draw_cn(scenario.desired_gain_mean, rng);
    std::vector<std::complex<double>> interferers(k_count);
    for (std::size_t k = 0; k < k_count; ++k) {
        interferers[k] = draw_cn(scenario.interferer_gain_mean[k], rng);
    }

    InterferenceSeries out;
    out.scenario = scenario;
    out.samples.resize(horizon);
    out.desired_gain.resize(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
        if (t > 0) {
            desired = step_fading(desired, rho, scenario.desired_gain_mean, rng);
            for (std::size_t k = 0; k < k_count; ++k) {
                interferers[k] = step_fading(interferers[k], rho, scenario.interferer_gain_mean[k], rng);
            }
        }
        double total = 0.0;
        for (const auto& h : interferers) {
            total += cfg.tx_power * std::norm(h);
        }
        out.samples[t] = total;
        out.desired_gain[t] = cfg.tx_power * std::norm(desired);
    }
    return out;
}

InterferenceSeries generate_series(const Scenario& scenario) {
    Rng rng = make_rng(scenario.config.seed, "train-series");
    return generate_series(scenario, scenario.config.horizon, rng);
}

double sinr(double desired_power, double interference, double noise) {
    require(noise > 0.0, "sinr: noise power must be > 0");
    require(interference >= 0.0, "sinr: interference must be >= 0");
    require(desired_power >= 0.0, "sinr: desired power must be >= 0");
    return desired_power / (interference + noise);
}

void write_series_csv(std::ostream& out, const InterferenceSeries& series) {
    csv::write_header(out, {"t", "interference_linear"});
    for (std::size_t t = 0; t < series.samples.size(); ++t) {
        (csv::Row() << t << series.samples[t]).write(out);
    }
}

void write_desired_gain_csv(std::ostream& out, const InterferenceSeries& series) {
    csv::write_header(out, {"t", "desired_gain_linear"});
    for (std::size_t t = 0; t < series.desired_gain.size(); ++t) {
        (csv::Row() << t << series.desired_gain[t]).write(out);
    }
}

std::vector<double> read_series_csv(std::istream& in) {
    return csv::read_numeric(in).column_values("interference_linear");
}

}  // namespace narrm
