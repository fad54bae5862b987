#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "narrm/common.hpp"

namespace narrm {

/// Channel and system parameters of the downlink scenario. Powers are linear,
/// ratios in dB. Defaults are the desk-scale scenario (4 interferers).
struct ScenarioConfig {
    int n_transmitters = 5;
    double mean_snr_db = 20.0;
    double inr_min_db = -5.0;
    double inr_max_db = 15.0;
    double fading_correlation = 0.95;
    double noise_power = 1.0;
    double tx_power = 1.0;
    int payload_bits = 256;
    double target_bler = 1e-5;
    std::size_t horizon = 200000;
    std::uint64_t seed = 1;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// Drawn once per scenario: mean channel gains of the desired link and of
/// every interferer.
struct Scenario {
    ScenarioConfig config;
    double desired_gain_mean = 0.0;
    std::vector<double> interferer_gain_mean;

    std::size_t interferer_count() const { return interferer_gain_mean.size(); }
};

/// Aggregate interference power I(t) and the desired received power
/// p_n|h_n(t)|^2 over the horizon.
struct InterferenceSeries {
    std::vector<double> samples;
    std::vector<double> desired_gain;
    Scenario scenario;

    std::size_t size() const { return samples.size(); }
};

/// Draws the N-1 interferer INRs uniformly in dB and sets the desired mean
/// gain from the mean SNR.
Scenario build_scenario(const ScenarioConfig& config, Rng& rng);

/// Convenience: build_scenario with the "scenario" sub-seed of config.seed.
Scenario build_scenario(const ScenarioConfig& config);

/// One Gauss-Markov step: h' = rho*h + sqrt(1-rho^2)*w, w ~ CN(0, variance).
std::complex<double> step_fading(std::complex<double> state, double correlation, double variance,
                                 Rng& rng);

/// Evolves all N channel states for `horizon` slots, starting from the
/// stationary distribution.
InterferenceSeries generate_series(const Scenario& scenario, std::size_t horizon, Rng& rng);

/// generate_series over config.horizon with the "train-series" sub-seed.
InterferenceSeries generate_series(const Scenario& scenario);

double sinr(double desired_power, double interference, double noise);

/// `t,interference_linear` with a header row.
void write_series_csv(std::ostream& out, const InterferenceSeries& series);
/// `t,desired_gain_linear` with a header row.
void write_desired_gain_csv(std::ostream& out, const InterferenceSeries& series);
/// Reads the interference column back from write_series_csv output.
std::vector<double> read_series_csv(std::istream& in);

}  // namespace narrm
