#include <sstream>

#include "doctest.h"
#include "narrm/channel.hpp"

using namespace narrm;

TEST_CASE("scenario draws") {
    ScenarioConfig c;
    c.n_transmitters = 1;
    CHECK(build_scenario(c).interferer_gain_mean.empty());

    c.n_transmitters = 6;
    c.inr_min_db = c.inr_max_db = 0.0;
    for (double beta : build_scenario(c).interferer_gain_mean) {
        CHECK(beta == 1.0);
    }

    // mean of the dB draw over [-10, 10]
    c.inr_min_db = -10.0;
    c.inr_max_db = 10.0;
    c.n_transmitters = 100'001;
    double sum_db = 0.0;
    const Scenario s = build_scenario(c);
    for (double beta : s.interferer_gain_mean) {
        sum_db += linear_to_db(beta);
    }
    CHECK(std::abs(sum_db / 1e5) < 0.1);
}

TEST_CASE("scenario validation names the field") {
    ScenarioConfig c;
    c.fading_correlation = 1.5;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("fading_correlation"), std::invalid_argument);
    c = {};
    c.inr_min_db = 20.0;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("inr_min_db"), std::invalid_argument);
    c = {};
    c.noise_power = 0.0;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("noise_power"), std::invalid_argument);
}

TEST_CASE("gauss-markov fading step") {
    Rng rng(3);
    const std::complex<double> h{0.3, -1.2};
    CHECK(step_fading(h, 1.0, 2.0, rng) == h);

    // rho = 0: successive powers uncorrelated; ergodic mean equals beta for any rho
    for (double rho : {0.0, 0.5, 0.95}) {
        const double beta = 2.5;
        std::complex<double> x{1.0, 0.0};
        const int n = 100'000;
        std::vector<double> p(n);
        for (int t = 0; t < n; ++t) {
            x = step_fading(x, rho, beta, rng);
            p[t] = std::norm(x);
        }
        double mean = 0.0;
        for (double v : p) {
            mean += v;
        }
        mean /= n;
        const double tol = rho > 0.9 ? 0.05 : 0.02;  // slower mixing at high rho
        CHECK(std::abs(mean - beta) / beta < tol);
        if (rho == 0.0) {
            double sxy = 0.0;
            double sxx = 0.0;
            for (int t = 0; t + 1 < n; ++t) {
                sxy += (p[t] - mean) * (p[t + 1] - mean);
            }
            for (double v : p) {
                sxx += (v - mean) * (v - mean);
            }
            CHECK(std::abs(sxy / sxx) < 0.02);
        }
    }
}

TEST_CASE("interference series") {
    ScenarioConfig c;
    c.n_transmitters = 1;
    c.horizon = 1000;
    const InterferenceSeries none = generate_series(build_scenario(c));
    CHECK(none.size() == 1000);
    for (double v : none.samples) {
        CHECK(v == 0.0);
    }

    c.n_transmitters = 5;
    c.inr_min_db = c.inr_max_db = 0.0;
    c.horizon = 100'000;
    const InterferenceSeries a = generate_series(build_scenario(c));
    const InterferenceSeries b = generate_series(build_scenario(c));
    CHECK(a.samples == b.samples);
    CHECK(a.desired_gain == b.desired_gain);
    double mean = 0.0;
    for (double v : a.samples) {
        CHECK(v >= 0.0);
        mean += v;
    }
    mean /= static_cast<double>(a.size());
    CHECK(std::abs(mean - 4.0) / 4.0 < 0.03);

    c.seed = 2;
    CHECK(generate_series(build_scenario(c)).samples != a.samples);
}

TEST_CASE("sinr") {
    CHECK(sinr(4.0, 1.0, 1.0) == 2.0);
    CHECK(sinr(3.0, 0.0, 2.0) == 1.5);
    CHECK(sinr(0.0, 5.0, 1.0) == 0.0);
    CHECK_THROWS_AS(sinr(1.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("series csv round trip") {
    ScenarioConfig c;
    c.horizon = 500;
    const InterferenceSeries s = generate_series(build_scenario(c));
    std::stringstream buf;
    write_series_csv(buf, s);
    const std::string text = buf.str();
    CHECK(text.rfind("t,interference_linear\n", 0) == 0);
    CHECK(text.find('\r') == std::string::npos);
    CHECK(read_series_csv(buf) == s.samples);
}
