#pragma once

#include <cmath>
#include <random>

#include "narrm/narnn.hpp"

namespace testing_helpers {

inline bool rel_close(double a, double b, double rel, double abs_floor = 0.0) {
    return std::abs(a - b) <= std::max(rel * std::max(std::abs(a), std::abs(b)), abs_floor);
}

// random weights of order one, identity normalizer
inline narrm::NarnnModel random_model(std::size_t n_delays, std::size_t n_hidden, narrm::Activation act,
                                      std::uint64_t seed) {
    narrm::Rng rng(seed);
    narrm::NarnnModel m = narrm::init_weights({n_delays, n_hidden, act}, rng);
    std::normal_distribution<double> g(0.0, 0.7);
    Eigen::VectorXd theta = m.parameters();
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        theta[i] = g(rng);
    }
    m.set_parameters(theta);
    return m;
}

}  // namespace testing_helpers
