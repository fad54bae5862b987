#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace narrm {

/// Random engine used everywhere; all streams are seeded through derive_seed().
using Rng = std::mt19937_64;

/// Raised when a computed allocation has no finite solution (zero predicted SINR).
class infeasible_allocation : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised when training diverges or the trainer is misconfigured at run time.
class training_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Named sub-seed: a stable hash of (root, label, index).
///
/// Every random stream in the pipeline (scenario draw, training series,
/// weight init, evaluation chunk i) is derived from the one top-level seed
/// through a label, so streams never overlap and adding a new consumer does
/// not perturb the existing ones.
std::uint64_t derive_seed(std::uint64_t root, std::string_view label, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t root, std::string_view label, std::uint64_t index = 0) {
    return Rng(derive_seed(root, label, index));
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

// precondition helper
inline void require(bool ok, const std::string& what) {
    if (!ok) {
        throw std::invalid_argument(what);
    }
}

}  // namespace narrm
