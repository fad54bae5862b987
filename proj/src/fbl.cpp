#include "narrm/fbl.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "narrm/common.hpp"

namespace narrm {

double shannon_capacity(double sinr) {
    if (!(sinr >= 0.0)) {
        throw std::domain_error("shannon_capacity: SINR must be >= 0");
    }
    return std::log2(1.0 + sinr);
}

double channel_dispersion(double sinr) {
    if (!(sinr >= 0.0)) {
        throw std::domain_error("channel_dispersion: SINR must be >= 0");
    }
    const double ln2 = std::numbers::ln2;
    const double r = 1.0 / (1.0 + sinr);
    return (1.0 - r * r) / (ln2 * ln2);
}

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

namespace {

// Acklam's rational approximation of the standard normal quantile for
// p in (0, 0.5]; relative error about 1.15e-9 before refinement.
double normal_quantile_lower(double p) {
    constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                            1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                            6.680131188771972e+01,  -1.328068155288572e+01};
    constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                            -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                            3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double q_inv(double probability) {
    if (!(probability > 0.0 && probability < 1.0)) {
        throw std::domain_error("q_inv: probability must lie in (0, 1)");
    }
    if (probability > 0.5) {
        // 1 - p is exact for p in [0.5, 1)
        return -q_inv(1.0 - probability);
    }
    // z = Phi^-1(p) <= 0, so Q^-1(p) = -z. Phi(z) = erfc(-z/sqrt2)/2 keeps full
    // relative precision in the lower tail.
    double z = normal_quantile_lower(probability);
    const double sqrt_2pi = std::sqrt(2.0 * std::numbers::pi);
    for (int i = 0; i < 2; ++i) {
        const double e = 0.5 * std::erfc(-z / std::numbers::sqrt2) - probability;
        const double u = e * sqrt_2pi * std::exp(0.5 * z * z);
        z -= u / (1.0 + 0.5 * z * u);
    }
    return -z;
}

void AllocationRequest::validate() const {
    require(payload_bits >= 1, "allocation: payload_bits must be >= 1");
    require(target_bler > 0.0 && target_bler < 1.0, "allocation: target_bler must lie in (0, 1)");
    require(predicted_sinr >= 0.0, "allocation: predicted SINR must be >= 0");
}

double channel_usage_with_quantile(int payload_bits, double quantile, double predicted_sinr) {
    const double c = shannon_capacity(predicted_sinr);
    if (!(c > 0.0)) {
        throw infeasible_allocation("channel_usage: predicted SINR of zero gives zero capacity");
    }
    const double d = static_cast<double>(payload_bits);
    const double qv = quantile * quantile * channel_dispersion(predicted_sinr);
    if (qv == 0.0) {
        return d / c;
    }
    return d / c + qv / (2.0 * c * c) * (1.0 + std::sqrt(1.0 + 4.0 * d * c / qv));
}

double channel_usage(const AllocationRequest& request) {
    request.validate();
    return channel_usage_with_quantile(request.payload_bits, q_inv(request.target_bler),
                                       request.predicted_sinr);
}

double predicted_sinr(double desired_power, double predicted_interference, double noise) {
    require(noise > 0.0, "predicted_sinr: noise power must be > 0");
    require(predicted_interference >= 0.0, "predicted_sinr: predicted interference must be >= 0");
    return desired_power / (predicted_interference + noise);
}

}  // namespace narrm
