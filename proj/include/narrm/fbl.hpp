#pragma once

namespace narrm {

/// C(gamma) = log2(1 + gamma), bits per channel use.
double shannon_capacity(double sinr);

/// V(gamma) = (1 - 1/(1+gamma)^2) / ln(2)^2.
double channel_dispersion(double sinr);

/// Standard normal tail probability Q(x) = P(Z > x).
double q_function(double x);

/// Inverse of the Q-function on (0, 1). Rational initial guess refined by
/// Halley steps against erfc; absolute error below 1e-9 on [1e-12, 1 - 1e-12].
double q_inv(double probability);

struct AllocationRequest {
    int payload_bits = 256;
    double target_bler = 1e-5;
    double predicted_sinr = 1.0;

    void validate() const;
};

/// Channel uses needed to deliver D bits at BLER epsilon under the normal
/// approximation of the finite-blocklength rate:
///
///   R = D/C + q^2 V / (2 C^2) * [1 + sqrt(1 + 4 D C / (q^2 V))],  q = Q^-1(eps)
///
/// When q = 0 or V = 0 the second term takes its limit 0. Throws
/// infeasible_allocation when C = 0.
double channel_usage(const AllocationRequest& request);

/// Same, with q = Q^-1(eps) already computed (hot loops evaluate many SINRs
/// at one target BLER).
double channel_usage_with_quantile(int payload_bits, double quantile, double predicted_sinr);

/// gamma_hat = p|h|^2 / (I_hat + sigma^2).
double predicted_sinr(double desired_power, double predicted_interference, double noise);

}  // namespace narrm
