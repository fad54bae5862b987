#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "narrm/common.hpp"
#include "narrm/dataset.hpp"

namespace narrm {

enum class Activation { logsig, tansig, linear };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

double activation(Activation kind, double x);
double activation_derivative(Activation kind, double x);

/// Tapped delay line of n_delays inputs, one hidden layer, one linear output.
struct Topology {
    std::size_t n_delays = 20;
    std::size_t n_hidden = 16;
    Activation hidden_activation = Activation::logsig;

    void validate() const;
    std::size_t parameter_count() const { return n_hidden * n_delays + 2 * n_hidden + 1; }
};

/// Network weights plus the normalizer fitted on its training data.
///
/// Flat parameter order (used by the trainer and serialization): w1 row-major,
/// then b1, then w2, then b2.
struct NarnnModel {
    Topology topology;
    Eigen::MatrixXd w1;  // n_hidden x n_delays
    Eigen::VectorXd b1;  // n_hidden
    Eigen::VectorXd w2;  // n_hidden (single output row)
    double b2 = 0.0;
    Normalizer normalizer;

    Eigen::VectorXd parameters() const;
    void set_parameters(const Eigen::VectorXd& theta);
    /// Throws std::invalid_argument on inconsistent shapes or non-finite weights.
    void validate() const;
};

/// Intermediate values of one forward pass, kept for backpropagation.
struct ForwardTrace {
    Eigen::VectorXd pre_activation;
    Eigen::VectorXd hidden;
    double output = 0.0;
};

/// Network output for an already-normalized window (normalized domain).
double forward(const NarnnModel& model, std::span<const double> window);
ForwardTrace forward_trace(const NarnnModel& model, std::span<const double> window);

/// Uniform weights in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer; identity normalizer.
NarnnModel init_weights(const Topology& topology, Rng& rng);

/// Open-loop one-step-ahead predictions in physical units. Element i predicts
/// series[i + n_delays] from the true samples before it; returns T - n values.
std::vector<double> predict_series(const NarnnModel& model, std::span<const double> series);

// Serialization. Binary round-trips bit-exactly; the text form uses
// shortest round-trip decimals and is exact as well.
void save_binary(const NarnnModel& model, std::ostream& out);
NarnnModel load_binary(std::istream& in);
void save_text(const NarnnModel& model, std::ostream& out);
NarnnModel load_text(std::istream& in);

void save_model(const NarnnModel& model, const std::string& path);
/// Chooses binary or text by sniffing the header.
NarnnModel load_model(const std::string& path);

}  // namespace narrm
