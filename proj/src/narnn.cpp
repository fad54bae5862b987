#include "narrm/narnn.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace narrm {

std::string_view to_string(Activation a) {
    switch (a) {
    case Activation::logsig:
        return "logsig";
    case Activation::tansig:
        return "tansig";
    case Activation::linear:
        return "linear";
    }
    return "?";
}

Activation parse_activation(std::string_view name) {
    if (name == "logsig") {
        return Activation::logsig;
    }
    if (name == "tansig") {
        return Activation::tansig;
    }
    if (name == "linear" || name == "purelin") {
        return Activation::linear;
    }
    throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

namespace {

double logsig(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

double activation(Activation kind, double x) {
    switch (kind) {
    case Activation::logsig:
        return logsig(x);
    case Activation::tansig:
        // equal to 2/(1+exp(-2x)) - 1
        return std::tanh(x);
    case Activation::linear:
        return x;
    }
    return x;
}

double activation_derivative(Activation kind, double x) {
    switch (kind) {
    case Activation::logsig: {
        const double s = logsig(x);
        return s * (1.0 - s);
    }
    case Activation::tansig: {
        const double t = std::tanh(x);
        return 1.0 - t * t;
    }
    case Activation::linear:
        return 1.0;
    }
    return 1.0;
}

void Topology::validate() const {
    require(n_delays >= 1, "topology: n_delays must be >= 1");
    require(n_hidden >= 1, "topology: n_hidden must be >= 1");
    require(hidden_activation != Activation::linear,
            "topology: hidden activation must be logsig or tansig");
}

Eigen::VectorXd NarnnModel::parameters() const {
    const auto h = static_cast<Eigen::Index>(topology.n_hidden);
    const auto n = static_cast<Eigen::Index>(topology.n_delays);
    Eigen::VectorXd theta(static_cast<Eigen::Index>(topology.parameter_count()));
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < h; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            theta(k++) = w1(i, j);
        }
    }
    theta.segment(k, h) = b1;
    k += h;
    theta.segment(k, h) = w2;
    k += h;
    theta(k) = b2;
    return theta;
}

void NarnnModel::set_parameters(const Eigen::VectorXd& theta) {
    require(static_cast<std::size_t>(theta.size()) == topology.parameter_count(),
            "set_parameters: parameter vector has wrong length");
    const auto h = static_cast<Eigen::Index>(topology.n_hidden);
    const auto n = static_cast<Eigen::Index>(topology.n_delays);
    w1.resize(h, n);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < h; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            w1(i, j) = theta(k++);
        }
    }
    b1 = theta.segment(k, h);
    k += h;
    w2 = theta.segment(k, h);
    k += h;
    b2 = theta(k);
}

void NarnnModel::validate() const {
    topology.validate();
    const auto h = static_cast<Eigen::Index>(topology.n_hidden);
    const auto n = static_cast<Eigen::Index>(topology.n_delays);
    require(w1.rows() == h && w1.cols() == n, "model: w1 shape does not match topology");
    require(b1.size() == h, "model: b1 length does not match topology");
    require(w2.size() == h, "model: w2 length does not match topology");
    require(static_cast<std::size_t>(normalizer.n_features()) == topology.n_delays,
            "model: normalizer width does not match n_delays");
    require(w1.allFinite() && b1.allFinite() && w2.allFinite() && std::isfinite(b2),
            "model: non-finite weights");
}

ForwardTrace forward_trace(const NarnnModel& model, std::span<const double> window) {
    require(window.size() == model.topology.n_delays, "forward: window length does not match n_delays");
    const Eigen::Map<const Eigen::VectorXd> x(window.data(), static_cast<Eigen::Index>(window.size()));
    ForwardTrace tr;
    tr.pre_activation = model.w1 * x + model.b1;
    tr.hidden = tr.pre_activation.unaryExpr(
        [kind = model.topology.hidden_activation](double z) { return activation(kind, z); });
    tr.output = model.w2.dot(tr.hidden) + model.b2;
    return tr;
}

double forward(const NarnnModel& model, std::span<const double> window) {
    return forward_trace(model, window).output;
}

NarnnModel init_weights(const Topology& topology, Rng& rng) {
    topology.validate();
    const auto h = static_cast<Eigen::Index>(topology.n_hidden);
    const auto n = static_cast<Eigen::Index>(topology.n_delays);
    NarnnModel m;
    m.topology = topology;
    m.normalizer = Normalizer::identity(topology.n_delays);

    const double s1 = 1.0 / std::sqrt(static_cast<double>(topology.n_delays));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(topology.n_hidden));
    std::uniform_real_distribution<double> u1(-s1, s1);
    std::uniform_real_distribution<double> u2(-s2, s2);

    m.w1.resize(h, n);
    for (Eigen::Index i = 0; i < h; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            m.w1(i, j) = u1(rng);
        }
    }
    m.b1.resize(h);
    for (Eigen::Index i = 0; i < h; ++i) {
        m.b1(i) = u1(rng);
    }
    m.w2.resize(h);
    for (Eigen::Index i = 0; i < h; ++i) {
        m.w2(i) = u2(rng);
    }
    m.b2 = u2(rng);
    return m;
}

std::vector<double> predict_series(const NarnnModel& model, std::span<const double> series) {
    const std::size_t n = model.topology.n_delays;
    require(series.size() > n, "predict_series: series must be longer than n_delays");
    std::vector<double> out;
    out.reserve(series.size() - n);
    std::vector<double> window(n);
    for (std::size_t t = n; t < series.size(); ++t) {
        for (std::size_t d = 0; d < n; ++d) {
            window[d] = series[t - 1 - d];
        }
        model.normalizer.normalize_window(window);
        out.push_back(model.normalizer.denormalize_target(forward(model, window)));
    }
    return out;
}

}  // namespace narrm
