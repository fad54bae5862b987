#include "narrm/dataset.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "narrm/common.hpp"
#include "narrm/csv.hpp"

namespace narrm {

WindowedDataset make_windows(std::span<const double> series, std::size_t n_delays) {
    require(n_delays >= 1, "make_windows: n_delays must be >= 1");
    require(series.size() > n_delays,
            "make_windows: series of length " + std::to_string(series.size()) +
                " is too short for " + std::to_string(n_delays) + " delays");
    const std::size_t m = series.size() - n_delays;
    WindowedDataset ds;
    ds.n_delays = n_delays;
    ds.source_length = series.size();
    ds.inputs.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n_delays));
    ds.targets.resize(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t t = i + n_delays;
        for (std::size_t d = 0; d < n_delays; ++d) {
            ds.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = series[t - 1 - d];
        }
        ds.targets(static_cast<Eigen::Index>(i)) = series[t];
    }
    return ds;
}

std::pair<WindowedDataset, WindowedDataset> split_at(const WindowedDataset& ds, std::size_t n_train) {
    const std::size_t m = ds.size();
    require(n_train >= 1 && n_train < m, "split: both train and test sides must be non-empty");
    const auto tr = static_cast<Eigen::Index>(n_train);
    const auto te = static_cast<Eigen::Index>(m - n_train);

    WindowedDataset train;
    train.n_delays = ds.n_delays;
    train.source_length = ds.source_length;
    train.inputs = ds.inputs.topRows(tr);
    train.targets = ds.targets.head(tr);

    WindowedDataset test;
    test.n_delays = ds.n_delays;
    test.source_length = ds.source_length;
    test.inputs = ds.inputs.bottomRows(te);
    test.targets = ds.targets.tail(te);
    return {std::move(train), std::move(test)};
}

std::pair<WindowedDataset, WindowedDataset> split(const WindowedDataset& ds, double train_fraction) {
    require(train_fraction > 0.0 && train_fraction < 1.0, "split: train_fraction must lie in (0, 1)");
    const auto n_train =
        static_cast<std::size_t>(std::floor(static_cast<double>(ds.size()) * train_fraction));
    return split_at(ds, n_train);
}

Normalizer Normalizer::identity(std::size_t n_features) {
    Normalizer n;
    n.input_min = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n_features), -1.0);
    n.input_max = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n_features), 1.0);
    n.target_min = -1.0;
    n.target_max = 1.0;
    return n;
}

namespace {

double to_unit(double v, double lo, double hi) { return 2.0 * (v - lo) / (hi - lo) - 1.0; }
double from_unit(double v, double lo, double hi) { return (v + 1.0) * (hi - lo) / 2.0 + lo; }

}  // namespace

double Normalizer::normalize_input(std::size_t feature, double value) const {
    const auto f = static_cast<Eigen::Index>(feature);
    return to_unit(value, input_min(f), input_max(f));
}

double Normalizer::normalize_target(double value) const { return to_unit(value, target_min, target_max); }

double Normalizer::denormalize_target(double value) const {
    return from_unit(value, target_min, target_max);
}

void Normalizer::normalize_window(std::span<double> window) const {
    require(window.size() == n_features(), "normalizer: window width does not match feature count");
    for (std::size_t d = 0; d < window.size(); ++d) {
        window[d] = normalize_input(d, window[d]);
    }
}

WindowedDataset Normalizer::apply(const WindowedDataset& data) const {
    require(static_cast<std::size_t>(data.inputs.cols()) == n_features(),
            "normalizer: dataset width does not match feature count");
    WindowedDataset out = data;
    for (Eigen::Index c = 0; c < out.inputs.cols(); ++c) {
        const double lo = input_min(c);
        const double hi = input_max(c);
        for (Eigen::Index r = 0; r < out.inputs.rows(); ++r) {
            out.inputs(r, c) = to_unit(out.inputs(r, c), lo, hi);
        }
    }
    for (Eigen::Index r = 0; r < out.targets.size(); ++r) {
        out.targets(r) = to_unit(out.targets(r), target_min, target_max);
    }
    return out;
}

Normalizer fit_normalizer(const WindowedDataset& train) {
    require(train.size() >= 1, "fit_normalizer: empty training set");
    Normalizer n;
    n.input_min = train.inputs.colwise().minCoeff().transpose();
    n.input_max = train.inputs.colwise().maxCoeff().transpose();
    n.target_min = train.targets.minCoeff();
    n.target_max = train.targets.maxCoeff();
    for (Eigen::Index c = 0; c < n.input_min.size(); ++c) {
        if (!(n.input_max(c) > n.input_min(c))) {
            throw std::invalid_argument("fit_normalizer: feature " + std::to_string(c) +
                                        " is constant (scale of zero)");
        }
    }
    if (!(n.target_max > n.target_min)) {
        throw std::invalid_argument("fit_normalizer: target is constant (scale of zero)");
    }
    return n;
}

double mse(std::span<const double> actual, std::span<const double> predicted) {
    require(actual.size() == predicted.size(), "mse: length mismatch");
    require(!actual.empty(), "mse: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double d = actual[i] - predicted[i];
        sum += d * d;
    }
    return sum / static_cast<double>(actual.size());
}

double mape(std::span<const double> actual, std::span<const double> predicted) {
    require(actual.size() == predicted.size(), "mape: length mismatch");
    require(!actual.empty(), "mape: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (actual[i] == 0.0) {
            throw std::domain_error("mape: actual value at index " + std::to_string(i) + " is zero");
        }
        sum += std::abs(actual[i] - predicted[i]) / actual[i];
    }
    return 100.0 * sum / static_cast<double>(actual.size());
}

void write_windows_csv(std::ostream& out, const WindowedDataset& ds) {
    std::vector<std::string> header;
    for (std::size_t d = 1; d <= ds.n_delays; ++d) {
        header.push_back("y_t-" + std::to_string(d));
    }
    header.emplace_back("y_t");
    csv::write_header(out, header);
    for (Eigen::Index r = 0; r < ds.inputs.rows(); ++r) {
        csv::Row row;
        for (Eigen::Index c = 0; c < ds.inputs.cols(); ++c) {
            row << ds.inputs(r, c);
        }
        row << ds.targets(r);
        row.write(out);
    }
}

WindowedDataset read_windows_csv(std::istream& in) {
    const csv::Table table = csv::read_numeric(in);
    require(table.header.size() >= 2, "read_windows_csv: need at least one input and the target column");
    const std::size_t n = table.header.size() - 1;
    WindowedDataset ds;
    ds.n_delays = n;
    ds.inputs.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(n));
    ds.targets.resize(static_cast<Eigen::Index>(table.rows.size()));
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            ds.inputs(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = table.rows[r][c];
        }
        ds.targets(static_cast<Eigen::Index>(r)) = table.rows[r][n];
    }
    ds.source_length = table.rows.size() + n;
    return ds;
}

}  // namespace narrm
