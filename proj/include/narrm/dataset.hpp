#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <span>
#include <utility>

namespace narrm {

/// Supervised one-step-ahead pairs. Row i of `inputs` holds the n samples
/// preceding targets[i], most recent first: (y(t-1), ..., y(t-n)).
struct WindowedDataset {
    Eigen::MatrixXd inputs;
    Eigen::VectorXd targets;
    std::size_t n_delays = 0;
    std::size_t source_length = 0;

    std::size_t size() const { return static_cast<std::size_t>(targets.size()); }
};

WindowedDataset make_windows(std::span<const double> series, std::size_t n_delays);

/// Chronological split: first floor(M * train_fraction) pairs train, the rest test.
std::pair<WindowedDataset, WindowedDataset> split(const WindowedDataset& ds, double train_fraction);

/// Split after an explicit number of training pairs.
std::pair<WindowedDataset, WindowedDataset> split_at(const WindowedDataset& ds, std::size_t n_train);

/// Min-max affine map of every input feature and of the target onto [-1, 1],
/// fitted on training data. Values outside the fitted range map outside
/// [-1, 1]; nothing is clamped.
struct Normalizer {
    Eigen::VectorXd input_min;
    Eigen::VectorXd input_max;
    double target_min = -1.0;
    double target_max = 1.0;

    /// Identity map for `n_features` inputs.
    static Normalizer identity(std::size_t n_features);

    std::size_t n_features() const { return static_cast<std::size_t>(input_min.size()); }

    double normalize_input(std::size_t feature, double value) const;
    double normalize_target(double value) const;
    double denormalize_target(double value) const;

    /// Normalizes a raw window in place.
    void normalize_window(std::span<double> window) const;

    /// Normalized copy of a dataset.
    WindowedDataset apply(const WindowedDataset& data) const;
    /// Maps a normalized prediction back to physical units.
    double invert(double value) const { return denormalize_target(value); }
};

/// Fits on the training pairs only. Throws std::invalid_argument when any
/// feature or the target is constant.
Normalizer fit_normalizer(const WindowedDataset& train);

double mse(std::span<const double> actual, std::span<const double> predicted);

/// Mean absolute percentage error in percent, dividing by y_i. A zero actual
/// value is a std::domain_error, not a skipped term.
double mape(std::span<const double> actual, std::span<const double> predicted);

/// n+1 columns: y_t-1 .. y_t-n, then y_t.
void write_windows_csv(std::ostream& out, const WindowedDataset& ds);
WindowedDataset read_windows_csv(std::istream& in);

}  // namespace narrm
