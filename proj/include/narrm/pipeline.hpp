#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "narrm/dataset.hpp"
#include "narrm/lm_trainer.hpp"
#include "narrm/narnn.hpp"

namespace narrm {

struct TrainSetup {
    Topology topology;
    double train_fraction = 0.8;
    LmConfig lm;
};

/// Outcome of windowing, normalizing, initializing and LM-training one network.
struct TrainedNarnn {
    NarnnModel model;
    TrainHistory history;
    std::size_t train_pairs = 0;
    std::size_t test_first_t = 0;  // series index of the first test target
    std::vector<double> test_actual;
    std::vector<double> test_predicted;
    double train_mse = 0.0;  // physical units
    double test_mse = 0.0;
    double test_mape = 0.0;
};

/// Windows the series, splits chronologically, fits the normalizer on the
/// training pairs, draws initial weights from the "init" sub-seed of
/// setup.lm.seed and trains. Test metrics are in physical units.
TrainedNarnn train_narnn(std::span<const double> series, const TrainSetup& setup);

/// Same, with the split placed so that training targets are exactly the
/// samples before `split_t` (shared test set across delay counts).
TrainedNarnn train_narnn_split_at(std::span<const double> series, const TrainSetup& setup,
                                  std::size_t split_t);

/// Denormalized predictions for the rows of a raw (unnormalized) dataset.
std::vector<double> predict_dataset(const NarnnModel& model, const WindowedDataset& raw);

/// `t,actual,predicted,predictor`
void write_test_predictions_csv(std::ostream& out, const TrainedNarnn& trained);

struct AccuracyConfig {
    std::vector<std::size_t> neuron_counts{8, 12, 14, 16, 18};
    std::vector<Activation> activations{Activation::logsig, Activation::tansig};
    std::vector<std::size_t> delay_taps{2, 20, 50};
    Topology reference;  // delays for the neuron sweep, neurons/activation for the delay sweep
    double train_fraction = 0.8;
    LmConfig lm;
    unsigned threads = 1;
};

struct AccuracyCell {
    std::string sweep;  // "neurons" or "delays"
    Activation activation = Activation::logsig;
    std::size_t n_hidden = 0;
    std::size_t n_delays = 0;
    double mse = 0.0;
    double mape = 0.0;
    std::size_t epochs = 0;
    std::string stop;
    std::string error;  // non-empty when training failed for this cell
};

/// Trains one network per (activation, neuron count) and per delay count on a
/// shared chronological split; per-cell failures are recorded, not thrown.
std::vector<AccuracyCell> accuracy_experiment(std::span<const double> series, const AccuracyConfig& config);

/// Long format: `sweep,activation,n_hidden,n_delays,mse,mape,epochs,stop,error`
void write_accuracy_csv(std::ostream& out, const std::vector<AccuracyCell>& cells);

/// Neuron-sweep grid: rows activation x metric (mse, mape, epochs), one column per neuron count.
void write_accuracy_grid(std::ostream& out, const std::vector<AccuracyCell>& cells);

}  // namespace narrm
