#include "narrm/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <ostream>

#include "narrm/csv.hpp"
#include "narrm/eval.hpp"

namespace narrm {

std::vector<double> predict_dataset(const NarnnModel& model, const WindowedDataset& raw) {
    const WindowedDataset norm = model.normalizer.apply(raw);
    std::vector<double> out(raw.size());
    std::vector<double> row(model.topology.n_delays);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        for (std::size_t d = 0; d < row.size(); ++d) {
            row[d] = norm.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d));
        }
        out[i] = model.normalizer.denormalize_target(forward(model, row));
    }
    return out;
}

namespace {

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

TrainedNarnn train_on_split(const WindowedDataset& windows, std::size_t n_train, const TrainSetup& setup) {
    auto [train_raw, test_raw] = split_at(windows, n_train);
    const Normalizer norm = fit_normalizer(train_raw);

    Rng rng = make_rng(setup.lm.seed, "init");
    NarnnModel model = init_weights(setup.topology, rng);
    model.normalizer = norm;

    auto [trained, history] = train(std::move(model), norm.apply(train_raw), setup.lm);

    TrainedNarnn out;
    out.model = std::move(trained);
    out.history = std::move(history);
    out.train_pairs = train_raw.size();
    out.test_first_t = setup.topology.n_delays + train_raw.size();
    out.test_actual = to_vector(test_raw.targets);
    out.test_predicted = predict_dataset(out.model, test_raw);
    out.train_mse = mse(to_vector(train_raw.targets), predict_dataset(out.model, train_raw));
    out.test_mse = mse(out.test_actual, out.test_predicted);
    out.test_mape = mape(out.test_actual, out.test_predicted);
    return out;
}

}  // namespace

TrainedNarnn train_narnn(std::span<const double> series, const TrainSetup& setup) {
    setup.topology.validate();
    const WindowedDataset windows = make_windows(series, setup.topology.n_delays);
    require(setup.train_fraction > 0.0 && setup.train_fraction < 1.0,
            "dataset.train_fraction must lie in (0, 1)");
    const auto n_train =
        static_cast<std::size_t>(std::floor(static_cast<double>(windows.size()) * setup.train_fraction));
    return train_on_split(windows, n_train, setup);
}

TrainedNarnn train_narnn_split_at(std::span<const double> series, const TrainSetup& setup,
                                  std::size_t split_t) {
    setup.topology.validate();
    require(split_t > setup.topology.n_delays, "train: split point leaves no training pairs");
    const WindowedDataset windows = make_windows(series, setup.topology.n_delays);
    return train_on_split(windows, split_t - setup.topology.n_delays, setup);
}

void write_test_predictions_csv(std::ostream& out, const TrainedNarnn& trained) {
    csv::write_header(out, {"t", "actual", "predicted", "predictor"});
    const std::string id = "nar(alpha=1)";
    for (std::size_t i = 0; i < trained.test_actual.size(); ++i) {
        (csv::Row() << trained.test_first_t + i << trained.test_actual[i] << trained.test_predicted[i]
                    << std::string_view(id))
            .write(out);
    }
}

std::vector<AccuracyCell> accuracy_experiment(std::span<const double> series, const AccuracyConfig& config) {
    config.reference.validate();
    require(config.train_fraction > 0.0 && config.train_fraction < 1.0,
            "dataset.train_fraction must lie in (0, 1)");
    const std::size_t ref_delays = config.reference.n_delays;
    require(series.size() > ref_delays + 1, "accuracy_experiment: series too short");
    // every cell is tested on targets t >= split_t
    const std::size_t split_t =
        ref_delays + static_cast<std::size_t>(std::floor(static_cast<double>(series.size() - ref_delays) *
                                                         config.train_fraction));

    std::vector<AccuracyCell> cells;
    for (Activation act : config.activations) {
        for (std::size_t h : config.neuron_counts) {
            cells.push_back({"neurons", act, h, ref_delays, 0, 0, 0, "", ""});
        }
    }
    for (std::size_t n : config.delay_taps) {
        cells.push_back({"delays", config.reference.hidden_activation, config.reference.n_hidden, n, 0, 0, 0, "", ""});
    }

    parallel_for(cells.size(), config.threads, [&](std::size_t i) {
        AccuracyCell& cell = cells[i];
        try {
            TrainSetup setup;
            setup.topology = {cell.n_delays, cell.n_hidden, cell.activation};
            setup.train_fraction = config.train_fraction;
            setup.lm = config.lm;
            const TrainedNarnn t = train_narnn_split_at(series, setup, split_t);
            cell.mse = t.test_mse;
            cell.mape = t.test_mape;
            cell.epochs = t.history.epochs.size();
            cell.stop = std::string(to_string(t.history.stop));
        } catch (const std::exception& e) {
            cell.mse = std::nan("");
            cell.mape = std::nan("");
            cell.error = e.what();
        }
    });
    return cells;
}

void write_accuracy_csv(std::ostream& out, const std::vector<AccuracyCell>& cells) {
    csv::write_header(out, {"sweep", "activation", "n_hidden", "n_delays", "mse", "mape", "epochs", "stop", "error"});
    for (const auto& c : cells) {
        std::string err = c.error;
        std::replace(err.begin(), err.end(), ',', ';');
        (csv::Row() << std::string_view(c.sweep) << to_string(c.activation) << c.n_hidden << c.n_delays << c.mse
                    << c.mape << c.epochs << std::string_view(c.stop) << std::string_view(err))
            .write(out);
    }
}

void write_accuracy_grid(std::ostream& out, const std::vector<AccuracyCell>& cells) {
    std::vector<std::size_t> neurons;
    std::vector<Activation> acts;
    for (const auto& c : cells) {
        if (c.sweep != "neurons") {
            continue;
        }
        if (std::find(neurons.begin(), neurons.end(), c.n_hidden) == neurons.end()) {
            neurons.push_back(c.n_hidden);
        }
        if (std::find(acts.begin(), acts.end(), c.activation) == acts.end()) {
            acts.push_back(c.activation);
        }
    }
    std::vector<std::string> header{"activation", "metric"};
    for (std::size_t n : neurons) {
        header.push_back("n" + std::to_string(n));
    }
    csv::write_header(out, header);
    for (Activation a : acts) {
        for (std::string_view metric : {"mse", "mape", "epochs"}) {
            csv::Row row;
            row << to_string(a) << metric;
            for (std::size_t n : neurons) {
                for (const auto& c : cells) {
                    if (c.sweep == "neurons" && c.activation == a && c.n_hidden == n) {
                        if (metric == "mse") {
                            row << c.mse;
                        } else if (metric == "mape") {
                            row << c.mape;
                        } else {
                            row << c.epochs;
                        }
                        break;
                    }
                }
            }
            row.write(out);
        }
    }
}

}  // namespace narrm
