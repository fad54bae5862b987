#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "narrm/channel.hpp"
#include "narrm/eval.hpp"
#include "narrm/lm_trainer.hpp"
#include "narrm/pipeline.hpp"
#include "narrm/predictors.hpp"

namespace narrm {

/// Raised for unreadable, malformed or invalid configuration; the message
/// names the offending field (or line, for syntax errors).
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A predictor as written in the config file; "nar" entries get their model
/// when the pipeline has one.
struct PredictorEntry {
    std::string kind;  // genie | iir | quantile | nar
    double forgetting = 0.01;
    std::size_t window = 500;
    double alpha = 1.45;
};

/// Everything one CLI invocation needs. Defaults reproduce the desk-scale
/// scenario and the 20-delay, 16-neuron logsig network.
struct RunConfig {
    std::uint64_t seed = 1;
    ScenarioConfig scenario;
    std::size_t n_delays = 20;
    double train_fraction = 0.8;
    std::size_t n_hidden = 16;
    Activation activation = Activation::logsig;
    LmConfig trainer;
    std::vector<PredictorEntry> predictors{{"genie"}, {"iir"}, {"quantile"}, {"nar"}};
    SweepConfig sweep;
    std::vector<std::size_t> table_neurons{8, 12, 14, 16, 18};
    std::vector<Activation> table_activations{Activation::logsig, Activation::tansig};
    std::vector<std::size_t> table_delays{2, 20, 50};
    std::size_t evaluate_steps = 100'000;
    std::string output_dir = "out";
    unsigned threads = 1;

    /// Pushes the top-level seed and thread count into the nested configs.
    void propagate();
    void validate() const;

    Topology topology() const { return {n_delays, n_hidden, activation}; }
    TrainSetup train_setup() const;
    AccuracyConfig accuracy_config() const;

    /// Effective configuration plus the named sub-seeds; excludes the thread
    /// count, which never affects results.
    nlohmann::json echo() const;
};

/// Strict parse: the `scenario` section is required, unknown keys are errors.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

std::vector<PredictorKind> make_predictors(const RunConfig& config, std::shared_ptr<const NarnnModel> model);

}  // namespace narrm
