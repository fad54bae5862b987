#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "narrm/channel.hpp"
#include "narrm/config.hpp"
#include "narrm/dataset.hpp"
#include "narrm/eval.hpp"
#include "narrm/fbl.hpp"
#include "narrm/lm_trainer.hpp"
#include "narrm/pipeline.hpp"
#include "narrm/predictors.hpp"

namespace py = pybind11;
using namespace narrm;

namespace {

PredictorKind make_kind(const std::string& kind, const py::kwargs& kw, std::shared_ptr<const NarnnModel> model) {
    auto get = [&](const char* key, double fallback) { return kw.contains(key) ? kw[key].cast<double>() : fallback; };
    if (kind == "genie") {
        return GenieSpec{};
    }
    if (kind == "iir") {
        return IirSpec{get("forgetting", 0.01)};
    }
    if (kind == "quantile") {
        return QuantileSpec{get("confidence", 0.9), static_cast<std::size_t>(get("window", 500))};
    }
    if (kind == "nar") {
        if (!model) {
            throw std::invalid_argument("nar predictor needs model=");
        }
        return NarSpec{std::move(model), get("alpha", 1.45)};
    }
    throw std::invalid_argument("unknown predictor kind '" + kind + "'");
}

template <class Fn>
std::string to_csv(Fn&& fn) {
    std::ostringstream out;
    fn(out);
    return out.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Interference prediction and finite-blocklength resource allocation";

    py::register_exception<config_error>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<infeasible_allocation>(m, "InfeasibleAllocation", PyExc_ValueError);
    py::register_exception<training_error>(m, "TrainingError", PyExc_RuntimeError);

    // finite blocklength
    m.def("shannon_capacity", &shannon_capacity, py::arg("sinr"));
    m.def("channel_dispersion", &channel_dispersion, py::arg("sinr"));
    m.def("q_function", &q_function, py::arg("x"));
    m.def("q_inv", &q_inv, py::arg("probability"));
    m.def(
        "channel_usage",
        [](int d, double eps, double sinr) { return channel_usage({d, eps, sinr}); },
        py::arg("payload_bits"), py::arg("target_bler"), py::arg("predicted_sinr"));
    m.def("predicted_sinr", &predicted_sinr, py::arg("desired_power"), py::arg("predicted_interference"),
          py::arg("noise"));
    m.def("derive_seed", &derive_seed, py::arg("root"), py::arg("label"), py::arg("index") = 0);

    // channel
    py::class_<ScenarioConfig>(m, "ScenarioConfig")
        .def(py::init<>())
        .def_readwrite("n_transmitters", &ScenarioConfig::n_transmitters)
        .def_readwrite("mean_snr_db", &ScenarioConfig::mean_snr_db)
        .def_readwrite("inr_min_db", &ScenarioConfig::inr_min_db)
        .def_readwrite("inr_max_db", &ScenarioConfig::inr_max_db)
        .def_readwrite("fading_correlation", &ScenarioConfig::fading_correlation)
        .def_readwrite("noise_power", &ScenarioConfig::noise_power)
        .def_readwrite("tx_power", &ScenarioConfig::tx_power)
        .def_readwrite("payload_bits", &ScenarioConfig::payload_bits)
        .def_readwrite("target_bler", &ScenarioConfig::target_bler)
        .def_readwrite("horizon", &ScenarioConfig::horizon)
        .def_readwrite("seed", &ScenarioConfig::seed)
        .def("validate", &ScenarioConfig::validate);

    m.def(
        "generate_series",
        [](const ScenarioConfig& c) {
            const InterferenceSeries s = generate_series(build_scenario(c));
            py::dict out;
            out["interference"] = s.samples;
            out["desired_gain"] = s.desired_gain;
            out["interferer_gain_mean"] = s.scenario.interferer_gain_mean;
            out["desired_gain_mean"] = s.scenario.desired_gain_mean;
            return out;
        },
        py::arg("config"), "Series for config.horizon steps on the config's named sub-seeds.");
    m.def("sinr", &sinr, py::arg("desired_power"), py::arg("interference"), py::arg("noise"));

    // dataset
    m.def(
        "make_windows",
        [](const std::vector<double>& s, std::size_t n) {
            const WindowedDataset w = make_windows(s, n);
            return py::make_tuple(w.inputs, w.targets);
        },
        py::arg("series"), py::arg("n_delays"), "(inputs M x n newest first, targets M)");
    m.def("mse", [](const std::vector<double>& a, const std::vector<double>& p) { return mse(a, p); });
    m.def("mape", [](const std::vector<double>& a, const std::vector<double>& p) { return mape(a, p); });

    // network
    py::enum_<Activation>(m, "Activation")
        .value("logsig", Activation::logsig)
        .value("tansig", Activation::tansig)
        .value("linear", Activation::linear);

    py::class_<NarnnModel, std::shared_ptr<NarnnModel>>(m, "NarnnModel")
        .def_property_readonly("n_delays", [](const NarnnModel& x) { return x.topology.n_delays; })
        .def_property_readonly("n_hidden", [](const NarnnModel& x) { return x.topology.n_hidden; })
        .def_property_readonly("activation", [](const NarnnModel& x) { return x.topology.hidden_activation; })
        .def_property_readonly("parameter_count", [](const NarnnModel& x) { return x.topology.parameter_count(); })
        .def("parameters", &NarnnModel::parameters)
        .def("set_parameters", &NarnnModel::set_parameters)
        .def("forward", [](const NarnnModel& x, const std::vector<double>& w) { return forward(x, w); },
             py::arg("window"), "Normalized-domain output for a normalized window (newest first).")
        .def("predict_series", [](const NarnnModel& x, const std::vector<double>& s) { return predict_series(x, s); },
             py::arg("series"), "One-step-ahead predictions in physical units, length T - n_delays.")
        .def("save", [](const NarnnModel& x, const std::string& p) { save_model(x, p); }, py::arg("path"));

    m.def("load_model", [](const std::string& p) { return std::make_shared<NarnnModel>(load_model(p)); },
          py::arg("path"));
    m.def(
        "init_weights",
        [](std::size_t n, std::size_t h, Activation a, std::uint64_t seed) {
            Rng rng = make_rng(seed, "init");
            return std::make_shared<NarnnModel>(init_weights({n, h, a}, rng));
        },
        py::arg("n_delays"), py::arg("n_hidden"), py::arg("activation") = Activation::logsig, py::arg("seed") = 1);

    m.def(
        "train_narnn",
        [](const std::vector<double>& series, std::size_t n_delays, std::size_t n_hidden, Activation act,
           double train_fraction, std::size_t max_epochs, std::uint64_t seed) {
            TrainSetup s;
            s.topology = {n_delays, n_hidden, act};
            s.train_fraction = train_fraction;
            s.lm.max_epochs = max_epochs;
            s.lm.seed = seed;
            TrainedNarnn t;
            {
                py::gil_scoped_release release;
                t = train_narnn(series, s);
            }
            py::dict out;
            out["model"] = std::make_shared<NarnnModel>(t.model);
            out["epochs"] = t.history.epochs.size();
            out["accepted_steps"] = t.history.accepted_steps();
            out["stop"] = std::string(to_string(t.history.stop));
            out["train_mse"] = t.train_mse;
            out["test_mse"] = t.test_mse;
            out["test_mape"] = t.test_mape;
            out["test_first_t"] = t.test_first_t;
            out["test_actual"] = t.test_actual;
            out["test_predicted"] = t.test_predicted;
            out["history_csv"] = to_csv([&](std::ostream& o) { write_history_csv(o, t.history); });
            return out;
        },
        py::arg("series"), py::arg("n_delays") = 20, py::arg("n_hidden") = 16, py::arg("activation") = Activation::logsig,
        py::arg("train_fraction") = 0.8, py::arg("max_epochs") = 200, py::arg("seed") = 1);

    // predictors
    m.def(
        "trace",
        [](const std::string& kind, const std::vector<double>& series, std::shared_ptr<NarnnModel> model,
           const py::kwargs& kw) {
            const PredictionTrace t = trace_series(make_kind(kind, kw, model), series);
            return py::make_tuple(t.warm_up, t.predicted);
        },
        py::arg("kind"), py::arg("series"), py::arg("model") = nullptr,
        "Returns (warm_up, predictions); predictions[i] forecasts series[warm_up + i]. "
        "Keyword options: forgetting (iir), confidence and window (quantile), alpha (nar).");

    // experiment pipeline driven by the same JSON config the CLI uses
    m.def(
        "config_echo",
        [](const std::string& text) { return parse_run_config(nlohmann::json::parse(text)).echo().dump(); },
        py::arg("config_json"));
    m.def(
        "sweep",
        [](const std::string& text, std::shared_ptr<NarnnModel> model, unsigned threads) {
            RunConfig c = parse_run_config(nlohmann::json::parse(text));
            c.threads = std::max(1u, threads);
            c.propagate();
            const auto kinds = make_predictors(c, model);
            std::string csv;
            {
                py::gil_scoped_release release;
                const EvalReport r = sweep_targets(build_scenario(c.scenario), kinds, c.sweep);
                csv = to_csv([&](std::ostream& o) { write_report_csv(o, r); });
            }
            return csv;
        },
        py::arg("config_json"), py::arg("model") = nullptr, py::arg("threads") = 1,
        "Runs the target-BLER sweep; returns the report CSV text.");
}
