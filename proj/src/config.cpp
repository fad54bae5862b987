#include "narrm/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace narrm {

using nlohmann::json;

namespace {

class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) {
            throw config_error("config: '" + path_ + "' must be an object");
        }
    }

    void allow(std::initializer_list<const char*> keys) const {
        const std::set<std::string> allowed(keys.begin(), keys.end());
        for (const auto& item : j_.items()) {
            if (!allowed.contains(item.key())) {
                throw config_error("config: unknown field '" + name(item.key()) + "'");
            }
        }
    }

    bool has(const char* key) const { return j_.contains(key); }
    const json& raw(const char* key) const { return j_.at(key); }
    std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void number(const char* key, double& out) const {
        if (!has(key)) {
            return;
        }
        const json& v = j_.at(key);
        if (!v.is_number()) {
            throw config_error("config: field '" + name(key) + "' must be a number");
        }
        out = v.get<double>();
    }

    template <class Int>
    void integer(const char* key, Int& out) const {
        if (!has(key)) {
            return;
        }
        const json& v = j_.at(key);
        if (!v.is_number_integer()) {
            throw config_error("config: field '" + name(key) + "' must be an integer");
        }
        if constexpr (std::is_unsigned_v<Int>) {
            if (v.is_number_unsigned() || v.get<long long>() >= 0) {
                out = v.get<Int>();
                return;
            }
            throw config_error("config: field '" + name(key) + "' must be non-negative");
        } else {
            out = v.get<Int>();
        }
    }

    void string(const char* key, std::string& out) const {
        if (!has(key)) {
            return;
        }
        const json& v = j_.at(key);
        if (!v.is_string()) {
            throw config_error("config: field '" + name(key) + "' must be a string");
        }
        out = v.get<std::string>();
    }

    void boolean(const char* key, bool& out) const {
        if (!has(key)) {
            return;
        }
        const json& v = j_.at(key);
        if (!v.is_boolean()) {
            throw config_error("config: field '" + name(key) + "' must be true or false");
        }
        out = v.get<bool>();
    }

    const json& array(const char* key) const {
        const json& v = j_.at(key);
        if (!v.is_array()) {
            throw config_error("config: field '" + name(key) + "' must be an array");
        }
        return v;
    }

private:
    const json& j_;
    std::string path_;
};

Activation activation_field(const std::string& text, const std::string& field) {
    try {
        return parse_activation(text);
    } catch (const std::invalid_argument&) {
        throw config_error("config: field '" + field + "' must be logsig or tansig, got '" + text + "'");
    }
}

template <class Int>
std::vector<Int> integer_list(const Section& s, const char* key) {
    std::vector<Int> out;
    const json& arr = s.array(key);
    for (const auto& v : arr) {
        if (!v.is_number_unsigned() || v.get<Int>() == 0) {
            throw config_error("config: field '" + s.name(key) + "' must hold positive integers");
        }
        out.push_back(v.get<Int>());
    }
    return out;
}

}  // namespace

void RunConfig::propagate() {
    scenario.seed = seed;
    trainer.seed = seed;
    sweep.seed = seed;
    sweep.threads = threads;
}

void RunConfig::validate() const {
    try {
        scenario.validate();
        topology().validate();
        trainer.validate();
        sweep.validate();
    } catch (const std::invalid_argument& e) {
        throw config_error(std::string("config: ") + e.what());
    }
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw config_error("config: dataset.train_fraction must lie in (0, 1)");
    }
    if (evaluate_steps < 2) {
        throw config_error("config: evaluate.steps must be >= 2");
    }
    for (const auto& p : predictors) {
        if (p.kind == "iir" && !(p.forgetting > 0.0 && p.forgetting <= 1.0)) {
            throw config_error("config: predictors[].forgetting must lie in (0, 1]");
        }
        if (p.kind == "quantile" && p.window < 2) {
            throw config_error("config: predictors[].window must be >= 2");
        }
        if (p.kind == "nar" && !(p.alpha >= 1.0 && p.alpha <= 2.0)) {
            throw config_error("config: predictors[].alpha must lie in [1, 2]");
        }
    }
}

TrainSetup RunConfig::train_setup() const {
    TrainSetup s;
    s.topology = topology();
    s.train_fraction = train_fraction;
    s.lm = trainer;
    return s;
}

AccuracyConfig RunConfig::accuracy_config() const {
    AccuracyConfig a;
    a.neuron_counts = table_neurons;
    a.activations = table_activations;
    a.delay_taps = table_delays;
    a.reference = topology();
    a.train_fraction = train_fraction;
    a.lm = trainer;
    a.threads = threads;
    return a;
}

json RunConfig::echo() const {
    json j;
    j["seed"] = seed;
    j["scenario"] = {
        {"n_transmitters", scenario.n_transmitters}, {"mean_snr_db", scenario.mean_snr_db},
        {"inr_min_db", scenario.inr_min_db},         {"inr_max_db", scenario.inr_max_db},
        {"fading_correlation", scenario.fading_correlation},
        {"noise_power", scenario.noise_power},       {"tx_power", scenario.tx_power},
        {"payload_bits", scenario.payload_bits},     {"target_bler", scenario.target_bler},
        {"horizon", scenario.horizon},
    };
    j["dataset"] = {{"n_delays", n_delays}, {"train_fraction", train_fraction}};
    j["topology"] = {{"n_hidden", n_hidden}, {"activation", std::string(to_string(activation))}};
    j["trainer"] = {
        {"max_epochs", trainer.max_epochs},     {"damping_init", trainer.damping_init},
        {"damping_up", trainer.damping_up},     {"damping_down", trainer.damping_down},
        {"damping_max", trainer.damping_max},   {"goal_sse", trainer.goal_sse},
        {"min_gradient", trainer.min_gradient},
    };
    json preds = json::array();
    for (const auto& p : predictors) {
        json e{{"kind", p.kind}};
        if (p.kind == "iir") {
            e["forgetting"] = p.forgetting;
        } else if (p.kind == "quantile") {
            e["window"] = p.window;
        } else if (p.kind == "nar") {
            e["alpha"] = p.alpha;
        }
        preds.push_back(e);
    }
    j["predictors"] = preds;
    j["sweep"] = {
        {"eps_targets", sweep.eps_targets},
        {"total_steps", sweep.total_steps},
        {"chunk_steps", sweep.chunk_steps},
        {"rounding", sweep.rounding == RuRounding::ceil ? "ceil" : "real"},
        {"redraw_scenario", sweep.redraw_scenario},
    };
    json acts = json::array();
    for (Activation a : table_activations) {
        acts.push_back(std::string(to_string(a)));
    }
    j["table"] = {{"neurons", table_neurons}, {"activations", acts}, {"delay_taps", table_delays}};
    j["evaluate"] = {{"steps", evaluate_steps}};
    j["seeds"] = {
        {"scenario", derive_seed(seed, "scenario")},
        {"train-series", derive_seed(seed, "train-series")},
        {"init", derive_seed(seed, "init")},
        {"evaluate", derive_seed(seed, "evaluate")},
        {"chunk-0", derive_seed(seed, "chunk", 0)},
        {"chunk-i", "derive_seed(seed, \"chunk\", i)"},
    };
    return j;
}

RunConfig parse_run_config(const json& j) {
    RunConfig c;
    const Section root(j, "");
    root.allow({"seed", "scenario", "dataset", "topology", "trainer", "predictors", "sweep", "table",
                "evaluate", "output_dir"});
    if (!root.has("scenario")) {
        throw config_error("config: missing required field 'scenario'");
    }
    root.integer("seed", c.seed);
    root.string("output_dir", c.output_dir);

    {
        const Section s(root.raw("scenario"), "scenario");
        s.allow({"n_transmitters", "mean_snr_db", "inr_min_db", "inr_max_db", "fading_correlation",
                 "noise_power", "tx_power", "payload_bits", "target_bler", "horizon"});
        s.integer("n_transmitters", c.scenario.n_transmitters);
        s.number("mean_snr_db", c.scenario.mean_snr_db);
        s.number("inr_min_db", c.scenario.inr_min_db);
        s.number("inr_max_db", c.scenario.inr_max_db);
        s.number("fading_correlation", c.scenario.fading_correlation);
        s.number("noise_power", c.scenario.noise_power);
        s.number("tx_power", c.scenario.tx_power);
        s.integer("payload_bits", c.scenario.payload_bits);
        s.number("target_bler", c.scenario.target_bler);
        s.integer("horizon", c.scenario.horizon);
    }
    if (root.has("dataset")) {
        const Section s(root.raw("dataset"), "dataset");
        s.allow({"n_delays", "train_fraction"});
        s.integer("n_delays", c.n_delays);
        s.number("train_fraction", c.train_fraction);
    }
    if (root.has("topology")) {
        const Section s(root.raw("topology"), "topology");
        s.allow({"n_hidden", "activation"});
        s.integer("n_hidden", c.n_hidden);
        std::string act(to_string(c.activation));
        s.string("activation", act);
        c.activation = activation_field(act, "topology.activation");
    }
    if (root.has("trainer")) {
        const Section s(root.raw("trainer"), "trainer");
        s.allow({"max_epochs", "damping_init", "damping_up", "damping_down", "damping_max", "goal_sse",
                 "min_gradient"});
        s.integer("max_epochs", c.trainer.max_epochs);
        s.number("damping_init", c.trainer.damping_init);
        s.number("damping_up", c.trainer.damping_up);
        s.number("damping_down", c.trainer.damping_down);
        s.number("damping_max", c.trainer.damping_max);
        s.number("goal_sse", c.trainer.goal_sse);
        s.number("min_gradient", c.trainer.min_gradient);
    }
    if (root.has("predictors")) {
        c.predictors.clear();
        const json& arr = root.array("predictors");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const Section s(arr[i], "predictors[" + std::to_string(i) + "]");
            s.allow({"kind", "forgetting", "window", "alpha"});
            if (!s.has("kind")) {
                throw config_error("config: missing required field '" + s.name("kind") + "'");
            }
            PredictorEntry e;
            s.string("kind", e.kind);
            if (e.kind != "genie" && e.kind != "iir" && e.kind != "quantile" && e.kind != "nar") {
                throw config_error("config: field '" + s.name("kind") +
                                   "' must be genie, iir, quantile or nar, got '" + e.kind + "'");
            }
            s.number("forgetting", e.forgetting);
            s.integer("window", e.window);
            s.number("alpha", e.alpha);
            c.predictors.push_back(e);
        }
    }
    if (root.has("sweep")) {
        const Section s(root.raw("sweep"), "sweep");
        s.allow({"eps_targets", "total_steps", "chunk_steps", "rounding", "redraw_scenario"});
        if (s.has("eps_targets")) {
            c.sweep.eps_targets.clear();
            for (const auto& v : s.array("eps_targets")) {
                if (!v.is_number()) {
                    throw config_error("config: field 'sweep.eps_targets' must hold numbers");
                }
                c.sweep.eps_targets.push_back(v.get<double>());
            }
        }
        s.integer("total_steps", c.sweep.total_steps);
        s.integer("chunk_steps", c.sweep.chunk_steps);
        std::string rounding = "real";
        s.string("rounding", rounding);
        if (rounding != "real" && rounding != "ceil") {
            throw config_error("config: field 'sweep.rounding' must be real or ceil");
        }
        c.sweep.rounding = rounding == "ceil" ? RuRounding::ceil : RuRounding::real;
        s.boolean("redraw_scenario", c.sweep.redraw_scenario);
    }
    if (root.has("table")) {
        const Section s(root.raw("table"), "table");
        s.allow({"neurons", "activations", "delay_taps"});
        if (s.has("neurons")) {
            c.table_neurons = integer_list<std::size_t>(s, "neurons");
        }
        if (s.has("delay_taps")) {
            c.table_delays = integer_list<std::size_t>(s, "delay_taps");
        }
        if (s.has("activations")) {
            c.table_activations.clear();
            for (const auto& v : s.array("activations")) {
                if (!v.is_string()) {
                    throw config_error("config: field 'table.activations' must hold strings");
                }
                c.table_activations.push_back(activation_field(v.get<std::string>(), "table.activations"));
            }
        }
    }
    if (root.has("evaluate")) {
        const Section s(root.raw("evaluate"), "evaluate");
        s.allow({"steps"});
        s.integer("steps", c.evaluate_steps);
    }
    c.propagate();
    c.validate();
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw config_error("config: cannot open '" + path + "'");
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        // message carries "at line L, column C"
        throw config_error("config: " + path + ": " + e.what());
    }
    return parse_run_config(j);
}

std::vector<PredictorKind> make_predictors(const RunConfig& config, std::shared_ptr<const NarnnModel> model) {
    std::vector<PredictorKind> out;
    for (const auto& p : config.predictors) {
        if (p.kind == "genie") {
            out.emplace_back(GenieSpec{});
        } else if (p.kind == "iir") {
            out.emplace_back(IirSpec{p.forgetting});
        } else if (p.kind == "quantile") {
            out.emplace_back(QuantileSpec{1.0 - config.scenario.target_bler, p.window});
        } else if (p.kind == "nar") {
            if (!model) {
                throw config_error("config: a 'nar' predictor needs a trained model (--model)");
            }
            out.emplace_back(NarSpec{model, p.alpha});
        }
    }
    return out;
}

}  // namespace narrm
