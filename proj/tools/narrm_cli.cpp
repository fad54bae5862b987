// narrm: simulate | train | evaluate | sweep | calibrate | table
//
// Exit codes: 0 success, 1 usage/config error, 2 runtime error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "narrm/channel.hpp"
#include "narrm/config.hpp"
#include "narrm/csv.hpp"
#include "narrm/eval.hpp"
#include "narrm/pipeline.hpp"

namespace fs = std::filesystem;
using namespace narrm;
using nlohmann::json;

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    unsigned threads = 1;
    std::vector<std::string> sets;
    std::string series;
    std::string model;
    std::string mode = "match-resource-usage";
};

// --set a.b.c=value; the value is parsed as JSON and falls back to a string
void apply_override(json& root, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw config_error("--set expects key.path=value, got '" + assignment + "'");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) {
        value = text;
    }
    std::string pointer;
    std::size_t start = 0;
    while (start <= key.size()) {
        const auto dot = key.find('.', start);
        pointer += "/" + key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (dot == std::string::npos) {
            break;
        }
        start = dot + 1;
    }
    root[json::json_pointer(pointer)] = value;
}

RunConfig resolve_config(const Options& o) {
    std::ifstream in(o.config);
    if (!in) {
        throw config_error("config: cannot open '" + o.config + "'");
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw config_error("config: " + o.config + ": " + e.what());
    }
    for (const auto& s : o.sets) {
        apply_override(j, s);
    }
    RunConfig c = parse_run_config(j);
    if (o.seed) {
        c.seed = *o.seed;
    }
    if (o.out) {
        c.output_dir = *o.out;
    }
    c.threads = std::max(1u, o.threads);
    c.propagate();
    c.validate();
    return c;
}

fs::path output_dir(const RunConfig& c) {
    const fs::path dir(c.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
    }
    return dir;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    body(out);
    out.flush();
    if (!out) {
        throw std::runtime_error("write failed for '" + path.string() + "'");
    }
}

void write_meta(const fs::path& dir, const std::string& command, const RunConfig& c, const json& inputs) {
    json meta{{"command", command}, {"config", c.echo()}, {"inputs", inputs}};
    write_file(dir / (command + ".meta.json"), [&](std::ostream& out) { out << meta.dump(2) << '\n'; });
}

std::vector<double> load_or_generate_series(const Options& o, const RunConfig& c) {
    if (o.series.empty()) {
        return generate_series(build_scenario(c.scenario)).samples;
    }
    std::ifstream in(o.series);
    if (!in) {
        throw std::runtime_error("cannot open series '" + o.series + "'");
    }
    return read_series_csv(in);
}

std::shared_ptr<const NarnnModel> load_optional_model(const Options& o, const RunConfig& c) {
    const bool wants = std::any_of(c.predictors.begin(), c.predictors.end(),
                                   [](const PredictorEntry& p) { return p.kind == "nar"; });
    if (!wants) {
        return nullptr;
    }
    if (o.model.empty()) {
        throw config_error("a 'nar' predictor is configured; pass --model");
    }
    return std::make_shared<const NarnnModel>(load_model(o.model));
}

std::size_t shared_first_step(const std::vector<PredictorKind>& kinds) {
    std::size_t first = 1;
    for (const auto& k : kinds) {
        first = std::max(first, warm_up(k));
    }
    return first;
}

int cmd_simulate(const Options& o) {
    const RunConfig c = resolve_config(o);
    const fs::path dir = output_dir(c);
    const InterferenceSeries s = generate_series(build_scenario(c.scenario));
    write_file(dir / "series.csv", [&](std::ostream& out) { write_series_csv(out, s); });
    write_file(dir / "desired_gain.csv", [&](std::ostream& out) { write_desired_gain_csv(out, s); });
    json scen{{"desired_gain_mean", s.scenario.desired_gain_mean},
              {"interferer_gain_mean", s.scenario.interferer_gain_mean}};
    write_meta(dir, "simulate", c, {{"scenario_draw", scen}});
    std::cout << "wrote " << s.size() << " samples to " << (dir / "series.csv").string() << '\n';
    return 0;
}

int cmd_train(const Options& o) {
    const RunConfig c = resolve_config(o);
    const fs::path dir = output_dir(c);
    const std::vector<double> series = load_or_generate_series(o, c);
    const TrainedNarnn t = train_narnn(series, c.train_setup());

    const fs::path model_path = o.model.empty() ? dir / "model.bin" : fs::path(o.model);
    save_model(t.model, model_path.string());
    write_file(dir / "train_history.csv", [&](std::ostream& out) { write_history_csv(out, t.history); });
    write_file(dir / "test_predictions.csv", [&](std::ostream& out) { write_test_predictions_csv(out, t); });
    write_meta(dir, "train", c, {{"series", o.series.empty() ? "generated" : o.series}, {"model", model_path.string()}});

    std::cout << "epochs " << t.history.epochs.size() << " (" << t.history.accepted_steps() << " accepted), stop "
              << to_string(t.history.stop) << '\n'
              << "train_mse " << csv::format(t.train_mse) << '\n'
              << "test_mse " << csv::format(t.test_mse) << '\n'
              << "test_mape " << csv::format(t.test_mape) << '\n'
              << "model " << model_path.string() << '\n';
    return 0;
}

int cmd_evaluate(const Options& o) {
    const RunConfig c = resolve_config(o);
    const fs::path dir = output_dir(c);
    const auto model = load_optional_model(o, c);
    const auto kinds = make_predictors(c, model);

    // held-out realization on its own sub-seed
    Rng rng = make_rng(c.seed, "evaluate");
    const InterferenceSeries s = generate_series(build_scenario(c.scenario), c.evaluate_steps, rng);
    const std::size_t first = shared_first_step(kinds);
    if (first >= s.size()) {
        throw config_error("evaluate.steps must exceed the largest predictor warm-up (" + std::to_string(first) + ")");
    }
    const RequestTemplate req{c.scenario.payload_bits, c.scenario.target_bler};

    std::ofstream records(dir / "evaluate_records.csv", std::ios::binary);
    if (!records) {
        throw std::runtime_error("cannot write '" + (dir / "evaluate_records.csv").string() + "'");
    }
    std::vector<std::pair<std::string, EpisodeStats>> stats;
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        const auto recs = run_episode(s, kinds[i], req, first, c.sweep.rounding);
        std::ostringstream body;
        write_records_csv(body, recs, predictor_id(kinds[i]));
        std::string text = body.str();
        if (i > 0) {
            text.erase(0, text.find('\n') + 1);  // one header for the whole file
        }
        records << text;
        stats.emplace_back(predictor_id(kinds[i]), summarize(recs));
    }
    write_file(dir / "evaluate_report.csv", [&](std::ostream& out) {
        csv::write_header(out, {"predictor", "eps_target", "mean_outage", "mean_ru", "steps", "infeasible"});
        for (const auto& [id, st] : stats) {
            (csv::Row() << std::string_view(id) << c.scenario.target_bler << st.mean_outage() << st.mean_ru()
                        << st.steps << st.infeasible)
                .write(out);
        }
    });
    write_meta(dir, "evaluate", c, {{"model", o.model}});
    for (const auto& [id, st] : stats) {
        std::cout << id << " outage " << csv::format(st.mean_outage()) << " ru " << csv::format(st.mean_ru()) << '\n';
    }
    return 0;
}

int cmd_sweep(const Options& o) {
    const RunConfig c = resolve_config(o);
    const fs::path dir = output_dir(c);
    const auto model = load_optional_model(o, c);
    const auto kinds = make_predictors(c, model);
    const EvalReport report = sweep_targets(build_scenario(c.scenario), kinds, c.sweep);

    write_file(dir / "sweep_report.csv", [&](std::ostream& out) { write_report_csv(out, report); });
    write_file(dir / "fig_ru_vs_target.csv",
               [&](std::ostream& out) { write_plot_data(out, report, PlotMetric::resource_usage); });
    write_file(dir / "fig_outage_vs_target.csv",
               [&](std::ostream& out) { write_plot_data(out, report, PlotMetric::outage); });
    write_meta(dir, "sweep", c, {{"model", o.model}});
    for (const auto& r : report.rows) {
        if (r.flagged) {
            std::cerr << "note: " << r.predictor << " at eps " << csv::format(r.eps_target) << " has only " << r.steps
                      << " steps; outage below 100/steps is not resolvable\n";
        }
    }
    std::cout << "wrote " << report.rows.size() << " rows to " << (dir / "sweep_report.csv").string() << '\n';
    return 0;
}

int cmd_calibrate(const Options& o) {
    const RunConfig c = resolve_config(o);
    const fs::path dir = output_dir(c);
    CalibrationMode mode;
    try {
        mode = parse_calibration_mode(o.mode);
    } catch (const std::invalid_argument& e) {
        throw config_error(e.what());
    }
    if (o.model.empty()) {
        throw config_error("calibrate needs --model");
    }
    const auto model = std::make_shared<const NarnnModel>(load_model(o.model));
    QuantileSpec baseline;
    for (const auto& p : c.predictors) {
        if (p.kind == "quantile") {
            baseline.window = p.window;
        }
    }
    const std::size_t first = std::max(baseline.window, model->topology.n_delays);
    const EvaluationBed bed(build_scenario(c.scenario), c.sweep, first);
    const auto points = calibrate_alpha(bed, model, mode, baseline);

    const std::string stem = "calibration_" + to_string(mode);
    write_file(dir / (stem + ".csv"), [&](std::ostream& out) { write_calibration_csv(out, points); });
    write_meta(dir, stem, c, {{"model", o.model}, {"mode", to_string(mode)}});
    for (const auto& p : points) {
        std::cout << "eps " << csv::format(p.eps_target) << " alpha* " << csv::format(p.alpha) << " outage nar "
                  << csv::format(p.nar_outage) << " quantile " << csv::format(p.baseline_outage) << " ru nar "
                  << csv::format(p.nar_ru) << " quantile " << csv::format(p.baseline_ru) << '\n';
        if (!p.diagnostic.empty()) {
            std::cerr << "eps " << csv::format(p.eps_target) << ": " << p.diagnostic << '\n';
        }
    }
    return 0;
}

int cmd_table(const Options& o) {
    const RunConfig c = resolve_config(o);
    const fs::path dir = output_dir(c);
    const std::vector<double> series = load_or_generate_series(o, c);
    const auto cells = accuracy_experiment(series, c.accuracy_config());
    write_file(dir / "table1.csv", [&](std::ostream& out) { write_accuracy_csv(out, cells); });
    write_file(dir / "table1_grid.csv", [&](std::ostream& out) { write_accuracy_grid(out, cells); });
    write_meta(dir, "table", c, {{"series", o.series.empty() ? "generated" : o.series}});
    write_accuracy_grid(std::cout, cells);
    int failed = 0;
    for (const auto& cell : cells) {
        if (!cell.error.empty()) {
            std::cerr << cell.sweep << " " << to_string(cell.activation) << " h=" << cell.n_hidden
                      << " n=" << cell.n_delays << ": " << cell.error << '\n';
            ++failed;
        }
    }
    return failed ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interference prediction and resource allocation experiments"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "override the top-level seed");
        sub->add_option("--out", o.out, "override the output directory");
        sub->add_option("--threads", o.threads, "worker cap; results do not depend on it")
            ->check(CLI::PositiveNumber);
        sub->add_option("--set", o.sets, "override a config field, e.g. trainer.max_epochs=50");
    };

    std::function<int()> run;
    auto* sim = app.add_subcommand("simulate", "generate an interference series");
    common(sim);
    sim->callback([&] { run = [&] { return cmd_simulate(o); }; });

    auto* tr = app.add_subcommand("train", "train the NARNN predictor");
    common(tr);
    tr->add_option("--series", o.series, "series CSV (default: generate from the config)");
    tr->add_option("--model", o.model, "model output path (.txt for text format; default OUT/model.bin)");
    tr->callback([&] { run = [&] { return cmd_train(o); }; });

    auto* ev = app.add_subcommand("evaluate", "single-target evaluation on a held-out realization");
    common(ev);
    ev->add_option("--model", o.model, "trained model file")->check(CLI::ExistingFile);
    ev->callback([&] { run = [&] { return cmd_evaluate(o); }; });

    auto* sw = app.add_subcommand("sweep", "resource usage and outage over the target BLER list");
    common(sw);
    sw->add_option("--model", o.model, "trained model file")->check(CLI::ExistingFile);
    sw->callback([&] { run = [&] { return cmd_sweep(o); }; });

    auto* ca = app.add_subcommand("calibrate", "fit alpha against the quantile benchmark");
    common(ca);
    ca->add_option("--model", o.model, "trained model file")->required()->check(CLI::ExistingFile);
    ca->add_option("--mode", o.mode, "match-resource-usage or match-outage")
        ->check(CLI::IsMember({"match-resource-usage", "match-outage"}));
    ca->callback([&] { run = [&] { return cmd_calibrate(o); }; });

    auto* tb = app.add_subcommand("table", "accuracy over neuron counts, activations and delay taps");
    common(tb);
    tb->add_option("--series", o.series, "series CSV (default: generate from the config)");
    tb->callback([&] { run = [&] { return cmd_table(o); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        return run();
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
