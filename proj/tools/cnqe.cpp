// Command-line front end: train | baseline | stats | fourier-check | inspect.
// All numeric results land in CSV/JSON artifacts; outputs are byte-identical
// for identical configurations and seeds.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "cnqe/config.hpp"
#include "cnqe/fourier.hpp"
#include "cnqe/metrics.hpp"

namespace fs = std::filesystem;
using namespace cnqe;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

void emit_error(int code, const std::string& kind, const std::string& message) {
    const json err{{"error", {{"code", code}, {"kind", kind}, {"message", message}}}};
    std::cerr << err.dump() << std::endl;
}

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::optional<uint64_t> seed;
    std::optional<int> threads;
};

config::ExperimentConfig load_config(const CommonFlags& flags) {
    auto cfg = config::ExperimentConfig::load(flags.config_path);
    if (!flags.out_dir.empty()) cfg.output_dir = flags.out_dir;
    if (flags.seed) cfg.training.seed = *flags.seed;
    if (flags.threads) cfg.training.threads = *flags.threads;
    cfg.training.validate();
    return cfg;
}

std::vector<train::HistoryEntry> collect_history(const train::ExperimentResult& result) {
    std::vector<train::HistoryEntry> all;
    for (const auto& run : result.cnqe_runs)
        all.insert(all.end(), run.history.begin(), run.history.end());
    for (const auto& run : result.qcnn_runs)
        all.insert(all.end(), run.history.begin(), run.history.end());
    return all;
}

int cmd_train(const CommonFlags& flags) {
    const auto cfg = load_config(flags);
    const auto dataset = cfg.dataset.load();
    const auto result = train::run_experiment(cfg.training, dataset);

    fs::create_directories(cfg.output_dir);
    config::write_json(cfg.output_dir + "/checkpoint.json", config::checkpoint_json(cfg, result));
    config::write_history_csv(cfg.output_dir + "/history.csv", collect_history(result));
    config::write_json(cfg.output_dir + "/summary.json", config::summary_json(cfg, result, dataset));

    std::printf("median_test_trace_distance=%.6f mean_test_accuracy=%.4f (out: %s)\n",
                result.median_test_trace_distance, result.mean_test_accuracy,
                cfg.output_dir.c_str());
    return kExitOk;
}

int cmd_baseline(const CommonFlags& flags) {
    const auto cfg = load_config(flags);
    if (!cfg.baseline) throw config::ConfigError("baseline command needs a baseline block");
    const auto dataset = cfg.dataset.load();
    fs::create_directories(cfg.output_dir);

    std::vector<train::HistoryEntry> history;
    json summary{{"schema_version", 1}, {"config", cfg.echo()},
                 {"dataset_checksum", data::split_checksum(dataset)},
                 {"train_size", dataset.train.size()}, {"test_size", dataset.test.size()}};

    if (cfg.baseline->kind == "head") {
        // Keep the trained embedding, swap the quantum classifier for a head.
        const auto cnqe_runs = train::cnqe_train(cfg.training, dataset);
        const auto& median = train::select_median_run(cnqe_runs);
        for (const auto& run : cnqe_runs)
            history.insert(history.end(), run.history.begin(), run.history.end());

        baselines::HeadConfig head_cfg;
        head_cfg.kind = cfg.baseline->head;
        head_cfg.epochs = cfg.baseline->epochs;
        head_cfg.batch = cfg.baseline->batch;
        head_cfg.learning_rate = cfg.training.learning_rate;

        json accs = json::array();
        double mean = 0.0;
        size_t params = 0;
        for (int r = 0; r < cfg.training.n_runs; ++r) {
            const auto run =
                baselines::train_head(cfg.training, head_cfg, dataset, median.interface_weights, r);
            history.insert(history.end(), run.history.begin(), run.history.end());
            accs.push_back(run.final_test_accuracy);
            mean += run.final_test_accuracy;
            params = run.param_count;
        }
        mean /= cfg.training.n_runs;
        double var = 0.0;
        for (const auto& a : accs) {
            const double d = double(a) - mean;
            var += d * d;
        }
        summary["baseline_kind"] = "head";
        summary["head"] = nn::to_string(cfg.baseline->head);
        summary["head_param_count"] = params;
        summary["median_run_id"] = median.run_id;
        summary["median_test_trace_distance"] = median.final_test_trace_distance;
        summary["accuracy_per_run"] = accs;
        summary["mean_test_accuracy"] = mean;
        summary["std_test_accuracy"] = std::sqrt(var / cfg.training.n_runs);
    } else {
        // Autoencoder compression followed by the standard QCNN stage.
        baselines::AutoencoderConfig ae_cfg;
        ae_cfg.iterations = cfg.baseline->iterations;
        ae_cfg.batch = cfg.baseline->batch;
        ae_cfg.learning_rate = cfg.training.learning_rate;
        const auto ae_run = baselines::train_autoencoder(cfg.training, ae_cfg, dataset, 0);
        history.insert(history.end(), ae_run.history.begin(), ae_run.history.end());

        json accs = json::array();
        double mean = 0.0;
        double td = 0.0;
        for (int r = 0; r < cfg.training.n_runs; ++r) {
            const auto run = train::qcnn_train(cfg.training, dataset, ae_run.encoder_weights, r);
            history.insert(history.end(), run.history.begin(), run.history.end());
            accs.push_back(run.final_test_accuracy);
            mean += run.final_test_accuracy;
            td = run.final_test_trace_distance;
        }
        mean /= cfg.training.n_runs;
        double var = 0.0;
        for (const auto& a : accs) {
            const double d = double(a) - mean;
            var += d * d;
        }
        summary["baseline_kind"] = "autoencoder";
        summary["latent_dim"] =
            nn::InterfaceModel(cfg.training.interface, cfg.training.p_unit()).out_dim();
        summary["autoencoder_final_mse"] = ae_run.final_mse;
        summary["median_test_trace_distance"] = td;
        summary["accuracy_per_run"] = accs;
        summary["mean_test_accuracy"] = mean;
        summary["std_test_accuracy"] = std::sqrt(var / cfg.training.n_runs);
    }

    config::write_history_csv(cfg.output_dir + "/history.csv", history);
    config::write_json(cfg.output_dir + "/summary.json", summary);
    std::printf("baseline mean_test_accuracy=%.4f (out: %s)\n",
                summary["mean_test_accuracy"].get<double>(), cfg.output_dir.c_str());
    return kExitOk;
}

// Final test trace distance per run from one history file.
std::vector<double> final_trace_distances(const std::string& path) {
    const auto rows = config::read_history_csv(path);
    std::map<int, std::pair<int, double>> last;  // run -> (step, value)
    for (const auto& r : rows) {
        if (r.phase != "cnqe" || r.metric != "test_trace_distance") continue;
        auto& slot = last[r.run_id];
        if (r.step >= slot.first) slot = {r.step, r.value};
    }
    std::vector<double> values;
    for (const auto& [run, sv] : last) values.push_back(sv.second);
    if (values.empty())
        throw std::runtime_error("no cnqe test_trace_distance rows in " + path);
    return values;
}

int cmd_stats(const std::vector<std::string>& inputs, const std::string& out_path) {
    if (inputs.size() < 2) throw config::ConfigError("stats needs at least two history CSVs");
    std::vector<std::pair<std::string, std::vector<double>>> groups;
    for (const auto& path : inputs) {
        if (!fs::exists(path)) throw config::DataError("missing input file " + path);
        groups.emplace_back(fs::path(path).stem().string(), final_trace_distances(path));
    }

    struct Row {
        std::string name;
        double p_raw;
    };
    std::vector<Row> rows;
    for (size_t i = 0; i < groups.size(); ++i)
        for (size_t j = i + 1; j < groups.size(); ++j) {
            const auto r = metrics::welch_t_test(groups[i].second, groups[j].second);
            rows.push_back({groups[i].first + " vs " + groups[j].first, r.p});
        }
    std::vector<double> raw;
    for (const auto& r : rows) raw.push_back(r.p_raw);
    const auto adjusted = metrics::bonferroni(raw, int(rows.size()));

    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << "comparison,p_raw,p_adjusted\n";
    char buf[64];
    for (size_t i = 0; i < rows.size(); ++i) {
        out << rows[i].name << ',';
        std::snprintf(buf, sizeof(buf), "%.10g", rows[i].p_raw);
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.10g", adjusted[i]);
        out << buf << '\n';
    }
    std::printf("wrote %zu pairwise tests to %s\n", rows.size(), out_path.c_str());
    return kExitOk;
}

int cmd_fourier_check(const std::string& layout_name, int n_qubits, int amplitude, int n_inputs,
                      uint64_t seed, const std::string& out_path) {
    fourier::EncodingLayout layout;
    if (layout_name == "h-rz-h") {
        layout.n_qubits = 1;
        layout.input_dim = 1;
        layout.interleavers = {qsim::gates::hadamard(), qsim::gates::hadamard()};
        layout.layers = {fourier::EncodingLayout::rz_layer({0}, 1)};
    } else {
        const auto kind = embed::feature_map_from_string(layout_name);
        layout = fourier::layout_of_embedding(kind, n_qubits);
    }

    const auto spectrum = fourier::merge_spectrum(fourier::enumerate_spectrum(layout, amplitude));
    rng::Stream stream = rng::Stream(seed).fork("fourier_inputs");
    double max_err = 0.0;
    for (int trial = 0; trial < n_inputs; ++trial) {
        std::vector<double> x(layout.input_dim);
        for (auto& v : x) v = stream.uniform(-M_PI, M_PI);
        const auto direct = fourier::evaluate_layout(layout, x);
        const cdouble rec = fourier::reconstruct_amplitude(spectrum, x);
        max_err = std::max(max_err, std::abs(rec - direct.amps[amplitude]));
    }

    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << "frequency,abs_coeff,max_reconstruction_error\n";
    char buf[64];
    for (const auto& e : spectrum) {
        std::string freq;
        for (size_t j = 0; j < e.h.size(); ++j) {
            std::snprintf(buf, sizeof(buf), "%g", e.h[j]);
            freq += buf;
            if (j + 1 < e.h.size()) freq += ';';
        }
        out << '"' << freq << "\",";
        std::snprintf(buf, sizeof(buf), "%.10g", std::abs(e.c));
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.3e", max_err);
        out << buf << '\n';
    }
    std::printf("layout=%s entries=%zu max_reconstruction_error=%.3e (out: %s)\n",
                layout_name.c_str(), spectrum.size(), max_err, out_path.c_str());
    return kExitOk;
}

int cmd_inspect(const CommonFlags& flags, const std::string& checkpoint_path, bool dataset_manifest) {
    json report;
    if (!checkpoint_path.empty()) {
        std::ifstream in(checkpoint_path);
        if (!in) throw config::DataError("cannot open checkpoint " + checkpoint_path);
        json ckpt;
        try {
            in >> ckpt;
        } catch (const json::exception& e) {
            throw config::DataError(std::string("checkpoint is not valid JSON: ") + e.what());
        }
        report["checkpoint"] = json{{"kind", ckpt.value("kind", "?")},
                                    {"interface", ckpt.value("interface", "?")},
                                    {"feature_map", ckpt.value("feature_map", "?")},
                                    {"n_qubits", ckpt.value("n_qubits", 0)},
                                    {"weight_count", ckpt.contains("interface_weights")
                                                         ? ckpt["interface_weights"].size()
                                                         : 0}};
    }
    if (!flags.config_path.empty()) {
        const auto cfg = load_config(flags);
        report["config"] = cfg.echo();
        nn::InterfaceModel model(cfg.training.interface, cfg.training.p_unit(), data::kChannels,
                                 cfg.training.n_qubits);
        const auto [cnn_count, fc_count] = model.count_params();
        report["interface_params"] = json{{"total", model.param_count()},
                                          {"cnn", cnn_count},
                                          {"fc", fc_count},
                                          {"out_dim", model.out_dim()}};
        report["embedding_params"] =
            embed::unit_param_count(cfg.training.feature_map, cfg.training.n_qubits);
        report["qcnn_params"] = ansatz::QcnnSpec::default_for(cfg.training.n_qubits).total_params;
        if (dataset_manifest) {
            const auto ds = cfg.dataset.load();
            json records = json::array();
            char buf[32];
            for (const auto& r : ds.train) {
                std::snprintf(buf, sizeof(buf), "%016llx",
                              static_cast<unsigned long long>(data::record_checksum(r)));
                records.push_back(buf);
            }
            for (const auto& r : ds.test) {
                std::snprintf(buf, sizeof(buf), "%016llx",
                              static_cast<unsigned long long>(data::record_checksum(r)));
                records.push_back(buf);
            }
            report["dataset_manifest"] = json{{"train_size", ds.train.size()},
                                              {"test_size", ds.test.size()},
                                              {"class_names", {ds.class_names[0], ds.class_names[1]}},
                                              {"split_checksum", data::split_checksum(ds)},
                                              {"record_checksums", records}};
        }
    }
    if (report.empty()) throw config::ConfigError("inspect needs --config and/or --checkpoint");
    std::cout << report.dump(2) << std::endl;
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid classical-quantum embedding laboratory"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string stats_out = "pairwise_tests.csv";
    std::vector<std::string> stats_inputs;
    std::string fourier_layout = "h-rz-h";
    int fourier_qubits = 2;
    int fourier_amplitude = 0;
    int fourier_inputs = 50;
    uint64_t fourier_seed = 0;
    std::string fourier_out = "spectrum.csv";
    std::string inspect_checkpoint;
    bool inspect_dataset = false;

    auto add_common = [&](CLI::App* cmd, bool config_required) {
        cmd->add_option("--config", flags.config_path, "experiment configuration JSON")
            ->required(config_required);
        cmd->add_option("--out", flags.out_dir, "output directory override");
        cmd->add_option("--seed", flags.seed, "seed override");
        cmd->add_option("--threads", flags.threads, "max parallel runs");
    };

    auto* train_cmd = app.add_subcommand("train", "run CNQE + QCNN training");
    add_common(train_cmd, true);

    auto* baseline_cmd = app.add_subcommand("baseline", "run a classical baseline pipeline");
    add_common(baseline_cmd, true);

    auto* stats_cmd = app.add_subcommand("stats", "pairwise Welch tests over run groups");
    stats_cmd->add_option("inputs", stats_inputs, "history CSV files (one group each)")->required();
    stats_cmd->add_option("--out", stats_out, "output CSV path");

    auto* fourier_cmd = app.add_subcommand("fourier-check", "spectrum vs direct simulation");
    fourier_cmd->add_option("--layout", fourier_layout,
                            "h-rz-h or a decomposable feature map name (zz_unit, zz, nc, ...)");
    fourier_cmd->add_option("--qubits", fourier_qubits, "qubit count for feature-map layouts");
    fourier_cmd->add_option("--amplitude", fourier_amplitude, "amplitude index to expand");
    fourier_cmd->add_option("--inputs", fourier_inputs, "number of random verification inputs");
    fourier_cmd->add_option("--seed", fourier_seed, "input sampling seed");
    fourier_cmd->add_option("--out", fourier_out, "output CSV path");

    auto* inspect_cmd = app.add_subcommand("inspect", "report config/model/dataset facts");
    add_common(inspect_cmd, false);
    inspect_cmd->add_option("--checkpoint", inspect_checkpoint, "checkpoint JSON to describe");
    inspect_cmd->add_flag("--dataset", inspect_dataset, "include the dataset manifest");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed()) return cmd_train(flags);
        if (baseline_cmd->parsed()) return cmd_baseline(flags);
        if (stats_cmd->parsed()) return cmd_stats(stats_inputs, stats_out);
        if (fourier_cmd->parsed())
            return cmd_fourier_check(fourier_layout, fourier_qubits, fourier_amplitude,
                                     fourier_inputs, fourier_seed, fourier_out);
        if (inspect_cmd->parsed()) return cmd_inspect(flags, inspect_checkpoint, inspect_dataset);
    } catch (const config::ConfigError& e) {
        emit_error(kExitConfig, "config", e.what());
        return kExitConfig;
    } catch (const config::DataError& e) {
        emit_error(kExitData, "data", e.what());
        return kExitData;
    } catch (const std::invalid_argument& e) {
        emit_error(kExitConfig, "config", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        emit_error(kExitNumeric, "numeric", e.what());
        return kExitNumeric;
    }
    return kExitOk;
}
