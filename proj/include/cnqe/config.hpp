// Experiment configuration (strict JSON schema) and result artifacts:
// checkpoint JSON, history CSV, and summary JSON. Artifacts carry no
// timestamps so identical configurations reproduce byte-identical outputs.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cnqe/baselines.hpp"
#include "cnqe/data.hpp"
#include "cnqe/training.hpp"

namespace cnqe::config {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                                const std::string& where) {
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key)) throw ConfigError("unknown key \"" + key + "\" in " + where);
}

template <typename T>
T require(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError("missing key \"" + key + "\" in " + where);
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("key \"" + key + "\" in " + where + " has the wrong type");
    }
}

template <typename T>
T optional_or(const json& obj, const std::string& key, T fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("key \"" + key + "\" in " + where + " has the wrong type");
    }
}

}  // namespace detail

struct DatasetConfig {
    std::string source;  // "blobs" | "cifar10" | "raw"
    std::string path;
    int class_a = 6, class_b = 8;
    int n_per_class = 400;
    double margin_sigma = 10.0;
    uint64_t seed = 0;
    int train_per_class = 400;
    int test_per_class = 100;

    static DatasetConfig parse(const json& j) {
        DatasetConfig d;
        detail::reject_unknown_keys(j,
                                    {"source", "path", "class_a", "class_b", "n_per_class",
                                     "margin_sigma", "seed", "train_per_class", "test_per_class"},
                                    "dataset");
        d.source = detail::require<std::string>(j, "source", "dataset");
        if (d.source == "blobs") {
            d.n_per_class = detail::optional_or(j, "n_per_class", 400, "dataset");
            d.margin_sigma = detail::optional_or(j, "margin_sigma", 10.0, "dataset");
            d.seed = detail::optional_or<uint64_t>(j, "seed", 0, "dataset");
        } else if (d.source == "cifar10") {
            d.path = detail::optional_or<std::string>(j, "path", "", "dataset");
            d.class_a = detail::require<int>(j, "class_a", "dataset");
            d.class_b = detail::require<int>(j, "class_b", "dataset");
            d.seed = detail::optional_or<uint64_t>(j, "seed", 0, "dataset");
            d.train_per_class = detail::optional_or(j, "train_per_class", 400, "dataset");
            d.test_per_class = detail::optional_or(j, "test_per_class", 100, "dataset");
        } else if (d.source == "raw") {
            d.path = detail::require<std::string>(j, "path", "dataset");
        } else {
            throw ConfigError("dataset source must be blobs, cifar10, or raw");
        }
        return d;
    }

    data::DatasetSplit load() const {
        try {
            if (source == "blobs") return data::synthetic_blobs(n_per_class, margin_sigma, seed);
            if (source == "raw") return data::load_raw_tensor(path);
            std::string dir = path;
            if (dir.empty()) {
                const char* env = std::getenv("CNQE_DATA_DIR");
                if (!env) throw DataError("cifar10 dataset needs a path or CNQE_DATA_DIR");
                dir = env;
            }
            return data::load_cifar10_pair(dir, class_a, class_b, seed, train_per_class,
                                           test_per_class);
        } catch (const DataError&) {
            throw;
        } catch (const std::exception& e) {
            throw DataError(e.what());
        }
    }
};

struct BaselineConfig {
    std::string kind;  // "head" | "autoencoder"
    nn::HeadKind head = nn::HeadKind::Linear;
    int epochs = 50;
    int batch = 25;
    int iterations = 2000;

    static BaselineConfig parse(const json& j) {
        BaselineConfig b;
        detail::reject_unknown_keys(j, {"kind", "head", "epochs", "batch", "iterations"}, "baseline");
        b.kind = detail::require<std::string>(j, "kind", "baseline");
        if (b.kind == "head") {
            b.head = nn::head_from_string(detail::require<std::string>(j, "head", "baseline"));
            b.epochs = detail::optional_or(j, "epochs", 50, "baseline");
            b.batch = detail::optional_or(j, "batch", 25, "baseline");
        } else if (b.kind == "autoencoder") {
            b.iterations = detail::optional_or(j, "iterations", 2000, "baseline");
            b.batch = detail::optional_or(j, "batch", 25, "baseline");
        } else {
            throw ConfigError("baseline kind must be head or autoencoder");
        }
        return b;
    }
};

inline noise::NoiseModel parse_noise(const json& j) {
    detail::reject_unknown_keys(j,
                                {"preset", "t1_us", "t2_us", "p1q", "p2q", "p_meas", "dur_1q_us",
                                 "dur_2q_us", "dur_meas_us"},
                                "noise");
    noise::NoiseModel m;
    if (j.contains("preset")) {
        const auto preset = detail::require<std::string>(j, "preset", "noise");
        if (preset != "vigo") throw ConfigError("unknown noise preset: " + preset);
        m = noise::NoiseModel::preset_vigo();
    } else {
        m.t1_us = detail::require<double>(j, "t1_us", "noise");
        m.t2_us = detail::require<double>(j, "t2_us", "noise");
        m.p1q = detail::require<double>(j, "p1q", "noise");
        m.p2q = detail::require<double>(j, "p2q", "noise");
        m.p_meas = detail::require<double>(j, "p_meas", "noise");
    }
    m.dur_1q_us = detail::optional_or(j, "dur_1q_us", m.dur_1q_us, "noise");
    m.dur_2q_us = detail::optional_or(j, "dur_2q_us", m.dur_2q_us, "noise");
    m.dur_meas_us = detail::optional_or(j, "dur_meas_us", m.dur_meas_us, "noise");
    try {
        m.check();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid noise model: ") + e.what());
    }
    return m;
}

inline json noise_to_json(const noise::NoiseModel& m) {
    return json{{"t1_us", m.t1_us},           {"t2_us", m.t2_us},
                {"p1q", m.p1q},               {"p2q", m.p2q},
                {"p_meas", m.p_meas},         {"dur_1q_us", m.dur_1q_us},
                {"dur_2q_us", m.dur_2q_us},   {"dur_meas_us", m.dur_meas_us}};
}

struct ExperimentConfig {
    train::TrainConfig training;
    DatasetConfig dataset;
    std::optional<BaselineConfig> baseline;
    std::string output_dir = "out";

    static ExperimentConfig parse(const json& j) {
        detail::reject_unknown_keys(
            j, {"schema_version", "seed", "interface", "feature_map", "loss", "n_qubits",
                "learning_rate", "cnqe_iterations", "cnqe_batch_pairs", "cnqe_eval_every",
                "qcnn_epochs", "qcnn_batch", "n_runs", "dataset", "noise", "baseline", "output_dir",
                "threads"},
            "config");
        const int version = detail::optional_or(j, "schema_version", 1, "config");
        if (version != 1) throw ConfigError("unsupported schema_version");

        ExperimentConfig c;
        auto& t = c.training;
        t.seed = detail::optional_or<uint64_t>(j, "seed", 0, "config");
        try {
            t.interface =
                nn::interface_from_string(detail::optional_or<std::string>(j, "interface", "ga", "config"));
            t.feature_map = embed::feature_map_from_string(
                detail::optional_or<std::string>(j, "feature_map", "zz_unit", "config"));
            t.loss_kind =
                losses::loss_from_string(detail::optional_or<std::string>(j, "loss", "fidelity", "config"));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        t.n_qubits = detail::optional_or(j, "n_qubits", 4, "config");
        t.learning_rate = detail::optional_or(j, "learning_rate", 0.01, "config");
        t.cnqe_iterations = detail::optional_or(j, "cnqe_iterations", 2000, "config");
        t.cnqe_batch_pairs = detail::optional_or(j, "cnqe_batch_pairs", 25, "config");
        t.cnqe_eval_every = detail::optional_or(j, "cnqe_eval_every", 50, "config");
        t.qcnn_epochs = detail::optional_or(j, "qcnn_epochs", 20, "config");
        t.qcnn_batch = detail::optional_or(j, "qcnn_batch", 5, "config");
        t.n_runs = detail::optional_or(j, "n_runs", 5, "config");
        t.threads = detail::optional_or(j, "threads", 1, "config");
        if (!j.contains("dataset")) throw ConfigError("missing dataset block");
        c.dataset = DatasetConfig::parse(j.at("dataset"));
        if (j.contains("noise")) t.noise_model = parse_noise(j.at("noise"));
        if (j.contains("baseline")) c.baseline = BaselineConfig::parse(j.at("baseline"));
        c.output_dir = detail::optional_or<std::string>(j, "output_dir", "out", "config");
        try {
            t.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        return c;
    }

    static ExperimentConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file " + path);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
        return parse(j);
    }

    json echo() const {
        json j{{"schema_version", 1},
               {"seed", training.seed},
               {"interface", nn::to_string(training.interface)},
               {"feature_map", embed::to_string(training.feature_map)},
               {"loss", losses::to_string(training.loss_kind)},
               {"n_qubits", training.n_qubits},
               {"learning_rate", training.learning_rate},
               {"cnqe_iterations", training.cnqe_iterations},
               {"cnqe_batch_pairs", training.cnqe_batch_pairs},
               {"cnqe_eval_every", training.cnqe_eval_every},
               {"qcnn_epochs", training.qcnn_epochs},
               {"qcnn_batch", training.qcnn_batch},
               {"n_runs", training.n_runs}};
        json d{{"source", dataset.source}};
        if (dataset.source == "blobs") {
            d["n_per_class"] = dataset.n_per_class;
            d["margin_sigma"] = dataset.margin_sigma;
            d["seed"] = dataset.seed;
        } else if (dataset.source == "cifar10") {
            d["path"] = dataset.path;
            d["class_a"] = dataset.class_a;
            d["class_b"] = dataset.class_b;
            d["seed"] = dataset.seed;
        } else {
            d["path"] = dataset.path;
        }
        j["dataset"] = d;
        if (training.noise_model) j["noise"] = noise_to_json(*training.noise_model);
        if (baseline) {
            json b{{"kind", baseline->kind}};
            if (baseline->kind == "head") {
                b["head"] = nn::to_string(baseline->head);
                b["epochs"] = baseline->epochs;
                b["batch"] = baseline->batch;
            } else {
                b["iterations"] = baseline->iterations;
                b["batch"] = baseline->batch;
            }
            j["baseline"] = b;
        }
        return j;
    }
};

// ---------------------------------------------------------------------------
// Artifacts.
// ---------------------------------------------------------------------------

inline void write_history_csv(const std::string& path,
                              const std::vector<train::HistoryEntry>& entries) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "phase,run_id,step,metric,value\n";
    char buf[64];
    for (const auto& e : entries) {
        std::snprintf(buf, sizeof(buf), "%.17g", e.value);
        out << e.phase << ',' << e.run_id << ',' << e.step << ',' << e.metric << ',' << buf << '\n';
    }
}

struct HistoryRow {
    std::string phase;
    int run_id;
    int step;
    std::string metric;
    double value;
};

inline std::vector<HistoryRow> read_history_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != "phase,run_id,step,metric,value")
        throw std::runtime_error("malformed history CSV header in " + path);
    std::vector<HistoryRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        HistoryRow r;
        size_t pos = 0;
        auto next = [&](bool last = false) {
            const size_t comma = last ? std::string::npos : line.find(',', pos);
            const std::string field =
                line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            pos = comma == std::string::npos ? line.size() : comma + 1;
            return field;
        };
        try {
            r.phase = next();
            r.run_id = std::stoi(next());
            r.step = std::stoi(next());
            r.metric = next();
            r.value = std::stod(next(true));
        } catch (const std::exception&) {
            throw std::runtime_error("malformed history CSV row in " + path + ": " + line);
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

inline json checkpoint_json(const ExperimentConfig& config, const train::ExperimentResult& result) {
    const ansatz::QcnnSpec spec = ansatz::QcnnSpec::default_for(config.training.n_qubits);
    json thetas = json::array();
    for (const auto& run : result.qcnn_runs) thetas.push_back(run.theta);
    return json{{"schema_version", 1},
                {"kind", "cnqe_checkpoint"},
                {"interface", nn::to_string(config.training.interface)},
                {"feature_map", embed::to_string(config.training.feature_map)},
                {"loss", losses::to_string(config.training.loss_kind)},
                {"n_qubits", config.training.n_qubits},
                {"p_unit", config.training.p_unit()},
                {"seed", config.training.seed},
                {"median_run_id", result.median_run_id},
                {"interface_weights", result.cnqe_runs[result.median_run_id].interface_weights},
                {"ansatz", json{{"layout", "qcnn_default"},
                                {"n_qubits", config.training.n_qubits},
                                {"total_params", spec.total_params},
                                {"readout_qubit", spec.readout_qubit},
                                {"theta_runs", thetas}}}};
}

inline json summary_json(const ExperimentConfig& config, const train::ExperimentResult& result,
                         const data::DatasetSplit& dataset) {
    json per_run_td = json::array(), per_run_acc = json::array();
    for (const auto& r : result.cnqe_runs) per_run_td.push_back(r.final_test_trace_distance);
    for (const auto& r : result.qcnn_runs) per_run_acc.push_back(r.final_test_accuracy);
    nn::InterfaceModel model(config.training.interface, config.training.p_unit(), data::kChannels,
                             config.training.n_qubits);
    const auto [cnn_count, fc_count] = model.count_params();
    return json{{"schema_version", 1},
                {"config", config.echo()},
                {"dataset_checksum", data::split_checksum(dataset)},
                {"train_size", dataset.train.size()},
                {"test_size", dataset.test.size()},
                {"trace_distance_per_run", per_run_td},
                {"median_run_id", result.median_run_id},
                {"median_test_trace_distance", result.median_test_trace_distance},
                {"accuracy_per_run", per_run_acc},
                {"mean_test_accuracy", result.mean_test_accuracy},
                {"std_test_accuracy", result.std_test_accuracy},
                {"interface_param_count", model.param_count()},
                {"interface_cnn_params", cnn_count},
                {"interface_fc_params", fc_count},
                {"qcnn_param_count", ansatz::QcnnSpec::default_for(config.training.n_qubits).total_params}};
}

inline void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

}  // namespace cnqe::config
