// Two-stage training: the classical interface network is optimized against a
// pair-similarity risk to spread the class ensembles apart, then the QCNN
// parameters are trained on the frozen embedding with an MSE readout loss.
// Runs are repeated over independent seeds and the median run (by final test
// trace distance) selects the embedding used for classifier training.

#pragma once

#include <atomic>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "cnqe/ansatz.hpp"
#include "cnqe/data.hpp"
#include "cnqe/embeddings.hpp"
#include "cnqe/losses.hpp"
#include "cnqe/metrics.hpp"
#include "cnqe/nn.hpp"
#include "cnqe/noise.hpp"
#include "cnqe/rng.hpp"

namespace cnqe::train {

struct TrainConfig {
    double learning_rate = 0.01;
    int cnqe_batch_pairs = 25;
    int cnqe_iterations = 2000;
    int cnqe_eval_every = 50;
    int qcnn_batch = 5;
    int qcnn_epochs = 20;
    int n_runs = 5;
    uint64_t seed = 0;
    losses::LossKind loss_kind = losses::LossKind::Fidelity;
    embed::FeatureMapKind feature_map = embed::FeatureMapKind::ZzUnit;
    nn::InterfaceKind interface = nn::InterfaceKind::GA;
    int n_qubits = 4;
    std::optional<noise::NoiseModel> noise_model;
    int threads = 1;

    void validate() const {
        if (learning_rate <= 0 || cnqe_batch_pairs <= 0 || cnqe_iterations < 0 || qcnn_batch <= 0 ||
            qcnn_epochs < 0 || n_runs <= 0 || cnqe_eval_every <= 0 || threads <= 0)
            throw std::invalid_argument("training configuration values must be positive");
        if (n_qubits < 2) throw std::invalid_argument("n_qubits must be at least 2");
        const bool stacked = embed::is_stack(feature_map);
        if (interface == nn::InterfaceKind::GA && stacked)
            throw std::invalid_argument("g_a pairs with unit feature maps (one embedding layer)");
        if (interface != nn::InterfaceKind::GA && !stacked)
            throw std::invalid_argument("g_b and g_c pair with stacked feature maps (three layers)");
        if (noise_model) {
            noise_model->check();
            if (loss_kind != losses::LossKind::Fidelity)
                throw std::invalid_argument("noisy training supports the fidelity loss only");
            if (n_qubits > 8) throw std::invalid_argument("noisy density simulation guard: n_qubits <= 8");
        }
    }

    // Features consumed by one embedding layer; g_b/g_c emit three blocks.
    int p_unit() const {
        const bool stacked = embed::is_stack(feature_map);
        const int total = embed::unit_param_count(feature_map, n_qubits);
        return stacked ? total / 3 : total;
    }

    embed::EmbeddingSpec embedding_spec() const { return {feature_map, n_qubits}; }

    bool noisy() const { return noise_model && !noise_model->is_noiseless(); }
};

struct HistoryEntry {
    std::string phase;  // "cnqe" or "qcnn"
    int run_id = 0;
    int step = 0;
    std::string metric;
    double value = 0.0;
};

struct TrainRun {
    int run_id = 0;
    uint64_t seed = 0;
    std::vector<double> interface_weights;
    std::vector<double> theta;
    std::vector<HistoryEntry> history;
    int selected_iteration = 0;
    double final_test_trace_distance = 0.0;
    double final_train_trace_distance = 0.0;
    double final_test_accuracy = 0.0;
    double final_train_accuracy = 0.0;
    // Expected accuracy of a single readout shot, mean of (y ? p : 1 - p).
    // Linear in the embedded states, so the Helstrom bound applies to it.
    double final_train_singleshot_accuracy = 0.0;
    double final_loss = 0.0;
};

// ---------------------------------------------------------------------------
// Adam.
// ---------------------------------------------------------------------------

struct AdamState {
    std::vector<double> m, v;
    int step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    explicit AdamState(size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

inline void adam_step(AdamState& state, std::vector<double>& params,
                      const std::vector<double>& grads, double lr) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw std::invalid_argument("adam_step length mismatch");
    ++state.step;
    const double bc1 = 1.0 - std::pow(state.beta1, state.step);
    const double bc2 = 1.0 - std::pow(state.beta2, state.step);
    for (size_t i = 0; i < params.size(); ++i) {
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
}

// ---------------------------------------------------------------------------
// Pair sampling.
// ---------------------------------------------------------------------------

struct IndexPair {
    int i = 0;
    int j = 0;
    int delta = 0;  // 1 iff labels equal
};

inline std::vector<IndexPair> sample_pairs(const std::vector<int>& labels, int k, rng::Stream& stream) {
    if (labels.size() < 2) throw std::invalid_argument("pair sampling needs at least 2 samples");
    if (k < 1) throw std::invalid_argument("pair count must be positive");
    std::vector<IndexPair> pairs(k);
    const uint64_t n = labels.size();
    for (auto& p : pairs) {
        p.i = int(stream.below(n));
        p.j = int(stream.below(n - 1));
        if (p.j >= p.i) ++p.j;  // uniform over ordered pairs with i != j
        p.delta = labels[p.i] == labels[p.j] ? 1 : 0;
    }
    return pairs;
}

// ---------------------------------------------------------------------------
// Embedding evaluation helpers.
// ---------------------------------------------------------------------------

namespace detail {

inline metrics::EnsemblePair ensemble_of(const TrainConfig& config, const nn::InterfaceModel& model,
                                         const std::vector<std::vector<double>>& images,
                                         const std::vector<int>& labels) {
    const auto spec = config.embedding_spec();
    nn::InterfaceWorkspace ws;
    metrics::EnsemblePair pair;
    if (!config.noisy()) {
        std::vector<qsim::StateVector> plus, minus;
        for (size_t i = 0; i < images.size(); ++i) {
            auto s = embed::embed_state(spec, model.forward(images[i], ws));
            (labels[i] == 1 ? plus : minus).push_back(std::move(s));
        }
        pair.rho_plus = metrics::mean_state(plus);
        pair.rho_minus = metrics::mean_state(minus);
    } else {
        qsim::DensityMatrix acc_plus(config.n_qubits), acc_minus(config.n_qubits);
        acc_plus.entries = CMatrix(acc_plus.dim(), acc_plus.dim());
        acc_minus.entries = CMatrix(acc_minus.dim(), acc_minus.dim());
        size_t n_plus = 0, n_minus = 0;
        for (size_t i = 0; i < images.size(); ++i) {
            const auto circuit = embed::build(spec, model.forward(images[i], ws));
            const auto rho = noise::noisy_execute(circuit, *config.noise_model, config.n_qubits);
            if (labels[i] == 1) {
                acc_plus.entries += rho.entries;
                ++n_plus;
            } else {
                acc_minus.entries += rho.entries;
                ++n_minus;
            }
        }
        if (n_plus == 0 || n_minus == 0) throw std::invalid_argument("a class has no members");
        acc_plus.entries *= cdouble(1.0 / double(n_plus), 0.0);
        acc_minus.entries *= cdouble(1.0 / double(n_minus), 0.0);
        pair.rho_plus = std::move(acc_plus);
        pair.rho_minus = std::move(acc_minus);
    }
    return pair;
}

inline double ensemble_trace_distance(const TrainConfig& config, const nn::InterfaceModel& model,
                                      const std::vector<std::vector<double>>& images,
                                      const std::vector<int>& labels) {
    return metrics::trace_distance(ensemble_of(config, model, images, labels));
}

// Similarity value and feature gradients for one pair under the configured
// loss, including the noisy fidelity variant (composed circuit, |0..0>
// projector readout).
inline losses::SimilarityGrad pair_similarity_grad(const TrainConfig& config,
                                                   const losses::CircuitFamily& fam,
                                                   const std::vector<double>& fa,
                                                   const std::vector<double>& fb) {
    if (!config.noisy()) return losses::similarity_grad(config.loss_kind, fam, fa, fb);

    // Noisy fidelity: run U(fb) then U(fa)^dag, read the |0..0> population.
    auto circuit = embed::build(config.embedding_spec(), fb);
    auto adj = noise::adjoint_circuit(embed::build(config.embedding_spec(), fa));
    const int p = fam.n_features;
    for (auto& g : adj) {
        if (g.parameterized()) g.param_index += p;  // second block: gradients for fa
        circuit.push_back(std::move(g));
    }
    const auto steps = noise::compile_noisy(circuit, *config.noise_model);
    const size_t dim = size_t(1) << config.n_qubits;
    CMatrix proj{int(dim), int(dim)};
    proj(0, 0) = 1.0;
    const auto vg = grad::noisy_expectation_grad(steps, qsim::DensityMatrix(config.n_qubits), proj, 2 * p);
    losses::SimilarityGrad out;
    out.value = vg.value;
    out.grad2.assign(vg.grad.begin(), vg.grad.begin() + p);
    out.grad1.assign(vg.grad.begin() + p, vg.grad.end());
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Stage one: interface-network training against the pair risk.
// ---------------------------------------------------------------------------

inline TrainRun cnqe_train_single(const TrainConfig& config, const data::DatasetSplit& dataset,
                                  int run_id) {
    config.validate();
    const auto train_images = dataset.train_images();
    const auto train_labels = dataset.train_labels();
    const auto test_images = dataset.test_images();
    const auto test_labels = dataset.test_labels();
    if (train_images.size() < 2) throw std::invalid_argument("training split too small");

    rng::Stream run_stream = rng::Stream(config.seed).fork("cnqe_run", uint64_t(run_id));
    nn::InterfaceModel model(config.interface, config.p_unit(), data::kChannels, config.n_qubits);
    model.init_weights(run_stream.fork("init"));
    const losses::CircuitFamily fam = losses::CircuitFamily::from_spec(config.embedding_spec());

    TrainRun run;
    run.run_id = run_id;
    run.seed = config.seed;

    AdamState adam(model.param_count());
    rng::Stream pair_stream = run_stream.fork("pairs");
    std::vector<double> grad(model.param_count(), 0.0);

    double best_td = -1.0;
    std::vector<double> best_weights = model.weights();
    int best_iter = 0;
    double last_loss = 0.0;

    auto evaluate = [&](int iter) {
        const double td = detail::ensemble_trace_distance(config, model, test_images, test_labels);
        run.history.push_back({"cnqe", run_id, iter, "test_trace_distance", td});
        if (td > best_td) {
            best_td = td;
            best_weights = model.weights();
            best_iter = iter;
        }
    };
    if (config.cnqe_iterations == 0) {
        evaluate(0);
    }

    nn::InterfaceWorkspace ws_a, ws_b;
    for (int iter = 1; iter <= config.cnqe_iterations; ++iter) {
        const auto pairs = sample_pairs(train_labels, config.cnqe_batch_pairs, pair_stream);
        std::fill(grad.begin(), grad.end(), 0.0);
        double loss = 0.0;
        for (const auto& p : pairs) {
            const auto fa = model.forward(train_images[p.i], ws_a);
            const auto fb = model.forward(train_images[p.j], ws_b);
            const auto sg = detail::pair_similarity_grad(config, fam, fa, fb);
            const double resid = sg.value - double(p.delta);
            loss += resid * resid;
            const double scale = 2.0 * resid / double(pairs.size());
            std::vector<double> dfa(sg.grad1.size()), dfb(sg.grad2.size());
            for (size_t k = 0; k < dfa.size(); ++k) dfa[k] = scale * sg.grad1[k];
            for (size_t k = 0; k < dfb.size(); ++k) dfb[k] = scale * sg.grad2[k];
            model.backward(ws_a, dfa, grad);
            model.backward(ws_b, dfb, grad);
        }
        loss /= double(pairs.size());
        if (!std::isfinite(loss))
            throw std::runtime_error("cnqe run " + std::to_string(run_id) + " diverged at iteration " +
                                     std::to_string(iter));
        last_loss = loss;
        run.history.push_back({"cnqe", run_id, iter, "nqe_loss", loss});
        adam_step(adam, model.weights(), grad, config.learning_rate);
        if (iter % config.cnqe_eval_every == 0 || iter == config.cnqe_iterations) evaluate(iter);
    }

    run.interface_weights = best_weights;
    run.selected_iteration = best_iter;
    run.final_test_trace_distance = best_td;
    run.final_loss = last_loss;
    nn::InterfaceModel best_model = model;
    best_model.weights() = best_weights;
    run.final_train_trace_distance =
        detail::ensemble_trace_distance(config, best_model, train_images, train_labels);
    return run;
}

inline std::vector<TrainRun> cnqe_train(const TrainConfig& config, const data::DatasetSplit& dataset) {
    config.validate();
    std::vector<TrainRun> runs(config.n_runs);
    if (config.threads <= 1 || config.n_runs == 1) {
        for (int r = 0; r < config.n_runs; ++r) runs[r] = cnqe_train_single(config, dataset, r);
        return runs;
    }
    // Runs are seed-independent; parallel execution is bit-identical to serial.
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(config.n_runs);
    const int workers = std::min(config.threads, config.n_runs);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int r = next.fetch_add(1); r < config.n_runs; r = next.fetch_add(1)) {
                try {
                    runs[r] = cnqe_train_single(config, dataset, r);
                } catch (...) {
                    errors[r] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return runs;
}

// Median run by final test trace distance; ties resolve to the lowest run id.
inline const TrainRun& select_median_run(const std::vector<TrainRun>& runs) {
    if (runs.empty() || runs.size() % 2 == 0)
        throw std::invalid_argument("median selection needs an odd number of runs");
    std::vector<double> tds;
    tds.reserve(runs.size());
    for (const auto& r : runs) tds.push_back(r.final_test_trace_distance);
    std::vector<double> sorted = tds;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    for (const auto& r : runs)
        if (r.final_test_trace_distance == median) return r;
    throw std::logic_error("median value not found among runs");
}

// ---------------------------------------------------------------------------
// Stage two: QCNN training on the frozen embedding.
// ---------------------------------------------------------------------------

namespace detail {

struct EmbeddedDataset {
    std::vector<qsim::StateVector> pure;        // noiseless path
    std::vector<qsim::DensityMatrix> mixed;     // noisy path
    std::vector<int> labels;
    bool noisy = false;
};

inline EmbeddedDataset embed_all(const TrainConfig& config, const nn::InterfaceModel& model,
                                 const std::vector<std::vector<double>>& images,
                                 const std::vector<int>& labels) {
    EmbeddedDataset out;
    out.labels = labels;
    out.noisy = config.noisy();
    const auto spec = config.embedding_spec();
    nn::InterfaceWorkspace ws;
    for (const auto& img : images) {
        const auto feats = model.forward(img, ws);
        if (out.noisy)
            out.mixed.push_back(noise::noisy_execute(embed::build(spec, feats), *config.noise_model,
                                                     config.n_qubits));
        else
            out.pure.push_back(embed::embed_state(spec, feats));
    }
    return out;
}

}  // namespace detail

inline TrainRun qcnn_train(const TrainConfig& config, const data::DatasetSplit& dataset,
                           const std::vector<double>& frozen_interface_weights, int run_id = 0) {
    config.validate();
    nn::InterfaceModel model(config.interface, config.p_unit(), data::kChannels, config.n_qubits);
    if (frozen_interface_weights.size() != model.param_count())
        throw std::invalid_argument("frozen weight vector length mismatch");
    model.weights() = frozen_interface_weights;

    const auto train_set =
        detail::embed_all(config, model, dataset.train_images(), dataset.train_labels());
    const auto test_set = detail::embed_all(config, model, dataset.test_images(), dataset.test_labels());

    const ansatz::QcnnSpec spec = ansatz::QcnnSpec::default_for(config.n_qubits);
    rng::Stream stream = rng::Stream(config.seed).fork("qcnn_run", uint64_t(run_id));
    std::vector<double> theta(spec.total_params);
    {
        rng::Stream init = stream.fork("init");
        for (auto& t : theta) t = init.uniform(0.0, 2.0 * M_PI);
    }
    const double flip = config.noisy() ? config.noise_model->p_meas : 0.0;

    auto predict = [&](const detail::EmbeddedDataset& set, size_t idx) {
        const double p = set.noisy ? ansatz::qcnn_predict(spec, theta, set.mixed[idx])
                                   : ansatz::qcnn_predict(spec, theta, set.pure[idx]);
        return noise::measurement_flip(flip, p);
    };
    auto accuracy = [&](const detail::EmbeddedDataset& set) {
        int correct = 0;
        for (size_t i = 0; i < set.labels.size(); ++i)
            correct += (predict(set, i) >= 0.5 ? 1 : 0) == set.labels[i] ? 1 : 0;
        return double(correct) / double(set.labels.size());
    };
    auto singleshot_accuracy = [&](const detail::EmbeddedDataset& set) {
        double s = 0.0;
        for (size_t i = 0; i < set.labels.size(); ++i) {
            const double p = predict(set, i);
            s += set.labels[i] == 1 ? p : 1.0 - p;
        }
        return s / double(set.labels.size());
    };

    TrainRun run;
    run.run_id = run_id;
    run.seed = config.seed;
    run.interface_weights = frozen_interface_weights;

    AdamState adam(theta.size());
    rng::Stream shuffle_stream = stream.fork("shuffle");
    const size_t n = train_set.labels.size();
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;

    for (int epoch = 1; epoch <= config.qcnn_epochs; ++epoch) {
        shuffle_stream.shuffle(order);
        double epoch_loss = 0.0;
        size_t batches = 0;
        for (size_t start = 0; start + config.qcnn_batch <= n; start += config.qcnn_batch) {
            std::vector<double> grad_theta(theta.size(), 0.0);
            double batch_loss = 0.0;
            // Theta is fixed within a batch; build the circuit once.
            const auto circuit = ansatz::build_qcnn(spec, theta);
            std::vector<grad::NoisyStep> steps;
            if (train_set.noisy) steps = noise::compile_noisy(circuit, *config.noise_model);
            const CMatrix readout = qsim::z_observable(spec.readout_qubit, config.n_qubits);
            for (int b = 0; b < config.qcnn_batch; ++b) {
                const size_t idx = order[start + b];
                const int y = train_set.labels[idx];
                double p;
                std::vector<double> dp;
                if (!train_set.noisy) {
                    const auto vg = grad::expectation_grad(circuit, config.n_qubits,
                                                           train_set.pure[idx], readout,
                                                           spec.total_params);
                    p = 0.5 * (1.0 + vg.value);
                    dp.resize(vg.grad.size());
                    for (size_t k = 0; k < dp.size(); ++k) dp[k] = 0.5 * vg.grad[k];
                } else {
                    const auto vg = grad::noisy_expectation_grad(steps, train_set.mixed[idx], readout,
                                                                 spec.total_params);
                    p = 0.5 * (1.0 + vg.value);
                    dp.resize(vg.grad.size());
                    for (size_t k = 0; k < dp.size(); ++k) dp[k] = 0.5 * vg.grad[k];
                }
                const double pf = noise::measurement_flip(flip, p);
                const double resid = pf - double(y);
                batch_loss += resid * resid;
                const double scale = 2.0 * resid * (1.0 - 2.0 * flip) / double(config.qcnn_batch);
                for (size_t k = 0; k < theta.size(); ++k) grad_theta[k] += scale * dp[k];
            }
            batch_loss /= double(config.qcnn_batch);
            if (!std::isfinite(batch_loss))
                throw std::runtime_error("qcnn run " + std::to_string(run_id) + " diverged");
            epoch_loss += batch_loss;
            ++batches;
            adam_step(adam, theta, grad_theta, config.learning_rate);
        }
        const double acc = accuracy(test_set);
        run.history.push_back({"qcnn", run_id, epoch, "vqa_loss", batches ? epoch_loss / batches : 0.0});
        run.history.push_back({"qcnn", run_id, epoch, "test_accuracy", acc});
        run.final_loss = batches ? epoch_loss / batches : 0.0;
    }

    run.theta = theta;
    run.final_test_accuracy = accuracy(test_set);
    run.final_train_accuracy = accuracy(train_set);
    run.final_train_singleshot_accuracy = singleshot_accuracy(train_set);
    run.final_test_trace_distance = detail::ensemble_trace_distance(
        config, model, dataset.test_images(), dataset.test_labels());
    run.final_train_trace_distance = detail::ensemble_trace_distance(
        config, model, dataset.train_images(), dataset.train_labels());
    return run;
}

// ---------------------------------------------------------------------------
// Full experiment: CNQE runs, median selection, repeated QCNN training.
// ---------------------------------------------------------------------------

struct ExperimentResult {
    std::vector<TrainRun> cnqe_runs;
    int median_run_id = 0;
    std::vector<TrainRun> qcnn_runs;

    double median_test_trace_distance = 0.0;
    double mean_test_accuracy = 0.0;
    double std_test_accuracy = 0.0;
};

inline ExperimentResult run_experiment(const TrainConfig& config, const data::DatasetSplit& dataset) {
    ExperimentResult result;
    result.cnqe_runs = cnqe_train(config, dataset);
    const TrainRun& median = select_median_run(result.cnqe_runs);
    result.median_run_id = median.run_id;
    result.median_test_trace_distance = median.final_test_trace_distance;

    result.qcnn_runs.reserve(config.n_runs);
    for (int r = 0; r < config.n_runs; ++r)
        result.qcnn_runs.push_back(qcnn_train(config, dataset, median.interface_weights, r));

    double mean = 0.0;
    for (const auto& run : result.qcnn_runs) mean += run.final_test_accuracy;
    mean /= double(result.qcnn_runs.size());
    double var = 0.0;
    for (const auto& run : result.qcnn_runs) {
        const double d = run.final_test_accuracy - mean;
        var += d * d;
    }
    result.mean_test_accuracy = mean;
    result.std_test_accuracy = std::sqrt(var / double(result.qcnn_runs.size()));
    return result;
}

}  // namespace cnqe::train
