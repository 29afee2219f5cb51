// Classical comparison pipelines: small classifier heads trained on frozen
// interface features with cross-entropy, and the autoencoder route that
// replaces similarity training with reconstruction-driven compression.

#pragma once

#include <string>
#include <vector>

#include "cnqe/nn.hpp"
#include "cnqe/training.hpp"

namespace cnqe::baselines {

struct HeadConfig {
    nn::HeadKind kind = nn::HeadKind::Linear;
    int epochs = 50;
    int batch = 25;
    double learning_rate = 0.01;
};

struct HeadRun {
    int run_id = 0;
    size_t param_count = 0;
    std::vector<train::HistoryEntry> history;
    std::vector<double> weights;
    double final_test_accuracy = 0.0;
    double final_train_accuracy = 0.0;
};

// Train a classical head on frozen interface features (cross-entropy, Adam).
inline HeadRun train_head(const train::TrainConfig& config, const HeadConfig& head_config,
                          const data::DatasetSplit& dataset,
                          const std::vector<double>& frozen_interface_weights, int run_id) {
    nn::InterfaceModel model(config.interface, config.p_unit(), data::kChannels, config.n_qubits);
    if (frozen_interface_weights.size() != model.param_count())
        throw std::invalid_argument("frozen weight vector length mismatch");
    model.weights() = frozen_interface_weights;

    // Precompute features once; the interface stays frozen.
    auto featurize = [&](const std::vector<std::vector<double>>& images) {
        std::vector<std::vector<double>> feats;
        feats.reserve(images.size());
        nn::InterfaceWorkspace ws;
        for (const auto& img : images) feats.push_back(model.forward(img, ws));
        return feats;
    };
    const auto train_feats = featurize(dataset.train_images());
    const auto test_feats = featurize(dataset.test_images());
    const auto train_labels = dataset.train_labels();
    const auto test_labels = dataset.test_labels();

    nn::BaselineHead head(head_config.kind, model.out_dim());
    rng::Stream stream = rng::Stream(config.seed).fork("baseline_head", uint64_t(run_id));
    head.init_weights(stream.fork("init"));

    HeadRun run;
    run.run_id = run_id;
    run.param_count = head.param_count();

    auto accuracy = [&](const std::vector<std::vector<double>>& feats, const std::vector<int>& labels) {
        nn::HeadWorkspace ws;
        int correct = 0;
        for (size_t i = 0; i < feats.size(); ++i) {
            const auto logits = head.forward(feats[i], ws);
            correct += (logits[1] >= logits[0] ? 1 : 0) == labels[i] ? 1 : 0;
        }
        return double(correct) / double(feats.size());
    };

    train::AdamState adam(head.param_count());
    rng::Stream shuffle_stream = stream.fork("shuffle");
    std::vector<size_t> order(train_feats.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    nn::HeadWorkspace ws;
    for (int epoch = 1; epoch <= head_config.epochs; ++epoch) {
        shuffle_stream.shuffle(order);
        double epoch_loss = 0.0;
        size_t batches = 0;
        for (size_t start = 0; start + head_config.batch <= order.size();
             start += head_config.batch) {
            std::vector<double> grad(head.param_count(), 0.0);
            double batch_loss = 0.0;
            for (int b = 0; b < head_config.batch; ++b) {
                const size_t idx = order[start + b];
                const auto logits = head.forward(train_feats[idx], ws);
                std::vector<double> dlogits;
                batch_loss += nn::cross_entropy(logits, train_labels[idx], dlogits);
                for (auto& d : dlogits) d /= double(head_config.batch);
                head.backward(ws, dlogits, grad);
            }
            if (!std::isfinite(batch_loss))
                throw std::runtime_error("baseline head run " + std::to_string(run_id) + " diverged");
            epoch_loss += batch_loss / head_config.batch;
            ++batches;
            train::adam_step(adam, head.weights(), grad, head_config.learning_rate);
        }
        run.history.push_back(
            {"baseline", run_id, epoch, "cross_entropy", batches ? epoch_loss / batches : 0.0});
        run.history.push_back(
            {"baseline", run_id, epoch, "test_accuracy", accuracy(test_feats, test_labels)});
    }
    run.weights = head.weights();
    run.final_test_accuracy = accuracy(test_feats, test_labels);
    run.final_train_accuracy = accuracy(train_feats, train_labels);
    return run;
}

struct AutoencoderConfig {
    int iterations = 2000;
    int batch = 25;
    double learning_rate = 0.01;
};

struct AutoencoderRun {
    int run_id = 0;
    std::vector<double> encoder_weights;
    std::vector<train::HistoryEntry> history;
    double final_mse = 0.0;
};

// MSE reconstruction training; batches resample the training set with
// replacement. Only the encoder is retained for downstream embedding.
inline AutoencoderRun train_autoencoder(const train::TrainConfig& config,
                                        const AutoencoderConfig& ae_config,
                                        const data::DatasetSplit& dataset, int run_id) {
    if (config.interface == nn::InterfaceKind::GB)
        throw std::invalid_argument("autoencoder baseline supports the g_a and g_c shapes");
    nn::Autoencoder ae(config.interface, data::kChannels);
    rng::Stream stream = rng::Stream(config.seed).fork("autoencoder", uint64_t(run_id));
    ae.init_weights(stream.fork("init"));

    const auto train_images = dataset.train_images();
    rng::Stream batch_stream = stream.fork("batches");

    AutoencoderRun run;
    run.run_id = run_id;
    train::AdamState adam_enc(ae.encoder().param_count());
    train::AdamState adam_dec(ae.decoder_weights().size());

    nn::AutoencoderWorkspace ws;
    for (int iter = 1; iter <= ae_config.iterations; ++iter) {
        std::vector<double> enc_grad(ae.encoder().param_count(), 0.0);
        std::vector<double> dec_grad(ae.decoder_weights().size(), 0.0);
        double loss = 0.0;
        for (int b = 0; b < ae_config.batch; ++b) {
            const size_t idx = batch_stream.below(train_images.size());
            loss += ae.step(train_images[idx], ws, enc_grad, dec_grad);
        }
        loss /= double(ae_config.batch);
        if (!std::isfinite(loss))
            throw std::runtime_error("autoencoder run " + std::to_string(run_id) + " diverged");
        for (auto& g : enc_grad) g /= double(ae_config.batch);
        for (auto& g : dec_grad) g /= double(ae_config.batch);
        train::adam_step(adam_enc, ae.encoder().weights(), enc_grad, ae_config.learning_rate);
        train::adam_step(adam_dec, ae.decoder_weights(), dec_grad, ae_config.learning_rate);
        if (iter % 50 == 0 || iter == ae_config.iterations)
            run.history.push_back({"autoencoder", run_id, iter, "mse", loss});
        run.final_mse = loss;
    }
    run.encoder_weights = ae.encoder().weights();
    return run;
}

}  // namespace cnqe::baselines
