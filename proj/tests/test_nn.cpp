#include <catch2/catch_amalgamated.hpp>

#include "cnqe/nn.hpp"
#include "cnqe/rng.hpp"
#include "cnqe/training.hpp"

using namespace cnqe;
using namespace cnqe::nn;

namespace {

std::vector<double> random_vec(size_t n, rng::Stream& s, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = s.uniform(lo, hi);
    return v;
}

std::vector<double> random_image(int channels, rng::Stream& s) {
    return random_vec(size_t(channels) * 32 * 32, s, 0.0, 1.0);
}

}  // namespace

TEST_CASE("conv2d constant and identity kernels") {
    // All-zero kernel with bias b gives constant b per channel.
    std::vector<double> in(2 * 4 * 4, 0.7);
    std::vector<double> w(3 * 2 * 9, 0.0), b{1.5, -0.5, 0.25};
    std::vector<double> out(3 * 4 * 4);
    layers::conv2d_forward(in.data(), 2, 4, 4, w.data(), b.data(), 3, out.data());
    for (int o = 0; o < 3; ++o)
        for (int i = 0; i < 16; ++i) REQUIRE(out[o * 16 + i] == Catch::Approx(b[o]));

    // Center-one kernel reproduces the input.
    rng::Stream rs(11);
    std::vector<double> img = random_vec(16, rs);
    std::vector<double> wid(9, 0.0);
    wid[4] = 1.0;
    std::vector<double> bz{0.0}, outp(16);
    layers::conv2d_forward(img.data(), 1, 4, 4, wid.data(), bz.data(), 1, outp.data());
    for (int i = 0; i < 16; ++i) REQUIRE(outp[i] == Catch::Approx(img[i]));
}

TEST_CASE("conv2d matches the nested-loop oracle on random tensors") {
    rng::Stream rs(5);
    const int cin = 2, cout = 3, h = 4, w = 4;
    const auto in = random_vec(size_t(cin) * h * w, rs);
    const auto wt = random_vec(size_t(cout) * cin * 9, rs);
    const auto bias = random_vec(cout, rs);
    std::vector<double> out(size_t(cout) * h * w);
    layers::conv2d_forward(in.data(), cin, h, w, wt.data(), bias.data(), cout, out.data());

    // Independent brute-force cross-correlation with explicit zero padding.
    for (int o = 0; o < cout; ++o)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double s = bias[o];
                for (int c = 0; c < cin; ++c)
                    for (int ky = -1; ky <= 1; ++ky)
                        for (int kx = -1; kx <= 1; ++kx) {
                            const int yy = y + ky, xx = x + kx;
                            const double pix = (yy >= 0 && yy < h && xx >= 0 && xx < w)
                                                   ? in[(c * h + yy) * w + xx]
                                                   : 0.0;
                            s += pix * wt[((o * cin + c) * 3 + (ky + 1)) * 3 + (kx + 1)];
                        }
                REQUIRE(out[(o * h + y) * w + x] == Catch::Approx(s).margin(1e-10));
            }
}

TEST_CASE("maxpool4 shapes and routing") {
    std::vector<double> in(1 * 32 * 32, 0.3);
    std::vector<double> out(1 * 8 * 8);
    std::vector<int> arg(out.size());
    layers::maxpool4_forward(in.data(), 1, 32, 32, out.data(), arg.data());
    for (double v : out) REQUIRE(v == Catch::Approx(0.3));
    // Constant input: ties resolve to the first element in row-major order.
    REQUIRE(arg[0] == 0);

    std::fill(in.begin(), in.end(), 0.0);
    in[(5 * 32) + 6] = 2.0;  // one hot pixel in block (1, 1)
    layers::maxpool4_forward(in.data(), 1, 32, 32, out.data(), arg.data());
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
            if (y == 1 && x == 1)
                REQUIRE(out[y * 8 + x] == Catch::Approx(2.0));
            else
                REQUIRE(out[y * 8 + x] == Catch::Approx(0.0));
        }

    std::vector<double> din(in.size());
    std::vector<double> dout(out.size(), 0.0);
    dout[9] = 1.0;
    layers::maxpool4_backward(dout.data(), 1, 32, 32, arg.data(), din.data());
    REQUIRE(din[(5 * 32) + 6] == Catch::Approx(1.0));
    REQUIRE(std::accumulate(din.begin(), din.end(), 0.0) == Catch::Approx(1.0));

    std::vector<double> bad(1 * 30 * 30);
    std::vector<double> bo(49);
    std::vector<int> ba(49);
    REQUIRE_THROWS_AS(layers::maxpool4_forward(bad.data(), 1, 30, 30, bo.data(), ba.data()),
                      std::invalid_argument);
}

TEST_CASE("interface output dimensions match the model family") {
    REQUIRE(InterfaceModel(InterfaceKind::GA, 8).out_dim() == 8);
    REQUIRE(InterfaceModel(InterfaceKind::GA, 10).out_dim() == 10);
    REQUIRE(InterfaceModel(InterfaceKind::GB, 8).out_dim() == 24);
    REQUIRE(InterfaceModel(InterfaceKind::GC, 8).out_dim() == 24);
    REQUIRE(InterfaceModel(InterfaceKind::GC, 10).out_dim() == 30);
}

TEST_CASE("interface parameter counts match the closed forms") {
    // n_c = 3, n_f = 48, p_a = 8.
    const InterfaceModel ga(InterfaceKind::GA, 8);
    auto [cnn_a, fc_a] = ga.count_params();
    REQUIRE(cnn_a == 90 * 9 + 6 * 3);  // 90 nc^2 + 6 nc = 828
    REQUIRE(cnn_a == 828);
    REQUIRE(fc_a == 48 * 48 + 48 + 48 * 8 + 8);  // 2744
    REQUIRE(fc_a == 2744);
    REQUIRE(ga.param_count() == 828 + 2744);

    const InterfaceModel gb(InterfaceKind::GB, 8);
    auto [cnn_b, fc_b] = gb.count_params();
    REQUIRE(cnn_b == 828);
    REQUIRE(fc_b == 48 * 48 + 48 + 3 * 48 * 8 + 3 * 8);  // 3528

    const InterfaceModel gc(InterfaceKind::GC, 8);
    auto [cnn_c, fc_c] = gc.count_params();
    REQUIRE(cnn_c == 96 * 3);  // per-channel convs are 20 + 76 = 96
    REQUIRE(fc_c == 48 * 48 / 3 + 48 + 48 * 8 + 3 * 8);  // 1224

    // Per-channel conv layer literals: 20 and 76.
    REQUIRE(1 * 2 * 9 + 2 == 20);
    REQUIRE(2 * 4 * 9 + 4 == 76);
}

TEST_CASE("zero weights give zero output") {
    const InterfaceModel ga(InterfaceKind::GA, 8);
    rng::Stream rs(3);
    InterfaceWorkspace ws;
    const auto out = ga.forward(random_image(3, rs), ws);
    for (double v : out) REQUIRE(v == 0.0);
}

TEST_CASE("interface forward output sizes and errors") {
    rng::Stream rs(17);
    InterfaceModel gc(InterfaceKind::GC, 8);
    gc.init_weights(rng::Stream(1));
    InterfaceWorkspace ws;
    const auto out = gc.forward(random_image(3, rs), ws);
    REQUIRE(out.size() == 24);
    REQUIRE_THROWS_AS(gc.forward(std::vector<double>(100, 0.0), ws), std::invalid_argument);
}

TEST_CASE("gc forward is channel-equivariant") {
    rng::Stream rs(23);
    InterfaceModel gc(InterfaceKind::GC, 8);
    gc.init_weights(rng::Stream(2));
    const auto img = random_image(3, rs);
    InterfaceWorkspace ws;
    const auto out = gc.forward(img, ws);

    // Rotate channels of the image and the per-channel weight blocks together.
    std::vector<double> rotated(img.size());
    const size_t plane = 32 * 32;
    for (int c = 0; c < 3; ++c)
        std::copy(img.begin() + ((c + 1) % 3) * plane, img.begin() + ((c + 1) % 3 + 1) * plane,
                  rotated.begin() + c * plane);
    InterfaceModel gc2 = gc;
    const size_t per = gc.param_count() / 3;
    for (int c = 0; c < 3; ++c)
        std::copy(gc.weights().begin() + ((c + 1) % 3) * per,
                  gc.weights().begin() + ((c + 1) % 3 + 1) * per, gc2.weights().begin() + c * per);
    const auto out2 = gc2.forward(rotated, ws);
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 8; ++i)
            REQUIRE(out2[c * 8 + i] == Catch::Approx(out[((c + 1) % 3) * 8 + i]).margin(1e-12));
}

namespace {

// Scalar head for whole-net gradient checks: sum of squared outputs.
double net_scalar(const InterfaceModel& model, const std::vector<double>& img) {
    InterfaceWorkspace ws;
    const auto out = model.forward(img, ws);
    double s = 0.0;
    for (double v : out) s += v * v;
    return s;
}

}  // namespace

TEST_CASE("interface backward matches finite differences") {
    rng::Stream rs(29);
    for (auto kind : {InterfaceKind::GA, InterfaceKind::GB, InterfaceKind::GC}) {
        InterfaceModel model(kind, 8);
        model.init_weights(rng::Stream(31));
        const auto img = random_image(3, rs);

        InterfaceWorkspace ws;
        const auto out = model.forward(img, ws);
        std::vector<double> dout(out.size());
        for (size_t i = 0; i < out.size(); ++i) dout[i] = 2.0 * out[i];
        std::vector<double> grad(model.param_count(), 0.0);
        model.backward(ws, dout, grad);

        // Probe a spread of coordinates with central differences.
        rng::Stream probe(37);
        const double h = 1e-5;
        for (int trial = 0; trial < 60; ++trial) {
            const size_t i = probe.below(model.param_count());
            InterfaceModel pert = model;
            pert.weights()[i] += h;
            const double fp = net_scalar(pert, img);
            pert.weights()[i] -= 2 * h;
            const double fm = net_scalar(pert, img);
            const double fd = (fp - fm) / (2 * h);
            REQUIRE(grad[i] == Catch::Approx(fd).margin(1e-6 + 1e-5 * std::abs(fd)));
        }
    }
}

TEST_CASE("grad_check on a quadratic is exact to roundoff") {
    rng::Stream rs(41);
    const auto w = random_vec(10, rs);
    std::vector<double> coeff = random_vec(10, rs, 0.5, 2.0);
    auto f = [&](const std::vector<double>& x) {
        double s = 0.0;
        for (size_t i = 0; i < x.size(); ++i) s += coeff[i] * x[i] * x[i];
        return s;
    };
    std::vector<double> g(10);
    for (size_t i = 0; i < 10; ++i) g[i] = 2.0 * coeff[i] * w[i];
    REQUIRE(grad_check(f, w, g) < 1e-8);
}

TEST_CASE("baseline head parameter counts match the reference table") {
    REQUIRE(BaselineHead(HeadKind::Linear, 8).param_count() == 18);
    REQUIRE(BaselineHead(HeadKind::Bottleneck, 8).param_count() == 13);
    REQUIRE(BaselineHead(HeadKind::Conv1d, 8).param_count() == 15);
    REQUIRE(BaselineHead(HeadKind::Linear, 24).param_count() == 50);
    REQUIRE(BaselineHead(HeadKind::Bottleneck, 24).param_count() == 29);
    REQUIRE(BaselineHead(HeadKind::Conv1d, 24).param_count() == 18);
    REQUIRE_THROWS_AS(BaselineHead(HeadKind::Linear, 5), std::invalid_argument);
}

TEST_CASE("baseline heads produce two logits; zero weights give even softmax") {
    rng::Stream rs(43);
    for (int in_dim : {8, 24}) {
        for (auto kind : {HeadKind::Linear, HeadKind::Bottleneck, HeadKind::Conv1d}) {
            BaselineHead head(kind, in_dim);
            HeadWorkspace ws;
            const auto logits = head.forward(random_vec(in_dim, rs), ws);
            REQUIRE(logits.size() == 2);
            const auto p = softmax(logits);
            REQUIRE(p[0] == Catch::Approx(0.5));
            REQUIRE(p[1] == Catch::Approx(0.5));
        }
    }
    BaselineHead head(HeadKind::Linear, 8);
    HeadWorkspace ws;
    REQUIRE_THROWS_AS(head.forward(std::vector<double>(9, 0.0), ws), std::invalid_argument);
}

TEST_CASE("baseline head backward matches finite differences") {
    rng::Stream rs(47);
    for (int in_dim : {8, 24}) {
        for (auto kind : {HeadKind::Linear, HeadKind::Bottleneck, HeadKind::Conv1d}) {
            BaselineHead head(kind, in_dim);
            head.init_weights(rng::Stream(53));
            // Jitter every weight (including the zero biases) so no ReLU input
            // sits exactly on its kink; grad_check assumes differentiability.
            for (auto& w : head.weights()) w += rs.uniform(0.01, 0.05);
            const auto feats = random_vec(in_dim, rs);
            const int label = 1;

            HeadWorkspace ws;
            const auto logits = head.forward(feats, ws);
            std::vector<double> dlogits;
            cross_entropy(logits, label, dlogits);
            std::vector<double> grad(head.param_count(), 0.0);
            head.backward(ws, dlogits, grad);

            auto f = [&](const std::vector<double>& w) {
                BaselineHead h2 = head;
                h2.weights() = w;
                HeadWorkspace w2;
                const auto lg = h2.forward(feats, w2);
                std::vector<double> dl;
                return cross_entropy(lg, label, dl);
            };
            REQUIRE(grad_check(f, head.weights(), grad) < 1e-6);
        }
    }
}

TEST_CASE("autoencoder reconstructs shapes and trains on one batch") {
    rng::Stream rs(59);
    for (auto kind : {InterfaceKind::GA, InterfaceKind::GC}) {
        Autoencoder ae(kind);
        ae.init_weights(rng::Stream(61));
        REQUIRE(ae.latent_dim() == (kind == InterfaceKind::GA ? 8 : 24));

        const auto img = random_image(3, rs);
        AutoencoderWorkspace ws;
        const auto recon = ae.forward(img, ws);
        REQUIRE(recon.size() == img.size());

        // Zero-output decoder: mse equals the mean square of the image.
        Autoencoder zero(kind);
        double msq = 0.0;
        for (double v : img) msq += v * v;
        msq /= double(img.size());
        REQUIRE(zero.mse(img) == Catch::Approx(msq).margin(1e-12));
    }
}

TEST_CASE("autoencoder gradient matches finite differences") {
    rng::Stream rs(67);
    Autoencoder ae(InterfaceKind::GA);
    ae.init_weights(rng::Stream(71));
    const auto img = random_image(3, rs);

    AutoencoderWorkspace ws;
    std::vector<double> eg(ae.encoder().param_count(), 0.0);
    std::vector<double> dg(ae.decoder_weights().size(), 0.0);
    ae.step(img, ws, eg, dg);

    rng::Stream probe(73);
    const double h = 1e-5;
    for (int trial = 0; trial < 30; ++trial) {
        // Alternate probes between encoder and decoder weights.
        const bool enc = trial % 2 == 0;
        Autoencoder pert = ae;
        auto& wv = enc ? pert.encoder().weights() : pert.decoder_weights();
        const auto& g = enc ? eg : dg;
        const size_t i = probe.below(wv.size());
        wv[i] += h;
        const double fp = pert.mse(img);
        wv[i] -= 2 * h;
        const double fm = pert.mse(img);
        const double fd = (fp - fm) / (2 * h);
        REQUIRE(g[i] == Catch::Approx(fd).margin(1e-7 + 1e-5 * std::abs(fd)));
    }
}

TEST_CASE("tensor shape validation") {
    Tensor t({2, 3, 4});
    REQUIRE(t.size() == 24);
    REQUIRE_NOTHROW(Tensor({2, 2}, {1, 2, 3, 4}));
    REQUIRE_THROWS_AS(Tensor({2, 2}, {1, 2, 3}), std::invalid_argument);
}

TEST_CASE("one adam step lowers the autoencoder batch loss") {
    rng::Stream rs(79);
    Autoencoder ae(InterfaceKind::GA);
    ae.init_weights(rng::Stream(83));
    std::vector<std::vector<double>> batch;
    for (int i = 0; i < 4; ++i) batch.push_back(random_image(3, rs));

    auto batch_mse = [&](const Autoencoder& model) {
        double s = 0.0;
        for (const auto& img : batch) s += model.mse(img);
        return s / batch.size();
    };
    const double before = batch_mse(ae);

    std::vector<double> eg(ae.encoder().param_count(), 0.0);
    std::vector<double> dg(ae.decoder_weights().size(), 0.0);
    AutoencoderWorkspace ws;
    for (const auto& img : batch) ae.step(img, ws, eg, dg);
    for (auto& g : eg) g /= batch.size();
    for (auto& g : dg) g /= batch.size();

    train::AdamState adam_enc(eg.size()), adam_dec(dg.size());
    train::adam_step(adam_enc, ae.encoder().weights(), eg, 0.01);
    train::adam_step(adam_dec, ae.decoder_weights(), dg, 0.01);
    REQUIRE(batch_mse(ae) < before);
}

TEST_CASE("cross entropy on an even prediction") {
    std::vector<double> dl;
    const double loss = cross_entropy({0.0, 0.0}, 0, dl);
    REQUIRE(loss == Catch::Approx(std::log(2.0)));
    REQUIRE(dl[0] == Catch::Approx(-0.5));
    REQUIRE(dl[1] == Catch::Approx(0.5));
}
