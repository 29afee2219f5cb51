// Minimal reverse-mode network stack: conv/pool/linear layers with hand-coded
// backward passes, the three classical-to-quantum interface models, the
// classical baseline heads, and the convolutional autoencoder.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "cnqe/rng.hpp"

namespace cnqe::nn {

struct Tensor {
    std::vector<int> shape;
    std::vector<double> v;
    std::vector<double> g;  // optional, same length as v when present

    Tensor() = default;
    Tensor(std::vector<int> s) : shape(std::move(s)) {
        size_t n = 1;
        for (int d : shape) n *= size_t(d);
        v.assign(n, 0.0);
    }
    Tensor(std::vector<int> s, std::vector<double> values) : shape(std::move(s)), v(std::move(values)) {
        size_t n = 1;
        for (int d : shape) n *= size_t(d);
        if (v.size() != n) throw std::invalid_argument("tensor value length does not match shape");
    }

    size_t size() const { return v.size(); }
};

// ---------------------------------------------------------------------------
// Layer primitives. Forward fills outputs; backward accumulates into dw/db and
// returns the input gradient. All loops are plain row-major nests.
// ---------------------------------------------------------------------------

namespace layers {

// 3x3 cross-correlation with zero padding 1 (spatial dims preserved).
inline void conv2d_forward(const double* in, int cin, int h, int w, const double* weight,
                           const double* bias, int cout, double* out) {
    for (int o = 0; o < cout; ++o) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double s = bias[o];
                for (int c = 0; c < cin; ++c) {
                    const double* woc = weight + ((size_t(o) * cin + c) * 9);
                    const double* inc = in + size_t(c) * h * w;
                    for (int ky = 0; ky < 3; ++ky) {
                        const int yy = y + ky - 1;
                        if (yy < 0 || yy >= h) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            const int xx = x + kx - 1;
                            if (xx < 0 || xx >= w) continue;
                            s += inc[yy * w + xx] * woc[ky * 3 + kx];
                        }
                    }
                }
                out[(size_t(o) * h + y) * w + x] = s;
            }
        }
    }
}

inline void conv2d_backward(const double* in, int cin, int h, int w, const double* weight, int cout,
                            const double* dout, double* din, double* dweight, double* dbias) {
    if (din) std::fill(din, din + size_t(cin) * h * w, 0.0);
    for (int o = 0; o < cout; ++o) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double go = dout[(size_t(o) * h + y) * w + x];
                if (go == 0.0) continue;
                dbias[o] += go;
                for (int c = 0; c < cin; ++c) {
                    const double* woc = weight + ((size_t(o) * cin + c) * 9);
                    double* dwoc = dweight + ((size_t(o) * cin + c) * 9);
                    const double* inc = in + size_t(c) * h * w;
                    double* dinc = din ? din + size_t(c) * h * w : nullptr;
                    for (int ky = 0; ky < 3; ++ky) {
                        const int yy = y + ky - 1;
                        if (yy < 0 || yy >= h) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            const int xx = x + kx - 1;
                            if (xx < 0 || xx >= w) continue;
                            dwoc[ky * 3 + kx] += inc[yy * w + xx] * go;
                            if (dinc) dinc[yy * w + xx] += woc[ky * 3 + kx] * go;
                        }
                    }
                }
            }
        }
    }
}

inline void relu_forward(const double* in, size_t n, double* out) {
    for (size_t i = 0; i < n; ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

inline void relu_backward(const double* in, const double* dout, size_t n, double* din) {
    for (size_t i = 0; i < n; ++i) din[i] = in[i] > 0.0 ? dout[i] : 0.0;
}

// 4x4 max pooling with stride 4; argmax recorded for the backward pass (first
// occurrence in row-major order wins on ties).
inline void maxpool4_forward(const double* in, int c, int h, int w, double* out, int* argmax) {
    if (h % 4 != 0 || w % 4 != 0) throw std::invalid_argument("maxpool4 requires dims divisible by 4");
    const int ho = h / 4, wo = w / 4;
    for (int ch = 0; ch < c; ++ch) {
        const double* inc = in + size_t(ch) * h * w;
        for (int y = 0; y < ho; ++y) {
            for (int x = 0; x < wo; ++x) {
                double best = -std::numeric_limits<double>::infinity();
                int besti = -1;
                for (int dy = 0; dy < 4; ++dy) {
                    for (int dx = 0; dx < 4; ++dx) {
                        const int idx = (4 * y + dy) * w + (4 * x + dx);
                        if (inc[idx] > best) {
                            best = inc[idx];
                            besti = idx;
                        }
                    }
                }
                out[(size_t(ch) * ho + y) * wo + x] = best;
                argmax[(size_t(ch) * ho + y) * wo + x] = besti;
            }
        }
    }
}

inline void maxpool4_backward(const double* dout, int c, int h, int w, const int* argmax, double* din) {
    const int ho = h / 4, wo = w / 4;
    std::fill(din, din + size_t(c) * h * w, 0.0);
    for (int ch = 0; ch < c; ++ch) {
        double* dinc = din + size_t(ch) * h * w;
        for (int i = 0; i < ho * wo; ++i)
            dinc[argmax[size_t(ch) * ho * wo + i]] += dout[size_t(ch) * ho * wo + i];
    }
}

inline void linear_forward(const double* in, int nin, const double* weight, const double* bias,
                           int nout, double* out) {
    for (int o = 0; o < nout; ++o) {
        double s = bias[o];
        const double* wrow = weight + size_t(o) * nin;
        for (int i = 0; i < nin; ++i) s += wrow[i] * in[i];
        out[o] = s;
    }
}

inline void linear_backward(const double* in, int nin, const double* weight, int nout,
                            const double* dout, double* din, double* dweight, double* dbias) {
    if (din) std::fill(din, din + nin, 0.0);
    for (int o = 0; o < nout; ++o) {
        const double go = dout[o];
        dbias[o] += go;
        const double* wrow = weight + size_t(o) * nin;
        double* dwrow = dweight + size_t(o) * nin;
        for (int i = 0; i < nin; ++i) {
            dwrow[i] += in[i] * go;
            if (din) din[i] += wrow[i] * go;
        }
    }
}

// Single-channel 1D cross-correlation, no padding.
inline int conv1d_out_len(int nin, int k, int stride) { return (nin - k) / stride + 1; }

inline void conv1d_forward(const double* in, int nin, const double* weight, double bias, int k,
                           int stride, double* out) {
    const int nout = conv1d_out_len(nin, k, stride);
    for (int i = 0; i < nout; ++i) {
        double s = bias;
        for (int j = 0; j < k; ++j) s += in[i * stride + j] * weight[j];
        out[i] = s;
    }
}

inline void conv1d_backward(const double* in, int nin, const double* weight, int k, int stride,
                            const double* dout, double* din, double* dweight, double* dbias) {
    const int nout = conv1d_out_len(nin, k, stride);
    if (din) std::fill(din, din + nin, 0.0);
    for (int i = 0; i < nout; ++i) {
        const double go = dout[i];
        *dbias += go;
        for (int j = 0; j < k; ++j) {
            dweight[j] += in[i * stride + j] * go;
            if (din) din[i * stride + j] += weight[j] * go;
        }
    }
}

// Nearest-neighbor 4x upsampling.
inline void upsample4_forward(const double* in, int c, int h, int w, double* out) {
    const int ho = h * 4, wo = w * 4;
    for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < ho; ++y)
            for (int x = 0; x < wo; ++x)
                out[(size_t(ch) * ho + y) * wo + x] = in[(size_t(ch) * h + y / 4) * w + x / 4];
}

inline void upsample4_backward(const double* dout, int c, int h, int w, double* din) {
    const int ho = h * 4, wo = w * 4;
    std::fill(din, din + size_t(c) * h * w, 0.0);
    for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < ho; ++y)
            for (int x = 0; x < wo; ++x)
                din[(size_t(ch) * h + y / 4) * w + x / 4] += dout[(size_t(ch) * ho + y) * wo + x];
}

}  // namespace layers

// Uniform Glorot initialization; biases stay zero.
inline void glorot_init(double* w, size_t n, int fan_in, int fan_out, rng::Stream& stream) {
    const double limit = std::sqrt(6.0 / double(fan_in + fan_out));
    for (size_t i = 0; i < n; ++i) w[i] = stream.uniform(-limit, limit);
}

// ---------------------------------------------------------------------------
// Interface models g_a / g_b / g_c.
// ---------------------------------------------------------------------------

enum class InterfaceKind { GA, GB, GC };

inline std::string to_string(InterfaceKind k) {
    switch (k) {
        case InterfaceKind::GA: return "ga";
        case InterfaceKind::GB: return "gb";
        case InterfaceKind::GC: return "gc";
    }
    throw std::logic_error("unreachable interface kind");
}

inline InterfaceKind interface_from_string(const std::string& s) {
    if (s == "ga") return InterfaceKind::GA;
    if (s == "gb") return InterfaceKind::GB;
    if (s == "gc") return InterfaceKind::GC;
    throw std::invalid_argument("unknown interface kind: " + s);
}

// Forward-pass scratch. One workspace per concurrent evaluation.
struct InterfaceWorkspace {
    std::vector<double> input;
    std::vector<double> conv1, pool1, conv2, pool2;  // pre-activation conv outputs
    std::vector<double> relu1, relu2;
    std::vector<int> arg1, arg2;
    std::vector<double> fc1, relu3, out;
    // g_c keeps one block of the above per channel, concatenated.
};

class InterfaceModel {
public:
    InterfaceModel() = default;
    InterfaceModel(InterfaceKind kind, int p_unit, int n_channels = 3, int n_qubits = 4)
        : kind_(kind), n_channels_(n_channels), n_qubits_(n_qubits), p_unit_(p_unit) {
        layout();
        weights_.assign(total_params_, 0.0);
    }

    InterfaceKind kind() const { return kind_; }
    int n_channels() const { return n_channels_; }
    int n_qubits() const { return n_qubits_; }
    int p_unit() const { return p_unit_; }
    int out_dim() const { return kind_ == InterfaceKind::GA ? p_unit_ : n_channels_ * p_unit_; }

    std::vector<double>& weights() { return weights_; }
    const std::vector<double>& weights() const { return weights_; }
    size_t param_count() const { return total_params_; }

    // (cnn, fc) parameter counts by walking the actual weight tensors.
    std::pair<size_t, size_t> count_params() const { return {cnn_params_, fc_params_}; }

    void init_weights(rng::Stream stream) {
        if (kind_ == InterfaceKind::GC) {
            for (int ch = 0; ch < n_channels_; ++ch) {
                auto s = stream.fork("channel", uint64_t(ch));
                init_trunk(per_channel_offset(ch), 1, hidden_, p_unit_, s);
            }
        } else {
            auto s = stream.fork("trunk");
            init_trunk(0, n_channels_, hidden_, out_dim(), s);
        }
    }

    // image: [n_channels, 32, 32] row-major, values in [0, 1].
    std::vector<double> forward(const std::vector<double>& image, InterfaceWorkspace& ws) const {
        if (image.size() != size_t(n_channels_) * 32 * 32)
            throw std::invalid_argument("interface input must be n_channels x 32 x 32");
        if (kind_ == InterfaceKind::GC) return forward_gc(image, ws);
        return forward_trunk(image, ws);
    }

    // Accumulates d(loss)/d(weights) into grad given d(loss)/d(output).
    void backward(const InterfaceWorkspace& ws, const std::vector<double>& dout,
                  std::vector<double>& grad) const {
        if (grad.size() != weights_.size()) throw std::invalid_argument("gradient buffer length mismatch");
        if (dout.size() != size_t(out_dim())) throw std::invalid_argument("output gradient length mismatch");
        if (kind_ == InterfaceKind::GC)
            backward_gc(ws, dout, grad);
        else
            backward_trunk(ws, dout, grad);
    }

private:
    // Shared trunk for g_a / g_b (and per-channel for g_c with cin=1):
    // conv(cin -> 2cin) relu pool4, conv(2cin -> 4cin) relu pool4,
    // flatten, fc(flat -> hidden) relu, fc(hidden -> out).
    struct TrunkDims {
        int cin, c1, c2, flat, hidden, out;
    };

    TrunkDims trunk_dims(int cin, int hidden, int out) const {
        TrunkDims d;
        d.cin = cin;
        d.c1 = 2 * cin;
        d.c2 = 4 * cin;
        d.flat = d.c2 * 2 * 2;
        d.hidden = hidden;
        d.out = out;
        return d;
    }

    void layout() {
        if (p_unit_ <= 0) throw std::invalid_argument("p_unit must be positive");
        if (kind_ == InterfaceKind::GC) {
            const TrunkDims d = trunk_dims(1, 16, p_unit_);
            hidden_ = d.hidden;
            per_channel_params_ = trunk_param_count(d);
            total_params_ = size_t(n_channels_) * per_channel_params_;
            cnn_params_ = size_t(n_channels_) * trunk_cnn_count(d);
            fc_params_ = total_params_ - cnn_params_;
        } else {
            const TrunkDims d = trunk_dims(n_channels_, 16 * n_channels_, out_dim());
            hidden_ = d.hidden;
            total_params_ = trunk_param_count(d);
            cnn_params_ = trunk_cnn_count(d);
            fc_params_ = total_params_ - cnn_params_;
        }
    }

    static size_t trunk_cnn_count(const TrunkDims& d) {
        return size_t(d.c1) * d.cin * 9 + d.c1 + size_t(d.c2) * d.c1 * 9 + d.c2;
    }
    static size_t trunk_param_count(const TrunkDims& d) {
        return trunk_cnn_count(d) + size_t(d.hidden) * d.flat + d.hidden + size_t(d.out) * d.hidden + d.out;
    }

    size_t per_channel_offset(int ch) const { return size_t(ch) * per_channel_params_; }

    struct TrunkOffsets {
        size_t w1, b1, w2, b2, wf1, bf1, wf2, bf2;
    };

    TrunkOffsets trunk_offsets(size_t base, const TrunkDims& d) const {
        TrunkOffsets o;
        o.w1 = base;
        o.b1 = o.w1 + size_t(d.c1) * d.cin * 9;
        o.w2 = o.b1 + d.c1;
        o.b2 = o.w2 + size_t(d.c2) * d.c1 * 9;
        o.wf1 = o.b2 + d.c2;
        o.bf1 = o.wf1 + size_t(d.hidden) * d.flat;
        o.wf2 = o.bf1 + d.hidden;
        o.bf2 = o.wf2 + size_t(d.out) * d.hidden;
        return o;
    }

    void init_trunk(size_t base, int cin, int hidden, int out, rng::Stream& s) {
        const TrunkDims d = trunk_dims(cin, hidden, out);
        const TrunkOffsets o = trunk_offsets(base, d);
        glorot_init(&weights_[o.w1], size_t(d.c1) * d.cin * 9, d.cin * 9, d.c1 * 9, s);
        glorot_init(&weights_[o.w2], size_t(d.c2) * d.c1 * 9, d.c1 * 9, d.c2 * 9, s);
        glorot_init(&weights_[o.wf1], size_t(d.hidden) * d.flat, d.flat, d.hidden, s);
        glorot_init(&weights_[o.wf2], size_t(d.out) * d.hidden, d.hidden, d.out, s);
    }

    std::vector<double> run_trunk(const double* image, size_t base, const TrunkDims& d,
                                  InterfaceWorkspace& ws, size_t ws_base) const;
    std::vector<double> forward_trunk(const std::vector<double>& image, InterfaceWorkspace& ws) const;
    std::vector<double> forward_gc(const std::vector<double>& image, InterfaceWorkspace& ws) const;
    void backward_trunk_impl(const double* input, size_t base, const TrunkDims& d,
                             const InterfaceWorkspace& ws, size_t ws_base, const double* dout,
                             std::vector<double>& grad) const;
    void backward_trunk(const InterfaceWorkspace& ws, const std::vector<double>& dout,
                        std::vector<double>& grad) const;
    void backward_gc(const InterfaceWorkspace& ws, const std::vector<double>& dout,
                     std::vector<double>& grad) const;

    InterfaceKind kind_ = InterfaceKind::GA;
    int n_channels_ = 3;
    int n_qubits_ = 4;
    int p_unit_ = 8;
    int hidden_ = 48;
    size_t per_channel_params_ = 0;
    size_t total_params_ = 0;
    size_t cnn_params_ = 0;
    size_t fc_params_ = 0;
    std::vector<double> weights_;
};

// Sizes of the trunk intermediates for workspace slicing.
namespace detail {
struct TrunkSizes {
    size_t in, conv1, pool1, conv2, pool2, fc1, out;
};
inline TrunkSizes trunk_sizes(int cin, int hidden, int out) {
    TrunkSizes s;
    s.in = size_t(cin) * 32 * 32;
    s.conv1 = size_t(2 * cin) * 32 * 32;
    s.pool1 = size_t(2 * cin) * 8 * 8;
    s.conv2 = size_t(4 * cin) * 8 * 8;
    s.pool2 = size_t(4 * cin) * 2 * 2;
    s.fc1 = size_t(hidden);
    s.out = size_t(out);
    return s;
}
}  // namespace detail

inline std::vector<double> InterfaceModel::run_trunk(const double* image, size_t base,
                                                     const TrunkDims& d, InterfaceWorkspace& ws,
                                                     size_t /*ws_base*/) const {
    const TrunkOffsets o = trunk_offsets(base, d);
    namespace L = layers;

    const size_t n_in = size_t(d.cin) * 32 * 32;
    ws.input.insert(ws.input.end(), image, image + n_in);

    std::vector<double> conv1(size_t(d.c1) * 32 * 32), relu1(conv1.size());
    L::conv2d_forward(image, d.cin, 32, 32, &weights_[o.w1], &weights_[o.b1], d.c1, conv1.data());
    L::relu_forward(conv1.data(), conv1.size(), relu1.data());

    std::vector<double> pool1(size_t(d.c1) * 8 * 8);
    std::vector<int> arg1(pool1.size());
    L::maxpool4_forward(relu1.data(), d.c1, 32, 32, pool1.data(), arg1.data());

    std::vector<double> conv2(size_t(d.c2) * 8 * 8), relu2(conv2.size());
    L::conv2d_forward(pool1.data(), d.c1, 8, 8, &weights_[o.w2], &weights_[o.b2], d.c2, conv2.data());
    L::relu_forward(conv2.data(), conv2.size(), relu2.data());

    std::vector<double> pool2(size_t(d.c2) * 2 * 2);
    std::vector<int> arg2(pool2.size());
    L::maxpool4_forward(relu2.data(), d.c2, 8, 8, pool2.data(), arg2.data());

    std::vector<double> fc1(d.hidden), relu3(d.hidden);
    L::linear_forward(pool2.data(), d.flat, &weights_[o.wf1], &weights_[o.bf1], d.hidden, fc1.data());
    L::relu_forward(fc1.data(), fc1.size(), relu3.data());

    std::vector<double> out(d.out);
    L::linear_forward(relu3.data(), d.hidden, &weights_[o.wf2], &weights_[o.bf2], d.out, out.data());

    auto append = [](std::vector<double>& dst, const std::vector<double>& src) {
        dst.insert(dst.end(), src.begin(), src.end());
    };
    append(ws.conv1, conv1);
    append(ws.pool1, pool1);
    ws.arg1.insert(ws.arg1.end(), arg1.begin(), arg1.end());
    append(ws.conv2, conv2);
    append(ws.pool2, pool2);
    ws.arg2.insert(ws.arg2.end(), arg2.begin(), arg2.end());
    append(ws.fc1, fc1);
    append(ws.out, out);
    return out;
}

inline std::vector<double> InterfaceModel::forward_trunk(const std::vector<double>& image,
                                                         InterfaceWorkspace& ws) const {
    ws = InterfaceWorkspace{};
    const TrunkDims d = trunk_dims(n_channels_, hidden_, out_dim());
    return run_trunk(image.data(), 0, d, ws, 0);
}

inline std::vector<double> InterfaceModel::forward_gc(const std::vector<double>& image,
                                                      InterfaceWorkspace& ws) const {
    ws = InterfaceWorkspace{};
    const TrunkDims d = trunk_dims(1, hidden_, p_unit_);
    std::vector<double> out;
    out.reserve(size_t(out_dim()));
    for (int ch = 0; ch < n_channels_; ++ch) {
        const std::vector<double> part =
            run_trunk(image.data() + size_t(ch) * 32 * 32, per_channel_offset(ch), d, ws, 0);
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

inline void InterfaceModel::backward_trunk_impl(const double* input, size_t base, const TrunkDims& d,
                                                const InterfaceWorkspace& ws, size_t ws_index,
                                                const double* dout, std::vector<double>& grad) const {
    const TrunkOffsets o = trunk_offsets(base, d);
    const detail::TrunkSizes s = detail::trunk_sizes(d.cin, d.hidden, d.out);
    namespace L = layers;

    // Slice bases select the channel block for g_c; 0 for the shared trunk.
    const double* conv1 = ws.conv1.data() + ws_index * s.conv1;
    const double* pool1 = ws.pool1.data() + ws_index * s.pool1;
    const int* arg1 = ws.arg1.data() + ws_index * s.pool1;
    const double* conv2 = ws.conv2.data() + ws_index * s.conv2;
    const double* pool2 = ws.pool2.data() + ws_index * s.pool2;
    const int* arg2 = ws.arg2.data() + ws_index * s.pool2;
    const double* fc1 = ws.fc1.data() + ws_index * s.fc1;

    std::vector<double> relu3(d.hidden);
    L::relu_forward(fc1, size_t(d.hidden), relu3.data());

    std::vector<double> drelu3(d.hidden);
    L::linear_backward(relu3.data(), d.hidden, &weights_[o.wf2], d.out, dout, drelu3.data(),
                       &grad[o.wf2], &grad[o.bf2]);

    std::vector<double> dfc1(d.hidden);
    L::relu_backward(fc1, drelu3.data(), size_t(d.hidden), dfc1.data());

    std::vector<double> dpool2(s.pool2);
    L::linear_backward(pool2, d.flat, &weights_[o.wf1], d.hidden, dfc1.data(), dpool2.data(),
                       &grad[o.wf1], &grad[o.bf1]);

    std::vector<double> drelu2(s.conv2);
    L::maxpool4_backward(dpool2.data(), d.c2, 8, 8, arg2, drelu2.data());
    std::vector<double> dconv2(s.conv2);
    L::relu_backward(conv2, drelu2.data(), s.conv2, dconv2.data());

    std::vector<double> dpool1(s.pool1);
    L::conv2d_backward(pool1, d.c1, 8, 8, &weights_[o.w2], d.c2, dconv2.data(), dpool1.data(),
                       &grad[o.w2], &grad[o.b2]);

    std::vector<double> drelu1(s.conv1);
    L::maxpool4_backward(dpool1.data(), d.c1, 32, 32, arg1, drelu1.data());
    std::vector<double> dconv1(s.conv1);
    L::relu_backward(conv1, drelu1.data(), s.conv1, dconv1.data());

    // No input gradient needed: images are data, not parameters.
    L::conv2d_backward(input, d.cin, 32, 32, &weights_[o.w1], d.c1, dconv1.data(), nullptr,
                       &grad[o.w1], &grad[o.b1]);
}

inline void InterfaceModel::backward_trunk(const InterfaceWorkspace& ws,
                                           const std::vector<double>& dout,
                                           std::vector<double>& grad) const {
    const TrunkDims d = trunk_dims(n_channels_, hidden_, out_dim());
    backward_trunk_impl(ws.input.data(), 0, d, ws, 0, dout.data(), grad);
}

inline void InterfaceModel::backward_gc(const InterfaceWorkspace& ws, const std::vector<double>& dout,
                                        std::vector<double>& grad) const {
    const TrunkDims d = trunk_dims(1, hidden_, p_unit_);
    const detail::TrunkSizes s = detail::trunk_sizes(1, hidden_, p_unit_);
    for (int ch = 0; ch < n_channels_; ++ch) {
        backward_trunk_impl(ws.input.data() + size_t(ch) * s.in, per_channel_offset(ch), d, ws,
                            size_t(ch), dout.data() + size_t(ch) * p_unit_, grad);
    }
}

// ---------------------------------------------------------------------------
// Classical baseline heads.
// ---------------------------------------------------------------------------

enum class HeadKind { Linear, Bottleneck, Conv1d };

inline std::string to_string(HeadKind k) {
    switch (k) {
        case HeadKind::Linear: return "linear";
        case HeadKind::Bottleneck: return "bottleneck";
        case HeadKind::Conv1d: return "conv1d";
    }
    throw std::logic_error("unreachable head kind");
}

inline HeadKind head_from_string(const std::string& s) {
    if (s == "linear") return HeadKind::Linear;
    if (s == "bottleneck") return HeadKind::Bottleneck;
    if (s == "conv1d") return HeadKind::Conv1d;
    throw std::invalid_argument("unknown baseline head kind: " + s);
}

struct HeadWorkspace {
    std::vector<double> input;
    std::vector<std::vector<double>> pre;  // pre-activation outputs per stage
    std::vector<double> logits;
};

// The six Table-8a heads: three per input width (8 for g_a features, 24 for
// g_b/g_c). The deep 1D-conv head uses strides (3, 2, 1) so its length chain
// 24 -> 8 -> 4 -> 3 feeds Linear(3, 2).
class BaselineHead {
public:
    BaselineHead() = default;
    BaselineHead(HeadKind kind, int in_dim) : kind_(kind), in_dim_(in_dim) {
        if (in_dim != 8 && in_dim != 24) throw std::invalid_argument("baseline head input must be 8 or 24");
        build_stages();
        weights_.assign(total_params_, 0.0);
    }

    HeadKind kind() const { return kind_; }
    int in_dim() const { return in_dim_; }
    size_t param_count() const { return total_params_; }
    std::vector<double>& weights() { return weights_; }
    const std::vector<double>& weights() const { return weights_; }

    void init_weights(rng::Stream stream) {
        for (const auto& st : stages_) {
            if (st.type == Stage::LinearT)
                glorot_init(&weights_[st.w_off], size_t(st.out) * st.in, st.in, st.out, stream);
            else
                glorot_init(&weights_[st.w_off], size_t(st.k), st.k, 1, stream);
        }
    }

    std::vector<double> forward(const std::vector<double>& feats, HeadWorkspace& ws) const {
        if (static_cast<int>(feats.size()) != in_dim_)
            throw std::invalid_argument("baseline head input length mismatch");
        ws = HeadWorkspace{};
        ws.input = feats;
        std::vector<double> cur = feats;
        for (size_t i = 0; i < stages_.size(); ++i) {
            const auto& st = stages_[i];
            std::vector<double> next(st.out);
            if (st.type == Stage::LinearT)
                layers::linear_forward(cur.data(), st.in, &weights_[st.w_off], &weights_[st.b_off],
                                       st.out, next.data());
            else
                layers::conv1d_forward(cur.data(), st.in, &weights_[st.w_off], weights_[st.b_off],
                                       st.k, st.stride, next.data());
            ws.pre.push_back(next);
            if (st.relu_after) {
                std::vector<double> act(next.size());
                layers::relu_forward(next.data(), next.size(), act.data());
                cur = std::move(act);
            } else {
                cur = std::move(next);
            }
        }
        ws.logits = cur;
        return cur;
    }

    void backward(const HeadWorkspace& ws, const std::vector<double>& dlogits,
                  std::vector<double>& grad) const {
        std::vector<double> dcur = dlogits;
        for (size_t i = stages_.size(); i-- > 0;) {
            const auto& st = stages_[i];
            std::vector<double> dpre;
            if (st.relu_after) {
                dpre.resize(ws.pre[i].size());
                layers::relu_backward(ws.pre[i].data(), dcur.data(), dpre.size(), dpre.data());
            } else {
                dpre = dcur;
            }
            const std::vector<double> in = stage_input(ws, i);
            std::vector<double> din(st.in);
            if (st.type == Stage::LinearT)
                layers::linear_backward(in.data(), st.in, &weights_[st.w_off], st.out, dpre.data(),
                                        din.data(), &grad[st.w_off], &grad[st.b_off]);
            else
                layers::conv1d_backward(in.data(), st.in, &weights_[st.w_off], st.k, st.stride,
                                        dpre.data(), din.data(), &grad[st.w_off], &grad[st.b_off]);
            dcur = std::move(din);
        }
    }

private:
    struct Stage {
        enum Type { LinearT, Conv1dT } type;
        int in, out, k, stride;
        bool relu_after;
        size_t w_off, b_off;
    };

    std::vector<double> stage_input(const HeadWorkspace& ws, size_t i) const {
        if (i == 0) return ws.input;
        const auto& prev = stages_[i - 1];
        if (!prev.relu_after) return ws.pre[i - 1];
        std::vector<double> act(ws.pre[i - 1].size());
        layers::relu_forward(ws.pre[i - 1].data(), act.size(), act.data());
        return act;
    }

    void add_linear(int in, int out, bool relu) {
        Stage st{Stage::LinearT, in, out, 0, 1, relu, next_off_, next_off_ + size_t(in) * out};
        next_off_ = st.b_off + out;
        stages_.push_back(st);
    }
    void add_conv1d(int in, int k, int stride, bool relu) {
        Stage st{Stage::Conv1dT, in, layers::conv1d_out_len(in, k, stride), k, stride, relu,
                 next_off_, next_off_ + size_t(k)};
        next_off_ = st.b_off + 1;
        stages_.push_back(st);
    }

    void build_stages() {
        next_off_ = 0;
        switch (kind_) {
            case HeadKind::Linear:
                add_linear(in_dim_, 2, false);
                break;
            case HeadKind::Bottleneck:
                add_linear(in_dim_, 1, true);
                add_linear(1, 2, false);
                break;
            case HeadKind::Conv1d:
                if (in_dim_ == 8) {
                    add_conv1d(8, 6, 1, true);
                    add_linear(3, 2, false);
                } else {
                    add_conv1d(24, 3, 3, true);
                    add_conv1d(8, 2, 2, true);
                    add_conv1d(4, 2, 1, true);
                    add_linear(3, 2, false);
                }
                break;
        }
        total_params_ = next_off_;
    }

    HeadKind kind_ = HeadKind::Linear;
    int in_dim_ = 8;
    std::vector<Stage> stages_;
    size_t next_off_ = 0;
    size_t total_params_ = 0;
    std::vector<double> weights_;
};

inline std::vector<double> softmax(const std::vector<double>& logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double z = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) z += (p[i] = std::exp(logits[i] - m));
    for (auto& v : p) v /= z;
    return p;
}

// Returns loss; fills dlogits with softmax - onehot(label).
inline double cross_entropy(const std::vector<double>& logits, int label, std::vector<double>& dlogits) {
    const std::vector<double> p = softmax(logits);
    dlogits = p;
    dlogits[label] -= 1.0;
    return -std::log(std::max(p[label], 1e-300));
}

// ---------------------------------------------------------------------------
// Convolutional autoencoder (dimensionality-reduction baseline).
// ---------------------------------------------------------------------------

struct AutoencoderWorkspace {
    InterfaceWorkspace enc;
    std::vector<double> latent;
    std::vector<std::vector<double>> dec;  // pre-activation outputs per stage
    std::vector<double> recon;
};

// Encoder = interface model (g_a or g_c shape, latent 8 per branch); decoder
// mirrors it with nearest-neighbor 4x upsampling before each conv.
class Autoencoder {
public:
    Autoencoder() = default;
    Autoencoder(InterfaceKind kind, int n_channels = 3)
        : kind_(kind), encoder_(kind, 8, n_channels) {
        if (kind == InterfaceKind::GB) throw std::invalid_argument("autoencoder supports ga and gc shapes");
        n_channels_ = n_channels;
        layout_decoder();
    }

    const InterfaceModel& encoder() const { return encoder_; }
    InterfaceModel& encoder() { return encoder_; }
    int latent_dim() const { return encoder_.out_dim(); }
    size_t param_count() const { return encoder_.param_count() + dec_weights_.size(); }

    void init_weights(rng::Stream stream) {
        encoder_.init_weights(stream.fork("encoder"));
        auto s = stream.fork("decoder");
        for (const auto& st : dec_stages_) {
            const int fan_in = st.is_conv ? st.cin * 9 : st.in;
            const int fan_out = st.is_conv ? st.cout * 9 : st.out;
            glorot_init(&dec_weights_[st.w_off], st.w_count, fan_in, fan_out, s);
        }
    }

    std::vector<double>& decoder_weights() { return dec_weights_; }
    const std::vector<double>& decoder_weights() const { return dec_weights_; }

    std::vector<double> forward(const std::vector<double>& image, AutoencoderWorkspace& ws) const {
        ws = AutoencoderWorkspace{};
        ws.latent = encoder_.forward(image, ws.enc);
        ws.recon = decode(ws.latent, ws);
        return ws.recon;
    }

    // MSE over pixels plus gradient accumulation into both weight buffers.
    double step(const std::vector<double>& image, AutoencoderWorkspace& ws,
                std::vector<double>& enc_grad, std::vector<double>& dec_grad) const {
        forward(image, ws);
        const size_t n = image.size();
        double mse = 0.0;
        std::vector<double> drecon(n);
        for (size_t i = 0; i < n; ++i) {
            const double d = ws.recon[i] - image[i];
            mse += d * d;
            drecon[i] = 2.0 * d / double(n);
        }
        mse /= double(n);
        const std::vector<double> dlatent = decode_backward(ws, drecon, dec_grad);
        encoder_.backward(ws.enc, dlatent, enc_grad);
        return mse;
    }

    double mse(const std::vector<double>& image) const {
        AutoencoderWorkspace ws;
        forward(image, ws);
        double s = 0.0;
        for (size_t i = 0; i < image.size(); ++i) {
            const double d = ws.recon[i] - image[i];
            s += d * d;
        }
        return s / double(image.size());
    }

private:
    // Decoder branch (per channel for gc, single for ga):
    // fc(latent -> hidden) relu, fc(hidden -> flat) relu, reshape [4c,2,2],
    // up4, conv(4c -> 2c) relu, up4, conv(2c -> cout) linear.
    struct DecStage {
        bool is_conv;
        bool relu_after;
        bool upsample_before;
        int in, out;       // linear dims
        int cin, cout, hw;  // conv dims (hw = input spatial size after upsample)
        size_t w_off, b_off, w_count;
    };

    void add_dec_linear(int in, int out, bool relu) {
        DecStage st{};
        st.is_conv = false;
        st.relu_after = relu;
        st.in = in;
        st.out = out;
        st.w_off = dec_next_;
        st.w_count = size_t(out) * in;
        st.b_off = st.w_off + st.w_count;
        dec_next_ = st.b_off + out;
        dec_stages_.push_back(st);
    }
    void add_dec_conv(int cin, int cout, int hw_in, bool relu) {
        DecStage st{};
        st.is_conv = true;
        st.relu_after = relu;
        st.upsample_before = true;
        st.cin = cin;
        st.cout = cout;
        st.hw = hw_in * 4;
        st.w_off = dec_next_;
        st.w_count = size_t(cout) * cin * 9;
        st.b_off = st.w_off + st.w_count;
        dec_next_ = st.b_off + cout;
        dec_stages_.push_back(st);
    }

    void layout_decoder() {
        dec_next_ = 0;
        dec_stages_.clear();
        branches_ = (kind_ == InterfaceKind::GC) ? n_channels_ : 1;
        const int cin_enc = (kind_ == InterfaceKind::GC) ? 1 : n_channels_;
        const int hidden = (kind_ == InterfaceKind::GC) ? 16 : 16 * n_channels_;
        const int flat = 16 * cin_enc;
        for (int b = 0; b < branches_; ++b) {
            add_dec_linear(8, hidden, true);
            add_dec_linear(hidden, flat, true);
            add_dec_conv(4 * cin_enc, 2 * cin_enc, 2, true);
            add_dec_conv(2 * cin_enc, cin_enc, 8, false);
        }
        dec_weights_.assign(dec_next_, 0.0);
        stages_per_branch_ = dec_stages_.size() / size_t(branches_);
    }

    std::vector<double> decode(const std::vector<double>& latent, AutoencoderWorkspace& ws) const {
        const int latent_per = 8;
        std::vector<double> recon;
        for (int b = 0; b < branches_; ++b) {
            std::vector<double> cur(latent.begin() + b * latent_per, latent.begin() + (b + 1) * latent_per);
            for (size_t s = 0; s < stages_per_branch_; ++s) {
                const auto& st = dec_stages_[b * stages_per_branch_ + s];
                std::vector<double> next;
                if (!st.is_conv) {
                    next.resize(st.out);
                    layers::linear_forward(cur.data(), st.in, &dec_weights_[st.w_off],
                                           &dec_weights_[st.b_off], st.out, next.data());
                } else {
                    std::vector<double> up(size_t(st.cin) * st.hw * st.hw);
                    layers::upsample4_forward(cur.data(), st.cin, st.hw / 4, st.hw / 4, up.data());
                    ws.dec.push_back(up);  // cache upsampled input for backward
                    next.resize(size_t(st.cout) * st.hw * st.hw);
                    layers::conv2d_forward(up.data(), st.cin, st.hw, st.hw, &dec_weights_[st.w_off],
                                           &dec_weights_[st.b_off], st.cout, next.data());
                }
                ws.dec.push_back(next);
                if (st.relu_after) {
                    std::vector<double> act(next.size());
                    layers::relu_forward(next.data(), next.size(), act.data());
                    cur = std::move(act);
                } else {
                    cur = std::move(next);
                }
            }
            recon.insert(recon.end(), cur.begin(), cur.end());
        }
        return recon;
    }

    std::vector<double> decode_backward(const AutoencoderWorkspace& ws, const std::vector<double>& drecon,
                                        std::vector<double>& dec_grad) const {
        if (dec_grad.size() != dec_weights_.size())
            throw std::invalid_argument("decoder gradient buffer length mismatch");
        const int latent_per = 8;
        std::vector<double> dlatent(size_t(branches_) * latent_per);
        const size_t out_per_branch = drecon.size() / size_t(branches_);

        // Rebuild the cache walk: ws.dec holds, per branch in order, for each
        // stage either [pre] (linear) or [upsampled, pre] (conv).
        size_t cache_idx = 0;
        std::vector<std::vector<const std::vector<double>*>> pre(branches_);
        std::vector<std::vector<const std::vector<double>*>> ups(branches_);
        for (int b = 0; b < branches_; ++b) {
            pre[b].resize(stages_per_branch_);
            ups[b].resize(stages_per_branch_);
            for (size_t s = 0; s < stages_per_branch_; ++s) {
                const auto& st = dec_stages_[b * stages_per_branch_ + s];
                if (st.is_conv) ups[b][s] = &ws.dec[cache_idx++];
                pre[b][s] = &ws.dec[cache_idx++];
            }
        }

        for (int b = 0; b < branches_; ++b) {
            std::vector<double> dcur(drecon.begin() + b * out_per_branch,
                                     drecon.begin() + (b + 1) * out_per_branch);
            for (size_t s = stages_per_branch_; s-- > 0;) {
                const auto& st = dec_stages_[b * stages_per_branch_ + s];
                std::vector<double> dpre;
                if (st.relu_after) {
                    dpre.resize(pre[b][s]->size());
                    layers::relu_backward(pre[b][s]->data(), dcur.data(), dpre.size(), dpre.data());
                } else {
                    dpre = dcur;
                }
                if (!st.is_conv) {
                    const std::vector<double> in = stage_in(ws, pre, b, s, latent_per);
                    std::vector<double> din(st.in);
                    layers::linear_backward(in.data(), st.in, &dec_weights_[st.w_off], st.out,
                                            dpre.data(), din.data(), &dec_grad[st.w_off],
                                            &dec_grad[st.b_off]);
                    dcur = std::move(din);
                } else {
                    std::vector<double> dup(ups[b][s]->size());
                    layers::conv2d_backward(ups[b][s]->data(), st.cin, st.hw, st.hw,
                                            &dec_weights_[st.w_off], st.cout, dpre.data(), dup.data(),
                                            &dec_grad[st.w_off], &dec_grad[st.b_off]);
                    std::vector<double> din(size_t(st.cin) * (st.hw / 4) * (st.hw / 4));
                    layers::upsample4_backward(dup.data(), st.cin, st.hw / 4, st.hw / 4, din.data());
                    dcur = std::move(din);
                }
            }
            std::copy(dcur.begin(), dcur.end(), dlatent.begin() + b * latent_per);
        }
        return dlatent;
    }

    std::vector<double> stage_in(const AutoencoderWorkspace& ws,
                                 const std::vector<std::vector<const std::vector<double>*>>& pre,
                                 int b, size_t s, int latent_per) const {
        if (s == 0) {
            return std::vector<double>(ws.latent.begin() + b * latent_per,
                                       ws.latent.begin() + (b + 1) * latent_per);
        }
        const auto* prev = pre[b][s - 1];
        const auto& prev_st = dec_stages_[b * stages_per_branch_ + (s - 1)];
        if (!prev_st.relu_after) return *prev;
        std::vector<double> act(prev->size());
        layers::relu_forward(prev->data(), act.size(), act.data());
        return act;
    }

    InterfaceKind kind_ = InterfaceKind::GA;
    int n_channels_ = 3;
    int branches_ = 1;
    size_t stages_per_branch_ = 0;
    InterfaceModel encoder_;
    std::vector<DecStage> dec_stages_;
    size_t dec_next_ = 0;
    std::vector<double> dec_weights_;
};

// ---------------------------------------------------------------------------
// Finite-difference gradient verification.
// ---------------------------------------------------------------------------

// Central differences per coordinate against the supplied analytic gradient.
// Returns the max of |analytic - fd| / max(|fd|, 1e-6). The check assumes the
// function is differentiable at w; coordinates whose one-sided differences
// disagree (a ReLU kink or pooling tie inside [w_i - h, w_i + h], where no
// true gradient exists and the central difference is not an oracle) are
// excluded from the maximum.
inline double grad_check(const std::function<double(const std::vector<double>&)>& f,
                         std::vector<double> w, const std::vector<double>& analytic_grad,
                         double h = 1e-5) {
    if (w.size() != analytic_grad.size()) throw std::invalid_argument("grad_check length mismatch");
    const double f0 = f(w);
    double worst = 0.0;
    for (size_t i = 0; i < w.size(); ++i) {
        const double keep = w[i];
        w[i] = keep + h;
        const double fp = f(w);
        w[i] = keep - h;
        const double fm = f(w);
        w[i] = keep;
        const double fd = (fp - fm) / (2.0 * h);
        const double left = (f0 - fm) / h;
        const double right = (fp - f0) / h;
        if (std::abs(right - left) > 1e-3 * std::max(1.0, std::abs(fd))) continue;
        const double err = std::abs(analytic_grad[i] - fd) / std::max(std::abs(fd), 1e-6);
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace cnqe::nn
