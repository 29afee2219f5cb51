// Executable Fourier analysis of layered diagonal data encodings: enumerate
// the frequency spectrum and path coefficients of U = W_1 D(x_1) W_2 ... W_L
// D(x_L) W_{L+1} acting on |0..0>, and reconstruct amplitudes as sums of
// exponentials for verification against direct simulation.

#pragma once

#include <bit>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "cnqe/embeddings.hpp"
#include "cnqe/qsim.hpp"

namespace cnqe::fourier {

using qsim::StateVector;

// One term of a diagonal data-dependent generator: the encoding layer applies
// exp(i * coefficient * x[component] * Z_support) where Z_support is the
// product of Pauli Z over the masked qubits. The canonical single-qubit
// R_Z(x) encoding has coefficient -1/2 and a one-qubit mask.
struct DiagonalTerm {
    int component = 0;   // index into the input vector
    uint32_t z_mask = 0; // bit q set = Z on qubit q (qubit 0 = MSB convention)
    double coefficient = -0.5;
};

struct EncodingLayer {
    std::vector<DiagonalTerm> terms;
};

struct EncodingLayout {
    int n_qubits = 0;
    int input_dim = 0;
    std::vector<CMatrix> interleavers;  // L + 1 unitaries, applied W_{L+1} first
    std::vector<EncodingLayer> layers;  // L diagonal encoding layers

    void check() const {
        if (interleavers.size() != layers.size() + 1)
            throw std::invalid_argument("layout needs L+1 interleavers for L layers");
        const int dim = 1 << n_qubits;
        for (const auto& w : interleavers)
            if (w.rows() != dim || w.cols() != dim || !w.is_unitary(1e-10))
                throw std::invalid_argument("interleaver is not a 2^n unitary");
        for (const auto& layer : layers)
            for (const auto& t : layer.terms)
                if (t.component < 0 || t.component >= input_dim)
                    throw std::invalid_argument("term component outside input dimension");
    }

    // Per-qubit R_Z(x_component) encoding layer covering each qubit once.
    static EncodingLayer rz_layer(const std::vector<int>& components, int n_qubits) {
        if (static_cast<int>(components.size()) != n_qubits)
            throw std::invalid_argument("rz_layer assignment must cover each qubit exactly once");
        EncodingLayer layer;
        for (int q = 0; q < n_qubits; ++q)
            layer.terms.push_back({components[q], uint32_t(1) << (n_qubits - 1 - q), -0.5});
        return layer;
    }
};

struct SpectrumEntry {
    std::vector<double> h;  // frequency coefficient per input component
    cdouble c;              // path coefficient for the chosen amplitude index
};

namespace detail {

// Eigenvalue sign of a Z-product at basis index k: +1 when the masked bits
// have even parity.
inline double z_sign(uint32_t z_mask, uint32_t k) {
    return (std::popcount(z_mask & k) % 2 == 0) ? 1.0 : -1.0;
}

inline std::vector<double> layer_h(const EncodingLayer& layer, uint32_t k, int input_dim) {
    std::vector<double> h(input_dim, 0.0);
    for (const auto& t : layer.terms) h[t.component] += t.coefficient * z_sign(t.z_mask, k);
    return h;
}

}  // namespace detail

// One entry per index tuple (k_1 .. k_L); paths end at the |0..0> column.
// Guard: n*L <= 16 so the 2^{nL} tuples stay enumerable.
inline std::vector<SpectrumEntry> enumerate_spectrum(const EncodingLayout& layout, int amplitude_index) {
    layout.check();
    const int n = layout.n_qubits;
    const int L = static_cast<int>(layout.layers.size());
    if (n * L > 16) throw std::invalid_argument("spectrum guard: n_qubits * layers must be <= 16");
    const uint32_t dim = uint32_t(1) << n;
    if (amplitude_index < 0 || uint32_t(amplitude_index) >= dim)
        throw std::invalid_argument("amplitude index out of range");

    std::vector<SpectrumEntry> entries;
    std::vector<uint32_t> tuple(L, 0);
    const uint64_t total = uint64_t(1) << (n * L);
    entries.reserve(total);
    for (uint64_t code = 0; code < total; ++code) {
        uint64_t rem = code;
        for (int l = 0; l < L; ++l) {
            tuple[l] = uint32_t(rem & (dim - 1));
            rem >>= n;
        }
        SpectrumEntry e;
        e.h.assign(layout.input_dim, 0.0);
        cdouble c = layout.interleavers[0](amplitude_index, int(tuple[0]));
        for (int l = 0; l < L; ++l) {
            const auto h = detail::layer_h(layout.layers[l], tuple[l], layout.input_dim);
            for (int j = 0; j < layout.input_dim; ++j) e.h[j] += h[j];
            const int next = (l + 1 < L) ? int(tuple[l + 1]) : 0;
            c *= layout.interleavers[l + 1](int(tuple[l]), next);
        }
        e.c = c;
        entries.push_back(std::move(e));
    }
    return entries;
}

inline cdouble reconstruct_amplitude(const std::vector<SpectrumEntry>& spectrum,
                                     const std::vector<double>& x) {
    cdouble s{};
    for (const auto& e : spectrum) {
        if (e.h.size() != x.size()) throw std::invalid_argument("input length does not match spectrum");
        double phase = 0.0;
        for (size_t j = 0; j < x.size(); ++j) phase += e.h[j] * x[j];
        s += e.c * std::polar(1.0, phase);
    }
    return s;
}

// Direct statevector evaluation of the layout at input x; the reconstruction
// oracle. Application order: W_{L+1}, then layer L, W_L, ..., layer 1, W_1.
inline StateVector evaluate_layout(const EncodingLayout& layout, const std::vector<double>& x) {
    layout.check();
    if (static_cast<int>(x.size()) != layout.input_dim)
        throw std::invalid_argument("input length does not match layout");
    const int n = layout.n_qubits;
    const uint32_t dim = uint32_t(1) << n;
    StateVector s(n);
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;

    const int L = static_cast<int>(layout.layers.size());
    qsim::apply_gate_inplace(s, layout.interleavers[L], all);
    for (int l = L - 1; l >= 0; --l) {
        for (uint32_t k = 0; k < dim; ++k) {
            double phase = 0.0;
            for (const auto& t : layout.layers[l].terms)
                phase += t.coefficient * x[t.component] * detail::z_sign(t.z_mask, k);
            s.amps[k] *= std::polar(1.0, phase);
        }
        qsim::apply_gate_inplace(s, layout.interleavers[l], all);
    }
    return s;
}

// Merge duplicate frequency vectors, summing coefficients. Component-wise
// equality within 1e-12 (sign patterns are exact multiples; the tolerance
// guards float noise in folded layouts).
inline std::vector<SpectrumEntry> merge_spectrum(const std::vector<SpectrumEntry>& spectrum) {
    std::vector<SpectrumEntry> merged;
    for (const auto& e : spectrum) {
        bool found = false;
        for (auto& m : merged) {
            bool same = true;
            for (size_t j = 0; j < e.h.size(); ++j)
                if (std::abs(e.h[j] - m.h[j]) > 1e-12) {
                    same = false;
                    break;
                }
            if (same) {
                m.c += e.c;
                found = true;
                break;
            }
        }
        if (!found) merged.push_back(e);
    }
    return merged;
}

struct SpectrumSummary {
    size_t distinct_frequencies = 0;
    double max_degree = 0.0;  // max over entries of sum_j |h_j|
};

// ---------------------------------------------------------------------------
// Normal-form decomposition of the library feature maps. Only Z-diagonal
// encodings qualify; X/Y rotations are conjugated to Z and the basis changes
// folded into the interleavers. Families with data-dependent controlled gates
// (the Lorentz maps) do not decompose.
// ---------------------------------------------------------------------------

namespace detail {

inline CMatrix kron_power(const CMatrix& m, int n) {
    CMatrix out = m;
    for (int i = 1; i < n; ++i) out = out.kron(m);
    return out;
}

// V with V Z V^dag = P for the rotation axis P, so exp(i a P) = V exp(i a Z) V^dag.
inline CMatrix axis_conjugator(embed::Axis axis) {
    namespace g = qsim::gates;
    if (axis == embed::Axis::X) return g::hadamard();
    // S H: maps Z to Y.
    CMatrix s(2, 2);
    s(0, 0) = 1.0;
    s(1, 1) = cdouble(0, 1);
    return s * g::hadamard();
}

}  // namespace detail

// Express a supported feature map as an encoding layout. The feature value of
// component j enters with coefficient +1 per Z factor (builders encode
// exp(+i theta P)), so terms carry coefficient +1 instead of the canonical -1/2.
inline EncodingLayout layout_of_embedding(embed::FeatureMapKind kind, int n) {
    using embed::Axis;
    using embed::FeatureMapKind;
    namespace g = qsim::gates;

    EncodingLayout layout;
    layout.n_qubits = n;
    layout.input_dim = embed::unit_param_count(kind, n);
    const int dim = 1 << n;

    auto zz_layer = [&](int offset) {
        EncodingLayer layer;
        for (int q = 0; q < n; ++q)
            layer.terms.push_back({offset + q, uint32_t(1) << (n - 1 - q), 1.0});
        int k = n;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j, ++k)
                layer.terms.push_back(
                    {offset + k, (uint32_t(1) << (n - 1 - i)) | (uint32_t(1) << (n - 1 - j)), 1.0});
        return layer;
    };
    auto nc_layer = [&](int offset) {
        EncodingLayer layer;
        for (int q = 0; q < n; ++q)
            layer.terms.push_back({offset + q, uint32_t(1) << (n - 1 - q), 1.0});
        for (int i = 0; i < n; ++i) {
            const int j = (i + 1) % n;
            layer.terms.push_back(
                {offset + n + i, (uint32_t(1) << (n - 1 - i)) | (uint32_t(1) << (n - 1 - j)), 1.0});
        }
        return layer;
    };
    auto rot_layer = [&](int offset) {
        EncodingLayer layer;
        for (int q = 0; q < n; ++q)
            layer.terms.push_back({offset + q, uint32_t(1) << (n - 1 - q), 1.0});
        return layer;
    };

    const CMatrix hn = detail::kron_power(g::hadamard(), n);
    const CMatrix id = CMatrix::identity(dim);

    auto ring_unitary = [&](Axis axis) {
        std::vector<qsim::GateOp> gates;
        for (int i = 0; i < n; ++i) {
            const int j = (i + 1) % n;
            gates.push_back(axis == Axis::X ? g::make("cx", g::cx(), {i, j})
                                            : g::make("cy", g::cy(), {i, j}));
        }
        return qsim::circuit_unitary(gates, n);
    };

    switch (kind) {
        case FeatureMapKind::ZzUnit:
            layout.interleavers = {id, hn};
            layout.layers = {zz_layer(0)};
            break;
        case FeatureMapKind::ZzStack: {
            const int unit = layout.input_dim / 3;
            layout.interleavers = {id, hn, hn, hn};
            layout.layers = {zz_layer(2 * unit), zz_layer(unit), zz_layer(0)};
            break;
        }
        case FeatureMapKind::NcxUnit:
        case FeatureMapKind::NcyUnit: {
            const CMatrix v = detail::kron_power(
                detail::axis_conjugator(kind == FeatureMapKind::NcxUnit ? Axis::X : Axis::Y), n);
            layout.interleavers = {v, v.adjoint()};
            layout.layers = {nc_layer(0)};
            break;
        }
        case FeatureMapKind::NcStack: {
            const int unit = layout.input_dim / 3;
            const CMatrix vx = detail::kron_power(detail::axis_conjugator(Axis::X), n);
            const CMatrix vy = detail::kron_power(detail::axis_conjugator(Axis::Y), n);
            // U = X(t3) Y(t2) X(t1): fold adjacent conjugators together.
            layout.interleavers = {vx, vx.adjoint() * vy, vy.adjoint() * vx, vx.adjoint()};
            layout.layers = {nc_layer(2 * unit), nc_layer(unit), nc_layer(0)};
            break;
        }
        case FeatureMapKind::Nc10xUnit:
        case FeatureMapKind::Nc10yUnit: {
            const Axis axis = kind == FeatureMapKind::Nc10xUnit ? Axis::X : Axis::Y;
            const CMatrix v = detail::kron_power(detail::axis_conjugator(axis), n);
            const CMatrix ring = ring_unitary(axis);
            // U = rot(t') ring rot(t): two encoding layers.
            layout.interleavers = {v, v.adjoint() * ring * v, v.adjoint()};
            layout.layers = {rot_layer(n), rot_layer(0)};
            break;
        }
        default:
            throw std::invalid_argument("feature map does not decompose into a Z-diagonal layout: " +
                                        embed::to_string(kind));
    }
    return layout;
}

inline SpectrumSummary spectrum_of_embedding(embed::FeatureMapKind kind, int n,
                                             int amplitude_index = 0) {
    const EncodingLayout layout = layout_of_embedding(kind, n);
    const auto merged = merge_spectrum(enumerate_spectrum(layout, amplitude_index));
    SpectrumSummary s;
    s.distinct_frequencies = merged.size();
    for (const auto& e : merged) {
        double deg = 0.0;
        for (double h : e.h) deg += std::abs(h);
        s.max_degree = std::max(s.max_degree, deg);
    }
    return s;
}

}  // namespace cnqe::fourier
