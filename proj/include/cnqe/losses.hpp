// Similarity losses between embedded states: statevector fidelity and the
// normalized Hilbert-Schmidt unitary overlap, plus the pairwise empirical
// risk, the classifier MSE loss, and the Helstrom error bound.

#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "cnqe/circuit_grad.hpp"
#include "cnqe/embeddings.hpp"
#include "cnqe/qsim.hpp"

namespace cnqe::losses {

using embed::EmbeddingSpec;
using qsim::ParamCircuit;
using qsim::StateVector;

enum class LossKind { Fidelity, HilbertSchmidt, HilbertSchmidtAbs };

inline std::string to_string(LossKind k) {
    switch (k) {
        case LossKind::Fidelity: return "fidelity";
        case LossKind::HilbertSchmidt: return "hs";
        case LossKind::HilbertSchmidtAbs: return "hs_abs";
    }
    throw std::logic_error("unreachable loss kind");
}

inline LossKind loss_from_string(const std::string& s) {
    if (s == "fidelity") return LossKind::Fidelity;
    if (s == "hs") return LossKind::HilbertSchmidt;
    if (s == "hs_abs") return LossKind::HilbertSchmidtAbs;
    throw std::invalid_argument("unknown loss kind: " + s);
}

// A circuit family parameterized by a feature vector. The default family is
// an embedding spec; tests and tools may supply custom builders.
struct CircuitFamily {
    int n_qubits = 0;
    int n_features = 0;
    std::function<ParamCircuit(const std::vector<double>&)> build;

    static CircuitFamily from_spec(const EmbeddingSpec& spec) {
        CircuitFamily f;
        f.n_qubits = spec.n_qubits;
        f.n_features = embed::param_count(spec);
        f.build = [spec](const std::vector<double>& feats) { return embed::build(spec, feats); };
        return f;
    }

    void check(const std::vector<double>& feats) const {
        if (static_cast<int>(feats.size()) != n_features)
            throw std::invalid_argument("feature vector length does not match circuit family");
    }
};

struct SimilarityGrad {
    double value = 0.0;
    std::vector<double> grad1;
    std::vector<double> grad2;
};

namespace detail {

inline StateVector run(const CircuitFamily& fam, const std::vector<double>& feats) {
    StateVector s(fam.n_qubits);
    for (const auto& g : fam.build(feats)) qsim::apply_gate_inplace(s, g.op.matrix, g.op.targets);
    return s;
}

}  // namespace detail

// |<0|U^dag(f1) U(f2)|0>|^2 : overlap of the two embedded states.
inline double fidelity_similarity(const CircuitFamily& fam, const std::vector<double>& f1,
                                  const std::vector<double>& f2) {
    fam.check(f1);
    fam.check(f2);
    const StateVector s1 = detail::run(fam, f1);
    const StateVector s2 = detail::run(fam, f2);
    return std::norm(inner(s1.amps, s2.amps));
}

inline double fidelity_similarity(const EmbeddingSpec& spec, const std::vector<double>& f1,
                                  const std::vector<double>& f2) {
    return fidelity_similarity(CircuitFamily::from_spec(spec), f1, f2);
}

inline SimilarityGrad fidelity_similarity_grad(const CircuitFamily& fam, const std::vector<double>& f1,
                                               const std::vector<double>& f2) {
    fam.check(f1);
    fam.check(f2);
    const StateVector s1 = detail::run(fam, f1);
    const StateVector s2 = detail::run(fam, f2);
    const StateVector init(fam.n_qubits);
    SimilarityGrad out;
    auto g2 = grad::overlap_sq_grad(fam.build(f2), fam.n_qubits, init, s1, fam.n_features);
    auto g1 = grad::overlap_sq_grad(fam.build(f1), fam.n_qubits, init, s2, fam.n_features);
    out.value = g2.value;
    out.grad1 = std::move(g1.grad);
    out.grad2 = std::move(g2.grad);
    return out;
}

// Re tr(U^dag(f1) U(f2)) / 2^n : state-independent unitary similarity. The raw
// trace is complex; the real part is the quantity read out by an ancilla-X
// measurement, and |trace| is available via LossKind::HilbertSchmidtAbs.
inline cdouble hs_trace(const CircuitFamily& fam, const std::vector<double>& f1,
                        const std::vector<double>& f2) {
    fam.check(f1);
    fam.check(f2);
    const CMatrix u1 = qsim::circuit_unitary(qsim::strip(fam.build(f1)), fam.n_qubits);
    const CMatrix u2 = qsim::circuit_unitary(qsim::strip(fam.build(f2)), fam.n_qubits);
    return (u1.adjoint() * u2).trace() / cdouble(double(size_t(1) << fam.n_qubits), 0.0);
}

inline double hs_similarity(const CircuitFamily& fam, const std::vector<double>& f1,
                            const std::vector<double>& f2) {
    return hs_trace(fam, f1, f2).real();
}

inline double hs_similarity(const EmbeddingSpec& spec, const std::vector<double>& f1,
                            const std::vector<double>& f2) {
    return hs_similarity(CircuitFamily::from_spec(spec), f1, f2);
}

inline double hs_abs_similarity(const CircuitFamily& fam, const std::vector<double>& f1,
                                const std::vector<double>& f2) {
    return std::abs(hs_trace(fam, f1, f2));
}

inline SimilarityGrad hs_similarity_grad(const CircuitFamily& fam, const std::vector<double>& f1,
                                         const std::vector<double>& f2, bool absolute = false) {
    fam.check(f1);
    fam.check(f2);
    const double scale = 1.0 / double(size_t(1) << fam.n_qubits);
    const CMatrix u1 = qsim::circuit_unitary(qsim::strip(fam.build(f1)), fam.n_qubits);
    const CMatrix u2 = qsim::circuit_unitary(qsim::strip(fam.build(f2)), fam.n_qubits);

    // t = tr(U1^dag U2); symmetric partner tr(U2^dag U1) = conj(t).
    auto t2 = grad::trace_grad(fam.build(f2), fam.n_qubits, u1.adjoint(), fam.n_features);
    auto t1 = grad::trace_grad(fam.build(f1), fam.n_qubits, u2.adjoint(), fam.n_features);

    SimilarityGrad out;
    out.grad1.resize(fam.n_features);
    out.grad2.resize(fam.n_features);
    const cdouble t = t2.value * scale;
    if (!absolute) {
        out.value = t.real();
        for (int i = 0; i < fam.n_features; ++i) {
            out.grad2[i] = t2.grad[i].real() * scale;
            // d Re tr(U1^dag U2)/df1 = Re d conj(tr(U2^dag U1))/df1 = Re tr-grad of the swapped call.
            out.grad1[i] = t1.grad[i].real() * scale;
        }
    } else {
        const double a = std::abs(t);
        out.value = a;
        if (a < 1e-300) {
            // |t| is not differentiable at 0; return zero subgradient.
            return out;
        }
        for (int i = 0; i < fam.n_features; ++i) {
            const cdouble d2 = t2.grad[i] * scale;
            // d|t|/dθ = Re(conj(t) dt/dθ)/|t|
            out.grad2[i] = (std::conj(t) * d2).real() / a;
            const cdouble d1 = t1.grad[i] * scale;  // derivative of conj(t)
            out.grad1[i] = (t * d1).real() / a;
        }
    }
    return out;
}

inline double similarity(LossKind kind, const CircuitFamily& fam, const std::vector<double>& f1,
                         const std::vector<double>& f2) {
    switch (kind) {
        case LossKind::Fidelity: return fidelity_similarity(fam, f1, f2);
        case LossKind::HilbertSchmidt: return hs_similarity(fam, f1, f2);
        case LossKind::HilbertSchmidtAbs: return hs_abs_similarity(fam, f1, f2);
    }
    throw std::logic_error("unreachable loss kind");
}

inline SimilarityGrad similarity_grad(LossKind kind, const CircuitFamily& fam,
                                      const std::vector<double>& f1, const std::vector<double>& f2) {
    switch (kind) {
        case LossKind::Fidelity: return fidelity_similarity_grad(fam, f1, f2);
        case LossKind::HilbertSchmidt: return hs_similarity_grad(fam, f1, f2, false);
        case LossKind::HilbertSchmidtAbs: return hs_similarity_grad(fam, f1, f2, true);
    }
    throw std::logic_error("unreachable loss kind");
}

// ---------------------------------------------------------------------------
// Empirical risks.
// ---------------------------------------------------------------------------

struct FeaturePair {
    std::vector<double> a;
    std::vector<double> b;
    int delta = 0;  // 1 iff labels equal
};

using PairBatch = std::vector<FeaturePair>;

inline double nqe_loss(const std::function<double(const std::vector<double>&, const std::vector<double>&)>& similarity_fn,
                       const PairBatch& batch) {
    if (batch.empty()) throw std::invalid_argument("nqe_loss on empty batch");
    double s = 0.0;
    for (const auto& p : batch) {
        const double f = similarity_fn(p.a, p.b);
        const double d = f - double(p.delta);
        s += d * d;
    }
    return s / double(batch.size());
}

inline double nqe_loss(const std::vector<double>& similarities, const std::vector<int>& deltas) {
    if (similarities.empty() || similarities.size() != deltas.size())
        throw std::invalid_argument("nqe_loss length mismatch");
    double s = 0.0;
    for (size_t i = 0; i < similarities.size(); ++i) {
        const double d = similarities[i] - double(deltas[i]);
        s += d * d;
    }
    return s / double(similarities.size());
}

inline double vqa_mse_loss(const std::vector<double>& predictions, const std::vector<int>& labels) {
    if (predictions.size() != labels.size()) throw std::invalid_argument("vqa_mse_loss length mismatch");
    if (predictions.empty()) throw std::invalid_argument("vqa_mse_loss on empty input");
    double s = 0.0;
    for (size_t i = 0; i < predictions.size(); ++i) {
        const double d = predictions[i] - double(labels[i]);
        s += d * d;
    }
    return s / double(predictions.size());
}

// Equal-priors Helstrom error bound, 1/2 - d, clamped at zero. `d_tr` follows
// the weighted-distance convention in which perfectly distinguishable states
// at equal priors give d = 1/2.
inline double helstrom_error_bound(double d_tr) {
    if (d_tr < 0.0 || d_tr > 1.0) throw std::domain_error("trace distance outside [0, 1]");
    return std::max(0.0, 0.5 - d_tr);
}

}  // namespace cnqe::losses
