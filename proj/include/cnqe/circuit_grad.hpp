// Reverse-mode differentiation through the exact simulator. Adjoint sweeps
// over parameterized gate sequences for statevectors, full unitaries, and
// density matrices with interleaved Kraus channels.

#pragma once

#include <stdexcept>
#include <vector>

#include "cnqe/qsim.hpp"

namespace cnqe::grad {

using qsim::DensityMatrix;
using qsim::KrausChannel;
using qsim::ParamCircuit;
using qsim::StateVector;

struct ValueGrad {
    double value = 0.0;
    std::vector<double> grad;
};

struct ComplexValueGrad {
    cdouble value;
    std::vector<cdouble> grad;
};

namespace detail {

inline void accumulate(std::vector<double>& grad, int index, double v) {
    if (index < 0) return;
    if (index >= static_cast<int>(grad.size())) throw std::out_of_range("parameter index out of range");
    grad[index] += v;
}

}  // namespace detail

// s = <target| C(f) |init> and the gradient of |s|^2 in the feature vector f.
// Forward stores pre-gate states; backward carries chi = (suffix)^dag |target>.
inline ValueGrad overlap_sq_grad(const ParamCircuit& circuit, int /*n_qubits*/,
                                 const StateVector& init, const StateVector& target,
                                 int n_features) {
    std::vector<StateVector> pre;  // state before each gate
    pre.reserve(circuit.size());
    StateVector psi = init;
    for (const auto& g : circuit) {
        pre.push_back(psi);
        qsim::apply_gate_inplace(psi, g.op.matrix, g.op.targets);
    }
    const cdouble s = inner(target.amps, psi.amps);

    ValueGrad out;
    out.value = std::norm(s);
    out.grad.assign(n_features, 0.0);

    StateVector chi = target;
    for (size_t k = circuit.size(); k-- > 0;) {
        const auto& g = circuit[k];
        if (g.parameterized()) {
            // d|s|^2/dθ = 2 Re[ conj(s) <chi| dU |pre_k> ]
            StateVector dpsi = pre[k];
            qsim::apply_gate_inplace(dpsi, g.dmatrix, g.op.targets);
            const cdouble ds = inner(chi.amps, dpsi.amps);
            detail::accumulate(out.grad, g.param_index, 2.0 * (std::conj(s) * ds).real());
        }
        qsim::apply_gate_inplace(chi, g.op.matrix.adjoint(), g.op.targets);
    }
    return out;
}

// <psi|O|psi> with psi = C(f)|init>, gradient in f. O must be Hermitian.
inline ValueGrad expectation_grad(const ParamCircuit& circuit, int n_qubits, const StateVector& init,
                                  const CMatrix& observable, int n_features) {
    std::vector<StateVector> pre;
    pre.reserve(circuit.size());
    StateVector psi = init;
    for (const auto& g : circuit) {
        pre.push_back(psi);
        qsim::apply_gate_inplace(psi, g.op.matrix, g.op.targets);
    }

    ValueGrad out;
    out.grad.assign(n_features, 0.0);
    StateVector lambda(n_qubits);
    lambda.amps = observable * psi.amps;
    out.value = inner(psi.amps, lambda.amps).real();

    for (size_t k = circuit.size(); k-- > 0;) {
        const auto& g = circuit[k];
        if (g.parameterized()) {
            // d<O>/dθ = 2 Re[ <lambda| dU |pre_k> ] with lambda = (suffix)^dag O psi
            StateVector dpsi = pre[k];
            qsim::apply_gate_inplace(dpsi, g.dmatrix, g.op.targets);
            detail::accumulate(out.grad, g.param_index, 2.0 * inner(lambda.amps, dpsi.amps).real());
        }
        qsim::apply_gate_inplace(lambda, g.op.matrix.adjoint(), g.op.targets);
    }
    return out;
}

namespace detail {

// M <- M * G with G embedded on `targets`: each row of M transforms by G^T.
inline void right_multiply_gate(CMatrix& m, const CMatrix& g, const std::vector<int>& targets,
                                int n_qubits) {
    qsim::detail::IndexKernel kernel(targets, n_qubits);
    const CMatrix gt = g.transpose();
    const size_t dim = size_t(1) << n_qubits;
    for (size_t row = 0; row < dim; ++row) kernel.apply(gt, m.data() + row * dim, 1);
}

// M <- G * M: each column of M transforms by G.
inline void left_multiply_gate(CMatrix& m, const CMatrix& g, const std::vector<int>& targets,
                               int n_qubits) {
    qsim::detail::IndexKernel kernel(targets, n_qubits);
    const size_t dim = size_t(1) << n_qubits;
    for (size_t col = 0; col < dim; ++col) kernel.apply(g, m.data() + col, dim);
}

}  // namespace detail

// t = tr(B * C(f)) with C = g_{N-1} ... g_0 in application order; complex
// gradient in the feature vector. d/dθ_k = tr(R_k dG_k P_k) where
// R_k = B g_{N-1}..g_{k+1} and P_k = g_{k-1}..g_0, both maintained
// incrementally during one descending sweep.
inline ComplexValueGrad trace_grad(const ParamCircuit& circuit, int n_qubits, const CMatrix& b,
                                   int n_features) {
    const size_t dim = size_t(1) << n_qubits;
    const int count = static_cast<int>(circuit.size());

    CMatrix total = CMatrix::identity(int(dim));
    for (const auto& g : circuit) detail::left_multiply_gate(total, g.op.matrix, g.op.targets, n_qubits);

    ComplexValueGrad out;
    out.grad.assign(n_features, cdouble{});
    cdouble value{};
    for (size_t i = 0; i < dim; ++i)
        for (size_t j = 0; j < dim; ++j) value += b(int(i), int(j)) * total(int(j), int(i));
    out.value = value;

    CMatrix r = b;       // B * g_{N-1} .. g_{k+1}
    CMatrix p = total;   // g_{k-1} .. g_0, peeled from the full product
    for (int k = count - 1; k >= 0; --k) {
        const auto& g = circuit[k];
        detail::left_multiply_gate(p, g.op.matrix.adjoint(), g.op.targets, n_qubits);
        if (g.parameterized()) {
            // tr(R dG P) contracted over dG's sparse block structure.
            const int kq = static_cast<int>(g.op.targets.size());
            const size_t block = size_t(1) << kq;
            std::vector<size_t> bit(kq);
            for (int i = 0; i < kq; ++i) bit[i] = size_t(1) << (n_qubits - 1 - g.op.targets[i]);
            size_t mask = 0;
            for (int i = 0; i < kq; ++i) mask |= bit[i];
            std::vector<size_t> off(block);
            for (size_t pp = 0; pp < block; ++pp) {
                size_t o = 0;
                for (int i = 0; i < kq; ++i)
                    if (pp & (size_t(1) << (kq - 1 - i))) o |= bit[i];
                off[pp] = o;
            }
            cdouble d{};
            for (size_t base = 0; base < dim; ++base) {
                if (base & mask) continue;
                for (size_t a = 0; a < block; ++a) {
                    for (size_t bb = 0; bb < block; ++bb) {
                        const cdouble dm = g.dmatrix(int(a), int(bb));
                        if (dm == cdouble{}) continue;
                        // (P R)[base|off_b][base|off_a] entry via row x column.
                        cdouble s{};
                        const size_t x = base | off[bb];
                        const size_t y = base | off[a];
                        for (size_t l = 0; l < dim; ++l) s += p(int(x), int(l)) * r(int(l), int(y));
                        d += dm * s;
                    }
                }
            }
            out.grad[g.param_index] += d;
        }
        detail::right_multiply_gate(r, g.op.matrix, g.op.targets, n_qubits);
    }
    return out;
}

// One noisy execution step: a gate followed by its noise channels.
struct NoisyStep {
    qsim::ParamGate gate;
    std::vector<KrausChannel> channels;
};

inline DensityMatrix noisy_forward(const std::vector<NoisyStep>& steps, const DensityMatrix& init) {
    DensityMatrix rho = init;
    for (const auto& st : steps) {
        qsim::conjugate_inplace(rho, st.gate.op.matrix, st.gate.op.targets);
        for (const auto& ch : st.channels) qsim::apply_channel_inplace(rho, ch);
    }
    return rho;
}

// L = tr(O rho_final), gradient in the gate parameters. The adjoint operator
// runs channels as sum K^dag Lambda K and gates as G^dag Lambda G.
inline ValueGrad noisy_expectation_grad(const std::vector<NoisyStep>& steps, const DensityMatrix& init,
                                        const CMatrix& observable, int n_features) {
    std::vector<DensityMatrix> pre;  // state before each gate
    pre.reserve(steps.size());
    DensityMatrix rho = init;
    for (const auto& st : steps) {
        pre.push_back(rho);
        qsim::conjugate_inplace(rho, st.gate.op.matrix, st.gate.op.targets);
        for (const auto& ch : st.channels) qsim::apply_channel_inplace(rho, ch);
    }

    ValueGrad out;
    out.grad.assign(n_features, 0.0);
    out.value = qsim::expectation(rho, observable);

    DensityMatrix lambda(init.n_qubits);
    lambda.entries = observable;
    for (size_t k = steps.size(); k-- > 0;) {
        const auto& st = steps[k];
        // Adjoint through this step's channels (reverse order).
        for (size_t c = st.channels.size(); c-- > 0;) {
            const auto& ch = st.channels[c];
            DensityMatrix acc(lambda.n_qubits);
            acc.entries = CMatrix(lambda.entries.rows(), lambda.entries.cols());
            for (const auto& kop : ch.operators) {
                DensityMatrix term = lambda;
                qsim::conjugate_inplace(term, kop.adjoint(), ch.targets);
                acc.entries += term.entries;
            }
            lambda = std::move(acc);
        }
        if (st.gate.parameterized()) {
            // dL/dθ = 2 Re tr( Lambda dG rho_pre G^dag )
            DensityMatrix t = pre[k];
            // t <- dG * rho_pre * G^dag
            const int n = t.n_qubits;
            const size_t dim = size_t(1) << n;
            qsim::detail::IndexKernel kernel(st.gate.op.targets, n);
            for (size_t col = 0; col < dim; ++col) kernel.apply(st.gate.dmatrix, t.entries.data() + col, dim);
            CMatrix gc(st.gate.op.matrix.rows(), st.gate.op.matrix.cols());
            for (int i = 0; i < gc.rows(); ++i)
                for (int j = 0; j < gc.cols(); ++j) gc(i, j) = std::conj(st.gate.op.matrix(i, j));
            for (size_t row = 0; row < dim; ++row) kernel.apply(gc, t.entries.data() + row * dim, 1);
            cdouble tr{};
            for (size_t i = 0; i < dim; ++i)
                for (size_t j = 0; j < dim; ++j) tr += lambda.entries(int(i), int(j)) * t.entries(int(j), int(i));
            detail::accumulate(out.grad, st.gate.param_index, 2.0 * tr.real());
        }
        // Adjoint through the gate: Lambda <- G^dag Lambda G.
        qsim::conjugate_inplace(lambda, st.gate.op.matrix.adjoint(), st.gate.op.targets);
    }
    return out;
}

}  // namespace cnqe::grad
