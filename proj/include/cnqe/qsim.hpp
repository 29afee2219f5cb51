// Dense statevector and density-matrix simulator: gate application, unitary
// assembly, Kraus channels, expectation values, and a cyclic Jacobi
// eigensolver for Hermitian matrices.
//
// Qubit ordering convention: qubit 0 is the MOST significant bit of the
// computational basis index. For a gate on targets (t0, t1, ...), t0 is the
// most significant bit of the gate's local index. This convention is used
// consistently by every module.

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "cnqe/complex_matrix.hpp"

namespace cnqe::qsim {

struct StateVector {
    int n_qubits = 0;
    cvector amps;

    StateVector() = default;
    explicit StateVector(int n) : n_qubits(n), amps(size_t(1) << n) { amps[0] = 1.0; }
    StateVector(int n, cvector a) : n_qubits(n), amps(std::move(a)) {
        if (amps.size() != (size_t(1) << n)) throw std::invalid_argument("amplitude length is not 2^n");
    }

    size_t dim() const { return amps.size(); }

    double norm() const { return norm2(amps); }

    void check_normalized(double tol = 1e-10) const {
        if (std::abs(norm() - 1.0) > tol) throw std::domain_error("state vector is not normalized");
    }
};

struct DensityMatrix {
    int n_qubits = 0;
    CMatrix entries;

    DensityMatrix() = default;
    explicit DensityMatrix(int n) : n_qubits(n), entries(1 << n, 1 << n) { entries(0, 0) = 1.0; }
    DensityMatrix(int n, CMatrix m) : n_qubits(n), entries(std::move(m)) {
        if (entries.rows() != (1 << n) || entries.cols() != (1 << n))
            throw std::invalid_argument("density matrix dimension is not 2^n");
    }

    int dim() const { return entries.rows(); }

    void check_valid(double tol = 1e-8) const {
        if (entries.hermiticity_defect() > tol) throw std::domain_error("density matrix not Hermitian");
        if (std::abs(entries.trace() - cdouble(1.0)) > tol) throw std::domain_error("density matrix trace != 1");
    }
};

struct GateOp {
    CMatrix matrix;            // 2^k x 2^k unitary
    std::vector<int> targets;  // k distinct qubit indices, targets[0] = MSB of the gate index
    std::string label;

    int arity() const { return static_cast<int>(targets.size()); }
};

struct KrausChannel {
    std::vector<CMatrix> operators;  // equal square shapes
    std::vector<int> targets;

    // Max-abs deviation of sum K^dag K from identity.
    double completeness_defect() const {
        if (operators.empty()) return 1.0;
        CMatrix s(operators[0].rows(), operators[0].cols());
        for (const auto& k : operators) s += k.adjoint() * k;
        return (s - CMatrix::identity(s.rows())).max_abs();
    }

    void check_trace_preserving(double tol = 1e-9) const {
        if (completeness_defect() > tol) throw std::domain_error("Kraus channel is not trace preserving");
    }
};

// Gate with an optional analytic derivative with respect to one entry of a
// real feature/parameter vector. dmatrix already carries the chain factor
// d(gate matrix)/d(feature), so reverse-mode sweeps need no per-gate scaling.
struct ParamGate {
    GateOp op;
    int param_index = -1;  // -1: fixed gate
    CMatrix dmatrix;

    bool parameterized() const { return param_index >= 0; }
};

using ParamCircuit = std::vector<ParamGate>;

inline std::vector<GateOp> strip(const ParamCircuit& c) {
    std::vector<GateOp> gates;
    gates.reserve(c.size());
    for (const auto& g : c) gates.push_back(g.op);
    return gates;
}

namespace detail {

inline void check_targets(const std::vector<int>& targets, int n_qubits) {
    for (size_t i = 0; i < targets.size(); ++i) {
        if (targets[i] < 0 || targets[i] >= n_qubits) throw std::out_of_range("gate target out of range");
        for (size_t j = i + 1; j < targets.size(); ++j)
            if (targets[i] == targets[j]) throw std::invalid_argument("duplicate gate target");
    }
}

// Precomputed gather/scatter pattern for applying a k-qubit operator to the
// index bits selected by `targets` of a vector over 2^n basis states.
class IndexKernel {
public:
    IndexKernel(const std::vector<int>& targets, int n_qubits)
        : dim_(size_t(1) << n_qubits), block_(size_t(1) << targets.size()) {
        const int k = static_cast<int>(targets.size());
        std::vector<size_t> bit(k);
        for (int i = 0; i < k; ++i) bit[i] = size_t(1) << (n_qubits - 1 - targets[i]);
        mask_ = 0;
        for (int i = 0; i < k; ++i) mask_ |= bit[i];
        offsets_.resize(block_);
        for (size_t p = 0; p < block_; ++p) {
            size_t off = 0;
            for (int i = 0; i < k; ++i)
                if (p & (size_t(1) << (k - 1 - i))) off |= bit[i];
            offsets_[p] = off;
        }
        scratch_.resize(block_);
    }

    // v[i*stride] layout; stride 1 for contiguous vectors, dim for matrix columns.
    void apply(const CMatrix& m, cdouble* v, size_t stride = 1) {
        for (size_t base = 0; base < dim_; ++base) {
            if (base & mask_) continue;  // one visit per group, at its cleared-bits representative
            for (size_t p = 0; p < block_; ++p) scratch_[p] = v[(base | offsets_[p]) * stride];
            for (size_t r = 0; r < block_; ++r) {
                cdouble s = 0.0;
                for (size_t c = 0; c < block_; ++c) s += m(int(r), int(c)) * scratch_[c];
                v[(base | offsets_[r]) * stride] = s;
            }
        }
    }

private:
    size_t dim_;
    size_t block_;
    size_t mask_ = 0;
    std::vector<size_t> offsets_;
    std::vector<cdouble> scratch_;
};

inline void apply_on_index(cdouble* v, size_t /*dim*/, int n_qubits, const CMatrix& m,
                           const std::vector<int>& targets) {
    IndexKernel(targets, n_qubits).apply(m, v);
}

}  // namespace detail

inline StateVector apply_gate(const StateVector& state, const GateOp& gate) {
    detail::check_targets(gate.targets, state.n_qubits);
    if (gate.matrix.rows() != (1 << gate.arity()) || gate.matrix.cols() != gate.matrix.rows())
        throw std::invalid_argument("gate matrix shape does not match arity");
    if (!gate.matrix.is_unitary(1e-10)) throw std::domain_error("gate matrix is not unitary: " + gate.label);
    StateVector out = state;
    detail::apply_on_index(out.amps.data(), out.dim(), out.n_qubits, gate.matrix, gate.targets);
    return out;
}

// Unchecked variant for inner loops that already validated the circuit.
inline void apply_gate_inplace(StateVector& state, const CMatrix& m, const std::vector<int>& targets) {
    detail::apply_on_index(state.amps.data(), state.dim(), state.n_qubits, m, targets);
}

inline StateVector run_circuit(const std::vector<GateOp>& gates, int n_qubits) {
    StateVector s(n_qubits);
    for (const auto& g : gates) s = apply_gate(s, g);
    return s;
}

// rho -> A rho A^dag with A acting on the given qubits (A need not be unitary).
inline void conjugate_inplace(DensityMatrix& rho, const CMatrix& a, const std::vector<int>& targets) {
    const int n = rho.n_qubits;
    const size_t dim = size_t(1) << n;
    CMatrix& e = rho.entries;
    detail::IndexKernel kernel(targets, n);
    // Left side: each column of rho is a vector over the row index (stride = dim).
    for (size_t col = 0; col < dim; ++col) kernel.apply(a, e.data() + col, dim);
    // Right side: rho A^dag; row vectors transform by conj(A).
    CMatrix ac(a.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) ac(i, j) = std::conj(a(i, j));
    for (size_t row = 0; row < dim; ++row) kernel.apply(ac, e.data() + row * dim, 1);
}

inline DensityMatrix to_density(const StateVector& state) {
    state.check_normalized();
    DensityMatrix rho(state.n_qubits);
    const size_t d = state.dim();
    for (size_t i = 0; i < d; ++i)
        for (size_t j = 0; j < d; ++j) rho.entries(int(i), int(j)) = state.amps[i] * std::conj(state.amps[j]);
    return rho;
}

inline DensityMatrix apply_channel(const DensityMatrix& rho, const KrausChannel& channel) {
    channel.check_trace_preserving();
    detail::check_targets(channel.targets, rho.n_qubits);
    DensityMatrix out(rho.n_qubits);
    out.entries = CMatrix(rho.dim(), rho.dim());
    for (const auto& k : channel.operators) {
        DensityMatrix term = rho;
        conjugate_inplace(term, k, channel.targets);
        out.entries += term.entries;
    }
    return out;
}

inline void apply_channel_inplace(DensityMatrix& rho, const KrausChannel& channel) {
    rho = apply_channel(rho, channel);
}

// Full 2^n x 2^n unitary of a gate sequence, gates applied in list order.
inline CMatrix circuit_unitary(const std::vector<GateOp>& gates, int n_qubits) {
    const size_t dim = size_t(1) << n_qubits;
    CMatrix u = CMatrix::identity(int(dim));
    for (const auto& g : gates) {
        detail::check_targets(g.targets, n_qubits);
        if (!g.matrix.is_unitary(1e-10)) throw std::domain_error("gate matrix is not unitary: " + g.label);
        detail::IndexKernel kernel(g.targets, n_qubits);
        // Apply to each column of the accumulated product.
        for (size_t col = 0; col < dim; ++col) kernel.apply(g.matrix, u.data() + col, dim);
    }
    return u;
}

// Embed a k-qubit operator into the full 2^n space.
inline CMatrix embed_operator(const CMatrix& m, const std::vector<int>& targets, int n_qubits) {
    detail::check_targets(targets, n_qubits);
    const size_t dim = size_t(1) << n_qubits;
    const int k = static_cast<int>(targets.size());
    const size_t block = size_t(1) << k;
    CMatrix out{int(dim), int(dim)};
    std::vector<size_t> bit(k);
    for (int i = 0; i < k; ++i) bit[i] = size_t(1) << (n_qubits - 1 - targets[i]);
    size_t mask = 0;
    for (int i = 0; i < k; ++i) mask |= bit[i];
    std::vector<size_t> offsets(block);
    for (size_t p = 0; p < block; ++p) {
        size_t off = 0;
        for (int i = 0; i < k; ++i)
            if (p & (size_t(1) << (k - 1 - i))) off |= bit[i];
        offsets[p] = off;
    }
    for (size_t base = 0; base < dim; ++base) {
        if (base & mask) continue;
        for (size_t r = 0; r < block; ++r)
            for (size_t c = 0; c < block; ++c)
                out(int(base | offsets[r]), int(base | offsets[c])) = m(int(r), int(c));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Hermitian eigensolver: cyclic Jacobi with complex rotations.
// ---------------------------------------------------------------------------

struct EigResult {
    std::vector<double> values;  // descending
    CMatrix vectors;             // columns are eigenvectors, same order
};

inline EigResult hermitian_eig(const CMatrix& m, double defect_tol = 1e-8) {
    if (m.rows() != m.cols()) throw std::invalid_argument("eigensolver needs a square matrix");
    if (m.hermiticity_defect() > defect_tol) throw std::domain_error("matrix is not Hermitian within tolerance");

    const int n = m.rows();
    // Symmetrize so the result is exact for (A + A^dag)/2.
    CMatrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
    CMatrix v = CMatrix::identity(n);

    auto off_norm = [&]() {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j) s += std::norm(a(i, j));
        return std::sqrt(s);
    };

    const double stop = 1e-13 * std::max(1.0, a.frobenius_norm());
    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps && off_norm() > stop; ++sweep) {
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const cdouble apq = a(p, q);
                const double abs_apq = std::abs(apq);
                if (abs_apq < 1e-300) continue;
                const cdouble phase = apq / abs_apq;  // apq = |apq| e^{i phi}
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double tau = (aqq - app) / (2.0 * abs_apq);
                const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const cdouble s = t * c * phase;  // rotation: new_p = c*p - conj(s)*q ; new_q = s*p + c*q

                for (int k = 0; k < n; ++k) {  // columns: A <- A G
                    const cdouble akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - std::conj(s) * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {  // rows: A <- G^dag A
                    const cdouble apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = std::conj(s) * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {  // accumulate V <- V G
                    const cdouble vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - std::conj(s) * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return a(x, x).real() > a(y, y).real(); });

    EigResult r;
    r.values.resize(n);
    r.vectors = CMatrix(n, n);
    for (int i = 0; i < n; ++i) {
        r.values[i] = a(order[i], order[i]).real();
        for (int k = 0; k < n; ++k) r.vectors(k, i) = v(k, order[i]);
    }
    return r;
}

inline std::vector<double> hermitian_eigenvalues(const CMatrix& m) { return hermitian_eig(m).values; }

// ---------------------------------------------------------------------------
// Expectation values.
// ---------------------------------------------------------------------------

inline double expectation(const StateVector& state, const CMatrix& observable) {
    if (observable.rows() != int(state.dim()) || observable.cols() != int(state.dim()))
        throw std::invalid_argument("observable dimension mismatch");
    if (observable.hermiticity_defect() > 1e-8) throw std::domain_error("observable is not Hermitian");
    const cvector ov = observable * state.amps;
    return inner(state.amps, ov).real();
}

inline double expectation(const DensityMatrix& rho, const CMatrix& observable) {
    if (observable.rows() != rho.dim() || observable.cols() != rho.dim())
        throw std::invalid_argument("observable dimension mismatch");
    if (observable.hermiticity_defect() > 1e-8) throw std::domain_error("observable is not Hermitian");
    cdouble t = 0.0;
    for (int i = 0; i < rho.dim(); ++i)
        for (int j = 0; j < rho.dim(); ++j) t += rho.entries(i, j) * observable(j, i);
    return t.real();
}

// Z observable on one qubit, embedded in 2^n.
inline CMatrix z_observable(int qubit, int n_qubits) {
    const size_t dim = size_t(1) << n_qubits;
    CMatrix z{int(dim), int(dim)};
    const size_t bit = size_t(1) << (n_qubits - 1 - qubit);
    for (size_t i = 0; i < dim; ++i) z(int(i), int(i)) = (i & bit) ? -1.0 : 1.0;
    return z;
}

// ---------------------------------------------------------------------------
// Gate library. Rotation convention: R_P(theta) = exp(-i theta P / 2).
// d-prefixed functions return the derivative of the matrix in the angle.
// ---------------------------------------------------------------------------

namespace gates {

inline CMatrix pauli_x() { return CMatrix::from_rows({{0, 1}, {1, 0}}); }
inline CMatrix pauli_y() { return CMatrix::from_rows({{0, cdouble(0, -1)}, {cdouble(0, 1), 0}}); }
inline CMatrix pauli_z() { return CMatrix::from_rows({{1, 0}, {0, -1}}); }
inline CMatrix hadamard() {
    const double r = 1.0 / std::sqrt(2.0);
    return CMatrix::from_rows({{r, r}, {r, -r}});
}

inline CMatrix rx(double t) {
    const double c = std::cos(t / 2), s = std::sin(t / 2);
    return CMatrix::from_rows({{c, cdouble(0, -s)}, {cdouble(0, -s), c}});
}
inline CMatrix drx(double t) {
    const double c = std::cos(t / 2), s = std::sin(t / 2);
    return CMatrix::from_rows({{-s / 2, cdouble(0, -c / 2)}, {cdouble(0, -c / 2), -s / 2}});
}

inline CMatrix ry(double t) {
    const double c = std::cos(t / 2), s = std::sin(t / 2);
    return CMatrix::from_rows({{c, -s}, {s, c}});
}
inline CMatrix dry(double t) {
    const double c = std::cos(t / 2), s = std::sin(t / 2);
    return CMatrix::from_rows({{-s / 2, -c / 2}, {c / 2, -s / 2}});
}

inline CMatrix rz(double t) {
    return CMatrix::from_rows({{std::polar(1.0, -t / 2), 0}, {0, std::polar(1.0, t / 2)}});
}
inline CMatrix drz(double t) {
    return CMatrix::from_rows({{cdouble(0, -0.5) * std::polar(1.0, -t / 2), 0},
                               {0, cdouble(0, 0.5) * std::polar(1.0, t / 2)}});
}

// Two-qubit rotations exp(-i t P otimes P / 2).
inline CMatrix rpp(double t, const CMatrix& p) {
    const CMatrix pp = p.kron(p);
    CMatrix m = CMatrix::identity(4) * cdouble(std::cos(t / 2), 0);
    m += pp * cdouble(0, -std::sin(t / 2));
    return m;
}
inline CMatrix drpp(double t, const CMatrix& p) {
    const CMatrix pp = p.kron(p);
    CMatrix m = CMatrix::identity(4) * cdouble(-std::sin(t / 2) / 2, 0);
    m += pp * cdouble(0, -std::cos(t / 2) / 2);
    return m;
}

inline CMatrix rxx(double t) { return rpp(t, pauli_x()); }
inline CMatrix drxx(double t) { return drpp(t, pauli_x()); }
inline CMatrix ryy(double t) { return rpp(t, pauli_y()); }
inline CMatrix dryy(double t) { return drpp(t, pauli_y()); }
inline CMatrix rzz(double t) { return rpp(t, pauli_z()); }
inline CMatrix drzz(double t) { return drpp(t, pauli_z()); }

// Controlled gates; control is the first listed target (MSB of the local index).
inline CMatrix controlled(const CMatrix& u) {
    CMatrix m = CMatrix::identity(4);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m(2 + i, 2 + j) = u(i, j);
    return m;
}
inline CMatrix controlled_derivative(const CMatrix& du) {
    CMatrix m(4, 4);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m(2 + i, 2 + j) = du(i, j);
    return m;
}

inline CMatrix cx() { return controlled(pauli_x()); }
inline CMatrix cy() { return controlled(pauli_y()); }
inline CMatrix crx(double t) { return controlled(rx(t)); }
inline CMatrix dcrx(double t) { return controlled_derivative(drx(t)); }
inline CMatrix cry(double t) { return controlled(ry(t)); }
inline CMatrix dcry(double t) { return controlled_derivative(dry(t)); }
inline CMatrix crz(double t) { return controlled(rz(t)); }
inline CMatrix dcrz(double t) { return controlled_derivative(drz(t)); }

// Controlled-RY variant with the rotation in the outer block: acts on the
// first listed qubit conditioned on the second one. cry_outer(2t) reproduces
// the 4x4 with cos t at (1,1), sin t at (1,3), -sin t at (3,1), cos t (3,3).
inline CMatrix cry_outer(double t) {
    const double c = std::cos(t / 2), s = std::sin(t / 2);
    CMatrix m = CMatrix::identity(4);
    m(1, 1) = c;
    m(1, 3) = s;
    m(3, 1) = -s;
    m(3, 3) = c;
    return m;
}
inline CMatrix dcry_outer(double t) {
    const double c = std::cos(t / 2) / 2, s = std::sin(t / 2) / 2;
    CMatrix m(4, 4);
    m(1, 1) = -s;
    m(1, 3) = c;
    m(3, 1) = -c;
    m(3, 3) = -s;
    return m;
}

// Partial-swap style rotation in the middle block (beta fixed at pi/2):
// cos t / -sin t / sin t / cos t on the {01, 10} subspace.
inline CMatrix rxx_plus_yy(double t) {
    const double c = std::cos(t / 2), s = std::sin(t / 2);
    CMatrix m = CMatrix::identity(4);
    m(1, 1) = c;
    m(1, 2) = -s;
    m(2, 1) = s;
    m(2, 2) = c;
    return m;
}

inline GateOp make(std::string label, CMatrix m, std::vector<int> targets) {
    return GateOp{std::move(m), std::move(targets), std::move(label)};
}

}  // namespace gates

}  // namespace cnqe::qsim
