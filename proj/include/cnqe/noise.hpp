// Hardware-inspired noise: depolarizing and thermal-relaxation Kraus channels
// compiled from a device parameter set, plus noisy density-matrix execution of
// gate sequences (noise inserted after each gate on the gate's qubits).

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "cnqe/circuit_grad.hpp"
#include "cnqe/qsim.hpp"

namespace cnqe::noise {

using qsim::DensityMatrix;
using qsim::KrausChannel;
using qsim::ParamCircuit;

struct NoiseModel {
    double t1_us = 0.0;
    double t2_us = 0.0;
    double p1q = 0.0;
    double p2q = 0.0;
    double p_meas = 0.0;
    double dur_1q_us = 0.035;
    double dur_2q_us = 0.30;
    double dur_meas_us = 1.0;

    void check() const {
        if (t1_us <= 0 || t2_us <= 0) throw std::invalid_argument("T1 and T2 must be positive");
        if (t2_us > 2.0 * t1_us + 1e-12) throw std::invalid_argument("T2 must not exceed 2 T1");
        for (double p : {p1q, p2q, p_meas})
            if (p < 0.0 || p > 1.0) throw std::invalid_argument("error rates must lie in [0, 1]");
        if (dur_1q_us <= 0 || dur_2q_us <= 0 || dur_meas_us <= 0)
            throw std::invalid_argument("durations must be positive");
    }

    bool is_noiseless() const { return p1q == 0.0 && p2q == 0.0 && p_meas == 0.0 && t1_us >= 1e15; }

    // Average parameters of the superconducting backend used as the reference
    // preset; durations are representative transmon values.
    static NoiseModel preset_vigo() {
        NoiseModel m;
        m.t1_us = 108.0;
        m.t2_us = 70.0;
        m.p1q = 5.1e-4;
        m.p2q = 8.8e-3;
        m.p_meas = 3.34e-2;
        return m;
    }

    static NoiseModel none() {
        NoiseModel m;
        m.t1_us = 1e18;
        m.t2_us = 1e18;
        return m;
    }
};

namespace detail {

inline std::vector<CMatrix> pauli_basis1() {
    namespace g = qsim::gates;
    return {CMatrix::identity(2), g::pauli_x(), g::pauli_y(), g::pauli_z()};
}

}  // namespace detail

// (1 - p) rho + p I/2^k as 4^k weighted Pauli Kraus terms.
inline KrausChannel depolarizing(double p, const std::vector<int>& targets) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("depolarizing probability outside [0, 1]");
    const int k = static_cast<int>(targets.size());
    const double dim4 = std::pow(4.0, k);
    KrausChannel ch;
    ch.targets = targets;
    const auto basis = detail::pauli_basis1();
    // Enumerate all k-fold Pauli strings; identity carries the survival weight.
    const int count = static_cast<int>(dim4);
    for (int idx = 0; idx < count; ++idx) {
        CMatrix op = CMatrix::identity(1);
        int rem = idx;
        for (int q = 0; q < k; ++q) {
            op = op.kron(basis[rem % 4]);
            rem /= 4;
        }
        const double w = (idx == 0) ? (1.0 - p + p / dim4) : (p / dim4);
        ch.operators.push_back(op * cdouble(std::sqrt(w), 0.0));
    }
    return ch;
}

inline KrausChannel depolarizing(double p, int k_qubits) {
    std::vector<int> targets(k_qubits);
    for (int i = 0; i < k_qubits; ++i) targets[i] = i;
    return depolarizing(p, targets);
}

// Amplitude damping with gamma = 1 - e^{-d/T1} composed with pure dephasing so
// the off-diagonal decay equals e^{-d/T2}. Requires T2 <= 2 T1.
inline KrausChannel thermal_relaxation(double t1, double t2, double duration, int target = 0) {
    if (t1 <= 0 || t2 <= 0) throw std::invalid_argument("T1 and T2 must be positive");
    if (t2 > 2.0 * t1 + 1e-12) throw std::invalid_argument("T2 must not exceed 2 T1");
    if (duration < 0) throw std::invalid_argument("duration must be nonnegative");

    const double gamma = 1.0 - std::exp(-duration / t1);
    // Extra dephasing beyond the sqrt(1-gamma) factor amplitude damping gives.
    const double rate_phi = 1.0 / t2 - 0.5 / t1;
    const double pz = 0.5 * (1.0 - std::exp(-duration * rate_phi));

    CMatrix a0(2, 2), a1(2, 2);
    a0(0, 0) = 1.0;
    a0(1, 1) = std::sqrt(1.0 - gamma);
    a1(0, 1) = std::sqrt(gamma);

    KrausChannel ch;
    ch.targets = {target};
    const double wz0 = std::sqrt(1.0 - pz), wz1 = std::sqrt(pz);
    ch.operators.push_back(a0 * cdouble(wz0, 0.0));
    if (wz1 > 0.0) ch.operators.push_back((qsim::gates::pauli_z() * a0) * cdouble(wz1, 0.0));
    if (gamma > 0.0) {
        ch.operators.push_back(a1 * cdouble(wz0, 0.0));
        if (wz1 > 0.0) ch.operators.push_back((qsim::gates::pauli_z() * a1) * cdouble(wz1, 0.0));
    }
    return ch;
}

// Symmetric binary readout flip on a two-outcome distribution.
inline std::vector<double> measurement_flip(double p_meas, const std::vector<double>& probabilities) {
    if (probabilities.size() != 2) throw std::invalid_argument("measurement_flip expects two outcomes");
    if (std::abs(probabilities[0] + probabilities[1] - 1.0) > 1e-9)
        throw std::invalid_argument("probabilities must sum to 1");
    return {(1.0 - p_meas) * probabilities[0] + p_meas * probabilities[1],
            (1.0 - p_meas) * probabilities[1] + p_meas * probabilities[0]};
}

inline double measurement_flip(double p_meas, double p) {
    return (1.0 - p_meas) * p + p_meas * (1.0 - p);
}

// Channels appended after one gate: depolarizing on the gate's qubits, then
// thermal relaxation for the gate duration on each of them.
inline std::vector<KrausChannel> channels_after_gate(const NoiseModel& model,
                                                     const std::vector<int>& targets) {
    model.check();
    std::vector<KrausChannel> out;
    const bool two = targets.size() >= 2;
    const double p = two ? model.p2q : model.p1q;
    const double dur = two ? model.dur_2q_us : model.dur_1q_us;
    if (p > 0.0) out.push_back(depolarizing(p, targets));
    for (int q : targets) {
        KrausChannel th = thermal_relaxation(model.t1_us, model.t2_us, dur, q);
        if (th.operators.size() > 1 || std::abs(th.operators[0](1, 1).real() - 1.0) > 1e-15)
            out.push_back(std::move(th));
    }
    return out;
}

inline std::vector<grad::NoisyStep> compile_noisy(const ParamCircuit& circuit,
                                                  const NoiseModel& model) {
    std::vector<grad::NoisyStep> steps;
    steps.reserve(circuit.size());
    for (const auto& g : circuit) {
        grad::NoisyStep st;
        st.gate = g;
        st.channels = channels_after_gate(model, g.op.targets);
        steps.push_back(std::move(st));
    }
    return steps;
}

// Density-matrix execution with per-gate noise insertion. The measurement
// flip applies to readout probabilities, not to the returned state.
inline DensityMatrix noisy_execute(const std::vector<qsim::GateOp>& gates, const NoiseModel& model,
                                   int n_qubits) {
    if (n_qubits > 8) throw std::invalid_argument("density simulation guard: n_qubits <= 8");
    model.check();
    DensityMatrix rho(n_qubits);
    for (const auto& g : gates) {
        qsim::detail::check_targets(g.targets, n_qubits);
        qsim::conjugate_inplace(rho, g.matrix, g.targets);
        for (const auto& ch : channels_after_gate(model, g.targets)) qsim::apply_channel_inplace(rho, ch);
    }
    return rho;
}

inline DensityMatrix noisy_execute(const ParamCircuit& circuit, const NoiseModel& model, int n_qubits) {
    return noisy_execute(qsim::strip(circuit), model, n_qubits);
}

// Adjoint (dagger) of a parameterized circuit: reversed order, conjugated
// matrices; derivative matrices transform the same way.
inline ParamCircuit adjoint_circuit(const ParamCircuit& circuit) {
    ParamCircuit out;
    out.reserve(circuit.size());
    for (size_t i = circuit.size(); i-- > 0;) {
        qsim::ParamGate g = circuit[i];
        g.op.matrix = g.op.matrix.adjoint();
        g.op.label += "_dag";
        if (g.parameterized()) g.dmatrix = g.dmatrix.adjoint();
        out.push_back(std::move(g));
    }
    return out;
}

}  // namespace cnqe::noise
