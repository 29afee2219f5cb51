// QCNN classifier circuit: alternating parameter-shared convolution and
// qubit-discarding pooling layers, a per-qubit RY refinement before the last
// convolution, and an RZ-RY-RZ readout block. Pooling discards a qubit by
// never touching it again; the readout is the highest surviving qubit.

#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "cnqe/circuit_grad.hpp"
#include "cnqe/qsim.hpp"

namespace cnqe::ansatz {

using qsim::DensityMatrix;
using qsim::ParamCircuit;
using qsim::ParamGate;
using qsim::StateVector;

struct QcnnSpec {
    enum class LayerKind { Conv, Pool, RyRefine, Readout };

    struct Layer {
        LayerKind kind;
        std::vector<std::pair<int, int>> pairs;  // conv: (a, b); pool: (discard, keep)
        std::vector<int> qubits;                 // refine targets / readout qubit
        int param_count = 0;
    };

    int n_qubits = 4;
    std::vector<Layer> layout;
    int total_params = 0;
    int readout_qubit = 0;

    // Default family: conv+pool stages halving the survivors, an RY layer on
    // every qubit before the final conv, and a 3-parameter readout. At n = 4
    // this is exactly 15 parameters.
    static QcnnSpec default_for(int n_qubits) {
        if (n_qubits < 2) throw std::invalid_argument("qcnn needs at least 2 qubits");
        QcnnSpec spec;
        spec.n_qubits = n_qubits;
        std::vector<int> survivors(n_qubits);
        for (int i = 0; i < n_qubits; ++i) survivors[i] = i;

        auto ring_pairs = [](const std::vector<int>& q) {
            std::vector<std::pair<int, int>> pairs;
            const int s = static_cast<int>(q.size());
            if (s == 2) {
                pairs.emplace_back(q[0], q[1]);
                return pairs;
            }
            for (int i = 0; i < s; i += 2) pairs.emplace_back(q[i], q[(i + 1) % s]);
            for (int i = 1; i < s; i += 2) pairs.emplace_back(q[i], q[(i + 1) % s]);
            return pairs;
        };

        while (survivors.size() > 2) {
            spec.layout.push_back({LayerKind::Conv, ring_pairs(survivors), {}, 2});
            Layer pool{LayerKind::Pool, {}, {}, 2};
            std::vector<int> next;
            for (size_t i = 0; i + 1 < survivors.size(); i += 2) {
                pool.pairs.emplace_back(survivors[i], survivors[i + 1]);
                next.push_back(survivors[i + 1]);
            }
            if (survivors.size() % 2 == 1) next.push_back(survivors.back());
            spec.layout.push_back(pool);
            survivors = next;
        }

        std::vector<int> all(n_qubits);
        for (int i = 0; i < n_qubits; ++i) all[i] = i;
        spec.layout.push_back({LayerKind::RyRefine, {}, all, n_qubits});

        spec.layout.push_back({LayerKind::Conv, {{survivors[0], survivors[1]}}, {}, 2});
        spec.layout.push_back({LayerKind::Pool, {{survivors[0], survivors[1]}}, {}, 2});
        spec.readout_qubit = survivors[1];
        spec.layout.push_back({LayerKind::Readout, {}, {spec.readout_qubit}, 3});

        for (const auto& l : spec.layout) spec.total_params += l.param_count;
        return spec;
    }
};

inline ParamCircuit build_qcnn(const QcnnSpec& spec, const std::vector<double>& theta) {
    if (static_cast<int>(theta.size()) != spec.total_params)
        throw std::invalid_argument("qcnn parameter count mismatch");
    namespace g = qsim::gates;
    ParamCircuit c;
    int p = 0;
    auto rot = [&](const char* label, const CMatrix& m, const CMatrix& dm, std::vector<int> t, int idx) {
        ParamGate pg;
        pg.op = qsim::GateOp{m, std::move(t), label};
        pg.param_index = idx;
        pg.dmatrix = dm;
        c.push_back(pg);
    };
    for (const auto& layer : spec.layout) {
        switch (layer.kind) {
            case QcnnSpec::LayerKind::Conv: {
                const double t0 = theta[p], t1 = theta[p + 1];
                for (const auto& [a, b] : layer.pairs) {
                    rot("ry", g::ry(t0), g::dry(t0), {a}, p);
                    rot("ry", g::ry(t1), g::dry(t1), {b}, p + 1);
                    c.push_back(ParamGate{qsim::GateOp{g::cx(), {a, b}, "cx"}, -1, {}});
                }
                p += 2;
                break;
            }
            case QcnnSpec::LayerKind::Pool: {
                const double t0 = theta[p], t1 = theta[p + 1];
                for (const auto& [d, k] : layer.pairs) {
                    rot("crz", g::crz(t0), g::dcrz(t0), {d, k}, p);
                    c.push_back(ParamGate{qsim::GateOp{g::pauli_x(), {d}, "x"}, -1, {}});
                    rot("crx", g::crx(t1), g::dcrx(t1), {d, k}, p + 1);
                    c.push_back(ParamGate{qsim::GateOp{g::pauli_x(), {d}, "x"}, -1, {}});
                }
                p += 2;
                break;
            }
            case QcnnSpec::LayerKind::RyRefine: {
                for (size_t i = 0; i < layer.qubits.size(); ++i) {
                    const double t = theta[p + int(i)];
                    rot("ry", g::ry(t), g::dry(t), {layer.qubits[i]}, p + int(i));
                }
                p += layer.param_count;
                break;
            }
            case QcnnSpec::LayerKind::Readout: {
                const int q = layer.qubits[0];
                rot("rz", g::rz(theta[p]), g::drz(theta[p]), {q}, p);
                rot("ry", g::ry(theta[p + 1]), g::dry(theta[p + 1]), {q}, p + 1);
                rot("rz", g::rz(theta[p + 2]), g::drz(theta[p + 2]), {q}, p + 2);
                p += 3;
                break;
            }
        }
    }
    return c;
}

// p = (1 + <Z_readout>) / 2; class 1 is predicted when p >= 0.5.
inline double qcnn_predict(const QcnnSpec& spec, const std::vector<double>& theta,
                           const StateVector& embedded) {
    if (embedded.n_qubits != spec.n_qubits) throw std::invalid_argument("qcnn qubit count mismatch");
    StateVector s = embedded;
    for (const auto& g : build_qcnn(spec, theta)) qsim::apply_gate_inplace(s, g.op.matrix, g.op.targets);
    return 0.5 * (1.0 + qsim::expectation(s, qsim::z_observable(spec.readout_qubit, spec.n_qubits)));
}

inline double qcnn_predict(const QcnnSpec& spec, const std::vector<double>& theta,
                           const DensityMatrix& embedded) {
    if (embedded.n_qubits != spec.n_qubits) throw std::invalid_argument("qcnn qubit count mismatch");
    DensityMatrix rho = embedded;
    for (const auto& g : build_qcnn(spec, theta)) qsim::conjugate_inplace(rho, g.op.matrix, g.op.targets);
    return 0.5 * (1.0 + qsim::expectation(rho, qsim::z_observable(spec.readout_qubit, spec.n_qubits)));
}

struct PredictGrad {
    double p = 0.0;
    std::vector<double> grad;  // dp/dtheta
};

inline PredictGrad qcnn_predict_grad(const QcnnSpec& spec, const std::vector<double>& theta,
                                     const StateVector& embedded) {
    const auto circuit = build_qcnn(spec, theta);
    const auto eg = grad::expectation_grad(circuit, spec.n_qubits, embedded,
                                           qsim::z_observable(spec.readout_qubit, spec.n_qubits),
                                           spec.total_params);
    PredictGrad out;
    out.p = 0.5 * (1.0 + eg.value);
    out.grad.resize(eg.grad.size());
    for (size_t i = 0; i < eg.grad.size(); ++i) out.grad[i] = 0.5 * eg.grad[i];
    return out;
}

}  // namespace cnqe::ansatz
