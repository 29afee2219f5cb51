// Data-embedding circuits: the ZZ feature map, the noncommuting X/Y ring
// families (plain, controlled-gate, and Lorentz-rotation variants), and their
// three-layer stacks. Builders return gates with analytic parameter
// derivatives so losses can run reverse-mode through the simulator.
//
// Encodings are specified as exp(+i phi P); the simulator's rotation gates
// implement R_P(t) = exp(-i t P / 2), so builders pass t = -2 phi. The
// controlled-RY and partial-swap rotations of the Lorentz family are defined
// directly by their matrices and take the doubled angle as-is.

#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cnqe/qsim.hpp"

namespace cnqe::embed {

using qsim::GateOp;
using qsim::ParamCircuit;
using qsim::ParamGate;
using qsim::StateVector;

enum class FeatureMapKind {
    ZzUnit,    // (a)
    NcxUnit,   // (b)
    NcyUnit,   // (c)
    Nc10xUnit, // (d)
    Nc10yUnit, // (e)
    NclxUnit,  // (f)
    NclyUnit,  // (g)
    ZzStack,
    NcStack,
    Nc10Stack,
    NclStack,
};

enum class Axis { X, Y };

inline bool is_stack(FeatureMapKind k) {
    switch (k) {
        case FeatureMapKind::ZzStack:
        case FeatureMapKind::NcStack:
        case FeatureMapKind::Nc10Stack:
        case FeatureMapKind::NclStack:
            return true;
        default:
            return false;
    }
}

inline std::string to_string(FeatureMapKind k) {
    switch (k) {
        case FeatureMapKind::ZzUnit: return "zz_unit";
        case FeatureMapKind::NcxUnit: return "ncx_unit";
        case FeatureMapKind::NcyUnit: return "ncy_unit";
        case FeatureMapKind::Nc10xUnit: return "nc10x_unit";
        case FeatureMapKind::Nc10yUnit: return "nc10y_unit";
        case FeatureMapKind::NclxUnit: return "nclx_unit";
        case FeatureMapKind::NclyUnit: return "ncly_unit";
        case FeatureMapKind::ZzStack: return "zz";
        case FeatureMapKind::NcStack: return "nc";
        case FeatureMapKind::Nc10Stack: return "nc10";
        case FeatureMapKind::NclStack: return "ncl";
    }
    throw std::logic_error("unreachable feature map kind");
}

inline FeatureMapKind feature_map_from_string(const std::string& s) {
    if (s == "zz_unit") return FeatureMapKind::ZzUnit;
    if (s == "ncx_unit") return FeatureMapKind::NcxUnit;
    if (s == "ncy_unit") return FeatureMapKind::NcyUnit;
    if (s == "nc10x_unit") return FeatureMapKind::Nc10xUnit;
    if (s == "nc10y_unit") return FeatureMapKind::Nc10yUnit;
    if (s == "nclx_unit") return FeatureMapKind::NclxUnit;
    if (s == "ncly_unit") return FeatureMapKind::NclyUnit;
    if (s == "zz") return FeatureMapKind::ZzStack;
    if (s == "nc") return FeatureMapKind::NcStack;
    if (s == "nc10") return FeatureMapKind::Nc10Stack;
    if (s == "ncl") return FeatureMapKind::NclStack;
    throw std::invalid_argument("unknown feature map kind: " + s);
}

struct EmbeddingSpec {
    FeatureMapKind kind = FeatureMapKind::ZzUnit;
    int n_qubits = 4;
};

inline int unit_param_count(FeatureMapKind kind, int n) {
    if (n < 2) throw std::invalid_argument("feature maps require at least 2 qubits");
    switch (kind) {
        case FeatureMapKind::ZzUnit:
            return n * (n + 1) / 2;
        case FeatureMapKind::NcxUnit:
        case FeatureMapKind::NcyUnit:
        case FeatureMapKind::Nc10xUnit:
        case FeatureMapKind::Nc10yUnit:
        case FeatureMapKind::NclxUnit:
        case FeatureMapKind::NclyUnit:
            return 2 * n;
        case FeatureMapKind::ZzStack:
            return 3 * (n * (n + 1) / 2);
        case FeatureMapKind::NcStack:
        case FeatureMapKind::Nc10Stack:
        case FeatureMapKind::NclStack:
            return 3 * (2 * n);
    }
    throw std::logic_error("unreachable feature map kind");
}

inline int param_count(const EmbeddingSpec& spec) { return unit_param_count(spec.kind, spec.n_qubits); }

namespace detail {

inline void check_len(size_t got, size_t want, const char* what) {
    if (got != want)
        throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(want) +
                                    " parameters, got " + std::to_string(got));
}

// Parameterized rotation with angle = -2 * theta[param_index + offset].
inline ParamGate rot_param(const std::string& label, const CMatrix& m, const CMatrix& dm_dangle,
                           std::vector<int> targets, int param_index) {
    ParamGate g;
    g.op = GateOp{m, std::move(targets), label};
    g.param_index = param_index;
    g.dmatrix = dm_dangle * cdouble(-2.0, 0.0);  // d(angle)/d(theta) = -2
    return g;
}

inline ParamGate fixed_gate(const std::string& label, const CMatrix& m, std::vector<int> targets) {
    ParamGate g;
    g.op = GateOp{m, std::move(targets), label};
    return g;
}

}  // namespace detail

// ZZ feature map unit: Hadamard layer, then RZ(-2 theta_i) on each qubit, then
// RZZ(-2 theta_k) on each pair i<j in lexicographic order (k = n..n(n+1)/2-1).
// All Z-block generators commute, so ordering inside the block is irrelevant.
inline ParamCircuit build_zz_unit(const std::vector<double>& theta, int n, int param_offset = 0) {
    detail::check_len(theta.size(), size_t(n) * (n + 1) / 2, "zz unit");
    namespace g = qsim::gates;
    ParamCircuit c;
    for (int q = 0; q < n; ++q) c.push_back(detail::fixed_gate("h", g::hadamard(), {q}));
    for (int q = 0; q < n; ++q)
        c.push_back(detail::rot_param("rz", g::rz(-2 * theta[q]), g::drz(-2 * theta[q]), {q},
                                      param_offset + q));
    int k = n;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j, ++k)
            c.push_back(detail::rot_param("rzz", g::rzz(-2 * theta[k]), g::drzz(-2 * theta[k]), {i, j},
                                          param_offset + k));
    return c;
}

// NC unit: single-qubit P rotations then a ring of two-qubit P(x)P rotations
// over pairs (i, i+1 mod n). All generators share one Pauli axis and commute.
inline ParamCircuit build_nc_unit(const std::vector<double>& theta, int n, Axis axis,
                                  int param_offset = 0) {
    detail::check_len(theta.size(), size_t(2) * n, "nc unit");
    namespace g = qsim::gates;
    ParamCircuit c;
    for (int q = 0; q < n; ++q) {
        const double a = -2 * theta[q];
        if (axis == Axis::X)
            c.push_back(detail::rot_param("rx", g::rx(a), g::drx(a), {q}, param_offset + q));
        else
            c.push_back(detail::rot_param("ry", g::ry(a), g::dry(a), {q}, param_offset + q));
    }
    for (int i = 0; i < n; ++i) {
        const int j = (i + 1) % n;
        const double a = -2 * theta[i + n];
        if (axis == Axis::X)
            c.push_back(detail::rot_param("rxx", g::rxx(a), g::drxx(a), {i, j}, param_offset + i + n));
        else
            c.push_back(detail::rot_param("ryy", g::ryy(a), g::dryy(a), {i, j}, param_offset + i + n));
    }
    return c;
}

// Circuit-10 style unit: rotation layer, ring of CX/CY gates with ascending
// control index i (control i, target i+1 mod n), then a second rotation layer.
inline ParamCircuit build_nc10_unit(const std::vector<double>& theta, int n, Axis axis,
                                    int param_offset = 0) {
    detail::check_len(theta.size(), size_t(2) * n, "nc10 unit");
    namespace g = qsim::gates;
    ParamCircuit c;
    auto rot = [&](double t, int q, int pidx) {
        const double a = -2 * t;
        return axis == Axis::X ? detail::rot_param("rx", g::rx(a), g::drx(a), {q}, pidx)
                               : detail::rot_param("ry", g::ry(a), g::dry(a), {q}, pidx);
    };
    for (int q = 0; q < n; ++q) c.push_back(rot(theta[q], q, param_offset + q));
    for (int i = 0; i < n; ++i) {
        const int j = (i + 1) % n;
        c.push_back(axis == Axis::X ? detail::fixed_gate("cx", g::cx(), {i, j})
                                    : detail::fixed_gate("cy", g::cy(), {i, j}));
    }
    for (int q = 0; q < n; ++q) c.push_back(rot(theta[q + n], q, param_offset + q + n));
    return c;
}

// Lorentz-rotation unit: rotation layer, then a ring of controlled-RY gates
// taking the doubled angle 2*theta[i+n] directly. For axis X the rotation sits
// in the lower block (control i+1 mod n, target i); for axis Y it sits in the
// outer block (control i, target i+1 mod n).
inline ParamCircuit build_ncl_unit(const std::vector<double>& theta, int n, Axis axis,
                                   int param_offset = 0) {
    detail::check_len(theta.size(), size_t(2) * n, "ncl unit");
    namespace g = qsim::gates;
    ParamCircuit c;
    for (int q = 0; q < n; ++q) {
        const double a = -2 * theta[q];
        if (axis == Axis::X)
            c.push_back(detail::rot_param("rx", g::rx(a), g::drx(a), {q}, param_offset + q));
        else
            c.push_back(detail::rot_param("ry", g::ry(a), g::dry(a), {q}, param_offset + q));
    }
    for (int i = 0; i < n; ++i) {
        const int j = (i + 1) % n;
        const double a = 2 * theta[i + n];
        ParamGate pg;
        if (axis == Axis::X) {
            pg.op = GateOp{g::cry(a), {j, i}, "cry"};
            pg.dmatrix = g::dcry(a) * cdouble(2.0, 0.0);
        } else {
            pg.op = GateOp{g::cry_outer(a), {i, j}, "cry_outer"};
            pg.dmatrix = g::dcry_outer(a) * cdouble(2.0, 0.0);
        }
        pg.param_index = param_offset + i + n;
        c.push_back(pg);
    }
    return c;
}

// Three-layer stack: unit(theta1) applied first, then the middle unit (axis Y
// for the NC families), then unit(theta3) on axis X. The ZZ stack repeats the
// same unit three times.
inline ParamCircuit build_stacked(FeatureMapKind kind, const std::vector<double>& theta, int n) {
    const int total = unit_param_count(kind, n);
    detail::check_len(theta.size(), size_t(total), "stacked map");
    const int unit = total / 3;
    std::vector<double> t1(theta.begin(), theta.begin() + unit);
    std::vector<double> t2(theta.begin() + unit, theta.begin() + 2 * unit);
    std::vector<double> t3(theta.begin() + 2 * unit, theta.end());

    ParamCircuit c;
    auto append = [&](ParamCircuit part) {
        for (auto& g : part) c.push_back(std::move(g));
    };
    switch (kind) {
        case FeatureMapKind::ZzStack:
            append(build_zz_unit(t1, n, 0));
            append(build_zz_unit(t2, n, unit));
            append(build_zz_unit(t3, n, 2 * unit));
            break;
        case FeatureMapKind::NcStack:
            append(build_nc_unit(t1, n, Axis::X, 0));
            append(build_nc_unit(t2, n, Axis::Y, unit));
            append(build_nc_unit(t3, n, Axis::X, 2 * unit));
            break;
        case FeatureMapKind::Nc10Stack:
            append(build_nc10_unit(t1, n, Axis::X, 0));
            append(build_nc10_unit(t2, n, Axis::Y, unit));
            append(build_nc10_unit(t3, n, Axis::X, 2 * unit));
            break;
        case FeatureMapKind::NclStack:
            append(build_ncl_unit(t1, n, Axis::X, 0));
            append(build_ncl_unit(t2, n, Axis::Y, unit));
            append(build_ncl_unit(t3, n, Axis::X, 2 * unit));
            break;
        default:
            throw std::invalid_argument("build_stacked called with a unit kind");
    }
    return c;
}

inline ParamCircuit build(const EmbeddingSpec& spec, const std::vector<double>& features) {
    switch (spec.kind) {
        case FeatureMapKind::ZzUnit: return build_zz_unit(features, spec.n_qubits);
        case FeatureMapKind::NcxUnit: return build_nc_unit(features, spec.n_qubits, Axis::X);
        case FeatureMapKind::NcyUnit: return build_nc_unit(features, spec.n_qubits, Axis::Y);
        case FeatureMapKind::Nc10xUnit: return build_nc10_unit(features, spec.n_qubits, Axis::X);
        case FeatureMapKind::Nc10yUnit: return build_nc10_unit(features, spec.n_qubits, Axis::Y);
        case FeatureMapKind::NclxUnit: return build_ncl_unit(features, spec.n_qubits, Axis::X);
        case FeatureMapKind::NclyUnit: return build_ncl_unit(features, spec.n_qubits, Axis::Y);
        default: return build_stacked(spec.kind, features, spec.n_qubits);
    }
}

inline StateVector embed_state(const EmbeddingSpec& spec, const std::vector<double>& features) {
    const ParamCircuit c = build(spec, features);
    StateVector s(spec.n_qubits);
    for (const auto& g : c) s = qsim::apply_gate(s, g.op);
    return s;
}

}  // namespace cnqe::embed
