#include <catch2/catch_amalgamated.hpp>

#include "cnqe/qsim.hpp"
#include "cnqe/rng.hpp"

using namespace cnqe;
using namespace cnqe::qsim;

namespace {

StateVector random_state(int n, rng::Stream& s) {
    StateVector v(n);
    for (auto& a : v.amps) a = cdouble(s.normal(), s.normal());
    const double nrm = norm2(v.amps);
    for (auto& a : v.amps) a /= nrm;
    return v;
}

CMatrix random_hermitian(int dim, rng::Stream& s) {
    CMatrix m(dim, dim);
    for (int i = 0; i < dim; ++i) {
        m(i, i) = s.normal();
        for (int j = i + 1; j < dim; ++j) {
            const cdouble z(s.normal(), s.normal());
            m(i, j) = z;
            m(j, i) = std::conj(z);
        }
    }
    return m;
}

DensityMatrix random_density(int n, rng::Stream& s) {
    const int dim = 1 << n;
    CMatrix g(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) g(i, j) = cdouble(s.normal(), s.normal());
    CMatrix rho = g * g.adjoint();
    rho *= cdouble(1.0 / rho.trace().real(), 0.0);
    return DensityMatrix(n, rho);
}

}  // namespace

TEST_CASE("apply X flips |0> to |1>") {
    StateVector s(1);
    s = apply_gate(s, gates::make("x", gates::pauli_x(), {0}));
    REQUIRE(std::abs(s.amps[0]) < 1e-15);
    REQUIRE(std::abs(s.amps[1] - cdouble(1.0)) < 1e-15);
}

TEST_CASE("apply H gives the equal superposition") {
    StateVector s(1);
    s = apply_gate(s, gates::make("h", gates::hadamard(), {0}));
    const double r = 1.0 / std::sqrt(2.0);
    REQUIRE(std::abs(s.amps[0] - cdouble(r)) < 1e-15);
    REQUIRE(std::abs(s.amps[1] - cdouble(r)) < 1e-15);
}

TEST_CASE("RZZ on |00> matches the direct 4x4 product and preserves norm") {
    rng::Stream rs(314);
    for (int trial = 0; trial < 20; ++trial) {
        const double t = rs.uniform(-6.0, 6.0);
        StateVector s(2);
        s = apply_gate(s, gates::make("rzz", gates::rzz(t), {0, 1}));
        // Direct matrix-vector product oracle.
        const CMatrix m = gates::rzz(t);
        cvector expect = m * cvector{1, 0, 0, 0};
        for (int i = 0; i < 4; ++i) REQUIRE(std::abs(s.amps[i] - expect[i]) < 1e-14);
        REQUIRE(std::abs(s.norm() - 1.0) < 1e-10);
        // |00> only picks up the e^{-i t/2} phase.
        REQUIRE(std::abs(s.amps[0] - std::polar(1.0, -t / 2)) < 1e-14);
    }
}

TEST_CASE("apply_gate validates its inputs") {
    StateVector s(2);
    REQUIRE_THROWS_AS(apply_gate(s, gates::make("x", gates::pauli_x(), {2})), std::out_of_range);
    CMatrix bad = gates::pauli_x();
    bad(0, 0) = 0.5;
    REQUIRE_THROWS_AS(apply_gate(s, gates::make("bad", bad, {0})), std::domain_error);
}

TEST_CASE("circuit_unitary basics") {
    REQUIRE((circuit_unitary({}, 2) - CMatrix::identity(4)).max_abs() < 1e-15);

    const CMatrix h = circuit_unitary({gates::make("h", gates::hadamard(), {0})}, 1);
    REQUIRE((h - gates::hadamard()).max_abs() < 1e-15);

    const auto cx01 = gates::make("cx", gates::cx(), {0, 1});
    const CMatrix twice = circuit_unitary({cx01, cx01}, 2);
    REQUIRE((twice - CMatrix::identity(4)).max_abs() < 1e-15);
}

TEST_CASE("gate application agrees with unitary assembly") {
    rng::Stream rs(2718);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<GateOp> circuit;
        circuit.push_back(gates::make("h", gates::hadamard(), {int(rs.below(3))}));
        circuit.push_back(gates::make("rx", gates::rx(rs.uniform(-3, 3)), {int(rs.below(3))}));
        circuit.push_back(gates::make("cx", gates::cx(), {0, 2}));
        circuit.push_back(gates::make("rzz", gates::rzz(rs.uniform(-3, 3)), {1, 2}));
        circuit.push_back(gates::make("cry", gates::cry(rs.uniform(-3, 3)), {2, 0}));

        StateVector chained(3);
        for (const auto& g : circuit) chained = apply_gate(chained, g);
        const CMatrix u = circuit_unitary(circuit, 3);
        const cvector direct = u * StateVector(3).amps;
        for (size_t i = 0; i < chained.dim(); ++i) REQUIRE(std::abs(chained.amps[i] - direct[i]) < 1e-10);
    }
}

TEST_CASE("to_density basics") {
    StateVector zero(1);
    DensityMatrix rho = to_density(zero);
    REQUIRE(std::abs(rho.entries(0, 0) - cdouble(1.0)) < 1e-15);
    REQUIRE(std::abs(rho.entries(1, 1)) < 1e-15);

    StateVector plus(1);
    plus = apply_gate(plus, gates::make("h", gates::hadamard(), {0}));
    rho = to_density(plus);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) REQUIRE(std::abs(rho.entries(i, j) - cdouble(0.5)) < 1e-14);

    rng::Stream rs(55);
    StateVector r = random_state(2, rs);
    rho = to_density(r);
    const cdouble purity = (rho.entries * rho.entries).trace();
    REQUIRE(std::abs(purity - cdouble(1.0)) < 1e-10);
    rho.check_valid(1e-10);
}

namespace {

KrausChannel depolarizing1(double p) {
    using namespace cnqe::qsim::gates;
    KrausChannel ch;
    ch.targets = {0};
    const double w0 = std::sqrt(1.0 - p + p / 4.0), w = std::sqrt(p / 4.0);
    ch.operators.push_back(CMatrix::identity(2) * cdouble(w0, 0));
    ch.operators.push_back(pauli_x() * cdouble(w, 0));
    ch.operators.push_back(pauli_y() * cdouble(w, 0));
    ch.operators.push_back(pauli_z() * cdouble(w, 0));
    return ch;
}

}  // namespace

TEST_CASE("apply_channel identity and depolarizing fixed points") {
    rng::Stream rs(77);
    DensityMatrix rho = random_density(1, rs);

    KrausChannel id;
    id.targets = {0};
    id.operators.push_back(CMatrix::identity(2));
    const DensityMatrix same = apply_channel(rho, id);
    REQUIRE((same.entries - rho.entries).max_abs() < 1e-14);

    DensityMatrix zero(1);
    const DensityMatrix mixed = apply_channel(zero, depolarizing1(1.0));
    REQUIRE(std::abs(mixed.entries(0, 0) - cdouble(0.5)) < 1e-12);
    REQUIRE(std::abs(mixed.entries(1, 1) - cdouble(0.5)) < 1e-12);

    // p = 0.5 on |0><0| -> diag(0.75, 0.25): expand (1-p) rho + p I/2.
    const DensityMatrix half = apply_channel(zero, depolarizing1(0.5));
    REQUIRE(std::abs(half.entries(0, 0) - cdouble(0.75)) < 1e-12);
    REQUIRE(std::abs(half.entries(1, 1) - cdouble(0.25)) < 1e-12);
}

TEST_CASE("apply_channel rejects non-trace-preserving channels") {
    KrausChannel bad;
    bad.targets = {0};
    bad.operators.push_back(CMatrix::identity(2) * cdouble(0.9, 0));
    DensityMatrix rho(1);
    REQUIRE_THROWS_AS(apply_channel(rho, bad), std::domain_error);
}

TEST_CASE("apply_channel preserves trace and Hermiticity on random inputs") {
    rng::Stream rs(88);
    for (int trial = 0; trial < 20; ++trial) {
        DensityMatrix rho = random_density(2, rs);
        KrausChannel ch = depolarizing1(rs.uniform01());
        ch.targets = {int(rs.below(2))};
        const DensityMatrix out = apply_channel(rho, ch);
        REQUIRE(std::abs(out.entries.trace() - cdouble(1.0)) < 1e-12);
        REQUIRE(out.entries.hermiticity_defect() < 1e-12);
    }
}

TEST_CASE("hermitian_eigenvalues on simple matrices") {
    CMatrix d(3, 3);
    d(0, 0) = 3;
    d(1, 1) = 1;
    d(2, 2) = 2;
    const auto ev = hermitian_eigenvalues(d);
    REQUIRE(ev[0] == Catch::Approx(3.0).margin(1e-12));
    REQUIRE(ev[1] == Catch::Approx(2.0).margin(1e-12));
    REQUIRE(ev[2] == Catch::Approx(1.0).margin(1e-12));

    const auto evx = hermitian_eigenvalues(gates::pauli_x());
    REQUIRE(evx[0] == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(evx[1] == Catch::Approx(-1.0).margin(1e-12));
}

TEST_CASE("hermitian_eigenvalues trace identities on random 16x16") {
    rng::Stream rs(1234);
    for (int trial = 0; trial < 5; ++trial) {
        const CMatrix m = random_hermitian(16, rs);
        const auto ev = hermitian_eigenvalues(m);
        double sum = 0.0, sumsq = 0.0;
        for (double v : ev) {
            sum += v;
            sumsq += v * v;
        }
        REQUIRE(sum == Catch::Approx(m.trace().real()).margin(1e-8));
        REQUIRE(sumsq == Catch::Approx((m * m).trace().real()).margin(1e-8));
    }
}

TEST_CASE("eigenvalues of -A negate those of A") {
    rng::Stream rs(4321);
    for (int trial = 0; trial < 10; ++trial) {
        const CMatrix m = random_hermitian(8, rs);
        CMatrix neg = m;
        neg *= cdouble(-1.0, 0.0);
        auto ea = hermitian_eigenvalues(m);
        auto eb = hermitian_eigenvalues(neg);
        std::reverse(eb.begin(), eb.end());
        for (size_t i = 0; i < ea.size(); ++i) REQUIRE(ea[i] == Catch::Approx(-eb[i]).margin(1e-9));
    }
}

TEST_CASE("eigenvectors reconstruct the matrix") {
    rng::Stream rs(919);
    const CMatrix m = random_hermitian(8, rs);
    const auto r = hermitian_eig(m);
    CMatrix d(8, 8);
    for (int i = 0; i < 8; ++i) d(i, i) = r.values[i];
    const CMatrix rec = r.vectors * d * r.vectors.adjoint();
    REQUIRE((rec - m).max_abs() < 1e-9);
}

TEST_CASE("hermitian_eigenvalues rejects non-Hermitian input") {
    CMatrix m(2, 2);
    m(0, 1) = 1.0;  // strictly upper, defect 1
    REQUIRE_THROWS_AS(hermitian_eigenvalues(m), std::domain_error);
}

TEST_CASE("expectation values on basis and superposition states") {
    const CMatrix z = gates::pauli_z();
    StateVector zero(1);
    REQUIRE(expectation(zero, z) == Catch::Approx(1.0));

    StateVector plus = apply_gate(zero, gates::make("h", gates::hadamard(), {0}));
    REQUIRE(expectation(plus, z) == Catch::Approx(0.0).margin(1e-14));

    StateVector s(1, {std::sqrt(0.3), std::sqrt(0.7)});
    REQUIRE(expectation(s, z) == Catch::Approx(-0.4).margin(1e-12));

    REQUIRE_THROWS_AS(expectation(StateVector(2), z), std::invalid_argument);
}

TEST_CASE("expectation bounded by observable spectrum") {
    rng::Stream rs(31);
    const CMatrix m = random_hermitian(4, rs);
    const auto ev = hermitian_eigenvalues(m);
    for (int trial = 0; trial < 20; ++trial) {
        const StateVector s = random_state(2, rs);
        const double e = expectation(s, m);
        REQUIRE(e <= ev.front() + 1e-10);
        REQUIRE(e >= ev.back() - 1e-10);
    }
}

TEST_CASE("paper 4x4 gate matrices") {
    // Controlled-RY with the rotation in the lower block.
    const double theta = 0.7;
    const CMatrix lower = gates::cry(2 * theta);
    const double c = std::cos(theta), s = std::sin(theta);
    CMatrix expect = CMatrix::identity(4);
    expect(2, 2) = c;
    expect(2, 3) = -s;
    expect(3, 2) = s;
    expect(3, 3) = c;
    REQUIRE((lower - expect).max_abs() < 1e-14);

    // Outer-block controlled-RY.
    const CMatrix outer = gates::cry_outer(2 * theta);
    CMatrix expect2 = CMatrix::identity(4);
    expect2(1, 1) = c;
    expect2(1, 3) = s;
    expect2(3, 1) = -s;
    expect2(3, 3) = c;
    REQUIRE((outer - expect2).max_abs() < 1e-14);

    // Middle-block rotation at beta = pi/2.
    const CMatrix mid = gates::rxx_plus_yy(2 * theta);
    CMatrix expect3 = CMatrix::identity(4);
    expect3(1, 1) = c;
    expect3(1, 2) = -s;
    expect3(2, 1) = s;
    expect3(2, 2) = c;
    REQUIRE((mid - expect3).max_abs() < 1e-14);

    REQUIRE(lower.is_unitary(1e-12));
    REQUIRE(outer.is_unitary(1e-12));
    REQUIRE(mid.is_unitary(1e-12));
}

TEST_CASE("gate derivative matrices match finite differences") {
    const double h = 1e-6;
    auto check = [&](auto f, auto df, double t) {
        const CMatrix fd = (f(t + h) - f(t - h)) * cdouble(1.0 / (2 * h), 0.0);
        REQUIRE((fd - df(t)).max_abs() < 1e-8);
    };
    using namespace cnqe::qsim::gates;
    check([](double t) { return rx(t); }, [](double t) { return drx(t); }, 0.37);
    check([](double t) { return ry(t); }, [](double t) { return dry(t); }, -1.2);
    check([](double t) { return rz(t); }, [](double t) { return drz(t); }, 2.5);
    check([](double t) { return rxx(t); }, [](double t) { return drxx(t); }, 0.9);
    check([](double t) { return ryy(t); }, [](double t) { return dryy(t); }, -0.4);
    check([](double t) { return rzz(t); }, [](double t) { return drzz(t); }, 1.7);
    check([](double t) { return crx(t); }, [](double t) { return dcrx(t); }, 0.55);
    check([](double t) { return cry(t); }, [](double t) { return dcry(t); }, -2.2);
    check([](double t) { return crz(t); }, [](double t) { return dcrz(t); }, 0.15);
    check([](double t) { return cry_outer(t); }, [](double t) { return dcry_outer(t); }, 1.05);
}
