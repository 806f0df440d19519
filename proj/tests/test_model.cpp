#include <doctest.h>

#include <random>

#include "dense_reference.hpp"
#include "wqed/model.hpp"

using namespace wqed;
using testref::to_eigen;

namespace {

SimParams params_1tls() {
    SimParams p;
    p.delta_t = 0.05;
    p.t_max = 1.0;
    p.d_sys = {2};
    p.d_t = {2, 2};
    p.gamma_l = {0.5};
    p.gamma_r = {0.5};
    return p;
}

SimParams params_feedback() {
    SimParams p = params_1tls();
    p.d_t = {2};
    p.tau = 0.5;
    p.phi = std::numbers::pi;
    return p;
}

SimParams params_2tls(bool delayed) {
    SimParams p;
    p.delta_t = 0.05;
    p.t_max = 1.0;
    p.d_sys = {2, 2};
    p.d_t = {2, 2};
    p.gamma_l = {0.5, 0.5};
    p.gamma_r = {0.5, 0.5};
    if (delayed) {
        p.tau = 0.5;
        p.phi = std::numbers::pi;
    }
    return p;
}

double hermiticity_defect(const Tensor& h) {
    const Eigen::MatrixXcd m = to_eigen(h);
    return (m - m.adjoint()).norm();
}

double unitarity_defect(const Tensor& u) {
    const Eigen::MatrixXcd m = to_eigen(u);
    return (m.adjoint() * m -
            Eigen::MatrixXcd::Identity(m.rows(), m.cols())).norm();
}

// total excitation over (system, bins...) for a gate generator layout
Eigen::MatrixXcd total_excitation_dense(const SimParams& p, int arity) {
    const long ds = p.sys_extent(), db = p.bin_extent();
    long dim = ds;
    for (int k = 1; k < arity; ++k) dim *= db;
    Eigen::MatrixXcd n = Eigen::MatrixXcd::Zero(dim, dim);
    const Eigen::MatrixXcd ns = to_eigen(sys_total_excitation(p));
    const Eigen::MatrixXcd nb = to_eigen(bin_total_number_op(p));
    auto embed = [&](const Eigen::MatrixXcd& op, int slot) {
        Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
        for (int s = 0; s < arity; ++s) {
            const long d = s == 0 ? ds : db;
            Eigen::MatrixXcd blk =
                s == slot ? op : Eigen::MatrixXcd::Identity(d, d);
            Eigen::MatrixXcd next(out.rows() * d, out.cols() * d);
            for (long i = 0; i < out.rows(); ++i)
                for (long j = 0; j < out.cols(); ++j)
                    next.block(i * d, j * d, d, d) = out(i, j) * blk;
            out = std::move(next);
        }
        return out;
    };
    n += embed(ns, 0);
    for (int s = 1; s < arity; ++s) n += embed(nb, s);
    return n;
}

} // namespace

TEST_SUITE("model") {

TEST_CASE("noise_operators: ladder scaling from the bin basis") {
    NoiseOps ops = noise_operators(2, 0.05);
    // annihilate |1> = sqrt(dt) |0>
    CHECK(std::abs(ops.annihilate[1] - Complex(std::sqrt(0.05))) < 1e-15);
    CHECK(std::abs(ops.annihilate[0]) < 1e-15);
    CHECK(std::abs(ops.annihilate[2]) < 1e-15);
    CHECK(std::abs(ops.annihilate[3]) < 1e-15);
    // vacuum expectation of the number operator
    CHECK(std::abs(ops.number[0]) < 1e-15);

    NoiseOps d3 = noise_operators(3, 0.05);
    // annihilate |2> = sqrt(2 dt) |1>
    CHECK(std::abs(d3.annihilate[1 * 3 + 2] - Complex(std::sqrt(2.0 * 0.05))) < 1e-15);

    // commutator on the vacuum level: <0|[a, adag]|0> = dt
    const Eigen::MatrixXcd a = to_eigen(ops.annihilate);
    const Eigen::MatrixXcd comm = a * a.adjoint() - a.adjoint() * a;
    CHECK(comm(0, 0).real() == doctest::Approx(0.05).epsilon(1e-14));

    CHECK_THROWS_AS(noise_operators(1, 0.05), ContractViolation);
}

TEST_CASE("hamiltonian_1tls: decoupled limit gives the identity propagator") {
    SimParams p = params_1tls();
    p.gamma_l = {0.0};
    p.gamma_r = {0.0};
    GateSequence seq = hamiltonian_1tls(p);
    const StepPropagator& u = seq.propagator(0);
    CHECK(max_abs_diff(u.gate, tensor_identity(8)) < 1e-14);
}

TEST_CASE("hamiltonian_1tls: Hermitian generator, unitary propagator") {
    std::mt19937 gen(201);
    std::uniform_real_distribution<double> rate(0.0, 2.0);
    for (int rep = 0; rep < 4; ++rep) {
        SimParams p = params_1tls();
        p.gamma_l = {rate(gen)};
        p.gamma_r = {rate(gen)};
        p.detuning = rate(gen) - 1.0;
        GateSequence seq = hamiltonian_1tls(p, PumpSpec::cw(rate(gen)));
        CHECK(hermiticity_defect(seq.generator(0)) < 1e-14);
        CHECK(unitarity_defect(seq.propagator(0).gate) < 1e-12);
    }
}

TEST_CASE("hamiltonian_1tls: single-step decay matches the second-order expansion") {
    SimParams p = params_1tls();
    GateSequence seq = hamiltonian_1tls(p);
    const Eigen::MatrixXcd u = to_eigen(seq.propagator(0).gate);
    // |e, vac> is index (1,0,0) -> 1 * 4 + 0 = 4 in (sys, bin) row-major
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(8);
    v(4) = 1.0;
    const Eigen::VectorXcd w = u * v;
    double pop = std::norm(w(4)) + std::norm(w(5)) + std::norm(w(6)) + std::norm(w(7));
    const double gdt = (p.gamma_l[0] + p.gamma_r[0]) * p.delta_t;
    CHECK(std::abs(pop - (1.0 - gdt)) < gdt * gdt);
}

TEST_CASE("hamiltonian_1tls_feedback: decoupled mirror side reduces to the Markovian gate") {
    SimParams p = params_feedback();
    p.gamma_l = {0.0};
    p.phi = 1.234;
    GateSequence fb = hamiltonian_1tls_feedback(p);

    SimParams pm = p;
    pm.d_t = {2};  // single channel on the Markovian side too
    // build the reference by hand: same coupling on (sys, present), identity on feedback
    const Tensor gen3 = fb.generator(0);
    const Eigen::MatrixXcd h3 = to_eigen(gen3);
    // the feedback leg must be untouched: h3 = h2 (x) I_2
    Eigen::MatrixXcd h2 = Eigen::MatrixXcd::Zero(4, 4);
    for (long i = 0; i < 4; ++i)
        for (long j = 0; j < 4; ++j) h2(i, j) = h3(i * 2, j * 2);
    for (long i = 0; i < 4; ++i)
        for (long j = 0; j < 4; ++j) {
            CHECK(std::abs(h3(i * 2, j * 2) - h2(i, j)) < 1e-14);
            CHECK(std::abs(h3(i * 2 + 1, j * 2 + 1) - h2(i, j)) < 1e-14);
            if (i != j) CHECK(std::abs(h3(i * 2, j * 2 + 1)) < 1e-14);
        }
    CHECK(hermiticity_defect(gen3) < 1e-14);
    CHECK(unitarity_defect(fb.propagator(0).gate) < 1e-12);
}

TEST_CASE("hamiltonian_2tls_mar: gamma = 0 is the identity") {
    SimParams p = params_2tls(false);
    p.gamma_l = {0.0, 0.0};
    p.gamma_r = {0.0, 0.0};
    GateSequence seq = hamiltonian_2tls_mar(p);
    CHECK(max_abs_diff(seq.propagator(0).gate, tensor_identity(16)) < 1e-14);
}

TEST_CASE("excitation-number conservation for all zero-pump generators") {
    SimParams p1 = params_1tls();
    p1.detuning = 0.7;
    GateSequence a = hamiltonian_1tls(p1);
    Eigen::MatrixXcd n = total_excitation_dense(p1, 2);
    Eigen::MatrixXcd h = to_eigen(a.generator(0));
    CHECK((h * n - n * h).norm() < 1e-12);

    SimParams pf = params_feedback();
    GateSequence b = hamiltonian_1tls_feedback(pf);
    n = total_excitation_dense(pf, 3);
    h = to_eigen(b.generator(0));
    CHECK((h * n - n * h).norm() < 1e-12);

    SimParams p2 = params_2tls(false);
    p2.phi = 2.1;
    GateSequence c = hamiltonian_2tls_mar(p2);
    n = total_excitation_dense(p2, 2);
    h = to_eigen(c.generator(0));
    CHECK((h * n - n * h).norm() < 1e-12);

    SimParams p3 = params_2tls(true);
    GateSequence d = hamiltonian_2tls_nmar(p3);
    n = total_excitation_dense(p3, 3);
    h = to_eigen(d.generator(0));
    CHECK((h * n - n * h).norm() < 1e-12);
}

TEST_CASE("chiral limit: no left-channel terms in the generator") {
    SimParams p = params_1tls();
    p.gamma_l = {0.0};
    GateSequence seq = hamiltonian_1tls(p);
    const Eigen::MatrixXcd h = to_eigen(seq.generator(0));
    // basis (sys, n_r, n_l): any element that changes n_l must vanish
    for (long r = 0; r < 8; ++r)
        for (long c = 0; c < 8; ++c) {
            const long nl_r = r % 2, nl_c = c % 2;
            if (nl_r != nl_c) CHECK(std::abs(h(r, c)) == 0.0);
        }
}

TEST_CASE("coupling rescale: gamma * s^2 with time / s^2 leaves the gate invariant") {
    SimParams p = params_1tls();
    GateSequence a = hamiltonian_1tls(p);
    SimParams q = p;
    const double s2 = 4.0;
    q.gamma_l = {p.gamma_l[0] * s2};
    q.gamma_r = {p.gamma_r[0] * s2};
    q.delta_t = p.delta_t / s2;
    GateSequence b = hamiltonian_1tls(q);
    CHECK(max_abs_diff(a.generator(0), b.generator(0)) < 1e-14);
}

TEST_CASE("build_propagator: identity, unitarity and step composition") {
    Tensor zero({4, 4});
    StepPropagator u0 = build_propagator(zero, 2, {2, 2});
    CHECK(max_abs_diff(u0.gate, tensor_identity(4)) < 1e-14);

    std::mt19937 gen(202);
    Tensor h = Tensor::from_matrix(testref::random_hermitian(4, gen));
    StepPropagator full = build_propagator(h, 2, {2, 2});
    StepPropagator half = build_propagator(h.scaled(0.5), 2, {2, 2});
    CHECK(unitarity_defect(full.gate) < 1e-12);
    const Eigen::MatrixXcd hh = to_eigen(half.gate);
    CHECK((hh * hh - to_eigen(full.gate)).norm() < 1e-12);

    Tensor nonherm({2, 2});
    nonherm[1] = 1.0;
    CHECK_THROWS_AS(build_propagator(nonherm, 2, {2}), ContractViolation);
}

TEST_CASE("pump plumbing: cw is constant, envelopes are per step") {
    PumpSpec cw = PumpSpec::cw(2.0);
    CHECK(cw.at(0) == 2.0);
    CHECK(cw.at(100) == 2.0);

    PumpSpec env = PumpSpec::from_samples({0.5, 1.5});
    CHECK(env.at(1) == 1.5);
    CHECK_THROWS_AS(env.at(2), DimensionError);

    SimParams p = params_1tls();
    GateSequence seq = hamiltonian_1tls(p, env);
    CHECK(seq.time_dependent());
    CHECK(max_abs_diff(seq.generator(0), seq.generator(1)) > 1e-3);
}

TEST_CASE("gaussian_pulse_area: the sampled area matches the request") {
    SimParams p = params_1tls();
    p.t_max = 8.0;
    const double area = std::numbers::pi;
    const auto samples = gaussian_pulse_area(area, 1.5, 0.5, p);
    double acc = 0.0;
    for (double v : samples) acc += v * p.delta_t;
    CHECK(acc == doctest::Approx(area).epsilon(1e-3));
}

TEST_CASE("hamiltonians reject mismatched channel layouts") {
    SimParams p = params_1tls();
    p.d_t = {2};  // the infinite-waveguide model needs two channels
    CHECK_THROWS_AS(hamiltonian_1tls(p), DimensionError);
    SimParams q = params_feedback();
    q.d_t = {2, 2};  // the folded mirror geometry has a single channel
    CHECK_THROWS_AS(hamiltonian_1tls_feedback(q), DimensionError);
    SimParams r = params_2tls(true);
    r.tau = 0.0;
    CHECK_THROWS_AS(hamiltonian_2tls_nmar(r), ContractViolation);
}

TEST_CASE("SimParams: validation catches bad values") {
    SimParams p = params_1tls();
    p.tau = 0.0501;  // not a multiple of delta_t
    CHECK_THROWS_AS(p.validate(), ContractViolation);
    SimParams q = params_1tls();
    q.bond_max = 0;
    CHECK_THROWS_AS(q.validate(), ContractViolation);
    SimParams r = params_1tls();
    r.gamma_l = {-0.2};
    CHECK_THROWS_AS(r.validate(), ContractViolation);
}

TEST_CASE("operator builders: populations and channel numbers") {
    SimParams p = params_2tls(false);
    const Tensor n1 = tls_pop(0, p);
    const Tensor n2 = tls_pop(1, p);
    // |e,g> = index 2
    CHECK(std::abs(n1[2 * 4 + 2] - Complex(1.0)) < 1e-15);
    CHECK(std::abs(n2[2 * 4 + 2]) < 1e-15);
    const Tensor ntot = sys_total_excitation(p);
    CHECK(std::abs(ntot[3 * 4 + 3] - Complex(2.0)) < 1e-15);

    const Tensor nr = bin_number_op(Channel::right, p);
    const Tensor nl = bin_number_op(Channel::left, p);
    // bin basis (n_r, n_l) row-major: |1,0> = 2, |0,1> = 1
    CHECK(std::abs(nr[2 * 4 + 2] - Complex(1.0)) < 1e-15);
    CHECK(std::abs(nl[1 * 4 + 1] - Complex(1.0)) < 1e-15);
}

} // TEST_SUITE
