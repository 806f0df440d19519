#include <doctest.h>

#include <cmath>

#include "dense_reference.hpp"
#include "wqed/correlations.hpp"
#include "wqed/observables.hpp"
#include "wqed/oracles.hpp"

using namespace wqed;

namespace {

SimParams base_params(double t_max = 8.0) {
    SimParams p;
    p.delta_t = 0.05;
    p.t_max = t_max;
    p.d_sys = {2};
    p.d_t = {2, 2};
    p.gamma_l = {0.5};
    p.gamma_r = {0.5};
    p.bond_max = 4;
    return p;
}

BinsRecord fock_run(int photons, double t_max = 8.0) {
    SimParams p = base_params(t_max);
    p.gamma_l = {0.0};
    p.gamma_r = {1.0};
    if (photons == 2) {
        p.d_t = {3, 3};
        p.bond_max = 8;
    }
    Envelope env = gaussian_envelope(1.5, 0.5, p);
    auto field = fock_pulse(env, photons, Channel::right, p);
    return t_evol_mar(hamiltonian_1tls(p), tls_ground(), field, p);
}

BinsRecord cw_run(double omega, double t_max, long bond = 18, double dt = 0.05) {
    SimParams p = base_params(t_max);
    p.bond_max = bond;
    p.delta_t = dt;
    return t_evol_mar(hamiltonian_1tls(p, PumpSpec::cw(omega)), tls_ground(),
                      vacuum(p.steps(), p), p);
}

} // namespace

TEST_SUITE("correlations") {

TEST_CASE("vacuum run: every correlation vanishes") {
    SimParams p = base_params(2.0);
    BinsRecord rec = t_evol_mar(hamiltonian_1tls(p), tls_ground(), vacuum(p.steps(), p), p);
    CorrelationGrid g1 = g1_grid(rec, Channel::right, Channel::right);
    CorrelationGrid g2 = g2_grid(rec, Channel::right, Channel::right);
    for (long j = 0; j < g1.values.rows(); ++j)
        for (long k = 0; k < g1.valid_cols[static_cast<size_t>(j)]; ++k) {
            CHECK(std::abs(g1.values(j, k)) < 1e-14);
            CHECK(std::abs(g2.values(j, k)) < 1e-14);
        }
}

TEST_CASE("G1 diagonal equals the flux series") {
    SimParams p = base_params(4.0);
    BinsRecord rec = t_evol_mar(hamiltonian_1tls(p), tls_excited(), vacuum(p.steps(), p), p);
    CorrelationGrid g1 = g1_grid(rec, Channel::right, Channel::right);
    TimeSeries f = flux(rec, Channel::right);
    // flux at t_{m+1} belongs to the bin detected during step m
    for (long m = 0; m < g1.values.rows(); ++m)
        CHECK(std::abs(g1.values(m, 0).real() - f.values[static_cast<size_t>(m + 1)]) < 1e-8);
}

TEST_CASE("1-photon pulse: single photons never coincide") {
    BinsRecord rec = fock_run(1);
    CorrelationGrid g2 = g2_grid(rec, Channel::right, Channel::right);
    double max_abs = 0.0;
    for (long j = 0; j < g2.values.rows(); ++j)
        for (long k = 0; k < g2.valid_cols[static_cast<size_t>(j)]; ++k)
            max_abs = std::max(max_abs, std::abs(g2.values(j, k)));
    CHECK(max_abs <= 1e-10);
}

TEST_CASE("fock G1 grid matches the dense statevector contraction") {
    // small chiral run kept dense-comparable: 5 bins of extent 4, plus the emitter
    SimParams p;
    p.delta_t = 0.2;
    p.t_max = 1.0;
    p.d_sys = {2};
    p.d_t = {2, 2};
    p.gamma_l = {0.0};
    p.gamma_r = {1.0};
    p.bond_max = 64;
    p.cutoff = 0.0;
    Envelope env = gaussian_envelope(0.5, 0.2, p);
    auto field = fock_pulse(env, 1, Channel::right, p);
    GateSequence gates = hamiltonian_1tls(p);
    BinsRecord rec = t_evol_mar(gates, tls_ground(), field, p);

    // dense evolution over (system, bins...) in fixed order
    const long n = p.steps();
    std::vector<long> dims = {2};
    for (long k = 0; k < n; ++k) dims.push_back(4);
    Eigen::VectorXcd v = testref::chain_to_dense(field);
    // prepend the ground emitter: amplitudes live in the emitter-0 block
    Eigen::VectorXcd full = Eigen::VectorXcd::Zero(2 * v.size());
    full.head(v.size()) = v;
    const Eigen::MatrixXcd u = testref::to_eigen(gates.propagator(0).gate);
    for (long k = 0; k < n; ++k) testref::dense_apply_gate(full, dims, {0, k + 1}, u);

    CorrelationGrid g1 = g1_grid(rec, Channel::right, Channel::right);
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(4, 4);
    a(0, 2) = a(1, 3) = 1.0;  // right-channel annihilation on (n_r, n_l) row-major
    const Eigen::MatrixXcd adag = a.adjoint();
    for (long j = 0; j < n; ++j)
        for (long l = j; l < n; ++l) {
            const Complex dense =
                j == l ? testref::dense_expect(full, dims, j + 1, adag * a)
                       : testref::dense_expect2(full, dims, j + 1, adag, l + 1, a);
            const Complex mps = g1.values(j, l - j) * p.delta_t;  // undo the rate scaling
            CHECK(std::abs(mps - dense) < 1e-8);
        }
}

TEST_CASE("2-photon g2 grid matches the dense statevector contraction") {
    SimParams p;
    p.delta_t = 0.25;
    p.t_max = 1.25;
    p.d_sys = {2};
    p.d_t = {3, 2};
    p.gamma_l = {0.0};
    p.gamma_r = {1.0};
    p.bond_max = 64;
    p.cutoff = 0.0;
    Envelope env = gaussian_envelope(0.6, 0.25, p);
    auto field = fock_pulse(env, 2, Channel::right, p);
    GateSequence gates = hamiltonian_1tls(p);
    BinsRecord rec = t_evol_mar(gates, tls_ground(), field, p);

    const long n = p.steps();
    std::vector<long> dims = {2};
    for (long k = 0; k < n; ++k) dims.push_back(6);
    Eigen::VectorXcd v = testref::chain_to_dense(field);
    Eigen::VectorXcd full = Eigen::VectorXcd::Zero(2 * v.size());
    full.head(v.size()) = v;
    const Eigen::MatrixXcd u = testref::to_eigen(gates.propagator(0).gate);
    for (long k = 0; k < n; ++k) testref::dense_apply_gate(full, dims, {0, k + 1}, u);

    // right-channel number on the (n_r in 0..2, n_l in 0..1) bin space
    Eigen::MatrixXcd nr = Eigen::MatrixXcd::Zero(6, 6);
    for (long r = 0; r < 3; ++r)
        for (long l = 0; l < 2; ++l) nr(r * 2 + l, r * 2 + l) = static_cast<double>(r);

    CorrelationGrid g2 = g2_grid(rec, Channel::right, Channel::right);
    const double dt2 = p.delta_t * p.delta_t;
    for (long j = 0; j < n; ++j)
        for (long l = j + 1; l < n; ++l) {
            const Complex dense = testref::dense_expect2(full, dims, j + 1, nr, l + 1, nr);
            CHECK(std::abs(g2.values(j, l - j) * dt2 - dense) < 1e-8);
        }
    // nonzero structure away from the diagonal
    double max_off = 0.0;
    for (long j = 0; j < n; ++j)
        for (long k = 1; k < g2.valid_cols[static_cast<size_t>(j)]; ++k)
            max_off = std::max(max_off, std::abs(g2.values(j, k)));
    CHECK(max_off > 1e-6);
}

TEST_CASE("generic operator entry points agree with the channel wrappers") {
    BinsRecord rec = fock_run(1, 4.0);
    const Tensor a = bin_annihilate_op(Channel::right, rec.params);
    const Tensor adag = Tensor::from_matrix(testref::to_eigen(a).adjoint());
    CorrelationGrid generic = correlation_2op_2t(rec, adag, a);
    CorrelationGrid channel = g1_grid(rec, Channel::right, Channel::right);
    double dev = 0.0;
    for (long j = 0; j < generic.values.rows(); ++j)
        for (long k = 0; k < generic.valid_cols[static_cast<size_t>(j)]; ++k)
            dev = std::max(dev, std::abs(generic.values(j, k) - channel.values(j, k)));
    CHECK(dev < 1e-14);

    CorrelationGrid generic4 = correlation_4op_2t(rec, adag, adag, a, a);
    CorrelationGrid channel4 = g2_grid(rec, Channel::right, Channel::right);
    dev = 0.0;
    for (long j = 0; j < generic4.values.rows(); ++j)
        for (long k = 0; k < generic4.valid_cols[static_cast<size_t>(j)]; ++k)
            dev = std::max(dev, std::abs(generic4.values(j, k) - channel4.values(j, k)));
    CHECK(dev < 1e-14);
}

TEST_CASE("feedback records expose output correlations on the detection grid") {
    SimParams p;
    p.delta_t = 0.05;
    p.t_max = 6.0;
    p.d_sys = {2};
    p.d_t = {2};
    p.gamma_l = {0.5};
    p.gamma_r = {0.5};
    p.tau = 0.5;
    p.phi = std::numbers::pi;
    p.bond_max = 4;
    BinsRecord rec = t_evol_nmar(hamiltonian_1tls_feedback(p), tls_excited(),
                                 vacuum(p.steps(), p), p);
    CorrelationGrid g1 = g1_grid(rec, Channel::right, Channel::right);
    TimeSeries f = flux(rec, Channel::right);
    for (long m = 0; m < g1.values.rows(); ++m) {
        CHECK(std::abs(g1.values(m, 0).imag()) < 1e-10);
        CHECK(std::abs(g1.values(m, 0).real() - f.values[static_cast<size_t>(m + 1)]) < 1e-8);
    }
}

TEST_CASE("g2 grids are real and nonnegative") {
    BinsRecord rec = fock_run(2, 6.0);
    CorrelationGrid g2 = g2_grid(rec, Channel::right, Channel::right);
    for (long j = 0; j < g2.values.rows(); ++j)
        for (long k = 0; k < g2.valid_cols[static_cast<size_t>(j)]; ++k) {
            CHECK(std::abs(g2.values(j, k).imag()) < 1e-8);
            CHECK(g2.values(j, k).real() > -1e-8);
        }
}

TEST_CASE("cross-channel g2 is symmetric for symmetric coupling") {
    SimParams p = base_params(5.0);
    BinsRecord rec = t_evol_mar(hamiltonian_1tls(p), tls_excited(), vacuum(p.steps(), p), p);
    CorrelationGrid rl = g2_grid(rec, Channel::right, Channel::left);
    CorrelationGrid lr = g2_grid(rec, Channel::left, Channel::right);
    double dev = 0.0;
    for (long j = 0; j < rl.values.rows(); ++j)
        for (long k = 0; k < rl.valid_cols[static_cast<size_t>(j)]; ++k)
            dev = std::max(dev, std::abs(rl.values(j, k) - lr.values(j, k)));
    CHECK(dev < 1e-8);
}

TEST_CASE("steady state detection: decayed emitter settles at zero") {
    SimParams p = base_params(8.0);
    BinsRecord rec = t_evol_mar(hamiltonian_1tls(p), tls_excited(), vacuum(p.steps(), p), p);
    const double t_ss = detect_steady_state(rec);
    CHECK(t_ss < 8.0);
    SteadyStateCorrelation g1 = g1_ss(rec, Channel::right);
    CHECK(std::abs(g1.values.front()) < 1e-3);
    // a span that does not fit must throw
    SteadyStateOptions opts;
    opts.span = 100.0;
    CHECK_THROWS_AS(detect_steady_state(rec, opts), NumericError);
}

TEST_CASE("driven emitter: steady-state correlations against the regression oracle") {
    const double omega = 2.0 * std::numbers::pi;
    BinsRecord rec = cw_run(omega, 30.0, 18, 0.025);

    TimeSeries pop = system_population(rec);
    const auto lind = oracles::lindblad_driven_tls(
        [omega](double) { return omega; }, 0.0, 1.0, rec.times, 0.0125, false);
    double dev = 0.0;
    for (size_t k = 0; k < pop.values.size(); ++k)
        dev = std::max(dev, std::abs(pop.values[k] - lind.populations[0][k]));
    CHECK(dev < 0.02);

    SteadyStateOptions opts;
    opts.span = 10.0;
    SteadyStateCorrelation g1 = g1_ss(rec, Channel::right, opts);
    SteadyStateCorrelation g2 = g2_ss(rec, Channel::right, opts);
    const double flux_ss = g1.values.front().real();
    CHECK(flux_ss > 0.0);
    const auto n1 = normalize_g(g1.values, flux_ss, 1);
    const auto n2 = normalize_g(g2.values, flux_ss, 2);
    CHECK(std::abs(n1.front() - Complex(1.0)) < 1e-12);

    const auto reg = oracles::lindblad_two_time(omega, 0.0, 1.0, g1.t_ss, g1.t_primes, 0.005);
    for (size_t k = 0; k < g1.t_primes.size(); ++k) {
        const Complex g1_or = reg.g1[k] / reg.n_ss;
        const double g2_or = reg.g2[k] / (reg.n_ss * reg.n_ss);
        CHECK(std::abs(n1[k] - g1_or) < 0.02);
        CHECK(std::abs(n2[k].real() - g2_or) < 0.05);
    }
    // uncorrelated at long delays
    CHECK(std::abs(n2.back().real() - 1.0) < 0.05);
}

TEST_CASE("normalize_g: orders and guards") {
    std::vector<Complex> g = {Complex(4.0), Complex(2.0)};
    auto n1 = normalize_g(g, 2.0, 1);
    CHECK(n1[0] == Complex(2.0));
    auto n2 = normalize_g(g, 2.0, 2);
    CHECK(n2[0] == Complex(1.0));
    CHECK_THROWS_AS(normalize_g(g, 0.0, 1), ContractViolation);
    CHECK_THROWS_AS(normalize_g(g, 1.0, 3), ContractViolation);
}

TEST_CASE("spectrum_w: impulse is flat, exponential is Lorentzian") {
    std::vector<Complex> impulse(64, Complex(0.0));
    impulse[0] = 1.0;
    Spectrum flat = spectrum_w(0.05, impulse, 2);
    const double first = flat.values.front();
    for (double v : flat.values) CHECK(v == doctest::Approx(first).epsilon(1e-10));

    // g1(t') = exp(-t'/2): S(w) = 0.5 / (0.25 + w^2) + O(truncation)
    const double dt = 0.02;
    std::vector<Complex> decay;
    for (long k = 0; k < 2000; ++k)
        decay.push_back(std::exp(-0.5 * static_cast<double>(k) * dt));
    Spectrum lor = spectrum_w(dt, decay, 2);
    long peak = 0;
    for (size_t j = 0; j < lor.values.size(); ++j)
        if (lor.values[j] > lor.values[static_cast<size_t>(peak)]) peak = static_cast<long>(j);
    CHECK(std::abs(lor.omega_values[static_cast<size_t>(peak)]) < 0.01);
    const double peak_val = lor.values[static_cast<size_t>(peak)];
    CHECK(peak_val == doctest::Approx(2.0).epsilon(0.01));  // 1/(0.25) * 0.5
    // half width at half maximum is 1/2
    double hwhm = 0.0;
    for (size_t j = static_cast<size_t>(peak); j < lor.values.size(); ++j)
        if (lor.values[j] < 0.5 * peak_val) {
            hwhm = lor.omega_values[j];
            break;
        }
    CHECK(hwhm == doctest::Approx(0.5).epsilon(0.05));

    CHECK_THROWS_AS(spectrum_w(0.05, std::span<const Complex>{}), DimensionError);
}

TEST_CASE("Mollow triplet: three peaks with sidebands at the oracle positions") {
    const double omega = 2.0 * std::numbers::pi;
    BinsRecord rec = cw_run(omega, 30.0);
    SteadyStateOptions opts;
    opts.span = 12.0;
    SteadyStateCorrelation g1 = g1_ss(rec, Channel::right, opts);
    Spectrum s = spectrum_w(rec.params.delta_t, g1.values, 4, Spectrum::Norm::max1);
    const auto peaks = spectrum_peaks(s, 0.05);
    REQUIRE(peaks.size() == 3);

    const auto reg = oracles::lindblad_two_time(omega, 0.0, 1.0, g1.t_ss, g1.t_primes, 0.005);
    Spectrum s_or = spectrum_w(rec.params.delta_t, reg.g1, 4, Spectrum::Norm::max1);
    const auto peaks_or = spectrum_peaks(s_or, 0.05);
    REQUIRE(peaks_or.size() == 3);
    const double dw = s.omega_values[1] - s.omega_values[0];
    for (size_t i = 0; i < 3; ++i)
        CHECK(std::abs(s.omega_values[static_cast<size_t>(peaks[i])] -
                       s_or.omega_values[static_cast<size_t>(peaks_or[i])]) <= dw + 1e-12);
    // sidebands split by twice the drive amplitude
    CHECK(std::abs(s.omega_values[static_cast<size_t>(peaks[2])] - 2.0 * omega) < 0.5);
}

TEST_CASE("time-dependent spectra: vacuum zero, Parseval, long-time shape") {
    SimParams pv = base_params(1.0);
    BinsRecord vac = t_evol_mar(hamiltonian_1tls(pv), tls_ground(), vacuum(pv.steps(), pv), pv);
    TimeDependentSpectra zero = time_dependent_spectrum(g1_grid(vac, Channel::right,
                                                                Channel::right));
    CHECK(zero.I.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(zero.S.cwiseAbs().maxCoeff() < 1e-12);

    // decaying emitter: integrating I(w,t) over w recovers 2 pi flux(t)
    SimParams p = base_params(6.0);
    BinsRecord rec = t_evol_mar(hamiltonian_1tls(p), tls_excited(), vacuum(p.steps(), p), p);
    CorrelationGrid g1 = g1_grid(rec, Channel::right, Channel::right);
    TimeDependentSpectra td = time_dependent_spectrum(g1);
    TimeSeries f = flux(rec, Channel::right);
    const double dw = td.omega_values[1] - td.omega_values[0];
    for (long row = 10; row < 40; row += 10) {
        const double integral = td.I.row(row).sum() * dw;
        const double expected = 2.0 * std::numbers::pi * f.values[static_cast<size_t>(row + 1)];
        CHECK(integral == doctest::Approx(expected).epsilon(0.05));
    }

    // CW run: the late-time shape of S(w,t) approaches the long-time spectrum
    const double omega = 2.0 * std::numbers::pi;
    BinsRecord cw = cw_run(omega, 20.0, 18);
    CorrelationGrid g1cw = g1_grid(cw, Channel::right, Channel::right);
    TimeDependentSpectra tdcw = time_dependent_spectrum(g1cw);
    SteadyStateOptions opts;
    opts.span = 5.0;
    SteadyStateCorrelation ss = g1_ss(cw, Channel::right, opts);
    Spectrum s_long = spectrum_w(cw.params.delta_t, ss.values, 4);
    // cosine similarity between the final S(w, t_max) row and the long-time
    // spectrum, the latter linearly interpolated onto the S(w, t) grid
    const long rows = tdcw.S.rows();
    auto interp_long = [&s_long](double w) {
        const auto& xs = s_long.omega_values;
        if (w <= xs.front()) return s_long.values.front();
        if (w >= xs.back()) return s_long.values.back();
        const double step = xs[1] - xs[0];
        const size_t i = static_cast<size_t>((w - xs.front()) / step);
        const double frac = (w - xs[i]) / step;
        return (1.0 - frac) * s_long.values[i] + frac * s_long.values[i + 1];
    };
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t j = 0; j < tdcw.omega_values.size(); ++j) {
        const double a = tdcw.S(rows - 1, static_cast<long>(j));
        const double b = interp_long(tdcw.omega_values[j]);
        dot += a * b;
        na += a * a;
        nb += b * b;
    }
    CHECK(dot / std::sqrt(na * nb) > 0.99);

    CorrelationGrid tiny = g1;
    tiny.t_values.resize(3);
    tiny.tprime_values.resize(3);
    CHECK_THROWS_AS(time_dependent_spectrum(tiny), DimensionError);
}

} // TEST_SUITE
