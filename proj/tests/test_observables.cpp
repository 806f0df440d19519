#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "dense_reference.hpp"
#include "wqed/csv.hpp"
#include "wqed/evolution.hpp"
#include "wqed/observables.hpp"

using namespace wqed;

namespace {

SimParams decay_params() {
    SimParams p;
    p.delta_t = 0.05;
    p.t_max = 8.0;
    p.d_sys = {2};
    p.d_t = {2, 2};
    p.gamma_l = {0.5};
    p.gamma_r = {0.5};
    p.bond_max = 4;
    return p;
}

SchmidtSpectrum spectrum_of(std::vector<double> values) {
    SchmidtSpectrum sp;
    sp.values = std::move(values);
    return sp;
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

} // namespace

TEST_SUITE("observables") {

TEST_CASE("entropy: pure, balanced and guarded spectra") {
    CHECK(entropy_of_spectrum(spectrum_of({1.0})) == doctest::Approx(0.0));
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(entropy_of_spectrum(spectrum_of({r, r})) == doctest::Approx(1.0));
    CHECK(entropy_of_spectrum(spectrum_of({1.0, 1e-9})) ==
          doctest::Approx(0.0).epsilon(1e-6));
    CHECK_THROWS_AS(entropy_of_spectrum(spectrum_of({0.5, 0.5})), NumericError);
}

TEST_CASE("integrated flux: running sum against fluxes") {
    TimeSeries f;
    f.times = {0.0, 0.1, 0.2, 0.3};
    f.values = {0.0, 1.0, 2.0, 1.0};
    f.label = "flux";
    TimeSeries n = integrated_flux(f);
    CHECK(n.values[0] == doctest::Approx(0.0));
    CHECK(n.values[1] == doctest::Approx(0.1));
    CHECK(n.values[2] == doctest::Approx(0.3));
    CHECK(n.values[3] == doctest::Approx(0.4));
    for (size_t k = 1; k < n.values.size(); ++k) CHECK(n.values[k] >= n.values[k - 1]);
}

TEST_CASE("symmetric decay splits the photon between the channels") {
    SimParams p = decay_params();
    BinsRecord rec = t_evol_mar(hamiltonian_1tls(p), tls_excited(), vacuum(p.steps(), p), p);
    TimeSeries nr = integrated_flux(flux(rec, Channel::right));
    TimeSeries nl = integrated_flux(flux(rec, Channel::left));
    CHECK(nr.values.back() == doctest::Approx(0.5).epsilon(0.02));
    CHECK(nl.values.back() == doctest::Approx(0.5).epsilon(0.02));
    for (double v : flux(rec, Channel::right).values) CHECK(v >= -1e-10);
}

TEST_CASE("a free-running photon pulse integrates to its photon number") {
    // no coupling: the pulse passes through and every bin is finalized as is
    SimParams p = decay_params();
    p.gamma_l = {0.0};
    p.gamma_r = {0.0};
    p.t_max = 2.0;
    Envelope env = gaussian_envelope(1.0, 0.3, p);
    auto field = fock_pulse(env, 1, Channel::right, p);
    BinsRecord rec = t_evol_mar(hamiltonian_1tls(p), tls_ground(), field, p);
    TimeSeries nr = integrated_flux(flux(rec, Channel::right));
    CHECK(nr.values.back() == doctest::Approx(1.0).epsilon(1e-6));
    TimeSeries nl = integrated_flux(flux(rec, Channel::left));
    CHECK(std::abs(nl.values.back()) < 1e-12);

    SimParams p2 = p;
    p2.d_t = {3, 3};
    Envelope env2 = gaussian_envelope(1.0, 0.3, p2);
    auto field2 = fock_pulse(env2, 2, Channel::right, p2);
    BinsRecord rec2 = t_evol_mar(hamiltonian_1tls(p2), tls_ground(), field2, p2);
    TimeSeries nr2 = integrated_flux(flux(rec2, Channel::right));
    CHECK(nr2.values.back() == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("Markovian runs: system and circuit entropies coincide") {
    SimParams p = decay_params();
    BinsRecord rec = t_evol_mar(hamiltonian_1tls(p), tls_excited(), vacuum(p.steps(), p), p);
    TimeSeries s_sys = entanglement(rec.schmidt, rec.times, "S_system");
    TimeSeries s_circ = entanglement(rec.schmidt_tau, rec.times, "S_circuit");
    for (size_t k = 0; k < s_sys.values.size(); ++k)
        CHECK(std::abs(s_sys.values[k] - s_circ.values[k]) < 1e-8);
    // a decaying emitter entangles with its emission field, then purifies
    double max_s = 0.0;
    for (double v : s_sys.values) max_s = std::max(max_s, v);
    CHECK(max_s > 0.5);
    CHECK(s_sys.values.back() < 0.1);
}

TEST_CASE("loop statistics require a feedback record") {
    SimParams p = decay_params();
    BinsRecord rec = t_evol_mar(hamiltonian_1tls(p), tls_excited(), vacuum(p.steps(), p), p);
    CHECK_THROWS_AS(loop_integrated_statistics(rec), ContractViolation);
}

TEST_CASE("single_time_expectation: operator list and validation") {
    SimParams p = decay_params();
    p.t_max = 1.0;
    BinsRecord rec = t_evol_mar(hamiltonian_1tls(p), tls_excited(), vacuum(p.steps(), p), p);
    std::vector<Tensor> ops = {tls_pop(), tensor_identity(2)};
    std::vector<std::string> labels = {"n", "one"};
    auto series = single_time_expectation(rec.system_states, ops, labels, rec.times);
    REQUIRE(series.size() == 2);
    CHECK(series[0].values[0] == doctest::Approx(1.0));
    for (double v : series[1].values) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));

    std::vector<std::string> wrong = {"n"};
    CHECK_THROWS_AS(single_time_expectation(rec.system_states, ops, wrong, rec.times),
                    DimensionError);
}

TEST_CASE("csv emitter: format, shared grids and rewrite stability") {
    TimeSeries a;
    a.times = {0.0, 0.05};
    a.values = {1.0, 1.0 / 3.0};
    a.label = "n_tls";
    const std::string path = "series_test.csv";
    write_series_csv(path, {a});
    const std::string text = slurp(path);
    CHECK(text.find("t,n_tls\n") == 0);
    CHECK(text.find("0.33333333333333331") != std::string::npos);  // 17 digits
    CHECK(text.find('\r') == std::string::npos);                   // LF only

    write_series_csv(path, {a});
    CHECK(slurp(path) == text);

    TimeSeries b = a;
    b.times = {0.0, 0.1};
    CHECK_THROWS_AS(write_series_csv(path, {a, b}), DimensionError);
    std::remove(path.c_str());
}

} // TEST_SUITE
