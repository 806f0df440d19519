#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "wqed/run_config.hpp"

using namespace wqed;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
    std::ofstream os(name);
    os << body;
    return name;
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

} // namespace

TEST_SUITE("config") {

TEST_CASE("minimal decay config fills the documented defaults") {
    const auto path = write_temp("cfg_minimal.ini", "scenario = decay\n");
    RunConfig cfg = parse_config(path);
    CHECK(cfg.scenario == Scenario::decay);
    CHECK(cfg.params.delta_t == doctest::Approx(0.05));
    CHECK(cfg.params.t_max == doctest::Approx(8.0));
    CHECK(cfg.params.bond_max == 4);
    CHECK(cfg.params.gamma_l[0] == doctest::Approx(0.5));
    CHECK(cfg.params.gamma_r[0] == doctest::Approx(0.5));
    CHECK(cfg.initial.system == "excited");
    CHECK(cfg.outputs.count("populations") == 1);
    std::remove(path.c_str());
}

TEST_CASE("feedback config without the phase names the missing key") {
    const auto path = write_temp("cfg_nophi.ini",
                                 "scenario = feedback\n[params]\ntau = 1.0\n");
    try {
        parse_config(path);
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("phi") != std::string::npos);
    }
    std::remove(path.c_str());
}

TEST_CASE("unknown keys are rejected with a suggestion") {
    const auto path = write_temp("cfg_typo.ini",
                                 "scenario = decay\n[params]\nbond_mx = 8\n");
    try {
        parse_config(path);
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("bond_mx") != std::string::npos);
        CHECK(msg.find("bond_max") != std::string::npos);
    }
    std::remove(path.c_str());
}

TEST_CASE("inconsistent delay spacing is rejected") {
    const auto path = write_temp(
        "cfg_badtau.ini",
        "scenario = feedback\n[params]\ntau = 0.517\nphi = 0\n");
    CHECK_THROWS(parse_config(path));
    std::remove(path.c_str());
}

TEST_CASE("scenario guards: pumps and photon counts") {
    const auto p1 = write_temp("cfg_pump_on_decay.ini",
                               "scenario = decay\n[pump]\nkind = cw\nomega = 1\n");
    CHECK_THROWS_AS(parse_config(p1), ConfigError);
    std::remove(p1.c_str());

    const auto p2 = write_temp(
        "cfg_fock3.ini",
        "scenario = fock\n[initial]\nfield = fock\nphotons = 3\n");
    CHECK_THROWS_AS(parse_config(p2), ConfigError);
    std::remove(p2.c_str());
}

TEST_CASE("fock defaults: photon count drives bin extent and bond cap") {
    const auto path = write_temp(
        "cfg_fock2.ini", "scenario = fock\n[initial]\nfield = fock\nphotons = 2\n");
    RunConfig cfg = parse_config(path);
    CHECK(cfg.params.d_t == std::vector<long>{3, 3});
    CHECK(cfg.params.bond_max == 8);
    std::remove(path.c_str());
}

TEST_CASE("run: a small decay writes the requested files and is reproducible") {
    const auto path = write_temp("cfg_run.ini",
                                 "scenario = decay\n[params]\nt_max = 2\n"
                                 "[outputs]\npopulations = true\nfluxes = true\n"
                                 "conservation = true\n");
    RunConfig cfg = parse_config(path);
    const std::string out = "cfg_run_out";
    RunManifest man = run(cfg, out);
    CHECK(man.files.size() == 3);
    CHECK(man.peak_bond <= cfg.params.bond_max);
    CHECK(man.discarded_weight < 1e-12);
    for (const auto& f : man.files)
        CHECK(std::filesystem::exists(std::filesystem::path(out) / f));
    CHECK(std::filesystem::exists(std::filesystem::path(out) / "manifest.json"));

    const std::string pops = slurp(out + "/populations.csv");
    CHECK(pops.rfind("t,n_tls\n", 0) == 0);

    // byte-identical rerun
    run(cfg, out);
    CHECK(slurp(out + "/populations.csv") == pops);

    std::filesystem::remove_all(out);
    std::remove(path.c_str());
}

TEST_CASE("run: overrides change the grid") {
    const auto path = write_temp("cfg_ovr.ini", "scenario = decay\n");
    RunConfig cfg = parse_config(path);
    apply_overrides(cfg, 8, 0.1, 2.0);
    CHECK(cfg.params.bond_max == 8);
    CHECK(cfg.params.delta_t == doctest::Approx(0.1));
    CHECK(cfg.params.steps() == 20);
    std::remove(path.c_str());
}

TEST_CASE("validate: decay passes its oracle, fock has none") {
    const auto path = write_temp("cfg_val.ini", "scenario = decay\n[params]\nt_max = 4\n");
    RunConfig cfg = parse_config(path);
    const std::string out = "cfg_val_out";
    ValidationReport rep = validate(cfg, out);
    CHECK(rep.pass);
    CHECK(rep.oracle == "analytic_decay");
    CHECK(rep.max_deviation < 0.01);
    CHECK(std::filesystem::exists(std::filesystem::path(out) / "validation.json"));
    std::filesystem::remove_all(out);
    std::remove(path.c_str());

    const auto pf = write_temp(
        "cfg_val_fock.ini", "scenario = fock\n[initial]\nfield = fock\nphotons = 1\n");
    RunConfig fock_cfg = parse_config(pf);
    CHECK_THROWS_AS(validate(fock_cfg, "cfg_val_out2"), ConfigError);
    std::filesystem::remove_all("cfg_val_out2");
    std::remove(pf.c_str());
}

TEST_CASE("every shipped sample config parses and builds") {
    namespace fs = std::filesystem;
    const fs::path configs = fs::path(WQED_SOURCE_DIR) / "configs";
    REQUIRE(fs::exists(configs));
    int count = 0;
    for (const auto& entry : fs::directory_iterator(configs)) {
        if (entry.path().extension() != ".ini") continue;
        RunConfig cfg = parse_config(entry.path().string());
        ScenarioBuild b = build_scenario(cfg);
        CHECK(b.field0.size() == static_cast<size_t>(cfg.params.steps()));
        ++count;
    }
    CHECK(count >= 9);
}

} // TEST_SUITE
