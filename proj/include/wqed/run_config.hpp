#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wqed/evolution.hpp"
#include "wqed/states.hpp"

namespace wqed {

enum class Scenario { decay, feedback, two_tls_mar, two_tls_nmar, drive_cw, drive_pulse, fock };

std::string scenario_name(Scenario s);

struct PumpConfig {
    std::string kind = "none";  // none | cw | envelope
    double omega = 0.0;
    std::string shape = "gaussian";
    double strength = 0.0;
    double center = 0.0;
    double width = 0.0;
    std::string file;  // per-step Omega samples, one per line
};

struct InitialConfig {
    std::string system;         // ground | excited | excited_ground | ground_excited |
                                // both_excited | entangled
    double c1 = 0.0, c2 = 0.0;  // entangled coefficients
    std::string field = "vacuum";  // vacuum | fock
    int photons = 1;
    std::string direction = "R";
    double center = 1.5;
    double width = 0.5;
    std::string envelope_file;
};

/// Parsed and validated run description. All quantities are in units of
/// the decay rate; the engine is deterministic so there is no seed.
struct RunConfig {
    Scenario scenario = Scenario::decay;
    SimParams params;
    PumpConfig pump;
    InitialConfig initial;
    std::set<std::string> outputs;
    std::map<std::string, std::string> raw;  // config echo for the manifest
};

/// Reads the sectioned key-value format described in the README. Unknown
/// keys are rejected with a suggestion; missing scenario-required keys are
/// errors; defaults are filled per scenario.
RunConfig parse_config(const std::string& path);

void apply_overrides(RunConfig& config, std::optional<long> bond_max,
                     std::optional<double> delta_t, std::optional<double> t_max);

/// Materialized scenario: gates, initial states, and the engine flavor.
struct ScenarioBuild {
    GateSequence gates;
    SystemState sys0;
    std::vector<SiteTensor> field0;
    bool markovian = true;
};
ScenarioBuild build_scenario(const RunConfig& config);

/// Runs the scenario end to end and returns the history.
BinsRecord run_record(const RunConfig& config);

struct RunManifest {
    std::map<std::string, double> phase_seconds;
    double discarded_weight = 0.0;
    long peak_bond = 0;
    int truncation_alarms = 0;
    std::vector<std::string> files;
    std::vector<std::string> warnings;
};

/// Executes the scenario and writes one CSV per requested output plus
/// manifest.json into `out_dir`.
RunManifest run(const RunConfig& config, const std::string& out_dir);

struct ValidationReport {
    std::string oracle;
    double max_deviation = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

/// Runs the scenario and its reference oracle, writes both series and a
/// validation.json into `out_dir`, and reports the maximum deviation.
ValidationReport validate(const RunConfig& config, const std::string& out_dir);

} // namespace wqed
