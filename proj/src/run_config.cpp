#include "wqed/run_config.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "wqed/correlations.hpp"
#include "wqed/csv.hpp"
#include "wqed/observables.hpp"
#include "wqed/oracles.hpp"

namespace wqed {

namespace {

using nlohmann::json;

const std::map<std::string, std::vector<std::string>> kSectionKeys = {
    {"", {"scenario"}},
    {"params", {"delta_t", "t_max", "gamma", "coupling", "gamma_l", "gamma_r", "tau",
                "phi", "bond_max", "cutoff", "detuning", "d_t"}},
    {"pump", {"kind", "omega", "shape", "strength", "center", "width", "file"}},
    {"initial", {"system", "c1", "c2", "field", "photons", "direction", "center",
                 "width", "envelope_file"}},
    {"outputs", {"populations", "fluxes", "conservation", "entropy", "g1_ss", "g2_ss",
                 "spectrum", "g1_grid", "g2_grid", "loop"}},
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (size_t j = 1; j <= b.size(); ++j) {
            const size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::string suggest(const std::string& key, const std::vector<std::string>& known) {
    std::string best;
    size_t best_d = key.size() + 2;
    for (const auto& k : known) {
        const size_t d = edit_distance(key, k);
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    if (!best.empty() && best_d <= std::max<size_t>(2, key.size() / 2))
        return "; did you mean '" + best + "'?";
    return "";
}

double to_double(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError("key '" + key + "': cannot parse '" + value + "' as a number");
    }
}

long to_long(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const long v = std::stol(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError("key '" + key + "': cannot parse '" + value + "' as an integer");
    }
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw ConfigError("key '" + key + "': cannot parse '" + value + "' as a boolean");
}

struct RawConfig {
    std::map<std::string, std::string> values;  // "section.key" -> value

    bool has(const std::string& k) const { return values.count(k) > 0; }
    std::string get(const std::string& k) const { return values.at(k); }
    double num(const std::string& k) const { return to_double(k, values.at(k)); }
    double num_or(const std::string& k, double fallback) const {
        return has(k) ? num(k) : fallback;
    }
    long integer_or(const std::string& k, long fallback) const {
        return has(k) ? to_long(k, values.at(k)) : fallback;
    }
    std::string str_or(const std::string& k, const std::string& fallback) const {
        return has(k) ? values.at(k) : fallback;
    }
    void require(const std::string& k, const std::string& why) const {
        if (!has(k))
            throw ConfigError("missing required key '" + k + "' (" + why + ")");
    }
};

RawConfig read_raw(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path);
    RawConfig raw;
    std::string line, section;
    long lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed section");
            section = trim(t.substr(1, t.size() - 2));
            if (!kSectionKeys.count(section))
                throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown section [" +
                                  section + "]");
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        const auto& known = kSectionKeys.at(section);
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key '" + key +
                              "' in section [" + section + "]" + suggest(key, known));
        const std::string full = section.empty() ? key : section + "." + key;
        if (raw.values.count(full))
            throw ConfigError(path + ":" + std::to_string(lineno) + ": duplicate key '" +
                              key + "'");
        raw.values[full] = value;
    }
    return raw;
}

Scenario parse_scenario(const std::string& name) {
    if (name == "decay") return Scenario::decay;
    if (name == "feedback") return Scenario::feedback;
    if (name == "two_tls_mar") return Scenario::two_tls_mar;
    if (name == "two_tls_nmar") return Scenario::two_tls_nmar;
    if (name == "drive_cw") return Scenario::drive_cw;
    if (name == "drive_pulse") return Scenario::drive_pulse;
    if (name == "fock") return Scenario::fock;
    throw ConfigError("unknown scenario '" + name + "'");
}

bool needs_two_emitters(Scenario s) {
    return s == Scenario::two_tls_mar || s == Scenario::two_tls_nmar;
}

bool is_drive(Scenario s) {
    return s == Scenario::drive_cw || s == Scenario::drive_pulse;
}

std::pair<double, double> coupling_from(const RawConfig& raw) {
    if (raw.has("params.gamma_l") || raw.has("params.gamma_r")) {
        if (raw.has("params.gamma") || raw.has("params.coupling"))
            throw ConfigError("give either gamma/coupling or explicit gamma_l/gamma_r");
        raw.require("params.gamma_l", "explicit rates need both sides");
        raw.require("params.gamma_r", "explicit rates need both sides");
        return {raw.num("params.gamma_l"), raw.num("params.gamma_r")};
    }
    const double gamma = raw.num_or("params.gamma", 1.0);
    const std::string coupling = raw.str_or("params.coupling", "symmetrical");
    if (coupling == "symmetrical") return symmetric_coupling(gamma);
    if (coupling == "chiral_r") return chiral_coupling(gamma, Channel::right);
    if (coupling == "chiral_l") return chiral_coupling(gamma, Channel::left);
    throw ConfigError("unknown coupling '" + coupling +
                      "' (expected symmetrical, chiral_r or chiral_l)");
}

} // namespace

std::string scenario_name(Scenario s) {
    switch (s) {
        case Scenario::decay: return "decay";
        case Scenario::feedback: return "feedback";
        case Scenario::two_tls_mar: return "two_tls_mar";
        case Scenario::two_tls_nmar: return "two_tls_nmar";
        case Scenario::drive_cw: return "drive_cw";
        case Scenario::drive_pulse: return "drive_pulse";
        case Scenario::fock: return "fock";
    }
    return "?";
}

RunConfig parse_config(const std::string& path) {
    const RawConfig raw = read_raw(path);
    raw.require("scenario", "top of the config, before any section");

    RunConfig cfg;
    cfg.scenario = parse_scenario(raw.get("scenario"));
    cfg.raw = raw.values;
    const Scenario sc = cfg.scenario;

    // initial state first: some parameter defaults depend on it
    cfg.initial.system = raw.str_or(
        "initial.system",
        needs_two_emitters(sc) ? "excited_ground"
                               : (is_drive(sc) || sc == Scenario::fock) ? "ground" : "excited");
    cfg.initial.c1 = raw.num_or("initial.c1", 1.0 / std::sqrt(2.0));
    cfg.initial.c2 = raw.num_or("initial.c2", 1.0 / std::sqrt(2.0));
    cfg.initial.field = raw.str_or("initial.field",
                                   sc == Scenario::fock ? "fock" : "vacuum");
    cfg.initial.photons = static_cast<int>(raw.integer_or("initial.photons", 1));
    cfg.initial.direction = raw.str_or("initial.direction", "R");
    cfg.initial.center = raw.num_or("initial.center", 1.5);
    cfg.initial.width = raw.num_or("initial.width", 0.5);
    cfg.initial.envelope_file = raw.str_or("initial.envelope_file", "");
    if (sc == Scenario::fock && cfg.initial.field != "fock")
        throw ConfigError("the fock scenario needs initial.field = fock");
    if (sc == Scenario::fock) raw.require("initial.photons", "photon number of the pulse");
    if (cfg.initial.photons != 1 && cfg.initial.photons != 2)
        throw ConfigError("initial.photons must be 1 or 2");

    const bool two_quanta = cfg.initial.system == "both_excited" || cfg.initial.photons == 2;

    SimParams& p = cfg.params;
    p.delta_t = raw.num_or("params.delta_t", 0.05);
    p.t_max = raw.num_or("params.t_max", sc == Scenario::drive_cw ? 40.0 : 8.0);
    p.cutoff = raw.num_or("params.cutoff", 1e-12);
    p.detuning = raw.num_or("params.detuning", 0.0);
    p.tau = raw.num_or("params.tau", 0.0);
    p.phi = raw.num_or("params.phi", 0.0);

    const bool feedback_geometry = sc == Scenario::feedback ||
                                   (is_drive(sc) && p.tau > 0.0);
    if (sc == Scenario::feedback || sc == Scenario::two_tls_nmar) {
        raw.require("params.tau", "feedback scenarios need the delay");
        raw.require("params.phi", "feedback scenarios need the phase");
    }
    if (feedback_geometry && is_drive(sc))
        raw.require("params.phi", "driven feedback runs need the phase");
    if (sc == Scenario::fock && p.tau > 0.0)
        throw ConfigError("the fock scenario supports only an infinite waveguide (tau = 0)");
    if (sc == Scenario::two_tls_mar && p.tau > 0.0)
        throw ConfigError("two_tls_mar is the tau = 0 limit; use two_tls_nmar for delays");

    const long n_emit = needs_two_emitters(sc) ? 2 : 1;
    p.d_sys.assign(static_cast<size_t>(n_emit), 2);
    const auto [gl, gr] = coupling_from(raw);
    p.gamma_l.assign(static_cast<size_t>(n_emit), gl);
    p.gamma_r.assign(static_cast<size_t>(n_emit), gr);

    const long d_default = two_quanta ? 3 : 2;
    const long d = raw.integer_or("params.d_t", sc == Scenario::fock && cfg.initial.photons == 2
                                                    ? 3
                                                    : d_default);
    const bool single_channel = sc == Scenario::feedback || feedback_geometry;
    p.d_t = single_channel ? std::vector<long>{d} : std::vector<long>{d, d};

    long bond_default = 4;
    if (sc == Scenario::drive_cw) bond_default = 18;
    if (sc == Scenario::drive_pulse) bond_default = 8;
    if (two_quanta) bond_default = 8;
    p.bond_max = raw.integer_or("params.bond_max", bond_default);

    // pump
    cfg.pump.kind = raw.str_or("pump.kind", sc == Scenario::drive_cw   ? "cw"
                                            : sc == Scenario::drive_pulse ? "envelope"
                                                                          : "none");
    cfg.pump.omega = raw.num_or("pump.omega", 0.0);
    cfg.pump.shape = raw.str_or("pump.shape", "gaussian");
    cfg.pump.strength = raw.num_or("pump.strength", 0.0);
    cfg.pump.center = raw.num_or("pump.center", 1.5);
    cfg.pump.width = raw.num_or("pump.width", 0.5);
    cfg.pump.file = raw.str_or("pump.file", "");
    if (!is_drive(sc) && cfg.pump.kind != "none")
        throw ConfigError("scenario " + scenario_name(sc) + " does not take a pump");
    if (sc == Scenario::drive_cw) {
        if (cfg.pump.kind != "cw") throw ConfigError("drive_cw needs pump.kind = cw");
        raw.require("pump.omega", "CW drive strength");
    }
    if (sc == Scenario::drive_pulse) {
        if (cfg.pump.kind != "envelope")
            throw ConfigError("drive_pulse needs pump.kind = envelope");
        if (cfg.pump.file.empty()) {
            raw.require("pump.strength", "pulse area");
            raw.require("pump.center", "pulse center");
            raw.require("pump.width", "pulse width");
        }
    }

    // outputs
    for (const auto& [full, value] : raw.values) {
        if (full.rfind("outputs.", 0) != 0) continue;
        const std::string name = full.substr(8);
        if (to_bool(full, value)) cfg.outputs.insert(name);
    }
    if (cfg.outputs.empty()) cfg.outputs = {"populations", "fluxes", "conservation"};

    p.validate();
    if (p.tau > 0.0 && p.delay_steps() < 1)
        throw ConfigError("tau must be at least one time step");
    if (cfg.initial.system == "entangled") {
        if (!needs_two_emitters(sc))
            throw ConfigError("entangled initial state needs a two-emitter scenario");
        const double nrm = cfg.initial.c1 * cfg.initial.c1 + cfg.initial.c2 * cfg.initial.c2;
        if (std::abs(nrm - 1.0) > 1e-10)
            throw ConfigError("entangled coefficients must satisfy c1^2 + c2^2 = 1");
    }
    return cfg;
}

void apply_overrides(RunConfig& config, std::optional<long> bond_max,
                     std::optional<double> delta_t, std::optional<double> t_max) {
    if (bond_max) config.params.bond_max = *bond_max;
    if (delta_t) config.params.delta_t = *delta_t;
    if (t_max) config.params.t_max = *t_max;
    config.params.validate();
}

namespace {

SystemState build_system(const RunConfig& cfg) {
    const std::string& s = cfg.initial.system;
    if (s == "ground") return tls_ground();
    if (s == "excited") return tls_excited();
    if (s == "excited_ground") return system_kron(tls_excited(), tls_ground());
    if (s == "ground_excited") return system_kron(tls_ground(), tls_excited());
    if (s == "both_excited") return system_kron(tls_excited(), tls_excited());
    if (s == "entangled") return entangled_pair(cfg.initial.c1, cfg.initial.c2);
    throw ConfigError("unknown initial.system '" + s + "'");
}

PumpSpec build_pump(const RunConfig& cfg) {
    if (cfg.pump.kind == "none") return PumpSpec::none();
    if (cfg.pump.kind == "cw") return PumpSpec::cw(cfg.pump.omega);
    if (cfg.pump.kind == "envelope") {
        if (!cfg.pump.file.empty()) {
            std::ifstream is(cfg.pump.file);
            if (!is) throw ConfigError("cannot open pump file " + cfg.pump.file);
            std::vector<double> samples;
            double v = 0.0;
            while (is >> v) samples.push_back(v);
            if (static_cast<long>(samples.size()) != cfg.params.steps())
                throw ConfigError("pump file must hold one sample per step (" +
                                  std::to_string(cfg.params.steps()) + ")");
            return PumpSpec::from_samples(std::move(samples));
        }
        if (cfg.pump.shape != "gaussian")
            throw ConfigError("unknown pump shape '" + cfg.pump.shape + "'");
        return PumpSpec::from_samples(gaussian_pulse_area(cfg.pump.strength, cfg.pump.center,
                                                          cfg.pump.width, cfg.params));
    }
    throw ConfigError("unknown pump kind '" + cfg.pump.kind + "'");
}

std::vector<SiteTensor> build_field(const RunConfig& cfg) {
    const long n = cfg.params.steps();
    if (cfg.initial.field == "vacuum") return vacuum(n, cfg.params);
    if (cfg.initial.field == "fock") {
        Envelope env;
        if (!cfg.initial.envelope_file.empty())
            env = read_envelope_csv(cfg.initial.envelope_file, n, cfg.params.delta_t);
        else
            env = gaussian_envelope(cfg.initial.center, cfg.initial.width, cfg.params);
        const Channel dir = cfg.initial.direction == "L" ? Channel::left : Channel::right;
        return fock_pulse(env, cfg.initial.photons, dir, cfg.params);
    }
    throw ConfigError("unknown initial.field '" + cfg.initial.field + "'");
}

} // namespace

ScenarioBuild build_scenario(const RunConfig& cfg) {
    ScenarioBuild b;
    b.sys0 = build_system(cfg);
    b.field0 = build_field(cfg);
    const PumpSpec pump = build_pump(cfg);
    switch (cfg.scenario) {
        case Scenario::decay:
        case Scenario::fock:
            b.gates = hamiltonian_1tls(cfg.params, pump);
            b.markovian = true;
            break;
        case Scenario::feedback:
            b.gates = hamiltonian_1tls_feedback(cfg.params, pump);
            b.markovian = false;
            break;
        case Scenario::two_tls_mar:
            b.gates = hamiltonian_2tls_mar(cfg.params, pump);
            b.markovian = true;
            break;
        case Scenario::two_tls_nmar:
            b.gates = hamiltonian_2tls_nmar(cfg.params, pump);
            b.markovian = false;
            break;
        case Scenario::drive_cw:
        case Scenario::drive_pulse:
            if (cfg.params.tau > 0.0) {
                b.gates = hamiltonian_1tls_feedback(cfg.params, pump);
                b.markovian = false;
            } else {
                b.gates = hamiltonian_1tls(cfg.params, pump);
                b.markovian = true;
            }
            break;
    }
    return b;
}

BinsRecord run_record(const RunConfig& cfg) {
    ScenarioBuild b = build_scenario(cfg);
    if (b.markovian) return t_evol_mar(b.gates, b.sys0, b.field0, cfg.params);
    return t_evol_nmar(b.gates, b.sys0, b.field0, cfg.params);
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<TimeSeries> population_series(const BinsRecord& rec) {
    std::vector<TimeSeries> out;
    for (size_t e = 0; e < rec.params.d_sys.size(); ++e)
        out.push_back(system_population(rec, static_cast<long>(e)));
    return out;
}

std::vector<TimeSeries> flux_series(const BinsRecord& rec) {
    std::vector<TimeSeries> out;
    if (rec.params.d_t.size() == 1) {
        TimeSeries f = flux(rec, Channel::right);
        TimeSeries nf = integrated_flux(f);
        nf.label = "N_out";
        out.push_back(std::move(f));
        out.push_back(std::move(nf));
    } else {
        TimeSeries fr = flux(rec, Channel::right);
        TimeSeries fl = flux(rec, Channel::left);
        TimeSeries nr = integrated_flux(fr);
        nr.label = "N_R";
        TimeSeries nl = integrated_flux(fl);
        nl.label = "N_L";
        out.push_back(std::move(fr));
        out.push_back(std::move(fl));
        out.push_back(std::move(nr));
        out.push_back(std::move(nl));
    }
    return out;
}

Channel output_channel(const BinsRecord& rec) {
    (void)rec;
    return Channel::right;  // single-channel runs alias channel 0
}

} // namespace

RunManifest run(const RunConfig& cfg, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    RunManifest man;
    const auto path_of = [&out_dir](const std::string& name) {
        return (fs::path(out_dir) / name).string();
    };

    auto t0 = std::chrono::steady_clock::now();
    ScenarioBuild b = build_scenario(cfg);
    man.phase_seconds["setup"] = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    BinsRecord rec = b.markovian ? t_evol_mar(b.gates, b.sys0, b.field0, cfg.params)
                                 : t_evol_nmar(b.gates, b.sys0, b.field0, cfg.params);
    man.phase_seconds["evolution"] = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const auto& want = cfg.outputs;
    auto emit = [&man](const std::string& name) { man.files.push_back(name); };

    if (want.count("populations")) {
        write_series_csv(path_of("populations.csv"), population_series(rec));
        emit("populations.csv");
    }
    if (want.count("fluxes")) {
        write_series_csv(path_of("fluxes.csv"), flux_series(rec));
        emit("fluxes.csv");
    }
    if (want.count("conservation")) {
        std::vector<TimeSeries> cols = population_series(rec);
        for (auto& f : flux_series(rec))
            if (f.label.rfind("N_", 0) == 0) cols.push_back(std::move(f));
        if (!rec.markovian) cols.push_back(loop_integrated_statistics(rec));
        cols.push_back(quanta_conservation(rec));
        write_series_csv(path_of("conservation.csv"), cols);
        emit("conservation.csv");
    }
    if (want.count("entropy")) {
        std::vector<TimeSeries> cols;
        cols.push_back(entanglement(rec.schmidt, rec.times, "S_system"));
        cols.push_back(entanglement(rec.schmidt_tau, rec.times, "S_circuit"));
        write_series_csv(path_of("entropy.csv"), cols);
        emit("entropy.csv");
    }
    if (want.count("loop")) {
        std::vector<TimeSeries> cols;
        cols.push_back(loop_integrated_statistics(rec));
        if (rec.params.d_t.size() == 2) {
            cols.push_back(loop_integrated_statistics(rec, Channel::right));
            cols.push_back(loop_integrated_statistics(rec, Channel::left));
        }
        write_series_csv(path_of("loop.csv"), cols);
        emit("loop.csv");
    }
    man.phase_seconds["observables"] = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const Channel ch = output_channel(rec);
    std::optional<SteadyStateCorrelation> g1ss;
    if (want.count("g1_ss") || want.count("spectrum")) {
        g1ss = g1_ss(rec, ch);
        if (want.count("g1_ss")) {
            write_ss_csv(path_of("g1_ss.csv"), *g1ss);
            emit("g1_ss.csv");
        }
    }
    if (want.count("g2_ss")) {
        write_ss_csv(path_of("g2_ss.csv"), g2_ss(rec, ch));
        emit("g2_ss.csv");
    }
    if (want.count("spectrum")) {
        const Spectrum s = spectrum_w(rec.params.delta_t, g1ss->values, 4,
                                      Spectrum::Norm::max1);
        write_spectrum_csv(path_of("spectrum.csv"), s);
        emit("spectrum.csv");
    }
    if (want.count("g1_grid")) {
        write_grid_csv(path_of("g1_grid.csv"), g1_grid(rec, ch, ch));
        emit("g1_grid.csv");
    }
    if (want.count("g2_grid")) {
        write_grid_csv(path_of("g2_grid.csv"), g2_grid(rec, ch, ch));
        emit("g2_grid.csv");
    }
    man.phase_seconds["correlations"] = seconds_since(t0);

    man.discarded_weight = rec.stats.discarded;
    man.peak_bond = rec.stats.peak_bond;
    man.truncation_alarms = rec.stats.alarms;
    man.warnings = rec.warnings;

    json j;
    j["scenario"] = scenario_name(cfg.scenario);
    j["config"] = cfg.raw;
    j["phase_seconds"] = man.phase_seconds;
    j["discarded_weight"] = man.discarded_weight;
    j["peak_bond"] = man.peak_bond;
    j["truncation_alarms"] = man.truncation_alarms;
    j["files"] = man.files;
    j["warnings"] = man.warnings;
    std::ofstream os(path_of("manifest.json"));
    os << j.dump(2) << "\n";
    return man;
}

ValidationReport validate(const RunConfig& cfg, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    BinsRecord rec = run_record(cfg);
    std::vector<TimeSeries> mps = population_series(rec);

    const double gamma = cfg.params.gamma_l[0] + cfg.params.gamma_r[0];
    ValidationReport rep;
    std::vector<TimeSeries> oracle_series;

    auto series_from = [&rec](const std::vector<double>& vals, const std::string& label) {
        TimeSeries ts;
        ts.times = rec.times;
        ts.values = vals;
        ts.label = label;
        return ts;
    };

    switch (cfg.scenario) {
        case Scenario::decay: {
            rep.oracle = "analytic_decay";
            rep.threshold = 0.01;
            const auto s = oracles::analytic_decay(gamma, rec.times);
            oracle_series.push_back(series_from(s.populations[0], "n_exact"));
            break;
        }
        case Scenario::feedback: {
            rep.oracle = "dde_mirror";
            rep.threshold = 0.02;
            if (std::abs(cfg.params.gamma_l[0] - cfg.params.gamma_r[0]) > 1e-12)
                throw ConfigError("the mirror oracle assumes symmetric coupling");
            const auto s = oracles::dde_mirror(gamma, cfg.params.tau, cfg.params.phi,
                                               rec.times, cfg.params.delta_t / 2.0);
            oracle_series.push_back(series_from(s.populations[0], "n_dde"));
            break;
        }
        case Scenario::two_tls_mar:
        case Scenario::two_tls_nmar: {
            rep.oracle = "dde_two_tls";
            rep.threshold = 0.02;
            if (std::abs(cfg.params.gamma_l[0] - cfg.params.gamma_r[0]) > 1e-12)
                throw ConfigError("the two-emitter oracle assumes symmetric coupling");
            if (cfg.initial.system != "excited_ground")
                throw ConfigError("the two-emitter oracle assumes one initial excitation");
            const auto s = oracles::dde_two_tls(gamma, cfg.params.tau, cfg.params.phi,
                                                rec.times, cfg.params.delta_t / 2.0);
            oracle_series.push_back(series_from(s.populations[0], "n1_dde"));
            oracle_series.push_back(series_from(s.populations[1], "n2_dde"));
            break;
        }
        case Scenario::drive_cw:
        case Scenario::drive_pulse: {
            if (cfg.params.tau > 0.0)
                throw ConfigError("no oracle for driven feedback runs");
            rep.oracle = "lindblad_driven_tls";
            rep.threshold = 0.02;
            const PumpSpec pump = build_pump(cfg);
            const double dt = cfg.params.delta_t;
            auto omega = [pump, dt](double t) {
                const long k = std::min<long>(static_cast<long>(pump.samples.size()) - 1,
                                              static_cast<long>(std::floor(t / dt + 1e-12)));
                return pump.kind == PumpSpec::Kind::cw ? pump.omega
                                                       : pump.at(std::max<long>(0, k));
            };
            const auto s = oracles::lindblad_driven_tls(omega, cfg.params.detuning, gamma,
                                                        rec.times, dt / 4.0,
                                                        cfg.initial.system == "excited");
            oracle_series.push_back(series_from(s.populations[0], "n_lindblad"));
            break;
        }
        case Scenario::fock:
            throw ConfigError("no oracle for scenario fock");
    }

    double max_dev = 0.0;
    for (size_t e = 0; e < oracle_series.size(); ++e)
        for (size_t k = 0; k < rec.times.size(); ++k)
            max_dev = std::max(max_dev,
                               std::abs(mps[e].values[k] - oracle_series[e].values[k]));
    rep.max_deviation = max_dev;
    rep.pass = max_dev <= rep.threshold;

    std::vector<TimeSeries> all = mps;
    all.insert(all.end(), oracle_series.begin(), oracle_series.end());
    write_series_csv((fs::path(out_dir) / "validation_series.csv").string(), all);

    json j;
    j["scenario"] = scenario_name(cfg.scenario);
    j["oracle"] = rep.oracle;
    j["max_deviation"] = rep.max_deviation;
    j["threshold"] = rep.threshold;
    j["pass"] = rep.pass;
    std::ofstream os((fs::path(out_dir) / "validation.json").string());
    os << j.dump(2) << "\n";
    return rep;
}

} // namespace wqed
