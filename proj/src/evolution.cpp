#include "wqed/evolution.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace wqed {

namespace {

SiteTensor system_site(const SystemState& sys0) {
    const double nrm = sys0.amplitudes.norm();
    if (std::abs(nrm - 1.0) > 1e-12)
        throw ContractViolation("initial system state is not normalized");
    SiteTensor s;
    Tensor t({1, sys0.amplitudes.size(), 1});
    for (long i = 0; i < sys0.amplitudes.size(); ++i) t[i] = sys0.amplitudes(i);
    s.data = std::move(t);
    s.kind = SiteKind::system;
    s.time_index = -1;
    return s;
}

SchmidtSpectrum spectrum_from_snapshot(const Tensor& snap, SchmidtSpectrum::Cut cut,
                                       int time_index) {
    Tensor rho_t = contract(snap, snap.conjugated(), {{0, 0}, {2, 2}});
    Matrix rho = rho_t.to_matrix();
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()));
    if (es.info() != Eigen::Success)
        throw NumericError("system-cut spectrum: eigendecomposition failed");
    std::vector<double> vals;
    for (long i = es.eigenvalues().size() - 1; i >= 0; --i)
        vals.push_back(std::sqrt(std::max(0.0, es.eigenvalues()(i))));
    double tot = 0.0;
    for (double v : vals) tot += v * v;
    if (tot > 0.0)
        for (double& v : vals) v /= std::sqrt(tot);
    SchmidtSpectrum sp;
    sp.values = std::move(vals);
    sp.cut = cut;
    sp.time_index = time_index;
    return sp;
}

SchmidtSpectrum trivial_spectrum(SchmidtSpectrum::Cut cut, int time_index) {
    SchmidtSpectrum sp;
    sp.values = {1.0};
    sp.cut = cut;
    sp.time_index = time_index;
    return sp;
}

void check_gate_dims(const StepPropagator& u, const SimParams& p, int arity,
                     const char* what) {
    if (u.arity != arity)
        throw DimensionError(std::string(what) + ": gate arity " + std::to_string(u.arity) +
                             ", expected " + std::to_string(arity));
    if (u.dims.empty() || u.dims[0] != p.sys_extent())
        throw DimensionError(std::string(what) + ": gate system extent mismatch");
    for (size_t k = 1; k < u.dims.size(); ++k)
        if (u.dims[k] != p.bin_extent())
            throw DimensionError(std::string(what) + ": gate bin extent mismatch");
}

void note_step(BinsRecord& rec, Mps& psi, long step, const EvolutionOptions& opts) {
    if (psi.step_discarded() > opts.alarm_threshold) {
        ++rec.stats.alarms;
        if (rec.stats.alarms <= 8)
            rec.warnings.push_back("step " + std::to_string(step) + ": discarded weight " +
                                   std::to_string(psi.step_discarded()) +
                                   " above alarm threshold");
    }
    const double nrm = psi.norm();
    if (std::abs(nrm - 1.0) > 1e-8)
        rec.warnings.push_back("step " + std::to_string(step) + ": norm drifted to " +
                               std::to_string(nrm));
}

// Reorders the gate from role order (system, present, feedback) to the
// chain window order (feedback, system, present).
Tensor permute_gate_to_window(const Tensor& gate, const std::vector<long>& dims) {
    const long ds = dims[0], dp = dims[1], df = dims[2];
    Tensor g6 = gate.reshaped({ds, dp, df, ds, dp, df});
    Tensor gp = g6.permuted({2, 0, 1, 5, 3, 4});
    const long p = ds * dp * df;
    return gp.reshaped({p, p});
}

} // namespace

std::vector<long> BinsRecord::loop_window(long step) const {
    std::vector<long> labels;
    if (markovian) return labels;
    for (long j = std::max<long>(0, step - delay); j <= step - 1; ++j)
        labels.push_back(j);
    return labels;
}

Complex snapshot_expectation(const Tensor& snapshot, const Tensor& op) {
    if (snapshot.rank() != 3)
        throw DimensionError("snapshot_expectation: snapshot must be rank-3");
    const long d = snapshot.extent(1);
    if (op.rank() != 2 || op.extent(0) != d || op.extent(1) != d)
        throw DimensionError("snapshot_expectation: operator extent mismatch");
    Tensor applied = contract(op, snapshot, {{1, 1}});  // (i, l, r)
    Tensor val = contract(snapshot.conjugated(), applied, {{0, 1}, {1, 0}, {2, 2}});
    return val[0];
}

BinsRecord t_evol_mar(const GateSequence& gates, const SystemState& sys0,
                      const std::vector<SiteTensor>& field0, const SimParams& params,
                      const EvolutionOptions& opts) {
    params.validate();
    if (gates.arity() != 2)
        throw DimensionError("t_evol_mar: needs a 2-site gate sequence");
    const long n = params.steps();
    if (static_cast<long>(field0.size()) < n)
        throw DimensionError("t_evol_mar: field chain shorter than the step count");

    std::vector<SiteTensor> chain;
    chain.reserve(static_cast<size_t>(n + 1));
    chain.push_back(system_site(sys0));
    for (long k = 0; k < n; ++k) chain.push_back(field0[static_cast<size_t>(k)]);

    Mps psi(std::move(chain), 0, params.bond_max, params.cutoff);

    BinsRecord rec;
    rec.params = params;
    rec.markovian = true;
    rec.n_steps = n;
    rec.delay = 0;

    rec.times.push_back(0.0);
    rec.system_states.push_back(psi.site(0).data);
    rec.schmidt.push_back(spectrum_from_snapshot(rec.system_states[0],
                                                 SchmidtSpectrum::Cut::system_cut, 0));
    rec.schmidt_tau.push_back(trivial_spectrum(SchmidtSpectrum::Cut::feedback_cut, 0));

    ApplyGateOptions gate_opts;
    gate_opts.strict_unitary = false;  // propagators are unitary by construction

    for (long k = 0; k < n; ++k) {
        const StepPropagator& u = gates.propagator(k);
        if (k == 0) check_gate_dims(u, params, 2, "t_evol_mar");
        psi.reset_step_discarded();

        // gate over (system, bin); emit the bin first so the system advances
        Mps::WindowResult wr = psi.apply_gate_window(&u.gate, k, 2, {1, 0}, 1, gate_opts);

        rec.output_field_states.push_back(wr.oc_snapshots[0]);
        rec.output_time_index.push_back(psi.site(k).time_index);
        rec.system_states.push_back(wr.oc_snapshots[1]);
        rec.times.push_back(static_cast<double>(k + 1) * params.delta_t);
        rec.schmidt.push_back(spectrum_from_snapshot(rec.system_states.back(),
                                                     SchmidtSpectrum::Cut::system_cut,
                                                     static_cast<int>(k + 1)));
        SchmidtSpectrum tau_sp;
        tau_sp.values = wr.cut_values[0];
        tau_sp.cut = SchmidtSpectrum::Cut::feedback_cut;
        tau_sp.time_index = static_cast<int>(k + 1);
        rec.schmidt_tau.push_back(std::move(tau_sp));

        note_step(rec, psi, k, opts);
    }

    const int alarm_count = rec.stats.alarms;
    rec.stats = psi.stats();
    rec.stats.alarms = alarm_count;
    rec.sys_position = n;
    rec.final_state = std::move(psi);
    return rec;
}

BinsRecord t_evol_nmar(const GateSequence& gates, const SystemState& sys0,
                       const std::vector<SiteTensor>& field0, const SimParams& params,
                       const EvolutionOptions& opts) {
    params.validate();
    if (gates.arity() != 3)
        throw DimensionError("t_evol_nmar: needs a 3-site gate sequence");
    const long d = params.delay_steps();
    if (d < 1) throw ContractViolation("t_evol_nmar: tau must be at least one step");
    const long n = params.steps();
    if (static_cast<long>(field0.size()) < n)
        throw DimensionError("t_evol_nmar: field chain shorter than the step count");

    // pre-allocate the delay window with vacuum bins labelled -d .. -1
    std::vector<SiteTensor> chain;
    chain.reserve(static_cast<size_t>(n + d + 1));
    {
        SimParams pre = params;
        auto pre_bins = vacuum(d, pre);
        for (long j = 0; j < d; ++j) {
            pre_bins[static_cast<size_t>(j)].time_index = static_cast<int>(j - d);
            chain.push_back(std::move(pre_bins[static_cast<size_t>(j)]));
        }
    }
    chain.push_back(system_site(sys0));
    for (long k = 0; k < n; ++k) chain.push_back(field0[static_cast<size_t>(k)]);

    Mps psi(std::move(chain), static_cast<int>(d), params.bond_max, params.cutoff);

    BinsRecord rec;
    rec.params = params;
    rec.markovian = false;
    rec.n_steps = n;
    rec.delay = d;
    rec.loop_bin_states.resize(static_cast<size_t>(n));

    rec.times.push_back(0.0);
    rec.system_states.push_back(psi.site(d).data);
    rec.schmidt.push_back(spectrum_from_snapshot(rec.system_states[0],
                                                 SchmidtSpectrum::Cut::system_cut, 0));
    rec.schmidt_tau.push_back(trivial_spectrum(SchmidtSpectrum::Cut::feedback_cut, 0));

    ApplyGateOptions gate_opts;
    gate_opts.strict_unitary = false;

    Tensor window_gate;
    bool have_cached_gate = false;

    // the OC rests on the upcoming feedback bin between steps
    psi.move_oc(0);

    for (long k = 0; k < n; ++k) {
        const StepPropagator& u = gates.propagator(k);
        if (k == 0) check_gate_dims(u, params, 3, "t_evol_nmar");
        if (!have_cached_gate || gates.time_dependent()) {
            window_gate = permute_gate_to_window(u.gate, u.dims);
            have_cached_gate = true;
        }
        psi.reset_step_discarded();

        // chain layout: delayed bin at k, system at k+d, present bin at k+d+1;
        // the delayed bin rides up to the window with the OC on it
        psi.move_oc(k);
        for (long q = k; q <= k + d - 2; ++q) psi.swap_adjacent(q, OcSide::right);

        // window order in: (feedback, system, present); out: (feedback, present, system)
        Mps::WindowResult wr =
            psi.apply_gate_window(&window_gate, k + d - 1, 3, {0, 2, 1}, 2, gate_opts);

        rec.output_field_states.push_back(wr.oc_snapshots[0]);
        rec.output_time_index.push_back(psi.site(k + d - 1).time_index);
        rec.loop_bin_states[static_cast<size_t>(k)] = wr.oc_snapshots[1];
        rec.system_states.push_back(wr.oc_snapshots[2]);
        rec.times.push_back(static_cast<double>(k + 1) * params.delta_t);
        rec.schmidt.push_back(spectrum_from_snapshot(rec.system_states.back(),
                                                     SchmidtSpectrum::Cut::system_cut,
                                                     static_cast<int>(k + 1)));

        // swap the finalized bin back to its time-ordered slot
        psi.move_oc(k + d - 1);
        for (long q = k + d - 1; q >= k + 1; --q) psi.swap_adjacent(q - 1, OcSide::left);

        if (opts.record_schmidt_tau) {
            // reading the cut also parks the OC on the next feedback bin
            SchmidtSpectrum sp = psi.schmidt_at_cut(k + 1);
            sp.cut = SchmidtSpectrum::Cut::feedback_cut;
            sp.time_index = static_cast<int>(k + 1);
            rec.schmidt_tau.push_back(std::move(sp));
        } else {
            rec.schmidt_tau.push_back(trivial_spectrum(SchmidtSpectrum::Cut::feedback_cut,
                                                       static_cast<int>(k + 1)));
            psi.move_oc(k + 1);
        }
        note_step(rec, psi, k, opts);
    }

    const int alarm_count = rec.stats.alarms;
    rec.stats = psi.stats();
    rec.stats.alarms = alarm_count;
    rec.sys_position = n + d;
    rec.final_state = std::move(psi);
    return rec;
}

} // namespace wqed
