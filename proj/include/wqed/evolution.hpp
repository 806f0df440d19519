#pragma once

#include <string>
#include <vector>

#include "wqed/model.hpp"
#include "wqed/mps.hpp"
#include "wqed/states.hpp"

namespace wqed {

/// Per-run history. Snapshot tensors are stored in orthogonality-center
/// form: contracting a snapshot with a one-site operator and its own
/// conjugate gives the expectation value directly.
///
/// times[k] = k * delta_t for k = 0..n_steps; entry 0 describes the
/// initial state. outputs[m] is the time bin finalized during step m
/// (its content never changes afterwards); for feedback runs that is the
/// bin that left the delay loop. loop_bin_states[j] is bin j right after
/// its first interaction, valid while the bin sits inside the loop.
struct BinsRecord {
    SimParams params;
    bool markovian = true;
    long n_steps = 0;
    long delay = 0;  // delay in steps (0 for Markovian runs)

    std::vector<double> times;                 // n_steps + 1
    std::vector<Tensor> system_states;         // n_steps + 1
    std::vector<Tensor> output_field_states;   // n_steps, finalization order
    std::vector<int> output_time_index;        // bin label per output
    std::vector<Tensor> loop_bin_states;       // feedback runs only
    std::vector<SchmidtSpectrum> schmidt;      // system cut, n_steps + 1
    std::vector<SchmidtSpectrum> schmidt_tau;  // feedback cut, n_steps + 1

    Mps final_state;
    long sys_position = 0;  // system site index in the final chain

    TruncationStats stats;
    std::vector<std::string> warnings;

    /// Labels of the bins inside the delay window (t_k - tau, t_k].
    std::vector<long> loop_window(long step) const;
};

struct EvolutionOptions {
    double alarm_threshold = 1e-8;  // per-step discarded weight warning level
    bool record_schmidt_tau = true;
};

/// Markovian stepping: one 2-site gate per step on (system, present bin);
/// the system site advances past the bin it just interacted with.
BinsRecord t_evol_mar(const GateSequence& gates, const SystemState& sys0,
                      const std::vector<SiteTensor>& field0, const SimParams& params,
                      const EvolutionOptions& opts = {});

/// Feedback stepping: the tau-delayed bin is swapped next to the system,
/// a 3-site gate acts on (delayed bin, system, present bin), and the
/// delayed bin is swapped back to its time slot. Bins leaving the delay
/// window are finalized.
BinsRecord t_evol_nmar(const GateSequence& gates, const SystemState& sys0,
                       const std::vector<SiteTensor>& field0, const SimParams& params,
                       const EvolutionOptions& opts = {});

/// Expectation value against an orthogonality-center snapshot.
Complex snapshot_expectation(const Tensor& snapshot, const Tensor& op);

} // namespace wqed
