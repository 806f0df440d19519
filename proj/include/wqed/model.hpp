#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wqed/tensor.hpp"

namespace wqed {

/// Field channel inside a time bin. Bins hold all channels as one site;
/// the physical index is row-major over (right, left) occupation numbers.
/// Single-channel (folded, semi-infinite) geometries use channel 0.
enum class Channel { right = 0, left = 1 };

/// Simulation parameters, all in units of the decay rate (gamma = 1).
struct SimParams {
    double delta_t = 0.05;        // bin width
    double t_max = 8.0;           // horizon
    std::vector<long> d_sys = {2};     // per-emitter local extents
    std::vector<long> d_t = {2, 2};    // per-channel bin extents
    std::vector<double> gamma_l = {0.5};  // per-emitter left decay rates
    std::vector<double> gamma_r = {0.5};  // per-emitter right decay rates
    double tau = 0.0;             // feedback delay, multiple of delta_t
    double phi = 0.0;             // feedback / inter-emitter phase
    long bond_max = 4;
    double cutoff = 1e-12;
    double detuning = 0.0;

    long steps() const;           // t_max / delta_t
    long delay_steps() const;     // tau / delta_t (checked integral)
    long bin_extent() const;      // product of d_t
    long sys_extent() const;      // product of d_sys
    void validate() const;
};

/// (gamma_l, gamma_r) for one emitter with total rate gamma.
std::pair<double, double> symmetric_coupling(double gamma);
std::pair<double, double> chiral_coupling(double gamma, Channel direction);

/// Classical drive. CW uses a constant Rabi amplitude; envelope drives
/// carry one Omega(t_k) sample per step.
struct PumpSpec {
    enum class Kind { none, cw, envelope } kind = Kind::none;
    double omega = 0.0;
    std::vector<double> samples;

    static PumpSpec none() { return {}; }
    static PumpSpec cw(double omega);
    static PumpSpec from_samples(std::vector<double> samples);
    double at(long step) const;
};

/// Rabi envelope for a classical pulse of the given area (time integral),
/// sampled at the step grid.
std::vector<double> gaussian_pulse_area(double area, double t_c, double sigma,
                                        const SimParams& params);

/// Time-bin noise operators for one channel: annihilate = sqrt(dt) * a on
/// the truncated number basis, number = annihilate^dag * annihilate.
struct NoiseOps {
    Tensor annihilate;
    Tensor number;
};
NoiseOps noise_operators(long d_t, double delta_t);

enum class SiteRole { system, present_bin, feedback_bin };

/// One step's unitary gate over the joined physical space of its sites.
/// Axis order of the flattened gate follows `roles`.
struct StepPropagator {
    Tensor gate;
    int arity = 2;
    std::vector<long> dims;  // per-slot physical extents, in role order
    std::array<SiteRole, 3> roles{SiteRole::system, SiteRole::present_bin,
                                  SiteRole::feedback_bin};
};

/// Per-step Hermitian gate generators H(t_k) * dt plus metadata. The
/// propagator for a step is exp(-i * generator(k)); time-independent
/// sequences build it once.
class GateSequence {
public:
    GateSequence() = default;
    GateSequence(int arity, std::vector<long> dims, bool time_dependent,
                 std::function<Tensor(long)> generator);

    int arity() const { return arity_; }
    const std::vector<long>& dims() const { return dims_; }
    bool time_dependent() const { return time_dependent_; }
    Tensor generator(long step) const { return generator_(step); }
    const StepPropagator& propagator(long step) const;

private:
    int arity_ = 2;
    std::vector<long> dims_;
    bool time_dependent_ = false;
    std::function<Tensor(long)> generator_;
    mutable std::optional<StepPropagator> cached_;
    mutable long cached_step_ = -1;
};

/// Exponentiates a Hermitian generator into a unitary step gate.
StepPropagator build_propagator(const Tensor& generator, int arity,
                                std::vector<long> dims);

/// Single emitter in an infinite waveguide (two channels per bin).
GateSequence hamiltonian_1tls(const SimParams& params,
                              const PumpSpec& pump = PumpSpec::none());

/// Single emitter with mirror feedback (one folded channel; 3-site gate on
/// system, present bin and the tau-delayed bin).
GateSequence hamiltonian_1tls_feedback(const SimParams& params,
                                       const PumpSpec& pump = PumpSpec::none());

/// Two emitters sharing the present bin (Markovian limit). The second
/// emitter's couplings carry exp(+i phi) on the right channel and
/// exp(-i phi) on the left one.
GateSequence hamiltonian_2tls_mar(const SimParams& params,
                                  const PumpSpec& pump = PumpSpec::none());

/// Two emitters with propagation delay: each couples to its outgoing
/// channel in the present bin and to the partner's delayed channel with
/// phase exp(i phi).
GateSequence hamiltonian_2tls_nmar(const SimParams& params,
                                   const PumpSpec& pump = PumpSpec::none());

// ---- operator builders -----------------------------------------------

/// sigma^+ sigma^- for a single two-level emitter.
Tensor tls_pop();
/// Population of one emitter embedded in the joint system space.
Tensor tls_pop(long emitter, const SimParams& params);
/// Total excitation operator over the joint system space.
Tensor sys_total_excitation(const SimParams& params);
/// Photon number of one channel on the bin space.
Tensor bin_number_op(Channel ch, const SimParams& params);
/// Total photon number over all channels on the bin space.
Tensor bin_total_number_op(const SimParams& params);
/// Annihilation operator of one channel on the bin space (unit ladder).
Tensor bin_annihilate_op(Channel ch, const SimParams& params);

} // namespace wqed
