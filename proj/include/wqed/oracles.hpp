#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "wqed/tensor.hpp"

namespace wqed {
namespace oracles {

/// Reference series sampled on a caller-supplied grid; one value vector
/// per emitter.
struct OracleSeries {
    std::vector<double> times;
    std::vector<std::vector<double>> populations;
};

/// exp(-gamma t) decay of a single initially excited emitter.
OracleSeries analytic_decay(double gamma, std::span<const double> t_grid);

/// Amplitude-level delay system for two emitters in the single-excitation
/// sector: dc_i/dt = -(gamma/2) [c_i + e^{i phi} c_j(t - tau) theta(t - tau)],
/// c = (1, 0). Fixed-step 4th-order integration with a cubic-Hermite
/// history buffer; `h` is an upper bound on the internal step.
OracleSeries dde_two_tls(double gamma, double tau, double phi,
                         std::span<const double> t_grid, double h = 0.01);

/// Same delay structure folded onto a single emitter facing a mirror:
/// dc/dt = -(gamma/2) [c + e^{i phi} c(t - tau) theta(t - tau)].
OracleSeries dde_mirror(double gamma, double tau, double phi,
                        std::span<const double> t_grid, double h = 0.01);

/// Driven two-level emitter under the Markovian master equation with
/// H = Omega(t)(sp + sm) + detuning * sp sm and decay rate gamma,
/// integrated with fixed-step RK4. Throws if gamma*h or max|Omega|*h
/// reach 0.1.
OracleSeries lindblad_driven_tls(const std::function<double(double)>& omega,
                                 double detuning, double gamma,
                                 std::span<const double> t_grid, double h = 0.0125,
                                 bool start_excited = true);

/// Steady-state two-time functions by the regression theorem for a CW
/// drive: G1(t') = <sp(t_ss) sm(t_ss + t')>, G2(t') normalized the same
/// way as the emitter correlators. n_ss is the steady population.
struct LindbladTwoTime {
    std::vector<double> t_primes;
    std::vector<Complex> g1;   // <sp(t_ss) sm(t_ss+t')>
    std::vector<double> g2;    // <sp(t_ss) sp sm (t_ss+t') sm(t_ss)>
    double n_ss = 0.0;
};
LindbladTwoTime lindblad_two_time(double omega_cw, double detuning, double gamma,
                                  double t_ss, std::span<const double> t_primes,
                                  double h = 0.0125);

} // namespace oracles
} // namespace wqed
