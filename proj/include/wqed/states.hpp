#pragma once

#include <string>
#include <vector>

#include "wqed/model.hpp"
#include "wqed/mps.hpp"

namespace wqed {

/// Joint emitter state. Basis order per two-level emitter is
/// (ground, excited); multi-emitter amplitudes are row-major over the
/// per-emitter spaces.
struct SystemState {
    Vector amplitudes;
    std::vector<long> dims;  // per-emitter local extents
};

SystemState tls_ground();
SystemState tls_excited();

/// Joint state of two emitters as an outer product.
SystemState system_kron(const SystemState& a, const SystemState& b);

/// c1 |e,g> + c2 |g,e>; coefficients must be normalized.
SystemState entangled_pair(Complex c1, Complex c2);

/// Pulse envelope samples on the bin grid, normalized so that
/// sum |f_k|^2 = 1.
struct Envelope {
    std::vector<Complex> samples;
    double delta_t = 0.0;
};

Envelope normalize_pulse(Envelope env);

/// Gaussian envelope centered at t_c with width sigma, sampled on the run
/// grid and square-normalized.
Envelope gaussian_envelope(double t_c, double sigma, const SimParams& params);

/// Single-column complex CSV ("re,im" per line) at the simulation grid.
Envelope read_envelope_csv(const std::string& path, long expected_len, double delta_t);

/// Product chain of n_bins vacuum time bins (extent = product of d_t).
std::vector<SiteTensor> vacuum(long n_bins, const SimParams& params);

/// Propagating n-photon Fock pulse (n = 1 or 2) with the given envelope,
/// placed in one channel with every other channel in vacuum. The chain is
/// right-normalized with unit norm. Two-photon pulses need a per-channel
/// extent of at least 3.
std::vector<SiteTensor> fock_pulse(const Envelope& env, int n_photons,
                                   Channel direction, const SimParams& params);

} // namespace wqed
