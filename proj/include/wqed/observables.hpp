#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wqed/evolution.hpp"

namespace wqed {

enum class Unit { dimensionless, gamma, photons };

struct TimeSeries {
    std::vector<double> times;
    std::vector<double> values;
    std::string label;
    Unit unit = Unit::dimensionless;
};

/// One real series per Hermitian operator, evaluated on snapshot tensors.
/// Imaginary residue below 1e-8 is dropped; anything larger is an error.
std::vector<TimeSeries> single_time_expectation(std::span<const Tensor> snapshots,
                                                std::span<const Tensor> ops,
                                                std::span<const std::string> labels,
                                                const std::vector<double>& times);

/// Population of one emitter, on the run grid.
TimeSeries system_population(const BinsRecord& rec, long emitter = 0);

/// Photon flux of one channel in units of gamma. The value at t_k is the
/// flux carried by the bin finalized during the preceding step.
TimeSeries flux(const BinsRecord& rec, Channel ch);
/// Total flux over all channels.
TimeSeries total_flux(const BinsRecord& rec);

/// Cumulative photon count: running sum of flux * delta_t.
TimeSeries integrated_flux(const TimeSeries& flux_series);

/// Photon weight inside the delay window (t - tau, t]. Feedback runs only.
TimeSeries loop_integrated_statistics(const BinsRecord& rec,
                                      std::optional<Channel> ch = std::nullopt);

/// N_total(t): system excitation plus emitted photons (plus the loop term
/// for feedback runs). Flat for zero-pump runs.
TimeSeries quanta_conservation(const BinsRecord& rec);

/// Entanglement entropy in bits, S = -sum lambda^2 log2 lambda^2.
TimeSeries entanglement(std::span<const SchmidtSpectrum> spectra,
                        const std::vector<double>& times, const std::string& label);

double entropy_of_spectrum(const SchmidtSpectrum& sp);

} // namespace wqed
