#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "wqed/evolution.hpp"

namespace wqed {

/// Two-time correlation over (t, t + t'). Rows run over detection times of
/// finalized bins; entries with t + t' beyond the finalized region are zero
/// and excluded from `valid_cols`.
struct CorrelationGrid {
    std::vector<double> t_values;
    std::vector<double> tprime_values;
    Eigen::MatrixXcd values;
    std::vector<long> valid_cols;  // per row
    enum class Kind { g1, g2, generic } kind = Kind::generic;
};

/// G(t, t+t') = <a(t) b(t+t')> / dt over the finalized bins of the final
/// state, with single-bin operators a_op, b_op.
CorrelationGrid correlation_2op_2t(const BinsRecord& rec, const Tensor& a_op,
                                   const Tensor& b_op);

/// G(t, t+t') = <a(t) b(t+t') c(t+t') d(t)> / dt^2.
CorrelationGrid correlation_4op_2t(const BinsRecord& rec, const Tensor& a_op,
                                   const Tensor& b_op, const Tensor& c_op,
                                   const Tensor& d_op);

/// First-order field correlation of the named channels; equals the flux
/// on the t' = 0 diagonal.
CorrelationGrid g1_grid(const BinsRecord& rec, Channel alpha, Channel alpha_prime);
/// Second-order field correlation; real and nonnegative.
CorrelationGrid g2_grid(const BinsRecord& rec, Channel alpha, Channel alpha_prime);

struct SteadyStateOptions {
    double window = 1.0;                  // trailing window for detection
    double tol = 1e-3;                    // max population change within it
    std::optional<double> t_ss_override;  // skip detection
    std::optional<double> span;           // required correlation span in t'
};

/// Earliest time where the system population stays within `tol` over the
/// trailing window. Throws if no such time leaves room for `span`.
double detect_steady_state(const BinsRecord& rec, const SteadyStateOptions& opts = {});

struct SteadyStateCorrelation {
    std::vector<double> t_primes;
    std::vector<Complex> values;
    double t_ss = 0.0;
};

SteadyStateCorrelation correlation_ss_2op(const BinsRecord& rec, const Tensor& a_op,
                                          const Tensor& b_op,
                                          const SteadyStateOptions& opts = {});
SteadyStateCorrelation correlation_ss_4op(const BinsRecord& rec, const Tensor& a_op,
                                          const Tensor& b_op, const Tensor& c_op,
                                          const Tensor& d_op,
                                          const SteadyStateOptions& opts = {});

/// Channel versions of the steady-state correlations.
SteadyStateCorrelation g1_ss(const BinsRecord& rec, Channel ch,
                             const SteadyStateOptions& opts = {});
SteadyStateCorrelation g2_ss(const BinsRecord& rec, Channel ch,
                             const SteadyStateOptions& opts = {});

/// Divides by flux (order 1) or flux squared (order 2).
std::vector<Complex> normalize_g(std::span<const Complex> correlation,
                                 double flux_at_tss, int order);

struct Spectrum {
    std::vector<double> omega_values;  // offsets from the drive frequency
    std::vector<double> values;
    enum class Norm { raw, max1 } normalization = Norm::raw;
};

/// Long-time spectrum Re[integral g1(t') exp(i w t') dt'] on a frequency
/// grid zero-padded by `pad_factor`.
Spectrum spectrum_w(double delta_t, std::span<const Complex> g1_ss,
                    long pad_factor = 4, Spectrum::Norm norm = Spectrum::Norm::raw);

/// Indices of local maxima of a spectrum (interior strict maxima above
/// `floor` times the global maximum).
std::vector<long> spectrum_peaks(const Spectrum& s, double floor = 0.02);

/// Time-resolved spectra from a full G1 grid: S(w,t) integrates rows up to
/// t, I(w,t) transforms the single row at t. Upper limits truncate at the
/// grid edge.
struct TimeDependentSpectra {
    std::vector<double> omega_values;
    std::vector<double> times;
    Eigen::MatrixXd S;  // (times, omega)
    Eigen::MatrixXd I;  // (times, omega)
};
TimeDependentSpectra time_dependent_spectrum(const CorrelationGrid& g1,
                                             double center_frequency_offset = 0.0,
                                             long pad_factor = 4);

} // namespace wqed
