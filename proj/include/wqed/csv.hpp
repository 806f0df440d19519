#pragma once

#include <string>
#include <vector>

#include "wqed/correlations.hpp"
#include "wqed/observables.hpp"

namespace wqed {

/// Formats a double with 17 significant digits ("%.17g").
std::string format_full(double v);

/// Header `t,<label>,...`; one row per grid point, LF line endings.
/// All series must share the same time grid.
void write_series_csv(const std::string& path, const std::vector<TimeSeries>& series);

/// Header `t,t_prime,re,im`; only valid grid entries are emitted.
void write_grid_csv(const std::string& path, const CorrelationGrid& grid);

/// Header `omega,value`.
void write_spectrum_csv(const std::string& path, const Spectrum& spectrum);

/// Leading `# t_ss = <value>` line, then `t_prime,re,im` rows.
void write_ss_csv(const std::string& path, const SteadyStateCorrelation& corr);

} // namespace wqed
