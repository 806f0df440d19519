#include "wqed/csv.hpp"

#include <cstdio>
#include <fstream>

namespace wqed {

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);  // binary keeps LF endings everywhere
    if (!os) throw ConfigError("cannot open output file " + path);
    return os;
}

} // namespace

void write_series_csv(const std::string& path, const std::vector<TimeSeries>& series) {
    if (series.empty()) throw DimensionError("write_series_csv: no series");
    const auto& t = series.front().times;
    for (const auto& s : series)
        if (s.times != t)
            throw DimensionError("write_series_csv: series grids differ");
    auto os = open_out(path);
    os << "t";
    for (const auto& s : series) os << "," << s.label;
    os << "\n";
    for (size_t k = 0; k < t.size(); ++k) {
        os << format_full(t[k]);
        for (const auto& s : series) os << "," << format_full(s.values[k]);
        os << "\n";
    }
}

void write_grid_csv(const std::string& path, const CorrelationGrid& grid) {
    auto os = open_out(path);
    os << "t,t_prime,re,im\n";
    for (size_t j = 0; j < grid.t_values.size(); ++j) {
        const long cols = grid.valid_cols[j];
        for (long k = 0; k < cols; ++k) {
            const Complex v = grid.values(static_cast<long>(j), k);
            os << format_full(grid.t_values[j]) << ","
               << format_full(grid.tprime_values[static_cast<size_t>(k)]) << ","
               << format_full(v.real()) << "," << format_full(v.imag()) << "\n";
        }
    }
}

void write_spectrum_csv(const std::string& path, const Spectrum& spectrum) {
    auto os = open_out(path);
    os << "omega,value\n";
    for (size_t j = 0; j < spectrum.omega_values.size(); ++j)
        os << format_full(spectrum.omega_values[j]) << ","
           << format_full(spectrum.values[j]) << "\n";
}

void write_ss_csv(const std::string& path, const SteadyStateCorrelation& corr) {
    auto os = open_out(path);
    os << "# t_ss = " << format_full(corr.t_ss) << "\n";
    os << "t_prime,re,im\n";
    for (size_t k = 0; k < corr.t_primes.size(); ++k)
        os << format_full(corr.t_primes[k]) << "," << format_full(corr.values[k].real())
           << "," << format_full(corr.values[k].imag()) << "\n";
}

} // namespace wqed
