#include "wqed/observables.hpp"

#include <cmath>

namespace wqed {

namespace {

double real_expectation(const Tensor& snapshot, const Tensor& op) {
    const Complex v = snapshot_expectation(snapshot, op);
    if (std::abs(v.imag()) > 1e-8)
        throw NumericError("expectation has imaginary residue " +
                           std::to_string(v.imag()));
    return v.real();
}

std::string channel_label(const BinsRecord& rec, Channel ch) {
    if (rec.params.d_t.size() == 1) return "flux";
    return ch == Channel::right ? "flux_R" : "flux_L";
}

} // namespace

std::vector<TimeSeries> single_time_expectation(std::span<const Tensor> snapshots,
                                                std::span<const Tensor> ops,
                                                std::span<const std::string> labels,
                                                const std::vector<double>& times) {
    if (ops.size() != labels.size())
        throw DimensionError("single_time_expectation: one label per operator");
    if (snapshots.size() != times.size())
        throw DimensionError("single_time_expectation: one time per snapshot");
    std::vector<TimeSeries> out;
    for (size_t o = 0; o < ops.size(); ++o) {
        TimeSeries ts;
        ts.times = times;
        ts.label = labels[o];
        ts.values.reserve(snapshots.size());
        for (const auto& s : snapshots) ts.values.push_back(real_expectation(s, ops[o]));
        out.push_back(std::move(ts));
    }
    return out;
}

TimeSeries system_population(const BinsRecord& rec, long emitter) {
    const Tensor op = tls_pop(emitter, rec.params);
    TimeSeries ts;
    ts.times = rec.times;
    ts.label = rec.params.d_sys.size() == 1 ? "n_tls" : "n_tls_" + std::to_string(emitter + 1);
    ts.unit = Unit::dimensionless;
    for (const auto& s : rec.system_states) ts.values.push_back(real_expectation(s, op));
    return ts;
}

TimeSeries flux(const BinsRecord& rec, Channel ch) {
    const Tensor op = bin_number_op(ch, rec.params);
    TimeSeries ts;
    ts.times = rec.times;
    ts.label = channel_label(rec, ch);
    ts.unit = Unit::gamma;
    ts.values.push_back(0.0);
    for (const auto& s : rec.output_field_states)
        ts.values.push_back(real_expectation(s, op) / rec.params.delta_t);
    return ts;
}

TimeSeries total_flux(const BinsRecord& rec) {
    const Tensor op = bin_total_number_op(rec.params);
    TimeSeries ts;
    ts.times = rec.times;
    ts.label = "flux_total";
    ts.unit = Unit::gamma;
    ts.values.push_back(0.0);
    for (const auto& s : rec.output_field_states)
        ts.values.push_back(real_expectation(s, op) / rec.params.delta_t);
    return ts;
}

TimeSeries integrated_flux(const TimeSeries& flux_series) {
    if (flux_series.times.size() < 2)
        throw DimensionError("integrated_flux: need at least two grid points");
    const double dt = flux_series.times[1] - flux_series.times[0];
    TimeSeries ts;
    ts.times = flux_series.times;
    ts.label = "N_" + flux_series.label;
    ts.unit = Unit::photons;
    double acc = 0.0;
    for (double v : flux_series.values) {
        acc += v * dt;
        ts.values.push_back(acc);
    }
    return ts;
}

TimeSeries loop_integrated_statistics(const BinsRecord& rec, std::optional<Channel> ch) {
    if (rec.markovian)
        throw ContractViolation("loop_integrated_statistics: record has no delay loop");
    const Tensor op = ch ? bin_number_op(*ch, rec.params) : bin_total_number_op(rec.params);
    TimeSeries ts;
    ts.times = rec.times;
    ts.label = ch ? "N_loop_" + std::string(*ch == Channel::right ? "R" : "L") : "N_loop";
    ts.unit = Unit::photons;
    for (long k = 0; k <= rec.n_steps; ++k) {
        double acc = 0.0;
        for (long j : rec.loop_window(k))
            acc += real_expectation(rec.loop_bin_states[static_cast<size_t>(j)], op);
        ts.values.push_back(acc);
    }
    return ts;
}

TimeSeries quanta_conservation(const BinsRecord& rec) {
    const Tensor n_sys_op = sys_total_excitation(rec.params);
    const Tensor n_bin_op = bin_total_number_op(rec.params);

    TimeSeries ts;
    ts.times = rec.times;
    ts.label = "N_total";
    ts.unit = Unit::photons;

    std::vector<double> out_cumulative(static_cast<size_t>(rec.n_steps + 1), 0.0);
    for (long m = 0; m < rec.n_steps; ++m)
        out_cumulative[static_cast<size_t>(m + 1)] =
            out_cumulative[static_cast<size_t>(m)] +
            real_expectation(rec.output_field_states[static_cast<size_t>(m)], n_bin_op);

    for (long k = 0; k <= rec.n_steps; ++k) {
        double total = real_expectation(rec.system_states[static_cast<size_t>(k)], n_sys_op);
        total += out_cumulative[static_cast<size_t>(k)];
        if (!rec.markovian)
            for (long j : rec.loop_window(k))
                total += real_expectation(rec.loop_bin_states[static_cast<size_t>(j)], n_bin_op);
        ts.values.push_back(total);
    }
    return ts;
}

double entropy_of_spectrum(const SchmidtSpectrum& sp) {
    double total = 0.0;
    for (double v : sp.values) total += v * v;
    if (std::abs(total - 1.0) > 1e-6)
        throw NumericError("entropy: spectrum not square-normalized (sum " +
                           std::to_string(total) + ")");
    double s = 0.0;
    for (double v : sp.values) {
        const double p = v * v;
        if (p > 1e-15) s -= p * std::log2(p);
    }
    return s;
}

TimeSeries entanglement(std::span<const SchmidtSpectrum> spectra,
                        const std::vector<double>& times, const std::string& label) {
    if (spectra.size() != times.size())
        throw DimensionError("entanglement: one time per spectrum");
    TimeSeries ts;
    ts.times = times;
    ts.label = label;
    ts.unit = Unit::dimensionless;
    for (const auto& sp : spectra) ts.values.push_back(entropy_of_spectrum(sp));
    return ts;
}

} // namespace wqed
