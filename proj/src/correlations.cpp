#include "wqed/correlations.hpp"

#include <algorithm>
#include <cmath>

#include "wqed/observables.hpp"

namespace wqed {

namespace {

Tensor op_product(const Tensor& a, const Tensor& b) {
    return Tensor::from_matrix(a.to_matrix() * b.to_matrix());
}

// Transfer-matrix sweeps over the final chain. Environments are indexed
// (ket bond, bra bond); renv[m] contracts sites m..end with no operators.
struct TransferEngine {
    const Mps& psi;
    std::vector<Tensor> renv;

    explicit TransferEngine(const Mps& chain) : psi(chain) {
        const long L = psi.num_sites();
        renv.resize(static_cast<size_t>(L + 1));
        Tensor unit({1, 1});
        unit[0] = 1.0;
        renv[static_cast<size_t>(L)] = unit;
        for (long m = L - 1; m >= 0; --m) {
            const Tensor& A = psi.site(m).data;
            Tensor t = contract(A, renv[static_cast<size_t>(m + 1)], {{2, 0}});
            renv[static_cast<size_t>(m)] =
                contract(t, A.conjugated(), {{1, 1}, {2, 2}});
        }
    }

    Tensor plain(const Tensor& env, long site) const {
        const Tensor& A = psi.site(site).data;
        Tensor t = contract(env, A, {{0, 0}});  // (lb, i, rk)
        return contract(t, A.conjugated(), {{0, 0}, {1, 1}});  // (rk, rb)
    }

    Tensor with_op(const Tensor& env, const Tensor& op, long site) const {
        const Tensor& A = psi.site(site).data;
        Tensor t = contract(env, A, {{0, 0}});       // (lb, j, rk)
        Tensor t2 = contract(op, t, {{1, 1}});       // (i, lb, rk)
        return contract(t2, A.conjugated(), {{0, 1}, {1, 0}});  // (rk, rb)
    }

    Complex close(const Tensor& env, long site_after) const {
        return contract(env, renv[static_cast<size_t>(site_after)], {{0, 0}, {1, 1}})[0];
    }
};

void check_bin_op(const BinsRecord& rec, const Tensor& op, const char* what) {
    const long d = rec.params.bin_extent();
    if (op.rank() != 2 || op.extent(0) != d || op.extent(1) != d)
        throw DimensionError(std::string(what) + ": operator extent does not match bins");
}

CorrelationGrid correlation_grid_impl(const BinsRecord& rec, const Tensor& op_early,
                                      const Tensor& op_late, const Tensor& op_diag,
                                      double scale, CorrelationGrid::Kind kind) {
    check_bin_op(rec, op_early, "correlation grid");
    check_bin_op(rec, op_late, "correlation grid");
    const long m = rec.n_steps;
    if (m < 1) throw DimensionError("correlation grid: no finalized bins");

    TransferEngine eng(rec.final_state);

    CorrelationGrid grid;
    grid.kind = kind;
    grid.t_values.resize(static_cast<size_t>(m));
    grid.tprime_values.resize(static_cast<size_t>(m));
    for (long k = 0; k < m; ++k) {
        grid.t_values[static_cast<size_t>(k)] = static_cast<double>(k) * rec.params.delta_t;
        grid.tprime_values[static_cast<size_t>(k)] =
            static_cast<double>(k) * rec.params.delta_t;
    }
    grid.values = Eigen::MatrixXcd::Zero(m, m);
    grid.valid_cols.resize(static_cast<size_t>(m));

    Tensor env({1, 1});
    env[0] = 1.0;
    for (long j = 0; j < m; ++j) {
        grid.valid_cols[static_cast<size_t>(j)] = m - j;
        grid.values(j, 0) = scale * eng.close(eng.with_op(env, op_diag, j), j + 1);
        Tensor cur = eng.with_op(env, op_early, j);
        for (long l = j + 1; l < m; ++l) {
            grid.values(j, l - j) = scale * eng.close(eng.with_op(cur, op_late, l), l + 1);
            cur = eng.plain(cur, l);
        }
        env = eng.plain(env, j);
    }
    return grid;
}

Tensor adjoint_op(const Tensor& op) {
    return Tensor::from_matrix(op.to_matrix().adjoint());
}

std::vector<Complex> ss_row_impl(const BinsRecord& rec, const Tensor& op_early,
                                 const Tensor& op_late, const Tensor& op_diag,
                                 double scale, long j_ss, long count) {
    TransferEngine eng(rec.final_state);
    Tensor env({1, 1});
    env[0] = 1.0;
    for (long j = 0; j < j_ss; ++j) env = eng.plain(env, j);

    std::vector<Complex> vals(static_cast<size_t>(count));
    vals[0] = scale * eng.close(eng.with_op(env, op_diag, j_ss), j_ss + 1);
    Tensor cur = eng.with_op(env, op_early, j_ss);
    for (long l = j_ss + 1; l < j_ss + count; ++l) {
        vals[static_cast<size_t>(l - j_ss)] =
            scale * eng.close(eng.with_op(cur, op_late, l), l + 1);
        cur = eng.plain(cur, l);
    }
    return vals;
}

long ss_bin_index(const BinsRecord& rec, const SteadyStateOptions& opts, long& count) {
    const double t_ss = detect_steady_state(rec, opts);
    long j_ss = std::lround(t_ss / rec.params.delta_t);
    j_ss = std::min(j_ss, rec.n_steps - 1);
    count = rec.n_steps - j_ss;
    if (opts.span) {
        const long want = std::lround(*opts.span / rec.params.delta_t) + 1;
        count = std::min(count, want);
    }
    return j_ss;
}

} // namespace

CorrelationGrid correlation_2op_2t(const BinsRecord& rec, const Tensor& a_op,
                                   const Tensor& b_op) {
    return correlation_grid_impl(rec, a_op, b_op, op_product(a_op, b_op),
                                 1.0 / rec.params.delta_t, CorrelationGrid::Kind::generic);
}

CorrelationGrid correlation_4op_2t(const BinsRecord& rec, const Tensor& a_op,
                                   const Tensor& b_op, const Tensor& c_op,
                                   const Tensor& d_op) {
    const double dt = rec.params.delta_t;
    return correlation_grid_impl(rec, op_product(a_op, d_op), op_product(b_op, c_op),
                                 op_product(op_product(a_op, b_op), op_product(c_op, d_op)),
                                 1.0 / (dt * dt), CorrelationGrid::Kind::generic);
}

CorrelationGrid g1_grid(const BinsRecord& rec, Channel alpha, Channel alpha_prime) {
    const Tensor a = bin_annihilate_op(alpha, rec.params);
    const Tensor b = bin_annihilate_op(alpha_prime, rec.params);
    CorrelationGrid g = correlation_grid_impl(rec, adjoint_op(a), b,
                                              op_product(adjoint_op(a), b),
                                              1.0 / rec.params.delta_t,
                                              CorrelationGrid::Kind::g1);
    return g;
}

CorrelationGrid g2_grid(const BinsRecord& rec, Channel alpha, Channel alpha_prime) {
    const Tensor a = bin_annihilate_op(alpha, rec.params);
    const Tensor b = bin_annihilate_op(alpha_prime, rec.params);
    const Tensor adag = adjoint_op(a);
    const Tensor bdag = adjoint_op(b);
    const double dt = rec.params.delta_t;
    return correlation_grid_impl(rec, op_product(adag, a), op_product(bdag, b),
                                 op_product(op_product(adag, bdag), op_product(b, a)),
                                 1.0 / (dt * dt), CorrelationGrid::Kind::g2);
}

double detect_steady_state(const BinsRecord& rec, const SteadyStateOptions& opts) {
    if (opts.t_ss_override) return *opts.t_ss_override;
    const TimeSeries pop = [&rec] {
        const Tensor op = sys_total_excitation(rec.params);
        TimeSeries ts;
        ts.times = rec.times;
        for (const auto& s : rec.system_states)
            ts.values.push_back(snapshot_expectation(s, op).real());
        return ts;
    }();

    const double dt = rec.params.delta_t;
    const long w = std::max<long>(1, std::lround(opts.window / dt));
    const double t_last = static_cast<double>(rec.n_steps - 1) * dt;
    for (long k = w; k <= rec.n_steps; ++k) {
        double lo = pop.values[static_cast<size_t>(k)];
        double hi = lo;
        for (long j = k - w; j <= k; ++j) {
            lo = std::min(lo, pop.values[static_cast<size_t>(j)]);
            hi = std::max(hi, pop.values[static_cast<size_t>(j)]);
        }
        if (hi - lo < opts.tol) {
            const double t_ss = static_cast<double>(k) * dt;
            if (opts.span && t_ss + *opts.span > t_last)
                throw NumericError("steady state at t=" + std::to_string(t_ss) +
                                   " leaves no room for a correlation span of " +
                                   std::to_string(*opts.span));
            return t_ss;
        }
    }
    throw NumericError("steady state not reached before the end of the run");
}

SteadyStateCorrelation correlation_ss_2op(const BinsRecord& rec, const Tensor& a_op,
                                          const Tensor& b_op,
                                          const SteadyStateOptions& opts) {
    check_bin_op(rec, a_op, "correlation_ss_2op");
    check_bin_op(rec, b_op, "correlation_ss_2op");
    long count = 0;
    const long j_ss = ss_bin_index(rec, opts, count);
    SteadyStateCorrelation out;
    out.t_ss = static_cast<double>(j_ss) * rec.params.delta_t;
    out.values = ss_row_impl(rec, a_op, b_op, op_product(a_op, b_op),
                             1.0 / rec.params.delta_t, j_ss, count);
    for (long k = 0; k < count; ++k)
        out.t_primes.push_back(static_cast<double>(k) * rec.params.delta_t);
    return out;
}

SteadyStateCorrelation correlation_ss_4op(const BinsRecord& rec, const Tensor& a_op,
                                          const Tensor& b_op, const Tensor& c_op,
                                          const Tensor& d_op,
                                          const SteadyStateOptions& opts) {
    check_bin_op(rec, a_op, "correlation_ss_4op");
    long count = 0;
    const long j_ss = ss_bin_index(rec, opts, count);
    const double dt = rec.params.delta_t;
    SteadyStateCorrelation out;
    out.t_ss = static_cast<double>(j_ss) * dt;
    out.values = ss_row_impl(rec, op_product(a_op, d_op), op_product(b_op, c_op),
                             op_product(op_product(a_op, b_op), op_product(c_op, d_op)),
                             1.0 / (dt * dt), j_ss, count);
    for (long k = 0; k < count; ++k)
        out.t_primes.push_back(static_cast<double>(k) * dt);
    return out;
}

SteadyStateCorrelation g1_ss(const BinsRecord& rec, Channel ch,
                             const SteadyStateOptions& opts) {
    const Tensor a = bin_annihilate_op(ch, rec.params);
    return correlation_ss_2op(rec, adjoint_op(a), a, opts);
}

SteadyStateCorrelation g2_ss(const BinsRecord& rec, Channel ch,
                             const SteadyStateOptions& opts) {
    const Tensor a = bin_annihilate_op(ch, rec.params);
    return correlation_ss_4op(rec, adjoint_op(a), adjoint_op(a), a, a, opts);
}

std::vector<Complex> normalize_g(std::span<const Complex> correlation,
                                 double flux_at_tss, int order) {
    if (order != 1 && order != 2)
        throw ContractViolation("normalize_g: order must be 1 or 2");
    if (flux_at_tss <= 0.0)
        throw ContractViolation("normalize_g: flux must be positive");
    const double denom = order == 1 ? flux_at_tss : flux_at_tss * flux_at_tss;
    std::vector<Complex> out(correlation.begin(), correlation.end());
    for (auto& v : out) v /= denom;
    return out;
}

Spectrum spectrum_w(double delta_t, std::span<const Complex> g1_ss,
                    long pad_factor, Spectrum::Norm norm) {
    const long n = static_cast<long>(g1_ss.size());
    if (n < 1) throw DimensionError("spectrum_w: empty correlation input");
    if (pad_factor < 1) throw ContractViolation("spectrum_w: pad factor must be >= 1");
    const long npad = pad_factor * n;

    Spectrum s;
    s.omega_values.resize(static_cast<size_t>(npad));
    s.values.resize(static_cast<size_t>(npad));
    const double dw = 2.0 * std::numbers::pi / (static_cast<double>(npad) * delta_t);
    for (long j = 0; j < npad; ++j) {
        const double w = (static_cast<double>(j) - static_cast<double>(npad / 2)) * dw;
        s.omega_values[static_cast<size_t>(j)] = w;
        const Complex z = std::polar(1.0, w * delta_t);
        Complex phase = 1.0;
        Complex acc = 0.0;
        for (long k = 0; k < n; ++k) {
            acc += g1_ss[static_cast<size_t>(k)] * phase;
            phase *= z;
        }
        s.values[static_cast<size_t>(j)] = (acc * delta_t).real();
    }
    if (norm == Spectrum::Norm::max1) {
        const double mx = *std::max_element(s.values.begin(), s.values.end());
        if (mx > 0.0)
            for (auto& v : s.values) v /= mx;
        s.normalization = Spectrum::Norm::max1;
    }
    return s;
}

std::vector<long> spectrum_peaks(const Spectrum& s, double floor) {
    std::vector<long> peaks;
    const long n = static_cast<long>(s.values.size());
    if (n < 3) return peaks;
    const double mx = *std::max_element(s.values.begin(), s.values.end());
    for (long j = 1; j + 1 < n; ++j) {
        const double v = s.values[static_cast<size_t>(j)];
        if (v > s.values[static_cast<size_t>(j - 1)] &&
            v > s.values[static_cast<size_t>(j + 1)] && v > floor * mx)
            peaks.push_back(j);
    }
    return peaks;
}

TimeDependentSpectra time_dependent_spectrum(const CorrelationGrid& g1,
                                             double center_frequency_offset,
                                             long pad_factor) {
    const long m = static_cast<long>(g1.t_values.size());
    if (m < 4 || static_cast<long>(g1.tprime_values.size()) < 4)
        throw DimensionError("time_dependent_spectrum: grid too small (< 4 t' points)");
    const double dt = g1.tprime_values[1] - g1.tprime_values[0];
    const long npad = pad_factor * m;
    const double dw = 2.0 * std::numbers::pi / (static_cast<double>(npad) * dt);

    TimeDependentSpectra out;
    out.times = g1.t_values;
    out.omega_values.resize(static_cast<size_t>(npad));
    out.S = Eigen::MatrixXd::Zero(m, npad);
    out.I = Eigen::MatrixXd::Zero(m, npad);

    std::vector<Complex> pref(static_cast<size_t>(m));
    for (long j = 0; j < npad; ++j) {
        const double w = (static_cast<double>(j) - static_cast<double>(npad / 2)) * dw;
        out.omega_values[static_cast<size_t>(j)] = w + center_frequency_offset;
        const Complex z = std::polar(1.0, w * dt);

        // I(w, t): transform of the row at t, truncated at the grid edge
        for (long row = 0; row < m; ++row) {
            Complex phase = 1.0;
            Complex acc = 0.0;
            const long cols = g1.valid_cols[static_cast<size_t>(row)];
            for (long k = 0; k < cols; ++k) {
                acc += g1.values(row, k) * phase;
                phase *= z;
            }
            out.I(row, j) = (acc * dt).real();
        }

        // S(w, t): double integral over rows up to t and offsets up to t - t''
        // pref[row] accumulates the inner transform of row `row` up to the
        // current outer time index
        std::fill(pref.begin(), pref.end(), Complex(0.0));
        std::vector<Complex> phases(static_cast<size_t>(m));
        {
            Complex phase = 1.0;
            for (long k = 0; k < m; ++k) {
                phases[static_cast<size_t>(k)] = phase;
                phase *= z;
            }
        }
        double outer = 0.0;
        for (long t_idx = 0; t_idx < m; ++t_idx) {
            for (long row = 0; row <= t_idx; ++row) {
                const long k = t_idx - row;
                if (k < g1.valid_cols[static_cast<size_t>(row)])
                    pref[static_cast<size_t>(row)] +=
                        g1.values(row, k) * phases[static_cast<size_t>(k)];
            }
            outer = 0.0;
            for (long row = 0; row <= t_idx; ++row)
                outer += (pref[static_cast<size_t>(row)] * dt).real();
            out.S(t_idx, j) = outer * dt;
        }
    }
    return out;
}

} // namespace wqed
