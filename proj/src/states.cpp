#include "wqed/states.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace wqed {

namespace {

SiteTensor product_site(const Vector& amplitudes, SiteKind kind, int time_index) {
    SiteTensor s;
    Tensor t({1, amplitudes.size(), 1});
    for (long i = 0; i < amplitudes.size(); ++i) t[i] = amplitudes(i);
    s.data = std::move(t);
    s.kind = kind;
    s.time_index = time_index;
    return s;
}

// Right-canonicalize a raw chain and rescale to unit norm.
void right_normalize(std::vector<SiteTensor>& chain) {
    for (long k = static_cast<long>(chain.size()) - 1; k >= 1; --k) {
        SiteTensor& s = chain[static_cast<size_t>(k)];
        const long l = s.left_bond(), d = s.phys(), r = s.right_bond();
        SvdResult f = svd_truncate(s.data.reshaped({l, d * r}),
                                   std::max<long>(1, std::min(l, d * r)), 0.0, false);
        const long kk = static_cast<long>(f.singular_values.size());
        s.data = f.right.reshaped({kk, d, r});
        Tensor carry = f.left;  // (l, kk)
        for (long i = 0; i < l; ++i)
            for (long j = 0; j < kk; ++j)
                carry[i * kk + j] *= f.singular_values[static_cast<size_t>(j)];
        SiteTensor& prev = chain[static_cast<size_t>(k - 1)];
        prev.data = contract(prev.data, carry, {{2, 0}});
    }
    SiteTensor& head = chain.front();
    const double nrm = head.data.frobenius_norm();
    if (nrm <= 0.0) throw NumericError("right_normalize: zero-norm chain");
    head.data = head.data.scaled(1.0 / nrm);
}

} // namespace

SystemState tls_ground() {
    SystemState s;
    s.amplitudes = Vector::Zero(2);
    s.amplitudes(0) = 1.0;
    s.dims = {2};
    return s;
}

SystemState tls_excited() {
    SystemState s;
    s.amplitudes = Vector::Zero(2);
    s.amplitudes(1) = 1.0;
    s.dims = {2};
    return s;
}

SystemState system_kron(const SystemState& a, const SystemState& b) {
    SystemState s;
    s.amplitudes = Vector(a.amplitudes.size() * b.amplitudes.size());
    for (long i = 0; i < a.amplitudes.size(); ++i)
        for (long j = 0; j < b.amplitudes.size(); ++j)
            s.amplitudes(i * b.amplitudes.size() + j) = a.amplitudes(i) * b.amplitudes(j);
    s.dims = a.dims;
    s.dims.insert(s.dims.end(), b.dims.begin(), b.dims.end());
    return s;
}

SystemState entangled_pair(Complex c1, Complex c2) {
    const double nrm = std::norm(c1) + std::norm(c2);
    if (std::abs(nrm - 1.0) > 1e-10)
        throw ContractViolation("entangled_pair: |c1|^2 + |c2|^2 must equal 1");
    SystemState s;
    s.amplitudes = Vector::Zero(4);
    s.amplitudes(2) = c1;  // |e,g>
    s.amplitudes(1) = c2;  // |g,e>
    s.dims = {2, 2};
    return s;
}

Envelope normalize_pulse(Envelope env) {
    double tot = 0.0;
    for (const auto& f : env.samples) tot += std::norm(f);
    if (tot <= 0.0) throw NumericError("normalize_pulse: all-zero envelope");
    const double inv = 1.0 / std::sqrt(tot);
    for (auto& f : env.samples) f *= inv;
    return env;
}

Envelope gaussian_envelope(double t_c, double sigma, const SimParams& params) {
    if (sigma <= 0.0) throw ContractViolation("gaussian_envelope: sigma must be > 0");
    Envelope env;
    env.delta_t = params.delta_t;
    const long n = params.steps();
    env.samples.resize(static_cast<size_t>(n));
    for (long k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * params.delta_t;
        env.samples[static_cast<size_t>(k)] =
            std::exp(-(t - t_c) * (t - t_c) / (2.0 * sigma * sigma));
    }
    return normalize_pulse(std::move(env));
}

Envelope read_envelope_csv(const std::string& path, long expected_len, double delta_t) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open envelope file " + path);
    Envelope env;
    env.delta_t = delta_t;
    std::string line;
    long lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        double re = 0.0, im = 0.0;
        char comma = 0;
        if (!(ls >> re)) throw ConfigError(path + ":" + std::to_string(lineno) +
                                           ": expected 're,im'");
        if (ls >> comma) {
            if (comma != ',' || !(ls >> im))
                throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 're,im'");
        }
        env.samples.emplace_back(re, im);
    }
    if (static_cast<long>(env.samples.size()) != expected_len)
        throw ConfigError("envelope file " + path + " has " +
                          std::to_string(env.samples.size()) + " samples, expected " +
                          std::to_string(expected_len));
    return normalize_pulse(std::move(env));
}

std::vector<SiteTensor> vacuum(long n_bins, const SimParams& params) {
    if (n_bins < 1) throw ContractViolation("vacuum: need at least one bin");
    Vector v = Vector::Zero(params.bin_extent());
    v(0) = 1.0;
    std::vector<SiteTensor> chain;
    chain.reserve(static_cast<size_t>(n_bins));
    for (long k = 0; k < n_bins; ++k)
        chain.push_back(product_site(v, SiteKind::time_bin, static_cast<int>(k)));
    return chain;
}

std::vector<SiteTensor> fock_pulse(const Envelope& env, int n_photons,
                                   Channel direction, const SimParams& params) {
    const long m = static_cast<long>(env.samples.size());
    if (m < 2) throw ContractViolation("fock_pulse: envelope must cover at least two bins");
    if (n_photons != 1 && n_photons != 2)
        throw ContractViolation("fock_pulse: only 1- and 2-photon pulses are supported");
    const long ch = static_cast<long>(direction);
    if (ch >= static_cast<long>(params.d_t.size()))
        throw DimensionError("fock_pulse: channel out of range");
    const long d = params.d_t[static_cast<size_t>(ch)];
    if (n_photons == 2 && d < 3)
        throw ContractViolation("fock_pulse: a 2-photon pulse needs channel extent >= 3");

    const long bond = n_photons + 1;

    // per-bin tensors of the pulse channel, indexed [occupation](bond, bond)
    auto channel_tensor = [&](long k) {
        const Complex f = env.samples[static_cast<size_t>(k)];
        std::vector<Matrix> a(static_cast<size_t>(d), Matrix::Zero(bond, bond));
        if (n_photons == 1) {
            a[0] = Matrix::Identity(bond, bond);
            a[1](0, 1) = f;
        } else {
            a[0] = Matrix::Identity(bond, bond);
            a[1](0, 1) = std::sqrt(2.0) * f;
            a[1](1, 2) = std::sqrt(2.0) * f;
            if (d > 2) a[2](0, 2) = std::sqrt(2.0) * f * f;
        }
        return a;
    };

    std::vector<SiteTensor> chain;
    chain.reserve(static_cast<size_t>(m));
    const long db = params.bin_extent();

    for (long k = 0; k < m; ++k) {
        const auto a = channel_tensor(k);
        const long lb = k == 0 ? 1 : bond;
        const long rb = k == m - 1 ? 1 : bond;
        Tensor t({lb, db, rb});
        // embed the pulse channel; all other channels stay in their ground level
        std::vector<long> strides(params.d_t.size(), 1);
        for (long c = static_cast<long>(params.d_t.size()) - 2; c >= 0; --c)
            strides[static_cast<size_t>(c)] = strides[static_cast<size_t>(c + 1)] *
                                              params.d_t[static_cast<size_t>(c + 1)];
        for (long occ = 0; occ < d; ++occ) {
            const long phys = occ * strides[static_cast<size_t>(ch)];
            for (long i = 0; i < lb; ++i)
                for (long j = 0; j < rb; ++j) {
                    // boundary rows/columns: first bin keeps bond row 0,
                    // last bin keeps bond column `bond - 1`
                    const long bi = k == 0 ? 0 : i;
                    const long bj = k == m - 1 ? bond - 1 : j;
                    t.at({i, phys, j}) = a[static_cast<size_t>(occ)](bi, bj);
                }
        }
        SiteTensor s;
        s.data = std::move(t);
        s.kind = SiteKind::time_bin;
        s.time_index = static_cast<int>(k);
        chain.push_back(std::move(s));
    }

    right_normalize(chain);
    return chain;
}

} // namespace wqed
