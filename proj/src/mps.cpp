#include "wqed/mps.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <Eigen/Eigenvalues>

namespace wqed {

namespace {

Tensor scale_rows(const Tensor& t, const std::vector<double>& s) {
    // t is (k, n); row i multiplied by s[i]
    Tensor out = t;
    const long k = t.extent(0), n = t.extent(1);
    for (long i = 0; i < k; ++i)
        for (long j = 0; j < n; ++j)
            out[i * n + j] *= s[static_cast<size_t>(i)];
    return out;
}

Tensor scale_cols(const Tensor& t, const std::vector<double>& s) {
    // t is (m, k); column j multiplied by s[j]
    Tensor out = t;
    const long m = t.extent(0), k = t.extent(1);
    for (long i = 0; i < m; ++i)
        for (long j = 0; j < k; ++j)
            out[i * k + j] *= s[static_cast<size_t>(j)];
    return out;
}

std::vector<double> normalized_spectrum(std::vector<double> v) {
    double tot = 0.0;
    for (double x : v) tot += x * x;
    if (tot > 0.0) {
        const double inv = 1.0 / std::sqrt(tot);
        for (double& x : v) x *= inv;
    }
    return v;
}

} // namespace

Mps::Mps(std::vector<SiteTensor> sites, int oc, long bond_max, double cutoff)
    : sites_(std::move(sites)), oc_(oc), bond_max_(bond_max), cutoff_(cutoff) {
    if (sites_.empty()) throw DimensionError("Mps: empty chain");
    if (bond_max_ < 1) throw ContractViolation("Mps: bond_max must be >= 1");
    if (oc_ < 0 || oc_ >= static_cast<int>(sites_.size()))
        throw DimensionError("Mps: orthogonality center out of range");
    for (size_t k = 0; k < sites_.size(); ++k) {
        if (sites_[k].data.rank() != 3)
            throw DimensionError("Mps: site tensors must be rank-3");
        if (k + 1 < sites_.size() &&
            sites_[k].right_bond() != sites_[k + 1].left_bond())
            throw DimensionError("Mps: adjacent bond extents disagree at site " +
                                 std::to_string(k));
        stats_.peak_bond = std::max(stats_.peak_bond, sites_[k].right_bond());
    }
    if (sites_.front().left_bond() != 1 || sites_.back().right_bond() != 1)
        throw DimensionError("Mps: outer bonds must have extent 1");
}

void Mps::check_site(long k) const {
    if (k < 0 || k >= num_sites())
        throw DimensionError("Mps: site index " + std::to_string(k) + " out of range");
}

SvdResult Mps::split(const Tensor& theta, long rows, long cols) {
    SvdResult r = svd_truncate(theta.reshaped({rows, cols}), bond_max_, cutoff_, true);
    stats_.discarded += r.discarded_weight;
    step_discarded_ += r.discarded_weight;
    stats_.peak_bond = std::max(stats_.peak_bond,
                                static_cast<long>(r.singular_values.size()));
    return r;
}

// Gauge moves factor the orthogonality center through with a thin QR;
// that is exact (no truncation) and never grows a bond.
void Mps::move_oc_right_once() {
    SiteTensor& s = sites_[static_cast<size_t>(oc_)];
    const long l = s.left_bond(), d = s.phys(), r = s.right_bond();
    const long k = std::min(l * d, r);
    const Matrix m = s.data.to_matrix(l * d, r);
    Eigen::HouseholderQR<Matrix> qr(m);
    const Matrix q = qr.householderQ() * Matrix::Identity(l * d, k);
    const Matrix carry = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    s.data = Tensor::from_matrix(q).reshaped({l, d, k});
    SiteTensor& nxt = sites_[static_cast<size_t>(oc_ + 1)];
    nxt.data = contract(Tensor::from_matrix(carry), nxt.data, {{1, 0}});
    ++oc_;
}

void Mps::move_oc_left_once() {
    SiteTensor& s = sites_[static_cast<size_t>(oc_)];
    const long l = s.left_bond(), d = s.phys(), r = s.right_bond();
    const long k = std::min(l, d * r);
    const Matrix m = s.data.to_matrix(l, d * r);
    Eigen::HouseholderQR<Matrix> qr(m.adjoint());
    const Matrix q = qr.householderQ() * Matrix::Identity(d * r, k);
    const Matrix carry_t = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    s.data = Tensor::from_matrix(q.adjoint()).reshaped({k, d, r});
    SiteTensor& prv = sites_[static_cast<size_t>(oc_ - 1)];
    prv.data = contract(prv.data, Tensor::from_matrix(carry_t.adjoint()), {{2, 0}});
    --oc_;
}

void Mps::move_oc(long target) {
    check_site(target);
    while (oc_ < target) move_oc_right_once();
    while (oc_ > target) move_oc_left_once();
}

void Mps::swap_adjacent(long k, OcSide keep) {
    check_site(k);
    check_site(k + 1);
    if (oc_ != k && oc_ != k + 1)
        throw ContractViolation("swap_adjacent: OC must sit on one of the swapped sites");

    SiteTensor& a = sites_[static_cast<size_t>(k)];
    SiteTensor& b = sites_[static_cast<size_t>(k + 1)];
    const long l = a.left_bond(), d1 = a.phys(), d2 = b.phys(), r = b.right_bond();

    Tensor theta = contract(a.data, b.data, {{2, 0}});  // (l, d1, d2, r)
    theta = theta.permuted({0, 2, 1, 3});               // (l, d2, d1, r)
    SvdResult f = split(theta, l * d2, d1 * r);
    const long kk = static_cast<long>(f.singular_values.size());

    std::swap(a.kind, b.kind);
    std::swap(a.time_index, b.time_index);
    if (keep == OcSide::left) {
        a.data = scale_cols(f.left, f.singular_values).reshaped({l, d2, kk});
        b.data = f.right.reshaped({kk, d1, r});
        oc_ = static_cast<int>(k);
    } else {
        a.data = f.left.reshaped({l, d2, kk});
        b.data = scale_rows(f.right, f.singular_values).reshaped({kk, d1, r});
        oc_ = static_cast<int>(k + 1);
    }
}

Mps::WindowResult Mps::apply_gate_window(const Tensor* gate, long first, long n,
                                         const std::vector<long>& out_order, long oc_slot,
                                         const ApplyGateOptions& opts) {
    if (n < 1 || first < 0 || first + n > num_sites())
        throw DimensionError("apply_gate_window: window out of range");
    if (static_cast<long>(out_order.size()) != n)
        throw DimensionError("apply_gate_window: out_order size mismatch");
    if (oc_slot < 0 || oc_slot >= n)
        throw DimensionError("apply_gate_window: oc_slot out of range");

    // gauge the OC into the window
    if (oc_ < first) move_oc(first);
    if (oc_ >= first + n) move_oc(first + n - 1);

    long p = 1;
    for (long k = 0; k < n; ++k) p *= sites_[static_cast<size_t>(first + k)].phys();

    if (gate) {
        if (gate->rank() != 2 || gate->extent(0) != p || gate->extent(1) != p)
            throw DimensionError("apply_gate_window: gate extent does not match window (" +
                                 std::to_string(p) + ")");
        if (opts.strict_unitary) {
            const Matrix g = gate->to_matrix();
            const double dev = (g.adjoint() * g - Matrix::Identity(p, p)).norm() /
                               std::sqrt(static_cast<double>(p));
            if (dev > opts.unitary_tol)
                throw ContractViolation("apply_gate_window: gate is not unitary (deviation " +
                                        std::to_string(dev) + ")");
        }
    }

    // contract the window
    Tensor theta = sites_[static_cast<size_t>(first)].data;
    for (long k = 1; k < n; ++k)
        theta = contract(theta, sites_[static_cast<size_t>(first + k)].data,
                         {{theta.rank() - 1, 0}});
    const long l = theta.extent(0);
    const long r = theta.extent(theta.rank() - 1);

    if (gate) {
        Tensor flat = theta.reshaped({l, p, r});
        Tensor prod = contract(*gate, flat, {{1, 1}});  // (p_out, l, r)
        theta = prod.permuted({1, 0, 2});
    } else {
        theta = theta.reshaped({l, p, r});
    }

    // emit physical legs in the requested order
    std::vector<long> dims_in(static_cast<size_t>(n));
    std::vector<SiteKind> kind_in(static_cast<size_t>(n));
    std::vector<int> tidx_in(static_cast<size_t>(n));
    for (long k = 0; k < n; ++k) {
        dims_in[static_cast<size_t>(k)] = sites_[static_cast<size_t>(first + k)].phys();
        kind_in[static_cast<size_t>(k)] = sites_[static_cast<size_t>(first + k)].kind;
        tidx_in[static_cast<size_t>(k)] = sites_[static_cast<size_t>(first + k)].time_index;
    }
    std::vector<long> shape = {l};
    for (long k = 0; k < n; ++k) shape.push_back(dims_in[static_cast<size_t>(k)]);
    shape.push_back(r);
    theta = theta.reshaped(shape);

    std::vector<long> perm = {0};
    for (long k = 0; k < n; ++k) perm.push_back(1 + out_order[static_cast<size_t>(k)]);
    perm.push_back(n + 1);
    theta = theta.permuted(perm);

    std::vector<long> dims(static_cast<size_t>(n));
    for (long k = 0; k < n; ++k)
        dims[static_cast<size_t>(k)] = dims_in[static_cast<size_t>(out_order[static_cast<size_t>(k)])];

    WindowResult res;
    res.oc_snapshots.resize(static_cast<size_t>(n));
    res.cut_values.resize(static_cast<size_t>(std::max<long>(0, n - 1)));

    std::vector<Tensor> out_sites(static_cast<size_t>(n));

    // peel left-normalized sites up to the OC slot
    long a = l;
    long rest = theta.size() / a;
    for (long k = 0; k < oc_slot; ++k) {
        const long d = dims[static_cast<size_t>(k)];
        SvdResult f = split(theta, a * d, rest / d);
        const long kk = static_cast<long>(f.singular_values.size());
        out_sites[static_cast<size_t>(k)] = f.left.reshaped({a, d, kk});
        res.oc_snapshots[static_cast<size_t>(k)] =
            scale_cols(f.left, f.singular_values).reshaped({a, d, kk});
        res.cut_values[static_cast<size_t>(k)] = normalized_spectrum(f.singular_values);
        theta = scale_rows(f.right, f.singular_values);
        a = kk;
        rest = theta.size() / a;
    }

    // peel right-normalized sites down to the OC slot
    long b = r;
    for (long k = n - 1; k > oc_slot; --k) {
        const long d = dims[static_cast<size_t>(k)];
        const long rows = theta.size() / (d * b);
        SvdResult f = split(theta, rows, d * b);
        const long kk = static_cast<long>(f.singular_values.size());
        out_sites[static_cast<size_t>(k)] = f.right.reshaped({kk, d, b});
        res.oc_snapshots[static_cast<size_t>(k)] =
            scale_rows(f.right, f.singular_values).reshaped({kk, d, b});
        res.cut_values[static_cast<size_t>(k - 1)] = normalized_spectrum(f.singular_values);
        theta = scale_cols(f.left, f.singular_values);
        b = kk;
    }

    out_sites[static_cast<size_t>(oc_slot)] =
        theta.reshaped({a, dims[static_cast<size_t>(oc_slot)], b});
    res.oc_snapshots[static_cast<size_t>(oc_slot)] = out_sites[static_cast<size_t>(oc_slot)];

    for (long k = 0; k < n; ++k) {
        SiteTensor& s = sites_[static_cast<size_t>(first + k)];
        s.data = std::move(out_sites[static_cast<size_t>(k)]);
        s.kind = kind_in[static_cast<size_t>(out_order[static_cast<size_t>(k)])];
        s.time_index = tidx_in[static_cast<size_t>(out_order[static_cast<size_t>(k)])];
    }
    oc_ = static_cast<int>(first + oc_slot);
    return res;
}

void Mps::apply_gate(const Tensor& gate, long first, long n,
                     const ApplyGateOptions& opts) {
    std::vector<long> order(static_cast<size_t>(n));
    for (long k = 0; k < n; ++k) order[static_cast<size_t>(k)] = k;
    long oc_slot = 0;
    for (long k = 0; k < n; ++k)
        if (sites_[static_cast<size_t>(first + k)].kind == SiteKind::system) {
            oc_slot = k;
            break;
        }
    apply_gate_window(&gate, first, n, order, oc_slot, opts);
}

Complex Mps::expectation_local(const Tensor& op, long site) {
    check_site(site);
    const long d = sites_[static_cast<size_t>(site)].phys();
    if (op.rank() != 2 || op.extent(0) != d || op.extent(1) != d)
        throw DimensionError("expectation_local: operator extent mismatch");
    move_oc(site);
    const Tensor& A = sites_[static_cast<size_t>(site)].data;
    Tensor applied = contract(op, A, {{1, 1}});  // (i, l, r)
    Tensor val = contract(A.conjugated(), applied, {{0, 1}, {1, 0}, {2, 2}});
    return val[0];
}

SchmidtSpectrum Mps::schmidt_at_cut(long bond) {
    if (bond < 0 || bond > num_sites())
        throw DimensionError("schmidt_at_cut: bond out of range");
    SchmidtSpectrum sp;
    if (bond == 0 || bond == num_sites()) {
        sp.values = {1.0};
        return sp;
    }
    move_oc(bond);
    const SiteTensor& s = sites_[static_cast<size_t>(bond)];
    SvdResult f = svd_truncate(s.data.reshaped({s.left_bond(), s.phys() * s.right_bond()}),
                               std::max(s.left_bond(), s.phys() * s.right_bond()), 0.0, false);
    sp.values = normalized_spectrum(f.singular_values);
    return sp;
}

SchmidtSpectrum Mps::schmidt_single_site(long site) {
    check_site(site);
    move_oc(site);
    const Tensor& A = sites_[static_cast<size_t>(site)].data;
    Tensor rho_t = contract(A, A.conjugated(), {{0, 0}, {2, 2}});  // (i, j)
    Matrix rho = rho_t.to_matrix();
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()));
    if (es.info() != Eigen::Success)
        throw NumericError("schmidt_single_site: eigendecomposition failed");
    std::vector<double> vals;
    for (long i = es.eigenvalues().size() - 1; i >= 0; --i)
        vals.push_back(std::sqrt(std::max(0.0, es.eigenvalues()(i))));
    SchmidtSpectrum sp;
    sp.values = normalized_spectrum(std::move(vals));
    return sp;
}

double Mps::norm() const {
    return sites_[static_cast<size_t>(oc_)].data.frobenius_norm();
}

void Mps::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw NumericError("Mps::save: cannot open " + path);
    const char magic[8] = {'W', 'Q', 'E', 'D', 'M', 'P', 'S', '1'};
    os.write(magic, 8);
    auto w64 = [&os](int64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); };
    auto wf = [&os](double v) { os.write(reinterpret_cast<const char*>(&v), 8); };
    w64(num_sites());
    w64(oc_);
    w64(bond_max_);
    wf(cutoff_);
    for (const auto& s : sites_) {
        w64(s.kind == SiteKind::system ? 0 : 1);
        w64(s.time_index);
        w64(s.left_bond());
        w64(s.phys());
        w64(s.right_bond());
        for (const auto& v : s.data.data()) {
            wf(v.real());
            wf(v.imag());
        }
    }
    if (!os) throw NumericError("Mps::save: write failed for " + path);
}

Mps Mps::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw NumericError("Mps::load: cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, "WQEDMPS1", 8) != 0)
        throw NumericError("Mps::load: bad header in " + path);
    auto r64 = [&is]() {
        int64_t v = 0;
        is.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };
    auto rf = [&is]() {
        double v = 0;
        is.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };
    const int64_t n = r64();
    const int64_t oc = r64();
    const int64_t bond_max = r64();
    const double cutoff = rf();
    std::vector<SiteTensor> sites;
    for (int64_t k = 0; k < n; ++k) {
        SiteTensor s;
        s.kind = r64() == 0 ? SiteKind::system : SiteKind::time_bin;
        s.time_index = static_cast<int>(r64());
        const long l = r64(), d = r64(), r = r64();
        Tensor t({l, d, r});
        for (long i = 0; i < t.size(); ++i) {
            const double re = rf(), im = rf();
            t[i] = Complex(re, im);
        }
        s.data = std::move(t);
        sites.push_back(std::move(s));
    }
    if (!is) throw NumericError("Mps::load: truncated file " + path);
    return Mps(std::move(sites), static_cast<int>(oc), bond_max, cutoff);
}

Complex global_overlap(const Mps& a, const Mps& b) {
    if (a.num_sites() != b.num_sites())
        throw DimensionError("global_overlap: chain lengths differ");
    Tensor env({1, 1});
    env[0] = 1.0;
    for (long k = 0; k < a.num_sites(); ++k) {
        if (a.site(k).phys() != b.site(k).phys())
            throw DimensionError("global_overlap: physical extents differ at site " +
                                 std::to_string(k));
        Tensor t = contract(env, b.site(k).data, {{1, 0}});          // (la, i, rb)
        env = contract(a.site(k).data.conjugated(), t, {{0, 0}, {1, 1}});  // (ra, rb)
    }
    return env[0];
}

} // namespace wqed
