#include "wqed/model.hpp"

#include <cmath>
#include <numbers>

namespace wqed {

namespace {

Matrix ladder(long d) {
    Matrix a = Matrix::Zero(d, d);
    for (long n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

Matrix sigma_plus() {
    Matrix m = Matrix::Zero(2, 2);
    m(1, 0) = 1.0;  // basis order (ground, excited)
    return m;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (long i = 0; i < a.rows(); ++i)
        for (long j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Matrix kron3(const Matrix& a, const Matrix& b, const Matrix& c) {
    return kron(kron(a, b), c);
}

// channel operator embedded in the bin space (row-major over channels)
Matrix channel_op(const Matrix& op, long channel, const std::vector<long>& d_t) {
    Matrix out = Matrix::Identity(1, 1);
    for (size_t c = 0; c < d_t.size(); ++c) {
        const long d = d_t[c];
        out = kron(out, static_cast<long>(c) == channel ? op : Matrix::Identity(d, d));
    }
    return out;
}

Matrix emitter_op(const Matrix& op, long emitter, const std::vector<long>& d_sys) {
    Matrix out = Matrix::Identity(1, 1);
    for (size_t e = 0; e < d_sys.size(); ++e) {
        const long d = d_sys[e];
        out = kron(out, static_cast<long>(e) == emitter ? op : Matrix::Identity(d, d));
    }
    return out;
}

void require_channels(const SimParams& p, size_t n, const char* what) {
    if (p.d_t.size() != n)
        throw DimensionError(std::string(what) + ": expected " + std::to_string(n) +
                             " field channel(s), got " + std::to_string(p.d_t.size()));
}

void require_emitters(const SimParams& p, size_t n, const char* what) {
    if (p.d_sys.size() != n || p.gamma_l.size() != n || p.gamma_r.size() != n)
        throw DimensionError(std::string(what) + ": expected " + std::to_string(n) +
                             " emitter(s)");
}

// system-only part of the per-step generator: pump + detuning
Matrix system_generator(const SimParams& p, const PumpSpec& pump, long step) {
    Matrix h = Matrix::Zero(p.sys_extent(), p.sys_extent());
    const double om = pump.at(step);
    for (size_t e = 0; e < p.d_sys.size(); ++e) {
        const Matrix sp = emitter_op(sigma_plus(), static_cast<long>(e), p.d_sys);
        const Matrix sm = sp.adjoint();
        h += om * p.delta_t * (sp + sm);
        h += p.detuning * p.delta_t * (sp * sm);
    }
    return h;
}

} // namespace

long SimParams::steps() const {
    return std::lround(t_max / delta_t);
}

long SimParams::delay_steps() const {
    const double ratio = tau / delta_t;
    const long d = std::lround(ratio);
    if (std::abs(ratio - static_cast<double>(d)) > 1e-9)
        throw ContractViolation("tau must be an integral multiple of delta_t (tau/delta_t = " +
                                std::to_string(ratio) + ")");
    return d;
}

long SimParams::bin_extent() const {
    long p = 1;
    for (long d : d_t) p *= d;
    return p;
}

long SimParams::sys_extent() const {
    long p = 1;
    for (long d : d_sys) p *= d;
    return p;
}

void SimParams::validate() const {
    if (delta_t <= 0.0) throw ContractViolation("delta_t must be positive");
    if (t_max <= 0.0) throw ContractViolation("t_max must be positive");
    if (bond_max < 1) throw ContractViolation("bond_max must be >= 1");
    if (cutoff < 0.0) throw ContractViolation("cutoff must be >= 0");
    if (tau < 0.0) throw ContractViolation("tau must be >= 0");
    (void)delay_steps();
    for (long d : d_sys)
        if (d < 2) throw ContractViolation("emitter extents must be >= 2");
    for (long d : d_t)
        if (d < 2) throw ContractViolation("bin channel extents must be >= 2");
    if (gamma_l.size() != d_sys.size() || gamma_r.size() != d_sys.size())
        throw DimensionError("per-emitter rate lists must match d_sys");
    for (double g : gamma_l)
        if (g < 0.0) throw ContractViolation("decay rates must be >= 0");
    for (double g : gamma_r)
        if (g < 0.0) throw ContractViolation("decay rates must be >= 0");
}

std::pair<double, double> symmetric_coupling(double gamma) {
    return {gamma / 2.0, gamma / 2.0};
}

std::pair<double, double> chiral_coupling(double gamma, Channel direction) {
    if (direction == Channel::right) return {0.0, gamma};
    return {gamma, 0.0};
}

PumpSpec PumpSpec::cw(double omega) {
    PumpSpec p;
    p.kind = Kind::cw;
    p.omega = omega;
    return p;
}

PumpSpec PumpSpec::from_samples(std::vector<double> samples) {
    PumpSpec p;
    p.kind = Kind::envelope;
    p.samples = std::move(samples);
    return p;
}

double PumpSpec::at(long step) const {
    switch (kind) {
        case Kind::none: return 0.0;
        case Kind::cw: return omega;
        case Kind::envelope:
            if (step < 0 || step >= static_cast<long>(samples.size()))
                throw DimensionError("pump envelope does not cover step " +
                                     std::to_string(step));
            return samples[static_cast<size_t>(step)];
    }
    return 0.0;
}

std::vector<double> gaussian_pulse_area(double area, double t_c, double sigma,
                                        const SimParams& params) {
    if (sigma <= 0.0) throw ContractViolation("gaussian_pulse_area: sigma must be > 0");
    const long n = params.steps();
    std::vector<double> samples(static_cast<size_t>(n));
    const double peak = area / (sigma * std::sqrt(2.0 * std::numbers::pi));
    for (long k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * params.delta_t;
        samples[static_cast<size_t>(k)] =
            peak * std::exp(-(t - t_c) * (t - t_c) / (2.0 * sigma * sigma));
    }
    return samples;
}

NoiseOps noise_operators(long d_t, double delta_t) {
    if (d_t < 2) throw ContractViolation("noise_operators: channel extent must be >= 2");
    const Matrix a = std::sqrt(delta_t) * ladder(d_t);
    NoiseOps ops;
    ops.annihilate = Tensor::from_matrix(a);
    ops.number = Tensor::from_matrix(a.adjoint() * a);
    return ops;
}

GateSequence::GateSequence(int arity, std::vector<long> dims, bool time_dependent,
                           std::function<Tensor(long)> generator)
    : arity_(arity), dims_(std::move(dims)), time_dependent_(time_dependent),
      generator_(std::move(generator)) {}

const StepPropagator& GateSequence::propagator(long step) const {
    const long key = time_dependent_ ? step : 0;
    if (!cached_ || cached_step_ != key) {
        cached_ = build_propagator(generator_(step), arity_, dims_);
        cached_step_ = key;
    }
    return *cached_;
}

StepPropagator build_propagator(const Tensor& generator, int arity,
                                std::vector<long> dims) {
    StepPropagator sp;
    sp.gate = matrix_exponential_unitary(generator);
    sp.arity = arity;
    sp.dims = std::move(dims);
    return sp;
}

GateSequence hamiltonian_1tls(const SimParams& params, const PumpSpec& pump) {
    params.validate();
    require_channels(params, 2, "hamiltonian_1tls");
    require_emitters(params, 1, "hamiltonian_1tls");
    const SimParams p = params;
    const PumpSpec pu = pump;
    const bool tdep = pu.kind == PumpSpec::Kind::envelope;
    auto gen = [p, pu](long step) {
        const long db = p.bin_extent();
        const Matrix sp = sigma_plus();
        const Matrix sm = sp.adjoint();
        const Matrix ib = Matrix::Identity(db, db);
        const Matrix a_r = channel_op(ladder(p.d_t[0]), 0, p.d_t);
        const Matrix a_l = channel_op(ladder(p.d_t[1]), 1, p.d_t);
        Matrix h = kron(system_generator(p, pu, step), ib);
        const double cr = std::sqrt(p.gamma_r[0] * p.delta_t);
        const double cl = std::sqrt(p.gamma_l[0] * p.delta_t);
        h += cr * (kron(sp, a_r) + kron(sm, a_r.adjoint()));
        h += cl * (kron(sp, a_l) + kron(sm, a_l.adjoint()));
        return Tensor::from_matrix(h);
    };
    return GateSequence(2, {params.sys_extent(), params.bin_extent()}, tdep, gen);
}

GateSequence hamiltonian_1tls_feedback(const SimParams& params, const PumpSpec& pump) {
    params.validate();
    require_channels(params, 1, "hamiltonian_1tls_feedback");
    require_emitters(params, 1, "hamiltonian_1tls_feedback");
    if (params.delay_steps() < 1)
        throw ContractViolation("hamiltonian_1tls_feedback: tau must be positive");
    const SimParams p = params;
    const PumpSpec pu = pump;
    const bool tdep = pu.kind == PumpSpec::Kind::envelope;
    auto gen = [p, pu](long step) {
        const long db = p.bin_extent();
        const Matrix sp = sigma_plus();
        const Matrix sm = sp.adjoint();
        const Matrix ib = Matrix::Identity(db, db);
        const Matrix a = ladder(p.d_t[0]);
        const Complex phase = std::polar(1.0, p.phi);
        Matrix h = kron3(system_generator(p, pu, step), ib, ib);
        const double cr = std::sqrt(p.gamma_r[0] * p.delta_t);
        const double cl = std::sqrt(p.gamma_l[0] * p.delta_t);
        h += cr * (kron3(sp, a, ib) + kron3(sm, a.adjoint(), ib));
        h += cl * (phase * kron3(sp, ib, a) + std::conj(phase) * kron3(sm, ib, a.adjoint()));
        return Tensor::from_matrix(h);
    };
    return GateSequence(3, {params.sys_extent(), params.bin_extent(), params.bin_extent()},
                        tdep, gen);
}

GateSequence hamiltonian_2tls_mar(const SimParams& params, const PumpSpec& pump) {
    params.validate();
    require_channels(params, 2, "hamiltonian_2tls_mar");
    require_emitters(params, 2, "hamiltonian_2tls_mar");
    const SimParams p = params;
    const PumpSpec pu = pump;
    const bool tdep = pu.kind == PumpSpec::Kind::envelope;
    auto gen = [p, pu](long step) {
        const long db = p.bin_extent();
        const Matrix ib = Matrix::Identity(db, db);
        const Matrix a_r = channel_op(ladder(p.d_t[0]), 0, p.d_t);
        const Matrix a_l = channel_op(ladder(p.d_t[1]), 1, p.d_t);
        Matrix h = kron(system_generator(p, pu, step), ib);
        const Complex ph = std::polar(1.0, p.phi);
        for (long e = 0; e < 2; ++e) {
            const Matrix sp = emitter_op(sigma_plus(), e, p.d_sys);
            const Matrix sm = sp.adjoint();
            const double cr = std::sqrt(p.gamma_r[static_cast<size_t>(e)] * p.delta_t);
            const double cl = std::sqrt(p.gamma_l[static_cast<size_t>(e)] * p.delta_t);
            // emitter 2 carries exp(+i phi) on the right channel, exp(-i phi) on the left
            const Complex fr = e == 1 ? ph : Complex(1.0);
            const Complex fl = e == 1 ? std::conj(ph) : Complex(1.0);
            h += cr * (fr * kron(sp, a_r) + std::conj(fr) * kron(sm, a_r.adjoint()));
            h += cl * (fl * kron(sp, a_l) + std::conj(fl) * kron(sm, a_l.adjoint()));
        }
        return Tensor::from_matrix(h);
    };
    return GateSequence(2, {params.sys_extent(), params.bin_extent()}, tdep, gen);
}

GateSequence hamiltonian_2tls_nmar(const SimParams& params, const PumpSpec& pump) {
    params.validate();
    require_channels(params, 2, "hamiltonian_2tls_nmar");
    require_emitters(params, 2, "hamiltonian_2tls_nmar");
    if (params.delay_steps() < 1)
        throw ContractViolation("hamiltonian_2tls_nmar: tau must be positive");
    const SimParams p = params;
    const PumpSpec pu = pump;
    const bool tdep = pu.kind == PumpSpec::Kind::envelope;
    auto gen = [p, pu](long step) {
        const long db = p.bin_extent();
        const Matrix ib = Matrix::Identity(db, db);
        const Matrix a_r = channel_op(ladder(p.d_t[0]), 0, p.d_t);
        const Matrix a_l = channel_op(ladder(p.d_t[1]), 1, p.d_t);
        const Complex ph = std::polar(1.0, p.phi);
        const Matrix sp1 = emitter_op(sigma_plus(), 0, p.d_sys);
        const Matrix sp2 = emitter_op(sigma_plus(), 1, p.d_sys);
        Matrix h = kron3(system_generator(p, pu, step), ib, ib);
        const double cr1 = std::sqrt(p.gamma_r[0] * p.delta_t);
        const double cl1 = std::sqrt(p.gamma_l[0] * p.delta_t);
        const double cr2 = std::sqrt(p.gamma_r[1] * p.delta_t);
        const double cl2 = std::sqrt(p.gamma_l[1] * p.delta_t);
        // emitter 1: present right-mover, delayed left-mover (phase)
        h += cr1 * (kron3(sp1, a_r, ib) + kron3(sp1.adjoint(), a_r.adjoint(), ib));
        h += cl1 * (ph * kron3(sp1, ib, a_l) +
                    std::conj(ph) * kron3(sp1.adjoint(), ib, a_l.adjoint()));
        // emitter 2: present left-mover, delayed right-mover (phase)
        h += cl2 * (kron3(sp2, a_l, ib) + kron3(sp2.adjoint(), a_l.adjoint(), ib));
        h += cr2 * (ph * kron3(sp2, ib, a_r) +
                    std::conj(ph) * kron3(sp2.adjoint(), ib, a_r.adjoint()));
        return Tensor::from_matrix(h);
    };
    return GateSequence(3, {params.sys_extent(), params.bin_extent(), params.bin_extent()},
                        tdep, gen);
}

Tensor tls_pop() {
    Matrix m = Matrix::Zero(2, 2);
    m(1, 1) = 1.0;
    return Tensor::from_matrix(m);
}

Tensor tls_pop(long emitter, const SimParams& params) {
    if (emitter < 0 || emitter >= static_cast<long>(params.d_sys.size()))
        throw DimensionError("tls_pop: emitter index out of range");
    const Matrix sp = emitter_op(sigma_plus(), emitter, params.d_sys);
    return Tensor::from_matrix(sp * sp.adjoint());
}

Tensor sys_total_excitation(const SimParams& params) {
    Matrix h = Matrix::Zero(params.sys_extent(), params.sys_extent());
    for (size_t e = 0; e < params.d_sys.size(); ++e) {
        const Matrix sp = emitter_op(sigma_plus(), static_cast<long>(e), params.d_sys);
        h += sp * sp.adjoint();
    }
    return Tensor::from_matrix(h);
}

Tensor bin_number_op(Channel ch, const SimParams& params) {
    const long c = static_cast<long>(ch);
    if (c >= static_cast<long>(params.d_t.size()))
        throw DimensionError("bin_number_op: channel out of range");
    const Matrix a = ladder(params.d_t[static_cast<size_t>(c)]);
    return Tensor::from_matrix(channel_op(a.adjoint() * a, c, params.d_t));
}

Tensor bin_total_number_op(const SimParams& params) {
    Matrix h = Matrix::Zero(params.bin_extent(), params.bin_extent());
    for (size_t c = 0; c < params.d_t.size(); ++c) {
        const Matrix a = ladder(params.d_t[c]);
        h += channel_op(a.adjoint() * a, static_cast<long>(c), params.d_t);
    }
    return Tensor::from_matrix(h);
}

Tensor bin_annihilate_op(Channel ch, const SimParams& params) {
    const long c = static_cast<long>(ch);
    if (c >= static_cast<long>(params.d_t.size()))
        throw DimensionError("bin_annihilate_op: channel out of range");
    return Tensor::from_matrix(channel_op(ladder(params.d_t[static_cast<size_t>(c)]), c,
                                          params.d_t));
}

} // namespace wqed
