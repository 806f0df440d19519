#include "wqed/oracles.hpp"

#include <cmath>

namespace wqed {
namespace oracles {

namespace {

using Vec2 = Eigen::Vector2cd;
using Mat2 = Eigen::Matrix2cd;

// Fixed-step integrator for the two-amplitude delay system. The internal
// step divides tau, so the derivative jump of theta(t - tau) always falls
// on a grid node; within each step the delayed branch is decided by the
// step's start, keeping every RK4 stage on one smooth piece. The history
// buffer stores left and right derivatives per node for cubic Hermite
// interpolation of the delayed argument.
class DelayIntegrator {
public:
    DelayIntegrator(double gamma, double tau, Complex phase, bool mirror, double h_max)
        : gamma_(gamma), tau_(tau), phase_(phase), mirror_(mirror) {
        if (tau_ > 0.0) {
            const long m = std::max<long>(1, std::lround(std::ceil(tau_ / h_max)));
            h_ = tau_ / static_cast<double>(m);
        } else {
            h_ = h_max;
        }
    }

    void run(double t_end) {
        cs_ = {Vec2(1.0, 0.0)};
        fs_right_ = {rhs(0.0, cs_[0], delay_on(0.0))};
        fs_left_ = {fs_right_[0]};
        double t = 0.0;
        Vec2 c = cs_[0];
        while (t < t_end - 0.5 * h_) {
            const bool on = delay_on(t);
            const Vec2 k1 = rhs(t, c, on);
            const Vec2 k2 = rhs(t + 0.5 * h_, c + 0.5 * h_ * k1, on);
            const Vec2 k3 = rhs(t + 0.5 * h_, c + 0.5 * h_ * k2, on);
            const Vec2 k4 = rhs(t + h_, c + h_ * k3, on);
            c += h_ / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += h_;
            cs_.push_back(c);
            fs_left_.push_back(rhs(t, c, on));
            fs_right_.push_back(rhs(t, c, delay_on(t)));
        }
    }

    Vec2 sample(double t) const { return interp(t); }

private:
    bool delay_on(double step_start) const {
        return tau_ == 0.0 || step_start >= tau_ - 1e-12;
    }

    Vec2 coupled(const Vec2& c) const {
        return mirror_ ? c : Vec2(c(1), c(0));
    }

    Vec2 rhs(double t, const Vec2& c, bool on) const {
        Vec2 dc = -0.5 * gamma_ * c;
        if (!on) return dc;
        if (tau_ == 0.0) return dc - 0.5 * gamma_ * phase_ * coupled(c);
        return dc - 0.5 * gamma_ * phase_ * coupled(interp(t - tau_));
    }

    Vec2 interp(double t) const {
        if (t <= 0.0) return cs_.front();
        const double pos = t / h_;
        long i = static_cast<long>(std::floor(pos + 1e-12));
        if (i >= static_cast<long>(cs_.size()) - 1) return cs_.back();
        const double s = pos - static_cast<double>(i);
        if (s < 1e-12) return cs_[static_cast<size_t>(i)];
        const Vec2& y0 = cs_[static_cast<size_t>(i)];
        const Vec2& y1 = cs_[static_cast<size_t>(i + 1)];
        const Vec2 m0 = h_ * fs_right_[static_cast<size_t>(i)];
        const Vec2 m1 = h_ * fs_left_[static_cast<size_t>(i + 1)];
        const double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * m0 +
               (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * m1;
    }

    double gamma_, tau_, h_;
    Complex phase_;
    bool mirror_;
    std::vector<Vec2> cs_;
    std::vector<Vec2> fs_left_;
    std::vector<Vec2> fs_right_;
};

OracleSeries run_delay(double gamma, double tau, double phi,
                       std::span<const double> t_grid, double h, bool mirror) {
    if (gamma < 0.0) throw ContractViolation("delay oracle: gamma must be >= 0");
    if (tau < 0.0) throw ContractViolation("delay oracle: tau must be >= 0");
    DelayIntegrator integ(gamma, tau, std::polar(1.0, phi), mirror, h);
    integ.run(t_grid.empty() ? 0.0 : t_grid.back());
    OracleSeries out;
    out.times.assign(t_grid.begin(), t_grid.end());
    out.populations.resize(mirror ? 1 : 2);
    for (double t : t_grid) {
        const Vec2 c = integ.sample(t);
        out.populations[0].push_back(std::norm(c(0)));
        if (!mirror) out.populations[1].push_back(std::norm(c(1)));
    }
    return out;
}

Mat2 sigma_minus_m() {
    Mat2 m = Mat2::Zero();
    m(0, 1) = 1.0;  // basis (ground, excited)
    return m;
}

// Lindblad generator for H = Omega (sp + sm) + detuning sp sm, decay gamma.
Mat2 liouville(const Mat2& rho, double omega, double detuning, double gamma) {
    const Mat2 sm = sigma_minus_m();
    const Mat2 sp = sm.adjoint();
    const Mat2 h = omega * (sp + sm) + detuning * sp * sm;
    const Complex i(0.0, 1.0);
    Mat2 out = -i * (h * rho - rho * h);
    out += gamma * (sm * rho * sp - 0.5 * (sp * sm * rho + rho * sp * sm));
    return out;
}

void guard_step(double gamma, double omega_max, double h) {
    if (gamma * h >= 0.1 || std::abs(omega_max) * h >= 0.1)
        throw ContractViolation("lindblad oracle: step too large for gamma/Omega");
}

Mat2 rk4_rho(const Mat2& rho, double t, double h,
             const std::function<double(double)>& omega, double detuning, double gamma) {
    const Mat2 k1 = liouville(rho, omega(t), detuning, gamma);
    const Mat2 k2 = liouville(rho + 0.5 * h * k1, omega(t + 0.5 * h), detuning, gamma);
    const Mat2 k3 = liouville(rho + 0.5 * h * k2, omega(t + 0.5 * h), detuning, gamma);
    const Mat2 k4 = liouville(rho + h * k3, omega(t + h), detuning, gamma);
    return rho + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

} // namespace

OracleSeries analytic_decay(double gamma, std::span<const double> t_grid) {
    if (gamma < 0.0) throw ContractViolation("analytic_decay: gamma must be >= 0");
    OracleSeries out;
    out.times.assign(t_grid.begin(), t_grid.end());
    out.populations.resize(1);
    for (double t : t_grid) out.populations[0].push_back(std::exp(-gamma * t));
    return out;
}

OracleSeries dde_two_tls(double gamma, double tau, double phi,
                         std::span<const double> t_grid, double h) {
    return run_delay(gamma, tau, phi, t_grid, h, false);
}

OracleSeries dde_mirror(double gamma, double tau, double phi,
                        std::span<const double> t_grid, double h) {
    return run_delay(gamma, tau, phi, t_grid, h, true);
}

OracleSeries lindblad_driven_tls(const std::function<double(double)>& omega,
                                 double detuning, double gamma,
                                 std::span<const double> t_grid, double h,
                                 bool start_excited) {
    if (gamma <= 0.0) throw ContractViolation("lindblad oracle: gamma must be > 0");
    double omega_max = 0.0;
    for (double t : t_grid) omega_max = std::max(omega_max, std::abs(omega(t)));
    guard_step(gamma, omega_max, h);

    Mat2 rho = Mat2::Zero();
    rho(start_excited ? 1 : 0, start_excited ? 1 : 0) = 1.0;
    OracleSeries out;
    out.times.assign(t_grid.begin(), t_grid.end());
    out.populations.resize(1);

    size_t next = 0;
    auto record_until = [&](double t_target) {
        while (next < out.times.size() && out.times[next] <= t_target + 1e-9) {
            out.populations[0].push_back(rho(1, 1).real());
            ++next;
        }
    };
    record_until(0.0);
    const double t_end = t_grid.empty() ? 0.0 : t_grid.back();
    const long n_steps = std::lround(std::ceil(t_end / h - 1e-9));
    for (long k = 0; k < n_steps; ++k) {
        const double t = static_cast<double>(k) * h;
        rho = rk4_rho(rho, t, h, omega, detuning, gamma);
        record_until(static_cast<double>(k + 1) * h);
    }
    record_until(t_end + 1.0);
    return out;
}

LindbladTwoTime lindblad_two_time(double omega_cw, double detuning, double gamma,
                                  double t_ss, std::span<const double> t_primes,
                                  double h) {
    if (gamma <= 0.0) throw ContractViolation("lindblad oracle: gamma must be > 0");
    guard_step(gamma, omega_cw, h);
    auto omega = [omega_cw](double) { return omega_cw; };

    Mat2 rho = Mat2::Zero();
    rho(0, 0) = 1.0;  // ground start for a driven run
    const long warm_steps = std::lround(std::ceil(t_ss / h - 1e-9));
    for (long k = 0; k < warm_steps; ++k)
        rho = rk4_rho(rho, static_cast<double>(k) * h, h, omega, detuning, gamma);

    const Mat2 sm = sigma_minus_m();
    const Mat2 sp = sm.adjoint();
    Mat2 lam1 = rho * sp;       // <sp(t) sm(t+t')> seed
    Mat2 lam2 = sm * rho * sp;  // <sp(t) n(t+t') sm(t)> seed

    LindbladTwoTime out;
    out.n_ss = rho(1, 1).real();
    out.t_primes.assign(t_primes.begin(), t_primes.end());

    size_t next = 0;
    auto record_until = [&](double t_target) {
        while (next < out.t_primes.size() && out.t_primes[next] <= t_target + 1e-9) {
            out.g1.push_back((sm * lam1).trace());
            out.g2.push_back(((sp * sm) * lam2).trace().real());
            ++next;
        }
    };
    record_until(0.0);
    const double tp_end = t_primes.empty() ? 0.0 : t_primes.back();
    const long n_steps = std::lround(std::ceil(tp_end / h - 1e-9));
    for (long k = 0; k < n_steps; ++k) {
        const double tp = static_cast<double>(k) * h;
        lam1 = rk4_rho(lam1, tp, h, omega, detuning, gamma);
        lam2 = rk4_rho(lam2, tp, h, omega, detuning, gamma);
        record_until(static_cast<double>(k + 1) * h);
    }
    record_until(tp_end + 1.0);
    return out;
}

} // namespace oracles
} // namespace wqed
