#ifndef TFR_SIM_HPP
#define TFR_SIM_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tfr/reduce.hpp"

namespace tfr {

struct StepSizeUnderflow : std::runtime_error {
    explicit StepSizeUnderflow(double t)
        : std::runtime_error("step size underflow at t = " + std::to_string(t) +
                             "; lower t_end or the stiffness (eps)") {}
};
struct DenominatorBlowup : std::runtime_error {
    explicit DenominatorBlowup(double t)
        : std::runtime_error("reduced rhs approaches a pole near tau = " +
                             std::to_string(t)) {}
};
struct PositivityViolation : std::runtime_error {
    explicit PositivityViolation(double t)
        : std::runtime_error("state left the positive orthant at t = " +
                             std::to_string(t)) {}
};

struct Trajectory {
    std::vector<double> times;                    // strictly increasing
    std::vector<std::vector<double>> states;      // one row per time
    std::vector<std::vector<double>> x_states;    // reduced runs: x = Phi(v)
    std::vector<double> residuals;                // ||h0||_inf along the path
    bool slow_time = true;
    double eps = 0.0;
    double tol = 0.0;
};

struct ConvergenceResult {
    std::vector<double> eps_ladder;  // strictly decreasing, positive
    std::vector<double> errors;      // sup-norm over the slow-time window
    std::vector<double> ratios;      // errors[i+1] / errors[i]
};

namespace detail {

using RhsFn = std::function<void(double, const std::vector<double>&, std::vector<double>&)>;

// Dormand-Prince 5(4) tableau.
struct DP45 {
    static constexpr double c[7] = {0., 1. / 5, 3. / 10, 4. / 5, 8. / 9, 1., 1.};
    static constexpr double a[7][6] = {
        {},
        {1. / 5},
        {3. / 40, 9. / 40},
        {44. / 45, -56. / 15, 32. / 9},
        {19372. / 6561, -25360. / 2187, 64448. / 6561, -212. / 729},
        {9017. / 3168, -355. / 33, 46732. / 5247, 49. / 176, -5103. / 18656},
        {35. / 384, 0., 500. / 1113, 125. / 192, -2187. / 6784, 11. / 84}};
    static constexpr double b5[7] = {35. / 384,      0., 500. / 1113, 125. / 192,
                                     -2187. / 6784, 11. / 84, 0.};
    static constexpr double b4[7] = {5179. / 57600,    0.,           7571. / 16695,
                                     393. / 640,       -92097. / 339200,
                                     187. / 2100,      1. / 40};
};

inline void dp45_stage(const RhsFn& f, double t, const std::vector<double>& y, double h,
                       std::vector<std::vector<double>>& k, std::vector<double>& y5,
                       std::vector<double>& y4) {
    std::size_t n = y.size();
    std::vector<double> tmp(n);
    k.assign(7, std::vector<double>(n));
    for (int s = 0; s < 7; ++s) {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = y[i];
            for (int j = 0; j < s; ++j) acc += h * DP45::a[s][j] * k[j][i];
            tmp[i] = acc;
        }
        f(t + DP45::c[s] * h, tmp, k[s]);
    }
    y5.assign(n, 0.);
    y4.assign(n, 0.);
    for (std::size_t i = 0; i < n; ++i) {
        double s5 = y[i], s4 = y[i];
        for (int s = 0; s < 7; ++s) {
            s5 += h * DP45::b5[s] * k[s][i];
            s4 += h * DP45::b4[s] * k[s][i];
        }
        y5[i] = s5;
        y4[i] = s4;
    }
}

// Adaptive integration with dense output at `grid` (must be increasing and
// start at t0). `on_point(t, y)` is called at every grid time. If
// require_positive, steps whose endpoint leaves the open positive orthant
// are rejected with a smaller step; persistent failure raises
// PositivityViolation.
inline void rk45_adaptive(const RhsFn& f, double t0, std::vector<double> y,
                          const std::vector<double>& grid, double tol,
                          bool require_positive,
                          const std::function<void(double, const std::vector<double>&)>& on_point) {
    double t = t0;
    std::size_t gi = 0;
    if (!grid.empty() && std::abs(grid[0] - t0) < 1e-300) {
        on_point(t0, y);
        gi = 1;
    }
    if (gi >= grid.size()) return;
    double t_end = grid.back();
    double h = (t_end - t0) / 100.0;
    std::vector<std::vector<double>> k;
    std::vector<double> y5, y4;
    int consecutive_pos_rejects = 0;
    while (t < t_end) {
        double h_try = std::min(h, grid[gi] - t);
        if (h_try < 5e-16 * std::max(1.0, std::abs(t))) throw StepSizeUnderflow(t);
        dp45_stage(f, t, y, h_try, k, y5, y4);
        bool finite = true;
        double err = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (!std::isfinite(y5[i])) { finite = false; break; }
            double sc = tol + tol * std::max(std::abs(y[i]), std::abs(y5[i]));
            err = std::max(err, std::abs(y5[i] - y4[i]) / sc);
        }
        bool pos_ok = true;
        if (finite && require_positive)
            for (double v : y5)
                if (v <= 0.0) { pos_ok = false; break; }
        if (finite && err <= 1.0 && pos_ok) {
            t += h_try;
            y = y5;
            consecutive_pos_rejects = 0;
            while (gi < grid.size() && t >= grid[gi] - 1e-12 * std::max(1.0, std::abs(t))) {
                on_point(grid[gi], y);
                ++gi;
            }
            double fac = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
            h = h_try * std::clamp(fac, 0.2, 5.0);
        } else {
            if (!pos_ok && ++consecutive_pos_rejects > 60) throw PositivityViolation(t);
            double fac = (finite && err > 0) ? 0.9 * std::pow(err, -0.2) : 0.1;
            h = h_try * std::clamp(fac, 0.05, 0.5);
        }
    }
}

// Fixed-step mode advancing with the embedded fourth-order solution, so
// the global error scales as (step)^4 (order verification).
inline std::vector<double> rk45_fixed(const RhsFn& f, double t0, std::vector<double> y,
                                      double t_end, std::size_t steps) {
    double h = (t_end - t0) / static_cast<double>(steps);
    std::vector<std::vector<double>> k;
    std::vector<double> y5, y4;
    for (std::size_t s = 0; s < steps; ++s) {
        dp45_stage(f, t0 + s * h, y, h, k, y5, y4);
        y = y4;
    }
    return y;
}

inline std::vector<double> uniform_grid(double a, double b, std::size_t points) {
    std::vector<double> g(points);
    for (std::size_t i = 0; i < points; ++i)
        g[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1);
    return g;
}

}  // namespace detail

inline std::pair<std::vector<MultiPoly>, std::vector<MultiPoly>> sim_vector_fields(
    const Model& m) {
    SlowFastSplit sp;
    if (m.is_crn()) sp = split_slow_fast(build_stoich(m), m);
    return model_vector_fields(m, sp);
}

inline double sup_norm_inf(const std::vector<double>& a) {
    double m = 0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

// Full system in slow time tau = eps * t: dx/dtau = h0(x)/eps + h1(x).
// For eps == 0 the pure fast flow dx/dt = h0(x) is integrated and
// t_end_slow is interpreted as a fast-time horizon.
inline Trajectory integrate_full(const Model& m, double eps, std::vector<double> x0,
                                 double t_end_slow, double tol,
                                 std::size_t grid_points = 201) {
    if (eps < 0) throw std::invalid_argument("integrate_full: eps must be >= 0");
    auto xvars = m.state_var_names();
    auto [h0, h1] = sim_vector_fields(m);
    std::size_t n = xvars.size();
    if (x0.size() != n) throw std::invalid_argument("integrate_full: x0 dimension");

    detail::RhsFn f = [&](double, const std::vector<double>& x, std::vector<double>& dx) {
        dx.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            double fast = h0[i].eval_d(x);
            double slow = h1[i].eval_d(x);
            dx[i] = eps > 0 ? fast / eps + slow : fast;
        }
    };

    Trajectory traj;
    traj.slow_time = eps > 0;
    traj.eps = eps;
    traj.tol = tol;
    auto grid = detail::uniform_grid(0.0, t_end_slow, grid_points);
    detail::rk45_adaptive(f, 0.0, x0, grid, tol, m.is_crn(),
                          [&](double t, const std::vector<double>& x) {
                              traj.times.push_back(t);
                              traj.states.push_back(x);
                              std::vector<double> r(n);
                              for (std::size_t i = 0; i < n; ++i) r[i] = h0[i].eval_d(x);
                              traj.residuals.push_back(sup_norm_inf(r));
                          });
    return traj;
}

// Reduced system in slow time; also emits x(tau) = Phi(v(tau)) and the
// fast residual ||h0(Phi(v))||_inf.
inline Trajectory integrate_reduced(const ReducedSystem& rsys, const Model& m,
                                    std::vector<double> v0, double tau_end, double tol,
                                    std::size_t grid_points = 201) {
    std::size_t s = rsys.rhs.size();
    if (v0.size() != s) throw std::invalid_argument("integrate_reduced: v0 dimension");
    auto [h0, h1] = sim_vector_fields(m);
    (void)h1;
    std::size_t n = h0.size();

    double den_ratio_min = 1.0;  // smallest |den| / (1 + |num|) seen so far
    double den_ratio_t = 0.0;
    detail::RhsFn f = [&](double t, const std::vector<double>& v, std::vector<double>& dv) {
        dv.resize(s);
        for (std::size_t i = 0; i < s; ++i) {
            double den = rsys.rhs[i].den().eval_d(v);
            double num = rsys.rhs[i].num().eval_d(v);
            double ratio = std::abs(den) / (1.0 + std::abs(num));
            if (ratio < den_ratio_min) {
                den_ratio_min = ratio;
                den_ratio_t = t;
            }
            if (ratio < 1e-10) throw DenominatorBlowup(t);
            dv[i] = num / den;
        }
    };

    Trajectory traj;
    traj.slow_time = true;
    traj.tol = tol;
    auto grid = detail::uniform_grid(0.0, tau_end, grid_points);
    try {
        detail::rk45_adaptive(f, 0.0, v0, grid, tol, true,
                              [&](double t, const std::vector<double>& v) {
                                  traj.times.push_back(t);
                                  traj.states.push_back(v);
                                  auto x = rsys.phi.eval_num(v);
                                  std::vector<double> r(n);
                                  for (std::size_t i = 0; i < n; ++i) r[i] = h0[i].eval_d(x);
                                  traj.residuals.push_back(sup_norm_inf(r));
                                  traj.x_states.push_back(std::move(x));
                              });
    } catch (const StepSizeUnderflow&) {
        // step collapse driven by a vanishing denominator is a pole of the
        // reduced rhs, not a generic stiffness failure
        if (den_ratio_min < 1e-4) throw DenominatorBlowup(den_ratio_t);
        throw;
    }
    return traj;
}

inline double default_tau_min(double eps) { return 10.0 * eps * std::log(1.0 / eps); }

// sup over a uniform 200-point grid in [tau_min, tau_max] of
// ||x_full(tau; eps) - Phi(v(tau))||_inf, for each ladder entry.
inline ConvergenceResult convergence_study(const Model& m, const ReducedSystem& rsys,
                                           const std::vector<double>& v0,
                                           std::vector<double> eps_ladder, double tau_min,
                                           double tau_max, double tol,
                                           std::size_t grid_points = 200,
                                           const std::vector<double>* x0_override = nullptr) {
    for (std::size_t i = 0; i + 1 < eps_ladder.size(); ++i)
        if (!(eps_ladder[i] > eps_ladder[i + 1]))
            throw std::invalid_argument("eps ladder must be strictly decreasing");

    ConvergenceResult res;
    res.eps_ladder = eps_ladder;

    // reduced trajectory, shared across the ladder
    Trajectory red = integrate_reduced(rsys, m, v0, tau_max, tol, 2001);
    auto phi_at = [&](double tau) {
        // linear interpolation on the dense reduced grid
        auto it = std::lower_bound(red.times.begin(), red.times.end(), tau);
        std::size_t j = std::min<std::size_t>(it - red.times.begin(), red.times.size() - 1);
        std::size_t i0 = j > 0 ? j - 1 : 0;
        double t0 = red.times[i0], t1 = red.times[j];
        double w = (t1 > t0) ? (tau - t0) / (t1 - t0) : 0.0;
        std::vector<double> x(red.x_states[i0].size());
        for (std::size_t k = 0; k < x.size(); ++k)
            x[k] = (1 - w) * red.x_states[i0][k] + w * red.x_states[j][k];
        return x;
    };

    std::vector<double> x0 = x0_override ? *x0_override : rsys.phi.eval_num(v0);
    auto grid = detail::uniform_grid(tau_min, tau_max, grid_points);

    for (double eps : eps_ladder) {
        Trajectory full = integrate_full(m, eps, x0, tau_max, tol, 2001);
        double err = 0.0;
        for (double tau : grid) {
            auto it = std::lower_bound(full.times.begin(), full.times.end(), tau);
            std::size_t j = std::min<std::size_t>(it - full.times.begin(),
                                                  full.times.size() - 1);
            std::size_t i0 = j > 0 ? j - 1 : 0;
            double t0 = full.times[i0], t1 = full.times[j];
            double w = (t1 > t0) ? (tau - t0) / (t1 - t0) : 0.0;
            auto xr = phi_at(tau);
            for (std::size_t k = 0; k < xr.size(); ++k) {
                double xf = (1 - w) * full.states[i0][k] + w * full.states[j][k];
                err = std::max(err, std::abs(xf - xr[k]));
            }
        }
        res.errors.push_back(err);
    }
    for (std::size_t i = 0; i + 1 < res.errors.size(); ++i)
        res.ratios.push_back(res.errors[i] > 0 ? res.errors[i + 1] / res.errors[i] : 0.0);
    return res;
}

// CSV: header "tau,v1..vs,x1..xn,residual", 17 significant digits.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                                 std::size_t s, std::size_t n) {
    os << "tau";
    for (std::size_t i = 1; i <= s; ++i) os << ",v" << i;
    for (std::size_t i = 1; i <= n; ++i) os << ",x" << i;
    os << ",residual\n";
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf;
    };
    for (std::size_t row = 0; row < traj.times.size(); ++row) {
        put(traj.times[row]);
        const auto& vrow = traj.x_states.empty() ? std::vector<double>{} : traj.states[row];
        for (std::size_t i = 0; i < s; ++i) {
            os << ',';
            put(i < vrow.size() ? vrow[i] : std::nan(""));
        }
        const auto& xrow = traj.x_states.empty() ? traj.states[row] : traj.x_states[row];
        for (std::size_t i = 0; i < n; ++i) {
            os << ',';
            put(i < xrow.size() ? xrow[i] : std::nan(""));
        }
        os << ',';
        put(row < traj.residuals.size() ? traj.residuals[row] : std::nan(""));
        os << '\n';
    }
}

}  // namespace tfr

#endif
