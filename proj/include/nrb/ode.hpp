#pragma once

// Adaptive Dormand-Prince RK45 on complex vectors. Used for open-system
// propagation (vectorized density matrices under the Liouvillian) and for the
// non-Hermitian effective evolution inside quantum trajectories.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>

#include "nrb/errors.hpp"
#include "nrb/hilbert.hpp"

namespace nrb {

struct OdeOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    double first_step = 0.0;   // 0 = auto
    double max_step = 0.0;     // 0 = unbounded
    long max_steps = 20'000'000;
};

// Integrate dy/dt = f(t, y) from t0 to t1 (t1 >= t0). `watch`, when given, is
// called after every accepted step as watch(t_prev, y_prev, t_new, y_new) and
// may return false to stop integration early (used for jump detection).
class Rk45 {
  public:
    using Rhs = std::function<void(double, const VectorXc&, VectorXc&)>;
    using Watch = std::function<bool(double, const VectorXc&, double, const VectorXc&)>;

    Rk45(Rhs rhs, OdeOptions opt = {}) : f_(std::move(rhs)), opt_(opt) {}

    // advance y in place from t0 to t1; returns the time actually reached
    // (== t1 unless a watch callback stopped early)
    double integrate(double t0, double t1, VectorXc& y, const Watch& watch = nullptr) {
        if (t1 < t0) throw InvalidArgument("Rk45: backwards integration not supported");
        if (t1 == t0) return t0;
        const auto n = y.size();
        VectorXc k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), yerr(n);

        double t = t0;
        f_(t, y, k1);
        double h = opt_.first_step > 0 ? opt_.first_step : initial_step(t, y, k1);
        h = clamp_step(h, t1 - t);

        for (long step = 0; step < opt_.max_steps; ++step) {
            if (t >= t1) return t;
            h = clamp_step(h, t1 - t);

            // Dormand-Prince 5(4) tableau
            ytmp = y + h * (a21 * k1);
            f_(t + c2 * h, ytmp, k2);
            ytmp = y + h * (a31 * k1 + a32 * k2);
            f_(t + c3 * h, ytmp, k3);
            ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
            f_(t + c4 * h, ytmp, k4);
            ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
            f_(t + c5 * h, ytmp, k5);
            ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
            f_(t + h, ytmp, k6);
            ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            f_(t + h, ynew, k7); // FSAL
            yerr = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

            double err = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                double sc = opt_.abs_tol +
                            opt_.rel_tol * std::max(std::abs(y(i)), std::abs(ynew(i)));
                err = std::max(err, std::abs(yerr(i)) / sc);
            }

            if (err <= 1.0) {
                double tnew = t + h;
                if (watch && !watch(t, y, tnew, ynew)) {
                    // caller handles the event; leave y at the pre-step state
                    return t;
                }
                t = tnew;
                y.swap(ynew);
                k1.swap(k7);
                double fac = (err == 0.0) ? 5.0 : 0.9 * std::pow(err, -0.2);
                h *= std::clamp(fac, 0.2, 5.0);
            } else {
                h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
                if (h < 1e-15 * std::max(1.0, std::abs(t)))
                    throw IntegratorFailure("Rk45: step size underflow");
            }
        }
        throw IntegratorFailure("Rk45: exceeded max step count");
    }

  private:
    double clamp_step(double h, double remaining) const {
        if (opt_.max_step > 0) h = std::min(h, opt_.max_step);
        return std::min(h, remaining);
    }

    double initial_step(double t, const VectorXc& y, const VectorXc& dy) const {
        double ny = y.norm(), nd = dy.norm();
        double h = (nd > 1e-300) ? 0.01 * std::max(ny, 1.0) / nd : 1e-6;
        (void)t;
        return std::max(h, 1e-12);
    }

    Rhs f_;
    OdeOptions opt_;

    // tableau constants
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // error = 5th-order minus embedded 4th-order weights
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                            e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                            e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
};

} // namespace nrb
