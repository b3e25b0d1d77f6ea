#pragma once

// Independent reference computations used only by tests. Nothing here calls
// into the simulation paths it is used to check.

#include <cmath>
#include <cstdint>
#include <vector>

namespace oracles
{

    // Scanner sequence for configurations on an exact grid: min, max and step
    // are integer multiples of `unit` (given here as integer counts), so the
    // enumeration is done in integer arithmetic.
    inline std::vector<double> scanner_reference(
        std::int64_t minUnits,
        std::int64_t maxUnits,
        std::int64_t stepUnits,
        bool descending,
        double unit
    )
    {
        std::vector<double> out;
        if (!descending)
        {
            for (std::int64_t v = minUnits; v < maxUnits; v += stepUnits)
            {
                out.push_back(static_cast<double>(v) * unit);
            }
            out.push_back(static_cast<double>(maxUnits) * unit);
        }
        else
        {
            for (std::int64_t v = maxUnits; v > minUnits; v -= stepUnits)
            {
                out.push_back(static_cast<double>(v) * unit);
            }
            out.push_back(static_cast<double>(minUnits) * unit);
        }
        return out;
    }

    struct Lumped
    {
        double C;     // J/K
        double h;     // W/K
        double Q;     // absorbed heater power, W
        double TAmb;
        double TSet;
    };

    // Time to reach the setpoint from ambient, by classical RK4 at step
    // `dt` followed by bisection on the final step using RK4 sub-steps.
    inline double heating_time_rk4(Lumped const& m, double dt = 1e-2)
    {
        auto f = [&](double T) { return (m.Q - m.h * (T - m.TAmb)) / m.C; };
        auto rk4 = [&](double T, double step) {
            double k1 = f(T);
            double k2 = f(T + 0.5 * step * k1);
            double k3 = f(T + 0.5 * step * k2);
            double k4 = f(T + step * k3);
            return T + step / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        };
        double T = m.TAmb;
        double t = 0.0;
        for (;;)
        {
            double next = rk4(T, dt);
            if (next >= m.TSet)
            {
                double lo = 0.0;
                double hi = dt;
                for (int i = 0; i < 200; ++i)
                {
                    double mid = 0.5 * (lo + hi);
                    (rk4(T, mid) >= m.TSet ? hi : lo) = mid;
                }
                return t + 0.5 * (lo + hi);
            }
            T = next;
            t += dt;
        }
    }

    // Closed-form counterpart for cross-checking the RK4 oracle itself.
    inline double heating_time_closed(Lumped const& m)
    {
        double const dT = m.TSet - m.TAmb;
        if (m.h == 0.0)
        {
            return m.C * dT / m.Q;
        }
        return -(m.C / m.h) * std::log(1.0 - m.h * dT / m.Q);
    }

} // namespace oracles
