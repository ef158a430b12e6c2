#pragma once

// Local-linear pre-smoothing of noisy, irregularly sampled curves.

#include "fknock/basis.hpp"
#include "fknock/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace fknock {

struct RawCurve {
    int sample_id = 0;
    int variable_id = 0;
    std::vector<Sample> samples;
};

inline double default_bandwidth(int L, double c = 0.5)
{
    if (L < 2) {
        throw ConfigError("default_bandwidth: need L >= 2");
    }
    return c * std::pow(static_cast<double>(L), -0.2);
}

inline std::vector<double> equispaced_grid(int points, Interval dom = {})
{
    if (points < 2) {
        throw ConfigError("grid needs at least two points");
    }
    std::vector<double> g(points);
    for (int i = 0; i < points; ++i) {
        g[i] = dom.lo + dom.length() * i / (points - 1);
    }
    g.back() = dom.hi;
    return g;
}

// Gaussian-kernel local-linear fit evaluated at each grid point.
inline std::vector<double> local_linear_smooth(const RawCurve& raw, const std::vector<double>& grid,
                                               std::optional<double> bandwidth = std::nullopt,
                                               Diagnostics* diag = nullptr)
{
    const int L = static_cast<int>(raw.samples.size());
    if (L < 2) {
        throw ConfigError("local_linear_smooth: need at least two samples");
    }
    const double h = bandwidth ? *bandwidth : default_bandwidth(L);
    if (!(h > 0.0)) {
        throw ConfigError("local_linear_smooth: bandwidth must be positive");
    }
    // Fixed summation order makes the result independent of input order.
    std::vector<Sample> s = raw.samples;
    std::sort(s.begin(), s.end(), [](const Sample& a, const Sample& b) {
        return a.t < b.t || (a.t == b.t && a.w < b.w);
    });

    std::vector<double> out(grid.size());
    int fallbacks = 0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double u = grid[g];
        std::vector<double> k(s.size());
        double s0 = 0, dbar = 0, wbar = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double d = s[i].t - u;
            k[i] = std::exp(-0.5 * d * d / (h * h));
            s0 += k[i];
            dbar += k[i] * d;
            wbar += k[i] * s[i].w;
        }
        if (s0 < 1e-8) {
            const auto nn = std::min_element(s.begin(), s.end(), [u](const Sample& a, const Sample& b) {
                return std::abs(a.t - u) < std::abs(b.t - u);
            });
            out[g] = nn->w;
            ++fallbacks;
            continue;
        }
        dbar /= s0;
        wbar /= s0;
        // centred weighted least squares; avoids cancellation in s0*s2 - s1^2
        double sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double dc = s[i].t - u - dbar;
            sxx += k[i] * dc * dc;
            sxy += k[i] * dc * (s[i].w - wbar);
        }
        const double scale = s.back().t - s.front().t;
        if (sxx > 1e-12 * s0 * scale * scale && sxx > 0.0) {
            out[g] = wbar - dbar * sxy / sxx;
        } else {
            out[g] = wbar; // all weight on one abscissa
        }
    }
    if (fallbacks > 0) {
        warn(diag, "local_linear_smooth: nearest-neighbour fallback at " + std::to_string(fallbacks) +
                       " grid points (curve " + std::to_string(raw.sample_id) + "," +
                       std::to_string(raw.variable_id) + ")");
    }
    return out;
}

} // namespace fknock
