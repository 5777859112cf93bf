#pragma once
#include <cmath>

#include "cornet/datagen.hpp"
#include "cornet/net.hpp"

namespace test_helpers {

using namespace cornet;

/// Central finite differences for d(upstream . forward(x)) / dW, the
/// independent oracle for backward().
inline GradientSet fd_gradients(LayerStack stack, const Vec& x, const Vec& upstream, double h = 1e-5) {
    GradientSet fd = GradientSet::zeros_like(stack);
    for (std::size_t k = 0; k < stack.weights.size(); ++k) {
        for (std::size_t idx = 0; idx < stack.weights[k].a.size(); ++idx) {
            const double orig = stack.weights[k].a[idx];
            stack.weights[k].a[idx] = orig + h;
            const Vec up = forward(stack, x);
            stack.weights[k].a[idx] = orig - h;
            const Vec dn = forward(stack, x);
            stack.weights[k].a[idx] = orig;
            double du = 0.0, dd = 0.0;
            for (std::size_t j = 0; j < upstream.size(); ++j) {
                du += upstream[j] * up[j];
                dd += upstream[j] * dn[j];
            }
            fd.g[k].a[idx] = (du - dd) / (2.0 * h);
        }
    }
    return fd;
}

inline double max_rel_gradient_error(const GradientSet& a, const GradientSet& b) {
    double worst = 0.0;
    for (std::size_t k = 0; k < a.g.size(); ++k) {
        for (std::size_t i = 0; i < a.g[k].a.size(); ++i) {
            const double x = a.g[k].a[i];
            const double y = b.g[k].a[i];
            const double denom = std::max({std::abs(x), std::abs(y), 1e-3});
            worst = std::max(worst, std::abs(x - y) / denom);
        }
    }
    return worst;
}

/// Two-sample Kolmogorov-Smirnov statistic (test-side oracle).
inline double ks_statistic(Vec a, Vec b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        const double fa = static_cast<double>(i) / a.size();
        const double fb = static_cast<double>(j) / b.size();
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}

inline DgpConfig small_shared_cfg() {
    DgpConfig cfg;
    cfg.scenario = Scenario::shared_rep;
    cfg.d = 4;
    cfg.d_phi = 4;
    cfg.n_conf = 200;
    cfg.n_unc = 40;
    cfg.phi_hidden = {8};
    return cfg;
}

}  // namespace test_helpers
