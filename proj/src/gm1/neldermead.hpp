#pragma once
// Derivative-free Nelder-Mead simplex minimizer for small smooth problems
// (4-parameter curve fits, 3-parameter likelihoods). Standard coefficients:
// reflection 1, expansion 2, contraction 0.5, shrink 0.5.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace gm1 {

struct NelderMeadOptions {
    double initial_step = 0.5;  // displacement of each non-base vertex
    double f_tol = 1e-12;       // stop when the vertex f-spread falls below this
    double x_tol = 1e-10;       // ... or the simplex diameter does
    int max_iter = 20000;
};

struct NelderMeadResult {
    std::vector<double> x;
    double fval = 0.0;
    int iterations = 0;
    bool converged = false;
};

inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, NelderMeadOptions opt = {}) {
    const int d = static_cast<int>(x0.size());
    if (d < 1) throw std::invalid_argument("nelder_mead needs at least one dimension");

    std::vector<std::vector<double>> xs(d + 1, x0);
    for (int i = 0; i < d; ++i) xs[i + 1][i] += opt.initial_step;
    std::vector<double> fs(d + 1);
    for (int i = 0; i <= d; ++i) fs[i] = f(xs[i]);

    std::vector<int> order(d + 1);
    std::vector<double> centroid(d), cand(d);
    NelderMeadResult res;
    int it = 0;
    for (; it < opt.max_iter; ++it) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return fs[a] < fs[b]; });
        const int best = order[0], worst = order[d], second_worst = order[d - 1];

        double diam = 0.0;
        for (int i = 1; i <= d; ++i)
            for (int k = 0; k < d; ++k)
                diam = std::max(diam, std::fabs(xs[order[i]][k] - xs[best][k]));
        const double f_spread = std::fabs(fs[worst] - fs[best]);
        if (f_spread <= opt.f_tol * (1.0 + std::fabs(fs[best])) || diam <= opt.x_tol) {
            res.converged = true;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (int i = 0; i <= d; ++i) {
            if (i == worst) continue;
            for (int k = 0; k < d; ++k) centroid[k] += xs[i][k];
        }
        for (int k = 0; k < d; ++k) centroid[k] /= d;

        auto point = [&](double coef) {
            for (int k = 0; k < d; ++k) cand[k] = centroid[k] + coef * (xs[worst][k] - centroid[k]);
            return f(cand);
        };

        const double f_refl = point(-1.0);
        if (f_refl < fs[order[0]]) {
            std::vector<double> refl = cand;
            const double f_exp = point(-2.0);
            if (f_exp < f_refl) {
                xs[worst] = cand;
                fs[worst] = f_exp;
            } else {
                xs[worst] = refl;
                fs[worst] = f_refl;
            }
        } else if (f_refl < fs[second_worst]) {
            xs[worst] = cand;
            fs[worst] = f_refl;
        } else {
            const bool outside = f_refl < fs[worst];
            const double f_con = point(outside ? -0.5 : 0.5);
            if (f_con < std::min(f_refl, fs[worst])) {
                xs[worst] = cand;
                fs[worst] = f_con;
            } else {
                for (int i = 1; i <= d; ++i) {
                    const int v = order[i];
                    for (int k = 0; k < d; ++k)
                        xs[v][k] = xs[best][k] + 0.5 * (xs[v][k] - xs[best][k]);
                    fs[v] = f(xs[v]);
                }
            }
        }
    }

    int best = 0;
    for (int i = 1; i <= d; ++i)
        if (fs[i] < fs[best]) best = i;
    res.x = xs[best];
    res.fval = fs[best];
    res.iterations = it;
    return res;
}

}  // namespace gm1
