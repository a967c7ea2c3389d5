#include "gm1/garch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gm1/neldermead.hpp"
#include "gm1/observables.hpp"

namespace gm1 {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void check_params(const GarchParams& p) {
    if (!(p.alpha0 > 0.0)) throw std::domain_error("alpha0 must be positive");
    if (!(p.alpha1 >= 0.0) || !(p.beta1 >= 0.0))
        throw std::domain_error("alpha1 and beta1 must be non-negative");
    if (!(p.alpha1 + p.beta1 < 1.0))
        throw std::domain_error("alpha1 + beta1 must be < 1 (covariance stationarity)");
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double logit(double p) {
    const double q = std::clamp(p, 1e-12, 1.0 - 1e-12);
    return std::log(q / (1.0 - q));
}

// Unconstrained coordinates: alpha0 = e^{x0}; the persistence sum
// alpha1 + beta1 = logistic(x1) < 1 splits as alpha1 = sum * logistic(x2).
GarchParams decode(const std::vector<double>& x) {
    GarchParams p;
    p.alpha0 = std::exp(x[0]);
    const double sum = logistic(x[1]);
    const double w = logistic(x[2]);
    p.alpha1 = sum * w;
    p.beta1 = sum * (1.0 - w);
    return p;
}

std::vector<double> encode(const GarchParams& p) {
    const double sum = p.alpha1 + p.beta1;
    return {std::log(p.alpha0), logit(sum), logit(sum > 0.0 ? p.alpha1 / sum : 0.5)};
}

}  // namespace

std::vector<double> garch_filter(const std::vector<double>& eps, const GarchParams& p,
                                 double init_var) {
    check_params(p);
    if (!(init_var > 0.0)) throw std::domain_error("init_var must be positive");
    if (eps.empty()) throw std::invalid_argument("empty shock series");
    std::vector<double> sigma2(eps.size());
    sigma2[0] = init_var;
    for (std::size_t t = 1; t < eps.size(); ++t)
        sigma2[t] = p.alpha0 + p.alpha1 * eps[t - 1] * eps[t - 1] + p.beta1 * sigma2[t - 1];
    return sigma2;
}

double gaussian_loglik(const std::vector<double>& eps, const GarchParams& p, double init_var) {
    if (eps.size() < 2) throw std::invalid_argument("log-likelihood needs >= 2 observations");
    const std::vector<double> sigma2 = garch_filter(eps, p, init_var);
    double ll = 0.0;
    for (std::size_t t = 1; t < eps.size(); ++t)
        ll += -0.5 * (std::log(kTwoPi * sigma2[t]) + eps[t] * eps[t] / sigma2[t]);
    return ll;
}

GarchFit fit_garch(const std::vector<double>& series) {
    if (series.size() < 100) throw std::invalid_argument("fit needs >= 100 observations");
    const double mu = mean(series);
    std::vector<double> eps(series.size());
    for (std::size_t t = 0; t < series.size(); ++t) eps[t] = series[t] - mu;
    const double var_hat = sample_variance(eps);
    if (!(var_hat > 0.0)) throw std::domain_error("fit rejected: zero sample variance");

    const auto objective = [&](const std::vector<double>& x) {
        const double ll = gaussian_loglik(eps, decode(x), var_hat);
        return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
    };

    NelderMeadOptions opt;
    opt.initial_step = 0.5;
    opt.f_tol = 1e-12;
    opt.x_tol = 1e-11;
    opt.max_iter = 20000;

    NelderMeadResult best;
    best.fval = std::numeric_limits<double>::infinity();
    bool any_converged = false;
    auto consider = [&](const std::vector<double>& x0, const NelderMeadOptions& o) {
        NelderMeadResult r = nelder_mead(objective, x0, o);
        any_converged = any_converged || r.converged;
        if (r.fval < best.fval) best = r;
    };
    for (const auto& [a1, b1] : {std::pair{0.05, 0.90}, {0.10, 0.80}, {0.02, 0.95}}) {
        GarchParams s;
        s.alpha1 = a1;
        s.beta1 = b1;
        s.alpha0 = var_hat * (1.0 - a1 - b1);  // matches the sample variance
        consider(encode(s), opt);
    }
    NelderMeadOptions polish = opt;
    polish.initial_step = 0.05;
    consider(best.x, polish);

    const GarchParams p = decode(best.x);
    GarchFit fit;
    fit.alpha0 = p.alpha0;
    fit.alpha1 = p.alpha1;
    fit.beta1 = p.beta1;
    fit.loglik = -best.fval;
    fit.converged = any_converged && std::isfinite(best.fval);
    return fit;
}

std::vector<double> simulate_garch(const GarchParams& p, long long T, Rng& rng) {
    check_params(p);
    if (T < 2) throw std::domain_error("simulation needs T >= 2");
    std::vector<double> eps(static_cast<std::size_t>(T));
    double sigma2 = p.alpha0 / (1.0 - p.alpha1 - p.beta1);
    eps[0] = std::sqrt(sigma2) * rng.gaussian();
    for (long long t = 1; t < T; ++t) {
        sigma2 = p.alpha0 + p.alpha1 * eps[static_cast<std::size_t>(t - 1)] *
                                eps[static_cast<std::size_t>(t - 1)] +
                 p.beta1 * sigma2;
        eps[static_cast<std::size_t>(t)] = std::sqrt(sigma2) * rng.gaussian();
    }
    return eps;
}

}  // namespace gm1
