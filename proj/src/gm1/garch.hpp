#pragma once
// GARCH(1,1) conditional-variance filter, Gaussian quasi-likelihood,
// constrained maximum-likelihood fitting, and a simulator used as the
// estimator's recovery oracle.

#include <vector>

#include "gm1/rng.hpp"

namespace gm1 {

struct GarchParams {
    double alpha0 = 1e-6;  // variance intercept, > 0
    double alpha1 = 0.05;  // shock coefficient, >= 0
    double beta1 = 0.90;   // persistence coefficient, >= 0; alpha1 + beta1 < 1
};

struct GarchFit {
    double alpha0 = 0.0;
    double alpha1 = 0.0;
    double beta1 = 0.0;
    double loglik = 0.0;
    bool converged = false;
};

// Variance path: sigma2[0] = init_var, then
// sigma2[t] = alpha0 + alpha1*eps[t-1]^2 + beta1*sigma2[t-1].
std::vector<double> garch_filter(const std::vector<double>& eps, const GarchParams& p,
                                 double init_var);

// Gaussian quasi-log-likelihood conditioned on the first observation:
// -0.5 * sum_{t=2..T} [log(2 pi sigma2_t) + eps_t^2 / sigma2_t].
double gaussian_loglik(const std::vector<double>& eps, const GarchParams& p, double init_var);

// Quasi-ML fit of (alpha0, alpha1, beta1) to a return series. The series is
// demeaned, init_var is its sample variance, and the likelihood is maximized
// by multi-start simplex search over a smooth reparameterization that keeps
// alpha0 > 0, alpha1, beta1 >= 0, alpha1 + beta1 < 1. converged=false marks
// a best-effort result.
GarchFit fit_garch(const std::vector<double>& series);

// eps_t = sigma_t z_t with z_t iid standard Gaussian and
// sigma2_1 = alpha0 / (1 - alpha1 - beta1) (the stationary variance).
std::vector<double> simulate_garch(const GarchParams& p, long long T, Rng& rng);

}  // namespace gm1
