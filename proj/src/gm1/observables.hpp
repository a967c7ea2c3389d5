#pragma once
// Diagnostics over return series and signal traces: the symmetric link
// observable and its chi-curve fit, gap/avalanche statistics, pooled
// histograms with ensemble errors, and small statistical helpers.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace gm1 {

// cosh(r) - 1: non-negative, even, ~r^2/2 near 0.
double symmetric_link(double r);

// Mean of symmetric_link over a non-empty return series.
double lattice_avg_link(const std::vector<double>& series);

double mean(const std::vector<double>& xs);
double sample_variance(const std::vector<double>& xs);  // ddof = 1
double excess_kurtosis(const std::vector<double>& xs);  // m4/m2^2 - 3 (population moments)

// Gap function bookkeeping. The gap is the running minimum of the signal
// trace V(s); every strict decrease after s=0 is a discontinuity x_k
// (x_0 = 0 by convention), and lambda_k = x_k - x_{k-1} is an avalanche
// length. gap_levels holds the value on each plateau, the starting level
// first, so it has one more entry than x.
struct AvalancheRecord {
    std::vector<long long> x;        // discontinuity steps, strictly increasing
    std::vector<long long> lambda;   // avalanche lengths, all positive
    std::vector<double> gap_levels;  // plateau values, strictly decreasing
};

AvalancheRecord gap_and_avalanches(const std::vector<double>& trace);

// Fixed-width binning on an absolute integer grid: the bin holding x is
// k = round(x / bin_width), i.e. bins are centered on integer multiples of
// the width, which aligns bins across pooled sources. `origin` is the left
// edge of counts[0]. `errors` are ensemble standard errors of the pooled
// counts (sqrt(K) * sd of per-source counts; 0 when K = 1).
struct Histogram {
    double bin_width = 1.0;
    double origin = 0.0;
    std::vector<double> counts;
    std::vector<double> errors;

    std::size_t size() const { return counts.size(); }
    double center(std::size_t b) const {
        return origin + (static_cast<double>(b) + 0.5) * bin_width;
    }
    double total() const;
};

// Pooled histogram of avalanche lengths across records.
Histogram avalanche_histogram(const std::vector<AvalancheRecord>& records, double bin_width);

// Pooled histogram of returns across series; a bin is centered at 0.
Histogram gains_histogram(const std::vector<std::vector<double>>& series, double bin_width);

// Merges groups of `merge` adjacent bins (last group may be partial);
// total count is conserved, errors combine in quadrature.
Histogram rebin(const Histogram& h, int merge);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

// Ordinary least squares y = slope*x + intercept; needs >= 2 distinct x.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// Log-log line through positive-count bins with center in [x_min, x_max];
// characterizes power-law decay of a histogram tail.
LinearFit fit_loglog(const Histogram& h, double x_min, double x_max);

// Four-parameter fit y = a1*tanh(a2*(-log10(x) + a3)) + a4 describing the
// order parameter's crossover in chi. Saturation plateaus are a4 +/- a1 and
// the symmetry point is chi* = 10^{a3}.
struct TanhFit {
    double a1 = 0.0;
    double a2 = 0.0;
    double a3 = 0.0;
    double a4 = 0.0;
    double residual = 0.0;  // sum of squared residuals
};

struct TanhFitError : std::runtime_error {
    TanhFit best;
    TanhFitError(const std::string& msg, TanhFit b)
        : std::runtime_error(msg), best(b) {}
};

struct ChiPoint {
    double chi = 0.0;
    double mean_L = 0.0;
    double err = 0.0;
};

// Unweighted least squares via multi-start simplex minimization (heuristic
// starts plus seeded random restarts, then polish passes). Canonical form
// has a2 > 0. Throws TanhFitError carrying the best candidate if no start
// converges.
TanhFit fit_tanh_chi_curve(const std::vector<ChiPoint>& points);

}  // namespace gm1
