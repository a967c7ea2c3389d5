#include "gm1/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "gm1/neldermead.hpp"
#include "gm1/rng.hpp"

namespace gm1 {

double symmetric_link(double r) { return std::cosh(r) - 1.0; }

double lattice_avg_link(const std::vector<double>& series) {
    if (series.empty()) throw std::invalid_argument("average link of an empty series");
    double s = 0.0;
    for (double r : series) s += symmetric_link(r);
    return s / static_cast<double>(series.size());
}

double mean(const std::vector<double>& xs) {
    if (xs.empty()) throw std::invalid_argument("mean of an empty series");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double sample_variance(const std::vector<double>& xs) {
    if (xs.size() < 2) throw std::invalid_argument("sample variance needs >= 2 values");
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
}

double excess_kurtosis(const std::vector<double>& xs) {
    if (xs.size() < 4) throw std::invalid_argument("kurtosis needs >= 4 values");
    const double m = mean(xs);
    double m2 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d = x - m;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= static_cast<double>(xs.size());
    m4 /= static_cast<double>(xs.size());
    if (m2 <= 0.0) throw std::domain_error("kurtosis of a constant series");
    return m4 / (m2 * m2) - 3.0;
}

AvalancheRecord gap_and_avalanches(const std::vector<double>& trace) {
    if (trace.empty()) throw std::invalid_argument("empty signal trace");
    AvalancheRecord rec;
    double g = trace[0];
    rec.gap_levels.push_back(g);
    long long prev_x = 0;
    for (long long s = 1; s < static_cast<long long>(trace.size()); ++s) {
        if (trace[static_cast<std::size_t>(s)] < g) {
            g = trace[static_cast<std::size_t>(s)];
            rec.x.push_back(s);
            rec.lambda.push_back(s - prev_x);
            rec.gap_levels.push_back(g);
            prev_x = s;
        }
    }
    return rec;
}

double Histogram::total() const {
    double s = 0.0;
    for (double c : counts) s += c;
    return s;
}

namespace {

// Per-source counts on the shared integer grid k = round(x / bin_width).
using BinMap = std::map<long long, double>;

void accumulate(BinMap& m, double x, double bin_width) { m[std::llround(x / bin_width)] += 1.0; }

Histogram pool_sources(const std::vector<BinMap>& sources, double bin_width) {
    Histogram h;
    h.bin_width = bin_width;
    long long k_min = std::numeric_limits<long long>::max();
    long long k_max = std::numeric_limits<long long>::min();
    for (const BinMap& m : sources) {
        if (m.empty()) continue;
        k_min = std::min(k_min, m.begin()->first);
        k_max = std::max(k_max, m.rbegin()->first);
    }
    if (k_min > k_max) return h;  // no samples anywhere
    const std::size_t nbins = static_cast<std::size_t>(k_max - k_min + 1);
    h.origin = (static_cast<double>(k_min) - 0.5) * bin_width;
    h.counts.assign(nbins, 0.0);
    h.errors.assign(nbins, 0.0);
    for (const BinMap& m : sources)
        for (const auto& [k, c] : m) h.counts[static_cast<std::size_t>(k - k_min)] += c;
    const std::size_t n_src = sources.size();
    if (n_src >= 2) {
        for (std::size_t b = 0; b < nbins; ++b) {
            const double mu = h.counts[b] / static_cast<double>(n_src);
            double ss = 0.0;
            for (const BinMap& m : sources) {
                const auto it = m.find(k_min + static_cast<long long>(b));
                const double c = it == m.end() ? 0.0 : it->second;
                ss += (c - mu) * (c - mu);
            }
            const double var = ss / static_cast<double>(n_src - 1);
            h.errors[b] = std::sqrt(static_cast<double>(n_src) * var);
        }
    }
    return h;
}

}  // namespace

Histogram avalanche_histogram(const std::vector<AvalancheRecord>& records, double bin_width) {
    if (records.empty()) throw std::invalid_argument("avalanche histogram needs >= 1 record");
    if (!(bin_width > 0.0)) throw std::invalid_argument("bin width must be positive");
    std::vector<BinMap> sources(records.size());
    for (std::size_t i = 0; i < records.size(); ++i)
        for (long long lam : records[i].lambda)
            accumulate(sources[i], static_cast<double>(lam), bin_width);
    return pool_sources(sources, bin_width);
}

Histogram gains_histogram(const std::vector<std::vector<double>>& series, double bin_width) {
    if (series.empty()) throw std::invalid_argument("gains histogram needs >= 1 series");
    if (!(bin_width > 0.0)) throw std::invalid_argument("bin width must be positive");
    std::vector<BinMap> sources(series.size());
    for (std::size_t i = 0; i < series.size(); ++i)
        for (double r : series[i]) accumulate(sources[i], r, bin_width);
    return pool_sources(sources, bin_width);
}

Histogram rebin(const Histogram& h, int merge) {
    if (merge < 1) throw std::invalid_argument("merge factor must be >= 1");
    Histogram out;
    out.bin_width = h.bin_width * merge;
    out.origin = h.origin;
    const std::size_t nb = (h.size() + static_cast<std::size_t>(merge) - 1) /
                           static_cast<std::size_t>(merge);
    out.counts.assign(nb, 0.0);
    out.errors.assign(nb, 0.0);
    for (std::size_t b = 0; b < h.size(); ++b) {
        const std::size_t g = b / static_cast<std::size_t>(merge);
        out.counts[g] += h.counts[b];
        out.errors[g] += h.errors[b] * h.errors[b];
    }
    for (double& e : out.errors) e = std::sqrt(e);
    return out;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("linear fit needs >= 2 paired points");
    const double xm = mean(x), ym = mean(y);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - xm) * (x[i] - xm);
        sxy += (x[i] - xm) * (y[i] - ym);
        syy += (y[i] - ym) * (y[i] - ym);
    }
    if (sxx <= 0.0) throw std::invalid_argument("linear fit needs distinct x values");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = ym - f.slope * xm;
    f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

LinearFit fit_loglog(const Histogram& h, double x_min, double x_max) {
    std::vector<double> lx, ly;
    for (std::size_t b = 0; b < h.size(); ++b) {
        const double c = h.center(b);
        if (c < x_min || c > x_max || c <= 0.0 || h.counts[b] <= 0.0) continue;
        lx.push_back(std::log(c));
        ly.push_back(std::log(h.counts[b]));
    }
    if (lx.size() < 2)
        throw std::invalid_argument("log-log fit needs >= 2 positive-count bins in range");
    return linear_fit(lx, ly);
}

namespace {

double tanh_model(const std::vector<double>& a, double t) {
    return a[0] * std::tanh(a[1] * (t + a[2])) + a[3];
}

}  // namespace

TanhFit fit_tanh_chi_curve(const std::vector<ChiPoint>& points) {
    if (points.size() < 5) throw std::invalid_argument("tanh fit needs >= 5 points");
    std::vector<double> t, y;
    for (const ChiPoint& p : points) {
        if (!(p.chi > 0.0)) throw std::domain_error("tanh fit needs chi > 0");
        t.push_back(-std::log10(p.chi));
        y.push_back(p.mean_L);
    }
    const auto ssr = [&](const std::vector<double>& a) {
        double s = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double d = y[i] - tanh_model(a, t[i]);
            s += d * d;
        }
        return s;
    };

    const double y_max = *std::max_element(y.begin(), y.end());
    const double y_min = *std::min_element(y.begin(), y.end());
    const double t_max = *std::max_element(t.begin(), t.end());
    const double t_min = *std::min_element(t.begin(), t.end());
    const double a1h = 0.5 * (y_max - y_min);
    const double a4h = 0.5 * (y_max + y_min);

    // Mid-level crossing in t, if the data actually crosses its mid level.
    std::vector<std::size_t> idx(t.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return t[a] < t[b]; });
    double t_cross = 0.5 * (t_min + t_max);
    for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
        const double y0 = y[idx[i]], y1 = y[idx[i + 1]];
        if ((y0 - a4h) * (y1 - a4h) <= 0.0 && y0 != y1) {
            const double w = (a4h - y0) / (y1 - y0);
            t_cross = t[idx[i]] + w * (t[idx[i + 1]] - t[idx[i]]);
            break;
        }
    }

    std::vector<std::vector<double>> starts;
    for (double a2 : {0.5, 1.0, 2.0}) starts.push_back({a1h, a2, -t_cross, a4h});
    // The symmetry point may sit outside the sampled decade window.
    for (double a3 : {-(t_min - 1.0), -(t_min - 3.0), -(t_max + 1.0), -(t_max + 3.0)})
        starts.push_back({a1h, 1.0, a3, a4h});

    NelderMeadOptions opt;
    opt.initial_step = 0.5;
    opt.f_tol = 1e-15;
    opt.x_tol = 1e-13;
    opt.max_iter = 20000;

    NelderMeadResult best;
    best.fval = std::numeric_limits<double>::infinity();
    bool any_converged = false;
    auto consider = [&](const std::vector<double>& x0) {
        NelderMeadResult r = nelder_mead(ssr, x0, opt);
        any_converged = any_converged || r.converged;
        if (r.fval < best.fval) best = r;
    };
    for (const auto& s : starts) consider(s);

    // Seeded random restarts around the incumbent.
    Rng restart_rng(0x5EEDF17ull);
    const double a3_scale = 0.5 * (t_max - t_min) + 2.0;
    for (int k = 0; k < 5; ++k) {
        std::vector<double> x0 = best.x;
        x0[0] += restart_rng.uniform_sym(std::max(a1h, 0.05));
        x0[1] += restart_rng.uniform_sym(1.0);
        x0[2] += restart_rng.uniform_sym(a3_scale);
        x0[3] += restart_rng.uniform_sym(std::max(a1h, 0.05));
        consider(x0);
    }
    // Polish passes with shrinking steps.
    for (double step : {0.1, 0.01, 0.001}) {
        NelderMeadOptions popt = opt;
        popt.initial_step = step;
        NelderMeadResult r = nelder_mead(ssr, best.x, popt);
        any_converged = any_converged || r.converged;
        if (r.fval < best.fval) best = r;
    }

    TanhFit fit;
    fit.a1 = best.x[0];
    fit.a2 = best.x[1];
    fit.a3 = best.x[2];
    fit.a4 = best.x[3];
    fit.residual = best.fval;
    if (fit.a2 < 0.0) {  // tanh is odd: (a1,a2) and (-a1,-a2) are the same curve
        fit.a1 = -fit.a1;
        fit.a2 = -fit.a2;
    }
    if (!any_converged || !std::isfinite(fit.residual))
        throw TanhFitError("tanh fit did not converge", fit);
    return fit;
}

}  // namespace gm1
