#include "gm1/lattice.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gm1 {

LadderLattice LadderLattice::random_init(int n, double spread, Rng& rng) {
    if (n < 4) {
        throw std::invalid_argument("lattice size must be >= 4 (update stencil spans 4 slices)");
    }
    if (spread < 0.0) {
        throw std::invalid_argument("spread must be positive");
    }
    LadderLattice lat;
    lat.n_ = n;
    for (int i = 0; i < 2; ++i) {
        lat.theta0_[i].resize(n);
        lat.phi_[i].resize(n);
    }
    lat.theta1_.resize(n);
    // Fixed draw order so a seed pins the configuration.
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < n; ++j) lat.theta0_[i][j] = rng.uniform_sym(spread);
    for (int j = 0; j < n; ++j) lat.theta1_[j] = rng.uniform_sym(spread);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < n; ++j) lat.phi_[i][j] = rng.uniform_sym(spread);
    return lat;
}

void LadderLattice::set_theta0(int i, int j, double v) {
    if (axis_frozen_ && i == 0) {
        throw std::logic_error("cash-axis temporal links are frozen");
    }
    theta0_[i][mod(j)] = v;
}

void LadderLattice::set_phi(int i, int j, double v) {
    if (axis_frozen_ && i == 0) {
        throw std::logic_error("cash-rail matter fields are frozen");
    }
    phi_[i][mod(j)] = v;
}

double LadderLattice::plaquette(int j) const {
    const int jj = mod(j);
    const int jp = mod(j + 1);
    return std::exp(theta1_[jj] + theta0_[1][jj] - theta1_[jp] - theta0_[0][jj]);
}

double LadderLattice::gauge_link(Site x, int mu) const {
    const int j = mod(x.j);
    if (mu == 0) {
        if (x.i != 0 && x.i != 1) throw std::invalid_argument("rail index must be 0 or 1");
        return std::exp(-phi_[x.i][j] + theta0_[x.i][j] + phi_[x.i][mod(x.j + 1)]);
    }
    if (mu == 1) {
        if (x.i != 0) {
            throw std::invalid_argument("rungs exist only from the cash rail (i=0)");
        }
        return std::exp(-phi_[0][j] + theta1_[j] + phi_[1][j]);
    }
    throw std::invalid_argument("direction must be 0 (time) or 1 (rung)");
}

double LadderLattice::log_return(int j) const {
    const int jm = mod(j - 1);
    return -phi_[1][jm] + theta0_[1][jm] + phi_[1][mod(j)];
}

std::vector<double> LadderLattice::returns_series() const {
    std::vector<double> r(n_);
    for (int j = 0; j < n_; ++j) r[j] = log_return(j);
    return r;
}

double LadderLattice::action(const Couplings& c) const {
    const double d = c.d_plus;
    const double db = c.d_bar_plus;
    double s = 0.0;
    for (int j = 0; j < n_; ++j) {
        const int jp = mod(j + 1);
        // Plaquette term P + 1/P - 2 in log form.
        const double q = theta1_[j] + theta0_[1][j] - theta1_[jp] - theta0_[0][j];
        s += std::exp(q) + std::exp(-q) - 2.0;
        // Temporal hop links on both rails.
        for (int i = 0; i < 2; ++i) {
            const double r = -phi_[i][j] + theta0_[i][j] + phi_[i][jp];
            s += d * std::exp(r) + db * std::exp(-r) - (d + db);
        }
        // Rung hop link.
        const double g = -phi_[0][j] + theta1_[j] + phi_[1][j];
        s += d * std::exp(g) + db * std::exp(-g) - (d + db);
    }
    return s;
}

void LadderLattice::apply_gauge(const GaugeTransform& g) {
    if (static_cast<int>(g.h0.size()) != n_ || static_cast<int>(g.h1.size()) != n_) {
        throw std::invalid_argument("gauge function size mismatch");
    }
    const std::vector<double>* h[2] = {&g.h0, &g.h1};
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < n_; ++j) {
            const int jp = mod(j + 1);
            theta0_[i][j] += (*h[i])[j] - (*h[i])[jp];
        }
    }
    for (int j = 0; j < n_; ++j) theta1_[j] += g.h0[j] - g.h1[j];
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < n_; ++j) phi_[i][j] += (*h[i])[j];
}

void LadderLattice::fix_cash_axis(double rho) {
    if (axis_frozen_) throw std::logic_error("cash axis already frozen");
    if (rho < 1.0) throw std::invalid_argument("interest factor must be >= 1");
    GaugeTransform g;
    g.h0.resize(n_);
    g.h1.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j) g.h0[j] = -phi_[0][j];
    apply_gauge(g);
    const double log_rho = std::log(rho);
    for (int j = 0; j < n_; ++j) theta0_[0][j] = log_rho;
    rho_ = rho;
    axis_frozen_ = true;
}

void LadderLattice::anchor_asset_gauge() {
    GaugeTransform g;
    g.h0.assign(n_, 0.0);
    g.h1.resize(n_);
    for (int j = 0; j < n_; ++j) g.h1[j] = -phi_[1][j];
    apply_gauge(g);
}

namespace {
std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
}  // namespace

std::string LadderLattice::snapshot_text() const {
    std::ostringstream out;
    out << "gm1 n=" << n_ << " frozen=" << (axis_frozen_ ? 1 : 0)
        << " rho=" << format_value(rho_) << "\n";
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < n_; ++j)
            out << "theta0 " << i << " " << j << " " << format_value(theta0_[i][j]) << "\n";
    for (int j = 0; j < n_; ++j)
        out << "theta1 0 " << j << " " << format_value(theta1_[j]) << "\n";
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < n_; ++j)
            out << "phi " << i << " " << j << " " << format_value(phi_[i][j]) << "\n";
    return out.str();
}

void LadderLattice::save_snapshot(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open snapshot file for writing: " + path);
    f << snapshot_text();
    if (!f) throw std::runtime_error("snapshot write failed: " + path);
}

LadderLattice LadderLattice::parse_snapshot(const std::string& text) {
    std::istringstream in(text);
    std::string magic;
    in >> magic;
    if (magic != "gm1") throw std::runtime_error("bad snapshot header");
    std::string tok;
    int n = -1, frozen = -1;
    double rho = 1.0;
    for (int k = 0; k < 3; ++k) {
        in >> tok;
        if (tok.rfind("n=", 0) == 0) n = std::stoi(tok.substr(2));
        else if (tok.rfind("frozen=", 0) == 0) frozen = std::stoi(tok.substr(7));
        else if (tok.rfind("rho=", 0) == 0) rho = std::stod(tok.substr(4));
        else throw std::runtime_error("bad snapshot header field: " + tok);
    }
    if (n < 4 || frozen < 0) throw std::runtime_error("incomplete snapshot header");
    LadderLattice lat;
    lat.n_ = n;
    for (int i = 0; i < 2; ++i) {
        lat.theta0_[i].assign(n, 0.0);
        lat.phi_[i].assign(n, 0.0);
    }
    lat.theta1_.assign(n, 0.0);
    std::string kind;
    int i = 0, j = 0;
    double v = 0.0;
    while (in >> kind >> i >> j >> v) {
        if (j < 0 || j >= n || i < 0 || i > 1) throw std::runtime_error("snapshot index out of range");
        if (kind == "theta0") lat.theta0_[i][j] = v;
        else if (kind == "theta1" && i == 0) lat.theta1_[j] = v;
        else if (kind == "phi") lat.phi_[i][j] = v;
        else throw std::runtime_error("bad snapshot record kind: " + kind);
    }
    lat.rho_ = rho;
    lat.axis_frozen_ = (frozen != 0);
    return lat;
}

LadderLattice LadderLattice::load_snapshot(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open snapshot file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_snapshot(buf.str());
}

}  // namespace gm1
