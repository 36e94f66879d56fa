#include "dnls/small_divisors.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>

namespace dnls {

namespace {

using Idx = Eigen::Index;

Idx ix(std::size_t i) { return Idx(i); }

double lambda_with_mass(const GridSpec& grid, const Mode& p, double m) { return grid.lambda(p) - grid.mass() + m; }

// All l in Z^n with |l_i| <= cutoff.
std::vector<std::vector<int>> ell_box(int n, int cutoff) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(std::size_t(n), -cutoff);
    while (true) {
        out.push_back(cur);
        int i = n - 1;
        while (i >= 0 && cur[std::size_t(i)] == cutoff) cur[std::size_t(i--)] = -cutoff;
        if (i < 0) break;
        ++cur[std::size_t(i)];
    }
    return out;
}

struct EllTable {
    std::vector<std::vector<int>> ells;
    std::vector<double> dot;     // omega . l
    std::vector<double> weight;  // <l>^tau_star
};

EllTable ell_table(const std::vector<double>& omega, double tau_star, int cutoff) {
    EllTable t;
    t.ells = ell_box(int(omega.size()), cutoff);
    t.dot.reserve(t.ells.size());
    t.weight.reserve(t.ells.size());
    for (const auto& l : t.ells) {
        double dot = 0.0, sq = 1.0;
        for (std::size_t i = 0; i < l.size(); ++i) {
            dot += omega[i] * l[i];
            sq += double(l[i]) * l[i];
        }
        t.dot.push_back(dot);
        t.weight.push_back(std::pow(std::sqrt(sq), tau_star));
    }
    return t;
}

DiophantineReport check_against(const EllTable& t, double m, double gamma) {
    DiophantineReport r;
    r.worst_value = std::numeric_limits<double>::infinity();
    std::size_t worst = 0;
    for (std::size_t i = 0; i < t.dot.size(); ++i) {
        const double v = std::min(std::abs(t.dot[i] + m), std::abs(t.dot[i] - m)) * t.weight[i];
        if (v < r.worst_value) {
            r.worst_value = v;
            worst = i;
        }
    }
    r.worst_ell = t.ells[worst];
    r.pass = r.worst_value >= gamma;
    return r;
}

}  // namespace

int d_star(int d) { return d * (d - 1) / 2 + d; }

std::vector<double> omega_g(const RMatrix& G) {
    std::vector<double> w;
    for (Idx i = 0; i < G.rows(); ++i)
        for (Idx j = i; j < G.cols(); ++j) w.push_back(G(i, j));
    return w;
}

double three_wave(const GridSpec& grid, const Mode& xi, const Mode& k, int sigma, int sigma_p) {
    return grid.lambda(xi + k) + sigma * grid.lambda(xi) + sigma_p * grid.lambda(k);
}

LowerBoundReport certify_lower_bound(const GridSpec& grid, double m, double gamma, double tau, int R) {
    if (R < 1) throw std::invalid_argument("certify_lower_bound: R must be >= 1");
    const auto box = enumerate_box(grid.dim(), R);
    std::vector<double> lam(box.size()), w(box.size());
    for (std::size_t i = 0; i < box.size(); ++i) {
        lam[i] = lambda_with_mass(grid, box[i], m);
        w[i] = std::pow(japanese(box[i]), tau);
    }
    LowerBoundReport rep;
    rep.min_value = std::numeric_limits<double>::infinity();
    for (int sigma : {1, -1})
        for (int sigma_p : {1, -1})
            for (std::size_t a = 0; a < box.size(); ++a)
                for (std::size_t b = 0; b < box.size(); ++b) {
                    const double phi = lambda_with_mass(grid, box[a] + box[b], m) + sigma * lam[a] + sigma_p * lam[b];
                    const double v = std::abs(phi) * w[a] * w[b];
                    if (v < rep.min_value) {
                        rep.min_value = v;
                        rep.xi = box[a];
                        rep.k = box[b];
                        rep.sigma = sigma;
                        rep.sigma_p = sigma_p;
                    }
                }
    rep.pass = rep.min_value >= gamma;
    return rep;
}

double empirical_tau(const GridSpec& grid, double m, double gamma, int R, double tau_hi) {
    auto passes = [&](double tau) { return certify_lower_bound(grid, m, gamma, tau, R).pass; };
    if (passes(0.0)) return 0.0;
    if (!passes(tau_hi)) return std::numeric_limits<double>::infinity();
    double lo = 0.0, hi = tau_hi;
    while (hi - lo > 1e-3) {
        const double mid = 0.5 * (lo + hi);
        (passes(mid) ? hi : lo) = mid;
    }
    return hi;
}

int default_certify_radius(int d) { return d == 1 ? 32 : d == 2 ? 12 : 4; }

DiophantineReport diophantine_check(double m, const std::vector<double>& omega, double gamma, double tau_star, int ell_cutoff) {
    return check_against(ell_table(omega, tau_star, ell_cutoff), m, gamma);
}

bool diophantine_test(double m, const std::vector<double>& omega, double gamma, double tau_star, int ell_cutoff) {
    return diophantine_check(m, omega, gamma, tau_star, ell_cutoff).pass;
}

void ScanConfig::validate(int d) const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("ScanConfig: gamma must lie in (0, 1)");
    if (tau_star != 0.0 && tau_star < d_star(d)) throw std::invalid_argument("ScanConfig: tau_star must be >= d_star");
    if (ell_cutoff < 1) throw std::invalid_argument("ScanConfig: ell_cutoff must be positive");
    if (!(mass_lo >= 0.0 && mass_hi > mass_lo)) throw std::invalid_argument("ScanConfig: need 0 <= mass_lo < mass_hi");
    if (mass_count < 1) throw std::invalid_argument("ScanConfig: mass_count must be positive");
}

std::vector<MassScanRow> mass_scan(const ScanConfig& cfg, const std::vector<double>& omega, int d) {
    cfg.validate(d);
    const EllTable t = ell_table(omega, cfg.tau_for(d), cfg.ell_cutoff);
    std::vector<MassScanRow> rows(std::size_t(cfg.mass_count));
#pragma omp parallel for schedule(static)
    for (int i = 0; i < cfg.mass_count; ++i) {
        const double m = cfg.mass(i);
        rows[std::size_t(i)] = {m, check_against(t, m, cfg.gamma)};
    }
    return rows;
}

double excluded_measure_scan(const ScanConfig& cfg, const std::vector<double>& omega, int d) {
    const auto rows = mass_scan(cfg, omega, d);
    const auto failed = std::count_if(rows.begin(), rows.end(), [](const MassScanRow& r) { return !r.report.pass; });
    return double(failed) / double(rows.size());
}

RMatrix generic_metric(int d, double m, const ScanConfig& cfg, std::uint64_t seed, double amplitude) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pert(-amplitude, amplitude);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        RMatrix G = RMatrix::Identity(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j) {
                const double e = pert(rng);
                G(i, j) += e;
                if (i != j) G(j, i) += e;
            }
        if (G.llt().info() != Eigen::Success) continue;
        if (diophantine_test(m, omega_g(G), cfg.gamma, cfg.tau_for(d), cfg.ell_cutoff)) return G;
    }
    throw std::runtime_error("generic_metric: no admissible metric after 1000 draws");
}

// ---- Birkhoff homological equation ------------------------------------------------

namespace {

std::string describe(const Mode& k, const Mode& xi, int d) {
    std::string s = "zero divisor at k=(";
    for (int i = 0; i < d; ++i) s += (i ? "," : "") + std::to_string(k[std::size_t(i)]);
    s += "), xi=(";
    for (int i = 0; i < d; ++i) s += (i ? "," : "") + std::to_string(xi[std::size_t(i)]);
    return s + ")";
}

}  // namespace

ZeroDivisorError::ZeroDivisorError(const Mode& k_in, const Mode& xi_in, int d)
    : std::runtime_error(describe(k_in, xi_in, d)), k(k_in), xi(xi_in) {}

CMatrix bilinear_apply(const GridSpec& grid, const CMatrix& table, const Field& v) {
    const std::size_t N = grid.size();
    CMatrix out = CMatrix::Zero(ix(N), ix(N));
    for (std::size_t k = 0; k < N; ++k)
        for (std::size_t x = 0; x < N; ++x) {
            const auto n = grid.index_of(grid.mode(k) - grid.mode(x));
            if (n) out(ix(k), ix(x)) = table(ix(k), ix(x)) * v[*n];
        }
    return out;
}

CMatrix birkhoff_F(const CMatrix& r, int sigma, int sigma_p, const GridSpec& grid) {
    const std::size_t N = grid.size();
    if (r.rows() != ix(N) || r.cols() != ix(N)) throw std::invalid_argument("birkhoff_F: table must be N x N");
    CMatrix f = CMatrix::Zero(ix(N), ix(N));
    for (std::size_t k = 0; k < N; ++k)
        for (std::size_t x = 0; x < N; ++x) {
            const Mode& mk = grid.mode(k);
            const Mode& mx = grid.mode(x);
            if (!grid.in_box(mk - mx)) continue;
            const double lk = grid.lambda(mk), ln = grid.lambda(mk - mx), lx = grid.lambda(mx);
            const double div = lk + sigma * ln + sigma_p * lx;
            if (std::abs(div) <= 1e-12 * (lk + ln + lx)) throw ZeroDivisorError(mk, mx, grid.dim());
            f(ix(k), ix(x)) = -r(ix(k), ix(x)) / (kI * div);
        }
    return f;
}

LinearFamily::LinearFamily(GridSpec g)
    : grid(std::move(g)),
      t11_u(CMatrix::Zero(ix(grid.size()), ix(grid.size()))),
      t11_ubar(t11_u),
      t12_u(t11_u),
      t12_ubar(t11_u) {}

PairLinOp LinearFamily::at(const PairField& U) const {
    return PairLinOp(grid, bilinear_apply(grid, t11_u, U.u) + bilinear_apply(grid, t11_ubar, U.ubar),
                     bilinear_apply(grid, t12_u, U.u) + bilinear_apply(grid, t12_ubar, U.ubar));
}

LinearFamily birkhoff_matrix_solve(const LinearFamily& R) {
    LinearFamily F(R.grid);
    F.t11_u = birkhoff_F(R.t11_u, -1, -1, R.grid);
    F.t11_ubar = birkhoff_F(R.t11_ubar, 1, -1, R.grid);
    F.t12_u = birkhoff_F(R.t12_u, -1, 1, R.grid);
    F.t12_ubar = birkhoff_F(R.t12_ubar, 1, 1, R.grid);
    return F;
}

PairField linear_flow_field(const PairField& U) {
    const GridSpec& g = U.u.grid;
    return PairField(kI * apply_multiplier(U.u, [&g](const Mode& p) { return cplx(g.lambda(p)); }));
}

double birkhoff_residual(const LinearFamily& R, const LinearFamily& F, const PairField& U) {
    const GridSpec& g = R.grid;
    const CMatrix L = linear_pair_operator(g);
    const CMatrix FU = F.at(U).dense();
    const CMatrix RU = R.at(U).dense();
    const CMatrix lhs = -F.at(linear_flow_field(U)).dense() + L * FU - FU * L + RU;
    const double scale = RU.cwiseAbs().maxCoeff();
    return scale > 0.0 ? lhs.cwiseAbs().maxCoeff() / scale : lhs.cwiseAbs().maxCoeff();
}

void write_scan_summary_csv(std::ostream& os, double gamma, double excluded_fraction) {
    os << "gamma,excluded_fraction\n" << std::setprecision(17) << gamma << ',' << excluded_fraction << '\n';
}

void write_mass_scan_csv(std::ostream& os, const std::vector<MassScanRow>& rows) {
    const std::size_t n = rows.empty() ? 0 : rows.front().report.worst_ell.size();
    os << "m,pass";
    for (std::size_t i = 1; i <= n; ++i) os << ",worst_l_" << i;
    os << ",worst_value\n" << std::setprecision(17);
    for (const auto& r : rows) {
        os << r.m << ',' << (r.report.pass ? 1 : 0);
        for (int l : r.report.worst_ell) os << ',' << l;
        os << ',' << r.report.worst_value << '\n';
    }
}

}  // namespace dnls
