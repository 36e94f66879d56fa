#include "dnls/evolution.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <random>

namespace dnls {

void SimConfig::validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("SimConfig: dt must be positive");
    if (!(t_max >= 0.0)) throw std::invalid_argument("SimConfig: t_max must be non-negative");
    if (!(rho >= 1.0)) throw std::invalid_argument("SimConfig: rho must be >= 1");
    for (double s : s_high)
        if (!(s >= rho)) throw std::invalid_argument("SimConfig: every high index must be >= rho");
    if (!(blowup_factor > 1.0)) throw std::invalid_argument("SimConfig: blowup_factor must exceed 1");
    if (record_stride < 1) throw std::invalid_argument("SimConfig: record_stride must be >= 1");
}

Integrator::Integrator(GridSpec grid, CubicDensity f)
    : grid_(grid), linear_only_(f.polynomial().is_zero()), eval_(std::move(grid), std::move(f)) {}

Field Integrator::half_linear(const Field& u, double dt) const {
    return apply_multiplier(u, [&](const Mode& p) { return std::exp(-kI * grid_.lambda(p) * (0.5 * dt)); });
}

Field Integrator::nonlinear_rhs(const Field& u) { return cplx(0.0, -1.0) * eval_.eval_Q(u); }

Field Integrator::step(const Field& u, double dt) {
    Field v = half_linear(u, dt);
    if (!linear_only_) {
        const Field k1 = nonlinear_rhs(v);
        const Field k2 = nonlinear_rhs(v + cplx(0.5 * dt) * k1);
        const Field k3 = nonlinear_rhs(v + cplx(0.5 * dt) * k2);
        const Field k4 = nonlinear_rhs(v + cplx(dt) * k3);
        v += cplx(dt / 6.0) * (k1 + cplx(2.0) * k2 + cplx(2.0) * k3 + k4);
    }
    Field out = half_linear(v, dt);
    if (!out.coeffs.allFinite()) throw NumericalBlowup("non-finite coefficients");
    return out;
}

Field step(const Field& u, const CubicDensity& f, double dt) { return Integrator(u.grid, f).step(u, dt); }

std::string to_string(ExitKind e) {
    switch (e) {
        case ExitKind::completed: return "completed";
        case ExitKind::norm_exceeded: return "norm_exceeded";
        case ExitKind::blowup: return "blowup";
    }
    return "?";
}

Trajectory run(const Field& u0, const CubicDensity& f, const SimConfig& cfg) {
    cfg.validate();
    f.require_valid();
    Integrator integ(u0.grid, f);
    Trajectory tr;
    tr.eps = sobolev_norm(u0, cfg.rho);
    const double limit = cfg.blowup_factor * tr.eps;

    auto record = [&](double t, const Field& u) {
        tr.times.push_back(t);
        tr.low_norms.push_back(sobolev_norm(u, cfg.rho));
        std::vector<double> hi;
        for (double s : cfg.s_high) hi.push_back(sobolev_norm(u, s));
        tr.high_norms.push_back(std::move(hi));
        tr.hamiltonian.push_back(hamiltonian(f, u));
    };

    Field u = u0;
    record(0.0, u);
    const long n_steps = long(std::ceil(cfg.t_max / cfg.dt - 1e-9));
    for (long n = 1; n <= n_steps; ++n) {
        const double t = std::min(cfg.t_max, double(n) * cfg.dt);
        try {
            u = integ.step(u, t - double(n - 1) * cfg.dt);
        } catch (const NumericalBlowup&) {
            tr.exit = ExitKind::blowup;
            tr.exit_time = tr.times.back();
            return tr;
        }
        if (n % cfg.record_stride != 0 && n != n_steps) continue;
        record(t, u);
        const double now = tr.low_norms.back();
        if (now > limit) {
            const std::size_t i = tr.times.size() - 1;
            const double before = tr.low_norms[i - 1];
            const double w = (limit - before) / (now - before);
            tr.exit = ExitKind::norm_exceeded;
            tr.exit_time = tr.times[i - 1] + w * (tr.times[i] - tr.times[i - 1]);
            return tr;
        }
    }
    tr.exit_time = tr.times.back();
    return tr;
}

Field shaped_initial_data(const GridSpec& grid, double rho, double eps, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    const int band = std::max(1, grid.K() / 4);
    Field f(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Mode& p = grid.mode(i);
        const double th = phase(rng);  // drawn for every mode so the stream is shape independent
        bool inside = true;
        for (int j = 0; j < grid.dim(); ++j) inside = inside && std::abs(p[std::size_t(j)]) <= band;
        if (inside) f[i] = std::pow(japanese(p), -rho - 1.0) * std::exp(kI * th);
    }
    f *= eps / sobolev_norm(f, rho);
    return f;
}

LifespanStudy lifespan_study(const GridSpec& grid, const CubicDensity& f, const SimConfig& cfg,
                             const std::vector<double>& eps_list, int seeds, std::uint64_t base_seed,
                             double t_max_factor) {
    cfg.validate();
    for (std::size_t i = 1; i < eps_list.size(); ++i)
        if (!(eps_list[i] < eps_list[i - 1])) throw std::invalid_argument("lifespan_study: eps_list must be decreasing");
    if (seeds < 1) throw std::invalid_argument("lifespan_study: need at least one seed");

    const int n_eps = int(eps_list.size());
    std::vector<LifespanRow> rows(std::size_t(n_eps * seeds));
#pragma omp parallel for schedule(dynamic)
    for (int task = 0; task < n_eps * seeds; ++task) {
        const int e = task / seeds, sd = task % seeds;
        const double eps = eps_list[std::size_t(e)];
        SimConfig c = cfg;
        c.t_max = t_max_factor / (eps * eps);
        const Field u0 = shaped_initial_data(grid, cfg.rho, eps, base_seed + std::uint64_t(sd));
        const Trajectory tr = run(u0, f, c);
        LifespanRow r;
        r.eps = eps;
        r.seed_index = sd;
        r.t_max = c.t_max;
        r.censored = tr.exit == ExitKind::completed;
        r.t_star = r.censored ? c.t_max : tr.exit_time;
        for (std::size_t i = 0; i < tr.times.size(); ++i) {
            r.max_low_ratio = std::max(r.max_low_ratio, tr.low_norms[i] / tr.eps);
            for (std::size_t j = 0; j < cfg.s_high.size(); ++j)
                r.max_high_ratio = std::max(r.max_high_ratio, tr.high_norms[i][j] / tr.high_norms[0][j]);
        }
        rows[std::size_t(task)] = r;
    }

    LifespanStudy st;
    st.rows = rows;
    for (const auto& r : rows)
        if (!r.censored) st.empirical_c.push_back(r.t_star * r.eps * r.eps);
    for (int e = 1; e < n_eps; ++e)
        for (int sd = 0; sd < seeds; ++sd) {
            const auto& small = rows[std::size_t(e * seeds + sd)];
            const auto& big = rows[std::size_t((e - 1) * seeds + sd)];
            if (std::abs(big.eps - 2.0 * small.eps) > 1e-12 * big.eps) continue;
            if (small.censored || big.censored) continue;
            st.ratios.push_back({small.eps, sd, small.t_star / big.t_star});
        }
    return st;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& tr, const SimConfig& cfg) {
    os << "t,low_norm";
    for (double s : cfg.s_high) os << ",high_norm_" << s;
    os << ",H\n" << std::setprecision(17);
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        os << tr.times[i] << ',' << tr.low_norms[i];
        for (double v : tr.high_norms[i]) os << ',' << v;
        os << ',' << tr.hamiltonian[i] << '\n';
    }
}

void write_study_csv(std::ostream& os, const LifespanStudy& st) {
    os << "eps,seed,t_max,T_star,censored,max_low_ratio,max_high_ratio\n" << std::setprecision(17);
    for (const auto& r : st.rows)
        os << r.eps << ',' << r.seed_index << ',' << r.t_max << ',' << r.t_star << ',' << (r.censored ? 1 : 0) << ','
           << r.max_low_ratio << ',' << r.max_high_ratio << '\n';
}

}  // namespace dnls
