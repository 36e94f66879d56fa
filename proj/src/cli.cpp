#include "dnls/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "json.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dnls {

namespace {

using Idx = Eigen::Index;
using nlohmann::json;

double bracket(std::span<const double> xi) {
    double s = 1.0;
    for (double v : xi) s += v * v;
    return std::sqrt(s);
}

std::span<const double> fiber(const std::array<double, kMaxDim>& xi, int d) { return {xi.data(), std::size_t(d)}; }

double remainder_norm(const OperatorDecomposition& P, double s) {
    return pair_operator_norm(P.grid(), P.remainder.dense(), s, s + 1.0);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string join(const std::vector<double>& v) {
    std::ostringstream os;
    os << std::setprecision(17);
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
    return os.str();
}

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    os << text;
}

}  // namespace

// ---- normal-form driver -----------------------------------------------------------

OperatorDecomposition linearized_pipeline(const OperatorDecomposition& P, const NFParams& p, int n_steps) {
    OperatorDecomposition Q = P;
    for (int i = 0; i < n_steps; ++i) Q = conjugate_linearized(Q, diag_generator(Q));
    for (int i = 0; i < n_steps; ++i) Q = conjugate_linearized(Q, nf_generator(Q, p));
    return Q;
}

LinearFamily linear_remainder_family(const CubicDensity& f, const GridSpec& grid, const NFParams& p, int n_steps) {
    // Entry (j, k) of the remainder depends on U only through u^(j-k) and
    // ubar^(j-k), so probing with e_n and i e_n fills the diagonals j - k = +-n.
    const Idx N = Idx(grid.size());
    LinearFamily F(grid);
    F.t11_u = F.t11_ubar = F.t12_u = F.t12_ubar = CMatrix::Zero(N, N);
    auto probe = [&](const Mode& n, cplx c) {
        const PairField U(Field::single_mode(grid, n, c));
        return linearized_pipeline(OperatorDecomposition::paralinearized(f, U), p, n_steps).remainder;
    };
    for (std::size_t ni = 0; ni < grid.size(); ++ni) {
        const Mode& n = grid.mode(ni);
        const PairLinOp D1 = probe(n, 1.0), Di = probe(n, kI);
        for (std::size_t j = 0; j < grid.size(); ++j)
            for (std::size_t k = 0; k < grid.size(); ++k) {
                const Mode diff = grid.mode(j) - grid.mode(k);
                const Idx r = Idx(j), c = Idx(k);
                if (diff == n) {
                    F.t11_u(r, c) = 0.5 * (D1.A11(r, c) - kI * Di.A11(r, c));
                    F.t12_u(r, c) = 0.5 * (D1.A12(r, c) - kI * Di.A12(r, c));
                }
                if (diff == -n) {
                    F.t11_ubar(r, c) = 0.5 * (D1.A11(r, c) + kI * Di.A11(r, c));
                    F.t12_ubar(r, c) = 0.5 * (D1.A12(r, c) + kI * Di.A12(r, c));
                }
            }
    }
    return F;
}

bool NormalFormRun::offdiag_monotone() const {
    for (const auto& r : steps)
        if (r.kind == StepKind::diag && r.after.offdiag > r.before.offdiag) return false;
    return true;
}

bool NormalFormRun::non_normal_monotone() const {
    for (const auto& r : steps)
        if (r.kind == StepKind::nf && r.after.non_normal > r.before.non_normal) return false;
    return true;
}

double NormalFormRun::linear_drop() const {
    if (!birkhoff_done) return 0.0;
    return linear_remainder_before / std::max(linear_remainder_after, std::numeric_limits<double>::min());
}

std::string NormalFormRun::to_json() const {
    auto norms = [](const StepNorms& n) {
        return json{{"offdiag", n.offdiag}, {"non_normal", n.non_normal}, {"remainder", n.remainder}};
    };
    json j{{"initial", norms(initial)}, {"steps", json::array()}};
    for (const auto& r : steps) j["steps"].push_back(json::parse(r.to_json()));
    j["birkhoff_done"] = birkhoff_done;
    j["linear_remainder_before"] = linear_remainder_before;
    j["linear_remainder_after"] = linear_remainder_after;
    j["linear_drop"] = linear_drop();
    j["birkhoff_identity_residual"] = birkhoff_identity_residual;
    j["offdiag_monotone"] = offdiag_monotone();
    j["non_normal_monotone"] = non_normal_monotone();
    j["error"] = error;
    return j.dump(2);
}

NormalFormRun run_normal_form(const CubicDensity& f, const PairField& U, const NFParams& p, int n_steps, double s) {
    if (n_steps < 0) throw std::invalid_argument("run_normal_form: n_steps must be >= 0");
    const GridSpec& g = U.u.grid;
    p.validate(g.dim());
    NormalFormRun run;
    const OperatorDecomposition P0 = OperatorDecomposition::paralinearized(f, U);
    run.initial = measure(P0, p, s);
    if (n_steps == 0) return run;

    OperatorDecomposition P = P0;
    for (int i = 0; i < n_steps; ++i) {
        StepResult r = conjugation_step(P, diag_generator(P), p, s);
        run.steps.push_back(r.report);
        P = std::move(r.P);
    }
    for (int i = 0; i < n_steps; ++i) {
        StepResult r = conjugation_step(P, nf_generator(P, p), p, s);
        run.steps.push_back(r.report);
        P = std::move(r.P);
    }

    const LinearFamily R = linear_remainder_family(f, g, p, n_steps);
    std::optional<LinearFamily> F;
    try {
        F = birkhoff_matrix_solve(R);
    } catch (const ZeroDivisorError& e) {
        run.error = e.what();
        return run;
    }
    run.birkhoff_identity_residual = birkhoff_residual(R, *F, U);

    const PairField dU(vector_field(f, U.u));
    StepResult r = conjugation_step(P, StepGenerator::birkhoff(F->at(U), F->at(dU)), p, s);
    run.steps.push_back(r.report);
    run.birkhoff_done = true;

    // Linear-in-U part: the tangent pipeline with dU/dt = -i E Lambda U.
    const OperatorDecomposition L = linearized_pipeline(P0, p, n_steps);
    const PairField dU_lin(cplx(-1.0) * linear_flow_field(U).u);
    const OperatorDecomposition L_after =
        conjugate_linearized(L, StepGenerator::birkhoff(F->at(U), F->at(dU_lin)));
    run.linear_remainder_before = remainder_norm(L, s);
    run.linear_remainder_after = remainder_norm(L_after, s);
    return run;
}

// ---- calculus self-checks --------------------------------------------------------

Symbol random_real_symbol(const GridSpec& g, int band, std::uint64_t seed, double order) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Symbol a(g, order);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Mode& p = g.mode(k);
        bool inside = true;
        for (int i = 0; i < g.dim(); ++i) inside = inside && std::abs(p[std::size_t(i)]) <= band;
        if (!inside || k > g.neg_index(k)) continue;
        const cplx c0(n(rng), n(rng)), c1(n(rng), n(rng));
        for (std::size_t h = 0; h < g.half_size(); ++h) {
            const auto xi = half_to_real(g.half_point(h));
            cplx v = c0 * std::pow(bracket(fiber(xi, g.dim())), order) + c1 * std::sin(xi[0]);
            if (k == g.neg_index(k)) v = v.real();
            a(k, h) = v;
            a(g.neg_index(k), h) = std::conj(v);
        }
    }
    return a;
}

Symbol random_even_symbol(const GridSpec& g, std::uint64_t seed, double size) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Symbol a(g, -1.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (norm_sq(g.mode(k)) > 4.0) continue;
        const cplx c(n(rng), n(rng));
        for (std::size_t h = 0; h < g.half_size(); ++h)
            a(k, h) = size * c / bracket(fiber(half_to_real(g.half_point(h)), g.dim()));
    }
    return a;
}

CMatrix random_pair_hermitian(const GridSpec& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    const Idx N = Idx(g.size());
    CMatrix a(N, N), b(N, N);
    for (Idx i = 0; i < N; ++i)
        for (Idx j = 0; j < N; ++j) {
            a(i, j) = {n(rng), n(rng)};
            b(i, j) = {n(rng), n(rng)};
        }
    const CMatrix D = PairLinOp(g, a, b).dense();
    return 0.5 * (D + D.adjoint());
}

std::vector<SuiteCheck> calculus_suite(int d, int K, std::uint64_t seed, const Cutoff& cutoff) {
    const GridSpec g = GridSpec::flat(d, K, 1.0);
    std::vector<SuiteCheck> out;

    {
        const CMatrix Q = quantize_bw(Symbol::lambda(g), cutoff).matrix;
        CMatrix D = CMatrix::Zero(Q.rows(), Q.cols());
        for (std::size_t j = 0; j < g.size(); ++j) D(Idx(j), Idx(j)) = g.lambda(g.mode(j));
        out.push_back({"quantization_exactness", (Q - D).cwiseAbs().maxCoeff(), 1e-13});
    }
    {
        double worst = 0.0;
        for (std::uint64_t i = 0; i < 20; ++i)
            worst = std::max(worst, selfadjoint_residual(quantize_bw(random_real_symbol(g, 2, seed + i), cutoff)));
        out.push_back({"self_adjointness", worst, 1e-12});
    }
    {
        const Symbol a = Symbol::multiplier(g, 1.0, [](std::span<const double> xi) { return cplx(bracket(xi)); });
        const Symbol b = Symbol::from_function(g, 0.5, [](const Mode& k, std::span<const double> xi) -> cplx {
            if (k[1] != 0 || k[2] != 0) return 0.0;
            const int n = std::abs(k[0]);
            if (n == 1) return 0.5 * std::sqrt(bracket(xi));
            if (n == 2) return 0.25 * std::sqrt(bracket(xi));
            return 0.0;
        });
        double increase = 0.0, prev = composition_residual(a, b, 1, 0.0);
        for (int rho = 2; rho <= 3; ++rho) {
            const double r = composition_residual(a, b, rho, 0.0);
            if (!std::isfinite(r)) increase = INFINITY;
            increase = std::max(increase, r - prev);
            prev = r;
        }
        out.push_back({"composition_nonincreasing", increase, 0.0});
        double mult = 0.0;
        for (int rho = 1; rho <= 3; ++rho) mult = std::max(mult, composition_residual(Symbol::lambda(g), a, rho, 1.0));
        out.push_back({"composition_multipliers", mult, 1e-13});
    }
    {
        const LinOp F = flow(random_real_symbol(g, 2, seed + 100, 0.5));
        const CMatrix I = CMatrix::Identity(F.matrix.rows(), F.matrix.cols());
        out.push_back({"flow_unitarity", operator_norm(g, F.matrix.adjoint() * F.matrix - I, 0.0, 0.0), 1e-10});
        out.push_back({"offdiag_symplecticity", symplectic_residual(flow_offdiag(random_even_symbol(g, seed + 101, 0.3))),
                       1e-10});
        const CMatrix X = kI * pair_E(g) * random_pair_hermitian(g, seed + 102);
        const PairLinOp S = PairLinOp::from_dense(g, (0.1 / operator_norm(g, X, 0.0, 0.0)) * X);
        out.push_back({"smoothing_symplecticity", symplectic_residual(flow_smoothing(S)), 1e-10});
    }
    {
        const NFParams p = NFParams::defaults(d);
        const Symbol a = random_real_symbol(g, std::max(1, K / 2), seed + 200);
        const SymbolParts parts = decompose(a, p);
        const Symbol sum = parts.avg + parts.nr + parts.res + parts.smooth;
        out.push_back({"decomposition_exactness", (sum.values() - a.values()).cwiseAbs().maxCoeff(), 1e-14});

        std::mt19937_64 rng(seed + 201);
        std::normal_distribution<double> n(0.0, 1.0);
        CMatrix c(Idx(g.size()), 1);
        for (Idx i = 0; i < c.rows(); ++i) c(i, 0) = {n(rng), n(rng)};
        const Symbol flat_rows = Symbol::from_function(g, 0.0, [&](const Mode& k, std::span<const double>) {
            return c(Idx(*g.index_of(k)), 0);
        });
        out.push_back({"homological_constant_rows", homological_g(flat_rows, p).residual, 1e-12});
        out.push_back({"homological_tabulated_rows", homological_g(a, p).residual, 1e-6});
    }
    return out;
}

// ---- configuration ----------------------------------------------------------------

FlatConfig FlatConfig::parse(std::istream& is) {
    FlatConfig c;
    std::string line;
    int n = 0;
    while (std::getline(is, line)) {
        ++n;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(n) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("config line " + std::to_string(n) + ": empty key");
        if (c.has(key)) throw std::invalid_argument("config line " + std::to_string(n) + ": duplicate key " + key);
        c.set(key, value);
    }
    return c;
}

FlatConfig FlatConfig::load(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot open config " + path.string());
    return parse(is);
}

void FlatConfig::require_known(const std::vector<std::string>& allowed) const {
    std::string bad;
    for (const auto& [k, v] : values_)
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) bad += (bad.empty() ? "" : ", ") + k;
    if (!bad.empty()) throw std::invalid_argument("unknown config keys: " + bad);
}

std::string FlatConfig::get(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double FlatConfig::get(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(it->second, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != it->second.size()) throw std::invalid_argument(key + ": not a number: " + it->second);
    return v;
}

int FlatConfig::get(const std::string& key, int fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::size_t pos = 0;
    int v = 0;
    try {
        v = std::stoi(it->second, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != it->second.size()) throw std::invalid_argument(key + ": not an integer: " + it->second);
    return v;
}

std::vector<double> FlatConfig::get_list(const std::string& key, const std::vector<double>& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string item;
    FlatConfig one;
    while (std::getline(ss, item, ',')) {
        one.set(key, trim(item));
        out.push_back(one.get(key, 0.0));
    }
    return out;
}

Command parse_command(const std::string& name) {
    if (name == "verify-calculus") return Command::verify_calculus;
    if (name == "scan-mass") return Command::scan_mass;
    if (name == "normal-form") return Command::normal_form;
    if (name == "lifespan") return Command::lifespan;
    throw std::invalid_argument("unknown command: " + name);
}

std::string to_string(Command c) {
    switch (c) {
        case Command::verify_calculus: return "verify-calculus";
        case Command::scan_mass: return "scan-mass";
        case Command::normal_form: return "normal-form";
        case Command::lifespan: return "lifespan";
    }
    return "?";
}

GridSpec RunConfig::grid() const {
    if (metric.empty()) return GridSpec::flat(d, K, m, eps_q);
    if (metric.size() != std::size_t(d * d)) throw std::invalid_argument("grid.G must have d*d entries");
    RMatrix G(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) G(i, j) = metric[std::size_t(i * d + j)];
    return GridSpec(d, K, G, m, eps_q);
}

RunConfig RunConfig::from_flat(Command c, const FlatConfig& f) {
    f.require_known({"seed",          "threads",         "output_dir",     "grid.d",        "grid.K",
                     "grid.m",        "grid.G",          "grid.eps_q",     "nf.delta",      "nf.tau",
                     "nf.eps_nf",     "nf.n_steps",      "nf.eps",         "nf.s",          "scan.gamma",
                     "scan.tau_star", "scan.ell_cutoff", "scan.mass_lo",   "scan.mass_hi",  "scan.mass_count",
                     "scan.omega",    "scan.certify_radius", "sim.dt",     "sim.rho",       "sim.s_high",
                     "sim.blowup_factor", "sim.record_stride", "sim.eps_list", "sim.seeds", "sim.t_max_factor",
                     "test.corrupt_eta"});
    RunConfig r;
    r.command = c;
    const double seed = f.get("seed", 1.0);
    if (!(seed >= 0.0) || seed != std::floor(seed)) throw std::invalid_argument("seed must be a non-negative integer");
    r.seed = std::uint64_t(seed);
    r.threads = f.get("threads", 0);
    if (r.threads < 0) throw std::invalid_argument("threads must be >= 0");
    r.output_dir = f.get("output_dir", std::string("."));

    r.d = f.get("grid.d", r.d);
    r.K = f.get("grid.K", r.K);
    r.m = f.get("grid.m", r.m);
    r.metric = f.get_list("grid.G", {});
    r.eps_q = f.get("grid.eps_q", r.eps_q);
    (void)r.grid();

    r.nf = NFParams::defaults(r.d);
    r.nf.delta = f.get("nf.delta", r.nf.delta);
    r.nf.tau = f.get("nf.tau", r.nf.tau);
    r.nf.eps_nf = f.get("nf.eps_nf", r.nf.eps_nf);
    r.nf.validate(r.d);
    r.n_steps = f.get("nf.n_steps", r.n_steps);
    r.eps = f.get("nf.eps", r.eps);
    r.s = f.get("nf.s", r.s);
    if (r.n_steps < 0) throw std::invalid_argument("nf.n_steps must be >= 0");
    if (!(r.eps > 0.0)) throw std::invalid_argument("nf.eps must be positive");

    r.scan.gamma = f.get("scan.gamma", r.scan.gamma);
    r.scan.tau_star = f.get("scan.tau_star", r.scan.tau_star);
    r.scan.ell_cutoff = f.get("scan.ell_cutoff", r.scan.ell_cutoff);
    r.scan.mass_lo = f.get("scan.mass_lo", r.scan.mass_lo);
    r.scan.mass_hi = f.get("scan.mass_hi", r.scan.mass_hi);
    r.scan.mass_count = f.get("scan.mass_count", r.scan.mass_count);
    r.scan.validate(r.d);
    r.omega = f.get_list("scan.omega", {});
    if (!r.omega.empty() && int(r.omega.size()) != d_star(r.d))
        throw std::invalid_argument("scan.omega must have d(d-1)/2 + d entries");
    r.certify_radius = f.get("scan.certify_radius", r.certify_radius);
    if (r.certify_radius < 0) throw std::invalid_argument("scan.certify_radius must be >= 0");
    if (r.certify_radius == 0) r.certify_radius = default_certify_radius(r.d);

    r.sim.dt = f.get("sim.dt", r.sim.dt);
    r.sim.rho = f.get("sim.rho", r.sim.rho);
    r.sim.s_high = f.get_list("sim.s_high", r.sim.s_high);
    r.sim.blowup_factor = f.get("sim.blowup_factor", r.sim.blowup_factor);
    r.sim.record_stride = f.get("sim.record_stride", r.sim.record_stride);
    r.sim.validate();
    r.eps_list = f.get_list("sim.eps_list", r.eps_list);
    r.seeds = f.get("sim.seeds", r.seeds);
    r.t_max_factor = f.get("sim.t_max_factor", r.t_max_factor);
    if (r.eps_list.empty()) throw std::invalid_argument("sim.eps_list must not be empty");
    for (std::size_t i = 0; i < r.eps_list.size(); ++i)
        if (!(r.eps_list[i] > 0.0) || (i > 0 && !(r.eps_list[i] < r.eps_list[i - 1])))
            throw std::invalid_argument("sim.eps_list must be positive and decreasing");
    if (r.seeds < 1) throw std::invalid_argument("sim.seeds must be >= 1");
    if (!(r.t_max_factor > 0.0)) throw std::invalid_argument("sim.t_max_factor must be positive");

    const std::string ce = f.get("test.corrupt_eta", std::string("false"));
    if (ce != "true" && ce != "false") throw std::invalid_argument("test.corrupt_eta must be true or false");
    r.corrupt_eta = ce == "true";
    return r;
}

std::string RunConfig::to_config() const {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "# " << to_string(command) << "\n";
    os << "seed = " << seed << "\n";
    os << "threads = " << threads << "\n";
    os << "output_dir = " << output_dir.string() << "\n";
    os << grid().to_config();
    os << "nf.delta = " << nf.delta << "\nnf.tau = " << nf.tau << "\nnf.eps_nf = " << nf.eps_nf << "\n";
    os << "nf.n_steps = " << n_steps << "\nnf.eps = " << eps << "\nnf.s = " << s << "\n";
    os << "scan.gamma = " << scan.gamma << "\nscan.tau_star = " << scan.tau_star << "\n";
    os << "scan.ell_cutoff = " << scan.ell_cutoff << "\nscan.mass_lo = " << scan.mass_lo << "\n";
    os << "scan.mass_hi = " << scan.mass_hi << "\nscan.mass_count = " << scan.mass_count << "\n";
    if (!omega.empty()) os << "scan.omega = " << join(omega) << "\n";
    os << "scan.certify_radius = " << certify_radius << "\n";
    os << "sim.dt = " << sim.dt << "\nsim.rho = " << sim.rho << "\nsim.s_high = " << join(sim.s_high) << "\n";
    os << "sim.blowup_factor = " << sim.blowup_factor << "\nsim.record_stride = " << sim.record_stride << "\n";
    os << "sim.eps_list = " << join(eps_list) << "\nsim.seeds = " << seeds << "\n";
    os << "sim.t_max_factor = " << t_max_factor << "\n";
    os << "test.corrupt_eta = " << (corrupt_eta ? "true" : "false") << "\n";
    return os.str();
}

// ---- commands ---------------------------------------------------------------------

CommandResult cmd_verify_calculus(const RunConfig& cfg) {
    const Cutoff cutoff = cfg.corrupt_eta ? Cutoff([](double y) { return 0.5 * eta(y); }) : Cutoff(eta);
    const auto checks = calculus_suite(cfg.d, cfg.K, cfg.seed, cutoff);
    json j{{"command", "verify-calculus"}, {"d", cfg.d}, {"K", cfg.K}, {"checks", json::array()}, {"failed", json::array()}};
    for (const auto& c : checks) {
        j["checks"].push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass()}});
        if (!c.pass()) j["failed"].push_back(c.name);
    }
    return {j["failed"].empty() ? 0 : 1, j.dump(2)};
}

CommandResult cmd_scan_mass(const RunConfig& cfg) {
    const std::vector<double> omega =
        cfg.omega.empty() ? omega_g(generic_metric(cfg.d, cfg.m, cfg.scan, cfg.seed)) : cfg.omega;
    const auto rows = mass_scan(cfg.scan, omega, cfg.d);
    std::size_t excluded = 0;
    for (const auto& r : rows) excluded += r.report.pass ? 0 : 1;
    {
        std::ofstream os(cfg.output_dir / "mass_scan.csv");
        if (!os) throw std::runtime_error("cannot write mass_scan.csv");
        write_mass_scan_csv(os, rows);
    }
    const GridSpec g = cfg.grid();
    const double tau = cfg.scan.tau_for(cfg.d);
    const LowerBoundReport lb = certify_lower_bound(g, cfg.m, cfg.scan.gamma, tau, cfg.certify_radius);
    const double best_tau = empirical_tau(g, cfg.m, cfg.scan.gamma, cfg.certify_radius, 2.0 * tau);
    const double fraction = double(excluded) / double(rows.size());
    {
        std::ofstream os(cfg.output_dir / "scan_summary.csv");
        if (!os) throw std::runtime_error("cannot write scan_summary.csv");
        write_scan_summary_csv(os, cfg.scan.gamma, fraction);
    }
    auto mode = [&](const Mode& p) { return std::vector<int>(p.begin(), p.begin() + cfg.d); };
    json j{{"command", "scan-mass"},
           {"omega", omega},
           {"gamma", cfg.scan.gamma},
           {"tau_star", tau},
           {"ell_cutoff", cfg.scan.ell_cutoff},
           {"mass_count", cfg.scan.mass_count},
           {"excluded_fraction", fraction},
           {"lower_bound",
            {{"m", cfg.m},
             {"radius", cfg.certify_radius},
             {"min_value", lb.min_value},
             {"xi", mode(lb.xi)},
             {"k", mode(lb.k)},
             {"sigma", lb.sigma},
             {"sigma_p", lb.sigma_p},
             {"pass", lb.pass},
             {"empirical_tau", std::isfinite(best_tau) ? json(best_tau) : json(nullptr)}}}};
    return {0, j.dump(2)};
}

CommandResult cmd_normal_form(const RunConfig& cfg) {
    const GridSpec g = cfg.grid();
    const PairField U(shaped_initial_data(g, cfg.sim.rho, cfg.eps, cfg.seed));
    const NormalFormRun run = run_normal_form(CubicDensity::canonical(cfg.d), U, cfg.nf, cfg.n_steps, cfg.s);
    json j = json::parse(run.to_json());
    j["command"] = "normal-form";
    j["eps"] = cfg.eps;
    j["n_steps"] = cfg.n_steps;
    return {run.error.empty() ? 0 : 2, j.dump(2)};
}

CommandResult cmd_lifespan(const RunConfig& cfg) {
    const GridSpec g = cfg.grid();
    const LifespanStudy st =
        lifespan_study(g, CubicDensity::canonical(cfg.d), cfg.sim, cfg.eps_list, cfg.seeds, cfg.seed, cfg.t_max_factor);
    {
        std::ofstream os(cfg.output_dir / "lifespan.csv");
        if (!os) throw std::runtime_error("cannot write lifespan.csv");
        write_study_csv(os, st);
    }
    bool low_ok = true, high_ok = true, ratio_ok = true;
    for (const auto& r : st.rows) {
        low_ok = low_ok && r.censored && r.max_low_ratio <= cfg.sim.blowup_factor;
        high_ok = high_ok && r.max_high_ratio <= 4.0;
    }
    json ratios = json::array();
    for (const auto& r : st.ratios) {
        ratios.push_back({{"eps", r.eps}, {"seed", r.seed_index}, {"ratio", r.ratio}});
        ratio_ok = ratio_ok && r.ratio >= 3.0;
    }
    json j{{"command", "lifespan"},
           {"ratios", ratios},
           {"empirical_c", st.empirical_c},
           {"envelope",
            {{"low_norm_bounded", low_ok}, {"high_norm_bounded", high_ok}, {"ratios_at_least_3", ratio_ok},
             {"all_censored", st.ratios.empty()}, {"pass", low_ok && high_ok && ratio_ok}}}};
    return {0, j.dump(2)};
}

CommandResult run_command(const RunConfig& cfg) {
#ifdef _OPENMP
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#endif
    std::filesystem::create_directories(cfg.output_dir);
    write_text(cfg.output_dir / "config.cfg", cfg.to_config());
    CommandResult r;
    std::string name;
    switch (cfg.command) {
        case Command::verify_calculus: r = cmd_verify_calculus(cfg); name = "verify_calculus.json"; break;
        case Command::scan_mass: r = cmd_scan_mass(cfg); name = "scan_mass.json"; break;
        case Command::normal_form: r = cmd_normal_form(cfg); name = "normal_form.json"; break;
        case Command::lifespan: r = cmd_lifespan(cfg); name = "lifespan.json"; break;
    }
    write_text(cfg.output_dir / name, r.report + "\n");
    return r;
}

}  // namespace dnls
