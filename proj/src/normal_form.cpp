#include "dnls/normal_form.hpp"

#include <algorithm>

#include "json.hpp"

namespace dnls {

namespace {

using Idx = Eigen::Index;

Idx ix(std::size_t i) { return Idx(i); }

double bracket(std::span<const double> xi) {
    double s = 1.0;
    for (double v : xi) s += v * v;
    return std::sqrt(s);
}

std::span<const double> fiber(const std::array<double, kMaxDim>& xi, int d) {
    return std::span<const double>(xi.data(), std::size_t(d));
}

double smoothstep_cutoff(double y, double lo, double hi) {
    y = std::abs(y);
    if (y <= lo) return 1.0;
    if (y >= hi) return 0.0;
    auto h = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
    const double t = (hi - y) / (hi - lo);
    return h(t) / (h(t) + h(1.0 - t));
}

}  // namespace

NFParams NFParams::defaults(int d) {
    if (d == 1) return {0.75, 1.0, 0.3};
    if (d == 2) return {0.75, 1.5, 0.25};
    return {0.75, d - 0.5, 0.2};
}

void NFParams::validate(int d) const {
    if (!(delta > 2.0 / 3.0 && delta < 1.0)) throw std::invalid_argument("NFParams: delta must lie in (2/3, 1)");
    if (!(tau > d - 1.0)) throw std::invalid_argument("NFParams: tau must exceed d - 1");
    if (!(eps_nf > 0.0 && eps_nf < delta / (tau + 1.0)))
        throw std::invalid_argument("NFParams: eps_nf must lie in (0, delta / (tau + 1))");
}

double chi(double y) { return smoothstep_cutoff(y, 0.5, 1.0); }

CutoffValues cutoffs(const GridSpec& grid, const Mode& k, std::span<const double> xi, const NFParams& p) {
    if (k == Mode{0, 0, 0}) throw std::invalid_argument("cutoffs: k must be nonzero");
    const double kn = std::sqrt(norm_sq(k));
    const double pairing = grid.metric_pairing(xi, k);
    const double br = bracket(xi);
    CutoffValues c;
    c.chi_k = chi(2.0 * std::pow(kn, p.tau) * pairing / std::pow(br, p.delta));
    c.chi_tilde_k = chi(kn / std::pow(br, p.eps_nf));
    c.d_k = c.chi_k == 1.0 ? 0.0 : (1.0 - c.chi_k) / (2.0 * pairing);
    return c;
}

SymbolParts decompose(const Symbol& a, const NFParams& p) {
    const GridSpec& g = a.grid();
    SymbolParts out{Symbol(g, a.order()), Symbol(g, a.order()), Symbol(g, a.order()), Symbol(g, a.order())};
    const std::size_t zero = *g.index_of(Mode{0, 0, 0});
    out.avg.values().row(ix(zero)) = a.values().row(ix(zero));
#pragma omp parallel for schedule(static)
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (k == zero) continue;
        for (std::size_t h = 0; h < g.half_size(); ++h) {
            const cplx v = a(k, h);
            if (v == cplx(0.0)) continue;
            const auto xi = half_to_real(g.half_point(h));
            const CutoffValues c = cutoffs(g, g.mode(k), fiber(xi, g.dim()), p);
            out.nr(k, h) = (1.0 - c.chi_k) * c.chi_tilde_k * v;
            out.res(k, h) = c.chi_k * c.chi_tilde_k * v;
            out.smooth(k, h) = (1.0 - c.chi_tilde_k) * v;
        }
    }
    return out;
}

HomologicalSolution homological_g(const Symbol& a, const NFParams& p) {
    const GridSpec& g = a.grid();
    Symbol sol(g, a.order() - 1.0 + p.delta);
    Symbol nr(g, a.order());
    const std::size_t zero = *g.index_of(Mode{0, 0, 0});
#pragma omp parallel for schedule(static)
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (k == zero) continue;
        for (std::size_t h = 0; h < g.half_size(); ++h) {
            const cplx v = a(k, h);
            if (v == cplx(0.0)) continue;
            const auto xi = half_to_real(g.half_point(h));
            const CutoffValues c = cutoffs(g, g.mode(k), fiber(xi, g.dim()), p);
            nr(k, h) = (1.0 - c.chi_k) * c.chi_tilde_k * v;
            sol(k, h) = -(1.0 / kI) * c.d_k * c.chi_tilde_k * v;
        }
    }
    const Symbol res = poisson_bracket(Symbol::lambda(g), sol) + nr;
    const double residual = res.values().size() ? res.values().cwiseAbs().maxCoeff() : 0.0;
    return {std::move(sol), residual};
}

NormalFormCheck is_normal_form(const Symbol& z, const NFParams& p, double threshold) {
    const GridSpec& g = z.grid();
    NormalFormCheck out;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Mode& mk = g.mode(k);
        if (mk == Mode{0, 0, 0}) continue;
        const double kn = std::sqrt(norm_sq(mk));
        for (std::size_t h = 0; h < g.half_size(); ++h) {
            if (std::abs(z(k, h)) <= threshold) continue;
            const auto xi = half_to_real(g.half_point(h));
            const double br = bracket(fiber(xi, g.dim()));
            const double pairing = std::abs(g.metric_pairing(fiber(xi, g.dim()), mk));
            // relative excess over each bound
            const double v1 = pairing / (std::pow(br, p.delta) * std::pow(kn, -p.tau)) - 1.0;
            const double v2 = kn / std::pow(br, p.eps_nf) - 1.0;
            const double v = std::max(v1, v2);
            if (v > 0.0 && (out.ok || v > out.violation)) {
                out.ok = false;
                out.violation = v;
                out.k = mk;
                out.xi = xi;
            }
        }
    }
    return out;
}

Symbol diag_step_psi(const Symbol& b) {
    const GridSpec& g = b.grid();
    return b.divide_by([&g](std::span<const double> xi) { return cplx(2.0 * g.lambda(xi)); }, -2.0);
}

double regularization_gain(double delta) {
    if (!(delta > 2.0 / 3.0 && delta < 1.0)) throw std::invalid_argument("regularization_gain: delta must lie in (2/3, 1)");
    return std::min({delta, 3.0 * delta - 2.0, 2.0 * delta - 1.0});
}

// ---- operator decomposition ------------------------------------------------------

CMatrix OperatorDecomposition::dense() const {
    const GridSpec& g = grid();
    const PairLinOp symb(g, kI * quantize_bw(a).matrix, kI * quantize_bw(b).matrix);
    return linear_pair_operator(g) + symb.dense() + remainder.dense();
}

OperatorDecomposition OperatorDecomposition::extract(const GridSpec& g, const CMatrix& dense) {
    const Idx N = ix(g.size());
    if (dense.rows() != 2 * N || dense.cols() != 2 * N)
        throw std::invalid_argument("OperatorDecomposition::extract: size mismatch");
    const CMatrix S = dense - linear_pair_operator(g);
    OperatorDecomposition P{Symbol(g, 1.0), Symbol(g, 0.0), PairLinOp(g, S.block(0, 0, N, N), S.block(0, N, N, N))};
    for (std::size_t j = 0; j < g.size(); ++j)
        for (std::size_t k = 0; k < g.size(); ++k) {
            const Mode& mj = g.mode(j);
            const Mode& mk = g.mode(k);
            const auto row = g.index_of(mj - mk);
            if (!row || quantization_weight(g, mj, mk) != 1.0) continue;
            const std::size_t h = *g.half_index_of(mj + mk);
            P.a(*row, h) = -kI * S(ix(j), ix(k));
            P.b(*row, h) = -kI * S(ix(j), N + ix(k));
            P.remainder.A11(ix(j), ix(k)) = 0.0;
            P.remainder.A12(ix(j), ix(k)) = 0.0;
        }
    return P;
}

OperatorDecomposition OperatorDecomposition::paralinearized(const CubicDensity& f, const PairField& U) {
    const GridSpec& g = U.u.grid;
    const auto [a, b] = paralinearize(f, U);
    const PairLinOp para = quantize_bw(MatrixSymbol{a, b});
    const PairLinOp full = quantize_bw(MatrixSymbol{a, b}, [](double) { return 1.0; });
    // Each frequency pair of the quadratic form enters the full quantization
    // twice (either factor as coefficient); the paraproduct keeps one copy
    // when one frequency dominates, the remainder splits comparable pairs.
    PairLinOp total = para;
    for (std::size_t j = 0; j < g.size(); ++j)
        for (std::size_t k = 0; k < g.size(); ++k) {
            const Mode& mj = g.mode(j);
            const Mode& mk = g.mode(k);
            const double w = 0.5 * (1.0 - quantization_weight(g, mj, mk) - quantization_weight(g, mj, mj - mk));
            total.A11(ix(j), ix(k)) += w * full.A11(ix(j), ix(k));
            total.A12(ix(j), ix(k)) += w * full.A12(ix(j), ix(k));
        }
    const PairLinOp iE(g, kI * total.A11, kI * total.A12);
    return extract(g, linear_pair_operator(g) + iE.dense());
}

// ---- conjugation -----------------------------------------------------------------

std::string to_string(StepKind k) {
    switch (k) {
        case StepKind::diag: return "diag";
        case StepKind::nf: return "nf";
        case StepKind::birkhoff: return "birkhoff";
    }
    return "?";
}

StepGenerator StepGenerator::diag(Symbol psi) { return {StepKind::diag, std::move(psi), std::nullopt, std::nullopt}; }
StepGenerator StepGenerator::nf(Symbol g) { return {StepKind::nf, std::move(g), std::nullopt, std::nullopt}; }
StepGenerator StepGenerator::birkhoff(PairLinOp F, PairLinOp F_dt) {
    return {StepKind::birkhoff, std::nullopt, std::move(F), std::move(F_dt)};
}

CMatrix StepGenerator::dense() const {
    switch (kind) {
        case StepKind::diag: {
            // exp(i Op([[0, i psi], [-conj(i psi)(x,-xi), 0]])): the off-diagonal
            // block -Op(psi) cancels i Op(b) against [i E Lambda, X].
            const GridSpec& g = symbol->grid();
            const Idx N = ix(g.size());
            return PairLinOp(g, CMatrix::Zero(N, N), -quantize_bw(*symbol).matrix).dense();
        }
        case StepKind::nf: {
            const GridSpec& g = symbol->grid();
            const double scale = 1.0 + symbol->values().cwiseAbs().maxCoeff();
            if (symbol->reality_defect() > 1e-12 * scale)
                throw std::invalid_argument("StepGenerator::nf: generator symbol is not real");
            const Idx N = ix(g.size());
            return PairLinOp(g, kI * quantize_bw(*symbol).matrix, CMatrix::Zero(N, N)).dense();
        }
        case StepKind::birkhoff: return smoothing->dense();
    }
    return {};
}

StepNorms measure(const OperatorDecomposition& P, const NFParams& p, double s) {
    const GridSpec& g = P.grid();
    StepNorms n;
    n.offdiag = operator_norm(g, quantize_bw(P.b).matrix, s, s);
    n.non_normal = operator_norm(g, quantize_bw(decompose(P.a, p).nr).matrix, s, s - 1.0);
    n.remainder = pair_operator_norm(g, P.remainder.dense(), s, s + 1.0);
    return n;
}

StepGenerator diag_generator(const OperatorDecomposition& P) {
    return StepGenerator::diag(diag_step_psi(0.5 * (P.b + P.b.reflect_xi())));
}

StepGenerator nf_generator(const OperatorDecomposition& P, const NFParams& p) {
    return StepGenerator::nf(homological_g(0.5 * (P.a + P.a.conj_x()), p).g);
}

OperatorDecomposition conjugate(const OperatorDecomposition& P, const StepGenerator& gen) {
    const CMatrix X = gen.dense();
    const CMatrix Phi_inv = expm(-X);
    CMatrix T = Phi_inv * P.dense() * expm(X);
    if (gen.kind == StepKind::birkhoff) T += Phi_inv * expm_frechet(X, gen.smoothing_dt->dense());
    return OperatorDecomposition::extract(P.grid(), T);
}

OperatorDecomposition conjugate_linearized(const OperatorDecomposition& P, const StepGenerator& gen) {
    const CMatrix X = gen.dense();
    const CMatrix L = linear_pair_operator(P.grid());
    CMatrix T = P.dense() + L * X - X * L;
    if (gen.kind == StepKind::birkhoff) T += gen.smoothing_dt->dense();
    return OperatorDecomposition::extract(P.grid(), T);
}

StepResult conjugation_step(const OperatorDecomposition& P, const StepGenerator& gen, const NFParams& p, double s) {
    const GridSpec& g = P.grid();
    StepResult out{conjugate(P, gen), {}};
    StepReport& r = out.report;
    r.kind = gen.kind;
    r.s = s;
    r.before = measure(P, p, s);
    r.after = measure(out.P, p, s);
    r.symplectic_residual = symplectic_residual(g, expm(gen.dense()));

    const Symbol nr = decompose(out.P.a, p).nr;
    for (std::size_t k = 0; k < g.size(); ++k)
        for (std::size_t h = 0; h < g.half_size(); ++h)
            if (std::abs(nr(k, h)) > r.worst_value) {
                r.worst_value = std::abs(nr(k, h));
                r.worst_k = g.mode(k);
                r.worst_xi = half_to_real(g.half_point(h));
            }
    return out;
}

std::string StepReport::to_json() const {
    auto norms = [](const StepNorms& n) {
        return nlohmann::json{{"offdiag", n.offdiag}, {"non_normal", n.non_normal}, {"remainder", n.remainder}};
    };
    nlohmann::json j{{"kind", to_string(kind)},
                     {"s", s},
                     {"before", norms(before)},
                     {"after", norms(after)},
                     {"symplectic_residual", symplectic_residual},
                     {"worst_offender", {{"k", worst_k}, {"xi", worst_xi}, {"value", worst_value}}}};
    return j.dump();
}

}  // namespace dnls
