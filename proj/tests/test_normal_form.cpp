#include <gtest/gtest.h>

#include "dnls/cli.hpp"
#include "dnls/normal_form.hpp"
#include "json.hpp"

using namespace dnls;

namespace {

std::span<const double> fib(const std::array<double, kMaxDim>& xi, int d) { return {xi.data(), std::size_t(d)}; }

double max_abs(const Symbol& a) { return a.values().size() ? a.values().cwiseAbs().maxCoeff() : 0.0; }

// Symbol with a single x-frequency row k0, constant c in xi.
Symbol constant_row(const GridSpec& g, const Mode& k0, cplx c) {
    return Symbol::from_function(g, 0.0, [&](const Mode& k, std::span<const double>) { return k == k0 ? c : 0.0; });
}

PairField canonical_datum(const GridSpec& g, double eps) { return PairField(shaped_initial_data(g, 4.0, eps, 1)); }

}  // namespace

TEST(NFParams, Validation) {
    for (int d = 1; d <= 3; ++d) EXPECT_NO_THROW(NFParams::defaults(d).validate(d));
    EXPECT_THROW((NFParams{0.6, 1.0, 0.1}).validate(1), std::invalid_argument);
    EXPECT_THROW((NFParams{1.0, 1.0, 0.1}).validate(1), std::invalid_argument);
    EXPECT_THROW((NFParams{0.75, 0.5, 0.1}).validate(2), std::invalid_argument);
    EXPECT_THROW((NFParams{0.75, 1.0, 0.4}).validate(1), std::invalid_argument);
    EXPECT_THROW((NFParams{0.75, 1.0, 0.0}).validate(1), std::invalid_argument);
}

TEST(Chi, Shape) {
    EXPECT_EQ(chi(0.0), 1.0);
    EXPECT_EQ(chi(0.5), 1.0);
    EXPECT_EQ(chi(-0.5), 1.0);
    EXPECT_EQ(chi(1.0), 0.0);
    EXPECT_EQ(chi(7.0), 0.0);
    double prev = 1.0;
    for (double y = 0.5; y <= 1.0; y += 0.01) {
        EXPECT_LE(chi(y), prev);
        EXPECT_EQ(chi(y), chi(-y));
        prev = chi(y);
    }
}

TEST(Cutoffs, Examples) {
    const GridSpec g = GridSpec::flat(2, 8, 0.5);
    const NFParams p = NFParams::defaults(2);
    // (xi; k) = 0
    const std::array<double, kMaxDim> xi{3.0, 0.0, 0.0};
    const CutoffValues c = cutoffs(g, Mode{0, 1, 0}, fib(xi, 2), p);
    EXPECT_EQ(c.chi_k, 1.0);
    EXPECT_EQ(c.d_k, 0.0);
    // |k| >= <xi>^eps_nf
    const std::array<double, kMaxDim> origin{};
    EXPECT_EQ(cutoffs(g, Mode{1, 0, 0}, fib(origin, 2), p).chi_tilde_k, 0.0);
    EXPECT_THROW(cutoffs(g, Mode{0, 0, 0}, fib(xi, 2), p), std::invalid_argument);
}

TEST(Cutoffs, RangeProperty) {
    const GridSpec g = GridSpec::flat(1, 8, 0.5);
    const NFParams p = NFParams::defaults(1);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (g.mode(k) == Mode{}) continue;
        for (std::size_t h = 0; h < g.half_size(); ++h) {
            const auto xi = half_to_real(g.half_point(h));
            const CutoffValues c = cutoffs(g, g.mode(k), fib(xi, 1), p);
            EXPECT_GE(c.chi_k, 0.0);
            EXPECT_LE(c.chi_k, 1.0);
            EXPECT_GE(c.chi_tilde_k, 0.0);
            EXPECT_LE(c.chi_tilde_k, 1.0);
            // d_k (xi; k) = (1 - chi_k) / 2
            EXPECT_NEAR(c.d_k * g.metric_pairing(fib(xi, 1), g.mode(k)), 0.5 * (1.0 - c.chi_k), 1e-15);
        }
    }
}

TEST(Decompose, PartitionIsExact) {
    for (int d = 1; d <= 2; ++d) {
        const GridSpec g = GridSpec::flat(d, d == 1 ? 16 : 5, 0.5);
        const Symbol a = random_real_symbol(g, 3, 7);
        const SymbolParts s = decompose(a, NFParams::defaults(d));
        EXPECT_LE(max_abs(s.avg + s.nr + s.res + s.smooth - a), 1e-14);
    }
}

TEST(Decompose, XIndependentIsAverage) {
    const GridSpec g = GridSpec::flat(1, 8, 0.5);
    const Symbol a = Symbol::lambda(g);
    const SymbolParts s = decompose(a, NFParams::defaults(1));
    EXPECT_EQ(max_abs(s.nr), 0.0);
    EXPECT_EQ(max_abs(s.res), 0.0);
    EXPECT_EQ(max_abs(s.smooth), 0.0);
    EXPECT_EQ(max_abs(s.avg - a), 0.0);
}

TEST(Decompose, HighFrequencySpikeIsSmooth) {
    // |k| = 8 against <xi>^0.3 <= 17^0.3 < 2.4 everywhere on the grid
    const GridSpec g = GridSpec::flat(1, 8, 0.5);
    const Symbol a = constant_row(g, Mode{8, 0, 0}, 1.0);
    const SymbolParts s = decompose(a, NFParams::defaults(1));
    EXPECT_EQ(max_abs(s.smooth - a), 0.0);
    EXPECT_EQ(max_abs(s.nr), 0.0);
    EXPECT_EQ(max_abs(s.res), 0.0);
}

TEST(Homological, AverageOnlyGivesZero) {
    const GridSpec g = GridSpec::flat(1, 8, 0.5);
    EXPECT_EQ(max_abs(homological_g(Symbol::lambda(g), NFParams::defaults(1)).g), 0.0);
}

TEST(Homological, ConstantRowIsAlgebraic) {
    for (int d = 1; d <= 2; ++d) {
        const GridSpec g = GridSpec::flat(d, 6, 0.5);
        const HomologicalSolution h = homological_g(constant_row(g, Mode{1, 0, 0}, cplx(0.3, -0.2)), NFParams::defaults(d));
        EXPECT_LE(h.residual, 1e-14);
        EXPECT_GT(max_abs(h.g), 0.0);
        // only the k0 row is populated
        for (std::size_t k = 0; k < g.size(); ++k)
            if (g.mode(k) != Mode{1, 0, 0}) EXPECT_EQ(h.g.values().row(Eigen::Index(k)).cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(Homological, KilledRowsContributeNothing) {
    const GridSpec g = GridSpec::flat(1, 8, 0.5);
    EXPECT_EQ(max_abs(homological_g(constant_row(g, Mode{8, 0, 0}, 1.0), NFParams::defaults(1)).g), 0.0);
}

TEST(Homological, TabulatedRowsProperty) {
    const GridSpec g = GridSpec::flat(1, 16, 0.5);
    for (std::uint64_t seed = 0; seed < 5; ++seed)
        EXPECT_LE(homological_g(random_real_symbol(g, 4, seed), NFParams::defaults(1)).residual, 1e-6);
}

TEST(NormalForm, AverageAndResonantPartsPass) {
    const GridSpec g = GridSpec::flat(1, 16, 0.5);
    const NFParams p = NFParams::defaults(1);
    EXPECT_TRUE(is_normal_form(Symbol::lambda(g), p).ok);
    for (std::uint64_t seed = 0; seed < 5; ++seed)
        EXPECT_TRUE(is_normal_form(decompose(random_real_symbol(g, 4, seed), p).res, p).ok);
}

TEST(NormalForm, SpikeFailsWithOffender) {
    const GridSpec g = GridSpec::flat(1, 8, 0.5);
    const NormalFormCheck c = is_normal_form(constant_row(g, Mode{8, 0, 0}, 1.0), NFParams::defaults(1));
    EXPECT_FALSE(c.ok);
    EXPECT_EQ(c.k, (Mode{8, 0, 0}));
    EXPECT_GT(c.violation, 0.0);
}

TEST(DiagPsi, Examples) {
    const GridSpec g = GridSpec::flat(1, 8, 0.5);
    EXPECT_EQ(max_abs(diag_step_psi(Symbol(g, 0.0))), 0.0);
    const Symbol w = constant_row(g, Mode{2, 0, 0}, cplx(0.5, 0.25));
    const Symbol b = Symbol::from_function(g, 2.0, [&](const Mode& k, std::span<const double> xi) {
        return k == Mode{2, 0, 0} ? cplx(0.5, 0.25) * 2.0 * g.lambda(xi) : cplx(0.0);
    });
    EXPECT_LE(max_abs(diag_step_psi(b) - w), 1e-15);
}

TEST(DiagPsi, OrderDropsByTwo) {
    const GridSpec g = GridSpec::flat(1, 16, 0.5);
    const Symbol b = random_real_symbol(g, 2, 3, 0.0);
    const Symbol psi = diag_step_psi(b);
    EXPECT_EQ(psi.order(), b.order() - 2.0);
    // |psi|_{-2,0} is comparable to |b|_{0,0}; |psi|_{0,0} is smaller
    EXPECT_LE(seminorm(psi, -2.0, 0, 0.0), seminorm(b, 0.0, 0, 0.0) / (2.0 * 0.5) + 1e-12);
    EXPECT_LT(seminorm(psi, 0.0, 0, 0.0), seminorm(b, 0.0, 0, 0.0));
}

TEST(RegularizationGain, Examples) {
    EXPECT_DOUBLE_EQ(regularization_gain(0.75), 0.25);
    EXPECT_NEAR(regularization_gain(0.9), 0.7, 1e-15);
    EXPECT_LT(regularization_gain(2.0 / 3.0 + 1e-6), 1e-5);
    EXPECT_GT(regularization_gain(2.0 / 3.0 + 1e-6), 0.0);
    EXPECT_THROW(regularization_gain(0.5), std::invalid_argument);
    EXPECT_THROW(regularization_gain(1.0), std::invalid_argument);
}

TEST(Decomposition, ExtractionIsIdempotent) {
    const GridSpec g = GridSpec::flat(1, 8, 0.5);
    const OperatorDecomposition P = OperatorDecomposition::paralinearized(CubicDensity::canonical(1), canonical_datum(g, 0.1));
    const OperatorDecomposition Q = OperatorDecomposition::extract(g, P.dense());
    EXPECT_LE((Q.dense() - P.dense()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LE(max_abs(Q.a - P.a), 1e-15);
    EXPECT_LE(max_abs(Q.b - P.b), 1e-15);
    EXPECT_LE((Q.remainder.A11 - P.remainder.A11).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Decomposition, ParalinearizedReproducesVectorField) {
    for (int d = 1; d <= 2; ++d) {
        const GridSpec g = GridSpec::flat(d, d == 1 ? 16 : 4, 0.5);
        const CubicDensity f = CubicDensity::canonical(d);
        const PairField U = canonical_datum(g, 0.05);
        const OperatorDecomposition P = OperatorDecomposition::paralinearized(f, U);
        CVector v(2 * Eigen::Index(g.size()));
        v << U.u.coeffs, U.ubar.coeffs;
        const CVector TU = P.dense() * v;
        const Field rhs = apply_multiplier(U.u, [&](const Mode& p) { return cplx(g.lambda(p)); }) + eval_Q(f, U.u);
        EXPECT_LE((TU.head(Eigen::Index(g.size())) - kI * rhs.coeffs).norm(), 1e-14 * rhs.coeffs.norm());
        EXPECT_LE(real_to_real_defect(g, P.dense()), 1e-15);
    }
}

TEST(Conjugation, ZeroGeneratorIsIdentity) {
    const GridSpec g = GridSpec::flat(1, 8, 0.5);
    const NFParams p = NFParams::defaults(1);
    const OperatorDecomposition P = OperatorDecomposition::paralinearized(CubicDensity::canonical(1), canonical_datum(g, 0.05));
    for (const StepGenerator& gen : {StepGenerator::diag(Symbol(g, -2.0)), StepGenerator::nf(Symbol(g, 0.0))}) {
        const StepResult r = conjugation_step(P, gen, p, 1.0);
        EXPECT_LE((r.P.dense() - P.dense()).cwiseAbs().maxCoeff(), 1e-15);
        EXPECT_EQ(r.report.before.offdiag, r.report.after.offdiag);
        EXPECT_EQ(r.report.before.non_normal, r.report.after.non_normal);
        EXPECT_EQ(r.report.before.remainder, r.report.after.remainder);
        EXPECT_LE(r.report.symplectic_residual, 1e-15);
    }
}

TEST(Conjugation, NonRealNfGeneratorRejected) {
    const GridSpec g = GridSpec::flat(1, 6, 0.5);
    Symbol bad = constant_row(g, Mode{1, 0, 0}, 1.0);
    EXPECT_THROW(StepGenerator::nf(bad).dense(), std::invalid_argument);
}

TEST(Conjugation, DiagStepGolden) {
    // Canonical density, d = 1, K = 16, m = 0.5, eps = 0.05, seed 1; measured at first run.
    const GridSpec g = GridSpec::flat(1, 16, 0.5);
    const NFParams p = NFParams::defaults(1);
    const OperatorDecomposition P = OperatorDecomposition::paralinearized(CubicDensity::canonical(1), canonical_datum(g, 0.05));
    const StepResult r = conjugation_step(P, diag_generator(P), p, 1.0);
    EXPECT_NEAR(r.report.before.offdiag, 4.6322324112953225e-3, 1e-6 * 4.63e-3);
    EXPECT_NEAR(r.report.after.offdiag, 1.2320687179529524e-4, 1e-6 * 1.23e-4);
    EXPECT_LT(r.report.after.offdiag, r.report.before.offdiag);
    EXPECT_LE(r.report.symplectic_residual, 1e-10);
    EXPECT_LE(real_to_real_defect(g, r.P.dense()), 1e-14);
}

TEST(Conjugation, NfStepDecreasesNonNormalContent) {
    const GridSpec g = GridSpec::flat(1, 16, 0.5);
    const NFParams p = NFParams::defaults(1);
    const OperatorDecomposition P = OperatorDecomposition::paralinearized(CubicDensity::canonical(1), canonical_datum(g, 0.05));
    const StepResult r = conjugation_step(P, nf_generator(P, p), p, 1.0);
    EXPECT_LT(r.report.after.non_normal, 0.5 * r.report.before.non_normal);
    EXPECT_LE(r.report.symplectic_residual, 1e-10);
    const auto j = nlohmann::json::parse(r.report.to_json());
    EXPECT_EQ(j["kind"], "nf");
    EXPECT_TRUE(j.contains("worst_offender"));
}

TEST(Conjugation, TangentMatchesSymmetricDifference) {
    // The linearized pipeline is the first-order part of the full one:
    // (P(tU) - P(-tU)) / 2t = tangent + O(t^2).
    const GridSpec g = GridSpec::flat(1, 8, 0.5);
    const NFParams p = NFParams::defaults(1);
    const CubicDensity f = CubicDensity::canonical(1);
    const Field u = shaped_initial_data(g, 4.0, 1.0, 3);
    auto full = [&](double t) {
        OperatorDecomposition P = OperatorDecomposition::paralinearized(f, PairField(cplx(t) * u));
        P = conjugate(P, diag_generator(P));
        return conjugate(P, nf_generator(P, p)).dense();
    };
    const CMatrix L = linear_pair_operator(g);
    const CMatrix tangent = linearized_pipeline(OperatorDecomposition::paralinearized(f, PairField(u)), p, 1).dense() - L;
    double err[2];
    int i = 0;
    for (double t : {0.02, 0.01}) err[i++] = ((full(t) - full(-t)) / (2.0 * t) - tangent).cwiseAbs().maxCoeff();
    EXPECT_LE(err[1], 1e-3 * tangent.cwiseAbs().maxCoeff());
    EXPECT_NEAR(err[0] / err[1], 4.0, 0.8);
}

TEST(Birkhoff, LinearRemainderCancelsExactly) {
    const GridSpec g = GridSpec::flat(1, 8, 0.5);
    const NormalFormRun run = run_normal_form(CubicDensity::canonical(1), canonical_datum(g, 0.05), NFParams::defaults(1), 1, 1.0);
    ASSERT_TRUE(run.birkhoff_done) << run.error;
    EXPECT_GT(run.linear_remainder_before, 0.0);
    EXPECT_LE(run.linear_remainder_after, 1e-10 * run.linear_remainder_before);
    EXPECT_LE(run.birkhoff_identity_residual, 1e-12);
    ASSERT_EQ(run.steps.size(), 3u);
    EXPECT_EQ(run.steps.back().kind, StepKind::birkhoff);
    // the nonlinear step removes the bulk of the remainder too
    EXPECT_LT(run.steps.back().after.remainder, 0.1 * run.steps.back().before.remainder);
}

TEST(Birkhoff, FamilyMatchesPipelineRemainder) {
    const GridSpec g = GridSpec::flat(1, 6, 0.5);
    const NFParams p = NFParams::defaults(1);
    const CubicDensity f = CubicDensity::canonical(1);
    const PairField U = canonical_datum(g, 0.05);
    const LinearFamily R = linear_remainder_family(f, g, p, 1);
    const PairLinOp direct = linearized_pipeline(OperatorDecomposition::paralinearized(f, U), p, 1).remainder;
    const PairLinOp viaFamily = R.at(U);
    const double scale = direct.dense().cwiseAbs().maxCoeff();
    EXPECT_LE((viaFamily.dense() - direct.dense()).cwiseAbs().maxCoeff(), 1e-13 * scale);
}

TEST(Driver, ZeroStepsEchoesInitialNorms) {
    const GridSpec g = GridSpec::flat(1, 8, 0.5);
    const CubicDensity f = CubicDensity::canonical(1);
    const PairField U = canonical_datum(g, 0.05);
    const NormalFormRun run = run_normal_form(f, U, NFParams::defaults(1), 0, 1.0);
    EXPECT_TRUE(run.steps.empty());
    EXPECT_FALSE(run.birkhoff_done);
    const StepNorms n = measure(OperatorDecomposition::paralinearized(f, U), NFParams::defaults(1), 1.0);
    EXPECT_EQ(run.initial.offdiag, n.offdiag);
    EXPECT_EQ(run.initial.remainder, n.remainder);
    EXPECT_THROW(run_normal_form(f, U, NFParams::defaults(1), -1, 1.0), std::invalid_argument);
}

TEST(Driver, ResonantMassFailsLoudly) {
    // G = I, m = 2: Lambda(k) - Lambda(k - xi) - Lambda(xi) = 2 (k - xi) xi - 2 vanishes at k = 2, xi = 1.
    const GridSpec g = GridSpec::flat(1, 6, 2.0);
    const NormalFormRun run = run_normal_form(CubicDensity::canonical(1), canonical_datum(g, 0.05), NFParams::defaults(1), 1, 1.0);
    EXPECT_FALSE(run.birkhoff_done);
    EXPECT_NE(run.error.find("zero divisor"), std::string::npos);
}

TEST(Driver, CanonicalLedgerIsMonotone) {
    const GridSpec g = GridSpec::flat(1, 16, 0.5);
    const NormalFormRun run = run_normal_form(CubicDensity::canonical(1), canonical_datum(g, 0.05), NFParams::defaults(1), 2, 1.0);
    EXPECT_TRUE(run.offdiag_monotone());
    EXPECT_TRUE(run.non_normal_monotone());
    EXPECT_GE(run.linear_drop(), 10.0);
    for (const auto& r : run.steps)
        if (r.kind != StepKind::birkhoff) EXPECT_LE(r.symplectic_residual, 1e-10);
}
