#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "dnls/small_divisors.hpp"

using namespace dnls;

namespace {

using Idx = Eigen::Index;

// Random table supported where k - xi lies in the box.
CMatrix random_table(const GridSpec& g, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    const Idx N = Idx(g.size());
    CMatrix t = CMatrix::Zero(N, N);
    for (std::size_t k = 0; k < g.size(); ++k)
        for (std::size_t x = 0; x < g.size(); ++x)
            if (g.in_box(g.mode(k) - g.mode(x))) t(Idx(k), Idx(x)) = {n(rng), n(rng)};
    return t;
}

LinearFamily random_family(const GridSpec& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    LinearFamily R(g);
    R.t11_u = random_table(g, rng);
    R.t11_ubar = random_table(g, rng);
    R.t12_u = random_table(g, rng);
    R.t12_ubar = random_table(g, rng);
    return R;
}

PairField random_pair(const GridSpec& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Field u(g);
    for (std::size_t i = 0; i < g.size(); ++i) u[i] = cplx(n(rng), n(rng)) / (1.0 + norm_sq(g.mode(i)));
    return PairField(u);
}

}  // namespace

TEST(OmegaG, Ordering) {
    RMatrix G(2, 2);
    G << 1.5, 0.25, 0.25, 2.0;
    EXPECT_EQ(omega_g(G), (std::vector<double>{1.5, 0.25, 2.0}));
    EXPECT_EQ(omega_g(RMatrix::Constant(1, 1, 3.0)), std::vector<double>{3.0});
    EXPECT_EQ(omega_g(RMatrix::Identity(3, 3)).size(), 6u);
    EXPECT_EQ(d_star(1), 1);
    EXPECT_EQ(d_star(2), 3);
    EXPECT_EQ(d_star(3), 6);
}

TEST(ThreeWave, FlatIdentities) {
    const GridSpec g = GridSpec::flat(2, 6, 0.5);
    for (std::size_t a = 0; a < g.size(); a += 7)
        for (std::size_t b = 0; b < g.size(); b += 5) {
            const Mode& xi = g.mode(a);
            const Mode& k = g.mode(b);
            const double dot = xi[0] * k[0] + xi[1] * k[1];
            EXPECT_DOUBLE_EQ(three_wave(g, xi, k, -1, -1), 2.0 * dot - 0.5);
        }
    EXPECT_DOUBLE_EQ(three_wave(g, Mode{}, Mode{}, -1, -1), -0.5);
    EXPECT_DOUBLE_EQ(three_wave(g, Mode{}, Mode{}, 1, 1), 1.5);
}

TEST(ThreeWave, PositivityAndSwapSymmetry) {
    RMatrix G(2, 2);
    G << 1.1, 0.07, 0.07, 0.93;
    const GridSpec g(2, 5, G, 0.37);
    for (std::size_t a = 0; a < g.size(); ++a)
        for (std::size_t b = 0; b < g.size(); b += 3) {
            const Mode& xi = g.mode(a);
            const Mode& k = g.mode(b);
            EXPECT_GE(three_wave(g, xi, k, 1, 1), 3.0 * 0.37 - 1e-14);
            for (int s : {1, -1})
                EXPECT_NEAR(three_wave(g, xi, k, s, s), three_wave(g, k, xi, s, s), 1e-13 * three_wave(g, xi, k, 1, 1));
        }
}

TEST(Certify, FlatHalfMass) {
    const GridSpec g = GridSpec::flat(1, 8, 0.5);
    const LowerBoundReport r = certify_lower_bound(g, 0.5, 1e-3, 0.0, 32);
    EXPECT_DOUBLE_EQ(r.min_value, 0.5);
    EXPECT_TRUE(r.pass);
    // the same by direct enumeration
    double mn = INFINITY, mpp = INFINITY;
    for (int x = -32; x <= 32; ++x)
        for (int k = -32; k <= 32; ++k) {
            mn = std::min(mn, std::abs(three_wave(g, Mode{x, 0, 0}, Mode{k, 0, 0}, -1, -1)));
            mpp = std::min(mpp, std::abs(three_wave(g, Mode{x, 0, 0}, Mode{k, 0, 0}, 1, 1)));
        }
    EXPECT_DOUBLE_EQ(mn, 0.5);
    EXPECT_DOUBLE_EQ(mpp, 1.5);
}

TEST(Certify, FailureReportsArgmin) {
    const GridSpec g = GridSpec::flat(1, 4, 0.5);
    const LowerBoundReport r = certify_lower_bound(g, 0.5, 0.9, 0.0, 6);
    EXPECT_FALSE(r.pass);
    EXPECT_DOUBLE_EQ(std::abs(three_wave(g, r.xi, r.k, r.sigma, r.sigma_p)), r.min_value);
    EXPECT_THROW(certify_lower_bound(g, 0.5, 0.1, 0.0, 0), std::invalid_argument);
}

TEST(Certify, MonotoneInRadius) {
    RMatrix G(2, 2);
    G << 1.0, 0.13, 0.13, 1.21;
    const GridSpec g(2, 3, G, 0.41);
    double prev = INFINITY;
    for (int R = 1; R <= 6; ++R) {
        const double v = certify_lower_bound(g, 0.41, 1e-3, 1.0, R).min_value;
        EXPECT_LE(v, prev);
        prev = v;
    }
}

TEST(Certify, EmpiricalTau) {
    const GridSpec g = GridSpec::flat(1, 4, 0.5);
    EXPECT_EQ(empirical_tau(g, 0.5, 1e-3, 8, 4.0), 0.0);
    EXPECT_TRUE(std::isinf(empirical_tau(g, 0.5, 0.9, 8, 4.0)));
    EXPECT_EQ(default_certify_radius(1), 32);
    EXPECT_EQ(default_certify_radius(2), 12);
}

TEST(Diophantine, Examples) {
    EXPECT_TRUE(diophantine_test(0.5, {1.0}, 0.4, 1.0, 10));
    EXPECT_FALSE(diophantine_test(0.75, {0.25, 0.5}, 1e-3, 3.0, 10));  // 0.75 = 0.25 + 0.5
    EXPECT_TRUE(diophantine_test(0.75, {0.25, 0.5}, 0.0, 3.0, 10));
    const DiophantineReport r = diophantine_check(0.75, {0.25, 0.5}, 1e-3, 3.0, 10);
    EXPECT_EQ(r.worst_value, 0.0);
    EXPECT_EQ(r.worst_ell.size(), 2u);
}

TEST(MassScan, ShrinksWithGamma) {
    const std::vector<double> omega{1.0, 0.3183098861837907, 1.4142135623730951};
    ScanConfig cfg;
    cfg.mass_count = 2000;
    double prev = 1.0;
    for (double gamma : {1e-1, 1e-2, 1e-3, 1e-4}) {
        cfg.gamma = gamma;
        const double f = excluded_measure_scan(cfg, omega, 2);
        EXPECT_LE(f, prev);
        prev = f;
    }
}

TEST(MassScan, ExcludedFractionEnvelope) {
    ScanConfig cfg;
    const std::vector<double> omega = omega_g(generic_metric(2, 0.5, cfg, 11));
    for (double gamma : {1e-2, 1e-3}) {
        cfg.gamma = gamma;
        EXPECT_LE(excluded_measure_scan(cfg, omega, 2), 10.0 * gamma);
    }
}

TEST(MassScan, RowsAndCsv) {
    ScanConfig cfg;
    cfg.mass_count = 4;
    const auto rows = mass_scan(cfg, {1.0}, 1);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_DOUBLE_EQ(rows[0].m, 0.125);
    std::ostringstream os;
    write_mass_scan_csv(os, rows);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "m,pass,worst_l_1,worst_value");
    std::ostringstream sum;
    write_scan_summary_csv(sum, 1e-3, 0.25);
    EXPECT_EQ(sum.str(), "gamma,excluded_fraction\n0.001,0.25\n");
}

TEST(ScanConfig, Validation) {
    ScanConfig c;
    EXPECT_NO_THROW(c.validate(2));
    EXPECT_EQ(c.tau_for(2), 4.0);
    c.tau_star = 2.0;
    EXPECT_THROW(c.validate(2), std::invalid_argument);
    c = ScanConfig{};
    c.gamma = 1.0;
    EXPECT_THROW(c.validate(1), std::invalid_argument);
    c = ScanConfig{};
    c.mass_hi = 0.0;
    EXPECT_THROW(c.validate(1), std::invalid_argument);
}

TEST(GenericMetric, SeededAndAdmissible) {
    const ScanConfig cfg;
    const RMatrix G = generic_metric(2, 0.5, cfg, 5);
    EXPECT_EQ(G, generic_metric(2, 0.5, cfg, 5));
    EXPECT_LE((G - G.transpose()).norm(), 0.0);
    EXPECT_EQ(G.llt().info(), Eigen::Success);
    EXPECT_LE((G - RMatrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 0.2);
    EXPECT_TRUE(diophantine_test(0.5, omega_g(G), cfg.gamma, cfg.tau_for(2), cfg.ell_cutoff));
}

TEST(BilinearApply, Oracle) {
    const GridSpec g = GridSpec::flat(1, 3, 1.0);
    const Idx N = Idx(g.size());
    CMatrix t = CMatrix::Constant(N, N, 2.0);
    const Field v = Field::single_mode(g, Mode{1, 0, 0}, cplx(0.0, 1.0));
    const CMatrix M = bilinear_apply(g, t, v);
    for (Idx k = 0; k < N; ++k)
        for (Idx x = 0; x < N; ++x)
            EXPECT_EQ(M(k, x), g.mode(std::size_t(k))[0] - g.mode(std::size_t(x))[0] == 1 ? cplx(0.0, 2.0) : cplx(0.0));
}

TEST(BirkhoffF, Examples) {
    const GridSpec g = GridSpec::flat(1, 4, 1.0);
    const Idx N = Idx(g.size());
    EXPECT_EQ(birkhoff_F(CMatrix::Zero(N, N), 1, 1, g).cwiseAbs().maxCoeff(), 0.0);
    CMatrix r = CMatrix::Zero(N, N);
    const Idx k0 = Idx(*g.index_of(Mode{2, 0, 0})), x0 = Idx(*g.index_of(Mode{1, 0, 0}));
    r(k0, x0) = 1.0;
    const CMatrix F = birkhoff_F(r, 1, 1, g);
    // Lambda(2) + Lambda(1) + Lambda(1) = 5 + 2 + 2
    EXPECT_NEAR(std::abs(F(k0, x0) - (-1.0 / (kI * 9.0))), 0.0, 1e-16);
}

TEST(BirkhoffF, ZeroDivisorNamed) {
    // m = 2: Lambda(k) - Lambda(k - xi) - Lambda(xi) = 2 xi (k - xi) - 2 vanishes at k = 2, xi = 1
    const GridSpec g = GridSpec::flat(1, 4, 2.0);
    const Idx N = Idx(g.size());
    try {
        birkhoff_F(CMatrix::Zero(N, N), -1, -1, g);
        FAIL() << "expected a zero divisor";
    } catch (const ZeroDivisorError& e) {
        EXPECT_EQ(2.0 * e.xi[0] * (e.k[0] - e.xi[0]), 2.0);
        EXPECT_NE(std::string(e.what()).find("zero divisor"), std::string::npos);
    }
}

TEST(BirkhoffSolve, ZeroInZeroOut) {
    const GridSpec g = GridSpec::flat(1, 4, 0.5);
    LinearFamily R(g);
    const Idx N = Idx(g.size());
    R.t11_u = R.t11_ubar = R.t12_u = R.t12_ubar = CMatrix::Zero(N, N);
    const LinearFamily F = birkhoff_matrix_solve(R);
    EXPECT_EQ(F.t11_u.cwiseAbs().maxCoeff() + F.t12_ubar.cwiseAbs().maxCoeff(), 0.0);
}

TEST(BirkhoffSolve, HomologicalIdentityOnRandomFamilies) {
    const GridSpec g = GridSpec::flat(1, 8, 0.5);
    for (unsigned seed = 0; seed < 5; ++seed) {
        const LinearFamily R = random_family(g, seed);
        const LinearFamily F = birkhoff_matrix_solve(R);
        EXPECT_LE(birkhoff_residual(R, F, random_pair(g, 100 + seed)), 1e-12);
        // F(U) is finite on weighted spaces
        EXPECT_TRUE(std::isfinite(pair_operator_norm(g, F.at(random_pair(g, seed)).dense(), 1.0, 2.0)));
    }
}

TEST(BirkhoffSolve, FamilyIsRealLinear) {
    const GridSpec g = GridSpec::flat(1, 5, 0.5);
    const LinearFamily R = random_family(g, 9);
    const PairField U = random_pair(g, 1), V = random_pair(g, 2);
    const PairField W(U.u + cplx(0.7) * V.u);
    const CMatrix lhs = R.at(W).dense();
    const CMatrix rhs = R.at(U).dense() + 0.7 * R.at(V).dense();
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-13 * rhs.cwiseAbs().maxCoeff());
}
