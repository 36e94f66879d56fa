#include "dnls/paradiff.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>

#include <unsupported/Eigen/MatrixFunctions>

namespace dnls {

namespace {

using Idx = Eigen::Index;

Idx ix(std::size_t i) { return Idx(i); }

double japanese_real(std::span<const double> xi, int d) {
    double s = 1.0;
    for (int i = 0; i < d; ++i) s += xi[std::size_t(i)] * xi[std::size_t(i)];
    return std::sqrt(s);
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
    if (!(a == b)) throw std::invalid_argument(std::string(what) + ": symbols live on different grids");
}

// All multi-indices in N^n with total order exactly `order`.
std::vector<std::vector<int>> multi_indices(int n, int order) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(std::size_t(n), 0);
    std::function<void(int, int)> rec = [&](int pos, int left) {
        if (pos == n - 1) {
            cur[std::size_t(pos)] = left;
            out.push_back(cur);
            return;
        }
        for (int v = left; v >= 0; --v) {
            cur[std::size_t(pos)] = v;
            rec(pos + 1, left - v);
        }
    };
    if (n == 0) {
        if (order == 0) out.emplace_back();
        return out;
    }
    rec(0, order);
    return out;
}

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

Symbol apply_derivatives(Symbol a, std::span<const int> x_orders, std::span<const int> xi_orders) {
    for (std::size_t j = 0; j < x_orders.size(); ++j)
        for (int r = 0; r < x_orders[j]; ++r) a = a.dx(int(j));
    for (std::size_t j = 0; j < xi_orders.size(); ++j)
        for (int r = 0; r < xi_orders[j]; ++r) a = a.dxi(int(j));
    return a;
}

CMatrix pair_weights_apply(const GridSpec& grid, const CMatrix& m, double s_in, double s_out) {
    const Idx N = ix(grid.size());
    const Idx blocks = m.rows() / N;
    Eigen::VectorXd w_in(m.cols()), w_out(m.rows());
    for (Idx b = 0; b < blocks; ++b)
        for (Idx i = 0; i < N; ++i) {
            const double jb = japanese(grid.mode(std::size_t(i)));
            w_out[b * N + i] = std::pow(jb, s_out);
        }
    for (Idx b = 0; b < m.cols() / N; ++b)
        for (Idx i = 0; i < N; ++i) {
            const double jb = japanese(grid.mode(std::size_t(i)));
            w_in[b * N + i] = std::pow(jb, -s_in);
        }
    return w_out.asDiagonal() * m * w_in.asDiagonal();
}

double power_norm(const CMatrix& B) {
    if (B.size() == 0) return 0.0;
    CVector v(B.cols());
    for (Idx i = 0; i < v.size(); ++i) v[i] = cplx(1.0 + 0.25 * std::sin(1.3 * double(i) + 0.7), 0.1 * std::cos(0.9 * double(i)));
    v.normalize();
    double prev = 0.0;
    double sigma2 = 0.0;
    for (int it = 0; it < 200; ++it) {
        CVector w = B.adjoint() * (B * v);
        sigma2 = std::abs(v.dot(w));
        const double nw = w.norm();
        if (nw == 0.0) return 0.0;
        v = w / nw;
        if (it > 0 && std::abs(sigma2 - prev) <= 1e-10 * std::max(sigma2, 1e-300)) break;
        prev = sigma2;
    }
    return std::sqrt((B * v).squaredNorm());
}

}  // namespace

// ---- Symbol ----------------------------------------------------------------

Symbol::Symbol(GridSpec grid, double order)
    : grid_(std::move(grid)), order_(order), values_(CMatrix::Zero(ix(grid_.size()), ix(grid_.half_size()))) {}

Symbol Symbol::from_function(const GridSpec& grid, double order, const RowFn& fn) {
    Symbol a(grid, order);
    for (std::size_t k = 0; k < grid.size(); ++k)
        for (std::size_t h = 0; h < grid.half_size(); ++h) {
            const auto xi = half_to_real(grid.half_point(h));
            a(k, h) = fn(grid.mode(k), std::span<const double>(xi.data(), std::size_t(grid.dim())));
        }
    return a;
}

Symbol Symbol::multiplier(const GridSpec& grid, double order, const FiberFn& phi) {
    Symbol a(grid, order);
    const std::size_t zero = *grid.index_of(Mode{0, 0, 0});
    for (std::size_t h = 0; h < grid.half_size(); ++h) {
        const auto xi = half_to_real(grid.half_point(h));
        a(zero, h) = phi(std::span<const double>(xi.data(), std::size_t(grid.dim())));
    }
    return a;
}

Symbol Symbol::lambda(const GridSpec& grid) {
    return multiplier(grid, 2.0, [&grid](std::span<const double> xi) { return cplx(grid.lambda(xi)); });
}

Symbol Symbol::from_lattice_table(const GridSpec& grid, double order, const CMatrix& table) {
    if (table.rows() != ix(grid.size()) || table.cols() != ix(grid.size()))
        throw std::invalid_argument("from_lattice_table: table must be N x N");
    Symbol a(grid, order);
    const int d = grid.dim();
    for (std::size_t h = 0; h < grid.half_size(); ++h) {
        const Mode& q = grid.half_point(h);
        std::vector<int> odd;
        for (int i = 0; i < d; ++i)
            if (q[std::size_t(i)] % 2 != 0) odd.push_back(i);
        const int corners = 1 << odd.size();
        const double w = 1.0 / corners;
        for (int c = 0; c < corners; ++c) {
            Mode p{0, 0, 0};
            for (int i = 0; i < d; ++i) p[std::size_t(i)] = q[std::size_t(i)] / 2;
            for (std::size_t t = 0; t < odd.size(); ++t) {
                const std::size_t i = std::size_t(odd[t]);
                const int lo = (q[i] - 1) / 2;  // q_i odd, so exact
                p[i] = ((c >> t) & 1) ? lo + 1 : lo;
            }
            const std::size_t col = *grid.index_of(p);
            a.values_.col(ix(h)) += w * table.col(ix(col));
        }
    }
    return a;
}

cplx Symbol::at(const Mode& k, const Mode& doubled_xi) const {
    const auto r = grid_.index_of(k);
    const auto c = grid_.half_index_of(doubled_xi);
    if (!r || !c) return 0.0;
    return values_(ix(*r), ix(*c));
}

double Symbol::reality_defect() const {
    double worst = 0.0;
    for (std::size_t k = 0; k < grid_.size(); ++k) {
        const std::size_t nk = grid_.neg_index(k);
        worst = std::max(worst, (values_.row(ix(nk)) - values_.row(ix(k)).conjugate()).cwiseAbs().maxCoeff());
    }
    return worst;
}

double Symbol::x_dependence() const {
    double worst = 0.0;
    const std::size_t zero = *grid_.index_of(Mode{0, 0, 0});
    for (std::size_t k = 0; k < grid_.size(); ++k)
        if (k != zero) worst = std::max(worst, values_.row(ix(k)).cwiseAbs().maxCoeff());
    return worst;
}

Symbol Symbol::conj_x() const {
    Symbol out(grid_, order_);
    for (std::size_t k = 0; k < grid_.size(); ++k)
        out.values_.row(ix(k)) = values_.row(ix(grid_.neg_index(k))).conjugate();
    return out;
}

Symbol Symbol::reflect_xi() const {
    Symbol out(grid_, order_);
    for (std::size_t h = 0; h < grid_.half_size(); ++h)
        out.values_.col(ix(h)) = values_.col(ix(grid_.neg_half_index(h)));
    return out;
}

Symbol Symbol::bar() const { return conj_x().reflect_xi(); }

Symbol Symbol::dx(int j) const {
    Symbol out(grid_, order_);
    for (std::size_t k = 0; k < grid_.size(); ++k)
        out.values_.row(ix(k)) = (kI * double(grid_.mode(k)[std::size_t(j)])) * values_.row(ix(k));
    return out;
}

Symbol Symbol::dxi(int j) const {
    if (j < 0 || j >= grid_.dim()) throw std::invalid_argument("dxi: direction out of range");
    Symbol out(grid_, order_ - 1.0);
    const int R = 2 * grid_.K();
    auto col = [&](Mode q) { return values_.col(ix(*grid_.half_index_of(q))); };
    for (std::size_t h = 0; h < grid_.half_size(); ++h) {
        const Mode q = grid_.half_point(h);
        Mode e{0, 0, 0};
        e[std::size_t(j)] = 1;
        const int c = q[std::size_t(j)];
        // step 1/2: central (f(+)-f(-)) / 1, one-sided (-3 f0 + 4 f1 - f2) / 1
        if (c > -R && c < R)
            out.values_.col(ix(h)) = col(q + e) - col(q - e);
        else if (c == -R)
            out.values_.col(ix(h)) = -3.0 * col(q) + 4.0 * col(q + e) - col(q + e + e);
        else
            out.values_.col(ix(h)) = 3.0 * col(q) - 4.0 * col(q - e) + col(q - e - e);
    }
    return out;
}

Symbol Symbol::divide_by(const FiberFn& w, double order_shift) const {
    Symbol out(grid_, order_ + order_shift);
    for (std::size_t h = 0; h < grid_.half_size(); ++h) {
        const auto xi = half_to_real(grid_.half_point(h));
        out.values_.col(ix(h)) = values_.col(ix(h)) / w(std::span<const double>(xi.data(), std::size_t(grid_.dim())));
    }
    return out;
}

Symbol& Symbol::operator+=(const Symbol& o) {
    require_same_grid(grid_, o.grid_, "symbol sum");
    values_ += o.values_;
    order_ = std::max(order_, o.order_);
    return *this;
}

Symbol& Symbol::operator-=(const Symbol& o) {
    require_same_grid(grid_, o.grid_, "symbol difference");
    values_ -= o.values_;
    order_ = std::max(order_, o.order_);
    return *this;
}

Symbol& Symbol::operator*=(cplx s) {
    values_ *= s;
    return *this;
}

Symbol operator+(Symbol a, const Symbol& b) { return a += b; }
Symbol operator-(Symbol a, const Symbol& b) { return a -= b; }
Symbol operator*(cplx s, Symbol a) { return a *= s; }

Symbol product(const Symbol& a, const Symbol& b) {
    require_same_grid(a.grid(), b.grid(), "symbol product");
    const GridSpec& g = a.grid();
    Symbol out(g, a.order() + b.order());
    for (std::size_t k1 = 0; k1 < g.size(); ++k1) {
        if (a.values().row(ix(k1)).isZero(0.0)) continue;
        for (std::size_t k2 = 0; k2 < g.size(); ++k2) {
            const auto k = g.index_of(g.mode(k1) + g.mode(k2));
            if (!k) continue;
            out.values().row(ix(*k)) += a.values().row(ix(k1)).cwiseProduct(b.values().row(ix(k2)));
        }
    }
    return out;
}

// ---- operators ---------------------------------------------------------------

LinOp::LinOp(GridSpec g) : grid(std::move(g)), matrix(CMatrix::Zero(ix(grid.size()), ix(grid.size()))) {}

LinOp::LinOp(GridSpec g, CMatrix m) : grid(std::move(g)), matrix(std::move(m)) {
    if (matrix.rows() != ix(grid.size()) || matrix.cols() != ix(grid.size()))
        throw std::invalid_argument("LinOp: matrix must be N x N");
}

LinOp LinOp::identity(const GridSpec& g) { return LinOp(g, CMatrix::Identity(ix(g.size()), ix(g.size()))); }

CMatrix bar(const GridSpec& grid, const CMatrix& m) {
    const std::size_t N = grid.size();
    CMatrix out(ix(N), ix(N));
    for (std::size_t j = 0; j < N; ++j)
        for (std::size_t k = 0; k < N; ++k)
            out(ix(j), ix(k)) = std::conj(m(ix(grid.neg_index(j)), ix(grid.neg_index(k))));
    return out;
}

PairLinOp::PairLinOp(GridSpec g)
    : grid(std::move(g)),
      A11(CMatrix::Zero(ix(grid.size()), ix(grid.size()))),
      A12(CMatrix::Zero(ix(grid.size()), ix(grid.size()))) {}

PairLinOp::PairLinOp(GridSpec g, CMatrix a11, CMatrix a12)
    : grid(std::move(g)), A11(std::move(a11)), A12(std::move(a12)) {
    const Idx N = ix(grid.size());
    if (A11.rows() != N || A11.cols() != N || A12.rows() != N || A12.cols() != N)
        throw std::invalid_argument("PairLinOp: blocks must be N x N");
}

PairLinOp PairLinOp::identity(const GridSpec& g) {
    return PairLinOp(g, CMatrix::Identity(ix(g.size()), ix(g.size())), CMatrix::Zero(ix(g.size()), ix(g.size())));
}

PairLinOp PairLinOp::from_dense(const GridSpec& g, const CMatrix& m) {
    const Idx N = ix(g.size());
    if (m.rows() != 2 * N || m.cols() != 2 * N) throw std::invalid_argument("PairLinOp::from_dense: size mismatch");
    return PairLinOp(g, m.block(0, 0, N, N), m.block(0, N, N, N));
}

CMatrix PairLinOp::dense() const {
    const Idx N = ix(grid.size());
    CMatrix m(2 * N, 2 * N);
    m.block(0, 0, N, N) = A11;
    m.block(0, N, N, N) = A12;
    m.block(N, 0, N, N) = bar(grid, A12);
    m.block(N, N, N, N) = bar(grid, A11);
    return m;
}

PairField PairLinOp::apply(const PairField& U) const {
    Field u(grid, A11 * U.u.coeffs + A12 * U.ubar.coeffs);
    Field ub(grid, bar(grid, A12) * U.u.coeffs + bar(grid, A11) * U.ubar.coeffs);
    const double scale = 1.0 + u.coeffs.cwiseAbs().maxCoeff();
    return PairField(std::move(u), std::move(ub), 1e-9 * scale);
}

double real_to_real_defect(const GridSpec& grid, const CMatrix& dense) {
    const Idx N = ix(grid.size());
    const double d1 = (dense.block(N, 0, N, N) - bar(grid, dense.block(0, N, N, N))).cwiseAbs().maxCoeff();
    const double d2 = (dense.block(N, N, N, N) - bar(grid, dense.block(0, 0, N, N))).cwiseAbs().maxCoeff();
    return std::max(d1, d2);
}

// ---- quantization ------------------------------------------------------------

double eta(double y) {
    constexpr double lo = 1.25;
    constexpr double hi = 1.6;
    y = std::abs(y);
    if (y <= lo) return 1.0;
    if (y >= hi) return 0.0;
    auto h = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
    const double t = (hi - y) / (hi - lo);
    return h(t) / (h(t) + h(1.0 - t));
}

double quantization_weight(const GridSpec& grid, const Mode& j, const Mode& k, const Cutoff& cutoff) {
    const Mode diff = j - k;
    const Mode sum = j + k;
    return cutoff(std::sqrt(norm_sq(diff)) / (grid.eps_q() * japanese(sum)));
}

LinOp quantize_bw(const Symbol& a, const Cutoff& cutoff) {
    const GridSpec& g = a.grid();
    LinOp op(g);
    for (std::size_t j = 0; j < g.size(); ++j)
        for (std::size_t k = 0; k < g.size(); ++k) {
            const Mode& mj = g.mode(j);
            const Mode& mk = g.mode(k);
            const auto row = g.index_of(mj - mk);
            if (!row) continue;
            const double w = quantization_weight(g, mj, mk, cutoff);
            if (w == 0.0) continue;
            op.matrix(ix(j), ix(k)) = w * a(*row, *g.half_index_of(mj + mk));
        }
    return op;
}

PairLinOp quantize_bw(const MatrixSymbol& A, const Cutoff& cutoff) {
    require_same_grid(A.a.grid(), A.b.grid(), "matrix symbol");
    return PairLinOp(A.a.grid(), quantize_bw(A.a, cutoff).matrix, quantize_bw(A.b, cutoff).matrix);
}

// ---- seminorms and composition ------------------------------------------------

double seminorm(const Symbol& a, double m, int s, double delta) {
    if (s < 0 || s > kMaxSeminormOrder) throw std::invalid_argument("seminorm: order out of range");
    const GridSpec& g = a.grid();
    const int d = g.dim();
    SpectralTransform tr(g, 2 * g.side());
    const double to_field = std::pow(2.0 * kPi, 0.5 * d);

    std::vector<double> fiber_weight_base(g.half_size());
    for (std::size_t h = 0; h < g.half_size(); ++h) {
        const auto xi = half_to_real(g.half_point(h));
        fiber_weight_base[h] = japanese_real(std::span<const double>(xi.data(), std::size_t(d)), d);
    }

    double worst = 0.0;
    for (int n = 0; n <= s; ++n)
        for (const auto& idx : multi_indices(2 * d, n)) {
            const std::span<const int> xo(idx.data(), std::size_t(d));
            const std::span<const int> fo(idx.data() + d, std::size_t(d));
            int fiber_order = 0;
            for (int v : fo) fiber_order += v;
            const Symbol da = apply_derivatives(a, xo, fo);
            for (std::size_t h = 0; h < g.half_size(); ++h) {
                const Field col(g, to_field * da.values().col(ix(h)));
                const auto samples = tr.to_samples(col);
                double sup = 0.0;
                for (const cplx& v : samples) sup = std::max(sup, std::abs(v));
                worst = std::max(worst, sup * std::pow(fiber_weight_base[h], -m + delta * fiber_order));
            }
        }
    return worst;
}

Symbol poisson_bracket(const Symbol& a, const Symbol& b) {
    Symbol out(a.grid(), a.order() + b.order() - 1.0);
    for (int j = 0; j < a.grid().dim(); ++j) {
        out += product(a.dxi(j), b.dx(j));
        out -= product(a.dx(j), b.dxi(j));
    }
    out.set_order(a.order() + b.order() - 1.0);
    return out;
}

Symbol compose_expansion(const Symbol& a, const Symbol& b, int rho) {
    require_same_grid(a.grid(), b.grid(), "composition");
    if (rho < 1) throw std::invalid_argument("compose_expansion: rho must be >= 1");
    const int d = a.grid().dim();
    Symbol out(a.grid(), a.order() + b.order());
    for (int n = 0; n < rho; ++n) {
        const cplx pref = std::pow(cplx(0.0, -0.5), n);
        for (const auto& idx : multi_indices(2 * d, n)) {
            const std::span<const int> alpha(idx.data(), std::size_t(d));
            const std::span<const int> beta(idx.data() + d, std::size_t(d));
            double denom = 1.0;
            int beta_total = 0;
            for (int i = 0; i < d; ++i) {
                denom *= factorial(alpha[std::size_t(i)]) * factorial(beta[std::size_t(i)]);
                beta_total += beta[std::size_t(i)];
            }
            const double sign = (beta_total % 2 == 0) ? 1.0 : -1.0;
            const Symbol left = apply_derivatives(a, beta, alpha);
            const Symbol right = apply_derivatives(b, alpha, beta);
            out += (pref * sign / denom) * product(left, right);
        }
    }
    out.set_order(a.order() + b.order());
    return out;
}

double operator_norm(const GridSpec& grid, const CMatrix& m, double s_in, double s_out) {
    return power_norm(pair_weights_apply(grid, m, s_in, s_out));
}

double pair_operator_norm(const GridSpec& grid, const CMatrix& m, double s_in, double s_out) {
    return power_norm(pair_weights_apply(grid, m, s_in, s_out));
}

int x_band(const Symbol& a) {
    int band = 0;
    const GridSpec& g = a.grid();
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (a.values().row(ix(k)).isZero(0.0)) continue;
        for (int i = 0; i < g.dim(); ++i) band = std::max(band, std::abs(g.mode(k)[std::size_t(i)]));
    }
    return band;
}

double composition_residual(const Symbol& a, const Symbol& b, int rho, double s, double s_out) {
    const GridSpec& g = a.grid();
    CMatrix diff = quantize_bw(a).matrix * quantize_bw(b).matrix - quantize_bw(compose_expansion(a, b, rho)).matrix;
    // Output modes within x_band(a) of the box edge would need intermediate
    // modes outside the box; those rows measure truncation, not the calculus.
    const int inner = g.K() - x_band(a);
    for (std::size_t j = 0; j < g.size(); ++j) {
        bool interior = true;
        for (int i = 0; i < g.dim(); ++i) interior = interior && std::abs(g.mode(j)[std::size_t(i)]) <= inner;
        if (!interior) diff.row(ix(j)).setZero();
    }
    return operator_norm(g, diff, s, s_out);
}

double composition_residual(const Symbol& a, const Symbol& b, int rho, double s) {
    return composition_residual(a, b, rho, s, s - a.order() - b.order() + rho);
}

// ---- structure ------------------------------------------------------------------

LinOp adjoint(const LinOp& A) { return LinOp(A.grid, A.matrix.adjoint()); }

double selfadjoint_residual(const LinOp& A) {
    return operator_norm(A.grid, A.matrix - A.matrix.adjoint(), 0.0, 0.0);
}

CMatrix pair_E(const GridSpec& grid) {
    const Idx N = ix(grid.size());
    CMatrix E = CMatrix::Identity(2 * N, 2 * N);
    E.block(N, N, N, N) *= -1.0;
    return E;
}

CMatrix linear_pair_operator(const GridSpec& grid) {
    const Idx N = ix(grid.size());
    CMatrix L = CMatrix::Zero(2 * N, 2 * N);
    for (Idx i = 0; i < N; ++i) {
        const double lam = grid.lambda(grid.mode(std::size_t(i)));
        L(i, i) = kI * lam;
        L(N + i, N + i) = -kI * lam;
    }
    return L;
}

double hamiltonian_residual(const GridSpec& grid, const CMatrix& dense) {
    const CMatrix X = -kI * pair_E(grid) * dense;
    return pair_operator_norm(grid, X - X.adjoint(), 0.0, 0.0);
}

double hamiltonian_residual(const PairLinOp& M) { return hamiltonian_residual(M.grid, M.dense()); }

CMatrix expm(const CMatrix& m) { return m.exp(); }

CMatrix expm_frechet(const CMatrix& X, const CMatrix& H) {
    const Idx n = X.rows();
    CMatrix big = CMatrix::Zero(2 * n, 2 * n);
    big.block(0, 0, n, n) = X;
    big.block(n, n, n, n) = X;
    big.block(0, n, n, n) = H;
    const CMatrix e = big.exp();
    return e.block(0, n, n, n);
}

LinOp flow(const Symbol& g, double tau) {
    const double scale = 1.0 + g.values().cwiseAbs().maxCoeff();
    if (g.reality_defect() > 1e-12 * scale) throw std::invalid_argument("flow: generator symbol is not real");
    return LinOp(g.grid(), expm((tau * kI) * quantize_bw(g).matrix));
}

PairLinOp flow_offdiag(const Symbol& psi, double tau) {
    const GridSpec& g = psi.grid();
    const PairLinOp gen(g, CMatrix::Zero(ix(g.size()), ix(g.size())), (tau * kI) * quantize_bw(psi).matrix);
    return PairLinOp::from_dense(g, expm(gen.dense()));
}

PairLinOp flow_smoothing(const PairLinOp& F, double tau) {
    return PairLinOp::from_dense(F.grid, expm(tau * F.dense()));
}

double symplectic_residual(const GridSpec& grid, const CMatrix& dense) {
    const CMatrix J = -kI * pair_E(grid);
    return pair_operator_norm(grid, dense.adjoint() * J * dense - J, 0.0, 0.0);
}

double symplectic_residual(const PairLinOp& Q) { return symplectic_residual(Q.grid, Q.dense()); }

// ---- output ---------------------------------------------------------------------

void write_linop_csv(std::ostream& os, const CMatrix& m) {
    os << "row,col,re,im\n" << std::setprecision(17);
    for (Idx r = 0; r < m.rows(); ++r)
        for (Idx c = 0; c < m.cols(); ++c)
            if (m(r, c) != cplx(0.0)) os << r << ',' << c << ',' << m(r, c).real() << ',' << m(r, c).imag() << '\n';
}

void write_symbol_csv(std::ostream& os, const Symbol& a) {
    const GridSpec& g = a.grid();
    const int d = g.dim();
    for (int i = 1; i <= d; ++i) os << "k_" << i << ',';
    for (int i = 1; i <= d; ++i) os << "xi_" << i << ',';
    os << "re,im\n" << std::setprecision(17);
    for (std::size_t k = 0; k < g.size(); ++k)
        for (std::size_t h = 0; h < g.half_size(); ++h) {
            const cplx v = a(k, h);
            if (v == cplx(0.0)) continue;
            for (int i = 0; i < d; ++i) os << g.mode(k)[std::size_t(i)] << ',';
            for (int i = 0; i < d; ++i) os << 0.5 * g.half_point(h)[std::size_t(i)] << ',';
            os << v.real() << ',' << v.imag() << '\n';
        }
}

}  // namespace dnls
