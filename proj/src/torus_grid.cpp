#include "dnls/torus_grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <iomanip>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace dnls {

namespace {

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::optional<std::size_t> box_index(const Mode& p, int d, int radius) {
    const int side = 2 * radius + 1;
    std::size_t idx = 0;
    for (int i = 0; i < d; ++i) {
        const int c = p[std::size_t(i)];
        if (c < -radius || c > radius) return std::nullopt;
        idx = idx * std::size_t(side) + std::size_t(c + radius);
    }
    for (int i = d; i < kMaxDim; ++i)
        if (p[std::size_t(i)] != 0) return std::nullopt;
    return idx;
}

}  // namespace

std::vector<Mode> enumerate_box(int d, int radius) {
    const int side = 2 * radius + 1;
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= std::size_t(side);
    std::vector<Mode> out(total, Mode{0, 0, 0});
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rest = idx;
        for (int i = d - 1; i >= 0; --i) {
            out[idx][std::size_t(i)] = int(rest % std::size_t(side)) - radius;
            rest /= std::size_t(side);
        }
    }
    return out;
}

GridSpec::GridSpec(int d, int K, RMatrix G, double m, double eps_q) {
    if (d < 1 || d > kMaxDim) throw std::invalid_argument("grid: dimension must be in [1, 3]");
    if (K < 1) throw std::invalid_argument("grid: truncation K must be positive");
    if (G.rows() != d || G.cols() != d) throw std::invalid_argument("grid: metric must be d x d");
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (G(i, j) != G(j, i)) throw std::invalid_argument("grid: metric must be symmetric");
    if (!(m > 0.0)) throw std::invalid_argument("grid: mass must be positive");
    if (!(eps_q > 0.0 && eps_q < 0.5)) throw std::invalid_argument("grid: eps_q must lie in (0, 1/2)");

    Eigen::SelfAdjointEigenSolver<RMatrix> es(G);
    const double c0 = es.eigenvalues().minCoeff();
    if (!(c0 > 0.0)) throw std::invalid_argument("grid: metric must be positive definite");

    auto impl = std::make_shared<Impl>();
    impl->d = d;
    impl->K = K;
    impl->G = std::move(G);
    impl->m = m;
    impl->eps_q = eps_q;
    impl->c0 = c0;
    impl->modes = enumerate_box(d, K);
    impl->neg.resize(impl->modes.size());
    for (std::size_t i = 0; i < impl->modes.size(); ++i)
        impl->neg[i] = *box_index(-impl->modes[i], d, K);
    impl->half_points = enumerate_box(d, 2 * K);
    impl->neg_half.resize(impl->half_points.size());
    for (std::size_t i = 0; i < impl->half_points.size(); ++i)
        impl->neg_half[i] = *box_index(-impl->half_points[i], d, 2 * K);
    impl_ = std::move(impl);
}

GridSpec GridSpec::flat(int d, int K, double m, double eps_q) {
    return GridSpec(d, K, RMatrix::Identity(d, d), m, eps_q);
}

std::optional<std::size_t> GridSpec::index_of(const Mode& p) const { return box_index(p, dim(), K()); }

bool GridSpec::in_box(const Mode& p) const { return index_of(p).has_value(); }

std::optional<std::size_t> GridSpec::half_index_of(const Mode& doubled) const {
    return box_index(doubled, dim(), 2 * K());
}

std::size_t GridSpec::half_index_of_mode(const Mode& p) const {
    return *box_index(Mode{2 * p[0], 2 * p[1], 2 * p[2]}, dim(), 2 * K());
}

double GridSpec::lambda(const Mode& xi) const {
    const auto& G = impl_->G;
    double q = 0.0;
    for (int i = 0; i < dim(); ++i)
        for (int j = 0; j < dim(); ++j) q += G(i, j) * double(xi[std::size_t(i)]) * double(xi[std::size_t(j)]);
    return q + impl_->m;
}

double GridSpec::lambda(std::span<const double> xi) const {
    const auto& G = impl_->G;
    double q = 0.0;
    for (int i = 0; i < dim(); ++i)
        for (int j = 0; j < dim(); ++j) q += G(i, j) * xi[std::size_t(i)] * xi[std::size_t(j)];
    return q + impl_->m;
}

double GridSpec::lambda_half(const Mode& doubled) const {
    const auto r = half_to_real(doubled);
    return lambda(std::span<const double>(r));
}

double GridSpec::metric_pairing(std::span<const double> xi, const Mode& k) const {
    const auto& G = impl_->G;
    double q = 0.0;
    for (int i = 0; i < dim(); ++i)
        for (int j = 0; j < dim(); ++j) q += G(i, j) * xi[std::size_t(i)] * double(k[std::size_t(j)]);
    return q;
}

std::string GridSpec::to_config() const {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "grid.d = " << dim() << "\n";
    os << "grid.K = " << K() << "\n";
    os << "grid.G =";
    for (int i = 0; i < dim(); ++i)
        for (int j = 0; j < dim(); ++j) os << (i + j == 0 ? " " : ", ") << impl_->G(i, j);
    os << "\n";
    os << "grid.m = " << mass() << "\n";
    os << "grid.eps_q = " << eps_q() << "\n";
    return os.str();
}

bool operator==(const GridSpec& a, const GridSpec& b) {
    if (a.impl_ == b.impl_) return true;
    return a.dim() == b.dim() && a.K() == b.K() && a.mass() == b.mass() && a.eps_q() == b.eps_q() &&
           a.metric() == b.metric();
}

// ---------------------------------------------------------------------------

Field::Field(GridSpec g) : grid(std::move(g)), coeffs(CVector::Zero(Eigen::Index(grid.size()))) {}

Field::Field(GridSpec g, CVector c) : grid(std::move(g)), coeffs(std::move(c)) {
    if (coeffs.size() != Eigen::Index(grid.size())) throw std::invalid_argument("field: coefficient count mismatch");
}

Field Field::single_mode(const GridSpec& g, const Mode& n, cplx value) {
    Field f(g);
    const auto idx = g.index_of(n);
    if (!idx) throw std::invalid_argument("field: mode outside the box");
    f[*idx] = value;
    return f;
}

Field& Field::operator+=(const Field& o) {
    coeffs += o.coeffs;
    return *this;
}
Field& Field::operator-=(const Field& o) {
    coeffs -= o.coeffs;
    return *this;
}
Field& Field::operator*=(cplx s) {
    coeffs *= s;
    return *this;
}
Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(cplx s, Field a) { return a *= s; }

Field conjugate_field(const Field& u) {
    Field out(u.grid);
    for (std::size_t i = 0; i < u.grid.size(); ++i) out[i] = std::conj(u[u.grid.neg_index(i)]);
    return out;
}

PairField::PairField(const Field& u_in) : u(u_in), ubar(conjugate_field(u_in)) {}

PairField::PairField(Field u_in, Field ubar_in, double tol) : u(std::move(u_in)), ubar(std::move(ubar_in)) {
    const double defect = coupling_defect();
    if (defect > tol)
        throw InvariantViolation("pair field: reality coupling violated (defect " + std::to_string(defect) + ")");
}

double PairField::coupling_defect() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < u.grid.size(); ++i)
        worst = std::max(worst, std::abs(ubar[i] - std::conj(u[u.grid.neg_index(i)])));
    return worst;
}

double lambda_of(const GridSpec& grid, const Mode& xi) { return grid.lambda(xi); }

double sobolev_norm(const Field& f, double s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < f.grid.size(); ++i) {
        const double w = std::pow(1.0 + norm_sq(f.grid.mode(i)), s);
        acc += w * std::norm(f[i]);
    }
    return std::sqrt(acc);
}

Field apply_multiplier(const Field& f, const std::function<cplx(const Mode&)>& phi) {
    Field out(f.grid);
    for (std::size_t i = 0; i < f.grid.size(); ++i) out[i] = phi(f.grid.mode(i)) * f[i];
    return out;
}

Field derivative(const Field& f, int j) {
    Field out(f.grid);
    for (std::size_t i = 0; i < f.grid.size(); ++i) out[i] = kI * double(f.grid.mode(i)[std::size_t(j)]) * f[i];
    return out;
}

// ---------------------------------------------------------------------------

struct SpectralTransform::Plan {
    fftw_complex* buffer = nullptr;
    fftw_plan backward = nullptr;
    fftw_plan forward = nullptr;

    ~Plan() {
        std::lock_guard lock(planner_mutex());
        if (backward) fftw_destroy_plan(backward);
        if (forward) fftw_destroy_plan(forward);
        if (buffer) fftw_free(buffer);
    }
};

SpectralTransform::SpectralTransform(GridSpec grid, int samples_per_dim)
    : grid_(std::move(grid)), M_(samples_per_dim) {
    if (M_ < grid_.side()) throw std::invalid_argument("transform: need at least 2K+1 samples per dimension");
    const int d = grid_.dim();
    total_ = 1;
    for (int i = 0; i < d; ++i) total_ *= std::size_t(M_);
    slot_.resize(grid_.size());
    for (std::size_t idx = 0; idx < grid_.size(); ++idx) {
        const Mode& p = grid_.mode(idx);
        std::size_t s = 0;
        for (int i = 0; i < d; ++i) {
            const int c = p[std::size_t(i)];
            s = s * std::size_t(M_) + std::size_t(c >= 0 ? c : c + M_);
        }
        slot_[idx] = s;
    }
    plan_ = std::make_unique<Plan>();
    std::array<int, kMaxDim> dims{M_, M_, M_};
    std::lock_guard lock(planner_mutex());
    plan_->buffer = fftw_alloc_complex(total_);
    plan_->backward = fftw_plan_dft(d, dims.data(), plan_->buffer, plan_->buffer, FFTW_BACKWARD, FFTW_ESTIMATE);
    plan_->forward = fftw_plan_dft(d, dims.data(), plan_->buffer, plan_->buffer, FFTW_FORWARD, FFTW_ESTIMATE);
}

SpectralTransform::~SpectralTransform() = default;
SpectralTransform::SpectralTransform(SpectralTransform&&) noexcept = default;
SpectralTransform& SpectralTransform::operator=(SpectralTransform&&) noexcept = default;

std::vector<cplx> SpectralTransform::to_samples(const Field& f) {
    auto* buf = reinterpret_cast<cplx*>(plan_->buffer);
    std::fill(buf, buf + total_, cplx{0.0, 0.0});
    for (std::size_t idx = 0; idx < grid_.size(); ++idx) buf[slot_[idx]] = f[idx];
    fftw_execute(plan_->backward);
    const double scale = std::pow(2.0 * kPi, -0.5 * grid_.dim());
    std::vector<cplx> out(buf, buf + total_);
    for (auto& v : out) v *= scale;
    return out;
}

Field SpectralTransform::from_samples(std::span<const cplx> samples) {
    if (samples.size() != total_) throw std::invalid_argument("transform: sample count does not match the grid");
    auto* buf = reinterpret_cast<cplx*>(plan_->buffer);
    std::copy(samples.begin(), samples.end(), buf);
    fftw_execute(plan_->forward);
    const double scale = std::pow(2.0 * kPi, 0.5 * grid_.dim()) / double(total_);
    Field out(grid_);
    for (std::size_t idx = 0; idx < grid_.size(); ++idx) out[idx] = scale * buf[slot_[idx]];
    return out;
}

Field transform_forward(const GridSpec& grid, std::span<const cplx> samples) {
    SpectralTransform t(grid, grid.side());
    return t.from_samples(samples);
}

std::vector<cplx> transform_inverse(const Field& f) {
    SpectralTransform t(f.grid, f.grid.side());
    return t.to_samples(f);
}

// ---------------------------------------------------------------------------

void write_field_csv(std::ostream& os, const Field& f) {
    const int d = f.grid.dim();
    for (int i = 0; i < d; ++i) os << "xi_" << (i + 1) << ",";
    os << "re,im\n";
    os << std::setprecision(17);
    for (std::size_t idx = 0; idx < f.grid.size(); ++idx) {
        const Mode& p = f.grid.mode(idx);
        for (int i = 0; i < d; ++i) os << p[std::size_t(i)] << ",";
        os << f[idx].real() << "," << f[idx].imag() << "\n";
    }
}

Field read_field_csv(std::istream& is, const GridSpec& grid) {
    Field f(grid);
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("field csv: empty input");
    const int d = grid.dim();
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        Mode p{0, 0, 0};
        for (int i = 0; i < d; ++i)
            if (!(ls >> p[std::size_t(i)])) throw std::invalid_argument("field csv: malformed row: " + line);
        double re = 0.0, im = 0.0;
        if (!(ls >> re >> im)) throw std::invalid_argument("field csv: malformed row: " + line);
        const auto idx = grid.index_of(p);
        if (!idx) throw std::invalid_argument("field csv: mode outside the box: " + line);
        f[*idx] = {re, im};
    }
    return f;
}

}  // namespace dnls
