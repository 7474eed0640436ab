#include "magweyl/types.hpp"

#include <algorithm>
#include <cmath>

namespace magweyl {

Polynomial::Polynomial(Real constant) {
    if (constant != 0.0) terms_.push_back({constant, {}});
}

Polynomial::Polynomial(std::vector<Monomial> terms) : terms_(std::move(terms)) {}

Polynomial Polynomial::coordinate(int axis, Real scale) {
    Monomial m;
    m.coeff = scale;
    m.powers.assign(axis + 1, 0);
    m.powers[axis] = 1;
    return Polynomial({m});
}

Real Polynomial::operator()(const Vector& x) const {
    Real sum = 0;
    for (const auto& t : terms_) {
        Real v = t.coeff;
        for (std::size_t j = 0; j < t.powers.size(); ++j) {
            if (t.powers[j] == 0) continue;
            const Real xj = j < static_cast<std::size_t>(x.size()) ? x[j] : 0.0;
            v *= std::pow(xj, t.powers[j]);
        }
        sum += v;
    }
    return sum;
}

Polynomial Polynomial::partial(int axis) const {
    std::vector<Monomial> out;
    for (const auto& t : terms_) {
        if (static_cast<std::size_t>(axis) >= t.powers.size() || t.powers[axis] == 0) continue;
        Monomial m = t;
        m.coeff *= m.powers[axis];
        m.powers[axis] -= 1;
        out.push_back(std::move(m));
    }
    return Polynomial(std::move(out));
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
    std::vector<Monomial> out = terms_;
    out.insert(out.end(), other.terms_.begin(), other.terms_.end());
    return Polynomial(std::move(out));
}

Polynomial Polynomial::scaled(Real factor) const {
    std::vector<Monomial> out = terms_;
    for (auto& t : out) t.coeff *= factor;
    return Polynomial(std::move(out));
}

bool Polynomial::is_zero() const {
    return std::all_of(terms_.begin(), terms_.end(),
                       [](const Monomial& t) { return t.coeff == 0.0; });
}

Real Bump::operator()(const Vector& x) const {
    if (is_trivial()) return 0.0;
    const Real t = 1.0 - (x - center).squaredNorm() / (radius * radius);
    if (t <= 0) return 0.0;
    return std::pow(t, order);
}

Matrix OperatorSpec::field_at(const Vector& x) const {
    if (has_vector_potential()) {
        Matrix F = Matrix::Zero(d, d);
        for (int k = 0; k < d; ++k) {
            for (int j = 0; j < d; ++j) {
                if (j == k) continue;
                F(j, k) += vector_potential[k].partial(j)(x);
                F(j, k) -= vector_potential[j].partial(k)(x);
            }
        }
        return 0.5 * (F - F.transpose());
    }
    return field;
}

Real OperatorSpec::sqrt_g() const {
    return 1.0 / std::sqrt(metric.determinant());
}

void OperatorSpec::validate() const {
    if (metric.rows() != d || metric.cols() != d)
        throw ConfigError("metric dimension mismatch");
    if ((metric - metric.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw ConfigError("metric not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> es(metric, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 0)
        throw ConfigError("metric not positive definite");
    if (h <= 0 || h > 1) throw ConfigError("h must lie in (0, 1]");

    const bool field_free =
        (!has_constant_field() || field.cwiseAbs().maxCoeff() == 0.0) && !has_vector_potential();
    if (mu == 0.0) {
        if (!field_free) throw ConfigError("mu = 0 requires a vanishing field");
    } else {
        if (mu < 1.0) throw ConfigError("mu must satisfy mu >= 1 (or mu = 0, field-free)");
        if (d < 2) throw ConfigError("magnetic problems require d >= 2");
    }
    if (has_constant_field()) {
        if (field.rows() != d || field.cols() != d)
            throw ConfigError("field dimension mismatch");
        if ((field + field.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            throw NotSkew("field matrix is not skew-symmetric");
    }
    if (has_vector_potential() && vector_potential.size() != static_cast<std::size_t>(d))
        throw ConfigError("vector potential needs one component per coordinate");
}

GridFunction::GridFunction(Vector lo, Vector hi, std::vector<int> shape)
    : lo_(std::move(lo)), hi_(std::move(hi)), shape_(std::move(shape)) {
    const int n = dims();
    if (lo_.size() != n || hi_.size() != n) throw Error("grid box dimension mismatch");
    spacing_.resize(n);
    stride_.resize(n);
    std::size_t total = 1;
    for (int a = n - 1; a >= 0; --a) {
        if (shape_[a] < 2) throw Error("grid needs at least 2 points per axis");
        spacing_[a] = (hi_[a] - lo_[a]) / (shape_[a] - 1);
        stride_[a] = total;
        total *= static_cast<std::size_t>(shape_[a]);
    }
    values_.assign(total, 0.0);
}

GridFunction GridFunction::sample(const Vector& lo, const Vector& hi,
                                  const std::vector<int>& shape,
                                  const std::function<Real(const Vector&)>& f) {
    GridFunction g(lo, hi, shape);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = f(g.point(i));
    return g;
}

Real GridFunction::min_spacing() const {
    return *std::min_element(spacing_.begin(), spacing_.end());
}

Vector GridFunction::point(std::size_t flat) const {
    const auto idx = unflatten(flat);
    Vector x(dims());
    for (int a = 0; a < dims(); ++a) x[a] = lo_[a] + spacing_[a] * idx[a];
    return x;
}

std::vector<int> GridFunction::unflatten(std::size_t flat) const {
    std::vector<int> idx(dims());
    for (int a = 0; a < dims(); ++a) {
        idx[a] = static_cast<int>(flat / stride_[a]);
        flat %= stride_[a];
    }
    return idx;
}

std::size_t GridFunction::flatten(const std::vector<int>& idx) const {
    std::size_t flat = 0;
    for (int a = 0; a < dims(); ++a) flat += stride_[a] * static_cast<std::size_t>(idx[a]);
    return flat;
}

Vector GridFunction::gradient(std::size_t flat) const {
    const auto idx = unflatten(flat);
    Vector g(dims());
    for (int a = 0; a < dims(); ++a) {
        auto at = [&](int shift) {
            auto j = idx;
            j[a] += shift;
            return values_[flatten(j)];
        };
        if (idx[a] == 0)
            g[a] = (at(1) - at(0)) / spacing_[a];
        else if (idx[a] == shape_[a] - 1)
            g[a] = (at(0) - at(-1)) / spacing_[a];
        else
            g[a] = (at(1) - at(-1)) / (2 * spacing_[a]);
    }
    return g;
}

PowerLawFit fit_power_law(const std::vector<Real>& x, const std::vector<Real>& y) {
    if (x.size() != y.size() || x.size() < 4)
        throw InsufficientData("power-law fit needs at least 4 points");
    const int n = static_cast<int>(x.size());
    Real sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (int i = 0; i < n; ++i) {
        if (x[i] <= 0 || y[i] <= 0) throw InsufficientData("power-law fit needs positive data");
        const Real lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        syy += ly * ly;
    }
    const Real den = n * sxx - sx * sx;
    PowerLawFit fit;
    fit.points = n;
    fit.exponent = (n * sxy - sx * sy) / den;
    fit.intercept = (sy - fit.exponent * sx) / n;
    const Real ss_tot = syy - sy * sy / n;
    Real ss_res = 0;
    for (int i = 0; i < n; ++i) {
        const Real pred = fit.intercept + fit.exponent * std::log(x[i]);
        const Real res = std::log(y[i]) - pred;
        ss_res += res * res;
    }
    fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

}  // namespace magweyl
