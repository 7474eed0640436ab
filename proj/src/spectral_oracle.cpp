#include "magweyl/spectral_oracle.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>

namespace magweyl {

namespace {

constexpr Real kTwoPi = 2.0 * M_PI;

struct GaugeField {
    // V_a(x) per axis; internal Landau form V_a = sum_{j<a} F_{ja} x_j
    Matrix landau;  // landau(a, j) coefficient of x_j in V_a; empty if user-supplied
    const std::vector<Polynomial>* user = nullptr;

    Real line_integral(int axis, const Vector& from, Real step) const {
        if (user) {
            // two-point Gauss on the edge, exact through cubic components
            const Real g = 0.5 / std::sqrt(3.0);
            Vector a = from, b = from;
            a[axis] += step * (0.5 - g);
            b[axis] += step * (0.5 + g);
            return 0.5 * step * ((*user)[axis](a) + (*user)[axis](b));
        }
        Vector mid = from;
        mid[axis] += 0.5 * step;
        return step * landau.row(axis).dot(mid);
    }
};

long checked_dim(const std::vector<int>& shape) {
    long dim = 1;
    for (int n : shape) {
        if (n < 2) throw GridTooCoarse("need at least 2 sites per axis");
        dim *= n;
    }
    return dim;
}

}  // namespace

Vector LatticeOperator::site_position(long flat) const {
    const auto idx = unflatten(flat);
    Vector x(static_cast<int>(shape.size()));
    for (std::size_t a = 0; a < shape.size(); ++a) {
        const Real off = bc[a] == BoundaryCondition::dirichlet ? spacing[a] : 0.0;
        x[a] = origin[a] + off + idx[a] * spacing[a];
    }
    return x;
}

std::vector<int> LatticeOperator::unflatten(long flat) const {
    std::vector<int> idx(shape.size());
    for (int a = static_cast<int>(shape.size()) - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(flat % shape[a]);
        flat /= shape[a];
    }
    return idx;
}

long LatticeOperator::flatten(const std::vector<int>& idx) const {
    long flat = 0;
    for (std::size_t a = 0; a < shape.size(); ++a) flat = flat * shape[a] + idx[a];
    return flat;
}

LatticeOperator LatticeOperator::gauge_transformed(const std::vector<Real>& chi) const {
    LatticeOperator out = *this;
    std::vector<Eigen::Triplet<Complex>> trip;
    for (int k = 0; k < matrix.outerSize(); ++k)
        for (Eigen::SparseMatrix<Complex>::InnerIterator it(matrix, k); it; ++it) {
            const Complex factor =
                std::polar(1.0, chi[it.row()]) * std::polar(1.0, -chi[it.col()]);
            trip.emplace_back(it.row(), it.col(), it.value() * factor);
        }
    out.matrix.setZero();
    out.matrix.setFromTriplets(trip.begin(), trip.end());
    return out;
}

LatticeOperator assemble(const OperatorSpec& spec, const GridConfig& grid,
                         const std::vector<BoundaryCondition>& bc) {
    spec.validate();
    const int d = spec.d;
    if (static_cast<int>(grid.shape.size()) != d || grid.lengths.size() != d ||
        static_cast<int>(bc.size()) != d)
        throw ConfigError("grid configuration dimension mismatch");
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            if (a != b && std::abs(spec.metric(a, b)) > 1e-12)
                throw ConfigError("lattice oracle supports diagonal metrics only");

    LatticeOperator op;
    op.shape = grid.shape;
    op.bc = bc;
    op.origin = grid.origin.size() == d ? grid.origin : Vector(Vector::Zero(d));
    op.mu = spec.mu;
    op.h = spec.h;
    op.dim = checked_dim(grid.shape);
    op.dense_cap = grid.dense_cap;
    op.spacing = Vector(d);
    for (int a = 0; a < d; ++a) {
        const int n = grid.shape[a];
        op.spacing[a] = bc[a] == BoundaryCondition::dirichlet ? grid.lengths[a] / (n + 1)
                                                              : grid.lengths[a] / n;
    }

    const Matrix F = spec.mu > 0 ? spec.field_at(Vector::Zero(d)) : Matrix::Zero(d, d);
    const bool has_field = F.cwiseAbs().maxCoeff() > 0;

    if (spec.mu > 0 && has_field) {
        const Real magnetic_length = std::sqrt(spec.h / spec.mu);
        for (int a = 0; a < d; ++a) {
            const bool in_field_plane = F.row(a).cwiseAbs().maxCoeff() > 1e-14;
            if (in_field_plane &&
                magnetic_length / op.spacing[a] < grid.min_points_per_magnetic_length)
                throw GridTooCoarse("fewer than " +
                                    std::to_string(grid.min_points_per_magnetic_length) +
                                    " sites per magnetic length on axis " + std::to_string(a));
        }
        for (int j = 0; j < d; ++j)
            for (int k = j + 1; k < d; ++k) {
                if (std::abs(F(j, k)) < 1e-14) continue;
                if (bc[j] != BoundaryCondition::periodic || bc[k] != BoundaryCondition::periodic)
                    continue;
                const Real flux =
                    spec.mu * F(j, k) * grid.lengths[j] * grid.lengths[k] / (kTwoPi * spec.h);
                if (std::abs(flux - std::round(flux)) > 1e-9 * std::max(1.0, std::abs(flux)))
                    throw FluxNotQuantized("flux through the (" + std::to_string(j) + "," +
                                           std::to_string(k) + ") torus face is " +
                                           std::to_string(flux));
            }
    }

    GaugeField gauge;
    const bool all_dirichlet = std::all_of(bc.begin(), bc.end(), [](BoundaryCondition b) {
        return b == BoundaryCondition::dirichlet;
    });
    if (spec.has_vector_potential() && all_dirichlet) {
        gauge.user = &spec.vector_potential;
    } else {
        gauge.landau = Matrix::Zero(d, d);
        for (int a = 0; a < d; ++a)
            for (int j = 0; j < a; ++j) gauge.landau(a, j) = F(j, a);
    }

    std::vector<Eigen::Triplet<Complex>> trip;
    trip.reserve(static_cast<std::size_t>(op.dim) * (2 * d + 1));
    for (long i = 0; i < op.dim; ++i) {
        const auto idx = op.unflatten(i);
        const Vector x = op.site_position(i);
        Real diag = spec.potential_at(x);
        for (int a = 0; a < d; ++a) {
            const Real t = spec.metric(a, a) * spec.h * spec.h / (op.spacing[a] * op.spacing[a]);
            diag += 2.0 * t;
            const bool wrap = idx[a] == op.shape[a] - 1;
            if (wrap && bc[a] == BoundaryCondition::dirichlet) continue;

            auto jdx = idx;
            jdx[a] = wrap ? 0 : idx[a] + 1;
            const long j = op.flatten(jdx);

            Real theta = 0.0;
            if (spec.mu > 0 && (has_field || spec.has_vector_potential())) {
                theta = (spec.mu / spec.h) * gauge.line_integral(a, x, op.spacing[a]);
                if (wrap) {
                    // boundary twist keeps the flux per plaquette uniform across the seam
                    Real twist = 0;
                    for (int k = a + 1; k < d; ++k)
                        twist -= (spec.mu / spec.h) * grid.lengths[a] * F(a, k) * x[k];
                    theta += twist;
                }
            }
            const Complex hop = -t * std::polar(1.0, theta);
            trip.emplace_back(j, i, hop);
            trip.emplace_back(i, j, std::conj(hop));
        }
        trip.emplace_back(i, i, Complex(diag, 0.0));
    }
    op.matrix.resize(op.dim, op.dim);
    op.matrix.setFromTriplets(trip.begin(), trip.end());
    return op;
}

LatticeOperator assemble(const OperatorSpec& spec, const GridConfig& grid,
                         BoundaryCondition bc) {
    return assemble(spec, grid, std::vector<BoundaryCondition>(spec.d, bc));
}

Complex plaquette_phase(const LatticeOperator& op, int axis_a, int axis_b,
                        const std::vector<int>& base_idx) {
    auto hop_phase = [&](const std::vector<int>& from, int axis) {
        auto to = from;
        to[axis] = (from[axis] + 1) % op.shape[axis];
        const Complex v = op.matrix.coeff(op.flatten(to), op.flatten(from));
        if (v == Complex(0, 0)) throw Error("missing link on the plaquette path");
        return v / std::abs(v);
    };
    auto idx = base_idx;
    Complex p = hop_phase(idx, axis_a);
    idx[axis_a] = (idx[axis_a] + 1) % op.shape[axis_a];
    p *= hop_phase(idx, axis_b);
    idx[axis_b] = (idx[axis_b] + 1) % op.shape[axis_b];
    idx[axis_a] = (idx[axis_a] - 1 + op.shape[axis_a]) % op.shape[axis_a];
    p *= std::conj(hop_phase(idx, axis_a));
    idx[axis_b] = (idx[axis_b] - 1 + op.shape[axis_b]) % op.shape[axis_b];
    p *= std::conj(hop_phase(idx, axis_b));
    return p;
}

Real OracleSpectrum::counting(Real tau) const {
    if (source == Source::separable) {
        Real acc = 0;
        for (const auto& lv : levels)
            if (lv.energy < tau) acc += static_cast<Real>(lv.degeneracy);
        return acc;
    }
    Real acc = 0;
    for (Real e : eigenvalues)
        if (e < tau) acc += 1.0;
    return acc;
}

namespace {

struct GershgorinBounds {
    Real lo, hi;
};

GershgorinBounds gershgorin(const Eigen::SparseMatrix<Complex>& H) {
    GershgorinBounds b{std::numeric_limits<Real>::infinity(),
                       -std::numeric_limits<Real>::infinity()};
    for (int k = 0; k < H.outerSize(); ++k) {
        Real center = 0, radius = 0;
        for (Eigen::SparseMatrix<Complex>::InnerIterator it(H, k); it; ++it) {
            if (it.row() == it.col())
                center = it.value().real();
            else
                radius += std::abs(it.value());
        }
        b.lo = std::min(b.lo, center - radius);
        b.hi = std::max(b.hi, center + radius);
    }
    return b;
}

OracleSpectrum dense_eigensolve(const LatticeOperator& op) {
    OracleSpectrum out;
    out.source = OracleSpectrum::Source::lattice;
    const ComplexMatrix H(op.matrix);
    const bool real_case = H.imag().cwiseAbs().maxCoeff() < 1e-14;
    if (real_case) {
        Eigen::SelfAdjointEigenSolver<Matrix> es{Matrix(H.real())};
        if (es.info() != Eigen::Success) throw NoConvergence("dense eigensolver failed");
        out.eigenvalues.assign(es.eigenvalues().data(),
                               es.eigenvalues().data() + es.eigenvalues().size());
        out.eigenvectors = es.eigenvectors().cast<Complex>();
    } else {
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(H);
        if (es.info() != Eigen::Success) throw NoConvergence("dense eigensolver failed");
        out.eigenvalues.assign(es.eigenvalues().data(),
                               es.eigenvalues().data() + es.eigenvalues().size());
        out.eigenvectors = es.eigenvectors();
    }
    out.certified_max = out.eigenvalues.empty() ? 0 : out.eigenvalues.back() + 1.0;
    return out;
}

/// shift-invert subspace iteration with Rayleigh-Ritz extraction;
/// only the lowest `need` Ritz pairs are driven to the residual tolerance
OracleSpectrum subspace_lowest(const LatticeOperator& op, int block, int need,
                               Real res_tol = 1e-10, int max_iters = 600) {
    const long n = op.dim;
    block = std::min<long>(block, n);
    need = std::min(need, block);
    const auto bounds = gershgorin(op.matrix);
    const Real sigma = bounds.lo - 1e-3 * (bounds.hi - bounds.lo) - 1e-9;

    Eigen::SparseMatrix<Complex> shifted = op.matrix;
    for (long i = 0; i < n; ++i) shifted.coeffRef(i, i) -= Complex(sigma, 0.0);
    Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu;
    lu.compute(shifted);
    if (lu.info() != Eigen::Success) throw NoConvergence("shift factorization failed");

    std::mt19937 rng(0x6d616777u);
    std::normal_distribution<Real> gauss;
    ComplexMatrix X(n, block);
    for (long i = 0; i < n; ++i)
        for (int c = 0; c < block; ++c) X(i, c) = Complex(gauss(rng), gauss(rng));

    Vector theta = Vector::Zero(block);
    Vector residuals = Vector::Constant(block, 1e30);
    for (int iter = 0; iter < max_iters; ++iter) {
        X = lu.solve(X);
        Eigen::HouseholderQR<ComplexMatrix> qr(X);
        X = qr.householderQ() * ComplexMatrix::Identity(n, block);
        if (iter % 4 == 3 || iter == max_iters - 1) {
            const ComplexMatrix HX = op.matrix * X;
            ComplexMatrix B = X.adjoint() * HX;
            B = 0.5 * (B + B.adjoint()).eval();
            Eigen::SelfAdjointEigenSolver<ComplexMatrix> small(B);
            X = (X * small.eigenvectors()).eval();
            theta = small.eigenvalues();
            const ComplexMatrix R = op.matrix * X - X * theta.asDiagonal();
            for (int c = 0; c < block; ++c) residuals[c] = R.col(c).norm();
            bool done = true;
            for (int c = 0; c < need; ++c)
                if (residuals[c] > res_tol) done = false;
            if (done) break;
        }
    }

    OracleSpectrum out;
    out.source = OracleSpectrum::Source::lattice;
    out.eigenvalues.assign(theta.data(), theta.data() + block);
    out.eigenvectors = X;
    out.certified_max = -std::numeric_limits<Real>::infinity();
    for (int c = 0; c < block; ++c) {
        if (residuals[c] > 1e-8) break;
        out.certified_max = theta[c];
    }
    if (out.certified_max == -std::numeric_limits<Real>::infinity())
        throw NoConvergence("no eigenpair reached the certification residual");
    return out;
}

}  // namespace

namespace {

void attach_positions(const LatticeOperator& op, OracleSpectrum& sp) {
    sp.positions = Matrix(op.dim, static_cast<int>(op.shape.size()));
    for (long i = 0; i < op.dim; ++i) sp.positions.row(i) = op.site_position(i).transpose();
}

}  // namespace

OracleSpectrum eigensolve(const LatticeOperator& op, int k_lowest) {
    OracleSpectrum out;
    if (op.dim <= op.dense_cap) {
        out = dense_eigensolve(op);
        if (static_cast<int>(out.eigenvalues.size()) > k_lowest) {
            out.eigenvalues.resize(k_lowest);
            out.eigenvectors = out.eigenvectors.leftCols(k_lowest).eval();
        }
    } else {
        out = subspace_lowest(op, k_lowest + 8, k_lowest);
        out.eigenvalues.resize(std::min<std::size_t>(out.eigenvalues.size(), k_lowest));
        out.eigenvectors = out.eigenvectors.leftCols(out.eigenvalues.size()).eval();
    }
    attach_positions(op, out);
    return out;
}

OracleSpectrum eigensolve_below(const LatticeOperator& op, Real tau) {
    if (op.dim <= op.dense_cap) {
        OracleSpectrum full = dense_eigensolve(op);
        std::size_t keep = 0;
        while (keep < full.eigenvalues.size() && full.eigenvalues[keep] < tau) ++keep;
        full.eigenvalues.resize(keep);
        full.eigenvectors = full.eigenvectors.leftCols(keep).eval();
        attach_positions(op, full);
        return full;
    }
    int block = 32;
    while (true) {
        const int need = block - 8;
        OracleSpectrum sp = subspace_lowest(op, block, need);
        if (sp.eigenvalues[need - 1] < tau) {
            if (block >= op.dim) throw NoConvergence("block grew to the full dimension");
            block = std::min<long>(2 * block, op.dim);
            continue;
        }
        std::size_t keep = 0;
        while (keep < sp.eigenvalues.size() && sp.eigenvalues[keep] < tau) ++keep;
        if (sp.certified_max < tau)
            throw NoConvergence("requested range extends past the certified spectrum");
        sp.eigenvalues.resize(keep);
        sp.eigenvectors = sp.eigenvectors.leftCols(keep).eval();
        attach_positions(op, sp);
        return sp;
    }
}

Real weighted_counting(const OperatorSpec& spec, const OracleSpectrum& spectrum,
                       const std::function<Real(const Vector&)>& psi, Real tau) {
    if (spectrum.source == OracleSpectrum::Source::lattice) {
        if (tau > spectrum.certified_max)
            throw UncertifiedTau("tau lies above the certified spectral range");
        if (!psi && spec.cutoff.is_trivial()) return spectrum.counting(tau);
        auto weight = [&](const Vector& x) { return psi ? psi(x) : spec.cutoff(x); };
        Real acc = 0;
        for (std::size_t k = 0; k < spectrum.eigenvalues.size(); ++k) {
            if (spectrum.eigenvalues[k] >= tau) break;
            for (long i = 0; i < spectrum.positions.rows(); ++i)
                acc += std::norm(spectrum.eigenvectors(i, k)) *
                       weight(spectrum.positions.row(i).transpose());
        }
        return acc;
    }
    // separable source
    if (spectrum.plane_area <= 0) throw NotSeparable("separable payload missing");
    if (!psi && spec.cutoff.is_trivial()) return spectrum.counting(tau);

    // in-plane marginal of the cutoff: psi = (1 - |x-c|^2/R^2)_+^m integrates to
    // pi R^2 s^{m+1}/(m+1) over the plane, with s = (1 - (z-c_z)^2/R^2)_+
    if (psi) throw NotSeparable("separable weighting uses the operator cutoff");
    const Bump& cut = spec.cutoff;
    const Real R = cut.radius;
    const Real cz = cut.center[spec.d - 1];
    const int m = cut.order;

    const Real per_area = static_cast<Real>(spectrum.flux_total) / spectrum.plane_area;
    Real acc = 0;
    for (const auto& lv : spectrum.levels) {
        if (lv.energy >= tau) continue;
        Real mode_weight = 0;
        for (int i = 0; i < spectrum.nodes_1d.size(); ++i) {
            const Real z = spectrum.nodes_1d[i];
            const Real s = 1.0 - (z - cz) * (z - cz) / (R * R);
            if (s <= 0) continue;
            const Real marginal = M_PI * R * R * std::pow(s, m + 1) / (m + 1);
            mode_weight += std::norm(spectrum.modes_1d(i, lv.mode)) * marginal;
        }
        acc += per_area * mode_weight;
    }
    return acc;
}

namespace {

long sturm_count(const Vector& diag, const Vector& off, Real x) {
    long count = 0;
    Real q = diag[0] - x;
    if (q < 0) ++count;
    for (int i = 1; i < diag.size(); ++i) {
        Real denom = q;
        if (std::abs(denom) < 1e-300) denom = denom < 0 ? -1e-300 : 1e-300;
        q = diag[i] - x - off[i - 1] * off[i - 1] / denom;
        if (q < 0) ++count;
    }
    return count;
}

Vector thomas_solve_shifted(const Vector& diag, const Vector& off, Real lambda,
                            Vector rhs) {
    const int n = static_cast<int>(diag.size());
    Vector c(n), d(n);
    Real piv = diag[0] - lambda;
    if (std::abs(piv) < 1e-14) piv = 1e-14;
    c[0] = (n > 1 ? off[0] : 0.0) / piv;
    d[0] = rhs[0] / piv;
    for (int i = 1; i < n; ++i) {
        piv = diag[i] - lambda - off[i - 1] * c[i - 1];
        if (std::abs(piv) < 1e-14) piv = 1e-14;
        c[i] = (i + 1 < n ? off[i] : 0.0) / piv;
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / piv;
    }
    Vector xsol(n);
    xsol[n - 1] = d[n - 1];
    for (int i = n - 2; i >= 0; --i) xsol[i] = d[i] - c[i] * xsol[i + 1];
    return xsol;
}

}  // namespace

Tridiagonal1D tridiagonal_below(const Vector& diag, const Vector& offdiag, Real cutoff,
                                bool want_vectors) {
    const int n = static_cast<int>(diag.size());
    Real lo = diag[0], hi = diag[0];
    for (int i = 0; i < n; ++i) {
        const Real r = (i > 0 ? std::abs(offdiag[i - 1]) : 0.0) +
                       (i + 1 < n ? std::abs(offdiag[i]) : 0.0);
        lo = std::min(lo, diag[i] - r);
        hi = std::max(hi, diag[i] + r);
    }
    const long m = sturm_count(diag, offdiag, cutoff);

    Tridiagonal1D out;
    out.eigenvalues = Vector(m);
    for (long k = 0; k < m; ++k) {
        Real a = lo, b = cutoff;
        for (int it = 0; it < 80; ++it) {
            const Real mid = 0.5 * (a + b);
            if (sturm_count(diag, offdiag, mid) >= k + 1)
                b = mid;
            else
                a = mid;
        }
        out.eigenvalues[k] = 0.5 * (a + b);
    }

    if (want_vectors) {
        out.eigenvectors = Matrix(n, m);
        std::mt19937 rng(97);
        std::normal_distribution<Real> gauss;
        for (long k = 0; k < m; ++k) {
            Vector v(n);
            for (int i = 0; i < n; ++i) v[i] = gauss(rng);
            v.normalize();
            for (int it = 0; it < 3; ++it) {
                v = thomas_solve_shifted(diag, offdiag, out.eigenvalues[k], v);
                // re-orthogonalize inside near-degenerate clusters
                for (long j = k - 1; j >= 0; --j) {
                    if (out.eigenvalues[k] - out.eigenvalues[j] >
                        1e-8 * std::max(1.0, std::abs(out.eigenvalues[k])))
                        break;
                    v -= out.eigenvectors.col(j).dot(v) * out.eigenvectors.col(j);
                }
                v.normalize();
            }
            out.eigenvectors.col(k) = v;
        }
    }
    return out;
}

OracleSpectrum separable_oracle(const OperatorSpec& spec, const SeparableConfig& cfg) {
    spec.validate();
    const int d = spec.d;
    if ((spec.metric - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-12)
        throw NotSeparable("separable oracle requires the identity metric");

    const Matrix F = spec.field_at(Vector::Zero(d));
    const int r = (d - 1) / 2;
    if (d != 2 * r + 1) throw NotSeparable("separable oracle expects q = 1");
    Vector f(r);
    for (int p = 0; p < r; ++p) {
        f[p] = F(2 * p, 2 * p + 1);
        if (f[p] <= 0) throw NotSeparable("field is not in block-canonical order");
    }
    Matrix canon = Matrix::Zero(d, d);
    for (int p = 0; p < r; ++p) {
        canon(2 * p, 2 * p + 1) = f[p];
        canon(2 * p + 1, 2 * p) = -f[p];
    }
    if ((F - canon).cwiseAbs().maxCoeff() > 1e-12)
        throw NotSeparable("field is not block-canonical");
    for (int a = 0; a + 1 < d; ++a)
        if (!spec.potential.partial(a).is_zero())
            throw NotSeparable("potential must depend on the kernel coordinate only");
    if (cfg.plane_lengths.size() != r) throw NotSeparable("one plane length per rotation plane");

    OracleSpectrum out;
    out.source = OracleSpectrum::Source::separable;
    out.flux_total = 1;
    out.plane_area = 1;
    for (int p = 0; p < r; ++p) {
        const Real L = cfg.plane_lengths[p];
        const Real flux = spec.mu * f[p] * L * L / (kTwoPi * spec.h);
        if (std::abs(flux - std::round(flux)) > 1e-9 * std::max(1.0, std::abs(flux)))
            throw FluxNotQuantized("plane " + std::to_string(p) + " carries flux " +
                                   std::to_string(flux));
        out.flux_total *= static_cast<long>(std::llround(flux));
        out.plane_area *= L * L;
    }

    // 1D factor h^2 D^2 + V(z), Dirichlet walls
    const int n = cfg.points_1d;
    const Real dz = (cfg.interval_hi - cfg.interval_lo) / (n + 1);
    Vector diag(n), off(n - 1), nodes(n);
    Vector xprobe = Vector::Zero(d);
    const Real t = spec.h * spec.h / (dz * dz);
    for (int i = 0; i < n; ++i) {
        nodes[i] = cfg.interval_lo + (i + 1) * dz;
        xprobe[d - 1] = nodes[i];
        diag[i] = 2.0 * t + spec.potential_at(xprobe);
    }
    off.setConstant(-t);

    const Real muh = spec.mu * spec.h;
    const Real ground = f.sum() * muh;
    const Real nu_cutoff = cfg.tau_max - ground;
    auto modes = tridiagonal_below(diag, off, nu_cutoff, true);
    out.modes_1d = modes.eigenvectors;
    out.nodes_1d = nodes;

    // Landau levels below tau_max paired with the 1D modes
    std::vector<Real> landau;
    std::vector<int> alpha(r, 0);
    const Real nu_min = modes.eigenvalues.size() ? modes.eigenvalues.minCoeff() : 0.0;
    while (true) {
        Real lv = 0;
        for (int p = 0; p < r; ++p) lv += (2.0 * alpha[p] + 1.0) * f[p];
        lv *= muh;
        if (lv + nu_min < cfg.tau_max) landau.push_back(lv);
        int a = r - 1;
        while (a >= 0) {
            ++alpha[a];
            Real base = 0;
            for (int p = 0; p < r; ++p) base += (2.0 * alpha[p] + 1.0) * f[p];
            if (base * muh + nu_min < cfg.tau_max) break;
            alpha[a] = 0;
            --a;
        }
        if (a < 0) break;
    }

    for (const Real lv : landau)
        for (int mde = 0; mde < modes.eigenvalues.size(); ++mde) {
            const Real e = lv + modes.eigenvalues[mde];
            if (e < cfg.tau_max) out.levels.push_back({e, out.flux_total, mde});
        }
    std::sort(out.levels.begin(), out.levels.end(),
              [](const SeparableLevel& a, const SeparableLevel& b) { return a.energy < b.energy; });
    out.certified_max = cfg.tau_max;
    for (const auto& lv : out.levels) out.eigenvalues.push_back(lv.energy);
    return out;
}

void save_spectrum(const std::string& path, const std::vector<Real>& eigenvalues) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open spectrum cache for writing: " + path);
    const std::uint64_t count = eigenvalues.size();
    out.write(reinterpret_cast<const char*>(&count), sizeof(count));
    out.write(reinterpret_cast<const char*>(eigenvalues.data()),
              static_cast<std::streamsize>(count * sizeof(Real)));
}

std::optional<std::vector<Real>> load_spectrum(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::uint64_t count = 0;
    in.read(reinterpret_cast<char*>(&count), sizeof(count));
    if (!in) return std::nullopt;
    std::vector<Real> values(count);
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(count * sizeof(Real)));
    if (!in) return std::nullopt;
    return values;
}

}  // namespace magweyl
