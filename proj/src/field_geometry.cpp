#include "magweyl/field_geometry.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace magweyl {

namespace {

Matrix metric_sqrt(const Matrix& g) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(g);
    return es.operatorSqrt();
}

/// g^{1/2} F g^{1/2}, the skew-symmetric matrix carrying the intensities.
Matrix conjugated_field(const Matrix& g, const Matrix& F) {
    const Matrix gsqrt = metric_sqrt(g);
    Matrix S = gsqrt * F * gsqrt;
    return 0.5 * (S - S.transpose());  // kill symmetric roundoff
}

FieldEigenstructure eigenstructure_of(const Matrix& g, const Matrix& F,
                                      Real eps0, Real eps_group) {
    const int d = static_cast<int>(F.rows());
    if ((F + F.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw NotSkew("field matrix is not skew-symmetric");

    const Matrix S = conjugated_field(g, F);
    Eigen::JacobiSVD<Matrix> svd(S, Eigen::ComputeFullV);
    const Vector sv = svd.singularValues();

    int nonzero = 0;
    for (int i = 0; i < d; ++i) {
        if (sv[i] >= eps0) {
            ++nonzero;
        } else if (sv[i] > eps0 / 10) {
            throw RankAmbiguous("singular value " + std::to_string(sv[i]) +
                                " falls in the dead zone (" + std::to_string(eps0 / 10) +
                                ", " + std::to_string(eps0) + ")");
        }
    }
    if (nonzero % 2 != 0)
        throw RankAmbiguous("odd count of nonzero singular values of a skew matrix");

    FieldEigenstructure eig;
    eig.r = nonzero / 2;
    eig.q = d - nonzero;
    eig.f = Vector(eig.r);
    for (int p = 0; p < eig.r; ++p) eig.f[p] = 0.5 * (sv[2 * p] + sv[2 * p + 1]);

    // Ker(gF) = g^{1/2} Ker(S); orthonormalize the mapped basis.
    if (eig.q > 0) {
        Matrix raw(d, eig.q);
        for (int c = 0; c < eig.q; ++c) raw.col(c) = svd.matrixV().col(nonzero + c);
        raw = metric_sqrt(g) * raw;
        Eigen::HouseholderQR<Matrix> qr(raw);
        eig.kernel_basis = qr.householderQ() * Matrix::Identity(d, eig.q);
    } else {
        eig.kernel_basis = Matrix::Zero(d, 0);
    }

    eig.partition = resonance_partition(eig.f, eps_group);
    eig.group_values = Vector(eig.partition.size());
    for (std::size_t gidx = 0; gidx < eig.partition.size(); ++gidx) {
        Real sum = 0;
        for (int j : eig.partition[gidx]) sum += eig.f[j];
        eig.group_values[gidx] = sum / eig.partition[gidx].size();
    }
    return eig;
}

}  // namespace

void FieldEigenstructure::validate(Real eps0, Real eps_group) const {
    if (2 * r + q != static_cast<int>(f.size()) * 2 + q)
        throw Error("inconsistent rank bookkeeping");
    if (q < 1) throw InvalidQ("kernel dimension must be >= 1");
    for (int p = 0; p < r; ++p)
        if (f[p] < eps0) throw Error("intensity below eps0");
    const Real scale = r > 0 ? f.maxCoeff() : 1.0;
    std::vector<char> seen(r, 0);
    for (const auto& group : partition) {
        for (int j : group) {
            if (seen[j]) throw Error("partition groups overlap");
            seen[j] = 1;
        }
        for (int j : group)
            for (int k : group)
                if (std::abs(f[j] - f[k]) > eps_group * scale * group.size())
                    throw Error("group spread exceeds tolerance");
    }
    for (int j = 0; j < r; ++j)
        if (!seen[j]) throw Error("partition does not cover all indices");
}

FieldEigenstructure compute_eigenstructure(const OperatorSpec& spec,
                                           Real eps0, Real eps_group) {
    spec.validate();
    Matrix F = spec.has_constant_field() ? spec.field
                                         : spec.field_at(Vector::Zero(spec.d));
    return eigenstructure_of(spec.metric, F, eps0, eps_group);
}

FieldEigenstructure compute_eigenstructure_at(const OperatorSpec& spec, const Vector& x,
                                              Real eps0, Real eps_group) {
    return eigenstructure_of(spec.metric, spec.field_at(x), eps0, eps_group);
}

bool partition_consistent_on(const OperatorSpec& spec, const std::vector<Vector>& points,
                             Real eps0, Real eps_group) {
    if (points.empty()) return true;
    FieldEigenstructure ref;
    bool have_ref = false;
    for (const auto& x : points) {
        FieldEigenstructure eig;
        try {
            eig = compute_eigenstructure_at(spec, x, eps0, eps_group);
        } catch (const RankAmbiguous&) {
            return false;
        }
        if (!have_ref) {
            ref = eig;
            have_ref = true;
            continue;
        }
        if (eig.r != ref.r || eig.partition != ref.partition) return false;
    }
    return true;
}

std::vector<std::vector<int>> resonance_partition(const Vector& f, Real eps_group) {
    std::vector<std::vector<int>> groups;
    if (f.size() == 0) return groups;
    const Real threshold = eps_group * f.maxCoeff();
    groups.push_back({0});
    for (int i = 1; i < f.size(); ++i) {
        if (f[i - 1] - f[i] <= threshold)
            groups.back().push_back(i);
        else
            groups.push_back({i});
    }
    return groups;
}

std::vector<Resonance> detect_resonances(const Vector& f, Real tol) {
    std::vector<Resonance> out;
    const int r = static_cast<int>(f.size());
    for (int j = 0; j < r; ++j)
        for (int k = j + 1; k < r; ++k)
            if (std::abs(f[j] - f[k]) <= tol) out.push_back({2, {j, k}});
    for (int j = 0; j < r; ++j)
        for (int k = 0; k < r; ++k)
            for (int m = k; m < r; ++m)
                if (std::abs(f[j] - f[k] - f[m]) <= tol) out.push_back({3, {j, k, m}});
    return out;
}

Matrix CanonicalForm::canonical_matrix() const {
    const int r = static_cast<int>(f.size());
    const int d = static_cast<int>(transform.rows());
    Matrix B = Matrix::Zero(d, d);
    for (int p = 0; p < r; ++p) {
        B(2 * p, 2 * p + 1) = f[p];
        B(2 * p + 1, 2 * p) = -f[p];
    }
    return B;
}

CanonicalForm canonical_reduce_constant(const OperatorSpec& spec,
                                        Real eps0, Real eps_group) {
    const FieldEigenstructure eig = compute_eigenstructure(spec, eps0, eps_group);
    const int d = spec.d;
    const Matrix S = conjugated_field(spec.metric, spec.field_at(Vector::Zero(d)));

    // i*S is Hermitian; its +f eigenvectors u give the rotation planes via
    // the orthonormal pair (sqrt(2) Im u, sqrt(2) Re u).
    ComplexMatrix H = Complex(0, 1) * S.cast<Complex>();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(H);
    if (es.info() != Eigen::Success) throw NoConvergence("field eigendecomposition failed");

    struct Pair {
        Real lambda;
        int col;
    };
    std::vector<Pair> positive;
    std::vector<int> zero_cols;
    for (int i = 0; i < d; ++i) {
        const Real lam = es.eigenvalues()[i];
        if (lam >= eps0)
            positive.push_back({lam, i});
        else if (std::abs(lam) < eps0 / 10)
            zero_cols.push_back(i);
    }
    if (static_cast<int>(positive.size()) != eig.r ||
        static_cast<int>(zero_cols.size()) != eig.q)
        throw Degenerate("kernel basis cannot be completed consistently with the rank");

    std::sort(positive.begin(), positive.end(), [&](const Pair& a, const Pair& b) {
        return a.lambda > b.lambda;
    });

    Matrix M(d, d);
    const Real sqrt2 = std::sqrt(2.0);
    for (int p = 0; p < eig.r; ++p) {
        const ComplexVector u = es.eigenvectors().col(positive[p].col);
        M.col(2 * p) = sqrt2 * u.imag();
        M.col(2 * p + 1) = sqrt2 * u.real();
    }
    if (eig.q > 0) {
        Matrix kern(d, eig.q);
        for (int c = 0; c < eig.q; ++c) {
            const ComplexVector u = es.eigenvectors().col(zero_cols[c]);
            kern.col(c) = u.real().norm() > u.imag().norm() ? Vector(u.real()) : Vector(u.imag());
        }
        // re-orthonormalize against the rotation planes
        for (int c = 0; c < eig.q; ++c) {
            Vector v = kern.col(c);
            for (int j = 0; j < 2 * eig.r + c; ++j) v -= M.col(j).dot(v) * M.col(j);
            const Real n = v.norm();
            if (n < 1e-8) throw Degenerate("kernel basis collapse during orthonormalization");
            M.col(2 * eig.r + c) = v / n;
        }
    }

    CanonicalForm cf;
    cf.transform = M;
    cf.f = eig.f;

    // sign fix: demand the (2p, 2p+1) entry be +f_p
    Matrix B = M.transpose() * S * M;
    for (int p = 0; p < eig.r; ++p) {
        if (B(2 * p, 2 * p + 1) < 0) {
            M.col(2 * p) *= -1.0;
        }
    }
    cf.transform = M;
    B = M.transpose() * S * M;
    cf.residual = (B - cf.canonical_matrix()).cwiseAbs().maxCoeff();

    // Landau-type linear gauge pulled back to original coordinates:
    // with T = g^{1/2} M and W_{2p+1}(y) = f_p y_{2p}, the potential
    // V(x) = T^{-T} W T^{-1} x reproduces F and vanishes along the kernel.
    Matrix W = Matrix::Zero(d, d);
    for (int p = 0; p < eig.r; ++p) W(2 * p + 1, 2 * p) = eig.f[p];
    const Matrix T = metric_sqrt(spec.metric) * M;
    const Matrix Tinv = T.inverse();
    cf.gauge_coeffs = Tinv.transpose() * W * Tinv;
    return cf;
}

}  // namespace magweyl
