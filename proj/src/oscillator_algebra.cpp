#include "magweyl/oscillator_algebra.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>

namespace magweyl {

namespace {

Real pow_long(Real base, int exp) {
    Real out = 1;
    for (int i = 0; i < exp; ++i) out *= base;
    return out;
}

/// shoulder cutoff: 1 on [0, s], decays smoothly to 0 at 2s
Real shoulder(Real t, Real s) {
    const Real a = std::abs(t);
    if (a <= s) return 1.0;
    if (a >= 2 * s) return 0.0;
    const Real u = (a - s) / s;
    return std::pow(1.0 - u * u, 4);
}

}  // namespace

long LadderAlgebra::flat_index(const std::vector<int>& alpha) const {
    long flat = 0;
    for (int j = 0; j < r; ++j) flat = flat * n_max + alpha[j];
    return flat;
}

std::vector<int> LadderAlgebra::multi_index(long flat) const {
    std::vector<int> alpha(r);
    for (int j = r - 1; j >= 0; --j) {
        alpha[j] = static_cast<int>(flat % n_max);
        flat /= n_max;
    }
    return alpha;
}

bool LadderAlgebra::interior(long flat, int margin) const {
    const auto alpha = multi_index(flat);
    for (int j = 0; j < r; ++j)
        if (alpha[j] > n_max - 1 - margin) return false;
    return true;
}

SparseComplex LadderAlgebra::position(int j) const {
    const Real s = std::sqrt(hbar / 2.0);
    SparseComplex out = (s * (lowering[j] + raising[j])).cast<Complex>();
    return out;
}

SparseComplex LadderAlgebra::momentum(int j) const {
    const Real s = std::sqrt(hbar / 2.0);
    SparseComplex out = (s * (raising[j] - lowering[j])).cast<Complex>() * Complex(0, 1);
    return out;
}

LadderAlgebra build_algebra(int r, int n_max, Real hbar, long dim_cap) {
    if (n_max < 2) throw Error("ladder truncation needs n_max >= 2");
    Real dimf = 1;
    for (int j = 0; j < r; ++j) dimf *= n_max;
    if (dimf > static_cast<Real>(dim_cap))
        throw DimensionOverflow("basis dimension " + std::to_string(dimf) +
                                " exceeds the cap " + std::to_string(dim_cap));

    LadderAlgebra alg;
    alg.r = r;
    alg.n_max = n_max;
    alg.hbar = hbar;
    alg.dim = static_cast<long>(dimf);

    using Triplet = Eigen::Triplet<Real>;
    for (int j = 0; j < r; ++j) {
        std::vector<Triplet> lower, num;
        const long stride = static_cast<long>(pow_long(n_max, r - 1 - j));
        for (long col = 0; col < alg.dim; ++col) {
            const int aj = static_cast<int>((col / stride) % n_max);
            if (aj > 0) lower.emplace_back(col - stride, col, std::sqrt(Real(aj)));
            if (aj > 0) num.emplace_back(col, col, Real(aj));
        }
        SparseReal a(alg.dim, alg.dim), N(alg.dim, alg.dim);
        a.setFromTriplets(lower.begin(), lower.end());
        N.setFromTriplets(num.begin(), num.end());
        alg.lowering.push_back(a);
        alg.raising.push_back(SparseReal(a.transpose()));
        alg.number.push_back(N);
    }
    return alg;
}

bool CubicCoefficients::empty() const {
    return std::all_of(c_.begin(), c_.end(), [](Real v) { return v == 0.0; });
}

PerturbedOscillator build_perturbed(const Vector& f, Real hbar, const CubicCoefficients& b,
                                    Real mu, int n_max, bool stabilizer, Real stabilizer_c0) {
    const int r = static_cast<int>(f.size());
    if (b.two_r() != 2 * r) throw Error("cubic coefficient tensor has wrong mode count");
    PerturbedOscillator out;
    out.algebra = build_algebra(r, n_max, hbar);
    out.mu = mu;
    out.stabilized = stabilizer;
    const LadderAlgebra& alg = out.algebra;

    // single-rounding diagonal: equal levels stay bit-identical
    using TripletC = Eigen::Triplet<Complex>;
    std::vector<TripletC> diag;
    for (long i = 0; i < alg.dim; ++i) {
        const auto alpha = alg.multi_index(i);
        Real level = 0;
        for (int j = 0; j < r; ++j) level += (2.0 * alpha[j] + 1.0) * f[j];
        diag.emplace_back(i, i, Complex(level * hbar, 0.0));
    }
    SparseComplex A0(alg.dim, alg.dim);
    A0.setFromTriplets(diag.begin(), diag.end());

    SparseComplex H = A0;
    if (!b.empty()) {
        std::vector<SparseComplex> L(2 * r);
        for (int j = 0; j < r; ++j) {
            L[2 * j] = alg.momentum(j);
            L[2 * j + 1] = alg.position(j);
        }
        SparseComplex cubic(alg.dim, alg.dim);
        static constexpr std::array<std::array<int, 3>, 6> perms = {
            {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
        for (int j = 0; j < 2 * r; ++j)
            for (int k = 0; k < 2 * r; ++k)
                for (int m = 0; m < 2 * r; ++m) {
                    const Real c = b.at(j, k, m);
                    if (c == 0.0) continue;
                    const std::array<int, 3> idx = {j, k, m};
                    for (const auto& p : perms) {
                        SparseComplex prod = L[idx[p[0]]] * L[idx[p[1]]];
                        prod = prod * L[idx[p[2]]];
                        cubic += (c / 6.0) * prod;
                    }
                }
        H += cubic / mu;
    }
    if (stabilizer) H += (stabilizer_c0 / (mu * mu)) * SparseComplex(A0 * A0);

    // Hermiticity guard: symmetrization must have produced a self-adjoint matrix.
    SparseComplex resid = H - SparseComplex(H.adjoint());
    Real worst = 0;
    for (int k = 0; k < resid.outerSize(); ++k)
        for (SparseComplex::InnerIterator it(resid, k); it; ++it)
            worst = std::max(worst, std::abs(it.value()));
    if (worst > 1e-10) throw NotHermitian("cubic symmetrization residual " + std::to_string(worst));

    out.matrix = H;
    return out;
}

Real ResonantModel::target_level() const {
    Real level = 0;
    for (std::size_t j = 0; j < alpha_bar.size(); ++j)
        level += (2.0 * alpha_bar[j] + 1.0) * f[j] * mu * h;
    return level;
}

Matrix ResonantModel::hamiltonian() const {
    Matrix H = Matrix(A0) + (omega / mu) * Matrix(M0);
    H.diagonal().array() -= target_level();
    return H;
}

ResonantModel build_resonant_model(ResonantVariant variant, Real omega, Real mu, Real h,
                                   int n_max, const Vector* f_custom,
                                   std::vector<int> alpha_bar) {
    ResonantModel model;
    model.variant = variant;
    model.omega = omega;
    model.mu = mu;
    model.h = h;

    const int r = variant == ResonantVariant::r2 ? 2 : 3;
    if (f_custom) {
        model.f = *f_custom;
        if (model.f.size() != r) throw Error("intensity count does not match the variant");
    } else {
        model.f = Vector(r);
        if (r == 2)
            model.f << 2.0, 1.0;
        else
            model.f << 3.0, 2.0, 1.0;
    }
    if (variant == ResonantVariant::r2 && std::abs(model.f[0] - 2 * model.f[1]) > 1e-12)
        throw Error("r2 variant requires f1 = 2 f2");
    if (variant == ResonantVariant::r3 &&
        (std::abs(model.f[0] - model.f[1] - model.f[2]) > 1e-12 ||
         std::abs(model.f[1] - model.f[2]) < 1e-12))
        throw Error("r3 variant requires f1 = f2 + f3 with f2 != f3");

    model.alpha_bar = alpha_bar.empty() ? std::vector<int>(r, 1) : std::move(alpha_bar);
    model.algebra = build_algebra(r, n_max, mu * h);
    const LadderAlgebra& alg = model.algebra;

    using Triplet = Eigen::Triplet<Real>;
    std::vector<Triplet> diag;
    for (long i = 0; i < alg.dim; ++i) {
        const auto alpha = alg.multi_index(i);
        Real level = 0;
        for (int j = 0; j < r; ++j) level += (2.0 * alpha[j] + 1.0) * model.f[j];
        diag.emplace_back(i, i, level * mu * h);
    }
    SparseReal A0(alg.dim, alg.dim);
    A0.setFromTriplets(diag.begin(), diag.end());
    model.A0 = A0;

    const Real scale = std::pow(2.0 * mu * h, 1.5);
    SparseReal coupling(alg.dim, alg.dim);
    if (variant == ResonantVariant::r2) {
        SparseReal op = alg.raising[0] * alg.lowering[1];
        op = op * alg.lowering[1];
        coupling = scale * (op + SparseReal(op.transpose()));
    } else {
        SparseReal op = alg.raising[0] * alg.lowering[1];
        op = op * alg.lowering[2];
        coupling = std::sqrt(2.0) * scale * (op + SparseReal(op.transpose()));
    }
    model.M0 = coupling;
    return model;
}

long restricted_counting_m(const ResonantModel& model, const std::vector<int>& alpha_bar,
                           Real lam) {
    const LadderAlgebra& alg = model.algebra;
    Real target = 0;
    for (std::size_t j = 0; j < alpha_bar.size(); ++j)
        target += (2.0 * alpha_bar[j] + 1.0) * model.f[j];

    std::vector<long> block;
    const Vector diagA = Matrix(model.A0).diagonal() / (model.mu * model.h);
    for (long i = 0; i < alg.dim; ++i)
        if (std::abs(diagA[i] - target) <= 1e-9 * std::max(1.0, std::abs(target)))
            block.push_back(i);
    if (block.empty()) throw EmptyEigenspace("no basis state matches the degeneracy equation");

    Matrix M0 = Matrix(model.M0);
    Matrix restricted(block.size(), block.size());
    for (std::size_t a = 0; a < block.size(); ++a)
        for (std::size_t b = 0; b < block.size(); ++b)
            restricted(a, b) = model.omega * M0(block[a], block[b]);
    Eigen::SelfAdjointEigenSolver<Matrix> es(restricted, Eigen::EigenvaluesOnly);
    long count = 0;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()[i] < lam) ++count;
    return count;
}

TruncatedSpectrum diagonalize_truncated(const SparseComplex& H, const LadderAlgebra& alg,
                                        Real mass_tol) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es{ComplexMatrix(H)};
    if (es.info() != Eigen::Success) throw NoConvergence("dense Hermitian eigensolver failed");

    TruncatedSpectrum out;
    out.eigenvalues = es.eigenvalues();
    out.boundary_mass = Vector(alg.dim);
    std::vector<char> boundary(alg.dim, 0);
    for (long i = 0; i < alg.dim; ++i) boundary[i] = alg.interior(i, 2) ? 0 : 1;
    for (long k = 0; k < alg.dim; ++k) {
        Real mass = 0;
        for (long i = 0; i < alg.dim; ++i)
            if (boundary[i]) mass += std::norm(es.eigenvectors()(i, k));
        out.boundary_mass[k] = mass;
    }
    out.certified_max = std::numeric_limits<Real>::infinity();
    for (long k = 0; k < alg.dim; ++k) {
        if (out.boundary_mass[k] > mass_tol) {
            out.certified_max = out.eigenvalues[k];
            break;
        }
    }
    return out;
}

CorrectionResult correction_term(const OperatorSpec& spec, const ResonantModel& model,
                                 Real rho_cut, Real L0) {
    const LadderAlgebra& alg = model.algebra;
    const int r = alg.r;
    const int d = spec.d;
    const Real mu = model.mu, h = model.h;
    const Real V = -model.target_level();

    // perturbed and unperturbed spectra of the truncated block
    Eigen::SelfAdjointEigenSolver<Matrix> es(model.hamiltonian());
    if (es.info() != Eigen::Success) throw NoConvergence("resonant model eigensolver failed");
    const Vector perturbed = es.eigenvalues();
    Vector unperturbed = Matrix(model.A0).diagonal();
    unperturbed.array() += V;
    std::sort(unperturbed.data(), unperturbed.data() + unperturbed.size());

    // reliability inside the contributing window [-(2 rho)^2 - 2 L0, 0]
    const Real window_lo = -(4.0 * rho_cut * rho_cut) - 2.0 * L0;
    for (long k = 0; k < alg.dim; ++k) {
        if (perturbed[k] > 0) break;
        if (perturbed[k] < window_lo) continue;
        Real mass = 0;
        for (long i = 0; i < alg.dim; ++i)
            if (!alg.interior(i, 2)) mass += std::norm(es.eigenvectors()(i, k));
        if (mass > 1e-8)
            throw TruncationUnreliable("contributing eigenvalue carries boundary mass " +
                                       std::to_string(mass));
    }

    // w(e) = int Q(z) phi(e + z^2) theta(z^2 <= -e) dz  (Simpson, smooth integrand)
    auto weight = [&](Real e) {
        if (e >= 0) return 0.0;
        const Real zmax = std::min(std::sqrt(-e), 2.0 * rho_cut);
        if (zmax <= 0) return 0.0;
        const int n = 400;
        const Real dz = zmax / n;
        Real sum = 0;
        for (int i = 0; i <= n; ++i) {
            const Real z = i * dz;
            const Real g = shoulder(z, rho_cut) * shoulder(e + z * z, L0);
            const Real w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            sum += w * g;
        }
        return 2.0 * sum * dz / 3.0;
    };

    Real diff = 0;
    for (long k = 0; k < alg.dim; ++k) diff += weight(perturbed[k]) - weight(unperturbed[k]);

    const Real pref = std::pow(2.0 * M_PI, r - d) * std::pow(h, r - d) * std::pow(mu, r) *
                      model.f.prod() * spec.sqrt_g();

    CorrectionResult out;
    out.value = pref * diff;

    // restricted-block route: the degenerate level splits into (omega/mu) m_s,
    // each contributing the exact free-direction measure 2 sqrt(-e_s).
    Real target = model.target_level();
    std::vector<long> block;
    const Vector diagA = Matrix(model.A0).diagonal();
    for (long i = 0; i < alg.dim; ++i)
        if (std::abs(diagA[i] - target) <= 1e-9 * std::max(1.0, target)) block.push_back(i);
    if (block.empty()) throw EmptyEigenspace("degenerate level not represented in the basis");
    out.block_size = static_cast<long>(block.size());

    Matrix M0 = Matrix(model.M0);
    Matrix restricted(block.size(), block.size());
    for (std::size_t a = 0; a < block.size(); ++a)
        for (std::size_t b = 0; b < block.size(); ++b)
            restricted(a, b) = M0(block[a], block[b]);
    Eigen::SelfAdjointEigenSolver<Matrix> esr(restricted, Eigen::EigenvaluesOnly);
    Real acc = 0;
    for (int s = 0; s < esr.eigenvalues().size(); ++s) {
        const Real e = (model.omega / mu) * esr.eigenvalues()[s];
        if (e < 0) acc += 2.0 * std::min(std::sqrt(-e), rho_cut);
    }
    out.value_restricted = pref * acc;
    const Real scale = std::max({std::abs(out.value), std::abs(out.value_restricted), 1e-300});
    out.discrepancy = std::abs(out.value - out.value_restricted) / scale;
    return out;
}

}  // namespace magweyl
