#pragma once

#include "magweyl/types.hpp"

#include <Eigen/SparseCore>

namespace magweyl {

using SparseReal = Eigen::SparseMatrix<Real>;
using SparseComplex = Eigen::SparseMatrix<Complex>;

/// Truncated Hermite-basis ladder operators for r independent modes,
/// n_max levels per mode, tensor dimension n_max^r.
struct LadderAlgebra {
    int r = 0;
    int n_max = 0;
    Real hbar = 0;  // mu h
    long dim = 0;
    std::vector<SparseReal> lowering;  // a_j,  a|n> = sqrt(n) |n-1>
    std::vector<SparseReal> raising;   // a_j^T
    std::vector<SparseReal> number;    // N_j = a_j^T a_j, diagonal

    long flat_index(const std::vector<int>& alpha) const;
    std::vector<int> multi_index(long flat) const;

    /// true when alpha_j <= n_max - 1 - margin for every mode
    bool interior(long flat, int margin = 1) const;

    /// x_j and the conjugate momentum mu h D_j as matrices,
    /// normalized so that (mu h D_j)^2 + x_j^2 = hbar (2 N_j + 1).
    SparseComplex position(int j) const;
    SparseComplex momentum(int j) const;
};

LadderAlgebra build_algebra(int r, int n_max, Real hbar, long dim_cap = 1000000);

/// Cubic coefficients b_{jkm} over the 2r quadratures
/// (index 2j = mu h D_{j+1}, index 2j+1 = x_{j+1}).
class CubicCoefficients {
public:
    explicit CubicCoefficients(int two_r) : two_r_(two_r), c_(two_r * two_r * two_r, 0.0) {}
    Real& at(int j, int k, int m) { return c_[(j * two_r_ + k) * two_r_ + m]; }
    Real at(int j, int k, int m) const { return c_[(j * two_r_ + k) * two_r_ + m]; }
    int two_r() const { return two_r_; }
    bool empty() const;

private:
    int two_r_;
    std::vector<Real> c_;
};

struct PerturbedOscillator {
    LadderAlgebra algebra;
    SparseComplex matrix;  // sum f_j (2N_j+1) hbar + mu^{-1} Sym(cubic) + stabilizer
    Real mu = 1;
    bool stabilized = false;
};

/// Weyl-symmetrized cubic perturbation of the Landau block. The cubic term is
/// averaged over all orderings of the three quadratures, so real coefficients
/// give a Hermitian matrix by construction.
PerturbedOscillator build_perturbed(const Vector& f, Real hbar, const CubicCoefficients& b,
                                    Real mu, int n_max, bool stabilizer = false,
                                    Real stabilizer_c0 = 1.0);

enum class ResonantVariant { r2, r3 };

/// Third-order resonant coupling that commutes with the Landau part:
/// r2 with f = (2,1), M0 = (2 mu h)^{3/2} (a1^T a2^2 + h.c.);
/// r3 with f1 = f2 + f3,  M0 = sqrt(2) (2 mu h)^{3/2} (a1^T a2 a3 + h.c.).
struct ResonantModel {
    ResonantVariant variant = ResonantVariant::r2;
    Vector f;
    Real omega = 1;
    Real mu = 1;
    Real h = 0.1;
    LadderAlgebra algebra;
    SparseReal A0;  // diagonal, sum_j f_j (2 N_j + 1) mu h
    SparseReal M0;  // bare resonant coupling, real symmetric
    std::vector<int> alpha_bar;  // degenerate target level

    Real hbar() const { return mu * h; }
    Real target_level() const;  // sum (2 alpha_bar_j + 1) f_j mu h
    /// full Hamiltonian A0 + V + (omega/mu) M0 at V = -target_level
    Matrix hamiltonian() const;
};

ResonantModel build_resonant_model(ResonantVariant variant, Real omega, Real mu, Real h,
                                   int n_max, const Vector* f_custom = nullptr,
                                   std::vector<int> alpha_bar = {});

/// Count of eigenvalues of M0 restricted to the degenerate eigenspace
/// { alpha : sum (2 alpha_j + 1) f_j mu h = target } lying strictly below lam.
long restricted_counting_m(const ResonantModel& model, const std::vector<int>& alpha_bar,
                           Real lam);

/// Eigenvalues of a truncated operator with per-eigenvalue reliability,
/// measured as eigenvector mass on the top two index layers.
struct TruncatedSpectrum {
    Vector eigenvalues;    // ascending
    Vector boundary_mass;  // same order
    Real certified_max = 0;
};

TruncatedSpectrum diagonalize_truncated(const SparseComplex& H, const LadderAlgebra& algebra,
                                        Real mass_tol = 1e-8);

struct CorrectionResult {
    Real value = 0;            // counting-difference route
    Real value_restricted = 0; // degenerate-block route
    Real discrepancy = 0;      // relative difference of the two routes
    long block_size = 0;       // degenerate eigenspace dimension
};

/// Spectral-shift correction produced by the unremovable resonant coupling:
/// the counting-function difference of the perturbed and unperturbed blocks,
/// integrated in the free direction against a cutoff supported in |z| <= 2 rho_cut,
/// with an energy cutoff of scale L0 around the degenerate level. Also evaluates
/// the restricted-block shortcut and reports the relative discrepancy.
CorrectionResult correction_term(const OperatorSpec& spec, const ResonantModel& model,
                                 Real rho_cut, Real L0);

}  // namespace magweyl
