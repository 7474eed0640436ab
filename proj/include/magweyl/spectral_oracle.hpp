#pragma once

#include "magweyl/field_geometry.hpp"
#include "magweyl/types.hpp"

#include <Eigen/SparseCore>

#include <optional>

namespace magweyl {

enum class BoundaryCondition { periodic, dirichlet };

struct GridConfig {
    std::vector<int> shape;  // sites per axis
    Vector lengths;          // box lengths per axis
    Vector origin;           // lower corner
    Real min_points_per_magnetic_length = 2.0;
    long dense_cap = 3000;   // largest dimension for the dense eigensolver
};

/// Gauge-covariant finite-difference discretization of
///   sum_j (h D_j - mu V_j)^2 g^{jj} + V
/// with complex link phases (midpoint line integrals of the vector potential)
/// and twisted wrap links on periodic axes. Diagonal metric only.
struct LatticeOperator {
    std::vector<int> shape;
    Vector spacing;
    Vector origin;
    std::vector<BoundaryCondition> bc;
    Eigen::SparseMatrix<Complex> matrix;
    Real mu = 0, h = 1;
    long dim = 0;
    long dense_cap = 3000;

    Vector site_position(long flat) const;
    std::vector<int> unflatten(long flat) const;
    long flatten(const std::vector<int>& idx) const;

    /// conjugation by site phases exp(i chi); the spectrum is invariant
    LatticeOperator gauge_transformed(const std::vector<Real>& chi) const;
};

LatticeOperator assemble(const OperatorSpec& spec, const GridConfig& grid,
                         const std::vector<BoundaryCondition>& bc);
LatticeOperator assemble(const OperatorSpec& spec, const GridConfig& grid,
                         BoundaryCondition bc);

/// product of link phases around the (axis_a, axis_b) plaquette at base_idx;
/// used by the flux-uniformity and gauge-invariance checks
Complex plaquette_phase(const LatticeOperator& op, int axis_a, int axis_b,
                        const std::vector<int>& base_idx);

struct SeparableLevel {
    Real energy;
    long degeneracy;  // product of flux quanta
    int mode;         // 1D factor index
};

struct OracleSpectrum {
    enum class Source { lattice, separable };
    Source source = Source::lattice;

    std::vector<Real> eigenvalues;  // ascending; lattice: one entry per state
    ComplexMatrix eigenvectors;     // lattice source, columns matching eigenvalues
    Matrix positions;               // lattice source, one row per site
    Real certified_max = 0;

    // separable payload
    std::vector<SeparableLevel> levels;  // by ascending energy
    Matrix modes_1d;                     // l2-normalized columns
    Vector nodes_1d;
    Real plane_area = 0;
    long flux_total = 0;

    /// plain counting function N(tau), degeneracy-weighted for separable
    Real counting(Real tau) const;
};

/// Lowest k eigenpairs: dense below the cap, otherwise shift-invert
/// subspace iteration with residual certification.
OracleSpectrum eigensolve(const LatticeOperator& op, int k_lowest);

/// All eigenpairs strictly below tau.
OracleSpectrum eigensolve_below(const LatticeOperator& op, Real tau);

/// Spectral weight sum_{lambda_k <= tau} <u_k, psi u_k> on the lattice;
/// for the separable source the in-plane integral of the cutoff is analytic.
Real weighted_counting(const OperatorSpec& spec, const OracleSpectrum& spectrum,
                       const std::function<Real(const Vector&)>& psi, Real tau);

struct SeparableConfig {
    Vector plane_lengths;   // torus length per rotation plane
    Real interval_lo = -2, interval_hi = 2;
    int points_1d = 1024;
    Real tau_max = 1.0;     // keep levels below this
};

/// Exact tensor oracle for a constant block-canonical field with V = V(x_d):
/// spectrum { sum (2 alpha_p + 1) f_p mu h + nu_m } with degeneracy equal to
/// the product of flux quanta; nu_m from a dedicated tridiagonal 1D solver.
OracleSpectrum separable_oracle(const OperatorSpec& spec, const SeparableConfig& cfg);

struct Tridiagonal1D {
    Vector eigenvalues;
    Matrix eigenvectors;  // columns, l2-normalized
};

/// Sturm-sequence bisection for all eigenvalues of a symmetric tridiagonal
/// matrix below a cutoff, with inverse-iteration eigenvectors.
Tridiagonal1D tridiagonal_below(const Vector& diag, const Vector& offdiag, Real cutoff,
                                bool want_vectors = true);

/// flat binary spectrum cache: 8-byte little-endian count, then doubles
void save_spectrum(const std::string& path, const std::vector<Real>& eigenvalues);
std::optional<std::vector<Real>> load_spectrum(const std::string& path);

}  // namespace magweyl
