#pragma once

#include "magweyl/oscillator_algebra.hpp"
#include "magweyl/spectral_oracle.hpp"
#include "magweyl/weyl_law.hpp"

#include <map>
#include <string>

namespace magweyl {

enum class Regime { weak, intermediate, strong, superstrong, ultrastrong };
const char* regime_name(Regime r);

struct RegimeConstants {
    Real mu1 = 1.0;        // weak | intermediate at mu1 * (h|log h|)^{-q/(q+2)}
    Real mu3 = 1.0;        // intermediate | strong at mu3 / (h |log h|)
    Real strong_hi = 1.0;  // strong | superstrong at strong_hi / h
    Real ultra = 1.0;      // superstrong | ultrastrong at ultra / h
};

struct RegimeLabel {
    Regime name = Regime::weak;
    Real mu1 = 0, mu2 = 0, mu3 = 0, mu_star_q = 0;  // evaluated thresholds
    Real strong_cut = 0, ultra_cut = 0;
    Real log_margin = 0;  // |log mu - log(nearest boundary)|
};

RegimeLabel classify_regime(Real mu, Real h, int q, const RegimeConstants& constants = {});

/// Parameters every registered remainder bound may consume.
struct BoundParams {
    Real mu = 1, h = 0.1;
    int d = 3, r = 1, q = 1;
    Real l = 2, sigma = 0;     // potential smoothness (l, sigma)
    Real bl = 2, bsigma = 1;   // metric/field smoothness
    Real kappa = 1;            // counting improvement nu(hbar) = hbar^kappa
    Real s = 5;                // free tail exponent
    Real C = 1;                // global constant
};

struct BoundResult {
    Real value = 0;
    bool regime_ok = true;
    std::string guard_note;
};

/// Registered remainder-bound formulas, keyed by regime/condition name.
std::vector<std::string> bound_ids();
BoundResult predicted_bound(const std::string& id, const BoundParams& p);

enum class OracleRoute { separable, lattice, lattice_1d };

struct ResonantCorrectionConfig {
    bool enabled = false;
    ResonantVariant variant = ResonantVariant::r2;
    Real omega = 1.0;
    int n_max = 14;
    Real rho_constant = 1.0;  // rho_cut = rho_constant * sqrt(mu h |log h|)
    Real L0_constant = 4.0;   // L0 = L0_constant * mu h |log h|
};

struct ExperimentConfig {
    OperatorSpec spec;  // mu and h are overridden per row
    Real tau = 0;
    OracleRoute route = OracleRoute::separable;
    SeparableConfig separable;  // plane lengths are flux-rounded per row
    GridConfig grid;            // lattice routes
    std::vector<BoundaryCondition> bc;
    QuadratureConfig quadrature;
    std::string bound_id = "weak";
    BoundParams bound_base;
    ResonantCorrectionConfig correction;
    std::string cache_dir;  // optional spectrum cache directory
    int points_per_h = 0;   // when > 0, grid resolutions scale as points_per_h / h
};

struct SweepRow {
    Real mu = 0, h = 0;
    Real mu_effective = 0;  // after flux rounding (separable route)
    std::string regime;
    Real principal = 0;
    Real correction = 0;
    Real oracle = 0;
    Real remainder = 0;         // |oracle - principal - correction|
    Real remainder_signed = 0;
    Real predicted = 0;
    Real runtime_s = 0;
    bool ok = false;
    std::string error;
};

struct SweepReport {
    std::vector<SweepRow> rows;
    std::map<std::string, PowerLawFit> fits;
};

SweepRow measure_remainder(const ExperimentConfig& cfg, Real mu, Real h);

/// Plain lattice counting below tau, served from the spectrum cache when the
/// experiment names a cache directory (MAGWEYL_CACHE_DIR through the CLI).
Real lattice_counting_cached(const ExperimentConfig& cfg, Real tau);

SweepReport sweep(const ExperimentConfig& cfg,
                  const std::vector<std::pair<Real, Real>>& mu_h_points, int jobs = 1);

/// Least-squares log-log fit across the valid rows; keys: mu, h, principal,
/// correction, oracle, remainder, remainder_rel, predicted, correction_norm
/// (correction * h^{d-1}).
PowerLawFit fit_exponent(const std::vector<SweepRow>& rows, const std::string& x_key,
                         const std::string& y_key, int d = 3);

void write_csv(const SweepReport& report, const std::string& path);
void write_json_report(const SweepReport& report, const std::string& path);
std::string json_report_text(const SweepReport& report);

}  // namespace magweyl
