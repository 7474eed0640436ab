#include "magweyl/asymptotics_lab.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <thread>

namespace magweyl {

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::weak: return "weak";
        case Regime::intermediate: return "intermediate";
        case Regime::strong: return "strong";
        case Regime::superstrong: return "superstrong";
        case Regime::ultrastrong: return "ultrastrong";
    }
    return "?";
}

RegimeLabel classify_regime(Real mu, Real h, int q, const RegimeConstants& k) {
    if (h <= 0 || h > 1 || mu < 1) throw ConfigError("classify_regime needs mu >= 1, h in (0,1]");
    const Real L = std::abs(std::log(h));
    RegimeLabel lab;
    lab.mu1 = k.mu1 * std::pow(h * L, -static_cast<Real>(q) / (q + 2));
    lab.mu2 = std::pow(h * L, -0.5);
    lab.mu3 = k.mu3 / (h * L);
    lab.mu_star_q = std::pow(h, -static_cast<Real>(q) / (q + 2));
    lab.strong_cut = k.strong_hi / h;
    lab.ultra_cut = k.ultra / h;

    // boundaries in increasing order; clamp so the buckets never invert
    Real b1 = lab.mu1;
    Real b2 = std::max(b1, lab.mu3);
    Real b3 = std::max(b2, lab.strong_cut);
    Real b4 = std::max(b3, lab.ultra_cut);
    if (mu <= b1)
        lab.name = Regime::weak;
    else if (mu <= b2)
        lab.name = Regime::intermediate;
    else if (mu <= b3)
        lab.name = Regime::strong;
    else if (mu <= b4)
        lab.name = Regime::superstrong;
    else
        lab.name = Regime::ultrastrong;

    lab.log_margin = std::numeric_limits<Real>::infinity();
    for (Real b : {b1, b2, b3, b4})
        lab.log_margin = std::min(lab.log_margin, std::abs(std::log(mu) - std::log(b)));
    return lab;
}

namespace {

struct BoundEntry {
    std::function<Real(const BoundParams&)> value;
    std::function<bool(const BoundParams&, std::string&)> guard;
};

Real logh(const BoundParams& p) { return std::abs(std::log(p.h)); }
Real nu(const BoundParams& p) { return std::pow(p.mu * p.h, p.kappa); }

bool guard_range(const BoundParams& p, Real lo, Real hi, std::string& note) {
    if (p.mu < lo || p.mu > hi) {
        std::ostringstream os;
        os << "mu=" << p.mu << " outside [" << lo << ", " << hi << "]";
        note = os.str();
        return false;
    }
    return true;
}

bool guard_intermediate(const BoundParams& p, std::string& note) {
    const Real L = logh(p);
    return guard_range(p, std::pow(p.h * L, -0.5), 1.0 / (p.h * L), note);
}

bool guard_strong(const BoundParams& p, std::string& note) {
    return guard_range(p, 1.0 / (p.h * logh(p)), 1.0 / p.h, note);
}

bool guard_q(const BoundParams& p, int q, std::string& note) {
    if (p.q != q) {
        note = "stated for q = " + std::to_string(q);
        return false;
    }
    return true;
}

const std::map<std::string, BoundEntry>& registry() {
    static const std::map<std::string, BoundEntry> table = [] {
        std::map<std::string, BoundEntry> t;
        auto pw = [](Real b, Real e) { return std::pow(b, e); };

        // weak field, no non-degeneracy assumption
        t["weak"] = {[pw](const BoundParams& p) {
                         return p.C * pw(p.h, 1 - p.d) +
                                p.C * p.mu * pw(p.h, 1 - p.d) *
                                    pw(p.mu * p.h * logh(p), 0.5 * p.q);
                     },
                     [](const BoundParams& p, std::string& note) {
                         return guard_range(p, 1.0, 1.0 / p.h, note);
                     }};

        // weak field under microhyperbolicity
        t["weak_mh"] = {[pw](const BoundParams& p) {
                            const Real L = logh(p);
                            return p.C * pw(p.h, 1 - p.d) +
                                   p.C * pw(p.h, -p.d) * pw(p.mu * p.h, p.l + 0.5 * p.q) *
                                       pw(L, p.l + 0.5 * p.q - p.sigma) +
                                   p.C * p.mu * pw(p.h, -p.d) *
                                       pw(p.mu * p.h, p.bl + 1 + 0.5 * p.q) *
                                       pw(L, p.bl + 1 + 0.5 * p.q - p.bsigma);
                        },
                        [](const BoundParams& p, std::string& note) {
                            return guard_range(p, 1.0, 1.0 / p.h, note);
                        }};

        t["weak_mh_reduced"] = {[pw](const BoundParams& p) {
                                    const Real L = logh(p);
                                    return p.C * pw(p.h, 1 - p.d) +
                                           p.C * pw(p.h, -p.d) *
                                               pw(p.mu * p.h, p.l + 0.5 * p.q) *
                                               pw(L, p.l + 0.5 * p.q - p.sigma);
                                },
                                [](const BoundParams& p, std::string& note) {
                                    const Real mu2 = std::pow(p.h * logh(p), -0.5);
                                    return guard_range(p, 1.0, mu2, note);
                                }};

        // intermediate field under microhyperbolicity
        t["intermediate_mh"] = {[pw](const BoundParams& p) {
                                    const Real L = logh(p);
                                    return p.C * pw(p.h, 1 - p.d) +
                                           p.C * pw(p.h, -p.d) *
                                               pw(p.mu * p.h * L, 0.5 * p.q) *
                                               pw(p.mu, -p.l) * pw(L, -p.sigma);
                                },
                                guard_intermediate};

        t["intermediate_q2"] = {[pw](const BoundParams& p) {
                                    return p.C * pw(p.h, 1 - p.d) +
                                           p.C * p.mu * pw(p.h, 5.0 / 3 - p.d);
                                },
                                [](const BoundParams& p, std::string& note) {
                                    return guard_q(p, 2, note) && guard_intermediate(p, note);
                                }};

        t["intermediate_q1"] = {[pw](const BoundParams& p) {
                                    return p.C * pw(p.h, 1 - p.d) +
                                           p.C * p.mu * pw(p.h, 4.0 / 3 - p.d) +
                                           p.C * std::sqrt(p.mu) * pw(p.h, 1 - p.d);
                                },
                                [](const BoundParams& p, std::string& note) {
                                    return guard_q(p, 1, note) && guard_intermediate(p, note);
                                }};

        t["intermediate_q1_corrected"] = {
            [pw](const BoundParams& p) {
                return p.C * pw(p.h, 1 - p.d) + p.C * p.mu * pw(p.h, 4.0 / 3 - p.d) +
                       p.C * pw(p.mu, 1 - 0.5 * p.l) * pw(p.h, 1 - p.d) *
                           pw(logh(p), -0.5 * p.sigma);
            },
            [](const BoundParams& p, std::string& note) {
                return guard_q(p, 1, note) && guard_intermediate(p, note);
            }};

        // counting-improvement family, nu(mu h) = (mu h)^kappa
        t["counting_q2"] = {[pw](const BoundParams& p) {
                                return p.C * pw(p.h, 1 - p.d) +
                                       p.C * nu(p) * pw(p.h, 2.0 / 3 - p.d);
                            },
                            [](const BoundParams& p, std::string& note) {
                                return guard_q(p, 2, note) && guard_intermediate(p, note);
                            }};

        t["counting_q1"] = {[pw](const BoundParams& p) {
                                const Real L = logh(p);
                                return p.C * pw(p.h, 1 - p.d) +
                                       p.C * pw(p.mu, -0.5) * pw(p.h, 0.5 - p.d) * std::sqrt(L) +
                                       p.C * nu(p) *
                                           (pw(p.h, 1.0 / 3 - p.d) +
                                            pw(p.mu, -0.5) * pw(p.h, -p.d));
                            },
                            [](const BoundParams& p, std::string& note) {
                                return guard_q(p, 1, note) && guard_intermediate(p, note);
                            }};

        t["counting_q1_corrected"] = {
            [pw](const BoundParams& p) {
                const Real L = logh(p);
                return p.C * pw(p.h, 1 - p.d) +
                       p.C * pw(p.mu, 0.5 - p.l) * pw(p.h, 0.5 - p.d) * pw(L, 0.5 - p.sigma) +
                       p.C * (nu(p) + 1.0 / p.mu) *
                           (pw(p.h, 1.0 / 3 - p.d) +
                            pw(p.mu, -0.5 * p.l) * pw(p.h, -p.d) * pw(L, -0.5 * p.sigma));
            },
            [](const BoundParams& p, std::string& note) {
                return guard_q(p, 1, note) && guard_intermediate(p, note);
            }};

        t["counting_q1_nocubic"] = {
            [pw](const BoundParams& p) {
                const Real L = logh(p);
                return p.C * pw(p.h, 1 - p.d) +
                       p.C * pw(p.mu, 1.5 - p.l) * pw(p.h, 1.5 - p.d) * pw(L, 0.5 - p.sigma) +
                       p.C * nu(p) *
                           (pw(p.h, 1.0 / 3 - p.d) +
                            pw(p.mu, -0.5 * p.l) * pw(p.h, -p.d) * pw(L, -0.5 * p.sigma));
            },
            [](const BoundParams& p, std::string& note) {
                return guard_q(p, 1, note) && guard_intermediate(p, note);
            }};

        // constant multiplicities
        t["constmult_q2"] = {[pw](const BoundParams& p) {
                                 return p.C * pw(p.h, 1 - p.d) +
                                        p.C * p.mu *
                                            pw(p.h, 1 - p.d + p.q * p.l / (p.l + 2)) *
                                            pw(std::abs(std::log(p.mu)) + 1e-12,
                                               -p.q * p.sigma / (p.l + 2));
                             },
                             [](const BoundParams& p, std::string& note) {
                                 return guard_intermediate(p, note);
                             }};

        t["constmult_q1_corrected"] = {
            [pw](const BoundParams& p) {
                const Real L = logh(p);
                return p.C * pw(p.h, 1 - p.d) +
                       p.C * p.mu * pw(p.h, 2 - p.d - 2 / (p.l + 2)) * pw(L, -p.sigma / (p.l + 2)) +
                       p.C * pw(p.h, 1 - p.d) * std::sqrt(p.mu * p.h * L) * pw(p.mu, 1 - p.l) *
                           pw(L, -p.sigma) +
                       p.C * pw(p.mu, 1 - 0.5 * p.l) * pw(p.h, 1 - p.d) * pw(L, -0.5 * p.sigma) +
                       p.C * pw(p.mu, (2 * p.l + 1) / (3 * p.l)) * pw(p.h, 4.0 / 3 - p.d) *
                           pw(L, -p.sigma / (3 * p.l));
            },
            [](const BoundParams& p, std::string& note) {
                return guard_q(p, 1, note) && guard_intermediate(p, note);
            }};

        t["constmult_q1_nocubic"] = {
            [pw](const BoundParams& p) {
                const Real L = logh(p);
                return p.C * pw(p.h, 1 - p.d) +
                       p.C * p.mu * pw(p.h, 2 - p.d - 2 / (p.l + 2)) * pw(L, -p.sigma / (p.l + 2)) +
                       p.C * pw(p.h, 1 - p.d) * std::sqrt(p.mu * p.h * L) * pw(p.mu, 1 - p.l) *
                           pw(L, -p.sigma) +
                       p.C * pw(p.mu, 1 - 0.5 * p.l) * pw(p.h, 1 - p.d) * pw(L, -0.5 * p.sigma);
            },
            [](const BoundParams& p, std::string& note) {
                return guard_q(p, 1, note) && guard_intermediate(p, note);
            }};

        t["constmult_counting_q2"] = {
            [pw](const BoundParams& p) {
                const Real L = logh(p);
                return p.C * pw(p.h, 1 - p.d) +
                       p.C * nu(p) * pw(p.h, 1 - p.d + (p.l - 2) / (p.l + 2)) *
                           pw(L, -2 * p.sigma / (p.l + 2));
            },
            [](const BoundParams& p, std::string& note) {
                return guard_q(p, 2, note) && guard_intermediate(p, note);
            }};

        t["constmult_counting_q1"] = {
            [pw](const BoundParams& p) {
                const Real L = logh(p);
                return p.C * pw(p.h, 1 - p.d) +
                       p.C * pw(p.h, -p.d) * std::sqrt(p.mu * p.h * L) * pw(p.mu, -p.l) *
                           pw(L, -p.sigma) +
                       p.C * nu(p) *
                           (pw(p.h, 1 - p.d - 2 / (p.l + 2)) * pw(L, -p.sigma / (p.l + 2)) +
                            pw(p.mu, -0.5 * p.l) * pw(p.h, -p.d) * pw(L, -0.5 * p.sigma));
            },
            [](const BoundParams& p, std::string& note) {
                return guard_q(p, 1, note) && guard_intermediate(p, note);
            }};

        // strong field
        t["strong_tau_dependent"] = {[pw](const BoundParams& p) {
                                         const Real L = logh(p);
                                         return p.C * pw(p.h, 1 - p.d) *
                                                std::exp(p.C * p.mu * p.h * L) *
                                                pw(L, 1 - p.sigma);
                                     },
                                     guard_strong};

        t["strong_constmult_q1"] = {
            [pw](const BoundParams& p) {
                const Real L = logh(p);
                return p.C * pw(p.h, 1 - p.d) +
                       p.C * p.mu * pw(p.h, 2 - p.d - 2 / (p.l + 2)) *
                           pw(L, -p.l * p.sigma / (2 * (p.l + 2))) +
                       p.C * std::sqrt(p.mu) * pw(p.h, 1 - p.d);
            },
            [](const BoundParams& p, std::string& note) {
                return guard_q(p, 1, note) && guard_strong(p, note);
            }};

        // ultrastrong field
        t["ultrastrong"] = {[pw](const BoundParams& p) {
                                return p.C * pw(p.mu * p.h, p.r) * pw(p.h, 1 - p.d);
                            },
                            [](const BoundParams& p, std::string& note) {
                                if (p.mu * p.h < 1.0) {
                                    note = "stated for mu >= C/h";
                                    return false;
                                }
                                return true;
                            }};

        t["ultrastrong_q2"] = {[pw](const BoundParams& p) {
                                   const Real L = logh(p);
                                   return p.C * pw(p.mu * p.h, p.r) * pw(p.h, 1 - p.d) +
                                          p.C * pw(p.mu * p.h, p.r) *
                                              pw(p.h, 1 - p.d + (p.l - 2) / (p.l + 2)) *
                                              pw(L, -2 * p.sigma / (p.l + 2));
                               },
                               [](const BoundParams& p, std::string& note) {
                                   if (!guard_q(p, 2, note)) return false;
                                   if (p.mu * p.h < 1.0) {
                                       note = "stated for mu >= C/h";
                                       return false;
                                   }
                                   return true;
                               }};

        t["ultrastrong_q1"] = {[pw](const BoundParams& p) {
                                   const Real L = logh(p);
                                   return p.C * pw(p.mu * p.h, p.r) *
                                          pw(p.h, 1 - p.d - 2 / (p.l + 2)) *
                                          pw(L, -p.sigma / (2 * (p.l + 2)));
                               },
                               [](const BoundParams& p, std::string& note) {
                                   if (!guard_q(p, 1, note)) return false;
                                   if (p.mu * p.h < 1.0) {
                                       note = "stated for mu >= C/h";
                                       return false;
                                   }
                                   return true;
                               }};
        return t;
    }();
    return table;
}

}  // namespace

std::vector<std::string> bound_ids() {
    std::vector<std::string> ids;
    for (const auto& [id, entry] : registry()) ids.push_back(id);
    return ids;
}

BoundResult predicted_bound(const std::string& id, const BoundParams& p) {
    const auto it = registry().find(id);
    if (it == registry().end()) throw UnknownTheorem("no bound registered under '" + id + "'");
    BoundResult out;
    out.regime_ok = it->second.guard(p, out.guard_note);
    out.value = it->second.value(p);
    return out;
}

namespace {

/// integral of the cutoff by midpoint refinement (independent of the density path)
Real cutoff_integral(const Bump& psi, int d) {
    if (psi.is_trivial()) return 0.0;
    Vector lo = psi.center.array() - psi.radius;
    Vector hi = psi.center.array() + psi.radius;
    Real prev = 0;
    for (int n = 16; n <= 128; n *= 2) {
        Vector delta = (hi - lo) / n;
        std::vector<int> idx(d, 0);
        Vector x(d);
        Real sum = 0;
        while (true) {
            for (int a = 0; a < d; ++a) x[a] = lo[a] + (idx[a] + 0.5) * delta[a];
            sum += psi(x);
            int a = d - 1;
            while (a >= 0) {
                if (++idx[a] < n) break;
                idx[a] = 0;
                --a;
            }
            if (a < 0) break;
        }
        sum *= delta.prod();
        if (n > 16 && std::abs(sum - prev) <= 1e-7 * std::abs(sum)) return sum;
        prev = sum;
    }
    return prev;
}

std::string cache_key(const ExperimentConfig& cfg, Real mu, Real h) {
    std::ostringstream os;
    os << std::setprecision(17) << cfg.spec.d << "_" << mu << "_" << h << "_" << cfg.tau;
    for (int n : cfg.grid.shape) os << "_" << n;
    std::hash<std::string> hasher;
    return "spectrum_" + std::to_string(hasher(os.str())) + ".bin";
}

/// For V = V(x_d) the integral of density * cutoff collapses to one dimension:
/// the in-plane marginal of the cutoff is analytic, so only the kernel
/// coordinate needs quadrature. Far tighter than the generic tensor midpoint
/// rule on the square-root kinks of the Landau sum.
Real separable_principal(const OperatorSpec& spec, const FieldEigenstructure& eig, Real tau,
                         Real rel_tol) {
    const Bump& cut = spec.cutoff;
    const Real R = cut.radius;
    const Real cz = cut.center[spec.d - 1];
    const int m = cut.order;
    Vector probe = Vector::Zero(spec.d);
    auto integrand = [&](Real z) {
        const Real s = 1.0 - (z - cz) * (z - cz) / (R * R);
        if (s <= 0) return 0.0;
        probe[spec.d - 1] = z;
        const Real marginal = M_PI * R * R * std::pow(s, m + 1) / (m + 1);
        return weyl_density(spec, eig, probe, tau).value * marginal;
    };
    const Real lo = cz - R, hi = cz + R;
    Real prev = 0;
    for (int n = 512;; n *= 2) {
        const Real dz = (hi - lo) / n;
        Real sum = 0;
        for (int i = 0; i < n; ++i) sum += integrand(lo + (i + 0.5) * dz);
        sum *= dz;
        if (n > 512 && std::abs(sum - prev) <= rel_tol * std::max(std::abs(sum), 1e-300))
            return sum;
        if (n >= (1 << 21))
            throw QuadratureDiverged("separable principal failed to stabilize");
        prev = sum;
    }
}

}  // namespace

Real lattice_counting_cached(const ExperimentConfig& cfg, Real tau) {
    ExperimentConfig local = cfg;
    local.tau = tau;
    const std::string path =
        cfg.cache_dir.empty()
            ? std::string()
            : cfg.cache_dir + "/" + cache_key(local, cfg.spec.mu, cfg.spec.h);
    if (!path.empty()) {
        if (auto cached = load_spectrum(path)) {
            Real acc = 0;
            for (Real e : *cached)
                if (e < tau) acc += 1.0;
            return acc;
        }
    }
    auto op = assemble(cfg.spec, cfg.grid, cfg.bc);
    auto sp = eigensolve_below(op, tau);
    if (!path.empty()) save_spectrum(path, sp.eigenvalues);
    return sp.counting(tau);
}

SweepRow measure_remainder(const ExperimentConfig& cfg, Real mu, Real h) {
    SweepRow row;
    row.mu = mu;
    row.h = h;
    row.mu_effective = mu;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        OperatorSpec spec = cfg.spec;
        spec.mu = mu;
        spec.h = h;
        spec.validate();

        if (mu >= 1.0) {
            const FieldEigenstructure eig = compute_eigenstructure(spec);
            row.regime = regime_name(classify_regime(mu, h, eig.q).name);
        } else {
            row.regime = "classical";
        }

        // oracle side
        Real oracle = 0;
        GridConfig grid = cfg.grid;
        if (cfg.points_per_h > 0)
            for (std::size_t a = 0; a < grid.shape.size(); ++a)
                grid.shape[a] = std::max<int>(
                    grid.shape[a],
                    static_cast<int>(std::ceil(grid.lengths[a] * cfg.points_per_h / h)));
        if (cfg.route == OracleRoute::separable) {
            SeparableConfig sep = cfg.separable;
            if (cfg.points_per_h > 0)
                sep.points_1d = std::max<int>(
                    sep.points_1d,
                    static_cast<int>(std::ceil((sep.interval_hi - sep.interval_lo) *
                                               cfg.points_per_h / h)));
            // round each plane length to the nearest flux quantum
            const Matrix F = spec.field_at(Vector::Zero(spec.d));
            for (int p = 0; p < sep.plane_lengths.size(); ++p) {
                const Real f = F(2 * p, 2 * p + 1);
                const Real L = sep.plane_lengths[p];
                const Real flux = std::max(1.0, std::round(mu * f * L * L / (2 * M_PI * h)));
                sep.plane_lengths[p] = std::sqrt(flux * 2.0 * M_PI * h / (mu * f));
            }
            sep.tau_max = std::max(sep.tau_max, cfg.tau + 0.1);
            auto sp = separable_oracle(spec, sep);
            oracle = weighted_counting(spec, sp, {}, cfg.tau);
        } else if (cfg.route == OracleRoute::lattice_1d) {
            // d = 1 lattice is real tridiagonal; weighted counting at spacing
            // delta and delta/2 extrapolates the O(delta^2) eigenvalue bias away
            auto counting_at = [&](const GridConfig& g) {
                auto op = assemble(spec, g, cfg.bc);
                const long n = op.dim;
                Vector diag(n), off(n - 1);
                for (long i = 0; i < n; ++i) diag[i] = op.matrix.coeff(i, i).real();
                for (long i = 0; i + 1 < n; ++i) off[i] = op.matrix.coeff(i + 1, i).real();
                auto tri = tridiagonal_below(diag, off, cfg.tau, true);
                Real acc = 0;
                for (int k = 0; k < tri.eigenvalues.size(); ++k)
                    for (long i = 0; i < n; ++i)
                        acc += tri.eigenvectors(i, k) * tri.eigenvectors(i, k) *
                               spec.cutoff(op.site_position(i));
                return acc;
            };
            GridConfig fine = grid;
            fine.shape[0] = 2 * grid.shape[0] + 1;  // halves the Dirichlet spacing
            const Real coarse_value = counting_at(grid);
            const Real fine_value = counting_at(fine);
            oracle = (4.0 * fine_value - coarse_value) / 3.0;
        } else {
            auto op = assemble(spec, grid, cfg.bc);
            auto sp = eigensolve_below(op, cfg.tau);
            oracle = weighted_counting(spec, sp, {}, cfg.tau);
        }
        row.oracle = oracle;

        // principal term
        if (cfg.route == OracleRoute::separable) {
            const FieldEigenstructure eig = compute_eigenstructure(spec);
            row.principal = separable_principal(spec, eig, cfg.tau,
                                                std::min(cfg.quadrature.rel_tol, 1e-7));
        } else {
            row.principal = weyl_integral(spec, cfg.tau, cfg.quadrature).value;
        }

        // resonant correction
        if (cfg.correction.enabled) {
            const Real muh = mu * h;
            const Real L = std::abs(std::log(h));
            auto model = build_resonant_model(cfg.correction.variant, cfg.correction.omega, mu,
                                              h, cfg.correction.n_max);
            auto corr = correction_term(spec, model, cfg.correction.rho_constant *
                                                         std::sqrt(muh * L),
                                        cfg.correction.L0_constant * muh * L);
            row.correction = corr.value * cutoff_integral(spec.cutoff, spec.d);
        }

        row.remainder_signed = row.oracle - row.principal - row.correction;
        row.remainder = std::abs(row.remainder_signed);

        BoundParams bp = cfg.bound_base;
        bp.mu = std::max(row.mu_effective, 1.0);
        bp.h = h;
        bp.d = spec.d;
        row.predicted = predicted_bound(cfg.bound_id, bp).value;
        row.ok = true;
    } catch (const Error& e) {
        row.ok = false;
        row.error = e.what();
    }
    row.runtime_s =
        std::chrono::duration<Real>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

SweepReport sweep(const ExperimentConfig& cfg,
                  const std::vector<std::pair<Real, Real>>& mu_h_points, int jobs) {
    SweepReport report;
    report.rows.resize(mu_h_points.size());
    jobs = std::max(1, jobs);
    if (jobs == 1) {
        for (std::size_t i = 0; i < mu_h_points.size(); ++i)
            report.rows[i] = measure_remainder(cfg, mu_h_points[i].first, mu_h_points[i].second);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (int t = 0; t < jobs; ++t)
            pool.emplace_back([&] {
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= mu_h_points.size()) return;
                    report.rows[i] =
                        measure_remainder(cfg, mu_h_points[i].first, mu_h_points[i].second);
                }
            });
        for (auto& th : pool) th.join();
    }
    try {
        report.fits["remainder_vs_h"] = fit_exponent(report.rows, "h", "remainder");
    } catch (const Error&) {
        // fewer than 4 valid rows; fits stay empty
    }
    return report;
}

PowerLawFit fit_exponent(const std::vector<SweepRow>& rows, const std::string& x_key,
                         const std::string& y_key, int d) {
    auto get = [d](const SweepRow& r, const std::string& key) -> Real {
        if (key == "mu") return r.mu_effective > 0 ? r.mu_effective : r.mu;
        if (key == "h") return r.h;
        if (key == "principal") return std::abs(r.principal);
        if (key == "correction") return std::abs(r.correction);
        if (key == "correction_norm") return std::abs(r.correction) * std::pow(r.h, d - 1);
        if (key == "oracle") return std::abs(r.oracle);
        if (key == "remainder") return r.remainder;
        if (key == "remainder_rel")
            return r.remainder / std::max(std::abs(r.principal), 1e-300);
        if (key == "predicted") return r.predicted;
        throw Error("unknown fit key '" + key + "'");
    };
    std::vector<Real> xs, ys;
    for (const auto& r : rows) {
        if (!r.ok) continue;
        xs.push_back(get(r, x_key));
        ys.push_back(get(r, y_key));
    }
    return fit_power_law(xs, ys);
}

void write_csv(const SweepReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open CSV output: " + path);
    out << "mu,h,regime,principal,correction,oracle,remainder,bound,runtime_s\n";
    out << std::setprecision(17);
    for (const auto& r : report.rows) {
        if (!r.ok) {
            out << r.mu << "," << r.h << ",failed(" << r.error << "),,,,,,\n";
            continue;
        }
        out << r.mu << "," << r.h << "," << r.regime << "," << r.principal << ","
            << r.correction << "," << r.oracle << "," << r.remainder << "," << r.predicted
            << "," << r.runtime_s << "\n";
    }
}

void write_json_report(const SweepReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open JSON output: " + path);
    out << json_report_text(report);
}

std::string json_report_text(const SweepReport& report) {
    // hand-rolled writer: fixed field order, floats at 17 significant digits
    std::ostringstream out;
    auto num = [&](Real v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    out << "{\n  \"rows\": [\n";
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const auto& r = report.rows[i];
        out << "    {\"mu\": " << num(r.mu) << ", \"h\": " << num(r.h)
            << ", \"mu_effective\": " << num(r.mu_effective) << ", \"regime\": \"" << r.regime
            << "\", \"principal\": " << num(r.principal)
            << ", \"correction\": " << num(r.correction) << ", \"oracle\": " << num(r.oracle)
            << ", \"remainder\": " << num(r.remainder)
            << ", \"remainder_signed\": " << num(r.remainder_signed)
            << ", \"bound\": " << num(r.predicted) << ", \"runtime_s\": " << num(r.runtime_s)
            << ", \"ok\": " << (r.ok ? "true" : "false");
        if (!r.ok) out << ", \"error\": \"" << r.error << "\"";
        out << "}" << (i + 1 < report.rows.size() ? "," : "") << "\n";
    }
    out << "  ],\n  \"fits\": {\n";
    std::size_t count = 0;
    for (const auto& [name, fit] : report.fits) {
        out << "    \"" << name << "\": {\"exponent\": " << num(fit.exponent)
            << ", \"intercept\": " << num(fit.intercept)
            << ", \"r_squared\": " << num(fit.r_squared) << ", \"points\": " << fit.points
            << "}" << (++count < report.fits.size() ? "," : "") << "\n";
    }
    out << "  }\n}\n";
    return out.str();
}

}  // namespace magweyl
