#include <CLI11.hpp>

#include "magweyl/config.hpp"
#include "magweyl/field_geometry.hpp"
#include "magweyl/landau_counting.hpp"
#include "magweyl/microhyperbolicity.hpp"

#include <cstdio>
#include <cstdlib>
#include <iostream>

namespace {

using namespace magweyl;

std::string num(Real v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string vec_json(const Vector& v) {
    std::string out = "[";
    for (int i = 0; i < v.size(); ++i) out += (i ? ", " : "") + num(v[i]);
    return out + "]";
}

std::string mat_json(const Matrix& m) {
    std::string out = "[";
    for (int i = 0; i < m.rows(); ++i) {
        out += i ? ", [" : "[";
        for (int j = 0; j < m.cols(); ++j) out += (j ? ", " : "") + num(m(i, j));
        out += "]";
    }
    return out + "]";
}

struct Options {
    std::string config_path;
    std::string out_path;
    Real tau = std::numeric_limits<Real>::quiet_NaN();
    int jobs = 1;
    long seed = 0;
    bool dry_run = false;
};

ConfigDocument load(const Options& opt) {
    if (opt.config_path.empty()) throw ConfigError("--config is required for this command");
    ConfigDocument doc = parse_config_file(opt.config_path);
    if (const char* cache = std::getenv("MAGWEYL_CACHE_DIR")) doc.experiment.cache_dir = cache;
    if (!std::isnan(opt.tau)) doc.experiment.tau = opt.tau;
    return doc;
}

void emit(const Options& opt, const std::string& text) {
    if (opt.out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(opt.out_path);
    if (!out) throw Error("cannot open output path " + opt.out_path);
    out << text;
}

int cmd_regimes(const Options& opt, Real h, int q, Real mu) {
    RegimeConstants constants;
    std::string out = "{";
    const Real L = std::abs(std::log(h));
    out += "\"h\": " + num(h) + ", \"q\": " + std::to_string(q);
    out += ", \"mu_bar1\": " + num(std::pow(h * L, -static_cast<Real>(q) / (q + 2)));
    out += ", \"mu_bar2\": " + num(std::pow(h * L, -0.5));
    out += ", \"mu_bar3\": " + num(1.0 / (h * L));
    out += ", \"mu_star_q\": " + num(std::pow(h, -static_cast<Real>(q) / (q + 2)));
    out += ", \"strong_cut\": " + num(1.0 / h) + ", \"ultra_cut\": " + num(1.0 / h);
    if (mu > 0) {
        auto lab = classify_regime(mu, h, q, constants);
        out += std::string(", \"mu\": ") + num(mu) + ", \"regime\": \"" +
               regime_name(lab.name) + "\", \"log_margin\": " + num(lab.log_margin);
    }
    out += "}\n";
    emit(opt, out);
    return 0;
}

int cmd_eig(const Options& opt) {
    auto doc = load(opt);
    if (opt.dry_run) return emit(opt, resolved_config_json(doc)), 0;
    auto eig = compute_eigenstructure(doc.experiment.spec, doc.eps0, doc.eps_group);
    std::string out = "{\"f\": " + vec_json(eig.f) + ", \"r\": " + std::to_string(eig.r) +
                      ", \"q\": " + std::to_string(eig.q) + ", \"partition\": [";
    for (std::size_t g = 0; g < eig.partition.size(); ++g) {
        out += g ? ", [" : "[";
        for (std::size_t i = 0; i < eig.partition[g].size(); ++i)
            out += (i ? ", " : "") + std::to_string(eig.partition[g][i]);
        out += "]";
    }
    out += "], \"group_values\": " + vec_json(eig.group_values) + ", \"resonances\": [";
    const auto res = detect_resonances(eig.f);
    for (std::size_t i = 0; i < res.size(); ++i) {
        out += i ? ", {" : "{";
        out += "\"order\": " + std::to_string(res[i].order) + ", \"indices\": [";
        for (std::size_t k = 0; k < res[i].indices.size(); ++k)
            out += (k ? ", " : "") + std::to_string(res[i].indices[k]);
        out += "]}";
    }
    out += "]}\n";
    emit(opt, out);
    return 0;
}

int cmd_canon(const Options& opt) {
    auto doc = load(opt);
    if (opt.dry_run) return emit(opt, resolved_config_json(doc)), 0;
    auto cf = canonical_reduce_constant(doc.experiment.spec, doc.eps0, doc.eps_group);
    emit(opt, "{\"f\": " + vec_json(cf.f) + ", \"residual\": " + num(cf.residual) +
                  ", \"transform\": " + mat_json(cf.transform) +
                  ", \"gauge_coeffs\": " + mat_json(cf.gauge_coeffs) + "}\n");
    return 0;
}

int cmd_weyl(const Options& opt) {
    auto doc = load(opt);
    if (opt.dry_run) return emit(opt, resolved_config_json(doc)), 0;
    auto res = weyl_integral(doc.experiment.spec, doc.experiment.tau, doc.experiment.quadrature);
    emit(opt, "{\"tau\": " + num(doc.experiment.tau) + ", \"principal\": " + num(res.value) +
                  ", \"error_estimate\": " + num(res.error_estimate) +
                  ", \"points_per_axis\": " + std::to_string(res.points_per_axis) + "}\n");
    return 0;
}

int cmd_count(const Options& opt) {
    auto doc = load(opt);
    if (opt.dry_run) return emit(opt, resolved_config_json(doc)), 0;
    const OperatorSpec& spec = doc.experiment.spec;
    auto eig = compute_eigenstructure(spec, doc.eps0, doc.eps_group);
    CountingQuery q{eig.f, spec.potential_at(Vector::Zero(spec.d)), spec.mu * spec.h,
                    doc.experiment.tau};
    emit(opt, "{\"tau\": " + num(q.tau) + ", \"hbar\": " + num(q.hbar) +
                  ", \"n0\": " + std::to_string(n0_count(q)) + "}\n");
    return 0;
}

int cmd_mh(const Options& opt) {
    auto doc = load(opt);
    if (opt.dry_run) return emit(opt, resolved_config_json(doc)), 0;
    if (!doc.has_mh) throw ConfigError("config has no 'mh' section");
    const OperatorSpec& spec = doc.experiment.spec;
    const auto& mh = doc.mh;
    auto sample_poly = [&](const Polynomial& p) {
        return GridFunction::sample(mh.lo, mh.hi, mh.shape,
                                    [&](const Vector& x) { return p(x); });
    };
    MHReport rep;
    if (mh.type == "constant_field") {
        auto V = sample_poly(spec.potential);
        if (mh.use_landau) {
            auto eig = compute_eigenstructure(spec, doc.eps0, doc.eps_group);
            rep = check_constant_field(V, mh.eps, spec.mu * spec.h, eig.f);
        } else {
            rep = check_constant_field(V, mh.eps);
        }
    } else if (mh.type == "constant_multiplicity") {
        if (mh.f_components.empty())
            throw ConfigError("mh.f_components required for constant_multiplicity");
        std::vector<GridFunction> f;
        for (const auto& p : mh.f_components) f.push_back(sample_poly(p));
        rep = check_constant_multiplicity(f, sample_poly(spec.potential), mh.eps);
    } else if (mh.type == "ultrastrong") {
        auto eig = compute_eigenstructure(spec, doc.eps0, doc.eps_group);
        const Real shift = spec.mu * spec.h * eig.f.sum();
        auto W = GridFunction::sample(mh.lo, mh.hi, mh.shape, [&](const Vector& x) {
            return spec.potential_at(x) + shift;
        });
        rep = check_ultrastrong(W, mh.eps);
    } else {
        throw ConfigError("mh.type must be constant_field | constant_multiplicity | ultrastrong");
    }
    const char* status = rep.status == MHReport::Status::holds    ? "holds"
                         : rep.status == MHReport::Status::fails  ? "fails"
                                                                  : "inconclusive";
    std::string out = std::string("{\"status\": \"") + status +
                      "\", \"margin\": " + num(rep.margin);
    if (rep.ell.size()) out += ", \"ell\": " + vec_json(rep.ell);
    if (!rep.witnesses.empty()) out += ", \"witness\": " + vec_json(rep.witnesses.front());
    if (!rep.note.empty()) out += ", \"note\": \"" + rep.note + "\"";
    out += "}\n";
    emit(opt, out);
    return 0;
}

int cmd_oracle(const Options& opt) {
    auto doc = load(opt);
    if (opt.dry_run) return emit(opt, resolved_config_json(doc)), 0;
    if (doc.experiment.route == OracleRoute::lattice && doc.experiment.spec.cutoff.is_trivial()) {
        // pure counting run: eligible for the spectrum cache
        const Real counting = lattice_counting_cached(doc.experiment, doc.experiment.tau);
        emit(opt, "{\"tau\": " + num(doc.experiment.tau) +
                      ", \"counting\": " + num(counting) + "}\n");
        return 0;
    }
    auto row = measure_remainder(doc.experiment, doc.experiment.spec.mu, doc.experiment.spec.h);
    if (!row.ok) throw Error("oracle stage failed: " + row.error);
    emit(opt, "{\"tau\": " + num(doc.experiment.tau) + ", \"oracle\": " + num(row.oracle) +
                  ", \"principal\": " + num(row.principal) +
                  ", \"remainder\": " + num(row.remainder) + ", \"regime\": \"" + row.regime +
                  "\"}\n");
    return 0;
}

int cmd_correction(const Options& opt) {
    auto doc = load(opt);
    if (opt.dry_run) return emit(opt, resolved_config_json(doc)), 0;
    const OperatorSpec& spec = doc.experiment.spec;
    const auto& cc = doc.experiment.correction;
    const Real muh = spec.mu * spec.h;
    const Real L = std::abs(std::log(spec.h));
    auto model = build_resonant_model(cc.variant, cc.omega, spec.mu, spec.h, cc.n_max);
    auto corr = correction_term(spec, model, cc.rho_constant * std::sqrt(muh * L),
                                cc.L0_constant * muh * L);
    emit(opt, "{\"value\": " + num(corr.value) +
                  ", \"value_restricted\": " + num(corr.value_restricted) +
                  ", \"discrepancy\": " + num(corr.discrepancy) +
                  ", \"block_size\": " + std::to_string(corr.block_size) + "}\n");
    return 0;
}

int cmd_sweep(const Options& opt) {
    auto doc = load(opt);
    if (opt.dry_run) return emit(opt, resolved_config_json(doc)), 0;
    if (doc.sweep_points.empty()) throw ConfigError("sweep requires a 'sweep' section");
    auto report = sweep(doc.experiment, doc.sweep_points, opt.jobs > 0 ? opt.jobs : doc.jobs);
    for (const auto& key : {"remainder", "principal", "oracle"}) {
        try {
            report.fits[std::string(key) + "_vs_h"] =
                fit_exponent(report.rows, "h", key, doc.experiment.spec.d);
        } catch (const Error&) {
        }
    }
    if (!doc.csv_path.empty()) write_csv(report, doc.csv_path);
    const std::string text = json_report_text(report);
    if (!doc.json_path.empty()) {
        std::ofstream out(doc.json_path);
        out << text;
    }
    emit(opt, text);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"magweyl: spectral asymptotics workbench for magnetic Schrodinger operators"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_help_flag("--help", "print usage");

    Options opt;
    app.add_option("--config", opt.config_path, "JSON config document");
    app.add_option("--tau", opt.tau, "energy level override");
    app.add_option("--out", opt.out_path, "write the JSON result here instead of stdout");
    app.add_option("--jobs", opt.jobs, "parallel sweep rows");
    app.add_option("--seed", opt.seed, "random seed record (runs are deterministic)");
    app.add_flag("--dry-run", opt.dry_run, "print the resolved config and exit");

    auto* regimes = app.add_subcommand("regimes", "evaluate the field-strength thresholds");
    regimes->set_help_flag("--help", "print usage");
    Real reg_h = 0.001, reg_mu = -1;
    int reg_q = 1;
    regimes->add_option("--h", reg_h, "Planck parameter")->required();
    regimes->add_option("--q", reg_q, "kernel dimension");
    regimes->add_option("--mu", reg_mu, "classify this mu");

    auto* eig = app.add_subcommand("eig", "field eigenstructure and resonances");
    auto* canon = app.add_subcommand("canon", "block-canonical reduction and gauge");
    auto* weyl = app.add_subcommand("weyl", "integrated spectral density");
    auto* count = app.add_subcommand("count", "Landau lattice count at the origin");
    auto* mh = app.add_subcommand("mh-check", "non-degeneracy checks over a grid");
    auto* oracle = app.add_subcommand("oracle", "brute-force spectral counting");
    auto* correction = app.add_subcommand("correction", "resonant correction term");
    auto* sweep_cmd = app.add_subcommand("sweep", "(mu, h) sweep with remainder fits");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    }

    try {
        if (regimes->parsed()) return cmd_regimes(opt, reg_h, reg_q, reg_mu);
        if (eig->parsed()) return cmd_eig(opt);
        if (canon->parsed()) return cmd_canon(opt);
        if (weyl->parsed()) return cmd_weyl(opt);
        if (count->parsed()) return cmd_count(opt);
        if (mh->parsed()) return cmd_mh(opt);
        if (oracle->parsed()) return cmd_oracle(opt);
        if (correction->parsed()) return cmd_correction(opt);
        if (sweep_cmd->parsed()) return cmd_sweep(opt);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
