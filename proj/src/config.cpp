#include "magweyl/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace magweyl {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key))
            throw ConfigError("unknown key '" + key + "' in " + where);
}

Vector parse_vector(const json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + " must be an array");
    Vector v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<Real>();
    return v;
}

Polynomial parse_polynomial(const json& j, const std::string& where) {
    check_keys(j, {"constant", "terms"}, where);
    std::vector<Monomial> terms;
    if (j.contains("constant") && j["constant"].get<Real>() != 0.0)
        terms.push_back({j["constant"].get<Real>(), {}});
    if (j.contains("terms")) {
        for (const auto& t : j["terms"]) {
            check_keys(t, {"coeff", "powers"}, where + ".terms[]");
            Monomial m;
            m.coeff = t.at("coeff").get<Real>();
            for (const auto& p : t.at("powers")) m.powers.push_back(p.get<int>());
            terms.push_back(std::move(m));
        }
    }
    return Polynomial(std::move(terms));
}

Matrix parse_metric(const json& j, int d) {
    if (j.is_string()) {
        if (j.get<std::string>() != "identity")
            throw ConfigError("metric string must be \"identity\"");
        return Matrix::Identity(d, d);
    }
    check_keys(j, {"diagonal", "matrix"}, "problem.metric");
    if (j.contains("diagonal")) {
        Vector diag = parse_vector(j["diagonal"], "problem.metric.diagonal");
        if (diag.size() != d) throw ConfigError("metric diagonal has wrong length");
        return Matrix(diag.asDiagonal());
    }
    if (j.contains("matrix")) {
        Matrix m(d, d);
        const auto& rows = j["matrix"];
        if (static_cast<int>(rows.size()) != d) throw ConfigError("metric matrix has wrong size");
        for (int i = 0; i < d; ++i)
            for (int k = 0; k < d; ++k) m(i, k) = rows[i][k].get<Real>();
        return m;
    }
    throw ConfigError("metric needs \"diagonal\" or \"matrix\"");
}

Matrix parse_field(const json& j, int d) {
    check_keys(j, {"planes", "matrix"}, "problem.field");
    Matrix F = Matrix::Zero(d, d);
    if (j.contains("matrix")) {
        const auto& rows = j["matrix"];
        if (static_cast<int>(rows.size()) != d) throw ConfigError("field matrix has wrong size");
        for (int i = 0; i < d; ++i)
            for (int k = 0; k < d; ++k) F(i, k) = rows[i][k].get<Real>();
        return F;
    }
    if (j.contains("planes")) {
        for (const auto& plane : j["planes"]) {
            if (!plane.is_array() || plane.size() != 3)
                throw ConfigError("field planes entries must be [axis_j, axis_k, value]");
            const int a = plane[0].get<int>(), b = plane[1].get<int>();
            const Real v = plane[2].get<Real>();
            if (a < 0 || b < 0 || a >= d || b >= d || a == b)
                throw ConfigError("field plane axes out of range");
            F(a, b) = v;
            F(b, a) = -v;
        }
        return F;
    }
    throw ConfigError("field needs \"planes\" or \"matrix\"");
}

Bump parse_cutoff(const json& j) {
    check_keys(j, {"center", "radius", "order"}, "problem.cutoff");
    Bump b;
    b.center = parse_vector(j.at("center"), "problem.cutoff.center");
    b.radius = j.at("radius").get<Real>();
    b.order = j.value("order", 4);
    return b;
}

void parse_problem(const json& j, ConfigDocument& doc) {
    check_keys(j,
               {"d", "metric", "field", "vector_potential", "potential", "mu", "h",
                "smoothness", "cutoff"},
               "problem");
    OperatorSpec& spec = doc.experiment.spec;
    spec.d = j.at("d").get<int>();
    spec.metric = j.contains("metric") ? parse_metric(j["metric"], spec.d)
                                       : Matrix(Matrix::Identity(spec.d, spec.d));
    if (j.contains("field")) spec.field = parse_field(j["field"], spec.d);
    else spec.field = Matrix::Zero(spec.d, spec.d);
    if (j.contains("vector_potential")) {
        for (const auto& comp : j["vector_potential"])
            spec.vector_potential.push_back(parse_polynomial(comp, "problem.vector_potential[]"));
    }
    if (j.contains("potential"))
        spec.potential = parse_polynomial(j["potential"], "problem.potential");
    spec.mu = j.value("mu", 1.0);
    spec.h = j.value("h", 0.1);
    if (j.contains("smoothness")) {
        check_keys(j["smoothness"], {"l", "sigma"}, "problem.smoothness");
        spec.smoothness.l = j["smoothness"].value("l", 2.0);
        spec.smoothness.sigma = j["smoothness"].value("sigma", 0.0);
    }
    if (j.contains("cutoff")) spec.cutoff = parse_cutoff(j["cutoff"]);
    doc.experiment.bound_base.l = spec.smoothness.l;
    doc.experiment.bound_base.sigma = spec.smoothness.sigma;
}

void parse_oracle(const json& j, ConfigDocument& doc) {
    check_keys(j,
               {"route", "grid", "bc", "separable", "points_per_h", "dense_cap"},
               "oracle");
    ExperimentConfig& ex = doc.experiment;
    const std::string route = j.value("route", std::string("separable"));
    if (route == "separable") ex.route = OracleRoute::separable;
    else if (route == "lattice") ex.route = OracleRoute::lattice;
    else if (route == "lattice_1d") ex.route = OracleRoute::lattice_1d;
    else throw ConfigError("oracle.route must be separable | lattice | lattice_1d");

    if (j.contains("grid")) {
        check_keys(j["grid"], {"shape", "lengths", "origin", "min_points_per_magnetic_length"},
                   "oracle.grid");
        const auto& g = j["grid"];
        for (const auto& n : g.at("shape")) ex.grid.shape.push_back(n.get<int>());
        ex.grid.lengths = parse_vector(g.at("lengths"), "oracle.grid.lengths");
        if (g.contains("origin")) ex.grid.origin = parse_vector(g["origin"], "oracle.grid.origin");
        ex.grid.min_points_per_magnetic_length =
            g.value("min_points_per_magnetic_length", 2.0);
    }
    if (j.contains("dense_cap")) ex.grid.dense_cap = j["dense_cap"].get<long>();
    if (j.contains("bc")) {
        auto parse_bc = [](const std::string& s) {
            if (s == "periodic") return BoundaryCondition::periodic;
            if (s == "dirichlet") return BoundaryCondition::dirichlet;
            throw ConfigError("bc must be periodic | dirichlet");
        };
        if (j["bc"].is_string()) {
            ex.bc.assign(ex.spec.d, parse_bc(j["bc"].get<std::string>()));
        } else {
            for (const auto& b : j["bc"]) ex.bc.push_back(parse_bc(b.get<std::string>()));
        }
    }
    if (j.contains("separable")) {
        check_keys(j["separable"], {"plane_lengths", "interval", "points_1d", "tau_max"},
                   "oracle.separable");
        const auto& s = j["separable"];
        ex.separable.plane_lengths =
            parse_vector(s.at("plane_lengths"), "oracle.separable.plane_lengths");
        if (s.contains("interval")) {
            ex.separable.interval_lo = s["interval"][0].get<Real>();
            ex.separable.interval_hi = s["interval"][1].get<Real>();
        }
        ex.separable.points_1d = s.value("points_1d", 1024);
        ex.separable.tau_max = s.value("tau_max", 1.0);
    }
    ex.points_per_h = j.value("points_per_h", 0);
}

void parse_sweep(const json& j, ConfigDocument& doc) {
    check_keys(j,
               {"mu_list", "mu_rule", "h_list", "tau", "with_correction", "bound",
                "bound_params", "correction"},
               "sweep");
    ExperimentConfig& ex = doc.experiment;
    ex.tau = j.value("tau", 0.0);

    std::vector<Real> h_list;
    for (const auto& h : j.at("h_list")) h_list.push_back(h.get<Real>());

    std::vector<Real> mu_list;
    if (j.contains("mu_list")) {
        for (const auto& m : j["mu_list"]) mu_list.push_back(m.get<Real>());
        if (mu_list.size() == 1) mu_list.assign(h_list.size(), mu_list[0]);
        if (mu_list.size() != h_list.size())
            throw ConfigError("mu_list must have length 1 or match h_list");
    } else if (j.contains("mu_rule")) {
        check_keys(j["mu_rule"], {"type", "coefficient", "exponent", "value"}, "sweep.mu_rule");
        const std::string type = j["mu_rule"].at("type").get<std::string>();
        for (const Real h : h_list) {
            if (type == "power_of_h") {
                const Real c = j["mu_rule"].value("coefficient", 1.0);
                const Real e = j["mu_rule"].at("exponent").get<Real>();
                mu_list.push_back(c * std::pow(h, e));
            } else if (type == "fixed_muh") {
                mu_list.push_back(j["mu_rule"].at("value").get<Real>() / h);
            } else {
                throw ConfigError("mu_rule.type must be power_of_h | fixed_muh");
            }
        }
    } else {
        mu_list.assign(h_list.size(), doc.experiment.spec.mu);
    }
    for (std::size_t i = 0; i < h_list.size(); ++i)
        doc.sweep_points.emplace_back(mu_list[i], h_list[i]);

    if (j.contains("bound")) ex.bound_id = j["bound"].get<std::string>();
    if (j.contains("bound_params")) {
        check_keys(j["bound_params"], {"r", "q", "l", "sigma", "bl", "bsigma", "kappa", "s", "C"},
                   "sweep.bound_params");
        const auto& b = j["bound_params"];
        ex.bound_base.r = b.value("r", ex.bound_base.r);
        ex.bound_base.q = b.value("q", ex.bound_base.q);
        ex.bound_base.l = b.value("l", ex.bound_base.l);
        ex.bound_base.sigma = b.value("sigma", ex.bound_base.sigma);
        ex.bound_base.bl = b.value("bl", ex.bound_base.bl);
        ex.bound_base.bsigma = b.value("bsigma", ex.bound_base.bsigma);
        ex.bound_base.kappa = b.value("kappa", ex.bound_base.kappa);
        ex.bound_base.s = b.value("s", ex.bound_base.s);
        ex.bound_base.C = b.value("C", ex.bound_base.C);
    }
    ex.correction.enabled = j.value("with_correction", false);
    if (j.contains("correction")) {
        check_keys(j["correction"], {"variant", "omega", "n_max"}, "sweep.correction");
        const auto& c = j["correction"];
        const std::string variant = c.value("variant", std::string("r2"));
        if (variant == "r2") ex.correction.variant = ResonantVariant::r2;
        else if (variant == "r3") ex.correction.variant = ResonantVariant::r3;
        else throw ConfigError("correction.variant must be r2 | r3");
        ex.correction.omega = c.value("omega", 1.0);
        ex.correction.n_max = c.value("n_max", 14);
    }
}

void parse_constants(const json& j, ConfigDocument& doc) {
    check_keys(j, {"C", "eps"}, "constants");
    if (j.contains("C")) {
        check_keys(j["C"], {"bound", "rho", "L0"}, "constants.C");
        doc.experiment.bound_base.C = j["C"].value("bound", 1.0);
        doc.experiment.correction.rho_constant = j["C"].value("rho", 1.0);
        doc.experiment.correction.L0_constant = j["C"].value("L0", 4.0);
    }
    if (j.contains("eps")) {
        check_keys(j["eps"], {"eps0", "eps_group"}, "constants.eps");
        doc.eps0 = j["eps"].value("eps0", 1e-8);
        doc.eps_group = j["eps"].value("eps_group", 1e-6);
    }
}

void parse_mh(const json& j, ConfigDocument& doc) {
    check_keys(j, {"type", "eps", "use_landau", "lo", "hi", "shape", "f_components"}, "mh");
    doc.has_mh = true;
    doc.mh.type = j.value("type", std::string("constant_field"));
    doc.mh.eps = j.value("eps", 0.1);
    doc.mh.use_landau = j.value("use_landau", false);
    doc.mh.lo = parse_vector(j.at("lo"), "mh.lo");
    doc.mh.hi = parse_vector(j.at("hi"), "mh.hi");
    for (const auto& n : j.at("shape")) doc.mh.shape.push_back(n.get<int>());
    if (j.contains("f_components"))
        for (const auto& f : j["f_components"])
            doc.mh.f_components.push_back(parse_polynomial(f, "mh.f_components[]"));
}

}  // namespace

ConfigDocument parse_config_text(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    check_keys(j, {"problem", "oracle", "sweep", "constants", "output", "mh"}, "top level");

    ConfigDocument doc;
    if (!j.contains("problem")) throw ConfigError("missing required section 'problem'");
    parse_problem(j["problem"], doc);
    if (j.contains("oracle")) parse_oracle(j["oracle"], doc);
    if (j.contains("sweep")) parse_sweep(j["sweep"], doc);
    if (j.contains("constants")) parse_constants(j["constants"], doc);
    if (j.contains("mh")) parse_mh(j["mh"], doc);
    if (j.contains("output")) {
        check_keys(j["output"], {"csv_path", "json_path"}, "output");
        doc.csv_path = j["output"].value("csv_path", std::string());
        doc.json_path = j["output"].value("json_path", std::string());
    }

    // defaults that depend on the problem
    ExperimentConfig& ex = doc.experiment;
    if (ex.bc.empty()) ex.bc.assign(ex.spec.d, BoundaryCondition::dirichlet);
    if (ex.separable.plane_lengths.size() == 0 && ex.spec.d >= 3 && ex.spec.d % 2 == 1)
        ex.separable.plane_lengths = Vector::Constant((ex.spec.d - 1) / 2, 4.0);
    ex.spec.validate();
    return doc;
}

ConfigDocument parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string resolved_config_json(const ConfigDocument& doc) {
    std::ostringstream out;
    auto num = [&](Real v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    const OperatorSpec& spec = doc.experiment.spec;
    out << "{\n  \"problem\": {\"d\": " << spec.d << ", \"mu\": " << num(spec.mu)
        << ", \"h\": " << num(spec.h) << ", \"smoothness\": {\"l\": " << num(spec.smoothness.l)
        << ", \"sigma\": " << num(spec.smoothness.sigma) << "}, \"cutoff_radius\": "
        << num(spec.cutoff.radius) << "},\n";
    const char* route = doc.experiment.route == OracleRoute::separable       ? "separable"
                        : doc.experiment.route == OracleRoute::lattice_1d    ? "lattice_1d"
                                                                             : "lattice";
    out << "  \"oracle\": {\"route\": \"" << route
        << "\", \"points_per_h\": " << doc.experiment.points_per_h << "},\n";
    out << "  \"sweep\": {\"tau\": " << num(doc.experiment.tau) << ", \"bound\": \""
        << doc.experiment.bound_id << "\", \"with_correction\": "
        << (doc.experiment.correction.enabled ? "true" : "false") << ", \"points\": [";
    for (std::size_t i = 0; i < doc.sweep_points.size(); ++i)
        out << (i ? ", " : "") << "[" << num(doc.sweep_points[i].first) << ", "
            << num(doc.sweep_points[i].second) << "]";
    out << "]},\n";
    out << "  \"constants\": {\"C\": {\"bound\": " << num(doc.experiment.bound_base.C)
        << ", \"rho\": " << num(doc.experiment.correction.rho_constant)
        << ", \"L0\": " << num(doc.experiment.correction.L0_constant)
        << "}, \"eps\": {\"eps0\": " << num(doc.eps0)
        << ", \"eps_group\": " << num(doc.eps_group) << "}},\n";
    out << "  \"output\": {\"csv_path\": \"" << doc.csv_path << "\", \"json_path\": \""
        << doc.json_path << "\"}\n}\n";
    return out.str();
}

}  // namespace magweyl
