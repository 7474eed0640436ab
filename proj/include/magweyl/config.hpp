#pragma once

#include "magweyl/asymptotics_lab.hpp"
#include "magweyl/microhyperbolicity.hpp"

#include <string>

namespace magweyl {

/// Fully resolved run description parsed from the JSON config document.
/// Unknown keys anywhere in the document are rejected by name.
struct ConfigDocument {
    ExperimentConfig experiment;
    std::vector<std::pair<Real, Real>> sweep_points;
    int jobs = 1;
    std::string csv_path, json_path;

    Real eps0 = 1e-8;        // rank decision floor
    Real eps_group = 1e-6;   // resonance grouping tolerance

    struct MhSection {
        std::string type = "constant_field";  // | constant_multiplicity | ultrastrong
        Real eps = 0.1;
        bool use_landau = false;
        Vector lo, hi;
        std::vector<int> shape;
        std::vector<Polynomial> f_components;  // constant_multiplicity inputs
    } mh;
    bool has_mh = false;
};

ConfigDocument parse_config_text(const std::string& json_text);
ConfigDocument parse_config_file(const std::string& path);

/// Resolved configuration with defaults filled, for --dry-run.
std::string resolved_config_json(const ConfigDocument& doc);

}  // namespace magweyl
