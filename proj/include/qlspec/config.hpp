// config.hpp: JSON run configuration.
//
// Layout:
//   system: single_energies, double_energies?, dipoles_ge, dipoles_ef?  ([double][single]), labels?
//   field:  pump_frequency, signal_center, idler_center, entanglement_time?, delay?, conversion_scale?
//   model:  rates? ([to][from]), ground_recovery? (scalar | list),
//           dephasing: {ge: scalar | list, ef?: scalar | matrix},
//           intra_coherences? [{pair: [a, b], frequency?, decay}],
//           coherence_transfer? [{from: [a, b], to: [c, d], rate}]
//   grid?:  {min, max, points}
// Malformed or missing entries raise ConfigError naming the key path.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qlspec/core_model.hpp"

namespace qlspec {

struct GridSpec {
    double min{0.0};
    double max{0.0};
    std::size_t points{0};
    std::vector<double> values() const;
};

struct RawConfig {
    ExcitonSystem system;
    FieldConfig field;
    EvolutionModel model;
    std::optional<GridSpec> grid;
};

RawConfig parse_config(const std::string& json_text);

struct RunConfig {
    ValidatedBundle bundle;
    std::optional<GridSpec> grid;
    std::string text;  // raw bytes, for hashing
};

// Reads and validates a config file. Unreadable files raise IoFailure.
RunConfig load_config(const std::filesystem::path& path);

}  // namespace qlspec
