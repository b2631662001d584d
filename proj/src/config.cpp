#include "qlspec/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qlspec/spectrum.hpp"

namespace qlspec {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw Error(ErrorCode::ConfigError, "`" + path + "` " + what);
}

const json& require(const json& obj, const std::string& parent, const char* key) {
    const std::string path = parent.empty() ? std::string(key) : parent + "." + key;
    if (!obj.contains(key)) fail(path, "is missing");
    return obj.at(key);
}

double number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "must be a number");
    return v.get<double>();
}

std::size_t index(const json& v, const std::string& path) {
    if (!v.is_number_integer() || v.get<long long>() < 0) fail(path, "must be a non-negative integer");
    return v.get<std::size_t>();
}

std::vector<double> number_list(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "must be a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

// A scalar is broadcast to n entries.
std::vector<double> scalar_or_list(const json& v, const std::string& path, std::size_t n) {
    if (v.is_number()) return std::vector<double>(n, v.get<double>());
    return number_list(v, path);
}

Eigen::MatrixXd matrix(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "must be a list of rows");
    if (v.empty()) return {};
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < v.size(); ++i) rows.push_back(number_list(v[i], path + "[" + std::to_string(i) + "]"));
    const std::size_t cols = rows.front().size();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols) fail(path, "rows must all have the same length");
        for (std::size_t j = 0; j < cols; ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return out;
}

std::pair<std::size_t, std::size_t> pair_of(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2) fail(path, "must be a pair [a, b]");
    return {index(v[0], path + "[0]"), index(v[1], path + "[1]")};
}

void check_object(const json& v, const std::string& path) {
    if (!v.is_object()) fail(path, "must be an object");
}

ExcitonSystem parse_system(const json& s) {
    check_object(s, "system");
    ExcitonSystem sys;
    sys.single_energies = number_list(require(s, "system", "single_energies"), "system.single_energies");
    if (s.contains("double_energies"))
        sys.double_energies = number_list(s.at("double_energies"), "system.double_energies");
    sys.dipoles_ge = number_list(require(s, "system", "dipoles_ge"), "system.dipoles_ge");
    if (!sys.double_energies.empty() || s.contains("dipoles_ef"))
        sys.dipoles_ef = matrix(require(s, "system", "dipoles_ef"), "system.dipoles_ef");
    if (s.contains("labels")) {
        const auto& l = s.at("labels");
        if (!l.is_array()) fail("system.labels", "must be a list of strings");
        for (std::size_t i = 0; i < l.size(); ++i) {
            if (!l[i].is_string()) fail("system.labels[" + std::to_string(i) + "]", "must be a string");
            sys.labels.push_back(l[i].get<std::string>());
        }
    }
    return sys;
}

FieldConfig parse_field(const json& f) {
    check_object(f, "field");
    FieldConfig out;
    out.pump_frequency = number(require(f, "field", "pump_frequency"), "field.pump_frequency");
    out.signal_center = number(require(f, "field", "signal_center"), "field.signal_center");
    out.idler_center = number(require(f, "field", "idler_center"), "field.idler_center");
    if (f.contains("entanglement_time"))
        out.entanglement_time = number(f.at("entanglement_time"), "field.entanglement_time");
    if (f.contains("delay")) out.delay = number(f.at("delay"), "field.delay");
    if (f.contains("conversion_scale")) out.conversion_scale = number(f.at("conversion_scale"), "field.conversion_scale");
    return out;
}

EvolutionModel parse_model(const json& m, const ExcitonSystem& sys) {
    check_object(m, "model");
    const std::size_t n = sys.n_single();
    EvolutionModel out;
    if (m.contains("rates")) out.transfer_rates = matrix(m.at("rates"), "model.rates");
    out.ground_recovery = m.contains("ground_recovery")
                              ? scalar_or_list(m.at("ground_recovery"), "model.ground_recovery", n)
                              : std::vector<double>(n, 0.0);
    const json& deph = require(m, "model", "dephasing");
    check_object(deph, "model.dephasing");
    out.dephasing_ge = scalar_or_list(require(deph, "model.dephasing", "ge"), "model.dephasing.ge", n);
    if (!sys.double_energies.empty()) {
        const json& ef = require(deph, "model.dephasing", "ef");
        if (ef.is_number())
            out.dephasing_ef = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(sys.n_double()),
                                                         static_cast<Eigen::Index>(n), ef.get<double>());
        else
            out.dephasing_ef = matrix(ef, "model.dephasing.ef");
    }
    if (m.contains("intra_coherences")) {
        const auto& list = m.at("intra_coherences");
        if (!list.is_array()) fail("model.intra_coherences", "must be a list");
        for (std::size_t k = 0; k < list.size(); ++k) {
            const std::string p = "model.intra_coherences[" + std::to_string(k) + "]";
            check_object(list[k], p);
            IntraCoherence c;
            std::tie(c.a, c.b) = pair_of(require(list[k], p, "pair"), p + ".pair");
            if (list[k].contains("frequency")) c.frequency = number(list[k].at("frequency"), p + ".frequency");
            c.decay = number(require(list[k], p, "decay"), p + ".decay");
            out.intra_coherences.push_back(c);
        }
    }
    if (m.contains("coherence_transfer")) {
        const auto& list = m.at("coherence_transfer");
        if (!list.is_array()) fail("model.coherence_transfer", "must be a list");
        for (std::size_t k = 0; k < list.size(); ++k) {
            const std::string p = "model.coherence_transfer[" + std::to_string(k) + "]";
            check_object(list[k], p);
            CoherenceTransfer t;
            std::tie(t.from_a, t.from_b) = pair_of(require(list[k], p, "from"), p + ".from");
            std::tie(t.to_a, t.to_b) = pair_of(require(list[k], p, "to"), p + ".to");
            t.rate = number(require(list[k], p, "rate"), p + ".rate");
            out.coherence_transfer.push_back(t);
        }
    }
    return out;
}

}  // namespace

std::vector<double> GridSpec::values() const { return linspace(min, max, points); }

RawConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ConfigError, std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) fail("(config)", "must be an object");
    RawConfig out;
    out.system = parse_system(require(root, "", "system"));
    out.field = parse_field(require(root, "", "field"));
    out.model = parse_model(require(root, "", "model"), out.system);
    if (root.contains("grid")) {
        const auto& g = root.at("grid");
        check_object(g, "grid");
        GridSpec spec;
        spec.min = number(require(g, "grid", "min"), "grid.min");
        spec.max = number(require(g, "grid", "max"), "grid.max");
        spec.points = index(require(g, "grid", "points"), "grid.points");
        if (spec.points < 2 || !(spec.max > spec.min)) fail("grid", "needs max > min and at least 2 points");
        out.grid = spec;
    }
    return out;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot read config " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    RawConfig raw = parse_config(text);
    return RunConfig{validate_system(raw.system, raw.field, raw.model), raw.grid, std::move(text)};
}

}  // namespace qlspec
