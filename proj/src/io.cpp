#include "qlspec/io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "qlspec/error.hpp"

namespace qlspec {

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
    return buf;
}

void write_spectrum_table(std::ostream& os, const Spectrum1D& s, std::string_view manifest_hash) {
    os << "# manifest: " << manifest_hash << '\n';
    os << "# mode: " << s.meta.mode << '\n';
    os << "# delay: " << format_number(s.meta.delay) << '\n';
    os << "# pump_frequency: " << format_number(s.meta.pump_frequency) << '\n';
    os << "# entanglement_time: " << format_number(s.meta.entanglement_time) << '\n';
    os << "# sc_available: " << (s.meta.sc_available ? "true" : "false") << '\n';
    for (const auto& note : s.meta.notes) os << "# note: " << note << '\n';
    os << "# columns: omega total";
    for (auto name : kComponentNames) os << ' ' << name;
    os << '\n';
    for (std::size_t i = 0; i < s.size(); ++i) {
        os << format_number(s.omega[i]) << ' ' << format_number(s.total[i]);
        for (const auto& c : s.components) os << ' ' << format_number(c[i]);
        os << '\n';
    }
}

void write_sweep_table(std::ostream& os, const std::vector<double>& pumps, const std::vector<double>& omega,
                       const Eigen::MatrixXd& values, double delay, std::string_view manifest_hash) {
    os << "# manifest: " << manifest_hash << '\n';
    os << "# delay: " << format_number(delay) << '\n';
    os << "# omega:";
    for (double w : omega) os << ' ' << format_number(w);
    os << '\n';
    os << "# columns: pump_frequency dS(omega[0..." << omega.size() - 1 << "])\n";
    for (std::size_t p = 0; p < pumps.size(); ++p) {
        os << format_number(pumps[p]);
        for (Eigen::Index i = 0; i < values.cols(); ++i)
            os << ' ' << format_number(values(static_cast<Eigen::Index>(p), i));
        os << '\n';
    }
}

std::string manifest_hash(std::string_view config_text, std::string_view command,
                          const std::vector<std::string>& arguments) {
    std::string bytes(config_text);
    bytes.push_back('\0');
    bytes.append(command);
    for (const auto& a : arguments) {
        bytes.push_back('\0');
        bytes.append(a);
    }
    return fnv1a_hex(bytes);
}

std::string manifest_json(const RunManifest& m) {
    nlohmann::ordered_json j;
    j["tool_version"] = m.tool_version;
    j["command"] = m.command;
    j["arguments"] = m.arguments;
    j["config_path"] = m.config_path;
    j["config_hash"] = m.config_hash;
    j["hash"] = m.hash;
    j["grid"] = m.grid;
    j["outputs"] = m.outputs;
    j["wall_time_seconds"] = m.wall_time_seconds;
    j["timestamp"] = m.timestamp;
    return j.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create directory " + path.parent_path().string());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    out << content;
    out.close();
    if (!out) throw Error(ErrorCode::IoFailure, "failed writing " + path.string());
}

}  // namespace qlspec
