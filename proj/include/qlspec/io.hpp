#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "qlspec/spectrum.hpp"

namespace qlspec {

// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

// Round-trip formatting (%.17g).
std::string format_number(double v);

// Whitespace-separated table with a commented header:
//   # manifest: <hash>
//   # columns: omega total GSB SE ESA SEcoh ESAcoh Sc
void write_spectrum_table(std::ostream& os, const Spectrum1D& s, std::string_view manifest_hash);

// Rows are pump frequencies; the first column holds the pump, the rest dS at each omega.
void write_sweep_table(std::ostream& os, const std::vector<double>& pumps, const std::vector<double>& omega,
                       const Eigen::MatrixXd& values, double delay, std::string_view manifest_hash);

struct RunManifest {
    std::string tool_version;
    std::string command;
    std::vector<std::string> arguments;
    std::string config_path;
    std::string config_hash;
    std::string hash;  // config bytes + command + arguments
    std::string grid;
    std::vector<std::string> outputs;
    double wall_time_seconds{0.0};
    std::string timestamp;  // UTC, ISO 8601
};

std::string manifest_hash(std::string_view config_text, std::string_view command,
                          const std::vector<std::string>& arguments);

std::string manifest_json(const RunManifest& m);

// Writes content to path, creating parent directories. Throws IoFailure.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace qlspec
