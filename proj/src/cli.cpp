#include "qlspec/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <sstream>

#include "qlspec/config.hpp"
#include "qlspec/io.hpp"
#include "qlspec/signal_engine.hpp"
#include "qlspec/twod_spectra.hpp"

namespace qlspec::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string join_numbers(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_number(v[i]);
    return s;
}

SignalMode parse_mode(const std::string& m) {
    if (m == "short-te") return SignalMode::ShortTe;
    if (m == "finite-te") return SignalMode::FiniteTeRephasing;
    return SignalMode::Oracle;
}

// Feature conflicts are reported before any computation starts.
void check_mode(SignalMode mode, const ValidatedBundle& bundle) {
    if (mode == SignalMode::FiniteTeRephasing && bundle.model().has_coherence_transfer())
        throw Error(ErrorCode::UnsupportedModel, "--mode finite-te cannot be combined with model.coherence_transfer");
    if (mode == SignalMode::Oracle && !(bundle.field().entanglement_time > 0.0))
        throw Error(ErrorCode::InvalidField, "--mode oracle needs field.entanglement_time > 0");
}

std::vector<double> run_grid(const RunConfig& cfg, std::string& description) {
    if (cfg.grid) {
        description = format_number(cfg.grid->min) + ":" + format_number(cfg.grid->max) + ":" +
                      std::to_string(cfg.grid->points);
        return cfg.grid->values();
    }
    description = "default";
    return default_grid(cfg.bundle);
}

std::vector<double> parse_range(const std::string& spec) {
    std::vector<double> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) {
        try {
            std::size_t used = 0;
            parts.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidGrid, "--wp expects start:stop:step, got '" + spec + "'");
        }
    }
    if (parts.size() != 3) throw Error(ErrorCode::InvalidGrid, "--wp expects start:stop:step, got '" + spec + "'");
    const double start = parts[0], stop = parts[1], step = parts[2];
    if (!(step > 0.0)) throw Error(ErrorCode::InvalidGrid, "--wp step must be > 0");
    if (stop < start) throw Error(ErrorCode::InvalidGrid, "--wp range is empty");
    std::vector<double> out;
    for (std::size_t k = 0;; ++k) {
        const double w = start + static_cast<double>(k) * step;
        if (w > stop + 1e-9 * step) break;
        out.push_back(w);
    }
    return out;
}

class Timer {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

RunManifest make_manifest(const RunConfig& cfg, const std::string& config_path, const std::string& command,
                          std::vector<std::string> canonical_args, const std::string& grid) {
    RunManifest m;
    m.tool_version = kVersion;
    m.command = command;
    m.arguments = std::move(canonical_args);
    m.config_path = config_path;
    m.config_hash = fnv1a_hex(cfg.text);
    m.hash = manifest_hash(cfg.text, command, m.arguments);
    m.grid = grid;
    return m;
}

void finish_manifest(RunManifest& m, const fs::path& path, const Timer& timer) {
    m.wall_time_seconds = timer.seconds();
    m.timestamp = utc_timestamp();
    write_text_file(path, manifest_json(m));
}

void report_warnings(const ValidatedBundle& b, std::ostream& err) {
    for (const auto& w : b.warnings()) err << "warning: " << w << '\n';
}

struct SimulateArgs {
    std::string config;
    std::vector<double> delays;
    std::string mode{"short-te"};
    std::string out;
    std::optional<double> entanglement_time;
};

int simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
    const Timer timer;
    RunConfig cfg = load_config(a.config);
    if (a.entanglement_time) {
        FieldConfig f = cfg.bundle.field();
        f.entanglement_time = *a.entanglement_time;
        cfg.bundle = cfg.bundle.with_field(f);
    }
    report_warnings(cfg.bundle, err);
    if (a.delays.empty()) throw Error(ErrorCode::InvalidGrid, "--dt needs at least one delay");
    const SignalMode mode = parse_mode(a.mode);
    check_mode(mode, cfg.bundle);
    std::string grid_desc;
    const auto grid = run_grid(cfg, grid_desc);

    std::vector<std::string> canon{"dt=" + join_numbers(a.delays), "mode=" + a.mode};
    if (a.entanglement_time) canon.push_back("te=" + format_number(*a.entanglement_time));
    RunManifest manifest = make_manifest(cfg, a.config, "simulate", canon, grid_desc);

    std::vector<std::pair<fs::path, std::string>> tables;
    for (double dt : a.delays) {
        const Spectrum1D s = compute_signal(mode, grid, dt, cfg.bundle);
        std::ostringstream os;
        write_spectrum_table(os, s, manifest.hash);
        tables.emplace_back(fs::path(a.out) / ("spectrum_dt" + format_number(dt) + ".tsv"), os.str());
    }
    for (const auto& [path, text] : tables) {
        write_text_file(path, text);
        manifest.outputs.push_back(path.string());
        out << "wrote " << path.string() << '\n';
    }
    finish_manifest(manifest, fs::path(a.out) / "manifest.json", timer);
    return kSuccess;
}

struct SweepArgs {
    std::string config;
    std::string range;
    double delay{0.0};
    std::string out;
};

int sweep_pump(const SweepArgs& a, std::ostream& out, std::ostream& err) {
    const Timer timer;
    const RunConfig cfg = load_config(a.config);
    report_warnings(cfg.bundle, err);
    const auto pumps = parse_range(a.range);
    std::string grid_desc;
    const auto grid = run_grid(cfg, grid_desc);
    RunManifest manifest =
        make_manifest(cfg, a.config, "sweep-pump", {"wp=" + a.range, "dt=" + format_number(a.delay)}, grid_desc);
    const Eigen::MatrixXd values = pump_sweep(cfg.bundle, pumps, a.delay, grid);
    std::ostringstream os;
    write_sweep_table(os, pumps, grid, values, a.delay, manifest.hash);
    write_text_file(a.out, os.str());
    manifest.outputs.push_back(a.out);
    out << "wrote " << a.out << '\n';
    finish_manifest(manifest, a.out + ".manifest.json", timer);
    return kSuccess;
}

struct CorrespondenceArgs {
    std::string config;
    std::vector<double> delays;
    std::string out;
    std::optional<double> pump_2d;
    bool flip_sign{false};
    double tolerance{1e-8};
};

int check_correspondence(const CorrespondenceArgs& a, std::ostream& out, std::ostream& err) {
    const Timer timer;
    const RunConfig cfg = load_config(a.config);
    report_warnings(cfg.bundle, err);
    if (a.delays.empty()) throw Error(ErrorCode::InvalidGrid, "--dt needs at least one delay");
    std::string grid_desc;
    const auto grid = run_grid(cfg, grid_desc);
    std::vector<std::string> canon{"dt=" + join_numbers(a.delays), "tolerance=" + format_number(a.tolerance)};
    if (a.pump_2d) canon.push_back("wp-2d=" + format_number(*a.pump_2d));
    if (a.flip_sign) canon.push_back("flip-2d-sign");
    RunManifest manifest = make_manifest(cfg, a.config, "check-correspondence", canon, grid_desc);

    CorrespondenceOptions opt;
    opt.tolerance = a.tolerance;
    opt.pump_override = a.pump_2d;
    opt.negate_2d = a.flip_sign;
    const CorrespondenceReport report = correspondence_check(cfg.bundle, a.delays, grid, opt);

    nlohmann::ordered_json j;
    j["manifest"] = manifest.hash;
    j["pump_frequency_2d"] = report.pump_frequency;
    j["tolerance"] = report.tolerance;
    j["passed"] = report.passed();
    j["entries"] = nlohmann::ordered_json::array();
    for (const auto& e : report.entries) {
        j["entries"].push_back({{"delay", e.delay},
                                {"max_deviation", e.max_deviation},
                                {"at_omega", e.at_omega},
                                {"passed", e.passed}});
        out << "delay " << format_number(e.delay) << ": max deviation " << format_number(e.max_deviation)
            << " at omega " << format_number(e.at_omega) << (e.passed ? " pass" : " FAIL") << '\n';
    }
    write_text_file(a.out, j.dump(2) + "\n");
    manifest.outputs.push_back(a.out);
    finish_manifest(manifest, a.out + ".manifest.json", timer);
    return report.passed() ? kSuccess : kCheckFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Entangled-photon transmission spectra and their 2D correspondence", "qlspec"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    // CLI11 would read "--dt ''" as a single zero delay.
    const CLI::Validator non_empty(
        [](std::string& v) { return v.empty() ? std::string("empty delay") : std::string(); }, "DELAY");

    SimulateArgs sim;
    auto* cmd_sim = app.add_subcommand("simulate", "Compute S(omega; dt) tables, one per delay");
    cmd_sim->add_option("config", sim.config, "JSON config")->required();
    cmd_sim->add_option("--dt", sim.delays, "Comma-separated delays")->required()->delimiter(',')->check(non_empty);
    cmd_sim->add_option("--mode", sim.mode, "Signal evaluation")
        ->check(CLI::IsMember({"short-te", "finite-te", "oracle"}))
        ->capture_default_str();
    cmd_sim->add_option("--out", sim.out, "Output directory")->required();
    cmd_sim->add_option("--te", sim.entanglement_time, "Override field.entanglement_time");

    SweepArgs sweep;
    auto* cmd_sweep = app.add_subcommand("sweep-pump", "Difference spectra over a range of pump frequencies");
    cmd_sweep->add_option("config", sweep.config, "JSON config")->required();
    cmd_sweep->add_option("--wp", sweep.range, "start:stop:step")->required();
    cmd_sweep->add_option("--dt", sweep.delay, "Delay")->required();
    cmd_sweep->add_option("--out", sweep.out, "Output table")->required();

    CorrespondenceArgs corr;
    auto* cmd_corr = app.add_subcommand("check-correspondence", "Compare dS with the 2D anti-diagonal");
    cmd_corr->add_option("config", corr.config, "JSON config")->required();
    cmd_corr->add_option("--dt", corr.delays, "Comma-separated delays")->required()->delimiter(',')->check(non_empty);
    cmd_corr->add_option("--out", corr.out, "Report file (JSON)")->required();
    cmd_corr->add_option("--wp-2d", corr.pump_2d, "Pump frequency for the 2D side (negative control)");
    cmd_corr->add_flag("--flip-2d-sign", corr.flip_sign, "Negate the 2D side (negative control)");
    cmd_corr->add_option("--tolerance", corr.tolerance, "Pass threshold")->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kSuccess : kValidationFailure;
    }

    try {
        if (cmd_sim->parsed()) return simulate(sim, out, err);
        if (cmd_sweep->parsed()) return sweep_pump(sweep, out, err);
        return check_correspondence(corr, out, err);
    } catch (const ValidationError& e) {
        err << "error: invalid configuration\n";
        for (const auto& issue : e.issues()) err << "  " << to_string(issue.code) << ": " << issue.message << '\n';
        return kValidationFailure;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.code() == ErrorCode::IoFailure ? kIoFailure : kValidationFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kValidationFailure;
    }
}

}  // namespace qlspec::cli
