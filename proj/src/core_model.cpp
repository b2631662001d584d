#include "qlspec/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qlspec {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidEnergyOrdering: return "InvalidEnergyOrdering";
        case ErrorCode::DipoleShapeMismatch: return "DipoleShapeMismatch";
        case ErrorCode::PumpEnergyMismatch: return "PumpEnergyMismatch";
        case ErrorCode::NegativeRate: return "NegativeRate";
        case ErrorCode::InvalidField: return "InvalidField";
        case ErrorCode::NegativeTime: return "NegativeTime";
        case ErrorCode::UnknownCoherence: return "UnknownCoherence";
        case ErrorCode::ZeroDephasing: return "ZeroDephasing";
        case ErrorCode::DivergentKernel: return "DivergentKernel";
        case ErrorCode::DeltaNotSamplable: return "DeltaNotSamplable";
        case ErrorCode::UnknownKind: return "UnknownKind";
        case ErrorCode::UnsupportedModel: return "UnsupportedModel";
        case ErrorCode::TruncationTooShort: return "TruncationTooShort";
        case ErrorCode::LineOutsideGrid: return "LineOutsideGrid";
        case ErrorCode::InvalidGrid: return "InvalidGrid";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoFailure: return "IoFailure";
    }
    return "Unknown";
}

Eigen::MatrixXd EvolutionModel::population_generator() const {
    const auto n = static_cast<Eigen::Index>(ground_recovery.size());
    Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        double out = ground_recovery[static_cast<std::size_t>(a)];
        for (Eigen::Index b = 0; b < n; ++b) {
            if (b == a || transfer_rates.size() == 0) continue;
            gen(b, a) = transfer_rates(b, a);
            out += transfer_rates(b, a);
        }
        gen(a, a) = -out;
    }
    return gen;
}

namespace {

std::string join_message(const std::vector<ValidationIssue>& issues) {
    std::ostringstream os;
    os << issues.size() << " validation issue(s)";
    for (const auto& i : issues) os << "; " << to_string(i.code) << ": " << i.message;
    return os.str();
}

class IssueList {
public:
    void add(ErrorCode code, std::string msg) { issues_.push_back({code, std::move(msg)}); }
    std::vector<ValidationIssue> take() { return std::move(issues_); }

private:
    std::vector<ValidationIssue> issues_;
};

bool finite(double x) { return std::isfinite(x); }

void check_system(const ExcitonSystem& s, IssueList& out) {
    const std::size_t n = s.n_single();
    if (n == 0) out.add(ErrorCode::InvalidEnergyOrdering, "system.single_energies is empty");
    for (std::size_t a = 0; a < n; ++a) {
        if (!finite(s.single_energies[a]) || s.single_energies[a] <= 0.0) {
            out.add(ErrorCode::InvalidEnergyOrdering,
                    "system.single_energies[" + std::to_string(a) + "] must be > 0");
        }
    }
    const double top = n ? *std::max_element(s.single_energies.begin(), s.single_energies.end()) : 0.0;
    for (std::size_t g = 0; g < s.n_double(); ++g) {
        if (!finite(s.double_energies[g]) || s.double_energies[g] <= top) {
            out.add(ErrorCode::InvalidEnergyOrdering,
                    "system.double_energies[" + std::to_string(g) + "] must exceed every single energy");
        }
    }
    if (s.dipoles_ge.size() != n) {
        out.add(ErrorCode::DipoleShapeMismatch, "system.dipoles_ge has " + std::to_string(s.dipoles_ge.size()) +
                                                    " entries, expected " + std::to_string(n));
    }
    const bool ef_empty = s.dipoles_ef.size() == 0;
    if (!(ef_empty && s.n_double() == 0) &&
        (static_cast<std::size_t>(s.dipoles_ef.rows()) != s.n_double() ||
         static_cast<std::size_t>(s.dipoles_ef.cols()) != n)) {
        out.add(ErrorCode::DipoleShapeMismatch,
                "system.dipoles_ef is " + std::to_string(s.dipoles_ef.rows()) + "x" +
                    std::to_string(s.dipoles_ef.cols()) + ", expected " + std::to_string(s.n_double()) + "x" +
                    std::to_string(n));
    }
    if (!s.labels.empty() && s.labels.size() != 1 + n + s.n_double()) {
        out.add(ErrorCode::DipoleShapeMismatch, "system.labels must name ground, single and double states");
    }
}

void check_field(const FieldConfig& f, IssueList& out) {
    const double sum = f.signal_center + f.idler_center;
    if (!finite(sum) || !finite(f.pump_frequency) ||
        std::abs(sum - f.pump_frequency) > 1e-12 * std::max(1.0, std::abs(f.pump_frequency))) {
        std::ostringstream os;
        os.precision(17);
        os << "field.signal_center + field.idler_center = " << sum << " != field.pump_frequency = "
           << f.pump_frequency;
        out.add(ErrorCode::PumpEnergyMismatch, os.str());
    }
    if (!finite(f.entanglement_time) || f.entanglement_time < 0.0)
        out.add(ErrorCode::InvalidField, "field.entanglement_time must be >= 0");
    if (!finite(f.delay) || f.delay < 0.0) out.add(ErrorCode::InvalidField, "field.delay must be >= 0");
    if (!finite(f.conversion_scale)) out.add(ErrorCode::InvalidField, "field.conversion_scale must be finite");
}

void check_rate(double r, const std::string& where, IssueList& out) {
    if (!finite(r) || r < 0.0) out.add(ErrorCode::NegativeRate, where + " must be >= 0");
}

void check_dephasing(double g, const std::string& where, IssueList& out) {
    if (!finite(g) || g < 0.0)
        out.add(ErrorCode::NegativeRate, where + " must be > 0");
    else if (g == 0.0)
        out.add(ErrorCode::ZeroDephasing, where + " must be > 0");
}

void check_model(const ExcitonSystem& s, const EvolutionModel& m, IssueList& out) {
    const std::size_t n = s.n_single();
    const auto ni = static_cast<Eigen::Index>(n);
    if (m.transfer_rates.size() != 0 && (m.transfer_rates.rows() != ni || m.transfer_rates.cols() != ni)) {
        out.add(ErrorCode::DipoleShapeMismatch, "model.rates must be " + std::to_string(n) + "x" + std::to_string(n));
    } else {
        for (Eigen::Index b = 0; b < m.transfer_rates.rows(); ++b)
            for (Eigen::Index a = 0; a < m.transfer_rates.cols(); ++a)
                if (a != b)
                    check_rate(m.transfer_rates(b, a),
                               "model.rates[" + std::to_string(b) + "][" + std::to_string(a) + "]", out);
    }
    if (m.ground_recovery.size() != n) {
        out.add(ErrorCode::DipoleShapeMismatch, "model.ground_recovery must have " + std::to_string(n) + " entries");
    } else {
        for (std::size_t a = 0; a < n; ++a)
            check_rate(m.ground_recovery[a], "model.ground_recovery[" + std::to_string(a) + "]", out);
    }
    if (m.dephasing_ge.size() != n) {
        out.add(ErrorCode::DipoleShapeMismatch, "model.dephasing.ge must have " + std::to_string(n) + " entries");
    } else {
        for (std::size_t a = 0; a < n; ++a)
            check_dephasing(m.dephasing_ge[a], "model.dephasing.ge[" + std::to_string(a) + "]", out);
    }
    if (s.n_double() > 0) {
        if (static_cast<std::size_t>(m.dephasing_ef.rows()) != s.n_double() || m.dephasing_ef.cols() != ni) {
            out.add(ErrorCode::DipoleShapeMismatch, "model.dephasing.ef must be " + std::to_string(s.n_double()) +
                                                        "x" + std::to_string(n));
        } else {
            for (Eigen::Index g = 0; g < m.dephasing_ef.rows(); ++g)
                for (Eigen::Index a = 0; a < ni; ++a)
                    check_dephasing(m.dephasing_ef(g, a),
                                    "model.dephasing.ef[" + std::to_string(g) + "][" + std::to_string(a) + "]", out);
        }
    }

    auto registered = [&](std::size_t a, std::size_t b) {
        return std::any_of(m.intra_coherences.begin(), m.intra_coherences.end(), [&](const IntraCoherence& c) {
            return (c.a == a && c.b == b) || (c.a == b && c.b == a);
        });
    };
    for (std::size_t k = 0; k < m.intra_coherences.size(); ++k) {
        const auto& c = m.intra_coherences[k];
        const std::string where = "model.intra_coherences[" + std::to_string(k) + "]";
        if (c.a >= n || c.b >= n || c.a == c.b) {
            out.add(ErrorCode::UnknownCoherence, where + " must name two distinct single states");
            continue;
        }
        check_dephasing(c.decay, where + ".decay", out);
        if (c.frequency && !finite(*c.frequency)) out.add(ErrorCode::InvalidField, where + ".frequency must be finite");
        for (std::size_t j = 0; j < k; ++j) {
            const auto& o = m.intra_coherences[j];
            if ((o.a == c.a && o.b == c.b) || (o.a == c.b && o.b == c.a))
                out.add(ErrorCode::UnknownCoherence, where + " duplicates an earlier entry");
        }
    }
    for (std::size_t k = 0; k < m.coherence_transfer.size(); ++k) {
        const auto& t = m.coherence_transfer[k];
        const std::string where = "model.coherence_transfer[" + std::to_string(k) + "]";
        if (!registered(t.from_a, t.from_b) || !registered(t.to_a, t.to_b) || t.from_a == t.from_b ||
            t.to_a == t.to_b) {
            out.add(ErrorCode::UnknownCoherence, where + " must connect registered intra coherences");
        }
        check_rate(t.rate, where + ".rate", out);
    }
}

}  // namespace

ValidationError::ValidationError(std::vector<ValidationIssue> issues)
    : Error(issues.empty() ? ErrorCode::ConfigError : issues.front().code, join_message(issues)),
      issues_(std::move(issues)) {}

std::vector<ValidationIssue> collect_issues(const ExcitonSystem& system, const FieldConfig& field,
                                            const EvolutionModel& model) {
    IssueList out;
    check_system(system, out);
    check_field(field, out);
    check_model(system, model, out);
    return out.take();
}

ValidatedBundle validate_system(const ExcitonSystem& system, const FieldConfig& field,
                                const EvolutionModel& model) {
    auto issues = collect_issues(system, field, model);
    if (!issues.empty()) throw ValidationError(std::move(issues));

    std::vector<std::string> warnings;
    if (std::all_of(system.dipoles_ge.begin(), system.dipoles_ge.end(), [](double m) { return m == 0.0; }))
        warnings.emplace_back("all ground-to-single dipoles are zero; every signal vanishes");

    EvolutionModel normalized = model;
    if (normalized.transfer_rates.size() == 0) {
        const auto n = static_cast<Eigen::Index>(system.n_single());
        normalized.transfer_rates = Eigen::MatrixXd::Zero(n, n);
    }
    normalized.transfer_rates.diagonal().setZero();
    ExcitonSystem sys = system;
    if (sys.n_double() == 0) sys.dipoles_ef = Eigen::MatrixXd::Zero(0, static_cast<Eigen::Index>(sys.n_single()));
    if (sys.n_double() == 0)
        normalized.dephasing_ef = Eigen::MatrixXd::Zero(0, static_cast<Eigen::Index>(sys.n_single()));
    for (auto& c : normalized.intra_coherences)
        if (!c.frequency) c.frequency = system.single_energies[c.a] - system.single_energies[c.b];

    return ValidatedBundle(std::move(sys), field, std::move(normalized), std::move(warnings));
}

ValidatedBundle ValidatedBundle::with_field(const FieldConfig& field) const {
    return validate_system(system_, field, model_);
}

bool ValidatedBundle::operator==(const ValidatedBundle& o) const {
    auto same_matrix = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
        return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a == b);
    };
    auto same_field = [](const FieldConfig& a, const FieldConfig& b) {
        return a.pump_frequency == b.pump_frequency && a.signal_center == b.signal_center &&
               a.idler_center == b.idler_center && a.entanglement_time == b.entanglement_time &&
               a.delay == b.delay && a.conversion_scale == b.conversion_scale;
    };
    auto same_coh = [](const std::vector<IntraCoherence>& a, const std::vector<IntraCoherence>& b) {
        if (a.size() != b.size()) return false;
        for (std::size_t k = 0; k < a.size(); ++k)
            if (a[k].a != b[k].a || a[k].b != b[k].b || a[k].frequency != b[k].frequency || a[k].decay != b[k].decay)
                return false;
        return true;
    };
    auto same_transfer = [](const std::vector<CoherenceTransfer>& a, const std::vector<CoherenceTransfer>& b) {
        if (a.size() != b.size()) return false;
        for (std::size_t k = 0; k < a.size(); ++k)
            if (a[k].from_a != b[k].from_a || a[k].from_b != b[k].from_b || a[k].to_a != b[k].to_a ||
                a[k].to_b != b[k].to_b || a[k].rate != b[k].rate)
                return false;
        return true;
    };
    return system_.single_energies == o.system_.single_energies &&
           system_.double_energies == o.system_.double_energies && system_.dipoles_ge == o.system_.dipoles_ge &&
           same_matrix(system_.dipoles_ef, o.system_.dipoles_ef) && system_.labels == o.system_.labels &&
           same_field(field_, o.field_) && same_matrix(model_.transfer_rates, o.model_.transfer_rates) &&
           model_.ground_recovery == o.model_.ground_recovery && model_.dephasing_ge == o.model_.dephasing_ge &&
           same_matrix(model_.dephasing_ef, o.model_.dephasing_ef) && same_coh(model_.intra_coherences, o.model_.intra_coherences) &&
           same_transfer(model_.coherence_transfer, o.model_.coherence_transfer) && warnings_ == o.warnings_;
}

}  // namespace qlspec
