// core_model.hpp: level structure, field configuration and evolution-model parameters.
//
// Units: hbar = 1. Energies are angular frequencies in the user's unit; times
// are in the reciprocal unit. Nothing in the library converts units.

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qlspec/error.hpp"

namespace qlspec {

// Ground state |0>, single-excitation manifold {e_a}, double-excitation manifold {f_g}.
struct ExcitonSystem {
    std::vector<double> single_energies;  // w_{a0}
    std::vector<double> double_energies;  // w_{g0}
    std::vector<double> dipoles_ge;       // mu_{a0}, one per single state
    Eigen::MatrixXd dipoles_ef;           // mu_{g a}: rows = double states, cols = single states
    std::vector<std::string> labels;      // optional

    std::size_t n_single() const noexcept { return single_energies.size(); }
    std::size_t n_double() const noexcept { return double_energies.size(); }

    // w_{g a} = w_{g0} - w_{a0}
    double ef_frequency(std::size_t g, std::size_t a) const {
        return double_energies[g] - single_energies[a];
    }
};

struct FieldConfig {
    double pump_frequency{0.0};     // w_p
    double signal_center{0.0};      // mean signal frequency
    double idler_center{0.0};       // mean idler frequency
    double entanglement_time{0.0};  // 0 selects the delta-correlated limit
    double delay{0.0};              // idler delay, >= 0
    double conversion_scale{1.0};   // overall scale of the pair amplitude
};

// Registered coherence |e_a><e_b| inside the single manifold.
struct IntraCoherence {
    std::size_t a{0};
    std::size_t b{0};
    std::optional<double> frequency;  // defaults to w_{a0} - w_{b0}
    double decay{0.0};
};

// Bath-induced transfer |e_a><e_b| -> |e_c><e_d|.
struct CoherenceTransfer {
    std::size_t from_a{0}, from_b{0};
    std::size_t to_a{0}, to_b{0};
    double rate{0.0};
};

struct EvolutionModel {
    // transfer_rates(b, a) is the population transfer rate a -> b. Diagonal entries
    // are ignored; the generator closes each column itself.
    Eigen::MatrixXd transfer_rates;
    std::vector<double> ground_recovery;  // e_a -> 0
    std::vector<double> dephasing_ge;     // decay of |e_a><0|
    Eigen::MatrixXd dephasing_ef;         // decay of |f_g><e_a|: rows = doubles, cols = singles
    std::vector<IntraCoherence> intra_coherences;
    std::vector<CoherenceTransfer> coherence_transfer;

    // Generator of single-manifold populations, dP/dt = L P, including recovery to ground.
    Eigen::MatrixXd population_generator() const;

    bool has_coherence_transfer() const noexcept { return !coherence_transfer.empty(); }
};

struct ValidationIssue {
    ErrorCode code;
    std::string message;
};

class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<ValidationIssue> issues);
    const std::vector<ValidationIssue>& issues() const noexcept { return issues_; }

private:
    std::vector<ValidationIssue> issues_;
};

// Immutable, validated parameter set. Only validate_system creates one.
class ValidatedBundle {
public:
    const ExcitonSystem& system() const noexcept { return system_; }
    const FieldConfig& field() const noexcept { return field_; }
    const EvolutionModel& model() const noexcept { return model_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    // Copy with a different field; the field is revalidated.
    ValidatedBundle with_field(const FieldConfig& field) const;

    bool operator==(const ValidatedBundle& other) const;

private:
    friend ValidatedBundle validate_system(const ExcitonSystem&, const FieldConfig&, const EvolutionModel&);
    ValidatedBundle(ExcitonSystem s, FieldConfig f, EvolutionModel m, std::vector<std::string> w)
        : system_(std::move(s)), field_(f), model_(std::move(m)), warnings_(std::move(w)) {}

    ExcitonSystem system_;
    FieldConfig field_;
    EvolutionModel model_;
    std::vector<std::string> warnings_;
};

// Checks every invariant and throws ValidationError listing all violations.
ValidatedBundle validate_system(const ExcitonSystem& system, const FieldConfig& field,
                                const EvolutionModel& model);

inline ValidatedBundle validate_system(const ValidatedBundle& bundle) {
    return validate_system(bundle.system(), bundle.field(), bundle.model());
}

// Returns the issues without throwing; empty means valid.
std::vector<ValidationIssue> collect_issues(const ExcitonSystem& system, const FieldConfig& field,
                                            const EvolutionModel& model);

}  // namespace qlspec
