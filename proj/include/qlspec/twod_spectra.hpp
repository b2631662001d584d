// twod_spectra.hpp: impulsive-limit absorptive 2D spectra and their
// relation to the entangled-photon transmission signal.
//
// Sign convention: GSB and SE enter positively, ESA negatively, the opposite
// of the transmission signal. The coherence components are built from the
// same pathway sums as the 1D coherence terms with w -> w3 and wp - w -> w1.

#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <vector>

#include "qlspec/core_model.hpp"
#include "qlspec/spectrum.hpp"

namespace qlspec {

enum class Component2D : std::size_t { GSB = 0, SE, ESA, SEcoh, ESAcoh };
inline constexpr std::size_t kComponent2DCount = 5;

struct Spectrum2D {
    std::vector<double> omega1;
    std::vector<double> omega3;
    double t2{0.0};
    // Indexed (omega3 index, omega1 index).
    Eigen::MatrixXd values;
    std::array<Eigen::MatrixXd, kComponent2DCount> components;

    Eigen::MatrixXd& component(Component2D c) { return components[static_cast<std::size_t>(c)]; }
    const Eigen::MatrixXd& component(Component2D c) const { return components[static_cast<std::size_t>(c)]; }
};

Spectrum2D absorptive_2d(const std::vector<double>& omega3_grid, double t2, const std::vector<double>& omega1_grid,
                         const ValidatedBundle& bundle);

// S_2D(w3, t2, wp - w3) on the omega3 points whose partner w1 lies inside the
// omega1 range; w1 is interpolated linearly. Throws LineOutsideGrid if the line
// misses the grid entirely.
Spectrum1D antidiagonal_cut(const Spectrum2D& spectrum, double pump_frequency);

// Grid covering every optical transition with a 10 gamma margin and at least
// points_per_gamma samples per narrowest dephasing rate.
std::vector<double> default_grid(const ValidatedBundle& bundle, double points_per_gamma = 8.0);

struct CorrespondenceOptions {
    double tolerance{1e-8};
    // Evaluate the 2D side on the anti-diagonal of a different pump frequency.
    std::optional<double> pump_override;
    // Flip the sign of the 2D side.
    bool negate_2d{false};
};

struct CorrespondenceEntry {
    double delay{0.0};
    double max_deviation{0.0};
    double at_omega{0.0};
    bool passed{false};
};

struct CorrespondenceReport {
    double tolerance{0.0};
    double pump_frequency{0.0};
    std::vector<CorrespondenceEntry> entries;
    bool passed() const;
};

// Checks dS(w; dt) = -[S_2D(w, dt, wp - w) - S_2D(w, 0, wp - w)] in the
// delta-correlated limit. The 1D side is divided by conversion_scale^2.
CorrespondenceReport correspondence_check(const ValidatedBundle& bundle, const std::vector<double>& delays,
                                          const std::vector<double>& omega_grid,
                                          const CorrespondenceOptions& options = {});

// dS(w; dt) for each pump frequency, rows = pumps, columns = omega. The signal
// and idler centers are rescaled to keep their ratio while summing to each pump.
Eigen::MatrixXd pump_sweep(const ValidatedBundle& bundle, const std::vector<double>& pumps, double delay,
                           const std::vector<double>& omega_grid);

}  // namespace qlspec
