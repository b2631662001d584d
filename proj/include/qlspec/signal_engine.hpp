// signal_engine.hpp: frequency-dispersed transmission signal S(w; delay).
//
// Normalization: every reported signal is one half of the Im-part integral over
// the response function times the field correlator, summed over rephasing and
// non-rephasing pathways. With this convention the population pathways reduce
// to the absorptive lineshape I = mu^2 mu^2 G'[w] G'[wp - w] with unit weight,
// and the field prefactor zeta^2 / (2 pi)^2 enters only as zeta^2.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

#include "qlspec/core_model.hpp"
#include "qlspec/field_correlators.hpp"
#include "qlspec/propagator.hpp"
#include "qlspec/spectrum.hpp"

namespace qlspec {

inline constexpr double kPathwayNormalization = 0.5;

enum class SignalMode { ShortTe, FiniteTeRephasing, Oracle };

std::string_view to_string(SignalMode mode);

// Delta-correlated photon pairs. GSB and SE carry a minus sign, ESA a plus sign.
// Coherence pathways are added when intra-manifold coherences are registered;
// Sc is included when the waiting kernel exists, else flagged in meta.
Spectrum1D signal_short_te(const std::vector<double>& omega_grid, double delay, const ValidatedBundle& bundle);

// One phase class of the delta-limit pathways (GSB, SE, ESA and coherence
// components; no Sc). Rephasing + non-rephasing equals signal_short_te without Sc.
Spectrum1D signal_short_te_phase(const std::vector<double>& omega_grid, double delay, const ValidatedBundle& bundle,
                                 Phase phase);

// S(w; delay) - S(w; 0) for the given mode.
Spectrum1D difference_spectrum(const std::vector<double>& omega_grid, double delay, const ValidatedBundle& bundle,
                               SignalMode mode = SignalMode::ShortTe);
Spectrum1D difference_spectrum(const Spectrum1D& at_delay, const Spectrum1D& at_zero);

struct FKernelArgs {
    double omega{0.0};
    double delay{0.0};
    cplx rate{0.0};  // lambda, or i w_ab + lambda for a coherence
    FieldConfig field;
};

// Waiting-time kernel for G(s) = exp(-rate s) at finite entanglement time.
cplx f_kernel(const FKernelArgs& args);
// The two closed-form branches, usable on either side of delay = Te / 2.
cplx f_kernel_long_delay(const FKernelArgs& args);
cplx f_kernel_short_delay(const FKernelArgs& args);

// Matrix generalization for populations: F_{bb<-aa} with G(s) = exp(L s).
Eigen::MatrixXcd f_kernel_matrix(const Eigen::MatrixXd& generator, double omega, double delay,
                                 const FieldConfig& field);

// Rephasing SE and ESA population pathways at finite entanglement time.
// pathways selects which of SE / ESA are evaluated; other components stay zero.
Spectrum1D signal_finite_te_rephasing(const std::vector<double>& omega_grid, double delay,
                                      const ValidatedBundle& bundle,
                                      std::vector<Pathway> pathways = {Pathway::SE, Pathway::ESA});

struct QuadratureOptions {
    double rel_tol{1e-6};
    double horizon_factor{30.0};  // truncation at horizon_factor / decay rate, per axis
    unsigned max_depth{25};
};

// Direct quadrature of the response function against the four-body field
// correlators. D_1 terms feed the pathway components, the autocorrelation terms
// feed Sc. Requires finite entanglement time.
Spectrum1D brute_force_signal(const std::vector<double>& omega_grid, double delay, const ValidatedBundle& bundle,
                              const std::vector<CorrelatorKind>& kinds = {kAllKinds.begin(), kAllKinds.end()},
                              const QuadratureOptions& options = {});

// Dispatch on mode.
Spectrum1D compute_signal(SignalMode mode, const std::vector<double>& omega_grid, double delay,
                          const ValidatedBundle& bundle);

}  // namespace qlspec
