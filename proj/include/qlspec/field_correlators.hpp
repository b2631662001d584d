// field_correlators.hpp: statistics of the down-converted photon pair.
//
// The pair is produced by a monochromatic pump; the signal beam acts as pump
// and the idler, delayed by field.delay, as probe. All four-body correlators
// drop the common prefactor zeta^2 / (2 pi)^2.

#pragma once

#include <array>
#include <complex>
#include <string_view>

#include "qlspec/core_model.hpp"

namespace qlspec {

using cplx = std::complex<double>;

enum class Pathway { GSB, SE, ESA };
enum class Phase { Rephasing, NonRephasing };

struct CorrelatorKind {
    Pathway pathway{Pathway::GSB};
    Phase phase{Phase::Rephasing};
    bool operator==(const CorrelatorKind&) const = default;
};

inline constexpr std::array<CorrelatorKind, 6> kAllKinds{{
    {Pathway::GSB, Phase::Rephasing},
    {Pathway::GSB, Phase::NonRephasing},
    {Pathway::SE, Phase::Rephasing},
    {Pathway::SE, Phase::NonRephasing},
    {Pathway::ESA, Phase::Rephasing},
    {Pathway::ESA, Phase::NonRephasing},
}};

std::string_view to_string(Pathway p);
std::string_view to_string(Phase p);

enum class DnMode { DeltaLimit, Finite };

struct DnForm {
    DnMode mode{DnMode::Finite};
    int order{1};
    double entanglement_time{0.0};
};

// D_1 is a rectangle of height 1/Te on |t| <= Te/2; D_2 the triangle (1/Te)(1 - |t|/Te).
// Throws DeltaNotSamplable for the delta limit.
double dn(const DnForm& form, double t);

double sinc(double x);
cplx sinc(cplx z);

// sinc(w Te / 2), the spectral filter of the phase-matching function.
double sinc_filter(double omega, double entanglement_time);

// <vac| E_s(t) E_i(s) |twin> = (zeta / 2 pi) D_1(t - s) exp(-i ws t - i wi s)
cplx two_photon_wavefunction(double t, double s, const FieldConfig& field);

enum class Branch { Signal, Idler };

// <twin| E_b^-(t) E_b^+(s) |twin> = (zeta^2 / 2 pi) D_2(t - s) exp(i w_b (t - s))
cplx autocorrelation(double t, double s, Branch branch, const FieldConfig& field);

// The individual terms of one four-body correlator at finite entanglement time.
struct FourBodyTerms {
    cplx first;            // D_1 term centered on s2 (+ s1) = delay
    cplx second;           // D_1 term centered on s2 (+ s1) = -delay
    cplx autocorrelation;  // D_2 term from the field commutator (GSB and SE only)
    // Coefficient multiplying delta(s2) in the non-rephasing GSB correlator; zero elsewhere.
    cplx delta_s2_coefficient;

    cplx d1_sum() const { return first + second; }
};

FourBodyTerms four_body_terms(CorrelatorKind kind, double omega, double t, double s3, double s2, double s1,
                              const FieldConfig& field);

// Sum of the sampled terms. The delta(s2) term of non-rephasing GSB is not
// samplable and is reported only through four_body_terms.
cplx four_body(CorrelatorKind kind, double omega, double t, double s3, double s2, double s1,
               const FieldConfig& field);

}  // namespace qlspec
