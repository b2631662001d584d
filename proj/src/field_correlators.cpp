#include "qlspec/field_correlators.hpp"

#include <cmath>
#include <numbers>

namespace qlspec {

std::string_view to_string(Pathway p) {
    switch (p) {
        case Pathway::GSB: return "GSB";
        case Pathway::SE: return "SE";
        case Pathway::ESA: return "ESA";
    }
    throw Error(ErrorCode::UnknownKind, "invalid pathway");
}

std::string_view to_string(Phase p) {
    switch (p) {
        case Phase::Rephasing: return "rephasing";
        case Phase::NonRephasing: return "non-rephasing";
    }
    throw Error(ErrorCode::UnknownKind, "invalid phase");
}

double dn(const DnForm& form, double t) {
    if (form.mode == DnMode::DeltaLimit)
        throw Error(ErrorCode::DeltaNotSamplable, "D_n in the delta limit must be integrated analytically");
    const double te = form.entanglement_time;
    if (!(te > 0.0)) throw Error(ErrorCode::InvalidField, "finite D_n needs entanglement_time > 0");
    const double at = std::abs(t);
    switch (form.order) {
        case 1: return at <= 0.5 * te ? 1.0 / te : 0.0;
        case 2: return at <= te ? (1.0 - at / te) / te : 0.0;
        default: throw Error(ErrorCode::InvalidField, "D_n is defined for n = 1 and n = 2 only");
    }
}

double sinc(double x) {
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
    }
    return std::sin(x) / x;
}

cplx sinc(cplx z) {
    if (std::abs(z) < 1e-4) {
        const cplx z2 = z * z;
        return 1.0 - z2 / 6.0 + z2 * z2 / 120.0;
    }
    return std::sin(z) / z;
}

double sinc_filter(double omega, double entanglement_time) { return sinc(0.5 * omega * entanglement_time); }

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

cplx phase(double x) { return std::polar(1.0, x); }

}  // namespace

cplx two_photon_wavefunction(double t, double s, const FieldConfig& field) {
    const double d1 = dn({DnMode::Finite, 1, field.entanglement_time}, t - s);
    if (d1 == 0.0) return 0.0;
    return field.conversion_scale / kTwoPi * d1 * phase(-field.signal_center * t - field.idler_center * s);
}

cplx autocorrelation(double t, double s, Branch branch, const FieldConfig& field) {
    const double d2 = dn({DnMode::Finite, 2, field.entanglement_time}, t - s);
    if (d2 == 0.0) return 0.0;
    const double center = branch == Branch::Signal ? field.signal_center : field.idler_center;
    const double z = field.conversion_scale;
    return z * z / kTwoPi * d2 * phase(center * (t - s));
}

FourBodyTerms four_body_terms(CorrelatorKind kind, double omega, double t, double s3, double s2, double s1,
                              const FieldConfig& field) {
    const double te = field.entanglement_time;
    if (!(te > 0.0))
        throw Error(ErrorCode::DeltaNotSamplable, "four-body correlators are sampled at finite entanglement time only");
    const DnForm d1{DnMode::Finite, 1, te};
    const DnForm d2{DnMode::Finite, 2, te};
    const double dt = field.delay;
    const double wp = field.pump_frequency;
    const double ws = field.signal_center;
    const double wi = field.idler_center;
    const double om_i = omega - wi;
    const double om_s = omega - ws;
    const double filt = sinc_filter(om_i, te);
    const double common = -omega * t + omega * s3;

    FourBodyTerms out{};
    if (kind.phase == Phase::Rephasing) {
        const double base = common - (wp - omega) * s1 - om_i * dt;
        out.first = filt * dn(d1, s2 - dt) * phase(base + om_i * s2);
        out.second = filt * dn(d1, s2 + dt) * phase(base + om_s * s2);
        switch (kind.pathway) {
            case Pathway::GSB: out.autocorrelation = dn(d2, s2 + s1) * phase(common + om_s * s2 - ws * s1); break;
            case Pathway::SE: out.autocorrelation = dn(d2, s1) * phase(common - ws * s1); break;
            case Pathway::ESA: break;
            default: throw Error(ErrorCode::UnknownKind, "invalid pathway");
        }
    } else if (kind.phase == Phase::NonRephasing) {
        out.first = filt * dn(d1, s2 + s1 - dt) * phase(common + om_i * s2 + ws * s1 - om_i * dt);
        out.second = filt * dn(d1, s2 + s1 + dt) * phase(common + om_s * s2 + wi * s1 - om_i * dt);
        switch (kind.pathway) {
            case Pathway::GSB: out.delta_s2_coefficient = filt * filt * phase(common + omega * s1); break;
            case Pathway::SE: out.autocorrelation = dn(d2, s1) * phase(common + ws * s1); break;
            case Pathway::ESA: break;
            default: throw Error(ErrorCode::UnknownKind, "invalid pathway");
        }
    } else {
        throw Error(ErrorCode::UnknownKind, "invalid phase");
    }
    return out;
}

cplx four_body(CorrelatorKind kind, double omega, double t, double s3, double s2, double s1,
               const FieldConfig& field) {
    const auto terms = four_body_terms(kind, omega, t, s3, s2, s1, field);
    return terms.first + terms.second + terms.autocorrelation;
}

}  // namespace qlspec
