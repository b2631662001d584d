#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "oracles.hpp"
#include "qlspec/field_correlators.hpp"

using namespace qlspec;

namespace {

constexpr double kPi = std::numbers::pi;

FieldConfig make_field(double te, double delay, double ws = 1.0, double wi = 1.1, double zeta = 1.0) {
    return {ws + wi, ws, wi, te, delay, zeta};
}

}  // namespace

TEST_CASE("six correlator kinds") {
    std::set<std::pair<int, int>> seen;
    for (const auto& k : kAllKinds) seen.emplace(static_cast<int>(k.pathway), static_cast<int>(k.phase));
    CHECK(seen.size() == 6);
    CHECK(to_string(Pathway::ESA) == "ESA");
    CHECK(to_string(Phase::NonRephasing) == "non-rephasing");
}

TEST_CASE("D_n values") {
    CHECK(dn({DnMode::Finite, 1, 2.0}, 0.0) == 0.5);
    CHECK(dn({DnMode::Finite, 1, 2.0}, 1.0) == 0.5);
    CHECK(dn({DnMode::Finite, 1, 2.0}, 1.0001) == 0.0);
    CHECK(dn({DnMode::Finite, 2, 2.0}, 1.0) == 0.25);
    CHECK(dn({DnMode::Finite, 2, 2.0}, -1.0) == 0.25);
    CHECK(dn({DnMode::Finite, 2, 2.0}, 2.5) == 0.0);
    CHECK_THROWS_AS(dn({DnMode::DeltaLimit, 1, 0.0}, 0.0), Error);
    CHECK_THROWS_AS(dn({DnMode::Finite, 1, 0.0}, 0.0), Error);
    CHECK_THROWS_AS(dn({DnMode::Finite, 3, 1.0}, 0.0), Error);
    try {
        dn({DnMode::DeltaLimit, 2, 0.0}, 0.0);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DeltaNotSamplable);
    }
}

TEST_CASE("D_n have unit area and are even") {
    for (double te : {0.01, 0.7, 3.0}) {
        const double a1 = oracle::panels([&](double t) { return dn({DnMode::Finite, 1, te}, t); }, -0.5 * te,
                                         0.5 * te, 2);
        // Split at the apex so each panel is polynomial.
        const double a2 = oracle::panels([&](double t) { return dn({DnMode::Finite, 2, te}, t); }, -te, 0.0, 2) +
                          oracle::panels([&](double t) { return dn({DnMode::Finite, 2, te}, t); }, 0.0, te, 2);
        CHECK(std::abs(a1 - 1.0) < 1e-9);
        CHECK(std::abs(a2 - 1.0) < 1e-9);
        for (double t : {0.1, 0.33, 0.9})
            for (int n : {1, 2}) CHECK(dn({DnMode::Finite, n, te}, t * te) == dn({DnMode::Finite, n, te}, -t * te));
    }
}

TEST_CASE("sinc filter") {
    CHECK(sinc_filter(0.0, 1.0) == 1.0);
    CHECK(sinc_filter(2.0 * kPi, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(std::abs(sinc_filter(2.0 * kPi, 1.0)) < 1e-15);
    CHECK(sinc_filter(kPi, 1.0) == doctest::Approx(2.0 / kPi).epsilon(1e-15));
    CHECK(sinc_filter(-0.37, 2.0) == sinc_filter(0.37, 2.0));
    for (int k = 1; k <= 20; ++k) CHECK(std::abs(sinc_filter(2.0 * k * kPi / 3.0, 3.0)) < 1e-14);
    // series branch agrees with sin(x)/x at the switch point
    CHECK(sinc(0.99e-4) == doctest::Approx(std::sin(0.99e-4) / 0.99e-4).epsilon(1e-16));
    CHECK(std::abs(sinc(cplx(1e-5, 1e-5)) - std::sin(cplx(1e-5, 1e-5)) / cplx(1e-5, 1e-5)) < 1e-16);
    CHECK(std::abs(sinc(cplx(1.3, -0.4)) - std::sin(cplx(1.3, -0.4)) / cplx(1.3, -0.4)) < 1e-15);
}

TEST_CASE("two-photon wavefunction") {
    const FieldConfig f = make_field(0.8, 0.0, 1.0, 1.1, 2.0);
    CHECK(two_photon_wavefunction(3.0, 3.0 + 0.8, f) == cplx(0.0));
    CHECK(std::abs(two_photon_wavefunction(0.0, 0.0, f) - 2.0 / (2.0 * kPi * 0.8)) < 1e-15);
    for (double tau : {0.3, -1.7, 12.0}) {
        CHECK(std::abs(std::abs(two_photon_wavefunction(0.2 + tau, 0.1 + tau, f)) -
                       std::abs(two_photon_wavefunction(0.2, 0.1, f))) < 1e-15);
    }
}

TEST_CASE("field autocorrelation") {
    const FieldConfig f = make_field(0.8, 0.0, 1.0, 1.1, 2.0);
    for (auto branch : {Branch::Signal, Branch::Idler}) {
        CHECK(std::abs(autocorrelation(1.0, 1.0, branch, f) - 4.0 / (2.0 * kPi * 0.8)) < 1e-15);
        CHECK(autocorrelation(0.0, 0.81, branch, f) == cplx(0.0));
        CHECK(std::abs(autocorrelation(0.3, 0.1, branch, f) - std::conj(autocorrelation(0.1, 0.3, branch, f))) <
              1e-16);
    }
    CHECK(std::arg(autocorrelation(0.3, 0.1, Branch::Idler, f)) == doctest::Approx(1.1 * 0.2));
}

TEST_CASE("four_body requires a finite entanglement time") {
    CHECK_THROWS_AS(four_body(kAllKinds[0], 1.0, 0.0, 0.0, 0.0, 0.0, make_field(0.0, 1.0)), Error);
}

TEST_CASE("rephasing ESA vanishes outside both D_1 windows") {
    const FieldConfig f = make_field(0.4, 2.0);
    for (double s2 : {0.0, 1.79, 2.21, 5.0}) CHECK(four_body({Pathway::ESA, Phase::Rephasing}, 1.0, 0.0, 0.3, s2, 0.5, f) == cplx(0.0));
    CHECK(four_body({Pathway::ESA, Phase::Rephasing}, 1.0, 0.0, 0.3, 2.1, 0.5, f) != cplx(0.0));
}

TEST_CASE("four_body matches the substitution oracle") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> te_d(0.05, 2.0), dt_d(0.0, 2.0), w_d(0.5, 1.6), s_d(0.0, 3.0),
        t_d(-1.0, 1.0), c_d(0.8, 1.2);
    std::uniform_int_distribution<int> kind_d(0, 5);
    double worst = 0.0;
    int nonzero = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const double te = te_d(rng);
        const FieldConfig f = make_field(te, dt_d(rng), c_d(rng), c_d(rng), c_d(rng));
        const auto kind = kAllKinds[static_cast<std::size_t>(kind_d(rng))];
        const double w = w_d(rng), t = t_d(rng), s3 = s_d(rng);
        // Draw half the waiting times near the windows so the supports are exercised.
        double s2 = s_d(rng), s1 = s_d(rng) * 0.5;
        if (trial % 2 == 0) s2 = std::abs(f.delay - (kind.phase == Phase::NonRephasing ? s1 : 0.0) + (s_d(rng) - 1.5) * te / 2.0);
        const oracle::SubstitutionOracle o{f};
        const auto terms = four_body_terms(kind, w, t, s3, s2, s1, f);
        const cplx ref_d1 = o.normal_ordered(kind.phase, w, t, s3, s2, s1);
        const cplx ref_auto = o.commutator(kind, w, t, s3, s2, s1);
        worst = std::max(worst, std::abs(terms.d1_sum() - ref_d1));
        worst = std::max(worst, std::abs(terms.autocorrelation - ref_auto));
        if (ref_d1 != 0.0) ++nonzero;
        CHECK(std::abs(four_body(kind, w, t, s3, s2, s1, f) - (ref_d1 + ref_auto)) < 1e-12);
    }
    MESSAGE("max |four_body - oracle| = " << worst << ", nonzero D_1 samples: " << nonzero);
    CHECK(worst < 1e-12);
    CHECK(nonzero > 2000);
}

TEST_CASE("non-rephasing GSB delta(s2) coefficient") {
    const FieldConfig f = make_field(0.5, 1.0);
    const double w = 1.2, t = 0.3, s3 = 0.7, s1 = 1.1;
    const auto terms = four_body_terms({Pathway::GSB, Phase::NonRephasing}, w, t, s3, 0.0, s1, f);
    const double filt = sinc_filter(w - f.idler_center, f.entanglement_time);
    const cplx expect = filt * filt * std::exp(cplx(0.0, -w * t + w * s3 + w * s1));
    CHECK(std::abs(terms.delta_s2_coefficient - expect) < 1e-15);
    CHECK(terms.autocorrelation == cplx(0.0));
    for (auto kind : kAllKinds)
        if (!(kind == CorrelatorKind{Pathway::GSB, Phase::NonRephasing}))
            CHECK(four_body_terms(kind, w, t, s3, 0.0, s1, f).delta_s2_coefficient == cplx(0.0));
}

TEST_CASE("rephasing SE and GSB D_1 terms coincide") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int k = 0; k < 100; ++k) {
        const FieldConfig f = make_field(0.3 + u(rng), 0.0);
        const double w = 0.8 + 0.2 * u(rng), s3 = u(rng), s2 = 0.3 * u(rng), s1 = u(rng);
        const auto se = four_body_terms({Pathway::SE, Phase::Rephasing}, w, 0.0, s3, s2, s1, f);
        const auto gsb = four_body_terms({Pathway::GSB, Phase::Rephasing}, w, 0.0, s3, s2, s1, f);
        CHECK(se.d1_sum() == gsb.d1_sum());
    }
}

TEST_CASE("rephasing ESA collapses to the delta-limit phase") {
    // Integrating over s2 around s2 = delay leaves exp(-i w t + i w s3 - i (wp - w) s1) up to O(Te).
    const double delay = 2.0, w = 1.07, t = 0.2, s3 = 0.4, s1 = 0.9;
    for (double te : {1e-2, 1e-3}) {
        const FieldConfig f = make_field(te, delay);
        const cplx integral = oracle::panels(
            [&](double s2) { return four_body({Pathway::ESA, Phase::Rephasing}, w, t, s3, s2, s1, f); },
            delay - 0.5 * te, delay + 0.5 * te, 4);
        const cplx expect = std::exp(cplx(0.0, -w * t + w * s3 - (f.pump_frequency - w) * s1));
        CHECK(std::abs(integral - expect) < 2.0 * te);
    }
}

TEST_CASE("delta-limit consistency against a smooth test function") {
    // int ds2 four_body(s2) g(s2) -> g(delay) x collapsed phase, error O(Te).
    const double delay = 1.5, w = 0.95, s1 = 0.4;
    auto g = [](double s) { return std::exp(-0.3 * s) * std::cos(0.7 * s); };
    std::vector<double> err;
    for (double te : {1e-2, 1e-3}) {
        const FieldConfig f = make_field(te, delay);
        for (auto phase : {Phase::Rephasing, Phase::NonRephasing}) {
            const CorrelatorKind kind{Pathway::ESA, phase};
            const double center = phase == Phase::Rephasing ? delay : delay - s1;
            const cplx integral = oracle::panels(
                [&](double s2) { return four_body(kind, w, 0.0, 0.0, s2, s1, f) * g(s2); }, center - 0.5 * te,
                center + 0.5 * te, 4);
            const double phase_s1 = phase == Phase::Rephasing ? -(f.pump_frequency - w) * s1 : f.signal_center * s1 + (w - f.idler_center) * (center - delay);
            const cplx expect = g(center) * std::exp(cplx(0.0, phase_s1));
            err.push_back(std::abs(integral - expect));
        }
    }
    CHECK(err[0] < 1e-2);
    CHECK(err[1] < 1e-2);
    CHECK(err[2] < err[0] / 5.0);
    CHECK(err[3] < err[1] / 5.0);
}
