#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qlspec/signal_engine.hpp"

using namespace qlspec;
using oracle::Builder;
using oracle::lorentzian;
using oracle::max_abs;
using oracle::rel_err;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> grid(double lo, double hi, std::size_t n) { return linspace(lo, hi, n); }

Builder dimer_with_coherence() {
    auto b = Builder::dimer(0.05, 0.002);
    b.model.transfer_rates(0, 1) = 0.01;
    b.model.intra_coherences.push_back({0, 1, std::nullopt, 0.04});
    b.model.coherence_transfer.push_back({0, 1, 1, 0, 0.01});
    return b;
}

}  // namespace

TEST_CASE("two-level molecule without recovery has no difference signal") {
    const auto bundle = Builder::two_level().build();
    for (double dt : {0.0, 1.0, 50.0}) {
        const auto d = difference_spectrum(grid(0.5, 1.5, 101), dt, bundle);
        CHECK(max_abs(d.total) == 0.0);
    }
}

TEST_CASE("two-level molecule with recovery loses SE as 1 - exp(-Gamma dt)") {
    const double gamma = 0.1, rec = 0.03, mu = 1.3;
    for (double wp : {2.0, 2.2}) {
        auto b = Builder::two_level(1.0, mu, gamma, rec);
        b.field = {wp, wp / 2.0, wp / 2.0, 0.0, 0.0, 1.0};
        const auto bundle = b.build();
        const auto w = grid(0.5, 1.5, 201);
        const double dt = 7.0;
        const auto d = difference_spectrum(w, dt, bundle);
        std::size_t peak = 0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double expect = std::pow(mu, 4) * lorentzian(1.0, gamma, w[i]) *
                                  lorentzian(1.0, gamma, wp - w[i]) * (1.0 - std::exp(-rec * dt));
            CHECK(d.total[i] == doctest::Approx(expect).epsilon(1e-12));
            CHECK(d.component(Component::GSB)[i] == 0.0);
            if (d.total[i] > d.total[peak]) peak = i;
        }
        if (wp == 2.0)
            CHECK(w[peak] == doctest::Approx(1.0));
        else
            CHECK(std::abs(w[peak] - 1.0) > 0.05);
    }
}

TEST_CASE("difference at zero delay vanishes") {
    const auto bundle = dimer_with_coherence().build();
    const auto d = difference_spectrum(grid(0.8, 1.3, 64), 0.0, bundle);
    for (const auto& c : d.components) CHECK(max_abs(c) == 0.0);
}

TEST_CASE("difference spectrum drops delay-independent parts") {
    const auto bundle = dimer_with_coherence().build();
    const auto d = difference_spectrum(grid(0.8, 1.3, 64), 12.0, bundle);
    CHECK(max_abs(d.component(Component::GSB)) == 0.0);
    CHECK(max_abs(d.component(Component::Sc)) == 0.0);
    CHECK(max_abs(d.component(Component::SE)) > 0.0);
    CHECK(max_abs(d.component(Component::SEcoh)) > 0.0);
}

TEST_CASE("difference spectrum needs identical grids") {
    const auto bundle = Builder::two_level().build();
    const auto a = signal_short_te(grid(0.5, 1.5, 10), 1.0, bundle);
    const auto b = signal_short_te(grid(0.5, 1.5, 11), 0.0, bundle);
    CHECK_THROWS_AS(difference_spectrum(a, b), Error);
}

TEST_CASE("dimer SE at w20 follows two-state kinetics") {
    const double k = 0.05, g = 0.02;
    const auto bundle = Builder::dimer(k).build();
    const double wp = bundle.field().pump_frequency;
    for (double dt : {1.0, 10.0, 40.0}) {
        const auto d = difference_spectrum({1.1}, dt, bundle);
        const double grow = 1.0 - std::exp(-k * dt);
        const double expect = -grow * lorentzian(1.0, g, wp - 1.1) *
                              (0.64 * lorentzian(1.1, g, 1.1) - lorentzian(1.0, g, 1.1));
        CHECK(d.component(Component::SE)[0] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("components sum to the total") {
    const auto bundle = dimer_with_coherence().build();
    const auto s = signal_short_te(grid(0.8, 1.3, 128), 5.0, bundle);
    for (std::size_t i = 0; i < s.size(); ++i) {
        double sum = 0.0;
        for (const auto& c : s.components) sum += c[i];
        CHECK(std::abs(sum - s.total[i]) <= 1e-12 * std::max(1.0, std::abs(s.total[i])));
    }
}

TEST_CASE("dipoles scale the signal as c^4") {
    const auto base = dimer_with_coherence();
    const auto w = grid(0.8, 1.3, 64);
    const auto s1 = signal_short_te(w, 3.0, base.build());
    for (double c : {0.5, 2.0, -1.5}) {
        auto b = base;
        for (double& m : b.sys.dipoles_ge) m *= c;
        b.sys.dipoles_ef *= c;
        const auto sc = signal_short_te(w, 3.0, b.build());
        for (std::size_t i = 0; i < w.size(); ++i) CHECK(sc.total[i] == doctest::Approx(std::pow(c, 4) * s1.total[i]).epsilon(1e-12));
    }
}

TEST_CASE("conversion scale enters as zeta^2") {
    auto b = Builder::dimer(0.05, 0.01);
    const auto w = grid(0.8, 1.3, 32);
    const auto s1 = signal_short_te(w, 3.0, b.build());
    b.field.conversion_scale = 3.0;
    const auto s3 = signal_short_te(w, 3.0, b.build());
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(s3.total[i] == doctest::Approx(9.0 * s1.total[i]).epsilon(1e-13));
}

TEST_CASE("pathway signs for population dynamics") {
    const auto bundle = Builder::dimer(0.05, 0.01).build();
    const auto w = grid(0.8, 1.3, 256);
    for (double dt : {0.0, 5.0, 50.0}) {
        const auto s = signal_short_te(w, dt, bundle);
        for (std::size_t i = 0; i < w.size(); ++i) {
            CHECK(s.component(Component::GSB)[i] <= 0.0);
            CHECK(s.component(Component::SE)[i] <= 0.0);
            CHECK(s.component(Component::ESA)[i] >= 0.0);
        }
    }
}

TEST_CASE("Sc closed form for a single state") {
    const double gamma = 0.1, rec = 0.2, mu = 1.1;
    const auto bundle = Builder::two_level(1.0, mu, gamma, rec).build();
    const auto w = grid(0.5, 1.5, 41);
    const auto s = signal_short_te(w, 2.0, bundle);
    CHECK(s.meta.sc_available);
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double l = lorentzian(1.0, gamma, w[i]);
        CHECK(s.component(Component::Sc)[i] == doctest::Approx(-std::pow(mu, 4) * l * (l + 1.0 / rec)).epsilon(1e-13));
    }
}

TEST_CASE("Sc is flagged when the kernel diverges") {
    const auto s = signal_short_te(grid(0.8, 1.3, 16), 1.0, Builder::dimer(0.05, 0.0).build());
    CHECK_FALSE(s.meta.sc_available);
    CHECK(max_abs(s.component(Component::Sc)) == 0.0);
    CHECK_FALSE(s.meta.notes.empty());
}

TEST_CASE("rephasing and non-rephasing shares add up") {
    const auto bundle = dimer_with_coherence().build();
    const auto w = grid(0.8, 1.3, 96);
    for (double dt : {0.0, 4.0, 30.0}) {
        const auto full = signal_short_te(w, dt, bundle);
        const auto r = signal_short_te_phase(w, dt, bundle, Phase::Rephasing);
        const auto nr = signal_short_te_phase(w, dt, bundle, Phase::NonRephasing);
        for (auto c : {Component::GSB, Component::SE, Component::ESA, Component::SEcoh, Component::ESAcoh})
            for (std::size_t i = 0; i < w.size(); ++i)
                CHECK(r.component(c)[i] + nr.component(c)[i] ==
                      doctest::Approx(full.component(c)[i]).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("negative delay is rejected") {
    CHECK_THROWS_AS(signal_short_te({1.0}, -0.1, Builder::two_level().build()), Error);
    CHECK_THROWS_AS(signal_short_te({1.0, 0.9}, 0.0, Builder::two_level().build()), Error);
}

// ---------------------------------------------------------------------------
// F kernel

namespace {

FieldConfig kernel_field(double te, double delay, double wi = 1.0) { return {2.0 * wi, wi, wi, te, delay, 1.0}; }

// Direct expansion of the short branch, for delay < Te / 2.
cplx naive_short_branch(const FKernelArgs& a) {
    const cplx i(0.0, 1.0);
    const double te = a.field.entanglement_time, dt = a.delay;
    const double om_i = a.omega - a.field.idler_center;
    const double om_s = a.omega - a.field.signal_center;
    const double wp = a.field.pump_frequency;
    const cplx t1 = (std::exp(i * (om_i + i * a.rate) * (te / 2.0)) * std::exp(-a.rate * dt) - std::exp(-i * om_i * dt)) /
                    (i * (om_i + i * a.rate) * te);
    const cplx t2 = (std::exp(i * (om_s + i * a.rate) * (te / 2.0)) * std::exp(-i * (2.0 * a.omega - wp + i * a.rate) * dt) -
                     std::exp(-i * om_i * dt)) /
                    (i * (om_s + i * a.rate) * te);
    return t1 + t2;
}

// Direct quadrature of the waiting-time window against exp(-rate s).
cplx kernel_by_quadrature(const FKernelArgs& a) {
    const cplx i(0.0, 1.0);
    const double te = a.field.entanglement_time, dt = a.delay;
    const double om_i = a.omega - a.field.idler_center;
    const double om_s = a.omega - a.field.signal_center;
    auto g = [&](double s) { return std::exp(-a.rate * s); };
    cplx sum = oracle::panels([&](double s) { return std::exp(i * om_i * (s - dt)) * g(s); },
                              std::max(0.0, dt - te / 2.0), dt + te / 2.0, 8);
    if (dt < te / 2.0)
        sum += oracle::panels([&](double s) { return std::exp(i * (om_s * s - om_i * dt)) * g(s); }, 0.0,
                              te / 2.0 - dt, 8);
    return sum / te;
}

}  // namespace

TEST_CASE("F kernel limits") {
    for (double w : {0.3, 1.0, 1.7}) {
        const FKernelArgs a{w, 2.0, cplx(0.4, 0.0), kernel_field(0.0, 2.0)};
        CHECK(std::abs(f_kernel(a) - std::exp(-0.8)) < 1e-15);
        const FKernelArgs tiny{w, 2.0, cplx(0.4, 0.0), kernel_field(1e-7, 2.0)};
        CHECK(std::abs(f_kernel(tiny) - std::exp(-0.8)) < 1e-7);
    }
    const FKernelArgs zero_rate{1.4, 3.0, cplx(0.0), kernel_field(2.0, 3.0)};
    CHECK(std::abs(f_kernel(zero_rate) - sinc(0.4 * 2.0 / 2.0)) < 1e-15);
}

TEST_CASE("F kernel branches agree with quadrature and the naive expansion") {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> w_d(0.5, 1.5), lam(0.0, 1.0), wab(-0.5, 0.5), te_d(0.1, 3.0), frac(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        const double te = te_d(rng);
        const double dt = frac(rng) * 1.5 * te;
        const FKernelArgs a{w_d(rng), dt, cplx(lam(rng), wab(rng)), kernel_field(te, dt, 1.0 + 0.1 * frac(rng))};
        const cplx f = f_kernel(a);
        CHECK(std::abs(f - kernel_by_quadrature(a)) < 1e-12);
        if (dt < te / 2.0) CHECK(std::abs(f_kernel_short_delay(a) - naive_short_branch(a)) < 1e-11);
    }
}

TEST_CASE("F kernel is continuous at delay = Te / 2") {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> w_d(-2.0, 4.0), lam(0.0, 2.0), wab(-1.0, 1.0), te_d(1e-3, 10.0);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const double te = te_d(rng);
        const FKernelArgs a{w_d(rng), te / 2.0, cplx(lam(rng), wab(rng)), kernel_field(te, te / 2.0)};
        worst = std::max(worst, std::abs(f_kernel_long_delay(a) - f_kernel_short_delay(a)));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("F kernel matrix reduces to the scalar kernel and to quadrature") {
    SUBCASE("single state") {
        Eigen::MatrixXd gen(1, 1);
        gen << -0.3;
        for (double dt : {0.1, 0.9, 4.0}) {
            const FieldConfig f = kernel_field(2.0, dt);
            const auto m = f_kernel_matrix(gen, 1.2, dt, f);
            CHECK(std::abs(m(0, 0) - f_kernel({1.2, dt, cplx(0.3), f})) < 1e-13);
        }
    }
    SUBCASE("two states with transfer") {
        Eigen::MatrixXd gen(2, 2);
        gen << -0.5, 0.1, 0.4, -0.2;
        const double te = 1.5, w = 0.9;
        for (double dt : {0.2, 0.75, 3.0, 200.0}) {
            const FieldConfig f = kernel_field(te, dt);
            const auto m = f_kernel_matrix(gen, w, dt, f);
            const cplx i(0.0, 1.0);
            const double om_i = w - f.idler_center, om_s = w - f.signal_center;
            auto prop = [&](double s) { return oracle::rk4_exp(gen, s, 200); };
            Eigen::MatrixXcd ref(2, 2);
            for (Eigen::Index r = 0; r < 2; ++r)
                for (Eigen::Index c = 0; c < 2; ++c) {
                    ref(r, c) = oracle::panels([&](double s) { return std::exp(i * om_i * (s - dt)) * prop(s)(r, c); },
                                               std::max(0.0, dt - te / 2.0), dt + te / 2.0, 2);
                    if (dt < te / 2.0)
                        ref(r, c) += oracle::panels(
                            [&](double s) { return std::exp(i * (om_s * s - om_i * dt)) * prop(s)(r, c); }, 0.0,
                            te / 2.0 - dt, 2);
                }
            ref /= te;
            CHECK((m - ref).cwiseAbs().maxCoeff() < 1e-11);
        }
    }
    SUBCASE("zero entanglement time is the propagator") {
        Eigen::MatrixXd gen(1, 1);
        gen << -0.3;
        CHECK(std::abs(f_kernel_matrix(gen, 1.0, 2.0, kernel_field(0.0, 2.0))(0, 0) - std::exp(-0.6)) < 1e-15);
    }
}

// ---------------------------------------------------------------------------
// Finite entanglement time, rephasing

TEST_CASE("finite-Te rephasing converges to the short-Te rephasing share") {
    const double k = 0.05;
    auto b = Builder::dimer(k, 0.01);
    const auto w = grid(0.8, 1.3, 64);
    b.field.entanglement_time = 1e-4 / k;
    const auto bundle = b.build();
    const auto fin = signal_finite_te_rephasing(w, 10.0, bundle);
    const auto share = signal_short_te_phase(w, 10.0, bundle, Phase::Rephasing);
    CHECK(rel_err(fin.component(Component::SE), share.component(Component::SE)) < 1e-3);
    CHECK(rel_err(fin.component(Component::ESA), share.component(Component::ESA)) < 1e-3);
    CHECK(max_abs(fin.component(Component::GSB)) == 0.0);
}

TEST_CASE("finite-Te signal vanishes at the sinc zero") {
    auto b = Builder::dimer(0.05, 0.01);
    b.field.entanglement_time = 4.0;
    const auto bundle = b.build();
    const double w0 = bundle.field().idler_center + 2.0 * kPi / 4.0;
    const auto s = signal_finite_te_rephasing({1.05, w0}, 5.0, bundle);
    CHECK(std::abs(s.total[1]) < 1e-15 * std::abs(s.total[0]));
    CHECK(std::abs(s.total[0]) > 0.0);
}

TEST_CASE("finite-Te signal decays as exp(-lambda dt) at long delays") {
    const double rec = 0.03;
    auto b = Builder::two_level(1.0, 1.0, 0.1, rec);
    b.field.entanglement_time = 2.0;
    const auto bundle = b.build();
    std::vector<double> x, y;
    for (double dt = 5.0; dt <= 100.0; dt += 5.0) {
        const auto s = signal_finite_te_rephasing({1.05}, dt, bundle);
        x.push_back(dt);
        y.push_back(std::log(std::abs(s.total[0])));
    }
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope == doctest::Approx(-rec).epsilon(1e-9));
}

TEST_CASE("finite-Te rejects coherence transfer and honors pathway selection") {
    auto b = dimer_with_coherence();
    b.field.entanglement_time = 1.0;
    CHECK_THROWS_AS(signal_finite_te_rephasing({1.0}, 1.0, b.build()), Error);
    auto p = Builder::dimer(0.05, 0.01);
    p.field.entanglement_time = 1.0;
    const auto se_only = signal_finite_te_rephasing(grid(0.9, 1.2, 8), 3.0, p.build(), {Pathway::SE});
    CHECK(max_abs(se_only.component(Component::ESA)) == 0.0);
    CHECK(max_abs(se_only.component(Component::SE)) > 0.0);
}

// ---------------------------------------------------------------------------
// Brute-force quadrature

TEST_CASE("brute force: zero dipoles give a zero spectrum") {
    auto b = Builder::two_level(1.0, 0.0, 0.1, 0.01);
    b.field.entanglement_time = 0.5;
    const auto s = brute_force_signal(grid(0.8, 1.2, 5), 3.0, b.build());
    CHECK(max_abs(s.total) == 0.0);
}

TEST_CASE("brute force: precondition errors") {
    auto b = Builder::two_level(1.0, 1.0, 0.1, 0.01);
    try {
        brute_force_signal({1.0}, 1.0, b.build());
        FAIL("expected DeltaNotSamplable");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DeltaNotSamplable);
    }
    b.field.entanglement_time = 0.5;
    QuadratureOptions opt;
    opt.horizon_factor = 5.0;
    try {
        brute_force_signal({1.0}, 1.0, b.build(), {kAllKinds.begin(), kAllKinds.end()}, opt);
        FAIL("expected TruncationTooShort");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TruncationTooShort);
    }
}

TEST_CASE("brute force: rephasing SE and ESA at finite Te match the closed form") {
    auto b = Builder::dimer(0.05, 0.01);
    b.field.entanglement_time = 3.0;
    const auto bundle = b.build();
    const auto w = grid(0.95, 1.15, 6);
    for (double dt : {0.5, 8.0}) {
        const auto closed = signal_finite_te_rephasing(w, dt, bundle);
        const auto brute = brute_force_signal(w, dt, bundle, {{Pathway::SE, Phase::Rephasing}, {Pathway::ESA, Phase::Rephasing}});
        CHECK(rel_err(brute.component(Component::SE), closed.component(Component::SE)) < 1e-3);
        CHECK(rel_err(brute.component(Component::ESA), closed.component(Component::ESA)) < 1e-3);
    }
}

TEST_CASE("brute force: rephasing coherence pathways match the short-Te rephasing share") {
    // Rephasing pathways keep s2 centered on the delay independently of s1, so
    // no waiting-time factorization is involved and the match is limited by Te only.
    auto b = dimer_with_coherence();
    b.field.entanglement_time = 0.01;
    const auto bundle = b.build();
    const auto w = grid(0.98, 1.12, 5);
    const std::vector<CorrelatorKind> kinds{{Pathway::SE, Phase::Rephasing}, {Pathway::ESA, Phase::Rephasing}};
    for (double dt : {0.0, 6.0}) {
        const auto closed = signal_short_te_phase(w, dt, bundle, Phase::Rephasing);
        const auto brute = brute_force_signal(w, dt, bundle, kinds);
        for (auto c : {Component::SE, Component::ESA, Component::SEcoh, Component::ESAcoh})
            CHECK(rel_err(brute.component(c), closed.component(c)) < 1e-3);
    }
}

TEST_CASE("brute force: waiting-time factorization error shrinks with faster dephasing") {
    // The closed forms replace G(dt - s1) G(s1) by G(dt) G(s1); the oracle does not.
    const double rec = 0.05, dt = 4.0;
    std::vector<double> errors;
    for (double gamma : {0.1, 1.0}) {
        auto b = Builder::two_level(1.0, 1.0, gamma, rec);
        b.field.entanglement_time = 0.01;
        const auto bundle = b.build();
        const auto w = grid(1.0 - gamma, 1.0 + gamma, 5);
        const auto closed = signal_short_te_phase(w, dt, bundle, Phase::NonRephasing);
        const auto brute = brute_force_signal(w, dt, bundle, {{Pathway::SE, Phase::NonRephasing}});
        errors.push_back(rel_err(brute.component(Component::SE), closed.component(Component::SE)));
    }
    MESSAGE("factorization error: gamma=0.1 -> " << errors[0] << ", gamma=1 -> " << errors[1]);
    CHECK(errors[1] < errors[0]);
}

TEST_CASE("compute_signal dispatches on mode") {
    auto b = Builder::two_level(1.0, 1.0, 0.1, 0.01);
    b.field.entanglement_time = 0.2;
    const auto bundle = b.build();
    CHECK(compute_signal(SignalMode::ShortTe, {1.0}, 1.0, bundle).meta.mode == "short-te");
    CHECK(compute_signal(SignalMode::FiniteTeRephasing, {1.0}, 1.0, bundle).meta.mode == "finite-te");
    CHECK(compute_signal(SignalMode::Oracle, {1.0}, 1.0, bundle).meta.mode == "oracle");
}
