#include "qlspec/signal_engine.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qlspec/expm.hpp"
#include "qlspec/parallel.hpp"

namespace qlspec {

std::string_view to_string(SignalMode mode) {
    switch (mode) {
        case SignalMode::ShortTe: return "short-te";
        case SignalMode::FiniteTeRephasing: return "finite-te";
        case SignalMode::Oracle: return "oracle";
    }
    return "unknown";
}

namespace {

constexpr cplx kI{0.0, 1.0};

void require_delay(double delay) {
    if (!(delay >= 0.0)) throw Error(ErrorCode::NegativeTime, "delay must be >= 0");
}

double zeta_squared(const ValidatedBundle& b) {
    const double z = b.field().conversion_scale;
    return z * z;
}

Spectrum1D make_spectrum(const std::vector<double>& grid, double delay, const ValidatedBundle& b, SignalMode mode) {
    check_grid(grid, "omega grid");
    Spectrum1D out(grid);
    out.meta.delay = delay;
    out.meta.pump_frequency = b.field().pump_frequency;
    out.meta.entanglement_time = mode == SignalMode::ShortTe ? 0.0 : b.field().entanglement_time;
    out.meta.mode = std::string(to_string(mode));
    return out;
}

void scale_all(Spectrum1D& s, double factor) {
    for (auto& c : s.components)
        for (double& v : c) v *= factor;
}

// Per-frequency transforms of the optical coherences.
struct OpticalTransforms {
    std::vector<cplx> ge_probe;   // G_{a0}[w]
    std::vector<cplx> ge_pump;    // G_{a0}[wp - w]
    Eigen::MatrixXcd ef_probe;    // G_{g a}[w]

    OpticalTransforms(const Propagator& prop, const ExcitonSystem& sys, double omega, double pump_omega) {
        const std::size_t n = sys.n_single();
        ge_probe.resize(n);
        ge_pump.resize(n);
        for (std::size_t a = 0; a < n; ++a) {
            ge_probe[a] = prop.laplace(CoherenceIndex::single_ground(a), omega);
            ge_pump[a] = prop.laplace(CoherenceIndex::single_ground(a), pump_omega);
        }
        ef_probe = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(sys.n_double()), static_cast<Eigen::Index>(n));
        for (std::size_t g = 0; g < sys.n_double(); ++g)
            for (std::size_t a = 0; a < n; ++a)
                ef_probe(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(a)) =
                    prop.laplace(CoherenceIndex::double_single(g, a), omega);
    }
};

double mu_ef(const ExcitonSystem& s, std::size_t g, std::size_t a) {
    return s.dipoles_ef(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(a));
}

// Coherence pathway sums shared by the full signal and the per-phase shares.
// weight(a, b) supplies the pump-side factor for the |e_a><e_b| coherence.
template <typename Weight>
std::pair<double, double> coherence_terms(const ExcitonSystem& sys, const Propagator& prop,
                                          const OpticalTransforms& tr, const Eigen::MatrixXcd& block,
                                          Weight&& weight) {
    const auto& elems = prop.coherence_elements();
    cplx se = 0.0, esa = 0.0;
    for (std::size_t k = 0; k < elems.size(); ++k) {
        const auto [a, b] = elems[k];
        const cplx pump_side = weight(a, b) * sys.dipoles_ge[a] * sys.dipoles_ge[b];
        if (pump_side == 0.0) continue;
        for (std::size_t m = 0; m < elems.size(); ++m) {
            const auto [c, d] = elems[m];
            const cplx g2 = block(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
            if (g2 == 0.0) continue;
            se += sys.dipoles_ge[d] * sys.dipoles_ge[c] * tr.ge_probe[c] * pump_side * g2;
            for (std::size_t e = 0; e < sys.n_double(); ++e)
                esa += mu_ef(sys, e, d) * mu_ef(sys, e, c) *
                       tr.ef_probe(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(d)) * pump_side * g2;
        }
    }
    return {-kPathwayNormalization * se.real(), kPathwayNormalization * esa.real()};
}

}  // namespace

Spectrum1D signal_short_te(const std::vector<double>& omega_grid, double delay, const ValidatedBundle& bundle) {
    require_delay(delay);
    Spectrum1D out = make_spectrum(omega_grid, delay, bundle, SignalMode::ShortTe);
    const Propagator prop(bundle);
    const auto& sys = bundle.system();
    const std::size_t n = sys.n_single();
    const auto pop = prop.population(delay);
    const double ground = prop.ground(delay);
    const Eigen::MatrixXcd block = prop.coherence_block(delay);

    Eigen::MatrixXd kernel;
    if (prop.kernel_available()) {
        kernel = prop.waiting_kernel();
    } else {
        out.meta.sc_available = false;
        out.meta.notes.emplace_back("Sc omitted: waiting kernel diverges (no decay to the ground state)");
    }

    const double wp = bundle.field().pump_frequency;
    parallel_for(omega_grid.size(), [&](std::size_t i) {
        const double w = omega_grid[i];
        const OpticalTransforms tr(prop, sys, w, wp - w);
        double gsb = 0.0, se = 0.0, esa = 0.0, sc = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            const double mu_a2 = sys.dipoles_ge[a] * sys.dipoles_ge[a];
            const double lp = tr.ge_pump[a].real();
            for (std::size_t b = 0; b < n; ++b) {
                const double mu_b2 = sys.dipoles_ge[b] * sys.dipoles_ge[b];
                const double lb = tr.ge_probe[b].real();
                const double pba = pop(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a));
                const double lineshape = mu_b2 * mu_a2 * lb * lp;
                gsb -= lineshape * ground;
                se -= lineshape * pba;
                for (std::size_t e = 0; e < sys.n_double(); ++e) {
                    const double m = mu_ef(sys, e, b);
                    esa += m * m * mu_a2 *
                           tr.ef_probe(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(b)).real() * lp * pba;
                }
                if (out.meta.sc_available)
                    sc -= mu_b2 * mu_a2 * lb *
                          (tr.ge_probe[a].real() + kernel(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)));
            }
        }
        const auto [se_coh, esa_coh] = coherence_terms(sys, prop, tr, block, [&](std::size_t a, std::size_t b) {
            return tr.ge_pump[a] + std::conj(tr.ge_pump[b]);
        });
        out.component(Component::GSB)[i] = gsb;
        out.component(Component::SE)[i] = se;
        out.component(Component::ESA)[i] = esa;
        out.component(Component::SEcoh)[i] = se_coh;
        out.component(Component::ESAcoh)[i] = esa_coh;
        out.component(Component::Sc)[i] = sc;
    });
    scale_all(out, zeta_squared(bundle));
    out.finalize();
    return out;
}

Spectrum1D signal_short_te_phase(const std::vector<double>& omega_grid, double delay, const ValidatedBundle& bundle,
                                 Phase phase) {
    require_delay(delay);
    Spectrum1D out = make_spectrum(omega_grid, delay, bundle, SignalMode::ShortTe);
    out.meta.mode = std::string("short-te-") + std::string(to_string(phase));
    out.meta.sc_available = false;
    const Propagator prop(bundle);
    const auto& sys = bundle.system();
    const std::size_t n = sys.n_single();
    const auto pop = prop.population(delay);
    const double ground = prop.ground(delay);
    const Eigen::MatrixXcd block = prop.coherence_block(delay);
    const bool rephasing = phase == Phase::Rephasing;

    const double wp = bundle.field().pump_frequency;
    parallel_for(omega_grid.size(), [&](std::size_t i) {
        const double w = omega_grid[i];
        const OpticalTransforms tr(prop, sys, w, wp - w);
        cplx gsb = 0.0, se = 0.0, esa = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            const double mu_a2 = sys.dipoles_ge[a] * sys.dipoles_ge[a];
            const cplx pump = rephasing ? std::conj(tr.ge_pump[a]) : tr.ge_pump[a];
            for (std::size_t b = 0; b < n; ++b) {
                const double mu_b2 = sys.dipoles_ge[b] * sys.dipoles_ge[b];
                const double pba = pop(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a));
                const cplx term = mu_b2 * mu_a2 * tr.ge_probe[b] * pump;
                gsb += term * ground;
                se += term * pba;
                for (std::size_t e = 0; e < sys.n_double(); ++e) {
                    const double m = mu_ef(sys, e, b);
                    esa += m * m * mu_a2 * tr.ef_probe(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(b)) *
                           pump * pba;
                }
            }
        }
        const auto [se_coh, esa_coh] = coherence_terms(sys, prop, tr, block, [&](std::size_t a, std::size_t b) {
            return rephasing ? std::conj(tr.ge_pump[b]) : tr.ge_pump[a];
        });
        out.component(Component::GSB)[i] = -kPathwayNormalization * gsb.real();
        out.component(Component::SE)[i] = -kPathwayNormalization * se.real();
        out.component(Component::ESA)[i] = kPathwayNormalization * esa.real();
        out.component(Component::SEcoh)[i] = se_coh;
        out.component(Component::ESAcoh)[i] = esa_coh;
    });
    scale_all(out, zeta_squared(bundle));
    out.finalize();
    return out;
}

Spectrum1D difference_spectrum(const Spectrum1D& at_delay, const Spectrum1D& at_zero) {
    if (at_delay.omega != at_zero.omega)
        throw Error(ErrorCode::InvalidGrid, "difference spectrum needs identical frequency grids");
    Spectrum1D out(at_delay.omega);
    out.meta = at_delay.meta;
    out.meta.mode += "-difference";
    for (std::size_t c = 0; c < kComponentCount; ++c)
        for (std::size_t i = 0; i < out.size(); ++i)
            out.components[c][i] = at_delay.components[c][i] - at_zero.components[c][i];
    out.finalize();
    return out;
}

Spectrum1D difference_spectrum(const std::vector<double>& omega_grid, double delay, const ValidatedBundle& bundle,
                               SignalMode mode) {
    require_delay(delay);
    return difference_spectrum(compute_signal(mode, omega_grid, delay, bundle),
                               compute_signal(mode, omega_grid, 0.0, bundle));
}

// ---------------------------------------------------------------------------
// Finite entanglement time

namespace {

// integral_0^len exp(i z s) ds, stable for z -> 0.
cplx window_integral(cplx z, double len) {
    if (len <= 0.0) return 0.0;
    return len * std::exp(kI * z * (0.5 * len)) * sinc(z * (0.5 * len));
}

}  // namespace

cplx f_kernel_long_delay(const FKernelArgs& args) {
    const double te = args.field.entanglement_time;
    const double om_i = args.omega - args.field.idler_center;
    return sinc((om_i + kI * args.rate) * (0.5 * te)) * std::exp(-args.rate * args.delay);
}

cplx f_kernel_short_delay(const FKernelArgs& args) {
    const double te = args.field.entanglement_time;
    const double dt = args.delay;
    const double om_i = args.omega - args.field.idler_center;
    const double om_s = args.omega - args.field.signal_center;
    const cplx a = om_i + kI * args.rate;
    const cplx b = om_s + kI * args.rate;
    const cplx lead = std::exp(-kI * (om_i * dt)) / te;
    return lead * (window_integral(a, dt + 0.5 * te) + window_integral(b, 0.5 * te - dt));
}

cplx f_kernel(const FKernelArgs& args) {
    require_delay(args.delay);
    const double te = args.field.entanglement_time;
    if (!(te >= 0.0)) throw Error(ErrorCode::InvalidField, "entanglement time must be >= 0");
    if (te == 0.0) return std::exp(-args.rate * args.delay);
    return args.delay >= 0.5 * te ? f_kernel_long_delay(args) : f_kernel_short_delay(args);
}

Eigen::MatrixXcd f_kernel_matrix(const Eigen::MatrixXd& generator, double omega, double delay,
                                 const FieldConfig& field) {
    require_delay(delay);
    const double te = field.entanglement_time;
    if (te == 0.0) return expm(generator * delay).cast<cplx>();
    const Eigen::Index n = generator.rows();
    const double om_i = omega - field.idler_center;
    const double om_s = omega - field.signal_center;
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
    const Eigen::MatrixXcd gen = generator.cast<cplx>();

    // exp((L + i W) s) = exp(i W s) exp(L s); the start offset is split off so the
    // long waiting propagation never carries the optical phase through squaring.
    const double lo = std::max(0.0, delay - 0.5 * te);
    const double hi = delay + 0.5 * te;
    const auto [e1, int1] = expm_with_integral(Eigen::MatrixXcd(gen + kI * om_i * id), hi - lo);
    (void)e1;
    Eigen::MatrixXcd sum = std::exp(kI * (om_i * (lo - delay))) * (expm(generator * lo).cast<cplx>() * int1);
    if (delay < 0.5 * te) {
        const auto [e2, int2] = expm_with_integral(Eigen::MatrixXcd(gen + kI * om_s * id), 0.5 * te - delay);
        (void)e2;
        sum += std::exp(-kI * (om_i * delay)) * int2;
    }
    return sum / te;
}

Spectrum1D signal_finite_te_rephasing(const std::vector<double>& omega_grid, double delay,
                                      const ValidatedBundle& bundle, std::vector<Pathway> pathways) {
    require_delay(delay);
    if (bundle.model().has_coherence_transfer())
        throw Error(ErrorCode::UnsupportedModel,
                    "finite entanglement-time closed forms assume diagonal evolution; coherence transfer is active");
    Spectrum1D out = make_spectrum(omega_grid, delay, bundle, SignalMode::FiniteTeRephasing);
    out.meta.sc_available = false;
    out.meta.notes.emplace_back("rephasing population pathways only");
    const bool want_se = std::find(pathways.begin(), pathways.end(), Pathway::SE) != pathways.end();
    const bool want_esa = std::find(pathways.begin(), pathways.end(), Pathway::ESA) != pathways.end();

    const Propagator prop(bundle);
    const auto& sys = bundle.system();
    const auto& field = bundle.field();
    const std::size_t n = sys.n_single();
    const double wp = field.pump_frequency;
    const Eigen::MatrixXd gen = prop.population_generator();

    parallel_for(omega_grid.size(), [&](std::size_t i) {
        const double w = omega_grid[i];
        const OpticalTransforms tr(prop, sys, w, wp - w);
        const Eigen::MatrixXcd f = f_kernel_matrix(gen, w, delay, field);
        const double filt = sinc_filter(w - field.idler_center, field.entanglement_time);
        cplx se = 0.0, esa = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            const double mu_a2 = sys.dipoles_ge[a] * sys.dipoles_ge[a];
            const cplx pump = std::conj(tr.ge_pump[a]);
            for (std::size_t b = 0; b < n; ++b) {
                const cplx fba = f(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a));
                se += sys.dipoles_ge[b] * sys.dipoles_ge[b] * mu_a2 * tr.ge_probe[b] * pump * fba;
                for (std::size_t e = 0; e < sys.n_double(); ++e) {
                    const double m = mu_ef(sys, e, b);
                    esa += m * m * mu_a2 * tr.ef_probe(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(b)) *
                           pump * fba;
                }
            }
        }
        if (want_se) out.component(Component::SE)[i] = -kPathwayNormalization * filt * se.real();
        if (want_esa) out.component(Component::ESA)[i] = kPathwayNormalization * filt * esa.real();
    });
    scale_all(out, zeta_squared(bundle));
    out.finalize();
    return out;
}

// ---------------------------------------------------------------------------
// Brute-force quadrature

namespace {

enum class Waiting { Ground, Population, Coherence };

// One Liouville pathway: coefficient x G3(s3) x G2(s2) x G1(s1).
struct LiouvillePathway {
    Component component;
    cplx prefactor;  // i^3 for GSB/SE, -i^3 for ESA, times the dipole product
    CoherenceIndex s3;
    CoherenceIndex s1;
    Waiting waiting;
    Eigen::Index to{0};
    Eigen::Index from{0};
};

std::vector<LiouvillePathway> enumerate_pathways(CorrelatorKind kind, const ExcitonSystem& sys,
                                                 const Propagator& prop) {
    const std::size_t n = sys.n_single();
    const bool rephasing = kind.phase == Phase::Rephasing;
    // i^3 = -i
    const cplx i3 = -kI;
    auto first = [&](std::size_t a, std::size_t b) {
        return rephasing ? CoherenceIndex::ground_single(b) : CoherenceIndex::single_ground(a);
    };
    std::vector<LiouvillePathway> out;
    auto idx = [](std::size_t v) { return static_cast<Eigen::Index>(v); };

    switch (kind.pathway) {
        case Pathway::GSB:
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = 0; b < n; ++b) {
                    const double c = sys.dipoles_ge[a] * sys.dipoles_ge[a] * sys.dipoles_ge[b] * sys.dipoles_ge[b];
                    if (c == 0.0) continue;
                    // rephasing: |0><b| then |a><0|; non-rephasing: |a><0| then |b><0|
                    const auto s3 = rephasing ? CoherenceIndex::single_ground(a) : CoherenceIndex::single_ground(b);
                    const auto s1 = rephasing ? CoherenceIndex::ground_single(b) : CoherenceIndex::single_ground(a);
                    out.push_back({Component::GSB, i3 * c, s3, s1, Waiting::Ground, 0, 0});
                }
            break;
        case Pathway::SE:
        case Pathway::ESA: {
            const bool se = kind.pathway == Pathway::SE;
            const cplx sign = se ? i3 : -i3;
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = 0; b < n; ++b) {
                    const double pump = sys.dipoles_ge[a] * sys.dipoles_ge[a];
                    if (se) {
                        const double c = pump * sys.dipoles_ge[b] * sys.dipoles_ge[b];
                        if (c != 0.0)
                            out.push_back({Component::SE, sign * c, CoherenceIndex::single_ground(b), first(a, a),
                                           Waiting::Population, idx(b), idx(a)});
                    } else {
                        for (std::size_t e = 0; e < sys.n_double(); ++e) {
                            const double m = sys.dipoles_ef(idx(e), idx(b));
                            const double c = pump * m * m;
                            if (c != 0.0)
                                out.push_back({Component::ESA, sign * c, CoherenceIndex::double_single(e, b),
                                               first(a, a), Waiting::Population, idx(b), idx(a)});
                        }
                    }
                }
            const auto& elems = prop.coherence_elements();
            for (std::size_t k = 0; k < elems.size(); ++k) {
                const auto [a, b] = elems[k];
                for (std::size_t m = 0; m < elems.size(); ++m) {
                    const auto [c, d] = elems[m];
                    const double pump = sys.dipoles_ge[a] * sys.dipoles_ge[b];
                    if (se) {
                        const double coef = pump * sys.dipoles_ge[c] * sys.dipoles_ge[d];
                        if (coef != 0.0)
                            out.push_back({Component::SEcoh, sign * coef, CoherenceIndex::single_ground(c),
                                           first(a, b), Waiting::Coherence, idx(m), idx(k)});
                    } else {
                        for (std::size_t e = 0; e < sys.n_double(); ++e) {
                            const double coef = pump * sys.dipoles_ef(idx(e), idx(d)) * sys.dipoles_ef(idx(e), idx(c));
                            if (coef != 0.0)
                                out.push_back({Component::ESAcoh, sign * coef, CoherenceIndex::double_single(e, d),
                                               first(a, b), Waiting::Coherence, idx(m), idx(k)});
                        }
                    }
                }
            }
            break;
        }
        default: throw Error(ErrorCode::UnknownKind, "invalid pathway");
    }
    return out;
}

// Slowest decay rate of a generator (smallest -Re eigenvalue); eigenvalues only set the horizon.
template <typename Mat>
double slowest_decay(const Mat& gen) {
    if (gen.rows() == 0) return std::numeric_limits<double>::infinity();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(gen.template cast<cplx>());
    double slow = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k)
        slow = std::min(slow, -solver.eigenvalues()(k).real());
    return slow;
}

class Quadrature {
public:
    explicit Quadrature(const QuadratureOptions& opt) : opt_(opt) {}

    template <typename F>
    cplx integrate(F&& f, double lo, double hi) const {
        if (!(hi > lo)) return 0.0;
        return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, lo, hi, opt_.max_depth,
                                                                             opt_.rel_tol);
    }

    // Piecewise integration across interior breakpoints.
    template <typename F>
    cplx integrate(F&& f, double lo, double hi, std::vector<double> breaks) const {
        breaks.push_back(lo);
        breaks.push_back(hi);
        std::sort(breaks.begin(), breaks.end());
        cplx sum = 0.0;
        double prev = lo;
        for (double x : breaks) {
            if (x <= prev) continue;
            if (x > hi) break;
            sum += integrate(f, prev, x);
            prev = x;
        }
        return sum;
    }

private:
    QuadratureOptions opt_;
};

struct TermIntegrals {
    cplx d1;
    cplx autocorrelation;
};

}  // namespace

Spectrum1D brute_force_signal(const std::vector<double>& omega_grid, double delay, const ValidatedBundle& bundle,
                              const std::vector<CorrelatorKind>& kinds, const QuadratureOptions& options) {
    require_delay(delay);
    FieldConfig field = bundle.field();
    field.delay = delay;
    const double te = field.entanglement_time;
    if (!(te > 0.0))
        throw Error(ErrorCode::DeltaNotSamplable, "brute-force quadrature needs a finite entanglement time");
    if (!(options.horizon_factor > 0.0) || std::exp(-options.horizon_factor) > options.rel_tol)
        throw Error(ErrorCode::TruncationTooShort,
                    "integrand tail exp(-horizon_factor) exceeds the quadrature tolerance");

    Spectrum1D out = make_spectrum(omega_grid, delay, bundle, SignalMode::Oracle);
    const Propagator prop(bundle);
    const auto& sys = bundle.system();
    const double pop_decay = slowest_decay(prop.population_generator());
    const double coh_decay = slowest_decay(prop.coherence_generator());
    if (!(pop_decay > 0.0)) {
        out.meta.sc_available = false;
        out.meta.notes.emplace_back("Sc omitted: populations do not decay, waiting integral diverges");
    }

    std::vector<std::pair<CorrelatorKind, std::vector<LiouvillePathway>>> work;
    for (const auto& kind : kinds) work.emplace_back(kind, enumerate_pathways(kind, sys, prop));

    const Quadrature quad(options);
    const double hf = options.horizon_factor;
    const double half = 0.5 * te;

    // Contribution of one pathway at one frequency, split into D_1 and autocorrelation parts.
    auto pathway_integral = [&](CorrelatorKind kind, const LiouvillePathway& p, double w) -> TermIntegrals {
        const double h1 = hf / prop.decay(p.s1);
        const double h3 = hf / prop.decay(p.s3);
        const double w1 = prop.frequency(p.s1), g1 = prop.decay(p.s1);
        const double w3 = prop.frequency(p.s3), g3 = prop.decay(p.s3);
        auto prop1 = [&](double s) { return std::exp(-cplx(g1, w1) * s); };
        auto waiting = [&](double s) -> cplx {
            switch (p.waiting) {
                case Waiting::Ground: return 1.0;
                case Waiting::Population: return prop.population(s)(p.to, p.from);
                case Waiting::Coherence: return prop.coherence_block(s)(p.to, p.from);
            }
            return 0.0;
        };
        const double h2_decay = p.waiting == Waiting::Population ? pop_decay
                                : p.waiting == Waiting::Coherence ? coh_decay
                                                                  : 0.0;

        const cplx a3 = quad.integrate([&](double s3) { return std::exp(cplx(-g3, w - w3) * s3); }, 0.0, h3);

        enum class Term { First, Second, Auto };
        auto pick = [&](Term t, double s2, double s1) {
            const auto terms = four_body_terms(kind, w, 0.0, 0.0, s2, s1, field);
            switch (t) {
                case Term::First: return terms.first;
                case Term::Second: return terms.second;
                case Term::Auto: return terms.autocorrelation;
            }
            return cplx{0.0};
        };
        // Outer s2, inner s1 over [s1_lo(s2), s1_hi(s2)].
        auto region = [&](Term t, double s2_lo, double s2_hi, std::vector<double> breaks, auto s1_lo, auto s1_hi) {
            auto outer = [&](double s2) {
                const double lo = s1_lo(s2), hi = std::min(h1, s1_hi(s2));
                if (!(hi > lo)) return cplx{0.0};
                const cplx g2 = waiting(s2);
                if (g2 == 0.0) return cplx{0.0};
                return g2 * quad.integrate([&](double s1) { return prop1(s1) * pick(t, s2, s1); }, lo, hi);
            };
            return quad.integrate(outer, std::max(0.0, s2_lo), s2_hi, std::move(breaks));
        };
        auto zero = [](double) { return 0.0; };

        TermIntegrals out{};
        if (kind.phase == Phase::Rephasing) {
            out.d1 += region(Term::First, delay - half, delay + half, {}, zero, [&](double) { return h1; });
            if (delay < half)
                out.d1 += region(Term::Second, 0.0, half - delay, {}, zero, [&](double) { return h1; });
        } else {
            const double s2_start = std::max(0.0, delay - half - h1);
            out.d1 += region(Term::First, s2_start, delay + half, {delay - half},
                             [&](double s2) { return std::max(0.0, delay - half - s2); },
                             [&](double s2) { return delay + half - s2; });
            if (delay < half)
                out.d1 += region(Term::Second, 0.0, half - delay, {}, zero,
                                 [&](double s2) { return half - delay - s2; });
        }

        if (kind.pathway == Pathway::GSB && kind.phase == Phase::Rephasing) {
            out.autocorrelation += region(Term::Auto, 0.0, te, {}, zero, [&](double s2) { return te - s2; });
        } else if (kind.pathway == Pathway::GSB) {
            // delta(s2) at the lower integration limit carries half its weight.
            out.autocorrelation += 0.5 * waiting(0.0) *
                                   quad.integrate(
                                       [&](double s1) {
                                           return prop1(s1) *
                                                  four_body_terms(kind, w, 0.0, 0.0, 0.0, s1, field).delta_s2_coefficient;
                                       },
                                       0.0, h1);
        } else if (kind.pathway == Pathway::SE && h2_decay > 0.0) {
            const double h2 = hf / h2_decay;
            out.autocorrelation += region(Term::Auto, 0.0, h2, {}, zero, [&](double) { return te; });
        }
        out.d1 *= a3 * p.prefactor;
        out.autocorrelation *= a3 * p.prefactor;
        return out;
    };

    parallel_for(omega_grid.size(), [&](std::size_t i) {
        const double w = omega_grid[i];
        for (const auto& [kind, pathways] : work) {
            for (const auto& p : pathways) {
                const auto r = pathway_integral(kind, p, w);
                out.component(p.component)[i] += kPathwayNormalization * r.d1.imag();
                out.component(Component::Sc)[i] += kPathwayNormalization * r.autocorrelation.imag();
            }
        }
    });
    scale_all(out, zeta_squared(bundle));
    out.finalize();
    return out;
}

Spectrum1D compute_signal(SignalMode mode, const std::vector<double>& omega_grid, double delay,
                          const ValidatedBundle& bundle) {
    switch (mode) {
        case SignalMode::ShortTe: return signal_short_te(omega_grid, delay, bundle);
        case SignalMode::FiniteTeRephasing: return signal_finite_te_rephasing(omega_grid, delay, bundle);
        case SignalMode::Oracle: return brute_force_signal(omega_grid, delay, bundle);
    }
    throw Error(ErrorCode::UnsupportedModel, "unknown signal mode");
}

}  // namespace qlspec
