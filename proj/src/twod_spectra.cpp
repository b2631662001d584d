#include "qlspec/twod_spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qlspec/parallel.hpp"
#include "qlspec/propagator.hpp"
#include "qlspec/signal_engine.hpp"

namespace qlspec {

Spectrum2D absorptive_2d(const std::vector<double>& omega3_grid, double t2, const std::vector<double>& omega1_grid,
                         const ValidatedBundle& bundle) {
    check_grid(omega3_grid, "omega3 grid");
    check_grid(omega1_grid, "omega1 grid");
    if (!(t2 >= 0.0)) throw Error(ErrorCode::NegativeTime, "waiting time t2 must be >= 0");

    const Propagator prop(bundle);
    const auto& sys = bundle.system();
    const std::size_t n = sys.n_single();
    const auto n3 = static_cast<Eigen::Index>(omega3_grid.size());
    const auto n1 = static_cast<Eigen::Index>(omega1_grid.size());

    Spectrum2D out;
    out.omega1 = omega1_grid;
    out.omega3 = omega3_grid;
    out.t2 = t2;
    for (auto& c : out.components) c = Eigen::MatrixXd::Zero(n3, n1);

    const Eigen::MatrixXd pop = prop.population(t2);
    const double ground = prop.ground(t2);
    const Eigen::MatrixXcd block = prop.coherence_block(t2);
    const auto& elems = prop.coherence_elements();

    // The first-interval transforms depend on w1 only.
    Eigen::MatrixXcd g1(n1, static_cast<Eigen::Index>(n));
    for (Eigen::Index j = 0; j < n1; ++j)
        for (std::size_t a = 0; a < n; ++a)
            g1(j, static_cast<Eigen::Index>(a)) = prop.laplace(CoherenceIndex::single_ground(a), omega1_grid[j]);

    parallel_for(omega3_grid.size(), [&](std::size_t row) {
        const auto i = static_cast<Eigen::Index>(row);
        const double w3 = omega3_grid[row];
        std::vector<cplx> g3(n);
        for (std::size_t b = 0; b < n; ++b) g3[b] = prop.laplace(CoherenceIndex::single_ground(b), w3);
        Eigen::MatrixXcd g3ef(static_cast<Eigen::Index>(sys.n_double()), static_cast<Eigen::Index>(n));
        for (std::size_t e = 0; e < sys.n_double(); ++e)
            for (std::size_t b = 0; b < n; ++b)
                g3ef(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(b)) =
                    prop.laplace(CoherenceIndex::double_single(e, b), w3);

        for (Eigen::Index j = 0; j < n1; ++j) {
            double gsb = 0.0, se = 0.0, esa = 0.0;
            for (std::size_t a = 0; a < n; ++a) {
                const auto ia = static_cast<Eigen::Index>(a);
                const double first = sys.dipoles_ge[a] * sys.dipoles_ge[a] * g1(j, ia).real();
                for (std::size_t b = 0; b < n; ++b) {
                    const auto ib = static_cast<Eigen::Index>(b);
                    const double line = sys.dipoles_ge[b] * sys.dipoles_ge[b] * g3[b].real() * first;
                    gsb += line * ground;
                    se += line * pop(ib, ia);
                    for (std::size_t e = 0; e < sys.n_double(); ++e) {
                        const double m = sys.dipoles_ef(static_cast<Eigen::Index>(e), ib);
                        esa -= m * m * g3ef(static_cast<Eigen::Index>(e), ib).real() * first * pop(ib, ia);
                    }
                }
            }
            cplx se_coh = 0.0, esa_coh = 0.0;
            for (std::size_t k = 0; k < elems.size(); ++k) {
                const auto [a, b] = elems[k];
                const cplx pump = sys.dipoles_ge[a] * sys.dipoles_ge[b] *
                                  (g1(j, static_cast<Eigen::Index>(a)) + std::conj(g1(j, static_cast<Eigen::Index>(b))));
                for (std::size_t m = 0; m < elems.size(); ++m) {
                    const auto [c, d] = elems[m];
                    const cplx g2 = block(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
                    if (g2 == 0.0) continue;
                    se_coh += sys.dipoles_ge[c] * sys.dipoles_ge[d] * g3[c] * pump * g2;
                    for (std::size_t e = 0; e < sys.n_double(); ++e)
                        esa_coh += sys.dipoles_ef(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(d)) *
                                   sys.dipoles_ef(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(c)) *
                                   g3ef(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(d)) * pump * g2;
                }
            }
            out.component(Component2D::GSB)(i, j) = gsb;
            out.component(Component2D::SE)(i, j) = se;
            out.component(Component2D::ESA)(i, j) = esa;
            out.component(Component2D::SEcoh)(i, j) = kPathwayNormalization * se_coh.real();
            out.component(Component2D::ESAcoh)(i, j) = -kPathwayNormalization * esa_coh.real();
        }
    });

    out.values = Eigen::MatrixXd::Zero(n3, n1);
    for (const auto& c : out.components) out.values += c;
    return out;
}

namespace {

// Linear interpolation weights for x inside a strictly increasing grid; grid
// points are hit exactly.
std::optional<std::pair<std::size_t, double>> locate(const std::vector<double>& grid, double x) {
    const double scale = std::max({1.0, std::abs(grid.front()), std::abs(grid.back())});
    const double eps = 1e-12 * scale;
    if (x < grid.front() - eps || x > grid.back() + eps) return std::nullopt;
    auto it = std::lower_bound(grid.begin(), grid.end(), x - eps);
    auto k = static_cast<std::size_t>(it - grid.begin());
    if (k < grid.size() && std::abs(grid[k] - x) <= eps) return std::pair{k, 0.0};
    if (k == 0 || k >= grid.size()) return std::nullopt;
    const double frac = (x - grid[k - 1]) / (grid[k] - grid[k - 1]);
    return std::pair{k - 1, frac};
}

}  // namespace

Spectrum1D antidiagonal_cut(const Spectrum2D& spectrum, double pump_frequency) {
    std::vector<double> w3;
    std::vector<std::pair<Eigen::Index, std::pair<std::size_t, double>>> samples;
    for (std::size_t i = 0; i < spectrum.omega3.size(); ++i) {
        if (auto loc = locate(spectrum.omega1, pump_frequency - spectrum.omega3[i])) {
            w3.push_back(spectrum.omega3[i]);
            samples.emplace_back(static_cast<Eigen::Index>(i), *loc);
        }
    }
    if (w3.empty())
        throw Error(ErrorCode::LineOutsideGrid,
                    "anti-diagonal w1 + w3 = " + std::to_string(pump_frequency) + " misses the 2D grid");

    Spectrum1D out(w3);
    out.meta.delay = spectrum.t2;
    out.meta.pump_frequency = pump_frequency;
    out.meta.mode = "2d-antidiagonal";
    out.meta.sc_available = false;
    for (std::size_t c = 0; c < kComponent2DCount; ++c) {
        const auto& m = spectrum.components[c];
        for (std::size_t p = 0; p < samples.size(); ++p) {
            const auto [row, loc] = samples[p];
            const auto [k, frac] = loc;
            const auto col = static_cast<Eigen::Index>(k);
            double v = m(row, col);
            if (frac != 0.0) v = (1.0 - frac) * v + frac * m(row, col + 1);
            out.components[c][p] = v;
        }
    }
    out.finalize();
    return out;
}

std::vector<double> default_grid(const ValidatedBundle& bundle, double points_per_gamma) {
    const auto& sys = bundle.system();
    const auto& model = bundle.model();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double gamma = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < sys.n_single(); ++a) {
        lo = std::min(lo, sys.single_energies[a]);
        hi = std::max(hi, sys.single_energies[a]);
        gamma = std::min(gamma, model.dephasing_ge[a]);
        for (std::size_t g = 0; g < sys.n_double(); ++g) {
            lo = std::min(lo, sys.ef_frequency(g, a));
            hi = std::max(hi, sys.ef_frequency(g, a));
            gamma = std::min(gamma, model.dephasing_ef(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(a)));
        }
    }
    double wide = gamma;
    for (double g : model.dephasing_ge) wide = std::max(wide, g);
    lo -= 10.0 * wide;
    hi += 10.0 * wide;
    const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / gamma * points_per_gamma)) + 1;
    return linspace(lo, hi, std::max<std::size_t>(n, 2));
}

bool CorrespondenceReport::passed() const {
    return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.passed; });
}

CorrespondenceReport correspondence_check(const ValidatedBundle& bundle, const std::vector<double>& delays,
                                          const std::vector<double>& omega_grid,
                                          const CorrespondenceOptions& options) {
    if (delays.empty()) throw Error(ErrorCode::InvalidGrid, "correspondence check needs at least one delay");
    check_grid(omega_grid, "omega grid");
    const double wp = options.pump_override.value_or(bundle.field().pump_frequency);
    const double zeta2 = bundle.field().conversion_scale * bundle.field().conversion_scale;

    // w1 = wp - w, reversed so the grid increases; every point lies on the anti-diagonal.
    std::vector<double> omega1(omega_grid.rbegin(), omega_grid.rend());
    for (double& w : omega1) w = wp - w;
    const std::size_t n = omega_grid.size();
    auto diagonal = [&](const Spectrum2D& s, std::size_t i) { return s.values(static_cast<Eigen::Index>(i),
                                                                              static_cast<Eigen::Index>(n - 1 - i)); };

    const Spectrum1D base = signal_short_te(omega_grid, 0.0, bundle);
    const Spectrum2D base2d = absorptive_2d(omega_grid, 0.0, omega1, bundle);
    const double sign = options.negate_2d ? -1.0 : 1.0;

    CorrespondenceReport report;
    report.tolerance = options.tolerance;
    report.pump_frequency = wp;
    for (double dt : delays) {
        const Spectrum1D s1 = signal_short_te(omega_grid, dt, bundle);
        const Spectrum2D s2 = absorptive_2d(omega_grid, dt, omega1, bundle);
        CorrespondenceEntry e;
        e.delay = dt;
        for (std::size_t i = 0; i < n; ++i) {
            // Component-wise difference: Sc cancels exactly instead of through the total.
            double lhs = 0.0;
            for (std::size_t c = 0; c < kComponentCount; ++c) lhs += s1.components[c][i] - base.components[c][i];
            lhs /= zeta2;
            const double rhs = -sign * (diagonal(s2, i) - diagonal(base2d, i));
            const double dev = std::abs(lhs - rhs);
            if (dev > e.max_deviation || i == 0) {
                e.max_deviation = dev;
                e.at_omega = omega_grid[i];
            }
        }
        e.passed = e.max_deviation < options.tolerance;
        report.entries.push_back(e);
    }
    return report;
}

Eigen::MatrixXd pump_sweep(const ValidatedBundle& bundle, const std::vector<double>& pumps, double delay,
                           const std::vector<double>& omega_grid) {
    if (pumps.empty()) throw Error(ErrorCode::InvalidGrid, "pump sweep is empty");
    Eigen::MatrixXd out(static_cast<Eigen::Index>(pumps.size()), static_cast<Eigen::Index>(omega_grid.size()));
    const FieldConfig base = bundle.field();
    const double share = base.signal_center / (base.signal_center + base.idler_center);
    for (std::size_t p = 0; p < pumps.size(); ++p) {
        FieldConfig f = base;
        f.pump_frequency = pumps[p];
        f.signal_center = share * pumps[p];
        f.idler_center = pumps[p] - f.signal_center;
        const Spectrum1D d = difference_spectrum(omega_grid, delay, bundle.with_field(f), SignalMode::ShortTe);
        for (std::size_t i = 0; i < omega_grid.size(); ++i)
            out(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(i)) = d.total[i];
    }
    return out;
}

}  // namespace qlspec
