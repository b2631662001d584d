#include "qlspec/propagator.hpp"

#include <cmath>
#include <string>

#include "qlspec/expm.hpp"

namespace qlspec {

namespace {

// True when every population reaches a state with ground recovery > 0.
bool all_populations_decay(const Eigen::MatrixXd& gen, const std::vector<double>& recovery) {
    const auto n = static_cast<std::size_t>(gen.rows());
    std::vector<bool> drains(n, false);
    for (std::size_t a = 0; a < n; ++a) drains[a] = recovery[a] > 0.0;
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t a = 0; a < n; ++a) {
            if (drains[a]) continue;
            for (std::size_t b = 0; b < n; ++b) {
                if (b != a && drains[b] && gen(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) > 0.0) {
                    drains[a] = true;
                    changed = true;
                    break;
                }
            }
        }
    }
    for (bool d : drains)
        if (!d) return false;
    return true;
}

void require_nonnegative(double t) {
    if (!(t >= 0.0)) throw Error(ErrorCode::NegativeTime, "propagation time must be >= 0, got " + std::to_string(t));
}

}  // namespace

Propagator::Propagator(const ValidatedBundle& bundle)
    : n_single_(bundle.system().n_single()),
      single_energies_(bundle.system().single_energies),
      double_energies_(bundle.system().double_energies),
      dephasing_ge_(bundle.model().dephasing_ge),
      dephasing_ef_(bundle.model().dephasing_ef),
      generator_(bundle.model().population_generator()) {
    const auto& model = bundle.model();
    recovery_ = Eigen::Map<const Eigen::RowVectorXd>(model.ground_recovery.data(),
                                                     static_cast<Eigen::Index>(model.ground_recovery.size()));
    kernel_available_ = all_populations_decay(generator_, model.ground_recovery);

    for (const auto& c : model.intra_coherences) {
        coherence_elements_.emplace_back(c.a, c.b);
        coherence_frequency_.push_back(*c.frequency);
        coherence_decay_.push_back(c.decay);
        coherence_elements_.emplace_back(c.b, c.a);
        coherence_frequency_.push_back(-*c.frequency);
        coherence_decay_.push_back(c.decay);
    }
    const auto m = static_cast<Eigen::Index>(coherence_elements_.size());
    coherence_generator_ = Eigen::MatrixXcd::Zero(m, m);
    for (Eigen::Index k = 0; k < m; ++k)
        coherence_generator_(k, k) = -cplx(coherence_decay_[static_cast<std::size_t>(k)],
                                           coherence_frequency_[static_cast<std::size_t>(k)]);
    for (const auto& t : model.coherence_transfer) {
        // rho is Hermitian, so |a><b| -> |c><d| implies |b><a| -> |d><c|.
        const int from = coherence_slot(t.from_a, t.from_b);
        const int to = coherence_slot(t.to_a, t.to_b);
        const int from_c = coherence_slot(t.from_b, t.from_a);
        const int to_c = coherence_slot(t.to_b, t.to_a);
        coherence_generator_(to, from) += t.rate;
        coherence_generator_(to_c, from_c) += t.rate;
        has_transfer_ = true;
    }
}

int Propagator::coherence_slot(std::size_t a, std::size_t b) const noexcept {
    for (std::size_t k = 0; k < coherence_elements_.size(); ++k)
        if (coherence_elements_[k].first == a && coherence_elements_[k].second == b) return static_cast<int>(k);
    return -1;
}

Eigen::MatrixXd Propagator::population(double t) const {
    require_nonnegative(t);
    const Eigen::Index n = generator_.rows();
    if (t == 0.0) return Eigen::MatrixXd::Identity(n, n);

    // Scaling and squaring that carries the probability lost to the ground state
    // alongside P. Each column is re-closed through its dominant entry, so
    // 1^T P + loss = 1^T holds to rounding however many squarings are needed.
    const double norm = (generator_ * t).cwiseAbs().colwise().sum().maxCoeff();
    const int squarings = norm > 0.5 ? static_cast<int>(std::ceil(std::log2(norm / 0.5))) : 0;
    const auto [step, step_integral] = expm_with_integral(generator_, std::ldexp(t, -squarings));
    Eigen::MatrixXd p = step;
    Eigen::RowVectorXd loss = (recovery_ * step_integral).cwiseMax(0.0);

    auto close_columns = [&] {
        for (Eigen::Index a = 0; a < n; ++a) {
            const double kept = 1.0 - loss(a);
            if (kept < 0.5) continue;  // mostly decayed; nothing left to conserve
            Eigen::Index top = 0;
            p.col(a).maxCoeff(&top);
            p(top, a) = 0.0;
            p(top, a) = kept - p.col(a).sum();
        }
    };
    close_columns();
    for (int k = 0; k < squarings; ++k) {
        loss += loss * p;
        p = (p * p).eval();
        close_columns();
    }
    return p;
}

double Propagator::ground(double t) const {
    require_nonnegative(t);
    return 1.0;
}

double Propagator::frequency(const CoherenceIndex& idx) const {
    auto energy = [&](Manifold m, std::size_t i) -> double {
        switch (m) {
            case Manifold::Ground: return 0.0;
            case Manifold::Single:
                if (i < n_single_) return single_energies_[i];
                break;
            case Manifold::Double:
                if (i < double_energies_.size()) return double_energies_[i];
                break;
        }
        throw Error(ErrorCode::UnknownCoherence, "state index out of range");
    };
    if (idx.ket_manifold == Manifold::Single && idx.bra_manifold == Manifold::Single) {
        const int slot = coherence_slot(idx.ket, idx.bra);
        if (slot < 0) throw Error(ErrorCode::UnknownCoherence, "intra-manifold coherence is not registered");
        return coherence_frequency_[static_cast<std::size_t>(slot)];
    }
    return energy(idx.ket_manifold, idx.ket) - energy(idx.bra_manifold, idx.bra);
}

double Propagator::decay(const CoherenceIndex& idx) const {
    const auto km = idx.ket_manifold;
    const auto bm = idx.bra_manifold;
    if ((km == Manifold::Single && bm == Manifold::Ground) || (km == Manifold::Ground && bm == Manifold::Single)) {
        const std::size_t a = km == Manifold::Single ? idx.ket : idx.bra;
        if (a < n_single_) return dephasing_ge_[a];
    } else if ((km == Manifold::Double && bm == Manifold::Single) || (km == Manifold::Single && bm == Manifold::Double)) {
        const std::size_t g = km == Manifold::Double ? idx.ket : idx.bra;
        const std::size_t a = km == Manifold::Double ? idx.bra : idx.ket;
        if (g < double_energies_.size() && a < n_single_)
            return dephasing_ef_(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(a));
    } else if (km == Manifold::Single && bm == Manifold::Single) {
        const int slot = coherence_slot(idx.ket, idx.bra);
        if (slot >= 0) return coherence_decay_[static_cast<std::size_t>(slot)];
    }
    throw Error(ErrorCode::UnknownCoherence, "coherence is not part of the model");
}

cplx Propagator::coherence(const CoherenceIndex& idx, double t) const { return coherence(idx, idx, t); }

cplx Propagator::coherence(const CoherenceIndex& to, const CoherenceIndex& from, double t) const {
    require_nonnegative(t);
    const bool intra = to.ket_manifold == Manifold::Single && to.bra_manifold == Manifold::Single &&
                       from.ket_manifold == Manifold::Single && from.bra_manifold == Manifold::Single;
    if (intra && has_transfer_) {
        const int i = coherence_slot(to.ket, to.bra);
        const int j = coherence_slot(from.ket, from.bra);
        if (i < 0 || j < 0) throw Error(ErrorCode::UnknownCoherence, "intra-manifold coherence is not registered");
        return coherence_block(t)(i, j);
    }
    const double w = frequency(from);
    const double g = decay(from);
    if (!(to == from)) {
        (void)frequency(to);
        return 0.0;
    }
    return std::exp(-cplx(g, w) * t);
}

cplx Propagator::laplace(const CoherenceIndex& idx, double omega) const {
    const double g = decay(idx);
    if (g <= 0.0) throw Error(ErrorCode::ZeroDephasing, "Fourier-Laplace transform needs a positive decay rate");
    return 1.0 / cplx(g, frequency(idx) - omega);
}

double Propagator::lorentzian(const CoherenceIndex& idx, double omega) const {
    const double g = decay(idx);
    if (g <= 0.0) throw Error(ErrorCode::ZeroDephasing, "Fourier-Laplace transform needs a positive decay rate");
    const double d = omega - frequency(idx);
    return g / (g * g + d * d);
}

Eigen::MatrixXd Propagator::waiting_kernel() const {
    if (!kernel_available_)
        throw Error(ErrorCode::DivergentKernel, "a single-manifold population never returns to the ground state");
    const Eigen::MatrixXd k = -generator_.partialPivLu().solve(Eigen::MatrixXd::Identity(generator_.rows(), generator_.cols()));
    return k.cwiseMax(0.0);
}

Eigen::MatrixXcd Propagator::coherence_block(double t) const {
    require_nonnegative(t);
    return expm(Eigen::MatrixXcd(coherence_generator_ * t));
}

}  // namespace qlspec
