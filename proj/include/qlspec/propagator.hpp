// propagator.hpp: matrix elements of the molecular time-evolution operator.
//
// Populations of the single manifold follow dP/dt = L P. Optical coherences
// (|e_a><0|, |f_g><e_a|) decay as exp(-(i w + gamma) t). Registered coherences
// inside the single manifold evolve under a small Liouvillian that may include
// coherence transfer.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "qlspec/core_model.hpp"

namespace qlspec {

using cplx = std::complex<double>;

enum class Manifold { Ground, Single, Double };

// Identifies the operator |ket><bra|.
struct CoherenceIndex {
    Manifold ket_manifold{Manifold::Single};
    std::size_t ket{0};
    Manifold bra_manifold{Manifold::Ground};
    std::size_t bra{0};

    static CoherenceIndex single_ground(std::size_t a) { return {Manifold::Single, a, Manifold::Ground, 0}; }
    static CoherenceIndex ground_single(std::size_t a) { return {Manifold::Ground, 0, Manifold::Single, a}; }
    static CoherenceIndex double_single(std::size_t g, std::size_t a) {
        return {Manifold::Double, g, Manifold::Single, a};
    }
    static CoherenceIndex intra(std::size_t a, std::size_t b) { return {Manifold::Single, a, Manifold::Single, b}; }

    CoherenceIndex conjugate() const { return {bra_manifold, bra, ket_manifold, ket}; }
    bool operator==(const CoherenceIndex&) const = default;
};

class Propagator {
public:
    explicit Propagator(const ValidatedBundle& bundle);

    // G_{bb<-aa}(t) as a matrix indexed (b, a).
    Eigen::MatrixXd population(double t) const;

    // The ground state is stationary: G_{00<-00}(t) = 1.
    double ground(double t) const;

    // Diagonal element G_{ab<-ab}(t) of a coherence.
    cplx coherence(const CoherenceIndex& idx, double t) const;

    // Element G_{to<-from}(t); nonzero off the diagonal only for intra-manifold transfer.
    cplx coherence(const CoherenceIndex& to, const CoherenceIndex& from, double t) const;

    // Oscillation frequency and decay rate of a coherence.
    double frequency(const CoherenceIndex& idx) const;
    double decay(const CoherenceIndex& idx) const;

    // G[w] = integral_0^inf exp(i w t) G(t) dt = 1 / (gamma + i (w_ab - w)).
    cplx laplace(const CoherenceIndex& idx, double omega) const;

    // Re G[w], a Lorentzian of height 1/gamma and half width gamma.
    double lorentzian(const CoherenceIndex& idx, double omega) const;

    // K_{ba} = integral_0^inf G_{bb<-aa}(s) ds = -(L)^-1. Throws DivergentKernel if some
    // population never leaves the single manifold.
    Eigen::MatrixXd waiting_kernel() const;
    bool kernel_available() const noexcept { return kernel_available_; }

    // Registered intra-manifold coherences, both orientations (a,b) and (b,a).
    const std::vector<std::pair<std::size_t, std::size_t>>& coherence_elements() const noexcept {
        return coherence_elements_;
    }
    // Position of |e_a><e_b| in coherence_elements(), or -1.
    int coherence_slot(std::size_t a, std::size_t b) const noexcept;

    const Eigen::MatrixXd& population_generator() const noexcept { return generator_; }
    const Eigen::MatrixXcd& coherence_generator() const noexcept { return coherence_generator_; }

    // exp(Lc t) over coherence_elements().
    Eigen::MatrixXcd coherence_block(double t) const;

    std::size_t n_single() const noexcept { return n_single_; }

private:
    std::size_t n_single_;
    std::vector<double> single_energies_;
    std::vector<double> double_energies_;
    std::vector<double> dephasing_ge_;
    Eigen::MatrixXd dephasing_ef_;
    Eigen::MatrixXd generator_;
    Eigen::RowVectorXd recovery_;
    bool kernel_available_{false};
    std::vector<std::pair<std::size_t, std::size_t>> coherence_elements_;
    std::vector<double> coherence_frequency_;
    std::vector<double> coherence_decay_;
    Eigen::MatrixXcd coherence_generator_;
    bool has_transfer_{false};
};

}  // namespace qlspec
