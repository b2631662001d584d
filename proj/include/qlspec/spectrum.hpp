#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace qlspec {

enum class Component : std::size_t { GSB = 0, SE, ESA, SEcoh, ESAcoh, Sc };

inline constexpr std::size_t kComponentCount = 6;
inline constexpr std::array<std::string_view, kComponentCount> kComponentNames{"GSB", "SE", "ESA",
                                                                              "SEcoh", "ESAcoh", "Sc"};

// Frequency-resolved transmission signal with its pathway breakdown.
struct Spectrum1D {
    struct Meta {
        double delay{0.0};
        double pump_frequency{0.0};
        double entanglement_time{0.0};
        std::string mode;
        bool sc_available{true};
        std::vector<std::string> notes;
    };

    std::vector<double> omega;
    std::vector<double> total;
    std::array<std::vector<double>, kComponentCount> components;
    Meta meta;

    Spectrum1D() = default;
    explicit Spectrum1D(std::vector<double> grid);

    std::size_t size() const noexcept { return omega.size(); }
    std::vector<double>& component(Component c) { return components[static_cast<std::size_t>(c)]; }
    const std::vector<double>& component(Component c) const { return components[static_cast<std::size_t>(c)]; }

    // total = sum of components at every grid point.
    void finalize();
};

// Throws InvalidGrid unless the grid is nonempty, finite and strictly increasing.
void check_grid(const std::vector<double>& grid, std::string_view what);

// n evenly spaced points on [lo, hi], endpoints included.
std::vector<double> linspace(double lo, double hi, std::size_t n);

}  // namespace qlspec
