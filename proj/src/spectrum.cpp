#include "qlspec/spectrum.hpp"

#include <cmath>
#include <string>

#include "qlspec/error.hpp"

namespace qlspec {

Spectrum1D::Spectrum1D(std::vector<double> grid) : omega(std::move(grid)) {
    total.assign(omega.size(), 0.0);
    for (auto& c : components) c.assign(omega.size(), 0.0);
}

void Spectrum1D::finalize() {
    total.assign(omega.size(), 0.0);
    for (std::size_t i = 0; i < omega.size(); ++i) {
        double sum = 0.0;
        for (const auto& c : components) sum += c[i];
        total[i] = sum;
    }
}

void check_grid(const std::vector<double>& grid, std::string_view what) {
    if (grid.empty()) throw Error(ErrorCode::InvalidGrid, std::string(what) + " is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i])) throw Error(ErrorCode::InvalidGrid, std::string(what) + " has a non-finite value");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw Error(ErrorCode::InvalidGrid, std::string(what) + " must be strictly increasing");
    }
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
    out[n - 1] = hi;
    return out;
}

}  // namespace qlspec
