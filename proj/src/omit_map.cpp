#include "omx/spectra.hpp"

#include <omp.h>

namespace omx {

std::vector<double> omit_map_serial(const Device& device, double n_c, std::span<const double> detunings,
                                    std::span<const double> probe_grid)
{
    const std::size_t cols = probe_grid.size();
    std::vector<double> out(detunings.size() * cols);
    for (std::size_t row = 0; row < detunings.size(); ++row) {
        for (std::size_t col = 0; col < cols; ++col) {
            out[row * cols + col] = std::abs(omit_response(device, n_c, detunings[row], probe_grid[col]));
        }
    }
    return out;
}

std::vector<double> omit_map(const Device& device, double n_c, std::span<const double> detunings,
                             std::span<const double> probe_grid, int num_threads)
{
    const std::size_t cols = probe_grid.size();
    const auto rows = static_cast<std::ptrdiff_t>(detunings.size());
    std::vector<double> out(detunings.size() * cols);
    if (num_threads <= 0) num_threads = omp_get_max_threads();

#pragma omp parallel for schedule(static) num_threads(num_threads)
    for (std::ptrdiff_t row = 0; row < rows; ++row) {
        const double detuning = detunings[static_cast<std::size_t>(row)];
        double* dst = out.data() + static_cast<std::size_t>(row) * cols;
        for (std::size_t col = 0; col < cols; ++col) {
            dst[col] = std::abs(omit_response(device, n_c, detuning, probe_grid[col]));
        }
    }
    return out;
}

} // namespace omx
