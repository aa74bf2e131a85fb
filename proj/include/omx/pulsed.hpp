#pragma once

#include "omx/om_core.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace omx {

enum class Sideband { red, blue };

struct PulseTrain {
    double tau = 80e-9;        // pulse length (s)
    double rep_rate = 188e3;   // Hz
    double peak_power = 7.4e-6; // on-chip W
    Sideband sideband = Sideband::blue;
    std::uint64_t n_pulses = 1;

    void validate() const;
    // Pump detuning for the configured sideband (-omega_m red, +omega_m blue).
    double detuning(const Device& device) const;
};

struct DetectionChain {
    double eta = 1.0;        // lumped sideband detection efficiency
    double dark_rate = 5.0;  // Hz
    double window = 80e-9;   // gate length (s)

    void validate() const;
    // Expected dark clicks per gate.
    double dark_per_pulse() const { return dark_rate * window; }
};

// Instantaneous kick of `delta` quanta at each pulse start, exponential
// relaxation with time constant tau_th towards n_base between pulses.
struct HeatingKernel {
    double delta = 0.0;
    double tau_th = 0.0; // s
    double n_base = 0.0;

    void validate() const;
};

enum class ClickLabel : std::uint8_t { red, blue, dark };

struct ClickRecord {
    std::uint64_t pulse_index = 0;
    double t = 0.0; // s since pulse start
    ClickLabel label = ClickLabel::dark;

    friend bool operator==(const ClickRecord&, const ClickRecord&) = default;
};

struct AsymmetryResult {
    double n_m = 0.0;
    double std_error = 0.0;
    double counts_blue = 0.0;
    double counts_red = 0.0;
    double dark_estimate = 0.0; // expected dark counts per run
    bool clamped = false;       // red rate was negative after dark subtraction
};

// Stokes probability 4 g0^2 n_c tau / kappa. Warns above 0.2.
double scattering_probability(const Device& device, double n_c, double tau);

struct PulseOccupancy {
    double before_pulse; // steady state just before a kick
    double during_pulse; // before_pulse + delta, the value a pulse samples
};

PulseOccupancy steady_state_prepulse_occupancy(const HeatingKernel& kernel, double rep_rate);

struct RateOccupancy {
    double rep_rate;
    double n_m;
};

// Least-squares (delta, tau_th) for fixed n_base; exact for two points.
HeatingKernel fit_heating_kernel(std::span<const RateOccupancy> points, double n_base);

// Pulses are simulated in blocks of this many; block b draws from a stream
// keyed by (seed, b), so the output does not depend on the thread count.
inline constexpr std::uint64_t kPulsesPerBlock = 4096;

struct ClickSimulation {
    double p_s = 0.0;
    double n_m = 0.0;               // occupancy sampled by every pulse
    double signal_per_pulse = 0.0;  // eta p_s (n+1) or eta p_s n
    std::vector<ClickRecord> clicks;
};

// Reference implementation: blocks processed in order on the calling thread.
ClickSimulation simulate_clicks_serial(const Device& device, const PulseTrain& train, const DetectionChain& chain,
                                       const HeatingKernel& kernel, double n_c, std::uint64_t seed);

// OpenMP over blocks. Bit-identical to the serial reference for any thread count.
ClickSimulation simulate_clicks(const Device& device, const PulseTrain& train, const DetectionChain& chain,
                                const HeatingKernel& kernel, double n_c, std::uint64_t seed, int num_threads = 0);

struct ClickCounts {
    std::uint64_t signal = 0;
    std::uint64_t dark = 0;
    std::uint64_t total() const { return signal + dark; }
};

// Totals only, drawn per block as Poisson(block_size * mean): same
// distribution as summing simulate_clicks, without per-click records.
ClickCounts simulate_counts(double signal_per_pulse, double dark_per_pulse, std::uint64_t n_pulses,
                            std::uint64_t seed);

AsymmetryResult estimate_occupancy(double counts_blue, double counts_red, double n_pulses_each,
                                   const DetectionChain& chain);

// Every click of a run counts (dark clicks are indistinguishable in practice).
AsymmetryResult estimate_occupancy(std::span<const ClickRecord> blue_run, std::span<const ClickRecord> red_run,
                                   double n_pulses_each, const DetectionChain& chain);

struct Histogram {
    std::vector<double> bin_start; // s
    double bin_width = 0.0;
    std::vector<std::uint64_t> counts_blue;
    std::vector<std::uint64_t> counts_red;
    std::vector<double> rate_blue; // Hz
    std::vector<double> rate_red;
};

// Bins cover [0, window]; a click at exactly `window` lands in the last bin.
// Counts are normalized by n_pulses * bin_width.
Histogram histogram(std::span<const ClickRecord> blue_run, std::span<const ClickRecord> red_run, double bin_width,
                    double window, double n_pulses);

} // namespace omx
