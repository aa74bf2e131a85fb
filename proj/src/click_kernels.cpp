#include "omx/pulsed.hpp"

#include "omx/diagnostics.hpp"

#include <omp.h>

#include <algorithm>
#include <random>
#include <sstream>

namespace omx {

namespace {

// Independent stream for block `block` of a run seeded with `seed`.
std::mt19937_64 block_engine(std::uint64_t seed, std::uint64_t block)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
                      0x6f6d78u};
    return std::mt19937_64(seq);
}

struct RunPlan {
    double p_s;
    double n_m;
    double signal_mean;
    double dark_mean;
    double tau;
    double window;
    ClickLabel signal_label;
    std::uint64_t n_pulses;

    std::uint64_t blocks() const { return (n_pulses + kPulsesPerBlock - 1) / kPulsesPerBlock; }
};

RunPlan plan_run(const Device& device, const PulseTrain& train, const DetectionChain& chain,
                 const HeatingKernel& kernel, double n_c)
{
    train.validate();
    chain.validate();
    const double p_s = scattering_probability(device, n_c, train.tau);
    const double n_m = steady_state_prepulse_occupancy(kernel, train.rep_rate).during_pulse;
    const bool blue = train.sideband == Sideband::blue;
    const double stokes_load = chain.eta * p_s * (n_m + 1.0);
    if (stokes_load > 0.5) {
        std::ostringstream msg;
        msg << "eta p_s (n+1) = " << stokes_load << " exceeds 0.5; sideband counts are no longer sparse";
        warn(msg.str());
    }
    return {p_s,
            n_m,
            chain.eta * p_s * (blue ? n_m + 1.0 : n_m),
            chain.dark_per_pulse(),
            train.tau,
            chain.window,
            blue ? ClickLabel::blue : ClickLabel::red,
            train.n_pulses};
}

void simulate_block(const RunPlan& plan, std::uint64_t seed, std::uint64_t block, std::vector<ClickRecord>& out)
{
    auto engine = block_engine(seed, block);
    std::poisson_distribution<std::uint32_t> signal(plan.signal_mean > 0.0 ? plan.signal_mean : 1.0);
    std::poisson_distribution<std::uint32_t> dark(plan.dark_mean > 0.0 ? plan.dark_mean : 1.0);
    std::uniform_real_distribution<double> signal_time(0.0, plan.tau);
    std::uniform_real_distribution<double> dark_time(0.0, plan.window);

    const std::uint64_t first = block * kPulsesPerBlock;
    const std::uint64_t last = std::min(plan.n_pulses, first + kPulsesPerBlock);
    for (std::uint64_t pulse = first; pulse < last; ++pulse) {
        const auto begin = out.size();
        const std::uint32_t n_signal = plan.signal_mean > 0.0 ? signal(engine) : 0;
        const std::uint32_t n_dark = plan.dark_mean > 0.0 ? dark(engine) : 0;
        for (std::uint32_t k = 0; k < n_signal; ++k) out.push_back({pulse, signal_time(engine), plan.signal_label});
        for (std::uint32_t k = 0; k < n_dark; ++k) out.push_back({pulse, dark_time(engine), ClickLabel::dark});
        if (out.size() - begin > 1) {
            std::sort(out.begin() + static_cast<std::ptrdiff_t>(begin), out.end(),
                      [](const ClickRecord& a, const ClickRecord& b) { return a.t < b.t; });
        }
    }
}

ClickSimulation finish(const RunPlan& plan, std::vector<ClickRecord> clicks)
{
    return {plan.p_s, plan.n_m, plan.signal_mean, std::move(clicks)};
}

} // namespace

ClickSimulation simulate_clicks_serial(const Device& device, const PulseTrain& train, const DetectionChain& chain,
                                       const HeatingKernel& kernel, double n_c, std::uint64_t seed)
{
    const auto plan = plan_run(device, train, chain, kernel, n_c);
    std::vector<ClickRecord> clicks;
    for (std::uint64_t b = 0; b < plan.blocks(); ++b) simulate_block(plan, seed, b, clicks);
    return finish(plan, std::move(clicks));
}

ClickSimulation simulate_clicks(const Device& device, const PulseTrain& train, const DetectionChain& chain,
                                const HeatingKernel& kernel, double n_c, std::uint64_t seed, int num_threads)
{
    const auto plan = plan_run(device, train, chain, kernel, n_c);
    const auto blocks = static_cast<std::ptrdiff_t>(plan.blocks());
    std::vector<std::vector<ClickRecord>> per_block(static_cast<std::size_t>(blocks));
    if (num_threads <= 0) num_threads = omp_get_max_threads();

#pragma omp parallel for schedule(dynamic, 4) num_threads(num_threads)
    for (std::ptrdiff_t b = 0; b < blocks; ++b) {
        simulate_block(plan, seed, static_cast<std::uint64_t>(b), per_block[static_cast<std::size_t>(b)]);
    }

    std::size_t total = 0;
    for (const auto& v : per_block) total += v.size();
    std::vector<ClickRecord> clicks;
    clicks.reserve(total);
    for (auto& v : per_block) clicks.insert(clicks.end(), v.begin(), v.end());
    return finish(plan, std::move(clicks));
}

ClickCounts simulate_counts(double signal_per_pulse, double dark_per_pulse, std::uint64_t n_pulses, std::uint64_t seed)
{
    if (!(signal_per_pulse >= 0.0 && dark_per_pulse >= 0.0)) {
        throw std::invalid_argument("mean counts must be non-negative");
    }
    ClickCounts counts;
    const std::uint64_t blocks = (n_pulses + kPulsesPerBlock - 1) / kPulsesPerBlock;
    for (std::uint64_t b = 0; b < blocks; ++b) {
        auto engine = block_engine(seed, b);
        const auto size = static_cast<double>(std::min(kPulsesPerBlock, n_pulses - b * kPulsesPerBlock));
        if (signal_per_pulse > 0.0) counts.signal += std::poisson_distribution<std::uint64_t>(size * signal_per_pulse)(engine);
        if (dark_per_pulse > 0.0) counts.dark += std::poisson_distribution<std::uint64_t>(size * dark_per_pulse)(engine);
    }
    return counts;
}

} // namespace omx
