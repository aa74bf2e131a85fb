#pragma once

#include "omx/om_core.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace omx {

class UnknownPreset : public std::invalid_argument {
public:
    explicit UnknownPreset(const std::string& name) : std::invalid_argument("unknown preset: " + name) {}
};

// Built-in measured devices "A" (D120, 3 K runs) and "B" (D122, mK pulsed runs).
// Device A defaults to the red-detuned g0 fit; the blue-detuned value is g0_alt.
std::optional<Device> builtin_device(std::string_view name);
std::vector<std::string> builtin_device_names();

// Directory named by OMX_PRESET_DIR, if set.
std::optional<std::filesystem::path> preset_dir();

// Looks in OMX_PRESET_DIR/<name>.json first, then the built-ins.
Device device_preset(std::string_view name);
std::vector<std::string> device_preset_names();

} // namespace omx
