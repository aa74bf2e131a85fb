#include "omx/presets.hpp"

#include "omx/io.hpp"
#include "omx/units.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

namespace omx {

std::optional<Device> builtin_device(std::string_view name)
{
    if (name == "A") {
        return Device(OpticalMode::from_hz(191.7e12, 0.8e9, 288e6), MechanicalMode::from_hz(7.436e9, 206e3),
                      angular_from_hz(901e3), "A", angular_from_hz(860e3));
    }
    if (name == "B") {
        return Device(OpticalMode::from_hz(193.9e12, 1.1e9, 196e6), MechanicalMode::from_hz(7.259e9, 715e3),
                      angular_from_hz(889e3), "B");
    }
    return std::nullopt;
}

std::vector<std::string> builtin_device_names()
{
    return {"A", "B"};
}

std::optional<std::filesystem::path> preset_dir()
{
    const char* env = std::getenv("OMX_PRESET_DIR");
    if (env == nullptr || *env == '\0') return std::nullopt;
    return std::filesystem::path(env);
}

Device device_preset(std::string_view name)
{
    if (auto dir = preset_dir()) {
        const auto path = *dir / (std::string(name) + ".json");
        if (std::filesystem::exists(path)) {
            std::ifstream in(path);
            return device_from_json(nlohmann::json::parse(in));
        }
    }
    if (auto d = builtin_device(name)) return *d;
    throw UnknownPreset(std::string(name));
}

std::vector<std::string> device_preset_names()
{
    auto names = builtin_device_names();
    if (auto dir = preset_dir(); dir && std::filesystem::is_directory(*dir)) {
        for (const auto& entry : std::filesystem::directory_iterator(*dir)) {
            if (entry.path().extension() == ".json") names.push_back(entry.path().stem().string());
        }
    }
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    return names;
}

} // namespace omx
