#pragma once

#include <optional>
#include <string>
#include <vector>

namespace chaosctl {

struct Preset {
    std::string id;
    std::string description;
    /// Subcommand followed by its flags.
    std::vector<std::string> args;
};

const std::vector<Preset>& presets();
std::optional<Preset> find_preset(const std::string& id);

} // namespace chaosctl
