#pragma once

#include <string>

#include "odenet/controls.hpp"
#include "odenet/resnet.hpp"

namespace odenet {

// JSON (de)serialization. Keys are emitted sorted and doubles use the
// shortest round-tripping decimal form, so save -> load -> save is
// byte-identical and loaded values are bitwise equal to the saved ones.

std::string controls_to_json(const NeuronControls& c);
NeuronControls controls_from_json(const std::string& text);

std::string resnet_to_json(const ResNetModel& m);
ResNetModel resnet_from_json(const std::string& text);

// Factory used by config loading; power and valid_radius only apply to the
// truncated power activation. Throws ConfigError on unknown names.
Activation activation_from_name(const std::string& name, int power = 2,
                                double valid_radius = 1.0);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace odenet
