#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gbpf/field.hpp"
#include "gbpf/process.hpp"

namespace gbpf {

enum class PresetKind { Process, Field };

// A ready-made configuration. Latent probabilities are the exact masses of the
// chosen sets rather than rounded values.
struct Preset {
  std::string name;
  std::string description;
  PresetKind kind = PresetKind::Process;
  std::optional<ProcessSpec> process;
  std::optional<FieldSpec> field;
  // Built without the validity gate; the report is kept on the model.
  bool unchecked = false;
  // Derived quantities worth printing next to the run (exact p, factors).
  std::vector<std::string> notes;
};

inline constexpr std::int64_t kPresetLength = 2000;
inline constexpr std::int64_t kPresetExtent = 100;

// Throws InvalidArgument for unknown names.
Preset preset(std::string_view name);
std::vector<std::string> preset_names();

}  // namespace gbpf
