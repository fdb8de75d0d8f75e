#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gbpf/covariance.hpp"
#include "gbpf/field.hpp"
#include "gbpf/gbp.hpp"
#include "gbpf/marginal.hpp"
#include "gbpf/process.hpp"
#include "gbpf/support_set.hpp"

namespace gbpf::cli {

using nlohmann::json;

// Parsed config file plus command line flags. Flags win over the file.
struct RunConfig {
  std::optional<std::string> preset;
  std::optional<std::uint64_t> seed;
  std::size_t replicates = 1;
  bool unchecked = false;
  bool svg = false;
  std::optional<std::filesystem::path> out;
  // Raw blocks, validated when a command resolves them.
  json gbp;
  json process;
  json field;
  json analyze;
  json overrides;

  json to_json() const;
};

RunConfig parse_config(const json& doc);
RunConfig load_config(const std::filesystem::path& path);

// Numbers, or the strings "inf", "+inf", "-inf".
double parse_real(const json& v, const std::string& where);

CovarianceFunction parse_covariance(const json& v);
json covariance_to_json(const CovarianceFunction& cov);

Distribution1D parse_distribution(const json& v);
Marginal parse_marginal(const json& v);

// {"intervals": [[lo, hi], ...]}, {"integers": [...], "shares": [...]},
// {"boxes": [[[lo, hi], ...], ...], "complement": false}, or a bare list of pairs.
SupportSet parse_set(const json& v);

struct GbpSetup {
  GbpModel model;
  std::int64_t n;
  std::string label;
};

// The latent model: a gbp block, a process block, or the preset's latent model.
// Models are built unchecked; callers apply the validity gate themselves.
GbpSetup resolve_gbp(const RunConfig& config);

struct ProcessSetup {
  ProcessSpec spec;
  std::string label;
  std::size_t max_lag;
};

ProcessSetup resolve_process(const RunConfig& config);

struct FieldSetup {
  FieldSpec spec;
  std::string label;
  std::vector<std::int64_t> window;
};

FieldSetup resolve_field(const RunConfig& config);

// Every latent model in the config (one per field axis), for the check command.
std::vector<GbpSetup> resolve_all_models(const RunConfig& config);

inline constexpr std::size_t kDefaultMaxLag = 50;
inline constexpr std::int64_t kDefaultWindow = 25;

}  // namespace gbpf::cli
