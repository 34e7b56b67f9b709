#pragma once

// Experiment configuration: a flat `key = value` text format.
//
//   # comment
//   preset       = nonperiodic-a          built-in starting point, applied first
//   domain       = -1 1 -1 1              xmin xmax ymin ymax
//   perforations = none
//                | periodic <nx> <ny> <eps> [<shift_x> <shift_y>]
//                | random <n> <eps> <seed>
//                | file <path>
//   diffusion    = 0.03
//   velocity     = zero | recirculating | const <wx> <wy>
//   source       = zero | sinsin | bands | const <c>
//   boundary     = zero | top_one | const <c> | linear <a> <b> <c>   (g = a + b x + c y)
//   method       = cr_bubble | cr_plain | linear_bubble | linear_plain | reference
//   coarse       = <NX> <NY> <m>
//   reference    = <cells along x>
//   convergence  = 8x8x128 16x16x64 ...   NXxNYxm list for `convergence`
//   bubble       = load | unit
//   coarse_form  = penalized | perforated
//   output       = <directory>
//
// Unknown keys, repeated keys and malformed values raise ConfigError with
// the line number and key.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "crmsfem/analysis.hpp"
#include "crmsfem/domain.hpp"
#include "crmsfem/msbasis.hpp"

namespace crmsfem {

struct ExperimentConfig {
  std::string preset;  // informational once resolved
  Domain2D domain = Domain2D::unit_square();
  std::string perforations = "none";
  double diffusion = 1.0;
  std::string velocity = "zero";
  std::string source = "zero";
  std::string boundary = "zero";
  Method method = Method::CrBubble;
  CoarseConfig coarse;
  Index reference = 512;
  std::vector<CoarseConfig> convergence;
  MsfemOptions options;
  std::string output = "out";

  bool operator==(const ExperimentConfig&) const;
};

struct PresetInfo {
  std::string name;
  std::string description;
};

const std::vector<PresetInfo>& preset_catalog();
ExperimentConfig preset(std::string_view name);

/// `name: description` per line, restricted to names containing `filter`.
void list_presets(std::ostream& os, std::string_view filter = {});

/// Applies one `key = value` assignment. `line` only feeds diagnostics.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value, int line = 0);

ExperimentConfig parse_config(std::istream& is);
ExperimentConfig load_config(const std::string& path);

/// Structural checks: nesting into the reference grid, square cells, sane
/// counts. Covers `coarse`, or the `convergence` list when asked. Throws
/// ConfigError naming the field.
void validate(const ExperimentConfig& config, bool convergence = false);

/// Fully resolved config in the input format; parse_config of the output
/// gives back an equal config.
void write_manifest(std::ostream& os, const ExperimentConfig& config);

Problem make_problem(const ExperimentConfig& config);

std::string format_double(double v);  // shortest round-trip form

}  // namespace crmsfem
