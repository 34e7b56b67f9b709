// crmsfem: experiment driver.
//
//   crmsfem run <config> [--set key=value]...
//   crmsfem convergence <preset> [--set key=value]...
//   crmsfem presets [filter]
//   crmsfem export-basis <config> <element> <edge|bubble> [--set key=value]...
//
// <config> is a file or a preset name. Failures print one line
//   error: code=<code> message="<text>"
// on stderr and exit with status 1 (2 for usage errors).

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "crmsfem/config.hpp"
#include "crmsfem/error.hpp"
#include "crmsfem/experiment.hpp"
#include "crmsfem/simd.hpp"

namespace {

using namespace crmsfem;

ExperimentConfig resolve(const std::string& source, const std::vector<std::string>& overrides) {
  ExperimentConfig c = std::filesystem::exists(source) ? load_config(source) : preset(source);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'", 0, "set");
    apply_setting(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return c;
}

std::string quoted(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch == '\n' ? ' ' : ch;
  }
  return out;
}

int fail(const std::string& code, const std::string& message) {
  std::cerr << "error: code=" << code << " message=\"" << quoted(message) << "\"\n";
  return 1;
}

int parse_which(const std::string& s) {
  if (s == "bubble") return 4;
  static const char* names[] = {"bottom", "right", "top", "left"};
  for (int k = 0; k < 4; ++k)
    if (s == names[k] || s == std::to_string(k)) return k;
  throw ConfigError("basis must be 0..3, bottom|right|top|left or bubble, got '" + s + "'", 0, "basis");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crouzeix-Raviart MsFEM experiments on perforated domains"};
  app.require_subcommand(1);
  std::vector<std::string> overrides;

  std::string config_src;
  auto* run_cmd = app.add_subcommand("run", "solve one configuration and write fields, errors and a manifest");
  run_cmd->add_option("config", config_src, "config file or preset name")->required();
  run_cmd->add_option("--set", overrides, "override a key, key=value");

  std::string preset_name;
  auto* conv_cmd = app.add_subcommand("convergence", "run a preset's convergence study and print the error table");
  conv_cmd->add_option("preset", preset_name, "preset name or config file")->required();
  conv_cmd->add_option("--set", overrides, "override a key, key=value");

  std::string filter;
  auto* presets_cmd = app.add_subcommand("presets", "list the built-in presets");
  presets_cmd->add_option("filter", filter, "substring of the preset name");

  Index element = 0;
  std::string which;
  auto* basis_cmd = app.add_subcommand("export-basis", "write one local basis function as VTK");
  basis_cmd->add_option("config", config_src, "config file or preset name")->required();
  basis_cmd->add_option("element", element, "coarse element id")->required();
  basis_cmd->add_option("basis", which, "local edge 0..3 (or bottom|right|top|left) or bubble")->required();
  basis_cmd->add_option("--set", overrides, "override a key, key=value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: code=usage message=\"" << quoted(e.what()) << "\"\n";
    return 2;
  }

  try {
    if (*presets_cmd) {
      list_presets(std::cout, filter);
    } else if (*run_cmd) {
      const RunResult r = run(resolve(config_src, overrides));
      write_error_csv(std::cout, r.rows);
      for (const auto& f : r.files) std::cerr << "wrote " << f.string() << '\n';
    } else if (*conv_cmd) {
      const RunResult r = run_convergence(resolve(preset_name, overrides));
      write_error_csv(std::cout, r.rows);
      for (const auto& f : r.files) std::cerr << "wrote " << f.string() << '\n';
    } else if (*basis_cmd) {
      const ExperimentConfig c = resolve(config_src, overrides);
      const int k = parse_which(which);
      const ScalarField f = basis_field(c, element, k);
      std::filesystem::create_directories(c.output);
      const std::filesystem::path out = std::filesystem::path(c.output) /
                                        ("basis_e" + std::to_string(element) + "_" + (k == 4 ? "bubble" : std::to_string(k)) + ".vtk");
      write_vtk(out, f, "phi");
      std::cerr << "wrote " << out.string() << '\n';
    }
  } catch (const ConfigError& e) {
    return fail(e.code(), e.what());
  } catch (const SolverError& e) {
    return fail(e.code(), std::string(e.what()) + " (residual " + format_double(e.residual()) + ")");
  } catch (const Error& e) {
    return fail(e.code(), e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 0;
}
