#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "crmsfem/analysis.hpp"
#include "crmsfem/config.hpp"

namespace crmsfem {

/// Legacy ASCII VTK, one scalar per node:
///
///   # vtk DataFile Version 3.0
///   <title>
///   ASCII
///   DATASET STRUCTURED_POINTS
///   DIMENSIONS <nx+1> <ny+1> 1
///   ORIGIN <xmin> <ymin> 0
///   SPACING <h> <h> 1
///   POINT_DATA <(nx+1)(ny+1)>
///   SCALARS <name> double 1
///   LOOKUP_TABLE default
///   <one value per line, x fastest>
void write_vtk(std::ostream& os, const ScalarField& field, const std::string& name,
               const std::string& title);
void write_vtk(const std::filesystem::path& path, const ScalarField& field, const std::string& name);

struct RunResult {
  std::vector<ErrorReport> rows;
  std::vector<std::filesystem::path> files;
};

/// Solves one configuration and writes into config.output:
/// solution.vtk, reference.vtk, errors.csv, coarse_dofs.csv, manifest.txt.
/// The reference method writes solution.vtk, errors.csv and manifest.txt.
RunResult run(const ExperimentConfig& config);

/// Every config of config.convergence against one reference solve, in
/// order; writes errors.csv and manifest.txt into config.output.
RunResult run_convergence(const ExperimentConfig& config);

/// One basis function of one element on its local grid (element-local
/// coordinates). `which` is 0..3 (local edge for CR, corner for the nodal
/// baseline) or 4 for the bubble.
ScalarField basis_field(const ExperimentConfig& config, Index element, int which);

}  // namespace crmsfem
