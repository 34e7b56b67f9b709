#include "crmsfem/experiment.hpp"

#include <fstream>
#include <ostream>

#include "crmsfem/error.hpp"

namespace crmsfem {

void write_vtk(std::ostream& os, const ScalarField& field, const std::string& name, const std::string& title) {
  const CartesianMesh& m = field.mesh;
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET STRUCTURED_POINTS\n";
  os << "DIMENSIONS " << m.nx + 1 << ' ' << m.ny + 1 << " 1\n";
  os << "ORIGIN " << format_double(m.domain.xmin) << ' ' << format_double(m.domain.ymin) << " 0\n";
  os << "SPACING " << format_double(m.h) << ' ' << format_double(m.h) << " 1\n";
  os << "POINT_DATA " << m.node_count() << '\n';
  os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (double v : field.values) os << format_double(v) << '\n';
}

void write_vtk(const std::filesystem::path& path, const ScalarField& field, const std::string& name) {
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write " + path.string());
  write_vtk(out, field, name, path.filename().string());
}

namespace {

std::filesystem::path prepare(const ExperimentConfig& c) {
  const std::filesystem::path dir(c.output);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("io", "cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

std::ofstream open(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw Error("io", "cannot write " + p.string());
  return out;
}

void write_manifest_file(const std::filesystem::path& p, const ExperimentConfig& c) {
  std::ofstream out = open(p);
  write_manifest(out, c);
}

}  // namespace

RunResult run(const ExperimentConfig& config) {
  validate(config);
  const Problem problem = make_problem(config);
  const std::filesystem::path dir = prepare(config);
  RunResult result;

  CoefficientField coeffs;
  const ScalarField ref = run_reference(problem, config.reference, &coeffs);

  if (config.method == Method::Reference) {
    write_vtk(dir / "solution.vtk", ref, "u");
    const CoarseConfig self{config.reference, ref.mesh.ny, 1};
    result.rows.push_back(make_report(problem, Method::Reference, self, relative_l2(ref, ref, coeffs.mask)));
    result.files.push_back(dir / "solution.vtk");
  } else {
    const CoarseSolution sol = run_msfem(problem, config.method, config.coarse, config.options);
    result.rows.push_back(make_report(problem, config.method, config.coarse, relative_l2(sol, ref, coeffs.mask)));

    write_vtk(dir / "solution.vtk", sol.averaged, "u");
    write_vtk(dir / "reference.vtk", ref, "u");
    {
      std::ofstream out = open(dir / "coarse_dofs.csv");
      out << "kind,id,value\n";
      const Index primary = sol.primary_count();
      const char* primary_kind = sol.kind == BasisKind::CrouzeixRaviart ? "edge" : "node";
      for (Index k = 0; k < sol.dofs.size(); ++k) {
        if (k < primary)
          out << primary_kind << ',' << k << ',' << format_double(sol.dofs[k]) << '\n';
        else
          out << "bubble," << k - primary << ',' << format_double(sol.dofs[k]) << '\n';
      }
    }
    result.files.insert(result.files.end(), {dir / "solution.vtk", dir / "reference.vtk", dir / "coarse_dofs.csv"});
  }

  {
    std::ofstream out = open(dir / "errors.csv");
    write_error_csv(out, result.rows);
  }
  write_manifest_file(dir / "manifest.txt", config);
  result.files.insert(result.files.end(), {dir / "errors.csv", dir / "manifest.txt"});
  return result;
}

RunResult run_convergence(const ExperimentConfig& config) {
  validate(config, true);
  if (config.method == Method::Reference) throw ConfigError("method: reference has no convergence study", 0, "method");
  const Problem problem = make_problem(config);
  const std::filesystem::path dir = prepare(config);
  RunResult result;
  result.rows = run_convergence(problem, config.method, config.convergence, config.reference, config.options);
  {
    std::ofstream out = open(dir / "errors.csv");
    write_error_csv(out, result.rows);
  }
  write_manifest_file(dir / "manifest.txt", config);
  result.files = {dir / "errors.csv", dir / "manifest.txt"};
  return result;
}

ScalarField basis_field(const ExperimentConfig& config, Index element, int which) {
  validate(config);
  if (config.method == Method::Reference) throw ConfigError("method: reference has no basis", 0, "method");
  const CoarseConfig& cc = config.coarse;
  if (element < 0 || element >= cc.NX * cc.NY)
    throw ConfigError("element " + std::to_string(element) + " out of range", 0, "element");
  if (which < 0 || which > 4) throw ConfigError("basis index must be 0..3 or bubble", 0, "basis");
  const Problem problem = make_problem(config);
  const Hierarchy hierarchy = build_hierarchy(problem.domain, cc.NX, cc.NY, cc.m);
  const CoefficientField coeffs = sample_coefficients(problem.perforations, problem.data, hierarchy.fine);
  const LocalOperator local =
      build_local_operator(hierarchy.coarse, element, coeffs, problem.data.velocity, config.options.form);
  ElementBasis basis =
      method_kind(config.method) == BasisKind::CrouzeixRaviart ? compute_cr_basis(local) : compute_linear_basis(local);
  if (which == 4) compute_bubble(local, basis, config.options.bubble);

  const CoarseElement& el = hierarchy.coarse.elements[static_cast<std::size_t>(element)];
  const double H = hierarchy.coarse.H;
  const Domain2D box{problem.domain.xmin + static_cast<double>(el.I) * H,
                     problem.domain.xmin + static_cast<double>(el.I + 1) * H,
                     problem.domain.ymin + static_cast<double>(el.J) * H,
                     problem.domain.ymin + static_cast<double>(el.J + 1) * H};
  ScalarField out(CartesianMesh(box, cc.m, cc.m));
  out.values = basis.function(which);
  return out;
}

}  // namespace crmsfem
