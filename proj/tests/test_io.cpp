#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <locale>
#include <sstream>

#include "sfem/error.hpp"
#include "sfem/io.hpp"
#include "support.hpp"

using namespace sfem;

namespace {

struct CommaDecimal : std::numpunct<char> {
  char do_decimal_point() const override { return ','; }
  char do_thousands_sep() const override { return '.'; }
  std::string do_grouping() const override { return "\3"; }
};

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("sfem_test_" + name);
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ErrorCode read_error(const std::string& content) {
  const auto path = temp_file("bad.off");
  std::ofstream(path) << content;
  try {
    read_off(path);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an sfem::Error");
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("CSV headers") {
  CHECK(kConvergenceHeader == "h,tau,dofs,err_linf_l2,err_l2_h1,estimator");
  CHECK(kRunLogHeader ==
        "step,t,tau,dofs,eta_h_sq,eta_tau_sq,eta_c_sq,eta_combined,spatial_iters,"
        "coarsen_iters,nodes_removed,cg_iters,wall_ms");
  CHECK(kGeometryHeader == "level,h,max_abs_d,max_abs_one_minus_mu,max_norm_P_minus_Atilde");
}

TEST_CASE("number formatting round-trips") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(2.0) == "2");
  CHECK(format_number(-1.5e-300) == "-1.5e-300");
  for (double v : {1.0 / 3.0, 6.02214076e23, 1e-17, 123456.789}) {
    CHECK(std::stod(format_number(v)) == v);
  }
}

TEST_CASE("CSV output ignores the global locale") {
  const std::locale previous = std::locale::global(std::locale(std::locale::classic(),
                                                               new CommaDecimal));
  std::ostringstream out;
  out.imbue(std::locale());
  {
    CsvWriter csv(out, "a,b,c");
    csv.row({0.25, std::int64_t{1234567}, std::string("x")});
  }
  std::locale::global(previous);
  CHECK(out.str() == "a,b,c\n0.25,1234567,x\n");
}

TEST_CASE("OFF round trip") {
  const SurfaceMesh mesh = icosphere(1);
  const auto path = temp_file("ico.off");
  write_off(path, mesh);
  const SurfaceMesh back = read_off(path);
  REQUIRE(back.num_nodes() == mesh.num_nodes());
  REQUIRE(back.num_triangles() == mesh.num_triangles());
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    CHECK(back.nodes()[i] == mesh.nodes()[i]);
  }
  CHECK(back.triangles() == mesh.triangles());
  std::filesystem::remove(path);
}

TEST_CASE("OFF comments and malformed input") {
  const auto path = temp_file("tet.off");
  std::ofstream(path) << "OFF\n# a tetrahedron\n4 4 6\n"
                         "1 1 1\n-1 -1 1\n-1 1 -1\n1 -1 -1\n"
                         "3 0 1 2\n3 0 3 1\n3 0 2 3\n3 1 3 2\n";
  const SurfaceMesh tet = read_off(path);
  CHECK(tet.num_nodes() == 4u);
  CHECK(tet.euler_characteristic() == 2);
  std::filesystem::remove(path);

  CHECK(read_error("PLY\n") == ErrorCode::kIo);
  CHECK(read_error("OFF\n4 1 0\n0 0 0\n") == ErrorCode::kIo);
  CHECK(read_error("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n4 0 1 2 0\n") == ErrorCode::kIo);
  CHECK(read_error("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n") == ErrorCode::kIo);
  CHECK(read_error("OFF\n3 1 0\n0 0 0\n1 0 x\n0 1 0\n3 0 1 2\n") == ErrorCode::kIo);
  // An open surface reaches mesh validation.
  CHECK(read_error("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n") == ErrorCode::kNonManifold);
  try {
    read_off(temp_file("missing.off"));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
  }
}

TEST_CASE("VTK snapshot layout") {
  const SurfaceMesh mesh = testing::tetrahedron();
  const FeFunction u = FeFunction::from_values(mesh, {0.5, 1.0, -2.0, 0.0});
  const auto path = temp_file("tet.vtk");
  write_vtk(path, mesh, u);
  const std::string text = slurp(path);
  CHECK(text.rfind("# vtk DataFile Version 3.0\n", 0) == 0);
  CHECK(text.find("DATASET POLYDATA\nPOINTS 4 double\n") != std::string::npos);
  CHECK(text.find("POLYGONS 4 16\n") != std::string::npos);
  CHECK(text.find("POINT_DATA 4\nSCALARS u double 1\nLOOKUP_TABLE default\n0.5\n1\n-2\n0\n") !=
        std::string::npos);
  std::filesystem::remove(path);

  const FeFunction stale = FeFunction::from_values(icosphere(0), std::vector<double>(12, 0.0));
  CHECK_THROWS_AS(write_vtk(path, mesh, stale), Error);
}
