#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "qato/benchmarks.hpp"
#include "qato/io.hpp"

using namespace qato;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / "qato_io_test" / name;
  fs::create_directories(d);
  return d;
}

std::vector<double> random_rho(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(1e-6, 1.0);
  std::vector<double> r(n);
  for (auto& x : r) x = U(rng);
  return r;
}

RunResult fake_result() {
  RunResult r;
  r.method = "anneal";
  r.initial_objective = 1.0 / 3.0;
  for (std::size_t i = 1; i <= 4; ++i)
    r.history.push_back({i, 1.0 / (3.0 + i), 0.35 + 1e-3 * i, -0.1 * std::sqrt(double(i)), 1e-4 * i, i, 4 - i});
  r.iterations = 4;
  r.final_state = init_design(6, 0.35, 1.1);
  return r;
}

}  // namespace

TEST(Io, ConvergenceCsvRoundTrip) {
  const auto d = scratch("csv");
  const auto r = fake_result();
  write_convergence_csv(r, d / "c.csv", true);
  const auto rows = read_convergence_csv(d / "c.csv");
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(rows[i].iteration, r.history[i].iteration);
    EXPECT_EQ(rows[i].objective, r.history[i].objective);
    EXPECT_EQ(rows[i].volume_ratio, r.history[i].volume_ratio);
    EXPECT_EQ(rows[i].energy, r.history[i].energy);
    EXPECT_EQ(rows[i].solver_seconds, r.history[i].solver_seconds);
    EXPECT_EQ(rows[i].n_cap, r.history[i].n_cap);
    EXPECT_EQ(rows[i].n_floor, r.history[i].n_floor);
  }
  write_convergence_csv(r, d / "n.csv");
  EXPECT_TRUE(std::isnan(read_convergence_csv(d / "n.csv")[0].solver_seconds));
}

TEST(Io, SummaryKeys) {
  const auto j = summary_json(fake_result(), "truss6");
  for (const char* k : {"problem", "method", "final_objective", "final_volume_ratio", "initial_objective", "I_N",
                        "TFS_s", "converged", "N_q", "N_elem"})
    EXPECT_TRUE(j.contains(k)) << k;
  EXPECT_EQ(j["I_N"], 4);
  EXPECT_EQ(j["N_elem"], 6);
}

TEST(Io, VtkRoundTrip) {
  const auto d = scratch("vtk");
  for (const auto& name : {"coat_hanger", "cantilever_80x40"}) {
    const auto p = build_benchmark(name);
    const auto rho = random_rho(p.element_count(), 4);
    write_vtk(p, rho, d / "r.vtk");
    const auto back = read_vtk_rho(d / "r.vtk");
    ASSERT_EQ(back.size(), rho.size());
    for (std::size_t e = 0; e < rho.size(); ++e) EXPECT_NEAR(back[e], rho[e], 1e-12 * rho[e]);
  }
  EXPECT_THROW(write_vtk(build_benchmark("truss6"), std::vector<double>(6, 1.0), d / "x.vtk"), std::invalid_argument);
}

TEST(Io, VtkPointsAreCoordinates) {
  const auto d = scratch("vtkpts");
  const auto p = build_benchmark("coat_hanger");
  write_vtk(p, std::vector<double>(p.element_count(), 1.0), d / "r.vtk");
  std::ifstream in(d / "r.vtk");
  std::string tok;
  while (in >> tok && tok != "POINTS") {
  }
  std::size_t n;
  in >> n >> tok;
  double x, y, z, xmax = 0;
  for (std::size_t i = 0; i < n; ++i) {
    in >> x >> y >> z;
    xmax = std::max(xmax, x);
  }
  EXPECT_NEAR(xmax, p.grid().counts[0] * p.grid().element_size[0], 1e-12);
}

TEST(Io, TrussDesignRoundTrip) {
  const auto d = scratch("truss");
  const auto p = build_benchmark("truss21");
  const auto rho = random_rho(p.element_count(), 8);
  write_truss_design(p, rho, d / "t.txt");
  EXPECT_EQ(read_truss_design(d / "t.txt"), rho);
}

TEST(Io, SnapshotCadence) {
  EXPECT_TRUE(snapshot_due(50, 3, false));
  EXPECT_FALSE(snapshot_due(3200, 3, false));
  EXPECT_TRUE(snapshot_due(3200, 5, false));
  EXPECT_TRUE(snapshot_due(3200, 7, true));
  const auto d = scratch("snap");
  const auto p = build_benchmark("truss6");
  EXPECT_EQ(write_snapshot(p, std::vector<double>(6, 0.5), d, 12).filename(), "design_0012.txt");
  const auto q = build_benchmark("coat_hanger");
  EXPECT_EQ(write_snapshot(q, std::vector<double>(50, 0.5), d, 3).filename(), "rho_0003.vtk");
}
