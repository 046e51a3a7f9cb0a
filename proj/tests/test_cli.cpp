// End-to-end checks of the CLI surface through the built binary: exit-code
// contract, file outputs, and determinism. The binary path arrives through
// the RMC_CLI environment variable set by CTest.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "rmc/io.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  const char* p = std::getenv("RMC_CLI");
  if (p == nullptr) {
    // Fall back to the conventional build location when run by hand.
    return "./rmc";
  }
  return p;
}

int run(const std::string& args) {
  std::string cmd = cli_path() + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("rmc_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string out() const { return dir_.string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, LsdIdentityWritesCurveAndManifest) {
  ASSERT_EQ(run("--out " + out() + " lsd-identity --c 1"), 0);
  ASSERT_TRUE(fs::exists(dir_ / "lsd_identity.csv"));
  ASSERT_TRUE(fs::exists(dir_ / "lsd_identity.json"));
  ASSERT_TRUE(fs::exists(dir_ / "manifest.json"));

  rmc::LsdCurve curve = rmc::io::read_curve(dir_ / "lsd_identity.csv");
  EXPECT_NEAR(curve.density_at(0.0), 0.31831, 1e-4);
  EXPECT_NEAR(curve.support_upper, 3.33019, 1e-4);
}

TEST_F(CliTest, LsdIdentityAtomSidecar) {
  ASSERT_EQ(run("--out " + out() + " lsd-identity --c 4"), 0);
  auto side = rmc::io::json::parse(slurp(dir_ / "lsd_identity.json"));
  EXPECT_NEAR(side["point_mass_zero"].get<double>(), 0.5, 1e-12);
  EXPECT_NEAR(side["support"][0].get<double>(), 0.6735, 1e-3);
  EXPECT_EQ(side["method"], "closed_form");
}

TEST_F(CliTest, InvalidConcentrationExitsUsage) {
  EXPECT_EQ(run("--out " + out() + " lsd-identity --c 0"), 2);
  EXPECT_EQ(run("--out " + out() + " lsd-identity"), 2);  // missing required
  EXPECT_EQ(run("no-such-subcommand"), 2);
}

TEST_F(CliTest, LsdGeneralMatchesIdentityClosedForm) {
  fs::path h = dir_ / "h_delta1.txt";
  rmc::io::write_measure(h, rmc::SpectralMeasure::point(1.0));
  ASSERT_EQ(run("--out " + out() + " lsd-general --c 1 --H " + h.string() +
                " --grid 201 --name general"),
            0);
  ASSERT_EQ(run("--out " + out() + " lsd-identity --c 1 --grid 201"), 0);
  rmc::LsdCurve general = rmc::io::read_curve(dir_ / "general.csv");
  rmc::LsdCurve closed = rmc::io::read_curve(dir_ / "lsd_identity.csv");
  double worst = 0.0;
  for (double x : {0.0, 0.5, 1.0, 2.0, 3.0})
    worst = std::max(worst,
                     std::abs(general.density_at(x) - closed.density_at(x)));
  EXPECT_LE(worst, 1e-4);
}

TEST_F(CliTest, LsdGeneralPointMassSidecar) {
  fs::path h = dir_ / "h_mix.txt";
  rmc::io::write_measure(h, rmc::SpectralMeasure({{1.0, 0.7}}, 0.3));
  ASSERT_EQ(run("--out " + out() + " lsd-general --c 1 --H " + h.string() +
                " --grid 101 --name mix"),
            0);
  auto side = rmc::io::json::parse(slurp(dir_ / "mix.json"));
  EXPECT_NEAR(side["point_mass_zero"].get<double>(), 0.3, 1e-3);
}

TEST_F(CliTest, DegenerateSpectrumExitsThree) {
  fs::path h = dir_ / "h_delta0.txt";
  rmc::io::write_measure(h, rmc::SpectralMeasure::delta0());
  EXPECT_EQ(run("--out " + out() + " lsd-general --c 1 --H " + h.string()), 3);
}

TEST_F(CliTest, MalformedSpectrumFileExitsUsage) {
  fs::path h = dir_ / "h_bad.txt";
  std::ofstream(h) << "1.0 not-a-number\n";
  EXPECT_EQ(run("--out " + out() + " lsd-general --c 1 --H " + h.string()), 2);
}

TEST_F(CliTest, SimulateDeterministicAndSymmetric) {
  ASSERT_EQ(run("--out " + out() +
                " --seed 7 simulate --p 64 --n 64 --entry-dist mixed "
                "--kernel minus --replicates 2 --name esd"),
            0);
  ASSERT_TRUE(fs::exists(dir_ / "esd_r0.csv"));
  ASSERT_TRUE(fs::exists(dir_ / "esd_r1.csv"));
  std::string first = slurp(dir_ / "esd_r0.csv");

  rmc::EsdSample sample = rmc::io::read_sample(dir_ / "esd_r0.csv");
  ASSERT_EQ(sample.coords.size(), 64u);
  double scale = std::abs(sample.coords.front());
  for (std::size_t i = 0; i < sample.coords.size(); ++i)
    EXPECT_NEAR(sample.coords[i],
                -sample.coords[sample.coords.size() - 1 - i], 1e-8 * scale);

  fs::path second_dir = dir_ / "again";
  ASSERT_EQ(run("--out " + second_dir.string() +
                " --seed 7 simulate --p 64 --n 64 --entry-dist mixed "
                "--kernel minus --replicates 1 --name esd"),
            0);
  EXPECT_EQ(first, slurp(second_dir / "esd_r0.csv"));
}

TEST_F(CliTest, SimulateDegenerateSampleSizeRuns) {
  ASSERT_EQ(run("--out " + out() +
                " simulate --p 2 --n 1 --kernel minus --name tiny"),
            0);
  rmc::EsdSample sample = rmc::io::read_sample(dir_ / "tiny_r0.csv");
  EXPECT_EQ(sample.coords.size(), 2u);
}

TEST_F(CliTest, SimulateRejectsBadParameters) {
  EXPECT_EQ(run("--out " + out() + " simulate --p 1 --n 4"), 2);
  EXPECT_EQ(run("--out " + out() + " simulate --p 8 --n 8 --entry-dist what"),
            2);
}

TEST_F(CliTest, CompareEndToEndWithThreshold) {
  ASSERT_EQ(run("--out " + out() + " lsd-identity --c 1 --name curve"), 0);
  ASSERT_EQ(run("--out " + out() +
                " --seed 3 simulate --p 256 --n 256 --entry-dist mixed "
                "--kernel minus --replicates 2 --name esd"),
            0);
  ASSERT_EQ(run("--out " + out() + " compare --sample " +
                (dir_ / "esd_r0.csv").string() + " " +
                (dir_ / "esd_r1.csv").string() + " --curve " +
                (dir_ / "curve.csv").string()),
            0);
  ASSERT_TRUE(fs::exists(dir_ / "reports.csv"));
  ASSERT_TRUE(fs::exists(dir_ / "report_0.json"));
  auto rep = rmc::io::json::parse(slurp(dir_ / "report_0.json"));
  EXPECT_LE(rep["levy"].get<double>(), rep["ks"].get<double>());

  // A sub-roundoff threshold must trip exit 5 on a real finite-p sample.
  EXPECT_EQ(run("--out " + out() + " compare --sample " +
                (dir_ / "esd_r0.csv").string() + " --curve " +
                (dir_ / "curve.csv").string() + " --fail-above 0.001"),
            5);
}

TEST_F(CliTest, CompareKernelMismatchExitsUsage) {
  ASSERT_EQ(run("--out " + out() + " lsd-identity --c 1 --name curve"), 0);
  ASSERT_EQ(run("--out " + out() +
                " simulate --p 32 --n 32 --kernel plus --name esd"),
            0);
  EXPECT_EQ(run("--out " + out() + " compare --sample " +
                (dir_ / "esd_r0.csv").string() + " --curve " +
                (dir_ / "curve.csv").string()),
            2);
}

TEST_F(CliTest, JsonFormatRoundTrip) {
  ASSERT_EQ(run("--out " + out() + " --format json lsd-identity --c 1"), 0);
  ASSERT_TRUE(fs::exists(dir_ / "lsd_identity.json"));
  ASSERT_FALSE(fs::exists(dir_ / "lsd_identity.csv"));
  rmc::LsdCurve curve = rmc::io::read_curve(dir_ / "lsd_identity.json");
  EXPECT_NEAR(curve.density_at(0.0), 0.31831, 1e-4);

  ASSERT_EQ(run("--out " + out() +
                " --format json --seed 2 simulate --p 32 --n 32 "
                "--entry-dist mixed --kernel minus --name js"),
            0);
  rmc::EsdSample sample = rmc::io::read_sample(dir_ / "js_r0.json");
  EXPECT_EQ(sample.coords.size(), 32u);
  auto side = rmc::io::json::parse(slurp(dir_ / "js_r0.json"));
  EXPECT_EQ(side["gaussian_rows"].size(), 16u);  // recorded row assignment
}

TEST_F(CliTest, SolverFailureExitsFour) {
  fs::path h = dir_ / "h_delta1.txt";
  rmc::io::write_measure(h, rmc::SpectralMeasure::point(1.0));
  EXPECT_EQ(run("--out " + out() + " lsd-general --c 1 --H " + h.string() +
                " --grid 51 --max-iter 1"),
            4);
}

TEST_F(CliTest, PointMassSubcommand) {
  EXPECT_EQ(run("pointmass --beta 0.7 --c 4"), 0);
  EXPECT_EQ(run("pointmass --beta 0 --c 4"), 3);  // degenerate spectrum
}

TEST_F(CliTest, ManifestRecordsParameters) {
  ASSERT_EQ(run("--out " + out() +
                " --seed 11 simulate --p 16 --n 8 --kernel plus --name x"),
            0);
  auto manifest = rmc::io::json::parse(slurp(dir_ / "manifest.json"));
  EXPECT_EQ(manifest["subcommand"], "simulate");
  EXPECT_EQ(manifest["p"].get<int>(), 16);
  EXPECT_EQ(manifest["seed"].get<std::uint64_t>(), 11u);
  EXPECT_EQ(manifest["version"], rmc::kVersion);
}
