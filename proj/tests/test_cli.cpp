#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "gcact/cli.hpp"
#include "gcact/io.hpp"

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "gcact");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = gcact::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string report_value(const std::string& report, const std::string& key) {
  std::istringstream in(report);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
  }
  return {};
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    fs::create_directories(dir());
    const CliRun r = run({"phantom", "--dims", "3,3,1", "--active", "2", "--cnr", "2.0", "--seed", "21", "--out",
                       (dir() / "ph").string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  static fs::path dir() { return fs::path(GCACT_TEST_TMP); }
  static std::string path(const std::string& name) { return (dir() / name).string(); }
};

}  // namespace

TEST_F(CliTest, PhantomFilesAreConsistent) {
  const gcact::VoxelGrid grid = gcact::io::read_volume(fs::path(path("ph.bvol")));
  std::ifstream stim_file(path("ph.stim"));
  const gcact::StimulusTrain stim = gcact::io::read_stimulus(stim_file);
  EXPECT_EQ(grid.timepoints(), 362u);
  EXPECT_EQ(stim.size(), 362u);
  EXPECT_EQ(grid.voxel_count(), 9u);
  EXPECT_EQ(grid.tr_seconds(), stim.tr_seconds());
  const std::string truth = slurp(path("ph_truth.csv"));
  EXPECT_EQ(truth.rfind("x,y,z,active\n", 0), 0u);
}

TEST_F(CliTest, PhantomIsSeedDeterministic) {
  ASSERT_EQ(run({"phantom", "--dims", "3,3,1", "--active", "2", "--cnr", "2.0", "--seed", "21", "--out",
                 path("ph_again")})
                .code,
            0);
  EXPECT_EQ(slurp(path("ph.bvol")), slurp(path("ph_again.bvol")));
  EXPECT_EQ(slurp(path("ph.stim")), slurp(path("ph_again.stim")));
  ASSERT_EQ(run({"phantom", "--dims", "3,3,1", "--seed", "22", "--out", path("ph_other")}).code, 0);
  EXPECT_NE(slurp(path("ph.bvol")), slurp(path("ph_other.bvol")));
}

TEST_F(CliTest, GlmRecoversTruth) {
  const CliRun r = run({"glm", path("ph.bvol"), path("ph.stim"), "--alpha", "0.01", "--out", path("glm")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("glm: voxels=9 active=2 gini=", 0), 0u) << r.out;
  const auto rows = gcact::io::read_map_csv(fs::path(path("glm.csv")));
  const std::string truth = slurp(path("ph_truth.csv"));
  ASSERT_EQ(rows.size(), 9u);
  std::size_t i = 0;
  std::istringstream in(truth);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    EXPECT_EQ(rows[i].active, line.back() == '1') << "voxel " << i;
    ++i;
  }
  EXPECT_TRUE(fs::exists(path("glm_z0.pgm")));
  const std::string pgm = slurp(path("glm_z0.pgm"));
  EXPECT_EQ(pgm.rfind("P5\n3 3\n255\n", 0), 0u);
}

TEST_F(CliTest, GcIsReproducible) {
  const CliRun a = run({"gc", path("ph.bvol"), path("ph.stim"), "--seed", "5", "--out", path("gc_a"), "--jobs", "1"});
  const CliRun b = run({"gc", path("ph.bvol"), path("ph.stim"), "--seed", "5", "--out", path("gc_b"), "--jobs", "3"});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(slurp(path("gc_a.csv")), slurp(path("gc_b.csv")));
  EXPECT_EQ(slurp(path("gc_a_z0.pgm")), slurp(path("gc_b_z0.pgm")));
  const CliRun bb = run({"gc", path("ph.bvol"), path("ph.stim"), "--null-scheme", "block-bootstrap", "--bootstrap", "20",
                      "--out", path("gc_bb")});
  EXPECT_EQ(bb.code, 0) << bb.err;
}

TEST_F(CliTest, CompareReportAndScatter) {
  const CliRun a = run({"compare", path("ph.bvol"), path("ph.stim"), "--out", path("cmp_a")});
  ASSERT_EQ(a.code, 0) << a.err;
  const CliRun b = run({"compare", path("ph.bvol"), path("ph.stim"), "--out", path("cmp_b")});
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(slurp(path("cmp_a_report.txt")), a.out);
  EXPECT_EQ(slurp(path("cmp_a_scatter.csv")), slurp(path("cmp_b_scatter.csv")));
  EXPECT_EQ(report_value(a.out, "voxels"), "9");
  EXPECT_FALSE(report_value(a.out, "glm_gini").empty());
  EXPECT_FALSE(report_value(a.out, "gc_gini").empty());

  // Recount the report's set sizes from the scatter CSV.
  std::istringstream scatter(slurp(path("cmp_a_scatter.csv")));
  std::string line;
  std::getline(scatter, line);
  EXPECT_EQ(line, "x,y,z,glm_beta,glm_p,glm_active,gc_f,gc_p,gc_active");
  int rows = 0, glm = 0, gc = 0, both = 0;
  bool truth_found = true;
  while (std::getline(scatter, line)) {
    std::vector<std::string> f;
    std::istringstream fields(line);
    for (std::string cell; std::getline(fields, cell, ',');) f.push_back(cell);
    ASSERT_EQ(f.size(), 9u);
    const bool g = f[5] == "1";
    const bool c = f[8] == "1";
    glm += g;
    gc += c;
    both += g && c;
    // The two active phantom voxels sit at (1,0,0) and (1,1,0).
    if (f[0] == "1" && (f[1] == "0" || f[1] == "1")) truth_found = truth_found && g && c;
    ++rows;
  }
  EXPECT_EQ(rows, 9);
  EXPECT_TRUE(truth_found);
  EXPECT_EQ(report_value(a.out, "glm_active"), std::to_string(glm));
  EXPECT_EQ(report_value(a.out, "gc_active"), std::to_string(gc));
  EXPECT_EQ(report_value(a.out, "overlap"), std::to_string(both));
  EXPECT_DOUBLE_EQ(std::stod(report_value(a.out, "jaccard")), double(both) / double(glm + gc - both));
  EXPECT_TRUE(fs::exists(path("cmp_a_glm.csv")));
  EXPECT_TRUE(fs::exists(path("cmp_a_gc.csv")));
}

TEST_F(CliTest, CompareOnEmptyMaps) {
  ASSERT_EQ(run({"phantom", "--dims", "2,1,1", "--active", "0", "--seed", "3", "--out", path("noise")}).code, 0);
  const CliRun r = run({"compare", path("noise.bvol"), path("noise.stim"), "--alpha", "0.001", "--out", path("cmp_n")});
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_EQ(report_value(r.out, "glm_active"), "0");
  ASSERT_EQ(report_value(r.out, "gc_active"), "0");
  EXPECT_EQ(report_value(r.out, "jaccard"), "undefined");
  EXPECT_EQ(report_value(r.out, "glm_gini"), "undefined");
  EXPECT_EQ(report_value(r.out, "gc_gini"), "undefined");
}

TEST_F(CliTest, ConnectivityRecord) {
  const CliRun r = run({"connectivity", path("ph.bvol"), "--source", "1,1,0", "--target", "0,1,0", "--bootstrap", "30",
                     "--out", path("conn.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["source"], nlohmann::json({1, 1, 0}));
  EXPECT_EQ(j["null_distribution"].size(), 30u);
  EXPECT_GE(j["f"].get<double>(), 0.0);
  EXPECT_EQ(slurp(path("conn.json")), r.out);
  EXPECT_EQ(run({"connectivity", path("ph.bvol"), "--source", "1,1,0", "--target", "1,1,0"}).code, 3);
  EXPECT_EQ(run({"connectivity", path("ph.bvol"), "--source", "9,1,0", "--target", "1,1,0"}).code, 3);
}

TEST_F(CliTest, GiniCommand) {
  {
    std::ofstream f(path("onehot.csv"));
    f << "x,y,z,statistic,p_value,active\n0,0,0,0,1,0\n1,0,0,2.5,0.001,1\n0,1,0,0,1,0\n1,1,0,0,1,0\n";
  }
  const CliRun r = run({"gini", path("onehot.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "0.75\n");
  {
    std::ofstream f(path("uniform.csv"));
    f << "x,y,z,statistic,p_value,active\n0,0,0,1,0,1\n1,0,0,1,0,1\n";
  }
  EXPECT_EQ(run({"gini", path("uniform.csv")}).out, "0\n");
  {
    std::ofstream f(path("zero.csv"));
    f << "x,y,z,statistic,p_value,active\n0,0,0,0.4,0.5,0\n1,0,0,0.1,0.7,0\n";
  }
  const CliRun zero = run({"gini", path("zero.csv")});
  EXPECT_EQ(zero.code, 3);
  EXPECT_FALSE(zero.err.empty());
  EXPECT_EQ(run({"gini", path("zero.csv"), "--mode", "statistic"}).code, 0);
  EXPECT_EQ(run({"gini", path("zero.csv"), "--mode", "bogus"}).code, 3);
}

TEST_F(CliTest, ExitCodes) {
  {
    std::ofstream f(path("bad.bvol"));
    f << "BVOL9\n";
  }
  EXPECT_EQ(run({"glm", path("bad.bvol"), path("ph.stim"), "--out", path("x")}).code, 2);
  EXPECT_EQ(run({"glm", path("missing.bvol"), path("ph.stim"), "--out", path("x")}).code, 2);
  EXPECT_EQ(run({"glm", path("ph.bvol"), path("ph.stim"), "--alpha", "0", "--out", path("x")}).code, 3);
  EXPECT_EQ(run({"gc", path("ph.bvol"), path("ph.stim"), "--bootstrap", "0", "--out", path("x")}).code, 3);
  EXPECT_EQ(run({"phantom", "--dims", "0,3,1", "--out", path("x")}).code, 3);
  EXPECT_EQ(run({"phantom", "--volumes", "100", "--out", path("x")}).code, 3);
  EXPECT_EQ(run({"nonsense"}).code, 3);
  EXPECT_EQ(run({"--help"}).code, 0);
}
