#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mappfn/data/dataset_io.hpp"

namespace mappfn {
namespace {

namespace fs = std::filesystem;

int run(const std::string& args) {
  const std::string cmd = std::string(MAPPFN_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mappfn_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Byte equality of every file in two directories with the same listing.
bool same_tree(const fs::path& a, const fs::path& b) {
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    const fs::path other = b / e.path().filename();
    if (!fs::exists(other) || slurp(e.path()) != slurp(other)) return false;
    ++files;
  }
  return files == static_cast<std::size_t>(std::distance(fs::directory_iterator(b), fs::directory_iterator{}));
}

TEST(Cli, ParseErrorsExitTwo) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("gen-scm --bogus"), 2);
  EXPECT_EQ(run("train --prior nope"), 2);
  EXPECT_EQ(run("--help"), 0);
}

TEST(Cli, ValidationErrorsExitTwo) {
  const auto dir = scratch("validation");
  EXPECT_EQ(run("--out " + (dir / "e").string() + " eval --data " + (dir / "missing").string()), 2);
  EXPECT_EQ(run("gen-scm --dags 2"), 2);
  EXPECT_EQ(run("--out " + (dir / "g").string() + " gen-scm --dags 1 --nodes 0"), 2);
}

TEST(Cli, NumericalFailureExitsThree) {
  const auto dir = scratch("numerical");
  ASSERT_EQ(run("--seed 1 --out " + (dir / "d").string() + " gen-scm --dags 2 --samples 30"), 0);
  EXPECT_EQ(run("--out " + (dir / "m.bin").string() + " train --data " + (dir / "d").string() +
                " --steps 5 --batch 2 --lr 1e30"),
            3);
}

TEST(Cli, GenScmIsDeterministicAcrossWorkers) {
  const auto dir = scratch("gen_scm");
  const std::string base = " gen-scm --dags 5 --samples 30";
  ASSERT_EQ(run("--seed 4 --workers 1 --out " + (dir / "a").string() + base), 0);
  ASSERT_EQ(run("--seed 4 --workers 3 --out " + (dir / "b").string() + base), 0);
  ASSERT_EQ(run("--seed 5 --out " + (dir / "c").string() + base), 0);
  EXPECT_TRUE(same_tree(dir / "a", dir / "b"));
  EXPECT_FALSE(same_tree(dir / "a", dir / "c"));
  EXPECT_EQ(data::read_dataset(dir / "a").contexts.size(), 5u);
}

TEST(Cli, ConfigFileSuppliesGlobalFlags) {
  const auto dir = scratch("config");
  std::ofstream(dir / "run.ini") << "seed=4\nout=" << (dir / "a").string() << "\n";
  ASSERT_EQ(run("--config " + (dir / "run.ini").string() + " gen-scm --dags 2 --samples 20"), 0);
  ASSERT_EQ(run("--seed 4 --out " + (dir / "b").string() + " gen-scm --dags 2 --samples 20"), 0);
  EXPECT_TRUE(same_tree(dir / "a", dir / "b"));
}

TEST(Cli, TrainEvalReportPipeline) {
  const auto dir = scratch("pipeline");
  const std::string data = (dir / "d").string();
  ASSERT_EQ(run("--seed 2 --out " + data + " gen-scm --dags 4 --samples 30"), 0);
  const std::string train = " train --data " + data + " --steps 3 --batch 2 --exclude-context 3";
  ASSERT_EQ(run("--seed 2 --out " + (dir / "m1.bin").string() + train), 0);
  ASSERT_EQ(run("--seed 2 --workers 2 --out " + (dir / "m2.bin").string() + train), 0);
  EXPECT_EQ(slurp(dir / "m1.bin"), slurp(dir / "m2.bin"));
  EXPECT_TRUE(fs::exists(dir / "m1.bin.loss.csv"));

  const std::string eval = " eval --data " + data + " --checkpoint " + (dir / "m1.bin").string() + " --holdout 3";
  ASSERT_EQ(run("--seed 2 --out " + (dir / "e1").string() + eval), 0);
  ASSERT_EQ(run("--seed 2 --workers 3 --out " + (dir / "e2").string() + eval), 0);
  EXPECT_EQ(slurp(dir / "e1" / "report.csv"), slurp(dir / "e2" / "report.csv"));
  EXPECT_TRUE(fs::exists(dir / "e1" / "summary.json"));

  ASSERT_EQ(run("--out " + (dir / "r").string() + " report " + (dir / "e1" / "report.csv").string()), 0);
  EXPECT_EQ(slurp(dir / "r" / "report.csv"), slurp(dir / "e1" / "report.csv"));
  EXPECT_EQ(run("--out " + (dir / "x").string() + " eval --data " + data + " --baselines false"), 2);
}

TEST(Cli, IngestWritesNormalizedDataset) {
  const auto dir = scratch("ingest");
  std::ofstream(dir / "counts.csv") << "g0,g1\n2,2\n8,0\n4,4\n";
  std::ofstream(dir / "labels.csv") << "cell_id,context,treatment\nc0,k562,control\nc1,k562,g0\nc2,k562,control\n";
  ASSERT_EQ(run("--out " + (dir / "d").string() + " ingest --matrix " + (dir / "counts.csv").string() + " --labels " +
                (dir / "labels.csv").string()),
            0);
  const auto ds = data::read_dataset(dir / "d");
  ASSERT_EQ(ds.contexts.size(), 1u);
  EXPECT_EQ(ds.contexts[0].observational.rows(), 2);
  ASSERT_EQ(ds.contexts[0].conditions.size(), 1u);
  EXPECT_EQ(ds.contexts[0].conditions[0].treatment_id, 0);
  EXPECT_EQ(run("--out " + (dir / "e").string() + " ingest --matrix " + (dir / "none.csv").string() + " --labels " +
                (dir / "labels.csv").string()),
            2);
}

}  // namespace
}  // namespace mappfn
