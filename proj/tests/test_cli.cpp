// Runs the dbkd binary end to end in a scratch directory.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           ("dbkd_cli_" + std::string(info->name()) + "_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    write("sim.json", R"({"logits": [1.2, -0.4, -0.8, 0.1], "sigma": 1.0, "seed": 3})");
    write("three.txt", "the quick brown fox jumps\nmovies are good fun\nhello again world\n");
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  void write(const std::string& name, const std::string& content) const {
    std::ofstream(path(name)) << content;
  }

  std::string read(const std::string& name) const {
    std::ifstream in(path(name), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  std::vector<std::string> lines(const std::string& name) const {
    std::vector<std::string> out;
    std::ifstream in(path(name));
    for (std::string line; std::getline(in, line);) {
      if (!line.empty()) out.push_back(line);
    }
    return out;
  }

  int run(const std::string& args) const {
    const std::string cmd = "cd '" + dir_.string() + "' && '" DBKD_CLI_PATH "' " + args +
                            " > stdout.txt 2> stderr.txt";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path dir_;
};

TEST_F(CliTest, EstimateWritesOneRecordPerInput) {
  ASSERT_EQ(run("estimate --input three.txt --oracle sim:sim.json --output out.jsonl"), 0);
  const auto records = lines("out.jsonl");
  ASSERT_EQ(records.size(), 3u);
  const char* ids[] = {"line-1", "line-2", "line-3"};
  for (std::size_t i = 0; i < 3; ++i) {
    const json j = json::parse(records[i]);
    EXPECT_EQ(j.at("id"), ids[i]);
    EXPECT_EQ(j.at("z_hat").size(), 4u);
    EXPECT_EQ(j.at("probabilities").size(), 4u);
  }
}

TEST_F(CliTest, EstimateDefaultsToTenDraws) {
  ASSERT_EQ(run("estimate --input three.txt --oracle sim:sim.json --output out.jsonl"), 0);
  for (const auto& line : lines("out.jsonl")) {
    const json j = json::parse(line);
    std::size_t total = 0;
    for (const auto& c : j.at("counts")) total += c.get<std::size_t>();
    EXPECT_EQ(total, 10u);
  }
}

TEST_F(CliTest, EstimateReadsJsonLinesInOrder) {
  write("in.jsonl", "{\"id\": \"b\", \"text\": \"second one\"}\n{\"id\": \"a\", \"text\": \"first\"}\n");
  ASSERT_EQ(run("estimate --input in.jsonl --oracle sim:sim.json --jobs 2 --output out.jsonl"), 0);
  const auto records = lines("out.jsonl");
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(json::parse(records[0]).at("id"), "b");
  EXPECT_EQ(json::parse(records[1]).at("id"), "a");
}

TEST_F(CliTest, EstimateIsReproducible) {
  ASSERT_EQ(run("estimate --input three.txt --oracle sim:sim.json --seed 5 --output a.jsonl"), 0);
  ASSERT_EQ(run("estimate --input three.txt --oracle sim:sim.json --seed 5 --output b.jsonl"), 0);
  EXPECT_EQ(read("a.jsonl"), read("b.jsonl"));
}

TEST_F(CliTest, EstimateWithTableMatchesDirectSolve) {
  ASSERT_EQ(run("table --labels 4 --n-augment 10 --output t.json"), 0);
  ASSERT_EQ(run("estimate --input three.txt --oracle sim:sim.json --output a.jsonl"), 0);
  ASSERT_EQ(run("estimate --input three.txt --oracle sim:sim.json --table t.json --output b.jsonl"),
            0);
  EXPECT_EQ(read("a.jsonl"), read("b.jsonl"));
}

TEST_F(CliTest, MissingInputFailsWithoutOutput) {
  EXPECT_EQ(run("estimate --input absent.txt --oracle sim:sim.json --output out.jsonl"), 2);
  EXPECT_FALSE(fs::exists(path("out.jsonl")));
  EXPECT_FALSE(fs::exists(path("out.jsonl.manifest.json")));
}

TEST_F(CliTest, MissingOracleFileIsAnIoError) {
  EXPECT_EQ(run("estimate --input three.txt --oracle sim:absent.json --output out.jsonl"), 2);
  EXPECT_FALSE(fs::exists(path("out.jsonl")));
}

TEST_F(CliTest, BadOracleSpecIsAUsageError) {
  EXPECT_EQ(run("estimate --input three.txt --oracle magic:x --output out.jsonl"), 1);
  EXPECT_EQ(run("estimate --input three.txt --oracle remote:http://127.0.0.1:9 --output o.jsonl"),
            1);
}

TEST_F(CliTest, UnreachableOracleFlagsPartialOutput) {
  EXPECT_EQ(run("estimate --input three.txt --oracle remote:http://127.0.0.1:9 --labels 4 "
                "--retries 0 --output out.jsonl"),
            3);
  EXPECT_TRUE(lines("out.jsonl").empty());
  const json m = json::parse(read("out.jsonl.manifest.json"));
  EXPECT_TRUE(m.at("partial").get<bool>());
  EXPECT_EQ(m.at("errors").size(), 3u);
  EXPECT_NE(read("stderr.txt").find("line-2"), std::string::npos);
}

TEST_F(CliTest, TableHasStarsAndBarsEntries) {
  ASSERT_EQ(run("table --labels 4 --n-augment 10 --output t.json"), 0);
  EXPECT_EQ(json::parse(read("t.json")).at("entries").size(), 286u);
  EXPECT_NE(read("stdout.txt").find("entries: 286"), std::string::npos);
  EXPECT_NE(read("stdout.txt").find("build_seconds"), std::string::npos);

  ASSERT_EQ(run("table --labels 2 --n-augment 1 --output small.json"), 0);
  EXPECT_EQ(json::parse(read("small.json")).at("entries").size(), 2u);
}

TEST_F(CliTest, TableRebuildIsByteIdentical) {
  ASSERT_EQ(run("table --labels 3 --n-augment 6 --output a.json"), 0);
  ASSERT_EQ(run("table --labels 3 --n-augment 6 --jobs 3 --output b.json"), 0);
  EXPECT_EQ(read("a.json"), read("b.json"));
}

TEST_F(CliTest, TableRejectsBadShapes) {
  EXPECT_EQ(run("table --labels 1 --n-augment 3 --output t.json"), 1);
  EXPECT_EQ(run("table --labels 3 --n-augment 0 --output t.json"), 1);
}

TEST_F(CliTest, TableUnwritablePathFails) {
  EXPECT_NE(run("table --labels 2 --n-augment 1 --output no/such/dir/t.json"), 0);
}

TEST_F(CliTest, SweepWritesOneRowPerGridValue) {
  ASSERT_EQ(run("sweep --parameter N --grid 1,2,5,10,20,40 --train 60 --test 60 --epochs 20 "
                "--output s.tsv"),
            0);
  const auto rows = lines("s.tsv");
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_EQ(rows[0], "N\taccuracy\tmse");
  EXPECT_EQ(rows[1].substr(0, 2), "1\t");
  EXPECT_EQ(rows[6].substr(0, 3), "40\t");
}

TEST_F(CliTest, EpsilonSweepWritesFiveRows) {
  ASSERT_EQ(run("sweep --parameter epsilon --grid 1e-4,1e-3,1e-2,1e-1,1 --train 60 --test 60 "
                "--epochs 20 --output s.tsv"),
            0);
  EXPECT_EQ(lines("s.tsv").size(), 6u);
}

TEST_F(CliTest, SweepUsageErrors) {
  EXPECT_EQ(run("sweep --parameter N --grid '' --output s.tsv"), 1);
  EXPECT_EQ(run("sweep --parameter depth --grid 1,2 --output s.tsv"), 1);
  EXPECT_EQ(run("sweep --parameter N --grid 1,x --output s.tsv"), 1);
  EXPECT_FALSE(fs::exists(path("s.tsv")));
}

TEST_F(CliTest, AugmentWritesNVariantsPerLine) {
  ASSERT_EQ(run("augment --input three.txt --n-augment 10 --seed 7 --output a.jsonl"), 0);
  const auto records = lines("a.jsonl");
  ASSERT_EQ(records.size(), 30u);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const json j = json::parse(records[i]);
    EXPECT_EQ(j.at("n").get<std::size_t>(), i % 10 + 1);
    EXPECT_FALSE(j.at("text").get<std::string>().empty());
  }
}

TEST_F(CliTest, AugmentSameSeedSameFile) {
  write("lex.tsv", "quick\tfast,speedy\nmovies\tfilms\ngood\tnice,fine\n");
  ASSERT_EQ(run("augment --input three.txt --lexicon lex.tsv --seed 3 --output a.jsonl"), 0);
  ASSERT_EQ(run("augment --input three.txt --lexicon lex.tsv --seed 3 --output b.jsonl"), 0);
  EXPECT_EQ(read("a.jsonl"), read("b.jsonl"));
  ASSERT_EQ(run("augment --input three.txt --lexicon lex.tsv --seed 4 --output c.jsonl"), 0);
  EXPECT_NE(read("a.jsonl"), read("c.jsonl"));
}

TEST_F(CliTest, AugmentZeroDrawsIsAUsageError) {
  EXPECT_EQ(run("augment --input three.txt --n-augment 0 --output a.jsonl"), 1);
  EXPECT_FALSE(fs::exists(path("a.jsonl")));
}

TEST_F(CliTest, DistillReportsEveryMethod) {
  ASSERT_EQ(run("distill --train 60 --test 60 --epochs 20 --output d.tsv"), 0);
  const auto rows = lines("d.tsv");
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[1].substr(0, 5), "hard\t");
  EXPECT_EQ(rows[4].substr(0, 5), "dbkd\t");
}

TEST_F(CliTest, EveryCommandWritesAManifest) {
  ASSERT_EQ(run("estimate --input three.txt --oracle sim:sim.json --output e.jsonl"), 0);
  ASSERT_EQ(run("table --labels 2 --n-augment 2 --output t.json"), 0);
  ASSERT_EQ(run("augment --input three.txt --n-augment 2 --output a.jsonl"), 0);
  ASSERT_EQ(run("sweep --parameter sigma --grid 1 --train 20 --test 20 --epochs 2 --output s.tsv"),
            0);
  ASSERT_EQ(run("distill --method dbkd --train 20 --test 20 --epochs 2 --output d.tsv"), 0);
  for (const char* out : {"e.jsonl", "t.json", "a.jsonl", "s.tsv", "d.tsv"}) {
    SCOPED_TRACE(out);
    const std::string name = std::string(out) + ".manifest.json";
    ASSERT_TRUE(fs::exists(path(name)));
    const json m = json::parse(read(name));
    EXPECT_EQ(m.at("tool"), "dbkd");
    EXPECT_TRUE(m.contains("version"));
    EXPECT_TRUE(m.at("config").is_object());
    EXPECT_FALSE(m.at("config").empty());
    EXPECT_EQ(m.at("outputs").at(0), out);
    EXPECT_FALSE(m.at("partial").get<bool>());
  }
  const json e = json::parse(read("e.jsonl.manifest.json"));
  EXPECT_EQ(e.at("config").at("solver").at("epsilon").get<double>(), 1e-3);
  EXPECT_EQ(e.at("config").at("n_augment").get<std::size_t>(), 10u);
}

}  // namespace
