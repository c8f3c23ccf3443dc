#include "cli.hpp"
#include "oracle/dense.hpp"
#include "rosa/tsv.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "rosa");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out, err;
    const int code = rosa::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
}

std::vector<std::string> csv_column(const std::string& csv, std::size_t col) {
    std::vector<std::string> out;
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::istringstream fields(line);
        std::string f;
        for (std::size_t i = 0; i <= col; ++i) {
            std::getline(fields, f, ',');
        }
        out.push_back(f);
    }
    return out;
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("rosa_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    fs::path dir_;
};

} // namespace

TEST_F(Cli, NoSubcommandIsUsageError) { EXPECT_EQ(cli({}).code, 2); }

TEST_F(Cli, HelpExitsZero) {
    const auto r = cli({"bench", "--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("--log2-size"), std::string::npos);
}

TEST_F(Cli, BenchWritesOneRowPerPointDeterministically) {
    const auto csv1 = dir_ / "r1.csv";
    const auto csv2 = dir_ / "r2.csv";
    for (const auto& p : {csv1, csv2}) {
        const auto r = cli({"bench", "--log2-size", "12", "--forkers", "1,2,4", "--steps", "4", "--seed", "7",
                            "--out", p.string()});
        ASSERT_EQ(r.code, 0) << r.err;
    }
    const auto a = slurp(csv1);
    const auto b = slurp(csv2);
    EXPECT_EQ(a.substr(0, a.find('\n')),
              "forkers,log2_n,nnz_per_row,processes_managed,total_forks,elapsed_seconds,fork_rate_per_second");
    EXPECT_EQ(csv_column(a, 0), (std::vector<std::string>{"1", "2", "4"}));
    EXPECT_EQ(csv_column(a, 3), (std::vector<std::string>{"4096", "8192", "16384"}));
    EXPECT_EQ(csv_column(a, 3), csv_column(b, 3));
    EXPECT_EQ(csv_column(a, 4), csv_column(b, 4));
}

TEST_F(Cli, BenchRejectsOutOfRangeSize) {
    const auto r = cli({"bench", "--log2-size", "30"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("30"), std::string::npos) << r.err;
}

TEST_F(Cli, BenchRejectsNnzAboveRowWidth) {
    EXPECT_EQ(cli({"bench", "--log2-size", "4", "--nnz-per-row", "17", "--forkers", "1"}).code, 2);
}

TEST_F(Cli, ThreadsFlagBeatsEnvironment) {
    ::setenv("ROSA_THREADS", "bogus", 1);
    EXPECT_EQ(cli({"bench", "--log2-size", "6", "--steps", "1"}).code, 2);
    const auto csv = dir_ / "t.csv";
    const auto r = cli({"bench", "--log2-size", "6", "--steps", "1", "--threads", "2", "--out", csv.string()});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(csv_column(slurp(csv), 0), (std::vector<std::string>{"1", "2", "4"}));
    ::setenv("ROSA_THREADS", "1", 1);
    const auto r2 = cli({"bench", "--log2-size", "6", "--steps", "1", "--out", csv.string()});
    EXPECT_EQ(r2.code, 0) << r2.err;
    EXPECT_EQ(csv_column(slurp(csv), 0), (std::vector<std::string>{"1", "2"}));
    ::unsetenv("ROSA_THREADS");
}

TEST_F(Cli, KernelForkOnEmptyStateFails) {
    const auto script = dir_ / "s.rk";
    spit(script, "fork 1\n");
    const auto r = cli({"kernel", script.string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("no such process"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("fork 1"), std::string::npos) << r.err;
}

TEST_F(Cli, KernelBootstrapPrintsTwoPids) {
    const auto script = dir_ / "boot.rk";
    spit(script, "spawn 64\nfork 1\ngetpid\n");
    const auto r = cli({"kernel", script.string()});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("getpid => 1 2\n"), std::string::npos) << r.out;
}

TEST_F(Cli, KernelEmptyScriptSucceeds) {
    const auto script = dir_ / "empty.rk";
    spit(script, "");
    EXPECT_EQ(cli({"kernel", script.string()}).code, 0);
}

TEST_F(Cli, KernelParseErrorNamesLine) {
    const auto script = dir_ / "bad.rk";
    spit(script, "spawn\n\nfork\n");
    const auto r = cli({"kernel", script.string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
}

TEST_F(Cli, KernelDumpsAreByteIdenticalAcrossRuns) {
    const auto script = dir_ / "d.rk";
    const auto p1 = dir_ / "p1.tsv";
    const auto p2 = dir_ / "p2.tsv";
    for (const auto& p : {p1, p2}) {
        spit(script, "spawn 10\nforkn 3 1\nsbrk 2 5\nopen path|/a\ndump P " + p.string() + "\n");
        ASSERT_EQ(cli({"kernel", script.string()}).code, 0);
    }
    EXPECT_FALSE(slurp(p1).empty());
    EXPECT_EQ(slurp(p1), slurp(p2));

    const auto h1 = dir_ / "h1.tsv";
    const auto h2 = dir_ / "h2.tsv";
    for (const auto& p : {h1, h2}) {
        spit(script, "spawn 10\nspawn 20\nopen path|/a\ndump F " + p.string() + "\n");
        ASSERT_EQ(cli({"kernel", "--hash-ids", "--seed", "9", script.string()}).code, 0);
    }
    EXPECT_EQ(slurp(h1), slurp(h2));
}

TEST_F(Cli, ConvertStatsAndCanonicalRoundTrip) {
    const auto in = dir_ / "in.tsv";
    const auto out = dir_ / "out.tsv";
    const std::string original = "2\tb\t1\n1\ta\t2\n1\ta\t3\n";
    spit(in, original);
    const auto r = cli({"convert", in.string(), "--stats", "--out", out.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("nnz\t2\nrows\t2\ncols\t2\n"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("a\t1\nb\t1\n"), std::string::npos) << r.out;
    const auto loaded = rosa::from_tsv(original, rosa::plus_times());
    EXPECT_EQ(slurp(out), rosa::to_tsv(loaded));
    EXPECT_EQ(slurp(in), original);
}

TEST_F(Cli, ConvertRoundTripOnRandomFile) {
    std::mt19937_64 rng(4);
    const auto pool = oracle::key_pool(40);
    const auto a = oracle::random_array(rosa::plus_times(), rng, pool, 0.5);
    const auto in = dir_ / "rand.tsv";
    const auto out = dir_ / "rand_out.tsv";
    rosa::save_tsv(a, in);
    ASSERT_EQ(cli({"convert", in.string(), "--out", out.string()}).code, 0);
    EXPECT_EQ(slurp(out), slurp(in));
}

TEST_F(Cli, ConvertTruncatedLineIsUsageError) {
    const auto in = dir_ / "bad.tsv";
    spit(in, "1\ta\t2\n2\tb\n");
    const auto r = cli({"convert", in.string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
}

TEST_F(Cli, ConvertSetValues) {
    const auto in = dir_ / "sets.tsv";
    spit(in, "alice\tf\tr,w\n");
    EXPECT_EQ(cli({"convert", in.string(), "--semiring", "union.intersection", "--universe", "r,w,x"}).code, 0);
    EXPECT_EQ(cli({"convert", in.string(), "--semiring", "union.intersection", "--universe", "r"}).code, 2);
}
