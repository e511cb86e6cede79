#include "tfa/cli.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>

using namespace tfa;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path scratch(const std::string &name) {
  const fs::path d = fs::temp_directory_path() / "tfa_tests" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

cli::RunResult run_json(json j) { return cli::run(cli::RunConfig::from_json(j)); }

std::vector<std::vector<double>> read_csv(const fs::path &p, std::string &header) {
  std::istringstream is(io::read_text(p));
  std::getline(is, header);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    std::vector<double> r;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ','))
      r.push_back(cell.empty() ? NAN : std::stod(cell));
    rows.push_back(r);
  }
  return rows;
}

int run_binary(const std::string &args) {
  const std::string cmd = std::string(TFA_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

} // namespace

TEST(ArrayIo, RoundTripComplexAndReal) {
  const auto d = scratch("arrays");
  std::mt19937_64 rng(1);
  const auto f = oracle::random_signal(Grid(64, 0.125), rng);
  io::write_signal(d / "f.arr.json", f);
  EXPECT_TRUE(fs::exists(d / "f.bin"));
  EXPECT_EQ(fs::file_size(d / "f.bin"), 64u * 16u);
  const auto back = io::read_signal(d / "f.arr.json");
  EXPECT_EQ(back.grid(), f.grid());
  EXPECT_EQ(max_abs_diff(back, f), 0.0);

  io::ArrayData r{io::DType::F64, {2, 3}, {1.0, 2.0, 3.0, 4.0, 5.0, 6.5}, {{"label", "x"}}};
  io::write_array(d / "r.arr.json", r);
  const auto rb = io::read_array(d / "r.arr.json");
  EXPECT_EQ(rb.dtype, io::DType::F64);
  EXPECT_EQ(rb.shape, (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(rb.values[5], cplx(6.5));
  EXPECT_EQ(rb.meta.at("label"), "x");
  EXPECT_EQ(fs::file_size(d / "r.bin"), 6u * 8u);
}

TEST(ArrayIo, PhaseRoundTrip) {
  const auto d = scratch("phase");
  const TFGrid ax{Grid(16, 0.25), Grid(8, 0.5)};
  const auto F = PhaseArray::from_function(ax, [](double x, double xi) { return x - 2 * xi; });
  io::write_phase(d / "F.arr.json", F);
  const auto G = io::read_phase(d / "F.arr.json");
  EXPECT_EQ(G.axes(), F.axes());
  EXPECT_EQ(oracle::max_abs_diff(F, G), 0.0);
}

TEST(ArrayIo, ErrorsNameTheProblem) {
  const auto d = scratch("errors");
  try {
    io::read_array(d / "missing.arr.json");
    FAIL();
  } catch (const IoError &e) {
    EXPECT_NE(std::string(e.what()).find("missing.arr.json"), std::string::npos);
  }
  io::write_text(d / "bad.arr.json", R"({"dtype":"c128","order":"row-major","data":"bad.bin"})");
  try {
    io::read_array(d / "bad.arr.json");
    FAIL();
  } catch (const IoError &e) {
    EXPECT_NE(std::string(e.what()).find("'shape'"), std::string::npos);
  }
  io::write_text(d / "short.arr.json",
                 R"({"dtype":"f64","shape":[4],"order":"row-major","data":"short.bin"})");
  io::write_text(d / "short.bin", std::string(8, '\0'));
  EXPECT_THROW(io::read_array(d / "short.arr.json"), IoError);
  io::write_text(d / "junk.json", "{not json");
  EXPECT_THROW(io::read_json(d / "junk.json"), IoError);
}

TEST(SequenceIo, RoundTrip) {
  const auto d = scratch("seq");
  LatticeSeq a({0.5, 2.0});
  a.set({1, -2}, cplx(1.5, -0.5));
  a.set({0, 0}, 2.0);
  io::write_sequence(d / "a.json", a);
  const auto b = io::read_sequence(d / "a.json");
  EXPECT_EQ(b.geometry(), a.geometry());
  EXPECT_EQ(b.values(), a.values());
  EXPECT_THROW(io::sequence_from_json(json{{"entries", json::array()}}, "x"), IoError);
}

TEST(Config, ValidationCarriesFieldPath) {
  auto expect_msg = [](json j, const std::string &needle) {
    try {
      cli::RunConfig::from_json(j);
      FAIL() << j.dump();
    } catch (const ConfigError &e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  expect_msg({{"module", "frame"}, {"command", "bounds"}, {"N", "big"}}, "config.N");
  expect_msg({{"module", "frame"}, {"command", "bounds"}, {"bogus", 1}}, "config.bogus");
  expect_msg({{"module", "frame"}, {"command", "nope"}}, "config.command");
  expect_msg({{"module", "nope"}, {"command", "x"}}, "config.module");
  expect_msg({{"module", "weights"}, {"command", "check"}, {"params", "1,2"}}, "config.params");
}

TEST(Run, DiagVerifyExampleCertifies) {
  const auto r = run_json({{"module", "diag"}, {"command", "verify"}, {"symbol", "gaussian2d"},
                           {"window", "gaussian"}, {"s", 0.5}, {"N", 128}, {"a", 8}, {"b", 8}});
  ASSERT_EQ(r.exit_code, 0) << r.message << r.report.dump();
  EXPECT_TRUE(r.report.at("result").at("certified").get<bool>());
  EXPECT_EQ(r.report.at("status"), "ok");
  EXPECT_EQ(r.report.at("tool").at("version"), cli::tool_version);
  EXPECT_TRUE(r.report.at("catalog").contains("symbol"));
  EXPECT_EQ(r.report.at("config").at("symbol"), "gaussian2d");
}

TEST(Run, MissingInputFileIsUsageError) {
  const auto r = run_json({{"module", "seq"}, {"command", "norm"}, {"in", "/nonexistent/a.json"}});
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.message.find("/nonexistent/a.json"), std::string::npos) << r.message;
}

TEST(Run, FrameBoundsAtCriticalDensity) {
  const auto r = run_json({{"module", "frame"}, {"command", "bounds"}, {"N", 256},
                           {"a", 16}, {"b", 16}});
  ASSERT_EQ(r.exit_code, 0) << r.message;
  EXPECT_FALSE(r.report.at("result").at("is_frame_trend").get<bool>());
  EXPECT_EQ(r.report.at("result").at("trend").size(), 3u);
}

TEST(Run, NegativeControlsExitTwo) {
  EXPECT_EQ(run_json({{"module", "weights"}, {"command", "check"}, {"kind", "sub"},
                      {"params", {-1, 1, 0, 0}}})
                .exit_code,
            2);
  EXPECT_EQ(run_json({{"module", "frame"}, {"command", "dual"}, {"N", 256}, {"a", 16},
                      {"b", 16}})
                .exit_code,
            2);
  json grow = {{"module", "diag"}, {"command", "verify"}, {"symbol", "growing"}, {"s", 1.0},
               {"N", 128}, {"a", 8}, {"b", 8}};
  EXPECT_EQ(run_json(grow).exit_code, 1);
  grow["allow_uncertified"] = true;
  EXPECT_EQ(run_json(grow).exit_code, 2);
}

TEST(Run, RandomizedRunsNeedSeed) {
  const json base = {{"module", "frame"}, {"command", "reconstruct"}, {"N", 128}, {"a", 8},
                     {"b", 8}};
  const auto r = run_json(base);
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.message.find("config.seed"), std::string::npos);
  json seeded = base;
  seeded["seed"] = 42;
  const auto ok = run_json(seeded);
  EXPECT_EQ(ok.exit_code, 0) << ok.message;
  EXPECT_LE(ok.report.at("result").at("reconstruction_error").get<double>(), 1e-8);
}

TEST(Run, ReportsAreByteIdentical) {
  const auto d = scratch("determinism");
  json j = {{"module", "frame"}, {"command", "reconstruct"}, {"N", 128}, {"a", 8}, {"b", 8},
            {"seed", 7}};
  j["out"] = (d / "one.json").string();
  ASSERT_EQ(run_json(j).exit_code, 0);
  j["out"] = (d / "two.json").string();
  ASSERT_EQ(run_json(j).exit_code, 0);
  auto one = io::read_json(d / "one.json"), two = io::read_json(d / "two.json");
  one["config"].erase("out");
  two["config"].erase("out");
  EXPECT_EQ(one.dump(2), two.dump(2));
  EXPECT_EQ(io::read_text(d / "one.reconstructed.bin"), io::read_text(d / "two.reconstructed.bin"));
}

TEST(Plotdata, EnvelopeCsvSortedWithDominatingBound) {
  const auto d = scratch("plot");
  const auto r = run_json({{"module", "diag"}, {"command", "fit"}, {"symbol", "constant"},
                           {"N", 128}, {"a", 8}, {"b", 8}, {"s", 0.5},
                           {"out", (d / "gram.json").string()}});
  ASSERT_EQ(r.exit_code, 0) << r.message;
  std::string header;
  const auto rows = read_csv(d / "gram.envelope.csv", header);
  EXPECT_EQ(header, "abs_z,H,bound");
  ASSERT_FALSE(rows.empty());
  const double floor = r.report.at("result").at("fit").at("floor").get<double>();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ASSERT_EQ(rows[i].size(), 3u);
    if (i > 0)
      EXPECT_LE(rows[i - 1][0], rows[i][0]);
    if (rows[i][1] > floor)
      EXPECT_LE(rows[i][1], rows[i][2] * (1 + 1e-9));
  }
}

TEST(Plotdata, EmptyEnvelopeIsHeaderOnly) {
  EXPECT_EQ(cli::envelope_csv(Envelope{}), "abs_z,H,bound\n");
  const auto d = scratch("empty");
  cli::emit_plotdata(d / "e.csv", Envelope{});
  std::string header;
  EXPECT_TRUE(read_csv(d / "e.csv", header).empty());
  EXPECT_EQ(header, "abs_z,H,bound");
}

TEST(Plotdata, HeatmapColumns) {
  const TFGrid ax{Grid(4, 0.5), Grid(4, 0.5)};
  const auto F = PhaseArray::from_function(ax, [](double x, double) { return -x; });
  const auto d = scratch("heat");
  cli::emit_plotdata(d / "h.csv", F);
  std::string header;
  const auto rows = read_csv(d / "h.csv", header);
  EXPECT_EQ(header, "x,xi,abs_V");
  ASSERT_EQ(rows.size(), 16u);
  EXPECT_DOUBLE_EQ(rows[0][0], -1.0);
  EXPECT_DOUBLE_EQ(rows[0][2], 1.0);
}

TEST(Binary, ExitCodes) {
  const auto d = scratch("binary");
  EXPECT_EQ(run_binary("--version"), 0);
  EXPECT_EQ(run_binary("frame bounds --N 128 --a 8 --b 8 --out " + (d / "b.json").string()), 0);
  EXPECT_TRUE(fs::exists(d / "b.json"));
  EXPECT_EQ(run_binary("weights check --kind sub --params=-1,1,0,0"), 2);
  EXPECT_EQ(run_binary("seq norm --in " + (d / "nope.json").string()), 1);
  EXPECT_EQ(run_binary("frame bounds --N notanumber"), 1);
}

TEST(Binary, ConfigFileAndFlagPrecedence) {
  const auto d = scratch("config");
  io::write_json(d / "run.json", {{"module", "frame"}, {"command", "bounds"}, {"N", 64},
                                  {"a", 4}, {"b", 4}});
  const auto out = d / "r.json";
  EXPECT_EQ(run_binary("frame bounds --config " + (d / "run.json").string() + " --N 128 --out " +
                       out.string()),
            0);
  const auto rep = io::read_json(out);
  EXPECT_EQ(rep.at("config").at("N"), 128);
  EXPECT_EQ(rep.at("config").at("a"), 4);
}
