#include <gtest/gtest.h>

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cfsv/cli.hpp"
#include "cfsv/fourier_pricer.hpp"
#include "cfsv/io.hpp"

using namespace cfsv;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<double>> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (...) {
        row.push_back(std::nan(""));
      }
    }
    rows.push_back(row);
  }
  return rows;
}

std::string header(const std::string& text) { return text.substr(0, text.find('\n')); }

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "cfsv_cli_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Cli, PriceMatchesLibrary) {
  const auto r = run({"price", "--te", "1", "--K", "1", "--out", scratch("price.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(io::read_file(scratch("price.json")));
  EXPECT_EQ(j["price"].get<double>(), call_price({1.0, 1.0, 1.0}, MarketCurves::flat(1.0), presets::baseline()));
  EXPECT_TRUE(j.contains("implied_vol"));
  EXPECT_EQ(j["diagnostics"]["panels"].get<int>(), 20);
  EXPECT_NE(r.out.find("implied_vol"), std::string::npos);
}

TEST(Cli, TinyStrikeGivesDiscountedForward) {
  const auto path = scratch("curves.json");
  io::write_file(path, R"({"forwards":[[0,2]],"discounts":[[0,1],[1,0.9]]})");
  const auto r = run({"--curves", path.string(), "price", "--K", "1e-8", "--out", scratch("tiny.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(io::read_file(scratch("tiny.json")));
  EXPECT_NEAR(j["price"].get<double>(), 0.9 * 2.0, 1e-7);
}

TEST(Cli, MissingFileIsInputError) {
  const auto r = run({"--params", "/nonexistent/p.json", "price"});
  EXPECT_EQ(r.code, cli::kExitInput);
  EXPECT_NE(r.err.find("cannot read"), std::string::npos);
}

TEST(Cli, BadUsageIsInputError) {
  EXPECT_EQ(run({}).code, cli::kExitInput);
  EXPECT_EQ(run({"price", "--te", "abc"}).code, cli::kExitInput);
  EXPECT_EQ(run({"--preset", "nope", "price"}).code, cli::kExitInput);
  EXPECT_EQ(run({"price", "--te", "2", "--T", "1"}).code, cli::kExitInput);
}

TEST(Cli, NumericalFailureExitCode) {
  const auto r = run({"price", "--te", "0.1", "--theta-max", "2", "--panel-width", "1"});
  EXPECT_EQ(r.code, cli::kExitNumerical);
  EXPECT_NE(r.err.find("QuadratureTailError"), std::string::npos);
}

TEST(Cli, TermStructureDecreasing) {
  const auto r = run({"--preset", "baseline", "term-structure"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(header(r.out), "t_e,T,K,price,implied_vol");
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 10u);
  EXPECT_DOUBLE_EQ(rows.front()[0], 0.1);
  EXPECT_DOUBLE_EQ(rows.back()[0], 5.0);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(rows[i][4], rows[i - 1][4]);
}

TEST(Cli, SmileShapes) {
  auto r = run({"smile"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 16u);
  double lo = 1e9, hi = -1e9;
  for (const auto& row : rows) lo = std::min(lo, row[4]), hi = std::max(hi, row[4]);
  EXPECT_GE(hi - lo, 0.005);

  auto p = presets::baseline();
  p.alpha = 0.0;
  io::write_file(scratch("flat.json"), io::params_to_json(p));
  r = run({"--params", scratch("flat.json").string(), "smile"});
  ASSERT_EQ(r.code, 0) << r.err;
  rows = parse_csv(r.out);
  for (const auto& row : rows) EXPECT_NEAR(row[4], rows.front()[4], 1e-8);
}

TEST(Cli, KTable) {
  const auto r = run({"k-table", "--t", "0.5,1", "--T", "1,2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(header(r.out), "t,T,k_sq,method");
  EXPECT_EQ(parse_csv(r.out).size(), 4u);
}

TEST(Cli, DriftStudyCsvAndManifestReplay) {
  const auto out = scratch("drift.csv");
  const auto r = run({"--seed", "7", "drift-study", "--alphas", "0,2", "--paths", "4000", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto text = io::read_file(out);
  EXPECT_EQ(header(text),
            "alpha,fwd_err_bp,fwd_stderr_bp,atm_vol_err_pct,atm_vol_stderr_pct,otm_vol_err_pct,otm_vol_stderr_pct");
  const auto rows = parse_csv(text);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_LE(std::abs(rows[0][1]), 1e-8);

  const auto manifest = nlohmann::json::parse(io::read_file(out.string() + ".manifest.json"));
  EXPECT_EQ(manifest["command"], "drift-study");
  EXPECT_EQ(manifest["seed"].get<std::uint64_t>(), 7u);
  EXPECT_EQ(manifest["config"]["preset"], "drift");
  EXPECT_EQ(manifest["config"]["mc"]["n_steps"].get<int>(), 100);
  EXPECT_EQ(manifest["outputs"][0]["sha256"], cli::sha256_hex(text));

  std::filesystem::remove(out);
  const auto replay = run({"replay", "--manifest", out.string() + ".manifest.json"});
  EXPECT_EQ(replay.code, 0) << replay.err;
  EXPECT_NE(replay.out.find("match"), std::string::npos);
  EXPECT_EQ(io::read_file(out), text);
}

TEST(Cli, ReplayDetectsTampering) {
  const auto out = scratch("mc.json");
  ASSERT_EQ(run({"mc-price", "--paths", "2000", "--steps", "20", "--out", out.string()}).code, 0);
  auto m = nlohmann::json::parse(io::read_file(out.string() + ".manifest.json"));
  m["outputs"][0]["sha256"] = std::string(64, '0');
  io::write_file(scratch("tampered.json"), m.dump());
  EXPECT_NE(run({"replay", "--manifest", scratch("tampered.json").string()}).code, 0);
}

TEST(Cli, McPricePayoffs) {
  for (std::string payoff : {"vanilla", "early", "forward", "asian"}) {
    const auto r = run({"mc-price", "--payoff", payoff, "--te", "1", "--T", payoff == "vanilla" ? "1" : "1.5",
                        "--paths", "4000", "--steps", "20"});
    EXPECT_EQ(r.code, 0) << payoff << ": " << r.err;
    EXPECT_NE(r.out.find("std_error"), std::string::npos);
  }
  EXPECT_EQ(run({"mc-price", "--payoff", "barrier"}).code, cli::kExitInput);
  EXPECT_EQ(run({"mc-price", "--mode", "approx", "--paths", "2000", "--steps", "10"}).code, 0);
}

TEST(Cli, Calibrate) {
  std::vector<VolQuote> quotes;
  for (double K : {0.9, 1.0, 1.1}) {
    const double price = call_price({1.0, 1.0, K}, MarketCurves::flat(1.0), presets::baseline());
    quotes.push_back({1.0, 1.0, K, implied_vol(price, 1.0, K, 1.0, 1.0, OptionKind::Call), 1.0});
  }
  io::write_file(scratch("quotes.json"), io::quotes_to_json(quotes));
  const auto out = scratch("fitted.json");
  const auto r = run({"calibrate", "--quotes", scratch("quotes.json").string(), "--budget", "20", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(io::load_params(out), presets::baseline());
  EXPECT_NE(r.out.find("converged"), std::string::npos);
}
