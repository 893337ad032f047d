#include <doctest.h>

#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "priceopt/cli.hpp"
#include "priceopt/io.hpp"
#include "priceopt/sdp.hpp"
#include "priceopt/sim.hpp"

using namespace priceopt;
using nlohmann::json;

namespace {

struct Run {
  int exit = -1;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Run r;
  r.exit = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// Fresh scratch directory per test case.
class Scratch {
 public:
  explicit Scratch(const std::string& name)
      : dir_(std::filesystem::temp_directory_path() / ("priceopt_cli_" + name)) {
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  ~Scratch() { std::filesystem::remove_all(dir_); }
  std::string path(const std::string& file) const { return (dir_ / file).string(); }

 private:
  std::filesystem::path dir_;
};

std::string write_truth_model(const Scratch& s, std::size_t M, std::uint64_t seed) {
  std::ostringstream os;
  write_model_json(os, generate(M, seed).model());
  const std::string path = s.path("truth.json");
  write_text_file(path, os.str());
  return path;
}

json error_line(const Run& r) {
  REQUIRE(!r.err.empty());
  CHECK(r.err.find('\n') == r.err.size() - 1);
  return json::parse(r.err);
}

}  // namespace

TEST_CASE("usage errors and help") {
  CHECK(run({}).exit == kExitUsage);
  const Run bogus = run({"bogus"});
  CHECK(bogus.exit == kExitUsage);
  CHECK(error_line(bogus)["level"] == "error");
  CHECK(run({"--help"}).exit == kExitOk);
  CHECK(run({"optimize", "--t-search", "many"}).exit == kExitUsage);
  CHECK(run({"optimize"}).exit == kExitUsage);
}

TEST_CASE("exit code mapping") {
  CHECK(exit_code_for(ErrorCode::Parse) == 2);
  CHECK(exit_code_for(ErrorCode::SingularDesign) == 3);
  CHECK(exit_code_for(ErrorCode::SdpSolveFailure) == 4);
  CHECK(exit_code_for(ErrorCode::Infeasible) == 4);
  CHECK(exit_code_for(ErrorCode::NoFeasibleFound) == 5);
  CHECK(exit_code_for(ErrorCode::Io) == 6);
}

TEST_CASE("fit: missing column") {
  Scratch s("missing");
  write_text_file(s.path("d.csv"), "p_1,p_2,p_3,q_1,q_2\n1,1,1,1,1\n");
  const Run r = run({"fit", "--data", s.path("d.csv"), "--out", s.path("m.json")});
  CHECK(r.exit == kExitUsage);
  const json e = error_line(r);
  CHECK(e["exit"] == 2);
  CHECK(e["message"].get<std::string>().find("q_3") != std::string::npos);
}

TEST_CASE("fit: noiseless data and singular designs") {
  Scratch s("fit");
  const Run gen = run({"simulate", "dataset", "--products", "3", "--samples", "200", "--noise", "0",
                       "--seed", "4", "--out", s.path("d.csv")});
  REQUIRE(gen.exit == kExitOk);
  for (const char* method : {"ols", "lsomp"}) {
    const Run fit = run({"fit", "--data", s.path("d.csv"), "--out", s.path("m.json"), "--method", method,
                         "--forced", "3", "--k", "0"});
    REQUIRE(fit.exit == kExitOk);
    const json report = json::parse(fit.out);
    CHECK(report["method"] == method);
    for (double e : report["relative_errors"]) CHECK(e <= 1e-6);
  }
  CHECK(run({"fit", "--data", s.path("d.csv"), "--out", s.path("m.json"), "--method", "magic"}).exit == kExitUsage);

  write_text_file(s.path("flat.csv"), "p_1,p_2,q_1,q_2\n1,1,2,3\n0.9,0.9,2.5,3.1\n0.8,0.8,3,3.3\n1,1,2,3\n0.9,0.9,2.4,3\n");
  const Run singular = run({"fit", "--data", s.path("flat.csv"), "--out", s.path("m.json")});
  CHECK(singular.exit == kExitFit);
  CHECK(error_line(singular)["code"] == "SingularDesign");
}

TEST_CASE("fit: calibrated noise shows up as relative error") {
  Scratch s("noise");
  REQUIRE(run({"simulate", "dataset", "--products", "6", "--samples", "1000", "--noise", "0.2", "--seed", "5",
               "--out", s.path("d.csv")}).exit == kExitOk);
  const Run fit = run({"fit", "--data", s.path("d.csv"), "--out", s.path("m.json")});
  REQUIRE(fit.exit == kExitOk);
  CHECK(std::abs(json::parse(fit.out)["mean_relative_error"].get<double>() - 0.2) < 0.05);
}

TEST_CASE("optimize: single product without price response keeps the list price") {
  Scratch s("single");
  DemandModel model(FeatureBank::standard(), 1, 1);
  model.step(0).alpha << 10.0;
  std::ostringstream os;
  write_model_json(os, model);
  write_text_file(s.path("m.json"), os.str());
  const Run r = run({"optimize", "--model", s.path("m.json"), "--grid", "values:1,0.9", "--costs", "const:0.7"});
  REQUIRE(r.exit == kExitOk);
  const json report = json::parse(r.out);
  CHECK(report["candidates"] == json::array({1}));
  CHECK(std::abs(report["delta"].get<double>() - 1.0) <= 1e-6);
  CHECK(report["objective"].get<double>() == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(report["products"][0]["original_price"] == 1.0);
}

TEST_CASE("optimize: matches brute force and is re-verifiable") {
  Scratch s("five");
  const std::string model = write_truth_model(s, 5, 6);
  const std::vector<std::string> args{"optimize", "--model", model, "--grid", "values:1,0.95,0.9,0.85,0.8",
                                      "--costs", "const:0.7", "--brute-force", "--bqp-out", s.path("p.json")};
  const Run r = run(args);
  REQUIRE(r.exit == kExitOk);
  const json report = json::parse(r.out);
  CHECK(report["objective"].get<double>() == doctest::Approx(report["optimum"].get<double>()).epsilon(1e-12));
  CHECK(report["method"] == "deterministic");

  std::istringstream in(read_text_file(s.path("p.json")));
  const BqpProblem prob = read_bqp_json(in);
  const auto zv = report["z"].get<std::vector<int>>();
  const BinaryVector z(zv.begin(), zv.end());
  CHECK(objective(prob, z) == report["objective"].get<double>());
  CHECK(run(args).out == r.out);
}

TEST_CASE("optimize: discount limit bounds the number of changed prices") {
  Scratch s("limit");
  const std::string model = write_truth_model(s, 12, 7);
  write_text_file(s.path("c.json"), R"({"constraints": [{"type": "max_discount", "L": 10}]})");
  const Run r = run({"optimize", "--model", model, "--grid", "values:1,0.95,0.9,0.85,0.8", "--costs",
                     "const:0.7", "--revenue", "--constraints", s.path("c.json")});
  REQUIRE(r.exit == kExitOk);
  int changed = 0;
  for (const auto& row : json::parse(r.out)["products"]) {
    if (row["optimal_price"] != row["original_price"]) ++changed;
  }
  CHECK(changed <= 10);
}

TEST_CASE("optimize: failure exit codes") {
  Scratch s("fail");
  CHECK(run({"optimize", "--model", s.path("absent.json"), "--grid", "values:1,0.9"}).exit == kExitIo);

  const std::string model = write_truth_model(s, 2, 8);
  write_text_file(s.path("bad.json"), R"({"constraints": [{"type": "eq", "rhs": 3, "terms": [{"product": 1, "candidate": 1}]}]})");
  const Run sdp = run({"optimize", "--model", model, "--grid", "values:1,0.9", "--constraints", s.path("bad.json")});
  CHECK(sdp.exit == kExitSdp);
  CHECK(error_line(sdp)["code"] == "Infeasible");

  write_text_file(s.path("grid.json"), "[[1.0, 0.9]]");
  CHECK(run({"optimize", "--model", model, "--grid", s.path("grid.json")}).exit == kExitUsage);
  CHECK(run({"optimize", "--model", model, "--grid", "values:1,0.9", "--costs", "values:0.5"}).exit == kExitUsage);
}

TEST_CASE("optimize: config values sit between defaults and flags") {
  Scratch s("config");
  const std::string model = write_truth_model(s, 2, 9);
  write_text_file(s.path("cfg.json"), R"({"costs": "const:0.5", "optimize": {"grid": "values:2,1.5"}})");
  const Run from_config = run({"optimize", "--config", s.path("cfg.json"), "--model", model});
  REQUIRE(from_config.exit == kExitOk);
  const json a = json::parse(from_config.out);
  CHECK(a["products"][0]["original_price"] == 2.0);

  const Run overridden = run({"optimize", "--config", s.path("cfg.json"), "--model", model, "--grid", "values:1,0.8"});
  REQUIRE(overridden.exit == kExitOk);
  CHECK(json::parse(overridden.out)["products"][0]["original_price"] == 1.0);

  write_text_file(s.path("typed.json"), R"({"t-search": "lots"})");
  CHECK(run({"optimize", "--config", s.path("typed.json"), "--model", model, "--grid", "values:1,0.9"}).exit == kExitUsage);
  CHECK(run({"optimize", "--config", s.path("none.json"), "--model", model}).exit == kExitIo);
}

TEST_CASE("export: golden lp and sdpa header") {
  Scratch s("export");
  const std::string toy = std::string(PRICEOPT_GOLDEN_DIR) + "/toy_bqp.json";
  const Run lp = run({"export", "--bqp", toy, "--lp", s.path("toy.lp"), "--sdpa", s.path("toy.dat-s")});
  REQUIRE(lp.exit == kExitOk);
  CHECK(read_text_file(s.path("toy.lp")) == read_text_file(std::string(PRICEOPT_GOLDEN_DIR) + "/toy.lp"));
  std::istringstream in(read_text_file(s.path("toy.dat-s")));
  const SdpProblem sdp = read_sdpa(in);
  CHECK(sdp.dim == 3);
  CHECK(sdp.equalities.size() == 3 + 2);

  const Run to_stdout = run({"export", "--bqp", toy, "--lp", "-"});
  CHECK(to_stdout.out == read_text_file(std::string(PRICEOPT_GOLDEN_DIR) + "/toy.lp"));
  CHECK(run({"export", "--bqp", toy}).exit == kExitUsage);
}

TEST_CASE("simulate: byte-stable smoke runs") {
  Scratch s("simulate");
  const std::vector<std::string> est{"simulate", "estimation", "--products", "3", "--trials", "3",
                                     "--samples", "300", "--seed", "2"};
  const Run a = run(est);
  REQUIRE(a.exit == kExitOk);
  CHECK(a.out == run(est).out);
  CHECK(a.out.rfind("trial,seed,sigma,true_optimum,true_at_estimate,estimated_at_estimate,true_ratio,estimated_ratio", 0) == 0);

  auto with_out = est;
  with_out.insert(with_out.end(), {"--out", s.path("e.csv")});
  const Run summary = run(with_out);
  REQUIRE(summary.exit == kExitOk);
  const json sj = json::parse(summary.out);
  for (const char* key : {"true_ratio", "estimated_ratio", "overestimation"}) CHECK(sj.contains(key));
  CHECK(read_text_file(s.path("e.csv")) == a.out);

  const Run scale = run({"simulate", "scalability", "--sizes", "2,3", "--seeds", "1", "--out", s.path("s.csv")});
  REQUIRE(scale.exit == kExitOk);
  CHECK(json::parse(scale.out)["rows"] == 2);
  CHECK(run({"simulate", "scalability", "--sizes", "2,x"}).exit == kExitUsage);
}
