#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sparsets/errors.hpp"
#include "sparsets/harness.hpp"
#include "sparsets/json_io.hpp"
#include "sparsets/rng.hpp"

using namespace sparsets;
using namespace sparsets::harness;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream is(path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

CaseConfig small_case() {
  CaseConfig c = builtin_case(CaseId::case1, 600);
  c.reps = 6;
  c.lambda.kind = LambdaMode::Kind::fixed;
  c.lambda.value = 0.15;
  c.base_seed = 99;
  return c;
}

}  // namespace

TEST_CASE("builtin cases pin the reference parameters") {
  const auto c1 = builtin_case(CaseId::case1);
  CHECK(c1.p == 10);
  CHECK(c1.model == ModelKind::inar);
  CHECK(c1.inar.mu_eps == 0.5);
  REQUIRE(c1.inar.alpha.size() == 10);
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(10);
  alpha.head(4) << 0.3, 0.2, 0.2, 0.2;
  CHECK(c1.inar.alpha == alpha);
  CHECK(c1.tau == 0.05);
  CHECK(builtin_case(CaseId::case2).p == 20);
  CHECK(builtin_case(CaseId::case2).inar.alpha.head(4) == alpha.head(4));

  Eigen::Matrix4d block;
  block << 0.3, 0.2, 0.2, 0.2,
           0.2, 0.3, 0.2, 0.2,
           0.0, 0.2, 0.3, 0.2,
           0.0, 0.0, 0.2, 0.3;
  CHECK(case_block() == block);
  const auto c3 = builtin_case(CaseId::case3);
  CHECK(c3.p == 100);
  CHECK(c3.model == ModelKind::minar1);
  CHECK(c3.minar1.eta == Eigen::VectorXd::Constant(100, 0.5));
  CHECK(c3.minar1.a_matrix.block(96, 96, 4, 4) == block);
  CHECK(c3.minar1.a_matrix.block(0, 4, 4, 96).isZero(0.0));
  CHECK(builtin_case(CaseId::case4).p == 200);
  CHECK_THROWS_AS(builtin_case(CaseId::custom), ConfigError);
}

TEST_CASE("truth, support and projection vector") {
  const auto c1 = builtin_case(CaseId::case1);
  CHECK(true_support(c1) == std::vector<int>{0, 1, 2, 3, 4});
  const auto theta = true_theta(c1);
  CHECK(theta.size() == 11);
  CHECK(theta[0] == 0.5);
  CHECK(true_support(builtin_case(CaseId::case3)) == std::vector<int>{0, 1, 2, 3, 4});
  CHECK_FALSE(has_intercept(builtin_case(CaseId::ou)));

  const auto u = projection_vector(c1);
  CHECK(u.size() == 11);
  CHECK(u[0] == 0.0);
  CHECK(std::abs(u.norm() - 1.0) < 1e-14);
  CHECK(projection_vector(c1) == u);
}

TEST_CASE("case ids round trip") {
  for (auto id : {CaseId::case1, CaseId::case2, CaseId::case3, CaseId::case4, CaseId::ou,
                  CaseId::hawkes, CaseId::custom}) {
    CHECK(parse_case_id(to_string(id)) == id);
  }
  CHECK_THROWS_AS(parse_case_id("case9"), ConfigError);
}

TEST_CASE("run_case: a single replication is its own summary") {
  auto c = small_case();
  c.reps = 1;
  const auto report = run_case(c);
  REQUIRE(report.records.size() == 1);
  const auto& r = report.records[0];
  const auto& s = report.summary;
  CHECK(r.rep == 0);
  CHECK(s.reps == 1);
  CHECK(s.mean_linf_first == r.linf1);
  CHECK(s.mean_l2_first == r.l21);
  CHECK(s.mean_linf_two == r.linf2);
  CHECK(s.mean_l2_two == r.l22);
  CHECK(s.mean_lambda == r.lambda);
  CHECK(s.selection_proportion == (r.sel ? 1.0 : 0.0));
}

TEST_CASE("run_case: deterministic across runs and worker counts") {
  const auto c = small_case();
  const auto a = io::dump(io::to_json(run_case(c, 1)));
  const auto b = io::dump(io::to_json(run_case(c, 1)));
  const auto d = io::dump(io::to_json(run_case(c, 3)));
  CHECK(a == b);
  CHECK(a == d);
}

TEST_CASE("run_case: replication accounting and proportions") {
  auto c = small_case();
  c.lambda.kind = LambdaMode::Kind::cv;
  const auto report = run_case(c, 2);
  const auto& s = report.summary;
  int failed = 0;
  for (const auto& r : report.records) failed += r.failed ? 1 : 0;
  CHECK(static_cast<int>(report.records.size()) == c.reps);
  CHECK(s.failures == failed);
  CHECK(s.reps == c.reps);
  CHECK(s.selection_proportion >= 0.0);
  CHECK(s.selection_proportion <= 1.0);
  for (std::size_t i = 0; i < report.records.size(); ++i) {
    CHECK(report.records[i].rep == static_cast<int>(i));
    CHECK(report.records[i].seed == derive_seed(c.base_seed, i));
  }
}

TEST_CASE("summarize: failed replications count as unselected") {
  std::vector<RepRecord> recs(4);
  for (int i = 0; i < 4; ++i) {
    recs[i].rep = i;
    recs[i].linf1 = 0.1 * (i + 1);
    recs[i].sel = i < 2;
  }
  recs[3].failed = true;
  recs[3].sel = false;
  const auto s = summarize(recs, true);
  CHECK(s.failures == 1);
  CHECK(s.selected == 2);
  CHECK(s.selection_proportion == 0.5);
  CHECK(s.mean_linf_first == doctest::Approx(0.2));
}

TEST_CASE("histogram output") {
  CHECK(histogram({}, 5).empty());
  const auto path = temp_path("sparsets_hist_empty.csv");
  emit_histogram({}, 5, path);
  CHECK(slurp(path) == "bin_left,bin_right,count\n");

  const auto constant = histogram({2.0, 2.0, 2.0}, 4);
  int nonempty = 0;
  for (const auto& b : constant) nonempty += b.count > 0 ? 1 : 0;
  CHECK(nonempty == 1);
  CHECK(constant.front().left == doctest::Approx(1.5));
  CHECK(constant.back().right == doctest::Approx(2.5));

  const std::vector<double> values{-1.0, 0.0, 0.2, 0.4, 3.0, 2.9};
  const auto bins = histogram(values, 3);
  int total = 0;
  for (const auto& b : bins) total += b.count;
  CHECK(total == 6);
  CHECK(bins.front().left == -1.0);
  CHECK(bins.back().right == 3.0);
  CHECK(bins[0].count == 3);
  CHECK(bins[1].count == 1);
  CHECK(bins[2].count == 2);

  emit_histogram(values, 3, path);
  const auto text = slurp(path);
  std::remove(path.c_str());
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
}

TEST_CASE("records csv columns") {
  std::vector<RepRecord> recs(2);
  recs[1].rep = 1;
  recs[1].failed = true;
  const auto path = temp_path("sparsets_records.csv");
  write_records_csv(recs, path);
  std::ifstream is(path);
  std::string header;
  std::getline(is, header);
  is.close();
  std::remove(path.c_str());
  CHECK(header == "rep,linf1,l21,sel,linf2,l22,proj_stat,failed");
}

TEST_CASE("hawkes support: zero kernel selects no lag") {
  HawkesConfig c = default_hawkes_config();
  c.spec.values = {0.0};
  c.spec.horizon = 400.0;
  c.reps = 20;
  const auto report = run_hawkes_support(c, 2);
  CHECK(report.zero_support_fraction >= 0.9);
  CHECK(report.records.size() == 20);
}

TEST_CASE("hawkes support: order must cover the kernel") {
  HawkesConfig c = default_hawkes_config();
  c.order = 5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("json: lambda modes") {
  const auto fixed = io::lambda_mode_from_json(io::Json(0.2));
  CHECK(fixed.kind == LambdaMode::Kind::fixed);
  CHECK(fixed.value == 0.2);
  const auto rate = io::lambda_mode_from_json(io::Json::parse(R"({"mode":"rate","c":3.5})"));
  CHECK(rate.kind == LambdaMode::Kind::rate);
  CHECK(rate.value == 3.5);
  const auto cv = io::lambda_mode_from_json(io::Json::parse(R"({"mode":"cv","folds":4,"grid":[0.1,0.2]})"));
  CHECK(cv.kind == LambdaMode::Kind::cv);
  CHECK(cv.folds == 4);
  CHECK(cv.grid == std::vector<double>{0.1, 0.2});
  CHECK_THROWS_AS(io::lambda_mode_from_json(io::Json::parse(R"({"mode":"magic"})")), ConfigError);
  CHECK_THROWS_AS(io::lambda_mode_from_json(io::Json::parse(R"({"mode":"cv","folds":1})")), ConfigError);
}

TEST_CASE("json: case configs") {
  const auto c = io::case_config_from_json(io::Json::parse(
      R"({"schema":1,"case":"case1","n":1000,"reps":3,"lambda":0.1,"tau":0.04})"));
  CHECK(c.case_id == CaseId::case1);
  CHECK(c.n == 1000);
  CHECK(c.p == 10);
  CHECK(c.reps == 3);
  CHECK(c.tau == 0.04);
  CHECK_THROWS_AS(io::case_config_from_json(io::Json::parse(R"({"case":"case1","p":12})")), ConfigError);
  CHECK_THROWS_AS(io::case_config_from_json(io::Json::parse(R"({"case":"case1","colour":1})")), ConfigError);
  CHECK_THROWS_AS(io::case_config_from_json(io::Json::parse(R"({"schema":2,"case":"case1"})")), ConfigError);
  CHECK_THROWS_AS(io::case_config_from_json(io::Json::parse(R"({"case":"custom"})")), ConfigError);
  CHECK_THROWS_AS(io::case_config_from_json(io::Json::parse(R"({"case":"case1","reps":0})")), ConfigError);

  const auto custom = io::case_config_from_json(io::Json::parse(
      R"({"case":"custom","n":300,"model":{"type":"inar","mu_eps":1.0,"alpha":[0.4,0.0,0.25]}})"));
  CHECK(custom.model == ModelKind::inar);
  CHECK(custom.p == 3);
  CHECK(io::case_config_from_json(io::to_json(custom)).inar.alpha == custom.inar.alpha);
}

TEST_CASE("json: spec round trips") {
  const auto c3 = builtin_case(CaseId::case3);
  const auto m = io::minar1_spec_from_json(io::to_json(c3.minar1));
  CHECK(m.a_matrix == c3.minar1.a_matrix);
  CHECK(m.eta == c3.minar1.eta);
  const auto blocks = io::minar1_spec_from_json(io::Json::parse(
      R"({"type":"minar1","eta":0.5,"a_block":[[0.3,0.2,0.2,0.2],[0.2,0.3,0.2,0.2],[0,0.2,0.3,0.2],[0,0,0.2,0.3]],"blocks":25})"));
  CHECK(blocks.a_matrix == c3.minar1.a_matrix);
  const auto ou = builtin_case(CaseId::ou).ou;
  const auto ou2 = io::ou_spec_from_json(io::to_json(ou));
  CHECK(ou2.a_matrix == ou.a_matrix);
  CHECK(ou2.delta == ou.delta);
  const auto hk = default_hawkes_config().spec;
  const auto hk2 = io::hawkes_spec_from_json(io::to_json(hk));
  CHECK(hk2.values == hk.values);
  CHECK(hk2.breakpoints == hk.breakpoints);
  CHECK_THROWS_AS(io::inar_spec_from_json(io::Json::parse(R"({"type":"inar","alpha":[0.1]})")), ConfigError);
}

TEST_CASE("json: fit exports carry the documented fields") {
  const auto c = small_case();
  const auto d = simulate_design(c, 5);
  twostep::TwoStepOptions opt;
  opt.lambda = 0.15;
  opt.reference_support = true_support(c);
  const auto fit = twostep::two_step_fit(d, opt);
  const auto fj = io::to_json(fit.first_step);
  for (const char* key : {"theta_hat", "lambda", "objective", "slack", "status"}) CHECK(fj.contains(key));
  const auto tj = io::to_json(fit);
  for (const char* key : {"support", "theta_tilde", "nuisance", "cov", "selection_flag"}) CHECK(tj.contains(key));
  CHECK(tj["theta_tilde"].size() == fit.support.indices.size());

  const auto rj = io::to_json(run_case(c));
  CHECK(rj["schema"] == 1);
  CHECK(rj["kind"] == "case_report");
  CHECK(rj["records"].size() == static_cast<std::size_t>(c.reps));
  for (const char* key : {"mean_linf_first", "mean_l2_first", "selection_proportion", "mean_linf_two",
                          "mean_l2_two", "royston_p"}) {
    CHECK(rj["summary"].contains(key));
  }
}

TEST_CASE("json: file helpers") {
  const auto path = temp_path("sparsets_io.json");
  io::write_json_file(io::Json::parse(R"({"a":[1,2]})"), path);
  CHECK(io::read_json_file(path)["a"][1] == 2);
  std::ofstream(path) << "{ not json";
  CHECK_THROWS_AS(io::read_json_file(path), ConfigError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(io::read_json_file(temp_path("sparsets_missing_file.json")), ConfigError);
}
