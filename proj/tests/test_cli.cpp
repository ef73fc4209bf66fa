#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "effstat/cli.hpp"
#include "effstat/coverage.hpp"
#include "effstat/output.hpp"

using namespace effstat;
using doctest::Approx;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "effstat");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> data_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.starts_with("#")) lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  return out;
}

}  // namespace

TEST_CASE("grid parsing") {
  const auto log = cli::parse_grid("log:0.1:100:4");
  REQUIRE(log.size() == 4);
  CHECK(log[0] == Approx(0.1));
  CHECK(log[1] == Approx(1.0));
  CHECK(log[3] == 100.0);
  const auto lin = cli::parse_grid("lin:0:1:5");
  CHECK(lin[2] == Approx(0.5));
  CHECK(cli::parse_grid("3,5.5,8") == std::vector<double>{3, 5.5, 8});
  CHECK(cli::parse_grid("7") == std::vector<double>{7});
  CHECK_THROWS_AS(cli::parse_grid("log:0:1:5"), cli::UsageError);
  CHECK_THROWS_AS(cli::parse_grid("lin:1:0:5"), cli::UsageError);
  CHECK_THROWS_AS(cli::parse_grid("1,,2"), cli::UsageError);
  CHECK_THROWS_AS(cli::parse_grid("cubic:1:2:3"), cli::UsageError);
}

TEST_CASE("event files") {
  std::istringstream good("weight,success,x\r\n2,1,0.5\r\n1,0,0.1\r\n\r\n1,0,0.9\r\n");
  const auto events = cli::read_events(good);
  REQUIRE(events.size() == 3);
  CHECK(events[0].weight == 2);
  CHECK(events[0].success);
  CHECK(events[2].x.value() == 0.9);
  std::istringstream bad_header("w,s\n1,1\n");
  CHECK_THROWS_AS(cli::read_events(bad_header), cli::UsageError);
  std::istringstream bad_flag("weight,success\n1,2\n");
  CHECK_THROWS_AS(cli::read_events(bad_flag), cli::UsageError);
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.349241352341) == "0.349241352");
  CHECK(format_number(1e-10) == "1e-10");
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("csv quoting") {
  OutputRecord r({"a", "b"});
  r.add_row({std::string("x,y"), std::string("say \"hi\"")});
  std::ostringstream out;
  r.write_csv(out);
  CHECK(out.str() == "a,b\r\n\"x,y\",\"say \"\"hi\"\"\"\r\n");
}

TEST_CASE("interval command") {
  auto r = run({"interval", "--method", "wilson", "--k", "5", "--n", "10", "--level", "0.6827"});
  REQUIRE(r.code == 0);
  auto lines = data_lines(r.out);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "method,inputs,p_hat,lower,upper,level,z,clipped");
  auto f = fields(lines[1]);
  CHECK(std::stod(f[3]) == Approx(0.3492).epsilon(3e-4));
  CHECK(std::stod(f[4]) == Approx(0.6508).epsilon(2e-4));

  r = run({"interval", "--method", "clopper-pearson", "--k", "0", "--n", "10", "--level", "0.95"});
  f = fields(data_lines(r.out)[1]);
  CHECK(std::stod(f[3]) == 0.0);
  CHECK(std::stod(f[4]) == Approx(0.3085).epsilon(2e-4));

  const auto extra = run({"interval", "--method", "wilson-extra", "--n1", "8", "--n2", "2",
                          "--var1", "8", "--var2", "2", "--level", "0.6827"});
  const auto plain = run({"interval", "--method", "wilson", "--k", "8", "--n", "10", "--level", "0.6827"});
  const auto fe = fields(data_lines(extra.out)[1]);
  const auto fp = fields(data_lines(plain.out)[1]);
  CHECK(fe[3] == fp[3]);
  CHECK(fe[4] == fp[4]);

  r = run({"interval", "--method", "wilson-weighted", "--p-hat", "0.5", "--n-eff", "10"});
  CHECK(r.code == 0);
  r = run({"interval", "--method", "wilson-poisson", "--fn-mode", "large-n", "--k", "5", "--n", "10"});
  CHECK(r.code == 0);
  CHECK(r.out.find("fn_mode=large-n") != std::string::npos);
}

TEST_CASE("weighted interval from an events file") {
  const std::string path = "cli_events_test.csv";
  {
    std::ofstream f(path);
    f << "weight,success\n2,1\n1,0\n1,0\n";
  }
  const auto r = run({"interval", "--method", "wilson-weighted", "--events", path});
  std::remove(path.c_str());
  REQUIRE(r.code == 0);
  const auto f = fields(data_lines(r.out)[1]);
  CHECK(std::stod(f[2]) == Approx(0.5));
}

TEST_CASE("exit codes") {
  CHECK(run({"interval", "--method", "wilson", "--k", "5"}).code == cli::kExitUsage);
  CHECK(run({"interval", "--method", "agresti", "--k", "5", "--n", "10"}).code == cli::kExitUsage);
  CHECK(run({"interval", "--method", "wilson", "--k", "5", "--n", "10", "--level", "1.5"}).code ==
        cli::kExitUsage);
  CHECK(run({"frobnicate"}).code == cli::kExitUsage);
  CHECK(run({"fn-table", "--grid", "log:a:b:c"}).code == cli::kExitUsage);
  CHECK(run({"simulate", "weighted", "--dist", "gamma:2", "--reps", "10000"}).code == cli::kExitUsage);
  const auto degenerate = run({"interval", "--method", "wilson-extra", "--n1", "5", "--n2", "5",
                               "--var1", "205", "--var2", "205", "--level", "0.95"});
  CHECK(degenerate.code == cli::kExitDomain);
  CHECK_FALSE(degenerate.err.empty());
  CHECK(run({"simulate", "weighted", "--dist", "uniform:-2:1", "--reps", "10000"}).code ==
        cli::kExitDomain);
  CHECK(run({"--help"}).code == cli::kExitOk);
}

TEST_CASE("fn table") {
  const auto r = run({"fn-table", "--grid", "0.5,3,100"});
  REQUIRE(r.code == 0);
  const auto lines = data_lines(r.out);
  CHECK(lines[0] == "n,f_exact,f_large_n,f_small_n,f_approx");
  CHECK(std::stod(fields(lines[2])[1]) == Approx(1.298).epsilon(0.002));
  CHECK(std::stod(fields(lines[1])[3]) == 0.4375);
  const auto big = fields(lines[3]);
  for (const int col : {1, 2, 4}) CHECK(std::stod(big[col]) == Approx(1.010206).epsilon(0.002));
}

TEST_CASE("coverage command") {
  auto r = run({"coverage", "--method", "clopper-pearson", "--sampling", "binomial", "--level",
                "0.6827", "--p-grid", "lin:0.05:0.95:19", "--n-grid", "lin:1:30:30"});
  REQUIRE(r.code == 0);
  const auto lines = data_lines(r.out);
  REQUIRE(lines.size() == 1 + 19 * 30);
  for (std::size_t i = 1; i < lines.size(); ++i) CHECK(std::stod(fields(lines[i])[6]) >= 0.6827);

  r = run({"coverage", "--method", "wilson", "--sampling", "binomial", "--p-grid", "0.5",
           "--n-grid", "10", "--level", "0.6827"});
  const auto f = fields(data_lines(r.out)[1]);
  CHECK(std::stod(f[6]) == coverage_binomial(count_method("wilson"), 0.5, 10, 0.6827));

  r = run({"coverage", "--method", "wilson", "--n-grid", "5,10", "--average"});
  REQUIRE(r.code == 0);
  CHECK(data_lines(r.out)[0] == "method,n,level,sampling,grid,average_coverage,error");
  CHECK(r.out.find("# max_truncation_bound") == std::string::npos);

  r = run({"coverage", "--method", "wilson-weighted", "--n-grid", "20"});
  CHECK(r.code == cli::kExitUsage);
  r = run({"coverage", "--method", "wilson-weighted", "--weights", "exp:5", "--reps", "2000",
           "--p-grid", "0.5", "--n-grid", "20", "--seed", "42"});
  CHECK(r.code == 0);
  CHECK(r.out.find("monte-carlo") != std::string::npos);
}

TEST_CASE("metadata header") {
  const auto r = run({"coverage", "--method", "wilson", "--p-grid", "0.5", "--n-grid", "3",
                      "--threads", "2"});
  CHECK(r.out.find("# tool: effstat") == 0);
  CHECK(r.out.find("# poisson_tail_cut: 1e-10") != std::string::npos);
  CHECK(r.out.find("# zero_total_convention:") != std::string::npos);
  CHECK(r.out.find("# max_truncation_bound:") != std::string::npos);
  CHECK(r.out.find("--threads") == std::string::npos);
}

TEST_CASE("json and csv carry the same values") {
  const std::vector<std::string> args{"simulate", "poisson", "--p", "0.2,0.7", "--n", "3",
                                      "--reps", "20000", "--seed", "5"};
  auto csv_args = args;
  auto json_args = args;
  json_args.insert(json_args.begin(), {"--format", "json"});
  const auto csv = run(csv_args);
  const auto json = run(json_args);
  REQUIRE(csv.code == 0);
  REQUIRE(json.code == 0);
  const auto lines = data_lines(csv.out);
  const auto header = fields(lines[0]);
  std::istringstream in(json.out);
  std::string line;
  std::getline(in, line);
  CHECK(nlohmann::json::parse(line).contains("metadata"));
  for (std::size_t row = 1; row < lines.size(); ++row) {
    std::getline(in, line);
    const auto obj = nlohmann::json::parse(line);
    const auto values = fields(lines[row]);
    for (std::size_t c = 0; c < header.size(); ++c) {
      CAPTURE(header[c]);
      CHECK(format_number(obj[header[c]].get<double>()) == values[c]);
    }
  }
}

TEST_CASE("monte-carlo output does not depend on threads") {
  const std::vector<std::vector<std::string>> commands{
      {"simulate", "weighted", "--dist", "exp:5", "--n", "30", "--reps", "10000", "--seed", "42"},
      {"simulate", "extra", "--n", "200", "--p", "0.2,0.5", "--reps", "10000", "--seed", "42"},
      {"simulate", "poisson", "--n", "2,5", "--reps", "50000", "--seed", "42"},
      {"simulate", "xdep", "--n", "300", "--reps", "500", "--seed", "42"},
      {"simulate", "bias", "--n", "5,50", "--reps", "500", "--seed", "42"},
      {"coverage", "--method", "wilson-extra", "--bkg", "0.2", "--reps", "10000", "--p-grid",
       "0.3", "--n-grid", "100", "--seed", "42"}};
  for (const auto& cmd : commands) {
    auto one = cmd;
    auto four = cmd;
    one.insert(one.end(), {"--threads", "1"});
    four.insert(four.end(), {"--threads", "4"});
    const auto a = run(one);
    const auto b = run(four);
    CAPTURE(cmd[1]);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
  }
}
