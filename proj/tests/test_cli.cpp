#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpa/cli.hpp"
#include "cpa/error.hpp"
#include "cpa/io.hpp"

using namespace cpa;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "cpa");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string write_temp(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / ("cpa_test_" + name);
  std::ofstream(path) << body;
  return path.string();
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        out.back() += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.emplace_back();
    } else {
      out.back() += ch;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("table1 prints the published digits") {
  const Run r = run({"table1"});
  REQUIRE(r.code == kExitOk);
  for (const char* v : {"0.163157", "0.117843", "1.435779", "0.049286", "0.346060", "81.3",
                        "0.002782", "0.000166", "0.000011", "6.24e-07", "0.055608", "0.006919",
                        "0.000777", "0.000086", "0.001292", "1.60e-07"}) {
    CHECK_MESSAGE(r.out.find(v) != std::string::npos, std::string(v));
  }
  CHECK(r.out.find("convention:") != std::string::npos);
}

TEST_CASE("outward rounding") {
  CHECK(format_outward(0.0027811, BoundKind::upper) == "0.002782");
  CHECK(format_outward(0.0012926, BoundKind::lower) == "0.001292");
  CHECK(format_outward(6.2305e-7, BoundKind::upper) == "6.24e-07");
  CHECK(format_outward(1.6095e-7, BoundKind::lower) == "1.60e-07");
  CHECK(format_outward(81.2624, BoundKind::upper) == "81.3");
  CHECK(format_outward(0.5, BoundKind::upper) == "0.500000");
  CHECK(format_outward(NAN, BoundKind::upper) == "n/a");
}

TEST_CASE("csv and json carry identical doubles") {
  const Run csv = run({"bounds", "--input", "paper-example", "--format", "csv"});
  const Run js = run({"bounds", "--input", "paper-example", "--format", "json"});
  REQUIRE(csv.code == 0);
  REQUIRE(js.code == 0);
  const json doc = json::parse(js.out);
  std::istringstream lines(csv.out);
  std::string line;
  std::getline(lines, line);
  const auto header = split(line);
  CHECK(header == doc.at("columns").get<std::vector<std::string>>());
  const auto value_col = static_cast<std::size_t>(
      std::find(header.begin(), header.end(), "value") - header.begin());
  std::size_t row = 0;
  while (std::getline(lines, line)) {
    const auto cells = split(line);
    const json& jr = doc.at("rows").at(row++);
    if (jr.at("value").is_null()) {
      CHECK(cells[value_col].empty());
    } else {
      CHECK(std::stod(cells[value_col]) == jr.at("value").get<double>());
    }
  }
  CHECK(row == doc.at("rows").size());
  CHECK(split(R"(a,"b, c",,"d ""q""")") == std::vector<std::string>{"a", "b, c", "", "d \"q\""});
  for (const char* key : {"title", "convention", "meta", "columns", "rows"}) CHECK(doc.contains(key));
}

TEST_CASE("seeded runs are byte-identical") {
  const Run a = run({"verify", "--suite", "lemmas", "--seed", "42", "--instances", "20"});
  const Run b = run({"verify", "--suite", "lemmas", "--seed", "42", "--instances", "20"});
  CHECK(a.code == kExitOk);
  CHECK(a.out == b.out);
  const Run c = run({"exact", "--n", "4", "--d", "2", "--seed", "9"});
  const Run d = run({"exact", "--n", "4", "--d", "2", "--seed", "9"});
  CHECK(c.code == kExitOk);
  CHECK(c.out == d.out);
}

TEST_CASE("exact reports decreasing distances") {
  const Run r = run({"exact", "--n", "3", "--d", "2", "--lmax", "3", "--format", "json"});
  REQUIRE(r.code == kExitOk);
  const json doc = json::parse(r.out);
  const auto& rows = doc.at("rows");
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].at("trend") == "decreasing");
    if (!rows[i].at("dominates").is_null()) CHECK(rows[i].at("dominates") == true);
  }
}

TEST_CASE("verify charlier passes") {
  const Run r = run({"verify", "--suite", "charlier", "--format", "json"});
  CHECK(r.code == kExitOk);
  const json doc = json::parse(r.out);
  CHECK(doc.at("suite") == "charlier");
}

TEST_CASE("model input and diagnostics") {
  const std::string good = write_temp("good.json", R"({"n":2,"d":2,"p":[0.1,0.2],"q":[[0.5,0.5],[1,0]]})");
  CHECK(run({"bounds", "--input", good}).code == kExitOk);

  const std::string zero = write_temp("zero.json", R"({"p":[0,0],"q":[[0.5,0.5],[1,0]]})");
  const Run z = run({"bounds", "--input", zero, "--format", "json"});
  REQUIRE(z.code == kExitOk);
  for (const json& row : json::parse(z.out).at("rows")) {
    if (!row.at("value").is_null()) CHECK(row.at("value").get<double>() == 0.0);
  }

  const std::string badrow = write_temp("badrow.json", R"({"p":[0.1],"q":[[0.6,0.6]]})");
  const Run b = run({"bounds", "--input", badrow});
  CHECK(b.code == kExitValidation);
  CHECK(b.err.find("q[0]") != std::string::npos);

  const std::string broken = write_temp("broken.json", "{\"p\": [0.1,\n  \"q\": }");
  const Run br = run({"bounds", "--input", broken});
  CHECK(br.code == kExitValidation);
  CHECK(br.err.find("line 2") != std::string::npos);

  const std::string mismatch = write_temp("mismatch.json", R"({"n":3,"p":[0.1],"q":[[1]]})");
  const Run m = run({"bounds", "--input", mismatch});
  CHECK(m.code == kExitValidation);
  CHECK(m.err.find("n:") != std::string::npos);

  CHECK(run({"bounds", "--input", "/nonexistent/model.json"}).code == kExitValidation);
  CHECK(run({"bounds", "--input", good, "--tol", "0"}).code == kExitValidation);
}

TEST_CASE("exit codes") {
  CHECK(run({"verify", "--suite", "nope"}).code == kExitValidation);
  CHECK(run({}).code == kExitValidation);
  CHECK(run({"exact", "--n", "12", "--d", "12"}).code == kExitResource);
  CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("pointprocess subcommand") {
  const std::string f = write_temp("pp.json", R"({"p":[0.1,0.1],"exponential_rates":[1,5]})");
  const Run r = run({"pointprocess", "--input", f, "--format", "json"});
  REQUIRE(r.code == kExitOk);
  const json doc = json::parse(r.out);
  CHECK(doc.at("rows").size() == 4);
  CHECK(doc.at("convention").get<std::string>().find("d_TV") != std::string::npos);
  const std::string bad = write_temp("ppbad.json", R"({"p":[0.1],"exponential_rates":[0]})");
  CHECK(run({"pointprocess", "--input", bad}).code == kExitValidation);
}

TEST_CASE("model json round trip") {
  const ModelSpec spec({0.1, 0.3}, {{0.25, 0.75}, {1.0, 0.0}});
  const ModelSpec back = parse_model(model_to_json(spec));
  CHECK(back.n() == 2);
  CHECK(back.q(0, 1) == 0.75);
  CHECK(parse_model(json{{"generator", "paper-example"}}).n() == 1000);
  CHECK_THROWS_AS(parse_model(json{{"generator", "other"}}), ValidationError);
}
