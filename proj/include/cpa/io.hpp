#ifndef CPA_IO_HPP
#define CPA_IO_HPP

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cpa/bounds.hpp"
#include "cpa/model.hpp"
#include "cpa/pointprocess.hpp"

namespace cpa {

/// {"n":int,"d":int,"p":[...],"q":[[...],...]} or {"generator":"paper-example"}.
/// "n" and "d" are optional but checked when present. Errors name the field.
ModelSpec parse_model(const nlohmann::json& doc);
/// {"p":[...],"exponential_rates":[...]} or
/// {"p":[...],"grid":{"x":[...],"weights":[...]},"densities":[[...],...]}.
PointProcessSpec parse_point_process(const nlohmann::json& doc);

/// Reads and parses a JSON file; parse errors report line and column.
nlohmann::json read_json_file(const std::string& path);

nlohmann::json model_to_json(const ModelSpec& spec);

enum class Format { text, csv, json };
Format parse_format(const std::string& name);

/// Missing values (inapplicable bounds) are std::monostate.
using Cell = std::variant<std::monostate, std::string, long long, double, bool>;

struct Table {
  std::string title;
  std::string convention;           // e.g. "values are full norms ||F - G||"
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  nlohmann::json meta = nlohmann::json::object();
};

/// Text: title, convention and meta as '#' lines, then aligned columns,
/// doubles with 10 significant digits.
/// CSV: header row, doubles printed with %.17g, missing values empty.
/// JSON: {"title","convention","meta","columns","rows":[{column: value}]},
/// doubles exact, missing values null.
std::string render(const Table& table, Format format);

/// %.17g, so the text reads back as the same double.
std::string format_exact(double v);

/// Outward rounding to the printed precision used in the comparison table:
/// six decimals, one decimal at or above 10, three significant digits below
/// 1e-6. Upper bounds round up, lower bounds round down.
std::string format_outward(double v, BoundKind kind);

}  // namespace cpa

#endif  // CPA_IO_HPP
