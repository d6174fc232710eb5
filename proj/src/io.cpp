#include "cpa/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cpa/error.hpp"

namespace cpa {

using nlohmann::json;

namespace {

double number_at(const json& v, const std::string& path) {
  if (!v.is_number()) throw ValidationError(path + ": expected a number, got " + v.type_name());
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ValidationError(path + ": must be finite");
  return x;
}

std::vector<double> vector_at(const json& doc, const std::string& key, const std::string& path) {
  if (!doc.contains(key)) throw ValidationError(path + key + ": missing");
  const json& arr = doc.at(key);
  if (!arr.is_array()) throw ValidationError(path + key + ": expected an array");
  std::vector<double> out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out.push_back(number_at(arr[i], path + key + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<std::vector<double>> matrix_at(const json& doc, const std::string& key) {
  if (!doc.contains(key)) throw ValidationError(key + ": missing");
  const json& arr = doc.at(key);
  if (!arr.is_array()) throw ValidationError(key + ": expected an array of arrays");
  std::vector<std::vector<double>> out;
  for (std::size_t j = 0; j < arr.size(); ++j) {
    const std::string row = key + "[" + std::to_string(j) + "]";
    if (!arr[j].is_array()) throw ValidationError(row + ": expected an array");
    std::vector<double> r;
    for (std::size_t i = 0; i < arr[j].size(); ++i) {
      r.push_back(number_at(arr[j][i], row + "[" + std::to_string(i) + "]"));
    }
    out.push_back(std::move(r));
  }
  return out;
}

long long integer_at(const json& doc, const std::string& key) {
  const json& v = doc.at(key);
  if (!v.is_number_integer()) throw ValidationError(key + ": expected an integer");
  return v.get<long long>();
}

}  // namespace

ModelSpec parse_model(const json& doc) {
  if (!doc.is_object()) throw ValidationError("model: expected a JSON object");
  if (doc.contains("generator")) {
    const json& g = doc.at("generator");
    if (!g.is_string()) throw ValidationError("generator: expected a string");
    if (g.get<std::string>() == "paper-example") return paper_example_model();
    throw ValidationError("generator: unknown generator \"" + g.get<std::string>() +
                          "\" (known: paper-example)");
  }
  std::vector<double> p = vector_at(doc, "p", "");
  std::vector<std::vector<double>> q = matrix_at(doc, "q");
  if (doc.contains("n") && integer_at(doc, "n") != static_cast<long long>(p.size())) {
    throw ValidationError("n: " + doc.at("n").dump() + " does not match p, which has " +
                          std::to_string(p.size()) + " entries");
  }
  if (doc.contains("d")) {
    const long long d = integer_at(doc, "d");
    for (std::size_t j = 0; j < q.size(); ++j) {
      if (static_cast<long long>(q[j].size()) != d) {
        throw ValidationError("q[" + std::to_string(j) + "]: has " + std::to_string(q[j].size()) +
                              " entries, d = " + std::to_string(d));
      }
    }
  }
  return ModelSpec(std::move(p), std::move(q));
}

PointProcessSpec parse_point_process(const json& doc) {
  if (!doc.is_object()) throw ValidationError("point process: expected a JSON object");
  std::vector<double> p = vector_at(doc, "p", "");
  if (doc.contains("exponential_rates")) {
    return PointProcessSpec::exponential(std::move(p), vector_at(doc, "exponential_rates", ""));
  }
  if (!doc.contains("grid")) {
    throw ValidationError("point process: need either exponential_rates or grid + densities");
  }
  const json& g = doc.at("grid");
  if (!g.is_object()) throw ValidationError("grid: expected an object");
  Grid grid{vector_at(g, "x", "grid."), vector_at(g, "weights", "grid.")};
  return PointProcessSpec::tabulated(std::move(p), std::move(grid), matrix_at(doc, "densities"));
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

json model_to_json(const ModelSpec& spec) {
  json q = json::array();
  for (int j = 0; j < spec.n(); ++j) {
    const auto row = spec.q_row(j);
    q.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return {{"n", spec.n()},
          {"d", spec.d()},
          {"p", std::vector<double>(spec.p().begin(), spec.p().end())},
          {"q", q}};
}

Format parse_format(const std::string& name) {
  if (name == "text") return Format::text;
  if (name == "csv") return Format::csv;
  if (name == "json") return Format::json;
  throw ValidationError("unknown format \"" + name + "\" (text, csv, json)");
}

std::string format_exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_outward(double v, BoundKind kind) {
  if (std::isnan(v)) return "n/a";
  const bool up = kind == BoundKind::upper;
  auto directed = [up](double x) {
    // Scaled values that are integers up to rounding noise stay put.
    const double r = std::nearbyint(x);
    if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return r;
    return up ? std::ceil(x) : std::floor(x);
  };
  char buf[64];
  if (v >= 10.0) {
    std::snprintf(buf, sizeof buf, "%.1f", directed(v * 10.0) / 10.0);
  } else if (v == 0.0 || v >= 1e-6) {
    std::snprintf(buf, sizeof buf, "%.6f", directed(v * 1e6) / 1e6);
  } else {
    const int e = static_cast<int>(std::floor(std::log10(v)));
    const double scale = std::pow(10.0, 2 - e);
    std::snprintf(buf, sizeof buf, "%.2e", directed(v * scale) / scale);
  }
  return buf;
}

namespace {

std::string text_cell(const Cell& c) {
  struct V {
    std::string operator()(std::monostate) const { return "-"; }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(long long i) const { return std::to_string(i); }
    std::string operator()(double d) const {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.10g", d);
      return buf;
    }
    std::string operator()(bool b) const { return b ? "yes" : "no"; }
  };
  return std::visit(V{}, c);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string csv_cell(const Cell& c) {
  struct V {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(const std::string& s) const { return csv_escape(s); }
    std::string operator()(long long i) const { return std::to_string(i); }
    std::string operator()(double d) const { return std::isnan(d) ? "" : format_exact(d); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
  };
  return std::visit(V{}, c);
}

json json_cell(const Cell& c) {
  struct V {
    json operator()(std::monostate) const { return nullptr; }
    json operator()(const std::string& s) const { return s; }
    json operator()(long long i) const { return i; }
    json operator()(double d) const { return std::isfinite(d) ? json(d) : json(nullptr); }
    json operator()(bool b) const { return b; }
  };
  return std::visit(V{}, c);
}

}  // namespace

std::string render(const Table& table, Format format) {
  std::ostringstream out;
  switch (format) {
    case Format::text: {
      if (!table.title.empty()) out << "# " << table.title << '\n';
      if (!table.convention.empty()) out << "# " << table.convention << '\n';
      for (const auto& [key, value] : table.meta.items()) {
        out << "# " << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump())
            << '\n';
      }
      std::vector<std::vector<std::string>> cells;
      std::vector<std::size_t> width(table.columns.size(), 0);
      for (std::size_t c = 0; c < table.columns.size(); ++c) width[c] = table.columns[c].size();
      for (const auto& row : table.rows) {
        std::vector<std::string> r;
        for (std::size_t c = 0; c < row.size(); ++c) {
          r.push_back(text_cell(row[c]));
          width[c] = std::max(width[c], r.back().size());
        }
        cells.push_back(std::move(r));
      }
      auto line = [&](const std::vector<std::string>& r) {
        for (std::size_t c = 0; c < r.size(); ++c) {
          out << r[c];
          if (c + 1 < r.size()) out << std::string(width[c] - r[c].size() + 2, ' ');
        }
        out << '\n';
      };
      line(table.columns);
      for (const auto& r : cells) line(r);
      break;
    }
    case Format::csv: {
      for (std::size_t c = 0; c < table.columns.size(); ++c) {
        out << (c ? "," : "") << csv_escape(table.columns[c]);
      }
      out << '\n';
      for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_cell(row[c]);
        out << '\n';
      }
      break;
    }
    case Format::json: {
      json rows = json::array();
      for (const auto& row : table.rows) {
        json r = json::object();
        for (std::size_t c = 0; c < row.size(); ++c) r[table.columns[c]] = json_cell(row[c]);
        rows.push_back(std::move(r));
      }
      json doc = {{"title", table.title},
                  {"convention", table.convention},
                  {"meta", table.meta},
                  {"columns", table.columns},
                  {"rows", rows}};
      out << doc.dump(2) << '\n';
      break;
    }
  }
  return out.str();
}

}  // namespace cpa
