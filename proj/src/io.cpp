#include "gfanova/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

namespace gfanova::io {

namespace {

using json = nlohmann::ordered_json;

std::string trim(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && (text[begin] == ' ' || text[begin] == '\t' || text[begin] == '\r')) ++begin;
  while (end > begin && (text[end - 1] == ' ' || text[end - 1] == '\t' || text[end - 1] == '\r')) --end;
  std::string out(text.substr(begin, end - begin));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos
                                                                                          : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool is_blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

std::optional<double> parse_number(const std::string& cell) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || cell.empty() || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::string format_number(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ec == std::errc() ? ptr : buffer);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, 0, "cannot open " + path.string());
  return in;
}

json optional_array(const std::vector<std::optional<double>>& values) {
  json out = json::array();
  for (const auto& v : values) out.push_back(v ? json(*v) : json(nullptr));
  return out;
}

std::vector<std::optional<double>> read_optional_array(const json& node) {
  std::vector<std::optional<double>> out;
  for (const auto& v : node) {
    if (v.is_null()) {
      out.emplace_back(std::nullopt);
    } else {
      out.emplace_back(v.get<double>());
    }
  }
  return out;
}

std::optional<double> finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return std::nullopt;
}

}  // namespace

ParseError::ParseError(std::size_t row, std::size_t column, const std::string& message)
    : std::runtime_error(row > 0 ? "line " + std::to_string(row) +
                                       (column > 0 ? ", column " + std::to_string(column) : std::string()) +
                                       ": " + message
                                 : message),
      row_(row),
      column_(column) {}

FunctionalDataset parse_dataset(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    header = split_line(line);
    break;
  }
  if (header.empty()) throw ParseError(0, 0, "empty dataset file");
  if (header.front() != "group") throw ParseError(line_no, 1, "first header cell must be 'group'");
  if (header.size() < 2) throw ParseError(line_no, 0, "header names no grid points");

  const Index points = static_cast<Index>(header.size() - 1);
  FunctionalDataset ds;
  ds.grid.resize(points);
  for (Index k = 0; k < points; ++k) {
    const auto col = static_cast<std::size_t>(k + 1);
    const auto value = parse_number(header[col]);
    if (!value) throw ParseError(line_no, col + 1, "grid value '" + header[col] + "' is not a number");
    ds.grid(k) = *value;
    if (k > 0 && !(ds.grid(k) > ds.grid(k - 1))) {
      throw ParseError(line_no, col + 1, "grid values must be strictly increasing");
    }
  }

  std::map<std::string, int> label_ids;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw ParseError(line_no, 0,
                       "expected " + std::to_string(header.size()) + " cells, found " + std::to_string(cells.size()));
    }
    if (cells.front().empty()) throw ParseError(line_no, 1, "empty group label");
    auto [it, inserted] = label_ids.try_emplace(cells.front(), static_cast<int>(label_ids.size()) + 1);
    if (inserted) ds.group_names.push_back(cells.front());
    ds.groups.push_back(it->second);

    std::vector<double> row(static_cast<std::size_t>(points));
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const auto value = parse_number(cells[c]);
      if (!value) throw ParseError(line_no, c + 1, "value '" + cells[c] + "' is not a finite number");
      row[c - 1] = *value;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(0, 0, "dataset has no functions");
  if (label_ids.size() < 2) throw ParseError(0, 0, "dataset needs at least two distinct group labels");

  ds.values.resize(static_cast<Index>(rows.size()), points);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Index k = 0; k < points; ++k) ds.values(static_cast<Index>(i), k) = rows[i][static_cast<std::size_t>(k)];
  }
  return ds;
}

FunctionalDataset load_dataset(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_dataset(in);
}

void write_dataset(std::ostream& out, const FunctionalDataset& ds) {
  out << "group";
  for (Index k = 0; k < ds.grid.size(); ++k) out << ',' << format_number(ds.grid(k));
  out << '\n';
  for (Index i = 0; i < ds.size(); ++i) {
    const int g = ds.groups[static_cast<std::size_t>(i)];
    if (static_cast<std::size_t>(g) <= ds.group_names.size()) {
      out << ds.group_names[static_cast<std::size_t>(g - 1)];
    } else {
      out << g;
    }
    for (Index k = 0; k < ds.grid_size(); ++k) out << ',' << format_number(ds.values(i, k));
    out << '\n';
  }
}

Vector parse_weights(std::istream& in) {
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const std::string cell = trim(line);
    const auto value = parse_number(cell);
    if (!value) {
      if (first) {
        first = false;
        continue;
      }
      throw ParseError(line_no, 1, "weight '" + cell + "' is not a number");
    }
    first = false;
    if (!(*value > 0)) throw ParseError(line_no, 1, "weights must be positive");
    values.push_back(*value);
  }
  if (values.empty()) throw ParseError(0, 0, "weights file has no values");
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

Vector load_weights(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_weights(in);
}

ResultDocument make_document(const AnovaResult& result, const AnovaConfig& cfg, bool weighted) {
  ResultDocument doc;
  doc.kind = to_string(result.kind);
  doc.alpha = cfg.alpha;
  doc.nperm = result.ensemble_size - 1;
  doc.seed = cfg.seed;
  doc.ma_window = cfg.ma_window;
  doc.weighted = weighted;
  doc.ensemble_size = result.ensemble_size;
  doc.p_minus = result.pvalues.p_minus;
  doc.p_erl = result.pvalues.p_erl;
  doc.p_plus = result.pvalues.p_plus;
  for (Index k = 0; k < result.envelope.dimension(); ++k) {
    doc.lower.push_back(finite_or_null(result.envelope.lower(k)));
    doc.upper.push_back(finite_or_null(result.envelope.upper(k)));
    doc.observed.push_back(finite_or_null(result.observed(k)));
  }
  doc.labels = result.coordinate_labels;
  doc.outside = result.verdict.outside_coordinates;
  doc.reject = result.reject;
  doc.warnings = result.warnings;
  return doc;
}

std::string to_json(const ResultDocument& doc) {
  json root;
  root["version"] = doc.version;
  root["config"] = {{"kind", doc.kind},           {"alpha", doc.alpha},         {"nperm", doc.nperm},
                    {"seed", doc.seed},           {"ma_window", doc.ma_window}, {"weighted", doc.weighted}};
  root["ensemble_size"] = doc.ensemble_size;
  root["p_values"] = {{"p_minus", doc.p_minus}, {"p_erl", doc.p_erl}, {"p_plus", doc.p_plus}};
  const auto kind = parse_statistic_kind(doc.kind);
  root["envelope"] = {{"kind", "erl"},
                      {"sidedness", kind ? to_string(sidedness_for(*kind)) : "unknown"},
                      {"lower", optional_array(doc.lower)},
                      {"upper", optional_array(doc.upper)}};
  root["observed"] = optional_array(doc.observed);
  json coords = json::array();
  for (const auto& label : doc.labels) {
    json c;
    if (label.first > 0 && label.second > 0) {
      c["pair"] = {label.first, label.second};
    } else if (label.first > 0) {
      c["group"] = label.first;
    }
    c["grid_index"] = label.grid_index;
    c["r"] = label.grid_value;
    coords.push_back(std::move(c));
  }
  root["coordinates"] = std::move(coords);
  root["outside"] = doc.outside;
  root["reject"] = doc.reject;
  root["warnings"] = doc.warnings;
  return root.dump(2) + "\n";
}

ResultDocument parse_document(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(0, 0, std::string("invalid result document: ") + e.what());
  }
  try {
    ResultDocument doc;
    doc.version = root.at("version").get<std::string>();
    const auto& config = root.at("config");
    doc.kind = config.at("kind").get<std::string>();
    doc.alpha = config.at("alpha").get<double>();
    doc.nperm = config.at("nperm").get<Index>();
    doc.seed = config.at("seed").get<std::uint64_t>();
    doc.ma_window = config.at("ma_window").get<Index>();
    doc.weighted = config.at("weighted").get<bool>();
    doc.ensemble_size = root.at("ensemble_size").get<Index>();
    const auto& p = root.at("p_values");
    doc.p_minus = p.at("p_minus").get<double>();
    doc.p_erl = p.at("p_erl").get<double>();
    doc.p_plus = p.at("p_plus").get<double>();
    doc.lower = read_optional_array(root.at("envelope").at("lower"));
    doc.upper = read_optional_array(root.at("envelope").at("upper"));
    doc.observed = read_optional_array(root.at("observed"));
    for (const auto& c : root.at("coordinates")) {
      CoordinateLabel label;
      if (c.contains("pair")) {
        label.first = c.at("pair").at(0).get<int>();
        label.second = c.at("pair").at(1).get<int>();
      } else if (c.contains("group")) {
        label.first = c.at("group").get<int>();
      }
      label.grid_index = c.at("grid_index").get<Index>();
      label.grid_value = c.at("r").get<double>();
      doc.labels.push_back(label);
    }
    doc.outside = root.at("outside").get<std::vector<Index>>();
    doc.reject = root.at("reject").get<bool>();
    doc.warnings = root.at("warnings").get<std::vector<std::string>>();
    return doc;
  } catch (const json::exception& e) {
    throw ParseError(0, 0, std::string("malformed result document: ") + e.what());
  }
}

void write_power_table(std::ostream& out, const std::vector<PowerCell>& cells) {
  out << "model,error,sigma,method,runs,rejections,rate,ci_low,ci_high\n";
  char buffer[160];
  for (const auto& cell : cells) {
    std::snprintf(buffer, sizeof(buffer), "%s,%s,%s,%s,%lld,%lld,%.4f,%.4f,%.4f\n", to_string(cell.model),
                  to_string(cell.error), format_number(cell.sigma).c_str(), to_string(cell.method),
                  static_cast<long long>(cell.estimate.runs), static_cast<long long>(cell.estimate.rejections),
                  cell.estimate.rate, cell.estimate.ci_low, cell.estimate.ci_high);
    out << buffer;
  }
}

}  // namespace gfanova::io
