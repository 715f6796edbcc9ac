#pragma once

// File formats: wide CSV datasets, per-function weights, JSON result
// documents, CSV power tables and SVG envelope figures.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gfanova/dataset.hpp"
#include "gfanova/fanova.hpp"
#include "gfanova/simulate.hpp"

namespace gfanova::io {

// Malformed input file; row and column are 1-based (0 when not applicable).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t row, std::size_t column, const std::string& message);
  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

// Header "group,r_1,...,r_K"; each row is a label followed by K values.
// Labels map to 1..J in order of first appearance.
FunctionalDataset parse_dataset(std::istream& in);
FunctionalDataset load_dataset(const std::filesystem::path& path);
void write_dataset(std::ostream& out, const FunctionalDataset& ds);

// One positive count per line, in dataset row order; an optional
// non-numeric first line is treated as a header.
Vector parse_weights(std::istream& in);
Vector load_weights(const std::filesystem::path& path);

struct ResultDocument {
  std::string version = kVersion;
  std::string kind;
  double alpha = 0.05;
  Index nperm = 0;
  std::uint64_t seed = 0;
  Index ma_window = 1;
  bool weighted = false;
  Index ensemble_size = 0;
  double p_minus = 0.0;
  double p_erl = 1.0;
  double p_plus = 1.0;
  std::vector<std::optional<double>> lower;  // nullopt encodes -inf
  std::vector<std::optional<double>> upper;  // nullopt encodes +inf
  std::vector<std::optional<double>> observed;  // nullopt encodes +inf (degenerate F)
  std::vector<CoordinateLabel> labels;
  std::vector<Index> outside;
  bool reject = false;
  std::vector<std::string> warnings;

  bool operator==(const ResultDocument&) const = default;
};

ResultDocument make_document(const AnovaResult& result, const AnovaConfig& cfg, bool weighted);
std::string to_json(const ResultDocument& doc);
ResultDocument parse_document(const std::string& json);

// Header plus one line per cell: model,error,sigma,method,runs,rejections,rate,ci_low,ci_high.
void write_power_table(std::ostream& out, const std::vector<PowerCell>& cells);

// Panels: one per group (Means kinds), per pair (Contrasts kinds), or a single
// panel (F kinds). Output bytes depend only on the document.
std::string render_envelope_figure(const ResultDocument& doc);
void emit_envelope_figure(const ResultDocument& doc, const std::filesystem::path& path);

}  // namespace gfanova::io
