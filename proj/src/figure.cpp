#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "gfanova/io.hpp"

namespace gfanova::io {

namespace {

constexpr double kPanelWidth = 320.0;
constexpr double kPanelHeight = 220.0;
constexpr double kMargin = 36.0;
constexpr int kColumns = 3;

std::string fixed(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2f", v);
  return buffer;
}

struct Panel {
  std::string title;
  std::vector<std::size_t> coords;  // indices into the document arrays
};

std::vector<Panel> split_panels(const ResultDocument& doc) {
  std::vector<Panel> panels;
  for (std::size_t c = 0; c < doc.labels.size(); ++c) {
    const auto& label = doc.labels[c];
    std::string title;
    if (label.first > 0 && label.second > 0) {
      title = "groups " + std::to_string(label.first) + " - " + std::to_string(label.second);
    } else if (label.first > 0) {
      title = "group " + std::to_string(label.first);
    } else {
      title = "F statistic";
    }
    if (panels.empty() || panels.back().title != title) panels.push_back({title, {}});
    panels.back().coords.push_back(c);
  }
  return panels;
}

void render_panel(std::ostringstream& svg, const ResultDocument& doc, const Panel& panel, double x0, double y0,
                  const std::vector<bool>& outside) {
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  double ymin = xmin;
  double ymax = -xmin;
  auto extend = [&](const std::optional<double>& v) {
    if (v) {
      ymin = std::min(ymin, *v);
      ymax = std::max(ymax, *v);
    }
  };
  bool open_below = false;
  bool open_above = false;
  for (std::size_t c : panel.coords) {
    xmin = std::min(xmin, doc.labels[c].grid_value);
    xmax = std::max(xmax, doc.labels[c].grid_value);
    extend(doc.lower[c]);
    extend(doc.upper[c]);
    extend(doc.observed[c]);
    open_below = open_below || !doc.lower[c];
    open_above = open_above || !doc.upper[c];
  }
  if (!std::isfinite(ymin)) {
    ymin = 0.0;
    ymax = 1.0;
  }
  if (ymax <= ymin) ymax = ymin + 1.0;
  if (xmax <= xmin) xmax = xmin + 1.0;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  const double plot_w = kPanelWidth - 2 * kMargin;
  const double plot_h = kPanelHeight - 2 * kMargin;
  auto px = [&](double x) { return x0 + kMargin + (x - xmin) / (xmax - xmin) * plot_w; };
  auto py = [&](double y) { return y0 + kMargin + (ymax - y) / (ymax - ymin) * plot_h; };
  // unbounded sides are drawn at the panel floor / ceiling
  auto low_of = [&](std::size_t c) { return doc.lower[c] ? *doc.lower[c] : ymin; };
  auto high_of = [&](std::size_t c) { return doc.upper[c] ? *doc.upper[c] : ymax; };

  svg << "<g>\n";
  svg << "<rect x=\"" << fixed(x0 + kMargin) << "\" y=\"" << fixed(y0 + kMargin) << "\" width=\"" << fixed(plot_w)
      << "\" height=\"" << fixed(plot_h) << "\" fill=\"none\" stroke=\"#444\"/>\n";
  svg << "<text x=\"" << fixed(x0 + kPanelWidth / 2) << "\" y=\"" << fixed(y0 + kMargin - 10)
      << "\" text-anchor=\"middle\" font-size=\"12\">" << panel.title << "</text>\n";

  svg << "<polygon class=\"envelope\" fill=\"#bbbbbb\" stroke=\"none\" points=\"";
  for (std::size_t c : panel.coords) svg << fixed(px(doc.labels[c].grid_value)) << ',' << fixed(py(high_of(c))) << ' ';
  for (auto it = panel.coords.rbegin(); it != panel.coords.rend(); ++it) {
    svg << fixed(px(doc.labels[*it].grid_value)) << ',' << fixed(py(low_of(*it))) << ' ';
  }
  svg << "\"/>\n";

  if (open_below && !open_above) {
    svg << "<polyline class=\"upper\" fill=\"none\" stroke=\"#222\" stroke-dasharray=\"4 2\" points=\"";
    for (std::size_t c : panel.coords) svg << fixed(px(doc.labels[c].grid_value)) << ',' << fixed(py(high_of(c))) << ' ';
    svg << "\"/>\n";
  }

  svg << "<polyline class=\"observed\" fill=\"none\" stroke=\"#000\" stroke-width=\"1.5\" points=\"";
  for (std::size_t c : panel.coords) {
    const double y = doc.observed[c] ? *doc.observed[c] : ymax;
    svg << fixed(px(doc.labels[c].grid_value)) << ',' << fixed(py(y)) << ' ';
  }
  svg << "\"/>\n";

  for (std::size_t c : panel.coords) {
    if (!outside[c]) continue;
    const double y = doc.observed[c] ? *doc.observed[c] : ymax;
    svg << "<circle class=\"outside\" cx=\"" << fixed(px(doc.labels[c].grid_value)) << "\" cy=\"" << fixed(py(y))
        << "\" r=\"2.5\" fill=\"#d62728\"/>\n";
  }

  svg << "<text x=\"" << fixed(x0 + kMargin) << "\" y=\"" << fixed(y0 + kPanelHeight - kMargin + 14)
      << "\" font-size=\"10\">" << fixed(xmin) << "</text>\n";
  svg << "<text x=\"" << fixed(x0 + kPanelWidth - kMargin) << "\" y=\"" << fixed(y0 + kPanelHeight - kMargin + 14)
      << "\" font-size=\"10\" text-anchor=\"end\">" << fixed(xmax) << "</text>\n";
  svg << "<text x=\"" << fixed(x0 + kMargin - 3) << "\" y=\"" << fixed(y0 + kMargin + 4)
      << "\" font-size=\"10\" text-anchor=\"end\">" << fixed(ymax) << "</text>\n";
  svg << "<text x=\"" << fixed(x0 + kMargin - 3) << "\" y=\"" << fixed(y0 + kPanelHeight - kMargin)
      << "\" font-size=\"10\" text-anchor=\"end\">" << fixed(ymin) << "</text>\n";
  svg << "</g>\n";
}

}  // namespace

std::string render_envelope_figure(const ResultDocument& doc) {
  const std::size_t d = doc.labels.size();
  if (doc.lower.size() != d || doc.upper.size() != d || doc.observed.size() != d) {
    throw std::invalid_argument("result document arrays differ in length");
  }
  std::vector<bool> outside(d, false);
  for (Index k : doc.outside) outside[static_cast<std::size_t>(k)] = true;

  const auto panels = split_panels(doc);
  const int columns = std::min<int>(kColumns, static_cast<int>(std::max<std::size_t>(1, panels.size())));
  const int rows = static_cast<int>((panels.size() + static_cast<std::size_t>(columns) - 1) / static_cast<std::size_t>(columns));
  const double width = columns * kPanelWidth;
  const double height = std::max(1, rows) * kPanelHeight + 24.0;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(width) << "\" height=\"" << fixed(height)
      << "\" viewBox=\"0 0 " << fixed(width) << ' ' << fixed(height) << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  char caption[160];
  std::snprintf(caption, sizeof(caption), "%s: p_erl = %.4f, %g%% global envelope%s", doc.kind.c_str(), doc.p_erl,
                100.0 * (1.0 - doc.alpha), doc.reject ? ", rejected" : "");
  svg << "<text x=\"8\" y=\"16\" font-size=\"12\">" << caption << "</text>\n";
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const double x0 = static_cast<double>(p % static_cast<std::size_t>(columns)) * kPanelWidth;
    const double y0 = 24.0 + static_cast<double>(p / static_cast<std::size_t>(columns)) * kPanelHeight;
    render_panel(svg, doc, panels[p], x0, y0, outside);
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_envelope_figure(const ResultDocument& doc, const std::filesystem::path& path) {
  const std::string svg = render_envelope_figure(doc);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write figure to " + path.string());
  out << svg;
  if (!out) throw std::runtime_error("failed writing figure to " + path.string());
}

}  // namespace gfanova::io
