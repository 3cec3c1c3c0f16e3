#include "okml/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "okml/errors.hpp"

namespace fs = std::filesystem;

namespace okml {

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw IoError(fmt::format("cannot create output directory {}", dir.string()));
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("{}: cannot write file", path.string()));
  out << content;
  out.close();
  if (!out) throw IoError(fmt::format("{}: write failed", path.string()));
}

std::string snapshot_name(const Snapshot& snap, const char* ext) {
  return fmt::format("snapshot_{}.{}", snap.step, ext);
}

}  // namespace

std::vector<fs::path> emit_csv(const RunRecord& record, const fs::path& dir) {
  if (record.steps.empty()) throw InputError("cannot emit an empty run record");
  ensure_dir(dir);
  const std::size_t P = record.kernel_count();
  std::vector<fs::path> written;

  std::string costs = "step,ref_Ln,scheme_inst,scheme_cum,omkr_inst,omkr_cum";
  for (std::size_t p = 1; p <= P; ++p)
    costs += fmt::format(",single_{0}_inst,single_{0}_cum", p);
  costs += '\n';
  for (const StepCosts& s : record.steps) {
    costs += fmt::format("{},{},{},{},{},{}", s.step,
                         double(record.window_length) * double(s.step),
                         s.scheme_inst, s.scheme_cum, s.omkr_inst, s.omkr_cum);
    for (std::size_t p = 0; p < P; ++p)
      costs += fmt::format(",{},{}", s.single_inst[p], s.single_cum[p]);
    costs += '\n';
  }
  written.push_back(dir / "costs.csv");
  write_file(written.back(), costs);

  std::string weights = "step";
  for (std::size_t p = 1; p <= P; ++p) weights += fmt::format(",theta_{}", p);
  for (std::size_t p = 1; p <= P; ++p) weights += fmt::format(",w_{}", p);
  weights += '\n';
  for (const StepCosts& s : record.steps) {
    weights += fmt::format("{}", s.step);
    for (double v : s.theta) weights += fmt::format(",{}", v);
    for (double v : s.weights) weights += fmt::format(",{}", v);
    weights += '\n';
  }
  written.push_back(dir / "weights.csv");
  write_file(written.back(), weights);

  if (record.snapshot) {
    const Snapshot& snap = *record.snapshot;
    std::string out = fmt::format("x,scheme,omkr,best_single_{},worst_single_{}\n",
                                  snap.best + 1, snap.worst + 1);
    for (std::size_t k = 0; k < snap.grid.size(); ++k)
      out += fmt::format("{},{},{},{},{}\n", snap.grid[k], snap.scheme[k],
                         snap.omkr[k], snap.best_single[k], snap.worst_single[k]);
    written.push_back(dir / snapshot_name(snap, "csv"));
    write_file(written.back(), out);
  }
  return written;
}

namespace {

struct Series {
  std::string label;
  std::string color;
  double stroke_width = 1.5;
  std::string dash;  // empty for solid
  std::string css_class = "series";
  std::vector<double> x;
  std::vector<double> y;
};

Series make_series(std::string label, std::string color, double width,
                   std::string dash = {}, std::string css_class = "series") {
  Series s;
  s.label = std::move(label);
  s.color = std::move(color);
  s.stroke_width = width;
  s.dash = std::move(dash);
  s.css_class = std::move(css_class);
  return s;
}

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::vector<std::pair<double, double>> markers;
  /// Legend entries; defaults to one per series when empty.
  std::vector<std::pair<std::string, std::string>> legend;
};

constexpr double kWidth = 960.0;
constexpr double kHeight = 560.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 200.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 60.0;

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string render(const Chart& chart) {
  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min, y_min = x_min, y_max = -x_min;
  auto include = [&](double x, double y) {
    x_min = std::min(x_min, x);
    x_max = std::max(x_max, x);
    y_min = std::min(y_min, y);
    y_max = std::max(y_max, y);
  };
  for (const auto& s : chart.series)
    for (std::size_t i = 0; i < s.x.size(); ++i) include(s.x[i], s.y[i]);
  for (const auto& [x, y] : chart.markers) include(x, y);
  if (x_max <= x_min) x_max = x_min + 1.0;
  if (y_max <= y_min) y_max = y_min + 1.0;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double y) {
    return kTop + plot_h - (y - y_min) / (y_max - y_min) * plot_h;
  };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      kWidth, kHeight);
  svg += fmt::format("<text x=\"{:.1f}\" y=\"28\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
                     kLeft + plot_w / 2, escape(chart.title));
  svg += fmt::format(
      "<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" stroke=\"black\"/>\n",
      kLeft, kTop, plot_w, plot_h);

  constexpr int kTicks = 5;
  for (int t = 0; t <= kTicks; ++t) {
    const double xv = x_min + (x_max - x_min) * t / kTicks;
    const double yv = y_min + (y_max - y_min) * t / kTicks;
    svg += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"black\"/>"
        "<text x=\"{0:.2f}\" y=\"{3:.2f}\" text-anchor=\"middle\">{4:.4g}</text>\n",
        px(xv), kTop + plot_h, kTop + plot_h + 5, kTop + plot_h + 20, xv);
    svg += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"black\"/>"
        "<text x=\"{3:.2f}\" y=\"{4:.2f}\" text-anchor=\"end\">{5:.4g}</text>\n",
        kLeft - 5, py(yv), kLeft, kLeft - 8, py(yv) + 4, yv);
  }
  svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n",
                     kLeft + plot_w / 2, kHeight - 15, escape(chart.x_label));
  svg += fmt::format(
      "<text x=\"18\" y=\"{0:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0:.1f})\">{1}</text>\n",
      kTop + plot_h / 2, escape(chart.y_label));

  for (const auto& s : chart.series) {
    svg += fmt::format("<polyline class=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"",
                       s.css_class, s.color, s.stroke_width);
    if (!s.dash.empty()) svg += fmt::format(" stroke-dasharray=\"{}\"", s.dash);
    svg += fmt::format(" data-label=\"{}\" points=\"", escape(s.label));
    for (std::size_t i = 0; i < s.x.size(); ++i)
      svg += fmt::format("{}{:.2f},{:.2f}", i ? " " : "", px(s.x[i]), py(s.y[i]));
    svg += "\"/>\n";
  }
  for (const auto& [x, y] : chart.markers)
    svg += fmt::format("<circle class=\"sample\" cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"2.5\" fill=\"black\"/>\n",
                       px(x), py(y));

  std::vector<std::pair<std::string, std::string>> legend = chart.legend;
  if (legend.empty())
    for (const auto& s : chart.series) legend.emplace_back(s.label, s.color);
  double ly = kTop + 10;
  for (const auto& [label, color] : legend) {
    const double lx = kWidth - kRight + 15;
    svg += fmt::format(
        "<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\" stroke=\"{3}\" stroke-width=\"3\"/>"
        "<text x=\"{4:.1f}\" y=\"{5:.1f}\">{6}</text>\n",
        lx, ly, lx + 20, color, lx + 26, ly + 4, escape(label));
    ly += 18;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace

std::vector<fs::path> emit_plot(const RunRecord& record, const fs::path& dir) {
  if (record.steps.empty()) throw InputError("cannot plot an empty run record");
  ensure_dir(dir);
  const std::size_t P = record.kernel_count();
  std::vector<fs::path> written;

  Chart cc;
  cc.title = "Cumulative cost";
  cc.x_label = "step n";
  cc.y_label = "cumulative cost";
  std::vector<double> steps;
  for (const auto& s : record.steps) steps.push_back(double(s.step));

  for (std::size_t p = 0; p < P; ++p) {
    Series s = make_series(
        fmt::format("single p={} (width {:.4g})", p + 1, record.widths[p]),
        "#b0b0b0", 1.0);
    s.x = steps;
    for (const auto& row : record.steps) s.y.push_back(row.single_cum[p]);
    cc.series.push_back(std::move(s));
  }
  Series omkr = make_series("OMKR", "#1f60c4", 2.0);
  omkr.x = steps;
  for (const auto& row : record.steps) omkr.y.push_back(row.omkr_cum);
  cc.series.push_back(std::move(omkr));
  Series scheme = make_series("scheme", "#d62728", 2.5);
  scheme.x = steps;
  for (const auto& row : record.steps) scheme.y.push_back(row.scheme_cum);
  cc.series.push_back(std::move(scheme));
  Series reference = make_series("L*n", "black", 1.0, "8 4 2 4", "reference");
  reference.x = steps;
  for (double n : steps) reference.y.push_back(double(record.window_length) * n);
  cc.series.push_back(std::move(reference));
  cc.legend = {{"scheme", "#d62728"},
               {"OMKR", "#1f60c4"},
               {fmt::format("single kernels ({})", P), "#b0b0b0"},
               {"L*n", "black"}};

  written.push_back(dir / "cumulative_cost.svg");
  write_file(written.back(), render(cc));

  if (record.snapshot) {
    const Snapshot& snap = *record.snapshot;
    Chart sc;
    sc.title = fmt::format("Signal estimates at step {}", snap.step);
    sc.x_label = "x";
    sc.y_label = "y";
    auto add = [&](std::string label, std::string color, double width,
                   const std::vector<double>& y) {
      Series s = make_series(std::move(label), std::move(color), width);
      s.x = snap.grid;
      s.y = y;
      sc.series.push_back(std::move(s));
    };
    add("scheme", "#d62728", 2.0, snap.scheme);
    add("OMKR", "#1f60c4", 1.5, snap.omkr);
    add(fmt::format("best single p={}", snap.best + 1), "#2ca02c", 1.5,
        snap.best_single);
    add(fmt::format("worst single p={}", snap.worst + 1), "#ff7f0e", 1.5,
        snap.worst_single);
    for (const auto& s : snap.observed) sc.markers.emplace_back(s.x, s.y);
    written.push_back(dir / snapshot_name(snap, "svg"));
    write_file(written.back(), render(sc));
  }
  return written;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  return out;
}

double to_double(const std::string& s, const fs::path& file) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InputError(fmt::format("{}: bad numeric cell '{}'", file.string(), s));
  }
}

}  // namespace

RunSummary summarize_run(const fs::path& dir) {
  const fs::path file = dir / "costs.csv";
  std::ifstream in(file);
  if (!in) throw IoError(fmt::format("{}: cannot read costs.csv", dir.string()));
  std::string header_line, line, last;
  std::getline(in, header_line);
  while (std::getline(in, line))
    if (!line.empty()) last = line;
  if (last.empty()) throw InputError(fmt::format("{}: no data rows", file.string()));

  const auto header = split(header_line);
  const auto cells = split(last);
  if (cells.size() != header.size())
    throw InputError(fmt::format("{}: ragged final row", file.string()));

  RunSummary summary;
  summary.name = dir.filename().empty() ? dir.parent_path().filename().string()
                                        : dir.filename().string();
  summary.best_single_cost = std::numeric_limits<double>::infinity();
  summary.worst_single_cost = -std::numeric_limits<double>::infinity();
  bool have_scheme = false, have_omkr = false;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& h = header[c];
    if (h == "step") {
      summary.steps = static_cast<std::size_t>(to_double(cells[c], file));
    } else if (h == "scheme_cum") {
      summary.scheme = to_double(cells[c], file);
      have_scheme = true;
    } else if (h == "omkr_cum") {
      summary.omkr = to_double(cells[c], file);
      have_omkr = true;
    } else if (h.rfind("single_", 0) == 0 && h.size() > 11 &&
               h.compare(h.size() - 4, 4, "_cum") == 0) {
      const std::size_t p = std::stoul(h.substr(7, h.size() - 11));
      const double v = to_double(cells[c], file);
      if (v < summary.best_single_cost) {
        summary.best_single_cost = v;
        summary.best_single = p;
      }
      if (v > summary.worst_single_cost) {
        summary.worst_single_cost = v;
        summary.worst_single = p;
      }
    }
  }
  if (!have_scheme || !have_omkr || summary.best_single == 0)
    throw InputError(fmt::format("{}: missing cost columns", file.string()));
  return summary;
}

std::string compare_runs(const std::vector<fs::path>& dirs) {
  if (dirs.empty()) throw InputError("compare needs at least one run directory");
  std::vector<RunSummary> rows;
  for (const auto& d : dirs) rows.push_back(summarize_run(d));

  std::string out =
      "run,steps,scheme_cc,omkr_cc,best_single,best_single_cc,worst_single,"
      "worst_single_cc,scheme_over_best,scheme_over_omkr\n";
  std::vector<double> over_best, over_omkr;
  std::size_t beats_best = 0, beats_omkr = 0;
  for (const auto& r : rows) {
    const double rb = r.scheme / r.best_single_cost;
    const double ro = r.scheme / r.omkr;
    over_best.push_back(rb);
    over_omkr.push_back(ro);
    if (r.scheme <= r.best_single_cost) ++beats_best;
    if (r.scheme < r.omkr) ++beats_omkr;
    out += fmt::format("{},{},{},{},{},{},{},{},{:.6f},{:.6f}\n", r.name, r.steps,
                       r.scheme, r.omkr, r.best_single, r.best_single_cost,
                       r.worst_single, r.worst_single_cost, rb, ro);
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  };
  out += fmt::format("# median scheme_over_best {:.6f}, median scheme_over_omkr {:.6f}\n",
                     median(over_best), median(over_omkr));
  out += fmt::format("# scheme <= best single in {}/{} runs, scheme < OMKR in {}/{} runs\n",
                     beats_best, rows.size(), beats_omkr, rows.size());
  return out;
}

}  // namespace okml
