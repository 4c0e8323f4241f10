#include "css/svg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace css {

namespace {

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 70, kRight = 160, kTop = 40, kBottom = 60;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#17becf", "#bcbd22"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void open_svg(std::ostringstream& o, const std::string& title) {
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
    << "</text>\n";
}

void axes(std::ostringstream& o, const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight << "\" height=\""
    << kHeight - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">"
    << escape(xlabel) << "</text>\n";
  o << "<text transform=\"translate(18," << (kTop + kHeight - kBottom) / 2
    << ") rotate(-90)\" text-anchor=\"middle\">" << escape(ylabel) << "</text>\n";
  (void)f;
}

void x_ticks(std::ostringstream& o, const Frame& f, double step) {
  for (double x = std::ceil(f.x0 / step) * step; x <= f.x1 + 1e-9; x += step) {
    o << "<line x1=\"" << f.px(x) << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << f.px(x) << "\" y2=\""
      << kHeight - kBottom + 5 << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << f.px(x) << "\" y=\"" << kHeight - kBottom + 18 << "\" text-anchor=\"middle\">" << x
      << "</text>\n";
  }
}

double nice_step(double span) {
  const double raw = span / 8.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

std::string gray(double v) {
  const int g = static_cast<int>(std::lround(255.0 * (1.0 - std::clamp(v, 0.0, 1.0))));
  std::ostringstream s;
  s << "rgb(" << g << "," << g << "," << g << ")";
  return s.str();
}

struct Grid {
  std::vector<double> xs, ys;
  std::map<std::pair<std::size_t, std::size_t>, double> value;
};

std::string heatmap(const Grid& g, const std::string& title, const std::string& legend,
                    const std::vector<std::pair<double, double>>& contour,
                    const std::vector<std::pair<double, double>>& dashed) {
  std::ostringstream o;
  open_svg(o, title);
  const Frame f{0.0, 1.0, 0.0, 1.0};
  auto edges = [](const std::vector<double>& v, std::size_t i) {
    const double half = v.size() > 1 ? 0.5 * (i + 1 < v.size() ? v[i + 1] - v[i] : v[i] - v[i - 1]) : 0.05;
    const double lo = i == 0 ? std::max(0.0, v[i] - half) : 0.5 * (v[i - 1] + v[i]);
    const double hi = i + 1 == v.size() ? std::min(1.0, v[i] + half) : 0.5 * (v[i] + v[i + 1]);
    return std::make_pair(lo, hi);
  };
  for (const auto& [key, v] : g.value) {
    const auto [x0, x1] = edges(g.xs, key.first);
    const auto [y0, y1] = edges(g.ys, key.second);
    o << "<rect x=\"" << f.px(x0) << "\" y=\"" << f.py(y1) << "\" width=\"" << f.px(x1) - f.px(x0)
      << "\" height=\"" << f.py(y0) - f.py(y1) << "\" fill=\"" << gray(v) << "\"/>\n";
  }
  axes(o, f, "delta = M/N", "rho = S/M");
  x_ticks(o, f, 0.1);
  for (double y = 0.0; y <= 1.0 + 1e-9; y += 0.1) {
    o << "<text x=\"" << kLeft - 8 << "\" y=\"" << f.py(y) + 4 << "\" text-anchor=\"end\">" << y << "</text>\n";
  }
  auto polyline = [&](const std::vector<std::pair<double, double>>& pts, const char* style) {
    if (pts.size() < 2) return;
    o << "<polyline fill=\"none\" " << style << " points=\"";
    for (const auto& [x, y] : pts) o << f.px(x) << ',' << f.py(y) << ' ';
    o << "\"/>\n";
  };
  polyline(contour, "stroke=\"#d62728\" stroke-width=\"2\"");
  polyline(dashed, "stroke=\"black\" stroke-width=\"2\" stroke-dasharray=\"6,4\"");
  o << "<text x=\"" << kWidth - kRight + 10 << "\" y=\"" << kTop + 10 << "\">" << escape(legend) << "</text>\n";
  o << "<text x=\"" << kWidth - kRight + 10 << "\" y=\"" << kTop + 30 << "\">black = 1, white = 0</text>\n";
  if (!contour.empty()) {
    o << "<text x=\"" << kWidth - kRight + 10 << "\" y=\"" << kTop + 50 << "\" fill=\"#d62728\">0.5 contour</text>\n";
  }
  if (!dashed.empty()) o << "<text x=\"" << kWidth - kRight + 10 << "\" y=\"" << kTop + 70 << "\">reference (dashed)</text>\n";
  o << "</svg>\n";
  return o.str();
}

}  // namespace

std::string ber_plot_svg(const ResultTable& table, const std::string& title) {
  const auto labels = curve_labels(table);
  double x0 = 1e300, x1 = -1e300, lmin = 0.0;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    const double x = table.number(r, "x_db");
    if (!std::isfinite(x)) continue;
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    const double b = table.number(r, "ber");
    if (b > 0.0) lmin = std::min(lmin, std::floor(std::log10(b)));
  }
  if (x0 > x1) {
    x0 = 0.0;
    x1 = 1.0;
  }
  if (x0 == x1) x1 = x0 + 1.0;
  lmin = std::max(lmin, -12.0);
  if (lmin == 0.0) lmin = -1.0;
  const Frame f{x0, x1, lmin, 0.0};

  std::ostringstream o;
  open_svg(o, title);
  axes(o, f, table.has_column("axis") && table.rows() && table.text(0, "axis") == "ebn0_db" ? "Eb/N0 [dB]" : "SNR [dB]",
       "BER");
  x_ticks(o, f, nice_step(x1 - x0));
  for (double d = lmin; d <= 0.0; d += 1.0) {
    o << "<line x1=\"" << kLeft << "\" y1=\"" << f.py(d) << "\" x2=\"" << kWidth - kRight << "\" y2=\"" << f.py(d)
      << "\" stroke=\"#dddddd\"/>\n";
    o << "<text x=\"" << kLeft - 8 << "\" y=\"" << f.py(d) + 4 << "\" text-anchor=\"end\">1e" << d << "</text>\n";
  }
  for (std::size_t c = 0; c < labels.size(); ++c) {
    const BerCurve curve = extract_curve(table, labels[c]);
    const char* color = kColors[c % std::size(kColors)];
    const bool theory = labels[c] == "mfsk_theory";
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\""
      << (theory ? " stroke-dasharray=\"6,4\"" : "") << " points=\"";
    for (std::size_t i = 0; i < curve.x_db.size(); ++i) {
      if (curve.ber[i] <= 0.0 || !std::isfinite(curve.x_db[i])) continue;
      const double l = std::max(std::log10(curve.ber[i]), lmin);
      o << f.px(curve.x_db[i]) << ',' << f.py(l) << ' ';
    }
    o << "\"/>\n";
    const double ly = kTop + 10 + 18.0 * static_cast<double>(c);
    o << "<line x1=\"" << kWidth - kRight + 10 << "\" y1=\"" << ly << "\" x2=\"" << kWidth - kRight + 30
      << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << kWidth - kRight + 35 << "\" y=\"" << ly + 4 << "\">" << escape(labels[c]) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string phase_heatmap_svg(const ResultTable& table, const std::string& curve, const ReferenceContour* reference) {
  Grid g;
  std::map<std::size_t, double> xs, ys;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    if (table.text(r, "curve") != curve) continue;
    const auto i = static_cast<std::size_t>(table.number(r, "delta_index"));
    const auto j = static_cast<std::size_t>(table.number(r, "rho_index"));
    xs[i] = table.number(r, "delta_target");
    ys[j] = table.number(r, "rho_target");
    g.value[{i, j}] = table.number(r, "success_rate");
  }
  for (const auto& [i, x] : xs) g.xs.push_back(x);
  for (const auto& [j, y] : ys) g.ys.push_back(y);
  std::vector<std::pair<double, double>> contour, dashed;
  for (const auto& p : phase_contour(table)) {
    if (p.curve == curve && p.rho) contour.emplace_back(p.delta, *p.rho);
  }
  if (reference) {
    for (std::size_t k = 0; k < reference->delta.size(); ++k) dashed.emplace_back(reference->delta[k], reference->rho[k]);
  }
  return heatmap(g, "Recovery rate: " + curve, "success rate", contour, dashed);
}

std::string complexity_map_svg(const ResultTable& table, std::size_t multiplier, const std::string& column) {
  Grid g;
  std::map<std::size_t, double> xs, ys;
  double vmax = 0.0;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    if (static_cast<std::size_t>(table.number(r, "multiplier")) != multiplier) continue;
    const auto i = static_cast<std::size_t>(table.number(r, "delta_index"));
    const auto j = static_cast<std::size_t>(table.number(r, "rho_index"));
    xs[i] = table.number(r, "delta_target");
    ys[j] = table.number(r, "rho_target");
    const double v = table.number(r, column);
    g.value[{i, j}] = v;
    vmax = std::max(vmax, v);
  }
  if (vmax > 0.0) {
    for (auto& [k, v] : g.value) v /= vmax;
  }
  for (const auto& [i, x] : xs) g.xs.push_back(x);
  for (const auto& [j, y] : ys) g.ys.push_back(y);
  return heatmap(g, column + " (fed " + std::to_string(multiplier) + "S)", "normalized", {}, {});
}

}  // namespace css
