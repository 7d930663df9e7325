#include "gordonse/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace gordonse {

namespace {

constexpr double kW = 760, kH = 520;
constexpr double kLeft = 80, kRight = 20, kTop = 40, kBottom = 50;

struct Frame {
  double x0, x1;      // iteration range
  double ly0, ly1;    // log10 y range
  double px(double x) const {
    return kLeft + (x - x0) / (x1 - x0) * (kW - kLeft - kRight);
  }
  double py(double ly) const {
    return kH - kBottom - (ly - ly0) / (ly1 - ly0) * (kH - kTop - kBottom);
  }
};

}  // namespace

void write_log_plot(const std::filesystem::path& path, const std::string& title,
                    const std::string& y_label,
                    const std::vector<SvgSeries>& series) {
  double ymin = std::numeric_limits<double>::infinity(), ymax = 0.0;
  std::size_t tmax = 0;
  for (const auto& s : series) {
    tmax = std::max(tmax, s.y.size());
    for (const auto* v : {&s.y, &s.y_hi})
      for (double x : *v)
        if (x > 0.0 && std::isfinite(x)) {
          ymin = std::min(ymin, x);
          ymax = std::max(ymax, x);
        }
  }
  if (!(ymin < ymax)) {
    ymin = 1e-1;
    ymax = 1.0;
  }
  ymin = std::max(ymin, 1e-18);

  Frame f;
  f.x0 = 0.0;
  f.x1 = static_cast<double>(tmax > 1 ? tmax - 1 : 1);
  f.ly0 = std::floor(std::log10(ymin));
  f.ly1 = std::ceil(std::log10(ymax));
  if (f.ly1 <= f.ly0) f.ly1 = f.ly0 + 1.0;

  std::FILE* out = std::fopen(path.string().c_str(), "wb");
  if (!out) throw std::runtime_error("cannot open " + path.string());
  std::fprintf(out,
               "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" "
               "height=\"%g\" viewBox=\"0 0 %g %g\">\n",
               kW, kH, kW, kH);
  std::fprintf(out, "<rect width=\"%g\" height=\"%g\" fill=\"white\"/>\n", kW,
               kH);
  std::fprintf(out,
               "<text x=\"%g\" y=\"24\" font-family=\"sans-serif\" "
               "font-size=\"15\" text-anchor=\"middle\">%s</text>\n",
               kW / 2, title.c_str());

  // Axes and decade grid lines.
  const int decades = static_cast<int>(f.ly1 - f.ly0);
  const int step = std::max(1, decades / 10);
  for (int k = 0; k <= decades; k += step) {
    const double ly = f.ly0 + k;
    const double y = f.py(ly);
    std::fprintf(out,
                 "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" "
                 "stroke=\"#dddddd\"/>\n",
                 kLeft, y, kW - kRight, y);
    std::fprintf(out,
                 "<text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" "
                 "font-size=\"11\" text-anchor=\"end\">1e%d</text>\n",
                 kLeft - 6, y + 4, static_cast<int>(ly));
  }
  const int xticks = std::min<std::size_t>(tmax, 8);
  for (int k = 0; k <= xticks; ++k) {
    const double x = f.x0 + (f.x1 - f.x0) * k / std::max(1, xticks);
    std::fprintf(out,
                 "<text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" "
                 "font-size=\"11\" text-anchor=\"middle\">%g</text>\n",
                 f.px(x), kH - kBottom + 18, std::round(x));
  }
  std::fprintf(out,
               "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" "
               "stroke=\"black\"/>\n",
               kLeft, kH - kBottom, kW - kRight, kH - kBottom);
  std::fprintf(out,
               "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" "
               "stroke=\"black\"/>\n",
               kLeft, kTop, kLeft, kH - kBottom);
  std::fprintf(out,
               "<text x=\"18\" y=\"%g\" font-family=\"sans-serif\" "
               "font-size=\"13\" transform=\"rotate(-90 18 %g)\" "
               "text-anchor=\"middle\">%s</text>\n",
               kH / 2, kH / 2, y_label.c_str());
  std::fprintf(out,
               "<text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" "
               "font-size=\"13\" text-anchor=\"middle\">iteration</text>\n",
               (kLeft + kW - kRight) / 2, kH - 14);

  auto clamp_ly = [&](double v) {
    return std::clamp(std::log10(std::max(v, 1e-18)), f.ly0, f.ly1);
  };

  // Bands first so curves draw on top of them.
  for (const auto& s : series) {
    if (s.y_hi.empty()) continue;
    std::fprintf(out, "<polygon fill=\"%s\" fill-opacity=\"0.25\" "
                      "stroke=\"none\" points=\"",
                 s.color.c_str());
    for (std::size_t t = 0; t < s.y.size(); ++t)
      if (s.y[t] > 0.0)
        std::fprintf(out, "%.2f,%.2f ", f.px(static_cast<double>(t)),
                     f.py(clamp_ly(s.y[t])));
    for (std::size_t t = s.y_hi.size(); t-- > 0;)
      if (s.y_hi[t] > 0.0)
        std::fprintf(out, "%.2f,%.2f ", f.px(static_cast<double>(t)),
                     f.py(clamp_ly(s.y_hi[t])));
    std::fprintf(out, "\"/>\n");
  }
  for (const auto& s : series) {
    if (!s.y_hi.empty()) continue;
    std::fprintf(out, "<polyline fill=\"none\" stroke=\"%s\" "
                      "stroke-width=\"1.6\"%s points=\"",
                 s.color.c_str(),
                 s.dashed ? " stroke-dasharray=\"6 4\"" : "");
    for (std::size_t t = 0; t < s.y.size(); ++t)
      if (s.y[t] > 0.0 && std::isfinite(s.y[t]))
        std::fprintf(out, "%.2f,%.2f ", f.px(static_cast<double>(t)),
                     f.py(clamp_ly(s.y[t])));
    std::fprintf(out, "\"/>\n");
  }

  // Legend.
  double ly = kTop + 8;
  for (const auto& s : series) {
    std::fprintf(out,
                 "<rect x=\"%g\" y=\"%g\" width=\"14\" height=\"4\" "
                 "fill=\"%s\"/>\n",
                 kW - kRight - 190, ly, s.color.c_str());
    std::fprintf(out,
                 "<text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" "
                 "font-size=\"11\">%s</text>\n",
                 kW - kRight - 170, ly + 5, s.label.c_str());
    ly += 16;
  }
  std::fprintf(out, "</svg>\n");
  std::fclose(out);
}

}  // namespace gordonse
