#include "traffic/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace traffic {

namespace {

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

double nice_step(double range, int target_ticks) {
  if (!(range > 0.0)) return 1.0;
  const double raw = range / std::max(target_ticks, 1);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  double step;
  if (norm <= 1.0) step = 1.0;
  else if (norm <= 2.0) step = 2.0;
  else if (norm <= 5.0) step = 5.0;
  else step = 10.0;
  return step * mag;
}

}  // namespace

std::string render_svg(const DiagramScan& scan, const SvgOptions& opt) {
  const double ml = 70.0, mr = 20.0, mt = opt.title.empty() ? 20.0 : 40.0,
               mb = 50.0;
  const double pw = opt.width - ml - mr;
  const double ph = opt.height - mt - mb;

  double k_max = 0.0, q_max = 0.0;
  for (const DiagramPoint& pt : scan.points) {
    k_max = std::max(k_max, pt.k);
    q_max = std::max(q_max, std::max(pt.q_det, pt.q_mean));
    for (const DiagramSample& s : pt.samples) q_max = std::max(q_max, s.q);
  }
  if (k_max <= 0.0) k_max = 1.0;
  if (q_max <= 0.0) q_max = 1.0;
  k_max *= 1.05;
  q_max *= 1.05;

  const auto sx = [&](double k) { return ml + pw * k / k_max; };
  const auto sy = [&](double q) { return mt + ph * (1.0 - q / q_max); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width
     << "\" height=\"" << opt.height << "\" viewBox=\"0 0 " << opt.width << ' '
     << opt.height << "\">\n";
  os << "<rect width=\"" << opt.width << "\" height=\"" << opt.height
     << "\" fill=\"white\"/>\n";
  if (!opt.title.empty()) {
    os << "<text x=\"" << px(ml + pw / 2) << "\" y=\"22\" text-anchor=\"middle\""
       << " font-family=\"sans-serif\" font-size=\"15\">" << opt.title
       << "</text>\n";
  }

  // axes
  os << "<line x1=\"" << px(ml) << "\" y1=\"" << px(mt + ph) << "\" x2=\""
     << px(ml + pw) << "\" y2=\"" << px(mt + ph)
     << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  os << "<line x1=\"" << px(ml) << "\" y1=\"" << px(mt) << "\" x2=\"" << px(ml)
     << "\" y2=\"" << px(mt + ph)
     << "\" stroke=\"black\" stroke-width=\"1\"/>\n";

  const double kx = nice_step(k_max, 6);
  for (double v = 0.0; v <= k_max + 1e-9; v += kx) {
    const double x = sx(v);
    os << "<line x1=\"" << px(x) << "\" y1=\"" << px(mt + ph) << "\" x2=\""
       << px(x) << "\" y2=\"" << px(mt + ph + 5)
       << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    os << "<text x=\"" << px(x) << "\" y=\"" << px(mt + ph + 18)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\""
       << " font-size=\"11\">" << tick_label(v) << "</text>\n";
  }
  const double ky = nice_step(q_max, 6);
  for (double v = 0.0; v <= q_max + 1e-9; v += ky) {
    const double y = sy(v);
    os << "<line x1=\"" << px(ml - 5) << "\" y1=\"" << px(y) << "\" x2=\""
       << px(ml) << "\" y2=\"" << px(y)
       << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    os << "<text x=\"" << px(ml - 8) << "\" y=\"" << px(y + 4)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\""
       << " font-size=\"11\">" << tick_label(v) << "</text>\n";
  }
  os << "<text x=\"" << px(ml + pw / 2) << "\" y=\"" << px(mt + ph + 38)
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\""
     << " font-size=\"13\">" << opt.x_label << "</text>\n";
  os << "<text x=\"16\" y=\"" << px(mt + ph / 2)
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\""
     << " transform=\"rotate(-90 16 " << px(mt + ph / 2) << ")\">"
     << opt.y_label << "</text>\n";

  // samples: gray dots, free-flow-classified as orange squares
  for (const DiagramPoint& pt : scan.points) {
    for (const DiagramSample& s : pt.samples) {
      if (s.free_flow) {
        os << "<rect x=\"" << px(sx(pt.k) - 2.2) << "\" y=\""
           << px(sy(s.q) - 2.2)
           << "\" width=\"4.4\" height=\"4.4\" fill=\"#e08a1e\""
           << " fill-opacity=\"0.85\"/>\n";
      } else {
        os << "<circle cx=\"" << px(sx(pt.k)) << "\" cy=\"" << px(sy(s.q))
           << "\" r=\"1.8\" fill=\"#8a8a8a\" fill-opacity=\"0.55\"/>\n";
      }
    }
  }

  const auto polyline = [&](const char* color, const char* dash, auto get_q) {
    if (scan.points.empty()) return;
    os << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.6\"";
    if (dash) os << " stroke-dasharray=\"" << dash << "\"";
    os << " points=\"";
    for (std::size_t i = 0; i < scan.points.size(); ++i) {
      if (i) os << ' ';
      os << px(sx(scan.points[i].k)) << ',' << px(sy(get_q(scan.points[i])));
    }
    os << "\"/>\n";
  };
  polyline("#2255cc", nullptr, [](const DiagramPoint& p) { return p.q_det; });
  polyline("#cc2222", "6 3", [](const DiagramPoint& p) { return p.q_mean; });

  os << "</svg>\n";
  return os.str();
}

}  // namespace traffic
