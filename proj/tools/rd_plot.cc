// Copyright 2026 The MSIC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rd_plot.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "msic/errors.h"

namespace msic::cli {
namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

double parse_double(const std::string& s) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError("bad number '" + s + "' in RD csv");
  }
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

std::string family(const std::string& label) { return label.substr(0, label.find('@')); }

}  // namespace

std::string format_rd_row(const RdRow& r) {
  return r.label + "," + r.image + "," + num(r.bpp) + "," + num(r.ms_ssim) + "," + num(r.enc_s) +
         "," + num(r.dec_s) + "\n";
}

std::string format_rd_csv(const std::vector<RdRow>& rows) {
  std::string out(kRdCsvHeader);
  std::vector<std::string> labels;
  std::map<std::string, std::vector<const RdRow*>> by_label;
  for (const auto& r : rows) {
    out += format_rd_row(r);
    if (by_label.find(r.label) == by_label.end()) labels.push_back(r.label);
    by_label[r.label].push_back(&r);
  }
  for (const auto& label : labels) {
    const auto& group = by_label[label];
    RdRow mean{label, "mean"};
    for (const auto* r : group) {
      mean.bpp += r->bpp;
      mean.ms_ssim += r->ms_ssim;
      mean.enc_s += r->enc_s;
      mean.dec_s += r->dec_s;
    }
    const double n = static_cast<double>(group.size());
    mean.bpp /= n;
    mean.ms_ssim /= n;
    mean.enc_s /= n;
    mean.dec_s /= n;
    out += format_rd_row(mean);
  }
  return out;
}

std::vector<RdRow> parse_rd_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line + "\n" != kRdCsvHeader) {
    throw FormatError("RD csv must start with header " + std::string(kRdCsvHeader.substr(0, kRdCsvHeader.size() - 1)));
  }
  std::vector<RdRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string item;
    while (std::getline(ls, item, ',')) f.push_back(item);
    if (f.size() != 6) throw FormatError("RD csv row needs 6 fields: " + line);
    rows.push_back({f[0], f[1], parse_double(f[2]), parse_double(f[3]), parse_double(f[4]),
                    parse_double(f[5])});
  }
  return rows;
}

std::string render_rd_svg(const std::vector<RdRow>& rows) {
  constexpr double kW = 640, kH = 480, kLeft = 70, kRight = 160, kTop = 30, kBottom = 60;
  static const char* const kColors[] = {"#d62728", "#1f77b4", "#2ca02c", "#ff7f0e",
                                        "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  std::vector<std::string> families;
  std::map<std::string, std::vector<std::pair<double, double>>> points;
  double max_bpp = 0, min_ssim = 1;
  for (const auto& r : rows) {
    if (r.image != "mean") continue;
    const std::string fam = family(r.label);
    if (points.find(fam) == points.end()) families.push_back(fam);
    points[fam].push_back({r.bpp, r.ms_ssim});
    max_bpp = std::max(max_bpp, r.bpp);
    min_ssim = std::min(min_ssim, r.ms_ssim);
  }
  const double x_max = max_bpp > 0 ? std::ceil(max_bpp * 1.1 * 4) / 4 : 1.0;
  const double y_min = std::max(0.0, std::floor(std::min(min_ssim, 0.95) * 20 - 1) / 20);
  const double y_max = 1.0;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto sx = [&](double v) { return kLeft + v / x_max * pw; };
  auto sy = [&](double v) { return kTop + (y_max - v) / (y_max - y_min) * ph; };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
       "viewBox=\"0 0 640 480\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  s += "<rect x=\"" + fixed(kLeft, 1) + "\" y=\"" + fixed(kTop, 1) + "\" width=\"" + fixed(pw, 1) +
       "\" height=\"" + fixed(ph, 1) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x_max * i / 4, yv = y_min + (y_max - y_min) * i / 4;
    s += "<line x1=\"" + fixed(sx(xv), 1) + "\" y1=\"" + fixed(kTop + ph, 1) + "\" x2=\"" +
         fixed(sx(xv), 1) + "\" y2=\"" + fixed(kTop + ph + 5, 1) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + fixed(sx(xv), 1) + "\" y=\"" + fixed(kTop + ph + 20, 1) +
         "\" text-anchor=\"middle\">" + fixed(xv, 2) + "</text>\n";
    s += "<line x1=\"" + fixed(kLeft - 5, 1) + "\" y1=\"" + fixed(sy(yv), 1) + "\" x2=\"" +
         fixed(kLeft, 1) + "\" y2=\"" + fixed(sy(yv), 1) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + fixed(kLeft - 8, 1) + "\" y=\"" + fixed(sy(yv) + 4, 1) +
         "\" text-anchor=\"end\">" + fixed(yv, 3) + "</text>\n";
  }
  s += "<text x=\"" + fixed(kLeft + pw / 2, 1) + "\" y=\"" + fixed(kH - 15, 1) +
       "\" text-anchor=\"middle\">bits per pixel (bpp)</text>\n";
  s += "<text transform=\"translate(18," + fixed(kTop + ph / 2, 1) +
       ") rotate(-90)\" text-anchor=\"middle\">MS-SSIM</text>\n";
  for (size_t f = 0; f < families.size(); ++f) {
    auto pts = points[families[f]];
    std::sort(pts.begin(), pts.end());
    const std::string color = kColors[f % 8];
    std::string poly;
    for (const auto& [b, q] : pts) poly += (poly.empty() ? "" : " ") + fixed(sx(b), 2) + "," + fixed(sy(q), 2);
    s += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\" points=\"" + poly + "\"/>\n";
    for (const auto& [b, q] : pts) {
      s += "<circle cx=\"" + fixed(sx(b), 2) + "\" cy=\"" + fixed(sy(q), 2) + "\" r=\"3\" fill=\"" +
           color + "\"/>\n";
    }
    const double ly = kTop + 10 + 18.0 * static_cast<double>(f);
    s += "<line x1=\"" + fixed(kW - kRight + 15, 1) + "\" y1=\"" + fixed(ly, 1) + "\" x2=\"" +
         fixed(kW - kRight + 35, 1) + "\" y2=\"" + fixed(ly, 1) + "\" stroke=\"" + color +
         "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + fixed(kW - kRight + 40, 1) + "\" y=\"" + fixed(ly + 4, 1) + "\">" +
         escape(families[f]) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace msic::cli
