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

#ifndef MSIC_TOOLS_RD_PLOT_H_
#define MSIC_TOOLS_RD_PLOT_H_

#include <string>
#include <string_view>
#include <vector>

namespace msic::cli {

// One CSV row: label,image,bpp,ms_ssim,enc_s,dec_s.
struct RdRow {
  std::string label;
  std::string image;
  double bpp = 0;
  double ms_ssim = 0;
  double enc_s = 0;
  double dec_s = 0;
};

inline constexpr std::string_view kRdCsvHeader = "label,image,bpp,ms_ssim,enc_s,dec_s\n";

std::string format_rd_row(const RdRow& row);
// Per-image rows followed by one "mean" row per label (header only if empty).
std::string format_rd_csv(const std::vector<RdRow>& rows);
std::vector<RdRow> parse_rd_csv(std::string_view text);

// Rate-distortion plot of the "mean" rows, bpp on x and MS-SSIM on y, one
// polyline per codec family (label prefix before '@').
std::string render_rd_svg(const std::vector<RdRow>& rows);

}  // namespace msic::cli

#endif  // MSIC_TOOLS_RD_PLOT_H_
