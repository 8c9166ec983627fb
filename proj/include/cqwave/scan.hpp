#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "cqwave/bem.hpp"
#include "cqwave/errors.hpp"

namespace cqwave {

/// Sample axis "imag:START:STOP:STEP" (omega = i s) or "real:START:STOP:STEP" (omega = s).
struct OmegaAxis {
  bool imaginary = true;
  double start = 0.0;
  double stop = 0.0;
  double step = 1.0;

  std::vector<double> parameters() const {
    std::vector<double> s;
    const long n = std::lround(std::floor((stop - start) / step + 1e-9));
    for (long i = 0; i <= n; ++i) s.push_back(start + static_cast<double>(i) * step);
    return s;
  }
  cplx omega(double s) const { return imaginary ? cplx(0.0, s) : cplx(s, 0.0); }
  std::vector<cplx> omegas() const {
    std::vector<cplx> w;
    for (double s : parameters()) w.push_back(omega(s));
    return w;
  }
};

inline OmegaAxis parse_omega_axis(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() != 4) throw InvalidArgument("omega axis must look like imag:START:STOP:STEP");
  OmegaAxis a;
  if (parts[0] == "imag") a.imaginary = true;
  else if (parts[0] == "real") a.imaginary = false;
  else throw InvalidArgument("omega axis direction must be 'imag' or 'real'");
  try {
    size_t used = 0;
    for (int i = 1; i <= 3; ++i) {
      const double v = std::stod(parts[static_cast<size_t>(i)], &used);
      if (used != parts[static_cast<size_t>(i)].size()) throw InvalidArgument("trailing characters");
      (i == 1 ? a.start : i == 2 ? a.stop : a.step) = v;
    }
  } catch (const std::exception&) {
    throw InvalidArgument("omega axis bounds must be numbers: " + text);
  }
  if (!(a.step > 0) || !(a.stop >= a.start)) throw InvalidArgument("omega axis needs STEP > 0 and STOP >= START");
  return a;
}

struct ScanPeak {
  int index = 0;          // sample index of the local maximum
  double parameter = 0;   // parabola vertex along the axis
  double value = 0;       // sampled p at the maximum
};

/// Interior local maxima of p, each refined by the parabola through its two neighbours.
inline std::vector<ScanPeak> scan_peaks(const std::vector<double>& s, const std::vector<double>& p) {
  if (s.size() != p.size()) throw InvalidArgument("scan axis and values differ in length");
  std::vector<ScanPeak> out;
  for (size_t i = 1; i + 1 < p.size(); ++i) {
    if (!(p[i] > p[i - 1] && p[i] >= p[i + 1])) continue;
    const double denom = p[i - 1] - 2.0 * p[i] + p[i + 1];
    const double h = s[i + 1] - s[i];
    double shift = denom != 0.0 ? 0.5 * (p[i - 1] - p[i + 1]) / denom : 0.0;
    shift = std::clamp(shift, -0.5, 0.5);
    out.push_back({static_cast<int>(i), s[i] + shift * h, p[i]});
  }
  return out;
}

}  // namespace cqwave
