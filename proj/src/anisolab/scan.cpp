#include "anisolab/scan.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace anisolab::scan {

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Bounded: return "bounded";
    case Verdict::Unbounded: return "unbounded";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

void finish_scan(EnergyScan& s) {
  if (s.radii.size() != s.values.size() || s.radii.size() != s.bounds.size())
    throw std::runtime_error("scan: mismatched series lengths");
  s.ratios.resize(s.values.size());
  s.fitted_k = 0.0;
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    double b = s.bounds[i];
    s.ratios[i] = b != 0.0 ? s.values[i] / b : 0.0;
    s.fitted_k = std::max(s.fitted_k, s.ratios[i]);
  }
  if (s.radii.size() < 2) {
    s.verdict = Verdict::Inconclusive;
    return;
  }
  // tail window: the last decade of radii when the scan spans several
  // decades, otherwise the last third of the list (at least three points)
  double rmax = s.radii.back();
  std::size_t tail;
  if (s.radii.front() > 0.0 && rmax / s.radii.front() >= 100.0) {
    tail = 0;
    while (tail + 1 < s.radii.size() && s.radii[tail] < rmax / 10.0) ++tail;
    if (s.radii.size() >= 3) tail = std::min(tail, s.radii.size() - 3);
  } else {
    std::size_t window = std::max<std::size_t>(3, s.radii.size() / 3);
    tail = s.radii.size() > window ? s.radii.size() - window : 0;
  }
  s.tail_begin = tail;

  bool non_increasing = true;
  for (std::size_t i = tail; i + 1 < s.ratios.size(); ++i)
    if (s.ratios[i + 1] > s.ratios[i] * 1.05) non_increasing = false;
  if (non_increasing) {
    s.verdict = Verdict::Bounded;
    return;
  }
  bool rising = true;
  for (std::size_t i = tail; i + 1 < s.ratios.size(); ++i)
    if (s.ratios[i + 1] < s.ratios[i]) rising = false;
  if (rising && s.ratios[tail] > 0.0 && s.ratios.back() > 1.25 * s.ratios[tail])
    s.verdict = Verdict::Unbounded;
  else
    s.verdict = Verdict::Inconclusive;
}

}  // namespace anisolab::scan
