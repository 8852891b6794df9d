#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace anisolab::scan {

enum class Verdict { Bounded, Unbounded, Inconclusive };

const char* verdict_name(Verdict v);

/// Result record for radius scans: values of a named integral against an
/// envelope, their ratios, and a boundedness verdict over the tail window
/// (the last decade of radii, at least the last three entries).
struct EnergyScan {
  std::string quantity;
  std::string envelope;
  std::vector<double> radii;
  std::vector<double> values;
  std::vector<double> bounds;
  std::vector<double> ratios;
  double fitted_k = 0.0;  // max ratio over the scan
  Verdict verdict = Verdict::Inconclusive;
  bool truncated = false;
  std::size_t tail_begin = 0;  // first index of the verdict window
};

/// Fill ratios/fitted_k/verdict from values and bounds already stored.
void finish_scan(EnergyScan& s);

}  // namespace anisolab::scan
