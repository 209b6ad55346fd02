#pragma once

#include <span>
#include <vector>

#include "ctxfuse/bpa.hpp"
#include "ctxfuse/frame.hpp"

namespace ctxfuse {

/// Element-wise possibility grades in [0,1], indexed like the frame.
class PossibilityDistribution {
 public:
  /// Throws kBadFrame on a size mismatch or a value outside [0,1], and
  /// kAllZero when no element is possible.
  PossibilityDistribution(Frame frame, std::vector<double> values);

  const Frame& frame() const { return frame_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_.at(i); }
  double max() const;

 private:
  Frame frame_;
  std::vector<double> values_;
};

/// Divides every grade by the largest one.
PossibilityDistribution normalize(const PossibilityDistribution& pi);

/// max of the grades over `b`; 0 for the empty set.
double poss_measure(const PossibilityDistribution& pi, Subset b);

/// The unique consonant bpa whose plausibility equals the possibility measure
/// of `pi` on every subset. Focal elements are the nested upper level sets of
/// `pi`; ties keep frame order. Throws kNotNormal unless max(pi) is 1.
Bpa consonant_bpa(const PossibilityDistribution& pi);

}  // namespace ctxfuse
