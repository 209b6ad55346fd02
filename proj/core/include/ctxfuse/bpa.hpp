#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ctxfuse/frame.hpp"

namespace ctxfuse {

/// A basic probability assignment (mass function) over the subsets of a
/// frame. Only focal elements (strictly positive mass) are stored, ordered by
/// subset mask. Instances are immutable.
class Bpa {
 public:
  using Focal = std::pair<Subset, double>;

  /// Duplicate subsets are summed and zero entries dropped. Throws
  /// kEmptyFocal, kNotNormalized or kBadFrame.
  static Bpa create(Frame frame, std::span<const Focal> assignments);
  static Bpa create(Frame frame, std::initializer_list<Focal> assignments) {
    return create(std::move(frame),
                  std::span<const Focal>(assignments.begin(), assignments.size()));
  }

  /// Single focal element: the whole frame.
  static Bpa vacuous(Frame frame);

  /// Singleton focal elements from a distribution indexed like the frame.
  static Bpa from_probabilities(Frame frame, std::span<const double> p);
  static Bpa from_probabilities(Frame frame,
                                const std::map<std::string, double>& p);

  const Frame& frame() const { return frame_; }
  const std::vector<Focal>& focal_elements() const { return focal_; }
  /// Zero for subsets that are not focal.
  double mass(Subset s) const;

 private:
  friend Bpa combine(const Bpa& m1, const Bpa& m2);

  Bpa(Frame frame, std::vector<Focal> focal)
      : frame_(std::move(frame)), focal_(std::move(focal)) {}

  Frame frame_;
  std::vector<Focal> focal_;
};

double belief(const Bpa& m, Subset a);
double plausibility(const Bpa& m, Subset a);

/// Mass committed to pairwise-disjoint focal elements. Throws kFrameMismatch.
double conflict(const Bpa& m1, const Bpa& m2);

/// Dempster's rule. Throws kFrameMismatch, or kTotalConflict when the
/// conflict is one.
Bpa combine(const Bpa& m1, const Bpa& m2);

}  // namespace ctxfuse
