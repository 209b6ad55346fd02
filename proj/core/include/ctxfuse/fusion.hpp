#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "ctxfuse/bpa.hpp"
#include "ctxfuse/frame.hpp"

namespace ctxfuse {

/// Frame of (symbol, text) pairs. Pair (i, j) has index i * |T| + j.
class ProductFrame {
 public:
  /// Throws kBadFrame when either axis is empty or |S|·|T| exceeds
  /// kMaxFrameSize.
  ProductFrame(std::vector<std::string> symbol_labels,
               std::vector<std::string> text_labels);

  const std::vector<std::string>& symbol_labels() const { return symbols_; }
  const std::vector<std::string>& text_labels() const { return texts_; }
  const Frame& frame() const { return frame_; }

  std::size_t index(std::size_t symbol, std::size_t text) const {
    return symbol * texts_.size() + text;
  }

 private:
  std::vector<std::string> symbols_;
  std::vector<std::string> texts_;
  Frame frame_;
};

enum class Axis { kSymbol, kText };

/// Spreads a marginal distribution over the cylinder sets of one axis: the
/// mass of label x goes to every pair whose `axis` component is x. Labels
/// missing from `p` have probability 0. Throws kNotNormalized or
/// kUnknownLabel.
Bpa lift_marginal(const ProductFrame& pf, Axis axis,
                  const std::map<std::string, double>& p);

/// P*(a) = P(a) Pl({a}) / sum_b P(b) Pl({b}). Inputs are index-aligned.
/// Throws kNotNormalized when p does not sum to one and kZeroEvidence when the
/// denominator vanishes.
std::vector<double> fuse_prob_plaus(std::span<const double> p,
                                    std::span<const double> pl);
std::map<std::string, double> fuse_prob_plaus(
    const std::map<std::string, double>& p,
    const std::map<std::string, double>& pl);

enum class PlausibilitySum { kOk, kBelowOne };

/// Singleton plausibilities of any bpa add up to at least one; a smaller sum
/// is reported but does not affect fuse_prob_plaus, which is scale invariant.
PlausibilitySum plausibility_sum_check(std::span<const double> pl);

}  // namespace ctxfuse
