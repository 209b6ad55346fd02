#include "ctxfuse/possibility.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ctxfuse/error.hpp"

namespace ctxfuse {

PossibilityDistribution::PossibilityDistribution(Frame frame,
                                                 std::vector<double> values)
    : frame_(std::move(frame)), values_(std::move(values)) {
  if (values_.size() != frame_.size()) {
    throw Error(ErrorCode::kBadFrame,
                "possibility distribution has " + std::to_string(values_.size()) +
                    " values for a frame of size " +
                    std::to_string(frame_.size()));
  }
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::kBadFrame, "possibility values must lie in [0,1]");
    }
  }
  if (max() <= 0.0) {
    throw Error(ErrorCode::kAllZero, "no element has positive possibility");
  }
}

double PossibilityDistribution::max() const {
  return *std::max_element(values_.begin(), values_.end());
}

PossibilityDistribution normalize(const PossibilityDistribution& pi) {
  const double top = pi.max();
  std::vector<double> scaled(pi.values());
  for (double& v : scaled) v /= top;
  return PossibilityDistribution(pi.frame(), std::move(scaled));
}

double poss_measure(const PossibilityDistribution& pi, Subset b) {
  pi.frame().check(b);
  double best = 0.0;
  for (std::size_t i = 0; i < pi.frame().size(); ++i) {
    if (b.contains(i)) best = std::max(best, pi[i]);
  }
  return best;
}

Bpa consonant_bpa(const PossibilityDistribution& pi) {
  if (std::abs(pi.max() - 1.0) > kNormTolerance) {
    throw Error(ErrorCode::kNotNormal,
                "possibility distribution is not normal (max " +
                    std::to_string(pi.max()) + ")");
  }
  const std::size_t n = pi.frame().size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pi[a] > pi[b]; });

  std::vector<Bpa::Focal> focal;
  std::uint32_t level = 0;
  for (std::size_t i = 0; i < n; ++i) {
    level |= std::uint32_t{1} << order[i];
    // The top grade is taken as exactly 1 so the masses telescope to 1.
    const double upper = i == 0 ? 1.0 : pi[order[i]];
    const double lower = i + 1 < n ? pi[order[i + 1]] : 0.0;
    const double mass = upper - lower;
    if (mass > 0.0) focal.emplace_back(Subset::from_mask(level), mass);
  }
  return Bpa::create(pi.frame(), focal);
}

}  // namespace ctxfuse
