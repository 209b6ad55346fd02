#include "ctxfuse/bpa.hpp"

#include <algorithm>
#include <cmath>

#include "ctxfuse/error.hpp"

namespace ctxfuse {
namespace {

void require_same_frame(const Bpa& m1, const Bpa& m2) {
  if (!(m1.frame() == m2.frame())) {
    throw Error(ErrorCode::kFrameMismatch,
                "bpas are defined over different frames");
  }
}

std::vector<Bpa::Focal> collect(const std::map<std::uint32_t, double>& acc) {
  std::vector<Bpa::Focal> out;
  out.reserve(acc.size());
  for (const auto& [mask, value] : acc) {
    if (value > 0.0) out.emplace_back(Subset::from_mask(mask), value);
  }
  return out;
}

}  // namespace

Bpa Bpa::create(Frame frame, std::span<const Focal> assignments) {
  std::map<std::uint32_t, double> acc;
  double total = 0.0;
  for (const auto& [subset, value] : assignments) {
    frame.check(subset);
    if (!(value >= 0.0) || !std::isfinite(value)) {
      throw Error(ErrorCode::kNotNormalized,
                  "mass values must be finite and non-negative");
    }
    if (value == 0.0) continue;
    if (subset.empty()) {
      throw Error(ErrorCode::kEmptyFocal, "the empty set carries positive mass");
    }
    acc[subset.mask()] += value;
    total += value;
  }
  if (std::abs(total - 1.0) > kNormTolerance) {
    throw Error(ErrorCode::kNotNormalized,
                "masses sum to " + std::to_string(total) + ", expected 1");
  }
  return Bpa(std::move(frame), collect(acc));
}

Bpa Bpa::vacuous(Frame frame) {
  Subset all = frame.full();
  return Bpa(std::move(frame), {{all, 1.0}});
}

Bpa Bpa::from_probabilities(Frame frame, std::span<const double> p) {
  if (p.size() != frame.size()) {
    throw Error(ErrorCode::kBadFrame,
                "distribution has " + std::to_string(p.size()) +
                    " entries for a frame of size " +
                    std::to_string(frame.size()));
  }
  std::vector<Focal> focal;
  for (std::size_t i = 0; i < p.size(); ++i) {
    focal.emplace_back(Subset::singleton(i), p[i]);
  }
  return create(std::move(frame), focal);
}

Bpa Bpa::from_probabilities(Frame frame, const std::map<std::string, double>& p) {
  std::vector<double> dense(frame.size(), 0.0);
  for (const auto& [name, value] : p) {
    auto idx = frame.index_of(name);
    if (!idx) {
      throw Error(ErrorCode::kBadFrame, "unknown frame element '" + name + "'");
    }
    dense[*idx] = value;
  }
  return from_probabilities(std::move(frame), dense);
}

double Bpa::mass(Subset s) const {
  auto it = std::lower_bound(
      focal_.begin(), focal_.end(), s,
      [](const Focal& f, Subset key) { return f.first < key; });
  return (it != focal_.end() && it->first == s) ? it->second : 0.0;
}

double belief(const Bpa& m, Subset a) {
  m.frame().check(a);
  double sum = 0.0;
  for (const auto& [b, mass] : m.focal_elements()) {
    if (b.is_subset_of(a)) sum += mass;
  }
  return sum;
}

double plausibility(const Bpa& m, Subset a) {
  m.frame().check(a);
  double sum = 0.0;
  for (const auto& [b, mass] : m.focal_elements()) {
    if (b.intersects(a)) sum += mass;
  }
  return sum;
}

double conflict(const Bpa& m1, const Bpa& m2) {
  require_same_frame(m1, m2);
  double kappa = 0.0;
  for (const auto& [a, ma] : m1.focal_elements()) {
    for (const auto& [b, mb] : m2.focal_elements()) {
      if (!a.intersects(b)) kappa += ma * mb;
    }
  }
  return kappa;
}

Bpa combine(const Bpa& m1, const Bpa& m2) {
  require_same_frame(m1, m2);
  std::map<std::uint32_t, double> acc;
  // Summing the agreeing products directly keeps 1 - kappa accurate when the
  // conflict is small.
  double agreement = 0.0;
  for (const auto& [a, ma] : m1.focal_elements()) {
    for (const auto& [b, mb] : m2.focal_elements()) {
      Subset c = a & b;
      if (c.empty()) continue;
      acc[c.mask()] += ma * mb;
      agreement += ma * mb;
    }
  }
  if (agreement < kIdentityTolerance) {
    throw Error(ErrorCode::kTotalConflict,
                "the two bpas are in total conflict");
  }
  for (auto& [mask, value] : acc) value /= agreement;
  return Bpa(m1.frame(), collect(acc));
}

}  // namespace ctxfuse
