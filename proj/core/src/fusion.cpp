#include "ctxfuse/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "ctxfuse/error.hpp"

namespace ctxfuse {
namespace {

std::vector<std::string> pair_names(const std::vector<std::string>& symbols,
                                    const std::vector<std::string>& texts) {
  if (symbols.empty() || texts.empty()) {
    throw Error(ErrorCode::kBadFrame, "product frame axes must be non-empty");
  }
  if (symbols.size() * texts.size() > kMaxFrameSize) {
    throw Error(ErrorCode::kBadFrame,
                "product frame of size " +
                    std::to_string(symbols.size() * texts.size()) +
                    " exceeds the limit of " + std::to_string(kMaxFrameSize));
  }
  std::vector<std::string> names;
  names.reserve(symbols.size() * texts.size());
  for (const auto& s : symbols) {
    for (const auto& t : texts) names.push_back("(" + s + ", " + t + ")");
  }
  return names;
}

void require_distribution(std::span<const double> p) {
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kNotNormalized,
                  "probabilities must be finite and non-negative");
    }
    total += v;
  }
  if (std::abs(total - 1.0) > kNormTolerance) {
    throw Error(ErrorCode::kNotNormalized,
                "probabilities sum to " + std::to_string(total) + ", expected 1");
  }
}

}  // namespace

ProductFrame::ProductFrame(std::vector<std::string> symbol_labels,
                           std::vector<std::string> text_labels)
    : symbols_(std::move(symbol_labels)),
      texts_(std::move(text_labels)),
      frame_(pair_names(symbols_, texts_)) {}

Bpa lift_marginal(const ProductFrame& pf, Axis axis,
                  const std::map<std::string, double>& p) {
  const auto& labels =
      axis == Axis::kSymbol ? pf.symbol_labels() : pf.text_labels();
  std::vector<double> dense(labels.size(), 0.0);
  for (const auto& [label, value] : p) {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) {
      throw Error(ErrorCode::kUnknownLabel,
                  "label '" + label + "' is not on the " +
                      (axis == Axis::kSymbol ? "symbol" : "text") + " axis");
    }
    dense[static_cast<std::size_t>(it - labels.begin())] = value;
  }
  require_distribution(dense);

  std::vector<Bpa::Focal> focal;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    std::uint32_t mask = 0;
    if (axis == Axis::kSymbol) {
      for (std::size_t t = 0; t < pf.text_labels().size(); ++t) {
        mask |= std::uint32_t{1} << pf.index(k, t);
      }
    } else {
      for (std::size_t s = 0; s < pf.symbol_labels().size(); ++s) {
        mask |= std::uint32_t{1} << pf.index(s, k);
      }
    }
    focal.emplace_back(Subset::from_mask(mask), dense[k]);
  }
  return Bpa::create(pf.frame(), focal);
}

std::vector<double> fuse_prob_plaus(std::span<const double> p,
                                    std::span<const double> pl) {
  if (p.size() != pl.size()) {
    throw Error(ErrorCode::kBadFrame,
                "probability and plausibility vectors differ in length");
  }
  require_distribution(p);
  for (double v : pl) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kNotNormalized,
                  "plausibilities must be finite and non-negative");
    }
  }
  std::vector<double> out(p.size());
  double denom = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[i] = p[i] * pl[i];
    denom += out[i];
  }
  if (!(denom > 0.0)) {
    throw Error(ErrorCode::kZeroEvidence,
                "every probable element has zero plausibility");
  }
  for (double& v : out) v /= denom;
  return out;
}

std::map<std::string, double> fuse_prob_plaus(
    const std::map<std::string, double>& p,
    const std::map<std::string, double>& pl) {
  // Keys missing from either map read as 0.
  std::map<std::string, double> out;
  for (const auto& [name, value] : p) out.emplace(name, 0.0);
  for (const auto& [name, value] : pl) out.emplace(name, 0.0);
  std::vector<double> pv;
  std::vector<double> plv;
  for (const auto& [name, unused] : out) {
    auto ip = p.find(name);
    auto il = pl.find(name);
    pv.push_back(ip == p.end() ? 0.0 : ip->second);
    plv.push_back(il == pl.end() ? 0.0 : il->second);
  }
  auto fused = fuse_prob_plaus(pv, plv);
  std::size_t i = 0;
  for (auto& [name, value] : out) value = fused[i++];
  return out;
}

PlausibilitySum plausibility_sum_check(std::span<const double> pl) {
  double total = 0.0;
  for (double v : pl) total += v;
  return total < 1.0 - kNormTolerance ? PlausibilitySum::kBelowOne
                                      : PlausibilitySum::kOk;
}

}  // namespace ctxfuse
