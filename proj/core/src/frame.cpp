#include "ctxfuse/frame.hpp"

#include <algorithm>
#include <set>

#include "ctxfuse/error.hpp"

namespace ctxfuse {

Subset Subset::of(std::initializer_list<std::size_t> indices) {
  std::uint32_t mask = 0;
  for (std::size_t i : indices) {
    if (i >= 32) {
      throw Error(ErrorCode::kBadFrame, "subset index " + std::to_string(i) +
                                            " does not fit an index mask");
    }
    mask |= std::uint32_t{1} << i;
  }
  return from_mask(mask);
}

Frame::Frame(std::vector<std::string> elements) : elements_(std::move(elements)) {
  if (elements_.empty()) {
    throw Error(ErrorCode::kBadFrame, "frame must have at least one element");
  }
  if (elements_.size() > kMaxFrameSize) {
    throw Error(ErrorCode::kBadFrame,
                "frame of size " + std::to_string(elements_.size()) +
                    " exceeds the limit of " + std::to_string(kMaxFrameSize));
  }
  std::set<std::string_view> seen;
  for (const auto& e : elements_) {
    if (!seen.insert(e).second) {
      throw Error(ErrorCode::kBadFrame, "duplicate frame element '" + e + "'");
    }
  }
}

std::optional<std::size_t> Frame::index_of(std::string_view name) const {
  auto it = std::find(elements_.begin(), elements_.end(), name);
  if (it == elements_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - elements_.begin());
}

Subset Frame::subset(std::initializer_list<std::string_view> names) const {
  std::uint32_t mask = 0;
  for (auto name : names) {
    auto idx = index_of(name);
    if (!idx) {
      throw Error(ErrorCode::kBadFrame,
                  "unknown frame element '" + std::string(name) + "'");
    }
    mask |= std::uint32_t{1} << *idx;
  }
  return Subset::from_mask(mask);
}

void Frame::check(Subset s) const {
  if (!s.is_subset_of(full())) {
    throw Error(ErrorCode::kBadFrame,
                "subset references an index outside a frame of size " +
                    std::to_string(size()));
  }
}

}  // namespace ctxfuse
