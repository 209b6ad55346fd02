#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ctxfuse {

/// Largest frame handled exactly; subsets are stored as 32-bit index masks.
inline constexpr std::size_t kMaxFrameSize = 24;

/// Tolerance for "sums to one" checks.
inline constexpr double kNormTolerance = 1e-9;
/// Tolerance for identity and duality checks.
inline constexpr double kIdentityTolerance = 1e-12;

/// A set of element indices of some frame.
class Subset {
 public:
  constexpr Subset() = default;

  static constexpr Subset from_mask(std::uint32_t mask) { return Subset(mask); }
  static Subset of(std::initializer_list<std::size_t> indices);
  static constexpr Subset singleton(std::size_t index) {
    return Subset(std::uint32_t{1} << index);
  }
  /// All indices below `n`.
  static constexpr Subset full(std::size_t n) {
    return Subset(n >= 32 ? ~std::uint32_t{0} : (std::uint32_t{1} << n) - 1);
  }

  constexpr std::uint32_t mask() const { return mask_; }
  constexpr bool empty() const { return mask_ == 0; }
  constexpr std::size_t size() const {
    return static_cast<std::size_t>(std::popcount(mask_));
  }
  constexpr bool contains(std::size_t index) const {
    return index < 32 && ((mask_ >> index) & 1u) != 0;
  }
  constexpr bool is_subset_of(Subset other) const {
    return (mask_ & ~other.mask_) == 0;
  }
  constexpr bool intersects(Subset other) const {
    return (mask_ & other.mask_) != 0;
  }
  constexpr Subset operator&(Subset other) const {
    return Subset(mask_ & other.mask_);
  }
  constexpr Subset operator|(Subset other) const {
    return Subset(mask_ | other.mask_);
  }
  constexpr Subset complement(std::size_t frame_size) const {
    return Subset(~mask_ & full(frame_size).mask_);
  }

  friend constexpr bool operator==(Subset, Subset) = default;
  friend constexpr auto operator<=>(Subset, Subset) = default;

 private:
  constexpr explicit Subset(std::uint32_t mask) : mask_(mask) {}

  std::uint32_t mask_ = 0;
};

/// Finite frame of discernment: an ordered list of distinct element names.
class Frame {
 public:
  /// Throws kBadFrame when empty, larger than kMaxFrameSize or when names
  /// repeat.
  explicit Frame(std::vector<std::string> elements);

  std::size_t size() const { return elements_.size(); }
  const std::vector<std::string>& elements() const { return elements_; }
  const std::string& element(std::size_t index) const {
    return elements_.at(index);
  }
  std::optional<std::size_t> index_of(std::string_view name) const;

  Subset full() const { return Subset::full(size()); }
  /// Subset by element names; throws kBadFrame on an unknown name.
  Subset subset(std::initializer_list<std::string_view> names) const;
  /// Throws kBadFrame when `s` references indices outside the frame.
  void check(Subset s) const;

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  std::vector<std::string> elements_;
};

}  // namespace ctxfuse
