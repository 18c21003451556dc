#pragma once

// Scalar-multiplication tallies per sub-routine. Additions are not counted.

#include <array>
#include <cstdint>
#include <string_view>

namespace hones {

enum class Op : std::uint8_t {
  find_lambda,
  update_lambda,
  expand_lambda,
  shrink_lambda,
  direct_par2,
  find_utilde,
  update_utilde,
  expand_utilde,
  shrink_utilde,
  direct_par3,
  polish,    // numerical maintenance, excluded from total()
  a_update,  // excluded from total()
  count_
};

inline constexpr std::size_t kOpCount = static_cast<std::size_t>(Op::count_);

std::string_view op_name(Op op);

struct Counters {
  bool enabled = true;
  std::array<std::uint64_t, kOpCount> tally{};

  void add(Op op, std::uint64_t mults) {
    if (enabled) tally[static_cast<std::size_t>(op)] += mults;
  }
  std::uint64_t operator[](Op op) const { return tally[static_cast<std::size_t>(op)]; }
  /// Path cost: everything except polish and the update of A.
  std::uint64_t total() const;
  void reset() { tally.fill(0); }
};

inline void count(Counters* c, Op op, std::uint64_t mults) {
  if (c != nullptr) c->add(op, mults);
}

}  // namespace hones
