#include "hones/counters.hpp"

namespace hones {

std::string_view op_name(Op op) {
  switch (op) {
    case Op::find_lambda: return "find_lambda";
    case Op::update_lambda: return "update_by_lambda";
    case Op::expand_lambda: return "expand_support_lambda";
    case Op::shrink_lambda: return "shrink_support_lambda";
    case Op::direct_par2: return "direct_update_par2";
    case Op::find_utilde: return "find_utilde_lambda";
    case Op::update_utilde: return "update_by_utilde_lambda";
    case Op::expand_utilde: return "expand_support_utilde";
    case Op::shrink_utilde: return "shrink_support_utilde";
    case Op::direct_par3: return "direct_update_par3";
    case Op::polish: return "polish";
    case Op::a_update: return "a_update";
    case Op::count_: break;
  }
  return "unknown";
}

std::uint64_t Counters::total() const {
  std::uint64_t sum = 0;
  for (std::size_t k = 0; k < kOpCount; ++k)
    if (k != static_cast<std::size_t>(Op::a_update) && k != static_cast<std::size_t>(Op::polish)) sum += tally[k];
  return sum;
}

}  // namespace hones
