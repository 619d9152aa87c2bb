#pragma once

namespace lagaboost::detail {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace lagaboost::detail
