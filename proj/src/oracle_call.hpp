#pragma once

#include <exception>
#include <utility>

#include "wayfinder/error.hpp"

namespace wayfinder::detail {

// Runs an oracle call and re-raises failures as OracleError tagged with the role.
template <typename F>
auto call_oracle(const char* role, F&& fn) -> decltype(fn()) {
  try {
    return std::forward<F>(fn)();
  } catch (const OracleError&) {
    throw;
  } catch (const Error& e) {
    throw OracleError(role, e.code(), e.what());
  } catch (const std::exception& e) {
    throw OracleError(role, ErrorCode::OracleError, e.what());
  }
}

}  // namespace wayfinder::detail
