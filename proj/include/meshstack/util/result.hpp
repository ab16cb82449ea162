#pragma once

#include <optional>
#include <string>
#include <utility>

namespace meshstack {

// Lightweight ok-or-error carrier used by parsers and decoders.
// gcc 11 has no std::expected; this is the subset we need.
template <typename T>
struct Result {
  std::optional<T> val;
  std::string err;

  bool ok() const { return val.has_value(); }
  T& operator*() { return *val; }
  const T& operator*() const { return *val; }
  T* operator->() { return &*val; }
  const T* operator->() const { return &*val; }

  static Result success(T v) { return Result{std::move(v), {}}; }
  static Result failure(std::string e) { return Result{std::nullopt, std::move(e)}; }
};

}  // namespace meshstack
