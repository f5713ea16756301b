#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>

namespace seit {

// Simulation / protocol time. One tick is one millisecond in the simulator
// and one second in the network service.
using Tick = std::int64_t;

class TenantId {
 public:
  TenantId() = default;
  explicit TenantId(std::string value) : value_(std::move(value)) {}
  explicit TenantId(std::string_view value) : value_(value) {}
  explicit TenantId(const char* value) : value_(value) {}

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  friend auto operator<=>(const TenantId&, const TenantId&) = default;
  friend bool operator==(const TenantId&, const TenantId&) = default;

  friend std::ostream& operator<<(std::ostream& os, const TenantId& id) {
    return os << id.value_;
  }

 private:
  std::string value_;
};

}  // namespace seit

template <>
struct std::hash<seit::TenantId> {
  std::size_t operator()(const seit::TenantId& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
