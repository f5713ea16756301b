#pragma once

#include <json.hpp>
#include <random>
#include <string>
#include <vector>

#include "seit/protocol.hpp"

namespace seit::fuzz {

class MessageFuzzer {
 public:
  explicit MessageFuzzer(std::uint64_t seed) : rng_(seed) {}

  std::string id() {
    static const std::vector<std::string> alphabet{"a", "b", "Z", "0", "7", "-", "_", ".", " ",
                                                   "\xC3\xA9", "\xE2\x82\xAC", "\xF0\x9F\x94\x91",
                                                   "\"", "\\", "\t"};
    std::string s;
    const int len = 1 + static_cast<int>(rng_() % 8);
    for (int i = 0; i < len; ++i) s += alphabet[rng_() % alphabet.size()];
    return s;
  }

  double unit() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
  double signed_unit() {
    switch (rng_() % 6) {
      case 0: return -1.0;
      case 1: return 1.0;
      case 2: return 0.0;
      default: return std::uniform_real_distribution<double>(-1.0, 1.0)(rng_);
    }
  }
  bool coin() { return rng_() % 2 == 0; }
  std::optional<std::string> maybe() {
    if (coin()) return std::nullopt;
    return id();
  }

  protocol::Message valid() {
    using namespace protocol;
    switch (rng_() % 8) {
      case 0: {
        Register m{TenantId(id()), std::nullopt, maybe()};
        if (coin()) {
          ComponentDescriptor c{id(), id() + ":" + std::to_string(rng_() % 65536),
                                static_cast<ComponentRole>(rng_() % 3), id(), {}};
          for (unsigned k = rng_() % 3; k > 0; --k) c.tasks.push_back(id());
          m.component = c;
        }
        return m;
      }
      case 1: return ConnectRequest{TenantId(id()), TenantId(id()), maybe()};
      case 2: {
        ConnectApprove m{TenantId(id()), TenantId(id()), {}, unit(), maybe()};
        for (unsigned k = rng_() % 4; k > 0; --k) m.path.emplace_back(id());
        return m;
      }
      case 3: return ConnectReject{TenantId(id()), TenantId(id()), id(), maybe()};
      case 4: {
        std::string r = id(), s = id();
        if (r == s) s += "x";
        return Feedback{TenantId(r), TenantId(s), signed_unit(), maybe(), maybe()};
      }
      case 5: {
        Configure m{TenantId(id()), std::nullopt, std::nullopt, std::nullopt, maybe()};
        if (coin()) m.edge_selectivity_threshold = unit();
        if (coin()) {
          m.query_rate_limit = RateLimitSetting{static_cast<std::int64_t>(rng_() % 100),
                                                1 + static_cast<std::int64_t>(rng_() % 1000)};
        }
        if (coin()) {
          SubscriptionSetting s;
          if (coin()) s.subject = TenantId(id());
          double t = 0.0;
          for (unsigned k = rng_() % 4; k > 0; --k) {
            t += 0.01 + unit() * 0.2;
            if (t > 1.0) break;
            s.thresholds.push_back(t);
          }
          m.subscription = s;
        }
        return m;
      }
      case 6:
        return ReputationUpdateMsg{TenantId(id()), TenantId(id()), unit(), unit(),
                                   coin() ? "rising" : "falling",
                                   static_cast<std::int64_t>(rng_() % 1'000'000)};
      default: return ErrorMsg{id(), id(), maybe()};
    }
  }

  // Byte strings that no valid frame can equal.
  std::string invalid() {
    const std::string base = protocol::encode(valid());
    auto obj = nlohmann::ordered_json::parse(base);
    switch (rng_() % 9) {
      case 0:  // truncated
        return base.substr(0, rng_() % base.size());
      case 1:  // unknown field
        obj["zz_" + std::to_string(rng_() % 100)] = 1;
        return obj.dump();
      case 2: {  // required field removed
        std::vector<std::string> keys;
        for (auto& [k, v] : obj.items()) {
          if (k != "type" && k != "request_id" && k != "cause" && k != "component" &&
              !(obj["type"] == "configure" && k != "tenant")) {
            keys.push_back(k);
          }
        }
        if (keys.empty()) return base + "}";
        obj.erase(keys[rng_() % keys.size()]);
        return obj.dump();
      }
      case 3:  // unknown type
        obj["type"] = "x" + id();
        return obj.dump();
      case 4: {  // out-of-range feedback
        nlohmann::ordered_json f{{"type", "feedback"}, {"reporter", "a"}, {"subject", "b"},
                                 {"q", (coin() ? 1.0 : -1.0) * (1.0 + 1e-9 + unit() * 9)}};
        return f.dump();
      }
      case 5: {  // ill-formed UTF-8 inside a string
        std::string s = base;
        const auto pos = s.find("\":\"");
        s.insert(pos == std::string::npos ? 1 : pos + 3, 1, static_cast<char>(0xC0 | (rng_() % 2)));
        return s;
      }
      case 6: {  // wrong type for a field
        for (auto& [k, v] : obj.items()) {
          if (k != "type" && v.is_string()) {
            v = 42;
            return obj.dump();
          }
        }
        return "[" + base + "]";
      }
      case 7: {  // random bytes behind a byte that cannot start a JSON value
        std::string s(1, "}]:,"[rng_() % 4]);
        for (unsigned k = rng_() % 64; k > 0; --k) s += static_cast<char>(rng_() % 256);
        return s;
      }
      default:  // valid JSON, not an object
        return coin() ? "[1,2]" : "\"feedback\"";
    }
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace seit::fuzz
