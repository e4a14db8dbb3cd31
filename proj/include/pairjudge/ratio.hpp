// Copyright 2026 The pairjudge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>

namespace pj {

/// Exact fraction with an explicit denominator. Rounding happens only when
/// rendering.
struct Ratio {
  std::int64_t num = 0;
  std::int64_t den = 0;

  bool defined() const { return den != 0; }
  double value() const { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }

  friend bool operator==(const Ratio&, const Ratio&) = default;
};

/// Rounds num/den half away from zero to an integer. den must be positive.
inline __int128 round_div(__int128 num, __int128 den) {
  bool neg = num < 0;
  if (neg) num = -num;
  __int128 q = (2 * num + den) / (2 * den);
  return neg ? -q : q;
}

/// num / den with `decimals` digits after the point, rounded half away from
/// zero. "n/a" when den is zero.
inline std::string format_fixed(__int128 num, __int128 den, int decimals) {
  if (den == 0) return "n/a";
  __int128 scale = 1;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  __int128 n = num * scale;
  if (den < 0) {
    n = -n;
    den = -den;
  }
  __int128 q = round_div(n, den);
  std::string sign = q < 0 ? "-" : "";
  if (q < 0) q = -q;
  std::string out = sign + std::to_string(static_cast<long long>(q / scale));
  if (decimals > 0) {
    std::string frac = std::to_string(static_cast<long long>(q % scale));
    out += "." + std::string(static_cast<std::size_t>(decimals) - frac.size(), '0') + frac;
  }
  return out;
}

inline std::string format_percent(std::int64_t num, std::int64_t den, int decimals) {
  return format_fixed(static_cast<__int128>(num) * 100, den, decimals);
}

inline std::string format_percent(const Ratio& r, int decimals) { return format_percent(r.num, r.den, decimals); }

}  // namespace pj
