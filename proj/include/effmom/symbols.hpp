#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "effmom/error.hpp"

namespace effmom {

using SymId = std::uint32_t;

// The commutative layer works with a single flat symbol universe:
//   Expect  - expectation value of one generator, grade 0
//   Moment  - central Weyl moment of a multidegree (total degree >= 2), grade = degree
//   Param   - declared model parameter (m, ...), grade 0
//   Hbar    - the formal semiclassical grading symbol, grade 2
//   Raw     - expectation of a PBW monomial of degree >= 2 (internal coordinates)
//   AuxSqrt - algebraic symbol s with s^2 = defining polynomial, grade 0
//   Unknown - temporary series coefficient used by the perturbative solver
enum class SymKind : std::uint8_t {
  Expect = 0,
  Moment = 1,
  Param = 2,
  Hbar = 3,
  Raw = 4,
  AuxSqrt = 5,
  Unknown = 6,
};

struct SymbolInfo {
  SymKind kind;
  std::string name;
  int grade = 0;
  // Canonical content key; symbol ordering (and therefore every printed dump)
  // is defined by this key, never by interning order.
  std::vector<std::uint32_t> key;
  std::vector<std::uint32_t> multideg;  // Moment/Raw: exponents over generators
  std::uint32_t gen = 0;                // Expect: generator index
  std::uint32_t aux = 0;                // AuxSqrt: index into aux definitions
};

class SymbolTable {
 public:
  const SymbolInfo& info(SymId s) const { return symbols_.at(s); }
  std::size_t size() const { return symbols_.size(); }

  // Content order: Expect < Moment < Param < Hbar < Raw < AuxSqrt < Unknown,
  // refined within each kind by the content key.
  bool less(SymId a, SymId b) const {
    if (a == b) return false;
    return symbols_[a].key < symbols_[b].key;
  }

  SymId expect(std::uint32_t gen_index, const std::string& gen_name) {
    std::vector<std::uint32_t> key{0, gen_index};
    return intern(key, [&] {
      SymbolInfo s;
      s.kind = SymKind::Expect;
      s.name = gen_name;
      s.grade = 0;
      s.key = key;
      s.gen = gen_index;
      return s;
    });
  }

  SymId moment(const std::vector<std::uint32_t>& multideg,
               const std::vector<std::string>& gen_names) {
    std::uint32_t deg = 0;
    for (auto n : multideg) deg += n;
    if (deg < 2) throw Error("central moments have degree >= 2");
    std::vector<std::uint32_t> key{1, deg};
    // Earlier-generator-heavy multidegrees sort first.
    for (auto n : multideg) key.push_back(~n);
    return intern(key, [&] {
      SymbolInfo s;
      s.kind = SymKind::Moment;
      s.name = moment_name(multideg, gen_names);
      s.grade = static_cast<int>(deg);
      s.key = key;
      s.multideg = multideg;
      return s;
    });
  }

  SymId param(const std::string& name, std::uint32_t decl_index) {
    std::vector<std::uint32_t> key{2, decl_index};
    return intern(key, [&] {
      SymbolInfo s;
      s.kind = SymKind::Param;
      s.name = name;
      s.grade = 0;
      s.key = key;
      return s;
    });
  }

  SymId hbar() {
    std::vector<std::uint32_t> key{3};
    return intern(key, [&] {
      SymbolInfo s;
      s.kind = SymKind::Hbar;
      s.name = "hbar";
      s.grade = 2;
      s.key = key;
      return s;
    });
  }

  SymId raw(const std::vector<std::uint32_t>& multideg,
            const std::vector<std::string>& gen_names) {
    std::uint32_t deg = 0;
    for (auto n : multideg) deg += n;
    if (deg < 2) throw Error("raw symbols have degree >= 2");
    std::vector<std::uint32_t> key{4, deg};
    for (auto n : multideg) key.push_back(~n);
    return intern(key, [&] {
      SymbolInfo s;
      s.kind = SymKind::Raw;
      s.name = raw_name(multideg, gen_names);
      s.grade = 0;  // raw coordinates are never graded or truncated
      s.key = key;
      s.multideg = multideg;
      return s;
    });
  }

  SymId aux_sqrt(std::uint32_t aux_index, const std::string& name) {
    std::vector<std::uint32_t> key{5, aux_index};
    return intern(key, [&] {
      SymbolInfo s;
      s.kind = SymKind::AuxSqrt;
      s.name = name;
      s.grade = 0;
      s.key = key;
      s.aux = aux_index;
      return s;
    });
  }

  SymId unknown(std::uint32_t index, int grade, const std::string& name) {
    std::vector<std::uint32_t> key{6, index};
    return intern(key, [&] {
      SymbolInfo s;
      s.kind = SymKind::Unknown;
      s.name = name;
      s.grade = grade;
      s.key = key;
      return s;
    });
  }

  static std::string moment_name(const std::vector<std::uint32_t>& multideg,
                                 const std::vector<std::string>& gen_names) {
    std::string out = "D(";
    bool first = true;
    for (std::size_t i = 0; i < multideg.size(); ++i)
      for (std::uint32_t k = 0; k < multideg[i]; ++k) {
        if (!first) out += ",";
        out += gen_names[i];
        first = false;
      }
    return out + ")";
  }

  static std::string raw_name(const std::vector<std::uint32_t>& multideg,
                              const std::vector<std::string>& gen_names) {
    std::string out = "<";
    bool first = true;
    for (std::size_t i = 0; i < multideg.size(); ++i)
      if (multideg[i] > 0) {
        if (!first) out += "*";
        out += gen_names[i];
        if (multideg[i] > 1) out += "^" + std::to_string(multideg[i]);
        first = false;
      }
    return out + ">";
  }

 private:
  template <class Make>
  SymId intern(const std::vector<std::uint32_t>& key, Make make) {
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    SymId id = static_cast<SymId>(symbols_.size());
    symbols_.push_back(make());
    index_.emplace(key, id);
    return id;
  }

  std::vector<SymbolInfo> symbols_;
  std::map<std::vector<std::uint32_t>, SymId> index_;
};

}  // namespace effmom
