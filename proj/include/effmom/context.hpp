#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "effmom/ncpoly.hpp"
#include "effmom/poly.hpp"
#include "effmom/symbols.hpp"

namespace effmom {

// Value of one commutator [a_i, a_j]: a central part plus a linear
// combination of generators.  Coefficients are polynomials in hbar and the
// declared parameters.
struct BracketValue {
  Poly central;
  std::vector<Poly> linear;

  bool is_zero() const {
    if (!central.is_zero()) return false;
    for (const auto& p : linear)
      if (!p.is_zero()) return false;
    return true;
  }
};

// One model universe: the kinematical algebra, the flat symbol table shared
// by every polynomial derived from it, and memoisation for the expensive
// rewriting and expansion steps.  Logically immutable after construction;
// the caches are guarded so concurrent readers stay consistent.
class Context {
 public:
  SymbolTable syms;
  std::vector<std::string> gens;
  std::vector<SymId> expect_syms;        // per generator
  std::vector<std::uint32_t> star_perm;  // involution on generator indices
  SymId hbar_sym = 0;
  std::map<std::string, SymId> params;
  std::vector<std::vector<BracketValue>> bracket;  // full antisymmetric table

  std::size_t ngen() const { return gens.size(); }

  std::optional<std::uint32_t> gen_index(const std::string& name) const {
    for (std::uint32_t i = 0; i < gens.size(); ++i)
      if (gens[i] == name) return i;
    return std::nullopt;
  }

  SymId moment_sym(const std::vector<std::uint32_t>& multideg) {
    return syms.moment(multideg, gens);
  }
  SymId raw_sym(const std::vector<std::uint32_t>& multideg) {
    return syms.raw(multideg, gens);
  }

  Poly poly_const(CRat c) { return Poly::constant(&syms, std::move(c)); }
  Poly poly_sym(SymId s, std::uint32_t e = 1) {
    return Poly::symbol(&syms, s, e);
  }

  // Bracket of two generators; `centered` gives [da_i, da_j], whose linear
  // part re-centres through a_k = <a_k> + da_k.
  BracketValue bracket_value(std::uint32_t x, std::uint32_t y,
                             bool centered) const {
    BracketValue bv = bracket[x][y];
    if (centered) {
      for (std::uint32_t k = 0; k < ngen(); ++k)
        if (!bv.linear[k].is_zero())
          bv.central += bv.linear[k] * Poly::symbol(&syms, expect_syms[k]);
    }
    return bv;
  }

  // --- algebraic square roots -------------------------------------------
  // aux_sqrt(arg) is the symbol s with s^2 = arg; arg is a grade-0
  // polynomial over expectations and parameters.
  SymId intern_sqrt(const Poly& arg) {
    std::lock_guard<std::mutex> lock(aux_mutex_);
    for (std::size_t i = 0; i < aux_defs_.size(); ++i)
      if (aux_defs_[i] == arg) return aux_ids_[i];
    auto idx = static_cast<std::uint32_t>(aux_defs_.size());
    SymId id = syms.aux_sqrt(idx, "sqrt(" + arg.to_string() + ")");
    aux_defs_.push_back(arg);
    aux_ids_.push_back(id);
    return id;
  }
  const Poly& aux_def(std::uint32_t aux_index) const {
    return aux_defs_.at(aux_index);
  }
  std::size_t aux_count() const { return aux_defs_.size(); }

  // --- caches -------------------------------------------------------------
  template <class K, class V>
  class Cache {
   public:
    std::optional<V> find(const K& k) const {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = map_.find(k);
      if (it == map_.end()) return std::nullopt;
      return it->second;
    }
    void put(const K& k, V v) {
      std::lock_guard<std::mutex> lock(mutex_);
      map_.emplace(k, std::move(v));
    }

   private:
    mutable std::mutex mutex_;
    std::map<K, V> map_;
  };

  Cache<std::pair<bool, Word>, NCPoly> word_cache;           // normal ordering
  Cache<std::vector<std::uint32_t>, Poly> delta_cache;       // <delta word>
  Cache<SymId, Poly> moment_raw_cache;                       // moment -> raw
  Cache<SymId, Poly> raw_moment_cache;                       // raw -> moment
  Cache<std::pair<SymId, SymId>, Poly> raw_bracket_cache;    // {X_A, X_B}

 private:
  mutable std::mutex aux_mutex_;
  std::vector<Poly> aux_defs_;
  std::vector<SymId> aux_ids_;
};

using ContextPtr = std::shared_ptr<Context>;

}  // namespace effmom
