#pragma once

#include <complex>
#include <functional>
#include <map>
#include <string>
#include <utility>

#include "fockwitness/errors.hpp"

namespace fockwitness {

enum class Provenance { analytic, oracle };

inline const char* to_string(Provenance p) { return p == Provenance::analytic ? "analytic" : "oracle"; }

/// Normalized moments <a_dag^m a^n> for 0 <= m, n <= max_order, filled eagerly
/// at construction and immutable afterwards, so it can be shared across threads.
class MomentTable {
 public:
  using Moment = std::complex<double>;
  using Source = std::function<Moment(int m, int n)>;

  MomentTable() = default;

  /// Evaluates `source` for m <= n and fills the lower triangle by Hermitian
  /// symmetry. Entry (0,0) is pinned to exactly 1.
  MomentTable(int max_order, const Source& source, Provenance provenance)
      : max_order_(max_order), provenance_(provenance) {
    if (max_order < 0) throw InvalidArgument("MomentTable: negative order");
    for (int m = 0; m <= max_order; ++m) {
      for (int n = m; n <= max_order; ++n) {
        const Moment v = (m == 0 && n == 0) ? Moment{1.0, 0.0} : source(m, n);
        entries_[{m, n}] = v;
        entries_[{n, m}] = std::conj(v);
        if (m == n) entries_[{m, n}] = Moment{v.real(), 0.0};
      }
    }
  }

  int max_order() const { return max_order_; }
  Provenance provenance() const { return provenance_; }

  Moment at(int m, int n) const {
    const auto it = entries_.find({m, n});
    if (it == entries_.end())
      throw InvalidArgument("MomentTable: moment (" + std::to_string(m) + "," + std::to_string(n) +
                            ") not populated (max order " + std::to_string(max_order_) + ")");
    return it->second;
  }

  /// <a_dag^k a^k>, which is real.
  double diagonal(int k) const { return at(k, k).real(); }

  void require(int order, const char* who) const {
    if (order > max_order_)
      throw InvalidArgument(std::string(who) + ": needs moments up to order " + std::to_string(order) +
                            ", table holds " + std::to_string(max_order_));
  }

 private:
  int max_order_ = -1;
  Provenance provenance_ = Provenance::analytic;
  std::map<std::pair<int, int>, Moment> entries_;
};

}  // namespace fockwitness
