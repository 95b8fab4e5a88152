#pragma once

#include <cstddef>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace darkpool {

/// A number of shares (units). Always nonnegative.
using Volume = std::size_t;

/// One (submitted, consumed) report from one venue at one step.
///
/// consumed = min(submitted, latent liquidity), so consumed == submitted > 0
/// only tells us the liquidity was at least `submitted` (censored), while
/// consumed < submitted reveals the liquidity exactly (direct).
struct CensoredSample {
  Volume submitted = 0;
  Volume consumed = 0;

  bool censored() const noexcept { return consumed == submitted && submitted > 0; }
  bool direct() const noexcept { return consumed < submitted; }

  /// Throws std::domain_error when consumed > submitted.
  void validate() const {
    if (consumed > submitted) {
      throw std::domain_error("consumed volume " + std::to_string(consumed) +
                              " exceeds submitted volume " + std::to_string(submitted));
    }
  }

  friend bool operator==(const CensoredSample&, const CensoredSample&) = default;
};

/// Tail probabilities T(s) = P(liquidity >= s), indexed s = 0..size()-1.
///
/// Estimates produced by the optimistic Kaplan-Meier routine also carry the
/// cutoff volume at which the optimistic modification was applied.
struct TailCurve {
  std::vector<double> t;
  std::optional<Volume> cutoff;

  /// T(s); zero past the stored range.
  double at(Volume s) const noexcept { return s < t.size() ? t[s] : 0.0; }
  std::size_t size() const noexcept { return t.size(); }

  /// Copy padded with zeros so that indices 0..length-1 are stored.
  TailCurve padded(std::size_t length) const {
    TailCurve out = *this;
    if (out.t.size() < length) out.t.resize(length, 0.0);
    return out;
  }

  friend bool operator==(const TailCurve&, const TailCurve&) = default;
};

/// Split of `total` units across K venues.
struct Allocation {
  std::vector<Volume> v;
  Volume total = 0;

  Allocation() = default;
  explicit Allocation(std::vector<Volume> parts)
      : v(std::move(parts)), total(std::accumulate(v.begin(), v.end(), Volume{0})) {}

  std::size_t venues() const noexcept { return v.size(); }
  Volume operator[](std::size_t i) const { return v[i]; }

  friend bool operator==(const Allocation&, const Allocation&) = default;
};

/// Raised when an estimator is asked to fit data that carries no information.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an operation is not defined for the receiver's kind.
class UnsupportedOperationError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace darkpool
