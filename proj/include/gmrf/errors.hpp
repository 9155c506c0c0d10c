#pragma once

#include <stdexcept>
#include <string>

namespace gmrf {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotPositiveDefinite : Error {
  explicit NotPositiveDefinite(const std::string& what = "matrix is not positive definite")
      : Error(what) {}
};

struct SingularUpdate : Error {
  explicit SingularUpdate(const std::string& what = "rank-1 update denominator near zero")
      : Error(what) {}
};

struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& what = "dimension mismatch") : Error(what) {}
};

struct InvalidParameter : Error {
  using Error::Error;
};

struct NonConvergence : Error {
  using Error::Error;
};

struct NoCandidates : Error {
  explicit NoCandidates(const std::string& what = "no candidate coordinates left") : Error(what) {}
};

struct EmptySupport : Error {
  explicit EmptySupport(const std::string& what = "support is empty") : Error(what) {}
};

struct ZeroColumn : Error {
  explicit ZeroColumn(const std::string& what = "feature column has (near) zero norm") : Error(what) {}
};

struct RankDeficient : Error {
  explicit RankDeficient(const std::string& what = "active design is rank deficient") : Error(what) {}
};

struct CombinatorialBlowup : Error {
  explicit CombinatorialBlowup(const std::string& what = "too many subsets to enumerate") : Error(what) {}
};

struct DimensionTooLarge : Error {
  explicit DimensionTooLarge(const std::string& what = "dimension too large for dense p^2 x p^2 work")
      : Error(what) {}
};

struct IOFailure : Error {
  using Error::Error;
};

}  // namespace gmrf
