#pragma once

// Observed consumption data: single-consumer panels, repeated cross-sections,
// and observed cost matrices for nonlinear price systems.

#include <Eigen/Dense>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace revpref {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// T observations of (prices, bundle) for one consumer. Rows of prices() and
/// bundles() are observations.
class DeterministicDataset {
 public:
  DeterministicDataset() = default;
  /// Validates: T, L >= 1; prices > 0; bundles >= 0; every expenditure > 0.
  DeterministicDataset(Mat prices, Mat bundles, std::vector<std::string> labels = {});

  int size() const { return static_cast<int>(prices_.rows()); }
  int goods() const { return static_cast<int>(prices_.cols()); }

  const Mat& prices() const { return prices_; }
  const Mat& bundles() const { return bundles_; }
  Vec price(int t) const { return prices_.row(t).transpose(); }
  Vec bundle(int t) const { return bundles_.row(t).transpose(); }
  double expenditure(int t) const { return prices_.row(t).dot(bundles_.row(t)); }

  /// E(a, b) = p^a . x^b
  Mat cross_expenditure() const { return prices_ * bundles_.transpose(); }

  const std::vector<std::string>& labels() const { return labels_; }

 private:
  Mat prices_;
  Mat bundles_;
  std::vector<std::string> labels_;
};

struct Period {
  std::string id;
  Vec prices;
  Mat choices;  // N_t x L
  std::vector<std::string> households;

  int sample_size() const { return static_cast<int>(choices.rows()); }
};

/// T independent cross-sections of household choices at known prices.
class StochasticDataset {
 public:
  StochasticDataset() = default;
  explicit StochasticDataset(std::vector<Period> periods);

  int size() const { return static_cast<int>(periods_.size()); }
  int goods() const { return periods_.empty() ? 0 : static_cast<int>(periods_.front().prices.size()); }
  const Period& period(int t) const { return periods_[t]; }
  const std::vector<Period>& periods() const { return periods_; }
  int total_sample_size() const;

  /// Prices stacked as a T x L matrix.
  Mat price_matrix() const;

 private:
  std::vector<Period> periods_;
};

/// costs(t, s) = psi^t(x^s): the cost of bundle s under price system t.
class CostMatrix {
 public:
  explicit CostMatrix(Mat costs);
  static CostMatrix from_linear(const DeterministicDataset& data);

  int size() const { return static_cast<int>(costs_.rows()); }
  const Mat& costs() const { return costs_; }

 private:
  Mat costs_;
};

DeterministicDataset load_deterministic(const std::filesystem::path& path);
DeterministicDataset parse_deterministic(std::istream& in);
void write_deterministic(std::ostream& out, const DeterministicDataset& data);

/// Price file: a `period` column and p1..pL.
struct PriceTable {
  std::vector<std::string> ids;
  Mat prices;  // T x L
};

PriceTable load_prices(const std::filesystem::path& path);
PriceTable parse_prices(std::istream& in);

StochasticDataset load_stochastic(const std::filesystem::path& choices,
                                  const std::filesystem::path& prices);
StochasticDataset parse_stochastic(std::istream& choices, std::istream& prices);
void write_stochastic(std::ostream& choices, std::ostream& prices, const StochasticDataset& data);

}  // namespace revpref
