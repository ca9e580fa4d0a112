#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace qfcusum {

// Row-major so scan loops stream observations contiguously.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Error raised by file ingestion; message carries the 1-based line number.
class ParseError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Index interval (lo, hi] in 1-based observation labels, the convention
/// used throughout: observation i lives in storage row i-1, so the interval
/// covers rows lo..hi-1. (0, t] is the first t observations, (t, n] the rest.
struct Interval {
    int lo = 0;  // exclusive
    int hi = 0;  // inclusive

    int size() const { return hi - lo; }
};

inline Interval left_of(int t) { return Interval{0, t}; }
inline Interval right_of(int t, int n) { return Interval{t, n}; }

/// Throws std::invalid_argument unless 0 <= lo < hi <= n.
void check_interval(const Interval& interval, int n);

/// Immutable regression sample: response y (length n) and covariate rows x (n x p).
class Dataset {
public:
    /// Validates n >= 2, p >= 1, matching lengths, and all entries finite.
    Dataset(Vector y, Matrix x);

    const Vector& y() const { return y_; }
    const Matrix& x() const { return x_; }
    /// Column-major mirror of x; coordinate-descent loops read contiguous
    /// column segments from it. Same values as x(), bit for bit.
    const Eigen::MatrixXd& x_by_column() const { return x_cols_; }
    int n() const { return static_cast<int>(x_.rows()); }
    int p() const { return static_cast<int>(x_.cols()); }

private:
    Vector y_;
    Matrix x_;
    Eigen::MatrixXd x_cols_;
};

struct CovarianceEstimate {
    Matrix sigma_hat;   // p x p, exactly symmetric as stored
    Interval interval;
};

/// Uncentered sample covariance (1/|I|) sum_{i in I} x_i x_i^T over the interval.
CovarianceEstimate sample_covariance(const Dataset& data, const Interval& interval);

/// Reads a CSV whose first column is the response and remaining columns the
/// covariates. Errors name the offending 1-based line (and column for bad cells).
Dataset load_csv(const std::filesystem::path& path, bool has_header);

/// Writes the dataset in the same layout load_csv expects; values round-trip
/// bit-identically. Pass a header string like "y,x1,x2" or empty for none.
void save_csv(const Dataset& data, const std::filesystem::path& path,
              const std::string& header = "");

}  // namespace qfcusum
