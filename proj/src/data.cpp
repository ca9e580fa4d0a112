#include "qfcusum/data.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <utility>
#include <vector>

namespace qfcusum {

void check_interval(const Interval& interval, int n) {
    if (interval.lo < 0 || interval.lo >= interval.hi || interval.hi > n) {
        throw std::invalid_argument("interval (" + std::to_string(interval.lo) + ", " +
                                    std::to_string(interval.hi) + "] is not within (0, " +
                                    std::to_string(n) + "]");
    }
}

Dataset::Dataset(Vector y, Matrix x) : y_(std::move(y)), x_(std::move(x)) {
    if (x_.rows() < 2) throw std::invalid_argument("dataset needs at least 2 observations");
    if (x_.cols() < 1) throw std::invalid_argument("dataset needs at least 1 covariate");
    if (y_.size() != x_.rows())
        throw std::invalid_argument("response length " + std::to_string(y_.size()) +
                                    " does not match covariate rows " +
                                    std::to_string(x_.rows()));
    if (!y_.allFinite() || !x_.allFinite())
        throw std::invalid_argument("dataset contains non-finite entries");
    x_cols_ = x_;
}

CovarianceEstimate sample_covariance(const Dataset& data, const Interval& interval) {
    check_interval(interval, data.n());
    const int m = interval.size();
    const auto block = data.x().middleRows(interval.lo, m);
    Matrix sigma = block.transpose() * block / static_cast<double>(m);
    // Mirror the lower triangle so the stored matrix is exactly symmetric.
    for (int i = 0; i < sigma.rows(); ++i)
        for (int j = 0; j < i; ++j) sigma(j, i) = sigma(i, j);
    return CovarianceEstimate{std::move(sigma), interval};
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

double parse_cell(std::string_view cell, std::size_t line_no, std::size_t col_no) {
    cell = trim(cell);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw ParseError("line " + std::to_string(line_no) + ", column " +
                         std::to_string(col_no) + ": cannot parse '" + std::string(cell) +
                         "' as a number");
    }
    return value;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, bool has_header) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path.string());

    std::vector<std::vector<double>> rows;
    std::size_t expected_cols = 0;
    std::string line;
    std::size_t line_no = 0;
    bool skipped_header = !has_header;

    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = trim(line);
        if (view.empty()) continue;
        if (!skipped_header) {
            skipped_header = true;
            continue;
        }
        const auto fields = split_fields(view);
        if (expected_cols == 0) {
            expected_cols = fields.size();
            if (expected_cols < 2)
                throw ParseError("line " + std::to_string(line_no) +
                                 ": need at least 2 columns (response + covariates)");
        } else if (fields.size() != expected_cols) {
            throw ParseError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(expected_cols) + " columns, got " +
                             std::to_string(fields.size()));
        }
        std::vector<double> row(fields.size());
        for (std::size_t j = 0; j < fields.size(); ++j)
            row[j] = parse_cell(fields[j], line_no, j + 1);
        rows.push_back(std::move(row));
    }

    if (rows.size() < 2)
        throw ParseError("file " + path.string() + " has " + std::to_string(rows.size()) +
                         " data rows; need at least 2");

    const int n = static_cast<int>(rows.size());
    const int p = static_cast<int>(expected_cols) - 1;
    Vector y(n);
    Matrix x(n, p);
    for (int i = 0; i < n; ++i) {
        y[i] = rows[i][0];
        for (int j = 0; j < p; ++j) x(i, j) = rows[i][j + 1];
    }
    return Dataset(std::move(y), std::move(x));
}

void save_csv(const Dataset& data, const std::filesystem::path& path,
              const std::string& header) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
    if (!header.empty()) out << header << '\n';
    char buf[40];
    for (int i = 0; i < data.n(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", data.y()[i]);
        out << buf;
        for (int j = 0; j < data.p(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", data.x()(i, j));
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace qfcusum
