#pragma once

#include <initializer_list>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace softdtw {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// A p x n real matrix; column i is the observation at time step i.
class TimeSeries {
public:
    TimeSeries() = default;

    explicit TimeSeries(Matrix values) : values_(std::move(values)) { validate(); }

    // Univariate series from samples.
    TimeSeries(std::initializer_list<double> samples)
        : TimeSeries(std::vector<double>(samples)) {}

    explicit TimeSeries(const std::vector<double>& samples)
        : values_(1, static_cast<Eigen::Index>(samples.size())) {
        for (std::size_t i = 0; i < samples.size(); ++i)
            values_(0, static_cast<Eigen::Index>(i)) = samples[i];
        validate();
    }

    static TimeSeries constant(Eigen::Index dims, Eigen::Index length, double value) {
        return TimeSeries(Matrix::Constant(dims, length, value));
    }

    Eigen::Index dims() const { return values_.rows(); }
    Eigen::Index length() const { return values_.cols(); }
    bool empty() const { return values_.size() == 0; }

    const Matrix& values() const { return values_; }
    auto step(Eigen::Index i) const { return values_.col(i); }

    // Columns [first, first + count).
    TimeSeries segment(Eigen::Index first, Eigen::Index count) const {
        return TimeSeries(Matrix(values_.middleCols(first, count)));
    }

    friend bool operator==(const TimeSeries& a, const TimeSeries& b) {
        return a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
               a.values_ == b.values_;
    }

private:
    void validate() const {
        if (values_.rows() < 1 || values_.cols() < 1)
            throw std::domain_error("time series needs at least one dimension and one time step");
        if (!values_.allFinite())
            throw std::domain_error("time series contains non-finite values");
    }

    Matrix values_;
};

}  // namespace softdtw
