#ifndef LOGNPCE_SUMMATION_HPP
#define LOGNPCE_SUMMATION_HPP

#include <cmath>

namespace lognpce {

/// Compensated (Neumaier) accumulator. Deterministic for a fixed order of add() calls.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    // Folds another accumulator in; used for fixed-order chunk merges.
    void merge(const CompensatedSum& other) {
        add(other.sum_);
        add(other.comp_);
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

} // namespace lognpce

#endif
