#pragma once

#include <Eigen/Dense>
#include <memory>

#include "fiberlab/errors.hpp"

namespace fiberlab {

// Compact fiber space K with diam(K) <= 1: either a real interval with
// d(x,y) = |x-y|, or a finite metric space whose points are addressed by
// index (atom positions then hold the index as a double).
class FiberSpace {
  public:
    enum class Kind { Interval, Finite };

    FiberSpace() = default;  // the unit interval

    static FiberSpace interval(double lo, double hi);
    static FiberSpace finite(Eigen::MatrixXd dist);

    Kind kind() const { return kind_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    double diameter() const;
    int point_count() const;  // finite spaces only

    double distance(double x, double y) const;
    bool contains(double x, double tol) const;
    const Eigen::MatrixXd& dist_matrix() const;

    friend bool operator==(const FiberSpace& a, const FiberSpace& b);

  private:
    Kind kind_ = Kind::Interval;
    double lo_ = 0.0, hi_ = 1.0;
    std::shared_ptr<const Eigen::MatrixXd> dist_;
};

}  // namespace fiberlab
