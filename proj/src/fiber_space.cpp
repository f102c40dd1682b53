#include "fiberlab/fiber_space.hpp"

#include <cmath>

namespace fiberlab {

FiberSpace FiberSpace::interval(double lo, double hi) {
    if (!(hi > lo)) throw InvalidInput("FiberSpace: interval must have hi > lo");
    if (hi - lo > 1.0 + 1e-12)
        throw InvalidInput("FiberSpace: diameter must be <= 1 (the diam(K)=1 normalization)");
    FiberSpace s;
    s.kind_ = Kind::Interval;
    s.lo_ = lo;
    s.hi_ = hi;
    return s;
}

FiberSpace FiberSpace::finite(Eigen::MatrixXd dist) {
    const int n = static_cast<int>(dist.rows());
    if (n < 1 || dist.cols() != n) throw InvalidInput("FiberSpace: distance matrix must be square");
    for (int i = 0; i < n; ++i) {
        if (dist(i, i) != 0.0) throw InvalidInput("FiberSpace: distance matrix diagonal must be 0");
        for (int j = 0; j < n; ++j) {
            if (dist(i, j) < 0.0) throw InvalidInput("FiberSpace: distances must be nonnegative");
            if (std::abs(dist(i, j) - dist(j, i)) > 1e-12)
                throw InvalidInput("FiberSpace: distance matrix must be symmetric");
            if (dist(i, j) > 1.0 + 1e-12)
                throw InvalidInput("FiberSpace: diameter must be <= 1");
            for (int k = 0; k < n; ++k)
                if (dist(i, j) > dist(i, k) + dist(k, j) + 1e-12)
                    throw InvalidInput("FiberSpace: triangle inequality violated");
        }
    }
    FiberSpace s;
    s.kind_ = Kind::Finite;
    s.lo_ = 0.0;
    s.hi_ = static_cast<double>(n - 1);
    s.dist_ = std::make_shared<const Eigen::MatrixXd>(std::move(dist));
    return s;
}

double FiberSpace::diameter() const {
    if (kind_ == Kind::Interval) return hi_ - lo_;
    return dist_->maxCoeff();
}

int FiberSpace::point_count() const {
    if (kind_ != Kind::Finite) throw InvalidInput("FiberSpace: point_count on interval space");
    return static_cast<int>(dist_->rows());
}

double FiberSpace::distance(double x, double y) const {
    if (kind_ == Kind::Interval) return std::abs(x - y);
    const auto i = static_cast<Eigen::Index>(std::lround(x));
    const auto j = static_cast<Eigen::Index>(std::lround(y));
    return (*dist_)(i, j);
}

bool FiberSpace::contains(double x, double tol) const {
    if (kind_ == Kind::Interval) return x >= lo_ - tol && x <= hi_ + tol;
    const double r = std::nearbyint(x);
    return std::abs(x - r) <= tol && r >= 0.0 && r < static_cast<double>(dist_->rows());
}

const Eigen::MatrixXd& FiberSpace::dist_matrix() const {
    if (kind_ != Kind::Finite) throw InvalidInput("FiberSpace: dist_matrix on interval space");
    return *dist_;
}

bool operator==(const FiberSpace& a, const FiberSpace& b) {
    if (a.kind_ != b.kind_) return false;
    if (a.kind_ == FiberSpace::Kind::Interval) return a.lo_ == b.lo_ && a.hi_ == b.hi_;
    return a.dist_ == b.dist_ || *a.dist_ == *b.dist_;
}

}  // namespace fiberlab
