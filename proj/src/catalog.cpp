#include "fiberlab/catalog.hpp"

namespace fiberlab::catalog {

namespace {

Eigen::VectorXd halves() {
    Eigen::VectorXd a(2);
    a << 0.5, 0.5;
    return a;
}

Eigen::VectorXd shifts() {
    Eigen::VectorXd b(2);
    b << 0.0, 0.5;
    return b;
}

}  // namespace

FiberSystem dyadic() {
    Eigen::MatrixXi A = Eigen::MatrixXi::Ones(2, 2);
    Eigen::MatrixXd P = Eigen::MatrixXd::Constant(2, 2, 0.5);
    auto base = make_subshift(A, P, 0.5);
    return make_first_symbol_affine(std::move(base), FiberSpace::interval(0.0, 1.0), halves(),
                                    shifts());
}

FiberSystem sequence_affine() {
    Eigen::MatrixXi A = Eigen::MatrixXi::Ones(2, 2);
    Eigen::MatrixXd P = Eigen::MatrixXd::Constant(2, 2, 0.5);
    auto base = make_subshift(A, P, 0.5);
    return make_sequence_affine(std::move(base), FiberSpace::interval(0.0, 1.0), 0.5, 0.5);
}

FiberSystem markov_affine() {
    Eigen::MatrixXi A = Eigen::MatrixXi::Ones(2, 2);
    Eigen::MatrixXd P(2, 2);
    P << 0.7, 0.3, 0.4, 0.6;
    auto base = make_subshift(A, P, 0.5);
    return make_first_symbol_affine(std::move(base), FiberSpace::interval(0.0, 1.0), halves(),
                                    shifts());
}

FiberSystem golden_affine() {
    Eigen::MatrixXi A(2, 2);
    A << 1, 1, 1, 0;
    Eigen::MatrixXd P(2, 2);
    P << 0.5, 0.5, 1.0, 0.0;
    auto base = make_subshift(A, P, 0.5);
    return make_first_symbol_affine(std::move(base), FiberSpace::interval(0.0, 1.0), halves(),
                                    shifts());
}

std::vector<NamedSystem> all_systems() {
    std::vector<NamedSystem> out;
    out.push_back({"dyadic", dyadic()});
    out.push_back({"seqaff", sequence_affine()});
    out.push_back({"markov", markov_affine()});
    out.push_back({"golden", golden_affine()});
    return out;
}

}  // namespace fiberlab::catalog
