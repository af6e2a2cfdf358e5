#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace gaugeqm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Chart point; the dimension is carried at runtime.
using Point = Vec;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

/// Rank-3 array stored as N matrices: t[a](mu, nu).
using Rank3 = std::vector<Mat>;

/// Rank-4 array stored flat with index ((i*N + j)*N + k)*N + l.
class Rank4 {
public:
    Rank4() = default;
    explicit Rank4(int n) : n_(n), data_(static_cast<std::size_t>(n) * n * n * n, 0.0) {}

    int dim() const { return n_; }
    double& operator()(int i, int j, int k, int l) { return data_[index(i, j, k, l)]; }
    double operator()(int i, int j, int k, int l) const { return data_[index(i, j, k, l)]; }

private:
    std::size_t index(int i, int j, int k, int l) const {
        return ((static_cast<std::size_t>(i) * n_ + j) * n_ + k) * n_ + l;
    }
    int n_ = 0;
    std::vector<double> data_;
};

inline Rank3 make_rank3(int n) { return Rank3(static_cast<std::size_t>(n), Mat::Zero(n, n)); }

inline Vec unit(int n, int i) {
    Vec e = Vec::Zero(n);
    e(i) = 1.0;
    return e;
}

} // namespace gaugeqm
