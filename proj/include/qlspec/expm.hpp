// expm.hpp: matrix exponential by scaling and squaring with a [13/13] Pade approximant.
//
// Eigendecomposition-free, so defective or degenerate generators are handled
// without special cases. Coefficients and theta_13 follow Higham (2005).

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace qlspec {

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> expm(const Eigen::MatrixBase<Derived>& a_in) {
    using Scalar = typename Derived::Scalar;
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    const Eigen::Index n = a_in.rows();
    Mat a = a_in;
    if (n == 0) return a;

    static constexpr double b[14] = {64764752532480000.0,
                                     32382376266240000.0,
                                     7771770303897600.0,
                                     1187353796428800.0,
                                     129060195264000.0,
                                     10559470521600.0,
                                     670442572800.0,
                                     33522128640.0,
                                     1323241920.0,
                                     40840800.0,
                                     960960.0,
                                     16380.0,
                                     182.0,
                                     1.0};
    constexpr double theta13 = 5.371920351148152;

    const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm1 > theta13) {
        squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / theta13))));
        a /= static_cast<double>(std::ldexp(1.0, squarings));
    }

    const Mat id = Mat::Identity(n, n);
    const Mat a2 = a * a;
    const Mat a4 = a2 * a2;
    const Mat a6 = a4 * a2;

    const Mat u_inner = b[13] * a6 + b[11] * a4 + b[9] * a2;
    const Mat u = a * (a6 * u_inner + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
    const Mat v_inner = b[12] * a6 + b[10] * a4 + b[8] * a2;
    const Mat v = a6 * v_inner + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;

    Mat r = (v - u).partialPivLu().solve(v + u);
    for (int k = 0; k < squarings; ++k) r = r * r;
    return r;
}

// Returns {exp(M h), integral_0^h exp(M s) ds} from one exponential of the
// augmented block matrix [[M, I], [0, 0]] h.
template <typename Derived>
std::pair<Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>,
          Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>>
expm_with_integral(const Eigen::MatrixBase<Derived>& m, double h) {
    using Scalar = typename Derived::Scalar;
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const Eigen::Index n = m.rows();
    Mat aug = Mat::Zero(2 * n, 2 * n);
    aug.topLeftCorner(n, n) = m * h;
    aug.topRightCorner(n, n) = Mat::Identity(n, n) * h;
    const Mat e = expm(aug);
    return {e.topLeftCorner(n, n), e.topRightCorner(n, n)};
}

}  // namespace qlspec
