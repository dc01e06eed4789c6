#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "egohand/geometry.hpp"

namespace egohand {

/// Savitzky-Golay window and polynomial order. Construction validates.
class SavGolParams {
public:
    SavGolParams() : SavGolParams(9, 2) {}

    SavGolParams(int window, int polyorder) : window_(window), polyorder_(polyorder) {
        if (window < 3 || window % 2 == 0)
            throw Error(ErrorCode::InvalidParams, "window must be odd and >= 3, got " + std::to_string(window));
        if (polyorder < 0 || polyorder >= window)
            throw Error(ErrorCode::InvalidParams,
                        "polyorder must satisfy 0 <= polyorder < window, got " + std::to_string(polyorder));
    }

    int window() const { return window_; }
    int polyorder() const { return polyorder_; }
    int half() const { return (window_ - 1) / 2; }

private:
    int window_;
    int polyorder_;
};

namespace detail {

// Least-squares polynomial fit of `degree` to samples at `offsets`, evaluated at
// `at`, written as weights on the samples. Offsets are rescaled to [-1, 1] for
// conditioning; the evaluation point is rescaled with them.
inline Eigen::VectorXd poly_fit_weights(const Eigen::VectorXd& offsets, int degree, double at) {
    const Eigen::Index n = offsets.size();
    const double span = std::max(offsets.cwiseAbs().maxCoeff(), 1.0);
    Eigen::MatrixXd A(n, degree + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = offsets(i) / span;
        double p = 1.0;
        for (int k = 0; k <= degree; ++k) {
            A(i, k) = p;
            p *= x;
        }
    }
    Eigen::VectorXd basis(degree + 1);
    double p = 1.0;
    for (int k = 0; k <= degree; ++k) {
        basis(k) = p;
        p *= at / span;
    }
    // weights = A (A^T A)^-1 basis, via QR: A = QR  =>  weights = Q R^-T basis
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
    const Eigen::MatrixXd R = qr.matrixQR().topRows(degree + 1).triangularView<Eigen::Upper>();
    const Eigen::VectorXd y = R.transpose().triangularView<Eigen::Lower>().solve(basis);
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, degree + 1);
    return Q * y;
}

}  // namespace detail

/// Central smoothing weights for offsets -h..h.
inline std::vector<double> savgol_coeffs(const SavGolParams& p) {
    const int h = p.half();
    Eigen::VectorXd offsets(p.window());
    for (int i = -h; i <= h; ++i) offsets(i + h) = i;
    const Eigen::VectorXd w = detail::poly_fit_weights(offsets, p.polyorder(), 0.0);
    return {w.data(), w.data() + w.size()};
}

/// Convolves with savgol_coeffs. The series is mirror-padded through its edge
/// samples without repeating them (x[-k] = 2 x[0] - x[k]), which keeps constant
/// and linear trends intact up to the boundary. Series shorter than the window get a single global
/// polynomial fit of order min(polyorder, N - 1).
inline std::vector<double> smooth_series(const std::vector<double>& x, const SavGolParams& p) {
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    if (n == 0) return {};
    if (n < p.window()) {
        const int degree = std::min<int>(p.polyorder(), static_cast<int>(n) - 1);
        Eigen::VectorXd t(n);
        for (std::ptrdiff_t i = 0; i < n; ++i) t(i) = static_cast<double>(i);
        std::vector<double> out(x.size());
        const Eigen::Map<const Eigen::VectorXd> xv(x.data(), n);
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            // Center the offsets on the evaluation point so the fit is evaluated at 0.
            const Eigen::VectorXd w = detail::poly_fit_weights(t.array() - static_cast<double>(i), degree, 0.0);
            out[i] = x[i] + w.dot((xv.array() - x[i]).matrix());
        }
        return out;
    }

    const auto w = savgol_coeffs(p);
    const std::ptrdiff_t h = p.half();
    // Point reflection through the edge sample: x[-k] = 2 x[0] - x[k].
    auto at = [&](std::ptrdiff_t i) {
        if (i < 0) return 2.0 * x.front() - x[static_cast<std::size_t>(-i)];
        if (i >= n) return 2.0 * x.back() - x[static_cast<std::size_t>(2 * (n - 1) - i)];
        return x[static_cast<std::size_t>(i)];
    };
    std::vector<double> out(x.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        // Weights sum to one, so accumulating deviations from the center sample
        // returns constant series bit-exactly.
        const double center = x[static_cast<std::size_t>(i)];
        double acc = 0.0;
        for (std::ptrdiff_t k = -h; k <= h; ++k) acc += w[static_cast<std::size_t>(k + h)] * (at(i + k) - center);
        out[static_cast<std::size_t>(i)] = center + acc;
    }
    return out;
}

/// Smooths each of the 3*J coordinate trajectories independently.
inline Sequence smooth_skeleton_sequence(const Sequence& seq, const SavGolParams& p) {
    if (seq.empty()) return {};
    const std::size_t J = seq.front().size();
    for (const auto& s : seq)
        if (s.size() != J) throw Error(ErrorCode::JointCountMismatch, "joint count changes within sequence");

    Sequence out = seq;
    std::vector<double> series(seq.size());
    for (std::size_t j = 0; j < J; ++j) {
        for (int c = 0; c < 3; ++c) {
            for (std::size_t f = 0; f < seq.size(); ++f) series[f] = seq[f].joints[j](c);
            const auto smoothed = smooth_series(series, p);
            for (std::size_t f = 0; f < seq.size(); ++f) out[f].joints[j](c) = smoothed[f];
        }
    }
    return out;
}

}  // namespace egohand
