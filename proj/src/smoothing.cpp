#include "attn/smoothing.hpp"

#include "attn/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace attn::smoothing {
namespace {

void require_finite(std::span<const double> s) {
    for (double v : s) {
        if (!std::isfinite(v)) throw Error("series contains a non-finite value");
    }
}

// Row vector c such that c . window = value at offset `eval_at` (relative to
// the window centre) of the least-squares polynomial of degree `order`.
Eigen::RowVectorXd sg_weights(int window, int order, int eval_at) {
    const int half = window / 2;
    Eigen::MatrixXd a(window, order + 1);
    for (int i = 0; i < window; ++i) {
        double p = 1.0;
        for (int k = 0; k <= order; ++k) {
            a(i, k) = p;
            p *= static_cast<double>(i - half);
        }
    }
    // Coefficients = pinv(A) * y; evaluate basis at eval_at.
    const Eigen::MatrixXd pinv = a.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(window, window));
    Eigen::RowVectorXd basis(order + 1);
    double p = 1.0;
    for (int k = 0; k <= order; ++k) {
        basis(k) = p;
        p *= static_cast<double>(eval_at);
    }
    return basis * pinv;
}

}  // namespace

Series moving_average(std::span<const double> s, int window) {
    if (s.empty()) throw EmptySeries();
    if (window < 1 || window % 2 == 0) throw Error("moving average window must be odd and >= 1");
    require_finite(s);
    const auto n = static_cast<long>(s.size());
    const long half = window / 2;
    Series out(s.size());
    for (long i = 0; i < n; ++i) {
        const long lo = std::max(0L, i - half);
        const long hi = std::min(n - 1, i + half);
        double sum = 0.0;
        for (long j = lo; j <= hi; ++j) sum += s[j];
        out[i] = sum / static_cast<double>(hi - lo + 1);
    }
    return out;
}

Series savitzky_golay(std::span<const double> s, int window, int order) {
    if (window < 1 || window % 2 == 0) throw Error("Savitzky-Golay window must be odd");
    if (order < 0 || order >= window) throw Error("Savitzky-Golay order must be below the window length");
    if (s.empty()) throw EmptySeries();
    if (static_cast<long>(s.size()) < window) {
        throw SeriesTooShort("Savitzky-Golay needs at least " + std::to_string(window) + " samples");
    }
    require_finite(s);
    const int half = window / 2;
    const auto n = static_cast<int>(s.size());
    Series out(s.size());

    const Eigen::RowVectorXd centre = sg_weights(window, order, 0);
    for (int i = half; i < n - half; ++i) {
        double acc = 0.0;
        for (int j = 0; j < window; ++j) acc += centre(j) * s[i - half + j];
        out[i] = acc;
    }
    for (int i = 0; i < half; ++i) {
        const Eigen::RowVectorXd head = sg_weights(window, order, i - half);
        const Eigen::RowVectorXd tail = sg_weights(window, order, half - i);
        double a = 0.0, b = 0.0;
        for (int j = 0; j < window; ++j) {
            a += head(j) * s[j];
            b += tail(j) * s[n - window + j];
        }
        out[i] = a;
        out[n - 1 - i] = b;
    }
    return out;
}

Series kalman_1d(std::span<const double> s, double p0, double r, double q) {
    if (s.empty()) throw EmptySeries();
    require_finite(s);
    Series out(s.size());
    double x = s[0];
    double p = p0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        p += q;
        const double gain = p / (p + r);
        x += gain * (s[i] - x);
        p *= (1.0 - gain);
        out[i] = x;
    }
    return out;
}

Smoother parse_smoother(std::string_view name) {
    if (name == "none") return Smoother::none;
    if (name == "ma") return Smoother::moving_average;
    if (name == "sg") return Smoother::savitzky_golay;
    if (name == "kalman") return Smoother::kalman;
    throw InputError("unknown smoother '" + std::string(name) + "' (expected ma|sg|kalman|none)");
}

std::string_view smoother_name(Smoother s) {
    switch (s) {
        case Smoother::none: return "none";
        case Smoother::moving_average: return "ma";
        case Smoother::savitzky_golay: return "sg";
        case Smoother::kalman: return "kalman";
    }
    return "none";
}

Series apply(Smoother which, std::span<const double> s) {
    switch (which) {
        case Smoother::moving_average: return moving_average(s);
        case Smoother::savitzky_golay: return savitzky_golay(s);
        case Smoother::kalman: return kalman_1d(s);
        case Smoother::none: break;
    }
    return Series(s.begin(), s.end());
}

}  // namespace attn::smoothing
