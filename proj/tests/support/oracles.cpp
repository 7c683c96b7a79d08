#include "oracles.hpp"

#include <array>
#include <cmath>

namespace destrike::testing {

int brute_force_otsu(const GrayImage& img) {
    // Binning mirrors the documented 256 uniform bins on [0, 1].
    std::array<__int128, 256> hist{};
    for (float p : img.pixels()) {
        int bin = p <= 0.0f ? 0 : (p >= 1.0f ? 255 : static_cast<int>(std::floor(static_cast<double>(p) * 256.0)));
        hist[static_cast<std::size_t>(bin)] += 1;
    }
    // sigma_b^2 * W^2 = (S0*W1 - S1*W0)^2 / (W0*W1), kept as num/den.
    __int128 best_num = 0;
    __int128 best_den = 1;
    int best = -1;
    for (int t = 0; t < 255; ++t) {
        __int128 w0 = 0, w1 = 0, s0 = 0, s1 = 0;
        for (int i = 0; i < 256; ++i) {
            const __int128 h = hist[static_cast<std::size_t>(i)];
            if (i <= t) {
                w0 += h;
                s0 += h * i;
            } else {
                w1 += h;
                s1 += h * i;
            }
        }
        if (w0 == 0 || w1 == 0) continue;
        const __int128 d = s0 * w1 - s1 * w0;
        const __int128 num = d * d;
        const __int128 den = w0 * w1;
        if (num * best_den > best_num * den) {
            best_num = num;
            best_den = den;
            best = t;
        }
    }
    return best;
}

MaskScores brute_force_scores(const BinaryImage& pred, const BinaryImage& truth) {
    double n = 0, m = 0, o = 0;
    for (int r = 0; r < truth.height(); ++r) {
        for (int c = 0; c < truth.width(); ++c) {
            n += truth.at(r, c);
            m += pred.at(r, c);
            o += truth.at(r, c) && pred.at(r, c);
        }
    }
    if (n == 0 && m == 0) return {1, 1, 1};
    const double dr = n == 0 ? 0 : o / n;
    const double ra = m == 0 ? 0 : o / m;
    return {dr, ra, dr + ra == 0 ? 0 : 2 * dr * ra / (dr + ra)};
}

double reference_mean(std::span<const double> xs) {
    long double s = 0;
    for (double x : xs) s += x;
    return static_cast<double>(s / static_cast<long double>(xs.size()));
}

double reference_std(std::span<const double> xs) {
    const long double mu = reference_mean(xs);
    long double s = 0;
    for (double x : xs) s += (x - mu) * (x - mu);
    return static_cast<double>(std::sqrt(s / static_cast<long double>(xs.size())));
}

}  // namespace destrike::testing
