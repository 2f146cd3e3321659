#include "ustat/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>

namespace ustat {

namespace {

double product_fn(const double* a, int m) {
    if (m == 2) return a[0] * a[1];
    // multiply in sorted order so evaluation is permutation-invariant bit for bit
    double buf[32];
    for (int i = 0; i < m; ++i) buf[i] = a[i];
    std::sort(buf, buf + m);
    double prod = 1.0;
    for (int i = 0; i < m; ++i) prod *= buf[i];
    return prod;
}

double sample_variance_fn(const double* a, int) {
    const double d = a[0] - a[1];
    return 0.5 * d * d;
}

double mean_pow3_fn(const double* a, int) {
    const double s = a[0] + a[1];
    return s * s * s;
}

double kendall_sign_fn(const double* a, int) {
    float x1, y1, x2, y2;
    unpack_pair(a[0], x1, y1);
    unpack_pair(a[1], x2, y2);
    const double c = (static_cast<double>(x1) - x2) * (static_cast<double>(y1) - y2);
    return c > 0 ? 1.0 : (c < 0 ? -1.0 : 0.0);
}

}  // namespace

double pack_pair(float x, float y) {
    std::uint64_t bits = 0;
    std::uint32_t xb, yb;
    std::memcpy(&xb, &x, 4);
    std::memcpy(&yb, &y, 4);
    bits = (static_cast<std::uint64_t>(xb) << 32) | yb;
    double packed;
    std::memcpy(&packed, &bits, 8);
    return packed;
}

void unpack_pair(double packed, float& x, float& y) {
    std::uint64_t bits;
    std::memcpy(&bits, &packed, 8);
    const std::uint32_t xb = static_cast<std::uint32_t>(bits >> 32);
    const std::uint32_t yb = static_cast<std::uint32_t>(bits);
    std::memcpy(&x, &xb, 4);
    std::memcpy(&y, &yb, 4);
}

kernel center_kernel(kernel k, double mu) {
    k.offset += mu;
    k.name += "_centered";
    return k;
}

kernel kernel_registry(std::string_view name, int degree) {
    if (degree < 2) throw std::invalid_argument("kernel degree must be >= 2");
    kernel k;
    k.degree = degree;
    k.name = std::string(name);
    if (name == "product") {
        k.fn = product_fn;
        return k;
    }
    if (degree != 2)
        throw std::invalid_argument("kernel '" + std::string(name) + "' has fixed degree 2");
    if (name == "sample_variance") {
        k.fn = sample_variance_fn;
    } else if (name == "mean_pow3") {
        k.fn = mean_pow3_fn;
    } else if (name == "kendall_sign") {
        k.fn = kendall_sign_fn;
    } else {
        throw std::invalid_argument("unknown kernel: " + std::string(name));
    }
    return k;
}

std::vector<std::string> kernel_names() {
    return {"product", "sample_variance", "kendall_sign", "mean_pow3"};
}

}  // namespace ustat
