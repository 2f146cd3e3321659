#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ustat {

/// A symmetric kernel of degree m. `fn` is the raw evaluation; `offset` is
/// subtracted from every value, so centering costs nothing per call and the
/// kernel stays a plain value type (capture-free function pointer).
struct kernel {
    int degree = 0;
    std::string name;
    double (*fn)(const double* args, int m) = nullptr;
    double offset = 0.0;

    double operator()(std::span<const double> args) const {
        return fn(args.data(), degree) - offset;
    }
    double eval_ptr(const double* args) const { return fn(args, degree) - offset; }
};

/// Returns a kernel evaluating k(...) - mu, name suffixed "_centered".
kernel center_kernel(kernel k, double mu);

/// Registry names: "product" (any degree >= 2), "sample_variance",
/// "kendall_sign", "mean_pow3" (degree 2 each).
kernel kernel_registry(std::string_view name, int degree);
std::vector<std::string> kernel_names();

/// kendall_sign operates on paired observations packed one pair per double:
/// the two float halves of the bit pattern carry the coordinates.
double pack_pair(float x, float y);
void unpack_pair(double packed, float& x, float& y);

}  // namespace ustat
