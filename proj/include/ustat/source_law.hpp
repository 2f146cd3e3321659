#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ustat/rng.hpp"

namespace ustat {

/// A data-generating law. Finite-discrete laws expose their support and
/// probabilities for exact enumeration; every law can be sampled. Laws are
/// immutable after construction and share freely across workers; all
/// randomness enters through the caller's stream.
class source_law {
public:
    enum class kind { finite_discrete, std_normal, uniform01, exponential1 };

    static source_law finite(std::vector<double> support, std::vector<double> probs,
                             std::string name = "finite");
    static source_law samplable(kind k);

    bool is_finite() const { return kind_ == kind::finite_discrete; }
    kind which() const { return kind_; }
    const std::string& name() const { return name_; }

    /// Finite path only; throws otherwise.
    std::span<const double> support() const;
    std::span<const double> probs() const;
    bool uniform_weights() const { return uniform_; }

    double sample(rng_stream& rng) const;

private:
    source_law() = default;
    kind kind_ = kind::finite_discrete;
    std::string name_;
    std::vector<double> support_;
    std::vector<double> probs_;
    std::vector<double> cum_;  // cumulative probabilities for inverse-CDF sampling
    bool uniform_ = false;
};

/// Registry: "rademacher", "uniform3", "stdnormal", "uniform01", "exp1".
const source_law& law_registry(std::string_view name);
std::vector<std::string> law_names();

/// An i.i.d. sample from a law, together with its provenance.
struct dataset {
    std::vector<double> values;
    const source_law* law = nullptr;
    std::uint64_t seed = 0;
};

dataset make_dataset(const source_law& law, int n, std::uint64_t seed);
dataset make_dataset(const source_law& law, int n, std::uint64_t seed, rng_stream& rng);

}  // namespace ustat
