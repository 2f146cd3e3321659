#include "ustat/source_law.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace ustat {

source_law source_law::finite(std::vector<double> support, std::vector<double> probs,
                              std::string name) {
    if (support.size() < 2) throw std::invalid_argument("finite law: support size must be >= 2");
    if (support.size() != probs.size())
        throw std::invalid_argument("finite law: support/probs size mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
        if (!(probs[i] > 0.0)) throw std::invalid_argument("finite law: probs must be positive");
        if (i > 0 && !(support[i] > support[i - 1]))
            throw std::invalid_argument("finite law: support must be strictly increasing");
        total += probs[i];
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("finite law: probs must sum to 1 within 1e-12");

    source_law law;
    law.kind_ = kind::finite_discrete;
    law.name_ = std::move(name);
    law.support_ = std::move(support);
    law.probs_ = std::move(probs);
    law.uniform_ = true;
    for (const double p : law.probs_)
        if (std::abs(p - law.probs_[0]) > 1e-15) law.uniform_ = false;
    law.cum_.resize(law.probs_.size());
    double run = 0.0;
    for (std::size_t i = 0; i < law.probs_.size(); ++i) {
        run += law.probs_[i];
        law.cum_[i] = run;
    }
    law.cum_.back() = 1.0;
    return law;
}

source_law source_law::samplable(kind k) {
    source_law law;
    law.kind_ = k;
    switch (k) {
        case kind::std_normal: law.name_ = "stdnormal"; break;
        case kind::uniform01: law.name_ = "uniform01"; break;
        case kind::exponential1: law.name_ = "exp1"; break;
        case kind::finite_discrete:
            throw std::invalid_argument("samplable: use source_law::finite");
    }
    return law;
}

std::span<const double> source_law::support() const {
    if (!is_finite()) throw std::logic_error("support(): law is not finite-discrete");
    return support_;
}

std::span<const double> source_law::probs() const {
    if (!is_finite()) throw std::logic_error("probs(): law is not finite-discrete");
    return probs_;
}

double source_law::sample(rng_stream& rng) const {
    switch (kind_) {
        case kind::std_normal: return rng.normal();
        case kind::uniform01: return rng.next_unit();
        case kind::exponential1: return rng.exponential();
        case kind::finite_discrete: break;
    }
    if (uniform_) return support_[rng.bounded(support_.size())];
    const double u = rng.next_unit();
    for (std::size_t i = 0; i < cum_.size(); ++i)
        if (u < cum_[i]) return support_[i];
    return support_.back();
}

const source_law& law_registry(std::string_view name) {
    static const std::map<std::string, source_law, std::less<>> registry = [] {
        std::map<std::string, source_law, std::less<>> r;
        r.emplace("rademacher", source_law::finite({-1.0, 1.0}, {0.5, 0.5}, "rademacher"));
        r.emplace("uniform3",
                  source_law::finite({0.0, 1.0, 2.0}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, "uniform3"));
        r.emplace("stdnormal", source_law::samplable(source_law::kind::std_normal));
        r.emplace("uniform01", source_law::samplable(source_law::kind::uniform01));
        r.emplace("exp1", source_law::samplable(source_law::kind::exponential1));
        return r;
    }();
    const auto it = registry.find(name);
    if (it == registry.end()) throw std::invalid_argument("unknown law: " + std::string(name));
    return it->second;
}

std::vector<std::string> law_names() {
    return {"rademacher", "uniform3", "stdnormal", "uniform01", "exp1"};
}

dataset make_dataset(const source_law& law, int n, std::uint64_t seed, rng_stream& rng) {
    if (n <= 0) throw std::invalid_argument("make_dataset: n must be positive");
    dataset ds;
    ds.law = &law;
    ds.seed = seed;
    ds.values.resize(static_cast<std::size_t>(n));
    for (auto& v : ds.values) v = law.sample(rng);
    return ds;
}

dataset make_dataset(const source_law& law, int n, std::uint64_t seed) {
    rng_stream rng(seed, 0, 0);
    return make_dataset(law, n, seed, rng);
}

}  // namespace ustat
