// ustat command-line front end: estimate / bounds / simulate / rate / check.
// Every run echoes its resolved configuration as a leading CSV comment and
// prints numbers with 17 significant digits.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ustat/bounds.hpp"
#include "ustat/combinatorics.hpp"
#include "ustat/estimators.hpp"
#include "ustat/montecarlo.hpp"
#include "ustat/numeric.hpp"
#include "ustat/stein.hpp"

namespace {

constexpr const char* kVersion = "ustat 1.0.0";

struct output_sink {
    std::string path;
    std::ofstream file;
    std::ostream& stream() {
        if (path.empty()) return std::cout;
        if (!file.is_open()) {
            file.open(path);
            if (!file) throw std::runtime_error("cannot open output file: " + path);
        }
        return file;
    }
};

std::vector<double> read_csv_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open data file: " + path);
    std::vector<double> values;
    std::string tok;
    while (std::getline(in, tok)) {
        std::stringstream line(tok);
        std::string cell;
        while (std::getline(line, cell, ',')) {
            if (cell.empty() || cell[0] == '#') continue;
            values.push_back(std::stod(cell));
        }
    }
    return values;
}

// Centering constant: explicit --mu wins; exact mean for finite laws;
// Monte Carlo mean otherwise.
double resolve_mu(const ustat::kernel& k, const ustat::source_law& law, double mu_flag,
                  bool mu_set, std::uint64_t seed) {
    if (mu_set) return mu_flag;
    if (law.is_finite()) return ustat::exact_moments(k, law).mean_h;
    ustat::mc_options opt;
    opt.reps = 200'000;
    opt.seed = seed ^ 0x6d75u;  // decorrelate from the data stream
    return ustat::mc_moments(k, law, opt).mean_h;
}

ustat::moment_profile resolve_profile(const ustat::kernel& k, const ustat::source_law& law,
                                      std::uint64_t seed, std::uint64_t mc_reps) {
    if (law.is_finite()) return ustat::exact_moments(k, law);
    ustat::mc_options opt;
    opt.reps = mc_reps;
    opt.seed = seed ^ 0x70726f66u;
    return ustat::mc_moments(k, law, opt);
}

int run_estimate(output_sink& out, const std::string& law_name, const std::string& data_path,
                 const std::string& kernel_name, int n, int m, std::uint64_t N,
                 std::uint64_t seed, double mu_flag, bool mu_set) {
    const ustat::kernel k = ustat::kernel_registry(kernel_name, m);
    ustat::dataset data;
    const ustat::source_law* law = nullptr;
    if (!data_path.empty()) {
        data.values = read_csv_values(data_path);
        data.seed = 0;
        if (!mu_set) throw CLI::ValidationError("--data requires --mu for centering");
    } else {
        law = &ustat::law_registry(law_name);
        data = ustat::make_dataset(*law, n, seed);
    }
    const double mu = law ? resolve_mu(k, *law, mu_flag, mu_set, seed) : mu_flag;
    const auto design =
        ustat::make_design(static_cast<int>(data.values.size()), m, N, seed);
    ustat::rng_stream design_rng(seed, 0, 1);
    const auto sd = ustat::sample_design(design, design_rng);
    const auto bundle = ustat::incomplete_u(data, k, sd, mu);

    auto& os = out.stream();
    os << "# config: subcommand=estimate law=" << (law ? law->name() : "csv:" + data_path)
       << " kernel=" << kernel_name << " n=" << data.values.size() << " m=" << m << " N=" << N
       << " seed=" << seed << " mu=" << ustat::fmt17(mu) << "\n";
    os << "u_complete,u_incomplete,u_incomplete_det,b_n,u_h2,u_abs_h3,n_hat,p\n";
    os << ustat::fmt17(bundle.u_complete) << ',' << ustat::fmt17(bundle.u_incomplete) << ','
       << ustat::fmt17(bundle.u_incomplete_det) << ',' << ustat::fmt17(bundle.b_n) << ','
       << ustat::fmt17(bundle.u_h2) << ',' << ustat::fmt17(bundle.u_abs_h3) << ','
       << bundle.n_hat << ',' << ustat::fmt17(bundle.p) << "\n";
    return 0;
}

int run_bounds(output_sink& out, const std::string& regime_str, const std::string& law_name,
               const std::string& kernel_name, int n, int m, std::uint64_t N, bool fourth,
               std::uint64_t seed, std::uint64_t mc_reps) {
    const auto regime = ustat::parse_regime(regime_str);
    const ustat::kernel k = ustat::kernel_registry(kernel_name, m);
    const ustat::source_law& law = ustat::law_registry(law_name);

    auto& os = out.stream();
    os << "# config: subcommand=bounds regime=" << regime_str << " law=" << law_name
       << " kernel=" << kernel_name << " n=" << n << " m=" << m << " N=" << N
       << " fourth_moment=" << (fourth ? 1 : 0) << " seed=" << seed << "\n";
    os << "term,value\n";

    if (regime == ustat::bound_regime::conditional_explicit) {
        const double mu = resolve_mu(k, law, 0.0, false, seed);
        const auto data = ustat::make_dataset(law, n, seed);
        const auto design = ustat::make_design(n, m, N, seed);
        ustat::rng_stream design_rng(seed, 0, 1);
        const auto sd = ustat::sample_design(design, design_rng);
        const auto bundle = ustat::incomplete_u(data, k, sd, mu);
        const double value = ustat::explicit_conditional_bound(bundle, N, design.p);
        os << "conditional_0.56," << ustat::fmt17(value) << "\n";
        os << "total," << ustat::fmt17(value) << "\n";
        return 0;
    }

    const auto prof = resolve_profile(k, law, seed, mc_reps);
    ustat::bound_report rep;
    if (regime == ustat::bound_regime::complete_explicit) {
        rep = ustat::explicit_complete_bound(prof, n, m);
    } else {
        rep = ustat::thm_bound(regime, prof, n, m, N, fourth);
    }
    for (const auto& t : rep.terms) os << t.label << ',' << ustat::fmt17(t.value) << "\n";
    os << "total," << ustat::fmt17(rep.total) << "\n";
    os << "# constant_known=" << (rep.constant_known ? 1 : 0) << " inputs=" << rep.inputs_digest
       << "\n";
    return 0;
}

void print_sim_row(std::ostream& os, const ustat::experiment_spec& spec,
                   const ustat::simulation_result& res) {
    os << ustat::sim_regime_name(spec.regime) << ',' << spec.kernel_name << ',' << spec.law_name
       << ',' << spec.n << ',' << spec.m << ',' << res.budget_used << ',' << res.reps << ','
       << ustat::fmt17(res.ks) << ',' << ustat::fmt17(res.dkw_band) << ','
       << ustat::fmt17(res.mean) << ',' << ustat::fmt17(res.variance) << ','
       << ustat::fmt17(res.seconds) << "\n";
}

int run_simulate(output_sink& out, ustat::experiment_spec spec, std::uint64_t mc_reps) {
    const ustat::kernel k = ustat::kernel_registry(spec.kernel_name, spec.m);
    const ustat::source_law& law = ustat::law_registry(spec.law_name);
    const auto prof = resolve_profile(k, law, spec.base_seed, mc_reps);
    const auto res = ustat::run_experiment(spec, prof);
    auto& os = out.stream();
    os << "# config: subcommand=simulate regime=" << ustat::sim_regime_name(spec.regime)
       << " law=" << spec.law_name << " kernel=" << spec.kernel_name << " n=" << spec.n
       << " m=" << spec.m << " budget=" << spec.budget.str() << " reps=" << spec.reps
       << " seed=" << spec.base_seed << " workers=" << spec.workers << "\n";
    os << "regime,kernel,law,n,m,N,R,ks,dkw_band,mean,var,seconds\n";
    print_sim_row(os, spec, res);
    return 0;
}

int run_rate(output_sink& out, ustat::experiment_spec spec, const std::vector<int>& n_grid,
             std::uint64_t mc_reps) {
    if (n_grid.size() < 3) throw CLI::ValidationError("--n-grid needs at least 3 points");
    const ustat::kernel k = ustat::kernel_registry(spec.kernel_name, spec.m);
    const ustat::source_law& law = ustat::law_registry(spec.law_name);
    const auto prof = resolve_profile(k, law, spec.base_seed, mc_reps);
    auto& os = out.stream();
    os << "# config: subcommand=rate regime=" << ustat::sim_regime_name(spec.regime)
       << " law=" << spec.law_name << " kernel=" << spec.kernel_name << " m=" << spec.m
       << " budget=" << spec.budget.str() << " reps=" << spec.reps << " seed=" << spec.base_seed
       << "\n";
    os << "regime,kernel,law,n,m,N,R,ks,dkw_band,mean,var,seconds\n";
    std::vector<std::pair<double, double>> pts;
    for (const int n : n_grid) {
        spec.n = n;
        const auto res = ustat::run_experiment(spec, prof);
        print_sim_row(os, spec, res);
        pts.emplace_back(static_cast<double>(n), res.ks);
    }
    const auto fit = ustat::rate_fit(pts);
    os << "slope,intercept,r2\n";
    os << ustat::fmt17(fit.slope) << ',' << ustat::fmt17(fit.intercept) << ','
       << ustat::fmt17(fit.r2) << "\n";
    return 0;
}

int run_check_appendix(output_sink& out) {
    auto& os = out.stream();
    os << "# config: subcommand=check target=appendix\n";
    bool ok = true;

    const auto rep = ustat::lemma_a2_suite();
    for (const auto& c : rep.checks) {
        os << (c.pass ? "PASS" : "FAIL") << " stein." << c.label
           << " worst_slack=" << ustat::fmt17(c.worst_slack) << " at z=" << ustat::fmt17(c.at_z)
           << " w=" << ustat::fmt17(c.at_w) << "\n";
        ok = ok && c.pass;
    }

    const auto ben = ustat::bennett_mc_check(100, 200'000, 7);
    const bool ben_ok = ben.estimate + 5.0 * ben.se <= ustat::kBennettBound;
    os << (ben_ok ? "PASS" : "FAIL") << " bennett estimate=" << ustat::fmt17(ben.estimate)
       << " se=" << ustat::fmt17(ben.se) << " bound=" << ustat::kBennettBound << "\n";
    ok = ok && ben_ok;

    // censoring is a contraction; fuzz over finite and infinite intervals
    ustat::rng_stream rng(99, 0, 0);
    bool censor_ok = true;
    for (int i = 0; i < 1'000'000 && censor_ok; ++i) {
        const double y = (rng.next_unit() - 0.5) * 200.0;
        const double z = (rng.next_unit() - 0.5) * 200.0;
        double a = (rng.next_unit() - 0.5) * 100.0;
        double b = (rng.next_unit() - 0.5) * 100.0;
        if (a > b) std::swap(a, b);
        const unsigned sel = static_cast<unsigned>(rng.next_u64() & 3u);
        if (sel == 1) a = -std::numeric_limits<double>::infinity();
        if (sel == 2) b = std::numeric_limits<double>::infinity();
        censor_ok = std::abs(ustat::censor(y, a, b) - ustat::censor(z, a, b)) <=
                    std::abs(y - z) + 1e-15;
    }
    os << (censor_ok ? "PASS" : "FAIL") << " censor.contraction\n";
    ok = ok && censor_ok;

    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"incomplete U-statistics under a computational budget"};
    app.set_version_flag("--version", std::string(kVersion) + " (" + __DATE__ + ")");
    app.require_subcommand(1);

    output_sink out;
    std::uint64_t seed = 1;
    int threads = 0;
    std::uint64_t mc_reps = 200'000;
    app.add_option("--out", out.path, "output path (default: stdout)");
    app.add_option("--seed", seed, "base seed");
    app.add_option("--threads", threads, "worker count (0 = hardware)");
    app.add_option("--mc-profile-reps", mc_reps, "MC reps for profiles of continuous laws");

    // estimate
    auto* est = app.add_subcommand("estimate", "one EstimateBundle row");
    est->fallthrough();
    std::string law_name = "uniform3", kernel_name = "sample_variance", data_path;
    int n = 20, m = 2;
    std::uint64_t N = 50;
    double mu_flag = 0.0;
    bool mu_set = false;
    est->add_option("--law", law_name, "law name");
    est->add_option("--data", data_path, "CSV file of raw values");
    est->add_option("--kernel", kernel_name, "kernel name");
    est->add_option("--n", n, "sample size");
    est->add_option("--m", m, "kernel degree");
    est->add_option("--N", N, "computational budget");
    est->add_option("--mu", mu_flag, "centering constant")->each([&](const std::string&) {
        mu_set = true;
    });

    // bounds
    auto* bnd = app.add_subcommand("bounds", "Berry-Esseen bound term breakdown");
    bnd->fallthrough();
    std::string regime_str = "thm31";
    bool fourth = false;
    bnd->add_option("--regime", regime_str, "thm31|thm32|thm33|complete|conditional");
    bnd->add_option("--law", law_name, "law name");
    bnd->add_option("--kernel", kernel_name, "kernel name");
    bnd->add_option("--n", n, "sample size");
    bnd->add_option("--m", m, "kernel degree");
    bnd->add_option("--N", N, "computational budget");
    bnd->add_flag("--fourth-moment", fourth, "use the fourth-moment variant");

    // simulate
    auto* sim = app.add_subcommand("simulate", "replicated KS-distance experiment");
    sim->fallthrough();
    std::string sim_regime_str = "regime2", budget_str = "100";
    std::uint64_t reps = 10'000, dataset_seed = 1;
    sim->add_option("--regime", sim_regime_str, "regime1|regime2|regime3|complete|conditional");
    sim->add_option("--law", law_name, "law name");
    sim->add_option("--kernel", kernel_name, "kernel name");
    sim->add_option("--n", n, "sample size");
    sim->add_option("--m", m, "kernel degree");
    sim->add_option("--budget", budget_str, "N rule: literal | n^2 | sqrt_n | cn:<c>");
    sim->add_option("--reps", reps, "replicates");
    sim->add_option("--dataset-seed", dataset_seed, "fixed dataset seed (conditional)");

    // rate
    auto* rate = app.add_subcommand("rate", "KS rate fit over an n grid");
    rate->fallthrough();
    std::vector<int> n_grid{50, 100, 200, 400};
    rate->add_option("--regime", sim_regime_str, "standardization regime");
    rate->add_option("--law", law_name, "law name");
    rate->add_option("--kernel", kernel_name, "kernel name");
    rate->add_option("--n-grid", n_grid, "comma-separated n values")->delimiter(',');
    rate->add_option("--m", m, "kernel degree");
    rate->add_option("--budget", budget_str, "N rule");
    rate->add_option("--reps", reps, "replicates per grid point");

    // check
    auto* chk = app.add_subcommand("check", "verification suites; exit 1 on failure");
    chk->fallthrough();
    std::string target = "appendix";
    chk->add_option("target", target, "suite name (appendix)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForVersion")
            return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        if (*est)
            return run_estimate(out, law_name, data_path, kernel_name, n, m, N, seed, mu_flag,
                                mu_set);
        if (*bnd) return run_bounds(out, regime_str, law_name, kernel_name, n, m, N, fourth,
                                    seed, mc_reps);
        if (*sim || *rate) {
            ustat::experiment_spec spec;
            spec.law_name = law_name;
            spec.kernel_name = kernel_name;
            spec.regime = ustat::parse_sim_regime(sim_regime_str);
            spec.n = n;
            spec.m = m;
            spec.budget = ustat::budget_rule::parse(budget_str);
            spec.reps = reps;
            spec.base_seed = seed;
            spec.workers = threads;
            spec.dataset_seed = dataset_seed;
            if (*sim) return run_simulate(out, spec, mc_reps);
            return run_rate(out, spec, n_grid, mc_reps);
        }
        if (*chk) {
            if (target == "appendix") return run_check_appendix(out);
            std::cerr << "unknown check target: " << target << "\n";
            return 2;
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
