// sald: stochastic approximation with Markov noise, its large-deviation
// rate machinery on finite noise spaces, and Monte Carlo checks of the
// Laplace-principle scaling. Every subcommand is driven by a JSON config
// and writes CSV/JSON outputs stamped with the config hash.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sald/action.hpp"
#include "sald/assumptions.hpp"
#include "sald/config.hpp"
#include "sald/coupling.hpp"
#include "sald/estimator.hpp"
#include "sald/io.hpp"
#include "sald/models/presets.hpp"
#include "sald/models/rbm.hpp"
#include "sald/models/sgd.hpp"
#include "sald/models/wang_landau.hpp"
#include "sald/rate.hpp"
#include "sald/sim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sald;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitUsage = 64;

struct CommonOpts {
    std::string config_file;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out;
    bool no_timestamp = false;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
    cmd->add_option("--config", c.config_file, "experiment config file (JSON)");
    cmd->add_option("--seed", c.seed, "override the config seed");
    cmd->add_option("--threads", c.threads, "worker thread cap");
    cmd->add_option("--out", c.out, "output directory");
    cmd->add_flag("--no-timestamp", c.no_timestamp, "suppress timestamp lines in outputs");
}

ExperimentConfig load_config(const CommonOpts& c) {
    ExperimentConfig cfg = c.config_file.empty()
                               ? ExperimentConfig::from_json(json{{"model", {{"name", "bernoulli"}}}})
                               : ExperimentConfig::load(c.config_file);
    if (c.seed) cfg.set_seed(*c.seed);
    if (c.threads) cfg.set_threads(*c.threads);
    if (c.out) cfg.set_out(*c.out);
    if (c.no_timestamp) cfg.set_timestamp(false);
    return cfg;
}

json meta_of(const ExperimentConfig& cfg) {
    json m;
    m["schema_version"] = 1;
    m["version"] = version_string();
    m["config_hash"] = cfg.hash();
    m["config"] = cfg.echo();
    return m;
}

Vec parse_vec_arg(const std::string& s) {
    std::vector<double> vals;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    Vec v(static_cast<Eigen::Index>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) v[static_cast<Eigen::Index>(i)] = vals[i];
    return v;
}

std::vector<Vec> grid_from_params(const json& params, const std::string& key, const Vec& fallback) {
    std::vector<Vec> out;
    if (params.contains(key)) {
        for (const auto& row : params.at(key)) {
            if (row.is_array())
                out.push_back(config_detail::json_vector(row));
            else
                out.push_back(scalar_vec(row.get<double>()));
        }
    }
    if (out.empty()) out.push_back(fallback);
    return out;
}

PathFunctional build_functional(const ExperimentConfig& cfg, const SAModel& model) {
    const json f = cfg.params().value("functional", json{{"name", "deviation_from_ode"}});
    const std::string name = f.value("name", std::string("deviation_from_ode"));
    const double bound = f.value("bound", 1.0);
    if (name == "const") {
        const double c = f.value("value", 0.0);
        return PathFunctional{"const", [c](const Path&) { return c; }, std::max(1.0, std::abs(c))};
    }
    if (name == "deviation_from_ode") {
        const double dt = f.value("dt", 1e-3);
        auto ode = std::make_shared<Path>(ode_limit(model, model.x0, cfg.horizon(), dt));
        return PathFunctional{
            "deviation_from_ode",
            [ode, bound](const Path& p) { return std::min(bound, deviation_sup(p, *ode)); }, bound};
    }
    if (name == "deviation_from_path") {
        auto target = std::make_shared<Path>(read_path_csv(f.at("path_file").get<std::string>()));
        return PathFunctional{
            "deviation_from_path",
            [target, bound](const Path& p) { return std::min(bound, deviation_sup(p, *target)); },
            bound};
    }
    throw ConfigError("unknown functional '" + name + "'");
}

Path build_target_path(const ExperimentConfig& cfg, const SAModel& model) {
    const json t = cfg.params().value("target", json{{"kind", "ode"}});
    const std::string kind = t.value("kind", std::string("ode"));
    if (kind == "ode") return ode_limit(model, model.x0, cfg.horizon(), t.value("dt", 1e-3));
    if (kind == "line") {
        Vec end = t.at("end").is_array() ? config_detail::json_vector(t.at("end"))
                                         : scalar_vec(t.at("end").get<double>());
        return Path::line(cfg.horizon(), model.x0, end);
    }
    if (kind == "file") return read_path_csv(t.at("path_file").get<std::string>());
    throw ConfigError("unknown tube target kind '" + kind + "'");
}

int cmd_simulate(const CommonOpts& opts, std::optional<Index> n_flag) {
    ExperimentConfig cfg = load_config(opts);
    SAModel model = cfg.build_model();
    StepSchedule sch = cfg.build_schedule();
    const Index n = n_flag ? *n_flag : static_cast<Index>(cfg.param_or("n", 1000));
    Path p = simulate_segment(model, sch, n, cfg.horizon(), cfg.seed());
    fs::path dir(cfg.out_dir());
    write_path_csv(dir / "simulate.csv", p, cfg.hash(), cfg.timestamp());
    json meta = meta_of(cfg);
    meta["n"] = n;
    meta["T"] = cfg.horizon();
    meta["beta_n"] = sch.beta_n(n, cfg.horizon());
    meta["breakpoints"] = p.breakpoints();
    write_json_file(dir / "simulate_meta.json", meta);
    std::cout << "simulate: " << p.breakpoints() << " breakpoints -> " << (dir / "simulate.csv")
              << "\n";
    return kExitOk;
}

int cmd_ode(const CommonOpts& opts) {
    ExperimentConfig cfg = load_config(opts);
    SAModel model = cfg.build_model();
    const double dt = cfg.param_or("dt", 1e-3);
    Path p = ode_limit(model, model.x0, cfg.horizon(), dt);
    fs::path dir(cfg.out_dir());
    write_path_csv(dir / "ode.csv", p, cfg.hash(), cfg.timestamp());
    json meta = meta_of(cfg);
    meta["dt"] = dt;
    write_json_file(dir / "ode_meta.json", meta);
    std::cout << "ode: endpoint " << p.at(p.horizon()).transpose() << " -> " << (dir / "ode.csv")
              << "\n";
    return kExitOk;
}

int cmd_hamiltonian(const CommonOpts& opts, const std::vector<std::string>& alpha_args,
                    const std::string& x_arg) {
    ExperimentConfig cfg = load_config(opts);
    SAModel model = cfg.build_model();
    Vec x = x_arg.empty() ? model.x0 : parse_vec_arg(x_arg);
    std::vector<Vec> alphas;
    for (const auto& a : alpha_args) alphas.push_back(parse_vec_arg(a));
    if (alphas.empty())
        alphas = grid_from_params(cfg.params(), "alpha_grid", Vec::Zero(model.d1));
    RateEval re(model, x);
    fs::path dir(cfg.out_dir());
    std::vector<std::string> cols;
    for (int k = 1; k <= model.d1; ++k) cols.push_back("alpha_" + std::to_string(k));
    cols.push_back("H");
    CsvWriter w(dir / "hamiltonian.csv", cfg.hash(), cols, cfg.timestamp());
    for (const auto& a : alphas) {
        if (a.size() != model.d1) throw ConfigError("hamiltonian: alpha has wrong dimension");
        const double H = re.hamiltonian(a);
        std::vector<double> row;
        for (int k = 0; k < model.d1; ++k) row.push_back(a[k]);
        row.push_back(H);
        w.row(row);
        std::cout << "H(" << a.transpose() << ") = " << format_double(H) << "\n";
    }
    write_json_file(dir / "hamiltonian_meta.json", meta_of(cfg));
    return kExitOk;
}

int cmd_rate_surface(const CommonOpts& opts) {
    ExperimentConfig cfg = load_config(opts);
    SAModel model = cfg.build_model();
    fs::path dir(cfg.out_dir());
    std::vector<Vec> xs = grid_from_params(cfg.params(), "x_grid", model.x0);

    // default beta grid: spread across the attainable-velocity range at x0
    std::vector<Vec> betas;
    if (cfg.params().contains("beta_grid"))
        betas = grid_from_params(cfg.params(), "beta_grid", Vec::Zero(model.d1));
    else {
        RateEval re(model, model.x0);
        for (int i = 0; i <= 20; ++i) {
            const double w = -6.0 + 12.0 * i / 20.0;
            betas.push_back(re.hamiltonian_grad(Vec::Constant(model.d1, w)));
        }
    }
    std::vector<Vec> alphas;
    if (cfg.params().contains("alpha_grid"))
        alphas = grid_from_params(cfg.params(), "alpha_grid", Vec::Zero(model.d1));
    else
        for (int i = 0; i <= 20; ++i)
            alphas.push_back(Vec::Constant(model.d1, -3.0 + 6.0 * i / 20.0));

    {
        std::vector<std::string> cols;
        for (int k = 1; k <= model.d1; ++k) cols.push_back("x_" + std::to_string(k));
        for (int k = 1; k <= model.d1; ++k) cols.push_back("beta_" + std::to_string(k));
        cols.push_back("L");
        cols.push_back("finite");
        CsvWriter w(dir / "rate_L.csv", cfg.hash(), cols, cfg.timestamp());
        for (const auto& x : xs) {
            RateEval re(model, x);
            for (const auto& b : betas) {
                auto lr = re.local_rate(b);
                std::vector<double> row;
                for (int k = 0; k < model.d1; ++k) row.push_back(x[k]);
                for (int k = 0; k < model.d1; ++k) row.push_back(b[k]);
                row.push_back(lr.value.value_or(std::numeric_limits<double>::quiet_NaN()));
                row.push_back(lr.value.is_finite() ? 1.0 : 0.0);
                w.row(row);
            }
        }
    }
    {
        std::vector<std::string> cols;
        for (int k = 1; k <= model.d1; ++k) cols.push_back("x_" + std::to_string(k));
        for (int k = 1; k <= model.d1; ++k) cols.push_back("alpha_" + std::to_string(k));
        cols.push_back("H");
        CsvWriter w(dir / "rate_H.csv", cfg.hash(), cols, cfg.timestamp());
        for (const auto& x : xs) {
            RateEval re(model, x);
            for (const auto& a : alphas) {
                std::vector<double> row;
                for (int k = 0; k < model.d1; ++k) row.push_back(x[k]);
                for (int k = 0; k < model.d1; ++k) row.push_back(a[k]);
                row.push_back(re.hamiltonian(a));
                w.row(row);
            }
        }
    }
    write_json_file(dir / "rate_surface_meta.json", meta_of(cfg));
    std::cout << "rate-surface: " << xs.size() << " x-points -> " << (dir / "rate_L.csv") << ", "
              << (dir / "rate_H.csv") << "\n";
    return kExitOk;
}

int cmd_action(const CommonOpts& opts, const std::string& path_file) {
    ExperimentConfig cfg = load_config(opts);
    SAModel model = cfg.build_model();
    StepSchedule sch = cfg.build_schedule();
    std::string file = path_file.empty()
                           ? cfg.params().value("path_file", std::string())
                           : path_file;
    if (file.empty()) throw ConfigError("action: need --path or params.path_file");
    Path p = read_path_csv(file);
    ExtReal a = action(model, sch, cfg.horizon(), p, static_cast<int>(cfg.param_or("quad_nodes", 8)));
    json out = meta_of(cfg);
    out["finite"] = a.is_finite();
    if (a.is_finite()) out["action"] = a.value();
    fs::path dir(cfg.out_dir());
    write_json_file(dir / "action.json", out);
    std::cout << "action = " << a << "\n";
    return kExitOk;
}

int cmd_minpath(const CommonOpts& opts, std::optional<int> segments_flag) {
    ExperimentConfig cfg = load_config(opts);
    ActionProblem prob;
    prob.model = cfg.build_model();
    prob.schedule = cfg.build_schedule();
    prob.T = cfg.horizon();
    prob.segments = segments_flag ? *segments_flag : static_cast<int>(cfg.param_or("segments", 8));
    prob.quad_nodes = static_cast<int>(cfg.param_or("quad_nodes", 8));
    if (cfg.params().contains("end")) {
        const auto& e = cfg.params().at("end");
        prob.end = e.is_array() ? config_detail::json_vector(e) : scalar_vec(e.get<double>());
    }
    MinActionResult res = min_action_path(prob);
    fs::path dir(cfg.out_dir());
    write_path_csv(dir / "minpath.csv", res.path, cfg.hash(), cfg.timestamp());
    json out = meta_of(cfg);  // action-value sidecar
    out["finite"] = res.value.is_finite();
    if (res.value.is_finite()) out["action"] = res.value.value();
    out["converged"] = res.converged;
    out["feasible"] = res.feasible;
    out["grad_norm"] = res.grad_norm;
    out["iterations"] = res.iterations;
    out["chosen_start"] = res.chosen_start;
    write_json_file(dir / "minpath.json", out);
    std::cout << "minpath: action = " << res.value << " (converged=" << res.converged << ") -> "
              << (dir / "minpath.csv") << "\n";
    return res.feasible ? kExitOk : kExitNumerical;
}

int cmd_laplace(const CommonOpts& opts, std::optional<int> N_flag) {
    ExperimentConfig cfg = load_config(opts);
    SAModel model = cfg.build_model();
    StepSchedule sch = cfg.build_schedule();
    PathFunctional F = build_functional(cfg, model);
    std::vector<Index> ns;
    if (cfg.params().contains("n_list"))
        for (const auto& v : cfg.params().at("n_list")) ns.push_back(v.get<Index>());
    else
        ns.push_back(static_cast<Index>(cfg.param_or("n", 1000)));
    const int N = N_flag ? *N_flag : static_cast<int>(cfg.param_or("N", 1000));

    fs::path dir(cfg.out_dir());
    CsvWriter w(dir / "laplace.csv", cfg.hash(),
                {"n", "beta_n", "estimate", "std_error", "clamped"}, cfg.timestamp());
    json records = json::array();
    for (Index n : ns) {
        LaplaceEstimate e = laplace_functional(model, sch, F, n, cfg.horizon(), N, cfg.seed(),
                                               cfg.threads());
        w.row({static_cast<double>(e.n), e.beta_n, e.value, e.std_error,
               static_cast<double>(e.clamped)});
        json r;
        r["n"] = e.n;
        r["beta_n"] = e.beta_n;
        r["estimate"] = e.value;
        r["std_error"] = e.std_error;
        r["clamped"] = e.clamped;
        r["functional"] = F.name;
        records.push_back(r);
        std::cout << "laplace n=" << n << ": " << format_double(e.value) << " (se "
                  << format_double(e.std_error) << ")\n";
    }
    json meta = meta_of(cfg);
    meta["records"] = records;
    write_json_file(dir / "laplace.json", meta);
    return kExitOk;
}

int cmd_tube(const CommonOpts& opts, std::optional<int> N_flag, std::optional<double> delta_flag) {
    ExperimentConfig cfg = load_config(opts);
    SAModel model = cfg.build_model();
    StepSchedule sch = cfg.build_schedule();
    Path target = build_target_path(cfg, model);
    const Index n = static_cast<Index>(cfg.param_or("n", 1000));
    const int N = N_flag ? *N_flag : static_cast<int>(cfg.param_or("N", 10000));
    const double delta = delta_flag ? *delta_flag : cfg.param_or("delta", 0.1);
    TubeEstimate e =
        tube_probability(model, sch, target, delta, n, cfg.horizon(), N, cfg.seed(), cfg.threads());
    json out = meta_of(cfg);
    out["n"] = e.n;
    out["N"] = e.samples;
    out["delta"] = delta;
    out["hits"] = e.hits;
    out["p_hat"] = e.p_hat;
    out["beta_n"] = e.beta_n;
    out["censored"] = e.censored;
    out["log_rate"] = e.log_rate;
    out["log_rate_meaning"] =
        e.censored ? "one-sided lower bound log(N)/beta_n (zero hits)" : "-(1/beta_n) log p_hat";
    fs::path dir(cfg.out_dir());
    write_json_file(dir / "tube.json", out);
    CsvWriter w(dir / "tube.csv", cfg.hash(),
                {"n", "beta_n", "delta", "hits", "N", "p_hat", "log_rate", "censored"},
                cfg.timestamp());
    w.row({static_cast<double>(e.n), e.beta_n, delta, static_cast<double>(e.hits),
           static_cast<double>(e.samples), e.p_hat, e.log_rate, e.censored ? 1.0 : 0.0});
    std::cout << "tube: p_hat=" << format_double(e.p_hat) << " log_rate=" << format_double(e.log_rate)
              << (e.censored ? " (censored)" : "") << "\n";
    return kExitOk;
}

int cmd_check_assumptions(const CommonOpts& opts) {
    ExperimentConfig cfg = load_config(opts);
    SAModel model = cfg.build_model();
    std::vector<Vec> xs = grid_from_params(cfg.params(), "x_grid", model.x0);
    if (xs.size() == 1) {
        // widen the default audit grid around x0
        Vec base = xs[0];
        xs.clear();
        for (double s : {-0.5, -0.1, 0.0, 0.1, 0.5}) xs.push_back(base.array() + s);
    }
    std::vector<Vec> alphas = grid_from_params(cfg.params(), "alpha_grid", Vec::Zero(model.d1));
    if (alphas.size() == 1) {
        alphas.clear();
        for (double s : {-2.0, -0.5, 0.5, 2.0}) alphas.push_back(Vec::Constant(model.d1, s));
    }
    AssumptionReport rep = check_assumptions(model, xs, alphas);
    json out = meta_of(cfg);
    out["report"] = rep.to_json();
    fs::path dir(cfg.out_dir());
    write_json_file(dir / "assumptions.json", out);
    for (const auto& c : rep.checks)
        std::cout << c.id << ": " << (c.pass ? "PASS" : "FAIL") << " (bound "
                  << format_double(c.bound) << (c.witness.empty() ? "" : ", " + c.witness) << ")\n";
    std::cout << (rep.all_pass() ? "all checks PASS" : "some checks FAILED") << "\n";
    return kExitOk;
}

int cmd_demo_sgd(const CommonOpts& opts) {
    ExperimentConfig cfg = load_config(opts);
    LogisticDataset data = config_detail::demo_logistic_dataset();
    SAModel model = sgd_logistic_model(data);
    StepSchedule sch = cfg.build_schedule();
    fs::path dir(cfg.out_dir());

    // closed-form Hamiltonian against the tilted-kernel Perron route
    double worst = 0.0;
    for (double xs : {-0.6, 0.0, 0.7}) {
        Vec x = Vec::Constant(model.d1, xs);
        RateEval re(model, x);
        for (double as : {-1.5, -0.4, 0.3, 1.0}) {
            Vec alpha = Vec::Constant(model.d1, as);
            worst = std::max(worst,
                             std::abs(re.hamiltonian(alpha) - sgd_hamiltonian_closed(data, x, alpha)));
        }
    }
    Path p = simulate_segment(model, sch, static_cast<Index>(cfg.param_or("n", 100)), cfg.horizon(),
                              cfg.seed());
    write_path_csv(dir / "sgd_path.csv", p, cfg.hash(), cfg.timestamp());
    json out = meta_of(cfg);
    out["hbar_vs_perron_max_abs_diff"] = worst;
    out["examples"] = data.count();
    write_json_file(dir / "demo_sgd.json", out);
    std::cout << "demo-sgd: closed-form vs Perron max diff = " << format_double(worst) << "\n";
    return kExitOk;
}

int cmd_demo_rbm(const CommonOpts& opts) {
    ExperimentConfig cfg = load_config(opts);
    RBMSpec spec = config_detail::demo_rbm_spec(3, 3);
    SAModel model = rbm_model(spec);
    fs::path dir(cfg.out_dir());

    InvariantMeasure inv = invariant_measure(model.kernel, model.x0, 1e-12);
    Vec gibbs = rbm_gibbs_exact(spec, model.x0);
    const double tv = 0.5 * (inv.pi - gibbs).lpNorm<1>();

    const Index steps = static_cast<Index>(cfg.param_or("steps", 100000));
    ChainMean cm = frozen_chain_mean(model, model.x0, steps, cfg.seed());
    Vec exact = rbm_exact_mean_update(spec, model.x0);
    double worst_z = 0.0;
    for (int k = 0; k < model.d1; ++k)
        worst_z = std::max(worst_z, std::abs(cm.mean[k] - exact[k]) / cm.std_error[k]);

    json out = meta_of(cfg);
    out["invariant_tv"] = tv;
    out["pcd_steps"] = steps;
    out["pcd_max_abs_z"] = worst_z;
    write_json_file(dir / "demo_rbm.json", out);
    std::cout << "demo-rbm: invariant TV = " << format_double(tv)
              << ", PCD max |z| = " << format_double(worst_z) << "\n";
    return kExitOk;
}

int cmd_demo_wl(const CommonOpts& opts) {
    ExperimentConfig cfg = load_config(opts);
    StepSchedule sch = cfg.build_schedule();
    fs::path dir(cfg.out_dir());
    json out = meta_of(cfg);

    auto run = [&](const WangLandauSpec& spec, Index steps, const std::string& tag) {
        SAModel model = wang_landau_model(spec);
        Path p = simulate_steps(model, sch, 0, steps, cfg.seed());
        // thinned trajectory of the stratum weights
        std::vector<std::string> cols{"k"};
        for (int i = 1; i <= model.d1; ++i) cols.push_back("x_" + std::to_string(i));
        CsvWriter w(dir / ("wl_" + tag + ".csv"), cfg.hash(), cols, cfg.timestamp());
        const std::size_t stride = std::max<std::size_t>(1, p.breakpoints() / 1000);
        for (std::size_t j = 0; j < p.breakpoints(); j += stride) {
            std::vector<double> row{static_cast<double>(j)};
            for (int k = 0; k < model.d1; ++k) row.push_back(p.value(j)[k]);
            w.row(row);
        }
        Vec final = p.value(p.breakpoints() - 1);
        Vec truth = spec.true_x();
        json r;
        r["steps"] = steps;
        r["final"] = std::vector<double>(final.data(), final.data() + final.size());
        r["true"] = std::vector<double>(truth.data(), truth.data() + truth.size());
        r["max_abs_dev"] = (final - truth).lpNorm<Eigen::Infinity>();
        if (tag == "free_energy") {
            Vec fd = wl_free_energy_differences(final);
            Vec td = wl_free_energy_differences(truth);
            r["free_energy_diff"] = std::vector<double>(fd.data(), fd.data() + fd.size());
            r["free_energy_true"] = std::vector<double>(td.data(), td.data() + td.size());
            r["free_energy_max_err"] = (fd - td).lpNorm<Eigen::Infinity>();
        }
        out[tag] = r;
        std::cout << "demo-wl " << tag << ": max dev = " << format_double(r["max_abs_dev"]) << "\n";
    };

    run(wl_two_stratum_symmetric(), static_cast<Index>(cfg.param_or("steps_two_stratum", 10000)),
        "two_stratum");
    run(wl_multicanonical_ising4(), static_cast<Index>(cfg.param_or("steps_multicanonical", 100000)),
        "multicanonical");
    run(wl_free_energy_3site(), static_cast<Index>(cfg.param_or("steps_free_energy", 100000)),
        "free_energy");
    write_json_file(dir / "demo_wl.json", out);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic approximation large-deviation toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::optional<Index> n_flag;
    std::optional<int> N_flag, segments_flag;
    std::optional<double> delta_flag;
    std::vector<std::string> alpha_args;
    std::string x_arg, path_file;

    auto* c_sim = app.add_subcommand("simulate", "run the recursion and write the path");
    add_common(c_sim, opts);
    c_sim->add_option("--n", n_flag, "restart index n");

    auto* c_ode = app.add_subcommand("ode", "solve the limit ODE");
    add_common(c_ode, opts);

    auto* c_ham = app.add_subcommand("hamiltonian", "evaluate H(x, alpha)");
    add_common(c_ham, opts);
    c_ham->add_option("--alpha", alpha_args, "tilt vector, comma separated (repeatable)");
    c_ham->add_option("--x", x_arg, "evaluation point, comma separated");

    auto* c_rs = app.add_subcommand("rate-surface", "dump (x,beta,L) and (x,alpha,H) grids");
    add_common(c_rs, opts);

    auto* c_act = app.add_subcommand("action", "action of a path file");
    add_common(c_act, opts);
    c_act->add_option("--path", path_file, "path CSV to evaluate");

    auto* c_mp = app.add_subcommand("minpath", "minimum-action path search");
    add_common(c_mp, opts);
    c_mp->add_option("--segments", segments_flag, "piecewise-linear segment count");

    auto* c_lap = app.add_subcommand("laplace", "Monte Carlo Laplace functional");
    add_common(c_lap, opts);
    c_lap->add_option("--N", N_flag, "sample count");

    auto* c_tube = app.add_subcommand("tube", "tube probability around a target path");
    add_common(c_tube, opts);
    c_tube->add_option("--N", N_flag, "sample count");
    c_tube->add_option("--delta", delta_flag, "tube radius");

    auto* c_chk = app.add_subcommand("check-assumptions", "grid audit of the model assumptions");
    add_common(c_chk, opts);

    auto* c_dsgd = app.add_subcommand("demo-sgd", "bundled logistic-SGD demo");
    add_common(c_dsgd, opts);
    auto* c_drbm = app.add_subcommand("demo-rbm", "bundled RBM / persistent chain demo");
    add_common(c_drbm, opts);
    auto* c_dwl = app.add_subcommand("demo-wl", "bundled Wang-Landau demos");
    add_common(c_dwl, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help() << "\n";
        return kExitUsage;
    }

    try {
        if (c_sim->parsed()) return cmd_simulate(opts, n_flag);
        if (c_ode->parsed()) return cmd_ode(opts);
        if (c_ham->parsed()) return cmd_hamiltonian(opts, alpha_args, x_arg);
        if (c_rs->parsed()) return cmd_rate_surface(opts);
        if (c_act->parsed()) return cmd_action(opts, path_file);
        if (c_mp->parsed()) return cmd_minpath(opts, segments_flag);
        if (c_lap->parsed()) return cmd_laplace(opts, N_flag);
        if (c_tube->parsed()) return cmd_tube(opts, N_flag, delta_flag);
        if (c_chk->parsed()) return cmd_check_assumptions(opts);
        if (c_dsgd->parsed()) return cmd_demo_sgd(opts);
        if (c_drbm->parsed()) return cmd_demo_rbm(opts);
        if (c_dwl->parsed()) return cmd_demo_wl(opts);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    std::cerr << app.help() << "\n";
    return kExitUsage;
}
