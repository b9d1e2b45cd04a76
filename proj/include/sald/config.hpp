#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sald/io.hpp"
#include "sald/kernel.hpp"
#include "sald/model.hpp"
#include "sald/models/presets.hpp"
#include "sald/models/rbm.hpp"
#include "sald/models/sgd.hpp"
#include "sald/models/wang_landau.hpp"
#include "sald/schedule.hpp"
#include "sald/types.hpp"

namespace sald {

namespace config_detail {

inline Mat json_matrix(const nlohmann::json& j) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) throw ConfigError("expected a matrix");
    const int rows = static_cast<int>(j.size());
    const int cols = static_cast<int>(j[0].size());
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        if (static_cast<int>(j[r].size()) != cols) throw ConfigError("ragged matrix");
        for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

inline Vec json_vector(const nlohmann::json& j) {
    if (!j.is_array()) throw ConfigError("expected an array");
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = j[static_cast<std::size_t>(i)].get<double>();
    return v;
}

inline nlohmann::json matrix_json(const Mat& m) {
    nlohmann::json j = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        j.push_back(row);
    }
    return j;
}

inline nlohmann::json vector_json(const Vec& v) {
    nlohmann::json j = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
    return j;
}

/// Bundled demo dataset: a small linearly-inseparable logistic problem.
inline LogisticDataset demo_logistic_dataset() {
    LogisticDataset d;
    d.features = Mat(6, 2);
    d.features << 1.0, 0.3, 0.8, -0.4, -0.9, 0.2, -0.5, -0.8, 0.2, 1.0, -0.1, -0.3;
    d.labels = Vec(6);
    d.labels << 1, 1, -1, -1, 1, -1;
    return d;
}

/// Bundled demo RBM: fixed small weights, two observed samples.
inline RBMSpec demo_rbm_spec(int d_v = 3, int d_h = 3) {
    RBMSpec s;
    s.d_v = d_v;
    s.d_h = d_h;
    s.W = Mat(d_v, d_h);
    for (int i = 0; i < d_v; ++i)
        for (int j = 0; j < d_h; ++j) s.W(i, j) = 0.3 * std::sin(1.0 + i + 2.0 * j);
    s.b_v = Vec::Zero(d_v);
    s.b_h = Vec::Zero(d_h);
    for (int i = 0; i < d_v; ++i) s.b_v[i] = 0.1 * (i % 2 == 0 ? 1 : -1);
    for (int j = 0; j < d_h; ++j) s.b_h[j] = -0.05 * j;
    s.samples = Mat(2, d_v);
    for (int i = 0; i < d_v; ++i) {
        s.samples(0, i) = i % 2;
        s.samples(1, i) = 1 - i % 2;
    }
    return s;
}

}  // namespace config_detail

/// Experiment description: model, schedule, horizon and run parameters,
/// normalized so every default is explicit. Emit -> parse round-trips to an
/// identical document, and the FNV hash of the normalized echo names the
/// configuration in every output file.
class ExperimentConfig {
public:
    static ExperimentConfig from_json(const nlohmann::json& in) {
        ExperimentConfig c;
        nlohmann::json j = in;
        if (!j.is_object()) throw ConfigError("config: expected a JSON object");
        c.model_ = j.value("model", nlohmann::json{{"name", "bernoulli"}});
        if (!c.model_.contains("name")) throw ConfigError("config: model.name missing");
        c.schedule_ = j.value("schedule", nlohmann::json{{"kind", "harmonic"}});
        c.horizon_ = j.value("horizon", 1.0);
        c.seed_ = j.value("seed", std::uint64_t{1});
        c.threads_ = j.value("threads", 1);
        c.out_ = j.value("out", std::string("out"));
        c.timestamp_ = j.value("timestamp", true);
        c.params_ = j.value("params", nlohmann::json::object());
        c.normalize_model();
        c.normalize_schedule();
        if (!(c.horizon_ > 0.0)) throw ConfigError("config: horizon must be > 0");
        if (c.threads_ < 1) throw ConfigError("config: threads must be >= 1");
        return c;
    }

    static ExperimentConfig load(const std::filesystem::path& file) {
        std::ifstream in(file);
        if (!in) throw ConfigError("config: cannot open " + file.string());
        nlohmann::json j;
        try {
            in >> j;
        } catch (const std::exception& e) {
            throw ConfigError(std::string("config: parse failure: ") + e.what());
        }
        return from_json(j);
    }

    /// Fully-defaulted document; keys are emitted in sorted order.
    nlohmann::json echo() const {
        nlohmann::json j;
        j["schema_version"] = 1;
        j["model"] = model_;
        j["schedule"] = schedule_;
        j["horizon"] = horizon_;
        j["seed"] = seed_;
        j["threads"] = threads_;
        j["out"] = out_;
        j["timestamp"] = timestamp_;
        j["params"] = params_;
        return j;
    }

    /// Names the experiment. Execution knobs (threads, out, timestamp) are
    /// excluded: they cannot change results, so they do not change the hash.
    std::string hash() const {
        nlohmann::json j = echo();
        j.erase("threads");
        j.erase("out");
        j.erase("timestamp");
        return hex64(fnv1a64(j.dump()));
    }

    double horizon() const { return horizon_; }
    std::uint64_t seed() const { return seed_; }
    int threads() const { return threads_; }
    const std::string& out_dir() const { return out_; }
    bool timestamp() const { return timestamp_; }
    const nlohmann::json& params() const { return params_; }
    nlohmann::json& params() { return params_; }
    const nlohmann::json& model_json() const { return model_; }

    void set_seed(std::uint64_t s) { seed_ = s; }
    void set_threads(int t) { threads_ = t; }
    void set_out(std::string o) { out_ = std::move(o); }
    void set_timestamp(bool b) { timestamp_ = b; }

    double param_or(const std::string& key, double dflt) const {
        return params_.value(key, dflt);
    }

    StepSchedule build_schedule() const {
        const std::string kind = schedule_.at("kind").get<std::string>();
        if (kind == "harmonic") return StepSchedule::harmonic();
        if (kind == "polynomial") return StepSchedule::polynomial(schedule_.at("rho").get<double>());
        if (kind == "constant") return StepSchedule::constant(schedule_.at("eps").get<double>());
        if (kind == "custom") {
            std::vector<double> steps = schedule_.at("steps").get<std::vector<double>>();
            return StepSchedule::custom(std::move(steps));
        }
        throw ConfigError("config: unknown schedule kind '" + kind + "'");
    }

    SAModel build_model() const {
        using namespace config_detail;
        const std::string name = model_.at("name").get<std::string>();
        try {
            if (name == "bernoulli")
                return bernoulli_model(model_.at("p").get<double>(), model_.at("center").get<double>(),
                                       model_.at("x0").get<double>());
            if (name == "ou_bernoulli") return ou_bernoulli_model(model_.at("x0").get<double>());
            if (name == "two_state")
                return two_state_model(model_.at("a").get<double>(), model_.at("b").get<double>(),
                                       model_.at("x0").get<double>());
            if (name == "iid")
                return iid_model(json_vector(model_.at("q")), json_matrix(model_.at("g_values")),
                                 json_vector(model_.at("x0")));
            if (name == "custom") {
                SAModel m;
                m.name = "custom";
                Mat rho = json_matrix(model_.at("matrix"));
                Mat g = json_matrix(model_.at("g_values"));
                if (g.rows() != rho.rows()) throw ConfigError("custom model: g_values row count");
                m.d1 = static_cast<int>(g.cols());
                m.space = FiniteNoiseSpace::indexed(static_cast<int>(rho.rows()));
                if (model_.contains("coords")) m.space.coords = json_matrix(model_.at("coords"));
                m.kernel = StateKernel::fixed(rho);
                m.g = [g](const Vec&, int z) { return Vec(g.row(z).transpose()); };
                m.x0 = json_vector(model_.at("x0"));
                return m;
            }
            if (name == "kernel_table") {
                // explicit matrices per grid-x; evaluation snaps to the
                // nearest table point (documented approximation)
                std::vector<Vec> xs;
                std::vector<Mat> mats;
                for (const auto& e : model_.at("entries")) {
                    xs.push_back(json_vector(e.at("x")));
                    mats.push_back(json_matrix(e.at("matrix")));
                }
                if (xs.empty()) throw ConfigError("kernel_table: no entries");
                Mat g = json_matrix(model_.at("g_values"));
                SAModel m;
                m.name = "kernel_table";
                m.d1 = static_cast<int>(g.cols());
                const int S = static_cast<int>(mats[0].rows());
                m.space = FiniteNoiseSpace::indexed(S);
                m.kernel = StateKernel(
                    S,
                    [xs, mats](const Vec& x) {
                        std::size_t best = 0;
                        double bd = (x - xs[0]).norm();
                        for (std::size_t i = 1; i < xs.size(); ++i) {
                            const double d = (x - xs[i]).norm();
                            if (d < bd) {
                                bd = d;
                                best = i;
                            }
                        }
                        return mats[best];
                    },
                    true, 0.0);
                m.g = [g](const Vec&, int z) { return Vec(g.row(z).transpose()); };
                m.x0 = json_vector(model_.at("x0"));
                return m;
            }
            if (name == "sgd_logistic") {
                LogisticDataset d;
                if (model_.value("preset", std::string()) == "demo")
                    d = demo_logistic_dataset();
                else {
                    d.features = json_matrix(model_.at("features"));
                    d.labels = json_vector(model_.at("labels"));
                }
                return sgd_logistic_model(d);
            }
            if (name == "rbm") {
                RBMSpec s;
                if (model_.value("preset", std::string()) == "demo")
                    s = demo_rbm_spec(model_.value("d_v", 3), model_.value("d_h", 3));
                else {
                    s.d_v = model_.at("d_v").get<int>();
                    s.d_h = model_.at("d_h").get<int>();
                    s.W = json_matrix(model_.at("W"));
                    s.b_v = json_vector(model_.at("b_v"));
                    s.b_h = json_vector(model_.at("b_h"));
                    s.samples = json_matrix(model_.at("samples"));
                }
                return rbm_model(s, model_.value("rebuild_radius", 0.0));
            }
            if (name == "wang_landau") {
                const std::string preset = model_.value("preset", std::string());
                WangLandauSpec s;
                if (preset == "two_stratum")
                    s = wl_two_stratum_symmetric();
                else if (preset == "multicanonical4")
                    s = wl_multicanonical_ising4();
                else if (preset == "free_energy3")
                    s = wl_free_energy_3site();
                else if (model_.contains("f"))
                    s.f = model_.at("f").get<std::vector<std::vector<double>>>();
                else
                    throw ConfigError("wang_landau: need a preset or explicit weights f");
                return wang_landau_model(s);
            }
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("config: model '" + name + "': " + e.what());
        }
        throw ConfigError("config: unknown model '" + name + "'");
    }

private:
    void normalize_model() {
        const std::string name = model_.value("name", std::string());
        if (name == "bernoulli") {
            if (!model_.contains("p")) model_["p"] = 0.5;
            if (!model_.contains("center")) model_["center"] = 0.0;
            if (!model_.contains("x0")) model_["x0"] = 0.0;
        } else if (name == "ou_bernoulli") {
            if (!model_.contains("x0")) model_["x0"] = 1.0;
        } else if (name == "two_state") {
            if (!model_.contains("a")) model_["a"] = 0.3;
            if (!model_.contains("b")) model_["b"] = 0.6;
            if (!model_.contains("x0")) model_["x0"] = 0.0;
        } else if (name == "rbm") {
            if (!model_.contains("preset") && !model_.contains("W")) model_["preset"] = "demo";
            if (model_.value("preset", std::string()) == "demo") {
                if (!model_.contains("d_v")) model_["d_v"] = 3;
                if (!model_.contains("d_h")) model_["d_h"] = 3;
            }
            if (!model_.contains("rebuild_radius")) model_["rebuild_radius"] = 0.0;
        } else if (name == "sgd_logistic") {
            if (!model_.contains("features") && !model_.contains("preset")) model_["preset"] = "demo";
        } else if (name == "wang_landau") {
            if (!model_.contains("f") && !model_.contains("preset")) model_["preset"] = "two_stratum";
        }
    }

    void normalize_schedule() {
        const std::string kind = schedule_.value("kind", std::string("harmonic"));
        schedule_["kind"] = kind;
        if (kind == "polynomial" && !schedule_.contains("rho")) schedule_["rho"] = 0.5;
        if (kind == "constant" && !schedule_.contains("eps")) schedule_["eps"] = 0.1;
        if (kind != "harmonic" && kind != "polynomial" && kind != "constant" && kind != "custom")
            throw ConfigError("config: unknown schedule kind '" + kind + "'");
    }

    nlohmann::json model_;
    nlohmann::json schedule_;
    double horizon_ = 1.0;
    std::uint64_t seed_ = 1;
    int threads_ = 1;
    std::string out_ = "out";
    bool timestamp_ = true;
    nlohmann::json params_;
};

}  // namespace sald
