#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sald/config.hpp"
#include "sald/io.hpp"
#include "sald/models/presets.hpp"

using namespace sald;
namespace fs = std::filesystem;

namespace {
std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}
}  // namespace

TEST_CASE("config round-trips through its normalized echo") {
    auto cfg = ExperimentConfig::from_json(
        nlohmann::json{{"model", {{"name", "two_state"}}}, {"horizon", 2.0}});
    const std::string echo1 = cfg.echo().dump();
    auto cfg2 = ExperimentConfig::from_json(cfg.echo());
    CHECK(echo1 == cfg2.echo().dump());
    CHECK(cfg.hash() == cfg2.hash());
    // defaults are explicit in the echo
    CHECK(cfg.echo()["model"].contains("a"));
    CHECK(cfg.echo()["model"].contains("b"));
    CHECK(cfg.echo().contains("seed"));
    CHECK(cfg.echo().contains("threads"));
}

TEST_CASE("hashes separate different configurations") {
    auto a = ExperimentConfig::from_json(nlohmann::json{{"model", {{"name", "bernoulli"}}}});
    auto b = ExperimentConfig::from_json(
        nlohmann::json{{"model", {{"name", "bernoulli"}, {"p", 0.6}}}});
    CHECK(a.hash() != b.hash());
}

TEST_CASE("model builders dispatch by name") {
    auto cfg = ExperimentConfig::from_json(nlohmann::json{{"model", {{"name", "bernoulli"}}}});
    CHECK(cfg.build_model().name == "bernoulli");

    auto wl = ExperimentConfig::from_json(
        nlohmann::json{{"model", {{"name", "wang_landau"}, {"preset", "multicanonical4"}}}});
    CHECK(wl.build_model().d1 == 4);

    auto iid = ExperimentConfig::from_json(nlohmann::json{
        {"model",
         {{"name", "iid"},
          {"q", {0.5, 0.5}},
          {"g_values", {{0.0}, {1.0}}},
          {"x0", {0.0}}}}});
    CHECK(iid.build_model().space.size == 2);

    CHECK_THROWS_AS(
        ExperimentConfig::from_json(nlohmann::json{{"model", {{"name", "no_such"}}}})
            .build_model(),
        ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json{{"model", {{"p", 0.4}}}}),
                    ConfigError);
}

TEST_CASE("kernel tables snap to the nearest grid point") {
    nlohmann::json mj = {
        {"name", "kernel_table"},
        {"entries",
         {{{"x", {0.0}}, {"matrix", {{0.5, 0.5}, {0.5, 0.5}}}},
          {{"x", {1.0}}, {"matrix", {{0.9, 0.1}, {0.1, 0.9}}}}}},
        {"g_values", {{0.0}, {1.0}}},
        {"x0", {0.0}}};
    auto cfg = ExperimentConfig::from_json(nlohmann::json{{"model", mj}});
    auto m = cfg.build_model();
    CHECK(m.kernel.matrix(scalar_vec(0.1))(0, 0) == 0.5);
    CHECK(m.kernel.matrix(scalar_vec(0.9))(0, 0) == 0.9);
}

TEST_CASE("schedule kinds build from config") {
    for (auto kind : {"harmonic", "polynomial", "constant"}) {
        auto cfg = ExperimentConfig::from_json(nlohmann::json{
            {"model", {{"name", "bernoulli"}}}, {"schedule", {{"kind", kind}}}});
        CHECK_NOTHROW(cfg.build_schedule());
    }
    auto cust = ExperimentConfig::from_json(
        nlohmann::json{{"model", {{"name", "bernoulli"}}},
                       {"schedule", {{"kind", "custom"}, {"steps", {0.5, 0.25}}}}});
    CHECK(cust.build_schedule().t_of(2) == Catch::Approx(0.75));
    CHECK_THROWS_AS(
        ExperimentConfig::from_json(nlohmann::json{{"model", {{"name", "bernoulli"}}},
                                                   {"schedule", {{"kind", "nope"}}}}),
        ConfigError);
}

TEST_CASE("CSV bodies are byte-identical without timestamps") {
    const fs::path dir = fs::temp_directory_path() / "sald_test_io";
    fs::create_directories(dir);
    auto write_once = [&](const fs::path& file) {
        CsvWriter w(file, "deadbeef", {"a", "b"}, false);
        w.row({1.0, 2.5});
        w.row({-0.125, 3.0e-7});
    };
    write_once(dir / "a.csv");
    write_once(dir / "b.csv");
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    CHECK(slurp(dir / "a.csv").find("config=deadbeef") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("paths survive the CSV round trip") {
    const fs::path dir = fs::temp_directory_path() / "sald_test_path";
    fs::create_directories(dir);
    Path p({0.0, 0.25, 1.0}, {make_vec({0.0, 1.0}), make_vec({0.5, 0.25}), make_vec({1.0, -1.0})});
    write_path_csv(dir / "p.csv", p, "cafe", false);
    Path q = read_path_csv(dir / "p.csv");
    REQUIRE(q.breakpoints() == p.breakpoints());
    for (std::size_t j = 0; j < p.breakpoints(); ++j) {
        CHECK(q.time(j) == p.time(j));
        CHECK((q.value(j) - p.value(j)).norm() == 0.0);
    }
    fs::remove_all(dir);
}
