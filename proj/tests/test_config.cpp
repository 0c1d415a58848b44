#include <catch2/catch_amalgamated.hpp>

#include "test_util.hpp"

using namespace paraosc;
using Catch::Approx;

namespace {

Json base_config() {
    return Json::parse(R"({
        "model": {"kind": "para_fermi", "order": 2},
        "coupling": {"g": 1.0},
        "truncation": {"d_x": 4, "d_y": 4},
        "time_grid": {"values": [0.0, 0.5, 1.0]}
    })");
}

void expect_error_at(const Json& cfg, const std::string& path) {
    try {
        parse_run_config(cfg);
        FAIL("expected a config error at '" << path << "'");
    } catch (const ConfigError& e) {
        INFO(e.what());
        REQUIRE(e.field_path == path);
    }
}

}  // namespace

TEST_CASE("a minimal configuration parses with documented defaults") {
    const RunConfig cfg = parse_run_config(base_config());
    REQUIRE(cfg.model.kind == ParaKind::para_fermi);
    REQUIRE(cfg.model.order == 2);
    REQUIRE(cfg.model.branch == ParaBranch::spin_down);
    REQUIRE(cfg.g == 1.0);
    REQUIRE_FALSE(cfg.envelope.has_value());
    REQUIRE(cfg.space.d_x == 4);
    REQUIRE(cfg.space.d_y == 4);
    REQUIRE(cfg.initial.vacuum);
    REQUIRE_FALSE(cfg.grid.dimensionless);
    REQUIRE(cfg.grid.values == std::vector<double>{0.0, 0.5, 1.0});
    REQUIRE_FALSE(cfg.noise.enabled);
    REQUIRE_FALSE(cfg.sampling.enabled);
    REQUIRE(cfg.outputs.csv == "trajectory.csv");
    REQUIRE(cfg.outputs.svg.empty());
    REQUIRE(cfg.method == EvolveMethod::matrix_exponential);
    REQUIRE(cfg.max_step == 0.0);
}

TEST_CASE("uniform grids expand from t_max and points") {
    Json j = base_config();
    j["time_grid"] = {{"t_max", 2.0}, {"points", 5}};
    const RunConfig cfg = parse_run_config(j);
    REQUIRE(cfg.grid.values == std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0});
}

TEST_CASE("sideband-pair couplings average into the drive strength") {
    Json j = base_config();
    j["coupling"] = {{"omega_r", 1.2}, {"omega_b", 0.8}};
    const RunConfig cfg = parse_run_config(j);
    REQUIRE(cfg.envelope.has_value());
    REQUIRE(cfg.envelope->first == 1.2);
    REQUIRE(cfg.envelope->second == 0.8);
    REQUIRE(cfg.coupling() == Approx(1.0));
}

TEST_CASE("dimensionless grids convert through the coupling") {
    Json j = base_config();
    j["coupling"] = {{"g", 4.0}};
    j["time_grid"] = {{"unit", "dimensionless"}, {"values", {0.0, 1.0, 2.0}}};
    const RunConfig cfg = parse_run_config(j);
    REQUIRE(cfg.grid.dimensionless);
    REQUIRE(cfg.times_seconds() == std::vector<double>{0.0, 0.25, 0.5});

    // grids in seconds pass through untouched
    const RunConfig plain = parse_run_config(base_config());
    REQUIRE(plain.times_seconds() == plain.grid.values);
}

TEST_CASE("initial states resolve to the requested basis vector") {
    const RunConfig vac = parse_run_config(base_config());
    const StateVector v = initial_state(vac);
    // the order-2 fermionic vacuum sits at |down, n_x = 0, n_y = 1>
    const StateVector want = basis_state(vac.space, Spin::down, 0, 1);
    REQUIRE(std::abs(std::abs(v.amplitudes.dot(want.amplitudes)) - 1.0) < 1e-12);

    Json j = base_config();
    j["initial"] = {{"spin", "up"}, {"n_x", 1}, {"n_y", 2}};
    const RunConfig cfg = parse_run_config(j);
    REQUIRE_FALSE(cfg.initial.vacuum);
    const StateVector s = initial_state(cfg);
    REQUIRE(std::abs(s.amplitudes[cfg.space.index(Spin::up, 1, 2)] - Cx(1.0, 0.0)) <
            1e-15);

    Json str = base_config();
    str["initial"] = "vacuum";
    REQUIRE(parse_run_config(str).initial.vacuum);
}

TEST_CASE("every validation failure reports its field path") {
    SECTION("root") {
        expect_error_at(Json::array(), "");
        Json j = base_config();
        j["surprise"] = 1;
        expect_error_at(j, "surprise");
    }

    SECTION("model") {
        Json j = base_config();
        j.erase("model");
        expect_error_at(j, "model");

        j = base_config();
        j["model"]["kind"] = "bogus";
        expect_error_at(j, "model.kind");

        j = base_config();
        j["model"]["order"] = 3;
        expect_error_at(j, "model.order");

        j = base_config();
        j["model"]["order"] = 0;
        expect_error_at(j, "model.order");

        j = base_config();
        j["model"]["branch"] = "sideways";
        expect_error_at(j, "model.branch");

        j = base_config();
        j["model"]["color"] = "red";
        expect_error_at(j, "model.color");
    }

    SECTION("coupling") {
        Json j = base_config();
        j.erase("coupling");
        expect_error_at(j, "coupling");

        j = base_config();
        j["coupling"] = {{"g", 1.0}, {"omega_r", 1.0}};
        expect_error_at(j, "coupling");

        j = base_config();
        j["coupling"] = Json::object();
        expect_error_at(j, "coupling");

        j = base_config();
        j["coupling"] = {{"g", -1.0}};
        expect_error_at(j, "coupling.g");

        j = base_config();
        j["coupling"] = {{"omega_r", 1.0}, {"omega_b", -1.0}};
        expect_error_at(j, "coupling.omega_r");

        j = base_config();
        j["coupling"] = {{"omega_b", 1.0}};
        expect_error_at(j, "coupling.omega_r");
    }

    SECTION("truncation") {
        Json j = base_config();
        j.erase("truncation");
        expect_error_at(j, "truncation");

        j = base_config();
        j["truncation"]["d_x"] = 0;
        expect_error_at(j, "truncation.d_x");

        // order-4 ladder does not fit in two mode-y levels
        j = base_config();
        j["model"]["order"] = 4;
        j["truncation"] = {{"d_x", 6}, {"d_y", 2}};
        expect_error_at(j, "truncation");
    }

    SECTION("initial") {
        Json j = base_config();
        j["initial"] = "excited";
        expect_error_at(j, "initial");

        j = base_config();
        j["initial"] = {{"n_x", 0}, {"n_y", 0}};
        expect_error_at(j, "initial.spin");

        j = base_config();
        j["initial"] = {{"spin", "left"}, {"n_x", 0}, {"n_y", 0}};
        expect_error_at(j, "initial.spin");

        j = base_config();
        j["initial"] = {{"spin", "down"}, {"n_x", 9}, {"n_y", 0}};
        expect_error_at(j, "initial.n_x");

        j = base_config();
        j["initial"] = {{"spin", "down"}, {"n_x", 0}, {"n_y", -1}};
        expect_error_at(j, "initial.n_y");
    }

    SECTION("time grid") {
        Json j = base_config();
        j.erase("time_grid");
        expect_error_at(j, "time_grid");

        j = base_config();
        j["time_grid"]["unit"] = "minutes";
        expect_error_at(j, "time_grid.unit");

        j = base_config();
        j["time_grid"] = {{"values", {0.0, 1.0}}, {"t_max", 1.0}};
        expect_error_at(j, "time_grid");

        j = base_config();
        j["time_grid"] = {{"values", Json::array()}};
        expect_error_at(j, "time_grid.values");

        j = base_config();
        j["time_grid"] = {{"values", {0.0, "x"}}};
        expect_error_at(j, "time_grid.values");

        j = base_config();
        j["time_grid"] = {{"values", {1.0, 0.5}}};
        expect_error_at(j, "time_grid.values");

        j = base_config();
        j["time_grid"] = {{"t_max", -1.0}, {"points", 5}};
        expect_error_at(j, "time_grid.t_max");

        j = base_config();
        j["time_grid"] = {{"t_max", 1.0}, {"points", 1}};
        expect_error_at(j, "time_grid.points");

        j = base_config();
        j["time_grid"] = {{"points", 5}};
        expect_error_at(j, "time_grid.t_max");

        j = base_config();
        j["coupling"] = {{"g", 0.0}};
        j["time_grid"] = {{"unit", "dimensionless"}, {"values", {0.0, 1.0}}};
        expect_error_at(j, "time_grid.unit");
    }

    SECTION("noise") {
        Json j = base_config();
        j["noise"] = {{"heating_rate_x", -1.0}};
        expect_error_at(j, "noise.heating_rate_x");

        j = base_config();
        j["noise"] = {{"heating_rate_y", -1.0}};
        expect_error_at(j, "noise.heating_rate_y");

        j = base_config();
        j["noise"] = {{"heating_rate_x", 10.0}, {"n_th", 0.0}};
        expect_error_at(j, "noise.n_th");

        // per-second rates are meaningless on a dimensionless grid
        j = base_config();
        j["time_grid"] = {{"unit", "dimensionless"}, {"values", {0.0, 1.0}}};
        j["noise"] = {{"heating_rate_x", 10.0}};
        expect_error_at(j, "noise.enabled");
    }

    SECTION("sampling and outputs") {
        Json j = base_config();
        j["sampling"] = {{"shots", 0}};
        expect_error_at(j, "sampling.shots");

        j = base_config();
        j["sampling"] = {{"seed", -1}};
        expect_error_at(j, "sampling.seed");

        j = base_config();
        j["outputs"] = {{"csv", ""}};
        expect_error_at(j, "outputs.csv");

        j = base_config();
        j["outputs"] = {{"pdf", "out.pdf"}};
        expect_error_at(j, "outputs.pdf");
    }

    SECTION("method and step") {
        Json j = base_config();
        j["method"] = "euler";
        expect_error_at(j, "method");

        j = base_config();
        j["max_step"] = -0.1;
        expect_error_at(j, "max_step");
    }
}

TEST_CASE("error messages carry the offending path") {
    Json j = base_config();
    j["model"]["kind"] = "bogus";
    try {
        parse_run_config(j);
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        REQUIRE(std::string(e.what()).rfind("config error at model.kind: ", 0) == 0);
    }
}

TEST_CASE("the normalized echo re-parses to the same run") {
    Json j = base_config();
    j["model"] = {{"kind", "para_bose"}, {"order", 4}, {"branch", "spin_up"}};
    j["coupling"] = {{"omega_r", 1.1}, {"omega_b", 0.9}};
    j["truncation"] = {{"d_x", 8}, {"d_y", 8}};
    j["initial"] = {{"spin", "up"}, {"n_x", 0}, {"n_y", 1}};
    j["time_grid"] = {{"t_max", 1.0}, {"points", 4}};
    j["noise"] = {{"heating_rate_x", 70.0}, {"n_th", 20.0}};
    j["sampling"] = {{"shots", 150}, {"seed", 7}};
    j["outputs"] = {{"csv", "run.csv"}, {"svg", "run.svg"}, {"json", "run.json"},
                    {"snapshots", true}};
    j["method"] = "ode_rk";
    j["max_step"] = 0.001;
    j["metadata"] = {{"note", "round trip"}};

    const RunConfig cfg = parse_run_config(j);
    const Json echo = config_to_json(cfg);
    const RunConfig again = parse_run_config(echo);

    REQUIRE(config_to_json(again) == echo);
    REQUIRE(again.model.kind == ParaKind::para_bose);
    REQUIRE(again.model.branch == ParaBranch::spin_up);
    REQUIRE(again.envelope.has_value());
    REQUIRE(again.grid.values == cfg.grid.values);
    REQUIRE(again.noise.n_th.has_value());
    REQUIRE(*again.noise.n_th == 20.0);
    REQUIRE(again.sampling.seed == 7);
    REQUIRE(again.outputs.svg == "run.svg");
    REQUIRE(again.method == EvolveMethod::ode_rk);
    REQUIRE(again.max_step == 0.001);
    REQUIRE(again.metadata["note"] == "round trip");
}
