#include <doctest.h>

#include <cmath>
#include <string>

#include "chemsical/chemsical.h"

namespace {

std::string take(char* s) {
    std::string out = s ? s : "";
    cs_string_free(s);
    return out;
}

}  // namespace

TEST_CASE("parse, serialize, check") {
    cs_document* doc = nullptr;
    REQUIRE(cs_document_parse("init A 5\nA -> B @ 0.5\n", &doc) == CS_OK);
    char* text = nullptr;
    REQUIRE(cs_document_serialize(doc, &text) == CS_OK);
    const auto s = take(text);
    CHECK(s.find("init A 5") != std::string::npos);
    CHECK(s.find("A -> B @ 0.5") != std::string::npos);

    int valid = 0;
    char* report = nullptr;
    REQUIRE(cs_document_check(doc, &valid, &report) == CS_OK);
    CHECK(valid == 1);
    CHECK(take(report).find("A + B = 5") != std::string::npos);

    CHECK(cs_document_set_initial(doc, "B", 2) == CS_OK);
    CHECK(cs_document_set_initial(doc, "Q", 2) != CS_OK);
    CHECK(cs_document_set_initial(doc, "1x", 2) != CS_OK);
    cs_document_free(doc);
}

TEST_CASE("errors map to codes") {
    cs_document* doc = nullptr;
    CHECK(cs_document_parse("A + -> B @ 1", &doc) == CS_ERR_PARSE);
    CHECK(doc == nullptr);
    CHECK(std::string(cs_last_error()).find("line 1") != std::string::npos);
    CHECK(cs_document_parse(nullptr, &doc) == CS_ERR_INVALID_ARGUMENT);
    CHECK(cs_document_read_file("/nonexistent/file.crn", &doc) == CS_ERR_IO);
    double kappa[7];
    CHECK(cs_rrc_preset(9, kappa) == CS_ERR_INVALID_ARGUMENT);
    CHECK(cs_rrc_preset(5, kappa) == CS_OK);
    CHECK(kappa[6] == 0.001);
    CHECK(std::string(cs_version()).size() > 0);
}

TEST_CASE("simulate the receiver through handles") {
    cs_chemsical_params p;
    cs_chemsical_params_default(&p);
    CHECK(p.tau1 == 231);
    CHECK(p.translation == CS_TRANSLATE_COPY);
    p.input_count = 300;
    cs_document* doc = nullptr;
    REQUIRE(cs_chemsical_build(&p, &doc) == CS_OK);

    cs_ode_options o;
    cs_ode_options_default(&o);
    o.t_end = 40;
    cs_trajectory* tr = nullptr;
    REQUIRE(cs_simulate_ode(doc, &o, &tr) == CS_OK);
    int s1 = -1, s2 = -1;
    REQUIRE(cs_trajectory_decision(tr, &s1, &s2) == CS_OK);
    CHECK(s1 == 1);
    CHECK(s2 == 0);
    CHECK(cs_trajectory_species_count(tr) == 14);
    CHECK(cs_trajectory_rows(tr) >= 2);
    double v = 0;
    CHECK(cs_trajectory_value(tr, 0, 0, &v) == CS_OK);
    CHECK(cs_trajectory_value(tr, 1000000, 0, &v) == CS_ERR_INVALID_ARGUMENT);
    CHECK(take([&] {
              char* c = nullptr;
              cs_trajectory_csv(tr, &c);
              return c;
          }()).rfind("t,", 0) == 0);
    cs_trajectory_free(tr);

    cs_ssa_options so;
    cs_ssa_options_default(&so);
    so.t_end = 5;
    cs_trajectory *a = nullptr, *b = nullptr;
    REQUIRE(cs_simulate_ssa(doc, &so, 7, 1, &a) == CS_OK);
    REQUIRE(cs_simulate_ssa(doc, &so, 7, 1, &b) == CS_OK);
    char *ca = nullptr, *cb = nullptr;
    cs_trajectory_csv(a, &ca);
    cs_trajectory_csv(b, &cb);
    CHECK(take(ca) == take(cb));
    CHECK(std::string(cs_trajectory_stop_reason(a)) == "t_end");
    cs_trajectory_free(a);
    cs_trajectory_free(b);

    so.t_end = -1;
    CHECK(cs_simulate_ssa(doc, &so, 7, 1, &a) == CS_ERR_INVALID_ARGUMENT);

    char* json = nullptr;
    so.t_end = 2;
    REQUIRE(cs_ensemble_json(doc, 4, 1, &so, 2, &json) == CS_OK);
    CHECK(take(json).find("\"n_traj\"") != std::string::npos);
    cs_document_free(doc);

    p.tau2_0 = 400;
    CHECK(cs_chemsical_build(&p, &doc) == CS_ERR_INVALID_ARGUMENT);
}

TEST_CASE("channel and experiments") {
    cs_channel_params c;
    cs_channel_params_default(&c);
    double tp = 0, l1 = 0, l2 = 0;
    REQUIRE(cs_channel_signal(&c, &tp, &l1, &l2) == CS_OK);
    CHECK(std::abs(l1 - 308.4) < 0.5);
    CHECK(std::abs(l2 - 159.4) < 0.5);

    cs_scenario s;
    cs_scenario_default(&s);
    s.timestamp = 0;
    s.provenance = "unit";
    s.chem.n_max = 3;
    char* csv = nullptr;
    REQUIRE(cs_pmf_csv(&s, &csv) == CS_OK);
    CHECK(take(csv).rfind("# params: unit\nn,p\n0,", 0) == 0);

    double ideal = 0;
    s.chem.n_max = 600;
    REQUIRE(cs_ideal_error(&s, &ideal) == CS_OK);
    CHECK(ideal > 1e-7);
    CHECK(ideal < 1e-4);

    s.stride = 300;
    s.n_traj = 4;
    s.t_end = 10;
    double pe = -1;
    size_t truncated = 99;
    REQUIRE(cs_curve_csv(&s, &csv, &pe, &truncated) == CS_OK);
    CHECK(take(csv).find("n,p_d,stderr") != std::string::npos);
    CHECK(pe >= 0);
    CHECK(truncated == 0);

    const double values[] = {0.001};
    REQUIRE(cs_sweep_csv(&s, CS_SWEEP_KAPPA_AM2, nullptr, values, 1, &csv) == CS_OK);
    CHECK(take(csv).find("param,p_e") != std::string::npos);
    CHECK(cs_sweep_csv(&s, 42, nullptr, nullptr, 0, &csv) == CS_ERR_INVALID_ARGUMENT);
}
