#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_util.hpp"

using tfr_test::contains;
using tfr_test::fixture_path;
using tfr_test::run_cli;

TEST_CASE("analyze reports structural data as JSON") {
    auto r = run_cli("analyze " + fixture_path("two-component.model"));
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "\"schema\": 1"));
    CHECK(contains(r.out, "\"n\": 6"));
    CHECK(contains(r.out, "\"r\": 3"));
    CHECK(contains(r.out, "\"s\": 3"));
    CHECK(contains(r.out, "\"deficiency_fast\": 0"));
    CHECK(contains(r.out, "\"weakly_reversible_fast\": true"));

    auto r2 = run_cli("analyze " + fixture_path("dual-phosphorylation.model"));
    CHECK(r2.exit_code == 0);
    CHECK(contains(r2.out, "\"deficiency_fast\": 1"));
    CHECK(contains(r2.out, "\"weakly_reversible_fast\": false"));
}

TEST_CASE("reduce emits the reduced system") {
    auto r = run_cli("reduce " + fixture_path("example-1.model"));
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "\"path\": \"complex_balanced\""));
    CHECK(contains(r.out, "(-3*v1^3*v2 - 2*v1^2*v2 + 3*v1*v2^2 + 2*v2^2)/(v1 + v2 + 1)"));
    CHECK(contains(r.out, "(3*v1^2*v2^2 + v1^2*v2 - 3*v2^3 - v2^2)/(v1 + v2 + 1)"));
}

TEST_CASE("reduce honors explicit parameterization choices") {
    auto r = run_cli("reduce " + fixture_path("example-1.model") +
                     " --param noninteracting:X3");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "\"path\": \"via_L\""));
    CHECK(contains(r.out, "\"kind\": \"rational\""));

    auto r2 = run_cli("reduce " + fixture_path("example-3.model") + " --param user");
    CHECK(r2.exit_code == 0);
    CHECK(contains(r2.out, "\"kind\": \"user\""));

    auto r3 = run_cli("reduce " + fixture_path("coupled-oscillator.model"));
    CHECK(r3.exit_code == 0);
    CHECK(contains(r3.out, "(-v1^4 + v1^3)/2"));
}

TEST_CASE("reduce --latex renders formulas") {
    auto r = run_cli("reduce " + fixture_path("coupled-oscillator.model") + " --latex");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "\\\\frac{"));  // escaped inside JSON
}

TEST_CASE("exit code 2: missing file and bad flags") {
    CHECK(run_cli("reduce /nonexistent/path.model").exit_code == 2);
    CHECK(run_cli("simulate " + fixture_path("example-1.model") +
                  " --v0 1,1 --eps-ladder 0.0,0.01").exit_code == 2);
    CHECK(run_cli("simulate " + fixture_path("example-1.model") +
                  " --v0 -1,1").exit_code == 2);
    // parse error in the model file
    std::string bad = tfr_test::write_temp_model(
        "@species X1 X2\n@fast\nX1 + -> X2 : 1\n", "cli_bad_syntax");
    CHECK(run_cli("reduce " + bad).exit_code == 2);
}

TEST_CASE("exit code 4: no reduction path") {
    auto r = run_cli("reduce " + fixture_path("dual-phosphorylation.model") +
                     " --param complexbalanced");
    CHECK(r.exit_code == 4);
    CHECK(contains(r.out, "weakly reversible"));
}

TEST_CASE("verify passes on all bundled fixtures") {
    for (const char* name :
         {"example-1.model", "example-2.model", "example-3.model",
          "two-component.model", "two-component-trivial.model",
          "dual-phosphorylation.model", "coupled-oscillator.model"}) {
        auto r = run_cli("verify " + fixture_path(name));
        CHECK_MESSAGE(r.exit_code == 0, name << "\n" << r.out);
        CHECK_FALSE(contains(r.out, "FAIL"));
    }
}

TEST_CASE("exit code 6: verify flags a wrong parameterization") {
    // oscillator fixture with a corrupted @phi (h0 does not vanish on it)
    std::string text = tfr_test::slurp(fixture_path("coupled-oscillator.model"));
    auto pos = text.find("@phi");
    REQUIRE(pos != std::string::npos);
    std::string corrupted = text.substr(0, pos) + "@phi\nv1\n2 * v1\n@L\n1, 1\n";
    std::string path = tfr_test::write_temp_model(corrupted, "cli_corrupt_phi");
    auto r = run_cli("verify " + path);
    CHECK(r.exit_code == 6);
    CHECK(contains(r.out, "FAIL"));
}

TEST_CASE("simulate reports a first-order convergence ladder") {
    auto r = run_cli("simulate " + fixture_path("example-1.model") +
                     " --v0 2,1 --tol 1e-10");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "\"errors_monotone_decreasing\": true"));
    CHECK(contains(r.out, "\"ratios_in_first_order_band\": true"));
}

TEST_CASE("simulate writes CSV trajectories") {
    std::string prefix = "/tmp/tfr_test_cli_traj";
    auto r = run_cli("simulate " + fixture_path("example-1.model") +
                     " --v0 2,1 --csv-out " + prefix);
    CHECK(r.exit_code == 0);
    std::string body = tfr_test::slurp(prefix + "-reduced.csv");
    CHECK(contains(body, "tau,v1,v2,x1,x2,x3,residual"));
    // one file per ladder entry for the full system
    CHECK(contains(tfr_test::slurp(prefix + "-full-eps-0.04.csv"), "tau,"));
}

TEST_CASE("output is deterministic across runs") {
    std::string cmd = "reduce " + fixture_path("two-component.model") + " --seed 42";
    auto a = run_cli(cmd);
    auto b = run_cli(cmd);
    CHECK(a.exit_code == 0);
    CHECK(a.out == b.out);

    auto c = run_cli("simulate " + fixture_path("example-1.model") + " --v0 2,1");
    auto d = run_cli("simulate " + fixture_path("example-1.model") + " --v0 2,1");
    CHECK(c.out == d.out);
}

TEST_CASE("strict mode fails when the blanket hypothesis cannot be certified") {
    // strict + a model whose stability samples are fine -> still exit 0
    auto ok = run_cli("reduce " + fixture_path("two-component.model") + " --strict");
    CHECK(ok.exit_code == 0);
}
