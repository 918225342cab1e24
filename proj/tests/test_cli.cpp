#include "oracle.hpp"

#include "cantorlap/cli.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cantorlap;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("cantorlap_test_" + name);
    fs::remove_all(dir);
    return dir;
}

ErrorCode parse_error(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("config accepted: " << text);
    return ErrorCode::kInvalidArgument;
}

const char* kFibonacci = R"({"matrix": [[1,1],[1,0]], "gamma": 7, "level": 4,
    "hodge": {"dual_basis": 1},
    "heat": {"times": [0.05, 0.5]},
    "cohomology": {"functions": [[["0:0,0", 1.0], ["1:1,2", -2.0]]]}})";

}  // namespace

TEST_CASE("config parsing") {
    const RunConfig cfg = parse_config_text(R"({"matrix": [[2]], "gamma": 1.5, "level": 6,
        "potential": {"depth": 1, "values": {"0": 0.5}}, "weighting": "conformal"})");
    CHECK(cfg.matrix(0, 0) == 2);
    CHECK(cfg.gamma == 1.5);
    CHECK(cfg.level == 6);
    CHECK(cfg.potential_given);
    CHECK(cfg.potential.values.at({0}) == 0.5);
    CHECK(cfg.weighting == StartWeighting::kConformal);

    CHECK(parse_error("{") == ErrorCode::kConfigError);
    CHECK(parse_error(R"({"gamma": 1, "level": 2})") == ErrorCode::kConfigError);
    CHECK(parse_error(R"({"matrix": [[1,1]], "gamma": 1, "level": 2})") == ErrorCode::kConfigError);
    CHECK(parse_error(R"({"matrix": [[2]], "gamma": -1, "level": 2})") == ErrorCode::kConfigError);
    CHECK(parse_error(R"({"matrix": [[2]], "gamma": 1, "level": 0})") == ErrorCode::kConfigError);
    CHECK(parse_error(R"({"matrix": [[2]], "gamma": 1, "level": 2, "potential": {"values": {"a": 1}}})") ==
          ErrorCode::kConfigError);
    CHECK(parse_error(R"({"matrix": [[2]], "gamma": 1, "level": 2, "weighting": "other"})") == ErrorCode::kConfigError);

    CHECK(parse_config_text(kFibonacci).hash == parse_config_text(kFibonacci).hash);
    CHECK(parse_config_text(kFibonacci).hash != cfg.hash);
    CHECK(fnv1a64("") == 14695981039346656037ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("function JSON round trip") {
    const Diagram fib = oracle::fibonacci();
    const PathTree tree(fib, 2);
    const LCFunction f = function_from_json(fib, nlohmann::json::parse(R"([["0:0,2", 1.5], ["1:1,0", -1]])"));
    CHECK(f.level == 2);
    CHECK(f.values == std::vector<double>{0, 1.5, 0, -1, 0});
    const LCFunction back = function_from_json(fib, function_to_json(tree, f));
    CHECK(back.values == f.values);
    CHECK_THROWS_AS(function_from_json(fib, nlohmann::json::parse(R"([["0:0,1", 1]])")), Error);
    CHECK_THROWS_AS(function_from_json(fib, nlohmann::json::parse(R"([["0:0", 1], ["0:0,2", 1]])")), Error);
}

TEST_CASE("exit codes") {
    CHECK(exit_code_for(ErrorCode::kConfigError) == 2);
    CHECK(exit_code_for(ErrorCode::kNotPrimitive) == 2);
    CHECK(exit_code_for(ErrorCode::kCapacityExceeded) == 3);
    CHECK(exit_code_for(ErrorCode::kGammaTooSmall) == 4);
    CHECK(exit_code_for(ErrorCode::kThresholdViolation) == 4);
    CHECK(exit_code_for(ErrorCode::kSingularGram) == 1);
    CHECK(parse_command("weyl") == Command::kWeyl);
    CHECK_THROWS_AS(parse_command("plot"), Error);
}

TEST_CASE("commands write deterministic files with headers") {
    const RunConfig cfg = parse_config_text(kFibonacci);
    for (Command cmd : {Command::kSpectrum, Command::kHeat, Command::kCohomology, Command::kHodge, Command::kGibbs}) {
        RunOptions a, b;
        a.out_dir = scratch("a");
        b.out_dir = scratch("b");
        b.threads = 3;
        const RunResult ra = run_command(cmd, cfg, a);
        const RunResult rb = run_command(cmd, cfg, b);
        REQUIRE(ra.files.size() == rb.files.size());
        REQUIRE_FALSE(ra.files.empty());
        for (std::size_t i = 0; i < ra.files.size(); ++i) {
            CHECK(ra.files[i].filename() == rb.files[i].filename());
            const std::string text = slurp(ra.files[i]);
            CHECK(text == slurp(rb.files[i]));
            CHECK(text.find("config_hash") != std::string::npos);
            CHECK(text.find("d_psi") != std::string::npos);
        }
    }
    RunOptions o;
    o.out_dir = scratch("c");
    const RunResult spectrum = run_command(Command::kSpectrum, cfg, o);
    const std::string csv = slurp(o.out_dir / "spectrum.csv");
    CHECK(csv.find("level,generator,eigenvalue,multiplicity") != std::string::npos);
    CHECK(spectrum.report.find("smallest eigenvalue: 1") != std::string::npos);
}

TEST_CASE("command failures map to error codes") {
    RunOptions o;
    o.out_dir = scratch("d");
    const RunConfig low = parse_config_text(R"({"matrix": [[1,1],[1,0]], "gamma": 0.5, "level": 3})");
    try {
        run_command(Command::kSpectrum, low, o);
        FAIL("accepted gamma below d_psi");
    } catch (const Error& e) {
        CHECK(exit_code_for(e.code()) == 4);
    }
    const RunConfig mid = parse_config_text(R"({"matrix": [[1,1],[1,0]], "gamma": 5, "level": 3})");
    try {
        run_command(Command::kHodge, mid, o);
        FAIL("accepted gamma below the Hodge threshold");
    } catch (const Error& e) {
        CHECK(exit_code_for(e.code()) == 4);
    }
    const RunConfig swap = parse_config_text(R"({"matrix": [[0,1],[1,0]], "gamma": 2, "level": 3})");
    try {
        run_command(Command::kGibbs, swap, o);
        FAIL("accepted an imprimitive matrix");
    } catch (const Error& e) {
        CHECK(exit_code_for(e.code()) == 2);
    }
    RunOptions capped = o;
    capped.cap = 100;
    const RunConfig deep = parse_config_text(R"({"matrix": [[2]], "gamma": 2, "level": 12})");
    try {
        run_command(Command::kSpectrum, deep, capped);
        FAIL("ignored the path cap");
    } catch (const Error& e) {
        CHECK(exit_code_for(e.code()) == 3);
    }
    RunOptions exact = o;
    exact.exact = true;
    const RunConfig a2 = parse_config_text(R"({"matrix": [[2]], "gamma": 1, "level": 5})");
    run_command(Command::kSpectrum, a2, exact);
    const std::string csv = slurp(o.out_dir / "spectrum.csv");
    CHECK(csv.find(",3/2,2\n") != std::string::npos);
    const RunConfig partial = parse_config_text(R"({"matrix": [[1,1],[1,0]], "gamma": 2, "level": 3,
        "potential": {"depth": 1, "values": {"0": 0.2}}})");
    CHECK(run_command(Command::kGibbs, partial, o).warnings.size() == 1);
}
