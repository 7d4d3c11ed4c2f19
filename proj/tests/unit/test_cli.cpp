#include <doctest.h>

#include "mlv/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mlv/extend.hpp"
#include "mlv/io.hpp"

using namespace mlv;

namespace {

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string fixture(const std::string& name) {
    return std::string(MLV_FIXTURES_DIR) + "/" + name;
}

/// Value of a `key: value` line in a report; a marker when absent.
std::string field(const std::string& report, const std::string& key) {
    std::istringstream in(report);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind(key + ": ", 0) == 0) return line.substr(key.size() + 2);
    return "<missing " + key + ">";
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(bool(in));
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace

TEST_CASE("rank command reports exact invariants for pinned tensors") {
    const CliResult id = run({"rank", fixture("identity2_f2.tensor")});
    CHECK(id.code == 0);
    CHECK(field(id.out, "bias") == "1/4");
    CHECK(field(id.out, "analytic-rank-exact") == "yes");
    CHECK(field(id.out, "analytic-rank") == "2");
    CHECK(field(id.out, "matrix-rank") == "2");
    CHECK(field(id.out, "partition-rank-lower") == "2");
    CHECK(field(id.out, "partition-rank-upper") == "2");
    CHECK(field(id.out, "partition-rank-exact") == "yes");
    CHECK(field(id.out, "partition-witness-verified") == "yes");
    CHECK(id.err.find("elapsed-ms:") != std::string::npos);

    const CliResult zero = run({"rank", fixture("zero_222_f2.tensor")});
    CHECK(zero.code == 0);
    CHECK(field(zero.out, "bias") == "1");
    CHECK(field(zero.out, "analytic-rank") == "0");
    CHECK(field(zero.out, "partition-rank-upper") == "0");
    CHECK(field(zero.out, "partition-witness-terms") == "0");
    CHECK(field(zero.out, "partition-witness-verified") == "yes");

    const CliResult diag = run({"rank", fixture("diag_222_f2.tensor")});
    CHECK(diag.code == 0);
    CHECK(field(diag.out, "bias") == "9/16");
    CHECK(field(diag.out, "analytic-rank-exact") == "no");
    CHECK(field(diag.out, "partition-rank-lower") == "1");
    CHECK(field(diag.out, "partition-rank-upper") == "2");
    CHECK(field(diag.out, "partition-rank-exact") == "yes");

    // A starved search budget keeps the verified upper bound but loses
    // the minimality proof.
    const CliResult starved =
        run({"rank", fixture("diag_222_f2.tensor"), "--exact-prank-budget", "1"});
    CHECK(starved.code == 0);
    CHECK(field(starved.out, "partition-rank-upper") == "2");
    CHECK(field(starved.out, "partition-rank-exact") == "no");
    CHECK(field(starved.out, "partition-witness-verified") == "yes");
}

TEST_CASE("rank command rejects malformed input with the line number") {
    const CliResult bad = run({"rank", fixture("bad.tensor")});
    CHECK(bad.code == 2);
    CHECK(bad.out.empty());
    CHECK(bad.err.find("line 3") != std::string::npos);
    CHECK(bad.err.find("residue") != std::string::npos);

    CHECK(run({"rank", fixture("no_such_file.tensor")}).code == 2);
    CHECK(run({"rank"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);

    const CliResult help = run({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("rank") != std::string::npos);
    CHECK(help.out.find("counterexample") != std::string::npos);
}

TEST_CASE("variety command reports count, floor and walk geometry") {
    const CliResult dot = run({"variety", fixture("dot_f2.variety")});
    CHECK(dot.code == 0);
    CHECK(field(dot.out, "codimension") == "1");
    CHECK(field(dot.out, "points") == "10");
    CHECK(field(dot.out, "density-floor") == "4");
    CHECK(field(dot.out, "floor-satisfied") == "yes");
    CHECK(field(dot.out, "diameter-bound") == "15");
    CHECK(field(dot.out, "connected") == "<missing connected>");

    const CliResult geo = run({"variety", fixture("dot_f2.variety"), "--diameter"});
    CHECK(geo.code == 0);
    CHECK(field(geo.out, "rho-index") == "1");
    CHECK(field(geo.out, "cell-points") == "6");
    CHECK(field(geo.out, "connected") == "yes");
    CHECK(field(geo.out, "diameter") == "3");
    CHECK(field(geo.out, "bound-satisfied") == "yes");

    const CliResult whole = run({"variety", fixture("whole_f2.variety")});
    CHECK(whole.code == 0);
    CHECK(field(whole.out, "codimension") == "0");
    CHECK(field(whole.out, "points") == "16");

    CHECK(run({"variety", fixture("whole_f2.variety"), "--diameter"}).code == 2);
    CHECK(run({"variety", fixture("dot_f2.variety"), "--diameter", "--rho-index", "5"}).code == 2);
}

TEST_CASE("extend pipeline via a map file and via a global restriction") {
    const CliResult from_global = run(
        {"extend", fixture("x1y1_f2.variety"), "--restrict-global", fixture("x2y2_f2.tensor")});
    CHECK(from_global.code == 0);
    CHECK(field(from_global.out, "mode") == "pipeline");
    CHECK(field(from_global.out, "map-points") == "12");
    CHECK(field(from_global.out, "completed") == "yes");
    CHECK(field(from_global.out, "status") == "extended");
    CHECK(field(from_global.out, "global-components") == "1");
    CHECK(field(from_global.out, "agreement-points") == "8");

    const CliResult from_map =
        run({"extend", fixture("x1y1_f2.variety"), fixture("restr_x2y2_on_x1y1_f2.map")});
    CHECK(from_map.code == 0);
    CHECK(field(from_map.out, "agreement-points") == "8");
    // Same partial map, so the certificates are bit-identical.
    CHECK(field(from_map.out, "certificate-digest") ==
          field(from_global.out, "certificate-digest"));

    // Reports are deterministic run to run.
    CHECK(run({"extend", fixture("x1y1_f2.variety"), fixture("restr_x2y2_on_x1y1_f2.map")}).out ==
          from_map.out);

    // A codimension-zero domain hands the global map straight back.
    const CliResult whole = run(
        {"extend", fixture("whole_f2.variety"), "--restrict-global", fixture("x2y2_f2.tensor")});
    CHECK(whole.code == 0);
    CHECK(field(whole.out, "completed") == "yes");
    CHECK(field(whole.out, "agreement-points") == "16");
    CHECK(field(whole.out, "agreement-codimension") == "0");

    CHECK(run({"extend", fixture("x1y1_f2.variety")}).code == 2);
    CHECK(run({"extend", fixture("x1y1_f2.variety"), fixture("restr_x2y2_on_x1y1_f2.map"),
               "--restrict-global", fixture("x2y2_f2.tensor")})
              .code == 2);
}

TEST_CASE("extend pipeline writes the certificate file atomically") {
    const std::string out_path = "/tmp/mlv_cli_test_cert.json";
    std::remove(out_path.c_str());
    const CliResult first =
        run({"extend", fixture("x1y1_f2.variety"), fixture("restr_x2y2_on_x1y1_f2.map"), "--out",
             out_path});
    CHECK(first.code == 0);
    CHECK(field(first.out, "certificate") == out_path);
    const std::string cert = slurp(out_path);
    CHECK(hex64(fnv1a64(cert)) == field(first.out, "certificate-digest"));
    CHECK(cert.find("\"completed\": true") != std::string::npos);
    CHECK(cert.find("\"status\": \"extended\"") != std::string::npos);

    run({"extend", fixture("x1y1_f2.variety"), fixture("restr_x2y2_on_x1y1_f2.map"), "--out",
         out_path});
    CHECK(slurp(out_path) == cert);
    std::remove(out_path.c_str());
}

TEST_CASE("extend rejects a corrupted map with the violation witness") {
    std::string text = slurp(fixture("restr_x2y2_on_x1y1_f2.map"));
    const std::string row = "1 1 0 0 | 0";
    const std::size_t at = text.find(row);
    REQUIRE(at != std::string::npos);
    text.replace(at, row.size(), "1 1 0 0 | 1");
    const std::string path = "/tmp/mlv_cli_test_corrupt.map";
    write_file_atomic(path, text);

    const CliResult bad = run({"extend", fixture("x1y1_f2.variety"), path});
    CHECK(bad.code == 5);
    CHECK(bad.err.find("multilinearity law") != std::string::npos);
    CHECK(bad.err.find("witness") != std::string::npos);
    std::remove(path.c_str());
}

TEST_CASE("extend qr mode reproduces the closed-form table") {
    const SpaceSignature sig(2, {2, 2});
    const Variety whole(sig);
    const MultilinearMapH global(sig, {MultilinearForm(sig, {0, 1}, {0, 0, 0, 1})});
    const std::string expected =
        serialize_map(map_rows(PartialMultilinearMap::restriction(whole, global)));

    const std::vector<std::string> base = {
        "extend",  fixture("whole_f2.variety"), fixture("restr_x2y2_on_dot_f2.map"),
        "--qr",    "--rho",  fixture("identity2_f2.tensor"),
        "--z",     "1,0,1,0"};
    std::vector<std::string> args = base;
    args.insert(args.end(), {"--h0", "0"});
    const CliResult qr = run(args);
    CHECK(qr.code == 0);
    CHECK(field(qr.out, "mode") == "qr");
    CHECK(field(qr.out, "input-points") == "10");
    CHECK(field(qr.out, "result-points") == "16");
    CHECK(field(qr.out, "result-digest") == hex64(fnv1a64(expected)));

    // Different tie-break seeds give the identical table.
    std::vector<std::string> seeded = args;
    seeded.insert(seeded.end(), {"--seed", "5"});
    CHECK(field(run(seeded).out, "result-digest") == hex64(fnv1a64(expected)));

    // Other target value at z: result = x2y2 + x.y pointwise.
    std::map<std::uint64_t, std::vector<std::uint8_t>> shifted;
    for_each_point(sig, [&](const Point& x) {
        const std::uint8_t dot =
            static_cast<std::uint8_t>((x.flat[0] * x.flat[2] + x.flat[1] * x.flat[3]) % 2);
        const std::uint8_t val = static_cast<std::uint8_t>((x.flat[1] * x.flat[3] + dot) % 2);
        shifted[point_rank(sig, x)] = {val};
    });
    const std::string expected_shifted =
        serialize_map(map_rows(PartialMultilinearMap(whole, 1, shifted)));
    std::vector<std::string> args1 = base;
    args1.insert(args1.end(), {"--h0", "1", "--out", "/tmp/mlv_cli_test_qr.map"});
    const CliResult qr1 = run(args1);
    CHECK(qr1.code == 0);
    CHECK(field(qr1.out, "result-digest") == hex64(fnv1a64(expected_shifted)));
    CHECK(slurp("/tmp/mlv_cli_test_qr.map") == expected_shifted);
    std::remove("/tmp/mlv_cli_test_qr.map");

    // Incomplete flag sets are input errors.
    CHECK(run({"extend", fixture("whole_f2.variety"), fixture("restr_x2y2_on_dot_f2.map"),
               "--qr", "--rho", fixture("identity2_f2.tensor")})
              .code == 2);
    CHECK(run({"extend", fixture("whole_f2.variety"), "--restrict-global",
               fixture("x2y2_f2.tensor"), "--qr"})
              .code == 2);
}

TEST_CASE("counterexample command verdicts, scan and pipeline evidence") {
    const CliResult scan2 = run({"counterexample", "--p", "2", "--scan"});
    CHECK(scan2.code == 0);
    CHECK(field(scan2.out, "tables") == "2");
    CHECK(field(scan2.out, "extendable") == "2");
    CHECK(field(scan2.out, "non-extendable") == "0");
    CHECK(field(scan2.out, "first-non-extendable") == "none");

    const CliResult scan3 = run({"counterexample", "--p", "3", "--scan"});
    CHECK(scan3.code == 0);
    CHECK(field(scan3.out, "tables") == "9");
    CHECK(field(scan3.out, "extendable") == "3");
    CHECK(field(scan3.out, "non-extendable") == "6");
    CHECK(field(scan3.out, "first-non-extendable") == "1,0");

    const CliResult zero = run({"counterexample", "--p", "3", "--f", "0,0"});
    CHECK(zero.code == 0);
    CHECK(field(zero.out, "points") == "33");
    CHECK(field(zero.out, "locally-consistent") == "yes");
    CHECK(field(zero.out, "extendable") == "yes");
    CHECK(field(zero.out, "witness-coeffs") == "0,0,0,0");
    CHECK(field(zero.out, "equations") == "33");
    CHECK(field(zero.out, "rank") == "3");

    const CliResult bad = run({"counterexample", "--p", "3", "--f", "0,1"});
    CHECK(bad.code == 0);
    CHECK(field(bad.out, "extendable") == "no");
    CHECK(field(bad.out, "rank-augmented") == "4");

    const CliResult piped = run({"counterexample", "--p", "3", "--f", "1,2", "--pipeline"});
    CHECK(piped.code == 0);
    CHECK(field(piped.out, "extendable") == "yes");
    CHECK(field(piped.out, "pipeline-completed") == "yes");
    CHECK(field(piped.out, "agreement-points") == "33");
    CHECK(field(piped.out, "global-zero") == "no");

    const CliResult strip =
        run({"counterexample", "--p", "3", "--f", "0,1", "--pipeline", "--t", "2"});
    CHECK(strip.code == 0);
    CHECK(field(strip.out, "extendable") == "no");
    CHECK(field(strip.out, "pipeline-completed") == "yes");
    CHECK(field(strip.out, "agreement-points") == "9");
    CHECK(field(strip.out, "global-zero") == "yes");

    const CliResult audit = run({"counterexample", "--p", "3", "--f", "0,1", "--pipeline"});
    CHECK(audit.code == 0);
    CHECK(field(audit.out, "pipeline-completed") == "no");
    CHECK(field(audit.out, "pipeline-status").find("stage 1") != std::string::npos);

    CHECK(run({"counterexample", "--p", "4", "--scan"}).code == 2);
    CHECK(run({"counterexample", "--p", "3"}).code == 2);
    CHECK(run({"counterexample", "--p", "3", "--scan", "--f", "0,1"}).code == 2);
    CHECK(run({"counterexample", "--p", "3", "--f", "0,3"}).code == 2);
    CHECK(run({"counterexample", "--p", "3", "--f", "0"}).code == 2);
}

TEST_CASE("enumeration cap comes from the environment or the flag") {
    const CliResult big_scan = run({"counterexample", "--p", "7", "--scan"});
    CHECK(big_scan.code == 3);
    CHECK(big_scan.err.find("exceeds cap") != std::string::npos);

    setenv("MLV_CAP", "50", 1);
    CHECK(run({"counterexample", "--p", "3", "--f", "0,1"}).code == 3);
    CHECK(run({"--cap", "2000000", "counterexample", "--p", "3", "--f", "0,1"}).code == 0);
    setenv("MLV_CAP", "not-a-number", 1);
    CHECK(run({"counterexample", "--p", "3", "--f", "0,1"}).code == 2);
    unsetenv("MLV_CAP");
    CHECK(run({"counterexample", "--p", "3", "--f", "0,1"}).code == 0);
}
