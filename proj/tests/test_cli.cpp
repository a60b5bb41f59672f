#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "demoforge/cli.hpp"
#include "demoforge/fsutil.hpp"
#include "demoforge/json_io.hpp"
#include "demoforge/winprob.hpp"

using namespace demoforge;

namespace {

namespace fs = std::filesystem;

struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};

CliResult run(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

// Fresh per-test scratch directory.
struct TempDir {
    fs::path path;

    explicit TempDir(const char* name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }

    std::string operator/(const char* leaf) const { return (path / leaf).string(); }
};

// generate + parse into the scratch dir; returns the document path.
std::string parsed_doc(const TempDir& tmp, const char* leaf, int seed, int rounds) {
    const std::string demo_dir = tmp / "demo";
    REQUIRE(run({"generate", "--seed", std::to_string(seed), "--rounds", std::to_string(rounds),
                 "--tick-rate", "16", "--out", demo_dir})
                .code == 0);
    const std::string doc = tmp / leaf;
    REQUIRE(run({"parse", demo_dir + "/match.esdm", "--out", doc}).code == 0);
    return doc;
}

}  // namespace

TEST_CASE("help and usage errors use the documented exit codes") {
    CHECK(run({"--help"}).code == 0);
    CHECK(run({"--help"}).out.find("winprob") != std::string::npos);
    CHECK(run({}).code == 1);
    CHECK(run({"--bogus"}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);

    const CliResult bad_flag = run({"parse", "x.esdm", "--frob"});
    CHECK(bad_flag.code == 1);
    CHECK(bad_flag.err.find("error") != std::string::npos);
}

TEST_CASE("generate then parse recovers the requested round count") {
    TempDir tmp("demoforge_cli_roundtrip");
    const std::string doc_path = parsed_doc(tmp, "match.json", 1, 25);

    const DemoDocument doc = read_document_file(doc_path);
    CHECK(doc.game_rounds.size() == 25);
    CHECK(doc.meta.map_name == "de_forge");
    CHECK(fs::exists(tmp.path / "demo" / "truth.json"));

    // stdout mode emits the same document text
    const CliResult piped = run({"parse", tmp / "demo/match.esdm"});
    CHECK(piped.code == 0);
    const DemoDocument from_stdout = parse_json(piped.out);
    CHECK(from_stdout.game_rounds.size() == 25);
}

TEST_CASE("parse reports missing or corrupt demos with exit 1") {
    const CliResult missing = run({"parse", "/nonexistent/never.esdm"});
    CHECK(missing.code == 1);
    CHECK(missing.err.find("never.esdm") != std::string::npos);

    TempDir tmp("demoforge_cli_corrupt");
    const std::string junk = tmp / "junk.esdm";
    write_file_atomic(junk, "this is not a demo");
    CHECK(run({"parse", junk}).code == 1);
}

TEST_CASE("multi-demo parse needs a directory and honors the thread cap") {
    TempDir tmp("demoforge_cli_multi");
    REQUIRE(run({"generate", "--seed", "3", "--rounds", "4", "--tick-rate", "16", "--out",
                 tmp / "a"})
                .code == 0);
    REQUIRE(run({"generate", "--seed", "4", "--rounds", "5", "--tick-rate", "16", "--out",
                 tmp / "b"})
                .code == 0);
    const std::string demo_a = tmp / "a/match.esdm";
    const std::string demo_b = tmp / "b/match.esdm";

    CHECK(run({"parse", demo_a, demo_b}).code == 1);
    CHECK(run({"parse", demo_a, demo_b, "--out", tmp / "missing_dir"}).code == 1);

    const std::string out_dir = tmp / "docs";
    fs::create_directories(out_dir);
    setenv("DEMOFORGE_THREADS", "1", 1);
    const CliResult ok = run({"parse", demo_a, demo_b, "--out", out_dir});
    unsetenv("DEMOFORGE_THREADS");
    CHECK(ok.code == 0);
    CHECK(fs::exists(fs::path(out_dir) / "match.json"));

    // distinct basenames land in distinct output files
    const std::string renamed = tmp / "second.esdm";
    fs::copy_file(demo_b, renamed);
    CHECK(run({"parse", demo_a, renamed, "--out", out_dir}).code == 0);
    CHECK(fs::exists(fs::path(out_dir) / "second.json"));
    CHECK(read_document_file((fs::path(out_dir) / "second.json").string()).game_rounds.size() ==
          5);
}

TEST_CASE("parse --out honors the gzip extension") {
    TempDir tmp("demoforge_cli_gz");
    const std::string doc_path = parsed_doc(tmp, "match.json.gz", 5, 6);

    std::ifstream in(doc_path, std::ios::binary);
    unsigned char magic[2] = {0, 0};
    in.read(reinterpret_cast<char*>(magic), 2);
    CHECK(magic[0] == 0x1f);
    CHECK(magic[1] == 0x8b);
    CHECK(read_document_file(doc_path).game_rounds.size() == 6);
}

TEST_CASE("stats writes CSV and an optional summary") {
    TempDir tmp("demoforge_cli_stats");
    const std::string doc_path = parsed_doc(tmp, "match.json", 7, 8);

    const CliResult piped = run({"stats", doc_path});
    CHECK(piped.code == 0);
    CHECK(piped.out.starts_with("playerId,name,kills"));

    const std::string csv_path = tmp / "stats.csv";
    const std::string summary_path = tmp / "summary.json";
    const CliResult filed =
        run({"stats", doc_path, "--csv", csv_path, "--summary", summary_path});
    CHECK(filed.code == 0);
    CHECK(filed.out.empty());
    CHECK(read_file(csv_path).starts_with("playerId,"));
    CHECK(read_file(summary_path).find("\"rounds\": 8") != std::string::npos);
}

TEST_CASE("heatmap renders an SVG and rejects bad selectors") {
    TempDir tmp("demoforge_cli_heatmap");
    const std::string doc_path = parsed_doc(tmp, "match.json", 9, 6);

    const std::string svg_path = tmp / "kills.svg";
    CHECK(run({"heatmap", doc_path, "--action", "kill", "--coord", "victim", "--nx", "8", "--ny",
               "8", "--out", svg_path})
              .code == 0);
    CHECK(read_file(svg_path).starts_with("<svg"));

    CHECK(run({"heatmap", doc_path, "--action", "explosion", "--coord", "actor", "--out",
               tmp / "x.svg"})
              .code == 1);
    CHECK(run({"heatmap", doc_path, "--action", "flash", "--coord", "actor", "--out",
               tmp / "x.svg"})
              .code == 1);

    const std::string bounded = tmp / "bounded.svg";
    CHECK(run({"heatmap", doc_path, "--action", "weaponFire", "--coord", "actor", "--bounds", "0",
               "3200", "0", "3200", "--out", bounded})
              .code == 0);
    CHECK(read_file(bounded).find("out of bounds 0") != std::string::npos);
}

TEST_CASE("generate validates anomaly names and config ranges") {
    TempDir tmp("demoforge_cli_gen");
    CHECK(run({"generate", "--seed", "1", "--rounds", "3", "--tick-rate", "16", "--anomaly",
               "gremlins", "--out", tmp / "g"})
              .code == 1);
    CHECK(run({"generate", "--skill-gap", "7", "--out", tmp / "g"}).code == 1);
    CHECK(run({"generate", "--seed", "1", "--rounds", "3", "--tick-rate", "16", "--anomaly",
               "restart", "--out", tmp / "g"})
              .code == 0);
    // the injected restart is cleaned away
    const std::string doc = tmp / "g.json";
    REQUIRE(run({"parse", tmp / "g/match.esdm", "--out", doc}).code == 0);
    CHECK(read_document_file(doc).game_rounds.size() == 3);
}

TEST_CASE("winprob pipeline trains, evaluates and draws curves") {
    TempDir tmp("demoforge_cli_winprob");
    const std::string doc_path = parsed_doc(tmp, "match.json", 11, 20);

    const std::string ds_path = tmp / "ds.json";
    CHECK(run({"winprob", "build", doc_path, "--split", "60/20/20", "--out", ds_path}).code == 1);
    REQUIRE(run({"winprob", "build", doc_path, "--seed", "5", "--out", ds_path}).code == 0);
    const Dataset ds = read_dataset_file(ds_path);
    CHECK(ds.train.size() == 14);
    CHECK(ds.val.size() == 2);
    CHECK(ds.test.size() == 4);

    const std::string weights = tmp / "lr.json";
    CHECK(run({"winprob", "train", ds_path, "--model", "svm", "--out", weights}).code == 1);
    REQUIRE(run({"winprob", "train", ds_path, "--model", "logreg", "--out", weights}).code == 0);
    CHECK(load_model(weights).kind == ModelKind::LogisticRegression);

    CHECK(run({"winprob", "eval", ds_path, "--model-file", tmp / "missing.json"}).code == 1);
    const CliResult eval = run({"winprob", "eval", ds_path, "--model-file", weights});
    CHECK(eval.code == 0);
    CHECK(eval.out.find("\"logLoss\"") != std::string::npos);

    const std::string report = tmp / "report.json";
    const std::string rel_svg = tmp / "rel.svg";
    const std::string bins_csv = tmp / "bins.csv";
    CHECK(run({"winprob", "eval", ds_path, "--model-file", weights, "--out", report, "--csv",
               bins_csv, "--svg", rel_svg})
              .code == 0);
    CHECK(read_file(bins_csv).starts_with("bin,lo,hi"));
    CHECK(read_file(rel_svg).find("class=\"diagonal\"") != std::string::npos);

    const CliResult curve = run({"winprob", "curve", doc_path, "--model-file", weights, "--round",
                                 "2"});
    CHECK(curve.code == 0);
    CHECK(curve.out.starts_with("tick,ctWinProb\n"));
    CHECK(run({"winprob", "curve", doc_path, "--model-file", weights, "--round", "999"}).code ==
          1);
    const std::string curve_svg = tmp / "curve.svg";
    CHECK(run({"winprob", "curve", doc_path, "--model-file", weights, "--round", "2", "--out",
               curve_svg})
              .code == 0);
    CHECK(read_file(curve_svg).find("class=\"curve\"") != std::string::npos);
}

TEST_CASE("repeated runs with one seed write identical bytes") {
    TempDir tmp("demoforge_cli_det");
    for (const char* side : {"x", "y"}) {
        const fs::path base = tmp.path / side;
        fs::create_directories(base);
        REQUIRE(run({"generate", "--seed", "21", "--rounds", "6", "--tick-rate", "16", "--out",
                     (base / "g").string()})
                    .code == 0);
        REQUIRE(run({"parse", (base / "g" / "match.esdm").string(), "--out",
                     (base / "m.json.gz").string()})
                    .code == 0);
    }
    const auto bytes = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    CHECK(bytes(tmp.path / "x/g/match.esdm") == bytes(tmp.path / "y/g/match.esdm"));
    CHECK(bytes(tmp.path / "x/g/truth.json") == bytes(tmp.path / "y/g/truth.json"));
    // the two documents embed different sourceFile paths, so compare them
    // with that one field neutralized instead of byte for byte
    const DemoDocument dx = read_document_file((tmp.path / "x/m.json.gz").string());
    DemoDocument dy = read_document_file((tmp.path / "y/m.json.gz").string());
    CHECK(dx.meta.source_file != dy.meta.source_file);
    dy.meta.source_file = dx.meta.source_file;
    CHECK(dx == dy);
}
