#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "demoforge/json_io.hpp"
#include "demoforge/matchgen.hpp"
#include "demoforge/parse.hpp"
#include "helpers.hpp"
#include "json.hpp"

using namespace demoforge;

namespace {

ServerVars quick_vars() {
    ServerVars vars;
    vars.freeze_time_secs = 2;
    vars.round_time_secs = 10;
    vars.bomb_timer_secs = 5;
    vars.round_end_secs = 1;
    return vars;
}

DemoDocument generated_doc(std::uint64_t seed) {
    GenConfig config;
    config.seed = seed;
    config.tick_rate = 16;
    config.vars = quick_vars();
    const GeneratedMatch m = generate_match(config);
    return parse_demo(m.header, m.events, ParserParams{}, "demo_" + std::to_string(seed) + ".esdm");
}

bool samples_equal(const Sample& a, const Sample& b) {
    return a.label == b.label && a.round_num == b.round_num && a.tick == b.tick &&
           a.vec == b.vec && a.rows == b.rows;
}

}  // namespace

TEST_CASE("an empty document emits the fixed top-level skeleton") {
    DemoDocument doc;
    doc.meta.map_name = "de_forge";
    const std::string text = emit_json(doc);
    CHECK(text.find("\"gameRounds\": []") != std::string::npos);
    CHECK(text.find("\"players\": []") != std::string::npos);
    CHECK(text.ends_with("\n"));
    CHECK(parse_json(text) == doc);
}

TEST_CASE("top-level keys appear in a fixed order") {
    const std::string text = emit_json(generated_doc(11));
    std::size_t last = 0;
    for (const char* key : {"\"mapName\"", "\"tickRate\"", "\"demoVersion\"", "\"sourceFile\"",
                            "\"parserParameters\"", "\"serverVars\"", "\"players\"", "\"cleaning\"",
                            "\"gameRounds\""}) {
        const std::size_t pos = text.find(key);
        REQUIRE(pos != std::string::npos);
        CHECK(pos > last);
        last = pos;
    }
}

TEST_CASE("a parsed match survives the JSON round trip exactly") {
    const DemoDocument doc = generated_doc(21);
    REQUIRE(!doc.game_rounds.empty());
    REQUIRE(!doc.game_rounds.front().frames.empty());

    const std::string text = emit_json(doc);
    const DemoDocument back = parse_json(text);
    CHECK(back == doc);
    // emission is a fixpoint: re-emitting the parsed document is byte-stable
    CHECK(emit_json(back) == text);
}

TEST_CASE("awkward float values round-trip exactly") {
    DemoDocument doc;
    doc.meta.map_name = "m";
    GameRound r;
    r.round_num = 1;
    WeaponFireEvent e;
    e.player_id = 1;
    e.pos = Vec3{0.1f, 1234.5678f, -0.00031f};
    e.weapon = 2;
    r.weapon_fires.push_back({7, e});
    doc.game_rounds.push_back(r);

    const DemoDocument back = parse_json(emit_json(doc));
    CHECK(back == doc);
}

TEST_CASE("malformed documents are rejected with BadDocument") {
    CHECK_THROWS_AS(parse_json("this is not json"), BadDocument);
    CHECK_THROWS_AS(parse_json("{\"mapName\": \"x\"}"), BadDocument);

    const std::string text = emit_json(generated_doc(31));
    CHECK_THROWS_AS(parse_json(text.substr(0, text.size() / 2)), BadDocument);

    // unknown enum names are domain errors, not type errors
    std::string bad = text;
    const std::size_t pos = bad.find("\"winner\": \"");
    REQUIRE(pos != std::string::npos);
    bad.replace(pos, 14, "\"winner\": \"XX\"");
    CHECK_THROWS_AS(parse_json(bad), BadDocument);
}

TEST_CASE("document files round-trip, gzipped when the name says so") {
    const auto dir = std::filesystem::temp_directory_path() / "demoforge_json_test";
    std::filesystem::create_directories(dir);
    const DemoDocument doc = generated_doc(41);

    const std::string plain = (dir / "match.json").string();
    write_document_file(doc, plain);
    CHECK(read_document_file(plain) == doc);

    const std::string gz = (dir / "match.json.gz").string();
    write_document_file(doc, gz);
    CHECK(read_document_file(gz) == doc);

    // compressed output carries the gzip magic and beats the plain size
    std::ifstream in(gz, std::ios::binary);
    unsigned char magic[2] = {0, 0};
    in.read(reinterpret_cast<char*>(magic), 2);
    CHECK(magic[0] == 0x1f);
    CHECK(magic[1] == 0x8b);
    CHECK(std::filesystem::file_size(gz) < std::filesystem::file_size(plain));

    std::filesystem::remove_all(dir);
}

TEST_CASE("datasets round-trip through JSON") {
    Dataset d;
    Sample a;
    a.label = 1;
    a.round_num = 3;
    a.tick = 555;
    a.vec = {0.5, 1.25, -3.0};
    a.rows.resize(2);
    for (int r = 0; r < 2; ++r)
        for (int i = 0; i < kPlayerFeatureCount; ++i) a.rows[r][i] = r + i * 0.25;
    Sample b;
    b.label = 0;
    b.round_num = 9;
    b.tick = 123456789;
    b.vec = {1e-9, 2e9};
    d.train = {a};
    d.val = {};
    d.test = {b, a};

    const Dataset back = dataset_from_json(dataset_to_json(d));
    REQUIRE(back.train.size() == 1);
    REQUIRE(back.val.empty());
    REQUIRE(back.test.size() == 2);
    CHECK(samples_equal(back.train[0], a));
    CHECK(samples_equal(back.test[0], b));
    CHECK(samples_equal(back.test[1], a));

    const auto dir = std::filesystem::temp_directory_path() / "demoforge_json_test_ds";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "dataset.json.gz").string();
    write_dataset_file(d, path);
    const Dataset from_file = read_dataset_file(path);
    CHECK(samples_equal(from_file.train[0], a));
    std::filesystem::remove_all(dir);
}

TEST_CASE("dataset parsing rejects bad versions and malformed rows") {
    CHECK_THROWS_AS(dataset_from_json("{}"), BadDocument);
    CHECK_THROWS_AS(dataset_from_json("{\"version\": 2, \"train\": [], \"val\": [], \"test\": []}"),
                    BadDocument);
    CHECK_THROWS_AS(
        dataset_from_json("{\"version\": 1, \"train\": [{\"label\": 1, \"roundNum\": 1, "
                          "\"tick\": 5, \"vec\": [], \"rows\": [[1.0, 2.0]]}], \"val\": [], "
                          "\"test\": []}"),
        BadDocument);
}

TEST_CASE("calibration reports print fixed-width CSV") {
    CalibrationReport report;
    report.bins = 2;
    report.n = 3;
    report.log_loss = 0.25;
    report.ece = 0.125;
    report.bin_stats = {{2, 0.5, 0.25}, {1, 1.0, 0.875}};

    CHECK(calibration_report_csv(report) ==
          "bin,lo,hi,size,acc,conf\n"
          "0,0.000000,0.500000,2,0.500000,0.250000\n"
          "1,0.500000,1.000000,1,1.000000,0.875000\n");

    const std::string json = calibration_report_json(report);
    const auto parsed = nlohmann::json::parse(json);
    CHECK(parsed.at("bins") == 2);
    CHECK(parsed.at("n") == 3);
    CHECK(parsed.at("logLoss") == 0.25);
    CHECK(parsed.at("ece") == 0.125);
    CHECK(parsed.at("binStats").size() == 2);
    CHECK(parsed.at("binStats")[1].at("conf") == 0.875);
}

TEST_CASE("win curves print one row per frame") {
    const std::vector<std::pair<Tick, double>> curve{{128, 0.5}, {256, 0.875}};
    CHECK(win_curve_csv(curve) ==
          "tick,ctWinProb\n"
          "128,0.500000\n"
          "256,0.875000\n");
    CHECK(win_curve_csv({}) == "tick,ctWinProb\n");
}

TEST_CASE("corpus summaries serialize every field") {
    std::vector<DemoDocument> docs{generated_doc(51)};
    const CorpusSummary summary = corpus_summary(docs);
    const auto parsed = nlohmann::json::parse(corpus_summary_json(summary));
    CHECK(parsed.at("documents") == 1);
    CHECK(parsed.at("rounds") == summary.rounds);
    CHECK(parsed.at("actions") == summary.actions);
    CHECK(parsed.at("actionCounts").at("kills") == summary.action_counts.at("kills"));
    CHECK(parsed.at("actionMix").size() == summary.action_mix.size());
    CHECK(parsed.at("reasonMix").size() == summary.reason_mix.size());
    CHECK(parsed.at("bombPlantRate") == summary.bomb_plant_rate);
}
