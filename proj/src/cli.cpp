#include "demoforge/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <ostream>
#include <thread>

#include "CLI11.hpp"
#include "demoforge/analytics.hpp"
#include "demoforge/fsutil.hpp"
#include "demoforge/json_io.hpp"
#include "demoforge/matchgen.hpp"
#include "demoforge/parse.hpp"
#include "demoforge/svg.hpp"
#include "demoforge/winprob.hpp"

namespace demoforge {
namespace {

namespace fs = std::filesystem;

// DEMOFORGE_THREADS caps the parse worker pool; default is the hardware
// concurrency, never more workers than jobs.
int worker_count(std::size_t jobs) {
    int n = 0;
    if (const char* env = std::getenv("DEMOFORGE_THREADS")) n = std::atoi(env);
    if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
    return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(n),
                                                  std::max<std::size_t>(jobs, 1)));
}

std::string sibling_json_name(const std::string& demo_path) {
    return fs::path(demo_path).filename().replace_extension(".json").string();
}

std::vector<DemoDocument> load_documents(const std::vector<std::string>& paths) {
    std::vector<DemoDocument> docs;
    docs.reserve(paths.size());
    for (const std::string& path : paths) docs.push_back(read_document_file(path));
    return docs;
}

// --- parse -------------------------------------------------------------------

struct ParseArgs {
    std::vector<std::string> demos;
    int parse_rate = 2;
    std::string out;
    bool keep_invalid = false;
};

int cmd_parse(const ParseArgs& a, std::ostream& out, std::ostream& err) {
    ParserParams params;
    params.parse_rate = a.parse_rate;

    std::vector<std::string> jsons(a.demos.size());
    std::vector<std::string> failures(a.demos.size());
    std::exception_ptr internal;
    std::mutex internal_mu;
    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t i = next.fetch_add(1); i < a.demos.size(); i = next.fetch_add(1)) {
            try {
                jsons[i] = emit_json(parse_demo_file(a.demos[i], params, a.keep_invalid));
            } catch (const Error& e) {
                failures[i] = e.what();
            } catch (...) {
                const std::lock_guard<std::mutex> lock(internal_mu);
                if (!internal) internal = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < worker_count(a.demos.size()); ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
    if (internal) std::rethrow_exception(internal);

    bool failed = false;
    for (std::size_t i = 0; i < a.demos.size(); ++i)
        if (!failures[i].empty()) {
            err << a.demos[i] << ": " << failures[i] << "\n";
            failed = true;
        }
    if (failed) return 1;

    if (a.out.empty()) {
        if (a.demos.size() > 1)
            throw Error("parsing multiple demos requires --out DIR");
        out << jsons[0];
        return 0;
    }
    const bool dir_out = fs::is_directory(a.out);
    if (a.demos.size() > 1 && !dir_out)
        throw Error("--out must be an existing directory when parsing multiple demos");
    for (std::size_t i = 0; i < a.demos.size(); ++i) {
        const std::string path =
            dir_out ? (fs::path(a.out) / sibling_json_name(a.demos[i])).string() : a.out;
        write_file_maybe_gzip(path, jsons[i]);
        err << "wrote " << path << "\n";
    }
    return 0;
}

// --- stats ---------------------------------------------------------------------

struct StatsArgs {
    std::vector<std::string> docs;
    std::string csv;
    std::string summary;
};

int cmd_stats(const StatsArgs& a, std::ostream& out, std::ostream& err) {
    const std::vector<DemoDocument> docs = load_documents(a.docs);

    std::vector<GameRound> rounds;
    std::vector<PlayerInfo> roster;
    for (const DemoDocument& doc : docs) {
        rounds.insert(rounds.end(), doc.game_rounds.begin(), doc.game_rounds.end());
        for (const PlayerInfo& p : doc.players) {
            const bool known = std::any_of(roster.begin(), roster.end(),
                                           [&](const PlayerInfo& r) { return r.id == p.id; });
            if (!known) roster.push_back(p);
        }
    }

    const std::string csv = player_stats_csv(player_stats(rounds, roster));
    if (a.csv.empty()) {
        out << csv;
    } else {
        write_file_atomic(a.csv, csv);
        err << "wrote " << a.csv << "\n";
    }
    if (!a.summary.empty()) {
        write_file_atomic(a.summary, corpus_summary_json(corpus_summary(docs)));
        err << "wrote " << a.summary << "\n";
    }
    return 0;
}

// --- heatmap ---------------------------------------------------------------------

struct HeatmapArgs {
    std::vector<std::string> docs;
    std::string action;
    std::string coord;
    int nx = 32;
    int ny = 32;
    std::vector<double> bounds;  // xmin xmax ymin ymax
    std::string out_path;
    std::string title;
};

int cmd_heatmap(const HeatmapArgs& a, std::ostream& err) {
    const std::vector<DemoDocument> docs = load_documents(a.docs);
    const ActionType action = action_type_from_name(a.action);
    const CoordSelector coord = coord_selector_from_name(a.coord);

    GridSpec spec;
    if (a.bounds.empty()) {
        spec = fit_bounds(docs, action, coord, a.nx, a.ny);
    } else {
        spec = GridSpec{a.bounds[0], a.bounds[1], a.bounds[2], a.bounds[3], a.nx, a.ny};
    }
    const HeatmapGrid grid = action_heatmap(docs, action, coord, spec);
    const std::string title = a.title.empty() ? a.action + " " + a.coord + " heatmap" : a.title;
    write_file_atomic(a.out_path, render_heatmap_svg(grid, title));
    err << "wrote " << a.out_path << " (" << grid.total() << " binned, " << grid.out_of_bounds
        << " out of bounds)\n";
    return 0;
}

// --- generate ---------------------------------------------------------------------

struct GenerateArgs {
    std::uint64_t seed = 1;
    int rounds = 0;
    int tick_rate = 128;
    double skill_gap = 0.0;
    std::string map_name = "de_forge";
    std::string anomaly;
    std::string out_dir;
};

int cmd_generate(const GenerateArgs& a, std::ostream& err) {
    GenConfig config;
    config.seed = a.seed;
    config.rounds = a.rounds;
    config.tick_rate = a.tick_rate;
    config.skill_gap = a.skill_gap;
    config.map_name = a.map_name;
    const GeneratedMatch match = generate_match(config);

    std::vector<GameEvent> events = match.events;
    if (!a.anomaly.empty())
        events = inject_anomalies(std::move(events), anomaly_kind_from_name(a.anomaly), a.seed);

    fs::create_directories(a.out_dir);
    const std::vector<std::uint8_t> bytes = write_demo_bytes(match.header, events);
    const std::string demo_path = (fs::path(a.out_dir) / "match.esdm").string();
    write_file_atomic(demo_path, std::string(bytes.begin(), bytes.end()));
    const std::string truth_path = (fs::path(a.out_dir) / "truth.json").string();
    write_file_atomic(truth_path, ground_truth_json(match.truth));
    err << "wrote " << demo_path << " (" << match.truth.rounds.size() << " rounds) and "
        << truth_path << "\n";
    return 0;
}

// --- winprob ---------------------------------------------------------------------

struct WinprobBuildArgs {
    std::vector<std::string> docs;
    std::uint64_t seed = 1;
    std::string split = "70/10/20";
    std::string out_path;
};

int cmd_winprob_build(const WinprobBuildArgs& a, std::ostream& err) {
    if (a.split != "70/10/20")
        throw Error("only the 70/10/20 split is supported (got '" + a.split + "')");
    const std::vector<DemoDocument> docs = load_documents(a.docs);
    const Dataset dataset = build_dataset(docs, a.seed);
    write_dataset_file(dataset, a.out_path);
    err << "wrote " << a.out_path << " (" << dataset.train.size() << "/" << dataset.val.size()
        << "/" << dataset.test.size() << " train/val/test)\n";
    return 0;
}

struct WinprobTrainArgs {
    std::string dataset_path;
    std::string model;
    std::uint64_t seed = 1;
    std::string out_path;
};

int cmd_winprob_train(const WinprobTrainArgs& a, std::ostream& err) {
    const ModelKind kind = model_kind_from_name(a.model);
    const Dataset dataset = read_dataset_file(a.dataset_path);

    TrainedModel model;
    switch (kind) {
        case ModelKind::LogisticRegression:
            model = train_logreg(dataset.train, dataset.val);
            break;
        case ModelKind::Mlp: {
            TrainConfig config;
            config.seed = a.seed;
            model = train_mlp(dataset.train, dataset.val, config);
            break;
        }
        case ModelKind::BoostedStumps:
            model = train_boosted_stumps(dataset.train, dataset.val);
            break;
        case ModelKind::DeepSets: {
            TrainConfig config;
            config.seed = a.seed;
            model = train_deepsets(dataset.train, dataset.val, config);
            break;
        }
    }
    save_model(model, a.out_path);
    err << "wrote " << a.out_path << " (" << a.model << ", " << model.training_log.size()
        << " logged epochs";
    if (!model.training_log.empty())
        err << ", final val loss " << model.training_log.back().val_loss;
    err << ")\n";
    return 0;
}

struct WinprobEvalArgs {
    std::string dataset_path;
    std::string model_path;
    int bins = 10;
    std::string out_path;
    std::string csv_path;
    std::string svg_path;
};

int cmd_winprob_eval(const WinprobEvalArgs& a, std::ostream& out, std::ostream& err) {
    const TrainedModel model = load_model(a.model_path);
    const Dataset dataset = read_dataset_file(a.dataset_path);
    const CalibrationReport report = evaluate(model, dataset.test, a.bins);

    const std::string json = calibration_report_json(report);
    if (a.out_path.empty()) {
        out << json;
    } else {
        write_file_atomic(a.out_path, json);
        err << "wrote " << a.out_path << "\n";
    }
    if (!a.csv_path.empty()) {
        write_file_atomic(a.csv_path, calibration_report_csv(report));
        err << "wrote " << a.csv_path << "\n";
    }
    if (!a.svg_path.empty()) {
        write_file_atomic(a.svg_path, render_reliability_svg(report, "reliability"));
        err << "wrote " << a.svg_path << "\n";
    }
    return 0;
}

struct WinprobCurveArgs {
    std::string doc_path;
    std::string model_path;
    int round_num = 1;
    std::string out_path;
};

int cmd_winprob_curve(const WinprobCurveArgs& a, std::ostream& out, std::ostream& err) {
    const TrainedModel model = load_model(a.model_path);
    const DemoDocument doc = read_document_file(a.doc_path);

    const GameRound* round = nullptr;
    for (const GameRound& r : doc.game_rounds)
        if (r.round_num == a.round_num) round = &r;
    if (!round)
        throw Error("round " + std::to_string(a.round_num) + " not found in " + a.doc_path);

    const auto curve = win_curve(model, *round, doc.server_vars);
    if (a.out_path.empty()) {
        out << win_curve_csv(curve);
        return 0;
    }
    if (a.out_path.ends_with(".svg")) {
        const std::string title = "round " + std::to_string(a.round_num) + " CT win probability";
        write_file_atomic(a.out_path, render_win_curve_svg(curve, title));
    } else {
        write_file_atomic(a.out_path, win_curve_csv(curve));
    }
    err << "wrote " << a.out_path << "\n";
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"demoforge: demo codec, parser, analytics and win-probability models"};
    app.require_subcommand(1);

    ParseArgs parse_args;
    CLI::App* parse_cmd = app.add_subcommand("parse", "Parse .esdm demos into JSON documents");
    parse_cmd->add_option("demos", parse_args.demos, "demo files")->required()->expected(-1);
    parse_cmd->add_option("--parse-rate", parse_args.parse_rate, "frames per second to sample");
    parse_cmd->add_option("--out", parse_args.out,
                          "output file (.json/.json.gz) or existing directory; stdout if omitted");
    parse_cmd->add_flag("--keep-invalid", parse_args.keep_invalid,
                        "keep invalid rounds, flagged, instead of dropping them");

    StatsArgs stats_args;
    CLI::App* stats_cmd = app.add_subcommand("stats", "Player stat lines over parsed documents");
    stats_cmd->add_option("docs", stats_args.docs, "document JSON files")->required()->expected(-1);
    stats_cmd->add_option("--csv", stats_args.csv, "write CSV here instead of stdout");
    stats_cmd->add_option("--summary", stats_args.summary, "also write a corpus summary JSON");

    HeatmapArgs heatmap_args;
    CLI::App* heatmap_cmd = app.add_subcommand("heatmap", "Bin action positions into an SVG grid");
    heatmap_cmd->add_option("docs", heatmap_args.docs, "document JSON files")
        ->required()
        ->expected(-1);
    heatmap_cmd
        ->add_option("--action", heatmap_args.action,
                     "damage, kill, flash, bombEvent, grenade or weaponFire")
        ->required();
    heatmap_cmd->add_option("--coord", heatmap_args.coord, "actor, victim, throw or land")
        ->required();
    heatmap_cmd->add_option("--nx", heatmap_args.nx, "grid columns");
    heatmap_cmd->add_option("--ny", heatmap_args.ny, "grid rows");
    heatmap_cmd->add_option("--bounds", heatmap_args.bounds,
                            "xmin xmax ymin ymax (fitted to the data if omitted)")
        ->expected(4);
    heatmap_cmd->add_option("--out", heatmap_args.out_path, "output SVG path")->required();
    heatmap_cmd->add_option("--title", heatmap_args.title, "chart title");

    GenerateArgs generate_args;
    CLI::App* generate_cmd =
        app.add_subcommand("generate", "Write a synthetic demo and its ground truth");
    generate_cmd->add_option("--seed", generate_args.seed, "generator seed");
    generate_cmd->add_option("--rounds", generate_args.rounds,
                             "exact round count; 0 plays to a natural finish");
    generate_cmd->add_option("--tick-rate", generate_args.tick_rate, "server ticks per second");
    generate_cmd->add_option("--skill-gap", generate_args.skill_gap,
                             "CT skill edge in [-1, 1]");
    generate_cmd->add_option("--map", generate_args.map_name, "map name label");
    generate_cmd->add_option("--anomaly", generate_args.anomaly,
                             "corrupt the stream: restart, duplicateRoundEnd or truncation");
    generate_cmd->add_option("--out", generate_args.out_dir, "output directory")->required();

    CLI::App* winprob_cmd = app.add_subcommand("winprob", "Win-probability datasets and models");
    winprob_cmd->require_subcommand(1);

    WinprobBuildArgs build_args;
    CLI::App* build_cmd =
        winprob_cmd->add_subcommand("build", "Sample one frame per round into a dataset");
    build_cmd->add_option("docs", build_args.docs, "document JSON files")->required()->expected(-1);
    build_cmd->add_option("--seed", build_args.seed, "sampling seed");
    build_cmd->add_option("--split", build_args.split, "train/val/test split (only 70/10/20)");
    build_cmd->add_option("--out", build_args.out_path, "dataset output path")->required();

    WinprobTrainArgs train_args;
    CLI::App* train_cmd = winprob_cmd->add_subcommand("train", "Fit a model on a dataset");
    train_cmd->add_option("dataset", train_args.dataset_path, "dataset JSON file")->required();
    train_cmd->add_option("--model", train_args.model, "logreg, mlp, stumps or deepsets")
        ->required();
    train_cmd->add_option("--seed", train_args.seed, "training seed");
    train_cmd->add_option("--out", train_args.out_path, "weight file output path")->required();

    WinprobEvalArgs eval_args;
    CLI::App* eval_cmd = winprob_cmd->add_subcommand("eval", "Evaluate a model on the test split");
    eval_cmd->add_option("dataset", eval_args.dataset_path, "dataset JSON file")->required();
    eval_cmd->add_option("--model-file", eval_args.model_path, "trained weight file")->required();
    eval_cmd->add_option("--bins", eval_args.bins, "calibration bin count");
    eval_cmd->add_option("--out", eval_args.out_path, "report JSON path; stdout if omitted");
    eval_cmd->add_option("--csv", eval_args.csv_path, "also write per-bin CSV here");
    eval_cmd->add_option("--svg", eval_args.svg_path, "also write a reliability diagram here");

    WinprobCurveArgs curve_args;
    CLI::App* curve_cmd =
        winprob_cmd->add_subcommand("curve", "Per-frame win probability for one round");
    curve_cmd->add_option("doc", curve_args.doc_path, "document JSON file")->required();
    curve_cmd->add_option("--model-file", curve_args.model_path, "trained weight file")
        ->required();
    curve_cmd->add_option("--round", curve_args.round_num, "round number")->required();
    curve_cmd->add_option("--out", curve_args.out_path,
                          "output path (.svg renders a chart, anything else gets CSV); "
                          "stdout CSV if omitted");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        err << "error: " << e.what() << "\n";
        err << "run with --help for usage\n";
        return 1;
    }

    try {
        if (app.got_subcommand(parse_cmd)) return cmd_parse(parse_args, out, err);
        if (app.got_subcommand(stats_cmd)) return cmd_stats(stats_args, out, err);
        if (app.got_subcommand(heatmap_cmd)) return cmd_heatmap(heatmap_args, err);
        if (app.got_subcommand(generate_cmd)) return cmd_generate(generate_args, err);
        if (app.got_subcommand(winprob_cmd)) {
            if (winprob_cmd->got_subcommand(build_cmd)) return cmd_winprob_build(build_args, err);
            if (winprob_cmd->got_subcommand(train_cmd)) return cmd_winprob_train(train_args, err);
            if (winprob_cmd->got_subcommand(eval_cmd))
                return cmd_winprob_eval(eval_args, out, err);
            if (winprob_cmd->got_subcommand(curve_cmd))
                return cmd_winprob_curve(curve_args, out, err);
        }
        err << "error: no subcommand selected\n";
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace demoforge
