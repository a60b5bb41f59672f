// Release acceptance gate. Nine end-to-end checks, each printing one
// PASS/FAIL line with its measured numbers; the process exits nonzero when
// any check fails. Tolerances and budgets are pinned next to each check.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "demoforge/cli.hpp"
#include "demoforge/codec.hpp"
#include "demoforge/frames.hpp"
#include "demoforge/matchgen.hpp"
#include "demoforge/model.hpp"
#include "demoforge/parse.hpp"
#include "demoforge/rng.hpp"
#include "demoforge/winprob.hpp"
#include "helpers.hpp"

namespace {

using namespace demoforge;
using namespace demoforge::testing;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Failure {
    std::string message;
};

void require(bool ok, const std::string& message) {
    if (!ok) throw Failure{message};
}

std::string fmt(const char* pattern, ...) {
    char buf[512];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buf, sizeof buf, pattern, args);
    va_end(args);
    return buf;
}

double secs_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Short server timings so generated matches stay small; the rules under test
// are timing-relative, so nothing is lost.
ServerVars quick_vars() {
    ServerVars v;
    v.freeze_time_secs = 2;
    v.round_time_secs = 10;
    v.bomb_timer_secs = 5;
    v.round_end_secs = 1;
    return v;
}

// ---------------------------------------------------------------------------
// 1. Codec round-trip: 1000 randomized (header, stream) instances decode back
//    to exactly what was encoded, in under five seconds.
// ---------------------------------------------------------------------------

std::string check_codec_round_trip() {
    constexpr int kInstances = 1000;
    constexpr double kBudgetSecs = 5.0;

    Rng rng(20260818);
    const auto t0 = Clock::now();
    for (int i = 0; i < kInstances; ++i) {
        const EsdmHeader header = random_header(rng);
        const auto events =
            random_event_stream(rng, static_cast<int>(rng.uniform_int(0, 120)));
        const auto bytes = write_demo_bytes(header, events);
        const auto [decoded_header, decoded] = read_demo_bytes(bytes);
        require(decoded_header == header && decoded == events,
                fmt("instance %d did not round-trip exactly", i));
    }
    const double secs = secs_since(t0);
    require(secs < kBudgetSecs, fmt("took %.2f s, budget %.1f s", secs, kBudgetSecs));
    return fmt("%d instances exact in %.2f s", kInstances, secs);
}

// ---------------------------------------------------------------------------
// 2. Parser oracle: for 50 generated matches the cleaned parse reproduces the
//    generator's ground truth exactly — round count, winners, reasons, and
//    scores — both on the clean stream and after each anomaly kind.
// ---------------------------------------------------------------------------

void check_against_truth(const DemoDocument& doc, const GroundTruth& truth,
                         std::uint64_t seed, const std::string& label) {
    const auto where = [&](const char* what, std::size_t i) {
        return fmt("seed %llu (%s) round %zu: %s mismatch",
                   static_cast<unsigned long long>(seed), label.c_str(), i + 1, what);
    };
    require(doc.game_rounds.size() == truth.rounds.size(),
            fmt("seed %llu (%s): parsed %zu rounds, truth has %zu",
                static_cast<unsigned long long>(seed), label.c_str(),
                doc.game_rounds.size(), truth.rounds.size()));
    for (std::size_t i = 0; i < truth.rounds.size(); ++i) {
        const GameRound& got = doc.game_rounds[i];
        const RoundTruth& want = truth.rounds[i];
        require(got.winner == want.winner, where("winner", i));
        require(got.reason == want.reason, where("reason", i));
        require(got.ct_score == want.ct_score && got.t_score == want.t_score,
                where("score", i));
    }
    const GameRound& last = doc.game_rounds.back();
    require(last.ct_score == truth.final_ct_score && last.t_score == truth.final_t_score,
            fmt("seed %llu (%s): final score mismatch",
                static_cast<unsigned long long>(seed), label.c_str()));
}

std::string check_parser_oracle() {
    constexpr double kBudgetSecs = 30.0;

    const auto t0 = Clock::now();
    int rounds_total = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        GenConfig cfg;
        cfg.seed = seed;
        cfg.rounds = 16 + static_cast<int>(seed % 15);  // spans 16..30
        cfg.tick_rate = 32;
        cfg.vars = quick_vars();
        const GeneratedMatch match = generate_match(cfg);
        require(static_cast<int>(match.truth.rounds.size()) == cfg.rounds,
                fmt("seed %llu: generator made %zu rounds, wanted %d",
                    static_cast<unsigned long long>(seed), match.truth.rounds.size(),
                    cfg.rounds));
        rounds_total += cfg.rounds;

        check_against_truth(parse_demo(match.header, match.events, {}), match.truth,
                            seed, "clean");
        for (const AnomalyKind kind : {AnomalyKind::Restart, AnomalyKind::DuplicateRoundEnd,
                                       AnomalyKind::Truncation}) {
            const auto mangled =
                inject_anomalies(match.events, kind, seed * 10 + static_cast<int>(kind));
            check_against_truth(parse_demo(match.header, mangled, {}), match.truth, seed,
                                std::string(anomaly_kind_name(kind)));
        }
    }
    const double secs = secs_since(t0);
    require(secs < kBudgetSecs, fmt("took %.2f s, budget %.1f s", secs, kBudgetSecs));
    return fmt("50 matches, %d rounds, 4 parses each, exact in %.2f s", rounds_total, secs);
}

// ---------------------------------------------------------------------------
// 3. Frame arithmetic: a 94-second round at tick rate 128 and parse rate 2
//    samples 188 +/- 1 frames, and every round yields exactly ten
//    trajectories (one per player).
// ---------------------------------------------------------------------------

std::string check_frame_arithmetic() {
    constexpr int kTickRate = 128;

    EventStream s;
    s.add(0, RoundStartEvent{1});
    s.add(0, PhaseChangeEvent{Phase::Freeze});
    s.all_updates(0);
    s.add(20 * kTickRate, PhaseChangeEvent{Phase::Default});

    RawRound rr;
    rr.round.round_num = 1;
    rr.round.start_tick = 0;
    rr.round.freeze_end_tick = 20 * kTickRate;
    rr.round.end_tick = 94 * kTickRate;
    rr.round.official_end_tick = rr.round.end_tick + 5 * kTickRate;
    rr.events = s.events;

    const auto frames = sample_frames(rr, ServerVars{}, ParserParams{}, kTickRate,
                                      test_roster());
    const int n = static_cast<int>(frames.size());
    require(std::abs(n - 188) <= 1, fmt("94 s round sampled %d frames, wanted 188 +/- 1", n));

    GenConfig cfg;
    cfg.seed = 7;
    cfg.rounds = 18;
    cfg.tick_rate = 32;
    cfg.vars = quick_vars();
    const GeneratedMatch match = generate_match(cfg);
    const DemoDocument doc = parse_demo(match.header, match.events, {});
    std::size_t trajectories = 0;
    for (const GameRound& round : doc.game_rounds) {
        const auto per_round = extract_trajectories(round);
        require(per_round.size() == 10,
                fmt("round %d produced %zu trajectories, wanted 10", round.round_num,
                    per_round.size()));
        trajectories += per_round.size();
    }
    require(trajectories == 10 * doc.game_rounds.size(), "trajectory total is off");
    return fmt("%d frames for the 94 s round; %zu trajectories over %zu rounds", n,
               trajectories, doc.game_rounds.size());
}

// ---------------------------------------------------------------------------
// 4. Calibration formulas: the two-bin hand case gives ECE 0.10 exactly,
//    perfect predictions give ECE 0, and a constant 0.5 on balanced labels
//    gives log loss ln 2.
// ---------------------------------------------------------------------------

std::string check_calibration_formulas() {
    constexpr double kEceTol = 1e-12;
    constexpr double kLlTol = 1e-9;

    // Four predictions at 0.15 with one positive, four at 0.85 with three:
    // 0.5*|0.25-0.15| + 0.5*|0.75-0.85| = 0.10.
    const std::vector<double> preds{0.15, 0.15, 0.15, 0.15, 0.85, 0.85, 0.85, 0.85};
    const std::vector<int> labels{1, 0, 0, 0, 1, 1, 1, 0};
    const double hand = ece_of(preds, labels, 10);
    require(std::abs(hand - 0.10) <= kEceTol,
            fmt("hand case ECE %.17g, wanted 0.10 within 1e-12", hand));

    std::vector<double> perfect;
    std::vector<int> perfect_labels;
    for (int i = 0; i < 64; ++i) {
        perfect_labels.push_back(i % 2);
        perfect.push_back(static_cast<double>(i % 2));
    }
    const double zero = ece_of(perfect, perfect_labels, 10);
    require(zero == 0.0, fmt("perfect predictions gave ECE %.17g, wanted 0", zero));

    std::vector<double> half(1000, 0.5);
    std::vector<int> balanced;
    for (int i = 0; i < 1000; ++i) balanced.push_back(i % 2);
    const double ll = log_loss_of(half, balanced);
    require(std::abs(ll - std::log(2.0)) <= kLlTol,
            fmt("constant 0.5 gave LL %.12f, wanted ln 2 within 1e-9", ll));
    return fmt("hand ECE %.12f, perfect ECE 0, coin LL %.12f", hand, ll);
}

// ---------------------------------------------------------------------------
// 5. Gradient correctness: analytic MLP and set-model gradients match central
//    finite differences (step 1e-5) within 1e-4 relative error on 20 draws.
// ---------------------------------------------------------------------------

std::vector<double*> shell_param_ptrs(MlpParams& p) {
    std::vector<double*> ptrs;
    for (double& w : p.w1.a) ptrs.push_back(&w);
    for (double& b : p.b1) ptrs.push_back(&b);
    for (double& w : p.w2) ptrs.push_back(&w);
    ptrs.push_back(&p.b2);
    return ptrs;
}

std::vector<double> flatten(const MlpParams& p) {
    std::vector<double> v(p.w1.a);
    v.insert(v.end(), p.b1.begin(), p.b1.end());
    v.insert(v.end(), p.w2.begin(), p.w2.end());
    v.push_back(p.b2);
    return v;
}

MlpParams random_shell(int hidden, int in, Rng& rng, double scale) {
    MlpParams p;
    p.w1 = Mat(hidden, in);
    for (double& w : p.w1.a) w = rng.uniform(-scale, scale);
    p.b1.resize(static_cast<std::size_t>(hidden));
    for (double& b : p.b1) b = rng.uniform(-scale, scale);
    p.w2.resize(static_cast<std::size_t>(hidden));
    for (double& w : p.w2) w = rng.uniform(-scale, scale);
    p.b2 = rng.uniform(-scale, scale);
    return p;
}

template <typename LossFn>
double max_rel_err(MlpParams& p, const std::vector<double>& analytic, LossFn loss) {
    constexpr double kStep = 1e-5;
    const std::vector<double*> ptrs = shell_param_ptrs(p);
    require(ptrs.size() == analytic.size(), "gradient size mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < ptrs.size(); ++i) {
        const double saved = *ptrs[i];
        *ptrs[i] = saved + kStep;
        const double up = loss();
        *ptrs[i] = saved - kStep;
        const double down = loss();
        *ptrs[i] = saved;
        const double numeric = (up - down) / (2.0 * kStep);
        const double rel = std::abs(numeric - analytic[i]) /
                           std::max(1e-8, std::abs(numeric) + std::abs(analytic[i]));
        worst = std::max(worst, rel);
    }
    return worst;
}

std::string check_gradient_correctness() {
    constexpr double kTol = 1e-4;

    Rng rng(1311);
    double overall = 0.0;
    for (int draw = 0; draw < 10; ++draw) {
        MlpParams p = random_shell(5, 6, rng, 0.7);
        std::vector<std::vector<double>> xs(8, std::vector<double>(6));
        std::vector<int> ys(8);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            for (double& x : xs[i]) x = rng.uniform01();
            ys[i] = static_cast<int>(i % 2);
        }
        const MlpParams g = mlp_gradient(p, xs, ys);
        const double worst =
            max_rel_err(p, flatten(g), [&] { return mlp_loss(p, xs, ys); });
        require(worst < kTol, fmt("mlp draw %d relative error %.3g", draw, worst));
        overall = std::max(overall, worst);
    }
    for (int draw = 0; draw < 10; ++draw) {
        MlpParams shell = random_shell(4, kPlayerFeatureCount, rng, 0.3);
        const DeepSetsParams p{shell.w1, shell.b1, shell.w2, shell.b2};
        std::vector<SetInput> xs(4);
        std::vector<int> ys(4);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            xs[i].resize(kPlayersPerFrame);
            for (auto& row : xs[i])
                for (double& x : row) x = rng.uniform01();
            ys[i] = static_cast<int>(i % 2);
        }
        const DeepSetsParams g = deepsets_gradient(p, xs, ys);
        const MlpParams g_shell{g.w1, g.b1, g.w2, g.b2};
        MlpParams probe{p.w1, p.b1, p.w2, p.b2};
        const double worst = max_rel_err(probe, flatten(g_shell), [&] {
            const DeepSetsParams q{probe.w1, probe.b1, probe.w2, probe.b2};
            return deepsets_loss(q, xs, ys);
        });
        require(worst < kTol, fmt("set-model draw %d relative error %.3g", draw, worst));
        overall = std::max(overall, worst);
    }
    return fmt("20 draws, worst relative error %.3g", overall);
}

// ---------------------------------------------------------------------------
// 6. Permutation invariance: the set model's prediction is bit-identical
//    under 100 random player-row permutations on each of 100 samples.
// ---------------------------------------------------------------------------

std::string check_permutation_invariance() {
    Rng rng(1605);
    const MlpParams shell = random_shell(8, kPlayerFeatureCount, rng, 0.4);
    TrainedModel model;
    model.kind = ModelKind::DeepSets;
    model.params = DeepSetsParams{shell.w1, shell.b1, shell.w2, shell.b2};

    for (int sample_i = 0; sample_i < 100; ++sample_i) {
        Sample s;
        s.rows.resize(kPlayersPerFrame);
        for (auto& row : s.rows)
            for (double& x : row) x = rng.uniform(-3.0, 3.0);
        const double baseline = model.predict(s);
        for (int trial = 0; trial < 100; ++trial) {
            rng.shuffle(s.rows);
            require(model.predict(s) == baseline,
                    fmt("sample %d: prediction changed under a row permutation", sample_i));
        }
    }
    return "10000 permuted predictions bit-identical";
}

// ---------------------------------------------------------------------------
// 7. Benchmark signal: on a 5000-round generated corpus every model beats a
//    fair coin on test log loss, the stumps and MLP models calibrate under
//    0.05 ECE, and all four trainings fit in five minutes on one core.
// ---------------------------------------------------------------------------

std::string check_benchmark_signal() {
    constexpr int kRounds = 5000;
    constexpr double kTrainBudgetSecs = 300.0;
    constexpr double kCoinLl = 0.693;  // just under ln 2
    constexpr double kEceCap = 0.05;

    DatasetBuilder builder(424242);
    std::uint64_t seed = 9000;
    while (builder.size() < kRounds) {
        GenConfig cfg;
        cfg.seed = ++seed;
        cfg.tick_rate = 16;
        cfg.vars = quick_vars();
        const GeneratedMatch match = generate_match(cfg);
        const DemoDocument doc = parse_demo(match.header, match.events, {});
        for (const GameRound& round : doc.game_rounds) {
            builder.add_round(round, doc.server_vars);
            if (builder.size() == kRounds) break;
        }
    }
    const Dataset ds = builder.build();

    const auto t0 = Clock::now();
    const std::array<TrainedModel, 4> models{
        train_logreg(ds.train, ds.val),
        train_mlp(ds.train, ds.val),
        train_boosted_stumps(ds.train, ds.val),
        train_deepsets(ds.train, ds.val),
    };
    const double train_secs = secs_since(t0);

    std::array<CalibrationReport, 4> reports;
    for (std::size_t i = 0; i < models.size(); ++i)
        reports[i] = evaluate(models[i], ds.test, 10);

    const std::array<const char*, 4> names{"logreg", "mlp", "stumps", "deepsets"};
    for (std::size_t i = 0; i < reports.size(); ++i)
        require(reports[i].log_loss < kCoinLl,
                fmt("%s test LL %.4f, needs < %.3f", names[i], reports[i].log_loss, kCoinLl));
    require(reports[1].ece < kEceCap, fmt("mlp ECE %.4f, needs < %.2f", reports[1].ece, kEceCap));
    require(reports[2].ece < kEceCap,
            fmt("stumps ECE %.4f, needs < %.2f", reports[2].ece, kEceCap));
    require(train_secs < kTrainBudgetSecs,
            fmt("training took %.1f s, budget %.0f s", train_secs, kTrainBudgetSecs));
    return fmt("LL %.3f/%.3f/%.3f/%.3f, ECE mlp %.3f stumps %.3f, trained in %.1f s",
               reports[0].log_loss, reports[1].log_loss, reports[2].log_loss,
               reports[3].log_loss, reports[1].ece, reports[2].ece, train_secs);
}

// ---------------------------------------------------------------------------
// 8. Split protocol: 100 rounds build into 70/10/20 samples, one uniformly
//    drawn frame per round.
// ---------------------------------------------------------------------------

std::string check_split_protocol() {
    std::vector<DemoDocument> docs;
    for (std::uint64_t seed = 81; seed < 86; ++seed) {
        GenConfig cfg;
        cfg.seed = seed;
        cfg.rounds = 20;
        cfg.tick_rate = 16;
        cfg.vars = quick_vars();
        const GeneratedMatch match = generate_match(cfg);
        docs.push_back(parse_demo(match.header, match.events, {}));
        require(docs.back().game_rounds.size() == 20, "match did not parse to 20 rounds");
    }

    const Dataset ds = build_dataset(docs, 99);
    require(ds.train.size() == 70, fmt("train size %zu, wanted 70", ds.train.size()));
    require(ds.val.size() == 10, fmt("val size %zu, wanted 10", ds.val.size()));
    require(ds.test.size() == 20, fmt("test size %zu, wanted 20", ds.test.size()));

    // One sample per round: across five 20-round matches every round number
    // must appear exactly five times, and every sample must be a full frame.
    std::map<int, int> per_round;
    const auto tally = [&](const std::vector<Sample>& part) {
        for (const Sample& s : part) {
            ++per_round[s.round_num];
            require(s.vec.size() == kVectorFeatureCount, "sample vector width is off");
            require(s.rows.size() == kPlayersPerFrame, "sample row count is off");
        }
    };
    tally(ds.train);
    tally(ds.val);
    tally(ds.test);
    require(per_round.size() == 20, "round numbers missing from the split");
    for (const auto& [round_num, count] : per_round)
        require(count == 5, fmt("round %d sampled %d times, wanted 5", round_num, count));
    return "70/10/20 split, one frame per round across 100 rounds";
}

// ---------------------------------------------------------------------------
// 9. Determinism: running the full CLI pipeline twice with identical seeds
//    produces byte-identical demos, JSON documents, weights, and SVGs.
// ---------------------------------------------------------------------------

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string check_pipeline_determinism() {
    const fs::path dir = fs::temp_directory_path() / "demoforge_acceptance";
    const std::string d = dir.string();

    const auto cli = [](std::vector<std::string> args) {
        std::ostringstream out;
        std::ostringstream err;
        const int rc = run_cli(args, out, err);
        require(rc == 0, "cli step failed: " + err.str());
    };

    const auto run_pipeline = [&] {
        fs::remove_all(dir);
        cli({"generate", "--seed", "42", "--rounds", "20", "--tick-rate", "32", "--out", d});
        cli({"parse", d + "/match.esdm", "--parse-rate", "1", "--out", d + "/match.json"});
        cli({"parse", d + "/match.esdm", "--parse-rate", "1", "--out", d + "/match.json.gz"});
        cli({"heatmap", d + "/match.json", "--action", "kill", "--coord", "victim", "--out",
             d + "/heat.svg"});
        cli({"winprob", "build", d + "/match.json", "--seed", "7", "--out", d + "/ds.json"});
        cli({"winprob", "train", d + "/ds.json", "--model", "stumps", "--out", d + "/w.json"});
        cli({"winprob", "eval", d + "/ds.json", "--model-file", d + "/w.json", "--out",
             d + "/report.json", "--csv", d + "/report.csv", "--svg", d + "/rel.svg"});
        cli({"winprob", "curve", d + "/match.json", "--model-file", d + "/w.json", "--round",
             "3", "--out", d + "/curve.svg"});
        std::map<std::string, std::string> artifacts;
        for (const auto& entry : fs::directory_iterator(dir))
            artifacts[entry.path().filename().string()] = slurp(entry.path());
        return artifacts;
    };

    const auto first = run_pipeline();
    const auto second = run_pipeline();
    fs::remove_all(dir);

    require(first.size() >= 10, fmt("pipeline produced %zu artifacts, wanted 10+", first.size()));
    require(first.size() == second.size(), "runs produced different artifact sets");
    for (const auto& [name, bytes] : first) {
        const auto it = second.find(name);
        require(it != second.end(), name + " missing from the second run");
        require(it->second == bytes, name + " differs between runs");
    }
    return fmt("%zu artifacts byte-identical across two runs", first.size());
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::string (*fn)();
    };
    const Criterion table[] = {
        {"codec round-trip", check_codec_round_trip},
        {"parser oracle", check_parser_oracle},
        {"frame arithmetic", check_frame_arithmetic},
        {"calibration formulas", check_calibration_formulas},
        {"gradient correctness", check_gradient_correctness},
        {"permutation invariance", check_permutation_invariance},
        {"benchmark signal", check_benchmark_signal},
        {"split protocol", check_split_protocol},
        {"pipeline determinism", check_pipeline_determinism},
    };

    int failed = 0;
    for (std::size_t i = 0; i < std::size(table); ++i) {
        const auto t0 = Clock::now();
        std::string verdict = "PASS";
        std::string detail;
        try {
            detail = table[i].fn();
        } catch (const Failure& f) {
            verdict = "FAIL";
            detail = f.message;
            ++failed;
        } catch (const std::exception& e) {
            verdict = "FAIL";
            detail = std::string("unexpected exception: ") + e.what();
            ++failed;
        }
        std::printf("[%zu/9] %-24s %s  (%s; %.1f s)\n", i + 1, table[i].name, verdict.c_str(),
                    detail.c_str(), secs_since(t0));
        std::fflush(stdout);
    }
    if (failed == 0) {
        std::printf("acceptance: all 9 criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d of 9 criteria FAILED\n", failed);
    return 1;
}
