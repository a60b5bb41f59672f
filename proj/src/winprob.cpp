#include "demoforge/winprob.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "demoforge/frames.hpp"
#include "demoforge/fsutil.hpp"

namespace demoforge {

namespace {

using nlohmann::json;

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double clip_prob(double p) { return std::clamp(p, kProbClip, 1.0 - kProbClip); }

bool bomb_in_t_inventory(const Frame& frame) {
    if (!frame.bomb.carrier_id) return false;
    for (const PlayerState& p : frame.t.players)
        if (p.player_id == *frame.bomb.carrier_id) return true;
    return false;
}

double seconds_since_phase_change(const Frame& frame, const ServerVars& vars) {
    return std::max(0.0, phase_duration_secs(frame.phase, vars) - frame.clock_secs);
}

constexpr std::array<std::string_view, kVectorFeatureCount> kVectorNames = {
    "secondsSincePhaseChange", "activeFires",   "activeSmokes",   "bombSiteA",
    "bombSiteB",               "bombSiteNone",  "defuseKitsAlive", "ctStartEqVal",
    "ctAliveCount",            "ctCurrentEqVal", "ctTotalHp",      "ctTotalArmor",
    "ctHelmets",               "ctGrenades",    "ctInBombZone",   "tStartEqVal",
    "tAliveCount",             "tCurrentEqVal", "tTotalHp",       "tTotalArmor",
    "tHelmets",                "tGrenades",     "tInBombZone",    "bombInTInventory",
};

constexpr std::array<std::string_view, kPlayerFeatureCount> kPlayerNames = {
    "secondsSincePhaseChange", "activeFires", "activeSmokes", "bombSiteA",
    "bombSiteB",               "bombSiteNone", "defuseKitsAlive", "bombInTInventory",
    "posX",                    "posY",        "posZ",         "velX",
    "velY",                    "velZ",        "viewYaw",      "viewPitch",
    "hp",                      "armor",       "eqVal",        "grenadesRemaining",
    "alive",                   "blinded",     "inBombZone",   "isCt",
};

}  // namespace

std::span<const std::string_view> vector_feature_names() { return kVectorNames; }
std::span<const std::string_view> player_feature_names() { return kPlayerNames; }

std::vector<double> featurize_vector(const Frame& frame, const RoundContext& ctx,
                                     const ServerVars& vars) {
    std::vector<double> v;
    v.reserve(kVectorFeatureCount);
    v.push_back(seconds_since_phase_change(frame, vars));
    v.push_back(static_cast<double>(frame.fires.size()));
    v.push_back(static_cast<double>(frame.smokes.size()));
    v.push_back(frame.bomb.planted_site == BombSite::A ? 1.0 : 0.0);
    v.push_back(frame.bomb.planted_site == BombSite::B ? 1.0 : 0.0);
    v.push_back(frame.bomb.planted_site.has_value() ? 0.0 : 1.0);
    v.push_back(static_cast<double>(frame.ct.defuse_kits + frame.t.defuse_kits));
    for (const TeamState* team : {&frame.ct, &frame.t}) {
        v.push_back(team->side == Side::CT ? ctx.ct_start_eq_val : ctx.t_start_eq_val);
        v.push_back(static_cast<double>(team->alive_count));
        v.push_back(static_cast<double>(team->total_eq_val));
        v.push_back(static_cast<double>(team->total_hp));
        v.push_back(static_cast<double>(team->total_armor));
        v.push_back(static_cast<double>(team->helmets));
        v.push_back(static_cast<double>(team->grenades));
        v.push_back(static_cast<double>(team->players_in_bomb_zone));
    }
    v.push_back(bomb_in_t_inventory(frame) ? 1.0 : 0.0);
    return v;
}

std::vector<std::array<double, kPlayerFeatureCount>> featurize_set(const Frame& frame,
                                                                   const ServerVars& vars) {
    std::array<double, 8> global = {
        seconds_since_phase_change(frame, vars),
        static_cast<double>(frame.fires.size()),
        static_cast<double>(frame.smokes.size()),
        frame.bomb.planted_site == BombSite::A ? 1.0 : 0.0,
        frame.bomb.planted_site == BombSite::B ? 1.0 : 0.0,
        frame.bomb.planted_site.has_value() ? 0.0 : 1.0,
        static_cast<double>(frame.ct.defuse_kits + frame.t.defuse_kits),
        bomb_in_t_inventory(frame) ? 1.0 : 0.0,
    };

    std::vector<std::array<double, kPlayerFeatureCount>> rows;
    rows.reserve(kPlayersPerFrame);
    for (const TeamState* team : {&frame.ct, &frame.t}) {
        for (const PlayerState& p : team->players) {
            std::array<double, kPlayerFeatureCount> r{};
            std::copy(global.begin(), global.end(), r.begin());
            r[8] = p.pos.x;
            r[9] = p.pos.y;
            r[10] = p.pos.z;
            r[11] = p.alive ? p.vel.x : 0.0;
            r[12] = p.alive ? p.vel.y : 0.0;
            r[13] = p.alive ? p.vel.z : 0.0;
            r[14] = p.view_yaw;
            r[15] = p.view_pitch;
            r[16] = static_cast<double>(p.hp);
            r[17] = static_cast<double>(p.armor);
            r[18] = static_cast<double>(p.eq_val);
            r[19] = static_cast<double>(p.grenades_remaining);
            r[20] = p.alive ? 1.0 : 0.0;
            r[21] = p.blinded ? 1.0 : 0.0;
            r[22] = p.in_bomb_zone ? 1.0 : 0.0;
            r[23] = team->side == Side::CT ? 1.0 : 0.0;
            rows.push_back(r);
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Dataset construction
// ---------------------------------------------------------------------------

void DatasetBuilder::add_round(const GameRound& round, const ServerVars& vars) {
    if (round.frames.empty()) return;
    const auto idx = rng_.uniform_int(0, static_cast<std::int64_t>(round.frames.size()) - 1);
    const Frame& frame = round.frames[static_cast<std::size_t>(idx)];

    Sample s;
    s.label = round.winner == Side::CT ? 1 : 0;
    s.vec = featurize_vector(frame, {round.ct_start_eq_val, round.t_start_eq_val}, vars);
    s.rows = featurize_set(frame, vars);
    s.round_num = round.round_num;
    s.tick = frame.tick;
    samples_.push_back(std::move(s));
}

Dataset DatasetBuilder::build() {
    if (samples_.empty()) throw EmptyCorpus();
    rng_.shuffle(samples_);
    const std::size_t n = samples_.size();
    const std::size_t n_train = static_cast<std::size_t>(0.7 * static_cast<double>(n));
    const std::size_t n_val = static_cast<std::size_t>(0.1 * static_cast<double>(n));

    Dataset d;
    d.train.assign(std::make_move_iterator(samples_.begin()),
                   std::make_move_iterator(samples_.begin() + n_train));
    d.val.assign(std::make_move_iterator(samples_.begin() + n_train),
                 std::make_move_iterator(samples_.begin() + n_train + n_val));
    d.test.assign(std::make_move_iterator(samples_.begin() + n_train + n_val),
                  std::make_move_iterator(samples_.end()));
    samples_.clear();
    return d;
}

Dataset build_dataset(std::span<const DemoDocument> docs, std::uint64_t seed) {
    DatasetBuilder builder(seed);
    std::string map;
    for (const DemoDocument& doc : docs) {
        if (map.empty()) map = doc.meta.map_name;
        else if (map != doc.meta.map_name)
            throw Error("benchmark corpora are per map: got both '" + map + "' and '" +
                        doc.meta.map_name + "'");
        for (const GameRound& r : doc.game_rounds) builder.add_round(r, doc.server_vars);
    }
    return builder.build();
}

// ---------------------------------------------------------------------------
// Prediction
// ---------------------------------------------------------------------------

namespace {

std::vector<double> scaled_vec(const FeatureScaling& scaling, std::span<const double> v) {
    std::vector<double> out(v.begin(), v.end());
    if (scaling.lo.empty()) return out;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = scaling.apply(out[i], i);
    return out;
}

double mlp_forward(const MlpParams& p, std::span<const double> x) {
    double z = p.b2;
    for (int h = 0; h < p.w1.rows; ++h) {
        double a = p.b1[static_cast<std::size_t>(h)];
        for (int j = 0; j < p.w1.cols; ++j) a += p.w1.at(h, j) * x[static_cast<std::size_t>(j)];
        if (a > 0.0) z += p.w2[static_cast<std::size_t>(h)] * a;
    }
    return sigmoid(z);
}

double tree_score(const Tree& tree, std::span<const double> x) {
    int node = 0;
    for (;;) {
        const TreeNode& n = tree.nodes[static_cast<std::size_t>(node)];
        if (n.feature < 0) return n.value;
        node = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
}

// Encoder activations pooled per hidden unit in ascending value order; the
// sum (and therefore the prediction) is bit-identical under row permutation.
std::vector<double> deepsets_pool(const DeepSetsParams& p,
                                  std::span<const std::array<double, kPlayerFeatureCount>> rows) {
    const int hidden = p.w1.rows;
    std::vector<double> acts(rows.size());
    std::vector<double> pool(static_cast<std::size_t>(hidden));
    for (int h = 0; h < hidden; ++h) {
        for (std::size_t r = 0; r < rows.size(); ++r) {
            double a = p.b1[static_cast<std::size_t>(h)];
            for (int j = 0; j < p.w1.cols; ++j) a += p.w1.at(h, j) * rows[r][static_cast<std::size_t>(j)];
            acts[r] = a > 0.0 ? a : 0.0;
        }
        std::sort(acts.begin(), acts.end());
        double sum = 0.0;
        for (const double a : acts) sum += a;
        pool[static_cast<std::size_t>(h)] = sum / static_cast<double>(rows.size());
    }
    return pool;
}

double deepsets_forward(const DeepSetsParams& p,
                        std::span<const std::array<double, kPlayerFeatureCount>> rows) {
    const std::vector<double> pool = deepsets_pool(p, rows);
    double z = p.b2;
    for (std::size_t h = 0; h < pool.size(); ++h) z += p.w2[h] * pool[h];
    return sigmoid(z);
}

SetInput scaled_rows(const FeatureScaling& scaling, const SetInput& rows) {
    SetInput out = rows;
    if (scaling.lo.empty()) return out;
    for (auto& row : out)
        for (std::size_t i = 0; i < row.size(); ++i) row[i] = scaling.apply(row[i], i);
    return out;
}

}  // namespace

double TrainedModel::predict(const Sample& sample) const {
    double p = 0.5;
    if (const auto* c = std::get_if<ConstantParams>(&params)) {
        p = c->p;
    } else if (const auto* lin = std::get_if<LinearParams>(&params)) {
        const auto x = scaled_vec(scaling, sample.vec);
        double z = lin->b;
        for (std::size_t i = 0; i < x.size(); ++i) z += lin->w[i] * x[i];
        p = sigmoid(z);
    } else if (const auto* mlp = std::get_if<MlpParams>(&params)) {
        p = mlp_forward(*mlp, scaled_vec(scaling, sample.vec));
    } else if (const auto* st = std::get_if<StumpsParams>(&params)) {
        double score = st->base_score;
        for (const Tree& t : st->trees) score += st->shrinkage * tree_score(t, sample.vec);
        p = sigmoid(score);
    } else if (const auto* ds = std::get_if<DeepSetsParams>(&params)) {
        p = deepsets_forward(*ds, scaled_rows(scaling, sample.rows));
    }
    return clip_prob(p);
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

double log_loss_of(std::span<const double> preds, std::span<const int> labels) {
    double total = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const double p = clip_prob(preds[i]);
        total += labels[i] ? -std::log(p) : -std::log(1.0 - p);
    }
    return total / static_cast<double>(preds.size());
}

double ece_of(std::span<const double> preds, std::span<const int> labels, int bins) {
    std::vector<CalibrationBin> stats(static_cast<std::size_t>(bins));
    std::vector<double> conf_sum(static_cast<std::size_t>(bins), 0.0);
    std::vector<int> pos(static_cast<std::size_t>(bins), 0);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const int b = std::min(bins - 1, static_cast<int>(preds[i] * bins));
        stats[static_cast<std::size_t>(b)].size += 1;
        conf_sum[static_cast<std::size_t>(b)] += preds[i];
        pos[static_cast<std::size_t>(b)] += labels[i];
    }
    double ece = 0.0;
    for (int b = 0; b < bins; ++b) {
        const auto ub = static_cast<std::size_t>(b);
        if (stats[ub].size == 0) continue;
        const double acc = static_cast<double>(pos[ub]) / stats[ub].size;
        const double conf = conf_sum[ub] / stats[ub].size;
        ece += (static_cast<double>(stats[ub].size) / static_cast<double>(preds.size())) *
               std::abs(acc - conf);
    }
    return ece;
}

CalibrationReport evaluate(const TrainedModel& model, std::span<const Sample> test, int bins) {
    if (test.empty()) throw EmptyTest();
    std::vector<double> preds(test.size());
    std::vector<int> labels(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
        preds[i] = model.predict(test[i]);
        labels[i] = test[i].label;
    }

    CalibrationReport report;
    report.bins = bins;
    report.n = static_cast<int>(test.size());
    report.log_loss = log_loss_of(preds, labels);
    report.ece = ece_of(preds, labels, bins);

    report.bin_stats.assign(static_cast<std::size_t>(bins), {});
    std::vector<double> conf_sum(static_cast<std::size_t>(bins), 0.0);
    std::vector<int> pos(static_cast<std::size_t>(bins), 0);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const auto b = static_cast<std::size_t>(std::min(bins - 1, static_cast<int>(preds[i] * bins)));
        report.bin_stats[b].size += 1;
        conf_sum[b] += preds[i];
        pos[b] += labels[i];
    }
    for (std::size_t b = 0; b < report.bin_stats.size(); ++b) {
        if (report.bin_stats[b].size == 0) continue;
        report.bin_stats[b].acc = static_cast<double>(pos[b]) / report.bin_stats[b].size;
        report.bin_stats[b].conf = conf_sum[b] / report.bin_stats[b].size;
    }
    return report;
}

std::vector<std::pair<Tick, double>> win_curve(const TrainedModel& model, const GameRound& round,
                                               const ServerVars& vars) {
    std::vector<std::pair<Tick, double>> curve;
    curve.reserve(round.frames.size());
    for (const Frame& frame : round.frames) {
        Sample s;
        s.vec = featurize_vector(frame, {round.ct_start_eq_val, round.t_start_eq_val}, vars);
        s.rows = featurize_set(frame, vars);
        curve.emplace_back(frame.tick, model.predict(s));
    }
    return curve;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

std::string_view model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::LogisticRegression: return "logreg";
        case ModelKind::Mlp: return "mlp";
        case ModelKind::BoostedStumps: return "stumps";
        case ModelKind::DeepSets: return "deepsets";
    }
    return "?";
}

ModelKind model_kind_from_name(std::string_view name) {
    if (name == "logreg") return ModelKind::LogisticRegression;
    if (name == "mlp") return ModelKind::Mlp;
    if (name == "stumps") return ModelKind::BoostedStumps;
    if (name == "deepsets") return ModelKind::DeepSets;
    throw BadModelFile("unknown model kind '" + std::string(name) + "'");
}

namespace {

json mat_to_json(const Mat& m) { return json{{"rows", m.rows}, {"cols", m.cols}, {"a", m.a}}; }

Mat mat_from_json(const json& j) {
    Mat m(j.at("rows").get<int>(), j.at("cols").get<int>());
    m.a = j.at("a").get<std::vector<double>>();
    if (m.a.size() != static_cast<std::size_t>(m.rows) * static_cast<std::size_t>(m.cols))
        throw BadModelFile("matrix payload size mismatch");
    return m;
}

json params_to_json(const TrainedModel& model) {
    json j;
    if (const auto* c = std::get_if<ConstantParams>(&model.params)) {
        j["p"] = c->p;
    } else if (const auto* lin = std::get_if<LinearParams>(&model.params)) {
        j["w"] = lin->w;
        j["b"] = lin->b;
    } else if (const auto* mlp = std::get_if<MlpParams>(&model.params)) {
        j["w1"] = mat_to_json(mlp->w1);
        j["b1"] = mlp->b1;
        j["w2"] = mlp->w2;
        j["b2"] = mlp->b2;
    } else if (const auto* st = std::get_if<StumpsParams>(&model.params)) {
        j["baseScore"] = st->base_score;
        j["shrinkage"] = st->shrinkage;
        json trees = json::array();
        for (const Tree& t : st->trees) {
            json nodes = json::array();
            for (const TreeNode& n : t.nodes)
                nodes.push_back(json{{"feature", n.feature},
                                     {"threshold", n.threshold},
                                     {"left", n.left},
                                     {"right", n.right},
                                     {"value", n.value}});
            trees.push_back(json{{"nodes", std::move(nodes)}});
        }
        j["trees"] = std::move(trees);
    } else if (const auto* ds = std::get_if<DeepSetsParams>(&model.params)) {
        j["w1"] = mat_to_json(ds->w1);
        j["b1"] = ds->b1;
        j["w2"] = ds->w2;
        j["b2"] = ds->b2;
    }
    return j;
}

void params_from_json(const json& j, TrainedModel& model) {
    switch (model.kind) {
        case ModelKind::LogisticRegression: {
            if (j.contains("p")) {
                model.params = ConstantParams{j.at("p").get<double>()};
                break;
            }
            LinearParams lin;
            lin.w = j.at("w").get<std::vector<double>>();
            lin.b = j.at("b").get<double>();
            model.params = std::move(lin);
            break;
        }
        case ModelKind::Mlp: {
            if (j.contains("p")) {
                model.params = ConstantParams{j.at("p").get<double>()};
                break;
            }
            MlpParams mlp;
            mlp.w1 = mat_from_json(j.at("w1"));
            mlp.b1 = j.at("b1").get<std::vector<double>>();
            mlp.w2 = j.at("w2").get<std::vector<double>>();
            mlp.b2 = j.at("b2").get<double>();
            model.params = std::move(mlp);
            break;
        }
        case ModelKind::BoostedStumps: {
            if (j.contains("p")) {
                model.params = ConstantParams{j.at("p").get<double>()};
                break;
            }
            StumpsParams st;
            st.base_score = j.at("baseScore").get<double>();
            st.shrinkage = j.at("shrinkage").get<double>();
            for (const json& jt : j.at("trees")) {
                Tree t;
                for (const json& jn : jt.at("nodes")) {
                    TreeNode n;
                    n.feature = jn.at("feature").get<int>();
                    n.threshold = jn.at("threshold").get<double>();
                    n.left = jn.at("left").get<int>();
                    n.right = jn.at("right").get<int>();
                    n.value = jn.at("value").get<double>();
                    t.nodes.push_back(n);
                }
                st.trees.push_back(std::move(t));
            }
            model.params = std::move(st);
            break;
        }
        case ModelKind::DeepSets: {
            if (j.contains("p")) {
                model.params = ConstantParams{j.at("p").get<double>()};
                break;
            }
            DeepSetsParams ds;
            ds.w1 = mat_from_json(j.at("w1"));
            ds.b1 = j.at("b1").get<std::vector<double>>();
            ds.w2 = j.at("w2").get<std::vector<double>>();
            ds.b2 = j.at("b2").get<double>();
            model.params = std::move(ds);
            break;
        }
    }
}

}  // namespace

std::string model_to_json(const TrainedModel& model) {
    json j;
    j["version"] = 1;
    j["kind"] = std::string(model_kind_name(model.kind));
    j["scaling"] = json{{"lo", model.scaling.lo}, {"hi", model.scaling.hi}};
    j["params"] = params_to_json(model);
    return j.dump(2) + "\n";
}

TrainedModel model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw BadModelFile(std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("version").get<int>() != 1)
            throw BadModelFile("unsupported model file version");
        TrainedModel model;
        model.kind = model_kind_from_name(j.at("kind").get<std::string>());
        model.scaling.lo = j.at("scaling").at("lo").get<std::vector<double>>();
        model.scaling.hi = j.at("scaling").at("hi").get<std::vector<double>>();
        params_from_json(j.at("params"), model);
        return model;
    } catch (const json::exception& e) {
        throw BadModelFile(std::string("malformed model file: ") + e.what());
    }
}

void save_model(const TrainedModel& model, const std::string& path) {
    write_file_atomic(path, model_to_json(model));
}

TrainedModel load_model(const std::string& path) { return model_from_json(read_file(path)); }

}  // namespace demoforge
