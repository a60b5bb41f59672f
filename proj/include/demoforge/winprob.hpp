#pragma once

#include <array>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "demoforge/model.hpp"
#include "demoforge/rng.hpp"

namespace demoforge {

struct EmptyCorpus : Error {
    EmptyCorpus() : Error("no rounds to sample from") {}
};

struct EmptyTest : Error {
    EmptyTest() : Error("evaluation set is empty") {}
};

// Training diverged (NaN/inf loss); carries the epoch it happened in.
struct NonFiniteLoss : Error {
    using Error::Error;
};

struct BadModelFile : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Featurization
// ---------------------------------------------------------------------------

// Round-level values a frame alone does not carry.
struct RoundContext {
    int ct_start_eq_val = 0;
    int t_start_eq_val = 0;
};

// Fixed feature order of the flat game-state vector:
//   [0]  secondsSincePhaseChange
//   [1]  activeFires
//   [2]  activeSmokes
//   [3]  bombSiteA          (one-hot with [4] and [5])
//   [4]  bombSiteB
//   [5]  bombSiteNone
//   [6]  defuseKitsAlive
//   [7]  ctStartEqVal   [8] ctAliveCount  [9]  ctCurrentEqVal [10] ctTotalHp
//   [11] ctTotalArmor  [12] ctHelmets    [13] ctGrenades     [14] ctInBombZone
//   [15] tStartEqVal   [16] tAliveCount  [17] tCurrentEqVal  [18] tTotalHp
//   [19] tTotalArmor   [20] tHelmets     [21] tGrenades      [22] tInBombZone
//   [23] bombInTInventory
inline constexpr int kVectorFeatureCount = 24;

// Fixed feature order of one per-player row. The eight global features are
// repeated identically across all ten rows of a frame:
//   [0..7]  secondsSincePhaseChange, activeFires, activeSmokes, bombSiteA,
//           bombSiteB, bombSiteNone, defuseKitsAlive, bombInTInventory
//   [8..10] pos x,y,z   [11..13] vel x,y,z
//   [14] viewYaw  [15] viewPitch  [16] hp  [17] armor  [18] eqVal
//   [19] grenadesRemaining
//   [20] alive  [21] blinded  [22] inBombZone
//   [23] isCt  (row side marker; without it the pooled set cannot tell the
//               teams apart)
inline constexpr int kPlayerFeatureCount = 24;
inline constexpr int kPlayersPerFrame = 10;

std::span<const std::string_view> vector_feature_names();
std::span<const std::string_view> player_feature_names();

std::vector<double> featurize_vector(const Frame& frame, const RoundContext& ctx,
                                     const ServerVars& vars);
std::vector<std::array<double, kPlayerFeatureCount>> featurize_set(const Frame& frame,
                                                                   const ServerVars& vars);

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

struct Sample {
    int label = 0;  // 1 = CT wins the round
    std::vector<double> vec;
    std::vector<std::array<double, kPlayerFeatureCount>> rows;
    int round_num = 0;  // provenance, for determinism checks
    Tick tick = 0;
};

struct Dataset {
    std::vector<Sample> train;
    std::vector<Sample> val;
    std::vector<Sample> test;
};

// Accumulates one uniformly drawn frame per round, so a large corpus can be
// fed match by match without holding every frame in memory.
class DatasetBuilder {
  public:
    explicit DatasetBuilder(std::uint64_t seed) : rng_(seed) {}

    void add_round(const GameRound& round, const ServerVars& vars);

    // Shuffles and splits 70/10/20 (floor rule, remainder to test).
    Dataset build();

    std::size_t size() const { return samples_.size(); }

  private:
    Rng rng_;
    std::vector<Sample> samples_;
};

// One sample per round across all documents. Throws EmptyCorpus when no
// rounds exist; refuses corpora that span more than one map.
Dataset build_dataset(std::span<const DemoDocument> docs, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

enum class ModelKind { LogisticRegression, Mlp, BoostedStumps, DeepSets };

std::string_view model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(std::string_view name);  // throws BadModelFile

// Per-feature min-max ranges frozen at training time; constant features map
// to 0. Empty vectors mean no scaling (tree models).
struct FeatureScaling {
    std::vector<double> lo;
    std::vector<double> hi;

    double apply(double v, std::size_t i) const {
        const double span = hi[i] - lo[i];
        return span > 0.0 ? (v - lo[i]) / span : 0.0;
    }
};

// Dense row-major matrix, just big enough for the hand-written trainers.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}
    double& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
};

struct ConstantParams {
    double p = 0.5;
};

struct LinearParams {
    std::vector<double> w;
    double b = 0.0;
};

// One hidden ReLU layer, sigmoid head.
struct MlpParams {
    Mat w1;                   // hidden x in
    std::vector<double> b1;   // hidden
    std::vector<double> w2;   // hidden
    double b2 = 0.0;
};

// Encoder row -> hidden (ReLU), mean pool over rows, linear decoder.
// Pooling sums each hidden unit over rows in ascending value order, so the
// result is bit-identical under any row permutation.
struct DeepSetsParams {
    Mat w1;
    std::vector<double> b1;
    std::vector<double> w2;
    double b2 = 0.0;
};

struct TreeNode {
    int feature = -1;     // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;        // node indices; feature <= threshold goes left
    int right = -1;
    double value = 0.0;   // leaf score
};

struct Tree {
    std::vector<TreeNode> nodes;  // node 0 is the root
};

struct StumpsParams {
    double base_score = 0.0;  // initial logit
    double shrinkage = 0.1;
    std::vector<Tree> trees;
};

struct EpochLog {
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainedModel {
    ModelKind kind = ModelKind::LogisticRegression;
    std::variant<ConstantParams, LinearParams, MlpParams, StumpsParams, DeepSetsParams> params;
    FeatureScaling scaling;  // empty for tree models
    std::vector<EpochLog> training_log;

    // Probability that CT wins, in (0,1). DeepSets reads sample.rows, all
    // other kinds read sample.vec.
    double predict(const Sample& sample) const;
};

struct TrainConfig {
    int hidden = 128;
    int batch = 32;
    double lr = 0.001;
    int epochs = 100;
    int patience = 10;
    std::uint64_t seed = 1;
};

struct LogregConfig {
    double lr = 0.5;
    int iterations = 2000;
    double l2 = 1e-4;
};

struct StumpsConfig {
    int max_trees = 200;
    int max_depth = 3;
    double shrinkage = 0.1;
    double lambda = 1.0;  // L2 on leaf values
    int patience = 10;
};

// All trainers return a constant class-rate model when the training labels
// are single-class, and record per-epoch (or per-tree) losses in the log.
TrainedModel train_logreg(std::span<const Sample> train, std::span<const Sample> val,
                          const LogregConfig& config = {});
TrainedModel train_mlp(std::span<const Sample> train, std::span<const Sample> val,
                       const TrainConfig& config = {});
TrainedModel train_boosted_stumps(std::span<const Sample> train, std::span<const Sample> val,
                                  const StumpsConfig& config = {});
TrainedModel train_deepsets(std::span<const Sample> train, std::span<const Sample> val,
                            const TrainConfig& config = {});

// Mean negative log likelihood and its analytic parameter gradients on one
// batch of pre-scaled inputs; shared by the trainers and the
// finite-difference tests.
double mlp_loss(const MlpParams& p, std::span<const std::vector<double>> xs,
                std::span<const int> ys);
MlpParams mlp_gradient(const MlpParams& p, std::span<const std::vector<double>> xs,
                       std::span<const int> ys);
using SetInput = std::vector<std::array<double, kPlayerFeatureCount>>;
double deepsets_loss(const DeepSetsParams& p, std::span<const SetInput> xs,
                     std::span<const int> ys);
DeepSetsParams deepsets_gradient(const DeepSetsParams& p, std::span<const SetInput> xs,
                                 std::span<const int> ys);

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct CalibrationBin {
    int size = 0;
    double acc = 0.0;   // positive rate inside the bin
    double conf = 0.0;  // mean prediction inside the bin
};

struct CalibrationReport {
    int bins = 10;
    int n = 0;
    double log_loss = 0.0;
    double ece = 0.0;
    std::vector<CalibrationBin> bin_stats;
};

inline constexpr double kProbClip = 1e-12;

// Mean NLL with predictions clipped to [kProbClip, 1-kProbClip].
double log_loss_of(std::span<const double> preds, std::span<const int> labels);

// Expected calibration error over `bins` equal-width bins on [0,1]; the final
// bin is right-inclusive and empty bins contribute nothing.
double ece_of(std::span<const double> preds, std::span<const int> labels, int bins = 10);

CalibrationReport evaluate(const TrainedModel& model, std::span<const Sample> test,
                           int bins = 10);

// One prediction per frame, in tick order.
std::vector<std::pair<Tick, double>> win_curve(const TrainedModel& model, const GameRound& round,
                                               const ServerVars& vars);

// ---------------------------------------------------------------------------
// Persistence (versioned JSON weight files)
// ---------------------------------------------------------------------------

std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const std::string& text);  // throws BadModelFile
void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

}  // namespace demoforge
