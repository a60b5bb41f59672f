#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "demoforge/rng.hpp"
#include "demoforge/winprob.hpp"

namespace demoforge {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double clip_prob(double p) { return std::clamp(p, kProbClip, 1.0 - kProbClip); }

double nll(double p, int y) {
    p = clip_prob(p);
    return y ? -std::log(p) : -std::log(1.0 - p);
}

// Single-class training labels leave nothing to fit; the fallback is a
// constant model at the (clipped) class rate.
std::optional<TrainedModel> degenerate_model(ModelKind kind, std::span<const Sample> train) {
    if (train.empty()) throw EmptyCorpus();
    double rate = 0.0;
    for (const Sample& s : train) rate += s.label;
    rate /= static_cast<double>(train.size());
    if (rate > 0.0 && rate < 1.0) return std::nullopt;
    TrainedModel model;
    model.kind = kind;
    model.params = ConstantParams{clip_prob(rate)};
    return model;
}

FeatureScaling fit_vec_scaling(std::span<const Sample> train) {
    FeatureScaling s;
    s.lo.assign(train.front().vec.size(), std::numeric_limits<double>::infinity());
    s.hi.assign(train.front().vec.size(), -std::numeric_limits<double>::infinity());
    for (const Sample& sample : train)
        for (std::size_t i = 0; i < sample.vec.size(); ++i) {
            s.lo[i] = std::min(s.lo[i], sample.vec[i]);
            s.hi[i] = std::max(s.hi[i], sample.vec[i]);
        }
    return s;
}

// One range per column across every row of every training sample, so all ten
// rows of a frame share the same transform.
FeatureScaling fit_row_scaling(std::span<const Sample> train) {
    FeatureScaling s;
    s.lo.assign(kPlayerFeatureCount, std::numeric_limits<double>::infinity());
    s.hi.assign(kPlayerFeatureCount, -std::numeric_limits<double>::infinity());
    for (const Sample& sample : train)
        for (const auto& row : sample.rows)
            for (std::size_t i = 0; i < row.size(); ++i) {
                s.lo[i] = std::min(s.lo[i], row[i]);
                s.hi[i] = std::max(s.hi[i], row[i]);
            }
    return s;
}

std::vector<std::vector<double>> scale_vecs(const FeatureScaling& scaling,
                                            std::span<const Sample> samples) {
    std::vector<std::vector<double>> xs(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        xs[i] = samples[i].vec;
        for (std::size_t j = 0; j < xs[i].size(); ++j) xs[i][j] = scaling.apply(xs[i][j], j);
    }
    return xs;
}

std::vector<SetInput> scale_sets(const FeatureScaling& scaling, std::span<const Sample> samples) {
    std::vector<SetInput> xs(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        xs[i] = samples[i].rows;
        for (auto& row : xs[i])
            for (std::size_t j = 0; j < row.size(); ++j) row[j] = scaling.apply(row[j], j);
    }
    return xs;
}

std::vector<int> labels_of(std::span<const Sample> samples) {
    std::vector<int> ys(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) ys[i] = samples[i].label;
    return ys;
}

}  // namespace

// ---------------------------------------------------------------------------
// Logistic regression: full-batch gradient descent on min-max scaled inputs.
// ---------------------------------------------------------------------------

TrainedModel train_logreg(std::span<const Sample> train, std::span<const Sample> val,
                          const LogregConfig& config) {
    if (auto fallback = degenerate_model(ModelKind::LogisticRegression, train)) return *fallback;

    TrainedModel model;
    model.kind = ModelKind::LogisticRegression;
    model.scaling = fit_vec_scaling(train);

    const auto xs = scale_vecs(model.scaling, train);
    const auto ys = labels_of(train);
    const auto val_xs = scale_vecs(model.scaling, val);
    const auto val_ys = labels_of(val);
    const std::size_t n = xs.size();
    const std::size_t dim = xs.front().size();

    LinearParams p;
    p.w.assign(dim, 0.0);

    std::vector<double> grad(dim);
    for (int iter = 0; iter < config.iterations; ++iter) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_b = 0.0;
        double train_loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double z = p.b;
            for (std::size_t j = 0; j < dim; ++j) z += p.w[j] * xs[i][j];
            const double prob = sigmoid(z);
            train_loss += nll(prob, ys[i]);
            const double err = prob - ys[i];
            for (std::size_t j = 0; j < dim; ++j) grad[j] += err * xs[i][j];
            grad_b += err;
        }
        train_loss /= static_cast<double>(n);
        for (std::size_t j = 0; j < dim; ++j)
            p.w[j] -= config.lr * (grad[j] / static_cast<double>(n) + config.l2 * p.w[j]);
        p.b -= config.lr * grad_b / static_cast<double>(n);

        double val_loss = train_loss;
        if (!val_xs.empty()) {
            val_loss = 0.0;
            for (std::size_t i = 0; i < val_xs.size(); ++i) {
                double z = p.b;
                for (std::size_t j = 0; j < dim; ++j) z += p.w[j] * val_xs[i][j];
                val_loss += nll(sigmoid(z), val_ys[i]);
            }
            val_loss /= static_cast<double>(val_xs.size());
        }
        model.training_log.push_back({train_loss, val_loss});
    }

    model.params = std::move(p);
    return model;
}

// ---------------------------------------------------------------------------
// MLP loss / gradient, shared with the finite-difference tests.
// ---------------------------------------------------------------------------

double mlp_loss(const MlpParams& p, std::span<const std::vector<double>> xs,
                std::span<const int> ys) {
    const int hidden = p.w1.rows;
    double total = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double z2 = p.b2;
        for (int h = 0; h < hidden; ++h) {
            double a = p.b1[static_cast<std::size_t>(h)];
            for (int j = 0; j < p.w1.cols; ++j) a += p.w1.at(h, j) * xs[i][static_cast<std::size_t>(j)];
            if (a > 0.0) z2 += p.w2[static_cast<std::size_t>(h)] * a;
        }
        total += nll(sigmoid(z2), ys[i]);
    }
    return total / static_cast<double>(xs.size());
}

MlpParams mlp_gradient(const MlpParams& p, std::span<const std::vector<double>> xs,
                       std::span<const int> ys) {
    const int hidden = p.w1.rows;
    const int in = p.w1.cols;
    MlpParams g;
    g.w1 = Mat(hidden, in);
    g.b1.assign(static_cast<std::size_t>(hidden), 0.0);
    g.w2.assign(static_cast<std::size_t>(hidden), 0.0);
    g.b2 = 0.0;

    const double inv_n = 1.0 / static_cast<double>(xs.size());
    std::vector<double> act(static_cast<std::size_t>(hidden));
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double z2 = p.b2;
        for (int h = 0; h < hidden; ++h) {
            double a = p.b1[static_cast<std::size_t>(h)];
            for (int j = 0; j < in; ++j) a += p.w1.at(h, j) * xs[i][static_cast<std::size_t>(j)];
            act[static_cast<std::size_t>(h)] = a;
            if (a > 0.0) z2 += p.w2[static_cast<std::size_t>(h)] * a;
        }
        // d(mean NLL)/dz2 = (sigma(z2) - y) / n, the clip only guards the log.
        const double dz2 = (sigmoid(z2) - ys[i]) * inv_n;
        g.b2 += dz2;
        for (int h = 0; h < hidden; ++h) {
            const auto uh = static_cast<std::size_t>(h);
            if (act[uh] <= 0.0) continue;
            g.w2[uh] += dz2 * act[uh];
            const double dz1 = dz2 * p.w2[uh];
            g.b1[uh] += dz1;
            for (int j = 0; j < in; ++j) g.w1.at(h, j) += dz1 * xs[i][static_cast<std::size_t>(j)];
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// DeepSets loss / gradient. The pooled mean is a plain sum over rows, so the
// ascending-order summation used for bit-exact invariance leaves the
// analytic gradient untouched.
// ---------------------------------------------------------------------------

namespace {

double deepsets_forward_z(const DeepSetsParams& p, const SetInput& rows,
                          std::vector<double>* acts_out) {
    const int hidden = p.w1.rows;
    const double inv_r = 1.0 / static_cast<double>(rows.size());
    std::vector<double> acts(rows.size());
    double z2 = p.b2;
    for (int h = 0; h < hidden; ++h) {
        for (std::size_t r = 0; r < rows.size(); ++r) {
            double a = p.b1[static_cast<std::size_t>(h)];
            for (int j = 0; j < p.w1.cols; ++j) a += p.w1.at(h, j) * rows[r][static_cast<std::size_t>(j)];
            if (acts_out) (*acts_out)[static_cast<std::size_t>(h) * rows.size() + r] = a;
            acts[r] = a > 0.0 ? a : 0.0;
        }
        // Ascending-order summation keeps the pooled value (and thus the
        // loss) bit-identical under row permutation.
        std::sort(acts.begin(), acts.end());
        double sum = 0.0;
        for (const double a : acts) sum += a;
        z2 += p.w2[static_cast<std::size_t>(h)] * sum * inv_r;
    }
    return z2;
}

}  // namespace

double deepsets_loss(const DeepSetsParams& p, std::span<const SetInput> xs,
                     std::span<const int> ys) {
    double total = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
        total += nll(sigmoid(deepsets_forward_z(p, xs[i], nullptr)), ys[i]);
    return total / static_cast<double>(xs.size());
}

DeepSetsParams deepsets_gradient(const DeepSetsParams& p, std::span<const SetInput> xs,
                                 std::span<const int> ys) {
    const int hidden = p.w1.rows;
    const int in = p.w1.cols;
    DeepSetsParams g;
    g.w1 = Mat(hidden, in);
    g.b1.assign(static_cast<std::size_t>(hidden), 0.0);
    g.w2.assign(static_cast<std::size_t>(hidden), 0.0);
    g.b2 = 0.0;

    const double inv_n = 1.0 / static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const SetInput& rows = xs[i];
        const double inv_r = 1.0 / static_cast<double>(rows.size());
        std::vector<double> acts(static_cast<std::size_t>(hidden) * rows.size());
        const double z2 = deepsets_forward_z(p, rows, &acts);
        const double dz2 = (sigmoid(z2) - ys[i]) * inv_n;
        g.b2 += dz2;
        for (int h = 0; h < hidden; ++h) {
            const auto uh = static_cast<std::size_t>(h);
            double pooled = 0.0;
            for (std::size_t r = 0; r < rows.size(); ++r) {
                const double a = acts[uh * rows.size() + r];
                if (a > 0.0) pooled += a;
            }
            g.w2[uh] += dz2 * pooled * inv_r;
            const double dpool = dz2 * p.w2[uh] * inv_r;
            for (std::size_t r = 0; r < rows.size(); ++r) {
                if (acts[uh * rows.size() + r] <= 0.0) continue;
                g.b1[uh] += dpool;
                for (int j = 0; j < in; ++j)
                    g.w1.at(h, j) += dpool * rows[r][static_cast<std::size_t>(j)];
            }
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Adam over a flattened parameter vector, shared by the MLP and DeepSets
// training loops.
// ---------------------------------------------------------------------------

namespace {

struct FlatParams {
    std::vector<double> theta;

    static FlatParams flatten(const MlpParams& p) {
        FlatParams f;
        f.theta.reserve(p.w1.a.size() + p.b1.size() + p.w2.size() + 1);
        f.theta.insert(f.theta.end(), p.w1.a.begin(), p.w1.a.end());
        f.theta.insert(f.theta.end(), p.b1.begin(), p.b1.end());
        f.theta.insert(f.theta.end(), p.w2.begin(), p.w2.end());
        f.theta.push_back(p.b2);
        return f;
    }

    void unflatten(MlpParams& p) const {
        std::size_t k = 0;
        std::copy_n(theta.begin(), p.w1.a.size(), p.w1.a.begin());
        k += p.w1.a.size();
        std::copy_n(theta.begin() + static_cast<std::ptrdiff_t>(k), p.b1.size(), p.b1.begin());
        k += p.b1.size();
        std::copy_n(theta.begin() + static_cast<std::ptrdiff_t>(k), p.w2.size(), p.w2.begin());
        k += p.w2.size();
        p.b2 = theta[k];
    }
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    int t = 0;
    double lr;

    explicit AdamState(std::size_t dim, double learning_rate)
        : m(dim, 0.0), v(dim, 0.0), lr(learning_rate) {}

    void step(std::vector<double>& theta, const std::vector<double>& grad) {
        constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
        ++t;
        const double bc1 = 1.0 - std::pow(kBeta1, t);
        const double bc2 = 1.0 - std::pow(kBeta2, t);
        for (std::size_t i = 0; i < theta.size(); ++i) {
            m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * grad[i];
            v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * grad[i] * grad[i];
            theta[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + kEps);
        }
    }
};

MlpParams glorot_init(int hidden, int in, Rng& rng) {
    MlpParams p;
    p.w1 = Mat(hidden, in);
    p.b1.assign(static_cast<std::size_t>(hidden), 0.0);
    p.w2.assign(static_cast<std::size_t>(hidden), 0.0);
    const double lim1 = std::sqrt(6.0 / (in + hidden));
    for (double& w : p.w1.a) w = rng.uniform(-lim1, lim1);
    const double lim2 = std::sqrt(6.0 / (hidden + 1));
    for (double& w : p.w2) w = rng.uniform(-lim2, lim2);
    return p;
}

// Shared mini-batch Adam loop: LossFn/GradFn close over the epoch's batch
// slices. Keeps the weights from the best-val epoch and stops after
// `patience` epochs without improvement.
template <typename Inputs, typename LossFn, typename GradFn>
void run_adam(MlpParams& p, const Inputs& xs, const std::vector<int>& ys, const Inputs& val_xs,
              const std::vector<int>& val_ys, const TrainConfig& config, LossFn loss_fn,
              GradFn grad_fn, std::vector<EpochLog>& log) {
    Rng rng(config.seed);
    FlatParams flat = FlatParams::flatten(p);
    AdamState adam(flat.theta.size(), config.lr);

    MlpParams best = p;
    double best_val = std::numeric_limits<double>::infinity();
    int stale = 0;

    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), 0);

    std::vector<int> batch_y;
    Inputs batch_xs;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t at = 0; at < order.size(); at += static_cast<std::size_t>(config.batch)) {
            const std::size_t stop = std::min(order.size(), at + static_cast<std::size_t>(config.batch));
            batch_xs.clear();
            batch_y.clear();
            for (std::size_t k = at; k < stop; ++k) {
                batch_xs.push_back(xs[order[k]]);
                batch_y.push_back(ys[order[k]]);
            }
            const MlpParams grad = grad_fn(p, batch_xs, batch_y);
            const FlatParams flat_grad = FlatParams::flatten(grad);
            adam.step(flat.theta, flat_grad.theta);
            flat.unflatten(p);
        }

        const double train_loss = loss_fn(p, xs, ys);
        const double val_loss = val_xs.empty() ? train_loss : loss_fn(p, val_xs, val_ys);
        if (!std::isfinite(train_loss) || !std::isfinite(val_loss))
            throw NonFiniteLoss("training loss became non-finite at epoch " +
                                std::to_string(epoch + 1));
        log.push_back({train_loss, val_loss});

        if (val_loss < best_val) {
            best_val = val_loss;
            best = p;
            stale = 0;
        } else if (++stale >= config.patience) {
            break;
        }
    }
    if (best_val < std::numeric_limits<double>::infinity()) p = best;
}

}  // namespace

TrainedModel train_mlp(std::span<const Sample> train, std::span<const Sample> val,
                       const TrainConfig& config) {
    if (auto fallback = degenerate_model(ModelKind::Mlp, train)) return *fallback;

    TrainedModel model;
    model.kind = ModelKind::Mlp;
    model.scaling = fit_vec_scaling(train);

    const auto xs = scale_vecs(model.scaling, train);
    const auto ys = labels_of(train);
    const auto val_xs = scale_vecs(model.scaling, val);
    const auto val_ys = labels_of(val);

    Rng init_rng(config.seed);
    MlpParams p = glorot_init(config.hidden, static_cast<int>(xs.front().size()), init_rng);

    run_adam(
        p, xs, ys, val_xs, val_ys, config,
        [](const MlpParams& q, const std::vector<std::vector<double>>& bx,
           const std::vector<int>& by) { return mlp_loss(q, bx, by); },
        [](const MlpParams& q, const std::vector<std::vector<double>>& bx,
           const std::vector<int>& by) { return mlp_gradient(q, bx, by); },
        model.training_log);

    model.params = std::move(p);
    return model;
}

TrainedModel train_deepsets(std::span<const Sample> train, std::span<const Sample> val,
                            const TrainConfig& config) {
    if (auto fallback = degenerate_model(ModelKind::DeepSets, train)) return *fallback;

    TrainedModel model;
    model.kind = ModelKind::DeepSets;
    model.scaling = fit_row_scaling(train);

    const auto xs = scale_sets(model.scaling, train);
    const auto ys = labels_of(train);
    const auto val_xs = scale_sets(model.scaling, val);
    const auto val_ys = labels_of(val);

    Rng init_rng(config.seed);
    MlpParams p = glorot_init(config.hidden, kPlayerFeatureCount, init_rng);

    run_adam(
        p, xs, ys, val_xs, val_ys, config,
        [](const MlpParams& q, const std::vector<SetInput>& bx, const std::vector<int>& by) {
            const DeepSetsParams d{q.w1, q.b1, q.w2, q.b2};
            return deepsets_loss(d, bx, by);
        },
        [](const MlpParams& q, const std::vector<SetInput>& bx, const std::vector<int>& by) {
            const DeepSetsParams d{q.w1, q.b1, q.w2, q.b2};
            const DeepSetsParams g = deepsets_gradient(d, bx, by);
            return MlpParams{g.w1, g.b1, g.w2, g.b2};
        },
        model.training_log);

    model.params = DeepSetsParams{std::move(p.w1), std::move(p.b1), std::move(p.w2), p.b2};
    return model;
}

// ---------------------------------------------------------------------------
// Newton-boosted trees on raw (unscaled) features.
// ---------------------------------------------------------------------------

namespace {

struct GradHess {
    double g = 0.0;
    double h = 0.0;
};

// Exact greedy split search: returns the gain over keeping the node a leaf,
// along with the chosen feature/threshold partition.
struct SplitResult {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
};

SplitResult best_split(const std::vector<std::vector<double>>& xs,
                       const std::vector<GradHess>& gh, const std::vector<std::size_t>& node,
                       double lambda) {
    double g_total = 0.0, h_total = 0.0;
    for (const std::size_t i : node) {
        g_total += gh[i].g;
        h_total += gh[i].h;
    }
    const double parent_obj = g_total * g_total / (h_total + lambda);

    SplitResult best;
    const std::size_t dim = xs.front().size();
    std::vector<std::size_t> order(node);
    for (std::size_t f = 0; f < dim; ++f) {
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return xs[a][f] < xs[b][f]; });
        double g_left = 0.0, h_left = 0.0;
        for (std::size_t k = 0; k + 1 < order.size(); ++k) {
            g_left += gh[order[k]].g;
            h_left += gh[order[k]].h;
            const double v = xs[order[k]][f];
            const double next = xs[order[k + 1]][f];
            if (v == next) continue;  // split points sit between distinct values
            const double g_right = g_total - g_left;
            const double h_right = h_total - h_left;
            const double gain = g_left * g_left / (h_left + lambda) +
                                g_right * g_right / (h_right + lambda) - parent_obj;
            if (gain > best.gain + 1e-12) {
                best.gain = gain;
                best.feature = static_cast<int>(f);
                best.threshold = (v + next) / 2.0;
                best.left.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k + 1));
                best.right.assign(order.begin() + static_cast<std::ptrdiff_t>(k + 1), order.end());
            }
        }
    }
    return best;
}

int grow_node(Tree& tree, const std::vector<std::vector<double>>& xs,
              const std::vector<GradHess>& gh, const std::vector<std::size_t>& node, int depth,
              int max_depth, double lambda) {
    const int idx = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    SplitResult split;
    if (depth < max_depth && node.size() >= 2) split = best_split(xs, gh, node, lambda);

    if (split.feature < 0) {
        double g = 0.0, h = 0.0;
        for (const std::size_t i : node) {
            g += gh[i].g;
            h += gh[i].h;
        }
        tree.nodes[static_cast<std::size_t>(idx)].value = -g / (h + lambda);
        return idx;
    }

    const int left = grow_node(tree, xs, gh, split.left, depth + 1, max_depth, lambda);
    const int right = grow_node(tree, xs, gh, split.right, depth + 1, max_depth, lambda);
    TreeNode& n = tree.nodes[static_cast<std::size_t>(idx)];
    n.feature = split.feature;
    n.threshold = split.threshold;
    n.left = left;
    n.right = right;
    return idx;
}

double tree_score_raw(const Tree& tree, const std::vector<double>& x) {
    int node = 0;
    for (;;) {
        const TreeNode& n = tree.nodes[static_cast<std::size_t>(node)];
        if (n.feature < 0) return n.value;
        node = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
}

}  // namespace

TrainedModel train_boosted_stumps(std::span<const Sample> train, std::span<const Sample> val,
                                  const StumpsConfig& config) {
    if (auto fallback = degenerate_model(ModelKind::BoostedStumps, train)) return *fallback;

    TrainedModel model;
    model.kind = ModelKind::BoostedStumps;

    std::vector<std::vector<double>> xs(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) xs[i] = train[i].vec;
    const auto ys = labels_of(train);
    std::vector<std::vector<double>> val_xs(val.size());
    for (std::size_t i = 0; i < val.size(); ++i) val_xs[i] = val[i].vec;
    const auto val_ys = labels_of(val);

    double rate = 0.0;
    for (const int y : ys) rate += y;
    rate /= static_cast<double>(ys.size());

    StumpsParams p;
    p.base_score = std::log(rate / (1.0 - rate));
    p.shrinkage = config.shrinkage;

    std::vector<std::size_t> all(train.size());
    std::iota(all.begin(), all.end(), 0);
    std::vector<double> score(train.size(), p.base_score);
    std::vector<double> val_score(val.size(), p.base_score);
    std::vector<GradHess> gh(train.size());

    double best_val = std::numeric_limits<double>::infinity();
    std::size_t best_trees = 0;
    int stale = 0;

    for (int round = 0; round < config.max_trees; ++round) {
        for (std::size_t i = 0; i < train.size(); ++i) {
            const double prob = sigmoid(score[i]);
            gh[i].g = prob - ys[i];
            gh[i].h = std::max(prob * (1.0 - prob), 1e-16);
        }

        Tree tree;
        grow_node(tree, xs, gh, all, 0, config.max_depth, config.lambda);
        if (tree.nodes.size() == 1 && tree.nodes[0].value == 0.0) break;  // nothing left to fit
        p.trees.push_back(tree);

        double train_loss = 0.0;
        for (std::size_t i = 0; i < train.size(); ++i) {
            score[i] += config.shrinkage * tree_score_raw(tree, xs[i]);
            train_loss += nll(sigmoid(score[i]), ys[i]);
        }
        train_loss /= static_cast<double>(train.size());

        double val_loss = train_loss;
        if (!val_xs.empty()) {
            val_loss = 0.0;
            for (std::size_t i = 0; i < val_xs.size(); ++i) {
                val_score[i] += config.shrinkage * tree_score_raw(tree, val_xs[i]);
                val_loss += nll(sigmoid(val_score[i]), val_ys[i]);
            }
            val_loss /= static_cast<double>(val_xs.size());
        }
        model.training_log.push_back({train_loss, val_loss});

        if (val_loss < best_val) {
            best_val = val_loss;
            best_trees = p.trees.size();
            stale = 0;
        } else if (++stale >= config.patience) {
            break;
        }
    }

    p.trees.resize(best_trees);
    model.params = std::move(p);
    return model;
}

}  // namespace demoforge
