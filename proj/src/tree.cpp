#include "hct/tree.hpp"

#include "hct/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace hct {

namespace {

constexpr int kFormatVersion = 1;
constexpr int kParallelCutoff = 256;  // below this a subtree builds inline

struct BuildContext {
    const BuildConfig* config;
    std::atomic<int> fork_permits{0};
    std::atomic<int> degenerate_splits{0};
};

std::unique_ptr<TreeNode> build_recursive(const SimilarityView& view,
                                          BuildContext& ctx, std::uint64_t node_seed,
                                          int depth, int& subtree_depth) {
    auto node = std::make_unique<TreeNode>();
    node->leaf_count = view.size();
    if (view.size() <= ctx.config->leaf_max) {
        node->point_ids = view.ids();
        subtree_depth = depth;
        return node;
    }

    SplitPlan plan = run_split(view, *ctx.config, node_seed);
    if (plan.degenerate) ctx.degenerate_splits.fetch_add(1, std::memory_order_relaxed);
    node->direction = std::move(plan.direction);
    node->threshold = plan.threshold;
    node->degree_context = std::move(plan.degree_context);

    SimilarityView left_view = view.restrict(plan.left_positions);
    SimilarityView right_view = view.restrict(plan.right_positions);
    const std::uint64_t left_seed = mix_seed(node_seed, 1);
    const std::uint64_t right_seed = mix_seed(node_seed, 2);

    int left_depth = depth, right_depth = depth;
    // Child seeds are fixed before forking, so the result is identical for
    // any thread count.
    const bool fork = view.size() >= kParallelCutoff &&
                      ctx.fork_permits.fetch_sub(1, std::memory_order_acq_rel) > 0;
    if (fork) {
        auto right_future = std::async(std::launch::async, [&]() {
            return build_recursive(right_view, ctx, right_seed, depth + 1, right_depth);
        });
        node->left = build_recursive(left_view, ctx, left_seed, depth + 1, left_depth);
        node->right = right_future.get();
    } else {
        node->left = build_recursive(left_view, ctx, left_seed, depth + 1, left_depth);
        node->right = build_recursive(right_view, ctx, right_seed, depth + 1, right_depth);
    }
    ctx.fork_permits.fetch_add(1, std::memory_order_acq_rel);
    subtree_depth = std::max(left_depth, right_depth);
    return node;
}

int count_nodes(const TreeNode& node) {
    if (node.is_leaf()) return 1;
    return 1 + count_nodes(*node.left) + count_nodes(*node.right);
}

void collect_ids(const TreeNode& node, std::vector<int>& out) {
    if (node.is_leaf()) {
        out.insert(out.end(), node.point_ids.begin(), node.point_ids.end());
        return;
    }
    collect_ids(*node.left, out);
    collect_ids(*node.right, out);
}

std::string format_double17(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

void append_vector(std::string& out, const Eigen::VectorXd& v) {
    out += '[';
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += format_double17(v[i]);
    }
    out += ']';
}

void serialize_one(const TreeNode& node, std::string& out) {
    out += "{\"leaf_count\":" + std::to_string(node.leaf_count);
    if (node.is_leaf()) {
        out += ",\"points\":[";
        for (size_t i = 0; i < node.point_ids.size(); ++i) {
            if (i) out += ',';
            out += std::to_string(node.point_ids[i]);
        }
        out += "]}";
        return;
    }
    if (node.direction) {
        out += ",\"direction\":";
        append_vector(out, *node.direction);
    }
    if (node.threshold) {
        out += ",\"threshold\":" + format_double17(*node.threshold);
    }
    if (node.degree_context) {
        out += ",\"row_sum\":";
        append_vector(out, *node.degree_context);
    }
    out += '}';
}

using json = nlohmann::json;

Eigen::VectorXd vector_from_json(const json& arr) {
    if (!arr.is_array()) throw std::runtime_error("corrupt tree file: expected array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
    for (size_t i = 0; i < arr.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    }
    return v;
}

std::unique_ptr<TreeNode> parse_nodes(const json& nodes, size_t& cursor, int depth,
                                      int& max_depth) {
    if (cursor >= nodes.size()) {
        throw std::runtime_error("corrupt tree file: truncated node array");
    }
    const json& obj = nodes[cursor++];
    if (!obj.is_object() || !obj.contains("leaf_count")) {
        throw std::runtime_error("corrupt tree file: malformed node");
    }
    auto node = std::make_unique<TreeNode>();
    node->leaf_count = obj.at("leaf_count").get<int>();
    max_depth = std::max(max_depth, depth);
    if (obj.contains("points")) {
        node->point_ids = obj.at("points").get<std::vector<int>>();
        if (static_cast<int>(node->point_ids.size()) != node->leaf_count) {
            throw std::runtime_error("corrupt tree file: leaf size mismatch");
        }
        return node;
    }
    if (obj.contains("direction")) node->direction = vector_from_json(obj.at("direction"));
    if (obj.contains("threshold")) node->threshold = obj.at("threshold").get<double>();
    if (obj.contains("row_sum")) node->degree_context = vector_from_json(obj.at("row_sum"));
    node->left = parse_nodes(nodes, cursor, depth + 1, max_depth);
    node->right = parse_nodes(nodes, cursor, depth + 1, max_depth);
    if (node->leaf_count != node->left->leaf_count + node->right->leaf_count) {
        throw std::runtime_error("corrupt tree file: leaf counts do not add up");
    }
    return node;
}

}  // namespace

HCTree HCTree::build_common(const SimilarityView& view, const BuildConfig& config,
                            int n, int dim, bool vector_mode) {
    if (config.leaf_max < 1) throw std::invalid_argument("leaf_max must be >= 1");
    if (config.knn_bucket < 1) throw std::invalid_argument("bucket size must be >= 1");
    BuildContext ctx;
    ctx.config = &config;
    ctx.fork_permits.store(std::max(0, config.threads - 1));
    int depth = 0;
    HCTree tree;
    tree.root_ = build_recursive(view, ctx, mix_seed(config.seed, 0x726f6f74ULL), 0, depth);
    tree.config_ = config;
    tree.n_ = n;
    tree.dim_ = dim;
    tree.vector_mode_ = vector_mode;
    tree.stats_.depth = depth;
    tree.stats_.node_count = count_nodes(*tree.root_);
    tree.stats_.degenerate_splits = ctx.degenerate_splits.load();
    return tree;
}

HCTree HCTree::build(const VectorDataset& data, const BuildConfig& config) {
    if (data.n() < 1) throw std::invalid_argument("empty dataset");
    return build_common(SimilarityView::implicit(data), config, data.n(), data.dim(), true);
}

HCTree HCTree::build(const ExplicitGraph& graph, const BuildConfig& config) {
    if (config.rule != SplitRule::ApproxEigenvector) {
        throw std::invalid_argument("graph mode supports only the aev rule");
    }
    return build_common(SimilarityView::explicit_graph(graph), config, graph.n(), 0, false);
}

int HCTree::leaf_count() const {
    int leaves = 0;
    std::vector<const TreeNode*> stack{root_.get()};
    while (!stack.empty()) {
        const TreeNode* node = stack.back();
        stack.pop_back();
        if (node->is_leaf()) {
            ++leaves;
        } else {
            stack.push_back(node->left.get());
            stack.push_back(node->right.get());
        }
    }
    return leaves;
}

std::vector<std::vector<int>> HCTree::leaves() const {
    std::vector<std::vector<int>> out;
    std::function<void(const TreeNode&)> walk = [&](const TreeNode& node) {
        if (node.is_leaf()) {
            out.push_back(node.point_ids);
            return;
        }
        walk(*node.left);
        walk(*node.right);
    };
    walk(*root_);
    return out;
}

const TreeNode* HCTree::descend(const Eigen::VectorXd& x, int bucket, int* visited) const {
    if (!vector_mode_) throw std::logic_error("graph-mode trees are not queryable");
    if (bucket < 1) throw std::invalid_argument("bucket size must be >= 1");
    if (x.size() != dim_) throw std::invalid_argument("query dimension mismatch");
    if (!x.allFinite()) throw std::invalid_argument("query vector must be finite");

    const TreeNode* node = root_.get();
    int count = 1;
    while (!node->is_leaf() && node->leaf_count >= bucket) {
        if (!node->direction || !node->threshold) {
            throw std::logic_error("internal node is missing its hyperplane");
        }
        double coord = node->direction->dot(x);
        if (node->degree_context) {
            const double deg = std::max(x.dot(*node->degree_context), 1e-12);
            coord /= std::sqrt(deg);
        }
        node = (coord <= *node->threshold) ? node->left.get() : node->right.get();
        ++count;
    }
    if (visited) *visited = count;
    return node;
}

std::vector<int> HCTree::query(const Eigen::VectorXd& x, int bucket) const {
    const TreeNode* node = descend(x, bucket, nullptr);
    std::vector<int> ids;
    ids.reserve(node->leaf_count);
    collect_ids(*node, ids);
    return ids;
}

int HCTree::query_path_nodes(const Eigen::VectorXd& x, int bucket) const {
    int visited = 0;
    descend(x, bucket, &visited);
    return visited;
}

ClassifyResult HCTree::classify(const VectorDataset& train, const Eigen::VectorXd& x,
                                int k, int bucket) const {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (!train.labels) throw std::invalid_argument("training labels required");
    if (train.n() != n_) throw std::invalid_argument("training set size mismatch");
    const std::vector<int>& labels = *train.labels;

    std::vector<int> candidates = query(x, bucket);
    if (candidates.empty()) throw std::logic_error("empty candidate set");

    std::vector<std::pair<double, int>> by_distance;  // (distance, id)
    by_distance.reserve(candidates.size());
    for (int id : candidates) {
        by_distance.emplace_back((train.points.row(id).transpose() - x).norm(), id);
    }
    const int used = std::min<int>(k, static_cast<int>(by_distance.size()));
    std::partial_sort(by_distance.begin(), by_distance.begin() + used, by_distance.end());

    std::map<int, std::pair<int, double>> votes;  // class -> (count, cum distance)
    double distance_sum = 0.0;
    ClassifyResult res;
    res.candidate_count = static_cast<int>(candidates.size());
    for (int i = 0; i < used; ++i) {
        const auto& [dist, id] = by_distance[i];
        res.neighbor_ids.push_back(id);
        distance_sum += dist;
        auto& entry = votes[labels[id]];
        entry.first += 1;
        entry.second += dist;
    }
    res.mean_knn_distance = distance_sum / used;

    int best_label = -1;
    int best_count = -1;
    double best_cum = 0.0;
    for (const auto& [cls, entry] : votes) {
        const auto& [count, cum] = entry;
        if (count > best_count ||
            (count == best_count && (cum < best_cum ||
                                     (cum == best_cum && cls < best_label)))) {
            best_label = cls;
            best_count = count;
            best_cum = cum;
        }
    }
    res.label = best_label;
    return res;
}

void HCTree::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    const std::string text = to_json();
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

HCTree HCTree::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::string HCTree::to_json() const {
    std::string out;
    out.reserve(1 << 16);
    out += "{\"format_version\":" + std::to_string(kFormatVersion);
    out += ",\"mode\":\"" + std::string(vector_mode_ ? "vector" : "graph") + "\"";
    out += ",\"rule\":\"" + to_string(config_.rule) + "\"";
    out += ",\"dim\":" + std::to_string(dim_);
    out += ",\"n\":" + std::to_string(n_);
    out += ",\"seed\":" + std::to_string(config_.seed);
    out += ",\"leaf_max\":" + std::to_string(config_.leaf_max);
    out += ",\"balance\":" + std::string(config_.balance_enforced ? "true" : "false");
    out += ",\"epsilon\":" + format_double17(config_.power.epsilon);
    out += ",\"nodes\":[";
    bool first = true;
    std::function<void(const TreeNode&)> walk = [&](const TreeNode& node) {
        if (!first) out += ',';
        first = false;
        serialize_one(node, out);
        if (!node.is_leaf()) {
            walk(*node.left);
            walk(*node.right);
        }
    };
    walk(*root_);
    out += "]}\n";
    return out;
}

HCTree HCTree::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("corrupt tree file: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("format_version")) {
        throw std::runtime_error("corrupt tree file: missing header");
    }
    int version = -1;
    try {
        version = doc.at("format_version").get<int>();
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("corrupt tree file: ") + e.what());
    }
    if (version != kFormatVersion) {
        throw std::runtime_error("unsupported tree format version " +
                                 std::to_string(version) + " (expected " +
                                 std::to_string(kFormatVersion) + ")");
    }
    HCTree tree;
    try {
        tree.vector_mode_ = doc.at("mode").get<std::string>() == "vector";
        tree.config_.rule = split_rule_from_string(doc.at("rule").get<std::string>());
        tree.dim_ = doc.at("dim").get<int>();
        tree.n_ = doc.at("n").get<int>();
        tree.config_.seed = doc.at("seed").get<std::uint64_t>();
        tree.config_.leaf_max = doc.at("leaf_max").get<int>();
        tree.config_.balance_enforced = doc.at("balance").get<bool>();
        tree.config_.power.epsilon = doc.at("epsilon").get<double>();
        const json& nodes = doc.at("nodes");
        if (!nodes.is_array() || nodes.empty()) {
            throw std::runtime_error("corrupt tree file: empty node array");
        }
        size_t cursor = 0;
        int max_depth = 0;
        tree.root_ = parse_nodes(nodes, cursor, 0, max_depth);
        if (cursor != nodes.size()) {
            throw std::runtime_error("corrupt tree file: trailing nodes");
        }
        tree.stats_.depth = max_depth;
        tree.stats_.node_count = static_cast<int>(nodes.size());
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("corrupt tree file: ") + e.what());
    }
    return tree;
}

}  // namespace hct
