// hct: hierarchical cluster trees over vector or graph data.
//
// Subcommands: gen, build, classify, cost, purity, anomaly, cheeger.
// Every command prints/embeds a run manifest (flags, seeds, input digests)
// so identical manifests reproduce identical reports; wall-clock timings
// live under a separate "timings_ms" key and are excluded from comparisons.

#include "hct/anomaly.hpp"
#include "hct/dataset.hpp"
#include "hct/metrics.hpp"
#include "hct/similarity.hpp"
#include "hct/spectral.hpp"
#include "hct/split_rules.hpp"
#include "hct/tree.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

using ordered_json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

constexpr const char* kToolVersion = "hct 0.1.0";

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for digest");
    std::uint64_t hash = 1469598103934665603ULL;
    char buf[1 << 14];
    while (in) {
        in.read(buf, sizeof(buf));
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 1099511628211ULL;
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
    return hex;
}

struct Manifest {
    std::string command;
    std::vector<std::string> args;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> inputs;  // path -> digest

    ordered_json to_json() const {
        ordered_json j;
        j["command"] = command;
        j["flags"] = args;
        j["seed"] = seed;
        ordered_json ins = ordered_json::object();
        for (const auto& [path, digest] : inputs) ins[path] = digest;
        j["inputs"] = ins;
        j["tool_version"] = kToolVersion;
        return j;
    }
};

void write_report(const std::string& path, const ordered_json& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << report.dump(2) << '\n';
}

bool is_edge_list(const std::string& path) {
    return path.size() >= 6 && path.substr(path.size() - 6) == ".edges";
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> grid;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok == "inf") {
            grid.push_back(std::numeric_limits<double>::infinity());
        } else {
            grid.push_back(std::stod(tok));
        }
    }
    if (grid.empty()) throw std::runtime_error("empty threshold grid");
    return grid;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
    return out;
}

// Shared flag bundle for commands that build a tree.
struct BuildFlags {
    std::string input;
    std::string labels_path;
    std::string rule = "aev";
    std::uint64_t seed = 0;
    double epsilon = 0.1;
    int leaf_max = 1;
    bool no_balance = false;
    int threads = 1;
    bool no_normalize = false;

    void attach(CLI::App* cmd, bool need_labels) {
        cmd->add_option("--input", input, "input CSV (vectors) or .edges (graph)")
            ->required();
        if (need_labels) {
            cmd->add_option("--labels", labels_path, "labels file, one integer per line");
        } else {
            cmd->add_option("--labels", labels_path, "labels file (optional)");
        }
        cmd->add_option("--rule", rule, "splitting rule: rp|ev|aev|2means")
            ->check(CLI::IsMember({"rp", "ev", "aev", "2means"}));
        cmd->add_option("--seed", seed, "RNG seed");
        cmd->add_option("--epsilon", epsilon, "power iteration accuracy");
        cmd->add_option("--leaf-max", leaf_max, "max points per leaf");
        cmd->add_flag("--no-balance", no_balance, "disable the (1/3,2/3) balance band");
        cmd->add_option("--threads", threads, "build parallelism cap");
        cmd->add_flag("--no-normalize", no_normalize,
                      "trust the CSV rows to already be unit norm");
    }

    hct::BuildConfig config() const {
        hct::BuildConfig cfg;
        cfg.rule = hct::split_rule_from_string(rule);
        cfg.balance_enforced = !no_balance;
        cfg.leaf_max = leaf_max;
        cfg.power.epsilon = epsilon;
        cfg.seed = seed;
        cfg.threads = threads;
        return cfg;
    }

    hct::VectorDataset load_vectors() const {
        hct::VectorDataset data = hct::load_csv(input, std::nullopt, !no_normalize);
        if (!labels_path.empty()) {
            auto labels = hct::load_labels(labels_path);
            data = hct::VectorDataset::make(std::move(data.points), std::move(labels),
                                            data.unit_normalized);
        }
        return data;
    }
};

int cmd_gen(const std::string& subtype, int n, int k, int dim, double sep, double p,
            double q, std::uint64_t seed, const std::string& out,
            const std::string& labels_out, const Manifest& manifest) {
    if (subtype == "clique") {
        hct::write_edge_list(hct::gen_clique(n), out);
    } else if (subtype == "planted") {
        hct::write_edge_list(hct::gen_planted({n, p, q, seed}), out);
    } else if (subtype == "gmm") {
        hct::VectorDataset data = hct::gen_gmm(n, k, dim, sep, seed);
        hct::write_csv(data, out);
        if (!labels_out.empty()) hct::write_labels(*data.labels, labels_out);
    } else {
        throw std::runtime_error("unknown gen subtype '" + subtype + "'");
    }
    std::cout << manifest.to_json().dump(2) << '\n';
    return 0;
}

int cmd_build(const BuildFlags& flags, const std::string& out, Manifest manifest) {
    const auto start = Clock::now();
    hct::HCTree tree = [&]() {
        if (is_edge_list(flags.input)) {
            return hct::HCTree::build(hct::load_edge_list(flags.input), flags.config());
        }
        return hct::HCTree::build(flags.load_vectors(), flags.config());
    }();
    tree.save(out);

    ordered_json report;
    report["manifest"] = manifest.to_json();
    report["n"] = tree.n();
    report["depth"] = tree.depth();
    report["node_count"] = tree.stats().node_count;
    report["leaf_count"] = tree.leaf_count();
    report["degenerate_splits"] = tree.stats().degenerate_splits;
    report["tree_file"] = out;
    report["timings_ms"] = {{"build", elapsed_ms(start)}};
    std::cout << report.dump(2) << '\n';
    return 0;
}

int cmd_classify(const BuildFlags& flags, const std::string& test_path,
                 const std::string& test_labels_path, const std::string& tree_path,
                 int knn, int bucket, const std::string& out, Manifest manifest) {
    hct::VectorDataset train = flags.load_vectors();
    if (!train.labels) throw std::runtime_error("classify requires --labels");
    hct::VectorDataset test = hct::load_csv(test_path, std::nullopt, !flags.no_normalize);

    const auto build_start = Clock::now();
    hct::HCTree tree = tree_path.empty()
                           ? hct::HCTree::build(train, flags.config())
                           : hct::HCTree::load(tree_path);
    const double build_ms = elapsed_ms(build_start);

    const bool exact_mode = bucket >= train.n();
    std::vector<int> predicted;
    predicted.reserve(test.n());
    double candidate_sum = 0.0;
    const auto query_start = Clock::now();
    for (int i = 0; i < test.n(); ++i) {
        hct::ClassifyResult res =
            tree.classify(train, test.points.row(i).transpose(), knn, bucket);
        predicted.push_back(res.label);
        candidate_sum += res.candidate_count;
    }
    const double query_ms = elapsed_ms(query_start);

    ordered_json report;
    report["manifest"] = manifest.to_json();
    report["exact_mode"] = exact_mode;
    report["knn"] = knn;
    report["bucket"] = bucket;
    report["n_train"] = train.n();
    report["n_test"] = test.n();
    report["mean_candidates"] = candidate_sum / std::max(1, test.n());

    if (!test_labels_path.empty()) {
        std::vector<int> truth = hct::load_labels(test_labels_path);
        hct::ClassReport cr = hct::classification_report(predicted, truth);
        report["macro_p"] = cr.macro_p;
        report["macro_r"] = cr.macro_r;
        report["macro_f1"] = cr.macro_f1;
        report["accuracy"] = cr.accuracy;
    }
    report["predictions"] = predicted;
    report["timings_ms"] = {{"build", build_ms},
                            {"query_total", query_ms},
                            {"mean_query", query_ms / std::max(1, test.n())}};
    if (!out.empty()) write_report(out, report);
    std::cout << report.dump(2) << '\n';
    return 0;
}

int cmd_cost(const BuildFlags& flags, bool brute_force, const std::string& out,
             Manifest manifest) {
    const auto start = Clock::now();
    ordered_json report;
    report["manifest"] = manifest.to_json();

    double fast_total = 0.0;
    std::optional<double> brute_total;
    if (is_edge_list(flags.input)) {
        hct::ExplicitGraph graph = hct::load_edge_list(flags.input);
        hct::HCTree tree = hct::HCTree::build(graph, flags.config());
        hct::SimilarityView view = hct::SimilarityView::explicit_graph(graph);
        hct::CostReport cr = hct::cost(tree, view);
        fast_total = cr.total_cost;
        report["mode"] = "explicit";
        report["clamped_pair_warning_count"] = cr.clamped_pair_warning_count;
        if (brute_force) brute_total = hct::brute_force_cost(tree, view);
    } else {
        hct::VectorDataset data = flags.load_vectors();
        hct::HCTree tree = hct::HCTree::build(data, flags.config());
        hct::SimilarityView view = hct::SimilarityView::implicit(data);
        hct::CostReport cr = hct::cost(tree, view);
        fast_total = cr.total_cost;
        report["mode"] = "implicit";
        report["clamped_pair_warning_count"] = cr.clamped_pair_warning_count;
        if (cr.clamped_pair_warning_count > 0) {
            std::cerr << "warning: " << cr.clamped_pair_warning_count
                      << " negative aggregate cuts clamped to 0\n";
        }
        if (brute_force) brute_total = hct::brute_force_cost(tree, view);
    }
    report["total_cost"] = fast_total;
    if (brute_total) {
        report["brute_force_cost"] = *brute_total;
        const double denom = std::max(std::abs(fast_total), std::abs(*brute_total));
        report["relative_diff"] =
            denom > 0.0 ? std::abs(fast_total - *brute_total) / denom : 0.0;
    }
    report["timings_ms"] = {{"total", elapsed_ms(start)}};
    if (!out.empty()) write_report(out, report);
    std::cout << report.dump(2) << '\n';
    return 0;
}

int cmd_purity(const BuildFlags& flags, int flat_k, const std::string& out,
               Manifest manifest) {
    hct::VectorDataset data = flags.load_vectors();
    if (!data.labels) throw std::runtime_error("purity requires --labels");
    const auto start = Clock::now();
    hct::HCTree tree = hct::HCTree::build(data, flags.config());

    // Leaf clusters -> purity.
    std::vector<int> assignment(data.n(), -1);
    const auto leaves = tree.leaves();
    for (size_t c = 0; c < leaves.size(); ++c) {
        for (int id : leaves[c]) assignment[id] = static_cast<int>(c);
    }
    const double hierarchy_purity = hct::purity(assignment, *data.labels);

    double descent_sum = 0.0;
    for (int i = 0; i < data.n(); ++i) {
        descent_sum += tree.query_path_nodes(data.points.row(i).transpose(), 1);
    }

    ordered_json report;
    report["manifest"] = manifest.to_json();
    report["purity"] = hierarchy_purity;
    report["n_leaves"] = static_cast<int>(leaves.size());
    report["mean_descent_nodes"] = descent_sum / data.n();
    report["depth"] = tree.depth();

    if (flat_k != 0) {
        const int k = flat_k > 0
                          ? flat_k
                          : std::max(1, static_cast<int>(std::lround(
                                            std::log2(static_cast<double>(leaves.size())))));
        hct::KMeansResult km = hct::flat_kmeans(data, k, flags.seed);
        report["flat_k"] = k;
        report["flat_kmeans_purity"] = hct::purity(km.assignment, *data.labels);
    }
    report["timings_ms"] = {{"total", elapsed_ms(start)}};
    if (!out.empty()) write_report(out, report);
    std::cout << report.dump(2) << '\n';
    return 0;
}

int cmd_anomaly(const BuildFlags& flags, const std::string& holdout,
                const std::string& grid, const std::string& superclass_path,
                int knn, int bucket, const std::string& out, Manifest manifest) {
    hct::VectorDataset data = flags.load_vectors();
    if (!data.labels) throw std::runtime_error("anomaly requires --labels");

    hct::HoldoutSpec spec;
    spec.held_out_classes = parse_int_list(holdout);
    spec.tau_grid = parse_grid(grid);
    if (!superclass_path.empty()) {
        std::ifstream in(superclass_path);
        if (!in) throw std::runtime_error("cannot open '" + superclass_path + "'");
        std::map<int, int> mapping;
        int cls, super;
        while (in >> cls >> super) mapping[cls] = super;
        spec.superclass = std::move(mapping);
    }

    const auto start = Clock::now();
    hct::HoldoutReport report = hct::simulate_holdout(data, spec, flags.config(), knn, bucket);

    std::ofstream csv(out, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write '" + out + "'");
    csv << "tau,pct_flagged,precision,recall,f1,f1_superclass\n";
    for (const auto& row : report.rows) {
        csv << row.tau << ',' << row.pct_flagged << ',' << row.precision << ','
            << row.recall << ',' << row.f1 << ',' << row.f1_superclass << '\n';
    }

    ordered_json summary;
    summary["manifest"] = manifest.to_json();
    summary["train_size"] = report.train_size;
    summary["test_size"] = report.test_size;
    summary["positives"] = report.positives;
    summary["sweep_file"] = out;
    summary["timings_ms"] = {{"total", elapsed_ms(start)}};
    std::cout << summary.dump(2) << '\n';
    return 0;
}

int cmd_cheeger(const std::string& input, const std::string& out, Manifest manifest) {
    hct::ExplicitGraph graph = hct::load_edge_list(input);
    const auto start = Clock::now();
    const double lambda2 = hct::lambda2_dense(graph);
    const bool exhaustive = graph.n() <= 14;
    const double gamma = exhaustive ? hct::min_conductance_exhaustive(graph)
                                    : hct::sweep_conductance_upper(graph);
    const double lower = (1.0 - lambda2) / 2.0;
    const double upper = std::sqrt(std::max(0.0, 2.0 * (1.0 - lambda2)));
    const double tol = 1e-9;
    const bool pass = lower <= gamma + tol && gamma <= upper + tol;

    ordered_json report;
    report["manifest"] = manifest.to_json();
    report["n"] = graph.n();
    report["lambda2"] = lambda2;
    report["gamma"] = gamma;
    report["gamma_method"] = exhaustive ? "exhaustive" : "sweep";
    report["lower_bound"] = lower;
    report["upper_bound"] = upper;
    report["pass"] = pass;
    report["timings_ms"] = {{"total", elapsed_ms(start)}};
    if (!out.empty()) write_report(out, report);
    std::cout << report.dump(2) << '\n';
    std::cout << (pass ? "PASS" : "FAIL") << " (1-lambda2)/2 <= gamma <= sqrt(2(1-lambda2))\n";
    return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hierarchical cluster trees: build, query, evaluate"};
    app.require_subcommand(1);

    Manifest manifest;
    for (int i = 1; i < argc; ++i) manifest.args.emplace_back(argv[i]);
    if (argc > 1) manifest.command = argv[1];

    // gen
    auto* gen = app.add_subcommand("gen", "generate datasets and graphs");
    std::string gen_subtype, gen_out, gen_labels;
    int gen_n = 100, gen_k = 2, gen_dim = 8;
    double gen_sep = 8.0, gen_p = 0.9, gen_q = 0.1;
    std::uint64_t gen_seed = 0;
    gen->add_option("subtype", gen_subtype, "planted|gmm|clique")->required();
    gen->add_option("--n", gen_n, "point/node count");
    gen->add_option("--k", gen_k, "cluster count (gmm)");
    gen->add_option("--dim", gen_dim, "dimension (gmm)");
    gen->add_option("--sep", gen_sep, "cluster separation (gmm)");
    gen->add_option("--p", gen_p, "intra-block probability (planted)");
    gen->add_option("--q", gen_q, "inter-block probability (planted)");
    gen->add_option("--seed", gen_seed, "RNG seed");
    gen->add_option("--out", gen_out, "output file")->required();
    gen->add_option("--labels", gen_labels, "labels output file (gmm)");

    // build
    auto* build = app.add_subcommand("build", "build a tree and serialize it");
    BuildFlags build_flags;
    std::string build_out;
    build_flags.attach(build, false);
    build->add_option("--out", build_out, "tree output file")->required();

    // classify
    auto* classify = app.add_subcommand("classify", "tree-bucketed kNN classification");
    BuildFlags classify_flags;
    std::string classify_test, classify_test_labels, classify_tree, classify_out;
    int classify_knn = 5, classify_bucket = 64;
    classify_flags.attach(classify, true);
    classify->add_option("--test", classify_test, "test CSV")->required();
    classify->add_option("--test-labels", classify_test_labels, "test labels file");
    classify->add_option("--tree", classify_tree, "reuse a serialized tree");
    classify->add_option("--knn", classify_knn, "neighbors for the vote");
    classify->add_option("--bucket", classify_bucket, "query bucket size B");
    classify->add_option("--out", classify_out, "report output file");

    // cost
    auto* cost_cmd = app.add_subcommand("cost", "hierarchy cost of a built tree");
    BuildFlags cost_flags;
    std::string cost_out;
    bool cost_brute = false;
    cost_flags.attach(cost_cmd, false);
    cost_cmd->add_flag("--brute-force", cost_brute, "also run the literal pairwise evaluation");
    cost_cmd->add_option("--out", cost_out, "report output file");

    // purity
    auto* purity_cmd = app.add_subcommand("purity", "leaf purity and query descent");
    BuildFlags purity_flags;
    std::string purity_out;
    int purity_flat_k = 0;  // 0 = skip, -1 = auto log2(#leaves)
    purity_flags.attach(purity_cmd, true);
    purity_cmd->add_option("--flat-k", purity_flat_k,
                           "flat k-means comparison (-1 for log2(#leaves))");
    purity_cmd->add_option("--out", purity_out, "report output file");

    // anomaly
    auto* anomaly_cmd = app.add_subcommand("anomaly", "held-out class detection sweep");
    BuildFlags anomaly_flags;
    std::string anomaly_holdout, anomaly_grid = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
    std::string anomaly_super, anomaly_out;
    int anomaly_knn = 5, anomaly_bucket = 64;
    anomaly_flags.attach(anomaly_cmd, true);
    anomaly_cmd->add_option("--holdout", anomaly_holdout, "comma list of held-out classes")
        ->required();
    anomaly_cmd->add_option("--threshold-grid", anomaly_grid, "comma list of tau values");
    anomaly_cmd->add_option("--superclass", anomaly_super, "class->superclass map file");
    anomaly_cmd->add_option("--knn", anomaly_knn, "neighbors for d1");
    anomaly_cmd->add_option("--bucket", anomaly_bucket, "query bucket size B");
    anomaly_cmd->add_option("--out", anomaly_out, "sweep CSV output")->required();

    // cheeger
    auto* cheeger = app.add_subcommand("cheeger", "validate the conductance sandwich");
    std::string cheeger_input, cheeger_out;
    cheeger->add_option("--input", cheeger_input, "graph .edges file")->required();
    cheeger->add_option("--out", cheeger_out, "report output file");

    CLI11_PARSE(app, argc, argv);

    try {
        auto add_digest = [&manifest](const std::string& path) {
            if (!path.empty()) manifest.inputs.emplace_back(path, fnv1a64_file(path));
        };
        if (gen->parsed()) {
            manifest.seed = gen_seed;
            return cmd_gen(gen_subtype, gen_n, gen_k, gen_dim, gen_sep, gen_p, gen_q,
                           gen_seed, gen_out, gen_labels, manifest);
        }
        if (build->parsed()) {
            manifest.seed = build_flags.seed;
            add_digest(build_flags.input);
            add_digest(build_flags.labels_path);
            return cmd_build(build_flags, build_out, manifest);
        }
        if (classify->parsed()) {
            manifest.seed = classify_flags.seed;
            add_digest(classify_flags.input);
            add_digest(classify_flags.labels_path);
            add_digest(classify_test);
            add_digest(classify_test_labels);
            return cmd_classify(classify_flags, classify_test, classify_test_labels,
                                classify_tree, classify_knn, classify_bucket,
                                classify_out, manifest);
        }
        if (cost_cmd->parsed()) {
            manifest.seed = cost_flags.seed;
            add_digest(cost_flags.input);
            return cmd_cost(cost_flags, cost_brute, cost_out, manifest);
        }
        if (purity_cmd->parsed()) {
            manifest.seed = purity_flags.seed;
            add_digest(purity_flags.input);
            add_digest(purity_flags.labels_path);
            return cmd_purity(purity_flags, purity_flat_k, purity_out, manifest);
        }
        if (anomaly_cmd->parsed()) {
            manifest.seed = anomaly_flags.seed;
            add_digest(anomaly_flags.input);
            add_digest(anomaly_flags.labels_path);
            add_digest(anomaly_super);
            return cmd_anomaly(anomaly_flags, anomaly_holdout, anomaly_grid, anomaly_super,
                               anomaly_knn, anomaly_bucket, anomaly_out, manifest);
        }
        if (cheeger->parsed()) {
            add_digest(cheeger_input);
            return cmd_cheeger(cheeger_input, cheeger_out, manifest);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
