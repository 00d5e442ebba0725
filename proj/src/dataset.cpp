#include "hct/dataset.hpp"

#include "hct/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace hct {

namespace {

constexpr double kUnitNormTol = 1e-9;

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view field, int row, int col) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last || !std::isfinite(value)) {
        throw std::runtime_error("parse failure at row " + std::to_string(row) +
                                 ", column " + std::to_string(col) + ": '" +
                                 std::string(field) + "'");
    }
    return value;
}

long parse_long(std::string_view field, int row, int col) {
    long value = 0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw std::runtime_error("parse failure at row " + std::to_string(row) +
                                 ", column " + std::to_string(col) +
                                 ": expected integer, got '" + std::string(field) + "'");
    }
    return value;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    size_t start = 0;
    while (true) {
        size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

}  // namespace

VectorDataset VectorDataset::make(Eigen::MatrixXd points,
                                  std::optional<std::vector<int>> labels,
                                  bool unit_normalized) {
    if (!points.allFinite()) {
        throw std::invalid_argument("dataset contains non-finite values");
    }
    const int n = static_cast<int>(points.rows());
    if (labels && static_cast<int>(labels->size()) != n) {
        throw std::invalid_argument("label count " + std::to_string(labels->size()) +
                                    " does not match point count " + std::to_string(n));
    }
    if (unit_normalized) {
        for (int i = 0; i < n; ++i) {
            if (std::abs(points.row(i).norm() - 1.0) > kUnitNormTol) {
                throw std::invalid_argument("row " + std::to_string(i) +
                                            " is not unit norm");
            }
        }
    }
    VectorDataset d;
    d.points = std::move(points);
    d.labels = std::move(labels);
    d.ids.resize(n);
    for (int i = 0; i < n; ++i) d.ids[i] = i;
    d.unit_normalized = unit_normalized;
    return d;
}

VectorDataset VectorDataset::subset(const std::vector<int>& keep_ids) const {
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(keep_ids.size()), points.cols());
    std::optional<std::vector<int>> sub_labels;
    if (labels) sub_labels.emplace();
    for (size_t i = 0; i < keep_ids.size(); ++i) {
        rows.row(static_cast<Eigen::Index>(i)) = points.row(keep_ids[i]);
        if (labels) sub_labels->push_back((*labels)[keep_ids[i]]);
    }
    return make(std::move(rows), std::move(sub_labels), unit_normalized);
}

ExplicitGraph ExplicitGraph::from_weights(Eigen::MatrixXd weights) {
    const int n = static_cast<int>(weights.rows());
    if (weights.cols() != n) throw std::invalid_argument("weight matrix not square");
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double w = weights(i, j);
            if (!std::isfinite(w) || w < 0.0 || w > 1.0) {
                throw std::invalid_argument("weight out of [0,1] at (" +
                                            std::to_string(i) + "," + std::to_string(j) + ")");
            }
            if (w != weights(j, i)) {
                throw std::invalid_argument("weights not symmetric at (" +
                                            std::to_string(i) + "," + std::to_string(j) + ")");
            }
        }
        if (weights(i, i) != 0.0) {
            throw std::invalid_argument("nonzero diagonal at node " + std::to_string(i));
        }
    }
    ExplicitGraph g;
    g.weights = std::move(weights);
    g.degree = g.weights.rowwise().sum();
    for (int i = 0; i < n; ++i) {
        if (g.degree[i] <= 0.0) {
            throw std::invalid_argument("isolated node " + std::to_string(i) +
                                        " (zero degree)");
        }
    }
    return g;
}

VectorDataset load_csv(const std::string& path, std::optional<int> label_column,
                       bool normalize) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");

    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::string line;
    int lineno = 0;
    int width = -1;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        auto fields = split_fields(sv, ',');
        if (width < 0) {
            width = static_cast<int>(fields.size());
            if (label_column && (*label_column < 0 || *label_column >= width)) {
                throw std::runtime_error("label column " + std::to_string(*label_column) +
                                         " out of range for width " + std::to_string(width));
            }
        } else if (static_cast<int>(fields.size()) != width) {
            throw std::runtime_error("ragged row " + std::to_string(lineno) + ": has " +
                                     std::to_string(fields.size()) + " fields, expected " +
                                     std::to_string(width));
        }
        std::vector<double> row;
        row.reserve(width);
        for (int c = 0; c < width; ++c) {
            if (label_column && c == *label_column) {
                labels.push_back(static_cast<int>(parse_long(fields[c], lineno, c)));
            } else {
                row.push_back(parse_double(fields[c], lineno, c));
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("no data rows in '" + path + "'");

    const int n = static_cast<int>(rows.size());
    const int d = static_cast<int>(rows[0].size());
    Eigen::MatrixXd points(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) points(i, j) = rows[i][j];

    if (normalize) {
        for (int i = 0; i < n; ++i) {
            const double norm = points.row(i).norm();
            if (norm < 1e-12) {
                throw std::runtime_error("zero-norm row " + std::to_string(i) +
                                         " cannot be normalized");
            }
            points.row(i) /= norm;
        }
    }

    bool unit = true;
    for (int i = 0; i < n && unit; ++i) {
        unit = std::abs(points.row(i).norm() - 1.0) <= kUnitNormTol;
    }
    std::optional<std::vector<int>> maybe_labels;
    if (label_column) maybe_labels = std::move(labels);
    return VectorDataset::make(std::move(points), std::move(maybe_labels), unit);
}

void write_csv(const VectorDataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    for (int i = 0; i < data.n(); ++i) {
        for (int j = 0; j < data.dim(); ++j) {
            if (j) out << ',';
            out << format_double(data.points(i, j));
        }
        out << '\n';
    }
}

std::vector<int> load_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::vector<int> labels;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        labels.push_back(static_cast<int>(parse_long(sv, lineno, 0)));
    }
    return labels;
}

void write_labels(const std::vector<int>& labels, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    for (int l : labels) out << l << '\n';
}

ExplicitGraph load_edge_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    struct Edge { int i, j; double w; };
    std::vector<Edge> edges;
    int max_node = -1;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        std::istringstream ss{std::string(sv)};
        long i = -1, j = -1;
        std::string wtok;
        if (!(ss >> i >> j >> wtok)) {
            throw std::runtime_error("bad edge line " + std::to_string(lineno));
        }
        const double w = parse_double(wtok, lineno, 2);
        if (i < 0 || j < 0) throw std::runtime_error("negative node id at line " + std::to_string(lineno));
        if (i == j) throw std::runtime_error("self loop at line " + std::to_string(lineno));
        edges.push_back({static_cast<int>(i), static_cast<int>(j), w});
        max_node = std::max({max_node, static_cast<int>(i), static_cast<int>(j)});
    }
    if (edges.empty()) throw std::runtime_error("no edges in '" + path + "'");
    const int n = max_node + 1;
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (const auto& e : edges) {
        if (w(e.i, e.j) != 0.0) {
            throw std::runtime_error("duplicate edge " + std::to_string(e.i) + "-" +
                                     std::to_string(e.j));
        }
        w(e.i, e.j) = e.w;
        w(e.j, e.i) = e.w;
    }
    return ExplicitGraph::from_weights(std::move(w));
}

void write_edge_list(const ExplicitGraph& graph, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    const int n = graph.n();
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (graph.weights(i, j) != 0.0) {
                out << i << ' ' << j << ' ' << format_double(graph.weights(i, j)) << '\n';
            }
        }
    }
}

ExplicitGraph gen_planted(const PlantedParams& params) {
    if (params.n < 2 || params.n % 2 != 0) {
        throw std::invalid_argument("planted model requires even n >= 2");
    }
    if (!(params.p > 0.0 && params.p <= 1.0)) throw std::invalid_argument("p must be in (0,1]");
    if (!(params.q >= 0.0 && params.q < 1.0)) throw std::invalid_argument("q must be in [0,1)");
    if (!(params.q < params.p)) throw std::invalid_argument("q must be < p");

    const int n = params.n;
    const int half = n / 2;
    auto rng = make_rng(params.seed, 0x706c616e74ULL);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const bool same_block = (i < half) == (j < half);
            const double prob = same_block ? params.p : params.q;
            if (unif(rng) < prob) {
                w(i, j) = 1.0;
                w(j, i) = 1.0;
            }
        }
    }
    return ExplicitGraph::from_weights(std::move(w));
}

VectorDataset gen_gmm(int n, int k, int dim, double separation, std::uint64_t seed) {
    if (n < k || k < 1) throw std::invalid_argument("need n >= k >= 1");
    if (dim < 1) throw std::invalid_argument("dim must be >= 1");
    if (!(separation > 0.0)) throw std::invalid_argument("separation must be > 0");

    // Cluster means: axis placement when k fits in dim (pairwise distance
    // separation*sqrt(2)), otherwise a lattice with spacing = separation.
    Eigen::MatrixXd means = Eigen::MatrixXd::Zero(k, dim);
    if (k <= dim) {
        for (int c = 0; c < k; ++c) means(c, c) = separation;
    } else {
        int base = 2;
        while (std::pow(base, dim) < k) ++base;
        for (int c = 0; c < k; ++c) {
            int rem = c;
            for (int axis = 0; axis < dim; ++axis) {
                means(c, axis) = separation * (rem % base);
                rem /= base;
            }
        }
    }

    auto rng = make_rng(seed, 0x676d6dULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd points(n, dim);
    std::vector<int> labels(n);
    int row = 0;
    for (int c = 0; c < k; ++c) {
        const int count = n / k + (c < n % k ? 1 : 0);
        for (int t = 0; t < count; ++t, ++row) {
            for (int j = 0; j < dim; ++j) points(row, j) = means(c, j) + normal(rng);
            labels[row] = c;
        }
    }
    for (int i = 0; i < n; ++i) {
        const double norm = points.row(i).norm();
        if (norm < 1e-12) throw std::runtime_error("degenerate zero-norm sample");
        points.row(i) /= norm;
    }
    return VectorDataset::make(std::move(points), std::move(labels), true);
}

ExplicitGraph gen_clique(int n) {
    if (n < 1) throw std::invalid_argument("clique needs n >= 1");
    Eigen::MatrixXd w = Eigen::MatrixXd::Ones(n, n);
    w.diagonal().setZero();
    return ExplicitGraph::from_weights(std::move(w));
}

}  // namespace hct
