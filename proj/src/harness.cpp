#include "streamgmm/harness.hpp"

#include "streamgmm/gaussian.hpp"
#include "streamgmm/kernels.hpp"
#include "json.hpp"
#include "textio.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

namespace streamgmm {

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("load_dataset: cannot open " + path);
    }
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    Eigen::Index dim = -1;
    while (std::getline(in, line)) {
        ++lineno;
        // Strip comments; treat commas as whitespace.
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::replace(line.begin(), line.end(), ',', ' ');
        const auto toks = textio::split_ws(line);
        if (toks.empty()) continue;
        std::vector<double> row;
        row.reserve(toks.size());
        for (const auto& tok : toks) {
            double v;
            if (!textio::parse_number(tok, v) || !std::isfinite(v)) {
                throw ParseError(path + ":" + std::to_string(lineno) +
                                 ": not a finite number: '" + std::string(tok) + "'");
            }
            row.push_back(v);
        }
        if (dim < 0) {
            dim = static_cast<Eigen::Index>(row.size());
        } else if (static_cast<Eigen::Index>(row.size()) != dim) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(dim) + " columns, found " +
                             std::to_string(row.size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw ParseError("load_dataset: " + path + " has no data rows");
    }
    Dataset ds;
    ds.points.resize(static_cast<Eigen::Index>(rows.size()), dim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            ds.points(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
        }
    }
    const auto slash = path.find_last_of('/');
    ds.name = slash == std::string::npos ? path : path.substr(slash + 1);
    ds.source_path = path;
    return ds;
}

Dataset augment(const Dataset& ds, int copies) {
    Dataset out;
    out.name = ds.name;
    out.source_path = ds.source_path;
    const Eigen::Index n = ds.points.rows();
    out.points.resize(n * (copies + 1), ds.points.cols());
    for (int c = 0; c <= copies; ++c) {
        out.points.middleRows(c * n, n) = ds.points;
    }
    return out;
}

std::vector<DataChunk> make_stream(const Dataset& ds, const StreamSpec& spec) {
    const Eigen::Index n = ds.points.rows();
    if (spec.chunk_size > n) {
        throw InvalidData("make_stream: chunk_size exceeds dataset size");
    }
    // Fisher-Yates with our own draws, so the permutation is seed-stable
    // across standard libraries.
    std::vector<Eigen::Index> perm(n);
    for (Eigen::Index i = 0; i < n; ++i) perm[i] = i;
    Rng rng(spec.rng_seed);
    for (Eigen::Index i = n - 1; i > 0; --i) {
        const auto j = static_cast<Eigen::Index>(uniform_index(rng, i + 1));
        std::swap(perm[i], perm[j]);
    }

    std::vector<DataChunk> chunks;
    const Eigen::Index chunk_size = spec.chunk_size;
    for (Eigen::Index start = 0; start < n; start += chunk_size) {
        const Eigen::Index len = std::min(chunk_size, n - start);
        DataChunk chunk;
        chunk.chunk_index = static_cast<int>(start / chunk_size);
        chunk.points.resize(len, ds.points.cols());
        for (Eigen::Index i = 0; i < len; ++i) {
            chunk.points.row(i) = ds.points.row(perm[start + i]);
        }
        chunks.push_back(std::move(chunk));
    }
    return chunks;
}

void MixtureSpec::validate() const {
    if (components.empty()) {
        throw ConfigError("mixture: needs at least one component");
    }
    const Eigen::Index d = components.front().mean.size();
    double total = 0.0;
    for (const auto& c : components) {
        if (c.mean.size() != d || c.covariance.rows() != d || c.covariance.cols() != d) {
            throw ConfigError("mixture: inconsistent dimensions");
        }
        if (!(c.weight > 0.0)) {
            throw ConfigError("mixture: weights must be positive");
        }
        Eigen::LLT<Matrix> llt(c.covariance);
        if (llt.info() != Eigen::Success) {
            throw ConfigError("mixture: component covariance not positive definite");
        }
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ConfigError("mixture: weights must sum to 1");
    }
}

LabeledDataset generate_synthetic(const MixtureSpec& spec, Eigen::Index n, std::uint64_t seed) {
    spec.validate();
    const Eigen::Index d = spec.components.front().mean.size();
    std::vector<Matrix> chol;
    chol.reserve(spec.components.size());
    for (const auto& c : spec.components) {
        chol.push_back(Eigen::LLT<Matrix>(c.covariance).matrixL());
    }

    LabeledDataset out;
    out.data.name = "synthetic";
    out.data.points.resize(n, d);
    out.labels.resize(n);
    Rng rng(seed);
    Vector z(d);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double u = uniform01(rng);
        double acc = 0.0;
        int comp = static_cast<int>(spec.components.size()) - 1;
        for (std::size_t c = 0; c < spec.components.size(); ++c) {
            acc += spec.components[c].weight;
            if (u < acc) {
                comp = static_cast<int>(c);
                break;
            }
        }
        for (Eigen::Index j = 0; j < d; ++j) z(j) = standard_normal(rng);
        out.data.points.row(i) =
            (spec.components[comp].mean + chol[comp] * z).transpose();
        out.labels[i] = comp;
    }
    return out;
}

MixtureSpec load_mixture_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("mixture: cannot open " + path);
    }
    nlohmann::json root;
    try {
        in >> root;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("mixture: not valid JSON: ") + e.what());
    }
    MixtureSpec spec;
    try {
        if (root.contains("n")) spec.n = root.at("n").get<Eigen::Index>();
        if (root.contains("seed")) spec.seed = root.at("seed").get<std::uint64_t>();
        for (const auto& c : root.at("components")) {
            MixtureComponent comp;
            comp.weight = c.at("weight").get<double>();
            const auto mean = c.at("mean").get<std::vector<double>>();
            comp.mean = Eigen::Map<const Vector>(mean.data(), mean.size());
            const auto cov = c.at("cov").get<std::vector<std::vector<double>>>();
            comp.covariance.resize(cov.size(), cov.size());
            for (std::size_t i = 0; i < cov.size(); ++i) {
                if (cov[i].size() != cov.size()) {
                    throw ConfigError("mixture: cov must be square");
                }
                for (std::size_t j = 0; j < cov.size(); ++j) {
                    comp.covariance(i, j) = cov[i][j];
                }
            }
            spec.components.push_back(std::move(comp));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("mixture: bad component: ") + e.what());
    }
    spec.validate();
    return spec;
}

std::vector<int> batch_baseline(const Dataset& ds, int k, const EmConfig& config,
                                std::uint64_t seed) {
    DataChunk whole;
    whole.points = ds.points;
    whole.chunk_index = 0;
    const ChunkClustering clustering = fit_chunk(whole, k, config, seed);
    return clustering.assignments;
}

std::vector<int> label_by_sketch(const Dataset& ds, const SketchState& sketch) {
    if (sketch.base_signatures.empty()) {
        throw StateError("label_by_sketch: sketch has no base clusters");
    }
    if (ds.dim() != sketch.dimensionality) {
        throw DimensionError("label_by_sketch: dataset dimension differs from sketch");
    }
    const auto prepared = kernels::prepare_signatures(sketch.base_signatures);
    const auto scored = kernels::min_mahalanobis(ds.points, prepared);
    std::vector<int> labels(scored.size());
    for (std::size_t i = 0; i < scored.size(); ++i) labels[i] = scored[i].nearest_id;
    return labels;
}

double rand_index(const std::vector<int>& labels_a, const std::vector<int>& labels_b) {
    if (labels_a.size() != labels_b.size()) {
        throw DimensionError("rand_index: label vectors differ in length");
    }
    const std::int64_t n = static_cast<std::int64_t>(labels_a.size());
    if (n < 2) {
        throw DimensionError("rand_index: needs at least two points");
    }
    std::map<std::pair<int, int>, std::int64_t> cells;
    std::map<int, std::int64_t> row_totals, col_totals;
    for (std::size_t i = 0; i < labels_a.size(); ++i) {
        cells[{labels_a[i], labels_b[i]}]++;
        row_totals[labels_a[i]]++;
        col_totals[labels_b[i]]++;
    }
    auto choose2 = [](std::int64_t m) { return m * (m - 1) / 2; };
    std::int64_t same_same = 0;  // pairs co-clustered in both
    for (const auto& [key, count] : cells) same_same += choose2(count);
    std::int64_t same_a = 0, same_b = 0;
    for (const auto& [key, count] : row_totals) same_a += choose2(count);
    for (const auto& [key, count] : col_totals) same_b += choose2(count);
    const std::int64_t total = choose2(n);
    // Agreements: co-clustered in both, plus separated in both.
    const std::int64_t agreements =
        same_same + (total - same_a - same_b + same_same);
    return static_cast<double>(agreements) / static_cast<double>(total);
}

}  // namespace streamgmm
