#include "streamgmm/sketch.hpp"

#include "textio.hpp"

#include <fstream>
#include <sstream>

namespace streamgmm {

namespace {

constexpr int kSketchFormatVersion = 1;

using textio::fmt;

class LineReader {
public:
    explicit LineReader(std::istream& in, const std::string& path) : in_(in), path_(path) {}

    // Next non-empty line, split on whitespace. Throws when the stream ends.
    std::vector<std::string_view> next(const char* expected) {
        while (std::getline(in_, line_)) {
            ++lineno_;
            auto toks = textio::split_ws(line_);
            if (!toks.empty()) return toks;
        }
        throw FormatError(path_ + ": unexpected end of file, expected " + std::string(expected));
    }

    // Like next(), but requires the first token to equal `tag`.
    std::vector<std::string_view> expect(const char* tag) {
        auto toks = next(tag);
        if (toks[0] != tag) {
            fail(std::string("expected '") + tag + "', found '" + std::string(toks[0]) + "'");
        }
        return toks;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw FormatError(path_ + ":" + std::to_string(lineno_) + ": " + msg);
    }

    template <typename T>
    T num(std::string_view tok) const {
        T value;
        if (!textio::parse_number(tok, value)) {
            fail("cannot parse number '" + std::string(tok) + "'");
        }
        return value;
    }

    const std::string& raw_line() const { return line_; }

private:
    std::istream& in_;
    std::string path_;
    std::string line_;
    int lineno_ = 0;
};

void write_vector(std::ostream& out, const char* tag, const Vector& v) {
    out << tag;
    for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << fmt(v(i));
    out << '\n';
}

Vector read_vector(LineReader& r, const char* tag, int dim) {
    auto toks = r.expect(tag);
    if (static_cast<int>(toks.size()) != dim + 1) {
        r.fail(std::string(tag) + ": expected " + std::to_string(dim) + " values");
    }
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v(i) = r.num<double>(toks[i + 1]);
    return v;
}

// Lower triangle, row major; symmetry is exact by reconstruction.
void write_covariance(std::ostream& out, const CovarianceMatrix& cov) {
    out << "cov";
    for (Eigen::Index i = 0; i < cov.rows(); ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) out << ' ' << fmt(cov(i, j));
    }
    out << '\n';
}

CovarianceMatrix read_covariance(LineReader& r, int dim) {
    auto toks = r.expect("cov");
    const int tri = dim * (dim + 1) / 2;
    if (static_cast<int>(toks.size()) != tri + 1) {
        r.fail("cov: expected " + std::to_string(tri) + " values");
    }
    CovarianceMatrix cov(dim, dim);
    int t = 1;
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j <= i; ++j) {
            cov(i, j) = r.num<double>(toks[t++]);
            cov(j, i) = cov(i, j);
        }
    }
    return cov;
}

}  // namespace

const ClusterSignature* SketchState::find_cluster(int id) const {
    for (const auto& sig : base_signatures) {
        if (sig.id == id) return &sig;
    }
    return nullptr;
}

std::int64_t SketchState::total_points() const {
    std::int64_t total = 0;
    for (const auto& sig : base_signatures) total += sig.num_points;
    return total;
}

SketchState init_from_first_chunk(const ChunkClustering& clustering,
                                  const RunConfig& config) {
    if (clustering.signatures.empty()) {
        throw StateError("init_from_first_chunk: clustering has no signatures");
    }
    if (clustering.chunk_index != 0) {
        throw StateError("init_from_first_chunk: expected the chunk at index 0, got " +
                         std::to_string(clustering.chunk_index));
    }
    SketchState sketch;
    sketch.dimensionality = clustering.signatures.front().dim();
    sketch.config_snapshot = config;
    sketch.base_signatures = clustering.signatures;
    for (auto& sig : sketch.base_signatures) {
        sig.id = sketch.next_cluster_id++;
    }
    sketch.chunks_processed = 1;
    return sketch;
}

void save(const SketchState& sketch, const std::string& path) {
    std::ostringstream out;
    out << "streamgmm-sketch " << kSketchFormatVersion << ' ' << sketch.dimensionality << ' '
        << sketch.chunks_processed << '\n';
    out << "next_cluster_id " << fmt(sketch.next_cluster_id) << '\n';
    out << "config " << run_config_to_json(sketch.config_snapshot) << '\n';

    out << "signatures " << sketch.base_signatures.size() << '\n';
    for (const auto& sig : sketch.base_signatures) {
        out << "signature " << fmt(sig.id) << ' ' << fmt(sig.num_points) << ' '
            << fmt(sig.created_at_chunk) << '\n';
        write_vector(out, "mean", sig.mean);
        write_covariance(out, sig.covariance);
        out << "growth " << sig.growth_log.size() << '\n';
        for (const auto& g : sig.growth_log) {
            out << "g " << fmt(g.chunk_index) << ' ' << fmt(g.points_added) << '\n';
        }
    }

    out << "anomalies " << sketch.anomalies.size() << '\n';
    for (const auto& rec : sketch.anomalies) {
        out << "anomaly " << fmt(rec.first_seen_chunk) << ' ' << fmt(rec.nearest_cluster_id)
            << '\n';
        write_vector(out, "point", rec.point);
        out << "temporal " << rec.temporal_scores.size() << '\n';
        for (const auto& t : rec.temporal_scores) {
            out << "t " << fmt(t.chunk_index) << ' ' << fmt(t.score) << ' '
                << fmt(t.nearest_cluster_id) << '\n';
        }
        out << "compression " << rec.compression_scores.size() << '\n';
        for (const auto& c : rec.compression_scores) {
            out << "c " << fmt(c.cluster_count) << ' ' << fmt(c.score) << ' '
                << fmt(c.nearest_cluster_id) << '\n';
        }
    }
    out << "end\n";

    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw StateError("save: cannot open " + path + " for writing");
    }
    file << out.str();
    if (!file) {
        throw StateError("save: write to " + path + " failed");
    }
}

SketchState load(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        throw FormatError("load: cannot open " + path);
    }
    LineReader r(file, path);

    auto header = r.expect("streamgmm-sketch");
    if (header.size() != 4) {
        r.fail("header must be 'streamgmm-sketch <version> <dim> <chunks>'");
    }
    const int version = r.num<int>(header[1]);
    if (version != kSketchFormatVersion) {
        r.fail("unsupported sketch format version " + std::to_string(version) + ", expected " +
               std::to_string(kSketchFormatVersion));
    }
    SketchState sketch;
    sketch.dimensionality = r.num<int>(header[2]);
    sketch.chunks_processed = r.num<int>(header[3]);
    if (sketch.dimensionality < 1) r.fail("dimensionality must be >= 1");

    auto next_id = r.expect("next_cluster_id");
    if (next_id.size() != 2) r.fail("next_cluster_id takes one value");
    sketch.next_cluster_id = r.num<int>(next_id[1]);

    r.expect("config");
    const std::string& config_line = r.raw_line();
    const auto pos = config_line.find(' ');
    try {
        sketch.config_snapshot = parse_run_config(config_line.substr(pos + 1));
    } catch (const ConfigError& e) {
        r.fail(std::string("bad config snapshot: ") + e.what());
    }

    auto sig_count_line = r.expect("signatures");
    if (sig_count_line.size() != 2) r.fail("signatures takes one value");
    const int sig_count = r.num<int>(sig_count_line[1]);
    sketch.base_signatures.reserve(sig_count);
    for (int s = 0; s < sig_count; ++s) {
        auto head = r.expect("signature");
        if (head.size() != 4) r.fail("signature takes id, num_points, created_at_chunk");
        ClusterSignature sig;
        sig.id = r.num<int>(head[1]);
        sig.num_points = r.num<std::int64_t>(head[2]);
        sig.created_at_chunk = r.num<int>(head[3]);
        sig.mean = read_vector(r, "mean", sketch.dimensionality);
        sig.covariance = read_covariance(r, sketch.dimensionality);
        auto growth_head = r.expect("growth");
        if (growth_head.size() != 2) r.fail("growth takes one value");
        const int growth_count = r.num<int>(growth_head[1]);
        sig.growth_log.reserve(growth_count);
        for (int i = 0; i < growth_count; ++i) {
            auto g = r.expect("g");
            if (g.size() != 3) r.fail("g takes chunk_index and points_added");
            sig.growth_log.push_back({r.num<int>(g[1]), r.num<std::int64_t>(g[2])});
        }
        sketch.base_signatures.push_back(std::move(sig));
    }

    auto anomaly_count_line = r.expect("anomalies");
    if (anomaly_count_line.size() != 2) r.fail("anomalies takes one value");
    const int anomaly_count = r.num<int>(anomaly_count_line[1]);
    sketch.anomalies.reserve(anomaly_count);
    for (int a = 0; a < anomaly_count; ++a) {
        auto head = r.expect("anomaly");
        if (head.size() != 3) r.fail("anomaly takes first_seen_chunk and nearest_cluster_id");
        AnomalyRecord rec;
        rec.first_seen_chunk = r.num<int>(head[1]);
        rec.nearest_cluster_id = r.num<int>(head[2]);
        rec.point = read_vector(r, "point", sketch.dimensionality);
        auto temporal_head = r.expect("temporal");
        if (temporal_head.size() != 2) r.fail("temporal takes one value");
        const int nt = r.num<int>(temporal_head[1]);
        rec.temporal_scores.reserve(nt);
        for (int i = 0; i < nt; ++i) {
            auto t = r.expect("t");
            if (t.size() != 4) r.fail("t takes chunk_index, score, nearest_cluster_id");
            rec.temporal_scores.push_back(
                {r.num<int>(t[1]), r.num<double>(t[2]), r.num<int>(t[3])});
        }
        auto comp_head = r.expect("compression");
        if (comp_head.size() != 2) r.fail("compression takes one value");
        const int nc = r.num<int>(comp_head[1]);
        rec.compression_scores.reserve(nc);
        for (int i = 0; i < nc; ++i) {
            auto c = r.expect("c");
            if (c.size() != 4) r.fail("c takes cluster_count, score, nearest_cluster_id");
            rec.compression_scores.push_back(
                {r.num<int>(c[1]), r.num<double>(c[2]), r.num<int>(c[3])});
        }
        sketch.anomalies.push_back(std::move(rec));
    }
    r.expect("end");
    return sketch;
}

}  // namespace streamgmm
