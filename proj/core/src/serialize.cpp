#include "cyclekit/serialize.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <string_view>

#include "cyclekit/error.hpp"

namespace cyclekit {

namespace {

constexpr std::array<char, 4> kCheckpointMagic = {'C', 'Y', 'K', 'T'};
constexpr std::array<char, 4> kBasisMagic = {'C', 'Y', 'B', 'C'};
constexpr std::uint32_t kFormatVersion = 1;

// Fixed little-endian scalar encoding, independent of host byte order.
class Writer {
public:
    explicit Writer(const std::filesystem::path& file)
        : path_(file), out_(file, std::ios::binary | std::ios::trunc) {
        if (!out_) throw IoError("cannot open " + file.string() + " for writing");
    }

    void bytes(const void* data, std::size_t n) {
        out_.write(static_cast<const char*>(data),
                   static_cast<std::streamsize>(n));
    }

    void u32(std::uint32_t v) {
        std::array<unsigned char, 4> b;
        for (int i = 0; i < 4; ++i) b[i] = (v >> (8 * i)) & 0xff;
        bytes(b.data(), b.size());
    }

    void u64(std::uint64_t v) {
        std::array<unsigned char, 8> b;
        for (int i = 0; i < 8; ++i) b[i] = (v >> (8 * i)) & 0xff;
        bytes(b.data(), b.size());
    }

    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }

    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        u64(bits);
    }

    void str(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }

    void finish() {
        out_.flush();
        if (!out_) throw IoError("write to " + path_.string() + " failed");
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::filesystem::path& file)
        : path_(file), in_(file, std::ios::binary) {
        if (!in_) throw IoError("cannot open " + file.string());
    }

    void bytes(void* data, std::size_t n) {
        in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
        if (in_.gcount() != static_cast<std::streamsize>(n))
            throw IoError("unexpected end of " + path_.string());
    }

    std::uint32_t u32() {
        std::array<unsigned char, 4> b;
        bytes(b.data(), b.size());
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t{b[i]} << (8 * i);
        return v;
    }

    std::uint64_t u64() {
        std::array<unsigned char, 8> b;
        bytes(b.data(), b.size());
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t{b[i]} << (8 * i);
        return v;
    }

    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }

    double f64() {
        std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }

    std::string str(std::size_t limit = 1 << 20) {
        std::uint32_t n = u32();
        if (n > limit) throw IoError("oversized string in " + path_.string());
        std::string s(n, '\0');
        bytes(s.data(), n);
        return s;
    }

    void expect_magic(const std::array<char, 4>& magic, const char* what) {
        std::array<char, 4> got;
        bytes(got.data(), got.size());
        if (got != magic)
            throw IoError(path_.string() + " is not a " + what + " file");
    }

    void expect_eof() {
        if (in_.peek() != std::char_traits<char>::eof())
            throw IoError("trailing bytes in " + path_.string());
    }

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::ifstream in_;
};

// One named view per parameter tensor, in the fixed container order. Eigen
// stores column-major, so payloads go through an explicit row-major walk.
struct TensorView {
    const char* name;
    const double* data;
    std::size_t rows;
    std::size_t cols;
};

std::vector<TensorView> tensor_views(const ModelParams& p) {
    auto mat = [](const char* name, const Eigen::MatrixXd& m) {
        return TensorView{name, m.data(), static_cast<std::size_t>(m.rows()),
                          static_cast<std::size_t>(m.cols())};
    };
    auto vec = [](const char* name, const Eigen::VectorXd& v) {
        return TensorView{name, v.data(), static_cast<std::size_t>(v.size()),
                          1};
    };
    return {
        mat("embed", p.embed),
        mat("enc1_w_input", p.enc1.w_input),
        mat("enc1_w_recur", p.enc1.w_recur),
        vec("enc1_bias", p.enc1.bias),
        mat("enc2_w_input", p.enc2.w_input),
        mat("enc2_w_recur", p.enc2.w_recur),
        vec("enc2_bias", p.enc2.bias),
        mat("gcn_w1", p.gcn_w1),
        mat("gcn_w2", p.gcn_w2),
        mat("mlp_w1", p.mlp_w1),
        vec("mlp_b1", p.mlp_b1),
        vec("mlp_w2", p.mlp_w2),
        TensorView{"mlp_b2", &p.mlp_b2, 1, 1},
        vec("mixing_logits", p.mixing_logits),
    };
}

}  // namespace

void save_checkpoint(const ModelParams& params, std::uint64_t seed,
                     const std::filesystem::path& file) {
    Writer w(file);
    w.bytes(kCheckpointMagic.data(), kCheckpointMagic.size());
    w.u32(kFormatVersion);
    w.u64(seed);

    const ModelConfig& cfg = params.cfg;
    w.u64(cfg.num_relations);
    w.u64(cfg.embed_dim);
    w.u64(cfg.hidden_dim);
    w.u64(cfg.gcn_hidden);
    w.u64(cfg.gcn_out);
    w.u64(cfg.mlp_hidden);
    w.u64(cfg.num_bases);
    w.f64(cfg.dropout);

    auto views = tensor_views(params);
    w.u32(static_cast<std::uint32_t>(views.size()));
    for (const TensorView& t : views) {
        w.str(t.name);
        w.u64(t.rows);
        w.u64(t.cols);
        for (std::size_t r = 0; r < t.rows; ++r)
            for (std::size_t c = 0; c < t.cols; ++c)
                w.f64(t.data[c * t.rows + r]);  // column-major in memory
    }
    w.finish();
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
    Reader in(file);
    in.expect_magic(kCheckpointMagic, "checkpoint");
    const std::uint32_t version = in.u32();
    if (version != kFormatVersion)
        throw IoError("unsupported checkpoint version " +
                      std::to_string(version) + " in " + file.string());

    Checkpoint ck;
    ck.seed = in.u64();

    ModelConfig cfg;
    cfg.num_relations = in.u64();
    cfg.embed_dim = in.u64();
    cfg.hidden_dim = in.u64();
    cfg.gcn_hidden = in.u64();
    cfg.gcn_out = in.u64();
    cfg.mlp_hidden = in.u64();
    cfg.num_bases = in.u64();
    cfg.dropout = in.f64();
    ck.params = ModelParams::init(cfg, 0);

    // The views are const, but ck.params itself is mutable storage, so
    // writing through them is well-defined.
    auto views = tensor_views(ck.params);
    const std::uint32_t count = in.u32();
    if (count != views.size())
        throw IoError("checkpoint tensor count mismatch in " + file.string());
    for (const TensorView& t : views) {
        const std::string name = in.str();
        if (name != t.name)
            throw IoError("unexpected tensor '" + name + "' in " +
                          file.string() + ", wanted '" + t.name + "'");
        const std::uint64_t rows = in.u64();
        const std::uint64_t cols = in.u64();
        if (rows != t.rows || cols != t.cols)
            throw IoError("tensor '" + name + "' has shape " +
                          std::to_string(rows) + "x" + std::to_string(cols) +
                          ", wanted " + std::to_string(t.rows) + "x" +
                          std::to_string(t.cols) + " in " + file.string());
        auto* data = const_cast<double*>(t.data);
        for (std::size_t r = 0; r < t.rows; ++r)
            for (std::size_t c = 0; c < t.cols; ++c)
                data[c * t.rows + r] = in.f64();
    }
    in.expect_eof();
    return ck;
}

void save_basis_cache(const BasisCache& cache,
                      const std::filesystem::path& file) {
    Writer w(file);
    w.bytes(kBasisMagic.data(), kBasisMagic.size());
    w.u32(kFormatVersion);
    w.u64(cache.dataset_hash);
    w.u64(cache.k);
    w.u64(cache.seed);
    w.u64(cache.num_edges);

    w.u32(static_cast<std::uint32_t>(cache.bases.size()));
    for (const BasisBundle& bundle : cache.bases) {
        const SptTree& tree = bundle.basis.tree;
        w.u32(tree.root);
        w.u64(tree.parent_edge.size());
        for (EdgeId e : tree.parent_edge) w.u32(e);
        for (std::int32_t d : tree.depth) w.i32(d);

        const std::size_t cycles = bundle.basis.cycles.size();
        w.u32(static_cast<std::uint32_t>(cycles));
        for (std::size_t j = 0; j < cycles; ++j) {
            w.u32(bundle.basis.nontree_edge[j]);
            w.u32(bundle.basis.cycle_length[j]);
            auto edges = bundle.incidence.column(j);
            w.u32(static_cast<std::uint32_t>(edges.size()));
            for (std::uint32_t e : edges) w.u32(e);
        }
    }
    w.finish();
}

BasisCache load_basis_cache(const std::filesystem::path& file) {
    Reader in(file);
    in.expect_magic(kBasisMagic, "basis cache");
    const std::uint32_t version = in.u32();
    if (version != kFormatVersion)
        throw IoError("unsupported basis cache version " +
                      std::to_string(version) + " in " + file.string());

    BasisCache cache;
    cache.dataset_hash = in.u64();
    cache.k = in.u64();
    cache.seed = in.u64();
    cache.num_edges = in.u64();

    const std::uint32_t basis_count = in.u32();
    cache.bases.reserve(basis_count);
    for (std::uint32_t b = 0; b < basis_count; ++b) {
        SptCycleBasis basis;
        basis.tree.root = in.u32();
        const std::uint64_t vertices = in.u64();
        basis.tree.parent_edge.resize(vertices);
        for (auto& e : basis.tree.parent_edge) e = in.u32();
        basis.tree.depth.resize(vertices);
        for (auto& d : basis.tree.depth) d = in.i32();

        const std::uint32_t cycles = in.u32();
        basis.cycles.reserve(cycles);
        basis.nontree_edge.reserve(cycles);
        basis.cycle_length.reserve(cycles);
        std::vector<std::vector<std::uint32_t>> columns(cycles);
        for (std::uint32_t j = 0; j < cycles; ++j) {
            basis.nontree_edge.push_back(in.u32());
            basis.cycle_length.push_back(in.u32());
            const std::uint32_t edge_count = in.u32();
            auto& column = columns[j];
            column.resize(edge_count);
            for (auto& e : column) {
                e = in.u32();
                if (e >= cache.num_edges)
                    throw IoError("cycle edge out of range in " +
                                  file.string());
            }
            basis.cycles.push_back(
                Z2Chain::from_indices(cache.num_edges, column));
        }
        IncidenceMatrix incidence(cache.num_edges, std::move(columns));
        cache.bases.push_back({std::move(basis), std::move(incidence)});
    }
    in.expect_eof();
    return cache;
}

}  // namespace cyclekit
