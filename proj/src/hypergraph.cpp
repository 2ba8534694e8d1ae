#include "novscope/hypergraph.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <limits>
#include <set>
#include <unordered_set>

#include "novscope/error.hpp"
#include "novscope/io.hpp"

namespace novscope {

namespace {

constexpr std::uint32_t kSnapshotVersion = 1;
constexpr char kSnapshotMagic[8] = {'N', 'V', 'S', 'S', 'N', 'A', 'P', '\0'};
constexpr int kMaxNegativeRetries = 1000;

double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct NodeSetHash {
    std::size_t operator()(const NodeSet& s) const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (int v : s) {
            h ^= static_cast<std::uint32_t>(v);
            h *= 0x100000001b3ULL;
        }
        return static_cast<std::size_t>(h);
    }
};

}  // namespace

std::string_view to_string(Channel c) { return c == Channel::content ? "content" : "context"; }

Channel channel_from_string(std::string_view s) {
    if (s == "content") return Channel::content;
    if (s == "context") return Channel::context;
    throw ValidationError("unknown channel '" + std::string(s) + "'");
}

NodeVocab::NodeVocab(std::vector<std::string> ids) {
    std::erase(ids, std::string(kRareNodeId));
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    ids_.reserve(ids.size() + 1);
    ids_.emplace_back(kRareNodeId);
    for (auto& id : ids) ids_.push_back(std::move(id));
    for (int i = 0; i < size(); ++i) index_.emplace(ids_[static_cast<std::size_t>(i)], i);
}

int NodeVocab::lookup(std::string_view id) const { return find(id).value_or(rare()); }

std::optional<int> NodeVocab::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::uint64_t NodeVocab::hash() const {
    std::uint64_t h = io::fnv1a64("vocab");
    for (const auto& id : ids_) {
        h = io::fnv1a64(id, h);
        h = io::fnv1a64(std::string_view("\0", 1), h);
    }
    return h;
}

std::vector<std::string> channel_ids(const PaperRecord& paper, Channel channel) {
    const auto& src = channel == Channel::content ? paper.concept_ids_l3 : paper.referenced_journal_ids;
    std::vector<std::string> ids(src.begin(), src.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

NodeVocab build_vocab(const Corpus& corpus, Channel channel, const SnapshotConfig& cfg) {
    std::map<std::string, int> freq;
    for (const auto& p : corpus.papers())
        for (auto& id : channel_ids(p, channel)) ++freq[id];
    std::vector<std::string> keep;
    for (auto& [id, n] : freq)
        if (n >= cfg.min_node_freq) keep.push_back(id);
    return NodeVocab(std::move(keep));
}

NodeSet paper_nodes(const PaperRecord& paper, Channel channel, const NodeVocab& vocab,
                    const SnapshotConfig& cfg) {
    NodeSet nodes;
    for (const auto& id : channel_ids(paper, channel)) nodes.push_back(vocab.lookup(id));
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    if (cfg.max_edge_size > 0 && static_cast<int>(nodes.size()) > cfg.max_edge_size) {
        std::mt19937_64 rng(io::fnv1a64(paper.paper_id, cfg.seed ^ 0x9e3779b97f4a7c15ULL));
        // Partial Fisher-Yates: the first max_edge_size slots become a uniform subset.
        for (std::size_t i = 0; i < static_cast<std::size_t>(cfg.max_edge_size); ++i) {
            std::size_t j = i + static_cast<std::size_t>(rng() % (nodes.size() - i));
            std::swap(nodes[i], nodes[j]);
        }
        nodes.resize(static_cast<std::size_t>(cfg.max_edge_size));
        std::sort(nodes.begin(), nodes.end());
    }
    return nodes;
}

std::vector<double> HypergraphSnapshot::node_frequencies() const {
    std::vector<double> freq(static_cast<std::size_t>(num_nodes()), 0.0);
    for (const auto& c : edge_counts)
        for (int v : c.nodes) freq[static_cast<std::size_t>(v)] += c.count;
    return freq;
}

std::vector<HypergraphSnapshot> build_snapshots(const Corpus& corpus, Channel channel,
                                                int first_year, int last_year,
                                                const SnapshotConfig& cfg,
                                                std::shared_ptr<const NodeVocab> vocab) {
    if (!vocab) vocab = std::make_shared<const NodeVocab>(build_vocab(corpus, channel, cfg));

    std::vector<NodeSet> node_sets;
    node_sets.reserve(corpus.papers().size());
    for (const auto& p : corpus.papers()) node_sets.push_back(paper_nodes(p, channel, *vocab, cfg));

    std::vector<HypergraphSnapshot> out;
    for (int t = first_year; t <= last_year; ++t) {
        HypergraphSnapshot snap;
        snap.year = t;
        snap.channel = channel;
        snap.vocab = vocab;
        int from = cfg.history_window ? t - *cfg.history_window : std::numeric_limits<int>::min();
        std::map<NodeSet, int> counts;
        for (std::size_t i = 0; i < corpus.papers().size(); ++i) {
            const auto& p = corpus.papers()[i];
            if (p.year > t || p.year < from) continue;
            const auto& nodes = node_sets[i];
            if (nodes.size() < 2) {
                if (p.year == t) snap.unscorable.push_back(p.paper_id);
                continue;
            }
            snap.hyperedges.push_back({p.paper_id, p.year, nodes});
            ++counts[nodes];
        }
        snap.edge_counts.reserve(counts.size());
        for (auto& [nodes, n] : counts) snap.edge_counts.push_back({nodes, n});
        out.push_back(std::move(snap));
    }
    return out;
}

NegativeSampleSet draw_negatives(const HypergraphSnapshot& snapshot, int ratio, std::uint64_t seed) {
    if (ratio < 1) throw ValidationError("negative sampling ratio must be >= 1");
    NegativeSampleSet out;
    out.per_positive_ratio = ratio;
    if (snapshot.empty()) return out;

    std::unordered_set<NodeSet, NodeSetHash> observed;
    for (const auto& c : snapshot.edge_counts) observed.insert(c.nodes);

    auto freq = snapshot.node_frequencies();
    std::vector<double> cumulative(freq.size());
    double total = 0.0;
    int support = 0;
    for (std::size_t i = 0; i < freq.size(); ++i) {
        total += freq[i];
        cumulative[i] = total;
        support += freq[i] > 0 ? 1 : 0;
    }

    std::mt19937_64 rng(seed);
    auto draw_node = [&]() {
        double u = unit_uniform(rng) * total;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        if (it == cumulative.end()) --it;
        return static_cast<int>(it - cumulative.begin());
    };

    out.samples.reserve(snapshot.edge_counts.size() * static_cast<std::size_t>(ratio));
    for (const auto& pos : snapshot.edge_counts) {
        const auto k = pos.nodes.size();
        if (static_cast<int>(k) > support)
            throw ValidationError("vocabulary too small to draw negatives of size " +
                                  std::to_string(k));
        for (int r = 0; r < ratio; ++r) {
            bool ok = false;
            for (int attempt = 0; attempt < kMaxNegativeRetries && !ok; ++attempt) {
                NodeSet s;
                s.reserve(k);
                while (s.size() < k) {
                    int v = draw_node();
                    if (std::find(s.begin(), s.end(), v) == s.end()) s.push_back(v);
                }
                std::sort(s.begin(), s.end());
                if (observed.contains(s)) continue;
                out.samples.push_back(std::move(s));
                ok = true;
            }
            if (!ok)
                throw ValidationError("vocabulary too small to avoid observed combinations after " +
                                      std::to_string(kMaxNegativeRetries) + " retries");
        }
    }
    return out;
}

void save_snapshot(const std::filesystem::path& path, const SnapshotCacheKey& key,
                   const HypergraphSnapshot& snapshot, const NegativeSampleSet& negatives) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    io::BinaryWriter w(path);
    w.bytes(std::string_view(kSnapshotMagic, sizeof kSnapshotMagic));
    w.pod(kSnapshotVersion);
    w.str(key.corpus_hash);
    w.pod(static_cast<std::uint8_t>(key.channel));
    w.pod(static_cast<std::int32_t>(key.year));
    w.str(key.config_hash);

    w.pod(static_cast<std::int32_t>(snapshot.year));
    w.pod(static_cast<std::uint8_t>(snapshot.channel));
    const auto& ids = snapshot.vocab->ids();
    w.pod(static_cast<std::uint64_t>(ids.size()));
    for (const auto& id : ids) w.str(id);
    w.pod(static_cast<std::uint64_t>(snapshot.hyperedges.size()));
    for (const auto& h : snapshot.hyperedges) {
        w.str(h.paper_id);
        w.pod(static_cast<std::int32_t>(h.year));
        w.vec(h.nodes);
    }
    w.pod(static_cast<std::uint64_t>(snapshot.edge_counts.size()));
    for (const auto& c : snapshot.edge_counts) {
        w.vec(c.nodes);
        w.pod(static_cast<std::int32_t>(c.count));
    }
    w.pod(static_cast<std::uint64_t>(snapshot.unscorable.size()));
    for (const auto& id : snapshot.unscorable) w.str(id);
    w.pod(static_cast<std::int32_t>(negatives.per_positive_ratio));
    w.pod(static_cast<std::uint64_t>(negatives.samples.size()));
    for (const auto& s : negatives.samples) w.vec(s);
    w.finish();
}

LoadedSnapshot load_snapshot(const std::filesystem::path& path) {
    io::BinaryReader r(path);
    if (r.bytes(sizeof kSnapshotMagic) != std::string_view(kSnapshotMagic, sizeof kSnapshotMagic))
        throw ValidationError(path.string() + ": not a snapshot cache file");
    auto version = r.pod<std::uint32_t>();
    if (version != kSnapshotVersion)
        throw StaleCacheError(path.string() + ": snapshot cache version " + std::to_string(version) +
                              " is not supported");
    LoadedSnapshot out;
    out.key.corpus_hash = r.str();
    out.key.channel = static_cast<Channel>(r.pod<std::uint8_t>());
    out.key.year = r.pod<std::int32_t>();
    out.key.config_hash = r.str();

    auto& s = out.snapshot;
    s.year = r.pod<std::int32_t>();
    s.channel = static_cast<Channel>(r.pod<std::uint8_t>());
    auto n_ids = r.pod<std::uint64_t>();
    std::vector<std::string> ids;
    ids.reserve(n_ids);
    for (std::uint64_t i = 0; i < n_ids; ++i) ids.push_back(r.str());
    s.vocab = std::make_shared<const NodeVocab>(std::move(ids));
    auto n_edges = r.pod<std::uint64_t>();
    s.hyperedges.resize(n_edges);
    for (auto& h : s.hyperedges) {
        h.paper_id = r.str();
        h.year = r.pod<std::int32_t>();
        h.nodes = r.vec<int>();
    }
    auto n_counts = r.pod<std::uint64_t>();
    s.edge_counts.resize(n_counts);
    for (auto& c : s.edge_counts) {
        c.nodes = r.vec<int>();
        c.count = r.pod<std::int32_t>();
    }
    auto n_unscorable = r.pod<std::uint64_t>();
    s.unscorable.resize(n_unscorable);
    for (auto& id : s.unscorable) id = r.str();
    out.negatives.per_positive_ratio = r.pod<std::int32_t>();
    auto n_neg = r.pod<std::uint64_t>();
    out.negatives.samples.resize(n_neg);
    for (auto& v : out.negatives.samples) v = r.vec<int>();
    return out;
}

}  // namespace novscope
