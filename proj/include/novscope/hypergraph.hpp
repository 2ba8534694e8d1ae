#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "novscope/corpus.hpp"

namespace novscope {

enum class Channel : std::uint8_t { content, context };

std::string_view to_string(Channel c);
Channel channel_from_string(std::string_view s);

// Node ids in a canonical hyperedge are sorted ascending and unique.
using NodeSet = std::vector<int>;

inline constexpr std::string_view kRareNodeId = "__RARE__";

// Dense node vocabulary for one channel. Index 0 is the reserved RARE bucket;
// the remaining ids are sorted lexicographically.
class NodeVocab {
public:
    NodeVocab() : ids_{std::string(kRareNodeId)} { index_.emplace(ids_[0], 0); }
    explicit NodeVocab(std::vector<std::string> ids);

    int size() const { return static_cast<int>(ids_.size()); }
    const std::string& id(int i) const { return ids_.at(static_cast<std::size_t>(i)); }
    const std::vector<std::string>& ids() const { return ids_; }
    // Unknown ids map to the RARE bucket.
    int lookup(std::string_view id) const;
    std::optional<int> find(std::string_view id) const;
    static constexpr int rare() { return 0; }
    std::uint64_t hash() const;

private:
    std::vector<std::string> ids_;
    std::unordered_map<std::string, int> index_;
};

struct SnapshotConfig {
    int min_node_freq = 5;
    int max_edge_size = 32;
    // Number of past years (besides the snapshot year) to include; nullopt = all.
    std::optional<int> history_window;
    std::uint64_t seed = 0;
};

// Counts, over the corpus, how many papers mention each channel node and
// keeps nodes with at least min_node_freq mentions.
NodeVocab build_vocab(const Corpus& corpus, Channel channel, const SnapshotConfig& cfg = {});

// Raw channel ids of a paper: concepts, or distinct referenced journals.
std::vector<std::string> channel_ids(const PaperRecord& paper, Channel channel);

// Canonical node set of a paper: ids mapped through the vocabulary (unknown to RARE),
// deduplicated, and uniformly subsampled to max_edge_size with a seed derived from
// the paper id. Fewer than two nodes means the paper is unscorable on this channel.
NodeSet paper_nodes(const PaperRecord& paper, Channel channel, const NodeVocab& vocab,
                    const SnapshotConfig& cfg = {});

struct Hyperedge {
    std::string paper_id;
    int year = 0;
    NodeSet nodes;
};

struct Combination {
    NodeSet nodes;
    int count = 0;
};

struct HypergraphSnapshot {
    int year = 0;
    Channel channel = Channel::content;
    std::shared_ptr<const NodeVocab> vocab;
    std::vector<Hyperedge> hyperedges;
    // Distinct canonical node sets with their multiplicity, sorted by node set.
    std::vector<Combination> edge_counts;
    std::vector<std::string> unscorable;

    bool empty() const { return edge_counts.empty(); }
    int num_nodes() const { return vocab ? vocab->size() : 0; }
    // Per-node number of hyperedge memberships, weighted by multiplicity.
    std::vector<double> node_frequencies() const;
};

struct NegativeSampleSet {
    std::vector<NodeSet> samples;
    int per_positive_ratio = 1;
};

// One snapshot per year in [first_year, last_year]. The snapshot for year t holds
// papers from the history window ending at t.
std::vector<HypergraphSnapshot> build_snapshots(const Corpus& corpus, Channel channel,
                                                int first_year, int last_year,
                                                const SnapshotConfig& cfg = {},
                                                std::shared_ptr<const NodeVocab> vocab = {});

// ratio negatives per distinct positive combination, matching its cardinality.
// Nodes are drawn proportional to their frequency in the snapshot; observed
// combinations are rejected and redrawn.
NegativeSampleSet draw_negatives(const HypergraphSnapshot& snapshot, int ratio, std::uint64_t seed);

// Versioned binary cache. The key ties a file to (corpus, channel, year, config).
struct SnapshotCacheKey {
    std::string corpus_hash;
    Channel channel = Channel::content;
    int year = 0;
    std::string config_hash;
};

void save_snapshot(const std::filesystem::path& path, const SnapshotCacheKey& key,
                   const HypergraphSnapshot& snapshot, const NegativeSampleSet& negatives);

struct LoadedSnapshot {
    SnapshotCacheKey key;
    HypergraphSnapshot snapshot;
    NegativeSampleSet negatives;
};

LoadedSnapshot load_snapshot(const std::filesystem::path& path);

}  // namespace novscope
