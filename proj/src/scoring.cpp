#include "novscope/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "novscope/csv.hpp"
#include "novscope/error.hpp"
#include "novscope/io.hpp"

namespace novscope {

std::optional<double> surprise(const EmbeddingModel& model, std::span<const int> nodes) {
    if (nodes.size() < 2) return std::nullopt;
    return std::max(0.0, -model.log_coherence(nodes));
}

std::optional<double> surprise(const EmbeddingModel& model, const PaperRecord& paper,
                               const SnapshotConfig& nodes) {
    auto set = paper_nodes(paper, model.channel(), model.vocab(), nodes);
    return surprise(model, set);
}

std::optional<double> prescience(const EmbeddingModel& model_t0, const EmbeddingModel& model_t2,
                                 const PaperRecord& paper, int horizon, const SnapshotConfig& nodes) {
    if (model_t2.year() != model_t0.year() + horizon)
        throw ValidationError("prescience models must be " + std::to_string(horizon) +
                              " years apart (got " + std::to_string(model_t0.year()) + " and " +
                              std::to_string(model_t2.year()) + ")");
    auto s0 = surprise(model_t0, paper, nodes);
    auto s2 = surprise(model_t2, paper, nodes);
    if (!s0 || !s2) return std::nullopt;
    return *s0 - *s2;
}

double rank_in_sorted(double value, std::span<const double> sorted) {
    auto lo = std::lower_bound(sorted.begin(), sorted.end(), value);
    auto hi = std::upper_bound(lo, sorted.end(), value);
    auto less = static_cast<double>(lo - sorted.begin());
    auto equal = static_cast<double>(hi - lo);
    double avg_rank = less + (equal + 1.0) / 2.0;
    return (avg_rank - 1.0) / static_cast<double>(sorted.size() - 1);
}

std::optional<std::vector<double>> percentile_rank(std::span<const double> values) {
    if (values.size() < 2) return std::nullopt;
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values) out.push_back(rank_in_sorted(v, sorted));
    return out;
}

std::optional<double> field_max_rank(const PaperRecord& paper, double raw,
                                     const FieldDistributions& distributions) {
    std::optional<double> best;
    for (const auto& f : paper.field_ids_l1) {
        auto it = distributions.find(f);
        if (it == distributions.end() || it->second.size() < 2) continue;
        double r = rank_in_sorted(raw, it->second);
        if (!best || r > *best) best = r;
    }
    return best;
}

void ModelSet::add(std::shared_ptr<const EmbeddingModel> model) {
    auto key = std::make_pair(model->channel(), model->year());
    models_[key] = std::move(model);
}

const EmbeddingModel* ModelSet::find(Channel channel, int year) const {
    auto it = models_.find({channel, year});
    return it == models_.end() ? nullptr : it->second.get();
}

std::vector<int> ModelSet::years(Channel channel) const {
    std::vector<int> out;
    for (const auto& [key, m] : models_)
        if (key.first == channel) out.push_back(key.second);
    return out;
}

bool ModelSet::has_channel(Channel channel) const { return !years(channel).empty(); }

std::vector<ScoreRow> score_corpus(const Corpus& corpus, const ModelSet& models,
                                   const std::vector<Channel>& channels, const ScoreConfig& cfg) {
    const auto& papers = corpus.papers();
    std::vector<std::vector<ScoreRow>> per_channel;
    for (Channel ch : channels) {
        auto years = models.years(ch);
        if (years.empty())
            throw ValidationError(std::string("no models for channel ") + std::string(to_string(ch)));
        const auto& vocab = models.find(ch, years.front())->vocab();

        std::vector<NodeSet> nodes;
        nodes.reserve(papers.size());
        std::set<int> missing;
        for (const auto& p : papers) {
            nodes.push_back(paper_nodes(p, ch, vocab, cfg.nodes));
            if (nodes.back().size() >= 2 && models.find(ch, p.year) == nullptr) missing.insert(p.year);
        }
        if (!missing.empty()) {
            std::string list;
            for (int y : missing) list += (list.empty() ? "" : ", ") + std::to_string(y);
            throw ValidationError(std::string("missing ") + std::string(to_string(ch)) +
                                  " models for years: " + list);
        }

        std::vector<ScoreRow> rows(papers.size());
        FieldDistributions surprise_dist, prescience_dist;
        for (std::size_t i = 0; i < papers.size(); ++i) {
            const auto& p = papers[i];
            auto& row = rows[i];
            row.paper_id = p.paper_id;
            row.channel = ch;
            if (nodes[i].size() < 2) continue;
            const auto* m0 = models.find(ch, p.year);
            row.raw_surprise_t0 = surprise(*m0, nodes[i]);
            if (const auto* m2 = models.find(ch, p.year + cfg.horizon)) {
                row.raw_surprise_t2 = surprise(*m2, nodes[i]);
                row.raw_prescience = *row.raw_surprise_t0 - *row.raw_surprise_t2;
            }
            for (const auto& f : p.field_ids_l1) {
                surprise_dist[f].push_back(*row.raw_surprise_t0);
                if (row.raw_prescience) prescience_dist[f].push_back(*row.raw_prescience);
            }
        }
        for (auto& [f, v] : surprise_dist) std::sort(v.begin(), v.end());
        for (auto& [f, v] : prescience_dist) std::sort(v.begin(), v.end());
        for (std::size_t i = 0; i < papers.size(); ++i) {
            auto& row = rows[i];
            if (row.raw_surprise_t0)
                row.pct_surprise = field_max_rank(papers[i], *row.raw_surprise_t0, surprise_dist);
            if (row.raw_prescience)
                row.pct_prescience = field_max_rank(papers[i], *row.raw_prescience, prescience_dist);
        }
        per_channel.push_back(std::move(rows));
    }

    std::vector<ScoreRow> out;
    out.reserve(papers.size() * channels.size());
    for (std::size_t i = 0; i < papers.size(); ++i)
        for (auto& rows : per_channel) out.push_back(std::move(rows[i]));
    return out;
}

std::string format_scores_csv(const std::vector<ScoreRow>& rows) {
    std::string out = "paper_id,channel,raw_surprise,raw_prescience,pct_surprise,pct_prescience\n";
    for (const auto& r : rows) {
        out += csv::escape(r.paper_id);
        out += ',';
        out += to_string(r.channel);
        out += ',' + io::format_optional(r.raw_surprise_t0);
        out += ',' + io::format_optional(r.raw_prescience);
        out += ',' + io::format_optional(r.pct_surprise);
        out += ',' + io::format_optional(r.pct_prescience);
        out += '\n';
    }
    return out;
}

std::vector<ScoreRow> parse_scores_csv(const std::string& text) {
    auto rows = csv::parse(text);
    if (rows.empty() || rows.front() != std::vector<std::string>{"paper_id", "channel", "raw_surprise",
                                                                  "raw_prescience", "pct_surprise",
                                                                  "pct_prescience"})
        throw ValidationError("scores.csv has an unexpected header");
    std::vector<ScoreRow> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != 6) throw ValidationError("scores.csv row " + std::to_string(i) + " has wrong width");
        ScoreRow s;
        s.paper_id = r[0];
        s.channel = channel_from_string(r[1]);
        s.raw_surprise_t0 = csv::to_optional_double(r[2]);
        s.raw_prescience = csv::to_optional_double(r[3]);
        s.pct_surprise = csv::to_optional_double(r[4]);
        s.pct_prescience = csv::to_optional_double(r[5]);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace novscope
