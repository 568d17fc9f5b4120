#include "synthetic.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace synthetic {

namespace {

constexpr const char* kSyllables[] = {"ka", "lo", "mi", "ne", "pu", "ra", "si", "to",
                                      "va", "ze", "bo", "di", "fu", "ge", "ho", "ju"};

std::discrete_distribution<std::size_t> zipf(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t r = 0; r < n; ++r) w[r] = 1.0 / static_cast<double>(r + 1);
    return {w.begin(), w.end()};
}

}  // namespace

std::string pseudo_word(std::size_t index) {
    std::string out;
    for (int s = 0; s < 3; ++s) {
        out += kSyllables[index % 16];
        index /= 16;
    }
    if (index != 0) throw std::out_of_range("pseudo_word index too large");
    return out;
}

LabeledCorpus topic_corpus(const TopicCorpusOptions& o) {
    const std::size_t g = o.groups.size();
    if (g == 0 || o.per_group == 0) throw std::invalid_argument("empty synthetic corpus");
    std::mt19937_64 rng(o.seed);

    if (o.subtopics == 0) throw std::invalid_argument("groups need at least one subtopic");
    // Word indices: background first, then one block per (group, subtopic).
    auto topic_word = [&](std::size_t group, std::size_t sub, std::size_t rank) {
        return pseudo_word(o.background_terms + (group * o.subtopics + sub) * o.topic_terms + rank);
    };
    auto background = zipf(o.background_terms);
    auto topic = zipf(o.topic_terms);
    std::uniform_real_distribution<double> share(o.topic_share_min, o.topic_share_max);
    std::uniform_int_distribution<std::size_t> length(o.length_min, o.length_max);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> other_group(0, g - 1);
    std::uniform_int_distribution<std::size_t> subtopic(0, o.subtopics - 1);

    LabeledCorpus out;
    out.corpus.provenance = "synthetic:" + std::to_string(o.seed);
    // Interleave groups so corpus order carries no label information.
    for (std::size_t d = 0; d < o.per_group; ++d)
        for (std::size_t grp = 0; grp < g; ++grp) {
            korpusmap::Document doc;
            doc.id = "syn-" + std::to_string(grp) + "-" + std::to_string(d);
            if (o.label_by_keyword) {
                doc.institution = korpusmap::Institution::CommonCourt;
                doc.keywords.push_back(o.groups[grp]);
            } else {
                const auto inst = korpusmap::parse_institution(o.groups[grp]);
                if (!inst) throw std::invalid_argument("unknown institution " + o.groups[grp]);
                doc.institution = *inst;
            }
            const std::size_t sub = subtopic(rng);
            const double s = share(rng);
            const std::size_t len = length(rng);
            for (std::size_t t = 0; t < len; ++t) {
                const double u = unit(rng);
                std::string word;
                if (u < s)
                    word = topic_word(grp, sub, topic(rng));
                else if (u < s + o.cross_share)
                    word = topic_word(other_group(rng), subtopic(rng), topic(rng));
                else
                    word = pseudo_word(background(rng));
                if (!doc.text.empty()) doc.text += (t % 17 == 16) ? ". " : " ";
                doc.text += word;
            }
            doc.text += ".";
            out.corpus.documents.push_back(std::move(doc));
            out.group.push_back(grp);
        }
    return out;
}

TopicCorpusOptions three_topic_options(std::uint64_t seed) {
    TopicCorpusOptions o;
    o.groups = {"SupremeCourt", "ConstitutionalTribunal", "CommonCourt"};
    o.per_group = 200;
    o.subtopics = 2;
    o.topic_share_min = 0.02;
    o.topic_share_max = 0.5;
    o.seed = seed;
    return o;
}

TopicCorpusOptions five_keyword_options(std::uint64_t seed) {
    TopicCorpusOptions o;
    o.groups = {"pension", "insurance", "employment", "disability", "contribution"};
    o.label_by_keyword = true;
    o.per_group = 450;
    o.subtopics = 2;
    o.topic_share_min = 0.02;
    o.topic_share_max = 0.5;
    o.seed = seed;
    return o;
}

}  // namespace synthetic
