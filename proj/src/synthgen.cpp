#include "hemb/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "hemb/rng.hpp"

namespace hemb {

namespace {

std::string synth_word(int rank, int vocab_size) {
  int digits = 1;
  for (int v = vocab_size - 1; v >= 10; v /= 10) ++digits;
  std::string suffix = std::to_string(rank);
  return "w" + std::string(static_cast<size_t>(digits) - suffix.size(), '0') + suffix;
}

std::vector<std::string> node_paths(const std::vector<int>& branching) {
  std::vector<std::string> paths;
  std::vector<std::string> frontier{""};
  for (size_t level = 0; level < branching.size(); ++level) {
    if (branching[level] < 1) throw std::invalid_argument("branching factors must be >= 1");
    std::vector<std::string> next;
    for (const auto& prefix : frontier) {
      for (int c = 0; c < branching[level]; ++c) {
        std::string name = (level == 0 ? "cat" : "sub") + std::to_string(c);
        std::string path = prefix.empty() ? name : prefix + "/" + name;
        paths.push_back(path);
        next.push_back(path);
      }
    }
    frontier = std::move(next);
  }
  return paths;
}

std::vector<std::string> leaf_paths(const std::vector<int>& branching) {
  auto all = node_paths(branching);
  const size_t depth = branching.size();
  std::vector<std::string> leaves;
  for (const auto& p : all) {
    if (static_cast<size_t>(std::count(p.begin(), p.end(), '/')) + 1 == depth) leaves.push_back(p);
  }
  return leaves;
}

std::string parent_of(const std::string& path) {
  auto slash = path.rfind('/');
  return slash == std::string::npos ? std::string() : path.substr(0, slash);
}

void validate(const SynthSpec& spec) {
  if (spec.vocab_size < 10) throw std::invalid_argument("vocab_size must be >= 10");
  if (spec.branching.empty()) throw std::invalid_argument("branching must be non-empty");
  if (spec.sentence_length < 1) throw std::invalid_argument("sentence_length must be >= 1");
  if (spec.sentences_per_node < 0) throw std::invalid_argument("sentences_per_node must be >= 0");
  if (spec.shift_strength < 0.0 || spec.shift_strength > 1.0) {
    throw std::invalid_argument("shift_strength must be in [0, 1]");
  }
  auto paths = node_paths(spec.branching);
  std::set<std::string> known(paths.begin(), paths.end());
  for (const auto& p : spec.planted) {
    if (!known.count(p.node_a)) throw std::invalid_argument("planted node not in taxonomy: " + p.node_a);
    if (!known.count(p.node_b)) throw std::invalid_argument("planted node not in taxonomy: " + p.node_b);
    if (p.partners_a.empty() || p.partners_b.empty()) {
      throw std::invalid_argument("planted word '" + p.word + "' has an empty partner set");
    }
    std::set<std::string> a(p.partners_a.begin(), p.partners_a.end());
    for (const auto& w : p.partners_b) {
      if (a.count(w)) {
        throw std::invalid_argument("partner sets of planted word '" + p.word +
                                    "' overlap on '" + w + "'");
      }
    }
    if (a.count(p.word) ||
        std::count(p.partners_b.begin(), p.partners_b.end(), p.word) > 0) {
      throw std::invalid_argument("planted word '" + p.word + "' occurs in its own partner set");
    }
  }
}

}  // namespace

void assign_default_planted(SynthSpec& spec) {
  if (spec.planted_words <= 0) return;
  auto leaves = leaf_paths(spec.branching);
  if (leaves.size() < 2) {
    throw std::invalid_argument("default planted assignment needs at least two leaf nodes");
  }

  // Alternate pairs of leaves under different parents (signal the grouped
  // variant can separate) with sibling pairs (signal only the hierarchical
  // variant can separate), greedily picking the least-loaded leaves so the
  // shifts spread over the tree.
  std::vector<size_t> usage(leaves.size(), 0);
  auto scan_pair = [&](bool want_sibling, std::pair<size_t, size_t>& best) {
    size_t best_score = std::numeric_limits<size_t>::max();
    for (size_t i = 0; i < leaves.size(); ++i) {
      for (size_t j = 0; j < leaves.size(); ++j) {
        if (i == j) continue;
        const bool siblings = parent_of(leaves[i]) == parent_of(leaves[j]);
        if (siblings != want_sibling) continue;
        const size_t score = usage[i] + usage[j];
        if (score < best_score) {
          best_score = score;
          best = {i, j};
        }
      }
    }
    return best_score != std::numeric_limits<size_t>::max();
  };
  auto pick_pair = [&](bool want_sibling) {
    std::pair<size_t, size_t> best{0, 0};
    if (!scan_pair(want_sibling, best)) scan_pair(!want_sibling, best);
    ++usage[best.first];
    ++usage[best.second];
    return best;
  };
  bool has_sibling_pair = false;
  for (size_t i = 0; i + 1 < leaves.size() && !has_sibling_pair; ++i) {
    has_sibling_pair = parent_of(leaves[i]) == parent_of(leaves[i + 1]);
  }

  const int planted = spec.planted_words;
  const int rank0 = spec.vocab_size / 8;
  const int rank_step = std::max(1, spec.vocab_size / 20);
  const int partner_base = spec.vocab_size / 3;
  const int needed = partner_base + 2 * spec.partner_set_size * planted;
  if (needed > spec.vocab_size) {
    throw std::invalid_argument("vocab_size too small for the requested planted/partner layout");
  }

  spec.planted.clear();
  for (int t = 0; t < planted; ++t) {
    PlantedWordSpec p;
    p.word = synth_word(rank0 + t * rank_step, spec.vocab_size);
    const bool want_sibling = (t % 2 == 1) && has_sibling_pair;
    auto [ia, ib] = pick_pair(want_sibling);
    p.node_a = leaves[ia];
    p.node_b = leaves[ib];
    const int base = partner_base + 2 * spec.partner_set_size * t;
    for (int s = 0; s < spec.partner_set_size; ++s) {
      p.partners_a.push_back(synth_word(base + s, spec.vocab_size));
      p.partners_b.push_back(synth_word(base + spec.partner_set_size + s, spec.vocab_size));
    }
    spec.planted.push_back(std::move(p));
  }
}

SynthData generate(const SynthSpec& spec_in) {
  SynthSpec spec = spec_in;
  if (spec.planted.empty() && spec.planted_words > 0 && spec.shift_strength > 0.0) {
    assign_default_planted(spec);
  }
  validate(spec);

  // Zipf background over word ranks.
  std::vector<double> cdf(static_cast<size_t>(spec.vocab_size));
  double total = 0.0;
  for (int r = 0; r < spec.vocab_size; ++r) {
    total += 1.0 / std::pow(static_cast<double>(r + 1), spec.zipf_exponent);
    cdf[static_cast<size_t>(r)] = total;
  }
  for (auto& c : cdf) c /= total;
  cdf.back() = 1.0;

  Rng rng(spec.seed);
  auto draw_background = [&]() {
    const double u = rng.uniform01();
    auto idx = static_cast<size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    if (idx >= cdf.size()) idx = cdf.size() - 1;
    return synth_word(static_cast<int>(idx), spec.vocab_size);
  };

  // Planted words active at each node.
  struct Plant {
    const std::string* word;
    const std::vector<std::string>* partners;
  };
  std::map<std::string, std::vector<Plant>> plants;
  SynthData out;
  for (const auto& p : spec.planted) {
    plants[p.node_a].push_back({&p.word, &p.partners_a});
    plants[p.node_b].push_back({&p.word, &p.partners_b});
    if (spec.shift_strength > 0.0) {
      out.ground_truth[p.node_a].push_back(p.word);
      out.ground_truth[p.node_b].push_back(p.word);
    }
  }

  const int length = spec.sentence_length;
  for (const auto& path : node_paths(spec.branching)) {
    const auto* node_plants = plants.count(path) ? &plants.at(path) : nullptr;
    for (int s = 0; s < spec.sentences_per_node; ++s) {
      std::vector<std::string> tokens(static_cast<size_t>(length));
      for (auto& t : tokens) t = draw_background();
      if (node_plants && rng.uniform01() < spec.shift_strength) {
        const Plant& plant =
            (*node_plants)[rng.uniform_below(static_cast<uint32_t>(node_plants->size()))];
        const int pos = static_cast<int>(rng.uniform_below(static_cast<uint32_t>(length)));
        tokens[static_cast<size_t>(pos)] = *plant.word;
        const int lo = std::max(0, pos - spec.window);
        const int hi = std::min(length - 1, pos + spec.window);
        for (int j = lo; j <= hi; ++j) {
          if (j == pos) continue;
          tokens[static_cast<size_t>(j)] =
              (*plant.partners)[rng.uniform_below(static_cast<uint32_t>(plant.partners->size()))];
        }
      }
      RawRecord record;
      record.node_path = path;
      record.text = tokens[0];
      for (size_t j = 1; j < tokens.size(); ++j) {
        record.text += ' ';
        record.text += tokens[j];
      }
      out.records.push_back(std::move(record));
    }
  }
  return out;
}

void write_ground_truth_json(const std::string& path,
                             const std::map<std::string, std::vector<std::string>>& truth) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write ground truth file: " + path);
  nlohmann::json obj(truth);
  file << obj.dump(2) << '\n';
}

std::map<std::string, std::vector<std::string>> read_ground_truth_json(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot read ground truth file: " + path);
  nlohmann::json obj = nlohmann::json::parse(file);
  return obj.get<std::map<std::string, std::vector<std::string>>>();
}

}  // namespace hemb
