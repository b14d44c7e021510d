#include "kbqa/classifier.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "kbqa/rng.hpp"
#include "kbqa/utf8.hpp"

namespace kbqa {

namespace {

std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed) {
  std::uint64_t h = 0xCBF29CE484222325ULL ^ (seed * 0x9E3779B97F4A7C15ULL);
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

double raw_score(const LinearClassifier& m, const SparseFeatures& x) {
  double s = m.bias;
  for (const auto& [idx, val] : x.items) s += m.weights[idx] * val;
  return s;
}

int label_sign(QuestionClass c) { return c == QuestionClass::MultiEntity ? 1 : -1; }

}  // namespace

std::string to_string(QuestionClass c) {
  return c == QuestionClass::OneEntity ? "one_entity" : "multi_entity";
}

QuestionClass question_class_from_string(std::string_view s) {
  if (s == "one_entity") return QuestionClass::OneEntity;
  if (s == "multi_entity") return QuestionClass::MultiEntity;
  throw std::invalid_argument("unknown question class: " + std::string(s));
}

SparseFeatures featurize(std::string_view text, int candidate_count,
                         std::uint32_t feature_space, std::uint64_t hash_seed) {
  if (feature_space == 0 || (feature_space & (feature_space - 1)) != 0)
    throw std::invalid_argument("feature_space must be a power of two");
  std::map<std::uint32_t, double> acc;

  auto offs = utf8::char_offsets(text);
  std::size_t chars = offs.size() - 1;
  for (int n : {2, 3}) {
    for (std::size_t i = 0; i + n <= chars; ++i) {
      std::string key = "g";
      key += std::to_string(n);
      key += ':';
      key += utf8::slice(text, offs, i, i + n);
      acc[static_cast<std::uint32_t>(fnv1a64(key, hash_seed) & (feature_space - 1))] += 1.0;
    }
  }

  int bucket = candidate_count >= 3 ? 3 : std::max(candidate_count, 0);
  std::string key = "cnt:" + std::to_string(bucket);
  acc[static_cast<std::uint32_t>(fnv1a64(key, hash_seed) & (feature_space - 1))] += 1.0;

  SparseFeatures out;
  out.items.assign(acc.begin(), acc.end());
  return out;
}

LinearClassifier train_classifier(std::span<const LabeledQuestion> data, int epochs,
                                  double learning_rate, std::uint64_t seed,
                                  std::uint32_t feature_space, TrainReport* report) {
  if (data.empty()) throw std::invalid_argument("empty training data");
  bool has_one = false, has_multi = false;
  for (const auto& q : data) {
    has_one |= q.label == QuestionClass::OneEntity;
    has_multi |= q.label == QuestionClass::MultiEntity;
  }
  if (!has_one || !has_multi)
    throw std::invalid_argument("training data must contain both classes");

  LinearClassifier model;
  model.feature_space = feature_space;
  model.hash_seed = seed;
  model.weights.assign(feature_space, 0.0);

  std::vector<SparseFeatures> feats;
  feats.reserve(data.size());
  for (const auto& q : data)
    feats.push_back(featurize(q.text, q.candidate_count, feature_space, seed));

  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  Rng rng(seed);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    std::size_t errors = 0;
    for (std::size_t i : order) {
      int y = label_sign(data[i].label);
      int pred = raw_score(model, feats[i]) > 0.0 ? 1 : -1;
      if (pred != y) {
        ++errors;
        for (const auto& [idx, val] : feats[i].items)
          model.weights[idx] += learning_rate * y * val;
        model.bias += learning_rate * y;
      }
    }
    if (report)
      report->epoch_error_rates.push_back(static_cast<double>(errors) /
                                          static_cast<double>(data.size()));
  }
  return model;
}

QuestionClass classify(const LinearClassifier& model, std::string_view text,
                       int candidate_count) {
  SparseFeatures x = featurize(text, candidate_count, model.feature_space, model.hash_seed);
  return raw_score(model, x) > 0.0 ? QuestionClass::MultiEntity : QuestionClass::OneEntity;
}

std::vector<LabeledQuestion> mix_data(std::span<const LabeledQuestion> real,
                                      std::span<const LabeledQuestion> synthetic,
                                      double real_fraction, std::size_t synth_count,
                                      std::uint64_t seed) {
  if (real_fraction <= 0.0 || real_fraction > 1.0)
    throw std::invalid_argument("real_fraction must be in (0, 1]");
  if (synth_count > synthetic.size())
    throw std::invalid_argument("requested more synthetic items than available");

  Rng rng(seed);
  std::vector<LabeledQuestion> real_copy(real.begin(), real.end());
  rng.shuffle(real_copy);
  std::size_t keep = static_cast<std::size_t>(
      std::ceil(real_fraction * static_cast<double>(real.size())));
  keep = std::min(keep, real_copy.size());
  real_copy.resize(keep);

  std::vector<LabeledQuestion> synth_copy(synthetic.begin(), synthetic.end());
  rng.shuffle(synth_copy);
  synth_copy.resize(synth_count);

  real_copy.insert(real_copy.end(), synth_copy.begin(), synth_copy.end());
  return real_copy;
}

std::vector<MixPreset> mix_presets() {
  return {{0.1, 50}, {0.5, 500}, {1.0, 3750}};
}

void save_classifier(const LinearClassifier& model, const std::string& path) {
  std::ofstream out(path);
  if (!out.is_open()) throw std::runtime_error(path + ": cannot write model file");
  out << model.feature_space << ' ' << model.hash_seed << ' ';
  char buf[64];
  auto [p0, e0] = std::to_chars(buf, buf + sizeof buf, model.bias);
  out.write(buf, p0 - buf);
  out << '\n';
  bool first = true;
  for (std::uint32_t i = 0; i < model.weights.size(); ++i) {
    if (model.weights[i] == 0.0) continue;
    if (!first) out << ' ';
    first = false;
    out << i << ':';
    auto [p, e] = std::to_chars(buf, buf + sizeof buf, model.weights[i]);
    out.write(buf, p - buf);
  }
  out << '\n';
}

LinearClassifier load_classifier(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw std::runtime_error(path + ": cannot open model file");
  LinearClassifier model;
  if (!(in >> model.feature_space >> model.hash_seed >> model.bias))
    throw std::runtime_error(path + ": malformed model header");
  model.weights.assign(model.feature_space, 0.0);
  std::string pair;
  while (in >> pair) {
    std::size_t colon = pair.find(':');
    if (colon == std::string::npos) throw std::runtime_error(path + ": malformed weight pair");
    std::uint32_t idx = static_cast<std::uint32_t>(std::stoul(pair.substr(0, colon)));
    if (idx >= model.feature_space) throw std::runtime_error(path + ": weight index out of range");
    model.weights[idx] = std::stod(pair.substr(colon + 1));
  }
  return model;
}

}  // namespace kbqa
