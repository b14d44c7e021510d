#pragma once
// One-entity vs multi-entity question classifier: a perceptron over hashed
// character n-grams plus a bucketed candidate-count feature. Training is
// fully deterministic given (data, seed, hyperparameters).

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kbqa {

enum class QuestionClass : std::uint8_t { OneEntity, MultiEntity };

std::string to_string(QuestionClass c);
QuestionClass question_class_from_string(std::string_view s);

struct SparseFeatures {
  // (index, value) sorted by index; indices live in [0, feature_space).
  std::vector<std::pair<std::uint32_t, double>> items;
};

struct LinearClassifier {
  std::uint32_t feature_space = 1u << 16;  // power of two
  std::uint64_t hash_seed = 0;
  double bias = 0.0;
  std::vector<double> weights;  // dense, size feature_space
};

struct LabeledQuestion {
  enum class Origin : std::uint8_t { Real, Synthetic };
  std::string text;
  QuestionClass label = QuestionClass::OneEntity;
  int candidate_count = 0;
  Origin origin = Origin::Real;
};

// Hashed character 2-grams and 3-grams of the text (occurrence counts) plus
// one feature for the candidate-count bucket (0, 1, 2, >=3).
SparseFeatures featurize(std::string_view text, int candidate_count,
                         std::uint32_t feature_space, std::uint64_t hash_seed);

struct TrainReport {
  std::vector<double> epoch_error_rates;  // misclassified fraction per epoch
};

// Perceptron training with per-epoch seeded shuffling. Requires both classes
// present. The report's error trace is the convergence signal.
LinearClassifier train_classifier(std::span<const LabeledQuestion> data, int epochs,
                                  double learning_rate, std::uint64_t seed,
                                  std::uint32_t feature_space = 1u << 16,
                                  TrainReport* report = nullptr);

// Sign of <w, features> + bias; an exact zero classifies as OneEntity.
QuestionClass classify(const LinearClassifier& model, std::string_view text,
                       int candidate_count);

// Deterministic subsample: ceil(real_fraction * |real|) real items plus the
// first synth_count synthetic items, each after a seeded shuffle.
std::vector<LabeledQuestion> mix_data(std::span<const LabeledQuestion> real,
                                      std::span<const LabeledQuestion> synthetic,
                                      double real_fraction, std::size_t synth_count,
                                      std::uint64_t seed);

struct MixPreset {
  double real_fraction;
  std::size_t synth_count;
};
// Presets for the 10% / 50% / 100% data regimes.
std::vector<MixPreset> mix_presets();

// Text model format: first line `F seed bias`, then whitespace-separated
// `index:weight` pairs for nonzero weights.
void save_classifier(const LinearClassifier& model, const std::string& path);
LinearClassifier load_classifier(const std::string& path);

}  // namespace kbqa
