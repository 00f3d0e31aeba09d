#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "vsum/matrix.hpp"
#include "vsum/rng.hpp"

namespace vsum {

struct EncoderConfig {
  std::size_t layers = 3;
  std::size_t heads = 8;
  std::size_t dim = 1024;
  std::size_t ff = 4096;
  std::size_t max_len = 128;

  // Throws kInvalidArgument unless dim % heads == 0 and every field is positive.
  void validate() const;
  std::size_t head_dim() const { return dim / heads; }
  bool operator==(const EncoderConfig&) const = default;
};

// A named trainable tensor. Gradients are accumulated by backward passes and
// cleared by zero_grad().
template <typename T>
struct Param {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<T> value;
  std::vector<T> grad;
};

// Ordered parameter collection. Layers refer to entries by index, so copies
// of a model stay self-consistent.
template <typename T>
class ParamStore {
 public:
  std::size_t add(std::string name, std::vector<std::size_t> shape);

  Param<T>& operator[](std::size_t i) { return params_[i]; }
  const Param<T>& operator[](std::size_t i) const { return params_[i]; }
  std::size_t size() const { return params_.size(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  // Index of the named parameter, or size() when absent.
  std::size_t find(const std::string& name) const;
  void zero_grad();
  std::size_t scalar_count() const;
  // FNV-1a over names, shapes, and value bytes.
  std::uint64_t hash() const;

 private:
  std::vector<Param<T>> params_;
};

struct LayerNormIdx {
  std::size_t gamma, beta;
};
struct LinearIdx {
  std::size_t weight, bias;  // weight is out x in, row-major
};
struct EncoderLayerIdx {
  LinearIdx q, k, v, o, ff1, ff2;
  LayerNormIdx ln1, ln2;
};
struct EncoderLayout {
  std::size_t positional;
  std::vector<EncoderLayerIdx> layers;
};

// Intermediate activations of one encoder layer, kept for the backward pass.
template <typename T>
struct LayerTape {
  Matrix<T> input, q, k, v;
  Matrix<T> attn;  // (heads * L) x L softmax weights
  Matrix<T> context, xhat1, y1, pre_ff, act_ff, xhat2;
  std::vector<T> inv_std1, inv_std2;
};

template <typename T>
struct EncoderTape {
  std::vector<std::uint8_t> valid;
  std::vector<LayerTape<T>> layers;
  Matrix<T> output;
};

// Post-norm transformer encoder over a length-L window with trainable
// positional embeddings. Invalid (PAD) positions are excluded as attention
// keys; their own output rows are computed but carry no meaning.
template <typename T>
class Encoder {
 public:
  Encoder() = default;
  Encoder(const EncoderConfig& config, ParamStore<T>& store);

  const EncoderConfig& config() const { return config_; }
  const EncoderLayout& layout() const { return layout_; }

  Matrix<T> forward(const ParamStore<T>& store, const Matrix<T>& input, std::span<const std::uint8_t> valid,
                    EncoderTape<T>* tape) const;
  // Accumulates parameter gradients; returns d(loss)/d(input).
  Matrix<T> backward(ParamStore<T>& store, const EncoderTape<T>& tape, const Matrix<T>& d_output) const;

  // Seeded initialization of this encoder's parameters.
  void initialize(ParamStore<T>& store, Rng& rng) const;

 private:
  EncoderConfig config_;
  EncoderLayout layout_;
};

template <typename T>
struct GeneratorTape {
  EncoderTape<T> encoder;
};

// Masked-frame reconstructor: encoder followed by a d -> d reconstruction
// projection. Owns the fixed mask token.
template <typename T>
class GeneratorModel {
 public:
  GeneratorModel() = default;
  GeneratorModel(const EncoderConfig& config, std::uint64_t seed);

  const EncoderConfig& config() const { return encoder_.config(); }
  ParamStore<T>& params() { return params_; }
  const ParamStore<T>& params() const { return params_; }
  const Encoder<T>& encoder() const { return encoder_; }
  std::span<const T> mask_token() const { return mask_token_; }
  void set_mask_token(std::vector<T> token);

  // Output has the input's shape. Throws kShapeMismatch on width or length errors.
  Matrix<T> forward(const Matrix<T>& input, std::span<const std::uint8_t> valid,
                    GeneratorTape<T>* tape = nullptr) const;
  void backward(const GeneratorTape<T>& tape, const Matrix<T>& d_output);

 private:
  ParamStore<T> params_;
  Encoder<T> encoder_;
  LinearIdx recon_{};
  std::vector<T> mask_token_;
};

template <typename T>
struct SummarizerTape {
  EncoderTape<T> encoder;
  std::vector<T> logits;
};

// Value reported at PAD positions in place of a score.
template <typename T>
inline constexpr T kPadScore = T(-1);

// Frame scorer: encoder followed by p_t = sigmoid(h_t . w_sc).
template <typename T>
class SummarizerModel {
 public:
  SummarizerModel() = default;
  SummarizerModel(const EncoderConfig& config, std::uint64_t seed);

  const EncoderConfig& config() const { return encoder_.config(); }
  ParamStore<T>& params() { return params_; }
  const ParamStore<T>& params() const { return params_; }
  const Encoder<T>& encoder() const { return encoder_; }
  std::size_t score_weight_index() const { return score_; }
  std::span<const T> mask_token() const { return mask_token_; }
  void set_mask_token(std::vector<T> token);

  // Per-position scores; kPadScore at invalid positions.
  std::vector<T> forward(const Matrix<T>& input, std::span<const std::uint8_t> valid,
                         SummarizerTape<T>* tape = nullptr) const;
  Matrix<T> hidden(const Matrix<T>& input, std::span<const std::uint8_t> valid) const;
  // d_logits[t] = d(loss)/d(h_t . w_sc); zero at PAD positions.
  void backward(const SummarizerTape<T>& tape, std::span<const T> d_logits);

  // Summarizer whose encoder and positional parameters are exact copies of
  // the generator's and whose scoring weights are freshly drawn from seed.
  // Throws kConfigMismatch when `config` differs from the generator's.
  static SummarizerModel from_generator(const GeneratorModel<T>& generator, const EncoderConfig& config,
                                        std::uint64_t seed);

 private:
  ParamStore<T> params_;
  Encoder<T> encoder_;
  std::size_t score_ = 0;
  std::vector<T> mask_token_;
};

template <typename T>
T sigmoid(T x);

// Draws the fixed mask token: N(0, 1) * 0.02 from `seed`.
template <typename T>
std::vector<T> make_mask_token(std::size_t dim, std::uint64_t seed);

}  // namespace vsum
