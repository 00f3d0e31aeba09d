#include "vsum/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "vsum/error.hpp"
#include "vsum/simd/kernels.hpp"

namespace vsum {

void EncoderConfig::validate() const {
  if (layers == 0 || heads == 0 || dim == 0 || ff == 0 || max_len == 0) {
    throw Error(ErrorCode::kInvalidArgument, "encoder config fields must be positive");
  }
  if (dim % heads != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "model width " + std::to_string(dim) + " is not divisible by " + std::to_string(heads) + " heads");
  }
}

template <typename T>
T sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

template <typename T>
std::vector<T> make_mask_token(std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<T> token(dim);
  for (auto& v : token) v = static_cast<T>(0.02 * rng.normal());
  return token;
}

// ---------------------------------------------------------------------------
// ParamStore

template <typename T>
std::size_t ParamStore<T>::add(std::string name, std::vector<std::size_t> shape) {
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  params_.push_back(Param<T>{std::move(name), std::move(shape), std::vector<T>(n, T(0)), std::vector<T>(n, T(0))});
  return params_.size() - 1;
}

template <typename T>
std::size_t ParamStore<T>::find(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return i;
  }
  return params_.size();
}

template <typename T>
void ParamStore<T>::zero_grad() {
  for (auto& p : params_) std::fill(p.grad.begin(), p.grad.end(), T(0));
}

template <typename T>
std::size_t ParamStore<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

template <typename T>
std::uint64_t ParamStore<T>::hash() const {
  std::uint64_t h = 14695981039346656037ULL;
  for (const auto& p : params_) {
    h = fnv1a64(std::as_bytes(std::span<const char>(p.name.data(), p.name.size())), h);
    h = fnv1a64(std::as_bytes(std::span<const std::size_t>(p.shape)), h);
    h = fnv1a64(std::as_bytes(std::span<const T>(p.value)), h);
  }
  return h;
}

namespace {

constexpr double kLayerNormEps = 1e-5;

template <typename T>
void linear_forward(const Matrix<T>& x, const ParamStore<T>& store, const LinearIdx& idx, Matrix<T>& y) {
  const auto& w = store[idx.weight];
  const auto& b = store[idx.bias];
  const std::size_t in = x.cols();
  const std::size_t out = w.shape[0];
  y = Matrix<T>(x.rows(), out);
  const auto& k = simd::kernels<T>();
  const T* W = w.value.data();
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const T* xi = x.row(i).data();
    T* yi = y.row(i).data();
    std::size_t o = 0;
    for (; o + 4 <= out; o += 4) {
      k.dot4(xi, W + o * in, W + (o + 1) * in, W + (o + 2) * in, W + (o + 3) * in, in, yi + o);
    }
    for (; o < out; ++o) yi[o] = k.dot(xi, W + o * in, in);
    for (o = 0; o < out; ++o) yi[o] += b.value[o];
  }
}

// Accumulates weight/bias gradients and, when dx is non-null, d(loss)/dx.
template <typename T>
void linear_backward(const Matrix<T>& x, ParamStore<T>& store, const LinearIdx& idx, const Matrix<T>& dy,
                     Matrix<T>* dx) {
  auto& w = store[idx.weight];
  auto& b = store[idx.bias];
  const std::size_t in = x.cols();
  const std::size_t out = w.shape[0];
  const auto& k = simd::kernels<T>();
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const T* xi = x.row(i).data();
    T* dxi = dx ? dx->row(i).data() : nullptr;
    for (std::size_t o = 0; o < out; ++o) {
      const T g = dy(i, o);
      if (g == T(0)) continue;
      b.grad[o] += g;
      k.axpy(g, xi, w.grad.data() + o * in, in);
      if (dxi) k.axpy(g, w.value.data() + o * in, dxi, in);
    }
  }
}

template <typename T>
void layer_norm_forward(const Matrix<T>& x, const ParamStore<T>& store, const LayerNormIdx& idx, Matrix<T>& xhat,
                        std::vector<T>& inv_std, Matrix<T>& y) {
  const auto& gamma = store[idx.gamma].value;
  const auto& beta = store[idx.beta].value;
  const std::size_t n = x.cols();
  xhat = Matrix<T>(x.rows(), n);
  y = Matrix<T>(x.rows(), n);
  inv_std.assign(x.rows(), T(0));
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto r = x.row(i);
    T mean = 0;
    for (T v : r) mean += v;
    mean /= static_cast<T>(n);
    T var = 0;
    for (T v : r) var += (v - mean) * (v - mean);
    var /= static_cast<T>(n);
    const T is = T(1) / std::sqrt(var + static_cast<T>(kLayerNormEps));
    inv_std[i] = is;
    for (std::size_t c = 0; c < n; ++c) {
      xhat(i, c) = (r[c] - mean) * is;
      y(i, c) = gamma[c] * xhat(i, c) + beta[c];
    }
  }
}

template <typename T>
Matrix<T> layer_norm_backward(const Matrix<T>& xhat, const std::vector<T>& inv_std, ParamStore<T>& store,
                              const LayerNormIdx& idx, const Matrix<T>& dy) {
  auto& gamma = store[idx.gamma];
  auto& beta = store[idx.beta];
  const std::size_t n = xhat.cols();
  Matrix<T> dx(xhat.rows(), n);
  std::vector<T> dxhat(n);
  for (std::size_t i = 0; i < xhat.rows(); ++i) {
    T mean_d = 0, mean_dx = 0;
    for (std::size_t c = 0; c < n; ++c) {
      const T g = dy(i, c);
      gamma.grad[c] += g * xhat(i, c);
      beta.grad[c] += g;
      dxhat[c] = g * gamma.value[c];
      mean_d += dxhat[c];
      mean_dx += dxhat[c] * xhat(i, c);
    }
    mean_d /= static_cast<T>(n);
    mean_dx /= static_cast<T>(n);
    for (std::size_t c = 0; c < n; ++c) {
      dx(i, c) = inv_std[i] * (dxhat[c] - mean_d - xhat(i, c) * mean_dx);
    }
  }
  return dx;
}

template <typename T>
void add_inplace(Matrix<T>& a, const Matrix<T>& b) {
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) av[i] += bv[i];
}

template <typename T>
void fill_uniform(std::vector<T>& v, double bound, Rng& rng) {
  for (auto& x : v) x = static_cast<T>((2.0 * rng.uniform() - 1.0) * bound);
}

double xavier_bound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

template <typename T>
void check_input(const EncoderConfig& c, const Matrix<T>& input, std::span<const std::uint8_t> valid) {
  if (input.cols() != c.dim) {
    throw Error(ErrorCode::kShapeMismatch,
                "input width " + std::to_string(input.cols()) + " != model width " + std::to_string(c.dim));
  }
  if (input.rows() == 0 || input.rows() > c.max_len) {
    throw Error(ErrorCode::kShapeMismatch, "input length " + std::to_string(input.rows()) +
                                               " outside [1, " + std::to_string(c.max_len) + "]");
  }
  if (valid.size() != input.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "valid mask length differs from input length");
  }
}

LinearIdx add_linear(auto& store, const std::string& name, std::size_t out, std::size_t in) {
  return {store.add(name + ".weight", {out, in}), store.add(name + ".bias", {out})};
}

}  // namespace

// ---------------------------------------------------------------------------
// Encoder

template <typename T>
Encoder<T>::Encoder(const EncoderConfig& config, ParamStore<T>& store) : config_(config) {
  config_.validate();
  const std::size_t d = config_.dim;
  layout_.positional = store.add("encoder.positional", {config_.max_len, d});
  for (std::size_t l = 0; l < config_.layers; ++l) {
    const std::string p = "encoder.layers." + std::to_string(l) + ".";
    EncoderLayerIdx idx{};
    idx.q = add_linear(store, p + "attn.q", d, d);
    idx.k = add_linear(store, p + "attn.k", d, d);
    idx.v = add_linear(store, p + "attn.v", d, d);
    idx.o = add_linear(store, p + "attn.o", d, d);
    idx.ln1 = {store.add(p + "ln1.gamma", {d}), store.add(p + "ln1.beta", {d})};
    idx.ff1 = add_linear(store, p + "ff1", config_.ff, d);
    idx.ff2 = add_linear(store, p + "ff2", d, config_.ff);
    idx.ln2 = {store.add(p + "ln2.gamma", {d}), store.add(p + "ln2.beta", {d})};
    layout_.layers.push_back(idx);
  }
}

template <typename T>
void Encoder<T>::initialize(ParamStore<T>& store, Rng& rng) const {
  for (auto& v : store[layout_.positional].value) v = static_cast<T>(0.02 * rng.normal());
  auto init_linear = [&](const LinearIdx& idx) {
    auto& w = store[idx.weight];
    fill_uniform(w.value, xavier_bound(w.shape[1], w.shape[0]), rng);
    std::fill(store[idx.bias].value.begin(), store[idx.bias].value.end(), T(0));
  };
  auto init_norm = [&](const LayerNormIdx& idx) {
    std::fill(store[idx.gamma].value.begin(), store[idx.gamma].value.end(), T(1));
    std::fill(store[idx.beta].value.begin(), store[idx.beta].value.end(), T(0));
  };
  for (const auto& l : layout_.layers) {
    init_linear(l.q);
    init_linear(l.k);
    init_linear(l.v);
    init_linear(l.o);
    init_norm(l.ln1);
    init_linear(l.ff1);
    init_linear(l.ff2);
    init_norm(l.ln2);
  }
}

template <typename T>
Matrix<T> Encoder<T>::forward(const ParamStore<T>& store, const Matrix<T>& input,
                              std::span<const std::uint8_t> valid, EncoderTape<T>* tape) const {
  check_input(config_, input, valid);
  const std::size_t len = input.rows();
  const std::size_t d = config_.dim;
  const std::size_t heads = config_.heads;
  const std::size_t hd = config_.head_dim();
  const T scale = T(1) / std::sqrt(static_cast<T>(hd));
  const auto& k = simd::kernels<T>();

  Matrix<T> x = input;
  const auto& pos = store[layout_.positional].value;
  for (std::size_t i = 0; i < len; ++i) {
    auto r = x.row(i);
    for (std::size_t c = 0; c < d; ++c) r[c] += pos[i * d + c];
  }
  if (tape) {
    tape->valid.assign(valid.begin(), valid.end());
    tape->layers.clear();
  }

  std::vector<T> scores(len);
  for (const auto& idx : layout_.layers) {
    LayerTape<T> lt;
    lt.input = x;
    linear_forward(x, store, idx.q, lt.q);
    linear_forward(x, store, idx.k, lt.k);
    linear_forward(x, store, idx.v, lt.v);
    lt.attn = Matrix<T>(heads * len, len, T(0));
    lt.context = Matrix<T>(len, d, T(0));
    for (std::size_t h = 0; h < heads; ++h) {
      const std::size_t off = h * hd;
      for (std::size_t i = 0; i < len; ++i) {
        const T* qi = lt.q.row(i).data() + off;
        T max_score = -std::numeric_limits<T>::infinity();
        bool any = false;
        for (std::size_t j = 0; j < len; ++j) {
          if (!valid[j]) continue;
          scores[j] = k.dot(qi, lt.k.row(j).data() + off, hd) * scale;
          max_score = std::max(max_score, scores[j]);
          any = true;
        }
        if (!any) continue;  // no keys to attend to: weights and context stay zero
        T denom = 0;
        auto a = lt.attn.row(h * len + i);
        for (std::size_t j = 0; j < len; ++j) {
          if (!valid[j]) continue;
          a[j] = std::exp(scores[j] - max_score);
          denom += a[j];
        }
        T* ci = lt.context.row(i).data() + off;
        for (std::size_t j = 0; j < len; ++j) {
          if (!valid[j]) continue;
          a[j] /= denom;
          k.axpy(a[j], lt.v.row(j).data() + off, ci, hd);
        }
      }
    }
    Matrix<T> attn_out;
    linear_forward(lt.context, store, idx.o, attn_out);
    add_inplace(attn_out, x);
    layer_norm_forward(attn_out, store, idx.ln1, lt.xhat1, lt.inv_std1, lt.y1);

    linear_forward(lt.y1, store, idx.ff1, lt.pre_ff);
    lt.act_ff = lt.pre_ff;
    for (T& v : lt.act_ff.values()) v = std::max(v, T(0));
    Matrix<T> ff_out;
    linear_forward(lt.act_ff, store, idx.ff2, ff_out);
    add_inplace(ff_out, lt.y1);
    layer_norm_forward(ff_out, store, idx.ln2, lt.xhat2, lt.inv_std2, x);
    if (tape) tape->layers.push_back(std::move(lt));
  }
  if (tape) tape->output = x;
  return x;
}

template <typename T>
Matrix<T> Encoder<T>::backward(ParamStore<T>& store, const EncoderTape<T>& tape, const Matrix<T>& d_output) const {
  const std::size_t len = d_output.rows();
  const std::size_t d = config_.dim;
  const std::size_t heads = config_.heads;
  const std::size_t hd = config_.head_dim();
  const T scale = T(1) / std::sqrt(static_cast<T>(hd));
  const auto& valid = tape.valid;
  const auto& k = simd::kernels<T>();

  Matrix<T> dx = d_output;
  std::vector<T> d_attn(len);
  for (std::size_t li = layout_.layers.size(); li-- > 0;) {
    const auto& idx = layout_.layers[li];
    const auto& lt = tape.layers[li];

    Matrix<T> d_r2 = layer_norm_backward(lt.xhat2, lt.inv_std2, store, idx.ln2, dx);
    Matrix<T> d_y1 = d_r2;
    Matrix<T> d_act(len, config_.ff, T(0));
    linear_backward(lt.act_ff, store, idx.ff2, d_r2, &d_act);
    for (std::size_t i = 0; i < d_act.size(); ++i) {
      if (!(lt.pre_ff.values()[i] > T(0))) d_act.values()[i] = T(0);
    }
    linear_backward(lt.y1, store, idx.ff1, d_act, &d_y1);

    Matrix<T> d_r1 = layer_norm_backward(lt.xhat1, lt.inv_std1, store, idx.ln1, d_y1);
    Matrix<T> d_in = d_r1;
    Matrix<T> d_context(len, d, T(0));
    linear_backward(lt.context, store, idx.o, d_r1, &d_context);

    Matrix<T> dq(len, d, T(0)), dk(len, d, T(0)), dv(len, d, T(0));
    for (std::size_t h = 0; h < heads; ++h) {
      const std::size_t off = h * hd;
      for (std::size_t i = 0; i < len; ++i) {
        const auto a = lt.attn.row(h * len + i);
        const T* dci = d_context.row(i).data() + off;
        T weighted = 0;
        for (std::size_t j = 0; j < len; ++j) {
          if (!valid[j]) continue;
          d_attn[j] = k.dot(dci, lt.v.row(j).data() + off, hd);
          weighted += a[j] * d_attn[j];
          k.axpy(a[j], dci, dv.row(j).data() + off, hd);
        }
        T* dqi = dq.row(i).data() + off;
        const T* qi = lt.q.row(i).data() + off;
        for (std::size_t j = 0; j < len; ++j) {
          if (!valid[j]) continue;
          const T ds = a[j] * (d_attn[j] - weighted) * scale;
          if (ds == T(0)) continue;
          k.axpy(ds, lt.k.row(j).data() + off, dqi, hd);
          k.axpy(ds, qi, dk.row(j).data() + off, hd);
        }
      }
    }
    linear_backward(lt.input, store, idx.q, dq, &d_in);
    linear_backward(lt.input, store, idx.k, dk, &d_in);
    linear_backward(lt.input, store, idx.v, dv, &d_in);
    dx = std::move(d_in);
  }

  auto& pos = store[layout_.positional].grad;
  for (std::size_t i = 0; i < len; ++i) {
    const auto r = dx.row(i);
    for (std::size_t c = 0; c < d; ++c) pos[i * d + c] += r[c];
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Generator

template <typename T>
GeneratorModel<T>::GeneratorModel(const EncoderConfig& config, std::uint64_t seed)
    : encoder_(config, params_) {
  recon_ = add_linear(params_, "recon", config.dim, config.dim);
  Rng rng(derive_seed(seed, "init.generator"));
  encoder_.initialize(params_, rng);
  fill_uniform(params_[recon_.weight].value, xavier_bound(config.dim, config.dim), rng);
  mask_token_ = make_mask_token<T>(config.dim, derive_seed(seed, "mask_token"));
}

template <typename T>
void GeneratorModel<T>::set_mask_token(std::vector<T> token) {
  if (token.size() != config().dim) throw Error(ErrorCode::kShapeMismatch, "mask token width mismatch");
  mask_token_ = std::move(token);
}

template <typename T>
Matrix<T> GeneratorModel<T>::forward(const Matrix<T>& input, std::span<const std::uint8_t> valid,
                                     GeneratorTape<T>* tape) const {
  Matrix<T> hidden = encoder_.forward(params_, input, valid, tape ? &tape->encoder : nullptr);
  Matrix<T> out;
  linear_forward(hidden, params_, recon_, out);
  return out;
}

template <typename T>
void GeneratorModel<T>::backward(const GeneratorTape<T>& tape, const Matrix<T>& d_output) {
  Matrix<T> d_hidden(d_output.rows(), d_output.cols(), T(0));
  linear_backward(tape.encoder.output, params_, recon_, d_output, &d_hidden);
  encoder_.backward(params_, tape.encoder, d_hidden);
}

// ---------------------------------------------------------------------------
// Summarizer

template <typename T>
SummarizerModel<T>::SummarizerModel(const EncoderConfig& config, std::uint64_t seed)
    : encoder_(config, params_) {
  score_ = params_.add("score.weight", {config.dim});
  Rng rng(derive_seed(seed, "init.summarizer"));
  encoder_.initialize(params_, rng);
  Rng head_rng(derive_seed(seed, "init.score_head"));
  fill_uniform(params_[score_].value, xavier_bound(config.dim, 1), head_rng);
  mask_token_ = make_mask_token<T>(config.dim, derive_seed(seed, "mask_token"));
}

template <typename T>
void SummarizerModel<T>::set_mask_token(std::vector<T> token) {
  if (token.size() != config().dim) throw Error(ErrorCode::kShapeMismatch, "mask token width mismatch");
  mask_token_ = std::move(token);
}

template <typename T>
SummarizerModel<T> SummarizerModel<T>::from_generator(const GeneratorModel<T>& generator,
                                                      const EncoderConfig& config, std::uint64_t seed) {
  if (!(config == generator.config())) {
    throw Error(ErrorCode::kConfigMismatch, "summarizer config differs from the generator's");
  }
  SummarizerModel s(config, seed);
  for (auto& p : s.params_) {
    const std::size_t g = generator.params().find(p.name);
    if (g == generator.params().size()) continue;  // scoring head stays freshly initialized
    p.value = generator.params()[g].value;
  }
  s.mask_token_ = std::vector<T>(generator.mask_token().begin(), generator.mask_token().end());
  return s;
}

template <typename T>
Matrix<T> SummarizerModel<T>::hidden(const Matrix<T>& input, std::span<const std::uint8_t> valid) const {
  return encoder_.forward(params_, input, valid, nullptr);
}

template <typename T>
std::vector<T> SummarizerModel<T>::forward(const Matrix<T>& input, std::span<const std::uint8_t> valid,
                                           SummarizerTape<T>* tape) const {
  Matrix<T> h = encoder_.forward(params_, input, valid, tape ? &tape->encoder : nullptr);
  const auto& w = params_[score_].value;
  const auto& k = simd::kernels<T>();
  const T lo = std::numeric_limits<T>::epsilon();
  const T hi = T(1) - std::numeric_limits<T>::epsilon();
  std::vector<T> scores(input.rows(), kPadScore<T>);
  std::vector<T> logits(input.rows(), T(0));
  for (std::size_t t = 0; t < input.rows(); ++t) {
    if (!valid[t]) continue;
    logits[t] = k.dot(h.row(t).data(), w.data(), w.size());
    scores[t] = std::clamp(sigmoid(logits[t]), lo, hi);
  }
  if (tape) tape->logits = std::move(logits);
  return scores;
}

template <typename T>
void SummarizerModel<T>::backward(const SummarizerTape<T>& tape, std::span<const T> d_logits) {
  const Matrix<T>& h = tape.encoder.output;
  auto& w = params_[score_];
  const auto& k = simd::kernels<T>();
  Matrix<T> d_hidden(h.rows(), h.cols(), T(0));
  for (std::size_t t = 0; t < h.rows(); ++t) {
    const T g = d_logits[t];
    if (g == T(0) || !tape.encoder.valid[t]) continue;
    k.axpy(g, h.row(t).data(), w.grad.data(), w.grad.size());
    k.axpy(g, w.value.data(), d_hidden.row(t).data(), h.cols());
  }
  encoder_.backward(params_, tape.encoder, d_hidden);
}

#define VSUM_INSTANTIATE(T)                                             \
  template T sigmoid<T>(T);                                             \
  template std::vector<T> make_mask_token<T>(std::size_t, std::uint64_t); \
  template class ParamStore<T>;                                         \
  template class Encoder<T>;                                            \
  template class GeneratorModel<T>;                                     \
  template class SummarizerModel<T>;

VSUM_INSTANTIATE(float)
VSUM_INSTANTIATE(double)
#undef VSUM_INSTANTIATE

}  // namespace vsum
