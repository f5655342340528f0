#include "fedmix/loss.hpp"

#include <cmath>
#include <string>

#include "fedmix/errors.hpp"
#include "fedmix/rng.hpp"

namespace fedmix {

void LossWeights::validate() const {
  if (lambda_s < 0.0 || lambda_1 < 0.0 || lambda_2 < 0.0 || lambda_l1 < 0.0) {
    throw ConfigError("loss weights must be >= 0");
  }
}

void PseudoLabelConfig::validate() const {
  if (!(tau > 0.0) || tau > 1.0) throw ConfigError("pseudo_label: tau must be in (0, 1]");
  if (augment_count < 1) throw ConfigError("pseudo_label: augment_count must be >= 1");
}

LossResult supervised_loss(const ModelParams& model, const Batch& batch,
                           const LossWeights& weights) {
  batch.validate();
  if (!batch.targets.has_value()) throw ContractError("supervised_loss: batch has no targets");
  const Matrix& y = *batch.targets;
  if (y.cols() != model.output_dim()) {
    throw ShapeError("supervised_loss: target width does not match model output");
  }

  const ForwardCache cache = forward_cached(model, batch.inputs);
  const Matrix& p = output_probs(cache);
  const int B = p.rows();
  const double scale = weights.lambda_s / static_cast<double>(B);

  double value = 0.0;
  Matrix dprobs(p.rows(), p.cols());
  for (int r = 0; r < B; ++r) {
    const double* pr = p.row(r);
    const double* yr = y.row(r);
    double* dr = dprobs.row(r);
    for (int c = 0; c < p.cols(); ++c) {
      if (yr[c] == 0.0) continue;
      if (pr[c] > kProbFloor) {
        value -= yr[c] * std::log(pr[c]);
        dr[c] = -scale * yr[c] / pr[c];
      } else {
        value -= yr[c] * std::log(kProbFloor);  // clamp active: flat in p
      }
    }
  }
  LossResult out;
  out.value = scale * value;
  out.gradient = backward_from_probs(model, cache, dprobs);
  if (!std::isfinite(out.value)) throw NumericalError("supervised_loss: non-finite value");
  return out;
}

PseudoLabelBatch make_pseudo_labels(const ModelParams& model, const Matrix& unlabeled,
                                    const AugmentFamily& family, const PseudoLabelConfig& cfg,
                                    std::uint64_t seed) {
  cfg.validate();
  if (unlabeled.rows() == 0) throw ContractError("make_pseudo_labels: empty batch");

  const std::vector<Matrix> views =
      augmentation_set(family, unlabeled, cfg.augment_count, derive_seed(seed, stream_tag("pl")));
  const int C = model.output_dim();
  Matrix score(unlabeled.rows(), C);
  for (const Matrix& v : views) {
    const Matrix p = forward(model, v);
    for (std::size_t i = 0; i < score.data().size(); ++i) score.data()[i] += p.data()[i];
  }

  PseudoLabelBatch out;
  out.accepted_mask.assign(static_cast<std::size_t>(unlabeled.rows()), 0);
  out.predicted_class.resize(static_cast<std::size_t>(unlabeled.rows()));
  out.confidence.resize(static_cast<std::size_t>(unlabeled.rows()));
  std::vector<int> keep;
  for (int r = 0; r < unlabeled.rows(); ++r) {
    double* s = score.row(r);
    double sum = 0.0;
    for (int c = 0; c < C; ++c) sum += s[c];
    const int cls = argmax_row(s, C);
    const double conf = s[cls] / sum;
    out.predicted_class[static_cast<std::size_t>(r)] = cls;
    out.confidence[static_cast<std::size_t>(r)] = conf;
    if (conf >= cfg.tau) {
      out.accepted_mask[static_cast<std::size_t>(r)] = 1;
      keep.push_back(r);
    }
  }
  out.accepted_rows = keep;
  out.accepted_inputs = unlabeled.take_rows(keep);
  out.one_hot_labels = Matrix(static_cast<int>(keep.size()), C);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.one_hot_labels(static_cast<int>(i), out.predicted_class[static_cast<std::size_t>(keep[i])]) = 1.0;
  }
  out.acceptance_rate = unlabeled.rows() == 0
                            ? 0.0
                            : static_cast<double>(keep.size()) / static_cast<double>(unlabeled.rows());
  return out;
}

LossResult pseudo_label_ce(const ModelParams& model, const PseudoLabelBatch& pl,
                           double lambda_1) {
  LossResult out;
  out.gradient = zeros_like(model);
  if (pl.accepted_count() == 0 || lambda_1 == 0.0) return out;

  Batch b;
  b.inputs = pl.accepted_inputs;
  b.targets = pl.one_hot_labels;
  LossWeights w;
  w.lambda_s = lambda_1;  // reuse the CE kernel, weighted by lambda_1
  LossResult ce = supervised_loss(model, b, w);
  return ce;
}

LossResult consistency_l2_views(const ModelParams& model, const Matrix& v1, const Matrix& v2,
                                double lambda_2) {
  if (!v1.same_shape(v2)) throw ShapeError("consistency_l2: view shapes differ");
  if (v1.rows() == 0) throw ContractError("consistency_l2: empty batch");

  const ForwardCache c1 = forward_cached(model, v1);
  const ForwardCache c2 = forward_cached(model, v2);
  const Matrix& p1 = output_probs(c1);
  const Matrix& p2 = output_probs(c2);
  const double scale = lambda_2 / static_cast<double>(v1.rows());

  double value = 0.0;
  Matrix d1(p1.rows(), p1.cols());
  Matrix d2(p1.rows(), p1.cols());
  for (std::size_t i = 0; i < p1.data().size(); ++i) {
    const double diff = p1.data()[i] - p2.data()[i];
    value += diff * diff;
    d1.data()[i] = 2.0 * scale * diff;
    d2.data()[i] = -2.0 * scale * diff;
  }
  LossResult out;
  out.value = scale * value;
  out.gradient = backward_from_probs(model, c1, d1);
  axpy(out.gradient, 1.0, backward_from_probs(model, c2, d2));
  return out;
}

LossResult consistency_l2(const ModelParams& model, const Matrix& unlabeled,
                          const AugmentSpec& view1, const AugmentSpec& view2, double lambda_2,
                          std::uint64_t seed) {
  const Matrix v1 = apply_augment(view1, unlabeled, derive_seed(seed, stream_tag("cons"), 1));
  const Matrix v2 = apply_augment(view2, unlabeled, derive_seed(seed, stream_tag("cons"), 2));
  return consistency_l2_views(model, v1, v2, lambda_2);
}

LossResult consistency_kl_views(const ModelParams& model, const Matrix& clean,
                                const Matrix& augmented, double lambda_2) {
  if (!clean.same_shape(augmented)) throw ShapeError("consistency_kl: view shapes differ");
  if (clean.rows() == 0) throw ContractError("consistency_kl: empty batch");

  const ForwardCache cp = forward_cached(model, clean);
  const ForwardCache cq = forward_cached(model, augmented);
  const Matrix& p = output_probs(cp);
  const Matrix& q = output_probs(cq);
  const double scale = lambda_2 / static_cast<double>(clean.rows());

  double value = 0.0;
  Matrix dp(p.rows(), p.cols());
  Matrix dq(p.rows(), p.cols());
  for (std::size_t i = 0; i < p.data().size(); ++i) {
    const double pv = p.data()[i];
    const double qv = q.data()[i];
    const double lp = std::log(std::max(pv, kProbFloor));
    const double lq = std::log(std::max(qv, kProbFloor));
    value += pv * (lp - lq);
    dp.data()[i] = scale * ((lp - lq) + (pv > kProbFloor ? 1.0 : 0.0));
    dq.data()[i] = qv > kProbFloor ? -scale * pv / qv : 0.0;
  }
  LossResult out;
  out.value = scale * value;
  out.gradient = backward_from_probs(model, cp, dp);
  axpy(out.gradient, 1.0, backward_from_probs(model, cq, dq));
  return out;
}

LossResult consistency_kl(const ModelParams& model, const Matrix& unlabeled,
                          const AugmentSpec& view, double lambda_2, std::uint64_t seed) {
  const Matrix aug = apply_augment(view, unlabeled, derive_seed(seed, stream_tag("cons"), 1));
  return consistency_kl_views(model, unlabeled, aug, lambda_2);
}

LossResult proximal_term(const ModelParams& psi, const ModelParams& sigma, double lambda_l1) {
  require_same_layout(psi, sigma, "proximal_term");
  LossResult out;
  out.value = lambda_l1 * squared_distance(psi, sigma);
  out.gradient = zeros_like(psi);
  for (std::size_t i = 0; i < psi.values.size(); ++i) {
    out.gradient.values[i] = 2.0 * lambda_l1 * (psi.values[i] - sigma.values[i]);
  }
  return out;
}

LossResult unsupervised_loss(const ModelParams& psi, const Matrix& unlabeled,
                             const PseudoLabelBatch& pl, const ModelParams& sigma,
                             const UnsupLossOptions& opts, std::uint64_t seed,
                             LossBreakdown* breakdown) {
  opts.weights.validate();
  LossResult out;
  out.gradient = zeros_like(psi);
  LossBreakdown bd;

  {
    LossResult r = pseudo_label_ce(psi, pl, opts.weights.lambda_1);
    bd.pseudo_ce = r.value;
    axpy(out.gradient, 1.0, r.gradient);
  }
  if (opts.weights.lambda_2 > 0.0) {
    LossResult r = opts.consistency == ConsistencyKind::l2
                       ? consistency_l2(psi, unlabeled, opts.view1, opts.view2,
                                        opts.weights.lambda_2, seed)
                       : consistency_kl(psi, unlabeled, opts.view1, opts.weights.lambda_2, seed);
    bd.consistency = r.value;
    axpy(out.gradient, 1.0, r.gradient);
  }
  {
    LossResult r = proximal_term(psi, sigma, opts.weights.lambda_l1);
    bd.proximal = r.value;
    axpy(out.gradient, 1.0, r.gradient);
  }

  bd.total = bd.pseudo_ce + bd.consistency + bd.proximal;
  out.value = bd.total;
  if (breakdown != nullptr) *breakdown = bd;
  if (!std::isfinite(out.value)) throw NumericalError("unsupervised_loss: non-finite value");
  return out;
}

}  // namespace fedmix
