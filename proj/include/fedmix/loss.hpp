#pragma once

#include <cstdint>
#include <vector>

#include "fedmix/augment.hpp"
#include "fedmix/matrix.hpp"
#include "fedmix/nn.hpp"

namespace fedmix {

// Probabilities are clamped at this floor inside every log().
inline constexpr double kProbFloor = 1e-12;

struct LossWeights {
  double lambda_s = 1.0;    // supervised CE
  double lambda_1 = 1.0;    // pseudo-label CE
  double lambda_2 = 1.0;    // consistency
  double lambda_l1 = 0.01;  // proximal pull toward the server model

  void validate() const;
};

struct PseudoLabelConfig {
  double tau = 0.80;      // confidence threshold
  int augment_count = 5;  // views averaged per sample

  void validate() const;
};

// Output of one pseudo-labeling sweep over a batch of unlabeled rows.
// accepted_* are aligned with each other; accepted_rows/predicted_class/
// confidence are aligned with the source batch for diagnostics.
struct PseudoLabelBatch {
  Matrix accepted_inputs;            // clean (unaugmented) rows that passed tau
  Matrix one_hot_labels;             // hard labels for those rows
  std::vector<std::uint8_t> accepted_mask;  // per source row
  std::vector<int> accepted_rows;    // source row index per accepted row
  std::vector<int> predicted_class;  // per source row, thresholded or not
  std::vector<double> confidence;    // per source row, view-averaged max prob
  double acceptance_rate = 0.0;

  int accepted_count() const { return accepted_inputs.rows(); }
};

// Scalar loss plus its parameter gradient (same layout as the model).
struct LossResult {
  double value = 0.0;
  ModelParams gradient;
};

// lambda_s * mean cross-entropy against the batch's one-hot targets.
LossResult supervised_loss(const ModelParams& model, const Batch& batch,
                           const LossWeights& weights);

// Averages class probabilities over augment_count stochastic views,
// re-normalizes, and keeps rows whose top probability reaches tau. Labels are
// hard argmax (ties to the lowest class) and act as constants downstream.
PseudoLabelBatch make_pseudo_labels(const ModelParams& model, const Matrix& unlabeled,
                                    const AugmentFamily& family, const PseudoLabelConfig& cfg,
                                    std::uint64_t seed);

// lambda_1 * mean CE over the accepted rows; exactly zero with no gradient
// when nothing was accepted.
LossResult pseudo_label_ce(const ModelParams& model, const PseudoLabelBatch& pl,
                           double lambda_1);

// lambda_2 * mean squared distance between the prediction vectors of two
// stochastic views. Gradient flows through both views.
LossResult consistency_l2(const ModelParams& model, const Matrix& unlabeled,
                          const AugmentSpec& view1, const AugmentSpec& view2, double lambda_2,
                          std::uint64_t seed);
LossResult consistency_l2_views(const ModelParams& model, const Matrix& v1, const Matrix& v2,
                                double lambda_2);

// lambda_2 * mean KL(f(u) || f(aug(u))), probabilities floored inside logs.
LossResult consistency_kl(const ModelParams& model, const Matrix& unlabeled,
                          const AugmentSpec& view, double lambda_2, std::uint64_t seed);
LossResult consistency_kl_views(const ModelParams& model, const Matrix& clean,
                                const Matrix& augmented, double lambda_2);

// lambda_l1 * ||psi - sigma||^2; gradient 2 * lambda_l1 * (psi - sigma).
LossResult proximal_term(const ModelParams& psi, const ModelParams& sigma, double lambda_l1);

enum class ConsistencyKind { l2, kl };

struct UnsupLossOptions {
  LossWeights weights;
  ConsistencyKind consistency = ConsistencyKind::l2;
  AugmentSpec view1;  // first stochastic view (also the KL perturbation)
  AugmentSpec view2;  // second view, L2 only
};

struct LossBreakdown {
  double pseudo_ce = 0.0;
  double consistency = 0.0;
  double proximal = 0.0;
  double total = 0.0;
};

// Client objective: pseudo-label CE + consistency + proximal term, summed
// with their weights. The pseudo labels are taken as given so one labeling
// sweep can serve a whole epoch.
LossResult unsupervised_loss(const ModelParams& psi, const Matrix& unlabeled,
                             const PseudoLabelBatch& pl, const ModelParams& sigma,
                             const UnsupLossOptions& opts, std::uint64_t seed,
                             LossBreakdown* breakdown = nullptr);

}  // namespace fedmix
