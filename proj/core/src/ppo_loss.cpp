#include <algorithm>
#include <cmath>

#include "falcon/errors.hpp"
#include "falcon/trainer.hpp"

namespace falcon {

double clipped_surrogate(double ratio, double advantage, double epsilon) {
  return std::min(ratio * advantage, std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon) * advantage);
}

double pessimistic_cost_surrogate(double ratio, double advantage, double epsilon) {
  return std::max(ratio * advantage, std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon) * advantage);
}

LossReport ppo_losses(const PolicyNet& net, const PolicyParams& params, std::span<const PreparedEpisode* const> batch,
                      const Multipliers& multipliers, const TrainConfig& config, double value_scale,
                      Eigen::VectorXd* grad) {
  LossReport report;
  if (batch.empty()) return report;

  std::vector<const Trajectory*> trajs;
  trajs.reserve(batch.size());
  for (const auto* ep : batch) trajs.push_back(ep->trajectory);
  const SequenceBatch seq = SequenceBatch::from_trajectories(trajs);
  const int B = seq.episodes;
  const int N = seq.columns();

  SequenceOutputs out;
  SequenceTape tape;
  net.forward_sequences(params, seq, out, grad ? &tape : nullptr);

  double w_u = multipliers.lambda_u;
  double w_l = multipliers.lambda_l;
  if (config.normalize_penalty) {
    const double denom = 1.0 + w_u + w_l;
    w_u /= denom;
    w_l /= denom;
  }
  const double eps = config.clip_epsilon;
  const double inv_n = 1.0 / N;
  const double inv_scale = 1.0 / value_scale;

  OutputGrads g;
  if (grad) g = OutputGrads::zeros(N);

  double sum_r = 0, sum_u = 0, sum_l = 0, sum_vr = 0, sum_vc = 0, sum_h = 0, sum_kl = 0;
  int clipped = 0;
  for (int t = 0; t < seq.steps; ++t) {
    for (int b = 0; b < B; ++b) {
      const int col = t * B + b;
      const PreparedEpisode& ep = *batch[b];
      const Trajectory& tr = *ep.trajectory;
      const int a = static_cast<int>(tr.actions[t]);

      const auto lp = log_softmax(out.logits(0, col), out.logits(1, col));
      const double p0 = std::exp(lp[0]);
      const double p1 = std::exp(lp[1]);
      const double entropy = -(p0 * lp[0] + p1 * lp[1]);
      const double logp = lp[a];
      const double ratio = std::exp(logp - tr.log_prob_old[t]);
      const double rc = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
      if (std::abs(ratio - 1.0) > eps) ++clipped;

      const double ar = ep.adv_reward[t];
      const double ac = ep.adv_cost[t];
      const bool r_unclipped = ratio * ar <= rc * ar;
      const bool u_unclipped = ratio * ac >= rc * ac;
      const bool l_unclipped = ratio * ac <= rc * ac;
      sum_r += clipped_surrogate(ratio, ar, eps);
      sum_u += pessimistic_cost_surrogate(ratio, ac, eps);
      sum_l += clipped_surrogate(ratio, ac, eps);

      const double vr = out.reward_value(col);
      const double vc = out.cost_value(col);
      const double er = vr - ep.ret_reward[t] * inv_scale;
      const double ec = vc - ep.ret_cost[t] * inv_scale;
      sum_vr += er * er;
      sum_vc += ec * ec;
      sum_h += entropy;
      sum_kl += tr.log_prob_old[t] - logp;

      if (!grad) continue;
      const double d_ratio = (-(r_unclipped ? ar : 0.0) + w_u * (u_unclipped ? ac : 0.0) -
                              w_l * (l_unclipped ? ac : 0.0)) * inv_n;
      const double d_logp = d_ratio * ratio;
      const double p[2] = {p0, p1};
      for (int j = 0; j < 2; ++j) {
        const double dlogp_dj = (j == a ? 1.0 : 0.0) - p[j];
        const double dh_dj = -p[j] * (lp[j] + entropy);
        g.logits(j, col) = d_logp * dlogp_dj - config.entropy_coef * dh_dj * inv_n;
      }
      g.reward_value(col) = config.value_weight * 2.0 * er * inv_n;
      g.cost_value(col) = config.value_weight * 2.0 * ec * inv_n;
    }
  }

  report.policy_loss = -sum_r * inv_n;
  report.cost_upper = sum_u * inv_n;
  report.cost_lower = sum_l * inv_n;
  report.value_loss_reward = sum_vr * inv_n;
  report.value_loss_cost = sum_vc * inv_n;
  report.entropy = sum_h * inv_n;
  report.approx_kl = sum_kl * inv_n;
  report.clip_fraction = static_cast<double>(clipped) * inv_n;
  report.total = report.policy_loss + w_u * report.cost_upper - w_l * report.cost_lower +
                 config.value_weight * (report.value_loss_reward + report.value_loss_cost) -
                 config.entropy_coef * report.entropy;
  if (!std::isfinite(report.total)) throw NumericError("non-finite PPO loss");

  if (grad) net.backward_sequences(params, seq, tape, g, *grad);
  return report;
}

}  // namespace falcon
