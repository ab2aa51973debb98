//! Linear actor-critic that learns the segment angle from visibility-map
//! features.
//!
//! The feature extractor summarizes a map as per-sector visibility ratios
//! around the target; the actor is a softmax over discrete angle bins and
//! the critic a scalar head on the same features. Training samples an angle,
//! scores the resulting segment on the map (normalized reward equals segment
//! accuracy), and descends
//! `L = -E[A log pi(a)] + MSE(V, r) - lambda H` with the advantage
//! `A = r - V` detached in the actor term. Each altitude level of a stack is
//! treated as an independent training sample.

use crate::error::{Error, Result};
use crate::segment::{segment_accuracy, segment_from_angle, FlightSegment, SegmentConfig};
use crate::visibility::VisibilityMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

/// Per-sector visibility ratios, one block of `k_sectors` values per map in
/// the stack the vector was extracted from. Every entry lies in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

/// Angular-sector visibility ratios for each map of the stack.
///
/// Sector `k` is centered on angle `2 pi k / k_sectors`; a cell belongs to
/// the sector whose center is nearest to its bearing from the target. The
/// ratio is the visible fraction of the cells in that sector.
pub fn extract_features(stack: &[VisibilityMap], k_sectors: usize) -> Result<FeatureVector> {
    if stack.is_empty() {
        return Err(Error::InvalidArgument("feature extraction needs a nonempty stack".into()));
    }
    if k_sectors == 0 {
        return Err(Error::InvalidArgument("k_sectors must be positive".into()));
    }
    let sector_width = TAU / k_sectors as f64;
    let mut values = Vec::with_capacity(stack.len() * k_sectors);
    for map in stack {
        let mut visible = vec![0u32; k_sectors];
        let mut total = vec![0u32; k_sectors];
        let res = map.resolution;
        for row in 0..res {
            for col in 0..res {
                let (x, y) = map.cell_center(col, row);
                let angle = (y - map.center_y).atan2(x - map.center_x).rem_euclid(TAU);
                let sector = ((angle / sector_width).round() as usize) % k_sectors;
                total[sector] += 1;
                visible[sector] += map.value(col, row) as u32;
            }
        }
        for s in 0..k_sectors {
            values.push(if total[s] > 0 { visible[s] as f64 / total[s] as f64 } else { 0.0 });
        }
    }
    Ok(FeatureVector { values })
}

/// Linear softmax actor over discrete angle bins plus a scalar critic.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyModel {
    k_actions: usize,
    feature_dim: usize,
    /// Row-major, k_actions x feature_dim.
    actor_w: Vec<f64>,
    actor_b: Vec<f64>,
    critic_w: Vec<f64>,
    critic_b: f64,
}

impl PolicyModel {
    /// Zero-initialized model: uniform policy, critic value 0.
    pub fn zeros(k_actions: usize, feature_dim: usize) -> Result<Self> {
        if k_actions < 4 {
            return Err(Error::InvalidArgument(format!("need at least 4 actions, got {k_actions}")));
        }
        if feature_dim == 0 {
            return Err(Error::InvalidArgument("feature_dim must be positive".into()));
        }
        Ok(Self {
            k_actions,
            feature_dim,
            actor_w: vec![0.0; k_actions * feature_dim],
            actor_b: vec![0.0; k_actions],
            critic_w: vec![0.0; feature_dim],
            critic_b: 0.0,
        })
    }

    pub fn k_actions(&self) -> usize {
        self.k_actions
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    /// Angle at the center of action bin `k`.
    pub fn action_angle(&self, action: usize) -> f64 {
        TAU * action as f64 / self.k_actions as f64
    }

    /// Bin whose center is nearest to `alpha`.
    pub fn angle_bin(&self, alpha: f64) -> usize {
        let width = TAU / self.k_actions as f64;
        ((alpha.rem_euclid(TAU) / width).round() as usize) % self.k_actions
    }

    /// All parameters as one flat vector (actor rows, actor bias, critic
    /// weights, critic bias).
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = self.actor_w.clone();
        out.extend_from_slice(&self.actor_b);
        out.extend_from_slice(&self.critic_w);
        out.push(self.critic_b);
        out
    }

    /// Inverse of [`flatten`](Self::flatten).
    pub fn assign_flat(&mut self, params: &[f64]) -> Result<()> {
        let expected = self.actor_w.len() + self.actor_b.len() + self.critic_w.len() + 1;
        if params.len() != expected {
            return Err(Error::Mismatch(format!("expected {expected} parameters, got {}", params.len())));
        }
        let (aw, rest) = params.split_at(self.actor_w.len());
        let (ab, rest) = rest.split_at(self.actor_b.len());
        let (cw, cb) = rest.split_at(self.critic_w.len());
        self.actor_w.copy_from_slice(aw);
        self.actor_b.copy_from_slice(ab);
        self.critic_w.copy_from_slice(cw);
        self.critic_b = cb[0];
        Ok(())
    }

    fn check_features(&self, f: &FeatureVector) -> Result<()> {
        if f.values.len() != self.feature_dim {
            return Err(Error::Mismatch(format!(
                "model expects {} features, got {}",
                self.feature_dim,
                f.values.len()
            )));
        }
        Ok(())
    }
}

/// Action distribution, per-action log probabilities, and critic value.
#[derive(Debug, Clone)]
pub struct PolicyOutput {
    pub probs: Vec<f64>,
    pub log_probs: Vec<f64>,
    pub value: f64,
}

impl PolicyOutput {
    pub fn entropy(&self) -> f64 {
        -self.probs.iter().zip(&self.log_probs).map(|(p, lp)| p * lp).sum::<f64>()
    }

    /// Deterministic argmax action, ties to the smallest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        best
    }
}

/// Softmax policy and critic value for one feature vector.
pub fn policy_forward(model: &PolicyModel, features: &FeatureVector) -> Result<PolicyOutput> {
    model.check_features(features)?;
    let k = model.k_actions;
    let d = model.feature_dim;
    let mut logits = vec![0.0f64; k];
    for (j, logit) in logits.iter_mut().enumerate() {
        let row = &model.actor_w[j * d..(j + 1) * d];
        *logit = model.actor_b[j] + row.iter().zip(&features.values).map(|(w, f)| w * f).sum::<f64>();
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    let log_sum = sum.ln();
    let probs: Vec<f64> = exps.iter().map(|e| e / sum).collect();
    let log_probs: Vec<f64> = logits.iter().map(|z| z - max - log_sum).collect();
    let value =
        model.critic_b + model.critic_w.iter().zip(&features.values).map(|(w, f)| w * f).sum::<f64>();
    Ok(PolicyOutput { probs, log_probs, value })
}

/// One training sample: features, the sampled action, and its normalized
/// reward (segment accuracy, in [0, 1]).
#[derive(Debug, Clone)]
pub struct TrainSample {
    pub features: FeatureVector,
    pub action: usize,
    pub reward: f64,
}

/// Learning configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Entropy bonus weight (lambda).
    pub entropy_weight: f64,
    pub batch_size: usize,
    pub episodes: usize,
    pub seed: u64,
    /// Feature sectors per altitude level.
    pub k_sectors: usize,
    /// Discrete angle bins.
    pub k_actions: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            entropy_weight: 0.01,
            batch_size: 6,
            episodes: 100,
            seed: 0,
            k_sectors: 16,
            k_actions: 72,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidArgument("learning_rate must be positive".into()));
        }
        if self.entropy_weight < 0.0 {
            return Err(Error::InvalidArgument("entropy_weight must be >= 0".into()));
        }
        if self.batch_size == 0 || self.episodes == 0 {
            return Err(Error::InvalidArgument("batch_size and episodes must be positive".into()));
        }
        Ok(())
    }
}

/// Loss values for one batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats {
    pub actor_loss: f64,
    pub critic_loss: f64,
    pub entropy: f64,
}

/// Parameter gradients in the same layout as [`PolicyModel::flatten`].
#[derive(Debug, Clone)]
pub struct Gradients {
    pub actor_w: Vec<f64>,
    pub actor_b: Vec<f64>,
    pub critic_w: Vec<f64>,
    pub critic_b: f64,
}

/// Detached advantages `r - V` for a batch under the current critic, the
/// constants entering the actor term of the loss.
pub fn batch_advantages(model: &PolicyModel, batch: &[TrainSample]) -> Result<Vec<f64>> {
    batch
        .iter()
        .map(|s| {
            if !s.reward.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite reward {}", s.reward)));
            }
            Ok(s.reward - policy_forward(model, &s.features)?.value)
        })
        .collect()
}

/// Batch loss with the advantages held fixed, exactly the objective whose
/// gradient [`loss_gradients`] computes. Used by the finite-difference
/// checks.
pub fn loss_with_fixed_advantages(
    model: &PolicyModel,
    batch: &[TrainSample],
    advantages: &[f64],
    entropy_weight: f64,
) -> Result<f64> {
    let inv = 1.0 / batch.len() as f64;
    let mut actor = 0.0;
    let mut critic = 0.0;
    let mut entropy = 0.0;
    for (s, &adv) in batch.iter().zip(advantages) {
        let out = policy_forward(model, &s.features)?;
        actor -= adv * out.log_probs[s.action];
        let err = out.value - s.reward;
        critic += err * err;
        entropy += out.entropy();
    }
    Ok(inv * actor + inv * critic - entropy_weight * inv * entropy)
}

/// Analytic gradients of the batch loss
/// `-mean(A log pi(a)) + mean((V - r)^2) - lambda mean(H)` with `A = r - V`
/// detached in the actor term.
pub fn loss_gradients(
    model: &PolicyModel,
    batch: &[TrainSample],
    entropy_weight: f64,
) -> Result<(Gradients, StepStats)> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty training batch".into()));
    }
    let k = model.k_actions;
    let d = model.feature_dim;
    let inv = 1.0 / batch.len() as f64;
    let mut grads = Gradients {
        actor_w: vec![0.0; k * d],
        actor_b: vec![0.0; k],
        critic_w: vec![0.0; d],
        critic_b: 0.0,
    };
    let mut stats = StepStats { actor_loss: 0.0, critic_loss: 0.0, entropy: 0.0 };

    for s in batch {
        if !s.reward.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite reward {}", s.reward)));
        }
        if s.action >= k {
            return Err(Error::Mismatch(format!("action {} out of range for {k} bins", s.action)));
        }
        let out = policy_forward(model, &s.features)?;
        let adv = s.reward - out.value;
        let h = out.entropy();
        stats.actor_loss -= inv * adv * out.log_probs[s.action];
        let err = out.value - s.reward;
        stats.critic_loss += inv * err * err;
        stats.entropy += inv * h;

        for j in 0..k {
            let onehot = if j == s.action { 1.0 } else { 0.0 };
            // Actor term plus entropy bonus, both through the logits.
            let gz = inv
                * (-adv * (onehot - out.probs[j])
                    + entropy_weight * out.probs[j] * (out.log_probs[j] + h));
            grads.actor_b[j] += gz;
            for (i, f) in s.features.values.iter().enumerate() {
                grads.actor_w[j * d + i] += gz * f;
            }
        }
        let gv = inv * 2.0 * err;
        grads.critic_b += gv;
        for (i, f) in s.features.values.iter().enumerate() {
            grads.critic_w[i] += gv * f;
        }
    }
    Ok((grads, stats))
}

/// One gradient-descent step on the batch. Returns the pre-update losses.
pub fn train_step(
    model: &mut PolicyModel,
    batch: &[TrainSample],
    config: &TrainConfig,
) -> Result<StepStats> {
    config.validate()?;
    let (grads, stats) = loss_gradients(model, batch, config.entropy_weight)?;
    let lr = config.learning_rate;
    for (w, g) in model.actor_w.iter_mut().zip(&grads.actor_w) {
        *w -= lr * g;
    }
    for (b, g) in model.actor_b.iter_mut().zip(&grads.actor_b) {
        *b -= lr * g;
    }
    for (w, g) in model.critic_w.iter_mut().zip(&grads.critic_w) {
        *w -= lr * g;
    }
    model.critic_b -= lr * grads.critic_b;
    Ok(stats)
}

/// Per-episode training log entry.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeMetrics {
    pub episode: usize,
    pub mean_reward: f64,
    pub actor_loss: f64,
    pub critic_loss: f64,
    pub entropy: f64,
}

/// Trains a policy over a dataset of visibility stacks.
///
/// Every altitude level of every stack contributes one sample per episode:
/// its sector features, an action sampled from the current policy, and the
/// accuracy of the resulting segment on that map. Training is single-threaded
/// and reproducible for a fixed seed.
pub fn train(
    dataset: &[Vec<VisibilityMap>],
    segment_config: &SegmentConfig,
    config: &TrainConfig,
) -> Result<(PolicyModel, Vec<EpisodeMetrics>)> {
    config.validate()?;
    if dataset.is_empty() || dataset.iter().any(|stack| stack.is_empty()) {
        return Err(Error::InvalidArgument("training dataset must hold nonempty stacks".into()));
    }
    let mut model = PolicyModel::zeros(config.k_actions, config.k_sectors)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut log = Vec::with_capacity(config.episodes);

    // Features are fixed by the dataset; extract once.
    let features: Vec<Vec<FeatureVector>> = dataset
        .iter()
        .map(|stack| {
            stack
                .iter()
                .map(|map| extract_features(std::slice::from_ref(map), config.k_sectors))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    for episode in 0..config.episodes {
        let mut batch: Vec<TrainSample> = Vec::with_capacity(config.batch_size);
        let mut reward_sum = 0.0;
        let mut reward_count = 0usize;
        let mut stat_sum = StepStats { actor_loss: 0.0, critic_loss: 0.0, entropy: 0.0 };
        let mut steps = 0usize;
        for (stack, stack_features) in dataset.iter().zip(&features) {
            for (map, f) in stack.iter().zip(stack_features) {
                let out = policy_forward(&model, f)?;
                let action = sample_categorical(&out.probs, rng.gen::<f64>());
                let alpha = model.action_angle(action);
                let seg = segment_from_angle(
                    map.center_x,
                    map.center_y,
                    map.target_id,
                    alpha,
                    map.altitude_agl,
                    segment_config,
                )?;
                let reward = segment_accuracy(map, &seg)?;
                reward_sum += reward;
                reward_count += 1;
                batch.push(TrainSample { features: f.clone(), action, reward });
                if batch.len() == config.batch_size {
                    let s = train_step(&mut model, &batch, config)?;
                    stat_sum.actor_loss += s.actor_loss;
                    stat_sum.critic_loss += s.critic_loss;
                    stat_sum.entropy += s.entropy;
                    steps += 1;
                    batch.clear();
                }
            }
        }
        if !batch.is_empty() {
            let s = train_step(&mut model, &batch, config)?;
            stat_sum.actor_loss += s.actor_loss;
            stat_sum.critic_loss += s.critic_loss;
            stat_sum.entropy += s.entropy;
            steps += 1;
        }
        let inv = 1.0 / steps.max(1) as f64;
        log.push(EpisodeMetrics {
            episode,
            mean_reward: reward_sum / reward_count.max(1) as f64,
            actor_loss: stat_sum.actor_loss * inv,
            critic_loss: stat_sum.critic_loss * inv,
            entropy: stat_sum.entropy * inv,
        });
    }
    Ok((model, log))
}

fn sample_categorical(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Applies a trained policy to a stack: the argmax angle bin per altitude,
/// then the lowest altitude whose segment reaches the best reward.
pub fn policy_best_segment(
    model: &PolicyModel,
    stack: &[VisibilityMap],
    segment_config: &SegmentConfig,
    k_sectors: usize,
) -> Result<FlightSegment> {
    if stack.is_empty() {
        return Err(Error::InvalidArgument("visibility stack is empty".into()));
    }
    let mut scored: Vec<(u32, FlightSegment)> = Vec::with_capacity(stack.len());
    for map in stack {
        let f = extract_features(std::slice::from_ref(map), k_sectors)?;
        let out = policy_forward(model, &f)?;
        let alpha = model.action_angle(out.argmax());
        let seg = segment_from_angle(
            map.center_x,
            map.center_y,
            map.target_id,
            alpha,
            map.altitude_agl,
            segment_config,
        )?;
        let reward = crate::segment::segment_reward(map, &seg)?;
        scored.push((reward, seg));
    }
    let best = scored.iter().map(|(r, _)| *r).max().expect("nonempty stack");
    Ok(scored.into_iter().find(|(r, _)| *r == best).expect("max exists").1)
}

/// Plain-text model serialization: dimensions, then row-major weights.
pub fn write_model(model: &PolicyModel) -> String {
    let mut out = String::new();
    out.push_str(&format!("k_actions {}\n", model.k_actions));
    out.push_str(&format!("feature_dim {}\n", model.feature_dim));
    let d = model.feature_dim;
    for j in 0..model.k_actions {
        let row: Vec<String> = model.actor_w[j * d..(j + 1) * d].iter().map(|v| format!("{v}")).collect();
        out.push_str(&format!("actor_w {}\n", row.join(" ")));
    }
    let bias: Vec<String> = model.actor_b.iter().map(|v| format!("{v}")).collect();
    out.push_str(&format!("actor_b {}\n", bias.join(" ")));
    let cw: Vec<String> = model.critic_w.iter().map(|v| format!("{v}")).collect();
    out.push_str(&format!("critic_w {}\n", cw.join(" ")));
    out.push_str(&format!("critic_b {}\n", model.critic_b));
    out
}

pub fn read_model(text: &str) -> Result<PolicyModel> {
    let mut k_actions = None;
    let mut feature_dim = None;
    let mut actor_rows: Vec<Vec<f64>> = Vec::new();
    let mut actor_b = None;
    let mut critic_w = None;
    let mut critic_b = None;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let mut parts = line.split_whitespace();
        let key = match parts.next() {
            Some(k) => k,
            None => continue,
        };
        let nums = |parts: std::str::SplitWhitespace<'_>| -> Result<Vec<f64>> {
            parts
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::Parse { line: line_no, msg: format!("'{t}' is not a number") })
                })
                .collect()
        };
        match key {
            "k_actions" => k_actions = Some(nums(parts)?[0] as usize),
            "feature_dim" => feature_dim = Some(nums(parts)?[0] as usize),
            "actor_w" => actor_rows.push(nums(parts)?),
            "actor_b" => actor_b = Some(nums(parts)?),
            "critic_w" => critic_w = Some(nums(parts)?),
            "critic_b" => critic_b = Some(nums(parts)?[0]),
            other => {
                return Err(Error::Parse { line: line_no, msg: format!("unknown model key '{other}'") })
            }
        }
    }
    let missing = |k: &str| Error::Parse { line: 0, msg: format!("missing model key '{k}'") };
    let k = k_actions.ok_or_else(|| missing("k_actions"))?;
    let d = feature_dim.ok_or_else(|| missing("feature_dim"))?;
    let mut model = PolicyModel::zeros(k, d)?;
    if actor_rows.len() != k || actor_rows.iter().any(|r| r.len() != d) {
        return Err(Error::Parse { line: 0, msg: "actor weight shape mismatch".into() });
    }
    model.actor_w = actor_rows.into_iter().flatten().collect();
    model.actor_b = actor_b.ok_or_else(|| missing("actor_b"))?;
    model.critic_w = critic_w.ok_or_else(|| missing("critic_w"))?;
    model.critic_b = critic_b.ok_or_else(|| missing("critic_b"))?;
    if model.actor_b.len() != k || model.critic_w.len() != d {
        return Err(Error::Parse { line: 0, msg: "bias or critic shape mismatch".into() });
    }
    Ok(model)
}

pub const METRICS_CSV_HEADER: &str = "episode,mean_reward,actor_loss,critic_loss,entropy";

pub fn write_metrics_csv(log: &[EpisodeMetrics]) -> String {
    let mut out = String::from(METRICS_CSV_HEADER);
    out.push('\n');
    for m in log {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            m.episode, m.mean_reward, m.actor_loss, m.critic_loss, m.entropy
        ));
    }
    out
}
