//! Independent reference implementations used as test oracles. Nothing here
//! calls into the library code paths it is compared against.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- transforms

pub fn naive_recurrence(x: &[f64], m: usize, tau: usize) -> Vec<Vec<f64>> {
    let count = x.len() - (m - 1) * tau;
    let traj: Vec<Vec<f64>> = (0..count)
        .map(|i| (0..m).map(|k| x[i + k * tau]).collect())
        .collect();
    traj.iter()
        .map(|a| {
            traj.iter()
                .map(|b| a.iter().zip(b).fold(0.0f64, |acc, (p, q)| acc.hypot(p - q)))
                .collect()
        })
        .collect()
}

/// cos(acos(p) + acos(q)) expanded as p q - sqrt(1-p^2) sqrt(1-q^2).
pub fn naive_gramian(x: &[f64], a: f64, b: f64) -> Vec<Vec<f64>> {
    let lo = x.iter().cloned().fold(f64::MAX, f64::min);
    let hi = x.iter().cloned().fold(f64::MIN, f64::max);
    let scaled: Vec<f64> = x
        .iter()
        .map(|&v| {
            if hi == lo {
                (a + b) / 2.0
            } else {
                (a + (b - a) * (v - lo) / (hi - lo)).clamp(-1.0, 1.0)
            }
        })
        .collect();
    scaled
        .iter()
        .map(|&p| {
            scaled
                .iter()
                .map(|&q| p * q - (1.0 - p * p).max(0.0).sqrt() * (1.0 - q * q).max(0.0).sqrt())
                .collect()
        })
        .collect()
}

/// Returns (W rows, M rows, bin edges).
pub fn naive_markov(x: &[f64], q: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>) {
    let mut s = x.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len();
    let mut edges = Vec::new();
    for k in 1..q {
        let h = (n - 1) as f64 * k as f64 / q as f64;
        let lower = h.floor() as usize;
        let v = if lower + 1 < n {
            s[lower] + (h - lower as f64) * (s[lower + 1] - s[lower])
        } else {
            s[lower]
        };
        edges.push(v);
    }
    let bin = |v: f64| {
        for (k, &e) in edges.iter().enumerate() {
            if v <= e {
                return k;
            }
        }
        q - 1
    };
    let bins: Vec<usize> = x.iter().map(|&v| bin(v)).collect();
    let mut w = vec![vec![0.0; q]; q];
    for t in 0..n - 1 {
        w[bins[t]][bins[t + 1]] += 1.0;
    }
    for row in w.iter_mut() {
        let total: f64 = row.iter().sum();
        for v in row.iter_mut() {
            *v = if total == 0.0 { 1.0 / q as f64 } else { *v / total };
        }
    }
    let m = (0..n)
        .map(|i| (0..n).map(|j| w[bins[i]][bins[j]]).collect())
        .collect();
    (w, m, edges)
}

// ---------------------------------------------------------------- metrics

/// O(P N) pairwise AUC with ties counted one half.
pub fn brute_auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if positive[i] && !positive[j] {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    (pairs > 0.0).then(|| wins / pairs)
}

pub fn brute_auc_ovr(y: &[usize], scores: &[Vec<f64>]) -> f64 {
    let c = scores[0].len();
    let mut aucs = Vec::new();
    for k in 0..c {
        let col: Vec<f64> = scores.iter().map(|r| r[k]).collect();
        let pos: Vec<bool> = y.iter().map(|&t| t == k).collect();
        if let Some(a) = brute_auc(&col, &pos) {
            aucs.push(a);
        }
    }
    aucs.iter().sum::<f64>() / aucs.len() as f64
}

// ---------------------------------------------------------------- snn

#[derive(Clone, Copy, Debug)]
pub struct NaiveNet {
    pub inputs: usize,
    pub hidden: usize,
    pub classes: usize,
    pub decay: f64,
    pub threshold: f64,
    pub width: f64,
    pub steps: usize,
    pub zero_reset: bool,
    pub membrane_readout: bool,
}

/// Parameters flattened as w1 (inputs x hidden), b1, w2 (hidden x classes), b2.
pub struct NaiveRun {
    pub loss: f64,
    /// Post-reset membranes per step and layer, `[t][layer][k]`.
    pub carries: Vec<[Vec<f64>; 2]>,
    /// Pre-reset membranes per step and layer.
    pub pre: Vec<[Vec<f64>; 2]>,
}

fn ramp(net: &NaiveNet, u: f64) -> f64 {
    ((u - net.threshold) / net.width + 0.5).clamp(0.0, 1.0)
}

/// Smooth-ramp network loss. With `frozen` set, each step's membrane
/// carry-over is taken from the given run instead of the live state, which
/// makes the loss's true gradient equal the gradient-isolated one.
pub fn naive_loss(net: &NaiveNet, theta: &[f64], x: &[f64], target: usize, frozen: Option<&NaiveRun>) -> NaiveRun {
    let (ni, nh, nc) = (net.inputs, net.hidden, net.classes);
    let w1 = &theta[..ni * nh];
    let b1 = &theta[ni * nh..ni * nh + nh];
    let w2 = &theta[ni * nh + nh..ni * nh + nh + nh * nc];
    let b2 = &theta[ni * nh + nh + nh * nc..];
    let mut u1 = vec![0.0; nh];
    let mut u2 = vec![0.0; nc];
    let mut acc = vec![0.0; nc];
    let mut carries = Vec::new();
    let mut pres = Vec::new();
    for t in 0..net.steps {
        if let Some(f) = frozen {
            if t > 0 {
                u1 = f.carries[t - 1][0].clone();
                u2 = f.carries[t - 1][1].clone();
            }
        }
        let mut pre1 = vec![0.0; nh];
        let mut s1 = vec![0.0; nh];
        for h in 0..nh {
            let mut cur = b1[h];
            for i in 0..ni {
                cur += x[i] * w1[i * nh + h];
            }
            let u = net.decay * u1[h] + cur;
            pre1[h] = u;
            s1[h] = ramp(net, u);
            u1[h] = if net.zero_reset { u * (1.0 - s1[h]) } else { u - net.threshold * s1[h] };
        }
        let mut pre2 = vec![0.0; nc];
        for c in 0..nc {
            let mut cur = b2[c];
            for h in 0..nh {
                cur += s1[h] * w2[h * nc + c];
            }
            let u = net.decay * u2[c] + cur;
            pre2[c] = u;
            let s = ramp(net, u);
            acc[c] += if net.membrane_readout { u } else { s };
            u2[c] = if net.zero_reset { u * (1.0 - s) } else { u - net.threshold * s };
        }
        carries.push([u1.clone(), u2.clone()]);
        pres.push([pre1, pre2]);
    }
    let scores: Vec<f64> = acc.iter().map(|a| a / net.steps as f64).collect();
    let max = scores.iter().cloned().fold(f64::MIN, f64::max);
    let lse = scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln() + max;
    NaiveRun {
        loss: lse - scores[target],
        carries,
        pre: pres,
    }
}

/// Central finite-difference gradient of [`naive_loss`].
pub fn finite_difference(
    net: &NaiveNet,
    theta: &[f64],
    x: &[f64],
    target: usize,
    frozen: Option<&NaiveRun>,
    h: f64,
) -> Vec<f64> {
    let mut probe = theta.to_vec();
    (0..theta.len())
        .map(|k| {
            let orig = probe[k];
            probe[k] = orig + h;
            let plus = naive_loss(net, &probe, x, target, frozen).loss;
            probe[k] = orig - h;
            let minus = naive_loss(net, &probe, x, target, frozen).loss;
            probe[k] = orig;
            (plus - minus) / (2.0 * h)
        })
        .collect()
}

/// True when some pre-reset membrane sits within `margin` of a ramp corner,
/// where a finite difference straddles a kink.
pub fn near_kink(net: &NaiveNet, run: &NaiveRun, margin: f64) -> bool {
    let lo = net.threshold - net.width / 2.0;
    let hi = net.threshold + net.width / 2.0;
    run.pre
        .iter()
        .flat_map(|layers| layers.iter().flatten())
        .any(|&u| (u - lo).abs() < margin || (u - hi).abs() < margin)
}

pub fn random_theta(net: &NaiveNet, r: &mut ChaCha8Rng, scale: f64) -> Vec<f64> {
    let n = net.inputs * net.hidden + net.hidden + net.hidden * net.classes + net.classes;
    (0..n).map(|_| r.gen_range(-scale..scale)).collect()
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    let denom = a.abs().max(b.abs());
    if denom < 1e-9 {
        (a - b).abs()
    } else {
        (a - b).abs() / denom
    }
}

use spikeseq::snn::{GradientFlow, LifConfig, Parameters, Readout, ResetMode, SnnModel, SpikeMode};

/// Draws a random small smooth-mode instance and returns the worst relative
/// error between `SnnModel::backward` and central differences (h = 1e-4),
/// together with the number of non-zero analytic entries, or `None` if the
/// instance sits on a ramp kink.
pub fn gradient_check(
    seed: u64,
    flow: GradientFlow,
    zero_reset: bool,
    membrane_readout: bool,
) -> Option<(f64, usize)> {
    let mut r = rng(seed);
    let net = NaiveNet {
        inputs: r.gen_range(2..7),
        hidden: r.gen_range(1..=8),
        classes: r.gen_range(2..5),
        decay: 0.9,
        threshold: 1.0,
        width: 1.0,
        steps: r.gen_range(1..=5),
        zero_reset,
        membrane_readout,
    };
    let theta = random_theta(&net, &mut r, 1.0);
    let x: Vec<f64> = (0..net.inputs).map(|_| r.gen_range(0.0..1.0)).collect();
    let target = r.gen_range(0..net.classes);

    let reference = naive_loss(&net, &theta, &x, target, None);
    if near_kink(&net, &reference, 1e-3) {
        return None;
    }
    let frozen = (flow == GradientFlow::Isolated).then_some(&reference);
    let numeric = finite_difference(&net, &theta, &x, target, frozen, 1e-4);

    let lif = LifConfig {
        decay_multiplier: net.decay,
        threshold: net.threshold,
        time_steps: net.steps,
        surrogate_width: net.width,
        reset: if zero_reset { ResetMode::Zero } else { ResetMode::Subtract },
        spike: SpikeMode::SmoothRamp,
    };
    let mut model = SnnModel::new(net.inputs, net.hidden, net.classes, lif, 0).unwrap();
    model.readout = if membrane_readout { Readout::MembraneMean } else { Readout::SpikeRate };
    model.gradient_flow = flow;
    let (ni, nh, nc) = (net.inputs, net.hidden, net.classes);
    model.params = Parameters {
        w1: theta[..ni * nh].to_vec(),
        b1: theta[ni * nh..ni * nh + nh].to_vec(),
        w2: theta[ni * nh + nh..ni * nh + nh + nh * nc].to_vec(),
        b2: theta[ni * nh + nh + nh * nc..].to_vec(),
    };
    let (loss, grads) = model.backward(x.as_slice(), target).unwrap();
    assert!((loss - reference.loss).abs() < 1e-12, "loss mismatch {loss} vs {}", reference.loss);
    let analytic: Vec<f64> = grads.tensors().iter().flat_map(|(_, t)| t.iter().copied()).collect();
    let worst = analytic
        .iter()
        .zip(&numeric)
        .map(|(&a, &n)| relative_error(a, n))
        .fold(0.0, f64::max);
    Some((worst, analytic.iter().filter(|g| g.abs() > 1e-9).count()))
}
