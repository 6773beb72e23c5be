//! Beta-Binomial support inference.
//!
//! With a uniform prior on the success probability θ and `y` successes in `N`
//! executions, the posterior is Beta(y+1, N−y+1). For integer parameters its
//! CDF at `p` equals the binomial upper tail
//! `Σ_{j=y+1}^{N+1} C(N+1, j) p^j (1−p)^{N+1−j}`, which is what we evaluate.

use super::{FeatureState, FeatureStats};

/// Posterior mass below the threshold needed to call a query feature unsupported.
pub const CONFIDENCE: f64 = 0.95;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InferenceConfig {
    pub threshold_p: f64,
    pub confidence: f64,
    pub ddl_fail_limit: u64,
    pub update_interval: u64,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        InferenceConfig {
            threshold_p: 0.01,
            confidence: CONFIDENCE,
            ddl_fail_limit: 20,
            update_interval: 100_000,
        }
    }
}

impl InferenceConfig {
    pub fn with_threshold(threshold_p: f64) -> Option<InferenceConfig> {
        if threshold_p > 0.0 && threshold_p < 1.0 {
            Some(InferenceConfig {
                threshold_p,
                ..Default::default()
            })
        } else {
            None
        }
    }
}

/// Parameters of the Beta posterior: `(y + 1, N − y + 1)`.
pub fn posterior_params(stats: &FeatureStats) -> (u64, u64) {
    debug_assert!(stats.y <= stats.n);
    (stats.y + 1, stats.n - stats.y + 1)
}

/// Posterior probability that θ < `p`, i.e. the regularized incomplete beta
/// function `I_p(y+1, N−y+1)`.
pub fn prob_below_threshold(stats: &FeatureStats, p: f64) -> f64 {
    binomial_upper_tail(stats.n + 1, stats.y + 1, p)
}

/// `P[X ≥ k]` for `X ~ Binomial(n, p)`.
///
/// Sums whichever tail lies away from the mode so the terms decrease
/// monotonically and the walk can stop once they stop contributing.
fn binomial_upper_tail(n: u64, k: u64, p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "threshold must lie in (0, 1)");
    if k == 0 {
        return 1.0;
    }
    if k > n {
        return 0.0;
    }
    let q = 1.0 - p;
    let (ln_p, ln_q) = (p.ln(), q.ln());
    let ln_term = |j: u64| ln_choose(n, j) + j as f64 * ln_p + (n - j) as f64 * ln_q;
    let ratio_up = p / q;
    if k as f64 >= n as f64 * p {
        // Upper tail, walking j = k, k+1, ... with decreasing terms.
        let mut term = ln_term(k).exp();
        let mut sum = term;
        let mut j = k;
        while j < n {
            term *= (n - j) as f64 / (j + 1) as f64 * ratio_up;
            sum += term;
            j += 1;
            if term <= sum * 1e-18 {
                break;
            }
        }
        sum.min(1.0)
    } else {
        // 1 − lower tail, walking j = k−1, k−2, ... with decreasing terms.
        let mut j = k - 1;
        let mut term = ln_term(j).exp();
        let mut sum = term;
        while j > 0 {
            term *= j as f64 / (n - j + 1) as f64 / ratio_up;
            sum += term;
            j -= 1;
            if term <= sum * 1e-18 {
                break;
            }
        }
        (1.0 - sum).clamp(0.0, 1.0)
    }
}

fn ln_choose(n: u64, k: u64) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Lanczos approximation (g = 7, 9 coefficients); ~1e-15 relative accuracy for x ≥ 0.5.
fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + G + 0.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Posterior rule for query features.
pub fn classify_query_feature(stats: &FeatureStats, cfg: &InferenceConfig) -> FeatureState {
    if prob_below_threshold(stats, cfg.threshold_p) >= cfg.confidence {
        FeatureState::Unsupported
    } else if stats.n > 0 {
        FeatureState::Supported
    } else {
        FeatureState::Unknown
    }
}

/// Fail-count rule for DDL/DML features.
pub fn classify_ddl_feature(stats: &FeatureStats, cfg: &InferenceConfig) -> FeatureState {
    if stats.y > 0 {
        FeatureState::Supported
    } else if stats.n >= cfg.ddl_fail_limit {
        FeatureState::Unsupported
    } else {
        FeatureState::Unknown
    }
}
