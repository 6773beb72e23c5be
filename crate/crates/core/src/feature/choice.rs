use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use thiserror::Error;

use super::{FeatureId, FeatureState};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChoiceError {
    #[error("every alternative of rule `{0}` is unsupported")]
    RuleExhausted(String),
}

/// Anything that can answer "what state is this feature in".
pub trait StateLookup {
    fn state_of(&self, id: &FeatureId) -> FeatureState;
}

impl StateLookup for HashMap<FeatureId, FeatureState> {
    fn state_of(&self, id: &FeatureId) -> FeatureState {
        self.get(id).copied().unwrap_or_default()
    }
}

impl StateLookup for BTreeMap<FeatureId, FeatureState> {
    fn state_of(&self, id: &FeatureId) -> FeatureState {
        self.get(id).copied().unwrap_or_default()
    }
}

/// The alternatives of one grammar rule and their selection weights.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiceContext {
    pub rule_name: String,
    pub alternatives: Vec<FeatureId>,
    pub weights: Vec<f64>,
}

impl ChoiceContext {
    /// Every alternative equally likely.
    pub fn uniform(rule_name: impl Into<String>, alternatives: Vec<FeatureId>) -> ChoiceContext {
        let w = 1.0 / alternatives.len() as f64;
        let weights = vec![w; alternatives.len()];
        ChoiceContext {
            rule_name: rule_name.into(),
            alternatives,
            weights,
        }
    }
}

/// Zeroes unsupported alternatives and spreads the mass evenly over the rest.
pub fn redistribute(
    ctx: &ChoiceContext,
    states: &impl StateLookup,
) -> Result<ChoiceContext, ChoiceError> {
    let live: Vec<bool> = ctx
        .alternatives
        .iter()
        .map(|a| states.state_of(a) != FeatureState::Unsupported)
        .collect();
    let k = live.iter().filter(|l| **l).count();
    if k == 0 {
        return Err(ChoiceError::RuleExhausted(ctx.rule_name.clone()));
    }
    let w = 1.0 / k as f64;
    Ok(ChoiceContext {
        rule_name: ctx.rule_name.clone(),
        alternatives: ctx.alternatives.clone(),
        weights: live.iter().map(|&l| if l { w } else { 0.0 }).collect(),
    })
}

/// Samples an alternative by weight. Zero-weight alternatives are never returned.
pub fn choose_alternative<'a>(
    ctx: &'a ChoiceContext,
    rng: &mut impl Rng,
) -> Result<&'a FeatureId, ChoiceError> {
    choose_index(ctx, rng).map(|i| &ctx.alternatives[i])
}

/// Like [`choose_alternative`], returning the position of the chosen alternative.
pub fn choose_index(ctx: &ChoiceContext, rng: &mut impl Rng) -> Result<usize, ChoiceError> {
    if ctx.weights.iter().all(|w| *w <= 0.0) {
        return Err(ChoiceError::RuleExhausted(ctx.rule_name.clone()));
    }
    let total: f64 = ctx.weights.iter().sum();
    let mut x = rng.gen::<f64>() * total;
    let mut last = 0;
    for (i, &w) in ctx.weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        last = i;
        if x < w {
            return Ok(i);
        }
        x -= w;
    }
    Ok(last)
}
