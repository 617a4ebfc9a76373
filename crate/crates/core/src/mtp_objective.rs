//! Multi-head negative log-likelihood.
//!
//! At context position t the n heads predict tokens t+1 .. t+n. The loss is
//! the sum over positions and heads of `-ln P_head(target)`; under the
//! independence factorization it equals `-ln` of the per-position product.

use crate::error::{Error, Result};
use crate::reducer::StepDistributions;
use crate::token::TokenId;

/// Head outputs at one context position together with the n true future tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionPrediction {
    /// Index of the last observed token.
    pub position: usize,
    pub dists: StepDistributions,
    pub targets: Vec<TokenId>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct HeadPredictions {
    positions: Vec<PositionPrediction>,
}

impl HeadPredictions {
    /// Pairs `dists[t]` (head outputs after observing `targets[..=t]`) with
    /// `targets[t+1..=t+n]`. Positions lacking n future targets are dropped.
    pub fn from_sequence(dists: Vec<StepDistributions>, targets: &[TokenId]) -> Result<Self> {
        let mut positions = Vec::new();
        for (t, d) in dists.into_iter().enumerate() {
            let n = d.num_heads();
            if t + n >= targets.len() {
                continue;
            }
            let future = targets[t + 1..=t + n].to_vec();
            if let Some(bad) = future.iter().find(|tok| !d.vocab().contains(**tok)) {
                return Err(Error::Dimension(format!("target {bad} outside vocabulary")));
            }
            positions.push(PositionPrediction {
                position: t,
                dists: d,
                targets: future,
            });
        }
        Ok(HeadPredictions { positions })
    }

    pub fn from_positions(positions: Vec<PositionPrediction>) -> Self {
        HeadPredictions { positions }
    }

    pub fn positions(&self) -> &[PositionPrediction] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Union of two position sets.
    pub fn concat(mut self, other: HeadPredictions) -> Self {
        self.positions.extend(other.positions);
        self
    }

    fn target_probs(&self) -> Result<Vec<Vec<f64>>> {
        self.positions
            .iter()
            .map(|p| {
                p.targets
                    .iter()
                    .enumerate()
                    .map(|(head, tok)| {
                        let prob = p.dists.head(head)[tok.index()];
                        if prob > 0.0 {
                            Ok(prob)
                        } else {
                            Err(Error::InfiniteLoss {
                                position: p.position,
                                head: head + 1,
                                token: tok.0,
                            })
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// `-Σ_t Σ_i ln P_i(a_{t+i})`.
pub fn factored_nll(preds: &HeadPredictions) -> Result<f64> {
    let probs = preds.target_probs()?;
    Ok(-probs.iter().flatten().map(|p| p.ln()).sum::<f64>())
}

/// `-Σ_t ln Π_i P_i(a_{t+i})`.
pub fn joint_nll_under_independence(preds: &HeadPredictions) -> Result<f64> {
    let probs = preds.target_probs()?;
    Ok(-probs
        .iter()
        .map(|row| row.iter().product::<f64>().ln())
        .sum::<f64>())
}
