//! Bidirectional stepwise OLS selection under BIC.
//!
//! Categorical grouping columns enter as treatment dummies (first sorted
//! level dropped) and stay in every model together with the intercept.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::linreg::multi_ols;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepAction {
    Add,
    Remove,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub action: StepAction,
    pub feature: String,
    pub bic: f64,
}

/// A candidate move whose design matrix was rank deficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedDesign {
    pub iteration: usize,
    pub feature: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepwiseResult {
    pub selected_features: Vec<String>,
    /// Keyed by term: `intercept`, `<group>=<level>` dummies, features.
    pub coefficients: BTreeMap<String, f64>,
    pub stderrs: BTreeMap<String, f64>,
    /// BIC of the starting model followed by one entry per accepted step.
    pub bic_trace: Vec<f64>,
    pub steps: Vec<StepRecord>,
    pub skipped: Vec<SkippedDesign>,
    pub n: usize,
}

impl StepwiseResult {
    pub fn bic(&self) -> f64 {
        *self.bic_trace.last().expect("trace is never empty")
    }
}

pub fn bic(rss: f64, n: usize, p: usize) -> f64 {
    let n = n as f64;
    n * (rss.max(f64::MIN_POSITIVE) / n).ln() + p as f64 * n.ln()
}

struct Term {
    name: String,
    values: Vec<f64>,
}

fn dummy_terms(groups: &[(String, Vec<String>)], n: usize) -> Result<Vec<Term>> {
    let mut out = Vec::new();
    for (name, labels) in groups {
        if labels.len() != n {
            return Err(Error::Invariant(format!(
                "group column {name} has {} rows, expected {n}",
                labels.len()
            )));
        }
        let levels: BTreeSet<&String> = labels.iter().collect();
        for level in levels.into_iter().skip(1) {
            out.push(Term {
                name: format!("{name}={level}"),
                values: labels.iter().map(|l| f64::from(l == level)).collect(),
            });
        }
    }
    Ok(out)
}

struct Design<'a> {
    y: DVector<f64>,
    base: Vec<Term>,
    candidates: &'a [(String, Vec<f64>)],
}

impl Design<'_> {
    fn n(&self) -> usize {
        self.y.len()
    }

    fn matrix(&self, selected: &[usize]) -> DMatrix<f64> {
        let n = self.n();
        let cols = 1 + self.base.len() + selected.len();
        DMatrix::from_fn(n, cols, |i, j| {
            if j == 0 {
                1.0
            } else if j <= self.base.len() {
                self.base[j - 1].values[i]
            } else {
                self.candidates[selected[j - 1 - self.base.len()]].1[i]
            }
        })
    }

    fn bic_of(&self, selected: &[usize]) -> Option<f64> {
        let x = self.matrix(selected);
        let fit = multi_ols(&x, &self.y)?;
        Some(bic(fit.rss, self.n(), x.ncols()))
    }
}

pub fn stepwise_select(
    y: &[f64],
    candidates: &[(String, Vec<f64>)],
    groups: &[(String, Vec<String>)],
) -> Result<StepwiseResult> {
    let n = y.len();
    if let Some((name, _)) = candidates.iter().find(|(_, v)| v.len() != n) {
        return Err(Error::Invariant(format!("candidate {name} length differs from y")));
    }
    if y.iter().chain(candidates.iter().flat_map(|(_, v)| v)).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput("non-finite value in stepwise input".into()));
    }
    let base = dummy_terms(groups, n)?;
    let p_max = 1 + base.len() + candidates.len();
    if n < p_max + 3 {
        return Err(Error::TooFewPoints {
            needed: p_max + 3,
            got: n,
        });
    }
    let design = Design {
        y: DVector::from_column_slice(y),
        base,
        candidates,
    };

    let mut selected: Vec<usize> = Vec::new();
    let mut current = design
        .bic_of(&selected)
        .ok_or_else(|| Error::DegenerateInput("intercept and group dummies are collinear".into()))?;
    let mut bic_trace = vec![current];
    let mut steps = Vec::new();
    let mut skipped = Vec::new();

    for iteration in 1.. {
        // (bic, is_removal, name, candidate index)
        let mut best: Option<(f64, bool, &str, usize)> = None;
        let mut consider = |bic: f64, removal: bool, idx: usize| {
            let name = candidates[idx].0.as_str();
            let better = match best {
                None => true,
                Some((b, r, nm, _)) => {
                    bic < b || (bic == b && (removal, name) < (r, nm))
                }
            };
            if better {
                best = Some((bic, removal, name, idx));
            }
        };
        for idx in 0..candidates.len() {
            if selected.contains(&idx) {
                let trial: Vec<usize> = selected.iter().copied().filter(|&s| s != idx).collect();
                if let Some(b) = design.bic_of(&trial) {
                    consider(b, true, idx);
                }
            } else {
                let mut trial = selected.clone();
                trial.push(idx);
                match design.bic_of(&trial) {
                    Some(b) => consider(b, false, idx),
                    None => skipped.push(SkippedDesign {
                        iteration,
                        feature: candidates[idx].0.clone(),
                    }),
                }
            }
        }
        match best {
            Some((b, removal, name, idx)) if b < current => {
                if removal {
                    selected.retain(|&s| s != idx);
                } else {
                    selected.push(idx);
                }
                steps.push(StepRecord {
                    action: if removal { StepAction::Remove } else { StepAction::Add },
                    feature: name.to_string(),
                    bic: b,
                });
                current = b;
                bic_trace.push(b);
            }
            _ => break,
        }
    }

    let x = design.matrix(&selected);
    let fit = multi_ols(&x, &design.y)
        .ok_or_else(|| Error::Invariant("accepted design became singular".into()))?;
    let mut names = vec!["intercept".to_string()];
    names.extend(design.base.iter().map(|t| t.name.clone()));
    names.extend(selected.iter().map(|&i| candidates[i].0.clone()));
    let coefficients = names.iter().cloned().zip(fit.coefficients).collect();
    let stderrs = names.iter().cloned().zip(fit.stderrs).collect();
    let mut selected_features: Vec<String> =
        selected.iter().map(|&i| candidates[i].0.clone()).collect();
    selected_features.sort();

    Ok(StepwiseResult {
        selected_features,
        coefficients,
        stderrs,
        bic_trace,
        steps,
        skipped,
        n,
    })
}
