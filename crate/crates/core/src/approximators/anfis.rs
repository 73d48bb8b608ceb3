//! Five-layer Sugeno ANFIS, inference only.
//!
//! 1. generalized bell memberships `1 / (1 + ((x - c) / a)^(2b))`
//! 2. rule firing strengths, product t-norm
//! 3. normalisation `w_i / sum(w)`
//! 4. weighted first-order consequents `w_bar_i * (p_i . x + r_i)`
//! 5. sum per output

use crate::error::{DpError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellMembership {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl BellMembership {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if a == 0.0 || !a.is_finite() {
            return Err(DpError::InvalidParameter("bell width a must be non-zero".into()));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(DpError::InvalidParameter("bell slope b must be positive".into()));
        }
        if !c.is_finite() {
            return Err(DpError::InvalidParameter("bell center c must be finite".into()));
        }
        Ok(Self { a, b, c })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let s = (x - self.c) / self.a;
        1.0 / (1.0 + (s * s).powf(self.b))
    }
}

/// One rule: a membership index per input and, per output, linear
/// consequent coefficients `[p_1 .. p_n, r]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnfisRule {
    pub antecedents: Vec<usize>,
    pub consequents: Vec<Vec<f64>>,
}

impl AnfisRule {
    /// Two-input, single-output rule `f = p x1 + q x2 + r`.
    pub fn two_input(antecedents: [usize; 2], p: f64, q: f64, r: f64) -> Self {
        Self {
            antecedents: antecedents.to_vec(),
            consequents: vec![vec![p, q, r]],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnfisModel {
    memberships: Vec<Vec<BellMembership>>,
    rules: Vec<AnfisRule>,
    outputs: usize,
}

impl AnfisModel {
    /// `memberships[k]` lists the fuzzy sets defined on input `k`.
    pub fn new(memberships: Vec<Vec<BellMembership>>, rules: Vec<AnfisRule>) -> Result<Self> {
        if rules.is_empty() {
            return Err(DpError::InvalidParameter("ANFIS needs at least one rule".into()));
        }
        let inputs = memberships.len();
        let outputs = rules[0].consequents.len();
        if outputs == 0 {
            return Err(DpError::InvalidParameter("rules need at least one output".into()));
        }
        for rule in &rules {
            if rule.antecedents.len() != inputs {
                return Err(DpError::DimensionMismatch {
                    expected: inputs,
                    found: rule.antecedents.len(),
                });
            }
            for (k, &m) in rule.antecedents.iter().enumerate() {
                if m >= memberships[k].len() {
                    return Err(DpError::InvalidParameter(format!(
                        "rule references membership {m} on input {k}, which has {}",
                        memberships[k].len()
                    )));
                }
            }
            if rule.consequents.len() != outputs {
                return Err(DpError::DimensionMismatch {
                    expected: outputs,
                    found: rule.consequents.len(),
                });
            }
            if let Some(c) = rule.consequents.iter().find(|c| c.len() != inputs + 1) {
                return Err(DpError::DimensionMismatch {
                    expected: inputs + 1,
                    found: c.len(),
                });
            }
        }
        Ok(Self {
            memberships,
            rules,
            outputs,
        })
    }

    pub fn input_count(&self) -> usize {
        self.memberships.len()
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    pub fn output_count(&self) -> usize {
        self.outputs
    }
}

/// Every intermediate layer, for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct AnfisLayers {
    pub memberships: Vec<Vec<f64>>,
    pub firing: Vec<f64>,
    pub normalized: Vec<f64>,
    /// `[rule][output]`
    pub weighted: Vec<Vec<f64>>,
    pub output: Vec<f64>,
}

pub fn anfis_forward(model: &AnfisModel, x: &[f64]) -> Result<AnfisLayers> {
    if x.len() != model.input_count() {
        return Err(DpError::DimensionMismatch {
            expected: model.input_count(),
            found: x.len(),
        });
    }

    let memberships: Vec<Vec<f64>> = model
        .memberships
        .iter()
        .zip(x)
        .map(|(sets, &xi)| sets.iter().map(|m| m.eval(xi)).collect())
        .collect();

    let firing: Vec<f64> = model
        .rules
        .iter()
        .map(|rule| {
            rule.antecedents
                .iter()
                .enumerate()
                .map(|(k, &m)| memberships[k][m])
                .product()
        })
        .collect();

    let total: f64 = firing.iter().sum();
    if !(total > 0.0) {
        return Err(DpError::DegenerateFiring);
    }
    let normalized: Vec<f64> = firing.iter().map(|w| w / total).collect();

    let weighted: Vec<Vec<f64>> = model
        .rules
        .iter()
        .zip(&normalized)
        .map(|(rule, &wn)| {
            rule.consequents
                .iter()
                .map(|c| {
                    let (bias, coeffs) = c.split_last().expect("validated length");
                    let f = coeffs.iter().zip(x).map(|(p, xi)| p * xi).sum::<f64>() + bias;
                    wn * f
                })
                .collect()
        })
        .collect();

    let output = (0..model.outputs)
        .map(|o| weighted.iter().map(|w| w[o]).sum())
        .collect();

    Ok(AnfisLayers {
        memberships,
        firing,
        normalized,
        weighted,
        output,
    })
}
