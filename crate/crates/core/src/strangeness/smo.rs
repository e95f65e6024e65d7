//! Soft-margin kernel SVM trained by sequential minimal optimization.
//!
//! Solves the C-SVC dual
//!
//! ```text
//! min 1/2 a'Qa - e'a   s.t.  0 <= a_i <= C,  y'a = 0,   Q_ij = y_i y_j K(x_i, x_j)
//! ```
//!
//! with second-order working-set selection, stopping when the maximal KKT
//! violation drops below `tol`.

use super::{sq_dist, ProviderError};
use crate::types::LabeledPoint;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Linear,
    Gaussian { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Kernel::Gaussian { gamma } => (-gamma * sq_dist(a, b)).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoParams {
    pub c: f64,
    pub tol: f64,
    pub max_iter: Option<usize>,
}

impl Default for SmoParams {
    fn default() -> Self {
        Self {
            c: 10.0,
            tol: 1e-3,
            max_iter: None,
        }
    }
}

/// A trained decision function `f(x) = sum_i coef_i K(sv_i, x) + bias`.
#[derive(Debug, Clone)]
pub struct SvmModel {
    kernel: Kernel,
    support: Vec<Vec<f64>>,
    coef: Vec<f64>,
    bias: f64,
    iterations: usize,
}

impl SvmModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.support
            .iter()
            .zip(&self.coef)
            .map(|(sv, c)| c * self.kernel.eval(sv, x))
            .sum::<f64>()
            + self.bias
    }

    pub fn support_count(&self) -> usize {
        self.support.len()
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Fit on points labeled `+1` / `-1` (any positive label counts as `+1`).
    pub fn train(
        points: &[LabeledPoint],
        kernel: Kernel,
        params: &SmoParams,
    ) -> Result<Self, ProviderError> {
        let n = points.len();
        let y: Vec<f64> = points
            .iter()
            .map(|p| if p.label > 0 { 1.0 } else { -1.0 })
            .collect();
        if n < 2 || y.iter().all(|&v| v == y[0]) {
            return Err(ProviderError::Untrainable(
                "need at least one point of each label".into(),
            ));
        }
        if !(params.c > 0.0) {
            return Err(ProviderError::Untrainable(format!(
                "box constraint must be positive, got {}",
                params.c
            )));
        }
        let c = params.c;

        let mut k = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = kernel.eval(&points[i].features, &points[j].features);
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
        }
        let kij = |i: usize, j: usize| k[i * n + j];

        let mut alpha = vec![0.0; n];
        let mut grad = vec![-1.0; n];
        let max_iter = params.max_iter.unwrap_or((100 * n).max(100_000));
        let mut iter = 0;

        loop {
            // i: maximal violator in I_up.
            let mut gmax = f64::NEG_INFINITY;
            let mut sel_i = None;
            for t in 0..n {
                let up = if y[t] > 0.0 {
                    alpha[t] < c
                } else {
                    alpha[t] > 0.0
                };
                if up && -y[t] * grad[t] >= gmax {
                    gmax = -y[t] * grad[t];
                    sel_i = Some(t);
                }
            }
            // j: second-order choice in I_low.
            let mut gmax2 = f64::NEG_INFINITY;
            let mut sel_j = None;
            let mut best_obj = f64::INFINITY;
            if let Some(i) = sel_i {
                for t in 0..n {
                    let low = if y[t] > 0.0 {
                        alpha[t] > 0.0
                    } else {
                        alpha[t] < c
                    };
                    if !low {
                        continue;
                    }
                    let yg = y[t] * grad[t];
                    gmax2 = gmax2.max(yg);
                    let diff = gmax + yg;
                    if diff > 0.0 {
                        let mut quad = kij(i, i) + kij(t, t) - 2.0 * kij(i, t);
                        if quad <= 0.0 {
                            quad = TAU;
                        }
                        let obj = -diff * diff / quad;
                        if obj <= best_obj {
                            best_obj = obj;
                            sel_j = Some(t);
                        }
                    }
                }
            }
            let (Some(i), Some(j)) = (sel_i, sel_j) else {
                break;
            };
            if gmax + gmax2 < params.tol {
                break;
            }
            if iter >= max_iter {
                return Err(ProviderError::NotConverged(max_iter));
            }
            iter += 1;

            let (old_i, old_j) = (alpha[i], alpha[j]);
            let qij = y[i] * y[j] * kij(i, j);
            if y[i] != y[j] {
                let mut quad = kij(i, i) + kij(j, j) + 2.0 * qij;
                if quad <= 0.0 {
                    quad = TAU;
                }
                let delta = (-grad[i] - grad[j]) / quad;
                let diff = alpha[i] - alpha[j];
                alpha[i] += delta;
                alpha[j] += delta;
                if diff > 0.0 {
                    if alpha[j] < 0.0 {
                        alpha[j] = 0.0;
                        alpha[i] = diff;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
                if diff > 0.0 {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = c - diff;
                    }
                } else if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            } else {
                let mut quad = kij(i, i) + kij(j, j) - 2.0 * qij;
                if quad <= 0.0 {
                    quad = TAU;
                }
                let delta = (grad[i] - grad[j]) / quad;
                let sum = alpha[i] + alpha[j];
                alpha[i] -= delta;
                alpha[j] += delta;
                if sum > c {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = sum - c;
                    }
                } else if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if sum > c {
                    if alpha[j] > c {
                        alpha[j] = c;
                        alpha[i] = sum - c;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }

            let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
            for t in 0..n {
                grad[t] += y[t] * (y[i] * kij(t, i) * di + y[j] * kij(t, j) * dj);
            }
        }

        // rho from free vectors, else midpoint of the feasible interval.
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut free_sum, mut free_count) = (0.0, 0usize);
        for t in 0..n {
            let yg = y[t] * grad[t];
            let at_upper = alpha[t] >= c;
            let at_lower = alpha[t] <= 0.0;
            if at_upper {
                if y[t] < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if at_lower {
                if y[t] > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                free_sum += yg;
                free_count += 1;
            }
        }
        let rho = if free_count > 0 {
            free_sum / free_count as f64
        } else {
            (ub + lb) / 2.0
        };

        let mut support = Vec::new();
        let mut coef = Vec::new();
        for t in 0..n {
            if alpha[t] > 0.0 {
                support.push(points[t].features.clone());
                coef.push(alpha[t] * y[t]);
            }
        }
        Ok(Self {
            kernel,
            support,
            coef,
            bias: -rho,
            iterations: iter,
        })
    }
}
