//! Soft-margin SVM with an RBF kernel, trained by sequential minimal
//! optimization with second-order working-set selection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmParams {
    pub c: f64,
    /// RBF width; `None` means `1 / dims`.
    pub gamma: Option<f64>,
    /// Stop when the maximal KKT violation drops below this.
    pub tolerance: f64,
    /// Pair updates allowed, in multiples of the sample count.
    pub max_passes: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            gamma: None,
            tolerance: 1e-3,
            max_passes: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub support_vectors: Vec<Vec<f64>>,
    /// `alpha_i * y_i` for each support vector.
    pub dual_coef: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub c: f64,
    /// Maximal KKT violation at termination.
    pub kkt_residual: f64,
    /// Dual objective `1/2 a'Qa - sum(a)` at the solution.
    pub dual_objective: f64,
    /// Full dual vector over the training samples.
    pub alpha: Vec<f64>,
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

impl SvmModel {
    /// `sum_i alpha_i y_i K(x_i, x) + b`.
    pub fn score(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.dual_coef)
            .map(|(sv, c)| c * rbf(sv, x, self.gamma))
            .sum::<f64>()
            + self.bias
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        self.score(x) > 0.0
    }
}

/// Solves the C-SVC dual
/// `min 1/2 a'Qa - e'a  s.t.  0 <= a <= C, y'a = 0`, with `Q_ij = y_i y_j K_ij`.
pub fn svm_rbf_fit(x: &[Vec<f64>], y: &[bool], params: &SvmParams) -> Result<SvmModel> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::shape(&[n], &[y.len()]));
    }
    if !(y.contains(&true) && y.contains(&false)) {
        return Err(Error::Data("SVM training needs both classes".into()));
    }
    let dims = x[0].len();
    if dims == 0 || x.iter().any(|r| r.len() != dims) {
        return Err(Error::InvalidArgument("SVM feature rows must share a positive length".into()));
    }
    let c = params.c;
    let gamma = params.gamma.unwrap_or(1.0 / dims as f64);
    if !(c > 0.0 && c.is_finite() && gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!("SVM needs C > 0 and gamma > 0, got C={c}, gamma={gamma}")));
    }
    let ys: Vec<f64> = y.iter().map(|&v| if v { 1.0 } else { -1.0 }).collect();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = rbf(&x[i], &x[j], gamma);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    let q = |i: usize, j: usize| ys[i] * ys[j] * k[i * n + j];

    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let budget = params.max_passes.saturating_mul(n);
    let mut residual;
    let mut iterations = 0usize;
    loop {
        // i maximizes -y_t G_t over I_up; j minimizes the second-order gain over I_low.
        let mut g_max = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            let up = if ys[t] > 0.0 { alpha[t] < c } else { alpha[t] > 0.0 };
            if up && -ys[t] * grad[t] >= g_max {
                g_max = -ys[t] * grad[t];
                i_sel = Some(t);
            }
        }
        let mut g_max2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut best = f64::INFINITY;
        if let Some(i) = i_sel {
            for t in 0..n {
                let low = if ys[t] > 0.0 { alpha[t] > 0.0 } else { alpha[t] < c };
                if !low {
                    continue;
                }
                let yg = ys[t] * grad[t];
                g_max2 = g_max2.max(yg);
                let diff = g_max + yg;
                if diff > 0.0 {
                    let quad = (k[i * n + i] + k[t * n + t] - 2.0 * k[i * n + t]).max(TAU);
                    let gain = -diff * diff / quad;
                    if gain <= best {
                        best = gain;
                        j_sel = Some(t);
                    }
                }
            }
        }
        residual = g_max + g_max2;
        let (Some(i), Some(j)) = (i_sel, j_sel) else {
            break;
        };
        if residual < params.tolerance {
            break;
        }
        if iterations >= budget {
            return Err(Error::Numerical(format!(
                "SMO did not converge within {} passes; KKT residual {residual:.3e}",
                params.max_passes
            )));
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let quad_raw = k[i * n + i] + k[j * n + j] - 2.0 * k[i * n + j];
        let quad = if quad_raw > 0.0 { quad_raw } else { TAU };
        if ys[i] != ys[j] {
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
            grad[t] += q(t, i) * di + q(t, j) * dj;
        }
    }

    // Bias from free vectors, or the midpoint of the feasible interval.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut free_sum) = (0usize, 0.0);
    for t in 0..n {
        let yg = ys[t] * grad[t];
        let at_upper = alpha[t] >= c;
        let at_lower = alpha[t] <= 0.0;
        if (at_upper && ys[t] < 0.0) || (at_lower && ys[t] > 0.0) {
            ub = ub.min(yg);
        } else if at_upper || at_lower {
            lb = lb.max(yg);
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 { free_sum / free as f64 } else { (ub + lb) / 2.0 };
    let dual_objective = 0.5 * (0..n).map(|t| alpha[t] * (grad[t] - 1.0)).sum::<f64>();

    let mut support_vectors = Vec::new();
    let mut dual_coef = Vec::new();
    for t in 0..n {
        if alpha[t] > 0.0 {
            support_vectors.push(x[t].clone());
            dual_coef.push(alpha[t] * ys[t]);
        }
    }
    Ok(SvmModel {
        support_vectors,
        dual_coef,
        bias: -rho,
        gamma,
        c,
        kkt_residual: residual.max(0.0),
        dual_objective,
        alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xor_corners() {
        let x = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
        let y = vec![true, true, false, false];
        let params = SvmParams {
            c: 10.0,
            gamma: Some(2.0),
            ..SvmParams::default()
        };
        let m = svm_rbf_fit(&x, &y, &params).unwrap();
        for (r, &l) in x.iter().zip(&y) {
            assert_eq!(m.predict(r), l);
        }
        assert!(m.kkt_residual < 1e-3);
    }

    #[test]
    fn symmetric_duplicates() {
        let x = vec![vec![1.0], vec![1.0], vec![-1.0], vec![-1.0]];
        let y = vec![true, true, false, false];
        let m = svm_rbf_fit(&x, &y, &SvmParams::default()).unwrap();
        assert!(m.bias.abs() < 1e-9);
        assert!((m.score(&[1.0]) + m.score(&[-1.0])).abs() < 1e-9);
        assert!(m.score(&[0.0]).abs() < 1e-9);
    }

    #[test]
    fn duals_within_box() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()]).collect();
        let y: Vec<bool> = (0..20).map(|i| (i * 7) % 3 == 0).collect();
        let m = svm_rbf_fit(&x, &y, &SvmParams { c: 0.5, ..SvmParams::default() }).unwrap();
        assert!(m.alpha.iter().all(|&a| (0.0..=0.5).contains(&a)));
        let balance: f64 = m.alpha.iter().zip(&y).map(|(a, &l)| if l { *a } else { -a }).sum();
        assert!(balance.abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        let x = vec![vec![0.0], vec![1.0]];
        assert!(svm_rbf_fit(&x, &[true, true], &SvmParams::default()).is_err());
        let bad = SvmParams { c: 0.0, ..SvmParams::default() };
        assert!(svm_rbf_fit(&x, &[true, false], &bad).is_err());
    }

    #[test]
    fn tiny_budget_reports_residual() {
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![(i as f64 * 1.7).sin(), (i as f64 * 0.3).cos()]).collect();
        let y: Vec<bool> = (0..30).map(|i| i % 2 == 0).collect();
        let params = SvmParams { c: 100.0, max_passes: 0, ..SvmParams::default() };
        let err = svm_rbf_fit(&x, &y, &params).unwrap_err().to_string();
        assert!(err.contains("KKT residual"), "{err}");
    }
}
