use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hyperparameters of the question-answer trust family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrustConfig {
    /// Reward exponent for correct answers.
    pub alpha: f64,
    /// Penalty exponent for wrong answers.
    pub beta: f64,
    /// Kernel parameter of the trust density.
    pub gamma: f64,
    /// Evaluation points on [0, 1].
    pub grid_points: usize,
    /// Use the bandwidth-consistent KDE prefactor `1 / ((gamma/sqrt n) sqrt(2 pi))`
    /// instead of `1 / (gamma sqrt(2 pi))`. Only the former integrates to 1.
    pub normalized: bool,
}

impl Default for TrustConfig {
    fn default() -> Self {
        TrustConfig {
            alpha: 1.0,
            beta: 1.0,
            gamma: 0.5,
            grid_points: 201,
            normalized: false,
        }
    }
}

impl TrustConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("trust {name} must be positive, got {v}")));
            }
        }
        if self.grid_points < 2 {
            return Err(Error::InvalidArgument("trust density grid needs at least 2 points".into()));
        }
        Ok(())
    }
}

/// One answered question: the model's confidence in its predicted class and
/// whether that prediction matched the truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrustRecord {
    pub confidence: f64,
    pub correct: bool,
    pub predicted: usize,
    pub truth: usize,
}

impl TrustRecord {
    pub fn new(confidence: f64, predicted: usize, truth: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::InvalidArgument(format!("confidence {confidence} outside [0, 1]")));
        }
        Ok(TrustRecord {
            confidence,
            correct: predicted == truth,
            predicted,
            truth,
        })
    }
}

/// `C^alpha` when correct, `(1 - C)^beta` otherwise.
pub fn qa_trust(rec: &TrustRecord, cfg: &TrustConfig) -> f64 {
    if rec.correct {
        rec.confidence.powf(cfg.alpha)
    } else {
        (1.0 - rec.confidence).powf(cfg.beta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub x: Vec<f64>,
    pub rho: Vec<f64>,
}

/// Gaussian-kernel density of the trust values with bandwidth `gamma / sqrt(n)`,
/// sampled on an even grid over [0, 1].
pub fn trust_density(trusts: &[f64], cfg: &TrustConfig) -> Result<DensityCurve> {
    cfg.validate()?;
    if trusts.is_empty() {
        return Err(Error::InvalidArgument("trust density of an empty trust list".into()));
    }
    let n = trusts.len() as f64;
    let h = cfg.gamma / n.sqrt();
    let width = if cfg.normalized { h } else { cfg.gamma };
    let prefactor = 1.0 / (width * (2.0 * PI).sqrt());
    let last = (cfg.grid_points - 1) as f64;
    let x: Vec<f64> = (0..cfg.grid_points).map(|i| i as f64 / last).collect();
    let rho = x
        .iter()
        .map(|&xv| {
            trusts
                .iter()
                .map(|q| prefactor * (-(q - xv).powi(2) / (2.0 * h * h)).exp())
                .sum::<f64>()
                / n
        })
        .collect();
    Ok(DensityCurve { x, rho })
}

/// Mean trust per named group; fails naming the first empty group.
pub fn trust_spectrum(groups: &[(String, Vec<f64>)]) -> Result<Vec<(String, f64)>> {
    groups
        .iter()
        .map(|(name, q)| {
            if q.is_empty() {
                Err(Error::Data(format!("class '{name}' has no trust values")))
            } else {
                Ok((name.clone(), q.iter().sum::<f64>() / q.len() as f64))
            }
        })
        .collect()
}

/// Unweighted mean of the per-class spectra.
pub fn net_trust_score(spectra: &[f64]) -> Result<f64> {
    if spectra.is_empty() {
        return Err(Error::InvalidArgument("NetTrustScore of no classes".into()));
    }
    Ok(spectra.iter().sum::<f64>() / spectra.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassTrust {
    pub class: String,
    pub count: usize,
    pub spectrum: f64,
    pub density: DensityCurve,
}

/// Trust spectrum, per-class density and NetTrustScore, with records
/// grouped by their true class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrustReport {
    pub config: TrustConfig,
    pub classes: Vec<ClassTrust>,
    pub net_trust_score: f64,
}

impl TrustReport {
    /// `class_names[i]` names true-class index `i`.
    pub fn from_records(records: &[TrustRecord], class_names: &[&str], cfg: &TrustConfig) -> Result<Self> {
        cfg.validate()?;
        let mut groups: Vec<(String, Vec<f64>)> =
            class_names.iter().map(|n| (n.to_string(), Vec::new())).collect();
        for r in records {
            let g = groups.get_mut(r.truth).ok_or_else(|| {
                Error::InvalidArgument(format!("true class {} has no name among {}", r.truth, class_names.len()))
            })?;
            g.1.push(qa_trust(r, cfg));
        }
        let spectrum = trust_spectrum(&groups)?;
        let net = net_trust_score(&spectrum.iter().map(|s| s.1).collect::<Vec<_>>())?;
        let classes = groups
            .iter()
            .zip(spectrum)
            .map(|((_, q), (class, t))| {
                Ok(ClassTrust {
                    class,
                    count: q.len(),
                    spectrum: t,
                    density: trust_density(q, cfg)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(TrustReport {
            config: *cfg,
            classes,
            net_trust_score: net,
        })
    }

    /// Long-format density samples: `class,x,rho`.
    pub fn density_csv(&self) -> String {
        let mut out = String::from("class,x,rho\n");
        for c in &self.classes {
            for (x, r) in c.density.x.iter().zip(&c.density.rho) {
                out.push_str(&format!("{},{x},{r}\n", c.class));
            }
        }
        out
    }
}
