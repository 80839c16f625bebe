//! Truncated explicit formulas for the normalized races.
//!
//! With S_w(x) = Σ_χ (χ̄(a) − χ̄(b)) Σ_{|γ|≤T0} w(γ) x^{iγ}/(½ + iγ), summed
//! over nonprincipal χ,
//!
//! * predicted delta_norm  = (N(q,b) − N(q,a))/φ(q) − κ Re S_m(x)
//! * predicted delta2_norm = (1/2φ(q)) Σ_χ (χ̄(a) − χ̄(b)) A(χ) + κ Re S_{m²}(x)
//!
//! The constant in the second line equals (N(q,a) − N(q,b))/(2φ(q)).
//! Ordinates below the axis are not stored: the zeros of L(s,χ) at −γ are the
//! conjugates of those of L(s,χ̄) at γ, so [`raw_sum`] reads them from the
//! conjugate character's list. κ = 1/φ(q) is the classical normalization;
//! κ = 1 is kept for comparison and [`select_kappa`] picks by RMS.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::race::{RaceConfig, RaceSeries};
use crate::zeros::{CharacterGroup, ZeroError, ZeroSet};

pub const MIN_X: f64 = 10.0;

#[derive(Debug, Error)]
pub enum ExplicitError {
    #[error(transparent)]
    Zeros(#[from] ZeroError),
    #[error("zeros for chi={chi} only reach height {height}, below T0={t0}")]
    Incomplete { chi: usize, height: f64, t0: f64 },
    #[error("x={0} is below the minimum {MIN_X}")]
    SmallX(f64),
    #[error("zero set is for q={found}, race is mod {expected}")]
    ModulusMismatch { expected: u64, found: u64 },
    #[error("grid error: {0}")]
    Grid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kappa {
    /// κ = 1/φ(q).
    InversePhi,
    /// κ = 1.
    One,
}

impl Kappa {
    pub fn value(self, phi: u64) -> f64 {
        match self {
            Kappa::InversePhi => 1.0 / phi as f64,
            Kappa::One => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kappa::InversePhi => "inverse-phi",
            Kappa::One => "one",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    /// m(γ), for the prime race.
    Multiplicity,
    /// m(γ)², for the semiprime race.
    MultiplicitySquared,
}

/// Character data and zero lists checked against one race and T0.
#[derive(Debug, Clone)]
pub struct ExplicitModel {
    config: RaceConfig,
    t0: f64,
    /// Per nonprincipal χ: χ̄(a) − χ̄(b), A(χ), and (γ, m) for 0 < |γ| ≤ T0 with sign.
    characters: Vec<CharacterTerms>,
    bias2: f64,
}

#[derive(Debug, Clone)]
struct CharacterTerms {
    coefficient: Complex64,
    zeros: Vec<(f64, u32)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedPrediction {
    pub x: f64,
    pub t0: f64,
    pub predicted_delta_norm: f64,
    pub predicted_delta2_norm: f64,
}

impl ExplicitModel {
    pub fn new(cfg: &RaceConfig, zeros: &ZeroSet, t0: f64) -> Result<Self, ExplicitError> {
        if zeros.q() != cfg.q {
            return Err(ExplicitError::ModulusMismatch { expected: cfg.q, found: zeros.q() });
        }
        if !(t0.is_finite() && t0 >= 0.0) {
            return Err(ExplicitError::Grid(format!("T0 must be finite and non-negative, got {t0}")));
        }
        let group = CharacterGroup::new(cfg.q)?;
        let mut characters = Vec::new();
        let mut bias2 = Complex64::new(0.0, 0.0);
        for chi in group.iter().filter(|c| !c.is_principal) {
            let coefficient = chi.conj_value(cfg.a) - chi.conj_value(cfg.b);
            bias2 += coefficient * chi.a_chi() as f64;
            let conj = group.conjugate_index(chi.index)?;
            let mut list = Vec::new();
            for (index, sign) in [(chi.index, 1.0), (conj, -1.0)] {
                let zl = zeros.get(index)?;
                if zl.height() < t0 {
                    return Err(ExplicitError::Incomplete { chi: index, height: zl.height(), t0 });
                }
                list.extend(zl.up_to(t0).map(|(g, m)| (sign * g, m)));
            }
            characters.push(CharacterTerms { coefficient, zeros: list });
        }
        let bias2 = bias2.re / (2.0 * cfg.phi_q as f64);
        Ok(ExplicitModel { config: cfg.clone(), t0, characters, bias2 })
    }

    pub fn config(&self) -> &RaceConfig {
        &self.config
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    /// S_w(x) before taking the real part.
    pub fn raw_sum(&self, x: f64, weight: Weight) -> Complex64 {
        let ln_x = x.ln();
        let mut total = Complex64::new(0.0, 0.0);
        for ch in &self.characters {
            let mut inner = Complex64::new(0.0, 0.0);
            for &(gamma, m) in &ch.zeros {
                let w = match weight {
                    Weight::Multiplicity => m as f64,
                    Weight::MultiplicitySquared => (m * m) as f64,
                };
                let (s, c) = (gamma * ln_x).sin_cos();
                inner += Complex64::new(c, s) * w / Complex64::new(0.5, gamma);
            }
            total += ch.coefficient * inner;
        }
        total
    }

    /// (N(q,a) − N(q,b))/(2φ(q)), the T0 = 0 value of the semiprime prediction.
    pub fn semiprime_bias(&self) -> f64 {
        self.bias2
    }

    pub fn predict_delta(&self, x: f64, kappa: Kappa) -> Result<f64, ExplicitError> {
        check_x(x)?;
        let k = kappa.value(self.config.phi_q);
        Ok(self.config.prime_bias() - k * self.raw_sum(x, Weight::Multiplicity).re)
    }

    pub fn predict_delta2(&self, x: f64, kappa: Kappa) -> Result<f64, ExplicitError> {
        check_x(x)?;
        let k = kappa.value(self.config.phi_q);
        Ok(self.bias2 + k * self.raw_sum(x, Weight::MultiplicitySquared).re)
    }

    pub fn predict(&self, x: f64, kappa: Kappa) -> Result<TruncatedPrediction, ExplicitError> {
        Ok(TruncatedPrediction {
            x,
            t0: self.t0,
            predicted_delta_norm: self.predict_delta(x, kappa)?,
            predicted_delta2_norm: self.predict_delta2(x, kappa)?,
        })
    }

    /// [`Self::predict`] over a grid, in parallel.
    pub fn predict_grid(&self, xs: &[f64], kappa: Kappa) -> Result<Vec<TruncatedPrediction>, ExplicitError> {
        xs.par_iter().map(|&x| self.predict(x, kappa)).collect()
    }
}

fn check_x(x: f64) -> Result<(), ExplicitError> {
    if !(x >= MIN_X && x.is_finite()) {
        return Err(ExplicitError::SmallX(x));
    }
    Ok(())
}

pub fn predict_delta(x: f64, cfg: &RaceConfig, zeros: &ZeroSet, t0: f64, kappa: Kappa) -> Result<f64, ExplicitError> {
    ExplicitModel::new(cfg, zeros, t0)?.predict_delta(x, kappa)
}

pub fn predict_delta2(x: f64, cfg: &RaceConfig, zeros: &ZeroSet, t0: f64, kappa: Kappa) -> Result<f64, ExplicitError> {
    ExplicitModel::new(cfg, zeros, t0)?.predict_delta2(x, kappa)
}

/// Trapezoid integral of g over [lo, hi], interpolating linearly at the ends.
fn trapezoid(ys: &[f64], gs: &[f64], lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> Result<f64, ExplicitError> {
    if ys.len() != gs.len() || ys.len() < 2 {
        return Err(ExplicitError::Grid("need at least two samples with matching lengths".into()));
    }
    if ys.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ExplicitError::Grid("grid must be strictly ascending".into()));
    }
    if !(lo < hi) || ys[0] > lo || *ys.last().unwrap() < hi {
        return Err(ExplicitError::Grid(format!(
            "grid [{}, {}] does not cover [{lo}, {hi}]",
            ys[0],
            ys.last().unwrap()
        )));
    }
    let at = |y: f64| {
        let i = ys.partition_point(|&v| v <= y).clamp(1, ys.len() - 1);
        let t = (y - ys[i - 1]) / (ys[i] - ys[i - 1]);
        gs[i - 1] + t * (gs[i] - gs[i - 1])
    };
    let mut pts = vec![(lo, at(lo))];
    pts.extend(ys.iter().zip(gs).filter(|(&y, _)| y > lo && y < hi).map(|(&y, &g)| (y, g)));
    pts.push((hi, at(hi)));
    Ok(pts.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (f(w[0].1) + f(w[1].1))).sum())
}

/// (1/Y) ∫_1^Y g(y)² dy by trapezoid on the sampled grid.
pub fn residual_mean_square(ys: &[f64], gs: &[f64], y_max: f64) -> Result<f64, ExplicitError> {
    Ok(trapezoid(ys, gs, 1.0, y_max, |g| g * g)? / y_max)
}

/// (1/(y1 − y0)) ∫_{y0}^{y1} g(y)² dy.
pub fn mean_square_over(ys: &[f64], gs: &[f64], y0: f64, y1: f64) -> Result<f64, ExplicitError> {
    Ok(trapezoid(ys, gs, y0, y1, |g| g * g)? / (y1 - y0))
}

/// (1/(y1 − y0)) ∫_{y0}^{y1} g(y) dy, the log-uniform window mean when y = log x.
pub fn windowed_mean(ys: &[f64], gs: &[f64], y0: f64, y1: f64) -> Result<f64, ExplicitError> {
    Ok(trapezoid(ys, gs, y0, y1, |g| g)? / (y1 - y0))
}

pub fn rms(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    if n == 0 {
        return 0.0;
    }
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub x: u64,
    pub measured_delta_norm: f64,
    pub predicted_delta_norm: f64,
    pub measured_delta2_norm: f64,
    pub predicted_delta2_norm: f64,
}

/// Predictions beside sieved values on the grid points x ≥ 10.
pub fn compare(model: &ExplicitModel, series: &RaceSeries, kappa: Kappa) -> Result<Vec<ComparisonRow>, ExplicitError> {
    (0..series.len())
        .into_par_iter()
        .filter(|&i| series.grid[i] as f64 >= MIN_X)
        .map(|i| {
            let x = series.grid[i];
            let p = model.predict(x as f64, kappa)?;
            Ok(ComparisonRow {
                x,
                measured_delta_norm: series.delta_norm[i],
                predicted_delta_norm: p.predicted_delta_norm,
                measured_delta2_norm: series.delta2_norm[i],
                predicted_delta2_norm: p.predicted_delta2_norm,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaChoice {
    pub kappa: Kappa,
    pub rms_inverse_phi: f64,
    pub rms_one: f64,
}

impl KappaChoice {
    pub fn rms(&self) -> f64 {
        match self.kappa {
            Kappa::InversePhi => self.rms_inverse_phi,
            Kappa::One => self.rms_one,
        }
    }
}

/// The κ whose delta_norm predictions have the smaller RMS against `series`.
pub fn select_kappa(model: &ExplicitModel, series: &RaceSeries) -> Result<KappaChoice, ExplicitError> {
    let rms_for = |kappa| -> Result<f64, ExplicitError> {
        let rows = compare(model, series, kappa)?;
        let measured: Vec<f64> = rows.iter().map(|r| r.measured_delta_norm).collect();
        let predicted: Vec<f64> = rows.iter().map(|r| r.predicted_delta_norm).collect();
        Ok(rms(&measured, &predicted))
    };
    let rms_inverse_phi = rms_for(Kappa::InversePhi)?;
    let rms_one = rms_for(Kappa::One)?;
    let kappa = if rms_inverse_phi <= rms_one { Kappa::InversePhi } else { Kappa::One };
    Ok(KappaChoice { kappa, rms_inverse_phi, rms_one })
}
