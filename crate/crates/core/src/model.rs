//! The limiting distribution of the normalized race and its densities.
//!
//! Under GRH and linear independence of zero ordinates,
//!
//! X = c + Σ_χ Σ_{0<γ≤T} 2 Re(z_γ w_γ) + tail,
//!
//! with c = (N(q,b) − N(q,a))/φ(q), w_γ = m(γ) (χ̄(b) − χ̄(a)) / (φ(q)(½ + iγ))
//! and z_γ independent and uniform on the unit circle. Zeros of χ below the
//! real axis appear as the positive zeros of χ̄, so the sum runs over every
//! nonprincipal χ and positive γ only.
//!
//! The ordinates above T are replaced per character by a circular complex
//! Gaussian S_χ with E|S_χ|² = ∫_T^∞ ρ_χ(t)/(¼ + t²) dt, where
//! ρ_χ(t) = log(f t / 2π)/(2π) is the zero density at conductor f. S_χ
//! enters as 2 Re(c_χ S_χ) with c_χ = (χ̄(b) − χ̄(a))/φ(q), so joint samples for
//! several pairs see the same tail draw.
//!
//! δ = P[X > 0], δ2 = P[X < c/2]. Sampling uses ChaCha8 with one stream per
//! shard of [`SHARD_SIZE`] draws, so results do not depend on thread count.

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

pub use crate::arith::n_sqrt;
use crate::race::RaceConfig;
use crate::zeros::{CharacterGroup, ZeroError, ZeroSet};

/// Identifier recorded in run metadata.
pub const RNG_ALGORITHM: &str = "chacha8";
pub const SHARD_SIZE: u64 = 1 << 16;
pub const MIN_DENSITY_SAMPLES: u64 = 10_000;
pub const DEFAULT_HEIGHT: f64 = 300.0;
pub const DEFAULT_SAMPLES: u64 = 2_000_000;
/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Zeros(#[from] ZeroError),
    #[error("zero set is for q={found}, race is mod {expected}")]
    ModulusMismatch { expected: u64, found: u64 },
    #[error("{0}")]
    Incompatible(String),
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: u64, got: u64 },
    #[error("sign pattern has {got} entries for {expected} races")]
    PatternLength { expected: usize, got: usize },
    #[error("joint probability needs at least one race")]
    Empty,
}

/// One zero ordinate of one character.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub chi: usize,
    pub gamma: f64,
    pub amplitude: Complex64,
}

/// Gaussian stand-in for the ordinates of one character above the height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailComponent {
    pub chi: usize,
    /// c_χ = (χ̄(b) − χ̄(a))/φ(q).
    pub coefficient: Complex64,
    /// E|S_χ|².
    pub variance: f64,
}

#[derive(Debug, Clone)]
pub struct LimitRV {
    pub config: RaceConfig,
    pub mean: f64,
    pub terms: Vec<Term>,
    pub tail: Vec<TailComponent>,
    pub tail_sigma: f64,
    pub zero_height: f64,
}

impl LimitRV {
    /// Total variance Σ 2|w_γ|² + tail_sigma².
    pub fn variance(&self) -> f64 {
        self.terms.iter().map(|t| 2.0 * t.amplitude.norm_sqr()).sum::<f64>() + self.tail_sigma.powi(2)
    }

    /// Mean, amplitudes and tail multiplied by λ > 0.
    pub fn scaled(&self, lambda: f64) -> LimitRV {
        let mut out = self.clone();
        out.mean *= lambda;
        for t in &mut out.terms {
            t.amplitude *= lambda;
        }
        for c in &mut out.tail {
            c.coefficient *= lambda;
        }
        out.tail_sigma *= lambda;
        out
    }

    /// c/2, the δ2 threshold, at the current scale.
    pub fn half_mean(&self) -> f64 {
        self.mean / 2.0
    }
}

/// ∫_T^∞ ρ(t)/(¼ + t²) dt with ρ(t) = max(0, log(f t/2π)/(2π)).
pub fn tail_integral(conductor: u64, height: f64) -> f64 {
    const SPAN: f64 = 60.0;
    const INTERVALS: usize = 6000;
    let f = conductor as f64;
    let lower = height.max(std::f64::consts::TAU / f);
    // t = lower·e^v, dt = t dv; the integrand decays like e^{-v}.
    let g = |v: f64| {
        let t = lower * v.exp();
        let rho = ((f * t / std::f64::consts::TAU).ln() / std::f64::consts::TAU).max(0.0);
        rho * t / (0.25 + t * t)
    };
    let h = SPAN / INTERVALS as f64;
    let mut sum = g(0.0) + g(SPAN);
    for k in 1..INTERVALS {
        sum += g(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

pub fn build_limit_rv(cfg: &RaceConfig, zeros: &ZeroSet) -> Result<LimitRV, ModelError> {
    if zeros.q() != cfg.q {
        return Err(ModelError::ModulusMismatch { expected: cfg.q, found: zeros.q() });
    }
    let group = CharacterGroup::new(cfg.q)?;
    let height = zeros.common_height(&group)?;
    let phi = cfg.phi_q as f64;
    let mut terms = Vec::new();
    let mut tail = Vec::new();
    for chi in group.iter().filter(|c| !c.is_principal) {
        let coefficient = (chi.conj_value(cfg.b) - chi.conj_value(cfg.a)) / phi;
        for (gamma, m) in zeros.get(chi.index)?.up_to(height) {
            let amplitude = coefficient * m as f64 / Complex64::new(0.5, gamma);
            terms.push(Term { chi: chi.index, gamma, amplitude });
        }
        if coefficient.norm_sqr() > 0.0 {
            tail.push(TailComponent { chi: chi.index, coefficient, variance: tail_integral(chi.conductor(), height) });
        }
    }
    let tail_sigma = tail.iter().map(|c| 2.0 * c.coefficient.norm_sqr() * c.variance).sum::<f64>().sqrt();
    Ok(LimitRV { config: cfg.clone(), mean: cfg.prime_bias(), terms, tail, tail_sigma, zero_height: height })
}

/// (cos θ, sin θ) for θ uniform on [0, 2π).
///
/// Rejection-samples a point in the unit disk from the two 32-bit halves of
/// one word, then doubles its angle so no square root or trig call is needed.
#[inline]
fn unit_phase(rng: &mut ChaCha8Rng) -> (f64, f64) {
    const SCALE: f64 = 1.0 / 2_147_483_648.0;
    loop {
        let word = rng.next_u64();
        let x = (word as u32 as i32) as f64 * SCALE;
        let y = ((word >> 32) as u32 as i32) as f64 * SCALE;
        let r2 = x * x + y * y;
        if r2 <= 1.0 && r2 > 0.0 {
            let inv = 1.0 / r2;
            return ((x * x - y * y) * inv, 2.0 * x * y * inv);
        }
    }
}

/// Shared-phase sampler for one or more races over the same zeros.
struct Engine {
    pairs: usize,
    means: Vec<f64>,
    /// `amps[k * pairs + i]` = 2 w for term k, race i.
    amps: Vec<Complex64>,
    /// `tail[j * pairs + i]` = 2 c_χ · sqrt(E|S|²/2) for tail character j.
    tail: Vec<Complex64>,
    tail_chars: usize,
}

impl Engine {
    fn new(rvs: &[&LimitRV]) -> Result<Self, ModelError> {
        let first = rvs.first().ok_or(ModelError::Empty)?;
        let pairs = rvs.len();
        for rv in &rvs[1..] {
            if rv.config.q != first.config.q {
                return Err(ModelError::ModulusMismatch { expected: first.config.q, found: rv.config.q });
            }
            let same_terms = rv.terms.len() == first.terms.len()
                && rv.terms.iter().zip(&first.terms).all(|(x, y)| x.chi == y.chi && x.gamma == y.gamma);
            if !same_terms || rv.zero_height != first.zero_height {
                return Err(ModelError::Incompatible("joint races must be built from the same zero set".into()));
            }
        }
        let mut amps = Vec::with_capacity(first.terms.len() * pairs);
        for k in 0..first.terms.len() {
            for rv in rvs {
                amps.push(rv.terms[k].amplitude * 2.0);
            }
        }
        // Tail characters: union over races, each race contributing its own coefficient.
        let mut chars: Vec<(usize, f64)> = Vec::new();
        for rv in rvs {
            for c in &rv.tail {
                if !chars.iter().any(|&(chi, _)| chi == c.chi) {
                    chars.push((c.chi, c.variance));
                }
            }
        }
        let mut tail = Vec::with_capacity(chars.len() * pairs);
        for &(chi, var) in &chars {
            let scale = (var / 2.0).sqrt();
            for rv in rvs {
                let coeff = rv.tail.iter().find(|c| c.chi == chi).map_or(Complex64::new(0.0, 0.0), |c| c.coefficient);
                tail.push(coeff * 2.0 * scale);
            }
        }
        Ok(Engine { pairs, means: rvs.iter().map(|rv| rv.mean).collect(), amps, tail, tail_chars: chars.len() })
    }

    /// Fills `out` (length `pairs`) with one joint draw.
    #[inline]
    fn draw(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        out.copy_from_slice(&self.means);
        let p = self.pairs;
        if p == 1 {
            let mut acc = 0.0;
            for w in &self.amps {
                let (c, s) = unit_phase(rng);
                acc += w.re * c - w.im * s;
            }
            out[0] += acc;
        } else {
            for k in 0..self.amps.len() / p {
                let (c, s) = unit_phase(rng);
                for (i, o) in out.iter_mut().enumerate() {
                    let w = self.amps[k * p + i];
                    *o += w.re * c - w.im * s;
                }
            }
        }
        for j in 0..self.tail_chars {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            for (i, o) in out.iter_mut().enumerate() {
                let w = self.tail[j * p + i];
                *o += w.re * re - w.im * im;
            }
        }
    }

    /// Runs `count` draws in shards and folds each shard with `visit`.
    fn run<A, F>(&self, count: u64, seed: u64, init: A, visit: F) -> Vec<A>
    where
        A: Send + Sync + Clone,
        F: Fn(&mut A, &[f64]) + Sync,
    {
        let shards = count.div_ceil(SHARD_SIZE);
        (0..shards)
            .into_par_iter()
            .map(|shard| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(shard);
                let n = SHARD_SIZE.min(count - shard * SHARD_SIZE);
                let mut acc = init.clone();
                let mut buf = vec![0.0; self.pairs];
                for _ in 0..n {
                    self.draw(&mut rng, &mut buf);
                    visit(&mut acc, &buf);
                }
                acc
            })
            .collect()
    }
}

/// `count` draws of X, deterministic in `seed`.
pub fn sample(rv: &LimitRV, count: u64, seed: u64) -> Vec<f64> {
    let engine = Engine::new(&[rv]).expect("single race is always compatible");
    engine
        .run(count, seed, Vec::new(), |acc: &mut Vec<f64>, x| acc.push(x[0]))
        .into_iter()
        .flatten()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityEstimate {
    /// Fraction of draws in the event.
    pub value: f64,
    /// Wilson 95% half-width.
    pub half_width: f64,
    pub samples: u64,
    pub zero_height: f64,
    pub tail_sigma: f64,
}

impl DensityEstimate {
    fn from_hits(hits: u64, samples: u64, zero_height: f64, tail_sigma: f64) -> Self {
        let n = samples as f64;
        let p = hits as f64 / n;
        let z2 = Z95 * Z95;
        let half_width = Z95 / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
        DensityEstimate { value: p, half_width, samples, zero_height, tail_sigma }
    }
}

fn check_count(count: u64) -> Result<(), ModelError> {
    if count < MIN_DENSITY_SAMPLES {
        return Err(ModelError::TooFewSamples { min: MIN_DENSITY_SAMPLES, got: count });
    }
    Ok(())
}

fn count_hits(engine: &Engine, count: u64, seed: u64, event: impl Fn(&[f64]) -> bool + Sync) -> u64 {
    engine
        .run(count, seed, 0u64, |acc, x| *acc += u64::from(event(x)))
        .into_iter()
        .sum()
}

/// δ(q;a,b) = P[X > 0].
pub fn density_delta(rv: &LimitRV, count: u64, seed: u64) -> Result<DensityEstimate, ModelError> {
    check_count(count)?;
    let engine = Engine::new(&[rv])?;
    let hits = count_hits(&engine, count, seed, |x| x[0] > 0.0);
    Ok(DensityEstimate::from_hits(hits, count, rv.zero_height, rv.tail_sigma))
}

/// δ2(q;a,b) = P[X < c/2].
pub fn density_delta2(rv: &LimitRV, count: u64, seed: u64) -> Result<DensityEstimate, ModelError> {
    joint_probability(&[rv], &[Sign::Positive], count, seed)
}

/// Sign of Y_i = c_i/2 − X_i, the reflected coordinate of a joint race.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
}

/// P[sign(c_i/2 − X_i) = pattern_i for all i] with shared phases.
pub fn joint_probability(
    rvs: &[&LimitRV],
    pattern: &[Sign],
    count: u64,
    seed: u64,
) -> Result<DensityEstimate, ModelError> {
    check_count(count)?;
    if pattern.len() != rvs.len() {
        return Err(ModelError::PatternLength { expected: rvs.len(), got: pattern.len() });
    }
    let engine = Engine::new(rvs)?;
    let thresholds: Vec<f64> = rvs.iter().map(|rv| rv.half_mean()).collect();
    let hits = count_hits(&engine, count, seed, |x| {
        x.iter().zip(&thresholds).zip(pattern).all(|((&xi, &c), s)| match s {
            Sign::Positive => xi < c,
            Sign::Negative => xi > c,
        })
    });
    let tail_sigma = rvs.iter().map(|rv| rv.tail_sigma).fold(0.0, f64::max);
    Ok(DensityEstimate::from_hits(hits, count, rvs[0].zero_height, tail_sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zeros::{ZeroList, ZeroSource};

    fn q4_zeros(gammas: Vec<f64>, height: f64) -> ZeroSet {
        let mut set = ZeroSet::new(4);
        let m = vec![1; gammas.len()];
        set.insert(ZeroList::new(4, 1, gammas, m, height, ZeroSource::Ingested).unwrap()).unwrap();
        set
    }

    #[test]
    fn means_and_amplitudes() {
        let zeros = q4_zeros(vec![6.020948904697597, 10.243770304166555], 12.0);
        let rv = build_limit_rv(&RaceConfig::new(4, 3, 1).unwrap(), &zeros).unwrap();
        assert_eq!(rv.mean, 1.0);
        // c_χ = (χ(1) − χ(3))/2 = 1
        let w = rv.terms[0].amplitude;
        assert!((w - Complex64::new(0.5, 6.020948904697597).inv()).norm() < 1e-15);
        let back = build_limit_rv(&RaceConfig::new(4, 1, 3).unwrap(), &zeros).unwrap();
        assert_eq!(back.mean, -1.0);
        for (x, y) in rv.terms.iter().zip(&back.terms) {
            assert_eq!(x.amplitude, -y.amplitude);
        }
        assert_eq!(rv.tail_sigma, back.tail_sigma);
    }

    #[test]
    fn tail_integral_matches_quadrature() {
        // mpmath.quad of the same integrand, dps 30
        let cases = [
            (4, 300.0, 0.003_316_892_251_260_453),
            (4, 100.0, 0.008_202_129_713_327_493),
            (3, 300.0, 0.003_164_272_313_009_7),
            (4, 0.0, 0.100_220_098_073_868_31),
        ];
        for (f, t, want) in cases {
            let got = tail_integral(f, t);
            assert!((got - want).abs() < 1e-10 * want.max(1e-3), "f={f} T={t}: {got}");
        }
    }

    #[test]
    fn degenerate_height_is_gaussian() {
        let zeros = q4_zeros(vec![], 0.0);
        let rv = build_limit_rv(&RaceConfig::new(4, 3, 1).unwrap(), &zeros).unwrap();
        assert!(rv.terms.is_empty());
        let want = (2.0 * 0.100_220_098_073_868_31f64).sqrt();
        assert!((rv.tail_sigma - want).abs() < 1e-9);
        let xs = sample(&rv, 200_000, 3);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!((mean - 1.0).abs() < 4.0 * want / 200_000f64.sqrt());
        assert!((var.sqrt() / want - 1.0).abs() < 0.01);
    }

    #[test]
    fn constant_variable() {
        let mut rv = build_limit_rv(&RaceConfig::new(4, 3, 1).unwrap(), &q4_zeros(vec![], 0.0)).unwrap();
        rv.tail.clear();
        rv.tail_sigma = 0.0;
        assert!(sample(&rv, 1000, 1).iter().all(|&x| x == 1.0));
        let d = density_delta(&rv, 10_000, 1).unwrap();
        assert_eq!(d.value, 1.0);
        assert!(d.half_width > 0.0);
    }

    #[test]
    fn wilson_interval() {
        // statsmodels proportion_confint(30, 100, method="wilson")
        let d = DensityEstimate::from_hits(30, 100, 0.0, 0.0);
        let want = (0.395_848_546_333_466_67 - 0.218_948_852_949_327_56) / 2.0;
        assert!((d.half_width - want).abs() < 1e-12, "{}", d.half_width);
    }

    #[test]
    fn unit_phase_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let n = 400_000;
        let mut sums = [0.0f64; 4];
        let mut quadrants = [0u32; 8];
        for _ in 0..n {
            let (c, s) = unit_phase(&mut rng);
            assert!((c * c + s * s - 1.0).abs() < 1e-12);
            sums[0] += c;
            sums[1] += s;
            sums[2] += c * c;
            sums[3] += c * s;
            let octant = (s.atan2(c).rem_euclid(std::f64::consts::TAU) / (std::f64::consts::TAU / 8.0)) as usize;
            quadrants[octant.min(7)] += 1;
        }
        let tol = 5.0 / (n as f64).sqrt();
        assert!((sums[0] / n as f64).abs() < tol);
        assert!((sums[1] / n as f64).abs() < tol);
        assert!((sums[2] / n as f64 - 0.5).abs() < tol);
        assert!((sums[3] / n as f64).abs() < tol);
        for q in quadrants {
            assert!((q as f64 / n as f64 - 0.125).abs() < tol);
        }
    }

    #[test]
    fn too_few_samples() {
        let rv = build_limit_rv(&RaceConfig::new(4, 3, 1).unwrap(), &q4_zeros(vec![], 10.0)).unwrap();
        assert!(matches!(density_delta(&rv, 100, 0), Err(ModelError::TooFewSamples { .. })));
    }

    #[test]
    fn modulus_checks() {
        let zeros = q4_zeros(vec![], 10.0);
        assert!(matches!(
            build_limit_rv(&RaceConfig::new(5, 2, 1).unwrap(), &zeros),
            Err(ModelError::ModulusMismatch { .. })
        ));
    }
}
