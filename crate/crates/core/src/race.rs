//! Prime and semiprime race functions in arithmetic progressions.
//!
//! The sieve stream is folded into [`CountVector`]s at caller-chosen
//! checkpoints. From those come Δ(x;q,a,b) = π(x;q,a) − π(x;q,b), its
//! semiprime analogue Δ2, the normalized signals
//!
//! ```text
//! delta_norm  = (log x / √x) · Δ
//! delta2_norm = (log x / (√x · log log x)) · Δ2
//! sigma       = delta2_norm − (N(q,b) − N(q,a)) / (2φ(q)) + delta_norm
//! ```
//!
//! and the exact integer scans for first sign changes and empirical
//! logarithmic densities.

use std::ops::ControlFlow;

use thiserror::Error;

use crate::arith::{coprime_residues, euler_phi, gcd, mod_inverse, n_sqrt};
use crate::sieve::{isqrt, BasePrimes, ClassifiedSegment, OmegaKind, SegmentedSieve, SieveError, MAX_LIMIT};

/// First grid point of the default sampling grid.
pub const DEFAULT_GRID_START: u64 = 1_000;
pub const DEFAULT_GRID_POINTS: usize = 400;

#[derive(Debug, Error)]
pub enum RaceError {
    #[error("invalid race configuration: {0}")]
    InvalidConfig(String),
    #[error("checkpoints must be strictly ascending and non-empty")]
    BadCheckpoints,
    #[error("stream gap: expected segment starting at {expected}, got {found}")]
    StreamGap { expected: u64, found: u64 },
    #[error("stream ended at {reached} but checkpoints run to {needed}")]
    StreamIncomplete { reached: u64, needed: u64 },
    #[error("normalization undefined at x = {0} (need x > e)")]
    UndefinedNormalization(u64),
    #[error("von Mangoldt double sums cannot be resumed from a partial state")]
    Psi2Resume,
    #[error("limit {0} out of range")]
    BadLimit(u64),
    #[error(transparent)]
    Sieve(#[from] SieveError),
}

/// A modulus with an ordered pair of distinct residues coprime to it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RaceConfig {
    pub q: u64,
    pub a: u64,
    pub b: u64,
    pub phi_q: u64,
    pub coprime_residues: Vec<u64>,
}

impl RaceConfig {
    pub fn new(q: u64, a: u64, b: u64) -> Result<Self, RaceError> {
        if q < 3 {
            return Err(RaceError::InvalidConfig(format!("modulus {q} must be at least 3")));
        }
        let (a, b) = (a % q, b % q);
        for r in [a, b] {
            if gcd(r, q) != 1 {
                return Err(RaceError::InvalidConfig(format!("residue {r} is not coprime to {q}")));
            }
        }
        if a == b {
            return Err(RaceError::InvalidConfig(format!("residues must differ (a = b = {a})")));
        }
        let coprime_residues = coprime_residues(q);
        Ok(RaceConfig {
            q,
            a,
            b,
            phi_q: euler_phi(q),
            coprime_residues,
        })
    }

    /// The same race with the roles of `a` and `b` exchanged.
    pub fn swapped(&self) -> Self {
        RaceConfig {
            a: self.b,
            b: self.a,
            ..self.clone()
        }
    }

    /// (N(q,b) − N(q,a)) / φ(q), the mean of the normalized prime race.
    pub fn prime_bias(&self) -> f64 {
        (n_sqrt(self.q, self.b) as f64 - n_sqrt(self.q, self.a) as f64) / self.phi_q as f64
    }

    /// (N(q,b) − N(q,a)) / (2φ(q)).
    pub fn half_bias(&self) -> f64 {
        self.prime_bias() / 2.0
    }
}

/// Counts up to `x`, indexed by residue (vectors have length `q`; entries
/// for residues not coprime to `q` stay zero).
#[derive(Debug, Clone, PartialEq)]
pub struct CountVector {
    pub x: u64,
    pub pi: Vec<u64>,
    pub pi2: Vec<u64>,
    /// Σ Λ(n) over n ≤ x in each class.
    pub psi: Vec<f64>,
    /// Σ Λ(m)Λ(n) over ordered pairs with mn ≤ x in each class. Empty unless
    /// requested through [`Accumulator::with_psi2`].
    pub psi2: Vec<f64>,
    /// All primes ≤ x, including those dividing q.
    pub primes_total: u64,
    /// All semiprimes ≤ x, including those sharing a factor with q.
    pub semiprimes_total: u64,
}

impl CountVector {
    pub fn zero(q: u64, x: u64) -> Self {
        let q = q as usize;
        CountVector {
            x,
            pi: vec![0; q],
            pi2: vec![0; q],
            psi: vec![0.0; q],
            psi2: Vec::new(),
            primes_total: 0,
            semiprimes_total: 0,
        }
    }

    pub fn q(&self) -> u64 {
        self.pi.len() as u64
    }
}

pub fn delta(cv: &CountVector, cfg: &RaceConfig) -> i64 {
    cv.pi[cfg.a as usize] as i64 - cv.pi[cfg.b as usize] as i64
}

pub fn delta2(cv: &CountVector, cfg: &RaceConfig) -> i64 {
    cv.pi2[cfg.a as usize] as i64 - cv.pi2[cfg.b as usize] as i64
}

/// Snapshots of ψ needed to assemble the ψ2 double sums by the hyperbola
/// method once the stream is complete.
#[derive(Debug)]
struct Psi2Plan {
    /// Prime powers m ≤ √(max checkpoint) coprime to q, with Λ(m).
    small: Vec<(u64, f64)>,
    queries: Vec<u64>,
    next: usize,
    snapshots: Vec<Vec<f64>>,
}

/// Streaming fold of classified segments into checkpointed counts.
#[derive(Debug)]
pub struct Accumulator {
    q: u64,
    coprime: Vec<bool>,
    checkpoints: Vec<u64>,
    next_cp: usize,
    next_n: u64,
    state: CountVector,
    /// Prime powers p^k (k ≥ 2) still ahead of the stream, with log p.
    powers: Vec<(u64, f64)>,
    next_power: usize,
    psi2: Option<Psi2Plan>,
    out: Vec<CountVector>,
}

impl Accumulator {
    pub fn new(q: u64, checkpoints: &[u64]) -> Result<Self, RaceError> {
        Self::from_state(CountVector::zero(q, 1), checkpoints)
    }

    /// Continues from counts already valid at `state.x`; the stream must
    /// start at `state.x + 1`.
    pub fn resume(state: CountVector, checkpoints: &[u64]) -> Result<Self, RaceError> {
        Self::from_state(state, checkpoints)
    }

    fn from_state(state: CountVector, checkpoints: &[u64]) -> Result<Self, RaceError> {
        let q = state.q();
        if q < 1 {
            return Err(RaceError::InvalidConfig("modulus must be positive".into()));
        }
        if checkpoints.is_empty() || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(RaceError::BadCheckpoints);
        }
        let max = *checkpoints.last().unwrap();
        if max > MAX_LIMIT {
            return Err(RaceError::BadLimit(max));
        }
        let start = state.x;
        let mut powers = Vec::new();
        for &p in BasePrimes::up_to(isqrt(max)).primes() {
            let lp = (p as f64).ln();
            let mut pk = p * p;
            while pk <= max {
                if pk > start && gcd(pk, q) == 1 {
                    powers.push((pk, lp));
                }
                pk *= p;
            }
        }
        powers.sort_by_key(|&(m, _)| m);
        let mut acc = Accumulator {
            q,
            coprime: (0..q).map(|r| gcd(r, q) == 1).collect(),
            checkpoints: checkpoints.to_vec(),
            next_cp: 0,
            next_n: start + 1,
            state,
            powers,
            next_power: 0,
            psi2: None,
            out: Vec::with_capacity(checkpoints.len()),
        };
        acc.flush_checkpoints();
        Ok(acc)
    }

    /// Also compute the ψ2 double sums. Only valid for a fresh accumulator.
    pub fn with_psi2(mut self) -> Result<Self, RaceError> {
        if self.state.x > 1 || !self.out.is_empty() {
            return Err(RaceError::Psi2Resume);
        }
        let q = self.q;
        let max = *self.checkpoints.last().unwrap();
        let mut small = Vec::new();
        for &p in BasePrimes::up_to(isqrt(max)).primes() {
            if q.is_multiple_of(p) {
                continue;
            }
            let lp = (p as f64).ln();
            let mut pk = p;
            while pk <= isqrt(max) {
                small.push((pk, lp));
                pk *= p;
            }
        }
        small.sort_by_key(|&(m, _)| m);
        let mut queries = Vec::new();
        for &x in &self.checkpoints {
            let s = isqrt(x);
            queries.push(s);
            queries.extend(small.iter().take_while(|&&(m, _)| m <= s).map(|&(m, _)| x / m));
        }
        queries.sort_unstable();
        queries.dedup();
        let mut plan = Psi2Plan {
            small,
            queries,
            next: 0,
            snapshots: Vec::new(),
        };
        while plan.next < plan.queries.len() && plan.queries[plan.next] < self.next_n {
            plan.snapshots.push(vec![0.0; q as usize]);
            plan.next += 1;
        }
        self.psi2 = Some(plan);
        Ok(self)
    }

    /// Next integer the stream must deliver.
    pub fn expected_next(&self) -> u64 {
        self.next_n
    }

    /// True once every checkpoint has been emitted.
    pub fn is_done(&self) -> bool {
        self.next_cp == self.checkpoints.len()
    }

    fn flush_checkpoints(&mut self) {
        while self.next_cp < self.checkpoints.len() && self.checkpoints[self.next_cp] < self.next_n {
            let mut cv = self.state.clone();
            cv.x = self.checkpoints[self.next_cp];
            self.out.push(cv);
            self.next_cp += 1;
        }
    }

    pub fn feed(&mut self, seg: &ClassifiedSegment) -> Result<(), RaceError> {
        if seg.lo() != self.next_n {
            return Err(RaceError::StreamGap { expected: self.next_n, found: seg.lo() });
        }
        let q = self.q;
        let mut r = seg.lo() % q;
        let mut next_event = self.next_event();
        for (i, &w) in seg.omega_values().iter().enumerate() {
            let n = seg.lo() + i as u64;
            match w {
                1 => {
                    self.state.primes_total += 1;
                    if self.coprime[r as usize] {
                        self.state.pi[r as usize] += 1;
                        self.state.psi[r as usize] += (n as f64).ln();
                    }
                }
                2 => {
                    self.state.semiprimes_total += 1;
                    if self.coprime[r as usize] {
                        self.state.pi2[r as usize] += 1;
                    }
                }
                _ => {}
            }
            if n == next_event {
                self.handle_events(n, r);
                next_event = self.next_event();
            }
            r += 1;
            if r == q {
                r = 0;
            }
        }
        self.next_n = seg.hi();
        Ok(())
    }

    fn next_event(&self) -> u64 {
        let mut e = u64::MAX;
        if let Some(&x) = self.checkpoints.get(self.next_cp) {
            e = e.min(x);
        }
        if let Some(&(m, _)) = self.powers.get(self.next_power) {
            e = e.min(m);
        }
        if let Some(plan) = &self.psi2 {
            if let Some(&y) = plan.queries.get(plan.next) {
                e = e.min(y);
            }
        }
        e
    }

    fn handle_events(&mut self, n: u64, r: u64) {
        while let Some(&(m, lp)) = self.powers.get(self.next_power) {
            if m != n {
                break;
            }
            self.state.psi[r as usize] += lp;
            self.next_power += 1;
        }
        if let Some(plan) = &mut self.psi2 {
            while plan.next < plan.queries.len() && plan.queries[plan.next] == n {
                plan.snapshots.push(self.state.psi.clone());
                plan.next += 1;
            }
        }
        if self.checkpoints.get(self.next_cp) == Some(&n) {
            let mut cv = self.state.clone();
            cv.x = n;
            self.out.push(cv);
            self.next_cp += 1;
        }
    }

    pub fn finish(mut self) -> Result<Vec<CountVector>, RaceError> {
        if !self.is_done() {
            return Err(RaceError::StreamIncomplete {
                reached: self.next_n - 1,
                needed: *self.checkpoints.last().unwrap(),
            });
        }
        if let Some(plan) = self.psi2.take() {
            let q = self.q;
            let lookup = |y: u64| -> &Vec<f64> {
                let i = plan.queries.binary_search(&y).expect("psi snapshot was planned");
                &plan.snapshots[i]
            };
            let inverses: Vec<u64> = (0..q).map(|r| mod_inverse(r, q).unwrap_or(0)).collect();
            for cv in &mut self.out {
                let x = cv.x;
                let s = isqrt(x);
                let mut psi2 = vec![0.0; q as usize];
                if x >= 4 {
                    let at_s = lookup(s);
                    for target in 0..q {
                        if !self.coprime[target as usize] {
                            continue;
                        }
                        let mut total = 0.0;
                        for &(m, lm) in plan.small.iter().take_while(|&&(m, _)| m <= s) {
                            let cls = target * inverses[(m % q) as usize] % q;
                            total += 2.0 * lm * lookup(x / m)[cls as usize];
                        }
                        for u in 0..q {
                            if self.coprime[u as usize] {
                                let v = target * inverses[u as usize] % q;
                                total -= at_s[u as usize] * at_s[v as usize];
                            }
                        }
                        psi2[target as usize] = total;
                    }
                }
                cv.psi2 = psi2;
            }
        }
        Ok(self.out)
    }
}

/// Sieves `[2, max checkpoint]` and returns the counts at every checkpoint.
pub fn accumulate(q: u64, checkpoints: &[u64], with_psi2: bool) -> Result<Vec<CountVector>, RaceError> {
    let mut acc = Accumulator::new(q, checkpoints)?;
    if with_psi2 {
        acc = acc.with_psi2()?;
    }
    let end = *checkpoints.last().unwrap();
    feed_sieve(&mut acc, end)?;
    acc.finish()
}

/// Runs the sieve from `acc.expected_next()` to `end`, stopping once every
/// checkpoint has been reached.
pub fn feed_sieve(acc: &mut Accumulator, end: u64) -> Result<(), RaceError> {
    let sieve = SegmentedSieve::range(acc.expected_next(), end)?;
    sieve.run::<RaceError, _>(|seg| {
        acc.feed(seg)?;
        Ok(if acc.is_done() { ControlFlow::Break(()) } else { ControlFlow::Continue(()) })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RacePoint {
    pub x: u64,
    pub delta: i64,
    pub delta2: i64,
}

/// Normalized race signals sampled on an ascending grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RaceSeries {
    pub grid: Vec<u64>,
    pub delta: Vec<i64>,
    pub delta2: Vec<i64>,
    pub delta_norm: Vec<f64>,
    pub delta2_norm: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl RaceSeries {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}

/// (log x / √x) · Δ.
pub fn normalize_delta(x: u64, delta: i64) -> f64 {
    let xf = x as f64;
    xf.ln() / xf.sqrt() * delta as f64
}

/// (log x / (√x log log x)) · Δ2; requires x > e.
pub fn normalize_delta2(x: u64, delta2: i64) -> Result<f64, RaceError> {
    if x < 3 {
        return Err(RaceError::UndefinedNormalization(x));
    }
    let xf = x as f64;
    let lx = xf.ln();
    Ok(lx / (xf.sqrt() * lx.ln()) * delta2 as f64)
}

pub fn normalize(points: &[RacePoint], cfg: &RaceConfig) -> Result<RaceSeries, RaceError> {
    let half_bias = cfg.half_bias();
    let mut series = RaceSeries {
        grid: Vec::with_capacity(points.len()),
        delta: Vec::with_capacity(points.len()),
        delta2: Vec::with_capacity(points.len()),
        delta_norm: Vec::with_capacity(points.len()),
        delta2_norm: Vec::with_capacity(points.len()),
        sigma: Vec::with_capacity(points.len()),
    };
    for p in points {
        let d2 = normalize_delta2(p.x, p.delta2)?;
        let d = normalize_delta(p.x, p.delta);
        series.grid.push(p.x);
        series.delta.push(p.delta);
        series.delta2.push(p.delta2);
        series.delta_norm.push(d);
        series.delta2_norm.push(d2);
        series.sigma.push(d2 - half_bias + d);
    }
    Ok(series)
}

/// Roughly `points` log-spaced integers from `lo` to `hi` inclusive,
/// deduplicated; always ends at `hi`.
pub fn log_grid(lo: u64, hi: u64, points: usize) -> Vec<u64> {
    if hi <= lo || points < 2 {
        return vec![hi];
    }
    let (l, h) = ((lo as f64).ln(), (hi as f64).ln());
    let mut grid: Vec<u64> = (0..points)
        .map(|i| {
            let t = i as f64 / (points - 1) as f64;
            ((l + t * (h - l)).exp().round() as u64).clamp(lo, hi)
        })
        .collect();
    grid.dedup();
    *grid.last_mut().unwrap() = hi;
    grid
}

/// The default grid: 400 log-spaced points from 10^3 (or 3 for tiny runs) to `limit`.
pub fn default_grid(limit: u64) -> Vec<u64> {
    let lo = if limit > DEFAULT_GRID_START { DEFAULT_GRID_START } else { 3 };
    log_grid(lo, limit, DEFAULT_GRID_POINTS)
}

/// Sieves to the end of `grid` and returns the normalized series together
/// with the raw counts.
pub fn race_series(cfg: &RaceConfig, grid: &[u64]) -> Result<(RaceSeries, Vec<CountVector>), RaceError> {
    let counts = accumulate(cfg.q, grid, false)?;
    let series = series_from_counts(cfg, &counts)?;
    Ok((series, counts))
}

pub fn series_from_counts(cfg: &RaceConfig, counts: &[CountVector]) -> Result<RaceSeries, RaceError> {
    let points: Vec<RacePoint> = counts
        .iter()
        .map(|cv| RacePoint { x: cv.x, delta: delta(cv, cfg), delta2: delta2(cv, cfg) })
        .collect();
    normalize(&points, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signal {
    Delta,
    Delta2,
}

/// Which first sign change to look for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignChange {
    /// First x with Δ(x;q,a,b) < 0.
    DeltaNegative,
    /// First x with Δ2(x;q,a,b) > 0.
    Delta2Positive,
}

/// Running Δ and Δ2 for one race, advanced one integer at a time.
struct RaceTracker {
    q: u64,
    a: u64,
    b: u64,
    delta: i64,
    delta2: i64,
}

impl RaceTracker {
    fn new(cfg: &RaceConfig) -> Self {
        RaceTracker { q: cfg.q, a: cfg.a, b: cfg.b, delta: 0, delta2: 0 }
    }

    /// Visits every n of the segment with the signals valid at n.
    fn walk(&mut self, seg: &ClassifiedSegment, mut visit: impl FnMut(u64, i64, i64) -> bool) -> bool {
        let mut r = seg.lo() % self.q;
        for (i, _) in seg.omega_values().iter().enumerate() {
            let step = match seg.kind_at(i) {
                OmegaKind::Prime => Some(Signal::Delta),
                OmegaKind::Semiprime => Some(Signal::Delta2),
                OmegaKind::Other => None,
            };
            if let Some(signal) = step {
                let inc = if r == self.a { 1 } else if r == self.b { -1 } else { 0 };
                match signal {
                    Signal::Delta => self.delta += inc,
                    Signal::Delta2 => self.delta2 += inc,
                }
            }
            if !visit(seg.lo() + i as u64, self.delta, self.delta2) {
                return false;
            }
            r += 1;
            if r == self.q {
                r = 0;
            }
        }
        true
    }
}

/// Smallest integer x ≤ limit at which the chosen strict inequality holds.
pub fn first_sign_change(cfg: &RaceConfig, which: SignChange, limit: u64) -> Result<Option<u64>, RaceError> {
    if limit > MAX_LIMIT {
        return Err(RaceError::BadLimit(limit));
    }
    let mut tracker = RaceTracker::new(cfg);
    let mut found = None;
    SegmentedSieve::new(limit)?.run::<RaceError, _>(|seg| {
        let more = tracker.walk(seg, |n, d, d2| {
            let hit = match which {
                SignChange::DeltaNegative => d < 0,
                SignChange::Delta2Positive => d2 > 0,
            };
            if hit {
                found = Some(n);
            }
            !hit
        });
        Ok(if more { ControlFlow::Continue(()) } else { ControlFlow::Break(()) })
    })?;
    Ok(found)
}

/// (1 / log X) · Σ_{n ≤ X, signal(n) > 0} 1/n, unclamped.
pub fn empirical_log_density(cfg: &RaceConfig, x_max: u64, signal: Signal) -> Result<f64, RaceError> {
    if !(10..=MAX_LIMIT).contains(&x_max) {
        return Err(RaceError::BadLimit(x_max));
    }
    log_density_scan(cfg, x_max, signal)
}

fn log_density_scan(cfg: &RaceConfig, x_max: u64, signal: Signal) -> Result<f64, RaceError> {
    let mut tracker = RaceTracker::new(cfg);
    let mut total = 0.0;
    SegmentedSieve::new(x_max)?.run::<RaceError, _>(|seg| {
        tracker.walk(seg, |n, d, d2| {
            let v = match signal {
                Signal::Delta => d,
                Signal::Delta2 => d2,
            };
            if v > 0 {
                total += 1.0 / n as f64;
            }
            true
        });
        Ok(ControlFlow::Continue(()))
    })?;
    Ok(total / (x_max as f64).ln())
}

/// Same as [`empirical_log_density`] but accepts a = b (always 0), for
/// callers checking the degenerate race.
pub fn empirical_log_density_raw(q: u64, a: u64, b: u64, x_max: u64, signal: Signal) -> Result<f64, RaceError> {
    if a % q == b % q {
        return Ok(0.0);
    }
    empirical_log_density(&RaceConfig::new(q, a, b)?, x_max, signal)
}
