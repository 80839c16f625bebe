//! Dirichlet characters, L-function zeros on the critical line, and zero files.
//!
//! Zeros are computed only for the real primitive characters mod 3 and 4, by
//! scanning the Hardy Z-function for sign changes and bisecting. Every other
//! character needs an ingested `ZEROS v1` file (see [`file`]).
//!
//! Completeness is checked against θ(T)/π, where θ is the gamma-factor phase
//! from [`lfunc::theta_for`]. That is the smooth part of the count of
//! ordinates in (0, T], ≈ (T/2π) log(fT/(2πe)) + (2a−1)/8 for conductor f.
//! The allowed slack is 2 + log T.

pub mod characters;
pub mod file;
pub mod lfunc;

use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;
use thiserror::Error;

pub use characters::{characters, CharacterGroup, DirichletCharacter, Parity};
pub use file::{load_zeros, load_zeros_expecting, load_zeros_for_modulus, parse_zeros, save_zeros, write_zeros};
pub use lfunc::{ln_gamma, theta_for, LFunction, MAX_HEIGHT};

pub const DEFAULT_STEP: f64 = 1e-3;
pub const BISECTION_TOLERANCE: f64 = 1e-9;

/// Grid points handled per parallel task.
const SCAN_CHUNK: usize = 4096;

#[derive(Debug, Error)]
pub enum ZeroError {
    #[error("modulus must satisfy 3 <= q <= {max}, got {0}", max = characters::MAX_MODULUS)]
    InvalidModulus(u64),
    #[error("character index {index} out of range for q={q}")]
    CharacterIndex { q: u64, index: usize },
    #[error("no built-in L-function for q={q} chi={index}; only the real characters mod 3 and 4 are computed, supply a zero file for this character")]
    Unsupported { q: u64, index: usize },
    #[error("{0}")]
    Domain(String),
    #[error("found {found} zeros up to T={height} but the count estimate is {estimate:.3} (allowed slack {slack:.3}); scan step too coarse")]
    CountMismatch { found: usize, estimate: f64, height: f64, slack: f64 },
    #[error("invalid zero list: {0}")]
    Invalid(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: expected q={expected}, file has q={found}")]
    ModulusMismatch { line: usize, expected: u64, found: u64 },
    #[error("line {line}: expected chi={expected}, file has chi={found}")]
    CharacterMismatch { line: usize, expected: usize, found: usize },
    #[error("missing zeros for q={q} chi={index}")]
    Missing { q: u64, index: usize },
    #[error("zero heights differ: {0} vs {1}")]
    HeightMismatch(f64, f64),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroSource {
    Computed,
    Ingested,
}

/// Ordinates 0 < γ ≤ height of the zeros of one L(s,χ), ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroList {
    q: u64,
    chi: usize,
    gammas: Vec<f64>,
    multiplicities: Vec<u32>,
    height: f64,
    source: ZeroSource,
}

impl ZeroList {
    pub fn new(
        q: u64,
        chi: usize,
        gammas: Vec<f64>,
        multiplicities: Vec<u32>,
        height: f64,
        source: ZeroSource,
    ) -> Result<Self, ZeroError> {
        if gammas.len() != multiplicities.len() {
            return Err(ZeroError::Invalid(format!(
                "{} gammas but {} multiplicities",
                gammas.len(),
                multiplicities.len()
            )));
        }
        if !(height.is_finite() && height >= 0.0) {
            return Err(ZeroError::Invalid(format!("height {height} must be finite and non-negative")));
        }
        if let Some(i) = gammas.iter().position(|g| !(g.is_finite() && *g > 0.0 && *g <= height)) {
            return Err(ZeroError::Invalid(format!("gamma {} outside (0, {height}]", gammas[i])));
        }
        if let Some(w) = gammas.windows(2).find(|w| w[0] >= w[1]) {
            return Err(ZeroError::Invalid(format!("gammas not strictly ascending at {} >= {}", w[0], w[1])));
        }
        if multiplicities.contains(&0) {
            return Err(ZeroError::Invalid("multiplicity must be positive".into()));
        }
        Ok(ZeroList { q, chi, gammas, multiplicities, height, source })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// Canonical character index within [`CharacterGroup`].
    pub fn chi_index(&self) -> usize {
        self.chi
    }

    pub fn character(&self) -> Result<DirichletCharacter, ZeroError> {
        CharacterGroup::new(self.q)?.character(self.chi)
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.multiplicities
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn source(&self) -> ZeroSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    /// (γ, m(γ)) pairs with γ ≤ t.
    pub fn up_to(&self, t: f64) -> impl Iterator<Item = (f64, u32)> + '_ {
        let end = self.gammas.partition_point(|&g| g <= t);
        self.gammas[..end].iter().copied().zip(self.multiplicities[..end].iter().copied())
    }

    /// Copy truncated to a lower height.
    pub fn truncated(&self, height: f64) -> Result<ZeroList, ZeroError> {
        if height > self.height {
            return Err(ZeroError::Invalid(format!("cannot extend height {} to {height}", self.height)));
        }
        let end = self.gammas.partition_point(|&g| g <= height);
        ZeroList::new(
            self.q,
            self.chi,
            self.gammas[..end].to_vec(),
            self.multiplicities[..end].to_vec(),
            height,
            self.source,
        )
    }
}

/// Smooth count of zero ordinates in (0, T] for χ: max(0, θ(T)/π) with θ at
/// the conductor of χ.
pub fn zero_count_estimate(chi: &DirichletCharacter, t: f64) -> f64 {
    (theta_for(chi.conductor(), chi.parity, t) / std::f64::consts::PI).max(0.0)
}

/// Allowed |count − estimate| at height T.
pub fn count_slack(t: f64) -> f64 {
    2.0 + t.max(1.0).ln()
}

/// Zeros of L(s,χ) in (0, T] from sign changes of Z on a grid of `step`.
pub fn find_zeros(chi: &DirichletCharacter, height: f64, step: f64) -> Result<ZeroList, ZeroError> {
    if !(height.is_finite() && (0.0..=MAX_HEIGHT).contains(&height)) {
        return Err(ZeroError::Domain(format!("height must lie in [0, {MAX_HEIGHT}], got {height}")));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(ZeroError::Domain(format!("scan step must be positive, got {step}")));
    }
    let l = LFunction::builtin(chi)?;
    let gammas = scan_sign_changes(&l, height, step);
    let found = gammas.len();
    let estimate = zero_count_estimate(chi, height);
    let slack = count_slack(height);
    if (found as f64 - estimate).abs() > slack {
        return Err(ZeroError::CountMismatch { found, estimate, height, slack });
    }
    let ones = vec![1; found];
    ZeroList::new(chi.q, chi.index, gammas, ones, height, ZeroSource::Computed)
}

fn scan_sign_changes(l: &LFunction, height: f64, step: f64) -> Vec<f64> {
    let intervals = (height / step).ceil() as usize;
    if intervals == 0 {
        return Vec::new();
    }
    let grid = |k: usize| (k as f64 * step).min(height);
    let chunks: Vec<(usize, usize)> = (0..intervals)
        .step_by(SCAN_CHUNK)
        .map(|lo| (lo, (lo + SCAN_CHUNK).min(intervals)))
        .collect();
    let found: Vec<Vec<f64>> = chunks
        .par_iter()
        .map(|&(lo, hi)| {
            let mut out = Vec::new();
            let mut prev = l.hardy_z_unchecked(grid(lo));
            for k in lo + 1..=hi {
                let t = grid(k);
                let z = l.hardy_z_unchecked(t);
                if (z >= 0.0) != (prev >= 0.0) {
                    out.push(bisect(l, grid(k - 1), t, prev));
                }
                prev = z;
            }
            out
        })
        .collect();
    let gammas: Vec<f64> = found.into_iter().flatten().filter(|&g| g > 0.0 && g <= height).collect();
    debug_assert!(gammas.windows(2).all(|w| w[0] < w[1]));
    gammas
}

/// Bisects to adjacent floats, well past [`BISECTION_TOLERANCE`]; zeros are
/// sparse so the extra evaluations are negligible.
fn bisect(l: &LFunction, mut lo: f64, mut hi: f64, z_lo: f64) -> f64 {
    let lo_positive = z_lo >= 0.0;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (l.hardy_z_unchecked(mid) >= 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Zero lists for the nonprincipal characters of one modulus.
#[derive(Debug, Clone)]
pub struct ZeroSet {
    q: u64,
    lists: BTreeMap<usize, ZeroList>,
}

impl ZeroSet {
    pub fn new(q: u64) -> Self {
        ZeroSet { q, lists: BTreeMap::new() }
    }

    /// Computed zeros for every nonprincipal character of q ∈ {3, 4}.
    pub fn builtin(q: u64, height: f64, step: f64) -> Result<Self, ZeroError> {
        let mut set = ZeroSet::new(q);
        for chi in CharacterGroup::new(q)?.iter().filter(|c| !c.is_principal) {
            set.insert(find_zeros(&chi, height, step)?)?;
        }
        Ok(set)
    }

    pub fn insert(&mut self, list: ZeroList) -> Result<(), ZeroError> {
        if list.q() != self.q {
            return Err(ZeroError::Invalid(format!("zero list for q={} added to set for q={}", list.q(), self.q)));
        }
        self.lists.insert(list.chi_index(), list);
        Ok(())
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn get(&self, index: usize) -> Result<&ZeroList, ZeroError> {
        self.lists.get(&index).ok_or(ZeroError::Missing { q: self.q, index })
    }

    pub fn iter(&self) -> impl Iterator<Item = &ZeroList> {
        self.lists.values()
    }

    /// Checks every nonprincipal character is present; returns the common height.
    pub fn common_height(&self, group: &CharacterGroup) -> Result<f64, ZeroError> {
        let mut height: Option<f64> = None;
        for index in 1..group.len() {
            let h = self.get(index)?.height();
            match height {
                Some(prev) if prev != h => return Err(ZeroError::HeightMismatch(prev, h)),
                _ => height = Some(h),
            }
        }
        Ok(height.unwrap_or(0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chi4() -> DirichletCharacter {
        characters(4).unwrap().remove(1)
    }

    #[test]
    fn no_zero_below_five() {
        let zl = find_zeros(&chi4(), 5.0, DEFAULT_STEP).unwrap();
        assert!(zl.is_empty());
        assert_eq!(zl.height(), 5.0);
    }

    #[test]
    fn first_zero_mod_4() {
        let zl = find_zeros(&chi4(), 10.0, DEFAULT_STEP).unwrap();
        assert_eq!(zl.len(), 1);
        let g = zl.gammas()[0];
        assert!(g > 6.0 && g < 6.1, "{g}");
        // mpmath fixture value
        assert!((g - 6.020_948_904_697_597).abs() < 1e-8);
    }

    #[test]
    fn count_matches_estimate_at_50() {
        let chi = chi4();
        let zl = find_zeros(&chi, 50.0, DEFAULT_STEP).unwrap();
        let est = zero_count_estimate(&chi, 50.0);
        assert!((zl.len() as f64 - est).abs() <= 2.0, "{} vs {est}", zl.len());
        // independent finer scan finds the same ordinates
        let fine = find_zeros(&chi, 50.0, 1e-4).unwrap();
        assert_eq!(fine.len(), zl.len());
        for (a, b) in fine.gammas().iter().zip(zl.gammas()) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn refined_zeros_are_small_relative_to_neighbourhood() {
        for q in [3u64, 4] {
            let chi = characters(q).unwrap().remove(1);
            let l = LFunction::builtin(&chi).unwrap();
            let zl = find_zeros(&chi, 100.0, DEFAULT_STEP).unwrap();
            for &g in zl.gammas() {
                let neighbourhood = (-10..=10)
                    .map(|k| l.hardy_z(g + k as f64 * 1e-3).unwrap().abs())
                    .fold(0.0, f64::max);
                assert!(l.hardy_z(g).unwrap().abs() < 1e-8 * neighbourhood, "q={q} g={g}");
            }
        }
    }

    #[test]
    fn estimate_is_monotone() {
        for q in [3u64, 4, 5, 8] {
            for chi in characters(q).unwrap().iter().filter(|c| !c.is_principal) {
                let mut prev = 0.0;
                for k in 0..=1000 {
                    let e = zero_count_estimate(chi, 2.0 + k as f64 * 0.5);
                    assert!(e >= prev - 1e-12);
                    prev = e;
                }
            }
        }
    }

    #[test]
    fn coarse_step_is_reported() {
        let err = find_zeros(&chi4(), 100.0, 5.0).unwrap_err();
        assert!(matches!(err, ZeroError::CountMismatch { .. }), "{err}");
    }

    #[test]
    fn validation() {
        let ok = ZeroList::new(4, 1, vec![1.0, 2.0], vec![1, 2], 3.0, ZeroSource::Ingested);
        assert!(ok.is_ok());
        assert!(ZeroList::new(4, 1, vec![2.0, 1.0], vec![1, 1], 3.0, ZeroSource::Ingested).is_err());
        assert!(ZeroList::new(4, 1, vec![1.0, 1.0], vec![1, 1], 3.0, ZeroSource::Ingested).is_err());
        assert!(ZeroList::new(4, 1, vec![4.0], vec![1], 3.0, ZeroSource::Ingested).is_err());
        assert!(ZeroList::new(4, 1, vec![1.0], vec![0], 3.0, ZeroSource::Ingested).is_err());
        assert!(ZeroList::new(4, 1, vec![-1.0], vec![1], 3.0, ZeroSource::Ingested).is_err());
        let t = ok.unwrap().truncated(1.5).unwrap();
        assert_eq!(t.gammas(), &[1.0]);
    }

    #[test]
    fn zero_set_requires_all_characters() {
        let group = CharacterGroup::new(5).unwrap();
        let mut set = ZeroSet::new(5);
        set.insert(ZeroList::new(5, 1, vec![], vec![], 10.0, ZeroSource::Ingested).unwrap()).unwrap();
        assert!(matches!(set.common_height(&group), Err(ZeroError::Missing { index: 2, .. })));
        assert!(set.insert(ZeroList::new(4, 1, vec![], vec![], 10.0, ZeroSource::Ingested).unwrap()).is_err());
    }
}
