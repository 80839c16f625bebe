//! L(s,χ) for the real primitive characters mod 3 and mod 4.
//!
//! L(s,χ) = Σ_{n<qN} χ(n) n^{-s} + q^{-s} Σ_r χ(r) ζ(s, N + r/q), with the
//! Hurwitz tails by Euler–Maclaurin. N grows with |s| so the remainder ratio
//! |s| / (2πN) stays below 0.4; 16 Bernoulli terms then put the truncation
//! error near 1e-13 for |Im s| ≤ 500.

use num_complex::Complex64;

use super::characters::{DirichletCharacter, Parity};
use super::ZeroError;

pub const MAX_HEIGHT: f64 = 500.0;

const EM_TERMS: usize = 16;

/// B_{2j} / (2j)! for j = 1..=16.
const BERNOULLI_OVER_FACTORIAL: [f64; EM_TERMS] = {
    const B: [(f64, f64); EM_TERMS] = [
        (1.0, 6.0),
        (-1.0, 30.0),
        (1.0, 42.0),
        (-1.0, 30.0),
        (5.0, 66.0),
        (-691.0, 2730.0),
        (7.0, 6.0),
        (-3617.0, 510.0),
        (43867.0, 798.0),
        (-174611.0, 330.0),
        (854513.0, 138.0),
        (-236364091.0, 2730.0),
        (8553103.0, 6.0),
        (-23749461029.0, 870.0),
        (8615841276005.0, 14322.0),
        (-7709321041217.0, 510.0),
    ];
    let mut out = [0.0; EM_TERMS];
    let mut fact = 1.0;
    let mut j = 0;
    while j < EM_TERMS {
        let k = 2.0 * (j as f64 + 1.0);
        fact *= (k - 1.0) * k;
        out[j] = B[j].0 / B[j].1 / fact;
        j += 1;
    }
    out
};

/// Principal-branch log Γ(z), continuous in the right half-plane.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    const SHIFT_TO: f64 = 15.0;
    const STIRLING: [f64; 10] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360360.0,
        1.0 / 156.0,
        -3617.0 / 122400.0,
        43867.0 / 244188.0,
        -174611.0 / 125400.0,
    ];
    let mut w = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while w.norm() < SHIFT_TO {
        shift += w.ln();
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut p = inv;
    for c in STIRLING {
        series += p * c;
        p *= inv2;
    }
    (w - 0.5) * w.ln() - w + 0.5 * (std::f64::consts::TAU).ln() + series - shift
}

/// (e^w − 1) / w without cancellation near 0.
fn exprel(w: Complex64) -> Complex64 {
    if w.norm() > 1e-3 {
        return (w.exp() - 1.0) / w;
    }
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 2..8 {
        term = term * w / k as f64;
        sum += term;
    }
    sum
}

/// A built-in L-function with its coefficient table.
#[derive(Debug, Clone)]
pub struct LFunction {
    q: u64,
    chi_index: usize,
    parity: Parity,
    /// (n, ln n, n^{-1/2}, χ(n)) for n coprime to q, ascending.
    terms: Vec<(u64, f64, f64, f64)>,
    /// χ(r) for r = 0..q.
    residues: Vec<f64>,
}

fn head_length(s: Complex64) -> u64 {
    (0.4 * s.norm()).ceil() as u64 + 20
}

impl LFunction {
    /// Accepts only the real primitive characters mod 3 and mod 4.
    pub fn builtin(chi: &DirichletCharacter) -> Result<Self, ZeroError> {
        let supported = matches!(chi.q, 3 | 4) && chi.is_real && !chi.is_principal;
        if !supported {
            return Err(ZeroError::Unsupported { q: chi.q, index: chi.index });
        }
        let q = chi.q;
        let residues: Vec<f64> = (0..q).map(|r| chi.value(r).re).collect();
        let max_n = q * head_length(Complex64::new(10.0, MAX_HEIGHT + 1.0));
        let terms = (1..max_n)
            .filter(|n| residues[(n % q) as usize] != 0.0)
            .map(|n| {
                let ln = (n as f64).ln();
                (n, ln, (-0.5 * ln).exp(), residues[(n % q) as usize])
            })
            .collect();
        Ok(LFunction { q, chi_index: chi.index, parity: chi.parity, terms, residues })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn chi_index(&self) -> usize {
        self.chi_index
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// L(s,χ); requires Re s > 0 and |Im s| ≤ 500.
    pub fn l_value(&self, s: Complex64) -> Result<Complex64, ZeroError> {
        if !(s.re > 0.0) || !(s.im.abs() <= MAX_HEIGHT) || s.re > 10.0 {
            return Err(ZeroError::Domain(format!("l_value needs 0 < Re s ≤ 10 and |Im s| ≤ {MAX_HEIGHT}, got {s}")));
        }
        Ok(self.eval(s))
    }

    fn eval(&self, s: Complex64) -> Complex64 {
        let q = self.q;
        let big_n = head_length(s);
        let cut = q * big_n;
        let mut head = Complex64::new(0.0, 0.0);
        let on_line = s.re == 0.5;
        for &(n, ln, inv_sqrt, c) in &self.terms {
            if n >= cut {
                break;
            }
            let mag = if on_line { inv_sqrt } else { (-s.re * ln).exp() };
            let (sin, cos) = (s.im * ln).sin_cos();
            head += Complex64::new(cos, -sin) * (c * mag);
        }
        let mut tail = Complex64::new(0.0, 0.0);
        for r in 1..q {
            let c = self.residues[r as usize];
            if c == 0.0 {
                continue;
            }
            let n0 = (cut + r) as f64;
            let u = n0 / q as f64;
            let ln_n0 = n0.ln();
            let n0_pow = (-s * ln_n0).exp();
            // Σ_r χ(r) = 0, so n0^{1-s}/(s-1) may be replaced by (n0^{1-s} - 1)/(s-1).
            let w = (1.0 - s) * ln_n0;
            let pole = -exprel(w) * ln_n0 / q as f64;
            let mut em = n0_pow * 0.5;
            let mut poch = s;
            let mut upow = 1.0 / u;
            let inv_u2 = 1.0 / (u * u);
            for (j, &b) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
                if j > 0 {
                    let k = 2.0 * j as f64;
                    poch = poch * (s + (k - 1.0)) * (s + k);
                }
                em += n0_pow * poch * (b * upow);
                upow *= inv_u2;
            }
            tail += (pole + em) * c;
        }
        head + tail
    }

    /// θ(t) = (t/2) ln(q/π) + Im ln Γ((½ + a + it)/2); continuous in t.
    pub fn theta(&self, t: f64) -> f64 {
        theta_for(self.q, self.parity, t)
    }

    /// Z(t) = e^{iθ(t)} L(½+it, χ); real because the root number is +1.
    pub fn hardy_z(&self, t: f64) -> Result<f64, ZeroError> {
        if !(t.abs() <= MAX_HEIGHT) {
            return Err(ZeroError::Domain(format!("hardy_z needs |t| ≤ {MAX_HEIGHT}, got {t}")));
        }
        Ok(self.hardy_z_unchecked(t))
    }

    pub(crate) fn hardy_z_unchecked(&self, t: f64) -> f64 {
        let l = self.eval(Complex64::new(0.5, t));
        let (sin, cos) = self.theta(t).sin_cos();
        cos * l.re - sin * l.im
    }

    /// Λ(s) = (q/π)^{(s+a)/2} Γ((s+a)/2) L(s,χ).
    pub fn completed(&self, s: Complex64) -> Result<Complex64, ZeroError> {
        let l = self.l_value(s)?;
        let h = (s + self.parity.shift() as f64) / 2.0;
        let log_factor = h * (self.q as f64 / std::f64::consts::PI).ln() + ln_gamma(h);
        Ok(log_factor.exp() * l)
    }
}

/// Phase of the gamma factor on the critical line for conductor `f`.
pub fn theta_for(f: u64, parity: Parity, t: f64) -> f64 {
    let a = parity.shift() as f64;
    0.5 * t * (f as f64 / std::f64::consts::PI).ln() + ln_gamma(Complex64::new((0.5 + a) / 2.0, t / 2.0)).im
}
