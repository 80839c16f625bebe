//! Dirichlet characters as value tables on (Z/qZ)*.
//!
//! The group is split into cyclic factors with fixed generators: for the
//! 2-part, `-1` (order 2, present when 4 | q) then `5` (order 2^(e-2), when
//! 8 | q); then one factor per odd prime power p^k in ascending p, generated
//! by the smallest primitive root mod p^k. Each generator is lifted by CRT to
//! be 1 modulo the other prime-power components.
//!
//! A character is the exponent vector (k_1, ..., k_m) with
//! χ(g_i) = exp(2πi k_i / n_i). Its canonical index is the little-endian
//! mixed-radix number Σ k_i · n_1 ⋯ n_(i-1), so index 0 is always χ0.

use num_complex::Complex64;

use super::ZeroError;
use crate::arith::{factorize, gcd, mod_pow, mul_mod};

pub const MAX_MODULUS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// 0 for even characters, 1 for odd ones (the gamma-factor shift).
    pub fn shift(self) -> u32 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CyclicFactor {
    /// Generator, lifted to a residue mod q.
    pub generator: u64,
    pub order: u64,
}

/// (Z/qZ)* with a discrete-log table against the canonical generators.
#[derive(Debug, Clone)]
pub struct CharacterGroup {
    q: u64,
    phi: u64,
    factors: Vec<CyclicFactor>,
    /// `dlog[r * m + i]` is the exponent of generator `i` in `r`, or
    /// `u32::MAX` when `gcd(r, q) > 1`.
    dlog: Vec<u32>,
    exponent: u64,
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

fn primitive_root_mod_prime(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let fs: Vec<u64> = factorize(p - 1).into_iter().map(|(f, _)| f).collect();
    (2..p)
        .find(|&g| fs.iter().all(|&f| mod_pow(g, (p - 1) / f, p) != 1))
        .expect("every prime has a primitive root")
}

fn primitive_root_mod_prime_power(p: u64, k: u32) -> u64 {
    let g = primitive_root_mod_prime(p);
    if k == 1 {
        return g;
    }
    if mod_pow(g, p - 1, p * p) == 1 {
        g + p
    } else {
        g
    }
}

/// x ≡ g (mod m), x ≡ 1 (mod q/m).
fn crt_lift(g: u64, m: u64, q: u64) -> u64 {
    let rest = q / m;
    if rest == 1 {
        return g % q;
    }
    let inv = crate::arith::mod_inverse(rest % m, m).expect("coprime components");
    let t = mul_mod((g + m - 1) % m, inv, m);
    (1 + rest * t) % q
}

impl CharacterGroup {
    pub fn new(q: u64) -> Result<Self, ZeroError> {
        if !(3..=MAX_MODULUS).contains(&q) {
            return Err(ZeroError::InvalidModulus(q));
        }
        let mut factors = Vec::new();
        for (p, k) in factorize(q) {
            let m = p.pow(k);
            if p == 2 {
                if k >= 2 {
                    factors.push(CyclicFactor { generator: crt_lift(m - 1, m, q), order: 2 });
                }
                if k >= 3 {
                    factors.push(CyclicFactor { generator: crt_lift(5, m, q), order: m / 4 });
                }
            } else {
                let g = primitive_root_mod_prime_power(p, k);
                factors.push(CyclicFactor { generator: crt_lift(g, m, q), order: m / p * (p - 1) });
            }
        }
        let phi: u64 = factors.iter().map(|f| f.order).product();
        let exponent = factors.iter().fold(1, |acc, f| lcm(acc, f.order));
        let m = factors.len();
        let mut dlog = vec![u32::MAX; q as usize * m.max(1)];
        let mut exps = vec![0u64; m];
        let mut cur = 1 % q;
        for _ in 0..phi {
            for (i, &e) in exps.iter().enumerate() {
                dlog[cur as usize * m + i] = e as u32;
            }
            // odometer step; each generator has order n_i mod q, so a wrap
            // returns `cur` to its value before that digit started.
            for i in 0..m {
                exps[i] += 1;
                cur = mul_mod(cur, factors[i].generator, q);
                if exps[i] < factors[i].order {
                    break;
                }
                exps[i] = 0;
            }
        }
        if m == 0 {
            dlog = vec![0; q as usize];
        }
        Ok(CharacterGroup { q, phi, factors, dlog, exponent })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// φ(q), the number of characters.
    pub fn len(&self) -> usize {
        self.phi as usize
    }

    pub fn is_empty(&self) -> bool {
        self.phi == 0
    }

    pub fn factors(&self) -> &[CyclicFactor] {
        &self.factors
    }

    /// Exponent vector of a character index.
    pub fn exponents(&self, index: usize) -> Result<Vec<u64>, ZeroError> {
        if index as u64 >= self.phi {
            return Err(ZeroError::CharacterIndex { q: self.q, index });
        }
        let mut rest = index as u64;
        Ok(self
            .factors
            .iter()
            .map(|f| {
                let k = rest % f.order;
                rest /= f.order;
                k
            })
            .collect())
    }

    pub fn index_of(&self, exponents: &[u64]) -> usize {
        let mut index = 0u64;
        let mut radix = 1u64;
        for (f, &k) in self.factors.iter().zip(exponents) {
            index += (k % f.order) * radix;
            radix *= f.order;
        }
        index as usize
    }

    /// Index of the complex-conjugate character.
    pub fn conjugate_index(&self, index: usize) -> Result<usize, ZeroError> {
        let exps = self.exponents(index)?;
        let neg: Vec<u64> = self.factors.iter().zip(&exps).map(|(f, &k)| (f.order - k) % f.order).collect();
        Ok(self.index_of(&neg))
    }

    pub fn character(&self, index: usize) -> Result<DirichletCharacter, ZeroError> {
        let exps = self.exponents(index)?;
        let m = self.factors.len();
        let big = self.exponent;
        let weights: Vec<u64> = self.factors.iter().map(|f| big / f.order).collect();
        let mut values = vec![Complex64::new(0.0, 0.0); self.q as usize];
        let mut turns = vec![u64::MAX; self.q as usize];
        for r in 0..self.q {
            if gcd(r, self.q) != 1 {
                continue;
            }
            let mut t = 0u64;
            for i in 0..m {
                let e = self.dlog[r as usize * m + i] as u64;
                t = (t + mul_mod(exps[i], e, big) * weights[i]) % big;
            }
            turns[r as usize] = t;
            values[r as usize] = root_of_unity(t, big);
        }
        let is_principal = exps.iter().all(|&k| k == 0);
        let is_real = self.factors.iter().zip(&exps).all(|(f, &k)| (2 * k) % f.order == 0);
        let parity = if values[(self.q - 1) as usize].re > 0.0 { Parity::Even } else { Parity::Odd };
        Ok(DirichletCharacter {
            q: self.q,
            index,
            values,
            turns,
            order_denominator: big,
            is_principal,
            is_real,
            parity,
        })
    }

    /// All characters in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = DirichletCharacter> + '_ {
        (0..self.len()).map(move |i| self.character(i).expect("index in range"))
    }
}

/// exp(2πi t / n), exact at multiples of a quarter turn.
fn root_of_unity(t: u64, n: u64) -> Complex64 {
    let g = gcd(t, n);
    let (t, n) = (t / g, n / g);
    match (t, n) {
        (_, 1) => Complex64::new(1.0, 0.0),
        (1, 2) => Complex64::new(-1.0, 0.0),
        (1, 4) => Complex64::new(0.0, 1.0),
        (3, 4) => Complex64::new(0.0, -1.0),
        _ => Complex64::from_polar(1.0, std::f64::consts::TAU * t as f64 / n as f64),
    }
}

/// A Dirichlet character mod q, stored as its value table.
#[derive(Debug, Clone)]
pub struct DirichletCharacter {
    pub q: u64,
    /// Canonical index within [`CharacterGroup`].
    pub index: usize,
    values: Vec<Complex64>,
    /// χ(r) = exp(2πi turns[r] / order_denominator); `u64::MAX` off A_q.
    turns: Vec<u64>,
    order_denominator: u64,
    pub is_principal: bool,
    pub is_real: bool,
    pub parity: Parity,
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q && self.index == other.index
    }
}

impl DirichletCharacter {
    #[inline]
    pub fn value(&self, n: u64) -> Complex64 {
        self.values[(n % self.q) as usize]
    }

    /// conj(χ(n)), i.e. χ̄(n).
    #[inline]
    pub fn conj_value(&self, n: u64) -> Complex64 {
        self.value(n).conj()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// A(χ): 1 if χ is real and nonprincipal, else 0.
    pub fn a_chi(&self) -> u32 {
        u32::from(self.is_real && !self.is_principal)
    }

    /// Exact product test on the stored exponents: χ(r)χ(s) = χ(rs).
    pub fn is_multiplicative_at(&self, r: u64, s: u64) -> bool {
        let (tr, ts) = (self.turns[(r % self.q) as usize], self.turns[(s % self.q) as usize]);
        let trs = self.turns[mul_mod(r, s, self.q) as usize];
        if tr == u64::MAX || ts == u64::MAX {
            return trs == u64::MAX;
        }
        (tr + ts) % self.order_denominator == trs
    }

    /// Smallest d | q such that χ is trivial on every r ≡ 1 (mod d) in A_q.
    pub fn conductor(&self) -> u64 {
        let q = self.q;
        let mut divisors: Vec<u64> = (1..=q).filter(|d| q.is_multiple_of(*d)).collect();
        divisors.sort_unstable();
        for d in divisors {
            let trivial = (1..q)
                .step_by(d as usize)
                .filter(|&r| gcd(r, q) == 1)
                .all(|r| self.turns[r as usize] == 0);
            if trivial {
                return d;
            }
        }
        q
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor() == self.q
    }
}

/// Every character mod q, in canonical order.
pub fn characters(q: u64) -> Result<Vec<DirichletCharacter>, ZeroError> {
    let group = CharacterGroup::new(q)?;
    Ok(group.iter().collect())
}
