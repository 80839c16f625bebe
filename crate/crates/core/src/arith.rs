//! Small modular-arithmetic helpers shared by the race, character and model code.

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Euler's totient by trial factorization.
pub fn euler_phi(mut n: u64) -> u64 {
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// Residues in `[1, q)` coprime to `q`, ascending (the set A_q).
pub fn coprime_residues(q: u64) -> Vec<u64> {
    (1..q).filter(|&r| gcd(r, q) == 1).collect()
}

pub fn mod_pow(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Inverse of `a` modulo `m`, if `gcd(a, m) = 1`.
pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// Prime factorization as `(p, k)` pairs, ascending in `p`.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut k = 0;
            while n.is_multiple_of(p) {
                n /= p;
                k += 1;
            }
            out.push((p, k));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// N(q, a): the number of x in A_q with x^2 = a (mod q), by enumeration.
pub fn n_sqrt(q: u64, a: u64) -> u64 {
    let a = a % q;
    (1..q)
        .filter(|&x| gcd(x, q) == 1 && mul_mod(x, x, q) == a)
        .count() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn totient_small_values() {
        let expected = [1, 1, 2, 2, 4, 2, 6, 4, 6, 4, 10, 4];
        for (i, &e) in expected.iter().enumerate() {
            assert_eq!(euler_phi(i as u64 + 1), e, "phi({})", i + 1);
        }
        assert_eq!(coprime_residues(12), vec![1, 5, 7, 11]);
    }

    #[test]
    fn n_sqrt_examples() {
        assert_eq!(n_sqrt(4, 1), 2);
        assert_eq!(n_sqrt(4, 3), 0);
        assert_eq!(n_sqrt(8, 1), 4);
        assert_eq!(n_sqrt(5, 4), 2);
        assert_eq!(n_sqrt(5, 2), 0);
    }

    #[test]
    fn n_sqrt_sums_to_phi() {
        for q in 3..60u64 {
            let total: u64 = coprime_residues(q).iter().map(|&a| n_sqrt(q, a)).sum();
            assert_eq!(total, euler_phi(q));
        }
    }

    #[test]
    fn inverses() {
        for q in 2..50u64 {
            for a in coprime_residues(q) {
                let inv = mod_inverse(a, q).unwrap();
                assert_eq!(a * inv % q, 1);
            }
        }
        assert_eq!(mod_inverse(6, 9), None);
    }

    #[test]
    fn factorization_roundtrip() {
        for n in 1..2000u64 {
            let prod: u64 = factorize(n).iter().map(|&(p, k)| p.pow(k)).product();
            assert_eq!(prod, n);
        }
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
    }
}
