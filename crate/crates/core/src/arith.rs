//! Squarefree sieves and fundamental discriminants.
//!
//! The sieve is a linear (Euler) sieve that carries two multiplicative values
//! per integer:
//!
//! * the Möbius function μ(n), stored as one byte, and
//! * the squarefree part sf(n), the unique squarefree d with n = d·m².
//!
//! Both obey one-step recurrences at n = p·m with p the smallest prime factor:
//! μ(n) = −μ(m) when p ∤ m and 0 otherwise; sf(n) = sf(m)·p or sf(m)/p
//! according to whether p already divides sf(m) (the exponent of p flips
//! parity).
//!
//! On top of the sieve sit the discriminant utilities: a number n ≠ 0 with
//! squarefree kernel d belongs to the quadratic field Q(√d), whose
//! discriminant is d if d ≡ 1 (mod 4) and 4d otherwise; d = 1 (n a perfect
//! square) is mapped to the sentinel discriminant 1, which stands for the
//! rationals and gets class number 1 throughout the crate.
//!
//! Counts of fundamental discriminants in arithmetic progressions come with
//! closed-form main terms of the shape (3X/(π²φ(N)))·∏_{p|N} q/(1+p) with
//! q = 4 at p = 2 and q = p otherwise; those are evaluated as exact rationals
//! times X/π² so the only rounding is the final one.

use crate::{Error, Result};

/// Sign selector for discriminant families: real (D > 0) or imaginary (D < 0)
/// quadratic fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Positive => 1,
            Sign::Negative => -1,
        }
    }
}

impl std::fmt::Display for Sign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sign::Positive => write!(f, "+"),
            Sign::Negative => write!(f, "-"),
        }
    }
}

impl std::str::FromStr for Sign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "pos" | "positive" => Ok(Sign::Positive),
            "-" | "neg" | "negative" => Ok(Sign::Negative),
            other => Err(Error::InvalidArgument(format!(
                "sign must be + or -, got {other:?}"
            ))),
        }
    }
}

/// Möbius function and squarefree parts for all n up to a fixed limit.
///
/// Memory is one byte (μ) plus four bytes (squarefree part) per integer, so a
/// limit of 10^7 costs about 50 MB transiently and stays comfortable on a
/// desktop.
pub struct SquarefreeSieve {
    limit: usize,
    mu: Vec<i8>,
    sqfree_part: Vec<u32>,
}

impl SquarefreeSieve {
    /// Sieve everything up to and including `limit`.
    pub fn new(limit: usize) -> Self {
        assert!(limit >= 1, "sieve limit must be at least 1");
        assert!(limit <= u32::MAX as usize, "sieve limit exceeds u32 range");
        let mut mu = vec![0i8; limit + 1];
        let mut sqfree_part = vec![0u32; limit + 1];
        let mut composite = vec![false; limit + 1];
        let mut primes: Vec<usize> = Vec::new();
        mu[1] = 1;
        sqfree_part[1] = 1;
        for i in 2..=limit {
            if !composite[i] {
                primes.push(i);
                mu[i] = -1;
                sqfree_part[i] = i as u32;
            }
            for &p in &primes {
                let Some(ip) = i.checked_mul(p).filter(|&ip| ip <= limit) else {
                    break;
                };
                composite[ip] = true;
                if i % p == 0 {
                    mu[ip] = 0;
                    // The exponent of p in ip is even iff sf(i) contains p.
                    sqfree_part[ip] = if sqfree_part[i] % p as u32 == 0 {
                        sqfree_part[i] / p as u32
                    } else {
                        sqfree_part[i] * p as u32
                    };
                    break;
                }
                mu[ip] = -mu[i];
                sqfree_part[ip] = sqfree_part[i] * p as u32;
            }
        }
        SquarefreeSieve {
            limit,
            mu,
            sqfree_part,
        }
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    /// μ(n); n must be within the sieve limit.
    pub fn mu(&self, n: u64) -> i8 {
        self.mu[n as usize]
    }

    /// The squarefree part of n (positive n within the limit).
    pub fn squarefree_part(&self, n: u64) -> u64 {
        self.sqfree_part[n as usize] as u64
    }

    /// Squarefree kernel of a signed nonzero n with |n| within the limit.
    pub fn kernel(&self, n: i64) -> i64 {
        let s = self.sqfree_part[n.unsigned_abs() as usize] as i64;
        if n < 0 {
            -s
        } else {
            s
        }
    }

    pub fn is_squarefree(&self, n: u64) -> bool {
        self.mu[n as usize] != 0
    }

    /// Number of squarefree integers in [1, bound].
    pub fn squarefree_count(&self, bound: u64) -> u64 {
        (1..=bound as usize).filter(|&n| self.mu[n] != 0).count() as u64
    }

    /// Discriminant of Q(√n) for nonzero n with |n| within the limit; perfect
    /// squares give the sentinel 1.
    pub fn field_discriminant(&self, n: i64) -> i64 {
        discriminant_of_kernel(self.kernel(n))
    }

    /// Fundamental-discriminant test for |d| within the limit (4·limit for the
    /// d ≡ 0 (mod 4) branch, which only reads |d|/4).
    pub fn is_fundamental(&self, d: i64) -> bool {
        if d == 0 || d == 1 {
            return false;
        }
        match d.rem_euclid(4) {
            1 => self.is_squarefree(d.unsigned_abs()),
            0 => {
                let k = d / 4;
                matches!(k.rem_euclid(4), 2 | 3) && self.is_squarefree(k.unsigned_abs())
            }
            _ => false,
        }
    }

    /// All fundamental discriminants D with |D| ≤ x, D ≡ m (mod n_mod) and the
    /// requested sign, in order of increasing |D|.
    pub fn discriminants(&self, x: u64, m: u64, n_mod: u64, sign: Sign) -> Vec<i64> {
        assert!(n_mod >= 1);
        assert!(
            (x as usize) <= self.limit,
            "bound {x} exceeds sieve limit {}",
            self.limit
        );
        let mut out = Vec::new();
        for a in 2..=x {
            let d = a as i64 * sign.as_i64();
            if (d - m as i64).rem_euclid(n_mod as i64) == 0 && self.is_fundamental(d) {
                out.push(d);
            }
        }
        out
    }
}

/// Exact squarefree decomposition n = d·m² with d squarefree and
/// sign(d) = sign(n), by trial division.
pub fn squarefree_part(n: i64) -> Result<(i64, u64)> {
    if n == 0 {
        return Err(Error::ZeroInput);
    }
    let mut rest = n.unsigned_abs();
    let mut d: u64 = 1;
    let mut m: u64 = 1;
    let mut p: u64 = 2;
    while p * p <= rest {
        if rest % p == 0 {
            let mut e = 0u32;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            if e % 2 == 1 {
                d *= p;
            }
            for _ in 0..e / 2 {
                m *= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    d *= rest; // leftover prime appears to the first power
    let d = d as i64 * n.signum();
    Ok((d, m))
}

fn discriminant_of_kernel(d: i64) -> i64 {
    if d == 1 {
        1
    } else if d.rem_euclid(4) == 1 {
        d
    } else {
        4 * d
    }
}

/// Discriminant of the quadratic field Q(√n) for nonzero n; perfect squares
/// give the sentinel 1 (the rationals).
pub fn field_discriminant(n: i64) -> Result<i64> {
    let (d, _) = squarefree_part(n)?;
    Ok(discriminant_of_kernel(d))
}

/// Standalone fundamental-discriminant test (trial division; use the sieve
/// method for bulk work).
pub fn is_fundamental(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    let sf = |n: i64| squarefree_part(n).map(|(_, m)| m == 1).unwrap_or(false);
    match d.rem_euclid(4) {
        1 => sf(d),
        0 => {
            let k = d / 4;
            matches!(k.rem_euclid(4), 2 | 3) && sf(k)
        }
        _ => false,
    }
}

/// All fundamental discriminants D with |D| ≤ x, D ≡ m (mod n_mod), of the
/// given sign, in order of increasing |D|. Builds a throwaway sieve; callers
/// with one in hand should use [`SquarefreeSieve::discriminants`].
pub fn enumerate_discriminants(x: u64, m: u64, n_mod: u64, sign: Sign) -> Vec<i64> {
    SquarefreeSieve::new((x as usize).max(1)).discriminants(x, m, n_mod, sign)
}

/// A congruence family D ≡ m (mod n): the pair plus its admissibility status.
///
/// Admissibility is the arithmetic condition under which the congruence family
/// of fundamental discriminants has the classical Euler-product main term:
///
/// * every odd prime p dividing gcd(m, n) must satisfy p² | n and p² ∤ m;
/// * if n is even then either 4 | n and m ≡ 1 (mod 4), or 16 | n and
///   m ≡ 8 or 12 (mod 16).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CongruencePair {
    pub m: u64,
    pub n: u64,
    pub admissible: bool,
}

impl CongruencePair {
    pub fn new(m: u64, n: u64) -> Self {
        CongruencePair {
            m,
            n,
            admissible: nh_admissible(m, n),
        }
    }
}

/// Admissibility of the congruence pair (m, n); see [`CongruencePair`].
pub fn nh_admissible(m: u64, n: u64) -> bool {
    if m == 0 || n == 0 {
        return false;
    }
    let mut g = gcd(m, n);
    // Strip the even part; the p = 2 condition is handled separately.
    while g % 2 == 0 {
        g /= 2;
    }
    let mut p = 3;
    while p * p <= g {
        if g % p == 0 {
            if n % (p * p) != 0 || m % (p * p) == 0 {
                return false;
            }
            while g % p == 0 {
                g /= p;
            }
        }
        p += 2;
    }
    if g > 1 {
        // g itself is an odd prime divisor of gcd(m, n).
        if n % (g * g) != 0 || m % (g * g) == 0 {
            return false;
        }
    }
    if n % 2 == 0 {
        let four = n % 4 == 0 && m % 4 == 1;
        let sixteen = n % 16 == 0 && matches!(m % 16, 8 | 12);
        if !(four || sixteen) {
            return false;
        }
    }
    true
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn euler_phi(mut n: u64) -> u64 {
    let mut phi = 1u64;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut pk = 1u64;
            n /= p;
            while n % p == 0 {
                n /= p;
                pk *= p;
            }
            phi *= pk * (p - 1);
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        phi *= n - 1;
    }
    phi
}

/// The rational coefficient r in `r · X / π²` shared by both main terms:
/// r = lead/φ(N) · ∏_{p|N} q/(1+p), reduced to lowest terms.
fn main_term_rational(lead: u128, n: u64) -> (u128, u128) {
    let mut num = lead;
    let mut den = euler_phi(n) as u128;
    let mut rest = n;
    let mut p = 2u64;
    while p as u128 * p as u128 <= rest as u128 {
        if rest % p == 0 {
            while rest % p == 0 {
                rest /= p;
            }
            num *= if p == 2 { 4 } else { p as u128 };
            den *= 1 + p as u128;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        num *= rest as u128;
        den *= 1 + rest as u128;
    }
    let g = gcd128(num, den);
    (num / g, den / g)
}

fn gcd128(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd128(b, a % b)
    }
}

/// Main term for the count |S±(X, m, N)| of fundamental discriminants with
/// |D| ≤ X in an admissible congruence family:
/// (3X/(π²φ(N))) · ∏_{p|N} q/(1+p), q = 4 at p = 2 and q = p otherwise.
pub fn s_plus_main_term(x: f64, m: u64, n: u64) -> Result<f64> {
    if !nh_admissible(m, n) {
        return Err(Error::NotAdmissible(m, n));
    }
    let (num, den) = main_term_rational(3, n);
    Ok(num as f64 / den as f64 * x / (std::f64::consts::PI * std::f64::consts::PI))
}

/// Main term for the 3-torsion sum Σ 3^r₃(D) over the same family:
/// (4X/(π²φ(N))) · ∏_{p|N} q/(1+p). Exactly 4/3 of [`s_plus_main_term`].
pub fn torsion_main_term(x: f64, m: u64, n: u64) -> Result<f64> {
    if !nh_admissible(m, n) {
        return Err(Error::NotAdmissible(m, n));
    }
    let (num, den) = main_term_rational(4, n);
    Ok(num as f64 / den as f64 * x / (std::f64::consts::PI * std::f64::consts::PI))
}

/// The window-length driver c(N) = 1/(5·((log N)² + 1)^½), strictly decreasing
/// in N with c(1) = 1/5. Defined for every real n ≥ 1.
pub fn c_of_n(n: f64) -> f64 {
    assert!(n >= 1.0, "c(N) needs N >= 1");
    let l = n.ln();
    1.0 / (5.0 * (l * l + 1.0).sqrt())
}

/// Fraction of n ≤ limit with n/φ(n) > x. The tail is eventually governed by
/// extreme values of n/φ(n) (Erdős); this helper only reports the empirical
/// fraction.
pub fn phi_ratio_tail(x: f64, limit: u64) -> f64 {
    assert!(limit >= 1);
    let limit = limit as usize;
    // Linear totient sieve, same skeleton as the squarefree sieve.
    let mut phi = vec![0u64; limit + 1];
    let mut composite = vec![false; limit + 1];
    let mut primes: Vec<usize> = Vec::new();
    phi[1] = 1;
    for i in 2..=limit {
        if !composite[i] {
            primes.push(i);
            phi[i] = i as u64 - 1;
        }
        for &p in &primes {
            let Some(ip) = i.checked_mul(p).filter(|&ip| ip <= limit) else {
                break;
            };
            composite[ip] = true;
            if i % p == 0 {
                phi[ip] = phi[i] * p as u64;
                break;
            }
            phi[ip] = phi[i] * (p as u64 - 1);
        }
    }
    let count = (1..=limit)
        .filter(|&n| n as f64 > x * phi[n] as f64)
        .count();
    count as f64 / limit as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Trial-division Möbius, used as an independent oracle for the sieve.
    fn mu_oracle(mut n: u64) -> i8 {
        let mut count = 0;
        let mut p = 2;
        while p * p <= n {
            if n % p == 0 {
                n /= p;
                if n % p == 0 {
                    return 0;
                }
                count += 1;
            }
            p += 1;
        }
        if n > 1 {
            count += 1;
        }
        if count % 2 == 0 {
            1
        } else {
            -1
        }
    }

    #[test]
    fn mobius_small_values() {
        let sieve = SquarefreeSieve::new(10);
        let expect = [1, -1, -1, 0, -1, 1, -1, 0, 0, 1];
        for (n, &e) in (1..=10).zip(expect.iter()) {
            assert_eq!(sieve.mu(n), e, "mu({n})");
        }
    }

    #[test]
    fn mobius_matches_oracle() {
        let sieve = SquarefreeSieve::new(5000);
        for n in 1..=5000u64 {
            assert_eq!(sieve.mu(n), mu_oracle(n), "mu({n})");
        }
    }

    #[test]
    fn squarefree_count_to_100() {
        let sieve = SquarefreeSieve::new(100);
        assert_eq!(sieve.squarefree_count(100), 61);
    }

    #[test]
    fn squarefree_part_examples() {
        assert_eq!(squarefree_part(12).unwrap(), (3, 2));
        assert_eq!(squarefree_part(-75).unwrap(), (-3, 5));
        assert_eq!(squarefree_part(16).unwrap(), (1, 4));
        assert!(squarefree_part(0).is_err());
    }

    #[test]
    fn squarefree_part_recomposes() {
        let sieve = SquarefreeSieve::new(3000);
        for n in 1..=3000i64 {
            let (d, m) = squarefree_part(n).unwrap();
            assert_eq!(d * (m * m) as i64, n);
            assert_eq!(squarefree_part(d).unwrap().1, 1, "{d} must be squarefree");
            assert_eq!(sieve.squarefree_part(n as u64) as i64, d);
            let (dn, mn) = squarefree_part(-n).unwrap();
            assert_eq!((dn, mn), (-d, m));
        }
    }

    #[test]
    fn field_discriminant_examples() {
        assert_eq!(field_discriminant(8).unwrap(), 8);
        assert_eq!(field_discriminant(45).unwrap(), 5);
        assert_eq!(field_discriminant(49).unwrap(), 1);
        assert_eq!(field_discriminant(-1).unwrap(), -4);
        assert_eq!(field_discriminant(-3).unwrap(), -3);
    }

    #[test]
    fn field_discriminant_square_multiples() {
        for n in 1..=400i64 {
            for k in 1..=5i64 {
                assert_eq!(
                    field_discriminant(n).unwrap(),
                    field_discriminant(n * k * k).unwrap()
                );
                assert_eq!(
                    field_discriminant(-n).unwrap(),
                    field_discriminant(-n * k * k).unwrap()
                );
            }
        }
    }

    #[test]
    fn discriminants_small_lists() {
        assert_eq!(
            enumerate_discriminants(20, 1, 1, Sign::Positive),
            vec![5, 8, 12, 13, 17]
        );
        assert_eq!(
            enumerate_discriminants(20, 1, 1, Sign::Negative),
            vec![-3, -4, -7, -8, -11, -15, -19, -20]
        );
        assert_eq!(
            enumerate_discriminants(30, 1, 4, Sign::Positive),
            vec![5, 13, 17, 21, 29]
        );
    }

    #[test]
    fn discriminants_match_definition_oracle() {
        // Independent classification: D is fundamental iff D ≡ 1 (4) and
        // squarefree, or D = 4k with k ≡ 2,3 (4) squarefree.
        let is_sf = |n: i64| squarefree_part(n).unwrap().1 == 1;
        for sign in [Sign::Positive, Sign::Negative] {
            let got = enumerate_discriminants(300, 1, 1, sign);
            let mut want = Vec::new();
            for a in 2..=300i64 {
                let d = a * sign.as_i64();
                let fundamental = match d.rem_euclid(4) {
                    1 => is_sf(d),
                    0 => matches!((d / 4).rem_euclid(4), 2 | 3) && is_sf(d / 4),
                    _ => false,
                };
                if fundamental {
                    want.push(d);
                }
            }
            assert_eq!(got, want);
        }
    }

    #[test]
    fn discriminants_partition_over_residues() {
        let sieve = SquarefreeSieve::new(400);
        for sign in [Sign::Positive, Sign::Negative] {
            let all = sieve.discriminants(400, 1, 1, sign);
            let mut union: Vec<i64> = Vec::new();
            for m in 1..=4 {
                union.extend(sieve.discriminants(400, m, 4, sign));
            }
            union.sort_by_key(|d| d.abs());
            assert_eq!(all, union);
        }
    }

    #[test]
    fn admissible_pairs() {
        assert!(nh_admissible(1, 1));
        assert!(nh_admissible(1, 4));
        assert!(!nh_admissible(2, 4));
        assert!(!nh_admissible(3, 4));
        assert!(nh_admissible(8, 16));
        assert!(nh_admissible(12, 16));
        assert!(!nh_admissible(4, 16));
        // odd prime in the gcd: needs p² | n and p² ∤ m
        assert!(nh_admissible(3, 9));
        assert!(!nh_admissible(9, 9));
        assert!(!nh_admissible(3, 3));
        assert!(nh_admissible(2, 1));
    }

    #[test]
    fn main_terms_match_closed_forms() {
        let x = 1e6;
        let s11 = s_plus_main_term(x, 1, 1).unwrap();
        assert!((s11 - 303_963.55).abs() < 0.5, "got {s11}");
        let s14 = s_plus_main_term(x, 1, 4).unwrap();
        assert!((s14 - 202_642.37).abs() < 0.5, "got {s14}");
        let t11 = torsion_main_term(x, 1, 1).unwrap();
        assert!((t11 - 405_284.73).abs() < 0.5, "got {t11}");
        let t14 = torsion_main_term(x, 1, 4).unwrap();
        assert!((t14 - 270_189.82).abs() < 0.5, "got {t14}");
        assert!(s_plus_main_term(x, 2, 4).is_err());
    }

    #[test]
    fn torsion_to_count_ratio_is_four_thirds() {
        for (m, n) in [(1u64, 1u64), (1, 4), (8, 16), (3, 9), (1, 12)] {
            if !nh_admissible(m, n) {
                continue;
            }
            let s = s_plus_main_term(1e5, m, n).unwrap();
            let t = torsion_main_term(1e5, m, n).unwrap();
            assert!((t / s - 4.0 / 3.0).abs() < 1e-12, "(m,n)=({m},{n})");
        }
    }

    #[test]
    fn c_of_n_values() {
        assert!((c_of_n(1.0) - 0.2).abs() < 1e-15);
        let e = std::f64::consts::E;
        assert!((c_of_n(e) - 1.0 / (5.0 * 2f64.sqrt())).abs() < 1e-15);
        let mut prev = c_of_n(1.0);
        for n in 2..=100 {
            let cur = c_of_n(n as f64);
            assert!(cur < prev, "c must decrease at N={n}");
            prev = cur;
        }
    }

    #[test]
    fn phi_ratio_tail_basics() {
        // n/φ(n) > 1 for every n except n = 1.
        let t = phi_ratio_tail(1.0, 10_000);
        assert!((t - 0.9999).abs() < 1e-12);
        // Brute-force check at x = 3.
        let mut count = 0;
        for n in 1u64..=10_000 {
            let phi = (1..=n).filter(|&k| gcd(k, n) == 1).count() as u64;
            if n as f64 > 3.0 * phi as f64 {
                count += 1;
            }
        }
        let t3 = phi_ratio_tail(3.0, 10_000);
        assert!((t3 - count as f64 / 10_000.0).abs() < 1e-12);
    }
}
