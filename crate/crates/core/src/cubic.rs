//! Integral binary cubic forms under the GL₂(ℤ) substitution action.
//!
//! A form F(x, y) = ax³ + bx²y + cxy² + dy³ has discriminant
//! Δ = 18abcd + b²c² − 4ac³ − 4b³d − 27a²d², an invariant of the action,
//! and Hessian (P, Q, R) = (b² − 3ac, bc − 9ad, c² − 3bd), a quadratic
//! covariant of discriminant −3Δ.
//!
//! For Δ < 0 write F = a(x − θ)(x² + px + q) with θ the real root.  F is
//! reduced when a > 0, −1 < p < 1 and q > 1; every SL₂(ℤ) class of
//! irreducible forms contains exactly one reduced representative with
//! positive leading coefficient.  All reduction decisions are exact sign
//! evaluations of F at integer arguments; a floating-point root only
//! seeds the translation search.  For Δ > 0 the Hessian is positive
//! definite, so a class is pinned down by Gauss-reducing the Hessian with
//! a tracked transformation and sweeping its finite stabilizer.
//!
//! Classes of bounded discriminant are enumerated straight from the
//! reduction inequalities (Δ < 0) or by inverting the syzygy
//! U² = 4P³ − 27Δa² with U = 2Pb − 3Qa (Δ > 0).  Maximality of the cubic
//! ring attached to a form is the multiple-root test in P¹(F_p) for each
//! prime with p² | Δ.  `dh_checksum` compares the number of maximal
//! classes per fundamental discriminant against the quadratic-side count
//! (3^{r₃(D)} − 1)/2 of index-3 subgroups of the class group.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::arith::{self, CongruencePair, Sign};
use crate::quad::bulk::RankTables;
use crate::{Error, Result};

/// Binary cubic form ax³ + bx²y + cxy² + dy³ with integer coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CubicForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl fmt::Display for CubicForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.a, self.b, self.c, self.d)
    }
}

impl CubicForm {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> CubicForm {
        CubicForm { a, b, c, d }
    }

    /// Value F(u, v), computed in 128-bit arithmetic.
    pub fn eval(&self, u: i128, v: i128) -> i128 {
        ((self.a as i128 * u + self.b as i128 * v) * u + self.c as i128 * v * v) * u
            + self.d as i128 * v * v * v
    }

    fn disc128(&self) -> i128 {
        let (a, b, c, d) = (
            self.a as i128,
            self.b as i128,
            self.c as i128,
            self.d as i128,
        );
        18 * a * b * c * d + b * b * c * c - 4 * a * c * c * c - 4 * b * b * b * d
            - 27 * a * a * d * d
    }

    pub fn discriminant(&self) -> i64 {
        i64::try_from(self.disc128()).expect("cubic discriminant overflows i64")
    }

    fn hessian128(&self) -> (i128, i128, i128) {
        let (a, b, c, d) = (
            self.a as i128,
            self.b as i128,
            self.c as i128,
            self.d as i128,
        );
        (b * b - 3 * a * c, b * c - 9 * a * d, c * c - 3 * b * d)
    }

    /// Hessian covariant (P, Q, R) with P = b² − 3ac, Q = bc − 9ad,
    /// R = c² − 3bd; its discriminant Q² − 4PR equals −3Δ.
    pub fn hessian(&self) -> (i64, i64, i64) {
        let (p, q, r) = self.hessian128();
        (
            i64::try_from(p).expect("hessian overflow"),
            i64::try_from(q).expect("hessian overflow"),
            i64::try_from(r).expect("hessian overflow"),
        )
    }

    pub fn is_primitive(&self) -> bool {
        gcd(
            gcd(self.a.unsigned_abs(), self.b.unsigned_abs()),
            gcd(self.c.unsigned_abs(), self.d.unsigned_abs()),
        ) == 1
    }

    /// Rational root test: F(x, 1) has a root u/v with u | d and v | a,
    /// and F reducible over ℚ is equivalent to having such a root (or a
    /// vanishing leading or trailing coefficient).
    pub fn is_irreducible(&self) -> bool {
        if self.a == 0 || self.d == 0 {
            return false;
        }
        let num = divisors(self.d.unsigned_abs());
        let den = divisors(self.a.unsigned_abs());
        for &v in &den {
            for &u in &num {
                if gcd(u as u64, v as u64) != 1 {
                    continue;
                }
                if self.eval(u as i128, v as i128) == 0 || self.eval(-(u as i128), v as i128) == 0 {
                    return false;
                }
            }
        }
        true
    }

    fn neg(&self) -> CubicForm {
        CubicForm::new(-self.a, -self.b, -self.c, -self.d)
    }

    fn yflip(&self) -> CubicForm {
        CubicForm::new(self.a, -self.b, self.c, -self.d)
    }

    /// Substitution x ↦ px + qy, y ↦ rx + sy with no determinant check.
    fn transform128(&self, p: i128, q: i128, r: i128, s: i128) -> CubicForm {
        let (a, b, c, d) = (
            self.a as i128,
            self.b as i128,
            self.c as i128,
            self.d as i128,
        );
        let na = self.eval(p, r);
        let nd = self.eval(q, s);
        let nb = 3 * a * p * p * q
            + b * (p * p * s + 2 * p * q * r)
            + c * (2 * p * r * s + q * r * r)
            + 3 * d * r * r * s;
        let nc = 3 * a * p * q * q
            + b * (2 * p * q * s + q * q * r)
            + c * (p * s * s + 2 * q * r * s)
            + 3 * d * r * s * s;
        CubicForm::new(
            i64::try_from(na).expect("transformed coefficient overflows i64"),
            i64::try_from(nb).expect("transformed coefficient overflows i64"),
            i64::try_from(nc).expect("transformed coefficient overflows i64"),
            i64::try_from(nd).expect("transformed coefficient overflows i64"),
        )
    }

    /// Action of a matrix [[p, q], [r, s]] in GL₂(ℤ).
    pub fn apply_unimodular(&self, m: &[[i64; 2]; 2]) -> Result<CubicForm> {
        let det = m[0][0] as i128 * m[1][1] as i128 - m[0][1] as i128 * m[1][0] as i128;
        if det != 1 && det != -1 {
            return Err(Error::NotUnimodular(det as i64));
        }
        Ok(self.transform128(
            m[0][0] as i128,
            m[0][1] as i128,
            m[1][0] as i128,
            m[1][1] as i128,
        ))
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn divisors(n: u64) -> Vec<i64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut k = 1;
    while k * k <= n {
        if n % k == 0 {
            small.push(k as i64);
            if k * k != n {
                large.push((n / k) as i64);
            }
        }
        k += 1;
    }
    large.reverse();
    small.extend(large);
    small
}

fn isqrt128(n: i128) -> i128 {
    assert!(n >= 0);
    if let Ok(v) = u64::try_from(n) {
        return v.isqrt() as i128;
    }
    let mut x = (n as f64).sqrt() as i128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

fn validate_class_form(f: &CubicForm) -> Result<i128> {
    let disc = f.disc128();
    if disc == 0 {
        return Err(Error::BadCubic(format!("{f} has zero discriminant")));
    }
    if !f.is_primitive() {
        return Err(Error::BadCubic(format!("{f} is imprimitive")));
    }
    if !f.is_irreducible() {
        return Err(Error::BadCubic(format!("{f} is reducible over the rationals")));
    }
    Ok(disc)
}

/// Fast floating-point estimate of the real root of F(x, 1) when Δ < 0.
/// Used only to seed the exact translation search.
fn real_root_hint(f: &CubicForm) -> f64 {
    let a = f.a as f64;
    let b = f.b as f64;
    let c = f.c as f64;
    let d = f.d as f64;
    let shift = -b / (3.0 * a);
    let p = (3.0 * a * c - b * b) / (3.0 * a * a);
    let q = (2.0 * b * b * b - 9.0 * a * b * c + 27.0 * a * a * d) / (27.0 * a * a * a);
    let disc = q * q / 4.0 + p * p * p / 27.0;
    if disc > 0.0 {
        let s = disc.sqrt();
        (-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt() + shift
    } else {
        shift
    }
}

/// The unique k with −1 < p + 2k < 1, where p = b/a + θ.  Both strict
/// inequalities are decided by signs of F at integer points: with a > 0,
/// θ < u/a exactly when F(u, a) > 0.
fn translation_count(f: &CubicForm) -> i128 {
    debug_assert!(f.a > 0);
    let guess = -(f.b as f64 / f.a as f64 + real_root_hint(f)) / 2.0;
    let mut k = if guess.is_finite() {
        guess.round().clamp(-1e6, 1e6) as i128
    } else {
        0
    };
    let a = f.a as i128;
    let b = f.b as i128;
    for _ in 0..400 {
        if f.eval(-a - b - 2 * k * a, a) >= 0 {
            k += 1;
            continue;
        }
        if f.eval(a - b - 2 * k * a, a) <= 0 {
            k -= 1;
            continue;
        }
        return k;
    }
    panic!("translation search failed for {f}");
}

fn is_reduced_complex(f: &CubicForm) -> bool {
    if f.a < 1 {
        return false;
    }
    let a = f.a as i128;
    let b = f.b as i128;
    if f.eval(-a - b, a) >= 0 {
        return false;
    }
    if f.eval(a - b, a) <= 0 {
        return false;
    }
    // q > 1 exactly when F(−d, a) has the sign of −d.
    let s = f.eval(-(f.d as i128), a).signum();
    s != 0 && s == -(f.d as i128).signum()
}

fn reduce_complex(f0: &CubicForm) -> CubicForm {
    let mut f = if f0.a < 0 { f0.neg() } else { *f0 };
    for _ in 0..10_000 {
        let k = translation_count(&f);
        if k != 0 {
            f = f.transform128(1, k, 0, 1);
        }
        let s = f.eval(-(f.d as i128), f.a as i128).signum();
        if s != 0 && s == -(f.d as i128).signum() {
            return f;
        }
        f = f.transform128(0, -1, 1, 0);
        if f.a < 0 {
            f = f.neg();
        }
    }
    panic!("reduction did not terminate for {f0}");
}

/// SL₂(ℤ)-reduced representative of an irreducible form with Δ < 0,
/// normalized to a positive leading coefficient.
pub fn reduce(f: &CubicForm) -> Result<CubicForm> {
    let disc = validate_class_form(f)?;
    if disc > 0 {
        return Err(Error::WrongSign(f.discriminant()));
    }
    Ok(reduce_complex(f))
}

fn canonical_complex(f: &CubicForm) -> CubicForm {
    let r1 = reduce_complex(f);
    let r2 = reduce_complex(&r1.yflip());
    r1.min(r2)
}

/// Image of a quadratic form (p, q, r) under [[m00, m01], [m10, m11]].
fn quad_apply(h: (i128, i128, i128), m: &[[i128; 2]; 2]) -> (i128, i128, i128) {
    let (p, q, r) = h;
    let np = p * m[0][0] * m[0][0] + q * m[0][0] * m[1][0] + r * m[1][0] * m[1][0];
    let nr = p * m[0][1] * m[0][1] + q * m[0][1] * m[1][1] + r * m[1][1] * m[1][1];
    let nq = 2 * p * m[0][0] * m[0][1]
        + q * (m[0][0] * m[1][1] + m[0][1] * m[1][0])
        + 2 * r * m[1][0] * m[1][1];
    (np, nq, nr)
}

/// Gauss reduction of a positive definite (p, q, r) to 0 ≤ q ≤ p ≤ r,
/// returning the reduced form and the GL₂(ℤ) matrix that achieves it.
fn reduce_hessian_tracked(h: (i128, i128, i128)) -> ((i128, i128, i128), [[i128; 2]; 2]) {
    let (mut p, mut q, mut r) = h;
    assert!(p > 0 && q * q < 4 * p * r, "hessian not positive definite");
    let mut m = [[1i128, 0], [0, 1]];
    loop {
        if q > p || q <= -p {
            let two_p = 2 * p;
            let mut t = q.rem_euclid(two_p);
            if t > p {
                t -= two_p;
            }
            let k = (t - q) / two_p;
            r += k * (q + t) / 2;
            q = t;
            m = [
                [m[0][0], m[0][0] * k + m[0][1]],
                [m[1][0], m[1][0] * k + m[1][1]],
            ];
        }
        if p > r {
            let swapped = (r, -q, p);
            p = swapped.0;
            q = swapped.1;
            r = swapped.2;
            m = [[m[0][1], -m[0][0]], [m[1][1], -m[1][0]]];
        } else {
            break;
        }
    }
    if q < 0 {
        q = -q;
        m = [[m[0][0], -m[0][1]], [m[1][0], -m[1][1]]];
    }
    debug_assert!(0 <= q && q <= p && p <= r);
    ((p, q, r), m)
}

/// Canonical representative for Δ > 0: carry F to a form whose Hessian
/// is Gauss reduced, then take the lexicographic minimum over the
/// Hessian's stabilizer and the sign normalization a > 0.  Stabilizer
/// elements of a reduced definite form have entries in {−1, 0, 1}, so a
/// sweep of the 81 candidate matrices is exhaustive.
fn canonical_real(f: &CubicForm) -> CubicForm {
    let h = f.hessian128();
    let (hr, m) = reduce_hessian_tracked(h);
    let base = f.transform128(m[0][0], m[0][1], m[1][0], m[1][1]);
    debug_assert_eq!(base.hessian128(), hr);
    let mut best: Option<CubicForm> = None;
    for s00 in -1i128..=1 {
        for s01 in -1i128..=1 {
            for s10 in -1i128..=1 {
                for s11 in -1i128..=1 {
                    let det = s00 * s11 - s01 * s10;
                    if det != 1 && det != -1 {
                        continue;
                    }
                    let sigma = [[s00, s01], [s10, s11]];
                    if quad_apply(hr, &sigma) != hr {
                        continue;
                    }
                    let mut cand = base.transform128(s00, s01, s10, s11);
                    if cand.a < 0 {
                        cand = cand.neg();
                    }
                    debug_assert!(cand.a > 0);
                    if best.map_or(true, |cur| cand < cur) {
                        best = Some(cand);
                    }
                }
            }
        }
    }
    best.expect("identity stabilizes the hessian")
}

/// Deterministic class representative: equal for two forms exactly when
/// they lie in the same GL₂(ℤ) orbit.  Requires an irreducible primitive
/// form with nonzero discriminant.
pub fn canonical_class_rep(f: &CubicForm) -> Result<CubicForm> {
    let disc = validate_class_form(f)?;
    if disc < 0 {
        Ok(canonical_complex(f))
    } else {
        Ok(canonical_real(f))
    }
}

fn square_prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            if e >= 2 {
                out.push(p);
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    out
}

/// Witness search for an index-p overring: F is non-maximal at p exactly
/// when some GL₂(ℤ) transform (a′, b′, c′, d′) has p² | a′ and p | b′.
/// It suffices to move each multiple root of F mod p in P¹(F_p) to the
/// point at infinity; the root r ↦ ∞ move sends (a, b) to
/// (F(r, 1), −(3ar² + 2br + c)), and a′ mod p² does not depend on the
/// choice of lift of the root.
fn nonmaximal_at(f: &CubicForm, p: u64) -> bool {
    let pi = p as i128;
    let p2 = pi * pi;
    let a = f.a as i128;
    let b = f.b as i128;
    let c = f.c as i128;
    if a.rem_euclid(pi) == 0 && b.rem_euclid(pi) == 0 && a.rem_euclid(p2) == 0 {
        return true;
    }
    for r in 0..pi {
        let value = f.eval(r, 1);
        if value.rem_euclid(pi) != 0 {
            continue;
        }
        let deriv = 3 * a * r * r + 2 * b * r + c;
        if deriv.rem_euclid(pi) != 0 {
            continue;
        }
        if value.rem_euclid(p2) == 0 {
            return true;
        }
    }
    false
}

fn maximal_unchecked(f: &CubicForm, disc: i128) -> bool {
    let d_abs = u64::try_from(disc.unsigned_abs()).expect("discriminant too large to factor");
    for p in square_prime_divisors(d_abs) {
        if nonmaximal_at(f, p) {
            debug_assert_eq!(disc.rem_euclid((p * p) as i128), 0);
            return false;
        }
    }
    true
}

/// Whether the cubic ring attached to F is maximal, meaning the ring of
/// integers of the field F cuts out.  Only primes with p² | Δ can carry
/// an index-p overring, so those are the only ones examined.
pub fn is_maximal(f: &CubicForm) -> Result<bool> {
    let disc = validate_class_form(f)?;
    Ok(maximal_unchecked(f, disc))
}

/// One enumerated GL₂(ℤ) class: its canonical representative and whether
/// the attached cubic ring is maximal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassEntry {
    pub rep: CubicForm,
    pub maximal: bool,
}

/// All classes of irreducible primitive forms with 0 < ±Δ ≤ bound,
/// grouped by discriminant.
#[derive(Debug, Clone)]
pub struct ClassInventory {
    bound: u64,
    sign: Sign,
    classes: BTreeMap<i64, Vec<ClassEntry>>,
}

impl ClassInventory {
    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn classes(&self) -> impl Iterator<Item = (i64, &[ClassEntry])> {
        self.classes.iter().map(|(d, v)| (*d, v.as_slice()))
    }

    pub fn entries_at(&self, disc: i64) -> &[ClassEntry] {
        self.classes.get(&disc).map_or(&[], |v| v.as_slice())
    }

    pub fn class_count(&self) -> u64 {
        self.classes.values().map(|v| v.len() as u64).sum()
    }

    pub fn maximal_count(&self) -> u64 {
        self.classes
            .values()
            .flatten()
            .filter(|e| e.maximal)
            .count() as u64
    }

    pub fn maximal_at(&self, disc: i64) -> u64 {
        self.entries_at(disc).iter().filter(|e| e.maximal).count() as u64
    }
}

/// Reduced forms with leading coefficient a and −x ≤ Δ < 0.  The search
/// box comes from the reduction inequalities: |Δ| ≥ 3a⁴(θ − 1/2)⁴ bounds
/// the real root, |Δ| ≥ 3a⁴(q − 1/4)² bounds q, and for fixed (a, b, c)
/// the discriminant is a downward parabola in d, so d runs over an
/// interval computed from its roots.  Each GL₂(ℤ) class is kept exactly
/// once, at the smaller of its two SL₂(ℤ)-reduced representatives.
fn complex_reps_for_a(x: u64, a: i64) -> Vec<CubicForm> {
    let xf = x as f64;
    let af = a as f64;
    let theta_max = 0.5 + (xf / 3.0).powf(0.25) / af + 0.05;
    let q_max = (xf / 3.0).sqrt() / (af * af) + 0.25 + 0.05;
    let b_cap = (af * (1.0 + theta_max)).ceil() as i64 + 1;
    let c_cap = (af * (q_max + theta_max)).ceil() as i64 + 1;
    let mut out = Vec::new();
    for b in -b_cap..=b_cap {
        for c in -c_cap..=c_cap {
            let ai = a as i128;
            let bi = b as i128;
            let ci = c as i128;
            let lin = 18 * ai * bi * ci - 4 * bi * bi * bi;
            let cst = bi * bi * ci * ci - 4 * ai * ci * ci * ci;
            // Δ(d) ≥ −x solves 27a²d² − lin·d − (cst + x) ≤ 0.
            let quad = 27 * ai * ai;
            let rad = lin * lin + 4 * quad * (cst + x as i128);
            if rad < 0 {
                continue;
            }
            let sq = (rad as f64).sqrt();
            let lo = ((lin as f64 - sq) / (2.0 * quad as f64)).floor() as i64 - 2;
            let hi = ((lin as f64 + sq) / (2.0 * quad as f64)).ceil() as i64 + 2;
            for d in lo..=hi {
                let f = CubicForm::new(a, b, c, d);
                let disc = f.disc128();
                if disc >= 0 || disc < -(x as i128) {
                    continue;
                }
                if !is_reduced_complex(&f) || !f.is_primitive() || !f.is_irreducible() {
                    continue;
                }
                let mirror = reduce_complex(&f.yflip());
                if f <= mirror {
                    out.push(f);
                }
            }
        }
    }
    out
}

fn enumerate_complex(x: u64) -> BTreeMap<i64, Vec<CubicForm>> {
    let a_cap = (16.0 * x as f64 / 27.0).powf(0.25).ceil() as i64 + 1;
    let per: Vec<Vec<CubicForm>> = (1..=a_cap)
        .into_par_iter()
        .map(|a| complex_reps_for_a(x, a))
        .collect();
    let mut map: BTreeMap<i64, Vec<CubicForm>> = BTreeMap::new();
    for f in per.into_iter().flatten() {
        map.entry(f.discriminant()).or_default().push(f);
    }
    for v in map.values_mut() {
        v.sort_unstable();
        v.dedup();
    }
    map
}

/// Classes with 0 < Δ ≤ x whose reduced Hessian has leading coefficient
/// ph.  Runs over reduced definite Hessians (P, Q, R), 0 ≤ Q ≤ P ≤ R,
/// with 4PR − Q² = 3Δ, and recovers coefficients through the syzygy:
/// U² = 4P³ − 27Δa², b = (U + 3Qa)/(2P), c = (b² − P)/(3a),
/// d = (bc − Q)/(9a).  Every candidate is verified against its actual
/// Hessian and discriminant before canonicalization.
fn real_reps_for_p(x: u64, ph: i64) -> Vec<CubicForm> {
    let p = ph as i128;
    let xi = x as i128;
    let mut out = Vec::new();
    for q in 0..=p {
        let q2 = q * q;
        let rmin = std::cmp::max(p, (3 + q2 + 4 * p - 1).div_euclid(4 * p));
        let rmax = (3 * xi + q2).div_euclid(4 * p);
        for r in rmin..=rmax {
            let t = 4 * p * r - q2;
            if t % 3 != 0 {
                continue;
            }
            let delta = t / 3;
            if delta < 1 || delta > xi {
                continue;
            }
            let cube = 4 * p * p * p;
            let amax = isqrt128(cube / (27 * delta));
            for a in 1..=amax {
                let u2 = cube - 27 * delta * a * a;
                if u2 < 0 {
                    break;
                }
                let u = isqrt128(u2);
                if u * u != u2 {
                    continue;
                }
                let mut signs = vec![u];
                if u != 0 {
                    signs.push(-u);
                }
                for uu in signs {
                    let bn = uu + 3 * q * a;
                    if bn.rem_euclid(2 * p) != 0 {
                        continue;
                    }
                    let b = bn / (2 * p);
                    let cn = b * b - p;
                    if cn.rem_euclid(3 * a) != 0 {
                        continue;
                    }
                    let c = cn / (3 * a);
                    let dn = b * c - q;
                    if dn.rem_euclid(9 * a) != 0 {
                        continue;
                    }
                    let d = dn / (9 * a);
                    let f = CubicForm::new(a as i64, b as i64, c as i64, d as i64);
                    if f.disc128() != delta || f.hessian128() != (p, q, r) {
                        continue;
                    }
                    if !f.is_primitive() || !f.is_irreducible() {
                        continue;
                    }
                    out.push(canonical_real(&f));
                }
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn enumerate_real(x: u64) -> BTreeMap<i64, Vec<CubicForm>> {
    let p_cap = (x as f64).sqrt().ceil() as i64 + 1;
    let per: Vec<Vec<CubicForm>> = (1..=p_cap)
        .into_par_iter()
        .map(|p| real_reps_for_p(x, p))
        .collect();
    let mut map: BTreeMap<i64, Vec<CubicForm>> = BTreeMap::new();
    for f in per.into_iter().flatten() {
        map.entry(f.discriminant()).or_default().push(f);
    }
    for v in map.values_mut() {
        v.sort_unstable();
        v.dedup();
    }
    map
}

/// Enumerate every GL₂(ℤ) class of irreducible primitive cubic forms
/// with 0 < ±Δ ≤ x, storing canonical representatives tagged with
/// maximality of the attached ring.
pub fn enumerate_classes(x: u64, sign: Sign) -> Result<ClassInventory> {
    if x == 0 {
        return Err(Error::InvalidArgument(
            "discriminant bound must be positive".into(),
        ));
    }
    let reps = match sign {
        Sign::Positive => enumerate_real(x),
        Sign::Negative => enumerate_complex(x),
    };
    let classes = reps
        .into_iter()
        .map(|(disc, v)| {
            let entries = v
                .into_iter()
                .map(|rep| ClassEntry {
                    maximal: maximal_unchecked(&rep, disc as i128),
                    rep,
                })
                .collect();
            (disc, entries)
        })
        .collect();
    Ok(ClassInventory {
        bound: x,
        sign,
        classes,
    })
}

/// Congruence condition on forms at a single prime power: membership
/// depends only on the coefficients mod p^α.
pub struct LocalFilter {
    p: u64,
    alpha: u32,
    allowed: Box<dyn Fn([u64; 4]) -> bool + Send + Sync>,
}

impl fmt::Debug for LocalFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LocalFilter")
            .field("p", &self.p)
            .field("alpha", &self.alpha)
            .finish()
    }
}

fn is_small_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= p {
        if p % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

fn disc_mod(co: [u64; 4], m: u64) -> u64 {
    let f = CubicForm::new(co[0] as i64, co[1] as i64, co[2] as i64, co[3] as i64);
    f.disc128().rem_euclid(m as i128) as u64
}

impl LocalFilter {
    pub fn new(
        p: u64,
        alpha: u32,
        allowed: impl Fn([u64; 4]) -> bool + Send + Sync + 'static,
    ) -> Result<LocalFilter> {
        if !is_small_prime(p) {
            return Err(Error::InvalidArgument(format!("{p} is not prime")));
        }
        if alpha == 0 || p.checked_pow(alpha).map_or(true, |m| m > 1 << 31) {
            return Err(Error::InvalidArgument(format!(
                "unusable filter modulus {p}^{alpha}"
            )));
        }
        Ok(LocalFilter {
            p,
            alpha,
            allowed: Box::new(allowed),
        })
    }

    /// Keeps classes with Δ ≡ target (mod p^α).
    pub fn disc_congruent(p: u64, alpha: u32, target: u64) -> Result<LocalFilter> {
        let modulus = p
            .checked_pow(alpha)
            .ok_or_else(|| Error::InvalidArgument("filter modulus overflow".into()))?;
        LocalFilter::new(p, alpha, move |co| disc_mod(co, modulus) == target % modulus)
    }

    /// Keeps classes with Δ not divisible by p².
    pub fn disc_coprime_to_square(p: u64) -> Result<LocalFilter> {
        let modulus = p * p;
        LocalFilter::new(p, 2, move |co| disc_mod(co, modulus) != 0)
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn modulus(&self) -> u64 {
        self.p.pow(self.alpha)
    }

    pub fn allows(&self, f: &CubicForm) -> bool {
        let m = self.modulus() as i64;
        (self.allowed)([
            f.a.rem_euclid(m) as u64,
            f.b.rem_euclid(m) as u64,
            f.c.rem_euclid(m) as u64,
            f.d.rem_euclid(m) as u64,
        ])
    }
}

/// Restrict an inventory to the classes passing every filter.  Filters
/// must live at pairwise distinct primes so their conditions are
/// independent.
pub fn apply_filter(inv: &ClassInventory, filters: &[LocalFilter]) -> Result<ClassInventory> {
    for (i, fi) in filters.iter().enumerate() {
        for fj in &filters[i + 1..] {
            if fi.p == fj.p {
                return Err(Error::InvalidArgument(format!(
                    "two filters at the prime {}",
                    fi.p
                )));
            }
        }
    }
    let classes = inv
        .classes
        .iter()
        .filter_map(|(d, v)| {
            let kept: Vec<ClassEntry> = v
                .iter()
                .filter(|e| filters.iter().all(|lf| lf.allows(&e.rep)))
                .copied()
                .collect();
            if kept.is_empty() {
                None
            } else {
                Some((*d, kept))
            }
        })
        .collect();
    Ok(ClassInventory {
        bound: inv.bound,
        sign: inv.sign,
        classes,
    })
}

/// Two independent counts that the Davenport-Heilbronn correspondence
/// forces to be equal: over fundamental discriminants D of the given
/// sign with |D| ≤ x and D ≡ m (mod n), the quadratic side sums
/// (3^{r₃(D)} − 1)/2 and the cubic side counts maximal classes with
/// discriminant D.
pub fn dh_checksum(x: u64, sign: Sign, pair: CongruencePair) -> Result<(u64, u64)> {
    if !pair.admissible {
        return Err(Error::NotAdmissible(pair.m, pair.n));
    }
    let tables = RankTables::build(sign, x, &[3])?;
    let m = pair.m as i64;
    let n = pair.n as i64;
    let mut lhs = 0u64;
    for d_abs in tables.fundamental_discs() {
        let d = sign.as_i64() * d_abs as i64;
        if (d - m).rem_euclid(n) != 0 {
            continue;
        }
        let r = tables.r3(d_abs).expect("fundamental disc is tabulated");
        lhs += (3u64.pow(r) - 1) / 2;
    }
    let inv = enumerate_classes(x, sign)?;
    let mut rhs = 0u64;
    for (d, entries) in inv.classes() {
        if !arith::is_fundamental(d) {
            continue;
        }
        if (d - m).rem_euclid(n) != 0 {
            continue;
        }
        rhs += entries.iter().filter(|e| e.maximal).count() as u64;
    }
    Ok((lhs, rhs))
}
