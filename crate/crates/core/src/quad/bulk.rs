//! Bulk class-number and p-rank tables over every fundamental discriminant
//! up to a bound.
//!
//! Instead of reducing forms one discriminant at a time, enumerate every
//! reduced primitive form with |D| in a chunk directly from the reduction
//! inequalities (|b| ≤ a ≤ c for D < 0; ac < 0, 0 < b, ||a| − |c|| < b for
//! D > 0), bucket them by discriminant, and read the group data off each
//! bucket:
//!
//! * h⁺ is the bucket size (D < 0) or the number of ρ-cycles (D > 0);
//! * #{x : x^p = e} = p^(p-rank), so one composition per class decides
//!   3-torsion (x³ = e ⟺ x² = x⁻¹) and a handful decide p-torsion;
//! * 2-torsion needs no composition at all: a class is its own inverse iff
//!   its reduced form is ambiguous (b = 0, b = a, or a = c) for D < 0, or
//!   its cycle contains the mirror cycle for D > 0.
//!
//! Forms of a fundamental discriminant are automatically primitive, so the
//! fundamentality bitmap is the only filter. Chunks are processed in
//! parallel and are small enough that the transient form lists stay modest
//! even near the top of the range.

use rayon::prelude::*;

use super::{
    compose, is_reduced_indefinite, principal_form, reduce_indefinite, rho, QuadForm,
};
use crate::arith::{Sign, SquarefreeSieve};
use crate::{Error, Result};

/// Narrow class numbers and p-torsion counts for all fundamental
/// discriminants of one sign with |D| ≤ bound, indexed by |D|.
pub struct RankTables {
    sign: Sign,
    bound: u64,
    /// h⁺(D) at index |D|; 0 marks a non-fundamental index.
    h_narrow: Vec<u32>,
    /// Per tabulated prime p, #{x : x^p = e} = p^(p-rank) at index |D|.
    torsion: Vec<(u64, Vec<u32>)>,
}

struct ChunkOut {
    d: Vec<u32>,
    h: Vec<u32>,
    t: Vec<Vec<u32>>,
}

impl RankTables {
    /// Tabulate one sign up to `bound`, with p-torsion counted for each
    /// requested prime (h⁺ alone if `torsion_primes` is empty).
    pub fn build(sign: Sign, bound: u64, torsion_primes: &[u64]) -> Result<RankTables> {
        if bound < 3 {
            return Err(Error::EmptyDomain(format!(
                "no fundamental discriminant has |D| ≤ {bound}"
            )));
        }
        if bound > (i32::MAX as u64) / 4 {
            return Err(Error::InvalidArgument(format!(
                "bound {bound} exceeds the tabulation range"
            )));
        }
        for &p in torsion_primes {
            if p < 2 || (p > 2 && p % 2 == 0) {
                return Err(Error::InvalidArgument(format!("{p} is not prime")));
            }
        }
        let sieve = SquarefreeSieve::new(bound as usize);
        let fund: Vec<bool> = (0..=bound)
            .map(|t| t <= i64::MAX as u64 && sieve.is_fundamental(sign.as_i64() * t as i64))
            .collect();
        drop(sieve);

        let width = (bound / 96).clamp(2_000, 100_000);
        let mut ranges = Vec::new();
        let mut lo = 1u64;
        while lo <= bound {
            let hi = (lo + width - 1).min(bound);
            ranges.push((lo as i64, hi as i64));
            lo = hi + 1;
        }

        let chunks: Vec<ChunkOut> = ranges
            .into_par_iter()
            .map(|(lo, hi)| process_chunk(sign, lo, hi, &fund, torsion_primes))
            .collect();

        let mut h_narrow = vec![0u32; bound as usize + 1];
        let mut torsion: Vec<(u64, Vec<u32>)> = torsion_primes
            .iter()
            .map(|&p| (p, vec![0u32; bound as usize + 1]))
            .collect();
        for chunk in chunks {
            for (k, &d) in chunk.d.iter().enumerate() {
                h_narrow[d as usize] = chunk.h[k];
                for (pi, col) in chunk.t.iter().enumerate() {
                    torsion[pi].1[d as usize] = col[k];
                }
            }
        }
        Ok(RankTables {
            sign,
            bound,
            h_narrow,
            torsion,
        })
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    /// Narrow class number at |D| = d_abs, or None when that index is not a
    /// fundamental discriminant of this sign.
    pub fn h_narrow(&self, d_abs: u64) -> Option<u32> {
        let h = self.h_narrow[d_abs as usize];
        (h > 0).then_some(h)
    }

    /// #{x : x^p = e} at |D| = d_abs for a tabulated prime.
    pub fn torsion_count(&self, p: u64, d_abs: u64) -> Option<u32> {
        let col = &self
            .torsion
            .iter()
            .find(|(q, _)| *q == p)
            .unwrap_or_else(|| panic!("{p}-torsion was not tabulated"))
            .1;
        let t = col[d_abs as usize];
        (t > 0).then_some(t)
    }

    /// p-rank of the narrow class group at |D| = d_abs.
    pub fn r_p(&self, p: u64, d_abs: u64) -> Option<u32> {
        self.torsion_count(p, d_abs).map(|t| {
            let mut t = t as u64;
            let mut r = 0;
            while t > 1 {
                debug_assert_eq!(t % p, 0);
                t /= p;
                r += 1;
            }
            r
        })
    }

    /// 3-rank at |D| = d_abs (requires 3 among the tabulated primes).
    pub fn r3(&self, d_abs: u64) -> Option<u32> {
        self.r_p(3, d_abs)
    }

    /// Primes whose torsion counts were tabulated.
    pub fn torsion_primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.torsion.iter().map(|(p, _)| *p)
    }

    /// Ascending fundamental |D| values in the table.
    pub fn fundamental_discs(&self) -> impl Iterator<Item = u64> + '_ {
        self.h_narrow
            .iter()
            .enumerate()
            .filter(|(_, &h)| h > 0)
            .map(|(d, _)| d as u64)
    }
}

fn process_chunk(sign: Sign, lo: i64, hi: i64, fund: &[bool], primes: &[u64]) -> ChunkOut {
    let mut entries: Vec<(u32, i32, i32, i32)> = Vec::new();
    match sign {
        Sign::Negative => enumerate_definite_chunk(lo, hi, fund, &mut entries),
        Sign::Positive => enumerate_indefinite_chunk(lo, hi, fund, &mut entries),
    }
    entries.sort_unstable();
    let mut out = ChunkOut {
        d: Vec::new(),
        h: Vec::new(),
        t: vec![Vec::new(); primes.len()],
    };
    let mut i = 0;
    while i < entries.len() {
        let d_abs = entries[i].0;
        let mut j = i + 1;
        while j < entries.len() && entries[j].0 == d_abs {
            j += 1;
        }
        let group = &entries[i..j];
        match sign {
            Sign::Negative => definite_group(d_abs, group, primes, &mut out),
            Sign::Positive => indefinite_group(d_abs, group, primes, &mut out),
        }
        i = j;
    }
    out
}

/// All reduced forms (a, b, c), |b| ≤ a ≤ c, with 4ac − b² in [lo, hi] and
/// fundamental.
fn enumerate_definite_chunk(lo: i64, hi: i64, fund: &[bool], entries: &mut Vec<(u32, i32, i32, i32)>) {
    let a_max = ((hi / 3) as u64).isqrt() as i64;
    for a in 1..=a_max {
        for b in 0..=a {
            let four_a = 4 * a;
            let c_lo = ((lo + b * b + four_a - 1) / four_a).max(a);
            let c_hi = (hi + b * b) / four_a;
            for c in c_lo..=c_hi {
                let d_abs = four_a * c - b * b;
                debug_assert!(lo <= d_abs && d_abs <= hi);
                if !fund[d_abs as usize] {
                    continue;
                }
                entries.push((d_abs as u32, a as i32, b as i32, c as i32));
                if b > 0 && b < a && a < c {
                    entries.push((d_abs as u32, a as i32, -b as i32, c as i32));
                }
            }
        }
    }
}

/// All reduced forms (±u, b, ∓v), u, v > 0, |u − v| < b, with b² + 4uv in
/// [lo, hi] and fundamental.
fn enumerate_indefinite_chunk(lo: i64, hi: i64, fund: &[bool], entries: &mut Vec<(u32, i32, i32, i32)>) {
    let b_max = (hi as u64).isqrt() as i64;
    for b in 1..=b_max {
        let bb = b * b;
        // 4u(u − b + 1) + b² ≤ hi bounds u.
        let u_cap = (b - 1 + ((((b - 1) * (b - 1) + hi) as u64).isqrt() as i64)) / 2;
        for u in 1..=u_cap {
            let four_u = 4 * u;
            let v_lo = (u - b + 1).max(1).max((lo - bb + four_u - 1).div_euclid(four_u));
            let v_hi = (u + b - 1).min((hi - bb) / four_u);
            for v in v_lo..=v_hi {
                let d = bb + four_u * v;
                debug_assert!(lo <= d && d <= hi && (u - v).abs() < b);
                if !fund[d as usize] {
                    continue;
                }
                entries.push((d as u32, u as i32, b as i32, -v as i32));
                entries.push((d as u32, -u as i32, b as i32, v as i32));
            }
        }
    }
}

fn to_form(e: &(u32, i32, i32, i32)) -> QuadForm {
    QuadForm {
        a: e.1 as i64,
        b: e.2 as i64,
        c: e.3 as i64,
    }
}

/// The reduced representative of the inverse class of a reduced definite
/// form: (a, −b, c), except that ambiguous forms are their own inverse.
fn definite_inverse(f: &QuadForm) -> QuadForm {
    if f.b == 0 || f.b == f.a || f.a == f.c {
        *f
    } else {
        f.inverse()
    }
}

fn definite_group(d_abs: u32, group: &[(u32, i32, i32, i32)], primes: &[u64], out: &mut ChunkOut) {
    out.d.push(d_abs);
    out.h.push(group.len() as u32);
    if primes.is_empty() {
        return;
    }
    let identity = principal_form(-(d_abs as i64));
    for (pi, &p) in primes.iter().enumerate() {
        let count = match p {
            2 => group
                .iter()
                .filter(|(_, a, b, c)| *b == 0 || *b == *a || *a == *c)
                .count(),
            3 => group
                .iter()
                .filter(|e| {
                    let x = to_form(e);
                    compose(&x, &x).unwrap() == definite_inverse(&x)
                })
                .count(),
            _ => group
                .iter()
                .filter(|e| pow_class(&to_form(e), p, &identity) == identity)
                .count(),
        };
        out.t[pi].push(count as u32);
    }
}

fn indefinite_group(d_abs: u32, group: &[(u32, i32, i32, i32)], primes: &[u64], out: &mut ChunkOut) {
    let d = d_abs as i64;
    let s = (d_abs as u64).isqrt() as i64;
    let forms: Vec<QuadForm> = group.iter().map(to_form).collect();
    let n = forms.len();
    let mut cid = vec![u32::MAX; n];
    let mut reps: Vec<usize> = Vec::new();
    for i in 0..n {
        if cid[i] != u32::MAX {
            continue;
        }
        let label = reps.len() as u32;
        reps.push(i);
        let start = forms[i];
        let mut cur = start;
        loop {
            let k = forms
                .binary_search(&cur)
                .expect("ρ stepped outside the enumerated reduced forms");
            cid[k] = label;
            cur = rho(cur, d, s);
            if cur == start {
                break;
            }
        }
    }
    out.d.push(d_abs);
    out.h.push(reps.len() as u32);
    if primes.is_empty() {
        return;
    }
    let class_of = |f: &QuadForm| cid[forms.binary_search(f).expect("form outside cycle table")];
    let identity = principal_form(d);
    debug_assert!(is_reduced_indefinite(&identity));
    let id_class = class_of(&identity);
    for (pi, &p) in primes.iter().enumerate() {
        let count = match p {
            2 => reps
                .iter()
                .filter(|&&i| {
                    let inv = reduce_indefinite(&forms[i].inverse()).unwrap();
                    class_of(&inv) == cid[i]
                })
                .count(),
            3 => reps
                .iter()
                .filter(|&&i| {
                    let sq = compose(&forms[i], &forms[i]).unwrap();
                    let inv = reduce_indefinite(&forms[i].inverse()).unwrap();
                    class_of(&sq) == class_of(&inv)
                })
                .count(),
            _ => reps
                .iter()
                .filter(|&&i| class_of(&pow_class(&forms[i], p, &identity)) == id_class)
                .count(),
        };
        out.t[pi].push(count as u32);
    }
}

/// x^e by square and multiply; `identity` must be the reduced principal form
/// of the same discriminant.
fn pow_class(x: &QuadForm, mut e: u64, identity: &QuadForm) -> QuadForm {
    let mut acc = *identity;
    let mut base = *x;
    while e > 0 {
        if e & 1 == 1 {
            acc = compose(&acc, &base).unwrap();
        }
        e >>= 1;
        if e > 0 {
            base = compose(&base, &base).unwrap();
        }
    }
    acc
}
