//! Binary quadratic forms and class groups of quadratic fields.
//!
//! A form (a, b, c) stands for ax² + bxy + cy² with discriminant
//! D = b² − 4ac. Everything here is exact integer arithmetic:
//!
//! * definite forms (D < 0, a > 0) reduce to the unique Gauss-reduced
//!   representative |b| ≤ a ≤ c (b ≥ 0 on the boundaries), so class equality
//!   is literal equality of reduced triples;
//! * indefinite forms (D > 0 nonsquare) reduce into ρ-cycles; classes are
//!   cycles, and equality means landing in the same cycle;
//! * composition is Dirichlet's formula on top of a three-way extended gcd,
//!   followed by reduction.
//!
//! The narrow class number h⁺ is the number of reduced classes (cycle count
//! for D > 0). The class number h of the field equals h⁺ unless D > 0 and
//! x² − Dy² = −4 is unsolvable, in which case h = h⁺/2; solvability is
//! decided exactly by scanning the principal cycle for a leading coefficient
//! of −1 (the fundamental unit has norm −1 iff the forms x²… and −x²… are
//! properly equivalent).
//!
//! Invariant factors d₁ | d₂ | … (multiplying to h⁺) are read off from the
//! sizes of the p^k-torsion subgroups: #{x : x^(p^k) = e} = p^Σmin(k,λᵢ)
//! determines the partition λ of each Sylow factor, and the factors are
//! reassembled across primes by pairing largest with largest. The p-rank is
//! the number of invariant factors divisible by p; for real fields the odd
//! part of the narrow group matches the ordinary one, so 3-ranks may be read
//! narrowly.

use crate::arith::{self, Sign};
use crate::{Error, Result};

pub mod bulk;

/// An integral binary quadratic form ax² + bxy + cy².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadForm {
    /// Construct a form, rejecting degenerate discriminants (perfect squares,
    /// including 0). b² − 4ac ≡ 0, 1 (mod 4) holds for every integer triple.
    pub fn new(a: i64, b: i64, c: i64) -> Result<Self> {
        let f = QuadForm { a, b, c };
        let d = f.disc128();
        if d >= 0 {
            let s = i128_isqrt(d);
            if s * s == d {
                return Err(Error::InvalidArgument(format!(
                    "({a}, {b}, {c}) has degenerate square discriminant {d}"
                )));
            }
        }
        Ok(f)
    }

    pub fn discriminant(&self) -> i64 {
        let d = self.disc128();
        i64::try_from(d).expect("discriminant overflows i64")
    }

    fn disc128(&self) -> i128 {
        let (a, b, c) = (self.a as i128, self.b as i128, self.c as i128);
        b * b - 4 * a * c
    }

    /// gcd(a, b, c) = 1.
    pub fn is_primitive(&self) -> bool {
        gcd(gcd(self.a.unsigned_abs(), self.b.unsigned_abs()), self.c.unsigned_abs()) == 1
    }

    /// The inverse class representative (a, −b, c).
    pub fn inverse(&self) -> QuadForm {
        QuadForm {
            a: self.a,
            b: -self.b,
            c: self.c,
        }
    }

    /// Apply an integral substitution x ↦ px + qy, y ↦ rx + sy.
    /// The caller is responsible for unimodularity when class membership
    /// must be preserved.
    pub fn transform(&self, p: i64, q: i64, r: i64, s: i64) -> QuadForm {
        let (a, b, c) = (self.a as i128, self.b as i128, self.c as i128);
        let (p, q, r, s) = (p as i128, q as i128, r as i128, s as i128);
        let a2 = a * p * p + b * p * r + c * r * r;
        let b2 = 2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s;
        let c2 = a * q * q + b * q * s + c * s * s;
        QuadForm {
            a: i64::try_from(a2).expect("transform overflow"),
            b: i64::try_from(b2).expect("transform overflow"),
            c: i64::try_from(c2).expect("transform overflow"),
        }
    }
}

impl std::fmt::Display for QuadForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn i128_isqrt(n: i128) -> i128 {
    debug_assert!(n >= 0);
    (n as u128).isqrt() as i128
}

/// Extended gcd: returns (g, x, y) with ax + by = g ≥ 0.
fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut x0, mut x1) = (1i128, 0i128);
    let (mut y0, mut y1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (x0, x1) = (x1, x0 - q * x1);
        (y0, y1) = (y1, y0 - q * y1);
    }
    if r0 < 0 {
        (-r0, -x0, -y0)
    } else {
        (r0, x0, y0)
    }
}

/// Three-way extended gcd: (g, x, y, z) with ax + by + cz = g ≥ 0.
fn ext_gcd3(a: i128, b: i128, c: i128) -> (i128, i128, i128, i128) {
    let (g1, x1, y1) = ext_gcd(a, b);
    let (g, x2, z) = ext_gcd(g1, c);
    (g, x1 * x2, y1 * x2, z)
}

/// A validated fundamental discriminant (≠ 1; squarefree ≡ 1 mod 4, or 4k
/// with k ≡ 2, 3 mod 4 squarefree).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FundamentalDiscriminant(i64);

impl FundamentalDiscriminant {
    pub fn new(d: i64) -> Result<Self> {
        if arith::is_fundamental(d) {
            Ok(FundamentalDiscriminant(d))
        } else {
            Err(Error::NotFundamental(d))
        }
    }

    pub fn get(self) -> i64 {
        self.0
    }

    pub fn sign(self) -> Sign {
        if self.0 > 0 {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }
}

// ---------------------------------------------------------------------------
// Definite reduction (D < 0)
// ---------------------------------------------------------------------------

/// Gauss-reduced test for positive definite forms: |b| ≤ a ≤ c with b ≥ 0
/// when |b| = a or a = c.
pub fn is_reduced_definite(f: &QuadForm) -> bool {
    let QuadForm { a, b, c } = *f;
    b.abs() <= a && a <= c && (b >= 0 || (b.abs() < a && a < c))
}

fn reduce_definite_raw(mut a: i128, mut b: i128, mut c: i128, d: i128) -> (i128, i128, i128) {
    debug_assert!(d < 0);
    loop {
        // Translate b into (−a, a].
        if b > a || b <= -a {
            let two_a = 2 * a;
            let mut r = b.rem_euclid(two_a);
            if r > a {
                r -= two_a;
            }
            b = r;
            c = (b * b - d) / (4 * a);
        }
        if a > c {
            // Swap the outer coefficients; the middle one flips sign.
            (a, b, c) = (c, -b, a);
            continue;
        }
        break;
    }
    if b < 0 && (-b == a || a == c) {
        b = -b;
    }
    (a, b, c)
}

/// Reduce a positive definite form (D < 0, a > 0) to its unique Gauss-reduced
/// representative.
pub fn reduce_definite(f: &QuadForm) -> Result<QuadForm> {
    let d = f.disc128();
    if d >= 0 {
        return Err(Error::WrongSign(f.discriminant()));
    }
    if f.a <= 0 {
        return Err(Error::InvalidArgument(format!(
            "form {f} is negative definite"
        )));
    }
    let (a, b, c) = reduce_definite_raw(f.a as i128, f.b as i128, f.c as i128, d);
    Ok(QuadForm {
        a: a as i64,
        b: b as i64,
        c: c as i64,
    })
}

/// All Gauss-reduced primitive forms of discriminant d < 0 (d ≡ 0, 1 mod 4),
/// sorted by (a, b, c). For fundamental d this is the narrow = ordinary class
/// group; its length is h(d).
pub fn enumerate_reduced_definite(d: i64) -> Result<Vec<QuadForm>> {
    if d >= 0 {
        return Err(Error::WrongSign(d));
    }
    if !matches!(d.rem_euclid(4), 0 | 1) {
        return Err(Error::InvalidArgument(format!(
            "{d} is not a discriminant (≢ 0, 1 mod 4)"
        )));
    }
    let mut out = Vec::new();
    let mut b = d.rem_euclid(2);
    // |b| ≤ a ≤ c forces 3b² ≤ 4ac − b²·… i.e. b² ≤ |d|/3.
    while b * b <= -d / 3 {
        let n = (b * b - d) / 4; // = ac
        let lo = if b > 1 { b } else { 1 };
        let mut a = lo;
        while a * a <= n {
            if n % a == 0 {
                let c = n / a;
                let f = QuadForm { a, b, c };
                if f.is_primitive() {
                    out.push(f);
                }
                if b > 0 && b < a && a < c {
                    let g = QuadForm { a, b: -b, c };
                    if g.is_primitive() {
                        out.push(g);
                    }
                }
            }
            a += 1;
        }
        b += 2;
    }
    out.sort();
    Ok(out)
}

/// The principal (identity) form of discriminant d: (1, b₀, (b₀² − d)/4) with
/// b₀ the canonical residue of d mod 2; already reduced for both signs.
pub fn principal_form(d: i64) -> QuadForm {
    let parity = d.rem_euclid(2);
    let b0 = if d < 0 {
        parity
    } else {
        let s = (d as u64).isqrt() as i64;
        if s.rem_euclid(2) == parity {
            s
        } else {
            s - 1
        }
    };
    QuadForm {
        a: 1,
        b: b0,
        c: (b0 * b0 - d) / 4,
    }
}

// ---------------------------------------------------------------------------
// Indefinite reduction (D > 0 nonsquare)
// ---------------------------------------------------------------------------

/// Reduced test for indefinite forms: 0 < b < √D and √D − b < 2|a| < √D + b,
/// which for integer triples is equivalent to ac < 0, b > 0, ||a| − |c|| < b.
pub fn is_reduced_indefinite(f: &QuadForm) -> bool {
    f.a != 0 && f.c != 0 && (f.a < 0) != (f.c < 0) && f.b > 0 && (f.a.abs() - f.c.abs()).abs() < f.b
}

/// One ρ step: (a, b, c) ↦ (c, r, (r² − D)/(4c)) with r ≡ −b (mod 2|c|)
/// normalized into (√D − 2|c|, √D] (or minimal absolute value while |c| is
/// still larger than √D). Maps reduced forms to reduced forms and walks the
/// cycle.
fn rho(f: QuadForm, d: i64, s: i64) -> QuadForm {
    let c = f.c;
    debug_assert!(c != 0);
    let two_c = 2 * c.abs() as i128;
    let b = f.b as i128;
    let r = if c.abs() > s {
        // Not yet in the reduced strip: take the minimal absolute residue.
        let mut r = (-b).rem_euclid(two_c);
        if r > two_c / 2 {
            r -= two_c;
        }
        r
    } else {
        // Largest residue ≤ s, i.e. r = s − ((s + b) mod 2|c|).
        s as i128 - (s as i128 + b).rem_euclid(two_c)
    };
    let c2 = (r * r - d as i128) / (4 * c as i128);
    QuadForm {
        a: c,
        b: r as i64,
        c: i64::try_from(c2).expect("rho overflow"),
    }
}

/// Reduce an indefinite form (D > 0 nonsquare) by iterating ρ; lands on some
/// member of the class's reduction cycle.
pub fn reduce_indefinite(f: &QuadForm) -> Result<QuadForm> {
    let d = f.disc128();
    if d <= 0 {
        return Err(Error::WrongSign(f.discriminant()));
    }
    let s = i128_isqrt(d);
    if s * s == d {
        return Err(Error::WrongSign(f.discriminant()));
    }
    let (d, s) = (d as i64, s as i64);
    let mut g = *f;
    for _ in 0..20_000 {
        if is_reduced_indefinite(&g) {
            return Ok(g);
        }
        g = rho(g, d, s);
    }
    panic!("indefinite reduction failed to terminate for {f} (D = {d})");
}

/// A full ρ-cycle of reduced indefinite forms, listed in ρ order starting
/// from the lexicographically least member.
pub type ReductionCycle = Vec<QuadForm>;

/// All reduction cycles of primitive reduced forms of discriminant d > 0
/// (nonsquare, ≡ 0, 1 mod 4). The number of cycles is the narrow class
/// number h⁺(d).
pub fn enumerate_reduced_indefinite(d: i64) -> Result<Vec<ReductionCycle>> {
    if d <= 0 {
        return Err(Error::WrongSign(d));
    }
    if !matches!(d.rem_euclid(4), 0 | 1) {
        return Err(Error::InvalidArgument(format!(
            "{d} is not a discriminant (≢ 0, 1 mod 4)"
        )));
    }
    let s = (d as u64).isqrt() as i64;
    if s * s == d {
        return Err(Error::WrongSign(d));
    }
    let mut forms = Vec::new();
    let mut b = 2 - d.rem_euclid(2); // smallest b ≥ 1 with b ≡ d (mod 2)
    while b <= s {
        let q = (d - b * b) / 4; // = |a||c| with ac < 0
        let mut u = 1;
        while u * u <= q {
            if q % u == 0 {
                for (x, y) in [(u, q / u), (q / u, u)] {
                    // x = |a|, y = |c|; reduced needs ||a| − |c|| < b.
                    if (x - y).abs() < b {
                        let f = QuadForm { a: x, b, c: -y };
                        if f.is_primitive() {
                            forms.push(f);
                            forms.push(QuadForm { a: -x, b, c: y });
                        }
                    }
                    if u * u == q {
                        break;
                    }
                }
            }
            u += 1;
        }
        b += 2;
    }
    forms.sort();
    forms.dedup();
    let mut seen = std::collections::HashSet::new();
    let mut cycles: Vec<ReductionCycle> = Vec::new();
    for &start in &forms {
        if seen.contains(&start) {
            continue;
        }
        let mut cycle = vec![start];
        seen.insert(start);
        let mut g = rho(start, d, s);
        while g != start {
            debug_assert!(is_reduced_indefinite(&g), "ρ left the reduced set: {g}");
            seen.insert(g);
            cycle.push(g);
            g = rho(g, d, s);
        }
        // Rotate so the cycle starts at its least member.
        let min_pos = cycle
            .iter()
            .enumerate()
            .min_by_key(|(_, f)| **f)
            .map(|(i, _)| i)
            .unwrap();
        cycle.rotate_left(min_pos);
        cycles.push(cycle);
    }
    cycles.sort_by_key(|cyc| cyc[0]);
    Ok(cycles)
}

/// Exact solvability of x² − dy² = −4: walk the principal cycle and look for
/// a leading coefficient −1 (the fundamental unit has norm −1 iff the
/// principal and "anti-principal" forms share a cycle).
pub fn pell_minus_solvable(d: i64) -> Result<bool> {
    if d <= 0 {
        return Err(Error::WrongSign(d));
    }
    let s = (d as u64).isqrt() as i64;
    if s * s == d || !matches!(d.rem_euclid(4), 0 | 1) {
        return Err(Error::InvalidArgument(format!("{d} is not an indefinite discriminant")));
    }
    let start = principal_form(d);
    debug_assert!(is_reduced_indefinite(&start));
    let mut g = start;
    loop {
        if g.a == -1 {
            return Ok(true);
        }
        g = rho(g, d, s);
        if g == start {
            return Ok(false);
        }
    }
}

// ---------------------------------------------------------------------------
// Composition
// ---------------------------------------------------------------------------

/// Dirichlet composition of two primitive forms of the same discriminant,
/// returned reduced (definite) or as a cycle member (indefinite).
pub fn compose(f: &QuadForm, g: &QuadForm) -> Result<QuadForm> {
    let d = f.disc128();
    if d != g.disc128() {
        return Err(Error::DiscriminantMismatch(
            f.discriminant(),
            g.discriminant(),
        ));
    }
    if f.a == 0 || g.a == 0 {
        return Err(Error::InvalidArgument(format!(
            "cannot compose degenerate forms {f}, {g}"
        )));
    }
    debug_assert!(f.is_primitive() && g.is_primitive());
    let raw = compose_raw(f, g, d);
    if d < 0 {
        let (a, b, c) = reduce_definite_raw(raw.0, raw.1, raw.2, d);
        Ok(QuadForm {
            a: a as i64,
            b: b as i64,
            c: c as i64,
        })
    } else {
        let h = QuadForm {
            a: i64::try_from(raw.0).expect("compose overflow"),
            b: i64::try_from(raw.1).expect("compose overflow"),
            c: i64::try_from(raw.2).expect("compose overflow"),
        };
        reduce_indefinite(&h)
    }
}

fn compose_raw(f: &QuadForm, g: &QuadForm, d: i128) -> (i128, i128, i128) {
    let (a1, b1, _c1) = (f.a as i128, f.b as i128, f.c as i128);
    let (a2, b2, c2) = (g.a as i128, g.b as i128, g.c as i128);
    let s = (b1 + b2) / 2;
    let n = (b1 - b2) / 2;
    let (e, _u, v, w) = ext_gcd3(a1, a2, s);
    let a = (a1 / e) * (a2 / e);
    let two_a = 2 * a;
    // B ≡ b2 + 2(a2/e)(vn − wc2) (mod 2A), normalized into (−A, A].
    let mut b = (b2 + ((a2 / e) % two_a) * (2 * (v * n - w * c2) % two_a)) % two_a;
    b = b.rem_euclid(two_a);
    if b > a {
        b -= two_a;
    }
    let c = (b * b - d) / (4 * a);
    (a, b, c)
}

// ---------------------------------------------------------------------------
// Class group structure
// ---------------------------------------------------------------------------

/// Structure of the (narrow) form class group of a fundamental discriminant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassGroupInfo {
    pub disc: i64,
    /// Number of reduced classes: h(d) for d < 0, cycle count h⁺(d) for d > 0.
    pub h_narrow: u64,
    /// Class number of the field: h_narrow unless d > 0 and x² − dy² = −4 is
    /// unsolvable, in which case h_narrow/2.
    pub h: u64,
    /// Invariant factors d₁ | d₂ | … of the narrow group, multiplying to
    /// h_narrow; empty for the trivial group.
    pub invariant_factors: Vec<u64>,
}

impl ClassGroupInfo {
    /// Number of invariant factors divisible by p (= rank of the p-Sylow of
    /// the narrow group; for odd p this equals the ordinary p-rank).
    pub fn p_rank(&self, p: u64) -> u32 {
        self.invariant_factors.iter().filter(|&&f| f % p == 0).count() as u32
    }
}

/// Multiplication-table view of one class group, shared by the definite and
/// indefinite paths: elements are class indices, `mul` composes them.
struct GroupTable {
    reps: Vec<QuadForm>,
    identity: usize,
    /// For d > 0, all reduced forms with their cycle index (sorted for
    /// binary-search lookup); empty for d < 0.
    members: Vec<(QuadForm, u32)>,
    disc: i64,
}

impl GroupTable {
    fn build(d: i64) -> Result<GroupTable> {
        if d < 0 {
            let reps = enumerate_reduced_definite(d)?;
            let identity = reps
                .binary_search(&principal_form(d))
                .expect("principal form missing from reduced list");
            Ok(GroupTable {
                reps,
                identity,
                members: Vec::new(),
                disc: d,
            })
        } else {
            let cycles = enumerate_reduced_indefinite(d)?;
            let mut members = Vec::new();
            let mut reps = Vec::new();
            for (i, cyc) in cycles.iter().enumerate() {
                reps.push(cyc[0]);
                for &f in cyc {
                    members.push((f, i as u32));
                }
            }
            members.sort();
            let principal = principal_form(d);
            let identity = Self::lookup(&members, &principal).expect("principal cycle missing") as usize;
            Ok(GroupTable {
                reps,
                identity,
                members,
                disc: d,
            })
        }
    }

    fn lookup(members: &[(QuadForm, u32)], f: &QuadForm) -> Option<u32> {
        members
            .binary_search_by(|(g, _)| g.cmp(f))
            .ok()
            .map(|i| members[i].1)
    }

    fn order(&self) -> u64 {
        self.reps.len() as u64
    }

    fn class_of(&self, f: &QuadForm) -> usize {
        if self.disc < 0 {
            self.reps.binary_search(f).expect("unreduced definite form") as usize
        } else {
            Self::lookup(&self.members, f).expect("form outside cycle table") as usize
        }
    }

    fn mul(&self, i: usize, j: usize) -> usize {
        let f = compose(&self.reps[i], &self.reps[j]).expect("composition failed");
        self.class_of(&f)
    }

    fn pow(&self, i: usize, mut e: u64) -> usize {
        let mut base = i;
        let mut acc = self.identity;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(base, base);
            }
        }
        acc
    }
}

/// Invariant factors from p^k-torsion subgroup sizes. For each prime p | h,
/// #{x : x^(p^k) = e} = p^(m_k) with m_k = Σᵢ min(k, λᵢ); the differences
/// m_k − m_(k−1) give the conjugate of the partition λ of the p-Sylow.
fn invariant_factors(table: &GroupTable) -> Vec<u64> {
    let h = table.order();
    let mut factorization = Vec::new();
    let mut rest = h;
    let mut p = 2u64;
    while p * p <= rest {
        if rest % p == 0 {
            let mut e = 0;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            factorization.push((p, e));
        }
        p += 1;
    }
    if rest > 1 {
        factorization.push((rest, 1));
    }

    let mut partitions: Vec<(u64, Vec<u32>)> = Vec::new();
    for &(p, e_max) in &factorization {
        let sylow_size = p.pow(e_max);
        let mut ms = vec![0u32];
        let mut pk = 1u64;
        loop {
            pk *= p;
            let t = (0..table.reps.len())
                .filter(|&i| table.pow(i, pk) == table.identity)
                .count() as u64;
            let m = exact_log(t, p);
            ms.push(m);
            if t == sylow_size {
                break;
            }
            assert!(
                ms.len() <= e_max as usize + 1,
                "torsion count failed to stabilize at disc {}",
                table.disc
            );
        }
        let conj: Vec<u32> = ms.windows(2).map(|w| w[1] - w[0]).collect();
        let rank = conj[0];
        let lambda: Vec<u32> = (1..=rank)
            .map(|i| conj.iter().filter(|&&c| c >= i).count() as u32)
            .collect();
        partitions.push((p, lambda)); // already descending
    }

    let rank = partitions.iter().map(|(_, l)| l.len()).max().unwrap_or(0);
    let mut factors = Vec::new();
    for j in 0..rank {
        let mut f = 1u64;
        for (p, lambda) in &partitions {
            if let Some(&e) = lambda.get(j) {
                f *= p.pow(e);
            }
        }
        factors.push(f);
    }
    factors.reverse(); // ascending, d₁ | d₂ | …
    debug_assert_eq!(factors.iter().product::<u64>().max(1), h);
    factors
}

fn exact_log(mut n: u64, p: u64) -> u32 {
    let mut e = 0;
    while n > 1 {
        assert!(n % p == 0, "torsion subgroup size {n} is not a power of {p}");
        n /= p;
        e += 1;
    }
    e
}

/// Full class-group computation for a fundamental discriminant.
pub fn class_group(d: FundamentalDiscriminant) -> ClassGroupInfo {
    let d = d.get();
    let table = GroupTable::build(d).expect("fundamental discriminant rejected");
    let h_narrow = table.order();
    let h = if d > 0 && !pell_minus_solvable(d).unwrap() {
        h_narrow / 2
    } else {
        h_narrow
    };
    ClassGroupInfo {
        disc: d,
        h_narrow,
        h,
        invariant_factors: invariant_factors(&table),
    }
}

/// Convenience wrapper validating the discriminant first.
pub fn class_group_of(d: i64) -> Result<ClassGroupInfo> {
    Ok(class_group(FundamentalDiscriminant::new(d)?))
}

/// 3-rank of the class group of Q(√n) for any nonzero n; perfect squares give
/// 0 (the sentinel field). This is the reference single-discriminant path;
/// bulk scans should use [`bulk::RankTables`].
pub fn r3(n: i64) -> Result<u32> {
    let d = arith::field_discriminant(n)?;
    if d == 1 {
        return Ok(0);
    }
    Ok(class_group(FundamentalDiscriminant::new(d).unwrap()).p_rank(3))
}

/// Class number h of Q(√n) for any nonzero n (sentinel 1 for squares).
pub fn class_number(n: i64) -> Result<u64> {
    let d = arith::field_discriminant(n)?;
    if d == 1 {
        return Ok(1);
    }
    Ok(class_group(FundamentalDiscriminant::new(d).unwrap()).h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(a: i64, b: i64, c: i64) -> QuadForm {
        QuadForm { a, b, c }
    }

    #[test]
    fn reduce_definite_example() {
        let r = reduce_definite(&f(1, 5, 7)).unwrap();
        assert_eq!(r, f(1, 1, 1));
        assert_eq!(r.discriminant(), -3);
    }

    #[test]
    fn reduce_rejects_indefinite() {
        assert!(reduce_definite(&f(1, 1, -1)).is_err());
        assert!(reduce_indefinite(&f(1, 1, 1)).is_err());
    }

    #[test]
    fn reduced_forms_disc_minus_23() {
        let forms = enumerate_reduced_definite(-23).unwrap();
        assert_eq!(forms, vec![f(1, 1, 6), f(2, -1, 3), f(2, 1, 3)]);
    }

    #[test]
    fn class_number_one_discs() {
        assert_eq!(enumerate_reduced_definite(-163).unwrap(), vec![f(1, 1, 41)]);
        assert_eq!(enumerate_reduced_definite(-4).unwrap(), vec![f(1, 0, 1)]);
    }

    #[test]
    fn reduction_is_canonical_under_transport() {
        // Moving a reduced form around by unimodular substitutions and
        // re-reducing must restore it exactly.
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed);
        let discs = [-3, -4, -23, -47, -163, -3299, -100003];
        for _ in 0..500 {
            let d = discs[rng.gen_range(0..discs.len())];
            let forms = enumerate_reduced_definite(d).unwrap();
            let start = forms[rng.gen_range(0..forms.len())];
            let mut g = start;
            // Random word in the generators S and T^k.
            for _ in 0..6 {
                if rng.gen_bool(0.5) {
                    g = g.transform(0, -1, 1, 0);
                } else {
                    let k = rng.gen_range(-3..=3);
                    g = g.transform(1, k, 0, 1);
                }
            }
            assert_eq!(g.discriminant(), d);
            assert_eq!(reduce_definite(&g).unwrap(), start);
        }
    }

    #[test]
    fn composition_on_disc_minus_23() {
        let g = f(2, 1, 3);
        let sq = compose(&g, &g).unwrap();
        assert_eq!(sq, f(2, -1, 3));
        let cube = compose(&sq, &g).unwrap();
        assert_eq!(cube, f(1, 1, 6)); // order 3
    }

    #[test]
    fn composition_group_laws() {
        for d in [-23i64, -47, -71, -3299, 316, 229, 1016] {
            let table = GroupTable::build(d).unwrap();
            let n = table.reps.len();
            let e = table.identity;
            for i in 0..n {
                assert_eq!(table.mul(e, i), i, "identity at disc {d}");
                let inv = table.class_of(&if d < 0 {
                    reduce_definite(&table.reps[i].inverse()).unwrap()
                } else {
                    reduce_indefinite(&table.reps[i].inverse()).unwrap()
                });
                assert_eq!(table.mul(i, inv), e, "inverse at disc {d}");
                for j in 0..n {
                    assert_eq!(table.mul(i, j), table.mul(j, i), "commutativity {d}");
                }
            }
            // Associativity on a sample of triples.
            for i in 0..n.min(6) {
                for j in 0..n.min(6) {
                    for k in 0..n.min(6) {
                        assert_eq!(
                            table.mul(table.mul(i, j), k),
                            table.mul(i, table.mul(j, k)),
                            "associativity at disc {d}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn composition_well_defined_on_classes() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for d in [-23i64, -47, -3299] {
            let forms = enumerate_reduced_definite(d).unwrap();
            for _ in 0..50 {
                let f1 = forms[rng.gen_range(0..forms.len())];
                let f2 = forms[rng.gen_range(0..forms.len())];
                let base = compose(&f1, &f2).unwrap();
                // Same composition with transported (unreduced) inputs.
                let k1 = rng.gen_range(-2..=2);
                let k2 = rng.gen_range(-2..=2);
                let g1 = f1.transform(1, k1, 0, 1).transform(0, -1, 1, 0);
                let g2 = f2.transform(1, k2, 0, 1);
                let moved = compose(&g1, &g2).unwrap();
                assert_eq!(reduce_definite(&moved).unwrap(), base);
            }
        }
    }

    #[test]
    fn indefinite_cycles_small_discs() {
        assert_eq!(enumerate_reduced_indefinite(5).unwrap().len(), 1);
        assert_eq!(enumerate_reduced_indefinite(8).unwrap().len(), 1);
        // h(12) = 1 with unit norm +1, so two narrow classes.
        assert_eq!(enumerate_reduced_indefinite(12).unwrap().len(), 2);
    }

    #[test]
    fn disc_5_cycle_contents() {
        let cycles = enumerate_reduced_indefinite(5).unwrap();
        assert_eq!(cycles.len(), 1);
        let cyc = &cycles[0];
        assert_eq!(cyc.len(), 2);
        assert!(cyc.contains(&f(-1, 1, 1)) && cyc.contains(&f(1, 1, -1)));
    }

    #[test]
    fn rho_preserves_reduced_set() {
        for d in [5i64, 8, 12, 13, 316, 1016, 99 * 4 + 1] {
            let s = (d as u64).isqrt() as i64;
            for cyc in enumerate_reduced_indefinite(d).unwrap() {
                for &g in &cyc {
                    assert!(is_reduced_indefinite(&g), "{g} in disc {d}");
                    assert_eq!(g.discriminant(), d);
                    assert!(is_reduced_indefinite(&rho(g, d, s)));
                }
            }
        }
    }

    #[test]
    fn pell_minus_examples() {
        assert!(pell_minus_solvable(5).unwrap()); // 1 − 5 = −4
        assert!(pell_minus_solvable(8).unwrap()); // 4 − 8 = −4
        assert!(!pell_minus_solvable(12).unwrap());
        // Oracle: x² ≡ −4 (mod 3) is impossible, and brute force agrees.
        for y in 1i64..=1000 {
            let t = 12 * y * y - 4;
            let x = (t as u64).isqrt() as i64;
            assert_ne!(x * x, t, "unexpected solution at y={y}");
        }
    }

    #[test]
    fn pell_minus_matches_brute_force() {
        // Brute-force x² − dy² = −4 with y up to a bound that covers the
        // fundamental solutions of every d below 150.
        for d in 2i64..150 {
            if !crate::arith::is_fundamental(d) {
                continue;
            }
            let mut brute = false;
            for y in 1i64..=5000 {
                let t = d * y * y - 4;
                if t < 0 {
                    continue;
                }
                let x = (t as u64).isqrt() as i64;
                if x * x == t {
                    brute = true;
                    break;
                }
            }
            assert_eq!(
                pell_minus_solvable(d).unwrap(),
                brute,
                "negative Pell mismatch at d={d}"
            );
        }
    }

    #[test]
    fn class_group_disc_minus_47() {
        let info = class_group_of(-47).unwrap();
        assert_eq!(info.h_narrow, 5);
        assert_eq!(info.h, 5);
        assert_eq!(info.invariant_factors, vec![5]);
        assert_eq!(info.p_rank(5), 1);
        assert_eq!(info.p_rank(3), 0);
    }

    /// Independent group-structure oracle: compute the full multiplication
    /// table, then peel off a maximal-order cyclic factor by taking the
    /// quotient modulo its subgroup, recursively.
    fn peel_off_invariants(d: i64) -> Vec<u64> {
        let table = GroupTable::build(d).unwrap();
        let n = table.reps.len();
        let mut mul = vec![vec![0usize; n]; n];
        for i in 0..n {
            for j in 0..n {
                mul[i][j] = table.mul(i, j);
            }
        }
        fn recurse(n: usize, identity: usize, mul: &dyn Fn(usize, usize) -> usize) -> Vec<u64> {
            if n == 1 {
                return Vec::new();
            }
            let order = |x: usize| {
                let mut k = 1u64;
                let mut y = x;
                while y != identity {
                    y = mul(y, x);
                    k += 1;
                }
                k
            };
            let (gen, max_order) = (0..n).map(|x| (x, order(x))).max_by_key(|&(_, o)| o).unwrap();
            // Cosets of <gen>: canonical representative = minimal element.
            let mut subgroup = vec![identity];
            let mut y = gen;
            while y != identity {
                subgroup.push(y);
                y = mul(y, gen);
            }
            let coset_rep = |x: usize| subgroup.iter().map(|&s| mul(x, s)).min().unwrap();
            let mut reps: Vec<usize> = (0..n).map(coset_rep).collect();
            reps.sort_unstable();
            reps.dedup();
            let index_of = |x: usize| reps.binary_search(&coset_rep(x)).unwrap();
            let q_mul = |i: usize, j: usize| index_of(mul(reps[i], reps[j]));
            let q_identity = index_of(identity);
            let mut factors = recurse(reps.len(), q_identity, &q_mul);
            factors.push(max_order);
            factors
        }
        let mulf = |i: usize, j: usize| mul[i][j];
        recurse(n, table.identity, &mulf)
    }

    #[test]
    fn rank_two_group_at_disc_minus_3299() {
        let info = class_group_of(-3299).unwrap();
        let oracle = peel_off_invariants(-3299);
        assert_eq!(info.invariant_factors, oracle);
        assert_eq!(info.p_rank(3), 2);
        assert_eq!(
            info.invariant_factors.iter().product::<u64>(),
            info.h_narrow
        );
    }

    #[test]
    fn invariant_factors_match_peel_off_oracle() {
        for d in [-23i64, -47, -71, -84, -120, -231, -479, -551, -974, -1588, 316, 229, 1016, 892] {
            if !crate::arith::is_fundamental(d) {
                continue;
            }
            let info = class_group_of(d).unwrap();
            assert_eq!(
                info.invariant_factors,
                peel_off_invariants(d),
                "disc {d}"
            );
            // Divisibility chain.
            for w in info.invariant_factors.windows(2) {
                assert_eq!(w[1] % w[0], 0, "disc {d}");
            }
        }
    }

    #[test]
    fn real_disc_316_narrow_vs_wide() {
        let info = class_group_of(316).unwrap();
        assert_eq!(info.h_narrow, 6, "six reduction cycles at disc 316");
        assert_eq!(info.h, 3);
        assert!(!pell_minus_solvable(316).unwrap());
        assert_eq!(info.p_rank(3), 1);
    }

    #[test]
    fn r3_values() {
        assert_eq!(r3(-23).unwrap(), 1);
        assert_eq!(r3(16).unwrap(), 0, "square kernel gives the sentinel");
        assert_eq!(r3(79).unwrap(), 1);
        assert_eq!(r3(-3299).unwrap(), 2);
        assert_eq!(r3(5).unwrap(), 0);
        assert!(r3(0).is_err());
    }

    #[test]
    fn class_numbers_of_small_fields() {
        // h(Q(√d)) for the first few real fields.
        for (d, h) in [(2i64, 1u64), (3, 1), (5, 1), (6, 1), (7, 1), (10, 2), (15, 2), (79, 3)] {
            assert_eq!(class_number(d).unwrap(), h, "d={d}");
        }
        for (d, h) in [(-1i64, 1u64), (-2, 1), (-5, 2), (-23, 3), (-47, 5)] {
            assert_eq!(class_number(d).unwrap(), h, "d={d}");
        }
    }

    #[test]
    fn fundamental_discriminant_wrapper() {
        assert!(FundamentalDiscriminant::new(-23).is_ok());
        assert!(FundamentalDiscriminant::new(1).is_err());
        assert!(FundamentalDiscriminant::new(-23 * 4).is_err());
        assert_eq!(
            FundamentalDiscriminant::new(316).unwrap().sign(),
            Sign::Positive
        );
    }
}
