//! Best-approximation chains from the congruence lattices
//! `L_v = {(x, y) ∈ Z² : x ≡ y·ξ mod p^v}`.
//!
//! For every level `v` the admissible pairs are the lattice vectors with
//! both coordinates nonzero and `gcd(x, y) = 1`. The per-level minimizer
//! (sup height or `|xy|`) is found exactly:
//!
//! * the relative minima of `L_v` are the Euclidean remainder sequence of
//!   `(p^v, ξ mod p^v)` with cofactors;
//! * consecutive relative minima `w_s` (small `|x|`) and `w_b` (big `|x|`)
//!   form a basis, and every admissible vector with `|x_s| ≤ |x| < |x_b|`
//!   and `|xy| < p^v` lies on one of the lines `±w_b + a·w_s`;
//! * for the sup height a Lagrange-reduced basis bounds the coefficient of
//!   the second basis vector by `b²|b2|² ≤ 4h²`.
//!
//! Along each line the measure is piecewise monotone between a few
//! breakpoints, so scanning outward from those breakpoints to the first
//! admissible point is exhaustive.
//!
//! Ties are broken by the key `(measure, |x|, x < 0, y)` after normalizing
//! `y > 0`.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{p_pow, ApproxPair, PAdicNumber, Valuation};

/// Height used to rank approximations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    /// `max(|x|, |y|)`.
    Sup,
    /// `√|xy|`, ranked through `|xy|`.
    Mult,
}

impl Norm {
    /// The integer quantity the norm ranks by: sup height or `|xy|`.
    pub fn measure(self, pair: &ApproxPair) -> &BigUint {
        match self {
            Norm::Sup => &pair.height_sup,
            Norm::Mult => &pair.height_mult_sq,
        }
    }

    /// Natural log of the height (`ln max` or `ln √|xy|`).
    pub fn ln_height(self, pair: &ApproxPair) -> f64 {
        match self {
            Norm::Sup => pair.ln_height_sup(),
            Norm::Mult => pair.ln_height_mult(),
        }
    }
}

impl std::str::FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sup" => Ok(Norm::Sup),
            "mult" => Ok(Norm::Mult),
            other => Err(Error::InvalidSpec(format!("unknown norm `{other}`"))),
        }
    }
}

impl std::fmt::Display for Norm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Norm::Sup => "sup",
            Norm::Mult => "mult",
        })
    }
}

/// Maximum number of steps a single ray scan may take.
const RAY_STEP_CAP: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq)]
struct Vec2 {
    x: BigInt,
    y: BigInt,
}

impl Vec2 {
    fn new(x: BigInt, y: BigInt) -> Self {
        Vec2 { x, y }
    }

    fn sub_scaled(&self, q: &BigInt, other: &Vec2) -> Vec2 {
        Vec2::new(&self.x - q * &other.x, &self.y - q * &other.y)
    }

    fn norm2(&self) -> BigInt {
        &self.x * &self.x + &self.y * &self.y
    }

    fn dot(&self, other: &Vec2) -> BigInt {
        &self.x * &other.x + &self.y * &other.y
    }
}

/// Total order used to pick a unique minimizer.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Key {
    measure: BigUint,
    abs_x: BigUint,
    negative_x: bool,
    abs_y: BigUint,
}

fn measure_of(norm: Norm, x: &BigInt, y: &BigInt) -> BigUint {
    match norm {
        Norm::Sup => x.magnitude().max(y.magnitude()).clone(),
        Norm::Mult => x.magnitude() * y.magnitude(),
    }
}

fn key_of(norm: Norm, x: &BigInt, y: &BigInt) -> Key {
    // normalize y > 0
    let negative_x = if y.is_negative() {
        x.is_positive()
    } else {
        x.is_negative()
    };
    Key {
        measure: measure_of(norm, x, y),
        abs_x: x.magnitude().clone(),
        negative_x,
        abs_y: y.magnitude().clone(),
    }
}

fn admissible(x: &BigInt, y: &BigInt, p: u32) -> bool {
    if x.is_zero() || y.is_zero() {
        return false;
    }
    let pb = BigInt::from(p);
    if (x % &pb).is_zero() && (y % &pb).is_zero() {
        return false;
    }
    x.gcd(y).is_one()
}

/// Running minimum over admissible candidates.
struct Incumbent {
    norm: Norm,
    p: u32,
    best: Option<(Key, Vec2)>,
}

impl Incumbent {
    fn new(norm: Norm, p: u32) -> Self {
        Incumbent {
            norm,
            p,
            best: None,
        }
    }

    fn bound(&self) -> Option<&BigUint> {
        self.best.as_ref().map(|(k, _)| &k.measure)
    }

    /// Offers a point; returns true if it is admissible.
    fn offer(&mut self, v: &Vec2) -> bool {
        if !admissible(&v.x, &v.y, self.p) {
            return false;
        }
        let key = key_of(self.norm, &v.x, &v.y);
        let better = match &self.best {
            None => true,
            Some((k, _)) => key < *k,
        };
        if better {
            self.best = Some((key, v.clone()));
        }
        true
    }

    /// Scans `u + a·w` for `a = start, start + dir, ...` until past the first
    /// admissible point or the measure exceeds the incumbent. The measure
    /// must be non-decreasing along the ray.
    fn ray(&mut self, u: &Vec2, w: &Vec2, start: &BigInt, dir: i8) -> Result<()> {
        let step = Vec2::new(
            if dir > 0 { w.x.clone() } else { -&w.x },
            if dir > 0 { w.y.clone() } else { -&w.y },
        );
        let mut pt = Vec2::new(&u.x + start * &w.x, &u.y + start * &w.y);
        // once a point is admissible, only points of the same measure can
        // still win (on the tie key)
        let mut found: Option<BigUint> = None;
        for _ in 0..RAY_STEP_CAP {
            let m = measure_of(self.norm, &pt.x, &pt.y);
            if let Some(f) = &found {
                if m != *f {
                    return Ok(());
                }
            } else if self.bound().is_some_and(|b| m > *b) {
                return Ok(());
            }
            if self.offer(&pt) && found.is_none() {
                found = Some(m);
            }
            pt.x += &step.x;
            pt.y += &step.y;
        }
        Err(Error::Budget(format!(
            "line scan exceeded {RAY_STEP_CAP} steps"
        )))
    }

    /// Rays in both directions away from the rational point `-num/den`.
    fn rays_around_root(&mut self, u: &Vec2, w: &Vec2, num: &BigInt, den: &BigInt) -> Result<()> {
        let neg = -num;
        let lo = neg.div_floor(den);
        let hi = neg.div_ceil(den);
        self.ray(u, w, &lo, -1)?;
        self.ray(u, w, &hi, 1)
    }

    fn into_best(self) -> Option<Vec2> {
        self.best.map(|(_, v)| v)
    }
}

/// Streams the relative minima of `{(x, y) : x ≡ y·r mod m}` in order of
/// decreasing `x ≥ 0` (and strictly increasing `|y|`), from `(m, 0)` down to
/// the vector with `x = 0`.
fn relative_minima(
    r: &BigUint,
    modulus: &BigUint,
    mut visit: impl FnMut(&Vec2) -> Result<()>,
) -> Result<()> {
    let first = Vec2::new(BigInt::from(modulus.clone()), BigInt::zero());
    visit(&first)?;
    let mut prev = first;
    let mut cur = Vec2::new(BigInt::from(r.clone()), BigInt::one());
    loop {
        if cur.x.is_zero() {
            return visit(&cur);
        }
        let q = prev.x.div_floor(&cur.x);
        let next = prev.sub_scaled(&q, &cur);
        if next.y.magnitude() != cur.y.magnitude() {
            visit(&cur)?;
        }
        prev = std::mem::replace(&mut cur, next);
    }
}

fn level_data(xi: &PAdicNumber, v: u64) -> Result<(BigUint, BigUint)> {
    if v == 0 || v > xi.precision() as u64 {
        return Err(Error::LevelOutOfRange {
            level: v,
            precision: xi.precision() as u64,
        });
    }
    Ok((xi.residue(v as usize)?, p_pow(xi.p(), v)))
}

fn finish(xi: &PAdicNumber, v: u64, best: Option<Vec2>) -> Result<ApproxPair> {
    let best = best.ok_or(Error::DegenerateLevel(v))?;
    Ok(ApproxPair::new(xi, best.x, best.y)?.normalized())
}

/// Lagrange reduction in the Euclidean norm; returns `(b1, b2)` with
/// `|b1| ≤ |b2|` and `2|<b1, b2>| ≤ |b1|²`.
fn lagrange_reduce(mut b1: Vec2, mut b2: Vec2) -> (Vec2, Vec2) {
    loop {
        if b1.norm2() > b2.norm2() {
            std::mem::swap(&mut b1, &mut b2);
        }
        let n1 = b1.norm2();
        let d = b1.dot(&b2);
        // nearest integer to d / n1
        let q: BigInt = Integer::div_floor(&(BigInt::from(2) * &d + &n1), &(BigInt::from(2) * &n1));
        if q.is_zero() {
            return (b1, b2);
        }
        b2 = b2.sub_scaled(&q, &b1);
    }
}

/// The congruence lattice at level `v` with a Lagrange-reduced basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApproxLattice {
    pub p: u32,
    pub level: u64,
    pub basis: [(BigInt, BigInt); 2],
}

impl ApproxLattice {
    pub fn determinant(&self) -> BigInt {
        let [(a, b), (c, d)] = &self.basis;
        a * d - b * c
    }

    /// Whether `(x, y)` belongs to the lattice.
    pub fn contains(&self, x: &BigInt, y: &BigInt) -> bool {
        let det = self.determinant();
        let [(a, b), (c, d)] = &self.basis;
        // coefficients by Cramer's rule must be integral
        let s = x * d - y * c;
        let t = a * y - b * x;
        (s % &det).is_zero() && (t % &det).is_zero()
    }
}

fn reduced_basis(r: &BigUint, modulus: &BigUint) -> Result<(Vec2, Vec2)> {
    // The Euclidean-shortest vector is a relative minimum; pair it with a
    // neighbouring relative minimum and size-reduce once.
    let mut prev: Option<Vec2> = None;
    let mut best: Option<(BigInt, Vec2, Option<Vec2>)> = None;
    let mut need_next = false;
    relative_minima(r, modulus, |v| {
        if need_next {
            if let Some((_, _, nb)) = best.as_mut() {
                *nb = Some(v.clone());
            }
            need_next = false;
        }
        let n2 = v.norm2();
        let shorter = best.as_ref().map_or(true, |(b, _, _)| n2 < *b);
        if shorter {
            need_next = prev.is_none();
            best = Some((n2, v.clone(), prev.clone()));
        }
        prev = Some(v.clone());
        Ok(())
    })?;
    let (_, b1, nb) = best.expect("at least two relative minima");
    let nb = nb.expect("a neighbouring relative minimum");
    Ok(lagrange_reduce(b1, nb))
}

pub fn lattice_at_level(xi: &PAdicNumber, v: u64) -> Result<ApproxLattice> {
    let (r, modulus) = level_data(xi, v)?;
    let (b1, b2) = reduced_basis(&r, &modulus)?;
    Ok(ApproxLattice {
        p: xi.p(),
        level: v,
        basis: [(b1.x, b1.y), (b2.x, b2.y)],
    })
}

/// Admissible pair of minimal sup height with valuation at least `v`.
pub fn best_sup_at_level(xi: &PAdicNumber, v: u64) -> Result<ApproxPair> {
    let (r, modulus) = level_data(xi, v)?;
    let p = xi.p();
    if r.is_zero() {
        // x ≡ 0 mod p^v: (p^v, 1) is the unique minimizer under the tie rule
        let x = BigInt::from(modulus);
        return Ok(ApproxPair::new(xi, x, BigInt::one())?.normalized());
    }
    let mut inc = Incumbent::new(Norm::Sup, p);
    let ri = BigInt::from(r.clone());
    inc.offer(&Vec2::new(ri.clone(), BigInt::one()));
    inc.offer(&Vec2::new(
        &ri - BigInt::from(modulus.clone()),
        BigInt::one(),
    ));

    let (b1, b2) = reduced_basis(&r, &modulus)?;
    inc.offer(&b1);
    let b2n = b2.norm2();
    let mut b = BigInt::one();
    loop {
        let h = inc.bound().expect("incumbent set").clone();
        let h = BigInt::from(h);
        if &b * &b * &b2n > 4 * &h * &h {
            break;
        }
        let u = Vec2::new(&b * &b2.x, &b * &b2.y);
        sup_line(&mut inc, &u, &b1)?;
        b += 1;
    }
    finish(xi, v, inc.into_best())
}

fn sup_line(inc: &mut Incumbent, u: &Vec2, w: &Vec2) -> Result<()> {
    if w.x.is_zero() {
        return inc.rays_around_root(u, w, &u.y, &w.y);
    }
    if w.y.is_zero() {
        return inc.rays_around_root(u, w, &u.x, &w.x);
    }
    // integer minimizer of the convex function max(|x(a)|, |y(a)|)
    let mut breaks: Vec<(BigInt, BigInt)> =
        vec![(u.x.clone(), w.x.clone()), (u.y.clone(), w.y.clone())];
    let dm = &w.x - &w.y;
    if !dm.is_zero() {
        breaks.push((&u.x - &u.y, dm));
    }
    let dp = &w.x + &w.y;
    if !dp.is_zero() {
        breaks.push((&u.x + &u.y, dp));
    }
    let mut best: Option<(BigUint, BigInt)> = None;
    for (num, den) in &breaks {
        let neg = -num;
        for a in [neg.div_floor(den), neg.div_ceil(den)] {
            let h = measure_of(Norm::Sup, &(&u.x + &a * &w.x), &(&u.y + &a * &w.y));
            if best.as_ref().map_or(true, |(bh, _)| h < *bh) {
                best = Some((h, a));
            }
        }
    }
    let (_, a0) = best.expect("breakpoints");
    inc.ray(u, w, &a0, -1)?;
    inc.ray(u, w, &(a0 + 1), 1)
}

/// Admissible pair of minimal `|xy|` with valuation at least `v`.
pub fn best_mult_at_level(xi: &PAdicNumber, v: u64) -> Result<ApproxPair> {
    let (r, modulus) = level_data(xi, v)?;
    let p = xi.p();
    if r.is_zero() {
        let x = BigInt::from(modulus);
        return Ok(ApproxPair::new(xi, x, BigInt::one())?.normalized());
    }
    let mut inc = Incumbent::new(Norm::Mult, p);
    let ri = BigInt::from(r.clone());
    inc.offer(&Vec2::new(ri.clone(), BigInt::one()));
    inc.offer(&Vec2::new(
        &ri - BigInt::from(modulus.clone()),
        BigInt::one(),
    ));

    let mut big: Option<Vec2> = None;
    relative_minima(&r, &modulus, |small| {
        inc.offer(small);
        if let Some(u) = big.take() {
            mult_line(&mut inc, &u, small)?;
        }
        big = Some(small.clone());
        Ok(())
    })?;
    finish(xi, v, inc.into_best())
}

fn mult_line(inc: &mut Incumbent, u: &Vec2, w: &Vec2) -> Result<()> {
    // |x(a) y(a)| is monotone away from the roots of x(a) and y(a) outside
    // them and unimodal between them.
    if !w.x.is_zero() {
        inc.rays_around_root(u, w, &u.x, &w.x)?;
    }
    if !w.y.is_zero() {
        inc.rays_around_root(u, w, &u.y, &w.y)?;
    }
    Ok(())
}

/// Per-level minimizer for either norm.
pub fn best_at_level(xi: &PAdicNumber, norm: Norm, v: u64) -> Result<ApproxPair> {
    match norm {
        Norm::Sup => best_sup_at_level(xi, v),
        Norm::Mult => best_mult_at_level(xi, v),
    }
}

/// Staircase of best approximations for one norm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BestApproxChain {
    pub norm: Norm,
    pub p: u32,
    /// Precision of the source number.
    pub precision: usize,
    /// Highest level for which the chain is complete.
    pub precision_ceiling: u64,
    /// Heights strictly increase, valuations strictly increase. Only the
    /// last entry may carry an `AtLeast` valuation.
    pub entries: Vec<ApproxPair>,
}

impl BestApproxChain {
    /// True when the chain stopped at a censored valuation.
    pub fn is_censored(&self) -> bool {
        self.entries.last().is_some_and(|e| !e.val.is_exact())
    }

    /// The prefix of entries with exact valuations.
    pub fn exact_entries(&self) -> &[ApproxPair] {
        let n = self.entries.iter().take_while(|e| e.val.is_exact()).count();
        &self.entries[..n]
    }

    /// Entries whose height measure is at most `bound`.
    pub fn restricted(&self, bound: &BigUint) -> Vec<ApproxPair> {
        self.entries
            .iter()
            .filter(|e| self.norm.measure(e) <= bound)
            .cloned()
            .collect()
    }

    pub fn measure<'a>(&self, e: &'a ApproxPair) -> &'a BigUint {
        self.norm.measure(e)
    }
}

fn push_staircase(entries: &mut Vec<ApproxPair>, norm: Norm, pair: ApproxPair) {
    if let Some(last) = entries.last() {
        if norm.measure(last) == norm.measure(&pair) {
            entries.pop();
        }
    }
    entries.push(pair);
}

/// Sweeps levels `1..=max_level` and keeps the staircase of minimizers.
///
/// The minimizer at level `v` with valuation `V` is also the minimizer on
/// every level up to `V`, so only one lattice problem is solved per entry.
pub fn chain(xi: &PAdicNumber, norm: Norm, max_level: u64) -> Result<BestApproxChain> {
    if max_level == 0 || max_level > xi.precision() as u64 {
        return Err(Error::LevelOutOfRange {
            level: max_level,
            precision: xi.precision() as u64,
        });
    }
    let mut entries = Vec::new();
    let mut ceiling = max_level;
    let mut v = 1u64;
    while v <= max_level {
        let pair = match best_at_level(xi, norm, v) {
            Ok(pair) => pair,
            Err(Error::Budget(_)) => {
                ceiling = v - 1;
                break;
            }
            Err(e) => return Err(e),
        };
        let val = pair.val;
        push_staircase(&mut entries, norm, pair);
        match val {
            Valuation::Exact(t) => v = t + 1,
            Valuation::AtLeast(_) => break,
        }
    }
    Ok(BestApproxChain {
        norm,
        p: xi.p(),
        precision: xi.precision(),
        precision_ceiling: ceiling,
        entries,
    })
}

/// Largest bound accepted by [`oracle_chain`] for the sup height.
pub const ORACLE_SUP_LIMIT: u64 = 20_000;
/// Largest bound accepted by [`oracle_chain`] for `|xy|`.
pub const ORACLE_MULT_LIMIT: u64 = 100_000_000;

fn i128_pow(p: u32, e: u32) -> Option<i128> {
    (p as i128).checked_pow(e)
}

fn vp_i128(mut n: i128, p: u32) -> u64 {
    debug_assert!(n != 0);
    let p = p as i128;
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Ground-truth chain by direct search, independent of the lattice code.
///
/// For every `y ≤ bound` with `p ∤ y` and every level `v`, the progression
/// `x ≡ y·ξ mod p^v` is walked in order of increasing `|x|` to its first
/// coprime member within the bound. Every record pair of the height sweep is
/// among these candidates; records are then extracted by sorting on height.
pub fn oracle_chain(xi: &PAdicNumber, norm: Norm, bound: u64) -> Result<BestApproxChain> {
    let limit = match norm {
        Norm::Sup => ORACLE_SUP_LIMIT,
        Norm::Mult => ORACLE_MULT_LIMIT,
    };
    if bound == 0 || bound > limit {
        return Err(Error::Budget(format!(
            "oracle bound {bound} outside 1..={limit}"
        )));
    }
    let p = xi.p();
    let n = xi.precision() as u32;
    i128_pow(p, n)
        .filter(|m| m.checked_mul(bound as i128 * 4).is_some())
        .ok_or_else(|| Error::Budget("precision too large for the oracle".into()))?;
    let residue = xi.full_residue().to_i128().expect("below p^N");
    let val_of = |x: i128, y: i128| -> Valuation {
        let form = y * residue - x;
        if form == 0 {
            return Valuation::AtLeast(n as u64);
        }
        let t = vp_i128(form, p);
        if t < n as u64 {
            Valuation::Exact(t)
        } else {
            Valuation::AtLeast(n as u64)
        }
    };
    let measure = |x: i128, y: i128| -> u128 {
        match norm {
            Norm::Sup => x.unsigned_abs().max(y.unsigned_abs()),
            Norm::Mult => x.unsigned_abs() * y.unsigned_abs(),
        }
    };
    let bound_u = bound as u128;

    let key = |x: i128, y: i128| (measure(x, y), x.unsigned_abs(), x < 0, y);
    // records only ever come from the key-first candidate of each valuation
    let mut best: Vec<Option<((i128, i128), Valuation)>> = vec![None; n as usize + 1];
    let moduli: Vec<i128> = (0..=n)
        .map(|v| i128_pow(p, v).expect("checked above"))
        .collect();
    let residues: Vec<i128> = moduli.iter().map(|m| residue % m).collect();
    for y in 1..=bound as i128 {
        if y % p as i128 == 0 {
            continue;
        }
        let mut v = 1u32;
        while v <= n {
            let modulus = moduli[v as usize];
            let c = (y * residues[v as usize]) % modulus;
            // walk c, c − m, c + m, c − 2m, ... by increasing |x|
            let mut up = c;
            let mut down = c - modulus;
            let mut found = None;
            loop {
                let x = if up.unsigned_abs() <= down.unsigned_abs() {
                    let x = up;
                    up += modulus;
                    x
                } else {
                    let x = down;
                    down -= modulus;
                    x
                };
                if measure(x, y) > bound_u {
                    break;
                }
                if x != 0 && gcd_u128(x.unsigned_abs(), y as u128) == 1 {
                    found = Some(x);
                    break;
                }
            }
            let Some(x) = found else { break };
            let val = val_of(x, y);
            let slot = &mut best[val.value() as usize];
            if slot.map_or(true, |((bx, by), _)| key(x, y) < key(bx, by)) {
                *slot = Some(((x, y), val));
            }
            match val {
                Valuation::Exact(t) => v = t as u32 + 1,
                Valuation::AtLeast(_) => break,
            }
        }
    }

    let mut sorted: Vec<((i128, i128), Valuation)> = best.into_iter().flatten().collect();
    sorted.sort_by_key(|((x, y), _)| key(*x, *y));
    let mut entries: Vec<ApproxPair> = Vec::new();
    let mut record = 0u64;
    let mut i = 0;
    while i < sorted.len() {
        let h = measure(sorted[i].0 .0, sorted[i].0 .1);
        let mut j = i;
        let mut group_best: Option<&((i128, i128), Valuation)> = None;
        while j < sorted.len() && measure(sorted[j].0 .0, sorted[j].0 .1) == h {
            let c = &sorted[j];
            // first in key order wins among equal valuations
            if group_best.map_or(true, |g| c.1.value() > g.1.value()) {
                group_best = Some(c);
            }
            j += 1;
        }
        let ((x, y), val) = *group_best.expect("nonempty group");
        if val.value() > record {
            record = val.value();
            entries.push(ApproxPair::with_valuation(
                BigInt::from(x),
                BigInt::from(y),
                val,
            ));
            if !val.is_exact() {
                break;
            }
        }
        i = j;
    }
    Ok(BestApproxChain {
        norm,
        p,
        precision: xi.precision(),
        precision_ceiling: n as u64,
        entries,
    })
}

/// Result of minimizing `|yξ − x|_p` over every pair of height at most `X`.
#[derive(Clone, Debug, PartialEq)]
pub struct UniformMinimum {
    pub pair: ApproxPair,
    /// `v ln p / ln X`.
    pub exponent: f64,
}

fn floor_log(p: u32, ratio_num: &BigUint, ratio_den: &BigUint) -> u64 {
    // largest m with p^m · den ≤ num
    let mut m = 0u64;
    let mut scaled = ratio_den.clone();
    loop {
        scaled *= p;
        if scaled > *ratio_num {
            return m;
        }
        m += 1;
    }
}

fn scaled_fits(norm: Norm, pair: &ApproxPair, x_bound: &BigUint) -> Option<(BigUint, BigUint)> {
    // returns (num, den) such that the admissible multipliers M satisfy M·den ≤ num,
    // with M^2 for the multiplicative height
    match norm {
        Norm::Sup => {
            if pair.height_sup <= *x_bound {
                Some((x_bound.clone(), pair.height_sup.clone()))
            } else {
                None
            }
        }
        Norm::Mult => {
            let x2 = x_bound * x_bound;
            if pair.height_mult_sq <= x2 && !pair.height_mult_sq.is_zero() {
                Some((x2, pair.height_mult_sq.clone()))
            } else {
                None
            }
        }
    }
}

fn largest_power(norm: Norm, p: u32, num: &BigUint, den: &BigUint) -> u64 {
    match norm {
        Norm::Sup => floor_log(p, num, den),
        Norm::Mult => {
            // M² · den ≤ num
            let mut m = 0u64;
            let mut scaled = den.clone();
            let p2 = p as u64 * p as u64;
            loop {
                scaled *= p2;
                if scaled > *num {
                    return m;
                }
                m += 1;
            }
        }
    }
}

fn uniform_exponent(p: u32, val: u64, x_bound: &BigUint) -> f64 {
    val as f64 * (p as f64).ln() / crate::padic::ln_biguint(x_bound)
}

/// Best pair of height at most `X` built from chain entries and their
/// p-power multiples (non-coprime pairs are allowed here).
///
/// A pair `g·c` with `c` primitive has valuation `v_p(g) + val(c)`, and every
/// primitive `c` is dominated by a chain entry, by `(±1, 1)`, or (sup height
/// only) by an axis vector, so scanning those bases is exhaustive.
pub fn uniform_minimum(
    xi: &PAdicNumber,
    chain: &BestApproxChain,
    x_bound: &BigUint,
) -> Result<UniformMinimum> {
    if x_bound <= &BigUint::one() {
        return Err(Error::InvalidSpec("X must exceed 1".into()));
    }
    let norm = chain.norm;
    let p = xi.p();
    let mut bases: Vec<ApproxPair> = chain.entries.clone();
    bases.push(ApproxPair::new(xi, BigInt::one(), BigInt::one())?);
    bases.push(ApproxPair::new(xi, -BigInt::one(), BigInt::one())?);
    if norm == Norm::Sup {
        bases.push(ApproxPair::new(xi, BigInt::one(), BigInt::zero())?);
        bases.push(ApproxPair::new(xi, BigInt::zero(), BigInt::one())?);
    }
    let mut best: Option<(u64, Key, ApproxPair)> = None;
    for base in &bases {
        let Some((num, den)) = scaled_fits(norm, base, x_bound) else {
            continue;
        };
        let m = largest_power(norm, p, &num, &den);
        let mult = BigInt::from(p_pow(p, m));
        let x = &base.x * &mult;
        let y = &base.y * &mult;
        let val = xi.linear_form_valuation(&x, &y)?;
        let key = key_of(norm, &x, &y);
        let better = match &best {
            None => true,
            Some((bv, bk, _)) => match val.value().cmp(bv) {
                Ordering::Greater => true,
                Ordering::Equal => key < *bk,
                Ordering::Less => false,
            },
        };
        if better {
            best = Some((
                val.value(),
                key,
                ApproxPair::with_valuation(x, y, val).normalized(),
            ));
        }
    }
    let (val, _, pair) = best.expect("(1, 1) always fits");
    Ok(UniformMinimum {
        pair,
        exponent: uniform_exponent(p, val, x_bound),
    })
}

/// Largest `X` accepted by [`uniform_minimum_direct`] for the sup height.
pub const DIRECT_UNIFORM_LIMIT: u64 = 1000;

/// The same minimum by enumerating every pair of height at most `X`.
pub fn uniform_minimum_direct(
    xi: &PAdicNumber,
    norm: Norm,
    x_bound: u64,
) -> Result<UniformMinimum> {
    if x_bound < 2 || x_bound > DIRECT_UNIFORM_LIMIT {
        return Err(Error::Budget(format!(
            "direct enumeration needs 2 ≤ X ≤ {DIRECT_UNIFORM_LIMIT}"
        )));
    }
    let p = xi.p();
    let n = xi.precision() as u64;
    let xb = x_bound as i64;
    let reach = (xb as i128) * (xb as i128);
    // machine arithmetic when y·R − x fits comfortably
    let small = i128_pow(p, n as u32)
        .filter(|m| m.checked_mul(reach * 4).is_some())
        .map(|_| xi.full_residue().to_i128().expect("below p^N"));
    let valuation = |x: i64, y: i64| -> Result<Valuation> {
        match small {
            Some(r) => {
                if y == 0 {
                    return Ok(Valuation::Exact(vp_i128(x as i128, p)));
                }
                let cap = n + vp_i128(y as i128, p);
                let form = y as i128 * r - x as i128;
                Ok(if form == 0 {
                    Valuation::AtLeast(cap)
                } else {
                    let t = vp_i128(form, p);
                    if t < cap {
                        Valuation::Exact(t)
                    } else {
                        Valuation::AtLeast(cap)
                    }
                })
            }
            None => xi.linear_form_valuation(&BigInt::from(x), &BigInt::from(y)),
        }
    };
    let mut best: Option<(u64, (u64, u64, bool, u64), i64, i64, Valuation)> = None;
    let mut consider = |x: i64, y: i64| -> Result<()> {
        let val = valuation(x, y)?;
        let (ax, ay) = (x.unsigned_abs(), y.unsigned_abs());
        let measure = match norm {
            Norm::Sup => ax.max(ay),
            Norm::Mult => ax * ay,
        };
        let key = (measure, ax, x < 0, ay);
        let better = match &best {
            None => true,
            Some((bv, bk, ..)) => match val.value().cmp(bv) {
                Ordering::Greater => true,
                Ordering::Equal => key < *bk,
                Ordering::Less => false,
            },
        };
        if better {
            best = Some((val.value(), key, x, y, val));
        }
        Ok(())
    };
    match norm {
        Norm::Sup => {
            for y in 0..=xb {
                for x in -xb..=xb {
                    if y == 0 && x <= 0 {
                        continue;
                    }
                    consider(x, y)?;
                }
            }
        }
        Norm::Mult => {
            let x2 = xb * xb;
            for y in 1..=x2 {
                let xm = x2 / y;
                for x in -xm..=xm {
                    if x != 0 {
                        consider(x, y)?;
                    }
                }
            }
        }
    }
    let (val, _, x, y, v) = best.expect("nonempty enumeration");
    Ok(UniformMinimum {
        pair: ApproxPair::with_valuation(BigInt::from(x), BigInt::from(y), v),
        exponent: uniform_exponent(p, val, &BigUint::from(x_bound)),
    })
}

/// `floor(√n)`.
pub fn isqrt(n: &BigUint) -> BigUint {
    n.sqrt()
}

/// Signed big integer from an unsigned one.
pub fn to_signed(n: &BigUint) -> BigInt {
    BigInt::from_biguint(Sign::Plus, n.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xi_int(p: u64, value: u64, precision: usize) -> PAdicNumber {
        PAdicNumber::from_integer(p, &BigUint::from(value), precision).unwrap()
    }

    fn lacunary_small() -> PAdicNumber {
        // ones at 0, 1, 2, 4, 8
        let mut d = vec![0u32; 12];
        for i in [0, 1, 2, 4, 8] {
            d[i] = 1;
        }
        PAdicNumber::from_digits(2, d).unwrap()
    }

    /// Exhaustive level minimizer over the box |x|, |y| ≤ limit.
    fn brute_level(xi: &PAdicNumber, norm: Norm, v: u64, limit: i64) -> (i64, i64) {
        let m = (xi.p() as i64).pow(v as u32);
        let r = xi.residue(v as usize).unwrap().to_i64().unwrap();
        let mut best: Option<(Key, i64, i64)> = None;
        for y in 1..=limit {
            for x in -limit..=limit {
                if (y * r - x).rem_euclid(m) != 0 {
                    continue;
                }
                let (bx, by) = (BigInt::from(x), BigInt::from(y));
                if !admissible(&bx, &by, xi.p()) {
                    continue;
                }
                let k = key_of(norm, &bx, &by);
                if best.as_ref().map_or(true, |(bk, ..)| k < *bk) {
                    best = Some((k, x, y));
                }
            }
        }
        let (_, x, y) = best.expect("box contains a solution");
        (x, y)
    }

    #[test]
    fn lattice_basis_examples() {
        let xi = xi_int(2, 11, 4);
        let lat = lattice_at_level(&xi, 4).unwrap();
        assert_eq!(lat.determinant().magnitude(), &BigUint::from(16u32));
        assert!(lat.contains(&BigInt::from(1), &BigInt::from(3)));
        assert!(lat.contains(&BigInt::from(11), &BigInt::from(1)));
        assert!(!lat.contains(&BigInt::from(1), &BigInt::from(1)));
        let b1 = &lat.basis[0];
        assert_eq!(
            (b1.0.magnitude().clone(), b1.1.magnitude().clone()),
            (BigUint::one(), BigUint::from(3u32))
        );

        let xi = xi_int(3, 3, 2);
        let lat = lattice_at_level(&xi, 1).unwrap();
        assert!(lat.contains(&BigInt::zero(), &BigInt::one()));
        assert!(lat.contains(&BigInt::from(3), &BigInt::zero()));
        assert!(lattice_at_level(&xi, 3).is_err());
        assert!(lattice_at_level(&xi, 0).is_err());
    }

    #[test]
    fn level_minimizer_examples() {
        let xi = xi_int(2, 11, 4);
        let s = best_sup_at_level(&xi, 4).unwrap();
        assert_eq!(
            (s.x.clone(), s.y.clone()),
            (BigInt::from(1), BigInt::from(3))
        );
        assert_eq!(s.height_sup, BigUint::from(3u32));
        let m = best_mult_at_level(&xi, 4).unwrap();
        assert_eq!(
            (m.x.clone(), m.y.clone()),
            (BigInt::from(1), BigInt::from(3))
        );

        let lac = lacunary_small();
        let brute = brute_level(&lac, Norm::Sup, 4, 40);
        let s = best_sup_at_level(&lac, 4).unwrap();
        assert_eq!(
            (s.x.clone(), s.y.clone()),
            (BigInt::from(brute.0), BigInt::from(brute.1))
        );

        // v = 1: ξ ≡ 1 mod p gives (1, 1); for ξ ≡ 3 mod 5 the height-2
        // tie between (-2, 1) and (1, 2) goes to the smaller |x|
        let xi = xi_int(5, 1 + 5 * 4, 3);
        let s = best_sup_at_level(&xi, 1).unwrap();
        assert_eq!(
            (s.x.clone(), s.y.clone()),
            (BigInt::from(1), BigInt::from(1))
        );
        let xi = xi_int(5, 3 + 5 * 4, 3);
        let s = best_sup_at_level(&xi, 1).unwrap();
        assert_eq!(
            (s.x.clone(), s.y.clone()),
            (BigInt::from(1), BigInt::from(2))
        );
        let xi = xi_int(2, 1 + 2 * 1, 3);
        let m = best_mult_at_level(&xi, 1).unwrap();
        assert_eq!(
            (m.x.clone(), m.y.clone()),
            (BigInt::from(1), BigInt::from(1))
        );
    }

    #[test]
    fn level_minimizers_match_brute_force() {
        for p in [2u64, 3, 5, 7] {
            for seed in 0..25u64 {
                let value = seed.wrapping_mul(2654435761) % p.pow(9);
                let xi = xi_int(p, value, 9);
                for v in 1..=9u64 {
                    let m = p.pow(v as u32) as i64;
                    if m > 600 {
                        break;
                    }
                    for norm in [Norm::Sup, Norm::Mult] {
                        let (bx, by) = brute_level(&xi, norm, v, m);
                        let got = best_at_level(&xi, norm, v).unwrap();
                        assert_eq!(
                            (got.x.clone(), got.y.clone()),
                            (BigInt::from(bx), BigInt::from(by)),
                            "p={p} ξ={value} v={v} {norm}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn rational_chain_ends_censored() {
        let third = PAdicNumber::from_rational(2, &BigInt::from(1), &BigInt::from(3), 12).unwrap();
        for norm in [Norm::Sup, Norm::Mult] {
            let c = chain(&third, norm, 12).unwrap();
            assert!(c.is_censored());
            let last = c.entries.last().unwrap();
            assert_eq!(
                (last.x.clone(), last.y.clone()),
                (BigInt::from(1), BigInt::from(3))
            );
        }
    }

    #[test]
    fn chain_matches_oracle_small() {
        for p in [2u64, 3] {
            for seed in 1..15u64 {
                let value = seed.wrapping_mul(0x9E3779B97F4A7C15) % p.pow(14);
                let xi = xi_int(p, value, 14);
                for (norm, bound) in [(Norm::Sup, 300u64), (Norm::Mult, 5_000)] {
                    let c = chain(&xi, norm, 14).unwrap();
                    let o = oracle_chain(&xi, norm, bound).unwrap();
                    assert_eq!(
                        c.restricted(&BigUint::from(bound)),
                        o.entries,
                        "p={p} ξ={value} {norm}"
                    );
                }
            }
        }
    }

    #[test]
    fn oracle_refuses_large_bounds() {
        let xi = xi_int(2, 5, 10);
        assert!(matches!(
            oracle_chain(&xi, Norm::Sup, ORACLE_SUP_LIMIT + 1),
            Err(Error::Budget(_))
        ));
        assert!(matches!(
            oracle_chain(&xi, Norm::Mult, 0),
            Err(Error::Budget(_))
        ));
    }

    #[test]
    fn uniform_paths_agree_on_small_windows() {
        for seed in 1..6u64 {
            let xi = xi_int(3, seed * 7919 % 3u64.pow(12), 12);
            for norm in [Norm::Sup, Norm::Mult] {
                let c = chain(&xi, norm, 12).unwrap();
                for x in [2u64, 5, 17, 40] {
                    let fast = uniform_minimum(&xi, &c, &BigUint::from(x)).unwrap();
                    let slow = uniform_minimum_direct(&xi, norm, x).unwrap();
                    assert_eq!(fast.pair.val.value(), slow.pair.val.value(), "X={x} {norm}");
                }
            }
        }
    }
}
