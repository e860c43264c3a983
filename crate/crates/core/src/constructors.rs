//! Explicit p-adic integers: lacunary sums, the factorial number, digit
//! rules, Schneider continued fractions and digit surgery.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::padic::{check_prime, p_pow, vp_bigint, PAdicNumber};

/// Rational parameter type used by the constructors.
pub type Rational = Ratio<i64>;

/// Default cap on the number of digits a constructor may allocate.
pub const DEFAULT_DIGIT_CAP: usize = 1_000_000;

fn check_cap(precision: usize, cap: usize) -> Result<()> {
    if precision > cap {
        return Err(Error::Budget(format!(
            "precision {precision} exceeds the digit cap {cap}"
        )));
    }
    Ok(())
}

/// `ξ = Σ p^{a_k}` for a finite exponent list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LacunarySpec {
    pub p: u32,
    pub exponents: Vec<u64>,
}

impl LacunarySpec {
    pub fn new(p: u64, exponents: Vec<u64>) -> Result<Self> {
        let p = check_prime(p)?;
        if exponents.len() < 2 {
            return Err(Error::InvalidSpec("need at least two exponents".into()));
        }
        if exponents[0] != 0 {
            return Err(Error::InvalidSpec("a_0 must be 0".into()));
        }
        if exponents.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSpec(
                "exponents must strictly increase".into(),
            ));
        }
        Ok(LacunarySpec { p, exponents })
    }

    /// Parses `pow:<d>` (a_0 = 0, a_1 = max(1, round(d)), a_k = round(d^k))
    /// or `list:<a0,a1,...>`.
    pub fn from_growth(p: u64, growth: &str, terms: usize) -> Result<Self> {
        if let Some(d) = growth.strip_prefix("pow:") {
            let d: f64 = d
                .parse()
                .map_err(|_| Error::InvalidSpec(format!("bad growth base `{d}`")))?;
            if !(d > 1.0) {
                return Err(Error::InvalidSpec("growth base must exceed 1".into()));
            }
            let mut a = Vec::with_capacity(terms);
            for k in 0..terms {
                let value = match k {
                    0 => 0.0,
                    1 => d.round().max(1.0),
                    _ => d.powi(k as i32).round(),
                };
                if value > 1e15 {
                    return Err(Error::Budget(format!("exponent a_{k} too large")));
                }
                a.push(value as u64);
            }
            Self::new(p, a)
        } else if let Some(list) = growth.strip_prefix("list:") {
            let a = list
                .split(',')
                .map(|s| s.trim().parse::<u64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::InvalidSpec(format!("bad exponent list `{list}`")))?;
            Self::new(p, a)
        } else {
            Err(Error::InvalidSpec(format!("unknown growth `{growth}`")))
        }
    }

    pub fn precision(&self) -> usize {
        *self.exponents.last().expect("nonempty") as usize + 1
    }

    /// Indices `k ≥ 1` where `a_{k+1} < 2 a_k`.
    pub fn slow_growth_indices(&self) -> Vec<usize> {
        (1..self.exponents.len() - 1)
            .filter(|&k| self.exponents[k + 1] < 2 * self.exponents[k])
            .collect()
    }

    fn tail_ratios(&self) -> Vec<f64> {
        let a = &self.exponents;
        // ratios a_{k+1}/a_k for k ≥ 1, second half only
        let ratios: Vec<f64> = (1..a.len() - 1)
            .map(|k| a[k + 1] as f64 / a[k] as f64)
            .collect();
        let skip = ratios.len() / 2;
        ratios[skip..].to_vec()
    }

    /// Finite-data `liminf a_{k+1}/a_k` (infinite when fewer than 3 exponents).
    pub fn c(&self) -> f64 {
        self.tail_ratios().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Finite-data `limsup a_{k+1}/a_k`.
    pub fn d(&self) -> f64 {
        let r = self.tail_ratios();
        if r.is_empty() {
            f64::INFINITY
        } else {
            r.into_iter().fold(f64::NEG_INFINITY, f64::max)
        }
    }
}

pub fn build_lacunary(spec: &LacunarySpec) -> Result<PAdicNumber> {
    build_lacunary_capped(spec, DEFAULT_DIGIT_CAP)
}

pub fn build_lacunary_capped(spec: &LacunarySpec, cap: usize) -> Result<PAdicNumber> {
    let n = spec.precision();
    check_cap(n, cap)?;
    let mut digits = vec![0u32; n];
    for &a in &spec.exponents {
        digits[a as usize] = 1;
    }
    PAdicNumber::from_digits(spec.p as u64, digits)
}

/// Ones at `1!, 2!, ..., terms!`.
pub fn build_factorial(p: u64, terms: u32) -> Result<PAdicNumber> {
    build_factorial_capped(p, terms, DEFAULT_DIGIT_CAP)
}

pub fn build_factorial_capped(p: u64, terms: u32, cap: usize) -> Result<PAdicNumber> {
    check_prime(p)?;
    if terms < 2 {
        return Err(Error::InvalidSpec(
            "factorial needs at least 2 terms".into(),
        ));
    }
    let mut positions = Vec::new();
    let mut f: usize = 1;
    for j in 1..=terms as usize {
        f = f
            .checked_mul(j)
            .filter(|&f| f < cap)
            .ok_or_else(|| Error::Budget(format!("{terms}! exceeds the digit cap {cap}")))?;
        positions.push(f);
    }
    let n = f + 1;
    check_cap(n, cap)?;
    let mut digits = vec![0u32; n];
    for i in positions {
        digits[i] = 1;
    }
    PAdicNumber::from_digits(p, digits)
}

/// Named digit sequences.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DigitRule {
    /// Digit `i` is 1 when `i` has an even number of binary ones.
    ThueMorse,
    /// Uniform digits from a seeded ChaCha8 stream.
    Random(u64),
}

impl std::str::FromStr for DigitRule {
    type Err = Error;

    /// Accepts `thue-morse`, `random` (seed 0) and `random(<seed>)`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thue-morse" => Ok(DigitRule::ThueMorse),
            "random" => Ok(DigitRule::Random(0)),
            _ => s
                .strip_prefix("random(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|r| r.trim().parse().ok())
                .map(DigitRule::Random)
                .ok_or_else(|| Error::InvalidSpec(format!("unknown digit rule `{s}`"))),
        }
    }
}

pub fn build_digit_rule(p: u64, rule: &DigitRule, precision: usize) -> Result<PAdicNumber> {
    let pp = check_prime(p)?;
    if precision == 0 {
        return Err(Error::EmptyDigits);
    }
    check_cap(precision, DEFAULT_DIGIT_CAP)?;
    let digits = match rule {
        DigitRule::ThueMorse => (0..precision)
            .map(|i| u32::from((i as u64).count_ones() % 2 == 0))
            .collect(),
        DigitRule::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..precision).map(|_| rng.gen_range(0..pp)).collect()
        }
    };
    PAdicNumber::from_digits(p, digits)
}

/// Schneider continued fraction `p_{n+1} = p_n + p^{g_{n+1}} p_{n-1}` (same for q).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchneiderState {
    pub p: u32,
    /// `p_n` for `n = -1, 0, 1, ...` (index `n + 1`).
    pub num: Vec<BigInt>,
    /// `q_n` for `n = -1, 0, 1, ...` (index `n + 1`).
    pub den: Vec<BigInt>,
    /// `g_n` for `n = 1, 2, ...` (index `n - 1`).
    pub g: Vec<u64>,
    /// `v_p(L_n)` for `n = -1, 0, 1, ...` (index `n + 1`).
    pub ledger: Vec<u64>,
}

impl SchneiderState {
    pub fn new(p: u64) -> Result<Self> {
        let p = check_prime(p)?;
        Ok(SchneiderState {
            p,
            num: vec![BigInt::one(), BigInt::zero()],
            den: vec![BigInt::zero(), BigInt::one()],
            g: Vec::new(),
            ledger: vec![0],
        })
    }

    /// Index of the last computed pair.
    pub fn last(&self) -> usize {
        self.num.len() - 2
    }

    /// `(p_n, q_n)` for `n ≥ -1`.
    pub fn pair(&self, n: i64) -> (&BigInt, &BigInt) {
        let i = (n + 1) as usize;
        (&self.num[i], &self.den[i])
    }

    /// `H_n = max(|p_n|, |q_n|)`.
    pub fn height(&self, n: i64) -> BigUint {
        let (a, b) = self.pair(n);
        a.magnitude().max(b.magnitude()).clone()
    }

    /// `v_p(L_n)` when known (`n ≤ last - 1`).
    pub fn ledger_at(&self, n: i64) -> Option<u64> {
        self.ledger.get((n + 1) as usize).copied()
    }

    /// Whether `p` divides `p_n q_n`.
    pub fn p_divides(&self, n: i64) -> bool {
        let (a, b) = self.pair(n);
        let pb = BigInt::from(self.p);
        (a % &pb).is_zero() || (b % &pb).is_zero()
    }

    /// Valuation of `p_n q_{n+1} - p_{n+1} q_n`.
    pub fn determinant_valuation(&self, n: i64) -> u64 {
        let (a, b) = self.pair(n);
        let (c, d) = self.pair(n + 1);
        vp_bigint(&(a * d - c * b), self.p)
    }
}

/// Appends `(p_{n+1}, q_{n+1})` with `b_{n+1} = p^{g_next}`.
pub fn schneider_step(state: &SchneiderState, g_next: u64) -> Result<SchneiderState> {
    let mut s = state.clone();
    schneider_step_in_place(&mut s, g_next)?;
    Ok(s)
}

fn schneider_step_in_place(s: &mut SchneiderState, g_next: u64) -> Result<()> {
    if g_next == 0 {
        return Err(Error::InvalidSpec("g must be at least 1".into()));
    }
    let b = BigInt::from(p_pow(s.p, g_next));
    let k = s.num.len();
    let pn = &s.num[k - 1] + &b * &s.num[k - 2];
    let qn = &s.den[k - 1] + &b * &s.den[k - 2];
    s.num.push(pn);
    s.den.push(qn);
    s.g.push(g_next);
    let prev = *s.ledger.last().expect("ledger starts at n = -1");
    s.ledger.push(prev + g_next);
    Ok(())
}

fn floor_div_i128(a: i128, b: i128) -> i128 {
    Integer::div_floor(&a, &b)
}

/// Largest `s` with `p^{s·den} ≤ h^{num}`.
fn largest_power_below(p: u32, h: &BigUint, mu: Rational) -> u64 {
    let (num, den) = (*mu.numer() as u32, *mu.denom() as u64);
    let target = h.pow(num);
    let estimate =
        (num as f64 * crate::padic::ln_biguint(h) / (p as f64).ln() / den as f64).floor();
    let mut s = estimate.max(0.0) as u64;
    while s > 0 && p_pow(p, s * den) > target {
        s -= 1;
    }
    while p_pow(p, (s + 1) * den) <= target {
        s += 1;
    }
    s
}

/// Builds `steps` Schneider steps with `g_{n+1}` the largest integer such
/// that `p^{g_{n+1}} ≤ H_n^{μ_n} L_{n-1}`. `mu_seq[n-1]` is `μ_n`; `g1` is
/// the free first exponent. Returns the state and `p_S / q_S` expanded to
/// the precision `v_p(L_{S-1})`.
pub fn schneider_exponent_driven(
    p: u64,
    mu_seq: &[Rational],
    steps: usize,
    eps: Rational,
    g1: u64,
) -> Result<(SchneiderState, PAdicNumber)> {
    let state = schneider_steps(p, mu_seq, steps, eps, g1)?;
    let precision = state.ledger_at(steps as i64 - 1).expect("known") as usize;
    check_cap(precision, DEFAULT_DIGIT_CAP * 4)?;
    let (pn, qn) = state.pair(steps as i64);
    let xi = PAdicNumber::from_rational(p, pn, qn, precision)?;
    Ok((state, xi))
}

/// The recursion of [`schneider_exponent_driven`] without expanding the
/// limit.
pub fn schneider_steps(
    p: u64,
    mu_seq: &[Rational],
    steps: usize,
    eps: Rational,
    g1: u64,
) -> Result<SchneiderState> {
    if steps == 0 {
        return Err(Error::InvalidSpec("steps must be at least 1".into()));
    }
    if eps <= Rational::zero() {
        return Err(Error::InvalidSpec("ε must be positive".into()));
    }
    if mu_seq.len() + 1 < steps {
        return Err(Error::InvalidSpec(format!(
            "{steps} steps need {} exponents, got {}",
            steps - 1,
            mu_seq.len()
        )));
    }
    let floor_mu = Rational::from_integer(2) + eps;
    if let Some(bad) = mu_seq.iter().take(steps - 1).find(|m| **m < floor_mu) {
        return Err(Error::InvalidSpec(format!(
            "μ = {bad} is below 2 + ε = {floor_mu}"
        )));
    }
    let mut state = SchneiderState::new(p)?;
    schneider_step_in_place(&mut state, g1)?;
    for n in 1..steps {
        let mu = mu_seq[n - 1];
        let h = state.height(n as i64);
        let s = largest_power_below(state.p, &h, mu);
        let lprev = state.ledger_at(n as i64 - 1).expect("known");
        let g = s as i128 - lprev as i128;
        if g < 1 {
            return Err(Error::InvalidSpec(format!(
                "step {n}: H_n^μ L_(n-1) < p, cannot pick g ≥ 1"
            )));
        }
        schneider_step_in_place(&mut state, g as u64)?;
    }
    Ok(state)
}

/// Exact check of `H_n^{-μ} ≤ L_n ≤ p H_n^{-μ}`, i.e.
/// `p^{ℓ_n·den} ≤ H_n^{num} < p^{(ℓ_n + 1)·den}` (the right end is strict
/// for the exponent-driven choice of `g`).
pub fn schneider_sandwich(state: &SchneiderState, n: i64, mu: Rational) -> Option<bool> {
    let l = state.ledger_at(n)?;
    if n < 1 || n > state.last() as i64 {
        return None;
    }
    let (num, den) = (*mu.numer() as u32, *mu.denom() as u64);
    let hp = state.height(n).pow(num);
    Some(p_pow(state.p, l * den) <= hp && hp <= p_pow(state.p, (l + 1) * den))
}

/// Blocks of `2 + ε` of length `2^j` (j = 1, 2, ...) each followed by one
/// spike `spike`, truncated to `len` entries.
pub fn block_mu_sequence(eps: Rational, spike: Rational, len: usize) -> Vec<Rational> {
    let base = Rational::from_integer(2) + eps;
    let mut out = Vec::with_capacity(len);
    let mut j = 1u32;
    while out.len() < len {
        for _ in 0..(1usize << j.min(40)) {
            out.push(base);
        }
        out.push(spike);
        j += 1;
    }
    out.truncate(len);
    out
}

/// Parses a μ-sequence: `const:<r>`, `list:<r1,r2,...>` or
/// `blocks:<eps>:<spike>`, with rationals written `a` or `a/b`.
pub fn parse_mu_seq(spec: &str, len: usize) -> Result<Vec<Rational>> {
    let bad = || Error::InvalidSpec(format!("bad μ-sequence `{spec}`"));
    if let Some(r) = spec.strip_prefix("const:") {
        Ok(vec![parse_rational(r)?; len])
    } else if let Some(list) = spec.strip_prefix("list:") {
        list.split(',').map(parse_rational).collect()
    } else if let Some(rest) = spec.strip_prefix("blocks:") {
        let (eps, spike) = rest.split_once(':').ok_or_else(bad)?;
        Ok(block_mu_sequence(
            parse_rational(eps)?,
            parse_rational(spike)?,
            len,
        ))
    } else {
        Err(bad())
    }
}

/// Parses `a`, `a/b` or a terminating decimal into a rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::InvalidSpec(format!("bad rational `{s}`"));
    if let Some((a, b)) = s.split_once('/') {
        let a: i64 = a.trim().parse().map_err(|_| bad())?;
        let b: i64 = b.trim().parse().map_err(|_| bad())?;
        if b == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(a, b));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.len() > 12 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let scale = 10i64.pow(frac.len() as u32);
        let negative = int.starts_with('-');
        let i: i64 = if int.is_empty() || int == "-" {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        let f: i64 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| bad())?
        };
        let f = if negative { -f } else { f };
        return Ok(Rational::new(i * scale + f, scale));
    }
    s.parse::<i64>()
        .map(Rational::from_integer)
        .map_err(|_| bad())
}

/// Parameters of a digit surgery.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurgerySpec {
    pub t: Rational,
    pub mu: Rational,
    pub c: u64,
    pub sigma: Vec<u64>,
}

/// Output of [`surgery_transform`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurgeryResult {
    pub xi: PAdicNumber,
    pub nu: Vec<u64>,
    pub tau: Vec<u64>,
    /// `u_i = Σ_{j ∈ J_i} a_j p^j − p^{ν_i} − p^{τ_i}`.
    pub u: Vec<BigInt>,
    /// `u^{(0)} = 0, u^{(1)}, ..., u^{(m)}`.
    pub u_partial: Vec<BigInt>,
}

fn floor_rational_times(r: Rational, n: u64) -> Result<u64> {
    let num = *r.numer() as i128 * n as i128;
    let v = floor_div_i128(num, *r.denom() as i128);
    u64::try_from(v).map_err(|_| Error::InvalidSpec("negative interval bound".into()))
}

impl SurgerySpec {
    /// `(ν_j, τ_j)` with `ν_j = ⌊tμσ_j⌋ + C` and `τ_j = ⌊μν_j⌋`, checking
    /// `σ_1 < ν_1 < τ_1 < σ_2 < ...`.
    pub fn intervals(&self) -> Result<Vec<(u64, u64)>> {
        let one = Rational::one();
        if self.t < one || self.t > Rational::from_integer(2) {
            return Err(Error::InvalidSpec("t must lie in [1, 2]".into()));
        }
        if self.mu <= Rational::from_integer(2) {
            return Err(Error::InvalidSpec("μ must exceed 2".into()));
        }
        if self.sigma.is_empty() {
            return Err(Error::InvalidSpec("no source positions".into()));
        }
        let tm = self.t * self.mu;
        let mut out = Vec::with_capacity(self.sigma.len());
        let mut last_tau: Option<u64> = None;
        for &s in &self.sigma {
            let nu = floor_rational_times(tm, s)? + self.c;
            let tau = floor_rational_times(self.mu, nu)?;
            let ordered = last_tau.map_or(true, |lt| lt < s) && s < nu && nu < tau;
            if !ordered {
                return Err(Error::InvalidSpec(format!(
                    "intervals out of order at σ = {s} (ν = {nu}, τ = {tau})"
                )));
            }
            last_tau = Some(tau);
            out.push((nu, tau));
        }
        Ok(out)
    }
}

/// Zeroes the digits of `zeta` strictly inside each `J_j = [ν_j, τ_j]` and
/// puts 1 at both endpoints.
pub fn surgery_transform(zeta: &PAdicNumber, spec: &SurgerySpec) -> Result<SurgeryResult> {
    let intervals = spec.intervals()?;
    surgery_on_intervals(zeta, &intervals)
}

/// Surgery on explicit intervals (must be disjoint, increasing and within
/// the precision of `zeta`).
pub fn surgery_on_intervals(zeta: &PAdicNumber, intervals: &[(u64, u64)]) -> Result<SurgeryResult> {
    let n = zeta.precision() as u64;
    for (i, &(a, b)) in intervals.iter().enumerate() {
        if a >= b {
            return Err(Error::InvalidSpec(format!("empty interval [{a}, {b}]")));
        }
        if b >= n {
            return Err(Error::PrecisionExceeded {
                requested: b,
                precision: n,
            });
        }
        if i > 0 && intervals[i - 1].1 >= a {
            return Err(Error::InvalidSpec("intervals overlap".into()));
        }
    }
    let p = zeta.p();
    let mut digits = zeta.digits().to_vec();
    let mut u = Vec::with_capacity(intervals.len());
    for &(nu, tau) in intervals {
        let (lo, hi) = (nu as usize, tau as usize);
        let block = digits_value(p, &digits[lo..=hi]) * p_pow(p, nu);
        let ui = BigInt::from(block) - BigInt::from(p_pow(p, nu)) - BigInt::from(p_pow(p, tau));
        u.push(ui);
        for d in &mut digits[lo..=hi] {
            *d = 0;
        }
        digits[lo] = 1;
        digits[hi] = 1;
    }
    let mut u_partial = vec![BigInt::zero()];
    for ui in &u {
        let next = u_partial.last().expect("nonempty") + ui;
        u_partial.push(next);
    }
    Ok(SurgeryResult {
        xi: PAdicNumber::from_digits(p as u64, digits)?,
        nu: intervals.iter().map(|iv| iv.0).collect(),
        tau: intervals.iter().map(|iv| iv.1).collect(),
        u,
        u_partial,
    })
}

fn digits_value(p: u32, digits: &[u32]) -> BigUint {
    if p <= 256 {
        let bytes: Vec<u8> = digits.iter().map(|&d| d as u8).collect();
        BigUint::from_radix_le(&bytes, p).unwrap_or_default()
    } else {
        digits
            .iter()
            .rev()
            .fold(BigUint::zero(), |acc, &d| acc * p + d)
    }
}

/// Transplants approximations of the source: `y_{j,0} = x_{j,0} − u^{(j−1)} x_{j,1}`,
/// `y_{j,1} = x_{j,1}`. `u_partials[j]` is `u^{(j)}` with `u^{(0)} = 0`.
pub fn surgery_pairs(
    xi: &PAdicNumber,
    x_pairs: &[(BigInt, BigInt)],
    u_partials: &[BigInt],
) -> Result<Vec<crate::padic::ApproxPair>> {
    if u_partials.len() < x_pairs.len() {
        return Err(Error::InvalidSpec(format!(
            "{} pairs but only {} partial sums",
            x_pairs.len(),
            u_partials.len()
        )));
    }
    x_pairs
        .iter()
        .zip(u_partials)
        .map(|((x0, x1), u)| crate::padic::ApproxPair::new(xi, x0 - u * x1, x1.clone()))
        .collect()
}

/// `⌊log_p n⌋` for `n ≥ 1`.
pub fn floor_log_p(p: u32, n: &BigUint) -> u64 {
    assert!(!n.is_zero());
    let bits = n.bits();
    let mut e = ((bits - 1) as f64 / (p as f64).log2()).floor() as u64;
    while e > 0 && p_pow(p, e) > *n {
        e -= 1;
    }
    while p_pow(p, e + 1) <= *n {
        e += 1;
    }
    e
}

/// Pointwise exponent `v ln p / ln H` of a valuation against a height.
pub fn pointwise_exponent(p: u32, val: u64, height: &BigUint) -> f64 {
    val as f64 * (p as f64).ln() / crate::padic::ln_biguint(height)
}

/// Absolute value of a big integer as an unsigned one.
pub fn magnitude(n: &BigInt) -> BigUint {
    n.abs().to_biguint().expect("nonnegative")
}

/// Converts a small rational to `f64`.
pub fn rational_to_f64(r: Rational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / *r.denom() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(xi: &PAdicNumber) -> Vec<usize> {
        xi.digits()
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == 1)
            .map(|(i, _)| i)
            .collect()
    }

    #[test]
    fn lacunary_examples() {
        let spec = LacunarySpec::new(2, vec![0, 1, 2, 4, 8]).unwrap();
        let xi = build_lacunary(&spec).unwrap();
        assert_eq!(ones(&xi), vec![0, 1, 2, 4, 8]);
        assert_eq!(xi.full_residue(), &BigUint::from(279u32));

        let spec = LacunarySpec::from_growth(2, "pow:3", 9).unwrap();
        assert_eq!(spec.exponents, vec![0, 3, 9, 27, 81, 243, 729, 2187, 6561]);
        assert_eq!(spec.precision(), 6562);
        assert_eq!((spec.c(), spec.d()), (3.0, 3.0));

        let xi = build_lacunary(&LacunarySpec::new(3, vec![0, 1]).unwrap()).unwrap();
        assert_eq!(xi.full_residue(), &BigUint::from(4u32));
        assert!(LacunarySpec::new(2, vec![0]).is_err());
        assert!(LacunarySpec::new(2, vec![0, 3, 3]).is_err());
        assert_eq!(
            LacunarySpec::new(2, vec![0, 2, 3, 8])
                .unwrap()
                .slow_growth_indices(),
            vec![1]
        );
    }

    #[test]
    fn factorial_examples() {
        let xi = build_factorial(2, 4).unwrap();
        assert_eq!(ones(&xi), vec![1, 2, 6, 24]);
        assert_eq!(xi.precision(), 25);
        assert_eq!(build_factorial(2, 8).unwrap().precision(), 40321);
        assert_eq!(ones(&build_factorial(5, 3).unwrap()), vec![1, 2, 6]);
        assert!(matches!(build_factorial(2, 12), Err(Error::Budget(_))));
        assert!(build_factorial(2, 1).is_err());
    }

    #[test]
    fn digit_rule_examples() {
        let tm = build_digit_rule(2, &DigitRule::ThueMorse, 11).unwrap();
        assert_eq!(ones(&tm), vec![0, 3, 5, 6, 9, 10]);
        assert_eq!(
            build_digit_rule(2, &DigitRule::ThueMorse, 1)
                .unwrap()
                .digits(),
            &[1]
        );
        let a = build_digit_rule(3, &DigitRule::Random(1), 5).unwrap();
        let b = build_digit_rule(3, &"random(1)".parse().unwrap(), 5).unwrap();
        assert_eq!(a, b);
        assert!("fibonacci".parse::<DigitRule>().is_err());
    }

    #[test]
    fn schneider_hand_steps() {
        let s0 = SchneiderState::new(3).unwrap();
        let s1 = schneider_step(&s0, 2).unwrap();
        assert_eq!(s1.pair(1), (&BigInt::from(9), &BigInt::from(1)));
        let s2 = schneider_step(&s1, 1).unwrap();
        assert_eq!(s2.pair(2), (&BigInt::from(9), &BigInt::from(4)));
        assert_eq!(s2.ledger_at(1), Some(s2.ledger_at(0).unwrap() + 1));
        assert!(s2.p_divides(2));
        assert!(schneider_step(&s0, 0).is_err());
        for n in -1..=1 {
            assert_eq!(s2.determinant_valuation(n), s2.ledger_at(n).unwrap());
        }
    }

    #[test]
    fn schneider_driven_sandwich() {
        let mu = Rational::new(5, 2);
        let (state, xi) =
            schneider_exponent_driven(2, &[mu; 3], 4, Rational::new(1, 2), 1).unwrap();
        for n in 1..=3 {
            assert_eq!(schneider_sandwich(&state, n, mu), Some(true));
            let (a, b) = state.pair(n);
            assert!(a.gcd(b).is_one());
        }
        let (a, b) = state.pair(2);
        let v = xi.linear_form_valuation(a, b).unwrap();
        assert_eq!(v.value(), state.ledger_at(2).unwrap());
        assert!(
            schneider_exponent_driven(2, &[Rational::new(9, 4)], 2, Rational::new(1, 2), 1)
                .is_err()
        );
    }

    #[test]
    fn surgery_examples() {
        let spec = SurgerySpec {
            t: Rational::new(3, 2),
            mu: Rational::from_integer(6),
            c: 5,
            sigma: vec![10],
        };
        assert_eq!(spec.intervals().unwrap(), vec![(95, 570)]);

        let zeta = PAdicNumber::from_digits(2, vec![1; 8]).unwrap();
        let r = surgery_on_intervals(&zeta, &[(2, 4)]).unwrap();
        assert_eq!(r.xi.digits(), &[1, 1, 1, 0, 1, 1, 1, 1]);
        assert_eq!(r.u, vec![BigInt::from(8)]);
        assert_eq!(r.u_partial, vec![BigInt::zero(), BigInt::from(8)]);
        assert!(surgery_on_intervals(&zeta, &[(2, 4), (4, 6)]).is_err());
        assert!(surgery_on_intervals(&zeta, &[(2, 8)]).is_err());

        let pairs = surgery_pairs(
            &r.xi,
            &[(BigInt::from(7), BigInt::from(3))],
            &[BigInt::from(8)],
        )
        .unwrap();
        assert_eq!(
            (pairs[0].x.clone(), pairs[0].y.clone()),
            (BigInt::from(-17), BigInt::from(3))
        );
        assert!(surgery_pairs(&r.xi, &[(BigInt::one(), BigInt::one())], &[]).is_err());
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("5/2").unwrap(), Rational::new(5, 2));
        assert_eq!(parse_rational("2.5").unwrap(), Rational::new(5, 2));
        assert_eq!(parse_rational("3").unwrap(), Rational::from_integer(3));
        assert!(parse_rational("x").is_err());
        let seq = block_mu_sequence(Rational::new(1, 2), Rational::from_integer(9), 8);
        assert_eq!(seq[2], Rational::from_integer(9));
        assert_eq!(seq[7], Rational::from_integer(9));
        assert_eq!(parse_mu_seq("const:5/2", 3).unwrap().len(), 3);
    }
}
