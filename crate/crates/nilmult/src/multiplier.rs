//! The c-nilpotent multiplier of an nth nilpotent product of cyclic groups,
//! computed three ways:
//!
//! * [`multiplier_general`]: enumerate the basic commutators in the relevant
//!   weight window and attach each one's gcd modulus. Works for any orders
//!   satisfying the prime condition.
//! * [`multiplier_closed_form`]: the closed formula for orders arranged as
//!   `m` infinite factors followed by a divisibility chain `r_1 | ... `
//!   (each `r_{j+1}` divides `r_j`).
//! * [`multiplier_two_factor`]: the specialization to exactly two finite
//!   factors, where only `gcd(r, s)` survives.
//!
//! The weight window is `n+1 ..= n+c` when `n >= c` and `c+1 ..= n+c`
//! otherwise; for `n = c` the two coincide.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::hallbasis::BasisTable;
use crate::numtheory::{chi_partial_sum, factorize, gcd_zero_aware};

/// Configurable size guards threaded through computations that enumerate.
#[derive(Debug, Clone, Copy)]
pub struct Caps {
    /// Maximum number of basic-commutator table entries.
    pub basis: usize,
    /// Maximum number of elements a subgroup enumeration may visit.
    pub subgroup: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            basis: crate::hallbasis::DEFAULT_BASIS_CAP,
            subgroup: 1_000_000,
        }
    }
}

/// Orders of the cyclic factors, left to right; 0 means infinite cyclic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclicOrders(Vec<u64>);

impl CyclicOrders {
    pub fn new(orders: Vec<u64>) -> Result<Self> {
        if orders.is_empty() {
            return Err(Error::Domain("need at least one cyclic factor".into()));
        }
        Ok(CyclicOrders(orders))
    }

    pub fn factor_count(&self) -> u32 {
        self.0.len() as u32
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }
}

/// An nth nilpotent product of cyclic groups of the given orders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductSpec {
    class_n: u32,
    orders: CyclicOrders,
}

impl ProductSpec {
    pub fn new(class_n: u32, orders: CyclicOrders) -> Result<Self> {
        if class_n == 0 {
            return Err(Error::Domain("nilpotency class must be >= 1".into()));
        }
        Ok(ProductSpec { class_n, orders })
    }

    pub fn class(&self) -> u32 {
        self.class_n
    }

    pub fn orders(&self) -> &CyclicOrders {
        &self.orders
    }
}

/// A small prime divides a finite factor order, putting the input outside
/// the hypotheses the formulas need.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeViolation {
    pub prime: u64,
    pub order: u64,
}

impl fmt::Display for PrimeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "prime {} divides order {}", self.prime, self.order)
    }
}

fn small_primes_up_to(bound: u64) -> Vec<u64> {
    (2..=bound)
        .filter(|&p| factorize(p).len() == 1 && factorize(p)[0].1 == 1)
        .collect()
}

pub(crate) fn prime_violations(orders: &[u64], bound: u64) -> Vec<PrimeViolation> {
    let mut out = Vec::new();
    for p in small_primes_up_to(bound) {
        for &order in orders {
            if order != 0 && order % p == 0 {
                out.push(PrimeViolation { prime: p, order });
            }
        }
    }
    out
}

/// Check the prime condition for computing the c-nilpotent multiplier of
/// `spec`: every prime up to `n + c` must be coprime to every finite order.
/// An empty list means the input is admissible.
pub fn validate_spec(spec: &ProductSpec, c: u32) -> Vec<PrimeViolation> {
    let bound = u64::from(spec.class_n) + u64::from(c);
    prime_violations(spec.orders.as_slice(), bound)
}

pub(crate) fn require_valid(spec: &ProductSpec, c: u32) -> Result<()> {
    if c == 0 {
        return Err(Error::Domain("c must be >= 1".into()));
    }
    let violations = validate_spec(spec, c);
    if violations.is_empty() {
        return Ok(());
    }
    let listed: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
    Err(Error::Precondition(format!(
        "orders violate the prime condition for n={}, c={}: {}",
        spec.class_n,
        c,
        listed.join("; ")
    )))
}

/// A finitely generated abelian group: free rank plus torsion.
///
/// Two values compare equal when their free ranks and primary decompositions
/// agree, regardless of how the torsion was presented. The `factors` list
/// keeps the presented shape (deduplicated, modulus descending) for display.
#[derive(Debug, Clone, Eq)]
pub struct AbelianStructure {
    free_rank: u64,
    /// Display form: (modulus >= 2, multiplicity >= 1), modulus descending.
    factors: Vec<(u64, u64)>,
    /// Canonical form: prime power -> multiplicity.
    torsion: BTreeMap<u64, u64>,
}

impl PartialEq for AbelianStructure {
    fn eq(&self, other: &Self) -> bool {
        self.free_rank == other.free_rank && self.torsion == other.torsion
    }
}

impl AbelianStructure {
    pub fn trivial() -> Self {
        canonicalize(&[])
    }

    pub fn free_rank(&self) -> u64 {
        self.free_rank
    }

    /// Display factors, modulus descending.
    pub fn factors(&self) -> &[(u64, u64)] {
        &self.factors
    }

    /// Primary decomposition: map from prime power to multiplicity.
    pub fn torsion(&self) -> &BTreeMap<u64, u64> {
        &self.torsion
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    /// Group order: `None` when the free rank is positive.
    pub fn order(&self) -> Option<BigUint> {
        if self.free_rank > 0 {
            return None;
        }
        let mut n = BigUint::from(1u32);
        for (&pk, &mult) in &self.torsion {
            for _ in 0..mult {
                n *= BigUint::from(pk);
            }
        }
        Some(n)
    }

    /// Text form in the style `Z^2 + Z_5^3`; the trivial group prints `1`.
    pub fn to_text(&self) -> String {
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            k => parts.push(format!("Z^{k}")),
        }
        for &(modulus, mult) in &self.factors {
            if mult == 1 {
                parts.push(format!("Z_{modulus}"));
            } else {
                parts.push(format!("Z_{modulus}^{mult}"));
            }
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join(" + ")
        }
    }

    /// JSON form: `{"free_rank": k, "factors": [{"modulus": M,
    /// "multiplicity": e}, ...]}` with factors sorted modulus descending.
    pub fn to_json_value(&self) -> serde_json::Value {
        let factors: Vec<serde_json::Value> = self
            .factors
            .iter()
            .map(|&(modulus, mult)| serde_json::json!({ "modulus": modulus, "multiplicity": mult }))
            .collect();
        serde_json::json!({ "free_rank": self.free_rank, "factors": factors })
    }
}

impl fmt::Display for AbelianStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Normalize raw `(modulus, multiplicity)` pairs: modulus 0 counts toward
/// the free rank, modulus 1 vanishes, everything else is split into prime
/// powers for the canonical form and merged by modulus for display.
pub fn canonicalize(raw: &[(u64, u64)]) -> AbelianStructure {
    let mut free_rank = 0u64;
    let mut display: BTreeMap<u64, u64> = BTreeMap::new();
    let mut torsion: BTreeMap<u64, u64> = BTreeMap::new();
    for &(modulus, mult) in raw {
        if mult == 0 {
            continue;
        }
        match modulus {
            0 => free_rank += mult,
            1 => {}
            m => {
                *display.entry(m).or_insert(0) += mult;
                for (p, e) in factorize(m) {
                    *torsion.entry(p.pow(e)).or_insert(0) += mult;
                }
            }
        }
    }
    let factors: Vec<(u64, u64)> = display.into_iter().rev().collect();
    AbelianStructure {
        free_rank,
        factors,
        torsion,
    }
}

/// The weight window whose basic commutators span the multiplier: returns
/// `(lo, hi)` with `hi = n + c`.
fn weight_window(n: u32, c: u32) -> Result<(u32, u32)> {
    let hi = n
        .checked_add(c)
        .ok_or_else(|| Error::Domain("n + c overflows u32".into()))?;
    let lo = if n >= c { n + 1 } else { c + 1 };
    Ok((lo, hi))
}

fn biguint_to_u64(v: &BigUint, what: &str) -> Result<u64> {
    v.to_u64()
        .ok_or_else(|| Error::ResourceCap(format!("{what} = {v} does not fit in 64 bits")))
}

/// General path: one cyclic factor per basic commutator in the weight
/// window, with modulus the gcd of the occurring generator orders.
/// The orders must pass [`validate_spec`].
pub fn multiplier_general(spec: &ProductSpec, c: u32, caps: &Caps) -> Result<AbelianStructure> {
    require_valid(spec, c)?;
    multiplier_general_unchecked(spec, c, caps)
}

/// [`multiplier_general`] without the prime-condition gate. Callers that
/// bypass validation own the interpretation of the result.
pub fn multiplier_general_unchecked(
    spec: &ProductSpec,
    c: u32,
    caps: &Caps,
) -> Result<AbelianStructure> {
    if c == 0 {
        return Err(Error::Domain("c must be >= 1".into()));
    }
    let n = spec.class_n;
    let (lo, hi) = weight_window(n, c)?;
    let q = spec.orders.factor_count();
    let table = BasisTable::enumerate(q, hi, caps.basis)?;
    let orders = spec.orders.as_slice();
    let mut raw: Vec<(u64, u64)> = Vec::new();
    for w in lo..=hi {
        for i in table.weight_range(w) {
            let modulus = table.modulus(i, orders)?;
            raw.push((modulus, 1));
        }
    }
    Ok(canonicalize(&raw))
}

/// Closed form for `m` infinite factors and a divisibility chain
/// `rs = [r_1, ..., r_t]` with `r_{j+1} | r_j`: with
/// `h_k = sum of chi over the window at q = m + k`, the result is
/// `Z^(h_0) + Z_{r_1}^(h_1 - h_0) + ... + Z_{r_t}^(h_t - h_{t-1})`.
pub fn multiplier_closed_form(m: u32, rs: &[u64], n: u32, c: u32) -> Result<AbelianStructure> {
    if n == 0 || c == 0 {
        return Err(Error::Domain("need n >= 1 and c >= 1".into()));
    }
    if m == 0 && rs.is_empty() {
        return Err(Error::Domain(
            "need at least one factor (m + t >= 1)".into(),
        ));
    }
    for &r in rs {
        if r == 0 {
            return Err(Error::Domain(
                "chain entries must be finite; encode infinite factors in m".into(),
            ));
        }
    }
    for pair in rs.windows(2) {
        if pair[0] % pair[1] != 0 {
            return Err(Error::Precondition(format!(
                "not a divisibility chain: {} does not divide {}",
                pair[1], pair[0]
            )));
        }
    }
    let hi = n
        .checked_add(c)
        .ok_or_else(|| Error::Domain("n + c overflows u32".into()))?;
    let violations = prime_violations(rs, u64::from(hi));
    if !violations.is_empty() {
        let listed: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::Precondition(format!(
            "chain violates the prime condition for n={n}, c={c}: {}",
            listed.join("; ")
        )));
    }
    let (base, span) = if n >= c { (n, c) } else { (c, n) };
    let t = rs.len();
    let mut h: Vec<BigUint> = Vec::with_capacity(t + 1);
    for k in 0..=t {
        h.push(chi_partial_sum(base, span, u64::from(m) + k as u64)?);
    }
    for k in 1..=t {
        // chi is monotone in the generator count, so the exponents h_k are too.
        assert!(h[k] >= h[k - 1], "partial sums must be monotone");
    }
    let mut raw: Vec<(u64, u64)> = Vec::new();
    raw.push((0, biguint_to_u64(&h[0], "free rank")?));
    for j in 1..=t {
        let mult = biguint_to_u64(&(&h[j] - &h[j - 1]), "factor multiplicity")?;
        raw.push((rs[j - 1], mult));
    }
    Ok(canonicalize(&raw))
}

/// Two finite factors `Z_r` and `Z_s`: everything collapses onto
/// `d = gcd(r, s)`, with exponent the chi partial sum at q = 2.
pub fn multiplier_two_factor(r: u64, s: u64, n: u32, c: u32) -> Result<AbelianStructure> {
    if n == 0 || c == 0 {
        return Err(Error::Domain("need n >= 1 and c >= 1".into()));
    }
    if r == 0 || s == 0 {
        return Err(Error::Domain("two-factor form needs finite orders".into()));
    }
    let hi = n
        .checked_add(c)
        .ok_or_else(|| Error::Domain("n + c overflows u32".into()))?;
    let violations = prime_violations(&[r, s], u64::from(hi));
    if !violations.is_empty() {
        let listed: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::Precondition(format!(
            "orders violate the prime condition for n={n}, c={c}: {}",
            listed.join("; ")
        )));
    }
    let d = gcd_zero_aware(&[r, s])?;
    let (base, span) = if n >= c { (n, c) } else { (c, n) };
    let exponent = biguint_to_u64(&chi_partial_sum(base, span, 2)?, "factor multiplicity")?;
    Ok(canonicalize(&[(d, exponent)]))
}
