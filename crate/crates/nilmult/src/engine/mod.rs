//! Brute-force arithmetic in nilpotent products of cyclic groups, used as an
//! independent check on the counting formulas.
//!
//! A context fixes the class and the factor orders. Elements are stored in
//! normal form: one exponent per basic commutator, taken modulo the gcd of
//! the orders of the generators occurring in that commutator (0 meaning no
//! constraint). When every modulus is finite and positive, products are
//! computed by collection: scan for an adjacent out-of-order pair, exchange
//! it through the cached expansion of the corresponding commutator, repeat.
//! Each exchange rewrites the word by a relation that holds in the group, so
//! when the scan terminates the sorted, reduced word is the normal form.
//!
//! The cached expansions themselves, and every operation a plain collection
//! cannot express (infinite factors, negative or oversized exponents, words
//! in arbitrary order), are computed in the free nilpotent group via the
//! truncated-series embedding in [`series`] and reduced afterwards. The two
//! routes overlap on a large set of inputs, which the tests exploit.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::hallbasis::{BasisTable, GeneratorStyled};
use crate::multiplier::{
    multiplier_general, multiplier_general_unchecked, prime_violations, require_valid,
    AbelianStructure, Caps, CyclicOrders, ProductSpec,
};
use crate::numtheory::{factorize, mobius};

mod series;
use series::FreeCtx;

/// Ceiling on rewrite steps a single collection may take before giving up.
const COLLECT_STEP_CAP: u64 = 100_000_000;

/// A group element in normal form: `exps[i]` is the exponent of the `i`th
/// basic commutator. Where the modulus is finite the exponent lies in
/// `[0, modulus)`; where it is 0 any integer is allowed.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupElement {
    exps: Vec<i128>,
}

impl GroupElement {
    pub fn exponents(&self) -> &[i128] {
        &self.exps
    }

    pub fn is_identity(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }
}

/// A word in the generators: `(index, exponent)` letters, indices 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorWord {
    letters: Vec<(u32, i64)>,
}

impl GeneratorWord {
    pub fn new(letters: Vec<(u32, i64)>) -> Result<Self> {
        for &(k, e) in &letters {
            if k == 0 {
                return Err(Error::Domain("generator indices are 1-based".into()));
            }
            if e == i64::MIN {
                return Err(Error::Domain("exponent out of range".into()));
            }
        }
        Ok(GeneratorWord { letters })
    }

    pub fn letters(&self) -> &[(u32, i64)] {
        &self.letters
    }

    pub fn concat(&self, other: &GeneratorWord) -> GeneratorWord {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        GeneratorWord { letters }
    }

    /// The word spelling the inverse: reversed letters, negated exponents.
    pub fn inverted(&self) -> GeneratorWord {
        let letters = self.letters.iter().rev().map(|&(k, e)| (k, -e)).collect();
        GeneratorWord { letters }
    }
}

impl FromStr for GeneratorWord {
    type Err = Error;

    /// Accepts whitespace-separated `gK` or `gK^E` tokens; the empty string
    /// is the empty word.
    fn from_str(s: &str) -> Result<Self> {
        let mut letters = Vec::new();
        for tok in s.split_whitespace() {
            let rest = tok.strip_prefix('g').ok_or_else(|| {
                Error::Domain(format!("expected a gK or gK^E token, got {tok:?}"))
            })?;
            let (idx, exp) = match rest.split_once('^') {
                Some((a, b)) => (a, Some(b)),
                None => (rest, None),
            };
            let k: u32 = idx
                .parse()
                .map_err(|_| Error::Domain(format!("bad generator index in {tok:?}")))?;
            let e: i64 = match exp {
                Some(t) => t
                    .parse()
                    .map_err(|_| Error::Domain(format!("bad exponent in {tok:?}")))?,
                None => 1,
            };
            if k == 0 {
                return Err(Error::Domain("generator indices are 1-based".into()));
            }
            if e == i64::MIN {
                return Err(Error::Domain("exponent out of range".into()));
            }
            letters.push((k, e));
        }
        Ok(GeneratorWord { letters })
    }
}

impl fmt::Display for GeneratorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        for (pos, &(k, e)) in self.letters.iter().enumerate() {
            if pos > 0 {
                f.write_str(" ")?;
            }
            if e == 1 {
                write!(f, "g{k}")?;
            } else {
                write!(f, "g{k}^{e}")?;
            }
        }
        Ok(())
    }
}

/// What a brute-force scan of a finite set of elements found: whether every
/// pair commuted (with a witness when one did not), and, for abelian sets,
/// how many elements have each order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FingerprintReport {
    pub abelian: bool,
    /// Indices into the input slice of a non-commuting pair, if any.
    pub witness: Option<(usize, usize)>,
    /// order -> number of elements of that order; empty when not abelian.
    pub order_counts: BTreeMap<u64, u64>,
}

/// Outcome of checking a predicted multiplier against the subgroup actually
/// enumerated inside the bigger product.
#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub predicted: AbelianStructure,
    pub predicted_counts: BTreeMap<u64, u64>,
    pub observed_counts: BTreeMap<u64, u64>,
    pub subgroup_size: u64,
    pub ambient_class: u32,
    pub weight_threshold: u32,
    pub abelian: bool,
    pub matched: bool,
}

/// Arithmetic context for one nilpotent product of cyclic groups.
pub struct GroupContext {
    spec: ProductSpec,
    caps: Caps,
    basis: BasisTable,
    moduli: Vec<u64>,
    all_finite: bool,
    free: OnceLock<std::result::Result<Box<FreeCtx>, Error>>,
    pair_cache: RwLock<HashMap<(usize, usize), Arc<Vec<(usize, u64)>>>>,
}

impl GroupContext {
    /// Build a context after checking the prime condition: collection only
    /// produces consistent normal forms when every prime dividing a finite
    /// factor order exceeds the class.
    pub fn build(spec: &ProductSpec, caps: &Caps) -> Result<GroupContext> {
        let violations = prime_violations(spec.orders().as_slice(), u64::from(spec.class()));
        if !violations.is_empty() {
            let listed: Vec<String> = violations.iter().map(ToString::to_string).collect();
            return Err(Error::Precondition(format!(
                "orders violate the prime condition for class {}: {}",
                spec.class(),
                listed.join("; ")
            )));
        }
        Self::build_unchecked(spec, caps)
    }

    /// Build without the prime check. The arithmetic then carries no
    /// guarantee; downstream consistency checks may fail loudly.
    pub fn build_unchecked(spec: &ProductSpec, caps: &Caps) -> Result<GroupContext> {
        if spec.class() < 2 {
            return Err(Error::Precondition(
                "group contexts need class at least 2".into(),
            ));
        }
        let basis = BasisTable::enumerate(spec.orders().factor_count(), spec.class(), caps.basis)?;
        let orders = spec.orders().as_slice();
        let moduli: Vec<u64> = (0..basis.len())
            .map(|i| basis.modulus(i, orders))
            .collect::<Result<_>>()?;
        let all_finite = moduli.iter().all(|&n| n > 0);
        Ok(GroupContext {
            spec: spec.clone(),
            caps: *caps,
            basis,
            moduli,
            all_finite,
            free: OnceLock::new(),
            pair_cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn spec(&self) -> &ProductSpec {
        &self.spec
    }

    pub fn class(&self) -> u32 {
        self.spec.class()
    }

    pub fn basis(&self) -> &BasisTable {
        &self.basis
    }

    /// Exponent modulus per basis entry (0 = unconstrained).
    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    /// Total number of elements, when every modulus is finite.
    pub fn element_count(&self) -> Option<BigUint> {
        if !self.all_finite {
            return None;
        }
        let mut acc = BigUint::one();
        for &n in &self.moduli {
            acc *= BigUint::from(n);
        }
        Some(acc)
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            exps: vec![0; self.basis.len()],
        }
    }

    /// The image of generator `k` (1-based).
    pub fn generator(&self, k: u32) -> Result<GroupElement> {
        if k == 0 || k > self.basis.generator_count() {
            return Err(Error::Domain(format!(
                "no generator g{k} in a context with {} generators",
                self.basis.generator_count()
            )));
        }
        self.basis_element(k as usize - 1)
    }

    /// The element whose normal form is the `i`th basis entry to the first
    /// power (possibly the identity, when that entry has modulus 1).
    pub fn basis_element(&self, i: usize) -> Result<GroupElement> {
        if i >= self.basis.len() {
            return Err(Error::Domain(format!(
                "basis index {i} out of range ({} entries)",
                self.basis.len()
            )));
        }
        let mut exps = vec![0i128; self.basis.len()];
        exps[i] = 1;
        self.element_from_exponents(exps)
    }

    /// Normalize raw exponents into an element of this context: reduces each
    /// entry into `[0, modulus)` where the modulus is finite.
    pub fn element_from_exponents(&self, exps: Vec<i128>) -> Result<GroupElement> {
        if exps.len() != self.basis.len() {
            return Err(Error::Precondition(format!(
                "exponent vector has length {}, context has {} basis entries",
                exps.len(),
                self.basis.len()
            )));
        }
        let exps = exps
            .into_iter()
            .zip(&self.moduli)
            .map(|(e, &n)| if n == 0 { e } else { e.rem_euclid(n as i128) })
            .collect();
        Ok(GroupElement { exps })
    }

    fn check_element(&self, g: &GroupElement) -> Result<()> {
        if g.exps.len() != self.basis.len() {
            return Err(Error::Precondition(
                "element does not belong to this context (wrong length)".into(),
            ));
        }
        for (&e, &n) in g.exps.iter().zip(&self.moduli) {
            if n != 0 && (e < 0 || e >= n as i128) {
                return Err(Error::Precondition(
                    "element does not belong to this context (exponent out of range)".into(),
                ));
            }
        }
        Ok(())
    }

    fn free_ctx(&self) -> Result<&FreeCtx> {
        let slot = self
            .free
            .get_or_init(|| FreeCtx::new(self.basis.clone()).map(Box::new));
        match slot {
            Ok(f) => Ok(f),
            Err(e) => Err(e.clone()),
        }
    }

    fn to_bigints(g: &GroupElement) -> Vec<BigInt> {
        g.exps.iter().map(|&e| BigInt::from(e)).collect()
    }

    fn reduce_bigints(&self, raw: Vec<BigInt>) -> Result<Vec<i128>> {
        let mut exps = Vec::with_capacity(raw.len());
        for (e, &n) in raw.into_iter().zip(&self.moduli) {
            if n == 0 {
                let v = e.to_i128().ok_or_else(|| {
                    Error::ResourceCap("normal-form exponent overflows the supported range".into())
                })?;
                exps.push(v);
            } else {
                let m = e.mod_floor(&BigInt::from(n));
                exps.push(m.to_i128().expect("reduced exponent fits"));
            }
        }
        Ok(exps)
    }

    /// Normal form of a word in the generators.
    pub fn collect(&self, word: &GeneratorWord) -> Result<GroupElement> {
        let q = self.basis.generator_count();
        for &(k, _) in word.letters() {
            if k > q {
                return Err(Error::Domain(format!(
                    "word uses generator g{k} but the context has {q} generators"
                )));
            }
        }
        let f = self.free_ctx()?;
        let letters: Vec<(usize, BigInt)> = word
            .letters()
            .iter()
            .map(|&(k, e)| ((k - 1) as usize, BigInt::from(e)))
            .collect();
        let exps = self.reduce_bigints(f.extract(&f.word_series(&letters)))?;
        Ok(GroupElement { exps })
    }

    /// Expansion of the commutator of basis entries `a > b` as a reduced
    /// normal-form word (empty when it is the identity). Cached.
    fn pair_entry(&self, a: usize, b: usize) -> Result<Arc<Vec<(usize, u64)>>> {
        debug_assert!(a > b);
        if let Some(hit) = self.pair_cache.read().unwrap().get(&(a, b)) {
            return Ok(hit.clone());
        }
        let wsum = self.basis.weight(a) + self.basis.weight(b);
        let entry: Vec<(usize, u64)> = if wsum > self.basis.max_weight() {
            // Commutators of total weight beyond the class vanish.
            Vec::new()
        } else if let Some(idx) = self.basis.pair_index(a, b) {
            if self.moduli[idx] == 1 {
                Vec::new()
            } else {
                vec![(idx, 1)]
            }
        } else {
            let f = self.free_ctx()?;
            let raw = f.extract(&f.basis_commutator_series(a, b));
            let reduced = self.reduce_bigints(raw)?;
            let mut word = Vec::new();
            for (i, &e) in reduced.iter().enumerate() {
                if e != 0 {
                    assert!(
                        self.basis.weight(i) >= wsum,
                        "commutator expansion dipped below its weight"
                    );
                    word.push((i, e as u64));
                }
            }
            word
        };
        let entry = Arc::new(entry);
        self.pair_cache
            .write()
            .unwrap()
            .insert((a, b), entry.clone());
        Ok(entry)
    }

    /// Collection over a word of `(basis index, positive exponent)` letters.
    /// Requires every modulus finite.
    fn collect_positive(&self, letters: Vec<(usize, u64)>) -> Result<GroupElement> {
        debug_assert!(self.all_finite);
        let class = self.basis.max_weight();
        let mut w: Vec<(usize, u64)> = Vec::with_capacity(letters.len() + 8);
        for (i, e) in letters {
            let n = self.moduli[i] as u128;
            let e = (e as u128 % n) as u64;
            if e != 0 {
                w.push((i, e));
            }
        }
        let mut pos = 0usize;
        let mut steps: u64 = 0;
        while pos + 1 < w.len() {
            let (a, ea) = w[pos];
            let (b, eb) = w[pos + 1];
            if a < b {
                pos += 1;
                continue;
            }
            steps += 1;
            if steps > COLLECT_STEP_CAP {
                return Err(Error::ResourceCap(format!(
                    "collection exceeded {COLLECT_STEP_CAP} rewrite steps"
                )));
            }
            if a == b {
                let n = self.moduli[a] as u128;
                let e = ((ea as u128 + eb as u128) % n) as u64;
                if e == 0 {
                    w.drain(pos..pos + 2);
                } else {
                    w[pos].1 = e;
                    w.remove(pos + 1);
                }
            } else if self.basis.weight(a) + self.basis.weight(b) > class {
                // The two letters commute outright; swap without a lookup.
                w[pos] = (b, eb);
                w[pos + 1] = (a, ea);
            } else {
                let k = self.pair_entry(a, b)?;
                if k.is_empty() {
                    w[pos] = (b, eb);
                    w[pos + 1] = (a, ea);
                } else {
                    // u_a^ea u_b^eb = u_a^(ea-1) u_b u_a [u_a,u_b] u_b^(eb-1)
                    let mut repl: Vec<(usize, u64)> = Vec::with_capacity(4 + k.len());
                    if ea > 1 {
                        repl.push((a, ea - 1));
                    }
                    repl.push((b, 1));
                    repl.push((a, 1));
                    repl.extend(k.iter().copied());
                    if eb > 1 {
                        repl.push((b, eb - 1));
                    }
                    w.splice(pos..pos + 2, repl);
                }
            }
            pos = pos.saturating_sub(1);
        }
        let mut exps = vec![0i128; self.basis.len()];
        for (i, e) in w {
            exps[i] = e as i128;
        }
        Ok(GroupElement { exps })
    }

    fn letters_of(&self, g: &GroupElement) -> Vec<(usize, u64)> {
        g.exps
            .iter()
            .enumerate()
            .filter(|&(_, &e)| e != 0)
            .map(|(i, &e)| (i, e as u64))
            .collect()
    }

    /// Product through the series embedding; works in every context.
    fn multiply_series(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        let f = self.free_ctx()?;
        let s = f
            .sctx()
            .mul(&f.lift(&Self::to_bigints(a)), &f.lift(&Self::to_bigints(b)));
        Ok(GroupElement {
            exps: self.reduce_bigints(f.extract(&s))?,
        })
    }

    pub fn multiply(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.check_element(a)?;
        self.check_element(b)?;
        if self.all_finite {
            let mut letters = self.letters_of(a);
            letters.extend(self.letters_of(b));
            self.collect_positive(letters)
        } else {
            self.multiply_series(a, b)
        }
    }

    pub fn inverse(&self, g: &GroupElement) -> Result<GroupElement> {
        self.check_element(g)?;
        if self.all_finite {
            // g = u1^m1 ... uk^mk, so g^-1 = uk^(Nk-mk) ... u1^(N1-m1).
            let letters: Vec<(usize, u64)> = g
                .exps
                .iter()
                .enumerate()
                .rev()
                .filter(|&(_, &e)| e != 0)
                .map(|(i, &e)| (i, self.moduli[i] - e as u64))
                .collect();
            self.collect_positive(letters)
        } else {
            let f = self.free_ctx()?;
            let s = f.sctx().inv(&f.lift(&Self::to_bigints(g)));
            Ok(GroupElement {
                exps: self.reduce_bigints(f.extract(&s))?,
            })
        }
    }

    /// `[g, h] = g^-1 h^-1 g h`.
    pub fn commutator(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        let left = self.multiply(&self.inverse(g)?, &self.inverse(h)?)?;
        let right = self.multiply(g, h)?;
        self.multiply(&left, &right)
    }

    pub fn pow(&self, g: &GroupElement, e: i64) -> Result<GroupElement> {
        self.check_element(g)?;
        if e == 0 {
            return Ok(self.identity());
        }
        let (base, mag) = if e < 0 {
            (self.inverse(g)?, (e as i128).unsigned_abs())
        } else {
            (g.clone(), e as u128)
        };
        let mut acc = self.identity();
        for i in (0..128 - mag.leading_zeros()).rev() {
            acc = self.multiply(&acc, &acc)?;
            if (mag >> i) & 1 == 1 {
                acc = self.multiply(&acc, &base)?;
            }
        }
        Ok(acc)
    }

    /// Multiplicative order, by iteration. Finite contexts only.
    pub fn element_order(&self, g: &GroupElement) -> Result<u64> {
        self.check_element(g)?;
        if !self.all_finite {
            return Err(Error::Unsupported(
                "element orders need every factor order finite".into(),
            ));
        }
        let id = self.identity();
        let mut acc = g.clone();
        let mut ord: u64 = 1;
        while acc != id {
            acc = self.multiply(&acc, g)?;
            ord += 1;
            if ord > self.caps.subgroup as u64 {
                return Err(Error::ResourceCap(format!(
                    "element order exceeds {}",
                    self.caps.subgroup
                )));
            }
        }
        Ok(ord)
    }

    /// All elements whose normal form is supported on basis entries of
    /// weight at least `k`: the `k`th term of the lower central series, for
    /// `k` in `1..=class+1`. Finite contexts only. Output is sorted.
    pub fn gamma_subgroup(&self, k: u32) -> Result<Vec<GroupElement>> {
        if k == 0 {
            return Err(Error::Domain("weight threshold starts at 1".into()));
        }
        let class = self.basis.max_weight();
        if k > class + 1 {
            return Err(Error::Domain(format!(
                "weight threshold {k} exceeds class {class} plus 1"
            )));
        }
        if !self.all_finite {
            return Err(Error::Unsupported(
                "subgroup enumeration needs every factor order finite".into(),
            ));
        }
        let gens: Vec<usize> = if k > class {
            Vec::new()
        } else {
            (self.basis.weight_range(k).start..self.basis.len()).collect()
        };
        let mut expected: u128 = 1;
        for &i in &gens {
            expected = expected.saturating_mul(self.moduli[i] as u128);
            if expected > self.caps.subgroup as u128 {
                return Err(Error::ResourceCap(format!(
                    "subgroup would have {expected} or more elements, cap is {}",
                    self.caps.subgroup
                )));
            }
        }
        let gen_elts: Vec<GroupElement> = gens
            .iter()
            .map(|&i| self.basis_element(i))
            .collect::<Result<_>>()?;
        let mut seen: HashSet<GroupElement> = HashSet::new();
        let mut queue: VecDeque<GroupElement> = VecDeque::new();
        let id = self.identity();
        seen.insert(id.clone());
        queue.push_back(id);
        while let Some(x) = queue.pop_front() {
            for ge in &gen_elts {
                let y = self.multiply(&x, ge)?;
                if seen.contains(&y) {
                    continue;
                }
                if seen.len() >= self.caps.subgroup {
                    return Err(Error::ResourceCap(format!(
                        "subgroup enumeration exceeded the cap of {}",
                        self.caps.subgroup
                    )));
                }
                seen.insert(y.clone());
                queue.push_back(y);
            }
        }
        // Right-multiplication closure makes this the full subgroup; its
        // size and inverse-closure are genuine consistency checks, and they
        // can fail when the prime condition was bypassed.
        if seen.len() as u128 != expected {
            return Err(Error::Precondition(format!(
                "enumerated {} elements where {expected} normal forms exist; \
                 the context is outside the supported hypotheses",
                seen.len()
            )));
        }
        for g in &seen {
            if !seen.contains(&self.inverse(g)?) {
                return Err(Error::Precondition(
                    "enumerated subgroup is not inverse-closed; the context is \
                     outside the supported hypotheses"
                        .into(),
                ));
            }
        }
        let mut out: Vec<GroupElement> = seen.into_iter().collect();
        out.sort_unstable();
        Ok(out)
    }

    /// Scan a finite set: closure under products (error if it fails),
    /// commutativity of every pair, and, when abelian, the order profile.
    pub fn abelian_fingerprint(&self, elements: &[GroupElement]) -> Result<FingerprintReport> {
        for g in elements {
            self.check_element(g)?;
        }
        let set: HashSet<&GroupElement> = elements.iter().collect();
        if set.len() != elements.len() {
            return Err(Error::Domain(
                "fingerprint input contains duplicate elements".into(),
            ));
        }
        for i in 0..elements.len() {
            for j in i..elements.len() {
                let p = self.multiply(&elements[i], &elements[j])?;
                if !set.contains(&p) {
                    return Err(Error::Domain(format!(
                        "input set is not closed under multiplication \
                         (product of elements {i} and {j} falls outside)"
                    )));
                }
                if i != j && self.multiply(&elements[j], &elements[i])? != p {
                    return Ok(FingerprintReport {
                        abelian: false,
                        witness: Some((i, j)),
                        order_counts: BTreeMap::new(),
                    });
                }
            }
        }
        let mut order_counts = BTreeMap::new();
        for g in elements {
            *order_counts.entry(self.element_order(g)?).or_insert(0u64) += 1;
        }
        Ok(FingerprintReport {
            abelian: true,
            witness: None,
            order_counts,
        })
    }

    /// Render an element as a product of basis powers, `1` for the identity.
    pub fn render_element(&self, g: &GroupElement) -> String {
        let mut parts: Vec<String> = Vec::new();
        for (i, &e) in g.exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let base = GeneratorStyled(&self.basis.tree(i)).to_string();
            if e == 1 {
                parts.push(base);
            } else {
                parts.push(format!("{base}^{e}"));
            }
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join(" ")
        }
    }
}

/// How many elements of each order a finite abelian group has, computed from
/// its structure: the count of solutions of `x^m = 1` is multiplicative over
/// the cyclic factors, and exact order counts follow by inclusion-exclusion
/// over the divisors of the exponent.
pub fn analytic_order_counts(s: &AbelianStructure) -> Result<BTreeMap<u64, u64>> {
    if s.free_rank() > 0 {
        return Err(Error::Unsupported(
            "infinite groups have no finite order profile".into(),
        ));
    }
    let overflow = || Error::ResourceCap("order profile overflows".into());
    let torsion = s.torsion();
    let mut pmax: BTreeMap<u64, u32> = BTreeMap::new();
    for &pk in torsion.keys() {
        let f = factorize(pk);
        assert_eq!(f.len(), 1, "torsion keys are prime powers");
        let (p, e) = f[0];
        let cur = pmax.entry(p).or_insert(0);
        *cur = (*cur).max(e);
    }
    let mut divisors: Vec<u64> = vec![1];
    for (&p, &emax) in &pmax {
        let mut next = Vec::with_capacity(divisors.len() * (emax as usize + 1));
        for &d in &divisors {
            let mut cur = d;
            next.push(cur);
            for _ in 0..emax {
                cur = cur.checked_mul(p).ok_or_else(overflow)?;
                next.push(cur);
            }
        }
        divisors = next;
    }
    divisors.sort_unstable();
    let solutions = |m: u64| -> Result<u64> {
        let mut acc: u64 = 1;
        for (&pk, &mult) in torsion {
            let g = m.gcd(&pk);
            for _ in 0..mult {
                acc = acc.checked_mul(g).ok_or_else(overflow)?;
            }
        }
        Ok(acc)
    };
    let mut counts = BTreeMap::new();
    let mut total: u64 = 0;
    for &d in &divisors {
        let mut acc: i128 = 0;
        for &e in &divisors {
            if d % e == 0 {
                acc += i128::from(mobius(d / e)?) * solutions(e)? as i128;
            }
        }
        assert!(acc >= 0, "order count must be non-negative");
        if acc > 0 {
            let count = u64::try_from(acc).map_err(|_| overflow())?;
            counts.insert(d, count);
            total = total.checked_add(count).ok_or_else(overflow)?;
        }
    }
    let exponent = *divisors.last().expect("at least the divisor 1");
    assert_eq!(
        total,
        solutions(exponent)?,
        "order profile must add up to the group order"
    );
    Ok(counts)
}

/// Check a predicted multiplier against a brute-force enumeration: build the
/// product of class `n + c` on the same orders, enumerate the terms of its
/// lower central series from weight `max(n, c) + 1` up, fingerprint that
/// subgroup, and compare with the structure the counting formula predicts.
pub fn verify_multiplier(
    spec: &ProductSpec,
    c: u32,
    caps: &Caps,
    force: bool,
) -> Result<VerifyReport> {
    if c == 0 {
        return Err(Error::Domain("c must be >= 1".into()));
    }
    if !force {
        require_valid(spec, c)?;
    }
    if spec.orders().as_slice().iter().any(|&o| o == 0) {
        return Err(Error::Unsupported(
            "verification enumerates subgroups; every factor order must be finite".into(),
        ));
    }
    let n = spec.class();
    let ambient_class = n
        .checked_add(c)
        .ok_or_else(|| Error::Domain("class overflow".into()))?;
    let ambient = ProductSpec::new(
        ambient_class,
        CyclicOrders::new(spec.orders().as_slice().to_vec())?,
    )?;
    let ctx = if force {
        GroupContext::build_unchecked(&ambient, caps)?
    } else {
        GroupContext::build(&ambient, caps)?
    };
    let weight_threshold = n.max(c) + 1;
    let subgroup = ctx.gamma_subgroup(weight_threshold)?;
    let fp = ctx.abelian_fingerprint(&subgroup)?;
    let predicted = if force {
        multiplier_general_unchecked(spec, c, caps)?
    } else {
        multiplier_general(spec, c, caps)?
    };
    let predicted_counts = analytic_order_counts(&predicted)?;
    let predicted_size: u64 = predicted_counts.values().sum();
    let matched = fp.abelian
        && fp.order_counts == predicted_counts
        && subgroup.len() as u64 == predicted_size;
    Ok(VerifyReport {
        predicted,
        predicted_counts,
        observed_counts: fp.order_counts,
        subgroup_size: subgroup.len() as u64,
        ambient_class,
        weight_threshold,
        abelian: fp.abelian,
        matched,
    })
}
