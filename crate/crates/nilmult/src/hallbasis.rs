//! Basic commutators on a free generating set, enumerated in a fixed total
//! order: weight ascending; within weight 1 by generator index; within any
//! higher weight lexicographically by (index of left part, index of right
//! part). A pair `[u, v]` is basic when `u` and `v` are basic, `u` comes
//! after `v` in the order, and, if `u = [x, y]`, also `v >= y`.
//!
//! Under that convention every weight-2 entry reads `[x_j, x_i]` with
//! `j > i`, e.g. `[x2,x1]`. The enumeration is prefix-stable: the table for
//! max weight `W` begins with the table for `W - 1`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numtheory::gcd_zero_aware;

/// Default ceiling on how many table entries an enumeration may produce.
pub const DEFAULT_BASIS_CAP: usize = 1_000_000;

/// A basic commutator as an explicit binary tree. Generator indices are
/// 1-based, matching the rendered names `x1, x2, ...`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BasicCommutator {
    Generator(u32),
    Pair(Box<BasicCommutator>, Box<BasicCommutator>),
}

impl BasicCommutator {
    pub fn pair(left: BasicCommutator, right: BasicCommutator) -> Self {
        BasicCommutator::Pair(Box::new(left), Box::new(right))
    }

    /// Total number of generator occurrences, counted with multiplicity.
    pub fn weight(&self) -> u32 {
        match self {
            BasicCommutator::Generator(_) => 1,
            BasicCommutator::Pair(l, r) => l.weight() + r.weight(),
        }
    }

    fn collect_generators(&self, into: &mut BTreeSet<u32>) {
        match self {
            BasicCommutator::Generator(k) => {
                into.insert(*k);
            }
            BasicCommutator::Pair(l, r) => {
                l.collect_generators(into);
                r.collect_generators(into);
            }
        }
    }

    fn fmt_with_prefix(&self, prefix: char, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasicCommutator::Generator(k) => write!(f, "{prefix}{k}"),
            BasicCommutator::Pair(l, r) => {
                f.write_str("[")?;
                l.fmt_with_prefix(prefix, f)?;
                f.write_str(",")?;
                r.fmt_with_prefix(prefix, f)?;
                f.write_str("]")
            }
        }
    }
}

/// The set of distinct generator indices occurring in `u`.
pub fn occurring_generators(u: &BasicCommutator) -> BTreeSet<u32> {
    let mut set = BTreeSet::new();
    u.collect_generators(&mut set);
    set
}

/// Canonical rendering: leaves as `x1`, pairs as `[u,v]`, no whitespace.
impl fmt::Display for BasicCommutator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with_prefix('x', f)
    }
}

/// Same tree shapes rendered with `g`-leaves, the alphabet of generator
/// words. Used when printing group elements.
pub(crate) struct GeneratorStyled<'a>(pub &'a BasicCommutator);

impl fmt::Display for GeneratorStyled<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt_with_prefix('g', f)
    }
}

impl FromStr for BasicCommutator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bytes = s.as_bytes();
        let (tree, used) = parse_commutator(bytes, 0)?;
        if used != bytes.len() {
            return Err(Error::Domain(format!(
                "trailing input after commutator at byte {used} in {s:?}"
            )));
        }
        Ok(tree)
    }
}

fn parse_commutator(bytes: &[u8], at: usize) -> Result<(BasicCommutator, usize)> {
    match bytes.get(at) {
        Some(b'x') => {
            let mut end = at + 1;
            while end < bytes.len() && bytes[end].is_ascii_digit() {
                end += 1;
            }
            if end == at + 1 {
                return Err(Error::Domain(format!(
                    "expected digits after 'x' at byte {at}"
                )));
            }
            let text = std::str::from_utf8(&bytes[at + 1..end]).expect("ascii digits");
            let k: u32 = text
                .parse()
                .map_err(|_| Error::Domain(format!("generator index {text:?} out of range")))?;
            if k == 0 {
                return Err(Error::Domain("generator indices start at 1".into()));
            }
            Ok((BasicCommutator::Generator(k), end))
        }
        Some(b'[') => {
            let (left, after_left) = parse_commutator(bytes, at + 1)?;
            if bytes.get(after_left) != Some(&b',') {
                return Err(Error::Domain(format!("expected ',' at byte {after_left}")));
            }
            let (right, after_right) = parse_commutator(bytes, after_left + 1)?;
            if bytes.get(after_right) != Some(&b']') {
                return Err(Error::Domain(format!("expected ']' at byte {after_right}")));
            }
            Ok((BasicCommutator::pair(left, right), after_right + 1))
        }
        other => Err(Error::Domain(format!(
            "expected 'x' or '[' at byte {at}, found {other:?}"
        ))),
    }
}

/// One table entry, stored arena-style: pairs point at earlier entries.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Node {
    Generator(u32),
    Pair { left: usize, right: usize },
}

#[derive(Debug, Clone)]
struct Entry {
    node: Node,
    weight: u32,
    /// Bitmask of occurring generators; bit k-1 stands for generator k.
    occ: u64,
}

/// All basic commutators on `q` generators up to a weight bound, in the
/// fixed total order. Index into the table *is* the order.
#[derive(Debug, Clone)]
pub struct BasisTable {
    q: u32,
    max_weight: u32,
    entries: Vec<Entry>,
    /// `weight_start[w]` = index of the first entry of weight `w` (1-based
    /// weights; `weight_start[0] = 0` unused; last slot = total count).
    weight_start: Vec<usize>,
}

impl BasisTable {
    /// Enumerate every basic commutator of weight `1..=max_weight`, failing
    /// with a resource error once more than `cap` entries would exist.
    pub fn enumerate(q: u32, max_weight: u32, cap: usize) -> Result<BasisTable> {
        if max_weight == 0 {
            return Err(Error::Domain("max_weight must be >= 1".into()));
        }
        if q > 64 {
            return Err(Error::ResourceCap(format!(
                "generator count {q} exceeds the supported maximum of 64"
            )));
        }
        let mut entries: Vec<Entry> = Vec::new();
        let mut weight_start = vec![0usize; max_weight as usize + 2];
        for k in 1..=q {
            if entries.len() >= cap {
                return Err(basis_cap_error(q, max_weight, cap));
            }
            entries.push(Entry {
                node: Node::Generator(k),
                weight: 1,
                occ: 1u64 << (k - 1),
            });
        }
        weight_start[1] = 0;
        weight_start[2.min(max_weight as usize + 1)] = entries.len();

        for w in 2..=max_weight {
            let mut candidates: Vec<(usize, usize)> = Vec::new();
            for wl in 1..w {
                let wr = w - wl;
                let (ls, le) = (weight_start[wl as usize], weight_start[wl as usize + 1]);
                let (rs, re) = (weight_start[wr as usize], weight_start[wr as usize + 1]);
                for left in ls..le {
                    for right in rs..re {
                        if right >= left {
                            continue;
                        }
                        let hall_ok = match entries[left].node {
                            Node::Generator(_) => true,
                            Node::Pair { right: y, .. } => right >= y,
                        };
                        if hall_ok {
                            candidates.push((left, right));
                            if entries.len() + candidates.len() > cap {
                                return Err(basis_cap_error(q, max_weight, cap));
                            }
                        }
                    }
                }
            }
            candidates.sort_unstable();
            for (left, right) in candidates {
                entries.push(Entry {
                    node: Node::Pair { left, right },
                    weight: w,
                    occ: entries[left].occ | entries[right].occ,
                });
            }
            weight_start[w as usize + 1] = entries.len();
        }
        Ok(BasisTable {
            q,
            max_weight,
            entries,
            weight_start,
        })
    }

    pub fn generator_count(&self) -> u32 {
        self.q
    }

    pub fn max_weight(&self) -> u32 {
        self.max_weight
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn weight(&self, i: usize) -> u32 {
        self.entries[i].weight
    }

    /// Index range of the entries of weight `w`.
    pub fn weight_range(&self, w: u32) -> std::ops::Range<usize> {
        if w == 0 || w > self.max_weight {
            return 0..0;
        }
        self.weight_start[w as usize]..self.weight_start[w as usize + 1]
    }

    /// For a pair entry, the indices of its parts.
    pub fn parts(&self, i: usize) -> Option<(usize, usize)> {
        match self.entries[i].node {
            Node::Generator(_) => None,
            Node::Pair { left, right } => Some((left, right)),
        }
    }

    /// Occurrence bitmask of entry `i`; bit `k-1` stands for generator `k`.
    pub fn occurrence_mask(&self, i: usize) -> u64 {
        self.entries[i].occ
    }

    /// Materialize entry `i` as an owned tree.
    pub fn tree(&self, i: usize) -> BasicCommutator {
        match self.entries[i].node {
            Node::Generator(k) => BasicCommutator::Generator(k),
            Node::Pair { left, right } => BasicCommutator::pair(self.tree(left), self.tree(right)),
        }
    }

    /// Canonical rendering of entry `i` (same as `self.tree(i).to_string()`).
    pub fn render(&self, i: usize) -> String {
        self.tree(i).to_string()
    }

    /// Index of the basic pair `[left, right]` when that pair is basic.
    pub fn pair_index(&self, left: usize, right: usize) -> Option<usize> {
        let w = self.entries[left].weight + self.entries[right].weight;
        if w > self.max_weight || right >= left {
            return None;
        }
        match self.entries[left].node {
            Node::Pair { right: y, .. } if right < y => return None,
            _ => {}
        }
        let range = self.weight_range(w);
        let slice = &self.entries[range.clone()];
        slice
            .binary_search_by_key(&(left, right), |e| match e.node {
                Node::Pair { left, right } => (left, right),
                Node::Generator(_) => (usize::MAX, usize::MAX),
            })
            .ok()
            .map(|off| range.start + off)
    }

    /// Check the defining conditions of entry `i` directly on the stored
    /// structure (used by tests as an internal consistency probe).
    pub fn satisfies_hall_condition(&self, i: usize) -> bool {
        match self.entries[i].node {
            Node::Generator(k) => k >= 1 && k <= self.q,
            Node::Pair { left, right } => {
                if left <= right {
                    return false;
                }
                match self.entries[left].node {
                    Node::Generator(_) => true,
                    Node::Pair { right: y, .. } => right >= y,
                }
            }
        }
    }

    /// Per-context cyclic modulus of entry `i`: gcd of the orders of the
    /// generators occurring in it, with 0 meaning "no constraint".
    pub fn modulus(&self, i: usize, orders: &[u64]) -> Result<u64> {
        let mask = self.entries[i].occ;
        let mut involved = Vec::new();
        for k in 0..self.q {
            if mask & (1u64 << k) != 0 {
                let order = orders.get(k as usize).ok_or_else(|| {
                    Error::Domain(format!(
                        "entry mentions generator {} but only {} orders were given",
                        k + 1,
                        orders.len()
                    ))
                })?;
                involved.push(*order);
            }
        }
        gcd_zero_aware(&involved)
    }
}

fn basis_cap_error(q: u32, max_weight: u32, cap: usize) -> Error {
    Error::ResourceCap(format!(
        "basic-commutator table for q={q}, max weight {max_weight} exceeds cap {cap}"
    ))
}

/// Gcd modulus of an arbitrary basic commutator against a list of generator
/// orders (0 = infinite). Every occurring generator must have an order.
pub fn modulus_of(u: &BasicCommutator, orders: &[u64]) -> Result<u64> {
    let gens = occurring_generators(u);
    let mut involved = Vec::with_capacity(gens.len());
    for k in gens {
        let order = orders.get(k as usize - 1).ok_or_else(|| {
            Error::Domain(format!(
                "commutator mentions generator {k} but only {} orders were given",
                orders.len()
            ))
        })?;
        involved.push(*order);
    }
    gcd_zero_aware(&involved)
}

/// How many basic commutators on `q` generators, of weight in
/// `lo..=hi`, involve generator `q` itself.
pub fn count_involving_last(q: u32, lo: u32, hi: u32, cap: usize) -> Result<u64> {
    if lo == 0 || hi < lo {
        return Err(Error::Domain(format!("bad weight window {lo}..={hi}")));
    }
    if q == 0 {
        return Ok(0);
    }
    let table = BasisTable::enumerate(q, hi, cap)?;
    let bit = 1u64 << (q - 1);
    let mut count = 0u64;
    for w in lo..=hi {
        for i in table.weight_range(w) {
            if table.occurrence_mask(i) & bit != 0 {
                count += 1;
            }
        }
    }
    Ok(count)
}
