//! Free Lie algebra over the integers on generators X_1..X_m: Lyndon-word
//! Hall bases, Witt ranks, bracket rewriting to basis form, the tensor space
//! L_1 ⊗ L_{n+1}, the bracket map and its kernel lattice D_n.

use crate::linalg::{self, int, Int, Mat, SparseMat};
use crate::trees::RootedTree;
use crate::{Error, Result};
use num_traits::Zero;
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::{Arc, Mutex, OnceLock};

/// Witt rank of the degree-n part: (1/n) Σ_{d|n} M(d) m^{n/d}.
pub fn witt_rank(m: u32, n: usize) -> Int {
    assert!(n >= 1);
    let mut sum = Int::zero();
    for d in 1..=n {
        if n % d == 0 {
            let mu = mobius(d as u64);
            if mu != 0 {
                sum += int(mu) * Int::from(m).pow((n / d) as u32);
            }
        }
    }
    let (q, r) = num_integer::Integer::div_rem(&sum, &int(n as i64));
    debug_assert!(r.is_zero());
    q
}

fn mobius(n: u64) -> i64 {
    let mut n = n;
    let mut factors = 0;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            factors += 1;
        }
        p += 1;
    }
    if n > 1 {
        factors += 1;
    }
    if factors % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Lyndon words of length n over the alphabet 1..=m, lexicographically
/// ordered (Duval's generation).
pub fn lyndon_words(m: u32, n: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    if m == 0 || n == 0 {
        return out;
    }
    let mut w = vec![1u32];
    loop {
        if w.len() == n {
            out.push(w.clone());
        }
        // extend periodically to length n, then increment
        let len = w.len();
        while w.len() < n {
            let c = w[w.len() % len];
            w.push(c);
        }
        while let Some(&last) = w.last() {
            if last == m {
                w.pop();
            } else {
                break;
            }
        }
        if w.is_empty() {
            break;
        }
        *w.last_mut().unwrap() += 1;
    }
    out
}

/// Standard (right) factorization bracketing of a Lyndon word: the split is
/// at the longest proper Lyndon suffix.
pub fn standard_bracketing(w: &[u32]) -> RootedTree {
    if w.len() == 1 {
        return RootedTree::leaf(w[0]);
    }
    let split = longest_lyndon_suffix_start(w);
    RootedTree::node(standard_bracketing(&w[..split]), standard_bracketing(&w[split..]))
}

fn is_lyndon(w: &[u32]) -> bool {
    for k in 1..w.len() {
        if w[k..] <= *w {
            return false;
        }
    }
    !w.is_empty()
}

fn longest_lyndon_suffix_start(w: &[u32]) -> usize {
    for k in 1..w.len() {
        if is_lyndon(&w[k..]) {
            return k;
        }
    }
    unreachable!("every word has a Lyndon final letter")
}

/// Lyndon basis of the degree-n homogeneous part of the free Lie algebra.
pub struct HallBasis {
    pub m: u32,
    pub degree: usize,
    pub words: Vec<Vec<u32>>,
    pub brackets: Vec<RootedTree>,
    index: HashMap<Vec<u32>, usize>,
}

impl HallBasis {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index_of(&self, word: &[u32]) -> Option<usize> {
        self.index.get(word).copied()
    }
}

static BASIS_CACHE: OnceLock<Mutex<HashMap<(u32, usize), Arc<HallBasis>>>> = OnceLock::new();

/// Cached Lyndon basis for (m, degree); `cap` bounds the basis size.
pub fn hall_basis(m: u32, degree: usize, cap: usize) -> Result<Arc<HallBasis>> {
    assert!(degree >= 1);
    let projected = witt_rank(m, degree);
    if projected > int(cap as i64) {
        return Err(Error::Resource(format!(
            "basis of degree {degree} over {m} generators has {projected} elements (cap {cap})"
        )));
    }
    let cache = BASIS_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    if let Some(b) = guard.get(&(m, degree)) {
        return Ok(b.clone());
    }
    let words = lyndon_words(m, degree);
    debug_assert_eq!(int(words.len() as i64), projected);
    let brackets = words.iter().map(|w| standard_bracketing(w)).collect();
    let index = words.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
    let basis = Arc::new(HallBasis { m, degree, words, brackets, index });
    guard.insert((m, degree), basis.clone());
    Ok(basis)
}

/// Degree-homogeneous element in Lyndon-basis coordinates.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LieElement {
    pub m: u32,
    pub degree: usize,
    coords: BTreeMap<usize, Int>,
}

impl LieElement {
    pub fn zero(m: u32, degree: usize) -> Self {
        LieElement { m, degree, coords: BTreeMap::new() }
    }

    pub fn basis(m: u32, degree: usize, idx: usize) -> Self {
        let mut coords = BTreeMap::new();
        coords.insert(idx, int(1));
        LieElement { m, degree, coords }
    }

    pub fn generator(m: u32, i: u32) -> Self {
        // degree-1 basis order is the label order
        LieElement::basis(m, 1, (i - 1) as usize)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &BTreeMap<usize, Int> {
        &self.coords
    }

    pub fn add_term(&mut self, idx: usize, c: Int) {
        if c.is_zero() {
            return;
        }
        let entry = self.coords.entry(idx).or_insert_with(Int::zero);
        *entry += c;
        if entry.is_zero() {
            self.coords.remove(&idx);
        }
    }

    pub fn add(&self, other: &LieElement) -> LieElement {
        assert_eq!(self.degree, other.degree);
        let mut out = self.clone();
        for (i, c) in &other.coords {
            out.add_term(*i, c.clone());
        }
        out
    }

    pub fn scale(&self, k: &Int) -> LieElement {
        if k.is_zero() {
            return LieElement::zero(self.m, self.degree);
        }
        let mut out = self.clone();
        for c in out.coords.values_mut() {
            *c *= k;
        }
        out
    }

    pub fn neg(&self) -> LieElement {
        self.scale(&int(-1))
    }

    pub fn sub(&self, other: &LieElement) -> LieElement {
        self.add(&other.neg())
    }

    pub fn dense(&self, basis_len: usize) -> Vec<Int> {
        let mut v = vec![Int::zero(); basis_len];
        for (i, c) in &self.coords {
            v[*i] = c.clone();
        }
        v
    }
}

type BracketKey = (u32, Vec<u32>, Vec<u32>);
static BRACKET_CACHE: OnceLock<Mutex<HashMap<BracketKey, LieElement>>> = OnceLock::new();

/// [σ(u), σ(v)] for Lyndon words u, v, rewritten into the Lyndon basis.
fn bracket_words(m: u32, u: &[u32], v: &[u32], cap: usize) -> Result<LieElement> {
    let degree = u.len() + v.len();
    if u == v {
        return Ok(LieElement::zero(m, degree));
    }
    if u > v {
        return Ok(bracket_words(m, v, u, cap)?.neg());
    }
    let key = (m, u.to_vec(), v.to_vec());
    {
        let cache = BRACKET_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(hit) = cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
    }
    let split = if u.len() > 1 { longest_lyndon_suffix_start(u) } else { 0 };
    let result = if u.len() == 1 || u[split..] >= *v {
        // [σ(u), σ(v)] is itself the standard bracketing of the Lyndon word uv.
        let basis = hall_basis(m, degree, cap)?;
        let mut w = u.to_vec();
        w.extend_from_slice(v);
        let idx = basis
            .index_of(&w)
            .ok_or_else(|| Error::Internal(format!("word {w:?} missing from basis")))?;
        LieElement::basis(m, degree, idx)
    } else {
        // u = u1 u2 standard with u2 < v:
        // [[u1,u2],v] = [u1,[u2,v]] − [u2,[u1,v]]
        let (u1, u2) = u.split_at(split);
        let a = lie_bracket_raw(m, u1, &bracket_words(m, u2, v, cap)?, cap)?;
        let b = lie_bracket_raw(m, u2, &bracket_words(m, u1, v, cap)?, cap)?;
        a.sub(&b)
    };
    let cache = BRACKET_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    cache.lock().unwrap().insert(key, result.clone());
    Ok(result)
}

/// [σ(w), e] for a Lyndon word w and a basis-form element e.
fn lie_bracket_raw(m: u32, w: &[u32], e: &LieElement, cap: usize) -> Result<LieElement> {
    let basis_e = hall_basis(m, e.degree, cap)?;
    let mut out = LieElement::zero(m, w.len() + e.degree);
    for (idx, c) in e.coords() {
        let term = bracket_words(m, w, &basis_e.words[*idx], cap)?;
        for (j, tc) in term.coords() {
            out.add_term(*j, tc.clone() * c);
        }
    }
    Ok(out)
}

/// The Lie bracket [a, b], bilinear, output in Lyndon-basis normal form.
pub fn lie_bracket(a: &LieElement, b: &LieElement, cap: usize) -> Result<LieElement> {
    assert_eq!(a.m, b.m);
    let m = a.m;
    let basis_a = hall_basis(m, a.degree, cap)?;
    let mut out = LieElement::zero(m, a.degree + b.degree);
    for (ia, ca) in a.coords() {
        let part = lie_bracket_raw(m, &basis_a.words[*ia], b, cap)?;
        for (j, c) in part.coords() {
            out.add_term(*j, c.clone() * ca);
        }
    }
    Ok(out)
}

/// Reads a rooted tree of order n as an element of L_{n+1}: leaves become
/// generators, vertices become brackets.
pub fn rooted_to_lie(t: &RootedTree, m: u32, cap: usize) -> Result<LieElement> {
    match t {
        RootedTree::Leaf(l) => Ok(LieElement::generator(m, l.get())),
        RootedTree::Node(l, r) => {
            let a = rooted_to_lie(l, m, cap)?;
            let b = rooted_to_lie(r, m, cap)?;
            lie_bracket(&a, &b, cap)
        }
    }
}

/// Element of L_1 ⊗ L_{n+1}; coordinates over {X_i ⊗ h}.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TensorElement {
    pub m: u32,
    /// the order n (second factor has degree n+1)
    pub degree: usize,
    coords: BTreeMap<(u32, usize), Int>,
}

impl TensorElement {
    pub fn zero(m: u32, degree: usize) -> Self {
        TensorElement { m, degree, coords: BTreeMap::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &BTreeMap<(u32, usize), Int> {
        &self.coords
    }

    pub fn add_term(&mut self, i: u32, idx: usize, c: Int) {
        if c.is_zero() {
            return;
        }
        let entry = self.coords.entry((i, idx)).or_insert_with(Int::zero);
        *entry += c;
        if entry.is_zero() {
            self.coords.remove(&(i, idx));
        }
    }

    /// Adds X_i ⊗ e (e of degree n+1) scaled by k.
    pub fn add_tensor(&mut self, i: u32, e: &LieElement, k: &Int) {
        debug_assert_eq!(e.degree, self.degree + 1);
        for (idx, c) in e.coords() {
            self.add_term(i, *idx, c.clone() * k);
        }
    }

    pub fn add(&self, other: &TensorElement) -> TensorElement {
        assert_eq!(self.degree, other.degree);
        let mut out = self.clone();
        for ((i, idx), c) in &other.coords {
            out.add_term(*i, *idx, c.clone());
        }
        out
    }

    pub fn scale(&self, k: &Int) -> TensorElement {
        if k.is_zero() {
            return TensorElement::zero(self.m, self.degree);
        }
        let mut out = self.clone();
        for c in out.coords.values_mut() {
            *c *= k;
        }
        out
    }

    pub fn sub(&self, other: &TensorElement) -> TensorElement {
        self.add(&other.scale(&int(-1)))
    }

    /// Exact halving; errors if any coefficient is odd.
    pub fn halve(&self) -> Result<TensorElement> {
        let mut out = TensorElement::zero(self.m, self.degree);
        for ((i, idx), c) in &self.coords {
            if c.is_odd() {
                return Err(Error::Internal(format!(
                    "odd coefficient {c} while halving a tensor element"
                )));
            }
            out.add_term(*i, *idx, c / int(2));
        }
        Ok(out)
    }

    /// The Lie-bracket factor paired with X_i.
    pub fn longitude(&self, i: u32) -> LieElement {
        let mut e = LieElement::zero(self.m, self.degree + 1);
        for ((j, idx), c) in &self.coords {
            if *j == i {
                e.add_term(*idx, c.clone());
            }
        }
        e
    }

    /// Flat coordinate vector over (i − 1) * dim + idx.
    pub fn dense(&self, basis_len: usize) -> Vec<Int> {
        let mut v = vec![Int::zero(); self.m as usize * basis_len];
        for ((i, idx), c) in &self.coords {
            v[(*i as usize - 1) * basis_len + idx] = c.clone();
        }
        v
    }
}

trait IsOdd {
    fn is_odd(&self) -> bool;
}

impl IsOdd for Int {
    fn is_odd(&self) -> bool {
        num_integer::Integer::is_odd(self)
    }
}

/// The bracket map L_1 ⊗ L_{n+1} → L_{n+2}: X_i ⊗ h ↦ [X_i, h].
pub fn bracket_map(t: &TensorElement, cap: usize) -> Result<LieElement> {
    let m = t.m;
    let basis = hall_basis(m, t.degree + 1, cap)?;
    let mut out = LieElement::zero(m, t.degree + 2);
    for ((i, idx), c) in t.coords() {
        let term = bracket_words(m, &[*i], &basis.words[*idx], cap)?;
        for (j, tc) in term.coords() {
            out.add_term(*j, tc.clone() * c);
        }
    }
    Ok(out)
}

/// Kernel of the bracket map as a saturated integer lattice with a
/// Hermite-reduced basis; rank m·r_{n+1} − r_{n+2}.
pub struct DnLattice {
    pub m: u32,
    pub n: usize,
    /// (m · r_{n+1}) × rank matrix, columns form the lattice basis
    pub basis: Mat,
}

impl DnLattice {
    pub fn rank(&self) -> usize {
        self.basis.cols
    }
}

/// Computes the kernel lattice of the bracket map at order n.
pub fn dn_lattice(m: u32, n: usize, cap: usize) -> Result<DnLattice> {
    let basis_in = hall_basis(m, n + 1, cap)?;
    let dim_in = m as usize * basis_in.len();
    if dim_in > cap {
        return Err(Error::Resource(format!(
            "tensor space dimension {dim_in} exceeds cap {cap}"
        )));
    }
    let basis_out = hall_basis(m, n + 2, cap)?;
    // rows: L_{n+2} coordinates; cols: (i, h) pairs
    let mut rows: Vec<Vec<(usize, Int)>> = vec![Vec::new(); basis_out.len()];
    let mut j = 0;
    for i in 1..=m {
        for w in &basis_in.words {
            let img = bracket_words(m, &[i], w, cap)?;
            for (r, c) in img.coords() {
                rows[*r].push((j, c.clone()));
            }
            j += 1;
        }
    }
    let mut mat = SparseMat::new(dim_in);
    for row in rows {
        mat.push_row(row);
    }
    let kernel = linalg::kernel_basis(&mat);
    let expect = Int::from(m) * witt_rank(m, n + 1) - witt_rank(m, n + 2);
    if int(kernel.cols as i64) != expect {
        return Err(Error::Internal(format!(
            "kernel rank {} disagrees with m·r_{}−r_{} = {expect}",
            kernel.cols,
            n + 1,
            n + 2
        )));
    }
    Ok(DnLattice { m, n, basis: kernel })
}

/// Coordinates of t in the Hermite basis of D_n, or None when t is not in
/// the kernel of the bracket map.
pub fn dn_membership(t: &TensorElement, d: &DnLattice, cap: usize) -> Result<Option<Vec<Int>>> {
    assert_eq!(t.m, d.m);
    assert_eq!(t.degree, d.n);
    if !bracket_map(t, cap)?.is_zero() {
        return Ok(None);
    }
    let basis_in = hall_basis(d.m, d.n + 1, cap)?;
    let target = t.dense(basis_in.len());
    Ok(linalg::solve_columns(&d.basis, &target))
}

// ---------------------------------------------------------------------------
// JSON serialization: {"degree": n, "terms": [{"coeff": c, "bracket": s}]}
// Lie terms use the basis bracket text; tensor terms use "(i,h)" with the
// first factor a bare label. Free-form brackets normalize on load.
// ---------------------------------------------------------------------------

fn coeff_json(c: &Int) -> serde_json::Value {
    if let Ok(v) = i64::try_from(c) {
        serde_json::Value::from(v)
    } else {
        serde_json::Value::from(c.to_string())
    }
}

fn coeff_from_json(v: &serde_json::Value) -> Result<Int> {
    if let Some(n) = v.as_i64() {
        return Ok(int(n));
    }
    if let Some(s) = v.as_str() {
        return s
            .parse::<Int>()
            .map_err(|_| Error::Validation(format!("bad integer coefficient '{s}'")));
    }
    Err(Error::Validation(format!("bad coefficient {v}")))
}

pub fn lie_to_json(e: &LieElement, cap: usize) -> Result<serde_json::Value> {
    let basis = hall_basis(e.m, e.degree, cap)?;
    let terms: Vec<serde_json::Value> = e
        .coords()
        .iter()
        .map(|(idx, c)| {
            serde_json::json!({
                "coeff": coeff_json(c),
                "bracket": basis.brackets[*idx].to_string(),
            })
        })
        .collect();
    Ok(serde_json::json!({ "degree": e.degree, "terms": terms }))
}

pub fn lie_from_json(v: &serde_json::Value, m: u32, cap: usize) -> Result<LieElement> {
    let degree = v
        .get("degree")
        .and_then(|d| d.as_u64())
        .ok_or_else(|| Error::Validation("missing degree".into()))? as usize;
    let mut out = LieElement::zero(m, degree);
    let terms = v
        .get("terms")
        .and_then(|t| t.as_array())
        .ok_or_else(|| Error::Validation("missing terms".into()))?;
    for term in terms {
        let c = coeff_from_json(
            term.get("coeff").ok_or_else(|| Error::Validation("missing coeff".into()))?,
        )?;
        let text = term
            .get("bracket")
            .and_then(|b| b.as_str())
            .ok_or_else(|| Error::Validation("missing bracket".into()))?;
        let tree = crate::trees::parse_rooted(text, m)?;
        if tree.order() + 1 != degree {
            return Err(Error::Validation(format!(
                "bracket '{text}' has degree {} in a degree-{degree} element",
                tree.order() + 1
            )));
        }
        let e = rooted_to_lie(&tree, m, cap)?;
        for (i, ec) in e.coords() {
            out.add_term(*i, ec.clone() * &c);
        }
    }
    Ok(out)
}

pub fn tensor_to_json(t: &TensorElement, cap: usize) -> Result<serde_json::Value> {
    let basis = hall_basis(t.m, t.degree + 1, cap)?;
    let terms: Vec<serde_json::Value> = t
        .coords()
        .iter()
        .map(|((i, idx), c)| {
            let mut text = String::new();
            let _ = write!(text, "({i},{})", basis.brackets[*idx]);
            serde_json::json!({ "coeff": coeff_json(c), "bracket": text })
        })
        .collect();
    Ok(serde_json::json!({ "degree": t.degree, "terms": terms }))
}

pub fn tensor_from_json(v: &serde_json::Value, m: u32, cap: usize) -> Result<TensorElement> {
    let degree = v
        .get("degree")
        .and_then(|d| d.as_u64())
        .ok_or_else(|| Error::Validation("missing degree".into()))? as usize;
    let mut out = TensorElement::zero(m, degree);
    let terms = v
        .get("terms")
        .and_then(|t| t.as_array())
        .ok_or_else(|| Error::Validation("missing terms".into()))?;
    for term in terms {
        let c = coeff_from_json(
            term.get("coeff").ok_or_else(|| Error::Validation("missing coeff".into()))?,
        )?;
        let text = term
            .get("bracket")
            .and_then(|b| b.as_str())
            .ok_or_else(|| Error::Validation("missing bracket".into()))?;
        let tree = crate::trees::parse_rooted(text, m)?;
        let RootedTree::Node(first, second) = &tree else {
            return Err(Error::Validation(format!(
                "tensor term '{text}' must be a pair (label, bracket)"
            )));
        };
        let RootedTree::Leaf(label) = &**first else {
            return Err(Error::Validation(format!(
                "tensor term '{text}' must have a bare label as first factor"
            )));
        };
        if second.order() + 1 != degree + 1 {
            return Err(Error::Validation(format!(
                "tensor term '{text}' has the wrong degree for order {degree}"
            )));
        }
        let e = rooted_to_lie(second, m, cap)?;
        out.add_tensor(label.get(), &e, &c);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::parse_rooted;
    use proptest::prelude::*;

    const CAP: usize = 1 << 20;

    #[test]
    fn witt_examples() {
        assert_eq!(witt_rank(1, 2), int(0));
        assert_eq!(witt_rank(2, 2), int(1));
        assert_eq!(witt_rank(2, 3), int(2));
        assert_eq!(witt_rank(2, 6), int(9));
        assert_eq!(witt_rank(3, 3), int(8));
        assert_eq!(witt_rank(3, 6), int(116));
        assert_eq!(witt_rank(4, 6), int(670));
    }

    #[test]
    fn lyndon_counts_match_witt() {
        for m in 1..=4u32 {
            for n in 1..=6usize {
                assert_eq!(
                    int(lyndon_words(m, n).len() as i64),
                    witt_rank(m, n),
                    "m={m} n={n}"
                );
            }
        }
    }

    #[test]
    fn basis_brackets_independent_in_magma_oracle() {
        for (m, n) in [(2u32, 2usize), (2, 3), (2, 4), (3, 2), (3, 3)] {
            assert!(
                crate::selftest::oracles::lyndon_brackets_independent(m, n),
                "m={m} n={n}"
            );
        }
    }

    #[test]
    fn standard_bracketing_examples() {
        assert_eq!(standard_bracketing(&[1, 2, 3]).to_string(), "(1,(2,3))");
        assert_eq!(standard_bracketing(&[1, 1, 2]).to_string(), "(1,(1,2))");
        assert_eq!(standard_bracketing(&[1, 2, 2]).to_string(), "((1,2),2)");
    }

    fn from_tree(text: &str, m: u32) -> LieElement {
        rooted_to_lie(&parse_rooted(text, m).unwrap(), m, CAP).unwrap()
    }

    #[test]
    fn self_bracket_vanishes() {
        assert!(from_tree("(1,1)", 2).is_zero());
        let x = from_tree("(1,2)", 2);
        assert!(lie_bracket(&x, &x, CAP).unwrap().is_zero());
    }

    #[test]
    fn antisymmetry() {
        let a = from_tree("(1,2)", 3);
        let b = from_tree("(2,1)", 3);
        assert!(a.add(&b).is_zero());
        assert!(!a.is_zero());
    }

    #[test]
    fn jacobi_identity_generators() {
        let s = from_tree("(1,(2,3))", 3)
            .add(&from_tree("(2,(3,1))", 3))
            .add(&from_tree("(3,(1,2))", 3));
        assert!(s.is_zero());
    }

    #[test]
    fn hall_coords_example() {
        let e = from_tree("(1,(2,3))", 3);
        let basis = hall_basis(3, 3, CAP).unwrap();
        let idx = basis.index_of(&[1, 2, 3]).unwrap();
        assert_eq!(e.coords().len(), 1);
        assert_eq!(e.coords()[&idx], int(1));
    }

    #[test]
    fn bracket_map_examples() {
        let m = 3;
        let mut t = TensorElement::zero(m, 1);
        t.add_tensor(1, &from_tree("(2,3)", m), &int(1));
        t.add_tensor(2, &from_tree("(3,1)", m), &int(1));
        t.add_tensor(3, &from_tree("(1,2)", m), &int(1));
        assert!(bracket_map(&t, CAP).unwrap().is_zero());

        let mut u = TensorElement::zero(2, 0);
        u.add_tensor(1, &LieElement::generator(2, 2), &int(1));
        assert_eq!(bracket_map(&u, CAP).unwrap(), from_tree("(1,2)", 2));

        let mut v = TensorElement::zero(2, 1);
        v.add_tensor(1, &from_tree("(1,2)", 2), &int(1));
        assert_eq!(bracket_map(&v, CAP).unwrap(), from_tree("(1,(1,2))", 2));
        assert!(!bracket_map(&v, CAP).unwrap().is_zero());
    }

    #[test]
    fn dn_ranks() {
        assert_eq!(dn_lattice(3, 1, CAP).unwrap().rank(), 1);
        assert_eq!(dn_lattice(2, 2, CAP).unwrap().rank(), 1);
        for n in 1..=4 {
            assert_eq!(dn_lattice(1, n, CAP).unwrap().rank(), 0, "m=1 n={n}");
        }
        assert_eq!(dn_lattice(2, 0, CAP).unwrap().rank(), 3);
    }

    #[test]
    fn dn_basis_lies_in_bracket_kernel() {
        for (m, n) in [(2u32, 1usize), (2, 2), (3, 1), (2, 3)] {
            let d = dn_lattice(m, n, CAP).unwrap();
            let basis_in = hall_basis(m, n + 1, CAP).unwrap();
            for col in 0..d.basis.cols {
                let mut t = TensorElement::zero(m, n);
                for (flat, c) in d.basis.col(col).into_iter().enumerate() {
                    let i = (flat / basis_in.len()) as u32 + 1;
                    t.add_term(i, flat % basis_in.len(), c);
                }
                assert!(bracket_map(&t, CAP).unwrap().is_zero(), "m={m} n={n} col={col}");
            }
        }
    }

    #[test]
    fn dn_membership_examples() {
        let d = dn_lattice(3, 1, CAP).unwrap();
        let zero = TensorElement::zero(3, 1);
        let coords = dn_membership(&zero, &d, CAP).unwrap().unwrap();
        assert_eq!(coords.len(), 1);
        assert!(coords.iter().all(|c| c.is_zero()));

        let mut t = TensorElement::zero(3, 1);
        t.add_tensor(1, &from_tree("(2,3)", 3), &int(1));
        t.add_tensor(2, &from_tree("(3,1)", 3), &int(1));
        t.add_tensor(3, &from_tree("(1,2)", 3), &int(1));
        assert!(dn_membership(&t, &d, CAP).unwrap().is_some());

        let d2 = dn_lattice(2, 1, CAP).unwrap();
        let mut bad = TensorElement::zero(2, 1);
        bad.add_tensor(1, &from_tree("(1,2)", 2), &int(1));
        assert_eq!(dn_membership(&bad, &d2, CAP).unwrap(), None);
    }

    #[test]
    fn json_accepts_string_coefficients() {
        let v: serde_json::Value = serde_json::json!({
            "degree": 1,
            "terms": [{"coeff": "123456789012345678901234567890", "bracket": "1"}]
        });
        let e = lie_from_json(&v, 2, CAP).unwrap();
        let back = lie_to_json(&e, CAP).unwrap();
        assert_eq!(back["terms"][0]["coeff"], "123456789012345678901234567890");
        assert_eq!(lie_from_json(&back, 2, CAP).unwrap(), e);
    }

    #[test]
    fn json_round_trip_and_normalization() {
        let e = from_tree("(1,(2,3))", 3).scale(&int(5));
        let j = lie_to_json(&e, CAP).unwrap();
        let back = lie_from_json(&j, 3, CAP).unwrap();
        assert_eq!(e, back);

        // free-form bracket normalizes: ((2,3),1) = −(1,(2,3))
        let v: serde_json::Value = serde_json::json!({
            "degree": 3,
            "terms": [{"coeff": 1, "bracket": "((2,3),1)"}]
        });
        let f = lie_from_json(&v, 3, CAP).unwrap();
        assert_eq!(f, from_tree("(1,(2,3))", 3).neg());

        let mut t = TensorElement::zero(2, 2);
        t.add_tensor(1, &from_tree("(2,(1,2))", 2), &int(1));
        t.add_tensor(2, &from_tree("((1,2),1)", 2), &int(1));
        let tj = tensor_to_json(&t, CAP).unwrap();
        let tback = tensor_from_json(&tj, 2, CAP).unwrap();
        assert_eq!(t, tback);
    }

    fn arb_lie(m: u32, degree: usize) -> impl Strategy<Value = LieElement> {
        let len = lyndon_words(m, degree).len();
        proptest::collection::vec(-3i64..=3, len).prop_map(move |cs| {
            let mut e = LieElement::zero(m, degree);
            for (i, c) in cs.into_iter().enumerate() {
                e.add_term(i, int(c));
            }
            e
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn bracket_bilinear_antisymmetric_jacobi(
            a in arb_lie(3, 2), b in arb_lie(3, 2), c in arb_lie(3, 2)) {
            let ab = lie_bracket(&a, &b, CAP).unwrap();
            let ba = lie_bracket(&b, &a, CAP).unwrap();
            prop_assert!(ab.add(&ba).is_zero());

            // bilinearity in the first slot
            let sum = a.add(&b);
            let lhs = lie_bracket(&sum, &c, CAP).unwrap();
            let rhs = lie_bracket(&a, &c, CAP).unwrap().add(&lie_bracket(&b, &c, CAP).unwrap());
            prop_assert_eq!(&lhs, &rhs);

            // Jacobi
            let j = lie_bracket(&a, &lie_bracket(&b, &c, CAP).unwrap(), CAP).unwrap()
                .add(&lie_bracket(&b, &lie_bracket(&c, &a, CAP).unwrap(), CAP).unwrap())
                .add(&lie_bracket(&c, &lie_bracket(&a, &b, CAP).unwrap(), CAP).unwrap());
            prop_assert!(j.is_zero());
        }
    }
}
