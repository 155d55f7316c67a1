//! Intersection forests and the invariants computed from them: the class τ
//! in the twisted tree group, the total Milnor invariant μ = η∘τ with its
//! per-component longitudes, order-0 linking data, higher-order Arf
//! representatives, and symbolic Bing-doubling realization recipes.

use crate::eta::{self, ker_eta_of, KerEta};
use crate::lie::{self, dn_lattice, tensor_to_json, LieElement, TensorElement};
use crate::linalg::{int, Int};
use crate::tree_groups::{structure, twisted_presentation, Generator, GroupStructure, Presentation};
use crate::trees::{parse_rooted, parse_unrooted, CanonicalTree, InfTree, RootedTree};
use crate::{Error, Result};
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

/// One signed order-n tree or twist-weighted ∞-tree read off a split tower.
#[derive(Clone, Debug)]
pub enum ForestItem {
    Tree { eps: i32, tree: CanonicalTree },
    Inf { omega: Int, inf: InfTree },
}

/// Multiset of signed trees and ∞-trees of one order.
#[derive(Clone, Debug)]
pub struct IntersectionForest {
    pub m: u32,
    pub n: usize,
    pub items: Vec<ForestItem>,
}

impl IntersectionForest {
    pub fn empty(m: u32, n: usize) -> Self {
        IntersectionForest { m, n, items: Vec::new() }
    }

    /// Generator-coordinate vector of the formal sum Σ ε·t + Σ ω·J∞.
    pub fn vector(&self, p: &Presentation) -> Result<Vec<Int>> {
        let mut x = vec![Int::zero(); p.generators.len()];
        for item in &self.items {
            match item {
                ForestItem::Tree { eps, tree } => {
                    let idx = p.tree_index(tree).ok_or_else(|| {
                        Error::Internal(format!("forest tree {tree} missing from presentation"))
                    })?;
                    x[idx] += int(*eps as i64);
                }
                ForestItem::Inf { omega, inf } => {
                    let idx = p.inf_index(inf).ok_or_else(|| {
                        Error::Internal(format!("forest ∞-tree {inf} missing from presentation"))
                    })?;
                    x[idx] += omega;
                }
            }
        }
        Ok(x)
    }
}

/// Parses and validates a forest document:
/// `{"m":2,"n":1,"items":[{"eps":1,"tree":"<(1,2),2>"},{"omega":1,"inf":"(1,2)"}]}`.
/// Trees are canonicalized with their AS signs folded into ε.
pub fn parse_forest(doc: &serde_json::Value) -> Result<IntersectionForest> {
    let m = doc
        .get("m")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::Validation("missing or bad component count 'm'".into()))?
        as u32;
    if m < 1 {
        return Err(Error::Validation("component count m must be at least 1".into()));
    }
    let n = doc
        .get("n")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::Validation("missing or bad order 'n'".into()))? as usize;
    let raw_items = doc
        .get("items")
        .and_then(|v| v.as_array())
        .ok_or_else(|| Error::Validation("missing 'items' array".into()))?;
    let mut items = Vec::with_capacity(raw_items.len());
    for (k, it) in raw_items.iter().enumerate() {
        let item = parse_item(it, m, n).map_err(|e| match e {
            Error::Validation(msg) => Error::Validation(format!("item {k}: {msg}")),
            other => other,
        })?;
        items.push(item);
    }
    Ok(IntersectionForest { m, n, items })
}

fn parse_item(it: &serde_json::Value, m: u32, n: usize) -> Result<ForestItem> {
    match (it.get("tree"), it.get("inf")) {
        (Some(tree), None) => {
            let eps = it
                .get("eps")
                .and_then(|v| v.as_i64())
                .ok_or_else(|| Error::Validation("tree item needs integer 'eps'".into()))?;
            if eps != 1 && eps != -1 {
                return Err(Error::Validation(format!("|eps| must be 1, got {eps}")));
            }
            let text = tree
                .as_str()
                .ok_or_else(|| Error::Validation("'tree' must be a string".into()))?;
            let (canon, sign) = parse_unrooted(text, m)
                .map_err(|e| Error::Validation(format!("bad tree '{text}': {e}")))?;
            if canon.order() != n {
                return Err(Error::Validation(format!(
                    "tree '{text}' has order {}, forest has order {n}",
                    canon.order()
                )));
            }
            Ok(ForestItem::Tree { eps: eps as i32 * sign, tree: canon })
        }
        (None, Some(inf)) => {
            if n % 2 != 0 {
                return Err(Error::Validation(format!(
                    "∞-tree item in a forest of odd order {n}"
                )));
            }
            let omega = it
                .get("omega")
                .and_then(|v| v.as_i64())
                .ok_or_else(|| Error::Validation("∞ item needs integer 'omega'".into()))?;
            if n > 0 && omega != 1 && omega != -1 {
                return Err(Error::Validation(format!(
                    "omega must be ±1 in positive orders, got {omega}"
                )));
            }
            let text = inf
                .as_str()
                .ok_or_else(|| Error::Validation("'inf' must be a string".into()))?;
            let body = parse_rooted(text, m)
                .map_err(|e| Error::Validation(format!("bad ∞-tree body '{text}': {e}")))?;
            if body.order() != n / 2 {
                return Err(Error::Validation(format!(
                    "∞-tree body '{text}' has order {}, expected {}",
                    body.order(),
                    n / 2
                )));
            }
            Ok(ForestItem::Inf { omega: int(omega), inf: InfTree::new(&body) })
        }
        _ => Err(Error::Validation(
            "item must have exactly one of 'tree' (with 'eps') or 'inf' (with 'omega')".into(),
        )),
    }
}

pub fn parse_forest_str(text: &str) -> Result<IntersectionForest> {
    let doc: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::Validation(format!("bad JSON: {e}")))?;
    parse_forest(&doc)
}

// Shared per-(m,n) twisted presentation and structure; contents are
// deterministic, so first-writer-wins initialization is safe.
struct TwistedSetup {
    presentation: Presentation,
    structure: GroupStructure,
}

static TWISTED_CACHE: OnceLock<Mutex<BTreeMap<(u32, usize), Arc<TwistedSetup>>>> = OnceLock::new();

fn twisted_setup(m: u32, n: usize, cap: usize) -> Result<Arc<TwistedSetup>> {
    let cache = TWISTED_CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    {
        let guard = cache.lock().unwrap();
        if let Some(s) = guard.get(&(m, n)) {
            if s.presentation.generators.len() > cap {
                return Err(Error::Resource(format!(
                    "presentation at (m={m}, n={n}) has {} generators (cap {cap})",
                    s.presentation.generators.len()
                )));
            }
            return Ok(s.clone());
        }
    }
    let presentation = twisted_presentation(m, n, cap)?;
    let st = structure(&presentation);
    let setup = Arc::new(TwistedSetup { presentation, structure: st });
    let mut guard = cache.lock().unwrap();
    Ok(guard.entry((m, n)).or_insert(setup).clone())
}

/// τ of a forest: canonical coordinates in the twisted tree group.
pub struct TauResult {
    pub coords: Vec<Int>,
    pub torsion: Vec<Int>,
    pub rank: usize,
}

impl TauResult {
    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }
}

pub fn tau(f: &IntersectionForest, cap: usize) -> Result<TauResult> {
    let setup = twisted_setup(f.m, f.n, cap)?;
    let x = f.vector(&setup.presentation)?;
    Ok(TauResult {
        coords: setup.structure.reduce(&x),
        torsion: setup.structure.torsion.clone(),
        rank: setup.structure.rank,
    })
}

/// The total first non-vanishing Milnor invariant with its longitudes.
pub struct MilnorResult {
    pub m: u32,
    pub n: usize,
    pub total: TensorElement,
    pub longitudes: BTreeMap<u32, LieElement>,
    /// coordinates of `total` in the Hermite basis of D_n
    pub dn_coords: Vec<Int>,
}

impl MilnorResult {
    pub fn is_zero(&self) -> bool {
        self.total.is_zero()
    }

    pub fn to_json(&self, cap: usize) -> Result<serde_json::Value> {
        let longs: serde_json::Map<String, serde_json::Value> = self
            .longitudes
            .iter()
            .map(|(i, e)| Ok((i.to_string(), lie::lie_to_json(e, cap)?)))
            .collect::<Result<_>>()?;
        Ok(serde_json::json!({
            "m": self.m,
            "n": self.n,
            "total": tensor_to_json(&self.total, cap)?,
            "longitudes": longs,
            "dn_coords": self.dn_coords.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        }))
    }
}

/// μ_n of a forest: η applied generator-wise to the formal sum, with D_n
/// membership asserted and longitudes split off the tensor factor.
pub fn milnor(f: &IntersectionForest, cap: usize) -> Result<MilnorResult> {
    let mut total = TensorElement::zero(f.m, f.n);
    for item in &f.items {
        match item {
            ForestItem::Tree { eps, tree } => {
                let img = eta::eta_tree(tree, f.m, cap)?;
                total = total.add(&img.scale(&int(*eps as i64)));
            }
            ForestItem::Inf { omega, inf } => {
                let img = eta::eta_inf(inf, f.m, cap)?;
                total = total.add(&img.scale(omega));
            }
        }
    }
    let d = dn_lattice(f.m, f.n, cap)?;
    let coords = lie::dn_membership(&total, &d, cap)?.ok_or_else(|| {
        Error::Internal("Milnor total escapes the kernel of the bracket map".into())
    })?;
    let longitudes = (1..=f.m).map(|i| (i, total.longitude(i))).collect();
    Ok(MilnorResult { m: f.m, n: f.n, total, longitudes, dn_coords: coords })
}

/// Order-0 linking data: off-diagonal entries are linking numbers, the
/// diagonal is the framing, so that η₀ of the forest reproduces the matrix.
pub fn linking_data(f: &IntersectionForest) -> Result<Vec<Vec<Int>>> {
    if f.n != 0 {
        return Err(Error::Validation(format!(
            "linking data requires an order-0 forest, got order {}",
            f.n
        )));
    }
    let m = f.m as usize;
    let mut mat = vec![vec![Int::zero(); m]; m];
    for item in &f.items {
        match item {
            ForestItem::Tree { eps, tree } => {
                let leaves = tree.leaves();
                let (i, j) = (leaves[0].get() as usize - 1, leaves[1].get() as usize - 1);
                if i == j {
                    // a clean ⟨i,i⟩ intersection contributes ±2 to self-linking
                    mat[i][i] += int(2 * *eps as i64);
                } else {
                    mat[i][j] += int(*eps as i64);
                    mat[j][i] += int(*eps as i64);
                }
            }
            ForestItem::Inf { omega, inf } => {
                let i = inf.max_label() as usize - 1;
                mat[i][i] += omega;
            }
        }
    }
    Ok(mat)
}

/// Result of the higher-order Arf extraction.
pub enum ArfOutcome {
    /// μ(F) ≠ 0: the Milnor obstruction must vanish before Arf is defined.
    MilnorObstruction(MilnorResult),
    Value(ArfValue),
}

/// Element of Z_2 ⊗ L_k written as Σ 1⊗J over Lyndon-basis brackets J.
///
/// This is a representative in the known upper-bound group; the invariant
/// proper lives in a quotient that is conjecturally all of Z_2 ⊗ L_k.
pub struct ArfValue {
    pub k: usize,
    pub terms: Vec<RootedTree>,
}

impl fmt::Display for ArfValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let shown: Vec<String> = self.terms.iter().map(|j| format!("1⊗{j}")).collect();
        write!(f, "{}", shown.join(" + "))
    }
}

/// Arf_k of an order-(4k−2) forest: for μ(F) = 0, expresses τ(F) in the
/// (J,J)∞ kernel basis and returns the matching Σ 1⊗J.
pub fn arf_value(f: &IntersectionForest, cap: usize) -> Result<ArfOutcome> {
    if f.n % 4 != 2 {
        return Err(Error::Validation(format!(
            "Arf is defined at orders n = 4k−2, got n = {}",
            f.n
        )));
    }
    let mu = milnor(f, cap)?;
    if !mu.is_zero() {
        return Ok(ArfOutcome::MilnorObstruction(mu));
    }
    let ker = kernel_setup(f.m, f.n, cap)?;
    let x = f.vector(&ker.presentation)?;
    let coords = ker
        .kernel_coords(&x)
        .ok_or_else(|| Error::Internal("τ(F) escapes the kernel although μ(F) = 0".into()))?;
    let basis = ker
        .symmetric_match
        .as_ref()
        .ok_or_else(|| Error::Internal("missing (J,J)∞ matching at order 4k−2".into()))?;
    if !basis.verified {
        return Err(Error::Internal(
            "kernel does not match Z_2 ⊗ L_k with (J,J)∞ generators".into(),
        ));
    }
    let sol = eta::solve_mod2(&basis.coords, &coords).ok_or_else(|| {
        Error::Internal("τ(F) is not spanned by the (J,J)∞ kernel generators".into())
    })?;
    let terms: Vec<RootedTree> = basis
        .roots
        .iter()
        .zip(&sol)
        .filter(|(_, a)| **a == 1)
        .map(|(j, _)| j.clone())
        .collect();
    Ok(ArfOutcome::Value(ArfValue { k: basis.k, terms }))
}

static KERNEL_CACHE: OnceLock<Mutex<BTreeMap<(u32, usize), Arc<KerEta>>>> = OnceLock::new();

fn kernel_setup(m: u32, n: usize, cap: usize) -> Result<Arc<KerEta>> {
    let cache = KERNEL_CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    {
        let guard = cache.lock().unwrap();
        if let Some(k) = guard.get(&(m, n)) {
            return Ok(k.clone());
        }
    }
    let ker = Arc::new(ker_eta_of(eta::eta_matrix(m, n, cap)?, cap)?);
    let mut guard = cache.lock().unwrap();
    Ok(guard.entry((m, n)).or_insert(ker).clone())
}

// ---------------------------------------------------------------------------
// Realization recipes.
// ---------------------------------------------------------------------------

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum RecipeStep {
    StartHopf,
    /// +1-framed unknot
    StartFramedUnknot,
    StartFigureEight,
    BingDouble(u32),
    TwistedBingDouble(u32),
    /// band the second component into the first
    BandSum(u32, u32),
}

impl fmt::Display for RecipeStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecipeStep::StartHopf => write!(f, "start-hopf"),
            RecipeStep::StartFramedUnknot => write!(f, "start-framed-unknot(+1)"),
            RecipeStep::StartFigureEight => write!(f, "start-figure-eight"),
            RecipeStep::BingDouble(c) => write!(f, "bing-double({c})"),
            RecipeStep::TwistedBingDouble(c) => write!(f, "twisted-bing-double({c})"),
            RecipeStep::BandSum(a, b) => write!(f, "band-sum({a},{b})"),
        }
    }
}

/// Symbolic realization recipe for a single generator: the steps build a link
/// whose tower bookkeeping realizes the target tree; `labels` maps surviving
/// component ids to the target's labels.
pub struct Recipe {
    pub target: Generator,
    pub steps: Vec<RecipeStep>,
    pub labels: BTreeMap<u32, u32>,
}

impl Recipe {
    pub fn to_json(&self) -> serde_json::Value {
        let steps: Vec<serde_json::Value> = self
            .steps
            .iter()
            .map(|s| match s {
                RecipeStep::StartHopf => serde_json::json!({"op": "start-hopf"}),
                RecipeStep::StartFramedUnknot => {
                    serde_json::json!({"op": "start-framed-unknot", "framing": 1})
                }
                RecipeStep::StartFigureEight => serde_json::json!({"op": "start-figure-eight"}),
                RecipeStep::BingDouble(c) => {
                    serde_json::json!({"op": "bing-double", "component": c})
                }
                RecipeStep::TwistedBingDouble(c) => {
                    serde_json::json!({"op": "twisted-bing-double", "component": c})
                }
                RecipeStep::BandSum(a, b) => {
                    serde_json::json!({"op": "band-sum", "into": a, "from": b})
                }
            })
            .collect();
        let labels: serde_json::Map<String, serde_json::Value> = self
            .labels
            .iter()
            .map(|(c, l)| (c.to_string(), serde_json::Value::from(*l)))
            .collect();
        serde_json::json!({
            "target": self.target.to_string(),
            "steps": steps,
            "labels": labels,
        })
    }
}

/// Splits the pending subtrees of components into doubling steps: component c
/// keeps the left branch, a fresh component takes the right branch. Returns
/// the leaf label of each final component.
struct Splitter {
    pending: BTreeMap<u32, RootedTree>,
    next: u32,
    steps: Vec<RecipeStep>,
}

impl Splitter {
    fn new(first: Vec<RootedTree>) -> Self {
        let mut pending = BTreeMap::new();
        let mut next = 1;
        for t in first {
            pending.insert(next, t);
            next += 1;
        }
        Splitter { pending, next, steps: Vec::new() }
    }

    fn run(&mut self, twisted_first: bool) {
        let mut first = twisted_first;
        loop {
            let split = self
                .pending
                .iter()
                .find(|(_, t)| matches!(t, RootedTree::Node(_, _)))
                .map(|(c, t)| (*c, t.clone()));
            let Some((c, RootedTree::Node(l, r))) = split else { break };
            self.steps.push(if first {
                RecipeStep::TwistedBingDouble(c)
            } else {
                RecipeStep::BingDouble(c)
            });
            first = false;
            self.pending.insert(c, *l);
            self.pending.insert(self.next, *r);
            self.next += 1;
        }
    }

    /// Band-sums components with repeated target labels, keeping the first
    /// component of each label (components in creation order, which follows
    /// the post-order position of their leaves in the target).
    fn band_sums(&mut self) -> BTreeMap<u32, u32> {
        let mut keeper: BTreeMap<u32, u32> = BTreeMap::new(); // label -> comp
        let mut labels = BTreeMap::new();
        let comps: Vec<(u32, u32)> = self
            .pending
            .iter()
            .map(|(c, t)| match t {
                RootedTree::Leaf(l) => (*c, l.get()),
                _ => unreachable!("splitting finished"),
            })
            .collect();
        for (c, label) in comps {
            match keeper.get(&label) {
                Some(&k) => self.steps.push(RecipeStep::BandSum(k, c)),
                None => {
                    keeper.insert(label, c);
                    labels.insert(c, label);
                }
            }
        }
        labels
    }
}

/// Builds the symbolic Bing-doubling recipe for a single generator.
///
/// Plain trees start from the Hopf link; ∞-trees of the form (J,J)∞ start
/// from the figure-eight knot and extend both branches symmetrically; other
/// ∞-trees start from the +1-framed unknot with a first twisted doubling.
pub fn realize_recipe(target: &Generator) -> Result<Recipe> {
    let mut steps = Vec::new();
    let labels;
    match target {
        Generator::Tree(t) => {
            steps.push(RecipeStep::StartHopf);
            let (l, r) = t.halves();
            let mut sp = Splitter::new(vec![l.clone(), r.clone()]);
            sp.run(false);
            labels = sp.band_sums();
            steps.extend(sp.steps);
        }
        Generator::Inf(j) => match j.body() {
            RootedTree::Node(a, b) if a == b => {
                steps.push(RecipeStep::StartFigureEight);
                let mut sp = Splitter::new(vec![(**a).clone()]);
                sp.run(false);
                labels = sp.band_sums();
                steps.extend(sp.steps);
            }
            body => {
                steps.push(RecipeStep::StartFramedUnknot);
                let mut sp = Splitter::new(vec![body.clone()]);
                sp.run(true);
                labels = sp.band_sums();
                steps.extend(sp.steps);
            }
        },
    }
    let recipe = Recipe { target: target.clone(), steps, labels };
    let replayed = replay(&recipe)?;
    if &replayed != target {
        return Err(Error::Internal(format!(
            "recipe replay produced {replayed}, expected {target}"
        )));
    }
    Ok(recipe)
}

/// Replays a recipe symbolically and returns the realized generator (up to
/// overall AS sign). Checks the order bookkeeping: plain doublings raise the
/// tree order by one per affected leaf, band sums only merge labels.
pub fn replay(recipe: &Recipe) -> Result<Generator> {
    enum State {
        Tree(RootedTree, RootedTree),
        Inf(RootedTree),
    }

    fn split_leaves(t: &RootedTree, c: u32, next: u32, count: &mut usize) -> RootedTree {
        match t {
            RootedTree::Leaf(l) if l.get() == c => {
                *count += 1;
                RootedTree::node(RootedTree::leaf(c), RootedTree::leaf(next))
            }
            RootedTree::Leaf(_) => t.clone(),
            RootedTree::Node(a, b) => RootedTree::node(
                split_leaves(a, c, next, count),
                split_leaves(b, c, next, count),
            ),
        }
    }

    fn relabel(t: &RootedTree, from: u32, to: u32) -> RootedTree {
        match t {
            RootedTree::Leaf(l) if l.get() == from => RootedTree::leaf(to),
            RootedTree::Leaf(_) => t.clone(),
            RootedTree::Node(a, b) => {
                RootedTree::node(relabel(a, from, to), relabel(b, from, to))
            }
        }
    }

    let mut it = recipe.steps.iter();
    let mut state = match it.next() {
        Some(RecipeStep::StartHopf) => State::Tree(RootedTree::leaf(1), RootedTree::leaf(2)),
        Some(RecipeStep::StartFramedUnknot) | Some(RecipeStep::StartFigureEight) => {
            State::Inf(RootedTree::leaf(1))
        }
        other => {
            return Err(Error::Validation(format!(
                "recipe must begin with a start step, got {other:?}"
            )))
        }
    };
    let symmetric = matches!(recipe.steps.first(), Some(RecipeStep::StartFigureEight));
    let mut next = match state {
        State::Tree(..) => 3,
        State::Inf(..) => 2,
    };
    for step in it {
        match step {
            RecipeStep::StartHopf | RecipeStep::StartFramedUnknot | RecipeStep::StartFigureEight => {
                return Err(Error::Validation("start step after the first".into()))
            }
            RecipeStep::BingDouble(c) | RecipeStep::TwistedBingDouble(c) => {
                let twisted = matches!(step, RecipeStep::TwistedBingDouble(_));
                let mut count = 0;
                match (&mut state, twisted) {
                    (State::Tree(l, r), false) => {
                        *l = split_leaves(l, *c, next, &mut count);
                        *r = split_leaves(r, *c, next, &mut count);
                        if count != 1 {
                            return Err(Error::Validation(format!(
                                "bing-double({c}) must split exactly one leaf, found {count}"
                            )));
                        }
                    }
                    (State::Tree(..), true) => {
                        return Err(Error::Validation(
                            "twisted doubling applies to ∞-tree targets only".into(),
                        ))
                    }
                    (State::Inf(body), t) => {
                        if symmetric {
                            // figure-eight construction: all doublings untwisted
                            if t {
                                return Err(Error::Validation(
                                    "twisted doubling does not occur in the figure-eight construction"
                                        .into(),
                                ));
                            }
                        } else {
                            let body_is_leaf = matches!(body, RootedTree::Leaf(_));
                            if t != body_is_leaf {
                                return Err(Error::Validation(
                                    "exactly the first doubling of an ∞-tree is twisted".into(),
                                ));
                            }
                        }
                        *body = split_leaves(body, *c, next, &mut count);
                        if count != 1 {
                            return Err(Error::Validation(format!(
                                "doubling({c}) must split exactly one leaf per branch, found {count}"
                            )));
                        }
                    }
                }
                next += 1;
            }
            RecipeStep::BandSum(a, b) => match &mut state {
                State::Tree(l, r) => {
                    *l = relabel(l, *b, *a);
                    *r = relabel(r, *b, *a);
                }
                State::Inf(body) => *body = relabel(body, *b, *a),
            },
        }
    }
    // Apply the final component-to-label map.
    let map = |t: &RootedTree| -> RootedTree {
        let mut out = t.clone();
        for (c, l) in &recipe.labels {
            // temporary offset avoids collisions between ids and labels
            out = relabel(&out, *c, l + 1_000_000);
        }
        for l in recipe.labels.values() {
            out = relabel(&out, l + 1_000_000, *l);
        }
        out
    };
    Ok(match state {
        State::Tree(l, r) => {
            let (c, _) = crate::trees::canonicalize_unrooted(&map(&l), &map(&r));
            Generator::Tree(c)
        }
        State::Inf(body) => {
            let b = map(&body);
            let full = if symmetric { RootedTree::node(b.clone(), b) } else { b };
            Generator::Inf(InfTree::new(&full))
        }
    })
}
