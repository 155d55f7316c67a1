//! Labeled oriented unitrivalent trees: rooted trees as formal bracketings,
//! unrooted trees in AS-canonical form with sign tracking, ∞-trees, the
//! rooted and inner products, and generator enumeration.
//!
//! A rooted tree `Node(l, r)` records the cyclic orientation `(parent, l, r)`
//! at its top vertex. An unrooted tree is held as a *planted* pair `<A,B>`,
//! the two rooted halves on either side of a distinguished edge; re-planting
//! at another edge is orientation-preserving, so a tree's canonical form is
//! the minimum planted pair over all edges and AS-rewrites, with the sign of
//! a raw tree being the transposition parity needed to reach that minimum.

use crate::{Error, Result};
use std::fmt;

/// Link-component label, 1-based.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Label(u32);

impl Label {
    pub fn new(value: u32) -> Label {
        debug_assert!(value >= 1, "labels are 1-based");
        Label(value)
    }

    pub fn checked(value: u32, m: u32) -> Result<Label> {
        if value < 1 || value > m {
            return Err(Error::LabelRange { label: value, max: m });
        }
        Ok(Label(value))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Formal non-associative bracketing of labels; the ordered children encode
/// the cyclic vertex orientation.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum RootedTree {
    Leaf(Label),
    Node(Box<RootedTree>, Box<RootedTree>),
}

impl RootedTree {
    pub fn leaf(value: u32) -> RootedTree {
        RootedTree::Leaf(Label::new(value))
    }

    pub fn node(left: RootedTree, right: RootedTree) -> RootedTree {
        RootedTree::Node(Box::new(left), Box::new(right))
    }

    /// Number of trivalent vertices.
    pub fn order(&self) -> usize {
        match self {
            RootedTree::Leaf(_) => 0,
            RootedTree::Node(l, r) => l.order() + r.order() + 1,
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.order() + 1
    }

    pub fn max_label(&self) -> u32 {
        match self {
            RootedTree::Leaf(l) => l.get(),
            RootedTree::Node(l, r) => l.max_label().max(r.max_label()),
        }
    }

    pub fn leaves(&self) -> Vec<Label> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<Label>) {
        match self {
            RootedTree::Leaf(l) => out.push(*l),
            RootedTree::Node(l, r) => {
                l.collect_leaves(out);
                r.collect_leaves(out);
            }
        }
    }
}

impl fmt::Display for RootedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RootedTree::Leaf(l) => write!(f, "{l}"),
            RootedTree::Node(l, r) => write!(f, "({l},{r})"),
        }
    }
}

/// The rooted product (I,J): glue the roots and sprout a new root.
pub fn rooted_product(i: &RootedTree, j: &RootedTree) -> RootedTree {
    RootedTree::node(i.clone(), j.clone())
}

/// AS-canonical form of a rooted tree: children sorted at every vertex,
/// `sign` the transposition parity applied, `odd_auto` true when the tree
/// admits a label-preserving automorphism reversing an odd number of
/// vertex orientations (some vertex has equal canonical children).
pub struct CanonRooted {
    pub tree: RootedTree,
    pub sign: i32,
    pub odd_auto: bool,
}

pub fn canonicalize_rooted(t: &RootedTree) -> CanonRooted {
    match t {
        RootedTree::Leaf(l) => CanonRooted { tree: RootedTree::Leaf(*l), sign: 1, odd_auto: false },
        RootedTree::Node(l, r) => {
            let cl = canonicalize_rooted(l);
            let cr = canonicalize_rooted(r);
            let odd = cl.odd_auto || cr.odd_auto || cl.tree == cr.tree;
            let (a, b, sign) = if cl.tree <= cr.tree {
                (cl.tree, cr.tree, cl.sign * cr.sign)
            } else {
                (cr.tree, cl.tree, -cl.sign * cr.sign)
            };
            CanonRooted { tree: RootedTree::node(a, b), sign, odd_auto: odd }
        }
    }
}

/// Unrooted labeled oriented unitrivalent tree in canonical form.
///
/// `symmetric` is true when some labeled automorphism carries odd orientation
/// sign, in which case the AS relations force `2t = 0` in any tree group.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct CanonicalTree {
    left: RootedTree,
    right: RootedTree,
    symmetric: bool,
}

impl CanonicalTree {
    pub fn halves(&self) -> (&RootedTree, &RootedTree) {
        (&self.left, &self.right)
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn order(&self) -> usize {
        self.left.order() + self.right.order()
    }

    pub fn max_label(&self) -> u32 {
        self.left.max_label().max(self.right.max_label())
    }

    pub fn leaves(&self) -> Vec<Label> {
        let mut out = self.left.leaves();
        out.extend(self.right.leaves());
        out
    }
}

impl fmt::Display for CanonicalTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{},{}>", self.left, self.right)
    }
}

/// All plantings of the unrooted tree `<left,right>`: one `(side, rest)` pair
/// per edge, each reading off the same oriented tree from that edge.
pub fn plantings(left: &RootedTree, right: &RootedTree) -> Vec<(RootedTree, RootedTree)> {
    let mut out = Vec::new();
    out.push((left.clone(), right.clone()));
    descend(left, right, &mut out);
    descend(right, left, &mut out);
    out
}

/// Emits the plantings at every edge strictly inside `side`, where `rest` is
/// the rooted tree on the far side of `side`'s root edge. Entering a vertex
/// with cyclic order (parent, a, b) from `a` re-reads it as children (b, rest);
/// from `b` as (rest, a).
fn descend(side: &RootedTree, rest: &RootedTree, out: &mut Vec<(RootedTree, RootedTree)>) {
    if let RootedTree::Node(a, b) = side {
        let rest_a = RootedTree::node((**b).clone(), rest.clone());
        out.push(((**a).clone(), rest_a.clone()));
        descend(a, &rest_a, out);
        let rest_b = RootedTree::node(rest.clone(), (**a).clone());
        out.push(((**b).clone(), rest_b.clone()));
        descend(b, &rest_b, out);
    }
}

/// Canonicalizes the unrooted oriented tree `<left,right>`.
///
/// Returns the canonical tree and the sign relating the input to the
/// canonical representative; symmetric trees report sign +1 by convention.
pub fn canonicalize_unrooted(left: &RootedTree, right: &RootedTree) -> (CanonicalTree, i32) {
    let mut best: Option<(RootedTree, RootedTree, i32, bool)> = None;
    let mut symmetric = false;
    for (s, t) in plantings(left, right) {
        let cs = canonicalize_rooted(&s);
        let ct = canonicalize_rooted(&t);
        let sign = cs.sign * ct.sign;
        let odd = cs.odd_auto || ct.odd_auto;
        // Swapping the two halves across the middle edge carries no sign: the
        // gluing point is not a vertex.
        let (a, b) = if cs.tree <= ct.tree { (cs.tree, ct.tree) } else { (ct.tree, cs.tree) };
        match &best {
            None => {
                symmetric = odd;
                best = Some((a, b, sign, odd));
            }
            Some((ba, bb, bsign, _)) => {
                use std::cmp::Ordering;
                match (a.cmp(ba), b.cmp(bb)) {
                    (Ordering::Less, _) | (Ordering::Equal, Ordering::Less) => {
                        symmetric = odd;
                        best = Some((a, b, sign, odd));
                    }
                    (Ordering::Equal, Ordering::Equal) => {
                        // Two plantings reach the same minimum: an automorphism
                        // with sign (bsign * sign) exists.
                        if odd || sign != *bsign {
                            symmetric = true;
                        }
                    }
                    _ => {}
                }
            }
        }
    }
    let (a, b, sign, odd) = best.expect("tree has at least one planting");
    let symmetric = symmetric || odd;
    let tree = CanonicalTree { left: a, right: b, symmetric };
    (tree, if symmetric { 1 } else { sign })
}

/// The inner product ⟨I,J⟩: glue the roots to a single non-vertex point and
/// canonicalize the resulting unrooted tree.
pub fn inner_product(i: &RootedTree, j: &RootedTree) -> (CanonicalTree, i32) {
    canonicalize_unrooted(i, j)
}

/// Rooted tree whose root carries the twist symbol; stored sign-free because
/// (−J)^∞ = J^∞.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct InfTree {
    body: RootedTree,
}

impl InfTree {
    pub fn new(body: &RootedTree) -> InfTree {
        InfTree { body: canonicalize_rooted(body).tree }
    }

    pub fn body(&self) -> &RootedTree {
        &self.body
    }

    pub fn order(&self) -> usize {
        self.body.order()
    }

    pub fn max_label(&self) -> u32 {
        self.body.max_label()
    }
}

impl fmt::Display for InfTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "inf({})", self.body)
    }
}

// ---------------------------------------------------------------------------
// Parsing.  Grammar:  tree := label | "(" tree "," tree ")"
//                     unrooted := "<" tree "," tree ">"
//                     inf := "inf(" tree ")"
// Whitespace is ignored everywhere.
// ---------------------------------------------------------------------------

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    m: u32,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, m: u32) -> Self {
        Parser { bytes: text.as_bytes(), pos: 0, m }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expect(&mut self, b: u8) -> Result<()> {
        match self.peek() {
            Some(c) if c == b => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(Error::Syntax {
                offset: self.pos,
                message: format!("expected '{}'", b as char),
            }),
        }
    }

    fn rooted(&mut self) -> Result<RootedTree> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let l = self.rooted()?;
                self.expect(b',')?;
                let r = self.rooted()?;
                self.expect(b')')?;
                Ok(RootedTree::node(l, r))
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
                let value: u32 = text.parse().map_err(|_| Error::Syntax {
                    offset: start,
                    message: format!("label '{text}' too large"),
                })?;
                Ok(RootedTree::Leaf(Label::checked(value, self.m)?))
            }
            _ => Err(Error::Syntax {
                offset: self.pos,
                message: "expected label or '('".into(),
            }),
        }
    }

    fn finish(&mut self) -> Result<()> {
        self.skip_ws();
        if self.pos != self.bytes.len() {
            return Err(Error::Syntax {
                offset: self.pos,
                message: "trailing input".into(),
            });
        }
        Ok(())
    }
}

/// Parses a fully parenthesized rooted tree such as `(1,(2,3))`.
pub fn parse_rooted(text: &str, m: u32) -> Result<RootedTree> {
    let mut p = Parser::new(text, m);
    let t = p.rooted()?;
    p.finish()?;
    Ok(t)
}

/// Parses `<A,B>` into a canonical unrooted tree plus the sign folding the
/// written orientation onto the canonical one.
pub fn parse_unrooted(text: &str, m: u32) -> Result<(CanonicalTree, i32)> {
    let mut p = Parser::new(text, m);
    p.expect(b'<')?;
    let l = p.rooted()?;
    p.expect(b',')?;
    let r = p.rooted()?;
    p.expect(b'>')?;
    p.finish()?;
    Ok(canonicalize_unrooted(&l, &r))
}

/// Any of the three grammar forms.
pub enum TreeExpr {
    Rooted(RootedTree),
    Unrooted(CanonicalTree, i32),
    Inf(InfTree),
}

pub fn parse_expr(text: &str, m: u32) -> Result<TreeExpr> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('<') {
        let (t, s) = parse_unrooted(text, m)?;
        return Ok(TreeExpr::Unrooted(t, s));
    }
    if let Some(rest) = trimmed.strip_prefix("inf") {
        let rest = rest.trim_start();
        let inner = rest
            .strip_prefix('(')
            .and_then(|s| s.trim_end().strip_suffix(')'))
            .ok_or_else(|| Error::Syntax {
                offset: text.len() - rest.len(),
                message: "expected '(' tree ')' after 'inf'".into(),
            })?;
        let body = parse_rooted(inner, m)?;
        return Ok(TreeExpr::Inf(InfTree::new(&body)));
    }
    Ok(TreeExpr::Rooted(parse_rooted(text, m)?))
}

// ---------------------------------------------------------------------------
// Enumeration of generators.
// ---------------------------------------------------------------------------

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum GeneratorKind {
    Trees,
    Rooted,
    Inf,
}

/// All AS-canonical rooted trees of the given order over labels 1..=m,
/// generated directly (children ordered at every node), sorted.
pub fn enumerate_rooted(m: u32, order: usize, cap: usize) -> Result<Vec<RootedTree>> {
    let mut by_order: Vec<Vec<RootedTree>> = Vec::with_capacity(order + 1);
    by_order.push((1..=m).map(RootedTree::leaf).collect());
    for n in 1..=order {
        let mut level: Vec<RootedTree> = Vec::new();
        for a in 0..n {
            let b = n - 1 - a;
            for ta in &by_order[a] {
                for tb in &by_order[b] {
                    if ta <= tb {
                        level.push(RootedTree::node(ta.clone(), tb.clone()));
                        if level.len() > cap {
                            return Err(Error::Resource(format!(
                                "more than {cap} rooted generators at order {n}"
                            )));
                        }
                    }
                }
            }
        }
        level.sort();
        by_order.push(level);
    }
    Ok(by_order.pop().unwrap())
}

/// All canonical unrooted trees of the given order over labels 1..=m, sorted.
pub fn enumerate_trees(m: u32, order: usize, cap: usize) -> Result<Vec<CanonicalTree>> {
    let mut set = std::collections::BTreeSet::new();
    // Every unrooted tree of order n is <A,B> for canonical rooted A, B with
    // orders summing to n; splitting at the middle edge of the canonical
    // planting shows this generation is exhaustive.
    for a in 0..=order {
        let b = order - a;
        if a > b {
            break;
        }
        let left = enumerate_rooted(m, a, cap)?;
        let right = if a == b { left.clone() } else { enumerate_rooted(m, b, cap)? };
        for ta in &left {
            for tb in &right {
                if a == b && ta > tb {
                    continue;
                }
                let (c, _) = canonicalize_unrooted(ta, tb);
                set.insert(c);
                if set.len() > cap {
                    return Err(Error::Resource(format!(
                        "more than {cap} tree generators at order {order}"
                    )));
                }
            }
        }
    }
    Ok(set.into_iter().collect())
}

/// All ∞-trees of the given order (rooted trees up to sign), sorted.
pub fn enumerate_inf(m: u32, order: usize, cap: usize) -> Result<Vec<InfTree>> {
    Ok(enumerate_rooted(m, order, cap)?
        .into_iter()
        .map(|t| InfTree { body: t })
        .collect())
}

// ---------------------------------------------------------------------------
// IHX sites.
// ---------------------------------------------------------------------------

/// Four branches around an internal edge, in cyclic positions
/// (edge, a, b) / (edge, c, d) at its two endpoints.
pub struct IhxSite {
    pub a: RootedTree,
    pub b: RootedTree,
    pub c: RootedTree,
    pub d: RootedTree,
}

impl IhxSite {
    /// The IHX triple at this site as planted pairs; the relation among the
    /// corresponding trees is I − H + X = 0.
    pub fn triple(&self) -> [(RootedTree, RootedTree); 3] {
        let n = RootedTree::node;
        [
            (n(self.a.clone(), self.b.clone()), n(self.c.clone(), self.d.clone())),
            (n(self.a.clone(), self.c.clone()), n(self.b.clone(), self.d.clone())),
            (n(self.a.clone(), self.d.clone()), n(self.b.clone(), self.c.clone())),
        ]
    }
}

/// Internal-edge IHX sites of an unrooted tree `<left,right>`.
pub fn unrooted_ihx_sites(left: &RootedTree, right: &RootedTree) -> Vec<IhxSite> {
    plantings(left, right)
        .into_iter()
        .filter_map(|(s, t)| match (s, t) {
            (RootedTree::Node(a, b), RootedTree::Node(c, d)) => {
                Some(IhxSite { a: *a, b: *b, c: *c, d: *d })
            }
            _ => None,
        })
        .collect()
}

/// A rooted Jacobi site: I, H, X rooted trees differing by one IHX move, with
/// I = H − X as Lie brackets.
pub struct RootedJacobi {
    pub i: RootedTree,
    pub h: RootedTree,
    pub x: RootedTree,
}

/// All single-Jacobi-move triples of a rooted tree, one per internal edge
/// (edges between trivalent vertices; the root edge carries no site).
pub fn rooted_jacobi_sites(t: &RootedTree) -> Vec<RootedJacobi> {
    // Context: the path from the root down to the current subtree, as
    // (sibling, current_is_left) frames.
    fn rebuild(ctx: &[(RootedTree, bool)], mut core: RootedTree) -> RootedTree {
        for (sib, is_left) in ctx.iter().rev() {
            core = if *is_left {
                RootedTree::node(core, sib.clone())
            } else {
                RootedTree::node(sib.clone(), core)
            };
        }
        core
    }

    fn walk(t: &RootedTree, ctx: &mut Vec<(RootedTree, bool)>, out: &mut Vec<RootedJacobi>) {
        let RootedTree::Node(l, r) = t else { return };
        let n = RootedTree::node;
        if let RootedTree::Node(a, b) = &**l {
            // Site at the edge onto the left child: locally
            // [[A,B],S] = [[A,S],B] − [[B,S],A]  with S the sibling.
            let (a, b, s) = ((**a).clone(), (**b).clone(), (**r).clone());
            out.push(RootedJacobi {
                i: rebuild(ctx, n(n(a.clone(), b.clone()), s.clone())),
                h: rebuild(ctx, n(n(a.clone(), s.clone()), b.clone())),
                x: rebuild(ctx, n(n(b.clone(), s.clone()), a.clone())),
            });
        }
        if let RootedTree::Node(a, b) = &**r {
            // Edge onto the right child: [S,[A,B]] = [[B,S],A] − [[A,S],B].
            let (a, b, s) = ((**a).clone(), (**b).clone(), (**l).clone());
            out.push(RootedJacobi {
                i: rebuild(ctx, n(s.clone(), n(a.clone(), b.clone()))),
                h: rebuild(ctx, n(n(b.clone(), s.clone()), a.clone())),
                x: rebuild(ctx, n(n(a.clone(), s.clone()), b.clone())),
            });
        }
        ctx.push(((**r).clone(), true));
        walk(l, ctx, out);
        ctx.pop();
        ctx.push(((**l).clone(), false));
        walk(r, ctx, out);
        ctx.pop();
    }

    let mut out = Vec::new();
    walk(t, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rt(text: &str, m: u32) -> RootedTree {
        parse_rooted(text, m).unwrap()
    }

    #[test]
    fn parse_and_print_round_trip() {
        for text in ["(1,2)", "(1,(2,3))", "((1,2),(1,2))", "1"] {
            let t = rt(text, 3);
            assert_eq!(t.to_string(), text);
        }
        assert_eq!(rt("(1,2)", 2), RootedTree::node(RootedTree::leaf(1), RootedTree::leaf(2)));
        let t = rt("(1,(2,3))", 3);
        assert_eq!(t.order(), 2);
        assert!(matches!(t, RootedTree::Node(ref l, _) if matches!(**l, RootedTree::Leaf(_))));
    }

    #[test]
    fn parse_errors() {
        match parse_rooted("(1,(2,4))", 3) {
            Err(Error::LabelRange { label: 4, max: 3 }) => {}
            other => panic!("expected label range error, got {other:?}"),
        }
        match parse_rooted("(1,", 3) {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("expected syntax error, got {other:?}"),
        }
        assert!(parse_rooted("(1,2))", 3).is_err());
        // whitespace is fine
        assert!(parse_rooted(" ( 1 , ( 2 , 3 ) ) ", 3).is_ok());
    }

    #[test]
    fn rooted_product_order() {
        let i = rt("(1,2)", 3);
        let j = rt("3", 3);
        let p = rooted_product(&i, &j);
        assert_eq!(p.to_string(), "((1,2),3)");
        assert_eq!(p.order(), i.order() + j.order() + 1);
        let d = rooted_product(&i, &i);
        assert_eq!(d.to_string(), "((1,2),(1,2))");
    }

    #[test]
    fn inner_product_edge_tree() {
        let (c, sign) = inner_product(&rt("1", 2), &rt("2", 2));
        assert_eq!(sign, 1);
        assert_eq!(c.to_string(), "<1,2>");
        assert_eq!(c.order(), 0);
        assert!(!c.is_symmetric());
    }

    #[test]
    fn inner_product_y_tree() {
        let (c, _) = inner_product(&rt("(1,2)", 3), &rt("3", 3));
        assert_eq!(c.order(), 1);
        // Same unrooted tree as <1,(2,3)>.
        let (c2, _) = parse_unrooted("<1,(2,3)>", 3).unwrap();
        assert_eq!(c, c2);
    }

    #[test]
    fn as_swap_flips_sign() {
        let (c1, s1) = parse_unrooted("<1,(2,3)>", 3).unwrap();
        let (c2, s2) = parse_unrooted("<1,(3,2)>", 3).unwrap();
        assert_eq!(c1, c2);
        assert_eq!(s1, 1);
        assert_eq!(s2, -1);
        assert!(!c1.is_symmetric());
    }

    #[test]
    fn canonicalize_idempotent() {
        let (c, _) = parse_unrooted("<(3,1),(2,2)>", 3).unwrap();
        let (l, r) = c.halves();
        let (c2, s2) = canonicalize_unrooted(l, r);
        assert_eq!(c, c2);
        assert_eq!(s2, 1);
    }

    #[test]
    fn h_tree_symmetric_by_automorphism_enumeration() {
        // Independent oracle: generate every raw oriented representative of
        // the all-1 H-tree (all plantings, all per-vertex orientation flips)
        // and record which signs reach the canonical form.
        fn flips(t: &RootedTree) -> Vec<RootedTree> {
            match t {
                RootedTree::Leaf(_) => vec![t.clone()],
                RootedTree::Node(l, r) => {
                    let mut out = Vec::new();
                    for fl in flips(l) {
                        for fr in flips(r) {
                            out.push(RootedTree::node(fl.clone(), fr.clone()));
                            out.push(RootedTree::node(fr, fl.clone()));
                        }
                    }
                    out
                }
            }
        }
        let half = rt("(1,1)", 1);
        let base = plantings(&half, &half);
        let mut signs = std::collections::BTreeSet::new();
        let mut canon = std::collections::BTreeSet::new();
        for (a, b) in &base {
            for fa in flips(a) {
                for fb in flips(b) {
                    let (c, s) = canonicalize_unrooted(&fa, &fb);
                    // Count the flips applied relative to (a, b): parity is
                    // tracked by canonicalize itself, so just record output.
                    canon.insert(c);
                    signs.insert(s);
                }
            }
        }
        assert_eq!(canon.len(), 1);
        let c = canon.into_iter().next().unwrap();
        assert!(c.is_symmetric());
        // The symmetric convention returns +1 throughout.
        assert_eq!(signs.into_iter().collect::<Vec<_>>(), vec![1]);

        // The two-vertex odd automorphism is also visible before planting:
        let (hc, _) = inner_product(&rt("(1,1)", 1), &rt("(1,1)", 1));
        assert!(hc.is_symmetric());
        assert_eq!(hc, c);
    }

    #[test]
    fn y_tree_with_repeated_label_is_symmetric() {
        let (c, _) = parse_unrooted("<1,(2,2)>", 2).unwrap();
        assert!(c.is_symmetric());
        let (c2, _) = parse_unrooted("<2,(1,2)>", 2).unwrap();
        assert_eq!(c, c2);
    }

    #[test]
    fn enumerate_order0() {
        let trees = enumerate_trees(2, 0, 1000).unwrap();
        let shown: Vec<String> = trees.iter().map(|t| t.to_string()).collect();
        assert_eq!(shown, vec!["<1,1>", "<1,2>", "<2,2>"]);
    }

    #[test]
    fn enumerate_all1_order2_single_h() {
        let trees = enumerate_trees(1, 2, 1000).unwrap();
        assert_eq!(trees.len(), 1);
        assert!(trees[0].is_symmetric());
    }

    #[test]
    fn enumerate_inf_m1_order1() {
        let infs = enumerate_inf(1, 1, 1000).unwrap();
        assert_eq!(infs.len(), 1);
        assert_eq!(infs[0].to_string(), "inf((1,1))");
    }

    #[test]
    fn enumerate_matches_shape_labeling_brute_force() {
        // Build every leaf-labeled shape by iterated edge subdivision and
        // compare the canonical count with enumerate_trees.
        fn all_shapes(nleaves: usize) -> Vec<(RootedTree, RootedTree)> {
            // planted representation with leaves labeled by position 1..n
            let mut shapes: Vec<(RootedTree, RootedTree)> =
                vec![(RootedTree::leaf(1), RootedTree::leaf(2))];
            for next in 3..=nleaves as u32 {
                let mut grown = Vec::new();
                for (l, r) in &shapes {
                    for (pl, pr) in plantings(l, r) {
                        // insert the new leaf in the middle of this edge
                        grown.push((RootedTree::leaf(next), RootedTree::node(pl, pr)));
                    }
                }
                // Deduplicate: plantings of distinct-leaf shapes coincide only
                // via genuine isomorphism, which canonicalize detects.
                let mut seen = std::collections::BTreeSet::new();
                let mut uniq = Vec::new();
                for (l, r) in grown {
                    let (c, _) = canonicalize_unrooted(&l, &r);
                    if seen.insert(c) {
                        uniq.push((l, r));
                    }
                }
                shapes = uniq;
            }
            shapes
        }

        fn relabel(t: &RootedTree, map: &[u32]) -> RootedTree {
            match t {
                RootedTree::Leaf(l) => RootedTree::leaf(map[(l.get() - 1) as usize]),
                RootedTree::Node(a, b) => RootedTree::node(relabel(a, map), relabel(b, map)),
            }
        }

        for (m, order) in [(2u32, 1usize), (2, 2), (3, 1), (2, 3), (1, 3)] {
            let nleaves = order + 2;
            let shapes = all_shapes(nleaves);
            let dd: usize = (0..nleaves.saturating_sub(2))
                .map(|k| 2 * k + 1)
                .product::<usize>()
                .max(1);
            assert_eq!(shapes.len(), dd, "(2l-5)!! shape count");
            let mut set = std::collections::BTreeSet::new();
            let mut assignment = vec![1u32; nleaves];
            loop {
                for (l, r) in &shapes {
                    let (c, _) =
                        canonicalize_unrooted(&relabel(l, &assignment), &relabel(r, &assignment));
                    set.insert(c);
                }
                // next assignment in lexicographic order
                let mut i = 0;
                while i < nleaves {
                    if assignment[i] < m {
                        assignment[i] += 1;
                        break;
                    }
                    assignment[i] = 1;
                    i += 1;
                }
                if i == nleaves {
                    break;
                }
            }
            let fast = enumerate_trees(m, order, 100000).unwrap();
            assert_eq!(fast.len(), set.len(), "m={m} order={order}");
            assert_eq!(fast, set.into_iter().collect::<Vec<_>>());
        }
    }

    #[test]
    fn rooted_jacobi_site_count() {
        let t = rt("((1,2),(3,(4,5)))", 5);
        assert_eq!(rooted_jacobi_sites(&t).len(), t.order() - 1);
        assert_eq!(rooted_jacobi_sites(&rt("(1,2)", 2)).len(), 0);
    }

    #[test]
    fn resource_cap_enforced() {
        match enumerate_trees(3, 6, 10) {
            Err(Error::Resource(_)) => {}
            other => panic!("expected resource error, got {other:?}"),
        }
    }

    fn arb_tree(m: u32, max_order: usize) -> impl Strategy<Value = RootedTree> {
        let leaf = (1..=m).prop_map(RootedTree::leaf);
        leaf.prop_recursive(max_order as u32, (2 * max_order + 1) as u32, 2, |inner| {
            (inner.clone(), inner).prop_map(|(l, r)| RootedTree::node(l, r))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn all_plantings_agree(l in arb_tree(3, 3), r in arb_tree(3, 3)) {
            let (c0, s0) = canonicalize_unrooted(&l, &r);
            for (a, b) in plantings(&l, &r) {
                let (c, s) = canonicalize_unrooted(&a, &b);
                prop_assert_eq!(&c, &c0);
                prop_assert_eq!(s, s0);
            }
        }

        #[test]
        fn inner_product_is_unordered(l in arb_tree(3, 3), r in arb_tree(3, 3)) {
            let (c1, _) = inner_product(&l, &r);
            let (c2, _) = inner_product(&r, &l);
            prop_assert_eq!(&c1, &c2);
            prop_assert_eq!(c1.order(), l.order() + r.order());
        }

        #[test]
        fn single_flip_negates(l in arb_tree(2, 3), r in arb_tree(2, 3)) {
            // Flipping the children of the top vertex of a node side is one
            // AS move: same canonical tree, opposite sign unless symmetric.
            if let RootedTree::Node(a, b) = &l {
                let flipped = RootedTree::node((**b).clone(), (**a).clone());
                let (c1, s1) = canonicalize_unrooted(&l, &r);
                let (c2, s2) = canonicalize_unrooted(&flipped, &r);
                prop_assert_eq!(&c1, &c2);
                if c1.is_symmetric() {
                    prop_assert_eq!(s1, s2);
                } else {
                    prop_assert_eq!(s1, -s2);
                }
            }
        }
    }
}
