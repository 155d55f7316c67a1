//! The summation maps from tree groups into L_1 ⊗ L_{n+1}: sum over all
//! choices of root on trees, halved inner product on ∞-trees. Includes the
//! relation-by-relation well-definedness audit, surjectivity certification
//! onto the kernel lattice, and kernel bases of the induced map.

use crate::lie::{
    self, dn_lattice, hall_basis, rooted_to_lie, witt_rank, DnLattice, TensorElement,
};
use crate::linalg::{self, int, ColumnSolver, Int, Mat, SparseMat};
use crate::tree_groups::{
    structure_of_matrix, twisted_presentation, Generator, GroupStructure, Presentation,
};
use crate::trees::{plantings, rooted_product, CanonicalTree, InfTree, RootedTree};
use crate::{Error, Result};
use num_traits::Zero;

/// The per-vertex terms of the sum over roots: one (leaf label, planted
/// subtree) pair per univalent vertex of the unrooted tree `<l,r>`.
pub fn eta_terms(l: &RootedTree, r: &RootedTree) -> Vec<(u32, RootedTree)> {
    let mut out = Vec::new();
    for (a, b) in plantings(l, r) {
        if let RootedTree::Leaf(lab) = &a {
            out.push((lab.get(), b.clone()));
        }
        if let RootedTree::Leaf(lab) = &b {
            out.push((lab.get(), a.clone()));
        }
    }
    out
}

/// η of a raw oriented unrooted tree `<l,r>`: Σ_v X_{ℓ(v)} ⊗ B_v(t).
pub fn eta_raw(l: &RootedTree, r: &RootedTree, m: u32, cap: usize) -> Result<TensorElement> {
    let n = l.order() + r.order();
    let mut out = TensorElement::zero(m, n);
    for (label, planted) in eta_terms(l, r) {
        let e = rooted_to_lie(&planted, m, cap)?;
        out.add_tensor(label, &e, &int(1));
    }
    Ok(out)
}

/// η on a canonical tree generator.
pub fn eta_tree(t: &CanonicalTree, m: u32, cap: usize) -> Result<TensorElement> {
    let (l, r) = t.halves();
    eta_raw(l, r, m, cap)
}

/// η on an ∞-tree: half of η⟨J,J⟩; all coefficients must be even.
pub fn eta_inf(j: &InfTree, m: u32, cap: usize) -> Result<TensorElement> {
    eta_raw(j.body(), j.body(), m, cap)?.halve()
}

pub fn eta_generator(g: &Generator, m: u32, cap: usize) -> Result<TensorElement> {
    match g {
        Generator::Tree(t) => eta_tree(t, m, cap),
        Generator::Inf(t) => eta_inf(t, m, cap),
    }
}

/// η over twisted-presentation generators, with every image expressed in the
/// coordinates of the kernel lattice D_n.
pub struct EtaMatrix {
    pub m: u32,
    pub n: usize,
    pub presentation: Presentation,
    pub dn: DnLattice,
    pub images: Vec<TensorElement>,
    /// rank(D_n) × generators; column = image in D_n coordinates
    pub dn_columns: Mat,
}

pub fn eta_matrix(m: u32, n: usize, cap: usize) -> Result<EtaMatrix> {
    use rayon::prelude::*;
    let presentation = twisted_presentation(m, n, cap)?;
    let dn = dn_lattice(m, n, cap)?;
    let solver = ColumnSolver::new(&dn.basis);
    let dim = hall_basis(m, n + 1, cap)?.len();
    // Columns are independent; par_iter keeps generator order, so the matrix
    // is identical for any thread count.
    let images: Vec<TensorElement> = presentation
        .generators
        .par_iter()
        .map(|g| eta_generator(g, m, cap))
        .collect::<Result<_>>()?;
    let mut dn_columns = Mat::zeros(dn.rank(), presentation.generators.len());
    for (gi, (g, img)) in presentation.generators.iter().zip(&images).enumerate() {
        if !lie::bracket_map(img, cap)?.is_zero() {
            return Err(Error::Internal(format!(
                "η({g}) has nonzero bracket, image lies outside the kernel lattice"
            )));
        }
        let coords = solver.solve(&img.dense(dim)).ok_or_else(|| {
            Error::Internal(format!("η({g}) is not an integer combination of the D_n basis"))
        })?;
        for (ri, c) in coords.into_iter().enumerate() {
            dn_columns[(ri, gi)] = c;
        }
    }
    Ok(EtaMatrix { m, n, presentation, dn, images, dn_columns })
}

impl EtaMatrix {
    /// Whether the generator images span the full kernel lattice.
    pub fn surjective(&self) -> bool {
        let h = linalg::hnf_columns(&self.dn_columns);
        h == Mat::identity(self.dn.rank())
    }
}

/// One audited relation family.
#[derive(Debug, Clone)]
pub struct AuditFamily {
    pub name: String,
    pub checked: usize,
    pub failures: Vec<String>,
}

/// Outcome of the well-definedness audit at (m, n).
#[derive(Debug)]
pub struct AuditReport {
    pub m: u32,
    pub n: usize,
    pub families: Vec<AuditFamily>,
    pub image_in_dn: bool,
    pub surjective: bool,
}

impl AuditReport {
    pub fn ok(&self) -> bool {
        self.image_in_dn
            && self.surjective
            && self.families.iter().all(|f| f.failures.is_empty())
    }

    pub fn failures(&self) -> Vec<String> {
        self.families.iter().flat_map(|f| f.failures.iter().cloned()).collect()
    }
}

/// Verifies that η kills every relation row of the twisted presentation,
/// respects the symmetry relation (−J)∞ = J∞ directly, lands in D_n and
/// surjects onto it.
pub fn audit_well_defined(m: u32, n: usize, cap: usize) -> Result<AuditReport> {
    audit_presentation(&eta_matrix(m, n, cap)?, cap)
}

pub fn audit_presentation(em: &EtaMatrix, cap: usize) -> Result<AuditReport> {
    let m = em.m;
    let n = em.n;
    let p = &em.presentation;
    let mut families: std::collections::BTreeMap<String, AuditFamily> =
        std::collections::BTreeMap::new();
    for (kind, row) in &p.relations {
        let mut sum = TensorElement::zero(m, n);
        for (gi, c) in row {
            sum = sum.add(&em.images[*gi].scale(c));
        }
        let fam = families.entry(kind.to_string()).or_insert_with(|| AuditFamily {
            name: kind.to_string(),
            checked: 0,
            failures: Vec::new(),
        });
        fam.checked += 1;
        if !sum.is_zero() {
            let shown: Vec<String> = row
                .iter()
                .map(|(gi, c)| format!("{c}·{}", p.generators[*gi]))
                .collect();
            fam.failures.push(format!("{kind} row {} maps to a nonzero tensor", shown.join(" + ")));
        }
    }
    // Symmetry relation, checked on a flipped representative of each ∞-body.
    let mut sym = AuditFamily { name: "symmetry".into(), checked: 0, failures: Vec::new() };
    for g in &p.generators {
        let Generator::Inf(j) = g else { continue };
        let RootedTree::Node(a, b) = j.body() else { continue };
        let flipped = RootedTree::node((**b).clone(), (**a).clone());
        sym.checked += 1;
        let lhs = eta_raw(&flipped, &flipped, m, cap)?.halve()?;
        if lhs != eta_inf(j, m, cap)? {
            sym.failures.push(format!("η((−J)∞) ≠ η(J∞) for J = {}", j.body()));
        }
    }
    let mut out: Vec<AuditFamily> = families.into_values().collect();
    out.push(sym);
    Ok(AuditReport {
        m,
        n,
        families: out,
        // eta_matrix construction would have errored otherwise
        image_in_dn: true,
        surjective: em.surjective(),
    })
}

/// The kernel of the induced map on the twisted tree group, presented as a
/// group together with representatives and, in orders n = 4k−2, the matching
/// against the symmetric ∞-trees (J,J)∞.
pub struct KerEta {
    pub m: u32,
    pub n: usize,
    pub presentation: Presentation,
    /// structure of the kernel subgroup
    pub group: GroupStructure,
    /// representatives of the kernel-group coordinates, in generator coords
    pub basis_reps: Vec<Vec<Int>>,
    kernel_basis: Mat,
    solver: ColumnSolver,
    pub symmetric_match: Option<ArfBasis>,
}

/// The expected kernel generators (J,J)∞, one per Lyndon-basis bracket J of
/// degree k, with their coordinates in the kernel group. `verified` means the
/// kernel is elementary 2-torsion of dimension rank(L_k) and these span it.
pub struct ArfBasis {
    pub k: usize,
    pub roots: Vec<RootedTree>,
    pub coords: Vec<Vec<Int>>,
    pub verified: bool,
}

pub fn ker_eta(m: u32, n: usize, cap: usize) -> Result<KerEta> {
    ker_eta_of(eta_matrix(m, n, cap)?, cap)
}

pub fn ker_eta_of(em: EtaMatrix, cap: usize) -> Result<KerEta> {
    let m = em.m;
    let n = em.n;
    let p = em.presentation;
    let g = p.generators.len();
    let dim = hall_basis(m, n + 1, cap)?.len();
    // Integer kernel of η on the generator lattice.
    let mut rows: Vec<Vec<(usize, Int)>> = vec![Vec::new(); m as usize * dim];
    for (gi, img) in em.images.iter().enumerate() {
        for ((i, idx), c) in img.coords() {
            rows[(*i as usize - 1) * dim + idx].push((gi, c.clone()));
        }
    }
    let mut e = SparseMat::new(g);
    for row in rows {
        e.push_row(row);
    }
    let kb = linalg::kernel_basis(&e);
    let solver = ColumnSolver::new(&kb);
    // Relation rows all lie in the kernel (η is well-defined); express them
    // in the kernel basis to present the kernel subgroup.
    let mut krel = SparseMat::new(kb.cols);
    for (_, row) in &p.relations {
        let mut x = vec![Int::zero(); g];
        for (gi, c) in row {
            x[*gi] += c;
        }
        let y = solver.solve(&x).ok_or_else(|| {
            Error::Internal("relation row escapes the kernel of η".into())
        })?;
        krel.push_row(y.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect());
    }
    let group = structure_of_matrix(&krel);
    let basis_reps: Vec<Vec<Int>> = (0..group.coord_len())
        .map(|k| kb.mul_vec(&group.coordinate_representative(k)))
        .collect();

    let symmetric_match = if n % 4 == 2 {
        let karf = (n + 2) / 4;
        // One (J,J)∞ per Lyndon-basis bracket J of degree k: these exhibit
        // the isomorphism Z_2 ⊗ L_k ≅ Ker, not just a cardinality match.
        let roots: Vec<RootedTree> = lie::lyndon_words(m, karf)
            .iter()
            .map(|w| lie::standard_bracketing(w))
            .collect();
        let mut coords = Vec::with_capacity(roots.len());
        let mut all_in = true;
        for j in roots.iter() {
            let jj = InfTree::new(&rooted_product(j, j));
            let idx = p.inf_index(&jj).ok_or_else(|| {
                Error::Internal(format!("∞-tree {jj} missing from generator list"))
            })?;
            let mut x = vec![Int::zero(); g];
            x[idx] = int(1);
            match solver.solve(&x) {
                Some(y) => coords.push(group.reduce(&y)),
                None => {
                    all_in = false;
                    coords.push(vec![]);
                }
            }
        }
        // Elementary 2-group of the right dimension, spanned by the (J,J)∞.
        let expect_dim = witt_rank(m, karf);
        let shape_ok = group.rank == 0
            && group.torsion.iter().all(|d| *d == int(2))
            && int(group.torsion.len() as i64) == expect_dim;
        let span_ok = all_in && {
            let mut extended = krel.clone();
            for j in roots.iter() {
                let jj = InfTree::new(&rooted_product(j, j));
                let idx = p.inf_index(&jj).unwrap();
                let mut x = vec![Int::zero(); g];
                x[idx] = int(1);
                let y = solver.solve(&x).unwrap();
                extended
                    .push_row(y.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect());
            }
            let quot = structure_of_matrix(&extended);
            quot.rank == 0 && quot.torsion.is_empty()
        };
        Some(ArfBasis { k: karf, roots, coords, verified: shape_ok && span_ok })
    } else {
        None
    };

    Ok(KerEta {
        m,
        n,
        presentation: p,
        group,
        basis_reps,
        kernel_basis: kb,
        solver,
        symmetric_match,
    })
}

impl KerEta {
    /// Kernel-group coordinates of a generator-coordinate vector, or None
    /// when the element is not in the kernel of η.
    pub fn kernel_coords(&self, x: &[Int]) -> Option<Vec<Int>> {
        self.solver.solve(x).map(|y| self.group.reduce(&y))
    }

    pub fn kernel_rank(&self) -> usize {
        self.kernel_basis.cols
    }

    /// Whether the induced map is injective (trivial kernel group).
    pub fn trivial(&self) -> bool {
        self.group.rank == 0 && self.group.torsion.is_empty()
    }
}

/// Solves Σ a_j col_j = target over GF(2). Columns and target are coordinate
/// vectors whose entries are read mod 2.
pub fn solve_mod2(columns: &[Vec<Int>], target: &[Int]) -> Option<Vec<u8>> {
    let rows = target.len();
    let cols = columns.len();
    let mut a: Vec<Vec<u8>> = (0..rows)
        .map(|r| {
            let mut row: Vec<u8> = columns.iter().map(|c| parity(&c[r])).collect();
            row.push(parity(&target[r]));
            row
        })
        .collect();
    let mut pivot_of_col = vec![None; cols];
    let mut r = 0;
    for c in 0..cols {
        if let Some(pr) = (r..rows).find(|&i| a[i][c] == 1) {
            a.swap(r, pr);
            for i in 0..rows {
                if i != r && a[i][c] == 1 {
                    for j in 0..=cols {
                        a[i][j] ^= a[r][j];
                    }
                }
            }
            pivot_of_col[c] = Some(r);
            r += 1;
        }
    }
    // consistency
    for i in r..rows {
        if a[i][cols] == 1 {
            return None;
        }
    }
    let mut sol = vec![0u8; cols];
    for c in 0..cols {
        if let Some(pr) = pivot_of_col[c] {
            sol[c] = a[pr][cols];
        }
    }
    Some(sol)
}

fn parity(x: &Int) -> u8 {
    if num_integer::Integer::is_odd(x) {
        1
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{lie_bracket, LieElement};
    use crate::trees::{parse_rooted, parse_unrooted};

    const CAP: usize = 1 << 20;

    fn lie_of(text: &str, m: u32) -> LieElement {
        rooted_to_lie(&parse_rooted(text, m).unwrap(), m, CAP).unwrap()
    }

    #[test]
    fn eta_y_tree_worked_example() {
        // η₁⟨(1,2),3⟩ = X₁⊗[X₂,X₃] + X₂⊗[X₃,X₁] + X₃⊗[X₁,X₂]
        let (t, _) = parse_unrooted("<(1,2),3>", 3).unwrap();
        let got = eta_tree(&t, 3, CAP).unwrap();
        let mut want = TensorElement::zero(3, 1);
        want.add_tensor(1, &lie_of("(2,3)", 3), &int(1));
        want.add_tensor(2, &lie_of("(3,1)", 3), &int(1));
        want.add_tensor(3, &lie_of("(1,2)", 3), &int(1));
        assert_eq!(got, want);

        // and term-for-term on the raw planted pairs
        let (l, r) = t.halves();
        let mut terms: Vec<(u32, String)> =
            eta_terms(l, r).into_iter().map(|(i, b)| (i, b.to_string())).collect();
        terms.sort();
        assert_eq!(
            terms,
            vec![
                (1, "(2,3)".to_string()),
                (2, "(3,1)".to_string()),
                (3, "(1,2)".to_string())
            ]
        );
    }

    #[test]
    fn eta_inf_worked_example() {
        // η₂((1,2)∞) = X₁⊗[X₂,[X₁,X₂]] + X₂⊗[[X₁,X₂],X₁]
        let j = InfTree::new(&parse_rooted("(1,2)", 2).unwrap());
        let got = eta_inf(&j, 2, CAP).unwrap();
        let mut want = TensorElement::zero(2, 2);
        want.add_tensor(1, &lie_of("(2,(1,2))", 2), &int(1));
        want.add_tensor(2, &lie_of("((1,2),1)", 2), &int(1));
        assert_eq!(got, want);
        assert!(!got.is_zero());
    }

    #[test]
    fn eta_boundary_twist_shape_vanishes() {
        let (t, _) = parse_unrooted("<(1,2),2>", 2).unwrap();
        assert!(eta_tree(&t, 2, CAP).unwrap().is_zero());
    }

    #[test]
    fn eta_order0() {
        let (t, _) = parse_unrooted("<1,2>", 2).unwrap();
        let got = eta_tree(&t, 2, CAP).unwrap();
        let mut want = TensorElement::zero(2, 0);
        want.add_tensor(1, &LieElement::generator(2, 2), &int(1));
        want.add_tensor(2, &LieElement::generator(2, 1), &int(1));
        assert_eq!(got, want);

        let one_inf = InfTree::new(&RootedTree::leaf(1));
        let got = eta_inf(&one_inf, 2, CAP).unwrap();
        let mut want = TensorElement::zero(2, 0);
        want.add_tensor(1, &LieElement::generator(2, 1), &int(1));
        assert_eq!(got, want);
    }

    #[test]
    fn eta_symmetric_inf_vanishes() {
        let j = InfTree::new(&parse_rooted("(1,1)", 1).unwrap());
        assert!(eta_inf(&j, 1, CAP).unwrap().is_zero());
    }

    #[test]
    fn audit_small_cases() {
        for (m, n) in [(2u32, 1usize), (2, 2), (1, 2), (2, 0), (3, 1)] {
            let report = audit_well_defined(m, n, CAP).unwrap();
            assert!(report.ok(), "audit failed at m={m} n={n}: {:?}", report.failures());
        }
    }

    #[test]
    fn audit_reports_injected_sign_fault() {
        // Corrupt one η column and check the audit catches it on some row.
        let mut em = eta_matrix(2, 2, CAP).unwrap();
        let bad = em
            .presentation
            .generators
            .iter()
            .enumerate()
            .position(|(gi, g)| matches!(g, Generator::Inf(_)) && !em.images[gi].is_zero())
            .unwrap();
        em.images[bad] = em.images[bad].scale(&int(-1));
        // (1,2)∞ is not 2-torsion in the tensor target, so flipping its sign
        // breaks interior-twist rows.
        let report = audit_presentation(&em, CAP).unwrap();
        assert!(!report.ok());
        assert!(!report.failures().is_empty());
    }

    #[test]
    fn eta_matrix_surjectivity() {
        assert!(eta_matrix(3, 1, CAP).unwrap().surjective());
        assert!(eta_matrix(2, 2, CAP).unwrap().surjective());
        assert!(eta_matrix(1, 2, CAP).unwrap().surjective()); // rank-0 target
    }

    #[test]
    fn kernel_m1_n2_is_z2_generated_by_11inf() {
        let k = ker_eta(1, 2, CAP).unwrap();
        assert_eq!(k.group.rank, 0);
        assert_eq!(k.group.torsion, vec![int(2)]);
        let m = k.symmetric_match.as_ref().unwrap();
        assert!(m.verified);
        assert_eq!(m.roots.len(), 1);
        assert_eq!(m.coords[0], vec![int(1)]);
    }

    #[test]
    fn kernel_m2_n2_is_z2_squared() {
        let k = ker_eta(2, 2, CAP).unwrap();
        assert_eq!(k.group.rank, 0);
        assert_eq!(k.group.torsion, vec![int(2), int(2)]);
        let m = k.symmetric_match.as_ref().unwrap();
        assert!(m.verified);
        assert_eq!(m.roots.len(), 2);
    }

    #[test]
    fn kernel_trivial_in_isomorphism_range() {
        for (m, n) in [(2u32, 0usize), (2, 1), (3, 0), (2, 3), (2, 4)] {
            let k = ker_eta(m, n, CAP).unwrap();
            assert!(k.trivial(), "kernel not trivial at m={m} n={n}");
        }
    }

    #[test]
    fn solve_mod2_small() {
        let cols = vec![vec![int(1), int(0)], vec![int(1), int(1)]];
        let sol = solve_mod2(&cols, &[int(0), int(1)]).unwrap();
        assert_eq!(sol, vec![1, 1]);
        assert_eq!(solve_mod2(&cols[..1].to_vec(), &[int(0), int(1)]), None);
    }

    mod props {
        use super::*;
        use crate::trees::canonicalize_unrooted;
        use proptest::prelude::*;

        fn arb_tree(m: u32, max_order: usize) -> impl Strategy<Value = RootedTree> {
            let leaf = (1..=m).prop_map(RootedTree::leaf);
            leaf.prop_recursive(max_order as u32, (2 * max_order + 1) as u32, 2, |inner| {
                (inner.clone(), inner).prop_map(|(l, r)| RootedTree::node(l, r))
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            // η of a raw oriented tree equals the canonicalization sign times
            // η of the canonical representative: the sum over roots is
            // AS-equivariant, so any sign bug in canonicalize breaks this.
            #[test]
            fn eta_respects_canonicalization_sign(
                l in arb_tree(2, 2), r in arb_tree(2, 2)) {
                let raw = eta_raw(&l, &r, 2, CAP).unwrap();
                let (c, sign) = canonicalize_unrooted(&l, &r);
                let canon = eta_tree(&c, 2, CAP).unwrap().scale(&int(sign as i64));
                prop_assert_eq!(raw, canon);
            }
        }
    }
}
