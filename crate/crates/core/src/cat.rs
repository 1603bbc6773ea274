//! Finite categories with chosen finite-product structure, functors and
//! natural transformations, all verified by exhaustive checking.
//!
//! Products are *chosen* witness tables, not re-derived per call: the
//! downstream constructions (comultiplication as a diagonal paired with an
//! identity, the squiggly Kleisli composition) are written against chosen
//! projections, and equality tests in uniqueness checks need determinism.
//! A category may carry no product structure at all (the generic Kleisli
//! base), or a partial table when it is a probe-restricted fragment of a
//! large category; quantified checks then range over what is present.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CatError {
    #[error("duplicate object id `{0}`")]
    DuplicateObject(String),
    #[error("duplicate arrow id `{0}`")]
    DuplicateArrow(String),
    #[error("unknown object id `{0}`")]
    UnknownObject(String),
    #[error("unknown arrow id `{0}`")]
    UnknownArrow(String),
    #[error("identity violation: id of `{0}` is not neutral for `{1}`")]
    IdentityViolation(String, String),
    #[error("composition undefined for composable pair ({1} then {0})")]
    CompositionUndefined(String, String),
    #[error("composition table entry ({0}, {1}) is not composable")]
    NotComposable(String, String),
    #[error("composite of ({1} then {0}) has wrong endpoints")]
    IllTypedComposite(String, String),
    #[error("associativity violation at ({0}, {1}, {2})")]
    AssociativityViolation(String, String, String),
    #[error("terminal object not terminal: hom from `{0}` has {1} arrows")]
    TerminalNotUnique(String, usize),
    #[error("product UMP violation for ({0}, {1}): {2}")]
    ProductUmpViolation(String, String, String),
    #[error("no product witness recorded for ({0}, {1})")]
    ProductMissing(String, String),
    #[error("functor law violation: {0}")]
    FunctorLawViolation(String),
    #[error("functor does not preserve products: {0}")]
    ProductsNotPreserved(String),
    #[error("naturality square violation at arrow `{0}`")]
    NaturalitySquareViolation(String),
    #[error("operation requires meets and a top element")]
    MeetsRequired,
    #[error("no pairing arrow found for ({0}, {1})")]
    PairingMissing(String, String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrow {
    pub name: String,
    pub src: usize,
    pub tgt: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductWitness {
    pub obj: usize,
    pub pr1: usize,
    pub pr2: usize,
}

/// Chosen terminal and binary-product structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductStructure {
    pub terminal: usize,
    /// Per object: the chosen arrow into the terminal.
    pub bang: Vec<usize>,
    pub products: HashMap<(usize, usize), ProductWitness>,
}

/// A finite category given by explicit tables, optionally carrying chosen
/// product structure. `total` records whether the category claims to be a
/// complete presentation (hand-built inputs) or a probe-restricted
/// fragment of something larger (the materialized powerset base); checks
/// quantify over what is present either way.
pub struct FiniteCategory {
    pub objects: Vec<String>,
    pub arrows: Vec<Arrow>,
    pub identities: Vec<usize>,
    pub compose: HashMap<(usize, usize), usize>,
    pub products: Option<ProductStructure>,
    pub total: bool,
    obj_index: HashMap<String, usize>,
    arr_index: HashMap<String, usize>,
    /// Memoized pairing table `(f, g) -> <f, g>`, filled on first use.
    pairing_cache: OnceLock<HashMap<(usize, usize), usize>>,
    /// Memoized hom-sets, filled on first use.
    hom_index: OnceLock<HashMap<(usize, usize), Vec<usize>>>,
}

impl Clone for FiniteCategory {
    fn clone(&self) -> Self {
        FiniteCategory {
            objects: self.objects.clone(),
            arrows: self.arrows.clone(),
            identities: self.identities.clone(),
            compose: self.compose.clone(),
            products: self.products.clone(),
            total: self.total,
            obj_index: self.obj_index.clone(),
            arr_index: self.arr_index.clone(),
            pairing_cache: OnceLock::new(),
            hom_index: OnceLock::new(),
        }
    }
}

impl PartialEq for FiniteCategory {
    fn eq(&self, other: &Self) -> bool {
        self.objects == other.objects
            && self.arrows == other.arrows
            && self.identities == other.identities
            && self.compose == other.compose
            && self.products == other.products
    }
}

impl fmt::Debug for FiniteCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FiniteCategory({} objects, {} arrows{})",
            self.objects.len(),
            self.arrows.len(),
            if self.products.is_some() { ", with products" } else { "" }
        )
    }
}

impl FiniteCategory {
    /// Assembles a category from raw tables without validating the axioms;
    /// call [`FiniteCategory::validate`] afterwards. Identity arrows must
    /// already be present in `arrows`.
    pub fn assemble(
        objects: Vec<String>,
        arrows: Vec<Arrow>,
        identities: Vec<usize>,
        compose: HashMap<(usize, usize), usize>,
        products: Option<ProductStructure>,
        total: bool,
    ) -> Result<Self, CatError> {
        let mut obj_index = HashMap::new();
        for (i, o) in objects.iter().enumerate() {
            if obj_index.insert(o.clone(), i).is_some() {
                return Err(CatError::DuplicateObject(o.clone()));
            }
        }
        let mut arr_index = HashMap::new();
        for (i, a) in arrows.iter().enumerate() {
            if arr_index.insert(a.name.clone(), i).is_some() {
                return Err(CatError::DuplicateArrow(a.name.clone()));
            }
        }
        Ok(FiniteCategory {
            objects,
            arrows,
            identities,
            compose,
            products,
            total,
            obj_index,
            arr_index,
            pairing_cache: OnceLock::new(),
            hom_index: OnceLock::new(),
        })
    }

    pub fn object_index(&self, name: &str) -> Option<usize> {
        self.obj_index.get(name).copied()
    }

    pub fn arrow_index(&self, name: &str) -> Option<usize> {
        self.arr_index.get(name).copied()
    }

    pub fn arrow(&self, i: usize) -> &Arrow {
        &self.arrows[i]
    }

    pub fn object(&self, i: usize) -> &str {
        &self.objects[i]
    }

    pub fn id_of(&self, obj: usize) -> usize {
        self.identities[obj]
    }

    /// `g . f` (first `f`, then `g`). Panics if the entry is absent; use
    /// only on validated categories.
    pub fn comp(&self, g: usize, f: usize) -> usize {
        *self
            .compose
            .get(&(g, f))
            .unwrap_or_else(|| panic!(
                "composition missing: {} . {}",
                self.arrows[g].name, self.arrows[f].name
            ))
    }

    pub fn try_comp(&self, g: usize, f: usize) -> Option<usize> {
        self.compose.get(&(g, f)).copied()
    }

    pub fn hom(&self, a: usize, b: usize) -> Vec<usize> {
        let index = self.hom_index.get_or_init(|| {
            let mut map: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
            for (i, arr) in self.arrows.iter().enumerate() {
                map.entry((arr.src, arr.tgt)).or_default().push(i);
            }
            map
        });
        index.get(&(a, b)).cloned().unwrap_or_default()
    }

    pub fn terminal(&self) -> Option<usize> {
        self.products.as_ref().map(|p| p.terminal)
    }

    pub fn bang(&self, obj: usize) -> Option<usize> {
        self.products.as_ref().map(|p| p.bang[obj])
    }

    pub fn product(&self, a: usize, b: usize) -> Option<&ProductWitness> {
        self.products.as_ref()?.products.get(&(a, b))
    }

    /// The pairing `<f, g>` into the chosen product of the targets: the
    /// unique arrow `u` with `pr1 . u = f` and `pr2 . u = g`. Uniqueness is
    /// guaranteed by validation; this is a deterministic memoized lookup.
    pub fn pairing(&self, f: usize, g: usize) -> Result<usize, CatError> {
        let (fa, ga) = (&self.arrows[f], &self.arrows[g]);
        assert_eq!(fa.src, ga.src, "pairing of arrows with different sources");
        if self.product(fa.tgt, ga.tgt).is_none() {
            return Err(CatError::ProductMissing(
                self.objects[fa.tgt].clone(),
                self.objects[ga.tgt].clone(),
            ));
        }
        let cache = self.pairing_cache.get_or_init(|| {
            let mut table = HashMap::new();
            let Some(ps) = &self.products else { return table };
            for w in ps.products.values() {
                for (u, arr) in self.arrows.iter().enumerate() {
                    if arr.tgt != w.obj {
                        continue;
                    }
                    if let (Some(pf), Some(pg)) = (self.try_comp(w.pr1, u), self.try_comp(w.pr2, u))
                    {
                        table.entry((pf, pg)).or_insert(u);
                    }
                }
            }
            table
        });
        cache
            .get(&(f, g))
            .copied()
            .ok_or_else(|| CatError::PairingMissing(fa.name.clone(), ga.name.clone()))
    }

    /// Validates the category axioms and, when product structure is
    /// present, the terminal and product universal properties, all by
    /// enumeration over the tables that are present.
    pub fn validate(&self) -> Result<(), CatError> {
        let n = self.arrows.len();
        // Identities are well typed and neutral.
        for (o, &i) in self.identities.iter().enumerate() {
            let a = &self.arrows[i];
            if a.src != o || a.tgt != o {
                return Err(CatError::IdentityViolation(
                    self.objects[o].clone(),
                    a.name.clone(),
                ));
            }
        }
        // Composition defined exactly when composable, well typed.
        for g in 0..n {
            for f in 0..n {
                let composable = self.arrows[f].tgt == self.arrows[g].src;
                match self.compose.get(&(g, f)) {
                    Some(&h) => {
                        if !composable {
                            return Err(CatError::NotComposable(
                                self.arrows[g].name.clone(),
                                self.arrows[f].name.clone(),
                            ));
                        }
                        let ha = &self.arrows[h];
                        if ha.src != self.arrows[f].src || ha.tgt != self.arrows[g].tgt {
                            return Err(CatError::IllTypedComposite(
                                self.arrows[g].name.clone(),
                                self.arrows[f].name.clone(),
                            ));
                        }
                    }
                    None => {
                        if composable {
                            return Err(CatError::CompositionUndefined(
                                self.arrows[g].name.clone(),
                                self.arrows[f].name.clone(),
                            ));
                        }
                    }
                }
            }
        }
        // Identities neutral.
        for f in 0..n {
            let a = &self.arrows[f];
            if self.try_comp(f, self.identities[a.src]) != Some(f)
                || self.try_comp(self.identities[a.tgt], f) != Some(f)
            {
                return Err(CatError::IdentityViolation(
                    self.objects[a.src].clone(),
                    a.name.clone(),
                ));
            }
        }
        // Associativity over all composable triples, iterating the
        // composition table rather than all arrow triples.
        let mut from: HashMap<usize, Vec<usize>> = HashMap::new();
        for (i, arr) in self.arrows.iter().enumerate() {
            from.entry(arr.src).or_default().push(i);
        }
        for (&(g, f), &gf) in &self.compose {
            for &h in from.get(&self.arrows[g].tgt).map(|v| v.as_slice()).unwrap_or(&[]) {
                let hg = self.comp(h, g);
                if self.comp(h, gf) != self.comp(hg, f) {
                    return Err(CatError::AssociativityViolation(
                        self.arrows[f].name.clone(),
                        self.arrows[g].name.clone(),
                        self.arrows[h].name.clone(),
                    ));
                }
            }
        }
        if let Some(ps) = &self.products {
            self.validate_products(ps)?;
        }
        Ok(())
    }

    fn validate_products(&self, ps: &ProductStructure) -> Result<(), CatError> {
        // bang(A) is the unique arrow A -> terminal.
        for (o, &b) in ps.bang.iter().enumerate() {
            let a = &self.arrows[b];
            if a.src != o || a.tgt != ps.terminal {
                return Err(CatError::TerminalNotUnique(self.objects[o].clone(), 0));
            }
            let count = self.hom(o, ps.terminal).len();
            if count != 1 {
                return Err(CatError::TerminalNotUnique(self.objects[o].clone(), count));
            }
        }
        for (&(a, b), w) in &ps.products {
            let p1 = &self.arrows[w.pr1];
            let p2 = &self.arrows[w.pr2];
            if p1.src != w.obj || p1.tgt != a || p2.src != w.obj || p2.tgt != b {
                return Err(CatError::ProductUmpViolation(
                    self.objects[a].clone(),
                    self.objects[b].clone(),
                    "ill-typed projections".to_string(),
                ));
            }
            // For every cone (f, g) from C there is exactly one mediating
            // arrow among the arrows present. One pass over the arrows
            // into the product object counts mediators per cone.
            let mut mediators: HashMap<(usize, usize), usize> = HashMap::new();
            for (u, arr) in self.arrows.iter().enumerate() {
                if arr.tgt != w.obj {
                    continue;
                }
                if let (Some(f), Some(g)) = (self.try_comp(w.pr1, u), self.try_comp(w.pr2, u)) {
                    *mediators.entry((f, g)).or_insert(0) += 1;
                }
            }
            for c in 0..self.objects.len() {
                for &f in &self.hom(c, a) {
                    for &g in &self.hom(c, b) {
                        let count = mediators.get(&(f, g)).copied().unwrap_or(0);
                        if count != 1 {
                            return Err(CatError::ProductUmpViolation(
                                self.objects[a].clone(),
                                self.objects[b].clone(),
                                format!(
                                    "cone ({}, {}) from {} has {} mediating arrows",
                                    self.arrows[f].name,
                                    self.arrows[g].name,
                                    self.objects[c],
                                    count
                                ),
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// The terminal category: one object, its identity.
    pub fn terminal_category() -> Self {
        let objects = vec!["*".to_string()];
        let arrows = vec![Arrow { name: "id_*".to_string(), src: 0, tgt: 0 }];
        let mut compose = HashMap::new();
        compose.insert((0, 0), 0);
        let mut products = ProductStructure {
            terminal: 0,
            bang: vec![0],
            products: HashMap::new(),
        };
        products.products.insert((0, 0), ProductWitness { obj: 0, pr1: 0, pr2: 0 });
        FiniteCategory::assemble(objects, arrows, vec![0], compose, Some(products), true).unwrap()
    }
}

/// Views a finite meet-semilattice (a poset with meets and a top) as a
/// category with finite products: one arrow `a -> b` whenever `a <= b`,
/// terminal = top, `a x b = a /\ b`. Products involving the top element
/// are normalized to the other factor so that `t x a = a = a x t` holds on
/// the nose, which the axiom-forcing special case relies on.
pub fn semilattice_to_category(
    p: &crate::order::FinitePoset,
    cert: &crate::order::LatticeCertificate,
) -> Result<FiniteCategory, CatError> {
    if !cert.has_meets() {
        return Err(CatError::MeetsRequired);
    }
    let n = p.len();
    let meet = cert.meet.as_ref().unwrap();
    let top = cert.top.unwrap();
    let objects: Vec<String> = p.elements().to_vec();
    let mut arrows = Vec::new();
    let mut arr_at = HashMap::new();
    for a in 0..n {
        for b in 0..n {
            if p.leq_idx(a, b) {
                arr_at.insert((a, b), arrows.len());
                arrows.push(Arrow {
                    name: if a == b {
                        format!("id_{}", p.element(a))
                    } else {
                        format!("{}<={}", p.element(a), p.element(b))
                    },
                    src: a,
                    tgt: b,
                });
            }
        }
    }
    let identities: Vec<usize> = (0..n).map(|a| arr_at[&(a, a)]).collect();
    let mut compose = HashMap::new();
    for (&(a, b), &f) in &arr_at {
        for (&(b2, c), &g) in &arr_at {
            if b == b2 {
                compose.insert((g, f), arr_at[&(a, c)]);
            }
        }
    }
    let bang: Vec<usize> = (0..n).map(|a| arr_at[&(a, top)]).collect();
    let mut products = HashMap::new();
    for a in 0..n {
        for b in 0..n {
            let m = if a == top {
                b
            } else if b == top {
                a
            } else {
                meet[a * n + b]
            };
            products.insert(
                (a, b),
                ProductWitness { obj: m, pr1: arr_at[&(m, a)], pr2: arr_at[&(m, b)] },
            );
        }
    }
    let cat = FiniteCategory::assemble(
        objects,
        arrows,
        identities,
        compose,
        Some(ProductStructure { terminal: top, bang, products }),
        true,
    )?;
    cat.validate()?;
    Ok(cat)
}

/// A functor between finite categories, tabulated on objects and arrows.
#[derive(Clone, PartialEq)]
pub struct Functor {
    pub source: Arc<FiniteCategory>,
    pub target: Arc<FiniteCategory>,
    pub obj_map: Vec<usize>,
    pub arr_map: Vec<usize>,
}

impl fmt::Debug for Functor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Functor({} -> {} objects)",
            self.source.objects.len(),
            self.target.objects.len()
        )
    }
}

impl Functor {
    pub fn identity(c: &Arc<FiniteCategory>) -> Self {
        Functor {
            source: c.clone(),
            target: c.clone(),
            obj_map: (0..c.objects.len()).collect(),
            arr_map: (0..c.arrows.len()).collect(),
        }
    }

    pub fn on_obj(&self, o: usize) -> usize {
        self.obj_map[o]
    }

    pub fn on_arr(&self, f: usize) -> usize {
        self.arr_map[f]
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &Functor) -> Functor {
        assert!(other.target.as_ref() == self.source.as_ref());
        Functor {
            source: other.source.clone(),
            target: self.target.clone(),
            obj_map: other.obj_map.iter().map(|&o| self.obj_map[o]).collect(),
            arr_map: other.arr_map.iter().map(|&f| self.arr_map[f]).collect(),
        }
    }

    /// Verifies functor laws; with `require_products`, also verifies that
    /// the image of the terminal is terminal and that each canonical
    /// comparison `<F(pr1), F(pr2)>` is invertible.
    pub fn validate(&self, require_products: bool) -> Result<(), CatError> {
        let src = &self.source;
        let tgt = &self.target;
        for (o, &fo) in self.obj_map.iter().enumerate() {
            if fo >= tgt.objects.len() {
                return Err(CatError::UnknownObject(src.objects[o].clone()));
            }
        }
        for (i, &fi) in self.arr_map.iter().enumerate() {
            let a = &src.arrows[i];
            let fa = &tgt.arrows[fi];
            if fa.src != self.obj_map[a.src] || fa.tgt != self.obj_map[a.tgt] {
                return Err(CatError::FunctorLawViolation(format!(
                    "image of `{}` has wrong endpoints",
                    a.name
                )));
            }
        }
        for (o, &i) in src.identities.iter().enumerate() {
            if self.arr_map[i] != tgt.identities[self.obj_map[o]] {
                return Err(CatError::FunctorLawViolation(format!(
                    "identity of `{}` not preserved",
                    src.objects[o]
                )));
            }
        }
        for (&(g, f), &h) in &src.compose {
            let fg = tgt.try_comp(self.arr_map[g], self.arr_map[f]);
            if fg != Some(self.arr_map[h]) {
                return Err(CatError::FunctorLawViolation(format!(
                    "composition `{} . {}` not preserved",
                    src.arrows[g].name, src.arrows[f].name
                )));
            }
        }
        if require_products {
            self.validate_products()?;
        }
        Ok(())
    }

    fn validate_products(&self) -> Result<(), CatError> {
        let src = &self.source;
        let tgt = &self.target;
        let sp = src.products.as_ref().ok_or(CatError::MeetsRequired)?;
        let _tp = tgt.products.as_ref().ok_or(CatError::MeetsRequired)?;
        // F(terminal) is terminal: exactly one arrow into it from each object.
        let ft = self.obj_map[sp.terminal];
        for o in 0..tgt.objects.len() {
            let count = tgt.hom(o, ft).len();
            if count != 1 {
                return Err(CatError::ProductsNotPreserved(format!(
                    "image of terminal is not terminal (hom from `{}` has {} arrows)",
                    tgt.objects[o], count
                )));
            }
        }
        for (&(a, b), w) in &sp.products {
            let (fa, fb) = (self.obj_map[a], self.obj_map[b]);
            let Some(tw) = tgt.product(fa, fb) else {
                // Probe-restricted target without a recorded witness:
                // nothing to compare against.
                continue;
            };
            let tw = tw.clone();
            let u = tgt
                .pairing(self.arr_map[w.pr1], self.arr_map[w.pr2])
                .map_err(|_| {
                    CatError::ProductsNotPreserved(format!(
                        "no comparison arrow for ({}, {})",
                        src.objects[a], src.objects[b]
                    ))
                })?;
            // u : F(A x B) -> FA x FB must be invertible.
            let fp = self.obj_map[w.obj];
            let inv = tgt.hom(tw.obj, fp).into_iter().find(|&v| {
                tgt.try_comp(u, v) == Some(tgt.identities[tw.obj])
                    && tgt.try_comp(v, u) == Some(tgt.identities[fp])
            });
            if inv.is_none() {
                return Err(CatError::ProductsNotPreserved(format!(
                    "comparison arrow for ({}, {}) is not invertible",
                    src.objects[a], src.objects[b]
                )));
            }
        }
        Ok(())
    }
}

/// A natural transformation between parallel functors.
#[derive(Clone, Debug, PartialEq)]
pub struct NatTransf {
    /// Per source object `A`: an arrow `F(A) -> G(A)` in the target.
    pub components: Vec<usize>,
}

impl NatTransf {
    /// Verifies typing and every naturality square `G(f) . c_A = c_B . F(f)`.
    pub fn validate(&self, f: &Functor, g: &Functor) -> Result<(), CatError> {
        assert!(f.source.as_ref() == g.source.as_ref());
        assert!(f.target.as_ref() == g.target.as_ref());
        let src = &f.source;
        let tgt = &f.target;
        for (o, &c) in self.components.iter().enumerate() {
            let a = &tgt.arrows[c];
            if a.src != f.obj_map[o] || a.tgt != g.obj_map[o] {
                return Err(CatError::NaturalitySquareViolation(format!(
                    "component at `{}` ill-typed",
                    src.objects[o]
                )));
            }
        }
        for (i, arr) in src.arrows.iter().enumerate() {
            let lhs = tgt.try_comp(self.components[arr.tgt], f.arr_map[i]);
            let rhs = tgt.try_comp(g.arr_map[i], self.components[arr.src]);
            if lhs.is_none() || lhs != rhs {
                return Err(CatError::NaturalitySquareViolation(arr.name.clone()));
            }
        }
        Ok(())
    }

    pub fn identity(f: &Functor) -> Self {
        NatTransf {
            components: f
                .obj_map
                .iter()
                .map(|&o| f.target.identities[o])
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::{lattice_ops, FinitePoset};

    fn chain_poset(n: usize) -> FinitePoset {
        let elems: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
        let covers: Vec<(String, String)> = (0..n.saturating_sub(1))
            .map(|i| (format!("c{i}"), format!("c{}", i + 1)))
            .collect();
        FinitePoset::from_covers(&elems, &covers).unwrap()
    }

    #[test]
    fn terminal_category_validates() {
        let c = FiniteCategory::terminal_category();
        c.validate().unwrap();
        assert_eq!(c.terminal(), Some(0));
    }

    #[test]
    fn two_chain_category() {
        let p = chain_poset(2);
        let cert = lattice_ops(&p);
        let c = semilattice_to_category(&p, &cert).unwrap();
        assert_eq!(c.arrows.len(), 3);
        // Product table is the minimum.
        let a = c.object_index("c0").unwrap();
        let b = c.object_index("c1").unwrap();
        assert_eq!(c.product(a, b).unwrap().obj, a);
        assert_eq!(c.product(b, b).unwrap().obj, b);
    }

    #[test]
    fn diamond_product_is_bottom() {
        let p = FinitePoset::from_covers(
            &["bot", "a", "b", "top"],
            &[("bot", "a"), ("bot", "b"), ("a", "top"), ("b", "top")],
        )
        .unwrap();
        let cert = lattice_ops(&p);
        let c = semilattice_to_category(&p, &cert).unwrap();
        let a = c.object_index("a").unwrap();
        let b = c.object_index("b").unwrap();
        assert_eq!(c.product(a, b).unwrap().obj, c.object_index("bot").unwrap());
    }

    #[test]
    fn semilattice_products_normalize_top() {
        let p = chain_poset(3);
        let cert = lattice_ops(&p);
        let c = semilattice_to_category(&p, &cert).unwrap();
        let t = c.terminal().unwrap();
        for o in 0..c.objects.len() {
            let w = c.product(t, o).unwrap();
            assert_eq!(w.obj, o);
            assert_eq!(w.pr2, c.identities[o]);
            let w = c.product(o, t).unwrap();
            assert_eq!(w.obj, o);
            assert_eq!(w.pr1, c.identities[o]);
        }
    }

    #[test]
    fn missing_composite_rejected() {
        // Two parallel arrows f, g : A -> A with no composite defined.
        let objects = vec!["A".to_string()];
        let arrows = vec![
            Arrow { name: "id_A".into(), src: 0, tgt: 0 },
            Arrow { name: "f".into(), src: 0, tgt: 0 },
        ];
        let mut compose = HashMap::new();
        compose.insert((0, 0), 0);
        // (f, id) and (id, f) and (f, f) are all missing.
        let c = FiniteCategory::assemble(objects, arrows, vec![0], compose, None, true).unwrap();
        match c.validate().unwrap_err() {
            CatError::CompositionUndefined(_, _) => {}
            e => panic!("unexpected error {e:?}"),
        }
    }

    #[test]
    fn identity_functor_preserves_products() {
        let p = chain_poset(3);
        let cert = lattice_ops(&p);
        let c = Arc::new(semilattice_to_category(&p, &cert).unwrap());
        let f = Functor::identity(&c);
        f.validate(true).unwrap();
    }

    #[test]
    fn constant_functor_to_terminal() {
        let p = chain_poset(2);
        let cert = lattice_ops(&p);
        let c = Arc::new(semilattice_to_category(&p, &cert).unwrap());
        let t = c.terminal().unwrap();
        let f = Functor {
            source: c.clone(),
            target: c.clone(),
            obj_map: vec![t; c.objects.len()],
            arr_map: vec![c.identities[t]; c.arrows.len()],
        };
        f.validate(true).unwrap();
    }

    #[test]
    fn associativity_holds_in_semilattice_categories() {
        for n in 2..5 {
            let p = chain_poset(n);
            let cert = lattice_ops(&p);
            let c = semilattice_to_category(&p, &cert).unwrap();
            c.validate().unwrap();
        }
    }

    #[test]
    fn functor_composition_preserves_products() {
        let p = chain_poset(3);
        let cert = lattice_ops(&p);
        let c = Arc::new(semilattice_to_category(&p, &cert).unwrap());
        let f = Functor::identity(&c);
        let g = f.compose(&f);
        g.validate(true).unwrap();
    }

    #[test]
    fn identity_nat_transf_validates() {
        let p = chain_poset(3);
        let cert = lattice_ops(&p);
        let c = Arc::new(semilattice_to_category(&p, &cert).unwrap());
        let f = Functor::identity(&c);
        let eta = NatTransf::identity(&f);
        eta.validate(&f, &f).unwrap();
    }
}
