//! Comonads on indexed posets, their Eilenberg-Moore and Kleisli
//! doctrines, the universal arrow, factorization of oplax morphisms,
//! uniqueness, and the isomorphism of 2-cell hom-sets.
//!
//! The engine is generic: nothing here assumes the endofunctor is a
//! product functor. The reader comonad is one client (see the extension
//! module). The Kleisli base is built in the squiggly presentation —
//! objects are the base objects, an arrow `A ~> B` is a base arrow
//! `KA -> B`, composition is `h . K(g) . gamma_A`, the identity of `A` is
//! `epsilon_A` — and the isomorphism with the free-coalgebra presentation
//! is verified rather than assumed.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::cat::{Arrow, CatError, FiniteCategory, Functor, NatTransf};
use crate::doctrine::{Doctrine, DoctrineError, DoctrineMorphism};
use crate::order::{FinitePoset, MonotoneMap, OrderError};

#[derive(Debug, Error)]
pub enum ComonadError {
    #[error("comonad law violation: {0}")]
    ComonadLawViolation(String),
    #[error("2-arrow inequality violation: {0}")]
    TwoArrowInequalityViolation(String),
    #[error("oplax morphism coherence violation: {0}")]
    CoherenceViolation(String),
    #[error("Eilenberg-Moore construction needs a total base, not a probe fragment")]
    LazyBaseUnsupported,
    #[error("enumeration budget exceeded: {0} candidates")]
    EnumerationBudgetExceeded(usize),
    #[error("Kleisli fiber not closed under reindexing: {0}")]
    FiberNotClosed(String),
    #[error("composite with the universal arrow differs from the given morphism: {0}")]
    CompositeMismatch(String),
    #[error("uniqueness violated: competitor differs at {0}")]
    UniquenessCounterexample(String),
    #[error(transparent)]
    Cat(#[from] CatError),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Doctrine(#[from] DoctrineError),
}

/// A comonad on an indexed poset: the 1-cell `(K, k)`, the comultiplication
/// and the counit, with the comonad laws and the 2-arrow inequalities.
#[derive(Clone)]
pub struct IndexedPosetComonad {
    pub doctrine: Arc<Doctrine>,
    pub k: Functor,
    /// Per object `A`: the fiber component `k_A : P(A) -> P(KA)`.
    pub k_fib: Vec<MonotoneMap>,
    /// Comultiplication `gamma : K -> K.K`.
    pub gamma: NatTransf,
    /// Counit `epsilon : K -> Id`.
    pub epsilon: NatTransf,
}

impl fmt::Debug for IndexedPosetComonad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IndexedPosetComonad({:?})", self.k)
    }
}

impl IndexedPosetComonad {
    pub fn identity(doctrine: Arc<Doctrine>) -> Self {
        let k = Functor::identity(&doctrine.base);
        let k_fib = doctrine.fibers.iter().map(MonotoneMap::identity).collect();
        let gamma = NatTransf::identity(&k);
        let epsilon = NatTransf::identity(&k);
        IndexedPosetComonad { doctrine, k, k_fib, gamma, epsilon }
    }

    pub fn base(&self) -> &Arc<FiniteCategory> {
        &self.doctrine.base
    }

    /// True when the endofunctor, the comultiplication and the counit are
    /// identities on the nose. The Kleisli construction then reuses the
    /// base category unchanged (the fibers may still shrink when the fiber
    /// family is not the identity, as in axiom forcing).
    pub fn base_is_identity(&self) -> bool {
        let base = self.base();
        self.k.obj_map.iter().enumerate().all(|(i, &o)| i == o)
            && self.k.arr_map.iter().enumerate().all(|(i, &a)| i == a)
            && self
                .gamma
                .components
                .iter()
                .enumerate()
                .all(|(o, &c)| c == base.identities[o])
            && self
                .epsilon
                .components
                .iter()
                .enumerate()
                .all(|(o, &c)| c == base.identities[o])
    }

    /// Verifies the full comonad package: 1-cell validity (functor laws
    /// and fiber naturality), naturality of `gamma` and `epsilon`, the
    /// three comonad diagrams, and the two 2-arrow inequalities, all by
    /// enumeration.
    pub fn validate(&self) -> Result<(), ComonadError> {
        let base = self.base();
        self.k.validate(false)?;
        // Fiber family typing and naturality.
        if self.k_fib.len() != base.objects.len() {
            return Err(ComonadError::ComonadLawViolation(
                "fiber family has wrong length".to_string(),
            ));
        }
        for (a, m) in self.k_fib.iter().enumerate() {
            if m.source().as_ref() != self.doctrine.fiber(a).as_ref()
                || m.target().as_ref() != self.doctrine.fiber(self.k.on_obj(a)).as_ref()
            {
                return Err(ComonadError::ComonadLawViolation(format!(
                    "fiber component at `{}` has wrong endpoints",
                    base.objects[a]
                )));
            }
        }
        for (i, arr) in base.arrows.iter().enumerate() {
            let lhs = self.k_fib[arr.src].compose(&self.doctrine.reindex[i])?;
            let rhs = self.doctrine.reindex[self.k.on_arr(i)].compose(&self.k_fib[arr.tgt])?;
            if lhs != rhs {
                return Err(ComonadError::ComonadLawViolation(format!(
                    "fiber family not natural at `{}`",
                    arr.name
                )));
            }
        }
        let k2 = self.k.compose(&self.k);
        let id = Functor::identity(base);
        self.gamma.validate(&self.k, &k2)?;
        self.epsilon.validate(&self.k, &id)?;
        // Comonad diagrams.
        for a in 0..base.objects.len() {
            let ka = self.k.on_obj(a);
            let g_a = self.gamma.components[a];
            // Coassociativity: K(gamma_A) . gamma_A = gamma_{KA} . gamma_A.
            let lhs = base.try_comp(self.k.on_arr(g_a), g_a);
            let rhs = base.try_comp(self.gamma.components[ka], g_a);
            if lhs.is_none() || lhs != rhs {
                return Err(ComonadError::ComonadLawViolation(format!(
                    "coassociativity fails at `{}`",
                    base.objects[a]
                )));
            }
            // Counit: eps_{KA} . gamma_A = id_{KA} = K(eps_A) . gamma_A.
            let left = base.try_comp(self.epsilon.components[ka], g_a);
            let right = base.try_comp(self.k.on_arr(self.epsilon.components[a]), g_a);
            if left != Some(base.identities[ka]) || right != Some(base.identities[ka]) {
                return Err(ComonadError::ComonadLawViolation(format!(
                    "counit laws fail at `{}`",
                    base.objects[a]
                )));
            }
        }
        // 2-arrow inequalities.
        for a in 0..base.objects.len() {
            let ka = self.k.on_obj(a);
            let fiber_a = self.doctrine.fiber(a);
            let fiber_ka = self.doctrine.fiber(ka);
            let g = &self.doctrine.reindex[self.gamma.components[a]];
            let e = &self.doctrine.reindex[self.epsilon.components[a]];
            for alpha in 0..fiber_a.len() {
                let kalpha = self.k_fib[a].apply(alpha);
                let twice = g.apply(self.k_fib[ka].apply(kalpha));
                if !fiber_ka.leq_idx(kalpha, twice) {
                    return Err(ComonadError::TwoArrowInequalityViolation(format!(
                        "gamma at `{}`, element `{}`",
                        base.objects[a],
                        fiber_a.element(alpha)
                    )));
                }
                if !fiber_ka.leq_idx(kalpha, e.apply(alpha)) {
                    return Err(ComonadError::TwoArrowInequalityViolation(format!(
                        "epsilon at `{}`, element `{}`",
                        base.objects[a],
                        fiber_a.element(alpha)
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The Eilenberg-Moore doctrine: the category of all coalgebras with the
/// restricted fibers.
pub struct EmBundle {
    pub doctrine: Doctrine,
    /// Per EM object: the pair (base object, coalgebra structure arrow).
    pub coalgebras: Vec<(usize, usize)>,
    /// Per EM arrow: the underlying base arrow.
    pub underlying: Vec<usize>,
}

/// Enumerates all coalgebras `(A, c : A -> KA)` and their morphisms, and
/// restricts the fibers to `{ alpha | alpha <= P(c)(k_A(alpha)) }`.
pub fn build_em_doctrine(c: &IndexedPosetComonad) -> Result<EmBundle, ComonadError> {
    let base = c.base();
    if !base.total {
        return Err(ComonadError::LazyBaseUnsupported);
    }
    let mut coalgebras = Vec::new();
    for a in 0..base.objects.len() {
        let ka = c.k.on_obj(a);
        for st in base.hom(a, ka) {
            let coassoc = base.try_comp(c.gamma.components[a], st)
                == base.try_comp(c.k.on_arr(st), st);
            let counit = base.try_comp(c.epsilon.components[a], st) == Some(base.identities[a]);
            if coassoc && counit {
                coalgebras.push((a, st));
            }
        }
    }
    let objects: Vec<String> = coalgebras
        .iter()
        .map(|&(a, st)| format!("({},{})", base.objects[a], base.arrows[st].name))
        .collect();
    let mut arrows = Vec::new();
    let mut underlying = Vec::new();
    let mut arrow_at: HashMap<(usize, usize, usize), usize> = HashMap::new();
    for (i, &(a, st_a)) in coalgebras.iter().enumerate() {
        for (j, &(b, st_b)) in coalgebras.iter().enumerate() {
            for f in base.hom(a, b) {
                // K(f) . c = d . f
                if base.try_comp(c.k.on_arr(f), st_a) == base.try_comp(st_b, f) {
                    arrow_at.insert((i, j, f), arrows.len());
                    arrows.push(Arrow {
                        name: format!("em[{}]({})", objects[i], base.arrows[f].name),
                        src: i,
                        tgt: j,
                    });
                    underlying.push(f);
                }
            }
        }
    }
    let identities: Vec<usize> = coalgebras
        .iter()
        .enumerate()
        .map(|(i, &(a, _))| arrow_at[&(i, i, base.identities[a])])
        .collect();
    let mut compose = HashMap::new();
    for (qi, q) in arrows.iter().enumerate() {
        for (pi, p) in arrows.iter().enumerate() {
            if p.tgt != q.src {
                continue;
            }
            let u = base.comp(underlying[qi], underlying[pi]);
            compose.insert((qi, pi), arrow_at[&(p.src, q.tgt, u)]);
        }
    }
    let category = Arc::new(FiniteCategory::assemble(
        objects, arrows, identities, compose, None, true,
    )?);
    category.validate()?;

    let mut fibers = Vec::with_capacity(coalgebras.len());
    let mut kept: Vec<Vec<usize>> = Vec::with_capacity(coalgebras.len());
    for &(a, st) in &coalgebras {
        let fiber = c.doctrine.fiber(a);
        let r_st = &c.doctrine.reindex[st];
        let keep: Vec<usize> = (0..fiber.len())
            .filter(|&alpha| fiber.leq_idx(alpha, r_st.apply(c.k_fib[a].apply(alpha))))
            .collect();
        let sub = if keep.len() == fiber.len() {
            fiber.clone()
        } else {
            Arc::new(fiber.induced(&keep).0)
        };
        fibers.push(sub);
        kept.push(keep);
    }
    let mut reindex = Vec::with_capacity(underlying.len());
    for (qi, q) in category.arrows.iter().enumerate() {
        let u = underlying[qi];
        let r = &c.doctrine.reindex[u];
        let src_fiber = &fibers[q.tgt];
        let tgt_fiber = &fibers[q.src];
        let table: Vec<usize> = (0..src_fiber.len())
            .map(|i| {
                let big = kept[q.tgt][i];
                let img = r.apply(big);
                kept[q.src]
                    .iter()
                    .position(|&x| x == img)
                    .ok_or_else(|| {
                        ComonadError::FiberNotClosed(format!(
                            "reindexing along `{}` leaves the Eilenberg-Moore fiber",
                            q.name
                        ))
                    })
            })
            .collect::<Result<_, _>>()?;
        reindex.push(MonotoneMap::from_indices(
            src_fiber.clone(),
            tgt_fiber.clone(),
            table,
        )?);
    }
    let doctrine = Doctrine::new(category, fibers, reindex);
    doctrine.validate()?;
    Ok(EmBundle { doctrine, coalgebras, underlying })
}

/// The Kleisli doctrine in the squiggly presentation, with the universal
/// arrow.
pub struct KleisliBundle {
    pub comonad: Arc<IndexedPosetComonad>,
    pub doctrine: Doctrine,
    /// Per Kleisli arrow: the source object and the underlying base arrow
    /// `K(src) -> tgt`.
    pub underlying: Vec<(usize, usize)>,
    arrow_at: HashMap<(usize, usize), usize>,
    /// Per Kleisli object and base fiber element of `P(K A)`: position in
    /// the sub-fiber, when the element lies in it.
    kept: Vec<Vec<usize>>,
    /// Universal arrow 1-cell `(F_K, k')`.
    pub universal: DoctrineMorphism,
    /// The `j'` component family: per object, the Kleisli arrow `A ~> KA`.
    pub universal_j: NatTransf,
}

impl KleisliBundle {
    /// The Kleisli arrow `A ~> B` with the given underlying base arrow.
    pub fn squiggly(&self, a: usize, g: usize) -> Option<usize> {
        self.arrow_at.get(&(a, g)).copied()
    }

    /// Replaces the Kleisli base with a copy carrying the given chosen
    /// product structure, revalidating the universal properties. All
    /// arrow and object indices are unchanged.
    pub fn install_products(
        &mut self,
        products: crate::cat::ProductStructure,
    ) -> Result<(), ComonadError> {
        let old = &self.doctrine.base;
        let category = Arc::new(FiniteCategory::assemble(
            old.objects.clone(),
            old.arrows.clone(),
            old.identities.clone(),
            old.compose.clone(),
            Some(products),
            old.total,
        )?);
        category.validate()?;
        self.doctrine.base = category.clone();
        self.universal.functor.target = category;
        Ok(())
    }

    pub fn underlying_of(&self, kl_arrow: usize) -> (usize, usize) {
        self.underlying[kl_arrow]
    }

    /// Position of a `P(KA)` element inside the Kleisli fiber over `A`.
    pub fn fiber_position(&self, a: usize, elem: usize) -> Option<usize> {
        self.kept[a].iter().position(|&x| x == elem)
    }

    /// The `P(KA)` element corresponding to a Kleisli fiber element.
    pub fn fiber_element(&self, a: usize, pos: usize) -> usize {
        self.kept[a][pos]
    }
}

/// Builds the Kleisli doctrine of a validated comonad. For the strict
/// identity comonad the base is reused unchanged, so `P_K = P` and the
/// universal arrow is the identity on the nose.
pub fn build_kleisli_doctrine(c: &Arc<IndexedPosetComonad>) -> Result<KleisliBundle, ComonadError> {
    let base = c.base();
    let n_obj = base.objects.len();

    // Squiggly base. When K, gamma and epsilon are identities the squiggly
    // category is the base itself, arrow for arrow; otherwise build it.
    let (category, underlying, arrow_at) = if c.base_is_identity() {
        let mut arrow_at = HashMap::new();
        let mut underlying = Vec::new();
        for (i, arr) in base.arrows.iter().enumerate() {
            arrow_at.insert((arr.src, i), i);
            underlying.push((arr.src, i));
        }
        (base.clone(), underlying, arrow_at)
    } else {
        // Squiggly arrows: for each source object A, every base arrow KA -> B.
        let mut arrows = Vec::new();
        let mut underlying = Vec::new();
        let mut arrow_at = HashMap::new();
        for a in 0..n_obj {
            let ka = c.k.on_obj(a);
            for (gi, g) in base.arrows.iter().enumerate() {
                if g.src != ka {
                    continue;
                }
                arrow_at.insert((a, gi), arrows.len());
                arrows.push(Arrow {
                    name: format!("kl[{}]({})", base.objects[a], g.name),
                    src: a,
                    tgt: g.tgt,
                });
                underlying.push((a, gi));
            }
        }
        let identities: Vec<usize> = (0..n_obj)
            .map(|a| arrow_at[&(a, c.epsilon.components[a])])
            .collect();
        let mut compose = HashMap::new();
        for (qi, q) in arrows.iter().enumerate() {
            for (pi, p) in arrows.iter().enumerate() {
                if p.tgt != q.src {
                    continue;
                }
                // h . K(g) . gamma_A, with p = (A, g), q = (B, h).
                let (a, g) = underlying[pi];
                let (_b, h) = underlying[qi];
                let kg = c.k.on_arr(g);
                let m = base.comp(base.comp(h, kg), c.gamma.components[a]);
                compose.insert((qi, pi), arrow_at[&(a, m)]);
            }
        }
        let category = Arc::new(FiniteCategory::assemble(
            base.objects.clone(),
            arrows,
            identities,
            compose,
            None,
            base.total,
        )?);
        category.validate()?;
        (category, underlying, arrow_at)
    };

    // Fibers: P_K(A) = { alpha in P(KA) | alpha <= P(gamma_A)(k_{KA}(alpha)) }.
    let mut fibers = Vec::with_capacity(n_obj);
    let mut kept = Vec::with_capacity(n_obj);
    for a in 0..n_obj {
        let ka = c.k.on_obj(a);
        let fiber_ka = c.doctrine.fiber(ka);
        let g = &c.doctrine.reindex[c.gamma.components[a]];
        let keep: Vec<usize> = (0..fiber_ka.len())
            .filter(|&alpha| fiber_ka.leq_idx(alpha, g.apply(c.k_fib[ka].apply(alpha))))
            .collect();
        let sub = if keep.len() == fiber_ka.len() {
            fiber_ka.clone()
        } else {
            Arc::new(fiber_ka.induced(&keep).0)
        };
        fibers.push(sub);
        kept.push(keep);
    }
    // Reindexing along (A, g : KA -> B): restriction of P(K(g) . gamma_A).
    let mut reindex = Vec::with_capacity(underlying.len());
    for (qi, q) in category.arrows.iter().enumerate() {
        let (a, g) = underlying[qi];
        let m = base.comp(c.k.on_arr(g), c.gamma.components[a]);
        let r = &c.doctrine.reindex[m];
        let src_fiber = &fibers[q.tgt];
        let tgt_fiber = &fibers[q.src];
        let table: Vec<usize> = (0..src_fiber.len())
            .map(|i| {
                let img = r.apply(kept[q.tgt][i]);
                kept[q.src].iter().position(|&x| x == img).ok_or_else(|| {
                    ComonadError::FiberNotClosed(format!(
                        "reindexing along `{}` leaves the Kleisli fiber",
                        q.name
                    ))
                })
            })
            .collect::<Result<_, _>>()?;
        reindex.push(MonotoneMap::from_indices(src_fiber.clone(), tgt_fiber.clone(), table)?);
    }
    let doctrine = Doctrine::new(category.clone(), fibers, reindex);
    doctrine.validate()?;

    // Squiggly / free-coalgebra isomorphism: K(eps_B . f) . gamma_A = f for
    // every coalgebra morphism f between free coalgebras, and
    // eps_B . K(g) . gamma_A = g for every g : KA -> B.
    for a in 0..n_obj {
        let ka = c.k.on_obj(a);
        for b in 0..n_obj {
            let kb = c.k.on_obj(b);
            for f in base.hom(ka, kb) {
                let free_morphism = base.try_comp(c.gamma.components[b], f)
                    == base.try_comp(c.k.on_arr(f), c.gamma.components[a]);
                if !free_morphism {
                    continue;
                }
                let round = base.comp(
                    c.k.on_arr(base.comp(c.epsilon.components[b], f)),
                    c.gamma.components[a],
                );
                if round != f {
                    return Err(ComonadError::ComonadLawViolation(format!(
                        "squiggly presentation iso fails on `{}`",
                        base.arrows[f].name
                    )));
                }
            }
            for g in base.hom(ka, b) {
                let round = base.comp(
                    c.epsilon.components[b],
                    base.comp(c.k.on_arr(g), c.gamma.components[a]),
                );
                if round != g {
                    return Err(ComonadError::ComonadLawViolation(format!(
                        "squiggly presentation iso fails on `{}`",
                        base.arrows[g].name
                    )));
                }
            }
        }
    }

    // Universal arrow (F_K, k'): F_K(f : A -> B) = (A, f . eps_A); the
    // fiber components are k_A, landing in the sub-fiber because gamma is
    // a 2-arrow.
    let f_k = Functor {
        source: base.clone(),
        target: category.clone(),
        obj_map: (0..n_obj).collect(),
        arr_map: base
            .arrows
            .iter()
            .enumerate()
            .map(|(i, arr)| {
                let g = base.comp(i, c.epsilon.components[arr.src]);
                arrow_at[&(arr.src, g)]
            })
            .collect(),
    };
    f_k.validate(false)?;
    let mut k_prime = Vec::with_capacity(n_obj);
    for a in 0..n_obj {
        let fiber_a = c.doctrine.fiber(a);
        let table: Vec<usize> = (0..fiber_a.len())
            .map(|alpha| {
                let img = c.k_fib[a].apply(alpha);
                kept[a].iter().position(|&x| x == img).ok_or_else(|| {
                    ComonadError::TwoArrowInequalityViolation(format!(
                        "k_A does not land in the Kleisli fiber at `{}`",
                        base.objects[a]
                    ))
                })
            })
            .collect::<Result<_, _>>()?;
        k_prime.push(MonotoneMap::from_indices(
            fiber_a.clone(),
            doctrine.fibers[a].clone(),
            table,
        )?);
    }
    let universal = DoctrineMorphism { functor: f_k, fiber_maps: k_prime };
    let universal_j = NatTransf {
        components: (0..n_obj)
            .map(|a| arrow_at[&(a, base.identities[c.k.on_obj(a)])])
            .collect(),
    };
    let bundle = KleisliBundle {
        comonad: c.clone(),
        doctrine,
        underlying,
        arrow_at,
        kept,
        universal,
        universal_j,
    };
    // The universal arrow must validate as an oplax morphism into the
    // Kleisli doctrine (target comonad is the identity).
    let oplax = OplaxComonadMorphism {
        cell: bundle.universal.clone(),
        j: bundle.universal_j.clone(),
    };
    oplax.validate(c, &bundle.doctrine)?;
    Ok(bundle)
}

/// An oplax morphism of comonads into the identity comonad on `R`: the
/// 1-cell `(F, f)` (no product preservation required) and the 2-arrow
/// `j : F -> F.K`.
#[derive(Clone)]
pub struct OplaxComonadMorphism {
    pub cell: DoctrineMorphism,
    pub j: NatTransf,
}

impl OplaxComonadMorphism {
    /// Verifies the 1-cell (functor laws, fiber naturality), naturality of
    /// `j`, the oplax 2-arrow inequality, and both coherence diagrams.
    pub fn validate(
        &self,
        c: &IndexedPosetComonad,
        target: &Doctrine,
    ) -> Result<(), ComonadError> {
        let base = c.base();
        let tgt_base = &target.base;
        self.cell.functor.validate(false)?;
        for (i, arr) in base.arrows.iter().enumerate() {
            let lhs = self.cell.fiber_maps[arr.src].compose(&c.doctrine.reindex[i])?;
            let rhs = target.reindex[self.cell.functor.on_arr(i)]
                .compose(&self.cell.fiber_maps[arr.tgt])?;
            if lhs != rhs {
                return Err(ComonadError::CoherenceViolation(format!(
                    "1-cell fiber family not natural at `{}`",
                    arr.name
                )));
            }
        }
        // j : F -> F.K natural.
        let fk = self.cell.functor.compose_with_endofunctor(&c.k);
        self.j.validate(&self.cell.functor, &fk)?;
        for a in 0..base.objects.len() {
            let ka = c.k.on_obj(a);
            // Coherence: F(gamma_A) . j_A = j_{KA} . j_A ; F(eps_A) . j_A = id.
            let ja = self.j.components[a];
            let lhs = tgt_base.try_comp(self.cell.functor.on_arr(c.gamma.components[a]), ja);
            let rhs = tgt_base.try_comp(self.j.components[ka], ja);
            if lhs.is_none() || lhs != rhs {
                return Err(ComonadError::CoherenceViolation(format!(
                    "comultiplication coherence fails at `{}`",
                    base.objects[a]
                )));
            }
            let counit =
                tgt_base.try_comp(self.cell.functor.on_arr(c.epsilon.components[a]), ja);
            if counit != Some(tgt_base.identities[self.cell.functor.on_obj(a)]) {
                return Err(ComonadError::CoherenceViolation(format!(
                    "counit coherence fails at `{}`",
                    base.objects[a]
                )));
            }
            // Oplax 2-arrow: f_A(alpha) <= R(j_A)(f_{KA}(k_A(alpha))).
            let fiber_a = c.doctrine.fiber(a);
            let fa = self.cell.functor.on_obj(a);
            for alpha in 0..fiber_a.len() {
                let lhs = self.cell.fiber_maps[a].apply(alpha);
                let rhs = target.reindex[ja]
                    .apply(self.cell.fiber_maps[ka].apply(c.k_fib[a].apply(alpha)));
                if !target.fiber(fa).leq_idx(lhs, rhs) {
                    return Err(ComonadError::TwoArrowInequalityViolation(format!(
                        "oplax inequality fails at `{}`, element `{}`",
                        base.objects[a],
                        fiber_a.element(alpha)
                    )));
                }
            }
        }
        Ok(())
    }
}

impl Functor {
    /// `self . k` for an endofunctor `k` of the source: the composite
    /// sending `A` to `self(k(A))`.
    pub(crate) fn compose_with_endofunctor(&self, k: &Functor) -> Functor {
        Functor {
            source: self.source.clone(),
            target: self.target.clone(),
            obj_map: k.obj_map.iter().map(|&o| self.obj_map[o]).collect(),
            arr_map: k.arr_map.iter().map(|&f| self.arr_map[f]).collect(),
        }
    }
}

/// Factorizes an oplax morphism `((F, f), j)` into `Inc(R)` through the
/// Kleisli doctrine: returns the unique `(F', f')` with
/// `(F', f') . (F_K, k') = (F, f)`, verified strictly.
pub fn factorize_oplax(
    bundle: &KleisliBundle,
    m: &OplaxComonadMorphism,
    target: &Doctrine,
) -> Result<DoctrineMorphism, ComonadError> {
    let c = &bundle.comonad;
    let base = c.base();
    let tgt_base = &target.base;
    // F'(A ~> B with underlying g : KA -> B) = F(g) . j_A.
    let obj_map: Vec<usize> = (0..base.objects.len())
        .map(|a| m.cell.functor.on_obj(a))
        .collect();
    let arr_map: Vec<usize> = bundle
        .underlying
        .iter()
        .map(|&(a, g)| tgt_base.comp(m.cell.functor.on_arr(g), m.j.components[a]))
        .collect();
    let f_prime = Functor {
        source: bundle.doctrine.base.clone(),
        target: tgt_base.clone(),
        obj_map,
        arr_map,
    };
    f_prime.validate(false)?;
    // f'_A = restriction of R(j_A) . f_{KA} to the Kleisli fiber.
    let mut fib_prime = Vec::with_capacity(base.objects.len());
    for a in 0..base.objects.len() {
        let ka = c.k.on_obj(a);
        let table: Vec<usize> = (0..bundle.doctrine.fibers[a].len())
            .map(|pos| {
                let alpha = bundle.fiber_element(a, pos);
                target.reindex[m.j.components[a]].apply(m.cell.fiber_maps[ka].apply(alpha))
            })
            .collect();
        fib_prime.push(MonotoneMap::from_indices(
            bundle.doctrine.fibers[a].clone(),
            target.fibers[m.cell.functor.on_obj(a)].clone(),
            table,
        )?);
    }
    let factorized = DoctrineMorphism { functor: f_prime, fiber_maps: fib_prime };

    // Composite with the universal arrow must reproduce (F, f) exactly.
    let composite = factorized.compose(&bundle.universal);
    if composite.functor.obj_map != m.cell.functor.obj_map
        || composite.functor.arr_map != m.cell.functor.arr_map
    {
        return Err(ComonadError::CompositeMismatch(
            "functor tables differ".to_string(),
        ));
    }
    for a in 0..base.objects.len() {
        if composite.fiber_maps[a].table() != m.cell.fiber_maps[a].table() {
            return Err(ComonadError::CompositeMismatch(format!(
                "fiber maps differ at `{}`",
                base.objects[a]
            )));
        }
    }
    // And the j-part: F'(j'_A) = j_A.
    for a in 0..base.objects.len() {
        if factorized.functor.on_arr(bundle.universal_j.components[a]) != m.j.components[a] {
            return Err(ComonadError::CompositeMismatch(format!(
                "j component differs at `{}`",
                base.objects[a]
            )));
        }
    }
    Ok(factorized)
}

/// Checks a competitor against the factorization: a 1-cell with the same
/// composite must coincide with `factorize_oplax`'s output.
pub fn check_factorization_unique(
    bundle: &KleisliBundle,
    m: &OplaxComonadMorphism,
    target: &Doctrine,
    competitor: &DoctrineMorphism,
) -> Result<(), ComonadError> {
    let canonical = factorize_oplax(bundle, m, target)?;
    let composite = competitor.compose(&bundle.universal);
    if composite.functor.obj_map != m.cell.functor.obj_map
        || composite.functor.arr_map != m.cell.functor.arr_map
        || composite
            .fiber_maps
            .iter()
            .zip(&m.cell.fiber_maps)
            .any(|(x, y)| x.table() != y.table())
    {
        return Err(ComonadError::CompositeMismatch(
            "competitor composite differs from the given morphism".to_string(),
        ));
    }
    for a in 0..bundle.comonad.base().objects.len() {
        if competitor.functor.on_arr(bundle.universal_j.components[a]) != m.j.components[a] {
            return Err(ComonadError::CompositeMismatch(format!(
                "competitor j component differs at `{}`",
                bundle.comonad.base().objects[a]
            )));
        }
    }
    if !canonical.same_tables(competitor) {
        let loc = canonical
            .functor
            .arr_map
            .iter()
            .zip(&competitor.functor.arr_map)
            .position(|(x, y)| x != y)
            .map(|i| format!("arrow `{}`", bundle.doctrine.base.arrows[i].name))
            .unwrap_or_else(|| "a fiber map".to_string());
        return Err(ComonadError::UniquenessCounterexample(loc));
    }
    Ok(())
}

/// Report of the 2-cell hom-set isomorphism check between two oplax
/// morphisms into `Inc(R)` and their factorizations.
#[derive(Debug)]
pub struct TwoCellIsoReport {
    pub oplax_two_cells: usize,
    pub kleisli_two_cells: usize,
    pub bijection: bool,
}

/// Enumerates 2-cells on both sides of the Kleisli adjunction between two
/// oplax morphisms and verifies that passing across the isomorphism is a
/// bijection with identical component families.
pub fn two_cell_iso_check(
    bundle: &KleisliBundle,
    m: &OplaxComonadMorphism,
    n: &OplaxComonadMorphism,
    target: &Doctrine,
    budget: usize,
) -> Result<TwoCellIsoReport, ComonadError> {
    let c = &bundle.comonad;
    let base = c.base();
    let tgt_base = &target.base;
    let n_obj = base.objects.len();
    // Candidate component families eta_A : F(A) -> G(A).
    let homs: Vec<Vec<usize>> = (0..n_obj)
        .map(|a| tgt_base.hom(m.cell.functor.on_obj(a), n.cell.functor.on_obj(a)))
        .collect();
    let mut total = 1usize;
    for h in &homs {
        total = total.saturating_mul(h.len().max(1));
        if total > budget {
            return Err(ComonadError::EnumerationBudgetExceeded(total));
        }
    }
    let mut oplax_cells: Vec<Vec<usize>> = Vec::new();
    let mut kleisli_cells: Vec<Vec<usize>> = Vec::new();
    let mut family = vec![0usize; n_obj];
    let mut cursor = vec![0usize; n_obj];
    'outer: loop {
        for a in 0..n_obj {
            if homs[a].is_empty() {
                break 'outer;
            }
            family[a] = homs[a][cursor[a]];
        }
        let eta = NatTransf { components: family.clone() };
        if is_oplax_two_cell(c, m, n, target, &eta) {
            oplax_cells.push(family.clone());
        }
        if is_kleisli_two_cell(bundle, m, n, target, &eta) {
            kleisli_cells.push(family.clone());
        }
        // Odometer.
        let mut i = 0;
        while i < n_obj {
            cursor[i] += 1;
            if cursor[i] < homs[i].len() {
                break;
            }
            cursor[i] = 0;
            i += 1;
        }
        if i == n_obj || n_obj == 0 {
            break;
        }
    }
    // Condition reconstruction both ways: the two sets must be equal.
    let bijection = oplax_cells == kleisli_cells;
    Ok(TwoCellIsoReport {
        oplax_two_cells: oplax_cells.len(),
        kleisli_two_cells: kleisli_cells.len(),
        bijection,
    })
}

/// Conditions 1-3 for a 2-cell between oplax morphisms into `Inc(R)`:
/// naturality, the lax fiber inequality, and the `j`/`h` coherence square.
fn is_oplax_two_cell(
    c: &IndexedPosetComonad,
    m: &OplaxComonadMorphism,
    n: &OplaxComonadMorphism,
    target: &Doctrine,
    eta: &NatTransf,
) -> bool {
    let base = c.base();
    let tgt_base = &target.base;
    // 1. Naturality.
    for (i, arr) in base.arrows.iter().enumerate() {
        let lhs = tgt_base.try_comp(eta.components[arr.tgt], m.cell.functor.on_arr(i));
        let rhs = tgt_base.try_comp(n.cell.functor.on_arr(i), eta.components[arr.src]);
        if lhs.is_none() || lhs != rhs {
            return false;
        }
    }
    // 2. Lax inequality.
    for a in 0..base.objects.len() {
        let fiber = c.doctrine.fiber(a);
        for alpha in 0..fiber.len() {
            let lhs = m.cell.fiber_maps[a].apply(alpha);
            let rhs =
                target.reindex[eta.components[a]].apply(n.cell.fiber_maps[a].apply(alpha));
            if !target.fiber(m.cell.functor.on_obj(a)).leq_idx(lhs, rhs) {
                return false;
            }
        }
    }
    // 3. Coherence: eta_{KA} . j_A = h_A . eta_A.
    for a in 0..base.objects.len() {
        let ka = c.k.on_obj(a);
        let lhs = tgt_base.try_comp(eta.components[ka], m.j.components[a]);
        let rhs = tgt_base.try_comp(n.j.components[a], eta.components[a]);
        if lhs.is_none() || lhs != rhs {
            return false;
        }
    }
    true
}

/// A 2-cell between the factorized morphisms: naturality over every
/// squiggly arrow plus the lax inequality over the Kleisli fibers.
fn is_kleisli_two_cell(
    bundle: &KleisliBundle,
    m: &OplaxComonadMorphism,
    n: &OplaxComonadMorphism,
    target: &Doctrine,
    eta: &NatTransf,
) -> bool {
    let Ok(fm) = factorize_oplax(bundle, m, target) else { return false };
    let Ok(fn_) = factorize_oplax(bundle, n, target) else { return false };
    let tgt_base = &target.base;
    for (i, arr) in bundle.doctrine.base.arrows.iter().enumerate() {
        let lhs = tgt_base.try_comp(eta.components[arr.tgt], fm.functor.on_arr(i));
        let rhs = tgt_base.try_comp(fn_.functor.on_arr(i), eta.components[arr.src]);
        if lhs.is_none() || lhs != rhs {
            return false;
        }
    }
    for a in 0..bundle.doctrine.base.objects.len() {
        let fiber = bundle.doctrine.fiber(a);
        for alpha in 0..fiber.len() {
            let lhs = fm.fiber_maps[a].apply(alpha);
            let rhs = target.reindex[eta.components[a]].apply(fn_.fiber_maps[a].apply(alpha));
            if !target.fiber(fm.functor.on_obj(a)).leq_idx(lhs, rhs) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cat::semilattice_to_category;
    use crate::models::{downset_powerset, random_semilattice_doctrine};
    use crate::order::lattice_ops;

    fn sample_doctrine() -> Arc<Doctrine> {
        let elems = ["a", "b"];
        let p = FinitePoset::from_covers(&elems, &[("a", "b")]).unwrap();
        let cert = lattice_ops(&p);
        let base = Arc::new(semilattice_to_category(&p, &cert).unwrap());
        Arc::new(downset_powerset(&p, base))
    }

    /// The reindex-along-counit comonad for an interior operator on a
    /// semilattice base: K is idempotent monotone below the identity, and
    /// `k_A = P(eps_A)`.
    fn interior_comonad(d: &Arc<Doctrine>, image: Vec<usize>) -> IndexedPosetComonad {
        let base = &d.base;
        let obj_map = image;
        let arr_map: Vec<usize> = base
            .arrows
            .iter()
            .map(|arr| {
                let (a, b) = (obj_map[arr.src], obj_map[arr.tgt]);
                base.hom(a, b)[0]
            })
            .collect();
        let k = Functor { source: base.clone(), target: base.clone(), obj_map: obj_map.clone(), arr_map };
        let gamma = NatTransf {
            components: (0..base.objects.len())
                .map(|a| base.identities[obj_map[a]])
                .collect(),
        };
        let epsilon = NatTransf {
            components: (0..base.objects.len())
                .map(|a| base.hom(obj_map[a], a)[0])
                .collect(),
        };
        let k_fib: Vec<MonotoneMap> = (0..base.objects.len())
            .map(|a| d.reindex[epsilon.components[a]].clone())
            .collect();
        IndexedPosetComonad { doctrine: d.clone(), k, k_fib, gamma, epsilon }
    }

    #[test]
    fn identity_comonad_validates_and_kleisli_is_identity() {
        let d = sample_doctrine();
        let c = Arc::new(IndexedPosetComonad::identity(d.clone()));
        c.validate().unwrap();
        let bundle = build_kleisli_doctrine(&c).unwrap();
        assert_eq!(bundle.doctrine.base.arrows.len(), d.base.arrows.len());
        for (a, fiber) in bundle.doctrine.fibers.iter().enumerate() {
            assert_eq!(fiber.as_ref(), d.fibers[a].as_ref());
        }
        assert!(bundle.universal.same_tables(&DoctrineMorphism::identity(&d)));
    }

    #[test]
    fn em_of_identity_comonad_is_isomorphic_to_base() {
        let d = sample_doctrine();
        let c = IndexedPosetComonad::identity(d.clone());
        let em = build_em_doctrine(&c).unwrap();
        // Coalgebras of the identity comonad are exactly the identities.
        assert_eq!(em.coalgebras.len(), d.base.objects.len());
        assert_eq!(em.doctrine.base.arrows.len(), d.base.arrows.len());
        for (i, fiber) in em.doctrine.fibers.iter().enumerate() {
            assert_eq!(fiber.len(), d.fibers[em.coalgebras[i].0].len());
        }
    }

    #[test]
    fn interior_comonad_validates_and_factorizes() {
        let d = sample_doctrine();
        // K sends everything to the bottom object `a` (index of "a").
        let a = d.base.object_index("a").unwrap();
        let c = Arc::new(interior_comonad(&d, vec![a, a]));
        c.validate().unwrap();
        let bundle = build_kleisli_doctrine(&c).unwrap();
        bundle.doctrine.validate().unwrap();
        // Factorizing the universal arrow returns the identity 1-cell.
        let oplax = OplaxComonadMorphism {
            cell: bundle.universal.clone(),
            j: bundle.universal_j.clone(),
        };
        oplax.validate(&c, &bundle.doctrine).unwrap();
        let factorized = factorize_oplax(&bundle, &oplax, &bundle.doctrine).unwrap();
        assert!(factorized.same_tables(&DoctrineMorphism::identity(&bundle.doctrine)));
    }

    #[test]
    fn broken_gamma_is_rejected() {
        let d = sample_doctrine();
        let a = d.base.object_index("a").unwrap();
        let mut c = interior_comonad(&d, vec![a, a]);
        // Corrupt gamma: use the arrow a -> b instead of the identity.
        let b = d.base.object_index("b").unwrap();
        c.gamma.components[0] = d.base.hom(a, b)[0];
        assert!(matches!(
            c.validate(),
            Err(ComonadError::ComonadLawViolation(_)) | Err(ComonadError::Cat(_))
        ));
    }

    #[test]
    fn kleisli_fibers_match_em_fibers_at_free_coalgebras() {
        let d = sample_doctrine();
        let a = d.base.object_index("a").unwrap();
        let c = Arc::new(interior_comonad(&d, vec![a, a]));
        let bundle = build_kleisli_doctrine(&c).unwrap();
        let em = build_em_doctrine(&c).unwrap();
        for obj in 0..d.base.objects.len() {
            let ka = c.k.on_obj(obj);
            let gamma_a = c.gamma.components[obj];
            let em_idx = em
                .coalgebras
                .iter()
                .position(|&(x, st)| x == ka && st == gamma_a)
                .expect("free coalgebra is a coalgebra");
            let kleisli_fiber = &bundle.doctrine.fibers[obj];
            let em_fiber = &em.doctrine.fibers[em_idx];
            assert_eq!(kleisli_fiber.elements(), em_fiber.elements());
        }
    }

    #[test]
    fn kleisli_fiber_inequality_is_equality() {
        // alpha in P_K(KA, gamma_A) implies alpha = P(gamma_A) k_{KA}(alpha).
        let d = sample_doctrine();
        let a = d.base.object_index("a").unwrap();
        let c = Arc::new(interior_comonad(&d, vec![a, a]));
        let bundle = build_kleisli_doctrine(&c).unwrap();
        for obj in 0..d.base.objects.len() {
            let ka = c.k.on_obj(obj);
            let g = &d.reindex[c.gamma.components[obj]];
            for pos in 0..bundle.doctrine.fibers[obj].len() {
                let alpha = bundle.fiber_element(obj, pos);
                assert_eq!(alpha, g.apply(c.k_fib[ka].apply(alpha)));
            }
        }
    }

    #[test]
    fn two_cell_iso_on_generated_instances() {
        for seed in 0..3 {
            let d = Arc::new(random_semilattice_doctrine(seed, 3));
            let c = Arc::new(IndexedPosetComonad::identity(d.clone()));
            let bundle = build_kleisli_doctrine(&c).unwrap();
            let oplax = OplaxComonadMorphism {
                cell: bundle.universal.clone(),
                j: bundle.universal_j.clone(),
            };
            let report =
                two_cell_iso_check(&bundle, &oplax, &oplax, &bundle.doctrine, 100_000).unwrap();
            assert!(report.bijection);
            assert!(report.oplax_two_cells >= 1);
        }
    }
}
