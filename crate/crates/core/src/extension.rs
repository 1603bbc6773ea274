//! The extension engine: from a doctrine `P`, an object `X` and an element
//! `phi` of the fiber over `X`, build the reader comonad `X x -`, take its
//! Kleisli doctrine, and obtain the extended doctrine whose fibers are the
//! principal downsets of the weakened `phi` — adding a constant of sort
//! `X` and forcing `phi` on it in one step. Also: the distributive law
//! between two such comonads, the structure-transport matrix, the
//! universal factorization of models, conservativity, and the
//! decomposition into add-constant followed by force-axiom.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::cat::{CatError, Functor, NatTransf, ProductStructure, ProductWitness};
use crate::comonad::{
    build_kleisli_doctrine, factorize_oplax, ComonadError, IndexedPosetComonad, KleisliBundle,
    OplaxComonadMorphism,
};
use crate::doctrine::{
    detect_structure, product_comparison, validate_morphism, validate_two_cell, Doctrine,
    DoctrineError, DoctrineMorphism, StructureKind, StructureReport, TwoCell,
};
use crate::order::{
    downset_and_quotient, heyting_ops, lattice_ops, DownsetQuotient, MonotoneMap, OrderError,
};

#[derive(Debug, Error)]
pub enum ExtensionError {
    #[error("axiom forcing requires a primary doctrine")]
    PrimaryRequired,
    #[error("base category carries no product structure")]
    ProductsRequired,
    #[error("missing construction in the base: {0}")]
    MissingConstruction(String),
    #[error("the supplied constant does not satisfy the axiom")]
    ConstantDoesNotSatisfyAxiom,
    #[error("transport witness failure for {0:?}: {1}")]
    TransportWitnessFailure(StructureKind, String),
    #[error("distributive law coherence violation: {0}")]
    CoherenceViolation(String),
    #[error("decomposition mismatch: {0}")]
    DecompositionMismatch(String),
    #[error("internal invariant violation: {0}")]
    InternalInvariantViolation(String),
    #[error("fullness counterexample: {0}")]
    FullnessCounterexample(String),
    #[error(transparent)]
    Comonad(#[from] ComonadError),
    #[error(transparent)]
    Doctrine(#[from] DoctrineError),
    #[error(transparent)]
    Cat(#[from] CatError),
    #[error(transparent)]
    Order(#[from] OrderError),
}

/// The output bundle of `extend`.
pub struct ExtensionResult {
    pub source: Arc<Doctrine>,
    pub x: usize,
    /// Forced element of the fiber over `x`; `None` is the pure
    /// add-a-constant construction.
    pub phi: Option<usize>,
    pub comonad: Arc<IndexedPosetComonad>,
    pub bundle: KleisliBundle,
    /// The 1-arrow `(F_X, f) : P -> P_(X,phi)`.
    pub morphism: DoctrineMorphism,
    /// The new constant: the Kleisli arrow `t ~> X`.
    pub constant: usize,
    /// Per object: the downset/quotient presentation of the fiber, when
    /// the big fiber has meets.
    pub downsets: Vec<Option<DownsetQuotient>>,
    pub report: StructureReport,
}

impl ExtensionResult {
    pub fn doctrine(&self) -> &Doctrine {
        &self.bundle.doctrine
    }
}

/// Builds the reader comonad `(X x -, k)` on `P` with `k_A(alpha) =
/// P(pr1)(phi) /\ P(pr2)(alpha)` (just `P(pr2)` when no axiom is forced),
/// `epsilon = pr2` and `gamma = <pr1, id>`, validated in full.
pub fn build_reader_comonad(
    d: &Arc<Doctrine>,
    x: usize,
    phi: Option<usize>,
) -> Result<IndexedPosetComonad, ExtensionError> {
    let base = &d.base;
    if base.products.is_none() {
        return Err(ExtensionError::ProductsRequired);
    }
    if phi.is_some() {
        let primary = detect_structure(d, StructureKind::Primary)?;
        if !primary.holds {
            return Err(ExtensionError::PrimaryRequired);
        }
    }
    let n_obj = base.objects.len();
    let witness = |a: usize| -> Result<ProductWitness, ExtensionError> {
        base.product(x, a).cloned().ok_or_else(|| {
            ExtensionError::MissingConstruction(format!(
                "product ({}, {})",
                base.objects[x], base.objects[a]
            ))
        })
    };
    let mut obj_map = Vec::with_capacity(n_obj);
    for a in 0..n_obj {
        obj_map.push(witness(a)?.obj);
    }
    let mut arr_map = Vec::with_capacity(base.arrows.len());
    for arr in &base.arrows {
        let wa = witness(arr.src)?;
        let f_pr2 = base
            .try_comp(
                base.arrow_index(&arr.name).expect("arrow"),
                wa.pr2,
            )
            .ok_or_else(|| {
                ExtensionError::MissingConstruction(format!("composite along `{}`", arr.name))
            })?;
        let k_arr = base.pairing(wa.pr1, f_pr2).map_err(|_| {
            ExtensionError::MissingConstruction(format!("pairing for `{}`", arr.name))
        })?;
        arr_map.push(k_arr);
    }
    let k = Functor { source: base.clone(), target: base.clone(), obj_map: obj_map.clone(), arr_map };
    let mut gamma = Vec::with_capacity(n_obj);
    let mut epsilon = Vec::with_capacity(n_obj);
    for a in 0..n_obj {
        let wa = witness(a)?;
        // gamma_A = <pr1, id> : X x A -> X x (X x A); the target product
        // witness must exist.
        let _ = witness(obj_map[a])?;
        let g = base.pairing(wa.pr1, base.identities[obj_map[a]]).map_err(|_| {
            ExtensionError::MissingConstruction(format!(
                "comultiplication pairing at `{}`",
                base.objects[a]
            ))
        })?;
        gamma.push(g);
        epsilon.push(wa.pr2);
    }
    let mut k_fib = Vec::with_capacity(n_obj);
    for a in 0..n_obj {
        let wa = witness(a)?;
        let fiber_a = d.fiber(a);
        let fiber_ka = d.fiber(obj_map[a]);
        let table: Vec<usize> = match phi {
            None => (0..fiber_a.len())
                .map(|alpha| d.reindex[wa.pr2].apply(alpha))
                .collect(),
            Some(phi) => {
                let cert = lattice_ops(fiber_ka);
                let meet = cert.meet.as_ref().ok_or(ExtensionError::PrimaryRequired)?;
                let weakened = d.reindex[wa.pr1].apply(phi);
                let nn = fiber_ka.len();
                (0..fiber_a.len())
                    .map(|alpha| meet[weakened * nn + d.reindex[wa.pr2].apply(alpha)])
                    .collect()
            }
        };
        k_fib.push(MonotoneMap::from_indices(
            fiber_a.clone(),
            fiber_ka.clone(),
            table,
        )?);
    }
    let comonad = IndexedPosetComonad {
        doctrine: d.clone(),
        k,
        k_fib,
        gamma: NatTransf { components: gamma },
        epsilon: NatTransf { components: epsilon },
    };
    comonad.validate()?;
    Ok(comonad)
}

/// Adds a constant of sort `x` and forces `phi` on it: the full extension.
///
/// `add_constant` and `add_axiom` are the two degenerate corners.
pub fn extend(
    d: &Arc<Doctrine>,
    x: usize,
    phi: Option<usize>,
) -> Result<ExtensionResult, ExtensionError> {
    let comonad = Arc::new(build_reader_comonad(d, x, phi)?);
    let mut bundle = build_kleisli_doctrine(&comonad)?;
    let base = &d.base;
    let bp = base.products.as_ref().unwrap();

    // Chosen products on the Kleisli base: the product object of (A, B) is
    // the base product object, projections are the images of the base
    // projections under the cofree functor, the terminal is unchanged.
    fn squiggly_of(
        bundle: &KleisliBundle,
        base: &crate::cat::FiniteCategory,
        a: usize,
        g: usize,
    ) -> Result<usize, ExtensionError> {
        bundle.squiggly(a, g).ok_or_else(|| {
            ExtensionError::InternalInvariantViolation(format!(
                "missing Kleisli arrow for ({}, {})",
                base.objects[a], base.arrows[g].name
            ))
        })
    }
    let terminal = bp.terminal;
    let mut bang = Vec::with_capacity(base.objects.len());
    for a in 0..base.objects.len() {
        let ka = comonad.k.on_obj(a);
        bang.push(squiggly_of(&bundle, base, a, bp.bang[ka])?);
    }
    let mut products = HashMap::new();
    for (&(a, b), w) in &bp.products {
        let eps_s = comonad.epsilon.components[w.obj];
        let pr1 = squiggly_of(&bundle, base, w.obj, base.comp(w.pr1, eps_s))?;
        let pr2 = squiggly_of(&bundle, base, w.obj, base.comp(w.pr2, eps_s))?;
        products.insert((a, b), ProductWitness { obj: w.obj, pr1, pr2 });
    }
    bundle.install_products(ProductStructure { terminal, bang, products })?;

    // Fiber law: the Kleisli fiber over A is exactly the principal downset
    // of P(pr1)(phi) in P(X x A), and that element is its top.
    for a in 0..base.objects.len() {
        let ka = comonad.k.on_obj(a);
        let wa = base.product(x, a).unwrap().clone();
        let big = d.fiber(ka);
        let bound = match phi {
            Some(phi) => d.reindex[wa.pr1].apply(phi),
            None => usize::MAX,
        };
        for alpha in 0..big.len() {
            let in_downset = match phi {
                Some(_) => big.leq_idx(alpha, bound),
                None => true,
            };
            let in_fiber = bundle.fiber_position(a, alpha).is_some();
            if in_downset != in_fiber {
                return Err(ExtensionError::InternalInvariantViolation(format!(
                    "fiber law fails over `{}` at `{}`",
                    base.objects[a],
                    big.element(alpha)
                )));
            }
        }
        if phi.is_some() {
            let top = lattice_ops(bundle.doctrine.fiber(a)).top.ok_or_else(|| {
                ExtensionError::InternalInvariantViolation(format!(
                    "extended fiber over `{}` has no top",
                    base.objects[a]
                ))
            })?;
            if bundle.fiber_element(a, top) != bound {
                return Err(ExtensionError::InternalInvariantViolation(format!(
                    "top of the extended fiber over `{}` is not the weakened axiom",
                    base.objects[a]
                )));
            }
        }
    }

    // Downset / quotient presentations, attached when the big fiber has
    // meets.
    let mut downsets = Vec::with_capacity(base.objects.len());
    for a in 0..base.objects.len() {
        let ka = comonad.k.on_obj(a);
        let big = d.fiber(ka);
        let cert = lattice_ops(big);
        if !cert.has_meets() {
            downsets.push(None);
            continue;
        }
        let bound = match phi {
            Some(phi) => {
                let wa = base.product(x, a).unwrap();
                d.reindex[wa.pr1].apply(phi)
            }
            None => cert.top.unwrap(),
        };
        downsets.push(Some(downset_and_quotient(big, &cert, bound)?));
    }

    // The 1-arrow (F_X, f) is the universal arrow of the Kleisli bundle;
    // validate it as a doctrine morphism, preserving the primary structure
    // whenever the source certifies it.
    let primary = detect_structure(d, StructureKind::Primary)
        .map(|r| r.holds)
        .unwrap_or(false);
    let preserve: &[StructureKind] =
        if primary { &[StructureKind::Primary] } else { &[] };
    validate_morphism(d, &bundle.doctrine, &bundle.universal, true, preserve)?;
    let morphism = bundle.universal.clone();

    // The new constant t ~> X, underlying pr1 : X x t -> X.
    let wt = base.product(x, terminal).unwrap().clone();
    let constant = squiggly_of(&bundle, base, terminal, wt.pr1)?;

    let report = StructureReport::detect_all(&bundle.doctrine);
    Ok(ExtensionResult {
        source: d.clone(),
        x,
        phi,
        comonad,
        bundle,
        morphism,
        constant,
        downsets,
        report,
    })
}

/// Adds a constant of sort `x` without forcing anything.
pub fn add_constant(d: &Arc<Doctrine>, x: usize) -> Result<ExtensionResult, ExtensionError> {
    extend(d, x, None)
}

/// Forces the sentence `phi` (an element of the fiber over the terminal)
/// without adding a constant.
pub fn add_axiom(d: &Arc<Doctrine>, phi: usize) -> Result<ExtensionResult, ExtensionError> {
    let t = d.base.terminal().ok_or(ExtensionError::ProductsRequired)?;
    extend(d, t, Some(phi))
}

/// Evaluates the forced element on the new constant: reindexes `f_X(phi)`
/// along `id_X : t ~> X` and checks the result is the top of the fiber
/// over the terminal.
pub fn interpret_new_constant(res: &ExtensionResult) -> Result<(usize, bool), ExtensionError> {
    let ext = res.doctrine();
    let phi = match res.phi {
        Some(phi) => phi,
        None => lattice_ops(res.source.fiber(res.x)).top.ok_or_else(|| {
            ExtensionError::InternalInvariantViolation(
                "no axiom was forced and the fiber over X has no top".to_string(),
            )
        })?,
    };
    let interpreted = res.morphism.fiber_maps[res.x].apply(phi);
    let value = ext.reindex[res.constant].apply(interpreted);
    let t = ext.base.terminal().unwrap();
    let top = lattice_ops(ext.fiber(t)).top.ok_or_else(|| {
        ExtensionError::InternalInvariantViolation("fiber over the terminal has no top".into())
    })?;
    Ok((value, value == top))
}

// ---------------------------------------------------------------------
// Distributive law between two reader comonads
// ---------------------------------------------------------------------

#[derive(Debug)]
pub struct DistributiveLawReport {
    /// Components of the law `X x (Y x -) -> Y x (X x -)`, per object.
    pub ell: Vec<usize>,
    pub two_cell_is_equality: bool,
    pub invertible: bool,
    pub unique: bool,
    /// The composite comonad agrees with the reader comonad at
    /// `(X x Y, P(pr1) phi /\ P(pr2) psi)` across the canonical
    /// associativity isomorphism.
    pub composite_matches: bool,
}

/// Builds and fully checks the distributive law between the reader
/// comonads at `(x, phi)` and `(y, psi)`.
pub fn distributive_law_check(
    d: &Arc<Doctrine>,
    x: usize,
    phi: usize,
    y: usize,
    psi: usize,
) -> Result<DistributiveLawReport, ExtensionError> {
    let base = &d.base;
    let ck = Arc::new(build_reader_comonad(d, x, Some(phi))?);
    let cc = Arc::new(build_reader_comonad(d, y, Some(psi))?);
    let n_obj = base.objects.len();
    let need = |a: usize, b: usize| -> Result<ProductWitness, ExtensionError> {
        base.product(a, b).cloned().ok_or_else(|| {
            ExtensionError::MissingConstruction(format!(
                "product ({}, {})",
                base.objects[a], base.objects[b]
            ))
        })
    };

    // ell_A : X x (Y x A) -> Y x (X x A), swapping the two contexts.
    let mut ell = Vec::with_capacity(n_obj);
    for a in 0..n_obj {
        let ya = cc.k.on_obj(a);
        let xa = ck.k.on_obj(a);
        let w_x_ya = need(x, ya)?;
        let w_y_a = need(y, a)?;
        let w_x_a = need(x, a)?;
        let w_y_xa = need(y, xa)?;
        let _ = w_y_xa;
        // First component: Y, extracted from the inner Y x A.
        let first = base.comp(w_y_a.pr1, w_x_ya.pr2);
        // Second component: <pr1, pr2 . pr2> : X x (Y x A) -> X x A.
        let inner = base.comp(w_y_a.pr2, w_x_ya.pr2);
        let second = base.pairing(w_x_ya.pr1, inner).map_err(|_| {
            ExtensionError::MissingConstruction("pairing for the distributive law".into())
        })?;
        let _ = w_x_a;
        let l = base.pairing(first, second).map_err(|_| {
            ExtensionError::MissingConstruction("pairing for the distributive law".into())
        })?;
        ell.push(l);
    }
    // Naturality of ell as a transformation K.C -> C.K.
    let kc = ck.k.compose(&cc.k);
    let ckf = cc.k.compose(&ck.k);
    let ell_nt = NatTransf { components: ell.clone() };
    ell_nt.validate(&kc, &ckf)?;

    // Coherence diagrams (two comultiplication pentagons, two counit
    // triangles), componentwise.
    for a in 0..n_obj {
        let ya = cc.k.on_obj(a);
        let xa = ck.k.on_obj(a);
        // (1) C(gamma^K) . ell = ell_K . K(ell)... the K-comultiplication
        // side: gamma^K distributed over C.
        // K C -> K^2 C -> K C K ... we follow the two sides of each square
        // concretely.
        // Side A: lambda_K . ell  vs  C(ell) . ell_C . K(lambda), where
        // lambda = gamma of the C comonad.
        let lhs = base.comp(cc.gamma.components[xa], ell[a]);
        let k_lambda = ck.k.on_arr(cc.gamma.components[a]);
        let ell_c = ell[cc.k.on_obj(a)];
        let c_ell = cc.k.on_arr(ell[a]);
        let rhs = base.comp(c_ell, base.comp(ell_c, k_lambda));
        if lhs != rhs {
            return Err(ExtensionError::CoherenceViolation(format!(
                "comultiplication square of the second comonad fails at `{}`",
                base.objects[a]
            )));
        }
        // Side B: C(gamma) . ell  vs  ell_K . K(ell) . gamma_C.
        let lhs = base.comp(cc.k.on_arr(ck.gamma.components[a]), ell[a]);
        let gamma_c = ck.gamma.components[ya];
        let k_ell = ck.k.on_arr(ell[a]);
        let ell_k = ell[ck.k.on_obj(a)];
        let rhs = base.comp(ell_k, base.comp(k_ell, gamma_c));
        if lhs != rhs {
            return Err(ExtensionError::CoherenceViolation(format!(
                "comultiplication square of the first comonad fails at `{}`",
                base.objects[a]
            )));
        }
        // Counit triangles: delta_K . ell = K(delta) and
        // C(eps) . ell = eps_C.
        let lhs = base.comp(cc.epsilon.components[xa], ell[a]);
        let rhs = ck.k.on_arr(cc.epsilon.components[a]);
        if lhs != rhs {
            return Err(ExtensionError::CoherenceViolation(format!(
                "counit triangle of the second comonad fails at `{}`",
                base.objects[a]
            )));
        }
        let lhs = base.comp(cc.k.on_arr(ck.epsilon.components[a]), ell[a]);
        let rhs = ck.epsilon.components[ya];
        if lhs != rhs {
            return Err(ExtensionError::CoherenceViolation(format!(
                "counit triangle of the first comonad fails at `{}`",
                base.objects[a]
            )));
        }
    }

    // 2-cell inequality f_{CA}(g_A(alpha)) <= P(ell_A)(g_{KA}(f_A(alpha))),
    // which in this case holds with equality.
    let mut equality = true;
    for a in 0..n_obj {
        let fiber = d.fiber(a);
        let ya = cc.k.on_obj(a);
        let xa = ck.k.on_obj(a);
        for alpha in 0..fiber.len() {
            let lhs = ck.k_fib[ya].apply(cc.k_fib[a].apply(alpha));
            let rhs = d.reindex[ell[a]].apply(cc.k_fib[xa].apply(ck.k_fib[a].apply(alpha)));
            if lhs != rhs {
                equality = false;
                let big = d.fiber(ck.k.on_obj(ya));
                if !big.leq_idx(lhs, rhs) {
                    return Err(ExtensionError::CoherenceViolation(format!(
                        "distributive 2-cell inequality fails at `{}`",
                        base.objects[a]
                    )));
                }
            }
        }
    }

    // Invertibility and uniqueness via the projection equations.
    let mut invertible = true;
    let mut unique = true;
    for a in 0..n_obj {
        let src = base.arrows[ell[a]].src;
        let tgt = base.arrows[ell[a]].tgt;
        let inv = base.hom(tgt, src).into_iter().find(|&v| {
            base.try_comp(ell[a], v) == Some(base.identities[tgt])
                && base.try_comp(v, ell[a]) == Some(base.identities[src])
        });
        if inv.is_none() {
            invertible = false;
        }
        let ya = cc.k.on_obj(a);
        let xa = ck.k.on_obj(a);
        let w_x_ya = need(x, ya)?;
        let w_y_a = need(y, a)?;
        let w_x_a = need(x, a)?;
        let w_y_xa = need(y, xa)?;
        let expected_first = base.comp(w_y_a.pr1, w_x_ya.pr2);
        let expected_x = w_x_ya.pr1;
        let expected_a = base.comp(w_y_a.pr2, w_x_ya.pr2);
        let count = base
            .hom(src, tgt)
            .into_iter()
            .filter(|&h| {
                base.try_comp(w_y_xa.pr1, h) == Some(expected_first)
                    && base.try_comp(w_x_a.pr1, base.comp(w_y_xa.pr2, h)) == Some(expected_x)
                    && base.try_comp(w_x_a.pr2, base.comp(w_y_xa.pr2, h)) == Some(expected_a)
            })
            .count();
        if count != 1 {
            unique = false;
        }
    }

    // The composite comonad equals the reader comonad at
    // (X x Y, P(pr1) phi /\ P(pr2) psi), across the canonical isomorphism
    // m_A : (X x Y) x A -> X x (Y x A).
    let w_xy = need(x, y)?;
    let fiber_xy = d.fiber(w_xy.obj);
    let cert_xy = lattice_ops(fiber_xy);
    let meet_xy = cert_xy.meet.as_ref().ok_or(ExtensionError::PrimaryRequired)?;
    let chi = meet_xy
        [d.reindex[w_xy.pr1].apply(phi) * fiber_xy.len() + d.reindex[w_xy.pr2].apply(psi)];
    let cw = Arc::new(build_reader_comonad(d, w_xy.obj, Some(chi))?);
    let mut composite_matches = true;
    for a in 0..n_obj {
        let wa = need(w_xy.obj, a)?;
        let ya = cc.k.on_obj(a);
        let w_x_ya = need(x, ya)?;
        let w_y_a = need(y, a)?;
        // m_A = <pr1 . pr1, <pr2 . pr1, pr2>>.
        let first = base.comp(w_xy.pr1, wa.pr1);
        let inner = base
            .pairing(base.comp(w_xy.pr2, wa.pr1), wa.pr2)
            .map_err(|_| ExtensionError::MissingConstruction("associativity pairing".into()))?;
        let m_a = base
            .pairing(first, inner)
            .map_err(|_| ExtensionError::MissingConstruction("associativity pairing".into()))?;
        let _ = (w_x_ya, w_y_a);
        // Invertibility of m_A.
        let (src, tgt) = (base.arrows[m_a].src, base.arrows[m_a].tgt);
        let m_inv = base.hom(tgt, src).into_iter().find(|&v| {
            base.try_comp(m_a, v) == Some(base.identities[tgt])
                && base.try_comp(v, m_a) == Some(base.identities[src])
        });
        let Some(m_inv) = m_inv else {
            composite_matches = false;
            continue;
        };
        // Fiber maps: P(m_A) . k^{XY}_A = k^K_{CA} . k^C_A.
        let fiber_a = d.fiber(a);
        for alpha in 0..fiber_a.len() {
            let lhs = d.reindex[m_a].apply(cw.k_fib[a].apply(alpha));
            let rhs = ck.k_fib[ya].apply(cc.k_fib[a].apply(alpha));
            if lhs != rhs {
                composite_matches = false;
            }
        }
        // Counit: eps^C_A . eps^K_{CA} . m_A = eps^{XY}_A.
        let composite_eps = base.comp(
            cc.epsilon.components[a],
            base.comp(ck.epsilon.components[ya], m_a),
        );
        if composite_eps != cw.epsilon.components[a] {
            composite_matches = false;
        }
        // Comultiplication: gamma^{comp}_A . m_A = m2_A . gamma^{XY}_A,
        // where gamma^{comp} = K(ell_C) . gamma^K_C applied after C's
        // gamma; concretely the composite comultiplication is
        // K(ell_{CA}) . gamma^K_{CA} . K(gamma^C_A)? We verify through the
        // characterizing property instead: both sides of the composite
        // comonad's comultiplication over m must agree with the reader
        // comultiplication of (X x Y, chi).
        let m2_a = {
            let kca = kc.on_obj(a);
            let m_at_kw = {
                // m at the object (X x Y) x A target: we need
                // m_{K_W A} : (X x Y) x ((X x Y) x A) -> X x (Y x ((X x Y) x A))
                let wa2 = need(w_xy.obj, cw.k.on_obj(a))?;
                let first = base.comp(w_xy.pr1, wa2.pr1);
                let inner = base
                    .pairing(base.comp(w_xy.pr2, wa2.pr1), wa2.pr2)
                    .map_err(|_| {
                        ExtensionError::MissingConstruction("associativity pairing".into())
                    })?;
                base.pairing(first, inner).map_err(|_| {
                    ExtensionError::MissingConstruction("associativity pairing".into())
                })?
            };
            // K_comp(m_A) . m_{K_W A}.
            base.comp(kc.on_arr(m_a), m_at_kw)
        };
        // Composite comultiplication at A: K(ell_{CA}) . gamma^K_{CA}
        // after K C gamma^C... assembled as in the standard composite
        // comonad: gamma^{comp}_A = K(ell_{CA}) . gamma^K_{CA} . K(gamma^C_A).
        let gamma_comp = base.comp(
            ck.k.on_arr(ell[cc.k.on_obj(a)]),
            base.comp(ck.gamma.components[ya], ck.k.on_arr(cc.gamma.components[a])),
        );
        let lhs = base.comp(gamma_comp, m_a);
        let rhs = base.comp(m2_a, cw.gamma.components[a]);
        if lhs != rhs {
            composite_matches = false;
        }
        let _ = m_inv;
    }

    Ok(DistributiveLawReport {
        ell,
        two_cell_is_equality: equality,
        invertible,
        unique,
        composite_matches,
    })
}

// ---------------------------------------------------------------------
// Structure transport
// ---------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct TransportRow {
    pub kind: StructureKind,
    /// The paper's explicit witness was constructed and passed its
    /// defining clauses.
    pub witness_ok: bool,
    /// Independent detection on the extended doctrine confirms the kind.
    pub detector_agrees: bool,
    /// Preservation by `(F_X, f)`; `None` when no preservation is claimed.
    pub preserved: Option<bool>,
    pub note: Option<String>,
}

#[derive(Debug, Default)]
pub struct TransportReport {
    pub rows: Vec<TransportRow>,
}

impl TransportReport {
    pub fn row(&self, kind: StructureKind) -> Option<&TransportRow> {
        self.rows.iter().find(|r| r.kind == kind)
    }
}

struct TransportCx<'a> {
    d: &'a Doctrine,
    res: &'a ExtensionResult,
    src_report: &'a StructureReport,
}

impl<'a> TransportCx<'a> {
    fn ext(&self) -> &Doctrine {
        self.res.doctrine()
    }

    /// The weakened axiom `P(pr1)(phi)` inside the big fiber over `X x A`.
    fn bound(&self, a: usize) -> usize {
        let wa = self.d.base.product(self.res.x, a).unwrap();
        match self.res.phi {
            Some(phi) => self.d.reindex[wa.pr1].apply(phi),
            None => lattice_ops(self.d.fiber(self.res.comonad.k.on_obj(a)))
                .top
                .expect("constant mode requires nothing, but bound() is only used with meets"),
        }
    }

    /// Position, in the extended fiber over `a`, of a big-fiber element.
    fn pos(&self, a: usize, elem: usize) -> Option<usize> {
        self.res.bundle.fiber_position(a, elem)
    }

    fn elem(&self, a: usize, pos: usize) -> usize {
        self.res.bundle.fiber_element(a, pos)
    }
}

/// Builds the transport matrix: for every structure kind the source
/// doctrine holds, construct the explicit witness in the extension,
/// verify its defining clauses, compare with independent detection, and
/// check preservation by `(F_X, f)`.
pub fn transport_report(res: &ExtensionResult) -> Result<TransportReport, ExtensionError> {
    let d = res.source.as_ref();
    let src_report = StructureReport::detect_all(d);
    let cx = TransportCx { d, res, src_report: &src_report };
    let mut rows = Vec::new();
    for kind in StructureKind::ALL {
        if !src_report.holds(kind) {
            continue;
        }
        let row = match kind {
            StructureKind::Primary => transport_primary(&cx)?,
            StructureKind::Elementary => transport_elementary(&cx)?,
            StructureKind::Existential => transport_quantifier(&cx, true)?,
            StructureKind::Universal => transport_quantifier(&cx, false)?,
            StructureKind::Implicational => transport_implication(&cx)?,
            StructureKind::Bounded => transport_bounded(&cx)?,
            StructureKind::Joins => transport_joins(&cx)?,
            StructureKind::Heyting => transport_heyting(&cx, &mut rows)?,
            StructureKind::Boolean => transport_boolean(&cx)?,
            StructureKind::StarAutonomous => transport_negation(&cx, StructureKind::StarAutonomous)?,
            StructureKind::PseudoComplements => {
                transport_negation(&cx, StructureKind::PseudoComplements)?
            }
            StructureKind::WeakPowerObjects => transport_wpo(&cx)?,
        };
        rows.push(row);
    }
    Ok(TransportReport { rows })
}

fn transport_primary(cx: &TransportCx) -> Result<TransportRow, ExtensionError> {
    let ext = cx.ext();
    let mut witness_ok = true;
    for a in 0..ext.base.objects.len() {
        let fiber = ext.fiber(a);
        let big = cx.d.fiber(cx.res.comonad.k.on_obj(a));
        let big_cert = lattice_ops(big);
        let big_meet = big_cert.meet.as_ref().ok_or(ExtensionError::PrimaryRequired)?;
        let cert = lattice_ops(fiber);
        // Top is the weakened axiom; meets restrict from the big fiber.
        let Some(top) = cert.top else {
            witness_ok = false;
            continue;
        };
        if cx.res.phi.is_some() && cx.elem(a, top) != cx.bound(a) {
            witness_ok = false;
        }
        let Some(meet) = cert.meet.as_ref() else {
            witness_ok = false;
            continue;
        };
        let n = fiber.len();
        for p in 0..n {
            for q in 0..n {
                if cx.elem(a, meet[p * n + q])
                    != big_meet[cx.elem(a, p) * big.len() + cx.elem(a, q)]
                {
                    witness_ok = false;
                }
            }
        }
    }
    // Preservation: f_A respects meets and top.
    let preserved = validate_morphism(cx.d, ext, &cx.res.morphism, true, &[StructureKind::Primary])
        .is_ok();
    Ok(TransportRow {
        kind: StructureKind::Primary,
        witness_ok,
        detector_agrees: cx.res.report.holds(StructureKind::Primary),
        preserved: Some(preserved),
        note: None,
    })
}

fn transport_elementary(cx: &TransportCx) -> Result<TransportRow, ExtensionError> {
    let ext = cx.ext();
    let src_witness = cx
        .src_report
        .get(StructureKind::Elementary)
        .and_then(|r| r.elementary.as_ref())
        .ok_or_else(|| {
            ExtensionError::InternalInvariantViolation("elementary witness missing".into())
        })?;
    // delta' over A = f_{A x A}(delta_A); the product object of (A, A) in
    // the Kleisli base is the base product object.
    let mut family = HashMap::new();
    for (&a, &delta) in &src_witness.delta {
        let sq = cx.d.base.product(a, a).unwrap().obj;
        family.insert(a, cx.res.morphism.fiber_maps[sq].apply(delta));
    }
    let witness_ok = crate::doctrine::check_elementary_family(ext, &family).is_ok();
    Ok(TransportRow {
        kind: StructureKind::Elementary,
        witness_ok,
        detector_agrees: cx.res.report.holds(StructureKind::Elementary),
        preserved: Some(witness_ok),
        note: Some("preservation holds by construction: delta' = f(delta)".into()),
    })
}

/// The canonical associativity isomorphism `X x (C x B) -> (X x C) x B`
/// and its inverse, built from pairings and verified mutually inverse.
fn assoc_iso(
    d: &Doctrine,
    x: usize,
    c: usize,
    b: usize,
) -> Result<(usize, usize), ExtensionError> {
    let base = &d.base;
    let need = |a: usize, b: usize| -> Result<ProductWitness, ExtensionError> {
        base.product(a, b).cloned().ok_or_else(|| {
            ExtensionError::MissingConstruction(format!(
                "product ({}, {})",
                base.objects[a], base.objects[b]
            ))
        })
    };
    let w_cb = need(c, b)?;
    let w_x_s = need(x, w_cb.obj)?;
    let w_xc = need(x, c)?;
    let w_t = need(w_xc.obj, b)?;
    // fwd = <<pr1, pr1 . pr2>, pr2 . pr2> : X x (C x B) -> (X x C) x B.
    let fwd_inner = base
        .pairing(w_x_s.pr1, base.comp(w_cb.pr1, w_x_s.pr2))
        .map_err(|_| ExtensionError::MissingConstruction("associativity pairing".into()))?;
    let fwd = base
        .pairing(fwd_inner, base.comp(w_cb.pr2, w_x_s.pr2))
        .map_err(|_| ExtensionError::MissingConstruction("associativity pairing".into()))?;
    // bwd = <pr1 . pr1, <pr2 . pr1, pr2>> : (X x C) x B -> X x (C x B).
    let bwd_inner = base
        .pairing(base.comp(w_xc.pr2, w_t.pr1), w_t.pr2)
        .map_err(|_| ExtensionError::MissingConstruction("associativity pairing".into()))?;
    let bwd = base
        .pairing(base.comp(w_xc.pr1, w_t.pr1), bwd_inner)
        .map_err(|_| ExtensionError::MissingConstruction("associativity pairing".into()))?;
    let (s, t) = (base.arrows[fwd].src, base.arrows[fwd].tgt);
    if base.try_comp(bwd, fwd) != Some(base.identities[s])
        || base.try_comp(fwd, bwd) != Some(base.identities[t])
    {
        return Err(ExtensionError::InternalInvariantViolation(
            "associativity comparison is not an isomorphism".into(),
        ));
    }
    Ok((fwd, bwd))
}

fn transport_quantifier(cx: &TransportCx, left: bool) -> Result<TransportRow, ExtensionError> {
    let kind = if left { StructureKind::Existential } else { StructureKind::Universal };
    let ext = cx.ext();
    let d = cx.d;
    let src_witness = cx
        .src_report
        .get(kind)
        .and_then(|r| if left { r.existential.as_ref() } else { r.universal.as_ref() })
        .ok_or_else(|| {
            ExtensionError::InternalInvariantViolation("quantifier witness missing".into())
        })?;
    let ext_witness = cx
        .res
        .report
        .get(kind)
        .and_then(|r| if left { r.existential.as_ref() } else { r.universal.as_ref() });
    let mut witness_ok = true;
    let mut detector_agrees = cx.res.report.holds(kind);
    let mut preserved = true;
    for c in 0..d.base.objects.len() {
        for b in 0..d.base.objects.len() {
            let Some(w_cb) = d.base.product(c, b) else { continue };
            let s = w_cb.obj;
            let xc = cx.res.comonad.k.on_obj(c);
            let Some(q_big) = src_witness.tables.get(&(xc, b)) else {
                witness_ok = false;
                continue;
            };
            let (fwd, bwd) = assoc_iso(d, cx.res.x, c, b)?;
            let _ = fwd;
            // Constructed table: beta |-> Q^B_{XC}(P(bwd)(beta)), plus the
            // meet with the weakened axiom in the universal case.
            let fiber_s = ext.fiber(s);
            let fiber_c = ext.fiber(c);
            let big_c = d.fiber(xc);
            let cert_c = lattice_ops(big_c);
            let meet_c = cert_c.meet.as_ref().ok_or(ExtensionError::PrimaryRequired)?;
            let mut table = Vec::with_capacity(fiber_s.len());
            for p in 0..fiber_s.len() {
                let beta = cx.elem(s, p);
                let moved = d.reindex[bwd].apply(beta);
                let big_result = if left {
                    q_big.apply(moved)
                } else {
                    meet_c[q_big.apply(moved) * big_c.len() + cx.bound(c)]
                };
                match cx.pos(c, big_result) {
                    Some(pos) => table.push(pos),
                    None => {
                        witness_ok = false;
                        table.push(0);
                    }
                }
            }
            // Defining clause: adjointness to the extended weakening.
            let ext_w = ext.base.product(c, b).unwrap();
            let weaken = &ext.reindex[ext_w.pr1];
            for p in 0..fiber_s.len() {
                for g in 0..fiber_c.len() {
                    let (lhs, rhs) = if left {
                        (fiber_c.leq_idx(table[p], g), fiber_s.leq_idx(p, weaken.apply(g)))
                    } else {
                        (fiber_c.leq_idx(g, table[p]), fiber_s.leq_idx(weaken.apply(g), p))
                    };
                    if lhs != rhs {
                        witness_ok = false;
                    }
                }
            }
            // Independent detection must agree table-for-table: adjoints
            // are unique.
            if let Some(ew) = ext_witness {
                if let Some(det) = ew.tables.get(&(c, b)) {
                    if det.table() != table.as_slice() {
                        detector_agrees = false;
                    }
                }
            }
            // Preservation: f_C . Q^B_C = Q' . f_{C x B} pointwise.
            let Some(q_src) = src_witness.tables.get(&(c, b)) else {
                continue;
            };
            let fiber_cb = d.fiber(s);
            for alpha in 0..fiber_cb.len() {
                let lhs = cx.res.morphism.fiber_maps[c].apply(q_src.apply(alpha));
                let rhs = table[cx.res.morphism.fiber_maps[s].apply(alpha)];
                if lhs != rhs {
                    preserved = false;
                }
            }
        }
    }
    let mut note = None;
    if !left {
        let src_frob = cx.src_report.get(kind).map(|r| r.universal_frobenius).unwrap_or(false);
        let ext_frob = cx.res.report.get(kind).map(|r| r.universal_frobenius).unwrap_or(false);
        if src_frob {
            note = Some(format!(
                "Frobenius for the universal quantifier carries over: {}",
                ext_frob
            ));
            if !ext_frob {
                witness_ok = false;
            }
        }
    }
    Ok(TransportRow { kind, witness_ok, detector_agrees, preserved: Some(preserved), note })
}

fn transport_implication(cx: &TransportCx) -> Result<TransportRow, ExtensionError> {
    let ext = cx.ext();
    let d = cx.d;
    let mut witness_ok = true;
    let mut preserved = true;
    for a in 0..ext.base.objects.len() {
        let fiber = ext.fiber(a);
        let big = d.fiber(cx.res.comonad.k.on_obj(a));
        let big_cert = lattice_ops(big);
        let big_h = heyting_ops(big, &big_cert)?;
        let big_meet = big_cert.meet.as_ref().unwrap();
        let (n, nn) = (fiber.len(), big.len());
        let bound = cx.bound(a);
        // imp'(p, q) = (e(p) -> e(q)) /\ P(pr1)(phi).
        let mut imp = vec![0usize; n * n];
        for p in 0..n {
            for q in 0..n {
                let big_imp = big_h.imp(nn, cx.elem(a, p), cx.elem(a, q));
                let bounded = big_meet[big_imp * nn + bound];
                match cx.pos(a, bounded) {
                    Some(pos) => imp[p * n + q] = pos,
                    None => witness_ok = false,
                }
            }
        }
        // Currying clause in the extended fiber.
        let cert = lattice_ops(fiber);
        let meet = cert.meet.as_ref().ok_or(ExtensionError::PrimaryRequired)?;
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    let curried = fiber.leq_idx(r, imp[p * n + q]);
                    let direct = fiber.leq_idx(meet[p * n + r], q);
                    if curried != direct {
                        witness_ok = false;
                    }
                }
            }
        }
        // Preservation: f_A(alpha -> beta) = f(alpha) => f(beta).
        let src_fiber = d.fiber(a);
        let src_h = heyting_ops(src_fiber, &lattice_ops(src_fiber))?;
        let m = src_fiber.len();
        for alpha in 0..m {
            for beta in 0..m {
                let lhs = cx.res.morphism.fiber_maps[a].apply(src_h.imp(m, alpha, beta));
                let rhs = imp[cx.res.morphism.fiber_maps[a].apply(alpha) * n
                    + cx.res.morphism.fiber_maps[a].apply(beta)];
                if lhs != rhs {
                    preserved = false;
                }
            }
        }
    }
    Ok(TransportRow {
        kind: StructureKind::Implicational,
        witness_ok,
        detector_agrees: cx.res.report.holds(StructureKind::Implicational),
        preserved: Some(preserved),
        note: None,
    })
}

fn transport_bounded(cx: &TransportCx) -> Result<TransportRow, ExtensionError> {
    let ext = cx.ext();
    let d = cx.d;
    let mut witness_ok = true;
    let mut preserved = true;
    for a in 0..ext.base.objects.len() {
        let fiber = ext.fiber(a);
        let big = d.fiber(cx.res.comonad.k.on_obj(a));
        let big_bot = lattice_ops(big).bottom.unwrap();
        let cert = lattice_ops(fiber);
        // 0' = bottom of the big fiber, which lies in every downset.
        match (cx.pos(a, big_bot), cert.bottom) {
            (Some(p), Some(b)) if p == b => {}
            _ => witness_ok = false,
        }
        let src_bot = lattice_ops(d.fiber(a)).bottom.unwrap();
        if cert.bottom != Some(cx.res.morphism.fiber_maps[a].apply(src_bot)) {
            preserved = false;
        }
        let src_top = lattice_ops(d.fiber(a)).top.unwrap();
        if cert.top != Some(cx.res.morphism.fiber_maps[a].apply(src_top)) {
            preserved = false;
        }
    }
    Ok(TransportRow {
        kind: StructureKind::Bounded,
        witness_ok,
        detector_agrees: cx.res.report.holds(StructureKind::Bounded),
        preserved: Some(preserved),
        note: None,
    })
}

fn transport_joins(cx: &TransportCx) -> Result<TransportRow, ExtensionError> {
    let ext = cx.ext();
    let d = cx.d;
    let mut witness_ok = true;
    let mut preserved = true;
    let mut distributive = true;
    for a in 0..ext.base.objects.len() {
        let fiber = ext.fiber(a);
        let big = d.fiber(cx.res.comonad.k.on_obj(a));
        let big_cert = lattice_ops(big);
        let (big_join, big_meet) = (
            big_cert.join.as_ref().unwrap(),
            big_cert.meet.as_ref().unwrap(),
        );
        let nn = big.len();
        // Distributivity of the big fiber.
        for x in 0..nn {
            for y in 0..nn {
                for z in 0..nn {
                    if big_meet[x * nn + big_join[y * nn + z]]
                        != big_join[big_meet[x * nn + y] * nn + big_meet[x * nn + z]]
                    {
                        distributive = false;
                    }
                }
            }
        }
        let n = fiber.len();
        // join' = join computed in the big fiber; it stays in the downset.
        let mut join = vec![0usize; n * n];
        for p in 0..n {
            for q in 0..n {
                let j = big_join[cx.elem(a, p) * nn + cx.elem(a, q)];
                match cx.pos(a, j) {
                    Some(pos) => join[p * n + q] = pos,
                    None => witness_ok = false,
                }
            }
        }
        // Least-upper-bound clauses in the extended fiber.
        for p in 0..n {
            for q in 0..n {
                let j = join[p * n + q];
                if !fiber.leq_idx(p, j) || !fiber.leq_idx(q, j) {
                    witness_ok = false;
                }
                for u in 0..n {
                    if fiber.leq_idx(p, u) && fiber.leq_idx(q, u) && !fiber.leq_idx(j, u) {
                        witness_ok = false;
                    }
                }
            }
        }
        // Preservation by f.
        let src = d.fiber(a);
        let src_join = lattice_ops(src).join.unwrap();
        let m = src.len();
        for alpha in 0..m {
            for beta in 0..m {
                let lhs = cx.res.morphism.fiber_maps[a].apply(src_join[alpha * m + beta]);
                let rhs = join[cx.res.morphism.fiber_maps[a].apply(alpha) * n
                    + cx.res.morphism.fiber_maps[a].apply(beta)];
                if lhs != rhs {
                    preserved = false;
                }
            }
        }
    }
    if distributive && !preserved {
        return Err(ExtensionError::TransportWitnessFailure(
            StructureKind::Joins,
            "distributive fibers but joins not preserved".into(),
        ));
    }
    Ok(TransportRow {
        kind: StructureKind::Joins,
        witness_ok,
        detector_agrees: cx.res.report.holds(StructureKind::Joins),
        preserved: Some(preserved),
        note: Some(format!("fibers distributive: {distributive}")),
    })
}

fn transport_heyting(
    cx: &TransportCx,
    rows: &mut Vec<TransportRow>,
) -> Result<TransportRow, ExtensionError> {
    // Heyting = implication + joins + bounds; combine the other rows.
    let find = |k: StructureKind, rows: &Vec<TransportRow>| {
        rows.iter().find(|r| r.kind == k).cloned()
    };
    let imp = match find(StructureKind::Implicational, rows) {
        Some(r) => r,
        None => transport_implication(cx)?,
    };
    let joins = match find(StructureKind::Joins, rows) {
        Some(r) => r,
        None => transport_joins(cx)?,
    };
    let bounded = match find(StructureKind::Bounded, rows) {
        Some(r) => r,
        None => transport_bounded(cx)?,
    };
    Ok(TransportRow {
        kind: StructureKind::Heyting,
        witness_ok: imp.witness_ok && joins.witness_ok && bounded.witness_ok,
        detector_agrees: cx.res.report.holds(StructureKind::Heyting),
        preserved: Some(
            imp.preserved.unwrap_or(false)
                && joins.preserved.unwrap_or(false)
                && bounded.preserved.unwrap_or(false),
        ),
        note: None,
    })
}

fn transport_boolean(cx: &TransportCx) -> Result<TransportRow, ExtensionError> {
    let ext = cx.ext();
    let d = cx.d;
    let mut witness_ok = true;
    let mut preserved = true;
    for a in 0..ext.base.objects.len() {
        let fiber = ext.fiber(a);
        let big = d.fiber(cx.res.comonad.k.on_obj(a));
        let big_cert = lattice_ops(big);
        let big_h = heyting_ops(big, &big_cert)?;
        let big_neg = big_h.pseudo_complement.as_ref().unwrap();
        let big_meet = big_cert.meet.as_ref().unwrap();
        let nn = big.len();
        let bound = cx.bound(a);
        let neg = |p: usize| -> Option<usize> {
            cx.pos(a, big_meet[big_neg[cx.elem(a, p)] * nn + bound])
        };
        for p in 0..fiber.len() {
            match neg(p).and_then(neg) {
                Some(pp) if pp == p => {}
                _ => witness_ok = false,
            }
        }
        // f(not alpha) = not' f(alpha).
        let src = d.fiber(a);
        let src_h = heyting_ops(src, &lattice_ops(src))?;
        let src_neg = src_h.pseudo_complement.as_ref().unwrap();
        for alpha in 0..src.len() {
            let lhs = cx.res.morphism.fiber_maps[a].apply(src_neg[alpha]);
            if neg(cx.res.morphism.fiber_maps[a].apply(alpha)) != Some(lhs) {
                preserved = false;
            }
        }
    }
    Ok(TransportRow {
        kind: StructureKind::Boolean,
        witness_ok,
        detector_agrees: cx.res.report.holds(StructureKind::Boolean),
        preserved: Some(preserved),
        note: None,
    })
}

fn transport_negation(
    cx: &TransportCx,
    kind: StructureKind,
) -> Result<TransportRow, ExtensionError> {
    let ext = cx.ext();
    let d = cx.d;
    let negs = cx
        .src_report
        .get(kind)
        .and_then(|r| r.negations.as_ref())
        .ok_or_else(|| {
            ExtensionError::InternalInvariantViolation("negation witness missing".into())
        })?;
    let mut witness_ok = true;
    let mut preserved = true;
    for a in 0..ext.base.objects.len() {
        let fiber = ext.fiber(a);
        let ka = cx.res.comonad.k.on_obj(a);
        let big = d.fiber(ka);
        let big_cert = lattice_ops(big);
        let big_meet = big_cert.meet.as_ref().unwrap();
        let nn = big.len();
        let bound = cx.bound(a);
        let big_neg = &negs[ka];
        let neg = |p: usize| -> Option<usize> {
            cx.pos(a, big_meet[big_neg[cx.elem(a, p)] * nn + bound])
        };
        let n = fiber.len();
        let cert = lattice_ops(fiber);
        let meet = cert.meet.as_ref().ok_or(ExtensionError::PrimaryRequired)?;
        match kind {
            StructureKind::StarAutonomous => {
                // Involution plus the shift law.
                for p in 0..n {
                    match neg(p).and_then(neg) {
                        Some(pp) if pp == p => {}
                        _ => witness_ok = false,
                    }
                }
                for p in 0..n {
                    for q in 0..n {
                        for r in 0..n {
                            let (Some(nr), Some(nqr)) = (neg(r), neg(meet[q * n + r])) else {
                                witness_ok = false;
                                continue;
                            };
                            let lhs = fiber.leq_idx(meet[p * n + q], nr);
                            let rhs = fiber.leq_idx(p, nqr);
                            if lhs != rhs {
                                witness_ok = false;
                            }
                        }
                    }
                }
            }
            StructureKind::PseudoComplements => {
                let Some(bot) = cert.bottom else {
                    witness_ok = false;
                    continue;
                };
                for p in 0..n {
                    let Some(np) = neg(p) else {
                        witness_ok = false;
                        continue;
                    };
                    if meet[p * n + np] != bot {
                        witness_ok = false;
                    }
                    for q in 0..n {
                        if meet[p * n + q] == bot && !fiber.leq_idx(q, np) {
                            witness_ok = false;
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
        // f(not alpha) = not' f(alpha) — the x /\ not a = not(x /\ a) /\ x
        // identity at work.
        let src_neg = &negs[a];
        for alpha in 0..d.fiber(a).len() {
            let lhs = cx.res.morphism.fiber_maps[a].apply(src_neg[alpha]);
            if neg(cx.res.morphism.fiber_maps[a].apply(alpha)) != Some(lhs) {
                preserved = false;
            }
        }
    }
    Ok(TransportRow {
        kind,
        witness_ok,
        detector_agrees: cx.res.report.holds(kind),
        preserved: Some(preserved),
        note: None,
    })
}

fn transport_wpo(cx: &TransportCx) -> Result<TransportRow, ExtensionError> {
    let ext = cx.ext();
    let d = cx.d;
    let wpo = cx
        .src_report
        .get(StructureKind::WeakPowerObjects)
        .and_then(|r| r.wpo.as_ref())
        .ok_or_else(|| {
            ExtensionError::InternalInvariantViolation("weak power object witness missing".into())
        })?;
    let mut witness_ok = true;
    'objects: for a in 0..ext.base.objects.len() {
        let Some(&(omega, mem)) = wpo.per_object.get(&a) else {
            witness_ok = false;
            continue;
        };
        let Some(w_ao) = d.base.product(a, omega) else {
            witness_ok = false;
            continue;
        };
        let s_ao = w_ao.obj;
        // mem' = f_{A x Omega}(mem).
        let mem_ext = cx.res.morphism.fiber_maps[s_ao].apply(mem);
        let Some(ext_w_ao) = ext.base.product(a, omega).cloned() else {
            witness_ok = false;
            continue;
        };
        for b in 0..ext.base.objects.len() {
            let Some(ext_w_ab) = ext.base.product(a, b).cloned() else { continue };
            let fiber_ab = ext.fiber(ext_w_ab.obj);
            for psi in 0..fiber_ab.len() {
                // Search a classifier B ~> Omega among Kleisli arrows.
                let found = ext.base.hom(b, omega).into_iter().any(|h| {
                    let Some(h_pr2) = ext.base.try_comp(h, ext_w_ab.pr2) else { return false };
                    let Ok(m) = ext.base.pairing(ext_w_ab.pr1, h_pr2) else { return false };
                    let _ = &ext_w_ao;
                    ext.reindex[m].apply(mem_ext) == psi
                });
                if !found {
                    witness_ok = false;
                    continue 'objects;
                }
            }
        }
    }
    Ok(TransportRow {
        kind: StructureKind::WeakPowerObjects,
        witness_ok,
        detector_agrees: cx.res.report.holds(StructureKind::WeakPowerObjects),
        preserved: None,
        note: Some("no preservation claim for weak power objects".into()),
    })
}

// ---------------------------------------------------------------------
// Universal property: factorization of models
// ---------------------------------------------------------------------

pub struct FactorizationOutcome {
    pub factorized: DoctrineMorphism,
    /// `G'(id_X) = c` held strictly (the image of the terminal was the
    /// target terminal on the nose).
    pub constant_strict: bool,
}

/// Given a primary morphism `(G, g) : P -> R` and a constant
/// `c : t -> G(X)` satisfying `top <= R(c)(g_X(phi))`, produce the unique
/// `(G', g') : P_(X,phi) -> R` with `(G', g') . (F_X, f) = (G, g)` and
/// `G'(id_X) = c`, verified strictly.
pub fn factorize_model(
    res: &ExtensionResult,
    target: &Arc<Doctrine>,
    g: &DoctrineMorphism,
    c: usize,
) -> Result<FactorizationOutcome, ExtensionError> {
    let d = res.source.as_ref();
    let preserve: &[StructureKind] =
        if res.phi.is_some() { &[StructureKind::Primary] } else { &[] };
    validate_morphism(d, target, g, true, preserve)?;
    let tgt_base = &target.base;
    let t_d = tgt_base.terminal().ok_or(ExtensionError::ProductsRequired)?;
    let gx = g.functor.on_obj(res.x);
    let c_arrow = &tgt_base.arrows[c];
    if c_arrow.src != t_d || c_arrow.tgt != gx {
        return Err(ExtensionError::MissingConstruction(format!(
            "constant must be an arrow from the terminal to `{}`",
            tgt_base.objects[gx]
        )));
    }
    // Precondition: top <= R(c)(g_X(phi)).
    if let Some(phi) = res.phi {
        let val = target.reindex[c].apply(g.fiber_maps[res.x].apply(phi));
        let t_fiber = target.fiber(t_d);
        let top = lattice_ops(t_fiber).top.ok_or(ExtensionError::PrimaryRequired)?;
        if val != top {
            return Err(ExtensionError::ConstantDoesNotSatisfyAxiom);
        }
    }
    // j_A = v . <c . !_{GA}, id_{GA}> : GA -> G(X x A), with v the inverse
    // of the canonical comparison G(X x A) -> GX x GA.
    let n_obj = d.base.objects.len();
    let mut j = Vec::with_capacity(n_obj);
    for a in 0..n_obj {
        let ga = g.functor.on_obj(a);
        let (_u, v) = product_comparison(&g.functor, res.x, a)?;
        let c_bang = tgt_base
            .try_comp(c, tgt_base.bang(ga).ok_or(ExtensionError::ProductsRequired)?)
            .ok_or_else(|| ExtensionError::MissingConstruction("constant composite".into()))?;
        let cone = tgt_base
            .pairing(c_bang, tgt_base.identities[ga])
            .map_err(|_| ExtensionError::MissingConstruction("pairing for j".into()))?;
        j.push(tgt_base.comp(v, cone));
    }
    let oplax = OplaxComonadMorphism {
        cell: g.clone(),
        j: NatTransf { components: j },
    };
    oplax.validate(&res.comonad, target)?;
    let factorized = factorize_oplax(&res.bundle, &oplax, target)?;
    // G'(id_X) = c, up to the canonical comparison of terminals.
    let t_c = res.doctrine().base.terminal().unwrap();
    let g_t = g.functor.on_obj(t_c);
    let term_cmp = tgt_base.bang(g_t).unwrap();
    let expected = tgt_base.comp(c, term_cmp);
    if factorized.functor.on_arr(res.constant) != expected {
        return Err(ExtensionError::InternalInvariantViolation(
            "factorized constant differs from the supplied one".into(),
        ));
    }
    let constant_strict = g_t == t_d && term_cmp == tgt_base.identities[t_d];
    // (G', g') is a primary 1-arrow (when an axiom is forced).
    validate_morphism(res.doctrine(), target, &factorized, true, preserve)?;
    Ok(FactorizationOutcome { factorized, constant_strict })
}

/// Verifies a competitor against the canonical factorization: same strict
/// composite and same constant force equality of tables.
pub fn check_model_factorization_unique(
    res: &ExtensionResult,
    target: &Arc<Doctrine>,
    g: &DoctrineMorphism,
    c: usize,
    competitor: &DoctrineMorphism,
) -> Result<(), ExtensionError> {
    let outcome = factorize_model(res, target, g, c)?;
    let composite = competitor.compose(&res.morphism);
    if !composite.same_tables(g) {
        return Err(ExtensionError::Comonad(ComonadError::CompositeMismatch(
            "competitor composite differs".into(),
        )));
    }
    if competitor.functor.on_arr(res.constant) != outcome.factorized.functor.on_arr(res.constant)
    {
        return Err(ExtensionError::Comonad(ComonadError::CompositeMismatch(
            "competitor constant differs".into(),
        )));
    }
    if !outcome.factorized.same_tables(competitor) {
        return Err(ExtensionError::Comonad(ComonadError::UniquenessCounterexample(
            "competitor with equal composite and constant has different tables".into(),
        )));
    }
    Ok(())
}

/// Theorem-level preservation checks for the factorized morphism: for
/// each requested kind, if `(G, g)` preserves it then so does `(G', g')`.
pub fn factorized_preservation(
    res: &ExtensionResult,
    target: &Arc<Doctrine>,
    g: &DoctrineMorphism,
    factorized: &DoctrineMorphism,
    kinds: &[StructureKind],
) -> Vec<(StructureKind, bool, bool)> {
    let d = res.source.as_ref();
    kinds
        .iter()
        .map(|&k| {
            let g_pres = validate_morphism(d, target, g, true, &[k]).is_ok();
            let f_pres = validate_morphism(res.doctrine(), target, factorized, true, &[k]).is_ok();
            (k, g_pres, f_pres)
        })
        .collect()
}

/// The 2-cell fullness reconstruction: a 2-cell between precompositions
/// that preserves the constant is a 2-cell between the originals.
pub fn fullness_check(
    res: &ExtensionResult,
    target: &Arc<Doctrine>,
    k1: &DoctrineMorphism,
    k2: &DoctrineMorphism,
    theta: &TwoCell,
) -> Result<(), ExtensionError> {
    let d = res.source.as_ref();
    let ext = res.doctrine();
    let pre1 = k1.compose(&res.morphism);
    let pre2 = k2.compose(&res.morphism);
    validate_two_cell(d, target, &pre1, &pre2, theta)?;
    // Constant coherence: theta_X . K(id_X) = K'(id_X).
    let tgt_base = &target.base;
    let c1 = k1.functor.on_arr(res.constant);
    let c2 = k2.functor.on_arr(res.constant);
    if tgt_base.try_comp(theta.transf.components[res.x], c1) != Some(c2) {
        return Err(ExtensionError::FullnessCounterexample(
            "the 2-cell does not preserve the constant".into(),
        ));
    }
    // Reconstruction: the same components form a 2-cell K1 -> K2 over the
    // extended doctrine.
    validate_two_cell(ext, target, k1, k2, theta)
        .map_err(|e| ExtensionError::FullnessCounterexample(e.to_string()))
}

// ---------------------------------------------------------------------
// Conservativity
// ---------------------------------------------------------------------

#[derive(Debug)]
pub struct ConservativityReport {
    pub conservative: bool,
    /// `top <= exists^X_t phi`, when the source is existential.
    pub criterion: Option<bool>,
    /// A fullness counterexample `(object, alpha, beta)` when not
    /// conservative.
    pub witness: Option<(usize, usize, usize)>,
    /// Criterion and fullness agree (always expected when existential).
    pub agreement: Option<bool>,
}

/// Checks conservativity of `(F_X, f)` by brute-force fullness of every
/// fiber component, and — when the source doctrine is existential —
/// evaluates the `top <= exists phi` criterion and compares.
pub fn conservativity_check(res: &ExtensionResult) -> Result<ConservativityReport, ExtensionError> {
    let d = res.source.as_ref();
    let mut conservative = true;
    let mut witness = None;
    'outer: for a in 0..d.base.objects.len() {
        let fiber = d.fiber(a);
        let ext_fiber = res.doctrine().fiber(a);
        let f = &res.morphism.fiber_maps[a];
        for alpha in 0..fiber.len() {
            for beta in 0..fiber.len() {
                if ext_fiber.leq_idx(f.apply(alpha), f.apply(beta)) && !fiber.leq_idx(alpha, beta)
                {
                    conservative = false;
                    witness = Some((a, alpha, beta));
                    break 'outer;
                }
            }
        }
    }
    let mut criterion = None;
    if let Some(phi) = res.phi {
        if let Ok(rep) = detect_structure(d, StructureKind::Existential) {
            if rep.holds {
                let w = rep.existential.as_ref().unwrap();
                let t = d.base.terminal().unwrap();
                if let (Some(q), Some(tw)) = (w.tables.get(&(t, res.x)), d.base.product(t, res.x))
                {
                    // Move phi across P(X) = P(t x X) along pr2.
                    let phi_hat = d.reindex[tw.pr2].apply(phi);
                    let top_t = lattice_ops(d.fiber(t)).top.unwrap();
                    criterion = Some(q.apply(phi_hat) == top_t);
                }
            }
        }
    } else {
        // Nothing forced: the criterion degenerates with phi = top, and
        // exists of the top along a projection is the top.
        criterion = None;
    }
    let agreement = criterion.map(|c| c == conservative);
    Ok(ConservativityReport { conservative, criterion, witness, agreement })
}

// ---------------------------------------------------------------------
// Decomposition: (P_X)_phi = P_(X,phi)
// ---------------------------------------------------------------------

#[derive(Debug)]
pub struct DecompositionReport {
    pub base_reused: bool,
}

/// Builds `P_X` (add the constant), then forces `phi` read in the fiber
/// over the terminal of `P_X`, and verifies strict table equality with the
/// one-step `P_(X,phi)`, including the composite 1-arrow.
pub fn compose_constructions_check(
    d: &Arc<Doctrine>,
    x: usize,
    phi: usize,
) -> Result<DecompositionReport, ExtensionError> {
    let one_step = extend(d, x, Some(phi))?;
    let step1 = extend(d, x, None)?;
    let e1 = Arc::new(step1.bundle.doctrine.clone());
    // phi read in P_X(t) = P(X x t): its image under P(pr1).
    let t = d.base.terminal().unwrap();
    let wt = d.base.product(x, t).unwrap();
    let kt = step1.comonad.k.on_obj(t);
    let phi_elem = d.reindex[wt.pr1].apply(phi);
    let phi_pos = step1.bundle.fiber_position(t, phi_elem).ok_or_else(|| {
        ExtensionError::InternalInvariantViolation("phi not found in the add-constant fiber".into())
    })?;
    let _ = kt;
    let step2 = extend(&e1, t, Some(phi_pos))?;
    let base_reused = step2.comonad.base_is_identity();

    // Strict comparison of the two-step and one-step doctrines.
    let two = step2.doctrine();
    let one = one_step.doctrine();
    if two.base.objects != one.base.objects {
        return Err(ExtensionError::DecompositionMismatch("object lists differ".into()));
    }
    if two.base.arrows.len() != one.base.arrows.len() {
        return Err(ExtensionError::DecompositionMismatch("arrow counts differ".into()));
    }
    for (p, q) in two.base.arrows.iter().zip(&one.base.arrows) {
        if p.src != q.src || p.tgt != q.tgt || p.name != q.name {
            return Err(ExtensionError::DecompositionMismatch(format!(
                "arrows `{}` and `{}` differ",
                p.name, q.name
            )));
        }
    }
    if two.base.compose != one.base.compose {
        return Err(ExtensionError::DecompositionMismatch("composition tables differ".into()));
    }
    if two.base.products != one.base.products {
        return Err(ExtensionError::DecompositionMismatch("product structures differ".into()));
    }
    for a in 0..one.base.objects.len() {
        if two.fiber(a).elements() != one.fiber(a).elements() {
            return Err(ExtensionError::DecompositionMismatch(format!(
                "fibers over `{}` differ",
                one.base.objects[a]
            )));
        }
        if two.fiber(a).as_ref() != one.fiber(a).as_ref() {
            return Err(ExtensionError::DecompositionMismatch(format!(
                "fiber orders over `{}` differ",
                one.base.objects[a]
            )));
        }
    }
    for (i, (p, q)) in two.reindex.iter().zip(&one.reindex).enumerate() {
        if p.table() != q.table() {
            return Err(ExtensionError::DecompositionMismatch(format!(
                "reindexing along `{}` differs",
                one.base.arrows[i].name
            )));
        }
    }
    // Composite 1-arrow equals the one-step 1-arrow.
    let composite = step2.morphism.compose(&step1.morphism);
    if !composite.same_tables(&one_step.morphism) {
        return Err(ExtensionError::DecompositionMismatch(
            "composite 1-arrow differs from the one-step 1-arrow".into(),
        ));
    }
    Ok(DecompositionReport { base_reused })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cat::semilattice_to_category;
    use crate::models::downset_powerset;
    use crate::order::FinitePoset;

    fn chain_doctrine(n: usize) -> Arc<Doctrine> {
        let elems: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
        let covers: Vec<(String, String)> = (0..n.saturating_sub(1))
            .map(|i| (format!("c{i}"), format!("c{}", i + 1)))
            .collect();
        let p = FinitePoset::from_covers(&elems, &covers).unwrap();
        let cert = lattice_ops(&p);
        let base = Arc::new(semilattice_to_category(&p, &cert).unwrap());
        Arc::new(downset_powerset(&p, base))
    }

    #[test]
    fn reader_comonad_validates() {
        let d = chain_doctrine(2);
        let x = d.base.object_index("c0").unwrap();
        let fiber = d.fiber(x);
        for phi in 0..fiber.len() {
            let c = build_reader_comonad(&d, x, Some(phi)).unwrap();
            c.validate().unwrap();
        }
        build_reader_comonad(&d, x, None).unwrap().validate().unwrap();
    }

    #[test]
    fn reader_two_arrow_inequality_is_equality() {
        let d = chain_doctrine(2);
        let x = d.base.object_index("c0").unwrap();
        let phi = 1;
        let c = build_reader_comonad(&d, x, Some(phi)).unwrap();
        for a in 0..d.base.objects.len() {
            let ka = c.k.on_obj(a);
            let g = &d.reindex[c.gamma.components[a]];
            for alpha in 0..d.fiber(a).len() {
                let once = c.k_fib[a].apply(alpha);
                let twice = g.apply(c.k_fib[ka].apply(once));
                assert_eq!(once, twice);
            }
        }
    }

    #[test]
    fn extension_fibers_are_principal_downsets() {
        let d = chain_doctrine(2);
        let x = d.base.object_index("c1").unwrap();
        let fiber_x = d.fiber(x);
        for phi in 0..fiber_x.len() {
            let res = extend(&d, x, Some(phi)).unwrap();
            for a in 0..d.base.objects.len() {
                let wa = d.base.product(x, a).unwrap();
                let bound = d.reindex[wa.pr1].apply(phi);
                let big = d.fiber(res.comonad.k.on_obj(a));
                let expect: Vec<&str> = (0..big.len())
                    .filter(|&e| big.leq_idx(e, bound))
                    .map(|e| big.element(e))
                    .collect();
                let got: Vec<&str> = res
                    .doctrine()
                    .fiber(a)
                    .elements()
                    .iter()
                    .map(|s| s.as_str())
                    .collect();
                assert_eq!(expect, got);
            }
        }
    }

    #[test]
    fn interpret_new_constant_returns_top() {
        let d = chain_doctrine(2);
        let x = d.base.object_index("c1").unwrap();
        for phi in 0..d.fiber(x).len() {
            let res = extend(&d, x, Some(phi)).unwrap();
            let (_value, flag) = interpret_new_constant(&res).unwrap();
            assert!(flag);
        }
    }

    #[test]
    fn add_constant_with_top_is_pure_weakening() {
        let d = chain_doctrine(2);
        let x = d.base.object_index("c0").unwrap();
        let res = add_constant(&d, x).unwrap();
        for a in 0..d.base.objects.len() {
            let wa = d.base.product(x, a).unwrap();
            for alpha in 0..d.fiber(a).len() {
                assert_eq!(
                    res.morphism.fiber_maps[a].apply(alpha),
                    res.bundle
                        .fiber_position(a, d.reindex[wa.pr2].apply(alpha))
                        .unwrap()
                );
            }
        }
    }

    #[test]
    fn transport_matrix_on_boolean_doctrine() {
        let d = chain_doctrine(2);
        let x = d.base.object_index("c1").unwrap();
        let phi = 1;
        let res = extend(&d, x, Some(phi)).unwrap();
        let report = transport_report(&res).unwrap();
        for kind in [
            StructureKind::Primary,
            StructureKind::Elementary,
            StructureKind::Existential,
            StructureKind::Universal,
            StructureKind::Implicational,
            StructureKind::Bounded,
            StructureKind::Joins,
            StructureKind::Heyting,
            StructureKind::Boolean,
        ] {
            let row = report.row(kind).unwrap_or_else(|| panic!("row {kind:?} missing"));
            assert!(row.witness_ok, "witness for {kind:?}");
            assert!(row.detector_agrees, "detector for {kind:?}");
            assert_eq!(row.preserved, Some(true), "preservation for {kind:?}");
        }
    }

    #[test]
    fn joins_preservation_flips_on_nondistributive_fiber() {
        // M3 diamond fiber over the terminal base; force one atom.
        let m3 = Arc::new(
            FinitePoset::from_covers(
                &["bot", "a", "b", "c", "top"],
                &[
                    ("bot", "a"),
                    ("bot", "b"),
                    ("bot", "c"),
                    ("a", "top"),
                    ("b", "top"),
                    ("c", "top"),
                ],
            )
            .unwrap(),
        );
        let base = Arc::new(crate::cat::FiniteCategory::terminal_category());
        let d = Arc::new(Doctrine::new(
            base,
            vec![m3.clone()],
            vec![MonotoneMap::identity(&m3)],
        ));
        d.validate().unwrap();
        let phi = m3.index_of("a").unwrap();
        let res = add_axiom(&d, phi).unwrap();
        let report = transport_report(&res).unwrap();
        let row = report.row(StructureKind::Joins).unwrap();
        assert!(row.witness_ok, "construction still yields joins");
        assert_eq!(row.preserved, Some(false), "f must fail join preservation");
        assert!(row.note.as_deref().unwrap_or("").contains("false"));
    }

    #[test]
    fn factorize_through_self_is_identity() {
        let d = chain_doctrine(2);
        let x = d.base.object_index("c1").unwrap();
        let phi = 1;
        let res = extend(&d, x, Some(phi)).unwrap();
        let target = Arc::new(res.doctrine().clone());
        let outcome = factorize_model(&res, &target, &res.morphism, res.constant).unwrap();
        assert!(outcome
            .factorized
            .same_tables(&DoctrineMorphism::identity(res.doctrine())));
        check_model_factorization_unique(&res, &target, &res.morphism, res.constant, &outcome.factorized)
            .unwrap();
    }

    #[test]
    fn constant_not_satisfying_axiom_is_rejected() {
        let d = chain_doctrine(2);
        let x = d.base.object_index("c1").unwrap();
        // phi strictly below the top of P(X).
        let fiber_x = d.fiber(x);
        let phi = (0..fiber_x.len())
            .find(|&e| Some(e) != lattice_ops(fiber_x).top && fiber_x.element(e) != "{}")
            .unwrap();
        let res = extend(&d, x, Some(phi)).unwrap();
        // Target: the same extension, but offer a constant c whose
        // interpretation does not satisfy phi: use the extension at a
        // *different* phi' not below phi.
        let target = Arc::new(res.doctrine().clone());
        // Use (F_X, f) but a wrong constant: the identity arrow of the
        // terminal is not even typed t ~> X, so pick the bang of X
        // composed... instead, force the typed-but-wrong case via the
        // extension of top: its constant has R(c) f_X(phi) != top.
        let res_top = add_constant(&d, x).unwrap();
        let target_top = Arc::new(res_top.doctrine().clone());
        let err = factorize_model(&res, &target_top, &res_top.morphism, res_top.constant);
        assert!(matches!(err, Err(ExtensionError::ConstantDoesNotSatisfyAxiom)));
        let _ = target;
    }

    #[test]
    fn conservativity_matches_criterion() {
        let d = chain_doctrine(2);
        let x = d.base.object_index("c1").unwrap();
        let fiber_x = d.fiber(x);
        for phi in 0..fiber_x.len() {
            let res = extend(&d, x, Some(phi)).unwrap();
            let rep = conservativity_check(&res).unwrap();
            assert_eq!(rep.agreement, Some(true), "phi = {}", fiber_x.element(phi));
            if !rep.conservative {
                assert!(rep.witness.is_some());
            }
        }
    }

    #[test]
    fn decomposition_is_strict() {
        let d = chain_doctrine(2);
        let x = d.base.object_index("c1").unwrap();
        for phi in 0..d.fiber(x).len() {
            let rep = compose_constructions_check(&d, x, phi).unwrap();
            assert!(rep.base_reused);
        }
    }

    #[test]
    fn distributive_law_full_check() {
        let d = chain_doctrine(2);
        let x = d.base.object_index("c1").unwrap();
        let y = d.base.object_index("c0").unwrap();
        let phi = 1;
        let psi = 1;
        let rep = distributive_law_check(&d, x, phi, y, psi).unwrap();
        assert!(rep.two_cell_is_equality);
        assert!(rep.invertible);
        assert!(rep.unique);
        assert!(rep.composite_matches);
    }

    #[test]
    fn degenerate_distributive_law_with_terminal() {
        let d = chain_doctrine(2);
        let x = d.base.object_index("c0").unwrap();
        let t = d.base.terminal().unwrap();
        let phi = 1;
        let psi_top = lattice_ops(d.fiber(t)).top.unwrap();
        let rep = distributive_law_check(&d, x, phi, t, psi_top).unwrap();
        assert!(rep.invertible);
        assert!(rep.composite_matches);
    }

    #[test]
    fn fullness_reconstruction() {
        let d = chain_doctrine(2);
        let x = d.base.object_index("c1").unwrap();
        let phi = 1;
        let res = extend(&d, x, Some(phi)).unwrap();
        let target = Arc::new(res.doctrine().clone());
        let ident = DoctrineMorphism::identity(res.doctrine());
        let theta = TwoCell {
            transf: crate::cat::NatTransf::identity(&ident.functor),
        };
        fullness_check(&res, &target, &ident, &ident, &theta).unwrap();
    }
}
