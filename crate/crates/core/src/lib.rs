//! An engine for finite doctrines: indexed posets over finite-product
//! categories, with machine-checked structure detection, a generic Kleisli
//! construction for comonads on indexed posets, and the extension engine
//! that simultaneously adds a constant of a given sort and forces an axiom,
//! together with its transport and universal-property checks.

pub mod cat;
pub mod comonad;
pub mod doctrine;
pub mod extension;
pub mod models;
pub mod order;
