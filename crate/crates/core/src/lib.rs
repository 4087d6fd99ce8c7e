//! Finite sites, sheaves and lex models.

pub mod chase;
pub mod cli;
pub mod eventual;
pub mod fincat;
pub mod format;
pub mod lattice;
pub mod limits;
pub mod models;
pub mod presheaf;
pub mod site;
