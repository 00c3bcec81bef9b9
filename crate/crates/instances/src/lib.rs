//! Concrete source/target language pairs, their compilers and trace relations, packaged as
//! finite instances for the criterion checkers.

pub mod diffvalues;
pub mod models;
pub mod robust_lang;
pub mod sends;
pub mod sexpr;
