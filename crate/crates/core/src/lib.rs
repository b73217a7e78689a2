//! Cyclic group actions of odd order on connected sums of `CP^2`, encoded
//! as admissible weighted trees of linear models.
//!
//! [`modular`] does residue arithmetic on weights, [`models`] describes the
//! linear actions on `CP^2` and `S^4`, [`tree`] holds the weighted trees,
//! [`singular`] folds a tree into fixed sets and the permutation module on
//! `H_2`, and [`realize`] decides which permutation modules arise.

pub mod modular;
pub mod models;
pub mod tree;
pub mod singular;
pub mod realize;
pub mod cli;
