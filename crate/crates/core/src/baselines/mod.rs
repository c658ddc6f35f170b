//! Comparison optimizers: a generational genetic algorithm and FLASH-style
//! sequential model-based optimization with CART surrogates.

mod cart;
mod flash;
mod nga;

pub use cart::{cart_fit, cart_fit_with, CartNode, RegressionTree, DEFAULT_MIN_SPLIT};
pub use flash::{acquire, flash_run, FlashConfig};
pub use nga::{mutate, nga_run, single_point_crossover, NgaConfig};
