//! Stopper-vs-stopper optimal stopping games on finite event trees.
//!
//! The crate computes the conditional value families of a two-player
//! stopping game, solves the converted Dynkin game, builds non-anticipative
//! strategy maps, and checks everything against exhaustive enumeration.

pub mod dynkin;
pub mod error;
pub mod fixtures;
pub mod instance;
pub mod oracle;
pub mod payoff;
pub mod refine;
pub mod report;
pub mod scalar;
pub mod space;
pub mod stopping;
pub mod strategy;
pub mod values;
pub mod verify;

pub use dynkin::{closed_loop, jj_decomposition, open_loop, saddle, DynkinSolution, DynkinSpec, Order, Tie};
pub use error::{Error, Result};
pub use oracle::{brute_game_values, enumerate_stopping_times, enumerate_strategy_maps, sandwich_report, Caps, GameValues, SandwichReport};
pub use payoff::{build_payoff, Payoff, PayoffKind};
pub use scalar::{Rational, Scalar};
pub use space::{AdaptedProcess, FilteredSpace, RandomVariable, SpaceSpec, TimeGrid};
pub use stopping::{conditional_expectation, Label, StoppingTime, StoppingTimeSet};
pub use strategy::{
    best_response_to_map, build_rho_map, build_tau_map, check_nonanticipativity, fixed_point_check,
    strategy_game_value, NonAnticipativity, Player, StrategyMap,
};
pub use values::{inner_optimizer, value_lower, value_upper, NodeValueFamily, Side, ValueFamilies};
pub use verify::{verify, Check, Verification};
