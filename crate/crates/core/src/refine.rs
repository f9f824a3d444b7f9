//! Grid-refinement studies: how far apart the discrete game values and
//! open-loop values are as the time step shrinks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::fixtures;
use crate::oracle::{all_dvalues, enumerate_stopping_times, game_values_from, spread, Caps};
use crate::payoff::{Payoff, WForm};
use crate::scalar::{rat, Rational, Scalar};
use crate::space::{AdaptedProcess, FilteredSpace};
use crate::strategy::PayoffMatrix;
use crate::values::ValueFamilies;

/// Largest stopping-time count for which maps are enumerated exhaustively.
pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 6;

#[derive(Clone, Debug, PartialEq)]
pub struct RefineRow<S> {
    pub level: usize,
    pub steps: usize,
    pub delta: S,
    /// `[A_upper, A_lower, B_upper, B_lower]` when the maps were enumerated.
    pub game: Option<[S; 4]>,
    /// Named open-loop values of the converted game.
    pub dvalues: Vec<(String, S)>,
    /// Spread of the open-loop values alone.
    pub dvalue_spread: S,
    /// Spread of everything computed at this level. Without `game` this is
    /// a bound from the open-loop values only.
    pub spread: S,
}

impl<S> RefineRow<S> {
    pub fn exhaustive(&self) -> bool {
        self.game.is_some()
    }
}

fn study_row<S: Scalar>(
    level: usize,
    space: &FilteredSpace,
    u: &Payoff<S>,
    caps: Caps,
    exhaustive_limit: usize,
) -> Result<RefineRow<S>> {
    let set = enumerate_stopping_times(space, caps.stopping_times)?;
    let fam = ValueFamilies::compute(space, u);
    let dvalues: Vec<(String, S)> = all_dvalues(space, &set, &fam)
        .into_iter()
        .map(|d| (d.name(), d.value))
        .collect();
    let dv: Vec<S> = dvalues.iter().map(|(_, v)| v.clone()).collect();
    let game = if set.len() <= exhaustive_limit {
        let matrix = PayoffMatrix::new(space, &set, u);
        let g = game_values_from(&set, &matrix, caps)?;
        Some([g.a_upper, g.a_lower, g.b_upper, g.b_lower])
    } else {
        None
    };
    let mut all = dv.clone();
    if let Some(g) = &game {
        all.extend(g.iter().cloned());
    }
    let steps = space.last_index();
    Ok(RefineRow {
        level,
        steps,
        delta: S::from_rational(&(space.grid().horizon().clone() / rat(steps.max(1) as i64, 1))),
        game,
        dvalue_spread: spread(&dv),
        spread: spread(&all),
        dvalues,
    })
}

/// `|s - t|` on uniform deterministic grids with `2, 4, ..., 2^levels` steps.
pub fn abs_time_diff_study(levels: usize, caps: Caps, exhaustive_limit: usize) -> Result<Vec<RefineRow<Rational>>> {
    (1..=levels)
        .map(|level| {
            let space = fixtures::uniform_chain(1 << level);
            let u = Payoff::abs_time_diff(&space);
            study_row(level, &space, &u, caps, exhaustive_limit)
        })
        .collect()
}

/// Seeded Lipschitz payoff `W(s, t, f_s, g_t)` on a symmetric binomial tree
/// of the given depth over `[0, 1]`. `f` and `g` are random walks with steps
/// `±sqrt(Δ)`; the coefficients of `W` depend only on the seed, so trees of
/// different depth carry the same `W`.
pub fn seeded_w_process(seed: u64, depth: usize) -> Result<(FilteredSpace, Payoff<f64>)> {
    let space = fixtures::binary(depth);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coef = || -> f64 { rng.gen_range(-1.0..=1.0) };
    let form = WForm {
        constant: coef(),
        s: coef(),
        t: coef(),
        x: coef(),
        y: coef(),
        abs_xy: coef().abs(),
        abs_st: coef().abs(),
    };
    let step = (1.0 / depth.max(1) as f64).sqrt();
    let drift = coef() * step * step;
    let walk = |tilt: f64| {
        let mut values = vec![0.0; space.len()];
        for node in space.nodes() {
            for (k, &c) in node.children.iter().enumerate() {
                let sign = if k == 0 { 1.0 } else { -1.0 };
                values[c] = values[node.id] + sign * step + tilt;
            }
        }
        AdaptedProcess(values)
    };
    let f = walk(drift);
    let g = walk(-drift);
    let u = Payoff::w_process(&space, |s, t, x, y| form.eval(s, t, x, y), form.lipschitz(), &f, &g)?;
    Ok((space, u))
}

/// Open-loop spread of [`seeded_w_process`] at each depth, in float mode.
pub fn w_process_study(seed: u64, depths: &[usize], caps: Caps) -> Result<Vec<RefineRow<f64>>> {
    depths
        .iter()
        .enumerate()
        .map(|(level, &depth)| {
            let (space, u) = seeded_w_process(seed, depth)?;
            study_row(level + 1, &space, &u, caps, 0)
        })
        .collect()
}

/// Whether each row's spread is at most the previous one.
pub fn non_increasing<S: Scalar>(rows: &[RefineRow<S>]) -> bool {
    rows.windows(2).all(|w| w[1].spread.approx_le(&w[0].spread))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpreadPoint {
    pub level: usize,
    pub steps: usize,
    pub delta: String,
    pub spread: String,
    pub dvalue_spread: String,
    pub exhaustive: bool,
}

impl<S: Scalar> From<&RefineRow<S>> for SpreadPoint {
    fn from(r: &RefineRow<S>) -> Self {
        SpreadPoint {
            level: r.level,
            steps: r.steps,
            delta: r.delta.to_string(),
            spread: r.spread.to_string(),
            dvalue_spread: r.dvalue_spread.to_string(),
            exhaustive: r.exhaustive(),
        }
    }
}
