//! Built-in instances: the deterministic counterexample chain, symmetric
//! and asymmetric binary trees, uniform deterministic grids, and seeded
//! random payoffs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::payoff::{Payoff, Utility, WForm};
use crate::scalar::{rat, Rational};
use crate::space::{AdaptedProcess, FilteredSpace, TimeGrid};

/// One-point grid `{1}`: a single node that is both root and leaf.
pub fn single_node() -> FilteredSpace {
    FilteredSpace::chain(TimeGrid::new(vec![rat(1, 1)]).unwrap()).unwrap()
}

/// Deterministic path on `{0, 1/2, 1}`.
pub fn cex() -> FilteredSpace {
    uniform_chain(2)
}

/// Deterministic path on `{0, 1/n, ..., 1}`.
pub fn uniform_chain(steps: usize) -> FilteredSpace {
    FilteredSpace::chain(TimeGrid::uniform(rat(1, 1), steps).unwrap()).unwrap()
}

/// Symmetric binary tree of the given depth on a uniform grid over `[0, 1]`.
pub fn binary(depth: usize) -> FilteredSpace {
    FilteredSpace::uniform_tree(
        TimeGrid::uniform(rat(1, 1), depth).unwrap(),
        &[rat(1, 2), rat(1, 2)],
    )
    .unwrap()
}

/// Binary tree with branch probabilities 1/3 and 2/3.
pub fn binary_asym(depth: usize) -> FilteredSpace {
    FilteredSpace::uniform_tree(
        TimeGrid::uniform(rat(1, 1), depth).unwrap(),
        &[rat(1, 3), rat(2, 3)],
    )
    .unwrap()
}

/// `|f(s) - f(t)|` with `f = 1` strictly after `T/2`, on [`cex`].
pub fn cex_payoff() -> Payoff<Rational> {
    let space = cex();
    let half = rat(1, 2);
    let f = AdaptedProcess::from_grid_fn(&space, |k| {
        if space.grid().time(k) > &half {
            rat(1, 1)
        } else {
            rat(0, 1)
        }
    });
    Payoff::abs_diff_f(&space, &f)
}

fn small_rational(rng: &mut ChaCha8Rng) -> Rational {
    rat(rng.gen_range(-6..=6), rng.gen_range(1..=4))
}

/// Table payoff with small random rationals, determined by `seed`.
pub fn random_table(space: &FilteredSpace, seed: u64) -> Payoff<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Payoff::from_fn(space, crate::payoff::PayoffKind::Table, |_, _, _| {
        small_rational(&mut rng)
    })
}

/// Random adapted process with small rational values.
pub fn random_process(space: &FilteredSpace, seed: u64) -> AdaptedProcess<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    AdaptedProcess((0..space.len()).map(|_| small_rational(&mut rng)).collect())
}

/// Seeded random table instance on a binary tree of depth 1 or 2.
pub fn seeded_instance(depth: usize, seed: u64) -> (FilteredSpace, Payoff<Rational>) {
    let space = binary(depth);
    let u = random_table(&space, seed);
    (space, u)
}

fn w_fixture(space: &FilteredSpace) -> Payoff<Rational> {
    let form = WForm {
        constant: rat(0, 1),
        s: rat(0, 1),
        t: rat(1, 2),
        x: rat(1, 1),
        y: rat(-1, 2),
        abs_xy: rat(1, 4),
        abs_st: rat(1, 4),
    };
    let f = random_process(space, 101);
    let g = random_process(space, 202);
    Payoff::w_process(space, |s, t, x, y| form.eval(s, t, x, y), form.lipschitz(), &f, &g).unwrap()
}

fn utility_fixture(space: &FilteredSpace) -> Payoff<Rational> {
    let utility = Utility::new(vec![
        (rat(-2, 1), rat(-3, 1)),
        (rat(0, 1), rat(0, 1)),
        (rat(2, 1), rat(1, 1)),
    ])
    .unwrap();
    Payoff::utility_spread(space, &utility, &random_process(space, 303), &random_process(space, 404))
}

/// Named fixture instances of depth at most 2.
pub fn catalog() -> Vec<(String, FilteredSpace, Payoff<Rational>)> {
    let spaces = [
        ("single", single_node()),
        ("cex", cex()),
        ("b1", binary(1)),
        ("b2", binary(2)),
        ("b2asym", binary_asym(2)),
    ];
    let mut out = vec![("cex/step".to_string(), cex(), cex_payoff())];
    for (name, space) in spaces {
        let payoffs: Vec<(&str, Payoff<Rational>)> = vec![
            ("constant", Payoff::constant(&space, rat(5, 1))),
            ("abs_time_diff", Payoff::abs_time_diff(&space)),
            ("abs_diff_f", Payoff::abs_diff_f(&space, &random_process(&space, 7))),
            ("w_process", w_fixture(&space)),
            ("utility_spread", utility_fixture(&space)),
            ("table0", random_table(&space, 1000)),
            ("table1", random_table(&space, 1001)),
        ];
        for (pname, u) in payoffs {
            out.push((format!("{name}/{pname}"), space.clone(), u));
        }
    }
    out
}
