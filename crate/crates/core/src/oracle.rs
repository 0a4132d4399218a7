//! Ground truth by exhaustion: Pareto fronts computed directly from the
//! definition over all pairs of positional strategies.
//!
//! Positional strategies suffice for Pareto fronts, so the oracle folds the
//! play outcome of every strategy pair into Worst (minimal outcomes per
//! existential strategy) and Best (maximal result sets over existential
//! strategies). It exists to cross-check the query-based solver and is
//! guarded by a strategy-pair bound since the product of outdegrees grows
//! fast.

use std::cmp::Ordering;

use thiserror::Error;

use crate::opg::{EntranceRef, OpenParityGame, OpgError, ParetoFront};
use crate::orders::{cmp_domain, maximal_results, DomainElement, ResultSet};
use crate::solver::{evaluate_play, GameError, NodeId, Owner, PositionalStrategy};

pub const DEFAULT_ORACLE_BOUND: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error(transparent)]
    Opg(#[from] OpgError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("{pairs} strategy pairs exceed the oracle bound of {bound}")]
    BoundExceeded { pairs: u64, bound: u64 },
}

/// Number of positional strategies one player has: the product of the
/// outdegrees of that player's nodes, saturating on overflow.
pub fn strategy_count(a: &OpenParityGame, player: Owner) -> u64 {
    let g = a.game();
    (0..g.num_nodes())
        .filter(|&u| g.owner(u) == player)
        .map(|u| g.successors(u).len() as u64)
        .fold(1u64, u64::saturating_mul)
}

/// Every total positional strategy for `player`, each exactly once, as a
/// mixed-radix counter over the player's nodes: nodes ascend by id, and the
/// last node's successor choice cycles fastest, ascending by target.
pub fn enumerate_positional_strategies(
    a: &OpenParityGame,
    player: Owner,
) -> impl Iterator<Item = PositionalStrategy> + '_ {
    let g = a.game();
    let nodes: Vec<NodeId> = (0..g.num_nodes())
        .filter(|&u| g.owner(u) == player)
        .collect();
    let mut digits = vec![0usize; nodes.len()];
    let mut done = false;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let mut s = PositionalStrategy::new(player, g.num_nodes());
        for (&u, &d) in nodes.iter().zip(&digits) {
            s.set(u, g.successors(u)[d].to);
        }
        let mut k = nodes.len();
        loop {
            if k == 0 {
                done = true;
                break;
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < g.successors(nodes[k]).len() {
                break;
            }
            digits[k] = 0;
        }
        Some(s)
    })
}

/// Folds one outcome into a running minimal antichain.
fn fold_minimal(antichain: &mut Vec<DomainElement>, d: DomainElement) {
    if antichain.iter().any(|e| {
        matches!(
            cmp_domain(e, &d),
            Some(Ordering::Less) | Some(Ordering::Equal)
        )
    }) {
        return;
    }
    antichain.retain(|e| cmp_domain(&d, e) != Some(Ordering::Less));
    antichain.push(d);
}

/// The front at `i` straight from the definition: for each existential
/// strategy, the worst outcomes the opponent can force; over those, the
/// best result sets. Errors when the strategy-pair count exceeds `bound`.
pub fn brute_force_pareto(
    a: &OpenParityGame,
    i: EntranceRef,
    bound: u64,
) -> Result<ParetoFront, OracleError> {
    let violations = a.validate(false);
    if !violations.is_empty() {
        return Err(OpgError::Invalid(violations).into());
    }
    let start = a.entrance_node(i)?;
    let pairs = strategy_count(a, Owner::Exists).saturating_mul(strategy_count(a, Owner::Forall));
    if pairs > bound {
        return Err(OracleError::BoundExceeded { pairs, bound });
    }
    let labels = a.exit_labels();
    let mut worsts: Vec<ResultSet> = Vec::new();
    for se in enumerate_positional_strategies(a, Owner::Exists) {
        let mut worst: Vec<DomainElement> = Vec::new();
        for sa in enumerate_positional_strategies(a, Owner::Forall) {
            let outcome = evaluate_play(a.game(), &labels, &se, &sa, start)?;
            fold_minimal(&mut worst, outcome);
        }
        worsts.push(ResultSet::new(worst).map_err(OpgError::Order)?);
    }
    let best = maximal_results(worsts).map_err(OpgError::Order)?;
    Ok(ParetoFront::new(i, best).map_err(OracleError::Opg)?)
}
