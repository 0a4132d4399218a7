//! Open parity games: interfaces, validation, the loop construction, and
//! the Pareto front solver.
//!
//! An open parity game wraps a parity game with four ordered lists of
//! interface nodes: rightward/leftward entrances and exits. Exits are sinks
//! that keep a priority-0 self-loop. The solver answers, per entrance, which
//! trade-offs the existential player can force: it encircles the game with
//! every possible environment answer (a query), closes it off with the loop
//! construction, and keeps the best result sets among the winning queries.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use rayon::prelude::*;
use thiserror::Error;

use crate::orders::{
    answers_ascending, dual_query, leq_query, maximal_results, Direction, ExitRef, OrderError,
    Priority, Query, ResultSet,
};
use crate::solver::{solve_zielonka, Edge, GameError, NodeId, NodeParityGame, Owner, ParityGame};

/// An entrance named by its position in the interface, 1-based per
/// direction.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntranceRef {
    pub direction: Direction,
    pub index: usize,
}

impl EntranceRef {
    pub fn right(index: usize) -> Self {
        EntranceRef {
            direction: Direction::Rightward,
            index,
        }
    }

    pub fn left(index: usize) -> Self {
        EntranceRef {
            direction: Direction::Leftward,
            index,
        }
    }
}

impl fmt::Display for EntranceRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "in.{}{}", self.direction.short(), self.index)
    }
}

impl fmt::Debug for EntranceRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// The four ordered interface lists. Order matters: list positions are the
/// 1-based indices that [`EntranceRef`] and [`ExitRef`] refer to.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Interface {
    pub entrances_right: Vec<NodeId>,
    pub entrances_left: Vec<NodeId>,
    pub exits_right: Vec<NodeId>,
    pub exits_left: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    InterfaceNotExists(NodeId),
    InterfaceOverlap(NodeId),
    ExitNotSink { exit: NodeId, target: NodeId },
    ExitLoopMissing(NodeId),
    ExitLoopPriority { exit: NodeId, priority: Priority },
    EntranceReachable { entrance: NodeId, from: NodeId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::InterfaceNotExists(n) => {
                write!(
                    f,
                    "interface node {n} is not owned by the existential player"
                )
            }
            Violation::InterfaceOverlap(n) => {
                write!(f, "node {n} appears more than once in the interface")
            }
            Violation::ExitNotSink { exit, target } => {
                write!(f, "exit {exit} is not a sink: it has an edge to {target}")
            }
            Violation::ExitLoopMissing(n) => {
                write!(f, "exit {n} is missing its priority-0 self-loop")
            }
            Violation::ExitLoopPriority { exit, priority } => {
                write!(
                    f,
                    "exit {exit} self-loop has priority {priority}, expected 0"
                )
            }
            Violation::EntranceReachable { entrance, from } => {
                write!(f, "entrance {entrance} has an incoming edge from {from}")
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OpgError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error("invalid open parity game: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("game has no entrance {0}")]
    UnknownEntrance(EntranceRef),
    #[error("query answers {got} exits, the game has {expected}")]
    QueryArity { expected: usize, got: usize },
    #[error("solver produced an inconsistent front: {0}")]
    InconsistentFront(String),
    #[error("could not start worker threads: {0}")]
    ThreadPool(String),
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// A parity game together with an interface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenParityGame {
    game: ParityGame,
    interface: Interface,
}

impl OpenParityGame {
    /// Wraps a game with an interface. Interface node ids must exist;
    /// everything else is reported by [`OpenParityGame::validate`] so that
    /// malformed inputs can be diagnosed rather than rejected blind.
    pub fn new(game: ParityGame, interface: Interface) -> Result<Self, GameError> {
        let n = game.num_nodes();
        for &node in interface
            .entrances_right
            .iter()
            .chain(&interface.entrances_left)
            .chain(&interface.exits_right)
            .chain(&interface.exits_left)
        {
            if node >= n {
                return Err(GameError::NodeOutOfRange { node, len: n });
            }
        }
        Ok(OpenParityGame { game, interface })
    }

    pub fn game(&self) -> &ParityGame {
        &self.game
    }

    pub fn interface(&self) -> &Interface {
        &self.interface
    }

    /// Domain arity (rightward entrances, leftward exits).
    pub fn dom(&self) -> (usize, usize) {
        (
            self.interface.entrances_right.len(),
            self.interface.exits_left.len(),
        )
    }

    /// Codomain arity (rightward exits, leftward entrances).
    pub fn cod(&self) -> (usize, usize) {
        (
            self.interface.exits_right.len(),
            self.interface.entrances_left.len(),
        )
    }

    /// Entrances in canonical order: rightward by index, then leftward.
    pub fn entrances(&self) -> Vec<(EntranceRef, NodeId)> {
        let right = self
            .interface
            .entrances_right
            .iter()
            .enumerate()
            .map(|(k, &n)| (EntranceRef::right(k + 1), n));
        let left = self
            .interface
            .entrances_left
            .iter()
            .enumerate()
            .map(|(k, &n)| (EntranceRef::left(k + 1), n));
        right.chain(left).collect()
    }

    /// Exits in canonical order: rightward by index, then leftward.
    pub fn exits(&self) -> Vec<(ExitRef, NodeId)> {
        let right = self
            .interface
            .exits_right
            .iter()
            .enumerate()
            .map(|(k, &n)| (ExitRef::right(k + 1), n));
        let left = self
            .interface
            .exits_left
            .iter()
            .enumerate()
            .map(|(k, &n)| (ExitRef::left(k + 1), n));
        right.chain(left).collect()
    }

    pub fn exit_refs(&self) -> Vec<ExitRef> {
        self.exits().into_iter().map(|(o, _)| o).collect()
    }

    pub fn num_exits(&self) -> usize {
        self.interface.exits_right.len() + self.interface.exits_left.len()
    }

    /// Dense per-node exit labelling, as [`crate::solver::evaluate_play`]
    /// expects it.
    pub fn exit_labels(&self) -> Vec<Option<ExitRef>> {
        let mut labels = vec![None; self.game.num_nodes()];
        for (o, node) in self.exits() {
            labels[node] = Some(o);
        }
        labels
    }

    pub fn entrance_node(&self, i: EntranceRef) -> Result<NodeId, OpgError> {
        let list = match i.direction {
            Direction::Rightward => &self.interface.entrances_right,
            Direction::Leftward => &self.interface.entrances_left,
        };
        i.index
            .checked_sub(1)
            .and_then(|k| list.get(k).copied())
            .ok_or(OpgError::UnknownEntrance(i))
    }

    fn is_exit(&self, n: NodeId) -> bool {
        self.interface.exits_right.contains(&n) || self.interface.exits_left.contains(&n)
    }

    /// The same game over a priority space at least as large. Fronts are
    /// unaffected: the order on the priorities already present does not
    /// change when the cap grows.
    pub fn lift_space(&self, space: crate::orders::PrioritySpace) -> OpenParityGame {
        let joined = self.game.space().join(space);
        let game = ParityGame::new(
            self.game.owners().to_vec(),
            self.game.edges().to_vec(),
            joined,
        )
        .expect("relaxing the cap keeps the game valid");
        OpenParityGame {
            game,
            interface: self.interface.clone(),
        }
    }

    /// Checks the interface invariants and returns every violation found.
    /// `atomic` additionally requires entrances to have no incoming edges,
    /// which holds for hand-authored games but not for the surviving
    /// entrances of a composite whose siblings were wired away.
    pub fn validate(&self, atomic: bool) -> Vec<Violation> {
        let mut violations = Vec::new();
        let mut seen = std::collections::HashSet::new();
        let all_interface: Vec<NodeId> = self
            .interface
            .entrances_right
            .iter()
            .chain(&self.interface.entrances_left)
            .chain(&self.interface.exits_right)
            .chain(&self.interface.exits_left)
            .copied()
            .collect();
        for &n in &all_interface {
            if !seen.insert(n) {
                violations.push(Violation::InterfaceOverlap(n));
            }
            if self.game.owner(n) != Owner::Exists {
                violations.push(Violation::InterfaceNotExists(n));
            }
        }
        for (_, exit) in self.exits() {
            let mut has_loop = false;
            for e in self.game.successors(exit) {
                if e.to != exit {
                    violations.push(Violation::ExitNotSink { exit, target: e.to });
                } else if e.priority != 0 {
                    violations.push(Violation::ExitLoopPriority {
                        exit,
                        priority: e.priority,
                    });
                    has_loop = true;
                } else {
                    has_loop = true;
                }
            }
            if !has_loop {
                violations.push(Violation::ExitLoopMissing(exit));
            }
        }
        if atomic {
            for (_, entrance) in self.entrances() {
                for e in self.game.edges() {
                    if e.to == entrance {
                        violations.push(Violation::EntranceReachable {
                            entrance,
                            from: e.from,
                        });
                    }
                }
            }
        }
        violations
    }

    /// All queries over this game's exits, exactly once each, in
    /// lexicographic order: the first exit is most significant, and each
    /// exit's answers ascend from silence through the worst priority to the
    /// best. A game with no exits yields the single empty query.
    pub fn enumerate_queries(&self) -> impl Iterator<Item = Query> {
        let values = answers_ascending(&self.game.space());
        let n = self.num_exits();
        let mut digits = vec![0usize; n];
        let mut done = false;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            let q = Query::new(digits.iter().map(|&d| values[d]).collect());
            let mut k = n;
            loop {
                if k == 0 {
                    done = true;
                    break;
                }
                k -= 1;
                digits[k] += 1;
                if digits[k] < values.len() {
                    break;
                }
                digits[k] = 0;
            }
            Some(q)
        })
    }
}

/// Closes an open game off against one environment answer: all nodes stay,
/// edges out of exits are dropped, and each exit either jumps back to the
/// chosen entrance with the answered priority or, when silent, spins on a
/// losing priority-1 self-loop.
pub fn loop_construction(
    a: &OpenParityGame,
    i: EntranceRef,
    q: &Query,
) -> Result<ParityGame, OpgError> {
    let entrance = a.entrance_node(i)?;
    let exits = a.exits();
    if q.len() != exits.len() {
        return Err(OpgError::QueryArity {
            expected: exits.len(),
            got: q.len(),
        });
    }
    let mut edges: Vec<Edge> = a
        .game
        .edges()
        .iter()
        .filter(|e| !a.is_exit(e.from))
        .copied()
        .collect();
    for ((_, exit), &answer) in exits.iter().zip(q.answers()) {
        edges.push(match answer {
            Some(m) => Edge {
                from: *exit,
                to: entrance,
                priority: m,
            },
            None => Edge {
                from: *exit,
                to: *exit,
                priority: 1,
            },
        });
    }
    Ok(ParityGame::new(
        a.game.owners().to_vec(),
        edges,
        a.game.space(),
    )?)
}

// ---------------------------------------------------------------------------
// Pareto fronts
// ---------------------------------------------------------------------------

/// The optimal result sets the existential player can pick between at one
/// entrance: a non-empty antichain under the upper order, stored in
/// canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParetoFront {
    entrance: EntranceRef,
    results: Vec<ResultSet>,
}

impl ParetoFront {
    pub fn new(entrance: EntranceRef, results: Vec<ResultSet>) -> Result<Self, OpgError> {
        if results.is_empty() {
            return Err(OpgError::Order(OrderError::EmptyFamily));
        }
        let canonical = maximal_results(results.iter().cloned())?;
        if canonical != results {
            return Err(OpgError::InconsistentFront(format!(
                "front at {entrance} is not a canonical antichain"
            )));
        }
        Ok(ParetoFront { entrance, results })
    }

    pub fn entrance(&self) -> EntranceRef {
        self.entrance
    }

    pub fn results(&self) -> &[ResultSet] {
        &self.results
    }
}

impl fmt::Display for ParetoFront {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {{", self.entrance)?;
        for (k, r) in self.results.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", r)?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Winning,
    Losing,
    Pending,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Classification::Winning => "winning",
            Classification::Losing => "losing",
            Classification::Pending => "pending",
        };
        write!(f, "{s}")
    }
}

/// Winning iff the front is exactly `{{top}}`, losing iff exactly
/// `{{bot}}`, pending otherwise. A pending front must mention neither top
/// nor bot; that failing means the solver itself is broken, so it is an
/// error rather than a classification.
pub fn classify_entrance(front: &ParetoFront) -> Result<Classification, OpgError> {
    let results = front.results();
    if results.len() == 1 && results[0].is_top() {
        return Ok(Classification::Winning);
    }
    if results.len() == 1 && results[0].is_bot() {
        return Ok(Classification::Losing);
    }
    for r in results {
        for d in r.iter() {
            if matches!(
                d,
                crate::orders::DomainElement::Top | crate::orders::DomainElement::Bot
            ) {
                return Err(OpgError::InconsistentFront(format!(
                    "pending front at {} contains {}",
                    front.entrance(),
                    d
                )));
            }
        }
    }
    Ok(Classification::Pending)
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Skip queries a known winner is pointwise below. Output-invariant.
    pub pruning: bool,
    /// Worker threads for the per-query loop; 1 solves sequentially.
    /// Pruning forces the sequential path regardless.
    pub jobs: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            pruning: false,
            jobs: 1,
        }
    }
}

/// Counters shared across one solve run. Queries counts closed-game solves
/// actually performed; with pruning off it is exactly (M+2)^exits per
/// entrance.
#[derive(Debug, Default)]
pub struct SolveStats {
    queries: AtomicU64,
    cache_hits: AtomicU64,
}

impl SolveStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_queries(&self, n: u64) {
        self.queries.fetch_add(n, AtomicOrdering::Relaxed);
    }

    pub fn add_cache_hit(&self) {
        self.cache_hits.fetch_add(1, AtomicOrdering::Relaxed);
    }

    pub fn queries(&self) -> u64 {
        self.queries.load(AtomicOrdering::Relaxed)
    }

    pub fn cache_hits(&self) -> u64 {
        self.cache_hits.load(AtomicOrdering::Relaxed)
    }
}

/// Pre-split form of every loop game of one open game: original nodes and
/// relays for the edges that survive (exits are left dangling). A query
/// solve tacks on one relay per exit and runs the region solver.
struct LoopSkeleton {
    owners: Vec<Owner>,
    priorities: Vec<Priority>,
    succ: Vec<Vec<NodeId>>,
    exit_nodes: Vec<NodeId>,
}

impl LoopSkeleton {
    fn build(a: &OpenParityGame) -> Self {
        let g = a.game();
        let n = g.num_nodes();
        let kept: Vec<Edge> = g
            .edges()
            .iter()
            .filter(|e| !a.is_exit(e.from))
            .copied()
            .collect();
        let mut owners = g.owners().to_vec();
        let mut priorities = vec![0; n];
        let mut succ = vec![Vec::new(); n + kept.len()];
        for (k, e) in kept.iter().enumerate() {
            owners.push(Owner::Exists);
            priorities.push(e.priority);
            succ[e.from].push(n + k);
            succ[n + k].push(e.to);
        }
        LoopSkeleton {
            owners,
            priorities,
            succ,
            exit_nodes: a.exits().into_iter().map(|(_, node)| node).collect(),
        }
    }

    /// Does the existential player win the loop game for `q` from the
    /// entrance?
    fn entrance_wins(&self, entrance: NodeId, q: &Query) -> bool {
        let mut owners = self.owners.clone();
        let mut priorities = self.priorities.clone();
        let mut succ = self.succ.clone();
        for (&exit, &answer) in self.exit_nodes.iter().zip(q.answers()) {
            let relay = owners.len();
            owners.push(Owner::Exists);
            match answer {
                Some(m) => {
                    priorities.push(m);
                    succ.push(vec![entrance]);
                }
                None => {
                    priorities.push(1);
                    succ.push(vec![exit]);
                }
            }
            succ[exit].push(relay);
        }
        let game = NodeParityGame::new(owners, priorities, succ)
            .expect("skeleton extension keeps every node alive");
        solve_zielonka(&game).winner_of(entrance) == Owner::Exists
    }
}

fn solve_front_unchecked(
    a: &OpenParityGame,
    i: EntranceRef,
    opts: &SolveOptions,
    stats: &SolveStats,
) -> Result<ParetoFront, OpgError> {
    let entrance = a.entrance_node(i)?;
    let exits = a.exit_refs();
    let skeleton = LoopSkeleton::build(a);

    let mut candidates: Vec<ResultSet> = vec![ResultSet::bot()];
    if !opts.pruning && opts.jobs > 1 {
        let queries: Vec<Query> = a.enumerate_queries().collect();
        stats.add_queries(queries.len() as u64);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| OpgError::ThreadPool(e.to_string()))?;
        let winners: Vec<ResultSet> = pool.install(|| {
            queries
                .par_iter()
                .filter(|q| skeleton.entrance_wins(entrance, q))
                .map(|q| dual_query(q, &exits))
                .collect()
        });
        candidates.extend(winners);
    } else {
        let mut solved_winners: Vec<Query> = Vec::new();
        for q in a.enumerate_queries() {
            if opts.pruning
                && solved_winners
                    .iter()
                    .any(|w| leq_query(w, &q).expect("queries share the exit set"))
            {
                // a smaller query already won, so this one wins too and its
                // result is dominated; neither solving nor adding it can
                // change the front
                continue;
            }
            stats.add_queries(1);
            if skeleton.entrance_wins(entrance, &q) {
                candidates.push(dual_query(&q, &exits));
                if opts.pruning {
                    solved_winners.push(q);
                }
            }
        }
    }
    let best = maximal_results(candidates)?;
    ParetoFront::new(i, best)
}

/// Algorithm: start from `{{bot}}`, add the denoted result of every query
/// whose loop game the existential player wins, and keep the maxima.
pub fn solve_pareto_front(
    a: &OpenParityGame,
    i: EntranceRef,
    opts: &SolveOptions,
    stats: &SolveStats,
) -> Result<ParetoFront, OpgError> {
    let violations = a.validate(false);
    if !violations.is_empty() {
        return Err(OpgError::Invalid(violations));
    }
    solve_front_unchecked(a, i, opts, stats)
}

/// Fronts for every entrance, solved independently.
pub fn solve_pareto_fronts(
    a: &OpenParityGame,
    opts: &SolveOptions,
    stats: &SolveStats,
) -> Result<BTreeMap<EntranceRef, ParetoFront>, OpgError> {
    let violations = a.validate(false);
    if !violations.is_empty() {
        return Err(OpgError::Invalid(violations));
    }
    let mut fronts = BTreeMap::new();
    for (i, _) in a.entrances() {
        fronts.insert(i, solve_front_unchecked(a, i, opts, stats)?);
    }
    Ok(fronts)
}

/// Convenience for tests and tools that care about one entrance and no
/// stats.
pub fn front_of(a: &OpenParityGame, i: EntranceRef) -> Result<ParetoFront, OpgError> {
    solve_pareto_front(a, i, &SolveOptions::default(), &SolveStats::new())
}
