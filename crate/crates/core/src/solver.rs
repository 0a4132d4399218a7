//! Closed parity games with edge priorities and a Zielonka-style solver.
//!
//! The existential player wins an infinite play when the maximum edge
//! priority seen infinitely often is even. Games here carry priorities on
//! edges; [`split_edges`] translates to the usual node-priority form by
//! inserting one relay node per edge, and [`solve_zielonka`] is the
//! classical recursive attractor algorithm on that form. [`solve_game`]
//! composes the two and maps regions and strategies back to the original
//! nodes, so the base solver can be swapped behind that one function.

use std::cmp::Ordering;
use std::collections::VecDeque;

use thiserror::Error;

use crate::orders::{DomainElement, ExitRef, Priority, PrioritySpace};

pub type NodeId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("node {node} out of range for a game with {len} nodes")]
    NodeOutOfRange { node: NodeId, len: usize },
    #[error("priority {priority} exceeds the priority cap {max}")]
    PriorityOutOfRange { priority: Priority, max: Priority },
    #[error("node {0} has no outgoing edge")]
    NoSuccessor(NodeId),
    #[error("duplicate edge from {0} to {1}")]
    DuplicateEdge(NodeId, NodeId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("strategy for {player:?} has no choice at node {node}")]
    IncompleteStrategy { player: Owner, node: NodeId },
    #[error("strategy moves from {from} to {to}, but the game has no such edge")]
    StrategyEdgeMissing { from: NodeId, to: NodeId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Owner {
    Exists,
    Forall,
}

impl Owner {
    pub fn opponent(self) -> Owner {
        match self {
            Owner::Exists => Owner::Forall,
            Owner::Forall => Owner::Exists,
        }
    }

    /// The player that wins when `p` is the maximum priority occurring
    /// infinitely often.
    pub fn of_parity(p: Priority) -> Owner {
        if p % 2 == 0 {
            Owner::Exists
        } else {
            Owner::Forall
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub priority: Priority,
}

/// A parity game with priorities on edges. Edges are stored sorted by
/// (source, target) with a per-node index, and there is at most one edge per
/// ordered node pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityGame {
    owners: Vec<Owner>,
    edges: Vec<Edge>,
    first_edge: Vec<usize>,
    space: PrioritySpace,
}

impl ParityGame {
    pub fn new(
        owners: Vec<Owner>,
        mut edges: Vec<Edge>,
        space: PrioritySpace,
    ) -> Result<Self, GameError> {
        let n = owners.len();
        for e in &edges {
            for node in [e.from, e.to] {
                if node >= n {
                    return Err(GameError::NodeOutOfRange { node, len: n });
                }
            }
            if !space.contains(e.priority) {
                return Err(GameError::PriorityOutOfRange {
                    priority: e.priority,
                    max: space.max(),
                });
            }
        }
        edges.sort();
        for w in edges.windows(2) {
            if w[0].from == w[1].from && w[0].to == w[1].to {
                return Err(GameError::DuplicateEdge(w[0].from, w[0].to));
            }
        }
        let mut first_edge = vec![0usize; n + 1];
        for e in &edges {
            first_edge[e.from + 1] += 1;
        }
        for u in 0..n {
            first_edge[u + 1] += first_edge[u];
        }
        let game = ParityGame {
            owners,
            edges,
            first_edge,
            space,
        };
        for u in 0..n {
            if game.successors(u).is_empty() {
                return Err(GameError::NoSuccessor(u));
            }
        }
        Ok(game)
    }

    pub fn num_nodes(&self) -> usize {
        self.owners.len()
    }

    pub fn owner(&self, u: NodeId) -> Owner {
        self.owners[u]
    }

    pub fn owners(&self) -> &[Owner] {
        &self.owners
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn space(&self) -> PrioritySpace {
        self.space
    }

    /// Outgoing edges of `u`, ascending by target.
    pub fn successors(&self, u: NodeId) -> &[Edge] {
        &self.edges[self.first_edge[u]..self.first_edge[u + 1]]
    }

    pub fn edge_between(&self, u: NodeId, v: NodeId) -> Option<Edge> {
        let succ = self.successors(u);
        succ.binary_search_by(|e| e.to.cmp(&v))
            .ok()
            .map(|k| succ[k])
    }
}

/// A positional strategy for one player: a choice of successor at each of
/// that player's nodes it is defined on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionalStrategy {
    player: Owner,
    choice: Vec<Option<NodeId>>,
}

impl PositionalStrategy {
    pub fn new(player: Owner, num_nodes: usize) -> Self {
        PositionalStrategy {
            player,
            choice: vec![None; num_nodes],
        }
    }

    pub fn player(&self) -> Owner {
        self.player
    }

    pub fn set(&mut self, n: NodeId, v: NodeId) {
        self.choice[n] = Some(v);
    }

    pub fn get(&self, n: NodeId) -> Option<NodeId> {
        self.choice.get(n).copied().flatten()
    }

    /// Nodes the strategy is defined on, with their choices, ascending.
    pub fn choices(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.choice
            .iter()
            .enumerate()
            .filter_map(|(n, c)| c.map(|v| (n, v)))
    }
}

/// Output of a solve: who wins from where, with positional witness
/// strategies defined on each player's nodes inside their own region.
#[derive(Debug, Clone)]
pub struct WinningRegions {
    pub exists_region: Vec<NodeId>,
    pub forall_region: Vec<NodeId>,
    pub exists_strategy: PositionalStrategy,
    pub forall_strategy: PositionalStrategy,
}

impl WinningRegions {
    pub fn winner_of(&self, n: NodeId) -> Owner {
        if self.exists_region.binary_search(&n).is_ok() {
            Owner::Exists
        } else {
            Owner::Forall
        }
    }
}

// ---------------------------------------------------------------------------
// Node-priority form and the edge split
// ---------------------------------------------------------------------------

/// A parity game in the usual node-priority presentation. Successor lists
/// are sorted and duplicate-free.
#[derive(Debug, Clone)]
pub struct NodeParityGame {
    owners: Vec<Owner>,
    priorities: Vec<Priority>,
    succ: Vec<Vec<NodeId>>,
}

impl NodeParityGame {
    pub fn new(
        owners: Vec<Owner>,
        priorities: Vec<Priority>,
        mut succ: Vec<Vec<NodeId>>,
    ) -> Result<Self, GameError> {
        let n = owners.len();
        assert_eq!(priorities.len(), n);
        assert_eq!(succ.len(), n);
        for (u, list) in succ.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            if list.is_empty() {
                return Err(GameError::NoSuccessor(u));
            }
            for &v in list.iter() {
                if v >= n {
                    return Err(GameError::NodeOutOfRange { node: v, len: n });
                }
            }
        }
        Ok(NodeParityGame {
            owners,
            priorities,
            succ,
        })
    }

    pub fn len(&self) -> usize {
        self.owners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owners.is_empty()
    }

    pub fn owner(&self, u: NodeId) -> Owner {
        self.owners[u]
    }

    pub fn priority(&self, u: NodeId) -> Priority {
        self.priorities[u]
    }

    pub fn succ(&self, u: NodeId) -> &[NodeId] {
        &self.succ[u]
    }

    fn predecessors(&self) -> Vec<Vec<NodeId>> {
        let mut preds = vec![Vec::new(); self.len()];
        for u in 0..self.len() {
            for &v in &self.succ[u] {
                preds[v].push(u);
            }
        }
        preds
    }
}

/// The node-priority translation of an edge-priority game. Original nodes
/// keep their ids and get priority 0; the edge at index `k` of the source
/// game becomes the relay node `original_count + k`, carrying the edge's
/// priority and pointing at the edge's target.
#[derive(Debug, Clone)]
pub struct SplitGame {
    pub game: NodeParityGame,
    num_original: usize,
}

impl SplitGame {
    pub fn original_count(&self) -> usize {
        self.num_original
    }

    /// The single successor of a relay node.
    pub fn relay_target(&self, relay: NodeId) -> NodeId {
        self.game.succ(relay)[0]
    }
}

/// Relays every edge through a fresh priority-carrying node. Original nodes
/// get priority 0, which never dominates: any infinite play visits relays
/// infinitely often, so the maximum priority seen infinitely often is the
/// same before and after translation.
pub fn split_edges(g: &ParityGame) -> SplitGame {
    let n = g.num_nodes();
    let m = g.edges().len();
    let mut owners = Vec::with_capacity(n + m);
    let mut priorities = Vec::with_capacity(n + m);
    let mut succ = vec![Vec::new(); n + m];
    owners.extend_from_slice(g.owners());
    priorities.extend(std::iter::repeat(0).take(n));
    for (k, e) in g.edges().iter().enumerate() {
        owners.push(Owner::Exists);
        priorities.push(e.priority);
        succ[e.from].push(n + k);
        succ[n + k].push(e.to);
    }
    let game = NodeParityGame::new(owners, priorities, succ).expect("translation of a valid game");
    SplitGame {
        game,
        num_original: n,
    }
}

// ---------------------------------------------------------------------------
// Zielonka recursion
// ---------------------------------------------------------------------------

/// The `player`-attractor of `targets` inside the `alive` subgame: nodes
/// from which `player` can force a visit to `targets`. Returns membership
/// and, for each of `player`'s attracted non-target nodes, the successor
/// witnessing one step of progress.
fn attractor(
    g: &NodeParityGame,
    preds: &[Vec<NodeId>],
    alive: &[bool],
    targets: &[NodeId],
    player: Owner,
) -> (Vec<bool>, Vec<Option<NodeId>>) {
    let n = alive.len();
    let mut in_attr = vec![false; n];
    let mut strat = vec![None; n];
    let mut escapes = vec![0usize; n];
    for u in 0..n {
        if alive[u] && g.owner(u) != player {
            escapes[u] = g.succ(u).iter().filter(|&&v| alive[v]).count();
        }
    }
    let mut queue: VecDeque<NodeId> = targets.iter().copied().collect();
    for &t in targets {
        in_attr[t] = true;
    }
    while let Some(u) = queue.pop_front() {
        for &v in &preds[u] {
            if !alive[v] || in_attr[v] {
                continue;
            }
            if g.owner(v) == player {
                in_attr[v] = true;
                strat[v] = Some(u);
                queue.push_back(v);
            } else {
                escapes[v] -= 1;
                if escapes[v] == 0 {
                    in_attr[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    (in_attr, strat)
}

/// One level of the recursion on the subgame `alive`. Returns, for each
/// alive node, its winner and, when its owner wins it, a strategy choice.
fn zielonka(
    g: &NodeParityGame,
    preds: &[Vec<NodeId>],
    alive: &[bool],
) -> (Vec<Option<Owner>>, Vec<Option<NodeId>>) {
    let n = alive.len();
    let mut winner = vec![None; n];
    let mut strategy = vec![None; n];
    let Some(p) = (0..n).filter(|&u| alive[u]).map(|u| g.priority(u)).max() else {
        return (winner, strategy);
    };
    let sigma = Owner::of_parity(p);
    let targets: Vec<NodeId> = (0..n).filter(|&u| alive[u] && g.priority(u) == p).collect();
    let (in_a, a_strat) = attractor(g, preds, alive, &targets, sigma);

    let mut sub: Vec<bool> = alive.to_vec();
    for u in 0..n {
        if in_a[u] {
            sub[u] = false;
        }
    }
    let (w1, s1) = zielonka(g, preds, &sub);

    let opp = sigma.opponent();
    let opp_region: Vec<NodeId> = (0..n).filter(|&u| sub[u] && w1[u] == Some(opp)).collect();

    if opp_region.is_empty() {
        // sigma wins the whole subgame: recursion strategy inside sub,
        // attractor progress on A minus the targets, and on a target any
        // move that stays alive keeps priority p recurring.
        for u in 0..n {
            if !alive[u] {
                continue;
            }
            winner[u] = Some(sigma);
            if g.owner(u) != sigma {
                continue;
            }
            strategy[u] = if sub[u] {
                s1[u]
            } else if a_strat[u].is_some() {
                a_strat[u]
            } else {
                g.succ(u).iter().copied().find(|&v| alive[v])
            };
        }
        return (winner, strategy);
    }

    let (in_b, b_strat) = attractor(g, preds, alive, &opp_region, opp);
    let mut sub2: Vec<bool> = alive.to_vec();
    for u in 0..n {
        if in_b[u] {
            sub2[u] = false;
        }
    }
    let (w2, s2) = zielonka(g, preds, &sub2);
    for u in 0..n {
        if !alive[u] {
            continue;
        }
        if sub2[u] {
            winner[u] = w2[u];
            strategy[u] = s2[u];
        } else {
            // u is in B: the opponent reaches their region won in the first
            // recursion and wins from there, which is a trap for sigma.
            winner[u] = Some(opp);
            if g.owner(u) == opp {
                strategy[u] = if w1[u] == Some(opp) {
                    s1[u]
                } else {
                    b_strat[u]
                };
            }
        }
    }
    (winner, strategy)
}

/// Exact winning regions and witness strategies of a node-priority game.
pub fn solve_zielonka(g: &NodeParityGame) -> WinningRegions {
    let n = g.len();
    let preds = g.predecessors();
    let alive = vec![true; n];
    let (winner, strategy) = zielonka(g, &preds, &alive);
    let mut exists_region = Vec::new();
    let mut forall_region = Vec::new();
    let mut exists_strategy = PositionalStrategy::new(Owner::Exists, n);
    let mut forall_strategy = PositionalStrategy::new(Owner::Forall, n);
    for u in 0..n {
        let w = winner[u].expect("every node of the full game is decided");
        match w {
            Owner::Exists => exists_region.push(u),
            Owner::Forall => forall_region.push(u),
        }
        if g.owner(u) == w {
            let v = strategy[u].expect("winner's nodes carry a strategy choice");
            match w {
                Owner::Exists => exists_strategy.set(u, v),
                Owner::Forall => forall_strategy.set(u, v),
            }
        }
    }
    WinningRegions {
        exists_region,
        forall_region,
        exists_strategy,
        forall_strategy,
    }
}

/// Solves an edge-priority game: regions and strategies are reported on the
/// original nodes, with relay hops contracted away.
pub fn solve_game(g: &ParityGame) -> WinningRegions {
    let split = split_edges(g);
    let raw = solve_zielonka(&split.game);
    let n = g.num_nodes();
    let mut exists_region = Vec::new();
    let mut forall_region = Vec::new();
    let mut exists_strategy = PositionalStrategy::new(Owner::Exists, n);
    let mut forall_strategy = PositionalStrategy::new(Owner::Forall, n);
    for u in 0..n {
        let w = raw.winner_of(u);
        let raw_strategy = match w {
            Owner::Exists => {
                exists_region.push(u);
                &raw.exists_strategy
            }
            Owner::Forall => {
                forall_region.push(u);
                &raw.forall_strategy
            }
        };
        if g.owner(u) == w {
            let relay = raw_strategy
                .get(u)
                .expect("winner's nodes carry a strategy choice");
            let v = split.relay_target(relay);
            match w {
                Owner::Exists => exists_strategy.set(u, v),
                Owner::Forall => forall_strategy.set(u, v),
            }
        }
    }
    WinningRegions {
        exists_region,
        forall_region,
        exists_strategy,
        forall_strategy,
    }
}

/// Does the existential player win from `n`?
pub fn is_winning(g: &ParityGame, n: NodeId) -> Result<bool, GameError> {
    if n >= g.num_nodes() {
        return Err(GameError::UnknownNode(n));
    }
    Ok(solve_game(g).winner_of(n) == Owner::Exists)
}

// ---------------------------------------------------------------------------
// Play evaluation
// ---------------------------------------------------------------------------

/// Follows the unique play induced by two positional strategies and returns
/// its outcome. `exit_labels` marks exit nodes (dense per node id, empty for
/// a closed game); the exit check happens before stepping, so exit
/// self-loops are never taken and a play reaching an exit ends with the
/// maximum edge priority seen strictly before it (0 when it starts there).
/// A play that never exits is a lasso; its cycle's maximum edge priority
/// decides between `Top` and `Bot`.
pub fn evaluate_play(
    game: &ParityGame,
    exit_labels: &[Option<ExitRef>],
    s_e: &PositionalStrategy,
    s_a: &PositionalStrategy,
    start: NodeId,
) -> Result<DomainElement, GameError> {
    let n = game.num_nodes();
    if start >= n {
        return Err(GameError::UnknownNode(start));
    }
    let mut visited_at = vec![usize::MAX; n];
    let mut step_priorities: Vec<Priority> = Vec::new();
    let mut prefix_max: Priority = 0;
    let mut cur = start;
    loop {
        if let Some(o) = exit_labels.get(cur).copied().flatten() {
            return Ok(DomainElement::ExitAt(o, prefix_max));
        }
        if visited_at[cur] != usize::MAX {
            let cycle_max = step_priorities[visited_at[cur]..]
                .iter()
                .copied()
                .max()
                .expect("a revisit closes a non-empty cycle");
            return Ok(match Owner::of_parity(cycle_max) {
                Owner::Exists => DomainElement::Top,
                Owner::Forall => DomainElement::Bot,
            });
        }
        visited_at[cur] = step_priorities.len();
        let strat = match game.owner(cur) {
            Owner::Exists => s_e,
            Owner::Forall => s_a,
        };
        let next = strat.get(cur).ok_or(GameError::IncompleteStrategy {
            player: strat.player(),
            node: cur,
        })?;
        let e = game
            .edge_between(cur, next)
            .ok_or(GameError::StrategyEdgeMissing {
                from: cur,
                to: next,
            })?;
        prefix_max = prefix_max.max(e.priority);
        step_priorities.push(e.priority);
        cur = next;
    }
}

#[allow(dead_code)]
fn cmp_edges(a: &Edge, b: &Edge) -> Ordering {
    (a.from, a.to).cmp(&(b.from, b.to))
}
