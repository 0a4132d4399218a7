//! String diagrams of open parity games: terms, the two compositions,
//! shortcut games, and the compositional solver.
//!
//! Sequential composition wires the rightward exits of the left game to the
//! rightward entrances of the right game and the leftward exits of the
//! right game back to the leftward entrances of the left one. Sum places
//! games side by side. A diagram is solved without ever building its full
//! composite: each child is replaced by its shortcut, a game of
//! interface-plus-result nodes with the same fronts, and only the shortcut
//! composite is solved. Atom solutions are memoized across occurrences.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Mutex;

use thiserror::Error;

use crate::opg::{
    solve_pareto_fronts, EntranceRef, Interface, OpenParityGame, OpgError, ParetoFront,
    SolveOptions, SolveStats,
};
use crate::orders::{DomainElement, PrioritySpace};
use crate::solver::{Edge, GameError, NodeId, Owner, ParityGame};

pub type Fronts = BTreeMap<EntranceRef, ParetoFront>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    #[error(transparent)]
    Opg(#[from] OpgError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("cannot compose sequentially: left is {left}, right is {right}")]
    MiddleMismatch {
        left: InterfaceType,
        right: InterfaceType,
    },
    #[error("fronts do not match the game's entrances: {0}")]
    FrontMismatch(String),
}

/// Arities of the two ends of an open game: dom counts rightward entrances
/// and leftward exits, cod counts rightward exits and leftward entrances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct InterfaceType {
    pub dom: (usize, usize),
    pub cod: (usize, usize),
}

impl InterfaceType {
    pub fn of(game: &OpenParityGame) -> Self {
        InterfaceType {
            dom: game.dom(),
            cod: game.cod(),
        }
    }
}

impl fmt::Display for InterfaceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{}) -> ({},{})",
            self.dom.0, self.dom.1, self.cod.0, self.cod.1
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagramTerm {
    Atom(String, OpenParityGame),
    Seq(Box<DiagramTerm>, Box<DiagramTerm>),
    Sum(Box<DiagramTerm>, Box<DiagramTerm>),
}

impl DiagramTerm {
    pub fn atom(name: impl Into<String>, game: OpenParityGame) -> Self {
        DiagramTerm::Atom(name.into(), game)
    }

    pub fn seq(left: DiagramTerm, right: DiagramTerm) -> Self {
        DiagramTerm::Seq(Box::new(left), Box::new(right))
    }

    pub fn sum(left: DiagramTerm, right: DiagramTerm) -> Self {
        DiagramTerm::Sum(Box::new(left), Box::new(right))
    }
}

/// The composite's interface type, checking every sequential middle.
pub fn type_of(d: &DiagramTerm) -> Result<InterfaceType, DiagramError> {
    match d {
        DiagramTerm::Atom(_, game) => Ok(InterfaceType::of(game)),
        DiagramTerm::Seq(l, r) => {
            let tl = type_of(l)?;
            let tr = type_of(r)?;
            if tl.cod != tr.dom {
                return Err(DiagramError::MiddleMismatch {
                    left: tl,
                    right: tr,
                });
            }
            Ok(InterfaceType {
                dom: tl.dom,
                cod: tr.cod,
            })
        }
        DiagramTerm::Sum(l, r) => {
            let tl = type_of(l)?;
            let tr = type_of(r)?;
            Ok(InterfaceType {
                dom: (tl.dom.0 + tr.dom.0, tl.dom.1 + tr.dom.1),
                cod: (tl.cod.0 + tr.cod.0, tl.cod.1 + tr.cod.1),
            })
        }
    }
}

/// Wires `a` before `b`: `a`'s rightward exits feed `b`'s rightward
/// entrances and `b`'s leftward exits feed back into `a`'s leftward
/// entrances, all over fresh priority-0 edges. The wired exits lose their
/// self-loops and become forced internal nodes; the surviving interface is
/// `a`'s domain and `b`'s codomain.
pub fn seq_compose(a: &OpenParityGame, b: &OpenParityGame) -> Result<OpenParityGame, DiagramError> {
    let ta = InterfaceType::of(a);
    let tb = InterfaceType::of(b);
    if ta.cod != tb.dom {
        return Err(DiagramError::MiddleMismatch {
            left: ta,
            right: tb,
        });
    }
    let shift = a.game().num_nodes();
    let ia = a.interface();
    let ib = b.interface();

    let mut owners = a.game().owners().to_vec();
    owners.extend_from_slice(b.game().owners());

    let wired_left: Vec<NodeId> = ia.exits_right.clone();
    let wired_right: Vec<NodeId> = ib.exits_left.iter().map(|&n| n + shift).collect();

    let mut edges: Vec<Edge> = a
        .game()
        .edges()
        .iter()
        .filter(|e| !wired_left.contains(&e.from))
        .copied()
        .collect();
    edges.extend(b.game().edges().iter().filter_map(|e| {
        let shifted = Edge {
            from: e.from + shift,
            to: e.to + shift,
            priority: e.priority,
        };
        (!wired_right.contains(&shifted.from)).then_some(shifted)
    }));
    for (k, &exit) in wired_left.iter().enumerate() {
        edges.push(Edge {
            from: exit,
            to: ib.entrances_right[k] + shift,
            priority: 0,
        });
    }
    for (k, &exit) in wired_right.iter().enumerate() {
        edges.push(Edge {
            from: exit,
            to: ia.entrances_left[k],
            priority: 0,
        });
    }

    let space = a.game().space().join(b.game().space());
    let game = ParityGame::new(owners, edges, space)?;
    let interface = Interface {
        entrances_right: ia.entrances_right.clone(),
        entrances_left: ib.entrances_left.iter().map(|&n| n + shift).collect(),
        exits_right: ib.exits_right.iter().map(|&n| n + shift).collect(),
        exits_left: ia.exits_left.clone(),
    };
    Ok(OpenParityGame::new(game, interface)?)
}

/// Places `a` and `b` side by side with no interaction; each of the four
/// interface lists is `a`'s followed by `b`'s.
pub fn sum_compose(a: &OpenParityGame, b: &OpenParityGame) -> Result<OpenParityGame, DiagramError> {
    let shift = a.game().num_nodes();
    let ia = a.interface();
    let ib = b.interface();

    let mut owners = a.game().owners().to_vec();
    owners.extend_from_slice(b.game().owners());
    let mut edges = a.game().edges().to_vec();
    edges.extend(b.game().edges().iter().map(|e| Edge {
        from: e.from + shift,
        to: e.to + shift,
        priority: e.priority,
    }));

    let both = |xs: &[NodeId], ys: &[NodeId]| {
        xs.iter()
            .copied()
            .chain(ys.iter().map(|&n| n + shift))
            .collect::<Vec<_>>()
    };
    let interface = Interface {
        entrances_right: both(&ia.entrances_right, &ib.entrances_right),
        entrances_left: both(&ia.entrances_left, &ib.entrances_left),
        exits_right: both(&ia.exits_right, &ib.exits_right),
        exits_left: both(&ia.exits_left, &ib.exits_left),
    };
    let space = a.game().space().join(b.game().space());
    let game = ParityGame::new(owners, edges, space)?;
    Ok(OpenParityGame::new(game, interface)?)
}

/// The composite game a term denotes, built by folding the compositions.
pub fn operational_semantics(d: &DiagramTerm) -> Result<OpenParityGame, DiagramError> {
    match d {
        DiagramTerm::Atom(_, game) => Ok(game.clone()),
        DiagramTerm::Seq(l, r) => {
            seq_compose(&operational_semantics(l)?, &operational_semantics(r)?)
        }
        DiagramTerm::Sum(l, r) => {
            sum_compose(&operational_semantics(l)?, &operational_semantics(r)?)
        }
    }
}

fn expected_entrances(ty: InterfaceType) -> Vec<EntranceRef> {
    let right = (1..=ty.dom.0).map(EntranceRef::right);
    let left = (1..=ty.cod.1).map(EntranceRef::left);
    right.chain(left).collect()
}

/// Builds a shortcut from arities and fronts alone; the underlying game of
/// the summarized component is never needed.
fn shortcut_from_parts(
    ty: InterfaceType,
    space: PrioritySpace,
    fronts: &Fronts,
) -> Result<OpenParityGame, DiagramError> {
    let expected = expected_entrances(ty);
    let got: Vec<EntranceRef> = fronts.keys().copied().collect();
    if got != expected {
        return Err(DiagramError::FrontMismatch(format!(
            "expected [{}], got [{}]",
            expected
                .iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(", "),
            got.iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        )));
    }

    let (num_er, num_ol) = ty.dom;
    let (num_or, num_el) = ty.cod;
    let entrances_right: Vec<NodeId> = (0..num_er).collect();
    let entrances_left: Vec<NodeId> = (num_er..num_er + num_el).collect();
    let base = num_er + num_el;
    let exits_right: Vec<NodeId> = (base..base + num_or).collect();
    let exits_left: Vec<NodeId> = (base + num_or..base + num_or + num_ol).collect();
    let interface_count = base + num_or + num_ol;

    let exit_node = |o: &crate::orders::ExitRef| -> NodeId {
        match o.direction {
            crate::orders::Direction::Rightward => exits_right[o.index - 1],
            crate::orders::Direction::Leftward => exits_left[o.index - 1],
        }
    };

    let mut owners = vec![Owner::Exists; interface_count];
    let mut edges: Vec<Edge> = Vec::new();
    let mut max_used: u32 = 0;
    for &exit in exits_right.iter().chain(&exits_left) {
        edges.push(Edge {
            from: exit,
            to: exit,
            priority: 0,
        });
    }
    // map iteration order is the canonical entrance order, which is the
    // node layout order of the entrances
    for (entrance_node, (_, front)) in fronts.iter().enumerate() {
        for result in front.results() {
            let r = owners.len();
            owners.push(Owner::Forall);
            edges.push(Edge {
                from: entrance_node,
                to: r,
                priority: 0,
            });
            for d in result.iter() {
                let e = match d {
                    DomainElement::Top => Edge {
                        from: r,
                        to: r,
                        priority: 0,
                    },
                    DomainElement::Bot => Edge {
                        from: r,
                        to: r,
                        priority: 1,
                    },
                    DomainElement::ExitAt(o, m) => Edge {
                        from: r,
                        to: exit_node(o),
                        priority: *m,
                    },
                };
                max_used = max_used.max(e.priority);
                edges.push(e);
            }
        }
    }

    let space = space.join(PrioritySpace::covering(max_used));
    let game = ParityGame::new(owners, edges, space)?;
    let interface = Interface {
        entrances_right,
        entrances_left,
        exits_right,
        exits_left,
    };
    Ok(OpenParityGame::new(game, interface)?)
}

/// The shortcut of `a`: a game over fresh interface nodes plus one
/// opponent-owned node per front result, with the same fronts as `a`. At an
/// entrance the opponent picks a result; from a result node, each of its
/// outcomes is realized by an edge (exit outcomes move to the exit with
/// that priority, top and bot spin on even/odd self-loops).
pub fn shortcut(a: &OpenParityGame, fronts: &Fronts) -> Result<OpenParityGame, DiagramError> {
    shortcut_from_parts(InterfaceType::of(a), a.game().space(), fronts)
}

/// Hash of everything the fronts of a game can depend on: node count,
/// owners, edges, and the four interface lists. The priority cap is left
/// out on purpose: fronts do not change when priorities merely gain
/// headroom, so structurally equal atoms at different caps share solutions.
fn structural_hash(a: &OpenParityGame) -> u64 {
    let mut h = DefaultHasher::new();
    a.game().num_nodes().hash(&mut h);
    a.game().owners().hash(&mut h);
    a.game().edges().hash(&mut h);
    a.interface().hash(&mut h);
    h.finish()
}

/// Memoized atom solutions, keyed by atom name plus structural hash so a
/// name reused for a different game cannot poison the store.
#[derive(Debug, Default)]
pub struct FrontCache {
    map: Mutex<HashMap<(String, u64), Fronts>>,
}

impl FrontCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn get(&self, key: &(String, u64)) -> Option<Fronts> {
        self.map.lock().unwrap().get(key).cloned()
    }

    fn insert(&self, key: (String, u64), fronts: Fronts) {
        self.map.lock().unwrap().insert(key, fronts);
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn solve_rec(
    d: &DiagramTerm,
    cache: &FrontCache,
    opts: &SolveOptions,
    stats: &SolveStats,
) -> Result<(InterfaceType, PrioritySpace, Fronts), DiagramError> {
    match d {
        DiagramTerm::Atom(name, game) => {
            let ty = InterfaceType::of(game);
            let space = game.game().space();
            let key = (name.clone(), structural_hash(game));
            if let Some(fronts) = cache.get(&key) {
                stats.add_cache_hit();
                return Ok((ty, space, fronts));
            }
            let fronts = solve_pareto_fronts(game, opts, stats)?;
            cache.insert(key, fronts.clone());
            Ok((ty, space, fronts))
        }
        DiagramTerm::Seq(l, r) | DiagramTerm::Sum(l, r) => {
            let (tl, sl, fl) = solve_rec(l, cache, opts, stats)?;
            let (tr, sr, fr) = solve_rec(r, cache, opts, stats)?;
            let sa = shortcut_from_parts(tl, sl, &fl)?;
            let sb = shortcut_from_parts(tr, sr, &fr)?;
            let composed = match d {
                DiagramTerm::Seq(..) => seq_compose(&sa, &sb)?,
                _ => sum_compose(&sa, &sb)?,
            };
            let fronts = solve_pareto_fronts(&composed, opts, stats)?;
            Ok((
                InterfaceType::of(&composed),
                composed.game().space(),
                fronts,
            ))
        }
    }
}

/// Solves a diagram compositionally: atoms by the query solver (memoized in
/// `cache`), composites by composing the children's shortcuts and solving
/// that small game. The result equals the fronts of the full composite.
pub fn solve_diagram(
    d: &DiagramTerm,
    cache: &FrontCache,
    opts: &SolveOptions,
    stats: &SolveStats,
) -> Result<Fronts, DiagramError> {
    let (_, _, fronts) = solve_rec(d, cache, opts, stats)?;
    Ok(fronts)
}
