//! One test per acceptance criterion. Each test prints its own pass or
//! fail line through the harness and enforces the agreed time budget.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use opg_core::diagram::{
    operational_semantics, seq_compose, shortcut, solve_diagram, sum_compose, type_of, DiagramTerm,
    FrontCache, Fronts,
};
use opg_core::generate::{random_atom, AtomSpec};
use opg_core::opg::{
    classify_entrance, front_of, loop_construction, solve_pareto_front, solve_pareto_fronts,
    Classification, EntranceRef, Interface, OpenParityGame, SolveOptions, SolveStats,
};
use opg_core::oracle::{brute_force_pareto, DEFAULT_ORACLE_BOUND};
use opg_core::orders::{
    answers_ascending, cmp_subpriority, dual_priority, dual_query, leq_query, leq_upper,
    max_priority, minimal_elements, DomainElement, ExitRef, Priority, PrioritySpace, Query,
    ResultSet,
};
use opg_core::report::Mode;
use opg_core::solver::{is_winning, Edge, Owner, ParityGame};
use opg_core::{run_solve, RunOptions};

fn space(m: Priority) -> PrioritySpace {
    PrioritySpace::new(m).unwrap()
}

const RUNNING_EXAMPLE: &str = "
    opg C : (1,1) -> (1,0) {
      maxprio 4;
      node a E;
      node c E;
      node d A;
      node b A;
      in.r1 -> a @ 0;
      a -> c @ 1;
      c -> d @ 0;
      c -> out.r1 @ 0;
      d -> b @ 1;
      d -> out.r1 @ 2;
      b -> a @ 3;
      b -> out.l1 @ 0;
    }
";

#[test]
fn acceptance_01_running_example_front() {
    let start = Instant::now();
    let want_front =
        vec![ResultSet::new(vec![DomainElement::ExitAt(ExitRef::right(1), 1)]).unwrap()];
    for mode in Mode::ALL {
        let opts = RunOptions {
            mode,
            ..RunOptions::default()
        };
        let report = run_solve(RUNNING_EXAMPLE, "C", &opts).unwrap();
        assert_eq!(report.entrances.len(), 1, "{mode}");
        assert_eq!(report.entrances[0].id, "in.r1", "{mode}");
        assert_eq!(report.entrances[0].front, want_front, "{mode}");
        assert_eq!(report.entrances[0].class, Classification::Pending, "{mode}");
    }
    assert!(start.elapsed() < Duration::from_secs(1));
}

/// Two entrances, two exits, with a small concrete middle.
fn two_exit_game() -> OpenParityGame {
    let owners = vec![
        Owner::Exists, // 0: i1
        Owner::Exists, // 1: i2
        Owner::Forall, // 2: chooser
        Owner::Exists, // 3: o1
        Owner::Exists, // 4: o2
    ];
    let edges = vec![
        Edge {
            from: 0,
            to: 2,
            priority: 0,
        },
        Edge {
            from: 1,
            to: 2,
            priority: 1,
        },
        Edge {
            from: 2,
            to: 3,
            priority: 2,
        },
        Edge {
            from: 2,
            to: 4,
            priority: 0,
        },
        Edge {
            from: 3,
            to: 3,
            priority: 0,
        },
        Edge {
            from: 4,
            to: 4,
            priority: 0,
        },
    ];
    let interface = Interface {
        entrances_right: vec![0, 1],
        entrances_left: vec![],
        exits_right: vec![3, 4],
        exits_left: vec![],
    };
    OpenParityGame::new(ParityGame::new(owners, edges, space(4)).unwrap(), interface).unwrap()
}

#[test]
fn acceptance_02_loop_construction_goldens() {
    let start = Instant::now();
    let game = two_exit_game();
    let i1 = EntranceRef::right(1);

    // Base edges: everything except the exit self-loops.
    let base = vec![
        Edge {
            from: 0,
            to: 2,
            priority: 0,
        },
        Edge {
            from: 1,
            to: 2,
            priority: 1,
        },
        Edge {
            from: 2,
            to: 3,
            priority: 2,
        },
        Edge {
            from: 2,
            to: 4,
            priority: 0,
        },
    ];

    let q1 = Query::new(vec![Some(3), None]);
    let mut edges1 = base.clone();
    edges1.push(Edge {
        from: 3,
        to: 0,
        priority: 3,
    });
    edges1.push(Edge {
        from: 4,
        to: 4,
        priority: 1,
    });
    let want1 = ParityGame::new(game.game().owners().to_vec(), edges1, space(4)).unwrap();
    assert_eq!(loop_construction(&game, i1, &q1).unwrap(), want1);

    let q2 = Query::new(vec![Some(0), Some(2)]);
    let mut edges2 = base;
    edges2.push(Edge {
        from: 3,
        to: 0,
        priority: 0,
    });
    edges2.push(Edge {
        from: 4,
        to: 0,
        priority: 2,
    });
    let want2 = ParityGame::new(game.game().owners().to_vec(), edges2, space(4)).unwrap();
    assert_eq!(loop_construction(&game, i1, &q2).unwrap(), want2);

    assert!(start.elapsed() < Duration::from_secs(1));
}

/// Random atoms with at most 8 nodes, 3 exits, outdegree 3, priorities
/// up to 4. Every atom has at least one entrance.
fn oracle_corpus(count: usize, seed: u64) -> Vec<OpenParityGame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut corpus = Vec::new();
    while corpus.len() < count {
        let entrances_right = rng.gen_range(1..=2);
        let entrances_left = rng.gen_range(0..=1);
        let exits_right = rng.gen_range(0..=2);
        let exits_left = rng.gen_range(0..=1);
        let interface = entrances_right + entrances_left + exits_right + exits_left;
        let internal_nodes = rng.gen_range(1..=(8 - interface).min(3));
        let spec = AtomSpec {
            internal_nodes,
            outdegree: rng.gen_range(1..=3),
            entrances_right,
            entrances_left,
            exits_right,
            exits_left,
            max_priority: 4,
        };
        corpus.push(random_atom(&mut rng, &spec).unwrap());
    }
    corpus
}

#[test]
fn acceptance_03_oracle_equivalence() {
    let start = Instant::now();
    let corpus = oracle_corpus(300, 0xC0FFEE);
    let mut checked = 0usize;
    for (index, game) in corpus.iter().enumerate() {
        assert!(game.game().num_nodes() <= 8);
        assert!(game.num_exits() <= 3);
        for (entrance, _) in game.entrances() {
            let solved = front_of(game, entrance).unwrap();
            let oracle = brute_force_pareto(game, entrance, DEFAULT_ORACLE_BOUND).unwrap();
            assert_eq!(solved, oracle, "game {index} entrance {entrance}");
            checked += 1;
        }
    }
    assert!(checked >= 300);
    assert!(start.elapsed() < Duration::from_secs(300));
}

/// Sequentially composable random pairs: the second atom's incoming
/// arities are forced to match the first's outgoing ones.
fn seq_pairs(count: usize, seed: u64) -> Vec<(OpenParityGame, OpenParityGame)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    while pairs.len() < count {
        let a_spec = AtomSpec {
            internal_nodes: rng.gen_range(1..=4),
            outdegree: rng.gen_range(1..=3),
            entrances_right: rng.gen_range(0..=2),
            entrances_left: rng.gen_range(0..=1),
            exits_right: rng.gen_range(0..=2),
            exits_left: rng.gen_range(0..=1),
            max_priority: 4,
        };
        let a = random_atom(&mut rng, &a_spec).unwrap();
        let b_spec = AtomSpec {
            internal_nodes: rng.gen_range(1..=4),
            outdegree: rng.gen_range(1..=3),
            // cod(A) = dom(B): A's right exits feed B's right entrances,
            // B's left exits feed A's left entrances.
            entrances_right: a_spec.exits_right,
            exits_left: a_spec.entrances_left,
            entrances_left: rng.gen_range(0..=1),
            exits_right: rng.gen_range(0..=2),
            max_priority: 4,
        };
        let b = random_atom(&mut rng, &b_spec).unwrap();
        pairs.push((a, b));
    }
    pairs
}

fn fronts_of(game: &OpenParityGame) -> Fronts {
    solve_pareto_fronts(game, &SolveOptions::default(), &SolveStats::new()).unwrap()
}

/// Random diagram terms of bounded depth whose flattening stays small
/// enough for a monolithic solve.
fn diagram_corpus(count: usize, seed: u64) -> Vec<DiagramTerm> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut terms = Vec::new();
    while terms.len() < count {
        let depth = rng.gen_range(1..=3);
        let term = random_term(&mut rng, depth, None);
        let ty = type_of(&term).unwrap();
        let exits = ty.cod.0 + ty.dom.1;
        let entrances = ty.dom.0 + ty.cod.1;
        let flat = operational_semantics(&term).unwrap();
        if exits <= 3 && entrances <= 4 && flat.game().num_nodes() <= 40 {
            terms.push(term);
        }
    }
    terms
}

fn random_term(
    rng: &mut ChaCha8Rng,
    depth: usize,
    want_dom: Option<(usize, usize)>,
) -> DiagramTerm {
    if depth == 0 {
        let (er, xl) = want_dom.unwrap_or_else(|| (rng.gen_range(0..=2), rng.gen_range(0..=1)));
        let spec = AtomSpec {
            internal_nodes: rng.gen_range(1..=3),
            outdegree: rng.gen_range(1..=3),
            entrances_right: er,
            entrances_left: rng.gen_range(0..=1),
            exits_right: rng.gen_range(0..=2),
            exits_left: xl,
            max_priority: if rng.gen_bool(0.5) { 2 } else { 4 },
        };
        return DiagramTerm::Atom(
            format!("t{}", rng.gen_range(0..1_000_000)),
            random_atom(rng, &spec).unwrap(),
        );
    }
    if rng.gen_bool(0.5) {
        let left = random_term(rng, depth - 1, want_dom);
        let mid = type_of(&left).unwrap().cod;
        let right = random_term(rng, depth - 1, Some(mid));
        DiagramTerm::Seq(Box::new(left), Box::new(right))
    } else {
        let split = want_dom.map(|(er, xl)| {
            let el = rng.gen_range(0..=er);
            let xll = rng.gen_range(0..=xl);
            ((el, xll), (er - el, xl - xll))
        });
        let left = random_term(rng, depth - 1, split.map(|(l, _)| l));
        let right = random_term(rng, depth - 1, split.map(|(_, r)| r));
        DiagramTerm::Sum(Box::new(left), Box::new(right))
    }
}

#[test]
fn acceptance_04_compositionality() {
    let start = Instant::now();

    let pairs = seq_pairs(200, 0xBEEF);
    for (index, (a, b)) in pairs.iter().enumerate() {
        let composed = seq_compose(a, b).unwrap();
        let direct = fronts_of(&composed);

        let sa = shortcut(a, &fronts_of(a)).unwrap();
        let sb = shortcut(b, &fronts_of(b)).unwrap();
        let via_shortcuts = fronts_of(&seq_compose(&sa, &sb).unwrap());
        assert_eq!(direct, via_shortcuts, "seq pair {index}");
    }

    // Sums compose interfaces side by side; no matching is needed.
    let mut rng = ChaCha8Rng::seed_from_u64(0xFACE);
    for index in 0..30 {
        let spec = AtomSpec {
            internal_nodes: rng.gen_range(1..=4),
            outdegree: 2,
            entrances_right: rng.gen_range(0..=1),
            entrances_left: rng.gen_range(0..=1),
            exits_right: rng.gen_range(0..=1),
            exits_left: rng.gen_range(0..=1),
            max_priority: 4,
        };
        let a = random_atom(&mut rng, &spec).unwrap();
        let b = random_atom(&mut rng, &spec).unwrap();
        let composed = sum_compose(&a, &b).unwrap();
        let direct = fronts_of(&composed);
        let sa = shortcut(&a, &fronts_of(&a)).unwrap();
        let sb = shortcut(&b, &fronts_of(&b)).unwrap();
        let via_shortcuts = fronts_of(&sum_compose(&sa, &sb).unwrap());
        assert_eq!(direct, via_shortcuts, "sum pair {index}");
    }

    let terms = diagram_corpus(100, 0xD1A6);
    for (index, term) in terms.iter().enumerate() {
        let cache = FrontCache::new();
        let compositional =
            solve_diagram(term, &cache, &SolveOptions::default(), &SolveStats::new()).unwrap();
        let monolithic = fronts_of(&operational_semantics(term).unwrap());
        assert_eq!(compositional, monolithic, "diagram {index}");
    }

    assert!(start.elapsed() < Duration::from_secs(600));
}

#[test]
fn acceptance_05_shortcut_idempotence() {
    let pairs = seq_pairs(200, 0xBEEF);
    let atoms = pairs.iter().flat_map(|(a, b)| [a, b]);
    for (index, atom) in atoms.enumerate() {
        let fronts = fronts_of(atom);
        let summary = shortcut(atom, &fronts).unwrap();
        assert_eq!(fronts_of(&summary), fronts, "atom {index}");
    }
}

#[test]
fn acceptance_06_winner_classification() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    let mut checked = 0usize;
    for round in 0..60 {
        let atom = |rng: &mut ChaCha8Rng, er: usize, el: usize| {
            let spec = AtomSpec {
                internal_nodes: rng.gen_range(2..=5),
                outdegree: rng.gen_range(1..=3),
                entrances_right: er,
                entrances_left: el,
                exits_right: 0,
                exits_left: 0,
                max_priority: 4,
            };
            DiagramTerm::Atom(format!("x{round}"), random_atom(rng, &spec).unwrap())
        };
        let term = match round % 3 {
            0 => {
                let er = rng.gen_range(1..=2);
                let el = rng.gen_range(0..=1);
                atom(&mut rng, er, el)
            }
            1 => {
                let er_left = rng.gen_range(1..=2);
                let er_right = rng.gen_range(0..=1);
                let el_right = rng.gen_range(0..=1);
                DiagramTerm::Sum(
                    Box::new(atom(&mut rng, er_left, 0)),
                    Box::new(atom(&mut rng, er_right, el_right)),
                )
            }
            // An exit-free left factor has type (er, 0) -> (0, 0), so any
            // closed right factor composes with it.
            _ => {
                let er = rng.gen_range(1..=2);
                DiagramTerm::Seq(
                    Box::new(atom(&mut rng, er, 0)),
                    Box::new(atom(&mut rng, 0, 0)),
                )
            }
        };
        let flat = operational_semantics(&term).unwrap();
        let cache = FrontCache::new();
        let fronts =
            solve_diagram(&term, &cache, &SolveOptions::default(), &SolveStats::new()).unwrap();
        for (entrance, node) in flat.entrances() {
            let class = classify_entrance(&fronts[&entrance]).unwrap();
            let won = is_winning(flat.game(), node).unwrap();
            match class {
                Classification::Winning => assert!(won, "round {round} {entrance}"),
                Classification::Losing => assert!(!won, "round {round} {entrance}"),
                Classification::Pending => {
                    panic!("round {round} {entrance}: exit-free diagrams cannot be pending")
                }
            }
            checked += 1;
        }
    }
    assert!(checked > 60);
}

#[test]
fn acceptance_07_query_count_shape() {
    for m in [2u32, 4] {
        for n in 0usize..=3 {
            let mut owners = vec![Owner::Exists, Owner::Forall];
            let mut edges = vec![Edge {
                from: 0,
                to: 1,
                priority: 0,
            }];
            if n == 0 {
                edges.push(Edge {
                    from: 1,
                    to: 1,
                    priority: 1,
                });
            }
            for exit in 0..n {
                owners.push(Owner::Exists);
                edges.push(Edge {
                    from: 1,
                    to: 2 + exit,
                    priority: m.min(exit as u32 + 1),
                });
                edges.push(Edge {
                    from: 2 + exit,
                    to: 2 + exit,
                    priority: 0,
                });
            }
            let interface = Interface {
                entrances_right: vec![0],
                entrances_left: vec![],
                exits_right: (2..2 + n).collect(),
                exits_left: vec![],
            };
            let game =
                OpenParityGame::new(ParityGame::new(owners, edges, space(m)).unwrap(), interface)
                    .unwrap();

            let stats = SolveStats::new();
            solve_pareto_front(
                &game,
                EntranceRef::right(1),
                &SolveOptions {
                    pruning: false,
                    jobs: 1,
                },
                &stats,
            )
            .unwrap();
            let want = (u64::from(m) + 2).pow(n as u32);
            assert_eq!(stats.queries(), want, "M={m} N={n}");
        }
    }
}

fn all_queries(n: usize, sp: PrioritySpace) -> Vec<Query> {
    let options = answers_ascending(&sp);
    let mut rows: Vec<Vec<Option<Priority>>> = vec![Vec::new()];
    for _ in 0..n {
        rows = rows
            .into_iter()
            .flat_map(|row| {
                options.iter().map(move |o| {
                    let mut next = row.clone();
                    next.push(*o);
                    next
                })
            })
            .collect();
    }
    rows.into_iter().map(Query::new).collect()
}

#[test]
fn acceptance_08_order_laws() {
    let start = Instant::now();

    // max is monotone in each argument under the sub-priority order.
    for m1 in 0..=10u32 {
        for m2 in 0..=10u32 {
            if cmp_subpriority(m1, m2) == std::cmp::Ordering::Greater {
                continue;
            }
            for m3 in 0..=10u32 {
                let left = max_priority(m1, m3);
                let right = max_priority(m2, m3);
                assert_ne!(
                    cmp_subpriority(left, right),
                    std::cmp::Ordering::Greater,
                    "max({m1},{m3}) vs max({m2},{m3})"
                );
            }
        }
    }

    // max(m, m') is even exactly when dual(m) is below m'.
    for m in 0..=10u32 {
        for m_prime in 0..=10u32 {
            let even = max_priority(m, m_prime) % 2 == 0;
            let below = cmp_subpriority(dual_priority(m), m_prime) != std::cmp::Ordering::Greater;
            assert_eq!(even, below, "m={m} m'={m_prime}");
        }
    }

    // Taking duals swaps query order and result order, and is injective.
    for n in 0..=2usize {
        let exits: Vec<ExitRef> = (1..=n).map(ExitRef::right).collect();
        for m in [2u32, 4, 6, 8, 10] {
            let sp = space(m);
            let queries = all_queries(n, sp);
            let duals: Vec<ResultSet> = queries.iter().map(|q| dual_query(q, &exits)).collect();
            for (i, q) in queries.iter().enumerate() {
                for (j, q_prime) in queries.iter().enumerate() {
                    assert_eq!((q == q_prime), (duals[i] == duals[j]), "M={m} N={n}");
                    assert_eq!(
                        leq_query(q, q_prime).unwrap(),
                        leq_upper(&duals[j], &duals[i]),
                        "M={m} N={n} q={q} q'={q_prime}"
                    );
                }
            }
        }
    }

    // The result order is antisymmetric.
    let mut rng = ChaCha8Rng::seed_from_u64(0xAB5D);
    let pool: Vec<DomainElement> = {
        let mut pool = vec![DomainElement::Bot, DomainElement::Top];
        for exit in [ExitRef::right(1), ExitRef::right(2), ExitRef::left(1)] {
            for m in 0..=4u32 {
                pool.push(DomainElement::ExitAt(exit, m));
            }
        }
        pool
    };
    let random_set = |rng: &mut ChaCha8Rng| {
        let k = rng.gen_range(1..=3);
        let elems: Vec<DomainElement> =
            (0..k).map(|_| pool[rng.gen_range(0..pool.len())]).collect();
        minimal_elements(elems).unwrap()
    };
    for _ in 0..10_000 {
        let r1 = random_set(&mut rng);
        let r2 = random_set(&mut rng);
        if leq_upper(&r1, &r2) && leq_upper(&r2, &r1) {
            assert_eq!(r1, r2);
        }
    }

    assert!(start.elapsed() < Duration::from_secs(60));
}

#[test]
fn acceptance_09_pruning_transparency() {
    let corpus = oracle_corpus(300, 0xC0FFEE);
    for (index, game) in corpus.iter().enumerate() {
        let plain = solve_pareto_fronts(
            game,
            &SolveOptions {
                pruning: false,
                jobs: 1,
            },
            &SolveStats::new(),
        )
        .unwrap();
        let pruned_stats = SolveStats::new();
        let pruned = solve_pareto_fronts(
            game,
            &SolveOptions {
                pruning: true,
                jobs: 1,
            },
            &pruned_stats,
        )
        .unwrap();
        assert_eq!(plain, pruned, "game {index}");
    }
}
