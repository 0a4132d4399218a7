//! Solver for open parity games and string diagrams built from them.
//!
//! An open parity game is a parity game with edge priorities plus an
//! interface of entrance and exit nodes. Instead of a plain winner per node,
//! every entrance gets a Pareto front: the trade-offs the existential player
//! can guarantee between winning outright, losing, and leaving through an
//! exit with a bounded worst priority on the way. Fronts are computed by
//! reducing each query about the environment to a closed parity game, and
//! diagrams of games are solved compositionally by replacing solved parts
//! with small "shortcut" games that have the same fronts.

pub mod diagram;
pub mod dot;
pub mod driver;
pub mod dsl;
pub mod generate;
pub mod opg;
pub mod oracle;
pub mod orders;
pub mod report;
pub mod solver;

pub use diagram::{
    operational_semantics, seq_compose, shortcut, solve_diagram, sum_compose, type_of,
    DiagramError, DiagramTerm, FrontCache, Fronts, InterfaceType,
};
pub use dot::emit_dot;
pub use driver::{render_dot, run_solve, validate_file, DriverError, RunOptions};
pub use dsl::{parse_source, DiagramDef, DslError, Endpoint, OpgDef, SourceFile, TermAst};
pub use generate::{generate_random, random_atom, AtomSpec, GenError, RandSpec};
pub use opg::{
    classify_entrance, front_of, loop_construction, solve_pareto_front, solve_pareto_fronts,
    Classification, EntranceRef, Interface, OpenParityGame, OpgError, ParetoFront, SolveOptions,
    SolveStats, Violation,
};
pub use oracle::{
    brute_force_pareto, enumerate_positional_strategies, strategy_count, OracleError,
    DEFAULT_ORACLE_BOUND,
};
pub use orders::{
    cmp_domain, cmp_query, cmp_subpriority, dual_priority, dual_query, leq_lower, leq_upper,
    max_priority, maximal_results, minimal_elements, query_from_result, Direction, DomainElement,
    ExitRef, OrderError, Priority, PrioritySpace, Query, ResultSet,
};
pub use report::{EntranceReport, Mode, RunStats, SolveReport};
pub use solver::{
    evaluate_play, is_winning, solve_game, solve_zielonka, split_edges, Edge, GameError, NodeId,
    NodeParityGame, Owner, ParityGame, PositionalStrategy, SplitGame, WinningRegions,
};
