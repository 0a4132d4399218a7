//! Seeded random generation of games and diagrams.
//!
//! Generation is deterministic: the same spec and seed always produce the
//! same source file, and printing that file yields identical bytes.

use rand::prelude::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagram::{type_of, DiagramTerm, InterfaceType};
use crate::dsl::{parse_source, SourceFile};
use crate::opg::{Interface, OpenParityGame};
use crate::orders::{Priority, PrioritySpace};
use crate::solver::{Edge, Owner, ParityGame};

#[derive(Debug, thiserror::Error)]
pub enum GenError {
    #[error("unsatisfiable spec: {0}")]
    Unsatisfiable(String),
}

/// Shape of one random atomic game.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AtomSpec {
    pub internal_nodes: usize,
    /// Largest number of outgoing edges per non-exit node, at least 1.
    pub outdegree: usize,
    pub entrances_right: usize,
    pub entrances_left: usize,
    pub exits_right: usize,
    pub exits_left: usize,
    pub max_priority: Priority,
}

impl AtomSpec {
    fn check(&self) -> Result<(), GenError> {
        if self.outdegree == 0 {
            return Err(GenError::Unsatisfiable(
                "outdegree must be at least 1".into(),
            ));
        }
        if self.max_priority % 2 != 0 || self.max_priority < 2 {
            return Err(GenError::Unsatisfiable(
                "max_priority must be even and at least 2".into(),
            ));
        }
        let entrances = self.entrances_right + self.entrances_left;
        let targets = self.internal_nodes + self.exits_right + self.exits_left;
        if entrances > 0 && targets == 0 {
            return Err(GenError::Unsatisfiable(
                "entrances need at least one internal node or exit to point at".into(),
            ));
        }
        Ok(())
    }
}

/// Draws a random atomic open parity game.
///
/// Entrances never receive incoming edges and exits never source anything
/// but their zero self-loop, so the result always passes the atomic
/// validity check.
pub fn random_atom(rng: &mut impl Rng, spec: &AtomSpec) -> Result<OpenParityGame, GenError> {
    spec.check()?;
    let a = spec.entrances_right;
    let d = spec.entrances_left;
    let c = spec.exits_right;
    let b = spec.exits_left;
    let num_interface = a + d + c + b;
    let n = num_interface + spec.internal_nodes;

    let interface = Interface {
        entrances_right: (0..a).collect(),
        entrances_left: (a..a + d).collect(),
        exits_right: (a + d..a + d + c).collect(),
        exits_left: (a + d + c..num_interface).collect(),
    };

    let mut owners = vec![Owner::Exists; num_interface];
    for _ in 0..spec.internal_nodes {
        owners.push(if rng.gen_bool(0.5) {
            Owner::Forall
        } else {
            Owner::Exists
        });
    }

    // Legal targets: internal nodes and exits. Entrances stay unreferenced.
    let mut pool: Vec<usize> = (a + d..n).collect();
    let mut edges = Vec::new();
    let sources = (0..a + d).chain(num_interface..n);
    for from in sources {
        let k = rng.gen_range(1..=spec.outdegree.min(pool.len()));
        pool.shuffle(rng);
        for &to in pool.iter().take(k) {
            edges.push(Edge {
                from,
                to,
                priority: rng.gen_range(0..=spec.max_priority),
            });
        }
    }
    for &x in interface.exits_right.iter().chain(&interface.exits_left) {
        edges.push(Edge {
            from: x,
            to: x,
            priority: 0,
        });
    }

    let space = PrioritySpace::new(spec.max_priority).expect("cap checked above");
    let game = ParityGame::new(owners, edges, space).expect("every node was given a successor");
    Ok(OpenParityGame::new(game, interface).expect("interface ids are in range"))
}

/// Shape of one random diagram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandSpec {
    /// Internal nodes per atom.
    pub atom_nodes: usize,
    /// Largest outdegree per non-exit node.
    pub outdegree: usize,
    /// Largest interface arity per side.
    pub arity: usize,
    pub max_priority: Priority,
    /// Depth of the composition tree; 0 is a single atom.
    pub depth: usize,
    /// Chance that a leaf reuses an already generated atom of fitting type.
    pub duplicate_rate: f64,
    pub seed: u64,
}

impl RandSpec {
    fn check(&self) -> Result<(), GenError> {
        if !(0.0..=1.0).contains(&self.duplicate_rate) {
            return Err(GenError::Unsatisfiable(
                "duplicate_rate must lie in [0, 1]".into(),
            ));
        }
        if self.atom_nodes == 0 && self.arity > 0 {
            return Err(GenError::Unsatisfiable(
                "atoms without internal nodes cannot host an interface reliably".into(),
            ));
        }
        AtomSpec {
            internal_nodes: self.atom_nodes.max(1),
            outdegree: self.outdegree,
            entrances_right: 0,
            entrances_left: 0,
            exits_right: 0,
            exits_left: 0,
            max_priority: self.max_priority,
        }
        .check()
    }
}

struct Gen<'a> {
    rng: ChaCha8Rng,
    spec: &'a RandSpec,
    atoms: Vec<(String, OpenParityGame, InterfaceType)>,
}

impl Gen<'_> {
    fn leaf(&mut self, want_dom: Option<(usize, usize)>) -> DiagramTerm {
        if self.rng.gen_bool(self.spec.duplicate_rate) {
            let fits: Vec<usize> = self
                .atoms
                .iter()
                .enumerate()
                .filter(|(_, (_, _, ty))| want_dom.map_or(true, |d| ty.dom == d))
                .map(|(i, _)| i)
                .collect();
            if let Some(&i) = fits.as_slice().choose(&mut self.rng) {
                let (name, game, _) = &self.atoms[i];
                return DiagramTerm::Atom(name.clone(), game.clone());
            }
        }
        let (er, xl) = want_dom.unwrap_or_else(|| {
            (
                self.rng.gen_range(0..=self.spec.arity),
                self.rng.gen_range(0..=self.spec.arity),
            )
        });
        let atom_spec = AtomSpec {
            internal_nodes: self.spec.atom_nodes,
            outdegree: self.spec.outdegree,
            entrances_right: er,
            entrances_left: self.rng.gen_range(0..=self.spec.arity),
            exits_right: self.rng.gen_range(0..=self.spec.arity),
            exits_left: xl,
            max_priority: self.spec.max_priority,
        };
        let game = random_atom(&mut self.rng, &atom_spec).expect("spec was validated up front");
        let name = format!("a{}", self.atoms.len());
        let ty = InterfaceType::of(&game);
        self.atoms.push((name.clone(), game.clone(), ty));
        DiagramTerm::Atom(name, game)
    }

    fn term(&mut self, depth: usize, want_dom: Option<(usize, usize)>) -> DiagramTerm {
        if depth == 0 {
            return self.leaf(want_dom);
        }
        if self.rng.gen_bool(0.5) {
            let left = self.term(depth - 1, want_dom);
            let mid = type_of(&left).expect("generated terms type-check").cod;
            let right = self.term(depth - 1, Some(mid));
            DiagramTerm::Seq(Box::new(left), Box::new(right))
        } else {
            let split = want_dom.map(|(er, xl)| {
                let er_l = self.rng.gen_range(0..=er);
                let xl_l = self.rng.gen_range(0..=xl);
                ((er_l, xl_l), (er - er_l, xl - xl_l))
            });
            let left = self.term(depth - 1, split.map(|(l, _)| l));
            let right = self.term(depth - 1, split.map(|(_, r)| r));
            DiagramTerm::Sum(Box::new(left), Box::new(right))
        }
    }
}

/// Generates a source file with the atoms it draws and one diagram named
/// `main`. The same spec always yields the same file.
pub fn generate_random(spec: &RandSpec) -> Result<SourceFile, GenError> {
    spec.check()?;
    let mut gen = Gen {
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
        spec,
        atoms: Vec::new(),
    };
    let term = gen.term(spec.depth, None);

    let mut text = String::new();
    for (name, game, _) in &gen.atoms {
        text.push_str(&render_atom(name, game));
        text.push('\n');
    }
    text.push_str(&format!("diagram main = {};\n", render_term(&term)));
    let file = parse_source(&text).expect("generated source is well formed");
    Ok(file)
}

/// Writes an atom back as source. Assumes the interface-first node layout
/// used by `random_atom`, which matches the parser's.
fn render_atom(name: &str, game: &OpenParityGame) -> String {
    let interface = game.interface();
    let a = interface.entrances_right.len();
    let d = interface.entrances_left.len();
    let c = interface.exits_right.len();
    let b = interface.exits_left.len();
    let num_interface = a + d + c + b;
    debug_assert!(interface
        .entrances_right
        .iter()
        .chain(&interface.entrances_left)
        .chain(&interface.exits_right)
        .chain(&interface.exits_left)
        .copied()
        .eq(0..num_interface));

    let label = |id: usize| -> String {
        if id < a {
            format!("in.r{}", id + 1)
        } else if id < a + d {
            format!("in.l{}", id - a + 1)
        } else if id < a + d + c {
            format!("out.r{}", id - a - d + 1)
        } else if id < num_interface {
            format!("out.l{}", id - a - d - c + 1)
        } else {
            format!("n{}", id - num_interface)
        }
    };

    let mut out = format!("opg {name} : ({a},{b}) -> ({c},{d}) {{\n");
    out.push_str(&format!("  maxprio {};\n", game.game().space().max()));
    for id in num_interface..game.game().num_nodes() {
        let tag = match game.game().owner(id) {
            Owner::Exists => 'E',
            Owner::Forall => 'A',
        };
        out.push_str(&format!("  node {} {tag};\n", label(id)));
    }
    for edge in game.game().edges() {
        if id_is_exit(edge.from, a + d, num_interface) {
            continue;
        }
        out.push_str(&format!(
            "  {} -> {} @ {};\n",
            label(edge.from),
            label(edge.to),
            edge.priority
        ));
    }
    out.push_str("}\n");
    out
}

fn id_is_exit(id: usize, exits_start: usize, exits_end: usize) -> bool {
    (exits_start..exits_end).contains(&id)
}

fn render_term(t: &DiagramTerm) -> String {
    fn go(t: &DiagramTerm, parent: u8, right: bool) -> String {
        let (prec, body) = match t {
            DiagramTerm::Atom(name, _) => (3, name.clone()),
            DiagramTerm::Sum(l, r) => (2, format!("{} + {}", go(l, 2, false), go(r, 2, true))),
            DiagramTerm::Seq(l, r) => (1, format!("{} ; {}", go(l, 1, false), go(r, 1, true))),
        };
        if prec < parent || (prec == parent && right && prec < 3) {
            format!("({body})")
        } else {
            body
        }
    }
    go(t, 0, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::operational_semantics;

    fn small_spec(seed: u64) -> RandSpec {
        RandSpec {
            atom_nodes: 4,
            outdegree: 3,
            arity: 2,
            max_priority: 4,
            depth: 2,
            duplicate_rate: 0.3,
            seed,
        }
    }

    #[test]
    fn atoms_pass_the_atomic_validity_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for i in 0..50 {
            let spec = AtomSpec {
                internal_nodes: 1 + (i % 7),
                outdegree: 1 + (i % 3),
                entrances_right: i % 3,
                entrances_left: (i / 3) % 2,
                exits_right: i % 2,
                exits_left: (i / 2) % 3,
                max_priority: 4,
            };
            let game = random_atom(&mut rng, &spec).unwrap();
            assert!(game.validate(true).is_empty(), "spec {spec:?}");
            assert_eq!(game.dom(), (spec.entrances_right, spec.exits_left));
            assert_eq!(game.cod(), (spec.exits_right, spec.entrances_left));
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let a = generate_random(&small_spec(42)).unwrap();
        let b = generate_random(&small_spec(42)).unwrap();
        assert_eq!(a.print(), b.print());
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_usually_differ() {
        let texts: Vec<String> = (0..8)
            .map(|s| generate_random(&small_spec(s)).unwrap().print())
            .collect();
        let distinct: std::collections::BTreeSet<&String> = texts.iter().collect();
        assert!(distinct.len() > 1);
    }

    #[test]
    fn generated_diagrams_flatten() {
        for seed in 0..10 {
            let file = generate_random(&small_spec(seed)).unwrap();
            let diagram = file.diagram("main").unwrap();
            let flat = operational_semantics(&diagram.term).unwrap();
            assert!(flat.validate(false).is_empty(), "seed {seed}");
        }
    }

    #[test]
    fn depth_zero_is_a_single_atom() {
        let mut spec = small_spec(3);
        spec.depth = 0;
        let file = generate_random(&spec).unwrap();
        assert_eq!(file.opgs.len(), 1);
        assert!(matches!(
            file.diagram("main").unwrap().term,
            DiagramTerm::Atom(_, _)
        ));
    }

    #[test]
    fn duplicates_reuse_atoms() {
        let spec = RandSpec {
            atom_nodes: 3,
            outdegree: 2,
            arity: 1,
            max_priority: 2,
            depth: 4,
            duplicate_rate: 1.0,
            seed: 11,
        };
        let file = generate_random(&spec).unwrap();
        let mut refs = 0usize;
        fn count(t: &crate::dsl::TermAst, refs: &mut usize) {
            match t {
                crate::dsl::TermAst::Ref(_) => *refs += 1,
                crate::dsl::TermAst::Seq(l, r) | crate::dsl::TermAst::Sum(l, r) => {
                    count(l, refs);
                    count(r, refs);
                }
            }
        }
        count(&file.diagram("main").unwrap().term_ast, &mut refs);
        assert!(
            file.opgs.len() < refs,
            "{} atoms for {refs} leaves",
            file.opgs.len()
        );
    }

    #[test]
    fn bad_specs_are_rejected() {
        let mut spec = small_spec(0);
        spec.outdegree = 0;
        assert!(generate_random(&spec).is_err());

        let mut spec = small_spec(0);
        spec.max_priority = 3;
        assert!(generate_random(&spec).is_err());

        let mut spec = small_spec(0);
        spec.duplicate_rate = 1.5;
        assert!(generate_random(&spec).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let hopeless = AtomSpec {
            internal_nodes: 0,
            outdegree: 2,
            entrances_right: 1,
            entrances_left: 0,
            exits_right: 0,
            exits_left: 0,
            max_priority: 4,
        };
        assert!(random_atom(&mut rng, &hopeless).is_err());
    }
}
