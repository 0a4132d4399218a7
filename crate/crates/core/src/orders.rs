//! Priorities, play outcomes, result sets, queries, and the orders on them.
//!
//! Everything downstream leans on four orders defined here:
//!
//! * the sub-priority order on priorities,
//!   `M-1 < M-3 < ... < 1 < 0 < 2 < ... < M`,
//!   which ranks a maximum priority passed along a play by how good it is
//!   for the existential player (large odd: terrible, large even: great);
//! * the outcome order on play outcomes: `Bot` below everything, `Top` above
//!   everything, outcomes on the same exit compared by sub-priority, and
//!   outcomes on different exits incomparable;
//! * the upper order on result sets (antichains of outcomes), which compares
//!   what the existential player can guarantee against a hostile opponent;
//! * the pointwise order on queries, with unanswered exits at the bottom.
//!
//! Result sets and fronts are kept in a canonical sorted form so that
//! structural equality, hashing, and serialization are deterministic. The
//! canonical sort (`Ord` on [`DomainElement`]) is *not* the outcome order;
//! the outcome order is partial and lives in [`cmp_domain`].

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

/// A priority drawn from `{0, ..., M}` for some even cap `M`.
pub type Priority = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrderError {
    #[error("priority cap must be even and at least 2, got {0}")]
    BadPriorityCap(Priority),
    #[error("a result set must not be empty")]
    EmptyResultSet,
    #[error("result sets must be antichains: {0} and {1} are comparable")]
    NotAnAntichain(DomainElement, DomainElement),
    #[error("cannot take the best results of an empty family")]
    EmptyFamily,
    #[error("queries over different exit sets are incomparable ({0} vs {1} answers)")]
    QueryLengthMismatch(usize, usize),
    #[error("no query denotes a result containing {0}")]
    NoQueryPreimage(DomainElement),
    #[error("result mentions exit {0}, which the game does not have")]
    UnknownExit(ExitRef),
}

// ---------------------------------------------------------------------------
// Priority space and priority orders
// ---------------------------------------------------------------------------

/// The set of usable priorities `{0, ..., max}`, with `max` even and >= 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrioritySpace {
    max: Priority,
}

impl PrioritySpace {
    pub fn new(max: Priority) -> Result<Self, OrderError> {
        if max < 2 || max % 2 != 0 {
            return Err(OrderError::BadPriorityCap(max));
        }
        Ok(PrioritySpace { max })
    }

    /// The smallest valid space containing `max_used`.
    pub fn covering(max_used: Priority) -> Self {
        let max = max_used.max(2);
        PrioritySpace { max: max + max % 2 }
    }

    pub fn max(&self) -> Priority {
        self.max
    }

    pub fn contains(&self, p: Priority) -> bool {
        p <= self.max
    }

    pub fn join(self, other: Self) -> Self {
        PrioritySpace {
            max: self.max.max(other.max),
        }
    }

    pub fn priorities(&self) -> impl Iterator<Item = Priority> {
        0..=self.max
    }
}

/// Key realizing the sub-priority order as plain integer comparison:
/// odd priorities map to their negation, even priorities to themselves.
pub fn sub_priority_key(m: Priority) -> i64 {
    if m % 2 == 1 {
        -(m as i64)
    } else {
        m as i64
    }
}

/// Total order `M-1 < M-3 < ... < 1 < 0 < 2 < ... < M` on priorities.
pub fn cmp_subpriority(m1: Priority, m2: Priority) -> Ordering {
    sub_priority_key(m1).cmp(&sub_priority_key(m2))
}

pub fn leq_subpriority(m1: Priority, m2: Priority) -> bool {
    sub_priority_key(m1) <= sub_priority_key(m2)
}

/// The maximum of two priorities in the natural order, as accumulated along
/// a play prefix.
pub fn max_priority(m1: Priority, m2: Priority) -> Priority {
    m1.max(m2)
}

/// The least priority that turns `m` into an even maximum:
/// `max(m, m')` is even if and only if `dual_priority(m) <=` `m'` in the
/// sub-priority order. Odd `m` maps to `m + 1`, positive even `m` to
/// `m - 1`, and `0` to itself; the map is an involution.
pub fn dual_priority(m: Priority) -> Priority {
    if m % 2 == 1 {
        m + 1
    } else if m == 0 {
        0
    } else {
        m - 1
    }
}

// ---------------------------------------------------------------------------
// Exits and play outcomes
// ---------------------------------------------------------------------------

/// Which side of the interface an open end sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Rightward,
    Leftward,
}

impl Direction {
    pub fn short(self) -> char {
        match self {
            Direction::Rightward => 'r',
            Direction::Leftward => 'l',
        }
    }
}

/// An exit named by its position in the interface, not by node identity.
/// Indices are 1-based within each direction.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExitRef {
    pub direction: Direction,
    pub index: usize,
}

impl ExitRef {
    pub fn right(index: usize) -> Self {
        ExitRef {
            direction: Direction::Rightward,
            index,
        }
    }

    pub fn left(index: usize) -> Self {
        ExitRef {
            direction: Direction::Leftward,
            index,
        }
    }
}

impl fmt::Display for ExitRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "out.{}{}", self.direction.short(), self.index)
    }
}

impl fmt::Debug for ExitRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// The outcome of a single play: the existential player wins without
/// leaving (`Top`), loses without leaving (`Bot`), or leaves through an exit
/// having passed a maximum priority on the way.
///
/// The derived `Ord` is the canonical serialization order (`Bot`, then exits
/// right-to-left by index with natural priorities, then `Top`); the semantic
/// outcome order is [`cmp_domain`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DomainElement {
    Bot,
    ExitAt(ExitRef, Priority),
    Top,
}

impl fmt::Display for DomainElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainElement::Bot => write!(f, "bot"),
            DomainElement::ExitAt(o, m) => write!(f, "{}@{}", o, m),
            DomainElement::Top => write!(f, "top"),
        }
    }
}

impl fmt::Debug for DomainElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Partial outcome order: `Bot` least, `Top` greatest, same-exit outcomes by
/// sub-priority, different exits incomparable.
pub fn cmp_domain(d1: &DomainElement, d2: &DomainElement) -> Option<Ordering> {
    use DomainElement::*;
    match (d1, d2) {
        (Bot, Bot) | (Top, Top) => Some(Ordering::Equal),
        (Bot, _) => Some(Ordering::Less),
        (_, Bot) => Some(Ordering::Greater),
        (Top, _) => Some(Ordering::Greater),
        (_, Top) => Some(Ordering::Less),
        (ExitAt(o1, m1), ExitAt(o2, m2)) => (o1 == o2).then(|| cmp_subpriority(*m1, *m2)),
    }
}

pub fn leq_domain(d1: &DomainElement, d2: &DomainElement) -> bool {
    matches!(
        cmp_domain(d1, d2),
        Some(Ordering::Less) | Some(Ordering::Equal)
    )
}

// ---------------------------------------------------------------------------
// Result sets
// ---------------------------------------------------------------------------

/// A non-empty antichain of play outcomes: what the opponent can force the
/// play down to, with dominated outcomes removed. Being an antichain implies
/// at most one outcome per exit, and that `Top` or `Bot` only occur alone.
///
/// Elements are stored sorted in canonical order, so equality, hashing, and
/// the derived `Ord` are structural.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ResultSet {
    elems: Vec<DomainElement>,
}

impl ResultSet {
    /// Builds a result set, rejecting empty input and comparable pairs.
    pub fn new(elems: impl IntoIterator<Item = DomainElement>) -> Result<Self, OrderError> {
        let mut elems: Vec<DomainElement> = elems.into_iter().collect();
        elems.sort();
        elems.dedup();
        if elems.is_empty() {
            return Err(OrderError::EmptyResultSet);
        }
        for i in 0..elems.len() {
            for j in (i + 1)..elems.len() {
                if cmp_domain(&elems[i], &elems[j]).is_some() {
                    return Err(OrderError::NotAnAntichain(elems[i], elems[j]));
                }
            }
        }
        Ok(ResultSet { elems })
    }

    pub fn singleton(d: DomainElement) -> Self {
        ResultSet { elems: vec![d] }
    }

    pub fn top() -> Self {
        Self::singleton(DomainElement::Top)
    }

    pub fn bot() -> Self {
        Self::singleton(DomainElement::Bot)
    }

    pub fn elems(&self) -> &[DomainElement] {
        &self.elems
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = &DomainElement> {
        self.elems.iter()
    }

    pub fn contains(&self, d: &DomainElement) -> bool {
        self.elems.binary_search(d).is_ok()
    }

    pub fn is_top(&self) -> bool {
        self.elems == [DomainElement::Top]
    }

    pub fn is_bot(&self) -> bool {
        self.elems == [DomainElement::Bot]
    }
}

impl fmt::Display for ResultSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, d) in self.elems.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", d)?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for ResultSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// The minimal outcomes of a non-empty collection: what remains once every
/// outcome dominated from below is dropped. This is the opponent's view of a
/// set of reachable outcomes.
pub fn minimal_elements(
    elems: impl IntoIterator<Item = DomainElement>,
) -> Result<ResultSet, OrderError> {
    let mut all: Vec<DomainElement> = elems.into_iter().collect();
    all.sort();
    all.dedup();
    if all.is_empty() {
        return Err(OrderError::EmptyResultSet);
    }
    let minimal = all
        .iter()
        .copied()
        .filter(|d| {
            !all.iter()
                .any(|e| e != d && matches!(cmp_domain(e, d), Some(Ordering::Less)))
        })
        .collect::<Vec<_>>();
    Ok(ResultSet { elems: minimal })
}

/// Upper order on result sets: `t1 <= t2` when every outcome in `t2` sits
/// above some outcome in `t1`. Guaranteeing `t2` is at least as good for the
/// existential player as guaranteeing `t1`.
pub fn leq_upper(t1: &ResultSet, t2: &ResultSet) -> bool {
    t2.iter().all(|d2| t1.iter().any(|d1| leq_domain(d1, d2)))
}

/// Keeps the maximal result sets of a non-empty family, sorted canonically.
/// On antichains the upper order is antisymmetric, so "dominated by another,
/// distinct member" is an unambiguous reason to drop a set.
pub fn maximal_results(
    sets: impl IntoIterator<Item = ResultSet>,
) -> Result<Vec<ResultSet>, OrderError> {
    let mut all: Vec<ResultSet> = sets.into_iter().collect();
    all.sort();
    all.dedup();
    if all.is_empty() {
        return Err(OrderError::EmptyFamily);
    }
    let maximal = all
        .iter()
        .filter(|r| !all.iter().any(|s| s != *r && leq_upper(r, s)))
        .cloned()
        .collect::<Vec<_>>();
    Ok(maximal)
}

/// Lower order on families of result sets: `s1 <= s2` when every member of
/// `s1` is below some member of `s2` in the upper order. A partial order on
/// families that are already maximal.
pub fn leq_lower(s1: &[ResultSet], s2: &[ResultSet]) -> bool {
    s1.iter().all(|r1| s2.iter().any(|r2| leq_upper(r1, r2)))
}

// ---------------------------------------------------------------------------
// Queries
// ---------------------------------------------------------------------------

/// A query assigns to each exit either a priority (the exit answers with
/// that priority) or nothing (the exit stays silent). Answers are stored
/// densely in canonical exit order: rightward exits by index, then leftward.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Query {
    answers: Vec<Option<Priority>>,
}

impl Query {
    pub fn new(answers: Vec<Option<Priority>>) -> Self {
        Query { answers }
    }

    /// The all-silent query over `n` exits.
    pub fn blank(n: usize) -> Self {
        Query {
            answers: vec![None; n],
        }
    }

    pub fn answers(&self) -> &[Option<Priority>] {
        &self.answers
    }

    pub fn len(&self) -> usize {
        self.answers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.answers.is_empty()
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, a) in self.answers.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            match a {
                Some(m) => write!(f, "{}", m)?,
                None => write!(f, "_")?,
            }
        }
        write!(f, "]")
    }
}

impl fmt::Debug for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Total order on single answers: silence below everything, then priorities
/// by sub-priority.
fn cmp_answer(a: Option<Priority>, b: Option<Priority>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some(x), Some(y)) => cmp_subpriority(x, y),
    }
}

/// Pointwise order on queries over the same exit set.
pub fn cmp_query(q1: &Query, q2: &Query) -> Result<Option<Ordering>, OrderError> {
    if q1.len() != q2.len() {
        return Err(OrderError::QueryLengthMismatch(q1.len(), q2.len()));
    }
    let mut le = true;
    let mut ge = true;
    for (&a, &b) in q1.answers.iter().zip(&q2.answers) {
        match cmp_answer(a, b) {
            Ordering::Less => ge = false,
            Ordering::Greater => le = false,
            Ordering::Equal => {}
        }
    }
    Ok(match (le, ge) {
        (true, true) => Some(Ordering::Equal),
        (true, false) => Some(Ordering::Less),
        (false, true) => Some(Ordering::Greater),
        (false, false) => None,
    })
}

pub fn leq_query(q1: &Query, q2: &Query) -> Result<bool, OrderError> {
    Ok(matches!(
        cmp_query(q1, q2)?,
        Some(Ordering::Less) | Some(Ordering::Equal)
    ))
}

/// The result a query denotes: the all-silent query denotes `{Top}`, any
/// other query denotes its answered exits tagged with dual priorities.
/// Reverses the query order: a larger query denotes a smaller result.
pub fn dual_query(q: &Query, exits: &[ExitRef]) -> ResultSet {
    debug_assert_eq!(q.len(), exits.len());
    if q.answers.iter().all(Option::is_none) {
        return ResultSet::top();
    }
    let elems = q
        .answers
        .iter()
        .zip(exits)
        .filter_map(|(&a, &o)| a.map(|m| DomainElement::ExitAt(o, dual_priority(m))))
        .collect::<Vec<_>>();
    ResultSet::new(elems).expect("one outcome per answered exit is an antichain")
}

/// The unique query denoting `r`. Defined for every result except those
/// containing `Bot`; inverse of [`dual_query`] because the priority dual is
/// an involution.
pub fn query_from_result(r: &ResultSet, exits: &[ExitRef]) -> Result<Query, OrderError> {
    if r.is_top() {
        return Ok(Query::blank(exits.len()));
    }
    let mut answers = vec![None; exits.len()];
    for d in r.iter() {
        match d {
            DomainElement::ExitAt(o, m) => {
                let pos = exits
                    .iter()
                    .position(|e| e == o)
                    .ok_or(OrderError::UnknownExit(*o))?;
                answers[pos] = Some(dual_priority(*m));
            }
            other => return Err(OrderError::NoQueryPreimage(*other)),
        }
    }
    Ok(Query::new(answers))
}

/// All possible answers for one exit, ascending: silence first, then
/// priorities from worst to best in the sub-priority order.
pub fn answers_ascending(space: &PrioritySpace) -> Vec<Option<Priority>> {
    let mut prios: Vec<Priority> = space.priorities().collect();
    prios.sort_by(|a, b| cmp_subpriority(*a, *b));
    std::iter::once(None)
        .chain(prios.into_iter().map(Some))
        .collect()
}
