//! Constraint-satisfaction primitives: partial assignments, the tri-valued
//! predicate/heuristic interface, k-SAT instances, random instance generation
//! and DIMACS ingestion.

use crate::error::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// Verdict of the tri-valued predicate.
///
/// `False` is monotone under extension: once an assignment is ruled out, every
/// extension of it is ruled out as well. Complete assignments are never
/// `Indeterminate`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PredicateVerdict {
    True,
    False,
    Indeterminate,
}

/// A partial assignment over `n` variables: an ordered list of
/// `(index, value)` pairs with distinct indices in `1..=n`.
///
/// The empty list stands for the fully unassigned state.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartialAssignment {
    n: usize,
    pairs: Vec<(usize, u8)>,
}

impl PartialAssignment {
    /// The fully unassigned state over `n` variables.
    pub fn empty(n: usize) -> Self {
        PartialAssignment {
            n,
            pairs: Vec::new(),
        }
    }

    /// Build from explicit pairs, validating the invariants.
    pub fn from_pairs(n: usize, pairs: Vec<(usize, u8)>) -> Result<Self> {
        if pairs.len() > n {
            return Err(Error::Input(format!(
                "assignment has {} pairs but only {} variables",
                pairs.len(),
                n
            )));
        }
        let mut seen = vec![false; n + 1];
        for &(i, _) in &pairs {
            if i == 0 || i > n {
                return Err(Error::Input(format!(
                    "variable index {i} out of range 1..={n}"
                )));
            }
            if seen[i] {
                return Err(Error::Input(format!("variable index {i} assigned twice")));
            }
            seen[i] = true;
        }
        Ok(PartialAssignment { n, pairs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &[(usize, u8)] {
        &self.pairs
    }

    /// Number of assigned variables.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.pairs.len() == self.n
    }

    /// Value assigned to variable `index`, if any.
    pub fn value(&self, index: usize) -> Option<u8> {
        self.pairs
            .iter()
            .find(|&&(i, _)| i == index)
            .map(|&(_, v)| v)
    }

    /// Extension of this assignment by one more `(index, value)` pair.
    pub fn child(&self, index: usize, value: u8) -> Result<Self> {
        if index == 0 || index > self.n {
            return Err(Error::Input(format!(
                "variable index {index} out of range 1..={}",
                self.n
            )));
        }
        if self.value(index).is_some() {
            return Err(Error::Input(format!(
                "variable index {index} already assigned"
            )));
        }
        let mut pairs = self.pairs.clone();
        pairs.push((index, value));
        Ok(PartialAssignment { n: self.n, pairs })
    }

    /// Dense lookup table indexed by variable (slot 0 unused).
    pub fn dense(&self) -> Vec<Option<u8>> {
        let mut values = vec![None; self.n + 1];
        for &(i, v) in &self.pairs {
            values[i] = Some(v);
        }
        values
    }
}

/// Tri-valued predicate over partial assignments.
pub trait Predicate {
    /// Number of variables.
    fn variable_count(&self) -> usize;
    /// Size of each variable's domain.
    fn domain_size(&self) -> usize;
    /// Evaluate the predicate on a partial assignment.
    fn evaluate(&self, x: &PartialAssignment) -> Result<PredicateVerdict>;

    /// Whether `x` is a complete satisfying assignment. These are the leaves
    /// reported as solutions by the backtracking engine.
    fn is_solution(&self, x: &PartialAssignment) -> Result<bool> {
        Ok(x.is_complete() && self.evaluate(x)? == PredicateVerdict::True)
    }
}

/// Branching heuristic: chooses the next variable to assign.
///
/// Implementations other than [`NaiveHeuristic`] (for example a unit-clause
/// rule) can be plugged in through this trait.
pub trait Heuristic {
    fn next_variable(&self, x: &PartialAssignment) -> Result<usize>;
}

/// Branches on the lowest-index unassigned variable.
#[derive(Clone, Copy, Debug, Default)]
pub struct NaiveHeuristic;

impl Heuristic for NaiveHeuristic {
    fn next_variable(&self, x: &PartialAssignment) -> Result<usize> {
        if x.is_complete() {
            return Err(Error::Input(
                "heuristic queried on a complete assignment".into(),
            ));
        }
        let values = x.dense();
        match values.iter().enumerate().skip(1).find(|(_, v)| v.is_none()) {
            Some((i, _)) => Ok(i),
            None => unreachable!("incomplete assignment must have an unassigned variable"),
        }
    }
}

/// Named, seedable pseudorandom generator specification. Identical
/// `(seed, algorithm_id)` pairs reproduce identical streams bit for bit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSpec {
    pub seed: u64,
    pub algorithm_id: String,
}

pub const RNG_ALGORITHM_CHACHA12: &str = "chacha12";

impl RngSpec {
    pub fn new(seed: u64) -> Self {
        RngSpec {
            seed,
            algorithm_id: RNG_ALGORITHM_CHACHA12.into(),
        }
    }

    /// Instantiate the generator.
    pub fn build(&self) -> Result<ChaCha12Rng> {
        if self.algorithm_id != RNG_ALGORITHM_CHACHA12 {
            return Err(Error::Input(format!(
                "unknown rng algorithm '{}', expected '{RNG_ALGORITHM_CHACHA12}'",
                self.algorithm_id
            )));
        }
        Ok(ChaCha12Rng::seed_from_u64(self.seed))
    }

    /// Independent stream derived from the same seed. Streams with distinct
    /// salts never overlap, so parallel trials stay reproducible.
    pub fn stream(&self, salt: u64) -> Result<ChaCha12Rng> {
        let mut rng = self.build()?;
        rng.set_stream(salt);
        Ok(rng)
    }
}

impl Default for RngSpec {
    fn default() -> Self {
        RngSpec::new(0)
    }
}

/// A k-SAT instance: `m` clauses of exactly `k` distinct variables each, over
/// the boolean domain. Literals are signed 1-based indices; clauses are kept
/// sorted by variable index with signs preserved.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KSatInstance {
    n: usize,
    k: usize,
    clauses: Vec<Vec<i32>>,
}

impl KSatInstance {
    pub fn new(n: usize, k: usize, clauses: Vec<Vec<i32>>) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::Input(format!(
                "clause width k={k} out of range 1..={n}"
            )));
        }
        let mut canonical = Vec::with_capacity(clauses.len());
        for clause in clauses {
            canonical.push(canonical_clause(n, k, clause)?);
        }
        Ok(KSatInstance {
            n,
            k,
            clauses: canonical,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    /// DIMACS CNF rendering.
    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.n, self.clauses.len());
        for clause in &self.clauses {
            for lit in clause {
                out.push_str(&lit.to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }
}

fn canonical_clause(n: usize, k: usize, mut clause: Vec<i32>) -> Result<Vec<i32>> {
    if clause.len() != k {
        return Err(Error::Input(format!(
            "clause width {} does not match k={k}",
            clause.len()
        )));
    }
    for &lit in &clause {
        let var = lit.unsigned_abs() as usize;
        if lit == 0 || var > n {
            return Err(Error::Input(format!(
                "literal {lit} out of range for n={n}"
            )));
        }
    }
    clause.sort_by_key(|lit| lit.unsigned_abs());
    for pair in clause.windows(2) {
        if pair[0].unsigned_abs() == pair[1].unsigned_abs() {
            return Err(Error::Input(format!(
                "duplicate variable {} in clause",
                pair[0].unsigned_abs()
            )));
        }
    }
    Ok(clause)
}

impl Predicate for KSatInstance {
    fn variable_count(&self) -> usize {
        self.n
    }

    fn domain_size(&self) -> usize {
        2
    }

    /// `False` iff some clause has all its literals assigned and falsified;
    /// `True` iff every clause contains at least one satisfied literal;
    /// `Indeterminate` otherwise.
    fn evaluate(&self, x: &PartialAssignment) -> Result<PredicateVerdict> {
        if x.n() != self.n {
            return Err(Error::Input(format!(
                "assignment over {} variables evaluated against instance with n={}",
                x.n(),
                self.n
            )));
        }
        let values = x.dense();
        let mut all_satisfied = true;
        for clause in &self.clauses {
            let mut satisfied = false;
            let mut fully_assigned = true;
            for &lit in clause {
                let var = lit.unsigned_abs() as usize;
                match values[var] {
                    Some(v) => {
                        if (v == 1) == (lit > 0) {
                            satisfied = true;
                            break;
                        }
                    }
                    None => fully_assigned = false,
                }
            }
            if satisfied {
                continue;
            }
            if fully_assigned {
                return Ok(PredicateVerdict::False);
            }
            all_satisfied = false;
        }
        if all_satisfied {
            Ok(PredicateVerdict::True)
        } else {
            Ok(PredicateVerdict::Indeterminate)
        }
    }
}

/// Draw `m` clauses i.i.d. uniform (with replacement) over the
/// `2^k * C(n, k)` clauses with `k` distinct variables and arbitrary signs.
pub fn random_ksat(n: usize, k: usize, m: usize, rng_spec: &RngSpec) -> Result<KSatInstance> {
    if k == 0 || k > n {
        return Err(Error::Input(format!(
            "clause width k={k} out of range 1..={n}"
        )));
    }
    let mut rng = rng_spec.build()?;
    let mut clauses = Vec::with_capacity(m);
    for _ in 0..m {
        clauses.push(random_clause(n, k, &mut rng));
    }
    KSatInstance::new(n, k, clauses)
}

pub(crate) fn random_clause<R: rand::Rng>(n: usize, k: usize, rng: &mut R) -> Vec<i32> {
    let vars = rand::seq::index::sample(rng, n, k);
    let mut clause: Vec<i32> = vars
        .iter()
        .map(|v| {
            let var = (v + 1) as i32;
            if rng.random::<bool>() {
                var
            } else {
                -var
            }
        })
        .collect();
    clause.sort_by_key(|lit| lit.unsigned_abs());
    clause
}

/// Expected number of satisfying assignments of the random model:
/// `2^n (1 - 2^-k)^m`.
pub fn expected_solution_count(n: usize, k: usize, m: usize) -> f64 {
    let per_clause = 1.0 - 0.5f64.powi(k as i32);
    (n as f64 + m as f64 * per_clause.log2()).exp2()
}

/// Parse DIMACS CNF text into an instance. All clauses must share one width;
/// mixed widths, duplicate variables inside a clause and out-of-range literals
/// are rejected with a diagnostic.
pub fn parse_dimacs(text: &str) -> Result<KSatInstance> {
    let mut n: Option<usize> = None;
    let mut declared_m: Option<usize> = None;
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    let mut current: Vec<i32> = Vec::new();

    'lines: for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line == "%" {
            // SATLIB trailer
            break;
        }
        if let Some(rest) = line.strip_prefix('p') {
            if n.is_some() {
                return Err(Error::Parse(format!(
                    "line {}: repeated problem line",
                    lineno + 1
                )));
            }
            let fields: Vec<&str> = rest.split_whitespace().collect();
            if fields.len() != 3 || fields[0] != "cnf" {
                return Err(Error::Parse(format!(
                    "line {}: expected 'p cnf <vars> <clauses>'",
                    lineno + 1
                )));
            }
            let vars = fields[1].parse::<usize>().map_err(|e| {
                Error::Parse(format!("line {}: bad variable count: {e}", lineno + 1))
            })?;
            let count = fields[2]
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("line {}: bad clause count: {e}", lineno + 1)))?;
            n = Some(vars);
            declared_m = Some(count);
            continue;
        }
        if n.is_none() {
            return Err(Error::Parse(format!(
                "line {}: clause data before 'p cnf' header",
                lineno + 1
            )));
        }
        for token in line.split_whitespace() {
            if token == "%" {
                break 'lines;
            }
            let lit = token.parse::<i32>().map_err(|e| {
                Error::Parse(format!("line {}: bad literal '{token}': {e}", lineno + 1))
            })?;
            if lit == 0 {
                if !current.is_empty() {
                    clauses.push(std::mem::take(&mut current));
                }
            } else {
                current.push(lit);
            }
        }
    }
    if !current.is_empty() {
        return Err(Error::Parse("unterminated clause at end of input".into()));
    }
    let n = n.ok_or_else(|| Error::Parse("missing 'p cnf' header".into()))?;
    if let Some(m) = declared_m {
        if m != clauses.len() {
            return Err(Error::Parse(format!(
                "header declares {m} clauses but {} were read",
                clauses.len()
            )));
        }
    }
    if clauses.is_empty() {
        return Err(Error::Parse(
            "instance contains no clauses; clause width is undefined".into(),
        ));
    }
    let k = clauses[0].len();
    for (i, clause) in clauses.iter().enumerate() {
        if clause.len() != k {
            return Err(Error::Parse(format!(
                "clause {} has width {} but clause 1 has width {k}",
                i + 1,
                clause.len()
            )));
        }
    }
    KSatInstance::new(n, k, clauses).map_err(|e| match e {
        Error::Input(msg) => Error::Parse(msg),
        other => other,
    })
}

/// On-disk JSON form of an instance, carrying the generator provenance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub clauses: Vec<Vec<i32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algorithm_id: Option<String>,
}

impl InstanceFile {
    pub fn new(instance: &KSatInstance, rng_spec: Option<&RngSpec>) -> Self {
        InstanceFile {
            n: instance.n(),
            k: instance.k(),
            m: instance.m(),
            clauses: instance.clauses().to_vec(),
            seed: rng_spec.map(|s| s.seed),
            algorithm_id: rng_spec.map(|s| s.algorithm_id.clone()),
        }
    }

    pub fn instance(&self) -> Result<KSatInstance> {
        let instance = KSatInstance::new(self.n, self.k, self.clauses.clone())?;
        if instance.m() != self.m {
            return Err(Error::Parse(format!(
                "instance file declares m={} but lists {} clauses",
                self.m,
                instance.m()
            )));
        }
        Ok(instance)
    }
}

/// Count solutions by brute-force enumeration of all `2^n` assignments.
/// Intended for verification at small `n`.
pub fn brute_force_solutions(instance: &KSatInstance) -> Result<Vec<PartialAssignment>> {
    let n = instance.n();
    if n > 24 {
        return Err(Error::Resource(format!(
            "brute force over 2^{n} assignments refused"
        )));
    }
    let mut solutions = Vec::new();
    for bits in 0u64..(1u64 << n) {
        let pairs: Vec<(usize, u8)> = (1..=n)
            .map(|i| (i, ((bits >> (i - 1)) & 1) as u8))
            .collect();
        let x = PartialAssignment::from_pairs(n, pairs)?;
        if instance.evaluate(&x)? == PredicateVerdict::True {
            solutions.push(x);
        }
    }
    Ok(solutions)
}
