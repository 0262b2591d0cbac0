//! Parametric solution families: representation, scalar-equivalence matching
//! of solution vectors against templates, coverage classification, and
//! verification of family generic ranks.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use serde::Deserialize;

use crate::consequences::ConsequenceMatrix;
use crate::error::{Error, Result};
use crate::linalg::{specialized_rank, GenericRankReport};
use crate::linear_form::LinearForm;
use crate::search::{CoefficientVector, SolutionRecord};

/// A parametric coefficient pattern: one linear form per slot, a label, and
/// the generic rank its instances attain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyTemplate {
    pub label: String,
    pub entries: Vec<LinearForm>,
    pub generic_rank: usize,
}

impl FamilyTemplate {
    pub fn parameter_ids(&self) -> BTreeSet<u32> {
        self.entries
            .iter()
            .flat_map(|e| e.parameter_ids())
            .collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.parameter_ids().len()
    }

    /// Evaluates the template at a parameter assignment.
    pub fn instance(&self, params: &BTreeMap<u32, BigRational>) -> Vec<BigRational> {
        self.entries
            .iter()
            .map(|e| e.eval(|id| params.get(&id).cloned().unwrap_or_else(BigRational::zero)))
            .collect()
    }
}

/// Parses templates from JSON lines: one object per line with `label`,
/// `entries` (strings like "0", "1", "-a4", "-a5-1"), and `generic_rank`.
pub fn parse_templates_jsonl(input: &str) -> Result<Vec<FamilyTemplate>> {
    #[derive(Deserialize)]
    struct Line {
        label: String,
        entries: Vec<String>,
        generic_rank: usize,
    }
    let mut out = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: Line = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        let entries = parsed
            .entries
            .iter()
            .map(|s| {
                LinearForm::parse(s).map_err(|e| Error::Parse {
                    line: idx + 1,
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(FamilyTemplate {
            label: parsed.label,
            entries,
            generic_rank: parsed.generic_rank,
        });
    }
    Ok(out)
}

/// The grid of parameter values searched by [`matches`]: rationals from
/// `lo` to `hi` in steps of `1/denominator`.
pub fn param_grid(lo: i64, hi: i64, denominator: u32) -> Result<Vec<BigRational>> {
    if denominator == 0 {
        return Err(Error::Parameter("denominator must be positive".into()));
    }
    if lo > hi {
        return Err(Error::Parameter(format!("empty range {lo}..{hi}")));
    }
    let d = BigInt::from(denominator);
    Ok((lo * denominator as i64..=hi * denominator as i64)
        .map(|k| BigRational::new(BigInt::from(k), d.clone()))
        .collect())
}

/// The default grid: half-integer steps over [-2, 2]. Integer parameters
/// alone cannot cover the corpora: a leading coefficient of 2 forces
/// half-integer parameters, e.g. (2,0,0,1) = 2 * (1,0,0,1/2).
pub fn default_param_grid() -> Vec<BigRational> {
    param_grid(-2, 2, 2).expect("static grid")
}

/// A successful match: `vector = scalar * template(parameters)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchWitness {
    pub parameters: BTreeMap<u32, BigRational>,
    pub scalar: BigRational,
}

/// Searches parameter assignments over the grid (exhaustively, ascending)
/// for one making the vector a nonzero scalar multiple of the template
/// instance. The scalar is fixed by the first nonzero slot and verified
/// entrywise.
pub fn matches(
    template: &FamilyTemplate,
    vector: &CoefficientVector,
    grid: &[BigRational],
) -> Option<MatchWitness> {
    if template.entries.len() != vector.len() {
        return None;
    }
    let ids: Vec<u32> = template.parameter_ids().into_iter().collect();
    let values: Vec<BigRational> = vector
        .values()
        .iter()
        .map(|&v| BigRational::from_integer(v.into()))
        .collect();
    let mut assignment = vec![0usize; ids.len()];
    loop {
        let params: BTreeMap<u32, BigRational> = ids
            .iter()
            .zip(&assignment)
            .map(|(&id, &k)| (id, grid[k].clone()))
            .collect();
        if let Some(scalar) = proportionality(&template.instance(&params), &values) {
            return Some(MatchWitness {
                parameters: params,
                scalar,
            });
        }
        // advance the grid odometer
        let mut pos = ids.len();
        loop {
            if pos == 0 {
                return None;
            }
            pos -= 1;
            if assignment[pos] + 1 < grid.len() {
                assignment[pos] += 1;
                for a in &mut assignment[pos + 1..] {
                    *a = 0;
                }
                break;
            }
        }
    }
}

/// The nonzero scalar with `value = scalar * instance`, if any.
fn proportionality(instance: &[BigRational], values: &[BigRational]) -> Option<BigRational> {
    let mut scalar: Option<BigRational> = None;
    for (w, v) in instance.iter().zip(values) {
        if w.is_zero() {
            if !v.is_zero() {
                return None;
            }
            continue;
        }
        let ratio = v / w;
        match &scalar {
            None => scalar = Some(ratio),
            Some(s) if *s == ratio => {}
            Some(_) => return None,
        }
    }
    scalar.filter(|s| !s.is_zero())
}

/// Per-solution match list plus summary statistics.
#[derive(Debug, Clone)]
pub struct CoverageReport {
    /// For each input solution, the labels of every matching template.
    pub assignments: Vec<(CoefficientVector, Vec<String>)>,
    /// Solutions matched by no template.
    pub unmatched: Vec<CoefficientVector>,
    /// Member count per template, in template order.
    pub template_counts: Vec<(String, usize)>,
    /// Templates with no members in the solution set.
    pub unused_templates: Vec<String>,
}

impl CoverageReport {
    pub fn is_complete(&self) -> bool {
        self.unmatched.is_empty()
    }
}

/// Matches every solution against every template. Overlaps are recorded as
/// multiplicity; nothing forces a partition.
pub fn classify_solutions(
    solutions: &[SolutionRecord],
    templates: &[FamilyTemplate],
    grid: &[BigRational],
) -> CoverageReport {
    let mut assignments = Vec::with_capacity(solutions.len());
    let mut unmatched = Vec::new();
    let mut counts = vec![0usize; templates.len()];
    for solution in solutions {
        let mut labels = Vec::new();
        for (k, template) in templates.iter().enumerate() {
            if matches(template, &solution.vector, grid).is_some() {
                labels.push(template.label.clone());
                counts[k] += 1;
            }
        }
        if labels.is_empty() {
            unmatched.push(solution.vector.clone());
        }
        assignments.push((solution.vector.clone(), labels));
    }
    let template_counts: Vec<(String, usize)> = templates
        .iter()
        .zip(&counts)
        .map(|(t, &c)| (t.label.clone(), c))
        .collect();
    let unused_templates = template_counts
        .iter()
        .filter(|(_, c)| *c == 0)
        .map(|(l, _)| l.clone())
        .collect();
    CoverageReport {
        assignments,
        unmatched,
        template_counts,
        unused_templates,
    }
}

/// Generic rank of a family: the template's parameters are specialized
/// uniformly at random in F_q and the consequence matrix rank is maximized
/// over the trials, exactly as [`crate::linalg::generic_rank`] does for free
/// coefficients. A zero-parameter template degenerates to the rank of its
/// single instance.
pub fn verify_family_generic_rank(
    family: &FamilyTemplate,
    template: &ConsequenceMatrix<LinearForm>,
    trials: u32,
    seed: u64,
    q: u64,
) -> Result<GenericRankReport> {
    if family.entries.len() != template.source_dimension() {
        return Err(Error::Parameter(format!(
            "family has {} entries but the template has {} source coefficients",
            family.entries.len(),
            template.source_dimension()
        )));
    }
    let ids: Vec<u32> = family.parameter_ids().into_iter().collect();
    let entries = family.entries.clone();
    specialized_rank(template, trials, seed, q, move |rng, q| {
        let params: BTreeMap<u32, u64> = ids.iter().map(|&id| (id, rng.gen_range(0..q))).collect();
        entries
            .iter()
            .map(|e| e.eval_mod(|id| params[&id], q))
            .collect()
    })
}

/// Reference data shipped with the crate.
pub mod builtin {
    /// Family templates for the ternary degree-3 studies.
    pub const FAMILIES_DEG3_MULT1: &str = include_str!("../data/families_deg3_mult1.jsonl");
    pub const FAMILIES_DEG3_MULT2: &str = include_str!("../data/families_deg3_mult2.jsonl");

    /// Verified submaximal-rank solution corpora (vector plus both ranks).
    pub const SOLUTIONS_DEG3_MULT1: &str = include_str!("../data/solutions_deg3_mult1.csv");
    pub const SOLUTIONS_DEG3_MULT2: &str = include_str!("../data/solutions_deg3_mult2.csv");
}
