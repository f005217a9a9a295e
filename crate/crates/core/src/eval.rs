//! Filtered-ranking evaluation: per-query ranks with a midpoint tie policy,
//! MRR / Hits@k aggregation, and the user-facing causal prediction and
//! explanation queries.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::embed::{EmbedError, EmbeddingState, Side};
use crate::model::{CausalKG, EntityKind, Quad, RelationKind, TripleKey};
use crate::num::Scalar;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("empty test set")]
    EmptyTestSet,
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error("I/O failure: {0}")]
    Io(#[from] std::io::Error),
}

/// Which sides of a test quad are corrupted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SidePolicy {
    /// Tail-only for the reified type relations (the type slot is the
    /// unknown), both sides for `causes`/`causedBy`, tail for the rest.
    PerRelation,
    TailOnly,
    BothSides,
}

impl SidePolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            SidePolicy::PerRelation => "per-relation",
            SidePolicy::TailOnly => "tail",
            SidePolicy::BothSides => "both",
        }
    }

    pub fn parse(s: &str) -> Option<SidePolicy> {
        match s {
            "per-relation" => Some(SidePolicy::PerRelation),
            "tail" => Some(SidePolicy::TailOnly),
            "both" => Some(SidePolicy::BothSides),
            _ => None,
        }
    }

    fn sides(self, relation: RelationKind) -> &'static [Side] {
        match self {
            SidePolicy::TailOnly => &[Side::Tail],
            SidePolicy::BothSides => &[Side::Head, Side::Tail],
            SidePolicy::PerRelation => match relation {
                RelationKind::Causes | RelationKind::CausedBy => &[Side::Head, Side::Tail],
                _ => &[Side::Tail],
            },
        }
    }
}

/// Candidate domains and the filter set shared by all queries of one run.
#[derive(Debug, Clone, Default)]
pub struct EvalContext {
    pub filter: HashSet<TripleKey>,
    domains: BTreeMap<EntityKind, Vec<String>>,
    all_entities: Vec<String>,
    /// Corrupt over all entities instead of the slot's kind.
    pub wide_domain: bool,
}

impl EvalContext {
    /// Builds filter set and kind domains from all known-true quads
    /// (train, valid, test, and any held-out support quads).
    pub fn from_known_quads<'a>(known: impl IntoIterator<Item = &'a Quad>) -> EvalContext {
        let mut filter = HashSet::new();
        let mut kinds: BTreeMap<String, EntityKind> = BTreeMap::new();
        for quad in known {
            filter.insert(quad.key());
            kinds.insert(quad.head.name().to_owned(), quad.head.kind());
            kinds.insert(quad.tail.name().to_owned(), quad.tail.kind());
        }
        let mut domains: BTreeMap<EntityKind, Vec<String>> = BTreeMap::new();
        let mut all = Vec::with_capacity(kinds.len());
        for (name, kind) in kinds {
            domains.entry(kind).or_default().push(name.clone());
            all.push(name);
        }
        EvalContext {
            filter,
            domains,
            all_entities: all,
            wide_domain: false,
        }
    }

    pub fn from_kg(kg: &CausalKG) -> EvalContext {
        let quads: Vec<Quad> = kg.quads().collect();
        Self::from_known_quads(quads.iter())
    }

    pub fn domain_for(&self, relation: RelationKind, side: Side) -> &[String] {
        if self.wide_domain {
            return &self.all_entities;
        }
        let kind = match side {
            Side::Head => relation.head_kind(),
            Side::Tail => relation.tail_kind(),
        };
        kind.and_then(|k| self.domains.get(&k))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn entities_of_kind(&self, kind: EntityKind) -> &[String] {
        self.domains.get(&kind).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// One ranked test query.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedQuery {
    pub quad: Quad,
    pub corrupted_side: Side,
    pub rank: usize,
    pub candidates_considered: usize,
}

/// Ranks the true quad against corruptions of one side over the candidate
/// domain. Corruptions whose key appears in `filter` are excluded, as are
/// candidates without an embedding. Rank uses the midpoint tie policy:
/// 1 + |worse| + ceil(|ties| / 2).
pub fn rank<S: Scalar>(
    state: &EmbeddingState<S>,
    quad: &Quad,
    side: Side,
    filter: &HashSet<TripleKey>,
    domain: &[String],
) -> Result<RankedQuery, EvalError> {
    let head = quad.head.name();
    let tail = quad.tail.name();
    let relation = quad.relation.as_str();
    let true_score = state.score(head, relation, tail)?;

    let original = match side {
        Side::Head => head,
        Side::Tail => tail,
    };
    let mut worse = 0usize;
    let mut ties = 0usize;
    let mut considered = 1usize;
    for candidate in domain {
        if candidate == original {
            continue;
        }
        let key = match side {
            Side::Head => TripleKey::new(candidate.clone(), quad.relation, tail),
            Side::Tail => TripleKey::new(head, quad.relation, candidate.clone()),
        };
        if filter.contains(&key) {
            continue;
        }
        let score = match side {
            Side::Head => state.score(candidate, relation, tail),
            Side::Tail => state.score(head, relation, candidate),
        };
        let score = match score {
            Ok(s) => s,
            // candidate without an embedding cannot compete
            Err(EmbedError::UnknownEntity(_)) => continue,
            Err(e) => return Err(e.into()),
        };
        considered += 1;
        if score > true_score {
            worse += 1;
        } else if score == true_score {
            ties += 1;
        }
    }
    Ok(RankedQuery {
        quad: quad.clone(),
        corrupted_side: side,
        rank: 1 + worse + ties.div_ceil(2),
        candidates_considered: considered,
    })
}

/// Per-relation slice of a rank report.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RelationMetrics {
    pub mrr: f64,
    pub hits1: f64,
    pub hits3: f64,
    pub hits10: f64,
    pub n_queries: usize,
}

/// Aggregate ranking metrics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RankReport {
    pub mrr: f64,
    pub hits1: f64,
    pub hits3: f64,
    pub hits10: f64,
    pub n_queries: usize,
    pub per_relation: BTreeMap<String, RelationMetrics>,
}

impl RankReport {
    /// Aggregates (relation, rank) pairs: MRR is the mean reciprocal rank,
    /// Hits@k the fraction of ranks <= k.
    pub fn from_ranks<'a>(ranks: impl IntoIterator<Item = (&'a str, usize)>) -> RankReport {
        #[derive(Default)]
        struct Acc {
            rr: f64,
            h1: usize,
            h3: usize,
            h10: usize,
            n: usize,
        }
        impl Acc {
            fn push(&mut self, rank: usize) {
                self.rr += 1.0 / rank as f64;
                self.n += 1;
                if rank <= 1 {
                    self.h1 += 1;
                }
                if rank <= 3 {
                    self.h3 += 1;
                }
                if rank <= 10 {
                    self.h10 += 1;
                }
            }
            fn metrics(&self) -> RelationMetrics {
                let n = self.n.max(1) as f64;
                RelationMetrics {
                    mrr: self.rr / n,
                    hits1: self.h1 as f64 / n,
                    hits3: self.h3 as f64 / n,
                    hits10: self.h10 as f64 / n,
                    n_queries: self.n,
                }
            }
        }
        let mut total = Acc::default();
        let mut by_relation: BTreeMap<String, Acc> = BTreeMap::new();
        for (relation, rank) in ranks {
            total.push(rank);
            by_relation.entry(relation.to_owned()).or_default().push(rank);
        }
        let t = total.metrics();
        RankReport {
            mrr: t.mrr,
            hits1: t.hits1,
            hits3: t.hits3,
            hits10: t.hits10,
            n_queries: total.n,
            per_relation: by_relation
                .into_iter()
                .map(|(r, acc)| (r, acc.metrics()))
                .collect(),
        }
    }
}

/// Runs the filtered ranking protocol over the test quads.
pub fn evaluate<S: Scalar>(
    state: &EmbeddingState<S>,
    test: &[Quad],
    ctx: &EvalContext,
    policy: SidePolicy,
) -> Result<RankReport, EvalError> {
    if test.is_empty() {
        return Err(EvalError::EmptyTestSet);
    }
    let mut ranks: Vec<(String, usize)> = Vec::new();
    for quad in test {
        for &side in policy.sides(quad.relation) {
            let domain = ctx.domain_for(quad.relation, side);
            let ranked = rank(state, quad, side, &ctx.filter, domain)?;
            ranks.push((quad.relation.as_str().to_owned(), ranked.rank));
        }
    }
    Ok(RankReport::from_ranks(
        ranks.iter().map(|(r, k)| (r.as_str(), *k)),
    ))
}

fn query_types<S: Scalar>(
    state: &EmbeddingState<S>,
    entity: &str,
    relation: RelationKind,
    top_k: usize,
    type_domain: &[String],
) -> Result<Vec<(String, S)>, EvalError> {
    if state.entity_index(entity).is_none() {
        return Err(EvalError::Embed(EmbedError::UnknownEntity(entity.to_owned())));
    }
    let mut scored: Vec<(String, S)> = Vec::new();
    for candidate in type_domain {
        match state.score(entity, relation.as_str(), candidate) {
            Ok(s) => scored.push((candidate.clone(), s)),
            Err(EmbedError::UnknownEntity(_)) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.0.cmp(&b.0))
    });
    scored.truncate(top_k);
    Ok(scored)
}

/// Causal prediction: ranks candidate effect types for a cause entity,
/// highest score first, ties broken by name.
pub fn query_predict<S: Scalar>(
    state: &EmbeddingState<S>,
    cause: &str,
    top_k: usize,
    type_domain: &[String],
) -> Result<Vec<(String, S)>, EvalError> {
    query_types(state, cause, RelationKind::CausesType, top_k, type_domain)
}

/// Causal explanation: ranks candidate cause types for an effect entity.
pub fn query_explain<S: Scalar>(
    state: &EmbeddingState<S>,
    effect: &str,
    top_k: usize,
    type_domain: &[String],
) -> Result<Vec<(String, S)>, EvalError> {
    query_types(state, effect, RelationKind::CausedByType, top_k, type_domain)
}

/// Writes the line-oriented report file: global `metric TAB value` lines,
/// then per-relation blocks, values with six decimals.
pub fn write_report(report: &RankReport, path: impl AsRef<Path>) -> Result<(), EvalError> {
    let mut out = String::new();
    out.push_str(&format!("mrr\t{:.6}\n", report.mrr));
    out.push_str(&format!("hits1\t{:.6}\n", report.hits1));
    out.push_str(&format!("hits3\t{:.6}\n", report.hits3));
    out.push_str(&format!("hits10\t{:.6}\n", report.hits10));
    out.push_str(&format!("n_queries\t{}\n", report.n_queries));
    for (relation, m) in &report.per_relation {
        out.push_str(&format!("rel.{relation}.mrr\t{:.6}\n", m.mrr));
        out.push_str(&format!("rel.{relation}.hits1\t{:.6}\n", m.hits1));
        out.push_str(&format!("rel.{relation}.hits3\t{:.6}\n", m.hits3));
        out.push_str(&format!("rel.{relation}.hits10\t{:.6}\n", m.hits10));
        out.push_str(&format!("rel.{relation}.n_queries\t{}\n", m.n_queries));
    }
    let mut file = fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}
