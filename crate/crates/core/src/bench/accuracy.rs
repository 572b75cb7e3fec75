use crate::error::{Error, Result};
use crate::graph::VertexMapping;
use crate::matcher::MatchResult;

/// Fraction of `eligible` vertices (all of `truth`'s domain when `None`) that
/// the result maps to their true image. Unmatched vertices count as errors.
pub fn accuracy(result: &MatchResult, truth: &VertexMapping, eligible: Option<&[usize]>) -> Result<f64> {
    let correct = |u: usize| truth.get(u).is_some() && result.mapping.get(u) == truth.get(u);
    let (hits, total) = match eligible {
        None => (truth.agreement(&result.mapping), truth.domain_size()),
        Some(set) => (set.iter().filter(|&&u| correct(u)).count(), set.len()),
    };
    if total == 0 {
        return Err(Error::domain("accuracy over an empty vertex set"));
    }
    Ok(hits as f64 / total as f64)
}
