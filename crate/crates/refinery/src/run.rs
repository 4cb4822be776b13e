//! Verification with the oracle side split across threads.

use std::thread;

use refinery_core::enumerate::enumerate_terms;
use refinery_core::error::Result;
use refinery_core::verify::{compare, refined_side, BijectionReport, Observed};

use crate::elab::Refinement;

/// Checks `r` at `bound`. Source terms are folded by `workers` threads;
/// the report does not depend on their number.
pub fn verify(r: &Refinement, bound: usize, workers: usize) -> Result<BijectionReport> {
    let left = refined_side(&r.data, &r.forget, bound)?;
    let source = &r.data.source;
    let terms = enumerate_terms(source, bound)?;
    let chunk = terms.len().div_ceil(workers.max(1)).max(1);
    let right: Vec<Observed> = thread::scope(|s| {
        let handles: Vec<_> = terms
            .chunks(chunk)
            .map(|c| s.spawn(|| r.oracle.observe(source, c)))
            .collect();
        let mut out = Vec::new();
        for h in handles {
            out.extend(h.join().expect("oracle worker panicked")?);
        }
        Ok::<_, refinery_core::error::Error>(out)
    })?;
    Ok(compare(bound, &left, &right))
}
