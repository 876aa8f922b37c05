use super::{LogicalForm, SetOp, Vocabulary};
use crate::algebra::AllenRelation;
use rand::seq::IndexedRandom;
use rand::Rng;

/// Draws a random derivation from the full grammar (all thirteen relation
/// functions, both set operations) with tree depth at most `max_depth`.
///
/// Panics if `vocab` is empty.
pub fn sample_form<R: Rng + ?Sized>(rng: &mut R, vocab: &Vocabulary, max_depth: usize) -> LogicalForm {
    let labels: Vec<&str> = vocab.labels().collect();
    assert!(!labels.is_empty(), "sampling needs at least one constant");
    sample(rng, &labels, max_depth.max(1))
}

fn sample<R: Rng + ?Sized>(rng: &mut R, labels: &[&str], depth: usize) -> LogicalForm {
    let constant = |rng: &mut R| LogicalForm::constant(*labels.choose(rng).unwrap());
    if depth <= 1 {
        return constant(rng);
    }
    match rng.random_range(0..3) {
        0 => constant(rng),
        1 => {
            let r = AllenRelation::ALL[rng.random_range(0..13)];
            LogicalForm::relation(r, sample(rng, labels, depth - 1))
        }
        _ => {
            let op = SetOp::ALL[rng.random_range(0..2)];
            let l = sample(rng, labels, depth - 1);
            LogicalForm::set_op(op, l, sample(rng, labels, depth - 1))
        }
    }
}
