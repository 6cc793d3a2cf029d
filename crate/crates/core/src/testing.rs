//! Shared fixtures for unit tests.

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ksla::Ksla;
use crate::sre::Sre;
use crate::theory::{Alphabet, Letter, Theory};

pub type Q = BigRational;

pub fn ab(k: usize) -> Theory<Q> {
    Theory::finite(Alphabet::new(["a", "b"]).unwrap(), k)
}

pub fn abc(k: usize) -> Theory<Q> {
    Theory::finite(Alphabet::new(["a", "b", "c"]).unwrap(), k)
}

pub fn dense(k: usize) -> Theory<Q> {
    Theory::dense_order(k)
}

pub fn sre(text: &str, theory: &Theory<Q>) -> Sre<Q> {
    Sre::parse(text, theory).unwrap_or_else(|e| panic!("{text}: {e}"))
}

pub fn compile(text: &str, theory: &Theory<Q>) -> Ksla<Q> {
    sre(text, theory).compile().unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random numeric word with values in `0..values` and length in `0..=max_len`.
pub fn random_num_word(rng: &mut ChaCha8Rng, max_len: usize, values: i64) -> Vec<Letter<Q>> {
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| Letter::num(rng.gen_range(0..values))).collect()
}
