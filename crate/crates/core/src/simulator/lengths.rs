//! Random termination of supergames.
//!
//! After every round a fair 100-sided die is rolled and play continues iff
//! the roll is at most `100·δ`, so `P(L = t) = δ^(t−1)(1−δ)`. When `100·δ`
//! is not an integer the same law is drawn from a uniform variate instead.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use rand::Rng;

use crate::error::{Error, Result};
use crate::exact::{self, Rational};

/// Longest supergame the engine will play.
pub const MAX_SUPERGAME_LENGTH: u32 = 1000;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Rule {
    /// Continue iff a roll in 1..=100 is at most this threshold.
    Die(u32),
    Uniform(f64),
}

/// Termination rule for one continuation probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Termination {
    rule: Rule,
}

impl Termination {
    /// `δ` may be 0 (every supergame lasts one round) but must be below 1.
    pub fn new(continuation: &Rational) -> Result<Self> {
        if continuation.is_negative() || *continuation >= Rational::one() {
            return Err(Error::invalid("delta", "must lie in [0, 1)"));
        }
        let scaled = continuation * Rational::from_integer(BigInt::from(100));
        let rule = if scaled.is_integer() {
            Rule::Die(scaled.to_integer().to_u32().expect("below 100"))
        } else {
            Rule::Uniform(exact::to_f64(continuation))
        };
        Ok(Termination { rule })
    }

    pub fn from_f64(continuation: f64) -> Result<Self> {
        Termination::new(&exact::rational_from_f64(continuation)?)
    }

    #[inline]
    fn continues<R: Rng + ?Sized>(&self, rng: &mut R) -> bool {
        match self.rule {
            Rule::Die(threshold) => rng.random_range(1..=100u32) <= threshold,
            Rule::Uniform(delta) => rng.random::<f64>() < delta,
        }
    }

    /// Number of rounds in one supergame.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<u32> {
        let mut length = 1;
        while self.continues(rng) {
            length += 1;
            if length > MAX_SUPERGAME_LENGTH {
                return Err(Error::LengthCap {
                    cap: MAX_SUPERGAME_LENGTH,
                });
            }
        }
        Ok(length)
    }
}

/// Draws `count` supergame lengths.
pub fn draw_lengths<R: Rng + ?Sized>(continuation: &Rational, count: usize, rng: &mut R) -> Result<Vec<u32>> {
    let termination = Termination::new(continuation)?;
    (0..count).map(|_| termination.draw(rng)).collect()
}
