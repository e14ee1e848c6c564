//! Truncated dyadic integers.
//!
//! A [`DyadicInt`] carries the first `M` binary digits of an element of the
//! 2-adic integers, little-endian: `ϰ = Σ ε_k 2^k`. Every operation that
//! discards a digit (the shifts) lowers the precision by one, so the number
//! of trusted digits is always explicit.

use std::fmt;

use num_bigint::BigUint;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_PRECISION: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DyadicInt {
    digits: Vec<u8>,
}

/// Longest runs of equal digits inside a prefix window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RunProfile {
    pub max_zero_run: usize,
    pub max_one_run: usize,
    pub window: usize,
}

impl RunProfile {
    pub fn max_run(&self) -> usize {
        self.max_zero_run.max(self.max_one_run)
    }

    /// Windowed membership in F_N: no run of equal digits longer than `n`
    /// among the examined digits. Says nothing about the digits beyond.
    pub fn within_f(&self, n: usize) -> bool {
        self.max_run() <= n
    }
}

impl DyadicInt {
    /// Digits of `n mod 2^precision`; negative values use two's complement.
    pub fn from_integer(n: i64, precision: usize) -> Result<Self> {
        check_precision(precision)?;
        let n = n as i128;
        let digits = (0..precision)
            .map(|k| if k < 127 { ((n >> k) & 1) as u8 } else { (n < 0) as u8 })
            .collect();
        Ok(Self { digits })
    }

    pub fn from_digits(digits: &[u8]) -> Result<Self> {
        check_precision(digits.len())?;
        if let Some(bad) = digits.iter().find(|&&d| d > 1) {
            return Err(Error::InvalidDyadic(format!("digit {bad}")));
        }
        Ok(Self { digits: digits.to_vec() })
    }

    /// Eventually periodic digits: `prefix` followed by `block` repeated,
    /// truncated to `precision` digits.
    pub fn eventually_periodic(prefix: &[u8], block: &[u8], precision: usize) -> Result<Self> {
        if block.is_empty() {
            return Err(Error::InvalidDyadic("empty periodic block".into()));
        }
        let digits: Vec<u8> = prefix
            .iter()
            .chain(block.iter().cycle())
            .take(precision)
            .copied()
            .collect();
        Self::from_digits(&digits)
    }

    /// Parses an integer (`-5`, `6`, `+10`), an explicit little-endian digit
    /// string (`0110`, `0110…`, `0110...`, optionally followed by `(M=4)`), or
    /// a pattern with a repeated block (`1(10)*`).
    ///
    /// Two or more bare `0`/`1` characters are digits, not an integer: `10`
    /// is `ϰ = 1` with `M = 2`. Write `+10` for ten.
    pub fn parse(text: &str, precision: usize) -> Result<Self> {
        let s = text.trim();
        let invalid = || Error::InvalidDyadic(text.to_string());
        let bare_digits = s.len() >= 2 && s.bytes().all(|b| b == b'0' || b == b'1');
        if bare_digits {
            return Self::from_digits(&parse_bits(s)?);
        }
        if let Ok(n) = s.parse::<i64>() {
            return Self::from_integer(n, precision);
        }
        if let Some(body) = s.strip_suffix(")*") {
            let (prefix, block) = body.split_once('(').ok_or_else(invalid)?;
            return Self::eventually_periodic(&parse_bits(prefix)?, &parse_bits(block)?, precision);
        }
        let (body, declared) = match s.split_once("(M=") {
            Some((body, rest)) => {
                let m = rest.strip_suffix(')').ok_or_else(invalid)?;
                (body, Some(m.parse::<usize>().map_err(|_| invalid())?))
            }
            None => (s, None),
        };
        let body = body.trim_end_matches('…').trim_end_matches("...");
        let bits = parse_bits(body)?;
        if let Some(m) = declared {
            if m != bits.len() {
                return Err(invalid());
            }
        }
        Self::from_digits(&bits)
    }

    pub fn precision(&self) -> usize {
        self.digits.len()
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn digit(&self, k: usize) -> u8 {
        self.digits[k]
    }

    pub fn is_odd(&self) -> bool {
        self.digits[0] == 1
    }

    /// `ϰ mod 2^m` as a machine integer.
    pub fn residue(&self, m: usize) -> u64 {
        assert!(m <= self.precision() && m <= 64, "residue of {m} digits");
        self.digits[..m]
            .iter()
            .enumerate()
            .fold(0u64, |acc, (k, &d)| acc | ((d as u64) << k))
    }

    /// The representative of `ϰ mod 2^M` in `[0, 2^M)`.
    pub fn to_representative(&self) -> BigUint {
        let mut n = BigUint::default();
        for (k, &d) in self.digits.iter().enumerate() {
            if d == 1 {
                n.set_bit(k as u64, true);
            }
        }
        n
    }

    /// Keeps the first `m` digits.
    pub fn truncate(&self, m: usize) -> Result<Self> {
        check_precision(m)?;
        if m > self.precision() {
            return Err(Error::PrecisionExhausted { needed: m, available: self.precision() });
        }
        Ok(Self { digits: self.digits[..m].to_vec() })
    }

    /// `sϰ = Σ ε_{k+1} 2^k`.
    pub fn shift(&self) -> Result<Self> {
        self.require(2)?;
        Ok(Self { digits: self.digits[1..].to_vec() })
    }

    /// `ŝϰ`: the plain shift for even ϰ, one plus the shift for odd ϰ.
    pub fn modified_shift(&self) -> Result<Self> {
        let s = self.shift()?;
        if self.is_odd() {
            Ok(s.add_int(1))
        } else {
            Ok(s)
        }
    }

    /// Applies the modified shift `n` times.
    pub fn modified_shift_n(&self, n: usize) -> Result<Self> {
        self.require(n + 1)?;
        let mut cur = self.clone();
        for _ in 0..n {
            cur = cur.modified_shift()?;
        }
        Ok(cur)
    }

    /// `2ϰ`; gains one trusted digit.
    pub fn double(&self) -> Self {
        let mut digits = Vec::with_capacity(self.precision() + 1);
        digits.push(0);
        digits.extend_from_slice(&self.digits);
        Self { digits }
    }

    pub fn negate(&self) -> Self {
        let flipped = Self { digits: self.digits.iter().map(|d| 1 - d).collect() };
        flipped.add_int(1)
    }

    /// `ϰ + n mod 2^M`.
    pub fn add_int(&self, n: i64) -> Self {
        let addend = Self::from_integer(n, self.precision()).expect("precision >= 1");
        let mut carry = 0u8;
        let digits = self
            .digits
            .iter()
            .zip(&addend.digits)
            .map(|(a, b)| {
                let s = a + b + carry;
                carry = s >> 1;
                s & 1
            })
            .collect();
        Self { digits }
    }

    /// `κ(ϰ)`: digit `n` is the lowest digit of `ŝ^n ϰ`.
    pub fn kappa_map(&self, n_terms: usize) -> Result<Self> {
        check_precision(n_terms)?;
        self.require(n_terms + 1)?;
        let mut cur = self.clone();
        let mut digits = Vec::with_capacity(n_terms);
        for n in 0..n_terms {
            digits.push(cur.digit(0));
            if n + 1 < n_terms {
                cur = cur.modified_shift()?;
            }
        }
        Ok(Self { digits })
    }

    pub fn run_profile(&self, window: usize) -> Result<RunProfile> {
        self.require(window)?;
        let mut best = [0usize; 2];
        let mut run = 0usize;
        let mut prev = None;
        for &d in &self.digits[..window] {
            run = if prev == Some(d) { run + 1 } else { 1 };
            prev = Some(d);
            best[d as usize] = best[d as usize].max(run);
        }
        Ok(RunProfile { max_zero_run: best[0], max_one_run: best[1], window })
    }

    /// Random digits whose runs of equal digits have length at most `n`.
    pub fn sample_f<R: Rng + ?Sized>(rng: &mut R, n: usize, precision: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("F_N needs N >= 1".into()));
        }
        check_precision(precision)?;
        let mut digits = Vec::with_capacity(precision);
        let mut bit: u8 = rng.random_range(0..2);
        while digits.len() < precision {
            let len = rng.random_range(1..=n);
            digits.extend(std::iter::repeat_n(bit, len));
            bit ^= 1;
        }
        digits.truncate(precision);
        Ok(Self { digits })
    }

    fn require(&self, needed: usize) -> Result<()> {
        if self.precision() < needed {
            Err(Error::PrecisionExhausted { needed, available: self.precision() })
        } else {
            Ok(())
        }
    }
}

fn check_precision(m: usize) -> Result<()> {
    if m == 0 {
        Err(Error::InvalidArgument("dyadic precision must be at least 1".into()))
    } else {
        Ok(())
    }
}

fn parse_bits(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(Error::InvalidDyadic(s.to_string())),
        })
        .collect()
}

impl fmt::Display for DyadicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.digits {
            write!(f, "{d}")?;
        }
        write!(f, "…(M={})", self.precision())
    }
}

impl fmt::Debug for DyadicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DyadicInt({self})")
    }
}

impl Serialize for DyadicInt {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn d(n: i64, m: usize) -> DyadicInt {
        DyadicInt::from_integer(n, m).unwrap()
    }

    #[test]
    fn from_integer_digits() {
        assert_eq!(d(6, 4).digits(), &[0, 1, 1, 0]);
        assert_eq!(d(-1, 4).digits(), &[1, 1, 1, 1]);
        // -5 ≡ 11 (mod 16)
        assert_eq!(d(-5, 4).digits(), d(11, 4).digits());
        assert_eq!(d(-5, 4).digits(), &[1, 1, 0, 1]);
        assert_eq!(d(-5, 4).to_representative(), BigUint::from(11u32));
    }

    #[test]
    fn wide_precision_sign_extends() {
        let x = d(-3, 200);
        assert!(x.digits()[2..].iter().all(|&b| b == 1));
        assert_eq!(x.add_int(3), d(0, 200));
    }

    #[test]
    fn shifts() {
        assert_eq!(d(6, 4).shift().unwrap(), d(3, 3));
        assert_eq!(d(-1, 8).shift().unwrap(), d(-1, 7));
        assert_eq!(d(1, 4).shift().unwrap(), d(0, 3));
        assert_eq!(d(0, 8).modified_shift().unwrap(), d(0, 7));
        assert_eq!(d(1, 8).modified_shift().unwrap(), d(1, 7));
        assert_eq!(d(5, 8).modified_shift().unwrap(), d(3, 7));
        assert!(matches!(d(1, 1).shift(), Err(Error::PrecisionExhausted { .. })));
    }

    #[test]
    fn negation() {
        assert_eq!(d(0, 8).negate(), d(0, 8));
        assert_eq!(d(1, 8).negate(), d(-1, 8));
        assert_eq!(d(5, 4).negate(), d(11, 4));
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(d(0, 16).kappa_map(10).unwrap(), d(0, 10));
        assert_eq!(d(-1, 16).kappa_map(10).unwrap(), d(1, 10));
        assert!(d(0, 10).kappa_map(10).is_err());
    }

    #[test]
    fn run_profiles() {
        let p = d(-1, 8).run_profile(8).unwrap();
        assert_eq!((p.max_one_run, p.max_zero_run), (8, 0));
        let alt = DyadicInt::eventually_periodic(&[], &[1, 0], 8).unwrap();
        let p = alt.run_profile(8).unwrap();
        assert_eq!((p.max_one_run, p.max_zero_run), (1, 1));
        let p = d(6, 8).run_profile(8).unwrap();
        assert_eq!((p.max_zero_run, p.max_one_run), (5, 2));
        assert!(d(6, 8).run_profile(9).is_err());
    }

    #[test]
    fn parsing() {
        assert_eq!(DyadicInt::parse("-5", 4).unwrap(), d(11, 4));
        assert_eq!(DyadicInt::parse("0110…(M=4)", 64).unwrap(), d(6, 4));
        assert_eq!(DyadicInt::parse("0110...", 64).unwrap(), d(6, 4));
        assert_eq!(DyadicInt::parse("0110", 64).unwrap(), d(6, 4));
        assert_eq!(DyadicInt::parse("10", 64).unwrap(), d(1, 2));
        assert_eq!(DyadicInt::parse("+10", 8).unwrap(), d(10, 8));
        assert_eq!(DyadicInt::parse("1", 8).unwrap(), d(1, 8));
        let p = DyadicInt::parse("1(10)*", 7).unwrap();
        assert_eq!(p.digits(), &[1, 1, 0, 1, 0, 1, 0]);
        assert!(DyadicInt::parse("0120...", 4).is_err());
        assert!(DyadicInt::parse("0110(M=5)", 4).is_err());
        let x = d(-7, 12);
        assert_eq!(DyadicInt::parse(&x.to_string(), 3).unwrap(), x);
    }

    #[test]
    fn sampled_f_digits_respect_run_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=4 {
            for _ in 0..50 {
                let x = DyadicInt::sample_f(&mut rng, n, 64).unwrap();
                assert!(x.run_profile(64).unwrap().within_f(n));
            }
        }
    }
}
