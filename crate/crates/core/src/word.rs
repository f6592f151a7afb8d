//! Freely reduced words in a free group on lowercase generators `a, b, …`;
//! uppercase letters are inverses.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub generator: u8,
    pub inverse: bool,
}

impl Letter {
    pub const fn new(generator: u8, inverse: bool) -> Self {
        Letter { generator, inverse }
    }

    pub fn inv(self) -> Self {
        Letter {
            generator: self.generator,
            inverse: !self.inverse,
        }
    }

    pub fn cancels(self, other: Letter) -> bool {
        self.generator == other.generator && self.inverse != other.inverse
    }

    /// All letters over `rank` generators: `a, A, b, B, …`.
    pub fn all(rank: usize) -> Vec<Letter> {
        (0..rank as u8)
            .flat_map(|g| [Letter::new(g, false), Letter::new(g, true)])
            .collect()
    }

    fn to_char(self) -> char {
        let c = (b'a' + self.generator) as char;
        if self.inverse {
            c.to_ascii_uppercase()
        } else {
            c
        }
    }
}

/// A freely reduced word.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct GroupWord(Vec<Letter>);

impl GroupWord {
    pub fn identity() -> Self {
        GroupWord(Vec::new())
    }

    /// Freely reduces `letters`.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last().is_some_and(|&last| last.cancels(l)) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        GroupWord(out)
    }

    pub fn generator(g: u8) -> Self {
        GroupWord(vec![Letter::new(g, false)])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Self {
        GroupWord(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    pub fn pow(&self, n: usize) -> Self {
        GroupWord::from_letters(std::iter::repeat_n(self.0.iter().copied(), n).flatten())
    }

    /// `h · self · h⁻¹`.
    pub fn conjugated_by(&self, h: &GroupWord) -> Self {
        h * self * &h.inverse()
    }

    /// Commutator `[u, v] = u v u⁻¹ v⁻¹`.
    pub fn commutator(u: &GroupWord, v: &GroupWord) -> Self {
        u * v * &u.inverse() * &v.inverse()
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.0.first(), self.0.last()) {
            (Some(&f), Some(&l)) => self.0.len() == 1 || !f.cancels(l),
            _ => true,
        }
    }

    /// Strips cancelling first/last letter pairs.
    pub fn cyclically_reduced(&self) -> Self {
        let mut s = 0;
        let mut e = self.0.len();
        while e - s >= 2 && self.0[s].cancels(self.0[e - 1]) {
            s += 1;
            e -= 1;
        }
        GroupWord(self.0[s..e].to_vec())
    }

    pub fn rotated(&self, k: usize) -> Self {
        let n = self.0.len();
        if n == 0 {
            return self.clone();
        }
        let k = k % n;
        GroupWord::from_letters(self.0[k..].iter().chain(&self.0[..k]).copied())
    }

    /// Canonical representative of the conjugacy class of `self^{±1}`: the
    /// least rotation of the cyclic reduction or of its inverse.
    pub fn canonical_cyclic(&self) -> Self {
        let w = self.cyclically_reduced();
        let wi = w.inverse();
        (0..w.len().max(1))
            .flat_map(|k| [w.rotated(k), wi.rotated(k)])
            .min()
            .unwrap_or_default()
    }

    /// Some `g` with `self = g · target^{±1} · g⁻¹`, for cyclically reduced
    /// `target`.
    pub fn conjugator_to(&self, target: &GroupWord) -> Option<GroupWord> {
        let c = self.cyclically_reduced();
        let strip = (self.len() - c.len()) / 2;
        let p = GroupWord(self.0[..strip].to_vec());
        for t in [target.clone(), target.inverse()] {
            for j in 0..t.len().max(1) {
                if t.rotated(j) == c {
                    let y = GroupWord(t.0[..j].to_vec());
                    return Some(&p * &y.inverse());
                }
            }
        }
        None
    }

    /// Prefixes of length `0..=len`.
    pub fn prefixes(&self) -> impl Iterator<Item = GroupWord> + '_ {
        (0..=self.0.len()).map(move |k| GroupWord(self.0[..k].to_vec()))
    }

    /// Applies a letter substitution (an endomorphism of the free group).
    pub fn substitute(&self, f: impl Fn(Letter) -> GroupWord) -> Self {
        GroupWord::from_letters(self.0.iter().flat_map(|&l| f(l).0))
    }

    /// Exponent sum of each generator.
    pub fn abelianization(&self, rank: usize) -> Vec<i64> {
        let mut v = vec![0; rank];
        for l in &self.0 {
            v[l.generator as usize] += if l.inverse { -1 } else { 1 };
        }
        v
    }

    pub fn max_generator(&self) -> Option<u8> {
        self.0.iter().map(|l| l.generator).max()
    }
}

impl PartialOrd for GroupWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortlex order.
impl Ord for GroupWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl Mul<&GroupWord> for &GroupWord {
    type Output = GroupWord;

    fn mul(self, rhs: &GroupWord) -> GroupWord {
        GroupWord::from_letters(self.0.iter().chain(&rhs.0).copied())
    }
}

impl Mul<&GroupWord> for GroupWord {
    type Output = GroupWord;

    fn mul(self, rhs: &GroupWord) -> GroupWord {
        &self * rhs
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for l in &self.0 {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl FromStr for GroupWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "1" || s.is_empty() {
            return Ok(GroupWord::identity());
        }
        let letters = s
            .chars()
            .map(|c| match c {
                'a'..='z' => Ok(Letter::new(c as u8 - b'a', false)),
                'A'..='Z' => Ok(Letter::new(c as u8 - b'A', true)),
                _ => Err(Error::InvalidWord(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GroupWord::from_letters(letters))
    }
}

impl From<GroupWord> for String {
    fn from(w: GroupWord) -> String {
        w.to_string()
    }
}

impl TryFrom<String> for GroupWord {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Shorthand for tests and constants; panics on malformed input.
pub fn w(s: &str) -> GroupWord {
    s.parse().expect("valid word literal")
}

/// All nonempty reduced words of length `≤ max_len` over `rank` generators,
/// in shortlex order.
pub fn reduced_words(rank: usize, max_len: usize) -> Vec<GroupWord> {
    let letters = Letter::all(rank);
    let mut out = Vec::new();
    let mut layer: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for word in &layer {
            for &l in &letters {
                if word.last().is_some_and(|&last| last.cancels(l)) {
                    continue;
                }
                let mut nw = word.clone();
                nw.push(l);
                next.push(nw);
            }
        }
        out.extend(next.iter().cloned().map(GroupWord));
        layer = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reduction_and_display() {
        assert_eq!(w("abBA").to_string(), "1");
        assert_eq!(w("aabBc").to_string(), "aac");
        assert_eq!(GroupWord::commutator(&w("a"), &w("b")).to_string(), "abAB");
        assert!("a1".parse::<GroupWord>().is_err());
    }

    #[test]
    fn cyclic_canonical_form() {
        assert_eq!(w("Aba").canonical_cyclic(), w("b"));
        assert_eq!(w("ba").canonical_cyclic(), w("ab"));
        assert_eq!(w("BA").canonical_cyclic(), w("ab"));
        assert_eq!(w("aB").canonical_cyclic(), w("aB"));
        assert_eq!(w("Ab").canonical_cyclic(), w("aB"));
    }

    #[test]
    fn reduced_word_counts() {
        // 4·3^{n-1} reduced words of length n over two generators.
        let words = reduced_words(2, 4);
        assert_eq!(words.len(), 4 + 12 + 36 + 108);
        assert!(words.windows(2).all(|p| p[0] < p[1]));
    }

    fn arb_word() -> impl Strategy<Value = GroupWord> {
        prop::collection::vec((0u8..2, any::<bool>()), 0..12)
            .prop_map(|v| GroupWord::from_letters(v.into_iter().map(|(g, i)| Letter::new(g, i))))
    }

    proptest! {
        #[test]
        fn canonical_form_is_class_invariant(word in arb_word(), k in 0usize..12, h in arb_word()) {
            let c = word.canonical_cyclic();
            prop_assert_eq!(word.rotated(k).canonical_cyclic(), c.clone());
            prop_assert_eq!(word.inverse().canonical_cyclic(), c.clone());
            prop_assert_eq!(word.conjugated_by(&h).canonical_cyclic(), c);
        }

        #[test]
        fn conjugator_recovers_the_conjugation(word in arb_word(), h in arb_word(), inv in any::<bool>()) {
            let t = word.cyclically_reduced();
            prop_assume!(!t.is_empty());
            let t_signed = if inv { t.inverse() } else { t.clone() };
            let k = t_signed.conjugated_by(&h);
            let g = k.conjugator_to(&t).expect("conjugate by construction");
            let back = [t.conjugated_by(&g), t.inverse().conjugated_by(&g)];
            prop_assert!(back.contains(&k));
            prop_assert!(g.len() <= h.len() + t.len());
        }

        #[test]
        fn inverse_cancels(word in arb_word()) {
            prop_assert!((&word * &word.inverse()).is_empty());
        }
    }
}
