//! Exact shuffle Hopf algebra over the letter alphabet `(n; a)` and the
//! decomposition `Sh(V) = Sh*(V)[X]` with `X` the letter `(1; 0)`, which
//! underlies shuffle regularization.

use crate::exact::{CoeffField, QC};
use std::collections::BTreeMap;
use std::fmt;

/// A letter `(n; a)`: a non-negative integer and a puncture representative,
/// stored as an index into the configured puncture table (index 0 is the
/// origin).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub n: u32,
    pub a: u16,
}

impl Letter {
    pub fn new(n: u32, a: u16) -> Self {
        Letter { n, a }
    }

    /// The distinguished letter `(1; 0)` whose form has a pole at the
    /// basepoint.
    pub fn x0() -> Self {
        Letter { n: 1, a: 0 }
    }

    pub fn is_x0(&self) -> bool {
        self.n == 1 && self.a == 0
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.n, self.a)
    }
}

/// A word: a finite ordered sequence of letters. The empty word is the
/// algebra unit.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of leading `(1; 0)` letters.
    pub fn leading_x0_run(&self) -> usize {
        self.0.iter().take_while(|l| l.is_x0()).count()
    }

    /// True when the word is empty or does not start with `(1; 0)`.
    pub fn is_regular(&self) -> bool {
        self.leading_x0_run() == 0
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "|")?;
            }
            write!(f, "{}", l)?;
        }
        write!(f, "]")
    }
}

/// All interleavings of two letter sequences, with multiplicity.
pub fn shuffle_words<T: Clone>(u: &[T], v: &[T]) -> Vec<Vec<T>> {
    if u.is_empty() {
        return vec![v.to_vec()];
    }
    if v.is_empty() {
        return vec![u.to_vec()];
    }
    let mut out = Vec::new();
    for mut w in shuffle_words(&u[1..], v) {
        w.insert(0, u[0].clone());
        out.push(w);
    }
    for mut w in shuffle_words(u, &v[1..]) {
        w.insert(0, v[0].clone());
        out.push(w);
    }
    out
}

/// The `k+1` prefix/suffix splittings of a sequence, in prefix order.
pub fn deconcatenations<T: Clone>(w: &[T]) -> Vec<(Vec<T>, Vec<T>)> {
    (0..=w.len())
        .map(|j| (w[..j].to_vec(), w[j..].to_vec()))
        .collect()
}

/// A formal linear combination of words. No zero coefficients are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct ShuffleElement<K = QC> {
    pub terms: BTreeMap<Word, K>,
}

impl<K: CoeffField> ShuffleElement<K> {
    pub fn zero() -> Self {
        ShuffleElement {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::from_word(Word::empty())
    }

    pub fn from_word(w: Word) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(w, K::one());
        ShuffleElement { terms }
    }

    pub fn from_terms(list: Vec<(Word, K)>) -> Self {
        let mut out = Self::zero();
        for (w, c) in list {
            out.add_term(w, c);
        }
        out
    }

    pub fn add_term(&mut self, w: Word, c: K) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&w) {
            Some(v) => {
                let s = v.add(&c);
                if s.is_zero() {
                    self.terms.remove(&w);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(w, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_term(w.clone(), c.neg());
        }
        out
    }

    pub fn scale(&self, c: &K) -> Self {
        let mut out = Self::zero();
        for (w, v) in &self.terms {
            out.add_term(w.clone(), v.mul(c));
        }
        out
    }

    /// Counit: coefficient of the empty word.
    pub fn counit(&self) -> K {
        self.terms
            .get(&Word::empty())
            .cloned()
            .unwrap_or_else(K::zero)
    }

    /// True iff every word with nonzero coefficient is empty or starts with
    /// a letter different from `(1; 0)`; membership in `Sh*(V)`.
    pub fn is_regular(&self) -> bool {
        self.terms.keys().all(|w| w.is_regular())
    }

    /// Degree with respect to the decomposition by leading `(1; 0)` runs;
    /// `None` encodes minus infinity (the zero element).
    pub fn degree(&self) -> Option<u32> {
        self.terms
            .keys()
            .map(|w| w.leading_x0_run() as u32)
            .max()
    }
}

/// Bilinear shuffle product.
pub fn shuffle_product<K: CoeffField>(
    u: &ShuffleElement<K>,
    v: &ShuffleElement<K>,
) -> ShuffleElement<K> {
    let mut out = ShuffleElement::zero();
    for (wu, cu) in &u.terms {
        for (wv, cv) in &v.terms {
            let c = cu.mul(cv);
            for w in shuffle_words(&wu.0, &wv.0) {
                out.add_term(Word(w), c.clone());
            }
        }
    }
    out
}

/// Deconcatenation coproduct of a single word.
pub fn deconcatenate(w: &Word) -> Vec<(Word, Word)> {
    deconcatenations(&w.0)
        .into_iter()
        .map(|(a, b)| (Word(a), Word(b)))
        .collect()
}

/// Antipode: `[w_1|...|w_k] -> (-1)^k [w_k|...|w_1]`, extended linearly.
pub fn antipode<K: CoeffField>(e: &ShuffleElement<K>) -> ShuffleElement<K> {
    let mut out = ShuffleElement::zero();
    for (w, c) in &e.terms {
        let mut rev = w.0.clone();
        rev.reverse();
        let c = if w.len() % 2 == 0 { c.clone() } else { c.neg() };
        out.add_term(Word(rev), c);
    }
    out
}

/// Polynomial in `X` with coefficients in `Sh*(V)`; the image of an element
/// under the inverse of the algebra isomorphism `Sh*(V)[X] -> Sh(V)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StarPolynomial<K = QC> {
    /// coeffs[k] multiplies X^k; every entry is regular.
    pub coeffs: Vec<ShuffleElement<K>>,
}

impl<K: CoeffField> StarPolynomial<K> {
    pub fn zero() -> Self {
        StarPolynomial { coeffs: Vec::new() }
    }

    pub fn constant(e: ShuffleElement<K>) -> Self {
        StarPolynomial { coeffs: vec![e] }
    }

    pub fn degree(&self) -> Option<u32> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, _)| k as u32)
            .max()
    }

    pub fn coeff(&self, k: usize) -> ShuffleElement<K> {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(ShuffleElement::zero)
    }

    fn add_at(&mut self, k: usize, e: &ShuffleElement<K>) {
        while self.coeffs.len() <= k {
            self.coeffs.push(ShuffleElement::zero());
        }
        self.coeffs[k] = self.coeffs[k].add(e);
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in rhs.coeffs.iter().enumerate() {
            out.add_at(k, c);
        }
        out
    }

    pub fn scale(&self, c: &K) -> Self {
        StarPolynomial {
            coeffs: self.coeffs.iter().map(|e| e.scale(c)).collect(),
        }
    }

    /// Multiply by X.
    pub fn shift(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(ShuffleElement::zero());
        coeffs.extend(self.coeffs.iter().cloned());
        StarPolynomial { coeffs }
    }
}

/// Inverse of the isomorphism `Sh*(V)[X] -> Sh(V)`: write an element as a
/// polynomial in `X = (1; 0)` with regular coefficients.
///
/// For a word with leading run of `r >= 1` copies of `(1; 0)` ahead of
/// `[h | t]` (`h != (1;0)`), the rewriting
/// `r * [x0^r | h | t] = x0 shuffle [x0^{r-1} | h | t] - [x0^{r-1} | h | x0 shuffle t]`
/// strictly reduces the leading run of every correction word, so the
/// recursion terminates.
pub fn star_decompose<K: CoeffField>(e: &ShuffleElement<K>) -> StarPolynomial<K> {
    let mut out = StarPolynomial::zero();
    for (w, c) in &e.terms {
        let p = star_decompose_word(w).scale(c);
        out = out.add(&p);
    }
    out
}

fn star_decompose_word<K: CoeffField>(w: &Word) -> StarPolynomial<K> {
    let r = w.leading_x0_run();
    if r == 0 {
        return StarPolynomial::constant(ShuffleElement::from_word(w.clone()));
    }
    if r == w.len() {
        // pure power: [x0^r] = X^r / r!
        let mut coeffs = vec![ShuffleElement::zero(); r + 1];
        let mut fact = 1i64;
        for k in 2..=r as i64 {
            fact *= k;
        }
        coeffs[r] = ShuffleElement::one().scale(&K::one().div_int(fact));
        return StarPolynomial { coeffs };
    }
    // w = [x0 | u] with u = w[1..]
    let u = Word(w.0[1..].to_vec());
    let xu = shuffle_product(
        &ShuffleElement::<K>::from_word(Word(vec![Letter::x0()])),
        &ShuffleElement::from_word(u.clone()),
    );
    // x0 sh u = r * w + correction, so w = (x0 sh u - correction) / r with
    // every correction word having a strictly shorter leading run.
    let mut correction = xu.clone();
    correction.add_term(w.clone(), K::one().mul_int(r as i64).neg());
    // decompose(w) = (X * decompose(u) - decompose(correction)) / r
    let mut p = star_decompose(&correction).scale(&K::one().neg());
    p = p.add(&star_decompose_word::<K>(&u).shift());
    p.scale(&K::one().div_int(r as i64))
}

/// Apply the isomorphism `Sh*(V)[X] -> Sh(V)` and expand all shuffle
/// products; inverse of `star_decompose`.
pub fn star_reconstruct<K: CoeffField>(p: &StarPolynomial<K>) -> ShuffleElement<K> {
    let x = ShuffleElement::<K>::from_word(Word(vec![Letter::x0()]));
    let mut out = ShuffleElement::zero();
    let mut xpow = ShuffleElement::one();
    for k in 0..p.coeffs.len() {
        if k > 0 {
            xpow = shuffle_product(&xpow, &x);
        }
        out = out.add(&shuffle_product(&p.coeffs[k], &xpow));
    }
    out
}

impl<K: CoeffField + fmt::Display> fmt::Display for ShuffleElement<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (w, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})*{}", c, w)?;
        }
        Ok(())
    }
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn letter_strategy() -> impl Strategy<Value = Letter> {
        (0u32..3, 0u16..2).prop_map(|(n, a)| Letter::new(n, a))
    }

    fn word_strategy(max_len: usize) -> impl Strategy<Value = Word> {
        proptest::collection::vec(letter_strategy(), 0..=max_len).prop_map(Word)
    }

    fn element_strategy() -> impl Strategy<Value = ShuffleElement<QC>> {
        proptest::collection::vec((word_strategy(3), -3i64..=3), 1..3).prop_map(|terms| {
            ShuffleElement::from_terms(
                terms
                    .into_iter()
                    .map(|(w, c)| (w, QC::from_int(c)))
                    .collect(),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn shuffle_commutative(u in element_strategy(), v in element_strategy()) {
            prop_assert_eq!(shuffle_product(&u, &v), shuffle_product(&v, &u));
        }

        #[test]
        fn shuffle_associative(
            u in word_strategy(2),
            v in word_strategy(2),
            w in word_strategy(2),
        ) {
            let (u, v, w) = (
                ShuffleElement::<QC>::from_word(u),
                ShuffleElement::<QC>::from_word(v),
                ShuffleElement::<QC>::from_word(w),
            );
            let a = shuffle_product(&shuffle_product(&u, &v), &w);
            let b = shuffle_product(&u, &shuffle_product(&v, &w));
            prop_assert_eq!(a, b);
        }

        #[test]
        fn coproduct_is_algebra_morphism(u in word_strategy(3), v in word_strategy(3)) {
            // Delta(u sh v) = Delta(u) sh Delta(v), compared componentwise
            // through the tensor expansion.
            let mut lhs: BTreeMap<(Word, Word), QC> = BTreeMap::new();
            let prod = shuffle_product(
                &ShuffleElement::<QC>::from_word(u.clone()),
                &ShuffleElement::<QC>::from_word(v.clone()),
            );
            for (w, c) in &prod.terms {
                for (a, b) in deconcatenate(w) {
                    let e = lhs.entry((a, b)).or_insert_with(QC::zero);
                    *e = e.add(c);
                }
            }
            lhs.retain(|_, c| !c.is_zero());

            let mut rhs: BTreeMap<(Word, Word), QC> = BTreeMap::new();
            for (u1, u2) in deconcatenate(&u) {
                for (v1, v2) in deconcatenate(&v) {
                    let left = shuffle_product(
                        &ShuffleElement::<QC>::from_word(u1.clone()),
                        &ShuffleElement::<QC>::from_word(v1.clone()),
                    );
                    let right = shuffle_product(
                        &ShuffleElement::<QC>::from_word(u2.clone()),
                        &ShuffleElement::<QC>::from_word(v2.clone()),
                    );
                    for (aw, ac) in &left.terms {
                        for (bw, bc) in &right.terms {
                            let e = rhs
                                .entry((aw.clone(), bw.clone()))
                                .or_insert_with(QC::zero);
                            *e = e.add(&ac.mul(bc));
                        }
                    }
                }
            }
            rhs.retain(|_, c| !c.is_zero());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn star_round_trip_random(e in element_strategy()) {
            let p = star_decompose(&e);
            for c in &p.coeffs {
                prop_assert!(c.is_regular());
            }
            prop_assert_eq!(star_reconstruct(&p), e);
        }

        #[test]
        fn degree_subadditive(u in element_strategy(), v in element_strategy()) {
            let p = shuffle_product(&u, &v);
            if let (Some(du), Some(dv), Some(dp)) = (u.degree(), v.degree(), p.degree()) {
                prop_assert!(dp <= du + dv);
            }
        }
    }
}
