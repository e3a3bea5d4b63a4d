//! The Weyl group of type C_g as signed permutations.
//!
//! `w` sends `ε_i` to `±ε_{π(i)}`. Simple reflections are numbered from 1 as
//! usual: `s_i` (i < g) swaps coordinates i and i+1, `s_g` negates coordinate g.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::finalg::ModMatrix;
use crate::sympgrp::SymplecticElement;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeylElement {
    perm: Vec<usize>,
    flip: Vec<bool>,
}

impl WeylElement {
    pub fn identity(g: usize) -> Self {
        Self {
            perm: (0..g).collect(),
            flip: vec![false; g],
        }
    }

    /// `perm` is 0-based; `signs[i] = −1` marks a flipped coordinate.
    pub fn new(perm: Vec<usize>, signs: &[i8]) -> Result<Self> {
        let g = perm.len();
        let mut seen = vec![false; g];
        for &p in &perm {
            if p >= g || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidParameter(format!(
                    "{perm:?} is not a permutation"
                )));
            }
        }
        if signs.len() != g || signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidParameter(format!(
                "bad sign vector {signs:?}"
            )));
        }
        Ok(Self {
            perm,
            flip: signs.iter().map(|&s| s == -1).collect(),
        })
    }

    /// The pure sign change negating the coordinates where `flips` is set.
    pub fn sign_vector(flips: &[bool]) -> Self {
        Self {
            perm: (0..flips.len()).collect(),
            flip: flips.to_vec(),
        }
    }

    /// Simple reflection `s_i`, `1 ≤ i ≤ g`.
    pub fn simple(g: usize, i: usize) -> Self {
        assert!(
            1 <= i && i <= g,
            "simple reflection index {i} out of range for g={g}"
        );
        let mut w = Self::identity(g);
        if i < g {
            w.perm.swap(i - 1, i);
        } else {
            w.flip[g - 1] = true;
        }
        w
    }

    /// Product of simple reflections, leftmost first.
    pub fn from_word(g: usize, word: &[usize]) -> Self {
        word.iter().fold(Self::identity(g), |acc, &i| {
            acc.compose(&Self::simple(g, i)).expect("same genus")
        })
    }

    /// `w_0 = −1`.
    pub fn longest(g: usize) -> Self {
        Self::sign_vector(&vec![true; g])
    }

    pub fn genus(&self) -> usize {
        self.perm.len()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn flips(&self) -> &[bool] {
        &self.flip
    }

    pub fn signs(&self) -> Vec<i8> {
        self.flip.iter().map(|&f| if f { -1 } else { 1 }).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p) && !self.flip.iter().any(|&f| f)
    }

    pub fn is_sign_vector(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.genus() != other.genus() {
            return Err(Error::GenusMismatch {
                left: self.genus(),
                right: other.genus(),
            });
        }
        let g = self.genus();
        let perm = (0..g).map(|i| self.perm[other.perm[i]]).collect();
        let flip = (0..g)
            .map(|i| other.flip[i] ^ self.flip[other.perm[i]])
            .collect();
        Ok(Self { perm, flip })
    }

    pub fn inverse(&self) -> Self {
        let g = self.genus();
        let mut perm = vec![0; g];
        let mut flip = vec![false; g];
        for i in 0..g {
            perm[self.perm[i]] = i;
            flip[self.perm[i]] = self.flip[i];
        }
        Self { perm, flip }
    }

    /// Image of a vector in the ε-basis.
    pub fn apply(&self, v: &[i64]) -> Vec<i64> {
        let mut out = vec![0; v.len()];
        for (i, &x) in v.iter().enumerate() {
            out[self.perm[i]] = if self.flip[i] { -x } else { x };
        }
        out
    }

    /// Number of positive roots sent to negative roots.
    pub fn length(&self) -> usize {
        positive_roots(self.genus())
            .iter()
            .filter(|r| !is_positive(&self.apply(r)))
            .count()
    }

    /// A reduced expression, leftmost factor first.
    pub fn reduced_word(&self) -> Vec<usize> {
        let g = self.genus();
        let mut word = Vec::new();
        let mut w = self.clone();
        while !w.is_identity() {
            let len = w.length();
            let (i, sw) = (1..=g)
                .map(|i| (i, Self::simple(g, i).compose(&w).expect("same genus")))
                .find(|(_, sw)| sw.length() < len)
                .expect("a non-identity element has a left descent");
            word.push(i);
            w = sw;
        }
        word
    }

    /// Simple reflections occurring in a reduced word (independent of the word).
    pub fn support(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.reduced_word().into_iter().collect();
        set.into_iter().collect()
    }

    pub fn order(&self) -> usize {
        let mut k = 1;
        let mut x = self.clone();
        while !x.is_identity() {
            x = x.compose(self).expect("same genus");
            k += 1;
        }
        k
    }
}

fn positive_roots(g: usize) -> Vec<Vec<i64>> {
    let mut roots = Vec::new();
    for i in 0..g {
        for j in i..g {
            let mut plus = vec![0; g];
            plus[i] += 1;
            plus[j] += 1;
            roots.push(plus);
            if i < j {
                let mut minus = vec![0; g];
                minus[i] = 1;
                minus[j] = -1;
                roots.push(minus);
            }
        }
    }
    roots
}

fn is_positive(v: &[i64]) -> bool {
    v.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
}

/// The simple system `S = {s_1, …, s_g}` and the nested subsets `I_k = {s_1, …, s_k}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorSet {
    g: usize,
}

impl GeneratorSet {
    pub fn new(g: usize) -> Self {
        Self { g }
    }

    pub fn genus(&self) -> usize {
        self.g
    }

    pub fn indices(&self) -> Vec<usize> {
        (1..=self.g).collect()
    }

    pub fn reflections(&self) -> Vec<WeylElement> {
        (1..=self.g)
            .map(|i| WeylElement::simple(self.g, i))
            .collect()
    }

    /// `I_k`; `I_0 = ∅` gives B and `I_{g−1}` the Siegel parabolic.
    pub fn nested(&self, k: usize) -> Vec<usize> {
        (1..=k.min(self.g)).collect()
    }

    /// `{s_1, …, s_{g−1}}`, whose parabolic is P = M ⋉ U.
    pub fn siegel(&self) -> Vec<usize> {
        self.nested(self.g - 1)
    }
}

/// All `g!·2^g` elements, sorted.
pub fn all_elements(g: usize) -> Vec<WeylElement> {
    subgroup_generated(g, &(1..=g).collect::<Vec<_>>())
}

/// `W_I` by closure; `I` holds 1-based simple reflection indices.
pub fn subgroup_generated(g: usize, i_set: &[usize]) -> Vec<WeylElement> {
    let gens: Vec<WeylElement> = i_set.iter().map(|&i| WeylElement::simple(g, i)).collect();
    let mut seen = BTreeSet::from([WeylElement::identity(g)]);
    let mut queue = VecDeque::from([WeylElement::identity(g)]);
    while let Some(x) = queue.pop_front() {
        for s in &gens {
            let y = x.compose(s).expect("same genus");
            if seen.insert(y.clone()) {
                queue.push_back(y);
            }
        }
    }
    seen.into_iter().collect()
}

/// Minimal-length representatives of the right cosets `W_I \ W`: the elements
/// with no left descent in `I`.
pub fn coset_representatives(g: usize, i_set: &[usize]) -> Vec<WeylElement> {
    all_elements(g)
        .into_iter()
        .filter(|w| {
            let len = w.length();
            i_set.iter().all(|&i| {
                WeylElement::simple(g, i)
                    .compose(w)
                    .expect("same genus")
                    .length()
                    > len
            })
        })
        .collect()
}

/// The sign-change subgroup `(±1)^g`.
pub fn sign_vectors(g: usize) -> Vec<WeylElement> {
    (0..1u32 << g)
        .map(|mask| {
            let flips: Vec<bool> = (0..g).map(|i| mask >> i & 1 == 1).collect();
            WeylElement::sign_vector(&flips)
        })
        .collect()
}

/// Distance from the identity in the Cayley graph of `S`, for every element.
pub fn cayley_distances(g: usize) -> HashMap<WeylElement, usize> {
    let gens = GeneratorSet::new(g).reflections();
    let mut dist = HashMap::from([(WeylElement::identity(g), 0)]);
    let mut queue = VecDeque::from([WeylElement::identity(g)]);
    while let Some(x) = queue.pop_front() {
        let d = dist[&x];
        for s in &gens {
            let y = s.compose(&x).expect("same genus");
            if !dist.contains_key(&y) {
                dist.insert(y.clone(), d + 1);
                queue.push_back(y);
            }
        }
    }
    dist
}

/// Signed permutation matrix in Sp(2g, ℤ/nℤ). On columns: an unflipped
/// coordinate sends `e_i ↦ e_{π(i)}`, `f_i ↦ f_{π(i)}`; a flipped one sends
/// `e_i ↦ −f_{π(i)}`, `f_i ↦ e_{π(i)}`, so the g = 1 flip lifts to `J`.
pub fn matrix_lift(w: &WeylElement, n: u32) -> SymplecticElement {
    let g = w.genus();
    let mut m = ModMatrix::zeros(n, 2 * g, 2 * g);
    for i in 0..g {
        let t = w.perm[i];
        if w.flip[i] {
            m.set_signed(g + t, i, -1);
            m.set(t, g + i, 1);
        } else {
            m.set(t, i, 1);
            m.set(g + t, g + i, 1);
        }
    }
    SymplecticElement::from_sp_unchecked(m)
}
